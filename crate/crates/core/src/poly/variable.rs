use std::collections::HashMap;
use std::fmt;
use std::sync::{LazyLock, RwLock};

/// A structural variable tag. The derived `Ord` is the canonical variable order
/// used for printing and reports.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    /// Differential parameter of the coefficient field, `k`-th derivative.
    DiffParam { name: String, k: u32 },
    /// Generic differential coefficient `a{i}_{h}` differentiated `k` times.
    DiffCoeff { i: u32, h: u32, k: u32 },
    /// Generic algebraic coefficient `c{l}_{h}` of the algebraic system.
    GenCoeff { l: u32, h: u32 },
    /// Differential indeterminate `u_{j}` differentiated `k` times.
    DiffInd { j: u32, k: u32 },
    /// Algebraic variable `y{m}` replacing one differential indeterminate.
    AlgVar { m: u32 },
    /// Symbolic entry of a structural matrix.
    Structural { i: u32, j: u32 },
}

pub(crate) fn derivative_marks(k: u32) -> String {
    match k {
        0 => String::new(),
        1 => "'".into(),
        2 => "''".into(),
        k => format!("^({k})"),
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::DiffInd { j, k } => write!(f, "u{j}{}", derivative_marks(*k)),
            Variable::DiffParam { name, k } => write!(f, "{name}{}", derivative_marks(*k)),
            Variable::DiffCoeff { i, h, k } => write!(f, "a{i}_{h}{}", derivative_marks(*k)),
            Variable::GenCoeff { l, h } => write!(f, "c{l}_{h}"),
            Variable::AlgVar { m } => write!(f, "y{m}"),
            Variable::Structural { i, j } => write!(f, "X{i}_{j}"),
        }
    }
}

/// Interned handle for a [`Variable`]. Cheap to copy and hash.
///
/// Ids depend on interning order, so they are never used for anything that is
/// printed; canonical ordering goes through [`Var::cmp_canonical`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

#[derive(Default)]
struct Interner {
    vars: Vec<Variable>,
    ids: HashMap<Variable, u32>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(Default::default);

impl Var {
    pub fn new(v: Variable) -> Var {
        if let Some(&id) = INTERNER.read().unwrap().ids.get(&v) {
            return Var(id);
        }
        let mut int = INTERNER.write().unwrap();
        if let Some(&id) = int.ids.get(&v) {
            return Var(id);
        }
        let id = int.vars.len() as u32;
        int.vars.push(v.clone());
        int.ids.insert(v, id);
        Var(id)
    }

    pub fn diff_ind(j: u32, k: u32) -> Var {
        Var::new(Variable::DiffInd { j, k })
    }

    pub fn diff_param(name: &str, k: u32) -> Var {
        Var::new(Variable::DiffParam { name: name.to_string(), k })
    }

    pub fn diff_coeff(i: u32, h: u32, k: u32) -> Var {
        Var::new(Variable::DiffCoeff { i, h, k })
    }

    pub fn gen_coeff(l: u32, h: u32) -> Var {
        Var::new(Variable::GenCoeff { l, h })
    }

    pub fn alg(m: u32) -> Var {
        Var::new(Variable::AlgVar { m })
    }

    pub fn structural(i: u32, j: u32) -> Var {
        Var::new(Variable::Structural { i, j })
    }

    pub fn variable(self) -> Variable {
        INTERNER.read().unwrap().vars[self.0 as usize].clone()
    }

    pub fn cmp_canonical(self, other: Var) -> std::cmp::Ordering {
        if self == other {
            return std::cmp::Ordering::Equal;
        }
        let int = INTERNER.read().unwrap();
        int.vars[self.0 as usize].cmp(&int.vars[other.0 as usize])
    }

    pub fn is_diff_ind(self) -> bool {
        matches!(self.variable(), Variable::DiffInd { .. })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.variable().fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent() {
        let a = Var::diff_ind(1, 2);
        let b = Var::diff_ind(1, 2);
        assert_eq!(a, b);
        assert_ne!(a, Var::diff_ind(2, 1));
    }

    #[test]
    fn display_uses_derivative_marks() {
        assert_eq!(Var::diff_ind(1, 0).to_string(), "u1");
        assert_eq!(Var::diff_ind(1, 1).to_string(), "u1'");
        assert_eq!(Var::diff_ind(2, 3).to_string(), "u2^(3)");
        assert_eq!(Var::diff_param("x", 2).to_string(), "x''");
        assert_eq!(Var::diff_coeff(2, 1, 1).to_string(), "a2_1'");
        assert_eq!(Var::gen_coeff(6, 2).to_string(), "c6_2");
        assert_eq!(Var::alg(4).to_string(), "y4");
    }

    #[test]
    fn canonical_order_ignores_interning_order() {
        let late = Var::diff_ind(99, 0);
        let early = Var::gen_coeff(99, 0);
        assert_eq!(early.cmp_canonical(late), std::cmp::Ordering::Less);
    }
}
