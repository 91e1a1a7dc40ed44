//! Sparse exact Laurent polynomials over Q and the differential operations on them.

mod derive;
mod divide;
mod multipoly;
mod subst;
mod variable;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed};

pub use derive::{derive, derive_n, DerivationRules, ParamRule};
pub use divide::{deflate_linear, exact_divide, taylor_leading};
pub use multipoly::{cmp_canonical_keys, rat, ratio, Coeff, Mono, MultiPoly};
pub use subst::{substitute, substitute_poly, RatFun};
pub use variable::{Var, Variable};
pub(crate) use variable::derivative_marks;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("no derivation rule for parameter `{0}`")]
    UnknownParameter(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("not divisible")]
    NotDivisible,
    #[error("negative power of non-monomial value bound to `{0}`")]
    NegativePower(String),
    #[error("deflation of `{0}` impossible: {1}")]
    Deflation(String, String),
}

/// Differential support: the `(j, k)` pairs of the indeterminates `u_{j}^{(k)}` occurring in `f`.
pub fn diff_support(f: &MultiPoly) -> BTreeSet<(u32, u32)> {
    f.variables()
        .into_iter()
        .filter_map(|v| match v.variable() {
            Variable::DiffInd { j, k } => Some((j, k)),
            _ => None,
        })
        .collect()
}

/// Highest derivative order of `u_j` in `f`, `None` standing for minus infinity.
pub fn ord(f: &MultiPoly, j: u32) -> Option<u32> {
    diff_support(f).into_iter().filter(|p| p.0 == j).map(|p| p.1).max()
}

/// Lowest derivative order of `u_j` in `f`, `None` when absent.
pub fn lord(f: &MultiPoly, j: u32) -> Option<u32> {
    diff_support(f).into_iter().filter(|p| p.0 == j).map(|p| p.1).min()
}

pub(crate) fn fmt_coeff(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub(crate) fn fmt_mono(m: &Mono, name: &dyn Fn(&Variable) -> String) -> String {
    m.canonical_key()
        .iter()
        .map(|(v, e)| if *e == 1 { name(v) } else { format!("{}^{e}", name(v)) })
        .collect::<Vec<_>>()
        .join("*")
}

/// Canonical text of `p` with a custom spelling for variables.
pub fn render(p: &MultiPoly, name: &dyn Fn(&Variable) -> String) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (idx, (m, c)) in p.sorted_terms().iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        let body = if m.is_one() {
            fmt_coeff(&a)
        } else if a.is_one() {
            fmt_mono(m, name)
        } else {
            format!("{}*{}", fmt_coeff(&a), fmt_mono(m, name))
        };
        let sep = match (idx, neg) {
            (0, false) => "",
            (0, true) => "-",
            (_, false) => " + ",
            (_, true) => " - ",
        };
        out.push_str(sep);
        out.push_str(&body);
    }
    out
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, &|v| v.to_string()))
    }
}
