//! Differential polynomial systems.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::poly::{substitute_poly, DerivationRules, Mono, MultiPoly, ParamRule, Var, Variable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Concrete,
    Generic,
}

/// Order in which the prolongations of one polynomial are listed in ps(P).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PsOrder {
    /// Highest derivative first: `d^k f, ..., d f, f`.
    #[default]
    Descending,
    /// `f, d f, ..., d^k f`.
    Ascending,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("validation error: {0}")]
    Validation(String),
}

/// `n` differential polynomials in the `n - 1` indeterminates `u_1..u_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffSystem {
    pub polys: Vec<MultiPoly>,
    pub poly_names: Vec<String>,
    pub var_names: Vec<String>,
    pub rules: DerivationRules,
    pub mode: Mode,
    pub ps_order: PsOrder,
}

impl DiffSystem {
    pub fn new(polys: Vec<MultiPoly>, var_names: Vec<String>, rules: DerivationRules) -> Result<DiffSystem, SystemError> {
        let poly_names = (1..=polys.len()).map(|i| format!("f{i}")).collect();
        let sys = DiffSystem { polys, poly_names, var_names, rules, mode: Mode::Concrete, ps_order: PsOrder::Descending };
        sys.validate()?;
        Ok(sys)
    }

    pub fn with_order(mut self, order: PsOrder) -> Self {
        self.ps_order = order;
        self
    }

    /// Number of polynomials.
    pub fn n(&self) -> usize {
        self.polys.len()
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        let bad = |m: String| Err(SystemError::Validation(m));
        if self.polys.len() < 2 {
            return bad("a system needs at least two polynomials".into());
        }
        if self.polys.len() != self.var_names.len() + 1 {
            return bad(format!(
                "{} polynomials in {} differential indeterminates; expected n polynomials in n-1 indeterminates",
                self.polys.len(),
                self.var_names.len()
            ));
        }
        if self.poly_names.len() != self.polys.len() {
            return bad("one name per polynomial required".into());
        }
        let mut seen = BTreeSet::new();
        for (i, f) in self.polys.iter().enumerate() {
            if f.is_zero() {
                return bad(format!("polynomial {} is zero", self.poly_names[i]));
            }
            for v in f.variables() {
                match v.variable() {
                    Variable::DiffInd { j, .. } => {
                        if j == 0 || j as usize > self.var_names.len() {
                            return bad(format!("undeclared differential indeterminate {v}"));
                        }
                        seen.insert(j);
                    }
                    Variable::DiffParam { name, .. } => {
                        if self.rules.rule(&name).is_none() {
                            return bad(format!("parameter `{name}` has no derivation rule"));
                        }
                    }
                    Variable::DiffCoeff { .. } => {}
                    _ => return bad(format!("algebraic symbol {v} not allowed in a differential system")),
                }
            }
        }
        if seen.len() != self.var_names.len() {
            let missing: Vec<&str> =
                (1..=self.var_names.len()).filter(|j| !seen.contains(&(*j as u32))).map(|j| self.var_names[j - 1].as_str()).collect();
            return bad(format!("indeterminates not occurring in the system: {}", missing.join(", ")));
        }
        Ok(())
    }

    /// Splits `f_i` into its `u`-monomials and their coefficients (polynomials over the parameters).
    pub fn coefficient_terms(&self, i: usize) -> Vec<(Mono, MultiPoly)> {
        let groups = self.polys[i].collect_by(Var::is_diff_ind);
        let mut v: Vec<(Mono, MultiPoly)> = groups.into_iter().collect();
        sort_support(&mut v);
        v
    }

    /// The generic system with the same supports: coefficient of the distinguished term
    /// (the constant term if present) is `a{i}_0`, the others `a{i}_1, a{i}_2, ...`.
    pub fn to_generic(&self) -> DiffSystem {
        let mut polys = Vec::new();
        for i in 0..self.n() {
            let terms = self.coefficient_terms(i);
            let mut f = MultiPoly::zero();
            for (h, (m, _)) in terms.iter().enumerate() {
                f.add_term(m.mul(&Mono::var(Var::diff_coeff(i as u32 + 1, h as u32, 0), 1)), crate::poly::rat(1));
            }
            polys.push(f);
        }
        let mut rules = DerivationRules::new();
        for (name, r) in self.rules.params() {
            rules.set(name, r.clone());
        }
        DiffSystem { polys, mode: Mode::Generic, rules, ..self.clone() }
    }

    /// Values of the differential generic zero: `a{i}_0 -> -(sum_h a{i}_h M_h) / M_0`.
    /// Only meaningful for generic systems.
    pub fn generic_zero(&self) -> FxHashMap<Var, MultiPoly> {
        let mut out = FxHashMap::default();
        for (i, f) in self.polys.iter().enumerate() {
            let lead = Var::diff_coeff(i as u32 + 1, 0, 0);
            let parts = f.collect_in(lead);
            if let (Some(m0), Some(rest)) = (parts.get(&1), parts.get(&0)) {
                if let Some((m, c)) = m0.as_term() {
                    let inv = MultiPoly::term(m.pow(-1), c.recip());
                    out.insert(lead, -(rest * &inv));
                }
            }
        }
        out
    }

    /// Subsystem formed by `indices` (0-based), re-indexing the indeterminates it involves.
    pub fn restrict(&self, indices: &[usize]) -> Result<DiffSystem, SystemError> {
        let mut used = BTreeSet::new();
        for &i in indices {
            for v in self.polys[i].variables() {
                if let Variable::DiffInd { j, .. } = v.variable() {
                    used.insert(j);
                }
            }
        }
        let remap: FxHashMap<u32, u32> = used.iter().enumerate().map(|(new, &old)| (old, new as u32 + 1)).collect();
        let mut polys = Vec::new();
        for &i in indices {
            let f = &self.polys[i];
            let bindings: FxHashMap<Var, MultiPoly> = f
                .variables()
                .into_iter()
                .filter_map(|v| match v.variable() {
                    Variable::DiffInd { j, k } if remap[&j] != j => Some((v, MultiPoly::var(Var::diff_ind(remap[&j], k)))),
                    _ => None,
                })
                .collect();
            polys.push(substitute_poly(f, &bindings).map_err(|e| SystemError::Validation(e.to_string()))?);
        }
        let sys = DiffSystem {
            polys,
            poly_names: indices.iter().map(|&i| self.poly_names[i].clone()).collect(),
            var_names: used.iter().map(|&j| self.var_names[j as usize - 1].clone()).collect(),
            rules: self.rules.clone(),
            mode: self.mode,
            ps_order: self.ps_order,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// Declared parameter rules, for printing.
    pub fn param_rules(&self) -> Vec<(String, ParamRule)> {
        self.rules.params().map(|(n, r)| (n.clone(), r.clone())).collect()
    }
}

/// Orders `(u-monomial, coefficient)` pairs: constant monomial first, then canonical order
/// reversed so that lower degrees come first.
fn sort_support(v: &mut [(Mono, MultiPoly)]) {
    v.sort_by(|a, b| {
        let ka = (a.0.total_degree(), a.0.canonical_key());
        let kb = (b.0.total_degree(), b.0.canonical_key());
        b.0.is_one().cmp(&a.0.is_one()).then_with(|| crate::poly::cmp_canonical_keys(&kb, &ka))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(j: u32, k: u32) -> MultiPoly {
        MultiPoly::var(Var::diff_ind(j, k))
    }

    #[test]
    fn rejects_wrong_shape() {
        let r = DerivationRules::new();
        let e = DiffSystem::new(vec![u(1, 0), u(1, 1), u(1, 2)], vec!["u1".into()], r);
        assert!(matches!(e, Err(SystemError::Validation(_))));
    }

    #[test]
    fn rejects_missing_rule() {
        let r = DerivationRules::new();
        let f = &u(1, 0) * &MultiPoly::var(Var::diff_param("x", 0));
        assert!(DiffSystem::new(vec![f, u(1, 1)], vec!["u1".into()], r).is_err());
    }

    #[test]
    fn generic_version_and_zero() {
        let r = DerivationRules::new();
        let f1 = &MultiPoly::int(1) + &(&u(1, 0) * &u(2, 0));
        let f2 = &MultiPoly::int(1) + &(&u(1, 0) * &u(2, 2));
        let f3 = &MultiPoly::int(1) + &u(2, 1);
        let sys = DiffSystem::new(vec![f1, f2, f3], vec!["u1".into(), "u2".into()], r).unwrap();
        let g = sys.to_generic();
        assert_eq!(g.polys[2].to_string(), "a3_1*u2' + a3_0");
        let z = g.generic_zero();
        assert_eq!(z[&Var::diff_coeff(1, 0, 0)].to_string(), "-a1_1*u1*u2");
    }

    #[test]
    fn restrict_reindexes_variables() {
        let r = DerivationRules::new();
        let f1 = &u(2, 0) + &MultiPoly::int(1);
        let f2 = u(2, 1);
        let f3 = &u(1, 0) * &u(2, 0);
        let sys = DiffSystem::new(vec![f1, f2, f3], vec!["a".into(), "b".into()], r).unwrap();
        let s = sys.restrict(&[0, 1]).unwrap();
        assert_eq!(s.var_names, vec!["b".to_string()]);
        assert_eq!(s.polys[1], u(1, 1));
    }
}
