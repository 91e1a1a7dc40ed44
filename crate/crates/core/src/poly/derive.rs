use std::collections::BTreeMap;

use num_traits::Zero;
use rustc_hash::FxHashMap;

use super::multipoly::{rat, MultiPoly};
use super::variable::{Var, Variable};
use super::PolyError;

/// How the derivation acts on a named parameter of the coefficient field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamRule {
    /// `name^(k)` maps to `name^(k+1)`.
    Free,
    /// Derivative is zero.
    Constant,
    /// Derivative of the base parameter is the given polynomial.
    Expr(MultiPoly),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DerivationRules {
    params: BTreeMap<String, ParamRule>,
}

impl DerivationRules {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, rule: ParamRule) -> &mut Self {
        self.params.insert(name.to_string(), rule);
        self
    }

    pub fn rule(&self, name: &str) -> Option<&ParamRule> {
        self.params.get(name)
    }

    pub fn params(&self) -> impl Iterator<Item = (&String, &ParamRule)> {
        self.params.iter()
    }

    /// Derivative of a single variable.
    pub fn derivative_of(&self, v: Var) -> Result<MultiPoly, PolyError> {
        Ok(match v.variable() {
            Variable::DiffInd { j, k } => MultiPoly::var(Var::diff_ind(j, k + 1)),
            Variable::DiffCoeff { i, h, k } => MultiPoly::var(Var::diff_coeff(i, h, k + 1)),
            Variable::DiffParam { name, k } => match self.params.get(&name) {
                Some(ParamRule::Free) => MultiPoly::var(Var::diff_param(&name, k + 1)),
                Some(ParamRule::Constant) => MultiPoly::zero(),
                Some(ParamRule::Expr(e)) => derive_n(e, self, k)?,
                None => return Err(PolyError::UnknownParameter(name)),
            },
            Variable::GenCoeff { .. } | Variable::AlgVar { .. } | Variable::Structural { .. } => MultiPoly::zero(),
        })
    }
}

/// Applies the derivation: linear, Leibniz on products, power rule on Laurent exponents.
pub fn derive(p: &MultiPoly, rules: &DerivationRules) -> Result<MultiPoly, PolyError> {
    let mut cache: FxHashMap<Var, MultiPoly> = FxHashMap::default();
    let mut out = MultiPoly::zero();
    for (m, c) in p.terms() {
        for &(v, e) in m.pairs() {
            if !cache.contains_key(&v) {
                cache.insert(v, rules.derivative_of(v)?);
            }
            let dv = &cache[&v];
            if dv.is_zero() {
                continue;
            }
            let rest = m.div(&super::Mono::var(v, 1));
            let k = c * rat(e as i64);
            if k.is_zero() {
                continue;
            }
            out.add_scaled(dv, &rest, &k);
        }
    }
    Ok(out)
}

pub fn derive_n(p: &MultiPoly, rules: &DerivationRules, n: u32) -> Result<MultiPoly, PolyError> {
    let mut q = p.clone();
    for _ in 0..n {
        q = derive(&q, rules)?;
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_parameter_and_free_parameter() {
        let mut r = DerivationRules::new();
        r.set("t", ParamRule::Expr(MultiPoly::one()));
        r.set("x", ParamRule::Free);
        let t = MultiPoly::var(Var::diff_param("t", 0));
        let x = MultiPoly::var(Var::diff_param("x", 0));
        let u = MultiPoly::var(Var::diff_ind(1, 0));
        // d(t*x'*u1) = x'*u1 + t*x''*u1 + t*x'*u1'
        let xp = MultiPoly::var(Var::diff_param("x", 1));
        let p = &(&t * &xp) * &u;
        let want = &(&(&xp * &u) + &(&(&t * &MultiPoly::var(Var::diff_param("x", 2))) * &u))
            + &(&(&t * &xp) * &MultiPoly::var(Var::diff_ind(1, 1)));
        assert_eq!(derive(&p, &r).unwrap(), want);
        assert_eq!(derive(&x, &r).unwrap(), xp);
    }

    #[test]
    fn laurent_power_rule() {
        let r = DerivationRules::new();
        let p = MultiPoly::var_pow(Var::diff_ind(1, 0), -2);
        let d = derive(&p, &r).unwrap();
        let want = &MultiPoly::var_pow(Var::diff_ind(1, 0), -3).scale(&rat(-2)) * &MultiPoly::var(Var::diff_ind(1, 1));
        assert_eq!(d, want);
    }

    #[test]
    fn unknown_parameter_is_an_error() {
        let r = DerivationRules::new();
        let p = MultiPoly::var(Var::diff_param("zz", 0));
        assert_eq!(derive(&p, &r), Err(PolyError::UnknownParameter("zz".into())));
    }

    #[test]
    fn algebraic_symbols_are_constants() {
        let r = DerivationRules::new();
        let p = &MultiPoly::var(Var::gen_coeff(1, 0)) * &MultiPoly::var(Var::alg(1));
        assert!(derive(&p, &r).unwrap().is_zero());
    }
}
