//! Specialization of generic coefficients back to the differential coefficients of the
//! prolonged system, the vanishing-avoiding specialization algorithm, the differential
//! generic zero, and order and degree bounds.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::ags::{tau_of, Ags};
use crate::analysis::Shape;
use crate::poly::{derive_n, rat, substitute_poly, taylor_leading, Coeff, Mono, MultiPoly, PolyError, Var, Variable};
use crate::system::DiffSystem;

#[derive(Debug, thiserror::Error)]
pub enum SpecializeError {
    #[error("input is zero")]
    Zero,
    #[error("input is not in the elimination ideal: it does not vanish at the generic zero")]
    NotInIdeal,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Replaces every generic coefficient by its specialization and every `y_m` by its
/// derivative `u_{j,k}`.
pub fn specialize(q: &MultiPoly, ags: &Ags) -> Result<MultiPoly, PolyError> {
    let mut map = ags.xi();
    map.extend(ags.upsilon());
    substitute_poly(q, &map)
}

/// Coefficients in the order the specialization algorithm visits them: non-distinguished
/// coefficients first, then the distinguished ones, each family by polynomial index.
pub fn specialization_order(ags: &Ags) -> Vec<Var> {
    let mut order = Vec::new();
    for (l, p) in ags.polys.iter().enumerate() {
        order.extend((1..p.support.len()).map(|h| ags.coeff(l, h)));
    }
    order.extend((0..ags.len()).map(|l| ags.coeff(l, 0)));
    order
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Deflation {
    pub coeff: String,
    pub multiplicity: u32,
}

/// Specializes one coefficient at a time; when a partial specialization would vanish,
/// the factor `(c - Xi(c))^s` is removed first. The result is nonzero whenever `q` is a
/// nonzero element of the elimination ideal.
pub fn algorithm_specialize(q: &MultiPoly, ags: &Ags) -> Result<(MultiPoly, Vec<Deflation>), SpecializeError> {
    if q.is_zero() {
        return Err(SpecializeError::Zero);
    }
    if !ags.vanishes_at_generic_zero(q)? {
        return Err(SpecializeError::NotInIdeal);
    }
    let xi = ags.xi();
    let mut h = q.clone();
    let mut deflations = Vec::new();
    for c in specialization_order(ags) {
        if !h.contains_var(c) {
            continue;
        }
        let (s, g) = taylor_leading(&h, c, &xi[&c])?;
        if s > 0 {
            deflations.push(Deflation { coeff: c.to_string(), multiplicity: s });
        }
        h = g;
    }
    Ok((substitute_poly(&h, &ags.upsilon())?, deflations))
}

/// Values of the differential generic zero of a generic system on the derivatives of its
/// distinguished coefficients occurring in `h`: `a{i}_0^{(k)} -> d^k zeta_i`.
fn zeta_bindings(h: &MultiPoly, sys: &DiffSystem) -> Result<FxHashMap<Var, MultiPoly>, PolyError> {
    let zeta = sys.generic_zero();
    let mut out = FxHashMap::default();
    for v in h.variables() {
        if let Variable::DiffCoeff { i, h: 0, k } = v.variable() {
            if let Some(z) = zeta.get(&Var::diff_coeff(i, 0, 0)) {
                out.insert(v, derive_n(z, &sys.rules, k)?);
            }
        }
    }
    Ok(out)
}

/// `h` at the differential generic zero, times the monomial clearing negative powers.
/// Zero exactly when `h` lies in the differential elimination ideal of the generic system.
pub fn diff_generic_zero_eval(h: &MultiPoly, sys: &DiffSystem) -> Result<MultiPoly, PolyError> {
    let v = substitute_poly(h, &zeta_bindings(h, sys)?)?;
    let content = v.monomial_content();
    let clear = Mono::from_pairs(content.pairs().iter().filter(|(_, e)| *e < 0).map(|&(x, e)| (x, -e)));
    Ok(v.mul_term(&clear, &rat(1)))
}

/// Highest derivative order of a coefficient of `F_i` (0-based `i`) occurring in `h`.
pub fn coefficient_order(h: &MultiPoly, i: usize) -> Option<u32> {
    h.variables()
        .into_iter()
        .filter_map(|v| match v.variable() {
            Variable::DiffCoeff { i: vi, k, .. } if vi as usize == i + 1 => Some(k),
            _ => None,
        })
        .max()
}

/// Total degree of `h` in the coefficients of `F_i` and their derivatives.
pub fn coefficient_degree(h: &MultiPoly, i: usize) -> Option<i64> {
    let pick = |v: Var| matches!(v.variable(), Variable::DiffCoeff { i: vi, .. } if vi as usize == i + 1);
    h.collect_by(pick).keys().map(|m| m.total_degree()).max()
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PolyBounds {
    pub name: String,
    pub jacobi_minus_gamma: i64,
    pub observed_order: Option<u32>,
    pub observed_degree: Option<i64>,
    pub tau: Option<u32>,
    /// `MV_{-l}` for the ps entries `d^k f_i`, `k = 0, 1, ...`.
    pub mixed_volumes: Vec<Option<String>>,
    /// Sum of `mixed_volumes` for `k <= tau`.
    pub degree_bound: Option<String>,
    /// `observed_order <= tau <= J_i - gamma`.
    pub order_chain_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsReport {
    pub schema: u32,
    pub per_polynomial: Vec<PolyBounds>,
    pub assumptions: Vec<String>,
}

/// Order and degree bounds read off an elimination polynomial `q` over the generic
/// coefficients and its specialization `output`. `mvs` are the mixed volumes
/// `MV_{-l}` of the ags supports.
pub fn bounds_report(sys: &DiffSystem, shape: &Shape, ags: &Ags, mvs: &[Option<Coeff>], q: &MultiPoly, output: &MultiPoly) -> BoundsReport {
    let tau = tau_of(q, ags, sys.n());
    let per_polynomial = (0..sys.n())
        .map(|i| {
            let bound = shape.jacobi[i] - shape.gamma;
            let mut mixed_volumes = vec![None; (bound + 1).max(0) as usize];
            for (l, p) in ags.polys.iter().enumerate() {
                if p.source == i {
                    mixed_volumes[p.derivative as usize] = mvs[l].clone();
                }
            }
            let degree_bound = tau[i].and_then(|t| mixed_volumes[..=t as usize].iter().cloned().sum::<Option<Coeff>>());
            let observed_order = coefficient_order(output, i);
            let order_chain_holds = match (observed_order, tau[i]) {
                (Some(o), Some(t)) => o <= t && (t as i64) <= bound,
                (None, Some(t)) => (t as i64) <= bound,
                (None, None) => true,
                (Some(_), None) => false,
            };
            PolyBounds {
                name: sys.poly_names[i].clone(),
                jacobi_minus_gamma: bound,
                observed_order,
                observed_degree: coefficient_degree(output, i),
                tau: tau[i],
                mixed_volumes: mixed_volumes.iter().map(|m| m.as_ref().map(Coeff::to_string)).collect(),
                degree_bound: degree_bound.map(|d| d.to_string()),
                order_chain_holds,
            }
        })
        .collect();
    BoundsReport {
        schema: 1,
        per_polynomial,
        assumptions: vec![
            "the system is Laurent differentially essential (not checked)".into(),
            "degree bounds apply to the sparse differential resultant under the codimension-one hypothesis (not checked)".into(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ags::build_ags;
    use crate::analysis::build_ps;
    use crate::frontend::{parse_poly, parse_system, Scope};

    fn generic_example() -> (DiffSystem, Ags) {
        let sys = parse_system(include_str!("../fixtures/generic_example.sys")).unwrap();
        let ags = build_ags(&build_ps(&sys).unwrap());
        (sys, ags)
    }

    fn poly(s: &str) -> MultiPoly {
        parse_poly(s, &Scope::open()).unwrap()
    }

    #[test]
    fn xi_of_q6_matches_printed_specialization() {
        let (sys, ags) = generic_example();
        let q6 = poly(include_str!("../fixtures/q6.poly"));
        assert!(ags.vanishes_at_generic_zero(&q6).unwrap());
        let xi = specialize(&q6, &ags).unwrap();
        let printed = poly(include_str!("../fixtures/xi_q6.poly"));
        assert!(xi.eq_up_to_sign(&printed));
        let h = crate::poly::exact_divide(&xi, &poly("-a2_1")).unwrap();
        assert!(diff_generic_zero_eval(&h, &sys).unwrap().is_zero());
        assert!(!diff_generic_zero_eval(&poly("a2_1"), &sys).unwrap().is_zero());
    }

    #[test]
    fn prolonged_polys_vanish_at_differential_generic_zero() {
        let (sys, _) = generic_example();
        let ps = build_ps(&sys).unwrap();
        for e in &ps.entries {
            assert!(diff_generic_zero_eval(&e.poly, &sys).unwrap().is_zero());
        }
    }

    #[test]
    fn algorithm_agrees_with_direct_specialization_when_nonzero() {
        let (_, ags) = generic_example();
        let q6 = poly(include_str!("../fixtures/q6.poly"));
        let (out, defl) = algorithm_specialize(&q6, &ags).unwrap();
        assert!(defl.is_empty());
        assert_eq!(out, specialize(&q6, &ags).unwrap());
    }

    #[test]
    fn algorithm_deflates_a_vanishing_factor() {
        let (_, ags) = generic_example();
        let q6 = poly(include_str!("../fixtures/q6.poly"));
        // Xi(c5_2) = 2*a3_1' and Xi(c6_1) = a3_1', so the second factor specializes to zero.
        let q = &q6 * &poly("c5_2 - 2*c6_1");
        assert!(specialize(&q, &ags).unwrap().is_zero());
        let (out, defl) = algorithm_specialize(&q, &ags).unwrap();
        assert_eq!(defl, vec![Deflation { coeff: "c6_1".into(), multiplicity: 1 }]);
        assert_eq!(out, specialize(&q6, &ags).unwrap().scale(&rat(-2)));
    }

    #[test]
    fn rejects_inputs_outside_the_ideal() {
        let (_, ags) = generic_example();
        assert!(matches!(algorithm_specialize(&poly("c1_0"), &ags), Err(SpecializeError::NotInIdeal)));
        assert!(matches!(algorithm_specialize(&MultiPoly::zero(), &ags), Err(SpecializeError::Zero)));
    }

    #[test]
    fn bounds_for_q6() {
        let (sys, ags) = generic_example();
        let ps = build_ps(&sys).unwrap();
        let q6 = poly(include_str!("../fixtures/q6.poly"));
        let out = specialize(&q6, &ags).unwrap();
        let mvs = crate::polytope::mixed_volumes_minus(&ags.supports());
        let r = bounds_report(&sys, &ps.shape, &ags, &mvs, &q6, &out);
        let orders: Vec<Option<u32>> = r.per_polynomial.iter().map(|p| p.observed_order).collect();
        assert_eq!(orders, vec![Some(1), Some(1), Some(2)]);
        let taus: Vec<Option<u32>> = r.per_polynomial.iter().map(|p| p.tau).collect();
        assert_eq!(taus, vec![Some(1), Some(1), Some(2)]);
        assert!(r.per_polynomial.iter().all(|p| p.order_chain_holds));
        assert_eq!(tau_of(&poly("c7_0"), &ags, 3), vec![None, None, Some(0)]);
    }
}
