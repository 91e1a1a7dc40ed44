//! The generic algebraic system attached to a prolonged system: every derivative
//! `u_{j,k}` becomes an algebraic variable `y_m` and every coefficient a fresh `c{l}_{h}`.

use std::cmp::Ordering;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::analysis::Prolongation;
use crate::poly::{rat, render, substitute_poly, Mono, MultiPoly, PolyError, Var, Variable};
use crate::polytope::Point;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgsPoly {
    /// 0-based source polynomial `f_i` and the derivative taken of it.
    pub source: usize,
    pub derivative: u32,
    /// Support points, the distinguished term first.
    pub support: Vec<Point>,
    /// Coefficient of each support point in the prolonged polynomial.
    pub coeffs: Vec<MultiPoly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ags {
    /// `y_{m+1}` stands for `u_{j,k}`, stored as `(j, k)` with `j` 1-based.
    pub vars: Vec<(u32, u32)>,
    pub polys: Vec<AgsPoly>,
}

/// Total degree first, then the exponent vector read from its last coordinate.
pub fn cmp_exponents(a: &[i64], b: &[i64]) -> Ordering {
    let da: i64 = a.iter().sum();
    let db: i64 = b.iter().sum();
    da.cmp(&db).then_with(|| a.iter().rev().cmp(b.iter().rev()))
}

impl Ags {
    /// Number of algebraic variables `L - 1`.
    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Coefficient `c{l+1}_{h}` (`l` 0-based).
    pub fn coeff(&self, l: usize, h: usize) -> Var {
        Var::gen_coeff(l as u32 + 1, h as u32)
    }

    pub fn y(&self, m: usize) -> Var {
        Var::alg(m as u32 + 1)
    }

    pub fn y_mono(&self, alpha: &[i64]) -> Mono {
        Mono::from_pairs(alpha.iter().enumerate().filter(|(_, e)| **e != 0).map(|(m, &e)| (self.y(m), e as i32)))
    }

    pub fn supports(&self) -> Vec<Vec<Point>> {
        self.polys.iter().map(|p| p.support.clone()).collect()
    }

    /// `P_l = sum_h c{l}_{h} y^{alpha_h}`.
    pub fn generic_poly(&self, l: usize) -> MultiPoly {
        let mut f = MultiPoly::zero();
        for (h, a) in self.polys[l].support.iter().enumerate() {
            f.add_term(self.y_mono(a).mul(&Mono::var(self.coeff(l, h), 1)), rat(1));
        }
        f
    }

    /// Generic zero: `c{l}_0 -> -sum_{h>0} c{l}_{h} y^{alpha_h - alpha_0}`.
    pub fn generic_zero(&self) -> FxHashMap<Var, MultiPoly> {
        let mut out = FxHashMap::default();
        for (l, p) in self.polys.iter().enumerate() {
            let base = &p.support[0];
            let mut v = MultiPoly::zero();
            for (h, a) in p.support.iter().enumerate().skip(1) {
                let d: Vec<i64> = a.iter().zip(base).map(|(x, y)| x - y).collect();
                v.add_term(self.y_mono(&d).mul(&Mono::var(self.coeff(l, h), 1)), rat(-1));
            }
            out.insert(self.coeff(l, 0), v);
        }
        out
    }

    /// `q` at the generic zero, times the monomial that clears negative powers of the `y`s.
    /// Zero exactly when `q` lies in the elimination ideal of the generic system.
    pub fn eval_at_generic_zero(&self, q: &MultiPoly) -> Result<MultiPoly, PolyError> {
        let v = substitute_poly(q, &self.generic_zero())?;
        let content = v.monomial_content();
        let clear = Mono::from_pairs(content.pairs().iter().filter(|(_, e)| *e < 0).map(|&(x, e)| (x, -e)));
        Ok(v.mul_term(&clear, &rat(1)))
    }

    pub fn vanishes_at_generic_zero(&self, q: &MultiPoly) -> Result<bool, PolyError> {
        Ok(self.eval_at_generic_zero(q)?.is_zero())
    }

    /// Specialization table: `c{l}_{h}` to the coefficient it replaced.
    pub fn xi(&self) -> FxHashMap<Var, MultiPoly> {
        let mut out = FxHashMap::default();
        for (l, p) in self.polys.iter().enumerate() {
            for (h, c) in p.coeffs.iter().enumerate() {
                out.insert(self.coeff(l, h), c.clone());
            }
        }
        out
    }

    /// `y_m -> u_{j,k}`.
    pub fn upsilon(&self) -> FxHashMap<Var, MultiPoly> {
        self.vars.iter().enumerate().map(|(m, &(j, k))| (self.y(m), MultiPoly::var(Var::diff_ind(j, k)))).collect()
    }

    /// Position of the polynomial a generic coefficient belongs to, if any.
    pub fn owner(&self, c: Var) -> Option<(usize, usize)> {
        match c.variable() {
            Variable::GenCoeff { l, h } if (l as usize) <= self.len() && l > 0 => {
                let l = l as usize - 1;
                ((h as usize) < self.polys[l].support.len()).then_some((l, h as usize))
            }
            _ => None,
        }
    }

    pub fn report(&self, name: &dyn Fn(&Variable) -> String) -> AgsReport {
        let variables = self.vars.iter().map(|&(j, k)| name(&Variable::DiffInd { j, k })).collect();
        let polys = self
            .polys
            .iter()
            .enumerate()
            .map(|(l, p)| AgsPolyReport {
                index: l + 1,
                source: p.source + 1,
                derivative: p.derivative,
                generic: self.generic_poly(l).to_string(),
                terms: p
                    .support
                    .iter()
                    .zip(&p.coeffs)
                    .enumerate()
                    .map(|(h, (a, c))| AgsTermReport {
                        coeff: self.coeff(l, h).to_string(),
                        exponent: a.clone(),
                        specialization: render(c, name),
                    })
                    .collect(),
            })
            .collect();
        AgsReport { schema: 1, variables, polys }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AgsTermReport {
    pub coeff: String,
    pub exponent: Vec<i64>,
    pub specialization: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AgsPolyReport {
    pub index: usize,
    pub source: usize,
    pub derivative: u32,
    pub generic: String,
    pub terms: Vec<AgsTermReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AgsReport {
    pub schema: u32,
    pub variables: Vec<String>,
    pub polys: Vec<AgsPolyReport>,
}

/// Builds the generic algebraic system of `ps`. The variables are ordered by derivative
/// order first and indeterminate second.
pub fn build_ags(ps: &Prolongation) -> Ags {
    let mut vars = ps.window_vars();
    vars.sort_by_key(|&(j, k)| (k, j));
    let index: FxHashMap<(u32, u32), usize> = vars.iter().enumerate().map(|(m, &v)| (v, m)).collect();
    let mut polys = Vec::new();
    for e in &ps.entries {
        let groups = e.poly.collect_by(Var::is_diff_ind);
        let mut terms: Vec<(Point, MultiPoly)> = groups
            .into_iter()
            .map(|(mono, c)| {
                let mut a = vec![0i64; vars.len()];
                for &(v, x) in mono.pairs() {
                    if let Variable::DiffInd { j, k } = v.variable() {
                        a[index[&(j, k)]] = x as i64;
                    }
                }
                (a, c)
            })
            .collect();
        terms.sort_by(|x, y| cmp_exponents(&x.0, &y.0));
        if let Some(pos) = terms.iter().position(|t| t.0.iter().all(|&x| x == 0)) {
            let t = terms.remove(pos);
            terms.insert(0, t);
        }
        let (support, coeffs) = terms.into_iter().unzip();
        polys.push(AgsPoly { source: e.source, derivative: e.derivative, support, coeffs });
    }
    Ags { vars, polys }
}

/// Source polynomial and derivative order of the coefficients occurring in `q`: for each
/// source `i`, the largest derivative order whose coefficients occur (`None` if none).
pub fn tau_of(q: &MultiPoly, ags: &Ags, n: usize) -> Vec<Option<u32>> {
    let mut tau = vec![None; n];
    for v in q.variables() {
        if let Some((l, _)) = ags.owner(v) {
            let p = &ags.polys[l];
            let t: &mut Option<u32> = &mut tau[p.source];
            *t = Some(t.map_or(p.derivative, |x| x.max(p.derivative)));
        }
    }
    tau
}
