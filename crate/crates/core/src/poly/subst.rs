use rustc_hash::FxHashMap;

use super::multipoly::{Mono, MultiPoly};
use super::variable::Var;
use super::PolyError;

/// Quotient of two polynomials, not reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFun {
    pub num: MultiPoly,
    pub den: MultiPoly,
}

impl RatFun {
    pub fn poly(p: MultiPoly) -> RatFun {
        RatFun { num: p, den: MultiPoly::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

struct PowerCache<'a> {
    base: &'a MultiPoly,
    pows: Vec<MultiPoly>,
}

impl<'a> PowerCache<'a> {
    fn new(base: &'a MultiPoly) -> Self {
        PowerCache { base, pows: vec![MultiPoly::one()] }
    }

    fn get(&mut self, e: u32) -> &MultiPoly {
        while self.pows.len() <= e as usize {
            let next = self.pows.last().unwrap() * self.base;
            self.pows.push(next);
        }
        &self.pows[e as usize]
    }
}

/// Substitutes polynomial values for variables. Negative exponents are allowed only
/// when the bound value is a single term.
pub fn substitute_poly(p: &MultiPoly, bindings: &FxHashMap<Var, MultiPoly>) -> Result<MultiPoly, PolyError> {
    let mut caches: FxHashMap<Var, PowerCache> = bindings.iter().map(|(v, b)| (*v, PowerCache::new(b))).collect();
    let mut inverses: FxHashMap<Var, MultiPoly> = FxHashMap::default();
    let groups = p.collect_by(|v| bindings.contains_key(&v));
    let mut keys: Vec<&Mono> = groups.keys().collect();
    keys.sort_by_key(|m| std::cmp::Reverse(m.pairs().len()));
    let mut out = MultiPoly::zero();
    for key in keys {
        let rest = &groups[key];
        let mut value = MultiPoly::one();
        for &(v, e) in key.pairs() {
            let factor = if e >= 0 {
                caches.get_mut(&v).unwrap().get(e as u32).clone()
            } else {
                if !inverses.contains_key(&v) {
                    let b = &bindings[&v];
                    let (m, c) = b.as_term().ok_or_else(|| {
                        if b.is_zero() {
                            PolyError::DivisionByZero
                        } else {
                            PolyError::NegativePower(v.to_string())
                        }
                    })?;
                    inverses.insert(v, MultiPoly::term(m.pow(-1), c.recip()));
                }
                inverses[&v].pow((-e) as u32)
            };
            value = &value * &factor;
            if value.is_zero() {
                break;
            }
        }
        if value.is_zero() {
            continue;
        }
        out += &(&value * rest);
    }
    Ok(out)
}

/// Substitutes rational functions for variables, returning an unreduced quotient.
pub fn substitute(p: &MultiPoly, bindings: &FxHashMap<Var, RatFun>) -> Result<RatFun, PolyError> {
    for (v, b) in bindings {
        if b.den.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if b.num.is_zero() && p.min_exp(*v).unwrap_or(0) < 0 {
            return Err(PolyError::DivisionByZero);
        }
    }
    let trivial = bindings.iter().all(|(v, b)| {
        b.den == MultiPoly::one() && (p.min_exp(*v).unwrap_or(0) >= 0 || b.num.as_term().is_some())
    });
    if trivial {
        let polys = bindings.iter().map(|(v, b)| (*v, b.num.clone())).collect();
        return Ok(RatFun::poly(substitute_poly(p, &polys)?));
    }
    // Common denominator: prod d_v^{max positive exponent} * n_v^{max negative magnitude}.
    let mut hi: FxHashMap<Var, u32> = FxHashMap::default();
    let mut lo: FxHashMap<Var, u32> = FxHashMap::default();
    for v in bindings.keys() {
        hi.insert(*v, p.max_exp(*v).unwrap_or(0).max(0) as u32);
        lo.insert(*v, (-p.min_exp(*v).unwrap_or(0)).max(0) as u32);
    }
    let mut nums: FxHashMap<Var, PowerCache> = FxHashMap::default();
    let mut dens: FxHashMap<Var, PowerCache> = FxHashMap::default();
    for (v, b) in bindings {
        nums.insert(*v, PowerCache::new(&b.num));
        dens.insert(*v, PowerCache::new(&b.den));
    }
    let mut den = MultiPoly::one();
    for v in bindings.keys() {
        den = &den * dens.get_mut(v).unwrap().get(hi[v]);
        den = &den * nums.get_mut(v).unwrap().get(lo[v]);
    }
    let groups = p.collect_by(|v| bindings.contains_key(&v));
    let mut num = MultiPoly::zero();
    for (key, rest) in &groups {
        let mut value = rest.clone();
        for v in bindings.keys() {
            let e = key.exp(*v);
            let (np, dp) = if e >= 0 {
                (e as u32 + lo[v], hi[v] - e as u32)
            } else {
                (lo[v] - (-e) as u32, hi[v] + (-e) as u32)
            };
            value = &value * nums.get_mut(v).unwrap().get(np);
            value = &value * dens.get_mut(v).unwrap().get(dp);
        }
        num += &value;
    }
    if num.is_zero() {
        den = MultiPoly::one();
    }
    Ok(RatFun { num, den })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn v(m: u32) -> Var {
        Var::alg(m)
    }

    #[test]
    fn polynomial_substitution() {
        // (x + y)^2 with x -> y - 1
        let p = (&MultiPoly::var(v(1)) + &MultiPoly::var(v(2))).pow(2);
        let b: FxHashMap<Var, MultiPoly> = [(v(1), &MultiPoly::var(v(2)) - &MultiPoly::one())].into_iter().collect();
        let want = (&MultiPoly::var(v(2)).scale(&rat(2)) - &MultiPoly::one()).pow(2);
        assert_eq!(substitute_poly(&p, &b).unwrap(), want);
    }

    #[test]
    fn rational_substitution_clears_denominators() {
        // x^2 + x^-1 with x -> 1/y : y^-2 + y
        let p = &MultiPoly::var_pow(v(1), 2) + &MultiPoly::var_pow(v(1), -1);
        let b: FxHashMap<Var, RatFun> =
            [(v(1), RatFun { num: MultiPoly::one(), den: &MultiPoly::var(v(2)) + &MultiPoly::int(1) })].into_iter().collect();
        let r = substitute(&p, &b).unwrap();
        // 1/(y+1)^2 + (y+1) = (1 + (y+1)^3)/(y+1)^2
        let y1 = &MultiPoly::var(v(2)) + &MultiPoly::int(1);
        assert_eq!(&r.num * &y1.pow(2), &(&MultiPoly::one() + &y1.pow(3)) * &r.den);
    }

    #[test]
    fn zero_denominator_rejected() {
        let p = MultiPoly::var(v(1));
        let b: FxHashMap<Var, RatFun> = [(v(1), RatFun { num: MultiPoly::one(), den: MultiPoly::zero() })].into_iter().collect();
        assert_eq!(substitute(&p, &b), Err(PolyError::DivisionByZero));
        let q = MultiPoly::var_pow(v(1), -1);
        let z: FxHashMap<Var, RatFun> = [(v(1), RatFun::poly(MultiPoly::zero()))].into_iter().collect();
        assert_eq!(substitute(&q, &z), Err(PolyError::DivisionByZero));
    }
}
