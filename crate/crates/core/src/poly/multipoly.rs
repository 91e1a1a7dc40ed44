use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::variable::{Var, Variable};

pub type Coeff = BigRational;

pub fn rat(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Coeff {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Laurent monomial: sorted `(variable, exponent)` pairs with nonzero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Mono(SmallVec<[(Var, i32); 4]>);

impl Mono {
    pub fn one() -> Mono {
        Mono(SmallVec::new())
    }

    pub fn var(v: Var, e: i32) -> Mono {
        if e == 0 {
            Mono::one()
        } else {
            Mono(smallvec::smallvec![(v, e)])
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, i32)>>(pairs: I) -> Mono {
        let mut v: SmallVec<[(Var, i32); 4]> = SmallVec::new();
        for (x, e) in pairs {
            v.push((x, e));
        }
        v.sort_by_key(|p| p.0);
        let mut out: SmallVec<[(Var, i32); 4]> = SmallVec::new();
        for (x, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 += e,
                _ => out.push((x, e)),
            }
        }
        out.retain(|p| p.1 != 0);
        Mono(out)
    }

    pub fn pairs(&self) -> &[(Var, i32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exp(&self, v: Var) -> i32 {
        match self.0.binary_search_by_key(&v, |p| p.0) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|p| p.1 as i64).sum()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.iter().all(|p| p.1 > 0)
    }

    fn merge(&self, other: &Mono, sign: i32) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out: SmallVec<[(Var, i32); 4]> = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b[j].0, sign * b[j].1));
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + sign * b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend(b[j..].iter().map(|&(v, e)| (v, sign * e)));
        Mono(out)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        self.merge(other, 1)
    }

    /// Laurent quotient `self / other`.
    pub fn div(&self, other: &Mono) -> Mono {
        self.merge(other, -1)
    }

    pub fn pow(&self, e: i32) -> Mono {
        if e == 0 {
            return Mono::one();
        }
        Mono(self.0.iter().map(|&(v, x)| (v, x * e)).collect())
    }

    /// Polynomial divisibility: `other / self` has no negative exponent where `other` had none.
    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().all(|&(v, e)| other.exp(v) >= e)
    }

    /// Componentwise minimum, absent variables counting as exponent 0.
    pub fn gcd(&self, other: &Mono) -> Mono {
        let q = self.div(other);
        // min(a, b) = a - max(a - b, 0)
        let pos: SmallVec<[(Var, i32); 4]> = q.0.into_iter().filter(|p| p.1 > 0).collect();
        self.div(&Mono(pos))
    }

    pub fn without(&self, v: Var) -> Mono {
        Mono(self.0.iter().copied().filter(|p| p.0 != v).collect())
    }

    pub fn restrict<F: Fn(Var) -> bool>(&self, keep: F) -> Mono {
        Mono(self.0.iter().copied().filter(|p| keep(p.0)).collect())
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|p| p.0)
    }

    /// Canonical (interning-independent) key, variables in ascending canonical order.
    pub fn canonical_key(&self) -> Vec<(Variable, i32)> {
        let mut k: Vec<(Variable, i32)> = self.0.iter().map(|&(v, e)| (v.variable(), e)).collect();
        k.sort();
        k
    }
}

/// Canonical term order: higher total degree first, then lexicographic with the
/// canonically smallest variable most significant and larger exponents first.
pub fn cmp_canonical_keys(a: &(i64, Vec<(Variable, i32)>), b: &(i64, Vec<(Variable, i32)>)) -> Ordering {
    b.0.cmp(&a.0).then_with(|| {
        let (x, y) = (&a.1, &b.1);
        let (mut i, mut j) = (0, 0);
        loop {
            match (x.get(i), y.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(p), None) => return if p.1 > 0 { Ordering::Less } else { Ordering::Greater },
                (None, Some(q)) => return if q.1 > 0 { Ordering::Greater } else { Ordering::Less },
                (Some(p), Some(q)) => match p.0.cmp(&q.0) {
                    Ordering::Less => return if p.1 > 0 { Ordering::Less } else { Ordering::Greater },
                    Ordering::Greater => return if q.1 > 0 { Ordering::Greater } else { Ordering::Less },
                    Ordering::Equal => {
                        if p.1 != q.1 {
                            return q.1.cmp(&p.1);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    })
}

/// Sparse multivariate Laurent polynomial with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiPoly {
    terms: FxHashMap<Mono, Coeff>,
}

impl MultiPoly {
    pub fn zero() -> MultiPoly {
        MultiPoly::default()
    }

    pub fn one() -> MultiPoly {
        MultiPoly::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> MultiPoly {
        MultiPoly::term(Mono::one(), c)
    }

    pub fn int(n: i64) -> MultiPoly {
        MultiPoly::constant(rat(n))
    }

    pub fn var(v: Var) -> MultiPoly {
        MultiPoly::term(Mono::var(v, 1), Coeff::one())
    }

    pub fn var_pow(v: Var, e: i32) -> MultiPoly {
        MultiPoly::term(Mono::var(v, e), Coeff::one())
    }

    pub fn term(m: Mono, c: Coeff) -> MultiPoly {
        let mut p = MultiPoly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, Coeff)>>(it: I) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Mono, c: Coeff) {
        if c.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn add_term_ref(&mut self, m: &Mono, c: &Coeff) {
        if let Some(x) = self.terms.get_mut(m) {
            *x += c;
            if x.is_zero() {
                self.terms.remove(m);
            }
        } else if !c.is_zero() {
            self.terms.insert(m.clone(), c.clone());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Coeff)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Mono, Coeff)> {
        self.terms.into_iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Mono::is_one)
    }

    pub fn coeff(&self, m: &Mono) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(&Mono::one())
    }

    /// Single term as `(monomial, coefficient)`, if the polynomial has exactly one.
    pub fn as_term(&self) -> Option<(&Mono, &Coeff)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Coeff) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn mul_term(&self, m: &Mono, c: &Coeff) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly { terms: self.terms.iter().map(|(n, x)| (n.mul(m), x * c)).collect() }
    }

    /// `self += c * m * other`
    pub fn add_scaled(&mut self, other: &MultiPoly, m: &Mono, c: &Coeff) {
        if c.is_zero() {
            return;
        }
        for (n, x) in &other.terms {
            self.add_term(n.mul(m), x * c);
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        if e == 0 {
            return MultiPoly::one();
        }
        if let Some((m, c)) = self.as_term() {
            return MultiPoly::term(m.pow(e as i32), num_traits::pow(c.clone(), e as usize));
        }
        let mut result = self.clone();
        for _ in 1..e {
            result = &result * self;
        }
        result
    }

    /// Variables occurring in the polynomial, in canonical order.
    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.terms.keys().flat_map(|m| m.vars()).collect();
        vs.sort();
        vs.dedup();
        vs.sort_by(|a, b| a.cmp_canonical(*b));
        vs
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exp(v) != 0)
    }

    pub fn max_exp(&self, v: Var) -> Option<i32> {
        self.terms.keys().map(|m| m.exp(v)).max()
    }

    pub fn min_exp(&self, v: Var) -> Option<i32> {
        self.terms.keys().map(|m| m.exp(v)).min()
    }

    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(Mono::total_degree).max()
    }

    /// Expansion in powers of `v`: exponent to coefficient (free of `v`).
    pub fn collect_in(&self, v: Var) -> BTreeMap<i32, MultiPoly> {
        let mut out: BTreeMap<i32, MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.exp(v)).or_default().add_term(m.without(v), c.clone());
        }
        out
    }

    /// Groups terms by the part of the monomial over variables selected by `pick`.
    pub fn collect_by<F: Fn(Var) -> bool>(&self, pick: F) -> FxHashMap<Mono, MultiPoly> {
        let mut out: FxHashMap<Mono, MultiPoly> = FxHashMap::default();
        for (m, c) in &self.terms {
            let key = m.restrict(&pick);
            let rest = m.restrict(|v| !pick(v));
            out.entry(key).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Monomial gcd of all terms (the Laurent "monomial content").
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return Mono::one() };
        it.fold(first.clone(), |acc, m| acc.gcd(m))
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(Mono::is_polynomial)
    }

    pub fn map_coeffs<F: Fn(&Coeff) -> Coeff>(&self, f: F) -> MultiPoly {
        MultiPoly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Terms sorted in the canonical, interning-independent order.
    pub fn sorted_terms(&self) -> Vec<(Mono, Coeff)> {
        let mut v: Vec<((i64, Vec<(Variable, i32)>), Mono, Coeff)> = self
            .terms
            .iter()
            .map(|(m, c)| ((m.total_degree(), m.canonical_key()), m.clone(), c.clone()))
            .collect();
        v.sort_by(|a, b| cmp_canonical_keys(&a.0, &b.0));
        v.into_iter().map(|(_, m, c)| (m, c)).collect()
    }

    /// Leading coefficient in canonical order (used to normalise signs).
    pub fn leading_coeff(&self) -> Option<Coeff> {
        self.sorted_terms().into_iter().next().map(|t| t.1)
    }

    /// True when `self == other` or `self == -other`.
    pub fn eq_up_to_sign(&self, other: &MultiPoly) -> bool {
        self == other || *self == -other
    }

    pub fn is_unit_multiple_of(&self, other: &MultiPoly) -> Option<Coeff> {
        let (m, c) = other.terms.iter().next()?;
        let k = self.coeff(m) / c;
        if k.is_zero() {
            return None;
        }
        (other.scale(&k) == *self).then_some(k)
    }

    pub fn abs_max_coeff(&self) -> Coeff {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Coeff::zero)
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let (big, small) = if self.len() >= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term_ref(m, c);
        }
        out
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(mut self, rhs: MultiPoly) -> MultiPoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&MultiPoly> for MultiPoly {
    fn add_assign(&mut self, rhs: &MultiPoly) {
        for (m, c) in &rhs.terms {
            self.add_term_ref(m, c);
        }
    }
}

impl SubAssign<&MultiPoly> for MultiPoly {
    fn sub_assign(&mut self, rhs: &MultiPoly) {
        for (m, c) in &rhs.terms {
            self.add_term_ref(m, &-c);
        }
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(mut self, rhs: MultiPoly) -> MultiPoly {
        self -= &rhs;
        self
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(mut self) -> MultiPoly {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        if self.is_zero() || rhs.is_zero() {
            return MultiPoly::zero();
        }
        if let Some((m, c)) = rhs.as_term() {
            return self.mul_term(m, c);
        }
        if let Some((m, c)) = self.as_term() {
            return rhs.mul_term(m, c);
        }
        let mut out = MultiPoly::zero();
        out.terms.reserve(self.len().max(rhs.len()));
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

impl From<Var> for MultiPoly {
    fn from(v: Var) -> MultiPoly {
        MultiPoly::var(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> MultiPoly {
        MultiPoly::var(Var::alg(1))
    }
    fn y() -> MultiPoly {
        MultiPoly::var(Var::alg(2))
    }

    #[test]
    fn laurent_monomials_cancel() {
        let m = Mono::var(Var::alg(1), 2).mul(&Mono::var(Var::alg(1), -2));
        assert!(m.is_one());
        let p = &MultiPoly::var_pow(Var::alg(1), -2) * &x().pow(2);
        assert_eq!(p, MultiPoly::one());
    }

    #[test]
    fn binomial_square() {
        let s = &x() + &y();
        let sq = s.pow(2);
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coeff(&Mono::from_pairs([(Var::alg(1), 1), (Var::alg(2), 1)])), rat(2));
        assert!((&sq - &sq).is_zero());
    }

    #[test]
    fn monomial_gcd_handles_negative_exponents() {
        let a = Mono::from_pairs([(Var::alg(1), 2), (Var::alg(2), -1)]);
        let b = Mono::from_pairs([(Var::alg(1), 1)]);
        assert_eq!(a.gcd(&b), Mono::from_pairs([(Var::alg(1), 1), (Var::alg(2), -1)]));
    }

    #[test]
    fn collect_in_splits_by_exponent() {
        let p = &(&x() * &y()) + &(&x() + &MultiPoly::int(3));
        let c = p.collect_in(Var::alg(1));
        assert_eq!(c[&0], MultiPoly::int(3));
        assert_eq!(c[&1], &y() + &MultiPoly::one());
    }
}
