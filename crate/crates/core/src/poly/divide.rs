use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::multipoly::{Coeff, Mono, MultiPoly};
use super::variable::Var;
use super::PolyError;

/// Graded-lex key over interned ids; only used internally, the quotient of an
/// exact division does not depend on the admissible order chosen.
#[derive(Clone, PartialEq, Eq)]
struct GradedKey {
    deg: i64,
    mono: Mono,
}

impl Ord for GradedKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.deg.cmp(&other.deg).then_with(|| {
            let (a, b) = (self.mono.pairs(), other.mono.pairs());
            let (mut i, mut j) = (0, 0);
            loop {
                match (a.get(i), b.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(p), None) => return p.1.cmp(&0),
                    (None, Some(q)) => return 0.cmp(&q.1),
                    (Some(p), Some(q)) => match p.0.cmp(&q.0) {
                        Ordering::Less => return p.1.cmp(&0),
                        Ordering::Greater => return 0.cmp(&q.1),
                        Ordering::Equal => {
                            if p.1 != q.1 {
                                return p.1.cmp(&q.1);
                            }
                            i += 1;
                            j += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for GradedKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn key(m: Mono) -> GradedKey {
    GradedKey { deg: m.total_degree(), mono: m }
}

/// Exact quotient `a / b` in the Laurent polynomial ring, or `NotDivisible`.
///
/// Monomial content is stripped from both operands first; the remaining division
/// happens in the ordinary polynomial ring.
pub fn exact_divide(a: &MultiPoly, b: &MultiPoly) -> Result<MultiPoly, PolyError> {
    if b.is_zero() {
        return Err(PolyError::DivisionByZero);
    }
    if a.is_zero() {
        return Ok(MultiPoly::zero());
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let shift = ma.div(&mb);
    let inv_a = ma.pow(-1);
    let inv_b = mb.pow(-1);
    let bn: Vec<(Mono, Coeff)> = b.terms().map(|(m, c)| (m.mul(&inv_b), c.clone())).collect();
    let (lt_m, lt_c) = bn
        .iter()
        .max_by(|x, y| key(x.0.clone()).cmp(&key(y.0.clone())))
        .map(|(m, c)| (m.clone(), c.clone()))
        .unwrap();
    let mut rem: BTreeMap<GradedKey, Coeff> = a.terms().map(|(m, c)| (key(m.mul(&inv_a)), c.clone())).collect();
    let mut q = MultiPoly::zero();
    while let Some((k, c)) = rem.pop_last() {
        if !lt_m.divides(&k.mono) {
            return Err(PolyError::NotDivisible);
        }
        let qm = k.mono.div(&lt_m);
        let qc = &c / &lt_c;
        for (m, d) in &bn {
            if *m == lt_m {
                continue;
            }
            let kk = key(m.mul(&qm));
            let delta = &qc * d;
            match rem.get_mut(&kk) {
                Some(x) => {
                    *x -= delta;
                    if x.is_zero() {
                        rem.remove(&kk);
                    }
                }
                None => {
                    rem.insert(kk, -delta);
                }
            }
        }
        q.add_term(qm.mul(&shift), qc);
    }
    Ok(q)
}

fn binomial(n: u32, k: u32) -> Coeff {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Coeff::from_integer(r)
}

/// Taylor coefficients of `h` around `c = v`, stopping after the first nonzero one
/// when `first_only` is set.
fn taylor_coefficients(h: &MultiPoly, c: Var, v: &MultiPoly, first_only: bool) -> Result<Vec<MultiPoly>, PolyError> {
    if h.is_zero() {
        return Err(PolyError::Deflation(c.to_string(), "zero polynomial".into()));
    }
    if v.contains_var(c) {
        return Err(PolyError::Deflation(c.to_string(), "value depends on the variable".into()));
    }
    let parts = h.collect_in(c);
    if parts.keys().next().is_some_and(|&e| e < 0) {
        return Err(PolyError::Deflation(c.to_string(), "negative exponent".into()));
    }
    let deg = parts.keys().last().copied().unwrap_or(0) as u32;
    let mut vpow = vec![MultiPoly::one()];
    for i in 1..=deg {
        let next = &vpow[i as usize - 1] * v;
        vpow.push(next);
    }
    let mut out = Vec::new();
    for j in 0..=deg {
        let mut g = MultiPoly::zero();
        for (&k, hk) in parts.range(j as i32..) {
            let k = k as u32;
            g += &(hk * &vpow[(k - j) as usize]).scale(&binomial(k, j));
        }
        let done = first_only && !g.is_zero();
        out.push(g);
        if done {
            break;
        }
    }
    Ok(out)
}

/// Largest `s` with `(c - v)^s | h` together with the value of `h / (c - v)^s` at `c = v`.
pub fn taylor_leading(h: &MultiPoly, c: Var, v: &MultiPoly) -> Result<(u32, MultiPoly), PolyError> {
    let mut g = taylor_coefficients(h, c, v, true)?;
    let s = g.len() as u32 - 1;
    let lead = g.pop().unwrap();
    if lead.is_zero() {
        return Err(PolyError::Deflation(c.to_string(), "no nonzero Taylor coefficient".into()));
    }
    Ok((s, lead))
}

/// Writes `h = (c - v)^s * hbar` with `hbar(c = v) != 0` and returns `(s, hbar)`.
pub fn deflate_linear(h: &MultiPoly, c: Var, v: &MultiPoly) -> Result<(u32, MultiPoly), PolyError> {
    let g = taylor_coefficients(h, c, v, false)?;
    let s = g.iter().position(|x| !x.is_zero()).unwrap() as u32;
    let lin = &MultiPoly::var(c) - v;
    let mut hbar = MultiPoly::zero();
    let mut pw = MultiPoly::one();
    for gj in &g[s as usize..] {
        hbar += &(gj * &pw);
        pw = &pw * &lin;
    }
    Ok((s, hbar))
}
