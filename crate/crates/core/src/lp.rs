//! Exact rational simplex method (two phases, Bland's anti-cycling rule).
//!
//! Solves `min c.x` subject to `A x = b`, `x >= 0`.

use num_traits::{One, Signed, Zero};

use crate::poly::Coeff;

#[derive(Clone, Debug)]
pub struct LpProblem {
    pub a: Vec<Vec<Coeff>>,
    pub b: Vec<Coeff>,
    pub c: Vec<Coeff>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<Coeff>,
    pub objective: Coeff,
    /// Basic column indices, one per non-redundant constraint row.
    pub basis: Vec<usize>,
    /// Reduced costs of every column at the optimal basis.
    pub reduced_costs: Vec<Coeff>,
}

impl LpSolution {
    /// Some basic variable sits at zero.
    pub fn is_degenerate(&self) -> bool {
        self.basis.iter().any(|&j| self.x[j].is_zero())
    }

    /// Every nonbasic reduced cost is strictly positive, which certifies a unique optimum.
    pub fn has_unique_optimum(&self) -> bool {
        (0..self.x.len()).filter(|j| !self.basis.contains(j)).all(|j| self.reduced_costs[j].is_positive())
    }
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Coeff>>,
    rhs: Vec<Coeff>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        if !p.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &p;
                }
            }
            self.rhs[r] /= &p;
        }
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][col].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in self.rows[i].iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        self.basis[r] = col;
    }

    fn reduced_costs(&self, cost: &[Coeff]) -> Vec<Coeff> {
        let mut d: Vec<Coeff> = cost.to_vec();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = &cost[bj];
            if cb.is_zero() {
                continue;
            }
            for (j, x) in self.rows[i].iter().enumerate() {
                if !x.is_zero() {
                    d[j] -= cb * x;
                }
            }
        }
        d
    }

    /// Runs Bland-rule simplex iterations over the allowed columns.
    /// Returns false when the objective is unbounded.
    fn optimize(&mut self, cost: &[Coeff], allowed: usize) -> bool {
        loop {
            let d = self.reduced_costs(cost);
            let Some(enter) = (0..allowed).find(|&j| d[j].is_negative() && !self.basis.contains(&j)) else {
                return true;
            };
            let mut best: Option<(usize, Coeff)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }
}

/// Solves the linear program exactly.
pub fn solve(p: &LpProblem) -> LpOutcome {
    let m = p.a.len();
    let n = p.c.len();
    assert!(p.a.iter().all(|r| r.len() == n) && p.b.len() == m, "inconsistent LP dimensions");
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let neg = p.b[i].is_negative();
        let mut row: Vec<Coeff> = p.a[i].iter().map(|x| if neg { -x } else { x.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { Coeff::one() } else { Coeff::zero() }));
        rows.push(row);
        rhs.push(if neg { -&p.b[i] } else { p.b[i].clone() });
    }
    let mut t = Tableau { rows, rhs, basis: (n..n + m).collect(), ncols: n + m };
    let phase1: Vec<Coeff> = (0..n + m).map(|j| if j >= n { Coeff::one() } else { Coeff::zero() }).collect();
    t.optimize(&phase1, n + m);
    let infeasibility: Coeff = t.basis.iter().zip(&t.rhs).filter(|(&j, _)| j >= n).map(|(_, v)| v.clone()).sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive artificial variables out of the basis, dropping redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    for r in t.rows.iter_mut() {
        r.truncate(n);
    }
    t.ncols = n;
    if !t.optimize(&p.c, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Coeff::zero(); t.ncols];
    for (i, &j) in t.basis.iter().enumerate() {
        x[j] = t.rhs[i].clone();
    }
    let objective = x.iter().zip(&p.c).map(|(a, b)| a * b).sum();
    let reduced_costs = t.reduced_costs(&p.c);
    LpOutcome::Optimal(LpSolution { x, objective, basis: t.basis, reduced_costs })
}

/// Feasibility of `A x = b, x >= 0`; returns a witness.
pub fn feasible_point(a: &[Vec<Coeff>], b: &[Coeff]) -> Option<Vec<Coeff>> {
    let n = a.first().map_or(0, Vec::len);
    let p = LpProblem { a: a.to_vec(), b: b.to_vec(), c: vec![Coeff::zero(); n] };
    match solve(&p) {
        LpOutcome::Optimal(s) => Some(s.x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, ratio};

    fn r(v: &[i64]) -> Vec<Coeff> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn small_optimum() {
        // min -x - y, x + 2y + s1 = 4, 3x + y + s2 = 6 -> x = 8/5, y = 6/5
        let p = LpProblem { a: vec![r(&[1, 2, 1, 0]), r(&[3, 1, 0, 1])], b: r(&[4, 6]), c: r(&[-1, -1, 0, 0]) };
        let LpOutcome::Optimal(s) = solve(&p) else { panic!() };
        assert_eq!(s.x[0], ratio(8, 5));
        assert_eq!(s.x[1], ratio(6, 5));
        assert_eq!(s.objective, ratio(-14, 5));
        assert!(!s.is_degenerate());
        assert!(s.has_unique_optimum());
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = LpProblem { a: vec![r(&[1, 1])], b: r(&[-1]), c: r(&[0, 0]) };
        assert!(matches!(solve(&p), LpOutcome::Infeasible));
        let q = LpProblem { a: vec![r(&[1, -1])], b: r(&[1]), c: r(&[0, -1]) };
        assert!(matches!(solve(&q), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let p = LpProblem { a: vec![r(&[1, 1]), r(&[2, 2])], b: r(&[1, 2]), c: r(&[1, 2]) };
        let LpOutcome::Optimal(s) = solve(&p) else { panic!() };
        assert_eq!(s.x, r(&[1, 0]));
        assert_eq!(s.basis.len(), 1);
    }

    #[test]
    fn tie_in_objective_is_not_unique() {
        let p = LpProblem { a: vec![r(&[1, 1])], b: r(&[1]), c: r(&[1, 1]) };
        let LpOutcome::Optimal(s) = solve(&p) else { panic!() };
        assert!(!s.has_unique_optimum());
    }
}
