//! Exact determinants of matrices with polynomial entries.

use rustc_hash::FxHashMap;

use crate::matching::matching_assignment;
use crate::poly::{exact_divide, MultiPoly, PolyError};

pub type PolyMatrix = Vec<Vec<MultiPoly>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetMethod {
    /// Fraction-free Gaussian elimination with exact division.
    Bareiss,
    /// Row-by-row Laplace expansion memoized on the set of used columns.
    MinorExpansion,
}

fn check_square(m: &PolyMatrix) -> usize {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "determinant of a non-square matrix");
    n
}

/// Determinant via the block triangular form, each diagonal block with `method`.
pub fn determinant(m: &PolyMatrix, method: DetMethod) -> Result<MultiPoly, PolyError> {
    let Some((negative, factors)) = determinant_factors(m, method)? else { return Ok(MultiPoly::zero()) };
    let mut d = MultiPoly::one();
    for f in &factors {
        d = &d * f;
    }
    Ok(if negative { -d } else { d })
}

/// Determinants of the diagonal blocks of the block triangular form and the sign
/// relating their product to `det(m)`; `None` when the matrix is structurally singular.
pub fn determinant_factors(m: &PolyMatrix, method: DetMethod) -> Result<Option<(bool, Vec<MultiPoly>)>, PolyError> {
    let n = check_square(m);
    let Some(blocks) = diagonal_blocks(m) else { return Ok(None) };
    let rows: Vec<usize> = blocks.iter().flat_map(|b| b.0.iter().copied()).collect();
    let cols: Vec<usize> = blocks.iter().flat_map(|b| b.1.iter().copied()).collect();
    let negative = permutation_is_odd(&rows) != permutation_is_odd(&cols);
    let mut factors = Vec::with_capacity(blocks.len());
    for (rs, cs) in &blocks {
        let sub: PolyMatrix = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c].clone()).collect()).collect();
        let d = match method {
            DetMethod::Bareiss => det_bareiss(&sub)?,
            DetMethod::MinorExpansion => det_minor_expansion(&sub),
        };
        if d.is_zero() {
            return Ok(None);
        }
        factors.push(d);
    }
    debug_assert_eq!(rows.len(), n);
    Ok(Some((negative, factors)))
}

fn permutation_is_odd(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    let mut odd = false;
    for s in 0..p.len() {
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

/// Row and column sets (each sorted) of the irreducible diagonal blocks: strongly
/// connected components of the row graph induced by a perfect matching.
pub fn diagonal_blocks(m: &PolyMatrix) -> Option<Vec<(Vec<usize>, Vec<usize>)>> {
    let n = check_square(m);
    let pattern: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|x| !x.is_zero()).collect()).collect();
    let mate: Vec<usize> = matching_assignment(&pattern).into_iter().collect::<Option<Vec<_>>>()?;
    let mut row_of_col = vec![0; n];
    for (r, &c) in mate.iter().enumerate() {
        row_of_col[c] = r;
    }
    // Edge r -> r' when row r meets the column matched to r'.
    let succ: Vec<Vec<usize>> =
        (0..n).map(|r| (0..n).filter(|&c| pattern[r][c] && row_of_col[c] != r).map(|c| row_of_col[c]).collect()).collect();
    let mut blocks = Vec::new();
    for comp in strongly_connected(&succ) {
        let mut rows = comp;
        rows.sort_unstable();
        let mut cols: Vec<usize> = rows.iter().map(|&r| mate[r]).collect();
        cols.sort_unstable();
        blocks.push((rows, cols));
    }
    Some(blocks)
}

/// Tarjan's algorithm, iterative.
fn strongly_connected(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Bareiss elimination; pivots are chosen among nonzero candidates with fewest terms.
pub fn det_bareiss(m: &PolyMatrix) -> Result<MultiPoly, PolyError> {
    let n = check_square(m);
    if n == 0 {
        return Ok(MultiPoly::one());
    }
    let mut a = m.clone();
    let mut prev = MultiPoly::one();
    let mut negate = false;
    for k in 0..n {
        let pivot = (k..n).filter(|&r| !a[r][k].is_zero()).min_by_key(|&r| a[r][k].len());
        let Some(p) = pivot else { return Ok(MultiPoly::zero()) };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = if k == 0 { t } else { exact_divide(&t, &prev)? };
            }
            a[i][k] = MultiPoly::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if negate { -d } else { d })
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct ColSet(Vec<u64>);

impl ColSet {
    fn empty(n: usize) -> Self {
        ColSet(vec![0; n.div_ceil(64)])
    }
    fn has(&self, j: usize) -> bool {
        self.0[j / 64] >> (j % 64) & 1 == 1
    }
    fn with(&self, j: usize) -> Self {
        let mut s = self.clone();
        s.0[j / 64] |= 1 << (j % 64);
        s
    }
    fn count_above(&self, j: usize) -> u32 {
        let w = j / 64;
        let mut c = (self.0[w] >> (j % 64) >> 1).count_ones();
        for x in &self.0[w + 1..] {
            c += x.count_ones();
        }
        c
    }
}

/// Memoized Laplace expansion. Efficient for sparse, banded matrices whose entries are
/// small, which is the shape of resultant matrices.
pub fn det_minor_expansion(m: &PolyMatrix) -> MultiPoly {
    let n = check_square(m);
    if n == 0 {
        return MultiPoly::one();
    }
    let support: Vec<Vec<usize>> = m.iter().map(|r| (0..n).filter(|&j| !r[j].is_zero()).collect()).collect();
    if support.iter().any(Vec::is_empty) {
        return MultiPoly::zero();
    }
    // Rows sorted by their first and last nonzero columns keep the frontier narrow.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&r| (support[r][0], *support[r].last().unwrap(), r));
    let mut perm_sign_negative = false;
    {
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = order[x];
                len += 1;
            }
            if len % 2 == 0 {
                perm_sign_negative = !perm_sign_negative;
            }
        }
    }
    // Columns still reachable from rows at positions >= k.
    let mut reachable = vec![ColSet::empty(n); n + 1];
    for k in (0..n).rev() {
        let mut s = reachable[k + 1].clone();
        for &j in &support[order[k]] {
            s = s.with(j);
        }
        reachable[k] = s;
    }
    let mut level: FxHashMap<ColSet, MultiPoly> = FxHashMap::default();
    level.insert(ColSet::empty(n), MultiPoly::one());
    for (k, &r) in order.iter().enumerate() {
        let mut next: FxHashMap<ColSet, MultiPoly> = FxHashMap::default();
        for (set, val) in &level {
            for &j in &support[r] {
                if set.has(j) {
                    continue;
                }
                let ns = set.with(j);
                // Every unused column must still be coverable by the remaining rows.
                let dead = (0..n).any(|c| !ns.has(c) && !reachable[k + 1].has(c));
                if dead {
                    continue;
                }
                let mut term = val * &m[r][j];
                if set.count_above(j) % 2 == 1 {
                    term = -term;
                }
                match next.get_mut(&ns) {
                    Some(acc) => *acc += &term,
                    None => {
                        next.insert(ns, term);
                    }
                }
            }
        }
        next.retain(|_, v| !v.is_zero());
        level = next;
        if level.is_empty() {
            return MultiPoly::zero();
        }
    }
    let d = level.into_values().next().unwrap_or_else(MultiPoly::zero);
    if perm_sign_negative {
        -d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, Var};

    fn v(i: u32) -> MultiPoly {
        MultiPoly::var(Var::alg(i))
    }

    fn generic(n: usize) -> PolyMatrix {
        (0..n).map(|i| (0..n).map(|j| MultiPoly::var(Var::structural(i as u32, j as u32))).collect()).collect()
    }

    #[test]
    fn two_by_two() {
        let m = vec![vec![v(1), v(2)], vec![v(3), v(4)]];
        let want = &(&v(1) * &v(4)) - &(&v(2) * &v(3));
        assert_eq!(det_bareiss(&m).unwrap(), want);
        assert_eq!(det_minor_expansion(&m), want);
    }

    #[test]
    fn generic_four_by_four_agree() {
        let m = generic(4);
        let a = det_bareiss(&m).unwrap();
        assert_eq!(a.len(), 24);
        assert_eq!(a, det_minor_expansion(&m));
    }

    #[test]
    fn pivoting_changes_sign_correctly() {
        let z = MultiPoly::zero();
        let m = vec![vec![z.clone(), v(1), z.clone()], vec![v(2), z.clone(), z.clone()], vec![z.clone(), z.clone(), v(3)]];
        let want = -(&(&v(1) * &v(2)) * &v(3));
        assert_eq!(det_bareiss(&m).unwrap(), want);
        assert_eq!(det_minor_expansion(&m), want);
    }

    #[test]
    fn block_triangular_split() {
        let z = MultiPoly::zero();
        // Two 2x2 blocks coupled by one entry, rows and columns scrambled.
        let m = vec![
            vec![z.clone(), v(1), z.clone(), v(2)],
            vec![v(5), z.clone(), v(6), v(9)],
            vec![z.clone(), v(3), z.clone(), v(4)],
            vec![v(7), z.clone(), v(8), z.clone()],
        ];
        let (neg, factors) = determinant_factors(&m, DetMethod::MinorExpansion).unwrap().unwrap();
        assert_eq!(factors.len(), 2);
        let prod = &factors[0] * &factors[1];
        let want = det_minor_expansion(&m);
        assert_eq!(if neg { -prod } else { prod }, want);
        assert_eq!(determinant(&m, DetMethod::Bareiss).unwrap(), want);
    }

    #[test]
    fn singular_matrix() {
        let m = vec![vec![v(1), v(2)], vec![v(1).scale(&rat(2)), v(2).scale(&rat(2))]];
        assert!(det_bareiss(&m).unwrap().is_zero());
        assert!(det_minor_expansion(&m).is_zero());
    }
}
