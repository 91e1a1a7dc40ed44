//! Bipartite matchings: maximum-weight perfect assignment with forbidden edges and
//! maximum-cardinality matching.

/// Maximum-weight perfect matching of a square weight matrix; `None` entries are
/// forbidden edges. Returns the total weight and the column assigned to each row,
/// or `None` when no perfect matching avoids forbidden edges.
pub fn max_weight_perfect_matching(w: &[Vec<Option<i64>>]) -> Option<(i64, Vec<usize>)> {
    let n = w.len();
    if n == 0 {
        return Some((0, vec![]));
    }
    assert!(w.iter().all(|r| r.len() == n), "weight matrix must be square");
    let maxabs = w.iter().flatten().flatten().map(|x| x.abs()).max().unwrap_or(0);
    // A single forbidden edge outweighs any difference between admissible matchings.
    let big = 2 * (n as i64) * (maxabs + 1) + 1;
    let cost = |i: usize, j: usize| -> i64 { w[i][j].map_or(big, |x| -x) };
    // Potentials formulation of the Hungarian algorithm, 1-based with a dummy column 0.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    let mut total = 0;
    for (i, &j) in assign.iter().enumerate() {
        total += w[i][j]?;
    }
    Some((total, assign))
}

/// A maximum matching in the bipartite graph given by a row-major pattern (augmenting
/// paths), as the column matched to each row.
pub fn matching_assignment(pattern: &[Vec<bool>]) -> Vec<Option<usize>> {
    let cols = pattern.first().map_or(0, Vec::len);
    let mut owner: Vec<Option<usize>> = vec![None; cols];
    fn augment(r: usize, pattern: &[Vec<bool>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for c in 0..owner.len() {
            if pattern[r][c] && !seen[c] {
                seen[c] = true;
                if owner[c].is_none_or(|o| augment(o, pattern, seen, owner)) {
                    owner[c] = Some(r);
                    return true;
                }
            }
        }
        false
    }
    for r in 0..pattern.len() {
        let mut seen = vec![false; cols];
        augment(r, pattern, &mut seen, &mut owner);
    }
    let mut assignment = vec![None; pattern.len()];
    for (c, o) in owner.iter().enumerate() {
        if let Some(r) = o {
            assignment[*r] = Some(c);
        }
    }
    assignment
}

/// Size of a maximum matching.
pub fn maximum_matching(pattern: &[Vec<bool>]) -> usize {
    matching_assignment(pattern).iter().flatten().count()
}

pub fn has_perfect_matching(pattern: &[Vec<bool>]) -> bool {
    pattern.iter().all(|r| r.len() == pattern.len()) && maximum_matching(pattern) == pattern.len()
}
