//! Integer polytopes given by point sets: hulls, Minkowski sums, exact volumes,
//! lattice points, lattices spanned by supports and mixed volumes.

use std::collections::{BTreeMap, BTreeSet};
use std::thread;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rustc_hash::FxHashMap;

use crate::lp::feasible_point;
use crate::poly::{rat, Coeff};

pub type Point = Vec<i64>;

fn dedup(points: &[Point]) -> Vec<Point> {
    let set: BTreeSet<Point> = points.iter().cloned().collect();
    set.into_iter().collect()
}

/// Whether `target` is a convex combination of `points` (exact LP feasibility).
pub fn in_hull_rational(points: &[Point], target: &[Coeff]) -> bool {
    if points.is_empty() {
        return false;
    }
    let d = target.len();
    let mut a: Vec<Vec<Coeff>> = (0..d).map(|k| points.iter().map(|p| rat(p[k])).collect()).collect();
    a.push(vec![Coeff::one(); points.len()]);
    let mut b = target.to_vec();
    b.push(Coeff::one());
    feasible_point(&a, &b).is_some()
}

pub fn in_hull(points: &[Point], target: &[i64]) -> bool {
    let t: Vec<Coeff> = target.iter().map(|&x| rat(x)).collect();
    in_hull_rational(points, &t)
}

/// Columns `k` such that projecting onto them is injective on the affine hull.
fn spanning_coordinates(pts: &[Point]) -> Vec<usize> {
    let d = pts[0].len();
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut coords = Vec::new();
    for k in 0..d {
        chosen.push(pts.iter().map(|p| p[k] - pts[0][k]).collect());
        if rank(&chosen) == chosen.len() {
            coords.push(k);
        } else {
            chosen.pop();
        }
    }
    coords
}

/// Vertices of the convex hull, sorted. The hull is triangulated by placing inside the
/// affine hull; a point of that boundary triangulation is a vertex iff the normals of
/// the simplices around it span the space.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let pts = dedup(points);
    if pts.len() <= 2 {
        return pts;
    }
    let coords = spanning_coordinates(&pts);
    if coords.is_empty() {
        return vec![pts[0].clone()];
    }
    let projected: Vec<Point> = pts.iter().map(|p| coords.iter().map(|&k| p[k]).collect()).collect();
    let (facets, _) = place(&projected).expect("projection onto spanning coordinates is full-dimensional");
    let mut normals: BTreeMap<usize, BTreeSet<Vec<i128>>> = BTreeMap::new();
    for f in &facets {
        let g = f.normal.iter().fold(0i128, |g, &x| gcd(g, x.abs()));
        let unit: Vec<i128> = f.normal.iter().map(|x| x / g).collect();
        for &v in &f.verts {
            normals.entry(v).or_default().insert(unit.clone());
        }
    }
    normals
        .into_iter()
        .filter(|(_, ns)| rank_wide(&ns.iter().cloned().collect::<Vec<_>>()) == coords.len())
        .map(|(v, _)| pts[v].clone())
        .collect()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Vertices of `conv(a) + conv(b)`.
pub fn minkowski_sum(a: &[Point], b: &[Point]) -> Vec<Point> {
    let mut sums = Vec::with_capacity(a.len() * b.len());
    for p in a {
        for q in b {
            sums.push(p.iter().zip(q).map(|(x, y)| x + y).collect());
        }
    }
    convex_hull(&sums)
}

/// Determinant of a small integer matrix (Bareiss, exact division).
pub fn det_int(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(r, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[k][k].checked_mul(m[i][j]).and_then(|x| x.checked_sub(m[i][k].checked_mul(m[k][j])?));
                m[i][j] = t.expect("integer overflow in determinant") / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Rank over Q of a set of integer vectors.
pub fn rank(vectors: &[Vec<i64>]) -> usize {
    let wide: Vec<Vec<i128>> = vectors.iter().map(|v| v.iter().map(|&x| x as i128).collect()).collect();
    rank_wide(&wide)
}

fn rank_wide(vectors: &[Vec<i128>]) -> usize {
    let mut rows: Vec<Vec<BigRational>> =
        vectors.iter().map(|v| v.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(p, r);
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let f = &rows[i][c] / &rows[r][c];
            let pr = rows[r].clone();
            for (x, y) in rows[i].iter_mut().zip(&pr) {
                *x -= &f * y;
            }
        }
        r += 1;
    }
    r
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i128> {
    a.iter().zip(b).map(|(x, y)| (*x - *y) as i128).collect()
}

/// Outward-orientable normal of the hyperplane through `d` points in `R^d`.
fn hyperplane(pts: &[&Point]) -> (Vec<i128>, i128) {
    let d = pts[0].len();
    let rows: Vec<Vec<i128>> = pts[1..].iter().map(|p| sub(p, pts[0])).collect();
    let mut normal = Vec::with_capacity(d);
    for k in 0..d {
        let minor: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != k).map(|(_, x)| *x).collect()).collect();
        let v = det_int(minor);
        normal.push(if k % 2 == 0 { v } else { -v });
    }
    let offset = dot(&normal, pts[0]);
    (normal, offset)
}

fn dot(n: &[i128], p: &[i64]) -> i128 {
    n.iter().zip(p).map(|(a, b)| a * *b as i128).sum()
}

struct Facet {
    verts: Vec<usize>,
    normal: Vec<i128>,
    offset: i128,
}

/// `d!` times the Euclidean volume of the hull (an integer), via a placing triangulation.
pub fn normalized_volume(points: &[Point]) -> BigInt {
    place(&dedup(points)).map_or_else(BigInt::zero, |(_, v)| v)
}

/// Beneath-beyond placement of distinct points. Returns the boundary facets of the hull
/// (simplices over indices into `pts`, with outward normals) and `d!` times its volume,
/// or `None` when the points do not span the ambient space.
fn place(pts: &[Point]) -> Option<(Vec<Facet>, BigInt)> {
    let d = pts.first().map(Vec::len)?;
    if d == 0 {
        return None;
    }
    // Initial simplex: greedily add affinely independent points.
    let mut simplex = vec![0usize];
    let mut diffs: Vec<Vec<i64>> = Vec::new();
    for i in 1..pts.len() {
        if simplex.len() == d + 1 {
            break;
        }
        let v: Vec<i64> = pts[i].iter().zip(&pts[0]).map(|(a, b)| a - b).collect();
        diffs.push(v);
        if rank(&diffs) == diffs.len() {
            simplex.push(i);
        } else {
            diffs.pop();
        }
    }
    if simplex.len() < d + 1 {
        return None;
    }
    let interior: Vec<i128> = (0..d).map(|k| simplex.iter().map(|&i| pts[i][k] as i128).sum()).collect();
    let scale = (d + 1) as i128;
    let orient = |verts: Vec<usize>| -> Facet {
        let refs: Vec<&Point> = verts.iter().map(|&i| &pts[i]).collect();
        let (mut normal, mut offset) = hyperplane(&refs);
        let side: i128 = normal.iter().zip(&interior).map(|(a, b)| a * b).sum::<i128>() - scale * offset;
        if side > 0 {
            normal.iter_mut().for_each(|x| *x = -*x);
            offset = -offset;
        }
        Facet { verts, normal, offset }
    };
    let mut facets: Vec<Facet> = (0..=d)
        .map(|skip| orient(simplex.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v).collect()))
        .collect();
    let simplex_det = |verts: &[usize], apex: usize| -> i128 {
        det_int(verts.iter().map(|&v| sub(&pts[v], &pts[apex])).collect()).abs()
    };
    let mut total = BigInt::from(simplex_det(&simplex[1..], simplex[0]));
    let in_simplex: BTreeSet<usize> = simplex.iter().copied().collect();
    for p in 0..pts.len() {
        if in_simplex.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = (0..facets.len()).filter(|&f| dot(&facets[f].normal, &pts[p]) > facets[f].offset).collect();
        if visible.is_empty() {
            continue;
        }
        let mut ridges: FxHashMap<Vec<usize>, u32> = FxHashMap::default();
        for &f in &visible {
            total += BigInt::from(simplex_det(&facets[f].verts, p));
            let vs = &facets[f].verts;
            for skip in 0..vs.len() {
                let mut r: Vec<usize> = vs.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v).collect();
                r.sort_unstable();
                *ridges.entry(r).or_default() += 1;
            }
        }
        let vis: BTreeSet<usize> = visible.into_iter().collect();
        let mut next: Vec<Facet> =
            facets.into_iter().enumerate().filter(|(i, _)| !vis.contains(i)).map(|(_, f)| f).collect();
        let mut horizon: Vec<Vec<usize>> = ridges.into_iter().filter(|(_, c)| *c == 1).map(|(r, _)| r).collect();
        horizon.sort();
        for mut r in horizon {
            r.push(p);
            next.push(orient(r));
        }
        facets = next;
    }
    Some((facets, total))
}

/// Euclidean volume of the hull in the ambient dimension; zero when not full-dimensional.
pub fn volume(points: &[Point]) -> Coeff {
    let d = points.first().map_or(0, Vec::len);
    let fact: BigInt = (1..=d as u64).map(BigInt::from).product();
    Coeff::new(normalized_volume(points), fact)
}

/// Integer points of the hull (bounding box scan with exact membership tests).
pub fn lattice_points(points: &[Point]) -> Vec<Point> {
    let pts = dedup(points);
    let Some(d) = pts.first().map(Vec::len) else { return vec![] };
    let lo: Vec<i64> = (0..d).map(|k| pts.iter().map(|p| p[k]).min().unwrap()).collect();
    let hi: Vec<i64> = (0..d).map(|k| pts.iter().map(|p| p[k]).max().unwrap()).collect();
    let verts = convex_hull(&pts);
    let mut out = Vec::new();
    let mut cur = lo.clone();
    loop {
        if in_hull(&verts, &cur) {
            out.push(cur.clone());
        }
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
            k += 1;
        }
    }
}

/// Difference vectors `a - a0` of every support; they generate the linear part of the
/// affine lattice spanned by the supports.
fn difference_vectors(supports: &[&[Point]]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for s in supports {
        if let Some(a0) = s.first() {
            for a in &s[1..] {
                out.push(a.iter().zip(a0).map(|(x, y)| x - y).collect());
            }
        }
    }
    out
}

/// Rank of the lattice spanned by the Minkowski sum of the given supports.
pub fn lattice_rank(supports: &[&[Point]]) -> usize {
    let diffs = difference_vectors(supports);
    if diffs.is_empty() {
        0
    } else {
        rank(&diffs)
    }
}

/// Index of the lattice spanned by the supports' difference vectors in `Z^d`, or
/// `None` when that lattice is not of full rank.
pub fn lattice_index(supports: &[&[Point]], d: usize) -> Option<BigInt> {
    let mut rows: Vec<Vec<BigInt>> =
        difference_vectors(supports).into_iter().map(|v| v.into_iter().map(BigInt::from).collect()).collect();
    let mut r = 0;
    let mut index = BigInt::one();
    for c in 0..d {
        // Euclid on column c among rows r.. until one nonzero entry remains.
        loop {
            let nz: Vec<usize> = (r..rows.len()).filter(|&i| !rows[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).unwrap();
            for &i in &nz {
                if i == p {
                    continue;
                }
                let q = &rows[i][c] / &rows[p][c];
                let pr = rows[p].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
            }
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { return None };
        rows.swap(p, r);
        index *= rows[r][c].abs();
        r += 1;
    }
    Some(index)
}

/// Algebraic essentiality of the subfamily `j` (indices into `supports`):
/// `rank L_J = |J| - 1` and `rank L_J' >= |J'|` for every proper nonempty `J'`.
pub fn is_essential(supports: &[Vec<Point>], j: &[usize]) -> bool {
    let pick = |idx: &[usize]| -> usize {
        let s: Vec<&[Point]> = idx.iter().map(|&i| supports[i].as_slice()).collect();
        lattice_rank(&s)
    };
    if pick(j) + 1 != j.len() {
        return false;
    }
    let k = j.len();
    (1..(1u64 << k) - 1).all(|mask| {
        let sub: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| j[b]).collect();
        pick(&sub) >= sub.len()
    })
}

/// Euclidean volumes of `sum_{j in J} conv(polys[j])` for every nonempty subset `J`,
/// indexed by bitmask (index 0 unused).
fn subset_sum_volumes(polys: &[Vec<Point>]) -> Vec<Coeff> {
    let n = polys.len();
    let hulls: Vec<Vec<Point>> = polys.iter().map(|p| convex_hull(p)).collect();
    let mut sums: Vec<Vec<Point>> = vec![Vec::new(); 1 << n];
    let mut vols = vec![Coeff::zero(); 1 << n];
    // Subsets of equal size only depend on smaller ones, so each layer runs in parallel.
    for size in 1..=n as u32 {
        let layer: Vec<usize> = (1usize..(1 << n)).filter(|m| m.count_ones() == size).collect();
        let results: Vec<(Vec<Point>, Coeff)> = thread::scope(|scope| {
            let workers = thread::available_parallelism().map_or(1, |w| w.get());
            let chunk = layer.len().div_ceil(workers).max(1);
            let handles: Vec<_> = layer
                .chunks(chunk)
                .map(|part| {
                    let (sums, hulls) = (&sums, &hulls);
                    scope.spawn(move || {
                        part.iter()
                            .map(|&mask| {
                                let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
                                let rest = mask & !(1 << top);
                                let s = if rest == 0 { hulls[top].clone() } else { minkowski_sum(&sums[rest], &hulls[top]) };
                                let v = volume(&s);
                                (s, v)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("volume worker panicked")).collect()
        });
        for (mask, (s, v)) in layer.into_iter().zip(results) {
            sums[mask] = s;
            vols[mask] = v;
        }
    }
    vols
}

/// Inclusion-exclusion over the subsets of `members` (a bitmask of `n` polytopes).
fn inclusion_exclusion(vols: &[Coeff], members: usize) -> Coeff {
    let n = members.count_ones();
    let mut total = Coeff::zero();
    let mut sub = members;
    while sub != 0 {
        if (n - sub.count_ones()) % 2 == 0 {
            total += &vols[sub];
        } else {
            total -= &vols[sub];
        }
        sub = (sub - 1) & members;
    }
    total
}

/// Mixed volume of `n` polytopes in `R^n` (Bernstein normalisation, unit simplices give 1)
/// by inclusion-exclusion over Minkowski sums.
pub fn mixed_volume(polys: &[Vec<Point>]) -> Coeff {
    if polys.is_empty() {
        return Coeff::one();
    }
    inclusion_exclusion(&subset_sum_volumes(polys), (1 << polys.len()) - 1)
}

/// `MV_{-l}`: mixed volume of all supports but `l`, in units of the lattice spanned by
/// all supports. `None` when that lattice is not of full rank.
pub fn mixed_volume_minus(supports: &[Vec<Point>], l: usize) -> Option<Coeff> {
    mixed_volumes_minus(supports).into_iter().nth(l).flatten()
}

/// `MV_{-l}` for every `l`, sharing the Minkowski sums.
pub fn mixed_volumes_minus(supports: &[Vec<Point>]) -> Vec<Option<Coeff>> {
    let d = supports.first().and_then(|s| s.first()).map_or(0, Vec::len);
    let refs: Vec<&[Point]> = supports.iter().map(Vec::as_slice).collect();
    let Some(index) = lattice_index(&refs, d).filter(|_| supports.len() == d + 1) else {
        return vec![None; supports.len()];
    };
    let vols = subset_sum_volumes(supports);
    let all = (1usize << supports.len()) - 1;
    (0..supports.len()).map(|l| Some(inclusion_exclusion(&vols, all & !(1 << l)) / Coeff::from_integer(index.clone()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;

    fn simplex(d: usize, k: i64) -> Vec<Point> {
        let mut v = vec![vec![0; d]];
        for i in 0..d {
            let mut p = vec![0; d];
            p[i] = k;
            v.push(p);
        }
        v
    }

    #[test]
    fn hull_drops_interior_points() {
        let pts = vec![vec![0, 0], vec![2, 0], vec![0, 2], vec![1, 1], vec![0, 1], vec![1, 0]];
        assert_eq!(convex_hull(&pts), vec![vec![0, 0], vec![0, 2], vec![2, 0]]);
    }

    #[test]
    fn volumes() {
        assert_eq!(volume(&simplex(2, 1)), ratio(1, 2));
        assert_eq!(volume(&simplex(2, 2)), rat(2));
        assert_eq!(volume(&[vec![0], vec![2]]), rat(2));
        assert_eq!(volume(&[vec![0, 0], vec![1, 1], vec![2, 2]]), rat(0));
        let cube: Vec<Point> = (0..8).map(|i| vec![i & 1, (i >> 1) & 1, (i >> 2) & 1]).collect();
        assert_eq!(volume(&cube), rat(1));
        let mut with_inner = cube.clone();
        with_inner.push(vec![0, 0, 0]);
        assert_eq!(volume(&with_inner), rat(1));
    }

    #[test]
    fn minkowski_sum_of_segments_is_square() {
        let s = minkowski_sum(&[vec![0, 0], vec![1, 0]], &[vec![0, 0], vec![0, 1]]);
        assert_eq!(s, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(volume(&s), rat(1));
    }

    #[test]
    fn lattice_points_of_triangle() {
        assert_eq!(lattice_points(&simplex(2, 2)).len(), 6);
    }

    #[test]
    fn mixed_volume_of_unit_simplices() {
        assert_eq!(mixed_volume(&[simplex(2, 1), simplex(2, 1)]), rat(1));
        assert_eq!(mixed_volume(&[simplex(2, 2), simplex(2, 3)]), rat(6));
        assert_eq!(mixed_volume(&[simplex(3, 1), simplex(3, 1), simplex(3, 2)]), rat(2));
    }

    #[test]
    fn lattice_rank_and_essentiality() {
        let seg = vec![vec![0, 0], vec![1, 0]];
        assert_eq!(lattice_rank(&[&seg]), 1);
        assert!(!is_essential(&[seg.clone()], &[0]));
        let point = vec![vec![0, 0]];
        assert!(is_essential(&[point.clone()], &[0]));
        assert!(!is_essential(&[point.clone(), point.clone()], &[0, 1]));
        let tri = simplex(2, 1);
        assert!(is_essential(&[tri.clone(), tri.clone(), tri], &[0, 1, 2]));
    }

    #[test]
    fn lattice_index_detects_sublattice() {
        let even = vec![vec![0, 0], vec![2, 0], vec![0, 1]];
        assert_eq!(lattice_index(&[&even], 2), Some(BigInt::from(2)));
        assert_eq!(lattice_index(&[&[vec![0, 0], vec![1, 1]][..]], 2), None);
    }
}
