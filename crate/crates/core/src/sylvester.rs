//! Canny-Emiris resultant matrices of a generic algebraic system with one distinguished
//! polynomial, built from a random lifting and perturbation of the Newton polytopes.

use std::thread;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::ags::Ags;
use crate::det::{determinant_factors, DetMethod, PolyMatrix};
use crate::frontend::{parse_poly, Scope};
use crate::lp::{solve, LpOutcome, LpProblem};
use crate::poly::{exact_divide, rat, Coeff, MultiPoly, PolyError, Var};
use crate::polytope::{lattice_rank, Point};

/// Denominator of the perturbation vector entries.
pub const PERTURBATION_DENOMINATOR: i64 = 65_521;
pub const MAX_ATTEMPTS: u32 = 16;

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("no tight subdivision found after {0} liftings")]
    TightnessRetryExceeded(u32),
    #[error("invalid matrix: {0}")]
    Invalid(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowLabel {
    /// 1-based polynomial index.
    pub poly: usize,
    pub shift: Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SylvesterMatrix {
    /// 0-based distinguished polynomial.
    pub distinguished: usize,
    pub rows: Vec<RowLabel>,
    pub columns: Vec<Point>,
    pub entries: Vec<Vec<Option<Var>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    /// 1-based.
    pub distinguished: usize,
    pub rows: Vec<RowLabel>,
    pub columns: Vec<Point>,
    pub entries: Vec<Vec<Option<String>>>,
}

/// The random data a matrix was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subdivision {
    pub seed: u64,
    pub attempts: u32,
    pub lifting: Vec<Vec<i64>>,
    pub perturbation: Vec<Coeff>,
}

impl SylvesterMatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.columns.len() && self.entries.iter().all(|r| r.len() == self.columns.len())
    }

    /// Number of rows filled with coefficients of polynomial `l` (0-based).
    pub fn rows_of(&self, l: usize) -> usize {
        self.rows.iter().filter(|r| r.poly == l + 1).count()
    }

    pub fn to_poly_matrix(&self) -> PolyMatrix {
        self.entries.iter().map(|r| r.iter().map(|e| e.map_or_else(MultiPoly::zero, MultiPoly::var)).collect()).collect()
    }

    /// Checks that every row holds exactly the coefficients of `y^shift * P_l`, all of
    /// whose monomials index existing columns.
    pub fn check_rows(&self, ags: &Ags) -> Result<(), MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Invalid(format!("{}x{} matrix", self.rows.len(), self.columns.len())));
        }
        let index: FxHashMap<&Point, usize> = self.columns.iter().enumerate().map(|(i, p)| (p, i)).collect();
        for (r, label) in self.rows.iter().enumerate() {
            let l = label.poly.checked_sub(1).filter(|&l| l < ags.len());
            let Some(l) = l else { return Err(MatrixError::Invalid(format!("row {r}: no polynomial {}", label.poly))) };
            let mut want = vec![None; self.columns.len()];
            for (h, a) in ags.polys[l].support.iter().enumerate() {
                let q: Point = a.iter().zip(&label.shift).map(|(x, s)| x + s).collect();
                match index.get(&q) {
                    Some(&c) => want[c] = Some(ags.coeff(l, h)),
                    None => return Err(MatrixError::Invalid(format!("row {r}: monomial {q:?} is not a column"))),
                }
            }
            if want != self.entries[r] {
                return Err(MatrixError::Invalid(format!("row {r}: entries differ from y^{:?} P{}", label.shift, label.poly)));
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> MatrixFile {
        MatrixFile {
            distinguished: self.distinguished + 1,
            rows: self.rows.clone(),
            columns: self.columns.clone(),
            entries: self.entries.iter().map(|r| r.iter().map(|e| e.map(|v| v.to_string())).collect()).collect(),
        }
    }

    pub fn from_file(f: &MatrixFile) -> Result<SylvesterMatrix, MatrixError> {
        let scope = Scope::open();
        let mut entries = Vec::new();
        for row in &f.entries {
            let mut out = Vec::new();
            for e in row {
                out.push(match e {
                    None => None,
                    Some(name) => {
                        let p = parse_poly(name, &scope).map_err(|e| MatrixError::Invalid(e.to_string()))?;
                        match p.as_term() {
                            Some((m, c)) if c.is_one() && m.pairs().len() == 1 && m.pairs()[0].1 == 1 => Some(m.pairs()[0].0),
                            _ => return Err(MatrixError::Invalid(format!("entry {name} is not a coefficient name"))),
                        }
                    }
                });
            }
            entries.push(out);
        }
        let m = SylvesterMatrix {
            distinguished: f.distinguished.checked_sub(1).ok_or_else(|| MatrixError::Invalid("distinguished index 0".into()))?,
            rows: f.rows.clone(),
            columns: f.columns.clone(),
            entries,
        };
        if !m.is_square() {
            return Err(MatrixError::Invalid("matrix is not square".into()));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("matrix serializes")
    }

    pub fn from_json(s: &str) -> Result<SylvesterMatrix, MatrixError> {
        let f: MatrixFile = serde_json::from_str(s).map_err(|e| MatrixError::Invalid(e.to_string()))?;
        SylvesterMatrix::from_file(&f)
    }

    pub fn determinant(&self) -> Result<MultiPoly, MatrixError> {
        let (negative, factors) = match self.determinant_factors()? {
            Some(x) => x,
            None => return Ok(MultiPoly::zero()),
        };
        let mut d = MultiPoly::one();
        for f in &factors {
            d = &d * f;
        }
        Ok(if negative { -d } else { d })
    }

    /// Determinants of the irreducible diagonal blocks, see [`determinant_factors`].
    pub fn determinant_factors(&self) -> Result<Option<(bool, Vec<MultiPoly>)>, MatrixError> {
        Ok(determinant_factors(&self.to_poly_matrix(), DetMethod::MinorExpansion)?)
    }
}

/// Optimal decomposition of one lattice point: per polynomial, the support points used.
enum Cell {
    Outside,
    Faces(Vec<Vec<usize>>),
    NotTight,
}

struct Locator<'a> {
    supports: &'a [Vec<Point>],
    a: Vec<Vec<Coeff>>,
    c: Vec<Coeff>,
    offsets: Vec<usize>,
    perturbation: &'a [Coeff],
}

impl<'a> Locator<'a> {
    fn new(supports: &'a [Vec<Point>], lifting: &[Vec<i64>], perturbation: &'a [Coeff]) -> Self {
        let d = perturbation.len();
        let total: usize = supports.iter().map(Vec::len).sum();
        let mut a = vec![vec![Coeff::zero(); total]; d + supports.len()];
        let mut c = Vec::with_capacity(total);
        let mut offsets = Vec::new();
        let mut col = 0;
        for (l, s) in supports.iter().enumerate() {
            offsets.push(col);
            for (h, p) in s.iter().enumerate() {
                for k in 0..d {
                    a[k][col] = rat(p[k]);
                }
                a[d + l][col] = Coeff::one();
                c.push(rat(lifting[l][h]));
                col += 1;
            }
        }
        Locator { supports, a, c, offsets, perturbation }
    }

    fn locate(&self, p: &Point) -> Cell {
        let d = p.len();
        let mut b: Vec<Coeff> = p.iter().zip(self.perturbation).map(|(x, e)| rat(*x) - e).collect();
        b.extend(std::iter::repeat_n(Coeff::one(), self.supports.len()));
        let lp = LpProblem { a: self.a.clone(), b, c: self.c.clone() };
        match solve(&lp) {
            LpOutcome::Infeasible => Cell::Outside,
            LpOutcome::Unbounded => Cell::NotTight,
            LpOutcome::Optimal(s) => {
                if s.is_degenerate() || !s.has_unique_optimum() || s.basis.len() != d + self.supports.len() {
                    return Cell::NotTight;
                }
                let faces: Vec<Vec<usize>> = self
                    .supports
                    .iter()
                    .enumerate()
                    .map(|(l, sup)| (0..sup.len()).filter(|&h| s.x[self.offsets[l] + h].is_positive()).collect())
                    .collect();
                let dims: usize = faces.iter().map(|f| f.len() - 1).sum();
                if dims != d {
                    return Cell::NotTight;
                }
                Cell::Faces(faces)
            }
        }
    }
}

/// Row content of a cell: the distinguished polynomial on its mixed cells, otherwise the
/// largest other index whose face is a vertex. Returns `(l, h)` with `h` that vertex.
fn row_content(faces: &[Vec<usize>], distinguished: usize) -> Option<(usize, usize)> {
    let mixed = faces[distinguished].len() == 1
        && faces.iter().enumerate().all(|(l, f)| l == distinguished || f.len() == 2);
    if mixed {
        return Some((distinguished, faces[distinguished][0]));
    }
    (0..faces.len()).rev().find(|&l| l != distinguished && faces[l].len() == 1).map(|l| (l, faces[l][0]))
}

fn box_points(lo: &[i64], hi: &[i64]) -> Vec<Point> {
    let mut out = Vec::new();
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return out;
    }
    let mut cur = lo.to_vec();
    loop {
        out.push(cur.clone());
        let mut k = cur.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
        }
    }
}

fn locate_all(locator: &Locator, points: &[Point]) -> Vec<Cell> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(points.len().max(1));
    let chunk = points.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> =
            points.chunks(chunk).map(|part| s.spawn(move || part.iter().map(|p| locator.locate(p)).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("cell location worker panicked")).collect()
    })
}

fn floor_div(a: i64, q: i64) -> i64 {
    a.div_euclid(q)
}

/// Builds the matrix with `distinguished` (0-based) as the polynomial of fewest rows.
pub fn build_sylvester(ags: &Ags, distinguished: usize, seed: u64) -> Result<(SylvesterMatrix, Subdivision), MatrixError> {
    let d = ags.dim();
    let supports = ags.supports();
    if distinguished >= supports.len() {
        return Err(MatrixError::Invalid(format!("no polynomial {}", distinguished + 1)));
    }
    let refs: Vec<&[Point]> = supports.iter().map(Vec::as_slice).collect();
    if supports.len() != d + 1 || lattice_rank(&refs) != d {
        return Err(MatrixError::Degenerate(format!(
            "{} polynomials whose supports span a lattice of rank {} in dimension {d}",
            supports.len(),
            lattice_rank(&refs)
        )));
    }
    let lo: Vec<i64> = (0..d).map(|k| supports.iter().map(|s| s.iter().map(|p| p[k]).min().unwrap()).sum()).collect();
    let hi: Vec<i64> = (0..d).map(|k| supports.iter().map(|s| s.iter().map(|p| p[k]).max().unwrap()).sum()).collect();
    let q = PERTURBATION_DENOMINATOR;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_ATTEMPTS {
        let lifting: Vec<Vec<i64>> = supports.iter().map(|s| s.iter().map(|_| rng.gen_range(0..1 << 16)).collect()).collect();
        let numerators: Vec<i64> = (0..d)
            .map(|_| loop {
                let s = rng.gen_range(-q / 8..=q / 8);
                if s != 0 {
                    break s;
                }
            })
            .collect();
        let perturbation: Vec<Coeff> = numerators.iter().map(|&s| Coeff::new(s.into(), q.into())).collect();
        // p - delta must lie in the box [lo, hi].
        let plo: Vec<i64> = lo.iter().zip(&numerators).map(|(l, s)| l + floor_div(*s, q) + 1).collect();
        let phi: Vec<i64> = hi.iter().zip(&numerators).map(|(h, s)| h + floor_div(*s, q)).collect();
        let plo: Vec<i64> = plo.iter().zip(&numerators).map(|(p, s)| if s % q == 0 { p - 1 } else { *p }).collect();
        let candidates = box_points(&plo, &phi);
        let locator = Locator::new(&supports, &lifting, &perturbation);
        let cells = locate_all(&locator, &candidates);
        if cells.iter().any(|c| matches!(c, Cell::NotTight)) {
            continue;
        }
        let mut columns = Vec::new();
        let mut contents = Vec::new();
        for (p, cell) in candidates.into_iter().zip(cells) {
            if let Cell::Faces(faces) = cell {
                let Some(rc) = row_content(&faces, distinguished) else {
                    return Err(MatrixError::Invalid(format!("cell of {p:?} has no vertex face")));
                };
                columns.push(p);
                contents.push(rc);
            }
        }
        let index: FxHashMap<&Point, usize> = columns.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut rows = Vec::with_capacity(columns.len());
        let mut entries = Vec::with_capacity(columns.len());
        for (p, &(l, h)) in columns.iter().zip(&contents) {
            let shift: Point = p.iter().zip(&supports[l][h]).map(|(x, a)| x - a).collect();
            let mut row = vec![None; columns.len()];
            for (g, a) in supports[l].iter().enumerate() {
                let q: Point = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
                let Some(&c) = index.get(&q) else {
                    return Err(MatrixError::Invalid(format!("row of {p:?} leaves the column set at {q:?}")));
                };
                row[c] = Some(ags.coeff(l, g));
            }
            rows.push(RowLabel { poly: l + 1, shift });
            entries.push(row);
        }
        let m = SylvesterMatrix { distinguished, rows, columns, entries };
        return Ok((m, Subdivision { seed, attempts: attempt, lifting, perturbation }));
    }
    Err(MatrixError::TightnessRetryExceeded(MAX_ATTEMPTS))
}

/// Quotient in the polynomial ring, if `g` divides `d` there.
pub fn polynomial_quotient(d: &MultiPoly, g: &MultiPoly) -> Option<MultiPoly> {
    exact_divide(d, g).ok().filter(MultiPoly::is_polynomial)
}

/// Best-effort common divisor of several determinants: the candidate of largest total degree
/// dividing all of them, or the nonzero input of fewest terms when it divides the others.
/// The flag reports whether the result is known to be a gcd up to a constant.
pub fn res_via_gcd(determinants: &[MultiPoly], candidates: &[MultiPoly]) -> Result<(MultiPoly, bool), MatrixError> {
    let nonzero: Vec<&MultiPoly> = determinants.iter().filter(|d| !d.is_zero()).collect();
    if nonzero.is_empty() {
        return Err(MatrixError::Invalid("all determinants vanish".into()));
    }
    let divides_all = |g: &MultiPoly| nonzero.iter().all(|d| polynomial_quotient(d, g).is_some());
    let mut pool: Vec<&MultiPoly> = candidates.iter().filter(|g| !g.is_zero()).collect();
    pool.extend(nonzero.iter().copied());
    pool.sort_by_key(|g| std::cmp::Reverse(g.total_degree()));
    for g in pool {
        if divides_all(g) {
            // A divisor that is itself one of the inputs is the gcd.
            let complete = nonzero.iter().any(|d| polynomial_quotient(d, g).is_some_and(|q| q.is_constant()));
            return Ok((g.clone(), complete));
        }
    }
    Ok((MultiPoly::one(), false))
}
