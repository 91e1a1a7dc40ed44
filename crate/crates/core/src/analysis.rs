//! Structural analysis of a differential system: order matrix, Jacobi numbers,
//! super-essential subsystems and the prolongation ps(P).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::det::PolyMatrix;
use crate::matching::{max_weight_perfect_matching, maximum_matching};
use crate::poly::{derive_n, diff_support, exact_divide, lord, ord, MultiPoly, PolyError, Var};
use crate::system::{DiffSystem, PsOrder};

/// `n x (n-1)` matrix of orders `ord(f_i, u_j)`, `None` standing for minus infinity.
pub type OrderMatrix = Vec<Vec<Option<i64>>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("system is not super essential (Jacobi numbers {0:?})")]
    NotSuperEssential(Vec<Option<i64>>),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub fn order_matrix(sys: &DiffSystem) -> OrderMatrix {
    sys.polys
        .iter()
        .map(|f| (1..=sys.num_vars() as u32).map(|j| ord(f, j).map(i64::from)).collect())
        .collect()
}

/// Jacobi number of a square order matrix: maximal weight of a transversal.
pub fn jacobi_number(o: &[Vec<Option<i64>>]) -> Option<i64> {
    max_weight_perfect_matching(o).map(|(w, _)| w)
}

/// `J_i`: Jacobi number of the order matrix with row `i` removed.
pub fn jacobi_numbers(o: &OrderMatrix) -> Vec<Option<i64>> {
    (0..o.len())
        .map(|i| {
            let minor: Vec<Vec<Option<i64>>> = o.iter().enumerate().filter(|(r, _)| *r != i).map(|(_, row)| row.clone()).collect();
            jacobi_number(&minor)
        })
        .collect()
}

pub fn is_super_essential(o: &OrderMatrix) -> bool {
    jacobi_numbers(o).iter().all(Option::is_some)
}

/// `gamma_j`: lowest derivative order of `u_j` over the polynomials that involve it.
pub fn gammas(sys: &DiffSystem) -> Vec<i64> {
    (1..=sys.num_vars() as u32)
        .map(|j| sys.polys.iter().filter_map(|f| lord(f, j)).min().map_or(0, i64::from))
        .collect()
}

/// Zero pattern of the structural matrix X(P).
pub fn structural_pattern(o: &OrderMatrix) -> Vec<Vec<bool>> {
    o.iter().map(|r| r.iter().map(Option::is_some).collect()).collect()
}

/// X(P) with symbolic entries `X{i}_{j}`.
pub fn structural_matrix(o: &OrderMatrix) -> PolyMatrix {
    o.iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, x)| if x.is_some() { MultiPoly::var(Var::structural(i as u32 + 1, j as u32 + 1)) } else { MultiPoly::zero() })
                .collect()
        })
        .collect()
}

/// Fraction-free row echelon form; returns the reduced rows and pivot columns.
fn echelon(mut a: PolyMatrix) -> Result<(PolyMatrix, Vec<usize>), PolyError> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = MultiPoly::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(p, r);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let t = &(&a[r][c] * &a[i][j]) - &(&a[i][c] * &a[r][j]);
                a[i][j] = exact_divide(&t, &prev)?;
            }
            a[i][c] = MultiPoly::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Ok((a, pivots))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemInfo {
    /// Chosen subsystem, 0-based indices into the system.
    pub indices: Vec<usize>,
    /// The super-essential subsystem is unique (`rank X(P) = n - 1`).
    pub unique: bool,
    /// Support of the smallest relation of the reduced basis, as produced by elimination.
    pub echelon_indices: Vec<usize>,
    pub rank: usize,
}

fn is_circuit(pattern: &[Vec<bool>], rows: &[usize]) -> bool {
    let sub: Vec<Vec<bool>> = rows.iter().map(|&r| pattern[r].clone()).collect();
    let k = rows.len();
    if maximum_matching(&sub) != k - 1 {
        return false;
    }
    (0..k).all(|skip| {
        let s: Vec<Vec<bool>> = sub.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, r)| r.clone()).collect();
        maximum_matching(&s) == k - 1
    })
}

/// Super-essential subsystem: the whole system when it is super essential; otherwise
/// the support of the smallest linear relation among `c_i` in `c_i + sum_j x_ij u_j`.
/// When several exist, the lexicographically smallest index set is returned.
pub fn super_essential_subsystem(sys: &DiffSystem) -> Result<SubsystemInfo, PolyError> {
    let o = order_matrix(sys);
    let n = sys.n();
    if is_super_essential(&o) {
        let all: Vec<usize> = (0..n).collect();
        return Ok(SubsystemInfo { indices: all.clone(), unique: true, echelon_indices: all, rank: n - 1 });
    }
    let x = structural_matrix(&o);
    let aug: PolyMatrix = x
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.extend((0..n).map(|k| if k == i { MultiPoly::one() } else { MultiPoly::zero() }));
            row
        })
        .collect();
    let (ech, pivots) = echelon(aug)?;
    let rank = pivots.iter().filter(|&&c| c < n - 1).count();
    let last = ech.iter().rev().find(|r| r.iter().any(|e| !e.is_zero())).expect("augmented matrix has full row rank");
    let echelon_indices: Vec<usize> = (0..n).filter(|&k| !last[n - 1 + k].is_zero()).collect();
    let unique = rank == n - 1;
    let mut indices = echelon_indices.clone();
    if !unique && n <= 20 {
        let pattern = structural_pattern(&o);
        let mut best: Option<Vec<usize>> = None;
        for mask in 1u32..(1 << n) {
            if mask.count_ones() < 2 {
                continue;
            }
            let rows: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if best.as_ref().is_some_and(|b| *b <= rows) {
                continue;
            }
            if is_circuit(&pattern, &rows) {
                best = Some(rows);
            }
        }
        if let Some(b) = best {
            indices = b;
        }
    }
    Ok(SubsystemInfo { indices, unique, echelon_indices, rank })
}

/// Numbers attached to a super-essential order matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub jacobi: Vec<i64>,
    pub gamma_per_var: Vec<i64>,
    pub gamma: i64,
    /// `m_j = max_i (o_ij + J_i)`.
    pub m: Vec<i64>,
    /// Upper window ends `M_j = m_j - gamma`.
    pub upper: Vec<i64>,
    /// Number of polynomials in ps(P).
    pub l: usize,
}

impl Shape {
    pub fn from_orders(o: &OrderMatrix, gamma_per_var: &[i64]) -> Result<Shape, AnalysisError> {
        let js = jacobi_numbers(o);
        if js.iter().any(Option::is_none) {
            return Err(AnalysisError::NotSuperEssential(js));
        }
        let jacobi: Vec<i64> = js.into_iter().map(Option::unwrap).collect();
        let gamma: i64 = gamma_per_var.iter().sum();
        let cols = o.first().map_or(0, Vec::len);
        let m: Vec<i64> =
            (0..cols).map(|j| o.iter().zip(&jacobi).filter_map(|(r, ji)| r[j].map(|x| x + ji)).max().unwrap_or(0)).collect();
        let upper = m.iter().map(|x| x - gamma).collect();
        let l = jacobi.iter().map(|ji| (ji - gamma + 1) as usize).sum();
        Ok(Shape { jacobi, gamma_per_var: gamma_per_var.to_vec(), gamma, m, upper, l })
    }

    pub fn prolongation_orders(&self) -> Vec<u32> {
        self.jacobi.iter().map(|ji| (ji - self.gamma) as u32).collect()
    }

    pub fn window_size(&self) -> usize {
        self.upper.iter().zip(&self.gamma_per_var).map(|(u, g)| (u - g + 1).max(0) as usize).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsEntry {
    /// 0-based index of the source polynomial.
    pub source: usize,
    pub derivative: u32,
    pub poly: MultiPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prolongation {
    pub entries: Vec<PsEntry>,
    pub shape: Shape,
}

impl Prolongation {
    /// The indeterminates `u_{j,k}`, `gamma_j <= k <= M_j`, as `(j, k)` with `j` 1-based.
    pub fn window_vars(&self) -> Vec<(u32, u32)> {
        let mut v = Vec::new();
        for (j, (&g, &u)) in self.shape.gamma_per_var.iter().zip(&self.shape.upper).enumerate() {
            for k in g..=u {
                v.push((j as u32 + 1, k as u32));
            }
        }
        v
    }
}

/// `f_i^{[L_i]}` for every `i`, listed per source polynomial in the requested order.
pub fn prolong(sys: &DiffSystem, orders: &[u32]) -> Result<Vec<PsEntry>, PolyError> {
    let mut out = Vec::new();
    for (i, (f, &li)) in sys.polys.iter().zip(orders).enumerate() {
        let mut group = Vec::new();
        for k in 0..=li {
            group.push(PsEntry { source: i, derivative: k, poly: derive_n(f, &sys.rules, k)? });
        }
        if sys.ps_order == PsOrder::Descending {
            group.reverse();
        }
        out.extend(group);
    }
    Ok(out)
}

/// Gaps `[lo_j, hi_j] minus union of supports` for each indeterminate.
pub fn support_gaps(entries: &[PsEntry], windows: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut covered: Vec<BTreeSet<i64>> = vec![BTreeSet::new(); windows.len()];
    for e in entries {
        for (j, k) in diff_support(&e.poly) {
            if let Some(set) = covered.get_mut(j as usize - 1) {
                set.insert(k as i64);
            }
        }
    }
    windows.iter().zip(&covered).map(|(&(lo, hi), c)| (lo..=hi).filter(|k| !c.contains(k)).collect()).collect()
}

/// ps(P) for a super-essential system, checking that the prolonged supports fill every
/// window `[gamma_j, M_j]` exactly.
pub fn build_ps(sys: &DiffSystem) -> Result<Prolongation, AnalysisError> {
    let o = order_matrix(sys);
    let shape = Shape::from_orders(&o, &gammas(sys))?;
    let entries = prolong(sys, &shape.prolongation_orders())?;
    let windows: Vec<(i64, i64)> = shape.gamma_per_var.iter().copied().zip(shape.upper.iter().copied()).collect();
    let gaps = support_gaps(&entries, &windows);
    if gaps.iter().any(|g| !g.is_empty()) {
        return Err(AnalysisError::Internal(format!("prolonged supports leave gaps {gaps:?}")));
    }
    for e in &entries {
        for (j, k) in diff_support(&e.poly) {
            let (lo, hi) = windows[j as usize - 1];
            if (k as i64) < lo || (k as i64) > hi {
                return Err(AnalysisError::Internal(format!("u{j} order {k} outside window [{lo}, {hi}]")));
            }
        }
    }
    if shape.window_size() + 1 != shape.l || entries.len() != shape.l {
        return Err(AnalysisError::Internal("window size differs from L - 1".into()));
    }
    Ok(Prolongation { entries, shape })
}

/// Prolongation orders and windows of the Carra'-Ferro construction: `L_i = N - o_i`,
/// window `[0, N]` with `N` the sum of the orders.
pub fn carra_ferro_bounds(sys: &DiffSystem) -> (Vec<u32>, Vec<(i64, i64)>) {
    let orders: Vec<u32> =
        sys.polys.iter().map(|f| diff_support(f).into_iter().map(|p| p.1).max().unwrap_or(0)).collect();
    let total: u32 = orders.iter().sum();
    (orders.iter().map(|o| total - o).collect(), vec![(0, total as i64); sys.num_vars()])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeGap {
    pub variable: String,
    pub max_power: i64,
    pub total_degree: i64,
}

/// Window variables whose highest power in the prolonged system stays below the total
/// degree of the system (degree sparsity, outside the scope of order sparsity).
pub fn degree_gaps(sys: &DiffSystem, entries: &[PsEntry], windows: &[(i64, i64)]) -> Vec<DegreeGap> {
    let deg_in_u = |p: &MultiPoly| -> i64 {
        p.terms().map(|(m, _)| m.pairs().iter().filter(|(v, _)| v.is_diff_ind()).map(|x| x.1 as i64).sum::<i64>()).max().unwrap_or(0)
    };
    let total = entries.iter().map(|e| deg_in_u(&e.poly)).max().unwrap_or(0);
    let mut out = Vec::new();
    for (j, &(lo, hi)) in windows.iter().enumerate() {
        for k in lo..=hi {
            let v = Var::diff_ind(j as u32 + 1, k as u32);
            let p = entries.iter().filter_map(|e| e.poly.max_exp(v)).max().unwrap_or(0) as i64;
            if p < total {
                out.push(DegreeGap { variable: crate::frontend::var_display(sys, v), max_power: p, total_degree: total });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WindowReport {
    pub variable: String,
    pub gamma: i64,
    pub upper: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubsystemReport {
    /// 1-based polynomial indices.
    pub indices: Vec<usize>,
    pub names: Vec<String>,
    pub unique: bool,
    pub echelon_indices: Vec<usize>,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaReport {
    pub per_variable: Vec<i64>,
    pub total: i64,
}

/// JSON analysis record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub schema: u32,
    pub order_matrix: OrderMatrix,
    pub jacobi: Vec<Option<i64>>,
    pub gamma: GammaReport,
    pub super_essential: bool,
    pub subsystem: SubsystemReport,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub window_per_variable: Vec<WindowReport>,
}

/// Full structural analysis. Windows and `L` refer to the chosen super-essential subsystem.
pub fn analyze(sys: &DiffSystem) -> Result<AnalysisReport, AnalysisError> {
    let o = order_matrix(sys);
    let jacobi = jacobi_numbers(&o);
    let g = gammas(sys);
    let sub = super_essential_subsystem(sys)?;
    let restricted = if sub.indices.len() == sys.n() {
        sys.clone()
    } else {
        sys.restrict(&sub.indices).map_err(|e| AnalysisError::Internal(e.to_string()))?
    };
    let shape = Shape::from_orders(&order_matrix(&restricted), &gammas(&restricted)).ok();
    let window_per_variable = match &shape {
        Some(s) => restricted
            .var_names
            .iter()
            .enumerate()
            .map(|(j, name)| WindowReport { variable: name.clone(), gamma: s.gamma_per_var[j], upper: s.upper[j] })
            .collect(),
        None => vec![],
    };
    Ok(AnalysisReport {
        schema: 1,
        order_matrix: o.clone(),
        super_essential: jacobi.iter().all(Option::is_some),
        jacobi,
        gamma: GammaReport { total: g.iter().sum(), per_variable: g },
        subsystem: SubsystemReport {
            names: sub.indices.iter().map(|&i| sys.poly_names[i].clone()).collect(),
            indices: sub.indices.iter().map(|i| i + 1).collect(),
            unique: sub.unique,
            echelon_indices: sub.echelon_indices.iter().map(|i| i + 1).collect(),
            rank: sub.rank,
        },
        l: shape.as_ref().map(|s| s.l),
        window_per_variable,
    })
}
