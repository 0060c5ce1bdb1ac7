//! Problem specifications, their validation, and the pivot bookkeeping that
//! every later stage reads.
//!
//! The boundary matrix has `n` rows and `2n` columns laid out as
//! `(alpha_{n-1}, beta_{n-1}, ..., alpha_0, beta_0)`, where `alpha_j`
//! multiplies the `j`-th derivative at `x = 0` and `beta_j` the `j`-th
//! derivative at `x = 1`.

mod function;
mod json;

use std::collections::BTreeMap;
use std::fmt;

pub use function::{ExpTerm, FunctionError, FunctionSpec, Spline, TrigTerm};
pub use json::{parse_problem, ParseError};

use crate::C64;

/// Entries closer than this to 0 or 1 count as exactly 0 or 1 in pivot and
/// sparsity tests.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// `x = 0`, the alpha columns.
    Left,
    /// `x = 1`, the beta columns.
    Right,
}

/// Column of the boundary matrix holding the coefficient of the
/// `order`-th derivative at `side`.
pub fn column_of(n: usize, side: Side, order: usize) -> usize {
    2 * (n - 1 - order) + usize::from(side == Side::Right)
}

/// Inverse of [`column_of`].
pub fn column_role(n: usize, col: usize) -> (Side, usize) {
    let side = if col % 2 == 0 {
        Side::Left
    } else {
        Side::Right
    };
    (side, n - 1 - col / 2)
}

/// Boundary-function label used by the interleaved `J` numbering:
/// `2j + 1` for the left trace of order `j`, `2j` for the right one.
pub fn trace_label(side: Side, order: usize) -> usize {
    2 * order + usize::from(side == Side::Left)
}

pub fn label_role(label: usize) -> (Side, usize) {
    if label % 2 == 1 {
        (Side::Left, (label - 1) / 2)
    } else {
        (Side::Right, label / 2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    /// Spatial order `n`.
    pub order: usize,
    /// Direction coefficient `a`.
    pub direction: C64,
    /// `n x 2n` boundary coefficient matrix.
    pub boundary: Vec<Vec<f64>>,
    pub final_time: f64,
    pub initial: FunctionSpec,
    pub data: Vec<FunctionSpec>,
}

impl ProblemSpec {
    /// Same boundary matrix and data with `a` replaced by `-a`.
    pub fn reversed(&self) -> ProblemSpec {
        ProblemSpec {
            direction: -self.direction,
            ..self.clone()
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.data.iter().all(FunctionSpec::is_zero)
    }

    pub fn coefficient(&self, row: usize, side: Side, order: usize) -> f64 {
        self.boundary[row][column_of(self.order, side, order)]
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("order must be at least 2, got {0}")]
    Order(usize),
    #[error("boundary matrix must be {n} x {cols}: {detail}")]
    Shape {
        n: usize,
        cols: usize,
        detail: String,
    },
    #[error("expected {expected} boundary data, got {got}")]
    DataArity { expected: usize, got: usize },
    #[error("boundary matrix is not in reduced row-echelon form: {0}")]
    NotReduced(String),
    #[error("direction coefficient {a} not allowed for order {n}")]
    Direction { n: usize, a: C64 },
    #[error("final time must be positive, got {0}")]
    FinalTime(f64),
    #[error(
        "initial and boundary data incompatible: residual {residual:.3e} exceeds {tolerance:.3e}"
    )]
    Compatibility {
        residual: f64,
        tolerance: f64,
        /// Per row `(A traces(q0))_k - h_k(0)`.
        rows: Vec<C64>,
    },
}

/// A problem known to satisfy all structural hypotheses.
#[derive(Clone, Debug)]
pub struct ValidatedProblem {
    spec: ProblemSpec,
    sets: IndexSets,
    class: BcClassification,
}

impl ValidatedProblem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn sets(&self) -> &IndexSets {
        &self.sets
    }

    pub fn classification(&self) -> &BcClassification {
        &self.class
    }

    pub fn order(&self) -> usize {
        self.spec.order
    }

    pub fn direction(&self) -> C64 {
        self.spec.direction
    }

    pub fn into_spec(self) -> ProblemSpec {
        self.spec
    }

    /// The same problem with `a` replaced by `-a`. Boundary structure is
    /// unchanged, so only the direction check could fail and it is skipped:
    /// the backward problem is studied for its growth, not solved.
    pub fn reversed(&self) -> ValidatedProblem {
        ValidatedProblem {
            spec: self.spec.reversed(),
            sets: self.sets.clone(),
            class: self.class.clone(),
        }
    }
}

/// Default compatibility tolerance for data of size `hmax`.
pub fn compat_tolerance(hmax: f64) -> f64 {
    1e-9 * (1.0 + hmax)
}

pub fn validate(p: &ProblemSpec) -> Result<ValidatedProblem, Vec<Violation>> {
    validate_with(p, None)
}

/// As [`validate`] with an explicit compatibility tolerance.
pub fn validate_with(
    p: &ProblemSpec,
    tol_compat: Option<f64>,
) -> Result<ValidatedProblem, Vec<Violation>> {
    let n = p.order;
    let mut out = Vec::new();
    if n < 2 {
        out.push(Violation::Order(n));
        return Err(out);
    }
    if p.boundary.len() != n || p.boundary.iter().any(|r| r.len() != 2 * n) {
        out.push(Violation::Shape {
            n,
            cols: 2 * n,
            detail: format!(
                "got {} rows of lengths {:?}",
                p.boundary.len(),
                p.boundary.iter().map(Vec::len).collect::<Vec<_>>()
            ),
        });
        return Err(out);
    }
    if p.data.len() != n {
        out.push(Violation::DataArity {
            expected: n,
            got: p.data.len(),
        });
    }
    if let Err(why) = pivot_columns(&p.boundary) {
        out.push(Violation::NotReduced(why));
    }
    if !direction_allowed(n, p.direction) {
        out.push(Violation::Direction { n, a: p.direction });
    }
    if !(p.final_time > 0.0) {
        out.push(Violation::FinalTime(p.final_time));
    }
    if p.data.len() == n {
        let rows = compatibility_rows(p);
        let residual = rows.iter().map(|r| r.norm()).fold(0.0, f64::max);
        let hmax = p
            .data
            .iter()
            .map(|h| h.eval(0.0).norm())
            .fold(0.0, f64::max);
        let tolerance = tol_compat.unwrap_or_else(|| compat_tolerance(hmax));
        if residual > tolerance {
            out.push(Violation::Compatibility {
                residual,
                tolerance,
                rows,
            });
        }
    }
    if !out.is_empty() {
        return Err(out);
    }
    let sets = index_sets(&p.boundary, n).expect("pivot structure checked above");
    let class = classify_bc(&p.boundary, &sets, p.is_homogeneous());
    Ok(ValidatedProblem {
        spec: p.clone(),
        sets,
        class,
    })
}

fn direction_allowed(n: usize, a: C64) -> bool {
    let tol = 1e-12;
    if n % 2 == 1 {
        (a - C64::i()).norm() < tol || (a + C64::i()).norm() < tol
    } else {
        (a.norm() - 1.0).abs() < tol && a.re >= -tol
    }
}

/// `A (q0^{(n-1)}(0), q0^{(n-1)}(1), ..., q0(0), q0(1))^T - h(0)` row by row.
pub fn compatibility_rows(p: &ProblemSpec) -> Vec<C64> {
    let n = p.order;
    let traces: Vec<C64> = (0..2 * n)
        .map(|col| {
            let (side, order) = column_role(n, col);
            let x = if side == Side::Left { 0.0 } else { 1.0 };
            p.initial.derivative(order, x)
        })
        .collect();
    p.boundary
        .iter()
        .zip(&p.data)
        .map(|(row, h)| row.iter().zip(&traces).map(|(a, t)| *a * t).sum::<C64>() - h.eval(0.0))
        .collect()
}

fn is_zero(x: f64) -> bool {
    x.abs() <= PIVOT_TOL
}

/// Pivot column of each row, or why the matrix is not in reduced
/// row-echelon form with full row rank.
pub fn pivot_columns(m: &[Vec<f64>]) -> Result<Vec<usize>, String> {
    let mut pivots: Vec<usize> = Vec::with_capacity(m.len());
    for (k, row) in m.iter().enumerate() {
        let Some(p) = row.iter().position(|x| !is_zero(*x)) else {
            return Err(format!("row {} is zero", k + 1));
        };
        if (row[p] - 1.0).abs() > PIVOT_TOL {
            return Err(format!("row {} leads with {} instead of 1", k + 1, row[p]));
        }
        if pivots.last().is_some_and(|&q| q >= p) {
            return Err(format!(
                "pivot of row {} is not right of the previous one",
                k + 1
            ));
        }
        if let Some(other) = (0..m.len()).find(|&r| r != k && !is_zero(m[r][p])) {
            return Err(format!(
                "pivot column {} of row {} has a nonzero in row {}",
                p + 1,
                k + 1,
                other + 1
            ));
        }
        pivots.push(p);
    }
    Ok(pivots)
}

/// Row reduction of an arbitrary full-rank matrix. Returns the reduced
/// matrix and the row operation `T` with `reduced = T m`, which the caller
/// applies to the data vector.
pub fn row_reduce(m: &[Vec<f64>]) -> Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let rows = m.len();
    let cols = m.first()?.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut t: Vec<Vec<f64>> = (0..rows)
        .map(|i| (0..rows).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut lead = 0;
    for r in 0..rows {
        let scale = a.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
        loop {
            if lead >= cols {
                return None;
            }
            let piv = (r..rows).max_by(|&i, &j| a[i][lead].abs().total_cmp(&a[j][lead].abs()))?;
            if a[piv][lead].abs() > 1e-12 * scale {
                a.swap(r, piv);
                t.swap(r, piv);
                break;
            }
            lead += 1;
        }
        let d = a[r][lead];
        a[r].iter_mut().for_each(|x| *x /= d);
        t[r].iter_mut().for_each(|x| *x /= d);
        for i in 0..rows {
            if i != r {
                let f = a[i][lead];
                if f != 0.0 {
                    for c in 0..cols {
                        a[i][c] -= f * a[r][c];
                    }
                    for c in 0..rows {
                        t[i][c] -= f * t[r][c];
                    }
                }
            }
        }
        for x in a.iter_mut().flatten() {
            if is_zero(*x) {
                *x = 0.0;
            }
        }
        lead += 1;
    }
    Some((a, t))
}

/// Pivot bookkeeping of the boundary matrix.
///
/// `hat_*` hold derivative orders whose column carries a pivot, `tilde_*`
/// the complementary orders. `unknown_labels` lists the trace labels of the
/// pivot-free columns in decreasing order (the column order of the
/// characteristic matrix), `pivot_labels` those of the pivot columns. The
/// pivot-row maps send an order to the 0-based row holding its pivot.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSets {
    pub n: usize,
    pub hat_plus: Vec<usize>,
    pub hat_minus: Vec<usize>,
    pub tilde_plus: Vec<usize>,
    pub tilde_minus: Vec<usize>,
    pub unknown_labels: Vec<usize>,
    pub pivot_labels: Vec<usize>,
    pub pivot_row_plus: BTreeMap<usize, usize>,
    pub pivot_row_minus: BTreeMap<usize, usize>,
}

impl IndexSets {
    /// Pivot row of the trace `(side, order)`, if it carries a pivot.
    pub fn pivot_row(&self, side: Side, order: usize) -> Option<usize> {
        match side {
            Side::Left => self.pivot_row_plus.get(&order).copied(),
            Side::Right => self.pivot_row_minus.get(&order).copied(),
        }
    }
}

pub fn index_sets(m: &[Vec<f64>], n: usize) -> Result<IndexSets, String> {
    let pivots = pivot_columns(m)?;
    let mut pivot_row_plus = BTreeMap::new();
    let mut pivot_row_minus = BTreeMap::new();
    for (row, &col) in pivots.iter().enumerate() {
        match column_role(n, col) {
            (Side::Left, j) => pivot_row_plus.insert(j, row),
            (Side::Right, j) => pivot_row_minus.insert(j, row),
        };
    }
    let hat_plus: Vec<usize> = pivot_row_plus.keys().copied().collect();
    let hat_minus: Vec<usize> = pivot_row_minus.keys().copied().collect();
    let tilde_plus: Vec<usize> = (0..n).filter(|j| !pivot_row_plus.contains_key(j)).collect();
    let tilde_minus: Vec<usize> = (0..n)
        .filter(|j| !pivot_row_minus.contains_key(j))
        .collect();
    let mut unknown_labels: Vec<usize> = tilde_plus
        .iter()
        .map(|&j| trace_label(Side::Left, j))
        .chain(tilde_minus.iter().map(|&j| trace_label(Side::Right, j)))
        .collect();
    unknown_labels.sort_unstable_by(|a, b| b.cmp(a));
    let mut pivot_labels: Vec<usize> = hat_plus
        .iter()
        .map(|&j| trace_label(Side::Left, j))
        .chain(hat_minus.iter().map(|&j| trace_label(Side::Right, j)))
        .collect();
    pivot_labels.sort_unstable_by(|a, b| b.cmp(a));
    Ok(IndexSets {
        n,
        hat_plus,
        hat_minus,
        tilde_plus,
        tilde_minus,
        unknown_labels,
        pivot_labels,
        pivot_row_plus,
        pivot_row_minus,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct BcClassification {
    pub homogeneous: bool,
    pub coupled: bool,
    pub robin: bool,
    pub simple: bool,
    /// Orders `j` at which some row has both a nonzero left and right entry.
    pub coupling: usize,
    /// Orders `j` whose right column is identically zero.
    pub right_handed: usize,
    pub b1: usize,
    pub b2: usize,
    pub b3: usize,
}

pub fn classify_bc(m: &[Vec<f64>], sets: &IndexSets, homogeneous: bool) -> BcClassification {
    let n = sets.n;
    let entry = |k: usize, side, j| m[k][column_of(n, side, j)];
    let nz = |x: f64| !is_zero(x);
    let rows = 0..m.len();
    let row_has = |k: usize, side| (0..n).any(|j| nz(entry(k, side, j)));
    let pivot_side = |k: usize| {
        if sets.pivot_row_plus.values().any(|&r| r == k) {
            Side::Left
        } else {
            Side::Right
        }
    };
    let coupled = rows.clone().any(|k| match pivot_side(k) {
        Side::Left => row_has(k, Side::Right),
        Side::Right => row_has(k, Side::Left),
    });
    let robin = rows.clone().any(|k| {
        (0..n)
            .filter(|&j| nz(entry(k, Side::Left, j)) || nz(entry(k, Side::Right, j)))
            .count()
            > 1
    });
    let coupling = (0..n)
        .filter(|&j| {
            rows.clone()
                .any(|k| nz(entry(k, Side::Left, j)) && nz(entry(k, Side::Right, j)))
        })
        .count();
    let right_handed = (0..n)
        .filter(|&j| rows.clone().all(|k| !nz(entry(k, Side::Right, j))))
        .count();
    let b1 = sets
        .tilde_minus
        .iter()
        .filter(|&&j| {
            rows.clone()
                .any(|k| nz(entry(k, Side::Right, j)) && pivot_side(k) == Side::Left)
        })
        .count();
    let b3 = sets
        .tilde_plus
        .iter()
        .filter(|&&j| {
            rows.clone()
                .any(|k| nz(entry(k, Side::Left, j)) && pivot_side(k) == Side::Right)
        })
        .count();
    BcClassification {
        homogeneous,
        coupled,
        robin,
        simple: !coupled && !robin,
        coupling,
        right_handed,
        b1,
        b2: sets.tilde_minus.len(),
        b3,
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

#[cfg(test)]
mod tests;
