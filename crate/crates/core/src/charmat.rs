//! The characteristic matrix, its determinant, the reduced boundary
//! conditions and the Cramer numerators.
//!
//! Unknown boundary transforms (the pivot-free traces) index the columns in
//! decreasing label order; row `k` is the global relation rotated by
//! `omega^k`, so it only ever carries the exponential `exp(-i omega^k rho)`.

use crate::exppoly::{omega_pow, CPoly, DataAtom, ExpPolyError, ExpPolynomial, ExponentKey};
use crate::ibvp::{column_of, label_role, IndexSets, Side, ValidatedProblem};
use crate::C64;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CharError {
    #[error("characteristic determinant vanishes identically")]
    ZeroDeterminant,
    #[error(transparent)]
    Algebra(#[from] ExpPolyError),
}

/// `c_r(rho) = -a rho^n (i rho)^{-(r+1)}`, a monomial of degree `n - 1 - r`.
pub fn c_poly(n: usize, a: C64, r: usize) -> CPoly {
    let ipow = C64::i().powi(-((r + 1) as i32));
    CPoly::monomial(-a * ipow, n - 1 - r)
}

/// `c_r(omega^k rho)` as a polynomial in `rho`.
pub fn c_rotated(n: usize, a: C64, r: usize, k: usize) -> CPoly {
    c_poly(n, a, r).compose_scale(omega_pow(n, k as i64))
}

#[derive(Clone, Debug)]
pub struct CharMatrix {
    pub n: usize,
    pub entries: Vec<Vec<ExpPolynomial>>,
    /// Trace label of each column.
    pub labels: Vec<usize>,
}

impl CharMatrix {
    pub fn evaluate(&self, rho: C64) -> Vec<Vec<C64>> {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.evaluate(rho, None).expect("data-free"))
                    .collect()
            })
            .collect()
    }

    /// One block per entry in row-major order, then the determinant.
    pub fn dump(&self, delta: &ExpPolynomial) -> String {
        let mut out = String::new();
        for (k, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out.push_str(&format!(
                    "# entry {} {} label {}\n",
                    k + 1,
                    j + 1,
                    self.labels[j]
                ));
                out.push_str(&e.dump());
            }
        }
        out.push_str("# determinant\n");
        out.push_str(&delta.dump());
        out
    }
}

/// Entries of `A` in the row holding the pivot of `(side, order)`.
fn pivot_coefficient(
    p: &ValidatedProblem,
    pivot_side: Side,
    pivot_order: usize,
    side: Side,
    order: usize,
) -> f64 {
    let row = p
        .sets()
        .pivot_row(pivot_side, pivot_order)
        .expect("pivot order");
    p.spec().coefficient(row, side, order)
}

/// Coefficients multiplying `1` and `exp(-i omega^k rho)` in row `k` for the
/// unknown trace `(side, order)`.
fn row_parts(p: &ValidatedProblem, k: usize, side: Side, order: usize) -> (CPoly, CPoly) {
    let n = p.order();
    let a = p.direction();
    let sets = p.sets();
    let c = |r: usize| c_rotated(n, a, r, k);
    let mut plain = CPoly::zero();
    let mut shifted = CPoly::zero();
    match side {
        Side::Left => plain = &plain + &c(order),
        Side::Right => shifted = &shifted - &c(order),
    }
    for &r in &sets.hat_plus {
        let coef = pivot_coefficient(p, Side::Left, r, side, order);
        if coef != 0.0 {
            plain = &plain - &c(r).scale(C64::new(coef, 0.0));
        }
    }
    for &r in &sets.hat_minus {
        let coef = pivot_coefficient(p, Side::Right, r, side, order);
        if coef != 0.0 {
            shifted = &shifted + &c(r).scale(C64::new(coef, 0.0));
        }
    }
    (plain, shifted)
}

fn with_shift(n: usize, k: usize, plain: CPoly, shifted: CPoly) -> ExpPolynomial {
    &ExpPolynomial::from_poly(n, plain)
        + &ExpPolynomial::term(ExponentKey::single(n, k), DataAtom::None, shifted)
}

pub fn build_char_matrix(p: &ValidatedProblem) -> CharMatrix {
    let n = p.order();
    let labels = p.sets().unknown_labels.clone();
    let entries = (0..n)
        .map(|k| {
            labels
                .iter()
                .map(|&label| {
                    let (side, order) = label_role(label);
                    let (plain, shifted) = row_parts(p, k, side, order);
                    with_shift(n, k, plain, shifted)
                })
                .collect()
        })
        .collect();
    CharMatrix { n, entries, labels }
}

pub fn char_det(m: &CharMatrix) -> Result<ExpPolynomial, CharError> {
    let d = ExpPolynomial::det(&m.entries)?;
    if d.is_zero() {
        return Err(CharError::ZeroDeterminant);
    }
    Ok(d)
}

/// Reduced boundary conditions `W = h~ - Ahat V`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBc {
    /// `ahat[k][j]`: coefficient of the `j`-th unknown in row `k`.
    pub ahat: Vec<Vec<f64>>,
    /// Trace label of `W_k`, the pivot of row `k`.
    pub pivot_labels: Vec<usize>,
}

pub fn reduced_bc(p: &ValidatedProblem) -> ReducedBc {
    let n = p.order();
    let sets = p.sets();
    let ahat = p
        .spec()
        .boundary
        .iter()
        .map(|row| {
            sets.unknown_labels
                .iter()
                .map(|&label| {
                    let (side, order) = label_role(label);
                    row[column_of(n, side, order)]
                })
                .collect()
        })
        .collect();
    ReducedBc {
        ahat,
        pivot_labels: sets.pivot_labels.clone(),
    }
}

/// Cramer numerators for all `2n` boundary transforms.
///
/// Index `j < n` is the `j`-th unknown column, `n + k` the pivot trace of
/// row `k`. `zeta` carries initial-datum and boundary-data atoms, `eta` the
/// final-time atoms. Both include the `c` prefactor of their trace.
#[derive(Clone, Debug)]
pub struct CramerSystem {
    pub n: usize,
    pub direction: C64,
    pub delta: ExpPolynomial,
    pub zeta: Vec<ExpPolynomial>,
    pub eta: Vec<ExpPolynomial>,
    /// Trace label for each of the `2n` indices.
    pub labels: Vec<usize>,
    /// Indices whose trace sits at `x = 0`.
    pub plus: Vec<usize>,
    /// Indices whose trace sits at `x = 1`.
    pub minus: Vec<usize>,
    pub homogeneous: bool,
    pub sets: IndexSets,
}

impl CramerSystem {
    /// `c_order` of the trace at index `j`.
    pub fn prefactor(&self, j: usize) -> CPoly {
        c_poly(self.n, self.direction, label_role(self.labels[j]).1)
    }

    pub fn zeta_sum(&self, side: Side) -> ExpPolynomial {
        let idx = if side == Side::Left {
            &self.plus
        } else {
            &self.minus
        };
        idx.iter()
            .fold(ExpPolynomial::zero(self.n), |acc, &j| &acc + &self.zeta[j])
    }

    pub fn eta_sum(&self, side: Side) -> ExpPolynomial {
        let idx = if side == Side::Left {
            &self.plus
        } else {
            &self.minus
        };
        idx.iter()
            .fold(ExpPolynomial::zero(self.n), |acc, &j| &acc + &self.eta[j])
    }

    /// `sum_{j in hat_side} c_j(rho) h~_{pivot row}` as an atom expression.
    pub fn data_part(&self, side: Side) -> ExpPolynomial {
        let mut out = ExpPolynomial::zero(self.n);
        if self.homogeneous {
            return out;
        }
        let (orders, rows) = match side {
            Side::Left => (&self.sets.hat_plus, &self.sets.pivot_row_plus),
            Side::Right => (&self.sets.hat_minus, &self.sets.pivot_row_minus),
        };
        for &j in orders {
            let atom = ExpPolynomial::atom(self.n, DataAtom::H(rows[&j] + 1));
            out = &out + &atom.mul_poly(&c_poly(self.n, self.direction, j));
        }
        out
    }
}

/// Replaces column `col` of the matrix by `v` and takes the determinant.
fn replaced_det(
    m: &CharMatrix,
    col: usize,
    v: &[ExpPolynomial],
) -> Result<ExpPolynomial, ExpPolyError> {
    let mut entries = m.entries.clone();
    for (row, value) in entries.iter_mut().zip(v) {
        row[col] = value.clone();
    }
    ExpPolynomial::det(&entries)
}

pub fn cramer_system(p: &ValidatedProblem) -> Result<CramerSystem, CharError> {
    let n = p.order();
    let a = p.direction();
    let sets = p.sets().clone();
    let homogeneous = p.spec().is_homogeneous();
    let m = build_char_matrix(p);
    let delta = char_det(&m)?;
    let reduced = reduced_bc(p);

    let u: Vec<ExpPolynomial> = (0..n)
        .map(|k| {
            let mut entry = ExpPolynomial::atom(n, DataAtom::Q0(k));
            if !homogeneous {
                for &l in &sets.hat_plus {
                    let h = ExpPolynomial::atom(n, DataAtom::H(sets.pivot_row_plus[&l] + 1));
                    entry = &entry - &h.mul_poly(&c_rotated(n, a, l, k));
                }
                let mut shifted = ExpPolynomial::zero(n);
                for &l in &sets.hat_minus {
                    let h = ExpPolynomial::atom(n, DataAtom::H(sets.pivot_row_minus[&l] + 1));
                    shifted = &shifted + &h.mul_poly(&c_rotated(n, a, l, k));
                }
                entry = &entry + &ExpPolynomial::exp_root(n, k).try_mul(&shifted)?;
            }
            Ok(entry)
        })
        .collect::<Result<_, ExpPolyError>>()?;
    let final_column: Vec<ExpPolynomial> = (0..n)
        .map(|k| ExpPolynomial::atom(n, DataAtom::QT(k)))
        .collect();

    let mut zeta_hat = Vec::with_capacity(2 * n);
    let mut eta_hat = Vec::with_capacity(2 * n);
    for j in 0..n {
        zeta_hat.push(replaced_det(&m, j, &u)?);
        eta_hat.push(replaced_det(&m, j, &final_column)?);
    }
    for k in 0..n {
        let mut z = if homogeneous {
            ExpPolynomial::zero(n)
        } else {
            ExpPolynomial::atom(n, DataAtom::H(k + 1))
        };
        let mut e = ExpPolynomial::zero(n);
        for j in 0..n {
            let coef = reduced.ahat[k][j];
            if coef != 0.0 {
                z = &z - &zeta_hat[j].scale(C64::new(coef, 0.0));
                e = &e - &eta_hat[j].scale(C64::new(coef, 0.0));
            }
        }
        zeta_hat.push(z);
        eta_hat.push(e);
    }

    let labels: Vec<usize> = sets
        .unknown_labels
        .iter()
        .chain(&sets.pivot_labels)
        .copied()
        .collect();
    let scale = |j: usize, x: &ExpPolynomial| x.mul_poly(&c_poly(n, a, label_role(labels[j]).1));
    let zeta = (0..2 * n).map(|j| scale(j, &zeta_hat[j])).collect();
    let eta = (0..2 * n).map(|j| scale(j, &eta_hat[j])).collect();
    let plus = (0..2 * n).filter(|&j| labels[j] % 2 == 1).collect();
    let minus = (0..2 * n).filter(|&j| labels[j] % 2 == 0).collect();
    Ok(CramerSystem {
        n,
        direction: a,
        delta,
        zeta,
        eta,
        labels,
        plus,
        minus,
        homogeneous,
        sets,
    })
}
