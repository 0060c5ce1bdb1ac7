//! Exponential polynomials in a complex variable `rho`.
//!
//! A term is `P(rho) * exp(-i rho s_Y) * atom(rho)` where `P` is a complex
//! polynomial, `s_Y` is the sum of the `n`-th roots of unity `omega^y` over an
//! index set `Y`, and `atom` is an optional placeholder for a transform of the
//! problem data. Determinants of characteristic matrices, their Cramer
//! numerators and the derived quantities all live in this representation.

mod cpoly;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

pub(crate) use cpoly::fmt_num;
pub use cpoly::{CPoly, CANCEL_REL};

use crate::C64;

/// `omega^k` with `omega = exp(2 pi i / n)`.
pub fn omega_pow(n: usize, k: i64) -> C64 {
    let k = k.rem_euclid(n as i64);
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
    C64::new(theta.cos(), theta.sin())
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ExpPolyError {
    #[error("ambient orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("exponent index {index} appears in both factors of a product")]
    ExponentCollision { index: usize },
    #[error("product of two data-carrying terms ({0} and {1})")]
    AtomCollision(DataAtom, DataAtom),
    #[error("term carries data atom {0} but no evaluator was supplied")]
    MissingEvaluator(DataAtom),
    #[error("operation needs a nonzero, data-free exponential polynomial")]
    Empty,
    #[error("matrix is not square")]
    NotSquare,
    #[error("cannot parse dump line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Index set `Y` of roots of unity appearing in an exponent.
#[derive(Clone, Copy, Debug)]
pub struct ExponentKey {
    n: usize,
    mask: u32,
    s: C64,
}

impl ExponentKey {
    pub fn new(n: usize, mask: u32) -> Self {
        assert!(n < 32 && (mask >> n) == 0, "index set outside 0..{n}");
        let s = (0..n)
            .filter(|y| mask & (1 << y) != 0)
            .map(|y| omega_pow(n, y as i64))
            .sum();
        ExponentKey { n, mask, s }
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, 0)
    }

    pub fn single(n: usize, y: usize) -> Self {
        Self::new(n, 1 << y)
    }

    pub fn from_elements(n: usize, ys: &[usize]) -> Self {
        Self::new(n, ys.iter().fold(0, |m, y| m | (1 << y)))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn elements(&self) -> Vec<usize> {
        (0..self.n).filter(|y| self.mask & (1 << y) != 0).collect()
    }

    /// `sum_{y in Y} omega^y`.
    pub fn s(&self) -> C64 {
        self.s
    }

    /// Disjoint union, or the first shared index.
    pub fn union(&self, other: &ExponentKey) -> Result<ExponentKey, ExpPolyError> {
        let shared = self.mask & other.mask;
        if shared != 0 {
            return Err(ExpPolyError::ExponentCollision {
                index: shared.trailing_zeros() as usize,
            });
        }
        Ok(Self::new(self.n, self.mask | other.mask))
    }

    /// `{y + shift mod n}`.
    pub fn rotate(&self, shift: usize) -> ExponentKey {
        let mask = self
            .elements()
            .into_iter()
            .fold(0, |m, y| m | (1 << ((y + shift) % self.n)));
        Self::new(self.n, mask)
    }
}

impl PartialEq for ExponentKey {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.mask == other.mask
    }
}
impl Eq for ExponentKey {}

impl Ord for ExponentKey {
    /// Lexicographic order on the sorted element lists.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.elements()
            .cmp(&other.elements())
            .then(self.n.cmp(&other.n))
    }
}
impl PartialOrd for ExponentKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExponentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements().iter().map(|y| y.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Placeholder for a data transform multiplying a term.
///
/// `Q0(z)` and `QT(z)` stand for the spatial transforms of the initial and
/// final-time profiles at `omega^z rho`; `H(j)` is the time transform of the
/// `j`-th boundary datum (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataAtom {
    None,
    Q0(usize),
    QT(usize),
    H(usize),
}

impl fmt::Display for DataAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataAtom::None => write!(f, "none"),
            DataAtom::Q0(z) => write!(f, "q0({z})"),
            DataAtom::QT(z) => write!(f, "qT({z})"),
            DataAtom::H(j) => write!(f, "h({j})"),
        }
    }
}

/// Supplies numeric values for data atoms at a point.
pub trait AtomEvaluator {
    fn atom(&self, atom: DataAtom, rho: C64) -> C64;
}

/// Terms sharing one exponent value `s` (and one atom), with their
/// polynomial coefficients summed.
///
/// Distinct index sets can share an exponent value, for instance the empty
/// set and the full set, so growth questions are decided per class.
#[derive(Clone, Debug)]
pub struct ExponentClass {
    pub s: C64,
    pub keys: Vec<ExponentKey>,
    pub atom: DataAtom,
    pub poly: CPoly,
}

/// One maximiser reported by [`ExpPolynomial::dominant_exponent`].
#[derive(Clone, Debug)]
pub struct Dominance {
    pub key: ExponentKey,
    pub s: C64,
    /// True when this class wins at every interior grid angle with no
    /// unresolved tie.
    pub strict: bool,
}

/// Interior sample count per arc used by dominance scans.
pub const ARC_GRID: usize = 720;

/// Tolerance for comparing exponent values.
pub const S_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ExpPolynomial {
    n: usize,
    terms: BTreeMap<(ExponentKey, DataAtom), CPoly>,
}

impl ExpPolynomial {
    pub fn zero(n: usize) -> Self {
        ExpPolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(key: ExponentKey, atom: DataAtom, poly: CPoly) -> Self {
        let mut out = Self::zero(key.order());
        if !poly.is_zero() {
            out.terms.insert((key, atom), poly);
        }
        out
    }

    pub fn from_poly(n: usize, poly: CPoly) -> Self {
        Self::term(ExponentKey::empty(n), DataAtom::None, poly)
    }

    pub fn constant(n: usize, c: C64) -> Self {
        Self::from_poly(n, CPoly::constant(c))
    }

    /// `exp(-i omega^k rho)`.
    pub fn exp_root(n: usize, k: usize) -> Self {
        Self::term(ExponentKey::single(n, k), DataAtom::None, CPoly::one())
    }

    pub fn atom(n: usize, atom: DataAtom) -> Self {
        Self::term(ExponentKey::empty(n), atom, CPoly::one())
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentKey, &DataAtom, &CPoly)> {
        self.terms.iter().map(|((k, a), p)| (k, a, p))
    }

    pub fn has_atoms(&self) -> bool {
        self.terms.keys().any(|(_, a)| *a != DataAtom::None)
    }

    /// Coefficient attached to an exact `(Y, atom)` pair.
    pub fn coefficient(&self, key: &ExponentKey, atom: DataAtom) -> CPoly {
        self.terms.get(&(*key, atom)).cloned().unwrap_or_default()
    }

    fn insert_add(&mut self, key: ExponentKey, atom: DataAtom, poly: &CPoly) {
        let slot = self.terms.entry((key, atom)).or_default();
        *slot = &*slot + poly;
        if slot.is_zero() {
            self.terms.remove(&(key, atom));
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ExpPolyError> {
        if self.n != other.n {
            return Err(ExpPolyError::OrderMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for ((k, a), p) in &other.terms {
            out.insert_add(*k, *a, p);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ExpPolyError> {
        if self.n != other.n {
            return Err(ExpPolyError::OrderMismatch(self.n, other.n));
        }
        let mut out = Self::zero(self.n);
        for ((k1, a1), p1) in &self.terms {
            for ((k2, a2), p2) in &other.terms {
                let key = k1.union(k2)?;
                let atom = match (a1, a2) {
                    (DataAtom::None, a) | (a, DataAtom::None) => *a,
                    _ => return Err(ExpPolyError::AtomCollision(*a1, *a2)),
                };
                out.insert_add(key, atom, &(p1 * p2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.mul_poly(&CPoly::constant(c))
    }

    pub fn mul_poly(&self, p: &CPoly) -> Self {
        let mut out = Self::zero(self.n);
        for ((k, a), q) in &self.terms {
            let prod = q * p;
            if !prod.is_zero() {
                out.terms.insert((*k, *a), prod);
            }
        }
        out
    }

    /// Rewrites or drops atoms; `None` from the map removes the term.
    pub fn map_atoms(&self, f: impl Fn(DataAtom) -> Option<DataAtom>) -> Self {
        let mut out = Self::zero(self.n);
        for ((k, a), p) in &self.terms {
            if let Some(b) = f(*a) {
                out.insert_add(*k, b, p);
            }
        }
        out
    }

    /// Determinant by row expansion, memoised over the set of used columns.
    ///
    /// Row `k` may only carry the exponent index `k` so that products never
    /// repeat an index; a violation surfaces as [`ExpPolyError::ExponentCollision`].
    pub fn det(m: &[Vec<ExpPolynomial>]) -> Result<ExpPolynomial, ExpPolyError> {
        let size = m.len();
        if size == 0 || m.iter().any(|row| row.len() != size) {
            return Err(ExpPolyError::NotSquare);
        }
        let n = m[0][0].n;
        if let Some(bad) = m.iter().flatten().find(|e| e.n != n) {
            return Err(ExpPolyError::OrderMismatch(n, bad.n));
        }
        assert!(size < 25, "determinant size {size} too large");
        let full: u32 = (1u32 << size) - 1;
        // minors[mask]: determinant of the trailing rows on the columns not in mask.
        let mut minors: Vec<Option<ExpPolynomial>> = vec![None; 1 << size];
        minors[full as usize] = Some(ExpPolynomial::constant(n, C64::new(1.0, 0.0)));
        let mut masks: Vec<u32> = (0..full).collect();
        masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        for mask in masks {
            let row = mask.count_ones() as usize;
            let mut acc = ExpPolynomial::zero(n);
            let mut position = 0;
            for col in 0..size {
                if mask & (1 << col) != 0 {
                    continue;
                }
                let sub = minors[(mask | (1 << col)) as usize]
                    .as_ref()
                    .expect("minor computed before its parent");
                if !m[row][col].is_zero() && !sub.is_zero() {
                    let mut prod = m[row][col].try_mul(sub)?;
                    if position % 2 == 1 {
                        prod = -&prod;
                    }
                    acc = acc.try_add(&prod)?;
                }
                position += 1;
            }
            minors[mask as usize] = Some(acc);
        }
        Ok(minors[0].take().expect("root minor"))
    }

    pub fn evaluate(
        &self,
        rho: C64,
        data: Option<&dyn AtomEvaluator>,
    ) -> Result<C64, ExpPolyError> {
        let i = C64::new(0.0, 1.0);
        let mut total = C64::new(0.0, 0.0);
        for ((k, a), p) in &self.terms {
            let mut v = p.eval(rho) * (-i * rho * k.s()).exp();
            if *a != DataAtom::None {
                let ev = data.ok_or(ExpPolyError::MissingEvaluator(*a))?;
                v *= ev.atom(*a, rho);
            }
            total += v;
        }
        Ok(total)
    }

    /// Sum of the moduli of the evaluated terms, the scale against which
    /// rounding in [`ExpPolynomial::evaluate`] is measured.
    pub fn magnitude(
        &self,
        rho: C64,
        data: Option<&dyn AtomEvaluator>,
    ) -> Result<f64, ExpPolyError> {
        let i = C64::new(0.0, 1.0);
        let mut total = 0.0;
        for ((k, a), p) in &self.terms {
            let mut v = p.eval(rho) * (-i * rho * k.s()).exp();
            if *a != DataAtom::None {
                let ev = data.ok_or(ExpPolyError::MissingEvaluator(*a))?;
                v *= ev.atom(*a, rho);
            }
            total += v.norm();
        }
        Ok(total)
    }

    /// Termwise derivative in `rho`; atoms are treated as constants, so this
    /// is only the true derivative for data-free inputs.
    pub fn derivative(&self) -> Self {
        let i = C64::new(0.0, 1.0);
        let mut out = Self::zero(self.n);
        for ((k, a), p) in &self.terms {
            let d = &p.derivative() - &p.scale(i * k.s());
            if !d.is_zero() {
                out.insert_add(*k, *a, &d);
            }
        }
        out
    }

    /// Groups terms by `(s_Y, atom)`, summing coefficients and dropping
    /// classes that cancel.
    pub fn classes(&self) -> Vec<ExponentClass> {
        let mut out: Vec<ExponentClass> = Vec::new();
        for ((k, a), p) in &self.terms {
            match out
                .iter_mut()
                .find(|c| c.atom == *a && (c.s - k.s()).norm() < S_TOL)
            {
                Some(c) => {
                    c.keys.push(*k);
                    c.poly = &c.poly + p;
                }
                None => out.push(ExponentClass {
                    s: k.s(),
                    keys: vec![*k],
                    atom: *a,
                    poly: p.clone(),
                }),
            }
        }
        out.retain(|c| !c.poly.is_zero());
        out
    }

    /// Maximisers of `Im(exp(i phi) s)` over the nonzero exponent classes on
    /// the closed arc `[phi1, phi2]`.
    ///
    /// Ties are broken by polynomial degree; a tie that survives that, or a
    /// change of winner inside the arc, makes the result non-strict.
    pub fn dominant_exponent(&self, phi1: f64, phi2: f64) -> Result<Vec<Dominance>, ExpPolyError> {
        if self.has_atoms() {
            return Err(ExpPolyError::Empty);
        }
        let classes = self.classes();
        if classes.is_empty() {
            return Err(ExpPolyError::Empty);
        }
        let mut winners: Vec<(usize, bool)> = Vec::new();
        let mut clean = true;
        for i in 1..=ARC_GRID {
            let phi = phi1 + (phi2 - phi1) * i as f64 / (ARC_GRID + 1) as f64;
            let (best, unique) = winner_at(&classes, phi);
            clean &= unique;
            if !winners.iter().any(|(w, _)| *w == best) {
                winners.push((best, true));
            }
        }
        let strict = clean && winners.len() == 1;
        Ok(winners
            .into_iter()
            .map(|(w, _)| Dominance {
                key: classes[w].keys[0],
                s: classes[w].s,
                strict,
            })
            .collect())
    }

    /// Largest coefficient modulus over all terms.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|p| p.max_abs()).fold(0.0, f64::max)
    }

    /// One line per term, `Y={..} sY=<re,im> atom=<..> poly=[..]`, ordered
    /// lexicographically by `Y`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for ((k, a), p) in &self.terms {
            out.push_str(&format!(
                "Y={} sY=<{},{}> atom=<{}> poly={}\n",
                k,
                fmt_num(k.s().re),
                fmt_num(k.s().im),
                a,
                p
            ));
        }
        out
    }

    /// Inverse of [`dump`](Self::dump).
    pub fn parse_dump(n: usize, text: &str) -> Result<Self, ExpPolyError> {
        parse::parse_dump(n, text)
    }
}

/// Index of the winning class at angle `phi`, and whether it won cleanly.
pub(crate) fn winner_at(classes: &[ExponentClass], phi: f64) -> (usize, bool) {
    let e = C64::from_polar(1.0, phi);
    let vals: Vec<f64> = classes.iter().map(|c| (e * c.s).im).collect();
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..classes.len())
        .filter(|&k| vals[k] >= max - S_TOL)
        .collect();
    if tied.len() == 1 {
        return (tied[0], true);
    }
    let top_deg = tied
        .iter()
        .map(|&k| classes[k].poly.degree().unwrap_or(0))
        .max()
        .unwrap_or(0);
    let by_deg: Vec<usize> = tied
        .into_iter()
        .filter(|&k| classes[k].poly.degree().unwrap_or(0) == top_deg)
        .collect();
    (by_deg[0], by_deg.len() == 1)
}

impl Add<&ExpPolynomial> for &ExpPolynomial {
    type Output = ExpPolynomial;
    fn add(self, rhs: &ExpPolynomial) -> ExpPolynomial {
        self.try_add(rhs)
            .expect("adding exponential polynomials of different order")
    }
}

impl Sub<&ExpPolynomial> for &ExpPolynomial {
    type Output = ExpPolynomial;
    fn sub(self, rhs: &ExpPolynomial) -> ExpPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &ExpPolynomial {
    type Output = ExpPolynomial;
    fn neg(self) -> ExpPolynomial {
        ExpPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(k, p)| (*k, -p)).collect(),
        }
    }
}

#[cfg(test)]
mod tests;
