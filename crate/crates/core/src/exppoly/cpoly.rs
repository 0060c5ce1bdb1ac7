use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::C64;

/// Relative size below which a freshly combined coefficient is treated as an
/// exact cancellation. Coefficients are built from a handful of products of
/// roots of unity and user entries, so genuine values sit far above this.
pub const CANCEL_REL: f64 = 1e-11;

/// Complex-coefficient polynomial in one variable, ascending degree.
///
/// The zero polynomial is the empty coefficient list; otherwise the leading
/// coefficient is nonzero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CPoly {
    coeffs: Vec<C64>,
}

impl CPoly {
    pub fn zero() -> Self {
        CPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// `c * x^deg`.
    pub fn monomial(c: C64, deg: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); deg + 1];
        coeffs[deg] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        CPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != C64::new(0.0, 0.0))
    }

    pub fn leading(&self) -> Option<C64> {
        self.coeffs.last().copied()
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| c * (k as f64 + 1.0))
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == C64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `p(w x)` as a polynomial in `x`.
    pub fn compose_scale(&self, w: C64) -> Self {
        let mut pw = C64::new(1.0, 0.0);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c * pw);
            pw *= w;
        }
        Self::from_coeffs(coeffs)
    }

    /// Largest coefficient modulus, 0 for the zero polynomial.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Coefficientwise distance `max_k |p_k - q_k|`.
    pub fn max_diff(&self, other: &CPoly) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

fn cancel(sum: C64, magnitude: f64) -> C64 {
    if sum.norm() <= CANCEL_REL * magnitude {
        C64::new(0.0, 0.0)
    } else {
        sum
    }
}

impl Add<&CPoly> for &CPoly {
    type Output = CPoly;
    fn add(self, rhs: &CPoly) -> CPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                let (a, b) = (self.coeff(k), rhs.coeff(k));
                cancel(a + b, a.norm() + b.norm())
            })
            .collect();
        CPoly::from_coeffs(coeffs)
    }
}

impl Sub<&CPoly> for &CPoly {
    type Output = CPoly;
    fn sub(self, rhs: &CPoly) -> CPoly {
        self + &(-rhs)
    }
}

impl Neg for &CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        CPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul<&CPoly> for &CPoly {
    type Output = CPoly;
    fn mul(self, rhs: &CPoly) -> CPoly {
        if self.is_zero() || rhs.is_zero() {
            return CPoly::zero();
        }
        let len = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut sum = vec![C64::new(0.0, 0.0); len];
        let mut mag = vec![0.0; len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let p = a * b;
                sum[i + j] += p;
                mag[i + j] += p.norm();
            }
        }
        let coeffs = sum
            .into_iter()
            .zip(mag)
            .map(|(s, m)| cancel(s, m))
            .collect();
        CPoly::from_coeffs(coeffs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<CPoly> for CPoly {
            type Output = CPoly;
            fn $m(self, rhs: CPoly) -> CPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for CPoly {
    /// Renders as `[c0,c1,...]` with each entry `re,im` in parentheses.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "({},{})", fmt_num(c.re), fmt_num(c.im))?;
        }
        write!(f, "]")
    }
}

/// Fixed-precision float rendering shared by all debug dumps; negative zero
/// is folded into zero so dumps are stable across platforms.
pub(crate) fn fmt_num(x: f64) -> String {
    let s = format!("{:.12e}", x);
    if x == 0.0 || s.starts_with("-0.000000000000e") {
        "0.000000000000e0".to_string()
    } else {
        s
    }
}
