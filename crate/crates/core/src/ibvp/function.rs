//! Concrete carriers for the initial datum and the boundary data.

use crate::numeric::exp_moments;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct TrigTerm {
    pub freq: f64,
    pub cos: C64,
    pub sin: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpTerm {
    pub coef: C64,
    pub rate: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    /// `sum_k coeffs[k] y^k`.
    Poly(Vec<C64>),
    /// `sum cos * cos(freq y) + sin * sin(freq y)`.
    Trig(Vec<TrigTerm>),
    /// `sum coef * exp(rate y)`.
    Exp(Vec<ExpTerm>),
    /// Clamped cubic spline through the samples.
    Samples(Spline),
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FunctionError {
    #[error("sample grid needs at least 5 points, got {0}")]
    TooFewSamples(usize),
    #[error("sample grid and values differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("sample grid must be strictly increasing")]
    NotIncreasing,
}

impl FunctionSpec {
    pub fn zero() -> Self {
        FunctionSpec::Poly(Vec::new())
    }

    pub fn samples(grid: Vec<f64>, values: Vec<C64>) -> Result<Self, FunctionError> {
        Spline::new(grid, values).map(FunctionSpec::Samples)
    }

    pub fn is_zero(&self) -> bool {
        let z = |c: &C64| *c == C64::new(0.0, 0.0);
        match self {
            FunctionSpec::Poly(c) => c.iter().all(z),
            FunctionSpec::Trig(t) => t.iter().all(|t| z(&t.cos) && (z(&t.sin) || t.freq == 0.0)),
            FunctionSpec::Exp(t) => t.iter().all(|t| z(&t.coef)),
            FunctionSpec::Samples(s) => s.values.iter().all(z),
        }
    }

    pub fn eval(&self, y: f64) -> C64 {
        self.derivative(0, y)
    }

    /// `k`-th derivative at `y`.
    pub fn derivative(&self, k: usize, y: f64) -> C64 {
        match self {
            FunctionSpec::Poly(c) => {
                let mut acc = C64::new(0.0, 0.0);
                for (deg, coef) in c.iter().enumerate().rev() {
                    if deg < k {
                        break;
                    }
                    let falling: f64 = (deg + 1 - k..=deg).map(|m| m as f64).product();
                    acc = acc * y + coef * falling;
                }
                // Horner above runs over the shifted degrees deg - k.
                acc
            }
            FunctionSpec::Trig(terms) => terms
                .iter()
                .map(|t| {
                    let w = t.freq;
                    let phase = w * y + k as f64 * std::f64::consts::FRAC_PI_2;
                    w.powi(k as i32) * (t.cos * phase.cos() + t.sin * phase.sin())
                })
                .sum(),
            FunctionSpec::Exp(terms) => terms
                .iter()
                .map(|t| t.coef * t.rate.powu(k as u32) * (t.rate * y).exp())
                .sum(),
            FunctionSpec::Samples(s) => s.derivative(k, y),
        }
    }

    /// `int_0^len exp(nu y) f(y) dy`, exact for every kind.
    pub fn exp_moment(&self, nu: C64, len: f64) -> C64 {
        match self {
            FunctionSpec::Poly(c) => {
                if c.is_empty() {
                    return C64::new(0.0, 0.0);
                }
                let m = exp_moments(nu * len, c.len() - 1);
                let mut lp = len;
                let mut sum = C64::new(0.0, 0.0);
                for (k, coef) in c.iter().enumerate() {
                    sum += coef * lp * m[k];
                    lp *= len;
                }
                sum
            }
            FunctionSpec::Trig(terms) => {
                let i = C64::i();
                let mut sum = C64::new(0.0, 0.0);
                for t in terms {
                    let up = len * exp_moments((nu + i * t.freq) * len, 0)[0];
                    let down = len * exp_moments((nu - i * t.freq) * len, 0)[0];
                    sum += t.cos * (up + down) * 0.5 + t.sin * (up - down) / (2.0 * i);
                }
                sum
            }
            FunctionSpec::Exp(terms) => terms
                .iter()
                .map(|t| t.coef * len * exp_moments((nu + t.rate) * len, 0)[0])
                .sum(),
            FunctionSpec::Samples(s) => s.exp_moment(nu, len),
        }
    }

    /// `y -> f(len - y)`.
    pub fn reflected(&self, len: f64) -> FunctionSpec {
        match self {
            FunctionSpec::Poly(c) => {
                let mut out = vec![C64::new(0.0, 0.0); c.len()];
                for (k, coef) in c.iter().enumerate() {
                    // (len - y)^k by the binomial theorem.
                    let mut binom = 1.0;
                    for m in 0..=k {
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        out[m] += coef * binom * sign * len.powi((k - m) as i32);
                        binom = binom * (k - m) as f64 / (m + 1) as f64;
                    }
                }
                FunctionSpec::Poly(out)
            }
            FunctionSpec::Trig(terms) => FunctionSpec::Trig(
                terms
                    .iter()
                    .map(|t| {
                        let (sn, cs) = (t.freq * len).sin_cos();
                        TrigTerm {
                            freq: t.freq,
                            cos: t.cos * cs + t.sin * sn,
                            sin: t.cos * sn - t.sin * cs,
                        }
                    })
                    .collect(),
            ),
            FunctionSpec::Exp(terms) => FunctionSpec::Exp(
                terms
                    .iter()
                    .map(|t| ExpTerm {
                        coef: t.coef * (t.rate * len).exp(),
                        rate: -t.rate,
                    })
                    .collect(),
            ),
            FunctionSpec::Samples(s) => {
                let grid = s.grid.iter().rev().map(|g| len - g).collect();
                let values = s.values.iter().rev().copied().collect();
                FunctionSpec::Samples(
                    Spline::new(grid, values).expect("reflection keeps a valid grid"),
                )
            }
        }
    }

    /// `exp(-nu len) int_0^len exp(nu y) f(y) dy`, evaluated without
    /// overflow when `Re nu` is large and positive.
    pub fn damped_moment(&self, nu: C64, len: f64) -> C64 {
        if nu.re <= 0.0 {
            (-nu * len).exp() * self.exp_moment(nu, len)
        } else {
            self.reflected(len).exp_moment(-nu, len)
        }
    }
}

/// Clamped cubic spline. End slopes come from the derivative of the quartic
/// through the five samples nearest each end.
#[derive(Clone, Debug, PartialEq)]
pub struct Spline {
    grid: Vec<f64>,
    values: Vec<C64>,
    /// Per interval `[a, b, c, d]` in the local variable `y - grid[i]`.
    pieces: Vec<[C64; 4]>,
}

impl Spline {
    pub fn new(grid: Vec<f64>, values: Vec<C64>) -> Result<Self, FunctionError> {
        if grid.len() != values.len() {
            return Err(FunctionError::LengthMismatch(grid.len(), values.len()));
        }
        if grid.len() < 5 {
            return Err(FunctionError::TooFewSamples(grid.len()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FunctionError::NotIncreasing);
        }
        let n = grid.len() - 1;
        let slope0 = lagrange_slope(&grid[..5], &values[..5], grid[0]);
        let slope1 = lagrange_slope(&grid[n - 4..], &values[n - 4..], grid[n]);
        let h: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
        let dy: Vec<C64> = (0..n).map(|i| (values[i + 1] - values[i]) / h[i]).collect();
        let zero = C64::new(0.0, 0.0);
        let mut lower = vec![zero; n + 1];
        let mut diag = vec![zero; n + 1];
        let mut upper = vec![zero; n + 1];
        let mut rhs = vec![zero; n + 1];
        diag[0] = C64::new(2.0 * h[0], 0.0);
        upper[0] = C64::new(h[0], 0.0);
        rhs[0] = 6.0 * (dy[0] - slope0);
        for i in 1..n {
            lower[i] = C64::new(h[i - 1], 0.0);
            diag[i] = C64::new(2.0 * (h[i - 1] + h[i]), 0.0);
            upper[i] = C64::new(h[i], 0.0);
            rhs[i] = 6.0 * (dy[i] - dy[i - 1]);
        }
        lower[n] = C64::new(h[n - 1], 0.0);
        diag[n] = C64::new(2.0 * h[n - 1], 0.0);
        rhs[n] = 6.0 * (slope1 - dy[n - 1]);
        let m = crate::numeric::solve_tridiagonal(&lower, &diag, &upper, &rhs);
        let pieces = (0..n)
            .map(|i| {
                [
                    values[i],
                    dy[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0,
                    m[i] / 2.0,
                    (m[i + 1] - m[i]) / (6.0 * h[i]),
                ]
            })
            .collect();
        Ok(Spline {
            grid,
            values,
            pieces,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    fn locate(&self, y: f64) -> usize {
        let n = self.pieces.len();
        match self.grid.partition_point(|g| *g <= y) {
            0 => 0,
            p => (p - 1).min(n - 1),
        }
    }

    pub fn derivative(&self, k: usize, y: f64) -> C64 {
        let i = self.locate(y);
        let s = y - self.grid[i];
        let [a, b, c, d] = self.pieces[i];
        match k {
            0 => a + s * (b + s * (c + s * d)),
            1 => b + s * (2.0 * c + 3.0 * s * d),
            2 => 2.0 * c + 6.0 * s * d,
            3 => 6.0 * d,
            _ => C64::new(0.0, 0.0),
        }
    }

    /// `int_0^len exp(nu y) s(y) dy`; outside the grid the end pieces are
    /// extended as polynomials.
    pub fn exp_moment(&self, nu: C64, len: f64) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        let n = self.pieces.len();
        for i in 0..n {
            let start = if i == 0 { 0.0 } else { self.grid[i].max(0.0) };
            let end = if i + 1 == n {
                len
            } else {
                self.grid[i + 1].min(len)
            };
            if end <= start {
                continue;
            }
            sum += piece_moment(&self.pieces[i], self.grid[i], start, end, nu);
        }
        sum
    }
}

/// `int_start^end exp(nu y) p(y - origin) dy` for a cubic `p`.
fn piece_moment(p: &[C64; 4], origin: f64, start: f64, end: f64, nu: C64) -> C64 {
    let w = end - start;
    let shift = start - origin;
    // Re-expand p around `start`: p(shift + u).
    let q = [
        p[0] + shift * (p[1] + shift * (p[2] + shift * p[3])),
        p[1] + shift * (2.0 * p[2] + 3.0 * shift * p[3]),
        p[2] + 3.0 * shift * p[3],
        p[3],
    ];
    let m = exp_moments(nu * w, 3);
    let mut wp = w;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..4 {
        acc += q[k] * wp * m[k];
        wp *= w;
    }
    (nu * start).exp() * acc
}

/// Derivative at `at` of the interpolating polynomial through the points.
fn lagrange_slope(xs: &[f64], ys: &[C64], at: f64) -> C64 {
    let m = xs.len();
    let mut total = C64::new(0.0, 0.0);
    for j in 0..m {
        let denom: f64 = (0..m).filter(|&k| k != j).map(|k| xs[j] - xs[k]).product();
        let mut numer = 0.0;
        for l in 0..m {
            if l == j {
                continue;
            }
            numer += (0..m)
                .filter(|&k| k != j && k != l)
                .map(|k| at - xs[k])
                .product::<f64>();
        }
        total += ys[j] * (numer / denom);
    }
    total
}
