//! Solution values from the transforms of the data.
//!
//! Both representations work with the boundary-value combinations
//! `Z+ = sum_{J+} zeta / Delta` and `Z- = sum_{J-} zeta / Delta`. The time
//! transforms of the boundary data are taken over `[0, t]` instead of
//! `[0, T]`; the difference is analytic in the sectors where it is dropped.
//! The data part is folded back in as an entire term, so the remaining pole
//! structure is that of `1 / Delta` alone.
//!
//! The series sums `i res(e Z)` over every zero, with the real zeros
//! counted on the upper side, plus a small circle around the origin when
//! the determinant vanishes there. The integral deforms each component of
//! `D` outward into the decaying sectors and collects the residues it
//! passes over.

mod contour;
mod identities;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::charmat::{cramer_system, CharError, CramerSystem};
use crate::exppoly::{omega_pow, AtomEvaluator, DataAtom, ExpPolynomial};
use crate::ibvp::{FunctionSpec, ProblemSpec, Side, ValidatedProblem};
use crate::spectrum::{
    find_zeros_of, with_thread_cap, ExpSum, Spectrum, SpectrumError, Zero, ZeroClass,
};
use crate::wellposed::{duality_verdict, Status, WellPosedError, TOL_MARGIN};
use crate::C64;

pub use contour::{ContourPlan, PlannedSector};
pub use identities::{
    circle_residue, data_identity_residual, entire_defect, global_relation_residual, BoundaryTraces,
};

/// Target accuracy for truncated sums and contour tails.
pub const TOL_SOLVE: f64 = 1e-8;

/// Nodes of the trapezoid rule on circles.
pub const CIRCLE_NODES: usize = 128;
/// Trapezoid nodes around a repeated zero.
pub const CLUSTER_NODES: usize = 64;

/// Largest radius to which zeros are searched for a solve.
pub const MAX_RADIUS: f64 = 120.0;

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    WellPosed(#[from] WellPosedError),
    #[error("the {which} is {status:?}; the series needs the problem and its reversal well-posed, use the integral form")]
    SeriesRefused { which: &'static str, status: Status },
    #[error("zeros approach a direction without time decay; use the integral form")]
    RaysOutsideDecay,
    #[error("the problem is {0:?}; no solution representation applies")]
    NotWellPosed(Status),
    #[error("determinant derivative {0:e} at a zero is too small to divide by")]
    IllConditioned(f64),
    #[error("residue at {re}{im:+}i lost to cancellation (rounding bound {bound:.1e})")]
    Cancellation { re: f64, im: f64, bound: f64 },
    #[error("evaluation overflowed at x={x}, t={t}")]
    NotFinite { x: f64, t: f64 },
    #[error("time {0} outside (0, T]")]
    Time(f64),
    #[error("position {0} outside [0, 1]")]
    Position(f64),
    #[error("the final-time transform is needed but was not supplied")]
    MissingFinalTime,
}

/// Which endpoint's combination a residue or contour uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Half {
    Plus,
    Minus,
}

impl Half {
    fn index(self) -> usize {
        self as usize
    }

    /// Offset in `exp(i rho (x - shift))`.
    fn shift(self) -> f64 {
        match self {
            Half::Plus => 0.0,
            Half::Minus => 1.0,
        }
    }
}

/// Which data a contribution comes from. The transform identities hold
/// for the initial-datum and boundary-datum parts separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Initial,
    Boundary,
    All,
}

/// A value with an estimate of its truncation error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
}

impl Estimate {
    fn finite(self, x: f64, t: f64) -> Result<Estimate, SolveError> {
        if self.value.is_finite() && !self.error.is_nan() {
            Ok(self)
        } else {
            Err(SolveError::NotFinite { x, t })
        }
    }
}

/// Numeric transforms of a final-time profile.
pub type Transform = Box<dyn Fn(C64) -> C64 + Send + Sync>;

/// Over which time window the boundary data are transformed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    /// `int_0^T exp(a rho^n s) h(s) ds`.
    Final,
    /// `exp(-a rho^n t) int_0^t exp(a rho^n s) h(s) ds`.
    Damped(f64),
}

pub struct DataEvaluator {
    n: usize,
    direction: C64,
    final_time: f64,
    initial: FunctionSpec,
    data: Vec<FunctionSpec>,
    final_profile: Option<Transform>,
}

impl DataEvaluator {
    pub fn new(spec: &ProblemSpec) -> Self {
        DataEvaluator {
            n: spec.order,
            direction: spec.direction,
            final_time: spec.final_time,
            initial: spec.initial.clone(),
            data: spec.data.clone(),
            final_profile: None,
        }
    }

    pub fn with_final_transform(mut self, f: Transform) -> Self {
        self.final_profile = Some(f);
        self
    }

    pub fn with_final_profile(self, profile: FunctionSpec) -> Self {
        self.with_final_transform(Box::new(move |rho| {
            profile.exp_moment(-C64::i() * rho, 1.0)
        }))
    }

    pub fn has_final_transform(&self) -> bool {
        self.final_profile.is_some()
    }

    /// `a rho^n` by repeated multiplication.
    pub fn lambda(&self, rho: C64) -> C64 {
        (0..self.n).fold(self.direction, |acc, _| acc * rho)
    }

    pub fn transform_q0(&self, rho: C64) -> C64 {
        self.initial.exp_moment(-C64::i() * rho, 1.0)
    }

    /// Time transform of the `j`-th datum, 1-based.
    pub fn transform_h(&self, j: usize, rho: C64) -> C64 {
        self.data[j - 1].exp_moment(self.lambda(rho), self.final_time)
    }

    pub fn transform_qt(&self, rho: C64) -> Option<C64> {
        self.final_profile.as_ref().map(|f| f(rho))
    }

    /// Every atom value at one point.
    pub fn at(&self, rho: C64, horizon: Horizon) -> PointData {
        let lam = self.lambda(rho);
        let rotated = |z: usize| omega_pow(self.n, z as i64) * rho;
        let h = self
            .data
            .iter()
            .map(|d| match horizon {
                Horizon::Final => d.exp_moment(lam, self.final_time),
                Horizon::Damped(t) => d.damped_moment(lam, t),
            })
            .collect();
        PointData {
            q0: (0..self.n).map(|z| self.transform_q0(rotated(z))).collect(),
            qt: (0..self.n).map(|z| self.transform_qt(rotated(z))).collect(),
            h,
        }
    }
}

/// Atom values at a fixed point. A final-time atom without a supplied
/// transform evaluates to NaN so that it cannot pass unnoticed.
pub struct PointData {
    q0: Vec<C64>,
    qt: Vec<Option<C64>>,
    h: Vec<C64>,
}

impl AtomEvaluator for PointData {
    fn atom(&self, atom: DataAtom, _rho: C64) -> C64 {
        match atom {
            DataAtom::None => C64::new(1.0, 0.0),
            DataAtom::Q0(z) => self.q0[z],
            DataAtom::QT(z) => self.qt[z].unwrap_or(C64::new(f64::NAN, f64::NAN)),
            DataAtom::H(j) => self.h[j - 1],
        }
    }
}

/// The combination of boundary-data transforms that the determinant
/// multiplies: `data(x=0) - exp(-i rho) data(x=1)`.
pub fn h_of_rho(cs: &CramerSystem, de: &DataEvaluator, rho: C64) -> C64 {
    if cs.homogeneous {
        return C64::new(0.0, 0.0);
    }
    let pd = de.at(rho, Horizon::Final);
    let left = cs
        .data_part(Side::Left)
        .evaluate(rho, Some(&pd))
        .expect("evaluator supplied");
    let right = cs
        .data_part(Side::Right)
        .evaluate(rho, Some(&pd))
        .expect("evaluator supplied");
    left - (-C64::i() * rho).exp() * right
}

/// `sum zeta - data_part` for one side, split by the kind of atom.
#[derive(Clone, Debug)]
struct SideParts {
    initial: ExpPolynomial,
    data: ExpPolynomial,
    known: ExpPolynomial,
}

impl SideParts {
    fn new(cs: &CramerSystem, side: Side) -> Self {
        let sum = cs.zeta_sum(side);
        let known = cs.data_part(side);
        let initial = sum.map_atoms(|a| matches!(a, DataAtom::Q0(_)).then_some(a));
        let data = &sum.map_atoms(|a| matches!(a, DataAtom::H(_)).then_some(a)) - &known;
        SideParts {
            initial,
            data,
            known,
        }
    }
}

/// Per-zero quantities that do not depend on `(x, t)`.
#[derive(Clone, Debug)]
struct ZeroData {
    zero: Zero,
    dprime: C64,
    initial: [C64; 2],
    /// Term moduli behind `initial`.
    initial_scale: [f64; 2],
}

/// Everything needed to evaluate the solution of one problem.
pub struct Solver {
    problem: ValidatedProblem,
    cs: CramerSystem,
    data: DataEvaluator,
    delta: ExpSum,
    sides: [SideParts; 2],
    forward: Status,
    backward: Status,
    spectrum: Spectrum,
    zeros: Vec<ZeroData>,
    inner_radius: f64,
}

/// Radius beyond which the time factor of a residue drops below `1e-19`
/// for every zero off the imaginary directions.
pub fn series_radius(n: usize, a: C64, t: f64) -> f64 {
    let decay = (45.0 / (a.norm() * t)).powf(1.0 / n as f64);
    (12.0 * n as f64).max(1.2 * decay).min(MAX_RADIUS)
}

impl Solver {
    /// Prepares a solver whose zero search covers every time down to
    /// `t_min`.
    pub fn new(problem: &ValidatedProblem, t_min: f64) -> Result<Self, SolveError> {
        let spec = problem.spec();
        if !(t_min > 0.0 && t_min <= spec.final_time) {
            return Err(SolveError::Time(t_min));
        }
        let cs = cramer_system(problem)?;
        let (fwd, back) = duality_verdict(problem, TOL_MARGIN)?;
        let delta = ExpSum::new(&cs.delta)?;
        let n = problem.order();
        let a = problem.direction();
        let radius = series_radius(n, a, t_min)
            .max(ContourPlan::decay_radius(n, a, t_min) * 1.3)
            .min(MAX_RADIUS);
        let spectrum = with_thread_cap(|| find_zeros_of(&delta, radius))?;
        let data = DataEvaluator::new(spec);
        let sides = [
            SideParts::new(&cs, Side::Left),
            SideParts::new(&cs, Side::Right),
        ];
        let zeros = spectrum
            .zeros
            .iter()
            .map(|z| {
                let sigma = z.value();
                let pd = data.at(sigma, Horizon::Damped(0.0));
                let initial = [0, 1].map(|s| {
                    sides[s]
                        .initial
                        .evaluate(sigma, Some(&pd))
                        .expect("evaluator supplied")
                });
                let initial_scale = [0, 1].map(|s| {
                    sides[s]
                        .initial
                        .magnitude(sigma, Some(&pd))
                        .expect("evaluator supplied")
                });
                ZeroData {
                    zero: *z,
                    dprime: delta.eval_with_derivative(sigma).1,
                    initial,
                    initial_scale,
                }
            })
            .collect::<Vec<_>>();
        let closest = zeros
            .iter()
            .map(|z| z.zero.value().norm())
            .fold(f64::INFINITY, f64::min);
        Ok(Solver {
            problem: problem.clone(),
            cs,
            data,
            delta,
            sides,
            forward: fwd.status,
            backward: back.status,
            spectrum,
            zeros,
            inner_radius: (0.4 * closest).min(0.5),
        })
    }

    /// Supplies the transform of the solution at the final time, used by
    /// the identity checks.
    pub fn with_final_transform(mut self, f: Transform) -> Self {
        self.data = self.data.with_final_transform(f);
        self
    }

    pub fn problem(&self) -> &ValidatedProblem {
        &self.problem
    }

    pub fn cramer(&self) -> &CramerSystem {
        &self.cs
    }

    pub fn data(&self) -> &DataEvaluator {
        &self.data
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn statuses(&self) -> (Status, Status) {
        (self.forward, self.backward)
    }

    pub fn determinant(&self) -> &ExpSum {
        &self.delta
    }

    /// For a purely imaginary direction the reversed problem decides
    /// whether the contours over the growing sectors vanish.
    fn needs_dual(&self) -> bool {
        self.problem.direction().re.abs() < 1e-12
    }

    /// Otherwise every residue must carry a decaying time factor, which
    /// holds when the zeros run off along rays strictly inside `E`.
    fn rays_decay(&self) -> bool {
        let n = self.problem.order() as f64;
        let a = self.problem.direction();
        self.spectrum
            .rays
            .iter()
            .all(|r| (a * C64::from_polar(1.0, n * r.angle)).re > 1e-9)
    }

    fn check_point(&self, x: f64, t: f64) -> Result<(), SolveError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(SolveError::Position(x));
        }
        if !(t > 0.0 && t <= self.problem.spec().final_time) {
            return Err(SolveError::Time(t));
        }
        Ok(())
    }

    /// `(i rho)^j exp(i rho (x - shift) - a rho^n t) Z(rho)` for one half,
    /// restricted to the chosen part of the data.
    pub fn integrand(&self, part: Part, half: Half, rho: C64, x: f64, t: f64, deriv: usize) -> C64 {
        let sp = &self.sides[half.index()];
        let pd = self.data.at(rho, Horizon::Damped(t));
        let mut num = C64::new(0.0, 0.0);
        let mut entire = C64::new(0.0, 0.0);
        if part != Part::Boundary {
            let lam = self.data.lambda(rho);
            num += (-lam * t).exp()
                * sp.initial
                    .evaluate(rho, Some(&pd))
                    .expect("evaluator supplied");
        }
        if part != Part::Initial && !self.cs.homogeneous {
            num += sp
                .data
                .evaluate(rho, Some(&pd))
                .expect("evaluator supplied");
            entire = sp
                .known
                .evaluate(rho, Some(&pd))
                .expect("evaluator supplied");
        }
        let value = num / self.delta.eval(rho) + entire;
        let osc = (C64::i() * rho * (x - half.shift())).exp();
        (C64::i() * rho).powu(deriv as u32) * osc * value
    }

    /// Residue of [`Solver::integrand`] at the `k`-th zero.
    pub fn residue_at(
        &self,
        k: usize,
        part: Part,
        half: Half,
        x: f64,
        t: f64,
        deriv: usize,
    ) -> Result<C64, SolveError> {
        let zd = &self.zeros[k];
        if zd.zero.mult > 1 {
            return self.cluster_residue(k, part, half, x, t, deriv);
        }
        if zd.dprime.norm() < 1e-12 {
            return Err(SolveError::IllConditioned(zd.dprime.norm()));
        }
        let sigma = zd.zero.value();
        let osc = (C64::i() * sigma * (x - half.shift())).exp();
        let mut num = C64::new(0.0, 0.0);
        if part != Part::Boundary {
            // Inside the growth sectors the time factor is huge and the
            // numerator is small only through cancellation among its terms.
            let growth = -self.data.lambda(sigma) * t;
            let rounding = (growth.re + (f64::EPSILON * zd.initial_scale[half.index()]).ln()).exp()
                * osc.norm()
                * sigma.norm().powi(deriv as i32)
                / zd.dprime.norm();
            if !(rounding <= TOL_SOLVE) {
                return Err(SolveError::Cancellation {
                    re: sigma.re,
                    im: sigma.im,
                    bound: rounding,
                });
            }
            num += growth.exp() * zd.initial[half.index()];
        }
        if part != Part::Initial && !self.cs.homogeneous {
            let pd = self.data.at(sigma, Horizon::Damped(t));
            num += self.sides[half.index()]
                .data
                .evaluate(sigma, Some(&pd))
                .expect("evaluator supplied");
        }
        Ok((C64::i() * sigma).powu(deriv as u32) * osc * num / zd.dprime)
    }

    /// Residue at a repeated zero by the trapezoid rule on a circle that
    /// keeps clear of every other zero and of the origin. The circle also
    /// shrinks until the time factor varies by at most `e^4` around it,
    /// since the numerator cancels against that factor.
    fn cluster_residue(
        &self,
        k: usize,
        part: Part,
        half: Half,
        x: f64,
        t: f64,
        deriv: usize,
    ) -> Result<C64, SolveError> {
        let sigma = self.zeros[k].zero.value();
        let gap = self
            .zeros
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, z)| (z.zero.value() - sigma).norm())
            .fold(sigma.norm(), f64::min);
        let n = self.problem.order();
        let slope =
            n as f64 * self.problem.direction().norm() * sigma.norm().powi(n as i32 - 1) * t;
        let radius = (0.3 * gap).min(0.5).min(2.0 / slope.max(1e-300));
        let f = |rho: C64| self.integrand(part, half, rho, x, t, deriv);
        let value = circle_residue(f, sigma, radius, CLUSTER_NODES);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(SolveError::Cancellation {
                re: sigma.re,
                im: sigma.im,
                bound: f64::INFINITY,
            })
        }
    }

    /// `(1/2pi) oint` of the upper integrand over a small circle around
    /// the origin, anticlockwise.
    fn origin_term(&self, x: f64, t: f64, deriv: usize) -> C64 {
        if self.spectrum.origin_order == 0 {
            return C64::new(0.0, 0.0);
        }
        let m = CIRCLE_NODES;
        let sum: C64 = (0..m)
            .map(|k| {
                let rho =
                    C64::from_polar(self.inner_radius, 2.0 * PI * (k as f64 + 0.5) / m as f64);
                self.integrand(Part::Initial, Half::Plus, rho, x, t, deriv) * rho
            })
            .sum();
        C64::i() * sum / m as f64
    }

    /// `x`-derivative of order `deriv` of the solution as a residue series.
    ///
    /// Residues of the boundary-data part carry no time decay and fall off
    /// only algebraically, so that part is taken from the contour form.
    pub fn series(&self, x: f64, t: f64, deriv: usize) -> Result<Estimate, SolveError> {
        self.check_point(x, t)?;
        if self.forward != Status::WellPosed {
            return Err(SolveError::SeriesRefused {
                which: "problem",
                status: self.forward,
            });
        }
        if self.needs_dual() && self.backward != Status::WellPosed {
            return Err(SolveError::SeriesRefused {
                which: "reversed problem",
                status: self.backward,
            });
        }
        if !self.needs_dual() && !self.rays_decay() {
            return Err(SolveError::RaysOutsideDecay);
        }
        let radius = series_radius(self.problem.order(), self.problem.direction(), t)
            .min(self.spectrum.search_radius);
        let mut total = self.origin_term(x, t, deriv);
        let mut tail = 0.0;
        for (k, zd) in self.zeros.iter().enumerate() {
            let r = zd.zero.value().norm();
            if r > radius {
                continue;
            }
            let half = if zd.zero.class == ZeroClass::Minus {
                Half::Minus
            } else {
                Half::Plus
            };
            let term = C64::i() * self.residue_at(k, Part::Initial, half, x, t, deriv)?;
            total += term;
            if r >= 0.8 * radius {
                tail += term.norm();
            }
        }
        if !self.cs.homogeneous {
            let boundary = ContourPlan::new(self, t).evaluate(self, x, deriv, Part::Boundary)?;
            total += boundary.value;
            tail += boundary.error;
        }
        Estimate {
            value: total,
            error: tail,
        }
        .finite(x, t)
    }

    /// `x`-derivative of order `deriv` of the solution as contour integrals.
    pub fn integral(&self, x: f64, t: f64, deriv: usize) -> Result<Estimate, SolveError> {
        self.check_point(x, t)?;
        if self.forward != Status::WellPosed {
            return Err(SolveError::NotWellPosed(self.forward));
        }
        let plan = ContourPlan::new(self, t);
        plan.evaluate(self, x, deriv, Part::All)?.finite(x, t)
    }

    pub fn solve(&self, rep: Representation, x: f64, t: f64) -> Result<Estimate, SolveError> {
        match rep {
            Representation::Series => self.series(x, t, 0),
            Representation::Integral => self.integral(x, t, 0),
        }
    }

    /// `(f_j(t), g_j(t))`: the `j`-th derivative at both ends, from the
    /// integral form.
    pub fn recover_boundary_functions(&self, j: usize, t: f64) -> Result<(C64, C64), SolveError> {
        let plan = ContourPlan::new(self, t);
        if self.forward != Status::WellPosed {
            return Err(SolveError::NotWellPosed(self.forward));
        }
        Ok((
            plan.evaluate(self, 0.0, j, Part::All)?.value,
            plan.evaluate(self, 1.0, j, Part::All)?.value,
        ))
    }

    /// Solution on the tensor grid, rows ordered by `t` then `x`.
    pub fn grid(&self, rep: Representation, xs: &[f64], ts: &[f64]) -> Vec<GridRow> {
        let points: Vec<(f64, f64)> = ts
            .iter()
            .flat_map(|&t| xs.iter().map(move |&x| (x, t)))
            .collect();
        with_thread_cap(|| {
            points
                .par_iter()
                .map(|&(x, t)| GridRow {
                    x,
                    t,
                    result: self.solve(rep, x, t).map_err(|e| e.to_string()),
                })
                .collect()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Series,
    Integral,
}

#[derive(Debug)]
pub struct GridRow {
    pub x: f64,
    pub t: f64,
    pub result: Result<Estimate, String>,
}

pub fn solve_series(p: &ValidatedProblem, x: f64, t: f64) -> Result<Estimate, SolveError> {
    Solver::new(p, t)?.series(x, t, 0)
}

pub fn solve_integral(p: &ValidatedProblem, x: f64, t: f64) -> Result<Estimate, SolveError> {
    Solver::new(p, t)?.integral(x, t, 0)
}

#[cfg(test)]
mod tests;
