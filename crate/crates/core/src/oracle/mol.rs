//! Crank-Nicolson method of lines for `q_t = a q_xx` with general boundary
//! rows.
//!
//! Interior nodes use the three-point Laplacian. Each time level writes the
//! interior values as `v + u_0 w_left + u_N w_right`, where the three vectors
//! come from tridiagonal solves. The boundary rows then reduce to a 2x2
//! system for the end values. First derivatives in the boundary rows use
//! second-order one-sided differences.

use crate::ibvp::{column_of, FunctionSpec, ProblemSpec, Side};
use crate::numeric::{solve_dense, solve_tridiagonal};
use crate::solution::{BoundaryTraces, Transform};
use crate::C64;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MolError {
    #[error("the finite-difference reference handles second order only, got order {0}")]
    Order(usize),
    #[error("direction {0} is not parabolic (needs Re a > 0)")]
    NotParabolic(C64),
    #[error("grid needs at least 8 cells and 1 step")]
    Grid,
    #[error("boundary rows are singular on this grid")]
    Singular,
    #[error("sample time {0} outside (0, horizon]")]
    SampleTime(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct MolConfig {
    pub cells: usize,
    pub steps: usize,
    /// Final time of the run; the problem's `T` when `None`.
    pub horizon: Option<f64>,
}

impl Default for MolConfig {
    fn default() -> Self {
        MolConfig {
            cells: 2048,
            steps: 2048,
            horizon: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MolSolution {
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    /// Profiles at the requested sample times.
    pub snapshots: Vec<(f64, Vec<C64>)>,
    /// `q, q_x` at `x = 0` then at `x = 1`, one entry per time level.
    traces: [Vec<C64>; 4],
    pub final_profile: Vec<C64>,
}

/// `q_x` at the left end from five nodes, fourth order.
fn left_slope(u: &[C64], h: f64) -> C64 {
    (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / (12.0 * h)
}

fn right_slope(u: &[C64], h: f64) -> C64 {
    let m = u.len() - 1;
    (25.0 * u[m] - 48.0 * u[m - 1] + 36.0 * u[m - 2] - 16.0 * u[m - 3] + 3.0 * u[m - 4])
        / (12.0 * h)
}

/// Interior system for one step size.
struct Stepper {
    r: C64,
    lower: Vec<C64>,
    diag: Vec<C64>,
    upper: Vec<C64>,
    w_left: Vec<C64>,
    w_right: Vec<C64>,
}

impl Stepper {
    fn new(a: C64, dt: f64, h: f64, interior: usize) -> Stepper {
        let r = a * dt / (2.0 * h * h);
        let one = C64::new(1.0, 0.0);
        let lower = vec![-r; interior];
        let diag = vec![one + 2.0 * r; interior];
        let upper = vec![-r; interior];
        let mut e = vec![C64::new(0.0, 0.0); interior];
        e[0] = r;
        let w_left = solve_tridiagonal(&lower, &diag, &upper, &e);
        e[0] = C64::new(0.0, 0.0);
        e[interior - 1] = r;
        let w_right = solve_tridiagonal(&lower, &diag, &upper, &e);
        Stepper {
            r,
            lower,
            diag,
            upper,
            w_left,
            w_right,
        }
    }
}

/// Coefficients of a boundary trace on `(u_0, u_1, u_2)` or the mirrored
/// nodes at the right end.
fn trace_stencil(order: usize, h: f64) -> [f64; 3] {
    match order {
        0 => [1.0, 0.0, 0.0],
        _ => [-1.5 / h, 2.0 / h, -0.5 / h],
    }
}

pub fn mol_solve(
    spec: &ProblemSpec,
    config: MolConfig,
    sample_times: &[f64],
) -> Result<MolSolution, MolError> {
    if spec.order != 2 {
        return Err(MolError::Order(spec.order));
    }
    let a = spec.direction;
    if a.re <= 0.0 {
        return Err(MolError::NotParabolic(a));
    }
    let cells = config.cells;
    if cells < 8 || config.steps == 0 {
        return Err(MolError::Grid);
    }
    let horizon = config.horizon.unwrap_or(spec.final_time);
    for &t in sample_times {
        if !(t > 0.0 && t <= horizon + 1e-12) {
            return Err(MolError::SampleTime(t));
        }
    }
    let h = 1.0 / cells as f64;
    let x: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();

    // Uniform levels with the sample times merged in.
    let mut times: Vec<f64> = (0..=config.steps)
        .map(|m| horizon * m as f64 / config.steps as f64)
        .collect();
    times.extend_from_slice(sample_times);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|p, q| (*p - *q).abs() < 1e-12);

    let mut u: Vec<C64> = x.iter().map(|&y| spec.initial.eval(y)).collect();
    let mut traces: [Vec<C64>; 4] = Default::default();
    let record = |u: &[C64], traces: &mut [Vec<C64>; 4]| {
        traces[0].push(u[0]);
        traces[1].push(left_slope(u, h));
        traces[2].push(u[cells]);
        traces[3].push(right_slope(u, h));
    };
    record(&u, &mut traces);
    let mut snapshots = Vec::new();
    let interior = cells - 1;
    let mut stepper: Option<(f64, Stepper)> = None;

    for w in times.windows(2) {
        let dt = w[1] - w[0];
        if stepper.as_ref().is_none_or(|(d, _)| (d - dt).abs() > 1e-15) {
            stepper = Some((dt, Stepper::new(a, dt, h, interior)));
        }
        let st = &stepper.as_ref().expect("built above").1;
        let r = st.r;
        let rhs: Vec<C64> = (1..cells)
            .map(|i| r * u[i - 1] + (1.0 - 2.0 * r) * u[i] + r * u[i + 1])
            .collect();
        let v = solve_tridiagonal(&st.lower, &st.diag, &st.upper, &rhs);

        // Boundary rows in the unknowns (u_0, u_N).
        let t_new = w[1];
        let node = |i: usize| -> (C64, C64, C64) {
            match i {
                0 => (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
                i if i == cells => (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
                i => (v[i - 1], st.w_left[i - 1], st.w_right[i - 1]),
            }
        };
        let mut m = vec![vec![C64::new(0.0, 0.0); 2]; 2];
        let mut b = vec![C64::new(0.0, 0.0); 2];
        for k in 0..2 {
            b[k] = spec.data[k].eval(t_new);
            for order in 0..2 {
                for side in [Side::Left, Side::Right] {
                    let coef = spec.boundary[k][column_of(2, side, order)];
                    if coef == 0.0 {
                        continue;
                    }
                    let stencil = trace_stencil(order, h);
                    for (s, weight) in stencil.iter().enumerate() {
                        if *weight == 0.0 {
                            continue;
                        }
                        let (i, sign) = match side {
                            Side::Left => (s, 1.0),
                            Side::Right => (cells - s, -1.0),
                        };
                        let factor = coef * weight * if order == 1 { sign } else { 1.0 };
                        let (fixed, on_left, on_right) = node(i);
                        b[k] -= factor * fixed;
                        m[k][0] += factor * on_left;
                        m[k][1] += factor * on_right;
                    }
                }
            }
        }
        let ends = solve_dense(m, b).ok_or(MolError::Singular)?;
        u[0] = ends[0];
        u[cells] = ends[1];
        for i in 1..cells {
            u[i] = v[i - 1] + ends[0] * st.w_left[i - 1] + ends[1] * st.w_right[i - 1];
        }
        record(&u, &mut traces);
        if sample_times.iter().any(|&s| (s - t_new).abs() < 1e-12) {
            snapshots.push((t_new, u.clone()));
        }
    }

    Ok(MolSolution {
        x,
        times,
        snapshots,
        traces,
        final_profile: u,
    })
}

impl MolSolution {
    /// Cubic interpolation in `x` of the snapshot at time `t`.
    pub fn at(&self, x: f64, t: f64) -> Option<C64> {
        let (_, u) = self.snapshots.iter().find(|(s, _)| (s - t).abs() < 1e-12)?;
        Some(interpolate(&self.x, u, x))
    }

    pub fn traces(&self) -> BoundaryTraces {
        let spline = |v: &Vec<C64>| {
            FunctionSpec::samples(self.times.clone(), v.clone()).expect("time levels increase")
        };
        BoundaryTraces {
            left: vec![spline(&self.traces[0]), spline(&self.traces[1])],
            right: vec![spline(&self.traces[2]), spline(&self.traces[3])],
        }
    }

    /// `rho -> int_0^1 exp(-i rho y) q(y, horizon) dy` from the final
    /// profile.
    pub fn final_transform(&self) -> Transform {
        let profile = FunctionSpec::samples(self.x.clone(), self.final_profile.clone())
            .expect("grid increases");
        Box::new(move |rho| profile.exp_moment(-C64::i() * rho, 1.0))
    }
}

fn interpolate(grid: &[f64], u: &[C64], x: f64) -> C64 {
    let cells = grid.len() - 1;
    let h = grid[1] - grid[0];
    let i = ((x / h).floor() as usize).clamp(1, cells - 2);
    let nodes = [i - 1, i, i + 1, i + 2];
    let mut sum = C64::new(0.0, 0.0);
    for &j in &nodes {
        let mut w = 1.0;
        for &k in &nodes {
            if k != j {
                w *= (x - grid[k]) / (grid[j] - grid[k]);
            }
        }
        sum += w * u[j];
    }
    sum
}
