//! Residual checks of the transform identities.

use std::f64::consts::PI;

use super::{h_of_rho, DataEvaluator, Horizon, SolveError, Solver};
use crate::charmat::{c_poly, CramerSystem};
use crate::ibvp::{FunctionSpec, ProblemSpec, Side};
use crate::C64;

/// `(1/2 pi i) oint f` over a circle, by the trapezoid rule.
pub fn circle_residue(f: impl Fn(C64) -> C64, centre: C64, radius: f64, nodes: usize) -> C64 {
    let sum: C64 = (0..nodes)
        .map(|k| {
            let offset = C64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
            f(centre + offset) * offset
        })
        .sum();
    sum / nodes as f64
}

/// Relative defect of
/// `sum_{J+} zeta - e^{-i rho} sum_{J-} zeta = Delta q0^ + (1 - Delta) H`.
pub fn data_identity_residual(cs: &CramerSystem, de: &DataEvaluator, rho: C64) -> f64 {
    let pd = de.at(rho, Horizon::Final);
    let eval =
        |e: &crate::exppoly::ExpPolynomial| e.evaluate(rho, Some(&pd)).expect("evaluator supplied");
    let delta = eval(&cs.delta);
    let plus = eval(&cs.zeta_sum(Side::Left));
    let minus = (-C64::i() * rho).exp() * eval(&cs.zeta_sum(Side::Right));
    let q0 = de.transform_q0(rho);
    let h = h_of_rho(cs, de, rho);
    let rhs = delta * q0 + (1.0 - delta) * h;
    let scale = 1.0 + plus.norm() + minus.norm() + (delta * q0).norm() + (delta * h).norm();
    (plus - minus - rhs).norm() / scale
}

/// Boundary values `d^j q / dx^j` at `x = 0` and `x = 1` as functions of
/// time on `[0, T]`.
#[derive(Clone, Debug)]
pub struct BoundaryTraces {
    pub left: Vec<FunctionSpec>,
    pub right: Vec<FunctionSpec>,
}

/// Largest defect of the global relation over the sample points.
///
/// Where `Re(a rho^n) > 0` both sides are multiplied by
/// `exp(-a rho^n T)`, so the comparison is always made at the size of the
/// data rather than that of the exponential.
pub fn global_relation_residual(
    spec: &ProblemSpec,
    traces: &BoundaryTraces,
    qt_hat: &dyn Fn(C64) -> C64,
    samples: &[C64],
) -> f64 {
    let n = spec.order;
    let de = DataEvaluator::new(spec);
    let horizon = spec.final_time;
    samples
        .iter()
        .map(|&rho| {
            let lam = de.lambda(rho);
            let shift = (-C64::i() * rho).exp();
            let damped = lam.re > 0.0;
            let moment = |f: &FunctionSpec| {
                if damped {
                    f.damped_moment(lam, horizon)
                } else {
                    f.exp_moment(lam, horizon)
                }
            };
            let lhs: C64 = (0..n)
                .map(|j| {
                    c_poly(n, spec.direction, j).eval(rho)
                        * (moment(&traces.left[j]) - shift * moment(&traces.right[j]))
                })
                .sum();
            let q0 = de.transform_q0(rho);
            let rhs = if damped {
                (-lam * horizon).exp() * q0 - qt_hat(rho)
            } else {
                q0 - (lam * horizon).exp() * qt_hat(rho)
            };
            (lhs - rhs).norm()
        })
        .fold(0.0, f64::max)
}

/// `(1/2 pi i) oint sum_{J+} (zeta - e^{a rho^n T} eta) / Delta` around the
/// `k`-th zero. The sum is entire when the final-time transform is exact,
/// so this vanishes.
pub fn entire_defect(
    solver: &Solver,
    k: usize,
    radius: f64,
    nodes: usize,
) -> Result<C64, SolveError> {
    let de = solver.data();
    if !de.has_final_transform() {
        return Err(SolveError::MissingFinalTime);
    }
    let cs = solver.cramer();
    let zeta = cs.zeta_sum(Side::Left);
    let eta = cs.eta_sum(Side::Left);
    let horizon = solver.problem().spec().final_time;
    let sigma = solver.spectrum().zeros[k].value();
    Ok(circle_residue(
        |rho| {
            let pd = de.at(rho, Horizon::Final);
            let z = zeta.evaluate(rho, Some(&pd)).expect("evaluator supplied");
            let e = eta.evaluate(rho, Some(&pd)).expect("evaluator supplied");
            (z - (de.lambda(rho) * horizon).exp() * e) / solver.determinant().eval(rho)
        },
        sigma,
        radius,
        nodes,
    ))
}
