//! Well-posedness from the growth of the characteristic determinant.
//!
//! In each sector of `D = {Re(a rho^n) < 0}` the exponential
//! `exp(-i rho s_Y)` is largest for the index set of roots `omega^y` lying
//! in the upper half plane after rotation by `arg rho`. The problem is
//! well-posed when the determinant keeps that term and every final-time term
//! of every numerator grows strictly slower.

use std::f64::consts::PI;

use serde::Serialize;

use crate::charmat::{cramer_system, CharError, CramerSystem};
use crate::exppoly::{omega_pow, DataAtom, ExponentClass, ExponentKey, ARC_GRID, S_TOL};
use crate::ibvp::{BcClassification, ProblemSpec, Side, ValidatedProblem};
use crate::C64;

/// Default band around zero within which a growth margin is not trusted.
pub const TOL_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SectorSet {
    pub n: usize,
    /// Components of `D`, anticlockwise from the positive real axis.
    pub d_arcs: Vec<(f64, f64)>,
    /// Components of the interior of the complement.
    pub e_arcs: Vec<(f64, f64)>,
}

pub fn sectors(n: usize, a: C64) -> SectorSet {
    let theta = a.arg();
    let nf = n as f64;
    let arcs = |offset: f64| {
        let mut out: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let start = (offset - theta + 2.0 * PI * k as f64) / nf;
                let start = start.rem_euclid(2.0 * PI);
                let start = if (start - 2.0 * PI).abs() < 1e-12 {
                    0.0
                } else {
                    start
                };
                (start, start + PI / nf)
            })
            .collect();
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    };
    SectorSet {
        n,
        d_arcs: arcs(PI / 2.0),
        e_arcs: arcs(3.0 * PI / 2.0),
    }
}

/// The index set maximising `Im(exp(i phi) s_Y)` over all subsets.
pub fn generic_max_set(n: usize, phi: f64) -> ExponentKey {
    let ys: Vec<usize> = (0..n)
        .filter(|&y| (phi + 2.0 * PI * y as f64 / n as f64).sin() > 1e-12)
        .collect();
    ExponentKey::from_elements(n, &ys)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    WellPosed,
    IllPosed,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct FailingTerm {
    /// 1-based numerator index.
    pub eta: usize,
    #[serde(rename = "Y")]
    pub y: Vec<usize>,
    pub z: usize,
    /// Position inside the final-time transform (0 or 1) at which the
    /// exponent was compared.
    pub x: f64,
    /// Largest excess over the determinant's exponent on the arc.
    pub margin: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorReport {
    pub p: usize,
    pub arc: (f64, f64),
    #[serde(rename = "Ymax")]
    pub ymax: Vec<usize>,
    #[serde(rename = "Zmax_nonzero")]
    pub zmax_nonzero: bool,
    pub status: Status,
    pub failing_term: Option<FailingTerm>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub delta_is_polynomial: bool,
    pub sectors: Vec<SectorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<Box<Verdict>>,
}

fn arc_grid(arc: (f64, f64)) -> impl Iterator<Item = (f64, bool)> {
    (0..=ARC_GRID + 1).map(move |i| {
        let phi = arc.0 + (arc.1 - arc.0) * i as f64 / (ARC_GRID + 1) as f64;
        (phi, i != 0 && i != ARC_GRID + 1)
    })
}

fn degree(c: &ExponentClass) -> usize {
    c.poly.degree().unwrap_or(0)
}

pub fn decay_check(cs: &CramerSystem, ss: &SectorSet, tol_margin: f64) -> Verdict {
    let n = cs.n;
    let delta_classes = cs.delta.classes();
    let delta_is_polynomial = delta_classes.iter().all(|c| c.s.norm() < S_TOL);
    let mut sectors = Vec::with_capacity(ss.d_arcs.len());
    for (p, &arc) in ss.d_arcs.iter().enumerate() {
        let mid = 0.5 * (arc.0 + arc.1);
        let generic = generic_max_set(n, mid);
        let found = delta_classes
            .iter()
            .find(|c| (c.s - generic.s()).norm() < S_TOL);
        let dominant = match (found, delta_is_polynomial) {
            (Some(c), _) => Some(c),
            (None, true) => delta_classes.first(),
            (None, false) => None,
        };
        let mut report = SectorReport {
            p: p + 1,
            arc,
            ymax: generic.elements(),
            zmax_nonzero: found.is_some(),
            status: Status::WellPosed,
            failing_term: None,
        };
        match dominant {
            None => {
                report.status = Status::IllPosed;
                report.failing_term = Some(FailingTerm {
                    eta: 0,
                    y: generic.elements(),
                    z: 0,
                    x: 0.0,
                    margin: 0.0,
                    reason: "vanished coefficient of the dominant exponential".into(),
                });
            }
            Some(dom) => check_numerators(cs, dom, arc, tol_margin, &mut report),
        }
        sectors.push(report);
    }
    let status = if sectors.iter().any(|s| s.status == Status::IllPosed) {
        Status::IllPosed
    } else if sectors.iter().any(|s| s.status == Status::Indeterminate) {
        Status::Indeterminate
    } else {
        Status::WellPosed
    };
    Verdict {
        status,
        delta_is_polynomial,
        sectors,
        dual: None,
    }
}

fn check_numerators(
    cs: &CramerSystem,
    dom: &ExponentClass,
    arc: (f64, f64),
    tol: f64,
    report: &mut SectorReport,
) {
    let n = cs.n;
    for (j, eta) in cs.eta.iter().enumerate() {
        for class in eta.classes() {
            let DataAtom::QT(z) = class.atom else {
                continue;
            };
            for x in [0.0, 1.0] {
                let w = class.s + x * omega_pow(n, z as i64) - dom.s;
                let fail = |margin: f64, reason: &str| FailingTerm {
                    eta: j + 1,
                    y: class.keys[0].elements(),
                    z,
                    x,
                    margin,
                    reason: reason.to_string(),
                };
                if w.norm() < S_TOL {
                    // Same exponential as the determinant: the transform
                    // contributes one inverse power of rho.
                    if degree(&class) > degree(dom) {
                        report.status = Status::IllPosed;
                        report.failing_term =
                            Some(fail(0.0, "equal exponent with higher polynomial degree"));
                        return;
                    }
                    continue;
                }
                let mut interior_max = f64::NEG_INFINITY;
                for (phi, interior) in arc_grid(arc) {
                    let d = (C64::from_polar(1.0, phi) * w).im;
                    if interior {
                        interior_max = interior_max.max(d);
                    }
                }
                if interior_max > tol {
                    report.status = Status::IllPosed;
                    report.failing_term = Some(fail(
                        interior_max,
                        "final-time term outgrows the determinant",
                    ));
                    return;
                }
                if interior_max > -tol && report.status == Status::WellPosed {
                    report.status = Status::Indeterminate;
                    report.failing_term =
                        Some(fail(interior_max, "growth margin within tolerance of zero"));
                }
            }
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WellPosedError {
    #[error("condition applies to non-Robin boundary conditions only")]
    RobinNotApplicable,
    #[error(transparent)]
    Char(#[from] CharError),
}

/// Required count `n/2`, `(n+1)/2` or `(n-1)/2` by order and direction.
pub fn required_count(n: usize, a: C64) -> f64 {
    if n % 2 == 0 {
        n as f64 / 2.0
    } else if a.im > 0.0 {
        (n + 1) as f64 / 2.0
    } else {
        (n - 1) as f64 / 2.0
    }
}

pub fn condition_51(bc: &BcClassification, n: usize, a: C64) -> Result<bool, WellPosedError> {
    if bc.robin {
        return Err(WellPosedError::RobinNotApplicable);
    }
    let m = required_count(n, a);
    let r = bc.right_handed as f64;
    Ok(r <= m && m <= r + bc.coupling as f64)
}

pub fn condition_robin(bc: &BcClassification, n: usize, a: C64) -> bool {
    let m = required_count(n, a);
    (bc.b2 as f64 - bc.b1 as f64) <= m && m <= (bc.b2 + bc.b3) as f64
}

/// Right-end coefficients `beta_{k, n-k}` when every row reads
/// `q^{(j)}(0) + beta q^{(j)}(1)` with a nonzero `beta`.
pub fn pseudo_periodic_coefficients(p: &ProblemSpec) -> Option<Vec<f64>> {
    let n = p.order;
    let mut betas = Vec::with_capacity(n);
    for k in 0..n {
        let j = n - 1 - k;
        for order in 0..n {
            for side in [Side::Left, Side::Right] {
                let v = p.coefficient(k, side, order);
                let expected_nonzero = order == j;
                if expected_nonzero != (v.abs() > 1e-12) {
                    return None;
                }
            }
        }
        betas.push(p.coefficient(k, Side::Right, j));
    }
    Some(betas)
}

/// Closed-form ill-posedness predicate for pseudo-periodic problems of
/// order 2, 3 and 4; `None` outside those families.
pub fn pseudo_periodic_criterion(p: &ProblemSpec) -> Option<bool> {
    let b = pseudo_periodic_coefficients(p)?;
    let scale = b.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let zero = |x: f64, s: f64| x.abs() <= 1e-12 * s;
    match p.order {
        2 => Some(zero(b[0] + b[1], scale)),
        3 if p.direction.im > 0.0 => Some(zero(b[0] + b[1] + b[2], scale)),
        3 => {
            let inv: Vec<f64> = b.iter().map(|x| 1.0 / x).collect();
            let s = inv.iter().map(|x| x.abs()).fold(1.0, f64::max);
            Some(zero(inv[0] + inv[1] + inv[2], s))
        }
        4 => {
            let (b1, b2, b3, b4) = (b[0], b[1], b[2], b[3]);
            let q = b1 * b2 + b2 * b3 + b3 * b4 + b4 * b1 + 2.0 * (b1 * b3 + b2 * b4);
            Some(zero(q, scale * scale))
        }
        _ => None,
    }
}

pub fn verdict_for(p: &ValidatedProblem, tol_margin: f64) -> Result<Verdict, WellPosedError> {
    let cs = cramer_system(p)?;
    Ok(decay_check(
        &cs,
        &sectors(p.order(), p.direction()),
        tol_margin,
    ))
}

/// Verdicts for `a` and `-a`.
pub fn duality_verdict(
    p: &ValidatedProblem,
    tol_margin: f64,
) -> Result<(Verdict, Verdict), WellPosedError> {
    let forward = verdict_for(p, tol_margin)?;
    let backward = verdict_for(&p.reversed(), tol_margin)?;
    Ok((forward, backward))
}
