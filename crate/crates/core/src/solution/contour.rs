//! Contours for the integral form.
//!
//! Each component of `D` is widened by an angle `delta` on both sides so
//! that its boundary rays run where `exp(-a rho^n t)` decays. The rays start
//! on a small circle around the origin, which is crossed clockwise. The
//! real line is replaced by the two rays through the centres of the
//! sectors of `E` nearest `0` and `pi`.

use std::f64::consts::PI;

use serde::Serialize;

use super::{Estimate, Half, Part, SolveError, Solver};
use crate::numeric::gauss_legendre;
use crate::wellposed::sectors;
use crate::C64;

const PANEL_NODES: usize = 16;
/// Consecutive negligible panels after which a ray is cut.
const QUIET_PANELS: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct PlannedSector {
    /// Angle of the outgoing ray.
    pub from: f64,
    /// Angle of the incoming ray.
    pub to: f64,
    pub half: Half,
    /// Zeros enclosed, as indices into the spectrum.
    pub residues: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContourPlan {
    pub t: f64,
    /// Widening angle on each side of a component of `D`.
    pub widening: f64,
    pub inner_radius: f64,
    /// Rays replacing the real line, toward `+inf` and `-inf`.
    pub line_angles: (f64, f64),
    pub sectors: Vec<PlannedSector>,
    /// Smallest distance from a ray to a zero within the decay radius.
    pub clearance: f64,
    /// Where the time factor has fallen to `exp(-45)` on the widened rays.
    pub decay_radius: f64,
    /// Hard cutoff for every ray.
    pub radius_cap: f64,
}

fn angle_in(phi: f64, lo: f64, hi: f64) -> bool {
    let width = hi - lo;
    (phi - lo).rem_euclid(2.0 * PI) < width
}

/// Distance from `z` to the ray `{r e^{i phi} : r >= start}`.
fn ray_distance(z: C64, phi: f64, start: f64) -> f64 {
    let local = z * C64::from_polar(1.0, -phi);
    if local.re >= start {
        local.im.abs()
    } else {
        (local - start).norm()
    }
}

impl ContourPlan {
    /// Radius at which `|exp(-a rho^n t)| = exp(-45)` a quarter sector
    /// into `E`.
    pub fn decay_radius(n: usize, a: C64, t: f64) -> f64 {
        Self::decay_radius_at(n, a, t, PI / (4.0 * n as f64))
    }

    fn decay_radius_at(n: usize, a: C64, t: f64, widening: f64) -> f64 {
        let s = (n as f64 * widening).sin();
        (45.0 / (a.norm() * t * s)).powf(1.0 / n as f64)
    }

    pub fn new(solver: &Solver, t: f64) -> ContourPlan {
        let p = solver.problem();
        let (n, a) = (p.order(), p.direction());
        let nf = n as f64;
        let set = sectors(n, a);
        let r0 = solver.inner_radius;
        let zeros = solver.spectrum().values();

        let clearance_for = |widening: f64| {
            let reach = Self::decay_radius_at(n, a, t, widening) + 2.0;
            let mut best = f64::INFINITY;
            for &(lo, hi) in &set.d_arcs {
                for phi in [lo - widening, hi + widening] {
                    for z in zeros.iter().filter(|z| z.norm() <= reach) {
                        best = best.min(ray_distance(*z, phi, r0));
                    }
                }
            }
            best
        };
        let preferred = PI / (4.0 * nf);
        let mut widening = preferred;
        let mut clearance = clearance_for(widening);
        for k in 0..=10 {
            let w = PI / (8.0 * nf) + k as f64 * PI / (40.0 * nf);
            let c = clearance_for(w);
            if c > clearance + 1e-9 {
                widening = w;
                clearance = c;
            }
        }

        let planned = set
            .d_arcs
            .iter()
            .map(|&(lo, hi)| {
                let from = lo - widening;
                let to = hi + widening;
                let mid = 0.5 * (lo + hi);
                let half = if mid.sin() >= 0.0 {
                    Half::Plus
                } else {
                    Half::Minus
                };
                let residues = zeros
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| z.norm() > r0 && angle_in(z.arg(), from, to))
                    .map(|(k, _)| k)
                    .collect();
                PlannedSector {
                    from,
                    to,
                    half,
                    residues,
                }
            })
            .collect();

        let centre = |&(lo, hi): &(f64, f64)| 0.5 * (lo + hi);
        let gap = |phi: f64, target: f64| {
            let d = (phi - target).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d)
        };
        let nearest = |target: f64| {
            set.e_arcs
                .iter()
                .map(centre)
                .min_by(|x, y| gap(*x, target).total_cmp(&gap(*y, target)))
                .expect("at least one sector")
        };
        let decay_radius = Self::decay_radius_at(n, a, t, widening);
        ContourPlan {
            t,
            widening,
            inner_radius: r0,
            line_angles: (nearest(0.0), nearest(PI)),
            sectors: planned,
            clearance,
            decay_radius,
            radius_cap: (1.6 * decay_radius + 10.0).min(super::MAX_RADIUS * 1.5),
        }
    }

    /// Integral form at `x` for the `deriv`-th derivative. The line term
    /// belongs to the initial datum alone.
    pub fn evaluate(
        &self,
        solver: &Solver,
        x: f64,
        deriv: usize,
        part: Part,
    ) -> Result<Estimate, SolveError> {
        let t = self.t;
        let de = solver.data();
        let zeros = solver.spectrum().values();
        let p = solver.problem();
        let rate = {
            let n = p.order();
            let an = p.direction().norm() * n as f64 * t;
            move |r: f64| 3.0 + n as f64 + an * r.powi(n as i32 - 1)
        };
        let ray = RayIntegrator {
            cap: self.radius_cap,
            min_end: self.decay_radius,
            zeros: &zeros,
            rate: &rate,
        };

        let free = |rho: C64| {
            (C64::i() * rho).powu(deriv as u32)
                * (C64::i() * rho * x - de.lambda(rho) * t).exp()
                * de.transform_q0(rho)
        };
        let mut total = C64::new(0.0, 0.0);
        let mut error = 0.0;
        if part != Part::Boundary {
            let (to_plus, to_minus) = self.line_angles;
            let up = ray.run(&free, to_plus, 0.0);
            let down = ray.run(&free, to_minus, 0.0);
            total += up.value - down.value;
            error += up.tail + down.tail;
        }

        let mut residues = C64::new(0.0, 0.0);
        for s in &self.sectors {
            let f = |rho: C64| solver.integrand(part, s.half, rho, x, t, deriv);
            let out = ray.run(&f, s.from, self.inner_radius);
            let inward = ray.run(&f, s.to, self.inner_radius);
            let arc = arc_integral(&f, self.inner_radius, s.to, s.from);
            total -= out.value - inward.value + arc;
            error += out.tail + inward.tail;
            for &k in &s.residues {
                let term = C64::i() * solver.residue_at(k, part, s.half, x, t, deriv)?;
                residues += term;
                if zeros[k].norm() > 0.8 * solver.spectrum().search_radius {
                    error += term.norm();
                }
            }
        }
        Ok(Estimate {
            value: total / (2.0 * PI) + residues,
            error: error / (2.0 * PI),
        })
    }
}

struct RayOutcome {
    value: C64,
    tail: f64,
}

struct RayIntegrator<'a> {
    cap: f64,
    min_end: f64,
    zeros: &'a [C64],
    rate: &'a dyn Fn(f64) -> f64,
}

impl RayIntegrator<'_> {
    /// `int_start^inf f(r e^{i phi}) e^{i phi} dr` by Gauss-Legendre panels
    /// sized to the local oscillation and the distance to the nearest zero.
    fn run(&self, f: &dyn Fn(C64) -> C64, phi: f64, start: f64) -> RayOutcome {
        let (nodes, weights) = gauss_legendre(PANEL_NODES);
        let dir = C64::from_polar(1.0, phi);
        let mut r = start;
        let mut total = C64::new(0.0, 0.0);
        let mut peak: f64 = 0.0;
        let mut quiet = 0;
        let mut last = 0.0;
        while r < self.cap {
            let here = dir * r;
            let near = self
                .zeros
                .iter()
                .map(|z| (z - here).norm())
                .fold(f64::INFINITY, f64::min);
            let h = (4.0 / (self.rate)(r)).min(2.0).min((0.5 * near).max(0.02));
            let mut panel = C64::new(0.0, 0.0);
            for (u, w) in nodes.iter().zip(&weights) {
                panel += w * f(dir * (r + 0.5 * h * (1.0 + u)));
            }
            panel *= dir * (0.5 * h);
            total += panel;
            r += h;
            last = panel.norm();
            peak = peak.max(last).max(total.norm());
            if last <= 1e-17 * peak || peak == 0.0 {
                quiet += 1;
                if quiet >= QUIET_PANELS && r >= self.min_end {
                    return RayOutcome {
                        value: total,
                        tail: 0.0,
                    };
                }
            } else {
                quiet = 0;
            }
        }
        RayOutcome {
            value: total,
            tail: last,
        }
    }
}

/// `int f(rho) d rho` along the circle of radius `radius` from angle
/// `start` to `end`, either direction.
fn arc_integral(f: &dyn Fn(C64) -> C64, radius: f64, start: f64, end: f64) -> C64 {
    const PANELS: usize = 8;
    let (nodes, weights) = gauss_legendre(PANEL_NODES);
    let step = (end - start) / PANELS as f64;
    let mut total = C64::new(0.0, 0.0);
    for k in 0..PANELS {
        let a = start + k as f64 * step;
        for (u, w) in nodes.iter().zip(&weights) {
            let theta = a + 0.5 * step * (1.0 + u);
            let rho = C64::from_polar(radius, theta);
            total += w * f(rho) * C64::i() * rho * (0.5 * step);
        }
    }
    total
}
