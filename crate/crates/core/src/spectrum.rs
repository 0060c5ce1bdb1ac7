//! Zeros of the characteristic determinant and their asymptotic geometry.
//!
//! Zeros are counted with the argument principle over a grid of boxes that
//! covers the search disc, boxes are split until each holds at most one
//! zero, and each isolated zero is refined by Newton's method on the
//! logarithmic derivative. The zero of known order at the origin is divided
//! out of every count and every Newton step.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::exppoly::{omega_pow, ExpPolynomial, S_TOL};
use crate::C64;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SpectrumError {
    #[error("expression carries data atoms")]
    HasAtoms,
    #[error("determinant vanishes identically")]
    Zero,
    #[error("no nonzero Taylor coefficient at the origin up to order {0}")]
    OriginOrder(usize),
}

/// A data-free exponential sum prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct ExpSum {
    n: usize,
    /// `(s, coefficients, derivative coefficients)` of
    /// `P(rho) exp(-i s rho)` and its derivative.
    terms: Vec<(C64, Vec<C64>, Vec<C64>)>,
}

/// Value and derivative divided by `exp(log_scale)`.
#[derive(Clone, Copy, Debug)]
pub struct Scaled {
    pub value: C64,
    pub deriv: C64,
    pub log_scale: f64,
    /// Sum of term moduli on the same scale; the size that `value` is
    /// judged against.
    pub magnitude: f64,
}

fn horner(c: &[C64], x: C64) -> C64 {
    c.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

impl ExpSum {
    pub fn new(e: &ExpPolynomial) -> Result<Self, SpectrumError> {
        if e.has_atoms() {
            return Err(SpectrumError::HasAtoms);
        }
        let classes = e.classes();
        if classes.is_empty() {
            return Err(SpectrumError::Zero);
        }
        let lam = |s: C64| -C64::i() * s;
        let terms = classes
            .into_iter()
            .map(|c| {
                let p = c.poly.coeffs().to_vec();
                let dp = &c.poly.derivative() + &c.poly.scale(lam(c.s));
                (c.s, p, dp.coeffs().to_vec())
            })
            .collect();
        Ok(ExpSum {
            n: e.order(),
            terms,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Exponent values with their coefficient polynomials.
    pub fn classes(&self) -> impl Iterator<Item = (C64, &[C64])> {
        self.terms.iter().map(|(s, p, _)| (*s, p.as_slice()))
    }

    pub fn scaled(&self, rho: C64) -> Scaled {
        let exps: Vec<C64> = self
            .terms
            .iter()
            .map(|(s, _, _)| -C64::i() * s * rho)
            .collect();
        let log_scale = exps.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
        let mut value = C64::new(0.0, 0.0);
        let mut deriv = C64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        for ((_, p, dp), e) in self.terms.iter().zip(&exps) {
            let w = (e - log_scale).exp();
            let v = horner(p, rho) * w;
            value += v;
            deriv += horner(dp, rho) * w;
            magnitude += v.norm();
        }
        Scaled {
            value,
            deriv,
            log_scale,
            magnitude,
        }
    }

    pub fn eval(&self, rho: C64) -> C64 {
        let s = self.scaled(rho);
        s.value * s.log_scale.exp()
    }

    /// Value and derivative without rescaling.
    pub fn eval_with_derivative(&self, rho: C64) -> (C64, C64) {
        let s = self.scaled(rho);
        let f = s.log_scale.exp();
        (s.value * f, s.deriv * f)
    }

    /// Order of the zero at `rho = 0`, read off the Taylor coefficients.
    pub fn origin_order(&self) -> Result<usize, SpectrumError> {
        const KMAX: usize = 64;
        for k in 0..=KMAX {
            let mut coef = C64::new(0.0, 0.0);
            let mut size = 0.0;
            for (s, p, _) in &self.terms {
                let lam = -C64::i() * s;
                for (j, pj) in p.iter().enumerate().take(k + 1) {
                    let m = k - j;
                    let mut t = *pj;
                    for i in 1..=m {
                        t *= lam / i as f64;
                    }
                    coef += t;
                    size += t.norm();
                }
            }
            if coef.norm() > 1e-10 * size.max(f64::MIN_POSITIVE) {
                return Ok(k);
            }
        }
        Err(SpectrumError::OriginOrder(KMAX))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroClass {
    Plus,
    Minus,
    Real,
}

/// Threshold on `|Im sigma|` below which a zero counts as real.
pub const REAL_TOL: f64 = 1e-9;

pub fn classify_zero(z: C64) -> ZeroClass {
    if z.im.abs() <= REAL_TOL {
        ZeroClass::Real
    } else if z.im > 0.0 {
        ZeroClass::Plus
    } else {
        ZeroClass::Minus
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Zero {
    pub re: f64,
    pub im: f64,
    pub mult: usize,
    pub class: ZeroClass,
}

impl Zero {
    fn new(z: C64, mult: usize) -> Self {
        Zero {
            re: z.re,
            im: z.im,
            mult,
            class: classify_zero(z),
        }
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Ray {
    pub angle: f64,
    /// Zero for a ray, otherwise an estimate of the strip half-width.
    pub width: f64,
    /// Exponent points on the hull side that produces the ray.
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub zeros: Vec<Zero>,
    pub epsilon: f64,
    pub rays: Vec<Ray>,
    pub search_radius: f64,
    /// Order of the excluded zero at the origin.
    pub origin_order: usize,
    /// Zero count by winding number over the searched square, origin
    /// excluded.
    pub winding_count: i64,
    /// Zeros, with multiplicity, refined inside the same square.
    pub refined_count: usize,
    /// Boxes `[re_lo, im_lo, re_hi, im_hi]` whose contents could not be
    /// resolved.
    pub flagged: Vec<[f64; 4]>,
}

impl Spectrum {
    pub fn values(&self) -> Vec<C64> {
        self.zeros.iter().map(Zero::value).collect()
    }

    pub fn indices(&self, class: ZeroClass) -> Vec<usize> {
        (0..self.zeros.len())
            .filter(|&k| match class {
                // Real zeros belong to the upper set by its definition.
                ZeroClass::Plus => self.zeros[k].class != ZeroClass::Minus,
                other => self.zeros[k].class == other,
            })
            .collect()
    }

    pub fn has_multiple(&self) -> bool {
        self.zeros.iter().any(|z| z.mult > 1)
    }

    /// Largest distance from `omega sigma` to the nearest zero, over zeros
    /// whose rotation stays inside the searched disc.
    pub fn rotation_defect(&self, n: usize) -> f64 {
        let w = omega_pow(n, 1);
        let vals = self.values();
        let margin = 1e-6 * (1.0 + self.search_radius);
        vals.iter()
            .filter(|z| z.norm() <= self.search_radius - margin)
            .map(|z| {
                let r = w * z;
                vals.iter()
                    .map(|y| (y - r).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Mean angular distance to the nearest predicted ray for each modulus
    /// quartile, innermost first.
    pub fn ray_deviation_by_quartile(&self) -> Vec<f64> {
        let mut pts: Vec<(f64, f64)> = self
            .values()
            .into_iter()
            .map(|z| {
                let dev = self
                    .rays
                    .iter()
                    .map(|r| angle_gap(z.arg(), r.angle))
                    .fold(f64::INFINITY, f64::min);
                (z.norm(), dev)
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let q = pts.len() / 4;
        if q == 0 {
            return Vec::new();
        }
        (0..4)
            .map(|i| {
                let hi = if i == 3 { pts.len() } else { (i + 1) * q };
                let part = &pts[i * q..hi];
                part.iter().map(|p| p.1).sum::<f64>() / part.len() as f64
            })
            .collect()
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    lo: C64,
    hi: C64,
}

impl Rect {
    fn size(&self) -> f64 {
        (self.hi.re - self.lo.re).max(self.hi.im - self.lo.im)
    }

    fn center(&self) -> C64 {
        0.5 * (self.lo + self.hi)
    }

    fn contains(&self, z: C64, pad: f64) -> bool {
        z.re >= self.lo.re - pad
            && z.re <= self.hi.re + pad
            && z.im >= self.lo.im - pad
            && z.im <= self.hi.im + pad
    }

    fn corners(&self) -> [C64; 4] {
        [
            self.lo,
            C64::new(self.hi.re, self.lo.im),
            self.hi,
            C64::new(self.lo.re, self.hi.im),
        ]
    }

    fn split(&self, ratio: f64) -> [Rect; 4] {
        let m = self.lo + (self.hi - self.lo) * ratio;
        [
            Rect { lo: self.lo, hi: m },
            Rect {
                lo: C64::new(m.re, self.lo.im),
                hi: C64::new(self.hi.re, m.im),
            },
            Rect { lo: m, hi: self.hi },
            Rect {
                lo: C64::new(self.lo.re, m.im),
                hi: C64::new(m.re, self.hi.im),
            },
        ]
    }

    fn as_array(&self) -> [f64; 4] {
        [self.lo.re, self.lo.im, self.hi.re, self.hi.im]
    }
}

/// Boxes at most this wide that still hold several zeros are reported as a
/// single multiple zero.
pub const CLUSTER_SIZE: f64 = 1e-5;

struct Finder<'a> {
    f: &'a ExpSum,
    m0: usize,
}

#[derive(Default)]
struct Found {
    zeros: Vec<(C64, usize)>,
    flagged: Vec<[f64; 4]>,
    count: i64,
}

impl Finder<'_> {
    /// Change of `arg f` along a segment, with steps short enough that the
    /// phase moves by well under a quarter turn.
    fn edge_phase(&self, a: C64, b: C64) -> Option<f64> {
        let len = (b - a).norm();
        let dir = (b - a) / len;
        let max_step = (len / 4.0).min(0.5);
        let mut t = 0.0;
        let mut cur = self.f.scaled(a);
        let mut total = 0.0;
        while t < len {
            if cur.value.norm() == 0.0 {
                return None;
            }
            let l = (cur.deriv / cur.value).norm();
            let mut h = (0.3 / l).min(max_step).min(len - t);
            let z = a + dir * t;
            loop {
                if h < 1e-11 * (1.0 + z.norm()) {
                    return None;
                }
                let next = self.f.scaled(a + dir * (t + h));
                let d = (next.value / cur.value).arg();
                if next.value.norm() > 0.0 && d.abs() <= 0.8 {
                    total += d;
                    t += h;
                    cur = next;
                    break;
                }
                h *= 0.5;
            }
        }
        Some(total)
    }

    fn count(&self, r: &Rect) -> Option<i64> {
        let c = r.corners();
        let mut total = 0.0;
        for i in 0..4 {
            total += self.edge_phase(c[i], c[(i + 1) % 4])?;
        }
        let w = total / (2.0 * PI);
        let k = w.round();
        if (w - k).abs() > 0.2 {
            return None;
        }
        let origin = C64::new(0.0, 0.0);
        let inside = r.contains(origin, 0.0);
        Some(k as i64 - if inside { self.m0 as i64 } else { 0 })
    }

    /// Newton on the deflated logarithmic derivative, confined to `r`.
    fn newton(&self, start: C64, mult: usize, r: &Rect) -> Option<C64> {
        let pad = 0.01 * r.size();
        let mut z = start;
        for _ in 0..100 {
            let s = self.f.scaled(z);
            if s.value.norm() == 0.0 {
                return Some(z);
            }
            let mut l = s.deriv / s.value;
            if self.m0 > 0 {
                l -= self.m0 as f64 / z;
            }
            let mut step = mult as f64 / l;
            if step.norm() > 0.5 * r.size() {
                step *= 0.5 * r.size() / step.norm();
            }
            z -= step;
            if !r.contains(z, pad) {
                return None;
            }
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        let s = self.f.scaled(z);
        let ok = s.value.norm() <= 1e-10 * s.magnitude || mult > 1;
        (ok && r.contains(z, 1e-9 * (1.0 + r.size()))).then_some(z)
    }

    fn search(&self, r: Rect, count: i64, out: &mut Found) {
        if count <= 0 {
            return;
        }
        let size = r.size();
        if count == 1 && size <= 0.5 {
            if let Some(z) = self.newton(r.center(), 1, &r) {
                out.zeros.push((z, 1));
                return;
            }
        }
        if count >= 2 && size <= CLUSTER_SIZE {
            let z = self
                .newton(r.center(), count as usize, &r)
                .unwrap_or(r.center());
            out.zeros.push((z, count as usize));
            return;
        }
        if size < 1e-12 {
            out.flagged.push(r.as_array());
            return;
        }
        for ratio in [0.5137, 0.4371, 0.5893, 0.3719] {
            let parts = r.split(ratio);
            let counts: Option<Vec<i64>> = parts.iter().map(|p| self.count(p)).collect();
            if let Some(cs) = counts {
                if cs.iter().sum::<i64>() == count && cs.iter().all(|&c| c >= 0) {
                    for (p, c) in parts.into_iter().zip(cs) {
                        self.search(p, c, out);
                    }
                    return;
                }
            }
        }
        out.flagged.push(r.as_array());
    }
}

/// Runs `f` on a pool capped by `UTM_THREADS` when that is set.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("UTM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    match cap.filter(|&k| k > 0) {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Default search radius for order `n`.
pub fn default_radius(n: usize) -> f64 {
    12.0 * n as f64
}

pub fn find_zeros(delta: &ExpPolynomial, radius: f64) -> Result<Spectrum, SpectrumError> {
    let f = ExpSum::new(delta)?;
    find_zeros_of(&f, radius)
}

pub fn find_zeros_of(f: &ExpSum, radius: f64) -> Result<Spectrum, SpectrumError> {
    let m0 = f.origin_order()?;
    let finder = Finder { f, m0 };
    // Cells of unit size with the origin well inside one of them.
    let half = radius.ceil() + 0.5;
    let cells_per_side = (2.0 * half).round() as usize;
    let offset = C64::new(0.0123, 0.0071);
    let corner = C64::new(-half, -half) + offset;
    let cells: Vec<Rect> = (0..cells_per_side * cells_per_side)
        .map(|i| {
            let lo = corner + C64::new((i % cells_per_side) as f64, (i / cells_per_side) as f64);
            Rect {
                lo,
                hi: lo + C64::new(1.0, 1.0),
            }
        })
        .filter(|r| {
            let nearest = C64::new(
                0.0f64.clamp(r.lo.re, r.hi.re),
                0.0f64.clamp(r.lo.im, r.hi.im),
            );
            nearest.norm() <= radius
        })
        .collect();
    let found: Vec<Found> = with_thread_cap(|| {
        cells
            .par_iter()
            .map(|r| {
                let mut out = Found::default();
                match finder.count(r) {
                    Some(c) => {
                        out.count = c;
                        finder.search(*r, c, &mut out);
                    }
                    None => out.flagged.push(r.as_array()),
                }
                out
            })
            .collect()
    });
    let mut raw: Vec<(C64, usize)> = Vec::new();
    let mut flagged = Vec::new();
    let mut winding_count = 0;
    for part in found {
        winding_count += part.count;
        raw.extend(part.zeros);
        flagged.extend(part.flagged);
    }
    let mut uniq: Vec<(C64, usize)> = Vec::new();
    for (z, m) in raw {
        if !uniq
            .iter()
            .any(|(y, _)| (y - z).norm() <= 1e-7 * (1.0 + z.norm()))
        {
            uniq.push((z, m));
        }
    }
    let refined_count = uniq.iter().map(|(_, m)| m).sum();
    let mut zeros: Vec<Zero> = uniq
        .into_iter()
        .filter(|(z, _)| z.norm() <= radius)
        .map(|(z, m)| Zero::new(z, m))
        .collect();
    zeros.sort_by(|a, b| {
        a.value()
            .norm()
            .total_cmp(&b.value().norm())
            .then(a.value().arg().total_cmp(&b.value().arg()))
    });
    let mut pts: Vec<C64> = zeros.iter().map(Zero::value).collect();
    if m0 > 0 {
        pts.push(C64::new(0.0, 0.0));
    }
    let mut epsilon: f64 = 1.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            epsilon = epsilon.min((pts[i] - pts[j]).norm());
        }
    }
    let diagram = indicator_diagram_of(f);
    let rays = if diagram.degenerate {
        Vec::new()
    } else {
        asymptotic_rays(&diagram, f.order())
    };
    Ok(Spectrum {
        zeros,
        epsilon,
        rays,
        search_radius: radius,
        origin_order: m0,
        winding_count,
        refined_count,
        flagged,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HullSide {
    pub from: C64,
    pub to: C64,
    /// Angle of the outward normal.
    pub normal: f64,
    /// Indices into `points` lying on this side.
    pub members: Vec<usize>,
}

/// Conjugated exponent values of the nonzero classes and their convex hull.
#[derive(Clone, Debug, Serialize)]
pub struct IndicatorDiagram {
    pub points: Vec<C64>,
    /// Hull vertices, anticlockwise.
    pub hull: Vec<C64>,
    pub sides: Vec<HullSide>,
    pub degenerate: bool,
    #[serde(skip)]
    leads: Vec<(C64, usize)>,
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

pub fn indicator_diagram(delta: &ExpPolynomial) -> Result<IndicatorDiagram, SpectrumError> {
    Ok(indicator_diagram_of(&ExpSum::new(delta)?))
}

fn indicator_diagram_of(f: &ExpSum) -> IndicatorDiagram {
    let mut points = Vec::new();
    let mut leads = Vec::new();
    for (s, p) in f.classes() {
        let deg = p.len().saturating_sub(1);
        points.push(s.conj());
        leads.push((p[deg], deg));
    }
    let mut sorted: Vec<C64> = points.clone();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    sorted.dedup_by(|a, b| (*a - *b).norm() < S_TOL);
    let hull = convex_hull(&sorted);
    let degenerate = hull.len() < 2;
    let mut sides = Vec::new();
    if !degenerate {
        let m = hull.len();
        let pairs: Vec<(C64, C64)> = if m == 2 {
            vec![(hull[0], hull[1]), (hull[1], hull[0])]
        } else {
            (0..m).map(|i| (hull[i], hull[(i + 1) % m])).collect()
        };
        for (from, to) in pairs {
            let e = to - from;
            let members = points
                .iter()
                .enumerate()
                .filter(|(_, p)| {
                    let d = **p - from;
                    cross(e, d).abs() <= 1e-9 * e.norm() && {
                        let t = (d * e.conj()).re / e.norm_sqr();
                        (-1e-9..=1.0 + 1e-9).contains(&t)
                    }
                })
                .map(|(i, _)| i)
                .collect();
            sides.push(HullSide {
                from,
                to,
                normal: (-C64::i() * e).arg(),
                members,
            });
        }
    }
    IndicatorDiagram {
        points,
        hull,
        sides,
        degenerate,
        leads,
    }
}

/// Andrew's monotone chain on points sorted by `(re, im)`, collinear points
/// dropped, anticlockwise.
fn convex_hull(sorted: &[C64]) -> Vec<C64> {
    if sorted.len() < 3 {
        return sorted.to_vec();
    }
    let mut lower: Vec<C64> = Vec::new();
    for &p in sorted {
        while lower.len() >= 2
            && cross(
                lower[lower.len() - 1] - lower[lower.len() - 2],
                p - lower[lower.len() - 2],
            ) <= 1e-12
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &p in sorted.iter().rev() {
        while upper.len() >= 2
            && cross(
                upper[upper.len() - 1] - upper[upper.len() - 2],
                p - upper[upper.len() - 2],
            ) <= 1e-12
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// One direction per hull side: zeros accumulate where the two (or more)
/// exponentials of that side tie for the largest modulus, which is along
/// the side itself in the conjugated plane.
pub fn asymptotic_rays(d: &IndicatorDiagram, n: usize) -> Vec<Ray> {
    d.sides
        .iter()
        .map(|side| {
            let angle = (side.to - side.from).arg().rem_euclid(2.0 * PI);
            let width = if n % 2 == 1 && side.members.len() == 2 {
                0.0
            } else {
                let mut w: f64 = 0.0;
                for (a, &i) in side.members.iter().enumerate() {
                    for &j in &side.members[a + 1..] {
                        let (li, _) = d.leads[i];
                        let (lj, _) = d.leads[j];
                        let gap = (d.points[i] - d.points[j]).norm();
                        w = w.max((li.norm().ln() - lj.norm().ln()).abs() / gap);
                    }
                }
                w
            };
            Ray {
                angle,
                width,
                points: side.members.len(),
            }
        })
        .collect()
}

/// Largest relative defect of `Delta(rho) = (-1)^{n-1} Delta(omega rho)` over
/// 100 random points of the disc.
pub fn verify_symmetry(
    delta: &ExpPolynomial,
    radius: f64,
    seed: u64,
) -> Result<f64, SpectrumError> {
    let f = ExpSum::new(delta)?;
    let n = f.order();
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let w = omega_pow(n, 1);
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rho = C64::from_polar(
            radius * rng.gen::<f64>().sqrt(),
            rng.gen_range(0.0..2.0 * PI),
        );
        let a = f.eval(rho);
        let b = sign * f.eval(w * rho);
        worst = worst.max((a - b).norm() / (1.0 + a.norm()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
