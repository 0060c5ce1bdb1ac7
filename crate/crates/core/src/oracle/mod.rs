//! Reference solutions that do not go through the transform machinery.
//!
//! Catalog problems are solved by eigenfunction expansion: every case is a
//! sum of modes `c exp(i k x - a k^n t)`, which makes values, derivatives and
//! transforms exact up to the truncation of the expansion. Second-order
//! problems with arbitrary boundary rows are also solved by finite
//! differences in [`mol`].

pub mod mol;

use std::f64::consts::PI;

use crate::ibvp::{parse_problem, ExpTerm, FunctionSpec, ProblemSpec};
use crate::numeric::exp_moments;
use crate::solution::{BoundaryTraces, Transform};
use crate::C64;

pub use mol::{mol_solve, MolConfig, MolError, MolSolution};

/// Modes kept per expansion.
pub const MODES: usize = 400;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("unknown oracle case `{0}`; known: {known}", known = CATALOG.join(", "))]
    UnknownCase(String),
}

/// Eigenfunction families of the catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `q = 0` at both ends, second order.
    Sine,
    /// `q_x = 0` at both ends, second order.
    Cosine,
    /// Every derivative equal at both ends, any order.
    Periodic,
}

pub const CATALOG: [&str; 6] = [
    "heat-dirichlet",
    "heat-neumann",
    "heat-periodic",
    "airy-periodic",
    "airy-periodic-reversed",
    "fourth-periodic",
];

#[derive(Clone, Copy, Debug)]
struct Mode {
    coef: C64,
    k: f64,
}

#[derive(Clone, Debug)]
pub struct OracleCase {
    pub name: String,
    pub spec: ProblemSpec,
    pub family: Family,
    modes: Vec<Mode>,
}

fn template(name: &str) -> Option<(ProblemSpec, Family)> {
    let (text, family, flip) = match name {
        "heat-dirichlet" => (
            include_str!("../../specs/heat_dirichlet.json"),
            Family::Sine,
            false,
        ),
        "heat-neumann" => (
            include_str!("../../specs/heat_neumann.json"),
            Family::Cosine,
            false,
        ),
        "heat-periodic" => (
            include_str!("../../specs/heat_periodic.json"),
            Family::Periodic,
            false,
        ),
        "airy-periodic" => (
            include_str!("../../specs/airy_periodic.json"),
            Family::Periodic,
            false,
        ),
        "airy-periodic-reversed" => (
            include_str!("../../specs/airy_periodic.json"),
            Family::Periodic,
            true,
        ),
        "fourth-periodic" => (
            include_str!("../../specs/fourth_periodic.json"),
            Family::Periodic,
            false,
        ),
        _ => return None,
    };
    let mut spec = parse_problem(text).expect("shipped template parses");
    if flip {
        spec.direction = -spec.direction;
    }
    Some((spec, family))
}

/// `int_0^1 exp(i omega y) q0(y) dy`.
fn moment(q0: &FunctionSpec, omega: f64) -> C64 {
    q0.exp_moment(C64::new(0.0, omega), 1.0)
}

fn expand(q0: &FunctionSpec, family: Family) -> Vec<Mode> {
    let mut modes = Vec::new();
    let mut push = |coef: C64, k: f64| {
        if coef.norm() > 1e-15 {
            modes.push(Mode { coef, k });
        }
    };
    match family {
        Family::Sine => {
            for m in 1..=MODES {
                let w = m as f64 * PI;
                // b = 2 int q0 sin, sin = (e^{iwx} - e^{-iwx}) / 2i.
                let b = (moment(q0, w) - moment(q0, -w)) / C64::i();
                push(b / (2.0 * C64::i()), w);
                push(-b / (2.0 * C64::i()), -w);
            }
        }
        Family::Cosine => {
            push(moment(q0, 0.0), 0.0);
            for m in 1..=MODES {
                let w = m as f64 * PI;
                let a = moment(q0, w) + moment(q0, -w);
                push(a / 2.0, w);
                push(a / 2.0, -w);
            }
        }
        Family::Periodic => {
            let m = MODES as i64;
            for j in -m..=m {
                let w = 2.0 * PI * j as f64;
                push(moment(q0, -w), w);
            }
        }
    }
    modes
}

impl OracleCase {
    pub fn catalog(name: &str) -> Result<OracleCase, OracleError> {
        let (spec, family) =
            template(name).ok_or_else(|| OracleError::UnknownCase(name.to_string()))?;
        Ok(Self::from_spec(name, spec, family))
    }

    /// A catalog family with another problem document, typically a
    /// different initial profile.
    pub fn from_spec(name: &str, spec: ProblemSpec, family: Family) -> OracleCase {
        let modes = expand(&spec.initial, family);
        OracleCase {
            name: name.to_string(),
            spec,
            family,
            modes,
        }
    }

    fn growth(&self, k: f64) -> C64 {
        -self.spec.direction * k.powi(self.spec.order as i32)
    }

    /// `d^j q / dx^j` at `(x, t)`.
    pub fn derivative(&self, j: usize, x: f64, t: f64) -> C64 {
        self.modes
            .iter()
            .map(|m| {
                m.coef
                    * (C64::i() * m.k).powu(j as u32)
                    * (C64::i() * m.k * x + self.growth(m.k) * t).exp()
            })
            .sum()
    }

    pub fn value(&self, x: f64, t: f64) -> C64 {
        self.derivative(0, x, t)
    }

    /// `q_t + a (-i d/dx)^n q`, evaluated mode by mode.
    pub fn pde_residual(&self, x: f64, t: f64) -> C64 {
        let n = self.spec.order;
        let dt: C64 = self
            .modes
            .iter()
            .map(|m| m.coef * self.growth(m.k) * (C64::i() * m.k * x + self.growth(m.k) * t).exp())
            .sum();
        dt + self.spec.direction * (-C64::i()).powu(n as u32) * self.derivative(n, x, t)
    }

    /// Largest modulus among the outermost tenth of the modes at time `t`,
    /// times their count.
    pub fn tail_bound(&self, t: f64) -> f64 {
        let kmax = self.modes.iter().map(|m| m.k.abs()).fold(0.0, f64::max);
        let outer: Vec<f64> = self
            .modes
            .iter()
            .filter(|m| m.k.abs() >= 0.9 * kmax)
            .map(|m| m.coef.norm() * (self.growth(m.k).re * t).exp())
            .collect();
        outer.iter().copied().fold(0.0, f64::max) * outer.len() as f64
    }

    /// Endpoint derivatives as exact exponential sums in time.
    pub fn traces(&self) -> BoundaryTraces {
        let at = |x: f64| {
            (0..self.spec.order)
                .map(|j| {
                    FunctionSpec::Exp(
                        self.modes
                            .iter()
                            .map(|m| ExpTerm {
                                coef: m.coef
                                    * (C64::i() * m.k).powu(j as u32)
                                    * (C64::i() * m.k * x).exp(),
                                rate: self.growth(m.k),
                            })
                            .collect(),
                    )
                })
                .collect()
        };
        BoundaryTraces {
            left: at(0.0),
            right: at(1.0),
        }
    }

    /// `rho -> int_0^1 exp(-i rho y) q(y, T) dy`.
    pub fn final_transform(&self) -> Transform {
        let horizon = self.spec.final_time;
        let weighted: Vec<(C64, f64)> = self
            .modes
            .iter()
            .map(|m| (m.coef * (self.growth(m.k) * horizon).exp(), m.k))
            .collect();
        Box::new(move |rho| {
            weighted
                .iter()
                .map(|(c, k)| c * exp_moments(C64::i() * (k - rho), 0)[0])
                .sum()
        })
    }
}

pub fn reference_solution(case: &str, x: f64, t: f64) -> Result<C64, OracleError> {
    Ok(OracleCase::catalog(case)?.value(x, t))
}
