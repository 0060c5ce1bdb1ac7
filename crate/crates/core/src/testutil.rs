//! Shared fixtures for unit tests.

use rand::{Rng, SeedableRng};

use crate::exppoly::{AtomEvaluator, DataAtom};
use crate::ibvp::{parse_problem, validate, ProblemSpec, ValidatedProblem};
use crate::C64;

pub fn spec(name: &str) -> ProblemSpec {
    let path = format!("{}/specs/{name}.json", env!("CARGO_MANIFEST_DIR"));
    parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn problem(name: &str) -> ValidatedProblem {
    validate(&spec(name)).unwrap()
}

pub fn rng(seed: u64) -> rand::rngs::StdRng {
    rand::rngs::StdRng::seed_from_u64(seed)
}

pub fn random_c64(r: &mut impl Rng, radius: f64) -> C64 {
    C64::new(r.gen_range(-radius..radius), r.gen_range(-radius..radius))
}

/// Independent constant values for every atom.
pub struct RandomAtoms {
    q0: Vec<C64>,
    qt: Vec<C64>,
    h: Vec<C64>,
}

impl RandomAtoms {
    pub fn new(seed: u64, n: usize) -> Self {
        let mut r = rng(seed);
        let mut draw = |_| random_c64(&mut r, 1.0);
        RandomAtoms {
            q0: (0..n).map(&mut draw).collect(),
            qt: (0..n).map(&mut draw).collect(),
            h: (0..n).map(&mut draw).collect(),
        }
    }
}

impl AtomEvaluator for RandomAtoms {
    fn atom(&self, atom: DataAtom, _rho: C64) -> C64 {
        match atom {
            DataAtom::None => C64::new(1.0, 0.0),
            DataAtom::Q0(z) => self.q0[z],
            DataAtom::QT(z) => self.qt[z],
            DataAtom::H(j) => self.h[j - 1],
        }
    }
}
