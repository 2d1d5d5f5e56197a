//! Physical quantities derived from correlator solutions.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::{CorrelatorIndex, PairIndex};
use crate::steady::SolutionVector;

/// Populations below this leave `g2` undefined.
pub const POPULATION_FLOOR: f64 = 1e-12;
/// Imaginary parts above this on nominally real moments are logged.
pub const IMAG_WARN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    /// `<a^+ a>`.
    pub n_a: f64,
    /// `<a^+ a^+ a a> / n_a^2`; `None` when not requested or unavailable.
    pub g2: Option<f64>,
    /// `<a^+ b>` for adjacent cavities.
    pub nn_coherence: Option<Complex64>,
    pub population: Complex64,
    pub pair_moment: Option<Complex64>,
}

fn warn_if_complex(name: &str, z: Complex64) {
    if z.im.abs() > IMAG_WARN {
        log::warn!("{name} has imaginary residue {:e}", z.im);
    }
}

/// `g2 = Re<a^+2 a^2> / n_a^2`, reported as computed even if negative.
pub fn g2_from_moments(population: f64, pair_moment: f64) -> Result<f64> {
    if population <= POPULATION_FLOOR {
        return Err(Error::PopulationTooSmall(population));
    }
    Ok(pair_moment / (population * population))
}

/// `n_a`, optionally `g2`, and the neighbour coherence when present.
pub fn compute_observables(v: &SolutionVector, want_g2: bool) -> Result<Observables> {
    let population = v.single(1, 1).ok_or_else(|| Error::MissingMoment("<a+ a>".into()))?;
    warn_if_complex("<a+ a>", population);
    let n_a = population.re;
    let (g2, pair_moment) = if want_g2 {
        let pm = v.single(2, 2).ok_or_else(|| Error::MissingMoment("<a+2 a2>".into()))?;
        warn_if_complex("<a+2 a2>", pm);
        (Some(g2_from_moments(n_a, pm.re)?), Some(pm))
    } else {
        (None, None)
    };
    let n = v.params.n_cavities;
    let nn_coherence = if n >= 2 {
        let mut pairs = vec![PairIndex::ZERO; n];
        pairs[0] = PairIndex::new(1, 0);
        pairs[1] = PairIndex::new(0, 1);
        v.get(&CorrelatorIndex::new(pairs).unwrap())
    } else {
        None
    };
    Ok(Observables { n_a, g2, nn_coherence, population, pair_moment })
}
