//! Physical parameters of a ring of identical driven Kerr cavities.
//!
//! All rates are in units of the zero-temperature decay rate `gamma0`. A
//! thermal bath with occupation `n_thermal` enters through the decay rate
//! `gamma = (1 + n_thermal) * gamma0` and the incoherent pump
//! `pump = n_thermal * gamma0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unvalidated parameter record, as read from a config file or CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RawParams {
    pub delta: f64,
    pub u: f64,
    pub j: f64,
    pub omega: f64,
    pub gamma0: f64,
    pub n_thermal: f64,
    pub n_cavities: usize,
    pub n_max: usize,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            u: 0.0,
            j: 0.0,
            omega: 0.0,
            gamma0: 1.0,
            n_thermal: 0.0,
            n_cavities: 1,
            n_max: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    pub delta: f64,
    pub u: f64,
    pub j: f64,
    pub omega: f64,
    pub gamma0: f64,
    pub n_thermal: f64,
    pub n_cavities: usize,
    pub n_max: usize,
}

impl SystemParams {
    /// Total decay rate `(1 + n_T) gamma0`.
    pub fn gamma(&self) -> f64 {
        (1.0 + self.n_thermal) * self.gamma0
    }

    /// Incoherent pump rate `n_T gamma0`.
    pub fn pump(&self) -> f64 {
        self.n_thermal * self.gamma0
    }

    pub fn with_j(mut self, j: f64) -> Self {
        self.j = j;
        self
    }

    pub fn with_n_cavities(mut self, n: usize) -> Self {
        self.n_cavities = n;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn to_raw(&self) -> RawParams {
        RawParams {
            delta: self.delta,
            u: self.u,
            j: self.j,
            omega: self.omega,
            gamma0: self.gamma0,
            n_thermal: self.n_thermal,
            n_cavities: self.n_cavities,
            n_max: self.n_max,
        }
    }
}

pub fn validate_params(raw: &RawParams) -> Result<SystemParams> {
    for (name, value) in [
        ("delta", raw.delta),
        ("u", raw.u),
        ("j", raw.j),
        ("omega", raw.omega),
        ("gamma0", raw.gamma0),
        ("n_thermal", raw.n_thermal),
    ] {
        if !value.is_finite() {
            return Err(Error::BadParameter(name));
        }
    }
    if raw.gamma0 <= 0.0 {
        return Err(Error::NonPositiveGamma0(raw.gamma0));
    }
    if raw.n_thermal < 0.0 {
        return Err(Error::BadParameter("n_thermal"));
    }
    if raw.n_max < 1 {
        return Err(Error::BadTruncation(raw.n_max));
    }
    if raw.n_cavities < 1 {
        return Err(Error::BadN(raw.n_cavities));
    }
    Ok(SystemParams {
        delta: raw.delta,
        u: raw.u,
        j: raw.j,
        omega: raw.omega,
        gamma0: raw.gamma0,
        n_thermal: raw.n_thermal,
        n_cavities: raw.n_cavities,
        n_max: raw.n_max,
    })
}
