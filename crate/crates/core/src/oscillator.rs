//! Physical parameters, basis truncation and oscillator eigenfunctions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

pub const DEFAULT_N_MAX: usize = 200;

/// Mass, angular frequency and reduced Planck constant of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    mass: f64,
    omega: f64,
    hbar: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("omega", omega), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        let p = Self { mass, omega, hbar };
        let alpha = p.alpha();
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "derived inverse length alpha = {alpha} is not finite and positive"
            )));
        }
        Ok(p)
    }

    /// `ħ = m = ω = 1`.
    pub fn natural() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            hbar: 1.0,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Inverse oscillator length `sqrt(mω/ħ)`.
    pub fn alpha(&self) -> f64 {
        (self.mass * self.omega / self.hbar).sqrt()
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    /// `ħω(n + ½)`.
    pub fn energy(&self, n: usize) -> f64 {
        self.hbar * self.omega * (n as f64 + 0.5)
    }

    pub fn potential(&self, x: f64) -> f64 {
        0.5 * self.mass * self.omega * self.omega * x * x
    }

    /// `ψ_n(x) = sqrt(α/(2ⁿ n! √π)) H_n(αx) exp(−α²x²/2)`.
    pub fn eigenstate(&self, n: BasisIndex, x: f64) -> f64 {
        let alpha = self.alpha();
        special::hermite_functions(n.get(), alpha * x)[n.get()] * alpha.sqrt()
    }

    /// `ψ_0(x) … ψ_n(x)` in one recurrence sweep.
    pub fn eigenstates(&self, n: usize, x: f64) -> Vec<f64> {
        let alpha = self.alpha();
        let scale = alpha.sqrt();
        let mut v = special::hermite_functions(n, alpha * x);
        v.iter_mut().for_each(|p| *p *= scale);
        v
    }
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self::natural()
    }
}

/// Highest admissible quantum number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub n_max: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
        }
    }
}

impl Truncation {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            Err(Error::Truncation {
                index: n,
                n_max: self.n_max,
            })
        } else {
            Ok(())
        }
    }

    pub fn index(&self, n: usize) -> Result<BasisIndex> {
        self.check(n).map(|_| BasisIndex(n))
    }

    pub fn hermite(&self, n: usize, x: f64) -> Result<f64> {
        self.check(n)?;
        Ok(special::hermite(n, x))
    }

    pub fn laguerre(&self, m: usize, k: usize, x: f64) -> Result<f64> {
        self.check(m)?;
        if x < 0.0 {
            return Err(Error::NegativeArgument(x));
        }
        Ok(special::laguerre(m, k, x))
    }

    pub fn log_factorial_ratio(&self, m: usize, n: usize) -> Result<f64> {
        self.check(m)?;
        self.check(n)?;
        Ok(special::log_factorial_ratio(m, n))
    }
}

/// Quantum number of an oscillator eigenstate, validated against a
/// [`Truncation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(usize);

impl BasisIndex {
    /// For indices already bounded by a validated one.
    pub(crate) fn new_unchecked(n: usize) -> Self {
        BasisIndex(n)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl From<BasisIndex> for usize {
    fn from(b: BasisIndex) -> usize {
        b.0
    }
}
