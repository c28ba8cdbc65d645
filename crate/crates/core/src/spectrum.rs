//! Topological spectrum of the reduced harmonic oscillator.
//!
//! The reduced Euler integral between `-q0` and `q0` evaluates to
//! `b q0 / (q0^2 - a^2)` with turning point `a = sqrt(2E/k)`. Choosing
//! `q0 = 1/C - sqrt(1/C^2 + a^2)` with `C = (2/b)(E/(hbar omega) - 1/2)`
//! makes `q0` a root of `q^2 - (2/C) q - a^2`, so the topological number
//! becomes `b C / 2 = E/(hbar omega) - 1/2`. Demanding that it equal the
//! integer `n` gives `E = hbar omega (n + 1/2)`.
//!
//! Signs are kept exactly as the formulas give them: for `C > 0` the chosen
//! `q0` is negative and limit statements refer to `|q0|`.

use thiserror::Error;

use crate::integrate::turning_point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("parameter `{0}` must be positive and finite")]
    InvalidParameter(&'static str),
    #[error("energy must be finite")]
    InvalidEnergy,
    #[error("q0 = {q0} sits at the turning point a = {turning_point}")]
    AtTurningPoint { q0: f64, turning_point: f64 },
    #[error("C = 0 (E = hbar omega / 2); q0 is undefined")]
    ZeroC,
    #[error("C = {0} is not positive")]
    NonPositiveC(f64),
    #[error("level index must be non-negative, got {0}")]
    NegativeLevel(i64),
    #[error("level {n}: {what}")]
    InvariantViolated { n: i64, what: String },
}

/// Parameters `m, k, b, hbar` of the oscillator; `omega = sqrt(k/m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    mass: f64,
    spring: f64,
    transverse: f64,
    hbar: f64,
}

fn positive(name: &'static str, v: f64) -> Result<f64, SpectrumError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(SpectrumError::InvalidParameter(name))
    }
}

impl OscillatorParams {
    pub fn new(mass: f64, spring: f64, transverse: f64, hbar: f64) -> Result<Self, SpectrumError> {
        Ok(Self {
            mass: positive("m", mass)?,
            spring: positive("k", spring)?,
            transverse: positive("b", transverse)?,
            hbar: positive("hbar", hbar)?,
        })
    }

    /// Parameters from an angular frequency: `k = m omega^2`.
    pub fn from_omega(mass: f64, omega: f64, transverse: f64, hbar: f64) -> Result<Self, SpectrumError> {
        let omega = positive("omega", omega)?;
        let mass = positive("m", mass)?;
        Self::new(mass, mass * omega * omega, transverse, hbar)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn spring(&self) -> f64 {
        self.spring
    }

    pub fn transverse(&self) -> f64 {
        self.transverse
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn omega(&self) -> f64 {
        (self.spring / self.mass).sqrt()
    }

    pub fn quantum(&self) -> f64 {
        self.hbar * self.omega()
    }

    pub fn turning_point(&self, energy: f64) -> f64 {
        turning_point(self.spring, energy)
    }
}

/// `b q0 / (q0^2 - a^2)` with `a^2 = 2E/k`.
pub fn topological_number(b: f64, k: f64, energy: f64, q0: f64) -> Result<f64, SpectrumError> {
    positive("b", b)?;
    positive("k", k)?;
    positive("E", energy)?;
    let a2 = 2.0 * energy / k;
    let denom = q0 * q0 - a2;
    if denom == 0.0 {
        return Err(SpectrumError::AtTurningPoint {
            q0,
            turning_point: a2.sqrt(),
        });
    }
    Ok(b * q0 / denom)
}

/// `C = (2/b)(E/(hbar omega) - 1/2)`.
pub fn c_of_energy(params: &OscillatorParams, energy: f64) -> Result<f64, SpectrumError> {
    if !energy.is_finite() {
        return Err(SpectrumError::InvalidEnergy);
    }
    Ok(2.0 / params.transverse * (energy / params.quantum() - 0.5))
}

/// `q0 = 1/C - sqrt(1/C^2 + a^2)`.
///
/// For `C > 0` the difference cancels catastrophically when `a C` is small,
/// so the same root is computed as `-a^2 / (1/C + sqrt(1/C^2 + a^2))`.
pub fn q0_from_c(c: f64, a: f64) -> Result<f64, SpectrumError> {
    if c == 0.0 {
        return Err(SpectrumError::ZeroC);
    }
    let inv = 1.0 / c;
    // hypot avoids overflow of 1/C^2 for tiny C
    let root = inv.hypot(a);
    Ok(if c > 0.0 { -(a * a) / (inv + root) } else { inv - root })
}

pub fn q0_from_energy(params: &OscillatorParams, energy: f64) -> Result<f64, SpectrumError> {
    let c = c_of_energy(params, energy)?;
    q0_from_c(c, params.turning_point(energy))
}

/// `E = hbar omega (n + 1/2)`.
pub fn canonical_energy(n: i64, params: &OscillatorParams) -> Result<f64, SpectrumError> {
    if n < 0 {
        return Err(SpectrumError::NegativeLevel(n));
    }
    Ok(params.quantum() * (n as f64 + 0.5))
}

/// `|topological_number(q0(E)) - b C / 2|`; zero up to rounding.
pub fn verify_consistency(params: &OscillatorParams, energy: f64) -> Result<f64, SpectrumError> {
    let c = c_of_energy(params, energy)?;
    if c <= 0.0 {
        return Err(if c == 0.0 {
            SpectrumError::ZeroC
        } else {
            SpectrumError::NonPositiveC(c)
        });
    }
    let q0 = q0_from_c(c, params.turning_point(energy))?;
    let n = topological_number(params.transverse, params.spring, energy, q0)?;
    Ok((n - params.transverse * c / 2.0).abs())
}

/// `q0^2 - a^2 - (2/C) q0`, relative to the largest of the three terms.
pub fn branch_defect(c: f64, a: f64, q0: f64) -> f64 {
    let terms = [q0 * q0, a * a, 2.0 / c * q0];
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    (terms[0] - terms[1] - terms[2]).abs() / scale
}

/// One row of the spectrum table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRecord {
    pub n: i64,
    pub energy: f64,
    pub turning_point: f64,
    pub c: f64,
    /// `None` when `C = 0`.
    pub q0: Option<f64>,
    pub topological_number: Option<f64>,
    /// `|topological_number - n|`, `None` when `C = 0`.
    pub residual: Option<f64>,
}

/// Relative tolerance of the branch identity check.
pub const BRANCH_TOLERANCE: f64 = 1e-12;
/// Residual bound enforced on every defined row.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

pub fn spectrum_record(params: &OscillatorParams, n: i64) -> Result<SpectrumRecord, SpectrumError> {
    let energy = canonical_energy(n, params)?;
    let a = params.turning_point(energy);
    let c = c_of_energy(params, energy)?;
    let mut record = SpectrumRecord {
        n,
        energy,
        turning_point: a,
        c,
        q0: None,
        topological_number: None,
        residual: None,
    };
    if c == 0.0 {
        return Ok(record);
    }
    let q0 = q0_from_c(c, a)?;
    let defect = branch_defect(c, a, q0);
    if defect > BRANCH_TOLERANCE {
        return Err(SpectrumError::InvariantViolated {
            n,
            what: format!("branch identity defect {defect:e}"),
        });
    }
    let number = topological_number(params.transverse, params.spring, energy, q0)?;
    record.q0 = Some(q0);
    record.topological_number = Some(number);
    record.residual = Some((number - n as f64).abs());
    Ok(record)
}

/// Rows `n = 0..=n_max`. Level 0 has `C = 0` and carries no `q0` or residual.
pub fn spectrum_table(params: &OscillatorParams, n_max: i64) -> Result<Vec<SpectrumRecord>, SpectrumError> {
    if n_max < 0 {
        return Err(SpectrumError::NegativeLevel(n_max));
    }
    (0..=n_max).map(|n| spectrum_record(params, n)).collect()
}
