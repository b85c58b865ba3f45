//! Condition checks for the polarization-qubit memory and the frequency
//! converter built from the transfer scheme.

use crate::analytics::{efficiency, EfficiencyReport};
use crate::error::{Error, Result};
use crate::params::Scenario;

pub const DEFAULT_MEMORY_REL_TOL: f64 = 1e-3;
pub const DEFAULT_CONVERTER_FACTOR: f64 = 10.0;

/// The two polarization branches `σ+` and `σ-` of a memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemorySetup {
    pub sigma_plus: Scenario,
    pub sigma_minus: Scenario,
}

impl MemorySetup {
    pub fn new(sigma_plus: Scenario, sigma_minus: Scenario) -> Result<Self> {
        let m = Self {
            sigma_plus,
            sigma_minus,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_plus.kind() != self.sigma_minus.kind() {
            return Err(Error::InvalidSetup(format!(
                "branches mix a {} and a {} scenario",
                self.sigma_plus.kind(),
                self.sigma_minus.kind()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub quantity: &'static str,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryVerdict {
    pub pass: bool,
    pub mismatches: Vec<Mismatch>,
}

fn relative_mismatch(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m > 0.0 {
        (a - b).abs() / m
    } else {
        0.0
    }
}

/// Checks that the photon emitted during storage does not depend on the
/// polarization: equal couplings and losses (cavity) or equal guided
/// emission rates (waveguide) on both branches.
pub fn memory_check(m: &MemorySetup, rel_tol: f64) -> Result<MemoryVerdict> {
    if !(rel_tol >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "rel_tol must be non-negative, got {rel_tol}"
        )));
    }
    m.validate()?;
    let pair = |quantity, a, b| Mismatch {
        quantity,
        relative: relative_mismatch(a, b),
    };
    let mismatches = match (&m.sigma_plus, &m.sigma_minus) {
        (Scenario::Cavity(a), Scenario::Cavity(b)) => vec![
            pair("g_es", a.g_es, b.g_es),
            pair("g_ef", a.g_ef, b.g_ef),
            pair("kappa_es", a.kappa_es, b.kappa_es),
            pair("kappa_ef", a.kappa_ef, b.kappa_ef),
        ],
        (Scenario::Waveguide(a), Scenario::Waveguide(b)) => vec![
            pair("Gamma_es", a.guided_es, b.guided_es),
            pair("Gamma_ef", a.guided_ef, b.guided_ef),
        ],
        _ => unreachable!("validated above"),
    };
    Ok(MemoryVerdict {
        pass: mismatches.iter().all(|x| x.relative <= rel_tol),
        mismatches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryEfficiency {
    pub sigma_plus: EfficiencyReport,
    pub sigma_minus: EfficiencyReport,
}

impl MemoryEfficiency {
    /// Worst-case storage efficiency over both branches.
    pub fn overall(&self) -> f64 {
        self.sigma_plus.eta_sf.min(self.sigma_minus.eta_sf)
    }
}

pub fn memory_efficiency(m: &MemorySetup) -> Result<MemoryEfficiency> {
    m.validate()?;
    Ok(MemoryEfficiency {
        sigma_plus: efficiency(&m.sigma_plus)?,
        sigma_minus: efficiency(&m.sigma_minus)?,
    })
}

/// Rates of one converter transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchRates {
    Cavity { g: f64, kappa: f64, gamma: f64 },
    Waveguide { guided: f64, gamma: f64 },
}

impl BranchRates {
    /// Emission-enhancement ratio: `(2g²/κ)/γ` or `Γ/γ`, infinite when `γ = 0`.
    pub fn ratio(&self) -> Result<f64> {
        let (enhanced, gamma) = match *self {
            BranchRates::Cavity { g, kappa, gamma } => {
                for (name, v) in [("g", g), ("kappa", kappa), ("gamma", gamma)] {
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(Error::InvalidSetup(format!(
                            "{name} = {v} is not a valid rate"
                        )));
                    }
                }
                if kappa == 0.0 && g > 0.0 {
                    return Err(Error::InvalidSetup("coupled branch with kappa = 0".into()));
                }
                (if g == 0.0 { 0.0 } else { 2.0 * g * g / kappa }, gamma)
            }
            BranchRates::Waveguide { guided, gamma } => {
                for (name, v) in [("Gamma", guided), ("gamma", gamma)] {
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(Error::InvalidSetup(format!(
                            "{name} = {v} is not a valid rate"
                        )));
                    }
                }
                (guided, gamma)
            }
        };
        Ok(if gamma > 0.0 {
            enhanced / gamma
        } else {
            f64::INFINITY
        })
    }
}

/// Four transitions: `σ±` on the high-frequency (`>`) and low-frequency (`<`) side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverterSetup {
    pub high_plus: BranchRates,
    pub high_minus: BranchRates,
    pub low_plus: BranchRates,
    pub low_minus: BranchRates,
}

impl ConverterSetup {
    pub fn branches(&self) -> [(&'static str, BranchRates); 4] {
        [
            ("high_sigma_plus", self.high_plus),
            ("high_sigma_minus", self.high_minus),
            ("low_sigma_plus", self.low_plus),
            ("low_sigma_minus", self.low_minus),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConverterVerdict {
    pub pass: bool,
    pub ratios: Vec<(&'static str, f64)>,
}

/// Every branch must emit into the guided channel much faster than into
/// the background: ratio ≥ `factor`.
pub fn converter_check(c: &ConverterSetup, factor: f64) -> Result<ConverterVerdict> {
    if !(factor > 1.0) {
        return Err(Error::InvalidInput(format!(
            "factor must exceed 1, got {factor}"
        )));
    }
    let ratios = c
        .branches()
        .iter()
        .map(|(name, b)| Ok((*name, b.ratio()?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConverterVerdict {
        pass: ratios.iter().all(|(_, r)| *r >= factor),
        ratios,
    })
}
