//! Scenario parameters and the rates derived from them.
//!
//! All rates are dimensionless, measured in units of a reference rate
//! (`g_es` for cavity scenarios, `Γ_es` for waveguide scenarios). Times are
//! in inverse reference-rate units.

use crate::error::{Error, Result};

/// Rates of a single-sided cavity holding a three-level emitter.
///
/// `kappa_*` are half the cavity loss rates (the mode intensity decays at
/// `2κ`), `gamma_*` are spontaneous decay rates into background modes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CavityParams {
    pub g_es: f64,
    pub g_ef: f64,
    pub kappa_es: f64,
    pub kappa_ef: f64,
    pub gamma_es: f64,
    pub gamma_ef: f64,
    /// Decay of `|e>` to levels other than `|s>` and `|f>`.
    pub gamma_eo: f64,
}

/// Rates of an emitter next to a one-dimensional waveguide (or in free space).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveguideParams {
    /// Γ_es: emission into the guided modes on the `e <-> s` transition.
    pub guided_es: f64,
    /// Γ_ef: emission into the guided modes on the `e <-> f` transition.
    pub guided_ef: f64,
    pub gamma_es: f64,
    pub gamma_ef: f64,
    pub gamma_eo: f64,
}

/// Cooperativities and one-way transition rates χ of both transitions.
///
/// Cooperativities are `None` where they are undefined (no cavity loss, no
/// background decay, or a waveguide scenario).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub coop_es: Option<f64>,
    pub coop_ef: Option<f64>,
    pub chi_es: f64,
    pub chi_ef: f64,
}

/// Either kind of scenario, for operations that accept both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Cavity(CavityParams),
    Waveguide(WaveguideParams),
}

impl Scenario {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            Scenario::Cavity(_) => ScenarioKind::Cavity,
            Scenario::Waveguide(_) => ScenarioKind::Waveguide,
        }
    }

    pub fn derived_rates(&self) -> Result<DerivedRates> {
        match self {
            Scenario::Cavity(p) => derive_cavity_rates(p),
            Scenario::Waveguide(p) => derive_waveguide_rates(p),
        }
    }

    pub fn gamma_eo(&self) -> f64 {
        match self {
            Scenario::Cavity(p) => p.gamma_eo,
            Scenario::Waveguide(p) => p.gamma_eo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Cavity,
    Waveguide,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScenarioKind::Cavity => "cavity",
            ScenarioKind::Waveguide => "waveguide",
        })
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cavity" => Ok(ScenarioKind::Cavity),
            "waveguide" | "free-space" => Ok(ScenarioKind::Waveguide),
            other => Err(Error::InvalidInput(format!("unknown scenario `{other}`"))),
        }
    }
}

fn check_rate(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidParameters(format!(
            "{name} must be finite and non-negative, got {value}"
        )));
    }
    Ok(())
}

impl CavityParams {
    fn fields(&self) -> [(&'static str, f64); 7] {
        [
            ("g_es", self.g_es),
            ("g_ef", self.g_ef),
            ("kappa_es", self.kappa_es),
            ("kappa_ef", self.kappa_ef),
            ("gamma_es", self.gamma_es),
            ("gamma_ef", self.gamma_ef),
            ("gamma_eo", self.gamma_eo),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.fields() {
            check_rate(name, value)?;
        }
        if self.kappa_es == 0.0 && self.g_es > 0.0 {
            return Err(Error::InvalidParameters(
                "g_es > 0 requires kappa_es > 0".into(),
            ));
        }
        if self.kappa_ef == 0.0 && self.g_ef > 0.0 {
            return Err(Error::InvalidParameters(
                "g_ef > 0 requires kappa_ef > 0".into(),
            ));
        }
        Ok(())
    }

    /// Validation plus the requirement that the input channel exists.
    pub fn validate_for_simulation(&self) -> Result<()> {
        self.validate()?;
        if self.kappa_es <= 0.0 {
            return Err(Error::InvalidParameters(
                "kappa_es > 0 is required: the photon enters through this channel".into(),
            ));
        }
        Ok(())
    }

    /// Largest rate appearing in the generator.
    pub fn max_rate(&self) -> f64 {
        self.fields().iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }
}

impl WaveguideParams {
    fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("Gamma_es", self.guided_es),
            ("Gamma_ef", self.guided_ef),
            ("gamma_es", self.gamma_es),
            ("gamma_ef", self.gamma_ef),
            ("gamma_eo", self.gamma_eo),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.fields() {
            check_rate(name, value)?;
        }
        Ok(())
    }

    pub fn validate_for_simulation(&self) -> Result<()> {
        self.validate()?;
        if self.guided_es <= 0.0 {
            return Err(Error::InvalidParameters(
                "Gamma_es > 0 is required: the photon arrives through the guided modes".into(),
            ));
        }
        Ok(())
    }

    /// Total decay rate of the excited state.
    pub fn total_decay(&self) -> f64 {
        self.guided_es + self.guided_ef + self.gamma_es + self.gamma_ef + self.gamma_eo
    }

    pub fn max_rate(&self) -> f64 {
        self.fields().iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }
}

/// One-way rate `γ + 2g²/κ` of a cavity-assisted transition.
///
/// This is `γ(1 + 2C)` rewritten so that `γ = 0` is exact.
pub(crate) fn cavity_chi(g: f64, kappa: f64, gamma: f64) -> f64 {
    if g == 0.0 {
        gamma
    } else {
        gamma + 2.0 * g * g / kappa
    }
}

fn cooperativity(g: f64, kappa: f64, gamma: f64) -> Option<f64> {
    (kappa > 0.0 && gamma > 0.0).then(|| g * g / (kappa * gamma))
}

pub fn derive_cavity_rates(p: &CavityParams) -> Result<DerivedRates> {
    p.validate()?;
    Ok(DerivedRates {
        coop_es: cooperativity(p.g_es, p.kappa_es, p.gamma_es),
        coop_ef: cooperativity(p.g_ef, p.kappa_ef, p.gamma_ef),
        chi_es: cavity_chi(p.g_es, p.kappa_es, p.gamma_es),
        chi_ef: cavity_chi(p.g_ef, p.kappa_ef, p.gamma_ef),
    })
}

pub fn derive_waveguide_rates(p: &WaveguideParams) -> Result<DerivedRates> {
    p.validate()?;
    Ok(DerivedRates {
        coop_es: None,
        coop_ef: None,
        chi_es: p.gamma_es + p.guided_es,
        chi_ef: p.gamma_ef + p.guided_ef,
    })
}

/// Free-space emitter as a waveguide scenario.
///
/// The `F_ef` modes are the only ones on the `e <-> f` transition, so the
/// background rate on that transition is zero by construction.
pub fn free_space_params(
    guided_es: f64,
    gamma_es: f64,
    guided_ef: f64,
    gamma_eo: f64,
) -> Result<WaveguideParams> {
    let p = WaveguideParams {
        guided_es,
        guided_ef,
        gamma_es,
        gamma_ef: 0.0,
        gamma_eo,
    };
    p.validate()?;
    Ok(p)
}
