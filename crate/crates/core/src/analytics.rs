//! Closed-form transfer efficiencies in the adiabatic limit, the
//! impedance-matching condition `χ_es = χ_ef + γ_eo`, and a one-unknown
//! solver for it.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::{
    cavity_chi, derive_cavity_rates, derive_waveguide_rates, CavityParams, Scenario, ScenarioKind,
    WaveguideParams,
};

/// Default factor used to decide "much larger than".
pub const DEFAULT_STRENGTH_FACTOR: f64 = 10.0;
/// Default relative tolerance on the matching condition.
pub const DEFAULT_MATCHING_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitingFactor {
    ImpedanceMismatch,
    BackgroundLoss,
    OtherDecay,
    None,
}

impl fmt::Display for LimitingFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitingFactor::ImpedanceMismatch => "impedance-mismatch",
            LimitingFactor::BackgroundLoss => "background-loss",
            LimitingFactor::OtherDecay => "other-decay",
            LimitingFactor::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    /// Probability that the emitter leaves `|s>`.
    pub eta: f64,
    /// Probability that it ends in `|f>`.
    pub eta_sf: f64,
    pub chi_es: f64,
    pub chi_ef: f64,
    pub gamma_eo: f64,
    /// `χ_es / (χ_ef + γ_eo)`; 1 when matched.
    pub matching_ratio: f64,
    pub limiting_factor: LimitingFactor,
}

/// `4ab / (a + b)²`, equal to 1 exactly when `a = b`.
pub fn mismatch_factor(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s > 0.0 {
        4.0 * a * b / (s * s)
    } else {
        0.0
    }
}

fn report(chi_es: f64, chi_ef: f64, gamma_eo: f64, input_factor: f64) -> Result<EfficiencyReport> {
    let out = chi_ef + gamma_eo;
    if !(chi_es + out > 0.0) {
        return Err(Error::UndefinedEfficiency(
            "all transition rates vanish".into(),
        ));
    }
    let mismatch = mismatch_factor(chi_es, out);
    let branch_f = if out > 0.0 { chi_ef / out } else { 0.0 };
    let eta = mismatch * input_factor;
    let eta_sf = eta * branch_f;

    let candidates = [
        (LimitingFactor::ImpedanceMismatch, input_factor * branch_f),
        (LimitingFactor::BackgroundLoss, mismatch * branch_f),
        (
            LimitingFactor::OtherDecay,
            mismatch_factor(chi_es, chi_ef) * input_factor,
        ),
    ];
    let (factor, best) =
        candidates
            .iter()
            .copied()
            .fold((LimitingFactor::None, eta_sf), |acc, c| {
                if c.1 > acc.1 {
                    c
                } else {
                    acc
                }
            });
    let limiting_factor = if best - eta_sf > 1e-12 {
        factor
    } else {
        LimitingFactor::None
    };

    Ok(EfficiencyReport {
        eta,
        eta_sf,
        chi_es,
        chi_ef,
        gamma_eo,
        matching_ratio: if out > 0.0 {
            chi_es / out
        } else {
            f64::INFINITY
        },
        limiting_factor,
    })
}

/// Efficiency of the cavity scenario,
/// `η = 4 χ_es (χ_ef + γ_eo) / (χ_es + χ_ef + γ_eo)² · 2C_es / (1 + 2C_es)`.
///
/// `2C/(1 + 2C)` is evaluated as `(χ_es - γ_es) / χ_es`, which stays defined
/// when `γ_es = 0`.
pub fn cavity_efficiency(p: &CavityParams) -> Result<EfficiencyReport> {
    let rates = derive_cavity_rates(p)?;
    let coherent = rates.chi_es - p.gamma_es;
    let input_factor = if rates.chi_es > 0.0 {
        coherent / rates.chi_es
    } else {
        0.0
    };
    report(rates.chi_es, rates.chi_ef, p.gamma_eo, input_factor)
}

/// Efficiency of the waveguide (or free-space) scenario,
/// `η = 4 χ_es (χ_ef + γ_eo) / (χ_es + χ_ef + γ_eo)² · Γ_es / (Γ_es + γ_es)`.
pub fn waveguide_efficiency(p: &WaveguideParams) -> Result<EfficiencyReport> {
    let rates = derive_waveguide_rates(p)?;
    let es = p.guided_es + p.gamma_es;
    if !(es > 0.0) {
        return Err(Error::UndefinedEfficiency(
            "Gamma_es + gamma_es must be positive".into(),
        ));
    }
    report(rates.chi_es, rates.chi_ef, p.gamma_eo, p.guided_es / es)
}

pub fn efficiency(s: &Scenario) -> Result<EfficiencyReport> {
    match s {
        Scenario::Cavity(p) => cavity_efficiency(p),
        Scenario::Waveguide(p) => waveguide_efficiency(p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionSettings {
    /// Ratio that counts as "much larger".
    pub factor: f64,
    /// Largest relative matching deviation still counted as matched.
    pub matching_tol: f64,
}

impl Default for ConditionSettings {
    fn default() -> Self {
        Self {
            factor: DEFAULT_STRENGTH_FACTOR,
            matching_tol: DEFAULT_MATCHING_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionVerdicts {
    /// `|χ_es - (χ_ef + γ_eo)| / (χ_es + χ_ef + γ_eo)`
    pub matching_deviation: f64,
    pub matched: bool,
    /// `C_es` for a cavity, `Γ_es / γ_es` for a waveguide.
    pub strength_ratio: f64,
    pub strong: bool,
}

impl ConditionVerdicts {
    pub fn all_pass(&self) -> bool {
        self.matched && self.strong
    }
}

fn ratio_or_inf(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Evaluates the two conditions for near-unit efficiency: impedance matching
/// and dominance of the coherent input channel over background loss.
pub fn check_conditions(
    report: &EfficiencyReport,
    scenario: &Scenario,
    settings: ConditionSettings,
) -> ConditionVerdicts {
    let total = report.chi_es + report.chi_ef + report.gamma_eo;
    let matching_deviation = if total > 0.0 {
        (report.chi_es - report.chi_ef - report.gamma_eo).abs() / total
    } else {
        0.0
    };
    let strength_ratio = match scenario {
        Scenario::Cavity(p) => ratio_or_inf(p.g_es * p.g_es, p.kappa_es * p.gamma_es),
        Scenario::Waveguide(p) => ratio_or_inf(p.guided_es, p.gamma_es),
    };
    ConditionVerdicts {
        matching_deviation,
        matched: matching_deviation <= settings.matching_tol,
        strength_ratio,
        strong: strength_ratio >= settings.factor,
    }
}

/// Parameter left free in [`solve_matching`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreeParameter {
    GEs,
    GEf,
    KappaEs,
    KappaEf,
    GammaEs,
    GammaEf,
    GammaEo,
    /// Γ_es
    GuidedEs,
    /// Γ_ef
    GuidedEf,
}

impl FreeParameter {
    pub const ALL: [FreeParameter; 9] = [
        FreeParameter::GEs,
        FreeParameter::GEf,
        FreeParameter::KappaEs,
        FreeParameter::KappaEf,
        FreeParameter::GammaEs,
        FreeParameter::GammaEf,
        FreeParameter::GammaEo,
        FreeParameter::GuidedEs,
        FreeParameter::GuidedEf,
    ];

    /// Whether the parameter exists in scenarios of this kind.
    pub fn applies_to(&self, kind: ScenarioKind) -> bool {
        use FreeParameter::*;
        match self {
            GammaEs | GammaEf | GammaEo => true,
            GEs | GEf | KappaEs | KappaEf => kind == ScenarioKind::Cavity,
            GuidedEs | GuidedEf => kind == ScenarioKind::Waveguide,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FreeParameter::GEs => "g-es",
            FreeParameter::GEf => "g-ef",
            FreeParameter::KappaEs => "kappa-es",
            FreeParameter::KappaEf => "kappa-ef",
            FreeParameter::GammaEs => "gamma-es",
            FreeParameter::GammaEf => "gamma-ef",
            FreeParameter::GammaEo => "gamma-eo",
            FreeParameter::GuidedEs => "Gamma-es",
            FreeParameter::GuidedEf => "Gamma-ef",
        }
    }
}

impl fmt::Display for FreeParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FreeParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('_', "-");
        FreeParameter::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown parameter `{s}`")))
    }
}

fn infeasible(free: FreeParameter, deficit: f64) -> Error {
    Error::InfeasibleMatching {
        parameter: free.name().to_string(),
        deficit,
    }
}

/// Non-negative value `x` with `x = need`, erroring when `need < 0`.
fn nonneg(free: FreeParameter, need: f64) -> Result<f64> {
    if need < 0.0 {
        Err(infeasible(free, -need))
    } else {
        Ok(need)
    }
}

/// Coupling `g` such that `2g²/κ = need`.
fn coupling_for(free: FreeParameter, kappa: f64, need: f64) -> Result<f64> {
    let need = nonneg(free, need)?;
    if kappa == 0.0 {
        return if need == 0.0 {
            Ok(0.0)
        } else {
            Err(infeasible(free, need))
        };
    }
    Ok((kappa * need / 2.0).sqrt())
}

/// Loss `κ` such that `2g²/κ = need`.
fn loss_for(free: FreeParameter, g: f64, current: f64, need: f64) -> Result<f64> {
    if g == 0.0 {
        return if need == 0.0 {
            Ok(current)
        } else {
            Err(infeasible(free, need.abs()))
        };
    }
    if need <= 0.0 {
        return Err(infeasible(free, -need));
    }
    Ok(2.0 * g * g / need)
}

/// Solves `χ_es = χ_ef + γ_eo` for the one free parameter, holding all
/// others at their values in `scenario`.
pub fn solve_matching(scenario: &Scenario, free: FreeParameter) -> Result<f64> {
    use FreeParameter::*;
    match scenario {
        Scenario::Cavity(p) => {
            p.validate()?;
            let chi_es = cavity_chi(p.g_es, p.kappa_es, p.gamma_es);
            let chi_ef = cavity_chi(p.g_ef, p.kappa_ef, p.gamma_ef);
            let coherent_es = chi_es - p.gamma_es;
            let coherent_ef = chi_ef - p.gamma_ef;
            match free {
                GEs => coupling_for(free, p.kappa_es, chi_ef + p.gamma_eo - p.gamma_es),
                GEf => coupling_for(free, p.kappa_ef, chi_es - p.gamma_ef - p.gamma_eo),
                KappaEs => loss_for(free, p.g_es, p.kappa_es, chi_ef + p.gamma_eo - p.gamma_es),
                KappaEf => loss_for(free, p.g_ef, p.kappa_ef, chi_es - p.gamma_ef - p.gamma_eo),
                GammaEs => nonneg(free, chi_ef + p.gamma_eo - coherent_es),
                GammaEf => nonneg(free, chi_es - p.gamma_eo - coherent_ef),
                GammaEo => nonneg(free, chi_es - chi_ef),
                GuidedEs | GuidedEf => Err(Error::InvalidInput(format!(
                    "`{free}` is not a cavity parameter"
                ))),
            }
        }
        Scenario::Waveguide(p) => {
            p.validate()?;
            let chi_es = p.guided_es + p.gamma_es;
            let chi_ef = p.guided_ef + p.gamma_ef;
            match free {
                GuidedEs => nonneg(free, chi_ef + p.gamma_eo - p.gamma_es),
                GuidedEf => nonneg(free, chi_es - p.gamma_ef - p.gamma_eo),
                GammaEs => nonneg(free, chi_ef + p.gamma_eo - p.guided_es),
                GammaEf => nonneg(free, chi_es - p.gamma_eo - p.guided_ef),
                GammaEo => nonneg(free, chi_es - chi_ef),
                GEs | GEf | KappaEs | KappaEf => Err(Error::InvalidInput(format!(
                    "`{free}` is not a waveguide parameter"
                ))),
            }
        }
    }
}

/// Copy of `scenario` with `free` set to `value`.
pub fn with_parameter(scenario: &Scenario, free: FreeParameter, value: f64) -> Result<Scenario> {
    use FreeParameter::*;
    let mut s = *scenario;
    match &mut s {
        Scenario::Cavity(p) => match free {
            GEs => p.g_es = value,
            GEf => p.g_ef = value,
            KappaEs => p.kappa_es = value,
            KappaEf => p.kappa_ef = value,
            GammaEs => p.gamma_es = value,
            GammaEf => p.gamma_ef = value,
            GammaEo => p.gamma_eo = value,
            GuidedEs | GuidedEf => {
                return Err(Error::InvalidInput(format!(
                    "`{free}` is not a cavity parameter"
                )))
            }
        },
        Scenario::Waveguide(p) => match free {
            GuidedEs => p.guided_es = value,
            GuidedEf => p.guided_ef = value,
            GammaEs => p.gamma_es = value,
            GammaEf => p.gamma_ef = value,
            GammaEo => p.gamma_eo = value,
            GEs | GEf | KappaEs | KappaEf => {
                return Err(Error::InvalidInput(format!(
                    "`{free}` is not a waveguide parameter"
                )))
            }
        },
    }
    Ok(s)
}
