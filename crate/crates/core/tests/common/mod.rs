#![allow(dead_code)]

use qtransfer::dynamics::adiabatic_thresholds;
use qtransfer::params::{CavityParams, Scenario, WaveguideParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform in `[lo, hi]`, or exactly zero with probability `p_zero`.
pub fn rate<R: Rng>(rng: &mut R, lo: f64, hi: f64, p_zero: f64) -> f64 {
    if rng.random_bool(p_zero) {
        0.0
    } else {
        (rng.random_range(lo.ln()..hi.ln())).exp()
    }
}

/// Rates spanning several decades, zeros included; for closed-form checks.
pub fn wide_cavity<R: Rng>(rng: &mut R) -> CavityParams {
    CavityParams {
        g_es: rate(rng, 1e-3, 1e3, 0.05),
        g_ef: rate(rng, 1e-3, 1e3, 0.05),
        kappa_es: rate(rng, 1e-3, 1e3, 0.0),
        kappa_ef: rate(rng, 1e-3, 1e3, 0.0),
        gamma_es: rate(rng, 1e-6, 1e2, 0.1),
        gamma_ef: rate(rng, 1e-6, 1e2, 0.1),
        gamma_eo: rate(rng, 1e-6, 1e2, 0.2),
    }
}

pub fn wide_waveguide<R: Rng>(rng: &mut R) -> WaveguideParams {
    WaveguideParams {
        guided_es: rate(rng, 1e-3, 1e3, 0.05),
        guided_ef: rate(rng, 1e-3, 1e3, 0.05),
        gamma_es: rate(rng, 1e-6, 1e2, 0.1),
        gamma_ef: rate(rng, 1e-6, 1e2, 0.1),
        gamma_eo: rate(rng, 1e-6, 1e2, 0.2),
    }
}

/// Rates of order one, cheap to integrate.
pub fn modest_cavity<R: Rng>(rng: &mut R) -> CavityParams {
    CavityParams {
        g_es: rng.random_range(0.5..2.0),
        g_ef: rng.random_range(0.5..2.0),
        kappa_es: rng.random_range(0.5..2.0),
        kappa_ef: rng.random_range(0.5..2.0),
        gamma_es: rng.random_range(0.0..0.5),
        gamma_ef: rng.random_range(0.0..0.5),
        gamma_eo: rng.random_range(0.0..0.5),
    }
}

pub fn modest_waveguide<R: Rng>(rng: &mut R) -> WaveguideParams {
    WaveguideParams {
        guided_es: rng.random_range(0.5..2.0),
        guided_ef: rng.random_range(0.5..2.0),
        gamma_es: rng.random_range(0.0..0.5),
        gamma_ef: rng.random_range(0.0..0.5),
        gamma_eo: rng.random_range(0.0..0.5),
    }
}

/// Smallest positive rate the photon bandwidth has to stay below.
pub fn slowest_threshold(s: &Scenario) -> f64 {
    match s {
        Scenario::Cavity(p) => adiabatic_thresholds(p)
            .into_iter()
            .filter(|&t| t > 0.0)
            .fold(f64::INFINITY, f64::min),
        Scenario::Waveguide(p) => 0.5 * p.total_decay(),
    }
}

pub fn fig3(g_ef: f64) -> CavityParams {
    CavityParams {
        g_es: 1.0,
        g_ef,
        kappa_es: 1.0,
        kappa_ef: 1.0,
        gamma_es: 1e-9,
        gamma_ef: 1e-9,
        gamma_eo: 0.0,
    }
}

pub fn fig4(guided_ef: f64) -> WaveguideParams {
    WaveguideParams {
        guided_es: 1.0,
        guided_ef,
        ..Default::default()
    }
}
