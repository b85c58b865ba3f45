//! Time evolution of the single-excitation amplitudes.
//!
//! The cavity scenario evolves the three amplitudes of `|S>` (photon in the
//! input mode), `|E>` (excited emitter) and `|F>` (photon in the output mode)
//! under `dψ/dt = -i G ψ + |S> sqrt(2 κ_es) f_in(t)`. The waveguide scenario
//! evolves the single excited-state amplitude under
//! `dψ_e/dt = -R/2 ψ_e + i sqrt(Γ_es) f_in(t)`.
//!
//! Both are integrated with a classical fixed-step RK4 scheme. Channel
//! probabilities are carried as extra ODE components so they are
//! integrated to the same order as the amplitudes. After the input window
//! ends, the free decay is followed until the remaining norm is negligible.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{cavity_chi, CavityParams, WaveguideParams};
use crate::propagator::eigenvalues3;
use crate::pulses::PulseEnvelope;
use crate::quadrature::{integrate, QuadSettings};

/// Largest allowed `step` times the fastest rate of the dynamics.
pub const STEP_FACTOR: f64 = 0.05;
pub const DEFAULT_STOP_NORM: f64 = 1e-12;
/// Free-decay steps allowed after the input window before giving up.
pub const MAX_TAIL_STEPS: usize = 1_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CavityState {
    pub psi_s: Complex64,
    pub psi_e: Complex64,
    pub psi_f: Complex64,
}

impl CavityState {
    pub fn new(psi_s: Complex64, psi_e: Complex64, psi_f: Complex64) -> Self {
        Self {
            psi_s,
            psi_e,
            psi_f,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi_s.norm_sqr() + self.psi_e.norm_sqr() + self.psi_f.norm_sqr()
    }
}

impl From<CavityState> for Vector3<Complex64> {
    fn from(s: CavityState) -> Self {
        Vector3::new(s.psi_s, s.psi_e, s.psi_f)
    }
}

impl From<Vector3<Complex64>> for CavityState {
    fn from(v: Vector3<Complex64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub step: f64,
    /// Free decay after `t_end` continues until `‖ψ‖²` drops below this.
    pub stop_norm: f64,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, step: f64) -> Result<Self> {
        let grid = Self {
            t_start,
            t_end,
            step,
            stop_norm: DEFAULT_STOP_NORM,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_stop_norm(mut self, stop_norm: f64) -> Self {
        self.stop_norm = stop_norm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_start < self.t_end) {
            return Err(Error::InvalidGrid(format!(
                "need t_start < t_end, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.stop_norm > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "stop_norm must be positive, got {}",
                self.stop_norm
            )));
        }
        Ok(())
    }

    /// Envelope support with the coarsest step allowed for `max_rate`
    /// (the fastest rate of the dynamics).
    pub fn for_envelope(env: &PulseEnvelope, max_rate: f64) -> Result<Self> {
        let (t_start, t_end) = env.support();
        Self::new(t_start, t_end, max_step(max_rate, env))
    }

    pub fn for_cavity(p: &CavityParams, env: &PulseEnvelope) -> Result<Self> {
        Self::for_envelope(env, cavity_rate_scale(p))
    }

    pub fn for_waveguide(p: &WaveguideParams, env: &PulseEnvelope) -> Result<Self> {
        Self::for_envelope(env, waveguide_rate_scale(p))
    }
}

fn max_step(max_rate: f64, env: &PulseEnvelope) -> f64 {
    STEP_FACTOR / max_rate.max(env.rate_scale())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Amplitudes {
    Cavity(Vec<CavityState>),
    Waveguide(Vec<Complex64>),
}

impl Amplitudes {
    pub fn len(&self) -> usize {
        match self {
            Amplitudes::Cavity(v) => v.len(),
            Amplitudes::Waveguide(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn norm_sqr(&self, k: usize) -> f64 {
        match self {
            Amplitudes::Cavity(v) => v[k].norm_sqr(),
            Amplitudes::Waveguide(v) => v[k].norm_sqr(),
        }
    }
}

/// Sampled amplitudes with the input amplitude at the same times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Amplitudes,
    pub input_values: Vec<Complex64>,
}

/// Channel-resolved probabilities accumulated over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutcome {
    /// `s -> f` transfer probability.
    pub p_sf: f64,
    /// Decay into levels other than `s` and `f`.
    pub p_other: f64,
    /// Background emission on `e -> s` (the emitter returns to `s`).
    pub p_back_bg: f64,
    /// `‖ψ‖²` when integration stopped.
    pub residual_norm: f64,
    /// `∫|f_in|²` over the input window.
    pub input_norm: f64,
    /// Bandwidth divided by each adiabatic threshold.
    pub adiabaticity: Vec<f64>,
    pub steps: usize,
}

impl TransferOutcome {
    /// Probability that the emitter left `|s>` (ends in `f` or elsewhere).
    pub fn p_leave_s(&self) -> f64 {
        self.p_sf + self.p_other
    }

    /// Remainder returned to the input reservoir, by bookkeeping.
    pub fn p_back_fiber(&self) -> f64 {
        self.input_norm - self.p_sf - self.p_other - self.p_back_bg - self.residual_norm
    }

    pub fn max_adiabaticity(&self) -> f64 {
        self.adiabaticity.iter().copied().fold(0.0, f64::max)
    }
}

/// Non-Hermitian generator `G` in the basis order `(S, E, F)`.
pub fn generator_matrix(p: &CavityParams) -> Matrix3<Complex64> {
    let mut g = Matrix3::<Complex64>::zeros();
    // i (g_es |S><E| + g_ef |F><E| - h.c.)
    g[(0, 1)] = I * p.g_es;
    g[(1, 0)] = -I * p.g_es;
    g[(2, 1)] = I * p.g_ef;
    g[(1, 2)] = -I * p.g_ef;
    g[(0, 0)] = -I * p.kappa_es;
    g[(2, 2)] = -I * p.kappa_ef;
    g[(1, 1)] = -I * (0.5 * (p.gamma_es + p.gamma_ef + p.gamma_eo));
    g
}

/// Rates the photon bandwidth must stay well below for the emitter to
/// follow the envelope adiabatically: `{κ_es, |λ₊|, |λ₋|}`.
pub fn adiabatic_thresholds(p: &CavityParams) -> [f64; 3] {
    let half_gamma = 0.5 * (p.gamma_es + p.gamma_ef);
    let centre = 0.5 * (p.kappa_es + half_gamma);
    let offset = 0.5 * (p.kappa_es - half_gamma);
    let disc = Complex64::new(offset * offset - p.g_es * p.g_es - p.g_ef * p.g_ef, 0.0).sqrt();
    [p.kappa_es, (centre + disc).norm(), (centre - disc).norm()]
}

/// Fastest rate in the cavity dynamics: the largest of the bare rates, the
/// transition rates `χ` and the moduli of the generator eigenvalues. The
/// integration step is bounded by `STEP_FACTOR` over this (or over `Δω` if larger).
pub fn cavity_rate_scale(p: &CavityParams) -> f64 {
    let chi_es = cavity_chi(p.g_es, p.kappa_es, p.gamma_es);
    let chi_ef = cavity_chi(p.g_ef, p.kappa_ef, p.gamma_ef);
    eigenvalues3(&generator_matrix(p))
        .iter()
        .map(|z| z.norm())
        .fold(p.max_rate().max(chi_es).max(chi_ef), f64::max)
}

/// Fastest rate in the waveguide dynamics: the total decay rate.
pub fn waveguide_rate_scale(p: &WaveguideParams) -> f64 {
    p.max_rate().max(p.total_decay())
}

/// Waveguide counterpart of [`adiabatic_thresholds`]: half the total decay rate.
pub fn waveguide_adiabatic_threshold(p: &WaveguideParams) -> f64 {
    0.5 * p.total_decay()
}

fn ratio(delta_omega: f64, threshold: f64) -> f64 {
    if threshold > 0.0 {
        delta_omega / threshold
    } else if delta_omega > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// `dψ/dt = A ψ + b f(t)` together with three probability channels, each a
/// weighted sum of `|ψ_k|²`.
struct DrivenSystem<const N: usize> {
    a: SMatrix<Complex64, N, N>,
    b: SVector<Complex64, N>,
    channels: [SVector<f64, N>; 3],
}

#[derive(Clone, Copy)]
struct Point<const N: usize> {
    psi: SVector<Complex64, N>,
    // p_sf, p_other, p_back_bg, input norm
    acc: [f64; 4],
}

impl<const N: usize> DrivenSystem<N> {
    fn rhs(&self, psi: &SVector<Complex64, N>, f: Complex64) -> (SVector<Complex64, N>, [f64; 4]) {
        let dpsi = self.a * psi + self.b * f;
        let pop = psi.map(|z| z.norm_sqr());
        (
            dpsi,
            [
                self.channels[0].dot(&pop),
                self.channels[1].dot(&pop),
                self.channels[2].dot(&pop),
                f.norm_sqr(),
            ],
        )
    }

    fn rk4(&self, x: &Point<N>, h: f64, f0: Complex64, fm: Complex64, f1: Complex64) -> Point<N> {
        let hc = Complex64::new(h, 0.0);
        let (k1, a1) = self.rhs(&x.psi, f0);
        let (k2, a2) = self.rhs(&(x.psi + k1 * (hc * 0.5)), fm);
        let (k3, a3) = self.rhs(&(x.psi + k2 * (hc * 0.5)), fm);
        let (k4, a4) = self.rhs(&(x.psi + k3 * hc), f1);
        let psi = x.psi + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0);
        let mut acc = x.acc;
        for j in 0..4 {
            acc[j] += h / 6.0 * (a1[j] + 2.0 * (a2[j] + a3[j]) + a4[j]);
        }
        Point { psi, acc }
    }

    /// Integrates from `ψ(t_start) = 0` through the input window and the
    /// free-decay tail, reporting every point to `observe`.
    fn run<O>(
        &self,
        env: &PulseEnvelope,
        grid: &TimeGrid,
        mut observe: O,
    ) -> Result<(Point<N>, usize)>
    where
        O: FnMut(usize, f64, &SVector<Complex64, N>, Complex64),
    {
        let span = grid.t_end - grid.t_start;
        let n_steps = (span / grid.step).ceil().max(1.0) as usize;
        let h = span / n_steps as f64;
        let time = |k: usize| grid.t_start + k as f64 * h;

        let mut x = Point {
            psi: SVector::zeros(),
            acc: [0.0; 4],
        };
        let mut f_here = env.eval(grid.t_start);
        observe(0, grid.t_start, &x.psi, f_here);
        for k in 0..n_steps {
            let t = time(k);
            let f_mid = env.eval(t + 0.5 * h);
            let f_next = if k + 1 == n_steps {
                env.eval(grid.t_end)
            } else {
                env.eval(time(k + 1))
            };
            x = self.rk4(&x, h, f_here, f_mid, f_next);
            f_here = f_next;
            observe(
                k + 1,
                if k + 1 == n_steps {
                    grid.t_end
                } else {
                    time(k + 1)
                },
                &x.psi,
                f_here,
            );
        }

        let mut steps = n_steps;
        let mut tail = 0;
        while x.psi.norm_squared() >= grid.stop_norm {
            if tail == MAX_TAIL_STEPS {
                return Err(Error::NumericFailure(format!(
                    "state norm² {:e} still above {:e} after {MAX_TAIL_STEPS} free-decay steps",
                    x.psi.norm_squared(),
                    grid.stop_norm
                )));
            }
            x = self.rk4(&x, h, ZERO, ZERO, ZERO);
            tail += 1;
            steps += 1;
            observe(steps, grid.t_end + tail as f64 * h, &x.psi, ZERO);
        }
        Ok((x, steps))
    }
}

fn check_step(grid: &TimeGrid, max_rate: f64, env: &PulseEnvelope) -> Result<()> {
    grid.validate()?;
    let bound = max_step(max_rate, env);
    if grid.step > bound * (1.0 + 1e-12) {
        return Err(Error::InvalidGrid(format!(
            "step {} exceeds the bound {bound} = {STEP_FACTOR}/fastest rate",
            grid.step
        )));
    }
    Ok(())
}

fn cavity_system(p: &CavityParams) -> DrivenSystem<3> {
    DrivenSystem {
        a: generator_matrix(p) * (-I),
        b: Vector3::new(Complex64::new((2.0 * p.kappa_es).sqrt(), 0.0), ZERO, ZERO),
        channels: [
            Vector3::new(0.0, p.gamma_ef, 2.0 * p.kappa_ef),
            Vector3::new(0.0, p.gamma_eo, 0.0),
            Vector3::new(0.0, p.gamma_es, 0.0),
        ],
    }
}

fn waveguide_system(p: &WaveguideParams) -> DrivenSystem<1> {
    DrivenSystem {
        a: SMatrix::from_element(Complex64::new(-0.5 * p.total_decay(), 0.0)),
        b: SVector::from_element(I * p.guided_es.sqrt()),
        channels: [
            SVector::from_element(p.guided_ef + p.gamma_ef),
            SVector::from_element(p.gamma_eo),
            SVector::from_element(p.gamma_es),
        ],
    }
}

fn outcome<const N: usize>(end: Point<N>, steps: usize, adiabaticity: Vec<f64>) -> TransferOutcome {
    TransferOutcome {
        p_sf: end.acc[0],
        p_other: end.acc[1],
        p_back_bg: end.acc[2],
        residual_norm: end.psi.norm_squared(),
        input_norm: end.acc[3],
        adiabaticity,
        steps,
    }
}

fn cavity_adiabaticity(p: &CavityParams, env: &PulseEnvelope) -> Vec<f64> {
    let bw = env.rate_scale();
    adiabatic_thresholds(p)
        .iter()
        .map(|&th| ratio(bw, th))
        .collect()
}

fn waveguide_adiabaticity(p: &WaveguideParams, env: &PulseEnvelope) -> Vec<f64> {
    vec![ratio(env.rate_scale(), waveguide_adiabatic_threshold(p))]
}

/// Cavity run recording every `stride`-th point (the last point is always kept).
pub fn simulate_cavity_every(
    p: &CavityParams,
    env: &PulseEnvelope,
    grid: &TimeGrid,
    stride: usize,
) -> Result<(Trajectory, TransferOutcome)> {
    p.validate_for_simulation()?;
    check_step(grid, cavity_rate_scale(p), env)?;
    let stride = stride.max(1);
    let (mut times, mut states, mut inputs) = (Vec::new(), Vec::new(), Vec::new());
    let mut last = None;
    let (end, steps) = cavity_system(p).run(env, grid, |k, t, psi, f| {
        if k % stride == 0 {
            times.push(t);
            states.push(CavityState::from(*psi));
            inputs.push(f);
            last = None;
        } else {
            last = Some((t, CavityState::from(*psi), f));
        }
    })?;
    if let Some((t, s, f)) = last {
        times.push(t);
        states.push(s);
        inputs.push(f);
    }
    let traj = Trajectory {
        times,
        states: Amplitudes::Cavity(states),
        input_values: inputs,
    };
    Ok((traj, outcome(end, steps, cavity_adiabaticity(p, env))))
}

/// Integrates the driven cavity dynamics from `ψ = 0` and accumulates the
/// channel probabilities.
pub fn simulate_cavity(
    p: &CavityParams,
    env: &PulseEnvelope,
    grid: &TimeGrid,
) -> Result<(Trajectory, TransferOutcome)> {
    simulate_cavity_every(p, env, grid, 1)
}

/// Like [`simulate_cavity`] without keeping the trajectory.
pub fn transfer_cavity(
    p: &CavityParams,
    env: &PulseEnvelope,
    grid: &TimeGrid,
) -> Result<TransferOutcome> {
    p.validate_for_simulation()?;
    check_step(grid, cavity_rate_scale(p), env)?;
    let (end, steps) = cavity_system(p).run(env, grid, |_, _, _, _| {})?;
    Ok(outcome(end, steps, cavity_adiabaticity(p, env)))
}

/// Undriven cavity evolution from `state` by `steps` fixed RK4 steps of size `h`.
pub fn evolve_cavity_free(
    p: &CavityParams,
    state: CavityState,
    h: f64,
    steps: usize,
) -> Result<CavityState> {
    p.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "step must be positive and finite, got {h}"
        )));
    }
    let sys = cavity_system(p);
    let mut x = Point {
        psi: Vector3::from(state),
        acc: [0.0; 4],
    };
    for _ in 0..steps {
        x = sys.rk4(&x, h, ZERO, ZERO, ZERO);
    }
    Ok(CavityState::from(x.psi))
}

pub fn simulate_waveguide_every(
    p: &WaveguideParams,
    env: &PulseEnvelope,
    grid: &TimeGrid,
    stride: usize,
) -> Result<(Trajectory, TransferOutcome)> {
    p.validate_for_simulation()?;
    check_step(grid, waveguide_rate_scale(p), env)?;
    let stride = stride.max(1);
    let (mut times, mut states, mut inputs) = (Vec::new(), Vec::new(), Vec::new());
    let mut last = None;
    let (end, steps) = waveguide_system(p).run(env, grid, |k, t, psi, f| {
        if k % stride == 0 {
            times.push(t);
            states.push(psi[0]);
            inputs.push(f);
            last = None;
        } else {
            last = Some((t, psi[0], f));
        }
    })?;
    if let Some((t, s, f)) = last {
        times.push(t);
        states.push(s);
        inputs.push(f);
    }
    let traj = Trajectory {
        times,
        states: Amplitudes::Waveguide(states),
        input_values: inputs,
    };
    Ok((traj, outcome(end, steps, waveguide_adiabaticity(p, env))))
}

/// Integrates the excited-state amplitude of a waveguide-coupled emitter.
pub fn simulate_waveguide(
    p: &WaveguideParams,
    env: &PulseEnvelope,
    grid: &TimeGrid,
) -> Result<(Trajectory, TransferOutcome)> {
    simulate_waveguide_every(p, env, grid, 1)
}

pub fn transfer_waveguide(
    p: &WaveguideParams,
    env: &PulseEnvelope,
    grid: &TimeGrid,
) -> Result<TransferOutcome> {
    p.validate_for_simulation()?;
    check_step(grid, waveguide_rate_scale(p), env)?;
    let (end, steps) = waveguide_system(p).run(env, grid, |_, _, _, _| {})?;
    Ok(outcome(end, steps, waveguide_adiabaticity(p, env)))
}

/// Excited-state amplitude as the convolution
/// `i sqrt(Γ_es) ∫ exp(-R (t - t') / 2) f_in(t') dt'` from `t_start` to `t`.
///
/// The input is taken to vanish after `t_end`, matching the integrator.
pub fn waveguide_amplitude_between(
    p: &WaveguideParams,
    env: &PulseEnvelope,
    t_start: f64,
    t_end: f64,
    t: f64,
) -> Result<Complex64> {
    p.validate()?;
    let upper = t.min(t_end);
    if upper <= t_start {
        return Ok(ZERO);
    }
    let half_rate = 0.5 * p.total_decay();
    // The kernel can be far narrower than the window; split at a few kernel
    // lengths before `upper` so the adaptive rule cannot step over it.
    let mut cuts = vec![t_start];
    if half_rate > 0.0 {
        for k in [64.0, 16.0, 4.0] {
            let c = upper - k / half_rate;
            if c > *cuts.last().unwrap() {
                cuts.push(c);
            }
        }
    }
    cuts.push(upper);
    let settings = QuadSettings::with_tol(1e-10 / (cuts.len() - 1) as f64);
    let mut integral = ZERO;
    for w in cuts.windows(2) {
        integral += integrate(
            |tp| (-half_rate * (t - tp)).exp() * env.eval(tp),
            w[0],
            w[1],
            settings,
        )?
        .value;
    }
    Ok(I * p.guided_es.sqrt() * integral)
}

/// [`waveguide_amplitude_between`] over the envelope's own support.
pub fn waveguide_amplitude_analytic(
    p: &WaveguideParams,
    env: &PulseEnvelope,
    t: f64,
) -> Result<Complex64> {
    let (t0, t1) = env.support();
    waveguide_amplitude_between(p, env, t0, t1, t)
}
