//! Temporal envelopes `f_in(t)` of the incoming single photon.
//!
//! Analytic envelopes are centred at `t = 0` and normalised so that
//! `∫|f_in|² dt = 1`. Their nominal `delta_omega` coincides with the rms
//! bandwidth `sqrt(∫|f'|² / ∫|f|²)`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_real, QuadSettings};

/// Half-width of the integration window for analytic envelopes, in units of `1/Δω`.
pub const SUPPORT_HALF_WIDTH: f64 = 10.0;

/// Declared in name order, so sorting kinds sorts their names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PulseKind {
    Antisymmetric,
    Gaussian,
    Tabulated,
}

impl fmt::Display for PulseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PulseKind::Gaussian => "gaussian",
            PulseKind::Antisymmetric => "antisymmetric",
            PulseKind::Tabulated => "tabulated",
        })
    }
}

impl FromStr for PulseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(PulseKind::Gaussian),
            "antisymmetric" => Ok(PulseKind::Antisymmetric),
            "tabulated" => Ok(PulseKind::Tabulated),
            other => Err(Error::InvalidInput(format!("unknown envelope `{other}`"))),
        }
    }
}

/// Samples of a complex envelope on a strictly increasing time grid,
/// linearly interpolated in between and zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    times: Vec<f64>,
    values: Vec<Complex64>,
}

impl Tabulated {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidInput(
                "a tabulated envelope needs at least two samples".into(),
            ));
        }
        if times
            .iter()
            .chain(values.iter().flat_map(|v| [&v.re, &v.im]))
            .any(|x| !x.is_finite())
        {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "sample times must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    /// Parses `time,re[,im]` rows. A non-numeric first line is taken as a header;
    /// blank lines and `#` comments are skipped.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut first = true;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().map(|f| f.parse::<f64>()).collect();
            let nums = match parsed {
                Ok(nums) => nums,
                Err(_) if first => {
                    first = false;
                    continue;
                }
                Err(e) => {
                    return Err(Error::InvalidInput(format!(
                        "line {}: {e}: `{line}`",
                        lineno + 1
                    )))
                }
            };
            first = false;
            match nums.as_slice() {
                [t, re] => {
                    times.push(*t);
                    values.push(Complex64::new(*re, 0.0));
                }
                [t, re, im] => {
                    times.push(*t);
                    values.push(Complex64::new(*re, *im));
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "line {}: expected 2 or 3 columns, got {}",
                        lineno + 1,
                        nums.len()
                    )))
                }
            }
        }
        Self::new(times, values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    fn eval(&self, t: f64) -> Complex64 {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let hi = self.times.partition_point(|&x| x < t);
        if hi == 0 {
            return self.values[0];
        }
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        self.values[lo] * (1.0 - w) + self.values[hi] * w
    }

    /// Exact `∫|f|²` of the piecewise-linear interpolant.
    fn norm_squared(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| {
                let h = t[1] - t[0];
                h / 3.0 * (v[0].norm_sqr() + (v[0] * v[1].conj()).re + v[1].norm_sqr())
            })
            .sum()
    }

    /// Central differences in the interior, one-sided at the ends.
    fn derivative(&self) -> Vec<Complex64> {
        let (t, v) = (&self.times, &self.values);
        let n = t.len();
        (0..n)
            .map(|i| {
                let (a, b) = match i {
                    0 => (0, 1),
                    i if i == n - 1 => (n - 2, n - 1),
                    i => (i - 1, i + 1),
                };
                (v[b] - v[a]) / (t[b] - t[a])
            })
            .collect()
    }
}

/// Incoming single-photon amplitude `f_in(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseEnvelope {
    /// `(2Δω²/π)^(1/4) exp(-Δω² t²)`
    Gaussian {
        delta_omega: f64,
    },
    /// `2 (2/π)^(1/4) Δω^(3/2) t exp(-Δω² t²/3) / 3^(3/4)`
    Antisymmetric {
        delta_omega: f64,
    },
    Tabulated(Tabulated),
}

impl PulseEnvelope {
    pub fn gaussian(delta_omega: f64) -> Result<Self> {
        check_delta_omega(delta_omega)?;
        Ok(Self::Gaussian { delta_omega })
    }

    pub fn antisymmetric(delta_omega: f64) -> Result<Self> {
        check_delta_omega(delta_omega)?;
        Ok(Self::Antisymmetric { delta_omega })
    }

    pub fn analytic(kind: PulseKind, delta_omega: f64) -> Result<Self> {
        match kind {
            PulseKind::Gaussian => Self::gaussian(delta_omega),
            PulseKind::Antisymmetric => Self::antisymmetric(delta_omega),
            PulseKind::Tabulated => Err(Error::InvalidInput(
                "tabulated envelopes are built from samples".into(),
            )),
        }
    }

    pub fn kind(&self) -> PulseKind {
        match self {
            Self::Gaussian { .. } => PulseKind::Gaussian,
            Self::Antisymmetric { .. } => PulseKind::Antisymmetric,
            Self::Tabulated(_) => PulseKind::Tabulated,
        }
    }

    /// Nominal bandwidth parameter of analytic kinds.
    pub fn nominal_delta_omega(&self) -> Option<f64> {
        match *self {
            Self::Gaussian { delta_omega } | Self::Antisymmetric { delta_omega } => {
                Some(delta_omega)
            }
            Self::Tabulated(_) => None,
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match *self {
            Self::Gaussian { delta_omega: w } => {
                let amp = (2.0 * w * w / PI).powf(0.25);
                Complex64::new(amp * (-w * w * t * t).exp(), 0.0)
            }
            Self::Antisymmetric { delta_omega: w } => Complex64::new(
                antisymmetric_prefactor(w) * t * (-w * w * t * t / 3.0).exp(),
                0.0,
            ),
            Self::Tabulated(ref tab) => tab.eval(t),
        }
    }

    fn derivative_analytic(&self, t: f64) -> f64 {
        match *self {
            Self::Gaussian { delta_omega: w } => {
                let amp = (2.0 * w * w / PI).powf(0.25);
                -2.0 * w * w * t * amp * (-w * w * t * t).exp()
            }
            Self::Antisymmetric { delta_omega: w } => {
                antisymmetric_prefactor(w)
                    * (1.0 - 2.0 * w * w * t * t / 3.0)
                    * (-w * w * t * t / 3.0).exp()
            }
            Self::Tabulated(_) => unreachable!("tabulated derivative is taken on the grid"),
        }
    }

    /// Time window outside of which the envelope is treated as zero.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Gaussian { delta_omega } | Self::Antisymmetric { delta_omega } => {
                let half = SUPPORT_HALF_WIDTH / delta_omega;
                (-half, half)
            }
            Self::Tabulated(tab) => (tab.times[0], tab.times[tab.len() - 1]),
        }
    }

    /// Samples the envelope at `n` equally spaced points on `[t0, t1]`.
    pub fn tabulate(&self, t0: f64, t1: f64, n: usize) -> Result<Tabulated> {
        if n < 2 || t1 <= t0 {
            return Err(Error::InvalidInput(format!(
                "cannot sample {n} points on [{t0}, {t1}]"
            )));
        }
        let dt = (t1 - t0) / (n - 1) as f64;
        let times: Vec<f64> = (0..n).map(|i| t0 + i as f64 * dt).collect();
        let values = times.iter().map(|&t| self.eval(t)).collect();
        Tabulated::new(times, values)
    }

    /// Rate that bounds the fastest variation of the envelope, used for step
    /// control. Zero for an identically vanishing tabulated envelope.
    pub fn rate_scale(&self) -> f64 {
        match self {
            Self::Gaussian { delta_omega } | Self::Antisymmetric { delta_omega } => *delta_omega,
            Self::Tabulated(_) => bandwidth(self).unwrap_or(0.0),
        }
    }
}

fn antisymmetric_prefactor(w: f64) -> f64 {
    2.0 * (2.0 / PI).powf(0.25) * w.powf(1.5) / 3f64.powf(0.75)
}

fn check_delta_omega(delta_omega: f64) -> Result<()> {
    if !(delta_omega.is_finite() && delta_omega > 0.0) {
        return Err(Error::InvalidInput(format!(
            "bandwidth must be positive and finite, got {delta_omega}"
        )));
    }
    Ok(())
}

/// `∫|f_in|² dt` to absolute accuracy `tol`.
///
/// Analytic kinds use adaptive quadrature over their support; tabulated
/// envelopes are integrated exactly as piecewise-linear functions.
pub fn norm_squared(env: &PulseEnvelope, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    match env {
        PulseEnvelope::Tabulated(tab) => Ok(tab.norm_squared()),
        _ => {
            let (a, b) = env.support();
            let (v, _) = integrate_real(
                |t| env.eval(t).norm_sqr(),
                a,
                b,
                QuadSettings::with_tol(tol),
            )?;
            Ok(v)
        }
    }
}

/// RMS bandwidth `sqrt(∫|f'|² dt / ∫|f|² dt)`.
pub fn bandwidth(env: &PulseEnvelope) -> Result<f64> {
    let (num, den) = match env {
        PulseEnvelope::Tabulated(tab) => {
            if tab.len() < 3 {
                return Err(Error::InvalidInput(
                    "bandwidth of a tabulated envelope needs at least three samples".into(),
                ));
            }
            let d = tab.derivative();
            let num: f64 = tab
                .times
                .windows(2)
                .zip(d.windows(2))
                .map(|(t, d)| 0.5 * (t[1] - t[0]) * (d[0].norm_sqr() + d[1].norm_sqr()))
                .sum();
            (num, tab.norm_squared())
        }
        _ => {
            let (a, b) = env.support();
            let settings = QuadSettings::with_tol(1e-14);
            let (num, _) = integrate_real(|t| env.derivative_analytic(t).powi(2), a, b, settings)?;
            let (den, _) = integrate_real(|t| env.eval(t).norm_sqr(), a, b, settings)?;
            (num, den)
        }
    };
    if !(den > 0.0) {
        return Err(Error::InvalidInput("envelope has zero norm".into()));
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gaussian_peak_value() {
        let env = PulseEnvelope::gaussian(1.0).unwrap();
        let expected = (2.0 / PI).powf(0.25);
        assert!((env.eval(0.0).re - expected).abs() < 1e-15);
        assert!((expected - 0.893244).abs() < 1e-6);
        assert!(env.eval(40.0).norm() < 1e-300);
        assert!(env.eval(-40.0).norm() < 1e-300);
    }

    #[test]
    fn antisymmetric_vanishes_at_origin() {
        for w in [0.01, 1.0, 7.0] {
            assert_eq!(
                PulseEnvelope::antisymmetric(w).unwrap().eval(0.0).norm(),
                0.0
            );
        }
    }

    #[test]
    fn analytic_envelopes_are_normalised() {
        let g = PulseEnvelope::gaussian(0.37).unwrap();
        assert!((norm_squared(&g, 1e-10).unwrap() - 1.0).abs() < 1e-8);
        let a = PulseEnvelope::antisymmetric(2.0).unwrap();
        assert!((norm_squared(&a, 1e-10).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tabulated_copy_of_gaussian_is_normalised() {
        let w = 1.3;
        let g = PulseEnvelope::gaussian(w).unwrap();
        let tab = PulseEnvelope::Tabulated(g.tabulate(-10.0 / w, 10.0 / w, 4096).unwrap());
        assert!((norm_squared(&tab, 1e-10).unwrap() - 1.0).abs() < 1e-5);
        // bandwidth from central differences stays close as well
        assert!((bandwidth(&tab).unwrap() - w).abs() < 1e-4);
    }

    #[test]
    fn bandwidth_equals_nominal() {
        for w in [0.05, 1.0, 3.0] {
            for kind in [PulseKind::Gaussian, PulseKind::Antisymmetric] {
                let env = PulseEnvelope::analytic(kind, w).unwrap();
                let bw = bandwidth(&env).unwrap();
                assert!((bw - w).abs() < 1e-6, "{kind} {w}: {bw}");
            }
        }
    }

    #[test]
    fn tabulated_interpolation_and_range() {
        let tab = Tabulated::new(
            vec![0.0, 1.0, 3.0],
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(2.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let env = PulseEnvelope::Tabulated(tab);
        assert_eq!(env.eval(0.5), Complex64::new(1.0, 0.5));
        assert_eq!(env.eval(2.0), Complex64::new(1.0, 0.5));
        assert_eq!(env.eval(-0.1), Complex64::new(0.0, 0.0));
        assert_eq!(env.eval(3.1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn tabulated_validation() {
        let c = Complex64::new(1.0, 0.0);
        assert!(Tabulated::new(vec![0.0, 0.0], vec![c, c]).is_err());
        assert!(Tabulated::new(vec![0.0], vec![c]).is_err());
        let two = PulseEnvelope::Tabulated(Tabulated::new(vec![0.0, 1.0], vec![c, c]).unwrap());
        assert!(matches!(bandwidth(&two), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn csv_parsing() {
        let tab = Tabulated::from_csv_str("t,re,im\n0,0,0\n1,1,0.5\n# comment\n\n2,0,0\n").unwrap();
        assert_eq!(tab.len(), 3);
        assert_eq!(tab.values()[1], Complex64::new(1.0, 0.5));
        let tab = Tabulated::from_csv_str("0,1\n1,2\n").unwrap();
        assert_eq!(tab.values()[1], Complex64::new(2.0, 0.0));
        assert!(Tabulated::from_csv_str("0,1\nx,2\n").is_err());
        assert!(Tabulated::from_csv_str("0,1,2,3\n1,2,3,4\n").is_err());
    }

    #[test]
    fn bad_delta_omega_rejected() {
        assert!(PulseEnvelope::gaussian(0.0).is_err());
        assert!(PulseEnvelope::antisymmetric(-1.0).is_err());
        assert!(PulseEnvelope::gaussian(f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn antisymmetry(w in 1e-3..10.0f64, t in -100.0..100.0f64) {
            let env = PulseEnvelope::antisymmetric(w).unwrap();
            prop_assert_eq!(env.eval(-t), -env.eval(t));
        }

        #[test]
        fn bandwidth_scales_with_nominal(s in 1e-2..5.0f64) {
            for kind in [PulseKind::Gaussian, PulseKind::Antisymmetric] {
                let unit = bandwidth(&PulseEnvelope::analytic(kind, 1.0).unwrap()).unwrap();
                let scaled = bandwidth(&PulseEnvelope::analytic(kind, s).unwrap()).unwrap();
                prop_assert!(((scaled - s * unit) / (s * unit)).abs() < 1e-6);
            }
        }
    }
}
