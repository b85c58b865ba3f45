//! Bandwidth sweeps: transfer probability versus `Δω` for each envelope,
//! next to the adiabatic-limit efficiency.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analytics::{efficiency, with_parameter, FreeParameter};
use crate::batch::{try_map, Execution};
use crate::dynamics::{transfer_cavity, transfer_waveguide, TimeGrid, TransferOutcome};
use crate::error::{Error, Result};
use crate::output::fmt_num;
use crate::params::{CavityParams, Scenario, ScenarioKind, WaveguideParams};
use crate::pulses::{PulseEnvelope, PulseKind};

pub const CSV_HEADER: &str = "delta_omega,envelope,P_numeric,eta_analytic,rel_dev,adiabaticity_max";

/// Logarithmically spaced `Δω` values, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self {
            min: 1e-3,
            max: 1.0,
            count: 25,
        }
    }
}

impl LogGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) || self.count < 2 {
            return Err(Error::InvalidInput(format!(
                "need 0 < min < max and count >= 2, got min={} max={} count={}",
                self.min, self.max, self.count
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let ratio = (self.max / self.min).ln();
        let last = self.count - 1;
        (0..self.count)
            .map(|i| match i {
                0 => self.min,
                i if i == last => self.max,
                i => self.min * (ratio * i as f64 / last as f64).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub envelopes: Vec<PulseKind>,
    pub delta_omega: LogGrid,
    pub output_path: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            envelopes: vec![PulseKind::Gaussian, PulseKind::Antisymmetric],
            delta_omega: LogGrid::default(),
            output_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.delta_omega.validate()?;
        if self.envelopes.is_empty() {
            return Err(Error::InvalidInput("no envelopes to sweep".into()));
        }
        if self.envelopes.contains(&PulseKind::Tabulated) {
            return Err(Error::InvalidInput(
                "sweeps take analytic envelopes only".into(),
            ));
        }
        match &self.scenario {
            Scenario::Cavity(p) => p.validate_for_simulation(),
            Scenario::Waveguide(p) => p.validate_for_simulation(),
        }
    }

    /// Parses a flat `key = value` file; `#` starts a comment.
    ///
    /// Keys: `scenario`, the rate names (`g-es`, `kappa-ef`, `Gamma-es`, ...),
    /// `envelopes` (comma separated), `delta-omega-min`, `delta-omega-max`,
    /// `delta-omega-count` and `output`. Relative output paths are resolved
    /// against `base_dir` when given.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            entries.push((lineno + 1, key.trim().to_string(), value.trim().to_string()));
        }

        let kind: ScenarioKind = entries
            .iter()
            .find(|(_, k, _)| k == "scenario")
            .ok_or_else(|| Error::InvalidInput("missing `scenario`".into()))?
            .2
            .parse()?;
        let mut cfg = SweepConfig::new(match kind {
            ScenarioKind::Cavity => Scenario::Cavity(CavityParams::default()),
            ScenarioKind::Waveguide => Scenario::Waveguide(WaveguideParams::default()),
        });

        for (lineno, key, value) in &entries {
            let ctx = |e: Error| Error::InvalidInput(format!("line {lineno}: {e}"));
            let number = || {
                value.parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("line {lineno}: `{value}` is not a number"))
                })
            };
            match key.as_str() {
                "scenario" => {}
                "envelopes" => {
                    cfg.envelopes = value
                        .split(',')
                        .map(|s| s.parse::<PulseKind>())
                        .collect::<Result<Vec<_>>>()
                        .map_err(ctx)?;
                }
                "delta-omega-min" => cfg.delta_omega.min = number()?,
                "delta-omega-max" => cfg.delta_omega.max = number()?,
                "delta-omega-count" => {
                    cfg.delta_omega.count = value.parse().map_err(|_| {
                        Error::InvalidInput(format!("line {lineno}: `{value}` is not a count"))
                    })?
                }
                "output" => {
                    let p = PathBuf::from(value);
                    cfg.output_path = Some(match base_dir {
                        Some(dir) if p.is_relative() => dir.join(p),
                        _ => p,
                    });
                }
                other => {
                    let free: FreeParameter = other.parse().map_err(ctx)?;
                    cfg.scenario = with_parameter(&cfg.scenario, free, number()?).map_err(ctx)?;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta_omega: f64,
    pub envelope: PulseKind,
    pub p_numeric: f64,
    pub eta_analytic: f64,
    /// `|P - η| / η`; NaN when `η = 0`.
    pub rel_dev: f64,
    pub adiabaticity_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(96 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_num(r.delta_omega),
                r.envelope,
                fmt_num(r.p_numeric),
                fmt_num(r.eta_analytic),
                fmt_num(r.rel_dev),
                fmt_num(r.adiabaticity_max)
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }

    pub fn rows_for(&self, envelope: PulseKind) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.envelope == envelope)
    }
}

/// Single transfer run on the default grid for the envelope.
pub fn run_point(scenario: &Scenario, env: &PulseEnvelope) -> Result<TransferOutcome> {
    match scenario {
        Scenario::Cavity(p) => transfer_cavity(p, env, &TimeGrid::for_cavity(p, env)?),
        Scenario::Waveguide(p) => transfer_waveguide(p, env, &TimeGrid::for_waveguide(p, env)?),
    }
}

/// Runs every `(envelope, Δω)` grid point with the given execution strategy.
pub fn run_sweep_with(cfg: &SweepConfig, exec: Execution) -> Result<SweepTable> {
    cfg.validate()?;
    let eta = efficiency(&cfg.scenario)?.eta_sf;

    let mut envelopes = cfg.envelopes.clone();
    envelopes.sort();
    envelopes.dedup();
    let points: Vec<(PulseKind, f64)> = envelopes
        .iter()
        .flat_map(|&k| cfg.delta_omega.points().into_iter().map(move |w| (k, w)))
        .collect();

    let rows = try_map(&points, exec, |&(kind, delta_omega)| {
        let wrap = |e: Error| Error::SweepPoint {
            envelope: kind.to_string(),
            delta_omega,
            source: Box::new(e),
        };
        let env = PulseEnvelope::analytic(kind, delta_omega).map_err(wrap)?;
        let out = run_point(&cfg.scenario, &env).map_err(wrap)?;
        let p = out.p_sf;
        Ok(SweepRow {
            delta_omega,
            envelope: kind,
            p_numeric: p,
            eta_analytic: eta,
            rel_dev: if eta > 0.0 {
                (p - eta).abs() / eta
            } else {
                f64::NAN
            },
            adiabaticity_max: out.max_adiabaticity(),
        })
    })?;
    Ok(SweepTable { rows })
}

/// [`run_sweep_with`] using the default execution (parallel when the
/// `parallel` feature is enabled, capped by `QTRANSFER_THREADS`).
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    run_sweep_with(cfg, Execution::from_env()?)
}

/// Matplotlib script that plots a sweep CSV on a log Δω axis.
pub fn plot_script(csv_path: &Path, scenario: ScenarioKind) -> String {
    let unit = match scenario {
        ScenarioKind::Cavity => "g_{es}",
        ScenarioKind::Waveguide => "\\Gamma_{es}",
    };
    let csv_name = csv_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| csv_path.display().to_string());
    format!(
        r#"#!/usr/bin/env python3
# Plots the transfer probability against photon bandwidth.
import csv
import os
import sys

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "{csv_name}")
series = {{}}
eta = None
with open(path) as fh:
    for row in csv.DictReader(fh):
        series.setdefault(row["envelope"], []).append(
            (float(row["delta_omega"]), float(row["P_numeric"]))
        )
        eta = float(row["eta_analytic"])

colors = {{"gaussian": "tab:red", "antisymmetric": "tab:blue"}}
fig, ax = plt.subplots(figsize=(5, 3.5))
for name, pts in series.items():
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], label=name, color=colors.get(name))
if eta is not None:
    ax.axhline(eta, color="gray", linestyle=":", label="adiabatic limit")
ax.set_xscale("log")
ax.set_xlabel(r"$\Delta\omega$ [${unit}$]")
ax.set_ylabel(r"$P_{{s \to f}}$")
ax.set_ylim(0, 1.05)
ax.legend()
fig.tight_layout()
out = os.path.splitext(path)[0] + ".png"
fig.savefig(out, dpi=150)
print(out)
"#
    )
}
