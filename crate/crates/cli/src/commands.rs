use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use qtransfer::analytics::{
    check_conditions, efficiency as efficiency_report, solve_matching, with_parameter,
    ConditionSettings, FreeParameter,
};
use qtransfer::applications::{
    converter_check, memory_check, memory_efficiency, BranchRates, ConverterSetup, MemorySetup,
};
use qtransfer::dynamics::{
    adiabatic_thresholds, simulate_cavity_every, simulate_waveguide_every,
    waveguide_adiabatic_threshold, TimeGrid,
};
use qtransfer::output::write_trajectory_csv;
use qtransfer::params::{CavityParams, Scenario, ScenarioKind, WaveguideParams};
use qtransfer::pulses::{PulseEnvelope, PulseKind, Tabulated};
use qtransfer::sweep::{plot_script, run_sweep, SweepConfig};

use crate::ScenarioArgs;

/// A check ran but its verdict was negative.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn invalid(msg: String) -> anyhow::Error {
    qtransfer::Error::InvalidInput(msg).into()
}

impl ScenarioArgs {
    pub fn to_scenario(&self) -> anyhow::Result<Scenario> {
        let rate = |v: Option<f64>| v.unwrap_or(0.0);
        let reject = |flags: &[(&str, Option<f64>)]| -> anyhow::Result<()> {
            for (name, v) in flags {
                if v.is_some() {
                    return Err(invalid(format!(
                        "--{name} does not apply to a {} scenario",
                        self.scenario
                    )));
                }
            }
            Ok(())
        };
        let s = match self.scenario {
            ScenarioKind::Cavity => {
                reject(&[("Gamma-es", self.guided_es), ("Gamma-ef", self.guided_ef)])?;
                Scenario::Cavity(CavityParams {
                    g_es: rate(self.g_es),
                    g_ef: rate(self.g_ef),
                    kappa_es: rate(self.kappa_es),
                    kappa_ef: rate(self.kappa_ef),
                    gamma_es: rate(self.gamma_es),
                    gamma_ef: rate(self.gamma_ef),
                    gamma_eo: rate(self.gamma_eo),
                })
            }
            ScenarioKind::Waveguide => {
                reject(&[
                    ("g-es", self.g_es),
                    ("g-ef", self.g_ef),
                    ("kappa-es", self.kappa_es),
                    ("kappa-ef", self.kappa_ef),
                ])?;
                Scenario::Waveguide(WaveguideParams {
                    guided_es: rate(self.guided_es),
                    guided_ef: rate(self.guided_ef),
                    gamma_es: rate(self.gamma_es),
                    gamma_ef: rate(self.gamma_ef),
                    gamma_eo: rate(self.gamma_eo),
                })
            }
        };
        match &s {
            Scenario::Cavity(p) => p.validate()?,
            Scenario::Waveguide(p) => p.validate()?,
        }
        Ok(s)
    }
}

/// `key=value,key=value` rate list applied to an all-zero scenario.
fn scenario_from_list(kind: ScenarioKind, list: &str) -> anyhow::Result<Scenario> {
    let mut s = match kind {
        ScenarioKind::Cavity => Scenario::Cavity(CavityParams::default()),
        ScenarioKind::Waveguide => Scenario::Waveguide(WaveguideParams::default()),
    };
    for (key, value) in key_values(list)? {
        let free: FreeParameter = key.parse()?;
        s = with_parameter(&s, free, value)?;
    }
    Ok(s)
}

fn key_values(list: &str) -> anyhow::Result<Vec<(&str, f64)>> {
    list.split(',')
        .map(str::trim)
        .filter(|item| !item.is_empty())
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, got `{item}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| invalid(format!("`{}` is not a number", v.trim())))?;
            Ok((k.trim(), v))
        })
        .collect()
}

pub fn efficiency(args: &ScenarioArgs, factor: f64, matching_tol: f64) -> anyhow::Result<()> {
    if !(factor > 0.0) || !(matching_tol >= 0.0) {
        return Err(invalid(format!(
            "need factor > 0 and matching tolerance >= 0, got {factor} and {matching_tol}"
        )));
    }
    let s = args.to_scenario()?;
    let report = efficiency_report(&s)?;
    let rates = s.derived_rates()?;
    let verdicts = check_conditions(
        &report,
        &s,
        ConditionSettings {
            factor,
            matching_tol,
        },
    );

    let mut out = io::stdout().lock();
    writeln!(out, "scenario={}", s.kind())?;
    writeln!(out, "eta={}", report.eta)?;
    writeln!(out, "eta_sf={}", report.eta_sf)?;
    writeln!(out, "chi_es={}", report.chi_es)?;
    writeln!(out, "chi_ef={}", report.chi_ef)?;
    writeln!(out, "gamma_eo={}", report.gamma_eo)?;
    if let (Some(c_es), Some(c_ef)) = (rates.coop_es, rates.coop_ef) {
        writeln!(out, "coop_es={c_es}")?;
        writeln!(out, "coop_ef={c_ef}")?;
    }
    writeln!(out, "matching_ratio={}", report.matching_ratio)?;
    writeln!(out, "matching_deviation={}", verdicts.matching_deviation)?;
    writeln!(out, "matched={}", verdicts.matched)?;
    writeln!(out, "strength_ratio={}", verdicts.strength_ratio)?;
    writeln!(out, "strong={}", verdicts.strong)?;
    writeln!(out, "limiting_factor={}", report.limiting_factor)?;
    Ok(())
}

pub struct SimulateArgs {
    pub scenario: ScenarioArgs,
    pub envelope: PulseKind,
    pub delta_omega: f64,
    pub input: Option<PathBuf>,
    pub step: Option<f64>,
    pub stride: usize,
    pub output: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let s = args.scenario.to_scenario()?;
    let env = match (args.envelope, &args.input) {
        (PulseKind::Tabulated, Some(path)) => {
            PulseEnvelope::Tabulated(Tabulated::from_csv_path(path)?)
        }
        (PulseKind::Tabulated, None) => {
            return Err(invalid("a tabulated envelope needs --input".into()))
        }
        (_, Some(_)) => return Err(invalid("--input requires --envelope tabulated".into())),
        (kind, None) => PulseEnvelope::analytic(kind, args.delta_omega)?,
    };
    if args.stride == 0 {
        return Err(invalid("--stride must be at least 1".into()));
    }

    let mut grid = match &s {
        Scenario::Cavity(p) => TimeGrid::for_cavity(p, &env)?,
        Scenario::Waveguide(p) => TimeGrid::for_waveguide(p, &env)?,
    };
    if let Some(step) = args.step {
        grid = TimeGrid::new(grid.t_start, grid.t_end, step)?;
    }
    let (traj, out) = match &s {
        Scenario::Cavity(p) => simulate_cavity_every(p, &env, &grid, args.stride)?,
        Scenario::Waveguide(p) => simulate_waveguide_every(p, &env, &grid, args.stride)?,
    };

    let mut summary: Box<dyn Write> = match &args.output {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_trajectory_csv(&traj, &mut w)?;
            w.flush()?;
            Box::new(io::stdout())
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_trajectory_csv(&traj, &mut w)?;
            w.flush()?;
            Box::new(io::stderr())
        }
    };
    writeln!(summary, "P_sf={}", out.p_sf)?;
    writeln!(summary, "P_other={}", out.p_other)?;
    writeln!(summary, "P_back_bg={}", out.p_back_bg)?;
    writeln!(summary, "P_back_fiber={}", out.p_back_fiber())?;
    writeln!(summary, "residual_norm={}", out.residual_norm)?;
    writeln!(summary, "input_norm={}", out.input_norm)?;
    writeln!(summary, "adiabaticity_max={}", out.max_adiabaticity())?;
    writeln!(summary, "steps={}", out.steps)?;
    if let Ok(report) = efficiency_report(&s) {
        writeln!(summary, "eta_analytic={}", report.eta_sf)?;
    }
    Ok(())
}

fn plot_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}.plot.py"))
}

pub fn sweep(config: &Path, output: Option<&Path>) -> anyhow::Result<()> {
    let cfg = SweepConfig::from_path(config)?;
    let csv = output
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_path.clone())
        .unwrap_or_else(|| config.with_extension("csv"));
    let table = run_sweep(&cfg)?;
    table.write_csv(&csv)?;
    let script = plot_path(&csv);
    std::fs::write(&script, plot_script(&csv, cfg.scenario.kind()))
        .with_context(|| format!("cannot write {}", script.display()))?;
    println!("csv={}", csv.display());
    println!("plot_script={}", script.display());
    println!("rows={}", table.rows.len());
    Ok(())
}

pub fn solve(args: &ScenarioArgs, free: &str) -> anyhow::Result<()> {
    let s = args.to_scenario()?;
    let free: FreeParameter = free.parse()?;
    if !free.applies_to(s.kind()) {
        return Err(invalid(format!("`{free}` is not a {} parameter", s.kind())));
    }
    let value = solve_matching(&s, free)?;
    let matched = with_parameter(&s, free, value)?;
    println!("{free}={value}");
    match efficiency_report(&matched) {
        Ok(report) => {
            println!("eta={}", report.eta);
            println!("eta_sf={}", report.eta_sf);
        }
        Err(e) => println!("eta=undefined ({e})"),
    }
    Ok(())
}

pub fn memory(kind: ScenarioKind, plus: &str, minus: &str, rel_tol: f64) -> anyhow::Result<()> {
    let setup = MemorySetup::new(
        scenario_from_list(kind, plus)?,
        scenario_from_list(kind, minus)?,
    )?;
    let verdict = memory_check(&setup, rel_tol)?;
    for m in &verdict.mismatches {
        println!("mismatch_{}={}", m.quantity, m.relative);
    }
    if let Ok(eff) = memory_efficiency(&setup) {
        println!("eta_sigma_plus={}", eff.sigma_plus.eta_sf);
        println!("eta_sigma_minus={}", eff.sigma_minus.eta_sf);
        println!("eta_overall={}", eff.overall());
    }
    println!("pass={}", verdict.pass);
    if !verdict.pass {
        bail!(CheckFailed(format!(
            "branch rates differ by more than {rel_tol}"
        )));
    }
    Ok(())
}

fn branch(kind: ScenarioKind, list: &str) -> anyhow::Result<BranchRates> {
    let (mut g, mut kappa, mut gamma, mut guided) = (0.0, 0.0, 0.0, 0.0);
    for (key, value) in key_values(list)? {
        let slot = match (kind, key) {
            (ScenarioKind::Cavity, "g") => &mut g,
            (ScenarioKind::Cavity, "kappa") => &mut kappa,
            (ScenarioKind::Waveguide, "Gamma") => &mut guided,
            (_, "gamma") => &mut gamma,
            _ => return Err(invalid(format!("unknown {kind} branch rate `{key}`"))),
        };
        *slot = value;
    }
    Ok(match kind {
        ScenarioKind::Cavity => BranchRates::Cavity { g, kappa, gamma },
        ScenarioKind::Waveguide => BranchRates::Waveguide { guided, gamma },
    })
}

pub fn convert(kind: ScenarioKind, lists: [&str; 4], factor: f64) -> anyhow::Result<()> {
    let setup = ConverterSetup {
        high_plus: branch(kind, lists[0])?,
        high_minus: branch(kind, lists[1])?,
        low_plus: branch(kind, lists[2])?,
        low_minus: branch(kind, lists[3])?,
    };
    let verdict = converter_check(&setup, factor)?;
    for (name, ratio) in &verdict.ratios {
        println!("ratio_{name}={ratio}");
    }
    println!("pass={}", verdict.pass);
    if !verdict.pass {
        bail!(CheckFailed(format!("some branch ratio is below {factor}")));
    }
    Ok(())
}

pub fn thresholds(args: &ScenarioArgs, delta_omega: Option<f64>) -> anyhow::Result<()> {
    let s = args.to_scenario()?;
    let named: Vec<(&str, f64)> = match &s {
        Scenario::Cavity(p) => {
            let [k, plus, minus] = adiabatic_thresholds(p);
            vec![
                ("kappa_es", k),
                ("lambda_plus", plus),
                ("lambda_minus", minus),
            ]
        }
        Scenario::Waveguide(p) => vec![("half_total_decay", waveguide_adiabatic_threshold(p))],
    };
    if let Some(w) = delta_omega {
        if !(w > 0.0 && w.is_finite()) {
            return Err(invalid(format!("--delta-omega must be positive, got {w}")));
        }
    }
    for (name, th) in named {
        println!("{name}={th}");
        if let Some(w) = delta_omega {
            let ratio = if th > 0.0 { w / th } else { f64::INFINITY };
            println!("adiabaticity_{name}={ratio}");
        }
    }
    Ok(())
}
