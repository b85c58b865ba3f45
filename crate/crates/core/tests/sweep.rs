use std::fs;

use qtransfer::batch::Execution;
use qtransfer::params::Scenario;
use qtransfer::pulses::PulseKind;
use qtransfer::sweep::{plot_script, run_sweep_with, SweepConfig, CSV_HEADER};

fn temp_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("qtransfer-sweep-{name}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn config_file_to_csv() {
    let dir = temp_dir("file");
    let cfg_path = dir.join("fig4.cfg");
    fs::write(
        &cfg_path,
        "# waveguide, output rate twice the input rate\n\
         scenario = waveguide\nGamma-es = 1\nGamma-ef = 2\n\
         envelopes = antisymmetric, gaussian\n\
         delta-omega-min = 1e-3\ndelta-omega-max = 1\ndelta-omega-count = 4\n\
         output = fig4.csv\n",
    )
    .unwrap();
    let cfg = SweepConfig::from_path(&cfg_path).unwrap();
    assert!(matches!(cfg.scenario, Scenario::Waveguide(_)));
    assert_eq!(
        cfg.output_path.as_deref(),
        Some(dir.join("fig4.csv").as_path())
    );

    let table = run_sweep_with(&cfg, Execution::Sequential).unwrap();
    table.write_csv(cfg.output_path.as_ref().unwrap()).unwrap();
    let text = fs::read_to_string(dir.join("fig4.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert!(!text.contains('\r') && text.ends_with('\n'));

    // rows ordered by envelope then bandwidth
    assert!(lines[1].contains(",antisymmetric,") && lines[5].contains(",gaussian,"));
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 6);
        let num = |i: usize| f[i].parse::<f64>().unwrap();
        let (p, eta, rel) = (num(2), num(3), num(4));
        assert!((p - eta).abs() - rel * eta <= 1e-12, "{line}");
        // twelve significant digits
        assert_eq!(
            f[2].split('e')
                .next()
                .unwrap()
                .trim_start_matches('-')
                .len(),
            13
        );
    }
    let first: Vec<&str> = lines[5].split(',').collect();
    assert!((first[2].parse::<f64>().unwrap() - 8.0 / 9.0).abs() < 1e-3);

    let script = plot_script(&dir.join("fig4.csv"), cfg.scenario.kind());
    assert!(script.contains("fig4.csv") && script.contains("set_xscale(\"log\")"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn envelope_list_is_normalised() {
    let text = "scenario = cavity\ng-es = 1\ng-ef = 1\nkappa-es = 1\nkappa-ef = 1\n\
                envelopes = gaussian, gaussian\ndelta-omega-min = 0.1\ndelta-omega-count = 2\n";
    let cfg = SweepConfig::parse(text, None).unwrap();
    let table = run_sweep_with(&cfg, Execution::default()).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert!(table.rows.iter().all(|r| r.envelope == PulseKind::Gaussian));
    assert!(table.rows[1].p_numeric <= table.rows[0].p_numeric);
}

#[test]
fn bad_configs_are_rejected() {
    for text in [
        "g-es = 1\n",
        "scenario = cavity\nkappa-es = 0\n",
        "scenario = cavity\nkappa-es = 1\nenvelopes = tabulated\n",
        "scenario = waveguide\nGamma-es = 1\nkappa-es = 1\n",
        "scenario = waveguide\nGamma-es = 1\ndelta-omega-count = 1\n",
        "scenario = waveguide\nGamma-es = one\n",
        "scenario = waveguide\nGamma-es 1\n",
    ] {
        assert!(
            SweepConfig::parse(text, None).is_err(),
            "accepted: {text:?}"
        );
    }
}
