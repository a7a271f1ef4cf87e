//! The five experiments. Each writes its data files into the output
//! directory and returns what goes into the manifest.

use std::path::{Path, PathBuf};

use qwalk::entanglement::{meyer_wallach_single, position_marginal};
use qwalk::evolution::trajectory;
use qwalk::multiwalker::{evolve_two, meyer_wallach_two};
use qwalk::optical::{circuit_unitary, export_circuit, to_circuit};
use qwalk::spectral::{analyze, revival_time};
use qwalk::{BasisIndex, GlobalUnitary, Graph, Metric, TwoWalkerState};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CoinSpec, RunConfig, Setup};
use crate::error::CliError;
use crate::output::{file_name, num, write_json, write_text, Csv};

/// Data files and result summary of one command.
#[derive(Debug, Default)]
pub struct Report {
    pub outputs: Vec<PathBuf>,
    pub results: Value,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    initial_state: InitialInfo,
    outputs: Vec<String>,
    results: &'a Value,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct InitialInfo {
    rule: &'static str,
    position: Option<usize>,
    coin: Option<usize>,
    physical: Option<bool>,
}

const DEFAULT_COIN_RULE: &str = "localized start; a missing coin defaults to the left neighbour c = x-1 (c = 1 at x = 1); middle vertex is ceil(|G|/2)";
const SYMMETRIC_RULE: &str = "(|x,c1> + i|x,c2>)/sqrt(2) over the first two coin values of the middle vertex x = ceil(|G|/2)";

fn initial_info(cfg: &RunConfig, g: &Graph) -> InitialInfo {
    match cfg.initial.basis_label(g) {
        Some(BasisIndex { position, coin }) => InitialInfo {
            rule: DEFAULT_COIN_RULE,
            position: Some(position),
            coin: Some(coin),
            physical: Some(g.is_physical(position, coin)),
        },
        None => InitialInfo {
            rule: SYMMETRIC_RULE,
            position: Some(g.middle()),
            coin: None,
            physical: Some(true),
        },
    }
}

fn initial_warnings(cfg: &RunConfig, g: &Graph) -> Vec<String> {
    match cfg.initial.basis_label(g) {
        Some(b) if !g.is_physical(b.position, b.coin) => vec![format!(
            "initial state ({},{}) is unphysical: {} is not a neighbour of {}",
            b.position, b.coin, b.position, b.coin
        )],
        _ => Vec::new(),
    }
}

/// Writes `manifest.json` plus a re-runnable `config.json`.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    cfg: &RunConfig,
    g: &Graph,
    report: &Report,
) -> Result<Vec<PathBuf>, CliError> {
    let config_path = write_json(dir, "config.json", cfg)?;
    let mut outputs: Vec<String> = report.outputs.iter().map(|p| file_name(p)).collect();
    outputs.push(file_name(&config_path));
    let mut warnings = initial_warnings(cfg, g);
    warnings.extend(report.warnings.iter().cloned());
    let manifest = Manifest {
        tool: "qwalk",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: cfg,
        initial_state: initial_info(cfg, g),
        outputs,
        results: &report.results,
        warnings: &warnings,
    };
    let manifest_path = write_json(dir, "manifest.json", &manifest)?;
    Ok(vec![config_path, manifest_path])
}

pub fn simulate(cfg: &RunConfig, setup: &Setup, dir: &Path) -> Result<Report, CliError> {
    let g = &setup.graph;
    let metric = cfg.metric;
    let e_max = metric.balanced_ceiling(g.dim());
    let mut series = Csv::create(dir, "series.csv", &["t", "E", "E_max"])?;
    let mut heatmap = Csv::create(dir, "heatmap.csv", &["t", "position", "probability"])?;
    let mut amplitudes = if cfg.dump_amplitudes {
        Some(Csv::create(
            dir,
            "amplitudes.csv",
            &["t", "position", "coin", "re", "im", "probability"],
        )?)
    } else {
        None
    };

    let mut drift = 0.0f64;
    let mut last = 0.0;
    for (t, s) in trajectory(&setup.unitary, &setup.initial)?
        .take(cfg.t_max + 1)
        .enumerate()
    {
        let e = metric.evaluate(&s)?;
        last = e;
        drift = drift.max((s.norm() - 1.0).abs());
        let ts = t.to_string();
        series.row([ts.clone(), num(e), num(e_max)])?;
        for (x, p) in position_marginal(&s)?.into_iter().enumerate() {
            heatmap.row([ts.clone(), (x + 1).to_string(), num(p)])?;
        }
        if let Some(csv) = amplitudes.as_mut() {
            for (i, a) in s.amplitudes().iter().enumerate() {
                let b = BasisIndex::from_offset(i, g.n_vertices());
                csv.row([
                    ts.clone(),
                    b.position.to_string(),
                    b.coin.to_string(),
                    num(a.re),
                    num(a.im),
                    num(a.norm_sqr()),
                ])?;
            }
        }
    }

    let mut outputs = vec![series.finish()?, heatmap.finish()?];
    if let Some(csv) = amplitudes {
        outputs.push(csv.finish()?);
    }
    let mut results = json!({
        "metric": metric.name(),
        "steps": cfg.t_max,
        "final_E": last,
        "E_max": e_max,
        "max_norm_drift": drift,
        "unitarity_deviation": setup.unitary.unitarity_deviation(),
    });
    if metric == Metric::Shannon {
        // Only physical pairs are reachable from physical starts.
        results["E_max_physical"] = json!((g.physical_count() as f64).log2());
    }
    Ok(Report {
        outputs,
        results,
        warnings: Vec::new(),
    })
}

pub fn spectrum(cfg: &RunConfig, setup: &Setup, dir: &Path) -> Result<Report, CliError> {
    let spec = analyze(&setup.unitary, cfg.spectral.q_max, cfg.spectral.eps)?;
    let report = spec.report();
    let mut csv = Csv::create(
        dir,
        "eigenvalues.csv",
        &["index", "re", "im", "arg_over_2pi", "p", "q"],
    )?;
    for (i, e) in report.eigenvalues.iter().enumerate() {
        csv.row([
            (i + 1).to_string(),
            num(e.re),
            num(e.im),
            num(e.arg_over_2pi),
            e.p.map_or_else(String::new, |p| p.to_string()),
            e.q.map_or_else(String::new, |q| q.to_string()),
        ])?;
    }
    let outputs = vec![csv.finish()?, write_json(dir, "spectrum.json", &report)?];

    let revival = match &cfg.spectral.revival {
        Some(r) => {
            let found = revival_time(&setup.unitary, &setup.initial, r.threshold, r.t_max)?;
            json!({
                "threshold": r.threshold,
                "t_max": r.t_max,
                "t": found.map(|f| f.t),
                "fidelity": found.map(|f| f.fidelity),
            })
        }
        None => Value::Null,
    };
    let irrational = spec.rational.iter().filter(|r| r.is_none()).count();
    Ok(Report {
        outputs,
        results: json!({
            "classification": spec.classification,
            "predicted_period": report.predicted_period,
            "period_up_to_phase": report.period_up_to_phase,
            "eigenvalue_count": spec.eigenvalues.len(),
            "unrationalized_phases": irrational,
            "q_max": spec.q_max,
            "eps": spec.eps,
            "revival": revival,
        }),
        warnings: Vec::new(),
    })
}

pub fn sensitivity(cfg: &RunConfig, setup: &Setup, dir: &Path) -> Result<Report, CliError> {
    let CoinSpec::Hadamard { delta: delta_a } = cfg.coin else {
        return Err(CliError::Validation(
            "coin: sensitivity needs coin.type = \"hadamard\"".into(),
        ));
    };
    let delta_b = cfg.delta_b.ok_or_else(|| {
        CliError::Validation("delta_b: required for sensitivity (config field or --delta-b)".into())
    })?;
    let cfg_b = RunConfig {
        coin: CoinSpec::Hadamard { delta: delta_b },
        ..cfg.clone()
    };
    let setup_b = cfg_b.prepare().map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(m.replace("coin.delta", "delta_b")),
        other => other,
    })?;
    let metric = cfg.metric;

    let mut csv = Csv::create(dir, "sensitivity.csv", &["t", "E_a", "E_b", "abs_diff"])?;
    let mut max_diff = 0.0f64;
    let mut t_of_max = 0;
    let a = trajectory(&setup.unitary, &setup.initial)?;
    let b = trajectory(&setup_b.unitary, &setup_b.initial)?;
    for (t, (sa, sb)) in a.zip(b).take(cfg.t_max + 1).enumerate() {
        let ea = metric.evaluate(&sa)?;
        let eb = metric.evaluate(&sb)?;
        let diff = (ea - eb).abs();
        if diff > max_diff {
            max_diff = diff;
            t_of_max = t;
        }
        csv.row([t.to_string(), num(ea), num(eb), num(diff)])?;
    }
    Ok(Report {
        outputs: vec![csv.finish()?],
        results: json!({
            "metric": metric.name(),
            "delta_a": delta_a,
            "delta_b": delta_b,
            "max_abs_diff": max_diff,
            "t_of_max": t_of_max,
        }),
        warnings: Vec::new(),
    })
}

/// Default two-photon input: both photons at the middle vertex, in its
/// first two coin modes.
fn default_modes(g: &Graph) -> [usize; 2] {
    let x = g.middle();
    let ins = g.in_coins(x);
    let first = g.flat_index(x, ins[0]);
    let second = ins.get(1).map_or(first, |&c| g.flat_index(x, c));
    [first, second]
}

pub fn two_walker(cfg: &RunConfig, setup: &Setup, dir: &Path) -> Result<Report, CliError> {
    let g = &setup.graph;
    let modes = cfg
        .two_walker
        .as_ref()
        .map_or_else(|| default_modes(g), |s| s.modes);
    let mut pair = TwoWalkerState::input(g.dim(), modes[0], modes[1])
        .map_err(|e| CliError::Validation(format!("two_walker.modes: {e}")))?;

    let mut csv = Csv::create(dir, "two_walker.csv", &["t", "E_one", "E_two"])?;
    let mut one = trajectory(&setup.unitary, &setup.initial)?;
    let (mut min_two, mut max_two) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..=cfg.t_max {
        let single = one.next().expect("trajectory is unbounded");
        let e_one = meyer_wallach_single(&single)?;
        let e_two = meyer_wallach_two(&pair);
        min_two = min_two.min(e_two);
        max_two = max_two.max(e_two);
        csv.row([t.to_string(), num(e_one), num(e_two)])?;
        if t < cfg.t_max {
            pair = evolve_two(&setup.unitary, &pair)?;
        }
    }
    let label = |m: usize| {
        let b = BasisIndex::from_flat(m, g.n_vertices());
        json!({ "mode": m, "position": b.position, "coin": b.coin })
    };
    Ok(Report {
        outputs: vec![csv.finish()?],
        results: json!({
            "metric": Metric::MeyerWallach.name(),
            "two_walker_input": [label(modes[0]), label(modes[1])],
            "E_two_range": [min_two, max_two],
        }),
        warnings: Vec::new(),
    })
}

fn max_deviation(a: &GlobalUnitary, b: &GlobalUnitary) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..a.dim() {
        for (c, v) in a.row(r) {
            worst = worst.max((v - b.entry(r, c)).norm());
        }
        for (c, v) in b.row(r) {
            worst = worst.max((a.entry(r, c) - v).norm());
        }
    }
    worst
}

pub fn export(_cfg: &RunConfig, setup: &Setup, dir: &Path) -> Result<Report, CliError> {
    let circuit = to_circuit(&setup.graph, &setup.coins)?;
    let path = dir.join("circuit.json");
    let mut text = export_circuit(&circuit);
    text.push('\n');
    write_text(&path, &text)?;
    let deviation = max_deviation(&circuit_unitary(&circuit), &setup.unitary);
    Ok(Report {
        outputs: vec![path],
        results: json!({
            "n_modes": circuit.n_modes(),
            "layers": circuit.layers().len(),
            "max_deviation": deviation,
            "verified": deviation < 1e-12,
        }),
        warnings: Vec::new(),
    })
}
