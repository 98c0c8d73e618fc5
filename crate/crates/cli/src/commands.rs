//! One function per subcommand.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use mpent_core::analysis::{
    block_entropy_profile, distribution, evaluate_model, fit_model, random_baseline, scaling_study,
    sigma_rel, sweep_g, FitModel, ScalingPoint, SweepOptions, REFERENCE_G_MU_MAX,
    REFERENCE_G_SIGMA_MAX, REFERENCE_MU_MAX, REFERENCE_SIGMA_AT_MU_MAX,
};
use mpent_core::io::{fmt_f64, fmt_mask, read_masks, read_state, write_state};
use mpent_core::ising::IsingParameters;
use mpent_core::partition::{balanced_bipartitions, contiguous_blocks, explicit, PartitionFamily};
use mpent_core::solver::{energy_gap, ground_state};
use mpent_core::state::{ghz_state, product_plus_state, PureState};

use crate::config::{CommandKind, PartitionSpec, RunConfig, StateSource};
use crate::{document, verify, CliError, CliResult, Sink};

/// Amplitude lists above this many sites are large enough to warn about.
const AMPLITUDE_WARN_N: usize = 14;

pub fn execute(cfg: RunConfig) -> CliResult<()> {
    match cfg.command {
        CommandKind::Ground => ground(&cfg),
        CommandKind::Dist => dist(cfg),
        CommandKind::Sweep => sweep(&cfg),
        CommandKind::Scaling => scaling(&cfg),
        CommandKind::Baseline => baseline(&cfg),
        CommandKind::Blocks => blocks(&cfg),
        CommandKind::Verify => verify::run(&cfg),
    }
}

fn input<T>(path: &Path, what: &str, parse: impl FnOnce(BufReader<File>) -> mpent_core::Result<T>) -> CliResult<T> {
    let context = format!("{what} {}", path.display());
    let file = File::open(path).map_err(|e| CliError::Input { context: context.clone(), source: e.into() })?;
    parse(BufReader::new(file)).map_err(|source| CliError::Input { context, source })
}

pub fn load_state_file(path: &Path) -> CliResult<PureState> {
    input(path, "state file", read_state)
}

pub fn family(n: usize, spec: &PartitionSpec) -> CliResult<PartitionFamily> {
    Ok(match spec {
        PartitionSpec::Balanced => balanced_bipartitions(n)?,
        PartitionSpec::Contiguous { max_len } => contiguous_blocks(n, *max_len)?,
        PartitionSpec::File { path } => {
            let masks = input(path, "mask file", read_masks)?;
            explicit(n, masks).map_err(|source| CliError::Input {
                context: format!("mask file {}", path.display()),
                source,
            })?
        }
    })
}

#[derive(Serialize)]
struct GroundReport {
    energy: f64,
    gap: f64,
    degenerate: bool,
    residual: f64,
    solver: mpent_core::solver::SolverKind,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<[f64; 2]>>,
}

fn ground(cfg: &RunConfig) -> CliResult<()> {
    let params = IsingParameters::new(cfg.n, cfg.g, cfg.epsilon)?;
    let gs = ground_state(&params, &cfg.solver)?;
    let gap = match gs.gap {
        Some(g) => g,
        None => energy_gap(&params, &cfg.solver)?,
    };
    if cfg.amplitudes && cfg.n > AMPLITUDE_WARN_N {
        eprintln!("warning: writing {} amplitudes", gs.state.dim());
    }
    if let Some(path) = &cfg.export_state {
        let f = File::create(path)?;
        write_state(&gs.state, std::io::BufWriter::new(f))?;
    }
    let report = GroundReport {
        energy: gs.energy,
        gap,
        degenerate: gap < cfg.solver.degeneracy_threshold,
        residual: gs.residual,
        solver: gs.solver,
        iterations: gs.iterations,
        amplitudes: cfg
            .amplitudes
            .then(|| gs.state.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
    };
    Sink::new(cfg.out.clone()).json(&document(cfg, report)?, true)
}

pub fn load_state(cfg: &RunConfig) -> CliResult<PureState> {
    Ok(match &cfg.state {
        StateSource::Ground => {
            ground_state(&IsingParameters::new(cfg.n, cfg.g, cfg.epsilon)?, &cfg.solver)?.state
        }
        StateSource::Ghz => ghz_state(cfg.n)?,
        StateSource::Plus => product_plus_state(cfg.n)?,
        StateSource::File { path } => load_state_file(path)?,
    })
}

fn dist(mut cfg: RunConfig) -> CliResult<()> {
    let state = load_state(&cfg)?;
    cfg.n = state.n();
    let fam = family(cfg.n, &cfg.partitions)?;
    let d = distribution(&state, &fam, cfg.bins, cfg.entropy)?;

    let sink = Sink::new(cfg.out.clone());
    let mut header = vec!["mask", "n_A", "purity", "participation", "n_AB"];
    if cfg.entropy {
        header.push("entropy");
    }
    let n = cfg.n;
    sink.csv(
        &header,
        d.records.iter().map(|r| {
            let mut row = vec![
                fmt_mask(r.mask, n),
                r.n_a.to_string(),
                fmt_f64(r.purity),
                fmt_f64(r.participation),
                fmt_f64(r.n_ab),
            ];
            if let Some(s) = r.entropy {
                row.push(fmt_f64(s));
            }
            row
        }),
    )?;
    sink.json(&document(&cfg, json!({ "summary": d.summary }))?, false)
}

fn sweep_options(cfg: &RunConfig) -> SweepOptions {
    SweepOptions { solver: cfg.solver, refine: cfg.refine, bins: cfg.bins }
}

fn sweep(cfg: &RunConfig) -> CliResult<()> {
    let fam = family(cfg.n, &cfg.partitions)?;
    let result = sweep_g(cfg.n, cfg.epsilon, &cfg.grid_values(), &fam, &sweep_options(cfg))?;
    let point = ScalingPoint::from(&result);

    let sink = Sink::new(cfg.out.clone());
    sink.csv(
        &["g", "mu", "sigma"],
        result.points.iter().map(|p| vec![fmt_f64(p.g), fmt_f64(p.mu), fmt_f64(p.sigma)]),
    )?;
    eprintln!(
        "g_mu_max = {:.4} ± {:.4}, g_sigma_max = {:.4} ± {:.4}",
        point.g_mu_max, point.g_mu_uncertainty, point.g_sigma_max, point.g_sigma_uncertainty
    );
    sink.json(&document(cfg, json!({ "maxima": point, "points": result.points }))?, false)
}

#[derive(Serialize)]
struct FitReport {
    quantity: &'static str,
    model: FitModel,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<mpent_core::analysis::FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    reference_coefficients: Vec<f64>,
    /// `(n, measured, reference curve)` per chain length.
    reference_comparison: Vec<(usize, f64, f64)>,
}

fn scaling(cfg: &RunConfig) -> CliResult<()> {
    let study = scaling_study(&cfg.n_list, cfg.epsilon, &cfg.grid_values(), &sweep_options(cfg))?;
    let pts = &study.points;

    type Pick = fn(&ScalingPoint) -> f64;
    let quantities: [(&str, FitModel, &[f64], Pick); 4] = [
        ("g_mu_max", FitModel::RationalShift, &REFERENCE_G_MU_MAX, |p| p.g_mu_max),
        ("g_sigma_max", FitModel::RationalShift, &REFERENCE_G_SIGMA_MAX, |p| p.g_sigma_max),
        ("mu_max", FitModel::QuadraticShifted, &REFERENCE_MU_MAX, |p| p.mu_max),
        ("sigma_at_mu_max", FitModel::SqrtShifted, &REFERENCE_SIGMA_AT_MU_MAX, |p| p.sigma_at_mu_max),
    ];
    let fits: Vec<FitReport> = quantities
        .iter()
        .map(|&(quantity, model, reference, pick)| {
            let data: Vec<(f64, f64)> = pts.iter().map(|p| (p.n as f64, pick(p))).collect();
            let (fit, error) = match fit_model(&data, model) {
                Ok(f) => (Some(f), None),
                Err(e) => {
                    eprintln!("warning: {quantity} fit failed: {e}");
                    (None, Some(e.to_string()))
                }
            };
            FitReport {
                quantity,
                model,
                fit,
                error,
                reference_coefficients: reference.to_vec(),
                reference_comparison: pts
                    .iter()
                    .map(|p| (p.n, pick(p), evaluate_model(model, reference, p.n as f64)))
                    .collect(),
            }
        })
        .collect();

    let coeffs = |i: usize| fits[i].fit.as_ref().map(|f| f.coefficients.clone());
    let sigma_rel_report = match (coeffs(2), coeffs(3)) {
        (Some(q), Some(s)) => Some(sigma_rel(pts, &q, &s)),
        _ => None,
    };

    let sink = Sink::new(cfg.out.clone());
    sink.csv(
        &[
            "n",
            "g_mu_max",
            "g_mu_uncertainty",
            "g_sigma_max",
            "g_sigma_uncertainty",
            "mu_max",
            "sigma_max",
            "sigma_at_mu_max",
            "ordered",
        ],
        pts.iter().map(|p| {
            vec![
                p.n.to_string(),
                fmt_f64(p.g_mu_max),
                fmt_f64(p.g_mu_uncertainty),
                fmt_f64(p.g_sigma_max),
                fmt_f64(p.g_sigma_uncertainty),
                fmt_f64(p.mu_max),
                fmt_f64(p.sigma_max),
                fmt_f64(p.sigma_at_mu_max),
                p.ordered.to_string(),
            ]
        }),
    )?;
    let ordered = study.all_ordered();
    eprintln!("g_sigma_max < g_mu_max: {ordered}");
    let body = json!({
        "points": pts,
        "g_sigma_max < g_mu_max": ordered,
        "fits": fits,
        "sigma_rel": sigma_rel_report,
    });
    sink.json(&document(cfg, body)?, false)
}

fn baseline(cfg: &RunConfig) -> CliResult<()> {
    let summary = random_baseline(cfg.n, cfg.samples, cfg.seed)?;
    let sink = Sink::new(cfg.out.clone());
    sink.csv(
        &["sample", "mu", "sigma"],
        summary
            .per_sample
            .iter()
            .enumerate()
            .map(|(i, (mu, sigma))| vec![i.to_string(), fmt_f64(*mu), fmt_f64(*sigma)]),
    )?;
    let body = json!({
        "n": summary.n,
        "samples": summary.samples,
        "seed": summary.seed,
        "mean_mu": summary.mean_mu,
        "std_mu": summary.std_mu,
        "mean_sigma": summary.mean_sigma,
        "std_sigma": summary.std_sigma,
    });
    sink.json(&document(cfg, body)?, false)
}

fn blocks(cfg: &RunConfig) -> CliResult<()> {
    let max_len = cfg.max_len.unwrap_or(cfg.n / 2);
    let profile = block_entropy_profile(cfg.n, cfg.g, cfg.epsilon, max_len, cfg.averaging, &cfg.solver)?;
    let sink = Sink::new(cfg.out.clone());
    sink.csv(
        &["len", "mean_entropy", "blocks"],
        profile
            .entries
            .iter()
            .map(|e| vec![e.len.to_string(), fmt_f64(e.mean_entropy), e.blocks.to_string()]),
    )?;
    let body = json!({ "profile": profile, "strictly_increasing": profile.strictly_increasing() });
    sink.json(&document(cfg, body)?, false)
}
