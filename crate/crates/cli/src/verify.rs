//! The oracle suite behind `mpent verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mpent_core::analysis::distribution;
use mpent_core::io::read_amplitudes;
use mpent_core::ising::IsingParameters;
use mpent_core::measures::{purity, purity_bruteforce, record, BRUTE_FORCE_CAP};
use mpent_core::partition::balanced_bipartitions;
use mpent_core::solver::{dense_ground_state, lanczos_ground_state, SolverOptions};
use mpent_core::state::{
    ghz_state, haar_random_state, product_plus_state, to_matrix, Bipartition, PureState, NORM_TOLERANCE,
};

use crate::config::{RunConfig, StateSource};
use crate::{document, CliError, CliResult, Sink};

pub const PURITY_TOLERANCE: f64 = 1e-10;
pub const ENERGY_TOLERANCE: f64 = 1e-9;
pub const OVERLAP_TOLERANCE: f64 = 1e-8;
pub const BOUND_SLACK: f64 = 1e-9;
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;
pub const MAX_RANDOM_N: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest deviation seen, in the units of the check.
    pub max_error: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

type Outcome = mpent_core::Result<Check>;

/// Seeded `(state, bipartition)` pairs with `2 ≤ n ≤ 8`.
pub fn random_cases(cases: usize, seed: u64) -> mpent_core::Result<Vec<(PureState, Bipartition)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|_| {
            let n = rng.random_range(2..=MAX_RANDOM_N);
            let mask = rng.random_range(1..(1usize << n) - 1);
            let state = haar_random_state(n, rng.random())?;
            Ok((state, Bipartition::new(n, mask)?))
        })
        .collect()
}

fn purity_oracle(cases: &[(PureState, Bipartition)]) -> Outcome {
    let mut worst = 0.0f64;
    for (s, p) in cases {
        worst = worst.max((purity(s, p)? - purity_bruteforce(s, p, BRUTE_FORCE_CAP)?).abs());
    }
    Ok(Check {
        name: "purity_vs_bruteforce",
        passed: worst < PURITY_TOLERANCE,
        cases: cases.len(),
        max_error: worst,
        detail: format!("max |Δpurity| = {worst:.3e} (tolerance {PURITY_TOLERANCE:e})"),
    })
}

/// `Tr ρ_B²` from the column Gram matrix of the amplitude matrix, independent
/// of the row-side computation.
fn complement_purity(s: &PureState, p: &Bipartition) -> mpent_core::Result<f64> {
    let m = to_matrix(s, p)?;
    let mut total = 0.0;
    for k in 0..m.cols() {
        for l in 0..m.cols() {
            let v: Complex64 = (0..m.rows()).map(|j| m.get(j, k) * m.get(j, l).conj()).sum();
            total += v.norm_sqr();
        }
    }
    Ok(total)
}

fn complement_symmetry(cases: &[(PureState, Bipartition)]) -> Outcome {
    let mut worst = 0.0f64;
    for (s, p) in cases {
        worst = worst.max((purity(s, p)? - complement_purity(s, p)?).abs());
    }
    Ok(Check {
        name: "complement_symmetry",
        passed: worst < PURITY_TOLERANCE,
        cases: cases.len(),
        max_error: worst,
        detail: format!("max |Tr ρ_A² − Tr ρ_B²| = {worst:.3e}"),
    })
}

/// `(n, g, ε)` points compared between the dense and Lanczos paths.
pub fn solver_grid() -> Vec<(usize, f64, f64)> {
    let mut grid = Vec::new();
    for n in [4, 6, 8, 10] {
        for g in [0.1, 0.5, 0.8, 0.95] {
            for eps in [0.0, 1e-3, 0.1] {
                grid.push((n, g, eps));
            }
        }
    }
    grid
}

/// Worst `|ΔE|` and worst `1 − |⟨ψ_dense|ψ_lanczos⟩|` over `grid`.
pub fn dense_vs_lanczos(grid: &[(usize, f64, f64)], opts: &SolverOptions) -> mpent_core::Result<(f64, f64)> {
    let (mut de, mut dov) = (0.0f64, 0.0f64);
    for &(n, g, eps) in grid {
        let params = IsingParameters::new(n, g, eps)?;
        let a = dense_ground_state(&params, opts)?;
        let b = lanczos_ground_state(&params, opts)?;
        de = de.max((a.energy - b.energy).abs());
        dov = dov.max(1.0 - a.state.inner(&b.state)?.norm());
    }
    Ok((de, dov))
}

fn solver_agreement(opts: &SolverOptions) -> Outcome {
    let grid = solver_grid();
    let (de, dov) = dense_vs_lanczos(&grid, opts)?;
    Ok(Check {
        name: "dense_vs_lanczos",
        passed: de < ENERGY_TOLERANCE && dov < OVERLAP_TOLERANCE,
        cases: grid.len(),
        max_error: de,
        detail: format!("max |ΔE| = {de:.3e}, max 1 − overlap = {dov:.3e}"),
    })
}

/// Worst violation of `1 ≤ N_AB ≤ 2^{n_A}` over `cases` (0 when none).
pub fn bound_violation<'a>(cases: impl IntoIterator<Item = (&'a PureState, Bipartition)>) -> mpent_core::Result<(usize, f64)> {
    let (mut count, mut worst) = (0, 0.0f64);
    for (s, p) in cases {
        let r = record(s, &p, false)?;
        let upper = (1u64 << r.n_a) as f64;
        worst = worst.max(1.0 - r.participation).max(r.participation - upper);
        count += 1;
    }
    Ok((count, worst.max(0.0)))
}

fn bounds(cases: &[(PureState, Bipartition)], opts: &SolverOptions) -> Outcome {
    let mut grounds = Vec::new();
    for &(n, g) in &[(8, 0.2), (8, 0.56), (10, 0.5), (10, 0.9)] {
        grounds.push(mpent_core::solver::ground_state(&IsingParameters::new(n, g, 0.0)?, opts)?.state);
    }
    let mut pairs: Vec<(&PureState, Bipartition)> = cases.iter().map(|(s, p)| (s, *p)).collect();
    for s in &grounds {
        pairs.extend(balanced_bipartitions(s.n())?.iter().map(|p| (s, p)));
    }
    let (count, worst) = bound_violation(pairs)?;
    Ok(Check {
        name: "participation_bounds",
        passed: worst <= BOUND_SLACK,
        cases: count,
        max_error: worst,
        detail: format!("worst excursion outside [1, 2^n_A] = {worst:.3e}"),
    })
}

fn fixed_points() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [8, 9, 10] {
        let fam = balanced_bipartitions(n)?;
        for (state, mu) in [(ghz_state(n)?, 2.0), (product_plus_state(n)?, 1.0)] {
            let s = distribution(&state, &fam, 1, false)?.summary;
            worst = worst.max((s.mu - mu).abs()).max(s.sigma);
            cases += 1;
        }
    }
    Ok(Check {
        name: "ghz_and_product_fixed_points",
        passed: worst <= FIXED_POINT_TOLERANCE,
        cases,
        max_error: worst,
        detail: format!("max |μ − μ_exact| or σ = {worst:.3e}"),
    })
}

fn state_file_normalization(path: &std::path::Path) -> Check {
    let name = "state_file_normalization";
    let parsed = std::fs::File::open(path)
        .map_err(mpent_core::Error::from)
        .and_then(|f| read_amplitudes(std::io::BufReader::new(f)));
    match parsed {
        Ok((_, amps)) => {
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
            let err = (norm - 1.0).abs();
            Check {
                name,
                passed: err <= NORM_TOLERANCE,
                cases: 1,
                max_error: err,
                detail: format!("{}: ‖ψ‖² = {norm:.15}", path.display()),
            }
        }
        Err(e) => Check {
            name,
            passed: false,
            cases: 1,
            max_error: f64::INFINITY,
            detail: format!("{}: {e}", path.display()),
        },
    }
}

fn settle(name: &'static str, outcome: Outcome) -> Check {
    outcome.unwrap_or_else(|e| Check {
        name,
        passed: false,
        cases: 0,
        max_error: f64::INFINITY,
        detail: format!("aborted: {e}"),
    })
}

pub fn run_checks(cfg: &RunConfig) -> Report {
    let cases = random_cases(cfg.cases, cfg.seed);
    let mut checks = match &cases {
        Ok(c) => vec![
            settle("purity_vs_bruteforce", purity_oracle(c)),
            settle("complement_symmetry", complement_symmetry(c)),
            settle("participation_bounds", bounds(c, &cfg.solver)),
        ],
        Err(e) => vec![settle("random_cases", Err(mpent_core::Error::Contract(e.to_string())))],
    };
    checks.push(settle("dense_vs_lanczos", solver_agreement(&cfg.solver)));
    checks.push(settle("ghz_and_product_fixed_points", fixed_points()));
    if let StateSource::File { path } = &cfg.state {
        checks.push(state_file_normalization(path));
    }
    let all_passed = checks.iter().all(|c| c.passed);
    Report { checks, all_passed }
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let report = run_checks(cfg);
    for c in &report.checks {
        println!("{} {} ({} cases): {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.cases, c.detail);
    }
    Sink::new(cfg.out.clone()).json(&document(cfg, &report)?, false)?;
    match report.checks.iter().filter(|c| !c.passed).count() {
        0 => Ok(()),
        failed => Err(CliError::Verification { failed }),
    }
}
