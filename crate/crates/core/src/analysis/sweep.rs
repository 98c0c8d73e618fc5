use rayon::prelude::*;
use serde::Serialize;

use super::{distribution, DistributionSummary};
use crate::error::{contract, Error, Result};
use crate::ising::IsingParameters;
use crate::partition::PartitionFamily;
use crate::solver::{ground_state, SolverOptions};

pub const DEFAULT_BINS: usize = 50;

/// Largest coupling a sweep may sample; `g = 1` is exactly degenerate.
pub const G_SWEEP_MAX: f64 = 0.99;

/// Second pass on a finer grid around each coarse maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Refinement {
    pub step: f64,
    pub half_width: f64,
}

impl Default for Refinement {
    fn default() -> Self {
        Self { step: 0.002, half_width: 0.03 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    pub refine: Option<Refinement>,
    pub bins: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            refine: Some(Refinement::default()),
            bins: DEFAULT_BINS,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub g: f64,
    pub mu: f64,
    pub sigma: f64,
    pub min: f64,
    pub max: f64,
    pub energy: f64,
    pub residual: f64,
    pub gap: Option<f64>,
}

/// Interpolated maximum of a sampled curve. `uncertainty` is half the local
/// grid step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub g: f64,
    pub value: f64,
    pub uncertainty: f64,
    pub index: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub n: usize,
    pub epsilon: f64,
    pub points: Vec<SweepPoint>,
    pub mu_peak: Peak,
    pub sigma_peak: Peak,
    /// σ interpolated at the location of the μ maximum.
    pub sigma_at_mu_max: f64,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.g).collect()
    }

    pub fn mu_curve(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mu).collect()
    }

    pub fn sigma_curve(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.sigma).collect()
    }

    pub fn point_at(&self, g: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| (p.g - g).abs() < 1e-9)
    }
}

fn snap(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// `min, min + step, …` up to `max` inclusive (to within rounding).
pub fn g_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !min.is_finite() || !max.is_finite() {
        return Err(contract(format!("invalid grid step {step}")));
    }
    if max < min {
        return Err(contract(format!("empty grid: g_max {max} < g_min {min}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| snap(min + i as f64 * step)).collect())
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(contract("empty g grid"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(contract("g grid must be strictly increasing"));
    }
    if grid[0] < 0.0 || grid[grid.len() - 1] > G_SWEEP_MAX + 1e-12 {
        return Err(contract(format!("g grid must lie inside [0, {G_SWEEP_MAX}]")));
    }
    Ok(())
}

fn vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let (a, b) = (x[1] - x[0], x[1] - x[2]);
    let (fa, fb) = (y[1] - y[2], y[1] - y[0]);
    let den = a * fa - b * fb;
    if den == 0.0 {
        return x[1];
    }
    (x[1] - 0.5 * (a * a * fa - b * b * fb) / den).clamp(x[0], x[2])
}

fn lagrange(x: [f64; 3], y: [f64; 3], at: f64) -> f64 {
    (0..3)
        .map(|i| {
            let mut w = y[i];
            for j in 0..3 {
                if j != i {
                    w *= (at - x[j]) / (x[i] - x[j]);
                }
            }
            w
        })
        .sum()
}

fn neighbours(len: usize, idx: usize) -> Option<[usize; 3]> {
    (idx > 0 && idx + 1 < len).then(|| [idx - 1, idx, idx + 1])
}

fn half_step(grid: &[f64], idx: usize) -> f64 {
    let left = if idx > 0 { grid[idx] - grid[idx - 1] } else { 0.0 };
    let right = if idx + 1 < grid.len() { grid[idx + 1] - grid[idx] } else { 0.0 };
    0.5 * left.max(right)
}

/// Discrete argmax refined by the parabola through it and its neighbours.
/// At either end of the grid the sample itself is returned.
pub fn locate_peak(grid: &[f64], values: &[f64]) -> Result<Peak> {
    if grid.len() != values.len() || grid.is_empty() {
        return Err(contract("grid and curve must be nonempty and of equal length"));
    }
    let index = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    let uncertainty = half_step(grid, index);
    let (g, value) = match neighbours(grid.len(), index) {
        Some(ix) => {
            let x = ix.map(|i| grid[i]);
            let y = ix.map(|i| values[i]);
            let g = vertex(x, y);
            (g, lagrange(x, y, g).max(values[index]))
        }
        None => (grid[index], values[index]),
    };
    Ok(Peak { g, value, uncertainty, index })
}

fn interpolate_at(grid: &[f64], values: &[f64], peak: &Peak) -> f64 {
    match neighbours(grid.len(), peak.index) {
        Some(ix) => lagrange(ix.map(|i| grid[i]), ix.map(|i| values[i]), peak.g),
        None => values[peak.index],
    }
}

fn evaluate(
    n: usize,
    epsilon: f64,
    grid: &[f64],
    family: &PartitionFamily,
    opts: &SweepOptions,
) -> Result<Vec<SweepPoint>> {
    grid.par_iter()
        .map(|&g| {
            let at = |e: Error| Error::AtCoupling { g, source: Box::new(e) };
            let params = IsingParameters::new(n, g, epsilon).map_err(at)?;
            let gs = ground_state(&params, &opts.solver).map_err(at)?;
            let DistributionSummary { mu, sigma, min, max, .. } =
                distribution(&gs.state, family, opts.bins, false).map_err(at)?.summary;
            Ok(SweepPoint {
                g,
                mu,
                sigma,
                min,
                max,
                energy: gs.energy,
                residual: gs.residual,
                gap: gs.gap,
            })
        })
        .collect()
}

fn refined_grid(peak_g: f64, lo: f64, hi: f64, r: &Refinement) -> Vec<f64> {
    let start = (peak_g - r.half_width).max(lo);
    let end = (peak_g + r.half_width).min(hi);
    let first = (start / r.step).ceil() * r.step;
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let g = snap(first + i as f64 * r.step);
        if g > end + 1e-12 {
            break;
        }
        out.push(g);
        i += 1;
    }
    out
}

/// Ground state and participation-number statistics at every `g`, followed
/// by maxima location (optionally with a finer second pass).
pub fn sweep_g(
    n: usize,
    epsilon: f64,
    grid: &[f64],
    family: &PartitionFamily,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    validate_grid(grid)?;
    if family.n() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: family.n() });
    }
    let mut points = evaluate(n, epsilon, grid, family, opts)?;

    if let Some(r) = opts.refine.filter(|_| grid.len() >= 3) {
        if !(r.step > 0.0 && r.half_width > 0.0) {
            return Err(contract("refinement step and half-width must be positive"));
        }
        let g: Vec<f64> = points.iter().map(|p| p.g).collect();
        let mu_idx = locate_peak(&g, &points.iter().map(|p| p.mu).collect::<Vec<_>>())?.index;
        let sigma_idx = locate_peak(&g, &points.iter().map(|p| p.sigma).collect::<Vec<_>>())?.index;
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let mut extra: Vec<f64> = refined_grid(g[mu_idx], lo, hi, &r)
            .into_iter()
            .chain(refined_grid(g[sigma_idx], lo, hi, &r))
            .filter(|x| !g.iter().any(|y| (x - y).abs() < 1e-9))
            .collect();
        extra.sort_by(f64::total_cmp);
        extra.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        points.extend(evaluate(n, epsilon, &extra, family, opts)?);
        points.sort_by(|a, b| a.g.total_cmp(&b.g));
    }

    let grid: Vec<f64> = points.iter().map(|p| p.g).collect();
    let mu: Vec<f64> = points.iter().map(|p| p.mu).collect();
    let sigma: Vec<f64> = points.iter().map(|p| p.sigma).collect();
    let mu_peak = locate_peak(&grid, &mu)?;
    let sigma_peak = locate_peak(&grid, &sigma)?;
    let sigma_at_mu_max = interpolate_at(&grid, &sigma, &mu_peak);
    Ok(SweepResult { n, epsilon, points, mu_peak, sigma_peak, sigma_at_mu_max })
}

/// Located extrema of one sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub g_mu_max: f64,
    pub g_mu_uncertainty: f64,
    pub g_sigma_max: f64,
    pub g_sigma_uncertainty: f64,
    pub mu_max: f64,
    pub sigma_max: f64,
    pub sigma_at_mu_max: f64,
    /// `g(σ_max) < g(μ_max)`
    pub ordered: bool,
}

impl From<&SweepResult> for ScalingPoint {
    fn from(s: &SweepResult) -> Self {
        Self {
            n: s.n,
            g_mu_max: s.mu_peak.g,
            g_mu_uncertainty: s.mu_peak.uncertainty,
            g_sigma_max: s.sigma_peak.g,
            g_sigma_uncertainty: s.sigma_peak.uncertainty,
            mu_max: s.mu_peak.value,
            sigma_max: s.sigma_peak.value,
            sigma_at_mu_max: s.sigma_at_mu_max,
            ordered: s.sigma_peak.g < s.mu_peak.g,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingStudy {
    pub points: Vec<ScalingPoint>,
    #[serde(skip)]
    pub sweeps: Vec<SweepResult>,
}

impl ScalingStudy {
    pub fn all_ordered(&self) -> bool {
        self.points.iter().all(|p| p.ordered)
    }
}

/// One balanced-family sweep per chain length.
pub fn scaling_study(
    n_list: &[usize],
    epsilon: f64,
    grid: &[f64],
    opts: &SweepOptions,
) -> Result<ScalingStudy> {
    if n_list.is_empty() {
        return Err(contract("no chain lengths given"));
    }
    let mut sweeps = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let family = crate::partition::balanced_bipartitions(n)?;
        sweeps.push(sweep_g(n, epsilon, grid, &family, opts)?);
    }
    let points = sweeps.iter().map(ScalingPoint::from).collect();
    Ok(ScalingStudy { points, sweeps })
}
