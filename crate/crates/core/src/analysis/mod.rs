//! Statistics of the participation number over partition families, and the
//! studies built on them: sweeps in `g`, finite-size scaling fits, block
//! entropies and the Haar-random baseline.

mod baseline;
mod blocks;
mod fit;
mod sweep;

pub use baseline::{random_baseline, BaselineSummary};
pub use blocks::{block_entropy_profile, BlockAveraging, BlockEntropy, BlockProfile};
pub use fit::{
    composite_sigma_rel, evaluate_model, fit_model, sigma_rel, FitModel, FitPoint, FitResult,
    SigmaRelReport, REFERENCE_G_MU_MAX, REFERENCE_G_SIGMA_MAX, REFERENCE_MU_MAX, REFERENCE_SIGMA_AT_MU_MAX,
};
pub use sweep::{
    g_grid, locate_peak, scaling_study, sweep_g, Peak, Refinement, ScalingPoint, ScalingStudy,
    SweepOptions, SweepPoint, SweepResult, DEFAULT_BINS,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{contract, Error, Result};
use crate::measures::{record, EntanglementRecord};
use crate::partition::PartitionFamily;
use crate::state::PureState;

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Mean, population standard deviation, extremes and histogram of the
/// participation numbers over a family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub count: usize,
    pub mu: f64,
    pub sigma: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Welford accumulator for mean and population variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        if self.count == 0 {
            self.min = x;
            self.max = x;
        } else {
            self.min = self.min.min(x);
            self.max = self.max.max(x);
        }
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Divisor is the count: the family is the whole population.
    pub fn population_std(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0).sqrt()
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        iter.into_iter().for_each(|x| s.push(x));
        s
    }
}

/// Equal-width histogram over `[min, max]`. A zero-width range collapses to a
/// single bin.
pub fn histogram(values: &[f64], bins: usize, min: f64, max: f64) -> Vec<HistogramBin> {
    let span = max - min;
    if values.is_empty() {
        return Vec::new();
    }
    if !(span > 1e-12 * max.abs().max(1.0)) {
        return vec![HistogramBin { low: min, high: max, count: values.len() }];
    }
    let width = span / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            low: min + b as f64 * width,
            high: if b + 1 == bins { max } else { min + (b + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &x in values {
        let b = (((x - min) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

pub fn summarize(values: &[f64], bins: usize) -> Result<DistributionSummary> {
    if values.is_empty() {
        return Err(contract("empty partition family"));
    }
    if bins == 0 {
        return Err(contract("histogram needs at least one bin"));
    }
    let stats: RunningStats = values.iter().copied().collect();
    Ok(DistributionSummary {
        count: stats.count(),
        mu: stats.mean(),
        sigma: stats.population_std(),
        min: stats.min(),
        max: stats.max(),
        histogram: histogram(values, bins, stats.min(), stats.max()),
    })
}

#[derive(Clone, Debug)]
pub struct Distribution {
    pub summary: DistributionSummary,
    /// One record per family member, in enumeration order.
    pub records: Vec<EntanglementRecord>,
}

/// Every record over `family`, then `μ` and `σ` of the participation number.
/// Records are computed in parallel and reassembled in family order.
pub fn distribution(
    state: &PureState,
    family: &PartitionFamily,
    bins: usize,
    with_entropy: bool,
) -> Result<Distribution> {
    if family.n() != state.n() {
        return Err(Error::DimensionMismatch { expected: family.n(), actual: state.n() });
    }
    if family.is_empty() {
        return Err(contract("empty partition family"));
    }
    let mut records = Vec::with_capacity(family.len());
    for chunk in family.chunks(CHUNK) {
        let part: Result<Vec<_>> = chunk
            .par_iter()
            .map(|p| record(state, p, with_entropy))
            .collect();
        records.extend(part?);
    }
    let values: Vec<f64> = records.iter().map(|r| r.participation).collect();
    let summary = summarize(&values, bins)?;
    Ok(Distribution { summary, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{balanced_bipartitions, explicit};
    use crate::state::{ghz_state, haar_random_state, product_plus_state};

    #[test]
    fn ghz_and_product_are_delta_functions() {
        let d = distribution(&ghz_state(10).unwrap(), &balanced_bipartitions(10).unwrap(), 50, false).unwrap();
        assert_eq!(d.records.len(), 252);
        assert!((d.summary.mu - 2.0).abs() < 1e-12);
        assert!(d.summary.sigma < 1e-12);
        assert!(d.records.iter().all(|r| (r.participation - 2.0).abs() < 1e-12));
        assert_eq!(d.summary.histogram.len(), 1);

        let d = distribution(&product_plus_state(10).unwrap(), &balanced_bipartitions(10).unwrap(), 50, false).unwrap();
        assert!((d.summary.mu - 1.0).abs() < 1e-12);
        assert!(d.summary.sigma < 1e-12);
    }

    #[test]
    fn two_pass_oracle_agrees_with_streaming() {
        let s = haar_random_state(9, 5).unwrap();
        let d = distribution(&s, &balanced_bipartitions(9).unwrap(), 20, false).unwrap();
        let x: Vec<f64> = d.records.iter().map(|r| r.participation).collect();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
        assert!((d.summary.mu - mean).abs() < 1e-10);
        assert!((d.summary.sigma - var.sqrt()).abs() < 1e-10);
        assert_eq!(d.summary.histogram.iter().map(|b| b.count).sum::<usize>(), 126);
        assert_eq!(d.summary.histogram.len(), 20);
        let lo = d.summary.histogram.first().unwrap().low;
        let hi = d.summary.histogram.last().unwrap().high;
        assert_eq!((lo, hi), (d.summary.min, d.summary.max));
    }

    #[test]
    fn even_n_complement_pairs_give_equal_values() {
        let s = haar_random_state(8, 12).unwrap();
        let d = distribution(&s, &balanced_bipartitions(8).unwrap(), 10, false).unwrap();
        let by_mask: std::collections::HashMap<usize, f64> =
            d.records.iter().map(|r| (r.mask, r.purity)).collect();
        for r in &d.records {
            let other = by_mask[&(!r.mask & 0xff)];
            assert!((other - r.purity).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let s = ghz_state(4).unwrap();
        assert!(distribution(&s, &balanced_bipartitions(5).unwrap(), 10, false).is_err());
        assert!(distribution(&s, &explicit(4, vec![]).unwrap(), 10, false).is_err());
        assert!(distribution(&s, &balanced_bipartitions(4).unwrap(), 0, false).is_err());
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[1.0, 2.0, 3.0, 4.0], 3, 1.0, 4.0);
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 1, 2]);
    }
}
