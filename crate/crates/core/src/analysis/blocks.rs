use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::ising::IsingParameters;
use crate::measures::entropy;
use crate::partition::contiguous_blocks;
use crate::solver::{ground_state, SolverOptions};
use crate::state::full_mask;

/// Which block positions enter the per-length average.
///
/// A block touching either end of the open chain has a single entangling
/// boundary and sits well below the interior blocks of the same length; as
/// the two end blocks weigh more for longer lengths, the all-positions mean
/// mixes two laws. `Interior` keeps only blocks with both ends in the bulk.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockAveraging {
    #[default]
    Interior,
    AllPositions,
}

impl std::str::FromStr for BlockAveraging {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interior" => Ok(Self::Interior),
            "all" | "all_positions" => Ok(Self::AllPositions),
            other => Err(contract(format!("unknown block averaging '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockEntropy {
    pub len: usize,
    /// Entropy in bits, averaged over the selected positions.
    pub mean_entropy: f64,
    pub blocks: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockProfile {
    pub n: usize,
    pub g: f64,
    pub epsilon: f64,
    pub averaging: BlockAveraging,
    pub entries: Vec<BlockEntropy>,
    /// Least-squares slope of the mean entropy against `log₂ ℓ`.
    pub slope: f64,
}

impl BlockProfile {
    pub fn strictly_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].mean_entropy > w[0].mean_entropy)
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub(crate) fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 { 0.0 } else { sxy / sxx }
}

/// Ground-state entropy of contiguous blocks up to `max_len`, averaged per
/// block length.
pub fn block_entropy_profile(
    n: usize,
    g: f64,
    epsilon: f64,
    max_len: usize,
    averaging: BlockAveraging,
    solver: &SolverOptions,
) -> Result<BlockProfile> {
    let family = contiguous_blocks(n, max_len)?;
    if averaging == BlockAveraging::Interior && n < max_len + 2 {
        return Err(contract(format!("no interior block of length {max_len} in a chain of {n}")));
    }
    let params = IsingParameters::new(n, g, epsilon)?;
    let gs = ground_state(&params, solver)?;
    let ends = 1 | 1 << (n - 1);
    let mut sums = vec![(0.0, 0usize); max_len];
    for part in family.iter() {
        debug_assert_eq!(part.mask() & !full_mask(n), 0);
        if averaging == BlockAveraging::Interior && part.mask() & ends != 0 {
            continue;
        }
        let s = entropy(&gs.state, &part)?;
        let slot = &mut sums[part.n_a() - 1];
        slot.0 += s;
        slot.1 += 1;
    }
    let entries: Vec<BlockEntropy> = sums
        .iter()
        .enumerate()
        .map(|(i, &(total, blocks))| BlockEntropy {
            len: i + 1,
            mean_entropy: total / blocks as f64,
            blocks,
        })
        .collect();
    let x: Vec<f64> = entries.iter().map(|e| (e.len as f64).log2()).collect();
    let y: Vec<f64> = entries.iter().map(|e| e.mean_entropy).collect();
    Ok(BlockProfile { n, g, epsilon, averaging, slope: ols_slope(&x, &y), entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn product_ground_state_has_no_block_entropy() {
        let p = block_entropy_profile(8, 0.0, 0.0, 4, BlockAveraging::AllPositions, &opts()).unwrap();
        assert_eq!(p.entries.len(), 4);
        assert!(p.entries.iter().all(|e| e.mean_entropy.abs() < 1e-10));
        assert_eq!(p.entries.iter().map(|e| e.blocks).collect::<Vec<_>>(), vec![8, 7, 6, 5]);
        let p = block_entropy_profile(8, 0.0, 0.0, 4, BlockAveraging::Interior, &opts()).unwrap();
        assert!(p.entries.iter().all(|e| e.mean_entropy.abs() < 1e-10));
        assert_eq!(p.entries.iter().map(|e| e.blocks).collect::<Vec<_>>(), vec![6, 5, 4, 3]);
    }

    #[test]
    fn end_blocks_lower_the_all_positions_mean() {
        let all = block_entropy_profile(10, 0.5, 0.0, 5, BlockAveraging::AllPositions, &opts()).unwrap();
        let interior = block_entropy_profile(10, 0.5, 0.0, 5, BlockAveraging::Interior, &opts()).unwrap();
        for (a, i) in all.entries.iter().zip(&interior.entries) {
            assert!(i.mean_entropy > a.mean_entropy);
        }
        assert!(interior.strictly_increasing());
    }

    #[test]
    fn slope_of_a_line() {
        assert!((ols_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_oversized_blocks() {
        assert!(block_entropy_profile(8, 0.5, 0.0, 5, BlockAveraging::Interior, &opts()).is_err());
        assert!(block_entropy_profile(3, 0.5, 0.0, 1, BlockAveraging::Interior, &opts()).is_ok());
        assert!("all".parse::<BlockAveraging>().is_ok());
        assert!("edge".parse::<BlockAveraging>().is_err());
    }
}
