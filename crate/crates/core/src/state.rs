//! Pure n-qubit states, bipartition masks and the amplitude reshaping that
//! turns a state vector into an `N_A × N_B` matrix.
//!
//! Site `i` is bit `i` of the basis index. Bit value `b` corresponds to the
//! σ^z eigenvalue `1 - 2b`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{contract, Error, Result};

/// Largest supported chain length. A state at this size already needs 16 GiB.
pub const MAX_QUBITS: usize = 30;

/// Allowed drift of `Σ|z_k|²` away from one.
pub const NORM_TOLERANCE: f64 = 1e-12;

fn check_qubits(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_QUBITS {
        return Err(contract(format!(
            "qubit count {n} outside [{min}, {MAX_QUBITS}]"
        )));
    }
    Ok(())
}

/// Normalized amplitude vector over the `2^n` computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps amplitudes that are already normalized; anything further than
    /// [`NORM_TOLERANCE`] from unit norm is rejected.
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n, 1)?;
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                actual: amplitudes.len(),
            });
        }
        let norm_sqr = norm_sqr(&amplitudes);
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { n, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n, 1)?;
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                actual: amplitudes.len(),
            });
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(contract("cannot normalize a zero or non-finite vector"));
        }
        let inv = 1.0 / norm;
        amplitudes.iter_mut().for_each(|z| *z *= inv);
        Ok(Self { n, amplitudes })
    }

    pub fn from_real(n: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(n, amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Every qubit in `(|0⟩ + |1⟩)/√2`.
pub fn product_plus_state(n: usize) -> Result<PureState> {
    check_qubits(n, 1)?;
    let amp = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
    Ok(PureState {
        n,
        amplitudes: vec![amp; 1 << n],
    })
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_state(n: usize) -> Result<PureState> {
    check_qubits(n, 2)?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amplitudes[0] = h;
    amplitudes[(1 << n) - 1] = h;
    Ok(PureState { n, amplitudes })
}

/// Haar-random pure state: i.i.d. standard complex Gaussian amplitudes,
/// normalized. The same `seed` always yields the same state.
pub fn haar_random_state(n: usize, seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_random_state_with(n, &mut rng)
}

pub fn haar_random_state_with<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    check_qubits(n, 1)?;
    let amplitudes = (0..1usize << n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    PureState::normalized(n, amplitudes)
}

/// Split of the `n` sites into subsystems A (set bits of the mask) and B.
///
/// The stored mask is oriented so that `n_A ≤ n_B`: a mask with more than
/// `n/2` set bits is replaced by its complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Bipartition {
    n: usize,
    mask: usize,
}

impl Bipartition {
    pub fn new(n: usize, mask: usize) -> Result<Self> {
        check_qubits(n, 2)?;
        let full = full_mask(n);
        if mask & !full != 0 {
            return Err(contract(format!("mask {mask:#b} has bits beyond site {}", n - 1)));
        }
        let ones = mask.count_ones() as usize;
        if ones == 0 || ones == n {
            return Err(contract(format!(
                "mask {mask:#b} leaves a subsystem empty"
            )));
        }
        let mask = if 2 * ones > n { !mask & full } else { mask };
        Ok(Self { n, mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> usize {
        self.mask
    }

    pub fn complement_mask(&self) -> usize {
        !self.mask & full_mask(self.n)
    }

    pub fn n_a(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn n_b(&self) -> usize {
        self.n - self.n_a()
    }

    pub fn dim_a(&self) -> usize {
        1 << self.n_a()
    }

    pub fn dim_b(&self) -> usize {
        1 << self.n_b()
    }

    /// Sites of A in ascending order.
    pub fn sites_a(&self) -> Vec<usize> {
        sites_of(self.mask, self.n)
    }

    pub fn sites_b(&self) -> Vec<usize> {
        sites_of(self.complement_mask(), self.n)
    }

    /// Splits basis index `k` into `(j_A, l_B)`.
    ///
    /// `j_A` collects the bits of `k` at the sites of A, lowest site into bit
    /// 0; `l_B` does the same for B.
    pub fn split_index(&self, k: usize) -> Result<(usize, usize)> {
        if k >> self.n != 0 {
            return Err(contract(format!(
                "basis index {k} out of range for n = {}",
                self.n
            )));
        }
        Ok((
            extract_bits(k, self.mask),
            extract_bits(k, self.complement_mask()),
        ))
    }

    /// Inverse of [`split_index`](Self::split_index).
    pub fn join_index(&self, j_a: usize, l_b: usize) -> usize {
        deposit_bits(j_a, self.mask) | deposit_bits(l_b, self.complement_mask())
    }

    /// Basis offsets of every `j_A` (resp. `l_B`) so that
    /// `k = offsets_a[j] | offsets_b[l]`.
    pub(crate) fn offset_tables(&self) -> (Vec<usize>, Vec<usize>) {
        let a = (0..self.dim_a()).map(|j| deposit_bits(j, self.mask)).collect();
        let cm = self.complement_mask();
        let b = (0..self.dim_b()).map(|l| deposit_bits(l, cm)).collect();
        (a, b)
    }
}

pub(crate) fn full_mask(n: usize) -> usize {
    (1usize << n) - 1
}

fn sites_of(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Packs the bits of `k` selected by `mask` into the low bits of the result.
fn extract_bits(k: usize, mask: usize) -> usize {
    let mut out = 0;
    let mut m = mask;
    let mut bit = 0;
    while m != 0 {
        let pos = m.trailing_zeros();
        out |= (k >> pos & 1) << bit;
        bit += 1;
        m &= m - 1;
    }
    out
}

/// Scatters the low bits of `j` onto the set positions of `mask`.
fn deposit_bits(j: usize, mask: usize) -> usize {
    let mut out = 0;
    let mut m = mask;
    let mut bit = 0;
    while m != 0 {
        let pos = m.trailing_zeros();
        out |= (j >> bit & 1) << pos;
        bit += 1;
        m &= m - 1;
    }
    out
}

/// Row-major `N_A × N_B` matrix with `M[j_A][l_B] = z_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl AmplitudeMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, j: usize, l: usize) -> Complex64 {
        self.entries[j * self.cols + l]
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.entries[j * self.cols..(j + 1) * self.cols]
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        norm_sqr(&self.entries)
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .to_dmatrix()
            .singular_values()
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// Reshapes `state` into the amplitude matrix adapted to `part`.
pub fn to_matrix(state: &PureState, part: &Bipartition) -> Result<AmplitudeMatrix> {
    if state.n() != part.n() {
        return Err(Error::DimensionMismatch {
            expected: part.n(),
            actual: state.n(),
        });
    }
    let (off_a, off_b) = part.offset_tables();
    let z = state.amplitudes();
    let mut entries = Vec::with_capacity(z.len());
    for &oa in &off_a {
        entries.extend(off_b.iter().map(|&ob| z[oa | ob]));
    }
    Ok(AmplitudeMatrix {
        rows: off_a.len(),
        cols: off_b.len(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn split_index_examples() {
        let p = Bipartition::new(3, 0b001).unwrap();
        assert_eq!(p.split_index(5).unwrap(), (1, 2));
        let p = Bipartition::new(2, 0b01).unwrap();
        assert_eq!(p.split_index(0).unwrap(), (0, 0));
        assert!(p.split_index(4).is_err());

        let p = Bipartition::new(4, 0b0110).unwrap();
        let pairs: HashSet<_> = (0..16).map(|k| p.split_index(k).unwrap()).collect();
        assert_eq!(pairs.len(), 16);
        assert!(pairs.iter().all(|&(j, l)| j < 4 && l < 4));
    }

    #[test]
    fn split_index_bijective_exhaustive() {
        for n in 2..=10 {
            for mask in 1..full_mask(n) {
                let p = Bipartition::new(n, mask).unwrap();
                for k in 0..1usize << n {
                    let (j, l) = p.split_index(k).unwrap();
                    assert_eq!(p.join_index(j, l), k);
                }
            }
        }
    }

    #[test]
    fn bipartition_orientation() {
        let p = Bipartition::new(5, 0b11101).unwrap();
        assert_eq!(p.mask(), 0b00010);
        assert_eq!((p.n_a(), p.n_b()), (1, 4));
        assert!(Bipartition::new(3, 0).is_err());
        assert!(Bipartition::new(3, 0b111).is_err());
        assert!(Bipartition::new(3, 0b1000).is_err());
        // even n, balanced: kept as given
        assert_eq!(Bipartition::new(4, 0b1100).unwrap().mask(), 0b1100);
    }

    #[test]
    fn bell_matrix() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::from_amplitudes(2, vec![c(h), c(0.0), c(0.0), c(h)]).unwrap();
        let m = to_matrix(&bell, &Bipartition::new(2, 0b01).unwrap()).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(m.get(0, 0), c(h));
        assert_eq!(m.get(0, 1), c(0.0));
        assert_eq!(m.get(1, 0), c(0.0));
        assert_eq!(m.get(1, 1), c(h));
    }

    #[test]
    fn plus_state_matrix_is_rank_one() {
        let s = product_plus_state(2).unwrap();
        let m = to_matrix(&s, &Bipartition::new(2, 0b10).unwrap()).unwrap();
        for j in 0..2 {
            for l in 0..2 {
                assert!((m.get(j, l) - c(0.5)).norm() < 1e-15);
            }
        }
        let sv = m.singular_values();
        assert!((sv[0] - 1.0).abs() < 1e-12 && sv[1].abs() < 1e-12);
    }

    #[test]
    fn to_matrix_rejects_mismatch() {
        let s = product_plus_state(3).unwrap();
        assert!(to_matrix(&s, &Bipartition::new(4, 0b11).unwrap()).is_err());
    }

    #[test]
    fn special_states() {
        let s = product_plus_state(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.amplitudes().iter().all(|z| (z - c(h)).norm() < 1e-15));
        let s = product_plus_state(3).unwrap();
        let e = 1.0 / (2.0 * 2f64.sqrt());
        assert!(s.amplitudes().iter().all(|z| (z - c(e)).norm() < 1e-15));

        assert!(ghz_state(1).is_err());
        let g = ghz_state(2).unwrap();
        assert_eq!(g.amplitudes()[0], c(h));
        assert_eq!(g.amplitudes()[3], c(h));
        assert_eq!(g.amplitudes()[1], c(0.0));
    }

    #[test]
    fn normalization_is_enforced() {
        let amps = vec![c(0.9f64.sqrt()), c(0.0)];
        assert!(matches!(
            PureState::from_amplitudes(1, amps.clone()),
            Err(Error::NotNormalized { .. })
        ));
        let s = PureState::normalized(1, amps).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
        assert!(PureState::from_amplitudes(2, vec![c(1.0)]).is_err());
    }

    #[test]
    fn haar_is_seeded() {
        let a = haar_random_state(6, 42).unwrap();
        let b = haar_random_state(6, 42).unwrap();
        let c = haar_random_state(6, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
    }

    #[test]
    fn haar_single_qubit_bloch_vector_is_centered() {
        // ⟨σ^z⟩ is uniform on [-1, 1] for a Haar qubit: mean 0, variance 1/3.
        let samples = 4000;
        let mut mean = 0.0;
        for seed in 0..samples {
            let s = haar_random_state(1, seed).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
            let z = s.amplitudes()[0].norm_sqr() - s.amplitudes()[1].norm_sqr();
            mean += z;
        }
        mean /= samples as f64;
        let stderr = (1.0f64 / 3.0 / samples as f64).sqrt();
        assert!(mean.abs() < 4.0 * stderr, "mean ⟨σz⟩ = {mean}");
    }
}
