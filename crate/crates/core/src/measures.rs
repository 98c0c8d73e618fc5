//! Bipartite entanglement of a pure state across a single cut: reduced
//! density matrix, purity, participation number, von Neumann and Tsallis
//! entropies.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{contract, Error, Result};
use crate::state::{to_matrix, AmplitudeMatrix, Bipartition, PureState};

/// Default size limit (`n_A + n_B`) for [`purity_bruteforce`].
pub const BRUTE_FORCE_CAP: usize = 12;

/// Eigenvalues of `ρ_A` below this are treated as exact zeros.
pub const EIGEN_CLIP: f64 = 1e-14;

/// `ρ_A = Tr_B |ψ⟩⟨ψ|`, an `N_A × N_A` Hermitian matrix.
#[derive(Clone, Debug)]
pub struct ReducedDensityMatrix {
    entries: DMatrix<Complex64>,
}

impl ReducedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                err = err.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// Ascending eigenvalues, unclipped.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Measures of one bipartition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntanglementRecord {
    pub mask: usize,
    pub n_a: usize,
    pub purity: f64,
    /// `N_AB = 1 / purity`
    pub participation: f64,
    /// `log₂ N_AB`, the effective number of entangled qubits.
    pub n_ab: f64,
    pub entropy: Option<f64>,
}

fn checked_matrix(state: &PureState, part: &Bipartition) -> Result<AmplitudeMatrix> {
    if state.n() != part.n() {
        return Err(Error::DimensionMismatch { expected: part.n(), actual: state.n() });
    }
    to_matrix(state, part)
}

fn gram(m: &AmplitudeMatrix) -> DMatrix<Complex64> {
    let d = m.rows();
    let mut rho = DMatrix::zeros(d, d);
    for i in 0..d {
        let ri = m.row(i);
        for j in i..d {
            let rj = m.row(j);
            let v: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
            rho[(i, j)] = v;
            rho[(j, i)] = v.conj();
        }
    }
    rho
}

pub fn reduced_density(state: &PureState, part: &Bipartition) -> Result<ReducedDensityMatrix> {
    let m = checked_matrix(state, part)?;
    Ok(ReducedDensityMatrix { entries: gram(&m) })
}

/// `Tr ρ_A²` as the squared Frobenius norm of `M M†`.
///
/// Real amplitude vectors (every ground state the solvers produce) take a
/// real-arithmetic path with the same result.
pub fn purity(state: &PureState, part: &Bipartition) -> Result<f64> {
    let m = checked_matrix(state, part)?;
    Ok(purity_of(&m, is_real(state)))
}

fn is_real(state: &PureState) -> bool {
    state.amplitudes().iter().all(|z| z.im == 0.0)
}

fn purity_of(m: &AmplitudeMatrix, real: bool) -> f64 {
    let d = m.rows();
    let mut diag = 0.0;
    let mut off = 0.0;
    if real {
        let rows: Vec<Vec<f64>> = (0..d).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect();
        for i in 0..d {
            for j in i..d {
                let v: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
                if i == j {
                    diag += v * v;
                } else {
                    off += v * v;
                }
            }
        }
    } else {
        for i in 0..d {
            for j in i..d {
                let v: Complex64 = m.row(i).iter().zip(m.row(j)).map(|(a, b)| a * b.conj()).sum();
                if i == j {
                    diag += v.norm_sqr();
                } else {
                    off += v.norm_sqr();
                }
            }
        }
    }
    diag + 2.0 * off
}

/// The literal quadruple sum
/// `Σ_{j,j'} Σ_{l,l'} z_{jl} z̄_{j'l} z_{j'l'} z̄_{jl'}`,
/// at cost `N_A² N_B²`. Kept as an independent check on [`purity`].
pub fn purity_bruteforce(state: &PureState, part: &Bipartition, cap: usize) -> Result<f64> {
    if part.n() > cap {
        return Err(Error::BruteForceCapExceeded { n: part.n(), cap });
    }
    let m = checked_matrix(state, part)?;
    let (na, nb) = (m.rows(), m.cols());
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..na {
        for jp in 0..na {
            for l in 0..nb {
                for lp in 0..nb {
                    total += m.get(j, l) * m.get(jp, l).conj() * m.get(jp, lp) * m.get(j, lp).conj();
                }
            }
        }
    }
    Ok(total.re)
}

/// Clipped eigenvalues of `ρ_A` (negatives and values below [`EIGEN_CLIP`]
/// become zero).
pub fn schmidt_weights(state: &PureState, part: &Bipartition) -> Result<Vec<f64>> {
    let rho = reduced_density(state, part)?;
    Ok(rho
        .eigenvalues()
        .into_iter()
        .map(|l| if l < EIGEN_CLIP { 0.0 } else { l })
        .collect())
}

/// Von Neumann entropy `−Σ λ log₂ λ` in bits.
pub fn entropy(state: &PureState, part: &Bipartition) -> Result<f64> {
    Ok(entropy_of(&schmidt_weights(state, part)?))
}

fn entropy_of(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum();
    s.max(0.0)
}

/// `(1 − Tr ρ_A^q) / (q − 1)`; `q = 2` gives the linear entropy.
pub fn tsallis_entropy(state: &PureState, part: &Bipartition, q: f64) -> Result<f64> {
    if !(q > 0.0) || q == 1.0 || !q.is_finite() {
        return Err(contract(format!(
            "Tsallis index q = {q} must be positive, finite and ≠ 1"
        )));
    }
    let trace: f64 = schmidt_weights(state, part)?
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|l| l.powf(q))
        .sum();
    Ok((1.0 - trace) / (q - 1.0))
}

/// Full record for one cut; the entropy is computed only on request since it
/// needs an eigendecomposition.
pub fn record(state: &PureState, part: &Bipartition, with_entropy: bool) -> Result<EntanglementRecord> {
    let m = checked_matrix(state, part)?;
    let purity = purity_of(&m, is_real(state));
    let entropy = if with_entropy {
        Some(entropy_of(&schmidt_weights(state, part)?))
    } else {
        None
    };
    let participation = 1.0 / purity;
    Ok(EntanglementRecord {
        mask: part.mask(),
        n_a: part.n_a(),
        purity,
        participation,
        n_ab: participation.log2(),
        entropy,
    })
}
