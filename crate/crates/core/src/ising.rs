//! Open transverse-field Ising chain with a longitudinal perturbation:
//!
//! ```text
//! H = -g Σ_{i<n-1} σ^z_i σ^z_{i+1} - (1-g) Σ_i σ^x_i + ε Σ_i σ^z_i
//! ```

use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{contract, Error, Result};
use crate::state::{full_mask, MAX_QUBITS};

/// Largest chain for which an explicit `2^n × 2^n` matrix may be built.
pub const DEFAULT_DENSE_CAP: usize = 14;

const PARALLEL_MIN_DIM: usize = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsingParameters {
    pub n: usize,
    pub g: f64,
    pub epsilon: f64,
}

impl IsingParameters {
    pub fn new(n: usize, g: f64, epsilon: f64) -> Result<Self> {
        if !(2..=MAX_QUBITS).contains(&n) {
            return Err(contract(format!("chain length {n} outside [2, {MAX_QUBITS}]")));
        }
        if !(0.0..=1.0).contains(&g) {
            return Err(contract(format!("coupling g = {g} outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(contract(format!("longitudinal field ε = {epsilon} outside [0, 1]")));
        }
        Ok(Self { n, g, epsilon })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn transverse(&self) -> f64 {
        1.0 - self.g
    }

    /// Z₂ spin-flip symmetry holds exactly when the longitudinal field vanishes.
    pub fn is_z2_symmetric(&self) -> bool {
        self.epsilon == 0.0
    }

    fn energy_unchecked(&self, k: usize) -> f64 {
        // s_i s_{i+1} = -1 exactly where neighbouring bits differ.
        let bonds = self.n - 1;
        let frustrated = ((k ^ (k >> 1)) & full_mask(bonds)).count_ones() as f64;
        let zz = bonds as f64 - 2.0 * frustrated;
        let down = k.count_ones() as f64;
        let z = self.n as f64 - 2.0 * down;
        -self.g * zz + self.epsilon * z
    }
}

/// Diagonal element `⟨k|H|k⟩`.
pub fn diagonal_energy(k: usize, params: &IsingParameters) -> Result<f64> {
    if k >> params.n != 0 {
        return Err(contract(format!("basis index {k} out of range for n = {}", params.n)));
    }
    Ok(params.energy_unchecked(k))
}

/// All diagonal elements, in basis order.
pub fn diagonal(params: &IsingParameters) -> Vec<f64> {
    (0..params.dim()).map(|k| params.energy_unchecked(k)).collect()
}

/// Matrix-free `y = H x`.
pub fn apply_hamiltonian<T>(params: &IsingParameters, x: &[T]) -> Result<Vec<T>>
where
    T: Copy + Default + Send + Sync + Add<Output = T> + Mul<f64, Output = T>,
{
    let mut y = vec![T::default(); x.len()];
    apply_into(params, x, &mut y)?;
    Ok(y)
}

/// `y = H x` into a caller-provided buffer. Every output element is
/// accumulated independently in a fixed order, so the result does not depend
/// on the thread count.
pub fn apply_into<T>(params: &IsingParameters, x: &[T], y: &mut [T]) -> Result<()>
where
    T: Copy + Default + Send + Sync + Add<Output = T> + Mul<f64, Output = T>,
{
    let dim = params.dim();
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: x.len() });
    }
    if y.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: y.len() });
    }
    let hop = -params.transverse();
    let n = params.n;
    let row = |k: usize| {
        let mut flips = T::default();
        for i in 0..n {
            flips = flips + x[k ^ (1 << i)];
        }
        x[k] * params.energy_unchecked(k) + flips * hop
    };
    if dim >= PARALLEL_MIN_DIM {
        y.par_iter_mut().enumerate().for_each(|(k, yk)| *yk = row(k));
    } else {
        y.iter_mut().enumerate().for_each(|(k, yk)| *yk = row(k));
    }
    Ok(())
}

/// Explicit Hamiltonian matrix; refused above `cap` sites.
pub fn dense_matrix(params: &IsingParameters, cap: usize) -> Result<DMatrix<f64>> {
    if params.n > cap {
        return Err(Error::DenseCapExceeded { n: params.n, cap });
    }
    let dim = params.dim();
    let hop = -params.transverse();
    let mut h = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        h[(k, k)] = params.energy_unchecked(k);
        for i in 0..params.n {
            h[(k, k ^ (1 << i))] = hop;
        }
    }
    Ok(h)
}

/// Global spin flip: `(F x)[k] = x[!k]`.
pub fn spin_flip<T: Copy>(n: usize, x: &[T]) -> Vec<T> {
    let full = full_mask(n);
    (0..x.len()).map(|k| x[!k & full]).collect()
}
