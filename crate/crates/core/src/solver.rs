//! Ground states of the Ising chain: dense symmetric eigendecomposition for
//! small chains, matrix-free Lanczos with full reorthogonalization beyond.
//!
//! At ε = 0 both paths work inside the Z₂-even sector (states invariant under
//! a global spin flip). For g < 1 the ground state lies there, and as g → 1
//! the odd partner becomes exponentially close in energy; restricting to the
//! even sector selects the GHZ-like combination deterministically instead of
//! an arbitrary mixture of the quasi-degenerate pair.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::ising::{self, IsingParameters, DEFAULT_DENSE_CAP};
use crate::state::{full_mask, PureState};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_DEGENERACY_THRESHOLD: f64 = 1e-8;

/// `Auto` picks the dense path up to this many sites.
pub const AUTO_DENSE_MAX: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Dense,
    Lanczos,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Dense,
    Lanczos,
    #[default]
    Auto,
}

impl SolverChoice {
    pub fn resolve(self, n: usize) -> SolverKind {
        match self {
            Self::Dense => SolverKind::Dense,
            Self::Lanczos => SolverKind::Lanczos,
            Self::Auto if n <= AUTO_DENSE_MAX => SolverKind::Dense,
            Self::Auto => SolverKind::Lanczos,
        }
    }
}

impl std::str::FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "lanczos" => Ok(Self::Lanczos),
            "auto" => Ok(Self::Auto),
            other => Err(contract(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub choice: SolverChoice,
    pub tolerance: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub dense_cap: usize,
    pub degeneracy_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            choice: SolverChoice::Auto,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0x5eed,
            dense_cap: DEFAULT_DENSE_CAP,
            degeneracy_threshold: DEFAULT_DEGENERACY_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: PureState,
    /// `E₁ − E₀`, only known on the dense path.
    pub gap: Option<f64>,
    pub solver: SolverKind,
    /// `‖Hψ − Eψ‖₂`
    pub residual: f64,
    pub iterations: usize,
}

impl GroundStateResult {
    pub fn is_degenerate(&self, threshold: f64) -> bool {
        self.gap.is_some_and(|g| g < threshold)
    }
}

/// Ground state by whichever path `opts.choice` selects.
pub fn ground_state(params: &IsingParameters, opts: &SolverOptions) -> Result<GroundStateResult> {
    match opts.choice.resolve(params.n) {
        SolverKind::Dense => dense_ground_state(params, opts),
        SolverKind::Lanczos => lanczos_ground_state(params, opts),
    }
}

/// Largest-magnitude amplitude made positive. Ties within rounding go to the
/// lowest index.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(&pivot) = v.iter().find(|x| x.abs() >= max - 1e-12 * max.max(1.0)) {
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(params: &IsingParameters, psi: &[f64]) -> Result<(f64, f64)> {
    let h_psi = ising::apply_hamiltonian(params, psi)?;
    let energy = dot(psi, &h_psi) / dot(psi, psi);
    let r = h_psi
        .iter()
        .zip(psi)
        .map(|(h, p)| (h - energy * p).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((energy, r))
}

/// Projection onto the spin-flip-even sector, in place.
fn symmetrize(n: usize, v: &mut [f64]) {
    let full = full_mask(n);
    for k in 0..v.len() / 2 {
        let f = !k & full;
        let avg = 0.5 * (v[k] + v[f]);
        v[k] = avg;
        v[f] = avg;
    }
}

/// Flip-sector blocks at ε = 0 over representatives `r < N/2`, basis
/// `(|r⟩ ± |r̄⟩)/√2`. Returns `(even, odd)`.
fn sector_blocks(params: &IsingParameters) -> (DMatrix<f64>, DMatrix<f64>) {
    let half = params.dim() / 2;
    let full = full_mask(params.n);
    let hop = -params.transverse();
    let diag = ising::diagonal(params);
    let mut even = DMatrix::zeros(half, half);
    let mut odd = DMatrix::zeros(half, half);
    for r in 0..half {
        even[(r, r)] = diag[r];
        odd[(r, r)] = diag[r];
        for i in 0..params.n {
            let k = r ^ (1 << i);
            if k < half {
                even[(r, k)] += hop;
                odd[(r, k)] += hop;
            } else {
                let rep = !k & full;
                even[(r, rep)] += hop;
                odd[(r, rep)] -= hop;
            }
        }
    }
    (even, odd)
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Full symmetric eigendecomposition (per flip sector at ε = 0).
pub fn dense_ground_state(params: &IsingParameters, opts: &SolverOptions) -> Result<GroundStateResult> {
    if params.n > opts.dense_cap {
        return Err(Error::DenseCapExceeded { n: params.n, cap: opts.dense_cap });
    }
    let dim = params.dim();
    let (mut psi, energy, gap) = if params.is_z2_symmetric() {
        let (even, odd) = sector_blocks(params);
        let (even_vals, even_vecs) = sorted_eigen(even);
        let odd_min = SymmetricEigen::new(odd)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let e0 = even_vals[0];
        let e1 = even_vals.get(1).copied().unwrap_or(f64::INFINITY).min(odd_min);
        let full = full_mask(params.n);
        let mut psi = vec![0.0; dim];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for r in 0..dim / 2 {
            let c = even_vecs[(r, 0)] * s;
            psi[r] = c;
            psi[!r & full] = c;
        }
        (psi, e0, (e1 - e0).max(0.0))
    } else {
        let h = ising::dense_matrix(params, opts.dense_cap)?;
        let (vals, vecs) = sorted_eigen(h);
        let psi = vecs.column(0).iter().copied().collect();
        (psi, vals[0], (vals[1] - vals[0]).max(0.0))
    };
    fix_sign(&mut psi);
    let (_, residual) = residual(params, &psi)?;
    Ok(GroundStateResult {
        energy,
        state: PureState::from_real(params.n, &psi)?,
        gap: Some(gap),
        solver: SolverKind::Dense,
        residual,
        iterations: 1,
    })
}

struct LanczosOutcome {
    vector: Vec<f64>,
    energy: f64,
    residual: f64,
    iterations: usize,
}

/// Lowest eigenpair of `H` restricted to the orthogonal complement of
/// `deflate` (and to the even sector when `even_sector`).
fn lanczos_lowest(
    params: &IsingParameters,
    opts: &SolverOptions,
    deflate: &[&[f64]],
    even_sector: bool,
) -> Result<LanczosOutcome> {
    let dim = params.dim();
    let n = params.n;
    let sector_dim = if even_sector { dim / 2 } else { dim } - deflate.len();
    let max_steps = opts.max_iter.min(sector_dim).max(1);

    let project = |v: &mut Vec<f64>, basis: &[Vec<f64>]| {
        if even_sector {
            symmetrize(n, v);
        }
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            for q in deflate.iter().copied().chain(basis.iter().map(Vec::as_slice)) {
                let c = dot(v, q);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    project(&mut v, &[]);
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(contract("degenerate Lanczos start vector"));
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut best = f64::INFINITY;
    let scale = 2.0 * n as f64;

    for step in 1..=max_steps {
        let j = step - 1;
        ising::apply_into(params, &basis[j], &mut w)?;
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        project(&mut w, &basis);
        let b = norm(&w);
        let exhausted = b <= 1e-13 * scale || step == max_steps;

        let check = exhausted || step < 20 || step % 5 == 0;
        if !check {
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(std::mem::replace(&mut w, vec![0.0; dim]));
            continue;
        }

        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let (vals, vecs) = sorted_eigen(t);
        let y = vecs.column(0);
        let estimate = b * y[m - 1].abs();
        if estimate <= 0.1 * opts.tolerance || exhausted {
            let mut psi = vec![0.0; dim];
            for (q, &c) in basis.iter().zip(y.iter()) {
                psi.iter_mut().zip(q).for_each(|(p, qi)| *p += c * qi);
            }
            let np = norm(&psi);
            psi.iter_mut().for_each(|x| *x /= np);
            let (energy, r) = residual(params, &psi)?;
            best = best.min(r);
            if r <= opts.tolerance {
                return Ok(LanczosOutcome { vector: psi, energy, residual: r, iterations: step });
            }
            debug_assert!(vals[0] <= energy + 1e-8);
            if exhausted {
                break;
            }
        } else {
            best = best.min(estimate);
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(std::mem::replace(&mut w, vec![0.0; dim]));
    }
    Err(Error::NoConvergence { iterations: alpha.len(), residual: best })
}

/// Matrix-free Lanczos ground state. The seeded start vector makes the result
/// deterministic.
pub fn lanczos_ground_state(params: &IsingParameters, opts: &SolverOptions) -> Result<GroundStateResult> {
    let out = lanczos_lowest(params, opts, &[], params.is_z2_symmetric())?;
    let mut psi = out.vector;
    fix_sign(&mut psi);
    Ok(GroundStateResult {
        energy: out.energy,
        state: PureState::from_real(params.n, &psi)?,
        gap: None,
        solver: SolverKind::Lanczos,
        residual: out.residual,
        iterations: out.iterations,
    })
}

/// Chains up to this length get their gap from the dense path.
pub const GAP_DENSE_MAX: usize = 11;

/// `E₁ − E₀`, from the dense spectrum for small chains and from a deflated
/// Lanczos run (unrestricted in symmetry) otherwise.
pub fn energy_gap(params: &IsingParameters, opts: &SolverOptions) -> Result<f64> {
    if params.n <= GAP_DENSE_MAX.min(opts.dense_cap) {
        let r = dense_ground_state(params, opts)?;
        return Ok(r.gap.unwrap_or(0.0));
    }
    let ground = lanczos_lowest(params, opts, &[], params.is_z2_symmetric())?;
    let excited = lanczos_lowest(params, opts, &[&ground.vector], false)?;
    Ok((excited.energy - ground.energy).max(0.0))
}
