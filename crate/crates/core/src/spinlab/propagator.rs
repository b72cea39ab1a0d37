//! Exact unitary propagation e^{-iHt} for time-independent Hermitian H.
//!
//! A [`Propagator`] is built once per Hamiltonian and applied many times with
//! different durations. Structure is exploited where it exists:
//!
//! - diagonal operators become pure phase multiplication,
//! - rank-1 projectors get the closed form psi + (e^{-ict} - 1)<v|psi> v,
//! - sums of commuting single-qubit or single-pair terms factor into local
//!   2x2 / 4x4 rotations,
//! - everything else dense goes through one Hermitian eigendecomposition,
//! - sparse operators above the Krylov threshold use a Lanczos action.

use crate::error::{CoreError, Result};
use crate::space::{site_mask, Space};
use crate::spinlab::{Operator, QuantumState};
use crate::{C64, KRYLOV_DIM_THRESHOLD};
use nalgebra::{DMatrix, DVector};

/// Convergence target for the Krylov propagation path.
const KRYLOV_TOL: f64 = 1e-12;
/// Krylov subspace cap before time-splitting kicks in.
const KRYLOV_MAX_DIM: usize = 64;
/// Detection tolerance for structural shortcuts (diagonal, rank-1).
const STRUCTURE_TOL: f64 = 1e-13;

/// Reusable action of e^{-iHt} on amplitude vectors.
#[derive(Debug, Clone)]
pub enum Propagator {
    /// H diagonal with real entries.
    Diagonal { space: Space, diag: Vec<f64> },
    /// H = coeff |v><v| with coeff real and v normalized.
    RankOne {
        space: Space,
        coeff: f64,
        vec: DVector<C64>,
    },
    /// H = sum_l (shift I + x_scale X_l) over `qubits` qubits.
    QubitRotations {
        space: Space,
        shift: f64,
        x_scale: f64,
    },
    /// H = coupling * sum_pairs (XX + YY + ZZ) on adjacent spin pairs (full space).
    PairExchange { space: Space, coupling: f64 },
    /// Dense eigendecomposition H = V diag(vals) V^dagger.
    Eigen {
        space: Space,
        vecs: DMatrix<C64>,
        vecs_adj: DMatrix<C64>,
        vals: Vec<f64>,
    },
    /// Lanczos action on a sparse operator (built lazily per application).
    Krylov { op: Box<Operator> },
}

impl Propagator {
    /// Analyze a Hermitian operator and pick the cheapest exact propagation.
    pub fn new(h: &Operator) -> Result<Self> {
        if !h.is_hermitian_flagged() {
            return Err(CoreError::invalid(
                "propagation requires a Hermitian-flagged operator",
            ));
        }
        if let Some(diag) = h.as_real_diagonal() {
            return Ok(Propagator::Diagonal {
                space: h.space(),
                diag,
            });
        }
        if h.is_sparse() && h.dim() > KRYLOV_DIM_THRESHOLD {
            return Ok(Propagator::Krylov {
                op: Box::new(h.clone()),
            });
        }
        if let Some((coeff, vec)) = detect_rank_one(h) {
            return Ok(Propagator::RankOne {
                space: h.space(),
                coeff,
                vec,
            });
        }
        let m = h.to_dense();
        let eig = m.symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        let vecs_adj = eig.eigenvectors.adjoint();
        Ok(Propagator::Eigen {
            space: h.space(),
            vecs: eig.eigenvectors,
            vecs_adj,
            vals,
        })
    }

    /// Propagator for H = sum_l (shift I + x_scale X_l) on a logical space.
    pub fn qubit_rotations(space: Space, shift: f64, x_scale: f64) -> Result<Self> {
        match space {
            Space::Logical(_) | Space::Full(_) => Ok(Propagator::QubitRotations {
                space,
                shift,
                x_scale,
            }),
            _ => Err(CoreError::invalid(
                "qubit-rotation propagator needs a power-of-two space",
            )),
        }
    }

    /// Propagator for the pairwise exchange Hamiltonian on the full space.
    pub fn pair_exchange(space: Space, coupling: f64) -> Result<Self> {
        match space {
            Space::Full(n) if n % 2 == 0 => Ok(Propagator::PairExchange { space, coupling }),
            _ => Err(CoreError::invalid(
                "pair-exchange propagator needs a full space with an even spin count",
            )),
        }
    }

    pub fn space(&self) -> Space {
        match self {
            Propagator::Diagonal { space, .. }
            | Propagator::RankOne { space, .. }
            | Propagator::QubitRotations { space, .. }
            | Propagator::PairExchange { space, .. }
            | Propagator::Eigen { space, .. } => *space,
            Propagator::Krylov { op } => op.space(),
        }
    }

    /// Apply e^{-iHt} to a raw amplitude vector in place.
    pub fn apply_vec(&self, psi: &mut DVector<C64>, t: f64) {
        match self {
            Propagator::Diagonal { diag, .. } => {
                for (a, d) in psi.iter_mut().zip(diag.iter()) {
                    *a *= C64::from_polar(1.0, -d * t);
                }
            }
            Propagator::RankOne { coeff, vec, .. } => {
                let amp = vec.dotc(psi);
                let factor = C64::from_polar(1.0, -coeff * t) - C64::new(1.0, 0.0);
                psi.axpy(factor * amp, vec, C64::new(1.0, 0.0));
            }
            Propagator::QubitRotations {
                space,
                shift,
                x_scale,
            } => {
                let n = match space {
                    Space::Logical(nl) => *nl,
                    Space::Full(n) => *n,
                    Space::Dfs(_) => unreachable!(),
                };
                let theta = x_scale * t;
                let (cos_t, sin_t) = (theta.cos(), theta.sin());
                let m_i_sin = C64::new(0.0, -sin_t);
                let cos_c = C64::new(cos_t, 0.0);
                for qubit in 0..n {
                    let mask = site_mask(qubit, n);
                    for base in 0..psi.len() {
                        if base & mask == 0 {
                            let hi = base | mask;
                            let a0 = psi[base];
                            let a1 = psi[hi];
                            psi[base] = cos_c * a0 + m_i_sin * a1;
                            psi[hi] = m_i_sin * a0 + cos_c * a1;
                        }
                    }
                }
                let global = C64::from_polar(1.0, -shift * n as f64 * t);
                psi.apply(|a| *a *= global);
            }
            Propagator::PairExchange { space, coupling } => {
                let n = space.spins();
                let j = *coupling;
                // per pair: |uu>,|dd> pick up e^{-iJt}; the (ud, du) block rotates
                // by angle 2Jt around X with an extra e^{+iJt} phase
                let edge = C64::from_polar(1.0, -j * t);
                let theta = 2.0 * j * t;
                let center = C64::from_polar(1.0, j * t);
                let cos_c = center * C64::new(theta.cos(), 0.0);
                let m_i_sin = center * C64::new(0.0, -theta.sin());
                for pair in 0..n / 2 {
                    let m1 = site_mask(2 * pair, n);
                    let m2 = site_mask(2 * pair + 1, n);
                    for base in 0..psi.len() {
                        if base & m1 == 0 && base & m2 == 0 {
                            let ud = base | m2;
                            let du = base | m1;
                            let dd = base | m1 | m2;
                            psi[base] *= edge;
                            psi[dd] *= edge;
                            let a_ud = psi[ud];
                            let a_du = psi[du];
                            psi[ud] = cos_c * a_ud + m_i_sin * a_du;
                            psi[du] = m_i_sin * a_ud + cos_c * a_du;
                        }
                    }
                }
            }
            Propagator::Eigen {
                vecs,
                vecs_adj,
                vals,
                ..
            } => {
                let mut coeffs = vecs_adj * &*psi;
                for (c, lambda) in coeffs.iter_mut().zip(vals.iter()) {
                    *c *= C64::from_polar(1.0, -lambda * t);
                }
                *psi = vecs * coeffs;
            }
            Propagator::Krylov { op } => {
                *psi = krylov_expm_action(op, psi, t);
            }
        }
    }

    /// Apply e^{-iHt} to a state.
    pub fn apply(&self, psi: &QuantumState, t: f64) -> Result<QuantumState> {
        if psi.space() != self.space() {
            return Err(CoreError::SpaceMismatch {
                expected: self.space(),
                found: psi.space(),
            });
        }
        let mut v = psi.amplitudes().clone();
        self.apply_vec(&mut v, t);
        QuantumState::new(self.space(), v)
    }

    /// Materialize e^{-iHt} as a dense matrix (small dimensions only).
    pub fn to_matrix(&self, t: f64) -> DMatrix<C64> {
        let dim = self.space().dim();
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for col in 0..dim {
            let mut e = DVector::from_element(dim, C64::new(0.0, 0.0));
            e[col] = C64::new(1.0, 0.0);
            self.apply_vec(&mut e, t);
            m.set_column(col, &e);
        }
        m
    }
}

fn detect_rank_one(h: &Operator) -> Option<(f64, DVector<C64>)> {
    if h.is_sparse() || h.dim() > KRYLOV_DIM_THRESHOLD {
        return None;
    }
    let m = h.to_dense();
    let scale = h.max_abs();
    if scale == 0.0 {
        return None; // zero operator is diagonal, handled earlier
    }
    // candidate direction: the column with the largest norm
    let (best_col, best_norm) = (0..m.ncols())
        .map(|c| (c, m.column(c).norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    if best_norm == 0.0 {
        return None;
    }
    let v = m.column(best_col) / C64::new(best_norm, 0.0);
    let hv = &m * &v;
    let coeff = v.dotc(&hv).re;
    // verify M = coeff * v v^dagger entrywise
    let tolerance = STRUCTURE_TOL * scale.max(1.0);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let model = C64::new(coeff, 0.0) * v[r] * v[c].conj();
            if (m[(r, c)] - model).norm() > tolerance {
                return None;
            }
        }
    }
    Some((coeff, v.clone_owned()))
}

/// e^{-iHt} psi via Lanczos iteration with time-splitting, for Hermitian H.
pub fn krylov_expm_action(h: &Operator, psi: &DVector<C64>, t: f64) -> DVector<C64> {
    if t == 0.0 {
        return psi.clone();
    }
    let sign = t.signum();
    let mut remaining_abs = t.abs();
    let mut current = psi.clone();
    while remaining_abs > 0.0 {
        let (basis, alphas, betas) = lanczos_basis(h, &current, KRYLOV_MAX_DIM);
        let mut chunk = remaining_abs;
        loop {
            if let Some(next) = krylov_evaluate(&basis, &alphas, &betas, &current, sign * chunk) {
                current = next;
                remaining_abs -= chunk;
                break;
            }
            chunk /= 2.0;
            assert!(
                chunk > 1e-300,
                "Krylov propagation failed to converge at any step size"
            );
        }
    }
    current
}

/// Lanczos tridiagonalization with full reorthogonalization.
fn lanczos_basis(
    h: &Operator,
    start: &DVector<C64>,
    max_dim: usize,
) -> (Vec<DVector<C64>>, Vec<f64>, Vec<f64>) {
    let beta0 = start.norm();
    let mut basis: Vec<DVector<C64>> = vec![start / C64::new(beta0, 0.0)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for j in 0..max_dim {
        let mut w = h.apply_vec(&basis[j]);
        let alpha = basis[j].dotc(&w).re;
        alphas.push(alpha);
        w.axpy(C64::new(-alpha, 0.0), &basis[j], C64::new(1.0, 0.0));
        if j > 0 {
            w.axpy(C64::new(-betas[j - 1], 0.0), &basis[j - 1], C64::new(1.0, 0.0));
        }
        // full reorthogonalization keeps the basis numerically orthonormal
        for v in &basis {
            let c = v.dotc(&w);
            w.axpy(-c, v, C64::new(1.0, 0.0));
        }
        let beta = w.norm();
        if beta < 1e-14 {
            break; // invariant subspace reached: expansion is exact
        }
        betas.push(beta);
        basis.push(w / C64::new(beta, 0.0));
    }
    (basis, alphas, betas)
}

/// Evaluate the Krylov approximation for duration `t`; None when the a
/// posteriori error estimate misses the tolerance.
fn krylov_evaluate(
    basis: &[DVector<C64>],
    alphas: &[f64],
    betas: &[f64],
    start: &DVector<C64>,
    t: f64,
) -> Option<DVector<C64>> {
    let m = alphas.len();
    let mut tri = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
    for i in 0..m {
        tri[(i, i)] = C64::new(alphas[i], 0.0);
        if i + 1 < m {
            tri[(i, i + 1)] = C64::new(betas[i], 0.0);
            tri[(i + 1, i)] = C64::new(betas[i], 0.0);
        }
    }
    let eig = tri.symmetric_eigen();
    // exp(-i T t) e_1, through the small eigenbasis
    let first_row = eig.eigenvectors.row(0).transpose().conjugate();
    let mut coeffs = first_row.clone_owned();
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= C64::from_polar(1.0, -eig.eigenvalues[k] * t);
    }
    let small = &eig.eigenvectors * coeffs;
    // error estimate: weight that would spill into the next basis vector
    let happy = betas.len() < m || basis.len() == m;
    if !happy {
        let spill = betas.last().copied().unwrap_or(0.0) * small[m - 1].norm() * t.abs();
        if spill > KRYLOV_TOL {
            return None;
        }
    }
    let beta0 = start.norm();
    let mut out = DVector::from_element(start.len(), C64::new(0.0, 0.0));
    for (k, v) in basis.iter().take(m).enumerate() {
        out.axpy(C64::new(beta0, 0.0) * small[k], v, C64::new(1.0, 0.0));
    }
    Some(out)
}

/// Dense e^{-iHt} for a Hermitian matrix.
pub fn expm_hermitian(m: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let dim = m.nrows();
    let mut phases = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for k in 0..dim {
        phases[(k, k)] = C64::from_polar(1.0, -eig.eigenvalues[k] * t);
    }
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Spectral-norm estimate of a Hermitian operator via Lanczos extremal Ritz values.
pub fn spectral_norm_estimate(h: &Operator) -> f64 {
    let dim = h.dim();
    if dim <= 128 && !h.is_sparse() {
        let eig = h.to_dense().symmetric_eigen();
        return eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    }
    let mut seed = DVector::from_element(dim, C64::new(0.0, 0.0));
    for (k, s) in seed.iter_mut().enumerate() {
        // deterministic pseudo-random direction
        *s = C64::new(((k * 2654435761) % 1000) as f64 / 1000.0 - 0.5, 0.3);
    }
    let (_, alphas, betas) = lanczos_basis(h, &seed, 40);
    let m = alphas.len();
    let mut tri = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
    for i in 0..m {
        tri[(i, i)] = C64::new(alphas[i], 0.0);
        if i + 1 < m && i < betas.len() {
            tri[(i, i + 1)] = C64::new(betas[i], 0.0);
            tri[(i + 1, i)] = C64::new(betas[i], 0.0);
        }
    }
    let eig = tri.symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}
