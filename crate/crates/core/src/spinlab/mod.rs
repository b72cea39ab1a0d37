//! Pauli construction, pair Hamiltonians, propagation, and eigensolving.
//!
//! All operators act on tagged spaces (see [`crate::space`]) and follow one
//! basis convention: bit i of a basis integer (spin 1 = most significant) is 0
//! for up, 1 for down.

mod operator;
mod propagator;
mod state;

pub use operator::{CsrMatrix, Operator, Storage};
pub use propagator::{expm_hermitian, krylov_expm_action, spectral_norm_estimate, Propagator};
pub use state::QuantumState;

use crate::error::{CoreError, Result};
use crate::space::{magnetization, site_mask, Space};
use crate::{tol, C64};
use nalgebra::DVector;

/// Single-site Pauli flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Single-site Pauli operator embedded in the n-spin full space.
pub fn pauli(kind: Pauli, site: usize, n: usize) -> Result<Operator> {
    if site >= n {
        return Err(CoreError::IndexOutOfRange {
            what: "site",
            index: site,
            bound: n,
        });
    }
    let space = Space::Full(n);
    let dim = space.dim();
    let mask = site_mask(site, n);
    let mut triplets = Vec::with_capacity(dim);
    for b in 0..dim {
        match kind {
            Pauli::X => triplets.push((b ^ mask, b, C64::new(1.0, 0.0))),
            Pauli::Y => {
                let phase = if b & mask == 0 {
                    C64::new(0.0, 1.0) // up -> down picks up +i
                } else {
                    C64::new(0.0, -1.0)
                };
                triplets.push((b ^ mask, b, phase));
            }
            Pauli::Z => {
                let sign = if b & mask == 0 { 1.0 } else { -1.0 };
                triplets.push((b, b, C64::new(sign, 0.0)));
            }
        }
    }
    Operator::from_triplets(space, triplets, true)
}

/// Total-Z operator: sum of Z over all sites. Diagonal; the eigenvalue of a
/// basis state is (#up - #down).
pub fn total_z(n: usize) -> Result<Operator> {
    if n == 0 {
        return Err(CoreError::invalid("need at least one spin"));
    }
    let space = Space::Full(n);
    let diag: Vec<f64> = (0..space.dim())
        .map(|b| magnetization(b, n) as f64)
        .collect();
    Operator::from_real_diagonal(space, &diag)
}

/// Ferromagnetic XX coupling on adjacent spin pairs:
/// -sum_l (X_{2l-1} X_{2l} + Y_{2l-1} Y_{2l}). Single-pair spectrum {-2, 0, 0, 2}.
pub fn xx_pairs(n: usize) -> Result<Operator> {
    if n == 0 || n % 2 != 0 {
        return Err(CoreError::invalid(format!(
            "pair Hamiltonian needs an even spin count, got {n}"
        )));
    }
    let space = Space::Full(n);
    let dim = space.dim();
    let mut triplets = Vec::new();
    for pair in 0..n / 2 {
        let m1 = site_mask(2 * pair, n);
        let m2 = site_mask(2 * pair + 1, n);
        for b in 0..dim {
            let anti_aligned = (b & m1 == 0) != (b & m2 == 0);
            if anti_aligned {
                // XX + YY exchanges up-down and down-up with amplitude 2
                triplets.push((b ^ m1 ^ m2, b, C64::new(-2.0, 0.0)));
            }
        }
    }
    Operator::from_triplets(space, triplets, true)
}

/// Antiferromagnetic exchange on adjacent spin pairs:
/// J sum_l (XX + YY + ZZ) with J > 0. Single-pair spectrum {-3J, J, J, J};
/// the non-degenerate ground state per pair is the singlet.
pub fn xxx_pairs(n: usize, coupling: f64) -> Result<Operator> {
    if n == 0 || n % 2 != 0 {
        return Err(CoreError::invalid(format!(
            "pair Hamiltonian needs an even spin count, got {n}"
        )));
    }
    if coupling <= 0.0 {
        return Err(CoreError::invalid(
            "antiferromagnetic coupling J must be positive",
        ));
    }
    let space = Space::Full(n);
    let dim = space.dim();
    let mut triplets = Vec::new();
    for pair in 0..n / 2 {
        let m1 = site_mask(2 * pair, n);
        let m2 = site_mask(2 * pair + 1, n);
        for b in 0..dim {
            let anti_aligned = (b & m1 == 0) != (b & m2 == 0);
            if anti_aligned {
                triplets.push((b ^ m1 ^ m2, b, C64::new(2.0 * coupling, 0.0)));
                triplets.push((b, b, C64::new(-coupling, 0.0)));
            } else {
                triplets.push((b, b, C64::new(coupling, 0.0)));
            }
        }
    }
    Operator::from_triplets(space, triplets, true)
}

/// Exact propagation psi(t) = e^{-iHt} psi for time-independent Hermitian H.
///
/// For repeated propagation under the same H, build one [`Propagator`] and
/// reuse it; this entry point analyzes H on every call.
pub fn evolve(h: &Operator, psi: &QuantumState, t: f64) -> Result<QuantumState> {
    if h.space() != psi.space() {
        return Err(CoreError::SpaceMismatch {
            expected: h.space(),
            found: psi.space(),
        });
    }
    if !h.is_hermitian_flagged() {
        return Err(CoreError::invalid(
            "evolve requires a Hermitian-flagged operator",
        ));
    }
    Propagator::new(h)?.apply(psi, t)
}

/// The k smallest eigenvalues with orthonormal eigenvectors, ascending.
pub fn eig_lowest(h: &Operator, k: usize) -> Result<Vec<(f64, DVector<C64>)>> {
    if !h.is_hermitian_flagged() {
        return Err(CoreError::invalid(
            "eigensolver requires a Hermitian-flagged operator",
        ));
    }
    let dim = h.dim();
    if k > dim {
        return Err(CoreError::invalid(format!(
            "requested {k} eigenpairs from a dimension-{dim} operator"
        )));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let pairs = if h.is_sparse() && dim > 2048 {
        lanczos_lowest(h, k)?
    } else {
        dense_lowest(h, k)
    };
    for (val, vec) in &pairs {
        let residual = (h.apply_vec(vec) - vec * C64::new(*val, 0.0)).norm();
        if residual >= tol::EIG_RESIDUAL {
            return Err(CoreError::Numerical(format!(
                "eigenpair residual {residual:.3e} exceeds {:.1e}",
                tol::EIG_RESIDUAL
            )));
        }
    }
    Ok(pairs)
}

fn dense_lowest(h: &Operator, k: usize) -> Vec<(f64, DVector<C64>)> {
    let eig = h.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(k)
        .map(|idx| (eig.eigenvalues[idx], eig.eigenvectors.column(idx).clone_owned()))
        .collect()
}

/// Lanczos with full reorthogonalization for the lowest part of a sparse spectrum.
fn lanczos_lowest(h: &Operator, k: usize) -> Result<Vec<(f64, DVector<C64>)>> {
    let dim = h.dim();
    let m = (8 * k + 60).min(dim);
    let mut seed = DVector::from_element(dim, C64::new(0.0, 0.0));
    for (i, s) in seed.iter_mut().enumerate() {
        let x = ((i.wrapping_mul(2654435761)) % 10007) as f64 / 10007.0;
        *s = C64::new(x - 0.5, ((i * 7919) % 10007) as f64 / 10007.0 - 0.5);
    }
    let mut basis: Vec<DVector<C64>> = vec![seed.clone() / C64::new(seed.norm(), 0.0)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for j in 0..m {
        let mut w = h.apply_vec(&basis[j]);
        let alpha = basis[j].dotc(&w).re;
        alphas.push(alpha);
        for v in &basis {
            let c = v.dotc(&w);
            w.axpy(-c, v, C64::new(1.0, 0.0));
        }
        let beta = w.norm();
        if beta < 1e-13 {
            break;
        }
        betas.push(beta);
        basis.push(w / C64::new(beta, 0.0));
    }
    let steps = alphas.len();
    let mut tri = nalgebra::DMatrix::from_element(steps, steps, C64::new(0.0, 0.0));
    for i in 0..steps {
        tri[(i, i)] = C64::new(alphas[i], 0.0);
        if i + 1 < steps && i < betas.len() {
            tri[(i, i + 1)] = C64::new(betas[i], 0.0);
            tri[(i + 1, i)] = C64::new(betas[i], 0.0);
        }
    }
    let eig = tri.symmetric_eigen();
    let mut order: Vec<usize> = (0..steps).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut vec = DVector::from_element(dim, C64::new(0.0, 0.0));
        for (row, v) in basis.iter().take(steps).enumerate() {
            out_axpy(&mut vec, eig.eigenvectors[(row, idx)], v);
        }
        let n = vec.norm();
        out.push((eig.eigenvalues[idx], vec / C64::new(n, 0.0)));
    }
    Ok(out)
}

fn out_axpy(acc: &mut DVector<C64>, coeff: C64, v: &DVector<C64>) {
    acc.axpy(coeff, v, C64::new(1.0, 0.0));
}
