//! The protected sector and its pair-encoded logical qubits.
//!
//! Collective dephasing couples through the total-Z operator, so any state
//! confined to one total-Z eigensector never entangles with the bath. This
//! module enumerates the zero-magnetization sector, singles out the subspace
//! spanned by products of the two-spin states up-down / down-up (one logical
//! qubit per adjacent pair), builds the logical SU(2) generators, and provides
//! the index maps between the full, sector, and logical spaces.
//!
//! Logical qubit l occupies physical spins (2l-1, 2l); |0>_L = up-down,
//! |1>_L = down-up.

use crate::error::{CoreError, Result};
use crate::space::{magnetization, site_mask, Space};
use crate::spinlab::{Operator, QuantumState};
use crate::{tol, C64};
use nalgebra::{DMatrix, DVector};

/// Hard cap on full-space enumeration: 2^16 amplitudes stay desk-scale.
pub const MAX_FULL_SPINS: usize = 16;

/// Index maps between the full space, the zero-magnetization sector, and the
/// pair-encoded logical subspace of an even number of spins.
#[derive(Debug, Clone)]
pub struct SpaceMap {
    n: usize,
    dfs_indices: Vec<usize>,
    logical_indices: Vec<usize>,
}

impl SpaceMap {
    pub fn spins(&self) -> usize {
        self.n
    }

    pub fn logical_qubits(&self) -> usize {
        self.n / 2
    }

    /// Full-basis integers of the zero-magnetization sector, ascending.
    pub fn dfs_indices(&self) -> &[usize] {
        &self.dfs_indices
    }

    /// Full-basis integers of the pair-encoded logical states, ascending.
    /// Position k in this list is logical basis state k.
    pub fn logical_indices(&self) -> &[usize] {
        &self.logical_indices
    }

    pub fn full_space(&self) -> Space {
        Space::Full(self.n)
    }

    pub fn dfs_space(&self) -> Space {
        Space::Dfs(self.n)
    }

    pub fn logical_space(&self) -> Space {
        Space::Logical(self.n / 2)
    }

    /// The ascending full-index list that defines basis order for `space`.
    fn index_list(&self, space: Space) -> Result<Vec<usize>> {
        match space {
            Space::Full(n) if n == self.n => Ok((0..Space::Full(n).dim()).collect()),
            Space::Dfs(n) if n == self.n => Ok(self.dfs_indices.clone()),
            Space::Logical(nl) if nl == self.n / 2 => Ok(self.logical_indices.clone()),
            other => Err(CoreError::SpaceMismatch {
                expected: self.full_space(),
                found: other,
            }),
        }
    }
}

/// Enumerate the zero-magnetization sector and the logical sublist for `n`
/// spins (n even, n <= 16).
pub fn dfs_basis(n: usize) -> Result<SpaceMap> {
    if n == 0 || n % 2 != 0 {
        return Err(CoreError::invalid(format!(
            "sector enumeration needs an even spin count, got {n}"
        )));
    }
    if n > MAX_FULL_SPINS {
        return Err(CoreError::DimensionGuard {
            requested: n,
            limit: MAX_FULL_SPINS,
        });
    }
    let dim = 1usize << n;
    let half = n / 2;
    let mut dfs_indices = Vec::new();
    let mut logical_indices = Vec::new();
    for b in 0..dim {
        if b.count_ones() as usize != half {
            continue;
        }
        dfs_indices.push(b);
        let pair_encoded = (0..half).all(|pair| {
            let hi = b & site_mask(2 * pair, n) != 0;
            let lo = b & site_mask(2 * pair + 1, n) != 0;
            hi != lo
        });
        if pair_encoded {
            logical_indices.push(b);
        }
    }
    Ok(SpaceMap {
        n,
        dfs_indices,
        logical_indices,
    })
}

/// Axis of a logical single-qubit generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicalAxis {
    X,
    Y,
    Z,
}

/// Logical SU(2) generator on pair `l` (1-indexed), as a full-space operator:
/// T_x = (X1 X2 + Y1 Y2)/2, T_y = (Y1 X2 - X1 Y2)/2, T_z = (Z1 - Z2)/2 on the
/// pair's two spins. Restricted to the logical subspace these act as the
/// Pauli matrices on logical qubit l; they annihilate the aligned pair states.
pub fn logical_op(axis: LogicalAxis, pair: usize, n: usize) -> Result<Operator> {
    if n % 2 != 0 {
        return Err(CoreError::invalid("logical operators need an even spin count"));
    }
    if pair == 0 || pair > n / 2 {
        return Err(CoreError::IndexOutOfRange {
            what: "pair",
            index: pair,
            bound: n / 2 + 1,
        });
    }
    let space = Space::Full(n);
    let dim = space.dim();
    let m1 = site_mask(2 * pair - 2, n);
    let m2 = site_mask(2 * pair - 1, n);
    let mut triplets = Vec::new();
    for b in 0..dim {
        let hi_down = b & m1 != 0;
        let lo_down = b & m2 != 0;
        match axis {
            LogicalAxis::X => {
                if hi_down != lo_down {
                    triplets.push((b ^ m1 ^ m2, b, C64::new(1.0, 0.0)));
                }
            }
            LogicalAxis::Y => {
                if hi_down != lo_down {
                    // up-down -> +i down-up, down-up -> -i up-down
                    let phase = if hi_down {
                        C64::new(0.0, -1.0)
                    } else {
                        C64::new(0.0, 1.0)
                    };
                    triplets.push((b ^ m1 ^ m2, b, phase));
                }
            }
            LogicalAxis::Z => {
                let z1 = if hi_down { -1.0 } else { 1.0 };
                let z2 = if lo_down { -1.0 } else { 1.0 };
                let val = (z1 - z2) / 2.0;
                if val != 0.0 {
                    triplets.push((b, b, C64::new(val, 0.0)));
                }
            }
        }
    }
    Operator::from_triplets(space, triplets, true)
}

/// Entangling generator between logical qubits l1 and l2: the physical
/// two-body operator -Z_{2*l1} Z_{2*l2 - 1} (spins 1-indexed), which restricted
/// to the logical subspace equals Z_L(l1) Z_L(l2).
pub fn logical_zz(pair1: usize, pair2: usize, n: usize) -> Result<Operator> {
    if pair1 == pair2 {
        return Err(CoreError::invalid(
            "entangling generator needs two distinct pairs",
        ));
    }
    for &p in &[pair1, pair2] {
        if p == 0 || p > n / 2 {
            return Err(CoreError::IndexOutOfRange {
                what: "pair",
                index: p,
                bound: n / 2 + 1,
            });
        }
    }
    let space = Space::Full(n);
    // second spin of pair1, first spin of pair2 (0-indexed sites)
    let site_a = 2 * pair1 - 1;
    let site_b = 2 * pair2 - 2;
    let ma = site_mask(site_a, n);
    let mb = site_mask(site_b, n);
    let diag: Vec<f64> = (0..space.dim())
        .map(|b| {
            let za = if b & ma != 0 { -1.0 } else { 1.0 };
            let zb = if b & mb != 0 { -1.0 } else { 1.0 };
            -za * zb
        })
        .collect();
    Operator::from_real_diagonal(space, &diag)
}

/// Verdict of the sector-preservation check.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryCheck {
    /// True when the commutator with total Z vanishes within tolerance.
    pub preserves_sector: bool,
    /// Max-norm of [H, Z_total], for diagnostics.
    pub commutator_norm: f64,
}

/// Check [H, Z_total] = 0, the condition for dephasing protection.
pub fn check_symmetry(h: &Operator) -> Result<SymmetryCheck> {
    let n = match h.space() {
        Space::Full(n) => n,
        other => {
            return Err(CoreError::SpaceMismatch {
                expected: Space::Full(other.spins()),
                found: other,
            })
        }
    };
    // [H, Z]_{rc} = H_{rc} (z_c - z_r) for diagonal Z, so the max-norm needs
    // only the stored entries
    let z = |b: usize| magnetization(b, n) as f64;
    let mut norm: f64 = 0.0;
    match h.storage() {
        crate::spinlab::Storage::Dense(m) => {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    norm = norm.max(m[(r, c)].norm() * (z(c) - z(r)).abs());
                }
            }
        }
        crate::spinlab::Storage::Sparse(csr) => {
            for (r, c, v) in csr.iter() {
                norm = norm.max(v.norm() * (z(c) - z(r)).abs());
            }
        }
    }
    Ok(SymmetryCheck {
        preserves_sector: norm < tol::SYMMETRY_COMMUTATOR,
        commutator_norm: norm,
    })
}

/// Result of restricting a state to a subspace.
#[derive(Debug, Clone)]
pub struct Projection {
    /// Weight lost to the orthogonal complement: 1 - |restriction|^2.
    pub leakage: f64,
    /// Renormalized restriction; None when the leakage was too large to
    /// renormalize honestly.
    pub state: Option<QuantumState>,
}

/// Lift a state into a larger space (amplitudes land at the mapped indices,
/// zero elsewhere), or restrict it exactly into a smaller one. Exact
/// restriction fails with a leakage error if the state has out-of-subspace
/// support above the embedding tolerance.
pub fn embed(psi: &QuantumState, target: Space, map: &SpaceMap) -> Result<QuantumState> {
    let source_list = map.index_list(psi.space())?;
    let target_list = map.index_list(target)?;
    if source_list.len() <= target_list.len() {
        let mut out = DVector::from_element(target.dim(), C64::new(0.0, 0.0));
        for (i, &full_idx) in source_list.iter().enumerate() {
            let j = target_list
                .binary_search(&full_idx)
                .map_err(|_| CoreError::invalid("source space is not contained in target"))?;
            out[j] = psi.amplitudes()[i];
        }
        QuantumState::new(target, out)
    } else {
        // strict restriction: tolerate only negligible outside support
        let (restricted, leakage) = restrict(psi, &source_list, &target_list, target);
        if leakage > tol::EMBED_LEAKAGE {
            return Err(CoreError::Leakage {
                leakage,
                tolerance: tol::EMBED_LEAKAGE,
            });
        }
        QuantumState::normalized(target, restricted)
    }
}

/// Restrict a state to a smaller space, reporting the leaked weight.
/// The restriction is renormalized only when leakage stays below the
/// renormalization tolerance.
pub fn project(psi: &QuantumState, target: Space, map: &SpaceMap) -> Result<Projection> {
    let source_list = map.index_list(psi.space())?;
    let target_list = map.index_list(target)?;
    if target_list.len() > source_list.len() {
        return Err(CoreError::invalid(
            "projection target must be a subspace of the source",
        ));
    }
    let (restricted, leakage) = restrict(psi, &source_list, &target_list, target);
    let state = if leakage < tol::PROJECTION_RENORM {
        Some(QuantumState::normalized(target, restricted)?)
    } else {
        None
    };
    Ok(Projection { leakage, state })
}

fn restrict(
    psi: &QuantumState,
    source_list: &[usize],
    target_list: &[usize],
    target: Space,
) -> (DVector<C64>, f64) {
    let mut out = DVector::from_element(target.dim(), C64::new(0.0, 0.0));
    let mut kept = 0.0;
    for (j, &full_idx) in target_list.iter().enumerate() {
        if let Ok(i) = source_list.binary_search(&full_idx) {
            out[j] = psi.amplitudes()[i];
            kept += out[j].norm_sqr();
        }
    }
    (out, (1.0 - kept).max(0.0))
}

/// Restriction of a full-space operator to a tagged subspace: the submatrix
/// over the subspace's basis indices.
pub fn restrict_operator(op: &Operator, target: Space, map: &SpaceMap) -> Result<Operator> {
    if op.space() != map.full_space() {
        return Err(CoreError::SpaceMismatch {
            expected: map.full_space(),
            found: op.space(),
        });
    }
    let list = map.index_list(target)?;
    let dense = op.to_dense();
    let sub = DMatrix::from_fn(list.len(), list.len(), |r, c| dense[(list[r], list[c])]);
    Operator::from_dense(target, sub, op.is_hermitian_flagged())
}

/// Max deviation (up to global phase) of the composed logical circuit from a
/// CNOT on two logical qubits, built at n = 4 from the entangling generator
/// and single-logical-qubit rotations.
pub fn cnot_check() -> Result<f64> {
    let n = 4;
    let map = dfs_basis(n)?;
    let quarter = std::f64::consts::FRAC_PI_4;
    let half = std::f64::consts::FRAC_PI_2;

    let tz1 = logical_op(LogicalAxis::Z, 1, n)?;
    let tz2 = logical_op(LogicalAxis::Z, 2, n)?;
    let ty2 = logical_op(LogicalAxis::Y, 2, n)?;
    let zz = logical_zz(1, 2, n)?;

    let exp =
        |op: &Operator, angle: f64| crate::spinlab::expm_hermitian(&op.to_dense(), -angle);
    // controlled-Z from the entangling generator, diagonal factors commute:
    // CZ ~ exp(-i pi/4 Z1) exp(-i pi/4 Z2) exp(+i pi/4 Z1 Z2)
    let cz = exp(&tz1, -quarter) * exp(&tz2, -quarter) * exp(&zz, quarter);
    // Hadamard on the target qubit up to phase: Ry(pi/2) Rz(pi) with
    // R_a(theta) = exp(-i theta/2 A)
    let had2 = exp(&ty2, -quarter) * exp(&tz2, -half);
    let composed = &had2 * cz * &had2;

    // restrict to the logical subspace
    let list = map.logical_indices();
    let u = DMatrix::from_fn(4, 4, |r, c| composed[(list[r], list[c])]);

    // unitarity of the restriction
    let gram = u.adjoint() * &u;
    let id = DMatrix::<C64>::identity(4, 4);
    let unitarity_dev = (gram - id).iter().fold(0.0f64, |a, v| a.max(v.norm()));
    if unitarity_dev > 1e-10 {
        return Err(CoreError::Numerical(format!(
            "composed circuit restriction is not unitary (deviation {unitarity_dev:.3e})"
        )));
    }

    // CNOT with logical qubit 1 (most significant) as control
    let mut cnot = DMatrix::from_element(4, 4, C64::new(0.0, 0.0));
    cnot[(0, 0)] = C64::new(1.0, 0.0);
    cnot[(1, 1)] = C64::new(1.0, 0.0);
    cnot[(2, 3)] = C64::new(1.0, 0.0);
    cnot[(3, 2)] = C64::new(1.0, 0.0);

    Ok(max_diff_up_to_phase(&u, &cnot))
}

/// Max-norm distance between unitaries after removing the optimal global phase.
pub fn max_diff_up_to_phase(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let inner = (b.adjoint() * a).trace();
    let phase = if inner.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        inner / C64::new(inner.norm(), 0.0)
    };
    (a - b * phase).iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
}
