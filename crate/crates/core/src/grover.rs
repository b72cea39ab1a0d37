//! Continuous-time search: oracle plus uniform driver.
//!
//! The search Hamiltonian is H = -|s><s| - |w><w| with |s> the uniform
//! superposition over the chosen space. Propagation from |s> stays in
//! span{|w>, |r>} and admits a closed form; the module exposes both the
//! numerical and the analytic route so each can check the other. The driver
//! also has an equivalent expansion as a sum over balanced raising/lowering
//! strings, verified combinatorially on the zero-magnetization sector.

use crate::dfs::{dfs_basis, SpaceMap};
use crate::error::{CoreError, Result};
use crate::space::Space;
use crate::spinlab::{Operator, QuantumState};
use crate::C64;
use nalgebra::{DMatrix, DVector};

/// One search problem: a space, its dimension, and the marked basis index.
#[derive(Debug, Clone, Copy)]
pub struct GroverInstance {
    space: Space,
    w_index: usize,
}

impl GroverInstance {
    /// The marked state must index a basis vector of a logical or sector space.
    pub fn new(space: Space, w_index: usize) -> Result<Self> {
        match space {
            Space::Logical(_) | Space::Dfs(_) => {}
            Space::Full(_) => {
                return Err(CoreError::invalid(
                    "search runs in the logical or sector space; embed afterwards",
                ))
            }
        }
        if w_index >= space.dim() {
            return Err(CoreError::IndexOutOfRange {
                what: "marked state",
                index: w_index,
                bound: space.dim(),
            });
        }
        Ok(GroverInstance { space, w_index })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn w_index(&self) -> usize {
        self.w_index
    }

    /// Search-space dimension N.
    pub fn search_dim(&self) -> usize {
        self.space.dim()
    }

    /// Overlap x = <w|s> = 1/sqrt(N).
    pub fn overlap_x(&self) -> f64 {
        1.0 / (self.search_dim() as f64).sqrt()
    }

    pub fn marked_state(&self) -> QuantumState {
        QuantumState::basis_state(self.space, self.w_index).expect("validated on construction")
    }
}

/// Equal superposition of all basis vectors of a space.
pub fn uniform_state(space: Space) -> QuantumState {
    let dim = space.dim();
    let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    QuantumState::new(space, DVector::from_element(dim, amp)).expect("uniform state is normalized")
}

/// The search Hamiltonian -|s><s| - |w><w|.
pub fn grover_h(inst: &GroverInstance) -> Operator {
    let s = uniform_state(inst.space);
    let driver = Operator::outer(inst.space, -1.0, s.amplitudes()).expect("dims agree");
    let w = inst.marked_state();
    let oracle = Operator::outer(inst.space, -1.0, w.amplitudes()).expect("dims agree");
    driver
        .linear_combination(C64::new(1.0, 0.0), &oracle, C64::new(1.0, 0.0))
        .expect("same space")
}

/// Closed-form amplitudes of the evolving state on (|w>, |r>), where
/// |r> = (|s> - x|w>)/sqrt(1-x^2): starting from |s>,
/// a_w(t) = e^{it} (x cos xt + i sin xt), a_r(t) = e^{it} sqrt(1-x^2) cos xt.
pub fn analytic_amplitudes(t: f64, search_dim: usize) -> (C64, C64) {
    let x = 1.0 / (search_dim as f64).sqrt();
    let phase = C64::from_polar(1.0, t);
    let (sin_xt, cos_xt) = (x * t).sin_cos();
    let a_w = phase * C64::new(x * cos_xt, sin_xt);
    let a_r = phase * C64::new((1.0 - x * x).sqrt() * cos_xt, 0.0);
    (a_w, a_r)
}

/// Probability of measuring the marked state at time t: |a_w(t)|^2.
pub fn success_probability(t: f64, search_dim: usize) -> f64 {
    analytic_amplitudes(t, search_dim).0.norm_sqr()
}

/// First time the success probability reaches exactly 1: (pi/2) sqrt(N).
pub fn peak_time(search_dim: usize) -> f64 {
    std::f64::consts::FRAC_PI_2 * (search_dim as f64).sqrt()
}

/// Period of the success probability in t: pi sqrt(N).
pub fn probability_period(search_dim: usize) -> f64 {
    std::f64::consts::PI * (search_dim as f64).sqrt()
}

/// Combinatorial check of the driver expansion: the sum over all balanced
/// raising/lowering strings, projected on the zero-magnetization sector,
/// equals N_sec |s><s| - I there. Returns the max entrywise deviation.
pub fn driver_string_check(n: usize) -> Result<f64> {
    if n % 2 != 0 {
        return Err(CoreError::invalid("string check needs an even spin count"));
    }
    if n > 8 {
        return Err(CoreError::DimensionGuard {
            requested: n,
            limit: 8,
        });
    }
    let map = dfs_basis(n)?;
    let sum = string_sum_on_sector(n, &map);
    let n_sec = map.dfs_indices().len();
    // N_sec |s><s| - I has zero diagonal and ones everywhere else
    let mut dev: f64 = 0.0;
    for r in 0..n_sec {
        for c in 0..n_sec {
            let expected = if r == c { 0.0 } else { 1.0 };
            dev = dev.max((sum[(r, c)] - C64::new(expected, 0.0)).norm());
        }
    }
    Ok(dev)
}

/// Brute-force sum over strings: for every pair of disjoint equal-size site
/// sets (A, B), the operator that flips A from up to down and B from down to
/// up. Enumerating ordered pairs already includes each string's adjoint.
fn string_sum_on_sector(n: usize, map: &SpaceMap) -> DMatrix<C64> {
    let sector = map.dfs_indices();
    let n_sec = sector.len();
    let mut sum = DMatrix::from_element(n_sec, n_sec, C64::new(0.0, 0.0));
    let full_masks: Vec<usize> = (0..n).map(|s| crate::space::site_mask(s, n)).collect();
    let all_sites = (1usize << n) - 1;
    // iterate subset pairs as bitmasks over sites
    for a in 1..=all_sites {
        let k = a.count_ones();
        if k == 0 || k as usize > n / 2 {
            continue;
        }
        for b in 1..=all_sites {
            if b.count_ones() != k || a & b != 0 {
                continue;
            }
            // translate site masks to basis-bit masks
            let mut raise_mask = 0usize; // sites flipped up -> down
            let mut lower_mask = 0usize; // sites flipped down -> up
            for site in 0..n {
                if a & (1 << site) != 0 {
                    raise_mask |= full_masks[site];
                }
                if b & (1 << site) != 0 {
                    lower_mask |= full_masks[site];
                }
            }
            for (col, &basis) in sector.iter().enumerate() {
                // applicability: A sites up (bit 0), B sites down (bit 1)
                if basis & raise_mask == 0 && basis & lower_mask == lower_mask {
                    let image = (basis | raise_mask) & !lower_mask;
                    let row = sector
                        .binary_search(&image)
                        .expect("balanced strings preserve the sector");
                    sum[(row, col)] += C64::new(1.0, 0.0);
                }
            }
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinlab::{eig_lowest, evolve};
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_state_amplitudes() {
        let s = uniform_state(Space::Logical(3));
        assert_eq!(s.dim(), 8);
        for a in s.amplitudes().iter() {
            assert_abs_diff_eq!(a.re, 1.0 / 8.0_f64.sqrt(), epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
        // overlap with any marked state is 1/sqrt(N)
        for w in 0..8 {
            let inst = GroverInstance::new(Space::Logical(3), w).unwrap();
            let overlap = inst.marked_state().overlap(&s).unwrap();
            assert_abs_diff_eq!(overlap.re, inst.overlap_x(), epsilon = 1e-15);
        }
    }

    #[test]
    fn grover_h_spectrum() {
        // rank 2: everything orthogonal to span{s, w} sits at 0
        let inst = GroverInstance::new(Space::Logical(2), 1).unwrap();
        let h = grover_h(&inst);
        let eig = h.to_dense().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        let x = inst.overlap_x();
        assert_abs_diff_eq!(vals[0], -(1.0 + x), epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], -(1.0 - x), epsilon = 1e-12);
        for v in &vals[2..] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn grover_h_two_dim_lowest_eigenvalue() {
        let inst = GroverInstance::new(Space::Logical(1), 0).unwrap();
        let h = grover_h(&inst);
        let pairs = eig_lowest(&h, 1).unwrap();
        assert_abs_diff_eq!(pairs[0].0, -(1.0 + 1.0 / 2.0_f64.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn grover_h_uniform_expectation() {
        let inst = GroverInstance::new(Space::Logical(3), 5).unwrap();
        let h = grover_h(&inst);
        let s = uniform_state(inst.space());
        let n = inst.search_dim() as f64;
        assert_abs_diff_eq!(s.expectation(&h).unwrap(), -1.0 - 1.0 / n, epsilon = 1e-12);
    }

    #[test]
    fn analytic_initial_amplitudes() {
        let n = 16;
        let (a_w, a_r) = analytic_amplitudes(0.0, n);
        let x = 1.0 / (n as f64).sqrt();
        assert_abs_diff_eq!(a_w.re, x, epsilon = 1e-15);
        assert_abs_diff_eq!(a_w.im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a_r.re, (1.0 - x * x).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn analytic_amplitudes_stay_normalized() {
        for &n in &[2usize, 8, 64] {
            for k in 0..25 {
                let t = 0.37 * k as f64;
                let (a_w, a_r) = analytic_amplitudes(t, n);
                assert_abs_diff_eq!(a_w.norm_sqr() + a_r.norm_sqr(), 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn peak_reaches_unity() {
        let n = 64;
        assert!(success_probability(peak_time(n), n) >= 1.0 - 1e-12);
        assert_abs_diff_eq!(success_probability(0.0, n), 1.0 / n as f64, epsilon = 1e-15);
    }

    #[test]
    fn success_probability_periodicity() {
        let n = 32;
        for k in 0..10 {
            let t = 0.9 * k as f64;
            assert_abs_diff_eq!(
                success_probability(t, n),
                success_probability(t + probability_period(n), n),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn analytic_matches_numerical_propagation() {
        let inst = GroverInstance::new(Space::Logical(3), 6).unwrap();
        let h = grover_h(&inst);
        let s = uniform_state(inst.space());
        let w = inst.marked_state();
        let t = 2.0;
        let evolved = evolve(&h, &s, t).unwrap();
        let numeric = w.overlap(&evolved).unwrap().norm_sqr();
        let analytic = success_probability(t, inst.search_dim());
        assert_abs_diff_eq!(numeric, analytic, epsilon = 1e-9);
    }

    #[test]
    fn string_sum_two_spins() {
        // single pair: the only balanced strings swap up-down and down-up,
        // giving exactly the off-diagonal of 2|s><s| - I on the sector
        let map = dfs_basis(2).unwrap();
        let sum = string_sum_on_sector(2, &map);
        assert_abs_diff_eq!(sum[(0, 1)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sum[(1, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sum[(0, 0)].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sum[(1, 1)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn string_identity_four_spins() {
        assert!(driver_string_check(4).unwrap() < 1e-12);
    }

    #[test]
    fn string_identity_six_spins() {
        assert!(driver_string_check(6).unwrap() < 1e-12);
    }

    #[test]
    fn marked_index_out_of_range() {
        assert!(GroverInstance::new(Space::Logical(2), 4).is_err());
    }
}
