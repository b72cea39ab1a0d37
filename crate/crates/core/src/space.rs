//! State spaces and the basis-ordering convention.
//!
//! Every operator and state carries a [`Space`] tag. Three spaces occur:
//!
//! - `Full(n)`: the 2^n product space of n spins,
//! - `Dfs(n)`: the zero-magnetization sector, dimension C(n, n/2),
//! - `Logical(n_l)`: the pair-encoded subspace, dimension 2^{n_l}.
//!
//! Basis convention, used everywhere: a full-space basis state is the integer
//! whose bit for spin i (1-indexed, spin 1 = most significant of the n-bit word)
//! is 0 for up and 1 for down. A logical basis state is the integer whose bit for
//! logical qubit l (qubit 1 most significant) is 0 for the pair state up-down and
//! 1 for down-up. All index maps derive from this single ordering.

use std::fmt;

/// Tag identifying which state space a vector or matrix lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    /// Full 2^n product space of `n` spins.
    Full(usize),
    /// Zero-magnetization sector of `n` spins (n even), dimension C(n, n/2).
    Dfs(usize),
    /// Pair-encoded logical space of `n_l` qubits, dimension 2^{n_l}.
    Logical(usize),
}

impl Space {
    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        match *self {
            Space::Full(n) => 1usize << n,
            Space::Dfs(n) => binomial(n, n / 2),
            Space::Logical(nl) => 1usize << nl,
        }
    }

    /// Number of physical spins underlying this space.
    pub fn spins(&self) -> usize {
        match *self {
            Space::Full(n) | Space::Dfs(n) => n,
            Space::Logical(nl) => 2 * nl,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Space::Full(n) => write!(f, "full({n})"),
            Space::Dfs(n) => write!(f, "dfs({n})"),
            Space::Logical(nl) => write!(f, "logical({nl})"),
        }
    }
}

/// Binomial coefficient C(n, k) in exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Bit mask selecting spin `site` (0-indexed from spin 1) in an n-spin word.
#[inline]
pub fn site_mask(site: usize, n: usize) -> usize {
    1usize << (n - 1 - site)
}

/// True when spin `site` points down in basis state `basis`.
#[inline]
pub fn is_down(basis: usize, site: usize, n: usize) -> bool {
    basis & site_mask(site, n) != 0
}

/// Eigenvalue of the total-Z operator on a basis state: (#up - #down).
#[inline]
pub fn magnetization(basis: usize, n: usize) -> i64 {
    let downs = basis.count_ones() as i64;
    n as i64 - 2 * downs
}

/// Render a basis state as an arrow pattern, spin 1 leftmost.
pub fn pattern(basis: usize, n: usize) -> String {
    (0..n)
        .map(|site| if is_down(basis, site, n) { '↓' } else { '↑' })
        .collect()
}
