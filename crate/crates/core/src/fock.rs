//! Fock space of an `N`-site chain and the Hubbard Hamiltonian.
//!
//! Fermionic modes are ordered `(site 0 up, site 0 down, site 1 up, site 1 down, ...)`.
//! Occupation states are bitstrings laid out so that the integer value of a
//! state is its index in the site tensor product with site 0 as the leading
//! factor, and inside a site the local index is `n_up + 2 n_down`:
//!
//! | local index | occupancy |
//! |-------------|-----------|
//! | 0           | `|0>`     |
//! | 1           | `|up>`    |
//! | 2           | `|down>`  |
//! | 3           | `|up down>` |
//!
//! Jordan-Wigner signs count occupied modes that precede the acted-on mode
//! in the mode ordering. Every partial trace in [`crate::states`] relies on
//! this layout.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

pub const MIN_SITES: usize = 1;
pub const MAX_SITES: usize = 6;

/// Local dimension of a dot.
pub const SITE_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_sites: usize,
    /// For each mode, the bits of all modes that precede it.
    preceding: Vec<u32>,
}

/// Enumerates the `4^N` occupation states of an `N`-site chain.
pub fn build_basis(n_sites: usize) -> Result<FockBasis> {
    if !(MIN_SITES..=MAX_SITES).contains(&n_sites) {
        return Err(Error::Config(format!(
            "n_sites = {n_sites} is outside the supported range {MIN_SITES}..={MAX_SITES}"
        )));
    }
    let mut basis = FockBasis {
        n_sites,
        preceding: Vec::with_capacity(2 * n_sites),
    };
    for mode in 0..2 * n_sites {
        let mask = (0..mode).fold(0u32, |m, k| m | basis.bit(k));
        basis.preceding.push(mask);
    }
    Ok(basis)
}

impl FockBasis {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << (2 * self.n_sites)
    }

    /// All occupation bitstrings in ascending order.
    pub fn states(&self) -> impl Iterator<Item = u32> {
        0..self.dim() as u32
    }

    pub fn mode(&self, site: usize, spin: Spin) -> usize {
        2 * site + spin.offset()
    }

    /// Bit carrying the occupation of `mode`.
    pub fn bit(&self, mode: usize) -> u32 {
        let site = mode / 2;
        let spin = mode % 2;
        1 << (2 * (self.n_sites - 1 - site) + spin)
    }

    pub fn is_occupied(&self, state: u32, mode: usize) -> bool {
        state & self.bit(mode) != 0
    }

    /// Local occupancy index (0..4) of `site` in `state`.
    pub fn site_state(&self, state: u32, site: usize) -> usize {
        ((state >> (2 * (self.n_sites - 1 - site))) & 0b11) as usize
    }

    pub fn particle_count(&self, state: u32) -> u32 {
        state.count_ones()
    }

    /// Twice the S_z quantum number of `state`.
    pub fn twice_sz(&self, state: u32) -> i32 {
        let up = (0..self.n_sites)
            .filter(|&s| self.is_occupied(state, self.mode(s, Spin::Up)))
            .count();
        let down = (0..self.n_sites)
            .filter(|&s| self.is_occupied(state, self.mode(s, Spin::Down)))
            .count();
        up as i32 - down as i32
    }

    /// Acts with `c_mode^dagger` or `c_mode` on a basis state.
    ///
    /// Returns `None` when the state is annihilated, otherwise the
    /// Jordan-Wigner sign and the new state.
    pub fn apply_fermionic(&self, state: u32, mode: usize, kind: Ladder) -> Option<(f64, u32)> {
        assert!(
            mode < self.n_modes(),
            "mode {mode} out of range for {} modes",
            self.n_modes()
        );
        let bit = self.bit(mode);
        let occupied = state & bit != 0;
        match (kind, occupied) {
            (Ladder::Create, true) | (Ladder::Annihilate, false) => None,
            _ => {
                let parity = (state & self.preceding[mode]).count_ones();
                let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
                Some((sign, state ^ bit))
            }
        }
    }

    /// `c_to^dagger c_from` on a basis state.
    pub fn hop(&self, state: u32, to: usize, from: usize) -> Option<(f64, u32)> {
        let (s1, mid) = self.apply_fermionic(state, from, Ladder::Annihilate)?;
        let (s2, out) = self.apply_fermionic(mid, to, Ladder::Create)?;
        Some((s1 * s2, out))
    }

    /// Diagonal operator `sum_modes w(mode) n_mode`, assembled through the ladder primitives.
    fn mode_sum_operator(&self, weight: impl Fn(usize) -> f64) -> HermitianOperator {
        let dim = self.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for s in self.states() {
            for mode in 0..self.n_modes() {
                if let Some((sign, out)) = self.hop(s, mode, mode) {
                    m[(out as usize, s as usize)] += C64::new(sign * weight(mode), 0.0);
                }
            }
        }
        HermitianOperator { matrix: m }
    }

    pub fn number_operator(&self) -> HermitianOperator {
        self.mode_sum_operator(|_| 1.0)
    }

    /// `S_z = (n_up - n_down) / 2` summed over sites.
    pub fn sz_operator(&self) -> HermitianOperator {
        self.mode_sum_operator(|mode| if mode % 2 == 0 { 0.5 } else { -0.5 })
    }
}

/// Parameters of the open-boundary Hubbard chain; `t` sets the energy unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubbardParams {
    pub n_sites: usize,
    pub t: f64,
    /// On-site repulsion in units of `t`.
    pub u: f64,
}

impl HubbardParams {
    pub fn new(n_sites: usize, u: f64) -> Result<Self> {
        Self::with_hopping(n_sites, 1.0, u)
    }

    pub fn with_hopping(n_sites: usize, t: f64, u: f64) -> Result<Self> {
        if !(MIN_SITES..=MAX_SITES).contains(&n_sites) {
            return Err(Error::Config(format!(
                "n_sites = {n_sites} is outside the supported range {MIN_SITES}..={MAX_SITES}"
            )));
        }
        if !(u.is_finite() && u >= 0.0) {
            return Err(Error::Config(format!("U must be finite and >= 0, got {u}")));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Config(format!("t must be finite and >= 0, got {t}")));
        }
        Ok(HubbardParams { n_sites, t, u })
    }
}

/// Dense complex Hermitian matrix on the Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
}

pub const HERMITIAN_TOL: f64 = 1e-12;

impl HermitianOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Contract(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let op = HermitianOperator { matrix };
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::Contract(format!(
                "operator is not Hermitian (max |H - H^dagger| = {defect:e})"
            )));
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Max-norm of `H - H^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Max-norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &HermitianOperator) -> f64 {
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }
}

/// Assembles `H = -t sum_{i,sigma} (c+_{i,s} c_{i+1,s} + h.c.) + u sum_i n_{i,up} n_{i,down}`
/// with open boundaries.
pub fn build_hamiltonian(basis: &FockBasis, params: &HubbardParams) -> HermitianOperator {
    assert_eq!(
        basis.n_sites(),
        params.n_sites,
        "basis and parameters disagree on the chain length"
    );
    let dim = basis.dim();
    let n = basis.n_sites();
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for s in basis.states() {
        let col = s as usize;
        let doubles = (0..n).filter(|&i| basis.site_state(s, i) == 3).count();
        h[(col, col)] += C64::new(params.u * doubles as f64, 0.0);

        if params.t == 0.0 {
            continue;
        }
        for i in 0..n.saturating_sub(1) {
            for spin in [Spin::Up, Spin::Down] {
                let a = basis.mode(i, spin);
                let b = basis.mode(i + 1, spin);
                for (to, from) in [(a, b), (b, a)] {
                    if let Some((sign, out)) = basis.hop(s, to, from) {
                        h[(out as usize, col)] += C64::new(-params.t * sign, 0.0);
                    }
                }
            }
        }
    }
    HermitianOperator { matrix: h }
}
