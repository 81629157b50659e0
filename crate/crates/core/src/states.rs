//! Ground-state and thermal density matrices and their reductions to site subsets.
//!
//! Partial traces act on the site tensor factorization of the Fock basis
//! (see [`crate::fock`]). For number- and S_z-conserving Hamiltonians the
//! states carry no coherence between sectors of different local fermion
//! parity, so this agrees with the fermionic partial trace for contiguous
//! site blocks. Non-adjacent pairs use the same tensor-factor trace.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, SITE_DIM};
use crate::spectral::{cluster_degeneracies, DegeneracyClusters, Spectrum, DEFAULT_DEG_TOL};
use crate::C64;

pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;

/// Density matrix, optionally tagged with the inverse temperature `t / kT`
/// it was prepared at (`f64::INFINITY` for the ground-state projector).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    beta: Option<f64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Contract(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let rho = DensityMatrix { matrix, beta: None };
        let herm = rho.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::Contract(format!(
                "density matrix is not Hermitian (defect {herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Contract(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::Contract(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    /// `|psi><psi|` for a normalized vector.
    pub fn from_pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "state vector has norm {norm}, expected 1"
            )));
        }
        Ok(DensityMatrix {
            matrix: psi * psi.adjoint(),
            beta: None,
        })
    }

    /// Maximally mixed state on `dim` levels.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
            beta: Some(0.0),
        }
    }

    pub(crate) fn from_trusted(matrix: DMatrix<C64>, beta: Option<f64>) -> Self {
        DensityMatrix { matrix, beta }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

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

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitian_part())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub(crate) fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0)
    }

    /// `(1/2) || self - other ||_1`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(
            self.dim(),
            other.dim(),
            "trace distance between different dimensions"
        );
        let diff = &self.matrix - &other.matrix;
        let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
        0.5 * SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .map(|x| x.abs())
            .sum::<f64>()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_entry_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(
            self.dim(),
            other.dim(),
            "entrywise comparison between different dimensions"
        );
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Density matrix of a subset of sites, in ascending site order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub kept_sites: Vec<usize>,
    pub rho: DensityMatrix,
}

impl ReducedState {
    pub fn n_kept(&self) -> usize {
        self.kept_sites.len()
    }

    /// Traces this state further down to `sites` (absolute site labels, a
    /// strictly ascending subset of `kept_sites`).
    pub fn reduce_to(&self, sites: &[usize]) -> Result<ReducedState> {
        check_sites(sites, usize::MAX)?;
        let positions: Vec<usize> = sites
            .iter()
            .map(|s| {
                self.kept_sites.iter().position(|k| k == s).ok_or_else(|| {
                    Error::Domain(format!(
                        "site {s} is not part of the reduced state {:?}",
                        self.kept_sites
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let m = trace_out(self.rho.matrix(), self.n_kept(), &positions);
        Ok(ReducedState {
            kept_sites: sites.to_vec(),
            rho: DensityMatrix::from_trusted(m, None),
        })
    }
}

fn check_sites(sites: &[usize], n_sites: usize) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::Domain("kept site list is empty".into()));
    }
    if sites.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!(
            "kept sites {sites:?} must be strictly ascending"
        )));
    }
    if let Some(&bad) = sites.iter().find(|&&s| s >= n_sites) {
        return Err(Error::Domain(format!(
            "site index {bad} out of range for {n_sites} sites"
        )));
    }
    Ok(())
}

/// For every (kept, traced) index pair, the full Fock index.
fn index_table(n_sites: usize, keep: &[usize]) -> (usize, usize, Vec<usize>) {
    let dk = SITE_DIM.pow(keep.len() as u32);
    let dt = SITE_DIM.pow((n_sites - keep.len()) as u32);
    let mut table = vec![0usize; dk * dt];
    for full in 0..dk * dt {
        let (mut k, mut t) = (0usize, 0usize);
        for site in 0..n_sites {
            let digit = (full / SITE_DIM.pow((n_sites - 1 - site) as u32)) % SITE_DIM;
            if keep.contains(&site) {
                k = k * SITE_DIM + digit;
            } else {
                t = t * SITE_DIM + digit;
            }
        }
        table[k * dt + t] = full;
    }
    (dk, dt, table)
}

/// Tensor-factor partial trace keeping the listed positions of an `n_sites`-qudit matrix.
pub(crate) fn trace_out(m: &DMatrix<C64>, n_sites: usize, keep: &[usize]) -> DMatrix<C64> {
    let (dk, dt, table) = index_table(n_sites, keep);
    DMatrix::from_fn(dk, dk, |a, b| {
        (0..dt)
            .map(|e| m[(table[a * dt + e], table[b * dt + e])])
            .sum()
    })
}

/// Reduced matrix of `|psi><psi|` without forming the full projector.
pub(crate) fn trace_out_pure(psi: &DVector<C64>, n_sites: usize, keep: &[usize]) -> DMatrix<C64> {
    let (dk, dt, table) = index_table(n_sites, keep);
    DMatrix::from_fn(dk, dk, |a, b| {
        (0..dt)
            .map(|e| psi[table[a * dt + e]] * psi[table[b * dt + e]].conj())
            .sum()
    })
}

/// Thermal (or ground, `kT = 0`) state reduced to `kept_sites`, accumulated
/// eigenvector by eigenvector without forming the full density matrix.
///
/// Agrees with `partial_trace(gibbs_state(..))` to rounding.
pub fn reduced_thermal_state(
    spec: &Spectrum,
    kt: f64,
    deg_tol: f64,
    kept_sites: &[usize],
) -> Result<ReducedState> {
    if kt.is_nan() || kt < 0.0 {
        return Err(Error::Domain(format!(
            "temperature kT must be >= 0, got {kt}"
        )));
    }
    let n_sites = spec.params.n_sites;
    check_sites(kept_sites, n_sites)?;
    let weights: Vec<(usize, f64)> = if kt == 0.0 {
        let g0 = cluster_degeneracies(spec, deg_tol).ground_multiplicity();
        (0..g0).map(|k| (k, 1.0 / g0 as f64)).collect()
    } else {
        let e0 = spec.ground_energy();
        let raw: Vec<f64> = spec
            .eigenvalues
            .iter()
            .map(|e| (-(e - e0) / kt).exp())
            .collect();
        let z: f64 = raw.iter().sum();
        raw.iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(k, w)| (k, w / z))
            .collect()
    };
    let (dk, dt, table) = index_table(n_sites, kept_sites);
    // columns: sqrt(w_k) psi_k(a, e) for every (k, e)
    let stacked = DMatrix::from_fn(dk, dt * weights.len(), |a, col| {
        let (k, w) = weights[col / dt];
        spec.eigenvectors[(table[a * dt + col % dt], k)] * w.sqrt()
    });
    let beta = if kt == 0.0 { f64::INFINITY } else { 1.0 / kt };
    Ok(ReducedState {
        kept_sites: kept_sites.to_vec(),
        rho: DensityMatrix::from_trusted(&stacked * stacked.adjoint(), Some(beta)),
    })
}

/// Reduces `rho` to `kept_sites` (0-based, strictly ascending).
pub fn partial_trace(
    rho: &DensityMatrix,
    basis: &FockBasis,
    kept_sites: &[usize],
) -> Result<ReducedState> {
    check_sites(kept_sites, basis.n_sites())?;
    if rho.dim() != basis.dim() {
        return Err(Error::Contract(format!(
            "density matrix dimension {} does not match basis dimension {}",
            rho.dim(),
            basis.dim()
        )));
    }
    let m = trace_out(rho.matrix(), basis.n_sites(), kept_sites);
    Ok(ReducedState {
        kept_sites: kept_sites.to_vec(),
        rho: DensityMatrix::from_trusted(m, rho.beta()),
    })
}

/// Equal-weight mixture over the ground eigenspace, `P0 / g0`.
pub fn ground_state_density(spec: &Spectrum, clusters: &DegeneracyClusters) -> DensityMatrix {
    let g0 = clusters.ground_multiplicity();
    let v = spec.eigenvectors.columns(0, g0);
    let m = (v * v.adjoint()) / C64::new(g0 as f64, 0.0);
    DensityMatrix::from_trusted(m, Some(f64::INFINITY))
}

/// Gibbs state `exp(-H/kT) / Z` built from the spectrum; `kT = 0` gives the
/// ground-state projector mixture.
pub fn gibbs_state(spec: &Spectrum, kt: f64) -> Result<DensityMatrix> {
    if kt.is_nan() || kt < 0.0 {
        return Err(Error::Domain(format!(
            "temperature kT must be >= 0, got {kt}"
        )));
    }
    if kt == 0.0 {
        return Ok(ground_state_density(
            spec,
            &cluster_degeneracies(spec, DEFAULT_DEG_TOL),
        ));
    }
    let e0 = spec.ground_energy();
    let weights: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|e| (-(e - e0) / kt).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let kept: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] > 0.0).collect();
    let dim = spec.dim();
    let scaled = DMatrix::from_fn(dim, kept.len(), |r, c| {
        let k = kept[c];
        spec.eigenvectors[(r, k)] * (weights[k] / z).sqrt()
    });
    Ok(DensityMatrix::from_trusted(
        &scaled * scaled.adjoint(),
        Some(1.0 / kt),
    ))
}

/// Single-site populations `(w_0, w_up, w_down, w_updown)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationWeights {
    pub empty: f64,
    pub up: f64,
    pub down: f64,
    pub double: f64,
}

impl OccupationWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.empty, self.up, self.down, self.double]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

/// Diagonal of a single-site reduced state.
pub fn occupation_weights(rho_site: &ReducedState) -> Result<OccupationWeights> {
    if rho_site.n_kept() != 1 {
        return Err(Error::Contract(format!(
            "occupation weights need a single-site state, got sites {:?}",
            rho_site.kept_sites
        )));
    }
    let d = rho_site.rho.matrix().diagonal();
    Ok(OccupationWeights {
        empty: d[0].re,
        up: d[1].re,
        down: d[2].re,
        double: d[3].re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, HubbardParams};
    use crate::spectral::Spectrum;

    fn spec(n: usize, u: f64) -> Spectrum {
        Spectrum::solve(&HubbardParams::new(n, u).unwrap()).unwrap()
    }

    fn basis_vec(dim: usize, idx: usize) -> DVector<C64> {
        DVector::from_fn(dim, |i, _| {
            if i == idx {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    fn max_entangled_pair() -> DVector<C64> {
        DVector::from_fn(16, |i, _| {
            if i % 5 == 0 {
                C64::new(0.5, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn product_state_reduces_to_pure_site() {
        let b = build_basis(2).unwrap();
        // |up> (x) |down>  ->  local indices (1, 2)
        let rho = DensityMatrix::from_pure(&basis_vec(16, 4 + 2)).unwrap();
        let r = partial_trace(&rho, &b, &[0]).unwrap();
        let w = occupation_weights(&r).unwrap();
        assert_eq!(w.as_array(), [0.0, 1.0, 0.0, 0.0]);
        assert!((r.rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_entangled_reduces_to_identity() {
        let b = build_basis(2).unwrap();
        let rho = DensityMatrix::from_pure(&max_entangled_pair()).unwrap();
        let r = partial_trace(&rho, &b, &[0]).unwrap();
        assert!(r.rho.max_entry_diff(&DensityMatrix::maximally_mixed(4)) < 1e-12);
        assert_eq!(occupation_weights(&r).unwrap().as_array(), [0.25; 4]);
    }

    #[test]
    fn vacuum_weights() {
        let b = build_basis(3).unwrap();
        let rho = DensityMatrix::from_pure(&basis_vec(64, 0)).unwrap();
        let r = partial_trace(&rho, &b, &[1]).unwrap();
        assert_eq!(
            occupation_weights(&r).unwrap().as_array(),
            [1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn partial_trace_errors() {
        let b = build_basis(2).unwrap();
        let rho = DensityMatrix::maximally_mixed(16);
        assert!(partial_trace(&rho, &b, &[]).is_err());
        assert!(partial_trace(&rho, &b, &[1, 0]).is_err());
        assert!(partial_trace(&rho, &b, &[2]).is_err());
        assert!(partial_trace(&DensityMatrix::maximally_mixed(4), &b, &[0]).is_err());
        let pair = partial_trace(&rho, &b, &[0, 1]).unwrap();
        assert!(occupation_weights(&pair).is_err());
    }

    #[test]
    fn ground_mixture_purities() {
        for (u, g0) in [(1.0, 1usize), (3.0, 3), (4.0, 2)] {
            let s = spec(2, u);
            let c = cluster_degeneracies(&s, DEFAULT_DEG_TOL);
            assert_eq!(c.ground_multiplicity(), g0);
            let rho = ground_state_density(&s, &c);
            assert!((rho.purity() - 1.0 / g0 as f64).abs() < 1e-9);
            assert!((rho.trace() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn confinement_state_at_large_u() {
        // (|phi1><phi1| + |phi2><phi2|)/2 with phi_s = (|0 s> + |s 0>)/sqrt(2)
        let s = spec(2, 4.0);
        let rho = gibbs_state(&s, 0.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut expected = DMatrix::<C64>::zeros(16, 16);
        for local in [1usize, 2] {
            let mut phi = DVector::<C64>::zeros(16);
            phi[local] = C64::new(h, 0.0); // |0 s>
            phi[local * 4] = C64::new(h, 0.0); // |s 0>
            expected += &phi * phi.adjoint() * C64::new(0.5, 0.0);
        }
        let expected = DensityMatrix::new(expected).unwrap();
        assert!(rho.max_entry_diff(&expected) < 1e-9);
    }

    #[test]
    fn infinite_temperature_limit() {
        let s = spec(2, 1.0);
        let rho = gibbs_state(&s, 1e6).unwrap();
        assert!(rho.max_entry_diff(&DensityMatrix::maximally_mixed(16)) < 1e-5);
    }

    #[test]
    fn low_temperature_close_to_ground() {
        let s = spec(2, 1.0);
        let ground = gibbs_state(&s, 0.0).unwrap();
        assert!(gibbs_state(&s, 0.01).unwrap().trace_distance(&ground) < 1e-3);
        let gap = s.eigenvalues[1] - s.eigenvalues[0];
        assert!(gibbs_state(&s, 1e-4 * gap).unwrap().trace_distance(&ground) < 1e-6);
    }

    #[test]
    fn negative_temperature_rejected() {
        let s = spec(2, 1.0);
        assert!(matches!(gibbs_state(&s, -0.1), Err(Error::Domain(_))));
        assert!(gibbs_state(&s, f64::NAN).is_err());
    }

    #[test]
    fn single_sites_are_diagonal_and_normalized() {
        for (u, kt) in [(0.0, 0.0), (2.0, 0.0), (2.0, 0.7), (8.0, 3.0)] {
            let s = spec(3, u);
            let b = build_basis(3).unwrap();
            let rho = gibbs_state(&s, kt).unwrap();
            for site in 0..3 {
                let r = partial_trace(&rho, &b, &[site]).unwrap();
                let m = r.rho.matrix();
                for i in 0..4 {
                    for j in 0..4 {
                        if i != j {
                            assert!(m[(i, j)].norm() < 1e-10);
                        }
                    }
                }
                assert!((occupation_weights(&r).unwrap().sum() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn large_u_suppresses_double_occupancy() {
        let s = spec(2, 500.0);
        let b = build_basis(2).unwrap();
        let r = partial_trace(&gibbs_state(&s, 0.0).unwrap(), &b, &[0]).unwrap();
        assert!(occupation_weights(&r).unwrap().double < 1e-3);
    }

    #[test]
    fn nested_reduction_matches_direct() {
        let s = spec(4, 2.0);
        let b = build_basis(4).unwrap();
        let rho = gibbs_state(&s, 0.4).unwrap();
        let pair = partial_trace(&rho, &b, &[1, 3]).unwrap();
        for site in [1, 3] {
            let a = pair.reduce_to(&[site]).unwrap();
            let direct = partial_trace(&rho, &b, &[site]).unwrap();
            assert!(a.rho.max_entry_diff(&direct.rho) < 1e-12);
        }
        assert!(pair.reduce_to(&[2]).is_err());
    }

    #[test]
    fn reduced_thermal_matches_full_route() {
        let b = build_basis(3).unwrap();
        for (u, kt) in [(0.0, 0.0), (3.0, 0.0), (1.0, 0.05), (2.0, 1.5), (8.0, 1e6)] {
            let s = spec(3, u);
            let full = gibbs_state(&s, kt).unwrap();
            for keep in [vec![0, 1], vec![0, 2], vec![1]] {
                let direct = partial_trace(&full, &b, &keep).unwrap();
                let fast = reduced_thermal_state(&s, kt, DEFAULT_DEG_TOL, &keep).unwrap();
                assert!(
                    direct.rho.max_entry_diff(&fast.rho) < 1e-12,
                    "u={u} kt={kt} keep={keep:?}"
                );
            }
        }
        assert!(reduced_thermal_state(&spec(2, 1.0), -1.0, DEFAULT_DEG_TOL, &[0]).is_err());
    }

    #[test]
    fn pure_reduction_matches_density_route() {
        let s = spec(3, 1.0);
        let psi = s.eigenvectors.column(0).into_owned();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let b = build_basis(3).unwrap();
        for keep in [vec![0], vec![0, 2], vec![1, 2]] {
            let a = trace_out_pure(&psi, 3, &keep);
            let d = partial_trace(&rho, &b, &keep).unwrap();
            let diff = (&a - d.rho.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-14);
        }
    }

    #[test]
    fn validation_rejects_invalid_matrices() {
        let mut m = DMatrix::<C64>::identity(4, 4) * C64::new(0.25, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_ok());
        m[(0, 0)] = C64::new(0.5, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_err());
        let neg = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.2, 0.0),
            C64::new(-0.2, 0.0),
        ]));
        assert!(DensityMatrix::new(neg).is_err());
        assert!(DensityMatrix::from_pure(&DVector::from_element(2, C64::new(1.0, 0.0))).is_err());
    }
}
