//! Exact diagonalization and spectrum analysis: degeneracy clusters,
//! energy bands and ground-state level crossings as `U` varies.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{build_basis, build_hamiltonian, HermitianOperator, HubbardParams};
use crate::par::{self, Execution};
use crate::C64;

/// Default relative tolerance for grouping eigenvalues into one level.
pub const DEFAULT_DEG_TOL: f64 = 1e-9;
/// Default band-gap factor for [`count_bands`].
pub const DEFAULT_BAND_GAP_TOL: f64 = 5.0;
/// Target resolution for refined crossing positions.
pub const CROSSING_RESOLUTION: f64 = 1e-6;

const MAX_EIGEN_ITERS: usize = 1_000_000;

/// Full eigendecomposition of a Hamiltonian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the normalized eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<C64>,
    pub params: HubbardParams,
}

impl Spectrum {
    /// Builds and diagonalizes the Hamiltonian for `params`.
    pub fn solve(params: &HubbardParams) -> Result<Spectrum> {
        let basis = build_basis(params.n_sites)?;
        let h = build_hamiltonian(&basis, params);
        diagonalize(&h, params)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `max_k || H v_k - E_k v_k ||_2`.
    pub fn max_residual(&self, h: &HermitianOperator) -> f64 {
        let hv = h.matrix() * &self.eigenvectors;
        (0..self.dim())
            .map(|k| {
                (hv.column(k) - self.eigenvectors.column(k) * C64::new(self.eigenvalues[k], 0.0))
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Max-norm deviation of the eigenvector Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let mut worst = 0.0f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Diagonalizes a Hermitian operator.
///
/// Real matrices (every Hubbard Hamiltonian) go through the real symmetric
/// solver; complex ones through the Hermitian solver.
pub fn diagonalize(h: &HermitianOperator, params: &HubbardParams) -> Result<Spectrum> {
    let fail = |msg: &str| Error::Numerical {
        n_sites: params.n_sites,
        u: params.u,
        msg: msg.to_string(),
    };
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if h.is_real() {
        let real = h.matrix().map(|z| z.re);
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, MAX_EIGEN_ITERS)
            .ok_or_else(|| fail("symmetric eigensolver did not converge"))?;
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, MAX_EIGEN_ITERS)
            .ok_or_else(|| fail("Hermitian eigensolver did not converge"))?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    if values.iter().any(|e| !e.is_finite()) {
        return Err(fail("non-finite eigenvalue"));
    }

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, order[c])]
    });
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        params: *params,
    })
}

/// A group of numerically degenerate eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Mean energy of the group.
    pub energy: f64,
    pub multiplicity: usize,
    /// Positions in the ascending spectrum.
    pub indices: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyClusters {
    pub clusters: Vec<Cluster>,
    pub tol_rel: f64,
}

impl DegeneracyClusters {
    pub fn ground(&self) -> &Cluster {
        &self.clusters[0]
    }

    /// Ground-state degeneracy `g0`.
    pub fn ground_multiplicity(&self) -> usize {
        self.ground().multiplicity
    }
}

fn level_tol(tol_rel: f64, e: f64) -> f64 {
    tol_rel * e.abs().max(1.0)
}

/// Groups ascending eigenvalues: neighbours closer than `tol_rel * max(1, |E|)`
/// belong to the same level.
pub fn cluster_degeneracies(spec: &Spectrum, tol_rel: f64) -> DegeneracyClusters {
    let tol_rel = if tol_rel > 0.0 {
        tol_rel
    } else {
        DEFAULT_DEG_TOL
    };
    let e = &spec.eigenvalues;
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..=e.len() {
        let split = k == e.len() || e[k] - e[k - 1] > level_tol(tol_rel, e[k]);
        if split {
            let energy = e[start..k].iter().sum::<f64>() / (k - start) as f64;
            clusters.push(Cluster {
                energy,
                multiplicity: k - start,
                indices: start..k,
            });
            start = k;
        }
    }
    DegeneracyClusters { clusters, tol_rel }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub e_min: f64,
    pub e_max: f64,
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub bands: Vec<Band>,
    pub gap_tol: f64,
}

impl BandStructure {
    pub fn count(&self) -> usize {
        self.bands.len()
    }
}

/// Splits the spectrum into energy bands.
///
/// A set of gaps is a valid band partition when each splitting gap exceeds
/// `gap_tol` times the largest spacing inside its two neighbouring bands and
/// at least one of those bands has a nonzero spread. Thresholds are tried
/// from the largest gap downwards; the first valid partition wins, otherwise
/// the whole spectrum is one band. Spacings below the degeneracy tolerance
/// count as zero.
pub fn count_bands(spec: &Spectrum, gap_tol: f64) -> Result<BandStructure> {
    if gap_tol.is_nan() || gap_tol <= 1.0 {
        return Err(Error::Domain(format!(
            "band gap tolerance must exceed 1, got {gap_tol}"
        )));
    }
    let e = &spec.eigenvalues;
    let gaps: Vec<f64> = e
        .windows(2)
        .map(|w| {
            let g = w[1] - w[0];
            if g <= level_tol(DEFAULT_DEG_TOL, w[1]) {
                0.0
            } else {
                g
            }
        })
        .collect();

    let mut candidates: Vec<f64> = gaps.iter().copied().filter(|&g| g > 0.0).collect();
    candidates.sort_by(|a, b| b.total_cmp(a));
    candidates.dedup();

    let mut cuts: Vec<usize> = Vec::new();
    for &threshold in &candidates {
        let split: Vec<usize> = (0..gaps.len()).filter(|&i| gaps[i] >= threshold).collect();
        // internal[k] = largest spacing inside band k
        let mut bounds = vec![0usize];
        bounds.extend(split.iter().map(|&i| i + 1));
        bounds.push(e.len());
        let internal: Vec<f64> = bounds
            .windows(2)
            .map(|w| gaps[w[0]..w[1] - 1].iter().copied().fold(0.0, f64::max))
            .collect();
        let consistent = split.iter().enumerate().all(|(k, &i)| {
            let spread = internal[k].max(internal[k + 1]);
            spread > 0.0 && gaps[i] > gap_tol * spread
        });
        if consistent {
            cuts = split;
            break;
        }
    }

    let mut bands = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for end in cuts.iter().map(|&i| i + 1).chain(std::iter::once(e.len())) {
        bands.push(Band {
            e_min: e[start],
            e_max: e[end - 1],
            levels: end - start,
        });
        start = end;
    }
    Ok(BandStructure { bands, gap_tol })
}

/// A change of ground-state multiplicity along the `U` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Refined crossing position.
    pub u_star: f64,
    /// Final bisection bracket, width below [`CROSSING_RESOLUTION`].
    pub bracket: (f64, f64),
    pub before: usize,
    /// Number of levels meeting at the crossing.
    pub at: usize,
    pub after: usize,
}

fn ground_multiplicity(n_sites: usize, t: f64, u: f64, tol_rel: f64) -> Result<usize> {
    let spec = Spectrum::solve(&HubbardParams::with_hopping(n_sites, t, u)?)?;
    Ok(cluster_degeneracies(&spec, tol_rel).ground_multiplicity())
}

/// Scans an ascending `U` grid for changes of the ground multiplicity and
/// refines each by bisection on the multiplicity itself.
pub fn crossing_scan(
    n_sites: usize,
    t: f64,
    grid: &[f64],
    tol_rel: f64,
    exec: Execution,
) -> Result<Vec<Crossing>> {
    if grid.is_empty() {
        return Err(Error::Config("U grid is empty".into()));
    }
    if grid
        .windows(2)
        .any(|w| w[0].is_nan() || w[1].is_nan() || w[1] <= w[0])
    {
        return Err(Error::Config("U grid must be strictly ascending".into()));
    }
    let mults: Vec<usize> = par::map(exec, grid, |&u| ground_multiplicity(n_sites, t, u, tol_rel))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut raw: Vec<Crossing> = Vec::new();
    for i in 1..grid.len() {
        if mults[i] == mults[i - 1] {
            continue;
        }
        let (mut lo, mut hi) = (grid[i - 1], grid[i]);
        while hi - lo >= CROSSING_RESOLUTION / 8.0 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if ground_multiplicity(n_sites, t, mid, tol_rel)? == mults[i - 1] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        raw.push(Crossing {
            u_star: 0.5 * (lo + hi),
            bracket: (lo, hi),
            before: mults[i - 1],
            at: 0,
            after: mults[i],
        });
    }

    // A crossing that lands exactly on a grid point shows up as two adjacent changes.
    let mut merged: Vec<Crossing> = Vec::new();
    for c in raw {
        match merged.last_mut() {
            Some(prev) if c.bracket.0 - prev.bracket.1 <= CROSSING_RESOLUTION / 4.0 => {
                prev.bracket.1 = c.bracket.1;
                prev.after = c.after;
                prev.u_star = 0.5 * (prev.bracket.0 + prev.bracket.1);
            }
            _ => merged.push(c),
        }
    }

    for c in &mut merged {
        let spec = Spectrum::solve(&HubbardParams::with_hopping(n_sites, t, c.u_star)?)?;
        let e0 = spec.ground_energy();
        // Levels move at most n_sites * |dU| (Weyl), so anything crossing in the bracket lies in this window.
        let width = c.bracket.1 - c.bracket.0;
        let window = (n_sites as f64 * width).max(level_tol(tol_rel, e0));
        c.at = spec
            .eigenvalues
            .iter()
            .take_while(|&&e| e - e0 <= window)
            .count();
    }
    Ok(merged)
}

/// Evenly spaced grid including both end points; exact at the ends.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        n => (0..n)
            .map(|i| {
                if i == n - 1 {
                    max
                } else {
                    min + (max - min) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}
