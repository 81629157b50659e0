//! Correlation quantifiers for site subsets.
//!
//! All entropies are in bits.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::par::{self, Execution};
use crate::states::{trace_out_pure, DensityMatrix, OccupationWeights, ReducedState};
use crate::C64;

/// Eigenvalues below this are treated as zero inside `x log x`.
pub const ENTROPY_CLIP: f64 = 1e-12;
/// Tolerated negative eigenvalue of a pair state handed to [`lbc`].
pub const LBC_PSD_TOL: f64 = 1e-8;

fn xlog2x_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .map(|p| p.min(1.0))
        .filter(|&p| p > ENTROPY_CLIP)
        .map(|p| -p * p.log2())
        .sum()
}

/// `-Tr(rho log2 rho)`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    xlog2x_sum(rho.eigenvalues())
}

/// Local entanglement of one dot from its four occupation weights.
pub fn local_entanglement(w: &OccupationWeights) -> Result<f64> {
    let ws = w.as_array();
    if ws.iter().any(|&x| x < -1e-12 || x.is_nan()) {
        return Err(Error::Domain(format!(
            "occupation weights must be non-negative, got {ws:?}"
        )));
    }
    if (w.sum() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "occupation weights must sum to 1, got {}",
            w.sum()
        )));
    }
    Ok(xlog2x_sum(ws))
}

/// Generalized concurrence of a pure `N`-dot state, summing reduced purities
/// over all `2^N - 2` proper nonempty site subsets.
pub fn generalized_concurrence(psi: &DVector<C64>, basis: &FockBasis) -> Result<f64> {
    let n = basis.n_sites();
    if n < 2 {
        return Err(Error::Contract(
            "generalized concurrence needs at least two sites".into(),
        ));
    }
    if psi.len() != basis.dim() {
        return Err(Error::Contract(format!(
            "state has length {}, basis dimension is {}",
            psi.len(),
            basis.dim()
        )));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!(
            "state vector has norm {norm}, expected 1"
        )));
    }
    let full = (1usize << n) - 1;
    let purity_sum: f64 = (1..full)
        .map(|mask| {
            let keep: Vec<usize> = (0..n).filter(|s| mask & (1 << s) != 0).collect();
            trace_out_pure(psi, n, &keep)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
        })
        .sum();
    let inner = (full - 1) as f64 - purity_sum;
    Ok(2f64.powf(1.0 - n as f64 / 2.0) * inner.max(0.0).sqrt())
}

/// The `d(d-1)/2` antisymmetric generators `L_jk` (`+1` at `(j,k)`, `-1` at
/// `(k,j)`), ordered lexicographically in `(j,k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub d: usize,
    pub generators: Vec<DMatrix<f64>>,
}

impl GeneratorSet {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

pub fn so_generators(d: usize) -> Result<GeneratorSet> {
    if d < 2 {
        return Err(Error::Domain(format!(
            "generator dimension must be >= 2, got {d}"
        )));
    }
    let mut generators = Vec::with_capacity(d * (d - 1) / 2);
    for j in 0..d {
        for k in j + 1..d {
            let mut g = DMatrix::zeros(d, d);
            g[(j, k)] = 1.0;
            g[(k, j)] = -1.0;
            generators.push(g);
        }
    }
    Ok(GeneratorSet { d, generators })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbcResult {
    /// `tau_2`, the squared lower bound.
    pub tau2: f64,
    pub lbc: f64,
    /// `C_ab` for every generator pair.
    pub c_matrix: DMatrix<f64>,
}

/// `C_ab = max(0, l1 - l2 - l3 - l4)`, where the `l_i` are the square roots
/// of the eigenvalues of `rho * rho_tilde`.
///
/// With `rho = A A^dag` and `rho_tilde = F rho* F` for the real symmetric flip
/// `F`, those square roots are the singular values of `A^T F A`. Taking them
/// directly avoids square roots of eigenvalues that rounding pushed off zero.
fn pair_term(factor: &DMatrix<C64>, flip: &DMatrix<C64>) -> f64 {
    let k = factor.transpose() * flip * factor;
    let mut l: Vec<f64> = k.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l.resize(l.len().max(4), 0.0);
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// `A` with `rho = A A^dag`, from the eigendecomposition of `rho`.
///
/// Eigenvalues below the numerical-rank threshold `dim * eps * max` are
/// treated as zero: the concurrence responds to them like a square root, so
/// rounding noise would otherwise show up at the 1e-8 level.
fn psd_factor(rho: &DensityMatrix) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(rho.hermitian_part());
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = rho.dim() as f64 * f64::EPSILON * max;
    let mut a = eig.eigenvectors;
    for (mut col, &w) in a.column_iter_mut().zip(eig.eigenvalues.iter()) {
        let s = if w > cutoff { w.sqrt() } else { 0.0 };
        col *= C64::new(s, 0.0);
    }
    a
}

/// Lower bound of concurrence of a bipartite `d x d` state.
pub fn lbc(rho_pair: &DensityMatrix, gens: &GeneratorSet) -> Result<LbcResult> {
    lbc_with(rho_pair, gens, Execution::Parallel)
}

/// [`lbc`] with explicit control over how the generator pairs are evaluated.
/// The sum runs in fixed `(a, b)` order either way.
pub fn lbc_with(
    rho_pair: &DensityMatrix,
    gens: &GeneratorSet,
    exec: Execution,
) -> Result<LbcResult> {
    let d = gens.d;
    if rho_pair.dim() != d * d {
        return Err(Error::Contract(format!(
            "pair state has dimension {}, generators need {}",
            rho_pair.dim(),
            d * d
        )));
    }
    let min_eig = rho_pair.min_eigenvalue();
    if min_eig < -LBC_PSD_TOL {
        return Err(Error::Linalg(format!(
            "pair state is not positive semidefinite (eigenvalue {min_eig:e})"
        )));
    }
    let factor = psd_factor(rho_pair);
    let flips: Vec<DMatrix<C64>> = gens
        .generators
        .iter()
        .map(|g| g.map(|x| C64::new(x, 0.0)))
        .collect();

    let m = gens.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).collect();
    let terms = par::map(exec, &pairs, |&(a, b)| {
        pair_term(&factor, &flips[a].kronecker(&flips[b]))
    });

    let mut c_matrix = DMatrix::zeros(m, m);
    for (&(a, b), term) in pairs.iter().zip(terms) {
        c_matrix[(a, b)] = term;
    }
    let tau2 = d as f64 / (2.0 * (d as f64 - 1.0)) * c_matrix.iter().map(|c| c * c).sum::<f64>();
    Ok(LbcResult {
        tau2,
        lbc: tau2.sqrt(),
        c_matrix,
    })
}

/// Relative-entropy coherence `E(rho_diag) - E(rho)`, clipped at zero.
pub fn coherence(rho: &DensityMatrix) -> f64 {
    let diag = rho
        .matrix()
        .diagonal()
        .iter()
        .map(|z| z.re)
        .collect::<Vec<_>>();
    (xlog2x_sum(diag) - von_neumann_entropy(rho)).max(0.0)
}

const MARGINAL_TOL: f64 = 1e-9;

/// `I = E(rho_A) + E(rho_B) - E(rho_AB)`, clipped at zero.
///
/// The marginals must be the single-site reductions of `pair`.
pub fn mutual_information(
    pair: &ReducedState,
    site_a: &ReducedState,
    site_b: &ReducedState,
) -> Result<f64> {
    if pair.n_kept() != 2 {
        return Err(Error::Contract(format!(
            "mutual information needs a two-site state, got sites {:?}",
            pair.kept_sites
        )));
    }
    for (marginal, site) in [(site_a, pair.kept_sites[0]), (site_b, pair.kept_sites[1])] {
        let direct = pair.reduce_to(&[site])?;
        if marginal.kept_sites != direct.kept_sites || marginal.rho.dim() != direct.rho.dim() {
            return Err(Error::Contract(format!(
                "marginal for sites {:?} does not belong to pair {:?}",
                marginal.kept_sites, pair.kept_sites
            )));
        }
        let diff = marginal.rho.max_entry_diff(&direct.rho);
        if diff > MARGINAL_TOL {
            return Err(Error::Contract(format!(
                "marginal of site {site} deviates from the pair reduction by {diff:e}"
            )));
        }
    }
    let i = von_neumann_entropy(&site_a.rho) + von_neumann_entropy(&site_b.rho)
        - von_neumann_entropy(&pair.rho);
    Ok(i.max(0.0))
}

/// Population ratio `(g_u/g_l) exp(-dE/kT)` of two levels.
pub fn boltzmann_ratio(de: f64, kt: f64, g_u: usize, g_l: usize) -> Result<f64> {
    if kt.is_nan() || kt <= 0.0 {
        return Err(Error::Domain(format!("kT must be > 0, got {kt}")));
    }
    if g_u == 0 || g_l == 0 {
        return Err(Error::Domain("degeneracies must be >= 1".into()));
    }
    Ok(g_u as f64 / g_l as f64 * (-de / kt).exp())
}

/// Thermal mixture `diag(p_lower, p_upper)` of two levels separated by `dE`.
pub fn two_level_state(de: f64, kt: f64) -> Result<DensityMatrix> {
    if kt.is_nan() || kt <= 0.0 {
        return Err(Error::Domain(format!("kT must be > 0, got {kt}")));
    }
    let x = de / kt;
    // p_l = e^x / (1 + e^x), written to stay finite for large |x|
    let p_upper = if x >= 0.0 {
        (-x).exp() / (1.0 + (-x).exp())
    } else {
        1.0 / (1.0 + x.exp())
    };
    let p_lower = 1.0 - p_upper;
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
        C64::new(p_lower, 0.0),
        C64::new(p_upper, 0.0),
    ]));
    Ok(DensityMatrix::from_trusted(m, Some(1.0 / kt)))
}

/// One sweep point. `pair` holds 1-based site labels as printed in CSV output;
/// measures that were not requested are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRecord {
    pub n_sites: usize,
    pub u: f64,
    pub kt: f64,
    pub pair: (usize, usize),
    pub lbc: Option<f64>,
    pub coherence: Option<f64>,
    pub mutual_info: Option<f64>,
    pub entropy_pair: Option<f64>,
    pub entropy_i: Option<f64>,
    pub entropy_j: Option<f64>,
    /// Ground-state degeneracy, reported on zero-temperature rows.
    pub g0: Option<usize>,
    pub error: Option<String>,
}

impl CorrelationRecord {
    pub fn empty(n_sites: usize, u: f64, kt: f64, pair: (usize, usize)) -> Self {
        CorrelationRecord {
            n_sites,
            u,
            kt,
            pair,
            lbc: None,
            coherence: None,
            mutual_info: None,
            entropy_pair: None,
            entropy_i: None,
            entropy_j: None,
            g0: None,
            error: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}
