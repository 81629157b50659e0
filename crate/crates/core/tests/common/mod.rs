//! Independent reference implementations and random-state generators shared
//! by the integration tests. Nothing here calls the library's Hamiltonian,
//! partial-trace or LBC code.

#![allow(dead_code)]

use hubbard_dots::{DensityMatrix, C64};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kron_all(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// Annihilation operator of `mode` out of `n_modes`, built as a
/// Kronecker product `Z x ... x Z x a x I x ... x I`.
pub fn jw_annihilator(mode: usize, n_modes: usize) -> DMatrix<C64> {
    let id = DMatrix::<C64>::identity(2, 2);
    let z = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    // |0> = (1,0), |1> = (0,1); a|1> = |0>
    let a = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let factors: Vec<DMatrix<C64>> = (0..n_modes)
        .map(|m| match m.cmp(&mode) {
            std::cmp::Ordering::Less => z.clone(),
            std::cmp::Ordering::Equal => a.clone(),
            std::cmp::Ordering::Greater => id.clone(),
        })
        .collect();
    kron_all(&factors)
}

/// Hubbard chain Hamiltonian from Kronecker-product fermion operators, with
/// mode `2 * site + spin`. Also returns the total number and `2 S_z` diagonals.
pub fn kron_hubbard(n_sites: usize, t: f64, u: f64) -> (DMatrix<C64>, Vec<f64>, Vec<f64>) {
    let n_modes = 2 * n_sites;
    let dim = 1 << n_modes;
    let a: Vec<DMatrix<C64>> = (0..n_modes).map(|m| jw_annihilator(m, n_modes)).collect();
    let num: Vec<DMatrix<C64>> = a.iter().map(|x| x.adjoint() * x).collect();
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for site in 0..n_sites.saturating_sub(1) {
        for spin in 0..2 {
            let (i, j) = (2 * site + spin, 2 * (site + 1) + spin);
            let hop = a[i].adjoint() * &a[j];
            h -= (&hop + hop.adjoint()) * c(t);
        }
    }
    for site in 0..n_sites {
        h += (&num[2 * site] * &num[2 * site + 1]) * c(u);
    }
    let n_total: Vec<f64> = (0..dim)
        .map(|k| num.iter().map(|n| n[(k, k)].re).sum())
        .collect();
    let sz2: Vec<f64> = (0..dim)
        .map(|k| {
            (0..n_sites)
                .map(|s| num[2 * s][(k, k)].re - num[2 * s + 1][(k, k)].re)
                .sum()
        })
        .collect();
    (h, n_total, sz2)
}

/// Eigenvalues of the chain, diagonalizing each `(N, 2 S_z)` block separately.
pub fn sector_eigenvalues(n_sites: usize, t: f64, u: f64) -> Vec<f64> {
    let (h, n_total, sz2) = kron_hubbard(n_sites, t, u);
    let dim = h.nrows();
    let mut keys: Vec<(i64, i64)> = (0..dim)
        .map(|k| (n_total[k].round() as i64, sz2[k].round() as i64))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let mut all = Vec::with_capacity(dim);
    for key in keys {
        let idx: Vec<usize> = (0..dim)
            .filter(|&k| (n_total[k].round() as i64, sz2[k].round() as i64) == key)
            .collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |r, s| h[(idx[r], idx[s])]);
        // Off-block entries must vanish for the sector split to be valid.
        for &k in &idx {
            for l in 0..dim {
                if !idx.contains(&l) {
                    assert!(h[(k, l)].norm() < 1e-14, "Hamiltonian couples sectors");
                }
            }
        }
        all.extend(block.symmetric_eigenvalues().iter().copied());
    }
    all.sort_by(f64::total_cmp);
    all
}

/// Closed-form dimer spectrum (units of `t = 1`).
pub fn analytic_dimer(u: f64) -> Vec<f64> {
    let root = (u * u + 16.0).sqrt();
    let mut e = vec![
        0.0, // empty
        -1.0,
        -1.0,
        1.0,
        1.0, // one particle
        0.0,
        0.0,
        0.0, // triplet
        u,   // antisymmetric doublon pair
        (u - root) / 2.0,
        (u + root) / 2.0,
        u - 1.0,
        u - 1.0,
        u + 1.0,
        u + 1.0, // three particles
        2.0 * u, // full
    ];
    e.sort_by(f64::total_cmp);
    e
}

/// Single-linkage grouping of sorted levels, as multiplicities.
pub fn multiplicities(levels: &[f64], tol: f64) -> Vec<usize> {
    let mut out = vec![1usize];
    for w in levels.windows(2) {
        if w[1] - w[0] <= tol * w[1].abs().max(1.0) {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    out
}

/// Square root of a PSD matrix, with eigenvalues under the numerical rank
/// threshold set to zero.
fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = m.nrows() as f64 * f64::EPSILON * max;
    let d = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|x| c(if x > cutoff { x.sqrt() } else { 0.0 })),
    );
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)` with `l_i` the singular
/// values of `sqrt(rho) sqrt(rho_tilde)`, `rho_tilde = (sy x sy) rho* (sy x sy)`.
pub fn wootters_concurrence(rho: &DMatrix<C64>) -> f64 {
    let i = C64::i();
    let sy = DMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]);
    let flip = sy.kronecker(&sy);
    let rho_tilde = &flip * rho.map(|z| z.conj()) * &flip;
    let m = hermitian_sqrt(rho) * hermitian_sqrt(&rho_tilde);
    let mut l: Vec<f64> = m.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

pub fn random_pure(rng: &mut impl Rng, dim: usize) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v / c(n)
}

/// Mixture of `1..=max_terms` random pure states with random weights.
pub fn random_mixture(rng: &mut impl Rng, dim: usize, max_terms: usize) -> DMatrix<C64> {
    let terms = rng.gen_range(1..=max_terms);
    let weights: Vec<f64> = (0..terms).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for w in weights {
        let psi = random_pure(rng, dim);
        m += &psi * psi.adjoint() * c(w / total);
    }
    m
}

/// Full-rank random state `G G^dag / Tr`.
pub fn random_ginibre(rng: &mut impl Rng, dim: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}

pub fn random_orthogonal(rng: &mut impl Rng, dim: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

pub fn density(m: DMatrix<C64>) -> DensityMatrix {
    DensityMatrix::new(m).expect("generated matrix is a valid density matrix")
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(c)
}

/// Entrywise partial trace over the second factor of a `da x db` system.
pub fn trace_second(m: &DMatrix<C64>, da: usize, db: usize) -> DMatrix<C64> {
    DMatrix::from_fn(da, da, |a, b| {
        (0..db).map(|e| m[(a * db + e, b * db + e)]).sum()
    })
}

/// Entrywise partial trace over the first factor.
pub fn trace_first(m: &DMatrix<C64>, da: usize, db: usize) -> DMatrix<C64> {
    DMatrix::from_fn(db, db, |a, b| {
        (0..da).map(|e| m[(e * db + a, e * db + b)]).sum()
    })
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `|a b> -> (-1)^(p_a p_b) |b a>` on a pair of dots, `p` the local parity.
pub fn fermionic_swap() -> DMatrix<C64> {
    let parity = [0, 1, 1, 0];
    let mut f = DMatrix::zeros(16, 16);
    for a in 0..4 {
        for b in 0..4 {
            let sign = if parity[a] * parity[b] == 1 {
                -1.0
            } else {
                1.0
            };
            f[(b * 4 + a, a * 4 + b)] = C64::new(sign, 0.0);
        }
    }
    f
}
