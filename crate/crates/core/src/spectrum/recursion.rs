//! The spectrum by degree recursion and by closed-form keys, and the
//! certified spectral gap.

use serde::Serialize;

use super::matrix::{build_md, eigen_multiset};
use super::multiset::{ClusterTol, EigenMultiset};
use crate::simplex::AlphaParams;
use crate::special::homogeneous_dim;
use crate::{Error, Result};

/// Default number of degrees enumerated when certifying the gap.
pub const DEFAULT_D_MAX: u32 = 5;
/// Degrees beyond this are never enumerated by the key parametrization.
pub const MAX_KEY_DEGREE: u32 = 100_000;

/// `Λ̃_d` and `Λ_d = Λ̃_d + d alpha_{N+1}` for `d = 0..=d_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumByDegree {
    pub tilde: Vec<EigenMultiset>,
    pub shifted: Vec<EigenMultiset>,
}

impl SpectrumByDegree {
    /// `Λ_0 ∪ ... ∪ Λ_{d_max}`.
    pub fn union(&self) -> EigenMultiset {
        self.shifted
            .iter()
            .fold(EigenMultiset::empty(self.shifted[0].cluster_tol()), |acc, m| acc.union(m))
    }
}

fn c(n: usize, d: u32) -> Result<u64> {
    homogeneous_dim(n, d as usize)
}

/// Runs `Λ̃_{d+1} = (2d + tilde_alpha + Λ̃_d) ∪ {0 repeated C(N,d+1) - C(N,d)}`
/// from `Λ̃_0 = {0}` on exact `(value, multiplicity)` lists, clustering only
/// the reported multisets.
pub fn spectrum_recursion(
    alpha: &AlphaParams,
    d_max: u32,
    cluster_tol: ClusterTol,
) -> Result<SpectrumByDegree> {
    let n = alpha.dim();
    let tilde_alpha = alpha.tilde_alpha();
    let mut level: Vec<(f64, u64)> = vec![(0.0, 1)];
    let mut tilde = Vec::with_capacity(d_max as usize + 1);
    let mut shifted = Vec::with_capacity(d_max as usize + 1);
    for d in 0..=d_max {
        tilde.push(EigenMultiset::from_weighted(level.iter().copied(), cluster_tol));
        let shift = d as f64 * alpha.alpha_last();
        shifted.push(EigenMultiset::from_weighted(
            level.iter().map(|&(v, m)| (v + shift, m)),
            cluster_tol,
        ));
        if d == d_max {
            break;
        }
        let step = 2.0 * d as f64 + tilde_alpha;
        let mut next: Vec<(f64, u64)> = level.iter().map(|&(v, m)| (v + step, m)).collect();
        let zeros = c(n, d + 1)? - c(n, d)?;
        if zeros > 0 {
            next.push((0.0, zeros));
        }
        level = next;
    }
    Ok(SpectrumByDegree { tilde, shifted })
}

/// An element `(k_1 < ... < k_r ; k_{r+1})` of the key set, `k_{r+1} > k_r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumKey {
    head: Vec<u32>,
    tail: u32,
}

impl SpectrumKey {
    pub fn new(head: Vec<u32>, tail: u32) -> Result<Self> {
        if head.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input(format!("key head {head:?} is not strictly increasing")));
        }
        if let Some(&last) = head.last() {
            if tail <= last {
                return Err(Error::input(format!(
                    "key tail {tail} must exceed the last head entry {last}"
                )));
            }
        }
        Ok(SpectrumKey { head, tail })
    }

    /// The key `(j, j+1, ..., d-1 ; d)` that labels the block of degree `d`
    /// entering the recursion at degree `j`.
    pub fn block(j: u32, d: u32) -> Result<Self> {
        if j > d {
            return Err(Error::input(format!("block start {j} exceeds degree {d}")));
        }
        SpectrumKey::new((j..d).collect(), d)
    }

    pub fn head(&self) -> &[u32] {
        &self.head
    }

    pub fn tail(&self) -> u32 {
        self.tail
    }

    /// Polynomial degree carried by the key.
    pub fn degree(&self) -> u32 {
        self.tail
    }

    /// Keys whose head is the consecutive run ending at `tail - 1`; these are
    /// the keys that label eigenvalues.
    pub fn is_admissible(&self) -> bool {
        let start = self.tail - self.head.len() as u32;
        self.head.iter().enumerate().all(|(i, &k)| k == start + i as u32)
    }

    /// `K(k) = 2 (k_1 + ... + k_r) + r tilde_alpha + k_{r+1} alpha_{N+1}`.
    pub fn value(&self, alpha: &AlphaParams) -> f64 {
        let head_sum: u64 = self.head.iter().map(|&k| k as u64).sum();
        2.0 * head_sum as f64
            + self.head.len() as f64 * alpha.tilde_alpha()
            + self.tail as f64 * alpha.alpha_last()
    }

    /// `C(N, j) - C(N, j-1)` for the admissible key starting at `j`, where
    /// `C(N, -1) = 0`.
    pub fn multiplicity(&self, n: usize) -> Result<u64> {
        if !self.is_admissible() {
            return Err(Error::Domain(format!(
                "key {:?};{} does not label an eigenvalue",
                self.head, self.tail
            )));
        }
        let j = self.tail - self.head.len() as u32;
        let below = if j == 0 { 0 } else { c(n, j - 1)? };
        Ok(c(n, j)? - below)
    }
}

/// Admissible keys of degree `d`, one per starting degree `j = 0..=d`.
pub fn keys_of_degree(d: u32) -> Vec<SpectrumKey> {
    (0..=d).map(|j| SpectrumKey::block(j, d).expect("j <= d")).collect()
}

fn keys_to_multiset(
    alpha: &AlphaParams,
    keys: impl IntoIterator<Item = SpectrumKey>,
    cap: f64,
    cluster_tol: ClusterTol,
) -> Result<EigenMultiset> {
    let n = alpha.dim();
    let mut pairs = Vec::new();
    for key in keys {
        let v = key.value(alpha);
        if v > cap {
            continue;
        }
        let m = key.multiplicity(n)?;
        if m > 0 {
            pairs.push((v, m));
        }
    }
    Ok(EigenMultiset::from_weighted(pairs, cluster_tol))
}

/// All eigenvalues of `-L` up to `lambda_cap` from the key parametrization.
/// Coincidences between distinct keys set the non-generic flag.
pub fn spectrum_parametrized(
    alpha: &AlphaParams,
    lambda_cap: f64,
    cluster_tol: ClusterTol,
) -> Result<EigenMultiset> {
    if !(lambda_cap.is_finite() && lambda_cap > 0.0) {
        return Err(Error::input(format!("lambda_cap must be positive and finite, got {lambda_cap}")));
    }
    // every key of degree d has value >= d alpha_{N+1}
    let top = (lambda_cap / alpha.alpha_last()).floor();
    if top > MAX_KEY_DEGREE as f64 {
        return Err(Error::Capacity(format!(
            "cap {lambda_cap} reaches degree {top}; limit is {MAX_KEY_DEGREE}"
        )));
    }
    let keys = (0..=top as u32).flat_map(keys_of_degree);
    keys_to_multiset(alpha, keys, lambda_cap, cluster_tol)
}

/// The eigenvalues carried by degree-`d` keys, i.e. `Λ_d`.
pub fn spectrum_parametrized_degree(
    alpha: &AlphaParams,
    d: u32,
    cluster_tol: ClusterTol,
) -> Result<EigenMultiset> {
    keys_to_multiset(alpha, keys_of_degree(d), f64::INFINITY, cluster_tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapCertificate {
    /// Smallest positive eigenvalue over the enumerated degrees.
    pub gap: f64,
    pub argmin_degree: u32,
    /// Degrees that were enumerated.
    pub degrees: Vec<u32>,
    /// Lower bound on every eigenvalue of a degree beyond the window.
    pub unseen_lower_bound: f64,
    /// Whether the window provably contains the minimum.
    pub certified: bool,
}

/// Lower bound for eigenvalues of degree `> d_max`.
fn unseen_lower_bound(alpha: &AlphaParams, d_max: u32) -> f64 {
    let d = (d_max + 1) as f64;
    if alpha.dim() == 1 {
        // Λ_d = {d(d-1) + d |alpha|} is increasing in d
        d * (d - 1.0) + d * alpha.total()
    } else {
        d * alpha.alpha_last()
    }
}

fn certify(alpha: &AlphaParams, d_max: u32, per_degree: &[(u32, Option<f64>)]) -> Result<GapCertificate> {
    let (argmin_degree, gap) = per_degree
        .iter()
        .filter_map(|&(d, v)| v.map(|v| (d, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Inconclusive("no positive eigenvalue in the window".into()))?;
    let bound = unseen_lower_bound(alpha, d_max);
    Ok(GapCertificate {
        gap,
        argmin_degree,
        degrees: per_degree.iter().map(|&(d, _)| d).collect(),
        unseen_lower_bound: bound,
        certified: gap <= bound,
    })
}

fn check_window(d_max: u32) -> Result<()> {
    if d_max < 2 {
        return Err(Error::input(format!("d_max must be at least 2, got {d_max}")));
    }
    Ok(())
}

/// Smallest positive element of `Λ_1 ∪ ... ∪ Λ_{d_max}` via the recursion.
pub fn spectral_gap(alpha: &AlphaParams, d_max: u32) -> Result<GapCertificate> {
    check_window(d_max)?;
    let spec = spectrum_recursion(alpha, d_max, ClusterTol::default())?;
    let per_degree: Vec<(u32, Option<f64>)> = (1..=d_max)
        .map(|d| (d, spec.shifted[d as usize].min_positive()))
        .collect();
    certify(alpha, d_max, &per_degree)
}

/// The same gap from eigensolving `M_1, ..., M_{d_max}`.
pub fn spectral_gap_eigen(
    alpha: &AlphaParams,
    d_max: u32,
    cluster_tol: ClusterTol,
) -> Result<GapCertificate> {
    check_window(d_max)?;
    let mut per_degree = Vec::with_capacity(d_max as usize);
    for d in 1..=d_max {
        let m = eigen_multiset(&build_md(alpha, d)?, cluster_tol)?;
        per_degree.push((d, m.min_positive()));
    }
    certify(alpha, d_max, &per_degree)
}
