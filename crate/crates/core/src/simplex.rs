//! Dirichlet distributions on the simplex `{x in [0,1]^N : |x|_1 <= 1}`.
//!
//! Coordinates `x_1..x_N` are stored explicitly; the remainder
//! `x_{N+1} = 1 - |x|_1` is derived. All Gamma-function arithmetic is done
//! in log-space.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::polynomial::MonomialExponent;
use crate::rng::stream_rng;
use crate::special::{ln_gamma, ln_rising};
use crate::{Error, Result};

/// Tolerance on simplex membership before a point is rejected.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Dirichlet parameter `(alpha_1, ..., alpha_N, alpha_{N+1})`.
///
/// The last entry is the weight of the remainder coordinate and is the
/// spectral gap of the diffusion for `N >= 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaParams {
    alphas: Vec<f64>,
    alpha_last: f64,
}

impl AlphaParams {
    pub fn new(alphas: Vec<f64>, alpha_last: f64) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::input("alpha needs at least N = 1 regular coordinate"));
        }
        for (i, &a) in alphas.iter().enumerate() {
            check_positive(a, &format!("alpha[{}]", i + 1))?;
        }
        check_positive(alpha_last, &format!("alpha[{}]", alphas.len() + 1))?;
        Ok(AlphaParams { alphas, alpha_last })
    }

    /// From the full vector `(alpha_1, ..., alpha_{N+1})`.
    pub fn from_full(full: &[f64]) -> Result<Self> {
        match full.split_last() {
            Some((&last, head)) if !head.is_empty() => AlphaParams::new(head.to_vec(), last),
            _ => Err(Error::input(format!(
                "alpha needs at least 2 entries, got {}",
                full.len()
            ))),
        }
    }

    /// Number of explicit coordinates `N`.
    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn alpha_last(&self) -> f64 {
        self.alpha_last
    }

    /// Entry `i` of the full vector, 0-based; `i == N` is the remainder weight.
    pub fn get(&self, i: usize) -> f64 {
        if i == self.alphas.len() {
            self.alpha_last
        } else {
            self.alphas[i]
        }
    }

    pub fn full(&self) -> Vec<f64> {
        let mut v = self.alphas.clone();
        v.push(self.alpha_last);
        v
    }

    /// `sum_{i <= N} alpha_i`.
    pub fn tilde_alpha(&self) -> f64 {
        self.alphas.iter().sum()
    }

    /// `|alpha|_1 = tilde_alpha + alpha_{N+1}`.
    pub fn total(&self) -> f64 {
        self.tilde_alpha() + self.alpha_last
    }

    /// The same parameter with `alpha_1..alpha_N` reordered by `perm`
    /// (`perm[i]` is the source index of new coordinate `i`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::input(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        AlphaParams::new(perm.iter().map(|&p| self.alphas[p]).collect(), self.alpha_last)
    }
}

fn check_positive(a: f64, name: &str) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::input(format!("{name} must be finite, got {a}")));
    }
    if a <= 0.0 {
        return Err(Error::input(format!("{name} must be positive, got {a}")));
    }
    Ok(())
}

/// A point of the closed simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexPoint {
    coords: Vec<f64>,
    #[serde(skip)]
    violation: f64,
}

impl SimplexPoint {
    /// Validates `coords` against the simplex with tolerance [`SIMPLEX_TOL`]
    /// and renormalizes small violations away (negatives clamped to zero,
    /// rescaled if the sum exceeds one). The size of the violation is kept
    /// in [`SimplexPoint::violation`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::input("simplex point needs at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::input(format!("coordinate x{} is not finite", i + 1)));
        }
        let violation = raw_violation(&coords);
        if violation > SIMPLEX_TOL {
            return Err(Error::input(format!(
                "{coords:?} is outside the simplex (violation {violation:e})"
            )));
        }
        Ok(SimplexPoint::project(coords))
    }

    /// Maps arbitrary finite coordinates onto the simplex: negatives are
    /// clamped to zero and the vector is rescaled if its sum exceeds one.
    /// The result satisfies `x_i >= 0` and `|x|_1 <= 1` exactly.
    pub fn project(mut coords: Vec<f64>) -> Self {
        let violation = raw_violation(&coords);
        project_in_place(&mut coords);
        SimplexPoint { coords, violation }
    }

    pub(crate) fn from_projected(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|&c| c >= 0.0) && coords.iter().sum::<f64>() <= 1.0);
        SimplexPoint {
            coords,
            violation: 0.0,
        }
    }

    /// Barycenter-like point `x_i = alpha_i / |alpha|_1`, the stationary mean.
    pub fn mean_of(alpha: &AlphaParams) -> Self {
        let t = alpha.total();
        SimplexPoint::project(alpha.alphas().iter().map(|a| a / t).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// `x_{N+1} = 1 - |x|_1`, never negative.
    pub fn remainder(&self) -> f64 {
        (1.0 - self.coords.iter().sum::<f64>()).max(0.0)
    }

    /// Amount by which the raw input left the simplex before projection.
    pub fn violation(&self) -> f64 {
        self.violation
    }

    /// All `N + 1` coordinates including the remainder.
    pub fn full(&self) -> Vec<f64> {
        let mut v = self.coords.clone();
        v.push(self.remainder());
        v
    }
}

fn raw_violation(coords: &[f64]) -> f64 {
    let neg = coords.iter().fold(0.0_f64, |m, &c| m.max(-c));
    let over = coords.iter().sum::<f64>() - 1.0;
    let above_one = coords.iter().fold(0.0_f64, |m, &c| m.max(c - 1.0));
    neg.max(over).max(above_one).max(0.0)
}

pub(crate) fn project_in_place(coords: &mut [f64]) {
    for c in coords.iter_mut() {
        if *c < 0.0 {
            *c = 0.0;
        }
    }
    let mut s: f64 = coords.iter().sum();
    while s > 1.0 {
        let scale = (1.0 / s) * (1.0 - f64::EPSILON);
        for c in coords.iter_mut() {
            *c *= scale;
        }
        s = coords.iter().sum();
    }
}

/// `log rho(x)` for the Dirichlet density on the simplex.
///
/// On a face where some coordinate (or the remainder) vanishes the density
/// is zero when the matching exponent `alpha - 1` is positive, and infinite
/// when it is negative; the latter is a domain error.
pub fn log_density(alpha: &AlphaParams, x: &SimplexPoint) -> Result<f64> {
    if alpha.dim() != x.dim() {
        return Err(Error::input(format!(
            "alpha has N = {}, point has {} coordinates",
            alpha.dim(),
            x.dim()
        )));
    }
    let full_alpha = alpha.full();
    let full_x = x.full();
    let mut log_rho = ln_gamma(alpha.total()) - full_alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>();
    for (i, (&a, &xi)) in full_alpha.iter().zip(&full_x).enumerate() {
        let exponent = a - 1.0;
        if exponent == 0.0 {
            continue;
        }
        if xi <= 0.0 {
            if exponent < 0.0 {
                return Err(Error::Domain(format!(
                    "density is infinite on the face x{} = 0 (alpha{} = {a} < 1)",
                    i + 1,
                    i + 1
                )));
            }
            return Ok(f64::NEG_INFINITY);
        }
        log_rho += exponent * xi.ln();
    }
    Ok(log_rho)
}

/// `E[x^p]` under the Dirichlet law:
/// `[Gamma(|a|) / Gamma(|a| + |p|)] prod_i Gamma(a_i + p_i) / Gamma(a_i)`.
pub fn monomial_expectation(alpha: &AlphaParams, p: &MonomialExponent) -> Result<f64> {
    if p.dim() != alpha.dim() {
        return Err(Error::input(format!(
            "exponent {p} has {} entries, alpha has N = {}",
            p.dim(),
            alpha.dim()
        )));
    }
    Ok(ln_monomial_expectation(alpha, p.entries()).exp())
}

pub(crate) fn ln_monomial_expectation(alpha: &AlphaParams, p: &[u32]) -> f64 {
    let degree: u64 = p.iter().map(|&e| e as u64).sum();
    let numerator: f64 = alpha
        .alphas()
        .iter()
        .zip(p)
        .filter(|(_, &e)| e > 0)
        .map(|(&a, &e)| ln_rising(a, e as u64))
        .sum();
    numerator - ln_rising(alpha.total(), degree)
}

/// One Dirichlet draw by stick-breaking: `U_i ~ Beta(alpha_i,
/// alpha_{i+1} + ... + alpha_{N+1})` independent, `X_i = U_i prod_{j<i}(1 - U_j)`.
pub fn sample<R: Rng + ?Sized>(alpha: &AlphaParams, rng: &mut R) -> SimplexPoint {
    let full = alpha.full();
    let n = alpha.dim();
    // suffix[i] = alpha_{i+1} + ... + alpha_{N+1} (0-based: entries after i)
    let mut suffix = vec![0.0; n + 1];
    suffix[n] = full[n];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + full[i];
    }
    let mut coords = Vec::with_capacity(n);
    let mut stick = 1.0;
    for (i, &a) in full[..n].iter().enumerate() {
        let u = Beta::new(a, suffix[i + 1]).expect("positive Beta parameters").sample(rng);
        coords.push(u * stick);
        stick *= 1.0 - u;
    }
    SimplexPoint::project(coords)
}

/// `count` independent draws, draw `r` using stream `(seed, r)`.
pub fn sample_ensemble(alpha: &AlphaParams, count: usize, seed: u64) -> Vec<SimplexPoint> {
    (0..count)
        .into_par_iter()
        .map(|r| sample(alpha, &mut stream_rng(seed, r as u64)))
        .collect()
}

/// Writes samples as CSV with header `replica,x1,...,xN,remainder`.
pub fn write_samples_csv<W: Write>(mut w: W, samples: &[SimplexPoint]) -> io::Result<()> {
    let n = samples.first().map_or(0, SimplexPoint::dim);
    write!(w, "replica")?;
    for i in 1..=n {
        write!(w, ",x{i}")?;
    }
    writeln!(w, ",remainder")?;
    for (r, s) in samples.iter().enumerate() {
        write!(w, "{r}")?;
        for c in s.coords() {
            write!(w, ",{c}")?;
        }
        writeln!(w, ",{}", s.remainder())?;
    }
    Ok(())
}

/// A partition of the full index set `{0, ..., N}` (0-based; `N` is the
/// remainder) into blocks. The block holding `N` becomes the remainder of
/// the aggregated distribution; the other blocks keep their given order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    last: usize,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, full_len: usize) -> Result<Self> {
        let mut seen = vec![false; full_len];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::input("partition contains an empty block"));
            }
            for &i in block {
                if i >= full_len {
                    return Err(Error::input(format!(
                        "index {i} is outside 0..{full_len}"
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::input(format!("index {i} appears in two blocks")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::input(format!("index {i} is not covered by the partition")));
        }
        if blocks.len() < 2 {
            return Err(Error::input("partition needs at least two blocks"));
        }
        let last = blocks
            .iter()
            .position(|b| b.contains(&(full_len - 1)))
            .expect("covered");
        Ok(Partition { blocks, last })
    }

    /// Blocks in output order, the remainder block last.
    fn ordered(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.blocks
            .iter()
            .enumerate()
            .filter(move |(j, _)| *j != self.last)
            .map(|(_, b)| b)
            .chain(std::iter::once(&self.blocks[self.last]))
    }

    pub fn aggregate_alpha(&self, alpha: &AlphaParams) -> Result<AlphaParams> {
        let full = alpha.full();
        if self.blocks.iter().flatten().count() != full.len() {
            return Err(Error::input("partition does not match the dimension of alpha"));
        }
        let sums: Vec<f64> = self
            .ordered()
            .map(|b| b.iter().map(|&i| full[i]).sum())
            .collect();
        AlphaParams::from_full(&sums)
    }

    /// Block sums of `(x, remainder)`.
    pub fn aggregate_point(&self, x: &SimplexPoint) -> SimplexPoint {
        let full = x.full();
        let sums: Vec<f64> = self.ordered().map(|b| b.iter().map(|&i| full[i]).sum()).collect();
        SimplexPoint::project(sums[..sums.len() - 1].to_vec())
    }
}

/// Parameter of the aggregated vector `(sum_{r in A_j} X_r)_j`.
pub fn aggregate(alpha: &AlphaParams, blocks: Vec<Vec<usize>>) -> Result<AlphaParams> {
    Partition::new(blocks, alpha.dim() + 1)?.aggregate_alpha(alpha)
}

/// Relative masses of a Polya urn after `steps` draws. The urn starts with
/// mass `alpha_i` of colour `i`; each draw picks a colour proportionally to
/// its mass and adds one unit of it.
pub fn polya_urn<R: Rng + ?Sized>(alpha: &AlphaParams, steps: u64, rng: &mut R) -> SimplexPoint {
    let mut mass = alpha.full();
    let mut total = alpha.total();
    for _ in 0..steps {
        let mut u = rng.random::<f64>() * total;
        let mut pick = mass.len() - 1;
        for (i, &m) in mass.iter().enumerate() {
            if u < m {
                pick = i;
                break;
            }
            u -= m;
        }
        mass[pick] += 1.0;
        total += 1.0;
    }
    let n = alpha.dim();
    SimplexPoint::project(mass[..n].iter().map(|m| m / total).collect())
}
