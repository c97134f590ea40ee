//! The degree-`d` matrices `M_d` acting on homogeneous leading monomials.

use std::collections::HashMap;

use super::multiset::{ClusterTol, EigenMultiset};
use crate::eigen::{self, DenseMatrix};
use crate::polynomial::MultiIndex;
use crate::simplex::AlphaParams;
use crate::special::homogeneous_dim;
use crate::{Error, Result};

/// Largest index set `enumerate_kd` will materialize.
pub const MAX_ENUMERATION: u64 = 5_000_000;
/// Largest `M_d` handed to the dense eigensolver.
pub const MAX_DENSE_DIM: usize = 2_000;

/// All exponent vectors in `N` variables of total degree exactly `d`, in
/// descending lexicographic order: `(d,0,..)` first, `(..,0,d)` last.
pub fn enumerate_kd(n: usize, d: u32) -> Result<Vec<MultiIndex>> {
    if n == 0 {
        return Err(Error::input("N must be at least 1"));
    }
    let count = homogeneous_dim(n, d as usize)?;
    if count > MAX_ENUMERATION {
        return Err(Error::Capacity(format!(
            "K_d has {count} elements for N = {n}, d = {d}; limit is {MAX_ENUMERATION}"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut current = vec![0u32; n];
    fill(&mut current, 0, d, &mut out);
    debug_assert_eq!(out.len() as u64, count);
    Ok(out)
}

fn fill(current: &mut [u32], pos: usize, left: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = left;
        out.push(MultiIndex::new(current.to_vec()));
        return;
    }
    for v in (0..=left).rev() {
        current[pos] = v;
        fill(current, pos + 1, left - v, out);
    }
    current[pos] = 0;
}

/// `M_d` in the basis `enumerate_kd(N, d)`. Column `j` holds the degree-`d`
/// part of `-L x^{k_j}`, so `M_d` is the matrix of `-L` on leading
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMatrix {
    degree: u32,
    alpha_last: f64,
    indices: Vec<MultiIndex>,
    matrix: DenseMatrix,
}

impl SpectralMatrix {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn dense(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn alpha_last(&self) -> f64 {
        self.alpha_last
    }

    /// Entry at positions `(i, j)` of the index list.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        self.indices.iter().position(|x| x == k)
    }
}

pub fn build_md(alpha: &AlphaParams, d: u32) -> Result<SpectralMatrix> {
    let n = alpha.dim();
    let indices = enumerate_kd(n, d)?;
    let size = indices.len();
    if size > MAX_DENSE_DIM {
        return Err(Error::Capacity(format!(
            "M_d has dimension {size} for N = {n}, d = {d}; dense limit is {MAX_DENSE_DIM}"
        )));
    }
    let lookup: HashMap<&MultiIndex, usize> = indices.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut matrix = DenseMatrix::zeros(size);
    for (row, k) in indices.iter().enumerate() {
        let mut diag = d as f64 * alpha.alpha_last();
        for i in 0..n {
            let kn = k.get(i) as f64;
            diag += (kn + alpha.get(i) - 1.0) * kn;
        }
        matrix.set(row, row, diag);
        // entry (k, k + e_up - e_down) = (k_up + alpha_up)(k_up + 1)
        for up in 0..n {
            for down in 0..n {
                if up == down {
                    continue;
                }
                if let Some(target) = k.shifted(up, down) {
                    let col = lookup[&target];
                    let ku = k.get(up) as f64;
                    matrix.set(row, col, (ku + alpha.get(up)) * (ku + 1.0));
                }
            }
        }
    }
    Ok(SpectralMatrix {
        degree: d,
        alpha_last: alpha.alpha_last(),
        indices,
        matrix,
    })
}

/// Eigenvalues of `M_d`, clustered.
///
/// The restriction of `-L` to each degree is self-adjoint, so the spectrum is
/// real and bounded below by `d * alpha_{N+1}`. Imaginary parts up to
/// `1e-8 * |M|` are discarded; larger ones and violations of the lower bound
/// are consistency errors.
pub fn eigen_multiset(m: &SpectralMatrix, cluster_tol: ClusterTol) -> Result<EigenMultiset> {
    if !m.matrix.is_finite() {
        return Err(Error::input("M_d has non-finite entries"));
    }
    let norm = m.matrix.norm_inf();
    let values = eigen::eigenvalues(&m.matrix)?;
    let imag_tol = 1e-8 * norm.max(f64::MIN_POSITIVE);
    if let Some(bad) = values.iter().find(|e| e.im.abs() > imag_tol) {
        return Err(Error::Consistency(format!(
            "M_{} has eigenvalue {} + {}i; imaginary part exceeds {imag_tol:e}",
            m.degree, bad.re, bad.im
        )));
    }
    let floor = m.degree as f64 * m.alpha_last;
    if let Some(bad) = values.iter().find(|e| e.re < floor - cluster_tol.at(floor)) {
        return Err(Error::Consistency(format!(
            "M_{} has eigenvalue {} below the lower bound {floor}",
            m.degree, bad.re
        )));
    }
    Ok(EigenMultiset::from_values(values.iter().map(|e| e.re), cluster_tol))
}
