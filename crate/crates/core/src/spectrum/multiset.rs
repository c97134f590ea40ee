//! Multisets of real eigenvalues with value clustering.

use serde::Serialize;

use crate::{Error, Result};

/// Relative clustering tolerance: two values closer than
/// `relative * (1 + |value|)` are treated as one eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterTol {
    pub relative: f64,
}

impl ClusterTol {
    pub const DEFAULT_RELATIVE: f64 = 1e-7;

    pub fn new(relative: f64) -> Result<Self> {
        if !(relative.is_finite() && relative > 0.0) {
            return Err(Error::input(format!(
                "cluster tolerance must be positive and finite, got {relative}"
            )));
        }
        Ok(ClusterTol { relative })
    }

    pub fn at(&self, value: f64) -> f64 {
        self.relative * (1.0 + value.abs())
    }
}

impl Default for ClusterTol {
    fn default() -> Self {
        ClusterTol {
            relative: Self::DEFAULT_RELATIVE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: u64,
}

/// Sorted `(value, multiplicity)` pairs. Neighbouring clusters are further
/// apart than the clustering tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenMultiset {
    clusters: Vec<Cluster>,
    cluster_tol: ClusterTol,
    /// Set when distinct sources (keys, degrees) were merged into one value.
    non_generic: bool,
}

impl EigenMultiset {
    pub fn empty(cluster_tol: ClusterTol) -> Self {
        EigenMultiset {
            clusters: Vec::new(),
            cluster_tol,
            non_generic: false,
        }
    }

    /// Clusters raw `(value, multiplicity)` pairs by single linkage on the
    /// sorted values. Zero multiplicities are dropped. A cluster's value is
    /// the multiplicity-weighted mean of its members.
    pub fn from_weighted(
        values: impl IntoIterator<Item = (f64, u64)>,
        cluster_tol: ClusterTol,
    ) -> Self {
        let mut raw: Vec<(f64, u64)> = values.into_iter().filter(|&(_, m)| m > 0).collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut clusters = Vec::new();
        let mut non_generic = false;
        let mut i = 0;
        while i < raw.len() {
            let (mut sum, mut mult) = (raw[i].0 * raw[i].1 as f64, raw[i].1);
            let mut last = raw[i].0;
            let mut members = 1;
            let mut j = i + 1;
            while j < raw.len() && raw[j].0 - last <= cluster_tol.at(last) {
                sum += raw[j].0 * raw[j].1 as f64;
                mult += raw[j].1;
                last = raw[j].0;
                members += 1;
                j += 1;
            }
            non_generic |= members > 1;
            clusters.push(Cluster {
                value: sum / mult as f64,
                multiplicity: mult,
            });
            i = j;
        }
        EigenMultiset {
            clusters,
            cluster_tol,
            non_generic,
        }
    }

    /// Clusters a list of simple values (each with multiplicity one).
    /// Coinciding values are expected here and do not set the flag.
    pub fn from_values(values: impl IntoIterator<Item = f64>, cluster_tol: ClusterTol) -> Self {
        let mut m = EigenMultiset::from_weighted(values.into_iter().map(|v| (v, 1)), cluster_tol);
        m.non_generic = false;
        m
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster_tol(&self) -> ClusterTol {
        self.cluster_tol
    }

    pub fn is_non_generic(&self) -> bool {
        self.non_generic
    }

    /// Sum of multiplicities.
    pub fn dimension(&self) -> u64 {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.clusters.first().map(|c| c.value)
    }

    /// Smallest value above the clustering tolerance of zero.
    pub fn min_positive(&self) -> Option<f64> {
        let zero_tol = self.cluster_tol.at(0.0);
        self.clusters.iter().map(|c| c.value).find(|&v| v > zero_tol)
    }

    /// Multiplicity of the cluster containing `value`, or 0.
    pub fn multiplicity_of(&self, value: f64) -> u64 {
        self.clusters
            .iter()
            .find(|c| (c.value - value).abs() <= self.cluster_tol.at(value))
            .map_or(0, |c| c.multiplicity)
    }

    pub fn shifted(&self, by: f64) -> EigenMultiset {
        EigenMultiset::from_weighted(
            self.clusters.iter().map(|c| (c.value + by, c.multiplicity)),
            self.cluster_tol,
        )
        .with_flag(self.non_generic)
    }

    /// Multiset union; clusters from the two sides that coincide are merged.
    pub fn union(&self, other: &EigenMultiset) -> EigenMultiset {
        let merged = EigenMultiset::from_weighted(
            self.clusters
                .iter()
                .chain(&other.clusters)
                .map(|c| (c.value, c.multiplicity)),
            self.cluster_tol,
        );
        let flag = merged.non_generic || self.non_generic || other.non_generic;
        merged.with_flag(flag)
    }

    /// Values not exceeding `cap`.
    pub fn restricted(&self, cap: f64) -> EigenMultiset {
        EigenMultiset {
            clusters: self.clusters.iter().copied().filter(|c| c.value <= cap).collect(),
            cluster_tol: self.cluster_tol,
            non_generic: self.non_generic,
        }
    }

    fn with_flag(mut self, flag: bool) -> Self {
        self.non_generic = flag;
        self
    }

    /// Same cluster count, identical multiplicities, values within `abs_tol`.
    pub fn approx_eq(&self, other: &EigenMultiset, abs_tol: f64) -> bool {
        self.mismatch(other, abs_tol).is_none()
    }

    /// Describes the first disagreement with `other`, if any.
    pub fn mismatch(&self, other: &EigenMultiset, abs_tol: f64) -> Option<String> {
        if self.clusters.len() != other.clusters.len() {
            return Some(format!(
                "{} clusters vs {} clusters",
                self.clusters.len(),
                other.clusters.len()
            ));
        }
        for (a, b) in self.clusters.iter().zip(&other.clusters) {
            if a.multiplicity != b.multiplicity {
                return Some(format!(
                    "value {} has multiplicity {} vs {}",
                    a.value, a.multiplicity, b.multiplicity
                ));
            }
            if (a.value - b.value).abs() > abs_tol {
                return Some(format!("value {} vs {}", a.value, b.value));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustering_merges_close_values() {
        let tol = ClusterTol::default();
        let m = EigenMultiset::from_values([1.0, 3.0, 1.0 + 1e-10, 2.0, 3.0 - 1e-9], tol);
        assert_eq!(m.clusters().len(), 3);
        assert_eq!(m.dimension(), 5);
        assert_eq!(m.multiplicity_of(1.0), 2);
        assert_eq!(m.multiplicity_of(3.0), 2);
        assert!(!m.is_non_generic());
    }

    #[test]
    fn weighted_merge_flags_coincidences() {
        let tol = ClusterTol::default();
        let m = EigenMultiset::from_weighted([(2.0, 1), (2.0, 3), (5.0, 0)], tol);
        assert_eq!(m.clusters(), &[Cluster { value: 2.0, multiplicity: 4 }]);
        assert!(m.is_non_generic());
    }

    #[test]
    fn union_shift_and_min_positive() {
        let tol = ClusterTol::default();
        let a = EigenMultiset::from_weighted([(0.0, 1), (1.5, 2)], tol);
        let b = EigenMultiset::from_weighted([(4.0, 1)], tol);
        let u = a.union(&b);
        assert_eq!(u.dimension(), 4);
        assert_eq!(u.min_positive(), Some(1.5));
        assert_eq!(u.shifted(1.0).min(), Some(1.0));
        assert_eq!(u.restricted(2.0).dimension(), 3);
        assert!(u.approx_eq(&u.shifted(1e-12), 1e-10));
        assert!(!u.approx_eq(&a, 1e-10));
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(ClusterTol::new(0.0).is_err());
        assert!(ClusterTol::new(f64::NAN).is_err());
    }
}
