//! Sparse multivariate polynomials in the simplex coordinates `x_1..x_N`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::{Error, Result};

/// Exponent vector of a monomial `x^k = x_1^{k_1} ... x_N^{k_N}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

/// Exponents of a monomial whose Dirichlet expectation is taken.
pub type MonomialExponent = MultiIndex;

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn sum(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self + e_up - e_down`, or `None` if entry `down` would go negative.
    pub fn shifted(&self, up: usize, down: usize) -> Option<MultiIndex> {
        if up == down {
            return Some(self.clone());
        }
        if self.0[down] == 0 {
            return None;
        }
        let mut k = self.0.clone();
        k[down] -= 1;
        k[up] += 1;
        Some(MultiIndex(k))
    }

    fn with_delta(&self, i: usize, delta: i32) -> MultiIndex {
        let mut k = self.0.clone();
        k[i] = (k[i] as i32 + delta) as u32;
        MultiIndex(k)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A polynomial stored as a sparse map from exponent vectors to
/// coefficients. Exact zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.add_term(MultiIndex::zeros(nvars), c);
        p
    }

    /// The coordinate function `x_i` (0-based).
    pub fn variable(nvars: usize, i: usize) -> Self {
        Polynomial::monomial(MultiIndex::unit(nvars, i), 1.0)
    }

    pub fn monomial(k: MultiIndex, c: f64) -> Self {
        let mut p = Polynomial::zero(k.dim());
        p.add_term(k, c);
        p
    }

    /// `c_0 + sum_i coeffs[i] x_i`.
    pub fn linear(coeffs: &[f64], c0: f64) -> Self {
        let n = coeffs.len();
        let mut p = Polynomial::constant(n, c0);
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(MultiIndex::unit(n, i), c);
        }
        p
    }

    /// The remainder coordinate `1 - x_1 - ... - x_N`.
    pub fn remainder(nvars: usize) -> Self {
        Polynomial::linear(&vec![-1.0; nvars], 1.0)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        let mut p = Polynomial::zero(nvars);
        for (k, c) in terms {
            if k.dim() != nvars {
                return Err(Error::input(format!(
                    "monomial {k} has {} variables, expected {nvars}",
                    k.dim()
                )));
            }
            if !c.is_finite() {
                return Err(Error::input(format!("coefficient of {k} is not finite")));
            }
            p.add_term(k, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, k: MultiIndex, c: f64) {
        debug_assert_eq!(k.dim(), self.nvars);
        if c == 0.0 {
            return;
        }
        match self.terms.entry(k) {
            Entry::Occupied(mut slot) => {
                let v = *slot.get() + c;
                if v == 0.0 {
                    slot.remove();
                } else {
                    *slot.get_mut() = v;
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, c)| (k, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, k: &MultiIndex) -> f64 {
        self.terms.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|k| k.degree() == 0)
    }

    /// Maximum total degree of a stored term; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// The part of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.degree() == d)
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (k, c) in self.terms() {
            out.add_term(k.clone(), c * s);
        }
        out
    }

    /// `d/dx_i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (k, c) in self.terms() {
            let e = k.get(i);
            if e > 0 {
                out.add_term(k.with_delta(i, -1), c * e as f64);
            }
        }
        out
    }

    /// Multiplication by the coordinate `x_i`.
    pub fn mul_var(&self, i: usize) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.with_delta(i, 1), *c))
                .collect(),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms()
            .map(|(k, c)| {
                c * k
                    .entries()
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| xi.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Largest coefficient magnitude; 0 for the zero polynomial.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomials over different variable sets");
        let mut out = self.clone();
        for (k, c) in rhs.terms() {
            out.add_term(k.clone(), c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1.0)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomials over different variable sets");
        let mut out = Polynomial::zero(self.nvars);
        for (a, ca) in self.terms() {
            for (b, cb) in rhs.terms() {
                out.add_term(a.sum(b), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (v, &e) in k.entries().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{}", v + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::variable(n, i)
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = &x(2, 0) - &x(2, 0);
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
        assert_eq!(p.degree(), 0);
    }

    #[test]
    fn product_and_derivative() {
        // (x1 + x2)^2 = x1^2 + 2 x1 x2 + x2^2
        let s = &x(2, 0) + &x(2, 1);
        let sq = &s * &s;
        assert_eq!(sq.coefficient(&MultiIndex::new(vec![1, 1])), 2.0);
        assert_eq!(sq.degree(), 2);
        let d = sq.derivative(0);
        assert_eq!(d.coefficient(&MultiIndex::new(vec![1, 0])), 2.0);
        assert_eq!(d.coefficient(&MultiIndex::new(vec![0, 1])), 2.0);
        assert_eq!(sq.evaluate(&[0.25, 0.5]), 0.5625);
    }

    #[test]
    fn remainder_evaluates_to_one_minus_sum() {
        let r = Polynomial::remainder(3);
        assert!((r.evaluate(&[0.1, 0.2, 0.3]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn shifted_index_guards_negative_entries() {
        let k = MultiIndex::new(vec![2, 0]);
        assert_eq!(k.shifted(1, 0), Some(MultiIndex::new(vec![1, 1])));
        assert_eq!(k.shifted(0, 1), None);
    }

    #[test]
    fn from_terms_rejects_mismatched_dimension() {
        let bad = Polynomial::from_terms(2, [(MultiIndex::zeros(3), 1.0)]);
        assert!(bad.is_err());
    }
}
