//! The population chain on the lattice simplex `{m / M : m in Z_+^N, |m| <= M}`.
//!
//! From counts `m` with remainder `r = M - |m|` the chain moves
//!
//! - `m -> m - e_i` at rate `m_i alpha_{N+1} + m_i r`,
//! - `m -> m + e_i` at rate `alpha_i r + m_i r`,
//!
//! and is reversible with respect to the weights
//! `[alpha_{N+1}]_r / r! * prod_i [alpha_i]_{m_i} / m_i!`.

use std::collections::{HashMap, VecDeque};
use std::io::{self, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::simplex::AlphaParams;
use crate::special::{binomial, ln_rising_over_factorial_table};
use crate::{Error, Result};

/// Largest state space that is enumerated at all.
pub const MAX_STATES: u64 = 2_000_000;
/// Largest state space handed to the dense symmetric eigensolver.
pub const MAX_DENSE_STATES: usize = 5_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainSpec {
    m: u32,
    alpha: AlphaParams,
}

impl ChainSpec {
    /// Population size `M` with the standing assumption `M >= N + 1`.
    pub fn new(m: u32, alpha: AlphaParams) -> Result<Self> {
        if (m as usize) < alpha.dim() + 1 {
            return Err(Error::input(format!(
                "M = {m} must be at least N + 1 = {}",
                alpha.dim() + 1
            )));
        }
        Ok(ChainSpec { m, alpha })
    }

    /// Any `M >= 1`. Small populations below `N + 1` are well defined but
    /// outside the regime where the gap statement applies.
    pub fn relaxed(m: u32, alpha: AlphaParams) -> Result<Self> {
        if m == 0 {
            return Err(Error::input("M must be at least 1"));
        }
        Ok(ChainSpec { m, alpha })
    }

    pub fn population(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    pub fn alpha(&self) -> &AlphaParams {
        &self.alpha
    }

    /// `binom(M + N, N)`.
    pub fn num_states(&self) -> Result<u64> {
        binomial(self.m as u64 + self.dim() as u64, self.dim() as u64)
    }
}

/// Counts `m_1..m_N` with `|m| <= M`; the point of the simplex is `m / M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct DiscreteState {
    counts: Vec<u32>,
}

impl DiscreteState {
    pub fn new(counts: Vec<u32>) -> Self {
        DiscreteState { counts }
    }

    pub fn zeros(n: usize) -> Self {
        DiscreteState { counts: vec![0; n] }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// `M - |m|`, the count of the remainder type.
    pub fn remainder(&self, m: u32) -> u32 {
        m - self.total()
    }

    pub fn to_point(&self, m: u32) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / m as f64).collect()
    }

    fn moved(&self, i: usize, up: bool) -> DiscreteState {
        let mut c = self.counts.clone();
        if up {
            c[i] += 1;
        } else {
            c[i] -= 1;
        }
        DiscreteState { counts: c }
    }

    fn check(&self, spec: &ChainSpec) -> Result<()> {
        if self.counts.len() != spec.dim() || self.total() > spec.m {
            return Err(Error::input(format!(
                "{:?} is not a state for N = {}, M = {}",
                self.counts,
                spec.dim(),
                spec.m
            )));
        }
        Ok(())
    }
}

/// All states ordered by total count, then colexicographically (last
/// coordinate most significant). For `N = 2, M = 2`:
/// `(0,0) (1,0) (0,1) (2,0) (1,1) (0,2)`.
pub fn enumerate_states(spec: &ChainSpec) -> Result<Vec<DiscreteState>> {
    let count = spec.num_states()?;
    if count > MAX_STATES {
        return Err(Error::Capacity(format!(
            "{count} states for N = {}, M = {}; limit is {MAX_STATES}",
            spec.dim(),
            spec.m
        )));
    }
    let n = spec.dim();
    let mut out = Vec::with_capacity(count as usize);
    for total in 0..=spec.m {
        let mut cur = vec![0u32; n];
        colex(&mut cur, n, total, &mut out);
    }
    Ok(out)
}

/// Fills `cur[..len]` with all vectors summing to `left`, colex order.
fn colex(cur: &mut [u32], len: usize, left: u32, out: &mut Vec<DiscreteState>) {
    if len == 1 {
        cur[0] = left;
        out.push(DiscreteState::new(cur.to_vec()));
        return;
    }
    for last in 0..=left {
        cur[len - 1] = last;
        colex(cur, len - 1, left - last, out);
    }
    cur[len - 1] = 0;
}

/// Feasible moves out of `x` with their positive rates; down moves first,
/// then up moves, each in coordinate order.
pub fn transition_rates(spec: &ChainSpec, x: &DiscreteState) -> Result<Vec<(DiscreteState, f64)>> {
    x.check(spec)?;
    Ok(rates_unchecked(spec, x))
}

fn rates_unchecked(spec: &ChainSpec, x: &DiscreteState) -> Vec<(DiscreteState, f64)> {
    let r = x.remainder(spec.m) as f64;
    let a_last = spec.alpha.alpha_last();
    let mut out = Vec::with_capacity(2 * spec.dim());
    for (i, &mi) in x.counts.iter().enumerate() {
        if mi > 0 {
            let mi = mi as f64;
            out.push((x.moved(i, false), mi * a_last + mi * r));
        }
    }
    if r > 0.0 {
        for (i, &mi) in x.counts.iter().enumerate() {
            out.push((x.moved(i, true), spec.alpha.get(i) * r + mi as f64 * r));
        }
    }
    out
}

/// Per-coordinate tables of `ln([a]_m / m!)` for `m <= M`; the last one
/// belongs to the remainder coordinate.
struct WeightTables(Vec<Vec<f64>>);

impl WeightTables {
    fn new(spec: &ChainSpec) -> Self {
        let m = spec.m as u64;
        let mut t: Vec<Vec<f64>> = (0..spec.alpha.dim())
            .map(|i| ln_rising_over_factorial_table(spec.alpha.get(i), m))
            .collect();
        t.push(ln_rising_over_factorial_table(spec.alpha.alpha_last(), m));
        WeightTables(t)
    }

    fn eval(&self, spec: &ChainSpec, x: &DiscreteState) -> f64 {
        let n = x.counts.len();
        let r = x.remainder(spec.m) as usize;
        x.counts
            .iter()
            .enumerate()
            .fold(self.0[n][r], |w, (i, &mi)| w + self.0[i][mi as usize])
    }
}

/// `ln` of the unnormalized stationary weight of `x`.
pub fn log_weight(spec: &ChainSpec, x: &DiscreteState) -> f64 {
    WeightTables::new(spec).eval(spec, x)
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryMeasure {
    pub states: Vec<DiscreteState>,
    pub log_weights: Vec<f64>,
    pub log_z: f64,
}

impl StationaryMeasure {
    pub fn probabilities(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| (w - self.log_z).exp()).collect()
    }

    pub fn log_prob(&self, i: usize) -> f64 {
        self.log_weights[i] - self.log_z
    }

    /// CSV with header `m1,...,mN,probability`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, |s| s.counts.len());
        let header: Vec<String> = (1..=n).map(|i| format!("m{i}")).collect();
        writeln!(w, "{},probability", header.join(","))?;
        for (s, p) in self.states.iter().zip(self.probabilities()) {
            for c in &s.counts {
                write!(w, "{c},")?;
            }
            writeln!(w, "{p}")?;
        }
        Ok(())
    }
}

pub fn stationary_measure(spec: &ChainSpec) -> Result<StationaryMeasure> {
    let states = enumerate_states(spec)?;
    let tables = WeightTables::new(spec);
    let log_weights: Vec<f64> = states.par_iter().map(|x| tables.eval(spec, x)).collect();
    let log_z = log_sum_exp(&log_weights);
    Ok(StationaryMeasure {
        states,
        log_weights,
        log_z,
    })
}

/// The rate matrix in compressed rows. Row `i` lists `(column, rate)` for
/// every neighbour and the diagonal `-sum of rates`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix {
    states: Vec<DiscreteState>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl GeneratorMatrix {
    pub fn states(&self) -> &[DiscreteState] {
        &self.states
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|&&(c, _)| c == j).map_or(0.0, |&(_, v)| v)
    }

    /// Overwrites an off-diagonal rate and rebalances the diagonal, keeping
    /// rows conservative. Used for fault injection.
    pub fn set_rate(&mut self, i: usize, j: usize, rate: f64) -> Result<()> {
        if i == j {
            return Err(Error::input("set_rate targets off-diagonal entries"));
        }
        let slot = self.rows[i]
            .iter_mut()
            .find(|(c, _)| *c == j)
            .ok_or_else(|| Error::input(format!("states {i} and {j} are not neighbours")))?;
        let old = std::mem::replace(&mut slot.1, rate);
        let diag = self.rows[i].iter_mut().find(|(c, _)| *c == i).expect("diagonal stored");
        diag.1 -= rate - old;
        Ok(())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut a = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                a[(i, j)] = v;
            }
        }
        a
    }

    /// Largest `|row sum|`.
    pub fn max_row_sum(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, v)| v).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// `(row, col, rate)` for every stored entry, rows in state order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v)))
            .collect()
    }

    /// CSV with header `row,col,rate`.
    pub fn write_triplets_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "row,col,rate")?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i},{j},{v}")?;
        }
        Ok(())
    }

    /// `(f A)` for a row vector `f`, i.e. `sum_x f(x) A(x, y)` for each `y`.
    pub fn left_apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[j] += f[i] * v;
            }
        }
        out
    }
}

fn index_of(states: &[DiscreteState]) -> HashMap<&DiscreteState, usize> {
    states.iter().enumerate().map(|(i, s)| (s, i)).collect()
}

pub fn generator_matrix(spec: &ChainSpec) -> Result<GeneratorMatrix> {
    let states = enumerate_states(spec)?;
    let index = index_of(&states);
    let rows = states
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut row: Vec<(usize, f64)> = rates_unchecked(spec, x)
                .into_iter()
                .map(|(y, q)| (index[&y], q))
                .collect();
            let out: f64 = row.iter().map(|&(_, q)| q).sum();
            row.push((i, -out));
            row.sort_by_key(|&(j, _)| j);
            row
        })
        .collect();
    Ok(GeneratorMatrix { states, rows })
}

/// Largest `|ln mu(x) q(x,y) - ln mu(y) q(y,x)|` over all edges, from the
/// closed-form rates and weights without assembling the matrix.
pub fn detailed_balance_check(spec: &ChainSpec) -> Result<f64> {
    let states = enumerate_states(spec)?;
    let tables = WeightTables::new(spec);
    Ok(states
        .par_iter()
        .map(|x| {
            let lx = tables.eval(spec, x);
            rates_unchecked(spec, x)
                .into_iter()
                .map(|(y, q)| {
                    let back = rates_unchecked(spec, &y)
                        .into_iter()
                        .find(|(z, _)| z == x)
                        .map_or(0.0, |(_, r)| r);
                    (lx + q.ln() - tables.eval(spec, &y) - back.ln()).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// The same violation measured on an assembled (possibly perturbed)
/// generator against a given measure.
pub fn detailed_balance_violation(a: &GeneratorMatrix, mu: &StationaryMeasure) -> Result<f64> {
    if a.states != mu.states {
        return Err(Error::input("generator and measure use different state lists"));
    }
    let mut worst = 0.0_f64;
    for i in 0..a.size() {
        for &(j, q) in a.row(i) {
            if j == i {
                continue;
            }
            let back = a.get(j, i);
            worst = worst.max((mu.log_weights[i] + q.ln() - mu.log_weights[j] - back.ln()).abs());
        }
    }
    Ok(worst)
}

/// `max_y |sum_x mu(x) A(x, y)|`.
pub fn stationarity_residual(a: &GeneratorMatrix, mu: &StationaryMeasure) -> Result<f64> {
    if a.states != mu.states {
        return Err(Error::input("generator and measure use different state lists"));
    }
    Ok(a.left_apply(&mu.probabilities()).iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Whether the neighbour graph is one connected component.
pub fn is_irreducible(spec: &ChainSpec) -> Result<bool> {
    let a = generator_matrix(spec)?;
    let mut seen = vec![false; a.size()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut visited = 1;
    while let Some(i) = queue.pop_front() {
        for &(j, q) in a.row(i) {
            if j != i && q > 0.0 && !seen[j] {
                seen[j] = true;
                visited += 1;
                queue.push_back(j);
            }
        }
    }
    Ok(visited == a.size())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainGap {
    /// Second smallest eigenvalue of `-A`.
    pub gap: f64,
    /// Smallest eigenvalue of `-A`; zero up to rounding.
    pub smallest: f64,
    pub states: usize,
    /// Whether the exact value `alpha_{N+1}` is expected (`N >= 2`).
    pub theorem_applies: bool,
}

/// Spectral gap of `-A` from the symmetric matrix `D^{1/2} A D^{-1/2}`,
/// `D = diag(mu)`, which is similar to `A` by detailed balance.
pub fn chain_spectral_gap(spec: &ChainSpec) -> Result<ChainGap> {
    let count = spec.num_states()?;
    if count > MAX_DENSE_STATES as u64 {
        return Err(Error::Capacity(format!(
            "{count} states exceed the dense eigensolver limit {MAX_DENSE_STATES}"
        )));
    }
    let a = generator_matrix(spec)?;
    let mu = stationary_measure(spec)?;
    let n = a.size();
    let half: Vec<f64> = (0..n).map(|i| 0.5 * mu.log_prob(i)).collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for &(j, v) in a.row(i) {
            s[(i, j)] = -v * (half[i] - half[j]).exp();
        }
    }
    let s = (&s + s.transpose()) * 0.5;
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            message: "symmetrized generator has non-finite entries".into(),
            state: Vec::new(),
        });
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    if ev.len() < 2 {
        return Err(Error::Degenerate("chain with a single state has no gap".into()));
    }
    Ok(ChainGap {
        gap: ev[1],
        smallest: ev[0],
        states: n,
        theorem_applies: spec.dim() >= 2 && spec.m as usize > spec.dim(),
    })
}

/// `A f(x) = sum_y q(x, y) (f(y) - f(x))`.
pub fn generator_apply(
    spec: &ChainSpec,
    f: impl Fn(&DiscreteState) -> f64,
    x: &DiscreteState,
) -> Result<f64> {
    let fx = f(x);
    Ok(transition_rates(spec, x)?
        .iter()
        .map(|(y, q)| q * (f(y) - fx))
        .sum())
}

/// A piecewise-constant path: `states[k]` is occupied on
/// `[jump_times[k], jump_times[k + 1])`, the last one until `horizon`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpPath {
    pub jump_times: Vec<f64>,
    pub states: Vec<DiscreteState>,
    pub horizon: f64,
}

impl JumpPath {
    pub fn jumps(&self) -> usize {
        self.states.len() - 1
    }

    /// Fraction of `[0, horizon]` spent in each of `states`.
    pub fn occupation(&self, states: &[DiscreteState]) -> Vec<f64> {
        let index = index_of(states);
        let mut occ = vec![0.0; states.len()];
        for (k, s) in self.states.iter().enumerate() {
            let end = self.jump_times.get(k + 1).copied().unwrap_or(self.horizon);
            occ[index[s]] += end - self.jump_times[k];
        }
        occ.iter_mut().for_each(|o| *o /= self.horizon);
        occ
    }
}

/// Stops a Gillespie run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    Time(f64),
    Jumps(usize),
}

/// Exact simulation: exponential holding times with the total exit rate,
/// next state chosen proportionally to the rates.
pub fn gillespie<R: Rng + ?Sized>(
    spec: &ChainSpec,
    x0: &DiscreteState,
    stop: StopRule,
    rng: &mut R,
) -> Result<JumpPath> {
    x0.check(spec)?;
    match stop {
        StopRule::Time(t) if !(t.is_finite() && t >= 0.0) => {
            return Err(Error::input(format!("horizon must be nonnegative, got {t}")))
        }
        _ => {}
    }
    let mut t = 0.0;
    let mut x = x0.clone();
    let mut jump_times = vec![0.0];
    let mut states = vec![x.clone()];
    loop {
        if let StopRule::Jumps(n) = stop {
            if states.len() > n {
                break;
            }
        }
        let moves = rates_unchecked(spec, &x);
        let total: f64 = moves.iter().map(|(_, q)| q).sum();
        assert!(total > 0.0, "state {:?} has no exit rate", x.counts);
        let hold = -(1.0 - rng.random::<f64>()).ln() / total;
        if let StopRule::Time(h) = stop {
            if t + hold > h {
                return Ok(JumpPath { jump_times, states, horizon: h });
            }
        }
        t += hold;
        let mut u = rng.random::<f64>() * total;
        let mut next = moves.len() - 1;
        for (k, (_, q)) in moves.iter().enumerate() {
            if u < *q {
                next = k;
                break;
            }
            u -= q;
        }
        x = moves[next].0.clone();
        jump_times.push(t);
        states.push(x.clone());
    }
    // Jumps(n): the horizon is the time of the last jump; the final state
    // carries no holding time.
    Ok(JumpPath {
        jump_times,
        states,
        horizon: t,
    })
}

/// Total variation distance `1/2 sum |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
