//! Euler-Maruyama simulation of the simplex diffusion
//!
//! `dX_i = (alpha_i (1 - |X|) - alpha_{N+1} X_i) dt + sqrt(2 (1 - |X|) X_i) dW_i`
//!
//! with independent Brownian motions, plus ensemble moments and decay-rate
//! fits on eigenfunctions.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::polynomial::Polynomial;
use crate::rng::{derive_seed, stream_rng};
use crate::simplex::{self, project_in_place, AlphaParams, SimplexPoint};
use crate::spectrum::integrate;
use crate::{Error, Result};

/// Paths are processed in fixed-size chunks whose partial sums are combined
/// in order, so reductions do not depend on the thread count.
const CHUNK: usize = 64;

const X0_PURPOSE: u64 = 1;
const BOOTSTRAP_PURPOSE: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Negative coordinates are set to zero.
    Clamp,
    /// Negative coordinates are mirrored at zero.
    Reflect,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub boundary: BoundaryPolicy,
    pub record_stride: usize,
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, paths: usize, seed: u64) -> Result<Self> {
        let cfg = SimConfig {
            dt,
            horizon,
            paths,
            seed,
            boundary: BoundaryPolicy::Clamp,
            record_stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `1e-3 * min(1, 1 / |alpha|)`.
    pub fn default_dt(alpha: &AlphaParams) -> f64 {
        1e-3 * (1.0 / alpha.total()).min(1.0)
    }

    pub fn with_boundary(mut self, boundary: BoundaryPolicy) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_stride(mut self, record_stride: usize) -> Result<Self> {
        self.record_stride = record_stride;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::input(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::input(format!("horizon must be nonnegative, got {}", self.horizon)));
        }
        if self.horizon > 0.0 && self.dt >= self.horizon {
            return Err(Error::input(format!(
                "dt = {} must be smaller than the horizon {}",
                self.dt, self.horizon
            )));
        }
        if self.paths == 0 {
            return Err(Error::input("paths must be at least 1"));
        }
        if self.record_stride == 0 {
            return Err(Error::input("record_stride must be at least 1"));
        }
        Ok(())
    }

    /// Number of Euler steps; the last one is shortened to end at the horizon.
    pub fn steps(&self) -> usize {
        if self.horizon == 0.0 {
            0
        } else {
            (self.horizon / self.dt - 1e-9).ceil() as usize
        }
    }

    /// Recorded step indices: 0, every stride, and the final step.
    fn is_recorded(&self, step: usize, steps: usize) -> bool {
        step.is_multiple_of(self.record_stride) || step == steps
    }

    fn time_of(&self, step: usize, steps: usize) -> f64 {
        if step == steps {
            self.horizon
        } else {
            step as f64 * self.dt
        }
    }

    /// Times at which states are recorded.
    pub fn record_times(&self) -> Vec<f64> {
        let steps = self.steps();
        (0..=steps)
            .filter(|&s| self.is_recorded(s, steps))
            .map(|s| self.time_of(s, steps))
            .collect()
    }
}

fn apply_boundary(x: &mut [f64], policy: BoundaryPolicy) {
    if policy == BoundaryPolicy::Reflect {
        for c in x.iter_mut() {
            *c = c.abs();
        }
    }
    project_in_place(x);
}

fn step_in_place(
    x: &mut [f64],
    alpha: &AlphaParams,
    dt: f64,
    gaussians: impl Iterator<Item = f64>,
    policy: BoundaryPolicy,
) -> Result<()> {
    let rem = 1.0 - x.iter().sum::<f64>();
    let sqrt_dt = dt.sqrt();
    let a_last = alpha.alpha_last();
    for ((xi, &ai), g) in x.iter_mut().zip(alpha.alphas()).zip(gaussians) {
        let drift = ai * rem - a_last * *xi;
        let vol = (2.0 * rem * *xi).max(0.0).sqrt();
        *xi += drift * dt + vol * sqrt_dt * g;
    }
    if let Some(bad) = x.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite {
            message: format!("coordinate x{} after an Euler step of size {dt}", bad + 1),
            state: x.to_vec(),
        });
    }
    apply_boundary(x, policy);
    Ok(())
}

/// One Euler-Maruyama step with the given standard normal increments,
/// followed by the boundary policy.
pub fn em_step(
    x: &SimplexPoint,
    alpha: &AlphaParams,
    dt: f64,
    gaussians: &[f64],
    policy: BoundaryPolicy,
) -> Result<SimplexPoint> {
    if gaussians.len() != x.dim() || alpha.dim() != x.dim() {
        return Err(Error::input(format!(
            "point has {} coordinates, alpha has N = {}, {} gaussians given",
            x.dim(),
            alpha.dim(),
            gaussians.len()
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::input(format!("dt must be positive, got {dt}")));
    }
    let mut c = x.coords().to_vec();
    step_in_place(&mut c, alpha, dt, gaussians.iter().copied(), policy)?;
    Ok(SimplexPoint::from_projected(c))
}

/// Runs one path, calling `record(time, state)` at every recorded step.
fn run_path<R: Rng>(
    x0: &[f64],
    alpha: &AlphaParams,
    cfg: &SimConfig,
    rng: &mut R,
    mut record: impl FnMut(f64, &[f64]),
) -> Result<()> {
    let steps = cfg.steps();
    let mut x = x0.to_vec();
    let mut noise = vec![0.0; x.len()];
    record(0.0, &x);
    for s in 1..=steps {
        let h = if s == steps {
            cfg.horizon - (steps - 1) as f64 * cfg.dt
        } else {
            cfg.dt
        };
        noise.iter_mut().for_each(|g| *g = rng.sample(StandardNormal));
        step_in_place(&mut x, alpha, h, noise.iter().copied(), cfg.boundary)?;
        if cfg.is_recorded(s, steps) {
            record(cfg.time_of(s, steps), &x);
        }
    }
    Ok(())
}

fn check_point(alpha: &AlphaParams, x0: &SimplexPoint) -> Result<()> {
    if alpha.dim() != x0.dim() {
        return Err(Error::input(format!(
            "start point has {} coordinates, alpha has N = {}",
            x0.dim(),
            alpha.dim()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SimplexPoint>,
}

/// Path number `path` of the ensemble described by `cfg`.
pub fn simulate_path(
    x0: &SimplexPoint,
    alpha: &AlphaParams,
    cfg: &SimConfig,
    path: u64,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_point(alpha, x0)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    run_path(x0.coords(), alpha, cfg, &mut stream_rng(cfg.seed, path), |t, x| {
        times.push(t);
        states.push(SimplexPoint::from_projected(x.to_vec()));
    })?;
    Ok(Trajectory { times, states })
}

/// The first path of the ensemble described by `cfg`.
pub fn simulate(x0: &SimplexPoint, alpha: &AlphaParams, cfg: &SimConfig) -> Result<Trajectory> {
    simulate_path(x0, alpha, cfg, 0)
}

/// Law of the starting point.
#[derive(Clone, Debug, PartialEq)]
pub enum X0Law {
    Point(SimplexPoint),
    /// Exact draws from the Dirichlet law, one per path (or outer group).
    Stationary,
}

impl X0Law {
    fn draw(&self, alpha: &AlphaParams, seed: u64, index: u64) -> Vec<f64> {
        match self {
            X0Law::Point(p) => p.coords().to_vec(),
            X0Law::Stationary => simplex::sample(
                alpha,
                &mut stream_rng(derive_seed(seed, X0_PURPOSE), index),
            )
            .into_coords(),
        }
    }

    fn check(&self, alpha: &AlphaParams) -> Result<()> {
        match self {
            X0Law::Point(p) => check_point(alpha, p),
            X0Law::Stationary => Ok(()),
        }
    }
}

/// Per recorded time and observable: mean, second moment and standard error
/// of the mean (`sample std / sqrt(paths)`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub paths: usize,
    /// `means[t][j]` for observable `j` at time index `t`.
    pub means: Vec<Vec<f64>>,
    pub second_moments: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
}

/// Ensemble statistics of `observables` along `cfg.paths` independent paths.
pub fn ensemble_stats(
    law: &X0Law,
    alpha: &AlphaParams,
    cfg: &SimConfig,
    observables: &[Polynomial],
) -> Result<EnsembleStats> {
    cfg.validate()?;
    law.check(alpha)?;
    if let Some(f) = observables.iter().find(|f| f.nvars() != alpha.dim()) {
        return Err(Error::input(format!(
            "observable in {} variables, alpha has N = {}",
            f.nvars(),
            alpha.dim()
        )));
    }
    let times = cfg.record_times();
    let cells = times.len() * observables.len();
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut s1 = vec![0.0; cells];
            let mut s2 = vec![0.0; cells];
            for p in c * CHUNK..((c + 1) * CHUNK).min(cfg.paths) {
                let x0 = law.draw(alpha, cfg.seed, p as u64);
                let mut ti = 0;
                run_path(&x0, alpha, cfg, &mut stream_rng(cfg.seed, p as u64), |_, x| {
                    for (j, f) in observables.iter().enumerate() {
                        let v = f.evaluate(x);
                        s1[ti * observables.len() + j] += v;
                        s2[ti * observables.len() + j] += v * v;
                    }
                    ti += 1;
                })?;
            }
            Ok((s1, s2))
        })
        .collect::<Result<_>>()?;
    let mut s1 = vec![0.0; cells];
    let mut s2 = vec![0.0; cells];
    for (a, b) in &chunks {
        s1.iter_mut().zip(a).for_each(|(x, y)| *x += y);
        s2.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    }
    let n = cfg.paths as f64;
    let nobs = observables.len();
    let mut means = Vec::with_capacity(times.len());
    let mut second = Vec::with_capacity(times.len());
    let mut ses = Vec::with_capacity(times.len());
    for t in 0..times.len() {
        let m: Vec<f64> = (0..nobs).map(|j| s1[t * nobs + j] / n).collect();
        let q: Vec<f64> = (0..nobs).map(|j| s2[t * nobs + j] / n).collect();
        let se = m
            .iter()
            .zip(&q)
            .map(|(&m, &q)| {
                if cfg.paths < 2 {
                    f64::NAN
                } else {
                    ((q - m * m).max(0.0) * n / (n - 1.0)).sqrt() / n.sqrt()
                }
            })
            .collect();
        means.push(m);
        second.push(q);
        ses.push(se);
    }
    Ok(EnsembleStats {
        times,
        paths: cfg.paths,
        means,
        second_moments: second,
        std_errors: ses,
    })
}

/// States of every path at the horizon.
pub fn terminal_states(law: &X0Law, alpha: &AlphaParams, cfg: &SimConfig) -> Result<Vec<SimplexPoint>> {
    cfg.validate()?;
    law.check(alpha)?;
    let stride_cfg = SimConfig {
        record_stride: usize::MAX,
        ..cfg.clone()
    };
    (0..cfg.paths)
        .into_par_iter()
        .map(|p| {
            let x0 = law.draw(alpha, cfg.seed, p as u64);
            let mut last = x0.clone();
            run_path(&x0, alpha, &stride_cfg, &mut stream_rng(cfg.seed, p as u64), |_, x| {
                last.copy_from_slice(x)
            })?;
            Ok(SimplexPoint::from_projected(last))
        })
        .collect()
}

/// Outer/inner split and fitting window for [`decay_rate_fit`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayConfig {
    /// Independent starting points (stationary law) or path groups (point law).
    pub outer: usize,
    /// Paths per starting point.
    pub inner: usize,
    /// Fit window starts here.
    pub t_start: f64,
    /// The window ends at the first recorded time where the estimated squared
    /// deviation has fallen below this fraction of its value at `t_start`
    /// (or at the horizon).
    pub drop_fraction: f64,
    /// Resamples for the percentile interval.
    pub bootstrap: usize,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            outer: 2000,
            inner: 32,
            t_start: 0.0,
            drop_fraction: (-2.0f64).exp(),
            bootstrap: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub stderr: f64,
    /// 95% percentile bootstrap interval.
    pub ci: (f64, f64),
    pub window: (f64, f64),
    pub dt: f64,
    pub paths: usize,
    /// Set when the squared deviation estimate was not positive somewhere in
    /// the window or too many bootstrap replicates failed.
    pub inconclusive: bool,
    /// `(t, estimated squared deviation)` over the window.
    pub curve: Vec<(f64, f64)>,
}

/// Per-group inner means and variances of `f(X_t)`, `[group][time]`.
struct GroupMoments {
    means: Vec<Vec<f64>>,
    vars: Vec<Vec<f64>>,
}

/// Squared deviation of the semigroup from the mean at each time, from a
/// selection of groups.
///
/// Stationary start: `Var_outer(inner mean) - mean(inner var) / inner`,
/// unbiased for `Var_mu(P_t f)`. Point start: `mean^2 - var / paths`,
/// unbiased for `(P_t f(x0))^2`.
fn squared_deviation(g: &GroupMoments, pick: &[usize], inner: usize, stationary: bool) -> Vec<f64> {
    let ntimes = g.means[0].len();
    let k = pick.len() as f64;
    (0..ntimes)
        .map(|t| {
            if stationary {
                let mean = pick.iter().map(|&o| g.means[o][t]).sum::<f64>() / k;
                let between = pick.iter().map(|&o| (g.means[o][t] - mean).powi(2)).sum::<f64>() / (k - 1.0);
                let within = pick.iter().map(|&o| g.vars[o][t]).sum::<f64>() / k;
                between - within / inner as f64
            } else {
                // groups are exchangeable batches of the same start point
                let total = k * inner as f64;
                let mean = pick.iter().map(|&o| g.means[o][t]).sum::<f64>() / k;
                let sq = pick
                    .iter()
                    .map(|&o| g.vars[o][t] * (inner as f64 - 1.0) + inner as f64 * g.means[o][t].powi(2))
                    .sum::<f64>()
                    / total;
                let var = (sq - mean * mean) * total / (total - 1.0);
                mean * mean - var / total
            }
        })
        .collect()
}

/// First index after `first` where `s` has dropped to `drop * s[first]`, or
/// the last index.
fn window_end(s: &[f64], first: usize, drop: f64) -> usize {
    (first + 1..s.len())
        .find(|&t| !(s[t] > drop * s[first]))
        .unwrap_or(s.len() - 1)
}

/// Least-squares slope of `ln s` against `t`.
fn log_slope(times: &[f64], s: &[f64]) -> Option<f64> {
    if s.iter().any(|&v| !(v > 0.0)) || times.len() < 2 {
        return None;
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let ys: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = times.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let sxx: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    Some(sxy / sxx)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Fits the exponential decay rate of `P_t f` towards its mean.
///
/// If `f` is an eigenfunction with eigenvalue `lambda`, the squared
/// deviation decays like `exp(-2 lambda t)` and the returned rate estimates
/// `lambda`. The mean of `f` under the Dirichlet law is subtracted first.
pub fn decay_rate_fit(
    alpha: &AlphaParams,
    f: &Polynomial,
    cfg: &SimConfig,
    law: &X0Law,
    dc: &DecayConfig,
) -> Result<DecayFit> {
    cfg.validate()?;
    law.check(alpha)?;
    if f.is_constant() {
        return Err(Error::Degenerate("decay rate of a constant function".into()));
    }
    if dc.outer < 2 || dc.inner < 2 {
        return Err(Error::input("decay fit needs at least 2 outer groups and 2 inner paths"));
    }
    if !(dc.drop_fraction > 0.0 && dc.drop_fraction < 1.0) {
        return Err(Error::input(format!("drop_fraction must lie in (0, 1), got {}", dc.drop_fraction)));
    }
    let centered = f - &Polynomial::constant(f.nvars(), integrate(alpha, f)?);
    let times = cfg.record_times();
    let ntimes = times.len();
    let stationary = matches!(law, X0Law::Stationary);

    let groups: Vec<(Vec<f64>, Vec<f64>)> = (0..dc.outer)
        .into_par_iter()
        .map(|o| -> Result<(Vec<f64>, Vec<f64>)> {
            let x0 = law.draw(alpha, cfg.seed, o as u64);
            let mut s1 = vec![0.0; ntimes];
            let mut s2 = vec![0.0; ntimes];
            for i in 0..dc.inner {
                let stream = (o * dc.inner + i) as u64;
                let mut ti = 0;
                run_path(&x0, alpha, cfg, &mut stream_rng(cfg.seed, stream), |_, x| {
                    let v = centered.evaluate(x);
                    s1[ti] += v;
                    s2[ti] += v * v;
                    ti += 1;
                })?;
            }
            let n = dc.inner as f64;
            let means: Vec<f64> = s1.iter().map(|s| s / n).collect();
            let vars = s2
                .iter()
                .zip(&means)
                .map(|(q, m)| ((q - n * m * m) / (n - 1.0)).max(0.0))
                .collect();
            Ok((means, vars))
        })
        .collect::<Result<_>>()?;
    let (means, vars) = groups.into_iter().unzip();
    let gm = GroupMoments { means, vars };

    let all: Vec<usize> = (0..dc.outer).collect();
    let s = squared_deviation(&gm, &all, dc.inner, stationary);
    let first = times.iter().position(|&t| t >= dc.t_start - 1e-12).ok_or_else(|| {
        Error::input(format!("t_start {} is beyond the horizon {}", dc.t_start, cfg.horizon))
    })?;
    let last = window_end(&s, first, dc.drop_fraction);
    if last <= first {
        return Err(Error::Inconclusive("fit window holds fewer than two points".into()));
    }
    let curve: Vec<(f64, f64)> = times[first..=last]
        .iter()
        .copied()
        .zip(s[first..=last].iter().copied())
        .collect();
    let slope = log_slope(&times[first..=last], &s[first..=last]);
    let mut inconclusive = slope.is_none();
    // the Euler scheme contracts a linear eigenfunction by exactly (1 - lambda dt)
    // per step, so the raw log rate is converted back to continuous time
    let continuous = |b: f64| -(b / 2.0 * cfg.dt).exp_m1() / cfg.dt;
    let rate = slope.map_or(f64::NAN, continuous);

    // each replicate repeats the whole procedure, window choice included
    let mut rng = stream_rng(derive_seed(cfg.seed, BOOTSTRAP_PURPOSE), 0);
    let mut boot = Vec::with_capacity(dc.bootstrap);
    let mut failed = 0;
    for _ in 0..dc.bootstrap {
        let pick: Vec<usize> = (0..dc.outer).map(|_| *all.choose(&mut rng).expect("nonempty")).collect();
        let sb = squared_deviation(&gm, &pick, dc.inner, stationary);
        let lb = window_end(&sb, first, dc.drop_fraction);
        match (lb > first).then(|| log_slope(&times[first..=lb], &sb[first..=lb])).flatten() {
            Some(b) => boot.push(continuous(b)),
            None => failed += 1,
        }
    }
    if failed * 10 > dc.bootstrap {
        inconclusive = true;
    }
    let (stderr, ci) = if boot.len() >= 2 {
        let m = boot.iter().sum::<f64>() / boot.len() as f64;
        let sd = (boot.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt();
        boot.sort_by(f64::total_cmp);
        (sd, (quantile(&boot, 0.025), quantile(&boot, 0.975)))
    } else {
        (f64::NAN, (f64::NAN, f64::NAN))
    };
    Ok(DecayFit {
        rate,
        stderr,
        ci,
        window: (times[first], times[last]),
        dt: cfg.dt,
        paths: dc.outer * dc.inner,
        inconclusive,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::MultiIndex;
    use crate::simplex::monomial_expectation;

    fn alpha(v: &[f64]) -> AlphaParams {
        AlphaParams::from_full(v).unwrap()
    }

    #[test]
    fn step_on_the_top_face_is_pure_drift() {
        let a = alpha(&[0.7, 1.3, 2.1]);
        let x = SimplexPoint::new(vec![0.25, 0.75]).unwrap();
        let y = em_step(&x, &a, 0.01, &[3.0, -2.0], BoundaryPolicy::Clamp).unwrap();
        assert!((y.coords()[0] - (0.25 - 0.021 * 0.25)).abs() < 1e-15);
        assert!((y.coords()[1] - (0.75 - 0.021 * 0.75)).abs() < 1e-15);
    }

    #[test]
    fn step_on_a_coordinate_face_pushes_inward() {
        let a = alpha(&[0.7, 1.3, 2.1]);
        let x = SimplexPoint::new(vec![0.0, 0.5]).unwrap();
        let y = em_step(&x, &a, 0.01, &[5.0, 0.0], BoundaryPolicy::Clamp).unwrap();
        assert!((y.coords()[0] - 0.7 * 0.5 * 0.01).abs() < 1e-15);
    }

    #[test]
    fn drift_fixed_point_is_the_mean() {
        let a = alpha(&[0.7, 1.3, 2.1]);
        let m = SimplexPoint::mean_of(&a);
        let y = em_step(&m, &a, 0.1, &[0.0, 0.0], BoundaryPolicy::Clamp).unwrap();
        for (u, v) in y.coords().iter().zip(m.coords()) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_policies_keep_points_in_the_simplex() {
        let a = alpha(&[0.2, 0.3, 0.1]);
        for policy in [BoundaryPolicy::Clamp, BoundaryPolicy::Reflect] {
            let x = SimplexPoint::new(vec![0.001, 0.998]).unwrap();
            let y = em_step(&x, &a, 0.5, &[-4.0, 4.0], policy).unwrap();
            assert!(y.coords().iter().all(|&c| c >= 0.0));
            assert!(y.coords().iter().sum::<f64>() <= 1.0);
        }
    }

    #[test]
    fn zero_horizon_keeps_only_the_start() {
        let a = alpha(&[1.0, 1.0, 1.0]);
        let x0 = SimplexPoint::new(vec![0.2, 0.3]).unwrap();
        let cfg = SimConfig::new(1e-3, 0.0, 1, 5).unwrap();
        let tr = simulate(&x0, &a, &cfg).unwrap();
        assert_eq!(tr.times, vec![0.0]);
        assert_eq!(tr.states, vec![x0]);
    }

    #[test]
    fn recording_grid_and_determinism() {
        let a = alpha(&[0.5, 0.8, 1.2]);
        let x0 = SimplexPoint::new(vec![0.2, 0.3]).unwrap();
        let cfg = SimConfig::new(0.01, 1.005, 1, 5).unwrap().with_stride(10).unwrap();
        let tr = simulate(&x0, &a, &cfg).unwrap();
        assert_eq!(cfg.steps(), 101);
        assert_eq!(tr.times.len(), 12);
        assert_eq!(*tr.times.last().unwrap(), 1.005);
        assert!(tr.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(tr, simulate(&x0, &a, &cfg).unwrap());
        for s in &tr.states {
            assert!(s.coords().iter().all(|&c| c >= 0.0) && s.coords().iter().sum::<f64>() <= 1.0);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0, 1.0, 1, 0).is_err());
        assert!(SimConfig::new(2.0, 1.0, 1, 0).is_err());
        assert!(SimConfig::new(0.1, 1.0, 0, 0).is_err());
        assert!(SimConfig::new(0.1, 1.0, 1, 0).unwrap().with_stride(0).is_err());
        let a = alpha(&[3.0, 4.0, 5.0]);
        assert_eq!(SimConfig::default_dt(&a), 1e-3 / 12.0);
    }

    #[test]
    fn stationary_start_stays_stationary() {
        let a = alpha(&[0.7, 1.3, 2.1]);
        let cfg = SimConfig::new(1e-3, 0.5, 4000, 17).unwrap().with_stride(100).unwrap();
        let obs = [Polynomial::variable(2, 0)];
        let st = ensemble_stats(&X0Law::Stationary, &a, &cfg, &obs).unwrap();
        let target = monomial_expectation(&a, &MultiIndex::unit(2, 0)).unwrap();
        for t in 0..st.times.len() {
            assert!((st.means[t][0] - target).abs() < 4.0 * st.std_errors[t][0]);
        }
        let again = ensemble_stats(&X0Law::Stationary, &a, &cfg, &obs).unwrap();
        assert_eq!(st, again);
    }

    #[test]
    fn halving_dt_moves_first_moments_within_noise() {
        let a = alpha(&[0.7, 1.3, 2.1]);
        let x0 = X0Law::Point(SimplexPoint::new(vec![0.6, 0.1]).unwrap());
        let obs = [Polynomial::variable(2, 0), Polynomial::variable(2, 1)];
        let coarse = SimConfig::new(2e-3, 1.0, 4000, 23).unwrap();
        let fine = SimConfig { dt: 1e-3, ..coarse.clone() };
        let c = ensemble_stats(&x0, &a, &coarse, &obs).unwrap();
        let f = ensemble_stats(&x0, &a, &fine, &obs).unwrap();
        let (tc, tf) = (c.times.len() - 1, f.times.len() - 1);
        for j in 0..2 {
            let se = (c.std_errors[tc][j].powi(2) + f.std_errors[tf][j].powi(2)).sqrt();
            assert!((c.means[tc][j] - f.means[tf][j]).abs() < 2.0 * se);
        }
    }

    #[test]
    fn decay_rejects_constants() {
        let a = alpha(&[0.7, 1.3, 2.1]);
        let cfg = SimConfig::new(1e-3, 0.1, 1, 1).unwrap();
        let r = decay_rate_fit(
            &a,
            &Polynomial::constant(2, 1.0),
            &cfg,
            &X0Law::Stationary,
            &DecayConfig::default(),
        );
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn log_slope_of_an_exponential() {
        let t: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let s: Vec<f64> = t.iter().map(|t| 3.0 * (-1.7 * t).exp()).collect();
        assert!((log_slope(&t, &s).unwrap() + 1.7).abs() < 1e-12);
        assert!(log_slope(&t, &[1.0, -1.0]).is_none());
    }
}
