//! The auto-regressive weight process `X_n = W_n X_{n-1} + 1`, its sampled
//! paths, and the stationary limit `X_inf`.
//!
//! Along a path of i.i.d. weights `(w_1, .., w_K)` three sequences matter:
//! the products `pi_k = w_1 .. w_k`, the forward values `X_k` started from
//! `X_0 = 0`, and the dual partial sums `X*_k = sum_{p<k} pi_p`. The weights
//! are exchangeable, so `X_k` and `X*_k` share a law for every `k`; the dual
//! form is monotone with the deterministic truncation bound
//! `X*_inf - X*_k <= pi_k / (1 - delta)`, which makes it the sampler of
//! choice for the stationary limit.

use crate::error::Error;
use crate::splitting::SplittingMeasure;
use crate::stats::RunningMoments;
use crate::Result;
use rand::Rng;

/// One auto-regressive step `x -> w x + 1`.
#[inline]
pub fn ar_step(x: f64, w: f64) -> f64 {
    w * x + 1.0
}

/// A sampled weight path with products and both process representations.
#[derive(Debug, Clone)]
pub struct WeightPath {
    /// Weights `w_1..w_K`.
    pub weights: Vec<f64>,
    /// Products `pi_0..pi_K` with `pi_0 = 1`.
    pub pi: Vec<f64>,
    /// Forward process `X_0..X_K` with `X_0 = 0`.
    pub x: Vec<f64>,
    /// Dual partial sums `X*_0..X*_K`, `X*_k = sum_{p<k} pi_p`.
    pub x_star: Vec<f64>,
}

impl WeightPath {
    fn from_weights(weights: Vec<f64>) -> Self {
        let k = weights.len();
        let mut pi = Vec::with_capacity(k + 1);
        let mut x = Vec::with_capacity(k + 1);
        let mut x_star = Vec::with_capacity(k + 1);
        pi.push(1.0);
        x.push(0.0);
        x_star.push(0.0);
        for (i, &w) in weights.iter().enumerate() {
            pi.push(pi[i] * w);
            x.push(ar_step(x[i], w));
            x_star.push(x_star[i] + pi[i]);
        }
        Self {
            weights,
            pi,
            x,
            x_star,
        }
    }
}

/// Sample a `K`-step path from the measure.
pub fn sample_path<R: Rng + ?Sized>(m: &SplittingMeasure, k: usize, rng: &mut R) -> WeightPath {
    sample_path_with(|r| m.sample(r), k, rng)
}

/// Sample a path from an arbitrary weight source.
///
/// Degraded mode for measures with a continuous component: downstream
/// conditional closed forms no longer apply atom-by-atom, but path sampling
/// and every Monte Carlo estimator built on it still do.
pub fn sample_path_with<R, F>(mut next_weight: F, k: usize, rng: &mut R) -> WeightPath
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> f64,
{
    let weights = (0..k).map(|_| next_weight(rng)).collect();
    WeightPath::from_weights(weights)
}

/// Sampler for the stationary limit `X_inf = W X_inf + 1` in distribution.
///
/// Returns the dual partial sum at a depth `P` chosen so the deterministic
/// truncation error `delta^P / (1 - delta)` is at most `tol`. Samples lie in
/// `[1, 1/(1 - delta)]`.
#[derive(Debug, Clone)]
pub struct StationarySampler {
    measure: SplittingMeasure,
    tol: f64,
    depth: usize,
}

impl StationarySampler {
    pub fn new(measure: SplittingMeasure, tol: f64) -> Self {
        assert!(tol > 0.0, "tolerance must be positive");
        let delta = measure.delta();
        let mut depth = 1usize;
        let mut tail = delta / (1.0 - delta);
        while tail > tol && depth < 1_000_000 {
            tail *= delta;
            depth += 1;
        }
        Self {
            measure,
            tol,
            depth,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Exact stationary value when the weight is deterministic.
    pub fn deterministic_value(&self) -> Option<f64> {
        if self.measure.is_deterministic() {
            Some(1.0 / (1.0 - self.measure.atoms()[0].w))
        } else {
            None
        }
    }

    /// Draw one stationary sample (`X*_P` of a fresh path).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut pi = 1.0;
        let mut acc = 1.0; // pi_0
        for _ in 1..self.depth {
            pi *= self.measure.sample(rng);
            acc += pi;
        }
        acc
    }
}

/// Monte Carlo estimate of `E exp(-s X_inf)` with its standard error.
///
/// Accumulation runs in fixed chunks merged in index order, so the estimate
/// is a function of the rng stream alone.
pub fn laplace_x_inf<R: Rng + ?Sized>(
    m: &SplittingMeasure,
    s: f64,
    n_samples: u64,
    tol: f64,
    rng: &mut R,
) -> (f64, f64) {
    assert!(s >= 0.0);
    let sampler = StationarySampler::new(m.clone(), tol);
    const CHUNK: u64 = 4096;
    let mut total = RunningMoments::new();
    let mut done = 0u64;
    while done < n_samples {
        let take = CHUNK.min(n_samples - done);
        let mut chunk = RunningMoments::new();
        for _ in 0..take {
            chunk.push((-s * sampler.sample(rng)).exp());
        }
        total = RunningMoments::merge(total, chunk);
        done += take;
    }
    (total.mean(), total.std_error())
}

/// Closed form of `E exp(-lam X_inf)` for the binary measure
/// `W = p delta_p + q delta_q`, `p != 1/2`:
/// `[1 / (1/(1-p) - 1/p)] (exp(-lam/p) - exp(-lam/(1-p))) / lam`.
///
/// The symmetric case `p = 1/2` is a 0/0 limit of this expression; there the
/// stationary value is the constant 2, so callers use `exp(-2 lam)` instead.
pub fn laplace_binary_closed(p: f64, lam: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::NotApplicable(format!("p = {p} outside (0, 1)")));
    }
    if (p - 0.5).abs() < 1e-12 {
        return Err(Error::NotApplicable(
            "p = 1/2: use the constant limit exp(-2 lam)".into(),
        ));
    }
    assert!(lam > 0.0, "lam must be positive");
    let q = 1.0 - p;
    let pref = 1.0 / (1.0 / q - 1.0 / p);
    Ok(pref * ((-lam / p).exp() - (-lam / q).exp()) / lam)
}
