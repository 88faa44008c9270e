//! Ensemble drivers for conditional Monte Carlo.
//!
//! Expectations are taken over sampled weight paths (or stationary samples)
//! of a vector-valued statistic whose value is a closed form given the
//! path. Sample `i` draws its generator from `(seed, stream, i)` and chunk
//! partials merge in index order, so results depend on the seed alone, not
//! on thread count. Single-atom measures have a deterministic path: one
//! exact evaluation, zero standard error.

use crate::arprocess::{sample_path, StationarySampler, WeightPath};
use crate::rng::{self, STREAM_PATH};
use crate::splitting::SplittingMeasure;
use crate::stats::RunningMoments;
use rayon::prelude::*;

const CHUNK: u64 = 512;

fn reduce_chunks<G>(n: u64, dim: usize, chunk_eval: G) -> (Vec<f64>, Vec<f64>)
where
    G: Fn(u64, u64, &mut [RunningMoments]) + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<Vec<RunningMoments>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(n);
            let mut acc = vec![RunningMoments::new(); dim];
            chunk_eval(lo, hi, &mut acc);
            acc
        })
        .collect();
    let mut total = vec![RunningMoments::new(); dim];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t = RunningMoments::merge(*t, p);
        }
    }
    (
        total.iter().map(|m| m.mean()).collect(),
        total.iter().map(|m| m.std_error()).collect(),
    )
}

/// Mean and standard error of a path statistic of dimension `dim`.
pub fn path_expectation<F>(
    m: &SplittingMeasure,
    depth: usize,
    n_paths: u64,
    seed: u64,
    dim: usize,
    eval: F,
) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(&WeightPath, &mut [f64]) + Sync,
{
    if m.is_deterministic() {
        let w = m.atoms()[0].w;
        let path = sample_path(m, depth, &mut rng::from_seed(0));
        debug_assert!(path.weights.iter().all(|&x| x == w));
        let mut out = vec![0.0; dim];
        eval(&path, &mut out);
        return (out, vec![0.0; dim]);
    }
    reduce_chunks(n_paths, dim, |lo, hi, acc| {
        let mut scratch = vec![0.0f64; dim];
        for i in lo..hi {
            let mut r = rng::derive(seed, STREAM_PATH, i);
            let path = sample_path(m, depth, &mut r);
            scratch.iter_mut().for_each(|v| *v = 0.0);
            eval(&path, &mut scratch);
            for (a, &v) in acc.iter_mut().zip(&scratch) {
                a.push(v);
            }
        }
    })
}

/// Mean and standard error of a statistic of the stationary limit.
///
/// `stream` selects the sample stream; use distinct streams for estimates
/// that must stay independent (for instance residual diagnostics).
pub fn stationary_expectation<F>(
    m: &SplittingMeasure,
    tol: f64,
    n_samples: u64,
    seed: u64,
    stream: u64,
    dim: usize,
    eval: F,
) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    let sampler = StationarySampler::new(m.clone(), tol);
    if let Some(x) = sampler.deterministic_value() {
        let mut out = vec![0.0; dim];
        eval(x, &mut out);
        return (out, vec![0.0; dim]);
    }
    reduce_chunks(n_samples, dim, |lo, hi, acc| {
        let mut scratch = vec![0.0f64; dim];
        for i in lo..hi {
            let mut r = rng::derive(seed, stream, i);
            let x = sampler.sample(&mut r);
            scratch.iter_mut().for_each(|v| *v = 0.0);
            eval(x, &mut scratch);
            for (a, &v) in acc.iter_mut().zip(&scratch) {
                a.push(v);
            }
        }
    })
}
