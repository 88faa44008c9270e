//! Series evaluations built on the solved constants: exact expected tree
//! sizes, the renewal (order-statistic) series, and the Poisson transform.
//!
//! Every depth term is a closed form conditional on the sampled weight
//! path: Poisson counts are integrated to finite pmf sums (the constant
//! differences vanish from index `D` on) and the order-statistic events
//! `U^n_(i+1) <= pi_k` become binomial tail probabilities.

use super::paths::path_expectation;
use super::pmf::{binom_tail_at_least, coverage_over_p, poisson_pmf_table};
use super::{Constants, SeriesParams};
use crate::error::Error;
use crate::splitting::SplittingMeasure;
use crate::Result;
use serde::Serialize;

/// A series evaluation with its Monte Carlo error and truncation
/// diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Path Monte Carlo standard error (zero for single-atom measures).
    pub std_error: f64,
    /// Magnitude of the final depth term relative to the value.
    pub tail_fraction: f64,
    /// False when the final depth term exceeds 1e-6 of the running total.
    pub trusted: bool,
}

impl SeriesValue {
    fn from_parts(value: f64, std_error: f64, last_term: f64) -> Self {
        let tail_fraction = if value == 0.0 {
            last_term.abs()
        } else {
            (last_term / value).abs()
        };
        SeriesValue {
            value,
            std_error,
            tail_fraction,
            trusted: tail_fraction <= 1e-6,
        }
    }
}

/// `sum_j coefs[j] y^j e^{-y} / j!` without allocation.
#[inline]
fn phi_sum(coefs: &[f64], y: f64) -> f64 {
    let mut pmf = (-y).exp();
    let mut acc = coefs[0] * pmf;
    for (j, &c) in coefs.iter().enumerate().skip(1) {
        pmf *= y / j as f64;
        acc += c * pmf;
    }
    acc
}

fn delta_coefs(c: &Constants) -> Vec<f64> {
    (0..c.c.len()).map(|j| c.delta_c(j)).collect()
}

/// Exact expected tree size started from `n` items:
/// `1 + n C_inf - sum_{i<D} sum_k E[(1/pi_k) dC_{i+N(lam X_k)} P(U^n_(i+1) <= pi_k)]`.
///
/// The `i = 0` series is included; its depth terms vanish in expectation by
/// the stationarity identity the constants satisfy, at a geometric rate set
/// by the path mixing.
pub fn mean_tree_size(
    m: &SplittingMeasure,
    lam: f64,
    d: u64,
    constants: &Constants,
    n: u64,
    p: &SeriesParams,
) -> SeriesValue {
    let dim = d as usize;
    let dc = delta_coefs(constants);
    let depth = p.depth_for(m, n as f64);
    let (vals, errs) = path_expectation(m, depth, p.mc_paths, p.seed, 2, |path, out| {
        for k in 0..=depth {
            let pi = path.pi[k];
            if pi < 1e-300 {
                break;
            }
            let table = poisson_pmf_table(lam * path.x[k], dim);
            let mut term = 0.0;
            for i in 0..dim {
                // E dC_{i + N} given the path: finite sum, dC_j = 0 from D on.
                let mut dsum = 0.0;
                for j in 0..dim - i {
                    dsum += table[j] * dc[i + j];
                }
                if dsum == 0.0 {
                    continue;
                }
                let factor = if i == 0 {
                    coverage_over_p(n, pi)
                } else {
                    binom_tail_at_least(n, pi, i as u64 + 1) / pi
                };
                term += dsum * factor;
            }
            out[0] += term;
            if k == depth {
                out[1] = term;
            }
        }
    });
    let value = 1.0 + n as f64 * constants.c_inf - vals[0];
    SeriesValue::from_parts(value, errs[0], vals[1])
}

/// The renewal series `E_{i,n} = sum_k E[(1/pi_k) P(U^n_(i+1) <= pi_k)]`,
/// whose `n`-normalized large-`n` behaviour carries the linear growth rate.
/// Exact (one deterministic path) for single-atom measures.
pub fn renewal_series(m: &SplittingMeasure, i: u64, n: u64, p: &SeriesParams) -> SeriesValue {
    if i + 1 > n {
        return SeriesValue {
            value: 0.0,
            std_error: 0.0,
            tail_fraction: 0.0,
            trusted: true,
        };
    }
    let depth = p.depth_for(m, n as f64);
    let (vals, errs) = path_expectation(m, depth, p.mc_paths, p.seed, 2, |path, out| {
        for k in 0..=depth {
            let pi = path.pi[k];
            if pi < 1e-300 {
                break;
            }
            let term = if i == 0 {
                coverage_over_p(n, pi)
            } else {
                binom_tail_at_least(n, pi, i + 1) / pi
            };
            out[0] += term;
            if k == depth {
                out[1] = term;
            }
        }
    });
    SeriesValue::from_parts(vals[0], errs[0], vals[1])
}

/// Poisson transform of the mean sizes at argument `x`:
/// `phi(x) = 1 + x C_inf + sum_k E[(1/pi_k)(phi_C(lam X_k) - phi_C(pi_k x + lam X_k))]`.
pub fn eval_poisson_transform(
    m: &SplittingMeasure,
    lam: f64,
    constants: &Constants,
    x: f64,
    p: &SeriesParams,
) -> SeriesValue {
    assert!(x >= 0.0);
    let c = &constants.c[..];
    let dc = delta_coefs(constants);
    let d2c: Vec<f64> = (0..c.len())
        .map(|j| constants.delta_c(j + 1) - constants.delta_c(j))
        .collect();
    let depth = p.depth_for(m, 1.0 + x);
    let (vals, errs) = path_expectation(m, depth, p.mc_paths, p.seed, 2, |path, out| {
        for k in 0..=depth {
            let pi = path.pi[k];
            if pi < 1e-300 {
                break;
            }
            let y = lam * path.x[k];
            let h = pi * x;
            // (1/pi)(phi_C(y) - phi_C(y + h)) = x (phi_C(y) - phi_C(y+h))/h;
            // switch to the two-term Taylor form once the direct difference
            // would lose more precision than the truncation costs.
            let term = if h > 1e-6 * (1.0 + y) {
                (phi_sum(c, y) - phi_sum(c, y + h)) * x / h
            } else {
                -x * (phi_sum(&dc, y) + 0.5 * h * phi_sum(&d2c, y))
            };
            out[0] += term;
            if k == depth {
                out[1] = term;
            }
        }
    });
    SeriesValue::from_parts(1.0 + x * constants.c_inf + vals[0], errs[0], vals[1])
}

/// Ratio `C_1 / C_0` for the binary law in closed form:
/// `p = 1/2` gives `1 / (1 - 2 lam)` (pole at `lam = 1/2`), otherwise
/// `-(e^{-lam/p} - e^{-lam/q}) / ((lam/p) e^{-lam/p} - (lam/q) e^{-lam/q})`.
pub fn binary_constant_ratio(p: f64, lam: f64) -> Result<f64> {
    assert!(lam > 0.0, "closed form needs lam > 0");
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::NotApplicable(format!("p = {p} outside (0, 1)")));
    }
    if (p - 0.5).abs() < 1e-12 {
        if lam >= 0.5 {
            return Err(Error::Pole { lambda: lam });
        }
        return Ok(1.0 / (1.0 - 2.0 * lam));
    }
    let q = 1.0 - p;
    let (ep, eq) = ((-lam / p).exp(), (-lam / q).exp());
    Ok(-(ep - eq) / (lam / p * ep - lam / q * eq))
}

#[cfg(test)]
mod tests {
    use super::super::matrix::{assemble_matrix, solve_constants};
    use super::*;

    fn static_constants(m: &SplittingMeasure, d: u64, p: &SeriesParams) -> Constants {
        solve_constants(&assemble_matrix(m, 0.0, d, p)).unwrap()
    }

    #[test]
    fn static_mean_size_two_items_is_five() {
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let p = SeriesParams::for_measure(&m);
        let c = static_constants(&m, 2, &p);
        let v = mean_tree_size(&m, 0.0, 2, &c, 2, &p);
        assert!((v.value - 5.0).abs() < 1e-6, "value {}", v.value);
        assert!(v.trusted);
        assert_eq!(v.std_error, 0.0);
    }

    #[test]
    fn mean_size_boundary_and_trivia() {
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let p = SeriesParams::for_measure(&m);
        let c = static_constants(&m, 2, &p);
        // n = 0 and n = 1 are leaves: one node.
        for n in 0..2u64 {
            let v = mean_tree_size(&m, 0.0, 2, &c, n, &p);
            assert!((v.value - 1.0).abs() < 1e-9, "n = {n}: {}", v.value);
        }
    }

    #[test]
    fn renewal_series_order_statistics_edge() {
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let p = SeriesParams::for_measure(&m);
        let v = renewal_series(&m, 5, 3, &p);
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn renewal_series_drives_static_mean_size() {
        // E(R_n) at lam = 0 equals 1 + E(G) E_{D-1, n}.
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let p = SeriesParams::for_measure(&m);
        let c = static_constants(&m, 2, &p);
        for n in [16u64, 256, 4096] {
            let e1 = renewal_series(&m, 1, n, &p);
            let ms = mean_tree_size(&m, 0.0, 2, &c, n, &p);
            let via = 1.0 + 2.0 * e1.value;
            assert!(
                (ms.value - via).abs() < 1e-6 * via,
                "n = {n}: {} vs {via}",
                ms.value
            );
        }
    }

    #[test]
    fn renewal_limit_near_inverse_log_two() {
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let p = SeriesParams::for_measure(&m);
        let n = 1u64 << 16;
        let v = renewal_series(&m, 1, n, &p);
        let ratio = v.value / n as f64;
        assert!(
            (ratio - 1.0 / 2f64.ln()).abs() < 0.01,
            "ratio {ratio} vs {}",
            1.0 / 2f64.ln()
        );
        assert!(v.trusted);
    }

    #[test]
    fn transform_at_zero_is_one() {
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let p = SeriesParams::for_measure(&m);
        let c = static_constants(&m, 2, &p);
        let v = eval_poisson_transform(&m, 0.0, &c, 0.0, &p);
        assert!((v.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transform_satisfies_functional_equation_static() {
        // phi(x) = sum_j (q_j / w_j) phi(w_j x) + 1 - phi_C(x) at lam = 0
        // for the symmetric binary measure: phi(x) = 2 phi(x/2) + 1 - phi_C(x).
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let p = SeriesParams::for_measure(&m);
        let c = static_constants(&m, 2, &p);
        for &x in &[0.5, 2.0, 7.5] {
            let lhs = eval_poisson_transform(&m, 0.0, &c, x, &p).value;
            let inner = 2.0 * eval_poisson_transform(&m, 0.0, &c, 0.5 * x, &p).value;
            let rhs = inner + 1.0 - c.phi_c(x);
            assert!(
                ((lhs - rhs) / lhs).abs() < 1e-8,
                "x = {x}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn transform_grows_at_static_slope() {
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let p = SeriesParams::for_measure(&m);
        let c = static_constants(&m, 2, &p);
        let x = 1024.0 * 64.0;
        let v = eval_poisson_transform(&m, 0.0, &c, x, &p);
        let slope = v.value / x;
        assert!(
            (slope - 2.0 / 2f64.ln()).abs() < 0.01,
            "slope {slope}"
        );
    }

    #[test]
    fn binary_ratio_values() {
        assert!((binary_constant_ratio(0.5, 0.2).unwrap() - 5.0 / 3.0).abs() < 1e-12);
        // p <-> q symmetry.
        let a = binary_constant_ratio(0.3, 0.2).unwrap();
        let b = binary_constant_ratio(0.7, 0.2).unwrap();
        assert!((a - b).abs() < 1e-12);
        // lam -> 0+ limit is 1 (static case has C_1 = C_0).
        assert!((binary_constant_ratio(0.3, 1e-8).unwrap() - 1.0).abs() < 1e-6);
        assert!(matches!(
            binary_constant_ratio(0.5, 0.6),
            Err(Error::Pole { .. })
        ));
    }
}
