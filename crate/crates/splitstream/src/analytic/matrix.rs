//! The `(D+1) x (D+1)` stability matrix, its determinant, the solved
//! constant vector and the critical arrival rate.
//!
//! Rows `1..D-1` encode the boundary sizes `E(R_m) = 1`, row `D` the
//! stationarity identity `E phi_{dC}(lam X_inf) = 0`, and row `D+1` the
//! normalization obtained by evaluating the transform at `lam`. The raw
//! per-depth terms of the boundary and normalization rows converge to
//! nonzero multiples (`m`, respectively `lam`) of the stationarity row, so
//! the printed series diverge entry by entry. With `regularize` on, each
//! depth term is shifted by that multiple of row `D`; since row `D` has a
//! zero right-hand side, the solution and the determinant's zero set are
//! unchanged while every entry becomes a convergent series.

use super::paths::{path_expectation, stationary_expectation};
use super::pmf::{choose_small, one_minus_qpow_over_p, poisson_pmf_table};
use super::series::mean_tree_size;
use super::{Constants, Residuals, SeriesParams};
use crate::error::Error;
use crate::rng::{STREAM_RESIDUAL, STREAM_XINF};
use crate::splitting::SplittingMeasure;
use crate::Result;
use serde::Serialize;

/// Assembled stability matrix with per-entry Monte Carlo standard errors.
///
/// Rows are indexed `1..=D+1` and columns `0..=D` as in the defining linear
/// system; `entries[r][c]` holds row `r+1`, column `c`. Standard errors are
/// conditional on the stationary-row estimate the regularization shifts
/// reuse (shifting rows by multiples of row `D` cannot move the solution,
/// so that shared error does not propagate to the constants).
#[derive(Debug, Clone, Serialize)]
pub struct StabilityMatrix {
    pub entries: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
    pub lam: f64,
    pub d: u64,
    pub regularized: bool,
    /// Set when some entry's standard error exceeds 10% of its magnitude:
    /// estimates are too noisy for a trustworthy solve.
    pub ill_conditioned: bool,
    #[serde(skip)]
    pub(crate) measure: SplittingMeasure,
    pub(crate) params: SeriesParams,
}

/// Stationarity row `ell -> E[pois(ell-1; lam X_inf) - pois(ell; lam X_inf)]`
/// for `ell = 0..D-1`, with standard errors (zero when the stationary value
/// is deterministic).
pub fn stationary_row(
    m: &SplittingMeasure,
    lam: f64,
    d: u64,
    p: &SeriesParams,
) -> (Vec<f64>, Vec<f64>) {
    let dim = d as usize;
    stationary_expectation(
        m,
        p.xinf_tol,
        p.mc_paths,
        p.seed,
        STREAM_XINF,
        dim,
        |x, out| {
            let table = poisson_pmf_table(lam * x, dim);
            for ell in 0..dim {
                let prev = if ell == 0 { 0.0 } else { table[ell - 1] };
                out[ell] = prev - table[ell];
            }
        },
    )
}

/// Assemble the full matrix for `(measure, lam, D)`.
pub fn assemble_matrix(
    m: &SplittingMeasure,
    lam: f64,
    d: u64,
    p: &SeriesParams,
) -> StabilityMatrix {
    assert!(lam >= 0.0);
    assert!(d >= 1);
    let dim = d as usize;
    let (rowd, rowd_err) = stationary_row(m, lam, d, p);
    let depth = p.k_max;

    // Path statistic: boundary rows (m = 1..D-1) x columns (0..D-1), then
    // the normalization row's columns 0..D-1.
    let n_boundary = (dim - 1) * dim;
    let stat_dim = n_boundary + dim;
    let (vals, errs) = path_expectation(m, depth, p.mc_paths, p.seed, stat_dim, |path, out| {
        for k in 0..=depth {
            let pi = path.pi[k];
            let x = path.x[k];
            let mu = lam * x;
            let table = poisson_pmf_table(mu, dim);
            let exp_mu = (-mu).exp();
            let em1 = -f64::exp_m1(-lam * pi) / pi;
            // Boundary rows.
            for row_m in 1..dim {
                let g = one_minus_qpow_over_p(row_m as u64, pi);
                let base = (row_m - 1) * dim;
                for ell in 0..dim {
                    let mut term = table[ell] * g;
                    let j_max = ell.min(row_m);
                    let mut pi_pow = 1.0; // pi^{j-1}
                    for j in 1..=j_max {
                        let b = choose_small(row_m as u64, j as u64)
                            * pi_pow
                            * (1.0 - pi).powi((row_m - j) as i32);
                        term -= b * table[ell - j];
                        pi_pow *= pi;
                    }
                    if p.regularize {
                        term += row_m as f64 * rowd[ell];
                    }
                    out[base + ell] += term;
                }
            }
            // Normalization row: depth terms of
            // (1/pi) (lam x)^l/l! e^{-lam x} - (lam(pi+x))^l/l! e^{-lam(pi+x)}
            // rearranged so nothing cancels as pi -> 0.
            let decay = (-lam * pi).exp();
            let mut lam_pow_fact = 1.0; // lam^l / l!
            for ell in 0..dim {
                let term = if ell == 0 {
                    em1 * exp_mu
                } else {
                    // (pi + x)^l - x^l expanded; divided by pi.
                    let mut poly = 0.0;
                    let mut pi_pow = 1.0;
                    for j in 1..=ell {
                        poly += choose_small(ell as u64, j as u64) * pi_pow * x.powi((ell - j) as i32);
                        pi_pow *= pi;
                    }
                    lam_pow_fact * exp_mu * (x.powi(ell as i32) * em1 - poly * decay)
                };
                let term = if p.regularize {
                    term + lam * rowd[ell]
                } else {
                    term
                };
                out[n_boundary + ell] += term;
                lam_pow_fact *= lam / (ell + 1) as f64;
            }
        }
    });

    let mean_g = m.mean_g();
    let mut entries = vec![vec![0.0; dim + 1]; dim + 1];
    let mut std_errors = vec![vec![0.0; dim + 1]; dim + 1];
    for row_m in 1..dim {
        let base = (row_m - 1) * dim;
        for ell in 0..dim {
            entries[row_m - 1][ell] = vals[base + ell];
            std_errors[row_m - 1][ell] = errs[base + ell];
        }
        entries[row_m - 1][dim] = row_m as f64;
    }
    for ell in 0..dim {
        entries[dim - 1][ell] = rowd[ell];
        std_errors[dim - 1][ell] = rowd_err[ell];
    }
    entries[dim - 1][dim] = 0.0;
    for ell in 0..dim {
        entries[dim][ell] = vals[n_boundary + ell];
        std_errors[dim][ell] = errs[n_boundary + ell];
    }
    entries[dim][0] -= 1.0 / mean_g;
    entries[dim][dim] = lam;

    let max_abs = entries
        .iter()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b.abs()));
    let ill_conditioned = entries.iter().zip(&std_errors).any(|(er, sr)| {
        er.iter()
            .zip(sr)
            .any(|(&e, &s)| e.abs() > 1e-6 * max_abs && s > 0.1 * e.abs())
    });

    StabilityMatrix {
        entries,
        std_errors,
        lam,
        d,
        regularized: p.regularize,
        ill_conditioned,
        measure: m.clone(),
        params: *p,
    }
}

// ---------------------------------------------------------------------------
// Dense linear algebra for the (D+1)-dimensional system. The systems here
// are tiny (D is single digits), so a pivoted textbook elimination is all
// that is needed.

/// LU factorization with partial pivoting; returns (packed LU, pivots,
/// sign) or `None` on exact singularity.
fn lu_decompose(a: &[Vec<f64>]) -> Option<(Vec<Vec<f64>>, Vec<usize>, f64)> {
    let n = a.len();
    let mut lu: Vec<Vec<f64>> = a.to_vec();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for col in 0..n {
        let (best, best_val) = (col..n)
            .map(|r| (r, lu[r][col].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if best_val == 0.0 {
            return None;
        }
        if best != col {
            lu.swap(best, col);
            piv.swap(best, col);
            sign = -sign;
        }
        for r in col + 1..n {
            let f = lu[r][col] / lu[col][col];
            lu[r][col] = f;
            for c in col + 1..n {
                lu[r][c] -= f * lu[col][c];
            }
        }
    }
    Some((lu, piv, sign))
}

fn lu_solve(lu: &[Vec<f64>], piv: &[usize], b: &[f64]) -> Vec<f64> {
    let n = lu.len();
    let mut x: Vec<f64> = piv.iter().map(|&p| b[p]).collect();
    for r in 1..n {
        for c in 0..r {
            x[r] -= lu[r][c] * x[c];
        }
    }
    for r in (0..n).rev() {
        for c in r + 1..n {
            x[r] -= lu[r][c] * x[c];
        }
        x[r] /= lu[r][r];
    }
    x
}

/// Determinant by pivoted elimination.
pub fn det_m(m: &StabilityMatrix) -> f64 {
    match lu_decompose(&m.entries) {
        None => 0.0,
        Some((lu, _, sign)) => sign * (0..lu.len()).map(|i| lu[i][i]).product::<f64>(),
    }
}

fn inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let (lu, piv, _) = lu_decompose(a)?;
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = lu_solve(&lu, &piv, &e);
        for r in 0..n {
            inv[r][col] = x[r];
        }
    }
    Some(inv)
}

/// Solve for the constants `(C_0..C_{D-1}, C_inf)` and fill the residual
/// diagnostics.
///
/// Errors with [`Error::SingularNearLambdaC`] when `|det|` falls below ten
/// times its propagated standard error (plus a floating-point floor): the
/// requested rate is too close to the critical rate for the estimated
/// system to be trusted.
pub fn solve_constants(matrix: &StabilityMatrix) -> Result<Constants> {
    let n = matrix.entries.len();
    let dim = n - 1;
    let det = det_m(matrix);

    // Propagate entry errors to the determinant through the cofactors.
    let inv = inverse(&matrix.entries);
    let mut det_var = 0.0;
    if let Some(ref inv) = inv {
        for r in 0..n {
            for c in 0..n {
                // cof[r][c] = det * inv[c][r]
                let cof = det * inv[c][r];
                det_var += (cof * matrix.std_errors[r][c]).powi(2);
            }
        }
    }
    let scale = matrix
        .entries
        .iter()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b.abs()));
    let floor = (10.0 * det_var.sqrt()).max(1e-12 * scale.powi(n as i32));
    if det.abs() < floor || inv.is_none() {
        return Err(Error::SingularNearLambdaC {
            det,
            floor,
        });
    }
    let inv = inv.unwrap();

    // M c = -e_{D+1}: the solution is minus the last column of the inverse.
    let c_full: Vec<f64> = (0..n).map(|r| -inv[r][n - 1]).collect();

    // First-order error propagation: dc = -M^{-1} dM c with independent
    // entry perturbations.
    let mut covariance = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for r in 0..n {
                for c in 0..n {
                    let s = matrix.std_errors[r][c];
                    if s > 0.0 {
                        acc += inv[i][r] * inv[j][r] * (s * c_full[c]).powi(2);
                    }
                }
            }
            covariance[i][j] = acc;
        }
    }
    let std_errors: Vec<f64> = (0..n).map(|i| covariance[i][i].sqrt()).collect();

    let mut constants = Constants {
        c: c_full[..dim].to_vec(),
        c_inf: c_full[dim],
        lam: matrix.lam,
        d: matrix.d,
        std_errors,
        covariance,
        residuals: Residuals {
            stationary: 0.0,
            stationary_sigma: 0.0,
            boundary: Vec::new(),
        },
    };

    // Stationarity residual on fresh samples.
    let (res, res_err) = stationary_expectation(
        &matrix.measure,
        matrix.params.xinf_tol,
        matrix.params.mc_paths,
        matrix.params.seed,
        STREAM_RESIDUAL,
        1,
        |x, out| {
            out[0] = constants.phi_delta_c(matrix.lam * x);
        },
    );
    constants.residuals.stationary = res[0];
    constants.residuals.stationary_sigma = res_err[0];

    // Boundary sizes E(R_m) = 1 for m = 1..D-1.
    let boundary_params = SeriesParams {
        seed: matrix.params.seed.wrapping_add(1),
        ..matrix.params
    };
    for m_small in 1..matrix.d {
        let v = mean_tree_size(
            &matrix.measure,
            matrix.lam,
            matrix.d,
            &constants,
            m_small,
            &boundary_params,
        );
        constants.residuals.boundary.push(v.value - 1.0);
    }
    Ok(constants)
}

/// Critical-rate bisection result.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LambdaC {
    pub value: f64,
    /// `max(tol, root jitter across three seeds)`.
    pub uncertainty: f64,
    /// Roots found with the base seed and two rederived seeds.
    pub roots: [f64; 3],
}

/// Locate the smallest root of `lam -> det M_lam` inside `bracket` by
/// bisection with common random numbers: every determinant evaluation
/// reuses the same weight paths and stationary samples, so the bisected
/// function is smooth in `lam`. The root is re-located with two rederived
/// seeds; the reported uncertainty is the larger of `tol` and the spread.
pub fn find_lambda_c(
    m: &SplittingMeasure,
    d: u64,
    p: &SeriesParams,
    bracket: (f64, f64),
    tol: f64,
) -> Result<LambdaC> {
    assert!(tol > 0.0);
    let (lo, hi) = bracket;
    assert!(lo >= 0.0 && hi > lo);

    let bisect = |seed: u64| -> Result<f64> {
        let params = SeriesParams { seed, ..*p };
        let det_at = |lam: f64| det_m(&assemble_matrix(m, lam, d, &params));
        let (mut a, mut b) = (lo, hi);
        let (da, db) = (det_at(a), det_at(b));
        if da == 0.0 {
            return Ok(a);
        }
        if db == 0.0 {
            return Ok(b);
        }
        if da.signum() == db.signum() {
            return Err(Error::NoSignChange {
                lo: a,
                hi: b,
                det_lo: da,
                det_hi: db,
            });
        }
        let mut fa = da;
        for _ in 0..200 {
            if b - a <= tol {
                break;
            }
            let mid = 0.5 * (a + b);
            let fm = det_at(mid);
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };

    let r0 = bisect(p.seed)?;
    let r1 = bisect(p.seed.wrapping_mul(0x9e37_79b9).wrapping_add(1))?;
    let r2 = bisect(p.seed.wrapping_mul(0x9e37_79b9).wrapping_add(2))?;
    let roots = [r0, r1, r2];
    let max = roots.iter().cloned().fold(f64::MIN, f64::max);
    let min = roots.iter().cloned().fold(f64::MAX, f64::min);
    Ok(LambdaC {
        value: r0,
        uncertainty: tol.max((max - min) / 2.0),
        roots,
    })
}
