//! Linear-growth asymptotics of the expected tree size.
//!
//! When `-log W` is nonarithmetic, `E(R_n)/n` converges to a flat slope;
//! when it is arithmetic with span `xi`, the normalized sizes oscillate
//! around that slope with a periodic profile in `log n / xi`. Both regimes
//! share the same building blocks: the renewal constant per order-statistic
//! index `i` and the expectation of the constant differences at a Poisson
//! count driven by the stationary limit.

use super::paths::stationary_expectation;
use super::pmf::poisson_pmf_table;
use super::{Constants, SeriesParams, SlopeVariant};
use crate::error::Error;
use crate::rng::STREAM_XINF;
use crate::splitting::SplittingMeasure;
use crate::Result;
use serde::Serialize;

/// Limit of the renewal series per item count, `prefactor / i`.
pub fn renewal_slope(m: &SplittingMeasure, i: u64, variant: SlopeVariant) -> f64 {
    assert!(i >= 1);
    variant.prefactor(m) / i as f64
}

/// `Q_i(y) = e^{-y} sum_{t<=i} y^t / t!`, the antiderivative kernel of
/// `y^i e^{-y} / i!`.
fn poisson_cdf(i: u64, y: f64) -> f64 {
    if y > 700.0 {
        return 0.0;
    }
    let mut pmf = (-y).exp();
    let mut acc = pmf;
    for t in 1..=i {
        pmf *= y / t as f64;
        acc += pmf;
    }
    acc
}

/// Complement `1 - Q_i(y)` by upward summation; full relative precision
/// for small `y`, where `Q_i` saturates at 1.
fn poisson_tail(i: u64, y: f64) -> f64 {
    let mut pmf = (-y).exp();
    for t in 1..=i + 1 {
        pmf *= y / t as f64;
    }
    let mut acc = pmf;
    let mut t = i + 1;
    while pmf > acc * 1e-18 {
        t += 1;
        pmf *= y / t as f64;
        acc += pmf;
    }
    acc
}

/// Periodic fluctuation profile `F_i(x)`, period 1 in `x`:
/// the integral over `y` of `exp(-xi {x - log y / xi}) y^{i-1} e^{-y} / i!`,
/// times `xi / (1 - e^{-xi})` and the variant prefactor.
///
/// On each band where the fractional part does not wrap, the integrand is
/// `e^{-xi(x-m)} y^i e^{-y} / i!`, so the bands integrate in closed form
/// through the Poisson tail kernel; the band sum is truncated once the
/// terms fall below 1e-16 relative (the bands decay like `e^{-xi i}` on one
/// side and superexponentially on the other).
pub fn periodic_fluctuation(
    m: &SplittingMeasure,
    i: u64,
    x: f64,
    variant: SlopeVariant,
) -> Result<f64> {
    assert!(i >= 1);
    let xi = m.arithmetic_span().ok_or(Error::NotArithmetic)?;
    let pref = variant.prefactor(m);
    // Bands m cover y in (e^{xi(x-m-1)}, e^{xi(x-m)}]; start where the
    // largest band edge is ~60 (the kernel is below 1e-20 beyond). The band
    // integral Q_i(lo) - Q_i(hi) switches to the complementary tails
    // 1 - Q_i once the edges drop below 1: there Q_i saturates at 1 and the
    // growing e^{xi(m-x)} prefactor would amplify the cancellation.
    let m_lo = (x - 60f64.ln() / xi).ceil() as i64;
    let mut acc = 0.0;
    for band in m_lo..m_lo + 100_000 {
        let hi = (xi * (x - band as f64)).exp();
        let lo = (xi * (x - band as f64 - 1.0)).exp();
        let diff = if hi < 1.5 {
            poisson_tail(i, hi) - poisson_tail(i, lo)
        } else {
            poisson_cdf(i, lo) - poisson_cdf(i, hi)
        };
        let term = (-xi * (x - band as f64)).exp() * diff;
        acc += term;
        if band as f64 > x && term.abs() < acc.abs() * 1e-16 {
            break;
        }
    }
    Ok(pref * xi / (-f64::exp_m1(-xi)) * acc)
}

/// Slope descriptor in the arithmetic case: a periodic function of
/// `log n / xi` whose period mean is the flat slope.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicSlope {
    pub c_inf: f64,
    /// Per index `i`, the coefficient `E[dC_{i + N(lam X_inf)}]`.
    pub coefficients: Vec<(u64, f64)>,
    pub span: f64,
    pub variant: SlopeVariant,
    #[serde(skip)]
    measure: SplittingMeasure,
}

impl PeriodicSlope {
    /// Normalized mean size at item count `n`:
    /// `C_inf - sum_i E[dC_{i+N}] F_i(log n / xi)`.
    pub fn at(&self, n: f64) -> f64 {
        let x = n.ln() / self.span;
        let mut acc = self.c_inf;
        for &(i, coef) in &self.coefficients {
            if coef != 0.0 {
                acc -= coef
                    * periodic_fluctuation(&self.measure, i, x, self.variant)
                        .expect("arithmetic by construction");
            }
        }
        acc
    }

    /// Period mean (the flat-slope value).
    pub fn mean(&self) -> f64 {
        let pref = self.variant.prefactor(&self.measure);
        self.c_inf
            - self
                .coefficients
                .iter()
                .map(|&(i, coef)| coef * pref / i as f64)
                .sum::<f64>()
    }
}

/// Linear growth of `E(R_n)/n` below the critical rate.
#[derive(Debug, Clone, Serialize)]
pub enum AsymptoticSlope {
    /// Nonarithmetic: a flat limit.
    Flat(f64),
    /// Arithmetic: a periodic profile of `log n`.
    Periodic(PeriodicSlope),
}

impl AsymptoticSlope {
    /// The flat value (period mean in the arithmetic case).
    pub fn flat_value(&self) -> f64 {
        match self {
            AsymptoticSlope::Flat(v) => *v,
            AsymptoticSlope::Periodic(p) => p.mean(),
        }
    }
}

/// Assemble the growth slope from solved constants:
/// `C_inf - prefactor * sum_{i=1}^{D-1} (1/i) E[dC_{i + N(lam X_inf)}]`,
/// returned as the periodic descriptor when the measure is arithmetic.
pub fn asymptotic_slope(
    m: &SplittingMeasure,
    lam: f64,
    d: u64,
    constants: &Constants,
    variant: SlopeVariant,
    p: &SeriesParams,
) -> AsymptoticSlope {
    let dim = d as usize;
    let dc: Vec<f64> = (0..dim).map(|j| constants.delta_c(j)).collect();
    // E[dC_{i + N}] over the stationary limit, i = 1..D-1 (exact for a
    // deterministic stationary value).
    let n_terms = dim.saturating_sub(1);
    let coefficients: Vec<(u64, f64)> = if n_terms == 0 {
        Vec::new()
    } else {
        let (vals, _) = stationary_expectation(
            m,
            p.xinf_tol,
            p.mc_paths,
            p.seed,
            STREAM_XINF,
            n_terms,
            |x, out| {
                let table = poisson_pmf_table(lam * x, dim);
                for i in 1..dim {
                    let mut acc = 0.0;
                    for j in 0..dim - i {
                        acc += table[j] * dc[i + j];
                    }
                    out[i - 1] = acc;
                }
            },
        );
        (1..dim as u64).zip(vals).collect()
    };
    match m.arithmetic_span() {
        Some(span) => AsymptoticSlope::Periodic(PeriodicSlope {
            c_inf: constants.c_inf,
            coefficients,
            span,
            variant,
            measure: m.clone(),
        }),
        None => {
            let pref = variant.prefactor(m);
            let sum: f64 = coefficients
                .iter()
                .map(|&(i, coef)| coef * pref / i as f64)
                .sum();
            AsymptoticSlope::Flat(constants.c_inf - sum)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::matrix::{assemble_matrix, solve_constants};
    use super::*;

    fn dirac_half() -> SplittingMeasure {
        SplittingMeasure::dirac(0.5).unwrap()
    }

    #[test]
    fn renewal_slope_variants() {
        let m = dirac_half();
        let log2 = 2f64.ln();
        assert!((renewal_slope(&m, 1, SlopeVariant::AsPrinted) - 2.0 / log2).abs() < 1e-12);
        assert!((renewal_slope(&m, 1, SlopeVariant::Corrected) - 1.0 / log2).abs() < 1e-12);
        // 1/i scaling in both variants.
        for v in [SlopeVariant::Corrected, SlopeVariant::AsPrinted] {
            assert!(
                (renewal_slope(&m, 2, v) - renewal_slope(&m, 1, v) / 2.0).abs() < 1e-12
            );
        }
        let m3 = SplittingMeasure::dirac(1.0 / 3.0).unwrap();
        assert!(
            (renewal_slope(&m3, 1, SlopeVariant::Corrected) - 1.0 / 3f64.ln()).abs() < 1e-12
        );
    }

    #[test]
    fn fluctuation_is_periodic() {
        let m = dirac_half();
        for i in 1..=2u64 {
            let a = periodic_fluctuation(&m, i, 0.3, SlopeVariant::Corrected).unwrap();
            let b = periodic_fluctuation(&m, i, 1.3, SlopeVariant::Corrected).unwrap();
            assert!((a - b).abs() < 1e-12, "i = {i}: {a} vs {b}");
        }
    }

    #[test]
    fn fluctuation_mean_equals_renewal_slope() {
        // Trapezoid average over one period (the profile is smooth and
        // periodic, so equispaced averaging converges fast).
        let m = dirac_half();
        for variant in [SlopeVariant::Corrected, SlopeVariant::AsPrinted] {
            for i in 1..=2u64 {
                let grid = 64;
                let mean: f64 = (0..grid)
                    .map(|t| {
                        periodic_fluctuation(&m, i, t as f64 / grid as f64, variant).unwrap()
                    })
                    .sum::<f64>()
                    / grid as f64;
                let expect = renewal_slope(&m, i, variant);
                assert!(
                    (mean - expect).abs() < 1e-9,
                    "i = {i}: mean {mean} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn fluctuation_amplitude_small_but_positive() {
        let m = dirac_half();
        let grid = 128;
        let values: Vec<f64> = (0..grid)
            .map(|t| {
                periodic_fluctuation(&m, 1, t as f64 / grid as f64, SlopeVariant::Corrected)
                    .unwrap()
            })
            .collect();
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        let mean = values.iter().sum::<f64>() / grid as f64;
        assert!(max > min, "profile should genuinely oscillate");
        assert!((max - min) / mean < 0.01, "amplitude {}", (max - min) / mean);
    }

    #[test]
    fn non_arithmetic_measure_is_rejected() {
        let m = SplittingMeasure::from_atoms(vec![
            crate::splitting::Atom { w: 0.3, q: 0.3 },
            crate::splitting::Atom { w: 0.7, q: 0.7 },
        ])
        .unwrap();
        assert!(matches!(
            periodic_fluctuation(&m, 1, 0.1, SlopeVariant::Corrected),
            Err(Error::NotArithmetic)
        ));
    }

    #[test]
    fn static_slope_symmetric_binary() {
        let m = dirac_half();
        let p = SeriesParams::for_measure(&m);
        let c = solve_constants(&assemble_matrix(&m, 0.0, 2, &p)).unwrap();
        let corrected = asymptotic_slope(&m, 0.0, 2, &c, SlopeVariant::Corrected, &p);
        assert!(matches!(corrected, AsymptoticSlope::Periodic(_)));
        let log2 = 2f64.ln();
        assert!(
            (corrected.flat_value() - 2.0 / log2).abs() < 1e-9,
            "corrected {}",
            corrected.flat_value()
        );
        let printed = asymptotic_slope(&m, 0.0, 2, &c, SlopeVariant::AsPrinted, &p);
        assert!((printed.flat_value() - 4.0 / log2).abs() < 1e-9);
    }

    #[test]
    fn static_slope_nonarithmetic_binary() {
        // 0.3/0.7 binary at lam = 0: slope = E(G)/E|log W| (corrected),
        // the entropy rate of the split.
        let m = SplittingMeasure::from_atoms(vec![
            crate::splitting::Atom { w: 0.3, q: 0.3 },
            crate::splitting::Atom { w: 0.7, q: 0.7 },
        ])
        .unwrap();
        let mut p = SeriesParams::for_measure(&m);
        p.mc_paths = 50_000;
        let c = solve_constants(&assemble_matrix(&m, 0.0, 2, &p)).unwrap();
        let slope = asymptotic_slope(&m, 0.0, 2, &c, SlopeVariant::Corrected, &p);
        let entropy = -(0.3f64 * 0.3f64.ln() + 0.7 * 0.7f64.ln());
        match slope {
            AsymptoticSlope::Flat(v) => {
                assert!((v - 2.0 / entropy).abs() < 0.02, "{v} vs {}", 2.0 / entropy)
            }
            _ => panic!("0.3/0.7 is nonarithmetic"),
        }
    }
}
