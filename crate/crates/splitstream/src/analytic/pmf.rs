//! Probability-mass kernels shared by the conditional closed forms.
//!
//! Everything is tuned for the shapes that occur here: Poisson indices and
//! binomial successes below the split threshold `D` (single digits), trial
//! counts up to millions, and success probabilities that decay
//! geometrically to zero along a path. The small-probability branches avoid
//! the `1 - (1 - p)^m` style cancellations that would otherwise be
//! amplified by the `1/pi_k` weights.

/// `pmf[j] = mu^j e^{-mu} / j!` for `j = 0..len`.
pub fn poisson_pmf_table(mu: f64, len: usize) -> Vec<f64> {
    let mut table = vec![0.0; len];
    if len == 0 {
        return table;
    }
    table[0] = (-mu).exp();
    for j in 1..len {
        table[j] = table[j - 1] * mu / j as f64;
    }
    table
}

/// Binomial coefficient for small upper index.
pub fn choose_small(m: u64, j: u64) -> f64 {
    if j > m {
        return 0.0;
    }
    let j = j.min(m - j);
    let mut acc = 1.0;
    for t in 0..j {
        acc = acc * (m - t) as f64 / (t + 1) as f64;
    }
    acc
}

/// `(1 - (1 - p)^m) / p` evaluated without cancellation; equals
/// `sum_{j=1}^{m} (-1)^{j+1} C(m, j) p^{j-1}` and tends to `m` as `p -> 0`.
pub fn one_minus_qpow_over_p(m: u64, p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    let mut acc = 0.0;
    let mut coeff_sign = 1.0;
    let mut p_pow = 1.0;
    for j in 1..=m {
        acc += coeff_sign * choose_small(m, j) * p_pow;
        coeff_sign = -coeff_sign;
        p_pow *= p;
    }
    acc
}

/// Same quantity for a large exponent `n`: `(1 - (1 - p)^n) / p` via
/// `-expm1(n ln1p(-p)) / p`; tends to `n` as `p -> 0` and to `1/p` for
/// `n p` large.
pub fn coverage_over_p(n: u64, p: f64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return n as f64;
    }
    -f64::exp_m1(n as f64 * f64::ln_1p(-p)) / p
}

/// `P(Binomial(n, p) >= r)` for small `r`, stable across the whole range
/// of `n p`.
///
/// For `n p <= 25` the upper tail is summed directly from `j = r` (all
/// terms positive, full relative precision even when the tail underflows
/// toward zero). Otherwise the lower tail `j < r` is tiny and
/// `1 - sum_{j<r}` costs at most one ulp of cancellation.
pub fn binom_tail_at_least(n: u64, p: f64, r: u64) -> f64 {
    if r == 0 {
        return 1.0;
    }
    if r > n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let mean = n as f64 * p;
    if mean <= 25.0 {
        // Upward sum from the first tail term.
        let mut term = binom_pmf_log_route(n, p, r);
        if term == 0.0 {
            return 0.0;
        }
        let mut acc = term;
        let mut j = r;
        let odds = p / (1.0 - p);
        while j < n {
            term *= (n - j) as f64 / (j + 1) as f64 * odds;
            acc += term;
            j += 1;
            if term < acc * 1e-17 && (j as f64) > mean {
                break;
            }
        }
        acc.min(1.0)
    } else {
        let mut below = 0.0;
        for j in 0..r {
            below += binom_pmf_log_route(n, p, j);
        }
        (1.0 - below).clamp(0.0, 1.0)
    }
}

/// `C(n, j) p^j (1-p)^{n-j}` through logs (safe for huge `n`, small `j`).
fn binom_pmf_log_route(n: u64, p: f64, j: u64) -> f64 {
    let mut log_choose = 0.0;
    for t in 0..j {
        log_choose += ((n - t) as f64 / (t + 1) as f64).ln();
    }
    let log_pmf = log_choose + j as f64 * p.ln() + (n - j) as f64 * f64::ln_1p(-p);
    log_pmf.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom_pmf_direct(n: u64, p: f64, j: u64) -> f64 {
        choose_small(n, j) * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32)
    }

    #[test]
    fn poisson_table_sums_to_one() {
        for &mu in &[0.0, 0.3, 2.0, 7.5] {
            let t = poisson_pmf_table(mu, 60);
            let s: f64 = t.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "mu = {mu}, sum = {s}");
        }
        let t = poisson_pmf_table(0.0, 3);
        assert_eq!(t, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn tail_matches_brute_force() {
        for &(n, p) in &[(10u64, 0.3), (25, 0.9), (7, 0.01), (40, 0.5)] {
            for r in 0..=5u64 {
                let brute: f64 = (r..=n).map(|j| binom_pmf_direct(n, p, j)).sum();
                let got = binom_tail_at_least(n, p, r);
                assert!(
                    (got - brute).abs() < 1e-12,
                    "n={n} p={p} r={r}: {got} vs {brute}"
                );
            }
        }
    }

    #[test]
    fn tail_small_p_has_relative_precision() {
        // P(Bin(n, p) >= 2) ~ C(n,2) p^2 for n p << 1.
        let n = 1u64 << 16;
        let p = 1e-9;
        let got = binom_tail_at_least(n, p, 2);
        let approx = choose_small(n, 2) * p * p;
        assert!((got / approx - 1.0).abs() < 1e-3, "{got} vs {approx}");
    }

    #[test]
    fn tail_extremes() {
        assert_eq!(binom_tail_at_least(5, 1.0, 3), 1.0);
        assert_eq!(binom_tail_at_least(5, 0.5, 0), 1.0);
        assert_eq!(binom_tail_at_least(5, 0.5, 6), 0.0);
        assert!((binom_tail_at_least(2, 0.5, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn coverage_limits() {
        // Small n p: ~ n. Large n p: ~ 1/p.
        assert!((coverage_over_p(1000, 1e-12) - 1000.0).abs() < 1e-6);
        assert!((coverage_over_p(1 << 20, 0.5) - 2.0).abs() < 1e-9);
        assert_eq!(coverage_over_p(10, 1.0), 1.0);
        // Exact small case: (1 - 0.5^2) / 0.5 = 1.5.
        assert!((coverage_over_p(2, 0.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn qpow_polynomial_matches_direct() {
        for &m in &[1u64, 2, 3, 5] {
            for &p in &[1e-14f64, 0.25, 0.9, 1.0] {
                let direct = if p > 1e-8 {
                    (1.0 - (1.0 - p).powi(m as i32)) / p
                } else {
                    m as f64
                };
                let got = one_minus_qpow_over_p(m, p);
                assert!(
                    (got - direct).abs() < 1e-9 * m as f64,
                    "m={m} p={p}: {got} vs {direct}"
                );
            }
        }
    }
}
