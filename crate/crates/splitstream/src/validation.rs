//! Cross-validation battery tying the analytics to the simulators.
//!
//! Each criterion is a self-contained check with pinned tolerances,
//! returning a pass/fail result with the measured numbers; the acceptance
//! test target runs one test per criterion and the CLI `validate`
//! subcommand prints the same battery as a table. Oracle values come from
//! independent routes: the one-step static recurrence, closed forms for
//! binary measures, long-horizon simulation, and direct summation of the
//! renewal series.

use crate::analytic::{
    assemble_matrix, asymptotic_slope, binary_constant_ratio, eval_poisson_transform,
    find_lambda_c, mean_tree_size, periodic_fluctuation, renewal_series, renewal_slope,
    solve_constants, Constants, SeriesParams, SlopeVariant,
};
use crate::arprocess::{laplace_binary_closed, laplace_x_inf};
use crate::error::Error;
use crate::protocol::{estimate_mean_size, hitting_time, ArrivalLaw, Stability};
use crate::rng;
use crate::splitting::{BranchingLaw, SplittingMeasure};
use crate::stats::RunningMoments;
use serde::Serialize;

/// Outcome of one criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One criterion's verdict with its measured values.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: &'static str,
    pub status: Status,
    pub seed: u64,
    pub notes: Vec<String>,
}

impl CriterionResult {
    /// One printable line per criterion.
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        format!("{tag}  {:<26} {}", self.id, self.notes.join("; "))
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Check accumulator: records labelled comparisons and the overall verdict.
struct Checks {
    pass: bool,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            pass: true,
            notes: Vec::new(),
        }
    }

    /// `|value - target| <= bound`.
    fn close(&mut self, label: &str, value: f64, target: f64, bound: f64) {
        let ok = (value - target).abs() <= bound;
        self.pass &= ok;
        self.notes.push(format!(
            "{label}={value:.6} target={target:.6}±{bound:.2e}{}",
            if ok { "" } else { " FAIL" }
        ));
    }

    /// `value <= bound`.
    fn le(&mut self, label: &str, value: f64, bound: f64) {
        let ok = value <= bound;
        self.pass &= ok;
        self.notes.push(format!(
            "{label}={value:.4e}<={bound:.2e}{}",
            if ok { "" } else { " FAIL" }
        ));
    }

    fn is(&mut self, label: &str, ok: bool) {
        self.pass &= ok;
        self.notes
            .push(format!("{label}{}", if ok { "" } else { " FAIL" }));
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    fn result(self, id: &'static str, seed: u64) -> CriterionResult {
        CriterionResult {
            id,
            status: if self.pass { Status::Pass } else { Status::Fail },
            seed,
            notes: self.notes,
        }
    }
}

/// Battery configuration: the seed, the path budget, and an optional
/// experiment-specific law exercised alongside the pinned criteria.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub mc_paths: u64,
    pub experiment: Option<Experiment>,
}

/// An experiment to validate on top of the pinned battery.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub law: BranchingLaw,
    pub d: u64,
    pub arrivals: ArrivalLaw,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            mc_paths: 100_000,
            experiment: None,
        }
    }
}

impl SuiteConfig {
    fn params(&self, m: &SplittingMeasure) -> SeriesParams {
        SeriesParams {
            mc_paths: self.mc_paths,
            seed: self.seed,
            ..SeriesParams::for_measure(m)
        }
    }
}

fn sym_binary_measure() -> SplittingMeasure {
    SplittingMeasure::dirac(0.5).unwrap()
}

fn binary_law(p: f64) -> BranchingLaw {
    BranchingLaw::binary(p).unwrap()
}

fn solve_at(
    m: &SplittingMeasure,
    lam: f64,
    d: u64,
    p: &SeriesParams,
) -> crate::Result<Constants> {
    solve_constants(&assemble_matrix(m, lam, d, p))
}

/// Independent reference implementations used as oracles. They share no
/// code with the series/matrix pipeline they check.
pub mod oracles {
    use crate::protocol::ArrivalLaw;
    use crate::splitting::{BranchingLaw, WeightLaw};

    /// Exact static mean tree sizes `a_0..a_n` from the one-step
    /// recurrence with no arrivals: `a_c = 1` below `D`, and for `n >= D`
    /// `a_n = 1 + E[sum_i a_{c_i}]` with `(c_i)` the multinomial split.
    /// The marginal of component `i` is Binomial(n, v_i), and only the
    /// all-items-in-one-branch outcome refers back to `a_n` itself.
    pub fn static_mean_sizes(law: &BranchingLaw, d: u64, n_max: u64) -> Vec<f64> {
        let n_max = n_max as usize;
        let mut a = vec![1.0f64; n_max + 1];
        // Enumerate (prob, weight vector) pairs of the law.
        let mut components: Vec<(f64, Vec<f64>)> = Vec::new();
        for b in law.branches() {
            match &b.weights {
                WeightLaw::Fixed(v) => components.push((b.prob, v.clone())),
                WeightLaw::Mixture(parts) => {
                    for (p, v) in parts {
                        components.push((b.prob * p, v.clone()));
                    }
                }
            }
        }
        for n in (d as usize)..=n_max {
            let mut below = 0.0; // E sum_i a_{c_i} over outcomes with c_i < n
            let mut self_mass = 0.0; // E #children holding all n items
            for (prob, v) in &components {
                for &w in v {
                    // Binomial(n, w) pmf by upward recurrence.
                    let mut pmf = (1.0 - w).powi(n as i32);
                    for c in 0..n {
                        below += prob * pmf * a[c];
                        pmf *= (n - c) as f64 / (c + 1) as f64 * w / (1.0 - w);
                    }
                    self_mass += prob * pmf; // c = n term
                }
            }
            a[n] = (1.0 + below) / (1.0 - self_mass);
        }
        a
    }

    /// Mean arrival batch size (drift lower bound: each slot serves at
    /// most `D - 1` items, so rates above `D - 1` are always unstable).
    pub fn service_bound_exceeded(arrivals: &ArrivalLaw, d: u64) -> bool {
        arrivals.mean() > (d - 1) as f64
    }
}

/// Criterion 1: exact static value, symmetric binary, `D = 2`, no
/// arrivals — series and simulation both reproduce the recurrence value 5.
pub fn static_exact_value(cfg: &SuiteConfig) -> CriterionResult {
    let m = sym_binary_measure();
    let p = cfg.params(&m);
    let mut ck = Checks::new();

    let oracle = oracles::static_mean_sizes(&binary_law(0.5), 2, 2)[2];
    ck.close("recurrence-oracle", oracle, 5.0, 1e-12);

    match solve_at(&m, 0.0, 2, &p) {
        Ok(c) => {
            let v = mean_tree_size(&m, 0.0, 2, &c, 2, &p);
            ck.close("series(n=2)", v.value, 5.0, 0.05);
        }
        Err(e) => ck.is(&format!("solve failed: {e}"), false),
    }
    let sim = estimate_mean_size(
        2,
        2,
        &ArrivalLaw::None,
        &binary_law(0.5),
        1_000_000,
        10_000,
        cfg.seed,
    );
    ck.close("sim(n=2)", sim.mean, 5.0, 3.0 * sim.std_error);
    ck.result("static-exact-value", cfg.seed)
}

/// Criterion 2: at `lam = 0` the constants are `C_j = E(G)` and
/// `C_inf = 0` — exact for single-atom measures, within 3 sigma for the
/// two-atom binary.
pub fn static_constants(cfg: &SuiteConfig) -> CriterionResult {
    let mut ck = Checks::new();
    let cases: Vec<(&str, SplittingMeasure, u64, f64)> = vec![
        ("w=1/2,d=2", sym_binary_measure(), 2, 1e-6),
        ("w=1/3,d=3", SplittingMeasure::dirac(1.0 / 3.0).unwrap(), 3, 1e-6),
    ];
    for (label, m, d, tol) in cases {
        let p = cfg.params(&m);
        match solve_at(&m, 0.0, d, &p) {
            Ok(c) => {
                let eg = m.mean_g();
                for (j, &cj) in c.c.iter().enumerate() {
                    ck.close(&format!("{label}:C{j}"), cj, eg, tol);
                }
                ck.le(&format!("{label}:|C_inf|"), c.c_inf.abs(), tol);
            }
            Err(e) => ck.is(&format!("{label}: solve failed: {e}"), false),
        }
    }
    // Two-atom measure: Monte Carlo, 3 sigma from propagated errors.
    let m = binary_law(0.3).splitting_measure().unwrap();
    let p = cfg.params(&m);
    match solve_at(&m, 0.0, 2, &p) {
        Ok(c) => {
            let eg = m.mean_g();
            for (j, &cj) in c.c.iter().enumerate() {
                let tol = (3.0 * c.std_errors[j]).max(1e-9);
                ck.close(&format!("w=.3/.7:C{j}"), cj, eg, tol);
            }
            ck.le(
                "w=.3/.7:|C_inf|",
                c.c_inf.abs(),
                (3.0 * c.std_errors[2]).max(1e-9),
            );
        }
        Err(e) => ck.is(&format!("w=.3/.7: solve failed: {e}"), false),
    }
    ck.result("static-constants", cfg.seed)
}

/// Criterion 3: three routes to the static slope agree pairwise within 3%
/// (simulation at n = 4096, series slope across a dyadic step, assembled
/// asymptotic slope); the uncorrected prefactor variant must fail that
/// agreement.
pub fn static_slope_routes(cfg: &SuiteConfig) -> CriterionResult {
    let m = sym_binary_measure();
    let p = cfg.params(&m);
    let mut ck = Checks::new();
    let c = match solve_at(&m, 0.0, 2, &p) {
        Ok(c) => c,
        Err(e) => {
            let mut ck = Checks::new();
            ck.is(&format!("solve failed: {e}"), false);
            return ck.result("static-slope-routes", cfg.seed);
        }
    };

    let sim = estimate_mean_size(
        4096,
        2,
        &ArrivalLaw::None,
        &binary_law(0.5),
        10_000,
        100_000_000,
        cfg.seed,
    );
    let route_a = sim.mean / 4096.0;
    let lo = mean_tree_size(&m, 0.0, 2, &c, 1 << 12, &p).value;
    let hi = mean_tree_size(&m, 0.0, 2, &c, 1 << 13, &p).value;
    let route_b = (hi - lo) / (1 << 12) as f64;
    let route_c = asymptotic_slope(&m, 0.0, 2, &c, SlopeVariant::Corrected, &p).flat_value();

    let expect = 2.0 / 2f64.ln();
    ck.close("slope-sim", route_a, expect, 0.03 * expect);
    for (label, x, y) in [
        ("sim-vs-series", route_a, route_b),
        ("sim-vs-analytic", route_a, route_c),
        ("series-vs-analytic", route_b, route_c),
    ] {
        ck.le(
            &format!("{label}-reldiff"),
            (x - y).abs() / x.abs().max(y.abs()),
            0.03,
        );
    }
    let printed = asymptotic_slope(&m, 0.0, 2, &c, SlopeVariant::AsPrinted, &p).flat_value();
    ck.is(
        &format!("as-printed={printed:.4} disagrees with simulation (>3%)"),
        (printed - route_a).abs() / route_a > 0.03,
    );
    ck.result("static-slope-routes", cfg.seed)
}

/// Criterion 4: the renewal series per item, `W = delta_{1/2}`, `i = 1` —
/// period average within 1% of `1/log 2` and oscillation phase repeating
/// across consecutive dyadic periods.
pub fn renewal_oracle(cfg: &SuiteConfig) -> CriterionResult {
    let m = sym_binary_measure();
    let p = cfg.params(&m);
    let mut ck = Checks::new();
    let grid = 16usize;
    let phase_of = |exp: u32| -> (f64, f64) {
        let base = (1u64 << exp) as f64;
        let mut mean = 0.0;
        let mut peak = (f64::MIN, 0.0);
        for j in 0..grid {
            let t = j as f64 / grid as f64;
            let n = (base * 2f64.powf(t)).round() as u64;
            let v = renewal_series(&m, 1, n, &p).value / n as f64;
            mean += v / grid as f64;
            if v > peak.0 {
                peak = (v, t);
            }
        }
        (mean, peak.1)
    };
    let (mean16, peak16) = phase_of(16);
    let (_, peak17) = phase_of(17);
    let target = 1.0 / 2f64.ln();
    ck.close("period-mean", mean16, target, 0.01 * target);
    let single = renewal_series(&m, 1, 1 << 16, &p).value / (1u64 << 16) as f64;
    ck.close("point(n=2^16)", single, target, 0.01);
    let dist = (peak16 - peak17).abs();
    ck.le("peak-phase-shift", dist.min(1.0 - dist), 1.0 / grid as f64 + 1e-12);
    ck.result("renewal-oracle", cfg.seed)
}

/// Criterion 5: the numeric period average of the fluctuation profile
/// matches the renewal slope of the same variant within 1e-3, `i = 1, 2`.
pub fn fluctuation_mean(cfg: &SuiteConfig) -> CriterionResult {
    let m = sym_binary_measure();
    let mut ck = Checks::new();
    for variant in [SlopeVariant::Corrected, SlopeVariant::AsPrinted] {
        for i in 1..=2u64 {
            let grid = 64;
            let mean: f64 = (0..grid)
                .map(|t| periodic_fluctuation(&m, i, t as f64 / grid as f64, variant).unwrap())
                .sum::<f64>()
                / grid as f64;
            ck.close(
                &format!("mean(F_{i},{variant:?})"),
                mean,
                renewal_slope(&m, i, variant),
                1e-3,
            );
        }
    }
    ck.result("fluctuation-mean", cfg.seed)
}

/// Criterion 6: binary closed forms. The solved ratio `C_1/C_0` matches
/// the closed-form ratio within 3 combined sigma (batch-seed standard
/// errors), and the Monte Carlo Laplace transform matches the closed form
/// within 3 sigma and 1e-3 absolute.
pub fn binary_closed_forms(cfg: &SuiteConfig) -> CriterionResult {
    let mut ck = Checks::new();
    for &p_weight in &[0.5, 0.3] {
        let m = if (p_weight - 0.5f64).abs() < 1e-12 {
            sym_binary_measure()
        } else {
            binary_law(p_weight).splitting_measure().unwrap()
        };
        for &lam in &[0.1, 0.2] {
            let k = binary_constant_ratio(p_weight, lam).unwrap();
            // Batch solves give an honest spread for the ratio (entries
            // within one solve share paths, so per-entry propagation alone
            // would misstate the ratio error).
            let batches = 8u64;
            let mut acc = RunningMoments::new();
            let mut failed = None;
            for b in 0..batches {
                let params = SeriesParams {
                    mc_paths: (cfg.mc_paths / batches).max(1),
                    seed: cfg.seed.wrapping_add(b),
                    ..SeriesParams::for_measure(&m)
                };
                match solve_at(&m, lam, 2, &params) {
                    Ok(c) => acc.push(c.c[1] / c.c[0]),
                    Err(e) => failed = Some(format!("{e}")),
                }
            }
            if let Some(e) = failed {
                ck.is(&format!("p={p_weight},lam={lam}: solve failed: {e}"), false);
                continue;
            }
            let tol = (3.0 * acc.std_error()).max(1e-9 * k.abs());
            ck.close(
                &format!("C1/C0(p={p_weight},lam={lam})"),
                acc.mean(),
                k,
                tol,
            );
        }
    }
    // Laplace transform vs closed form for p = 0.3.
    let m = binary_law(0.3).splitting_measure().unwrap();
    for &s in &[0.05f64, 0.1, 0.5] {
        let mut r = rng::derive(cfg.seed, rng::STREAM_XINF, s.to_bits());
        let (est, se) = laplace_x_inf(&m, s, 1_000_000, 1e-10, &mut r);
        let closed = laplace_binary_closed(0.3, s).unwrap();
        ck.close(&format!("laplace(s={s})"), est, closed, 3.0 * se);
        ck.le(&format!("laplace-absdiff(s={s})"), (est - closed).abs(), 1e-3);
    }
    ck.result("binary-closed-forms", cfg.seed)
}

/// Criterion 7: functional-equation residuals. The evaluated transform
/// satisfies its defining relation within 1% on `x in [0, 10]`, and the
/// stationarity residual on fresh samples stays within 3 sigma.
pub fn transform_residuals(cfg: &SuiteConfig) -> CriterionResult {
    let mut ck = Checks::new();
    let cases: Vec<(&str, SplittingMeasure, f64)> = vec![
        ("w=1/2,lam=0.1", sym_binary_measure(), 0.1),
        ("w=1/2,lam=0.25", sym_binary_measure(), 0.25),
        ("w=1/3,lam=0.1", SplittingMeasure::dirac(1.0 / 3.0).unwrap(), 0.1),
    ];
    for (label, m, lam) in cases {
        let p = cfg.params(&m);
        let c = match solve_at(&m, lam, 2, &p) {
            Ok(c) => c,
            Err(e) => {
                ck.is(&format!("{label}: solve failed: {e}"), false);
                continue;
            }
        };
        let mut worst: f64 = 0.0;
        for j in 0..=20 {
            let x = j as f64 * 0.5;
            let phi = eval_poisson_transform(&m, lam, &c, x, &p).value;
            let inner: f64 = m
                .atoms()
                .iter()
                .map(|a| {
                    a.q / a.w * eval_poisson_transform(&m, lam, &c, lam + a.w * x, &p).value
                })
                .sum();
            let residual = (phi - inner - 1.0 + c.phi_c(x)).abs() / phi.abs();
            worst = worst.max(residual);
        }
        ck.le(&format!("{label}:transform-residual"), worst, 0.01);
        ck.le(
            &format!("{label}:stationarity-residual"),
            c.residuals.stationary.abs(),
            (3.0 * c.residuals.stationary_sigma).max(1e-9),
        );
    }
    ck.result("transform-residuals", cfg.seed)
}

/// Criterion 8: boundary conditions `E(R_m) = 1` for `1 <= m < D` at
/// `lam = 0.1`, for a `D = 2` and a `D = 3` measure.
pub fn boundary_conditions(cfg: &SuiteConfig) -> CriterionResult {
    let mut ck = Checks::new();
    let cases: Vec<(&str, SplittingMeasure, u64)> = vec![
        ("w=1/2,d=2", sym_binary_measure(), 2),
        ("w=.3/.7,d=2", binary_law(0.3).splitting_measure().unwrap(), 2),
        ("w=1/3,d=3", SplittingMeasure::dirac(1.0 / 3.0).unwrap(), 3),
    ];
    for (label, m, d) in cases {
        let p = cfg.params(&m);
        match solve_at(&m, 0.1, d, &p) {
            Ok(c) => {
                for m_small in 1..d {
                    let v = mean_tree_size(&m, 0.1, d, &c, m_small, &p);
                    ck.le(
                        &format!("{label}:|E(R_{m_small})-1|"),
                        (v.value - 1.0).abs(),
                        0.01,
                    );
                }
            }
            Err(e) => ck.is(&format!("{label}: solve failed: {e}"), false),
        }
    }
    ck.result("boundary-conditions", cfg.seed)
}

/// Criterion 9: dynamic cross-check at `lam = 0.25` — exact series vs
/// 1e5-tree simulation at `n = 64` and `n = 256` within twice the combined
/// uncertainty.
pub fn dynamic_crosscheck(cfg: &SuiteConfig) -> CriterionResult {
    let m = sym_binary_measure();
    let p = cfg.params(&m);
    let mut ck = Checks::new();
    let c = match solve_at(&m, 0.25, 2, &p) {
        Ok(c) => c,
        Err(e) => {
            ck.is(&format!("solve failed: {e}"), false);
            return ck.result("dynamic-crosscheck", cfg.seed);
        }
    };
    for &n in &[64u64, 256] {
        let analytic = mean_tree_size(&m, 0.25, 2, &c, n, &p);
        let sim = estimate_mean_size(
            n,
            2,
            &ArrivalLaw::Poisson(0.25),
            &binary_law(0.5),
            100_000,
            10_000_000,
            cfg.seed,
        );
        ck.is(&format!("sim(n={n}) trusted"), sim.trusted);
        let combined = (analytic.std_error.powi(2) + sim.std_error.powi(2)).sqrt();
        ck.close(
            &format!("series-vs-sim(n={n})"),
            analytic.value,
            sim.mean,
            2.0 * combined,
        );
    }
    ck.result("dynamic-crosscheck", cfg.seed)
}

/// Criterion 10: the critical rate for the symmetric binary protocol lies
/// in [0.30, 0.40] with seed jitter below 0.01, respects the service bound
/// `D - 1`, and the stability probe classifies both sides of it.
pub fn stability_threshold(cfg: &SuiteConfig) -> CriterionResult {
    let m = sym_binary_measure();
    let p = cfg.params(&m);
    let mut ck = Checks::new();
    let root = match find_lambda_c(&m, 2, &p, (0.05, 0.5), 1e-3) {
        Ok(r) => r,
        Err(e) => {
            ck.is(&format!("bisection failed: {e}"), false);
            return ck.result("stability-threshold", cfg.seed);
        }
    };
    ck.is(
        &format!("lambda_c={:.4} in [0.30, 0.40]", root.value),
        root.value >= 0.30 && root.value <= 0.40,
    );
    let jitter = root
        .roots
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    ck.le("seed-jitter", (jitter.1 - jitter.0) / 2.0, 0.01);
    ck.le("lambda_c<=D-1", root.value, 1.0);

    let law = binary_law(0.5);
    let below = crate::protocol::stability_probe(
        2,
        &law,
        &ArrivalLaw::Poisson(root.value - 0.03),
        100_000,
        20,
        cfg.seed,
    );
    ck.is(
        &format!(
            "probe(lambda_c-0.03) {} (slope {:.2e})",
            below.classification, below.slope
        ),
        below.classification == Stability::Stable,
    );
    let above = crate::protocol::stability_probe(
        2,
        &law,
        &ArrivalLaw::Poisson(root.value + 0.03),
        100_000,
        20,
        cfg.seed + 1,
    );
    ck.is(
        &format!(
            "probe(lambda_c+0.03) {} (slope {:.2e})",
            above.classification, above.slope
        ),
        above.classification == Stability::Unstable,
    );
    ck.result("stability-threshold", cfg.seed)
}

/// Criterion 11: the stack hitting time and the tree node count share mean
/// and variance (within 3 sigma, 1e5 trials) across a small grid.
pub fn simulator_equivalence(cfg: &SuiteConfig) -> CriterionResult {
    let law = binary_law(0.5);
    let mut ck = Checks::new();
    for &n in &[2u64, 10] {
        for &lam in &[0.0, 0.2] {
            let arrivals = if lam == 0.0 {
                ArrivalLaw::None
            } else {
                ArrivalLaw::Poisson(lam)
            };
            let trials = 100_000u64;
            let mut tree = RunningMoments::new();
            let mut stack = RunningMoments::new();
            let mut censored = 0u64;
            for i in 0..trials {
                let mut r = rng::derive(cfg.seed, rng::STREAM_TRIAL, i);
                match crate::protocol::simulate_tree(n, 2, &arrivals, &law, 10_000_000, &mut r) {
                    Some(t) => tree.push(t.nodes as f64),
                    None => censored += 1,
                }
                let mut r = rng::derive(cfg.seed ^ 0xabcd, rng::STREAM_TRIAL, i);
                match hitting_time(n, 2, &law, &arrivals, 10_000_000, &mut r) {
                    Some(t) => stack.push(t as f64),
                    None => censored += 1,
                }
            }
            ck.is(&format!("n={n},lam={lam}: no censoring"), censored == 0);
            let se = (tree.std_error().powi(2) + stack.std_error().powi(2)).sqrt();
            ck.close(
                &format!("mean(n={n},lam={lam})"),
                tree.mean(),
                stack.mean(),
                3.0 * se,
            );
            let vse = (tree.variance_std_error().powi(2) + stack.variance_std_error().powi(2))
                .sqrt();
            ck.close(
                &format!("var(n={n},lam={lam})"),
                tree.variance(),
                stack.variance(),
                3.0 * vse,
            );
        }
    }
    ck.result("simulator-equivalence", cfg.seed)
}

/// Criterion 12: toggling the tail regularization with shared paths moves
/// neither the solved constants (beyond combined error) nor the
/// determinant zero crossing (beyond the bisection tolerance).
pub fn regularization_invariance(cfg: &SuiteConfig) -> CriterionResult {
    let m = sym_binary_measure();
    let p_on = cfg.params(&m);
    let p_off = SeriesParams {
        regularize: false,
        ..p_on
    };
    let mut ck = Checks::new();
    match (solve_at(&m, 0.2, 2, &p_on), solve_at(&m, 0.2, 2, &p_off)) {
        (Ok(on), Ok(off)) => {
            for j in 0..on.c.len() {
                let combined = (on.std_errors[j].powi(2) + off.std_errors[j].powi(2))
                    .sqrt()
                    .mul_add(3.0, 1e-9);
                ck.close(&format!("C{j}(on vs off)"), on.c[j], off.c[j], combined);
            }
            let combined = (on.std_errors[2].powi(2) + off.std_errors[2].powi(2))
                .sqrt()
                .mul_add(3.0, 1e-9);
            ck.close("C_inf(on vs off)", on.c_inf, off.c_inf, combined);
        }
        (Err(e), _) | (_, Err(e)) => ck.is(&format!("solve failed: {e}"), false),
    }
    let tol = 1e-3;
    match (
        find_lambda_c(&m, 2, &p_on, (0.05, 0.5), tol),
        find_lambda_c(&m, 2, &p_off, (0.05, 0.5), tol),
    ) {
        (Ok(a), Ok(b)) => ck.close("lambda_c(on vs off)", a.value, b.value, tol),
        (Err(e), _) | (_, Err(e)) => ck.is(&format!("bisection failed: {e}"), false),
    }
    ck.result("regularization-invariance", cfg.seed)
}

/// Experiment-specific rows: a solve at the configured rate (skipped with
/// a reason when the rate is at or beyond critical), a series-vs-sim
/// cross-check, and a stability probe.
pub fn experiment_rows(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    let Some(exp) = &cfg.experiment else {
        return Vec::new();
    };
    let mut rows = Vec::new();
    let measure = match exp.law.splitting_measure() {
        Ok(m) => m,
        Err(e) => {
            return vec![CriterionResult {
                id: "experiment",
                status: Status::Fail,
                seed: cfg.seed,
                notes: vec![format!("invalid law: {e}")],
            }]
        }
    };
    let p = cfg.params(&measure);
    let lam = exp.arrivals.mean();

    let solved = solve_at(&measure, lam, exp.d, &p);
    match &solved {
        Ok(c) => {
            let mut ck = Checks::new();
            ck.note(format!(
                "C={:?} C_inf={:.4}",
                c.c.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
                c.c_inf
            ));
            ck.le(
                "stationarity-residual",
                c.residuals.stationary.abs(),
                (3.0 * c.residuals.stationary_sigma).max(1e-9),
            );
            rows.push(ck.result("experiment-solve", cfg.seed));
        }
        Err(e @ Error::SingularNearLambdaC { .. }) => rows.push(CriterionResult {
            id: "experiment-solve",
            status: Status::Skipped,
            seed: cfg.seed,
            notes: vec![format!("rate at or beyond critical: {e}")],
        }),
        Err(e) => rows.push(CriterionResult {
            id: "experiment-solve",
            status: Status::Fail,
            seed: cfg.seed,
            notes: vec![format!("{e}")],
        }),
    }

    match &solved {
        Ok(c) => {
            let mut ck = Checks::new();
            let n = 64u64;
            let analytic = mean_tree_size(&measure, lam, exp.d, c, n, &p);
            if analytic.trusted {
                let sim = estimate_mean_size(n, exp.d, &exp.arrivals, &exp.law, 50_000, 10_000_000, cfg.seed);
                if sim.trusted {
                    let combined = (analytic.std_error.powi(2) + sim.std_error.powi(2)).sqrt();
                    ck.close("series-vs-sim(n=64)", analytic.value, sim.mean, 2.0 * combined);
                } else {
                    ck.note(format!("simulation censored {}/{}", sim.censored, sim.trials));
                }
                rows.push(ck.result("experiment-crosscheck", cfg.seed));
            } else {
                rows.push(CriterionResult {
                    id: "experiment-crosscheck",
                    status: Status::Skipped,
                    seed: cfg.seed,
                    notes: vec![format!("series untrusted (tail {:.2e})", analytic.tail_fraction)],
                });
            }
        }
        Err(_) => rows.push(CriterionResult {
            id: "experiment-crosscheck",
            status: Status::Skipped,
            seed: cfg.seed,
            notes: vec!["no solved constants".into()],
        }),
    }

    let probe = crate::protocol::stability_probe(exp.d, &exp.law, &exp.arrivals, 100_000, 20, cfg.seed);
    let mut ck = Checks::new();
    ck.is(
        &format!(
            "probe: {} (slope {:.2e}, regenerated {:.0}%)",
            probe.classification,
            probe.slope,
            100.0 * probe.regenerated_late
        ),
        probe.classification != Stability::Inconclusive,
    );
    rows.push(ck.result("experiment-probe", cfg.seed));
    rows
}

type Criterion = fn(&SuiteConfig) -> CriterionResult;

/// The pinned battery in execution order.
pub const CRITERIA: &[(&str, Criterion)] = &[
    ("static-exact-value", static_exact_value),
    ("static-constants", static_constants),
    ("static-slope-routes", static_slope_routes),
    ("renewal-oracle", renewal_oracle),
    ("fluctuation-mean", fluctuation_mean),
    ("binary-closed-forms", binary_closed_forms),
    ("transform-residuals", transform_residuals),
    ("boundary-conditions", boundary_conditions),
    ("dynamic-crosscheck", dynamic_crosscheck),
    ("stability-threshold", stability_threshold),
    ("simulator-equivalence", simulator_equivalence),
    ("regularization-invariance", regularization_invariance),
];

/// Run the pinned battery (optionally a named subset) plus the experiment
/// rows.
pub fn run_suite(cfg: &SuiteConfig, only: Option<&[String]>) -> Vec<CriterionResult> {
    let mut results = Vec::new();
    for (id, f) in CRITERIA {
        let selected = only.map_or(true, |names| names.iter().any(|n| n == id));
        if selected {
            results.push(f(cfg));
        }
    }
    if only.is_none() {
        results.extend(experiment_rows(cfg));
    }
    results
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{assemble_matrix, mean_tree_size, solve_constants};

    #[test]
    fn recurrence_oracle_matches_hand_values() {
        let a = oracles::static_mean_sizes(&binary_law(0.5), 2, 8);
        assert_eq!(a[0], 1.0);
        assert_eq!(a[1], 1.0);
        assert!((a[2] - 5.0).abs() < 1e-12, "a2 = {}", a[2]);
        // a3 = 1 + sum C(3,i) 2^-3 (a_i + a_{3-i}) solved by hand: with
        // a2 = 5, a3 = (1 + (2*1 + 6*(1+5)/ ... )) -- cross-check against
        // the series instead of trusting hand algebra for n = 3.
        let m = sym_binary_measure();
        let p = SeriesParams::for_measure(&m);
        let c = solve_constants(&assemble_matrix(&m, 0.0, 2, &p)).unwrap();
        for n in 2..=8u64 {
            let v = mean_tree_size(&m, 0.0, 2, &c, n, &p);
            assert!(
                (v.value - a[n as usize]).abs() < 1e-6 * a[n as usize],
                "n = {n}: series {} vs oracle {}",
                v.value,
                a[n as usize]
            );
        }
    }

    #[test]
    fn recurrence_oracle_asymmetric_matches_series() {
        let law = binary_law(0.3);
        let m = law.splitting_measure().unwrap();
        let a = oracles::static_mean_sizes(&law, 2, 32);
        let p = SeriesParams {
            mc_paths: 200_000,
            ..SeriesParams::for_measure(&m)
        };
        let c = solve_constants(&assemble_matrix(&m, 0.0, 2, &p)).unwrap();
        for n in [4u64, 16, 32] {
            let v = mean_tree_size(&m, 0.0, 2, &c, n, &p);
            assert!(
                (v.value - a[n as usize]).abs() < 4.0 * v.std_error.max(1e-3 * a[n as usize]),
                "n = {n}: series {} +- {} vs oracle {}",
                v.value,
                v.std_error,
                a[n as usize]
            );
        }
    }

    #[test]
    fn suite_subset_runs() {
        let cfg = SuiteConfig {
            mc_paths: 20_000,
            ..SuiteConfig::default()
        };
        let only = vec!["fluctuation-mean".to_string()];
        let results = run_suite(&cfg, Some(&only));
        assert_eq!(results.len(), 1);
        assert_eq!(results[0].id, "fluctuation-mean");
        assert!(results[0].passed(), "{}", results[0].line());
    }
}
