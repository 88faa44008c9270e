//! Branching laws and the splitting measure they induce.
//!
//! A branching law describes one split: a random branch count `G >= 2` and,
//! given `G`, a random probability vector `(V_1, ..., V_G)` of subgroup
//! weights. The *splitting measure* is the size-biased law of a single
//! weight: an item lands in branch `i` with probability `V_i`, so the weight
//! "seen" by a uniformly chosen item has density `sum_i V_i 1{V_i in .}`.
//! Everything the analytics need — moments, the bound `delta`, the
//! arithmetic span — is a property of this measure alone.

use crate::error::Error;
use crate::Result;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tolerance for probability vectors summing to one, and for merging equal
/// weight atoms.
pub const PROB_TOL: f64 = 1e-12;
/// Tolerance on derived-moment consistency checks.
pub const MOMENT_TOL: f64 = 1e-9;
/// Residual tolerance for the arithmetic-span lattice fit.
pub const SPAN_TOL: f64 = 1e-9;
/// Largest rational denominator searched by the lattice fit.
pub const SPAN_MAX_DENOM: u32 = 64;

/// Weight law of one branch entry: a fixed vector or a finite mixture of
/// vectors of the same length.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightLaw {
    Fixed(Vec<f64>),
    Mixture(Vec<(f64, Vec<f64>)>),
}

/// One `(G = g)` alternative of a branching law.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub count: usize,
    pub prob: f64,
    pub weights: WeightLaw,
}

/// Full law of `(G, V_1..V_G)`: drives the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchingLaw {
    branches: Vec<Branch>,
}

fn check_weight_vector(g: usize, v: &[f64]) -> Result<()> {
    if v.len() != g {
        return Err(Error::InvalidLaw(format!(
            "weight vector has {} entries for g = {}",
            v.len(),
            g
        )));
    }
    for &w in v {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::DegenerateSplit { weight: w });
        }
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidLaw(format!(
            "weights sum to {s}, expected 1 within {PROB_TOL:e}"
        )));
    }
    Ok(())
}

impl BranchingLaw {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidLaw("no branches".into()));
        }
        let mut total = 0.0;
        for b in &branches {
            if b.count < 2 {
                return Err(Error::InvalidLaw(format!(
                    "branch count {} below 2",
                    b.count
                )));
            }
            if !(b.prob > 0.0 && b.prob <= 1.0) {
                return Err(Error::InvalidLaw(format!(
                    "branch probability {} outside (0, 1]",
                    b.prob
                )));
            }
            total += b.prob;
            match &b.weights {
                WeightLaw::Fixed(v) => check_weight_vector(b.count, v)?,
                WeightLaw::Mixture(parts) => {
                    if parts.is_empty() {
                        return Err(Error::InvalidLaw("empty mixture".into()));
                    }
                    let mut mix_total = 0.0;
                    for (p, v) in parts {
                        if !(*p > 0.0 && *p <= 1.0) {
                            return Err(Error::InvalidLaw(format!(
                                "mixture probability {p} outside (0, 1]"
                            )));
                        }
                        mix_total += p;
                        check_weight_vector(b.count, v)?;
                    }
                    if (mix_total - 1.0).abs() > PROB_TOL {
                        return Err(Error::InvalidLaw(format!(
                            "mixture probabilities sum to {mix_total}"
                        )));
                    }
                }
            }
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidLaw(format!(
                "branch probabilities sum to {total}, expected 1 within {PROB_TOL:e}"
            )));
        }
        Ok(Self { branches })
    }

    /// Deterministic binary split with weights `(p, 1 - p)`.
    pub fn binary(p: f64) -> Result<Self> {
        Self::new(vec![Branch {
            count: 2,
            prob: 1.0,
            weights: WeightLaw::Fixed(vec![p, 1.0 - p]),
        }])
    }

    /// Deterministic `g`-ary split with equal weights.
    pub fn symmetric(g: usize) -> Result<Self> {
        Self::new(vec![Branch {
            count: g,
            prob: 1.0,
            weights: WeightLaw::Fixed(vec![1.0 / g as f64; g]),
        }])
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Average branching degree `E(G)`.
    pub fn mean_count(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| b.prob * b.count as f64)
            .sum()
    }

    /// Draw `(g, weight vector)` for one split.
    pub fn sample_split<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, &[f64]) {
        let branch = if self.branches.len() == 1 {
            &self.branches[0]
        } else {
            let mut u: f64 = rng.random();
            let mut pick = &self.branches[self.branches.len() - 1];
            for b in &self.branches {
                if u < b.prob {
                    pick = b;
                    break;
                }
                u -= b.prob;
            }
            pick
        };
        let v: &[f64] = match &branch.weights {
            WeightLaw::Fixed(v) => v,
            WeightLaw::Mixture(parts) => {
                let mut u: f64 = rng.random();
                let mut pick: &[f64] = &parts[parts.len() - 1].1;
                for (p, v) in parts {
                    if u < *p {
                        pick = v;
                        break;
                    }
                    u -= p;
                }
                pick
            }
        };
        (branch.count, v)
    }

    /// The size-biased splitting measure: the weight of the branch a
    /// uniformly chosen item falls into. Each weight value `w` carries mass
    /// `sum P(G = g) P(vector) * v_i` over all positions with `v_i = w`;
    /// equal values are merged within [`PROB_TOL`].
    pub fn splitting_measure(&self) -> Result<SplittingMeasure> {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for b in &self.branches {
            let mut add_vector = |vec_prob: f64, v: &[f64]| {
                for &w in v {
                    raw.push((w, b.prob * vec_prob * w));
                }
            };
            match &b.weights {
                WeightLaw::Fixed(v) => add_vector(1.0, v),
                WeightLaw::Mixture(parts) => {
                    for (p, v) in parts {
                        add_vector(*p, v);
                    }
                }
            }
        }
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut atoms: Vec<Atom> = Vec::new();
        for (w, q) in raw {
            match atoms.last_mut() {
                Some(last) if (w - last.w).abs() <= PROB_TOL => last.q += q,
                _ => atoms.push(Atom { w, q }),
            }
        }
        SplittingMeasure::from_atoms(atoms)
    }
}

/// One atom `(w, q)` of a splitting measure: weight value and its mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub w: f64,
    pub q: f64,
}

/// Atomic splitting measure: the size-biased weight law, its essential upper
/// bound `delta` and the average branching degree `E(G) = E(1/W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingMeasure {
    atoms: Vec<Atom>,
    delta: f64,
    mean_g: f64,
    cumulative: Vec<f64>,
}

impl SplittingMeasure {
    /// Build and validate a measure from its atoms.
    pub fn from_atoms(mut atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        atoms.sort_by(|a, b| a.w.partial_cmp(&b.w).unwrap());
        let mut total = 0.0;
        for a in &atoms {
            if !(a.w > 0.0 && a.w < 1.0) {
                return Err(Error::DegenerateSplit { weight: a.w });
            }
            if !(a.q > 0.0 && a.q <= 1.0) {
                return Err(Error::InvalidMeasure(format!("atom mass {} outside (0, 1]", a.q)));
            }
            total += a.q;
        }
        if (total - 1.0).abs() > PROB_TOL * atoms.len() as f64 {
            return Err(Error::InvalidMeasure(format!(
                "atom masses sum to {total}, expected 1"
            )));
        }
        let delta = atoms.last().unwrap().w;
        let mean_g = atoms.iter().map(|a| a.q / a.w).sum();
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for a in &atoms {
            acc += a.q;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            atoms,
            delta,
            mean_g,
            cumulative,
        })
    }

    /// Single-atom measure `W = delta_w`.
    pub fn dirac(w: f64) -> Result<Self> {
        Self::from_atoms(vec![Atom { w, q: 1.0 }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Essential supremum of the weight (strictly below 1 by construction).
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Average branching degree `E(G) = E(1/W)`.
    pub fn mean_g(&self) -> f64 {
        self.mean_g
    }

    /// True when the weight is deterministic; path sampling then collapses
    /// to a single exact path and every series in the analytics is exact.
    pub fn is_deterministic(&self) -> bool {
        self.atoms.len() == 1
    }

    /// For a binary law `W = p delta_p + q delta_q` (or the symmetric case
    /// `W = delta_{1/2}`), the parameter `p`; `None` otherwise.
    pub fn binary_p(&self) -> Option<f64> {
        match self.atoms.as_slice() {
            [a] if (a.w - 0.5).abs() < MOMENT_TOL => Some(0.5),
            [a, b]
                if (a.w + b.w - 1.0).abs() < MOMENT_TOL
                    && (a.q - a.w).abs() < MOMENT_TOL
                    && (b.q - b.w).abs() < MOMENT_TOL =>
            {
                Some(a.w)
            }
            _ => None,
        }
    }

    /// `(E(G), E|log W|, E(W))` as exact weighted sums over the atoms.
    pub fn moments(&self) -> (f64, f64, f64) {
        let mean_abs_log = self.atoms.iter().map(|a| a.q * (-a.w.ln())).sum();
        let mean_w = self.atoms.iter().map(|a| a.q * a.w).sum();
        (self.mean_g, mean_abs_log, mean_w)
    }

    /// `E|log W|`.
    pub fn mean_abs_log_w(&self) -> f64 {
        self.moments().1
    }

    /// `E(W)`.
    pub fn mean_w(&self) -> f64 {
        self.moments().2
    }

    /// Draw one weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.atoms.len() == 1 {
            return self.atoms[0].w;
        }
        let u: f64 = rng.random();
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.atoms.len() - 1);
        self.atoms[idx].w
    }

    /// Check the standing assumptions and classify the lattice structure of
    /// `-log W`.
    ///
    /// The integrability value `E|log W| / W` is always finite for atoms in
    /// (0, 1); it is reported for documentation. The span is the largest
    /// `xi` such that every `-log w_j` is an integer multiple of `xi` within
    /// [`SPAN_TOL`], searched over rational multiples of the smallest log up
    /// to denominator [`SPAN_MAX_DENOM`]; absent when no such `xi` exists.
    pub fn check_assumptions(&self) -> AssumptionReport {
        let h2_value = self
            .atoms
            .iter()
            .map(|a| a.q * (-a.w.ln()) / a.w)
            .sum();
        AssumptionReport {
            delta: self.delta,
            h2_value,
            span: self.arithmetic_span(),
            mean_abs_log_w: self.mean_abs_log_w(),
        }
    }

    /// Largest common span of `(-log w_j)`, if one exists.
    pub fn arithmetic_span(&self) -> Option<f64> {
        let logs: Vec<f64> = self.atoms.iter().map(|a| -a.w.ln()).collect();
        let l_min = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        for denom in 1..=SPAN_MAX_DENOM {
            let xi = l_min / denom as f64;
            let fits = logs.iter().all(|&l| {
                let mult = (l / xi).round();
                mult >= 1.0 && (l - mult * xi).abs() <= SPAN_TOL
            });
            if fits {
                return Some(xi);
            }
        }
        None
    }

    /// Serialize as the on-disk JSON form `{"atoms": [{"w":..,"q":..}]}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Repr<'a> {
            atoms: &'a [Atom],
        }
        serde_json::to_string_pretty(&Repr { atoms: &self.atoms }).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Repr {
            atoms: Vec<Atom>,
        }
        let repr: Repr = serde_json::from_str(text)?;
        Self::from_atoms(repr.atoms)
    }
}

/// Report of the standing assumptions for a measure.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// Essential supremum of the weight.
    pub delta: f64,
    /// `E(|log W| / W)`; finite for every atomic measure on (0, 1).
    pub h2_value: f64,
    /// Arithmetic span of `-log W`, absent when nonarithmetic.
    pub span: Option<f64>,
    /// `E|log W|`.
    pub mean_abs_log_w: f64,
}

// ---------------------------------------------------------------------------
// JSON form of a branching law.

#[derive(Serialize, Deserialize)]
struct MixturePartRepr {
    prob: f64,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BranchRepr {
    g: usize,
    prob: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mixture: Option<Vec<MixturePartRepr>>,
}

#[derive(Serialize, Deserialize)]
struct LawRepr {
    branches: Vec<BranchRepr>,
}

impl BranchingLaw {
    /// Parse the JSON description
    /// `{"branches":[{"g":2,"prob":1.0,"weights":[0.3,0.7]}]}`; a branch may
    /// carry `"mixture":[{"prob":..,"weights":[..]},..]` instead of a fixed
    /// vector.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: LawRepr = serde_json::from_str(text)?;
        let branches = repr
            .branches
            .into_iter()
            .map(|b| {
                let weights = match (b.weights, b.mixture) {
                    (Some(v), None) => WeightLaw::Fixed(v),
                    (None, Some(parts)) => WeightLaw::Mixture(
                        parts.into_iter().map(|p| (p.prob, p.weights)).collect(),
                    ),
                    _ => {
                        return Err(Error::InvalidLaw(
                            "branch needs exactly one of `weights` or `mixture`".into(),
                        ))
                    }
                };
                Ok(Branch {
                    count: b.g,
                    prob: b.prob,
                    weights,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(branches)
    }

    pub fn to_json(&self) -> String {
        let repr = LawRepr {
            branches: self
                .branches
                .iter()
                .map(|b| {
                    let (weights, mixture) = match &b.weights {
                        WeightLaw::Fixed(v) => (Some(v.clone()), None),
                        WeightLaw::Mixture(parts) => (
                            None,
                            Some(
                                parts
                                    .iter()
                                    .map(|(p, v)| MixturePartRepr {
                                        prob: *p,
                                        weights: v.clone(),
                                    })
                                    .collect(),
                            ),
                        ),
                    };
                    BranchRepr {
                        g: b.count,
                        prob: b.prob,
                        weights,
                        mixture,
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&repr).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::stats::chi_square_critical;

    fn binary_law(p: f64) -> BranchingLaw {
        BranchingLaw::binary(p).unwrap()
    }

    #[test]
    fn binary_measure_atoms() {
        let m = binary_law(0.3).splitting_measure().unwrap();
        let atoms = m.atoms();
        assert_eq!(atoms.len(), 2);
        assert!((atoms[0].w - 0.3).abs() < 1e-15 && (atoms[0].q - 0.3).abs() < 1e-15);
        assert!((atoms[1].w - 0.7).abs() < 1e-15 && (atoms[1].q - 0.7).abs() < 1e-15);
        assert!((m.delta() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn symmetric_ternary_collapses_to_one_atom() {
        let m = BranchingLaw::symmetric(3).unwrap().splitting_measure().unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert!((m.atoms()[0].w - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.atoms()[0].q - 1.0).abs() < 1e-15);
        assert!((m.mean_g() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_example_enumerates_terms() {
        // G = 2 w.p. 1/2 with (1/2, 1/2); G = 4 w.p. 1/2 uniform.
        let law = BranchingLaw::new(vec![
            Branch {
                count: 2,
                prob: 0.5,
                weights: WeightLaw::Fixed(vec![0.5, 0.5]),
            },
            Branch {
                count: 4,
                prob: 0.5,
                weights: WeightLaw::Fixed(vec![0.25; 4]),
            },
        ])
        .unwrap();
        let m = law.splitting_measure().unwrap();
        let atoms = m.atoms();
        assert_eq!(atoms.len(), 2);
        assert!((atoms[0].w - 0.25).abs() < 1e-15 && (atoms[0].q - 0.5).abs() < 1e-15);
        assert!((atoms[1].w - 0.5).abs() < 1e-15 && (atoms[1].q - 0.5).abs() < 1e-15);
        assert!((m.mean_g() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn masses_sum_to_one_and_mean_g_matches_law() {
        // Random laws: the measure integrates a probability vector, so the
        // masses always sum to one and E(G) must match the law exactly.
        let mut r = rng::from_seed(11);
        for _ in 0..50 {
            use rand::Rng;
            let g = r.random_range(2..6usize);
            let mut v: Vec<f64> = (0..g).map(|_| r.random_range(0.05..1.0f64)).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            let law = BranchingLaw::new(vec![Branch {
                count: g,
                prob: 1.0,
                weights: WeightLaw::Fixed(v),
            }])
            .unwrap();
            let m = law.splitting_measure().unwrap();
            let total: f64 = m.atoms().iter().map(|a| a.q).sum();
            assert!((total - 1.0).abs() < 1e-9);
            assert!((m.mean_g() - law.mean_count()).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_weight_rejected() {
        let err = BranchingLaw::new(vec![Branch {
            count: 2,
            prob: 1.0,
            weights: WeightLaw::Fixed(vec![1.0, 0.0]),
        }])
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateSplit { .. }));
    }

    #[test]
    fn moments_of_dirac_and_binary() {
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let (g, l, w) = m.moments();
        assert!((g - 2.0).abs() < 1e-12);
        assert!((l - 2f64.ln()).abs() < 1e-12);
        assert!((w - 0.5).abs() < 1e-12);

        let m = binary_law(0.3).splitting_measure().unwrap();
        let (g, _, w) = m.moments();
        assert!((g - 2.0).abs() < 1e-12);
        assert!((w - 0.58).abs() < 1e-12);

        let m = SplittingMeasure::dirac(1.0 / 3.0).unwrap();
        let (g, l, w) = m.moments();
        assert!((g - 3.0).abs() < 1e-12);
        assert!((l - 3f64.ln()).abs() < 1e-12);
        assert!((w - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn span_detection() {
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let rep = m.check_assumptions();
        assert!((rep.span.unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((rep.mean_abs_log_w - 2f64.ln()).abs() < 1e-12);
        assert!((rep.delta - 0.5).abs() < 1e-15);

        // {1/2, 1/4}: logs are {log 2, 2 log 2}.
        let m = SplittingMeasure::from_atoms(vec![
            Atom { w: 0.25, q: 0.4 },
            Atom { w: 0.5, q: 0.6 },
        ])
        .unwrap();
        assert!((m.arithmetic_span().unwrap() - 2f64.ln()).abs() < 1e-12);

        // {0.3, 0.7}: log 0.3 / log 0.7 fails every lattice fit to denom 64.
        let m = binary_law(0.3).splitting_measure().unwrap();
        assert!(m.arithmetic_span().is_none());
    }

    #[test]
    fn span_scales_with_rational_rescaling() {
        // Synthetic lattice: -log w in {2xi, 3xi} has span xi; scaling xi
        // rescales the detected span accordingly.
        for &xi in &[0.3f64, 0.45, 0.7] {
            let m = SplittingMeasure::from_atoms(vec![
                Atom {
                    w: (-2.0 * xi).exp(),
                    q: 0.5,
                },
                Atom {
                    w: (-3.0 * xi).exp(),
                    q: 0.5,
                },
            ])
            .unwrap();
            let got = m.arithmetic_span().unwrap();
            assert!((got - xi).abs() < 1e-9, "xi = {xi}, got {got}");
        }
    }

    #[test]
    fn h2_is_finite() {
        let m = binary_law(0.3).splitting_measure().unwrap();
        let rep = m.check_assumptions();
        assert!(rep.h2_value.is_finite());
        let expect = 0.3 * (-(0.3f64.ln())) / 0.3 + 0.7 * (-(0.7f64.ln())) / 0.7;
        assert!((rep.h2_value - expect).abs() < 1e-12);
    }

    #[test]
    fn sampling_frequencies_match_masses() {
        let m = binary_law(0.3).splitting_measure().unwrap();
        let mut r = rng::from_seed(42);
        let n = 1_000_000usize;
        let mut count_low = 0u64;
        for _ in 0..n {
            if m.sample(&mut r) < 0.5 {
                count_low += 1;
            }
        }
        let freq = count_low as f64 / n as f64;
        assert!((freq - 0.3).abs() < 0.002, "freq = {freq}");

        // Chi-square goodness of fit at significance 0.001.
        let observed = [count_low as f64, (n as u64 - count_low) as f64];
        let expected = [0.3 * n as f64, 0.7 * n as f64];
        let chi2: f64 = observed
            .iter()
            .zip(&expected)
            .map(|(o, e)| (o - e) * (o - e) / e)
            .sum();
        assert!(chi2 < chi_square_critical(1, 0.001), "chi2 = {chi2}");
    }

    #[test]
    fn dirac_sampling_is_constant() {
        let m = SplittingMeasure::dirac(0.5).unwrap();
        let mut r = rng::from_seed(0);
        for _ in 0..100 {
            assert_eq!(m.sample(&mut r), 0.5);
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"branches":[{"g":2,"prob":1.0,"weights":[0.3,0.7]}]}"#;
        let law = BranchingLaw::from_json(text).unwrap();
        assert_eq!(law.branches().len(), 1);
        let again = BranchingLaw::from_json(&law.to_json()).unwrap();
        assert_eq!(law, again);

        let m = law.splitting_measure().unwrap();
        let back = SplittingMeasure::from_json(&m.to_json()).unwrap();
        assert_eq!(m.atoms(), back.atoms());
    }

    #[test]
    fn binary_p_detection() {
        assert_eq!(SplittingMeasure::dirac(0.5).unwrap().binary_p(), Some(0.5));
        let m = binary_law(0.3).splitting_measure().unwrap();
        let p = m.binary_p().unwrap();
        assert!((p - 0.3).abs() < 1e-12);
        assert_eq!(SplittingMeasure::dirac(1.0 / 3.0).unwrap().binary_p(), None);
    }
}
