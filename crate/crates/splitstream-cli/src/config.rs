//! Experiment configuration file and flag parsing helpers.
//!
//! Precedence everywhere is flags > config file > built-in defaults. The
//! resolved parameter set (not the raw file) is what gets hashed into the
//! output provenance, so two invocations that resolve identically produce
//! identical bytes.

use serde::{Deserialize, Serialize};
use splitstream::protocol::ArrivalLaw;
use splitstream::splitting::{BranchingLaw, SplittingMeasure};
use std::path::{Path, PathBuf};

/// On-disk experiment configuration.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Path to a branching-law JSON description.
    pub law: Option<PathBuf>,
    /// Path to a splitting-measure JSON description.
    pub measure: Option<PathBuf>,
    pub d: Option<u64>,
    /// Arrival descriptor, e.g. "poisson:0.25", "none", "det:2",
    /// "pmf:0:0.5,2:0.5".
    pub arrivals: Option<String>,
    pub series: Option<SeriesConfig>,
    /// Directory for report files written by `validate`.
    pub outputs: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub k_max: Option<usize>,
    pub mc_paths: Option<u64>,
    pub xinf_tol: Option<f64>,
    pub regularize: Option<bool>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| format!("malformed config {}: {e}", path.display()))?;
        for file in [&cfg.law, &cfg.measure] {
            if let Some(f) = file {
                if !f.exists() {
                    return Err(format!("config references missing file {}", f.display()));
                }
            }
        }
        if let Some(d) = cfg.d {
            if d < 1 {
                return Err("config: d must be at least 1".into());
            }
        }
        Ok(cfg)
    }
}

/// Default seed: `SPLITSTREAM_SEED` when set, else 0.
pub fn env_seed() -> Result<u64, String> {
    match std::env::var("SPLITSTREAM_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| format!("SPLITSTREAM_SEED is not an integer: {v}")),
        Err(_) => Ok(0),
    }
}

/// Parse a count that may use scientific notation ("1e7").
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s
        .parse()
        .map_err(|_| format!("not a count: {s}"))?;
    if !(f.is_finite() && f >= 0.0 && f <= u64::MAX as f64 && f.fract() == 0.0) {
        return Err(format!("not a nonnegative integer count: {s}"));
    }
    Ok(f as u64)
}

/// Parse "lo:hi" into a bracket.
pub fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(format!("bracket must be lo:hi, got {s}"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("bad bracket {s}"))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("bad bracket {s}"))?;
    if !(lo >= 0.0 && hi > lo) {
        return Err(format!("bracket needs 0 <= lo < hi, got {s}"));
    }
    Ok((lo, hi))
}

/// Parse "start:end:step" into an inclusive grid.
pub fn parse_float_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid must be start:end:step, got {s}"));
    }
    let start: f64 = parts[0].parse().map_err(|_| format!("bad grid {s}"))?;
    let end: f64 = parts[1].parse().map_err(|_| format!("bad grid {s}"))?;
    let step: f64 = parts[2].parse().map_err(|_| format!("bad grid {s}"))?;
    if !(step > 0.0 && end >= start) {
        return Err(format!("grid needs start <= end and step > 0, got {s}"));
    }
    let mut grid = Vec::new();
    let mut i = 0u64;
    loop {
        let v = start + i as f64 * step;
        if v > end + 1e-12 {
            break;
        }
        grid.push(v);
        i += 1;
    }
    Ok(grid)
}

/// Parse "64,256,1024" into counts.
pub fn parse_count_list(s: &str) -> Result<Vec<u64>, String> {
    s.split(',').map(|p| parse_count(p.trim())).collect()
}

/// Parse an arrival descriptor.
pub fn parse_arrivals(s: &str) -> Result<ArrivalLaw, String> {
    let lower = s.trim().to_ascii_lowercase();
    if lower == "none" {
        return Ok(ArrivalLaw::None);
    }
    if let Some(rate) = lower.strip_prefix("poisson:") {
        let lam: f64 = rate
            .parse()
            .map_err(|_| format!("bad poisson rate in {s}"))?;
        if lam < 0.0 {
            return Err(format!("negative poisson rate in {s}"));
        }
        return Ok(ArrivalLaw::Poisson(lam));
    }
    for prefix in ["det:", "deterministic:"] {
        if let Some(v) = lower.strip_prefix(prefix) {
            return Ok(ArrivalLaw::Deterministic(
                v.parse().map_err(|_| format!("bad batch size in {s}"))?,
            ));
        }
    }
    if let Some(body) = lower.strip_prefix("pmf:") {
        let mut entries = Vec::new();
        for pair in body.split(',') {
            let mut it = pair.split(':');
            let (v, p) = (it.next(), it.next());
            match (v, p, it.next()) {
                (Some(v), Some(p), None) => entries.push((
                    v.parse().map_err(|_| format!("bad pmf value in {s}"))?,
                    p.parse().map_err(|_| format!("bad pmf mass in {s}"))?,
                )),
                _ => return Err(format!("pmf entries must be value:mass, got {s}")),
            }
        }
        let law = ArrivalLaw::Pmf(entries);
        law.validate().map_err(|e| e.to_string())?;
        return Ok(law);
    }
    Err(format!(
        "unknown arrival descriptor {s} (expected none | poisson:RATE | det:K | pmf:v:p,...)"
    ))
}

pub fn load_law(path: &Path) -> Result<BranchingLaw, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read law {}: {e}", path.display()))?;
    BranchingLaw::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load_measure(path: &Path) -> Result<SplittingMeasure, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read measure {}: {e}", path.display()))?;
    SplittingMeasure::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}
