//! Job configuration: a line-based `key = value` file plus flag overrides.
//!
//! The file format is deliberately small.  Blank lines and `#` comments are
//! ignored; every other line must read `key = value`.  Parse errors carry
//! the file name and line number.  Command-line flags are merged on top of
//! the file, and flags always win.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use superint::exactalg::Rat;
use superint::systems::SystemId;

/// One verification job: a system at ladder order `k = p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobSpec {
    pub system: SystemId,
    pub p: i64,
    pub q: i64,
}

/// Explicit representation parameters for one system, resolved against the
/// model symbol table when the job runs.
#[derive(Debug, Clone)]
pub struct PinnedParams {
    pub system: SystemId,
    pub assignments: Vec<(String, Rat)>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct JobConfig {
    /// Jobs in execution (and report) order.
    pub jobs: Vec<JobSpec>,
    /// Residual tolerance for the numeric cross-checks.
    pub tol: f64,
    /// Sample points per numeric identity.
    pub points: usize,
    /// Master seed; per-section seeds are derived from it and the job key,
    /// so reordering jobs never changes any individual section.
    pub seed: u64,
    /// Worker threads for the job fan-out (0 = one per available core).
    pub parallelism: usize,
    /// Report destination (stdout when unset and no output directory is
    /// configured in the environment).
    pub out: Option<PathBuf>,
    /// Random parameter draws per representation sweep (0 disables sweeps).
    pub rep_draws: usize,
    /// Ladder window size for explicitly pinned representations.
    pub rep_levels: usize,
    /// Congruence offsets `(p0, q0)` for explicitly pinned representations.
    pub rep_offsets: (i64, i64),
    /// Explicit parameter picks, at most one entry per system.
    pub rep_params: Vec<PinnedParams>,
    /// Skip the numeric cross-check sections entirely.
    pub skip_numerics: bool,
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            jobs: SystemId::all()
                .iter()
                .map(|&system| JobSpec { system, p: 1, q: 1 })
                .collect(),
            tol: 1e-10,
            points: 24,
            seed: 0x5eed_2026,
            parallelism: 0,
            out: None,
            rep_draws: 5,
            rep_levels: 2,
            rep_offsets: (0, 0),
            rep_params: Vec::new(),
            skip_numerics: false,
        }
    }
}

/// Configuration failure with enough position information to act on.
#[derive(Debug)]
pub enum ConfigError {
    /// The file could not be read at all.
    Io { path: PathBuf, source: std::io::Error },
    /// A specific line is malformed; `line` is 1-based.
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
    /// The assembled configuration is inconsistent (bad flag combination,
    /// non-coprime pair, ...).
    Invalid { message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => {
                write!(f, "config {}: {source}", path.display())
            }
            ConfigError::Line {
                path,
                line,
                message,
            } => write!(f, "config {}:{line}: {message}", path.display()),
            ConfigError::Invalid { message } => write!(f, "config: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Splits a comma-separated list, trimming and dropping empty items.
fn comma_list(value: &str) -> Vec<&str> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a.rem_euclid(b));
    }
    a.abs()
}

/// Validates one ladder order: positive and coprime.
pub fn check_pair(p: i64, q: i64) -> Result<(), String> {
    if p < 1 || q < 1 {
        return Err(format!(
            "ladder order requires positive integers, got (p, q) = ({p}, {q})"
        ));
    }
    if gcd(p, q) != 1 {
        return Err(format!(
            "ladder order requires coprime integers, got (p, q) = ({p}, {q}) \
             with gcd {}",
            gcd(p, q)
        ));
    }
    Ok(())
}

fn parse_pair(text: &str) -> Result<(i64, i64), String> {
    let (ps, qs) = text
        .split_once(':')
        .ok_or_else(|| format!("expected `p:q`, got `{text}`"))?;
    let p: i64 = ps
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not an integer", ps.trim()))?;
    let q: i64 = qs
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not an integer", qs.trim()))?;
    check_pair(p, q)?;
    Ok((p, q))
}

/// Raw file contents before the systems/pairs product is flattened.
#[derive(Default)]
struct RawConfig {
    systems: Option<Vec<SystemId>>,
    pairs: Option<Vec<(i64, i64)>>,
}

/// Parses configuration text.  `path` labels error messages only.
pub fn parse_config_str(path: &Path, text: &str) -> Result<JobConfig, ConfigError> {
    let mut cfg = JobConfig::default();
    let mut raw = RawConfig::default();
    let fail = |line: usize, message: String| ConfigError::Line {
        path: path.to_path_buf(),
        line,
        message,
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| fail(line_no, format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(fail(line_no, format!("key `{key}` has an empty value")));
        }
        match key {
            "systems" => {
                let mut systems = Vec::new();
                for item in comma_list(value) {
                    let id = SystemId::from_str(item).map_err(|e| fail(line_no, e))?;
                    if !systems.contains(&id) {
                        systems.push(id);
                    }
                }
                if systems.is_empty() {
                    return Err(fail(line_no, "`systems` lists no system".to_string()));
                }
                raw.systems = Some(systems);
            }
            "pairs" => {
                let mut pairs = Vec::new();
                for item in comma_list(value) {
                    let pair = parse_pair(item).map_err(|e| fail(line_no, e))?;
                    if !pairs.contains(&pair) {
                        pairs.push(pair);
                    }
                }
                if pairs.is_empty() {
                    return Err(fail(line_no, "`pairs` lists no ladder order".to_string()));
                }
                raw.pairs = Some(pairs);
            }
            "tol" => {
                cfg.tol = value
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{value}` is not a number")))?;
                if !(cfg.tol > 0.0) {
                    return Err(fail(line_no, "`tol` must be positive".to_string()));
                }
            }
            "points" => {
                cfg.points = value
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{value}` is not a count")))?;
            }
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{value}` is not a seed")))?;
            }
            "jobs" => {
                cfg.parallelism = value
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{value}` is not a thread count")))?;
            }
            "out" => {
                cfg.out = Some(PathBuf::from(value));
            }
            "rep_draws" => {
                cfg.rep_draws = value
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{value}` is not a count")))?;
            }
            "rep_levels" => {
                cfg.rep_levels = value
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{value}` is not a count")))?;
                if cfg.rep_levels == 0 {
                    return Err(fail(line_no, "`rep_levels` must be at least 1".to_string()));
                }
            }
            "rep_offsets" => {
                let (p0s, q0s) = value.split_once(':').ok_or_else(|| {
                    fail(line_no, format!("expected `p0:q0`, got `{value}`"))
                })?;
                let p0 = p0s
                    .trim()
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{}` is not an integer", p0s.trim())))?;
                let q0 = q0s
                    .trim()
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{}` is not an integer", q0s.trim())))?;
                cfg.rep_offsets = (p0, q0);
            }
            "skip_numerics" => {
                cfg.skip_numerics = value
                    .parse()
                    .map_err(|_| fail(line_no, format!("`{value}` is not true/false")))?;
            }
            _ if key.starts_with("rep_params.") => {
                let system_name = &key["rep_params.".len()..];
                let system =
                    SystemId::from_str(system_name).map_err(|e| fail(line_no, e))?;
                if cfg.rep_params.iter().any(|p| p.system == system) {
                    return Err(fail(
                        line_no,
                        format!("duplicate `rep_params.{system_name}` entry"),
                    ));
                }
                let mut assignments = Vec::new();
                for item in comma_list(value) {
                    let (name, val) = item.split_once('=').ok_or_else(|| {
                        fail(line_no, format!("expected `name=rational`, got `{item}`"))
                    })?;
                    let rat = Rat::from_str(val.trim()).map_err(|_| {
                        fail(
                            line_no,
                            format!(
                                "`{}` is not a rational (write integers or `n/d`)",
                                val.trim()
                            ),
                        )
                    })?;
                    assignments.push((name.trim().to_string(), rat));
                }
                if assignments.is_empty() {
                    return Err(fail(line_no, format!("key `{key}` assigns nothing")));
                }
                cfg.rep_params.push(PinnedParams {
                    system,
                    assignments,
                });
            }
            _ => {
                return Err(fail(line_no, format!("unknown key `{key}`")));
            }
        }
    }

    let systems = raw
        .systems
        .unwrap_or_else(|| SystemId::all().to_vec());
    let pairs = raw.pairs.unwrap_or_else(|| vec![(1, 1)]);
    cfg.jobs = systems
        .iter()
        .flat_map(|&system| pairs.iter().map(move |&(p, q)| JobSpec { system, p, q }))
        .collect();
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn parse_config_file(path: &Path) -> Result<JobConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(path, &text)
}

/// Command-line overrides; every populated field replaces the file value.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub systems: Option<Vec<SystemId>>,
    pub p: Option<i64>,
    pub q: Option<i64>,
    pub tol: Option<f64>,
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub rep_draws: Option<usize>,
    pub skip_numerics: bool,
}

fn distinct_systems(jobs: &[JobSpec]) -> Vec<SystemId> {
    let mut out = Vec::new();
    for j in jobs {
        if !out.contains(&j.system) {
            out.push(j.system);
        }
    }
    out
}

fn distinct_pairs(jobs: &[JobSpec]) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for j in jobs {
        if !out.contains(&(j.p, j.q)) {
            out.push((j.p, j.q));
        }
    }
    out
}

/// Merges flag overrides into a configuration; flags win over the file.
pub fn apply_overrides(cfg: &mut JobConfig, ov: &Overrides) -> Result<(), ConfigError> {
    let invalid = |message: String| ConfigError::Invalid { message };
    if ov.systems.is_some() || ov.p.is_some() || ov.q.is_some() {
        let systems = ov
            .systems
            .clone()
            .unwrap_or_else(|| distinct_systems(&cfg.jobs));
        let pairs = match (ov.p, ov.q) {
            (None, None) => distinct_pairs(&cfg.jobs),
            (p, q) => {
                let (p, q) = (p.unwrap_or(1), q.unwrap_or(1));
                check_pair(p, q).map_err(invalid)?;
                vec![(p, q)]
            }
        };
        cfg.jobs = systems
            .iter()
            .flat_map(|&system| pairs.iter().map(move |&(p, q)| JobSpec { system, p, q }))
            .collect();
    }
    if let Some(tol) = ov.tol {
        if !(tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {tol}")));
        }
        cfg.tol = tol;
    }
    if let Some(points) = ov.points {
        cfg.points = points;
    }
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if ov.out.is_some() {
        cfg.out = ov.out.clone();
    }
    if let Some(jobs) = ov.jobs {
        cfg.parallelism = jobs;
    }
    if let Some(draws) = ov.rep_draws {
        cfg.rep_draws = draws;
    }
    if ov.skip_numerics {
        cfg.skip_numerics = true;
    }
    if cfg.jobs.is_empty() {
        return Err(invalid("no jobs configured".to_string()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_covers_every_family_once() {
        let cfg = JobConfig::default();
        assert_eq!(cfg.jobs.len(), SystemId::all().len());
        assert!(cfg.jobs.iter().all(|j| (j.p, j.q) == (1, 1)));
    }

    #[test]
    fn config_file_round_trip() {
        let text = "\
# demo configuration
systems = ttw, caged
pairs = 1:2, 3:2
tol = 1e-9
points = 20
seed = 77
jobs = 2
rep_draws = 3
rep_levels = 2
rep_offsets = 0:1
rep_params.ttw = a = 1/3, b = 1/5, om = 1
skip_numerics = true
";
        let cfg = parse_config_str(Path::new("demo.cfg"), text).unwrap();
        assert_eq!(cfg.jobs.len(), 4);
        assert_eq!(cfg.jobs[0].system, SystemId::Ttw);
        assert_eq!((cfg.jobs[1].p, cfg.jobs[1].q), (3, 2));
        assert_eq!(cfg.tol, 1e-9);
        assert_eq!(cfg.points, 20);
        assert_eq!(cfg.seed, 77);
        assert_eq!(cfg.parallelism, 2);
        assert_eq!(cfg.rep_draws, 3);
        assert_eq!(cfg.rep_offsets, (0, 1));
        assert!(cfg.skip_numerics);
        assert_eq!(cfg.rep_params.len(), 1);
        assert_eq!(cfg.rep_params[0].assignments.len(), 3);
        assert_eq!(cfg.rep_params[0].assignments[0].0, "a");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "tol = 1e-10\n\nwat = 3\n";
        let err = parse_config_str(Path::new("bad.cfg"), text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.cfg:3"), "{msg}");
        assert!(msg.contains("unknown key `wat`"), "{msg}");
    }

    #[test]
    fn non_coprime_pairs_are_rejected_with_position() {
        let text = "pairs = 2:4\n";
        let err = parse_config_str(Path::new("bad.cfg"), text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.cfg:1"), "{msg}");
        assert!(msg.contains("coprime"), "{msg}");
    }

    #[test]
    fn flags_override_file_values() {
        let text = "systems = sphere\npairs = 1:3\ntol = 1e-8\n";
        let mut cfg = parse_config_str(Path::new("demo.cfg"), text).unwrap();
        let ov = Overrides {
            p: Some(2),
            q: Some(1),
            tol: Some(1e-12),
            ..Overrides::default()
        };
        apply_overrides(&mut cfg, &ov).unwrap();
        assert_eq!(cfg.jobs.len(), 1);
        assert_eq!((cfg.jobs[0].p, cfg.jobs[0].q), (2, 1));
        assert_eq!(cfg.tol, 1e-12);
    }

    #[test]
    fn flag_pair_must_be_coprime() {
        let mut cfg = JobConfig::default();
        let ov = Overrides {
            p: Some(2),
            q: Some(2),
            ..Overrides::default()
        };
        let err = apply_overrides(&mut cfg, &ov).unwrap_err();
        assert!(err.to_string().contains("coprime"), "{err}");
    }
}
