//! Resolved run configuration, assembled from defaults, a flat `key = value`
//! file (or a previous manifest) and command-line overrides, in that order.

use crate::manifest::RunManifest;
use ibnls_core::evolution::EvolutionConfig;
use ibnls_core::ground_state::GroundStateConfig;
use ibnls_core::ModelParams;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Environment variable that overrides the output directory of the config file.
pub const OUT_DIR_ENV: &str = "IBNLS_OUT_DIR";

/// Output directory used when nothing else names one.
pub const DEFAULT_OUT_DIR: &str = "ibnls-out";

/// Keys accepted in config files and by `--set`.
pub const KEYS: &[&str] = &[
    "N",
    "b",
    "q",
    "r_max",
    "M",
    "dt",
    "t_final",
    "stride",
    "blowup_factor",
    "resolution_guard",
    "energy_guard",
    "absorbing_layer",
    "tol_euler",
    "tol_pohozaev",
    "tol_profile",
    "max_iter",
    "init",
    "seed",
    "samples",
    "radius",
    "tol",
    "max_points",
];

/// A rejected configuration entry.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid value for `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

/// Initial datum of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum InitSpec {
    /// `a e^{−r²/w²}`, written `gaussian:a:w`.
    Gaussian { amplitude: f64, width: f64 },
    /// `λ ζ`, written `scaled-zeta:λ`.
    ScaledZeta(f64),
    /// Snapshot file, written `file:path`.
    Snapshot(PathBuf),
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Gaussian { amplitude, width } => write!(f, "gaussian:{amplitude}:{width}"),
            InitSpec::ScaledZeta(l) => write!(f, "scaled-zeta:{l}"),
            InitSpec::Snapshot(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for InitSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or("expected `kind:arguments`")?;
        let num = |x: &str| x.parse::<f64>().map_err(|_| format!("bad number `{x}`"));
        match kind {
            "gaussian" => {
                let (a, w) = rest.split_once(':').ok_or("expected `gaussian:amplitude:width`")?;
                let (amplitude, width) = (num(a)?, num(w)?);
                if !(width > 0.0 && amplitude.is_finite()) {
                    return Err("width must be positive and amplitude finite".into());
                }
                Ok(InitSpec::Gaussian { amplitude, width })
            }
            "scaled-zeta" => {
                let l = num(rest)?;
                if !l.is_finite() {
                    return Err("scale must be finite".into());
                }
                Ok(InitSpec::ScaledZeta(l))
            }
            "file" if !rest.is_empty() => Ok(InitSpec::Snapshot(PathBuf::from(rest))),
            _ => Err(format!(
                "unknown initial datum `{s}` (gaussian:a:w, scaled-zeta:l, file:path)"
            )),
        }
    }
}

impl From<InitSpec> for String {
    fn from(s: InitSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for InitSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Values of a swept parameter: `x`, `a,b,c` or inclusive `start:step:end`.
pub fn parse_axis(s: &str) -> Result<Vec<f64>, String> {
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("bad number `{x}`"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if !(step > 0.0 && end >= start) {
                return Err("range needs step > 0 and end >= start".into());
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(format!("range has {count} values"));
            }
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err("expected `x`, `a,b,c` or `start:step:end`".into()),
    }
}

/// Everything that determines the numbers of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: Vec<usize>,
    pub b: Vec<f64>,
    pub q: Vec<f64>,
    pub r_max: f64,
    pub m: usize,
    pub ground_state: GroundStateConfig,
    pub evolution: EvolutionConfig,
    pub init: InitSpec,
    pub seed: u64,
    /// Random fields per inequality check.
    pub samples: usize,
    /// Cutoff radius of the localized virial; the pure virial is always checked.
    pub radius: f64,
    /// Relative band within which threshold comparisons count as equal.
    pub tol: f64,
    /// Largest number of sweep points.
    pub max_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: vec![3],
            b: vec![1.0],
            q: vec![5.0],
            r_max: 30.0,
            m: 1024,
            ground_state: GroundStateConfig::default(),
            evolution: EvolutionConfig {
                snapshot_stride: 100,
                ..EvolutionConfig::default()
            },
            init: InitSpec::ScaledZeta(0.5),
            seed: 0,
            samples: 100,
            radius: 2.0,
            tol: 1e-8,
            max_points: 256,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError::new(key, format!("cannot parse `{value}`")))
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse(key, value)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::new(
            key,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

fn count(key: &str, value: &str) -> Result<usize, ConfigError> {
    match parse::<usize>(key, value)? {
        0 => Err(ConfigError::new(key, "must be at least 1")),
        k => Ok(k),
    }
}

impl RunConfig {
    /// Applies one `key = value` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let axis = |v: &str| parse_axis(v).map_err(|m| ConfigError::new(key, m));
        match key {
            "N" => {
                self.n = axis(value)?
                    .into_iter()
                    .map(|x| {
                        (x.fract() == 0.0 && x >= 1.0)
                            .then_some(x as usize)
                            .ok_or_else(|| ConfigError::new(key, format!("dimension {x} is not a positive integer")))
                    })
                    .collect::<Result<_, _>>()?
            }
            "b" => self.b = axis(value)?,
            "q" => self.q = axis(value)?,
            "r_max" => self.r_max = positive(key, value)?,
            "M" => {
                self.m = parse(key, value)?;
                if self.m < 5 {
                    return Err(ConfigError::new(key, "grid needs at least 5 nodes"));
                }
            }
            "dt" => {
                self.evolution.dt = parse(key, value)?;
                if self.evolution.dt == 0.0 || !self.evolution.dt.is_finite() {
                    return Err(ConfigError::new(key, "must be nonzero and finite"));
                }
            }
            "t_final" => self.evolution.t_final = positive(key, value)?,
            "stride" => self.evolution.snapshot_stride = count(key, value)?,
            "blowup_factor" => self.evolution.blowup_factor = positive(key, value)?,
            "resolution_guard" => self.evolution.resolution_guard = positive(key, value)?,
            "energy_guard" => self.evolution.energy_guard = positive(key, value)?,
            "absorbing_layer" => self.evolution.absorbing_layer = parse(key, value)?,
            "tol_euler" => self.ground_state.tol_euler = positive(key, value)?,
            "tol_pohozaev" => self.ground_state.tol_pohozaev = positive(key, value)?,
            "tol_profile" => self.ground_state.tol_profile = positive(key, value)?,
            "max_iter" => self.ground_state.max_iter = count(key, value)?,
            "init" => self.init = value.trim().parse().map_err(|m: String| ConfigError::new(key, m))?,
            "seed" => self.seed = parse(key, value)?,
            "samples" => self.samples = count(key, value)?,
            "radius" => {
                self.radius = parse(key, value)?;
                if !(self.radius >= 0.0 && self.radius.is_finite()) {
                    return Err(ConfigError::new(key, "must be 0 (pure virial only) or positive"));
                }
            }
            "tol" => {
                self.tol = parse(key, value)?;
                if !(self.tol >= 0.0 && self.tol.is_finite()) {
                    return Err(ConfigError::new(key, "must be non-negative"));
                }
            }
            "max_points" => self.max_points = count(key, value)?,
            _ => {
                return Err(ConfigError::new(
                    key,
                    format!("unknown key; expected one of {}", KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// The single parameter set of a non-sweep run.
    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let single = |key: &str, len: usize| {
            if len == 1 {
                Ok(())
            } else {
                Err(ConfigError::new(key, "takes a single value outside `sweep`"))
            }
        };
        single("N", self.n.len())?;
        single("b", self.b.len())?;
        single("q", self.q.len())?;
        Ok(ModelParams::new(self.n[0], self.b[0], self.q[0]))
    }

    /// Cartesian product of the parameter axes, `q` varying fastest.
    pub fn points(&self) -> Vec<ModelParams> {
        let mut out = Vec::with_capacity(self.n.len() * self.b.len() * self.q.len());
        for &n in &self.n {
            for &b in &self.b {
                for &q in &self.q {
                    out.push(ModelParams::new(n, b, q));
                }
            }
        }
        out
    }

    /// Copy restricted to one parameter set.
    pub fn at(&self, p: ModelParams) -> RunConfig {
        RunConfig {
            n: vec![p.n],
            b: vec![p.b],
            q: vec![p.q],
            ..self.clone()
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment and blank lines are skipped.
pub fn parse_flat(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ConfigError::new(
                &format!("line {}", i + 1),
                format!("expected `key = value`, got `{line}`"),
            )
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Builds the run configuration and output directory.
///
/// `file` is either a flat config or a manifest of an earlier run; entries of
/// `overrides` win over it. The output directory comes from `out_flag`, then
/// `env_out`, then an `out` key of the file, then [`DEFAULT_OUT_DIR`].
pub fn resolve(
    file: Option<&Path>,
    overrides: &[(String, String)],
    out_flag: Option<PathBuf>,
    env_out: Option<String>,
) -> Result<(RunConfig, PathBuf), ConfigError> {
    let mut config = RunConfig::default();
    let mut file_out = None;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            let manifest = RunManifest::from_json(&text)
                .map_err(|e| ConfigError::new("config", format!("not a run manifest: {e}")))?;
            config = manifest.config;
        } else {
            for (k, v) in parse_flat(&text)? {
                if k == "out" {
                    file_out = Some(PathBuf::from(v));
                } else {
                    config.set(&k, &v)?;
                }
            }
        }
    }
    for (k, v) in overrides {
        config.set(k, v)?;
    }
    let out = out_flag
        .or(env_out.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or(file_out)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok((config, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_forms() {
        assert_eq!(parse_axis("4").unwrap(), vec![4.0]);
        assert_eq!(parse_axis("2,3.5").unwrap(), vec![2.0, 3.5]);
        assert_eq!(parse_axis("3:0.25:5").unwrap().len(), 9);
        assert_eq!(*parse_axis("3:0.25:5").unwrap().last().unwrap(), 5.0);
        assert!(parse_axis("5:0.25:3").is_err());
        assert!(parse_axis("1:2").is_err());
        assert!(parse_axis("x").is_err());
    }

    #[test]
    fn init_round_trip() {
        for s in ["gaussian:1.5:0.75", "scaled-zeta:1.2", "file:/tmp/a b.txt"] {
            let spec: InitSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("gaussian:1:0".parse::<InitSpec>().is_err());
        assert!("zeta:1".parse::<InitSpec>().is_err());
    }

    #[test]
    fn flat_file_with_comments() {
        let pairs = parse_flat("# header\nN = 2\n\nq=4 # trailing\n").unwrap();
        assert_eq!(pairs, vec![("N".into(), "2".into()), ("q".into(), "4".into())]);
        let err = parse_flat("N 2").unwrap_err();
        assert_eq!(err.key, "line 1");
    }

    #[test]
    fn errors_name_the_key() {
        let mut c = RunConfig::default();
        assert_eq!(c.set("dt", "fast").unwrap_err().key, "dt");
        assert_eq!(c.set("N", "2.5").unwrap_err().key, "N");
        assert_eq!(c.set("bogus", "1").unwrap_err().key, "bogus");
        assert_eq!(c.set("M", "3").unwrap_err().key, "M");
    }

    #[test]
    fn ranges_only_for_sweeps() {
        let mut c = RunConfig::default();
        c.set("q", "3:0.5:4").unwrap();
        assert_eq!(c.params().unwrap_err().key, "q");
        assert_eq!(c.points().len(), 3);
        assert_eq!(c.at(c.points()[1]).params().unwrap().q, 3.5);
    }

    #[test]
    fn flags_win_over_file_and_env_over_file_out() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "N = 2\nq = 4\nout = from-file\n").unwrap();
        let overrides = vec![("q".to_string(), "3.5".to_string())];
        let (c, out) = resolve(Some(&path), &overrides, None, Some("from-env".into())).unwrap();
        assert_eq!((c.n[0], c.q[0]), (2, 3.5));
        assert_eq!(out, PathBuf::from("from-env"));
        let (_, out) = resolve(Some(&path), &[], Some("flag".into()), Some("from-env".into())).unwrap();
        assert_eq!(out, PathBuf::from("flag"));
        let (_, out) = resolve(Some(&path), &[], None, None).unwrap();
        assert_eq!(out, PathBuf::from("from-file"));
    }
}
