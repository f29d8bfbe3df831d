//! Strict `key = value` configuration with `[section]` headers.
//!
//! Blank lines and lines starting with `#` are ignored; a `#` after a value
//! starts a trailing comment. Every key must be known for its section.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use boussinesq_core::expr::Expr;
use boussinesq_core::modal::ModalState;
use boussinesq_core::{CoefficientSet, CoefficientSetF64, Profile};

use crate::error::CliError;

const SECTIONS: &[(&str, &[&str])] = &[
    ("coefficients", &["l", "rho", "sigma", "q", "grid_m"]),
    ("discretization", &["modes", "dt", "snapshot_every"]),
    (
        "control",
        &[
            "horizon", "samples", "epsilon", "init", "target", "seed", "trials", "fd_check",
        ],
    ),
    ("nonlinear", &["radius_sweep", "max_iter", "tol"]),
];

const REQUIRED: &[(&str, &str)] = &[
    ("coefficients", "l"),
    ("coefficients", "rho"),
    ("coefficients", "sigma"),
    ("coefficients", "q"),
    ("coefficients", "grid_m"),
];

/// Initial or target data: `zero`, `mode:K` or `mode:K:AMP` (position
/// coefficient of mode `K`), or a path to an `n,a_n,b_n` CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Zero,
    Mode { k: usize, amplitude: f64 },
    File(PathBuf),
}

impl StateSpec {
    fn parse(src: &str, base: &Path) -> Result<Self, String> {
        let src = src.trim();
        if src == "zero" {
            return Ok(Self::Zero);
        }
        if let Some(rest) = src.strip_prefix("mode:") {
            let mut parts = rest.split(':');
            let k: usize = parts
                .next()
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| format!("bad mode index in {src:?}: {e}"))?;
            let amplitude = match parts.next() {
                Some(a) => a
                    .trim()
                    .parse()
                    .map_err(|e| format!("bad amplitude in {src:?}: {e}"))?,
                None => 1.0,
            };
            if k == 0 || parts.next().is_some() {
                return Err(format!("expected mode:K or mode:K:AMP with K >= 1, got {src:?}"));
            }
            return Ok(Self::Mode { k, amplitude });
        }
        Ok(Self::File(base.join(src)))
    }

    pub fn build(&self, n: usize) -> Result<ModalState<f64>, CliError> {
        match self {
            Self::Zero => Ok(ModalState::zeros(n)),
            Self::Mode { k, amplitude } => {
                if *k > n {
                    return Err(CliError::Invalid(format!(
                        "mode {k} exceeds the {n} modes in use"
                    )));
                }
                Ok(ModalState::single_mode(n, *k, *amplitude))
            }
            Self::File(path) => {
                let file = std::fs::File::open(path).map_err(|e| {
                    CliError::Invalid(format!("cannot open state file {}: {e}", path.display()))
                })?;
                let s: ModalState<f64> = boussinesq_core::io::read_state(file)?;
                if s.n_modes() != n {
                    return Err(CliError::Invalid(format!(
                        "state file {} has {} modes, expected {n}",
                        path.display(),
                        s.n_modes()
                    )));
                }
                Ok(s)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub l: f64,
    pub rho: String,
    pub sigma: String,
    pub q: String,
    pub grid_m: usize,
    pub modes: usize,
    pub dt: f64,
    pub snapshot_every: usize,
    pub horizon: f64,
    pub samples: usize,
    pub epsilon: f64,
    pub init: StateSpec,
    pub target: StateSpec,
    pub seed: u64,
    pub trials: usize,
    pub fd_check: bool,
    pub radius_sweep: Vec<f64>,
    pub max_iter: usize,
    pub tol: f64,
}

type Table = BTreeMap<(String, String), (usize, String)>;

fn tokenize(text: &str) -> Result<Table, CliError> {
    let mut table = Table::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| CliError::ConfigParse {
                line: line_no,
                msg: format!("unterminated section header {line:?}"),
            })?;
            let name = name.trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(CliError::ConfigParse {
                    line: line_no,
                    msg: format!("unknown section [{name}]"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::ConfigParse {
            line: line_no,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.clone().ok_or_else(|| CliError::ConfigParse {
            line: line_no,
            msg: format!("key {key:?} appears before any section header"),
        })?;
        let known = SECTIONS
            .iter()
            .find(|(s, _)| *s == sec)
            .is_some_and(|(_, keys)| keys.contains(&key));
        if !known {
            return Err(CliError::UnknownKey {
                section: sec,
                key: key.to_string(),
            });
        }
        if value.is_empty() {
            return Err(CliError::ConfigParse {
                line: line_no,
                msg: format!("empty value for [{sec}] {key}"),
            });
        }
        if let Some((prev, _)) =
            table.insert((sec.clone(), key.to_string()), (line_no, value.to_string()))
        {
            return Err(CliError::ConfigParse {
                line: line_no,
                msg: format!("[{sec}] {key} already set on line {prev}"),
            });
        }
    }
    for (sec, key) in REQUIRED {
        if !table.contains_key(&(sec.to_string(), key.to_string())) {
            return Err(CliError::MissingKey(format!("[{sec}] {key}")));
        }
    }
    Ok(table)
}

struct Reader<'a> {
    table: &'a Table,
}

impl Reader<'_> {
    fn raw(&self, sec: &str, key: &str) -> Option<&(usize, String)> {
        self.table.get(&(sec.to_string(), key.to_string()))
    }

    fn get<T: std::str::FromStr>(&self, sec: &str, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(sec, key) {
            None => Ok(default),
            Some((line, v)) => v.parse().map_err(|e| CliError::ConfigParse {
                line: *line,
                msg: format!("[{sec}] {key} = {v:?}: {e}"),
            }),
        }
    }

    fn text(&self, sec: &str, key: &str, default: &str) -> String {
        self.raw(sec, key)
            .map_or_else(|| default.to_string(), |(_, v)| v.clone())
    }

    /// A constant expression such as `pi` or `2*pi`.
    fn constant(&self, sec: &str, key: &str) -> Result<f64, CliError> {
        let (line, v) = self.raw(sec, key).expect("required key checked");
        let e = Expr::parse(v).map_err(|e| CliError::ConfigParse {
            line: *line,
            msg: format!("[{sec}] {key}: {e}"),
        })?;
        if v.contains('x') {
            return Err(CliError::ConfigParse {
                line: *line,
                msg: format!("[{sec}] {key} must not depend on x"),
            });
        }
        Ok(e.eval(0.0f64))
    }
}

pub fn parse_list(src: &str) -> Result<Vec<f64>, String> {
    src.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let table = tokenize(text)?;
        let r = Reader { table: &table };
        let state = |key: &str, default: &str| -> Result<StateSpec, CliError> {
            let line = r.raw("control", key).map_or(0, |(l, _)| *l);
            StateSpec::parse(&r.text("control", key, default), base)
                .map_err(|msg| CliError::ConfigParse { line, msg })
        };
        let sweep_line = r.raw("nonlinear", "radius_sweep").map_or(0, |(l, _)| *l);
        let radius_sweep = parse_list(&r.text("nonlinear", "radius_sweep", "1e-1,1e-2,1e-3,1e-4,1e-5"))
            .map_err(|msg| CliError::ConfigParse {
                line: sweep_line,
                msg: format!("[nonlinear] radius_sweep: {msg}"),
            })?;
        let cfg = Self {
            l: r.constant("coefficients", "l")?,
            rho: r.text("coefficients", "rho", ""),
            sigma: r.text("coefficients", "sigma", ""),
            q: r.text("coefficients", "q", ""),
            grid_m: r.get("coefficients", "grid_m", 0)?,
            modes: r.get("discretization", "modes", 8)?,
            dt: r.get("discretization", "dt", 1e-4)?,
            snapshot_every: r.get("discretization", "snapshot_every", 100)?,
            horizon: r.get("control", "horizon", 2.0)?,
            samples: r.get("control", "samples", 20001)?,
            epsilon: r.get("control", "epsilon", 1e-10)?,
            init: state("init", "mode:1")?,
            target: state("target", "zero")?,
            seed: r.get("control", "seed", 42)?,
            trials: r.get("control", "trials", 100)?,
            fd_check: r.get("control", "fd_check", true)?,
            radius_sweep,
            max_iter: r.get("nonlinear", "max_iter", 20)?,
            tol: r.get("nonlinear", "tol", 1e-10)?,
        };
        Ok(cfg)
    }

    pub fn coefficients(&self) -> Result<CoefficientSetF64, CliError> {
        let profile = |name: &str, src: &str| {
            Profile::parse(src).map_err(|e| CliError::Invalid(format!("[coefficients] {name}: {e}")))
        };
        Ok(CoefficientSet::new(
            self.l,
            self.grid_m,
            profile("rho", &self.rho)?,
            profile("sigma", &self.sigma)?,
            profile("q", &self.q)?,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[coefficients]\nl = pi\nrho = 1\nsigma = 1\nq = 0\ngrid_m = 400\n";

    fn parse(text: &str) -> Result<Config, CliError> {
        Config::parse(text, Path::new("."))
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse(BASE).unwrap();
        assert!((c.l - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(c.grid_m, 400);
        assert_eq!(c.modes, 8);
        assert_eq!(c.init, StateSpec::Mode { k: 1, amplitude: 1.0 });
        assert_eq!(c.target, StateSpec::Zero);
        assert_eq!(c.radius_sweep.len(), 5);
    }

    #[test]
    fn strictness() {
        let missing = BASE.replace("l = pi\n", "");
        assert!(matches!(parse(&missing), Err(CliError::MissingKey(k)) if k.contains('l')));
        let unknown = format!("{BASE}[control]\nhorizon = 1\nspeed = 3\n");
        assert!(matches!(parse(&unknown), Err(CliError::UnknownKey { .. })));
        let dup = format!("{BASE}grid_m = 10\n");
        assert!(matches!(parse(&dup), Err(CliError::ConfigParse { line: 7, .. })));
        assert!(matches!(parse("l = 1\n"), Err(CliError::ConfigParse { line: 1, .. })));
        let bad = format!("{BASE}[discretization]\ndt = fast\n");
        assert!(matches!(parse(&bad), Err(CliError::ConfigParse { .. })));
        let section = format!("{BASE}[extra]\n");
        assert!(matches!(parse(&section), Err(CliError::ConfigParse { .. })));
    }

    #[test]
    fn state_specs() {
        let c = parse(&format!("{BASE}[control]\ninit = mode:2:0.5 # comment\ntarget = s.csv\n")).unwrap();
        assert_eq!(c.init, StateSpec::Mode { k: 2, amplitude: 0.5 });
        assert_eq!(c.target, StateSpec::File(PathBuf::from("./s.csv")));
        assert!(parse(&format!("{BASE}[control]\ninit = mode:0\n")).is_err());
        let s = StateSpec::Mode { k: 2, amplitude: 0.5 }.build(3).unwrap();
        assert_eq!(s.a, vec![0.0, 0.5, 0.0]);
    }
}
