//! `key = value` run settings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    MaxSubset,
    Random,
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "max_subset" => Ok(Strategy::MaxSubset),
            "random" => Ok(Strategy::Random),
            _ => Err(format!("unknown strategy `{s}` (expected max_subset or random)")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::MaxSubset => "max_subset",
            Strategy::Random => "random",
        })
    }
}

/// How conflicts are settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Priority filter then arbitration.
    #[default]
    Supervisor,
    /// Round-robin negotiation over the agents' conflict policies first.
    Negotiate,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "supervisor" => Ok(Mode::Supervisor),
            "negotiate" => Ok(Mode::Negotiate),
            _ => Err(format!("unknown mode `{s}` (expected supervisor or negotiate)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Supervisor => "supervisor",
            Mode::Negotiate => "negotiate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub horizon: u32,
    /// Theory files, resolved against the settings file's directory.
    pub theories: Vec<PathBuf>,
    pub strategy: Strategy,
    pub mode: Mode,
    pub seed: u64,
    pub deterministic: bool,
    pub max_replans: u32,
    pub node_budget: u64,
    /// Upper bound on simultaneous actions per agent and step; `None` is unbounded.
    pub max_set_size: Option<usize>,
    /// `render.*` keys with the prefix stripped.
    pub render: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            horizon: 1,
            theories: Vec::new(),
            strategy: Strategy::default(),
            mode: Mode::default(),
            seed: 0,
            deterministic: true,
            max_replans: 50,
            node_budget: 200_000,
            max_set_size: None,
            render: BTreeMap::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SettingsError {
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, SettingsError> {
    v.parse().map_err(|_| SettingsError::Invalid { line, message: format!("invalid value `{v}` for `{key}`") })
}

/// Parses settings text. Relative theory paths are joined onto `base`.
pub fn parse_settings(text: &str, base: &Path) -> Result<Settings, SettingsError> {
    let mut s = Settings::default();
    let mut horizon = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(SettingsError::Invalid { line, message: format!("expected `key = value`, found `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        let invalid = |message: String| SettingsError::Invalid { line, message };
        match key {
            "horizon" => {
                let h: i64 = parse_value(line, key, value)?;
                if h < 0 || h > u32::MAX as i64 {
                    return Err(invalid(format!("horizon must not be negative, got {h}")));
                }
                horizon = Some(h as u32);
            }
            "theory" => s.theories.push(base.join(value)),
            "strategy" => s.strategy = value.parse().map_err(invalid)?,
            "mode" => s.mode = value.parse().map_err(invalid)?,
            "seed" => s.seed = parse_value(line, key, value)?,
            "deterministic" => s.deterministic = parse_value(line, key, value)?,
            "max_replans" => s.max_replans = parse_value(line, key, value)?,
            "node_budget" => s.node_budget = parse_value(line, key, value)?,
            "max_set_size" => {
                let n: usize = parse_value(line, key, value)?;
                if n == 0 {
                    return Err(invalid("max_set_size must be at least 1".into()));
                }
                s.max_set_size = Some(n);
            }
            k if k.starts_with("render.") && k.len() > 7 => {
                s.render.insert(k[7..].to_string(), value.to_string());
            }
            _ => return Err(invalid(format!("unknown key `{key}`"))),
        }
    }
    s.horizon = horizon.ok_or(SettingsError::Missing("horizon"))?;
    if s.theories.is_empty() {
        return Err(SettingsError::Missing("theory"));
    }
    Ok(s)
}

/// Reads and parses a settings file.
pub fn load_settings(path: &Path) -> Result<Settings, SettingsError> {
    let text = std::fs::read_to_string(path).map_err(|source| SettingsError::Io { path: path.to_path_buf(), source })?;
    parse_settings(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file() {
        let s = parse_settings(
            "# demo\nhorizon = 9\ntheory = a.baac\ntheory = b.baac\nstrategy = random\nmode = negotiate\nseed = 7\n\
             deterministic = false\nrender.kind = volleyball\n",
            Path::new("/d"),
        )
        .unwrap();
        assert_eq!(s.horizon, 9);
        assert_eq!(s.theories, vec![PathBuf::from("/d/a.baac"), PathBuf::from("/d/b.baac")]);
        assert_eq!(s.strategy, Strategy::Random);
        assert_eq!(s.mode, Mode::Negotiate);
        assert_eq!(s.seed, 7);
        assert!(!s.deterministic);
        assert_eq!(s.render["kind"], "volleyball");
    }

    #[test]
    fn defaults() {
        let s = parse_settings("horizon=3\ntheory=x", Path::new(".")).unwrap();
        assert_eq!(s.strategy, Strategy::MaxSubset);
        assert_eq!(s.mode, Mode::Supervisor);
        assert!(s.deterministic);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["horizon=-2\ntheory=x", "horizon=3\ntheory=x\ncolour=red", "theory=x", "horizon=2"] {
            assert!(parse_settings(bad, Path::new(".")).is_err(), "{bad}");
        }
    }
}
