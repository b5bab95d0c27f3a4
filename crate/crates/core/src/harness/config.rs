//! Experiment settings from `key=value` files and command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::studies::Component;
use crate::error::{Error, Result};
use crate::integrator::{Method, MethodConfig, PhasePoint, SolveMode};
use crate::systems::Builtin;

/// Keys accepted in config files; flags use the same names.
pub const KEYS: &[&str] = &[
    "system",
    "method",
    "n",
    "m",
    "q0",
    "p0",
    "h",
    "h-list",
    "steps",
    "t-end",
    "out",
    "plot",
    "tol",
    "max-iter",
    "mode",
    "component",
    "baseline",
];

/// Raw settings keyed by canonical flag name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

fn canonical(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-").to_ascii_lowercase()
}

impl Settings {
    /// Parse `key=value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::usage(format!("config line {}: expected key=value, got `{line}`", lineno + 1))
            })?;
            let key = canonical(k);
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::usage(format!("config line {}: unknown key `{}`", lineno + 1, k.trim())));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(canonical(key), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(&canonical(key)).map(String::as_str)
    }

    /// `other` wins on conflicts.
    pub fn overlay(mut self, other: Settings) -> Self {
        self.0.extend(other.0);
        self
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::usage(format!("invalid value `{v}` for {key}")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_floats(key, v)).transpose()
    }
}

/// Comma-separated floats.
pub fn parse_floats(key: &str, v: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = v
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::usage(format!("invalid number `{}` in {key}", x.trim())))
        })
        .collect::<Result<_>>()?;
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::usage(format!("{key} must contain finite numbers")));
    }
    Ok(out)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "" | "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::usage(format!("invalid boolean `{v}` for {key}"))),
    }
}

/// Fully resolved experiment settings. Step size and horizon stay optional
/// so each subcommand can apply its own defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: Builtin,
    pub method: MethodConfig,
    pub initial: PhasePoint,
    pub h: Option<f64>,
    pub h_list: Option<Vec<f64>>,
    pub steps: Option<usize>,
    pub t_end: Option<f64>,
    pub out: Option<PathBuf>,
    pub plot: bool,
    pub component: Component,
    pub baseline: Option<Method>,
}

/// Default initial position: the oscillator and pendulum start at 1, Duffing
/// at 0.5 (its q = 1 is an equilibrium).
pub fn default_q0(system: Builtin) -> f64 {
    match system {
        Builtin::Duffing => 0.5,
        _ => 1.0,
    }
}

impl ExperimentConfig {
    pub fn resolve(s: &Settings) -> Result<Self> {
        let system: Builtin = s.get("system").unwrap_or("sho").parse()?;
        let n: Option<usize> = s.parsed("n")?;
        let m: Option<usize> = s.parsed("m")?;
        let method = resolve_method(s.get("method").unwrap_or("hem"), n, m)?;
        let mut mc = MethodConfig::new(method);
        if let Some(tol) = s.parsed::<f64>("tol")? {
            mc.tol = tol;
        }
        if let Some(it) = s.parsed::<usize>("max-iter")? {
            mc.max_iter = it;
        }
        if let Some(mode) = s.get("mode") {
            mc.mode = mode.parse::<SolveMode>()?;
        }
        mc.validate()?;

        let q0 = s.list("q0")?.unwrap_or_else(|| vec![default_q0(system)]);
        let p0 = s.list("p0")?.unwrap_or_else(|| vec![0.0; q0.len()]);
        if q0.len() != 1 || p0.len() != 1 {
            return Err(Error::usage(format!(
                "system `{system}` has dimension 1; got q0 of length {} and p0 of length {}",
                q0.len(),
                p0.len()
            )));
        }
        let h: Option<f64> = s.parsed("h")?;
        if let Some(h) = h {
            if h == 0.0 || !h.is_finite() {
                return Err(Error::usage("h must be finite and nonzero"));
            }
        }
        let h_list = s.list("h-list")?;
        let steps: Option<usize> = s.parsed("steps")?;
        if steps == Some(0) {
            return Err(Error::usage("steps must be at least 1"));
        }
        let t_end: Option<f64> = s.parsed("t-end")?;
        if let Some(t) = t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::usage("t-end must be positive"));
            }
        }
        if steps.is_some() && t_end.is_some() {
            return Err(Error::usage("give either steps or t-end, not both"));
        }
        let plot = s.get("plot").map(|v| parse_bool("plot", v)).transpose()?.unwrap_or(false);
        Ok(Self {
            system,
            method: mc,
            initial: PhasePoint::new(q0, p0, 0.0),
            h,
            h_list,
            steps,
            t_end,
            out: s.get("out").map(PathBuf::from),
            plot,
            component: s.get("component").map(str::parse).transpose()?.unwrap_or_default(),
            baseline: s.get("baseline").map(str::parse).transpose()?,
        })
    }

    /// Number of steps from `steps` or `t_end`, with the given default horizon.
    pub fn step_count(&self, h: f64, default_t_end: f64) -> Result<usize> {
        match self.steps {
            Some(k) => Ok(k),
            None => super::studies::steps_for(self.t_end.unwrap_or(default_t_end), h.abs()),
        }
    }
}

/// `hem` with `n`/`m` keys, `hem(n,m)`, `gauss2` or `midpoint`.
fn resolve_method(name: &str, n: Option<usize>, m: Option<usize>) -> Result<Method> {
    let bare = name.trim().eq_ignore_ascii_case("hem");
    if bare {
        let n = n.unwrap_or(3);
        let m = m.unwrap_or(n / 2);
        let method = Method::hem(n, m);
        method.validate()?;
        return Ok(method);
    }
    let method: Method = name.parse()?;
    match method {
        Method::Hem { n: n0, m: m0 } => {
            if n.is_some_and(|n| n != n0) || m.is_some_and(|m| m != m0) {
                return Err(Error::usage(format!("--n/--m conflict with method {method}")));
            }
        }
        _ => {
            if n.is_some() || m.is_some() {
                return Err(Error::usage(format!("--n/--m only apply to hem, not {method}")));
            }
        }
    }
    Ok(method)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_with_comments() {
        let s = Settings::parse("# run\nsystem = pendulum\n\nh_list=0.2,0.1,0.05 # three\nplot\n=x\n")
            .unwrap_err();
        assert!(matches!(s, Error::Usage(_)));
        let s = Settings::parse("# run\nsystem = pendulum\n\nh_list=0.2,0.1,0.05 # three\nplot=yes\n").unwrap();
        assert_eq!(s.get("system"), Some("pendulum"));
        assert_eq!(s.get("h-list"), Some("0.2,0.1,0.05"));
        let c = ExperimentConfig::resolve(&s).unwrap();
        assert_eq!(c.system, Builtin::Pendulum);
        assert_eq!(c.h_list, Some(vec![0.2, 0.1, 0.05]));
        assert!(c.plot);
        assert_eq!(c.method.method, Method::hem(3, 1));
        assert_eq!(c.initial.q, vec![1.0]);
    }

    #[test]
    fn flags_override_file() {
        let file = Settings::parse("system=duffing\nmethod=midpoint\nh=0.2").unwrap();
        let mut flags = Settings::default();
        flags.set("method", "hem");
        flags.set("n", "2");
        let c = ExperimentConfig::resolve(&file.overlay(flags)).unwrap();
        assert_eq!(c.method.method, Method::hem(2, 1));
        assert_eq!(c.h, Some(0.2));
        assert_eq!(c.initial.q, vec![0.5]);
    }

    #[test]
    fn rejects_bad_settings() {
        for text in [
            "colour=red",
            "system=kepler",
            "method=hem\nn=3\nm=2",
            "method=gauss2\nn=3",
            "method=hem(3,1)\nn=4",
            "h=0",
            "steps=10\nt-end=1",
            "q0=1,2",
            "tol=abc",
            "component=r",
        ] {
            let s = Settings::parse(text);
            let r = s.and_then(|s| ExperimentConfig::resolve(&s));
            assert!(matches!(r, Err(Error::Usage(_))), "{text}");
        }
    }

    #[test]
    fn step_count_from_horizon() {
        let mut s = Settings::default();
        s.set("t-end", "10");
        let c = ExperimentConfig::resolve(&s).unwrap();
        assert_eq!(c.step_count(0.1, 1.0).unwrap(), 100);
        let c = ExperimentConfig::resolve(&Settings::default()).unwrap();
        assert_eq!(c.step_count(0.2, 1000.0).unwrap(), 5000);
    }
}
