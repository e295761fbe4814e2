//! Experiment configuration: defaults, presets, `key=value` files and
//! command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use codedcast::fmt::round_trip;
use codedcast::percolation::LambdaGrid;
use codedcast::{Condition, Method, SimDomain, TrialsSpec};

/// Inclusive range of packet counts; `a` or `a..b` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub start: usize,
    pub end: usize,
}

impl NRange {
    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }

    pub fn is_single(&self) -> bool {
        self.start == self.end
    }
}

impl FromStr for NRange {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| t.trim().parse::<usize>().with_context(|| format!("bad packet count {t:?}"));
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if start == 0 || end < start {
            bail!("invalid packet range {s:?}");
        }
        Ok(Self { start, end })
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single() {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}..{}", self.start, self.end)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Fast,
    Paper,
}

impl FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Preset::Fast),
            "paper" => Ok(Preset::Paper),
            _ => Err(anyhow!("unknown preset {s:?} (expected fast or paper)")),
        }
    }
}

pub fn parse_method(s: &str) -> Result<Method> {
    match s {
        "simulated" => Ok(Method::Simulated),
        "mean-field" | "mean_field" => Ok(Method::MeanField),
        _ => Err(anyhow!("unknown method {s:?} (expected simulated or mean-field)")),
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Simulated => "simulated",
        Method::MeanField => "mean-field",
    }
}

pub fn parse_condition(s: &str) -> Result<Condition> {
    match s {
        "none" => Ok(Condition::None),
        "giant" => Ok(Condition::Giant),
        _ => Err(anyhow!("unknown condition {s:?} (expected none or giant)")),
    }
}

pub fn condition_name(c: Condition) -> &'static str {
    match c {
        Condition::None => "none",
        Condition::Giant => "giant",
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lambda: f64,
    pub m: f64,
    pub r: f64,
    pub k: usize,
    pub n: NRange,
    pub delta: f64,
    pub p: f64,
    pub graph_trials: usize,
    pub fwd_trials: usize,
    /// Graphs per grid point for `theta`, graphs for `diagnostics`.
    pub trials: usize,
    pub theta_m: u64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
    pub smoothed: bool,
    pub theta_table: Option<PathBuf>,
    pub method: Method,
    pub condition: Condition,
    pub seed: u64,
    pub grid_resolution: u32,
    /// Bisect simulated searches down to the tolerance instead of stopping
    /// within one standard error of the target.
    pub exact_search: bool,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut cfg = Self {
            lambda: 4.5,
            m: 101.0,
            r: 1.0,
            k: 20,
            n: NRange { start: 20, end: 40 },
            delta: 0.1,
            p: 0.6,
            graph_trials: 10,
            fwd_trials: 20,
            trials: 0,
            theta_m: 0,
            lambda_min: 0.0,
            lambda_max: 0.0,
            lambda_step: 0.0,
            smoothed: true,
            theta_table: None,
            method: Method::Simulated,
            condition: Condition::None,
            seed: 1,
            grid_resolution: codedcast::analysis::DEFAULT_GRID,
            exact_search: false,
            out: None,
            workers: None,
        };
        cfg.apply_preset(Preset::Paper);
        cfg
    }
}

/// Keys that never influence results and are left out of output headers.
const RUN_ONLY: &[&str] = &["out", "workers"];

impl ExperimentConfig {
    pub fn apply_preset(&mut self, preset: Preset) {
        let (m, step, trials) = match preset {
            Preset::Fast => (101, 0.05, 20),
            Preset::Paper => (251, 0.01, 100),
        };
        self.theta_m = m;
        self.lambda_min = 1.0;
        self.lambda_max = 5.0;
        self.lambda_step = step;
        self.trials = trials;
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = |what: &str| anyhow!("invalid value {v:?} for {what}");
        match key {
            "lambda" => self.lambda = v.parse().map_err(|_| num(key))?,
            "m" => self.m = v.parse().map_err(|_| num(key))?,
            "r" => self.r = v.parse().map_err(|_| num(key))?,
            "k" => self.k = v.parse().map_err(|_| num(key))?,
            "n" => self.n = v.parse()?,
            "delta" => self.delta = v.parse().map_err(|_| num(key))?,
            "p" => self.p = v.parse().map_err(|_| num(key))?,
            "graph_trials" => self.graph_trials = v.parse().map_err(|_| num(key))?,
            "fwd_trials" => self.fwd_trials = v.parse().map_err(|_| num(key))?,
            "trials" => self.trials = v.parse().map_err(|_| num(key))?,
            "theta_m" => self.theta_m = v.parse().map_err(|_| num(key))?,
            "lambda_min" => self.lambda_min = v.parse().map_err(|_| num(key))?,
            "lambda_max" => self.lambda_max = v.parse().map_err(|_| num(key))?,
            "lambda_step" => self.lambda_step = v.parse().map_err(|_| num(key))?,
            "smoothed" => self.smoothed = v.parse().map_err(|_| num(key))?,
            "theta_table" => self.theta_table = Some(PathBuf::from(v)),
            "method" => self.method = parse_method(v)?,
            "condition" => self.condition = parse_condition(v)?,
            "seed" => self.seed = v.parse().map_err(|_| num(key))?,
            "grid_resolution" => self.grid_resolution = v.parse().map_err(|_| num(key))?,
            "exact_search" => self.exact_search = v.parse().map_err(|_| num(key))?,
            "out" => self.out = Some(PathBuf::from(v)),
            "workers" => self.workers = Some(v.parse().map_err(|_| num(key))?),
            "preset" => self.apply_preset(v.parse()?),
            _ => bail!("unknown config key {key:?}"),
        }
        Ok(())
    }

    /// Applies a `key=value` file (blank lines and `#` comments ignored).
    /// A `preset` key is applied before the others.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        let mut pairs = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value, got {line:?}", no + 1))?;
            pairs.push((no + 1, k.trim().to_string(), v.trim().to_string()));
        }
        pairs.sort_by_key(|(_, k, _)| k != "preset");
        for (no, k, v) in pairs {
            self.set(&k, &v).with_context(|| format!("line {no}"))?;
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("lambda", round_trip(self.lambda)),
            ("m", round_trip(self.m)),
            ("r", round_trip(self.r)),
            ("k", self.k.to_string()),
            ("n", self.n.to_string()),
            ("delta", round_trip(self.delta)),
            ("p", round_trip(self.p)),
            ("graph_trials", self.graph_trials.to_string()),
            ("fwd_trials", self.fwd_trials.to_string()),
            ("trials", self.trials.to_string()),
            ("theta_m", self.theta_m.to_string()),
            ("lambda_min", round_trip(self.lambda_min)),
            ("lambda_max", round_trip(self.lambda_max)),
            ("lambda_step", round_trip(self.lambda_step)),
            ("smoothed", self.smoothed.to_string()),
        ];
        if let Some(t) = &self.theta_table {
            out.push(("theta_table", t.display().to_string()));
        }
        out.extend([
            ("method", method_name(self.method).to_string()),
            ("condition", condition_name(self.condition).to_string()),
            ("seed", self.seed.to_string()),
            ("grid_resolution", self.grid_resolution.to_string()),
            ("exact_search", self.exact_search.to_string()),
        ]);
        if let Some(o) = &self.out {
            out.push(("out", o.display().to_string()));
        }
        if let Some(w) = self.workers {
            out.push(("workers", w.to_string()));
        }
        out
    }

    /// Every key as a `key=value` line.
    pub fn render(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Result-affecting keys, for output headers.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        self.entries().into_iter().filter(|(k, _)| !RUN_ONLY.contains(k)).collect()
    }

    pub fn echo_lines(&self) -> Vec<String> {
        self.echo().into_iter().map(|(k, v)| format!("{k}={v}")).collect()
    }

    pub fn domain(&self) -> Result<SimDomain> {
        Ok(SimDomain::new(self.m, self.lambda, self.r)?)
    }

    pub fn trials_spec(&self) -> TrialsSpec {
        TrialsSpec::new(self.graph_trials, self.fwd_trials).with_condition(self.condition)
    }

    pub fn lambda_grid(&self) -> LambdaGrid {
        LambdaGrid {
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            step: self.lambda_step,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    impl ExperimentConfig {
        fn parse(text: &str) -> Result<Self> {
            let mut cfg = Self::default();
            cfg.merge_text(text)?;
            Ok(cfg)
        }
    }

    #[test]
    fn defaults() {
        let c = ExperimentConfig::default();
        assert_eq!((c.lambda, c.m, c.k, c.delta), (4.5, 101.0, 20, 0.1));
        assert_eq!(c.n, NRange { start: 20, end: 40 });
        assert_eq!((c.graph_trials, c.fwd_trials), (10, 20));
        assert_eq!((c.theta_m, c.trials, c.lambda_step), (251, 100, 0.01));
    }

    #[test]
    fn presets() {
        let fast = ExperimentConfig::parse("preset=fast\n").unwrap();
        assert_eq!((fast.theta_m, fast.trials, fast.lambda_step), (101, 20, 0.05));
        assert_eq!((fast.lambda_min, fast.lambda_max), (1.0, 5.0));
        // explicit keys win over the preset regardless of order
        let c = ExperimentConfig::parse("trials=7\npreset=fast\n").unwrap();
        assert_eq!(c.trials, 7);
    }

    #[test]
    fn round_trip_render() {
        let c = ExperimentConfig {
            lambda: 0.1 + 0.2,
            n: "22..31".parse().unwrap(),
            method: Method::MeanField,
            condition: Condition::Giant,
            theta_table: Some("table.csv".into()),
            workers: Some(3),
            seed: u64::MAX,
            exact_search: true,
            ..ExperimentConfig::default()
        };
        assert_eq!(ExperimentConfig::parse(&c.render()).unwrap(), c);
        assert_eq!(ExperimentConfig::parse(&ExperimentConfig::default().render()).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn comments_and_errors() {
        let c = ExperimentConfig::parse("# note\n\n  k = 5 \nn=7\n").unwrap();
        assert_eq!(c.k, 5);
        assert_eq!(c.n, NRange { start: 7, end: 7 });
        assert!(ExperimentConfig::parse("bogus=1").is_err());
        assert!(ExperimentConfig::parse("k").is_err());
        assert!(ExperimentConfig::parse("n=5..3").is_err());
        assert!(ExperimentConfig::parse("method=exact").is_err());
    }

    #[test]
    fn echo_skips_run_only_keys() {
        let c = ExperimentConfig {
            workers: Some(8),
            out: Some("x".into()),
            ..ExperimentConfig::default()
        };
        assert!(c.echo().iter().all(|(k, _)| *k != "workers" && *k != "out"));
    }
}
