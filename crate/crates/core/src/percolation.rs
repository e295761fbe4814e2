//! Empirical percolation curve `λ ↦ θ̂(λ)`.
//!
//! `θ(λ)` has no closed form, so it is estimated as the mean fraction of
//! points in the largest component of finite-window graphs. The resulting
//! [`ThetaTable`] is what every analytical formula in [`crate::analysis`]
//! consumes.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::round_trip;
use crate::graph::Network;
use crate::pointproc::{sample_ppp, SimDomain};
use crate::rgg::{build_rgg, components, extended_cluster, largest_component_fraction};
use crate::seed::{derive_stream, trial_id, SeedSpec};
use crate::stats::{mean_se, Estimate};
use crate::LAMBDA_C;

/// Provenance of a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaMeta {
    pub window_m: u64,
    pub trials: usize,
    pub master_seed: u64,
    /// Interpolate the isotonic fit instead of the raw estimates.
    pub smoothed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTable {
    lambda_grid: Vec<f64>,
    theta_hat: Vec<f64>,
    std_err: Vec<f64>,
    meta: ThetaMeta,
    fitted: Vec<f64>,
}

impl ThetaTable {
    pub fn new(lambda_grid: Vec<f64>, theta_hat: Vec<f64>, std_err: Vec<f64>, meta: ThetaMeta) -> Result<Self> {
        if lambda_grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if theta_hat.len() != lambda_grid.len() || std_err.len() != lambda_grid.len() {
            return Err(Error::InvalidParams("table columns differ in length".into()));
        }
        if lambda_grid.iter().any(|l| !l.is_finite() || *l <= 0.0) || lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("lambda grid must be positive and strictly ascending".into()));
        }
        if theta_hat.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidParams("theta estimates must lie in [0, 1]".into()));
        }
        if std_err.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidParams("standard errors must be finite and nonnegative".into()));
        }
        let fitted = if meta.smoothed {
            isotonic_fit_weighted(&theta_hat, &precision_weights(&std_err))
        } else {
            theta_hat.clone()
        };
        Ok(Self {
            lambda_grid,
            theta_hat,
            std_err,
            meta,
            fitted,
        })
    }

    /// A table with `θ = value` from `lambda_min` on (stub for tests and
    /// degenerate cases).
    pub fn constant(lambda_min: f64, lambda_max: f64, value: f64) -> Result<Self> {
        Self::new(
            vec![lambda_min, lambda_max],
            vec![value, value],
            vec![0.0, 0.0],
            ThetaMeta {
                window_m: 0,
                trials: 0,
                master_seed: 0,
                smoothed: false,
            },
        )
    }

    pub fn lambda_grid(&self) -> &[f64] {
        &self.lambda_grid
    }

    pub fn theta_hat(&self) -> &[f64] {
        &self.theta_hat
    }

    pub fn std_err(&self) -> &[f64] {
        &self.std_err
    }

    /// Values used for interpolation (isotonic fit when smoothed).
    pub fn fitted(&self) -> &[f64] {
        &self.fitted
    }

    pub fn meta(&self) -> &ThetaMeta {
        &self.meta
    }

    pub fn lambda_c(&self) -> f64 {
        LAMBDA_C
    }

    pub fn len(&self) -> usize {
        self.lambda_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_grid.is_empty()
    }

    pub fn max_std_err(&self) -> f64 {
        self.std_err.iter().copied().fold(0.0, f64::max)
    }

    /// Largest change made by the isotonic fit, in units of the pointwise
    /// standard error. Points with zero error count only if they move.
    pub fn isotonic_deviation(&self) -> f64 {
        let fit = isotonic_fit_weighted(&self.theta_hat, &precision_weights(&self.std_err));
        fit.iter()
            .zip(&self.theta_hat)
            .zip(&self.std_err)
            .map(|((f, t), s)| {
                let d = (f - t).abs();
                if d <= 1e-12 {
                    0.0
                } else if *s > 0.0 {
                    d / s
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    /// Interpolated standard error at `lam` (0 outside the grid).
    pub fn std_err_at(&self, lam: f64) -> f64 {
        interpolate(&self.lambda_grid, &self.std_err, lam, 0.0)
    }

    /// CSV rendering; `comments` are written as extra `# ` lines after the
    /// metadata header.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        let m = &self.meta;
        let _ = writeln!(
            out,
            "# m={} trials={} seed={} smoothed={}",
            m.window_m, m.trials, m.master_seed, m.smoothed
        );
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push_str("lambda,theta_hat,std_err\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{}",
                round_trip(self.lambda_grid[i]),
                round_trip(self.theta_hat[i]),
                round_trip(self.std_err[i])
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = None;
        let (mut lambda, mut theta, mut se) = (Vec::new(), Vec::new(), Vec::new());
        let parse_err = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if meta.is_none() {
                    meta = Some(parse_meta(rest).map_err(|m| parse_err(no, m))?);
                }
                continue;
            }
            if line.starts_with("lambda") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(parse_err(no, format!("expected 3 fields, got {}", fields.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(no, format!("{s:?}: {e}")));
            lambda.push(num(fields[0])?);
            theta.push(num(fields[1])?);
            se.push(num(fields[2])?);
        }
        let meta = meta.ok_or_else(|| parse_err(0, "missing '# m=... trials=... seed=... smoothed=...' header".into()))?;
        Self::new(lambda, theta, se, meta)
    }
}

fn parse_meta(header: &str) -> std::result::Result<ThetaMeta, String> {
    let (mut m, mut trials, mut seed, mut smoothed) = (None, None, None, None);
    for tok in header.split_whitespace() {
        let Some((k, v)) = tok.split_once('=') else {
            return Err(format!("malformed header token {tok:?}"));
        };
        let bad = |e: &dyn std::fmt::Display| format!("{k}={v}: {e}");
        match k {
            "m" => m = Some(v.parse().map_err(|e| bad(&e))?),
            "trials" => trials = Some(v.parse().map_err(|e| bad(&e))?),
            "seed" => seed = Some(v.parse().map_err(|e| bad(&e))?),
            "smoothed" => smoothed = Some(v.parse().map_err(|e| bad(&e))?),
            _ => return Err(format!("unknown header key {k:?}")),
        }
    }
    match (m, trials, seed, smoothed) {
        (Some(window_m), Some(trials), Some(master_seed), Some(smoothed)) => Ok(ThetaMeta {
            window_m,
            trials,
            master_seed,
            smoothed,
        }),
        _ => Err("header needs m, trials, seed and smoothed".into()),
    }
}

/// Nondecreasing least-squares fit (pool adjacent violators).
pub fn isotonic_fit(values: &[f64]) -> Vec<f64> {
    isotonic_fit_weighted(values, &vec![1.0; values.len()])
}

/// Weighted least-squares nondecreasing fit (pool adjacent violators).
pub fn isotonic_fit_weighted(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // blocks of (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() >= 2 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (m2, w2, l2) = blocks.pop().unwrap();
            let (m1, w1, l1) = blocks.pop().unwrap();
            let w = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / w, w, l1 + l2));
        }
    }
    blocks.into_iter().flat_map(|(m, _, l)| std::iter::repeat_n(m, l)).collect()
}

/// Inverse-variance weights for [`isotonic_fit_weighted`].
pub fn precision_weights(std_err: &[f64]) -> Vec<f64> {
    std_err.iter().map(|s| 1.0 / (s * s + 1e-30)).collect()
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64, below: f64) -> f64 {
    if x.is_nan() || x < xs[0] {
        return below;
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    // first index with xs[i] > x; x lies in [xs[i-1], xs[i])
    let i = xs.partition_point(|&g| g <= x);
    let (x0, x1) = (xs[i - 1], xs[i]);
    if x == x0 {
        return ys[i - 1];
    }
    let w = (x - x0) / (x1 - x0);
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

/// `θ̂(lam)` by piecewise-linear interpolation; 0 below the grid, the last
/// value above it.
pub fn theta_at(table: &ThetaTable, lam: f64) -> f64 {
    interpolate(&table.lambda_grid, &table.fitted, lam, 0.0).clamp(0.0, 1.0)
}

/// Intensity grid `lambda_min, lambda_min + step, ..., <= lambda_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub step: f64,
}

impl LambdaGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let LambdaGrid {
            lambda_min,
            lambda_max,
            step,
        } = *self;
        if !(lambda_min.is_finite() && lambda_min > 0.0) || !(step.is_finite() && step > 0.0) || !lambda_max.is_finite() {
            return Err(Error::InvalidParams(format!(
                "need lambda_min > 0 and step > 0, got min={lambda_min} step={step}"
            )));
        }
        if lambda_max < lambda_min {
            return Err(Error::EmptyGrid);
        }
        let count = ((lambda_max - lambda_min) / step + 1e-9).floor() as usize + 1;
        // Snap to 1e-10 so that e.g. 1.0 + 3·0.05 prints as 1.15.
        Ok((0..count)
            .map(|i| ((lambda_min + i as f64 * step) * 1e10).round() / 1e10)
            .collect())
    }
}

/// Estimates `θ̂` on every grid intensity from `trials` graphs on the window
/// `Γ_{window_m}`.
pub fn estimate_theta_curve(
    grid: LambdaGrid,
    window_m: u64,
    trials: usize,
    master_seed: u64,
    smoothed: bool,
) -> Result<ThetaTable> {
    if trials < 2 {
        return Err(Error::InvalidParams("need at least 2 trials per grid point".into()));
    }
    let lambdas = grid.points()?;
    let side = window_m as f64;
    let domains = lambdas
        .iter()
        .map(|&l| SimDomain::unit(side, l))
        .collect::<Result<Vec<_>>>()?;
    let values = (0..lambdas.len() * trials)
        .into_par_iter()
        .map(|item| {
            let (gi, t) = (item / trials, item % trials);
            let seed = SeedSpec::geometry(master_seed, trial_id(gi as u32, t as u32));
            let graph = build_rgg(sample_ppp(&domains[gi], seed)?);
            Ok(largest_component_fraction(&graph))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (theta, se): (Vec<f64>, Vec<f64>) = values
        .chunks(trials)
        .map(|c| {
            let e = mean_se(c);
            (e.mean.clamp(0.0, 1.0), e.std_err)
        })
        .unzip();
    ThetaTable::new(
        lambdas,
        theta,
        se,
        ThetaMeta {
            window_m,
            trials,
            master_seed,
            smoothed,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Supercritical,
    Subcritical,
}

/// One limit identity checked by Monte Carlo.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub name: &'static str,
    pub predicted: f64,
    pub estimate: Estimate,
    /// Standard error of the prediction itself (from the θ̂ table).
    pub predicted_se: f64,
    /// `None` when the identity does not apply in this regime.
    pub z: Option<f64>,
}

impl DiagnosticRow {
    pub fn applicable(&self) -> bool {
        self.z.is_some()
    }

    pub fn combined_se(&self) -> f64 {
        self.estimate.std_err.hypot(self.predicted_se)
    }

    /// `|estimate - predicted| <= k·SE + rel·|predicted|`.
    pub fn within(&self, k_se: f64, rel: f64) -> bool {
        (self.estimate.mean - self.predicted).abs() <= k_se * self.combined_se() + rel * self.predicted.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticReport {
    pub lambda: f64,
    pub p: f64,
    pub side_m: f64,
    pub trials: usize,
    pub regime: Regime,
    pub rows: Vec<DiagnosticRow>,
}

impl DiagnosticReport {
    pub fn row(&self, name: &str) -> Option<&DiagnosticRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.z).map(f64::abs).fold(0.0, f64::max)
    }
}

pub const ROW_DENSITY: &str = "point_density";
pub const ROW_RECIPROCAL: &str = "reciprocal_density";
pub const ROW_MARKED: &str = "marked_density";
pub const ROW_THINNED_GIANT: &str = "thinned_giant_fraction";
pub const ROW_EXTENDED_GIANT: &str = "extended_giant_fraction";

/// Monte Carlo checks of the ergodic limits behind the analysis: point
/// density, its reciprocal, marked density, the thinned giant fraction
/// `p·θ(λp)` and the extended giant fraction `θ(λp)`.
pub fn ergodic_diagnostics(
    domain: &SimDomain,
    p: f64,
    trials: usize,
    master_seed: u64,
    table: &ThetaTable,
) -> Result<DiagnosticReport> {
    crate::forwarding::check_probability(p)?;
    if trials < 2 {
        return Err(Error::InvalidParams("need at least 2 trials".into()));
    }
    let area = domain.area();
    let per_trial = (0..trials as u32)
        .into_par_iter()
        .map(|t| -> Result<[f64; 5]> {
            let geom = SeedSpec::geometry(master_seed, trial_id(t, 0));
            let graph = build_rgg(sample_ppp(domain, geom)?);
            let n = graph.node_count();
            let sampled = graph.points().sampled_count() as f64;
            let mut rng = derive_stream(geom.with_stream(1));
            let marks: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < p).collect();
            let marked = marks.iter().filter(|&&m| m).count() as f64;
            let labels = components(&graph, Some(&marks));
            let (giant, ext) = match labels.largest_id() {
                Some(id) => (labels.size(id) as f64, extended_cluster(&graph, &labels, id)?.len() as f64),
                None => (0.0, 0.0),
            };
            Ok([
                sampled / area,
                if sampled > 0.0 { area / sampled } else { f64::INFINITY },
                marked / area,
                giant / n as f64,
                ext / n as f64,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let column = |c: usize| mean_se(&per_trial.iter().map(|r| r[c]).collect::<Vec<_>>());

    let lam = domain.intensity_lambda;
    let thinned = lam * p;
    let regime = if thinned > LAMBDA_C {
        Regime::Supercritical
    } else {
        Regime::Subcritical
    };
    let theta = theta_at(table, thinned);
    let theta_se = table.std_err_at(thinned);
    let make = |name, predicted: f64, predicted_se: f64, estimate: Estimate, applies: bool| {
        let mut row = DiagnosticRow {
            name,
            predicted,
            estimate,
            predicted_se,
            z: None,
        };
        if applies {
            let se = row.combined_se();
            row.z = Some(if se > 0.0 {
                (estimate.mean - predicted) / se
            } else if estimate.mean == predicted {
                0.0
            } else {
                f64::INFINITY
            });
        }
        row
    };
    let super_ = regime == Regime::Supercritical;
    let rows = vec![
        make(ROW_DENSITY, lam, 0.0, column(0), true),
        make(ROW_RECIPROCAL, 1.0 / lam, 0.0, column(1), true),
        make(ROW_MARKED, thinned, 0.0, column(2), true),
        make(ROW_THINNED_GIANT, p * theta, p * theta_se, column(3), super_),
        make(ROW_EXTENDED_GIANT, theta, theta_se, column(4), super_),
    ];
    Ok(DiagnosticReport {
        lambda: lam,
        p,
        side_m: domain.side_m,
        trials,
        regime,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(lams: &[f64], thetas: &[f64], smoothed: bool) -> ThetaTable {
        ThetaTable::new(
            lams.to_vec(),
            thetas.to_vec(),
            vec![0.01; lams.len()],
            ThetaMeta {
                window_m: 10,
                trials: 5,
                master_seed: 1,
                smoothed,
            },
        )
        .unwrap()
    }

    #[test]
    fn interpolation_rules() {
        let t = table(&[1.0, 2.0, 3.0], &[0.1, 0.5, 0.9], false);
        assert_eq!(theta_at(&t, 2.0), 0.5);
        assert_eq!(theta_at(&t, 1.0), 0.1);
        assert!((theta_at(&t, 1.5) - 0.3).abs() < 1e-15);
        assert_eq!(theta_at(&t, 0.5), 0.0);
        assert_eq!(theta_at(&t, 7.0), 0.9);
        assert_eq!(theta_at(&t, f64::NAN), 0.0);
    }

    #[test]
    fn pava() {
        assert_eq!(isotonic_fit(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic_fit(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(isotonic_fit(&[0.1, 0.2]), vec![0.1, 0.2]);
        assert!(isotonic_fit(&[]).is_empty());
        let w = isotonic_fit_weighted(&[1.0, 0.0], &[3.0, 1.0]);
        assert_eq!(w, vec![0.75, 0.75]);
        assert_eq!(isotonic_fit_weighted(&[2.0, 1.0, 3.0], &[1.0, 1.0, 1.0]), isotonic_fit(&[2.0, 1.0, 3.0]));
    }

    #[test]
    fn smoothed_interpolates_fit() {
        let t = table(&[1.0, 2.0, 3.0], &[0.2, 0.6, 0.4], true);
        assert_eq!(theta_at(&t, 2.0), 0.5);
        assert_eq!(t.theta_hat()[1], 0.6);
        assert!((t.isotonic_deviation() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        let meta = ThetaMeta {
            window_m: 1,
            trials: 2,
            master_seed: 0,
            smoothed: false,
        };
        assert!(matches!(ThetaTable::new(vec![], vec![], vec![], meta), Err(Error::EmptyGrid)));
        assert!(ThetaTable::new(vec![2.0, 1.0], vec![0.1, 0.2], vec![0.0, 0.0], meta).is_err());
        assert!(ThetaTable::new(vec![1.0], vec![1.2], vec![0.0], meta).is_err());
        assert!(ThetaTable::new(vec![1.0], vec![0.2], vec![0.0, 0.1], meta).is_err());
    }

    #[test]
    fn grid_points() {
        let g = LambdaGrid {
            lambda_min: 1.0,
            lambda_max: 5.0,
            step: 0.05,
        };
        let pts = g.points().unwrap();
        assert_eq!(pts.len(), 81);
        assert_eq!(pts[3], 1.15);
        assert_eq!(*pts.last().unwrap(), 5.0);
        let fine = LambdaGrid { step: 0.01, ..g }.points().unwrap();
        assert_eq!(fine.len(), 401);
        assert!(LambdaGrid { lambda_max: 0.5, ..g }.points().is_err());
        assert!(LambdaGrid { step: 0.0, ..g }.points().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = ThetaTable::new(
            vec![1.0, 1.05, 1.1],
            vec![0.012345678901234, 1.0 / 3.0, 0.9],
            vec![0.001, 2.0f64.sqrt() / 100.0, 0.0],
            ThetaMeta {
                window_m: 101,
                trials: 20,
                master_seed: 7,
                smoothed: true,
            },
        )
        .unwrap();
        let text = t.to_csv(&["config lambda=4.5".to_string()]);
        assert!(text.starts_with("# m=101 trials=20 seed=7 smoothed=true\n"));
        let back = ThetaTable::from_csv(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv(&["config lambda=4.5".to_string()]), text);
    }

    #[test]
    fn csv_errors() {
        assert!(ThetaTable::from_csv("lambda,theta_hat,std_err\n1,0.5,0\n").is_err());
        assert!(ThetaTable::from_csv("# m=1 trials=2 seed=3 smoothed=false\n1,0.5\n").is_err());
        assert!(ThetaTable::from_csv("# m=1 trials=2 seed=3\n1,0.5,0\n").is_err());
        assert!(ThetaTable::from_csv("# m=1 trials=2 seed=3 smoothed=false\n1,abc,0\n").is_err());
    }

    #[test]
    fn small_curve_is_deterministic() {
        let g = LambdaGrid {
            lambda_min: 1.0,
            lambda_max: 3.0,
            step: 1.0,
        };
        let a = estimate_theta_curve(g, 20, 4, 11, true).unwrap();
        let b = estimate_theta_curve(g, 20, 4, 11, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.theta_hat().iter().all(|t| (0.0..=1.0).contains(t)));
        assert!(estimate_theta_curve(g, 20, 1, 11, true).is_err());
    }

    #[test]
    fn subcritical_rows_flagged() {
        let d = SimDomain::unit(20.0, 4.5).unwrap();
        let t = table(&[1.0, 5.0], &[0.5, 1.0], false);
        let r = ergodic_diagnostics(&d, 0.2, 4, 1, &t).unwrap();
        assert_eq!(r.regime, Regime::Subcritical);
        assert!(r.row(ROW_DENSITY).unwrap().applicable());
        assert!(!r.row(ROW_THINNED_GIANT).unwrap().applicable());
        assert!(!r.row(ROW_EXTENDED_GIANT).unwrap().applicable());
    }
}
