//! Minimum forwarding probabilities, transmission counts and the
//! percolation-based approximations for them.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::sig6;
use crate::forwarding::crn::{CrnPanel, PGrid};
use crate::forwarding::TrialsSpec;
use crate::graph::Network;
use crate::percolation::{theta_at, ThetaTable};
use crate::pointproc::{sample_ppp, SimDomain};
use crate::rgg::{build_rgg, components};
use crate::seed::{derive_stream, trial_id, SeedSpec};
use crate::stats::Estimate;
use crate::LAMBDA_C;

/// Bracket width at which the simulated search stops.
pub const SIMULATED_TOLERANCE: f64 = 1e-3;
/// Resolution of the table-driven search.
pub const MEAN_FIELD_TOLERANCE: f64 = 1e-4;
/// Default number of grid steps on `[0, 1]` for simulated searches.
pub const DEFAULT_GRID: u32 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Simulated,
    MeanField,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Simulated => "simulated",
            Method::MeanField => "mean_field",
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("delta must lie in (0, 1), got {delta}")))
    }
}

fn check_kn(k: usize, n: usize) -> Result<()> {
    if k >= 1 && k <= n {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("need 1 <= k <= n, got k={k} n={n}")))
    }
}

/// Lower end of every `p` search: `λ_c / λ`.
fn search_floor(lam: f64) -> Result<f64> {
    if !(lam.is_finite() && lam > LAMBDA_C) {
        return Err(Error::InvalidParams(format!(
            "intensity {lam} is not above the critical intensity {LAMBDA_C}; no supercritical p exists"
        )));
    }
    Ok(LAMBDA_C / lam)
}

// ---------------------------------------------------------------------------
// Binomial tail

fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// `P(Y >= k)` for `Y ~ Bin(n, q)`.
///
/// Terms are generated by the ratio recurrence in log space and combined
/// with log-sum-exp, so nothing overflows for `n` in the tens of
/// thousands.
pub fn binomial_tail(n: u64, q: f64, k: u64) -> f64 {
    assert!((0.0..=1.0).contains(&q), "q must lie in [0, 1], got {q}");
    if k == 0 {
        return 1.0;
    }
    if k > n || q == 0.0 {
        return 0.0;
    }
    if q == 1.0 {
        return 1.0;
    }
    let lq = q.ln();
    let lp = (-q).ln_1p();
    let mut lc = ln_choose(n, k);
    let mut terms = Vec::with_capacity((n - k + 1) as usize);
    for j in k..=n {
        terms.push(lc + j as f64 * lq + (n - j) as f64 * lp);
        if j < n {
            lc += ((n - j) as f64 / (j + 1) as f64).ln();
        }
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + s.ln()).exp().clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Closed-form estimates

/// Expected total transmissions `n m² λ p θ(λp)²`.
pub fn tau_estimate(n: usize, m: f64, lam: f64, p: f64, table: &ThetaTable) -> f64 {
    let theta = theta_at(table, lam * p);
    n as f64 * m * m * lam * p * theta * theta
}

/// Smallest `p` in `(λ_c/λ, 1]` with `P(Bin(n, θ(λp)²) >= k) >= 1 - δ`,
/// to within [`MEAN_FIELD_TOLERANCE`].
pub fn mean_field_p(k: usize, n: usize, delta: f64, lam: f64, table: &ThetaTable) -> Result<f64> {
    check_kn(k, n)?;
    check_delta(delta)?;
    let floor = search_floor(lam)?;
    let target = 1.0 - delta;
    let tail = |p: f64| {
        let t = theta_at(table, lam * p);
        binomial_tail(n as u64, t * t, k as u64)
    };
    let at_one = tail(1.0);
    if at_one < target {
        return Err(Error::Unreachable { target, at_one });
    }
    if tail(floor) >= target {
        return Ok(floor);
    }
    let (mut lo, mut hi) = (floor, 1.0);
    while hi - lo > MEAN_FIELD_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if tail(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

// ---------------------------------------------------------------------------
// Simulated threshold

/// Result of a simulated threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PMin {
    /// Reported minimum forwarding probability (bracket midpoint).
    pub p: f64,
    /// Final search bracket `(lower, upper)`.
    pub bracket: (f64, f64),
    /// Success fraction at `p`.
    pub success: Estimate,
    /// Grid index of `p` in the panel.
    pub grid_index: u32,
}

/// Bisection for the smallest `p` with mean success `>= 1 - δ` over a
/// common-random-number panel, on the panel's grid.
///
/// With `stop_within_se` the search stops once the bracket is no wider than
/// [`SIMULATED_TOLERANCE`] or the midpoint estimate is within one standard
/// error of the target, and reports the bracket midpoint (rounded up to the
/// grid). Without it the bracket shrinks to a single grid step and the
/// reported point is the first grid point meeting the target.
pub fn search_panel(panel: &CrnPanel, n: usize, delta: f64, lam: f64, stop_within_se: bool) -> Result<PMin> {
    check_delta(delta)?;
    let grid = panel.grid();
    let floor = search_floor(lam)?;
    let target = 1.0 - delta;
    let (mut lo, mut hi) = (grid.floor_index(floor), grid.resolution());
    let at_one = panel.success_at(n, hi)?;
    if at_one.mean < target {
        return Err(Error::Unreachable {
            target,
            at_one: at_one.mean,
        });
    }
    let at_floor = panel.success_at(n, lo)?;
    if at_floor.mean >= target {
        return Ok(PMin {
            p: grid.p(lo),
            bracket: (grid.p(lo), grid.p(lo)),
            success: at_floor,
            grid_index: lo,
        });
    }
    let result = |lo: u32, hi: u32, at: u32| -> Result<PMin> {
        Ok(PMin {
            p: grid.p(at),
            bracket: (grid.p(lo), grid.p(hi)),
            success: panel.success_at(n, at)?,
            grid_index: at,
        })
    };
    // invariant: success(lo) < target <= success(hi)
    while hi - lo > 1 {
        if stop_within_se && f64::from(hi - lo) <= SIMULATED_TOLERANCE * f64::from(grid.resolution()) + 1e-9 {
            return result(lo, hi, lo + (hi - lo).div_ceil(2));
        }
        let mid = lo + (hi - lo) / 2;
        let s = panel.success_at(n, mid)?;
        if stop_within_se && (s.mean - target).abs() <= s.std_err {
            return result(lo, hi, mid);
        }
        if s.mean >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    result(lo, hi, hi)
}

/// Simulated `p_{k,n,δ}`: smallest `p` whose mean successful-receiver
/// fraction over graphs and forwarding runs reaches `1 - δ`.
pub fn min_forward_prob_simulated(
    domain: &SimDomain,
    k: usize,
    n: usize,
    delta: f64,
    trials: TrialsSpec,
    master_seed: u64,
) -> Result<PMin> {
    check_kn(k, n)?;
    check_delta(delta)?;
    search_floor(domain.intensity_lambda)?;
    let panel = CrnPanel::build(domain, k, &[n], trials, master_seed, PGrid::new(DEFAULT_GRID)?)?;
    search_panel(&panel, n, delta, domain.intensity_lambda, true)
}

// ---------------------------------------------------------------------------
// Multi-packet extended clusters

/// Estimates of `θ^ext_{k,t}` for `1 <= k <= t <= n`: the fraction of
/// nodes lying in the extended giant cluster of at least `k` of the first
/// `t` packets.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaExtEstimates {
    pub n: usize,
    pub p: f64,
    /// True when `λp <= λ_c`, where no giant thinned cluster is expected.
    pub subcritical: bool,
    values: Vec<f64>,
    std_err: Vec<f64>,
    /// Per-trial matrices grouped by graph, for resampling.
    trials: Vec<Vec<Vec<f64>>>,
}

impl ThetaExtEstimates {
    fn index(n: usize, k: usize, t: usize) -> usize {
        (k - 1) * n + (t - 1)
    }

    fn valid(&self, k: usize, t: usize) -> bool {
        k >= 1 && k <= t && t <= self.n
    }

    /// Builds estimates from per-trial matrices (`trials[g][f][(k-1)·n + t-1]`).
    pub fn from_trials(n: usize, p: f64, subcritical: bool, trials: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if n == 0 || trials.iter().all(|g| g.is_empty()) {
            return Err(Error::InvalidParams("no trials".into()));
        }
        if trials.iter().flatten().any(|m| m.len() != n * n) {
            return Err(Error::InvalidParams("trial matrix has wrong size".into()));
        }
        let (values, std_err) = (0..n * n)
            .map(|i| {
                let groups: Vec<Vec<f64>> = trials.iter().map(|g| g.iter().map(|m| m[i]).collect()).collect();
                let e = crate::stats::two_level(&groups);
                (e.mean, e.std_err)
            })
            .unzip();
        Ok(Self {
            n,
            p,
            subcritical,
            values,
            std_err,
            trials,
        })
    }

    /// Estimates with every entry equal to `value` (for exercising formulas).
    pub fn constant(n: usize, value: f64) -> Self {
        Self::from_trials(n, 1.0, false, vec![vec![vec![value; n * n]]]).expect("n >= 1")
    }

    pub fn get(&self, k: usize, t: usize) -> Option<Estimate> {
        self.valid(k, t).then(|| Estimate {
            mean: self.values[Self::index(self.n, k, t)],
            std_err: self.std_err[Self::index(self.n, k, t)],
            samples: self.trials.len(),
        })
    }

    fn value(&self, k: usize, t: usize) -> Result<f64> {
        self.get(k, t).map(|e| e.mean).ok_or(Error::MissingEntry { k, t })
    }

    /// Resampling units: whole graphs when there are several, otherwise the
    /// runs on the single graph.
    fn units(&self) -> Vec<Vec<&Vec<f64>>> {
        let groups: Vec<&Vec<Vec<f64>>> = self.trials.iter().filter(|g| !g.is_empty()).collect();
        if groups.len() >= 2 {
            groups.into_iter().map(|g| g.iter().collect()).collect()
        } else {
            groups[0].iter().map(|m| vec![m]).collect()
        }
    }

    fn leave_one_out(&self, skip: usize) -> Self {
        let units = self.units();
        let mut sums = vec![0.0; self.n * self.n];
        let mut count = 0.0;
        for (u, unit) in units.iter().enumerate() {
            if u == skip {
                continue;
            }
            let mut mean = vec![0.0; self.n * self.n];
            for m in unit {
                for (a, b) in mean.iter_mut().zip(m.iter()) {
                    *a += b / unit.len() as f64;
                }
            }
            for (s, m) in sums.iter_mut().zip(mean) {
                *s += m;
            }
            count += 1.0;
        }
        let values = sums.into_iter().map(|s| s / count).collect();
        Self {
            values,
            std_err: vec![0.0; self.n * self.n],
            trials: Vec::new(),
            ..*self
        }
    }
}

/// Simulates `n` packets per trial and records, for every prefix of `t`
/// packets, how many nodes sit in at least `k` of the extended giant
/// clusters of the marked subgraphs.
pub fn estimate_theta_kn_ext(
    domain: &SimDomain,
    n: usize,
    p: f64,
    trials: TrialsSpec,
    master_seed: u64,
) -> Result<ThetaExtEstimates> {
    crate::forwarding::check_probability(p)?;
    trials.validate()?;
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    let subcritical = domain.intensity_lambda * p <= LAMBDA_C;
    if subcritical {
        log::warn!(
            "λp = {} is not above λ_c = {LAMBDA_C}; extended giant clusters are finite-size artifacts",
            domain.intensity_lambda * p
        );
    }
    let per_graph = (0..trials.graph_trials as u32)
        .into_par_iter()
        .map(|g| -> Result<Vec<Vec<f64>>> {
            let graph = build_rgg(sample_ppp(domain, SeedSpec::geometry(master_seed, trial_id(g, 0)))?);
            Ok((0..trials.fwd_trials as u32)
                .into_par_iter()
                .map(|f| ext_trial(&graph, n, p, SeedSpec::new(master_seed, trial_id(g, f), 0)))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    ThetaExtEstimates::from_trials(n, p, subcritical, per_graph)
}

fn ext_trial<G: Network + ?Sized>(graph: &G, n: usize, p: f64, seed: SeedSpec) -> Vec<f64> {
    let nodes = graph.node_count();
    let src = graph.source();
    let mut counts = vec![0u32; nodes];
    let mut marks = vec![false; nodes];
    let mut inside = vec![false; nodes];
    let mut out = vec![0.0; n * n];
    let mut hist = vec![0usize; n + 2];
    for t in 1..=n {
        let mut rng = derive_stream(seed.with_stream(t as u64));
        for m in marks.iter_mut() {
            *m = rng.random::<f64>() < p;
        }
        marks[src] = true;
        let labels = components(graph, Some(&marks));
        if let Some(giant) = labels.largest_id() {
            inside.iter_mut().for_each(|x| *x = false);
            for v in 0..nodes {
                if labels.label(v) == giant {
                    inside[v] = true;
                    for &u in graph.neighbors(v) {
                        inside[u as usize] = true;
                    }
                }
            }
            for (c, &i) in counts.iter_mut().zip(&inside) {
                *c += u32::from(i);
            }
        }
        hist.iter_mut().for_each(|h| *h = 0);
        for &c in &counts {
            hist[c as usize] += 1;
        }
        // at_least[k] = #{v : counts[v] >= k}
        let mut at_least = 0;
        for k in (1..=t).rev() {
            at_least += hist[k];
            out[(k - 1) * n + (t - 1)] = at_least as f64 / nodes as f64;
        }
    }
    out
}

/// Limit successful-receiver fraction expressed through `θ^ext`:
/// `Σ_{t=k}^{n-1} θ_{k,t} (θ_{t,n} − θ_{t+1,n}) + θ_{k,n} θ_{n,n}`.
///
/// Negative differences (Monte Carlo noise) are clamped to zero.
pub fn receiver_formula(est: &ThetaExtEstimates, k: usize) -> Result<f64> {
    let n = est.n;
    check_kn(k, n)?;
    let mut total = 0.0;
    for t in k..n {
        let diff = est.value(t, n)? - est.value(t + 1, n)?;
        if diff < 0.0 {
            log::warn!("θ_ext({t},{n}) < θ_ext({},{n}) by {:.3e}; clamping to 0", t + 1, -diff);
        }
        total += est.value(k, t)? * diff.max(0.0);
    }
    Ok(total + est.value(k, n)? * est.value(n, n)?)
}

/// [`receiver_formula`] with a jackknife standard error over the
/// resampling units of the estimates.
pub fn receiver_formula_with_se(est: &ThetaExtEstimates, k: usize) -> Result<Estimate> {
    let mean = receiver_formula(est, k)?;
    let units = est.units().len();
    if units < 2 {
        return Ok(Estimate {
            mean,
            std_err: f64::NAN,
            samples: units,
        });
    }
    let loo = (0..units)
        .map(|u| receiver_formula(&est.leave_one_out(u), k))
        .collect::<Result<Vec<f64>>>()?;
    let bar = loo.iter().sum::<f64>() / units as f64;
    let var = (units - 1) as f64 / units as f64 * loo.iter().map(|x| (x - bar).powi(2)).sum::<f64>();
    Ok(Estimate {
        mean,
        std_err: var.sqrt(),
        samples: units,
    })
}

/// Two lower bounds on `θ^ext_{k,n}(λ, p)`:
/// `θ(λp)^n` and `1 − Π_{j=k}^{n} (1 − θ(λ p^j (1−p)^{n−j}))^{C(n,j)}`.
pub fn theta_ext_lower_bounds(k: usize, n: usize, p: f64, lam: f64, table: &ThetaTable) -> Result<(f64, f64)> {
    check_kn(k, n)?;
    crate::forwarding::check_probability(p)?;
    let bound1 = theta_at(table, lam * p).powi(n as i32);
    let mut log_prod = 0.0;
    for j in k..=n {
        let thin = p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
        let theta = theta_at(table, lam * thin);
        if theta == 0.0 {
            continue;
        }
        let choose = ln_choose(n as u64, j as u64).exp();
        log_prod += choose * (-theta).ln_1p();
    }
    let bound2 = (-log_prod.exp_m1()).clamp(0.0, 1.0);
    Ok((bound1, bound2))
}

// ---------------------------------------------------------------------------
// Sweeps

/// One value of `n` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub p_min: f64,
    pub success_at_p: f64,
    /// Expected total transmissions at `p_min`: simulated for
    /// [`Method::Simulated`], the closed form for [`Method::MeanField`].
    pub tau: f64,
    pub tau_per_node: f64,
    pub method: Method,
    /// Closed-form transmissions at `p_min`, when a table is available.
    pub tau_formula: Option<f64>,
}

impl SweepRow {
    /// Row for an `n` whose target was unreachable.
    pub fn unreachable(n: usize, method: Method) -> Self {
        Self {
            n,
            p_min: f64::NAN,
            success_at_p: f64::NAN,
            tau: f64::NAN,
            tau_per_node: f64::NAN,
            method,
            tau_formula: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub domain: SimDomain,
    pub k: usize,
    pub delta: f64,
    pub n_values: Vec<usize>,
    pub method: Method,
    pub trials: TrialsSpec,
    pub master_seed: u64,
    pub grid_resolution: u32,
    /// Let the simulated search stop early once the midpoint is within one
    /// standard error of the target; otherwise bisect down to the tolerance.
    pub stop_within_se: bool,
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        if self.n_values.is_empty() {
            return Err(Error::InvalidParams("empty n range".into()));
        }
        for &n in &self.n_values {
            check_kn(self.k, n)?;
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("n values must be strictly ascending".into()));
        }
        search_floor(self.domain.intensity_lambda)?;
        Ok(())
    }
}

/// Computes one row per `n`, keeping per-row failures (unreachable targets)
/// as errors in place.
pub fn sweep_rows(cfg: &SweepConfig, table: Option<&ThetaTable>) -> Result<Vec<Result<SweepRow>>> {
    cfg.validate()?;
    let lam = cfg.domain.intensity_lambda;
    let m = cfg.domain.side_m;
    let per_node = cfg.domain.expected_points();
    match cfg.method {
        Method::MeanField => {
            let table = table.ok_or_else(|| Error::InvalidParams("mean-field sweep needs a theta table".into()))?;
            Ok(cfg
                .n_values
                .par_iter()
                .map(|&n| {
                    let p = mean_field_p(cfg.k, n, cfg.delta, lam, table)?;
                    let t = theta_at(table, lam * p);
                    let tau = tau_estimate(n, m, lam, p, table);
                    Ok(SweepRow {
                        n,
                        p_min: p,
                        success_at_p: binomial_tail(n as u64, t * t, cfg.k as u64),
                        tau,
                        tau_per_node: tau / per_node,
                        method: Method::MeanField,
                        tau_formula: Some(tau),
                    })
                })
                .collect())
        }
        Method::Simulated => {
            let panel = CrnPanel::build(
                &cfg.domain,
                cfg.k,
                &cfg.n_values,
                cfg.trials,
                cfg.master_seed,
                PGrid::new(cfg.grid_resolution)?,
            )?;
            Ok(cfg
                .n_values
                .iter()
                .map(|&n| {
                    let found = search_panel(&panel, n, cfg.delta, lam, cfg.stop_within_se)?;
                    let tau = panel.transmissions_at(n, found.grid_index)?.mean;
                    Ok(SweepRow {
                        n,
                        p_min: found.p,
                        success_at_p: found.success.mean,
                        tau,
                        tau_per_node: tau / per_node,
                        method: Method::Simulated,
                        tau_formula: table.map(|t| tau_estimate(n, m, lam, found.p, t)),
                    })
                })
                .collect())
        }
    }
}

/// Like [`sweep_rows`] but fails on the first unreachable row.
pub fn sweep(cfg: &SweepConfig, table: Option<&ThetaTable>) -> Result<Vec<SweepRow>> {
    sweep_rows(cfg, table)?.into_iter().collect()
}

pub const SWEEP_HEADER: &str = "n,p_min,success_at_p,tau,tau_per_node,method";

/// CSV rendering with six significant digits; `comments` become `# ` lines
/// above the header.
pub fn sweep_csv(rows: &[SweepRow], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            sig6(r.p_min),
            sig6(r.success_at_p),
            sig6(r.tau),
            sig6(r.tau_per_node),
            r.method.tag()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_small_cases() {
        assert_eq!(binomial_tail(5, 0.3, 0), 1.0);
        assert!((binomial_tail(3, 0.5, 2) - 0.5).abs() < 1e-15);
        assert_eq!(binomial_tail(20, 1.0, 20), 1.0);
        assert_eq!(binomial_tail(20, 0.0, 1), 0.0);
        assert_eq!(binomial_tail(4, 0.5, 5), 0.0);
        assert!((binomial_tail(1, 0.25, 1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn tail_large_n_is_finite() {
        let v = binomial_tail(10_000, 0.5, 5_000);
        assert!(v > 0.5 && v < 0.51, "{v}");
        let tiny = binomial_tail(10_000, 0.01, 9_000);
        assert!((0.0..1e-300).contains(&tiny));
        let near_one = binomial_tail(10_000, 0.99, 9_800);
        assert!(near_one > 0.999_999);
    }

    #[test]
    fn tau_arithmetic() {
        let ones = ThetaTable::constant(0.5, 10.0, 1.0).unwrap();
        assert!((tau_estimate(10, 10.0, 4.5, 0.5, &ones) - 2250.0).abs() < 1e-9);
        let late = ThetaTable::constant(3.0, 10.0, 1.0).unwrap();
        assert_eq!(tau_estimate(10, 10.0, 4.5, 0.5, &late), 0.0);
    }

    #[test]
    fn mean_field_degenerate_table() {
        let ones = ThetaTable::constant(LAMBDA_C, 10.0, 1.0).unwrap();
        let p = mean_field_p(20, 20, 0.1, 4.5, &ones).unwrap();
        assert_eq!(p, LAMBDA_C / 4.5);
    }

    #[test]
    fn mean_field_unreachable() {
        let half = ThetaTable::constant(1.0, 10.0, 0.5).unwrap();
        assert!(matches!(mean_field_p(1, 1, 0.1, 4.5, &half), Err(Error::Unreachable { .. })));
        assert!(mean_field_p(2, 1, 0.1, 4.5, &half).is_err());
        assert!(mean_field_p(1, 1, 0.0, 4.5, &half).is_err());
        assert!(mean_field_p(1, 1, 0.1, 1.0, &half).is_err());
    }

    #[test]
    fn formula_stubs() {
        let ones = ThetaExtEstimates::constant(5, 1.0);
        assert_eq!(receiver_formula(&ones, 3).unwrap(), 1.0);
        let c = ThetaExtEstimates::constant(4, 0.7);
        assert_eq!(receiver_formula(&c, 2).unwrap(), 0.7 * 0.7);
        assert!(receiver_formula(&c, 5).is_err());
        assert!(receiver_formula(&c, 0).is_err());
    }

    #[test]
    fn missing_entries() {
        let c = ThetaExtEstimates::constant(3, 0.5);
        assert!(c.get(2, 1).is_none());
        assert!(c.get(1, 4).is_none());
        assert!(matches!(c.value(3, 2), Err(Error::MissingEntry { k: 3, t: 2 })));
    }

    #[test]
    fn bounds_degenerate() {
        let t = ThetaTable::new(
            vec![1.0, 4.5, 5.0],
            vec![0.0, 0.98, 0.99],
            vec![0.0; 3],
            crate::percolation::ThetaMeta {
                window_m: 1,
                trials: 2,
                master_seed: 0,
                smoothed: false,
            },
        )
        .unwrap();
        let (b1, b2) = theta_ext_lower_bounds(3, 3, 1.0, 4.5, &t).unwrap();
        assert!((b1 - 0.98f64.powi(3)).abs() < 1e-15);
        assert!((b2 - 0.98).abs() < 1e-12);
        // every thinned intensity below the grid
        let (_, b2) = theta_ext_lower_bounds(2, 6, 0.3, 2.0, &t).unwrap();
        assert_eq!(b2, 0.0);
    }

    #[test]
    fn sweep_csv_format() {
        let rows = [SweepRow {
            n: 20,
            p_min: 0.123456789,
            success_at_p: 0.9,
            tau: 2250.0,
            tau_per_node: 1.0 / 3.0,
            method: Method::MeanField,
            tau_formula: None,
        }];
        let text = sweep_csv(&rows, &["seed=1".into()]);
        assert_eq!(
            text,
            "# seed=1\nn,p_min,success_at_p,tau,tau_per_node,method\n20,0.123457,0.9,2250,0.333333,mean_field\n"
        );
    }

    #[test]
    fn mean_field_sweep_stub() {
        let ones = ThetaTable::constant(LAMBDA_C, 10.0, 1.0).unwrap();
        let cfg = SweepConfig {
            domain: SimDomain::unit(101.0, 4.5).unwrap(),
            k: 20,
            delta: 0.1,
            n_values: vec![20],
            method: Method::MeanField,
            trials: TrialsSpec::new(1, 1),
            master_seed: 0,
            grid_resolution: DEFAULT_GRID,
            stop_within_se: true,
        };
        let rows = sweep(&cfg, Some(&ones)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].p_min, LAMBDA_C / 4.5);
        assert!(sweep(&cfg, None).is_err());
    }
}
