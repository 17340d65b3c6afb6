//! Monte Carlo simulation of task success and outage on a Poisson network.
//!
//! A trial places the BSs caching the requested dataset as a PPP of density
//! `λ p_c(f)` in a disk of radius `R` around the typical user, draws unit-mean
//! Nakagami-m power gains, and checks whether the strongest BS clears the
//! SNR threshold `2^ρ - 1`. Every trial has its own ChaCha stream derived
//! from `(seed, trial index)`, so results do not depend on thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{derive, CachingPolicy, DerivedParams, Popularity, SystemParams};

/// How the simulation disk radius is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    /// Smallest radius whose expected number of qualifying BSs outside it is
    /// below `truncation_eps`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub trials: u64,
    pub seed: u64,
    pub radius: Radius,
    /// Expected qualifying-BS count tolerated beyond the disk.
    pub truncation_eps: f64,
    /// Upper limit on the automatically chosen radius (m).
    pub max_radius: f64,
    /// Allocate trials to datasets in proportion to popularity instead of sampling them.
    pub stratified: bool,
}

impl TrialConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        TrialConfig {
            trials,
            seed,
            ..Default::default()
        }
    }
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            trials: 100_000,
            seed: 0,
            radius: Radius::Auto,
            truncation_eps: 1e-4,
            max_radius: 1e7,
            stratified: false,
        }
    }
}

/// A Monte Carlo probability estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub mean: f64,
    /// `sqrt(mean (1 - mean) / trials)`
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl OutageEstimate {
    fn from_count(hits: u64, trials: u64, seed: u64) -> Self {
        let mean = hits as f64 / trials as f64;
        OutageEstimate {
            mean,
            stderr: (mean * (1.0 - mean) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }
}

/// Expected number of BSs beyond `radius` that would clear the threshold,
/// for caching probability `p`.
///
/// With `c = m T / η` and `x_R = c R^α` this is
/// `λ p π c^{-δ} [Γ(m+δ)/Γ(m) Q(m+δ, x_R) - x_R^δ Q(m, x_R)]`,
/// which equals `κ' p` at `R = 0`.
pub fn truncation_tail(params: &SystemParams, derived: &DerivedParams, p: f64, radius: f64) -> f64 {
    let m = params.nakagami_m;
    let delta = derived.delta;
    let c = m * derived.threshold / derived.snr;
    let x = c * radius.powf(params.pathloss);
    let lead = params.lambda * p * std::f64::consts::PI * c.powf(-delta);
    if x.is_infinite() {
        return 0.0;
    }
    let inner = if x == 0.0 {
        gamma(m + delta) / gamma(m)
    } else {
        gamma(m + delta) / gamma(m) * gamma_ur(m + delta, x) - x.powf(delta) * gamma_ur(m, x)
    };
    (lead * inner).max(0.0)
}

/// Smallest disk radius with [`truncation_tail`] below `eps` at caching
/// probability `p_max`.
pub fn truncation_radius(params: &SystemParams, p_max: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_max) {
        return Err(Error::domain(format!(
            "caching probability must be in [0, 1], got {p_max}"
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(format!(
            "truncation tolerance must be positive, got {eps}"
        )));
    }
    let d = derive(params)?;
    let tail = |r: f64| truncation_tail(params, &d, p_max, r);
    if p_max == 0.0 || tail(0.0) < eps {
        return Ok(0.0);
    }
    // Distance at which the mean received SNR equals the threshold.
    let mut lo = 0.0;
    let mut hi = (d.snr / d.threshold).powf(1.0 / params.pathloss);
    while tail(hi) >= eps {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoRoot("truncation radius diverged".to_string()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if tail(mid) < eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Per-trial sampler for one caching probability.
struct Cell {
    bs_count: Option<Poisson<f64>>,
    fading: Gamma<f64>,
    radius: f64,
    /// `T / η`; a BS at distance r qualifies if `h ≥ (T/η) r^α`.
    scaled_threshold: f64,
    pathloss: f64,
}

impl Cell {
    fn new(params: &SystemParams, derived: &DerivedParams, p: f64, radius: f64) -> Result<Self> {
        let mean = params.lambda * p * std::f64::consts::PI * radius * radius;
        let bs_count = if mean > 0.0 {
            Some(Poisson::new(mean).map_err(|e| Error::domain(format!("BS count law: {e}")))?)
        } else {
            None
        };
        let m = params.nakagami_m;
        let fading = Gamma::new(m, 1.0 / m).map_err(|e| Error::domain(format!("fading law: {e}")))?;
        Ok(Cell {
            bs_count,
            fading,
            radius,
            scaled_threshold: derived.threshold / derived.snr,
            pathloss: params.pathloss,
        })
    }

    /// Number of BSs in the disk that clear the threshold.
    fn qualifying<R: Rng>(&self, rng: &mut R) -> u64 {
        let Some(law) = &self.bs_count else { return 0 };
        let n = law.sample(rng) as u64;
        let mut count = 0;
        for _ in 0..n {
            let r = self.radius * rng.random::<f64>().sqrt();
            let h = self.fading.sample(rng);
            if h >= self.scaled_threshold * r.powf(self.pathloss) {
                count += 1;
            }
        }
        count
    }
}

fn trial_rng(base: &ChaCha8Rng, index: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(index);
    rng
}

fn resolve_radius(params: &SystemParams, cfg: &TrialConfig, p_max: f64) -> Result<f64> {
    match cfg.radius {
        Radius::Fixed(r) if r.is_finite() && r >= 0.0 => Ok(r),
        Radius::Fixed(r) => Err(Error::domain(format!("disk radius must be finite and >= 0, got {r}"))),
        Radius::Auto => {
            let r = truncation_radius(params, p_max, cfg.truncation_eps)?;
            if r > cfg.max_radius {
                return Err(Error::Truncation {
                    radius: r,
                    cap: cfg.max_radius,
                });
            }
            Ok(r)
        }
    }
}

fn check_trials(cfg: &TrialConfig) -> Result<()> {
    if cfg.trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    Ok(())
}

/// Success probability of a request served by BSs caching it with
/// probability `p`. The estimate targets `1 - exp(-κ' p)`.
pub fn simulate_success(p: f64, params: &SystemParams, cfg: &TrialConfig, exec: Execution) -> Result<OutageEstimate> {
    check_trials(cfg)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("caching probability must be in [0, 1], got {p}")));
    }
    let d = derive(params)?;
    let radius = resolve_radius(params, cfg, p)?;
    let cell = Cell::new(params, &d, p, radius)?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hits = exec.sum_u64(0..cfg.trials, |i| {
        u64::from(cell.qualifying(&mut trial_rng(&base, i)) > 0)
    });
    Ok(OutageEstimate::from_count(hits, cfg.trials, cfg.seed))
}

/// Success probability of task `f` (1-based) under `policy`.
pub fn simulate_task_success(
    f: usize,
    policy: &CachingPolicy,
    params: &SystemParams,
    cfg: &TrialConfig,
    exec: Execution,
) -> Result<OutageEstimate> {
    if f == 0 || f > policy.len() {
        return Err(Error::domain(format!("task index {f} outside 1..={}", policy.len())));
    }
    simulate_success(policy.prob(f), params, cfg, exec)
}

/// Outage probability under `policy`: each trial requests a dataset drawn
/// from `pop` (or allocated deterministically in stratified mode) and fails
/// if no caching BS clears the threshold.
pub fn simulate_outage(
    policy: &CachingPolicy,
    pop: &Popularity,
    params: &SystemParams,
    cfg: &TrialConfig,
    exec: Execution,
) -> Result<OutageEstimate> {
    check_trials(cfg)?;
    if policy.len() != pop.len() {
        return Err(Error::domain(format!(
            "policy covers {} items but the library has {}",
            policy.len(),
            pop.len()
        )));
    }
    let d = derive(params)?;
    let p_max = policy.probs().iter().copied().fold(0.0, f64::max);
    let radius = resolve_radius(params, cfg, p_max)?;
    let cells = policy
        .probs()
        .iter()
        .map(|p| Cell::new(params, &d, *p, radius))
        .collect::<Result<Vec<_>>>()?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Cumulative boundaries: CDF of the pmf, or prefix sums of per-item trial counts.
    let failures = if cfg.stratified {
        let ends = stratum_ends(pop.pmf(), cfg.trials);
        exec.sum_u64(0..cfg.trials, |i| {
            let f = ends.partition_point(|e| *e <= i);
            u64::from(cells[f].qualifying(&mut trial_rng(&base, i)) == 0)
        })
    } else {
        let mut acc = 0.0;
        let cdf: Vec<f64> = pop
            .pmf()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last = cells.len() - 1;
        exec.sum_u64(0..cfg.trials, |i| {
            let mut rng = trial_rng(&base, i);
            let u = rng.random::<f64>() * acc;
            let f = cdf.partition_point(|c| *c <= u).min(last);
            u64::from(cells[f].qualifying(&mut rng) == 0)
        })
    };
    Ok(OutageEstimate::from_count(failures, cfg.trials, cfg.seed))
}

/// Largest-remainder allocation of `trials` proportional to `pmf`, returned
/// as exclusive prefix ends.
fn stratum_ends(pmf: &[f64], trials: u64) -> Vec<u64> {
    let total: f64 = pmf.iter().sum();
    let quotas: Vec<f64> = pmf.iter().map(|p| p / total * trials as f64).collect();
    let mut counts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..pmf.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take((trials - assigned.min(trials)) as usize) {
        counts[i] += 1;
    }
    counts
        .iter()
        .scan(0u64, |acc, c| {
            *acc += c;
            Some(*acc)
        })
        .collect()
}

/// Histogram of the number of qualifying BSs per trial at caching
/// probability `p`. The last bin collects every count `≥ bins - 1`.
pub fn coverage_histogram(
    p: f64,
    params: &SystemParams,
    cfg: &TrialConfig,
    bins: usize,
    exec: Execution,
) -> Result<Vec<u64>> {
    check_trials(cfg)?;
    if bins < 2 {
        return Err(Error::domain("a coverage histogram needs at least two bins"));
    }
    let d = derive(params)?;
    let radius = resolve_radius(params, cfg, p)?;
    let cell = Cell::new(params, &d, p, radius)?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    const CHUNKS: u64 = 64;
    let chunk = cfg.trials.div_ceil(CHUNKS);
    let starts: Vec<u64> = (0..CHUNKS).map(|c| c * chunk).filter(|s| *s < cfg.trials).collect();
    let parts = exec.map_collect(&starts, |&s| {
        let mut h = vec![0u64; bins];
        for i in s..(s + chunk).min(cfg.trials) {
            let k = cell.qualifying(&mut trial_rng(&base, i)) as usize;
            h[k.min(bins - 1)] += 1;
        }
        h
    });
    Ok(parts.into_iter().fold(vec![0u64; bins], |mut acc, h| {
        acc.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        acc
    }))
}
