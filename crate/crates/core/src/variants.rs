//! Network variants: a dedicated backhaul per BS, backhaul on top of the
//! edge cache, hierarchical caching in backhaul-attached storage, and the
//! co-located versus distributed cache comparison.

use crate::analytics::{exponential_law_outage, outage_with};
use crate::error::{Error, Result};
use crate::model::{derive, fading_constant, link_constant, CachingPolicy, DerivedParams, Popularity, SystemParams};
use crate::policy::{kkt_residual, water_fill};

/// Backhaul attached to every BS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackhaulParams {
    /// Probability `P_Ba` that the backhaul can fetch a dataset.
    pub avail_prob: f64,
    /// Extra fetch latency `d_B` (s).
    pub latency: f64,
    /// External storage size `S_B` reachable over the backhaul.
    pub storage: f64,
}

impl BackhaulParams {
    /// Link constant `κ_B`: `κ'` with the deadline shortened to `D - d_B`.
    pub fn kappa_b(&self, params: &SystemParams) -> Result<f64> {
        self.validate(params)?;
        let tx_time = params.latency - self.latency - params.compute_delay();
        if tx_time <= 0.0 {
            return Err(Error::InfeasibleLatency {
                deadline: params.latency,
                fixed_delay: self.latency + params.compute_delay(),
            });
        }
        let kappa = fading_constant(params.lambda, 2.0 / params.pathloss, params.nakagami_m);
        Ok(link_constant(params, kappa, tx_time).0)
    }

    fn validate(&self, params: &SystemParams) -> Result<()> {
        if !(0.0..=1.0).contains(&self.avail_prob) {
            return Err(Error::domain(format!(
                "backhaul availability must be in [0, 1], got {}",
                self.avail_prob
            )));
        }
        if !(self.latency.is_finite() && self.latency >= 0.0 && self.latency < params.latency) {
            return Err(Error::domain(format!(
                "backhaul latency must be in [0, D = {}), got {}",
                params.latency, self.latency
            )));
        }
        let m = params.library_size;
        if !(self.storage.is_finite() && self.storage >= 0.0 && self.storage <= m as f64) {
            return Err(Error::BudgetInfeasible {
                budget: self.storage,
                library: m,
            });
        }
        Ok(())
    }
}

/// `exp(-P_Ba κ_B)`: outage when every request goes over the backhaul.
pub fn backhaul_only_outage(params: &SystemParams, bh: &BackhaulParams) -> Result<f64> {
    Ok((-bh.avail_prob * bh.kappa_b(params)?).exp())
}

/// Outage when the backhaul is tried whenever no caching BS serves the request:
/// `exp(-P_Ba κ_B) · Σ_f P_r(f) exp(-κ' p_c(f))`.
pub fn cache_plus_backhaul_outage(
    policy: &CachingPolicy,
    pop: &Popularity,
    params: &SystemParams,
    derived: &DerivedParams,
    bh: &BackhaulParams,
) -> Result<f64> {
    let backhaul = backhaul_only_outage(params, bh)?;
    Ok(backhaul * outage_with(policy.probs(), pop.pmf(), derived.kappa_prime))
}

/// Exponential-law approximation of [`cache_plus_backhaul_outage`] under
/// optimal caching, `γ < 1`.
pub fn cache_plus_backhaul_asymptotic(
    params: &SystemParams,
    derived: &DerivedParams,
    bh: &BackhaulParams,
) -> Result<f64> {
    let g = params.zipf_exponent;
    if g >= 1.0 {
        return Err(Error::WrongBranch(format!("the exponential law needs γ < 1, got {g}")));
    }
    Ok(backhaul_only_outage(params, bh)? * exponential_law_outage(g, derived.kappa_t))
}

/// Jointly optimized BS cache and backhaul storage.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalSolution {
    pub bs: CachingPolicy,
    pub storage: CachingPolicy,
    /// `Σ_f P_r(f) exp(-κ' p_c(f) - κ_B P_{c,B}(f))`
    pub outage: f64,
    pub kappa_b: f64,
    pub sweeps: usize,
    /// Largest KKT violation over both blocks, relative.
    pub kkt_residual: f64,
    pub converged: bool,
}

const MAX_SWEEPS: usize = 500;
const DECREASE_TOL: f64 = 1e-10;
const KKT_TOL: f64 = 1e-7;

fn joint_objective(pmf: &[f64], p: &[f64], q: &[f64], kp: f64, kb: f64) -> f64 {
    pmf.iter()
        .zip(p.iter().zip(q))
        .rev()
        .map(|(w, (a, b))| w * (-kp * a - kb * b).exp())
        .sum()
}

fn joint_kkt(pmf: &[f64], p: &[f64], q: &[f64], kp: f64, kb: f64) -> f64 {
    let terms: Vec<f64> = pmf
        .iter()
        .zip(p.iter().zip(q))
        .map(|(w, (a, b))| w * (-kp * a - kb * b).exp())
        .collect();
    let gp: Vec<f64> = terms.iter().map(|t| kp * t).collect();
    let gq: Vec<f64> = terms.iter().map(|t| kb * t).collect();
    kkt_residual(p, &gp).max(kkt_residual(q, &gq))
}

/// Minimizes `Σ_f P_r(f) exp(-κ' p_c(f)) exp(-κ_B P_{c,B}(f))` over both
/// policies by block-coordinate descent. Each block is an exact water-fill
/// against the popularity discounted by the other block.
pub fn hierarchical_optimize(
    pop: &Popularity,
    params: &SystemParams,
    derived: &DerivedParams,
    bh: &BackhaulParams,
) -> Result<HierarchicalSolution> {
    let kb = bh.kappa_b(params)?;
    let kp = derived.kappa_prime;
    let pmf = pop.pmf();
    let (s, sb) = (params.cache_size, bh.storage);

    let mut p = water_fill(pmf, kp, s)?.0.into_probs();
    let mut q = vec![0.0; pmf.len()];
    let mut obj = joint_objective(pmf, &p, &q, kp, kb);
    let mut sweeps = 0;
    let mut converged = false;
    let mut residual = joint_kkt(pmf, &p, &q, kp, kb);

    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let wq: Vec<f64> = pmf.iter().zip(&p).map(|(w, a)| w * (-kp * a).exp()).collect();
        q = water_fill(&wq, kb, sb)?.0.into_probs();
        let wp: Vec<f64> = pmf.iter().zip(&q).map(|(w, b)| w * (-kb * b).exp()).collect();
        p = water_fill(&wp, kp, s)?.0.into_probs();

        let next = joint_objective(pmf, &p, &q, kp, kb);
        let decrease = obj - next;
        obj = next;
        residual = joint_kkt(pmf, &p, &q, kp, kb);
        if decrease < DECREASE_TOL && residual <= KKT_TOL {
            converged = true;
            break;
        }
    }

    Ok(HierarchicalSolution {
        bs: CachingPolicy::new(p, s)?,
        storage: CachingPolicy::new(q, sb)?,
        outage: obj,
        kappa_b: kb,
        sweeps,
        kkt_residual: residual,
        converged,
    })
}

/// Outage with uniformly filled storage and an optimal BS cache:
/// `exp(-κ_B S_B / M) · min_p Σ_f P_r(f) exp(-κ' p_c(f))`. Always feasible,
/// hence an upper bound on the jointly optimized outage.
pub fn uniform_storage_outage(
    pop: &Popularity,
    params: &SystemParams,
    derived: &DerivedParams,
    bh: &BackhaulParams,
) -> Result<f64> {
    let kb = bh.kappa_b(params)?;
    let m = pop.len() as f64;
    let p = water_fill(pop.pmf(), derived.kappa_prime, params.cache_size)?.0;
    Ok((-kb * bh.storage / m).exp() * outage_with(p.probs(), pop.pmf(), derived.kappa_prime))
}

/// Approximate upper bound `(1-γ)e^γ exp(-(κ'S + κ_B S_B)/M)` on the
/// hierarchical optimum, from uniform storage and the exponential law (`γ < 1`).
pub fn hierarchical_asymptotic_bound(
    params: &SystemParams,
    derived: &DerivedParams,
    bh: &BackhaulParams,
) -> Result<f64> {
    let g = params.zipf_exponent;
    if g >= 1.0 {
        return Err(Error::WrongBranch(format!("the exponential law needs γ < 1, got {g}")));
    }
    let kb = bh.kappa_b(params)?;
    let m = params.library_size as f64;
    Ok(exponential_law_outage(
        g,
        (derived.kappa_prime * params.cache_size + kb * bh.storage) / m,
    ))
}

fn scaled(params: &SystemParams, scale: f64) -> Result<SystemParams> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::domain(format!(
            "co-location scale must be positive, got {scale}"
        )));
    }
    let mut out = params.clone();
    out.lambda *= scale;
    out.cache_size /= scale;
    derive(&out)?;
    Ok(out)
}

/// Exponential-law optimal outage at `(λ, S)` and at `(cλ, S/c)`, `γ < 1`.
///
/// The total cache per unit area `λS` is the same in both.
pub fn colocated_vs_distributed(params: &SystemParams, scale: f64) -> Result<(f64, f64)> {
    let g = params.zipf_exponent;
    if g >= 1.0 {
        return Err(Error::WrongBranch(format!("the exponential law needs γ < 1, got {g}")));
    }
    let other = scaled(params, scale)?;
    let a = exponential_law_outage(g, derive(params)?.kappa_t);
    let b = exponential_law_outage(g, derive(&other)?.kappa_t);
    Ok((a, b))
}

/// Exact finite-library optimal outage at `(λ, S)` and `(cλ, S/c)`.
pub fn colocated_vs_distributed_exact(pop: &Popularity, params: &SystemParams, scale: f64) -> Result<(f64, f64)> {
    let other = scaled(params, scale)?;
    let eval = |p: &SystemParams| -> Result<f64> {
        let kp = derive(p)?.kappa_prime;
        let pol = water_fill(pop.pmf(), kp, p.cache_size)?.0;
        Ok(outage_with(pol.probs(), pop.pmf(), kp))
    };
    Ok((eval(params)?, eval(&other)?))
}
