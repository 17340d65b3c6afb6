//! Exact and large-library outage expressions, and the delay-side view of
//! the optimal outage (effective SNR and minimum achievable latency).

use crate::error::{Error, Result};
use crate::model::{CachingPolicy, DerivedParams, Popularity, SystemParams};
use crate::policy::{Regime, RegimeReport};

/// `1 - exp(-κ' p_c(f))` for item `f` (1-based).
pub fn task_success_prob(f: usize, policy: &CachingPolicy, derived: &DerivedParams) -> f64 {
    -(-derived.kappa_prime * policy.prob(f)).exp_m1()
}

/// `Σ_f P_r(f) exp(-κ' p_c(f))`.
///
/// # Panics
/// If the policy and popularity cover different library sizes.
pub fn outage(policy: &CachingPolicy, pop: &Popularity, derived: &DerivedParams) -> f64 {
    outage_with(policy.probs(), pop.pmf(), derived.kappa_prime)
}

/// Outage for raw vectors; weights need not be normalized.
pub fn outage_with(probs: &[f64], weights: &[f64], kappa_prime: f64) -> f64 {
    assert_eq!(probs.len(), weights.len(), "policy and popularity lengths differ");
    probs
        .iter()
        .zip(weights)
        .rev()
        .map(|(p, w)| w * (-kappa_prime * p).exp())
        .sum()
}

/// `(1-γ) e^γ`, the constant separating optimal from uniform caching.
pub fn zipf_gain(gamma_exp: f64) -> f64 {
    (1.0 - gamma_exp) * gamma_exp.exp()
}

/// `(1-γ) e^γ exp(-κ_T)`: the exponential-law optimal outage.
pub fn exponential_law_outage(gamma_exp: f64, kappa_t: f64) -> f64 {
    zipf_gain(gamma_exp) * (-kappa_t).exp()
}

/// Large-library optimal outage for `γ < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOutage {
    pub value: f64,
    pub regime: Regime,
    /// Regime III with a small cache ratio: `(1-γ)e^γ e^{-Sκ'/M} + C₁^{1-γ} e^{-κ'}`.
    pub small_cache: Option<f64>,
    /// Regime III with `e^{-κ'}` negligible: `(1-γ)e^γ e^{-Sκ'/M}`.
    pub large_kappa: Option<f64>,
}

fn head_tail_bracket(c1: f64, c2: f64, kp: f64, gamma_exp: f64) -> f64 {
    // (c₂/c₁)^{-γc₁/(c₂-c₁)} = exp(-κ' c₁/(c₂-c₁)) since c₂/c₁ = e^{κ'/γ}.
    let gap = c2 - c1;
    (c2 - c1) * c2.powf(-gamma_exp) * (-kp * c1 / gap).exp() * (-(1.0 - c1) * kp / gap).exp()
}

fn full_support_term(c1: f64, c2: f64, kp: f64, gamma_exp: f64) -> f64 {
    if c1 >= 1.0 {
        return 0.0;
    }
    (1.0 - c1) * c1.powf(gamma_exp * c1 / (1.0 - c1)) * (-kp * (c2 - c1) / (1.0 - c1)).exp()
}

/// Large-library optimal outage for `γ < 1`, using the formula of the
/// regime in `report`.
pub fn asymptotic_outage_lt1(
    params: &SystemParams,
    derived: &DerivedParams,
    report: &RegimeReport,
) -> Result<AsymptoticOutage> {
    let g = params.zipf_exponent;
    if g >= 1.0 {
        return Err(Error::WrongBranch(format!("this expansion needs γ < 1, got {g}")));
    }
    let kp = derived.kappa_prime;
    let ratio = params.cache_ratio();
    let exp_law = exponential_law_outage(g, derived.kappa_t);
    let out = match report.regime {
        Regime::I => {
            let (c1, c2) = (report.c1, report.c2);
            let bracket =
                c2.powf(1.0 - g) - c1.powf(1.0 - g) * (-kp).exp() - zipf_gain(g) * head_tail_bracket(c1, c2, kp, g);
            AsymptoticOutage {
                value: 1.0 - bracket * ratio.powf(1.0 - g),
                regime: Regime::I,
                small_cache: None,
                large_kappa: None,
            }
        }
        Regime::II => AsymptoticOutage {
            value: exp_law,
            regime: Regime::II,
            small_cache: None,
            large_kappa: None,
        },
        Regime::III => {
            let (c1, c2) = (report.big_c1, report.big_c2);
            let tail = (-kp).exp() * c1.powf(1.0 - g);
            AsymptoticOutage {
                value: zipf_gain(g) * full_support_term(c1, c2, kp, g) + tail,
                regime: Regime::III,
                small_cache: Some(exp_law + tail),
                large_kappa: Some(exp_law),
            }
        }
    };
    Ok(out)
}

/// Which expression produced an [`OutageBounds`] pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundSource {
    /// Regime I with no item cached with certainty (`m₁ < 1`).
    RegimeIOpenHead,
    /// Regime I with a certain head (`m₁ ≥ 1`).
    RegimeICachedHead,
    RegimeII,
    RegimeIII,
    /// Regime III simplified for a small cache ratio.
    RegimeIIISmallCache,
    /// Regime III simplified further for negligible `e^{-κ'}`.
    RegimeIIILargeKappa,
    MostPopular,
    Uniform,
}

/// A lower/upper pair on an outage probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageBounds {
    /// Clamped to `[0, 1]`.
    pub lower: f64,
    /// Clamped to `[0, 1]`.
    pub upper: f64,
    /// Value of the expression before clamping; can be negative at small `S`.
    pub raw_lower: f64,
    pub raw_upper: f64,
    pub source: BoundSource,
}

impl OutageBounds {
    pub fn new(raw_lower: f64, raw_upper: f64, source: BoundSource) -> Self {
        OutageBounds {
            lower: raw_lower.clamp(0.0, 1.0),
            upper: raw_upper.clamp(0.0, 1.0),
            raw_lower,
            raw_upper,
            source,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.raw_lower <= x && x <= self.raw_upper
    }
}

/// Bounds for `γ > 1`, plus the regime-III simplifications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticBounds {
    pub bounds: OutageBounds,
    pub small_cache: Option<OutageBounds>,
    pub large_kappa: Option<OutageBounds>,
}

/// Large-library bounds on the optimal outage for `γ > 1`.
///
/// Regime I splits on the breakpoint formula `m₁* < 1`.
pub fn asymptotic_outage_gt1(
    params: &SystemParams,
    derived: &DerivedParams,
    report: &RegimeReport,
) -> Result<AsymptoticBounds> {
    let g = params.zipf_exponent;
    if g <= 1.0 {
        return Err(Error::WrongBranch(format!("these bounds need γ > 1, got {g}")));
    }
    let kp = derived.kappa_prime;
    let s = params.cache_size;
    let m = params.library_size as f64;
    let s_pow = s.powf(1.0 - g);
    let m_pow = m.powf(1.0 - g);
    let floor = (-kp).exp();
    let scale = (g - 1.0) * g.exp();
    let exp_law = scale * m_pow * (-derived.kappa_t).exp();

    let single = |bounds| AsymptoticBounds {
        bounds,
        small_cache: None,
        large_kappa: None,
    };
    let out = match report.regime {
        Regime::I if report.m1 < 1.0 => {
            let c2 = report.c2;
            let a = scale * c2.powf(1.0 - g) * (-kp / c2).exp() + c2.powf(1.0 - g);
            single(OutageBounds::new(
                (a * s_pow - m_pow) / g,
                a * s_pow - m_pow,
                BoundSource::RegimeIOpenHead,
            ))
        }
        Regime::I => {
            let (c1, c2) = (report.c1, report.c2);
            let t = scale * head_tail_bracket(c1, c2, kp, g) + c2.powf(1.0 - g);
            let lower = floor / g - m_pow / g + (t - floor * (c1 + 1.0 / s).powf(1.0 - g)) * s_pow / g;
            let upper = g * floor - m_pow + (t - floor * c1.powf(1.0 - g)) * s_pow;
            single(OutageBounds::new(lower, upper, BoundSource::RegimeICachedHead))
        }
        Regime::II => single(OutageBounds::new(exp_law / g, exp_law, BoundSource::RegimeII)),
        Regime::III => {
            let (c1, c2) = (report.big_c1, report.big_c2);
            let v = scale * full_support_term(c1, c2, kp, g) * m_pow;
            AsymptoticBounds {
                bounds: OutageBounds::new(floor / g + v / g, g * floor + v, BoundSource::RegimeIII),
                small_cache: Some(OutageBounds::new(
                    floor / g + exp_law / g,
                    g * floor + exp_law,
                    BoundSource::RegimeIIISmallCache,
                )),
                large_kappa: Some(OutageBounds::new(
                    exp_law / g,
                    exp_law,
                    BoundSource::RegimeIIILargeKappa,
                )),
            }
        }
    };
    Ok(out)
}

/// Reference caching strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferencePolicy {
    MostPopular,
    Uniform,
}

/// Closed-form outage of a reference policy: a point value, or a bound pair
/// for most-popular caching when `γ > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceOutage {
    Point(f64),
    Bounds(OutageBounds),
}

/// Large-library outage of a reference policy.
pub fn reference_outage(
    kind: ReferencePolicy,
    params: &SystemParams,
    derived: &DerivedParams,
) -> Result<ReferenceOutage> {
    let g = params.zipf_exponent;
    let kp = derived.kappa_prime;
    match kind {
        ReferencePolicy::Uniform => Ok(ReferenceOutage::Point((-derived.kappa_t).exp())),
        ReferencePolicy::MostPopular if g < 1.0 => {
            let hit = -(-kp).exp_m1();
            Ok(ReferenceOutage::Point(1.0 - hit * params.cache_ratio().powf(1.0 - g)))
        }
        ReferencePolicy::MostPopular if g > 1.0 => {
            let s = params.cache_size;
            let m = params.library_size as f64;
            let floor = (-kp).exp();
            let head = (s + 1.0).powf(1.0 - g);
            let tail = s.powf(1.0 - g) - (m + 1.0).powf(1.0 - g);
            let lower = (1.0 - head) * floor / g + tail / g;
            let upper = (g - head) * floor + tail;
            Ok(ReferenceOutage::Bounds(OutageBounds::new(
                lower,
                upper,
                BoundSource::MostPopular,
            )))
        }
        ReferencePolicy::MostPopular => Err(Error::WrongBranch(
            "most-popular closed forms exclude γ = 1".to_string(),
        )),
    }
}

/// Delay-side view of a target optimal outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayPoint {
    /// Effective SNR `η_eff`.
    pub eta_eff: f64,
    /// Minimum achievable latency `D* = comm_delay + compute_delay` (s).
    pub d_star: f64,
    pub comm_delay: f64,
    pub compute_delay: f64,
    /// `(F^U+F^D) / (B log₂ η_eff)`, the high-SNR communication-only
    /// approximation. `None` unless `η_eff > 1`.
    pub comm_only: Option<f64>,
}

/// `η_eff = η (κS)^{α/2} / (M ln((1-γ)e^γ / P_o*))^{α/2}`.
pub fn effective_snr(params: &SystemParams, derived: &DerivedParams, target_outage: f64) -> Result<f64> {
    let g = params.zipf_exponent;
    if g >= 1.0 {
        return Err(Error::WrongBranch(format!(
            "the delay reformulation needs γ < 1, got {g}"
        )));
    }
    let gain = zipf_gain(g);
    if !(target_outage > 0.0 && target_outage < gain) {
        return Err(Error::domain(format!(
            "target outage must lie in (0, (1-γ)e^γ = {gain}), got {target_outage}"
        )));
    }
    if params.cache_size <= 0.0 {
        return Err(Error::domain("the delay reformulation needs a positive cache size"));
    }
    let log_term = (-g).ln_1p() + g - target_outage.ln();
    let half_alpha = params.pathloss / 2.0;
    let base = derived.kappa.ln() + params.cache_size.ln() - (params.library_size as f64).ln() - log_term.ln();
    Ok((derived.snr.ln() + half_alpha * base).exp())
}

/// Minimum latency at which the exponential-law optimal outage equals `target_outage`.
pub fn min_latency(params: &SystemParams, derived: &DerivedParams, target_outage: f64) -> Result<DelayPoint> {
    let eta_eff = effective_snr(params, derived, target_outage)?;
    let bits = params.total_bits();
    let comm_delay = bits * std::f64::consts::LN_2 / (params.bandwidth * eta_eff.ln_1p());
    let compute_delay = params.compute_delay();
    let comm_only = (eta_eff > 1.0).then(|| bits / (params.bandwidth * eta_eff.log2()));
    Ok(DelayPoint {
        eta_eff,
        d_star: comm_delay + compute_delay,
        comm_delay,
        compute_delay,
        comm_only,
    })
}
