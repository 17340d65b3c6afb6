//! System parameters, derived link constants and the Zipf popularity model.
//!
//! The central quantity is the composite link constant `κ'`: with a
//! randomized caching policy, the probability that a request for item `f`
//! completes within the deadline is `1 - exp(-κ' p_c(f))`. `κ'` folds in the
//! BS density, fading, SNR, bandwidth, compute rate and the deadline.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Physical, task and library parameters of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// BS density (BS per unit area).
    pub lambda: f64,
    /// Transmit power `P` (W).
    pub tx_power: f64,
    /// Noise power `σ²` (W).
    pub noise_power: f64,
    /// Pathloss exponent `α`, must exceed 2.
    pub pathloss: f64,
    /// Nakagami shape `m_D`, at least 1/2.
    pub nakagami_m: f64,
    /// Bandwidth per user `B` (Hz).
    pub bandwidth: f64,
    /// Compute rate per user `E_c` (cycles/s).
    pub compute_rate: f64,
    /// Uplink payload `F^U` (bits).
    pub upload_bits: f64,
    /// Downlink payload `F^D` (bits).
    pub download_bits: f64,
    /// Compute load per uploaded bit `ν^U` (cycles/bit).
    pub cycles_per_bit_up: f64,
    /// Compute load per downloaded bit `ν^D` (cycles/bit).
    pub cycles_per_bit_down: f64,
    /// Latency requirement `D` (s).
    pub latency: f64,
    /// Library size `M`.
    pub library_size: usize,
    /// Cache size per BS `S`. Real-valued; breakpoints like `c₁S` are real.
    pub cache_size: f64,
    /// Zipf exponent `γ`.
    pub zipf_exponent: f64,
}

impl Default for SystemParams {
    /// A 20 MHz urban-macro-like scenario: 10 BS/km², 1 W, α = 4, Rayleigh
    /// fading, 1 Mbit per task, 10 ms of compute and a 50 ms deadline.
    fn default() -> Self {
        SystemParams {
            lambda: 1e-5,
            tx_power: 1.0,
            noise_power: 4e-13,
            pathloss: 4.0,
            nakagami_m: 1.0,
            bandwidth: 2e7,
            compute_rate: 1e10,
            upload_bits: 4e5,
            download_bits: 6e5,
            cycles_per_bit_up: 100.0,
            cycles_per_bit_down: 100.0,
            latency: 0.05,
            library_size: 1000,
            cache_size: 100.0,
            zipf_exponent: 0.8,
        }
    }
}

impl SystemParams {
    pub fn total_bits(&self) -> f64 {
        self.upload_bits + self.download_bits
    }

    /// Computation delay `(ν^U F^U + ν^D F^D) / E_c`.
    pub fn compute_delay(&self) -> f64 {
        (self.cycles_per_bit_up * self.upload_bits + self.cycles_per_bit_down * self.download_bits) / self.compute_rate
    }

    /// Cache-to-library ratio `S / M`.
    pub fn cache_ratio(&self) -> f64 {
        self.cache_size / self.library_size as f64
    }

    /// Rescales the BS density so that the derived `κ'` equals `target`.
    ///
    /// `κ'` is linear in `λ`, so only `lambda` changes.
    pub fn with_kappa_prime(&self, target: f64) -> Result<SystemParams> {
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::domain(format!("target κ' must be positive, got {target}")));
        }
        let current = derive(self)?.kappa_prime;
        let mut out = self.clone();
        out.lambda = self.lambda * (target / current);
        Ok(out)
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}

/// Validates every parameter invariant. `γ = 1` is accepted here; the
/// asymptotic operations reject it themselves.
pub fn validate_params(raw: SystemParams) -> Result<SystemParams> {
    let p = &raw;
    let pos = |v: f64| v.is_finite() && v > 0.0;
    let nonneg = |v: f64| v.is_finite() && v >= 0.0;
    check(pos(p.lambda), || {
        format!("BS density must be positive, got {}", p.lambda)
    })?;
    check(pos(p.tx_power), || {
        format!("transmit power must be positive, got {}", p.tx_power)
    })?;
    check(pos(p.noise_power), || {
        format!("noise power must be positive, got {}", p.noise_power)
    })?;
    check(p.pathloss.is_finite() && p.pathloss > 2.0, || {
        format!("pathloss exponent must exceed 2, got {}", p.pathloss)
    })?;
    check(p.nakagami_m.is_finite() && p.nakagami_m >= 0.5, || {
        format!("Nakagami m must be at least 0.5, got {}", p.nakagami_m)
    })?;
    check(pos(p.bandwidth), || {
        format!("bandwidth must be positive, got {}", p.bandwidth)
    })?;
    check(pos(p.compute_rate), || {
        format!("compute rate must be positive, got {}", p.compute_rate)
    })?;
    check(nonneg(p.upload_bits), || {
        format!("upload bits must be non-negative, got {}", p.upload_bits)
    })?;
    check(nonneg(p.download_bits), || {
        format!("download bits must be non-negative, got {}", p.download_bits)
    })?;
    check(p.total_bits() > 0.0, || {
        "upload plus download bits must be positive".to_string()
    })?;
    check(nonneg(p.cycles_per_bit_up), || {
        format!("uplink compute scale must be non-negative, got {}", p.cycles_per_bit_up)
    })?;
    check(nonneg(p.cycles_per_bit_down), || {
        format!(
            "downlink compute scale must be non-negative, got {}",
            p.cycles_per_bit_down
        )
    })?;
    check(pos(p.latency), || {
        format!("latency requirement must be positive, got {}", p.latency)
    })?;
    check(p.library_size >= 1, || "library size must be at least 1".to_string())?;
    check(nonneg(p.zipf_exponent), || {
        format!("Zipf exponent must be non-negative, got {}", p.zipf_exponent)
    })?;
    if !(p.cache_size.is_finite() && p.cache_size >= 0.0 && p.cache_size <= p.library_size as f64) {
        return Err(Error::BudgetInfeasible {
            budget: p.cache_size,
            library: p.library_size,
        });
    }
    let fixed = p.compute_delay();
    if p.latency - fixed <= 0.0 {
        return Err(Error::InfeasibleLatency {
            deadline: p.latency,
            fixed_delay: fixed,
        });
    }
    Ok(raw)
}

/// Constants derived from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// `δ = 2/α`
    pub delta: f64,
    /// `η = P/σ²`
    pub snr: f64,
    /// `κ = πλ Γ(δ+m) / (m^δ Γ(m))`
    pub kappa: f64,
    /// Required spectral efficiency `ρ` (bit/s/Hz).
    pub required_rate: f64,
    /// SINR threshold `2^ρ - 1`.
    pub threshold: f64,
    pub kappa_prime: f64,
    /// `κ_T = S κ' / M`
    pub kappa_t: f64,
    /// `γ ≠ 1`: the asymptotic formulas apply.
    pub asymptotic_ok: bool,
}

/// Fading/density factor `πλ Γ(δ+m) / (m^δ Γ(m))`.
pub(crate) fn fading_constant(lambda: f64, delta: f64, m: f64) -> f64 {
    std::f64::consts::PI * lambda * gamma(delta + m) / (m.powf(delta) * gamma(m))
}

/// Link constant for a given time budget left for transmission:
/// `κ (η / (2^ρ - 1))^δ` with `ρ = (F^U+F^D) / (B · budget)`.
pub(crate) fn link_constant(p: &SystemParams, kappa: f64, tx_time: f64) -> (f64, f64, f64) {
    let delta = 2.0 / p.pathloss;
    let snr = p.tx_power / p.noise_power;
    let rho = p.total_bits() / (p.bandwidth * tx_time);
    let threshold = (rho * std::f64::consts::LN_2).exp_m1();
    (kappa * (snr / threshold).powf(delta), rho, threshold)
}

/// Computes every derived constant. Validates first.
pub fn derive(params: &SystemParams) -> Result<DerivedParams> {
    let p = validate_params(params.clone())?;
    let delta = 2.0 / p.pathloss;
    let snr = p.tx_power / p.noise_power;
    let kappa = fading_constant(p.lambda, delta, p.nakagami_m);
    let (kappa_prime, required_rate, threshold) = link_constant(&p, kappa, p.latency - p.compute_delay());
    Ok(DerivedParams {
        delta,
        snr,
        kappa,
        required_rate,
        threshold,
        kappa_prime,
        kappa_t: p.cache_size * kappa_prime / p.library_size as f64,
        asymptotic_ok: p.zipf_exponent != 1.0,
    })
}

/// Partial harmonic sum `H(a, b, γ) = Σ_{m=a}^{b} m^{-γ}`.
///
/// Summed from the small end (largest index first). Ranges longer than 10⁶
/// terms use Neumaier compensation.
pub fn partial_sum(a: u64, b: u64, gamma_exp: f64) -> f64 {
    assert!(a >= 1 && a <= b, "partial_sum requires 1 <= a <= b, got a={a}, b={b}");
    let term = |m: u64| (m as f64).powf(-gamma_exp);
    if b - a <= 1_000_000 {
        return (a..=b).rev().map(term).sum();
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for m in (a..=b).rev() {
        let t = term(m);
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Zipf request distribution over a library of `M` items.
#[derive(Debug, Clone, PartialEq)]
pub struct Popularity {
    exponent: f64,
    pmf: Vec<f64>,
    norm: f64,
}

impl Popularity {
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// `H(1, M, γ)`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Request probability of item `f` (1-based).
    pub fn prob(&self, f: usize) -> f64 {
        self.pmf[f - 1]
    }

    /// Mass of items `a..=b` (1-based), summed directly.
    pub fn mass(&self, a: usize, b: usize) -> f64 {
        self.pmf[a - 1..b].iter().rev().sum()
    }
}

/// Builds the Zipf pmf `f^{-γ} / H(1, M, γ)`.
///
/// # Panics
/// If `library_size` is zero or `gamma_exp` is negative or not finite.
pub fn zipf(library_size: usize, gamma_exp: f64) -> Popularity {
    assert!(library_size >= 1, "library size must be at least 1");
    assert!(gamma_exp.is_finite() && gamma_exp >= 0.0, "Zipf exponent must be >= 0");
    let norm = partial_sum(1, library_size as u64, gamma_exp);
    let pmf = (1..=library_size).map(|f| (f as f64).powf(-gamma_exp) / norm).collect();
    Popularity {
        exponent: gamma_exp,
        pmf,
        norm,
    }
}

/// A randomized caching policy: item `f` is cached at each BS independently
/// with probability `probs[f-1]`, and the probabilities sum to the cache size.
#[derive(Debug, Clone, PartialEq)]
pub struct CachingPolicy {
    probs: Vec<f64>,
    budget: f64,
}

impl CachingPolicy {
    /// Tolerance on `Σ p = S`.
    pub fn budget_tolerance(budget: f64) -> f64 {
        1e-9 * budget.max(1.0)
    }

    pub fn new(probs: Vec<f64>, budget: f64) -> Result<Self> {
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::domain(format!(
                "caching probability {p} at item {} is outside [0, 1]",
                i + 1
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - budget).abs() > Self::budget_tolerance(budget) {
            return Err(Error::domain(format!(
                "caching probabilities sum to {total}, expected {budget}"
            )));
        }
        Ok(CachingPolicy { probs, budget })
    }

    pub(crate) fn from_parts_unchecked(probs: Vec<f64>, budget: f64) -> Self {
        CachingPolicy { probs, budget }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Caching probability of item `f` (1-based).
    pub fn prob(&self, f: usize) -> f64 {
        self.probs[f - 1]
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn deadline_equal_to_compute_delay_is_infeasible() {
        let mut p = SystemParams::default();
        p.latency = p.compute_delay();
        assert!(matches!(validate_params(p), Err(Error::InfeasibleLatency { .. })));
    }

    #[test]
    fn alpha_four_gives_half_delta() {
        let mut p = SystemParams::default();
        p.pathloss = 4.0;
        let d = derive(&p).unwrap();
        assert_eq!(d.delta, 0.5);
    }

    #[test]
    fn domain_violations_rejected() {
        let mut p = SystemParams::default();
        p.pathloss = 2.0;
        assert!(matches!(validate_params(p), Err(Error::Domain(_))));
        let mut p = SystemParams::default();
        p.nakagami_m = 0.49;
        assert!(matches!(validate_params(p), Err(Error::Domain(_))));
        let mut p = SystemParams::default();
        p.cache_size = 1001.0;
        assert!(matches!(validate_params(p), Err(Error::BudgetInfeasible { .. })));
        let mut p = SystemParams::default();
        p.upload_bits = 0.0;
        p.download_bits = 0.0;
        assert!(validate_params(p).is_err());
        // γ = 1 is fine for exact computations.
        let mut p = SystemParams::default();
        p.zipf_exponent = 1.0;
        let d = derive(&p).unwrap();
        assert!(!d.asymptotic_ok);
    }

    #[test]
    fn large_deadline_gives_small_rate() {
        let mut p = SystemParams::default();
        p.latency = 10.0;
        let d = derive(&p).unwrap();
        // 1e6 / (2e7 * 9.99)
        assert!(rel(d.required_rate, 0.005005005005005005) < 1e-14);
    }

    #[test]
    fn rayleigh_kappa_identity() {
        let mut p = SystemParams::default();
        p.nakagami_m = 1.0;
        p.pathloss = 4.0;
        let d = derive(&p).unwrap();
        let expect = std::f64::consts::PI * p.lambda * std::f64::consts::PI.sqrt() / 2.0;
        assert!(rel(d.kappa, expect) < 1e-13);
    }

    #[test]
    fn unit_snr_ratio_gives_kappa_prime_equal_kappa() {
        // Pick P so that η = 2^ρ - 1 exactly.
        let mut p = SystemParams::default();
        let d0 = derive(&p).unwrap();
        p.tx_power = d0.threshold * p.noise_power;
        let d = derive(&p).unwrap();
        assert!(rel(d.kappa_prime, d.kappa) < 1e-13);
    }

    #[test]
    fn default_scenario_matches_high_precision_values() {
        // Reference values from a 40-digit evaluation.
        let d = derive(&SystemParams::default()).unwrap();
        assert!(rel(d.required_rate, 1.25) < 1e-15);
        assert!(rel(d.kappa, 2.784163998415853922642e-5) < 1e-13);
        assert!(rel(d.kappa_prime, 37.49513691395592046947) < 1e-12);
        assert!(rel(d.kappa_t, 3.749513691395592046947) < 1e-12);

        let mut p = SystemParams::default();
        p.pathloss = 3.0;
        p.nakagami_m = 3.0;
        let d = derive(&p).unwrap();
        assert!(rel(d.kappa, 3.029854373033387910096e-5) < 1e-13);
        assert!(rel(d.kappa_prime, 4506.042278809667639793) < 1e-12);

        p.pathloss = 3.5;
        p.nakagami_m = 0.5;
        let d = derive(&p).unwrap();
        assert!(rel(d.kappa, 2.537745967655764984959e-5) < 1e-13);
    }

    #[test]
    fn kappa_prime_monotonicity() {
        let base = SystemParams::default();
        let k0 = derive(&base).unwrap().kappa_prime;
        let mut p = base.clone();
        p.latency = 0.03;
        assert!(derive(&p).unwrap().kappa_prime < k0);
        let mut p = base.clone();
        p.lambda *= 2.0;
        assert!(derive(&p).unwrap().kappa_prime > k0);
        let mut p = base.clone();
        p.tx_power *= 2.0;
        assert!(derive(&p).unwrap().kappa_prime > k0);
    }

    #[test]
    fn with_kappa_prime_hits_target() {
        let p = SystemParams::default().with_kappa_prime(2.5).unwrap();
        assert!(rel(derive(&p).unwrap().kappa_prime, 2.5) < 1e-14);
    }

    #[test]
    fn derive_is_bit_identical() {
        let p = SystemParams::default();
        assert_eq!(derive(&p).unwrap(), derive(&p).unwrap());
    }

    #[test]
    fn zipf_examples() {
        let u = zipf(4, 0.0);
        assert_eq!(u.pmf(), &[0.25; 4]);
        assert_eq!(zipf(1, 2.3).pmf(), &[1.0]);
        let z = zipf(1000, 0.8);
        assert!(rel(z.prob(1), 0.06464203343751789480889) < 1e-13);
        assert!(rel(z.norm(), 15.46981038222732147789) < 1e-13);
    }

    #[test]
    fn partial_sum_examples() {
        assert_eq!(partial_sum(1, 1, 3.7), 1.0);
        assert!(rel(partial_sum(1, 3, 1.0), 1.0 + 0.5 + 1.0 / 3.0) < 1e-15);
        assert!(rel(partial_sum(5, 100, 1.2), 1.710712770189429896038) < 1e-13);
    }

    #[test]
    fn partial_sum_compensated_range() {
        // H(1, n, 0) = n exactly, even through the compensated branch.
        assert_eq!(partial_sum(1, 2_000_001, 0.0), 2_000_001.0);
        let split = partial_sum(1, 1_000_000, 0.5) + partial_sum(1_000_001, 2_500_000, 0.5);
        assert!(rel(partial_sum(1, 2_500_000, 0.5), split) < 1e-13);
    }

    #[test]
    fn policy_constructor_checks_invariants() {
        assert!(CachingPolicy::new(vec![0.5, 0.5], 1.0).is_ok());
        assert!(CachingPolicy::new(vec![1.2, -0.2], 1.0).is_err());
        assert!(CachingPolicy::new(vec![0.5, 0.4], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn zipf_is_a_nonincreasing_pmf(m in 1usize..3000, g in 0.0f64..3.0) {
            let z = zipf(m, g);
            let total: f64 = z.pmf().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(z.pmf().windows(2).all(|w| w[1] <= w[0]));
        }

        #[test]
        fn success_with_full_caching_is_one_minus_exp_kappa_prime(
            lambda in 1e-7f64..1e-4, alpha in 2.1f64..6.0, m in 0.5f64..5.0, latency in 0.011f64..1.0,
        ) {
            let mut p = SystemParams::default();
            p.lambda = lambda;
            p.pathloss = alpha;
            p.nakagami_m = m;
            p.latency = latency;
            let d = derive(&p).unwrap();
            // Success probability with p_c = 1, evaluated in its unfactored form.
            let rho = p.total_bits() / (p.bandwidth * (p.latency - p.compute_delay()));
            let direct = 1.0 - (-d.kappa * (d.snr / (2f64.powf(rho) - 1.0)).powf(2.0 / alpha)).exp();
            let factored = 1.0 - (-d.kappa_prime).exp();
            prop_assert!((direct - factored).abs() <= 1e-12 * factored.max(1e-300) + 1e-15);
        }
    }
}
