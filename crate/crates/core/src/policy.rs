//! Optimal randomized caching by water-filling, the two reference policies,
//! and the asymptotic regime breakpoints of the optimal policy.
//!
//! Minimizing `Σ w_f exp(-κ' p_f)` over `Σ p_f = S`, `0 ≤ p_f ≤ 1` gives
//! `p_f = min(1, [ln(κ' w_f / ζ) / κ']^+)` for a multiplier `ζ > 0`. The
//! solver bisects on `ln ζ`, which keeps the search well scaled even when
//! `ζ` is far below `f64::MIN_POSITIVE`.

use crate::error::{Error, Result};
use crate::model::{CachingPolicy, DerivedParams, Popularity, SystemParams};

const MAX_BISECTION_STEPS: usize = 200;

/// Final state of the multiplier search.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// `ln ζ`
    pub log_zeta: f64,
    /// Final `(ln ζ_lo, ln ζ_hi)` bracket.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `Σ p - S` at the returned multiplier.
    pub budget_residual: f64,
    kappa_prime: f64,
}

impl SolverState {
    /// `ζ`; underflows to zero for very small multipliers, see `log_zeta`.
    pub fn zeta(&self) -> f64 {
        self.log_zeta.exp()
    }

    /// `ln ν` with `ν = (ζ/κ')^{1/κ'}`.
    pub fn log_nu(&self) -> f64 {
        (self.log_zeta - self.kappa_prime.ln()) / self.kappa_prime
    }

    /// `z_f = P_r(f)^{1/κ'}`. With these, interior entries are `ln(z_f/ν)`.
    pub fn z(&self, pop: &Popularity) -> Vec<f64> {
        pop.pmf().iter().map(|p| p.powf(1.0 / self.kappa_prime)).collect()
    }
}

fn fill(levels: &[f64], kappa_prime: f64, log_zeta: f64) -> impl Iterator<Item = f64> + '_ {
    levels
        .iter()
        .map(move |a| ((a - log_zeta) / kappa_prime).clamp(0.0, 1.0))
}

fn budget_at(levels: &[f64], kappa_prime: f64, log_zeta: f64) -> f64 {
    fill(levels, kappa_prime, log_zeta).sum()
}

/// Water-filling for arbitrary positive (not necessarily normalized) weights.
///
/// Used directly by the hierarchical optimizer, where the effective weights
/// are the popularity discounted by the other cache layer.
pub fn water_fill(weights: &[f64], kappa_prime: f64, budget: f64) -> Result<(CachingPolicy, SolverState)> {
    let m = weights.len();
    if m == 0 {
        return Err(Error::domain("empty weight vector"));
    }
    if !(kappa_prime.is_finite() && kappa_prime > 0.0) {
        return Err(Error::domain(format!("κ' must be positive, got {kappa_prime}")));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::domain("weights must be finite and non-negative"));
    }
    let positive = weights.iter().filter(|w| **w > 0.0).count();
    if !(budget.is_finite() && budget >= 0.0 && budget <= m as f64) || budget > positive as f64 {
        return Err(Error::BudgetInfeasible { budget, library: m });
    }

    let levels: Vec<f64> = weights.iter().map(|w| (kappa_prime * w).ln()).collect();
    let top = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let state = |log_zeta: f64, bracket, iterations, residual| SolverState {
        log_zeta,
        bracket,
        iterations,
        budget_residual: residual,
        kappa_prime,
    };

    if budget == 0.0 {
        return Ok((
            CachingPolicy::from_parts_unchecked(vec![0.0; m], 0.0),
            state(top, (top, top), 0, 0.0),
        ));
    }
    if budget == m as f64 {
        let bottom = levels.iter().copied().fold(f64::INFINITY, f64::min) - kappa_prime;
        return Ok((
            CachingPolicy::from_parts_unchecked(vec![1.0; m], budget),
            state(bottom, (bottom, bottom), 0, 0.0),
        ));
    }
    // Equal weights (γ = 0): the bisection is degenerate, the uniform split is optimal.
    if weights.iter().all(|w| *w == weights[0]) {
        let share = budget / m as f64;
        let log_zeta = levels[0] - kappa_prime * share;
        return Ok((
            uniform_policy(m, budget)?,
            state(log_zeta, (log_zeta, log_zeta), 0, 0.0),
        ));
    }

    let tol = CachingPolicy::budget_tolerance(budget);
    // ζ_hi = κ' max w empties the cache; halve ζ until the budget is covered.
    let mut hi = top;
    let mut lo = hi - std::f64::consts::LN_2;
    let mut iterations = 0;
    while budget_at(&levels, kappa_prime, lo) < budget {
        hi = lo;
        lo -= std::f64::consts::LN_2;
        iterations += 1;
    }

    let mut mid = 0.5 * (lo + hi);
    let mut residual = budget_at(&levels, kappa_prime, mid) - budget;
    for _ in 0..MAX_BISECTION_STEPS {
        iterations += 1;
        if residual.abs() < tol {
            break;
        }
        if residual > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == mid {
            break;
        }
        mid = next;
        residual = budget_at(&levels, kappa_prime, mid) - budget;
    }

    // The budget is piecewise linear in ln ζ with slope -n/κ' on the current
    // active set, so one secant step removes the remaining bisection error.
    let interior = fill(&levels, kappa_prime, mid).filter(|p| *p > 0.0 && *p < 1.0).count();
    if interior > 0 {
        let polished = mid + kappa_prime * residual / interior as f64;
        let r = budget_at(&levels, kappa_prime, polished) - budget;
        if r.abs() < residual.abs() {
            mid = polished;
            residual = r;
        }
    }

    let probs: Vec<f64> = fill(&levels, kappa_prime, mid).collect();
    Ok((
        CachingPolicy::from_parts_unchecked(probs, budget),
        state(mid, (lo, hi), iterations, residual),
    ))
}

/// Outage-minimizing caching policy for Zipf requests.
pub fn optimal_policy(pop: &Popularity, kappa_prime: f64, budget: f64) -> Result<CachingPolicy> {
    solve_optimal(pop, kappa_prime, budget).map(|(p, _)| p)
}

/// Same as [`optimal_policy`], also returning the multiplier search state.
pub fn solve_optimal(pop: &Popularity, kappa_prime: f64, budget: f64) -> Result<(CachingPolicy, SolverState)> {
    water_fill(pop.pmf(), kappa_prime, budget)
}

/// Caches the `⌊S⌋` most popular items; a fractional remainder goes to item `⌊S⌋+1`.
pub fn most_popular_policy(library_size: usize, budget: f64) -> Result<CachingPolicy> {
    check_budget(library_size, budget)?;
    let full = budget.floor() as usize;
    let mut probs = vec![0.0; library_size];
    probs[..full].iter_mut().for_each(|p| *p = 1.0);
    if full < library_size {
        probs[full] = budget - full as f64;
    }
    Ok(CachingPolicy::from_parts_unchecked(probs, budget))
}

/// Caches every item with probability `S/M`.
pub fn uniform_policy(library_size: usize, budget: f64) -> Result<CachingPolicy> {
    check_budget(library_size, budget)?;
    let share = budget / library_size as f64;
    Ok(CachingPolicy::from_parts_unchecked(vec![share; library_size], budget))
}

fn check_budget(library_size: usize, budget: f64) -> Result<()> {
    if library_size == 0 || !(budget.is_finite() && budget >= 0.0 && budget <= library_size as f64) {
        return Err(Error::BudgetInfeasible {
            budget,
            library: library_size,
        });
    }
    Ok(())
}

/// Relative violation of the KKT conditions for minimizing a separable convex
/// objective over `{Σp = S, 0 ≤ p ≤ 1}`.
///
/// `marginals[f]` is the decrease of the objective per unit of `p_f`. At an
/// optimum the interior entries share a common marginal `μ`, entries at zero
/// have marginal at most `μ`, and entries at one at least `μ`.
pub fn kkt_residual(probs: &[f64], marginals: &[f64]) -> f64 {
    assert_eq!(probs.len(), marginals.len());
    let mut interior = 0usize;
    let mut mu = 0.0;
    let mut max_zero = f64::NEG_INFINITY;
    let mut min_one = f64::INFINITY;
    for (p, g) in probs.iter().zip(marginals) {
        if *p <= 0.0 {
            max_zero = max_zero.max(*g);
        } else if *p >= 1.0 {
            min_one = min_one.min(*g);
        } else {
            interior += 1;
            mu += g;
        }
    }
    if interior == 0 {
        // Any μ between the two clamped groups certifies optimality.
        if max_zero.is_finite() && min_one.is_finite() {
            return ((max_zero - min_one) / min_one.abs().max(max_zero.abs())).max(0.0);
        }
        return 0.0;
    }
    let mu = mu / interior as f64;
    let scale = mu.abs().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for (p, g) in probs.iter().zip(marginals) {
        let v = if *p <= 0.0 {
            g - mu
        } else if *p >= 1.0 {
            mu - g
        } else {
            (g - mu).abs()
        };
        worst = worst.max(v / scale);
    }
    worst
}

/// Which box constraints are active in the optimal policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Head cached with certainty, tail never cached: `0 ≤ m₁ < m₂ < M`.
    I,
    /// No item cached with certainty: `m₁ ≤ 0 < m₂ ≤ M`.
    II,
    /// Head cached with certainty, every item cached with positive probability.
    III,
}

impl Regime {
    /// Reads the regime off a computed policy. `m₁` is the length of the
    /// all-ones head and `m₂` the index of the last positive entry.
    pub fn from_policy(policy: &CachingPolicy) -> Regime {
        let (m1, m2) = empirical_breakpoints(policy);
        if m2 < policy.len() {
            Regime::I
        } else if m1 == 0 {
            Regime::II
        } else {
            Regime::III
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::I => "I",
            Regime::II => "II",
            Regime::III => "III",
        })
    }
}

/// `(m₁, m₂)` of a computed policy: the number of leading entries equal to
/// one, and the largest index with a positive entry.
pub fn empirical_breakpoints(policy: &CachingPolicy) -> (usize, usize) {
    let probs = policy.probs();
    let m1 = probs.iter().take_while(|p| **p >= 1.0).count();
    let m2 = probs.iter().rposition(|p| *p > 0.0).map_or(0, |i| i + 1);
    (m1, m2)
}

/// Asymptotic breakpoints of the optimal policy.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    /// Regime used by the asymptotic evaluators.
    pub regime: Regime,
    /// Regime implied by the breakpoint formulas alone.
    pub formula_regime: Regime,
    /// `m₁* = c₁ S`
    pub m1: f64,
    /// `m₂* = c₂ S`
    pub m2: f64,
    pub c1: f64,
    pub c2: f64,
    /// `m* = min(Sκ'/γ, M)`
    pub m_star: f64,
    /// Root of `C₁ - ln C₁ = (κ'/γ)(1 - C₂) + 1` on `(0, 1]`.
    pub big_c1: f64,
    /// `C₂ = S/M`
    pub big_c2: f64,
}

impl RegimeReport {
    /// Adopts the regime of an exact policy when it disagrees with the
    /// formulas (finite `M` near a regime boundary).
    pub fn reconcile(mut self, policy: &CachingPolicy) -> Self {
        self.regime = Regime::from_policy(policy);
        self
    }
}

/// Solves `C - ln C = rhs` for `C ∈ (0, 1]`, given `rhs ≥ 1`.
///
/// Works on `u = ln C`, where `e^u - u` is strictly decreasing on `u ≤ 0`.
pub fn solve_c1(rhs: f64) -> Result<f64> {
    if rhs.is_nan() || rhs < 1.0 {
        return Err(Error::NoRoot(format!("C1 - ln C1 = {rhs} has no root in (0, 1]")));
    }
    if rhs == 1.0 {
        return Ok(1.0);
    }
    if rhs.is_infinite() {
        return Ok(0.0);
    }
    let g = |u: f64| u.exp() - u - rhs;
    let (mut lo, mut hi) = (-rhs, 0.0f64);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = u.exp() - 1.0;
        if d == 0.0 {
            break;
        }
        let next = u - g(u) / d;
        if next.is_finite() && g(next).abs() <= g(u).abs() {
            u = next;
        }
    }
    Ok(u.exp())
}

/// `c₁ = x / (e^x - 1)` and `c₂ = c₁ e^x` with `x = κ'/γ`, evaluated without overflow.
pub fn breakpoint_constants(kappa_prime: f64, gamma_exp: f64) -> (f64, f64) {
    if gamma_exp == 0.0 {
        return (0.0, f64::INFINITY);
    }
    let x = kappa_prime / gamma_exp;
    (x / x.exp_m1(), x / -(-x).exp_m1())
}

/// Breakpoints `m₁*`, `m₂*`, `m*`, `C₁`, `C₂` and the regime they imply.
pub fn regime_breakpoints(params: &SystemParams, derived: &DerivedParams) -> Result<RegimeReport> {
    let gamma_exp = params.zipf_exponent;
    let kp = derived.kappa_prime;
    if !(gamma_exp.is_finite() && gamma_exp >= 0.0) {
        return Err(Error::domain(format!("Zipf exponent must be >= 0, got {gamma_exp}")));
    }
    if !(kp.is_finite() && kp > 0.0) {
        return Err(Error::domain(format!("κ' must be positive, got {kp}")));
    }
    let s = params.cache_size;
    let m = params.library_size as f64;
    let (c1, c2) = breakpoint_constants(kp, gamma_exp);
    let m1 = c1 * s;
    let m2 = c2 * s;
    let m_star = if gamma_exp == 0.0 {
        m
    } else {
        (s * kp / gamma_exp).min(m)
    };
    let big_c2 = s / m;
    let rhs = if gamma_exp == 0.0 && big_c2 < 1.0 {
        f64::INFINITY
    } else if gamma_exp == 0.0 {
        1.0
    } else {
        kp / gamma_exp * (1.0 - big_c2) + 1.0
    };
    let big_c1 = solve_c1(rhs)?;
    let regime = if m2 < m {
        Regime::I
    } else if m1 < 1.0 {
        Regime::II
    } else {
        Regime::III
    };
    Ok(RegimeReport {
        regime,
        formula_regime: regime,
        m1,
        m2,
        c1,
        c2,
        m_star,
        big_c1,
        big_c2,
    })
}
