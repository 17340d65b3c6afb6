//! Integral-comparison bounds on log sums, power sums and Zipf masses.
//!
//! These are used as independent checks on the analytic expressions and on
//! [`partial_sum`](crate::model::partial_sum).

use crate::error::{Error, Result};

/// A lower/upper pair, `lower ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

impl BoundPair {
    fn checked(lower: f64, upper: f64, what: &str) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::domain(format!("{what}: bounds inverted ({lower} > {upper})")));
        }
        Ok(BoundPair { lower, upper })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// `upper / lower`.
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }
}

fn x_ln_x(x: f64) -> f64 {
    x * x.ln()
}

/// Bounds on `Σ_{f=a}^{b} ln f` for `0 < a < b`.
pub fn logsum_bounds(a: u64, b: u64) -> Result<BoundPair> {
    if a == 0 || a >= b {
        return Err(Error::domain(format!(
            "log-sum bounds need 0 < a < b, got a={a}, b={b}"
        )));
    }
    let (a, b) = (a as f64, b as f64);
    let upper = x_ln_x(b + 1.0) - (b + 1.0) - x_ln_x(a) + a;
    let lower = a.ln() + x_ln_x(b) - b - x_ln_x(a) + a;
    BoundPair::checked(lower, upper, "log-sum")
}

/// Bounds on `H(a, b, γ) = Σ_{m=a}^{b} m^{-γ}` for `γ ≠ 1`.
pub fn power_sum_bounds(a: u64, b: u64, gamma_exp: f64) -> Result<BoundPair> {
    if a == 0 || a > b {
        return Err(Error::domain(format!(
            "power-sum bounds need 1 <= a <= b, got a={a}, b={b}"
        )));
    }
    if gamma_exp == 1.0 || !gamma_exp.is_finite() {
        return Err(Error::domain(format!(
            "power-sum bounds need a finite γ != 1, got {gamma_exp}"
        )));
    }
    let e = 1.0 - gamma_exp;
    let (a, b) = (a as f64, b as f64);
    let lower = ((b + 1.0).powf(e) - a.powf(e)) / e;
    let upper = (b.powf(e) - a.powf(e)) / e + a.powf(-gamma_exp);
    BoundPair::checked(lower, upper, "power-sum")
}

/// Bounds on the Zipf mass `Σ_{f=a}^{b} P_r(f)` over a library of `M` items, `γ ≠ 1`.
pub fn zipf_mass_bounds(a: u64, b: u64, library_size: u64, gamma_exp: f64) -> Result<BoundPair> {
    if a == 0 || a > b || b > library_size {
        return Err(Error::domain(format!(
            "Zipf-mass bounds need 1 <= a <= b <= M, got a={a}, b={b}, M={library_size}"
        )));
    }
    if gamma_exp == 1.0 || !gamma_exp.is_finite() {
        return Err(Error::domain(format!(
            "Zipf-mass bounds need a finite γ != 1, got {gamma_exp}"
        )));
    }
    let e = 1.0 - gamma_exp;
    let (a, b, m) = (a as f64, b as f64, library_size as f64);
    let lower = ((b + 1.0).powf(e) - a.powf(e)) / (m.powf(e) - gamma_exp);
    let upper = (b.powf(e) - a.powf(e) + e * a.powf(-gamma_exp)) / ((m + 1.0).powf(e) - 1.0);
    BoundPair::checked(lower, upper, "Zipf-mass")
}
