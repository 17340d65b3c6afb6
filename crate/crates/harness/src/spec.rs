use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use edge3c::mc::{Radius, TrialConfig};
use edge3c::variants::BackhaulParams;
use edge3c::{validate_params, Error as ModelError, SystemParams};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    LatencyD,
    CacheRatio,
    ZipfGamma,
    Density,
    BackhaulProb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Optimal,
    MostPopular,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Evaluator {
    ClosedForm,
    Asymptotic,
    Bounds,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    BackhaulOnly,
    CacheBackhaul,
    Hierarchical,
    ColocatedCompare,
}

macro_rules! named {
    ($ty:ident { $($var:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$var),+];

            pub fn name(self) -> &'static str {
                match self { $($ty::$var => $name),+ }
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($ty::$var),)+
                    _ => Err(format!(
                        "unknown value {s:?}, expected one of: {}",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}

named!(SweepAxis {
    LatencyD => "latency_D",
    CacheRatio => "cache_ratio",
    ZipfGamma => "zipf_gamma",
    Density => "density",
    BackhaulProb => "backhaul_prob",
});
named!(PolicyKind { Optimal => "optimal", MostPopular => "most_popular", Uniform => "uniform" });
named!(Evaluator {
    ClosedForm => "closed_form",
    Asymptotic => "asymptotic",
    Bounds => "bounds",
    MonteCarlo => "monte_carlo",
});
named!(Variant {
    BackhaulOnly => "backhaul_only",
    CacheBackhaul => "cache_backhaul",
    Hierarchical => "hierarchical",
    ColocatedCompare => "colocated_compare",
});

/// A fully parsed and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SystemParams,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub evaluators: Vec<Evaluator>,
    pub variant: Option<Variant>,
    pub backhaul: BackhaulParams,
    /// Scale `c` for the co-location comparison, `(λ, S) → (cλ, S/c)`.
    pub colocation_scale: f64,
    /// `mc.seed` from the file, if present. See [`resolve_seed`].
    pub seed: Option<u64>,
    pub mc: TrialConfig,
    /// Record wall time per row. Off by default so output is reproducible.
    pub timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            base: SystemParams::default(),
            sweep_axis: SweepAxis::CacheRatio,
            sweep_values: vec![0.1],
            policies: PolicyKind::ALL.to_vec(),
            evaluators: vec![Evaluator::ClosedForm],
            variant: None,
            backhaul: BackhaulParams {
                avail_prob: 0.8,
                latency: 0.01,
                storage: 0.0,
            },
            colocation_scale: 4.0,
            seed: None,
            mc: TrialConfig::new(20_000, 0),
            timing: false,
        }
    }
}

impl ExperimentSpec {
    /// Base parameters and backhaul with the sweep axis set to `value`.
    pub fn point(&self, value: f64) -> (SystemParams, BackhaulParams) {
        let mut p = self.base.clone();
        let mut bh = self.backhaul;
        match self.sweep_axis {
            SweepAxis::LatencyD => p.latency = value,
            SweepAxis::CacheRatio => p.cache_size = value * p.library_size as f64,
            SweepAxis::ZipfGamma => p.zipf_exponent = value,
            SweepAxis::Density => p.lambda = value,
            SweepAxis::BackhaulProb => bh.avail_prob = value,
        }
        (p, bh)
    }

    /// The base parameters' value on the sweep axis.
    pub fn base_value(&self) -> f64 {
        match self.sweep_axis {
            SweepAxis::LatencyD => self.base.latency,
            SweepAxis::CacheRatio => self.base.cache_ratio(),
            SweepAxis::ZipfGamma => self.base.zipf_exponent,
            SweepAxis::Density => self.base.lambda,
            SweepAxis::BackhaulProb => self.backhaul.avail_prob,
        }
    }

    /// Checks every invariant that does not depend on running the models.
    /// An infeasible deadline is left to the per-row error column.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Validation(m));
        if self.sweep_values.is_empty() {
            return bad("sweep.values is empty".into());
        }
        let v = &self.sweep_values;
        let up = v.windows(2).all(|w| w[0] < w[1]);
        let down = v.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) || v.iter().any(|x| !x.is_finite()) {
            return bad("sweep.values must be finite and strictly monotone".into());
        }
        if self.policies.is_empty() {
            return bad("run.policies is empty".into());
        }
        if self.evaluators.is_empty() {
            return bad("run.evaluators is empty".into());
        }
        if self.mc.trials == 0 {
            return bad("mc.trials must be at least 1".into());
        }
        if !(self.mc.truncation_eps > 0.0) {
            return bad("mc.truncation_eps must be positive".into());
        }
        if !(self.colocation_scale.is_finite() && self.colocation_scale > 0.0) {
            return bad("variant.scale must be positive".into());
        }
        for &x in v {
            let (p, bh) = self.point(x);
            match validate_params(p.clone()) {
                Ok(_) | Err(ModelError::InfeasibleLatency { .. }) => {}
                Err(e) => return bad(format!("{} = {x}: {e}", self.sweep_axis.name())),
            }
            let g = p.zipf_exponent;
            if self.evaluators.contains(&Evaluator::Asymptotic) && g >= 1.0 {
                return bad(format!("evaluator asymptotic needs zipf_exponent < 1, got {g}"));
            }
            if self.evaluators.contains(&Evaluator::Bounds) && g <= 1.0 {
                return bad(format!("evaluator bounds needs zipf_exponent > 1, got {g}"));
            }
            if self.variant.is_some() {
                if !(0.0..=1.0).contains(&bh.avail_prob) {
                    return bad(format!("backhaul.avail_prob must be in [0, 1], got {}", bh.avail_prob));
                }
                if !(bh.latency >= 0.0 && bh.latency < p.latency) {
                    return bad(format!("backhaul.latency must be in [0, latency), got {}", bh.latency));
                }
                if !(bh.storage >= 0.0 && bh.storage <= p.library_size as f64) {
                    return bad(format!("backhaul.storage {} exceeds the library size", bh.storage));
                }
            }
            if self.variant == Some(Variant::ColocatedCompare) {
                if g >= 1.0 {
                    return bad(format!("colocated_compare needs zipf_exponent < 1, got {g}"));
                }
                if p.cache_size / self.colocation_scale > p.library_size as f64 {
                    return bad("variant.scale pushes the cache size above the library size".into());
                }
            }
        }
        Ok(())
    }
}

/// Seed precedence: command line, then the scenario file, then the
/// `EDGE3C_SEED` environment variable, then zero.
pub fn resolve_seed(flag: Option<u64>, spec: Option<u64>, env: Option<&str>) -> Result<u64, HarnessError> {
    if let Some(s) = flag.or(spec) {
        return Ok(s);
    }
    match env {
        Some(text) => text
            .trim()
            .parse()
            .map_err(|_| HarnessError::Validation(format!("EDGE3C_SEED is not an unsigned integer: {text:?}"))),
        None => Ok(0),
    }
}

fn list<T: FromStr<Err = String>>(v: &str) -> Result<Vec<T>, String> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        out.push(item.parse()?);
    }
    Ok(out)
}

fn num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?} as a number"))
}

fn flag(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

fn dedup<T: PartialEq + Copy>(items: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Parses scenario text. Unset keys keep their defaults.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec, HarnessError> {
    let mut spec = ExperimentSpec::default();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(HarnessError::Parse {
                line,
                key: content.to_string(),
                msg: "expected `key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let fail = |msg: String| HarnessError::Parse {
            line,
            key: key.to_string(),
            msg,
        };
        if !seen.insert(key.to_string()) {
            return Err(fail("duplicate key".into()));
        }
        apply(&mut spec, key, value).map_err(fail)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn apply(spec: &mut ExperimentSpec, key: &str, v: &str) -> Result<(), String> {
    let p = &mut spec.base;
    match key {
        "system.lambda" => p.lambda = num(v)?,
        "system.tx_power" => p.tx_power = num(v)?,
        "system.noise_power" => p.noise_power = num(v)?,
        "system.alpha" => p.pathloss = num(v)?,
        "system.nakagami_m" => p.nakagami_m = num(v)?,
        "system.bandwidth" => p.bandwidth = num(v)?,
        "system.compute_rate" => p.compute_rate = num(v)?,
        "system.upload_bits" => p.upload_bits = num(v)?,
        "system.download_bits" => p.download_bits = num(v)?,
        "system.cycles_per_bit_up" => p.cycles_per_bit_up = num(v)?,
        "system.cycles_per_bit_down" => p.cycles_per_bit_down = num(v)?,
        "system.latency" => p.latency = num(v)?,
        "system.library_size" => p.library_size = num(v)?,
        "system.cache_size" => p.cache_size = num(v)?,
        "system.zipf_exponent" => p.zipf_exponent = num(v)?,
        "sweep.axis" => spec.sweep_axis = v.parse()?,
        "sweep.values" => {
            spec.sweep_values = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(num)
                .collect::<Result<_, _>>()?
        }
        "run.policies" => spec.policies = dedup(list(v)?),
        "run.evaluators" => spec.evaluators = dedup(list(v)?),
        "run.variant" => spec.variant = if v == "none" { None } else { Some(v.parse()?) },
        "backhaul.avail_prob" => spec.backhaul.avail_prob = num(v)?,
        "backhaul.latency" => spec.backhaul.latency = num(v)?,
        "backhaul.storage" => spec.backhaul.storage = num(v)?,
        "variant.scale" => spec.colocation_scale = num(v)?,
        "mc.trials" => spec.mc.trials = num(v)?,
        "mc.seed" => {
            let seed = num(v)?;
            spec.seed = Some(seed);
            spec.mc.seed = seed;
        }
        "mc.radius" => {
            spec.mc.radius = if v == "auto" {
                Radius::Auto
            } else {
                Radius::Fixed(num(v)?)
            }
        }
        "mc.truncation_eps" => spec.mc.truncation_eps = num(v)?,
        "mc.max_radius" => spec.mc.max_radius = num(v)?,
        "mc.stratified" => spec.mc.stratified = flag(v)?,
        "output.timing" => spec.timing = flag(v)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

/// Reads and parses a scenario file.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec, HarnessError> {
    parse_spec(&std::fs::read_to_string(path)?)
}
