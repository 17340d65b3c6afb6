use std::time::Instant;

use edge3c::analytics::{
    asymptotic_outage_gt1, asymptotic_outage_lt1, min_latency, outage, reference_outage, OutageBounds, ReferenceOutage,
    ReferencePolicy,
};
use edge3c::mc::simulate_outage;
use edge3c::variants::{
    backhaul_only_outage, cache_plus_backhaul_asymptotic, cache_plus_backhaul_outage, colocated_vs_distributed,
    colocated_vs_distributed_exact, hierarchical_asymptotic_bound, hierarchical_optimize, uniform_storage_outage,
    BackhaulParams,
};
use edge3c::{
    derive, most_popular_policy, optimal_policy, regime_breakpoints, uniform_policy, zipf, CachingPolicy,
    DerivedParams, Execution, Popularity, SystemParams,
};

use crate::spec::{Evaluator, ExperimentSpec, PolicyKind, Variant};

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub sweep_value: f64,
    pub policy: String,
    pub evaluator: String,
    pub outage: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Monte Carlo standard error.
    pub stderr: Option<f64>,
    /// Minimum latency for which the exponential law reaches this row's outage.
    pub d_star: Option<f64>,
    pub kappa_prime: Option<f64>,
    pub kappa_t: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub error: Option<String>,
}

impl RunRecord {
    fn new(sweep_value: f64, policy: &str, evaluator: Evaluator) -> Self {
        RunRecord {
            sweep_value,
            policy: policy.to_string(),
            evaluator: evaluator.name().to_string(),
            outage: None,
            lower: None,
            upper: None,
            stderr: None,
            d_star: None,
            kappa_prime: None,
            kappa_t: None,
            wall_time_s: None,
            error: None,
        }
    }
}

#[derive(Default)]
struct Value {
    outage: Option<f64>,
    bounds: Option<(f64, f64)>,
    stderr: Option<f64>,
}

impl Value {
    fn point(x: f64) -> Self {
        Value {
            outage: Some(x),
            ..Value::default()
        }
    }

    fn bounds(b: &OutageBounds) -> Self {
        Value {
            bounds: Some((b.lower, b.upper)),
            ..Value::default()
        }
    }
}

type Outcome = Result<Value, String>;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Monte Carlo seed for the policy at sweep index `point`, so rows do not
/// share trial streams.
pub fn row_seed(seed: u64, point: usize, policy: PolicyKind) -> u64 {
    splitmix(splitmix(seed ^ splitmix(point as u64)) ^ policy as u64)
}

struct Point<'a> {
    spec: &'a ExperimentSpec,
    index: usize,
    value: f64,
    params: SystemParams,
    bh: BackhaulParams,
    derived: DerivedParams,
    pop: Popularity,
    exec: Execution,
}

impl Point<'_> {
    fn record(&self, policy: &str, evaluator: Evaluator, eval: impl FnOnce() -> Outcome) -> RunRecord {
        let mut r = RunRecord::new(self.value, policy, evaluator);
        r.kappa_prime = Some(self.derived.kappa_prime);
        r.kappa_t = Some(self.derived.kappa_t);
        let start = Instant::now();
        let out = eval();
        if self.spec.timing {
            r.wall_time_s = Some(start.elapsed().as_secs_f64());
        }
        match out {
            Ok(v) => {
                r.outage = v.outage;
                r.lower = v.bounds.map(|b| b.0);
                r.upper = v.bounds.map(|b| b.1);
                r.stderr = v.stderr;
            }
            Err(e) => r.error = Some(e),
        }
        r
    }

    fn build(&self, kind: PolicyKind) -> edge3c::Result<CachingPolicy> {
        let (m, s) = (self.params.library_size, self.params.cache_size);
        match kind {
            PolicyKind::Optimal => optimal_policy(&self.pop, self.derived.kappa_prime, s),
            PolicyKind::MostPopular => most_popular_policy(m, s),
            PolicyKind::Uniform => uniform_policy(m, s),
        }
    }

    fn evaluate(&self, kind: PolicyKind, policy: &CachingPolicy, ev: Evaluator) -> Outcome {
        let (p, d) = (&self.params, &self.derived);
        let reference = |k| match reference_outage(k, p, d).map_err(|e| e.to_string())? {
            ReferenceOutage::Point(x) => Ok(Value::point(x)),
            ReferenceOutage::Bounds(b) => Ok(Value::bounds(&b)),
        };
        match (ev, kind) {
            (Evaluator::ClosedForm, _) => Ok(Value::point(outage(policy, &self.pop, d))),
            (Evaluator::Asymptotic, PolicyKind::Optimal) => {
                let report = regime_breakpoints(p, d).map_err(|e| e.to_string())?.reconcile(policy);
                let a = asymptotic_outage_lt1(p, d, &report).map_err(|e| e.to_string())?;
                Ok(Value::point(a.value))
            }
            (Evaluator::Bounds, PolicyKind::Optimal) => {
                let report = regime_breakpoints(p, d).map_err(|e| e.to_string())?.reconcile(policy);
                let a = asymptotic_outage_gt1(p, d, &report).map_err(|e| e.to_string())?;
                Ok(Value::bounds(&a.bounds))
            }
            (Evaluator::Asymptotic | Evaluator::Bounds, PolicyKind::MostPopular) => {
                reference(ReferencePolicy::MostPopular)
            }
            (Evaluator::Asymptotic, PolicyKind::Uniform) => reference(ReferencePolicy::Uniform),
            (Evaluator::Bounds, PolicyKind::Uniform) => {
                let x = (-d.kappa_t).exp();
                Ok(Value {
                    bounds: Some((x, x)),
                    ..Value::default()
                })
            }
            (Evaluator::MonteCarlo, _) => {
                let mut cfg = self.spec.mc;
                cfg.seed = row_seed(self.spec.mc.seed, self.index, kind);
                let est = simulate_outage(policy, &self.pop, p, &cfg, self.exec).map_err(|e| e.to_string())?;
                Ok(Value {
                    outage: Some(est.mean),
                    stderr: Some(est.stderr),
                    ..Value::default()
                })
            }
        }
    }

    fn d_star(&self, target: f64) -> Option<f64> {
        if self.params.zipf_exponent >= 1.0 {
            return None;
        }
        min_latency(&self.params, &self.derived, target)
            .ok()
            .map(|dp| dp.d_star)
    }

    fn policy_rows(&self, out: &mut Vec<RunRecord>) {
        for &kind in &self.spec.policies {
            let policy = self.build(kind);
            for &ev in &self.spec.evaluators {
                let mut r = self.record(kind.name(), ev, || match &policy {
                    Ok(pol) => self.evaluate(kind, pol, ev),
                    Err(e) => Err(e.to_string()),
                });
                let analytic = matches!(ev, Evaluator::ClosedForm | Evaluator::Asymptotic);
                if kind == PolicyKind::Optimal && analytic {
                    r.d_star = r.outage.and_then(|x| self.d_star(x));
                }
                out.push(r);
            }
        }
    }

    fn variant_value(&self, name: &str, ev: Evaluator) -> Outcome {
        let (p, d, bh) = (&self.params, &self.derived, &self.bh);
        let err = |e: edge3c::Error| e.to_string();
        let closed = ev == Evaluator::ClosedForm;
        let scale = self.spec.colocation_scale;
        let x = match name {
            "backhaul_only" => backhaul_only_outage(p, bh).map_err(err)?,
            "cache_backhaul" if closed => {
                let policy = optimal_policy(&self.pop, d.kappa_prime, p.cache_size).map_err(err)?;
                cache_plus_backhaul_outage(&policy, &self.pop, p, d, bh).map_err(err)?
            }
            "cache_backhaul" => cache_plus_backhaul_asymptotic(p, d, bh).map_err(err)?,
            "hierarchical" => {
                let sol = hierarchical_optimize(&self.pop, p, d, bh).map_err(err)?;
                if !sol.converged {
                    return Err(format!(
                        "block descent stopped after {} sweeps, KKT residual {:e}",
                        sol.sweeps, sol.kkt_residual
                    ));
                }
                sol.outage
            }
            "hierarchical_uniform_storage" if closed => uniform_storage_outage(&self.pop, p, d, bh).map_err(err)?,
            "hierarchical_uniform_storage" => hierarchical_asymptotic_bound(p, d, bh).map_err(err)?,
            "colocated_base" | "colocated_scaled" => {
                let (base, scaled) = if closed {
                    colocated_vs_distributed_exact(&self.pop, p, scale).map_err(err)?
                } else {
                    colocated_vs_distributed(p, scale).map_err(err)?
                };
                if name == "colocated_base" {
                    base
                } else {
                    scaled
                }
            }
            _ => unreachable!("unknown variant row {name}"),
        };
        Ok(Value::point(x))
    }
}

/// Row names a variant adds for evaluator `ev`.
fn variant_names(variant: Variant, ev: Evaluator) -> &'static [&'static str] {
    let closed = ev == Evaluator::ClosedForm;
    if !closed && ev != Evaluator::Asymptotic {
        return &[];
    }
    match variant {
        Variant::BackhaulOnly => &["backhaul_only"],
        Variant::CacheBackhaul => &["cache_backhaul"],
        Variant::Hierarchical if closed => &["hierarchical", "hierarchical_uniform_storage"],
        Variant::Hierarchical => &["hierarchical_uniform_storage"],
        Variant::ColocatedCompare => &["colocated_base", "colocated_scaled"],
    }
}

fn point_rows(spec: &ExperimentSpec, index: usize, value: f64, exec: Execution) -> Vec<RunRecord> {
    let (params, bh) = spec.point(value);
    let derived = derive(&params);
    let mut out = Vec::new();
    let Ok(derived) = derived else {
        let msg = derived.unwrap_err().to_string();
        for &ev in &spec.evaluators {
            let variant = spec.variant.map_or(&[][..], |v| variant_names(v, ev));
            for name in spec.policies.iter().map(|p| p.name()).chain(variant.iter().copied()) {
                let mut r = RunRecord::new(value, name, ev);
                r.error = Some(msg.clone());
                out.push(r);
            }
        }
        return out;
    };
    let pop = zipf(params.library_size, params.zipf_exponent);
    let point = Point {
        spec,
        index,
        value,
        params,
        bh,
        derived,
        pop,
        exec,
    };
    point.policy_rows(&mut out);
    if let Some(v) = spec.variant {
        for &ev in &spec.evaluators {
            for name in variant_names(v, ev) {
                out.push(point.record(name, ev, || point.variant_value(name, ev)));
            }
        }
    }
    out
}

/// Evaluates every sweep point. Rows are sorted by sweep value, then policy
/// name, then evaluator name, so the output does not depend on scheduling.
pub fn run(spec: &ExperimentSpec) -> Vec<RunRecord> {
    run_with(spec, Execution::default())
}

/// [`run`] with an explicit execution strategy.
pub fn run_with(spec: &ExperimentSpec, exec: Execution) -> Vec<RunRecord> {
    let points: Vec<(usize, f64)> = spec.sweep_values.iter().copied().enumerate().collect();
    let mut rows: Vec<RunRecord> = exec
        .map_collect(&points, |&(i, v)| point_rows(spec, i, v, exec))
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then_with(|| a.policy.cmp(&b.policy))
            .then_with(|| a.evaluator.cmp(&b.evaluator))
    });
    rows
}
