//! Reference solvers and quadratures that share no code with the library's
//! own algorithms. Used to check the water-filling solver, the hierarchical
//! optimizer and the truncation tail.

use rand::Rng;

/// Weighted projection onto `{Σx = s, 0 ≤ x ≤ 1}`:
/// argmin Σ h_f (x_f - y_f)² subject to the constraints.
///
/// The solution is `x_f = clamp(y_f - τ/h_f, 0, 1)`; the sum is piecewise
/// linear in `τ`, so `τ` is located exactly among the sorted breakpoints.
pub fn project_capped_simplex(y: &[f64], h: &[f64], s: f64) -> Vec<f64> {
    let at = |tau: f64| -> Vec<f64> { y.iter().zip(h).map(|(y, h)| (y - tau / h).clamp(0.0, 1.0)).collect() };
    let sum = |tau: f64| -> f64 { at(tau).iter().sum() };
    let mut knots: Vec<f64> = y.iter().zip(h).flat_map(|(y, h)| [h * (y - 1.0), h * y]).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    // Σx(τ) is non-increasing; find consecutive knots with sum(lo) ≥ s ≥ sum(hi).
    let mut lo = knots[0];
    if sum(lo) <= s {
        return at(lo);
    }
    for &hi in &knots[1..] {
        let (a, b) = (sum(lo), sum(hi));
        if b <= s {
            let tau = if a == b { lo } else { lo + (a - s) * (hi - lo) / (a - b) };
            return at(tau);
        }
        lo = hi;
    }
    at(lo)
}

fn objective(w: &[f64], p: &[f64], k: f64) -> f64 {
    w.iter().zip(p).map(|(w, p)| w * (-k * p).exp()).sum()
}

/// Minimizes Σ w_f exp(-k p_f) over `{Σp = s, 0 ≤ p ≤ 1}` by projected Newton
/// steps: the objective is separable, so its Hessian is diagonal and the
/// scaled projection is exact. Armijo backtracking keeps every step a descent.
pub fn scaled_projected_gradient(w: &[f64], k: f64, s: f64) -> Vec<f64> {
    let n = w.len() as f64;
    let mut p = vec![s / n; w.len()];
    let mut f = objective(w, &p, k);
    for _ in 0..10_000 {
        let h: Vec<f64> = w.iter().zip(&p).map(|(w, p)| k * k * w * (-k * p).exp()).collect();
        let g: Vec<f64> = w.iter().zip(&p).map(|(w, p)| -k * w * (-k * p).exp()).collect();
        let y: Vec<f64> = p.iter().zip(g.iter().zip(&h)).map(|(p, (g, h))| p - g / h).collect();
        let target = project_capped_simplex(&y, &h, s);
        let dir: Vec<f64> = target.iter().zip(&p).map(|(t, p)| t - p).collect();
        let slope: f64 = g.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if dir.iter().all(|d| d.abs() < 1e-15) || slope >= 0.0 {
            break;
        }
        let mut step = 1.0;
        loop {
            let cand: Vec<f64> = p.iter().zip(&dir).map(|(p, d)| p + step * d).collect();
            let fc = objective(w, &cand, k);
            if fc <= f + 1e-4 * step * slope || step < 1e-12 {
                p = cand;
                f = fc;
                break;
            }
            step *= 0.5;
        }
    }
    p
}

fn joint_objective(w: &[f64], p: &[f64], q: &[f64], kp: f64, kb: f64) -> f64 {
    w.iter()
        .zip(p.iter().zip(q))
        .map(|(w, (a, b))| w * (-kp * a - kb * b).exp())
        .sum()
}

/// Minimizes Σ w_f exp(-kp p_f - kb q_f) over two capped simplices with an
/// accelerated projected gradient (FISTA with function-value restarts).
/// Returns `(p, q, objective)`.
pub fn joint_projected_gradient(
    w: &[f64],
    kp: f64,
    kb: f64,
    s: f64,
    sb: f64,
    iters: usize,
) -> (Vec<f64>, Vec<f64>, f64) {
    let n = w.len();
    let ones = vec![1.0; n];
    let lip = w.iter().copied().fold(0.0, f64::max) * (kp * kp + kb * kb);
    let step = 1.0 / lip;
    let mut p = vec![s / n as f64; n];
    let mut q = vec![sb / n as f64; n];
    let (mut yp, mut yq) = (p.clone(), q.clone());
    let mut t = 1.0f64;
    let mut f = joint_objective(w, &p, &q, kp, kb);
    for _ in 0..iters {
        let e: Vec<f64> = w
            .iter()
            .zip(yp.iter().zip(&yq))
            .map(|(w, (a, b))| w * (-kp * a - kb * b).exp())
            .collect();
        let np_: Vec<f64> = yp.iter().zip(&e).map(|(y, e)| y + step * kp * e).collect();
        let nq_: Vec<f64> = yq.iter().zip(&e).map(|(y, e)| y + step * kb * e).collect();
        let np = project_capped_simplex(&np_, &ones, s);
        let nq = project_capped_simplex(&nq_, &ones, sb);
        let nf = joint_objective(w, &np, &nq, kp, kb);
        if nf > f {
            // Restart momentum.
            t = 1.0;
            yp = p.clone();
            yq = q.clone();
            continue;
        }
        let nt = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / nt;
        yp = np.iter().zip(&p).map(|(a, b)| a + beta * (a - b)).collect();
        yq = nq.iter().zip(&q).map(|(a, b)| a + beta * (a - b)).collect();
        p = np;
        q = nq;
        f = nf;
        t = nt;
    }
    (p, q, f)
}

/// A uniformly random point pushed onto `{Σp = s, 0 ≤ p ≤ 1}`.
pub fn random_feasible<R: Rng>(rng: &mut R, n: usize, s: f64) -> Vec<f64> {
    let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
    project_capped_simplex(&y, &vec![1.0; n], s)
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// Direct summation of `Σ_{f=a}^{b} f^{-γ}` in ascending order.
pub fn brute_power_sum(a: u64, b: u64, g: f64) -> f64 {
    (a..=b).map(|m| (m as f64).powf(-g)).sum()
}

/// Direct summation of `Σ_{f=a}^{b} ln f`.
pub fn brute_log_sum(a: u64, b: u64) -> f64 {
    (a..=b).map(|m| (m as f64).ln()).sum()
}
