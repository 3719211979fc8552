//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsParams {
    pub memory: usize,
    pub max_iters: usize,
    /// Stop once the largest gradient component is below this.
    pub grad_tol: f64,
    /// Length of the first trial step along the steepest-descent direction.
    pub first_step: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_evals_per_search: usize,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        Self { memory: 7, max_iters: 100, grad_tol: 1e-6, first_step: 1.0, c1: 1e-4, c2: 0.9, max_evals_per_search: 20 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_max: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub line_search_failed: bool,
    /// Objective after every accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

/// Minimize `f`, which returns the value and gradient at a point.
pub fn minimize<F>(x0: Vec<f64>, params: &LbfgsParams, mut f: F) -> LbfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut evals = 1;
    let mut history = vec![fx];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut failed = false;
    while iterations < params.max_iters {
        if max_abs(&g) < params.grad_tol {
            break;
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = mem.back().map_or(1.0, |(s, y, _)| dot(s, y) / dot(y, y));
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            mem.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let alpha0 = if mem.is_empty() { params.first_step / max_abs(&d).max(f64::MIN_POSITIVE) } else { 1.0 };
        let (alpha, x1, f1, g1, used) = match wolfe_search(&mut f, &x, fx, slope, &d, alpha0, params) {
            Some(r) => r,
            None => {
                failed = true;
                log::debug!("line search failed after {iterations} iterations");
                break;
            }
        };
        evals += used;
        let s: Vec<f64> = d.iter().map(|v| v * alpha).collect();
        let y: Vec<f64> = g1.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            mem.push_back((s, y, 1.0 / sy));
            if mem.len() > params.memory {
                mem.pop_front();
            }
        }
        x = x1;
        fx = f1;
        g = g1;
        history.push(fx);
        iterations += 1;
    }
    let grad_max = max_abs(&g);
    LbfgsResult {
        x,
        f: fx,
        grad_max,
        iterations,
        evaluations: evals,
        converged: grad_max < params.grad_tol,
        line_search_failed: failed,
        history,
    }
}

type Step = (f64, Vec<f64>, f64, Vec<f64>, usize);

/// Strong-Wolfe search by bracketing and bisection-safeguarded cubic zoom.
fn wolfe_search<F>(f: &mut F, x: &[f64], f0: f64, slope0: f64, d: &[f64], alpha0: f64, p: &LbfgsParams) -> Option<Step>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut evals = 0;
    let mut eval = |a: f64, evals: &mut usize| {
        *evals += 1;
        let xa = axpy(x, a, d);
        let (fa, ga) = f(&xa);
        let sa = dot(&ga, d);
        (xa, fa, ga, sa)
    };
    let (mut a_prev, mut f_prev, mut s_prev) = (0.0, f0, slope0);
    let mut a = alpha0;
    let mut best: Option<Step> = None;
    while evals < p.max_evals_per_search {
        let (xa, fa, ga, sa) = eval(a, &mut evals);
        if !fa.is_finite() {
            a = 0.5 * (a_prev + a);
            continue;
        }
        if fa > f0 + p.c1 * a * slope0 || (evals > 1 && fa >= f_prev) {
            return zoom(&mut eval, &mut evals, (a_prev, f_prev, s_prev), (a, fa, sa), f0, slope0, p).or(best);
        }
        if sa.abs() <= -p.c2 * slope0 {
            return Some((a, xa, fa, ga, evals));
        }
        best = Some((a, xa, fa, ga, evals));
        if sa >= 0.0 {
            return zoom(&mut eval, &mut evals, (a, fa, sa), (a_prev, f_prev, s_prev), f0, slope0, p).or(best);
        }
        a_prev = a;
        f_prev = fa;
        s_prev = sa;
        a *= 2.0;
    }
    best
}

#[allow(clippy::type_complexity)]
fn zoom<E>(
    eval: &mut E,
    evals: &mut usize,
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
    f0: f64,
    slope0: f64,
    p: &LbfgsParams,
) -> Option<Step>
where
    E: FnMut(f64, &mut usize) -> (Vec<f64>, f64, Vec<f64>, f64),
{
    let mut best: Option<Step> = None;
    while *evals < p.max_evals_per_search {
        let a = cubic_min(lo, hi).unwrap_or(0.5 * (lo.0 + hi.0));
        let (lo_a, hi_a) = (lo.0.min(hi.0), lo.0.max(hi.0));
        let w = hi_a - lo_a;
        let a = if a <= lo_a + 0.1 * w || a >= hi_a - 0.1 * w { 0.5 * (lo.0 + hi.0) } else { a };
        let (xa, fa, ga, sa) = eval(a, evals);
        if fa > f0 + p.c1 * a * slope0 || fa >= lo.1 {
            hi = (a, fa, sa);
        } else {
            if sa.abs() <= -p.c2 * slope0 {
                return Some((a, xa, fa, ga, *evals));
            }
            best = Some((a, xa, fa, ga, *evals));
            if sa * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (a, fa, sa);
        }
        if (hi.0 - lo.0).abs() < 1e-14 * lo.0.abs().max(1e-300) {
            break;
        }
    }
    // Sufficient decrease without curvature still makes progress.
    best
}

/// Minimizer of the cubic through two points with slopes, if inside the bracket.
fn cubic_min(a: (f64, f64, f64), b: (f64, f64, f64)) -> Option<f64> {
    let (x0, f0, g0) = a;
    let (x1, f1, g1) = b;
    let d1 = g0 + g1 - 3.0 * (f0 - f1) / (x0 - x1);
    let disc = d1 * d1 - g0 * g1;
    if disc < 0.0 {
        return None;
    }
    let d2 = (x1 - x0).signum() * disc.sqrt();
    let t = x1 - (x1 - x0) * (g1 + d2 - d1) / (g1 - g0 + 2.0 * d2);
    t.is_finite().then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let mut f = 0.0;
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() - 1 {
            let a = x[i + 1] - x[i] * x[i];
            let b = 1.0 - x[i];
            f += 100.0 * a * a + b * b;
            g[i] += -400.0 * x[i] * a - 2.0 * b;
            g[i + 1] += 200.0 * a;
        }
        (f, g)
    }

    #[test]
    fn solves_rosenbrock() {
        let p = LbfgsParams { max_iters: 500, grad_tol: 1e-8, ..Default::default() };
        let r = minimize(vec![-1.2, 1.0, -1.2, 1.0], &p, rosenbrock);
        assert!(r.converged, "{r:?}");
        for v in &r.x {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn history_never_increases() {
        let p = LbfgsParams { max_iters: 50, ..Default::default() };
        let r = minimize(vec![3.0, -2.0, 0.5], &p, rosenbrock);
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn zero_gradient_exits_immediately() {
        let r = minimize(vec![1.0, 1.0], &LbfgsParams::default(), |_| (0.0, vec![0.0, 0.0]));
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
    }

    #[test]
    fn quadratic_converges_fast() {
        let r = minimize(vec![5.0, -3.0], &LbfgsParams::default(), |x| {
            (x[0] * x[0] + 10.0 * x[1] * x[1], vec![2.0 * x[0], 20.0 * x[1]])
        });
        assert!(r.converged && r.iterations < 20);
    }
}
