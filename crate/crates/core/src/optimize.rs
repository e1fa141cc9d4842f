//! Quasi-Newton minimizers (dense BFGS and limited-memory BFGS) sharing a
//! strong-Wolfe line search.

use std::collections::VecDeque;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub max_iter: usize,
    /// Stop when the objective drops by less than this between iterations.
    pub f_tol: f64,
    /// Stop when the largest gradient component is below this.
    pub grad_tol: f64,
    /// History length for L-BFGS.
    pub memory: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            f_tol: 1e-10,
            grad_tol: 1e-8,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl OptimizeResult {
    pub fn grad_norm(&self) -> f64 {
        norm(&self.grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Objective<'a, F> {
    f: &'a mut F,
    evaluations: usize,
}

impl<F> Objective<'_, F>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    fn eval(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluations += 1;
        let (v, g) = (self.f)(x)?;
        if !v.is_finite() || g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged { restart: 0 });
        }
        Ok((v, g))
    }
}

struct LineSearchPoint {
    alpha: f64,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

/// Minimizer of the cubic interpolating `(a, fa, da)` and `(b, fb, db)`,
/// safeguarded into the interval.
fn cubic_min(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let fallback = 0.5 * (a + b);
    if disc < 0.0 {
        return fallback;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    let margin = 0.1 * (hi - lo);
    if !t.is_finite() || t < lo + margin || t > hi - margin {
        fallback
    } else {
        t
    }
}

fn strong_wolfe<F>(
    obj: &mut Objective<'_, F>,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    dir: &[f64],
    alpha_init: f64,
) -> Result<Option<LineSearchPoint>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let d0 = dot(g0, dir);
    if d0 >= 0.0 {
        return Ok(None);
    }
    let mut probe = |alpha: f64, obj: &mut Objective<'_, F>| -> Result<LineSearchPoint> {
        let xn: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + alpha * d).collect();
        let (f, g) = obj.eval(&xn)?;
        Ok(LineSearchPoint { alpha, x: xn, f, g })
    };

    let zoom = |mut lo: LineSearchPoint,
                mut hi: LineSearchPoint,
                obj: &mut Objective<'_, F>,
                probe: &mut dyn FnMut(f64, &mut Objective<'_, F>) -> Result<LineSearchPoint>|
     -> Result<Option<LineSearchPoint>> {
        for _ in 0..40 {
            let dlo = dot(&lo.g, dir);
            let dhi = dot(&hi.g, dir);
            let alpha = cubic_min(lo.alpha, lo.f, dlo, hi.alpha, hi.f, dhi);
            if (hi.alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1.0) {
                break;
            }
            let p = probe(alpha, obj)?;
            if p.f > f0 + C1 * alpha * d0 || p.f >= lo.f {
                hi = p;
            } else {
                let dp = dot(&p.g, dir);
                if dp.abs() <= -C2 * d0 {
                    return Ok(Some(p));
                }
                if dp * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
        }
        // accept the best sufficient-decrease point found
        if lo.alpha > 0.0 && lo.f < f0 {
            Ok(Some(lo))
        } else {
            Ok(None)
        }
    };

    let origin = LineSearchPoint {
        alpha: 0.0,
        x: x.to_vec(),
        f: f0,
        g: g0.to_vec(),
    };
    let mut prev = origin;
    let mut alpha = alpha_init;
    for i in 0..30 {
        let p = probe(alpha, obj)?;
        if p.f > f0 + C1 * alpha * d0 || (i > 0 && p.f >= prev.f) {
            return zoom(prev, p, obj, &mut probe);
        }
        let dp = dot(&p.g, dir);
        if dp.abs() <= -C2 * d0 {
            return Ok(Some(p));
        }
        if dp >= 0.0 {
            return zoom(p, prev, obj, &mut probe);
        }
        prev = p;
        alpha *= 2.0;
    }
    Ok(Some(prev).filter(|p| p.alpha > 0.0))
}

/// Dense BFGS with inverse-Hessian updates.
pub fn bfgs<F>(mut f: F, x0: &[f64], opts: &OptimizeOptions) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut obj = Objective {
        f: &mut f,
        evaluations: 0,
    };
    let mut x = x0.to_vec();
    let (mut fx, mut g) = obj.eval(&x)?;
    let mut hinv = vec![0.0; n * n];
    for i in 0..n {
        hinv[i * n + i] = 1.0;
    }
    let mut first = true;
    let mut converged = max_abs(&g) < opts.grad_tol;
    let mut iterations = 0;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let dir: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| hinv[i * n + j] * g[j]).sum::<f64>())
            .collect();
        let alpha0 = if first { (1.0 / norm(&g)).min(1.0) } else { 1.0 };
        let step = match strong_wolfe(&mut obj, &x, fx, &g, &dir, alpha0)? {
            Some(p) => p,
            None if !first => {
                // reset curvature and retry along steepest descent
                hinv.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..n {
                    hinv[i * n + i] = 1.0;
                }
                first = true;
                continue;
            }
            None => break,
        };
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let decrease = fx - step.f;
        x = step.x;
        fx = step.f;
        g = step.g;
        if sy > 1e-300 {
            if first {
                let scale = sy / dot(&y, &y);
                hinv.iter_mut().for_each(|v| *v *= scale);
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| hinv[i * n + j] * y[j]).sum())
                .collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        first = false;
        converged = max_abs(&g) < opts.grad_tol || decrease < opts.f_tol;
    }
    Ok(OptimizeResult {
        x,
        f: fx,
        grad: g,
        iterations,
        evaluations: obj.evaluations,
        converged,
    })
}

/// Limited-memory BFGS (two-loop recursion).
pub fn lbfgs<F>(mut f: F, x0: &[f64], opts: &OptimizeOptions) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut obj = Objective {
        f: &mut f,
        evaluations: 0,
    };
    let mut x = x0.to_vec();
    let (mut fx, mut g) = obj.eval(&x)?;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = max_abs(&g) < opts.grad_tol;
    let mut iterations = 0;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = history
            .back()
            .map(|(s, y, _)| dot(s, y) / dot(y, y))
            .unwrap_or(1.0);
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let alpha0 = if history.is_empty() {
            (1.0 / norm(&g)).min(1.0)
        } else {
            1.0
        };
        let step = match strong_wolfe(&mut obj, &x, fx, &g, &dir, alpha0)? {
            Some(p) => p,
            None if !history.is_empty() => {
                history.clear();
                continue;
            }
            None => break,
        };
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let decrease = fx - step.f;
        x = step.x;
        fx = step.f;
        g = step.g;
        if sy > 1e-300 {
            if history.len() == opts.memory.max(1) {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        converged = max_abs(&g) < opts.grad_tol || decrease < opts.f_tol;
    }
    Ok(OptimizeResult {
        x,
        f: fx,
        grad: g,
        iterations,
        evaluations: obj.evaluations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = x.len();
        let mut f = 0.0;
        let mut g = vec![0.0; n];
        for i in 0..n - 1 {
            let a = x[i + 1] - x[i] * x[i];
            let b = 1.0 - x[i];
            f += 100.0 * a * a + b * b;
            g[i] += -400.0 * x[i] * a - 2.0 * b;
            g[i + 1] += 200.0 * a;
        }
        Ok((f, g))
    }

    #[test]
    fn bfgs_rosenbrock() {
        let opts = OptimizeOptions {
            f_tol: 0.0,
            grad_tol: 1e-9,
            max_iter: 2000,
            ..Default::default()
        };
        let r = bfgs(rosenbrock, &[-1.2, 1.0, 0.5, -0.3], &opts).unwrap();
        assert!(r.converged);
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-6), "{:?}", r.x);
    }

    #[test]
    fn lbfgs_rosenbrock() {
        let opts = OptimizeOptions {
            f_tol: 0.0,
            grad_tol: 1e-9,
            max_iter: 5000,
            memory: 5,
        };
        let r = lbfgs(rosenbrock, &[-1.2, 1.0, 0.5, -0.3, 0.8], &opts).unwrap();
        assert!(r.converged);
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-6), "{:?}", r.x);
    }

    #[test]
    fn quadratic_in_few_steps() {
        let quad = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let f = 0.5 * (3.0 * x[0] * x[0] + x[1] * x[1]) - x[0] + x[0] * x[1] * 0.5;
            Ok((f, vec![3.0 * x[0] - 1.0 + 0.5 * x[1], x[1] + 0.5 * x[0]]))
        };
        let r = bfgs(quad, &[0.0, 0.0], &OptimizeOptions::default()).unwrap();
        assert!(r.iterations < 10);
        assert!(r.grad_norm() < 1e-6);
    }

    #[test]
    fn nan_is_divergence() {
        let bad = |_: &[f64]| -> Result<(f64, Vec<f64>)> { Ok((f64::NAN, vec![0.0])) };
        assert!(matches!(
            bfgs(bad, &[0.0], &OptimizeOptions::default()),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn starting_at_minimum_returns_immediately() {
        let quad = |x: &[f64]| -> Result<(f64, Vec<f64>)> { Ok((x[0] * x[0], vec![2.0 * x[0]])) };
        let r = lbfgs(quad, &[0.0], &OptimizeOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
    }
}
