//! Quasi-Newton (BFGS) minimisation of the penalized training objective.
//!
//! The optimiser works on the unpruned weights only. It keeps a dense
//! inverse-Hessian approximation, uses a strong-Wolfe line search and stops
//! once the largest gradient component falls below the tolerance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{
    accuracy, margin_rate, objective_and_gradient, Dataset, NetError, Network, ObjectiveParams,
};

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("objective became non-finite at iteration {iteration} (value {value})")]
    NonFinite { iteration: usize, value: f64 },
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Objective evaluations allowed per line search.
    pub max_line_search: usize,
    /// Seed for weight initialisation.
    pub seed: u64,
    /// Accuracy a trained network must reach before pruning may start.
    pub required_accuracy: f64,
    /// Keep a per-iteration trace in the report.
    pub trace: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iterations: 1000,
            gradient_tolerance: 1e-5,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 30,
            seed: 1,
            required_accuracy: 0.9,
            trace: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.max_iterations == 0 {
            return Err(TrainError::Config("max_iterations must be positive".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(TrainError::Config("gradient_tolerance must be positive".into()));
        }
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(TrainError::Config("need 0 < c1 < c2 < 1".into()));
        }
        if self.max_line_search == 0 {
            return Err(TrainError::Config("max_line_search must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.required_accuracy) {
            return Err(TrainError::Config("required_accuracy must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// Neither the quasi-Newton nor the steepest-descent direction gave a decrease.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub step: f64,
}

/// Outcome of [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub stop: StopReason,
    /// Times the curvature approximation was reset to the identity.
    pub resets: usize,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: usize,
    pub final_objective: f64,
    pub gradient_norm: f64,
    pub accuracy: f64,
    pub margin_rate: f64,
    pub stop: StopReason,
    pub resets: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<TraceEntry>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Point {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

struct Search<'a, F> {
    eval: &'a mut F,
    c1: f64,
    c2: f64,
    budget: usize,
    iteration: usize,
}

impl<F> Search<'_, F>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    fn probe(&mut self, start: &Point, d: &[f64], a: f64) -> Result<Point, TrainError> {
        let x: Vec<f64> = start.x.iter().zip(d).map(|(x, d)| x + a * d).collect();
        let mut g = vec![0.0; x.len()];
        let f = (self.eval)(&x, &mut g);
        if !f.is_finite() {
            return Err(TrainError::NonFinite {
                iteration: self.iteration,
                value: f,
            });
        }
        Ok(Point { x, f, g })
    }

    /// Strong-Wolfe line search. Any returned point satisfies sufficient decrease.
    fn run(&mut self, start: &Point, d: &[f64], first: f64) -> Result<Option<(f64, Point)>, TrainError> {
        let dphi0 = dot(&start.g, d);
        if !(dphi0 < 0.0) {
            return Ok(None);
        }
        let c1 = self.c1;
        let armijo = |a: f64, f: f64| f <= start.f + c1 * a * dphi0;
        let mut evals = 0;
        let (mut a_prev, mut f_prev, mut dphi_prev) = (0.0, start.f, dphi0);
        let mut prev_point: Option<Point> = None;
        let mut a = first;
        loop {
            if evals >= self.budget {
                return Ok(prev_point.map(|p| (a_prev, p)));
            }
            let p = self.probe(start, d, a)?;
            evals += 1;
            if !armijo(a, p.f) || (evals > 1 && p.f >= f_prev) {
                let hi = (a, p.f);
                return self.zoom(start, d, dphi0, (a_prev, f_prev, dphi_prev, prev_point), hi, evals);
            }
            let dphi = dot(&p.g, d);
            if dphi.abs() <= -self.c2 * dphi0 {
                return Ok(Some((a, p)));
            }
            if dphi >= 0.0 {
                let hi = (a_prev, f_prev);
                let lo_f = p.f;
                return self.zoom(start, d, dphi0, (a, lo_f, dphi, Some(p)), hi, evals);
            }
            a_prev = a;
            f_prev = p.f;
            dphi_prev = dphi;
            prev_point = Some(p);
            a *= 2.0;
        }
    }

    #[allow(clippy::type_complexity)]
    fn zoom(
        &mut self,
        start: &Point,
        d: &[f64],
        dphi0: f64,
        lo: (f64, f64, f64, Option<Point>),
        hi: (f64, f64),
        mut evals: usize,
    ) -> Result<Option<(f64, Point)>, TrainError> {
        let (mut a_lo, mut f_lo, mut dphi_lo, mut p_lo) = lo;
        let (mut a_hi, mut f_hi) = hi;
        while evals < self.budget {
            let width = a_hi - a_lo;
            // Quadratic model through (a_lo, f_lo, dphi_lo) and (a_hi, f_hi).
            let denom = 2.0 * (f_hi - f_lo - dphi_lo * width);
            let mut a = if denom.abs() > 0.0 {
                a_lo - dphi_lo * width * width / denom
            } else {
                a_lo + 0.5 * width
            };
            let (lo_b, hi_b) = if width > 0.0 {
                (a_lo + 0.1 * width, a_hi - 0.1 * width)
            } else {
                (a_hi - 0.1 * width, a_lo + 0.1 * width)
            };
            if !a.is_finite() || a < lo_b.min(hi_b) || a > lo_b.max(hi_b) {
                a = a_lo + 0.5 * width;
            }
            if width.abs() < 1e-16 * a_lo.abs().max(1.0) {
                break;
            }
            let p = self.probe(start, d, a)?;
            evals += 1;
            if p.f > start.f + self.c1 * a * dphi0 || p.f >= f_lo {
                a_hi = a;
                f_hi = p.f;
            } else {
                let dphi = dot(&p.g, d);
                if dphi.abs() <= -self.c2 * dphi0 {
                    return Ok(Some((a, p)));
                }
                if dphi * (a_hi - a_lo) >= 0.0 {
                    a_hi = a_lo;
                    f_hi = f_lo;
                }
                a_lo = a;
                f_lo = p.f;
                dphi_lo = dphi;
                p_lo = Some(p);
            }
        }
        // Out of budget: fall back to the best sufficient-decrease point seen.
        Ok(p_lo.map(|p| (a_lo, p)))
    }
}

/// Minimises `eval` (which writes the gradient into its second argument) from `x0`.
pub fn minimize<F>(mut eval: F, x0: Vec<f64>, cfg: &TrainConfig) -> Result<Minimum, TrainError>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    cfg.validate()?;
    let n = x0.len();
    let mut g0 = vec![0.0; n];
    let f0 = eval(&x0, &mut g0);
    if !f0.is_finite() {
        return Err(TrainError::NonFinite {
            iteration: 0,
            value: f0,
        });
    }
    let mut cur = Point { x: x0, f: f0, g: g0 };
    let mut hinv = identity(n);
    let mut fresh = true;
    let mut resets = 0;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut stop = StopReason::MaxIterations;

    while iterations < cfg.max_iterations {
        let gnorm = inf_norm(&cur.g);
        if gnorm <= cfg.gradient_tolerance {
            stop = StopReason::Converged;
            break;
        }
        let mut search = Search {
            eval: &mut eval,
            c1: cfg.c1,
            c2: cfg.c2,
            budget: cfg.max_line_search,
            iteration: iterations,
        };
        let mut d: Vec<f64> = matvec(&hinv, &cur.g).iter().map(|x| -x).collect();
        let first = if fresh { (1.0 / dot(&cur.g, &cur.g).sqrt()).min(1.0) } else { 1.0 };
        let mut found = search.run(&cur, &d, first)?;
        if found.is_none() {
            // Steepest-descent fallback with a fresh curvature model.
            if !fresh {
                resets += 1;
            }
            hinv = identity(n);
            fresh = true;
            d = cur.g.iter().map(|x| -x).collect();
            let first = (1.0 / dot(&cur.g, &cur.g).sqrt()).min(1.0);
            found = search.run(&cur, &d, first)?;
        }
        let Some((step, next)) = found else {
            stop = StopReason::Stalled;
            break;
        };
        let s: Vec<f64> = next.x.iter().zip(&cur.x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.g.iter().zip(&cur.g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        // Skip the update when the curvature condition fails to keep hinv positive definite.
        if sy > 1e-12 * dot(&s, &s).sqrt() * yy.sqrt() && sy > 0.0 {
            if fresh {
                let scale = sy / yy;
                for (i, row) in hinv.chunks_mut(n).enumerate() {
                    row[i] = scale;
                }
                fresh = false;
            }
            bfgs_update(&mut hinv, &s, &y, sy);
        }
        iterations += 1;
        cur = next;
        if cfg.trace {
            trace.push(TraceEntry {
                iteration: iterations,
                objective: cur.f,
                gradient_norm: inf_norm(&cur.g),
                step,
            });
        }
    }
    if stop == StopReason::MaxIterations && inf_norm(&cur.g) <= cfg.gradient_tolerance {
        stop = StopReason::Converged;
    }
    Ok(Minimum {
        gradient_norm: inf_norm(&cur.g),
        x: cur.x,
        value: cur.f,
        iterations,
        stop,
        resets,
        trace,
    })
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn matvec(m: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    m.chunks(n).map(|row| dot(row, x)).collect()
}

/// `H <- (I - r s y') H (I - r y s') + r s s'` with `r = 1 / s'y`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let r = 1.0 / sy;
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    let coef = r * r * yhy + r;
    for i in 0..n {
        let row = &mut h[i * n..(i + 1) * n];
        for j in 0..n {
            row[j] += coef * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

/// Trains the unpruned weights of `net`, starting from its current values.
pub fn train(
    net: &Network,
    data: &Dataset,
    params: &ObjectiveParams,
    cfg: &TrainConfig,
) -> Result<(Network, TrainReport), TrainError> {
    params.validate()?;
    let free = net.free_indices();
    let full = net.params();
    let x0: Vec<f64> = free.iter().map(|&i| full[i]).collect();
    let mut work = net.clone();
    let mut failure: Option<NetError> = None;
    let eval = |x: &[f64], g: &mut [f64]| -> f64 {
        let mut p = vec![0.0; full.len()];
        for (&i, &xi) in free.iter().zip(x) {
            p[i] = xi;
        }
        if let Err(e) = work.set_params(&p) {
            failure = Some(e);
            return f64::NAN;
        }
        match objective_and_gradient(&work, data, params) {
            Ok((f, grad)) => {
                for (gi, &i) in g.iter_mut().zip(&free) {
                    *gi = grad[i];
                }
                f
            }
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        }
    };
    let result = minimize(eval, x0, cfg);
    if let Some(e) = failure {
        return Err(e.into());
    }
    let min = result?;
    let mut p = vec![0.0; full.len()];
    for (&i, &xi) in free.iter().zip(&min.x) {
        p[i] = xi;
    }
    let mut out = net.clone();
    out.set_params(&p)?;
    let report = TrainReport {
        iterations: min.iterations,
        final_objective: min.value,
        gradient_norm: min.gradient_norm,
        accuracy: accuracy(&out, data),
        margin_rate: margin_rate(&out, data, params.eta1),
        stop: min.stop,
        resets: min.resets,
        trace: min.trace,
    };
    Ok((out, report))
}

/// Warm-started training of an already trained (possibly pruned) network.
pub fn retrain(
    net: &Network,
    data: &Dataset,
    params: &ObjectiveParams,
    cfg: &TrainConfig,
) -> Result<(Network, TrainReport), TrainError> {
    train(net, data, params, cfg)
}
