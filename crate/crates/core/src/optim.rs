//! Adam, L-BFGS with Armijo backtracking, and exponential decay.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One bias-corrected update in place. Non-finite gradients leave the
    /// state and parameters untouched.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "adam state has {} entries, got params {} and grads {}",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if let Some(k) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient entry {k} is {}", grads[k])));
        }
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for k in 0..params.len() {
            let g = grads[k];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let mh = self.m[k] / c1;
            let vh = self.v[k] / c2;
            params[k] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// `lr(epoch) = base_lr * gamma^epoch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSchedule {
    pub base_lr: f64,
    pub gamma: f64,
}

impl ExpSchedule {
    pub fn new(base_lr: f64, gamma: f64) -> Self {
        ExpSchedule { base_lr, gamma }
    }

    pub fn lr(&self, epoch: u32) -> f64 {
        self.base_lr * self.gamma.powi(epoch as i32)
    }
}

/// Result of one L-BFGS iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsStep {
    /// Loss at the start of the iteration.
    pub loss_before: f64,
    /// Loss at the accepted point (equal to `loss_before` for a zero step).
    pub loss: f64,
    pub step_size: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Lbfgs {
    pub history_size: usize,
    pub initial_step: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub min_curvature: f64,
    history: VecDeque<(Vec<f64>, Vec<f64>)>,
}

impl Default for Lbfgs {
    fn default() -> Self {
        Lbfgs {
            history_size: 10,
            initial_step: 1.0,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 20,
            min_curvature: 1e-10,
            history: VecDeque::new(),
        }
    }
}

impl Lbfgs {
    pub fn new(initial_step: f64) -> Self {
        Lbfgs {
            initial_step,
            ..Self::default()
        }
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn reset(&mut self) {
        self.history.clear();
    }

    /// `-H g` by the two-loop recursion.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alpha = Vec::with_capacity(self.history.len());
        for (s, y) in self.history.iter().rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &q);
            axpy(-a, y, &mut q);
            alpha.push((a, rho));
        }
        if let Some((s, y)) = self.history.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y), (a, rho)) in self.history.iter().zip(alpha.into_iter().rev()) {
            let b = rho * dot(y, &q);
            axpy(a - b, s, &mut q);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }

    /// One iteration: evaluates `closure` at `params`, takes the two-loop
    /// direction and backtracks from the unit step until the Armijo
    /// condition holds. If no trial point is accepted the parameters are
    /// left unchanged.
    pub fn step<F>(&mut self, params: &mut [f64], mut closure: F) -> Result<LbfgsStep>
    where
        F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    {
        let (f0, g0) = closure(params)?;
        if !f0.is_finite() || g0.iter().any(|g| !g.is_finite()) {
            self.history.clear();
            return Err(Error::NonFinite(format!("loss {f0} or its gradient is not finite")));
        }
        let mut evaluations = 1;
        let zero = LbfgsStep {
            loss_before: f0,
            loss: f0,
            step_size: 0.0,
            evaluations,
        };
        if g0.iter().all(|&g| g == 0.0) {
            return Ok(zero);
        }

        let mut d = self.direction(&g0);
        let mut slope = dot(&g0, &d);
        if !(slope < 0.0) {
            self.history.clear();
            d = g0.iter().map(|g| -g).collect();
            slope = -dot(&g0, &g0);
        }

        let mut alpha = self.initial_step;
        let mut trial = params.to_vec();
        for _ in 0..=self.max_backtracks {
            for k in 0..trial.len() {
                trial[k] = params[k] + alpha * d[k];
            }
            let (f, g) = closure(&trial)?;
            evaluations += 1;
            let finite = f.is_finite() && g.iter().all(|v| v.is_finite());
            if finite && f <= f0 + self.armijo * alpha * slope {
                let s: Vec<f64> = trial.iter().zip(params.iter()).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g.iter().zip(&g0).map(|(a, b)| a - b).collect();
                if dot(&s, &y) > self.min_curvature {
                    if self.history.len() == self.history_size {
                        self.history.pop_front();
                    }
                    self.history.push_back((s, y));
                }
                params.copy_from_slice(&trial);
                return Ok(LbfgsStep {
                    loss_before: f0,
                    loss: f,
                    step_size: alpha,
                    evaluations,
                });
            }
            alpha *= self.backtrack;
        }
        self.history.clear();
        Ok(LbfgsStep { evaluations, ..zero })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_adam_step_has_magnitude_lr() {
        let mut a = Adam::new(3, 1e-3);
        let mut p = [0.0, 1.0, 2.0];
        a.step(&mut p, &[0.5, -3.0, 0.0]).unwrap();
        assert!((p[0] + 1e-3).abs() < 1e-10);
        assert!((p[1] - 1.0 - 1e-3).abs() < 1e-10);
        assert_eq!(p[2], 2.0);
        assert_eq!(a.steps(), 1);
    }

    #[test]
    fn adam_zero_gradient_is_a_no_op() {
        let mut a = Adam::new(2, 0.1);
        let mut p = [1.5, -0.5];
        for _ in 0..5 {
            a.step(&mut p, &[0.0, 0.0]).unwrap();
        }
        assert_eq!(p, [1.5, -0.5]);
    }

    #[test]
    fn adam_scalar_quadratic() {
        // Oracle: the scalar recursion written out directly.
        let (mut th, mut m, mut v) = (0.0f64, 0.0f64, 0.0f64);
        for t in 1..=200 {
            let g = 2.0 * (th - 2.0);
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let mh = m / (1.0 - 0.9f64.powi(t));
            let vh = v / (1.0 - 0.999f64.powi(t));
            th -= 0.1 * mh / (vh.sqrt() + 1e-8);
        }
        let mut a = Adam::new(1, 0.1);
        let mut p = [0.0];
        for _ in 0..200 {
            let g = [2.0 * (p[0] - 2.0)];
            a.step(&mut p, &g).unwrap();
        }
        assert_eq!(p[0], th);
        assert!((p[0] - 2.0).abs() < 1e-2);
    }

    #[test]
    fn adam_rejects_nan() {
        let mut a = Adam::new(1, 0.1);
        let mut p = [1.0];
        assert!(a.step(&mut p, &[f64::NAN]).is_err());
        assert_eq!(p, [1.0]);
        assert_eq!(a.steps(), 0);
        assert!(a.step(&mut p, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn schedule_ratio_is_gamma() {
        let s = ExpSchedule::new(1e-3, 0.999);
        assert_eq!(s.lr(0), 1e-3);
        for n in 0..5000 {
            let r = s.lr(n + 1) / s.lr(n);
            assert!((r - 0.999).abs() < 1e-14);
        }
    }

    fn quad(p: &[f64], diag: &[f64]) -> (f64, Vec<f64>) {
        let f = 0.5 * p.iter().zip(diag).map(|(x, d)| d * x * x).sum::<f64>();
        (f, p.iter().zip(diag).map(|(x, d)| d * x).collect())
    }

    #[test]
    fn lbfgs_one_dimensional_quadratic() {
        let mut o = Lbfgs::default();
        let mut p = [5.0];
        for _ in 0..5 {
            o.step(&mut p, |x| Ok(quad(x, &[1.0]))).unwrap();
        }
        assert!(p[0].abs() < 1e-8);
    }

    #[test]
    fn lbfgs_zero_step_at_stationary_point() {
        let mut o = Lbfgs::default();
        let mut p = [0.0, 0.0];
        let r = o.step(&mut p, |x| Ok(quad(x, &[1.0, 3.0]))).unwrap();
        assert_eq!(r.step_size, 0.0);
        assert_eq!(p, [0.0, 0.0]);
    }

    #[test]
    fn lbfgs_ill_conditioned_is_monotone() {
        let mut o = Lbfgs::default();
        let mut p = [1.0, 1.0];
        let mut last = f64::INFINITY;
        for _ in 0..50 {
            let r = o.step(&mut p, |x| Ok(quad(x, &[1.0, 100.0]))).unwrap();
            assert!(r.loss <= r.loss_before);
            assert!(r.loss_before <= last);
            last = r.loss;
            assert!(o.history_len() <= 10);
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn lbfgs_nan_clears_history() {
        let mut o = Lbfgs::default();
        let mut p = [1.0, 2.0];
        o.step(&mut p, |x| Ok(quad(x, &[1.0, 2.0]))).unwrap();
        assert_eq!(o.history_len(), 1);
        let before = p;
        assert!(o.step(&mut p, |_| Ok((f64::NAN, vec![0.0, 0.0]))).is_err());
        assert_eq!(o.history_len(), 0);
        assert_eq!(p, before);
    }

    #[test]
    fn lbfgs_skips_low_curvature_pairs() {
        // Linear objective: y = 0 for every pair.
        let mut o = Lbfgs::default();
        let mut p = [0.0];
        o.step(&mut p, |x| Ok((x[0], vec![1.0]))).unwrap();
        assert_eq!(o.history_len(), 0);
        assert_eq!(p, [-1.0]);
    }

    proptest! {
        #[test]
        fn lbfgs_never_increases_loss(a in 0.1f64..50.0, b in 0.1f64..50.0,
                                      x0 in -10.0f64..10.0, y0 in -10.0f64..10.0) {
            // Smooth non-quadratic objective.
            let f = |p: &[f64]| {
                let (x, y) = (p[0], p[1]);
                let v = a * x * x + b * y * y + (x * y).sin() + 0.1 * x.powi(4);
                let g = vec![2.0 * a * x + y * (x * y).cos() + 0.4 * x.powi(3),
                             2.0 * b * y + x * (x * y).cos()];
                Ok((v, g))
            };
            let mut o = Lbfgs::default();
            let mut p = [x0, y0];
            for _ in 0..20 {
                let r = o.step(&mut p, f).unwrap();
                prop_assert!(r.loss <= r.loss_before);
            }
        }

        #[test]
        fn adam_is_deterministic(g in prop::collection::vec(-5.0f64..5.0, 4)) {
            let run = || {
                let mut a = Adam::new(4, 0.01);
                let mut p = [0.1, 0.2, 0.3, 0.4];
                for _ in 0..3 {
                    a.step(&mut p, &g).unwrap();
                }
                p
            };
            prop_assert_eq!(run(), run());
        }
    }
}
