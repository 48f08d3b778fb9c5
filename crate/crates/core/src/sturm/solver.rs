//! Dormand–Prince 5(4) for `u'' + κ u = 0`, with quintic Hermite dense output.
//!
//! Steps never straddle a coefficient breakpoint, and inside a step the
//! coefficient is sampled strictly within the current smooth piece.

use serde::{Deserialize, Serialize};

use super::coefficient::CoefficientFn;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

impl SolverConfig {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self.atol = rtol * 1e-2;
        self
    }
}

/// Accepted steps of a solution; `acc_start[i]`, `acc_end[i]` are `u''` at
/// the two ends of step `i`, taken from inside the step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    ts: Vec<f64>,
    us: Vec<f64>,
    vs: Vec<f64>,
    acc_start: Vec<f64>,
    acc_end: Vec<f64>,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Piece<'a> {
    kappa: &'a CoefficientFn,
    lo: f64,
    hi: f64,
    pad: f64,
}

impl Piece<'_> {
    fn eval(&self, t: f64) -> Result<f64> {
        let s = t.clamp(self.lo + self.pad, self.hi - self.pad);
        let k = self.kappa.eval(s);
        if k.is_finite() {
            Ok(k)
        } else {
            Err(Error::NonFiniteCoefficient { t: s })
        }
    }
}

/// Solve `u'' + κ u = 0` on `[0, length]` with `u(0) = u0`, `u'(0) = v0`.
pub fn integrate(kappa: &CoefficientFn, length: f64, u0: f64, v0: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidArgument(format!("solve length must be positive, got {length}")));
    }
    if !(u0.is_finite() && v0.is_finite()) {
        return Err(Error::InvalidArgument("initial data must be finite".into()));
    }
    let mut cuts = vec![0.0];
    cuts.extend(kappa.breakpoints().into_iter().filter(|&t| t < length));
    cuts.push(length);

    let mut traj = Trajectory {
        ts: vec![0.0],
        us: vec![u0],
        vs: vec![v0],
        acc_start: Vec::new(),
        acc_end: Vec::new(),
    };
    let mut h = (length * 1e-3).min(0.01);
    let mut steps = 0usize;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let piece = Piece {
            kappa,
            lo,
            hi,
            pad: (hi - lo) * 1e-12,
        };
        let mut t = lo;
        let mut u = *traj.us.last().unwrap();
        let mut v = *traj.vs.last().unwrap();
        if let Some(k) = kappa.as_constant() {
            // scale-aware first guess when the coefficient is large
            h = h.min(0.05 / k.abs().sqrt().max(1e-3));
        }
        while t < hi {
            let last = hi - t <= h * (1.0 + 1e-12);
            let h_try = if last { hi - t } else { h };
            steps += 1;
            if steps > cfg.max_steps {
                return Err(Error::StepUnderflow { t, h: h_try });
            }
            let mut ku = [0.0; 7];
            let mut kv = [0.0; 7];
            let mut kap = [0.0; 7];
            for s in 0..7 {
                let mut us = u;
                let mut vs = v;
                for (j, a) in A[s].iter().enumerate().take(s) {
                    us += h_try * a * ku[j];
                    vs += h_try * a * kv[j];
                }
                kap[s] = piece.eval(t + C[s] * h_try)?;
                ku[s] = vs;
                kv[s] = -kap[s] * us;
            }
            // FSAL: stage 7 is evaluated at the new point
            let mut un = u;
            let mut vn = v;
            for j in 0..6 {
                un += h_try * A[6][j] * ku[j];
                vn += h_try * A[6][j] * kv[j];
            }
            let mut eu = 0.0;
            let mut ev = 0.0;
            for j in 0..7 {
                eu += h_try * E[j] * ku[j];
                ev += h_try * E[j] * kv[j];
            }
            let su = cfg.atol + cfg.rtol * u.abs().max(un.abs());
            let sv = cfg.atol + cfg.rtol * v.abs().max(vn.abs());
            let err = (((eu / su).powi(2) + (ev / sv).powi(2)) * 0.5).sqrt();
            if !err.is_finite() {
                return Err(Error::NonFiniteCoefficient { t });
            }
            if err <= 1.0 {
                let tn = if last { hi } else { t + h_try };
                traj.acc_start.push(-kap[0] * u);
                traj.acc_end.push(-kap[6] * un);
                traj.ts.push(tn);
                traj.us.push(un);
                traj.vs.push(vn);
                t = tn;
                u = un;
                v = vn;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = h_try * fac;
                }
            } else {
                h = h_try * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-15 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, h });
                }
            }
        }
    }
    Ok(traj)
}

fn hermite(s: f64, h: f64, y0: f64, d0: f64, a0: f64, y1: f64, d1: f64, a1: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    let h3 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 0.5 * s3 - s4 + 0.5 * s5;
    let g0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let g1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let g2 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
    let g3 = -g0;
    let g4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let g5 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
    let hh = h * h;
    let val = y0 * h0 + h * d0 * h1 + hh * a0 * h2 + y1 * h3 + h * d1 * h4 + hh * a1 * h5;
    let der = (y0 * g0 + h * d0 * g1 + hh * a0 * g2 + y1 * g3 + h * d1 * g4 + hh * a1 * g5) / h;
    (val, der)
}

impl Trajectory {
    pub fn grid(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.us
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.vs
    }

    pub fn length(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn step_count(&self) -> usize {
        self.ts.len() - 1
    }

    fn step_index(&self, t: f64) -> usize {
        let i = self.ts.partition_point(|&x| x <= t);
        i.saturating_sub(1).min(self.ts.len() - 2)
    }

    /// Value and derivative on step `i` at `t`.
    pub(crate) fn eval_on_step(&self, i: usize, t: f64) -> (f64, f64) {
        let h = self.ts[i + 1] - self.ts[i];
        let s = ((t - self.ts[i]) / h).clamp(0.0, 1.0);
        hermite(
            s,
            h,
            self.us[i],
            self.vs[i],
            self.acc_start[i],
            self.us[i + 1],
            self.vs[i + 1],
            self.acc_end[i],
        )
    }

    /// `(u(t), u'(t))`, clamped to the solved window.
    pub fn eval_both(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return (self.us[0], self.vs[0]);
        }
        let n = self.ts.len() - 1;
        if t >= self.ts[n] {
            return (self.us[n], self.vs[n]);
        }
        let i = self.step_index(t);
        if t == self.ts[i] {
            return (self.us[i], self.vs[i]);
        }
        self.eval_on_step(i, t)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_both(t).0
    }

    pub fn eval_derivative(&self, t: f64) -> f64 {
        self.eval_both(t).1
    }

    /// `∫_0^r f(u(s)) ds` by 5-point Gauss–Legendre on every solver step.
    pub fn integrate_with(&self, r: f64, f: impl Fn(f64) -> f64) -> f64 {
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let mut total = 0.0;
        for i in 0..self.ts.len() - 1 {
            let a = self.ts[i];
            if a >= r {
                break;
            }
            let b = self.ts[i + 1].min(r);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for q in 0..5 {
                let (u, _) = self.eval_on_step(i, mid + half * X[q]);
                total += W[q] * half * f(u);
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_quintics() {
        let p = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x.powi(3) + x.powi(4) - 0.3 * x.powi(5);
        let dp = |x: f64| 1.0 - 4.0 * x + 1.5 * x * x + 4.0 * x.powi(3) - 1.5 * x.powi(4);
        let ddp = |x: f64| -4.0 + 3.0 * x + 12.0 * x * x - 6.0 * x.powi(3);
        let (a, b) = (0.3, 1.1);
        let h = b - a;
        for i in 0..=10 {
            let s = i as f64 / 10.0;
            let x = a + s * h;
            let (v, d) = hermite(s, h, p(a), dp(a), ddp(a), p(b), dp(b), ddp(b));
            assert!((v - p(x)).abs() < 1e-13);
            assert!((d - dp(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coefficient_is_linear() {
        let k = CoefficientFn::constant(0.0, 1.0).unwrap();
        let tr = integrate(&k, 1.0, 0.0, 1.0, &SolverConfig::default()).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!((tr.eval(t) - t).abs() < 1e-14);
        }
    }

    #[test]
    fn steps_respect_breakpoints() {
        let k = CoefficientFn::table(&[(0.0, 0.0), (0.37, 4.0), (1.0, 1.0)]).unwrap();
        let tr = integrate(&k, 1.0, 0.0, 1.0, &SolverConfig::default()).unwrap();
        assert!(tr.grid().iter().any(|&t| t == 0.37));
    }

    #[test]
    fn non_finite_coefficient_is_reported() {
        let k = CoefficientFn::power_law(1.0, 0.0, 0.5, super::super::PowerDirection::Increasing, 1.0)
            .unwrap()
            .scaled(f64::INFINITY);
        assert!(matches!(
            integrate(&k, 1.0, 0.0, 1.0, &SolverConfig::default()),
            Err(Error::NonFiniteCoefficient { .. })
        ));
    }
}
