//! Generalized trigonometric functions of `u'' + κ u = 0`.
//!
//! `𝔰_κ` solves the equation with `u(0) = 0, u'(0) = 1`, `𝔠_κ = 𝔰_κ'`, and
//! `π_κ` is the first positive zero of `𝔰_κ` (absent if there is none on the
//! solved window).

mod coefficient;
mod solver;

pub use coefficient::{CoefficientFn, PowerDirection};
pub use solver::{SolverConfig, Trajectory};

use serde::Serialize;

use crate::error::{Error, Result};

/// Solve `u'' + κ u = 0` on `[0, length]`.
pub fn solve_ivp(kappa: &CoefficientFn, length: f64, u0: f64, v0: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    if length > 0.0 && length.is_finite() {
        kappa.with_length(length)?.ensure_finite()?;
    }
    solver::integrate(kappa, length, u0, v0, cfg)
}

#[derive(Debug, Clone)]
pub struct SinSolution {
    traj: Trajectory,
    first_zero: Option<f64>,
}

impl SinSolution {
    pub fn eval(&self, t: f64) -> f64 {
        self.traj.eval(t)
    }

    /// `𝔠_κ(t)`.
    pub fn eval_derivative(&self, t: f64) -> f64 {
        self.traj.eval_derivative(t)
    }

    pub fn first_zero(&self) -> Option<f64> {
        self.first_zero
    }

    pub fn length(&self) -> f64 {
        self.traj.length()
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    /// Largest deviation of the Wronskian `u v' − u' v` against the solution
    /// `v` with `v(0) = 1, v'(0) = 0`; it is `−1` for the exact pair.
    pub fn wronskian_drift(&self, kappa: &CoefficientFn, cfg: &SolverConfig) -> Result<f64> {
        let other = solve_ivp(kappa, self.length(), 1.0, 0.0, cfg)?;
        let mut worst = 0.0f64;
        for &t in self.traj.grid() {
            let (u, du) = self.traj.eval_both(t);
            let (v, dv) = other.eval_both(t);
            worst = worst.max((u * dv - du * v + 1.0).abs());
        }
        Ok(worst)
    }
}

/// Locates the first zero of `u` on `(0, L]`, the first sign change from a
/// positive value. A zero without transversal crossing is rejected.
fn first_zero(traj: &Trajectory) -> Result<Option<f64>> {
    let ts = traj.grid();
    let us = traj.values();
    let tol = 1e-12 * traj.length().max(1e-300);
    let mut slope_scale = traj.derivatives()[0].abs();
    for i in 0..ts.len() - 1 {
        slope_scale = slope_scale.max(traj.derivatives()[i + 1].abs());
        // probe the interior too, so a dip fully inside one step is not missed
        let mut lo = ts[i];
        let mut lo_val = us[i];
        let mut bracket = None;
        for k in 1..=4 {
            let t = ts[i] + (ts[i + 1] - ts[i]) * k as f64 / 4.0;
            let val = if k == 4 { us[i + 1] } else { traj.eval_on_step(i, t).0 };
            if lo_val > 0.0 && val <= 0.0 {
                bracket = Some((lo, t));
                break;
            }
            lo = t;
            lo_val = val;
        }
        let Some((mut a, mut b)) = bracket else { continue };
        let mut it = 0;
        while b - a > tol && it < 200 {
            let m = 0.5 * (a + b);
            if traj.eval_on_step(i, m).0 > 0.0 {
                a = m;
            } else {
                b = m;
            }
            it += 1;
        }
        let z = 0.5 * (a + b);
        let dz = traj.eval_on_step(i, z).1;
        if dz.abs() <= 1e-9 * slope_scale.max(1e-300) {
            return Err(Error::NonUniqueness { t: z });
        }
        return Ok(Some(z));
    }
    Ok(None)
}

/// `𝔰_κ` on `[0, length]` with its first zero.
pub fn generalized_sin(kappa: &CoefficientFn, length: f64, cfg: &SolverConfig) -> Result<SinSolution> {
    let traj = solve_ivp(kappa, length, 0.0, 1.0, cfg)?;
    let first_zero = first_zero(&traj)?;
    Ok(SinSolution { traj, first_zero })
}

/// `𝔠_κ = 𝔰_κ'`, the derivative channel of [`generalized_sin`].
#[derive(Debug, Clone)]
pub struct CosSolution(SinSolution);

impl CosSolution {
    pub fn eval(&self, t: f64) -> f64 {
        self.0.eval_derivative(t)
    }

    pub fn sin(&self) -> &SinSolution {
        &self.0
    }
}

pub fn generalized_cos(kappa: &CoefficientFn, length: f64, cfg: &SolverConfig) -> Result<CosSolution> {
    generalized_sin(kappa, length, cfg).map(CosSolution)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonVerdict {
    pub holds: bool,
    /// `min (𝔰_κ − 𝔰_κ')` over the common grid.
    pub worst_gap: f64,
    pub worst_at: f64,
    pub tolerance: f64,
}

/// Checks `𝔰_κ ≥ 𝔰_κ' − tol` on `[0, L]` for `κ ≤ κ'`.
pub fn verify_sturm_comparison(
    kappa: &CoefficientFn,
    kappa_cmp: &CoefficientFn,
    length: f64,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<ComparisonVerdict> {
    let mut probes = kappa.with_length(length)?.probe_points(0.0, length);
    probes.extend(kappa_cmp.with_length(length)?.probe_points(0.0, length));
    for &t in &probes {
        let gap = kappa_cmp.eval(t) - kappa.eval(t);
        if gap < -1e-12 * (1.0 + kappa.eval(t).abs()) {
            return Err(Error::PreconditionOrderViolated { t, gap });
        }
    }
    let big = generalized_sin(kappa_cmp, length, cfg)?;
    if let Some(z) = big.first_zero() {
        return Err(Error::PositivityViolated { t: z });
    }
    let small = generalized_sin(kappa, length, cfg)?;
    let mut grid: Vec<f64> = small.trajectory().grid().to_vec();
    grid.extend_from_slice(big.trajectory().grid());
    grid.extend((0..=1024).map(|i| length * i as f64 / 1024.0));
    let mut worst_gap = f64::INFINITY;
    let mut worst_at = 0.0;
    for t in grid {
        let gap = small.eval(t) - big.eval(t);
        if gap < worst_gap {
            worst_gap = gap;
            worst_at = t;
        }
    }
    Ok(ComparisonVerdict {
        holds: worst_gap >= -tol,
        worst_gap,
        worst_at,
        tolerance: tol,
    })
}

/// Classical RK4 with `steps` uniform steps; returns `(t, u, u')` samples.
///
/// This is the brute-force fallback: no step control, no breakpoint
/// splitting, just a fine uniform grid (the default is `2^14` steps).
pub fn solve_fixed_rk4(kappa: &CoefficientFn, length: f64, u0: f64, v0: f64, steps: usize) -> Result<Vec<(f64, f64, f64)>> {
    if !(length > 0.0 && length.is_finite()) || steps == 0 {
        return Err(Error::InvalidArgument("fixed-step solve needs L > 0 and steps > 0".into()));
    }
    let h = length / steps as f64;
    let k = |t: f64| -> Result<f64> {
        let v = kappa.eval(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteCoefficient { t })
        }
    };
    let mut out = Vec::with_capacity(steps + 1);
    let (mut u, mut v) = (u0, v0);
    out.push((0.0, u, v));
    for i in 0..steps {
        let t = i as f64 * h;
        let (ka, km, kb) = (k(t)?, k(t + 0.5 * h)?, k(t + h)?);
        let (u1, v1) = (v, -ka * u);
        let (u2, v2) = (v + 0.5 * h * v1, -km * (u + 0.5 * h * u1));
        let (u3, v3) = (v + 0.5 * h * v2, -km * (u + 0.5 * h * u2));
        let (u4, v4) = (v + h * v3, -kb * (u + h * u3));
        u += h / 6.0 * (u1 + 2.0 * u2 + 2.0 * u3 + u4);
        v += h / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
        out.push(((i + 1) as f64 * h, u, v));
    }
    Ok(out)
}

pub const FIXED_STEPS: usize = 1 << 14;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn sin_of_unit_coefficient() {
        let k = CoefficientFn::constant(1.0, PI).unwrap();
        let s = generalized_sin(&k, PI, &cfg()).unwrap();
        for i in 0..=200 {
            let t = PI * i as f64 / 200.0;
            assert!((s.eval(t) - t.sin()).abs() < 1e-8);
            assert!((s.eval_derivative(t) - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn first_zero_of_constant_coefficients() {
        for kk in [0.5, 1.0, 4.0, 25.0] {
            let l = 1.5 * PI / f64::sqrt(kk);
            let s = generalized_sin(&CoefficientFn::constant(kk, l).unwrap(), l, &cfg()).unwrap();
            let z = s.first_zero().unwrap();
            let exact = PI / f64::sqrt(kk);
            assert!((z - exact).abs() <= 1e-9 * exact, "K = {kk}: {z} vs {exact}");
        }
        for kk in [-3.0, 0.0] {
            let s = generalized_sin(&CoefficientFn::constant(kk, 5.0).unwrap(), 5.0, &cfg()).unwrap();
            assert!(s.first_zero().is_none());
        }
    }

    #[test]
    fn cosine_channel() {
        let c = generalized_cos(&CoefficientFn::constant(-1.0, 2.0).unwrap(), 2.0, &cfg()).unwrap();
        assert!((c.eval(0.0) - 1.0).abs() == 0.0);
        for i in 0..=40 {
            let t = 2.0 * i as f64 / 40.0;
            assert!((c.eval(t) - t.cosh()).abs() < 1e-8);
        }
        let c0 = generalized_cos(&CoefficientFn::constant(0.0, 2.0).unwrap(), 2.0, &cfg()).unwrap();
        assert!((c0.eval(1.3) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn euler_type_coefficient_matches_log_sin_basis() {
        // κ = (α² + ¼)/(A − t)², basis √(A−t)·{sin, cos}(α log(A−t))
        let (alpha, a): (f64, f64) = (1.0, 2.0);
        let k = CoefficientFn::power_law(alpha * alpha + 0.25, a, -2.0, PowerDirection::Decreasing, 1.5).unwrap();
        let (u0, v0) = (0.3, -0.7);
        let tr = solve_ivp(&k, 1.5, u0, v0, &cfg()).unwrap();
        let basis = |t: f64| {
            let x = a - t;
            let (s, c) = (alpha * x.ln()).sin_cos();
            let r = x.sqrt();
            // values and t-derivatives of the two basis functions
            let ds = -(0.5 / r) * s - r * c * alpha / x;
            let dc = -(0.5 / r) * c + r * s * alpha / x;
            ((r * s, ds), (r * c, dc))
        };
        let ((p0, dp0), (q0, dq0)) = basis(0.0);
        let det = p0 * dq0 - q0 * dp0;
        let ca = (u0 * dq0 - q0 * v0) / det;
        let cb = (p0 * v0 - u0 * dp0) / det;
        let mut worst = 0.0f64;
        for i in 0..=300 {
            let t = 1.5 * i as f64 / 300.0;
            let ((p, _), (q, _)) = basis(t);
            worst = worst.max((tr.eval(t) - (ca * p + cb * q)).abs());
        }
        assert!(worst <= 1e-6, "{worst}");
    }

    #[test]
    fn piecewise_linear_zero_agrees_with_fixed_steps() {
        let k = CoefficientFn::table(&[(0.0, 0.0), (PI, 4.0)]).unwrap();
        let s = generalized_sin(&k, PI, &cfg()).unwrap();
        let z = s.first_zero().unwrap();
        let pts = solve_fixed_rk4(&k, PI, 0.0, 1.0, 10 * FIXED_STEPS).unwrap();
        let w = pts.windows(2).find(|w| w[0].1 > 0.0 && w[1].1 <= 0.0).unwrap();
        // one Newton step from the left sample
        let oracle = w[0].0 - w[0].1 / w[0].2;
        assert!((z - oracle).abs() < 1e-8, "{z} vs {oracle}");
    }

    #[test]
    fn comparison_basic_cases() {
        let zero = CoefficientFn::constant(0.0, 3.0).unwrap();
        let one = CoefficientFn::constant(1.0, 3.0).unwrap();
        let v = verify_sturm_comparison(&zero, &one, 3.0, 1e-7, &cfg()).unwrap();
        assert!(v.holds && v.worst_gap > -1e-12);
        let same = verify_sturm_comparison(&one, &one, 3.0, 1e-7, &cfg()).unwrap();
        assert!(same.holds && same.worst_gap.abs() < 1e-14);
        assert!(matches!(
            verify_sturm_comparison(&one, &zero, 3.0, 1e-7, &cfg()),
            Err(Error::PreconditionOrderViolated { .. })
        ));
        let four = CoefficientFn::constant(4.0, 3.0).unwrap();
        assert!(matches!(
            verify_sturm_comparison(&one, &four, 3.0, 1e-7, &cfg()),
            Err(Error::PositivityViolated { .. })
        ));
    }

    #[test]
    fn wronskian_is_conserved() {
        let k = CoefficientFn::table(&[(0.0, -2.0), (0.4, 3.0), (1.0, 1.0)]).unwrap();
        let s = generalized_sin(&k, 1.0, &cfg()).unwrap();
        assert!(s.wronskian_drift(&k, &cfg()).unwrap() < 1e-9);
    }

    #[test]
    fn coefficient_stability_is_linear_in_perturbation() {
        let k = CoefficientFn::table(&[(0.0, 1.0), (0.5, -1.0), (2.0, 2.0)]).unwrap();
        let base = generalized_sin(&k, 2.0, &cfg()).unwrap();
        let mut ratios = Vec::new();
        for delta in [1e-2, 1e-3, 1e-4] {
            let p = generalized_sin(&k.shifted(delta), 2.0, &cfg()).unwrap();
            let diff = (0..=100)
                .map(|i| 2.0 * i as f64 / 100.0)
                .map(|t| (p.eval(t) - base.eval(t)).abs())
                .fold(0.0, f64::max);
            ratios.push(diff / delta);
        }
        // O(δ): the ratio settles to a constant
        assert!((ratios[1] - ratios[2]).abs() < 0.05 * ratios[2]);
        assert!((ratios[0] - ratios[2]).abs() < 0.2 * ratios[2]);
    }

    fn table_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-4.0f64..4.0, 5)
    }

    fn table_from(vals: &[f64], l: f64) -> CoefficientFn {
        let n = vals.len() - 1;
        let pts: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| (l * i as f64 / n as f64, v)).collect();
        CoefficientFn::table(&pts).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn linearity_in_initial_data(vals in table_strategy(), u0 in -1.0f64..1.0, v0 in -1.0f64..1.0) {
            let k = table_from(&vals, 1.0);
            let base = solve_ivp(&k, 1.0, u0, v0, &cfg()).unwrap();
            for a in [-2.0, 0.5, 10.0] {
                let s = solve_ivp(&k, 1.0, a * u0, a * v0, &cfg()).unwrap();
                for i in 0..=20 {
                    let t = i as f64 / 20.0;
                    prop_assert!((s.eval(t) - a * base.eval(t)).abs() < 1e-9 * (1.0 + a.abs()));
                }
            }
        }

        #[test]
        fn reparametrization(vals in table_strategy()) {
            let k = table_from(&vals, 3.0);
            let full = generalized_sin(&k, 3.0, &cfg()).unwrap();
            for theta in [0.3, 1.0, 2.7] {
                let r = k.reparametrized(theta).unwrap();
                let s = solve_ivp(&r, 1.0, 0.0, 1.0, &cfg()).unwrap();
                for i in 0..=20 {
                    let x = i as f64 / 20.0;
                    prop_assert!((s.eval(x) - full.eval(theta * x) / theta).abs() < 1e-8);
                }
            }
        }

        #[test]
        fn oscillation_is_inherited_upwards(vals in prop::collection::vec(0.0f64..6.0, 4), lift in prop::collection::vec(0.0f64..3.0, 4)) {
            let l = 4.0;
            let k = table_from(&vals, l);
            let bigger: Vec<f64> = vals.iter().zip(&lift).map(|(a, b)| a + b).collect();
            let kp = table_from(&bigger, l);
            let s = generalized_sin(&k, l, &cfg()).unwrap();
            if let Some(z) = s.first_zero() {
                let sp = generalized_sin(&kp, l, &cfg()).unwrap();
                let zp = sp.first_zero();
                prop_assert!(zp.is_some() && zp.unwrap() <= z + 1e-9);
            }
        }
    }
}
