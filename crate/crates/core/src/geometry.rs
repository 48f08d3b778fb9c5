//! Geometric consequences of curvature-dimension bounds on weighted
//! intervals: Brunn–Minkowski, Bishop–Gromov, doubling, effective diameter and
//! the Schneider-type compactness bound with its oscillation witness.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature_field::{CurvatureField, GeodesicSegment};
use crate::distortion::{DistortionConfig, ExtendedNonNeg, TauProfile};
use crate::error::{invalid, Error, Result};
use crate::spaces::{gauss_legendre, midpoint_set, WeightedInterval};
use crate::sturm::{generalized_cos, generalized_sin, CoefficientFn, PowerDirection, SinSolution, SolverConfig};

/// CSV-ready comparison row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

// ---------------------------------------------------------------- comparison

enum Shape {
    /// `𝔰_K` for the constant `K = κ/(N − 1)`.
    Constant(f64),
    Solved(SinSolution),
}

/// `r ↦ 𝔰_{κ/(N−1)}^{N−1}(r)` and its cumulative integral.
pub struct ComparisonProfile {
    n: f64,
    shape: Shape,
    reach: f64,
}

fn sin_constant(k: f64, r: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * r).sin() / k.sqrt()
    } else if k < 0.0 {
        ((-k).sqrt() * r).sinh() / (-k).sqrt()
    } else {
        r
    }
}

fn check_n(n: f64) -> Result<()> {
    if n >= 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("N must be >= 1, got {n}")))
    }
}

impl ComparisonProfile {
    /// Constant lower bound `κ`; `N = 1` gives the flat profile `1`.
    pub fn constant(kappa: f64, n: f64) -> Result<Self> {
        check_n(n)?;
        if n == 1.0 {
            return Ok(Self {
                n,
                shape: Shape::Constant(0.0),
                reach: f64::INFINITY,
            });
        }
        let k = kappa / (n - 1.0);
        let reach = if k > 0.0 { PI / k.sqrt() } else { f64::INFINITY };
        Ok(Self {
            n,
            shape: Shape::Constant(k),
            reach,
        })
    }

    /// Radial coefficient `κ(r)` on `[0, L]`; the profile uses `κ/(N − 1)`.
    pub fn radial(kappa: &CoefficientFn, n: f64, cfg: &SolverConfig) -> Result<Self> {
        check_n(n)?;
        if !(n > 1.0) {
            return Err(invalid("a radial comparison profile needs N > 1"));
        }
        let sin = generalized_sin(&kappa.scaled(1.0 / (n - 1.0)), kappa.length(), cfg)?;
        let reach = sin.first_zero().unwrap_or(f64::INFINITY);
        Ok(Self {
            n,
            shape: Shape::Solved(sin),
            reach,
        })
    }

    /// First zero of the profile (∞ when none was seen).
    pub fn reach(&self) -> f64 {
        self.reach
    }

    fn window(&self) -> f64 {
        match &self.shape {
            Shape::Constant(_) => f64::INFINITY,
            Shape::Solved(s) => s.length(),
        }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        let bound = self.reach.min(self.window());
        if !(r >= 0.0) || r > bound * (1.0 + 1e-12) {
            return Err(Error::BeyondConjugate { r, bound });
        }
        Ok(())
    }

    fn sin(&self, r: f64) -> f64 {
        match &self.shape {
            Shape::Constant(k) => sin_constant(*k, r),
            Shape::Solved(s) => s.eval(r),
        }
        .max(0.0)
    }

    /// `𝔰^{N−1}(r)`.
    pub fn density(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        if self.n == 1.0 {
            return Ok(1.0);
        }
        Ok(self.sin(r).powf(self.n - 1.0))
    }

    /// `∫₀^r 𝔰^{N−1}`.
    pub fn cumulative(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        if self.n == 1.0 {
            return Ok(r);
        }
        let p = self.n - 1.0;
        Ok(match &self.shape {
            Shape::Constant(k) => {
                let k = *k;
                gauss_legendre(0.0, r, 256, |s| sin_constant(k, s).max(0.0).powf(p))
            }
            Shape::Solved(s) => s.trajectory().integrate_with(r, |u| u.max(0.0).powf(p)),
        })
    }
}

/// `∫₀^r 𝔰_{κ/(N−1)}^{N−1}`, the volume of the comparison ball.
pub fn comparison_volume(kappa: f64, n: f64, r: f64) -> Result<f64> {
    if !(n > 1.0) {
        return Err(invalid(format!("comparison volume needs N > 1, got {n}")));
    }
    ComparisonProfile::constant(kappa, n)?.cumulative(r)
}

// ------------------------------------------------------------ Brunn–Minkowski

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BmRow {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BmReport {
    pub rows: Vec<BmRow>,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct BmConfig {
    /// Endpoint samples per set for the infima over geodesics.
    pub pair_points: usize,
    pub tol: f64,
    pub distortion: DistortionConfig,
}

impl Default for BmConfig {
    fn default() -> Self {
        Self {
            pair_points: 24,
            tol: 1e-6,
            distortion: DistortionConfig::default(),
        }
    }
}

fn samples(set: (f64, f64), n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| set.0 + (set.1 - set.0) * i as f64 / (n - 1) as f64).collect()
}

/// `m(A_t)^{1/N} ≥ inf τ^(1−t)_{k⁻,N}(θ)·m(A0)^{1/N} + inf τ^(t)_{k⁺,N}(θ)·m(A1)^{1/N}`
/// for intervals `A0`, `A1`, infima over endpoint pairs on a grid.
pub fn brunn_minkowski_check(
    space: &WeightedInterval,
    k: &CurvatureField,
    n: f64,
    a0: (f64, f64),
    a1: (f64, f64),
    t_grid: &[f64],
    cfg: &BmConfig,
) -> Result<BmReport> {
    check_n(n)?;
    for set in [a0, a1] {
        if !(set.0 <= set.1) || !space.contains(set.0) || !space.contains(set.1) {
            return Err(Error::DomainMismatch(format!("set [{}, {}] is not an interval of the space", set.0, set.1)));
        }
    }
    let (m0, m1) = (space.measure(a0.0, a0.1).value, space.measure(a1.0, a1.1).value);
    if !(m0 * m1 > 0.0) {
        return Err(invalid("both sets need positive measure"));
    }
    let xs = samples(a0, cfg.pair_points);
    let ys = samples(a1, cfg.pair_points);
    let pairs: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let profiles = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<(TauProfile, TauProfile)> {
            let kap = k.restrict_along(&GeodesicSegment::new(x, y))?;
            let theta = (y - x).abs();
            Ok((
                TauProfile::new(&kap, n, theta, &cfg.distortion)?,
                TauProfile::new(&kap.reversed(), n, theta, &cfg.distortion)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("t must lie in [0, 1], got {t}")));
        }
        let at = midpoint_set(a0, a1, t);
        let lhs = space.measure(at.0, at.1).value.powf(1.0 / n);
        let inf_back = profiles.iter().map(|(_, b)| b.at(1.0 - t)).fold(ExtendedNonNeg::Infinite, ExtendedNonNeg::min);
        let inf_fwd = profiles.iter().map(|(f, _)| f.at(t)).fold(ExtendedNonNeg::Infinite, ExtendedNonNeg::min);
        let rhs = inf_back.scale(m0.powf(1.0 / n)).add(inf_fwd.scale(m1.powf(1.0 / n)));
        let (rhs, slack) = match rhs.finite() {
            Some(r) => (r, lhs - r),
            None => (f64::INFINITY, f64::NEG_INFINITY),
        };
        rows.push(BmRow { t, lhs, rhs, slack });
    }
    let worst = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let worst = if rows.is_empty() { 0.0 } else { worst };
    Ok(BmReport {
        rows,
        worst_slack: worst,
        tolerance: cfg.tol,
        holds: worst >= -cfg.tol,
    })
}

// ------------------------------------------------------------- Bishop–Gromov

#[derive(Debug, Clone)]
pub enum BgBound {
    /// A constant lower bound `k̲` on the ball.
    Constant(f64),
    /// The lsc envelope `r ↦ min_{|y−x0|=r} k(y)` of a field.
    RadialEnvelope(CurvatureField),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BgReport {
    pub r: f64,
    pub big_r: f64,
    pub s_ratio: f64,
    pub s_bound: f64,
    pub v_ratio: f64,
    pub v_bound: f64,
    /// `min(s_ratio − s_bound, v_ratio − v_bound)`.
    pub slack: f64,
    pub holds: bool,
}

pub const BG_TOL: f64 = 1e-6;

/// Lower bounds `(𝔰^{N−1}(r)/𝔰^{N−1}(R), ∫₀^r/∫₀^R)` of the comparison profile.
pub fn comparison_ratios(profile: &ComparisonProfile, r: f64, big_r: f64) -> Result<(f64, f64)> {
    let s = profile.density(r)? / profile.density(big_r)?;
    let v = profile.cumulative(r)? / profile.cumulative(big_r)?;
    Ok((s, v))
}

/// Bishop–Gromov comparison of ball contents `s(r)/s(R)` and volumes
/// `v(r)/v(R)` around `x0` against the chosen bound.
pub fn bishop_gromov_check(
    space: &WeightedInterval,
    x0: f64,
    n: f64,
    bound: &BgBound,
    r: f64,
    big_r: f64,
    cfg: &SolverConfig,
) -> Result<BgReport> {
    check_n(n)?;
    if !(0.0 < r && r < big_r) {
        return Err(invalid(format!("need 0 < r < R, got r = {r}, R = {big_r}")));
    }
    if !space.contains(x0) {
        return Err(Error::DomainMismatch(format!("centre {x0} outside the space")));
    }
    let (s_bound, v_bound) = if n == 1.0 {
        let kmax = match bound {
            BgBound::Constant(k) => *k,
            BgBound::RadialEnvelope(f) => f.radial_envelope(x0, space.start(), space.end(), big_r)?.max_on(0.0, big_r),
        };
        if kmax > 0.0 {
            return Err(Error::HypothesisFailed("the N = 1 comparison needs k <= 0".into()));
        }
        (1.0, r / big_r)
    } else {
        let profile = match bound {
            BgBound::Constant(k) => ComparisonProfile::constant(*k, n)?,
            BgBound::RadialEnvelope(f) => {
                let env = f.radial_envelope(x0, space.start(), space.end(), big_r)?;
                ComparisonProfile::radial(&env, n, cfg)?
            }
        };
        comparison_ratios(&profile, r, big_r)?
    };
    let s_ratio = space.minkowski_content(x0, r) / space.minkowski_content(x0, big_r);
    let v_ratio = space.volume(x0, r).value / space.volume(x0, big_r).value;
    let slack = (s_ratio - s_bound).min(v_ratio - v_bound);
    Ok(BgReport {
        r,
        big_r,
        s_ratio,
        s_bound,
        v_ratio,
        v_bound,
        slack,
        holds: slack >= -BG_TOL,
    })
}

/// Smallest constant below the envelope on `[0, R]`, i.e. the constant bound
/// one would use without the radial refinement.
pub fn ball_minimum(field: &CurvatureField, space: &WeightedInterval, x0: f64, big_r: f64) -> Result<f64> {
    Ok(field.radial_envelope(x0, space.start(), space.end(), big_r)?.min_on(0.0, big_r))
}

/// `log(v(r2)/v(r1)) / log(r2/r1)`: the local growth exponent of balls.
pub fn local_volume_exponent(space: &WeightedInterval, x0: f64, r1: f64, r2: f64) -> Result<f64> {
    if !(0.0 < r1 && r1 < r2) {
        return Err(invalid("need 0 < r1 < r2"));
    }
    let (v1, v2) = (space.volume(x0, r1).value, space.volume(x0, r2).value);
    Ok((v2 / v1).ln() / (r2 / r1).ln())
}

// ------------------------------------------------------------------ doubling

/// `2^N` for `k̲ ≥ 0`, else `2^N·𝔠_{k̲/(N−1)}(L)^{N−1}`.
pub fn doubling_bound(k_low: f64, n: f64, l: f64) -> f64 {
    let base = 2f64.powf(n);
    if k_low >= 0.0 || n == 1.0 {
        return base;
    }
    let k = k_low / (n - 1.0);
    base * ((-k).sqrt() * l).cosh().powf(n - 1.0)
}

/// The same bound with `𝔠` solved numerically (cross-check).
pub fn doubling_bound_solved(k_low: f64, n: f64, l: f64, cfg: &SolverConfig) -> Result<f64> {
    let base = 2f64.powf(n);
    if k_low >= 0.0 || n == 1.0 {
        return Ok(base);
    }
    let c = generalized_cos(&CoefficientFn::constant(k_low / (n - 1.0), l)?, l, cfg)?;
    Ok(base * c.eval(l).powf(n - 1.0))
}

/// Measured `v(2r)/v(r)` for every centre and radius.
pub fn doubling_ratios(space: &WeightedInterval, centres: &[f64], radii: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &x in centres {
        for &r in radii {
            out.push((x, r, space.volume(x, 2.0 * r).value / space.volume(x, r).value));
        }
    }
    out
}

// -------------------------------------------------------- effective diameter

/// First zero of `𝔰_{k/(N−1)}` on the coefficient's window, else `∞`.
pub fn effective_diameter(k: &CoefficientFn, n: f64, cfg: &SolverConfig) -> Result<ExtendedNonNeg> {
    if !(n > 1.0) {
        return Err(invalid(format!("effective diameter needs N > 1, got {n}")));
    }
    let s = generalized_sin(&k.scaled(1.0 / (n - 1.0)), k.length(), cfg)?;
    Ok(match s.first_zero() {
        Some(z) => ExtendedNonNeg::Finite(z),
        None => ExtendedNonNeg::Infinite,
    })
}

// ----------------------------------------------------------------- Schneider

fn schneider_alpha(c: f64, n: f64) -> Result<f64> {
    if !(n > 1.0) {
        return Err(invalid(format!("the compactness bound needs N > 1, got {n}")));
    }
    let critical = (n - 1.0) / 4.0;
    if !(c > critical) {
        return Err(Error::SubcriticalC { c, critical });
    }
    Ok((c / (n - 1.0) - 0.25).sqrt())
}

/// `(R + δ)·e^{π/α}` with `α = √(c/(N−1) − ¼)`.
pub fn schneider_bound(c: f64, n: f64, big_r: f64, delta: f64) -> Result<f64> {
    let alpha = schneider_alpha(c, n)?;
    if !(big_r > delta && delta > 0.0) {
        return Err(invalid(format!("need R > δ > 0, got R = {big_r}, δ = {delta}")));
    }
    Ok((big_r + delta) * (PI / alpha).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchneiderWitness {
    pub alpha: f64,
    pub window: f64,
    pub eps: f64,
    /// Largest `|𝔰 − closed form|` on the window.
    pub max_error: f64,
    pub zero: Option<f64>,
    pub zero_closed_form: f64,
    pub zero_before_end: bool,
}

/// `√D·√r·sin(α log(D/r))/α` with `r = D − t`: the solution of
/// `u'' + (α² + ¼)(D − t)^{−2}u = 0`, `u(0) = 0`, `u'(0) = 1`.
pub fn log_sin_solution(alpha: f64, big_d: f64, t: f64) -> f64 {
    let r = big_d - t;
    big_d.sqrt() * r.sqrt() * (alpha * (big_d / r).ln()).sin() / alpha
}

/// Same with `β ≤ ¼`: `γ = √(¼ − β)`, `√D·√r·sinh(γ log(D/r))/γ` (and the
/// logarithmic limit at `γ = 0`).
pub fn subcritical_solution(beta: f64, big_d: f64, t: f64) -> f64 {
    let r = big_d - t;
    let l = (big_d / r).ln();
    let gamma = (0.25 - beta).max(0.0).sqrt();
    let shape = if gamma == 0.0 { l } else { (gamma * l).sinh() / gamma };
    big_d.sqrt() * r.sqrt() * shape
}

fn euler_coefficient(beta: f64, big_d: f64, window: f64) -> Result<CoefficientFn> {
    CoefficientFn::power_law(beta, big_d, -2.0, PowerDirection::Decreasing, window)
}

fn max_error(sin: &SinSolution, window: f64, closed: impl Fn(f64) -> f64) -> f64 {
    let n = 4000;
    (0..=n)
        .map(|i| {
            let t = window * i as f64 / n as f64;
            (sin.eval(t) - closed(t)).abs()
        })
        .fold(0.0, f64::max)
}

/// Solves `𝔰_κ` for `κ(t) = (α² + ¼)/(ε + d − t)²` on `[0, d]`, compares with
/// the log-sin closed form and locates its zero.
pub fn schneider_oscillation_witness(c: f64, n: f64, d: f64, eps: f64, cfg: &SolverConfig) -> Result<SchneiderWitness> {
    let alpha = schneider_alpha(c, n)?;
    if !(d > 0.0 && eps > 0.0) {
        return Err(invalid("need d > 0 and ε > 0"));
    }
    let big_d = eps + d;
    let beta = alpha * alpha + 0.25;
    let sin = generalized_sin(&euler_coefficient(beta, big_d, d)?, d, cfg)?;
    let zero_closed = big_d * (1.0 - (-PI / alpha).exp());
    // the closed form only oscillates once per factor e^{π/α}; compare up to
    // the window end
    let max_err = max_error(&sin, d, |t| log_sin_solution(alpha, big_d, t));
    let zero = sin.first_zero();
    Ok(SchneiderWitness {
        alpha,
        window: d,
        eps,
        max_error: max_err,
        zero,
        zero_closed_form: zero_closed,
        zero_before_end: zero.is_some_and(|z| z < d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubcriticalReport {
    pub beta: f64,
    pub window: f64,
    pub zero: Option<f64>,
    pub max_error: f64,
    pub max_value: f64,
}

/// `κ(t) = β/(ε + d − t)²` with `β ≤ ¼`: no zero is expected on `[0, d]`.
pub fn subcritical_probe(beta: f64, d: f64, eps: f64, cfg: &SolverConfig) -> Result<SubcriticalReport> {
    if !(beta <= 0.25) {
        return Err(invalid(format!("subcritical probe needs β <= 1/4, got {beta}")));
    }
    let big_d = eps + d;
    let sin = generalized_sin(&euler_coefficient(beta, big_d, d)?, d, cfg)?;
    let closed = |t: f64| subcritical_solution(beta, big_d, t);
    let max_value = (0..=4000).map(|i| closed(d * i as f64 / 4000.0).abs()).fold(0.0, f64::max);
    Ok(SubcriticalReport {
        beta,
        window: d,
        zero: sin.first_zero(),
        max_error: max_error(&sin, d, closed),
        max_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{model_space, FieldScaling, InitialData};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solver() -> SolverConfig {
        SolverConfig::default()
    }

    fn sine_space(n: f64, a: f64, b: f64) -> WeightedInterval {
        model_space(
            &CurvatureField::constant(1.0).unwrap(),
            n,
            a,
            b,
            InitialData { u0: a.sin(), v0: a.cos() },
            FieldScaling::DimensionScaled,
            &solver(),
        )
        .unwrap()
    }

    #[test]
    fn comparison_volume_examples() {
        for n in [2.0, 3.5] {
            assert!((comparison_volume(0.0, n, 1.3).unwrap() - 1.3f64.powf(n) / n).abs() < 1e-12);
        }
        assert!((comparison_volume(1.0, 2.0, PI).unwrap() - 2.0).abs() < 1e-12);
        assert!((comparison_volume(-1.0, 2.0, 1.0).unwrap() - (1f64.cosh() - 1.0)).abs() < 1e-12);
        assert!(matches!(comparison_volume(1.0, 2.0, 3.5), Err(Error::BeyondConjugate { .. })));
        // the solved profile agrees with the closed one
        let solved = ComparisonProfile::radial(&CoefficientFn::constant(2.0, 4.0).unwrap(), 3.0, &solver()).unwrap();
        let closed = ComparisonProfile::constant(2.0, 3.0).unwrap();
        assert!((solved.cumulative(2.0).unwrap() - closed.cumulative(2.0).unwrap()).abs() < 1e-8);
        assert!((solved.reach() - PI).abs() < 1e-8);
    }

    #[test]
    fn brunn_minkowski_examples() {
        let s = WeightedInterval::lebesgue(0.0, 3.0).unwrap();
        let zero = CurvatureField::constant(0.0).unwrap();
        let t_grid = [0.2, 0.5, 0.8];
        let r = brunn_minkowski_check(&s, &zero, 1.0, (0.0, 0.5), (1.0, 2.5), &t_grid, &BmConfig::default()).unwrap();
        assert!(r.holds && r.worst_slack.abs() < 1e-10, "{r:?}");
        let big = CurvatureField::constant(40.0).unwrap();
        let r = brunn_minkowski_check(&s, &big, 2.0, (0.0, 0.2), (2.0, 2.2), &t_grid, &BmConfig::default()).unwrap();
        assert!(!r.holds && r.worst_slack == f64::NEG_INFINITY);
    }

    #[test]
    fn brunn_minkowski_on_the_sine_model() {
        let n = 3.0;
        let s = sine_space(n, 0.1, PI - 0.1);
        let k = s.certificate().unwrap().field.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = BmConfig {
            pair_points: 8,
            ..BmConfig::default()
        };
        for _ in 0..10 {
            let mut pick = || {
                let a = rng.gen_range(0.1..PI - 0.3);
                (a, (a + rng.gen_range(0.05..0.6)).min(PI - 0.1))
            };
            let (a0, a1) = (pick(), pick());
            let t = rng.gen_range(0.05..0.95);
            let r = brunn_minkowski_check(&s, &k, n, a0, a1, &[t], &cfg).unwrap();
            assert!(r.holds, "{a0:?} {a1:?} {r:?}");
        }
    }

    #[test]
    fn bishop_gromov_equality_and_weaker_bound() {
        for n in [2.0, 3.0, 4.0] {
            let s = sine_space(n, 0.0, PI);
            for (r, big_r) in [(0.5, 1.0), (1.0, 2.0), (2.0, 3.0)] {
                let rep = bishop_gromov_check(&s, 0.0, n, &BgBound::Constant(n - 1.0), r, big_r, &solver()).unwrap();
                assert!((rep.s_ratio - rep.s_bound).abs() < 1e-6, "{rep:?}");
                assert!((rep.v_ratio - rep.v_bound).abs() < 1e-6, "{rep:?}");
                let weak = bishop_gromov_check(&s, 0.0, n, &BgBound::Constant(0.0), r, big_r, &solver()).unwrap();
                assert!(weak.holds && weak.slack > 1e-3);
            }
        }
        let leb = WeightedInterval::lebesgue(0.0, 10.0).unwrap();
        let rep = bishop_gromov_check(&leb, 5.0, 1.0, &BgBound::Constant(0.0), 1.0, 3.0, &solver()).unwrap();
        assert!((rep.v_ratio - 1.0 / 3.0).abs() < 1e-12 && rep.holds);
    }

    #[test]
    fn envelope_mode_is_never_weaker() {
        let s = WeightedInterval::lebesgue(0.0, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let pts: Vec<(f64, f64)> = (0..=8).map(|i| (i as f64 * 0.5, rng.gen_range(-1.0..1.0))).collect();
            let field = CurvatureField::from_samples(&pts, false).unwrap();
            let x0 = 0.0;
            let (r, big_r) = (0.7, 2.0);
            let n = 3.0;
            let env = field.radial_envelope(x0, 0.0, 4.0, big_r).unwrap();
            let pe = ComparisonProfile::radial(&env, n, &solver()).unwrap();
            let kmin = ball_minimum(&field, &s, x0, big_r).unwrap();
            let pc = ComparisonProfile::constant(kmin, n).unwrap();
            let (se, ve) = comparison_ratios(&pe, r, big_r).unwrap();
            let (sc, vc) = comparison_ratios(&pc, r, big_r).unwrap();
            assert!(se >= sc - 1e-9 && ve >= vc - 1e-9);
        }
    }

    #[test]
    fn doubling_examples() {
        assert_eq!(doubling_bound(0.5, 3.0, 2.0), 8.0);
        assert_eq!(doubling_bound(-3.0, 1.0, 2.0), 2.0);
        let n = 3.0;
        let b = doubling_bound(-(n - 1.0), n, 1.0);
        assert!((b - 8.0 * 1f64.cosh().powf(2.0)).abs() < 1e-12);
        assert!((doubling_bound_solved(-(n - 1.0), n, 1.0, &solver()).unwrap() - b).abs() < 1e-8);
        let s = sine_space(n, 0.1, PI - 0.1);
        let centres: Vec<f64> = (0..8).map(|i| 0.1 + i as f64 * 0.35).collect();
        for (_, _, ratio) in doubling_ratios(&s, &centres, &[0.05, 0.1, 0.3, 0.6]) {
            assert!(ratio <= doubling_bound(2.0, n, PI) + 1e-9);
        }
    }

    #[test]
    fn effective_diameter_examples() {
        let n = 3.0;
        let d = effective_diameter(&CoefficientFn::constant(n - 1.0, 4.0).unwrap(), n, &solver()).unwrap();
        assert!((d.to_f64() - PI).abs() < 1e-9);
        assert!(effective_diameter(&CoefficientFn::constant(0.0, 50.0).unwrap(), n, &solver()).unwrap().is_infinite());
        let e = 0.1;
        let s = sine_space(n, e, PI - e);
        let k = s.certificate().unwrap().field.as_constant().unwrap();
        let d = effective_diameter(&CoefficientFn::constant(k, 4.0).unwrap(), n, &solver()).unwrap().to_f64();
        assert!(d >= s.diameter() - 1e-9 && d - s.diameter() <= 2.0 * e + 1e-9);
    }

    #[test]
    fn schneider_examples() {
        let b = schneider_bound(0.5, 2.0, 3.0, 1.0).unwrap();
        assert_eq!(b, 4.0 * (2.0 * PI).exp());
        assert!(schneider_bound(0.25 + 1e-10, 2.0, 3.0, 1.0).unwrap() > 1e100);
        assert!(matches!(schneider_bound(0.25, 2.0, 3.0, 1.0), Err(Error::SubcriticalC { .. })));
        let w = schneider_oscillation_witness(1.25, 2.0, 10.0, 0.1, &solver()).unwrap();
        assert!((w.alpha - 1.0).abs() < 1e-15);
        assert!(w.max_error < 1e-6, "{w:?}");
        assert!((w.zero.unwrap() - w.zero_closed_form).abs() < 1e-6 && w.zero_before_end);
        let sub = subcritical_probe(0.25, 100.0, 1.0, &solver()).unwrap();
        assert!(sub.zero.is_none() && sub.max_error < 1e-6 * sub.max_value.max(1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn comparison_ratio_is_monotone_in_kappa(k in -3.0f64..1.0, dk in 0.0f64..1.0, n in 1.5f64..6.0, r in 0.05f64..0.9) {
            let big_r = 1.0;
            let lo = ComparisonProfile::constant(k * (n - 1.0), n).unwrap();
            let hi = ComparisonProfile::constant((k + dk) * (n - 1.0), n).unwrap();
            let (s1, v1) = comparison_ratios(&lo, r, big_r).unwrap();
            let (s2, v2) = comparison_ratios(&hi, r, big_r).unwrap();
            prop_assert!(s1 <= s2 + 1e-12 && v1 <= v2 + 1e-12);
        }
    }
}
