//! Distortion coefficients `σ_κ^(t)(θ)`, `σ_{k,N}` and `τ_{k,N}` with values
//! in `[0, ∞]`.
//!
//! `σ_κ^(t)(θ) = 𝔰_κ(tθ)/𝔰_κ(θ)` when `𝔰_κ > 0` on `(0, θ]` and `∞`
//! otherwise. The finite branch is computed from the rescaled equation
//! `u'' + κ(sθ)θ² u = 0` on `[0, 1]`, so the zero tolerance is relative to
//! the length of the geodesic.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curvature_field::{CurvatureField, GeodesicSegment, LipschitzApprox, DEFAULT_GRID};
use crate::error::{invalid, Error, Result};
use crate::sturm::{generalized_sin, CoefficientFn, SinSolution, SolverConfig};

/// A number in `[0, ∞]`.
///
/// `0·∞ = 0`, `r·∞ = ∞` for `r > 0` and `∞^α = ∞` for `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedNonNeg {
    Finite(f64),
    Infinite,
}

pub use ExtendedNonNeg::{Finite, Infinite};

impl ExtendedNonNeg {
    pub const ZERO: Self = Finite(0.0);
    pub const ONE: Self = Finite(1.0);

    /// Maps `+∞` to [`Infinite`]; negative or NaN input is a caller bug.
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(x >= 0.0, "extended value must be non-negative, got {x}");
        if x == f64::INFINITY {
            Infinite
        } else {
            Finite(x)
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Infinite)
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(x) => Some(x),
            Infinite => None,
        }
    }

    /// `+∞` as an `f64` infinity.
    pub fn to_f64(self) -> f64 {
        match self {
            Finite(x) => x,
            Infinite => f64::INFINITY,
        }
    }

    pub fn mul(self, other: Self) -> Self {
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a * b),
            (Finite(z), Infinite) | (Infinite, Finite(z)) if z == 0.0 => Finite(0.0),
            _ => Infinite,
        }
    }

    /// `r · self` for a real `r ≥ 0`.
    pub fn scale(self, r: f64) -> Self {
        self.mul(Finite(r))
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a + b),
            _ => Infinite,
        }
    }

    /// `self^alpha` for `alpha ≥ 0` (`x^0 = 1`, including `∞^0`).
    pub fn powf(self, alpha: f64) -> Self {
        debug_assert!(alpha >= 0.0);
        match self {
            _ if alpha == 0.0 => Finite(1.0),
            Finite(x) => Finite(x.powf(alpha)),
            Infinite => Infinite,
        }
    }

    pub fn ln(self) -> f64 {
        self.to_f64().ln()
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtendedNonNeg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), Infinite) => Some(Ordering::Less),
            (Infinite, Finite(_)) => Some(Ordering::Greater),
            (Infinite, Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtendedNonNeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(x) => write!(f, "{x}"),
            Infinite => f.write_str("inf"),
        }
    }
}

/// What to do when the first zero of `𝔰` sits inside the tolerance band
/// around `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BorderlinePolicy {
    /// Raise [`Error::Borderline`].
    #[default]
    Reject,
    /// Resolve towards `∞` (a zero at `θ` means `𝔰` is not positive on `(0, θ]`).
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionConfig {
    pub solver: SolverConfig,
    /// Half-width of the band around `s = 1` (rescaled geodesic) in which
    /// neither verdict is certified.
    pub zero_tol: f64,
    pub borderline: BorderlinePolicy,
}

impl Default for DistortionConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            zero_tol: 1e-8,
            borderline: BorderlinePolicy::Reject,
        }
    }
}

impl DistortionConfig {
    pub fn with_policy(mut self, policy: BorderlinePolicy) -> Self {
        self.borderline = policy;
        self
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }
}

#[derive(Debug, Clone)]
enum State {
    /// `θ = 0`: the limit `σ^(t) = t`.
    Linear,
    Infinite,
    Finite { sin: SinSolution, at_one: f64 },
}

/// `t ↦ σ_κ^(t)(θ)` for one `(κ, θ)`, solved once.
#[derive(Debug, Clone)]
pub struct DistortionProfile {
    theta: f64,
    state: State,
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(invalid(format!("t must lie in [0, 1], got {t}")))
    }
}

impl DistortionProfile {
    /// `κ` must be defined on `[0, θ]` (its length may exceed `θ`).
    pub fn new(kappa: &CoefficientFn, theta: f64, cfg: &DistortionConfig) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(invalid(format!("theta must be finite and >= 0, got {theta}")));
        }
        if theta > kappa.length() * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::DomainMismatch(format!(
                "theta = {theta} exceeds the coefficient domain [0, {}]",
                kappa.length()
            )));
        }
        if theta == 0.0 {
            return Ok(Self {
                theta,
                state: State::Linear,
            });
        }
        let unit = kappa.with_length(theta)?.reparametrized(theta)?;
        let sin = generalized_sin(&unit, 1.0, &cfg.solver)?;
        let tol = cfg.zero_tol;
        let borderline = |zero: f64| -> Result<State> {
            match cfg.borderline {
                BorderlinePolicy::Reject => Err(Error::Borderline {
                    zero: zero * theta,
                    theta,
                    tol: tol * theta,
                }),
                BorderlinePolicy::Infinite => Ok(State::Infinite),
            }
        };
        let state = match sin.first_zero() {
            Some(z) if z <= 1.0 - tol => State::Infinite,
            Some(z) => borderline(z)?,
            None => {
                let (u, du) = sin.trajectory().eval_both(1.0);
                // a zero just past the end shows up as a small value falling fast
                if du < 0.0 && 1.0 + u / (-du) < 1.0 + tol {
                    borderline(1.0 + u / (-du))?
                } else {
                    State::Finite { sin, at_one: u }
                }
            }
        };
        Ok(Self { theta, state })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.state, State::Infinite)
    }

    /// `σ^(t)`: exactly `0` at `t = 0` and exactly `1` at `t = 1` on the
    /// finite branch. An infinite profile is `∞` on `(0, 1]` and `0` at
    /// `t = 0` (the `θ·∞`-type endpoint never carries mass).
    pub fn at(&self, t: f64) -> ExtendedNonNeg {
        if t <= 0.0 {
            return Finite(0.0);
        }
        match &self.state {
            State::Linear => Finite(t.min(1.0)),
            State::Infinite => Infinite,
            State::Finite { sin, at_one } => {
                if t >= 1.0 {
                    Finite(1.0)
                } else {
                    Finite((sin.eval(t) / at_one).max(0.0))
                }
            }
        }
    }

    /// Position of the first zero of `𝔰_κ` in physical units, if it was seen.
    pub fn first_zero(&self) -> Option<f64> {
        match &self.state {
            State::Finite { sin, .. } => sin.first_zero().map(|z| z * self.theta),
            _ => None,
        }
    }
}

/// `σ_κ^(t)(θ)`.
pub fn sigma(kappa: &CoefficientFn, t: f64, theta: f64, cfg: &DistortionConfig) -> Result<ExtendedNonNeg> {
    check_t(t)?;
    Ok(DistortionProfile::new(kappa, theta, cfg)?.at(t))
}

fn check_dimension(n: f64, min: f64) -> Result<()> {
    if n >= min && n.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("dimension must be >= {min}, got {n}")))
    }
}

/// `σ_{k,N}^(t)(θ) = σ_{k/N}^(t)(θ)`.
pub fn sigma_kn(k: &CoefficientFn, n: f64, t: f64, theta: f64, cfg: &DistortionConfig) -> Result<ExtendedNonNeg> {
    if !(n > 0.0) {
        return Err(invalid(format!("N must be positive, got {n}")));
    }
    sigma(&k.scaled(1.0 / n), t, theta, cfg)
}

#[derive(Debug, Clone)]
enum TauState {
    Linear,
    Infinite,
    Composite(DistortionProfile),
}

/// `t ↦ τ_{k,N}^(t)(θ)` for one `(k, N, θ)`.
#[derive(Debug, Clone)]
pub struct TauProfile {
    n: f64,
    state: TauState,
}

impl TauProfile {
    pub fn new(k: &CoefficientFn, n: f64, theta: f64, cfg: &DistortionConfig) -> Result<Self> {
        check_dimension(n, 1.0)?;
        if n == 1.0 {
            if theta > 0.0 && k.with_length(theta)?.max_on(0.0, theta) > 0.0 {
                return Ok(Self {
                    n,
                    state: TauState::Infinite,
                });
            }
            return Ok(Self {
                n,
                state: TauState::Linear,
            });
        }
        let profile = DistortionProfile::new(&k.scaled(1.0 / (n - 1.0)), theta, cfg)?;
        Ok(Self {
            n,
            state: TauState::Composite(profile),
        })
    }

    pub fn dimension(&self) -> f64 {
        self.n
    }

    pub fn is_infinite(&self) -> bool {
        match &self.state {
            TauState::Infinite => true,
            TauState::Composite(p) => p.is_infinite(),
            TauState::Linear => false,
        }
    }

    /// `τ^(t)`; `0` at `t = 0` by the same endpoint convention as σ.
    pub fn at(&self, t: f64) -> ExtendedNonNeg {
        if t <= 0.0 {
            return Finite(0.0);
        }
        match &self.state {
            TauState::Linear => Finite(t.min(1.0)),
            TauState::Infinite => Infinite,
            TauState::Composite(p) => {
                if t >= 1.0 {
                    return Finite(1.0);
                }
                let s = p.at(t).powf((self.n - 1.0) / self.n);
                s.scale(t.powf(1.0 / self.n))
            }
        }
    }
}

/// `τ_{k,N}^(t)(θ)`.
pub fn tau(k: &CoefficientFn, n: f64, t: f64, theta: f64, cfg: &DistortionConfig) -> Result<ExtendedNonNeg> {
    check_t(t)?;
    Ok(TauProfile::new(k, n, theta, cfg)?.at(t))
}

/// σ-profiles of `κ` and of its reversal `κ⁻` on `[0, θ]`, for the two-sided
/// combination `σ_{κ⁻}^(1−t)·a + σ_{κ⁺}^(t)·b`.
#[derive(Debug, Clone)]
pub struct BoundaryPair {
    forward: DistortionProfile,
    backward: DistortionProfile,
}

impl BoundaryPair {
    pub fn new(kappa: &CoefficientFn, theta: f64, cfg: &DistortionConfig) -> Result<Self> {
        let own = kappa.with_length(theta)?;
        Ok(Self {
            forward: DistortionProfile::new(&own, theta, cfg)?,
            backward: DistortionProfile::new(&own.reversed(), theta, cfg)?,
        })
    }

    pub fn forward(&self) -> &DistortionProfile {
        &self.forward
    }

    pub fn backward(&self) -> &DistortionProfile {
        &self.backward
    }

    pub fn combine(&self, a: f64, b: f64, t: f64) -> ExtendedNonNeg {
        self.backward.at(1.0 - t).scale(a).add(self.forward.at(t).scale(b))
    }
}

/// `v(t) = σ_{κ⁻}^(1−t)(θ)·a + σ_{κ⁺}^(t)(θ)·b`, the solution of the
/// rescaled equation with `v(0) = a`, `v(1) = b`.
pub fn boundary_value_combination(
    kappa: &CoefficientFn,
    theta: f64,
    a: f64,
    b: f64,
    t: f64,
    cfg: &DistortionConfig,
) -> Result<ExtendedNonNeg> {
    check_t(t)?;
    if !(a >= 0.0 && b >= 0.0) {
        return Err(invalid("boundary values must be non-negative"));
    }
    Ok(BoundaryPair::new(kappa, theta, cfg)?.combine(a, b, t))
}

/// `(σ_{κ≡κ0}^(t)(h) − t)/(t·h²)`, which tends to `(1 − t²)κ0/6` as `h → 0`.
pub fn taylor_residual(kappa0: f64, t: f64, h: f64, cfg: &DistortionConfig) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) || !(h > 0.0) {
        return Err(invalid("taylor residual needs t in (0, 1] and h > 0"));
    }
    let k = CoefficientFn::constant(kappa0, h)?;
    match sigma(&k, t, h, cfg)? {
        Finite(s) => Ok((s - t) / (t * h * h)),
        Infinite => Err(invalid(format!("sigma is infinite for kappa0 = {kappa0}, h = {h}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LscConfig {
    /// Largest Lipschitz constant tried; the sequence is `1, 2, 4, …, n_max`.
    pub n_max: u32,
    pub grid: usize,
    /// Increment below which the limit counts as converged.
    pub tol: f64,
}

impl Default for LscConfig {
    fn default() -> Self {
        Self {
            n_max: 1 << 10,
            grid: DEFAULT_GRID,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LscReport {
    pub sequence: Vec<(u32, ExtendedNonNeg)>,
    pub value: ExtendedNonNeg,
    /// `|σ_{n_max} − σ_{n_max/2}|`, or `0` once the sequence reached `∞`.
    pub last_increment: f64,
    pub converged: bool,
}

impl LscReport {
    /// Non-decreasing up to `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.sequence.windows(2).all(|w| match (w[0].1, w[1].1) {
            (Finite(a), Finite(b)) => b >= a - slack,
            (Infinite, Finite(_)) => false,
            _ => true,
        })
    }
}

/// `σ` along `γ` for the approximations `κ_n` of an lsc field on `[a, b]`.
/// Never fails on non-convergence; see [`sigma_lsc`].
#[allow(clippy::too_many_arguments)]
pub fn sigma_lsc_sequence(
    field: &CurvatureField,
    a: f64,
    b: f64,
    seg: &GeodesicSegment,
    t: f64,
    lsc: &LscConfig,
    cfg: &DistortionConfig,
) -> Result<LscReport> {
    check_t(t)?;
    let theta = seg.length();
    let mut sequence = Vec::new();
    let mut n = 1u32;
    loop {
        let approx = LipschitzApprox::new(field, n as f64, a, b, lsc.grid)?.to_field()?;
        let coef = approx.restrict_along(seg)?;
        let value = sigma(&coef, t, theta, cfg)?;
        sequence.push((n, value));
        if value.is_infinite() || n >= lsc.n_max {
            break;
        }
        n = n.saturating_mul(2).min(lsc.n_max);
    }
    let value = sequence.last().unwrap().1;
    let last_increment = match (sequence.len(), value) {
        (_, Infinite) => 0.0,
        (1, _) => f64::INFINITY,
        (m, Finite(v)) => (v - sequence[m - 2].1.to_f64()).abs(),
    };
    let converged = value.is_infinite() || last_increment <= lsc.tol;
    Ok(LscReport {
        sequence,
        value,
        last_increment,
        converged,
    })
}

/// Like [`sigma_lsc_sequence`], raising [`Error::NotConverged`] when the last
/// increment exceeds the tolerance.
pub fn sigma_lsc(
    field: &CurvatureField,
    a: f64,
    b: f64,
    seg: &GeodesicSegment,
    t: f64,
    lsc: &LscConfig,
    cfg: &DistortionConfig,
) -> Result<ExtendedNonNeg> {
    let report = sigma_lsc_sequence(field, a, b, seg, t, lsc, cfg)?;
    if report.converged {
        Ok(report.value)
    } else {
        Err(Error::NotConverged {
            n: report.sequence.last().unwrap().0,
            last: report.value.to_f64(),
            increment: report.last_increment,
        })
    }
}

/// Which coefficient a batch row asks for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoefficientKind {
    Sigma,
    SigmaKn { n: f64 },
    Tau { n: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `κ⁺ = κ`
    Forward,
    /// `κ⁻ = κ(θ − ·)`
    Reversed,
}

/// One `(t, θ)` query against a coefficient restricted to `[0, θ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionQuery {
    pub kind: CoefficientKind,
    pub t: f64,
    pub theta: f64,
    pub side: Side,
}

impl DistortionQuery {
    pub fn evaluate(&self, kappa: &CoefficientFn, cfg: &DistortionConfig) -> Result<ExtendedNonNeg> {
        let own = kappa.with_length(self.theta.min(kappa.length()))?;
        let k = match self.side {
            Side::Forward => own,
            Side::Reversed => own.reversed(),
        };
        match self.kind {
            CoefficientKind::Sigma => sigma(&k, self.t, self.theta, cfg),
            CoefficientKind::SigmaKn { n } => sigma_kn(&k, n, self.t, self.theta, cfg),
            CoefficientKind::Tau { n } => tau(&k, n, self.t, self.theta, cfg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cfg() -> DistortionConfig {
        DistortionConfig::default()
    }

    fn constant(k: f64, l: f64) -> CoefficientFn {
        CoefficientFn::constant(k, l).unwrap()
    }

    #[test]
    fn extended_arithmetic() {
        assert_eq!(Infinite.scale(0.0), Finite(0.0));
        assert_eq!(Infinite.scale(2.0), Infinite);
        assert_eq!(Infinite.powf(0.5), Infinite);
        assert_eq!(Finite(4.0).powf(0.5), Finite(2.0));
        assert!(Finite(1e300) < Infinite);
        assert_eq!(Finite(1.0).add(Infinite), Infinite);
        assert_eq!(Finite(3.0).max(Infinite), Infinite);
        assert_eq!(Infinite.to_string(), "inf");
    }

    #[test]
    fn flat_and_constant_curvature() {
        for theta in [0.0, 0.5, 3.0] {
            let s = sigma(&constant(0.0, 3.0), 0.3, theta, &cfg()).unwrap();
            assert!((s.to_f64() - 0.3).abs() < 1e-12);
        }
        let (k, theta, t) = (2.0f64, 1.5, 0.4);
        let s = sigma(&constant(k, theta), t, theta, &cfg()).unwrap().to_f64();
        let exact = (k.sqrt() * t * theta).sin() / (k.sqrt() * theta).sin();
        assert!((s - exact).abs() < 1e-8);
        let neg = sigma_kn(&constant(-3.0, 2.0), 2.0, t, 2.0, &cfg()).unwrap().to_f64();
        let c = (1.5f64).sqrt();
        assert!((neg - (c * t * 2.0).sinh() / (c * 2.0).sinh()).abs() < 1e-8);
    }

    #[test]
    fn endpoints_are_exact() {
        let k = CoefficientFn::table(&[(0.0, 1.0), (1.0, -2.0), (2.0, 0.5)]).unwrap();
        let p = DistortionProfile::new(&k, 2.0, &cfg()).unwrap();
        assert_eq!(p.at(0.0), Finite(0.0));
        assert_eq!(p.at(1.0), Finite(1.0));
        let tp = TauProfile::new(&k, 3.0, 2.0, &cfg()).unwrap();
        assert_eq!(tp.at(0.0), Finite(0.0));
        assert_eq!(tp.at(1.0), Finite(1.0));
    }

    #[test]
    fn zero_exactly_at_theta() {
        let k = constant(PI * PI, 1.0);
        assert!(matches!(sigma(&k, 0.5, 1.0, &cfg()), Err(Error::Borderline { .. })));
        let inf = cfg().with_policy(BorderlinePolicy::Infinite);
        assert_eq!(sigma(&k, 0.5, 1.0, &inf).unwrap(), Infinite);
        assert_eq!(sigma(&constant(PI * PI, 1.2), 0.5, 1.2, &cfg()).unwrap(), Infinite);
        assert!(sigma(&constant(PI * PI, 0.9), 0.5, 0.9, &cfg()).unwrap().is_finite());
    }

    #[test]
    fn tau_cases() {
        assert_eq!(tau(&constant(1.0, 1.0), 1.0, 0.5, 1.0, &cfg()).unwrap(), Infinite);
        assert_eq!(tau(&constant(-1.0, 1.0), 1.0, 0.5, 1.0, &cfg()).unwrap(), Finite(0.5));
        for n in [1.0, 2.0, 7.5] {
            let v = tau(&constant(0.0, 2.0), n, 0.3, 2.0, &cfg()).unwrap().to_f64();
            assert!((v - 0.3).abs() < 1e-12);
        }
        let (kk, theta, t) = (1.3f64, 0.7, 0.25);
        let v = tau(&constant(kk, theta), 2.0, t, theta, &cfg()).unwrap().to_f64();
        let exact = t.sqrt() * ((kk.sqrt() * t * theta).sin() / (kk.sqrt() * theta).sin()).sqrt();
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn boundary_combination() {
        let k = constant(1.0, 1.0);
        let v = boundary_value_combination(&k, 1.0, 1.0, 1.0, 0.5, &cfg()).unwrap().to_f64();
        assert!((v - 2.0 * 0.5f64.sin() / 1.0f64.sin()).abs() < 1e-9);
        let one = boundary_value_combination(&k, 1.0, 1.0, 0.0, 0.0, &cfg()).unwrap();
        assert_eq!(one, Finite(1.0));
        let flat = boundary_value_combination(&constant(0.0, 2.0), 2.0, 3.0, 5.0, 0.25, &cfg()).unwrap();
        assert!((flat.to_f64() - (0.75 * 3.0 + 0.25 * 5.0)).abs() < 1e-12);
    }

    #[test]
    fn boundary_combination_solves_the_rescaled_equation() {
        let k = CoefficientFn::table(&[(0.0, 2.0), (0.6, -1.0), (1.2, 3.0)]).unwrap();
        let theta = 1.2;
        let pair = BoundaryPair::new(&k, theta, &cfg()).unwrap();
        let (a, b) = (0.7, 1.9);
        let v = |t: f64| pair.combine(a, b, t).to_f64();
        let h = 1e-3;
        for i in 1..20 {
            let t = i as f64 / 20.0;
            if (t * theta - 0.6).abs() < 2.0 * h * theta {
                continue;
            }
            let second = (v(t + h) - 2.0 * v(t) + v(t - h)) / (h * h);
            let residual = second + k.eval(t * theta) * theta * theta * v(t);
            assert!(residual.abs() < 1e-3, "t = {t}: {residual}");
        }
    }

    #[test]
    fn taylor_constant_is_one_sixth() {
        let tight = cfg().with_solver(SolverConfig::default().with_rtol(1e-13));
        let (k0, t) = (1.0, 0.5);
        let limit = (1.0 - t * t) * k0 / 6.0;
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| (taylor_residual(k0, t, h, &tight).unwrap() - limit).abs())
            .collect();
        assert!(errs[2] < 1e-3);
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5);
        assert_eq!(taylor_residual(0.0, 0.3, 0.1, &tight).unwrap().abs() < 1e-6, true);
    }

    #[test]
    fn lsc_sequence() {
        let step = CurvatureField::steps(&[0.0, 0.5, 1.0], &[0.0, 1.0]).unwrap();
        let seg = GeodesicSegment::new(0.0, 1.0);
        let lsc = LscConfig {
            n_max: 64,
            ..LscConfig::default()
        };
        let r = sigma_lsc_sequence(&step, 0.0, 1.0, &seg, 0.5, &lsc, &cfg()).unwrap();
        assert!(r.is_monotone(1e-12));
        assert_eq!(r.sequence.len(), 7);

        let pi2 = CurvatureField::constant(PI * PI).unwrap();
        let inf = cfg().with_policy(BorderlinePolicy::Infinite);
        let r = sigma_lsc_sequence(&pi2, 0.0, 1.0, &seg, 0.5, &lsc, &inf).unwrap();
        assert_eq!(r.value, Infinite);
        assert!(r.converged);
    }

    #[test]
    fn lsc_agrees_with_continuous_fields() {
        let pts: Vec<(f64, f64)> = (0..=64).map(|i| i as f64 / 64.0).map(|x| (x, (3.0 * x).sin())).collect();
        let field = CurvatureField::from_samples(&pts, false).unwrap();
        let seg = GeodesicSegment::new(0.1, 0.9);
        let direct = sigma(&field.restrict_along(&seg).unwrap(), 0.5, 0.8, &cfg()).unwrap().to_f64();
        let v = sigma_lsc(&field, 0.0, 1.0, &seg, 0.5, &LscConfig::default(), &cfg()).unwrap().to_f64();
        assert!((v - direct).abs() < 1e-6);
    }

    #[test]
    fn reversed_query_side() {
        let k = CoefficientFn::table(&[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        let q = DistortionQuery {
            kind: CoefficientKind::Sigma,
            t: 0.3,
            theta: 1.0,
            side: Side::Reversed,
        };
        let direct = sigma(&k.reversed(), 0.3, 1.0, &cfg()).unwrap();
        assert_eq!(q.evaluate(&k, &cfg()).unwrap(), direct);
    }

    fn table(vals: &[f64], l: f64) -> CoefficientFn {
        let n = vals.len() - 1;
        let pts: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| (l * i as f64 / n as f64, v)).collect();
        CoefficientFn::table(&pts).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn infinity_is_all_or_nothing(vals in prop::collection::vec(-2.0f64..12.0, 4), theta in 0.2f64..2.0) {
            let k = table(&vals, theta);
            let (Ok(p), Ok(r)) = (DistortionProfile::new(&k, theta, &cfg()), DistortionProfile::new(&k.reversed(), theta, &cfg())) else {
                return Ok(());
            };
            prop_assert_eq!(p.is_infinite(), r.is_infinite());
            let infs: Vec<bool> = (1..10).map(|i| p.at(i as f64 / 10.0).is_infinite()).collect();
            prop_assert!(infs.iter().all(|&b| b == infs[0]));
        }

        #[test]
        fn sigma_is_monotone_in_kappa(vals in prop::collection::vec(-4.0f64..4.0, 4), lift in prop::collection::vec(0.0f64..2.0, 4), t in 0.05f64..0.95) {
            let k = table(&vals, 1.0);
            let up: Vec<f64> = vals.iter().zip(&lift).map(|(a, b)| a + b).collect();
            let kp = table(&up, 1.0);
            if let (Ok(a), Ok(b)) = (sigma(&k, t, 1.0, &cfg()), sigma(&kp, t, 1.0, &cfg())) {
                prop_assert!(a <= b.max(Finite(b.to_f64() + 1e-9)));
            }
        }
    }
}
