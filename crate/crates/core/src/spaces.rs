//! Weighted intervals `([a, b], |·|, w·dx)`, the warped model spaces built
//! from `u'' + κu = 0`, and products of two intervals.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::curvature_field::{CurvatureField, GeodesicSegment};
use crate::error::{invalid, Error, Result};
use crate::sampled::SampledFunction;
use crate::sturm::{solve_ivp, SolverConfig, Trajectory};

/// Truncation used when a density ratio would divide by an endpoint zero of
/// the weight.
pub const ENDPOINT_EPS: f64 = 1e-6;
pub const DEFAULT_GRID: usize = 4096;

/// Density of the reference measure against length.
#[derive(Clone)]
pub enum Weight {
    Constant(f64),
    Table(SampledFunction),
    /// `max(u(x − origin), 0)^power` for a solved trajectory `u`.
    Solution { traj: Arc<Trajectory>, origin: f64, power: f64 },
    Product(Arc<Weight>, Arc<Weight>),
    Power(Arc<Weight>, f64),
    /// `(β/α)·w(x/α)`: the weight after scaling distances by `α` and mass by `β`.
    Rescaled { inner: Arc<Weight>, alpha: f64, beta: f64 },
    Function { label: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Constant(c) => write!(f, "Constant({c})"),
            Weight::Table(t) => write!(f, "Table({} nodes)", t.len()),
            Weight::Solution { origin, power, traj } => {
                write!(f, "Solution(origin {origin}, power {power}, {} steps)", traj.step_count())
            }
            Weight::Product(a, b) => write!(f, "Product({a:?}, {b:?})"),
            Weight::Power(a, p) => write!(f, "Power({a:?}, {p})"),
            Weight::Rescaled { inner, alpha, beta } => write!(f, "Rescaled({inner:?}, {alpha}, {beta})"),
            Weight::Function { label, .. } => write!(f, "Function({label})"),
        }
    }
}

impl Weight {
    pub fn function(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Weight::Function {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Table(t) => t.eval(x),
            Weight::Solution { traj, origin, power } => {
                if *power == 0.0 {
                    1.0
                } else {
                    traj.eval(x - origin).max(0.0).powf(*power)
                }
            }
            Weight::Product(a, b) => a.eval(x) * b.eval(x),
            Weight::Power(a, p) => {
                if *p == 0.0 {
                    1.0
                } else {
                    a.eval(x).max(0.0).powf(*p)
                }
            }
            Weight::Rescaled { inner, alpha, beta } => beta / alpha * inner.eval(x / alpha),
            Weight::Function { f, .. } => f(x),
        }
    }

    pub fn times(&self, other: &Weight) -> Weight {
        Weight::Product(Arc::new(self.clone()), Arc::new(other.clone()))
    }

    pub fn pow(&self, p: f64) -> Weight {
        Weight::Power(Arc::new(self.clone()), p)
    }
}

/// Claimed curvature-dimension bound `CD(k, N)` attached to a space.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub field: CurvatureField,
    pub dimension: f64,
}

/// How the model-space certificate scales the ODE coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum FieldScaling {
    /// Certify `CD((N − 1)·κ, N)`.
    #[default]
    DimensionScaled,
    /// Certify `CD(κ, N)`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct WeightedInterval {
    a: f64,
    b: f64,
    weight: Weight,
    grid: usize,
    certified: Option<Certificate>,
}

const GL_X: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss–Legendre with `panels` equal panels.
pub fn gauss_legendre(lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + h * (p as f64 + 0.5);
        for q in 0..5 {
            total += GL_W[q] * f(mid + 0.5 * h * GL_X[q]);
        }
    }
    total * 0.5 * h
}

/// Gauss–Legendre at two panel counts; the difference is the error estimate.
pub fn integrate(lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> Estimate {
    let fine = gauss_legendre(lo, hi, panels.max(2), &f);
    let coarse = gauss_legendre(lo, hi, (panels / 2).max(1), &f);
    Estimate {
        value: fine,
        error: (fine - coarse).abs(),
    }
}

impl WeightedInterval {
    pub fn new(a: f64, b: f64, weight: Weight, grid: usize) -> Result<Self> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(invalid(format!("interval needs a < b, got [{a}, {b}]")));
        }
        if grid < 16 {
            return Err(invalid("grid resolution must be at least 16"));
        }
        let space = Self {
            a,
            b,
            weight,
            grid,
            certified: None,
        };
        for i in 1..grid {
            let x = space.node(i);
            let w = space.weight.eval(x);
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::ZeroWeight { x });
            }
        }
        Ok(space)
    }

    pub fn lebesgue(a: f64, b: f64) -> Result<Self> {
        let space = Self::new(a, b, Weight::Constant(1.0), DEFAULT_GRID)?;
        Ok(space.with_certificate(CurvatureField::constant(0.0)?, 1.0))
    }

    pub fn with_certificate(mut self, field: CurvatureField, dimension: f64) -> Self {
        self.certified = Some(Certificate { field, dimension });
        self
    }

    pub fn without_certificate(mut self) -> Self {
        self.certified = None;
        self
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid.max(16);
        self
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.b
    }

    pub fn diameter(&self) -> f64 {
        self.b - self.a
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + (self.b - self.a) * i as f64 / self.grid as f64
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certified.as_ref()
    }

    pub fn w(&self, x: f64) -> f64 {
        self.weight.eval(x)
    }

    /// Weight with `x` pulled `ε` inside the interval, for density ratios.
    pub fn w_truncated(&self, x: f64) -> f64 {
        let eps = ENDPOINT_EPS.min(0.25 * (self.b - self.a));
        self.weight.eval(x.clamp(self.a + eps, self.b - eps))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn distance(&self, x: f64, y: f64) -> f64 {
        (x - y).abs()
    }

    pub fn geodesic(&self, x: f64, y: f64) -> GeodesicSegment {
        GeodesicSegment::new(x, y)
    }

    /// `m([lo, hi] ∩ [a, b])`.
    pub fn measure(&self, lo: f64, hi: f64) -> Estimate {
        let (lo, hi) = (lo.max(self.a), hi.min(self.b));
        if !(hi > lo) {
            return Estimate { value: 0.0, error: 0.0 };
        }
        let panels = ((self.grid as f64 * (hi - lo) / (self.b - self.a)).ceil() as usize).max(16);
        integrate(lo, hi, panels, |x| self.weight.eval(x))
    }

    pub fn mass(&self) -> Estimate {
        self.measure(self.a, self.b)
    }

    /// `v(r) = m(B̄_r(x0))`.
    pub fn volume(&self, x0: f64, r: f64) -> Estimate {
        if r <= 0.0 {
            return Estimate { value: 0.0, error: 0.0 };
        }
        self.measure(x0 - r, x0 + r)
    }

    /// Outer derivative of `v` at `r`: `w(x0 + r) + w(x0 − r)`, each term only
    /// while that end of the ball is still inside the interval.
    pub fn minkowski_content(&self, x0: f64, r: f64) -> f64 {
        let mut s = 0.0;
        if x0 + r < self.b && x0 + r >= self.a {
            s += self.weight.eval(x0 + r);
        }
        if x0 - r > self.a && x0 - r <= self.b {
            s += self.weight.eval(x0 - r);
        }
        s
    }

    /// Restriction to `[lo, hi]`; the certificate restricts with it.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= self.a && hi <= self.b && lo < hi) {
            return Err(Error::DomainMismatch(format!(
                "[{lo}, {hi}] is not a sub-interval of [{}, {}]",
                self.a, self.b
            )));
        }
        let mut out = Self::new(lo, hi, self.weight.clone(), self.grid)?;
        out.certified = self.certified.clone();
        Ok(out)
    }

    /// Distances scaled by `α`, mass by `β`; a certificate `CD(k, N)` becomes
    /// `CD(α⁻²k(·/α), N)`.
    pub fn rescaled(&self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(invalid("rescaling factors must be positive"));
        }
        let weight = Weight::Rescaled {
            inner: Arc::new(self.weight.clone()),
            alpha,
            beta,
        };
        let mut out = Self::new(alpha * self.a, alpha * self.b, weight, self.grid)?;
        out.certified = self.certified.as_ref().map(|c| Certificate {
            field: c.field.rescaled(alpha),
            dimension: c.dimension,
        });
        Ok(out)
    }
}

/// Initial data `u(a) = u0`, `u'(a) = v0` for the model-space solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialData {
    pub u0: f64,
    pub v0: f64,
}

/// `([a, b], |·|, u^{N−1} dx)` with `u'' + κ_ode u = 0`, `u(a) = u0`,
/// `u'(a) = v0`, certified for `CD((N − 1)κ_ode, N)` (or `CD(κ_ode, N)` under
/// [`FieldScaling::Literal`]).
pub fn model_space(
    kappa_ode: &CurvatureField,
    n: f64,
    a: f64,
    b: f64,
    init: InitialData,
    scaling: FieldScaling,
    cfg: &SolverConfig,
) -> Result<WeightedInterval> {
    if !(n >= 1.0) {
        return Err(invalid(format!("dimension must be >= 1, got {n}")));
    }
    if !(a < b) {
        return Err(invalid(format!("interval needs a < b, got [{a}, {b}]")));
    }
    let coef = kappa_ode.restrict_along(&GeodesicSegment::new(a, b))?;
    let traj = solve_ivp(&coef, b - a, init.u0, init.v0, cfg)?;
    let scale = traj.values().iter().fold(0.0f64, |m, u| m.max(u.abs())).max(1e-300);
    for (&t, &u) in traj.grid().iter().zip(traj.values()) {
        if u < -1e-9 * scale {
            return Err(Error::NegativeSolution { x: a + t, u });
        }
    }
    for i in 0..=DEFAULT_GRID {
        let t = (b - a) * i as f64 / DEFAULT_GRID as f64;
        let u = traj.eval(t);
        if u < -1e-9 * scale {
            return Err(Error::NegativeSolution { x: a + t, u });
        }
    }
    let weight = if n == 1.0 {
        Weight::Constant(1.0)
    } else {
        Weight::Solution {
            traj: Arc::new(traj),
            origin: a,
            power: n - 1.0,
        }
    };
    let field = match scaling {
        FieldScaling::DimensionScaled => kappa_ode.scaled(n - 1.0),
        FieldScaling::Literal => kappa_ode.clone(),
    };
    let grid = DEFAULT_GRID;
    // the weight may vanish at an endpoint (u(a) = 0), which `new` allows
    let space = WeightedInterval::new(a, b, weight, grid)?;
    Ok(space.with_certificate(field, n))
}

/// `A_t = {(1 − t)x + t y : x ∈ A0, y ∈ A1}`.
pub fn midpoint_set(a0: (f64, f64), a1: (f64, f64), t: f64) -> (f64, f64) {
    ((1.0 - t) * a0.0 + t * a1.0, (1.0 - t) * a0.1 + t * a1.1)
}

/// Product of two weighted intervals with the Euclidean product distance.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    pub first: WeightedInterval,
    pub second: WeightedInterval,
}

pub fn product(first: WeightedInterval, second: WeightedInterval) -> ProductSpace {
    ProductSpace { first, second }
}

impl ProductSpace {
    pub fn distance(&self, p: (f64, f64), q: (f64, f64)) -> f64 {
        (p.0 - q.0).hypot(p.1 - q.1)
    }

    pub fn density(&self, p: (f64, f64)) -> f64 {
        self.first.w(p.0) * self.second.w(p.1)
    }

    pub fn mass(&self) -> Estimate {
        let (m1, m2) = (self.first.mass(), self.second.mass());
        Estimate {
            value: m1.value * m2.value,
            error: m1.error * m2.value + m2.error * m1.value,
        }
    }

    /// Both factors certified: `(k1, N1)`, `(k2, N2)`.
    pub fn certificates(&self) -> Option<(&Certificate, &Certificate)> {
        Some((self.first.certificate()?, self.second.certificate()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sin_space(n: f64, a: f64, b: f64) -> WeightedInterval {
        model_space(
            &CurvatureField::constant(1.0).unwrap(),
            n,
            a,
            b,
            InitialData { u0: a.sin(), v0: a.cos() },
            FieldScaling::DimensionScaled,
            &SolverConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn lebesgue_volumes() {
        let s = WeightedInterval::lebesgue(0.0, 1.0).unwrap();
        assert!((s.volume(0.5, 0.25).value - 0.5).abs() < 1e-14);
        assert_eq!(s.volume(0.5, 0.0).value, 0.0);
        assert!((s.volume(0.9, 0.5).value - 0.6).abs() < 1e-14);
        assert_eq!(s.minkowski_content(0.5, 0.1), 2.0);
        assert_eq!(s.minkowski_content(0.5, 0.7), 0.0);
    }

    #[test]
    fn sine_model_space() {
        let s = sin_space(3.0, 0.0, PI);
        assert!((s.volume(0.0, PI).value - PI / 2.0).abs() < 1e-10);
        assert!((s.w(1.0) - 1.0f64.sin().powi(2)).abs() < 1e-9);
        assert!((s.minkowski_content(0.0, 0.7) - 0.7f64.sin().powi(2)).abs() < 1e-9);
        let c = s.certificate().unwrap();
        assert_eq!(c.field.as_constant(), Some(2.0));
        assert_eq!(c.dimension, 3.0);
    }

    #[test]
    fn sharp_model_space() {
        let n = 4.0;
        let k = CurvatureField::radial_power(0.25, -2.0, 0.0).unwrap();
        let eps = 0.1f64;
        let s = model_space(
            &k,
            n,
            eps,
            10.0,
            InitialData {
                u0: eps.sqrt(),
                v0: 0.5 / eps.sqrt(),
            },
            FieldScaling::DimensionScaled,
            &SolverConfig::default(),
        )
        .unwrap();
        for x in [0.2, 1.0, 5.0, 9.5] {
            assert!((s.w(x) - x.powf((n - 1.0) / 2.0)).abs() < 1e-7 * x.powf(1.5));
        }
        let f = &s.certificate().unwrap().field;
        assert!((f.eval(2.0).unwrap() - (n - 1.0) / 16.0).abs() < 1e-14);
    }

    #[test]
    fn negative_solution_is_rejected() {
        let r = model_space(
            &CurvatureField::constant(1.0).unwrap(),
            2.0,
            0.0,
            4.0,
            InitialData { u0: 0.0, v0: 1.0 },
            FieldScaling::DimensionScaled,
            &SolverConfig::default(),
        );
        assert!(matches!(r, Err(Error::NegativeSolution { .. })));
    }

    #[test]
    fn minkowski_content_integrates_to_volume() {
        let s = sin_space(3.0, 0.1, PI - 0.1);
        let x0 = 1.0;
        for r in [0.3, 0.8, 1.5, 2.5] {
            let v = s.volume(x0, r).value;
            // sphere points leave the space at r = x0 − a and r = b − x0
            let mut cuts = vec![0.0, (x0 - s.start()).min(r), (s.end() - x0).min(r), r];
            cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
            let back: f64 = cuts
                .windows(2)
                .map(|c| gauss_legendre(c[0], c[1], 512, |q| s.minkowski_content(x0, q)))
                .sum();
            assert!((v - back).abs() < 1e-6, "r = {r}: {v} vs {back}");
            let d = 1e-6;
            let fd = (s.volume(x0, r + d).value - v) / d;
            assert!((fd - s.minkowski_content(x0, r)).abs() < 1e-4);
        }
    }

    #[test]
    fn volume_is_monotone() {
        let s = sin_space(5.0, 0.1, PI - 0.1);
        let mut last = 0.0;
        for i in 0..=100 {
            let v = s.volume(0.5, 0.03 * i as f64).value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn midpoints() {
        let (lo, hi) = midpoint_set((0.0, 0.1), (0.9, 1.0), 0.5);
        assert!((lo - 0.45).abs() < 1e-15 && (hi - 0.55).abs() < 1e-15);
        assert_eq!(midpoint_set((0.2, 0.3), (0.7, 0.9), 0.0), (0.2, 0.3));
        assert_eq!(midpoint_set((0.2, 0.3), (0.2, 0.3), 0.7), (0.2, 0.3));
    }

    #[test]
    fn products() {
        let p = product(WeightedInterval::lebesgue(0.0, 1.0).unwrap(), WeightedInterval::lebesgue(0.0, 2.0).unwrap());
        assert!((p.mass().value - 2.0).abs() < 1e-10);
        assert_eq!(p.distance((0.0, 0.0), (3.0, 4.0)), 5.0);
        assert_eq!(p.density((0.5, 0.5)), 1.0);
    }

    #[test]
    fn rescaling_and_restriction_bookkeeping() {
        let s = sin_space(3.0, 0.1, PI - 0.1);
        let r = s.rescaled(2.0, 3.0).unwrap();
        assert!((r.mass().value - 3.0 * s.mass().value).abs() < 1e-8);
        assert_eq!(r.certificate().unwrap().field.eval(1.0).unwrap(), 0.5);
        let sub = s.restricted(0.5, 2.0).unwrap();
        assert_eq!(sub.certificate().unwrap().field.as_constant(), Some(2.0));
        assert!(s.restricted(0.0, 1.0).is_err());
    }
}
