//! Curvature lower bounds `k` on a one-dimensional space (a line coordinate),
//! their restriction along geodesics and their Lipschitz approximations
//! `κ_n(x) = inf_y k(y) + n·|x − y|`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sturm::{CoefficientFn, PowerDirection};

/// Default exclusion radius around the pole of a singular radial field.
pub const DEFAULT_EXCLUSION: f64 = 1e-6;
/// Default number of grid intervals for infimal convolutions.
pub const DEFAULT_GRID: usize = 4096;

#[derive(Debug, Clone)]
enum Kind {
    Constant(f64),
    /// `a·|x − pole|^q`
    RadialPower { a: f64, q: f64, pole: f64, exclusion: f64 },
    /// `table(|x − pole|)`
    RadialTable { pole: f64, table: CoefficientFn },
    /// Samples over the coordinate itself; `nodes[0]` is the left end.
    Grid { origin: f64, table: CoefficientFn },
    Min(Arc<Kind>, Arc<Kind>),
    /// `value_scale·inner(coord_scale·x) + value_shift`
    Affine {
        inner: Arc<Kind>,
        coord_scale: f64,
        value_scale: f64,
        value_shift: f64,
    },
}

/// A curvature bound on a subset of the real line.
#[derive(Clone)]
pub struct CurvatureField {
    kind: Arc<Kind>,
    lsc: bool,
}

impl fmt::Debug for CurvatureField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvatureField")
            .field("kind", &self.kind)
            .field("lsc", &self.lsc)
            .finish()
    }
}

/// Affine geodesic between two points of the line; unit speed means the
/// parameter is arclength from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicSegment {
    pub start: f64,
    pub end: f64,
}

impl GeodesicSegment {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).abs()
    }

    fn direction(&self) -> f64 {
        if self.end >= self.start {
            1.0
        } else {
            -1.0
        }
    }

    /// Point at arclength `s` from the start.
    pub fn point(&self, s: f64) -> f64 {
        self.start + self.direction() * s
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.end, self.start)
    }
}

fn radial_eval(a: f64, q: f64, r: f64) -> f64 {
    if q == 0.0 {
        a
    } else {
        a * r.powf(q)
    }
}

impl Kind {
    fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Kind::Constant(k) => Ok(*k),
            Kind::RadialPower { a, q, pole, exclusion } => {
                let r = (x - pole).abs();
                if *q < 0.0 && r < *exclusion {
                    return Err(Error::PoleOnSegment {
                        pole: *pole,
                        start: x,
                        end: x,
                    });
                }
                Ok(radial_eval(*a, *q, r))
            }
            Kind::RadialTable { pole, table } => Ok(table.eval((x - pole).abs())),
            Kind::Grid { origin, table } => Ok(table.eval(x - origin)),
            Kind::Min(a, b) => Ok(a.eval(x)?.min(b.eval(x)?)),
            Kind::Affine {
                inner,
                coord_scale,
                value_scale,
                value_shift,
            } => Ok(value_scale * inner.eval(coord_scale * x)? + value_shift),
        }
    }

    fn restrict(&self, seg: &GeodesicSegment, lsc: bool) -> Result<CoefficientFn> {
        let theta = seg.length();
        match self {
            Kind::Constant(k) => CoefficientFn::constant(*k, theta),
            Kind::RadialPower { a, q, pole, exclusion } => {
                let (lo, hi) = (seg.start.min(seg.end), seg.start.max(seg.end));
                let inside = *pole >= lo && *pole <= hi;
                let nearest = if inside { 0.0 } else { (pole - lo).abs().min((pole - hi).abs()) };
                if *q < 0.0 && nearest < *exclusion {
                    return Err(Error::PoleOnSegment {
                        pole: *pole,
                        start: seg.start,
                        end: seg.end,
                    });
                }
                if *q == 0.0 {
                    return CoefficientFn::constant(*a, theta);
                }
                let r0 = (seg.start - pole).abs();
                if !inside || r0 == 0.0 || r0 >= theta {
                    let away = r0 == 0.0 || (seg.end - pole).abs() > r0;
                    return if away {
                        CoefficientFn::power_law(*a, r0, *q, PowerDirection::Increasing, theta)
                    } else {
                        CoefficientFn::power_law(*a, r0, *q, PowerDirection::Decreasing, theta)
                    };
                }
                // pole strictly inside, q > 0: |s − s_p|^q, kink at s_p
                let sp = r0;
                let towards = CoefficientFn::power_law(*a, sp, *q, PowerDirection::Decreasing, sp)?;
                let n = 2048;
                let mut pts: Vec<(f64, f64)> = (0..=n).map(|i| sp * i as f64 / n as f64).map(|s| (s, towards.eval(s))).collect();
                let rest = theta - sp;
                pts.extend((1..=n).map(|i| sp + rest * i as f64 / n as f64).map(|s| (s, radial_eval(*a, *q, s - sp))));
                CoefficientFn::table(&pts)
            }
            Kind::RadialTable { pole, table } => {
                let r_of = |s: f64| (seg.point(s) - pole).abs();
                let mut ss = vec![0.0, theta];
                let (lo, hi) = (seg.start.min(seg.end), seg.start.max(seg.end));
                if *pole > lo && *pole < hi {
                    ss.push((pole - seg.start).abs());
                }
                for r in table.breakpoints().into_iter().chain([0.0, table.length()]) {
                    for x in [pole + r, pole - r] {
                        if x > lo && x < hi {
                            ss.push((x - seg.start).abs());
                        }
                    }
                }
                sampled(ss, theta, lsc, |s| table.eval(r_of(s)))
            }
            Kind::Grid { origin, table } => {
                let (lo, hi) = (seg.start.min(seg.end), seg.start.max(seg.end));
                let mut ss = vec![0.0, theta];
                for x in table.breakpoints().into_iter().chain([0.0, table.length()]).map(|t| t + origin) {
                    if x > lo && x < hi {
                        ss.push((x - seg.start).abs());
                    }
                }
                sampled(ss, theta, lsc, |s| table.eval(seg.point(s) - origin))
            }
            Kind::Min(a, b) => Ok(a.restrict(seg, lsc)?.pointwise_min(&b.restrict(seg, lsc)?)),
            Kind::Affine {
                inner,
                coord_scale,
                value_scale,
                value_shift,
            } => {
                let mapped = GeodesicSegment::new(coord_scale * seg.start, coord_scale * seg.end);
                let base = inner.restrict(&mapped, lsc)?;
                Ok(base
                    .remapped(coord_scale.abs(), 0.0, theta)?
                    .scaled(*value_scale)
                    .shifted(*value_shift))
            }
        }
    }

    fn is_constant(&self) -> Option<f64> {
        match self {
            Kind::Constant(k) => Some(*k),
            Kind::RadialPower { a, q, .. } if *q == 0.0 => Some(*a),
            Kind::Min(a, b) => Some(a.is_constant()?.min(b.is_constant()?)),
            Kind::Affine {
                inner,
                value_scale,
                value_shift,
                ..
            } => inner.is_constant().map(|k| value_scale * k + value_shift),
            _ => None,
        }
    }
}

/// Table through the sampled abscissae. With `lsc`, node values are kept raw
/// and the table interpolates from below.
fn sampled(mut ss: Vec<f64>, theta: f64, lsc: bool, f: impl Fn(f64) -> f64) -> Result<CoefficientFn> {
    if theta == 0.0 {
        return CoefficientFn::constant(f(0.0), 0.0);
    }
    ss.retain(|s| (0.0..=theta).contains(s));
    ss.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ss.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * theta);
    if ss[ss.len() - 1] != theta {
        *ss.last_mut().unwrap() = theta;
    }
    let pts: Vec<(f64, f64)> = ss.iter().map(|&s| (s, f(s))).collect();
    if lsc {
        CoefficientFn::lower_steps(&pts)
    } else {
        CoefficientFn::table(&pts)
    }
}

impl CurvatureField {
    fn from_kind(kind: Kind, lsc: bool) -> Self {
        Self {
            kind: Arc::new(kind),
            lsc,
        }
    }

    pub fn constant(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(invalid("constant field must be finite"));
        }
        Ok(Self::from_kind(Kind::Constant(k), false))
    }

    /// `a·|x − pole|^q`, with the default exclusion radius.
    pub fn radial_power(a: f64, q: f64, pole: f64) -> Result<Self> {
        Self::radial_power_with_exclusion(a, q, pole, DEFAULT_EXCLUSION)
    }

    pub fn radial_power_with_exclusion(a: f64, q: f64, pole: f64, exclusion: f64) -> Result<Self> {
        if !(a.is_finite() && q.is_finite() && pole.is_finite() && exclusion >= 0.0) {
            return Err(invalid("radial power field parameters must be finite"));
        }
        Ok(Self::from_kind(Kind::RadialPower { a, q, pole, exclusion }, false))
    }

    /// Field `r ↦ table(r)` of the distance to `pole`.
    pub fn radial_table(pole: f64, table: CoefficientFn, lsc: bool) -> Self {
        Self::from_kind(Kind::RadialTable { pole, table }, lsc)
    }

    /// Field sampled over the coordinate: `x ↦ table(x − origin)` on
    /// `[origin, origin + table.length()]`.
    pub fn grid(origin: f64, table: CoefficientFn, lsc: bool) -> Self {
        Self::from_kind(Kind::Grid { origin, table }, lsc)
    }

    /// Grid field from `(x_i, k_i)` samples (any left end).
    pub fn from_samples(points: &[(f64, f64)], lsc: bool) -> Result<Self> {
        let Some(&(x0, _)) = points.first() else {
            return Err(Error::EmptyGrid);
        };
        let shifted: Vec<(f64, f64)> = points.iter().map(|&(x, k)| (x - x0, k)).collect();
        let table = if lsc {
            CoefficientFn::lower_steps(&shifted)?
        } else {
            CoefficientFn::table(&shifted)?
        };
        Ok(Self::grid(x0, table, lsc))
    }

    /// Piecewise-constant lsc field with the given cell edges.
    pub fn steps(edges: &[f64], values: &[f64]) -> Result<Self> {
        let Some(&x0) = edges.first() else {
            return Err(Error::EmptyGrid);
        };
        let shifted: Vec<f64> = edges.iter().map(|e| e - x0).collect();
        Ok(Self::grid(x0, CoefficientFn::steps(&shifted, values)?, true))
    }

    pub fn min(&self, other: &CurvatureField) -> Self {
        Self::from_kind(Kind::Min(self.kind.clone(), other.kind.clone()), self.lsc || other.lsc)
    }

    fn affine(&self, coord_scale: f64, value_scale: f64, value_shift: f64) -> Self {
        Self::from_kind(
            Kind::Affine {
                inner: self.kind.clone(),
                coord_scale,
                value_scale,
                value_shift,
            },
            self.lsc,
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.affine(1.0, factor, 0.0)
    }

    pub fn shifted(&self, delta: f64) -> Self {
        self.affine(1.0, 1.0, delta)
    }

    /// The field of the space with distances scaled by `alpha`: `α⁻²·k(x/α)`.
    pub fn rescaled(&self, alpha: f64) -> Self {
        self.affine(1.0 / alpha, 1.0 / (alpha * alpha), 0.0)
    }

    pub fn is_lsc(&self) -> bool {
        self.lsc
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.kind.is_constant()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.kind.eval(x)
    }

    /// `k_γ = k ∘ γ̄` on `[0, θ]` for the unit-speed parametrization.
    pub fn restrict_along(&self, seg: &GeodesicSegment) -> Result<CoefficientFn> {
        let coef = self.kind.restrict(seg, self.lsc)?;
        if seg.length() > 0.0 {
            coef.ensure_finite()?;
        }
        Ok(coef)
    }

    /// `r ↦ min { k(y) : y ∈ [a, b], |y − x| = r }` on `[0, r_max]`, sampled
    /// on a uniform grid plus the images of the field's own nodes.
    pub fn radial_envelope(&self, x: f64, a: f64, b: f64, r_max: f64) -> Result<CoefficientFn> {
        if !(a <= x && x <= b) {
            return Err(invalid(format!("center {x} outside [{a}, {b}]")));
        }
        let reach = (x - a).max(b - x);
        if r_max > reach * (1.0 + 1e-12) {
            return Err(Error::EmptySphere { center: x, r: r_max });
        }
        if let Some(k) = self.as_constant() {
            return CoefficientFn::constant(k, r_max);
        }
        let sphere_min = |r: f64| -> Result<f64> {
            let mut best = f64::INFINITY;
            for y in [x - r, x + r] {
                if y >= a - 1e-12 * reach && y <= b + 1e-12 * reach {
                    best = best.min(self.eval(y.clamp(a, b))?);
                }
            }
            if best.is_infinite() {
                Err(Error::EmptySphere { center: x, r })
            } else {
                Ok(best)
            }
        };
        let n = DEFAULT_GRID;
        let mut rs: Vec<f64> = (0..=n).map(|i| r_max * i as f64 / n as f64).collect();
        // where one side of the sphere leaves the space the envelope may jump
        rs.extend([x - a, b - x].into_iter().filter(|&r| r > 0.0 && r < r_max));
        rs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        rs.dedup();
        let mut pts = Vec::with_capacity(rs.len());
        for r in rs {
            pts.push((r, sphere_min(r)?));
        }
        if self.lsc {
            CoefficientFn::lower_steps(&pts)
        } else {
            CoefficientFn::table(&pts)
        }
    }

    /// `κ_n(x)` over a uniform grid of `points` intervals on `[a, b]`.
    pub fn lipschitz_approx(&self, n: f64, x: f64, a: f64, b: f64, points: usize) -> Result<f64> {
        LipschitzApprox::new(self, n, a, b, points)?.eval(x)
    }
}

/// Infimal convolution `κ_n = inf_y k(y) + n·|· − y|` over a uniform grid,
/// computed by one forward and one backward sweep.
#[derive(Debug, Clone)]
pub struct LipschitzApprox {
    field: CurvatureField,
    a: f64,
    h: f64,
    n: f64,
    values: Vec<f64>,
}

impl LipschitzApprox {
    pub fn new(field: &CurvatureField, n: f64, a: f64, b: f64, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::EmptyGrid);
        }
        if !(b > a) || !(n >= 0.0) {
            return Err(invalid("lipschitz approximation needs a < b and n >= 0"));
        }
        let h = (b - a) / points as f64;
        let mut values = Vec::with_capacity(points + 1);
        for i in 0..=points {
            values.push(field.eval(a + h * i as f64)?);
        }
        let step = n * h;
        for i in 1..values.len() {
            values[i] = values[i].min(values[i - 1] + step);
        }
        for i in (0..values.len() - 1).rev() {
            values[i] = values[i].min(values[i + 1] + step);
        }
        Ok(Self {
            field: field.clone(),
            a,
            h,
            n,
            values,
        })
    }

    pub fn grid_value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.a + self.h * i as f64, v))
    }

    /// Infimum over the grid together with `x` itself, so `κ_n(x) ≤ k(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let own = self.field.eval(x)?;
        let m = self.values.len() - 1;
        let pos = ((x - self.a) / self.h).floor();
        if pos < 0.0 {
            return Ok(own.min(self.values[0] + self.n * (self.a - x)));
        }
        let i = (pos as usize).min(m);
        let xi = self.a + self.h * i as f64;
        let mut best = self.values[i] + self.n * (x - xi).abs();
        if i < m {
            best = best.min(self.values[i + 1] + self.n * (xi + self.h - x).abs());
        }
        Ok(best.min(own))
    }

    /// The approximation as a (continuous) grid field, linear between nodes.
    /// Linear interpolation lies below the exact infimum between nodes.
    pub fn to_field(&self) -> Result<CurvatureField> {
        let pts: Vec<(f64, f64)> = self.nodes().collect();
        CurvatureField::from_samples(&pts, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step_field() -> CurvatureField {
        CurvatureField::steps(&[0.0, 0.5, 1.0], &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn lipschitz_of_constant_is_constant() {
        let k = CurvatureField::constant(-2.5).unwrap();
        for n in [1.0, 8.0, 1024.0] {
            assert_eq!(k.lipschitz_approx(n, 0.3, 0.0, 1.0, DEFAULT_GRID).unwrap(), -2.5);
        }
    }

    #[test]
    fn lipschitz_of_step_field() {
        let k = step_field();
        let v = k.lipschitz_approx(2.0, 0.75, 0.0, 1.0, DEFAULT_GRID).unwrap();
        // two branches: 0 + 2·0.25 from the left cell, 1 from the right one
        let oracle = f64::min(0.0 + 2.0 * (0.75 - 0.5), 1.0);
        assert!((v - oracle).abs() < 1e-12);
        let mut last = f64::NEG_INFINITY;
        for p in 0..14 {
            let v = k.lipschitz_approx((1u32 << p) as f64, 0.75, 0.0, 1.0, DEFAULT_GRID).unwrap();
            assert!(v >= last && v <= 1.0);
            last = v;
        }
        assert_eq!(last, 1.0);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let k = step_field();
        assert_eq!(k.lipschitz_approx(1.0, 0.5, 0.0, 1.0, 0), Err(Error::EmptyGrid));
    }

    #[test]
    fn restriction_of_sharp_field() {
        let n = 4.0;
        let k = CurvatureField::radial_power(0.25 * (n - 1.0), -2.0, 0.0).unwrap();
        let c = k.restrict_along(&GeodesicSegment::new(1.0, 2.0)).unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let expect = (n - 1.0) / (4.0 * (1.0 + t) * (1.0 + t));
            assert!((c.eval(t) - expect).abs() < 1e-14);
        }
        let back = k.restrict_along(&GeodesicSegment::new(2.0, 1.0)).unwrap();
        assert!((back.eval(1.0) - (n - 1.0) / 4.0).abs() < 1e-14);
        assert!(matches!(
            k.restrict_along(&GeodesicSegment::new(-1.0, 1.0)),
            Err(Error::PoleOnSegment { .. })
        ));
        assert!(matches!(
            k.restrict_along(&GeodesicSegment::new(0.0, 1.0)),
            Err(Error::PoleOnSegment { .. })
        ));
    }

    #[test]
    fn positive_power_with_pole_at_either_end() {
        let k = CurvatureField::radial_power(-0.5, 1.0, 0.5).unwrap();
        for seg in [GeodesicSegment::new(0.0, 0.5), GeodesicSegment::new(0.5, 0.0), GeodesicSegment::new(0.5, 1.5)] {
            let c = k.restrict_along(&seg).unwrap();
            for i in 0..=8 {
                let t = i as f64 / 8.0 * seg.length();
                assert!((c.eval(t) + 0.5 * (seg.point(t) - 0.5).abs()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn restriction_of_constant_and_grid() {
        let c = CurvatureField::constant(3.0).unwrap().restrict_along(&GeodesicSegment::new(0.2, 0.9)).unwrap();
        assert_eq!(c.as_constant(), Some(3.0));
        let g = CurvatureField::from_samples(&[(1.0, 0.0), (2.0, 1.0), (3.0, 0.0)], false).unwrap();
        let r = g.restrict_along(&GeodesicSegment::new(2.5, 1.5)).unwrap();
        assert!((r.length() - 1.0).abs() < 1e-15);
        assert!((r.eval(0.0) - 0.5).abs() < 1e-14);
        assert!((r.eval(0.5) - 1.0).abs() < 1e-14);
        assert!((r.eval(0.75) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn radial_envelope_examples() {
        let k = CurvatureField::from_samples(&[(0.0, 0.0), (2.0, 2.0)], false).unwrap();
        let env = k.radial_envelope(1.0, 0.0, 2.0, 1.0).unwrap();
        for i in 0..=20 {
            let r = i as f64 / 20.0;
            // min over the two sphere points {1 − r, 1 + r}
            assert!((env.eval(r) - f64::min(1.0 - r, 1.0 + r)).abs() < 1e-12);
        }
        let at_end = k.radial_envelope(0.0, 0.0, 2.0, 2.0).unwrap();
        assert!((at_end.eval(1.3) - 1.3).abs() < 1e-12);
        assert!(matches!(k.radial_envelope(1.0, 0.0, 2.0, 1.5), Err(Error::EmptySphere { .. })));
        let c = CurvatureField::constant(2.0).unwrap().radial_envelope(0.5, 0.0, 1.0, 0.5).unwrap();
        assert_eq!(c.as_constant(), Some(2.0));
    }

    #[test]
    fn rescaling_transforms_the_field() {
        let k = CurvatureField::from_samples(&[(0.0, 1.0), (1.0, 3.0)], false).unwrap();
        let r = k.rescaled(2.0);
        assert!((r.eval(1.0).unwrap() - 0.25 * 2.0).abs() < 1e-14);
        let seg = r.restrict_along(&GeodesicSegment::new(0.0, 2.0)).unwrap();
        assert!((seg.eval(1.0) - 0.5).abs() < 1e-14);
        assert!((seg.eval(2.0) - 0.75).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn lipschitz_approximation_is_monotone_and_lipschitz(
            vals in prop::collection::vec(-3.0f64..3.0, 2..12),
            x in 0.0f64..1.0,
            y in 0.0f64..1.0,
        ) {
            let m = vals.len();
            let pts: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| (i as f64 / (m - 1) as f64, v)).collect();
            let k = CurvatureField::from_samples(&pts, true).unwrap();
            let xg = (x * 512.0).round() / 512.0;
            let kx = k.eval(xg).unwrap();
            let mut last = f64::NEG_INFINITY;
            for p in 0..10 {
                let n = (1u32 << p) as f64;
                let ap = LipschitzApprox::new(&k, n, 0.0, 1.0, 512).unwrap();
                let vx = ap.eval(x).unwrap();
                let vy = ap.eval(y).unwrap();
                prop_assert!(vx >= last - 1e-12);
                prop_assert!(ap.eval(xg).unwrap() <= kx + 1e-12);
                let (gx, gy) = (ap.eval(xg).unwrap(), ap.eval((y * 512.0).round() / 512.0).unwrap());
                prop_assert!((gx - gy).abs() <= n * (xg - (y * 512.0).round() / 512.0).abs() + 1e-12);
                prop_assert!(vx <= k.eval(x).unwrap() && vy <= k.eval(y).unwrap());
                last = vx;
            }
        }

        #[test]
        fn reverse_preserves_sup_norm(vals in prop::collection::vec(-5.0f64..5.0, 2..10)) {
            let m = vals.len();
            let pts: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| (i as f64 / (m - 1) as f64, v)).collect();
            let c = CoefficientFn::table(&pts).unwrap();
            let r = c.reversed();
            let sup = |f: &CoefficientFn| (0..=400).map(|i| f.eval(i as f64 / 400.0).abs()).fold(0.0, f64::max);
            prop_assert!((sup(&c) - sup(&r)).abs() < 1e-12);
        }
    }
}
