use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// Number of uniform probe points used when a coefficient is scanned for
/// bounds or finiteness, on top of its breakpoints.
const PROBES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerDirection {
    /// `a·(t + A)^p`
    Increasing,
    /// `a·(A − t)^p`
    Decreasing,
}

#[derive(Debug, Clone)]
enum Profile {
    Constant(f64),
    Power {
        scale: f64,
        offset: f64,
        exponent: f64,
        direction: PowerDirection,
    },
    Linear {
        ts: Arc<[f64]>,
        values: Arc<[f64]>,
    },
    /// Between abscissae the value is the smaller neighbour; at an abscissa it
    /// is the smaller of the two adjacent cells. Lower semi-continuous.
    LowerSteps {
        ts: Arc<[f64]>,
        values: Arc<[f64]>,
    },
    /// Piecewise constant: `values[i]` on `(edges[i], edges[i+1])`, the smaller
    /// adjacent value at an interior edge.
    Cells {
        edges: Arc<[f64]>,
        values: Arc<[f64]>,
    },
    Affine {
        inner: Arc<Profile>,
        arg_scale: f64,
        arg_offset: f64,
        value_scale: f64,
        value_shift: f64,
    },
    Min(Arc<Profile>, Arc<Profile>),
}

impl Profile {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Constant(k) => *k,
            Profile::Power {
                scale,
                offset,
                exponent,
                direction,
            } => {
                let base = match direction {
                    PowerDirection::Increasing => offset + t,
                    PowerDirection::Decreasing => offset - t,
                };
                scale * base.powf(*exponent)
            }
            Profile::Linear { ts, values } => linear_eval(ts, values, t),
            Profile::LowerSteps { ts, values } => lower_step_eval(ts, values, t),
            Profile::Cells { edges, values } => cell_eval(edges, values, t),
            Profile::Affine {
                inner,
                arg_scale,
                arg_offset,
                value_scale,
                value_shift,
            } => value_scale * inner.eval(arg_scale * t + arg_offset) + value_shift,
            Profile::Min(a, b) => a.eval(t).min(b.eval(t)),
        }
    }

    fn breakpoints(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        match self {
            Profile::Constant(_) | Profile::Power { .. } => {}
            Profile::Linear { ts, .. } | Profile::LowerSteps { ts, .. } | Profile::Cells { edges: ts, .. } => {
                out.extend(ts.iter().copied().filter(|&t| t > lo && t < hi));
            }
            Profile::Affine {
                inner,
                arg_scale,
                arg_offset,
                ..
            } => {
                if *arg_scale == 0.0 {
                    return;
                }
                let a = arg_scale * lo + arg_offset;
                let b = arg_scale * hi + arg_offset;
                let mut inner_pts = Vec::new();
                inner.breakpoints(a.min(b), a.max(b), &mut inner_pts);
                out.extend(inner_pts.into_iter().map(|s| (s - arg_offset) / arg_scale));
            }
            Profile::Min(a, b) => {
                a.breakpoints(lo, hi, out);
                b.breakpoints(lo, hi, out);
            }
        }
    }

    fn as_constant(&self) -> Option<f64> {
        match self {
            Profile::Constant(k) => Some(*k),
            Profile::Affine {
                inner,
                value_scale,
                value_shift,
                ..
            } => inner.as_constant().map(|k| value_scale * k + value_shift),
            Profile::Min(a, b) => match (a.as_constant(), b.as_constant()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                _ => None,
            },
            _ => None,
        }
    }
}

fn locate(ts: &[f64], t: f64) -> usize {
    // index i with ts[i] <= t < ts[i+1], clamped to a valid cell
    let i = ts.partition_point(|&x| x <= t);
    i.saturating_sub(1).min(ts.len().saturating_sub(2))
}

fn linear_eval(ts: &[f64], values: &[f64], t: f64) -> f64 {
    if ts.len() == 1 || t <= ts[0] {
        return values[0];
    }
    if t >= ts[ts.len() - 1] {
        return values[values.len() - 1];
    }
    let i = locate(ts, t);
    let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
    values[i] * (1.0 - w) + values[i + 1] * w
}

fn lower_step_eval(ts: &[f64], values: &[f64], t: f64) -> f64 {
    let n = ts.len();
    if n == 1 {
        return values[0];
    }
    if t <= ts[0] {
        return values[0].min(values[1]);
    }
    if t >= ts[n - 1] {
        return values[n - 2].min(values[n - 1]);
    }
    let i = locate(ts, t);
    let cell = values[i].min(values[i + 1]);
    if t == ts[i] && i > 0 {
        cell.min(values[i - 1])
    } else {
        cell
    }
}

fn cell_eval(edges: &[f64], values: &[f64], t: f64) -> f64 {
    let n = values.len();
    let i = edges.partition_point(|&x| x <= t);
    // edges[i-1] <= t < edges[i]
    if i == 0 {
        return values[0];
    }
    if i > n {
        return values[n - 1];
    }
    let cell = values[i - 1];
    if t == edges[i - 1] && i >= 2 {
        cell.min(values[i - 2])
    } else {
        cell
    }
}

/// A real coefficient `κ` on `[0, L]` for the equation `u'' + κ u = 0`.
///
/// Cheap to clone; combinators share the underlying tables.
#[derive(Clone)]
pub struct CoefficientFn {
    length: f64,
    profile: Arc<Profile>,
}

impl fmt::Debug for CoefficientFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientFn")
            .field("length", &self.length)
            .field("profile", &self.profile)
            .finish()
    }
}

fn check_length(length: f64) -> Result<()> {
    if !(length.is_finite() && length >= 0.0) {
        return Err(invalid(format!("domain length must be finite and >= 0, got {length}")));
    }
    Ok(())
}

fn check_table(points: &[(f64, f64)]) -> Result<(Arc<[f64]>, Arc<[f64]>)> {
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if points[0].0 != 0.0 {
        return Err(invalid(format!("table must start at t = 0, got {}", points[0].0)));
    }
    for w in points.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(invalid(format!(
                "table abscissae must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
    }
    if let Some(&(t, _)) = points.iter().find(|p| !p.1.is_finite()) {
        return Err(Error::NonFiniteCoefficient { t });
    }
    let ts: Arc<[f64]> = points.iter().map(|p| p.0).collect();
    let values: Arc<[f64]> = points.iter().map(|p| p.1).collect();
    Ok((ts, values))
}

impl CoefficientFn {
    fn from_profile(length: f64, profile: Profile) -> Self {
        Self {
            length,
            profile: Arc::new(profile),
        }
    }

    pub fn constant(value: f64, length: f64) -> Result<Self> {
        check_length(length)?;
        if !value.is_finite() {
            return Err(Error::NonFiniteCoefficient { t: 0.0 });
        }
        Ok(Self::from_profile(length, Profile::Constant(value)))
    }

    /// `scale·(t + offset)^exponent` or `scale·(offset − t)^exponent`.
    ///
    /// The base must stay positive on `[0, L]` (non-negative when the exponent
    /// is positive), so the singularity is kept outside the domain.
    pub fn power_law(
        scale: f64,
        offset: f64,
        exponent: f64,
        direction: PowerDirection,
        length: f64,
    ) -> Result<Self> {
        check_length(length)?;
        let min_base = match direction {
            PowerDirection::Increasing => offset,
            PowerDirection::Decreasing => offset - length,
        };
        let ok = if exponent > 0.0 { min_base >= 0.0 } else { min_base > 0.0 };
        if !ok || !scale.is_finite() || !exponent.is_finite() {
            return Err(invalid(format!(
                "power law base reaches {min_base} on [0, {length}] (exponent {exponent})"
            )));
        }
        Ok(Self::from_profile(
            length,
            Profile::Power {
                scale,
                offset,
                exponent,
                direction,
            },
        ))
    }

    /// Piecewise-linear table `(t_i, κ_i)` with `t_0 = 0`; the domain ends at the last abscissa.
    pub fn table(points: &[(f64, f64)]) -> Result<Self> {
        let (ts, values) = check_table(points)?;
        let length = ts[ts.len() - 1];
        Ok(Self::from_profile(length, Profile::Linear { ts, values }))
    }

    /// Step table with lower interpolation (see [`Profile::LowerSteps`]).
    pub fn lower_steps(points: &[(f64, f64)]) -> Result<Self> {
        let (ts, values) = check_table(points)?;
        let length = ts[ts.len() - 1];
        Ok(Self::from_profile(length, Profile::LowerSteps { ts, values }))
    }

    /// Piecewise-constant coefficient with `values.len() + 1` edges starting
    /// at 0; at interior edges it takes the smaller neighbour (lsc).
    pub fn steps(edges: &[f64], values: &[f64]) -> Result<Self> {
        if values.is_empty() || edges.len() != values.len() + 1 {
            return Err(invalid("step coefficient needs one more edge than values"));
        }
        let pts: Vec<(f64, f64)> = edges.iter().map(|&e| (e, 0.0)).collect();
        check_table(&pts)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoefficient { t: edges[i] });
        }
        Ok(Self::from_profile(
            edges[edges.len() - 1],
            Profile::Cells {
                edges: edges.into(),
                values: values.into(),
            },
        ))
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.profile.eval(t)
    }

    /// Interior points of `(0, L)` where the coefficient may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        self.profile.breakpoints(0.0, self.length, &mut pts);
        pts.retain(|&t| t > 0.0 && t < self.length);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * self.length.max(1.0));
        pts
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.profile.as_constant()
    }

    fn affine(&self, arg_scale: f64, arg_offset: f64, value_scale: f64, value_shift: f64, length: f64) -> Self {
        if let Some(k) = self.as_constant() {
            return Self::from_profile(length, Profile::Constant(value_scale * k + value_shift));
        }
        Self::from_profile(
            length,
            Profile::Affine {
                inner: self.profile.clone(),
                arg_scale,
                arg_offset,
                value_scale,
                value_shift,
            },
        )
    }

    /// `κ⁻(s) = κ(L − s)`.
    pub fn reversed(&self) -> Self {
        self.affine(-1.0, self.length, 1.0, 0.0, self.length)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.affine(1.0, 0.0, factor, 0.0, self.length)
    }

    pub fn shifted(&self, delta: f64) -> Self {
        self.affine(1.0, 0.0, 1.0, delta, self.length)
    }

    /// `s ↦ κ(θ s)·θ²` on `[0, L/θ]`: the coefficient seen by `v(θ s)`.
    pub fn reparametrized(&self, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(invalid(format!("reparametrization speed must be positive, got {theta}")));
        }
        Ok(self.affine(theta, 0.0, theta * theta, 0.0, self.length / theta))
    }

    /// Same values on a new domain `[0, length]`, i.e. `s ↦ κ(arg_scale·s + arg_offset)`.
    pub fn remapped(&self, arg_scale: f64, arg_offset: f64, length: f64) -> Result<Self> {
        check_length(length)?;
        Ok(self.affine(arg_scale, arg_offset, 1.0, 0.0, length))
    }

    /// Restriction (or extension, for closed forms) to `[0, length]`.
    pub fn with_length(&self, length: f64) -> Result<Self> {
        check_length(length)?;
        Ok(Self {
            length,
            profile: self.profile.clone(),
        })
    }

    pub fn pointwise_min(&self, other: &CoefficientFn) -> Self {
        let length = self.length.min(other.length);
        if let (Some(a), Some(b)) = (self.as_constant(), other.as_constant()) {
            return Self::from_profile(length, Profile::Constant(a.min(b)));
        }
        Self::from_profile(length, Profile::Min(self.profile.clone(), other.profile.clone()))
    }

    /// Breakpoints plus a uniform probe grid over `[lo, hi]`.
    pub fn probe_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = (0..=PROBES)
            .map(|i| lo + (hi - lo) * i as f64 / PROBES as f64)
            .collect();
        pts.extend(self.breakpoints().into_iter().filter(|&t| t >= lo && t <= hi));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts
    }

    pub fn max_on(&self, lo: f64, hi: f64) -> f64 {
        if let Some(k) = self.as_constant() {
            return k;
        }
        self.probe_points(lo, hi)
            .into_iter()
            .map(|t| self.eval(t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_on(&self, lo: f64, hi: f64) -> f64 {
        if let Some(k) = self.as_constant() {
            return k;
        }
        self.probe_points(lo, hi)
            .into_iter()
            .map(|t| self.eval(t))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if let Some(k) = self.as_constant() {
            return if k.is_finite() {
                Ok(())
            } else {
                Err(Error::NonFiniteCoefficient { t: 0.0 })
            };
        }
        for t in self.probe_points(0.0, self.length) {
            if !self.eval(t).is_finite() {
                return Err(Error::NonFiniteCoefficient { t });
            }
        }
        Ok(())
    }

    /// Uniform samples `(t_i, κ(t_i))`, `n + 1` points.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        let n = n.max(1);
        (0..=n)
            .map(|i| {
                let t = self.length * i as f64 / n as f64;
                (t, self.eval(t))
            })
            .collect()
    }
}
