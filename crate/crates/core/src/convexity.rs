//! κu-convexity of sampled nonnegative functions, in distributional, Green and
//! distortion-coefficient form, and (κ, N)-convexity through `u = e^{−f/N}`.
//!
//! The coefficient `κ` is a [`CoefficientFn`] in the coordinate `s − a`, where
//! `[a, b]` is the function's grid. Slacks are reported relative to `sup u`,
//! which makes every verdict invariant under `u ↦ c·u`.

use rayon::prelude::*;
use serde::Serialize;

use crate::distortion::{BoundaryPair, DistortionConfig};
use crate::error::{invalid, Error, Result};
pub use crate::sampled::SampledFunction;
use crate::sturm::CoefficientFn;

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Form {
    Distributional,
    Green,
    DistortionCoefficients,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Scope {
    /// Sub-geodesics of length at most `L`.
    ShortGeodesics(f64),
    AllGeodesics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Witness {
    /// Hat test function of half-width `h` centred at `x`.
    Kernel { x: f64, h: f64 },
    /// Interior point `t` of the sub-geodesic `[start, end]`.
    Segment { start: f64, end: f64, t: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityVerdict {
    pub form: Form,
    pub holds: bool,
    /// `min (lhs − rhs) / sup u`; `−∞` if a right-hand side was infinite
    /// against positive boundary data.
    pub worst_slack: f64,
    pub worst_at: Option<Witness>,
    pub tolerance: f64,
    pub checks: usize,
}

#[derive(Debug, Clone)]
pub struct ConvexityConfig {
    /// Relative tolerance (in units of `sup u`).
    pub tol: f64,
    /// Start nodes per sweep in the Green and distortion forms.
    pub max_starts: usize,
    /// Distinct sub-geodesic lengths per start node.
    pub max_lengths: usize,
    pub distortion: DistortionConfig,
}

impl Default for ConvexityConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_starts: 33,
            max_lengths: 24,
            distortion: DistortionConfig::default(),
        }
    }
}

struct Worst {
    slack: f64,
    at: Option<Witness>,
    checks: usize,
}

impl Worst {
    fn new() -> Self {
        Self {
            slack: f64::INFINITY,
            at: None,
            checks: 0,
        }
    }

    fn push(&mut self, slack: f64, at: Witness) {
        self.checks += 1;
        // ties keep the earliest witness so parallel reductions stay deterministic
        if slack < self.slack {
            self.slack = slack;
            self.at = Some(at);
        }
    }

    fn merge(mut self, other: Worst) -> Worst {
        self.checks += other.checks;
        if other.slack < self.slack {
            self.slack = other.slack;
            self.at = other.at;
        }
        self
    }

    fn verdict(self, form: Form, tol: f64) -> ConvexityVerdict {
        let slack = if self.checks == 0 { 0.0 } else { self.slack };
        ConvexityVerdict {
            form,
            holds: slack >= -tol,
            worst_slack: slack,
            worst_at: self.at,
            tolerance: tol,
            checks: self.checks,
        }
    }
}

struct Prepared<'a> {
    xs: &'a [f64],
    u: &'a [f64],
    h: f64,
    scale: f64,
    kappa: Vec<f64>,
}

fn prepare<'a>(u: &'a SampledFunction, kappa: &CoefficientFn) -> Result<Prepared<'a>> {
    if u.len() < MIN_POINTS {
        return Err(invalid(format!("need at least {MIN_POINTS} samples, got {}", u.len())));
    }
    if !u.is_uniform() {
        return Err(invalid("convexity checks need a uniform grid"));
    }
    if let Some(&v) = u.values().iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(invalid(format!("u must be finite and nonnegative, got {v}")));
    }
    let (a, b) = (u.start(), u.end());
    if kappa.length() < (b - a) * (1.0 - 1e-12) {
        return Err(Error::DomainMismatch(format!(
            "coefficient covers [0, {}] but the function lives on an interval of length {}",
            kappa.length(),
            b - a
        )));
    }
    let kvals = u.xs().iter().map(|&x| kappa.eval((x - a).min(kappa.length()))).collect::<Vec<_>>();
    if let Some(i) = kvals.iter().position(|k| !k.is_finite()) {
        return Err(Error::NonFiniteCoefficient { t: u.xs()[i] - a });
    }
    let scale = u.values().iter().cloned().fold(0.0, f64::max);
    Ok(Prepared {
        xs: u.xs(),
        u: u.values(),
        h: (b - a) / (u.len() - 1) as f64,
        scale,
        kappa: kvals,
    })
}

/// `⟨u, φ''⟩ + ⟨κu, φ⟩ ≤ tol` for every hat test function `φ` with integral 1
/// centred at an interior node with a half-width that is a multiple of the grid
/// step. For the hat of half-width `h` this is
/// `(u(s−h) + u(s+h) − 2u(s))/h² + avg_φ(κu) ≤ tol`, the first term being
/// exact for hats. `avg_φ` is the discrete hat average plus a curvature
/// correction, exact for quadratics; the plain `κ(s)u(s)` (or the bare discrete
/// average) is off by `O(h²)`, which would flag equality cases.
pub fn check_distributional(u: &SampledFunction, kappa: &CoefficientFn, cfg: &ConvexityConfig) -> Result<ConvexityVerdict> {
    let p = prepare(u, kappa)?;
    let n = p.xs.len();
    if p.scale == 0.0 {
        return Ok(Worst::new().verdict(Form::Distributional, cfg.tol));
    }
    let g: Vec<f64> = p.u.iter().zip(&p.kappa).map(|(u, k)| u * k / p.scale).collect();
    let uu: Vec<f64> = p.u.iter().map(|v| v / p.scale).collect();
    // double prefix sums turn each hat average into O(1) work
    let mut s1 = vec![0.0; n + 1];
    for i in 0..n {
        s1[i + 1] = s1[i] + g[i];
    }
    let mut s2 = vec![0.0; n + 2];
    for i in 0..=n {
        s2[i + 1] = s2[i] + s1[i];
    }
    let worst = (1..n - 1)
        .into_par_iter()
        .map(|i| {
            let mut w = Worst::new();
            for m in 1..=i.min(n - 1 - i) {
                let hm = m as f64 * p.h;
                let second = (uu[i - m] + uu[i + m] - 2.0 * uu[i]) / (hm * hm);
                let tri = (s2[i + m + 1] - s2[i + 1]) - (s2[i + 1] - s2[i + 1 - m]);
                // the discrete hat sum falls short of the exact average by
                // h²g''/12 for every width
                let avg = tri / (m * m) as f64 + (g[i - 1] - 2.0 * g[i] + g[i + 1]) / 12.0;
                w.push(-(second + avg), Witness::Kernel { x: p.xs[i], h: hm });
            }
            w
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Worst::new(), Worst::merge);
    Ok(worst.verdict(Form::Distributional, cfg.tol))
}

/// Sub-geodesics `(i, j)` by node index: strided starts, geometric lengths.
fn segments(n: usize, h: f64, scope: Scope, cfg: &ConvexityConfig) -> Vec<(usize, usize)> {
    let max_len = match scope {
        Scope::AllGeodesics => n - 1,
        Scope::ShortGeodesics(l) => (((l / h) * (1.0 + 1e-9)).floor() as usize).min(n - 1),
    };
    if max_len == 0 {
        return Vec::new();
    }
    let count = cfg.max_lengths.max(2);
    let mut lengths: Vec<usize> = (0..count)
        .map(|k| {
            let r = k as f64 / (count - 1) as f64;
            (max_len as f64).powf(r).round() as usize
        })
        .collect();
    lengths.sort_unstable();
    lengths.dedup();
    let stride = ((n - 1) / cfg.max_starts.max(1)).max(1);
    let mut out = Vec::new();
    for &len in &lengths {
        let mut i = 0;
        while i + len < n {
            out.push((i, i + len));
            i += stride;
        }
        // always pin the right end too
        if (n - 1 - len) % stride != 0 {
            out.push((n - 1 - len, n - 1));
        }
    }
    out
}

/// Second-order derivative estimates on a uniform grid.
fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    if n < 3 {
        let d = if n == 2 { (f[1] - f[0]) / h } else { 0.0 };
        return vec![d; n];
    }
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for m in 1..n - 1 {
        d[m] = (f[m + 1] - f[m - 1]) / (2.0 * h);
    }
    d
}

/// Relative Green-form slack at every interior node of the segment `(i, j)`.
fn green_slacks(p: &Prepared, i: usize, j: usize) -> Vec<(f64, f64)> {
    let len = j - i;
    let theta = p.xs[j] - p.xs[i];
    let f: Vec<f64> = (i..=j).map(|m| p.kappa[m] * theta * theta * p.u[m] / p.scale).collect();
    let s = |m: usize| m as f64 / len as f64;
    let ds = 1.0 / len as f64;
    // A(t) = ∫₀ᵗ s F ds, B(t) = ∫ₜ¹ (1 − s) F ds by end-corrected trapezoids
    let fa: Vec<f64> = (0..=len).map(|m| s(m) * f[m]).collect();
    let fb: Vec<f64> = (0..=len).map(|m| (1.0 - s(m)) * f[m]).collect();
    let (da, db) = (derivative(&fa, ds), derivative(&fb, ds));
    let c = ds * ds / 12.0;
    let mut a = vec![0.0; len + 1];
    for m in 1..=len {
        a[m] = a[m - 1] + 0.5 * ds * (fa[m - 1] + fa[m]);
    }
    let mut b = vec![0.0; len + 1];
    for m in (0..len).rev() {
        b[m] = b[m + 1] + 0.5 * ds * (fb[m] + fb[m + 1]);
    }
    for m in 0..=len {
        a[m] -= c * (da[m] - da[0]);
        b[m] -= c * (db[len] - db[m]);
    }
    let (u0, u1) = (p.u[i] / p.scale, p.u[j] / p.scale);
    (1..len)
        .map(|m| {
            let t = s(m);
            let rhs = (1.0 - t) * u0 + t * u1 + (1.0 - t) * a[m] + t * b[m];
            (t, p.u[i + m] / p.scale - rhs)
        })
        .collect()
}

/// `u(γ_t) ≥ (1−t)u(γ_0) + t·u(γ_1) + ∫₀¹ g(s,t) κ(γ_s) θ² u(γ_s) ds − tol`
/// on sub-geodesics between grid nodes, `g(s,t) = min{s(1−t), t(1−s)}`, with
/// end-corrected trapezoidal cumulative quadrature.
pub fn check_green(u: &SampledFunction, kappa: &CoefficientFn, scope: Scope, cfg: &ConvexityConfig) -> Result<ConvexityVerdict> {
    let p = prepare(u, kappa)?;
    if p.scale == 0.0 {
        return Ok(Worst::new().verdict(Form::Green, cfg.tol));
    }
    let segs = segments(p.xs.len(), p.h, scope, cfg);
    let worst = segs
        .par_iter()
        .map(|&(i, j)| {
            let mut w = Worst::new();
            for (t, slack) in green_slacks(&p, i, j) {
                w.push(
                    slack,
                    Witness::Segment {
                        start: p.xs[i],
                        end: p.xs[j],
                        t,
                    },
                );
            }
            w
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Worst::new(), Worst::merge);
    Ok(worst.verdict(Form::Green, cfg.tol))
}

/// `u(γ_t) ≥ σ_{κ⁻}^(1−t)(θ)·u(γ_0) + σ_{κ⁺}^(t)(θ)·u(γ_1)` on grid
/// sub-geodesics, with `0·∞ = 0`. Borderline coefficients are propagated.
pub fn check_distortion_form(
    u: &SampledFunction,
    kappa: &CoefficientFn,
    scope: Scope,
    cfg: &ConvexityConfig,
) -> Result<ConvexityVerdict> {
    let p = prepare(u, kappa)?;
    if p.scale == 0.0 {
        return Ok(Worst::new().verdict(Form::DistortionCoefficients, cfg.tol));
    }
    let a = p.xs[0];
    let segs = segments(p.xs.len(), p.h, scope, cfg);
    let parts = segs
        .par_iter()
        .map(|&(i, j)| -> Result<Worst> {
            let mut w = Worst::new();
            let len = j - i;
            let theta = p.xs[j] - p.xs[i];
            let local = kappa.remapped(1.0, p.xs[i] - a, theta)?;
            let pair = BoundaryPair::new(&local, theta, &cfg.distortion)?;
            let (u0, u1) = (p.u[i] / p.scale, p.u[j] / p.scale);
            for m in 1..len {
                let t = m as f64 / len as f64;
                let rhs = pair.combine(u0, u1, t);
                let slack = match rhs.finite() {
                    Some(r) => p.u[i + m] / p.scale - r,
                    None => f64::NEG_INFINITY,
                };
                w.push(
                    slack,
                    Witness::Segment {
                        start: p.xs[i],
                        end: p.xs[j],
                        t,
                    },
                );
            }
            Ok(w)
        })
        .collect::<Vec<_>>();
    let mut worst = Worst::new();
    for part in parts {
        worst = worst.merge(part?);
    }
    Ok(worst.verdict(Form::DistortionCoefficients, cfg.tol))
}

/// `u = e^{−f/N}` with `e^{−∞} = 0`; `f = −∞` would make `u` infinite.
pub fn exponential_transform(f: &SampledFunction, n: f64) -> Result<SampledFunction> {
    if !(n >= 1.0 && n.is_finite()) {
        return Err(invalid(format!("N must be >= 1, got {n}")));
    }
    let mut vals = Vec::with_capacity(f.len());
    for &v in f.values() {
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(invalid(format!("f must take values in (−∞, ∞], got {v}")));
        }
        vals.push(if v == f64::INFINITY { 0.0 } else { (-v / n).exp() });
    }
    SampledFunction::new(f.xs().to_vec(), vals)
}

/// `(κ, N)`-convexity of `f`: the distortion form for `e^{−f/N}` and `κ/N`.
pub fn check_kappa_n_convex(
    f: &SampledFunction,
    kappa: &CoefficientFn,
    n: f64,
    scope: Scope,
    cfg: &ConvexityConfig,
) -> Result<ConvexityVerdict> {
    let u = exponential_transform(f, n)?;
    check_distortion_form(&u, &kappa.scaled(1.0 / n), scope, cfg)
}
