//! One-dimensional optimal transport through the monotone rearrangement.
//!
//! A [`Measure1D`] stores its Lebesgue density `f = ρ·w` on its own support
//! grid, linearly interpolated, so the CDF is piecewise quadratic and the
//! quantile function is inverted in closed form on each cell.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::spaces::{ProductSpace, WeightedInterval};

/// Allowed deviation of the total mass from 1.
pub const MASS_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Measure1D {
    space: WeightedInterval,
    xs: Vec<f64>,
    f: Vec<f64>,
    cdf: Vec<f64>,
}

fn cumulative(xs: &[f64], f: &[f64]) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(xs.len());
    cdf.push(0.0);
    for i in 1..xs.len() {
        let prev = cdf[i - 1];
        cdf.push(prev + 0.5 * (f[i - 1] + f[i]) * (xs[i] - xs[i - 1]));
    }
    cdf
}

impl Measure1D {
    /// Lebesgue density `f` at nodes `xs` (the measure is `f dx`); rescaled to
    /// unit mass when `normalize` is set, otherwise checked.
    pub fn from_lebesgue_density(space: &WeightedInterval, xs: Vec<f64>, f: Vec<f64>, normalize: bool) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::EmptyGrid);
        }
        if xs.len() != f.len() {
            return Err(invalid("nodes and densities differ in length"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("measure nodes must be strictly increasing"));
        }
        if xs[0] < space.start() - 1e-12 || xs[xs.len() - 1] > space.end() + 1e-12 {
            return Err(Error::DomainMismatch(format!(
                "support [{}, {}] leaves the space [{}, {}]",
                xs[0],
                xs[xs.len() - 1],
                space.start(),
                space.end()
            )));
        }
        if let Some(&bad) = f.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(invalid(format!("density must be finite and >= 0, got {bad}")));
        }
        let mut f = f;
        let mut cdf = cumulative(&xs, &f);
        let mass = cdf[cdf.len() - 1];
        if normalize {
            if !(mass > 0.0) {
                return Err(Error::DegenerateMass { mass });
            }
            f.iter_mut().for_each(|v| *v /= mass);
            cdf.iter_mut().for_each(|v| *v /= mass);
        } else if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::DegenerateMass { mass });
        }
        Ok(Self {
            space: space.clone(),
            xs,
            f,
            cdf,
        })
    }

    /// Density `ρ` against the reference measure at the nodes.
    pub fn from_density(space: &WeightedInterval, xs: Vec<f64>, rho: Vec<f64>, normalize: bool) -> Result<Self> {
        let f = xs.iter().zip(&rho).map(|(&x, &r)| r * space.w(x)).collect();
        Self::from_lebesgue_density(space, xs, f, normalize)
    }

    /// `ρ = g` on `nodes + 1` uniform points of `[lo, hi]`, normalized.
    pub fn from_fn(space: &WeightedInterval, lo: f64, hi: f64, nodes: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        if !(hi > lo) || nodes == 0 {
            return Err(invalid("support needs lo < hi and at least one cell"));
        }
        let xs: Vec<f64> = (0..=nodes).map(|i| lo + (hi - lo) * i as f64 / nodes as f64).collect();
        let rho = xs.iter().map(|&x| g(x)).collect();
        Self::from_density(space, xs, rho, true)
    }

    /// Uniform with respect to the reference measure on `[lo, hi]`.
    pub fn uniform(space: &WeightedInterval, lo: f64, hi: f64) -> Result<Self> {
        Self::from_fn(space, lo, hi, space.grid(), |_| 1.0)
    }

    /// The same measure viewed on another reference measure over the same
    /// interval (same Lebesgue density, new `ρ`).
    pub fn rebased(&self, space: &WeightedInterval) -> Result<Self> {
        Self::from_lebesgue_density(space, self.xs.clone(), self.f.clone(), false)
    }

    pub fn space(&self) -> &WeightedInterval {
        &self.space
    }

    pub fn support(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn mass(&self) -> f64 {
        self.cdf[self.cdf.len() - 1]
    }

    /// Lebesgue density `f = ρ·w`.
    pub fn lebesgue_density(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let i = self.xs.partition_point(|&p| p <= x).saturating_sub(1).min(n - 2);
        let w = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.f[i] * (1.0 - w) + self.f[i + 1] * w
    }

    /// `ρ = f / w`, with `w` taken slightly inside the space at its ends.
    pub fn density(&self, x: f64) -> f64 {
        let f = self.lebesgue_density(x);
        if f == 0.0 {
            0.0
        } else {
            f / self.space.w_truncated(x)
        }
    }

    /// Inverse CDF; `q ∈ [0, 1]`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        let mass = self.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::DegenerateMass { mass });
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(invalid(format!("quantile level must lie in [0, 1], got {q}")));
        }
        let target = q * mass;
        let n = self.xs.len();
        if target <= 0.0 {
            // leftmost point carrying mass
            let i = self.cdf.partition_point(|&c| c <= 0.0).saturating_sub(1);
            return Ok(self.xs[i.min(n - 1)]);
        }
        let i = self.cdf.partition_point(|&c| c < target).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let (f0, f1) = (self.f[i], self.f[i + 1]);
        let c = (target - self.cdf[i]).max(0.0);
        // solve f0·s + (f1 − f0)·s²/(2h) = c on [0, h]
        let a = (f1 - f0) / (2.0 * h);
        let disc = (f0 * f0 + 4.0 * a * c).max(0.0).sqrt();
        let s = if f0 + disc > 0.0 { 2.0 * c / (f0 + disc) } else { h };
        Ok(self.xs[i] + s.clamp(0.0, h))
    }

    /// `S_N = −∫ ρ^{1−1/N} dm`; cells where `ρ = 0` contribute nothing.
    pub fn renyi_entropy(&self, n: f64) -> Result<f64> {
        if !(n >= 1.0) {
            return Err(invalid(format!("N must be >= 1, got {n}")));
        }
        let p = 1.0 - 1.0 / n;
        Ok(-self.integrate_cells(|f, w| if f > 0.0 { f.powf(p) * w.powf(1.0 - p) } else { 0.0 }))
    }

    /// `Ent = ∫ ρ log ρ dm`.
    pub fn shannon_entropy(&self) -> f64 {
        self.integrate_cells(|f, w| if f > 0.0 { f * (f / w).ln() } else { 0.0 })
    }

    /// `∫ g(f(x), w(x)) dx` by 5-point Gauss–Legendre on every support cell.
    fn integrate_cells(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
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
        for i in 0..self.xs.len() - 1 {
            let (x0, x1) = (self.xs[i], self.xs[i + 1]);
            let (f0, f1) = (self.f[i], self.f[i + 1]);
            if f0 == 0.0 && f1 == 0.0 {
                continue;
            }
            let half = 0.5 * (x1 - x0);
            for q in 0..5 {
                let s = 0.5 * (1.0 + X[q]);
                let x = x0 + s * (x1 - x0);
                let f = f0 + s * (f1 - f0);
                total += W[q] * half * g(f, self.space.w_truncated(x));
            }
        }
        total
    }
}

/// Midpoint quantile levels `(j − ½)/Q`.
pub fn quantile_levels(q: usize) -> Vec<f64> {
    (1..=q).map(|j| (j as f64 - 0.5) / q as f64).collect()
}

/// The monotone coupling of two measures, sampled at `Q` midpoint levels.
#[derive(Debug, Clone, Serialize)]
pub struct Coupling {
    pub levels: Vec<f64>,
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
    /// `T'` at `x0_j` by differences across neighbouring levels.
    pub slope: Vec<f64>,
    /// Reference-measure densities at the ends of every ray.
    pub rho0: Vec<f64>,
    pub rho1: Vec<f64>,
    f0: Vec<f64>,
}

impl Coupling {
    pub fn new(mu0: &Measure1D, mu1: &Measure1D, q: usize) -> Result<Self> {
        if q < 2 {
            return Err(invalid("at least two quantile levels are needed"));
        }
        let levels = quantile_levels(q);
        let x0 = levels.iter().map(|&l| mu0.quantile(l)).collect::<Result<Vec<_>>>()?;
        let x1 = levels.iter().map(|&l| mu1.quantile(l)).collect::<Result<Vec<_>>>()?;
        // dT/dx = (dx1/dq)/(dx0/dq), second order in q at every level
        let dq = |y: &[f64], j: usize| -> f64 {
            if j == 0 {
                -3.0 * y[0] + 4.0 * y[1] - y[2]
            } else if j == q - 1 {
                3.0 * y[q - 1] - 4.0 * y[q - 2] + y[q - 3]
            } else {
                y[j + 1] - y[j - 1]
            }
        };
        let slope = (0..q)
            .map(|j| {
                if q < 3 {
                    let dx0 = x0[1] - x0[0];
                    return if dx0 > 0.0 { (x1[1] - x1[0]) / dx0 } else { 1.0 };
                }
                let (d0, d1) = (dq(&x0, j), dq(&x1, j));
                if d0 > 0.0 && d1 >= 0.0 {
                    d1 / d0
                } else {
                    1.0
                }
            })
            .collect();
        let rho0 = x0.iter().map(|&x| mu0.density(x)).collect();
        let rho1 = x1.iter().map(|&x| mu1.density(x)).collect();
        let f0 = x0.iter().map(|&x| mu0.lebesgue_density(x)).collect();
        Ok(Self {
            levels,
            x0,
            x1,
            slope,
            rho0,
            rho1,
            f0,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Ray lengths `θ_j = |x1_j − x0_j|`.
    pub fn theta(&self, j: usize) -> f64 {
        (self.x1[j] - self.x0[j]).abs()
    }

    pub fn cost(&self) -> f64 {
        let q = self.len() as f64;
        (self.x0.iter().zip(&self.x1).map(|(a, b)| (b - a) * (b - a)).sum::<f64>() / q).sqrt()
    }

    /// Positions and densities at time `t`.
    pub fn slice(&self, space: &WeightedInterval, t: f64) -> Result<PathSlice> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("t must lie in [0, 1], got {t}")));
        }
        let q = self.len();
        let mut xt = Vec::with_capacity(q);
        let mut rho_t = Vec::with_capacity(q);
        for j in 0..q {
            let x = (1.0 - t) * self.x0[j] + t * self.x1[j];
            let (rho, jac) = if t == 0.0 {
                (self.rho0[j], 1.0)
            } else {
                let w = space.w(x);
                if !(w > 0.0) {
                    return Err(Error::ZeroWeight { x });
                }
                let jac = (1.0 - t) + t * self.slope[j];
                (self.f0[j] / (jac * w), jac)
            };
            debug_assert!(jac > 0.0);
            xt.push(x);
            rho_t.push(rho);
        }
        Ok(PathSlice {
            t,
            levels: self.levels.clone(),
            x0: self.x0.clone(),
            x1: self.x1.clone(),
            xt,
            rho_t,
        })
    }
}

/// One time slice of the interpolation `μ_t`.
#[derive(Debug, Clone, Serialize)]
pub struct PathSlice {
    pub t: f64,
    pub levels: Vec<f64>,
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
    pub xt: Vec<f64>,
    /// Density of `μ_t` against the reference measure at `xt`.
    pub rho_t: Vec<f64>,
}

impl PathSlice {
    /// `S_N(μ_t) = −∫ ρ_t^{−1/N} dμ_t` by the quantile rule.
    pub fn renyi_entropy(&self, n: f64) -> f64 {
        let q = self.rho_t.len() as f64;
        -self.rho_t.iter().map(|r| r.powf(-1.0 / n)).sum::<f64>() / q
    }

    /// `Ent(μ_t) = ∫ log ρ_t dμ_t` by the quantile rule.
    pub fn shannon_entropy(&self) -> f64 {
        let q = self.rho_t.len() as f64;
        self.rho_t.iter().map(|r| r.ln()).sum::<f64>() / q
    }

    /// `μ_t` as a grid measure through the ray positions, with the support
    /// ends `(1 − t)·ends(μ0) + t·ends(μ1)` added and the mass renormalized.
    pub fn to_measure(&self, space: &WeightedInterval, mu0: &Measure1D, mu1: &Measure1D) -> Result<Measure1D> {
        let t = self.t;
        let (a0, b0) = mu0.support();
        let (a1, b1) = mu1.support();
        let lo = (1.0 - t) * a0 + t * a1;
        let hi = (1.0 - t) * b0 + t * b1;
        let mut xs = Vec::with_capacity(self.xt.len() + 2);
        let mut f = Vec::with_capacity(self.xt.len() + 2);
        let leb = |j: usize| self.rho_t[j] * space.w(self.xt[j]);
        if lo < self.xt[0] {
            xs.push(lo);
            f.push(leb(0));
        }
        for j in 0..self.xt.len() {
            if xs.last().is_some_and(|&p| self.xt[j] <= p) {
                continue;
            }
            xs.push(self.xt[j]);
            f.push(leb(j));
        }
        if hi > *xs.last().unwrap() {
            xs.push(hi);
            f.push(leb(self.xt.len() - 1));
        }
        Measure1D::from_lebesgue_density(space, xs, f, true)
    }
}

/// `W_2(μ0, μ1)` from `Q` midpoint quantiles.
pub fn wasserstein2(mu0: &Measure1D, mu1: &Measure1D, q: usize) -> Result<f64> {
    Ok(Coupling::new(mu0, mu1, q)?.cost())
}

/// Interpolation slice at time `t`.
pub fn interpolate(mu0: &Measure1D, mu1: &Measure1D, t: f64, q: usize) -> Result<PathSlice> {
    Coupling::new(mu0, mu1, q)?.slice(mu0.space(), t)
}

/// Per-factor couplings of factorized measures on a product.
#[derive(Debug, Clone)]
pub struct ProductCoupling {
    pub first: Coupling,
    pub second: Coupling,
}

/// A time slice on the product: rays indexed by `(j, l)`.
#[derive(Debug, Clone, Serialize)]
pub struct ProductSlice {
    pub t: f64,
    pub first: PathSlice,
    pub second: PathSlice,
}

impl ProductSlice {
    pub fn len(&self) -> usize {
        self.first.xt.len() * self.second.xt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, j: usize, l: usize) -> (f64, f64) {
        (self.first.xt[j], self.second.xt[l])
    }

    pub fn density(&self, j: usize, l: usize) -> f64 {
        self.first.rho_t[j] * self.second.rho_t[l]
    }

    /// `∫ ρ_t dm` over the product by the cell rule on the factor slices.
    pub fn total_mass(&self, space: &ProductSpace) -> f64 {
        let mass = |s: &PathSlice, sp: &WeightedInterval| -> f64 {
            let n = s.xt.len();
            let mut total = 0.0;
            for j in 0..n {
                // cell of μ_t around ray j: half-way to the neighbours
                let lo = if j == 0 { s.xt[0] - 0.5 * (s.xt[1] - s.xt[0]) } else { 0.5 * (s.xt[j - 1] + s.xt[j]) };
                let hi = if j == n - 1 {
                    s.xt[n - 1] + 0.5 * (s.xt[n - 1] - s.xt[n - 2])
                } else {
                    0.5 * (s.xt[j] + s.xt[j + 1])
                };
                total += s.rho_t[j] * sp.w(s.xt[j]) * (hi - lo);
            }
            total
        };
        mass(&self.first, &space.first) * mass(&self.second, &space.second)
    }
}

impl ProductCoupling {
    pub fn new(mu0: (&Measure1D, &Measure1D), mu1: (&Measure1D, &Measure1D), q: usize) -> Result<Self> {
        Ok(Self {
            first: Coupling::new(mu0.0, mu1.0, q)?,
            second: Coupling::new(mu0.1, mu1.1, q)?,
        })
    }

    /// Product ray length `√(θ1² + θ2²)`.
    pub fn theta(&self, j: usize, l: usize) -> f64 {
        self.first.theta(j).hypot(self.second.theta(l))
    }

    /// Squared product cost is the sum of the squared factor costs.
    pub fn cost(&self) -> f64 {
        self.first.cost().hypot(self.second.cost())
    }

    pub fn slice(&self, space: &ProductSpace, t: f64) -> Result<ProductSlice> {
        Ok(ProductSlice {
            t,
            first: self.first.slice(&space.first, t)?,
            second: self.second.slice(&space.second, t)?,
        })
    }
}

/// Product interpolation of factorized endpoints.
pub fn product_interpolate(
    space: &ProductSpace,
    mu0: (&Measure1D, &Measure1D),
    mu1: (&Measure1D, &Measure1D),
    t: f64,
    q: usize,
) -> Result<ProductSlice> {
    ProductCoupling::new(mu0, mu1, q)?.slice(space, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature_field::CurvatureField;
    use crate::spaces::{model_space, product, FieldScaling, InitialData};
    use crate::sturm::SolverConfig;
    use proptest::prelude::*;

    fn leb() -> WeightedInterval {
        WeightedInterval::lebesgue(0.0, 1.0).unwrap()
    }

    #[test]
    fn quantiles() {
        let s = leb();
        let u = Measure1D::uniform(&s, 0.0, 1.0).unwrap();
        assert!((u.quantile(0.25).unwrap() - 0.25).abs() < 1e-14);
        assert!(u.quantile(1e-12).unwrap() < 1e-11);
        let tri = Measure1D::from_fn(&s, 0.0, 1.0, 64, |x| 2.0 * x).unwrap();
        // CDF x² inverted; linear density makes the quadratic CDF exact
        assert!((tri.quantile(0.25).unwrap() - 0.5).abs() < 1e-14);
        let half = Measure1D::from_fn(&s, 0.0, 1.0, 64, |x| 2.0 * x).unwrap();
        let mut last = 0.0;
        for j in 0..=100 {
            let x = half.quantile(j as f64 / 100.0).unwrap();
            assert!(x >= last);
            last = x;
        }
    }

    #[test]
    fn degenerate_mass() {
        let s = leb();
        let r = Measure1D::from_lebesgue_density(&s, vec![0.0, 1.0], vec![2.0, 2.0], false);
        assert!(matches!(r, Err(Error::DegenerateMass { .. })));
        let r = Measure1D::from_lebesgue_density(&s, vec![0.0, 1.0], vec![0.0, 0.0], true);
        assert!(matches!(r, Err(Error::DegenerateMass { .. })));
    }

    #[test]
    fn interpolation_examples() {
        let s = leb();
        let a = Measure1D::uniform(&s, 0.0, 0.5).unwrap();
        let b = Measure1D::uniform(&s, 0.5, 1.0).unwrap();
        for t in [0.25, 0.5, 0.75] {
            let sl = interpolate(&a, &b, t, 128).unwrap();
            assert!(sl.rho_t.iter().all(|r| (r - 2.0).abs() < 1e-9));
            assert!(sl.xt.iter().all(|&x| x >= t / 2.0 - 1e-12 && x <= t / 2.0 + 0.5 + 1e-12));
        }
        let same = interpolate(&a, &a, 0.6, 128).unwrap();
        assert!(same.x0.iter().zip(&same.x1).all(|(p, q)| p == q));
        let full = Measure1D::uniform(&s, 0.0, 1.0).unwrap();
        let c = Coupling::new(&full, &a, 128).unwrap();
        assert!(c.slope.iter().all(|d| (d - 0.5).abs() < 1e-9));
        let end = c.slice(&s, 1.0).unwrap();
        assert!(end.rho_t.iter().all(|r| (r - 2.0).abs() < 1e-9));
    }

    #[test]
    fn wasserstein_examples() {
        let s = WeightedInterval::lebesgue(0.0, 2.0).unwrap();
        let a = Measure1D::uniform(&s, 0.0, 1.0).unwrap();
        let b = Measure1D::uniform(&s, 1.0, 2.0).unwrap();
        for q in [64, 256, 1024] {
            assert!((wasserstein2(&a, &b, q).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(wasserstein2(&a, &a, 64).unwrap(), 0.0);
        let spike = Measure1D::uniform(&s, 0.5 - 5e-4, 0.5 + 5e-4).unwrap();
        let w = wasserstein2(&a, &spike, 1024).unwrap();
        assert!((w - (1.0f64 / 12.0).sqrt()).abs() < 2e-3);
    }

    #[test]
    fn entropies() {
        let s = leb();
        let u = Measure1D::uniform(&s, 0.0, 0.25).unwrap();
        for n in [1.0, 2.0, 5.0] {
            assert!((u.renyi_entropy(n).unwrap() + 0.25f64.powf(1.0 / n)).abs() < 1e-10);
        }
        assert!((u.shannon_entropy() - 4.0f64.ln()).abs() < 1e-10);
        let tri = Measure1D::from_fn(&s, 0.0, 1.0, 4096, |x| 2.0 * x).unwrap();
        assert!((tri.renyi_entropy(1.0).unwrap() + 1.0).abs() < 1e-12);
        assert!((tri.renyi_entropy(2.0).unwrap() + 2.0 * 2.0f64.sqrt() / 3.0).abs() < 1e-6);
        assert!((tri.shannon_entropy() - (2.0f64.ln() - 0.5)).abs() < 1e-6);
        let full = Measure1D::uniform(&s, 0.0, 1.0).unwrap();
        assert!(full.shannon_entropy().abs() < 1e-12);
    }

    #[test]
    fn entropy_limit_gap_shrinks_like_one_over_n() {
        let s = leb();
        let m = Measure1D::from_fn(&s, 0.0, 1.0, 2048, |x| 1.0 + 0.5 * (6.0 * x).sin()).unwrap();
        let ent = m.shannon_entropy();
        let gap = |n: f64| (n * (1.0 + m.renyi_entropy(n).unwrap()) - ent).abs();
        let (g3, g4) = (gap(1e3), gap(1e4));
        assert!(g3 * 1e3 < 1.0 && g4 < g3 / 5.0);
    }

    #[test]
    fn geodesic_property() {
        let s = leb();
        let a = Measure1D::from_fn(&s, 0.0, 0.6, 512, |x| 1.0 + x).unwrap();
        let b = Measure1D::from_fn(&s, 0.3, 1.0, 512, |x| 2.0 - x).unwrap();
        let q = 256;
        let total = wasserstein2(&a, &b, q).unwrap();
        for t in [0.25, 0.5, 0.75] {
            let sl = interpolate(&a, &b, t, q).unwrap();
            let mt = sl.to_measure(&s, &a, &b).unwrap();
            let part = wasserstein2(&a, &mt, q).unwrap();
            assert!((part - t * total).abs() <= 3.0 / q as f64, "t = {t}");
        }
    }

    #[test]
    fn density_reintegrates_on_a_weighted_space() {
        let space = model_space(
            &CurvatureField::constant(1.0).unwrap(),
            3.0,
            0.1,
            3.0,
            InitialData {
                u0: 0.1f64.sin(),
                v0: 0.1f64.cos(),
            },
            FieldScaling::DimensionScaled,
            &SolverConfig::default(),
        )
        .unwrap();
        let a = Measure1D::uniform(&space, 0.3, 1.0).unwrap();
        let b = Measure1D::from_fn(&space, 1.5, 2.8, 1024, |x| 1.0 + x).unwrap();
        let q = 256;
        for t in [0.3, 0.7] {
            let sl = interpolate(&a, &b, t, q).unwrap();
            let m = sl.to_measure(&space, &a, &b).unwrap();
            assert!((m.mass() - 1.0).abs() < 1e-12);
            // mass before renormalization
            let raw: f64 = sl
                .xt
                .windows(2)
                .zip(sl.rho_t.windows(2))
                .map(|(x, r)| 0.5 * (r[0] * space.w(x[0]) + r[1] * space.w(x[1])) * (x[1] - x[0]))
                .sum();
            assert!((raw - 1.0).abs() < 2.0 / q as f64);
        }
    }

    #[test]
    fn product_transport() {
        let p = product(leb(), leb());
        let a = Measure1D::uniform(&p.first, 0.0, 0.5).unwrap();
        let b = Measure1D::uniform(&p.first, 0.5, 1.0).unwrap();
        let pc = ProductCoupling::new((&a, &a), (&b, &b), 64).unwrap();
        let cost1 = wasserstein2(&a, &b, 64).unwrap();
        assert!((pc.cost() - (2.0 * cost1 * cost1).sqrt()).abs() < 1e-12);
        let sl = pc.slice(&p, 0.5).unwrap();
        assert!((sl.density(3, 7) - 4.0).abs() < 1e-9);
        assert!((sl.total_mass(&p) - 1.0).abs() < 4.0 / 64.0);
        let still = product_interpolate(&p, (&a, &b), (&a, &b), 0.4, 64).unwrap();
        assert!(still.first.xt.iter().zip(&still.first.x0).all(|(x, y)| x == y));
    }

    proptest! {
        #[test]
        fn plain_displacement_convexity_of_inverse_density(c0 in 0.1f64..2.0, c1 in 0.1f64..2.0, t in 0.05f64..0.95) {
            // ρ_t^{-1} is affine in t along the monotone coupling on Lebesgue space
            let s = leb();
            let a = Measure1D::from_fn(&s, 0.0, 0.4, 256, |x| 1.0 + c0 * x).unwrap();
            let b = Measure1D::from_fn(&s, 0.5, 1.0, 256, |x| 1.0 + c1 * (1.0 - x)).unwrap();
            let c = Coupling::new(&a, &b, 128).unwrap();
            let sl = c.slice(&s, t).unwrap();
            for j in 0..128 {
                let lhs = 1.0 / sl.rho_t[j];
                let rhs = (1.0 - t) / c.rho0[j] + t / c.rho1[j];
                prop_assert!((lhs - rhs).abs() < 1e-3);
            }
        }
    }
}
