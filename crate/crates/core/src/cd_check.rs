//! Curvature-dimension verifiers along the monotone (or product) coupling.
//!
//! Every check walks the quantile rays of [`crate::transport::Coupling`],
//! builds the distortion profiles of `k` restricted to each ray once, and
//! evaluates the slack at every interior time. Interior means `0 < t < 1`: the
//! endpoint identities hold by construction and are not aggregated.
//!
//! A failing run is repeated at `2Q`; only a failure at both resolutions is a
//! [`Verdict::Violation`].

use rayon::prelude::*;
use serde::Serialize;

use crate::convexity::{check_distortion_form, ConvexityConfig, SampledFunction, Scope};
use crate::curvature_field::{CurvatureField, GeodesicSegment};
use crate::distortion::{DistortionConfig, DistortionProfile, ExtendedNonNeg, TauProfile};
use crate::error::{invalid, Error, Result};
use crate::spaces::{gauss_legendre, ProductSpace, Weight, WeightedInterval};
use crate::sturm::CoefficientFn;
use crate::transport::{Coupling, Measure1D, ProductCoupling};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    #[serde(rename = "CD")]
    Cd,
    #[serde(rename = "CD*")]
    CdStar,
    #[serde(rename = "CD_inf")]
    CdInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckForm {
    Pointwise,
    Entropy,
    Reduced,
    Infinity,
    WeightedMeasure,
    Tensorization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    /// Negative beyond tolerance at `Q` but not at `2Q`.
    NumericalViolation,
    Violation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdWitness {
    pub t: f64,
    /// Quantile ray (first factor on products); absent for integral forms.
    pub j: Option<usize>,
    pub l: Option<usize>,
    pub n_prime: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CdReport {
    pub condition: Condition,
    pub form: CheckForm,
    pub field: String,
    pub n: Option<f64>,
    pub n_primes: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub q: usize,
    /// Most negative slack at `Q`; `−∞` when an infinite coefficient met
    /// positive density.
    pub worst_slack: f64,
    pub worst_witness: Option<CdWitness>,
    /// Worst slack at `2Q`, when the first pass failed.
    pub refined_slack: Option<f64>,
    /// Tensorization only: relative slack of the coefficient inequality.
    pub coefficient_claim_slack: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl CdReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone)]
pub struct CdConfig {
    pub q: usize,
    pub t_grid: Vec<f64>,
    pub tol: f64,
    /// Re-run failing checks at `2Q`.
    pub refine: bool,
    pub distortion: DistortionConfig,
}

impl Default for CdConfig {
    fn default() -> Self {
        Self {
            q: 512,
            t_grid: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            tol: 1e-3,
            refine: true,
            distortion: DistortionConfig::default(),
        }
    }
}

impl CdConfig {
    fn interior_times(&self) -> Result<Vec<f64>> {
        if let Some(&t) = self.t_grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(invalid(format!("t grid values must lie in [0, 1], got {t}")));
        }
        Ok(self.t_grid.iter().copied().filter(|&t| t > 0.0 && t < 1.0).collect())
    }
}

/// One evaluated slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlackRow {
    pub t: f64,
    pub j: usize,
    pub slack: f64,
}

#[derive(Clone, Copy)]
struct Best {
    slack: f64,
    at: Option<CdWitness>,
}

impl Best {
    fn none() -> Self {
        Self {
            slack: f64::INFINITY,
            at: None,
        }
    }

    fn offer(&mut self, slack: f64, at: CdWitness) {
        if slack < self.slack || (slack.is_nan() && !self.slack.is_nan()) {
            self.slack = slack;
            self.at = Some(at);
        }
    }

    fn merge(mut self, other: Best) -> Best {
        if other.slack < self.slack {
            self.slack = other.slack;
            self.at = other.at;
        }
        self
    }
}

/// Distortion coefficients used on both sides of the inequality.
#[derive(Debug, Clone, Copy)]
enum Coefficient {
    Tau(f64),
    Sigma(f64),
}

/// Forward/backward profiles of one ray.
enum RayProfile {
    Tau(TauProfile, TauProfile),
    Sigma(DistortionProfile, DistortionProfile),
}

impl RayProfile {
    fn new(kappa: &CoefficientFn, theta: f64, c: Coefficient, cfg: &DistortionConfig) -> Result<Self> {
        let back = kappa.reversed();
        Ok(match c {
            Coefficient::Tau(n) => RayProfile::Tau(TauProfile::new(kappa, n, theta, cfg)?, TauProfile::new(&back, n, theta, cfg)?),
            Coefficient::Sigma(n) => RayProfile::Sigma(
                DistortionProfile::new(&kappa.scaled(1.0 / n), theta, cfg)?,
                DistortionProfile::new(&back.scaled(1.0 / n), theta, cfg)?,
            ),
        })
    }

    /// `(c_{κ⁻}^(1−t), c_{κ⁺}^(t))`.
    fn at(&self, t: f64) -> (ExtendedNonNeg, ExtendedNonNeg) {
        match self {
            RayProfile::Tau(f, b) => (b.at(1.0 - t), f.at(t)),
            RayProfile::Sigma(f, b) => (b.at(1.0 - t), f.at(t)),
        }
    }
}

/// `lhs − c⁻·a − c⁺·b` with `0·∞ = 0`.
fn slack(lhs: f64, cm: ExtendedNonNeg, a: f64, cp: ExtendedNonNeg, b: f64) -> f64 {
    match cm.scale(a).add(cp.scale(b)).finite() {
        Some(r) => lhs - r,
        None => f64::NEG_INFINITY,
    }
}

fn field_along(field: &CurvatureField, x0: f64, x1: f64) -> Result<CoefficientFn> {
    field.restrict_along(&GeodesicSegment::new(x0, x1))
}

/// Per-ray slacks of the density form at every interior time, for one
/// coefficient family.
fn ray_slacks(
    space: &WeightedInterval,
    field: &CurvatureField,
    coupling: &Coupling,
    times: &[f64],
    c: Coefficient,
    n: f64,
    cfg: &DistortionConfig,
) -> Result<Vec<Vec<f64>>> {
    let slices = times.iter().map(|&t| coupling.slice(space, t)).collect::<Result<Vec<_>>>()?;
    let p = -1.0 / n;
    (0..coupling.len())
        .into_par_iter()
        .map(|j| {
            let theta = coupling.theta(j);
            let kappa = field_along(field, coupling.x0[j], coupling.x1[j])?;
            let prof = RayProfile::new(&kappa, theta, c, cfg)?;
            let (a, b) = (coupling.rho0[j].powf(p), coupling.rho1[j].powf(p));
            Ok(slices
                .iter()
                .map(|s| {
                    let (cm, cp) = prof.at(s.t);
                    slack(s.rho_t[j].powf(p), cm, a, cp, b)
                })
                .collect())
        })
        .collect()
}

/// Per-`(t, j)` slacks of the pointwise CD check, for CSV output.
pub fn pointwise_slacks(
    space: &WeightedInterval,
    k: &CurvatureField,
    n: f64,
    mu0: &Measure1D,
    mu1: &Measure1D,
    cfg: &CdConfig,
) -> Result<Vec<SlackRow>> {
    check_dimension(n)?;
    let times = cfg.interior_times()?;
    let coupling = Coupling::new(mu0, mu1, cfg.q)?;
    let rows = ray_slacks(space, k, &coupling, &times, Coefficient::Tau(n), n, &cfg.distortion)?;
    let mut out = Vec::with_capacity(rows.len() * times.len());
    for (i, &t) in times.iter().enumerate() {
        for (j, r) in rows.iter().enumerate() {
            out.push(SlackRow { t, j, slack: r[i] });
        }
    }
    Ok(out)
}

fn check_dimension(n: f64) -> Result<()> {
    if n >= 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("N must be >= 1, got {n}")))
    }
}

fn describe(field: &CurvatureField) -> String {
    match field.as_constant() {
        Some(k) => format!("const:{k}"),
        None => format!("{field:?}"),
    }
}

struct CheckInfo<'a> {
    condition: Condition,
    form: CheckForm,
    field: &'a CurvatureField,
    n: Option<f64>,
    n_primes: Vec<f64>,
}

/// Runs `worst(q)` and applies the two-resolution verdict.
fn report(info: CheckInfo, cfg: &CdConfig, worst: impl Fn(usize) -> Result<Best>) -> Result<CdReport> {
    let first = worst(cfg.q)?;
    let slack = if first.at.is_none() { 0.0 } else { first.slack };
    let (verdict, refined) = if slack >= -cfg.tol {
        (Verdict::Pass, None)
    } else if cfg.refine {
        let second = worst(2 * cfg.q)?;
        let s2 = if second.at.is_none() { 0.0 } else { second.slack };
        if s2 < -cfg.tol {
            (Verdict::Violation, Some(s2))
        } else {
            (Verdict::NumericalViolation, Some(s2))
        }
    } else {
        (Verdict::NumericalViolation, None)
    };
    Ok(CdReport {
        condition: info.condition,
        form: info.form,
        field: describe(info.field),
        n: info.n,
        n_primes: info.n_primes,
        t_grid: cfg.t_grid.clone(),
        q: cfg.q,
        worst_slack: slack,
        worst_witness: first.at,
        refined_slack: refined,
        coefficient_claim_slack: None,
        tolerance: cfg.tol,
        verdict,
    })
}

fn worst_pointwise(
    space: &WeightedInterval,
    k: &CurvatureField,
    n: f64,
    c: Coefficient,
    mu0: &Measure1D,
    mu1: &Measure1D,
    times: &[f64],
    q: usize,
    cfg: &DistortionConfig,
) -> Result<Best> {
    let coupling = Coupling::new(mu0, mu1, q)?;
    let rows = ray_slacks(space, k, &coupling, times, c, n, cfg)?;
    let mut best = Best::none();
    for (i, &t) in times.iter().enumerate() {
        for (j, r) in rows.iter().enumerate() {
            best.offer(
                r[i],
                CdWitness {
                    t,
                    j: Some(j),
                    l: None,
                    n_prime: None,
                },
            );
        }
    }
    Ok(best)
}

/// `ρ_t^{−1/N} ≥ τ^(1−t)_{k⁻,N}(θ)ρ0^{−1/N} + τ^(t)_{k⁺,N}(θ)ρ1^{−1/N}` along
/// every quantile ray.
pub fn check_pointwise_cd(
    space: &WeightedInterval,
    k: &CurvatureField,
    n: f64,
    mu0: &Measure1D,
    mu1: &Measure1D,
    cfg: &CdConfig,
) -> Result<CdReport> {
    check_dimension(n)?;
    let times = cfg.interior_times()?;
    let info = CheckInfo {
        condition: Condition::Cd,
        form: CheckForm::Pointwise,
        field: k,
        n: Some(n),
        n_primes: vec![n],
    };
    report(info, cfg, |q| worst_pointwise(space, k, n, Coefficient::Tau(n), mu0, mu1, &times, q, &cfg.distortion))
}

/// As [`check_pointwise_cd`] with `σ_{k,N}` in place of `τ_{k,N}`.
pub fn check_reduced_cd(
    space: &WeightedInterval,
    k: &CurvatureField,
    n: f64,
    mu0: &Measure1D,
    mu1: &Measure1D,
    cfg: &CdConfig,
) -> Result<CdReport> {
    check_dimension(n)?;
    let times = cfg.interior_times()?;
    let info = CheckInfo {
        condition: Condition::CdStar,
        form: CheckForm::Reduced,
        field: k,
        n: Some(n),
        n_primes: vec![n],
    };
    report(info, cfg, |q| worst_pointwise(space, k, n, Coefficient::Sigma(n), mu0, mu1, &times, q, &cfg.distortion))
}

/// `S_{N'}(μ_t) ≤ −(1/Q)Σ_j [τ^(1−t)ρ0^{−1/N'} + τ^(t)ρ1^{−1/N'}]` for each
/// `N' ≥ N` in the list. `S_{N'}(μ_t) = −∫ρ_t^{−1/N'} dμ_t` is evaluated by the
/// same quantile rule as the right-hand side.
pub fn check_entropy_cd(
    space: &WeightedInterval,
    k: &CurvatureField,
    n: f64,
    mu0: &Measure1D,
    mu1: &Measure1D,
    n_primes: &[f64],
    cfg: &CdConfig,
) -> Result<CdReport> {
    check_dimension(n)?;
    if let Some(&np) = n_primes.iter().find(|&&np| !(np >= n)) {
        return Err(invalid(format!("every N' must be >= N = {n}, got {np}")));
    }
    let list = if n_primes.is_empty() { vec![n] } else { n_primes.to_vec() };
    let times = cfg.interior_times()?;
    let info = CheckInfo {
        condition: Condition::Cd,
        form: CheckForm::Entropy,
        field: k,
        n: Some(n),
        n_primes: list.clone(),
    };
    report(info, cfg, |q| {
        let coupling = Coupling::new(mu0, mu1, q)?;
        let mut best = Best::none();
        for &np in &list {
            let rows = ray_slacks(space, k, &coupling, &times, Coefficient::Tau(np), np, &cfg.distortion)?;
            for (i, &t) in times.iter().enumerate() {
                let mean = rows.iter().map(|r| r[i]).sum::<f64>() / rows.len() as f64;
                best.offer(
                    mean,
                    CdWitness {
                        t,
                        j: None,
                        l: None,
                        n_prime: Some(np),
                    },
                );
            }
        }
        Ok(best)
    })
}

/// Green-kernel curvature term `θ² ∫₀¹ g(s,t) k(γ_s) ds`.
fn green_term(kappa: &CoefficientFn, theta: f64, t: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let k = |s: f64| kappa.eval((s * theta).min(kappa.length()));
    let left = gauss_legendre(0.0, t, 8, |s| s * (1.0 - t) * k(s));
    let right = gauss_legendre(t, 1.0, 8, |s| t * (1.0 - s) * k(s));
    theta * theta * (left + right)
}

/// `Ent(μ_t) ≤ (1−t)Ent(μ0) + t·Ent(μ1) − (1/Q)Σ_j θ_j²∫₀¹ g(s,t)k(γ_j(s))ds`,
/// all entropies by the quantile rule `(1/Q)Σ log ρ`.
pub fn check_cd_infinity(
    space: &WeightedInterval,
    k: &CurvatureField,
    mu0: &Measure1D,
    mu1: &Measure1D,
    cfg: &CdConfig,
) -> Result<CdReport> {
    let times = cfg.interior_times()?;
    let info = CheckInfo {
        condition: Condition::CdInfinity,
        form: CheckForm::Infinity,
        field: k,
        n: None,
        n_primes: Vec::new(),
    };
    report(info, cfg, |q| {
        let coupling = Coupling::new(mu0, mu1, q)?;
        let qf = coupling.len() as f64;
        let ent = |rho: &[f64]| rho.iter().map(|r| r.ln()).sum::<f64>() / qf;
        let (e0, e1) = (ent(&coupling.rho0), ent(&coupling.rho1));
        if !(e0.is_finite() && e1.is_finite()) {
            return Err(invalid("endpoint entropies must be finite"));
        }
        let kappas = (0..coupling.len())
            .into_par_iter()
            .map(|j| field_along(k, coupling.x0[j], coupling.x1[j]))
            .collect::<Result<Vec<_>>>()?;
        let mut best = Best::none();
        for &t in &times {
            let slice = coupling.slice(space, t)?;
            let curv = kappas
                .par_iter()
                .enumerate()
                .map(|(j, kap)| green_term(kap, coupling.theta(j), t))
                .sum::<f64>()
                / qf;
            let et = ent(&slice.rho_t);
            best.offer(
                (1.0 - t) * e0 + t * e1 - curv - et,
                CdWitness {
                    t,
                    j: None,
                    l: None,
                    n_prime: None,
                },
            );
        }
        Ok(best)
    })
}

/// Sum of a certified field and a coefficient given in the coordinate `x − a`.
fn field_sum(space: &WeightedInterval, k: &CurvatureField, kp: &CoefficientFn) -> Result<CurvatureField> {
    let a = space.start();
    if let (Some(c1), Some(c2)) = (k.as_constant(), kp.as_constant()) {
        return CurvatureField::constant(c1 + c2);
    }
    let n = space.grid();
    let mut pts = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = space.node(i);
        pts.push((x - a, k.eval(x)? + kp.eval((x - a).min(kp.length()))));
    }
    Ok(CurvatureField::grid(a, CoefficientFn::table(&pts)?, false))
}

/// `(X, d, V^{N'}m)` checked for `CD(k + k', N + N')`, after confirming that
/// `V` is `(k'/N')V`-convex. The endpoint measures keep their Lebesgue
/// densities; only their densities against the new reference measure change.
#[allow(clippy::too_many_arguments)]
pub fn check_weighted_measure(
    space: &WeightedInterval,
    v: &SampledFunction,
    k_prime: &CoefficientFn,
    n_prime: f64,
    mu0: &Measure1D,
    mu1: &Measure1D,
    cfg: &CdConfig,
    convexity: &ConvexityConfig,
) -> Result<CdReport> {
    let cert = space
        .certificate()
        .ok_or_else(|| Error::HypothesisFailed("the base space carries no CD certificate".into()))?;
    if !(n_prime > 0.0 && n_prime.is_finite()) {
        return Err(invalid(format!("N' must be positive, got {n_prime}")));
    }
    if (v.start() - space.start()).abs() > 1e-12 || (v.end() - space.end()).abs() > 1e-12 {
        return Err(Error::DomainMismatch("V must be sampled over the whole space".into()));
    }
    let pre = check_distortion_form(v, &k_prime.scaled(1.0 / n_prime), Scope::AllGeodesics, convexity)?;
    if !pre.holds {
        return Err(Error::HypothesisFailed(format!(
            "V is not (k'/N')V-convex: worst relative slack {} at {:?}",
            pre.worst_slack, pre.worst_at
        )));
    }
    let weight = space.weight().times(&Weight::Table(v.clone()).pow(n_prime));
    let field = field_sum(space, &cert.field, k_prime)?;
    let n = cert.dimension + n_prime;
    let weighted = WeightedInterval::new(space.start(), space.end(), weight, space.grid())?.with_certificate(field.clone(), n);
    let (m0, m1) = (mu0.rebased(&weighted)?, mu1.rebased(&weighted)?);
    let mut rep = check_pointwise_cd(&weighted, &field, n, &m0, &m1, cfg)?;
    rep.form = CheckForm::WeightedMeasure;
    Ok(rep)
}

/// Relative slack `(lhs − rhs)/rhs` of
/// `τ_{k1,N1}^(t)(θ1)^{N1} · τ_{k2,N2}^(t)(θ2)^{N2} ≥ τ_{k,N1+N2}^(t)(θ)^{N1+N2}`.
fn claim_slack(
    t1: ExtendedNonNeg,
    n1: f64,
    t2: ExtendedNonNeg,
    n2: f64,
    t12: ExtendedNonNeg,
) -> f64 {
    let lhs = t1.powf(n1).mul(t2.powf(n2));
    let rhs = t12.powf(n1 + n2);
    match (lhs.finite(), rhs.finite()) {
        (_, None) if lhs.is_infinite() => 0.0,
        (None, _) => f64::INFINITY,
        (Some(_), None) => f64::NEG_INFINITY,
        (Some(l), Some(r)) if r > 0.0 => (l - r) / r,
        (Some(l), Some(r)) => l - r,
    }
}

/// The tensorization coefficient inequality for constant curvatures.
pub fn tensor_coefficient_slack(k1: f64, n1: f64, theta1: f64, k2: f64, n2: f64, theta2: f64, t: f64, cfg: &DistortionConfig) -> Result<f64> {
    let theta = theta1.hypot(theta2);
    let len = theta.max(1e-300);
    let c = |k: f64| CoefficientFn::constant(k, len);
    let a = TauProfile::new(&c(k1)?, n1, theta1, cfg)?.at(t);
    let b = TauProfile::new(&c(k2)?, n2, theta2, cfg)?.at(t);
    let m = TauProfile::new(&c(k1.min(k2))?, n1 + n2, theta, cfg)?.at(t);
    Ok(claim_slack(a, n1, b, n2, m))
}

/// Factor coefficient stretched onto the product arclength.
fn onto(kappa: &CoefficientFn, theta_i: f64, theta: f64) -> Result<CoefficientFn> {
    if theta_i == 0.0 {
        return CoefficientFn::constant(kappa.eval(0.0), theta);
    }
    kappa.remapped(theta_i / theta, 0.0, theta)
}

/// Pointwise `CD(min(k1, k2), N1 + N2)` along the product rays `(j, l)`, plus
/// the coefficient inequality on every encountered `(θ1, θ2)`.
pub fn check_tensorization(
    product: &ProductSpace,
    mu0: (&Measure1D, &Measure1D),
    mu1: (&Measure1D, &Measure1D),
    cfg: &CdConfig,
) -> Result<CdReport> {
    let (c1, c2) = product
        .certificates()
        .ok_or_else(|| Error::HypothesisFailed("both factors need CD certificates".into()))?;
    for m in [mu0.0, mu1.0] {
        if (m.space().start(), m.space().end()) != (product.first.start(), product.first.end()) {
            return Err(Error::NotFactorized);
        }
    }
    for m in [mu0.1, mu1.1] {
        if (m.space().start(), m.space().end()) != (product.second.start(), product.second.end()) {
            return Err(Error::NotFactorized);
        }
    }
    let (n1, n2) = (c1.dimension, c2.dimension);
    let n = n1 + n2;
    let times = cfg.interior_times()?;
    let field = c1.field.min(&c2.field);
    let claim = std::sync::Mutex::new(f64::INFINITY);
    let info = CheckInfo {
        condition: Condition::Cd,
        form: CheckForm::Tensorization,
        field: &field,
        n: Some(n),
        n_primes: vec![n],
    };
    let mut rep = report(info, cfg, |q| {
        let pc = ProductCoupling::new(mu0, mu1, q)?;
        let slices = times.iter().map(|&t| pc.slice(product, t)).collect::<Result<Vec<_>>>()?;
        let factor = |c: &Coupling, f: &CurvatureField| -> Result<Vec<CoefficientFn>> {
            (0..c.len()).map(|j| field_along(f, c.x0[j], c.x1[j])).collect()
        };
        let k1s = factor(&pc.first, &c1.field)?;
        let k2s = factor(&pc.second, &c2.field)?;
        let p = -1.0 / n;
        let qn = pc.first.len();
        let parts = (0..qn * pc.second.len())
            .into_par_iter()
            .map(|idx| -> Result<(Best, f64)> {
                let (j, l) = (idx / pc.second.len(), idx % pc.second.len());
                let (th1, th2) = (pc.first.theta(j), pc.second.theta(l));
                let theta = th1.hypot(th2);
                let mut best = Best::none();
                let mut claim = f64::INFINITY;
                if theta == 0.0 {
                    for s in &slices {
                        let r0 = pc.first.rho0[j] * pc.second.rho0[l];
                        let lhs = s.density(j, l).powf(p);
                        best.offer(
                            lhs - r0.powf(p),
                            CdWitness {
                                t: s.t,
                                j: Some(j),
                                l: Some(l),
                                n_prime: None,
                            },
                        );
                    }
                    return Ok((best, claim));
                }
                let kappa = onto(&k1s[j], th1, theta)?.pointwise_min(&onto(&k2s[l], th2, theta)?);
                let prof = RayProfile::new(&kappa, theta, Coefficient::Tau(n), &cfg.distortion)?;
                let f1 = RayProfile::new(&k1s[j], th1, Coefficient::Tau(n1), &cfg.distortion)?;
                let f2 = RayProfile::new(&k2s[l], th2, Coefficient::Tau(n2), &cfg.distortion)?;
                let r0 = (pc.first.rho0[j] * pc.second.rho0[l]).powf(p);
                let r1 = (pc.first.rho1[j] * pc.second.rho1[l]).powf(p);
                for s in &slices {
                    let (cm, cp) = prof.at(s.t);
                    best.offer(
                        slack(s.density(j, l).powf(p), cm, r0, cp, r1),
                        CdWitness {
                            t: s.t,
                            j: Some(j),
                            l: Some(l),
                            n_prime: None,
                        },
                    );
                    let (a_m, a_p) = f1.at(s.t);
                    let (b_m, b_p) = f2.at(s.t);
                    claim = claim.min(claim_slack(a_p, n1, b_p, n2, cp)).min(claim_slack(a_m, n1, b_m, n2, cm));
                }
                Ok((best, claim))
            })
            .collect::<Vec<_>>();
        let mut best = Best::none();
        let mut worst_claim = f64::INFINITY;
        for part in parts {
            let (b, c) = part?;
            best = best.merge(b);
            worst_claim = worst_claim.min(c);
        }
        let mut g = claim.lock().unwrap();
        *g = g.min(worst_claim);
        Ok(best)
    })?;
    rep.coefficient_claim_slack = Some(claim.into_inner().unwrap());
    Ok(rep)
}
