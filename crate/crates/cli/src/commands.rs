use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use curvdim::cd_check::{
    check_cd_infinity, check_entropy_cd, check_pointwise_cd, check_reduced_cd, check_tensorization, check_weighted_measure,
    pointwise_slacks, CdConfig, CdReport,
};
use curvdim::convexity::{
    check_distortion_form, check_distributional, check_green, check_kappa_n_convex, ConvexityConfig, ConvexityVerdict, Scope,
};
use curvdim::curvature_field::{CurvatureField, GeodesicSegment};
use curvdim::distortion::{BorderlinePolicy, DistortionConfig, DistortionProfile, TauProfile};
use curvdim::expr::parse_field_expr;
use curvdim::geometry::{
    bishop_gromov_check, brunn_minkowski_check, doubling_bound, doubling_ratios, schneider_bound,
    schneider_oscillation_witness, BgBound, BmConfig,
};
use curvdim::io::{read_pairs, read_sampled, write_columns, write_rows, write_table};
use curvdim::spaces::{model_space, product, FieldScaling, InitialData, Weight, WeightedInterval, DEFAULT_GRID};
use curvdim::sturm::{generalized_sin, SolverConfig};
use curvdim::suite::{run_criterion, SuiteOptions, CRITERIA};
use curvdim::transport::Measure1D;

use crate::config::Config;
use crate::CliError;

/// What a command hands back: the JSON result and whether every verdict passed.
pub struct Outcome {
    pub result: Value,
    pub passed: bool,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

// ---------------------------------------------------------------- builders

fn field(cfg: &mut Config, section: &str, key: &str, default: Option<&str>) -> Result<CurvatureField, CliError> {
    let text = match default {
        Some(d) => cfg.str_or(section, key, d),
        None => cfg.str(section, key)?,
    };
    let scale_key = format!("{key}_times_n_minus_1");
    let dim = if cfg.bool_or(section, &scale_key, false)? {
        Some(cfg.f64(section, "n")?)
    } else {
        None
    };
    Ok(parse_field_expr(&text)?.to_field(cfg.base(), dim)?)
}

fn solver(cfg: &mut Config) -> Result<SolverConfig, CliError> {
    Ok(SolverConfig::default().with_rtol(cfg.f64_or("params", "rtol", SolverConfig::default().rtol)?))
}

fn distortion_cfg(cfg: &mut Config) -> Result<DistortionConfig, CliError> {
    let policy = match cfg.choice("params", "borderline", "reject", &["reject", "infinite"])?.as_str() {
        "infinite" => BorderlinePolicy::Infinite,
        _ => BorderlinePolicy::Reject,
    };
    let mut d = DistortionConfig::default().with_solver(solver(cfg)?).with_policy(policy);
    d.zero_tol = cfg.f64_or("params", "zero_tol", d.zero_tol)?;
    Ok(d)
}

/// `[space]`-like section: `kind = lebesgue | model | weighted`.
fn space(cfg: &mut Config, section: &str) -> Result<WeightedInterval, CliError> {
    let kind = cfg.choice(section, "kind", "lebesgue", &["lebesgue", "model", "weighted"])?;
    let a = cfg.f64(section, "a")?;
    let b = cfg.f64(section, "b")?;
    let grid = cfg.usize_or(section, "grid", DEFAULT_GRID)?;
    let n = cfg.f64(section, "n")?;
    let s = match kind.as_str() {
        "model" => {
            let ode = parse_field_expr(&cfg.str(section, "ode_field")?)?.to_field(cfg.base(), None)?;
            let init = InitialData {
                u0: cfg.f64(section, "u0")?,
                v0: cfg.f64(section, "v0")?,
            };
            let scaling = match cfg.choice(section, "scaling", "dimension", &["dimension", "literal"])?.as_str() {
                "literal" => FieldScaling::Literal,
                _ => FieldScaling::DimensionScaled,
            };
            model_space(&ode, n, a, b, init, scaling, &solver(cfg)?)?
        }
        "weighted" => {
            let w = read_sampled(&cfg.file(section, "weight")?)?;
            let k = field(cfg, section, "field", None)?;
            WeightedInterval::new(a, b, Weight::Table(w), grid)?.with_certificate(k, n)
        }
        _ => {
            let k = field(cfg, section, "field", Some("const:0"))?;
            WeightedInterval::lebesgue(a, b)?.with_certificate(k, n)
        }
    };
    Ok(s.with_grid(grid))
}

/// `uniform:lo,hi` or `table:path` (rows `x,rho`, density against the
/// reference measure).
fn measure(cfg: &mut Config, space: &WeightedInterval, section: &str, key: &str) -> Result<Measure1D, CliError> {
    let text = cfg.str(section, key)?;
    let bad = |m: &str| CliError::Usage(format!("[{section}] {key}: {m}"));
    if let Some(rest) = text.strip_prefix("uniform:") {
        let parts: Vec<f64> = rest
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("expected uniform:lo,hi"))?;
        if parts.len() != 2 {
            return Err(bad("expected uniform:lo,hi"));
        }
        Ok(Measure1D::uniform(space, parts[0], parts[1])?)
    } else if let Some(path) = text.strip_prefix("table:") {
        let (xs, rho): (Vec<f64>, Vec<f64>) = read_pairs(&cfg.path(path.trim()))?.into_iter().unzip();
        Ok(Measure1D::from_density(space, xs, rho, true)?)
    } else {
        Err(bad("expected uniform:lo,hi or table:<path>"))
    }
}

fn fmt_ext(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        v.to_string()
    }
}

// ---------------------------------------------------------------- commands

pub fn sin(cfg: &mut Config, out: &Path) -> Result<Outcome, CliError> {
    let k = field(cfg, "params", "field", None)?;
    let start = cfg.f64_or("params", "start", 0.0)?;
    let length = cfg.f64("params", "length")?;
    let points = cfg.usize_or("params", "points", 201)?.max(2);
    let solver = solver(cfg)?;
    cfg.finish()?;
    let coef = k.restrict_along(&GeodesicSegment::new(start, start + length))?;
    let s = generalized_sin(&coef, length, &solver)?;
    let rows: Vec<Vec<f64>> = (0..points)
        .map(|i| {
            let t = length * i as f64 / (points - 1) as f64;
            vec![t, s.eval(t), s.eval_derivative(t)]
        })
        .collect();
    write_columns(&out.join("sin.csv"), &["t", "s", "c"], &rows)?;
    Ok(Outcome {
        result: json!({ "first_zero": s.first_zero(), "steps": s.trajectory().step_count(), "artifact": "sin.csv" }),
        passed: true,
    })
}

pub fn distortion(cfg: &mut Config, out: &Path) -> Result<Outcome, CliError> {
    let k = field(cfg, "params", "field", None)?;
    let start = cfg.f64_or("params", "start", 0.0)?;
    let thetas = cfg.list("params", "thetas")?;
    let ts = cfg.list_or("params", "ts", &[0.0, 0.25, 0.5, 0.75, 1.0])?;
    let n = cfg.opt_f64("params", "n")?;
    let dcfg = distortion_cfg(cfg)?;
    cfg.finish()?;
    let mut header = vec!["theta", "t", "sigma"];
    if n.is_some() {
        header.extend(["sigma_kn", "tau_kn"]);
    }
    let mut rows = Vec::new();
    let mut infinite = 0usize;
    for &theta in &thetas {
        let coef = k.restrict_along(&GeodesicSegment::new(start, start + theta))?;
        let sig = DistortionProfile::new(&coef, theta, &dcfg)?;
        infinite += usize::from(sig.is_infinite());
        let extra = match n {
            Some(n) => Some((DistortionProfile::new(&coef.scaled(1.0 / n), theta, &dcfg)?, TauProfile::new(&coef, n, theta, &dcfg)?)),
            None => None,
        };
        for &t in &ts {
            let mut row = vec![theta.to_string(), t.to_string(), fmt_ext(sig.at(t).to_f64())];
            if let Some((s, tau)) = &extra {
                row.push(fmt_ext(s.at(t).to_f64()));
                row.push(fmt_ext(tau.at(t).to_f64()));
            }
            rows.push(row);
        }
    }
    write_table(&out.join("distortion.csv"), &header, &rows)?;
    Ok(Outcome {
        result: json!({ "rows": thetas.len() * ts.len(), "infinite_profiles": infinite, "artifact": "distortion.csv" }),
        passed: true,
    })
}

pub fn convexity(cfg: &mut Config) -> Result<Outcome, CliError> {
    let u = read_sampled(&cfg.file("params", "u")?)?;
    let k = field(cfg, "params", "kappa", None)?;
    let form = cfg.choice("params", "form", "all", &["all", "distributional", "green", "distortion"])?;
    let scope = match cfg.opt_f64("params", "max_length")? {
        Some(l) => Scope::ShortGeodesics(l),
        None => Scope::AllGeodesics,
    };
    let n = cfg.opt_f64("params", "n")?;
    let ccfg = ConvexityConfig {
        tol: cfg.f64_or("params", "tol", ConvexityConfig::default().tol)?,
        distortion: distortion_cfg(cfg)?,
        ..ConvexityConfig::default()
    };
    cfg.finish()?;
    let kappa = k.restrict_along(&GeodesicSegment::new(u.start(), u.end()))?;
    let verdicts: Vec<ConvexityVerdict> = if let Some(n) = n {
        vec![check_kappa_n_convex(&u, &kappa, n, scope, &ccfg)?]
    } else {
        let mut v = Vec::new();
        if matches!(form.as_str(), "all" | "distributional") {
            v.push(check_distributional(&u, &kappa, &ccfg)?);
        }
        if matches!(form.as_str(), "all" | "green") {
            v.push(check_green(&u, &kappa, scope, &ccfg)?);
        }
        if matches!(form.as_str(), "all" | "distortion") {
            v.push(check_distortion_form(&u, &kappa, scope, &ccfg)?);
        }
        v
    };
    Ok(Outcome {
        passed: verdicts.iter().all(|v| v.holds),
        result: to_json(&verdicts),
    })
}

fn cd_config(cfg: &mut Config, default_q: usize) -> Result<CdConfig, CliError> {
    let d = CdConfig::default();
    Ok(CdConfig {
        q: cfg.usize_or("params", "q", default_q)?,
        t_grid: cfg.list_or("params", "t_grid", &d.t_grid)?,
        tol: cfg.f64_or("params", "tol", d.tol)?,
        refine: cfg.bool_or("params", "refine", d.refine)?,
        distortion: distortion_cfg(cfg)?,
    })
}

pub fn cd(cfg: &mut Config, out: &Path) -> Result<Outcome, CliError> {
    let s = space(cfg, "space")?;
    let cert = s.certificate().expect("configured spaces are certified").clone();
    let form = cfg.choice("params", "form", "pointwise", &["pointwise", "entropy", "reduced", "infinity", "weighted", "all"])?;
    let k = if cfg.has("params", "field") {
        field(cfg, "params", "field", None)?
    } else {
        cert.field.clone()
    };
    let n = cfg.f64_or("params", "n", cert.dimension)?;
    let n_primes = cfg.list_or("params", "n_primes", &[n])?;
    let mu0 = measure(cfg, &s, "measures", "mu0")?;
    let mu1 = measure(cfg, &s, "measures", "mu1")?;
    let weighted = if form == "weighted" {
        let v = read_sampled(&cfg.file("params", "v")?)?;
        let kp = field(cfg, "params", "k_prime", None)?.restrict_along(&GeodesicSegment::new(s.start(), s.end()))?;
        Some((v, kp, cfg.f64("params", "n_prime")?))
    } else {
        None
    };
    let ccfg = cd_config(cfg, 512)?;
    cfg.finish()?;
    let mut reports: Vec<CdReport> = Vec::new();
    let all = form == "all";
    if all || form == "pointwise" {
        reports.push(check_pointwise_cd(&s, &k, n, &mu0, &mu1, &ccfg)?);
        write_rows(&out.join("cd_slacks.csv"), &pointwise_slacks(&s, &k, n, &mu0, &mu1, &ccfg)?)?;
    }
    if all || form == "entropy" {
        reports.push(check_entropy_cd(&s, &k, n, &mu0, &mu1, &n_primes, &ccfg)?);
    }
    if all || form == "reduced" {
        reports.push(check_reduced_cd(&s, &k, n, &mu0, &mu1, &ccfg)?);
    }
    if all || form == "infinity" {
        reports.push(check_cd_infinity(&s, &k, &mu0, &mu1, &ccfg)?);
    }
    if let Some((v, kp, np)) = weighted {
        reports.push(check_weighted_measure(&s, &v, &kp, np, &mu0, &mu1, &ccfg, &ConvexityConfig::default())?);
    }
    Ok(Outcome {
        passed: reports.iter().all(CdReport::passed),
        result: to_json(&reports),
    })
}

pub fn bm(cfg: &mut Config, out: &Path) -> Result<Outcome, CliError> {
    let s = space(cfg, "space")?;
    let cert = s.certificate().expect("configured spaces are certified").clone();
    let k = if cfg.has("params", "field") {
        field(cfg, "params", "field", None)?
    } else {
        cert.field.clone()
    };
    let n = cfg.f64_or("params", "n", cert.dimension)?;
    let a0 = cfg.interval("params", "a0")?;
    let a1 = cfg.interval("params", "a1")?;
    let t_grid = cfg.list_or("params", "t_grid", &[0.25, 0.5, 0.75])?;
    let bcfg = BmConfig {
        pair_points: cfg.usize_or("params", "pair_points", BmConfig::default().pair_points)?,
        tol: cfg.f64_or("params", "tol", BmConfig::default().tol)?,
        distortion: distortion_cfg(cfg)?,
    };
    cfg.finish()?;
    let r = brunn_minkowski_check(&s, &k, n, a0, a1, &t_grid, &bcfg)?;
    write_rows(&out.join("bm.csv"), &r.rows)?;
    Ok(Outcome {
        passed: r.holds,
        result: to_json(&r),
    })
}

pub fn bg(cfg: &mut Config, out: &Path) -> Result<Outcome, CliError> {
    let s = space(cfg, "space")?;
    let x0 = cfg.f64("params", "x0")?;
    let n = cfg.f64_or("params", "n", s.certificate().map_or(1.0, |c| c.dimension))?;
    let bound = match (cfg.has("params", "k_low"), cfg.has("params", "envelope")) {
        (true, false) => BgBound::Constant(cfg.f64("params", "k_low")?),
        (false, true) => BgBound::RadialEnvelope(field(cfg, "params", "envelope", None)?),
        _ => return Err(CliError::Usage("[params] give exactly one of k_low or envelope".into())),
    };
    let rs = cfg.list("params", "r")?;
    let big_rs = cfg.list("params", "big_r")?;
    if rs.len() != big_rs.len() {
        return Err(CliError::Usage("[params] r and big_r need the same length".into()));
    }
    let solver = solver(cfg)?;
    cfg.finish()?;
    let reports = rs
        .iter()
        .zip(&big_rs)
        .map(|(&r, &big_r)| bishop_gromov_check(&s, x0, n, &bound, r, big_r, &solver))
        .collect::<curvdim::Result<Vec<_>>>()?;
    write_rows(&out.join("bg.csv"), &reports)?;
    Ok(Outcome {
        passed: reports.iter().all(|r| r.holds),
        result: to_json(&reports),
    })
}

pub fn doubling(cfg: &mut Config, out: &Path) -> Result<Outcome, CliError> {
    let s = space(cfg, "space")?;
    let k_low = cfg.f64("params", "k_low")?;
    let n = cfg.f64_or("params", "n", s.certificate().map_or(1.0, |c| c.dimension))?;
    let l = cfg.f64_or("params", "l", s.diameter())?;
    let centres = cfg.list("params", "centres")?;
    let radii = cfg.list("params", "radii")?;
    cfg.finish()?;
    let bound = doubling_bound(k_low, n, l);
    let rows: Vec<Vec<f64>> = doubling_ratios(&s, &centres, &radii)
        .into_iter()
        .map(|(x, r, ratio)| vec![x, r, ratio, bound])
        .collect();
    write_columns(&out.join("doubling.csv"), &["x", "r", "ratio", "bound"], &rows)?;
    let worst = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    Ok(Outcome {
        passed: worst <= bound * (1.0 + 1e-9),
        result: json!({ "bound": bound, "max_ratio": worst, "artifact": "doubling.csv" }),
    })
}

pub fn schneider(cfg: &mut Config) -> Result<Outcome, CliError> {
    let c = cfg.f64("params", "c")?;
    let n = cfg.f64("params", "n")?;
    let big_r = cfg.f64("params", "big_r")?;
    let delta = cfg.f64("params", "delta")?;
    let d = cfg.opt_f64("params", "d")?;
    let eps = cfg.f64_or("params", "eps", 0.1)?;
    let solver = solver(cfg)?;
    cfg.finish()?;
    let bound = schneider_bound(c, n, big_r, delta)?;
    let witness = d.map(|d| schneider_oscillation_witness(c, n, d, eps, &solver)).transpose()?;
    let passed = witness.is_none_or(|w| w.zero_before_end);
    Ok(Outcome {
        result: json!({ "diameter_bound": bound, "witness": witness }),
        passed,
    })
}

pub fn tensor(cfg: &mut Config) -> Result<Outcome, CliError> {
    let s1 = space(cfg, "space1")?;
    let s2 = space(cfg, "space2")?;
    let m01 = measure(cfg, &s1, "measures", "mu0_1")?;
    let m11 = measure(cfg, &s1, "measures", "mu1_1")?;
    let m02 = measure(cfg, &s2, "measures", "mu0_2")?;
    let m12 = measure(cfg, &s2, "measures", "mu1_2")?;
    let ccfg = cd_config(cfg, 256)?;
    cfg.finish()?;
    let p = product(s1, s2);
    let r = check_tensorization(&p, (&m01, &m02), (&m11, &m12), &ccfg)?;
    Ok(Outcome {
        passed: r.passed(),
        result: to_json(&r),
    })
}

pub fn suite(cfg: &mut Config, out: &Path, seed: u64) -> Result<Outcome, CliError> {
    let all: Vec<f64> = CRITERIA.iter().map(|(i, _)| f64::from(*i)).collect();
    let ids = cfg.list_or("params", "criteria", &all)?;
    cfg.finish()?;
    let opts = SuiteOptions { seed };
    let mut results = Vec::new();
    for id in ids {
        if id.fract() != 0.0 || !(1.0..=10.0).contains(&id) {
            return Err(CliError::Usage(format!("[params] criteria: no criterion {id}")));
        }
        let r = run_criterion(id as u32, &opts)?;
        eprintln!(
            "{:>2}  {:<24} {}  measured {:>11.3e}  threshold {:>10.3e}  {:>7.2} s",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.measured,
            r.threshold,
            r.elapsed_s
        );
        results.push(r);
    }
    // timings stay out of the CSV so that reruns are byte-identical
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| vec![r.id.to_string(), r.name.to_string(), r.passed.to_string(), r.measured.to_string(), r.threshold.to_string()])
        .collect();
    write_table(&out.join("suite.csv"), &["id", "name", "passed", "measured", "threshold"], &rows)?;
    Ok(Outcome {
        passed: results.iter().all(|r| r.passed),
        result: to_json(&results),
    })
}
