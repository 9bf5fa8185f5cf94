use std::f64::consts::TAU;

use gindex_core::bundle::{build_idempotent, check_idempotent, chern_form, chern_form_closedform, chern_number};
use gindex_core::check::Check;
use gindex_core::contact::{
    contact_condition, contact_form, evaluate_one_form, horizontal_frame, min_gram_determinant, reeb_field,
    reeb_residual, verify_lift, verify_lift_against, VectorField,
};
use gindex_core::index::{gamma_index_check, index_report};
use gindex_core::operator::{assemble_P, ellipticity_margin, ellipticity_margin_of, singular_diagnostics, BundleChoice};
use gindex_core::suites::{cs_suite, gamma_suite, operator_suite, run_suite, SuiteOptions, GAMMA_ORDERS};
use gindex_core::torus::{exterior_derivative, integrate_top, wedge, Grid};
use gindex_core::{par, C64};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Table;

pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    pub table: Option<Table>,
}

impl Outcome {
    fn new(results: Value, checks: Vec<Check>) -> Self {
        Self {
            results,
            checks,
            table: None,
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command.as_str() {
        "chern" => chern(cfg),
        "contact-check" => contact_check(cfg),
        "reeb" => reeb(cfg),
        "ellipticity" => ellipticity(cfg),
        "operator-diagnostics" => operator_diagnostics(cfg),
        "index" => index(cfg),
        "gamma-check" => gamma_check(cfg),
        "cs-sandbox" => cs_sandbox(cfg),
        "gamma-trace-suite" => gamma_trace_suite(cfg),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    }
}

pub fn suite(name: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opts = SuiteOptions {
        seed: cfg.seed()?,
        trials: cfg.trials,
    };
    let checks = run_suite(name, &opts)?;
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(Outcome::new(
        json!({ "suite": name, "checks_run": checks.len(), "checks_passed": passed }),
        checks,
    ))
}

const CHERN_SIZES: [(usize, f64); 3] = [(32, 1e-4), (64, 1e-6), (128, 1e-8)];

fn chern(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let profile = cfg.profile()?;
    let grid = Grid::cube(2, cfg.n)?;
    let e = build_idempotent(&profile, &grid)?;
    let value = chern_number(&e)?;
    let diag = check_idempotent(&e, 1e-12);
    let form = chern_form(&e)?;
    let closed = chern_form_closedform(&profile, &grid)?;
    let closed_dev = form.sub(&closed)?.max_abs();

    let mut convergence = Vec::new();
    for (n, _) in CHERN_SIZES {
        let c = chern_number(&build_idempotent(&profile, &Grid::cube(2, n)?)?)?;
        convergence.push(json!({ "n": n, "chern": c, "error": (c + 1.0).abs() }));
    }
    let errors: Vec<f64> = convergence.iter().map(|p| p["error"].as_f64().unwrap_or(f64::NAN)).collect();
    let settled = errors.windows(2).all(|w| w[1] <= w[0] || w[1] <= 1e-12);

    let mut checks = vec![Check::at_most("chern.error", (value + 1.0).abs(), cfg.tol.unwrap_or(1e-6))];
    for ((n, bound), err) in CHERN_SIZES.iter().zip(&errors) {
        checks.push(Check::at_most(format!("chern.convergence_n{n}"), *err, *bound));
    }
    checks.push(Check::holds("chern.convergence_monotone_or_plateaued", settled));
    checks.push(Check::at_most("chern.idempotency", diag.idempotency, 1e-12));
    checks.push(Check::at_most("chern.hermiticity", diag.hermiticity, 1e-12));
    checks.push(Check::at_most("chern.trace_one", diag.trace, 1e-12));
    checks.push(Check::at_most("chern.form_imaginary", form.max_imag(), 1e-10));
    checks.push(Check::at_most("chern.closed_form_agreement", closed_dev, 1e-8));
    Ok(Outcome::new(
        json!({
            "chern": value,
            "closed_form_integral": integrate_top(&closed)?.re,
            "closed_form_max_deviation": closed_dev,
            "idempotent": diag,
            "convergence": convergence,
        }),
        checks,
    ))
}

fn contact_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = Grid::cube(3, cfg.n)?;
    let ks = cfg.ks.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let lift_tol = cfg.tol.unwrap_or(gindex_core::contact::LIFT_TOL);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &k in &ks {
        let theta = contact_form(k, &grid)?;
        let volume = integrate_top(&wedge(&theta, &exterior_derivative(&theta)?)?)?.re;
        let condition = contact_condition(&theta)?;
        let expect = k as f64 * TAU.powi(3);
        checks.push(Check::at_most(format!("contact.k{k}.volume"), (volume - expect).abs(), 1e-8));
        checks.push(Check::at_most(format!("contact.k{k}.condition"), (condition - k as f64).abs(), 1e-10));
        let lift = if k >= 2 {
            let r = verify_lift(k, &grid)?;
            checks.push(Check::at_most(format!("contact.k{k}.lift"), r.deviation, lift_tol));
            let neg = verify_lift_against(k, k + 1, &grid)?;
            checks.push(Check::holds(format!("contact.k{k}.lift_negative_control_fails"), !neg.pass));
            Some(r.deviation)
        } else {
            None
        };
        rows.push(json!({ "k": k, "volume": volume, "expected_volume": expect, "contact_condition": condition, "lift_deviation": lift }));
    }
    Ok(Outcome::new(json!({ "forms": rows }), checks))
}

fn reeb(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = Grid::cube(3, cfg.n)?;
    let ks = cfg.ks.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let tol = cfg.tol.unwrap_or(1e-10);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &k in &ks {
        let theta = contact_form(k, &grid)?;
        let t = reeb_field(&theta)?;
        let residual = reeb_residual(&theta, &t)?;
        let kf = k as f64;
        let oracle = VectorField::from_fn(&grid, |x| [(kf * x[2]).cos(), -(kf * x[2]).sin(), 0.0])?;
        let deviation = t.max_deviation(&oracle);
        let (x, y) = horizontal_frame(&theta)?;
        let annihilation = evaluate_one_form(&theta, &x)?.max_abs().max(evaluate_one_form(&theta, &y)?.max_abs());
        let gram = (min_gram_determinant(&x, &y, &t) - 1.0).abs();
        checks.push(Check::at_most(format!("reeb.k{k}.residual"), residual, tol));
        checks.push(Check::at_most(format!("reeb.k{k}.oracle"), deviation, tol));
        checks.push(Check::at_most(format!("reeb.k{k}.frame_horizontal"), annihilation, 1e-12));
        checks.push(Check::at_most(format!("reeb.k{k}.frame_gram"), gram, 1e-10));
        rows.push(json!({ "k": k, "residual": residual, "oracle_deviation": deviation, "frame_annihilation": annihilation, "gram_defect": gram }));
    }
    Ok(Outcome::new(json!({ "fields": rows }), checks))
}

fn ellipticity(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ls = cfg.ls.clone().unwrap_or_else(|| (-5..=5).collect());
    let tol = cfg.tol.unwrap_or(1e-9);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut table = Table {
        headers: vec!["l", "margin"],
        rows: Vec::new(),
    };
    for &l in &ls {
        let m = ellipticity_margin(l, cfg.n)?;
        checks.push(Check::at_most(format!("ellipticity.l{l}"), (m - 1.0).abs(), tol));
        rows.push(json!({ "l": l, "margin": m }));
        table.rows.push(vec![l.to_string(), m.to_string()]);
    }
    let control = ellipticity_margin_of(|z| C64::from_polar(1.0, z), cfg.n);
    checks.push(Check::at_most("ellipticity.negative_control", control, 1e-6));
    Ok(Outcome {
        results: json!({ "margins": rows, "negative_control_margin": control }),
        checks,
        table: Some(table),
    })
}

fn operator_diagnostics(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opts = SuiteOptions {
        seed: cfg.seed()?,
        trials: cfg.trials,
    };
    let grid = Grid::cube(3, cfg.n)?;
    let bundle = BundleChoice::pullback_of_e(&cfg.profile()?, &grid)?;
    let mut reports = Vec::new();
    for b in [BundleChoice::Trivial, bundle] {
        let op = assemble_P(cfg.k, cfg.l, &b, &grid)?;
        let r = singular_diagnostics(&op, 8)?;
        reports.push(json!({ "bundle": b.name(), "diagnostics": r }));
    }
    let checks = operator_suite(&opts)?;
    Ok(Outcome::new(
        json!({
            "truncations": reports,
            "note": "square truncations have equal kernel and cokernel counts; the Fredholm index is not visible to them",
        }),
        checks,
    ))
}

fn sweep_pairs(cfg: &RunConfig) -> Vec<(u32, i64)> {
    let ls = cfg.l_values();
    cfg.k_values()
        .into_iter()
        .flat_map(|k| ls.iter().map(move |&l| (k, l)))
        .collect()
}

fn index(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let profile = cfg.profile()?;
    let pairs = sweep_pairs(cfg);
    let tol = cfg.tol.unwrap_or(1e-8);
    let reports = par::map_tasks(pairs.len(), |i| index_report(pairs[i].0, pairs[i].1, &profile, cfg.n, &[]))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks = Vec::new();
    let mut table = Table {
        headers: vec!["k", "l", "n", "index_value", "wedge_value", "chern", "winding_integral"],
        rows: Vec::new(),
    };
    for r in &reports {
        let (k, l) = (r.k, r.l);
        checks.push(Check::at_most(format!("index.k{k}.l{l}"), (r.index_value - l as f64).abs(), tol));
        checks.push(Check::at_most(format!("index.k{k}.l{l}.paths"), r.path_discrepancy, 1e-8));
        table.rows.push(vec![
            k.to_string(),
            l.to_string(),
            r.n.to_string(),
            r.index_value.to_string(),
            r.wedge_value.to_string(),
            r.chern.to_string(),
            r.winding_integral.to_string(),
        ]);
    }
    let results = if reports.len() == 1 {
        json!(reports[0])
    } else {
        json!({ "reports": reports })
    };
    Ok(Outcome {
        results,
        checks,
        table: Some(table),
    })
}

fn gamma_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let profile = cfg.profile()?;
    let ks = cfg.ks.clone().unwrap_or_else(|| vec![2, 3]);
    let ls = cfg.ls.clone().unwrap_or_else(|| (-2..=2).collect());
    let pairs: Vec<(u32, i64)> = ks.iter().flat_map(|&k| ls.iter().map(move |&l| (k, l))).collect();
    let tol = cfg.tol.unwrap_or(1e-8);
    let reports = par::map_tasks(pairs.len(), |i| gamma_index_check(pairs[i].0, pairs[i].1, &profile, cfg.n))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks = Vec::new();
    let mut table = Table {
        headers: vec!["k", "l", "base", "cover", "pullback", "discrepancy"],
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    for (&(k, l), g) in pairs.iter().zip(&reports) {
        checks.push(Check::at_most(format!("gamma.k{k}.l{l}"), g.discrepancy, tol));
        checks.push(Check::at_most(format!("gamma.k{k}.l{l}.pullback"), g.pullback_discrepancy, tol));
        rows.push(json!({ "l": l, "base_value": l, "check": g }));
        table.rows.push(vec![
            k.to_string(),
            l.to_string(),
            g.base.to_string(),
            g.cover.to_string(),
            g.pullback.to_string(),
            g.discrepancy.to_string(),
        ]);
    }
    Ok(Outcome {
        results: json!({ "covers": rows }),
        checks,
        table: Some(table),
    })
}

fn cs_sandbox(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opts = SuiteOptions {
        seed: cfg.seed()?,
        trials: cfg.trials,
    };
    let checks = cs_suite(&opts)?;
    Ok(Outcome::new(json!({ "trials": opts.trials.unwrap_or(200) }), checks))
}

fn gamma_trace_suite(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opts = SuiteOptions {
        seed: cfg.seed()?,
        trials: cfg.trials,
    };
    let orders: Vec<usize> = match &cfg.ks {
        Some(ks) => ks.iter().map(|&k| k as usize).collect(),
        None => GAMMA_ORDERS.to_vec(),
    };
    let checks = gamma_suite(&opts, &orders)?;
    Ok(Outcome::new(
        json!({ "orders": orders, "trials": opts.trials.unwrap_or(50) }),
        checks,
    ))
}
