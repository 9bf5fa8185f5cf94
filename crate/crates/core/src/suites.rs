//! Seeded property suites. Every suite returns its checks instead of
//! panicking, so callers decide how to report them.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::bundle::{build_idempotent, check_idempotent, chern_form, chern_number, Mat2, ProfileTriple};
use crate::check::Check;
use crate::contact::{
    contact_condition, contact_form, pullback_by_cover, reeb_field, reeb_residual, verify_lift, verify_lift_against,
    VectorField,
};
use crate::fredholm::{
    cs_idempotent, index_trace, k_pairing, pseudo_parametrix, svd_index, verify_identities, StandardTrace,
};
use crate::gamma::{
    gamma_index, gamma_trace, induced_trace_on_k, lift_operator, random_equivariant, random_equivariant_unitary,
    FundamentalDomain,
};
use crate::fredholm::IdempotentPair;
use crate::index::{gamma_index_check, topological_index, winding_integral};
use crate::operator::{
    assemble_P, ellipticity_margin, ellipticity_margin_of, locality_check, singular_diagnostics, sublaplacian,
    z_cutoff, BundleChoice,
};
use crate::random::{complex_normal_matrix, random_unitary, seeded_rng};
use crate::torus::{
    exterior_derivative, integrate_top, make_grid, multi_indices, random_band_limited, spectral_derivative, wedge,
    DiffForm, Grid, GridFunction,
};
use crate::{par, Error, Result, C64};

/// Suites run by `all`, in order.
pub const SUITE_NAMES: [&str; 7] = ["spectral", "bundle", "contact", "operator", "cs", "gamma", "index"];

/// Deck group orders exercised by the Γ-trace suite.
pub const GAMMA_ORDERS: [usize; 3] = [2, 3, 5];

#[derive(Clone, Copy, Debug)]
#[derive(Default)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Overrides the suite's default trial count.
    pub trials: Option<usize>,
}


impl SuiteOptions {
    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<Check>> {
    match name {
        "spectral" => spectral_suite(opts),
        "bundle" => bundle_suite(opts),
        "contact" => contact_suite(opts),
        "operator" => operator_suite(opts),
        "cs" => cs_suite(opts),
        "gamma" => gamma_suite(opts, &GAMMA_ORDERS),
        "index" => index_suite(opts),
        "all" => {
            let mut out = Vec::new();
            for s in SUITE_NAMES {
                out.extend(run_suite(s, opts)?);
            }
            Ok(out)
        }
        other => Err(Error::InvalidParameter(format!("unknown suite `{other}`"))),
    }
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

fn random_form<R: Rng + ?Sized>(grid: &Grid, degree: usize, max_freq: i64, rng: &mut R) -> Result<DiffForm> {
    let terms: Vec<_> = multi_indices(grid.dim(), degree)
        .into_iter()
        .map(|idx| (idx, random_band_limited(grid, 1, max_freq, 4, rng)))
        .collect();
    DiffForm::from_coeffs(grid, degree, terms)
}

pub fn spectral_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let trials = opts.trials(100);
    let g3 = Grid::cube(3, 16)?;
    let g2 = Grid::cube(2, 16)?;
    let per_trial = par::map_tasks(trials, |t| -> Result<[f64; 3]> {
        let mut rng = seeded_rng(opts.seed, t as u64);
        let mut dd: f64 = 0.0;
        for degree in 0..=1 {
            let w = random_form(&g3, degree, 3, &mut rng)?;
            dd = dd.max(w.d()?.d()?.max_abs());
        }
        let mut leibniz: f64 = 0.0;
        for (p, q) in [(0, 0), (0, 1), (1, 1), (0, 2)] {
            let a = random_form(&g3, p, 3, &mut rng)?;
            let b = random_form(&g3, q, 3, &mut rng)?;
            let lhs = wedge(&a, &b)?.d()?;
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = wedge(&a.d()?, &b)?.add(&wedge(&a, &b.d()?)?.scale(C64::new(sign, 0.0)))?;
            leibniz = leibniz.max(lhs.sub(&rhs)?.max_abs() / rhs.max_abs().max(1.0));
        }
        let mut stokes: f64 = 0.0;
        for g in [&g2, &g3] {
            let w = random_form(g, g.dim() - 1, 3, &mut rng)?;
            stokes = stokes.max(integrate_top(&exterior_derivative(&w)?)?.norm());
        }
        Ok([dd, leibniz, stokes])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let line = make_grid(1, &[32])?;
    let mut exact: f64 = 0.0;
    for w in -15i64..=15 {
        let f = GridFunction::from_fn(&line, |x| C64::from_polar(1.0, w as f64 * x[0]));
        let df = spectral_derivative(&f, 0)?;
        let err = (&df - &f.scale(C64::new(0.0, w as f64))).max_abs();
        exact = exact.max(err / (w.abs().max(1) as f64));
    }
    Ok(vec![
        Check::at_most("spectral.d_squared_zero", max_of(per_trial.iter().map(|r| r[0])), 1e-10),
        Check::at_most("spectral.leibniz", max_of(per_trial.iter().map(|r| r[1])), 1e-9),
        Check::at_most("spectral.stokes", max_of(per_trial.iter().map(|r| r[2])), 1e-10),
        Check::at_most("spectral.derivative_exact_on_modes", exact, 1e-12),
    ])
}

pub fn bundle_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let p = ProfileTriple::default();
    let sizes = [32usize, 64, 128];
    let bounds = [1e-4, 1e-6, 1e-8];
    let fields = sizes
        .iter()
        .map(|&n| build_idempotent(&p, &Grid::cube(2, n)?))
        .collect::<Result<Vec<_>>>()?;
    let identities = max_of(fields.iter().map(|e| {
        let r = check_idempotent(e, 0.0);
        r.idempotency.max(r.hermiticity).max(r.trace)
    }));
    let cherns = fields.iter().map(chern_number).collect::<Result<Vec<_>>>()?;
    let mut checks = vec![Check::at_most("bundle.idempotent_identities", identities, 1e-12)];
    for ((n, c), b) in sizes.iter().zip(&cherns).zip(bounds) {
        checks.push(Check::at_most(format!("bundle.chern_error_n{n}"), (c + 1.0).abs(), b));
    }
    let spread = max_of(cherns.iter().map(|c| (c - cherns[1]).abs()));
    checks.push(Check::at_most("bundle.chern_invariant_in_n", spread, 1e-6));
    let e64 = &fields[1];
    checks.push(Check::at_most("bundle.chern_form_imaginary", chern_form(e64)?.max_imag(), 1e-10));
    let reversed = chern_number(&build_idempotent(&p.reversed(), &Grid::cube(2, 64)?)?)?;
    checks.push(Check::at_most("bundle.reversed_profile_chern", (reversed - 1.0).abs(), 1e-6));
    let mut rng = seeded_rng(opts.seed, 0);
    let mut gauge: f64 = 0.0;
    for _ in 0..opts.trials(5) {
        let u = random_unitary(&mut rng, 2);
        let u = Mat2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        gauge = gauge.max((chern_number(&e64.conjugate(&u))? - cherns[1]).abs());
    }
    checks.push(Check::at_most("bundle.chern_gauge_invariant", gauge, 1e-10));
    Ok(checks)
}

pub fn contact_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let grid = make_grid(3, &[16, 16, 64])?;
    let mut reeb: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    let mut condition: f64 = 0.0;
    let mut volume: f64 = 0.0;
    for k in 1..=3u32 {
        let theta = contact_form(k, &grid)?;
        let t = reeb_field(&theta)?;
        reeb = reeb.max(reeb_residual(&theta, &t)?);
        let kf = k as f64;
        let expect = VectorField::from_fn(&grid, |x| [(kf * x[2]).cos(), -(kf * x[2]).sin(), 0.0])?;
        oracle = oracle.max(t.max_deviation(&expect));
        condition = condition.max((contact_condition(&theta)? - kf).abs());
        let v = integrate_top(&wedge(&theta, &exterior_derivative(&theta)?)?)?;
        volume = volume.max((v - kf * TAU.powi(3)).norm());
    }
    let lift = max_of(
        [2u32, 3]
            .iter()
            .map(|&k| verify_lift(k, &grid).map(|r| r.deviation))
            .collect::<Result<Vec<_>>>()?,
    );
    let negative = !verify_lift_against(2, 3, &grid)?.pass;
    let dz = DiffForm::basis(&grid, &[2])?;
    let foliation = contact_condition(&dz)? == 0.0;

    let mut rng = seeded_rng(opts.seed, 0);
    let mut functorial: f64 = 0.0;
    for _ in 0..opts.trials(10) {
        let w = random_form(&grid, 1, 2, &mut rng)?;
        let two_then_three = pullback_by_cover(2, &pullback_by_cover(3, &w)?)?;
        let six = pullback_by_cover(6, &w)?;
        functorial = functorial.max(two_then_three.sub(&six)?.max_abs());
    }
    Ok(vec![
        Check::at_most("contact.reeb_equations", reeb, 1e-10),
        Check::at_most("contact.reeb_oracle", oracle, 1e-10),
        Check::at_most("contact.condition_equals_k", condition, 1e-10),
        Check::at_most("contact.volume_integral", volume, 1e-8),
        Check::at_most("contact.lift_deviation", lift, 1e-12),
        Check::holds("contact.lift_negative_control_fails", negative),
        Check::holds("contact.dz_is_not_contact", foliation),
        Check::at_most("contact.pullback_functorial", functorial, 1e-10),
    ])
}

/// Operator invariants: range preservation, adjoint pairing, sum-of-squares
/// structure, the Fourier-mode oracle, ellipticity, locality and gauge
/// covariance.
pub fn operator_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let trials = opts.trials(50);
    let grid = Grid::cube(3, 16)?;
    let bundle = BundleChoice::pullback_of_e(&ProfileTriple::default(), &grid)?;
    let p = assemble_P(1, 1, &bundle, &grid)?;
    let lap = sublaplacian(1, &bundle, &grid)?;
    let per_trial = par::map_tasks(trials, |t| -> Result<[f64; 5]> {
        let mut rng = seeded_rng(opts.seed, t as u64);
        let mut draw = || bundle.project(&random_band_limited(&grid, 2, 3, 8, &mut rng));
        let (u, v) = (draw(), draw());
        let pu = p.apply(&u)?;
        let range = (&pu - &bundle.project(&pu)).norm() / u.norm();
        let pv = p.adjoint_apply(&v)?;
        let lhs = pu.inner(&v)?;
        let rhs = u.inner(&pv)?;
        let adjoint = (lhs - rhs).norm() / (pu.norm() * v.norm()).max(1.0);
        let lu = lap.apply(&u)?;
        let lv = lap.apply(&v)?;
        let symmetric = (lu.inner(&v)? - u.inner(&lv)?).norm() / (lu.norm() * v.norm()).max(1.0);
        let quad = lu.inner(&u)?;
        Ok([range, adjoint, symmetric, quad.re, quad.im.abs() / quad.re.abs().max(1.0)])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mode_grid = make_grid(3, &[8, 8, 32])?;
    let mut oracle: f64 = 0.0;
    for k in 1..=3u32 {
        for l in -3i64..=3 {
            let op = assemble_P(k, l, &BundleChoice::Trivial, &mode_grid)?;
            for q in -8i64..=8 {
                let s = GridFunction::from_fn(&mode_grid, |x| C64::from_polar(1.0, q as f64 * x[2]));
                let lam = (q * q) as f64;
                let err = (&op.apply(&s)? - &s.scale(C64::new(lam, 0.0))).max_abs();
                oracle = oracle.max(err / lam.max(1.0));
            }
        }
    }

    let margins = (-5i64..=5).map(|l| ellipticity_margin(l, 256)).collect::<Result<Vec<_>>>()?;
    let margin = max_of(margins.iter().map(|m| (m - 1.0).abs()));
    let degenerate = ellipticity_margin_of(|z| C64::from_polar(1.0, z), 256);

    let loc_grid = make_grid(3, &[8, 8, 1024])?;
    let loc_op = assemble_P(1, 1, &BundleChoice::Trivial, &loc_grid)?;
    let phi = z_cutoff(&loc_grid, 0.0, PI / 2.0);
    let reports = par::map_tasks(20, |t| {
        let mut rng = seeded_rng(opts.seed ^ 0x10ca1, t as u64);
        locality_check(&loc_op, &phi, &random_band_limited(&loc_grid, 1, 2, 6, &mut rng))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let leakage = max_of(reports.iter().map(|r| r.leakage));
    let c_max = max_of(reports.iter().map(|r| r.ratio));
    let c_min = reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);

    let small = Grid::cube(3, 8)?;
    let small_bundle = BundleChoice::pullback_of_e(&ProfileTriple::default(), &small)?;
    let mut rng = seeded_rng(opts.seed, u64::MAX);
    let u = random_unitary(&mut rng, 2);
    let u = Mat2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let a = singular_diagnostics(&assemble_P(1, 1, &small_bundle, &small)?, 8)?;
    let b = singular_diagnostics(&assemble_P(1, 1, &small_bundle.conjugate(&u), &small)?, 8)?;
    let gauge = max_of(a.smallest.iter().zip(&b.smallest).map(|(x, y)| (x - y).abs()));
    let counts_equal = a.counts.iter().chain(&b.counts).all(|(_, x, y)| x == y);

    let nonneg = per_trial.iter().map(|r| r[3]).fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::at_most("operator.range_preservation", max_of(per_trial.iter().map(|r| r[0])), 1e-10),
        Check::at_most("operator.adjoint_pairing", max_of(per_trial.iter().map(|r| r[1])), 1e-10),
        Check::at_most("operator.sublaplacian_symmetric", max_of(per_trial.iter().map(|r| r[2])), 1e-9),
        Check::above("operator.sublaplacian_nonnegative", nonneg, -1e-9),
        Check::at_most("operator.mode_oracle", oracle, 1e-10),
        Check::at_most("operator.ellipticity_margin", margin, 1e-9),
        Check::at_most("operator.ellipticity_negative_control", degenerate, 1e-6),
        Check::at_most("operator.locality_leakage", leakage, 1e-8),
        Check::holds(
            "operator.locality_constant_stable",
            c_max.is_finite() && c_min > 0.0 && c_max / c_min <= 10.0,
        ),
        Check::at_most("operator.gauge_covariant_spectrum", gauge, 1e-8),
        Check::holds("operator.truncation_counts_equal", counts_equal),
    ])
}

#[derive(Clone, Copy, Debug, Default)]
struct CsTrial {
    idempotent_random: f64,
    idempotent_pinv: f64,
    identities: f64,
    index_matches_svd: bool,
    kernel_traces_match: bool,
    q_variation: f64,
    homotopy: f64,
    pairing: f64,
}

fn cs_trial(seed: u64, t: usize) -> Result<CsTrial> {
    let mut rng = seeded_rng(seed, t as u64);
    let n = rng.random_range(1..=40usize);
    let m = rng.random_range(1..=40usize);
    let d = complex_normal_matrix(&mut rng, m, n);
    let q = complex_normal_matrix(&mut rng, n, m);
    let pinv = pseudo_parametrix(&d, None)?;
    let qp = &pinv.data.q;
    let pair = cs_idempotent(&d, qp)?;
    let base = index_trace(&d, qp)?;
    let (ker, coker) = svd_index(&d, None)?;
    let mut q_variation: f64 = 0.0;
    for _ in 0..10 {
        let qr = complex_normal_matrix(&mut rng, n, m);
        q_variation = q_variation.max((index_trace(&d, &qr)? - base).abs());
    }
    let e = complex_normal_matrix(&mut rng, m, n) * C64::new(1e-3, 0.0);
    let mut homotopy: f64 = 0.0;
    for s in [0.25, 0.5, 1.0] {
        let dt = &d + &e * C64::new(s, 0.0);
        let qt = pseudo_parametrix(&dt, None)?.data.q;
        homotopy = homotopy.max((index_trace(&dt, &qt)? - base).abs());
    }
    Ok(CsTrial {
        idempotent_random: cs_idempotent(&d, &q)?.relative_idempotency_defect(),
        idempotent_pinv: pair.idempotency_defect(),
        identities: verify_identities(&d, &q)?.max().max(verify_identities(&d, qp)?.max()),
        index_matches_svd: base.round() as i64 == ker as i64 - coker as i64
            && (base - (ker as f64 - coker as f64)).abs() < 1e-6,
        kernel_traces_match: pinv.data.s0.trace().re.round() as usize == ker
            && pinv.data.s1.trace().re.round() as usize == coker,
        q_variation,
        homotopy,
        pairing: (k_pairing(&pair, &StandardTrace)? - base).abs(),
    })
}

/// Connes–Skandalis identities on seeded random `(D, Q)` with `n, m ≤ 40`.
pub fn cs_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let trials = par::map_tasks(opts.trials(200), |t| cs_trial(opts.seed, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let worst = |f: fn(&CsTrial) -> f64| max_of(trials.iter().map(f));
    Ok(vec![
        Check::at_most("cs.idempotent_random_q_relative", worst(|t| t.idempotent_random), 1e-8),
        Check::at_most("cs.idempotent_pseudoinverse", worst(|t| t.idempotent_pinv), 1e-10),
        Check::at_most("cs.identities", worst(|t| t.identities), 1e-11),
        Check::holds("cs.index_matches_svd", trials.iter().all(|t| t.index_matches_svd)),
        Check::holds("cs.kernel_traces_match_svd", trials.iter().all(|t| t.kernel_traces_match)),
        Check::at_most("cs.q_independence", worst(|t| t.q_variation), 1e-10),
        Check::at_most("cs.homotopy_invariance", worst(|t| t.homotopy), 1e-10),
        Check::at_most("cs.standard_trace_pairing", worst(|t| t.pairing), 1e-11),
    ])
}

#[derive(Clone, Copy, Debug, Default)]
struct GammaTrial {
    lift_trace: f64,
    normalised: f64,
    translate: f64,
    cyclic: f64,
    chain: f64,
    conjugated: f64,
    partition: f64,
}

fn gamma_trial(seed: u64, k: usize, t: usize) -> Result<GammaTrial> {
    let mut rng = seeded_rng(seed.wrapping_add(k as u64 * 1_000_003), t as u64);
    let n = rng.random_range(1..=8usize);
    let m = rng.random_range(1..=8usize);
    let s = complex_normal_matrix(&mut rng, n, n);
    let lifted = lift_operator(&s, k)?;
    let f = FundamentalDomain::new(lifted.domain(), 0)?;
    let tg = gamma_trace(&lifted, &f)?;
    let lift_trace = (tg - s.trace()).norm();
    let normalised = (tg - lifted.matrix().trace() / k as f64).norm();

    let a = random_equivariant(&mut rng, n, n, k)?;
    let b = random_equivariant(&mut rng, n, n, k)?;
    let ta = gamma_trace(&a, &f)?;
    let mut translate: f64 = 0.0;
    let mut g = f;
    for _ in 1..k {
        g = g.translate();
        translate = translate.max((gamma_trace(&a, &g)? - ta).norm());
    }
    let cyclic = (gamma_trace(&a.compose(&b)?, &f)? - gamma_trace(&b.compose(&a)?, &f)?).norm();

    let d = complex_normal_matrix(&mut rng, m, n);
    let q = pseudo_parametrix(&d, None)?.data.q;
    let base = index_trace(&d, &q)?;
    let (dt, qt) = (lift_operator(&d, k)?, lift_operator(&q, k)?);
    let gi = gamma_index(&dt, &qt)?;
    let pair = cs_idempotent(dt.matrix(), qt.matrix())?;
    let kt = induced_trace_on_k(&pair, k)?;
    let u = random_equivariant_unitary(&mut rng, n, m, k)?;
    let conj = IdempotentPair {
        ed: &u * &pair.ed * u.adjoint(),
        e1: &u * &pair.e1 * u.adjoint(),
        ..pair.clone()
    };
    Ok(GammaTrial {
        lift_trace,
        normalised,
        translate,
        cyclic,
        chain: (gi - base).abs().max((kt - base).abs()),
        conjugated: (induced_trace_on_k(&conj, k)? - base).abs(),
        partition: f.partition_defect(),
    })
}

/// Γ-trace normalisation, localisation independence and the index chain on
/// lifted operators for each order in `orders`.
pub fn gamma_suite(opts: &SuiteOptions, orders: &[usize]) -> Result<Vec<Check>> {
    let trials = opts.trials(50);
    let all = orders
        .iter()
        .flat_map(|&k| (0..trials).map(move |t| (k, t)))
        .collect::<Vec<_>>();
    let results = par::map_slice(&all, |&(k, t)| gamma_trial(opts.seed, k, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let worst = |f: fn(&GammaTrial) -> f64| max_of(results.iter().map(f));
    Ok(vec![
        Check::at_most("gamma.lift_trace", worst(|t| t.lift_trace), 1e-12),
        Check::at_most("gamma.normalised_trace", worst(|t| t.normalised), 1e-12),
        Check::at_most("gamma.domain_independence", worst(|t| t.translate), 1e-13),
        Check::at_most("gamma.trace_property", worst(|t| t.cyclic), 1e-11),
        Check::at_most("gamma.index_chain", worst(|t| t.chain), 1e-9),
        Check::at_most("gamma.conjugation_invariance", worst(|t| t.conjugated), 1e-10),
        Check::at_most("gamma.partition_of_unity", worst(|t| t.partition), 0.0),
    ])
}

/// Factorization, integrality, k-independence and additivity of the
/// topological index, plus winding additivity and cover consistency.
pub fn index_suite(_opts: &SuiteOptions) -> Result<Vec<Check>> {
    let p = ProfileTriple::default();
    let n = 64;
    let pairs: Vec<(u32, i64)> = (1..=3u32).flat_map(|k| (-3i64..=3).map(move |l| (k, l))).collect();
    let values = par::map_tasks(pairs.len(), |i| topological_index(pairs[i].0, pairs[i].1, &p, n))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let at = |k: u32, l: i64| values[(k as usize - 1) * 7 + (l + 3) as usize].wedge;

    let factor = max_of(values.iter().map(|v| v.path_discrepancy()));
    let mut integral = max_of(values.iter().map(|v| (v.wedge - v.wedge.round()).abs()));
    // the coarse grid is only exercised for |l| ≤ 2: its Chern error is
    // about 5e-7, so |l| = 3 would sit at the tolerance
    for l in -2i64..=2 {
        let v = topological_index(2, l, &p, 32)?.wedge;
        integral = integral.max((v - v.round()).abs());
    }
    let k_indep = max_of(pairs.iter().map(|&(k, l)| (at(k, l) - at(1, l)).abs()));
    let mut additive: f64 = 0.0;
    for k in 1..=3 {
        for (a, b) in [(1i64, 2i64), (-3, 1), (2, -2), (-1, -2)] {
            additive = additive.max((at(k, a + b) - at(k, a) - at(k, b)).abs());
        }
    }
    let mut winding: f64 = 0.0;
    for a in -4i64..=4 {
        winding = winding.max((winding_integral(a, n)? + a as f64).abs());
        for b in -4i64..=4 {
            let sum = winding_integral(a + b, n)?;
            winding = winding.max((sum - winding_integral(a, n)? - winding_integral(b, n)?).abs());
        }
    }
    let covers: Vec<(u32, i64)> = [2u32, 3].iter().flat_map(|&k| (-2i64..=2).map(move |l| (k, l))).collect();
    let gamma = par::map_tasks(covers.len(), |i| gamma_index_check(covers[i].0, covers[i].1, &p, n))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        Check::at_most("index.factorization", factor, 1e-8),
        Check::at_most("index.integrality", integral, 1e-6),
        Check::at_most("index.k_independence", k_indep, 1e-8),
        Check::at_most("index.additivity_in_l", additive, 1e-8),
        Check::at_most("index.winding_additivity", winding, 1e-12),
        Check::at_most("index.cover_consistency", max_of(gamma.iter().map(|g| g.discrepancy)), 1e-8),
        Check::at_most(
            "index.cover_pullback_consistency",
            max_of(gamma.iter().map(|g| g.pullback_discrepancy)),
            1e-8,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", &SuiteOptions::default()).is_err());
    }

    #[test]
    fn small_cs_and_gamma_suites_pass() {
        let opts = SuiteOptions { seed: 3, trials: Some(5) };
        for c in cs_suite(&opts).unwrap().into_iter().chain(gamma_suite(&opts, &[2, 3]).unwrap()) {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn cs_trials_are_reproducible() {
        let a = cs_trial(11, 4).unwrap();
        let b = cs_trial(11, 4).unwrap();
        assert_eq!(a.idempotent_random, b.idempotent_random);
        assert_eq!(a.q_variation, b.q_variation);
    }
}
