use paracurv::check::CheckConfig;
use paracurv::expr::{Bindings, ScalarExpr};
use paracurv::geometry::numeric::compare_tensors;
use paracurv::geometry::{gradient, TensorField};
use paracurv::harness::builtin_instance;
use paracurv::instance::InstanceFile;
use paracurv::report::Status;
use paracurv::soliton::{
    agrys_residual, arys_residual, check_relation, einstein_classify, lambda_sign, sectional_constancy, solve_lambda,
    soliton_taxonomy, EinsteinKind, LambdaSign, LambdaStatus, SolitonError, SolitonSpec,
};

fn load(id: &str, binds: &[(&str, f64)]) -> InstanceFile {
    let b: Bindings = binds.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_instance(id, &b).unwrap()
}

fn cfg(f: &InstanceFile) -> CheckConfig {
    CheckConfig::new(Default::default(), f.bindings.clone(), Default::default())
}

fn zero_residual(t: &TensorField, f: &InstanceFile) -> f64 {
    let z = TensorField::zeros(t.slots().to_vec(), t.dim());
    compare_tensors(t, &z, &f.instance.chart, &cfg(f).eval).unwrap().max_abs
}

#[test]
fn agrys_on_corrected_example() {
    let f = load("example1_corrected", &[]);
    let spec = f.soliton(None).unwrap();
    assert!(zero_residual(&agrys_residual(&f.instance, spec).unwrap(), &f) < 1e-9);
    let row = check_relation("E4.15", &f.instance, spec, &cfg(&f)).unwrap();
    assert_eq!(row.status, Status::Pass);
    assert!(matches!(arys_residual(&f.instance, spec), Err(SolitonError::KindMismatch { .. })));

    // without lambda the residual is -e^z g
    let no_lambda = spec.with_lambda(ScalarExpr::zero());
    let r = agrys_residual(&f.instance, &no_lambda).unwrap();
    let expected = f.instance.metric.tensor().scale(&-ScalarExpr::coord("z").exp());
    assert!(compare_tensors(&r, &expected, &f.instance.chart, &cfg(&f).eval).unwrap().below(1e-9));

    // breaking 2 alpha = 3 beta breaks the soliton
    let f2 = load("example1_corrected", &[("alpha", 1.0), ("beta", 0.0)]);
    assert!(zero_residual(&agrys_residual(&f2.instance, f2.soliton(None).unwrap()).unwrap(), &f2) > 0.5);
}

#[test]
fn solved_lambda_for_zeta_potential() {
    for (a, b) in [(1.0, 0.0), (0.0, 1.0), (3.0, 2.0)] {
        let f = load("example1_corrected", &[("alpha", a), ("beta", b)]);
        let spec = f.soliton(Some("arys_zeta")).unwrap();
        let sol = solve_lambda(&f.instance, spec, &cfg(&f)).unwrap();
        assert_eq!(sol.status, LambdaStatus::Solved, "{a},{b}: {}", sol.note);
        assert!(sol.constant);
        for v in &sol.values {
            assert!((v - (2.0 * a - 3.0 * b)).abs() < 1e-9);
        }
        let row = check_relation("E3.4", &f.instance, &spec.with_lambda(sol.lambda.clone()), &cfg(&f)).unwrap();
        assert!(row.max_residual < 1e-8);
    }
    // with h = 1 the Lie derivative term is not proportional to g
    let f = load("example1_corrected", &[("alpha", 1.0), ("beta", 0.0)]);
    let mut spec = f.soliton(Some("arys_zeta")).unwrap().clone();
    spec.h = ScalarExpr::one();
    let sol = solve_lambda(&f.instance, &spec, &cfg(&f)).unwrap();
    assert_eq!(sol.status, LambdaStatus::Inconsistent);
}

#[test]
fn degenerate_when_h_vanishes_on_part_of_the_domain() {
    let f = load("example1_corrected", &[]);
    let mut spec = f.soliton(Some("arys_zeta")).unwrap().clone();
    spec.h = ScalarExpr::coord("x");
    let mut c = cfg(&f);
    c.eval.opts.tol = 0.2;
    let sol = solve_lambda(&f.instance, &spec, &c).unwrap();
    assert_eq!(sol.status, LambdaStatus::Degenerate);
}

#[test]
fn para_sasakian_model_admits_only_yamabe_type() {
    for (a, b, ok) in [(1.0, 0.0, false), (2.0, 1.0, false), (3.0, 2.0, false), (0.0, 1.0, true)] {
        let f = load("para_sasakian_model", &[("alpha", a), ("beta", b)]);
        let spec = f.soliton(None).unwrap();
        let sol = solve_lambda(&f.instance, spec, &cfg(&f)).unwrap();
        assert_eq!(sol.status == LambdaStatus::Solved, ok, "({a},{b})");
        if ok {
            assert!((sol.values[0] - 1.0).abs() < 1e-9);
            let row = check_relation("E7.4", &f.instance, &spec.with_lambda(sol.lambda.clone()), &cfg(&f)).unwrap();
            assert_eq!(row.status, Status::Pass);
        }
    }
}

#[test]
fn flat_gradient_soliton() {
    let f = load("para_cosymplectic_flat", &[]);
    let spec = f.soliton(None).unwrap();
    let sol = solve_lambda(&f.instance, spec, &cfg(&f)).unwrap();
    assert_eq!(sol.status, LambdaStatus::Solved);
    assert!(sol.constant);
    assert!(sol.values.iter().all(|v| (v + 1.0).abs() < 1e-12));
    assert_eq!(lambda_sign(&sol.lambda, &f.instance.chart, &cfg(&f)).unwrap(), LambdaSign::Shrinking);
}

#[test]
fn einstein_and_eta_einstein() {
    let f = load("example1_corrected", &[]);
    let b = f.instance.curvature();
    let s = f.instance.structure().unwrap();
    let v = einstein_classify(&b.ricci, &f.instance.metric, Some(&s.eta), &f.instance.chart, &cfg(&f)).unwrap();
    assert_eq!(v.kind, EinsteinKind::Einstein);
    assert!((v.a_value + 2.0).abs() < 1e-9);

    let f = load("para_sasakian_model", &[]);
    let b = f.instance.curvature();
    let s = f.instance.structure().unwrap();
    let v = einstein_classify(&b.ricci, &f.instance.metric, Some(&s.eta), &f.instance.chart, &cfg(&f)).unwrap();
    assert_eq!(v.kind, EinsteinKind::EtaEinstein);
    assert!((v.a_value - 2.0).abs() < 1e-9 && (v.b_value + 4.0).abs() < 1e-9);
    let v = einstein_classify(&b.ricci, &f.instance.metric, None, &f.instance.chart, &cfg(&f)).unwrap();
    assert_eq!(v.kind, EinsteinKind::Neither);
}

#[test]
fn sectional_curvature_values() {
    for (id, c, tol) in [("hyperbolic3", -1.0, 1e-8), ("example1_corrected", -1.0, 1e-8), ("para_cosymplectic_flat", 0.0, 1e-9), ("example2_printed", 0.0, 1e-9)] {
        let f = load(id, &[]);
        let v = sectional_constancy(f.instance.curvature(), &f.instance.metric, &f.instance.chart, &cfg(&f)).unwrap();
        assert!(v.holds, "{id}");
        assert!((v.c_value - c).abs() < tol, "{id}: {}", v.c_value);
    }
    let f = load("para_sasakian_model", &[]);
    let v = sectional_constancy(f.instance.curvature(), &f.instance.metric, &f.instance.chart, &cfg(&f)).unwrap();
    assert!(!v.holds);
}

#[test]
fn taxonomy_flags() {
    assert!(soliton_taxonomy(1.0, 0.0).ricci);
    assert!(soliton_taxonomy(0.0, 1.0).yamabe);
    assert!(soliton_taxonomy(1.0, -1.0).einstein);
    assert!(soliton_taxonomy(2.0, 1.0).proper);
    assert!(!soliton_taxonomy(1.0, 5.0).proper);
    assert!(!soliton_taxonomy(0.0, 5.0).proper);
}

#[test]
fn unknown_relation_is_an_error() {
    let f = load("example1_corrected", &[]);
    let e = check_relation("E99", &f.instance, f.soliton(None).unwrap(), &cfg(&f)).unwrap_err();
    assert_eq!(e, SolitonError::UnknownRelation("E99".into()));
}

#[test]
fn gradient_vector_matches_gradient_soliton() {
    let f = load("hyperbolic3", &[]);
    let fexpr = ScalarExpr::coord("x") * ScalarExpr::coord("z").powi(2);
    let one = ScalarExpr::one();
    let agrys = SolitonSpec::agrys(fexpr.clone(), one.clone(), Some(one.clone()), one.clone(), one.clone());
    let v = gradient(&fexpr, &f.instance.metric, f.instance.coords());
    let arys = SolitonSpec::arys(v, one.clone(), Some(one.clone()), one.clone(), one);
    let a = arys_residual(&f.instance, &arys).unwrap();
    let g = agrys_residual(&f.instance, &agrys).unwrap();
    assert!(compare_tensors(&a, &g, &f.instance.chart, &cfg(&f).eval).unwrap().below(1e-9));
}
