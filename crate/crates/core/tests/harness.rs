use paracurv::check::CheckConfig;
use paracurv::expr::Bindings;
use paracurv::geometry::lie_bracket;
use paracurv::harness::{builtin_instance, builtin_source, run_file, run_theorem, Verdict, BUILTINS, THEOREMS};
use paracurv::instance::InstanceFile;
use paracurv::report::{CheckReport, Status};

fn load(id: &str, binds: &[(&str, f64)]) -> InstanceFile {
    let b: Bindings = binds.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_instance(id, &b).unwrap()
}

fn cfg(f: &InstanceFile) -> CheckConfig {
    CheckConfig::new(Default::default(), f.bindings.clone(), Default::default())
}

fn verdict(f: &InstanceFile, id: &str, soliton: Option<&str>) -> Verdict {
    let spec = soliton.map(|s| f.soliton(Some(s)).unwrap()).or_else(|| f.soliton(None));
    let t = run_theorem(id, &f.instance, spec, &cfg(f)).unwrap();
    t.verdict
}

#[test]
fn builtins_load() {
    for id in BUILTINS {
        let f = load(id, &[]);
        assert_eq!(f.instance.id, id);
        assert!(builtin_source(id).is_some());
    }
    assert!(builtin_instance("nope", &Bindings::new()).is_err());
}

#[test]
fn corrected_example_theorems() {
    let f = load("example1_corrected", &[]);
    assert_eq!(verdict(&f, "T3.2", None), Verdict::Verified);
    assert_eq!(verdict(&f, "L2.1", None), Verdict::Verified);
    assert_eq!(verdict(&f, "T5.1", None), Verdict::HypothesisNotMet);
    assert_eq!(verdict(&f, "L4.1", None), Verdict::HypothesisNotMet);
    for (a, b) in [(1.0, 0.0), (0.0, 1.0), (3.0, 2.0)] {
        let f = load("example1_corrected", &[("alpha", a), ("beta", b)]);
        assert_eq!(verdict(&f, "E3.4", Some("arys_zeta")), Verdict::Verified, "({a},{b})");
    }
    // alpha = 3 is proper and V = zeta solves with h = 0: eta-Einstein holds
    assert_eq!(verdict(&f, "T3.1", Some("arys_zeta")), Verdict::Verified);
}

#[test]
fn printed_example_does_not_satisfy_hypotheses() {
    let f = load("example1_printed", &[]);
    assert_eq!(verdict(&f, "T3.2", None), Verdict::HypothesisNotMet);
    assert_eq!(verdict(&f, "L2.1", None), Verdict::HypothesisNotMet);
}

#[test]
fn para_sasakian_theorems() {
    let f = load("para_sasakian_model", &[]);
    let t = run_theorem("T5.1", &f.instance, f.soliton(None), &cfg(&f)).unwrap();
    assert_eq!(t.verdict, Verdict::HypothesisNotMet);
    let eq = t.hypotheses.iter().find(|c| c.name == "soliton_equation").unwrap();
    assert!(!eq.holds && eq.detail.contains("INCONSISTENT"));
    assert_eq!(verdict(&f, "L4.1", None), Verdict::Verified);
    assert_eq!(verdict(&f, "E7.4", None), Verdict::HypothesisNotMet);
    let y = load("para_sasakian_model", &[("alpha", 0.0), ("beta", 1.0)]);
    assert_eq!(verdict(&y, "E7.4", None), Verdict::Verified);
    // alpha = 0 fails the non-degeneracy hypothesis
    assert_eq!(verdict(&y, "T5.1", None), Verdict::HypothesisNotMet);
    assert_eq!(verdict(&f, "C5.1", None), Verdict::HypothesisNotMet);
}

#[test]
fn para_cosymplectic_theorems() {
    let f = load("para_cosymplectic_flat", &[]);
    assert_eq!(verdict(&f, "T7.2", None), Verdict::Verified);
    assert_eq!(verdict(&f, "C7.1", None), Verdict::Verified);
    assert_eq!(verdict(&f, "L6.1a", None), Verdict::Verified);
    assert_eq!(verdict(&f, "L6.1b", None), Verdict::Verified);
    assert_eq!(verdict(&f, "L2.1", None), Verdict::HypothesisNotMet);
    let c = run_theorem("C7.1", &f.instance, f.soliton(None), &cfg(&f)).unwrap();
    let names: Vec<&str> = c.hypotheses.iter().map(|h| h.name.as_str()).collect();
    assert!(names.contains(&"h_constant") && !names.contains(&"r_constant"), "{names:?}");
    let t = run_theorem("T7.2", &f.instance, f.soliton(None), &cfg(&f)).unwrap();
    assert!(t.hypotheses.iter().any(|h| h.name == "r_constant"));
    assert!(t.notes.iter().any(|n| n.name == "h_constant_assumed"));
    let g = load("para_cosymplectic_flat", &[("alpha", 2.0)]);
    assert_eq!(verdict(&g, "C7.1", None), Verdict::HypothesisNotMet);
}

#[test]
fn no_structure_is_not_applicable() {
    let f = load("hyperbolic3", &[]);
    for id in THEOREMS {
        assert_eq!(verdict(&f, id, None), Verdict::NotApplicable, "{id}");
    }
    assert!(run_theorem("T9.9", &f.instance, None, &cfg(&f)).is_err());
}

fn rows_with(r: &CheckReport, prefix: &str) -> usize {
    r.rows.iter().filter(|x| x.id.starts_with(prefix)).count()
}

#[test]
fn run_all_on_corrected_example_has_no_failures() {
    let f = load("example1_corrected", &[]);
    let rep = run_file(&f, &cfg(&f));
    let fails: Vec<_> = rep.rows.iter().filter(|r| r.status == Status::Fail).map(|r| format!("{} {}", r.id, r.detail)).collect();
    assert!(fails.is_empty(), "{fails:#?}");
    assert_eq!(rep.row("theorem.T3.2").unwrap().status, Status::Pass);
    assert_eq!(rep.row("soliton.default.residual").unwrap().status, Status::Pass);
    // one printed curvature entry differs in sign from the engine value
    let disagree: Vec<_> = rep.rows.iter().filter(|r| r.id.starts_with("claim.") && r.detail.contains("differs")).map(|r| r.id.clone()).collect();
    assert_eq!(disagree, vec!["claim.riemann.u2.u3.u2".to_string()]);
    // deterministic and idempotent
    let again = run_file(&f, &cfg(&f));
    assert_eq!(rep.to_json(), again.to_json());
}

#[test]
fn run_all_on_printed_second_example_reports_discrepancies() {
    let f = load("example2_printed", &[]);
    let rep = run_file(&f, &cfg(&f));
    assert!(!rep.has_failures(), "{}", rep.to_text());
    let nabla = rep.row("claim.nabla.v1.v2").unwrap();
    assert_eq!(nabla.status, Status::Info);
    assert!(nabla.detail.contains("differs"));
    assert!(rep.row("claim.ricci.v1.v1").unwrap().detail.contains("differs"));
    assert!(rep.row("claim.scalar").unwrap().detail.contains("differs"));
    let soliton = rep.row("soliton.default.residual").unwrap();
    assert_eq!(soliton.status, Status::Info);
    assert!(soliton.detail.contains("known discrepancy"));
    assert!(rows_with(&rep, "claim.") == 22);
    let sectional = rep.row("curvature.sectional").unwrap();
    assert!(sectional.detail.contains("c = 0.0") || sectional.detail.contains("c = -0.0"));

    let frame = f.instance.frame.as_ref().unwrap();
    let (v1, v2, v3) = (frame.vector(0), frame.vector(1), frame.vector(2));
    let coords = f.instance.coords();
    let neg = |v: &paracurv::geometry::VectorField| v.scale(&paracurv::expr::ScalarExpr::int(-1));
    assert!(lie_bracket(v1, v3, coords).sub(&neg(v2)).is_structurally_zero());
    assert!(lie_bracket(v2, v3, coords).sub(&neg(v1)).is_structurally_zero());
    assert!(lie_bracket(v1, v2, coords).is_structurally_zero());
}

#[test]
fn run_all_without_soliton() {
    let f = load("hyperbolic3", &[]);
    let rep = run_file(&f, &cfg(&f));
    assert_eq!(rep.row("soliton").unwrap().status, Status::NotApplicable);
    assert_eq!(rep.row("structure").unwrap().status, Status::NotApplicable);
    assert!(!rep.has_failures());
}

#[test]
fn theorems_never_falsified_on_builtins() {
    for id in BUILTINS {
        let f = load(id, &[]);
        let rep = run_file(&f, &cfg(&f));
        for r in rep.rows.iter().filter(|r| r.id.starts_with("theorem.") && r.id.matches('.').count() == 1) {
            assert!(!r.detail.starts_with("FALSIFIED"), "{id}: {} {}", r.id, r.detail);
        }
    }
}
