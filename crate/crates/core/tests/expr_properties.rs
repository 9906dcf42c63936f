use paracurv::expr::{differentiate, parse_expr, rational, Bindings, Compiled, Domain, Func, Node, ScalarExpr};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use num_traits::ToPrimitive;

const COORDS: [&str; 3] = ["x", "y", "z"];

fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(7), failure_persistence: None, ..Config::default() }
}

fn leaf() -> impl Strategy<Value = ScalarExpr> {
    prop_oneof![
        3 => (0..3usize).prop_map(|i| ScalarExpr::coord(COORDS[i])),
        1 => Just(ScalarExpr::param("a")),
        2 => (-5i64..=5, 1i64..=4).prop_map(|(n, d)| ScalarExpr::ratio(n, d)),
    ]
}

/// Random expressions that stay finite and smooth on the cube `[-1, 1]^3`.
fn expr() -> impl Strategy<Value = ScalarExpr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        let quarter = |e: ScalarExpr| e * ScalarExpr::ratio(1, 4);
        let pos = |e: &ScalarExpr| ScalarExpr::int(2) + e * e;
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| a / pos(&b)),
            (inner.clone(), 0i64..4).prop_map(|(a, k)| a.powi(k)),
            (inner.clone(), 0..5usize).prop_map(move |(a, f)| {
                let f = [Func::Exp, Func::Sin, Func::Cos, Func::Sinh, Func::Cosh][f];
                ScalarExpr::func(f, &quarter(a))
            }),
            inner.clone().prop_map(move |a| pos(&a).ln()),
            inner.prop_map(move |a| (ScalarExpr::one() + &a * &a).sqrt()),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-0.9f64..0.9, -0.9f64..0.9, -0.9f64..0.9]
}

fn coords() -> Vec<String> {
    COORDS.iter().map(|s| s.to_string()).collect()
}

fn bindings() -> Bindings {
    [("a".to_string(), 0.7)].into_iter().collect()
}

/// Straight recursive evaluation over the tree, independent of the tape.
fn oracle(e: &ScalarExpr, p: &[f64; 3], a: f64) -> f64 {
    match e.node() {
        Node::Const(c) => c.to_f64().unwrap(),
        Node::Symbol(name, _) => match &**name {
            "x" => p[0],
            "y" => p[1],
            "z" => p[2],
            "a" => a,
            other => panic!("unexpected symbol {other}"),
        },
        Node::Add(ts) => ts.iter().map(|t| oracle(t, p, a)).sum(),
        Node::Mul(fs) => fs.iter().map(|t| oracle(t, p, a)).product(),
        Node::Pow(b, k) => oracle(b, p, a).powf(k.to_f64().unwrap()),
        Node::Func(f, x) => {
            let v = oracle(x, p, a);
            match f {
                Func::Exp => v.exp(),
                Func::Log => v.ln(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Sinh => v.sinh(),
                Func::Cosh => v.cosh(),
                Func::Sqrt => v.sqrt(),
            }
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

fn eval(e: &ScalarExpr, p: &[f64; 3]) -> f64 {
    e.evaluate(&coords(), p, &bindings()).unwrap()
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn printing_round_trips_through_the_parser(e in expr(), p in point()) {
        let text = e.to_string();
        let back = parse_expr(&text, &COORDS, &["a"]).unwrap_or_else(|err| panic!("{text}: {err}"));
        prop_assert!(close(eval(&e, &p), eval(&back, &p), 1e-12), "{text}");
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn compiled_tape_matches_tree_evaluation(e in expr(), p in point()) {
        let tape = eval(&e, &p);
        let tree = oracle(&e, &p, 0.7);
        prop_assert!(close(tape, tree, 1e-11), "{e}: {tape} vs {tree}");
    }

    #[test]
    fn derivative_matches_central_differences(e in expr(), p in point(), var in 0..3usize) {
        let d = differentiate(&e, COORDS[var]);
        let h = 1e-5;
        let (mut lo, mut hi) = (p, p);
        lo[var] -= h;
        hi[var] += h;
        let fd = (eval(&e, &hi) - eval(&e, &lo)) / (2.0 * h);
        let exact = eval(&d, &p);
        let scale = 1f64.max(eval(&e, &p).abs());
        prop_assert!((fd - exact).abs() <= 1e-5 * scale.max(exact.abs()), "{e}: d/d{} = {d}; {exact} vs {fd}", COORDS[var]);
    }

    #[test]
    fn cancellation_is_structural(e in expr()) {
        prop_assert!((&e - &e).is_zero());
        prop_assert!((&e * ScalarExpr::zero()).is_zero());
        prop_assert!(differentiate(&ScalarExpr::param("a"), "x").is_zero());
    }

    #[test]
    fn sampling_is_deterministic_and_inside_the_domain(seed in any::<u64>(), n in 1usize..40) {
        let d = Domain::cube(&COORDS, rational(-1, 2), rational(3, 2));
        let a = d.sample(n, seed).unwrap();
        prop_assert_eq!(&a, &d.sample(n, seed).unwrap());
        prop_assert_eq!(a.len(), n);
        for p in &a {
            prop_assert!(p.iter().all(|c| (-0.5..=1.5).contains(c)));
        }
        prop_assert_ne!(a, d.sample(n, seed.wrapping_add(1)).unwrap());
    }
}

#[test]
fn compiled_batch_keeps_output_order() {
    let names = coords();
    let es: Vec<ScalarExpr> = ["x", "y*z", "exp(x) - 1", "a*x"].iter().map(|s| parse_expr(s, &COORDS, &["a"]).unwrap()).collect();
    let c = Compiled::new(&es, &names, &bindings()).unwrap();
    let v = c.eval(&[0.5, 2.0, 3.0]).unwrap();
    assert_eq!(v.len(), 4);
    assert!(close(v[0], 0.5, 1e-15) && close(v[1], 6.0, 1e-15) && close(v[2], 0.5f64.exp() - 1.0, 1e-15));
    assert!(close(v[3], 0.35, 1e-15));
    assert!(Compiled::new(&es, &names, &Bindings::new()).is_err());
}
