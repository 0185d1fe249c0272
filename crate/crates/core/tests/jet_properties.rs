use confdirac::jet::{Analytic, Jet};
use num_complex::Complex64;
use proptest::prelude::*;
use serde::Deserialize;

fn jet_from(n: usize, order: usize, coeffs: &[(f64, f64)]) -> Jet {
    let mut it = coeffs.iter().cycle();
    Jet::from_derivatives(n, order, |_| {
        let (re, im) = it.next().unwrap();
        Complex64::new(*re, *im)
    })
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    (a - b).max_abs() <= tol * scale
}

fn arb_coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..40)
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 0usize..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((n, k) in shape(), a in arb_coeffs(), b in arb_coeffs(), c in arb_coeffs()) {
        let (a, b, c) = (jet_from(n, k, &a), jet_from(n, k, &b), jet_from(n, k, &c));
        prop_assert!(close(&(&a * &b), &(&b * &a), 1e-13));
        prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-13));
        prop_assert!(close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), 1e-13));
        prop_assert!(close(&(&(&a + &b) - &b), &a, 1e-13));
    }

    #[test]
    fn leibniz_rule((n, k) in (1usize..=3, 1usize..=5), a in arb_coeffs(), b in arb_coeffs(), var in 0usize..3) {
        let var = var % n;
        let (a, b) = (jet_from(n, k, &a), jet_from(n, k, &b));
        let lhs = (&a * &b).partial(var).unwrap();
        let rhs = a.partial(var).unwrap().mul_min(&b).add_min(&a.mul_min(&b.partial(var).unwrap()));
        prop_assert!(close(&lhs, &rhs, 1e-13));
    }

    #[test]
    fn chain_rule((n, k) in (1usize..=3, 1usize..=5), a in arb_coeffs(), var in 0usize..3, which in 0usize..7, r in -2.0..2.0f64) {
        let var = var % n;
        // real coefficients, constant term shifted away from the branch points
        let real: Vec<(f64, f64)> = a.iter().map(|&(re, _)| (re, 0.0)).collect();
        let a = jet_from(n, k, &real).scale(0.3).add_constant(1.5);
        let (f, fprime) = match which {
            0 => (a.exp().unwrap(), a.exp().unwrap()),
            1 => (a.sin().unwrap(), a.cos().unwrap()),
            2 => (a.cos().unwrap(), a.sin().unwrap().scale(-1.0)),
            3 => (a.recip().unwrap(), (&a.recip().unwrap() * &a.recip().unwrap()).scale(-1.0)),
            4 => (a.sqrt().unwrap(), a.sqrt().unwrap().recip().unwrap().scale(0.5)),
            5 => (a.ln().unwrap(), a.recip().unwrap()),
            _ => (a.powf(r).unwrap(), a.powf(r - 1.0).unwrap().scale(r)),
        };
        let lhs = f.partial(var).unwrap();
        let rhs = fprime.mul_min(&a.partial(var).unwrap());
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn mixed_shapes_are_rejected(k in 0usize..4) {
        let a = Jet::constant(2, k, 1.0);
        let b = Jet::constant(3, k, 1.0);
        prop_assert!(a.try_add(&b).is_err());
        prop_assert!(a.try_mul(&Jet::constant(2, k + 1, 1.0)).is_err());
    }
}

#[test]
fn analytic_examples() {
    let x = Jet::variable(1, 3, 0, 0.0).unwrap();
    let inv = x.add_constant(1.0).recip().unwrap();
    let geometric: Vec<f64> = (0..=3u8).map(|d| inv.derivative(&[d]).re).collect();
    assert_eq!(geometric, vec![1.0, -1.0, 2.0, -6.0]);

    let x = Jet::variable(1, 4, 0, 0.0).unwrap();
    let sq = (&x.add_constant(1.0) * &x.add_constant(1.0)).sqrt().unwrap();
    let want = x.add_constant(1.0);
    assert!((&sq - &want).max_abs() < 1e-15);

    let e = Jet::variable(1, 5, 0, 0.0).unwrap().exp().unwrap();
    let d = e.partial(0).unwrap();
    assert!((&d - &e.truncate(4).unwrap()).max_abs() < 1e-15);
    assert_eq!(Jet::zero(2, 3).exp().unwrap(), Jet::constant(2, 3, 1.0));
    assert!(Jet::zero(1, 2).apply(Analytic::Log).is_err());
}

#[derive(Deserialize)]
struct Oracle {
    order: usize,
    cases: Vec<Case>,
}

#[derive(Deserialize)]
struct Case {
    expr: String,
    x0: Vec<f64>,
    derivatives: Vec<Derivative>,
}

#[derive(Deserialize)]
struct Derivative {
    alpha: Vec<u8>,
    value: f64,
    exact: f64,
}

enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse(tokens: &mut std::iter::Peekable<std::vec::IntoIter<String>>) -> Sexp {
    let tok = tokens.next().expect("unexpected end of expression");
    if tok != "(" {
        return Sexp::Atom(tok);
    }
    let mut items = Vec::new();
    while tokens.peek().map(String::as_str) != Some(")") {
        items.push(parse(tokens));
    }
    tokens.next();
    Sexp::List(items)
}

fn eval(e: &Sexp, x0: &[f64], order: usize) -> Jet {
    let n = x0.len();
    match e {
        Sexp::Atom(a) => match a.strip_prefix('x') {
            Some(i) => Jet::variable(n, order, i.parse().unwrap(), x0[i.parse::<usize>().unwrap()]).unwrap(),
            None => Jet::constant(n, order, a.parse::<f64>().unwrap()),
        },
        Sexp::List(items) => {
            let Sexp::Atom(op) = &items[0] else {
                panic!("operator expected")
            };
            let arg = |i: usize| eval(&items[i], x0, order);
            match op.as_str() {
                "+" => &arg(1) + &arg(2),
                "-" => &arg(1) - &arg(2),
                "*" => &arg(1) * &arg(2),
                "exp" => arg(1).exp().unwrap(),
                "sin" => arg(1).sin().unwrap(),
                "cos" => arg(1).cos().unwrap(),
                "recip" => arg(1).recip().unwrap(),
                "sqrt" => arg(1).sqrt().unwrap(),
                "ln" => arg(1).ln().unwrap(),
                "pow" => {
                    let Sexp::Atom(r) = &items[2] else {
                        panic!("numeric exponent expected")
                    };
                    arg(1).powf(r.parse().unwrap()).unwrap()
                }
                other => panic!("unknown operator {other}"),
            }
        }
    }
}

/// Oracle values are central differences of step 1e-3, and exact derivatives, computed in
/// 40-digit arithmetic by `tests/oracle/finite_differences.py`.
#[test]
fn random_expressions_match_finite_differences() {
    let text = include_str!("oracle/finite_differences.json");
    let oracle: Oracle = serde_json::from_str(text).unwrap();
    assert_eq!(oracle.cases.len(), 50);
    let mut worst = 0.0f64;
    for case in &oracle.cases {
        let tokens: Vec<String> = case
            .expr
            .replace('(', " ( ")
            .replace(')', " ) ")
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let tree = parse(&mut tokens.into_iter().peekable());
        let jet = eval(&tree, &case.x0, oracle.order);
        let scale = case.derivatives.iter().map(|d| d.value.abs()).fold(0.0, f64::max);
        for d in &case.derivatives {
            let got = jet.derivative(&d.alpha);
            assert!(got.im.abs() < 1e-14);
            let err = (got.re - d.value).abs() / scale;
            worst = worst.max(err);
            assert!(
                err < 1e-5,
                "{}: ∂^{:?} jet {} vs fd {}",
                case.expr,
                d.alpha,
                got.re,
                d.value
            );
            let err = (got.re - d.exact).abs() / scale;
            assert!(
                err < 1e-12,
                "{}: ∂^{:?} jet {} vs exact {}",
                case.expr,
                d.alpha,
                got.re,
                d.exact
            );
        }
    }
    assert!(worst > 0.0);
}
