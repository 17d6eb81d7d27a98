use cotangent::expr::{ChartPoint, CoordinateChart, Expr, Func, ScalarField};
use cotangent::frame::{fn_bracket_11, lie_bracket, nijenhuis, FullTensor11, PhaseVectorField};
use cotangent::expr::ExprMatrix;
use proptest::prelude::*;

const N: usize = 2;

fn chart() -> CoordinateChart {
    CoordinateChart::cotangent(N)
}

/// Quadratic polynomial in the four chart coordinates.
fn poly(coeffs: &[f64]) -> Expr {
    let vars: Vec<Expr> = (0..2 * N).map(Expr::var).collect();
    let mut terms = vec![Expr::constant(coeffs[0])];
    let mut k = 1;
    for a in 0..2 * N {
        terms.push(&vars[a] * coeffs[k]);
        k += 1;
    }
    for a in 0..2 * N {
        for b in a..2 * N {
            terms.push(&vars[a] * &vars[b] * coeffs[k]);
            k += 1;
        }
    }
    Expr::sum(&terms)
}

const POLY_LEN: usize = 1 + 2 * N + (2 * N) * (2 * N + 1) / 2;

fn field_strategy() -> impl Strategy<Value = PhaseVectorField> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, POLY_LEN), 2 * N).prop_map(|cs| {
        let comps = cs
            .iter()
            .map(|c| ScalarField::new(poly(c), chart()).unwrap())
            .collect();
        PhaseVectorField::new(chart(), comps).unwrap()
    })
}

fn point_strategy() -> impl Strategy<Value = ChartPoint<f64>> {
    prop::collection::vec(-1.5f64..1.5, 2 * N).prop_map(|v| ChartPoint::new(chart(), v).unwrap())
}

/// Random expression over the chart mixing every grammar construct.
fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..2 * N).prop_map(Expr::var),
        (-3.0f64..3.0).prop_map(Expr::constant),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 0..4i32).prop_map(|(a, k)| Expr::powi(&a, k)),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, &a)),
            inner.clone().prop_map(|a| Expr::call(Func::Cos, &a)),
            // arguments kept positive / bounded so the point stays in the domain
            inner.clone().prop_map(|a| Expr::call(Func::Exp, &Expr::call(Func::Sin, &a))),
            inner.clone().prop_map(|a| Expr::call(Func::Log, &(Expr::powi(&a, 2) + 1.0))),
            inner.clone().prop_map(|a| Expr::call(Func::Sqrt, &(Expr::powi(&a, 2) + 0.5))),
            (inner.clone(), inner).prop_map(|(a, b)| a / (Expr::powi(&b, 2) + 1.0)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn jacobi_identity(x in field_strategy(), y in field_strategy(), z in field_strategy(), p in point_strategy()) {
        let a = lie_bracket(&x, &lie_bracket(&y, &z).unwrap()).unwrap();
        let b = lie_bracket(&y, &lie_bracket(&z, &x).unwrap()).unwrap();
        let c = lie_bracket(&z, &lie_bracket(&x, &y).unwrap()).unwrap();
        let sum = a.add(&b).add(&c).evaluate(&p).unwrap();
        for v in sum {
            prop_assert!(v.abs() <= 1e-9, "{v}");
        }
    }

    #[test]
    fn bracket_is_antisymmetric(x in field_strategy(), y in field_strategy(), p in point_strategy()) {
        let xy = lie_bracket(&x, &y).unwrap().evaluate(&p).unwrap();
        let yx = lie_bracket(&y, &x).unwrap().evaluate(&p).unwrap();
        for (a, b) in xy.iter().zip(&yx) {
            prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn nijenhuis_is_half_self_bracket(
        entries in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, POLY_LEN), 16),
        p in point_strategy(),
    ) {
        let m = ExprMatrix::from_fn(4, 4, |a, b| poly(&entries[4 * a + b]));
        let t = FullTensor11::new(chart(), m).unwrap();
        let nj = nijenhuis(&t);
        let fb = fn_bracket_11(&t, &t).unwrap();
        let frame = PhaseVectorField::coordinate_frame(chart());
        for a in &frame {
            for b in &frame {
                let u = nj.evaluate(a, b, &p).unwrap();
                let v = fb.evaluate(a, b, &p).unwrap();
                for (s, w) in u.iter().zip(&v) {
                    prop_assert!((s - 0.5 * w).abs() <= 1e-10 * s.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn symbolic_derivative_matches_central_difference(e in expr_strategy(), p in point_strategy()) {
        let f = ScalarField::new(e, chart()).unwrap();
        let Ok(v) = f.evaluate(&p) else { return Ok(()) };
        prop_assume!(v.abs() < 1e6);
        for c in 0..2 * N {
            let exact = f.d(c).evaluate(&p).unwrap();
            let h = 1e-5;
            let fd = (f.evaluate(&p.shifted(c, h)).unwrap() - f.evaluate(&p.shifted(c, -h)).unwrap()) / (2.0 * h);
            prop_assert!((exact - fd).abs() <= 1e-6 * exact.abs().max(1.0), "{exact} vs {fd}");
        }
    }

    #[test]
    fn mixed_partials_commute(e in expr_strategy(), p in point_strategy()) {
        let f = ScalarField::new(e, chart()).unwrap();
        prop_assume!(f.evaluate(&p).is_ok());
        for a in 0..2 * N {
            for b in 0..a {
                let ab = f.d(a).d(b).evaluate(&p).unwrap();
                let ba = f.d(b).d(a).evaluate(&p).unwrap();
                prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0), "{ab} vs {ba}");
            }
        }
    }

    #[test]
    fn print_then_parse_is_exact(e in expr_strategy(), p in point_strategy()) {
        let f = ScalarField::new(e, chart()).unwrap();
        let back = ScalarField::parse(&f.to_string(), chart()).unwrap();
        match (f.evaluate(&p), back.evaluate(&p)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}

#[test]
fn evaluation_is_generic_over_f32() {
    let c = CoordinateChart::cotangent(1);
    let f = ScalarField::parse("0.5*(1+x1^2)*p1^2", c).unwrap();
    let p32 = ChartPoint::new(c, vec![1.0f32, 0.5]).unwrap();
    assert_eq!(f.evaluate(&p32).unwrap(), 0.25f32);
    let p64 = ChartPoint::new(c, vec![1.0f64, 0.5]).unwrap();
    assert_eq!(f.d(1).evaluate(&p64).unwrap(), 1.0);
}
