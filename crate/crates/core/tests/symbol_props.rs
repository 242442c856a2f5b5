use frechet_flow::symbol::{audit_order, default_audit_samples, diffop_to_symbol, parse_diffop};
use frechet_flow::{parse_symbol, Convention, Symbol};
use proptest::prelude::*;

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..20).prop_map(|n| n.to_string()),
        (0u32..100).prop_map(|n| format!("{}.{}", n / 10, n % 10)),
        Just("xi".to_string()),
        Just("pi".to_string()),
        Just("i".to_string()),
    ]
}

fn expr() -> impl Strategy<Value = String> {
    atom().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.prop_map(|a| format!("({a})/4")),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_fixpoint(text in expr()) {
        let first = parse_symbol(&text, 1).unwrap();
        let printed = first.to_string();
        let second = parse_symbol(&printed, 1).unwrap();
        prop_assert_eq!(second.to_string(), printed);
    }

    #[test]
    fn expansion_agrees_with_tree(text in expr(), xi in -3.0..3.0f64) {
        let tree = parse_symbol(&text, 1).unwrap();
        let poly = tree.to_polynomial().unwrap();
        let (a, b) = (tree.value(&[xi]), poly.value(&[xi]));
        prop_assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()), "{} vs {}", a, b);
    }

    #[test]
    fn heat_symbol_order_two(scale in 0.1..10.0f64) {
        let s = parse_symbol(&format!("-{scale}*(1 + 4*pi^2*xi^2)"), 1).unwrap().to_polynomial().unwrap();
        prop_assert!(audit_order(&s, 2, &default_audit_samples(1)).pass());
    }
}

#[test]
fn diffop_conventions_agree() {
    // d/dx in the ∂ convention is 2πi·ξ, and D = (1/2πi)∂ is ξ
    let coeffs = parse_diffop("1:1,0", 1).unwrap();
    let p = diffop_to_symbol(1, &coeffs, Convention::Partial).unwrap();
    let parsed = parse_symbol("2*pi*i*xi", 1).unwrap().to_polynomial().unwrap();
    assert_eq!(p, parsed);
    let d = diffop_to_symbol(1, &coeffs, Convention::D).unwrap();
    assert_eq!(d, parse_symbol("xi", 1).unwrap().to_polynomial().unwrap());
}

#[test]
fn two_dim_laplacian() {
    let s = parse_symbol("-4*pi^2*(xi1^2 + xi2^2)", 2).unwrap();
    let v = s.value(&[1.0, 1.0]);
    assert!((v.re + 8.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    assert!(parse_symbol("xi", 2).is_err());
}
