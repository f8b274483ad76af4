mod common;

use std::sync::Arc;

use common::{expr, random_case};
use fractalis_core::approx::{faber_schauder, schauder_coefficients, TensorPolynomial};
use fractalis_core::field::FieldRef;
use fractalis_core::fractal::{interpolation_check, Admission, FifData};
use fractalis_core::lp::{
    complex_l2_identity_check, complexify_apply, lp_norm, ComplexFieldPair, QuadratureRule,
};
use fractalis_core::net::{eta, CellIndex};
use fractalis_core::operator::{fixed_point_check, linearity_check, perturbation_gap, FractalOperator, NetInterpolant};
use fractalis_core::sampling::{random_points, random_smooth_field};
use fractalis_core::{parse_field, Domain, Field, Net, OperatorSpec};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// Knot list on `[lo, lo + width]` with `cells` cells of random widths.
fn knots(lo: f64, width: f64, weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut out = vec![lo];
    for w in &weights[..weights.len() - 1] {
        acc += w / total;
        out.push(lo + width * acc);
    }
    out.push(lo + width);
    out
}

/// Neumaier summation.
fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

fn net_strategy(max_dim: usize) -> impl Strategy<Value = Net> {
    (1..=max_dim)
        .prop_flat_map(|k| {
            (
                prop::collection::vec(-2.0f64..1.0, k),
                prop::collection::vec(0.5f64..3.0, k),
                prop::collection::vec(prop::collection::vec(0.2f64..1.0, 2..6), k),
            )
        })
        .prop_map(|(lo, width, weights)| {
            let upper: Vec<f64> = lo.iter().zip(&width).map(|(l, w)| l + w).collect();
            let lists = (0..lo.len()).map(|q| knots(lo[q], width[q], &weights[q])).collect();
            Net::build(Domain::new(lo, upper).unwrap(), lists).unwrap()
        })
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn perturbation_bound_holds_on_random_configs(seed in any::<u64>(), dim in 1usize..=2) {
        let case = random_case(seed, dim, 0.6, 9);
        let cfg = case.operator(9).apply(case.f.clone()).unwrap();
        let report = perturbation_gap(&cfg, 17, 1e-8).unwrap();
        prop_assert!(report.gap.pass, "{:?}", report.gap);
        let norm_form = report.norm_form.unwrap();
        prop_assert!(norm_form.pass, "{:?}", norm_form);
    }

    #[test]
    fn operator_is_linear_on_random_configs(
        seed in any::<u64>(),
        dim in 1usize..=2,
        beta in -2.0f64..2.0,
        gamma in -2.0f64..2.0,
    ) {
        let case = random_case(seed, dim, 0.6, 9);
        let fop = case.operator(9);
        let points = random_points(case.net.domain(), 40, seed);
        let report = linearity_check(&fop, case.f.clone(), case.g.clone(), beta, gamma, &points, 1e-10).unwrap();
        prop_assert!(report.pass, "{:?}", report);
    }

    #[test]
    fn fractal_functions_interpolate_at_the_nodes(seed in any::<u64>(), dim in 1usize..=3) {
        let case = random_case(seed, dim, 0.6, 5);
        let cfg = case.operator(5).apply(case.f.clone()).unwrap();
        let report = interpolation_check(&cfg, 1e-9).unwrap();
        prop_assert!(report.pass);
        prop_assert!(report.max_error <= 1e-9);
    }

    #[test]
    fn multilinear_interpolants_are_fixed_under_blend(
        seed in any::<u64>(),
        dim in 1usize..=2,
        t in 0.1f64..=1.0,
        a in 0.0f64..0.9,
    ) {
        let case = random_case(seed, dim, 0.5, 9);
        let fop = FractalOperator::constant(case.net.clone(), a, OperatorSpec::blend(t).unwrap(), 9).unwrap();
        let lf: FieldRef = Arc::new(NetInterpolant::new(&case.net, case.f.as_ref()).unwrap());
        let report = fixed_point_check(&fop, lf, 9, 1e-10).unwrap();
        prop_assert!(report.pass, "{:?}", report);
        prop_assert!(report.lhs <= 1e-9);
    }

    #[test]
    fn random_polynomials_are_interpolated(
        coeffs in prop::collection::vec(-3.0f64..3.0, 9),
        a in -0.6f64..0.6,
    ) {
        let net = common::fig_net();
        let p: FieldRef = Arc::new(TensorPolynomial::new(vec![2, 2], coeffs).unwrap());
        let fop = FractalOperator::constant(net, a, common::fig_operator(9), 9).unwrap();
        let report = interpolation_check(&fop.apply(p).unwrap(), 1e-10).unwrap();
        prop_assert!(report.pass);
    }

    #[test]
    fn complex_l2_modulus_identity(seed in any::<u64>(), dim in 1usize..=2) {
        let case = random_case(seed, dim, 0.6, 9);
        let pair = ComplexFieldPair::new(case.f.clone(), case.g.clone()).unwrap();
        let result = complexify_apply(&case.operator(9), &pair).unwrap();
        let rule = QuadratureRule::for_net(&case.net, 9).unwrap();
        let report = complex_l2_identity_check(&result, &rule, 1e-10).unwrap();
        prop_assert!(report.pass, "{:?}", report);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn schauder_system_is_biorthogonal(n in 1usize..=40, m in 1usize..=40) {
        let e: FieldRef = Arc::new(faber_schauder(m).unwrap());
        let a = schauder_coefficients(e.as_ref(), n.max(m)).unwrap();
        let expected = if n == m { 1.0 } else { 0.0 };
        prop_assert!((a[n - 1] - expected).abs() <= 1e-14, "a_{}(e_{}) = {}", n, m, a[n - 1]);
    }

    #[test]
    fn quadrature_weights_sum_to_the_volume(
        lo in prop::collection::vec(-3.0f64..3.0, 1..=3),
        seed in any::<u64>(),
        half in 1usize..20,
    ) {
        let upper: Vec<f64> = lo.iter().enumerate().map(|(q, l)| l + 0.5 + ((seed >> (8 * q)) & 0xff) as f64 / 64.0).collect();
        let domain = Domain::new(lo.clone(), upper).unwrap();
        let volume = domain.volume();
        let rule = QuadratureRule::new(domain, vec![2 * half + 1; lo.len()]).unwrap();
        let sum = compensated_sum(&rule.weights());
        prop_assert!((sum - volume).abs() <= 1e-12 * volume.max(1.0));
        prop_assert!(rule.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn lp_norms_increase_with_p_on_the_unit_box(seed in any::<u64>(), dim in 1usize..=2, p in 1.0f64..4.0, dp in 0.0f64..4.0) {
        let f = random_smooth_field(dim, 4, seed);
        let rule = QuadratureRule::new(Domain::unit(dim).unwrap(), vec![17; dim]).unwrap();
        let low = lp_norm(f.as_ref(), p, &rule).unwrap();
        let high = lp_norm(f.as_ref(), p + dp, &rule).unwrap();
        prop_assert!(low <= high * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn jacobians_sum_to_one(net in net_strategy(3)) {
        prop_assert!((net.jacobian_sum() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn cell_maps_send_box_ends_to_eta_knots(net in net_strategy(2)) {
        for q in 0..net.dim() {
            let axis = net.axis(q);
            let n = axis.cells();
            for j in 1..=n {
                let map = net.cell_map(q, j).unwrap();
                let (e0, en) = (eta(j, 0, n).unwrap(), eta(j, n, n).unwrap());
                prop_assert_eq!(e0.abs_diff(en), 1);
                prop_assert!(e0.min(en) == j - 1);
                prop_assert!((map.apply(axis.lower()) - axis.knots()[e0]).abs() <= 1e-12);
                prop_assert!((map.apply(axis.upper()) - axis.knots()[en]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn locate_follows_half_open_cells(net in net_strategy(1), u in 0.0f64..=1.0) {
        let axis = net.axis(0);
        let x = axis.lower() + u * (axis.upper() - axis.lower());
        let j = axis.locate(x);
        let k = axis.knots();
        prop_assert!((1..=axis.cells()).contains(&j));
        prop_assert!(x <= k[j]);
        prop_assert!(x > k[j - 1] || j == 1);
        for (i, &knot) in k.iter().enumerate().skip(1) {
            prop_assert_eq!(axis.locate(knot), i);
        }
    }

    #[test]
    fn neighbouring_inverses_agree_at_shared_knots(net in net_strategy(2)) {
        for q in 0..net.dim() {
            let axis = net.axis(q);
            for j in 1..axis.cells() {
                let knot = axis.knots()[j];
                let left = net.cell_map(q, j).unwrap().inverse(knot).unwrap();
                let right = net.cell_map(q, j + 1).unwrap().inverse(knot).unwrap();
                prop_assert!((left - right).abs() <= 1e-12);
                prop_assert!(left == axis.lower() || left == axis.upper());
            }
        }
    }

    #[test]
    fn locating_a_mapped_interior_point_returns_its_cell(net in net_strategy(1), u in 0.001f64..0.999) {
        let axis = net.axis(0);
        let x = axis.lower() + u * (axis.upper() - axis.lower());
        for j in 1..=axis.cells() {
            let map = net.cell_map(0, j).unwrap();
            let y = map.apply(x);
            prop_assert_eq!(axis.locate(y), j);
            prop_assert!((map.inverse(y).unwrap() - x).abs() <= 1e-12);
        }
    }

    #[test]
    fn points_land_in_their_cells(net in net_strategy(2), seed in any::<u64>()) {
        for point in random_points(net.domain(), 10, seed) {
            let cell = net.locate_cell(&point).unwrap();
            for (q, x) in point.iter().enumerate() {
                let (lo, hi) = net.cell_map(q, cell.0[q]).unwrap().cell_bounds();
                prop_assert!(lo <= *x && *x <= hi);
            }
        }
    }
}

fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (-5.0f64..5.0).prop_map(|c| format!("{c}")),
        (1usize..=2).prop_map(|i| format!("x{i}")),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]), inner.clone())
                .prop_map(|(l, op, r)| format!("({l}) {op} ({r})")),
            inner.clone().prop_map(|e| format!("-({e})")),
            (prop::sample::select(vec!["sin", "cos", "exp", "abs", "sqrt"]), inner)
                .prop_map(|(f, e)| format!("{f}({e})")),
        ]
    })
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn printed_expressions_reparse_to_the_same_tree(src in expression()) {
        let parsed = parse_field(&src, 2).unwrap();
        let printed = parsed.to_string();
        let again = parse_field(&printed, 2).unwrap();
        prop_assert_eq!(parsed.ast(), again.ast());
        for point in [[0.3, -0.7], [1.1, 0.4]] {
            match (parsed.eval(&point), again.eval(&point)) {
                (Ok(a), Ok(b)) => prop_assert!(a.to_bits() == b.to_bits()),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }
    }

    #[test]
    fn fif_attractor_identity(
        z in prop::collection::vec(-2.0f64..2.0, 4),
        delta in -0.5f64..0.5,
        u in 0.0f64..=1.0,
    ) {
        let net = common::s1_net();
        let mut values = vec![0.0; 3];
        values.copy_from_slice(&z[..3]);
        let data = FifData::new(net.clone(), values, delta).unwrap();
        let tol = 1e-12;
        let a_x = data.eval(&[u], tol).unwrap().value;
        for j in 1..=2 {
            let cell = CellIndex(vec![j]);
            let y = net.apply_cell(&cell, &[u]).unwrap();
            let lhs = data.eval(&y, tol).unwrap().value;
            let rhs = delta * a_x + data.vertical_offset(&cell, &[u]).unwrap();
            prop_assert!((lhs - rhs).abs() <= 4.0 * tol, "cell {}: {} vs {}", j, lhs, rhs);
        }
    }
}

#[test]
fn fixed_scale_admission_rejects_sup_at_least_one() {
    let net = common::s1_net();
    let admission = Admission {
        points_per_axis: 9,
        margin: 0.0,
    };
    let op = OperatorSpec::blend(0.5).unwrap();
    assert!(FractalOperator::new(net.clone(), expr("1", 1), op.clone(), admission).is_err());
    assert!(FractalOperator::new(net, expr("0.99*x1", 1), op, admission).is_ok());
}
