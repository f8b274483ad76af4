mod common;

use std::sync::Arc;

use common::{expr, fig_germ, fig_net, fig_operator, random_case, s1_net};
use fractalis_core::approx::{epsilon_approximate, ApproxSettings};
use fractalis_core::field::FieldRef;
use fractalis_core::fractal::{rb_apply_grid, solve_fixed_point_grid, Admission};
use fractalis_core::operator::{neumann_inverse, sample_fractal, FractalOperator};
use fractalis_core::{FractalConfig, GridFunction, OperatorSpec, UniformGrid};

#[test]
fn rb_grid_fixed_point_matches_the_recursion() {
    let cfg = FractalConfig::new(s1_net(), expr("x1", 1), expr("0.5", 1), expr("x1^2", 1), Admission::default()).unwrap();
    let grid = UniformGrid::aligned(cfg.net(), 65).unwrap();
    let solution = solve_fixed_point_grid(&cfg, grid.resolution(), 1e-12, 200).unwrap();
    let direct = sample_fractal(&cfg, &grid, 1e-13).unwrap();
    let gap = solution.solution.sup_distance(&direct).unwrap();
    assert!(gap <= 2e-12, "gap {gap}");
    assert!(solution.residuals.windows(2).all(|w| w[1] <= w[0] * 0.5 + 1e-15));
}

#[test]
fn rb_grid_fixed_point_matches_the_recursion_in_two_dimensions() {
    let fop = FractalOperator::constant(fig_net(), 0.4, fig_operator(17), 17).unwrap();
    let cfg = fop.apply(fig_germ()).unwrap();
    let grid = UniformGrid::aligned(cfg.net(), 17).unwrap();
    let solution = solve_fixed_point_grid(&cfg, grid.resolution(), 1e-11, 200).unwrap();
    let direct = sample_fractal(&cfg, &grid, 1e-12).unwrap();
    assert!(solution.solution.sup_distance(&direct).unwrap() <= 2e-11);
    let image = rb_apply_grid(&cfg, &direct).unwrap();
    assert!(image.sup_distance(&direct).unwrap() <= 1e-11);
}

#[test]
fn neumann_iteration_recovers_a_known_preimage() {
    let mut solved = 0;
    for seed in [3u64, 11, 29, 41, 57] {
        let case = random_case(seed, 1, 0.3, 33);
        let Ok(fop) = FractalOperator::new(
            case.net.clone(),
            case.alpha.clone(),
            case.op.clone(),
            Admission {
                points_per_axis: 33,
                margin: 0.0,
            },
        ) else {
            continue;
        };
        if fop.alpha_sup() >= 1.0 / (1.0 + case.op.norm_id_minus_d()) {
            continue;
        }
        let grid = UniformGrid::aligned(&case.net, 33).unwrap();
        let u0 = GridFunction::sample(case.f.as_ref(), &grid).unwrap();
        let image = fop.clone().with_points(33).apply(Arc::new(u0.clone())).unwrap();
        let g = sample_fractal(&image, &grid, 1e-13).unwrap();
        let tol = 1e-10;
        let solution = neumann_inverse(&fop, &g, &grid, tol, 500).unwrap();
        let error = solution.solution.sup_distance(&u0).unwrap();
        assert!(error <= 10.0 * tol, "seed {seed}: |u - f| = {error}");
        assert!(solution.norm_check.pass);
        assert!(solution.observed_contraction <= 1.1 * solution.contraction_bound + 1e-12);
        solved += 1;
    }
    assert!(solved >= 3, "only {solved} admissible cases");
}

#[test]
fn neumann_iteration_recovers_a_blend_preimage_in_two_dimensions() {
    let net = fig_net();
    let fop = FractalOperator::constant(net.clone(), 0.3, OperatorSpec::blend(0.5).unwrap(), 17).unwrap();
    let grid = UniformGrid::aligned(&net, 17).unwrap();
    let f: FieldRef = expr("sin(2*x1) * cos(x2) + x1*x2", 2);
    let u0 = GridFunction::sample(f.as_ref(), &grid).unwrap();
    let g = sample_fractal(&fop.apply(Arc::new(u0.clone())).unwrap(), &grid, 1e-13).unwrap();
    let tol = 1e-9;
    let solution = neumann_inverse(&fop, &g, &grid, tol, 500).unwrap();
    assert!(solution.solution.sup_distance(&u0).unwrap() <= 10.0 * tol);
}

#[test]
fn epsilon_approximation_obeys_the_triangle_inequality() {
    let net = fig_net();
    let op = OperatorSpec::blend(1.0).unwrap();
    let settings = ApproxSettings::uniform(2, 8, 41, 17, 1e-9);
    for eps in [0.2, 0.1, 0.02] {
        let result = epsilon_approximate(fig_germ().as_ref(), eps, &net, &op, &settings).unwrap();
        assert!(result.pass);
        assert!(result.achieved < eps);
        assert!(result.fit_error < eps / 2.0);
        assert!(result.fractal_gap <= result.fractal_gap_bound + 1e-9);
        assert!(result.fractal_gap_bound <= eps / 2.0 + 1e-12);
        assert!(result.achieved <= result.fit_error + result.fractal_gap + 1e-9);
    }
}
