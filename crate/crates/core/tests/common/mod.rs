#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use fractalis_core::field::{from_fn, FieldRef};
use fractalis_core::fractal::Admission;
use fractalis_core::operator::{FractalOperator, OperatorSpec};
use fractalis_core::sampling::random_smooth_field;
use fractalis_core::{parse_field, Domain, Net};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn expr(src: &str, k: usize) -> FieldRef {
    Arc::new(parse_field(src, k).unwrap())
}

pub fn s1_net() -> Net {
    Net::build(Domain::unit(1).unwrap(), vec![vec![0.0, 0.5, 1.0]]).unwrap()
}

pub fn fig_net() -> Net {
    Net::uniform(Domain::cube(2, -1.0, 1.0).unwrap(), &[4, 4]).unwrap()
}

pub fn fig_germ() -> FieldRef {
    expr("exp(-x1^2 - x2^2)", 2)
}

pub fn fig_operator(points: usize) -> OperatorSpec {
    OperatorSpec::multiplication(expr("x1^2*x2^2", 2), &fig_net(), points).unwrap()
}

pub struct RandomCase {
    pub net: Net,
    pub f: FieldRef,
    pub g: FieldRef,
    pub alpha: FieldRef,
    pub amplitude: f64,
    pub op: OperatorSpec,
}

impl RandomCase {
    pub fn operator(&self, points: usize) -> FractalOperator {
        FractalOperator::new(
            self.net.clone(),
            self.alpha.clone(),
            self.op.clone(),
            Admission {
                points_per_axis: points,
                margin: 0.0,
            },
        )
        .unwrap()
    }
}

/// Uniform net with 2 to 5 cells per axis on a random box, smooth random
/// germs, a cosine scale function bounded by `amplitude`, and either a
/// multiplication or a blend operator.
pub fn random_case(seed: u64, dim: usize, max_amplitude: f64, points: usize) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lower: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..0.5)).collect();
    let upper: Vec<f64> = lower.iter().map(|u| u + rng.gen_range(0.5..2.0)).collect();
    let domain = Domain::new(lower.clone(), upper.clone()).unwrap();
    let cells: Vec<usize> = (0..dim).map(|_| rng.gen_range(2..=5)).collect();
    let net = Net::uniform(domain, &cells).unwrap();
    let f = random_smooth_field(dim, 3, rng.gen());
    let g = random_smooth_field(dim, 3, rng.gen());
    let amplitude = rng.gen_range(0.0..=max_amplitude);
    let (w, phi) = (rng.gen_range(0.0..4.0), rng.gen_range(0.0..2.0 * PI));
    let alpha = from_fn(dim, move |p| amplitude * (0.6 + 0.4 * (w * p[0] + phi).cos()));
    let op = if rng.gen_bool(0.5) {
        let c: f64 = rng.gen_range(-1.0..1.0);
        let (lo, hi) = (lower.clone(), upper.clone());
        let b = from_fn(dim, move |p| {
            let bump: f64 = p
                .iter()
                .enumerate()
                .map(|(q, x)| (PI * (x - lo[q]) / (hi[q] - lo[q])).sin())
                .product();
            1.0 + c * bump
        });
        OperatorSpec::multiplication(b, &net, points).unwrap()
    } else {
        OperatorSpec::blend(rng.gen_range(0.1..=1.0)).unwrap()
    };
    RandomCase {
        net,
        f,
        g,
        alpha,
        amplitude,
        op,
    }
}
