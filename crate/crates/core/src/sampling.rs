//! Seeded random points and fields for property checks.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{from_fn, FieldRef};
use crate::net::Domain;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn random_point(rng: &mut impl Rng, domain: &Domain) -> Vec<f64> {
    domain
        .lower()
        .iter()
        .zip(domain.upper())
        .map(|(&u, &w)| rng.gen_range(u..=w))
        .collect()
}

/// `count` uniformly distributed points in `domain`, reproducible from `seed`.
pub fn random_points(domain: &Domain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    (0..count).map(|_| random_point(&mut rng, domain)).collect()
}

/// Smooth random field `c_0 + Σ_t c_t ∏_q cos(ω_{t,q} x_q + φ_{t,q})` with
/// `terms` products, coefficients in `[−1, 1]` and frequencies in `[0, 3]`.
pub fn random_smooth_field(dim: usize, terms: usize, seed: u64) -> FieldRef {
    let mut rng = rng(seed);
    let c0: f64 = rng.gen_range(-1.0..=1.0);
    let parts: Vec<(f64, Vec<(f64, f64)>)> = (0..terms)
        .map(|_| {
            let c = rng.gen_range(-1.0..=1.0);
            let waves = (0..dim)
                .map(|_| (rng.gen_range(0.0..=3.0), rng.gen_range(0.0..=core::f64::consts::TAU)))
                .collect();
            (c, waves)
        })
        .collect();
    from_fn(dim, move |p| {
        c0 + parts
            .iter()
            .map(|(c, waves)| {
                c * waves
                    .iter()
                    .zip(p)
                    .map(|((w, phi), x)| libm::cos(w * x + phi))
                    .product::<f64>()
            })
            .sum::<f64>()
    })
}
