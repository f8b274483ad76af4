//! `L^p` norms by tensor trapezoid quadrature, and the `L^p` forms of the
//! perturbation bound for real and complex fields.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Field, FieldRef};
use crate::fractal::FractalConfig;
use crate::grid::{GridFunction, UniformGrid};
use crate::net::{Domain, Net};
use crate::operator::{sample_fractal, BoundsReport, FractalOperator};

/// Relative margin allowed for quadrature error in inequality checks.
pub const QUADRATURE_MARGIN: f64 = 0.05;
/// Absolute margin allowed for quadrature error in inequality checks.
pub const QUADRATURE_FLOOR: f64 = 1e-8;

/// Composite trapezoid rule on a tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    grid: UniformGrid,
    axis_weights: Vec<Vec<f64>>,
}

impl QuadratureRule {
    /// `resolution` points per axis, each odd and at least 3.
    pub fn new(domain: Domain, resolution: Vec<usize>) -> Result<Self> {
        if let Some(&r) = resolution.iter().find(|&&r| r < 3 || r % 2 == 0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "quadrature resolution must be odd and at least 3, got {r}"
            )));
        }
        let grid = UniformGrid::new(domain, resolution)?;
        let axis_weights = (0..grid.dim())
            .map(|q| {
                let r = grid.resolution()[q];
                let h = grid.spacing(q);
                (0..r)
                    .map(|i| if i == 0 || i + 1 == r { h / 2.0 } else { h })
                    .collect()
            })
            .collect();
        Ok(Self { grid, axis_weights })
    }

    /// Rule on the net's box. For equally spaced knots the resolution is
    /// raised to refine every cell evenly (and kept odd).
    pub fn for_net(net: &Net, min_points: usize) -> Result<Self> {
        let aligned = UniformGrid::aligned(net, min_points.max(3))?;
        let resolution = aligned
            .resolution()
            .iter()
            .map(|&r| if r % 2 == 1 { r } else { 2 * r - 1 })
            .collect();
        Self::new(net.domain().clone(), resolution)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn weight(&self, index: usize) -> f64 {
        let mut rem = index;
        let mut w = 1.0;
        for (q, weights) in self.axis_weights.iter().enumerate() {
            let r = self.grid.resolution()[q];
            w *= weights[rem % r];
            rem /= r;
        }
        w
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.weight(i)).collect()
    }

    /// `Σ w_i v_i`
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                found: values.len(),
            });
        }
        Ok(values
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v)
            .sum())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "p must be finite and at least 1, got {p}"
        )));
    }
    Ok(())
}

/// `(Σ w_i |v_i|^p)^{1/p}` for samples on the rule's grid.
pub fn lp_norm_samples(values: &[f64], p: f64, rule: &QuadratureRule) -> Result<f64> {
    check_p(p)?;
    let powered: Vec<f64> = values.iter().map(|v| libm::pow(libm::fabs(*v), p)).collect();
    Ok(libm::pow(rule.integrate(&powered)?, 1.0 / p))
}

pub fn lp_norm(field: &dyn Field, p: f64, rule: &QuadratureRule) -> Result<f64> {
    check_p(p)?;
    let samples = GridFunction::sample(field, rule.grid())?;
    lp_norm_samples(samples.values(), p, rule)
}

/// Slack allowed on a quadrature inequality with right-hand side `rhs`.
pub fn quadrature_allowance(rhs: f64) -> f64 {
    QUADRATURE_MARGIN * rhs + QUADRATURE_FLOOR
}

/// `‖f − f^α‖_p ≤ ‖α‖/(1 − ‖α‖) · ‖f − s‖_p`
pub fn lp_perturbation_gap(
    cfg: &FractalConfig,
    p: f64,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<BoundsReport> {
    check_p(p)?;
    let grid = rule.grid();
    let fa = sample_fractal(cfg, grid, tol)?;
    let f = GridFunction::sample(cfg.germ().as_ref(), grid)?;
    let s = GridFunction::sample(cfg.base().as_ref(), grid)?;
    let dev: Vec<f64> = fa.values().iter().zip(f.values()).map(|(a, b)| a - b).collect();
    let gap: Vec<f64> = f.values().iter().zip(s.values()).map(|(a, b)| a - b).collect();
    let a = cfg.alpha_sup();
    let lhs = lp_norm_samples(&dev, p, rule)?;
    let rhs = a / (1.0 - a) * lp_norm_samples(&gap, p, rule)?;
    Ok(BoundsReport::new(lhs, rhs, quadrature_allowance(rhs) + tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MConstant {
    /// `2^{1/2 + 1/p}`
    pub general: f64,
    /// `2^{1/2 − 1/p}`, for `p ≥ 2`.
    pub refined: Option<f64>,
}

pub fn m_constant(p: f64) -> Result<MConstant> {
    check_p(p)?;
    Ok(MConstant {
        general: libm::pow(2.0, 0.5 + 1.0 / p),
        refined: (p >= 2.0).then(|| libm::pow(2.0, 0.5 - 1.0 / p)),
    })
}

/// `f = f_1 + i f_2`
#[derive(Clone)]
pub struct ComplexFieldPair {
    pub re: FieldRef,
    pub im: FieldRef,
}

impl ComplexFieldPair {
    pub fn new(re: FieldRef, im: FieldRef) -> Result<Self> {
        if re.arity() != im.arity() {
            return Err(Error::DimensionMismatch {
                expected: re.arity(),
                found: im.arity(),
            });
        }
        Ok(Self { re, im })
    }

    pub fn arity(&self) -> usize {
        self.re.arity()
    }
}

/// `F_C^α(f) = F^α(f_1) + i F^α(f_2)`, as the two real configurations.
#[derive(Clone, Debug)]
pub struct ComplexFractal {
    pub re: FractalConfig,
    pub im: FractalConfig,
}

pub fn complexify_apply(fop: &FractalOperator, pair: &ComplexFieldPair) -> Result<ComplexFractal> {
    Ok(ComplexFractal {
        re: fop.apply(pair.re.clone())?,
        im: fop.apply(pair.im.clone())?,
    })
}

fn modulus(re: &[f64], im: &[f64]) -> Vec<f64> {
    re.iter().zip(im).map(|(a, b)| libm::hypot(*a, *b)).collect()
}

/// `‖F_C f‖_2² = ‖F f_1‖_2² + ‖F f_2‖_2²`, the left side through the modulus.
pub fn complex_l2_identity_check(
    result: &ComplexFractal,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<BoundsReport> {
    let grid = rule.grid();
    let a = sample_fractal(&result.re, grid, tol)?;
    let b = sample_fractal(&result.im, grid, tol)?;
    let lhs = libm::pow(lp_norm_samples(&modulus(a.values(), b.values()), 2.0, rule)?, 2.0);
    let rhs = libm::pow(lp_norm_samples(a.values(), 2.0, rule)?, 2.0)
        + libm::pow(lp_norm_samples(b.values(), 2.0, rule)?, 2.0);
    Ok(BoundsReport {
        lhs,
        rhs,
        slack: rhs - lhs,
        pass: libm::fabs(lhs - rhs) <= 1e-12 * lhs.max(rhs).max(1.0),
    })
}

/// `‖F_C f − f‖_p ≤ M ‖α‖ ‖F_C f − D_C f‖_p` with the supplied constant.
pub fn complex_perturbation_gap(
    result: &ComplexFractal,
    p: f64,
    m: f64,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<BoundsReport> {
    check_p(p)?;
    let grid = rule.grid();
    let sample = |f: &FieldRef| GridFunction::sample(f.as_ref(), grid);
    let a = sample_fractal(&result.re, grid, tol)?;
    let b = sample_fractal(&result.im, grid, tol)?;
    let (f1, f2) = (sample(result.re.germ())?, sample(result.im.germ())?);
    let (s1, s2) = (sample(result.re.base())?, sample(result.im.base())?);
    let diff = |x: &GridFunction, y: &GridFunction| -> Vec<f64> {
        x.values().iter().zip(y.values()).map(|(u, v)| u - v).collect()
    };
    let lhs = lp_norm_samples(&modulus(&diff(&a, &f1), &diff(&b, &f2)), p, rule)?;
    let base = lp_norm_samples(&modulus(&diff(&a, &s1), &diff(&b, &s2)), p, rule)?;
    let alpha = result.re.alpha_sup().max(result.im.alpha_sup());
    let rhs = m * alpha * base;
    Ok(BoundsReport::new(lhs, rhs, quadrature_allowance(rhs) + tol))
}

/// Integrals of `|f|^p` at successive resolutions `r, 2r − 1, 4r − 3, …`,
/// for convergence studies.
pub fn refinement_sequence(
    field: &dyn Field,
    p: f64,
    domain: &Domain,
    start: usize,
    levels: usize,
) -> Result<Vec<f64>> {
    let mut r = start;
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        let rule = QuadratureRule::new(domain.clone(), vec![r; domain.dim()])?;
        out.push(lp_norm(field, p, &rule)?);
        r = 2 * r - 1;
    }
    Ok(out)
}
