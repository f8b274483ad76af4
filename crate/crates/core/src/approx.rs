//! Tensor polynomials, fractal polynomials `p^α = F^α(p)`, the
//! ε-approximation procedure, and a fractal Faber–Schauder basis on `[0,1]`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{check_arity, Field, FieldRef};
use crate::fractal::FractalConfig;
use crate::grid::{GridFunction, UniformGrid};
use crate::net::{Domain, Net};
use crate::operator::{
    neumann_inverse, operator_norm_upper, sample_fractal, FractalOperator, NeumannSolution,
    OperatorSpec,
};

/// `p(x) = Σ a_{i_1…i_k} x_1^{i_1} ⋯ x_k^{i_k}` with `i_q ≤ m_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPolynomial {
    degrees: Vec<usize>,
    /// First exponent fastest.
    coeffs: Vec<f64>,
}

impl TensorPolynomial {
    pub fn new(degrees: Vec<usize>, coeffs: Vec<f64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidArgument("polynomial needs at least one variable".into()));
        }
        let len: usize = degrees.iter().map(|m| m + 1).product();
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: coeffs.len(),
            });
        }
        Ok(Self { degrees, coeffs })
    }

    pub fn constant(value: f64, arity: usize) -> Self {
        Self {
            degrees: vec![0; arity],
            coeffs: vec![value],
        }
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^exponents`.
    pub fn coeff(&self, exponents: &[usize]) -> f64 {
        let mut offset = 0;
        for (q, &i) in exponents.iter().enumerate().rev() {
            if i > self.degrees[q] {
                return 0.0;
            }
            offset = offset * (self.degrees[q] + 1) + i;
        }
        self.coeffs[offset]
    }

    /// Nested Horner evaluation, innermost over the first variable.
    pub fn eval_at(&self, point: &[f64]) -> Result<f64> {
        check_arity(self.degrees.len(), point)?;
        Ok(horner(&self.coeffs, &self.degrees, point))
    }
}

fn horner(coeffs: &[f64], degrees: &[usize], point: &[f64]) -> f64 {
    let k = degrees.len();
    if k == 1 {
        return coeffs.iter().rev().fold(0.0, |acc, c| acc * point[0] + c);
    }
    // outermost variable is the last one
    let stride: usize = degrees[..k - 1].iter().map(|m| m + 1).product();
    let x = point[k - 1];
    let mut acc = 0.0;
    for i in (0..=degrees[k - 1]).rev() {
        let inner = horner(&coeffs[i * stride..(i + 1) * stride], &degrees[..k - 1], point);
        acc = acc * x + inner;
    }
    acc
}

impl Field for TensorPolynomial {
    fn arity(&self) -> usize {
        self.degrees.len()
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        self.eval_at(point)
    }
}

pub fn poly_eval(p: &TensorPolynomial, point: &[f64]) -> Result<f64> {
    p.eval_at(point)
}

/// Apply the `rows × cols` matrix `m` along `axis` of a tensor of `shape`
/// (first axis fastest).
fn mode_product(data: &[f64], shape: &[usize], axis: usize, m: &[f64], rows: usize) -> (Vec<f64>, Vec<usize>) {
    let cols = shape[axis];
    let inner: usize = shape[..axis].iter().product();
    let outer: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; inner * rows * outer];
    for o in 0..outer {
        for r in 0..rows {
            for c in 0..cols {
                let w = m[r * cols + c];
                if w == 0.0 {
                    continue;
                }
                let src = (o * cols + c) * inner;
                let dst = (o * rows + r) * inner;
                for i in 0..inner {
                    out[dst + i] += w * data[src + i];
                }
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = rows;
    (out, new_shape)
}

/// Solve the symmetric positive definite system `a x = b` (`a` is `n × n`).
fn cholesky_solve(a: &[f64], n: usize, b: &mut [f64]) -> Result<()> {
    let mut l = vec![0.0; n * n];
    let scale = (0..n).fold(0.0f64, |m, i| m.max(a[i * n + i]));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for p in 0..j {
                sum -= l[i * n + p] * l[j * n + p];
            }
            if i == j {
                if !(sum > 1e-13 * scale) {
                    return Err(Error::SingularSystem);
                }
                l[i * n + i] = libm::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    for i in 0..n {
        let mut sum = b[i];
        for p in 0..i {
            sum -= l[i * n + p] * b[p];
        }
        b[i] = sum / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut sum = b[i];
        for p in i + 1..n {
            sum -= l[p * n + i] * b[p];
        }
        b[i] = sum / l[i * n + i];
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Per-axis least-squares projector onto `1, t, …, t^m` (`t` the grid
/// coordinate rescaled to `[−1, 1]`), followed by the change of basis back to
/// raw monomials. Returns an `(m+1) × r` matrix.
fn axis_projector(grid: &UniformGrid, axis: usize, m: usize) -> Result<Vec<f64>> {
    let r = grid.resolution()[axis];
    let n = m + 1;
    let (u, w) = (grid.domain().lower()[axis], grid.domain().upper()[axis]);
    let scale = 2.0 / (w - u);
    let shift = -(u + w) / (w - u);
    let mut v = vec![0.0; r * n];
    for i in 0..r {
        let t = scale * grid.coordinate(axis, i) + shift;
        let mut pw = 1.0;
        for c in 0..n {
            v[i * n + c] = pw;
            pw *= t;
        }
    }
    let mut gram = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            gram[a * n + b] = (0..r).map(|i| v[i * n + a] * v[i * n + b]).sum();
        }
    }
    // columns of (V^T V)^{-1} V^T, one grid line at a time
    let mut pinv = vec![0.0; n * r];
    let mut col = vec![0.0; n];
    for i in 0..r {
        col.copy_from_slice(&v[i * n..(i + 1) * n]);
        cholesky_solve(&gram, n, &mut col)?;
        for c in 0..n {
            pinv[c * r + i] = col[c];
        }
    }
    // raw_l = Σ_i scaled_i · C(i, l) scale^l shift^{i−l}
    let mut basis = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..=i {
            basis[l * n + i] =
                binomial(i, l) * libm::pow(scale, l as f64) * libm::pow(shift, (i - l) as f64);
        }
    }
    let mut out = vec![0.0; n * r];
    for l in 0..n {
        for i in 0..r {
            out[l * r + i] = (0..n).map(|c| basis[l * n + c] * pinv[c * r + i]).sum();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub poly: TensorPolynomial,
    /// Grid sup of `|f − p|` on the fitting grid.
    pub residual: f64,
}

/// Least-squares fit of `f` on the tensor grid `resolution` over `domain`.
pub fn poly_fit_least_squares(
    f: &dyn Field,
    degrees: &[usize],
    domain: &Domain,
    resolution: &[usize],
) -> Result<PolyFit> {
    if degrees.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: degrees.len(),
        });
    }
    if let Some(q) = (0..degrees.len()).find(|&q| resolution.get(q).is_some_and(|&r| r <= degrees[q])) {
        return Err(Error::InvalidArgument(alloc::format!(
            "axis {} needs more than {} grid points for degree {}",
            q + 1,
            resolution[q],
            degrees[q]
        )));
    }
    let grid = UniformGrid::new(domain.clone(), resolution.to_vec())?;
    let samples = GridFunction::sample(f, &grid)?;
    let mut data = samples.values().to_vec();
    let mut shape = resolution.to_vec();
    for (q, &m) in degrees.iter().enumerate() {
        let proj = axis_projector(&grid, q, m)?;
        let (next, next_shape) = mode_product(&data, &shape, q, &proj, m + 1);
        data = next;
        shape = next_shape;
    }
    let poly = TensorPolynomial::new(degrees.to_vec(), data)?;
    let mut residual = 0.0f64;
    let mut point = vec![0.0; grid.dim()];
    for i in 0..grid.len() {
        grid.point_into(i, &mut point);
        residual = residual.max(libm::fabs(samples.values()[i] - poly.eval_at(&point)?));
    }
    Ok(PolyFit { poly, residual })
}

/// `p^α = F^α(p)`
pub fn fractal_polynomial(fop: &FractalOperator, p: &TensorPolynomial) -> Result<FractalConfig> {
    fop.apply(Arc::new(p.clone()))
}

#[derive(Debug, Clone)]
pub struct EpsilonApproximation {
    pub poly: TensorPolynomial,
    pub degrees: Vec<usize>,
    /// Constant scale `|α|` used for `p^α`.
    pub alpha: f64,
    /// `‖f − p‖` on the check grid.
    pub fit_error: f64,
    /// `‖p − p^α‖` on the check grid.
    pub fractal_gap: f64,
    /// `‖α‖/(1 − ‖α‖) · ‖Id − D‖ · ‖p‖`, the proven bound on `fractal_gap`.
    pub fractal_gap_bound: f64,
    /// `‖f − p^α‖` on the check grid.
    pub achieved: f64,
    pub pass: bool,
    pub config: FractalConfig,
}

/// Parameters of [`epsilon_approximate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSettings {
    /// Degrees tried in order until `‖f − p‖ < ε/2`.
    pub schedule: Vec<Vec<usize>>,
    pub fit_resolution: Vec<usize>,
    /// Points per axis of the aligned check grid.
    pub check_points: usize,
    pub tol: f64,
}

impl ApproxSettings {
    /// Equal degrees `0, 1, …, max_degree` on every axis.
    pub fn uniform(dim: usize, max_degree: usize, fit_points: usize, check_points: usize, tol: f64) -> Self {
        Self {
            schedule: (0..=max_degree).map(|m| vec![m; dim]).collect(),
            fit_resolution: vec![fit_points; dim],
            check_points,
            tol,
        }
    }
}

/// Find a fractal polynomial `p^α` with `‖f − p^α‖ < ε`: fit `p` with
/// `‖f − p‖ < ε/2`, then pick a constant `α` small enough that
/// `‖p − p^α‖ < ε/2`.
pub fn epsilon_approximate(
    f: &dyn Field,
    epsilon: f64,
    net: &Net,
    op: &OperatorSpec,
    settings: &ApproxSettings,
) -> Result<EpsilonApproximation> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let half = epsilon / 2.0;
    let check = UniformGrid::aligned(net, settings.check_points)?;
    let target = GridFunction::sample(f, &check)?;
    let mut best = f64::INFINITY;
    for degrees in &settings.schedule {
        let fit = poly_fit_least_squares(f, degrees, net.domain(), &settings.fit_resolution)?;
        let p_samples = GridFunction::sample(&fit.poly, &check)?;
        let fit_error = target.sup_distance(&p_samples)?;
        best = best.min(fit_error);
        if !(fit_error < half) {
            continue;
        }
        let p_norm = p_samples.sup_norm();
        let spread = op.norm_id_minus_d() * p_norm;
        let alpha = 0.9 * half / (half + spread);
        let fop = FractalOperator::constant(net.clone(), alpha, op.clone(), settings.check_points)?;
        let config = fractal_polynomial(&fop, &fit.poly)?;
        let fractal = sample_fractal(&config, &check, settings.tol)?;
        let fractal_gap = fractal.sup_distance(&p_samples)?;
        let achieved = fractal.sup_distance(&target)?;
        return Ok(EpsilonApproximation {
            poly: fit.poly,
            degrees: degrees.clone(),
            alpha,
            fit_error,
            fractal_gap,
            fractal_gap_bound: alpha / (1.0 - alpha) * spread,
            achieved,
            pass: achieved < epsilon,
            config,
        });
    }
    Err(Error::ScheduleExhausted { best })
}

/// Element `e_n` of the Faber–Schauder system on `[0, 1]`: `e_1 = 1`,
/// `e_2 = x`, and for `n = 2^j + i + 1` (`0 ≤ i < 2^j`) the unit tent on
/// `[i/2^j, (i+1)/2^j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchauderElement {
    pub index: usize,
    /// `(j, i)` for tents.
    pub level: Option<(u32, usize)>,
}

pub fn faber_schauder(n: usize) -> Result<SchauderElement> {
    if n == 0 {
        return Err(Error::InvalidArgument("Schauder indices start at 1".into()));
    }
    let level = if n <= 2 {
        None
    } else {
        let m = n - 2;
        let j = usize::BITS - 1 - m.leading_zeros();
        Some((j, m - (1usize << j)))
    };
    Ok(SchauderElement { index: n, level })
}

impl SchauderElement {
    /// Support `[l, r]` and peak of a tent.
    pub fn tent(&self) -> Option<(f64, f64, f64)> {
        self.level.map(|(j, i)| {
            let h = 1.0 / (1u64 << j) as f64;
            let l = i as f64 * h;
            (l, l + h, l + h / 2.0)
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.tent() {
            None if self.index == 1 => 1.0,
            None => x,
            Some((l, r, mid)) => {
                if x <= l || x >= r {
                    0.0
                } else if x <= mid {
                    (x - l) / (mid - l)
                } else {
                    (r - x) / (r - mid)
                }
            }
        }
    }
}

impl Field for SchauderElement {
    fn arity(&self) -> usize {
        1
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        check_arity(1, point)?;
        Ok(self.value(point[0]))
    }
}

/// Coefficient functionals `a_1(g), …, a_N(g)`.
pub fn schauder_coefficients(g: &dyn Field, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one coefficient".into()));
    }
    check_arity(g.arity(), &[0.0])?;
    let g0 = g.eval(&[0.0])?;
    let g1 = g.eval(&[1.0])?;
    let mut out = Vec::with_capacity(n);
    for index in 1..=n {
        let e = faber_schauder(index)?;
        out.push(match e.tent() {
            None if index == 1 => g0,
            None => g1 - g0,
            Some((l, r, mid)) => g.eval(&[mid])? - (g.eval(&[l])? + g.eval(&[r])?) / 2.0,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SchauderReconstruction {
    /// `b_n = a_n((F^α)^{-1} g)`
    pub coefficients: Vec<f64>,
    /// `e_m = ‖g − Σ_{n ≤ m} b_n F^α(e_n)‖` on the grid, `m = 1, …, N`.
    pub errors: Vec<f64>,
    pub inverse: NeumannSolution,
    pub norm_bound: f64,
}

/// Expand `g` in the fractal basis `F^α(e_n)` on a net over `[0, 1]`.
pub fn fractal_basis_reconstruct(
    g: &dyn Field,
    n: usize,
    fop: &FractalOperator,
    grid_points: usize,
    tol: f64,
    max_iter: usize,
) -> Result<SchauderReconstruction> {
    if *fop.net().domain() != Domain::unit(1)? {
        return Err(Error::InvalidArgument("the Schauder system lives on [0, 1]".into()));
    }
    let grid = UniformGrid::aligned(fop.net(), grid_points)?;
    let inverse = neumann_inverse(fop, g, &grid, tol, max_iter)?;
    let coefficients = schauder_coefficients(&inverse.solution, n)?;
    let target = GridFunction::sample(g, &grid)?;
    let mut partial = vec![0.0; grid.len()];
    let mut errors = Vec::with_capacity(n);
    for (idx, &b) in coefficients.iter().enumerate() {
        if b != 0.0 {
            let element: FieldRef = Arc::new(faber_schauder(idx + 1)?);
            let image = sample_fractal(&fop.apply(element)?, &grid, tol)?;
            for (acc, v) in partial.iter_mut().zip(image.values()) {
                *acc += b * v;
            }
        }
        let err = partial
            .iter()
            .zip(target.values())
            .fold(0.0f64, |m, (a, t)| m.max(libm::fabs(a - t)));
        errors.push(err);
    }
    Ok(SchauderReconstruction {
        coefficients,
        errors,
        inverse,
        norm_bound: operator_norm_upper(fop.alpha_sup(), fop.op().norm_id_minus_d()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_field;

    #[test]
    fn horner_matches_monomials() {
        let p = TensorPolynomial::new(vec![1, 1], vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.eval_at(&[2.0, 3.0]).unwrap(), 6.0);
        let c = TensorPolynomial::constant(1.0, 3);
        assert_eq!(c.eval_at(&[0.3, -2.0, 7.0]).unwrap(), 1.0);
        assert!(p.eval_at(&[1.0]).is_err());
        let q = TensorPolynomial::new(vec![2, 1], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let (x, y) = (0.7f64, -1.3f64);
        let want = 1.0 + 2.0 * x + 3.0 * x * x + y * (4.0 + 5.0 * x + 6.0 * x * x);
        assert!((q.eval_at(&[x, y]).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn fit_recovers_polynomial() {
        let f = parse_field("1 - 2*x1 + 0.5*x1^2*x2 + 3*x2^2", 2).unwrap();
        let d = Domain::new(vec![-1.0, 0.0], vec![2.0, 1.0]).unwrap();
        let fit = poly_fit_least_squares(&f, &[2, 2], &d, &[9, 7]).unwrap();
        assert!(fit.residual < 1e-8);
        assert!((fit.poly.coeff(&[0, 0]) - 1.0).abs() < 1e-6);
        assert!((fit.poly.coeff(&[1, 0]) + 2.0).abs() < 1e-6);
        assert!((fit.poly.coeff(&[2, 1]) - 0.5).abs() < 1e-6);
        assert!((fit.poly.coeff(&[0, 2]) - 3.0).abs() < 1e-6);
        assert!(fit.poly.coeff(&[1, 1]).abs() < 1e-6);
    }

    #[test]
    fn constant_fit_is_grid_mean() {
        let f = parse_field("x1 * x2^2", 2).unwrap();
        let d = Domain::unit(2).unwrap();
        let fit = poly_fit_least_squares(&f, &[0, 0], &d, &[5, 5]).unwrap();
        let g = UniformGrid::new(d, vec![5, 5]).unwrap();
        let mean = GridFunction::sample(&f, &g).unwrap().values().iter().sum::<f64>() / 25.0;
        assert!((fit.poly.coeffs()[0] - mean).abs() < 1e-14);
    }

    #[test]
    fn schauder_indexing() {
        assert_eq!(faber_schauder(3).unwrap().tent(), Some((0.0, 1.0, 0.5)));
        assert_eq!(faber_schauder(4).unwrap().tent(), Some((0.0, 0.5, 0.25)));
        assert_eq!(faber_schauder(5).unwrap().tent(), Some((0.5, 1.0, 0.75)));
        assert_eq!(faber_schauder(6).unwrap().level, Some((2, 0)));
        assert!(faber_schauder(0).is_err());
    }

    #[test]
    fn schauder_coefficient_examples() {
        let sq = parse_field("x1^2", 1).unwrap();
        let c = schauder_coefficients(&sq, 5).unwrap();
        assert_eq!(c[..3], [0.0, 1.0, -0.25]);
        let lin = parse_field("x1", 1).unwrap();
        assert_eq!(schauder_coefficients(&lin, 4).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        let e3 = faber_schauder(3).unwrap();
        assert_eq!(schauder_coefficients(&e3, 4).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    }
}
