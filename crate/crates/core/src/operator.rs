//! The fractal operator `F^α_{Δ,D}: f ↦ f^α` with base `s = D f`, and
//! numerical checks of its bounds.
//!
//! Sup norms are taken on grids aligned with the net (see
//! [`UniformGrid::aligned`]); on such grids the orbit of every grid point
//! stays on the grid, so grid-measured inequalities carry no sampling gap.

use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{constant, difference, linear_combination, Field, FieldRef, Product};
use crate::fractal::{Admission, FractalConfig};
use crate::grid::{GridFunction, UniformGrid};
use crate::net::Net;
use crate::sampling;

/// Corner agreement required of a multiplier `b`.
pub const MULTIPLIER_CORNER_TOLERANCE: f64 = 1e-9;

/// Concrete bounded linear operator `D` on `C(I^k)`.
#[derive(Clone)]
pub enum OperatorKind {
    /// `D f = b · f`
    Multiplication { b: FieldRef },
    /// `D f = f + t (L f − f)` with `L` the multilinear interpolant on the net.
    Blend { t: f64 },
}

#[derive(Clone)]
pub struct OperatorSpec {
    kind: OperatorKind,
    norm_d: f64,
    norm_id_minus_d: f64,
}

impl core::fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let mut s = f.debug_struct("OperatorSpec");
        match &self.kind {
            OperatorKind::Multiplication { .. } => s.field("kind", &"multiplication"),
            OperatorKind::Blend { t } => s.field("kind", &"blend").field("t", t),
        };
        s.field("norm_d", &self.norm_d)
            .field("norm_id_minus_d", &self.norm_id_minus_d)
            .finish()
    }
}

impl OperatorSpec {
    /// Multiplication by `b`, which must equal 1 at the box corners. The
    /// norms are sup norms of `b` and `1 − b` on the aligned grid with at
    /// least `points_per_axis` points.
    pub fn multiplication(b: FieldRef, net: &Net, points_per_axis: usize) -> Result<Self> {
        if b.arity() != net.dim() {
            return Err(Error::DimensionMismatch {
                expected: net.dim(),
                found: b.arity(),
            });
        }
        let mut mismatch = 0.0f64;
        for corner in net.domain().corners() {
            mismatch = mismatch.max(libm::fabs(b.eval(&corner)? - 1.0));
        }
        if mismatch > MULTIPLIER_CORNER_TOLERANCE {
            return Err(Error::CornerMismatch { mismatch });
        }
        let grid = UniformGrid::aligned(net, points_per_axis)?;
        let samples = GridFunction::sample(b.as_ref(), &grid)?;
        let norm_d = samples.sup_norm();
        let norm_id_minus_d = samples
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max(libm::fabs(1.0 - v)));
        Ok(Self {
            kind: OperatorKind::Multiplication { b },
            norm_d,
            norm_id_minus_d,
        })
    }

    /// Blend towards the net interpolant, `0 < t ≤ 1`. `‖D‖ ≤ 1` and
    /// `‖Id − D‖ ≤ 2t`.
    pub fn blend(t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "blend weight must lie in (0, 1], got {t}"
            )));
        }
        Ok(Self {
            kind: OperatorKind::Blend { t },
            norm_d: 1.0,
            norm_id_minus_d: 2.0 * t,
        })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn norm_d(&self) -> f64 {
        self.norm_d
    }

    pub fn norm_id_minus_d(&self) -> f64 {
        self.norm_id_minus_d
    }

    /// `D f` as a field.
    pub fn apply(&self, f: FieldRef, net: &Net) -> Result<FieldRef> {
        if f.arity() != net.dim() {
            return Err(Error::DimensionMismatch {
                expected: net.dim(),
                found: f.arity(),
            });
        }
        match &self.kind {
            OperatorKind::Multiplication { b } => Ok(Arc::new(Product::new(b.clone(), f)?)),
            OperatorKind::Blend { t } => {
                let lf: FieldRef = Arc::new(NetInterpolant::new(net, f.as_ref())?);
                if *t == 1.0 {
                    Ok(lf)
                } else {
                    linear_combination(vec![(1.0 - t, f), (*t, lf)])
                }
            }
        }
    }
}

/// Piecewise multilinear interpolant of node values on a net.
#[derive(Debug, Clone)]
pub struct NetInterpolant {
    net: Net,
    values: Vec<f64>,
}

impl NetInterpolant {
    pub fn new(net: &Net, f: &dyn Field) -> Result<Self> {
        let values = net.nodes().map(|p| f.eval(&p)).collect::<Result<Vec<_>>>()?;
        Self::from_values(net, values)
    }

    /// `values` ordered like [`Net::node`].
    pub fn from_values(net: &Net, values: Vec<f64>) -> Result<Self> {
        if values.len() != net.node_count() {
            return Err(Error::DimensionMismatch {
                expected: net.node_count(),
                found: values.len(),
            });
        }
        Ok(Self {
            net: net.clone(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Field for NetInterpolant {
    fn arity(&self) -> usize {
        self.net.dim()
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        let k = self.net.dim();
        if point.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: point.len(),
            });
        }
        let mut lower = vec![0usize; k];
        let mut frac = vec![0.0; k];
        for q in 0..k {
            let axis = self.net.axis(q);
            let x = point[q].clamp(axis.lower(), axis.upper());
            let j = axis.locate(x);
            let (a, b) = (axis.knots()[j - 1], axis.knots()[j]);
            lower[q] = j - 1;
            frac[q] = ((x - a) / (b - a)).clamp(0.0, 1.0);
        }
        let mut index = vec![0usize; k];
        let mut acc = 0.0;
        for mask in 0..1usize << k {
            let mut weight = 1.0;
            for q in 0..k {
                let up = mask >> q & 1 == 1;
                weight *= if up { frac[q] } else { 1.0 - frac[q] };
                index[q] = lower[q] + up as usize;
            }
            if weight != 0.0 {
                acc += weight * self.values[self.net.node_offset(&index)];
            }
        }
        Ok(acc)
    }
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub slack: f64,
    pub pass: bool,
}

impl BoundsReport {
    /// `pass` iff `lhs ≤ rhs + allowance`.
    pub fn new(lhs: f64, rhs: f64, allowance: f64) -> Self {
        Self {
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs + allowance,
        }
    }
}

/// `F^α_{Δ,D}` for fixed net, scale function and operator.
#[derive(Clone)]
pub struct FractalOperator {
    net: Net,
    alpha: FieldRef,
    op: OperatorSpec,
    alpha_sup: f64,
    points_per_axis: usize,
}

impl core::fmt::Debug for FractalOperator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FractalOperator")
            .field("net", &self.net)
            .field("op", &self.op)
            .field("alpha_sup", &self.alpha_sup)
            .field("points_per_axis", &self.points_per_axis)
            .finish_non_exhaustive()
    }
}

impl FractalOperator {
    /// Certifies `‖α‖_∞` once on the aligned admission grid.
    pub fn new(net: Net, alpha: FieldRef, op: OperatorSpec, admission: Admission) -> Result<Self> {
        net.check_contractive()?;
        if alpha.arity() != net.dim() {
            return Err(Error::DimensionMismatch {
                expected: net.dim(),
                found: alpha.arity(),
            });
        }
        let grid = UniformGrid::aligned(&net, admission.points_per_axis)?;
        let alpha_sup = GridFunction::sample(alpha.as_ref(), &grid)?.sup_norm() + admission.margin;
        if alpha_sup >= 1.0 {
            return Err(Error::Inadmissible { alpha_sup });
        }
        Ok(Self {
            net,
            alpha,
            op,
            alpha_sup,
            points_per_axis: admission.points_per_axis,
        })
    }

    /// Constant scale function `α ≡ value`.
    pub fn constant(net: Net, value: f64, op: OperatorSpec, points_per_axis: usize) -> Result<Self> {
        let k = net.dim();
        Self::new(
            net,
            constant(value, k),
            op,
            Admission {
                points_per_axis,
                margin: 0.0,
            },
        )
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn alpha(&self) -> &FieldRef {
        &self.alpha
    }

    pub fn op(&self) -> &OperatorSpec {
        &self.op
    }

    pub fn alpha_sup(&self) -> f64 {
        self.alpha_sup
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Same operator with `‖f − Df‖` measured on a grid of `points` per axis.
    pub fn with_points(mut self, points: usize) -> Self {
        self.points_per_axis = points;
        self
    }

    /// Configuration for `F^α(f)`.
    pub fn apply(&self, f: FieldRef) -> Result<FractalConfig> {
        FractalConfig::with_certified_alpha(
            self.net.clone(),
            f,
            self.alpha.clone(),
            self.op.clone(),
            self.alpha_sup,
            self.points_per_axis,
        )
    }

    /// `1 + ‖α‖ ‖Id − D‖ / (1 − ‖α‖)`
    pub fn norm_upper(&self) -> f64 {
        operator_norm_upper(self.alpha_sup, self.op.norm_id_minus_d)
    }

    /// `‖α‖ ‖Id − D‖ / (1 − ‖α‖)`, a bound on `‖Id − F^α‖`.
    pub fn neumann_ratio(&self) -> f64 {
        self.alpha_sup * self.op.norm_id_minus_d / (1.0 - self.alpha_sup)
    }

    /// `(1 + ‖α‖) / (1 − ‖α‖ ‖D‖)`, requiring `‖α‖ ‖D‖ < 1`.
    pub fn inverse_norm_bound(&self) -> Result<f64> {
        let denom = 1.0 - self.alpha_sup * self.op.norm_d;
        if !(denom > 0.0) {
            return Err(Error::Precondition(alloc::format!(
                "alpha_sup * |D| = {} must be below 1",
                self.alpha_sup * self.op.norm_d
            )));
        }
        Ok((1.0 + self.alpha_sup) / denom)
    }

    fn aligned_grid(&self, points: usize) -> Result<UniformGrid> {
        UniformGrid::aligned(&self.net, points)
    }
}

/// Configuration realizing `F^α_{Δ,D}(f)`; the scale function is checked on
/// the admission grid.
pub fn apply_fractal_operator(
    op: &OperatorSpec,
    f: FieldRef,
    net: &Net,
    alpha: FieldRef,
    admission: Admission,
) -> Result<FractalConfig> {
    FractalConfig::with_operator(net.clone(), f, alpha, op.clone(), admission)
}

/// `1 + ‖α‖ ‖Id − D‖ / (1 − ‖α‖)`
pub fn operator_norm_upper(alpha_sup: f64, norm_id_minus_d: f64) -> f64 {
    1.0 + alpha_sup * norm_id_minus_d / (1.0 - alpha_sup)
}

/// `max |f^α − f|` over `grid`, each point certified to `tol`.
pub fn sup_deviation(cfg: &FractalConfig, grid: &UniformGrid, tol: f64) -> Result<f64> {
    let mut point = vec![0.0; grid.dim()];
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        grid.point_into(i, &mut point);
        let v = cfg.eval(&point, tol)?.value;
        worst = worst.max(libm::fabs(v - cfg.germ().eval(&point)?));
    }
    Ok(worst)
}

/// Sampled `F^α(f)` on `grid`.
pub fn sample_fractal(cfg: &FractalConfig, grid: &UniformGrid, tol: f64) -> Result<GridFunction> {
    let mut point = vec![0.0; grid.dim()];
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        grid.point_into(i, &mut point);
        values.push(cfg.eval(&point, tol)?.value);
    }
    GridFunction::new(grid.clone(), values)
}

fn grid_sup_gap(f: &dyn Field, g: &dyn Field, grid: &UniformGrid) -> Result<f64> {
    let mut point = vec![0.0; grid.dim()];
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        grid.point_into(i, &mut point);
        worst = worst.max(libm::fabs(f.eval(&point)? - g.eval(&point)?));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationReport {
    /// `‖f^α − f‖ ≤ ‖α‖/(1−‖α‖) · ‖f − s‖`
    pub gap: BoundsReport,
    /// `‖f^α − f‖ ≤ ‖α‖ ‖Id − D‖/(1−‖α‖) · ‖f‖`, when `s = D f`.
    pub norm_form: Option<BoundsReport>,
}

/// Perturbation error on the aligned grid with at least `points_per_axis`
/// points per axis.
pub fn perturbation_gap(
    cfg: &FractalConfig,
    points_per_axis: usize,
    tol: f64,
) -> Result<PerturbationReport> {
    let grid = UniformGrid::aligned(cfg.net(), points_per_axis)?;
    let lhs = sup_deviation(cfg, &grid, tol)?;
    let a = cfg.alpha_sup();
    let base_gap = grid_sup_gap(cfg.germ().as_ref(), cfg.base().as_ref(), &grid)?;
    let gap = BoundsReport::new(lhs, a / (1.0 - a) * base_gap, tol);
    let norm_form = match cfg.operator() {
        Some(op) => {
            let f_norm = GridFunction::sample(cfg.germ().as_ref(), &grid)?.sup_norm();
            let rhs = a * op.norm_id_minus_d() / (1.0 - a) * f_norm;
            Some(BoundsReport::new(lhs, rhs, tol))
        }
        None => None,
    };
    Ok(PerturbationReport { gap, norm_form })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearityReport {
    pub max_deviation: f64,
    /// Largest `tol + |β| e_f + |γ| e_g + e_h` over the sample points.
    pub max_allowance: f64,
    pub pass: bool,
}

/// Pointwise comparison of `(βf + γg)^α` with `β f^α + γ g^α`.
pub fn linearity_check(
    fop: &FractalOperator,
    f: FieldRef,
    g: FieldRef,
    beta: f64,
    gamma: f64,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<LinearityReport> {
    let h = linear_combination(vec![(beta, f.clone()), (gamma, g.clone())])?;
    let cf = fop.apply(f)?;
    let cg = fop.apply(g)?;
    let ch = fop.apply(h)?;
    let mut max_deviation = 0.0f64;
    let mut max_allowance = 0.0f64;
    let mut pass = true;
    for p in points {
        let rf = cf.eval(p, tol)?;
        let rg = cg.eval(p, tol)?;
        let rh = ch.eval(p, tol)?;
        let deviation = libm::fabs(rh.value - beta * rf.value - gamma * rg.value);
        let allowance = tol
            + libm::fabs(beta) * rf.error_bound
            + libm::fabs(gamma) * rg.error_bound
            + rh.error_bound;
        max_deviation = max_deviation.max(deviation);
        max_allowance = max_allowance.max(allowance);
        pass &= deviation <= allowance;
    }
    Ok(LinearityReport {
        max_deviation,
        max_allowance,
        pass,
    })
}

/// Largest `‖F^α f‖ / ‖f‖` over `fields`, compared with
/// [`FractalOperator::norm_upper`].
pub fn sampled_operator_norm(
    fop: &FractalOperator,
    fields: &[FieldRef],
    points_per_axis: usize,
    tol: f64,
) -> Result<BoundsReport> {
    let grid = fop.aligned_grid(points_per_axis)?;
    let mut ratio = 0.0f64;
    for f in fields {
        let norm = GridFunction::sample(f.as_ref(), &grid)?.sup_norm();
        if norm == 0.0 {
            continue;
        }
        let image = sample_fractal(&fop.apply(f.clone())?, &grid, tol)?.sup_norm();
        ratio = ratio.max((image - tol) / norm);
    }
    Ok(BoundsReport::new(ratio, fop.norm_upper(), tol))
}

/// `‖f‖ ≤ (1 + ‖α‖)/(1 − ‖α‖ ‖D‖) · ‖f^α‖` on the aligned grid.
pub fn bounded_below_gap(cfg: &FractalConfig, points_per_axis: usize, tol: f64) -> Result<BoundsReport> {
    let op = cfg
        .operator()
        .ok_or_else(|| Error::Precondition("configuration has no operator".into()))?;
    let a = cfg.alpha_sup();
    let denom = 1.0 - a * op.norm_d();
    if !(denom > 0.0) {
        return Err(Error::Precondition(alloc::format!(
            "alpha_sup * |D| = {} must be below 1",
            a * op.norm_d()
        )));
    }
    let grid = UniformGrid::aligned(cfg.net(), points_per_axis)?;
    let lhs = GridFunction::sample(cfg.germ().as_ref(), &grid)?.sup_norm();
    let image = sample_fractal(cfg, &grid, tol)?.sup_norm();
    let factor = (1.0 + a) / denom;
    Ok(BoundsReport::new(lhs, factor * image, factor * tol + tol))
}

#[derive(Debug, Clone)]
pub struct NeumannSolution {
    /// `u ≈ (F^α)^{-1} g` on the grid.
    pub solution: GridFunction,
    pub iterations: usize,
    /// `‖F^α(u_n) − g‖_grid` for `n = 0, 1, …`; the last one is at most `tol`.
    pub residuals: Vec<f64>,
    /// Predicted contraction `‖α‖ ‖Id − D‖/(1 − ‖α‖)`.
    pub contraction_bound: f64,
    /// Largest observed ratio of successive residuals while they are well
    /// above the evaluation tolerance.
    pub observed_contraction: f64,
    /// `‖u‖ ≤ (1 + ‖α‖)/(1 − ‖α‖ ‖D‖) · ‖g‖`
    pub norm_check: BoundsReport,
}

/// Solve `F^α(u) = g` by `u ← u − (F^α(u) − g)`, which converges when
/// `‖α‖ < 1/(1 + ‖Id − D‖)`. Each sweep evaluates `F^α` of the current
/// iterate (as a multilinear grid function) at every grid point.
pub fn neumann_inverse(
    fop: &FractalOperator,
    g: &dyn Field,
    grid: &UniformGrid,
    tol: f64,
    max_iter: usize,
) -> Result<NeumannSolution> {
    let a = fop.alpha_sup;
    let limit = 1.0 / (1.0 + fop.op.norm_id_minus_d);
    if !(a < limit) {
        return Err(Error::Precondition(alloc::format!(
            "alpha_sup = {a} must be below 1/(1 + |Id - D|) = {limit}"
        )));
    }
    if grid.domain() != fop.net.domain() {
        return Err(Error::InvalidArgument("grid box differs from the net box".into()));
    }
    let inverse_bound = fop.inverse_norm_bound()?;
    let eval_tol = tol / 20.0;
    let points = grid.resolution().iter().copied().max().unwrap_or(2);
    let inner = fop.clone().with_points(points);
    let target = GridFunction::sample(g, grid)?;
    let mut u = target.clone();
    let mut residuals = Vec::new();
    let mut observed = 0.0f64;
    for iteration in 0..=max_iter {
        let image = sample_fractal(&inner.apply(Arc::new(u.clone()))?, grid, eval_tol)?;
        let r: Vec<f64> = image
            .values()
            .iter()
            .zip(target.values())
            .map(|(a, b)| a - b)
            .collect();
        let norm = r.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        if let Some(&prev) = residuals.last() {
            if prev > 1e3 * eval_tol && norm > 1e3 * eval_tol {
                observed = observed.max(norm / prev);
            }
        }
        residuals.push(norm);
        if norm <= tol {
            let rhs = inverse_bound * target.sup_norm();
            let norm_check = BoundsReport::new(u.sup_norm(), rhs, tol);
            return Ok(NeumannSolution {
                solution: u,
                iterations: iteration,
                residuals,
                contraction_bound: fop.neumann_ratio(),
                observed_contraction: observed,
                norm_check,
            });
        }
        if iteration == max_iter {
            break;
        }
        let next: Vec<f64> = u.values().iter().zip(&r).map(|(v, d)| v - d).collect();
        u = GridFunction::new(grid.clone(), next)?;
    }
    Err(Error::MaxIterations {
        iterations: max_iter,
        residual: residuals.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// `max |f^α − f|` for a fixed point `f = D f`.
pub fn fixed_point_check(
    fop: &FractalOperator,
    f: FieldRef,
    points_per_axis: usize,
    tol: f64,
) -> Result<BoundsReport> {
    let grid = fop.aligned_grid(points_per_axis)?;
    let df = fop.op.apply(f.clone(), &fop.net)?;
    let defect = grid_sup_gap(f.as_ref(), df.as_ref(), &grid)?;
    if defect > 1e-9 {
        return Err(Error::Precondition(alloc::format!(
            "f is not a fixed point of D (|Df - f| = {defect})"
        )));
    }
    let deviation = sup_deviation(&fop.apply(f)?, &grid, tol)?;
    Ok(BoundsReport::new(deviation, 0.0, tol))
}

/// `e_n = ‖f^{α_n} − f‖` against `α_n/(1 − α_n) · ‖f − s‖` for constant
/// scale functions `α_n`.
pub fn alpha_sequence_convergence(
    net: &Net,
    f: FieldRef,
    s: FieldRef,
    alphas: &[f64],
    points_per_axis: usize,
    tol: f64,
) -> Result<Vec<BoundsReport>> {
    let grid = UniformGrid::aligned(net, points_per_axis)?;
    let base_gap = grid_sup_gap(f.as_ref(), s.as_ref(), &grid)?;
    alphas
        .iter()
        .map(|&a| {
            let alpha = constant(a, net.dim());
            let cfg = FractalConfig::new(
                net.clone(),
                f.clone(),
                alpha,
                s.clone(),
                Admission {
                    points_per_axis,
                    margin: 0.0,
                },
            )?;
            let e = sup_deviation(&cfg, &grid, tol)?;
            let a = libm::fabs(a);
            Ok(BoundsReport::new(e, a / (1.0 - a) * base_gap, tol))
        })
        .collect()
}

/// `e_n = ‖f^α_{Δ,D_n} − f‖` for `D_n = blend(1/n)`, against
/// `‖α‖/(1−‖α‖) · (1/n) · ‖Lf − f‖`.
pub fn operator_sequence_convergence(
    net: &Net,
    f: FieldRef,
    alpha: FieldRef,
    n_list: &[usize],
    admission: Admission,
    tol: f64,
) -> Result<Vec<BoundsReport>> {
    let grid = UniformGrid::aligned(net, admission.points_per_axis)?;
    let lf = OperatorSpec::blend(1.0)?.apply(f.clone(), net)?;
    let interp_gap = grid_sup_gap(f.as_ref(), lf.as_ref(), &grid)?;
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::InvalidArgument("sequence index must be positive".into()));
            }
            let op = OperatorSpec::blend(1.0 / n as f64)?;
            let cfg = FractalConfig::with_operator(net.clone(), f.clone(), alpha.clone(), op, admission)?;
            let a = cfg.alpha_sup();
            let e = sup_deviation(&cfg, &grid, tol)?;
            Ok(BoundsReport::new(e, a / (1.0 - a) * interp_gap / n as f64, tol))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanishingReport {
    pub max_node_magnitude: f64,
    pub iterations: usize,
    pub combinations: usize,
    pub allowance: f64,
    pub pass: bool,
}

/// Apply `F^α` up to `iterations` times to a field vanishing on the net
/// nodes, and test that every iterate and `combinations` random linear
/// combinations of iterates still vanish there.
pub fn vanishing_invariance_check(
    fop: &FractalOperator,
    f: FieldRef,
    iterations: usize,
    combinations: usize,
    seed: u64,
    tol: f64,
) -> Result<VanishingReport> {
    let nodes: Vec<Vec<f64>> = fop.net.nodes().collect();
    for node in &nodes {
        let v = f.eval(node)?;
        if libm::fabs(v) > 1e-9 {
            return Err(Error::Precondition(alloc::format!(
                "f does not vanish on the net (|f| = {v} at a node)"
            )));
        }
    }
    let nested = fop.clone().with_points(fop.points_per_axis.min(9));
    let mut iterates = vec![f];
    for _ in 0..iterations {
        let next = nested.apply(iterates.last().expect("non-empty").clone())?;
        iterates.push(next.into_field(tol));
    }
    let mut rng = sampling::rng(seed);
    let mut fields = iterates.clone();
    for _ in 0..combinations {
        let terms = iterates
            .iter()
            .map(|g| (rng.gen_range(-1.0..=1.0), g.clone()))
            .collect();
        fields.push(linear_combination(terms)?);
    }
    let mut worst = 0.0f64;
    for g in &fields {
        for node in &nodes {
            worst = worst.max(libm::fabs(g.eval(node)?));
        }
    }
    let allowance = (iterations.max(1) as f64) * (tol + 1e-9);
    Ok(VanishingReport {
        max_node_magnitude: worst,
        iterations,
        combinations,
        allowance,
        pass: worst <= allowance,
    })
}

/// `f − D f` as a field.
pub fn operator_defect(op: &OperatorSpec, f: FieldRef, net: &Net) -> Result<FieldRef> {
    let df = op.apply(f.clone(), net)?;
    difference(f, df)
}

impl core::fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match &self.kind {
            OperatorKind::Multiplication { .. } => f.write_str("multiplication"),
            OperatorKind::Blend { t } => write!(f, "blend(t={})", t),
        }
    }
}

impl OperatorSpec {
    pub fn label(&self) -> alloc::string::String {
        self.to_string()
    }
}
