//! α-fractal functions and δ-fractal interpolation functions.
//!
//! For a germ `f`, scale function `α` with `‖α‖_∞ < 1` and base `s` agreeing
//! with `f` at the box corners, the α-fractal function is the unique
//! continuous solution of
//!
//! ```text
//! f^α(x) = f(x) + α(x) · [ f^α(Q(x)) − s(Q(x)) ],   Q(x) = (v_{1,j_1}^{-1}(x_1), …)
//! ```
//!
//! where `(j_1, …, j_k)` is the cell containing `x`. [`FractalConfig::eval`]
//! unrolls this equation along the single orbit `x, Q(x), Q²(x), …`, stops
//! early when the orbit lands on a net node (where `f^α = f`), and otherwise
//! truncates by substituting `s`, which leaves an error of at most
//! `‖α‖^m · ‖f − s‖ / (1 − ‖α‖)` after `m` levels.
//!
//! [`RbGridOperator`] is an independent route to the same function: the
//! Read–Bajraktarević operator discretized on a grid and iterated to its
//! fixed point.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{difference, Field, FieldRef};
use crate::grid::{GridFunction, UniformGrid};
use crate::net::{eta, CellIndex, Net};
use crate::operator::OperatorSpec;
use crate::sampling;

/// Hard cap on recursion depth.
pub const MAX_DEPTH: usize = 64;

/// Corner agreement required between `f` and `s`.
pub const CORNER_TOLERANCE: f64 = 1e-9;

/// Grid used to certify `‖α‖_∞` and to measure `‖f − s‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admission {
    /// Minimum points per axis; the grid is refined to contain the knots of
    /// equally spaced nets.
    pub points_per_axis: usize,
    /// Added to the grid sup of `|α|` to form the certified bound.
    pub margin: f64,
}

impl Default for Admission {
    fn default() -> Self {
        Self {
            points_per_axis: 65,
            margin: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissionReport {
    /// Grid sup of `|α|` plus the margin.
    pub alpha_sup: f64,
    pub grid_sup: f64,
    pub corner_mismatch: f64,
    /// Grid sup of `|f − s|`.
    pub base_gap: f64,
    pub pass: bool,
}

/// Evaluate the admissibility hypotheses without building a configuration.
pub fn check_admissible(
    net: &Net,
    f: &dyn Field,
    alpha: &dyn Field,
    s: &dyn Field,
    admission: Admission,
) -> Result<AdmissionReport> {
    let grid = UniformGrid::aligned(net, admission.points_per_axis)?;
    let mut point = vec![0.0; net.dim()];
    let mut grid_sup = 0.0f64;
    let mut base_gap = 0.0f64;
    for i in 0..grid.len() {
        grid.point_into(i, &mut point);
        grid_sup = grid_sup.max(libm::fabs(alpha.eval(&point)?));
        base_gap = base_gap.max(libm::fabs(f.eval(&point)? - s.eval(&point)?));
    }
    let corner_mismatch = corner_mismatch(net, f, s)?;
    let alpha_sup = grid_sup + admission.margin;
    Ok(AdmissionReport {
        alpha_sup,
        grid_sup,
        corner_mismatch,
        base_gap,
        pass: alpha_sup < 1.0 && corner_mismatch <= CORNER_TOLERANCE,
    })
}

fn corner_mismatch(net: &Net, f: &dyn Field, s: &dyn Field) -> Result<f64> {
    let mut worst = 0.0f64;
    for corner in net.domain().corners() {
        worst = worst.max(libm::fabs(f.eval(&corner)? - s.eval(&corner)?));
    }
    Ok(worst)
}

fn grid_gap(net: &Net, f: &dyn Field, s: &dyn Field, points_per_axis: usize) -> Result<f64> {
    let grid = UniformGrid::aligned(net, points_per_axis)?;
    let mut point = vec![0.0; net.dim()];
    let mut gap = 0.0f64;
    for i in 0..grid.len() {
        grid.point_into(i, &mut point);
        gap = gap.max(libm::fabs(f.eval(&point)? - s.eval(&point)?));
    }
    Ok(gap)
}

/// Value of a certified evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub value: f64,
    /// Orbit levels actually used.
    pub depth: usize,
    /// Bound on `|value − exact|`; zero when the orbit terminated on a node.
    pub error_bound: f64,
}

/// Everything needed to define `f^α_{Δ,s}`.
#[derive(Clone)]
pub struct FractalConfig {
    net: Net,
    f: FieldRef,
    alpha: FieldRef,
    s: FieldRef,
    operator: Option<OperatorSpec>,
    alpha_sup: f64,
    base_gap: f64,
}

impl core::fmt::Debug for FractalConfig {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FractalConfig")
            .field("net", &self.net)
            .field("operator", &self.operator)
            .field("alpha_sup", &self.alpha_sup)
            .field("base_gap", &self.base_gap)
            .finish_non_exhaustive()
    }
}

impl FractalConfig {
    /// Configuration with an explicit base function `s`.
    pub fn new(
        net: Net,
        f: FieldRef,
        alpha: FieldRef,
        s: FieldRef,
        admission: Admission,
    ) -> Result<Self> {
        Self::validate_parts(&net, &[&f, &alpha, &s])?;
        let report = check_admissible(&net, f.as_ref(), alpha.as_ref(), s.as_ref(), admission)?;
        if report.alpha_sup >= 1.0 {
            return Err(Error::Inadmissible {
                alpha_sup: report.alpha_sup,
            });
        }
        if report.corner_mismatch > CORNER_TOLERANCE {
            return Err(Error::CornerMismatch {
                mismatch: report.corner_mismatch,
            });
        }
        Ok(Self {
            net,
            f,
            alpha,
            s,
            operator: None,
            alpha_sup: report.alpha_sup,
            base_gap: report.base_gap,
        })
    }

    /// Configuration with `s = D f`.
    pub fn with_operator(
        net: Net,
        f: FieldRef,
        alpha: FieldRef,
        op: OperatorSpec,
        admission: Admission,
    ) -> Result<Self> {
        let s = op.apply(f.clone(), &net)?;
        let mut cfg = Self::new(net, f, alpha, s, admission)?;
        cfg.operator = Some(op);
        Ok(cfg)
    }

    /// Like [`FractalConfig::with_operator`] but with `‖α‖_∞` supplied by the
    /// caller (it must already be certified). Only `‖f − Df‖` is measured.
    pub fn with_certified_alpha(
        net: Net,
        f: FieldRef,
        alpha: FieldRef,
        op: OperatorSpec,
        alpha_sup: f64,
        points_per_axis: usize,
    ) -> Result<Self> {
        Self::validate_parts(&net, &[&f, &alpha])?;
        if !(0.0..1.0).contains(&alpha_sup) {
            return Err(Error::Inadmissible { alpha_sup });
        }
        let s = op.apply(f.clone(), &net)?;
        let mismatch = corner_mismatch(&net, f.as_ref(), s.as_ref())?;
        if mismatch > CORNER_TOLERANCE {
            return Err(Error::CornerMismatch { mismatch });
        }
        let base_gap = grid_gap(&net, f.as_ref(), s.as_ref(), points_per_axis)?;
        Ok(Self {
            net,
            f,
            alpha,
            s,
            operator: Some(op),
            alpha_sup,
            base_gap,
        })
    }

    fn validate_parts(net: &Net, fields: &[&FieldRef]) -> Result<()> {
        net.check_contractive()?;
        for field in fields {
            if field.arity() != net.dim() {
                return Err(Error::DimensionMismatch {
                    expected: net.dim(),
                    found: field.arity(),
                });
            }
        }
        Ok(())
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn germ(&self) -> &FieldRef {
        &self.f
    }

    pub fn alpha(&self) -> &FieldRef {
        &self.alpha
    }

    pub fn base(&self) -> &FieldRef {
        &self.s
    }

    pub fn operator(&self) -> Option<&OperatorSpec> {
        self.operator.as_ref()
    }

    /// Certified bound on `‖α‖_∞`.
    pub fn alpha_sup(&self) -> f64 {
        self.alpha_sup
    }

    /// Measured `‖f − s‖_∞` on the admission grid.
    pub fn base_gap(&self) -> f64 {
        self.base_gap
    }

    /// Bound on `‖f^α − s‖_∞`: `‖f − s‖ / (1 − ‖α‖)`.
    pub fn orbit_bound(&self) -> f64 {
        self.base_gap / (1.0 - self.alpha_sup)
    }

    /// Orbit depth that certifies `tol`.
    pub fn depth_for(&self, tol: f64) -> Result<usize> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        let c = self.orbit_bound();
        if c <= tol || self.alpha_sup == 0.0 {
            return Ok(1);
        }
        let depth = libm::ceil(libm::log(tol / c) / libm::log(self.alpha_sup));
        if !(depth <= MAX_DEPTH as f64) {
            return Err(Error::ToleranceInfeasible {
                tol,
                depth: if depth.is_finite() { depth as usize } else { usize::MAX },
            });
        }
        Ok((depth as usize).max(1))
    }

    /// `f^α(point)` to within `tol`.
    pub fn eval(&self, point: &[f64], tol: f64) -> Result<EvalReport> {
        self.eval_forced(point, None, tol)
    }

    /// Evaluation where the first inverse step on axis `axis` (0-based) uses
    /// cell `cell` instead of the located one. Used to compare the two
    /// recursions meeting on a shared face.
    pub fn eval_in_cell(
        &self,
        point: &[f64],
        axis: usize,
        cell: usize,
        tol: f64,
    ) -> Result<EvalReport> {
        if axis >= self.net.dim() || cell == 0 || cell > self.net.axis(axis).cells() {
            return Err(Error::IndexOutOfRange {
                index: cell,
                max: self.net.axis(axis.min(self.net.dim() - 1)).cells(),
            });
        }
        let (lo, hi) = self.net.cell_map(axis, cell)?.cell_bounds();
        let x = point[axis];
        let slack = crate::net::KNOT_SNAP * (hi - lo);
        if x < lo - slack || x > hi + slack {
            return Err(Error::OutsideCell {
                value: x,
                lower: lo,
                upper: hi,
            });
        }
        self.eval_forced(point, Some((axis, cell)), tol)
    }

    fn eval_forced(
        &self,
        point: &[f64],
        forced: Option<(usize, usize)>,
        tol: f64,
    ) -> Result<EvalReport> {
        self.net.domain().check_contains(point)?;
        let depth = self.depth_for(tol)?;
        let (value, used, exact) = self.orbit(point, forced, depth)?;
        let error_bound = if exact {
            0.0
        } else {
            libm::pow(self.alpha_sup, depth as f64) * self.orbit_bound()
        };
        Ok(EvalReport {
            value,
            depth: used,
            error_bound,
        })
    }

    /// Unrolled recursion along the orbit of `point`. Returns the value, the
    /// number of levels used and whether the orbit ended on a node.
    fn orbit(
        &self,
        point: &[f64],
        mut forced: Option<(usize, usize)>,
        depth: usize,
    ) -> Result<(f64, usize, bool)> {
        let mut x = point.to_vec();
        let mut next = vec![0.0; x.len()];
        let mut value = self.f.eval(&x)?;
        let mut weight = 1.0;
        for level in 1..depth {
            weight *= self.alpha.eval(&x)?;
            if weight == 0.0 {
                return Ok((value, level, true));
            }
            self.net.inverse_step(&x, forced.take(), &mut next)?;
            core::mem::swap(&mut x, &mut next);
            value += weight * (self.f.eval(&x)? - self.s.eval(&x)?);
            if self.net.node_index(&x).is_some() {
                return Ok((value, level, true));
            }
        }
        Ok((value, depth, false))
    }

    /// `Q(point)` for the cell containing `point`.
    pub fn inverse_image(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.net.domain().check_contains(point)?;
        let mut out = vec![0.0; point.len()];
        self.net.inverse_step(point, None, &mut out)?;
        Ok(out)
    }

    /// View as a [`Field`] evaluated at fixed tolerance.
    pub fn into_field(self, tol: f64) -> FieldRef {
        Arc::new(FractalField {
            cfg: Arc::new(self),
            tol,
        })
    }
}

/// Free-function form of [`FractalConfig::eval`].
pub fn eval_alpha_fractal(cfg: &FractalConfig, point: &[f64], tol: f64) -> Result<EvalReport> {
    cfg.eval(point, tol)
}

/// A fractal function seen as an ordinary field.
#[derive(Clone)]
pub struct FractalField {
    cfg: Arc<FractalConfig>,
    tol: f64,
}

impl FractalField {
    pub fn new(cfg: Arc<FractalConfig>, tol: f64) -> Self {
        Self { cfg, tol }
    }

    pub fn config(&self) -> &FractalConfig {
        &self.cfg
    }
}

impl Field for FractalField {
    fn arity(&self) -> usize {
        self.cfg.net.dim()
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(self.cfg.eval(point, self.tol)?.value)
    }
}

/// Node data and vertical scaling of a δ-fractal interpolation function.
#[derive(Debug, Clone, PartialEq)]
pub struct FifData {
    net: Net,
    z: Vec<f64>,
    delta: f64,
}

impl FifData {
    /// `z` is indexed like [`Net::node`] (first axis fastest).
    pub fn new(net: Net, z: Vec<f64>, delta: f64) -> Result<Self> {
        if !(libm::fabs(delta) < 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "|delta| must be below 1, got {delta}"
            )));
        }
        if z.len() != net.node_count() {
            return Err(Error::DimensionMismatch {
                expected: net.node_count(),
                found: z.len(),
            });
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        net.check_contractive()?;
        Ok(Self { net, z, delta })
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    /// Bound on `sup |A|`: `(1 + |δ|) max|z| / (1 − |δ|)`.
    pub fn sup_bound(&self) -> f64 {
        let d = libm::fabs(self.delta);
        let zmax = self.z.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        (1.0 + d) * zmax / (1.0 - d)
    }

    /// `B_{j}(y)`: multilinear extension over the box of the corner values
    /// `z_{η(j, m)} − δ z_m`.
    pub fn vertical_offset(&self, cell: &CellIndex, y: &[f64]) -> Result<f64> {
        let k = self.net.dim();
        let domain = self.net.domain();
        let mut acc = 0.0;
        let mut source = vec![0usize; k];
        let mut target = vec![0usize; k];
        for mask in 0..1usize << k {
            let mut weight = 1.0;
            for q in 0..k {
                let n = self.net.axis(q).cells();
                let upper = mask >> q & 1 == 1;
                let m = if upper { n } else { 0 };
                let lambda = ((y[q] - domain.lower()[q]) / domain.width(q)).clamp(0.0, 1.0);
                weight *= if upper { lambda } else { 1.0 - lambda };
                source[q] = m;
                target[q] = eta(cell.0[q], m, n)?;
            }
            if weight != 0.0 {
                let zt = self.z[self.net.node_offset(&target)];
                let zs = self.z[self.net.node_offset(&source)];
                acc += weight * (zt - self.delta * zs);
            }
        }
        Ok(acc)
    }

    fn depth_for(&self, tol: f64) -> Result<usize> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        let d = libm::fabs(self.delta);
        let c = self.sup_bound();
        if d == 0.0 || c <= tol {
            return Ok(1);
        }
        let depth = libm::ceil(libm::log(tol / c) / libm::log(d)).max(1.0);
        if depth > MAX_DEPTH as f64 {
            return Err(Error::ToleranceInfeasible {
                tol,
                depth: depth as usize,
            });
        }
        Ok(depth as usize)
    }

    /// `A(point)` to within `tol`.
    pub fn eval(&self, point: &[f64], tol: f64) -> Result<EvalReport> {
        self.net.domain().check_contains(point)?;
        if let Some(idx) = self.net.node_index(point) {
            return Ok(EvalReport {
                value: self.z[self.net.node_offset(&idx)],
                depth: 0,
                error_bound: 0.0,
            });
        }
        let depth = self.depth_for(tol)?;
        let mut x = point.to_vec();
        let mut next = vec![0.0; x.len()];
        let mut value = 0.0;
        let mut weight = 1.0;
        for level in 1..=depth {
            let cell = self.net.locate_cell(&x)?;
            self.net.inverse_step(&x, None, &mut next)?;
            value += weight * self.vertical_offset(&cell, &next)?;
            weight *= self.delta;
            core::mem::swap(&mut x, &mut next);
            if weight == 0.0 {
                return Ok(EvalReport {
                    value,
                    depth: level,
                    error_bound: 0.0,
                });
            }
            if let Some(idx) = self.net.node_index(&x) {
                value += weight * self.z[self.net.node_offset(&idx)];
                return Ok(EvalReport {
                    value,
                    depth: level,
                    error_bound: 0.0,
                });
            }
        }
        Ok(EvalReport {
            value,
            depth,
            error_bound: libm::pow(libm::fabs(self.delta), depth as f64) * self.sup_bound(),
        })
    }
}

pub fn eval_fif_delta(data: &FifData, point: &[f64], tol: f64) -> Result<EvalReport> {
    data.eval(point, tol)
}

/// The Read–Bajraktarević operator `T` discretized on a uniform grid:
/// `(T h)(g) = f(g) + α(g) · [h̃(Q(g)) − s(Q(g))]` with `h̃` the multilinear
/// interpolant of the grid values.
pub struct RbGridOperator {
    grid: UniformGrid,
    germ: Vec<f64>,
    scale: Vec<f64>,
    base_at_image: Vec<f64>,
    // per axis, per grid line: lower grid line of Q and weight of the upper one
    stencils: Vec<Vec<(usize, f64)>>,
    alpha_sup: f64,
}

impl RbGridOperator {
    pub fn new(cfg: &FractalConfig, grid: &UniformGrid) -> Result<Self> {
        if grid.domain() != cfg.net.domain() {
            return Err(Error::InvalidArgument("grid box differs from the net box".into()));
        }
        let k = grid.dim();
        let mut image_lines = Vec::with_capacity(k);
        let mut stencils = Vec::with_capacity(k);
        for q in 0..k {
            let axis = cfg.net.axis(q);
            let mut lines = Vec::with_capacity(grid.resolution()[q]);
            let mut st = Vec::with_capacity(grid.resolution()[q]);
            for i in 0..grid.resolution()[q] {
                let mut c = grid.coordinate(q, i);
                if let Some(n) = axis.knot_near(c) {
                    c = axis.knots()[n];
                }
                let y = cfg.net.cell_map(q, axis.locate(c))?.inverse(c)?;
                lines.push(y);
                st.push(grid.stencil(q, y));
            }
            image_lines.push(lines);
            stencils.push(st);
        }
        let n = grid.len();
        let mut germ = Vec::with_capacity(n);
        let mut scale = Vec::with_capacity(n);
        let mut base_at_image = Vec::with_capacity(n);
        let mut point = vec![0.0; k];
        let mut image = vec![0.0; k];
        let mut multi = vec![0usize; k];
        for idx in 0..n {
            let mut rem = idx;
            for q in 0..k {
                multi[q] = rem % grid.resolution()[q];
                rem /= grid.resolution()[q];
                image[q] = image_lines[q][multi[q]];
            }
            grid.point_into(idx, &mut point);
            germ.push(cfg.f.eval(&point)?);
            scale.push(cfg.alpha.eval(&point)?);
            base_at_image.push(cfg.s.eval(&image)?);
        }
        Ok(Self {
            grid: grid.clone(),
            germ,
            scale,
            base_at_image,
            stencils,
            alpha_sup: cfg.alpha_sup,
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    /// The germ sampled on the grid, the usual starting iterate.
    pub fn germ_sample(&self) -> GridFunction {
        GridFunction::new(self.grid.clone(), self.germ.clone()).expect("germ values are finite")
    }

    pub fn apply(&self, h: &GridFunction) -> Result<GridFunction> {
        if h.grid() != &self.grid {
            return Err(Error::InvalidArgument(
                "grid function resolution differs from the operator grid".into(),
            ));
        }
        let k = self.grid.dim();
        let res = self.grid.resolution();
        let values = h.values();
        let mut multi = vec![0usize; k];
        let mut out = Vec::with_capacity(self.grid.len());
        for idx in 0..self.grid.len() {
            let mut rem = idx;
            for q in 0..k {
                multi[q] = rem % res[q];
                rem /= res[q];
            }
            let mut interp = 0.0;
            for mask in 0..1usize << k {
                let mut weight = 1.0;
                let mut offset = 0;
                for q in (0..k).rev() {
                    let (base, t) = self.stencils[q][multi[q]];
                    let up = mask >> q & 1 == 1;
                    weight *= if up { t } else { 1.0 - t };
                    offset = offset * res[q] + base + up as usize;
                }
                if weight != 0.0 {
                    interp += weight * values[offset];
                }
            }
            out.push(self.germ[idx] + self.scale[idx] * (interp - self.base_at_image[idx]));
        }
        GridFunction::new(self.grid.clone(), out)
    }
}

/// One application of the discretized RB operator.
pub fn rb_apply_grid(cfg: &FractalConfig, h: &GridFunction) -> Result<GridFunction> {
    RbGridOperator::new(cfg, h.grid())?.apply(h)
}

#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub solution: GridFunction,
    pub iterations: usize,
    /// `sup |h_{n+1} − h_n|` per iteration.
    pub residuals: Vec<f64>,
}

/// Iterate `h ← T h` from the germ sample until successive iterates differ
/// by at most `tol · (1 − ‖α‖)` (so the fixed point is within `tol`).
pub fn solve_fixed_point_grid(
    cfg: &FractalConfig,
    resolution: &[usize],
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointSolution> {
    let grid = UniformGrid::new(cfg.net.domain().clone(), resolution.to_vec())?;
    let op = RbGridOperator::new(cfg, &grid)?;
    let target = tol * (1.0 - op.alpha_sup);
    let mut h = op.germ_sample();
    let mut residuals = Vec::new();
    for iteration in 1..=max_iter {
        let next = op.apply(&h)?;
        let r = next.sup_distance(&h)?;
        residuals.push(r);
        h = next;
        if r <= target {
            return Ok(FixedPointSolution {
                solution: h,
                iterations: iteration,
                residuals,
            });
        }
    }
    Err(Error::MaxIterations {
        iterations: max_iter,
        residual: residuals.last().copied().unwrap_or(f64::INFINITY),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport {
    pub max_error: f64,
    pub nodes: usize,
    pub pass: bool,
}

/// `max |f^α(node) − f(node)|` over every net node.
pub fn interpolation_check(cfg: &FractalConfig, tol: f64) -> Result<InterpolationReport> {
    let mut max_error = 0.0f64;
    for node in cfg.net.nodes() {
        let v = cfg.eval(&node, tol)?.value;
        max_error = max_error.max(libm::fabs(v - cfg.f.eval(&node)?));
    }
    Ok(InterpolationReport {
        max_error,
        nodes: cfg.net.node_count(),
        pass: max_error <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub max_mismatch: f64,
    /// Largest `tol + bound_left + bound_right` seen.
    pub allowance: f64,
    pub faces: usize,
    pub samples: usize,
    pub pass: bool,
}

/// On every interior face, compare the recursions of the two adjacent cells
/// at `samples` random points.
pub fn boundary_consistency_check(
    cfg: &FractalConfig,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<ConsistencyReport> {
    let mut rng = sampling::rng(seed);
    let mut max_mismatch = 0.0f64;
    let mut allowance = tol;
    let mut faces = 0;
    let mut pass = true;
    for q in 0..cfg.net.dim() {
        let axis = cfg.net.axis(q);
        for j in 1..axis.cells() {
            faces += 1;
            for _ in 0..samples {
                let mut p = sampling::random_point(&mut rng, cfg.net.domain());
                p[q] = axis.knots()[j];
                let left = cfg.eval_in_cell(&p, q, j, tol)?;
                let right = cfg.eval_in_cell(&p, q, j + 1, tol)?;
                let mismatch = libm::fabs(left.value - right.value);
                let allowed = tol + left.error_bound + right.error_bound;
                max_mismatch = max_mismatch.max(mismatch);
                allowance = allowance.max(allowed);
                pass &= mismatch <= allowed;
            }
        }
    }
    Ok(ConsistencyReport {
        max_mismatch,
        allowance,
        faces,
        samples,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub values: GridFunction,
    pub error_bounds: Vec<f64>,
}

/// `f^α` at every grid point, each certified to `tol`.
pub fn sample_surface(cfg: &FractalConfig, grid: &UniformGrid, tol: f64) -> Result<SurfaceSample> {
    if grid.domain() != cfg.net.domain() {
        return Err(Error::InvalidArgument("grid box differs from the net box".into()));
    }
    cfg.depth_for(tol)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut error_bounds = Vec::with_capacity(grid.len());
    let mut point = vec![0.0; grid.dim()];
    for i in 0..grid.len() {
        grid.point_into(i, &mut point);
        let r = cfg.eval(&point, tol)?;
        values.push(r.value);
        error_bounds.push(r.error_bound);
    }
    Ok(SurfaceSample {
        values: GridFunction::new(grid.clone(), values)?,
        error_bounds,
    })
}

/// `f − s` as a field (convenience for gap measurements).
pub fn base_difference(cfg: &FractalConfig) -> Result<FieldRef> {
    difference(cfg.f.clone(), cfg.s.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_field;
    use crate::net::Domain;

    fn expr(src: &str, k: usize) -> FieldRef {
        Arc::new(parse_field(src, k).unwrap())
    }

    fn s1() -> FractalConfig {
        let net = Net::build(Domain::unit(1).unwrap(), vec![vec![0.0, 0.5, 1.0]]).unwrap();
        FractalConfig::new(net, expr("x1", 1), expr("0.5", 1), expr("x1^2", 1), Admission::default())
            .unwrap()
    }

    #[test]
    fn hand_recursion_values() {
        let cfg = s1();
        for (x, want) in [(0.25, 0.375), (0.75, 0.875), (0.125, 0.28125)] {
            let r = cfg.eval(&[x], 1e-12).unwrap();
            assert!((r.value - want).abs() < 1e-15, "{x}: {}", r.value);
            assert_eq!(r.error_bound, 0.0);
        }
    }

    #[test]
    fn zero_scale_returns_germ() {
        let net = Net::uniform(Domain::unit(1).unwrap(), &[3]).unwrap();
        let cfg =
            FractalConfig::new(net, expr("sin(3*x1)", 1), expr("0", 1), expr("x1*sin(3)", 1), Admission::default())
                .unwrap();
        let r = cfg.eval(&[0.3], 1e-10).unwrap();
        assert_eq!(r.value, libm::sin(3.0 * 0.3));
        assert_eq!(r.error_bound, 0.0);
    }

    #[test]
    fn base_equal_to_germ_gives_germ() {
        let net = Net::uniform(Domain::unit(1).unwrap(), &[3]).unwrap();
        let f = expr("exp(x1)", 1);
        let cfg = FractalConfig::new(net, f.clone(), expr("0.7", 1), f, Admission::default()).unwrap();
        let r = cfg.eval(&[0.4321], 1e-10).unwrap();
        assert!((r.value - libm::exp(0.4321)).abs() < 1e-14);
    }

    #[test]
    fn admissibility_failures() {
        let net = Net::build(Domain::unit(1).unwrap(), vec![vec![0.0, 0.5, 1.0]]).unwrap();
        let err = FractalConfig::new(net.clone(), expr("x1", 1), expr("x1", 1), expr("x1", 1), Admission::default());
        assert!(matches!(err, Err(Error::Inadmissible { .. })));
        let err = FractalConfig::new(net.clone(), expr("x1", 1), expr("0.5", 1), expr("x1 + 0.1", 1), Admission::default());
        assert!(matches!(err, Err(Error::CornerMismatch { .. })));
        let report = check_admissible(&net, &*expr("x1", 1), &*expr("0.2", 1), &*expr("x1^3", 1), Admission::default()).unwrap();
        assert!(report.pass);
        assert_eq!(report.alpha_sup, 0.2);
        let with_margin = Admission { margin: 0.85, ..Admission::default() };
        let report = check_admissible(&net, &*expr("x1", 1), &*expr("0.2", 1), &*expr("x1^3", 1), with_margin).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn infeasible_tolerance_is_reported() {
        let net = Net::build(Domain::unit(1).unwrap(), vec![vec![0.0, 0.5, 1.0]]).unwrap();
        let cfg = FractalConfig::new(net, expr("x1", 1), expr("0.99", 1), expr("x1^2", 1), Admission::default()).unwrap();
        assert!(matches!(cfg.eval(&[0.3], 1e-12), Err(Error::ToleranceInfeasible { .. })));
        assert!(matches!(cfg.eval(&[1.3], 1e-1), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn fif_examples() {
        let net = Net::build(Domain::unit(1).unwrap(), vec![vec![0.0, 0.5, 1.0]]).unwrap();
        let data = FifData::new(net.clone(), vec![0.0, 0.5, 1.0], 0.5).unwrap();
        assert!((data.eval(&[0.25], 1e-12).unwrap().value - 0.25).abs() < 1e-15);
        assert_eq!(data.eval(&[0.5], 1e-12).unwrap().value, 0.5);
        let flat = FifData::new(net.clone(), vec![1.0, 3.0, 2.0], 0.0).unwrap();
        assert!((flat.eval(&[0.25], 1e-12).unwrap().value - 2.0).abs() < 1e-15);
        assert!((flat.eval(&[0.75], 1e-12).unwrap().value - 2.5).abs() < 1e-15);
        assert!(FifData::new(net, vec![0.0, 0.5, 1.0], 1.0).is_err());
    }

    #[test]
    fn rb_single_application() {
        let cfg = s1();
        let grid = UniformGrid::new(cfg.net().domain().clone(), vec![5]).unwrap();
        let zero = GridFunction::new(grid, vec![0.0; 5]).unwrap();
        let th = rb_apply_grid(&cfg, &zero).unwrap();
        assert!((th.values()[1] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn boundary_recursions_agree_on_s1() {
        let cfg = s1();
        let l = cfg.eval_in_cell(&[0.5], 0, 1, 1e-12).unwrap();
        let r = cfg.eval_in_cell(&[0.5], 0, 2, 1e-12).unwrap();
        assert_eq!(l.value, 0.5);
        assert_eq!(r.value, 0.5);
        assert!(cfg.eval_in_cell(&[0.25], 0, 2, 1e-12).is_err());
    }
}
