//! Uniform tensor grids and sampled fields.
//!
//! Flat indices run over the grid with the first axis varying fastest,
//! matching the CSV row order of the command line tool.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{check_arity, Field};
use crate::net::{Domain, Net};

#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    domain: Domain,
    resolution: Vec<usize>,
}

impl UniformGrid {
    pub fn new(domain: Domain, resolution: Vec<usize>) -> Result<Self> {
        if resolution.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: resolution.len(),
            });
        }
        if let Some(&r) = resolution.iter().find(|&&r| r < 2) {
            return Err(Error::InvalidArgument(alloc::format!(
                "grid resolution must be at least 2 per axis, got {r}"
            )));
        }
        Ok(Self { domain, resolution })
    }

    pub fn cube(domain: Domain, points_per_axis: usize) -> Result<Self> {
        let k = domain.dim();
        Self::new(domain, vec![points_per_axis; k])
    }

    /// Grid on the net's box whose spacing refines every cell evenly, so the
    /// inverse cell maps send grid points to grid points. Only possible for
    /// equally spaced knots; other axes keep `min_points`.
    pub fn aligned(net: &Net, min_points: usize) -> Result<Self> {
        let resolution = net
            .axes()
            .iter()
            .map(|axis| {
                let n = axis.cells();
                let width = axis.upper() - axis.lower();
                let uniform = axis.knots().iter().enumerate().all(|(i, &x)| {
                    libm::fabs(x - (axis.lower() + width * i as f64 / n as f64)) <= 1e-12 * width
                });
                if uniform {
                    let m = (min_points.max(2) - 1).div_ceil(n);
                    m * n + 1
                } else {
                    min_points.max(2)
                }
            })
            .collect();
        Self::new(net.domain().clone(), resolution)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.domain.width(axis) / (self.resolution[axis] - 1) as f64
    }

    /// Coordinate of grid line `i` on `axis`; endpoints are exact.
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let r = self.resolution[axis];
        if i + 1 == r {
            self.domain.upper()[axis]
        } else {
            self.domain.lower()[axis] + self.domain.width(axis) * i as f64 / (r - 1) as f64
        }
    }

    pub fn point_into(&self, mut index: usize, out: &mut [f64]) {
        for (q, slot) in out.iter_mut().enumerate() {
            let r = self.resolution[q];
            *slot = self.coordinate(q, index % r);
            index /= r;
        }
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.point_into(index, &mut p);
        p
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let mut offset = 0;
        for (q, &i) in multi.iter().enumerate().rev() {
            offset = offset * self.resolution[q] + i;
        }
        offset
    }

    /// Lower grid line and weight of the upper one for coordinate `x`.
    pub(crate) fn stencil(&self, axis: usize, x: f64) -> (usize, f64) {
        let r = self.resolution[axis];
        let t = (x - self.domain.lower()[axis]) / self.spacing(axis);
        let t = t.clamp(0.0, (r - 1) as f64);
        let base = libm::floor(t) as usize;
        let base = base.min(r - 2);
        (base, t - base as f64)
    }

    /// Grids over the same box; resolutions may differ.
    pub fn same_domain(&self, other: &UniformGrid) -> bool {
        self.domain == other.domain
    }
}

/// Samples of a field on a [`UniformGrid`], extended off-grid by multilinear
/// interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: UniformGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn sample(field: &dyn Field, grid: &UniformGrid) -> Result<Self> {
        check_arity(field.arity(), &vec![0.0; grid.dim()])?;
        let mut point = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut point);
                field.eval(&point)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)))
    }

    /// `max |self − other|` over a shared grid.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("grid functions on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max(libm::fabs(a - b))))
    }

    /// Multilinear interpolation; `point` is clamped into the box.
    pub fn interpolate(&self, point: &[f64]) -> f64 {
        let k = self.grid.dim();
        let mut base = [0usize; 8];
        let mut frac = [0.0f64; 8];
        let mut base_vec;
        let mut frac_vec;
        let (base, frac): (&mut [usize], &mut [f64]) = if k <= 8 {
            (&mut base[..k], &mut frac[..k])
        } else {
            base_vec = vec![0usize; k];
            frac_vec = vec![0.0; k];
            (&mut base_vec[..], &mut frac_vec[..])
        };
        for q in 0..k {
            let (b, t) = self.grid.stencil(q, point[q]);
            base[q] = b;
            frac[q] = t;
        }
        let mut acc = 0.0;
        for mask in 0..1usize << k {
            let mut weight = 1.0;
            let mut offset = 0;
            for q in (0..k).rev() {
                let up = mask >> q & 1 == 1;
                weight *= if up { frac[q] } else { 1.0 - frac[q] };
                offset = offset * self.grid.resolution[q] + base[q] + up as usize;
            }
            if weight != 0.0 {
                acc += weight * self.values[offset];
            }
        }
        acc
    }
}

impl Field for GridFunction {
    fn arity(&self) -> usize {
        self.grid.dim()
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        check_arity(self.grid.dim(), point)?;
        Ok(self.interpolate(point))
    }
}
