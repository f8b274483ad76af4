//! Interpolation nets, the affine cell maps and cell location.
//!
//! Axis `q` of a [`Net`] is split by knots `x_{q,0} < … < x_{q,N_q}`. Cell
//! `j` (1-based) is `[x_{q,j-1}, x_{q,j}]`, and its map `v_{q,j}` sends the
//! whole axis onto the cell, preserving orientation for odd `j` and
//! reversing it for even `j`. The alternation is what makes neighbouring
//! cells agree on their shared knot.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative tolerance used when deciding that a coordinate sits on a knot.
pub const KNOT_SNAP: f64 = 1e-12;

/// Axis-aligned box `∏ [lower_q, upper_q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidDomain(format!(
                "{} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (q, (u, w)) in lower.iter().zip(&upper).enumerate() {
            if !(u.is_finite() && w.is_finite() && u < w) {
                return Err(Error::InvalidDomain(format!(
                    "axis {}: need finite lower < upper, got [{u}, {w}]",
                    q + 1
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|q| self.width(q)).product()
    }

    /// Checks membership with a relative slack of [`KNOT_SNAP`] per axis.
    pub fn check_contains(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: point.len(),
            });
        }
        for (q, &x) in point.iter().enumerate() {
            let slack = KNOT_SNAP * self.width(q);
            if !(x >= self.lower[q] - slack && x <= self.upper[q] + slack) {
                return Err(Error::OutsideDomain { axis: q + 1, value: x });
            }
        }
        Ok(())
    }

    /// The `2^k` vertices, first axis varying fastest.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let k = self.dim();
        (0..1usize << k)
            .map(|mask| {
                (0..k)
                    .map(|q| {
                        if mask >> q & 1 == 0 {
                            self.lower[q]
                        } else {
                            self.upper[q]
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(j: usize) -> Self {
        if j % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// Affine contraction `v(x) = a·x + b` of axis `axis` onto cell `cell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMap {
    pub axis: usize,
    pub cell: usize,
    pub slope: f64,
    pub intercept: f64,
    pub parity: Parity,
    // endpoints kept for exact evaluation at the knots
    domain: (f64, f64),
    image: (f64, f64),
}

impl CellMap {
    fn new(axis: usize, cell: usize, domain: (f64, f64), image: (f64, f64)) -> Self {
        let (u, w) = domain;
        let (lo, hi) = image;
        let parity = Parity::of(cell);
        let ratio = (hi - lo) / (w - u);
        // solved from v(u) and v(w); see the parity rule in the module docs
        let (slope, intercept) = match parity {
            Parity::Odd => (ratio, lo - ratio * u),
            Parity::Even => (-ratio, hi + ratio * u),
        };
        Self {
            axis,
            cell,
            slope,
            intercept,
            parity,
            domain,
            image,
        }
    }

    /// Contraction ratio `|a|`.
    pub fn ratio(&self) -> f64 {
        libm::fabs(self.slope)
    }

    pub fn cell_bounds(&self) -> (f64, f64) {
        self.image
    }

    pub fn apply(&self, x: f64) -> f64 {
        let (u, w) = self.domain;
        let (lo, hi) = self.image;
        let lambda = (x - u) / (w - u);
        match self.parity {
            Parity::Odd => lo + lambda * (hi - lo),
            Parity::Even => hi - lambda * (hi - lo),
        }
    }

    /// Inverse on the closed cell; inputs within `1e-12` (relative) outside
    /// the cell are clamped onto it.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (u, w) = self.domain;
        let (lo, hi) = self.image;
        let slack = KNOT_SNAP * (w - u);
        if !(y >= lo - slack && y <= hi + slack) {
            return Err(Error::OutsideCell {
                value: y,
                lower: lo,
                upper: hi,
            });
        }
        let lambda = ((y - lo) / (hi - lo)).clamp(0.0, 1.0);
        let x = match (self.parity, lambda) {
            (Parity::Odd, 0.0) => u,
            (Parity::Odd, 1.0) => w,
            (Parity::Odd, l) => u + l * (w - u),
            (Parity::Even, 0.0) => w,
            (Parity::Even, 1.0) => u,
            (Parity::Even, l) => w - l * (w - u),
        };
        Ok(x.clamp(u, w))
    }
}

/// Strictly increasing knots of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisPartition {
    knots: Vec<f64>,
    maps: Vec<CellMap>,
}

impl AxisPartition {
    fn new(axis: usize, knots: Vec<f64>, lower: f64, upper: f64) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidKnots {
            axis: axis + 1,
            reason: reason.into(),
        };
        if knots.len() < 2 {
            return Err(bad("need at least two knots"));
        }
        if knots.iter().any(|x| !x.is_finite()) {
            return Err(bad("knots must be finite"));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(bad("knots must be strictly increasing"));
        }
        if knots[0] != lower || knots[knots.len() - 1] != upper {
            return Err(bad("first and last knot must equal the box bounds"));
        }
        let maps = (1..knots.len())
            .map(|j| CellMap::new(axis, j, (lower, upper), (knots[j - 1], knots[j])))
            .collect();
        Ok(Self { knots, maps })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of cells `N_q`.
    pub fn cells(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn lower(&self) -> f64 {
        self.knots[0]
    }

    pub fn upper(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Cell containing `x`: `j` with `x ∈ (x_{j-1}, x_j]`, and `j = 1` at the
    /// lower end. `x` is assumed to lie in the axis range.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.cells();
        // first knot index i >= 1 with knot[i] >= x
        let i = self.knots[1..].partition_point(|&k| k < x) + 1;
        i.min(n)
    }

    /// Index of the knot within snapping distance of `x`, if any.
    pub fn knot_near(&self, x: f64) -> Option<usize> {
        let slack = KNOT_SNAP * (self.upper() - self.lower());
        let i = self.knots.partition_point(|&k| k < x);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.knots.len())
            .find(|&i| libm::fabs(self.knots[i] - x) <= slack)
    }

    fn map(&self, j: usize) -> &CellMap {
        &self.maps[j - 1]
    }
}

/// 1-based multi-index `(j_1, …, j_k)` of a cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellIndex(pub Vec<usize>);

/// Tensor net `Δ` over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    domain: Domain,
    axes: Vec<AxisPartition>,
}

impl Net {
    pub fn build(domain: Domain, knot_lists: Vec<Vec<f64>>) -> Result<Self> {
        if knot_lists.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: knot_lists.len(),
            });
        }
        let axes = knot_lists
            .into_iter()
            .enumerate()
            .map(|(q, knots)| AxisPartition::new(q, knots, domain.lower()[q], domain.upper()[q]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { domain, axes })
    }

    /// Equally spaced knots with `cells[q]` cells on axis `q`.
    pub fn uniform(domain: Domain, cells: &[usize]) -> Result<Self> {
        if cells.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: cells.len(),
            });
        }
        let lists = cells
            .iter()
            .enumerate()
            .map(|(q, &n)| {
                let (u, w) = (domain.lower()[q], domain.upper()[q]);
                (0..=n)
                    .map(|i| {
                        if i == n {
                            w
                        } else {
                            u + (w - u) * i as f64 / n.max(1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        Self::build(domain, lists)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn axis(&self, q: usize) -> &AxisPartition {
        &self.axes[q]
    }

    pub fn axes(&self) -> &[AxisPartition] {
        &self.axes
    }

    /// `∏ (N_q + 1)`
    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.knots.len()).product()
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.cells()).product()
    }

    /// Map of cell `j` (1-based) on axis `q` (0-based).
    pub fn cell_map(&self, q: usize, j: usize) -> Result<CellMap> {
        let axis = self.axes.get(q).ok_or(Error::IndexOutOfRange {
            index: q + 1,
            max: self.dim(),
        })?;
        if j == 0 || j > axis.cells() {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: axis.cells(),
            });
        }
        let map = *axis.map(j);
        if map.ratio() >= 1.0 {
            return Err(Error::NonContractive {
                axis: q + 1,
                cell: j,
                slope: map.ratio(),
            });
        }
        Ok(map)
    }

    /// Every cell map must be a strict contraction, i.e. `N_q >= 2`.
    pub fn check_contractive(&self) -> Result<()> {
        for q in 0..self.dim() {
            for j in 1..=self.axes[q].cells() {
                self.cell_map(q, j)?;
            }
        }
        Ok(())
    }

    pub fn locate_cell(&self, point: &[f64]) -> Result<CellIndex> {
        self.domain.check_contains(point)?;
        Ok(CellIndex(
            point
                .iter()
                .zip(&self.axes)
                .map(|(&x, a)| a.locate(x))
                .collect(),
        ))
    }

    /// Knot multi-index of `point` if it is a net node.
    pub fn node_index(&self, point: &[f64]) -> Option<Vec<usize>> {
        point
            .iter()
            .zip(&self.axes)
            .map(|(&x, a)| a.knot_near(x))
            .collect()
    }

    /// Flat node offset, first axis fastest.
    pub fn node_offset(&self, index: &[usize]) -> usize {
        let mut offset = 0;
        for (q, &i) in index.iter().enumerate().rev() {
            offset = offset * self.axes[q].knots.len() + i;
        }
        offset
    }

    /// Node coordinates by flat offset (first axis fastest).
    pub fn node(&self, mut offset: usize) -> Vec<f64> {
        self.axes
            .iter()
            .map(|a| {
                let n = a.knots.len();
                let x = a.knots[offset % n];
                offset /= n;
                x
            })
            .collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.node_count()).map(move |i| self.node(i))
    }

    /// One inverse step: writes `Q(point)` into `out`, using the cell of each
    /// coordinate given by `cells` (or located when `None`). Coordinates
    /// within snapping distance of a knot are snapped onto it first.
    pub(crate) fn inverse_step(
        &self,
        point: &[f64],
        forced: Option<(usize, usize)>,
        out: &mut [f64],
    ) -> Result<()> {
        for (q, axis) in self.axes.iter().enumerate() {
            let mut x = point[q].clamp(axis.lower(), axis.upper());
            if let Some(i) = axis.knot_near(x) {
                x = axis.knots[i];
            }
            let j = match forced {
                Some((fq, fj)) if fq == q => fj,
                _ => axis.locate(x),
            };
            out[q] = axis.map(j).inverse(x)?;
        }
        Ok(())
    }

    /// `v_j(point)`: the box mapped onto cell `cell`.
    pub fn apply_cell(&self, cell: &CellIndex, point: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), cell.0.len())?;
        check_len(self.dim(), point.len())?;
        cell.0
            .iter()
            .zip(point)
            .enumerate()
            .map(|(q, (&j, &x))| Ok(self.cell_map(q, j)?.apply(x)))
            .collect()
    }

    /// `Σ_cells ∏_q |a_{q,j_q}|`; equal to 1 for any net.
    pub fn jacobian_sum(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.maps.iter().map(CellMap::ratio).sum::<f64>())
            .product()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Free-standing form of [`Net::jacobian_sum`].
pub fn jacobian_sum(net: &Net) -> f64 {
    net.jacobian_sum()
}

/// Boundary index map: which knot of cell `j` the box end `m ∈ {0, N}` is
/// sent to.
pub fn eta(j: usize, m: usize, n: usize) -> Result<usize> {
    if m != 0 && m != n {
        return Err(Error::InvalidBoundaryLabel { label: m, cells: n });
    }
    if j == 0 {
        return Err(Error::IndexOutOfRange { index: j, max: n });
    }
    Ok(match (Parity::of(j), m == 0) {
        (Parity::Odd, true) => j - 1,
        (Parity::Odd, false) => j,
        (Parity::Even, true) => j,
        (Parity::Even, false) => j - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1() -> Net {
        Net::build(Domain::unit(1).unwrap(), vec![vec![0.0, 0.5, 1.0]]).unwrap()
    }

    #[test]
    fn build_examples() {
        assert_eq!(s1().axis(0).cells(), 2);
        let fig = Net::build(
            Domain::cube(2, -1.0, 1.0).unwrap(),
            vec![vec![-1.0, -0.5, 0.0, 0.5, 1.0]; 2],
        )
        .unwrap();
        assert_eq!(fig.axis(0).cells(), 4);
        assert_eq!(fig.node_count(), 25);
        let err = Net::build(Domain::unit(1).unwrap(), vec![vec![0.0, 0.5, 0.5, 1.0]]);
        assert!(matches!(err, Err(Error::InvalidKnots { .. })));
        let err = Net::build(Domain::unit(1).unwrap(), vec![vec![0.0, 0.5, 0.9]]);
        assert!(matches!(err, Err(Error::InvalidKnots { .. })));
        let err = Net::build(Domain::unit(1).unwrap(), vec![vec![]]);
        assert!(matches!(err, Err(Error::InvalidKnots { .. })));
        assert!(Domain::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn cell_map_coefficients() {
        let net = s1();
        let m1 = net.cell_map(0, 1).unwrap();
        assert_eq!((m1.slope, m1.intercept, m1.parity), (0.5, 0.0, Parity::Odd));
        let m2 = net.cell_map(0, 2).unwrap();
        assert_eq!((m2.slope, m2.intercept, m2.parity), (-0.5, 1.0, Parity::Even));
        assert_eq!(m2.apply(0.0), 1.0);
        assert_eq!(m2.apply(1.0), 0.5);
        assert!(matches!(net.cell_map(0, 3), Err(Error::IndexOutOfRange { .. })));
        let single = Net::build(Domain::unit(1).unwrap(), vec![vec![0.0, 1.0]]).unwrap();
        assert!(matches!(single.cell_map(0, 1), Err(Error::NonContractive { .. })));
    }

    #[test]
    fn inverse_examples() {
        let net = s1();
        let m1 = net.cell_map(0, 1).unwrap();
        let m2 = net.cell_map(0, 2).unwrap();
        assert_eq!(m1.inverse(0.25).unwrap(), 0.5);
        assert_eq!(m2.inverse(0.75).unwrap(), 0.5);
        assert_eq!(m1.inverse(0.5).unwrap(), 1.0);
        assert_eq!(m2.inverse(0.5).unwrap(), 1.0);
        assert!(matches!(m1.inverse(0.7), Err(Error::OutsideCell { .. })));
        assert_eq!(m1.inverse(0.5 + 1e-14).unwrap(), 1.0);
    }

    #[test]
    fn locate_examples() {
        let net = s1();
        assert_eq!(net.locate_cell(&[0.25]).unwrap(), CellIndex(vec![1]));
        assert_eq!(net.locate_cell(&[0.5]).unwrap(), CellIndex(vec![1]));
        assert_eq!(net.locate_cell(&[1.0]).unwrap(), CellIndex(vec![2]));
        assert_eq!(net.locate_cell(&[0.0]).unwrap(), CellIndex(vec![1]));
        assert!(matches!(net.locate_cell(&[1.5]), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(1, 0, 4).unwrap(), 0);
        assert_eq!(eta(2, 0, 4).unwrap(), 2);
        assert_eq!(eta(3, 4, 4).unwrap(), 3);
        assert_eq!(eta(2, 4, 4).unwrap(), 1);
        assert!(matches!(eta(1, 2, 4), Err(Error::InvalidBoundaryLabel { .. })));
    }

    #[test]
    fn jacobian_examples() {
        assert!((s1().jacobian_sum() - 1.0).abs() < 1e-12);
        let fig = Net::uniform(Domain::cube(2, -1.0, 1.0).unwrap(), &[4, 4]).unwrap();
        assert!((fig.jacobian_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn node_lookup_round_trips() {
        let net = Net::uniform(Domain::cube(2, -1.0, 1.0).unwrap(), &[4, 2]).unwrap();
        for offset in 0..net.node_count() {
            let node = net.node(offset);
            let idx = net.node_index(&node).unwrap();
            assert_eq!(net.node_offset(&idx), offset);
        }
        assert!(net.node_index(&[0.1, 0.0]).is_none());
    }
}
