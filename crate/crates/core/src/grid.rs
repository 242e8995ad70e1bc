//! Points, boxes and grid-like partitions of the unit hyper-cube.
//!
//! A [`GridPartition`] is stored as one sorted breakpoint list per axis. Cells
//! are the Cartesian products of consecutive breakpoints and are never stored;
//! they are produced on demand by index. Flat indices are row-major with the
//! last axis varying fastest, both for cells and for nodes.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing coordinates.
pub const COORD_TOL: f64 = 1e-12;

/// Scratch coordinate buffer; stays on the stack for k <= 8.
pub type Coords = SmallVec<[f64; 8]>;

/// A point of `[0,1]^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPoint(Vec<f64>);

impl MultiPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for (axis, &c) in coords.iter().enumerate() {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::OutOfRange {
                    axis,
                    value: c,
                    lower: 0.0,
                    upper: 1.0,
                });
            }
        }
        Ok(Self(coords))
    }

    pub fn origin(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn ones(k: usize) -> Self {
        Self(vec![1.0; k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.0[axis]
    }

    /// `V_{i,z}`: copy of `self` with coordinate `axis` taken from `z`.
    pub fn with_axis_from(&self, axis: usize, z: &MultiPoint) -> MultiPoint {
        let mut c = self.0.clone();
        c[axis] = z.0[axis];
        MultiPoint(c)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for MultiPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// The closed box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRect {
    lower: MultiPoint,
    upper: MultiPoint,
}

impl HyperRect {
    pub fn new(lower: MultiPoint, upper: MultiPoint) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                expected: lower.dim(),
                found: upper.dim(),
            });
        }
        for axis in 0..lower.dim() {
            if lower.coord(axis) > upper.coord(axis) {
                return Err(Error::OutOfRange {
                    axis,
                    value: lower.coord(axis),
                    lower: 0.0,
                    upper: upper.coord(axis),
                });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_coords(lower: &[f64], upper: &[f64]) -> Result<Self> {
        Self::new(
            MultiPoint::new(lower.to_vec())?,
            MultiPoint::new(upper.to_vec())?,
        )
    }

    pub fn unit(k: usize) -> Self {
        Self {
            lower: MultiPoint::origin(k),
            upper: MultiPoint::ones(k),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &MultiPoint {
        &self.lower
    }

    pub fn upper(&self) -> &MultiPoint {
        &self.upper
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper.coord(axis) - self.lower.coord(axis)
    }

    pub fn max_side(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate_axis().is_some()
    }

    pub fn degenerate_axis(&self) -> Option<usize> {
        (0..self.dim()).find(|&i| self.side(i) == 0.0)
    }

    pub fn ensure_non_degenerate(&self) -> Result<()> {
        match self.degenerate_axis() {
            Some(axis) => Err(Error::DegenerateDomain { axis }),
            None => Ok(()),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().enumerate().all(|(i, &c)| {
                c >= self.lower.coord(i) - COORD_TOL && c <= self.upper.coord(i) + COORD_TOL
            })
    }
}

/// Corners of `rect` with the signs of the expansion of `prod_i (I - V_{i,lower})`.
///
/// Bit `i` of the enumeration mask selects the lower coordinate on axis `i`,
/// so the first entry is always `upper` with sign `+1`.
pub fn corners(rect: &HyperRect) -> Vec<(MultiPoint, i8)> {
    let k = rect.dim();
    (0..1usize << k)
        .map(|mask| {
            let coords = (0..k)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        rect.lower.coord(i)
                    } else {
                        rect.upper.coord(i)
                    }
                })
                .collect();
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            (MultiPoint(coords), sign)
        })
        .collect()
}

/// Grid-like partition: the product of one partition per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPartition {
    axes: Vec<Vec<f64>>,
}

impl GridPartition {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for (axis, pts) in axes.iter().enumerate() {
            if pts.len() < 2 {
                return Err(Error::InvalidPartition {
                    axis,
                    reason: format!("needs at least 2 breakpoints, got {}", pts.len()),
                });
            }
            if pts.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidPartition {
                    axis,
                    reason: "breakpoints must lie in [0,1]".into(),
                });
            }
            if pts.windows(2).any(|w| w[1] <= w[0] + COORD_TOL) {
                return Err(Error::InvalidPartition {
                    axis,
                    reason: "breakpoints must be strictly increasing".into(),
                });
            }
        }
        Ok(Self { axes })
    }

    /// Uniform partition of `rect` with `cells[i]` equal cells along axis `i`.
    pub fn uniform(rect: &HyperRect, cells: &[usize]) -> Result<Self> {
        if cells.len() != rect.dim() {
            return Err(Error::DimensionMismatch {
                expected: rect.dim(),
                found: cells.len(),
            });
        }
        rect.ensure_non_degenerate()?;
        let axes = cells
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let (a, b) = (rect.lower.coord(i), rect.upper.coord(i));
                let n = n.max(1);
                (0..=n)
                    .map(|j| {
                        if j == n {
                            b
                        } else {
                            a + (b - a) * j as f64 / n as f64
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        &self.axes[i]
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// The box covered by the partition.
    pub fn rect(&self) -> HyperRect {
        HyperRect {
            lower: MultiPoint(self.axes.iter().map(|a| a[0]).collect()),
            upper: MultiPoint(self.axes.iter().map(|a| a[a.len() - 1]).collect()),
        }
    }

    pub fn cell_counts(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len() - 1).collect()
    }

    pub fn node_counts(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn num_cells(&self) -> usize {
        self.axes.iter().map(|a| a.len() - 1).product()
    }

    pub fn num_nodes(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    /// Lower and upper corner of the cell with flat index `index`.
    pub fn cell_bounds(&self, mut index: usize) -> (Coords, Coords) {
        let k = self.dim();
        let mut lo: Coords = SmallVec::from_elem(0.0, k);
        let mut hi: Coords = SmallVec::from_elem(0.0, k);
        for i in (0..k).rev() {
            let n = self.axes[i].len() - 1;
            let j = index % n;
            index /= n;
            lo[i] = self.axes[i][j];
            hi[i] = self.axes[i][j + 1];
        }
        (lo, hi)
    }

    pub fn cell(&self, index: usize) -> HyperRect {
        let (lo, hi) = self.cell_bounds(index);
        HyperRect {
            lower: MultiPoint(lo.to_vec()),
            upper: MultiPoint(hi.to_vec()),
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = HyperRect> + '_ {
        (0..self.num_cells()).map(move |i| self.cell(i))
    }

    /// Largest side length over all cells.
    pub fn mesh(&self) -> f64 {
        self.axes
            .iter()
            .flat_map(|a| a.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    /// Coordinates of the node with flat index `index`.
    pub fn node(&self, mut index: usize) -> Coords {
        let k = self.dim();
        let mut c: Coords = SmallVec::from_elem(0.0, k);
        for i in (0..k).rev() {
            let n = self.axes[i].len();
            c[i] = self.axes[i][index % n];
            index /= n;
        }
        c
    }

    /// Per-axis node indices of the node with flat index `index`.
    pub fn node_multi_index(&self, mut index: usize) -> SmallVec<[usize; 8]> {
        let k = self.dim();
        let mut m: SmallVec<[usize; 8]> = SmallVec::from_elem(0, k);
        for i in (0..k).rev() {
            let n = self.axes[i].len();
            m[i] = index % n;
            index /= n;
        }
        m
    }

    pub fn node_flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&j, a)| acc * a.len() + j)
    }

    /// Index of `value` in the breakpoints of `axis`, within [`COORD_TOL`].
    pub fn axis_position(&self, axis: usize, value: f64) -> Option<usize> {
        find_breakpoint(&self.axes[axis], value)
    }

    /// Flat index of the node at `point`, if `point` is a node.
    pub fn node_index(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dim() {
            return None;
        }
        let mut flat = 0;
        for (i, &c) in point.iter().enumerate() {
            let j = self.axis_position(i, c)?;
            flat = flat * self.axes[i].len() + j;
        }
        Some(flat)
    }

    /// Merge the two cells adjacent to the interior breakpoint `z` of `axis`.
    pub fn remove_point(&self, axis: usize, z: f64) -> Result<GridPartition> {
        if axis >= self.dim() {
            return Err(Error::InvalidBreakpoint { axis, value: z });
        }
        let pts = &self.axes[axis];
        match find_breakpoint(pts, z) {
            Some(j) if j > 0 && j + 1 < pts.len() => {
                let mut axes = self.axes.clone();
                axes[axis].remove(j);
                Ok(GridPartition { axes })
            }
            _ => Err(Error::InvalidBreakpoint { axis, value: z }),
        }
    }

    /// Sub-partition made of the breakpoints inside `[lo, hi]` on every axis.
    /// Both bounds must themselves be breakpoints.
    pub fn restrict(&self, lo: &[f64], hi: &[f64]) -> Result<GridPartition> {
        let mut axes = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let a = self
                .axis_position(i, lo[i])
                .ok_or_else(|| Error::NodeMismatch { point: lo.to_vec() })?;
            let b = self
                .axis_position(i, hi[i])
                .ok_or_else(|| Error::NodeMismatch { point: hi.to_vec() })?;
            axes.push(self.axes[i][a..=b].to_vec());
        }
        GridPartition::new(axes)
    }
}

fn find_breakpoint(pts: &[f64], value: f64) -> Option<usize> {
    let j = pts.partition_point(|&p| p < value - COORD_TOL);
    (j < pts.len() && (pts[j] - value).abs() <= COORD_TOL).then_some(j)
}

/// Partition of `rect` into `2^levels[i]` equal cells along axis `i`.
pub fn dyadic_partition(rect: &HyperRect, levels: &[u32]) -> Result<GridPartition> {
    rect.ensure_non_degenerate()?;
    let cells: Vec<usize> = levels.iter().map(|&l| 1usize << l).collect();
    GridPartition::uniform(rect, &cells)
}
