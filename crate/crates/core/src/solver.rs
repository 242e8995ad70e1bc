//! Tiled Picard solver for `Y(x) = ξ(x) + ∫_0^x f(Y(z)) X(dz)` on a grid of
//! `[0,1]^k`.
//!
//! The cube is cut into tiles `[γ, γ+T]` aligned with the grid. Tiles are
//! solved in wavefronts of increasing `Σ γ_i / T_i`, so every tile below and
//! to the left of the current one is known. For a tile at `ρ`, the part of
//! the integral over `[0,x] \ [ρ,x]` is already fixed and folds into the
//! tile's boundary field `ξ_ρ`; the tile then solves
//! `Y = ξ_ρ + ∫_ρ^· f(Y) dX` by Picard iteration.
//!
//! The inner integral is a grid-resolution sum over cells of the corner mean
//! of `f(Y)` times `□X`, accumulated to all nodes in one sweep.

use std::fmt;
use std::sync::Arc;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, ScalarFn};
use crate::grid::{GridPartition, HyperRect, COORD_TOL};
use crate::holder::{estimate_norms_from_values, node_values, strides, HolderExponents};
use crate::sewing::{accumulate_cells, least_squares_slope};

/// Coefficient `f ∈ C_b²` with its derivative.
#[derive(Clone)]
pub struct Coefficient {
    f: ScalarFn,
    df: ScalarFn,
    bound: Option<f64>,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coefficient(bound={:?})", self.bound)
    }
}

const DERIVATIVE_PROBES: usize = 100;
const BOUND_PROBES: usize = 10_000;

impl Coefficient {
    /// Checks `df` against central differences of `f` at 100 probe points of
    /// `[-3, 3]`.
    pub fn new(f: ScalarFn, df: ScalarFn, bound: Option<f64>) -> Result<Self> {
        let h = 1e-5;
        for j in 0..DERIVATIVE_PROBES {
            let t = -3.0 + 6.0 * j as f64 / (DERIVATIVE_PROBES - 1) as f64;
            let fd = (f(t + h) - f(t - h)) / (2.0 * h);
            let d = df(t);
            if !((fd - d).abs() <= 1e-6 * (1.0 + d.abs())) {
                return Err(Error::InvalidCoefficient(format!(
                    "derivative mismatch at {t}: supplied {d}, finite difference {fd}"
                )));
            }
        }
        if let Some(b) = bound {
            if !(b > 0.0) {
                return Err(Error::InvalidCoefficient(format!("bound must be positive, got {b}")));
            }
        }
        Ok(Self { f, df, bound })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            f: Arc::new(move |_| c),
            df: Arc::new(|_| 0.0),
            bound: None,
        }
    }

    /// `f(u) = c·u`.
    pub fn linear(c: f64) -> Self {
        Self {
            f: Arc::new(move |u| c * u),
            df: Arc::new(move |_| c),
            bound: None,
        }
    }

    pub fn identity() -> Self {
        Self::linear(1.0)
    }

    pub fn sine() -> Self {
        Self {
            f: Arc::new(f64::sin),
            df: Arc::new(f64::cos),
            bound: Some(1.0),
        }
    }

    pub fn tanh() -> Self {
        Self {
            f: Arc::new(f64::tanh),
            df: Arc::new(|u: f64| 1.0 - u.tanh().powi(2)),
            bound: Some(1.0),
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        (self.df)(u)
    }

    /// The supplied bound, or `max(|f|, |f'|, |f''|)` over probes of `[lo, hi]`.
    pub fn bound_on(&self, lo: f64, hi: f64) -> f64 {
        if let Some(b) = self.bound {
            return b;
        }
        let h = 1e-4;
        let mut m = 0.0f64;
        for j in 0..BOUND_PROBES {
            let t = lo + (hi - lo) * j as f64 / (BOUND_PROBES - 1) as f64;
            let d2 = (self.derivative(t + h) - self.derivative(t - h)) / (2.0 * h);
            m = m.max(self.eval(t).abs()).max(self.derivative(t).abs()).max(d2.abs());
        }
        m.max(f64::EPSILON)
    }
}

/// `Y = ξ + ∫_0^· f(Y) dX` on the nodes of `grid`.
#[derive(Debug, Clone)]
pub struct Problem {
    coefficient: Coefficient,
    xi: Field,
    driver: Field,
    grid: GridPartition,
}

impl Problem {
    pub fn new(coefficient: Coefficient, xi: Field, driver: Field, grid: GridPartition) -> Result<Self> {
        let k = grid.dim();
        for f in [&xi, &driver] {
            if f.dim() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: f.dim(),
                });
            }
            if !f.covers_grid(&grid) {
                let missing = (0..grid.num_nodes())
                    .map(|n| grid.node(n))
                    .find(|x| f.eval(x).is_err())
                    .map(|x| x.to_vec())
                    .unwrap_or_default();
                return Err(Error::NodeMismatch { point: missing });
            }
        }
        Ok(Self {
            coefficient,
            xi,
            driver,
            grid,
        })
    }

    pub fn grid(&self) -> &GridPartition {
        &self.grid
    }

    pub fn xi(&self) -> &Field {
        &self.xi
    }

    pub fn driver(&self) -> &Field {
        &self.driver
    }

    pub fn coefficient(&self) -> &Coefficient {
        &self.coefficient
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Warn when `sup|ξ_ρ|` exceeds this multiple of `sup|ξ_0|` on a tile.
    pub xi_growth_warn: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            xi_growth_warn: 1e3,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileReport {
    pub origin: Vec<f64>,
    /// Picard steps taken before the iterate stopped moving; the final,
    /// confirming step is not counted.
    pub iterations: usize,
    /// Max-node change of every Picard step, confirming step included.
    pub changes: Vec<f64>,
    /// `sup|ξ_ρ| / sup|ξ_0|` on the tile.
    pub xi_growth: f64,
    /// Largest gap between the glued boundary and the recomputed boundary
    /// on the tile's lower faces.
    pub face_gap: f64,
}

impl TileReport {
    /// Average per-step contraction `(c_last / c_first)^{1/(n-1)}` over the
    /// nonzero Picard changes; `None` with fewer than two of them.
    ///
    /// The first steps of a Volterra-type iteration may still grow, so a
    /// worst single ratio would overstate the rate that governs the cost.
    pub fn contraction_ratio(&self) -> Option<f64> {
        let positive: Vec<f64> = self.changes.iter().copied().filter(|c| *c > 0.0).collect();
        match positive.as_slice() {
            [first, .., last] => Some((last / first).powf(1.0 / (positive.len() - 1) as f64)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub y: Field,
    pub tiles: Vec<TileReport>,
    pub tile_size: Vec<f64>,
    /// `max |Y - (ξ + ∫_0^· f(Y) dX)|` over the grid nodes.
    pub residual: f64,
    pub restarts: usize,
    pub coefficient_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionSidecar {
    pub tile_size: Vec<f64>,
    pub iterations: Vec<usize>,
    pub residual: f64,
    pub restarts: usize,
    pub coefficient_bound: f64,
}

impl Solution {
    pub fn sidecar(&self) -> SolutionSidecar {
        SolutionSidecar {
            tile_size: self.tile_size.clone(),
            iterations: self.tiles.iter().map(|t| t.iterations).collect(),
            residual: self.residual,
            restarts: self.restarts,
            coefficient_bound: self.coefficient_bound,
        }
    }

    pub fn values(&self) -> &[f64] {
        self.y.as_sampled().expect("solutions are sampled").values()
    }
}

/// Tabulated inputs shared by all tiles.
struct Tables {
    xi: Vec<f64>,
    driver: Vec<f64>,
}

impl Tables {
    fn new(problem: &Problem) -> Result<Self> {
        Ok(Self {
            xi: node_values(&problem.xi, &problem.grid)?,
            driver: node_values(&problem.driver, &problem.grid)?,
        })
    }
}

/// Box increments of node values over every cell of `grid`.
fn cell_increments(grid: &GridPartition, values: &[f64]) -> Vec<f64> {
    let counts = grid.node_counts();
    let st = strides(&counts);
    let k = counts.len();
    let offsets: Vec<(usize, f64)> = (0..1usize << k)
        .map(|mask| {
            // bit i set: lower corner on axis i
            let off = (0..k).filter(|&i| mask >> i & 1 == 0).map(|i| st[i]).sum();
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            (off, sign)
        })
        .collect();
    cell_lower_nodes(grid)
        .map(|base| offsets.iter().map(|&(o, s)| s * values[base + o]).sum())
        .collect()
}

/// Flat node index of the lower corner of every cell, in cell order.
fn cell_lower_nodes(grid: &GridPartition) -> impl Iterator<Item = usize> + '_ {
    let counts = grid.node_counts();
    let cells = grid.cell_counts();
    let k = counts.len();
    let total = grid.num_cells();
    let mut idx = vec![0usize; k];
    (0..total).map(move |_| {
        let node = idx.iter().zip(&counts).fold(0, |acc, (&j, &n)| acc * n + j);
        for ax in (0..k).rev() {
            idx[ax] += 1;
            if idx[ax] < cells[ax] {
                break;
            }
            idx[ax] = 0;
        }
        node
    })
}

/// `∫_{lower corner}^x f(Y) dX` at every node of `grid` together with the
/// per-cell contributions.
fn integrate_on(
    grid: &GridPartition,
    coefficient: &Coefficient,
    y: &[f64],
    dx: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let counts = grid.node_counts();
    let st = strides(&counts);
    let k = counts.len();
    let corner_offsets: Vec<usize> = (0..1usize << k)
        .map(|mask| (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| st[i]).sum())
        .collect();
    let fy: Vec<f64> = y.iter().map(|&u| coefficient.eval(u)).collect();
    let scale = 1.0 / corner_offsets.len() as f64;
    let cells: Vec<f64> = cell_lower_nodes(grid)
        .zip(dx)
        .map(|(base, &d)| {
            let mean: f64 = corner_offsets.iter().map(|&o| fy[base + o]).sum::<f64>() * scale;
            mean * d
        })
        .collect();
    (accumulate_cells(grid, &cells), cells)
}

/// Picard iteration on one tile.
///
/// `xi_rho` holds the boundary field at the nodes of `tile_grid`; `dx` the
/// increments of the driver over its cells. Returns the iterate that is
/// consistent with its own cell contributions.
fn iterate_tile(
    tile_grid: &GridPartition,
    coefficient: &Coefficient,
    xi_rho: &[f64],
    dx: &[f64],
    options: &SolverOptions,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut y = xi_rho.to_vec();
    let mut changes = Vec::new();
    loop {
        let (integral, _) = integrate_on(tile_grid, coefficient, &y, dx);
        let next: Vec<f64> = xi_rho.iter().zip(&integral).map(|(a, b)| a + b).collect();
        let change = next
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, |m, d| if d.is_nan() { f64::NAN } else { m.max(d) });
        changes.push(change);
        y = next;
        if change < options.tol {
            // `y` now equals ξ_ρ plus the sum of `cells`, which were computed
            // from the previous iterate; recompute once so that the stored
            // contributions match the returned values exactly.
            let (integral, cells) = integrate_on(tile_grid, coefficient, &y, dx);
            let y: Vec<f64> = xi_rho.iter().zip(&integral).map(|(a, b)| a + b).collect();
            return Ok((y, cells, changes));
        }
        if !change.is_finite() || changes.len() >= options.max_iter {
            return Err(Error::ContractionFailure {
                origin: tile_grid.rect().lower().as_slice().to_vec(),
                iterations: changes.len(),
                last_change: change,
            });
        }
    }
}

/// Solve on a single tile with a given boundary field `ξ_ρ`.
///
/// The result agrees with `xi_rho` on the tile's lower faces exactly.
pub fn picard_tile(
    problem: &Problem,
    tile: &HyperRect,
    xi_rho: &Field,
    options: &SolverOptions,
) -> Result<(Field, TileReport)> {
    let tile_grid = problem
        .grid
        .restrict(tile.lower().as_slice(), tile.upper().as_slice())?;
    tile_grid.rect().ensure_non_degenerate()?;
    let xi_vals = node_values(xi_rho, &tile_grid)?;
    let x_vals = node_values(&problem.driver, &tile_grid)?;
    let dx = cell_increments(&tile_grid, &x_vals);
    let (y, _, changes) = iterate_tile(&tile_grid, &problem.coefficient, &xi_vals, &dx, options)?;
    let report = TileReport {
        origin: tile.lower().as_slice().to_vec(),
        iterations: changes.len().saturating_sub(1),
        changes,
        xi_growth: 1.0,
        face_gap: 0.0,
    };
    Ok((Field::sampled(tile_grid, y)?, report))
}

/// Per-axis breakpoint indices of the tile boundaries, or `None` when the
/// tiles do not align with the grid or hold fewer than 2 cells per axis.
fn tile_breaks(grid: &GridPartition, tile_size: &[f64]) -> Option<Vec<Vec<usize>>> {
    let rect = grid.rect();
    (0..grid.dim())
        .map(|i| {
            let side = rect.side(i);
            let ratio = side / tile_size[i];
            let n = ratio.round();
            if n < 1.0 || (ratio - n).abs() > 1e-9 {
                return None;
            }
            let n = n as usize;
            let breaks: Option<Vec<usize>> = (0..=n)
                .map(|j| {
                    let t = if j == n {
                        rect.upper().coord(i)
                    } else {
                        rect.lower().coord(i) + tile_size[i] * j as f64
                    };
                    grid.axis_position(i, t)
                })
                .collect();
            let breaks = breaks?;
            breaks.windows(2).all(|w| w[1] - w[0] >= 2).then_some(breaks)
        })
        .collect()
}

fn solve_with_tiles(
    problem: &Problem,
    tables: &Tables,
    breaks: &[Vec<usize>],
    options: &SolverOptions,
) -> Result<(Vec<f64>, Vec<TileReport>)> {
    let grid = &problem.grid;
    let k = grid.dim();
    let mut y = tables.xi.clone();
    let mut solved = vec![false; grid.num_nodes()];
    let mut contributions = vec![0.0; grid.num_cells()];
    let cell_counts = grid.cell_counts();
    let cell_strides = strides(&cell_counts);
    let xi_sup = tables.xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let tiles_per_axis: Vec<usize> = breaks.iter().map(|b| b.len() - 1).collect();
    let n_tiles: usize = tiles_per_axis.iter().product();
    let mut order: Vec<Vec<usize>> = (0..n_tiles)
        .map(|mut t| {
            let mut m = vec![0usize; k];
            for i in (0..k).rev() {
                m[i] = t % tiles_per_axis[i];
                t /= tiles_per_axis[i];
            }
            m
        })
        .collect();
    // wavefronts of increasing total offset; stable within a wavefront
    order.sort_by_key(|m| m.iter().sum::<usize>());

    let mut reports = Vec::with_capacity(n_tiles);
    for tile in order {
        let lo_idx: Vec<usize> = (0..k).map(|i| breaks[i][tile[i]]).collect();
        let hi_idx: Vec<usize> = (0..k).map(|i| breaks[i][tile[i] + 1]).collect();
        let lo: Vec<f64> = (0..k).map(|i| grid.axis(i)[lo_idx[i]]).collect();
        let hi: Vec<f64> = (0..k).map(|i| grid.axis(i)[hi_idx[i]]).collect();
        let tile_grid = grid.restrict(&lo, &hi)?;

        // Integral over [0,x] of everything solved so far; cells of this tile
        // still hold zero.
        let prefix = accumulate_cells(grid, &contributions);
        let tile_counts = tile_grid.node_counts();
        let global_of = |local: usize| -> usize {
            let mut rem = local;
            let mut m = vec![0usize; k];
            for i in (0..k).rev() {
                m[i] = rem % tile_counts[i] + lo_idx[i];
                rem /= tile_counts[i];
            }
            grid.node_flat_index(&m)
        };
        let mut face_gap = 0.0f64;
        let xi_rho: Vec<f64> = (0..tile_grid.num_nodes())
            .map(|local| {
                let g = global_of(local);
                let fresh = tables.xi[g] + prefix[g];
                if solved[g] {
                    face_gap = face_gap.max((fresh - y[g]).abs());
                    y[g]
                } else {
                    fresh
                }
            })
            .collect();
        let xi_growth = if xi_sup > 0.0 {
            xi_rho.iter().fold(0.0f64, |m, v| m.max(v.abs())) / xi_sup
        } else {
            0.0
        };
        if xi_growth > options.xi_growth_warn {
            warn!("boundary field on tile at {lo:?} grew by a factor {xi_growth:.3e}");
        }
        let x_vals: Vec<f64> = (0..tile_grid.num_nodes())
            .map(|l| tables.driver[global_of(l)])
            .collect();
        let dx = cell_increments(&tile_grid, &x_vals);
        let (tile_y, cells, changes) =
            iterate_tile(&tile_grid, &problem.coefficient, &xi_rho, &dx, options)?;

        for (local, &v) in tile_y.iter().enumerate() {
            let g = global_of(local);
            if !solved[g] {
                y[g] = v;
                solved[g] = true;
            }
        }
        let tile_cells = tile_grid.cell_counts();
        for (c, &v) in cells.iter().enumerate() {
            let mut rem = c;
            let mut gidx = 0;
            for i in (0..k).rev() {
                let j = rem % tile_cells[i] + lo_idx[i];
                rem /= tile_cells[i];
                gidx += j * cell_strides[i];
            }
            contributions[gidx] = v;
        }
        reports.push(TileReport {
            origin: lo,
            iterations: changes.len().saturating_sub(1),
            changes,
            xi_growth,
            face_gap,
        });
    }
    debug_assert!(solved.iter().all(|&s| s));
    Ok((y, reports))
}

/// `max |Y - (ξ + ∫_0^· f(Y) dX)|` over the grid.
pub fn fixed_point_residual(problem: &Problem, y: &[f64]) -> Result<f64> {
    let tables = Tables::new(problem)?;
    let dx = cell_increments(&problem.grid, &tables.driver);
    let (integral, _) = integrate_on(&problem.grid, &problem.coefficient, y, &dx);
    Ok(y.iter()
        .zip(&tables.xi)
        .zip(&integral)
        .map(|((y, xi), i)| (y - xi - i).abs())
        .fold(0.0, f64::max))
}

/// One application of the solution map `Y ↦ ξ + ∫_0^· f(Y) dX` on the grid.
pub fn apply_solution_map(problem: &Problem, y: &[f64]) -> Result<Vec<f64>> {
    let tables = Tables::new(problem)?;
    let dx = cell_increments(&problem.grid, &tables.driver);
    let (integral, _) = integrate_on(&problem.grid, &problem.coefficient, y, &dx);
    Ok(tables.xi.iter().zip(&integral).map(|(a, b)| a + b).collect())
}

/// Solve on the whole grid, halving the tile size whenever a tile fails to
/// contract.
pub fn solve(problem: &Problem, initial_tile_size: &[f64], options: &SolverOptions) -> Result<Solution> {
    let k = problem.dim();
    if initial_tile_size.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: initial_tile_size.len(),
        });
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            options.tol
        )));
    }
    let tables = Tables::new(problem)?;
    let mut tile_size = initial_tile_size.to_vec();
    let Some(mut breaks) = tile_breaks(&problem.grid, &tile_size) else {
        return Err(Error::InvalidArgument(format!(
            "tile size {tile_size:?} does not divide the grid into aligned tiles of at least 2 cells"
        )));
    };
    let mut restarts = 0;
    loop {
        match solve_with_tiles(problem, &tables, &breaks, options) {
            Ok((y, tiles)) => {
                let residual = fixed_point_residual(problem, &y)?;
                let (lo, hi) = tables
                    .xi
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                let coefficient_bound = problem.coefficient.bound_on(lo - 2.0, hi + 2.0);
                return Ok(Solution {
                    y: Field::sampled(problem.grid.clone(), y)?,
                    tiles,
                    tile_size,
                    residual,
                    restarts,
                    coefficient_bound,
                });
            }
            Err(Error::ContractionFailure { .. }) => {
                tile_size.iter_mut().for_each(|t| *t /= 2.0);
                restarts += 1;
                match tile_breaks(&problem.grid, &tile_size) {
                    Some(b) => breaks = b,
                    None => return Err(Error::NoContraction { tile_size }),
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Sampling parameters for norm estimates in stability reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSampling {
    pub pair_budget: usize,
    pub seed: u64,
}

impl Default for NormSampling {
    fn default() -> Self {
        Self {
            pair_budget: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Estimate of `‖Y - Ỹ‖_β`.
    pub lhs: f64,
    /// `|ξ(0) - ξ̃(0)|`.
    pub xi_at_origin: f64,
    /// Estimate of `‖ξ - ξ̃‖_β`.
    pub xi_norm: f64,
    /// Estimate of `‖X - X̃‖_{β,□}`.
    pub driver_box_norm: f64,
    /// `lhs / (xi_at_origin + xi_norm + driver_box_norm)`, 0 when both vanish.
    pub ratio: f64,
}

impl StabilityReport {
    pub fn rhs(&self) -> f64 {
        self.xi_at_origin + self.xi_norm + self.driver_box_norm
    }
}

pub fn stability_compare(
    p1: &Problem,
    p2: &Problem,
    beta: &HolderExponents,
    sol1: &Solution,
    sol2: &Solution,
    sampling: NormSampling,
) -> Result<StabilityReport> {
    let grid = &p1.grid;
    let same_grid = |g: &GridPartition| {
        g.dim() == grid.dim()
            && (0..g.dim()).all(|i| {
                g.axis(i).len() == grid.axis(i).len()
                    && g.axis(i)
                        .iter()
                        .zip(grid.axis(i))
                        .all(|(a, b)| (a - b).abs() <= COORD_TOL)
            })
    };
    let grids = [
        &p2.grid,
        sol1.y.as_sampled().map(|s| s.grid()).ok_or(Error::GridMismatch)?,
        sol2.y.as_sampled().map(|s| s.grid()).ok_or(Error::GridMismatch)?,
    ];
    if !grids.iter().all(|g| same_grid(g)) {
        return Err(Error::GridMismatch);
    }
    let diff = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    let dy = diff(sol1.values(), sol2.values());
    let xi1 = node_values(&p1.xi, grid)?;
    let xi2 = node_values(&p2.xi, grid)?;
    let dxi = diff(&xi1, &xi2);
    let dx = diff(&node_values(&p1.driver, grid)?, &node_values(&p2.driver, grid)?);

    let norms = |v: &[f64]| estimate_norms_from_values(v, grid, beta, sampling.pair_budget, sampling.seed);
    let lhs = norms(&dy)?.holder_norm();
    let xi_norm = norms(&dxi)?.holder_norm();
    let driver_box_norm = norms(&dx)?.box_norm;
    let xi_at_origin = dxi[0].abs();
    let rhs = xi_at_origin + xi_norm + driver_box_norm;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(StabilityReport {
        lhs,
        xi_at_origin,
        xi_norm,
        driver_box_norm,
        ratio,
    })
}

/// Slope of `log lhs` against `log ε` over a perturbation sweep.
pub fn stability_order(eps: &[f64], reports: &[StabilityReport]) -> f64 {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(reports)
        .filter(|(_, r)| r.lhs > 0.0)
        .map(|(e, r)| (e.ln(), r.lhs.ln()))
        .collect();
    least_squares_slope(&pts)
}
