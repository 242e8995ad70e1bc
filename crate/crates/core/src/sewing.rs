//! Riemann sums over grid partitions and their sewing limit.
//!
//! The limit is approached along uniform dyadic refinements of the target
//! box: level `l` splits every side into `2^l` cells. Refinement stops when
//! two successive sums differ by less than the tolerance.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{format_float, Field};
use crate::grid::{dyadic_partition, GridPartition, HyperRect};
use crate::holder::{p_gauge, q_gauge, HolderExponents};
use crate::increment::{young_pair, young_pair_averaged, PairFunction};
use crate::summation::{compensated_sum, CompensatedSum};

const CHUNK: usize = 4096;

/// Default refinement guard per dimension; keeps `(2^l)^k` cells tractable.
pub fn default_max_level(k: usize) -> u32 {
    match k {
        0 | 1 => 20,
        2 => 10,
        3 => 6,
        4 => 4,
        _ => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelValue {
    pub level: u32,
    pub mesh: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SewResult {
    pub value: f64,
    /// Last successive-level difference; infinite when only one level ran.
    pub error_estimate: f64,
    pub converged: bool,
    pub levels: Vec<LevelValue>,
}

impl SewResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("SewResult serializes")
    }

    pub fn final_level(&self) -> u32 {
        self.levels.last().map_or(0, |l| l.level)
    }
}

/// δ-regularity of an integrand: `|δ^{(i)} Ξ| ≲ q_{(α_1,..,β_i,..,α_k)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandBounds {
    beta: HolderExponents,
    pub delta_norm: Option<f64>,
}

impl IntegrandBounds {
    pub fn new(beta: HolderExponents, delta_norm: Option<f64>) -> Result<Self> {
        if let Some((index, &value)) = beta
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, &b)| b <= 1.0)
        {
            return Err(Error::InvalidExponent {
                index,
                value,
                reason: "δ-exponents must exceed 1",
            });
        }
        Ok(Self { beta, delta_norm })
    }

    pub fn beta(&self) -> &HolderExponents {
        &self.beta
    }
}

/// `Σ_{[u,v]∈P} Ξ(u,v)`, summed in a fixed order independent of the number
/// of worker threads.
pub fn riemann_sum(xi: &PairFunction, partition: &GridPartition) -> f64 {
    let n = partition.num_cells();
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = CompensatedSum::new();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let (lo, hi) = partition.cell_bounds(idx);
                acc.add(xi.eval(&lo, &hi));
            }
            acc.value()
        })
        .collect();
    compensated_sum(partials)
}

fn sew_impl<F>(rect: &HyperRect, tol: f64, max_level: u32, mut level_sum: F) -> Result<SewResult>
where
    F: FnMut(u32, &GridPartition) -> Result<f64>,
{
    rect.ensure_non_degenerate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let k = rect.dim();
    let mut levels = Vec::new();
    let mut error_estimate = f64::INFINITY;
    let mut converged = false;
    for l in 0..=max_level {
        let partition = dyadic_partition(rect, &vec![l; k])?;
        let value = level_sum(l, &partition)?;
        if let Some(prev) = levels.last().map(|p: &LevelValue| p.value) {
            error_estimate = (value - prev).abs();
        }
        levels.push(LevelValue {
            level: l,
            mesh: partition.mesh(),
            value,
        });
        if error_estimate < tol {
            converged = true;
            break;
        }
    }
    Ok(SewResult {
        value: levels.last().expect("at least level 0").value,
        error_estimate,
        converged,
        levels,
    })
}

/// Sewing limit of `xi` over `rect` along dyadic refinements.
///
/// Non-convergence within `max_level` is reported through
/// [`SewResult::converged`], not as an error.
pub fn sew(xi: &PairFunction, rect: &HyperRect, tol: f64, max_level: u32) -> Result<SewResult> {
    if xi.dim() != rect.dim() {
        return Err(Error::DimensionMismatch {
            expected: xi.dim(),
            found: rect.dim(),
        });
    }
    sew_impl(rect, tol, max_level, |_, p| Ok(riemann_sum(xi, p)))
}

/// Local germ used to approximate `∫ Y dX` on a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YoungScheme {
    /// `Y(u) □_{u,v} X`.
    LeftPoint,
    /// Mean of `Y` over the cell corners times `□_{u,v} X`.
    #[default]
    CornerAverage,
}

impl YoungScheme {
    pub fn germ(self, y: Field, x: Field) -> PairFunction {
        match self {
            YoungScheme::LeftPoint => young_pair(y, x),
            YoungScheme::CornerAverage => young_pair_averaged(y, x),
        }
    }
}

fn check_fields(y: &Field, x: &Field, k: usize) -> Result<()> {
    for f in [y, x] {
        if f.dim() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: f.dim(),
            });
        }
    }
    Ok(())
}

fn first_missing_node(f: &Field, partition: &GridPartition) -> Option<Vec<f64>> {
    let s = f.as_sampled()?;
    for i in 0..partition.dim() {
        for &t in partition.axis(i) {
            if s.grid().axis_position(i, t).is_none() {
                let mut p = partition.rect().lower().as_slice().to_vec();
                p[i] = t;
                return Some(p);
            }
        }
    }
    None
}

/// `∫_x^y Y(z) X(dz)` over `rect` with the corner-averaged germ.
pub fn young_integral(
    y: &Field,
    x: &Field,
    rect: &HyperRect,
    tol: f64,
    max_level: u32,
) -> Result<SewResult> {
    young_integral_with(YoungScheme::CornerAverage, y, x, rect, tol, max_level)
}

pub fn young_integral_with(
    scheme: YoungScheme,
    y: &Field,
    x: &Field,
    rect: &HyperRect,
    tol: f64,
    max_level: u32,
) -> Result<SewResult> {
    check_fields(y, x, rect.dim())?;
    let germ = scheme.germ(y.clone(), x.clone());
    sew_impl(rect, tol, max_level, |_, p| {
        for f in [y, x] {
            if let Some(point) = first_missing_node(f, p) {
                return Err(Error::NodeMismatch { point });
            }
        }
        Ok(riemann_sum(&germ, p))
    })
}

/// `|∫_x^y Y dX - Y(x) □_{x,y} X| / (q_β(x,y) p_α(x,y))`, the normalized
/// deviation from the local approximation.
pub fn young_local_ratio(
    result: &SewResult,
    y: &Field,
    x: &Field,
    rect: &HyperRect,
    alpha: &HolderExponents,
    beta: &HolderExponents,
) -> Result<f64> {
    let (lo, hi) = (rect.lower().as_slice(), rect.upper().as_slice());
    let local = young_pair(y.clone(), x.clone()).eval(lo, hi);
    let gauge = q_gauge(lo, hi, beta.as_slice()) * p_gauge(lo, hi, alpha.as_slice());
    Ok((result.value - local).abs() / gauge)
}

/// `|I(Ξ)_{x,y} - Ξ(x,y)| / (q_α(x,y) p_{β-α}(x,y))`.
pub fn sewing_local_ratio(
    result: &SewResult,
    xi: &PairFunction,
    rect: &HyperRect,
    alpha: &HolderExponents,
    bounds: &IntegrandBounds,
) -> f64 {
    let (lo, hi) = (rect.lower().as_slice(), rect.upper().as_slice());
    let gap: Vec<f64> = bounds
        .beta
        .as_slice()
        .iter()
        .zip(alpha.as_slice())
        .map(|(b, a)| b - a)
        .collect();
    let gauge = q_gauge(lo, hi, alpha.as_slice()) * p_gauge(lo, hi, &gap);
    (result.value - xi.eval(lo, hi)).abs() / gauge
}

/// `Z(x) = ∫_{x_0}^x Y dX` at every node of `grid`, where `x_0` is the lower
/// corner of the grid.
///
/// Each cell is sewn on its own and the cell values are accumulated, so that
/// `□_{u,v} Z` over any grid box equals the sum of the sewn cells inside it.
/// Sampled inputs are refined only as deep as their nodes allow.
pub fn indefinite_integral(y: &Field, x: &Field, grid: &GridPartition, tol: f64) -> Result<Field> {
    let k = grid.dim();
    check_fields(y, x, k)?;
    let germ = YoungScheme::CornerAverage.germ(y.clone(), x.clone());
    let guard = default_max_level(k);
    let cells: Vec<f64> = (0..grid.num_cells())
        .into_par_iter()
        .map(|c| {
            let cell = grid.cell(c);
            let mut depth = 0;
            while depth < guard
                && y.covers_dyadic_level(&cell, depth + 1)
                && x.covers_dyadic_level(&cell, depth + 1)
            {
                depth += 1;
            }
            if !(y.covers_dyadic_level(&cell, 0) && x.covers_dyadic_level(&cell, 0)) {
                return Err(Error::NodeMismatch {
                    point: cell.lower().as_slice().to_vec(),
                });
            }
            Ok(sew(&germ, &cell, tol, depth)?.value)
        })
        .collect::<Result<_>>()?;
    let values = accumulate_cells(grid, &cells);
    Field::sampled(grid.clone(), values)
}

/// Node values `Z(n) = Σ_{cells below n} cell_value`, zero on the lower faces.
pub(crate) fn accumulate_cells(grid: &GridPartition, cells: &[f64]) -> Vec<f64> {
    let counts = grid.node_counts();
    let k = counts.len();
    let mut z = vec![0.0; grid.num_nodes()];
    let cell_counts = grid.cell_counts();
    let mut idx = vec![0usize; k];
    for &v in cells {
        let node = idx
            .iter()
            .zip(&counts)
            .fold(0, |acc, (&j, &n)| acc * n + j + 1);
        z[node] = v;
        for ax in (0..k).rev() {
            idx[ax] += 1;
            if idx[ax] < cell_counts[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
    prefix_sum_in_place(&mut z, &counts);
    z
}

pub(crate) fn prefix_sum_in_place(z: &mut [f64], counts: &[usize]) {
    let strides = crate::holder::strides(counts);
    for ax in 0..counts.len() {
        let s = strides[ax];
        for n in 0..z.len() {
            if (n / s) % counts[ax] > 0 {
                z[n] += z[n - s];
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: u32,
    pub mesh: f64,
    pub value: f64,
    pub err_vs_finest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log err` against `log mesh`; `+∞` when every
    /// error vanishes.
    pub order: f64,
}

impl ConvergenceStudy {
    /// One row per level; the fitted order is repeated on every row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "level,mesh,value,err_vs_finest,fitted_order")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.level,
                format_float(r.mesh),
                format_float(r.value),
                format_float(r.err_vs_finest),
                format_float(self.order)
            )?;
        }
        Ok(())
    }
}

/// Riemann sums at dyadic levels `0..levels`, compared to the finest one.
pub fn convergence_study(xi: &PairFunction, rect: &HyperRect, levels: u32) -> Result<ConvergenceStudy> {
    convergence_study_from(xi, rect, 0, levels)
}

/// As [`convergence_study`], with levels `first..first + levels`.
pub fn convergence_study_from(
    xi: &PairFunction,
    rect: &HyperRect,
    first: u32,
    levels: u32,
) -> Result<ConvergenceStudy> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!(
            "a convergence study needs at least 3 levels, got {levels}"
        )));
    }
    rect.ensure_non_degenerate()?;
    let k = rect.dim();
    let mut raw = Vec::with_capacity(levels as usize);
    for l in first..first + levels {
        let p = dyadic_partition(rect, &vec![l; k])?;
        raw.push((l, p.mesh(), riemann_sum(xi, &p)));
    }
    let finest = raw.last().expect("levels >= 3").2;
    let rows: Vec<ConvergenceRow> = raw
        .into_iter()
        .map(|(level, mesh, value)| ConvergenceRow {
            level,
            mesh,
            value,
            err_vs_finest: (value - finest).abs(),
        })
        .collect();
    let points: Vec<(f64, f64)> = rows[1..]
        .iter()
        .filter(|r| r.err_vs_finest > 0.0)
        .map(|r| (r.mesh.ln(), r.err_vs_finest.ln()))
        .collect();
    let order = if points.len() < 2 {
        f64::INFINITY
    } else {
        least_squares_slope(&points)
    };
    Ok(ConvergenceStudy { rows, order })
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
