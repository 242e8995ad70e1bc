//! Distance gauges and sampled estimates of Hölder field norms.
//!
//! The suprema defining the norms range over infinitely many pairs, so the
//! estimates here are maxima over a fixed, seeded sample of grid-node pairs:
//!
//! * every node paired with the node `2^j` steps further along each axis and
//!   with the first node of its grid line (the origin anchor),
//! * boxes `[n, n + 2^j (1,..,1)]` at every dyadic scale, plus the full box,
//! * `pair_budget` uniformly drawn node pairs per axis and for boxes.
//!
//! Pairs with a zero-length side are excluded from the box quotient, where
//! both the increment and `q_alpha` vanish. All estimates are lower bounds of
//! the true norms and are reproducible from the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Field;
use crate::grid::GridPartition;

/// Multi-index of positive exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderExponents(Vec<f64>);

impl HolderExponents {
    /// Any positive exponents; used for gauges and δ-regularity (`β > 1`).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidExponent {
                    index,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        Ok(Self(values))
    }

    /// Exponents of a field space; each entry must lie in `(0,1)`.
    pub fn for_fields(values: Vec<f64>) -> Result<Self> {
        let e = Self::new(values)?;
        if let Some((index, &value)) = e.0.iter().enumerate().find(|(_, &v)| v >= 1.0) {
            return Err(Error::InvalidExponent {
                index,
                value,
                reason: "field exponents must be below 1",
            });
        }
        Ok(e)
    }

    pub fn uniform(k: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `q_γ(x,y) = ∏ |y_i - x_i|^{γ_i}`.
pub fn q_gauge(x: &[f64], y: &[f64], gamma: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(gamma)
        .map(|((a, b), g)| (b - a).abs().powf(*g))
        .product()
}

/// `p_γ(x,y) = Σ |y_i - x_i|^{γ_i}`; a coinciding coordinate contributes 0.
pub fn p_gauge(x: &[f64], y: &[f64], gamma: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(gamma)
        .map(|((a, b), g)| {
            let d = (b - a).abs();
            if d == 0.0 {
                0.0
            } else {
                d.powf(*g)
            }
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// Estimate of `‖·‖_{α,□}`.
    pub box_norm: f64,
    /// Estimate of `‖·‖_{α,+}`, the sum of the per-axis maxima.
    pub plus_norm: f64,
    /// Per-axis maxima making up `plus_norm`.
    pub axis_norms: Vec<f64>,
    /// Maximum of `|f|` over the grid nodes.
    pub sup_norm: f64,
    pub pairs_evaluated: usize,
    /// Lower corner of the grid, the anchor of the sup-norm bound.
    pub anchor: Vec<f64>,
}

impl NormReport {
    /// `‖·‖_α = ‖·‖_{α,□} + ‖·‖_{α,+}`.
    pub fn holder_norm(&self) -> f64 {
        self.box_norm + self.plus_norm
    }
}

/// Node values of `f` on `grid`, in flat node order.
pub fn node_values(f: &Field, grid: &GridPartition) -> Result<Vec<f64>> {
    (0..grid.num_nodes()).map(|n| f.eval(&grid.node(n))).collect()
}

pub fn estimate_norms(
    f: &Field,
    grid: &GridPartition,
    alpha: &HolderExponents,
    pair_budget: usize,
    seed: u64,
) -> Result<NormReport> {
    let values = node_values(f, grid)?;
    estimate_norms_from_values(&values, grid, alpha, pair_budget, seed)
}

/// [`estimate_norms`] on already tabulated node values.
pub fn estimate_norms_from_values(
    values: &[f64],
    grid: &GridPartition,
    alpha: &HolderExponents,
    pair_budget: usize,
    seed: u64,
) -> Result<NormReport> {
    let k = grid.dim();
    if alpha.dim() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: alpha.dim(),
        });
    }
    if values.len() != grid.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: grid.num_nodes(),
            found: values.len(),
        });
    }
    if pair_budget == 0 {
        return Err(Error::InvalidArgument("pair_budget must be at least 1".into()));
    }
    let a = alpha.as_slice();
    let counts = grid.node_counts();
    let strides = strides(&counts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = 0usize;

    let mut axis_norms = vec![0.0; k];
    for i in 0..k {
        let n_i = counts[i];
        let pts = grid.axis(i);
        let quotient = |n: usize, j: usize, m: usize| -> f64 {
            let d = (values[n + (m - j) * strides[i]] - values[n]).abs();
            d / (pts[m] - pts[j]).powf(a[i])
        };
        let mut steps: Vec<usize> = std::iter::successors(Some(1usize), |s| Some(s * 2))
            .take_while(|&s| s < n_i)
            .collect();
        if !steps.contains(&(n_i - 1)) {
            steps.push(n_i - 1);
        }
        // Lines along axis i start at nodes whose i-th index is 0.
        let (best, count) = (0..values.len())
            .into_par_iter()
            .map(|n| {
                let j = (n / strides[i]) % n_i;
                let mut best = 0.0f64;
                let mut count = 0usize;
                for &s in &steps {
                    if j + s < n_i {
                        best = best.max(quotient(n, j, j + s));
                        count += 1;
                    }
                }
                if j > 0 {
                    // anchor pair: first node of the line to this node
                    let first = n - j * strides[i];
                    best = best.max(quotient(first, 0, j));
                    count += 1;
                }
                (best, count)
            })
            .reduce(|| (0.0, 0), |x, y| (x.0.max(y.0), x.1 + y.1));
        let mut best = best;
        pairs += count;
        for _ in 0..pair_budget {
            let n = rng.random_range(0..values.len());
            let j = (n / strides[i]) % n_i;
            let m = rng.random_range(0..n_i);
            if m == j {
                continue;
            }
            let (lo, hi) = (j.min(m), j.max(m));
            let base = n - j * strides[i] + lo * strides[i];
            best = best.max(quotient(base, lo, hi));
            pairs += 1;
        }
        axis_norms[i] = best;
    }

    let box_quotient = |lo: &[usize], hi: &[usize]| -> Option<f64> {
        if lo.iter().zip(hi).any(|(a, b)| a == b) {
            return None;
        }
        let mut incr = 0.0;
        for mask in 0..1usize << k {
            let mut idx = 0;
            for ax in 0..k {
                let j = if mask >> ax & 1 == 1 { lo[ax] } else { hi[ax] };
                idx += j * strides[ax];
            }
            if mask.count_ones() % 2 == 0 {
                incr += values[idx];
            } else {
                incr -= values[idx];
            }
        }
        let q: f64 = (0..k)
            .map(|ax| (grid.axis(ax)[hi[ax]] - grid.axis(ax)[lo[ax]]).powf(a[ax]))
            .product();
        Some(incr.abs() / q)
    };

    let max_cells = counts.iter().map(|c| c - 1).max().unwrap_or(1);
    let scales: Vec<usize> = std::iter::successors(Some(1usize), |s| Some(s * 2))
        .take_while(|&s| s < max_cells)
        .collect();
    let (mut box_norm, count) = (0..values.len())
        .into_par_iter()
        .map(|n| {
            let lo: Vec<usize> = (0..k).map(|ax| (n / strides[ax]) % counts[ax]).collect();
            let mut best = 0.0f64;
            let mut count = 0usize;
            for &s in &scales {
                let hi: Vec<usize> = (0..k)
                    .map(|ax| (lo[ax] + s).min(counts[ax] - 1))
                    .collect();
                if let Some(q) = box_quotient(&lo, &hi) {
                    best = best.max(q);
                    count += 1;
                }
            }
            (best, count)
        })
        .reduce(|| (0.0, 0), |x, y| (x.0.max(y.0), x.1 + y.1));
    pairs += count;
    let first = vec![0usize; k];
    let last: Vec<usize> = counts.iter().map(|c| c - 1).collect();
    if let Some(q) = box_quotient(&first, &last) {
        box_norm = box_norm.max(q);
        pairs += 1;
    }
    for _ in 0..pair_budget {
        let mut lo = vec![0usize; k];
        let mut hi = vec![0usize; k];
        for ax in 0..k {
            let p = rng.random_range(0..counts[ax]);
            let q = rng.random_range(0..counts[ax]);
            lo[ax] = p.min(q);
            hi[ax] = p.max(q);
        }
        if let Some(q) = box_quotient(&lo, &hi) {
            box_norm = box_norm.max(q);
            pairs += 1;
        }
    }

    if pairs == 0 {
        return Err(Error::EmptySample);
    }
    let sup_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(NormReport {
        box_norm,
        plus_norm: axis_norms.iter().sum(),
        axis_norms,
        sup_norm,
        pairs_evaluated: pairs,
        anchor: grid.rect().lower().as_slice().to_vec(),
    })
}

/// Checks `sup |f| <= |f(anchor)| + ‖f‖_{α,+}` on the sampled values.
///
/// The sample set contains every anchor pair, so the inequality holds for the
/// estimates exactly, up to rounding.
pub fn sup_norm_bound_check(f: &Field, report: &NormReport) -> Result<bool> {
    let at_anchor = f.eval(&report.anchor)?.abs();
    let rhs = at_anchor + report.plus_norm;
    Ok(report.sup_norm <= rhs + 1e-12 * (1.0 + rhs))
}

pub(crate) fn strides(counts: &[usize]) -> Vec<usize> {
    let k = counts.len();
    let mut s = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        s[i] = s[i + 1] * counts[i + 1];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::HyperRect;
    use approx::assert_abs_diff_eq;

    #[test]
    fn q_gauge_examples() {
        assert_eq!(q_gauge(&[0.3, 0.3], &[0.3, 0.3], &[0.5, 0.5]), 0.0);
        assert_eq!(q_gauge(&[0.0, 0.0], &[1.0, 1.0], &[0.5, 0.5]), 1.0);
        assert_abs_diff_eq!(q_gauge(&[0.0], &[0.25], &[0.5]), 0.5);
    }

    #[test]
    fn p_gauge_examples() {
        assert_eq!(p_gauge(&[0.2, 0.7], &[0.2, 0.7], &[0.5, 2.0]), 0.0);
        assert_eq!(p_gauge(&[0.0, 0.0], &[1.0, 1.0], &[0.3, 7.0]), 2.0);
        assert_abs_diff_eq!(p_gauge(&[0.0, 0.0], &[0.5, 0.25], &[1.0, 2.0]), 0.5625);
    }

    #[test]
    fn exponent_validation() {
        assert!(HolderExponents::new(vec![0.5, 1.5]).is_ok());
        assert!(HolderExponents::new(vec![0.0]).is_err());
        assert!(HolderExponents::for_fields(vec![0.5, 1.0]).is_err());
        assert!(HolderExponents::new(vec![]).is_err());
    }

    #[test]
    fn constant_field_has_zero_seminorms() {
        let g = GridPartition::uniform(&HyperRect::unit(2), &[8, 8]).unwrap();
        let f = Field::constant(2, 3.5);
        let a = HolderExponents::uniform(2, 0.5).unwrap();
        let r = estimate_norms(&f, &g, &a, 50, 1).unwrap();
        assert_eq!(r.box_norm, 0.0);
        assert_eq!(r.plus_norm, 0.0);
        assert_eq!(r.sup_norm, 3.5);
        assert!(sup_norm_bound_check(&f, &r).unwrap());
    }

    #[test]
    fn linear_field_attains_endpoint_quotient() {
        let g = GridPartition::uniform(&HyperRect::unit(1), &[1000]).unwrap();
        let f = Field::from_fn(1, |x| x[0]);
        let a = HolderExponents::uniform(1, 0.5).unwrap();
        let r = estimate_norms(&f, &g, &a, 10, 7).unwrap();
        assert!((r.plus_norm - 1.0).abs() < 1e-9, "{}", r.plus_norm);
        // equality case of the sup-norm bound
        assert!(sup_norm_bound_check(&f, &r).unwrap());
        assert!((r.sup_norm - (0.0 + r.plus_norm)).abs() < 1e-9);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let g = GridPartition::uniform(&HyperRect::unit(1), &[4]).unwrap();
        let a = HolderExponents::uniform(1, 0.5).unwrap();
        assert!(estimate_norms(&Field::constant(1, 0.0), &g, &a, 0, 0).is_err());
    }

    #[test]
    fn estimates_are_seed_deterministic() {
        let g = GridPartition::uniform(&HyperRect::unit(2), &[16, 16]).unwrap();
        let f = Field::from_fn(2, |x| (7.0 * x[0]).sin() * (3.0 * x[1] + x[0]).cos());
        let a = HolderExponents::uniform(2, 0.6).unwrap();
        let r1 = estimate_norms(&f, &g, &a, 200, 11).unwrap();
        let r2 = estimate_norms(&f, &g, &a, 200, 11).unwrap();
        assert_eq!(r1, r2);
    }
}
