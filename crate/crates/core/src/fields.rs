//! Scalar fields on `[0,1]^k` and generators for test fields.
//!
//! A [`Field`] is either closed-form (evaluable everywhere) or grid-sampled
//! (evaluable exactly at the nodes of a tensor grid). Sampled fields are never
//! interpolated: asking for an off-node value is an error.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{GridPartition, HyperRect, COORD_TOL};
use crate::holder::HolderExponents;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Default cap on the number of nodes per axis of a sheet sample.
pub const DEFAULT_SHEET_NODE_CAP: usize = 128;

/// Provenance carried by sampled fields into their CSV header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldMeta {
    pub hurst: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

#[derive(Clone)]
pub struct SampledField {
    grid: GridPartition,
    values: Arc<Vec<f64>>,
    meta: FieldMeta,
}

impl SampledField {
    pub fn grid(&self) -> &GridPartition {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &FieldMeta {
        &self.meta
    }
}

#[derive(Clone)]
pub enum Field {
    Closed { dim: usize, f: FieldFn },
    Sampled(SampledField),
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Closed { dim, .. } => write!(f, "Field::Closed(k={dim})"),
            Field::Sampled(s) => write!(f, "Field::Sampled(nodes={:?})", s.grid.node_counts()),
        }
    }
}

impl Field {
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Field::Closed {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::from_fn(dim, move |_| c)
    }

    /// `x_1 x_2 ... x_k`.
    pub fn product_identity(dim: usize) -> Self {
        Self::from_fn(dim, |x| x.iter().product())
    }

    pub fn sampled(grid: GridPartition, values: Vec<f64>) -> Result<Self> {
        Self::sampled_with_meta(grid, values, FieldMeta::default())
    }

    pub fn sampled_with_meta(
        grid: GridPartition,
        values: Vec<f64>,
        meta: FieldMeta,
    ) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::DimensionMismatch {
                expected: grid.num_nodes(),
                found: values.len(),
            });
        }
        Ok(Field::Sampled(SampledField {
            grid,
            values: Arc::new(values),
            meta,
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Field::Closed { dim, .. } => *dim,
            Field::Sampled(s) => s.grid.dim(),
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, Field::Sampled(_))
    }

    pub fn as_sampled(&self) -> Option<&SampledField> {
        match self {
            Field::Sampled(s) => Some(s),
            Field::Closed { .. } => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        match self {
            Field::Closed { f, .. } => Ok(f(x)),
            Field::Sampled(s) => s
                .grid
                .node_index(x)
                .map(|n| s.values[n])
                .ok_or_else(|| Error::NodeMismatch { point: x.to_vec() }),
        }
    }

    /// Like [`Field::eval`] but yields NaN off the nodes of a sampled field.
    /// Callers are expected to have checked node coverage beforehand.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Field::Closed { f, .. } => f(x),
            Field::Sampled(s) => s.grid.node_index(x).map_or(f64::NAN, |n| s.values[n]),
        }
    }

    /// Whether all nodes of the level-`level` dyadic partition of `rect` can
    /// be evaluated.
    pub fn covers_dyadic_level(&self, rect: &HyperRect, level: u32) -> bool {
        match self {
            Field::Closed { .. } => true,
            Field::Sampled(s) => (0..rect.dim()).all(|i| {
                let (a, b) = (rect.lower().coord(i), rect.upper().coord(i));
                let n = 1usize << level;
                (0..=n).all(|j| {
                    let t = if j == n {
                        b
                    } else {
                        a + (b - a) * j as f64 / n as f64
                    };
                    s.grid.axis_position(i, t).is_some()
                })
            }),
        }
    }

    /// Whether every node of `grid` is evaluable.
    pub fn covers_grid(&self, grid: &GridPartition) -> bool {
        match self {
            Field::Closed { dim, .. } => *dim == grid.dim(),
            Field::Sampled(s) => {
                s.grid.dim() == grid.dim()
                    && (0..grid.dim())
                        .all(|i| grid.axis(i).iter().all(|&t| s.grid.axis_position(i, t).is_some()))
            }
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        match self {
            Field::Closed { dim, f } => {
                let f = f.clone();
                Field::Closed {
                    dim: *dim,
                    f: Arc::new(move |x| c * f(x)),
                }
            }
            Field::Sampled(s) => Field::Sampled(SampledField {
                grid: s.grid.clone(),
                values: Arc::new(s.values.iter().map(|v| c * v).collect()),
                meta: FieldMeta::default(),
            }),
        }
    }

    /// `a·self + b·other`. Mixed closed/sampled inputs are tabulated on the
    /// sampled grid.
    pub fn linear_combination(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        match (self, other) {
            (Field::Closed { dim, f }, Field::Closed { f: g, .. }) => {
                let (f, g) = (f.clone(), g.clone());
                Ok(Field::Closed {
                    dim: *dim,
                    f: Arc::new(move |x| a * f(x) + b * g(x)),
                })
            }
            (Field::Sampled(s), _) | (_, Field::Sampled(s)) => {
                let grid = s.grid.clone();
                let values = (0..grid.num_nodes())
                    .map(|n| {
                        let x = grid.node(n);
                        Ok(a * self.eval(&x)? + b * other.eval(&x)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Field::sampled(grid, values)
            }
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.linear_combination(1.0, other, -1.0)
    }
}

/// `f(x) = ∏ f_i(x_i)`.
pub fn product_field(factors: Vec<ScalarFn>) -> Field {
    let dim = factors.len();
    Field::from_fn(dim, move |x| {
        factors.iter().zip(x).map(|(f, &t)| f(t)).product()
    })
}

/// One-dimensional truncated Weierstrass sum
/// `Σ_{n=0}^{terms} 2^{-nα} cos(2π 2^n t)`.
pub fn weierstrass_1d(alpha: f64, terms: u32, t: f64) -> f64 {
    let mut s = 0.0;
    let mut amp = 1.0;
    let mut freq = std::f64::consts::TAU;
    let decay = 2f64.powf(-alpha);
    for _ in 0..=terms {
        s += amp * (freq * t).cos();
        amp *= decay;
        freq *= 2.0;
    }
    s
}

/// Tensor product of truncated Weierstrass sums, one exponent per axis.
pub fn weierstrass_field(alpha: &HolderExponents, terms: u32) -> Field {
    let a = alpha.as_slice().to_vec();
    Field::from_fn(a.len(), move |x| {
        a.iter()
            .zip(x)
            .map(|(&ai, &t)| weierstrass_1d(ai, terms, t))
            .product()
    })
}

/// Tabulate `f` at every node of `grid`.
pub fn sample_on_grid(f: &Field, grid: &GridPartition) -> Result<Field> {
    let values = (0..grid.num_nodes())
        .map(|n| f.eval(&grid.node(n)))
        .collect::<Result<Vec<_>>>()?;
    let meta = f.as_sampled().map(|s| s.meta.clone()).unwrap_or_default();
    Field::sampled_with_meta(grid.clone(), values, meta)
}

/// Parameters of a fractional Brownian sheet sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetSpec {
    hurst: Vec<f64>,
    grid: GridPartition,
    seed: u64,
}

impl SheetSpec {
    pub fn new(hurst: Vec<f64>, grid: GridPartition, seed: u64) -> Result<Self> {
        Self::with_node_cap(hurst, grid, seed, DEFAULT_SHEET_NODE_CAP)
    }

    pub fn with_node_cap(
        hurst: Vec<f64>,
        grid: GridPartition,
        seed: u64,
        node_cap: usize,
    ) -> Result<Self> {
        if hurst.len() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: hurst.len(),
            });
        }
        if let Some(h) = hurst.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
            return Err(Error::InvalidSheet(format!(
                "Hurst exponent {h} outside (0,1)"
            )));
        }
        if let Some((axis, n)) = grid
            .node_counts()
            .into_iter()
            .enumerate()
            .find(|(_, n)| *n > node_cap)
        {
            return Err(Error::InvalidSheet(format!(
                "axis {axis} has {n} nodes, cap is {node_cap}"
            )));
        }
        Ok(Self { hurst, grid, seed })
    }

    pub fn hurst(&self) -> &[f64] {
        &self.hurst
    }

    pub fn grid(&self) -> &GridPartition {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Covariance of fractional Brownian motion with Hurst index `h`.
pub fn fbm_covariance(h: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (s.abs().powf(e) + t.abs().powf(e) - (s - t).abs().powf(e))
}

/// Factor `C = L Lᵀ` of the covariance on `nodes`. Rows of nodes at the
/// origin, where the variance vanishes, are exactly zero.
fn covariance_factor(axis: usize, h: f64, nodes: &[f64]) -> Result<DMatrix<f64>> {
    let live: Vec<usize> = (0..nodes.len()).filter(|&j| nodes[j] > 0.0).collect();
    let m = live.len();
    let mut factor = DMatrix::zeros(nodes.len(), m.max(1));
    if m == 0 {
        return Ok(factor);
    }
    let cov = DMatrix::from_fn(m, m, |a, b| fbm_covariance(h, nodes[live[a]], nodes[live[b]]));
    let trace = cov.trace();
    let eig = SymmetricEigen::new(cov);
    let min = eig.eigenvalues.min();
    if !min.is_finite() || min < -1e-8 * trace {
        return Err(Error::CovarianceError {
            axis,
            reason: format!("eigenvalue {min:e} is negative beyond tolerance"),
        });
    }
    let floor = 1e-12 * trace;
    for c in 0..m {
        let lambda = eig.eigenvalues[c];
        let root = if lambda < floor { 0.0 } else { lambda.sqrt() };
        for (r, &node) in live.iter().enumerate() {
            factor[(node, c)] = eig.eigenvectors[(r, c)] * root;
        }
    }
    Ok(factor)
}

/// Gaussian sample with covariance `∏_i r_{H_i}(s_i, t_i)` on the tensor grid.
///
/// The law is realized exactly: each axis covariance is factored
/// independently and the factors are applied mode by mode to a standard
/// normal tensor. The normalization is `Var = 1` at the all-ones corner.
pub fn fbm_sheet(spec: &SheetSpec) -> Result<Field> {
    let grid = &spec.grid;
    let k = grid.dim();
    let factors = (0..k)
        .map(|i| covariance_factor(i, spec.hurst[i], grid.axis(i)))
        .collect::<Result<Vec<_>>>()?;

    let mut shape: Vec<usize> = factors.iter().map(|f| f.ncols()).collect();
    let len: usize = shape.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();

    for (i, factor) in factors.iter().enumerate() {
        let pre: usize = shape[..i].iter().product();
        let mid = shape[i];
        let post: usize = shape[i + 1..].iter().product();
        let rows = factor.nrows();
        let mut out = vec![0.0; pre * rows * post];
        for p in 0..pre {
            for a in 0..rows {
                for b in 0..mid {
                    let w = factor[(a, b)];
                    if w == 0.0 {
                        continue;
                    }
                    let src = p * mid * post + b * post;
                    let dst = p * rows * post + a * post;
                    for q in 0..post {
                        out[dst + q] += w * data[src + q];
                    }
                }
            }
        }
        data = out;
        shape[i] = rows;
    }
    Field::sampled_with_meta(
        grid.clone(),
        data,
        FieldMeta {
            hurst: Some(spec.hurst.clone()),
            seed: Some(spec.seed),
        },
    )
}

/// Formatting used for every float written to CSV: 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a sampled field as CSV: a `k,H_1..H_k,seed` header row (absent
/// entries left empty), then one `coord_1,..,coord_k,value` row per node.
pub fn write_field_csv<W: Write>(field: &SampledField, mut out: W) -> Result<()> {
    let k = field.grid.dim();
    let mut header = vec![k.to_string()];
    match &field.meta.hurst {
        Some(h) => header.extend(h.iter().map(|v| format_float(*v))),
        None => header.extend(std::iter::repeat_n(String::new(), k)),
    }
    header.push(field.meta.seed.map(|s| s.to_string()).unwrap_or_default());
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for n in 0..field.grid.num_nodes() {
        line.clear();
        for c in field.grid.node(n) {
            line.push_str(&format_float(c));
            line.push(',');
        }
        line.push_str(&format_float(field.values[n]));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_field_csv<R: BufRead>(input: R) -> Result<Field> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        reason: "empty input".into(),
    })?;
    let header = header?;
    let cols: Vec<&str> = header.split(',').collect();
    let k: usize = cols[0].trim().parse().map_err(|_| Error::Parse {
        line: 1,
        reason: format!("bad dimension {:?}", cols[0]),
    })?;
    if k == 0 || cols.len() != k + 2 {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected {} header columns, got {}", k + 2, cols.len()),
        });
    }
    let parse = |line: usize, s: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| Error::Parse {
            line,
            reason: format!("not a number: {s:?}"),
        })
    };
    let hurst = if cols[1..=k].iter().all(|c| c.trim().is_empty()) {
        None
    } else {
        Some(
            cols[1..=k]
                .iter()
                .map(|c| parse(1, c))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let seed = match cols[k + 1].trim() {
        "" => None,
        s => Some(s.parse::<u64>().map_err(|_| Error::Parse {
            line: 1,
            reason: format!("bad seed {s:?}"),
        })?),
    };

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != k + 1 {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("expected {} columns, got {}", k + 1, fields.len()),
            });
        }
        let coords = fields[..k]
            .iter()
            .map(|s| parse(i + 1, s))
            .collect::<Result<Vec<_>>>()?;
        rows.push((coords, parse(i + 1, fields[k])?));
    }

    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (c, _) in &rows {
        for (i, &v) in c.iter().enumerate() {
            axes[i].push(v);
        }
    }
    for a in &mut axes {
        a.sort_by(f64::total_cmp);
        a.dedup_by(|x, y| (*x - *y).abs() <= COORD_TOL);
    }
    let grid = GridPartition::new(axes)?;
    if rows.len() != grid.num_nodes() {
        return Err(Error::Parse {
            line: rows.len() + 1,
            reason: format!(
                "{} rows do not fill a {:?} tensor grid",
                rows.len(),
                grid.node_counts()
            ),
        });
    }
    let mut values = vec![f64::NAN; grid.num_nodes()];
    let mut seen = vec![false; grid.num_nodes()];
    for (c, v) in rows {
        let n = grid.node_index(&c).ok_or(Error::NodeMismatch { point: c.clone() })?;
        if seen[n] {
            return Err(Error::Parse {
                line: 0,
                reason: format!("duplicate node {c:?}"),
            });
        }
        seen[n] = true;
        values[n] = v;
    }
    Field::sampled_with_meta(grid, values, FieldMeta { hurst, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increment::box_increment;
    use approx::assert_abs_diff_eq;

    fn id() -> ScalarFn {
        Arc::new(|t| t)
    }

    #[test]
    fn product_of_identities() {
        let f = product_field(vec![id(), id()]);
        assert_eq!(f.eval(&[0.5, 0.5]).unwrap(), 0.25);
        assert_eq!(box_increment(&f, &HyperRect::unit(2)), 1.0);
    }

    #[test]
    fn product_increment_factorizes() {
        let f = product_field(vec![Arc::new(f64::sin), Arc::new(f64::exp)]);
        let r = HyperRect::from_coords(&[0.0, std::f64::consts::FRAC_PI_4], &[0.6, 1.0]).unwrap();
        let expect = (0.6f64.sin() - 0.0f64.sin()) * (1f64.exp() - std::f64::consts::FRAC_PI_4.exp());
        assert_abs_diff_eq!(box_increment(&f, &r), expect, epsilon = 1e-12);
    }

    #[test]
    fn weierstrass_zero_terms_is_cosine() {
        let a = HolderExponents::uniform(2, 0.6).unwrap();
        let f = weierstrass_field(&a, 0);
        let x = [0.13, 0.71];
        let expect = (std::f64::consts::TAU * x[0]).cos() * (std::f64::consts::TAU * x[1]).cos();
        assert_abs_diff_eq!(f.eval(&x).unwrap(), expect, epsilon = 1e-15);
    }

    #[test]
    fn weierstrass_value_at_origin_is_geometric_sum() {
        let a = HolderExponents::new(vec![0.5, 0.8]).unwrap();
        let terms = 12;
        let f = weierstrass_field(&a, terms);
        let expect: f64 = a
            .as_slice()
            .iter()
            .map(|&ai| {
                let r = 2f64.powf(-ai);
                (1.0 - r.powi(terms as i32 + 1)) / (1.0 - r)
            })
            .product();
        assert_abs_diff_eq!(f.eval(&[0.0, 0.0]).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn sampled_fields_refuse_off_node_points() {
        let g = GridPartition::uniform(&HyperRect::unit(2), &[2, 2]).unwrap();
        let f = sample_on_grid(&Field::constant(2, 1.0), &g).unwrap();
        let s = f.as_sampled().unwrap();
        assert!(s.values().iter().all(|&v| v == 1.0));
        assert_eq!(f.eval(&[0.5, 1.0]).unwrap(), 1.0);
        assert!(matches!(
            f.eval(&[0.25, 1.0]),
            Err(Error::NodeMismatch { .. })
        ));
        assert!(f.value(&[0.25, 1.0]).is_nan());
    }

    #[test]
    fn sampled_product_matches_closed_form() {
        let g = GridPartition::uniform(&HyperRect::unit(2), &[2, 2]).unwrap();
        let closed = Field::product_identity(2);
        let s = sample_on_grid(&closed, &g).unwrap();
        for n in 0..g.num_nodes() {
            let x = g.node(n);
            assert_eq!(s.eval(&x).unwrap(), x[0] * x[1]);
        }
        let vals = s.as_sampled().unwrap().values().to_vec();
        assert_eq!(vals, vec![0.0, 0.0, 0.0, 0.0, 0.25, 0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn brownian_sheet_covariance_is_min_product() {
        // r_{1/2}(s,t) = min(s,t) on each axis
        let c = fbm_covariance(0.5, 0.5, 1.0) * fbm_covariance(0.5, 0.5, 1.0);
        assert_abs_diff_eq!(c, 0.25, epsilon = 1e-15);
        let g = GridPartition::new(vec![vec![0.0, 0.5, 1.0]]).unwrap();
        let l = covariance_factor(0, 0.5, g.axis(0)).unwrap();
        let cov = &l * l.transpose();
        assert_abs_diff_eq!(cov[(1, 2)], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cov[(2, 2)], 1.0, epsilon = 1e-12);
        assert!(l.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sheet_spec_validation() {
        let g = GridPartition::uniform(&HyperRect::unit(2), &[4, 4]).unwrap();
        assert!(SheetSpec::new(vec![1.2, 0.5], g.clone(), 0).is_err());
        assert!(SheetSpec::new(vec![0.5], g.clone(), 0).is_err());
        assert!(SheetSpec::with_node_cap(vec![0.5, 0.5], g, 0, 4).is_err());
    }

    #[test]
    fn sheet_pinned_on_axes_and_deterministic() {
        let g = GridPartition::uniform(&HyperRect::unit(2), &[8, 8]).unwrap();
        let spec = SheetSpec::new(vec![0.7, 0.3], g.clone(), 42).unwrap();
        let a = fbm_sheet(&spec).unwrap();
        let b = fbm_sheet(&spec).unwrap();
        let (va, vb) = (a.as_sampled().unwrap().values(), b.as_sampled().unwrap().values());
        assert!(va.iter().zip(vb).all(|(x, y)| x.to_bits() == y.to_bits()));
        for n in 0..g.num_nodes() {
            let x = g.node(n);
            if x.contains(&0.0) {
                assert_eq!(va[n], 0.0);
            } else {
                assert!(va[n] != 0.0);
            }
        }
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let g = GridPartition::uniform(&HyperRect::unit(2), &[5, 3]).unwrap();
        let f = fbm_sheet(&SheetSpec::new(vec![0.6, 0.4], g, 9).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_field_csv(f.as_sampled().unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let header = format!("2,{},{},9\n", format_float(0.6), format_float(0.4));
        assert!(text.starts_with(&header));
        let back = read_field_csv(buf.as_slice()).unwrap();
        let (s, t) = (f.as_sampled().unwrap(), back.as_sampled().unwrap());
        assert_eq!(s.grid(), t.grid());
        assert_eq!(t.meta(), s.meta());
        assert!(s
            .values()
            .iter()
            .zip(t.values())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn csv_without_metadata() {
        let g = GridPartition::uniform(&HyperRect::unit(1), &[2]).unwrap();
        let f = sample_on_grid(&Field::from_fn(1, |x| x[0] * 3.0), &g).unwrap();
        let mut buf = Vec::new();
        write_field_csv(f.as_sampled().unwrap(), &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("1,,\n"));
        let back = read_field_csv(buf.as_slice()).unwrap();
        assert_eq!(back.as_sampled().unwrap().meta(), &FieldMeta::default());
    }

    #[test]
    fn csv_rejects_ragged_input() {
        let text = "1,,\n0.0,1.0\n0.5\n";
        assert!(matches!(
            read_field_csv(text.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }
}
