//! Generalized increments and the Chen (δ) operator on two-point functions.
//!
//! Axes are 0-based throughout. For a two-point function `f(x, y)`:
//!
//! * `ψ_i(z) f (x,y) = f(x, V_{i,z} y) + f(V_{i,z} x, y)`,
//! * `δ^{(i)}_z f = (I - ψ_i(z)) f`,
//! * `δ^θ_z f = ∏_{i∈θ} (I - ψ_i(z)) f`.
//!
//! `δ^θ` is evaluated two independent ways: by expanding the operator
//! product over subsets of θ, and through the decomposition into
//! single-axis δ's composed with ψ's. The two must agree.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::Field;
use crate::grid::{Coords, HyperRect, COORD_TOL};

type PairFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// A real function of two points of `[0,1]^k`; no ordering of `x` and `y` is
/// assumed.
#[derive(Clone)]
pub struct PairFunction {
    dim: usize,
    f: PairFn,
}

impl fmt::Debug for PairFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PairFunction(k={})", self.dim)
    }
}

impl PairFunction {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.f)(x, y)
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &PairFunction, b: f64) -> PairFunction {
        let (f, g) = (self.f.clone(), other.f.clone());
        PairFunction::new(self.dim, move |x, y| a * f(x, y) + b * g(x, y))
    }

    /// The pair function `(x, y) ↦ □_{x,y} X`.
    pub fn increment_of(field: Field) -> PairFunction {
        PairFunction::new(field.dim(), move |x, y| box_increment_between(&field, x, y))
    }
}

/// Ordered, duplicate-free, non-empty set of 0-based axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisSet(Vec<usize>);

impl AxisSet {
    pub fn new(axes: Vec<usize>, k: usize) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidAxisSet("empty".into()));
        }
        if axes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidAxisSet(format!(
                "{axes:?} is not strictly increasing"
            )));
        }
        if let Some(&a) = axes.iter().find(|&&a| a >= k) {
            return Err(Error::InvalidAxisSet(format!("axis {a} out of range for k={k}")));
        }
        Ok(Self(axes))
    }

    /// `{0, .., k-1}`.
    pub fn full(k: usize) -> Self {
        Self((0..k).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `□_{x,y} f = ∏_i (I - V_{i,x}) f(y)`, the signed sum over the corners.
///
/// `x` and `y` need not be ordered; swapping them on one axis flips the sign.
pub fn box_increment_between(f: &Field, x: &[f64], y: &[f64]) -> f64 {
    let k = x.len();
    let mut corner: Coords = y.iter().copied().collect();
    let mut total = 0.0;
    for mask in 0..1usize << k {
        for i in 0..k {
            corner[i] = if mask >> i & 1 == 1 { x[i] } else { y[i] };
        }
        let v = f.value(&corner);
        if mask.count_ones() % 2 == 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    total
}

/// Generalized increment of `f` over `rect`. Vanishes on degenerate boxes.
pub fn box_increment(f: &Field, rect: &HyperRect) -> f64 {
    if rect.is_degenerate() {
        return 0.0;
    }
    box_increment_between(f, rect.lower().as_slice(), rect.upper().as_slice())
}

fn check_axis(i: usize, k: usize) -> Result<()> {
    if i >= k {
        return Err(Error::InvalidAxisSet(format!("axis {i} out of range for k={k}")));
    }
    Ok(())
}

fn check_between(i: usize, z: &[f64], x: &[f64], y: &[f64]) -> Result<()> {
    let (lo, hi) = (x[i].min(y[i]), x[i].max(y[i]));
    if z[i] < lo - COORD_TOL || z[i] > hi + COORD_TOL {
        return Err(Error::OutOfRange {
            axis: i,
            value: z[i],
            lower: lo,
            upper: hi,
        });
    }
    Ok(())
}

fn check_dims(f: &PairFunction, z: &[f64], x: &[f64], y: &[f64]) -> Result<()> {
    for len in [z.len(), x.len(), y.len()] {
        if len != f.dim {
            return Err(Error::DimensionMismatch {
                expected: f.dim,
                found: len,
            });
        }
    }
    Ok(())
}

/// The operator `ψ_i(z)` applied to `f`.
pub fn psi(i: usize, z: &[f64], f: &PairFunction) -> Result<PairFunction> {
    check_axis(i, f.dim)?;
    let zi = z[i];
    let g = f.f.clone();
    Ok(PairFunction::new(f.dim, move |x, y| {
        let mut y2: Coords = y.iter().copied().collect();
        y2[i] = zi;
        let mut x2: Coords = x.iter().copied().collect();
        x2[i] = zi;
        g(x, &y2) + g(&x2, y)
    }))
}

#[inline]
fn delta_axis_raw(i: usize, zi: f64, f: &dyn Fn(&[f64], &[f64]) -> f64, x: &[f64], y: &[f64]) -> f64 {
    let mut y2: Coords = y.iter().copied().collect();
    y2[i] = zi;
    let mut x2: Coords = x.iter().copied().collect();
    x2[i] = zi;
    f(x, y) - f(x, &y2) - f(&x2, y)
}

/// `δ^{(i)}_z f(x,y) = f(x,y) - f(x, V_{i,z} y) - f(V_{i,z} x, y)`.
pub fn delta_axis(i: usize, z: &[f64], f: &PairFunction, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(f, z, x, y)?;
    check_axis(i, f.dim)?;
    check_between(i, z, x, y)?;
    Ok(delta_axis_raw(i, z[i], &*f.f, x, y))
}

/// `(∏_{i∈axes} ψ_i(z)) g` evaluated at `(x, y)`, by recursion over `axes`.
fn psi_product(
    axes: &[usize],
    z: &[f64],
    g: &dyn Fn(&[f64], &[f64]) -> f64,
    x: &mut Coords,
    y: &mut Coords,
) -> f64 {
    let Some((&i, rest)) = axes.split_first() else {
        return g(x, y);
    };
    let saved_y = y[i];
    y[i] = z[i];
    let left = psi_product(rest, z, g, x, y);
    y[i] = saved_y;
    let saved_x = x[i];
    x[i] = z[i];
    let right = psi_product(rest, z, g, x, y);
    x[i] = saved_x;
    left + right
}

fn subsets(theta: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (1usize..1 << theta.len()).map(move |mask| {
        theta
            .iter()
            .enumerate()
            .filter(|(p, _)| mask >> p & 1 == 1)
            .map(|(_, &a)| a)
            .collect()
    })
}

/// `δ^θ_z f(x,y)` by expanding `∏_{i∈θ}(I - ψ_i)` into
/// `Σ_{S⊆θ} (-1)^{|S|} (∏_{i∈S} ψ_i) f`.
pub fn delta_theta_direct(
    theta: &AxisSet,
    z: &[f64],
    f: &PairFunction,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_dims(f, z, x, y)?;
    for &i in theta.as_slice() {
        check_axis(i, f.dim)?;
        check_between(i, z, x, y)?;
    }
    let mut xs: Coords = x.iter().copied().collect();
    let mut ys: Coords = y.iter().copied().collect();
    let mut total = f.eval(x, y);
    for s in subsets(theta.as_slice()) {
        let term = psi_product(&s, z, &*f.f, &mut xs, &mut ys);
        if s.len() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// `δ^θ_z f(x,y)` through the single-axis decomposition
/// `Σ_{θ̃⊆θ} (-1)^{|θ̃|-1} Σ_m (∏_{j after position m in θ̃} ψ_j) δ^{(θ̃_m)}`.
pub fn delta_theta_decomposed(
    theta: &AxisSet,
    z: &[f64],
    f: &PairFunction,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_dims(f, z, x, y)?;
    for &i in theta.as_slice() {
        check_axis(i, f.dim)?;
        check_between(i, z, x, y)?;
    }
    let mut xs: Coords = x.iter().copied().collect();
    let mut ys: Coords = y.iter().copied().collect();
    let mut total = 0.0;
    for s in subsets(theta.as_slice()) {
        let sign = if s.len() % 2 == 1 { 1.0 } else { -1.0 };
        for (m, &i) in s.iter().enumerate() {
            let g = |u: &[f64], v: &[f64]| delta_axis_raw(i, z[i], &*f.f, u, v);
            total += sign * psi_product(&s[m + 1..], z, &g, &mut xs, &mut ys);
        }
    }
    Ok(total)
}

/// Two-dimensional form `½(δ^{(1)} + δ^{(2)} - δ^{(1)}ψ_2 - δ^{(2)}ψ_1)`.
pub fn delta_two_dim_symmetric(z: &[f64], f: &PairFunction, x: &[f64], y: &[f64]) -> Result<f64> {
    if f.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: f.dim,
        });
    }
    check_dims(f, z, x, y)?;
    check_between(0, z, x, y)?;
    check_between(1, z, x, y)?;
    let d0 = |u: &[f64], v: &[f64]| delta_axis_raw(0, z[0], &*f.f, u, v);
    let d1 = |u: &[f64], v: &[f64]| delta_axis_raw(1, z[1], &*f.f, u, v);
    let mut xs: Coords = x.iter().copied().collect();
    let mut ys: Coords = y.iter().copied().collect();
    let a = d0(x, y);
    let b = d1(x, y);
    let c = psi_product(&[1], z, &d0, &mut xs, &mut ys);
    let d = psi_product(&[0], z, &d1, &mut xs, &mut ys);
    Ok(0.5 * (a + b - c - d))
}

/// The Young germ `Ξ(x,y) = Y(x) □_{x,y} X`.
pub fn young_pair(y_field: Field, x_field: Field) -> PairFunction {
    let k = x_field.dim();
    PairFunction::new(k, move |x, y| {
        y_field.value(x) * box_increment_between(&x_field, x, y)
    })
}

/// Corner-averaged Young germ `Ξ(x,y) = (2^{-k} Σ_corners Y) □_{x,y} X`.
///
/// Differs from [`young_pair`] per cell by at most `‖Y‖_{α,+} p_α q_β`, whose
/// Riemann sums vanish in the limit when `α_i + β_i > 1`; both germs sew to
/// the same integral, this one with second-order accuracy on smooth inputs.
pub fn young_pair_averaged(y_field: Field, x_field: Field) -> PairFunction {
    let k = x_field.dim();
    PairFunction::new(k, move |x, y| {
        corner_average(&y_field, x, y) * box_increment_between(&x_field, x, y)
    })
}

pub(crate) fn corner_average(f: &Field, x: &[f64], y: &[f64]) -> f64 {
    let k = x.len();
    let mut corner: Coords = y.iter().copied().collect();
    let mut total = 0.0;
    for mask in 0..1usize << k {
        for i in 0..k {
            corner[i] = if mask >> i & 1 == 1 { x[i] } else { y[i] };
        }
        total += f.value(&corner);
    }
    total / (1usize << k) as f64
}
