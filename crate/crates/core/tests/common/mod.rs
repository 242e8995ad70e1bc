#![allow(dead_code)]

use hypersew::Field;
use rand::Rng;

/// Random polynomial field with per-axis degree at most `degree`, scaled so
/// that its sup norm over the unit cube is at most 1.
#[derive(Debug, Clone)]
pub struct Poly {
    pub k: usize,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn random<R: Rng>(rng: &mut R, k: usize, degree: usize) -> Self {
        let n = (degree + 1).pow(k as u32);
        let coeffs = (0..n).map(|_| rng.random_range(-1.0..1.0) / n as f64).collect();
        Self { k, degree, coeffs }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.degree + 1;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(mut m, &c)| {
                let mut term = c;
                for xi in x.iter().take(self.k) {
                    term *= xi.powi((m % d) as i32);
                    m /= d;
                }
                term
            })
            .sum()
    }

    pub fn field(&self) -> Field {
        let p = self.clone();
        Field::from_fn(self.k, move |x| p.eval(x))
    }
}

/// Rectangular increment by nested differences, one axis at a time.
pub fn nested_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], y: &[f64]) -> f64 {
    fn go(f: &dyn Fn(&[f64]) -> f64, x: &[f64], y: &[f64], axis: usize, p: &mut Vec<f64>) -> f64 {
        if axis == x.len() {
            return f(p);
        }
        p[axis] = y[axis];
        let hi = go(f, x, y, axis + 1, p);
        p[axis] = x[axis];
        let lo = go(f, x, y, axis + 1, p);
        hi - lo
    }
    let mut p = y.to_vec();
    go(f, x, y, 0, &mut p)
}

pub fn random_point<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(0.0..1.0)).collect()
}

/// Two random points with `x < y` on every axis.
pub fn random_ordered_pair<R: Rng>(rng: &mut R, k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(k);
    let mut y = Vec::with_capacity(k);
    for _ in 0..k {
        let a: f64 = rng.random_range(0.0..1.0);
        let b: f64 = rng.random_range(0.0..1.0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        x.push(lo);
        y.push(hi.max(lo + 1e-3).min(1.0));
    }
    (x, y)
}

/// A point strictly between `x` and `y` on every axis.
pub fn random_between<R: Rng>(rng: &mut R, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| a + (b - a) * rng.random_range(0.0..1.0))
        .collect()
}

/// Smooth non-additive two-point function built from random trigonometric
/// modes.
pub fn random_two_point<R: Rng>(rng: &mut R, k: usize) -> hypersew::PairFunction {
    let modes: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..4)
        .map(|_| {
            let a = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            (a, b, rng.random_range(-1.0..1.0))
        })
        .collect();
    hypersew::PairFunction::new(k, move |x, y| {
        modes
            .iter()
            .map(|(a, b, c)| {
                let phase: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>()
                    + b.iter().zip(y).map(|(b, y)| b * y).sum::<f64>();
                c * phase.sin() + 0.25 * c * phase.cos() * phase
            })
            .sum()
    })
}
