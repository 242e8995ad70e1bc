mod common;

use common::{nested_difference, random_ordered_pair, Poly};
use hypersew::fields::weierstrass_field;
use hypersew::grid::{dyadic_partition, GridPartition, HyperRect};
use hypersew::increment::{young_pair, young_pair_averaged, PairFunction};
use hypersew::sewing::{riemann_sum, sew, sewing_local_ratio, IntegrandBounds};
use hypersew::{Field, HolderExponents};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_partition<R: Rng>(rng: &mut R, x: &[f64], y: &[f64]) -> GridPartition {
    let axes = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let mut pts: Vec<f64> = (0..rng.random_range(0..10)).map(|_| rng.random_range(a..b)).collect();
            pts.push(a);
            pts.push(b);
            pts.sort_by(f64::total_cmp);
            pts.dedup_by(|p, q| (*p - *q).abs() < 1e-9);
            pts
        })
        .collect();
    GridPartition::new(axes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn increment_sums_do_not_depend_on_the_partition(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Poly::random(&mut rng, k, 3);
        let germ = PairFunction::increment_of(p.field());
        let (x, y) = random_ordered_pair(&mut rng, k);
        let a = riemann_sum(&germ, &random_partition(&mut rng, &x, &y));
        let b = riemann_sum(&germ, &random_partition(&mut rng, &x, &y));
        let exact = nested_difference(&|q| p.eval(q), &x, &y);
        let scale = exact.abs().max(1.0);
        prop_assert!((a - b).abs() <= 1e-12 * scale);
        prop_assert!((a - exact).abs() <= 1e-12 * scale);
    }

    #[test]
    fn riemann_sums_are_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0, level in 0u32..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p1, p2, p3) = (Poly::random(&mut rng, 2, 2), Poly::random(&mut rng, 2, 2), Poly::random(&mut rng, 2, 2));
        let x1 = young_pair(p1.field(), p2.field());
        let x2 = young_pair(p3.field(), p1.field());
        let part = dyadic_partition(&HyperRect::unit(2), &[level, level]).unwrap();
        let combined = riemann_sum(&x1.linear_combination(a, &x2, b), &part);
        let separate = a * riemann_sum(&x1, &part) + b * riemann_sum(&x2, &part);
        prop_assert!((combined - separate).abs() <= 1e-10);
    }
}

#[test]
fn sewing_is_linear_on_a_shared_level_schedule() {
    let y1 = Field::from_fn(2, |p| (p[0] + 2.0 * p[1]).sin());
    let y2 = Field::from_fn(2, |p| p[0] * p[0] - p[1]);
    let x = Field::from_fn(2, |p| (1.0 + p[0]).ln() * p[1].exp());
    let g1 = young_pair_averaged(y1, x.clone());
    let g2 = young_pair_averaged(y2, x);
    let (a, b) = (2.5, -0.75);
    let rect = HyperRect::unit(2);
    let s1 = sew(&g1, &rect, 1e-5, 10).unwrap();
    let s2 = sew(&g2, &rect, 1e-5, 10).unwrap();
    let s = sew(&g1.linear_combination(a, &g2, b), &rect, 1e-5, 10).unwrap();
    assert!(s1.converged && s2.converged && s.converged);
    if s1.final_level() == s2.final_level() && s.final_level() == s1.final_level() {
        assert!((s.value - (a * s1.value + b * s2.value)).abs() <= 1e-10);
    } else {
        // compare on the common schedule instead
        let l = s.final_level();
        let at = |r: &hypersew::SewResult| r.levels.iter().find(|v| v.level == l).map(|v| v.value);
        let part = dyadic_partition(&rect, &[l, l]).unwrap();
        let v1 = at(&s1).unwrap_or_else(|| riemann_sum(&g1, &part));
        let v2 = at(&s2).unwrap_or_else(|| riemann_sum(&g2, &part));
        assert!((s.value - (a * v1 + b * v2)).abs() <= 1e-10);
    }
}

#[test]
fn dyadic_and_triadic_refinements_share_the_limit() {
    // Smooth case: both families converge to the same value.
    let y = Field::from_fn(2, |p| (3.0 * p[0]).cos() + p[1]);
    let x = Field::from_fn(2, |p| (p[0] * p[1]).sin() + p[0] * p[0] * p[1]);
    let germ = young_pair_averaged(y, x);
    let unit = HyperRect::unit(2);
    let tol = 1e-5;
    let dyadic = sew(&germ, &unit, tol, 10).unwrap();
    assert!(dyadic.converged);
    let mut prev = f64::NAN;
    let mut triadic = f64::NAN;
    for m in 1..8 {
        let n = 3usize.pow(m);
        let v = riemann_sum(&germ, &GridPartition::uniform(&unit, &[n, n]).unwrap());
        triadic = v;
        if (v - prev).abs() < tol {
            break;
        }
        prev = v;
    }
    assert!((dyadic.value - triadic).abs() <= 5.0 * tol, "{} vs {triadic}", dyadic.value);

    // Rough case: the gap at comparable mesh shrinks like ε^{inf β - 1}.
    let alpha = HolderExponents::uniform(2, 0.75).unwrap();
    let w = weierstrass_field(&alpha, 12);
    let rough = young_pair(w.clone(), w);
    let pairs = [(2u32, 1u32), (3, 2), (5, 3), (6, 4)];
    let mut constants = Vec::new();
    for (l, m) in pairs {
        let d = riemann_sum(&rough, &dyadic_partition(&unit, &[l, l]).unwrap());
        let n = 3usize.pow(m);
        let t = riemann_sum(&rough, &GridPartition::uniform(&unit, &[n, n]).unwrap());
        let eps = (0.5f64).powi(l as i32).max(1.0 / n as f64);
        constants.push((d - t).abs() / eps.powf(0.5));
    }
    let first = constants[0].max(constants[1]);
    for c in &constants[2..] {
        assert!(*c <= 3.0 * first, "{constants:?}");
    }
}

#[test]
fn local_sewing_error_has_bounded_ratio() {
    let a = HolderExponents::uniform(2, 0.75).unwrap();
    let w = weierstrass_field(&a, 12);
    let germ = young_pair(w.clone(), w);
    let bounds = IntegrandBounds::new(HolderExponents::uniform(2, 1.5).unwrap(), None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut by_scale = Vec::new();
    for scale in [0.5, 0.05, 0.005] {
        let mut worst = 0.0f64;
        for _ in 0..40 {
            let lo: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..1.0 - scale)).collect();
            let hi: Vec<f64> = lo.iter().map(|v| v + scale * rng.random_range(0.5..1.0)).collect();
            let rect = HyperRect::from_coords(&lo, &hi).unwrap();
            let r = sew(&germ, &rect, 1e-12, 6).unwrap();
            worst = worst.max(sewing_local_ratio(&r, &germ, &rect, &a, &bounds));
        }
        assert!(worst.is_finite());
        by_scale.push(worst);
    }
    assert!(by_scale[1] <= 10.0 * by_scale[0] && by_scale[2] <= 10.0 * by_scale[0], "{by_scale:?}");
}
