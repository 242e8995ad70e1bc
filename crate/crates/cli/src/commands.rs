use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use hypersew::fields::{format_float, sample_on_grid, write_field_csv};
use hypersew::increment::{
    box_increment_between, delta_axis, delta_theta_decomposed, delta_theta_direct,
    delta_two_dim_symmetric, AxisSet, PairFunction,
};
use hypersew::sewing::{convergence_study_from, default_max_level, young_integral_with};
use hypersew::solver::{
    solve as solve_problem, stability_compare, stability_order, NormSampling, Problem, SolverOptions,
};
use hypersew::{Field, GridPartition, HolderExponents, HyperRect, YoungScheme};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::config::{merge_fields, ConfigFile, FloatList};
use crate::error::CliError;
use crate::fieldspec::{coefficient, FieldSpec};

const DEFAULT_TERMS: u32 = 16;

fn from_file<T: serde::de::DeserializeOwned + Default>(file: Option<&ConfigFile>) -> Result<T, CliError> {
    file.map_or_else(|| Ok(T::default()), |f| f.command_args())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// Write `text` to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn uniform_grid(key: &str, k: usize, n: usize) -> Result<GridPartition, CliError> {
    if n < 2 {
        return Err(CliError::config(key, format!("need at least 2 nodes per axis, got {n}")));
    }
    Ok(GridPartition::uniform(&HyperRect::unit(k), &vec![n - 1; k])?)
}

fn check_dim(k: usize) -> Result<usize, CliError> {
    if k == 0 {
        return Err(CliError::config("k", "dimension must be at least 1"));
    }
    Ok(k)
}

fn scheme(key: &str, s: &str) -> Result<YoungScheme, CliError> {
    match s {
        "corner-average" => Ok(YoungScheme::CornerAverage),
        "left-point" => Ok(YoungScheme::LeftPoint),
        _ => Err(CliError::config(key, format!("unknown scheme {s:?}; expected corner-average or left-point"))),
    }
}

/// Parsed field sources sharing one dimension and, for sampled sources, one
/// grid: the grid of the first field file, else a uniform grid with `n` nodes
/// per axis.
struct FieldSet {
    k: usize,
    grid: GridPartition,
    specs: Vec<(&'static str, FieldSpec)>,
    terms: u32,
}

impl FieldSet {
    fn new(
        specs: Vec<(&'static str, String)>,
        k: Option<usize>,
        n: usize,
        terms: u32,
    ) -> Result<Self, CliError> {
        let specs = specs
            .into_iter()
            .map(|(key, s)| FieldSpec::parse(key, &s).map(|f| (key, f)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut file_grid = None;
        for (_, spec) in &specs {
            if let Some(f) = spec.file_field()? {
                let g = f.as_sampled().expect("files hold sampled fields").grid().clone();
                file_grid.get_or_insert(g);
            }
        }
        let (k, grid) = match file_grid {
            Some(g) => {
                if let Some(k) = k.filter(|&k| k != g.dim()) {
                    return Err(CliError::config("k", format!("{k} disagrees with field files of dimension {}", g.dim())));
                }
                (g.dim(), g)
            }
            None => {
                let k = check_dim(k.unwrap_or(2))?;
                (k, uniform_grid("n", k, n)?)
            }
        };
        Ok(Self { k, grid, specs, terms })
    }

    fn field(&self, key: &str) -> Result<Field, CliError> {
        let (_, spec) = self.specs.iter().find(|(k, _)| *k == key).expect("known key");
        spec.resolve(key, self.k, &self.grid, self.terms)
    }
}

#[derive(Args, Deserialize, Default, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct GenFieldArgs {
    /// Generator: fbm, weierstrass, const or prod_id.
    #[arg(long)]
    pub kind: Option<String>,
    /// Number of parameters.
    #[arg(long)]
    pub k: Option<usize>,
    /// Hurst exponents for fbm, one per axis or a single shared value.
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub hurst: Option<FloatList>,
    /// Exponents for weierstrass.
    #[arg(long)]
    pub alpha: Option<FloatList>,
    /// Number of Weierstrass terms beyond the first.
    #[arg(long)]
    pub terms: Option<u32>,
    /// Value for const.
    #[arg(long)]
    pub value: Option<f64>,
    /// Nodes per axis, placed at j/(n-1).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn gen_field(mut a: GenFieldArgs, file: Option<&ConfigFile>) -> Result<(), CliError> {
    let f: GenFieldArgs = from_file(file)?;
    merge_fields!(a, f; kind, k, hurst, alpha, terms, value, n, seed, out);
    let k = check_dim(a.k.unwrap_or(2))?;
    let grid = uniform_grid("n", k, a.n.unwrap_or(64))?;
    let seed = a.seed.unwrap_or(0);
    let kind = a.kind.unwrap_or_else(|| "fbm".into());
    let spec = match kind.as_str() {
        "fbm" => {
            let h = a.hurst.ok_or_else(|| CliError::config("H", "required for fbm"))?.per_axis("H", k)?;
            if let Some(bad) = h.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
                return Err(CliError::config("H", format!("Hurst exponent {bad} outside (0,1)")));
            }
            FieldSpec::Sheet { hurst: h, seed }
        }
        "weierstrass" => FieldSpec::Weierstrass(
            a.alpha.ok_or_else(|| CliError::config("alpha", "required for weierstrass"))?.0,
        ),
        "const" => FieldSpec::Constant(a.value.unwrap_or(1.0)),
        "prod_id" => FieldSpec::ProductIdentity,
        other => {
            return Err(CliError::config(
                "kind",
                format!("unknown generator {other:?}; expected fbm, weierstrass, const or prod_id"),
            ))
        }
    };
    let key = if kind == "weierstrass" { "alpha" } else { "H" };
    let field = spec.resolve(key, k, &grid, a.terms.unwrap_or(DEFAULT_TERMS))?;
    let sampled = match field.as_sampled() {
        Some(_) => field,
        None => sample_on_grid(&field, &grid)?,
    };
    let out = a.out.unwrap_or_else(|| PathBuf::from("field.csv"));
    let mut w = create(&out)?;
    write_field_csv(sampled.as_sampled().expect("sampled"), &mut w)?;
    w.flush()?;
    println!("{}", out.display());
    Ok(())
}

#[derive(Args, Deserialize, Default, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateArgs {
    /// Integrand field.
    #[arg(long = "Y")]
    #[serde(rename = "Y")]
    pub y: Option<String>,
    /// Integrator field.
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    /// `unit`, or the 2k numbers lo_1,..,lo_k,hi_1,..,hi_k.
    #[arg(long)]
    pub rect: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-level")]
    pub max_level: Option<u32>,
    /// corner-average (default) or left-point.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Nodes per axis for sampled builtin fields.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub terms: Option<u32>,
    /// Also write the JSON result here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Deepest dyadic level, up to `cap`, at which every sampled field has nodes.
fn sampled_level_cap(fields: &[&Field], rect: &HyperRect, cap: u32) -> Result<u32, CliError> {
    let covered = |l: u32| fields.iter().all(|f| f.covers_dyadic_level(rect, l));
    let level = (0..=cap).take_while(|&l| covered(l)).last().unwrap_or(0);
    if level == 0 {
        return Err(CliError::Data(
            "sampled fields have no nodes on the first dyadic refinement of the rectangle".into(),
        ));
    }
    if level < cap {
        info!("max level limited to {level} by the sampled fields");
    }
    Ok(level)
}

fn parse_rect(s: &str, k: usize) -> Result<HyperRect, CliError> {
    if s == "unit" {
        return Ok(HyperRect::unit(k));
    }
    let v: FloatList = s.parse().map_err(|e| CliError::config("rect", e))?;
    if v.0.len() != 2 * k {
        return Err(CliError::config("rect", format!("expected 2k = {} numbers, got {}", 2 * k, v.0.len())));
    }
    HyperRect::from_coords(&v.0[..k], &v.0[k..]).map_err(|e| CliError::config("rect", e))
}

pub fn integrate(mut a: IntegrateArgs, file: Option<&ConfigFile>) -> Result<(), CliError> {
    let f: IntegrateArgs = from_file(file)?;
    merge_fields!(a, f; y, x, k, rect, tol, max_level, scheme, n, terms, out);
    let set = FieldSet::new(
        vec![
            ("Y", a.y.unwrap_or_else(|| "const1".into())),
            ("X", a.x.unwrap_or_else(|| "prod_id".into())),
        ],
        a.k,
        a.n.unwrap_or(65),
        a.terms.unwrap_or(DEFAULT_TERMS),
    )?;
    let (y, x) = (set.field("Y")?, set.field("X")?);
    let rect = parse_rect(a.rect.as_deref().unwrap_or("unit"), set.k)?;
    let tol = a.tol.unwrap_or(1e-6);
    let max_level = match a.max_level {
        Some(l) => l,
        None => sampled_level_cap(&[&y, &x], &rect, default_max_level(set.k))?,
    };
    let scheme = scheme("scheme", a.scheme.as_deref().unwrap_or("corner-average"))?;
    let result = young_integral_with(scheme, &y, &x, &rect, tol, max_level)?;
    let json = result.to_json() + "\n";
    print!("{json}");
    if let Some(out) = &a.out {
        emit(Some(out), &json)?;
    }
    if !result.converged {
        return Err(CliError::NonConvergence(format!(
            "no convergence to {tol:e} by level {}; last difference {:e}",
            result.final_level(),
            result.error_estimate
        )));
    }
    Ok(())
}

#[derive(Args, Deserialize, Default, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct SolveArgs {
    /// Coefficient: zero, one, id, sin, tanh, linear:c or const:c.
    #[arg(long)]
    pub f: Option<String>,
    /// Boundary field ξ.
    #[arg(long)]
    pub xi: Option<String>,
    /// Driving field.
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x: Option<String>,
    /// Multiplier applied to the driving field.
    #[arg(long = "x-scale")]
    pub x_scale: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Nodes per axis of the solution grid.
    #[arg(long)]
    pub n: Option<usize>,
    /// Initial tile size, one per axis or a single shared value.
    #[arg(long)]
    pub tile: Option<FloatList>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub terms: Option<u32>,
    /// Solution CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON sidecar; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

struct SolveSetup {
    problem: Problem,
    tile: Vec<f64>,
    options: SolverOptions,
}

/// Inputs shared by `solve` and `stability`.
struct ProblemInputs {
    f: Option<String>,
    xi: Option<String>,
    x: Option<String>,
    x_scale: Option<f64>,
    k: Option<usize>,
    n: Option<usize>,
    tile: Option<FloatList>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    terms: Option<u32>,
}

fn solve_setup(
    ProblemInputs {
        f,
        xi,
        x,
        x_scale,
        k,
        n,
        tile,
        tol,
        max_iter,
        terms,
    }: ProblemInputs,
    default_tol: f64,
) -> Result<(SolveSetup, FieldSet), CliError> {
    let set = FieldSet::new(
        vec![
            ("xi", xi.unwrap_or_else(|| "const1".into())),
            ("X", x.unwrap_or_else(|| "prod_id".into())),
        ],
        k,
        n.unwrap_or(33),
        terms.unwrap_or(DEFAULT_TERMS),
    )?;
    let coefficient = coefficient("f", f.as_deref().unwrap_or("id"))?;
    let driver = set.field("X")?.scale(x_scale.unwrap_or(1.0));
    let problem = Problem::new(coefficient, set.field("xi")?, driver, set.grid.clone())?;
    let tile = tile.unwrap_or(FloatList(vec![1.0])).per_axis("tile", set.k)?;
    let options = SolverOptions {
        tol: tol.unwrap_or(default_tol),
        max_iter: max_iter.unwrap_or(SolverOptions::default().max_iter),
        ..SolverOptions::default()
    };
    if !(options.tol > 0.0) {
        return Err(CliError::config("tol", "must be positive"));
    }
    Ok((SolveSetup { problem, tile, options }, set))
}

pub fn solve(mut a: SolveArgs, file: Option<&ConfigFile>) -> Result<(), CliError> {
    let fa: SolveArgs = from_file(file)?;
    merge_fields!(a, fa; f, xi, x, x_scale, k, n, tile, tol, max_iter, terms, out, sidecar);
    let inputs = ProblemInputs {
        f: a.f,
        xi: a.xi,
        x: a.x,
        x_scale: a.x_scale,
        k: a.k,
        n: a.n,
        tile: a.tile,
        tol: a.tol,
        max_iter: a.max_iter,
        terms: a.terms,
    };
    let (setup, _) = solve_setup(inputs, 1e-10)?;
    let sol = solve_problem(&setup.problem, &setup.tile, &setup.options)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("solution.csv"));
    let sidecar = a.sidecar.unwrap_or_else(|| out.with_extension("json"));
    let mut w = create(&out)?;
    write_field_csv(sol.y.as_sampled().expect("sampled"), &mut w)?;
    w.flush()?;
    let json = serde_json::to_string_pretty(&sol.sidecar()).expect("sidecar serializes") + "\n";
    emit(Some(&sidecar), &json)?;
    println!("{}", out.display());
    Ok(())
}

#[derive(Args, Deserialize, Default, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceArgs {
    #[arg(long = "Y")]
    #[serde(rename = "Y")]
    pub y: Option<String>,
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Coarsest dyadic level.
    #[arg(long)]
    pub first: Option<u32>,
    /// Number of levels, at least 3; the last one serves as reference.
    #[arg(long)]
    pub levels: Option<u32>,
    /// left-point (default) or corner-average.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub terms: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn convergence(mut a: ConvergenceArgs, file: Option<&ConfigFile>) -> Result<(), CliError> {
    let f: ConvergenceArgs = from_file(file)?;
    merge_fields!(a, f; y, x, k, first, levels, scheme, n, terms, out);
    let set = FieldSet::new(
        vec![
            ("Y", a.y.unwrap_or_else(|| "prod_id".into())),
            ("X", a.x.unwrap_or_else(|| "prod_id".into())),
        ],
        a.k,
        a.n.unwrap_or(65),
        a.terms.unwrap_or(DEFAULT_TERMS),
    )?;
    let scheme = scheme("scheme", a.scheme.as_deref().unwrap_or("left-point"))?;
    let (y, x) = (set.field("Y")?, set.field("X")?);
    let first = a.first.unwrap_or(0);
    let levels = a.levels.unwrap_or(7);
    if levels < 3 {
        return Err(CliError::config("levels", "need at least 3 levels"));
    }
    // sampled inputs must carry every node of the finest level
    let rect = HyperRect::unit(set.k);
    for (key, field) in [("Y", &y), ("X", &x)] {
        if !field.covers_dyadic_level(&rect, first + levels - 1) {
            return Err(CliError::Data(format!(
                "field `{key}` has no nodes at dyadic level {}",
                first + levels - 1
            )));
        }
    }
    let study = convergence_study_from(&scheme.germ(y, x), &rect, first, levels)?;
    info!("fitted order {}", study.order);
    let mut buf = Vec::new();
    study.write_csv(&mut buf)?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("utf-8 csv"))
}

#[derive(Args, Deserialize, Default, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaCheckArgs {
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of random cases.
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Residuals above this fail the check.
const DELTA_THRESHOLD: f64 = 1e-9;

fn random_poly<R: Rng>(rng: &mut R, k: usize) -> Field {
    let d = 4usize;
    let n = d.pow(k as u32);
    let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) / n as f64).collect();
    Field::from_fn(k, move |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(mut m, c)| {
                x.iter().fold(*c, |acc, xi| {
                    let p = (m % d) as i32;
                    m /= d;
                    acc * xi.powi(p)
                })
            })
            .sum()
    })
}

fn random_pair_function<R: Rng>(rng: &mut R, k: usize) -> PairFunction {
    let modes: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..3)
        .map(|_| {
            (
                (0..k).map(|_| rng.random_range(-3.0..3.0)).collect(),
                (0..k).map(|_| rng.random_range(-3.0..3.0)).collect(),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    PairFunction::new(k, move |x, y| {
        modes
            .iter()
            .map(|(a, b, c)| {
                let t: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>()
                    + b.iter().zip(y).map(|(b, y)| b * y).sum::<f64>();
                c * t.sin()
            })
            .sum()
    })
}

pub fn delta_check(mut a: DeltaCheckArgs, file: Option<&ConfigFile>) -> Result<(), CliError> {
    let f: DeltaCheckArgs = from_file(file)?;
    merge_fields!(a, f; k, cases, seed, out);
    let k = check_dim(a.k.unwrap_or(2))?;
    if k > 6 {
        return Err(CliError::config("k", "at most 6 axes"));
    }
    let cases = a.cases.unwrap_or(100);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(0));
    let (mut on_increment, mut routes, mut symmetric, mut chen) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let mut x = Vec::with_capacity(k);
        let mut y = Vec::with_capacity(k);
        for _ in 0..k {
            let lo: f64 = rng.random_range(0.0..0.9);
            x.push(lo);
            y.push(rng.random_range(lo + 0.05..1.0));
        }
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| rng.random_range(*a..*b)).collect();
        let mask = rng.random_range(1..1usize << k);
        let theta = AxisSet::new((0..k).filter(|i| mask >> i & 1 == 1).collect(), k)?;

        let xf = random_poly(&mut rng, k);
        let inc = PairFunction::increment_of(xf.clone());
        on_increment = on_increment.max(delta_theta_direct(&theta, &z, &inc, &x, &y)?.abs());

        let g = random_pair_function(&mut rng, k);
        let d1 = delta_theta_direct(&theta, &z, &g, &x, &y)?;
        let d2 = delta_theta_decomposed(&theta, &z, &g, &x, &y)?;
        routes = routes.max((d1 - d2).abs());
        if k == 2 {
            let full = delta_theta_direct(&AxisSet::full(2), &z, &g, &x, &y)?;
            symmetric = symmetric.max((full - delta_two_dim_symmetric(&z, &g, &x, &y)?).abs());
        }

        let yf = random_poly(&mut rng, k);
        let germ = hypersew::increment::young_pair(yf.clone(), xf.clone());
        let j = rng.random_range(0..k);
        let mut vx = x.clone();
        vx[j] = z[j];
        let expect = -(yf.value(&vx) - yf.value(&x)) * box_increment_between(&xf, &vx, &y);
        chen = chen.max((delta_axis(j, &z, &germ, &x, &y)? - expect).abs());
    }
    let mut rows = vec![
        ("delta_on_increment", on_increment),
        ("direct_vs_decomposed", routes),
        ("chen", chen),
    ];
    if k == 2 {
        rows.push(("two_dim_form", symmetric));
    }
    let mut csv = String::from("identity,cases,max_residual\n");
    for (name, r) in &rows {
        csv.push_str(&format!("{name},{cases},{}\n", format_float(*r)));
    }
    emit(a.out.as_deref(), &csv)?;
    if let Some((name, r)) = rows.iter().find(|(_, r)| !(*r <= DELTA_THRESHOLD)) {
        return Err(CliError::Check(format!("identity {name} has residual {r:e} above {DELTA_THRESHOLD:e}")));
    }
    Ok(())
}

#[derive(Args, Deserialize, Default, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityArgs {
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub xi: Option<String>,
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x: Option<String>,
    #[arg(long = "x-scale")]
    pub x_scale: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tile: Option<FloatList>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub terms: Option<u32>,
    /// Exponent at which the differences are measured.
    #[arg(long)]
    pub beta: Option<FloatList>,
    /// Perturbation sizes.
    #[arg(long)]
    pub eps: Option<FloatList>,
    /// Which input to perturb: xi or X.
    #[arg(long)]
    pub perturb: Option<String>,
    /// Random pairs per norm estimate.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn stability(mut a: StabilityArgs, file: Option<&ConfigFile>) -> Result<(), CliError> {
    let fa: StabilityArgs = from_file(file)?;
    merge_fields!(a, fa; f, xi, x, x_scale, k, n, tile, tol, max_iter, terms, beta, eps, perturb, budget, seed, out);
    let f = a.f.unwrap_or_else(|| "sin".into());
    let inputs = ProblemInputs {
        f: Some(f.clone()),
        xi: a.xi,
        x: Some(a.x.unwrap_or_else(|| "weierstrass:0.75".into())),
        x_scale: Some(a.x_scale.unwrap_or(0.5)),
        k: a.k,
        n: a.n,
        tile: a.tile,
        tol: a.tol,
        max_iter: a.max_iter,
        terms: a.terms,
    };
    let (base, set) = solve_setup(inputs, 1e-12)?;
    let k = set.k;
    let beta = HolderExponents::for_fields(a.beta.unwrap_or(FloatList(vec![0.6])).per_axis("beta", k)?)
        .map_err(|e| CliError::config("beta", e))?;
    let eps = a.eps.unwrap_or(FloatList(vec![1e-1, 1e-2, 1e-3])).0;
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(CliError::config("eps", "perturbations must be positive"));
    }
    let perturb_xi = match a.perturb.as_deref().unwrap_or("xi") {
        "xi" => true,
        "X" => false,
        other => return Err(CliError::config("perturb", format!("expected xi or X, got {other:?}"))),
    };
    let sampling = NormSampling {
        pair_budget: a.budget.unwrap_or(NormSampling::default().pair_budget),
        seed: a.seed.unwrap_or(0),
    };
    if sampling.pair_budget == 0 {
        return Err(CliError::config("budget", "must be at least 1"));
    }
    // smooth perturbation direction
    let bump = Field::from_fn(k, |p| p.iter().map(|v| v.cos()).sum::<f64>() + p.iter().product::<f64>());
    let base_sol = solve_problem(&base.problem, &base.tile, &base.options)?;
    let mut reports = Vec::with_capacity(eps.len());
    for &e in &eps {
        let p = &base.problem;
        let (xi2, x2) = if perturb_xi {
            (p.xi().linear_combination(1.0, &bump, e)?, p.driver().clone())
        } else {
            (p.xi().clone(), p.driver().linear_combination(1.0, &bump, e)?)
        };
        let coefficient = coefficient("f", &f)?;
        let q = Problem::new(coefficient, xi2, x2, p.grid().clone())?;
        let sol = solve_problem(&q, &base.tile, &base.options)?;
        reports.push(stability_compare(p, &q, &beta, &base_sol, &sol, sampling)?);
    }
    let order = stability_order(&eps, &reports);
    let mut csv = String::from("eps,lhs,xi_at_origin,xi_norm,driver_box_norm,ratio,fitted_order\n");
    for (e, r) in eps.iter().zip(&reports) {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_float(*e),
            format_float(r.lhs),
            format_float(r.xi_at_origin),
            format_float(r.xi_norm),
            format_float(r.driver_box_norm),
            format_float(r.ratio),
            format_float(order)
        ));
    }
    emit(a.out.as_deref(), &csv)
}
