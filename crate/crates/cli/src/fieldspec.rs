//! Named builtin fields and CSV field files.
//!
//! `const1`, `const:c`, `prod_id`, `weierstrass:α`, `fbm:H:seed` (H may be a
//! comma list) or a path to a field CSV.

use std::fs::File;
use std::io::BufReader;

use hypersew::fields::{fbm_sheet, read_field_csv, weierstrass_field, SheetSpec};
use hypersew::solver::Coefficient;
use hypersew::{Field, GridPartition, HolderExponents};

use crate::config::FloatList;
use crate::error::CliError;

/// A parsed field source, not yet bound to a dimension or grid.
pub enum FieldSpec {
    Constant(f64),
    ProductIdentity,
    Weierstrass(Vec<f64>),
    Sheet { hurst: Vec<f64>, seed: u64 },
    File(String),
}

impl FieldSpec {
    pub fn parse(key: &str, s: &str) -> Result<Self, CliError> {
        let bad = |reason: String| CliError::config(key, reason);
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["const1"] => Ok(FieldSpec::Constant(1.0)),
            ["const", c] => c
                .parse()
                .map(FieldSpec::Constant)
                .map_err(|_| bad(format!("bad constant in {s:?}"))),
            ["prod_id"] => Ok(FieldSpec::ProductIdentity),
            ["weierstrass", a] => {
                let a: FloatList = a.parse().map_err(bad)?;
                Ok(FieldSpec::Weierstrass(a.0))
            }
            ["fbm", h, seed] => {
                let h: FloatList = h.parse().map_err(bad)?;
                let seed = seed.parse().map_err(|_| bad(format!("bad seed in {s:?}")))?;
                Ok(FieldSpec::Sheet { hurst: h.0, seed })
            }
            [name, ..] if ["const", "weierstrass", "fbm"].contains(name) => {
                Err(bad(format!("malformed builtin field {s:?}")))
            }
            _ => Ok(FieldSpec::File(s.to_string())),
        }
    }

    /// Dimension fixed by the source itself, for field files.
    pub fn file_field(&self) -> Result<Option<Field>, CliError> {
        match self {
            FieldSpec::File(path) => {
                let file = File::open(path)
                    .map_err(|e| CliError::Data(format!("cannot open field file {path}: {e}")))?;
                Ok(Some(read_field_csv(BufReader::new(file))?))
            }
            _ => Ok(None),
        }
    }

    /// Bind the source to `k` axes. Random sheets are sampled on `grid`.
    pub fn resolve(
        &self,
        key: &str,
        k: usize,
        grid: &GridPartition,
        terms: u32,
    ) -> Result<Field, CliError> {
        let exps = |v: &[f64]| -> Result<Vec<f64>, CliError> { FloatList(v.to_vec()).per_axis(key, k) };
        match self {
            FieldSpec::Constant(c) => Ok(Field::constant(k, *c)),
            FieldSpec::ProductIdentity => Ok(Field::product_identity(k)),
            FieldSpec::Weierstrass(a) => {
                let a = HolderExponents::for_fields(exps(a)?).map_err(|e| CliError::config(key, e))?;
                Ok(weierstrass_field(&a, terms))
            }
            FieldSpec::Sheet { hurst, seed } => {
                let h = exps(hurst)?;
                if let Some(bad) = h.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
                    return Err(CliError::config(key, format!("Hurst exponent {bad} outside (0,1)")));
                }
                Ok(fbm_sheet(&SheetSpec::new(h, grid.clone(), *seed)?)?)
            }
            FieldSpec::File(_) => {
                let f = self.file_field()?.expect("file spec");
                if f.dim() != k {
                    return Err(CliError::Data(format!(
                        "field file for `{key}` has dimension {}, expected {k}",
                        f.dim()
                    )));
                }
                Ok(f)
            }
        }
    }
}

/// `zero`, `one`, `id`, `sin`, `tanh`, `linear:c` or `const:c`.
pub fn coefficient(key: &str, s: &str) -> Result<Coefficient, CliError> {
    let number = |t: &str| -> Result<f64, CliError> {
        t.parse().map_err(|_| CliError::config(key, format!("bad number in {s:?}")))
    };
    match s.split(':').collect::<Vec<_>>().as_slice() {
        ["zero"] => Ok(Coefficient::zero()),
        ["one"] => Ok(Coefficient::one()),
        ["id"] => Ok(Coefficient::identity()),
        ["sin"] => Ok(Coefficient::sine()),
        ["tanh"] => Ok(Coefficient::tanh()),
        ["linear", c] => Ok(Coefficient::linear(number(c)?)),
        ["const", c] => Ok(Coefficient::constant(number(c)?)),
        _ => Err(CliError::config(
            key,
            format!("unknown coefficient {s:?}; expected zero, one, id, sin, tanh, linear:c or const:c"),
        )),
    }
}
