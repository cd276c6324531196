//! File formats: periodic fields as JSON (sample or coefficient form), shooting
//! reports, and CSV traces.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sobogeo_core::{CircleDiffeo, PeriodicField, ShootingReport};

use crate::error::{Result, RunError};

/// Coefficient arrays, either flat (k-major, `d` values per mode) or one row per mode.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Coeffs {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl Coeffs {
    fn flatten(self, d: usize) -> std::result::Result<Vec<f64>, String> {
        match self {
            Coeffs::Flat(v) => Ok(v),
            Coeffs::Nested(rows) => {
                if let Some(r) = rows.iter().find(|r| r.len() != d) {
                    return Err(format!("coefficient row of length {} in a field with d = {d}", r.len()));
                }
                Ok(rows.concat())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum FieldRepr {
    Samples {
        d: usize,
        n_samples: usize,
        samples: Vec<Vec<f64>>,
    },
    Coefficients {
        d: usize,
        #[serde(rename = "K")]
        k: usize,
        coeffs_re: Coeffs,
        coeffs_im: Coeffs,
    },
}

#[derive(Serialize)]
struct SampleForm<'a> {
    d: usize,
    n_samples: usize,
    samples: Vec<&'a [f64]>,
}

/// Decodes a field from its JSON value.
pub fn field_from_value(v: Value) -> std::result::Result<PeriodicField, String> {
    let repr: FieldRepr =
        serde_json::from_value(v).map_err(|_| "not a field: expected {d, n_samples, samples} or {d, K, coeffs_re, coeffs_im}".to_string())?;
    match repr {
        FieldRepr::Samples { d, n_samples, samples } => {
            if d == 0 {
                return Err("d must be positive".into());
            }
            if samples.len() != n_samples {
                return Err(format!("n_samples is {n_samples} but {} samples are listed", samples.len()));
            }
            if let Some(s) = samples.iter().find(|s| s.len() != d) {
                return Err(format!("sample of length {} in a field with d = {d}", s.len()));
            }
            if n_samples < 4 || n_samples % 2 == 1 {
                return Err(format!("n_samples must be even and at least 4, got {n_samples}"));
            }
            PeriodicField::analyze(&samples.concat(), d).map_err(|e| e.to_string())
        }
        FieldRepr::Coefficients { d, k, coeffs_re, coeffs_im } => {
            let (re, im) = (coeffs_re.flatten(d)?, coeffs_im.flatten(d)?);
            let len = (k + 1) * d;
            if re.len() != len || im.len() != len {
                return Err(format!("expected {len} coefficients per part for d = {d}, K = {k}"));
            }
            let coeffs = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
            PeriodicField::from_coeffs(d, k, coeffs).map_err(|e| e.to_string())
        }
    }
}

/// Sample form on the field's natural grid.
pub fn field_to_value(f: &PeriodicField) -> Value {
    field_to_value_on(f, f.grid_size())
}

pub fn field_to_value_on(f: &PeriodicField, n: usize) -> Value {
    let values = f.samples_on(n);
    let form = SampleForm { d: f.dim(), n_samples: n, samples: values.chunks(f.dim()).collect() };
    serde_json::to_value(form).expect("field serializes")
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| RunError::io(path, format!("malformed JSON: {e}")))
}

pub fn read_field(path: &Path) -> Result<PeriodicField> {
    field_from_value(read_json(path)?).map_err(|e| RunError::io(path, e))
}

/// Diffeo file: `{"displacement": <field with d = 1>}`. An invalid diffeomorphism
/// is a user error, a malformed file an I/O error.
pub fn read_diffeo(path: &Path) -> Result<CircleDiffeo> {
    let mut v = read_json(path)?;
    let disp = v
        .get_mut("displacement")
        .map(Value::take)
        .ok_or_else(|| RunError::io(path, "missing key \"displacement\""))?;
    let field = field_from_value(disp).map_err(|e| RunError::io(path, e))?;
    if field.dim() != 1 {
        return Err(RunError::config(format!("{}: displacement must have d = 1", path.display())));
    }
    CircleDiffeo::new(field).map_err(RunError::input)
}

pub fn diffeo_to_value(phi: &CircleDiffeo) -> Value {
    serde_json::json!({ "displacement": field_to_value(phi.displacement()) })
}

pub fn report_to_value(r: &ShootingReport) -> Value {
    serde_json::json!({
        "u": field_to_value(&r.u),
        "residual_norm": r.residual_norm,
        "iterations": r.iterations,
        "sigma_min": r.sigma_min,
        "converged": r.converged,
    })
}

/// The solved velocity `u` of a shooting report file.
pub fn read_report_velocity(path: &Path) -> Result<PeriodicField> {
    let mut v = read_json(path)?;
    let u = v.get_mut("u").map(Value::take).ok_or_else(|| RunError::io(path, "missing key \"u\""))?;
    field_from_value(u).map_err(|e| RunError::io(path, e))
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| RunError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| RunError::io(path, e))
}

/// Writes a CSV with the given header; rows are numeric.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| RunError::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(header).map_err(|e| RunError::io(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(|e| RunError::io(path, e))?;
    }
    w.into_inner().map_err(|e| RunError::io(path, e.error().to_string()))?.flush().map_err(|e| RunError::io(path, e))
}

/// Long-format plot data: one (series, x, y) row per point.
pub fn write_plots(path: &Path, series: &[(String, Vec<(f64, f64)>)]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| RunError::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(["series", "x", "y"]).map_err(|e| RunError::io(path, e))?;
    for (name, points) in series {
        for (x, y) in points {
            w.write_record([name.clone(), fmt_f64(*x), fmt_f64(*y)]).map_err(|e| RunError::io(path, e))?;
        }
    }
    w.into_inner().map_err(|e| RunError::io(path, e.error().to_string()))?.flush().map_err(|e| RunError::io(path, e))
}

// shortest representation that round-trips
fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number, with non-finite values as the strings "inf", "-inf", "nan".
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else {
        Value::from(fmt_f64(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn both_forms_decode_to_the_same_field() {
        let f = PeriodicField::from_fn(8, 2, |t, out| {
            out[0] = t.cos();
            out[1] = 0.5 + (2.0 * t).sin();
        })
        .unwrap();
        let from_samples = field_from_value(field_to_value(&f)).unwrap();
        assert!(from_samples.sub(&f).unwrap().sup_norm() < 1e-15);

        let flat = json!({"d": 2, "K": 3,
            "coeffs_re": f.coeffs().iter().map(|z| z.re).collect::<Vec<_>>(),
            "coeffs_im": f.coeffs().iter().map(|z| z.im).collect::<Vec<_>>()});
        assert_eq!(field_from_value(flat).unwrap(), f);
        let nested = json!({"d": 2, "K": 3,
            "coeffs_re": f.coeffs().chunks(2).map(|c| vec![c[0].re, c[1].re]).collect::<Vec<_>>(),
            "coeffs_im": f.coeffs().chunks(2).map(|c| vec![c[0].im, c[1].im]).collect::<Vec<_>>()});
        assert_eq!(field_from_value(nested).unwrap(), f);
    }

    #[test]
    fn malformed_fields_are_rejected() {
        for bad in [
            json!({"d": 1, "n_samples": 3, "samples": [[0.0], [1.0]]}),
            json!({"d": 2, "n_samples": 4, "samples": [[0.0], [1.0], [0.0], [1.0]]}),
            json!({"d": 1, "K": 2, "coeffs_re": [1.0], "coeffs_im": [0.0]}),
            json!({"samples": []}),
        ] {
            assert!(field_from_value(bad.clone()).is_err(), "{bad}");
        }
    }

    #[test]
    fn non_finite_numbers_become_strings() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(2.5), json!(2.5));
        assert_eq!(fmt_f64(0.1), "0.1");
    }
}
