//! On-disk formats.
//!
//! The canonical format is a JSON market file with the fields of
//! [`MarketFile`]. A bare matrix may also be given as CSV, in which case the
//! margins (and optional type values) are read from a sidecar JSON file next
//! to it: `market.csv` pairs with `market.margins.json`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use surplus_id::{Margins, Matching, Surplus, TypeValues};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarFile {
    p: Vec<f64>,
    q: Vec<f64>,
    #[serde(default)]
    x_values: Option<Vec<f64>>,
    #[serde(default)]
    y_values: Option<Vec<f64>>,
}

/// A validated market.
#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    pub margins: Margins,
    pub mu: Option<Matching>,
    pub phi: Option<Surplus>,
    pub values: Option<TypeValues>,
}

/// How a bare CSV matrix is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    Matching,
    Surplus,
}

pub fn to_array(rows: &[Vec<f64>], field: &str) -> Result<Array2<f64>, CliError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(CliError::Invalid {
            field: field.to_string(),
            message: format!("row {i} has {} entries, expected {ncols}", rows[i].len()),
        });
    }
    Ok(Array2::from_shape_fn((nrows, ncols), |(i, j)| rows[i][j]))
}

pub fn to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

fn invalid(field: &str) -> impl Fn(surplus_id::Error) -> CliError + '_ {
    move |e| CliError::Invalid {
        field: field.to_string(),
        message: e.to_string(),
    }
}

impl MarketFile {
    /// Enforces every market invariant; `tol` is the margin tolerance for `mu`.
    pub fn validate(&self, tol: f64) -> Result<Market, CliError> {
        let margins = Margins::new(self.p.clone(), self.q.clone()).map_err(invalid("p/q"))?;
        let mu = match &self.mu {
            Some(rows) => {
                let a = to_array(rows, "mu")?;
                Some(Matching::with_tolerance(a, margins.clone(), tol).map_err(invalid("mu"))?)
            }
            None => None,
        };
        let phi = match &self.phi {
            Some(rows) => {
                let a = to_array(rows, "phi")?;
                if a.dim() != margins.shape() {
                    return Err(invalid("phi")(surplus_id::Error::ShapeMismatch {
                        expected: margins.shape(),
                        found: a.dim(),
                    }));
                }
                Some(Surplus::new(a).map_err(invalid("phi"))?)
            }
            None => None,
        };
        let values = match (&self.x_values, &self.y_values) {
            (Some(x), Some(y)) => {
                let v = TypeValues::new(x.clone(), y.clone()).map_err(invalid("x_values/y_values"))?;
                if (x.len(), y.len()) != margins.shape() {
                    return Err(invalid("x_values/y_values")(surplus_id::Error::ShapeMismatch {
                        expected: margins.shape(),
                        found: (x.len(), y.len()),
                    }));
                }
                Some(v)
            }
            (None, None) => None,
            _ => {
                return Err(CliError::Invalid {
                    field: "x_values/y_values".into(),
                    message: "x_values and y_values must be given together".into(),
                })
            }
        };
        Ok(Market {
            margins,
            mu,
            phi,
            values,
        })
    }

    pub fn from_matching(mu: &Matching) -> Self {
        Self {
            p: mu.margins().p().to_vec(),
            q: mu.margins().q().to_vec(),
            mu: Some(to_rows(mu.mu())),
            phi: None,
            x_values: None,
            y_values: None,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("margins.json")
}

pub fn read_market_file(path: &Path, role: MatrixRole) -> Result<MarketFile, CliError> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if !is_csv {
        return serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let row = record
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        rows.push(row);
    }
    let side = sidecar_path(path);
    let sidecar: SidecarFile = serde_json::from_str(&read(&side)?).map_err(|e| CliError::Parse {
        path: side.clone(),
        message: e.to_string(),
    })?;
    let (mu, phi) = match role {
        MatrixRole::Matching => (Some(rows), None),
        MatrixRole::Surplus => (None, Some(rows)),
    };
    Ok(MarketFile {
        p: sidecar.p,
        q: sidecar.q,
        mu,
        phi,
        x_values: sidecar.x_values,
        y_values: sidecar.y_values,
    })
}

pub fn load_market(path: &Path, role: MatrixRole, tol: f64) -> Result<Market, CliError> {
    read_market_file(path, role)?.validate(tol)
}

/// Reals with 17 significant digits; `-0` prints as `0` and non-finite values become `null`.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{:.16e}", v + 0.0)
    } else {
        "null".to_string()
    }
}

/// Pretty JSON whose floating-point numbers carry 17 significant digits.
struct PreciseFormatter {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_real(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut out,
        PreciseFormatter {
            pretty: PrettyFormatter::new(),
        },
    );
    value.serialize(&mut ser).expect("reports serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
