use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{SweepMetadata, SweepResult};
use crate::error::{Error, Result};

/// On-disk format of sweep outputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    /// `json` for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(format!(
                "format must be csv or json, got '{s}'"
            ))),
        }
    }
}

/// `<dir>/<stem>.meta.json` next to a heatmap CSV.
pub fn metadata_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    path.with_file_name(format!("{stem}.meta.json"))
}

#[derive(Serialize, Deserialize)]
struct HeatmapRow {
    delta1: f64,
    delta2: f64,
    f_max: f64,
    t_max: f64,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(path: &Path) -> impl Fn(serde_json::Error) -> Error + '_ {
    move |source| Error::Json {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    serde_json::to_writer_pretty(&mut w, value).map_err(json_err(path))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let r = BufReader::new(File::open(path).map_err(io_err(path))?);
    serde_json::from_reader(r).map_err(json_err(path))
}

impl SweepResult {
    /// Long-form CSV `delta1,delta2,f_max,t_max` (row-major in `delta1`)
    /// plus `<stem>.meta.json`, or a single JSON document.
    /// Returns every file written.
    pub fn write_results(&self, path: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        match format {
            OutputFormat::Json => {
                write_json(self, path)?;
                Ok(vec![path.to_path_buf()])
            }
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
                for (i, &d1) in self.delta1.iter().enumerate() {
                    for (j, &d2) in self.delta2.iter().enumerate() {
                        w.serialize(HeatmapRow {
                            delta1: d1,
                            delta2: d2,
                            f_max: self.f_max[i][j],
                            t_max: self.t_max[i][j],
                        })
                        .map_err(csv_err(path))?;
                    }
                }
                w.flush().map_err(io_err(path))?;
                let meta = metadata_path(path);
                write_json(&self.metadata, &meta)?;
                Ok(vec![path.to_path_buf(), meta])
            }
        }
    }

    /// Inverse of [`SweepResult::write_results`].
    pub fn read_results(path: &Path, format: OutputFormat) -> Result<Self> {
        match format {
            OutputFormat::Json => read_json(path),
            OutputFormat::Csv => {
                let metadata: SweepMetadata = read_json(&metadata_path(path))?;
                let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
                let rows: Vec<HeatmapRow> = r
                    .deserialize()
                    .collect::<std::result::Result<_, _>>()
                    .map_err(csv_err(path))?;
                let mut delta1: Vec<f64> = Vec::new();
                let mut delta2: Vec<f64> = Vec::new();
                for row in &rows {
                    if !delta1.contains(&row.delta1) {
                        delta1.push(row.delta1);
                    }
                    if !delta2.contains(&row.delta2) {
                        delta2.push(row.delta2);
                    }
                }
                let (n1, n2) = (delta1.len(), delta2.len());
                if n1 * n2 != rows.len() {
                    return Err(Error::invalid(format!(
                        "{}: {} rows do not form a {n1}x{n2} grid",
                        path.display(),
                        rows.len()
                    )));
                }
                let mut f_max = vec![vec![0.0; n2]; n1];
                let mut t_max = vec![vec![0.0; n2]; n1];
                for (k, row) in rows.iter().enumerate() {
                    f_max[k / n2][k % n2] = row.f_max;
                    t_max[k / n2][k % n2] = row.t_max;
                }
                Ok(SweepResult {
                    delta1,
                    delta2,
                    f_max,
                    t_max,
                    metadata,
                })
            }
        }
    }
}

/// Writes one record per row: CSV with a header from the field names, or a
/// JSON array.
pub fn write_table<T: Serialize>(rows: &[T], path: &Path, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(rows, path),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
            for row in rows {
                w.serialize(row).map_err(csv_err(path))?;
            }
            w.flush().map_err(io_err(path))
        }
    }
}

pub fn read_table<T: DeserializeOwned>(path: &Path, format: OutputFormat) -> Result<Vec<T>> {
    match format {
        OutputFormat::Json => read_json(path),
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
            r.deserialize()
                .collect::<std::result::Result<_, _>>()
                .map_err(csv_err(path))
        }
    }
}

/// Writes any serializable value as pretty JSON.
pub fn write_json_file<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    write_json(value, path)
}
