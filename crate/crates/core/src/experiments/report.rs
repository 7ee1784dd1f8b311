//! Result tables on disk: the long-form CSV, `summary.json` and one plot
//! table per quantity.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{CheckCounts, ExperimentConfig, FitOutcome, Quantity, Row, ScalingReport, SCHEMA_VERSION};
use crate::error::{Error, Result};

const HEADER: &str = "d,p,n,seed,quantity,value,certification,detail";

pub(crate) fn write_header<W: Write>(w: &mut W) -> Result<()> {
    writeln!(w, "# schema={SCHEMA_VERSION}")?;
    writeln!(w, "{HEADER}")?;
    Ok(())
}

/// Writes rows with the schema comment and header.
pub fn write_rows(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_rows_to(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

pub fn write_rows_to<W: Write>(mut w: W, rows: &[Row]) -> Result<()> {
    write_header(&mut w)?;
    let mut cw = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for r in rows {
        cw.serialize(r)?;
    }
    cw.flush()?;
    Ok(())
}

/// Reads a results table or journal. A trailing partial line (from an
/// interrupted write) is dropped.
pub fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut text = String::new();
    let mut reader = BufReader::new(File::open(path)?);
    let mut line = String::new();
    let mut saw_header = false;
    let mut schema: Option<u32> = None;
    while reader.read_line(&mut line)? > 0 {
        if !line.ends_with('\n') {
            break;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("schema=") {
                schema = Some(v.parse().map_err(|_| Error::Format(format!("bad schema line {line:?}")))?);
            }
        } else if !saw_header {
            if line.trim_end() != HEADER {
                return Err(Error::Format(format!("unexpected header {:?}", line.trim_end())));
            }
            saw_header = true;
        } else {
            text.push_str(&line);
        }
        line.clear();
    }
    if schema.is_some_and(|s| s != SCHEMA_VERSION) {
        return Err(Error::Format(format!("schema {} is not {SCHEMA_VERSION}", schema.unwrap())));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for r in rdr.deserialize() {
        rows.push(r?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantitySummary {
    pub rows: usize,
    pub errors: usize,
    /// Fits keyed by row name (`phi-upper`, `phi-upper-exact`, ...).
    pub fits: BTreeMap<String, FitOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub rows: usize,
    pub instances: usize,
    pub error_rows: usize,
    pub quantities: BTreeMap<String, QuantitySummary>,
    pub checks: BTreeMap<String, CheckCounts>,
}

impl Summary {
    pub fn of(report: &ScalingReport) -> Self {
        let instances: BTreeSet<(u32, u64)> = report.rows.iter().map(|r| (r.n, r.seed)).collect();
        let mut quantities = BTreeMap::new();
        for &q in &report.config.quantities {
            let of_q: Vec<&Row> = report
                .rows
                .iter()
                .filter(|r| Quantity::of_row(&r.quantity) == Some(q))
                .collect();
            let fits = report
                .fits
                .iter()
                .filter(|(name, _)| Quantity::of_row(name) == Some(q))
                .map(|(name, f)| (name.clone(), f.clone()))
                .collect();
            quantities.insert(
                q.name().to_string(),
                QuantitySummary {
                    rows: of_q.len(),
                    errors: of_q
                        .iter()
                        .filter(|r| r.certification == super::Certification::Error)
                        .count(),
                    fits,
                },
            );
        }
        Summary {
            schema_version: SCHEMA_VERSION,
            config: report.config.clone(),
            rows: report.rows.len(),
            instances: instances.len(),
            error_rows: report.error_rows(),
            quantities,
            checks: report.checks.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmittedFiles {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Writes `results.csv`, `summary.json` and `plot_<quantity>.csv` into
/// `dir`.
pub fn emit_report(report: &ScalingReport, dir: &Path) -> Result<EmittedFiles> {
    std::fs::create_dir_all(dir)?;
    let results = dir.join("results.csv");
    write_rows(&results, &report.rows)?;

    let summary = dir.join("summary.json");
    let mut w = BufWriter::new(File::create(&summary)?);
    serde_json::to_writer_pretty(&mut w, &Summary::of(report))?;
    writeln!(w)?;
    w.flush()?;

    let mut plots = Vec::new();
    for &q in &report.config.quantities {
        let path = dir.join(format!("plot_{}.csv", q.name().replace('-', "_")));
        let mut cw = csv::Writer::from_path(&path)?;
        cw.write_record(["x", "y", "series"])?;
        for r in &report.rows {
            if Quantity::of_row(&r.quantity) != Some(q) || r.certification == super::Certification::Error {
                continue;
            }
            cw.write_record([r.n.to_string(), r.value.to_string(), r.quantity.clone()])?;
        }
        cw.flush()?;
        plots.push(path);
    }
    Ok(EmittedFiles {
        results,
        summary,
        plots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Certification;

    fn row(n: u32, q: &str, v: f64, c: Certification) -> Row {
        Row {
            d: 2,
            p: 0.7,
            n,
            seed: 3,
            quantity: q.into(),
            value: v,
            certification: c,
            detail: "V=12;E=14".into(),
        }
    }

    #[test]
    fn rows_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rows = vec![
            row(4, "tau1", 12.5, Certification::Exact),
            row(4, "phi-upper", 0.1, Certification::UpperBound),
            row(6, "tau2", f64::NAN, Certification::Error),
        ];
        write_rows(&path, &rows).unwrap();
        let back = read_rows(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[..2], rows[..2]);
        assert!(back[2].value.is_nan());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# schema=1\nd,p,n,seed,quantity,value,certification,detail\n"));
        assert!(text.contains("2,0.7,4,3,phi-upper,0.1,upper-bound,V=12;E=14"));
    }

    #[test]
    fn partial_trailing_line_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.csv");
        write_rows(&path, &[row(4, "tau1", 1.0, Certification::Exact)]).unwrap();
        let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
        write!(f, "2,0.7,6,3,ta").unwrap();
        assert_eq!(read_rows(&path).unwrap().len(), 1);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_rows(&path), Err(Error::Format(_))));
    }
}
