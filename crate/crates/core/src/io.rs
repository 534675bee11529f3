//! On-disk formats.
//!
//! Binary matrices start with a 20-byte header: a 4-byte magic (`CMX1` for
//! complex, `RMX1` for real), then rows and cols as little-endian `u64`. The
//! payload is row-major little-endian `f64`, real then imaginary for complex
//! entries. Models are JSON documents; sweep tables are CSV.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::error::{Error, Result};
use crate::model::{CMatrix, CVector, DmdModel, FitReport};

pub const COMPLEX_MAGIC: &[u8; 4] = b"CMX1";
pub const REAL_MAGIC: &[u8; 4] = b"RMX1";
pub const HEADER_LEN: usize = 20;
pub const MODEL_FORMAT_VERSION: u64 = 1;

fn write_header(w: &mut impl Write, magic: &[u8; 4], rows: usize, cols: usize) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    Ok(())
}

/// Parses a header and checks the payload length; returns `(rows, cols)`.
fn parse_header(bytes: &[u8], magic: &[u8; 4], entry_size: usize) -> Result<(usize, usize)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("file is {} bytes, shorter than the header", bytes.len())));
    }
    if &bytes[..4] != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&bytes[..4]),
            std::str::from_utf8(magic).unwrap_or_default()
        )));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().expect("8-byte slice"));
    let (rows, cols) = (word(4), word(12));
    let expected = usize::try_from(rows)
        .ok()
        .zip(usize::try_from(cols).ok())
        .and_then(|(r, c)| r.checked_mul(c)?.checked_mul(entry_size).map(|len| (r, c, len)));
    let Some((rows, cols, len)) = expected else {
        return Err(Error::Format(format!("dimensions {rows}x{cols} overflow")));
    };
    let payload = bytes.len() - HEADER_LEN;
    if payload != len {
        return Err(Error::Format(format!(
            "{rows}x{cols} matrix needs {len} payload bytes, found {payload}"
        )));
    }
    Ok((rows, cols))
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    Ok(bytes)
}

fn f64_at(bytes: &[u8], k: usize) -> f64 {
    f64::from_le_bytes(bytes[k..k + 8].try_into().expect("8-byte slice"))
}

pub fn write_matrix(path: impl AsRef<Path>, m: &CMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, COMPLEX_MAGIC, m.nrows(), m.ncols())?;
    for i in 0..m.nrows() {
        for z in m.row(i).iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<CMatrix> {
    let bytes = read_all(path.as_ref())?;
    let (rows, cols) = parse_header(&bytes, COMPLEX_MAGIC, 16)?;
    let p = &bytes[HEADER_LEN..];
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let k = 16 * (i * cols + j);
        Complex64::new(f64_at(p, k), f64_at(p, k + 8))
    }))
}

pub fn write_real_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, REAL_MAGIC, m.nrows(), m.ncols())?;
    for i in 0..m.nrows() {
        for x in m.row(i).iter() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_real_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let bytes = read_all(path.as_ref())?;
    let (rows, cols) = parse_header(&bytes, REAL_MAGIC, 8)?;
    let p = &bytes[HEADER_LEN..];
    Ok(DMatrix::from_fn(rows, cols, |i, j| f64_at(p, 8 * (i * cols + j))))
}

/// Time grids are `RMX1` files with a single column.
pub fn write_times(path: impl AsRef<Path>, times: &DVector<f64>) -> Result<()> {
    write_real_matrix(path, &DMatrix::from_column_slice(times.len(), 1, times.as_slice()))
}

pub fn read_times(path: impl AsRef<Path>) -> Result<DVector<f64>> {
    let m = read_real_matrix(path)?;
    if m.ncols() != 1 {
        return Err(Error::Format(format!("time grid must have one column, found {}", m.ncols())));
    }
    Ok(m.column(0).into_owned())
}

/// Parses `"1.5"`, `"a+bi"`, `"a-bi"`, `"bi"` or `"-i"`.
pub fn parse_complex(cell: &str) -> Option<Complex64> {
    let s = cell.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not part of an exponent or leading
    let split = body
        .char_indices()
        .rev()
        .find(|&(k, c)| (c == '+' || c == '-') && k > 0 && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
        .map(|(k, _)| k);
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

/// Reads a headerless rectangular CSV of real or complex cells.
pub fn read_csv_matrix(path: impl AsRef<Path>) -> Result<CMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                parse_complex(cell).ok_or_else(|| {
                    Error::Format(format!("row {}, column {}: cannot parse {cell:?}", i + 1, j + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Format(format!(
                    "ragged rows: row {} has {} cells, row 1 has {}",
                    i + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    Ok(CMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        }
    } else {
        Error::Format(e.to_string())
    }
}

fn number(x: f64) -> Result<Number> {
    if !x.is_finite() {
        return Err(Error::Format(format!("cannot serialize non-finite value {x}")));
    }
    Number::from_str(&format!("{x:.16e}")).map_err(|e| Error::Format(e.to_string()))
}

fn float(n: &Number, what: &str) -> Result<f64> {
    n.as_str()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("{what}: {n} is not a number")))
}

fn pair(z: Complex64) -> Result<[Number; 2]> {
    Ok([number(z.re)?, number(z.im)?])
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportDoc {
    outer_iterations: usize,
    avg_inner_iterations: Number,
    final_objective: Number,
    converged: bool,
    objective_history: Vec<Number>,
    mask_epochs: Vec<usize>,
    inner_cap_hits: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format_version: u64,
    rank: usize,
    n_features: usize,
    omega: Vec<[Number; 2]>,
    b: Vec<Number>,
    phi: Vec<Vec<[Number; 2]>>,
    global_mask: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<ReportDoc>,
}

/// Writes `model` (and the fit report, if any) as JSON with every float
/// printed to 17 significant digits.
pub fn write_model(path: impl AsRef<Path>, model: &DmdModel, report: Option<&FitReport>) -> Result<()> {
    let r = model.rank();
    if r == 0 {
        return Err(Error::InvalidModel("rank must be at least 1".into()));
    }
    let global_mask = match report {
        Some(rep) if !rep.global_mask.is_empty() => {
            if rep.global_mask.len() != r {
                return Err(Error::InvalidModel(format!(
                    "global mask has {} entries for rank {r}",
                    rep.global_mask.len()
                )));
            }
            rep.global_mask.clone()
        }
        _ => vec![false; r],
    };
    let modes = model.modes();
    let doc = ModelDoc {
        format_version: MODEL_FORMAT_VERSION,
        rank: r,
        n_features: model.n_features(),
        omega: model.omega().iter().map(|z| pair(*z)).collect::<Result<_>>()?,
        b: model.amplitudes().iter().map(|b| number(*b)).collect::<Result<_>>()?,
        phi: (0..modes.nrows())
            .map(|i| modes.row(i).iter().map(|z| pair(*z)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?,
        global_mask,
        report: report
            .map(|rep| -> Result<ReportDoc> {
                Ok(ReportDoc {
                    outer_iterations: rep.outer_iterations,
                    avg_inner_iterations: number(rep.avg_inner_iterations)?,
                    final_objective: number(rep.final_objective)?,
                    converged: rep.converged,
                    objective_history: rep.objective_history.iter().map(|f| number(*f)).collect::<Result<_>>()?,
                    mask_epochs: rep.mask_epochs.clone(),
                    inner_cap_hits: rep.inner_cap_hits,
                })
            })
            .transpose()?,
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads a model document. The report carries the stored global mask; it is
/// `None` only for documents written without one.
pub fn read_model(path: impl AsRef<Path>) -> Result<(DmdModel, Option<FitReport>)> {
    let file = BufReader::new(File::open(path)?);
    let doc: ModelDoc = serde_json::from_reader(file).map_err(|e| Error::Format(format!("malformed model: {e}")))?;
    if doc.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let r = doc.rank;
    if doc.omega.len() != r || doc.b.len() != r || doc.global_mask.len() != r {
        return Err(Error::Format(format!(
            "rank {r} but {} eigenvalues, {} amplitudes, {} mask entries",
            doc.omega.len(),
            doc.b.len(),
            doc.global_mask.len()
        )));
    }
    if doc.phi.len() != doc.n_features || doc.phi.iter().any(|row| row.len() != r) {
        return Err(Error::Format(format!("phi must be {}x{r}", doc.n_features)));
    }
    let cplx = |p: &[Number; 2], what| -> Result<Complex64> { Ok(Complex64::new(float(&p[0], what)?, float(&p[1], what)?)) };
    let omega = doc.omega.iter().map(|p| cplx(p, "omega")).collect::<Result<Vec<_>>>()?;
    let b = doc.b.iter().map(|n| float(n, "b")).collect::<Result<Vec<_>>>()?;
    let mut phi = CMatrix::zeros(doc.n_features, r);
    for (i, row) in doc.phi.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            phi[(i, j)] = cplx(p, "phi")?;
        }
    }
    let model = DmdModel::from_parts(CVector::from_vec(omega), phi, DVector::from_vec(b))?;
    let report = match doc.report {
        Some(rep) => Some(FitReport {
            outer_iterations: rep.outer_iterations,
            avg_inner_iterations: float(&rep.avg_inner_iterations, "avg_inner_iterations")?,
            final_objective: float(&rep.final_objective, "final_objective")?,
            converged: rep.converged,
            global_mask: doc.global_mask,
            objective_history: rep
                .objective_history
                .iter()
                .map(|n| float(n, "objective_history"))
                .collect::<Result<_>>()?,
            mask_epochs: rep.mask_epochs,
            inner_cap_hits: rep.inner_cap_hits,
        }),
        None => None,
    };
    Ok((model, report))
}

/// One point of a regularization sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub rel_error: f64,
    pub nonzero_fraction: f64,
    pub n_global: usize,
}

pub fn write_sweep_table(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("sweep table needs at least one row".into()));
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["lambda", "rel_error", "nonzero_fraction", "n_global"]).map_err(csv_error)?;
    for row in rows {
        w.write_record([
            format!("{:.16e}", row.lambda),
            format!("{:.16e}", row.rel_error),
            format!("{:.16e}", row.nonzero_fraction),
            row.n_global.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_table(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.iter().collect::<Vec<_>>() != ["lambda", "rel_error", "nonzero_fraction", "n_global"] {
        return Err(Error::Format(format!("unexpected sweep header {header:?}")));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(csv_error)?;
            let bad = |j: usize| Error::Format(format!("sweep row {}, column {}", i + 1, j + 1));
            let f = |j: usize| rec.get(j).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(j));
            Ok(SweepRow {
                lambda: f(0)?,
                rel_error: f(1)?,
                nonzero_fraction: f(2)?,
                n_global: rec.get(3).and_then(|s| s.parse().ok()).ok_or_else(|| bad(3))?,
            })
        })
        .collect()
}
