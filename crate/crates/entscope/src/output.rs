//! File formats and atomic output.

use std::io::Write;
use std::path::Path;

use entscope_core::fisher::FisherResult;
use entscope_core::modes::{ModeBasis, ModeError};
use entscope_core::statevec::SparseState;
use serde::Serialize;

use crate::error::AppError;

/// Writes `path` through a temporary file in the same directory and a rename,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<(), AppError>) -> Result<(), AppError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| AppError::Io(e.error))?;
    Ok(())
}

/// Writes to `path` atomically, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, fill: impl FnOnce(&mut dyn Write) -> Result<(), AppError>) -> Result<(), AppError> {
    match path {
        Some(p) => write_atomic(p, fill),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn csv_err(e: csv::Error) -> AppError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::Io(io),
        other => AppError::Numerical(format!("csv: {other:?}")),
    }
}

fn write_csv<T: Serialize>(out: &mut dyn Write, rows: impl IntoIterator<Item = T>) -> Result<(), AppError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Chart CSV: `theta_over_sigma,r,K,cfi,qfi,ratio`.
pub fn write_chart_csv(out: &mut dyn Write, rows: &[FisherResult]) -> Result<(), AppError> {
    if rows.is_empty() {
        writeln!(out, "theta_over_sigma,r,K,cfi,qfi,ratio")?;
        return Ok(());
    }
    write_csv(out, rows)
}

#[derive(Serialize)]
struct EstimateRow {
    trial: usize,
    theta_hat: f64,
}

pub fn write_estimates_csv(out: &mut dyn Write, estimates: &[f64]) -> Result<(), AppError> {
    write_csv(out, estimates.iter().enumerate().map(|(trial, &theta_hat)| EstimateRow { trial, theta_hat }))
}

#[derive(Serialize)]
struct OverlapRow {
    q: usize,
    x: f64,
    gamma: f64,
    eta: f64,
}

/// Overlap table CSV (`q,x,gamma,eta`), `x` outer and `q` inner.
pub fn write_overlap_csv(out: &mut dyn Write, basis: &ModeBasis, xs: &[f64]) -> Result<(), AppError> {
    let mut rows = Vec::with_capacity(xs.len() * basis.len());
    for &x in xs {
        let gamma = basis.gammas(x);
        let eta = match entscope_core::modes::eta_at(basis, x) {
            Ok(e) => e,
            Err(ModeError::ProjectionDegenerate { .. }) => vec![f64::NAN; basis.len()],
            Err(e) => return Err(AppError::numerical(e)),
        };
        for q in 0..basis.len() {
            rows.push(OverlapRow { q, x, gamma: gamma[q], eta: eta[q] });
        }
    }
    write_csv(out, rows)
}

#[derive(Serialize)]
struct StateEntry {
    bitstring: String,
    re: f64,
    im: f64,
}

/// Debug dump of a state: a JSON list of `{bitstring, re, im}`.
pub fn state_to_json(state: &SparseState) -> serde_json::Value {
    let entries: Vec<StateEntry> = state
        .iter()
        .map(|(b, a)| StateEntry {
            bitstring: b.render(state.num_qubits()),
            re: a.re,
            im: a.im,
        })
        .collect();
    serde_json::to_value(entries).expect("plain data serialises")
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), AppError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| AppError::Numerical(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
