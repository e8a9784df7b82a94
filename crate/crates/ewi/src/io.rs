//! Output files: `errors.csv`, `report.txt`, and raw field snapshots.
//!
//! A snapshot is a 64-byte ASCII header `dim,n,L,space,time` padded with
//! spaces and terminated by `\n`, followed by `n^dim` little-endian pairs of
//! `f32` (real, imaginary) in the grid's flat order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ewi_core::analysis::{ErrorSample, OrderFit};
use ewi_core::potentials::PredictedOrder;
use ewi_core::{Complex64, Field, Space, SpectralGrid};

use crate::error::HarnessError;
use crate::sweep::ErrorReport;

pub const SNAPSHOT_HEADER_LEN: usize = 64;

/// Writes `errors.csv` and `report.txt` into `dir`, creating it if needed.
pub fn export_report(report: &ErrorReport, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let csv = dir.join("errors.csv");
    write_file(&csv, errors_csv(&report.samples).as_bytes())?;
    let txt = dir.join("report.txt");
    write_file(&txt, report_text(report).as_bytes())?;
    Ok(vec![csv, txt])
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

/// `tau,e_l2,e_h1` rows in decreasing-tau order with 17 significant digits (exact `f64` round trip).
pub fn errors_csv(samples: &[ErrorSample]) -> String {
    let mut rows: Vec<&ErrorSample> = samples.iter().collect();
    rows.sort_by(|a, b| b.tau.total_cmp(&a.tau));
    let mut out = String::from("tau,e_l2,e_h1\n");
    for s in rows {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", s.tau, s.e_l2, s.e_h1);
    }
    out
}

pub fn parse_errors_csv(text: &str, path: &Path) -> Result<Vec<ErrorSample>, HarnessError> {
    let bad = |message: String| HarnessError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("tau,e_l2,e_h1") {
        return Err(bad("missing `tau,e_l2,e_h1` header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let cols: Vec<f64> = l
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(format!("row {}: not a number", i + 1)))?;
            match cols[..] {
                [tau, l2, h1] => Ok(ErrorSample::new(tau, l2, h1)),
                _ => Err(bad(format!("row {}: expected 3 columns", i + 1))),
            }
        })
        .collect()
}

pub fn read_errors_csv(path: &Path) -> Result<Vec<ErrorSample>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_errors_csv(&text, path)
}

fn predicted(p: &PredictedOrder) -> String {
    format!("{:.4}{}", p.value, if p.strict_minus { "-" } else { "" })
}

fn fit_line(name: &str, fit: &Option<OrderFit>) -> String {
    match fit {
        Some(f) => format!(
            "{name}_fitted_order = {:.6} (residual {:.3e}, {} used, {} dropped as saturated)\n",
            f.fitted_order,
            f.residual,
            f.used.len(),
            f.dropped.len()
        ),
        None => format!("{name}_fitted_order = n/a\n"),
    }
}

/// Human-readable summary of a sweep.
pub fn report_text(r: &ErrorReport) -> String {
    let c = &r.config;
    let mut s = String::new();
    let _ = writeln!(s, "experiment = {}", c.name);
    let _ = writeln!(
        s,
        "dim = {}, L = {}, n = {}, h = {}, T = {}, beta = {}, sigma = {}",
        c.dim,
        c.half_width,
        c.points,
        c.spacing(),
        c.final_time,
        c.beta,
        c.sigma
    );
    let _ = writeln!(s, "potential = {:?}", c.potential);
    let _ = writeln!(
        s,
        "reference = {:?}, profile = {:?}",
        c.reference, c.profile
    );
    let _ = writeln!(s, "nominal_p = {:.4}", c.nominal_p);
    let _ = writeln!(
        s,
        "alpha = {:.4}{}",
        r.alpha.value,
        if r.alpha.endpoint_plus { "+" } else { "" }
    );
    s.push_str(&fit_line("l2", &r.l2_fit));
    let _ = writeln!(s, "l2_predicted_order = {}", predicted(&r.predicted_l2));
    s.push_str(&fit_line("h1", &r.h1_fit));
    let _ = writeln!(
        s,
        "h1_predicted_order = {}",
        r.predicted_h1.as_ref().map_or("n/a".into(), predicted)
    );
    for v in &r.verdicts {
        let _ = writeln!(
            s,
            "verdict {} = {:.6} in [{:.6}, {:.6}]: {}",
            v.name,
            v.value,
            v.lower,
            v.upper,
            if v.pass { "PASS" } else { "FAIL" }
        );
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(
        s,
        "wall_time_s = {:.3} (reference {:.3})",
        r.wall_time.as_secs_f64(),
        r.reference_time.as_secs_f64()
    );
    s
}

/// Serializes a field as a snapshot (values are rounded to `f32`).
pub fn encode_snapshot(field: &Field, time: f64) -> Result<Vec<u8>, HarnessError> {
    let g = field.grid();
    let space = match field.space() {
        Space::Physical => "physical",
        Space::Fourier => "fourier",
    };
    let header = format!(
        "{},{},{:?},{},{:?}",
        g.dim(),
        g.points_per_dim(),
        g.half_width(),
        space,
        time
    );
    if header.len() >= SNAPSHOT_HEADER_LEN {
        return Err(HarnessError::config(
            "snapshot header does not fit in 64 bytes",
        ));
    }
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 8 * field.len());
    out.extend_from_slice(header.as_bytes());
    out.resize(SNAPSHOT_HEADER_LEN - 1, b' ');
    out.push(b'\n');
    for v in field.values() {
        out.extend_from_slice(&(v.re as f32).to_le_bytes());
        out.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    Ok(out)
}

/// Parses a snapshot, returning the field and its time.
pub fn decode_snapshot(bytes: &[u8], path: &Path) -> Result<(Field, f64), HarnessError> {
    let bad = |message: &str| HarnessError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    };
    if bytes.len() < SNAPSHOT_HEADER_LEN {
        return Err(bad("shorter than the header"));
    }
    let header = std::str::from_utf8(&bytes[..SNAPSHOT_HEADER_LEN])
        .map_err(|_| bad("header is not text"))?;
    let parts: Vec<&str> = header.trim().split(',').collect();
    let [dim, n, l, space, time] = parts[..] else {
        return Err(bad("header needs dim,n,L,space,time"));
    };
    let dim: usize = dim.parse().map_err(|_| bad("bad dim"))?;
    let n: usize = n.parse().map_err(|_| bad("bad n"))?;
    let l: f64 = l.parse().map_err(|_| bad("bad L"))?;
    let time: f64 = time.parse().map_err(|_| bad("bad time"))?;
    let space = match space {
        "physical" => Space::Physical,
        "fourier" => Space::Fourier,
        _ => return Err(bad("bad space tag")),
    };
    let grid = SpectralGrid::new(dim, l, n)?;
    let body = &bytes[SNAPSHOT_HEADER_LEN..];
    if body.len() != 8 * grid.len() {
        return Err(bad("payload size does not match the header"));
    }
    let f = |b: &[u8]| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64;
    let values = body
        .chunks_exact(8)
        .map(|c| Complex64::new(f(&c[..4]), f(&c[4..])))
        .collect();
    Ok((Field::new(grid, values, space)?, time))
}

pub fn write_snapshot(path: &Path, field: &Field, time: f64) -> Result<(), HarnessError> {
    write_file(path, &encode_snapshot(field, time)?)
}

pub fn read_snapshot(path: &Path) -> Result<(Field, f64), HarnessError> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    decode_snapshot(&bytes, path)
}
