//! Output frames, the L1 error norms, cell-average restriction and CSV files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 14] =
    ["x", "rho", "vx", "vy", "vz", "By", "Bz", "p", "T", "T_r", "J", "R", "|<Q>|", "|<nQ>|"];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameRow {
    pub x: f64,
    pub rho: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub by: f64,
    pub bz: f64,
    pub p: f64,
    pub t: f64,
    /// `(4 pi J)^(1/4)`
    pub t_r: f64,
    pub j: f64,
    pub r: f64,
    pub q_mean: f64,
    pub q_flux: f64,
}

impl FrameRow {
    pub fn values(&self) -> [f64; 14] {
        [
            self.x,
            self.rho,
            self.vx,
            self.vy,
            self.vz,
            self.by,
            self.bz,
            self.p,
            self.t,
            self.t_r,
            self.j,
            self.r,
            self.q_mean,
            self.q_flux,
        ]
    }

    pub fn from_values(v: [f64; 14]) -> Self {
        FrameRow {
            x: v[0],
            rho: v[1],
            vx: v[2],
            vy: v[3],
            vz: v[4],
            by: v[5],
            bz: v[6],
            p: v[7],
            t: v[8],
            t_r: v[9],
            j: v[10],
            r: v[11],
            q_mean: v[12],
            q_flux: v[13],
        }
    }
}

/// One time slice, rows ordered by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFrame {
    pub time: f64,
    pub rows: Vec<FrameRow>,
}

impl OutputFrame {
    pub fn column(&self, f: impl Fn(&FrameRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Cell width from the row spacing.
    pub fn dx(&self) -> Result<f64> {
        match self.rows.as_slice() {
            [a, b, ..] => Ok(b.x - a.x),
            _ => Err(Error::invalid("a frame needs at least two rows to define its spacing")),
        }
    }
}

/// Per-field L1 errors for `rho, p, vx, vy, By, T`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub rho: f64,
    pub p: f64,
    pub vx: f64,
    pub vy: f64,
    pub by: f64,
    pub t: f64,
}

impl ErrorNorms {
    pub const NAMES: [&'static str; 6] = ["rho", "p", "vx", "vy", "By", "T"];

    pub fn values(&self) -> [f64; 6] {
        [self.rho, self.p, self.vx, self.vy, self.by, self.t]
    }

    fn from_values(v: [f64; 6]) -> Self {
        ErrorNorms { rho: v[0], p: v[1], vx: v[2], vy: v[3], by: v[4], t: v[5] }
    }

    pub fn zip(&self, other: &ErrorNorms, f: impl Fn(f64, f64) -> f64) -> ErrorNorms {
        let (a, b) = (self.values(), other.values());
        ErrorNorms::from_values(std::array::from_fn(|k| f(a[k], b[k])))
    }

    pub fn max(&self) -> f64 {
        self.values().into_iter().fold(0.0, f64::max)
    }
}

/// Cell averages of a fine frame over groups of `nx_fine / nx` cells.
pub fn restrict(fine: &OutputFrame, nx: usize) -> Result<OutputFrame> {
    let n = fine.rows.len();
    if nx == 0 || !n.is_multiple_of(nx) {
        return Err(Error::invalid(format!("cannot restrict {n} cells onto {nx}")));
    }
    let k = n / nx;
    let rows = fine
        .rows
        .chunks(k)
        .map(|c| {
            let mut sum = [0.0; 14];
            for r in c {
                for (s, v) in sum.iter_mut().zip(r.values()) {
                    *s += v;
                }
            }
            FrameRow::from_values(sum.map(|s| s / k as f64))
        })
        .collect();
    Ok(OutputFrame { time: fine.time, rows })
}

/// `sum_i |a_i - b_i| dx` for each error field; both frames on the same grid
/// at the same time.
pub fn error_norms(coarse: &OutputFrame, fine_restricted: &OutputFrame) -> Result<ErrorNorms> {
    if coarse.time != fine_restricted.time {
        return Err(Error::invalid(format!(
            "frames are at different times ({} and {})",
            coarse.time, fine_restricted.time
        )));
    }
    if coarse.rows.len() != fine_restricted.rows.len() {
        return Err(Error::invalid(format!(
            "frames have {} and {} rows",
            coarse.rows.len(),
            fine_restricted.rows.len()
        )));
    }
    let dx = coarse.dx()?;
    let fields: [fn(&FrameRow) -> f64; 6] = [|r| r.rho, |r| r.p, |r| r.vx, |r| r.vy, |r| r.by, |r| r.t];
    Ok(ErrorNorms::from_values(
        fields
            .map(|f| coarse.rows.iter().zip(&fine_restricted.rows).map(|(a, b)| (f(a) - f(b)).abs()).sum::<f64>() * dx),
    ))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    Ok(BufWriter::new(File::create(path).map_err(io)?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Shortest representation that parses back to the same bits.
fn fmt(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv(frame: &OutputFrame, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let mut text = CSV_HEADER.join(",");
    text.push('\n');
    for r in &frame.rows {
        text.push_str(&r.values().map(fmt).join(","));
        text.push('\n');
    }
    w.write_all(text.as_bytes()).map_err(io)?;
    finish(w, path)
}

/// Reads a frame written by [`write_csv`]; the time is not stored in the file.
pub fn read_csv(path: &Path, time: f64) -> Result<OutputFrame> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let mut rd = csv::ReaderBuilder::new().from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io(source),
        other => Error::invalid(format!("{}: {other:?}", path.display())),
    })?;
    let bad = |m: String| Error::invalid(format!("{}: {m}", path.display()));
    let header = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (n, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("row {}: '{s}' is not a number", n + 1))))
            .collect::<Result<_>>()?;
        let vals: [f64; 14] = vals.try_into().map_err(|_| bad(format!("row {} has the wrong width", n + 1)))?;
        rows.push(FrameRow::from_values(vals));
    }
    Ok(OutputFrame { time, rows })
}

/// One line per resolution: errors, then orders (empty on the last line).
pub fn write_convergence_csv(rows: &[super::ConvergenceRow], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let mut text = String::from("nx");
    for n in ErrorNorms::NAMES {
        text.push_str(&format!(",error_{n}"));
    }
    for n in ErrorNorms::NAMES {
        text.push_str(&format!(",order_{n}"));
    }
    text.push('\n');
    for r in rows {
        text.push_str(&r.nx.to_string());
        for v in r.errors.values() {
            text.push(',');
            text.push_str(&fmt(v));
        }
        for k in 0..6 {
            text.push(',');
            if let Some(o) = &r.orders {
                text.push_str(&fmt(o.values()[k]));
            }
        }
        text.push('\n');
    }
    w.write_all(text.as_bytes()).map_err(io)?;
    finish(w, path)
}
