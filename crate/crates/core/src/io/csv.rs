//! Snapshot CSV: header `x1,...,xN,y1,...,yN`, one pair per row, every value
//! written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use faer::Mat;

use crate::edmd::SnapshotSet;
use crate::{Error, Result};

/// Format a double so that parsing it back gives the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn snapshots_to_csv(s: &SnapshotSet) -> String {
    let n = s.state_dim();
    let mut out = String::new();
    let header: Vec<String> =
        (1..=n).map(|i| format!("x{i}")).chain((1..=n).map(|i| format!("y{i}"))).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for j in 0..s.len() {
        let fields: Vec<String> =
            (0..n).map(|i| fmt_f64(s.x[(i, j)])).chain((0..n).map(|i| fmt_f64(s.y[(i, j)]))).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

pub fn write_snapshots(s: &SnapshotSet, path: &Path) -> Result<()> {
    fs::write(path, snapshots_to_csv(s)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshots(path: &Path) -> Result<SnapshotSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshots(&text, path)
}

/// Parse snapshot CSV text; `path` only labels errors.
pub fn parse_snapshots(text: &str, path: &Path) -> Result<SnapshotSet> {
    let fail = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| fail(1, "empty file".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.len() % 2 != 0 || names.is_empty() {
        return Err(fail(hline, format!("header has {} fields; expected x1..xN,y1..yN", names.len())));
    }
    let n = names.len() / 2;
    for (k, name) in names.iter().enumerate() {
        let expected = if k < n { format!("x{}", k + 1) } else { format!("y{}", k - n + 1) };
        if *name != expected {
            return Err(fail(hline, format!("header field {} is {name:?}, expected {expected:?}", k + 1)));
        }
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 2 * n {
            return Err(fail(line, format!("expected {} fields, found {}", 2 * n, fields.len())));
        }
        for (k, f) in fields.iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| fail(line, format!("field {} is not a number: {:?}", k + 1, f.trim())))?;
            if !v.is_finite() {
                return Err(fail(line, format!("field {} is not finite", k + 1)));
            }
            if k < n {
                xs.push(v);
            } else {
                ys.push(v);
            }
        }
    }
    if xs.is_empty() {
        return Err(fail(hline, "no data rows".into()));
    }
    let m = xs.len() / n;
    let x = Mat::from_fn(n, m, |i, j| xs[j * n + i]);
    let y = Mat::from_fn(n, m, |i, j| ys[j * n + i]);
    SnapshotSet::new(x, y, None)
}
