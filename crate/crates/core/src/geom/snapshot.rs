//! Plain-text field snapshots.
//!
//! ```text
//! # kahler-flow snapshot
//! n <n>
//! resolution <N>
//! period <L>
//! kind <scalar|complex|matrix>
//! <value lines, row-major; complex entries as re,im; matrices row-major per point>
//! ```

use super::chart::{ComplexField, GridChart, MatrixField, ScalarField};
use super::linalg::CMat;
use super::GeomError;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

const MAGIC: &str = "# kahler-flow snapshot";

#[derive(Clone, Debug, PartialEq)]
pub enum Snapshot {
    Scalar(ScalarField),
    Complex(ComplexField),
    Matrix(MatrixField),
}

impl Snapshot {
    pub fn chart(&self) -> &GridChart {
        match self {
            Snapshot::Scalar(f) => f.chart(),
            Snapshot::Complex(f) => f.chart(),
            Snapshot::Matrix(f) => f.chart(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Snapshot::Scalar(_) => "scalar",
            Snapshot::Complex(_) => "complex",
            Snapshot::Matrix(_) => "matrix",
        }
    }
}

fn complex_pair(c: Complex64) -> String {
    format!("{},{}", c.re, c.im)
}

pub fn write_snapshot<W: Write>(out: &mut W, snap: &Snapshot) -> Result<(), GeomError> {
    let c = snap.chart();
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "n {}", c.dim());
    let _ = writeln!(s, "resolution {}", c.resolution());
    let _ = writeln!(s, "period {}", c.period());
    let _ = writeln!(s, "kind {}", snap.kind());
    match snap {
        Snapshot::Scalar(f) => {
            for v in f.values() {
                let _ = writeln!(s, "{v}");
            }
        }
        Snapshot::Complex(f) => {
            for v in f.values() {
                let _ = writeln!(s, "{}", complex_pair(*v));
            }
        }
        Snapshot::Matrix(f) => {
            let n = c.dim();
            for m in f.data() {
                let row: Vec<String> =
                    (0..n * n).map(|k| complex_pair(m.get(k / n, k % n))).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
    }
    out.write_all(s.as_bytes()).map_err(|e| GeomError::Snapshot(e.to_string()))
}

pub fn read_snapshot<R: BufRead>(input: R) -> Result<Snapshot, GeomError> {
    let mut lines = input.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String), GeomError> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((i, Err(e))) => Err(GeomError::Snapshot(format!("line {}: {e}", i + 1))),
            None => Err(GeomError::Snapshot(format!("unexpected end of file, expected {what}"))),
        }
    };
    let (_, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(GeomError::Snapshot("line 1: missing snapshot header".into()));
    }
    let mut header = |key: &str| -> Result<(usize, String), GeomError> {
        let (ln, l) = next(key)?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(GeomError::Snapshot(format!("line {ln}: expected `{key}`")));
        }
        let v = parts.next().ok_or_else(|| GeomError::Snapshot(format!("line {ln}: missing value")))?;
        Ok((ln, v.to_string()))
    };
    let parse_err = |ln: usize, v: &str| GeomError::Snapshot(format!("line {ln}: cannot parse `{v}`"));
    let (ln, v) = header("n")?;
    let n: usize = v.parse().map_err(|_| parse_err(ln, &v))?;
    let (ln, v) = header("resolution")?;
    let res: usize = v.parse().map_err(|_| parse_err(ln, &v))?;
    let (ln, v) = header("period")?;
    let period: f64 = v.parse().map_err(|_| parse_err(ln, &v))?;
    let (ln, kind) = header("kind")?;
    let chart = GridChart::new(n, res, period)?;

    let parse_c = |ln: usize, tok: &str| -> Result<Complex64, GeomError> {
        let (a, b) = tok.split_once(',').ok_or_else(|| parse_err(ln, tok))?;
        Ok(Complex64::new(a.parse().map_err(|_| parse_err(ln, tok))?, b.parse().map_err(|_| parse_err(ln, tok))?))
    };
    let mut body = Vec::with_capacity(chart.len());
    for _ in 0..chart.len() {
        body.push(next("value")?);
    }
    match kind.as_str() {
        "scalar" => {
            let vals = body
                .iter()
                .map(|(ln, l)| l.trim().parse::<f64>().map_err(|_| parse_err(*ln, l)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Snapshot::Scalar(ScalarField::new(chart, vals)?))
        }
        "complex" => {
            let vals = body.iter().map(|(ln, l)| parse_c(*ln, l.trim())).collect::<Result<Vec<_>, _>>()?;
            Ok(Snapshot::Complex(ComplexField::new(chart, vals)?))
        }
        "matrix" => {
            let mut data = Vec::with_capacity(chart.len());
            for (ln, l) in &body {
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() != n * n {
                    return Err(GeomError::Snapshot(format!("line {ln}: expected {} entries", n * n)));
                }
                let mut m = CMat::zeros(n);
                for (k, t) in toks.iter().enumerate() {
                    m.set(k / n, k % n, parse_c(*ln, t)?);
                }
                data.push(m);
            }
            Ok(Snapshot::Matrix(MatrixField::new(chart, data)?))
        }
        other => Err(GeomError::Snapshot(format!("line {ln}: unknown kind `{other}`"))),
    }
}

/// CSV export of a one-dimensional scalar field: `x,y,value`.
pub fn write_scalar_csv<W: Write>(out: W, f: &ScalarField) -> Result<(), GeomError> {
    let c = f.chart();
    if c.dim() != 1 {
        return Err(GeomError::InvalidChart("CSV export is for n = 1 fields".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| GeomError::Snapshot(e.to_string());
    w.write_record(["x", "y", "value"]).map_err(err)?;
    for (p, v) in f.values().iter().enumerate() {
        let x = c.coords(p);
        w.write_record([x[0].to_string(), x[1].to_string(), v.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| GeomError::Snapshot(e.to_string()))
}
