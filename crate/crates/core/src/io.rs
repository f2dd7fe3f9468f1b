//! Series files: CSV with a `t,y` header and optional regressors `x1..xk`.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const COAL_CSV: &str = include_str!("../data/coal_mining.csv");

/// Names accepted in place of a file path.
pub const BUILTIN_DATASETS: [&str; 1] = ["coal"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    /// Time labels as written in the file.
    pub t: Vec<String>,
    pub y: Vec<f64>,
    /// Regressor rows `x_t`, empty when the file has none.
    pub x: Vec<Vec<f64>>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn regressor_count(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }
}

#[derive(PartialEq, PartialOrd)]
enum Stamp {
    Int(i64),
    Date(NaiveDate),
}

fn stamp(s: &str) -> Option<Stamp> {
    s.parse::<i64>()
        .ok()
        .map(Stamp::Int)
        .or_else(|| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().map(Stamp::Date))
}

fn data_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("line {line}: {msg}"))
}

/// Parses CSV text. The header must be `t,y` followed by `x1..xk`;
/// `t` must be strictly increasing integers or ISO dates.
pub fn parse_series_csv(text: &str) -> Result<Series> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| data_err(1, e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 2 || names[0] != "t" || names[1] != "y" {
        return Err(data_err(1, format!("header must start with t,y, found {:?}", names)));
    }
    for (k, name) in names[2..].iter().enumerate() {
        if *name != format!("x{}", k + 1) {
            return Err(data_err(1, format!("regressor columns must be x1..xk, found {name:?}")));
        }
    }
    let k = names.len() - 2;
    let mut series = Series {
        t: Vec::new(),
        y: Vec::new(),
        x: Vec::new(),
    };
    let mut last: Option<Stamp> = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != names.len() {
            return Err(data_err(
                line,
                format!("expected {} fields, found {}", names.len(), rec.len()),
            ));
        }
        let t = rec[0].to_string();
        let st = stamp(&t).ok_or_else(|| data_err(line, format!("t = {t:?} is neither an integer nor an ISO date")))?;
        if let Some(prev) = &last {
            let same_kind = matches!(
                (prev, &st),
                (Stamp::Int(_), Stamp::Int(_)) | (Stamp::Date(_), Stamp::Date(_))
            );
            if !same_kind {
                return Err(data_err(line, "t mixes integers and dates"));
            }
            if st <= *prev {
                return Err(data_err(line, format!("t = {t} is not strictly increasing")));
            }
        }
        last = Some(st);
        let num = |s: &str, what: &str| -> Result<f64> {
            if s.is_empty() {
                return Err(data_err(line, format!("missing {what}")));
            }
            let v: f64 = s
                .parse()
                .map_err(|_| data_err(line, format!("{what} = {s:?} is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(data_err(line, format!("{what} must be finite")))
            }
        };
        series.y.push(num(&rec[1], "y")?);
        if k > 0 {
            series
                .x
                .push((0..k).map(|j| num(&rec[2 + j], names[2 + j])).collect::<Result<_>>()?);
        }
        series.t.push(t);
    }
    if series.is_empty() {
        return Err(Error::Data("series has no observations".into()));
    }
    Ok(series)
}

/// Loads a bundled dataset by name or a CSV file by path.
pub fn load_series(source: &str) -> Result<Series> {
    match source {
        "coal" => parse_series_csv(COAL_CSV),
        path => {
            let text = fs::read_to_string(Path::new(path)).map_err(|e| Error::Data(format!("{path}: {e}")))?;
            parse_series_csv(&text).map_err(|e| match e {
                Error::Data(msg) => Error::Data(format!("{path}: {msg}")),
                other => other,
            })
        }
    }
}
