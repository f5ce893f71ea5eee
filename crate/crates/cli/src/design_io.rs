//! Design tables: a CSV header of `x1..xd` input columns optionally followed
//! by `y1..yk` response columns.

use std::fs;
use std::path::Path;

use krigrisk::Points;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignTable {
    pub points: Points,
    /// One vector per response, empty when the file has no `y` columns.
    pub responses: Vec<Vec<f64>>,
}

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_design(path: &Path) -> Result<DesignTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_design(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse_design(text: &str) -> Result<DesignTable, String> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, name) in header.iter().enumerate() {
        match name.chars().next() {
            Some('x') => xs.push(i),
            Some('y') => ys.push(i),
            _ => return Err(format!("unexpected column {name:?}")),
        }
    }
    if xs.is_empty() {
        return Err("no input columns".into());
    }
    if ys.iter().any(|&j| xs.iter().any(|&i| i > j)) {
        return Err("input columns must precede response columns".into());
    }
    let mut points = Points::new(xs.len());
    let mut responses = vec![Vec::new(); ys.len()];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| -> Result<f64, String> {
            let s = &rec[i];
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("row {}: bad value {s:?}", r + 1))
        };
        let row = xs.iter().map(|&i| num(i)).collect::<Result<Vec<_>, _>>()?;
        points.push(&row).map_err(|e| e.to_string())?;
        for (k, &j) in ys.iter().enumerate() {
            responses[k].push(num(j)?);
        }
    }
    if points.is_empty() {
        return Err("no rows".into());
    }
    Ok(DesignTable { points, responses })
}

pub fn design_csv(points: &Points, responses: &[Vec<f64>]) -> String {
    let mut head: Vec<String> = (1..=points.dim()).map(|i| format!("x{i}")).collect();
    head.extend((1..=responses.len()).map(|j| format!("y{j}")));
    let mut s = head.join(",");
    s.push('\n');
    for (r, x) in points.rows().enumerate() {
        let mut row: Vec<String> = x.iter().map(|v| fmt(*v)).collect();
        row.extend(responses.iter().map(|y| fmt(y[r])));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
