//! Output formatting: CSV and JSON tables with 12 significant digits, and
//! atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::experiments::SweepTable;
use crate::extended::ExtendedReal;

/// Significant digits written for every number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// CSV token for an infinite extended real.
pub const INFINITE_TOKEN: &str = "infinite";

/// Formats like C's `%.12g`: fixed notation for decimal exponents in
/// `[-5, 12)`, scientific otherwise, trailing zeros removed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        // Callers route infinities through `ExtendedReal`; this is a fallback.
        return if x.is_nan() { "nan".into() } else { INFINITE_TOKEN.into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `x` rounded to 12 significant digits.
pub fn round_significant(x: f64) -> f64 {
    if x.is_finite() {
        format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
    } else {
        x
    }
}

/// Rounds every floating-point number in a JSON tree to 12 significant
/// digits. Integers are left alone.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_significant).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Pretty JSON with rounded numbers and a trailing newline.
pub fn to_json_string(mut v: Value) -> String {
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Ext(ExtendedReal),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Ext(ExtendedReal::Finite(x)) => format_number(*x),
            Cell::Ext(ExtendedReal::Infinite) => INFINITE_TOKEN.into(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A rectangular table rendered as CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Comma separated, header first, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

impl From<&SweepTable> for Table {
    fn from(sweep: &SweepTable) -> Self {
        let mut columns = vec![sweep.parameter_name.clone()];
        columns.extend(sweep.metric_names().into_iter().map(String::from));
        let rows = sweep
            .rows
            .iter()
            .map(|r| {
                std::iter::once(Cell::Num(r.parameter_value))
                    .chain(r.metrics.values().map(|v| Cell::Num(*v)))
                    .collect()
            })
            .collect();
        Table { columns, rows }
    }
}

/// Writes `contents` to a temporary sibling of `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats() {
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(20.0), "20");
        assert_eq!(format_number(1.0 / 0.15), "6.66666666667");
        assert_eq!(format_number(-0.0001234), "-0.0001234");
        assert_eq!(format_number(1.5e-7), "1.5e-07");
        assert_eq!(format_number(2.0e15), "2e+15");
        assert_eq!(format_number(123456789012.0), "123456789012");
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["K", "value"]);
        t.push(vec![Cell::Num(2.0), Cell::Ext(ExtendedReal::Infinite)]);
        assert_eq!(t.to_csv(), "K,value\n2,infinite\n");
    }

    #[test]
    fn json_rounding_keeps_integers() {
        let v = serde_json::json!({"a": 1.0/3.0, "n": 1000000u64, "nested": [2.0/3.0]});
        let s = to_json_string(v);
        assert!(s.contains("0.333333333333"));
        assert!(!s.contains("0.3333333333333"));
        assert!(s.contains("1000000"));
        assert!(s.contains("0.666666666667"));
    }

    proptest! {
        #[test]
        fn formatted_numbers_parse_to_rounded_value(x in -1e30f64..1e30) {
            let s = format_number(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back, round_significant(x));
        }
    }
}
