//! Column-oriented tables with text, CSV and JSON renderings.

use std::io;

use serde::Serialize;
use serde_json::{Map, Value as Json};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// `%g`-style rendering with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    // Rounding may carry into the next decade, so check the mantissa.
    let sci = format!("{:.*e}", digits - 1, x);
    let exp = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse::<i32>().ok())
        .unwrap_or(exp);
    if exp < -4 || exp >= digits as i32 {
        let (mant, e) = sci.split_once('e').unwrap_or((&sci, "0"));
        format!("{}e{}", trim_zeros(mant), e)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Cell {
    fn human(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_sig(*v, 6),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
            Cell::Empty => "-".into(),
        }
    }

    fn exact(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Int(v) => Json::from(*v),
            Cell::Float(v) => Json::from(*v),
            Cell::Bool(v) => Json::from(*v),
            Cell::Text(v) => Json::from(v.as_str()),
            Cell::Empty => Json::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Aligned plain-text table, numbers to 6 significant digits.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::human).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                cells
                    .iter()
                    .map(|r| r[i].len())
                    .chain([c.len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |parts: Vec<String>| -> String {
            parts
                .iter()
                .zip(&widths)
                .map(|(p, w)| format!("{p:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                + "\n"
        };
        out.push_str(&line(self.columns.iter().map(|c| c.to_string()).collect()));
        for r in cells {
            out.push_str(&line(r));
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::exact))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// One JSON object per row.
    pub fn to_json(&self) -> Json {
        Json::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Json> = self
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Json::Object(obj)
                })
                .collect(),
        )
    }
}

/// Writes serializable records as CSV with a header row.
pub fn write_records<W: io::Write, T: Serialize>(writer: W, records: &[T]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.694812345, 6), "0.694812");
        assert_eq!(format_sig(323.3333333, 6), "323.333");
        assert_eq!(format_sig(1.0, 6), "1");
        assert_eq!(format_sig(9.9999996, 6), "10");
        assert_eq!(format_sig(1.234e-7, 6), "1.234e-7");
        assert_eq!(format_sig(-0.5, 6), "-0.5");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e6");
    }

    #[test]
    fn renderings() {
        let mut t = Table::new(vec!["m", "value", "capped"]);
        t.push(vec![22.into(), 0.1f64.into(), true.into()]);
        assert_eq!(t.to_csv(), "m,value,capped\n22,0.1,true\n");
        assert_eq!(t.to_json()[0]["m"], 22);
        assert!(t.to_text().contains("capped"));
    }

    #[test]
    fn records_header() {
        #[derive(Serialize)]
        struct R {
            m: u32,
            lambda: Option<f64>,
        }
        let mut buf = Vec::new();
        write_records(&mut buf, &[R { m: 2, lambda: None }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "m,lambda\n2,\n");
    }
}
