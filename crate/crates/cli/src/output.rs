use std::io::Write;

use anyhow::Result;
use serde_json::{json, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Twelve significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:.11e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    } else {
        format!("{v}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => fmt_num(*v)
                .parse::<f64>()
                .map(Value::from)
                .unwrap_or(Value::Null),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub command: String,
    pub tables: Vec<Table>,
}

/// Run-varying fields live here and nowhere else.
pub fn metadata(command: &str) -> Vec<(String, String)> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    vec![
        ("tool".into(), "manometer".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("command".into(), command.into()),
        ("unix_time".into(), stamp.to_string()),
    ]
}

pub fn render(
    doc: &Document,
    format: Format,
    meta: Option<&[(String, String)]>,
    out: &mut dyn Write,
) -> Result<()> {
    match format {
        Format::Json => {
            let tables: Vec<Value> = doc
                .tables
                .iter()
                .map(|t| {
                    json!({
                        "name": t.name,
                        "columns": t.columns,
                        "rows": t.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let mut root = serde_json::Map::new();
            if let Some(m) = meta {
                root.insert(
                    "meta".into(),
                    m.iter()
                        .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
                        .collect(),
                );
            }
            root.insert("command".into(), Value::from(doc.command.as_str()));
            root.insert("tables".into(), Value::from(tables));
            serde_json::to_writer_pretty(&mut *out, &Value::Object(root))?;
            writeln!(out)?;
        }
        Format::Csv => {
            if let Some(m) = meta {
                for (k, v) in m {
                    writeln!(out, "# {k}: {v}")?;
                }
            }
            for (i, t) in doc.tables.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                writeln!(out, "# table: {}", t.name)?;
                let mut w = csv::Writer::from_writer(&mut *out);
                w.write_record(&t.columns)?;
                for r in &t.rows {
                    w.write_record(r.iter().map(Cell::text))?;
                }
                w.flush()?;
            }
        }
        Format::Text => {
            if let Some(m) = meta {
                let line: Vec<String> = m.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
            for t in &doc.tables {
                writeln!(out, "\n[{}]", t.name)?;
                let cells: Vec<Vec<String>> = t
                    .rows
                    .iter()
                    .map(|r| r.iter().map(Cell::text).collect())
                    .collect();
                let widths: Vec<usize> = t
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
                let line = |vals: &[String]| -> String {
                    vals.iter()
                        .zip(&widths)
                        .map(|(v, w)| format!("{v:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                writeln!(out, "{}", line(&t.columns))?;
                for r in &cells {
                    writeln!(out, "{}", line(r))?;
                }
            }
        }
    }
    Ok(())
}
