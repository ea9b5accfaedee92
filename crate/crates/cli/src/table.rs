//! Result tables and their CSV / JSON renderings.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(u64::from(v))
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
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

impl Cell {
    /// 17 significant digits, round-trip exact for f64.
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rows under fixed columns; the last column is always `flag`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(mut columns: Vec<&'static str>) -> Self {
        columns.push("flag");
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    /// Appends a row; `flag` is empty for a clean row.
    pub fn push(&mut self, mut cells: Vec<Cell>, flag: Option<String>) {
        assert_eq!(cells.len() + 1, self.columns.len(), "row width");
        cells.push(flag.map_or(Cell::Empty, Cell::Text));
        self.rows.push(cells);
    }

    /// (row index, flag) for every flagged row.
    pub fn flags(&self) -> Vec<(usize, String)> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match r.last() {
                Some(Cell::Text(f)) if !f.is_empty() => Some((i, f.clone())),
                _ => None,
            })
            .collect()
    }
}

/// Provenance written ahead of the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub settings: Vec<(String, String)>,
    pub sweeps: Vec<String>,
}

pub fn render_csv(header: &Header, table: &Table) -> String {
    let mut out = format!(
        "# telesense {}\n# version = {}\n# seed = {}\n",
        header.command, header.version, header.seed
    );
    for (k, v) in &header.settings {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    for s in &header.sweeps {
        out.push_str(&format!("# sweep = {s}\n"));
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(header: &Header, table: &Table) -> String {
    let settings: Map<String, Value> = header
        .settings
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
        .collect();
    let doc = json!({
        "command": header.command,
        "version": header.version,
        "seed": header.seed,
        "config": settings,
        "sweeps": header.sweeps,
        "columns": table.columns,
        "rows": rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialise");
    s.push('\n');
    s
}
