use std::fmt;
use std::time::Duration;

use crate::config::KeyValues;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_nan() {
            Cell::Empty
        } else {
            Cell::Num(v)
        }
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Num(x) if x.is_infinite() => f.write_str(if *x > 0.0 { "inf" } else { "-inf" }),
            Cell::Num(x) => write!(f, "{x:.4}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

/// A table of results plus `# key=value` metadata.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    pub metadata: KeyValues,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Not part of the CSV, which must not depend on timing.
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub(crate) fn new(name: &str, columns: &[&str]) -> Self {
        let mut metadata = KeyValues::new();
        metadata.set("experiment", name);
        ExperimentReport {
            name: name.to_string(),
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            wall_time: Duration::ZERO,
        }
    }

    pub(crate) fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric value at (`row`, `column`).
    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        let j = self.column_index(column)?;
        self.rows.get(row)?.get(j)?.as_f64()
    }

    /// Indices of the rows whose `column` equals `value`.
    pub fn rows_where(&self, column: &str, value: &Cell) -> Vec<usize> {
        let Some(j) = self.column_index(column) else {
            return Vec::new();
        };
        (0..self.rows.len()).filter(|&i| &self.rows[i][j] == value).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.metadata.iter() {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = ExperimentReport::new("demo", &["M", "b_theo", "note"]);
        r.metadata.set("seed", "7");
        r.push(vec![Cell::from(10usize), Cell::from(19.5912), Cell::from("x")]);
        r.push(vec![Cell::from(30usize), Cell::from(f64::NAN), Cell::Empty]);
        assert_eq!(
            r.to_csv(),
            "# experiment=demo\n# seed=7\nM,b_theo,note\n10,19.5912,x\n30,,\n"
        );
        assert_eq!(r.value(0, "b_theo"), Some(19.5912));
        assert_eq!(r.value(1, "b_theo"), None);
        assert_eq!(r.rows_where("M", &Cell::Int(30)), vec![1]);
    }
}
