//! Column-labelled numeric tables with a `#`-prefixed metadata header.

use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("row {row} has {got} values, expected {expected}")]
    RowLength {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("time column not strictly increasing at row {0}")]
    TimeOrder(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Row-major table; the first column is time.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// `key = value` lines reproducing the run configuration.
    pub config_echo: Vec<String>,
    /// Other `(key, value)` annotations such as solver and deviations.
    pub meta: Vec<(String, String)>,
}

/// Fixed 17-significant-digit scientific notation; `NaN` for missing values.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

impl OutputTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        OutputTable {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            config_echo: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<(), TableError> {
        if row.len() != self.columns.len() {
            return Err(TableError::RowLength {
                row: self.rows.len(),
                got: row.len(),
                expected: self.columns.len(),
            });
        }
        if let Some(last) = self.rows.last() {
            if !(row[0] > last[0]) {
                return Err(TableError::TimeOrder(self.rows.len()));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn add_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for line in &self.config_echo {
            writeln!(out, "#cfg {line}")?;
        }
        for (k, v) in &self.meta {
            writeln!(out, "#meta {k} = {v}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("table output is ASCII")
    }

    /// Reads back text produced by [`OutputTable::write_csv`].
    pub fn parse_csv(text: &str) -> Result<Self, TableError> {
        let mut table = OutputTable::new(Vec::<String>::new());
        let mut have_header = false;
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| TableError::Parse {
                line: i + 1,
                message,
            };
            if let Some(echo) = line.strip_prefix("#cfg ") {
                table.config_echo.push(echo.to_string());
            } else if let Some(meta) = line.strip_prefix("#meta ") {
                let (k, v) = meta
                    .split_once(" = ")
                    .ok_or_else(|| err(format!("bad metadata {meta:?}")))?;
                table.add_meta(k, v);
            } else if line.starts_with('#') || line.is_empty() {
                continue;
            } else if !have_header {
                table.columns = line.split(',').map(str::to_string).collect();
                have_header = true;
            } else {
                let row = line
                    .split(',')
                    .map(|c| c.parse::<f64>().map_err(|e| err(format!("{c:?}: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                table.push_row(row)?;
            }
        }
        if !have_header {
            return Err(TableError::Parse {
                line: text.lines().count(),
                message: "no column header".into(),
            });
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = OutputTable::new(["t", "x", "ratio"]);
        t.config_echo.push("gamma = 0.05".into());
        t.add_meta("solver", "both");
        t.push_row(vec![0.0, 0.1, f64::NAN]).unwrap();
        t.push_row(vec![0.5, 1.0 / 3.0, 2.0]).unwrap();
        let text = t.to_csv_string();
        assert!(text.starts_with("#cfg gamma = 0.05\n#meta solver = both\nt,x,ratio\n"));
        assert!(text.contains("3.3333333333333331e-1"));
        let back = OutputTable::parse_csv(&text).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows[1], t.rows[1]);
        assert!(back.rows[0][2].is_nan());
        assert_eq!(back.meta_value("solver"), Some("both"));
        assert_eq!(back.config_echo, t.config_echo);
    }

    #[test]
    fn rejects_ragged_rows_and_time_reversal() {
        let mut t = OutputTable::new(["t", "x"]);
        assert!(matches!(
            t.push_row(vec![0.0]),
            Err(TableError::RowLength { .. })
        ));
        t.push_row(vec![1.0, 0.0]).unwrap();
        assert_eq!(t.push_row(vec![1.0, 0.0]), Err(TableError::TimeOrder(1)));
    }

    #[test]
    fn format_is_exact() {
        for v in [0.1, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_value(1.0), "1.0000000000000000e0");
    }
}
