//! Column-typed sample matrix and its CSV form.
//!
//! The CSV format is a header row of variable names followed by one sample per row.
//! Binary columns hold `0`/`1`.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

/// Most levels a column may have and still be read as discrete.
pub const MAX_LEVELS: usize = 8;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset has no columns")]
    NoColumns,
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("row {row}, column `{column}`: cannot read `{value}` as a number")]
    NotNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` must stay observed")]
    MaskedEndpoint(String),
    #[error("column `{column}` has length {len}, expected {expected}")]
    Ragged {
        column: String,
        len: usize,
        expected: usize,
    },
}

pub type Result<T> = std::result::Result<T, DataError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Continuous,
    /// Integer codes `0..levels`.
    Discrete { levels: usize },
}

impl ColumnKind {
    pub fn is_binary(self) -> bool {
        self == ColumnKind::Discrete { levels: 2 }
    }

    /// Discrete iff every value is an integer code below [`MAX_LEVELS`].
    pub fn infer(values: &[f64]) -> ColumnKind {
        let mut max = 0.0f64;
        for &v in values {
            if v.fract() != 0.0 || !(0.0..MAX_LEVELS as f64).contains(&v) {
                return ColumnKind::Continuous;
            }
            max = max.max(v);
        }
        ColumnKind::Discrete {
            levels: (max as usize + 1).max(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    columns: Vec<Vec<f64>>,
    kinds: Vec<ColumnKind>,
}

impl Dataset {
    /// Builds a dataset and infers column kinds.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.is_empty() {
            return Err(DataError::NoColumns);
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(DataError::DuplicateColumn(n.clone()));
            }
        }
        let expected = columns.first().map_or(0, Vec::len);
        for (n, c) in names.iter().zip(&columns) {
            if c.len() != expected {
                return Err(DataError::Ragged {
                    column: n.clone(),
                    len: c.len(),
                    expected,
                });
            }
        }
        let kinds = columns.iter().map(|c| ColumnKind::infer(c)).collect();
        Ok(Dataset {
            names,
            index,
            columns,
            kinds,
        })
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            for (c, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| DataError::NotNumeric {
                    row: r + 2,
                    column: names[c].clone(),
                    value: field.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(DataError::NotNumeric {
                        row: r + 2,
                        column: names[c].clone(),
                        value: field.to_string(),
                    });
                }
                columns[c].push(v);
            }
        }
        Self::new(names, columns)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        let mut row = Vec::with_capacity(self.names.len());
        for r in 0..self.n_rows() {
            row.clear();
            for (c, col) in self.columns.iter().enumerate() {
                let v = col[r];
                row.push(match self.kinds[c] {
                    ColumnKind::Discrete { .. } => format!("{}", v as i64),
                    ColumnKind::Continuous => format!("{v}"),
                });
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn column_by_name(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn kind(&self, i: usize) -> ColumnKind {
        self.kinds[i]
    }

    /// Copy without the named columns. Names in `keep` may not be dropped.
    pub fn mask(&self, latents: &[impl AsRef<str>], keep: &[impl AsRef<str>]) -> Result<Dataset> {
        let mut drop = vec![false; self.n_cols()];
        for l in latents {
            let l = l.as_ref();
            if keep.iter().any(|k| k.as_ref() == l) {
                return Err(DataError::MaskedEndpoint(l.to_string()));
            }
            drop[self.index_of(l)?] = true;
        }
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for i in 0..self.n_cols() {
            if !drop[i] {
                names.push(self.names[i].clone());
                columns.push(self.columns[i].clone());
            }
        }
        Self::new(names, columns)
    }
}
