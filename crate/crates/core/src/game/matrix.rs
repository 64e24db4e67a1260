use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::GameError;

/// Two-player payoff table. Rows belong to the first player (fast nodes in
/// the mining game), columns to the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    row_strategies: Vec<String>,
    col_strategies: Vec<String>,
    payoffs: Vec<(f64, f64)>,
    std_errors: Vec<Option<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvCell {
    row: String,
    col: String,
    row_payoff: f64,
    col_payoff: f64,
    std_error: Option<f64>,
}

impl PayoffMatrix {
    pub fn new(
        row_strategies: Vec<String>,
        col_strategies: Vec<String>,
        payoffs: Vec<Vec<(f64, f64)>>,
    ) -> Result<Self, GameError> {
        let cells = row_strategies.len() * col_strategies.len();
        Self::with_std_errors(row_strategies, col_strategies, payoffs, vec![None; cells])
    }

    /// `std_errors` is row-major, one entry per cell.
    pub fn with_std_errors(
        row_strategies: Vec<String>,
        col_strategies: Vec<String>,
        payoffs: Vec<Vec<(f64, f64)>>,
        std_errors: Vec<Option<f64>>,
    ) -> Result<Self, GameError> {
        let bad = |msg: String| Err(GameError::InvalidMatrix(msg));
        if row_strategies.is_empty() || col_strategies.is_empty() {
            return bad("each player needs at least one strategy".into());
        }
        for labels in [&row_strategies, &col_strategies] {
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return bad(format!("duplicate strategy label '{l}'"));
                }
            }
        }
        if payoffs.len() != row_strategies.len() {
            return bad(format!(
                "{} payoff rows for {} row strategies",
                payoffs.len(),
                row_strategies.len()
            ));
        }
        let mut flat = Vec::with_capacity(row_strategies.len() * col_strategies.len());
        for (i, row) in payoffs.into_iter().enumerate() {
            if row.len() != col_strategies.len() {
                return bad(format!(
                    "row {} has {} cells, expected {}",
                    row_strategies[i],
                    row.len(),
                    col_strategies.len()
                ));
            }
            for (j, &(a, b)) in row.iter().enumerate() {
                if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) {
                    return bad(format!(
                        "payoff ({a}, {b}) at ({}, {}) must be finite and non-negative",
                        row_strategies[i], col_strategies[j]
                    ));
                }
            }
            flat.extend(row);
        }
        if std_errors.len() != flat.len() {
            return bad(format!(
                "{} std errors for {} cells",
                std_errors.len(),
                flat.len()
            ));
        }
        if let Some(se) = std_errors.iter().flatten().find(|se| !(**se >= 0.0)) {
            return bad(format!("std error {se} must be non-negative"));
        }
        Ok(Self {
            row_strategies,
            col_strategies,
            payoffs: flat,
            std_errors,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_strategies.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_strategies.len()
    }

    pub fn row_strategies(&self) -> &[String] {
        &self.row_strategies
    }

    pub fn col_strategies(&self) -> &[String] {
        &self.col_strategies
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.row_strategies.iter().position(|l| l == label)
    }

    pub fn col_index(&self, label: &str) -> Option<usize> {
        self.col_strategies.iter().position(|l| l == label)
    }

    pub fn payoff(&self, row: usize, col: usize) -> (f64, f64) {
        self.payoffs[row * self.n_cols() + col]
    }

    pub fn row_payoff(&self, row: usize, col: usize) -> f64 {
        self.payoff(row, col).0
    }

    pub fn col_payoff(&self, row: usize, col: usize) -> f64 {
        self.payoff(row, col).1
    }

    pub fn std_error(&self, row: usize, col: usize) -> Option<f64> {
        self.std_errors[row * self.n_cols() + col]
    }

    /// The game restricted to the given row and column indices, in the order
    /// given.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self, GameError> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return Err(GameError::InvalidMatrix(format!(
                "row index {r} out of range"
            )));
        }
        if let Some(&c) = cols.iter().find(|&&c| c >= self.n_cols()) {
            return Err(GameError::InvalidMatrix(format!(
                "column index {c} out of range"
            )));
        }
        Self::with_std_errors(
            rows.iter()
                .map(|&r| self.row_strategies[r].clone())
                .collect(),
            cols.iter()
                .map(|&c| self.col_strategies[c].clone())
                .collect(),
            rows.iter()
                .map(|&r| cols.iter().map(|&c| self.payoff(r, c)).collect())
                .collect(),
            rows.iter()
                .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
                .map(|(r, c)| self.std_error(r, c))
                .collect(),
        )
    }

    /// Reads `row,col,row_payoff,col_payoff,std_error` records. Lines
    /// starting with `#` are ignored; strategies are ordered by first
    /// appearance and every cell must appear exactly once.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, GameError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<String> = Vec::new();
        let mut cols: Vec<String> = Vec::new();
        let mut cells = Vec::new();
        for rec in rdr.deserialize() {
            let cell: CsvCell = rec?;
            if !rows.contains(&cell.row) {
                rows.push(cell.row.clone());
            }
            if !cols.contains(&cell.col) {
                cols.push(cell.col.clone());
            }
            cells.push(cell);
        }
        let mut grid: Vec<Option<&CsvCell>> = vec![None; rows.len() * cols.len()];
        for cell in &cells {
            let i = rows.iter().position(|r| *r == cell.row).unwrap();
            let j = cols.iter().position(|c| *c == cell.col).unwrap();
            let slot = &mut grid[i * cols.len() + j];
            if slot.is_some() {
                return Err(GameError::InvalidMatrix(format!(
                    "cell ({}, {}) listed twice",
                    cell.row, cell.col
                )));
            }
            *slot = Some(cell);
        }
        if let Some(k) = grid.iter().position(Option::is_none) {
            return Err(GameError::InvalidMatrix(format!(
                "missing cell ({}, {})",
                rows[k / cols.len()],
                cols[k % cols.len()]
            )));
        }
        let payoffs = (0..rows.len())
            .map(|i| {
                (0..cols.len())
                    .map(|j| {
                        let c = grid[i * cols.len() + j].unwrap();
                        (c.row_payoff, c.col_payoff)
                    })
                    .collect()
            })
            .collect();
        let errors = grid.iter().map(|c| c.unwrap().std_error).collect();
        Self::with_std_errors(rows, cols, payoffs, errors)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), GameError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (i, row) in self.row_strategies.iter().enumerate() {
            for (j, col) in self.col_strategies.iter().enumerate() {
                let (row_payoff, col_payoff) = self.payoff(i, j);
                wtr.serialize(CsvCell {
                    row: row.clone(),
                    col: col.clone(),
                    row_payoff,
                    col_payoff,
                    std_error: self.std_error(i, j),
                })?;
            }
        }
        wtr.flush().map_err(|e| GameError::Csv(e.into()))?;
        Ok(())
    }
}
