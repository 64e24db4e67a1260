use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{GameError, PayoffMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    Row,
    Col,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Row => "row",
            Player::Col => "col",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalMode {
    /// Alternate players, row first, until a full round removes nothing.
    Iterated,
    /// One pass per player, each judged against the full opposing set.
    SinglePass,
}

impl FromStr for RemovalMode {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iterated" => Ok(Self::Iterated),
            "single_pass" | "single-pass" => Ok(Self::SinglePass),
            _ => Err(GameError::InvalidMatrix(format!(
                "unknown removal mode '{s}'"
            ))),
        }
    }
}

/// An opposing strategy against which the dominator does worse, but by no
/// more than the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgivenCell {
    pub opponent: String,
    pub shortfall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub pass: usize,
    pub player: Player,
    pub removed: String,
    pub dominator: String,
    pub forgiven: Vec<ForgivenCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub matrix: PayoffMatrix,
    pub log: Vec<Removal>,
}

/// Eliminates strategies that some surviving strategy beats everywhere up to
/// `tolerance`, with a strict gain somewhere.
///
/// Within a pass, strategies are examined in label order and removed one at
/// a time, so a dominator is always a survivor and no player loses its last
/// strategy.
pub fn remove_dominated(
    matrix: &PayoffMatrix,
    tolerance: f64,
    mode: RemovalMode,
) -> Result<Reduction, GameError> {
    if !(tolerance >= 0.0) {
        return Err(GameError::InvalidTolerance(tolerance));
    }
    let mut rows: Vec<usize> = (0..matrix.n_rows()).collect();
    let mut cols: Vec<usize> = (0..matrix.n_cols()).collect();
    let mut log = Vec::new();
    match mode {
        RemovalMode::SinglePass => {
            let full_cols = cols.clone();
            let full_rows = rows.clone();
            prune(
                matrix,
                Player::Row,
                &mut rows,
                &full_cols,
                tolerance,
                1,
                &mut log,
            );
            prune(
                matrix,
                Player::Col,
                &mut cols,
                &full_rows,
                tolerance,
                1,
                &mut log,
            );
        }
        RemovalMode::Iterated => {
            let mut pass = 0;
            loop {
                pass += 1;
                let before = log.len();
                prune(
                    matrix,
                    Player::Row,
                    &mut rows,
                    &cols,
                    tolerance,
                    pass,
                    &mut log,
                );
                pass += 1;
                prune(
                    matrix,
                    Player::Col,
                    &mut cols,
                    &rows,
                    tolerance,
                    pass,
                    &mut log,
                );
                if log.len() == before {
                    break;
                }
            }
        }
    }
    Ok(Reduction {
        matrix: matrix.submatrix(&rows, &cols)?,
        log,
    })
}

/// Re-applies logged eliminations to `matrix`.
pub fn replay(matrix: &PayoffMatrix, log: &[Removal]) -> Result<PayoffMatrix, GameError> {
    let mut rows: Vec<usize> = (0..matrix.n_rows()).collect();
    let mut cols: Vec<usize> = (0..matrix.n_cols()).collect();
    for r in log {
        let (set, idx) = match r.player {
            Player::Row => (&mut rows, matrix.row_index(&r.removed)),
            Player::Col => (&mut cols, matrix.col_index(&r.removed)),
        };
        let idx = idx.ok_or_else(|| {
            GameError::InvalidMatrix(format!("log names unknown strategy '{}'", r.removed))
        })?;
        let before = set.len();
        set.retain(|&i| i != idx);
        if set.len() == before || set.is_empty() {
            return Err(GameError::InvalidMatrix(format!(
                "cannot remove '{}' for {}",
                r.removed, r.player
            )));
        }
    }
    matrix.submatrix(&rows, &cols)
}

fn utility(matrix: &PayoffMatrix, player: Player, own: usize, other: usize) -> f64 {
    match player {
        Player::Row => matrix.row_payoff(own, other),
        Player::Col => matrix.col_payoff(other, own),
    }
}

fn label(matrix: &PayoffMatrix, player: Player, i: usize) -> &str {
    match player {
        Player::Row => &matrix.row_strategies()[i],
        Player::Col => &matrix.col_strategies()[i],
    }
}

/// `Some(forgiven cells)` when `by` tolerance-dominates `s`.
fn dominates(
    matrix: &PayoffMatrix,
    player: Player,
    by: usize,
    s: usize,
    opponents: &[usize],
    tolerance: f64,
) -> Option<Vec<ForgivenCell>> {
    let mut strict = false;
    let mut forgiven = Vec::new();
    for &o in opponents {
        let gain = utility(matrix, player, by, o) - utility(matrix, player, s, o);
        if gain < -tolerance {
            return None;
        }
        if gain > 0.0 {
            strict = true;
        } else if gain < 0.0 {
            forgiven.push(ForgivenCell {
                opponent: label(matrix, flip(player), o).to_string(),
                shortfall: -gain,
            });
        }
    }
    strict.then_some(forgiven)
}

fn flip(player: Player) -> Player {
    match player {
        Player::Row => Player::Col,
        Player::Col => Player::Row,
    }
}

fn prune(
    matrix: &PayoffMatrix,
    player: Player,
    own: &mut Vec<usize>,
    opponents: &[usize],
    tolerance: f64,
    pass: usize,
    log: &mut Vec<Removal>,
) {
    let candidates = own.clone();
    for s in candidates {
        let found = own.iter().filter(|&&by| by != s).find_map(|&by| {
            dominates(matrix, player, by, s, opponents, tolerance).map(|f| (by, f))
        });
        if let Some((by, forgiven)) = found {
            own.retain(|&i| i != s);
            log.push(Removal {
                pass,
                player,
                removed: label(matrix, player, s).to_string(),
                dominator: label(matrix, player, by).to_string(),
                forgiven,
            });
        }
    }
}
