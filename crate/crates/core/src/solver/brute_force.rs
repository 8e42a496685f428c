use std::time::Instant;

use thiserror::Error;

use super::{
    pigeonhole_diagnostic, uncovered_diagnostic, Method, SolveReport, SolveStats, WeightMatrix,
};
use crate::domain::Attendance;
use crate::formulation::BilpModel;

pub const ORACLE_MAX_SCREENS: usize = 8;
pub const ORACLE_MAX_CONFIGURATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("instance too large for oracle: {screens} screens x {configurations} configurations (limit {ORACLE_MAX_SCREENS} x {ORACLE_MAX_CONFIGURATIONS})")]
pub struct OracleTooLarge {
    pub screens: usize,
    pub configurations: usize,
}

struct Enumeration<'a> {
    matrix: &'a WeightMatrix,
    used: Vec<bool>,
    path: Vec<usize>,
    best: Option<(i64, Vec<usize>)>,
    complete: u64,
}

impl Enumeration<'_> {
    fn visit(&mut self, row: usize, value: i64) {
        if row == self.matrix.rows {
            self.complete += 1;
            // Lexicographic visiting order: the first maximum is the
            // smallest one.
            if self.best.as_ref().is_none_or(|(v, _)| value > *v) {
                self.best = Some((value, self.path.clone()));
            }
            return;
        }
        for col in 0..self.matrix.cols {
            if self.used[col] {
                continue;
            }
            let Some(w) = self.matrix.get(row, col) else {
                continue;
            };
            self.used[col] = true;
            self.path.push(col);
            self.visit(row + 1, value + w);
            self.path.pop();
            self.used[col] = false;
        }
    }
}

/// Enumerates every injective screen-to-configuration map. `nodes` in the
/// returned statistics counts the complete assignments visited.
pub fn solve_brute_force(model: &BilpModel) -> Result<SolveReport, OracleTooLarge> {
    let screens = model.screen_count();
    let configurations = model.configuration_count();
    if screens > ORACLE_MAX_SCREENS || configurations > ORACLE_MAX_CONFIGURATIONS {
        return Err(OracleTooLarge {
            screens,
            configurations,
        });
    }
    let start = Instant::now();
    let mut stats = SolveStats::default();
    if let Some(diag) = pigeonhole_diagnostic(model) {
        stats.wall_time = start.elapsed();
        return Ok(SolveReport::infeasible(Method::BruteForce, diag, stats));
    }

    let matrix = WeightMatrix::from_model(model);
    let mut search = Enumeration {
        matrix: &matrix,
        used: vec![false; matrix.cols],
        path: Vec::with_capacity(matrix.rows),
        best: None,
        complete: 0,
    };
    search.visit(0, 0);
    stats.nodes = search.complete;
    stats.wall_time = start.elapsed();

    Ok(match search.best {
        Some((value, choice)) => SolveReport::optimal(
            Method::BruteForce,
            matrix.schedule(model, &choice),
            Attendance::from_milli(value),
            stats,
        ),
        None => SolveReport::infeasible(Method::BruteForce, uncovered_diagnostic(), stats),
    })
}
