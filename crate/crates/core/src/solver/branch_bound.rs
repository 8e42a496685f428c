use std::cmp::Ordering;
use std::time::Instant;

use super::{
    pigeonhole_diagnostic, uncovered_diagnostic, Method, SolveReport, SolveStats, WeightMatrix,
};
use crate::domain::Attendance;
use crate::formulation::BilpModel;

struct Search<'a> {
    matrix: &'a WeightMatrix,
    /// Per row, the columns with a variable sorted by descending weight,
    /// ascending column on ties.
    candidates: Vec<Vec<(usize, i64)>>,
    used: Vec<bool>,
    path: Vec<usize>,
    best: Option<(i64, Vec<usize>)>,
    nodes: u64,
}

impl Search<'_> {
    /// Current value plus the best free column of every remaining row, or
    /// `None` if some remaining row has no free column left.
    fn bound(&self, row: usize, value: i64) -> Option<i64> {
        let mut bound = value;
        for r in row..self.matrix.rows {
            let best = self.candidates[r]
                .iter()
                .find(|(c, _)| !self.used[*c])
                .map(|(_, w)| *w)?;
            bound += best;
        }
        Some(bound)
    }

    fn dfs(&mut self, row: usize, value: i64) {
        self.nodes += 1;
        if row == self.matrix.rows {
            let better = match &self.best {
                None => true,
                Some((v, choice)) => value > *v || (value == *v && self.path < *choice),
            };
            if better {
                self.best = Some((value, self.path.clone()));
            }
            return;
        }
        let Some(bound) = self.bound(row, value) else {
            return;
        };
        if let Some((incumbent, choice)) = &self.best {
            // Equal bounds are kept only while the path could still be the
            // lexicographically smaller optimum.
            match bound.cmp(incumbent) {
                Ordering::Less => return,
                Ordering::Equal if self.path[..] > choice[..row] => return,
                _ => {}
            }
        }
        for k in 0..self.candidates[row].len() {
            let (col, w) = self.candidates[row][k];
            if self.used[col] {
                continue;
            }
            self.used[col] = true;
            self.path.push(col);
            self.dfs(row + 1, value + w);
            self.path.pop();
            self.used[col] = false;
        }
    }
}

/// Depth-first branch-and-bound over screens in ascending order.
///
/// Children are tried in descending coefficient order; the bound adds, for
/// every unassigned screen, its best coefficient among configurations not
/// yet taken. Ties between optimal schedules resolve to the
/// lexicographically smallest.
pub fn solve_branch_and_bound(model: &BilpModel) -> SolveReport {
    let start = Instant::now();
    let mut stats = SolveStats::default();
    if let Some(diag) = pigeonhole_diagnostic(model) {
        stats.wall_time = start.elapsed();
        return SolveReport::infeasible(Method::BranchAndBound, diag, stats);
    }

    let matrix = WeightMatrix::from_model(model);
    let candidates = (0..matrix.rows)
        .map(|r| {
            let mut row: Vec<(usize, i64)> = (0..matrix.cols)
                .filter_map(|c| matrix.get(r, c).map(|w| (c, w)))
                .collect();
            row.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            row
        })
        .collect();
    let mut search = Search {
        matrix: &matrix,
        candidates,
        used: vec![false; matrix.cols],
        path: Vec::with_capacity(matrix.rows),
        best: None,
        nodes: 0,
    };
    search.dfs(0, 0);
    stats.nodes = search.nodes;
    stats.wall_time = start.elapsed();

    match search.best {
        Some((value, choice)) => SolveReport::optimal(
            Method::BranchAndBound,
            matrix.schedule(model, &choice),
            Attendance::from_milli(value),
            stats,
        ),
        None => SolveReport::infeasible(Method::BranchAndBound, uncovered_diagnostic(), stats),
    }
}
