//! Rectangular assignment via the Hungarian method with potentials.
//!
//! Screens are rows, configurations columns, and rows never outnumber
//! columns here, so no padding is needed: the shortest-augmenting-path
//! variant handles `n <= m` directly. Missing variables get a prohibitive
//! cost; an optimum that still uses one means no feasible schedule exists.

use std::time::Instant;

use super::{
    pigeonhole_diagnostic, uncovered_diagnostic, Method, SolveReport, SolveStats, WeightMatrix,
};
use crate::domain::Attendance;
use crate::formulation::BilpModel;

struct Solution {
    /// Column per row.
    choice: Vec<usize>,
    /// Row potentials `u` and column potentials `v`, 1-based with slot 0
    /// for the virtual root.
    u: Vec<i128>,
    v: Vec<i128>,
}

/// Min-cost assignment of every row in `rows` to a distinct column in
/// `cols`. `cost(r, c)` is queried with real row/column indices.
fn hungarian(
    rows: &[usize],
    cols: &[usize],
    cost: &impl Fn(usize, usize) -> i128,
    iterations: &mut u64,
) -> Solution {
    let n = rows.len();
    let m = cols.len();
    debug_assert!(n <= m);
    let inf = i128::MAX / 4;
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; m + 1];
    // p[j]: row (1-based) matched to column j; 0 = free.
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                *iterations += 1;
                let cur = cost(rows[i0 - 1], cols[j - 1]) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut choice = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] > 0 {
            choice[p[j] - 1] = cols[j - 1];
        }
    }
    Solution { choice, u, v }
}

/// Exact solve via the assignment structure, polynomial in S and F.
///
/// Among optimal schedules the lexicographically smallest is returned: each
/// screen in turn is fixed to the smallest column that still admits the
/// optimum. Only columns that are tight under the optimal duals can appear
/// in any optimal schedule, so only those are tried.
pub fn solve_assignment(model: &BilpModel) -> SolveReport {
    let start = Instant::now();
    let mut stats = SolveStats::default();
    if let Some(diag) = pigeonhole_diagnostic(model) {
        stats.wall_time = start.elapsed();
        return SolveReport::infeasible(Method::Assignment, diag, stats);
    }

    let matrix = WeightMatrix::from_model(model);
    let (n, m) = (matrix.rows, matrix.cols);
    let matrix_ref = &matrix;
    let max_abs = (0..n)
        .flat_map(|r| (0..m).filter_map(move |c| matrix_ref.get(r, c)))
        .map(|w| i128::from(w).abs())
        .max()
        .unwrap_or(0);
    // Any schedule using a missing variable costs more than every schedule
    // that does not.
    let forbidden = (n as i128 + 1) * (2 * max_abs + 1);
    let cost = |r: usize, c: usize| match matrix.get(r, c) {
        Some(w) => max_abs - i128::from(w),
        None => forbidden,
    };
    let feasible = |choice: &[usize]| {
        choice
            .iter()
            .enumerate()
            .all(|(r, &c)| matrix.get(r, c).is_some())
    };

    let all_rows: Vec<usize> = (0..n).collect();
    let all_cols: Vec<usize> = (0..m).collect();
    let first = hungarian(&all_rows, &all_cols, &cost, &mut stats.iterations);
    if !feasible(&first.choice) {
        stats.wall_time = start.elapsed();
        return SolveReport::infeasible(Method::Assignment, uncovered_diagnostic(), stats);
    }
    let optimum = matrix.total(&first.choice).expect("feasible choice");

    let tight = |r: usize, c: usize| {
        matrix.get(r, c).is_some() && cost(r, c) == first.u[r + 1] + first.v[c + 1]
    };

    let mut choice = first.choice.clone();
    let mut taken = vec![false; m];
    let mut fixed_value: i64 = 0;
    for row in 0..n {
        let current = choice[row];
        for col in 0..current {
            if taken[col] || !tight(row, col) {
                continue;
            }
            taken[col] = true;
            let rest_rows: Vec<usize> = (row + 1..n).collect();
            let rest_cols: Vec<usize> = (0..m).filter(|c| !taken[*c]).collect();
            let rest = hungarian(&rest_rows, &rest_cols, &cost, &mut stats.iterations);
            let candidate: Vec<usize> = choice[..row]
                .iter()
                .copied()
                .chain(std::iter::once(col))
                .chain(rest.choice)
                .collect();
            taken[col] = false;
            if feasible(&candidate) && matrix.total(&candidate) == Some(optimum) {
                choice = candidate;
                break;
            }
        }
        taken[choice[row]] = true;
        fixed_value += matrix.get(row, choice[row]).expect("feasible choice");
    }
    debug_assert_eq!(fixed_value, optimum);

    let schedule = matrix.schedule(model, &choice);
    stats.wall_time = start.elapsed();
    SolveReport::optimal(
        Method::Assignment,
        schedule,
        Attendance::from_milli(optimum),
        stats,
    )
}
