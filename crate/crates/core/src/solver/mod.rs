//! Exact solvers for the staggering BILP.
//!
//! The constraint matrix is that of a rectangular assignment problem:
//! screens must each be matched, configurations at most once. Three
//! independent methods solve it:
//!
//! * [`solve_assignment`]: Hungarian algorithm with dual potentials.
//! * [`solve_branch_and_bound`]: depth-first search over screens.
//! * [`solve_brute_force`]: full enumeration, small models only.
//!
//! All three return the lexicographically smallest optimal schedule, ordered
//! by (screen, film, configuration), so their schedules are comparable
//! exactly. [`certify`] runs them side by side and refuses to return a
//! result they disagree on.

mod assignment;
mod branch_bound;
mod brute_force;

pub use assignment::solve_assignment;
pub use branch_bound::solve_branch_and_bound;
pub use brute_force::{solve_brute_force, ORACLE_MAX_CONFIGURATIONS, ORACLE_MAX_SCREENS};

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Attendance, ConfigIndex, FilmId, ScreenId};
use crate::formulation::{check_feasible, evaluate, BilpModel, VariableRef};

/// Chosen (film, configuration) per screen.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Schedule {
    choices: BTreeMap<ScreenId, (FilmId, ConfigIndex)>,
}

impl Schedule {
    pub fn from_variables<'a>(vars: impl IntoIterator<Item = &'a VariableRef>) -> Schedule {
        Schedule {
            choices: vars
                .into_iter()
                .map(|v| (v.screen, (v.film, v.config)))
                .collect(),
        }
    }

    pub fn get(&self, screen: ScreenId) -> Option<(FilmId, ConfigIndex)> {
        self.choices.get(&screen).copied()
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Entries in ascending screen order.
    pub fn iter(&self) -> impl Iterator<Item = (ScreenId, FilmId, ConfigIndex)> + '_ {
        self.choices.iter().map(|(s, (f, c))| (*s, *f, *c))
    }

    pub fn variables(&self) -> Vec<VariableRef> {
        self.iter()
            .map(|(screen, film, config)| VariableRef {
                screen,
                film,
                config,
            })
            .collect()
    }

    /// Union of disjoint schedules; later entries win on overlap.
    pub fn merge(&mut self, other: &Schedule) {
        self.choices
            .extend(other.choices.iter().map(|(k, v)| (*k, *v)));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Infeasible => "Infeasible",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Assignment,
    BranchAndBound,
    BruteForce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Assignment => "assignment",
            Method::BranchAndBound => "branch-and-bound",
            Method::BruteForce => "brute-force",
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    /// Search nodes (branch-and-bound) or complete assignments (brute force).
    pub nodes: u64,
    /// Inner relaxation steps of the Hungarian method.
    pub iterations: u64,
    pub wall_time: Duration,
}

// Wall time is not part of a report's identity.
impl PartialEq for SolveStats {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.iterations == other.iterations
    }
}

impl Eq for SolveStats {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub schedule: Option<Schedule>,
    pub objective: Option<Attendance>,
    pub method: Method,
    /// Other methods that reproduced this result exactly.
    pub certified_by: Vec<Method>,
    /// Why the model is infeasible.
    pub diagnostic: Option<String>,
    pub stats: SolveStats,
}

impl SolveReport {
    fn optimal(
        method: Method,
        schedule: Schedule,
        objective: Attendance,
        stats: SolveStats,
    ) -> Self {
        SolveReport {
            status: SolveStatus::Optimal,
            schedule: Some(schedule),
            objective: Some(objective),
            method,
            certified_by: Vec::new(),
            diagnostic: None,
            stats,
        }
    }

    fn infeasible(method: Method, diagnostic: String, stats: SolveStats) -> Self {
        SolveReport {
            status: SolveStatus::Infeasible,
            schedule: None,
            objective: None,
            method,
            certified_by: Vec::new(),
            diagnostic: Some(diagnostic),
            stats,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn is_certified(&self) -> bool {
        !self.certified_by.is_empty()
    }
}

/// Explanation for a model with more screens than configurations, if that
/// is the case.
pub fn pigeonhole_diagnostic(model: &BilpModel) -> Option<String> {
    let screens = model.screen_count();
    let configs = model.configuration_count();
    (screens > configs).then(|| {
        let scope = match model.clusters() {
            [one] => format!("cluster {one}"),
            _ => "model".to_string(),
        };
        format!(
            "{scope} has {screens} screens but only {configs} film configurations; \
             each configuration may play on at most one screen, so at least {} screen(s) \
             cannot be scheduled",
            screens - configs
        )
    })
}

fn uncovered_diagnostic() -> String {
    "no staggered assignment covers every screen".to_string()
}

/// Dense weight matrix: rows are equality rows (screens), columns are
/// inequality rows (configurations), `None` where no variable exists.
pub(crate) struct WeightMatrix {
    pub rows: usize,
    pub cols: usize,
    weight: Vec<Option<i64>>,
    var: Vec<usize>,
}

impl WeightMatrix {
    pub fn from_model(model: &BilpModel) -> Self {
        let rows = model.screen_count();
        let cols = model.configuration_count();
        let mut weight = vec![None; rows * cols];
        let mut var = vec![usize::MAX; rows * cols];
        for (i, c) in model.objective().iter().enumerate() {
            let (r, k) = model.rows_of(i);
            weight[r * cols + k] = Some(c.milli());
            var[r * cols + k] = i;
        }
        WeightMatrix {
            rows,
            cols,
            weight,
            var,
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<i64> {
        self.weight[row * self.cols + col]
    }

    /// Schedule for a column choice per row.
    pub fn schedule(&self, model: &BilpModel, choice: &[usize]) -> Schedule {
        let vars: Vec<VariableRef> = choice
            .iter()
            .enumerate()
            .map(|(r, &c)| model.variables()[self.var[r * self.cols + c]])
            .collect();
        Schedule::from_variables(&vars)
    }

    pub fn total(&self, choice: &[usize]) -> Option<i64> {
        choice
            .iter()
            .enumerate()
            .map(|(r, &c)| self.get(r, c))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificationError {
    #[error("internal consistency failure: {first} reports {first_status} ({first_objective}) but {second} reports {second_status} ({second_objective})")]
    Disagreement {
        first: Method,
        first_status: SolveStatus,
        first_objective: String,
        second: Method,
        second_status: SolveStatus,
        second_objective: String,
    },
    #[error("internal consistency failure: {method} and {other} agree on objective {objective} but return different schedules")]
    ScheduleMismatch {
        method: Method,
        other: Method,
        objective: Attendance,
    },
    #[error("internal consistency failure: {method} returned a schedule that violates {row}")]
    InfeasibleSchedule { method: Method, row: String },
    #[error("internal consistency failure: {method} reports objective {reported} but its schedule evaluates to {actual}")]
    ObjectiveMismatch {
        method: Method,
        reported: Attendance,
        actual: String,
    },
}

fn objective_text(r: &SolveReport) -> String {
    r.objective
        .map_or_else(|| "-".to_string(), |o| o.to_string())
}

/// Checks a report against the model it claims to solve.
pub fn verify_report(model: &BilpModel, report: &SolveReport) -> Result<(), CertificationError> {
    let (Some(schedule), Some(objective)) = (&report.schedule, report.objective) else {
        return Ok(());
    };
    let vars = schedule.variables();
    let feasibility = check_feasible(model, &vars);
    if let Some(row) = feasibility.violated().next() {
        return Err(CertificationError::InfeasibleSchedule {
            method: report.method,
            row: row.key.to_string(),
        });
    }
    if !feasibility.unknown.is_empty() {
        return Err(CertificationError::InfeasibleSchedule {
            method: report.method,
            row: format!("unknown variable {}", feasibility.unknown[0]),
        });
    }
    match evaluate(model, &vars) {
        Ok(actual) if actual == objective => Ok(()),
        Ok(actual) => Err(CertificationError::ObjectiveMismatch {
            method: report.method,
            reported: objective,
            actual: actual.to_string(),
        }),
        Err(e) => Err(CertificationError::ObjectiveMismatch {
            method: report.method,
            reported: objective,
            actual: e.to_string(),
        }),
    }
}

fn agree(a: &SolveReport, b: &SolveReport) -> Result<(), CertificationError> {
    if a.status != b.status || a.objective != b.objective {
        return Err(CertificationError::Disagreement {
            first: a.method,
            first_status: a.status,
            first_objective: objective_text(a),
            second: b.method,
            second_status: b.status,
            second_objective: objective_text(b),
        });
    }
    if a.schedule != b.schedule {
        return Err(CertificationError::ScheduleMismatch {
            method: a.method,
            other: b.method,
            objective: a.objective.unwrap_or_default(),
        });
    }
    Ok(())
}

/// Whether brute-force enumeration is allowed on `model`.
pub fn within_oracle_guard(model: &BilpModel) -> bool {
    model.screen_count() <= ORACLE_MAX_SCREENS
        && model.configuration_count() <= ORACLE_MAX_CONFIGURATIONS
}

/// Solves by assignment and branch-and-bound (plus brute force on small
/// models) and returns the assignment report once all agree exactly.
pub fn certify(model: &BilpModel) -> Result<SolveReport, CertificationError> {
    let mut primary = solve_assignment(model);
    verify_report(model, &primary)?;

    let mut others = vec![solve_branch_and_bound(model)];
    if within_oracle_guard(model) {
        others.push(solve_brute_force(model).expect("guard checked"));
    }
    for other in &others {
        verify_report(model, other)?;
        agree(&primary, other)?;
    }
    primary.certified_by = others.iter().map(|r| r.method).collect();
    Ok(primary)
}

/// Forbid-and-resolve: the optimum is unique iff removing any one of its
/// variables makes the model strictly worse (or infeasible).
pub fn optimum_is_unique(
    model: &BilpModel,
    report: &SolveReport,
) -> Result<bool, CertificationError> {
    let (Some(schedule), Some(optimum)) = (&report.schedule, report.objective) else {
        return Ok(false);
    };
    for var in schedule.variables() {
        let restricted = model.without(&[var]);
        let resolved = certify(&restricted)?;
        if resolved.objective.is_some_and(|o| o >= optimum) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::build_model;
    use crate::formulation::test_support::matrix_model;
    use crate::synth::{random_cluster, RandomClusterSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn crossover_model() -> BilpModel {
        let multi = crate::domain::load_instance(crate::CROSSOVER_INSTANCE).unwrap();
        build_model(multi.single().unwrap())
    }

    #[test]
    fn crossover_instance_certified() {
        let m = crossover_model();
        let report = certify(&m).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        assert_eq!(report.objective, Some(Attendance::from_units(2615)));
        assert_eq!(report.certified_by, vec![Method::BranchAndBound]);
        assert!(optimum_is_unique(&m, &report).unwrap());
    }

    #[test]
    fn infeasible_agreement() {
        let m = matrix_model(&[vec![1], vec![2]]);
        let report = certify(&m).unwrap();
        assert_eq!(report.status, SolveStatus::Infeasible);
        assert!(report.diagnostic.unwrap().contains("2 screens but only 1"));
    }

    #[test]
    fn empty_model_is_trivially_optimal() {
        let m = matrix_model(&[]);
        let report = certify(&m).unwrap();
        assert_eq!(report.objective, Some(Attendance::ZERO));
        assert_eq!(report.schedule.unwrap().len(), 0);
    }

    #[test]
    fn sparse_model_infeasible_without_pigeonhole() {
        // Screens 1 and 2 can only use configuration 1.
        let m = matrix_model(&[vec![5, 1, 1], vec![4, 1, 1], vec![1, 1, 1]]);
        let sparse = m.without(&[
            VariableRef::new(1, 1, 2),
            VariableRef::new(1, 1, 3),
            VariableRef::new(2, 1, 2),
            VariableRef::new(2, 1, 3),
        ]);
        assert_eq!(sparse.configuration_count(), 3);
        let report = certify(&sparse).unwrap();
        assert_eq!(report.status, SolveStatus::Infeasible);
        assert_eq!(
            report.diagnostic.as_deref(),
            Some("no staggered assignment covers every screen")
        );
    }

    #[test]
    fn equal_coefficients_tie_break_lexicographically() {
        let m = matrix_model(&vec![vec![7; 5]; 3]);
        for report in [
            solve_assignment(&m),
            solve_branch_and_bound(&m),
            solve_brute_force(&m).unwrap(),
        ] {
            assert_eq!(report.objective, Some(Attendance::from_units(21)));
            let cfgs: Vec<u32> = report
                .schedule
                .unwrap()
                .iter()
                .map(|(_, _, c)| c.get())
                .collect();
            assert_eq!(cfgs, [1, 2, 3], "{}", report.method);
        }
    }

    #[test]
    fn random_models_agree_including_sparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..300 {
            let spec = RandomClusterSpec {
                screens: rng.gen_range(1..=6),
                configurations: rng.gen_range(1..=8),
                coeff_range: (0, 6),
            };
            let inst = random_cluster(&mut rng, &spec);
            let mut m = build_model(&inst);
            let drop: Vec<VariableRef> = m
                .variables()
                .iter()
                .filter(|_| rng.gen_bool(0.3))
                .copied()
                .collect();
            m = m.without(&drop);
            let report = certify(&m).unwrap();
            assert_eq!(report.certified_by.len(), 2);
        }
    }

    #[test]
    fn unique_detection_on_ties() {
        let m = matrix_model(&[vec![5, 5]]);
        let report = certify(&m).unwrap();
        assert!(!optimum_is_unique(&m, &report).unwrap());
        let m = matrix_model(&[vec![5, 4]]);
        let report = certify(&m).unwrap();
        assert!(optimum_is_unique(&m, &report).unwrap());
    }
}
