//! The binary integer linear program.
//!
//! One binary variable per (screen, film configuration). Each screen plays
//! exactly one configuration (equality rows) and each configuration plays on
//! at most one screen of the cluster (staggering rows). The objective is the
//! total forecast attendance.

mod lp;

pub use lp::export_lp_text;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::domain::{
    Attendance, ClusterId, ClusterInstance, ConfigIndex, FilmId, MultiClusterInstance, ScreenId,
};

/// Decision variable: `film` with configuration `config` plays on `screen`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableRef {
    pub screen: ScreenId,
    pub film: FilmId,
    pub config: ConfigIndex,
}

impl VariableRef {
    pub fn new(screen: u32, film: u32, config: u32) -> Self {
        VariableRef {
            screen: ScreenId(screen),
            film: FilmId(film),
            config: ConfigIndex(config),
        }
    }

    /// Name used in LP exports.
    pub fn lp_name(&self) -> String {
        format!("X_s{}_f{}_c{}", self.screen, self.film, self.config)
    }
}

impl fmt::Display for VariableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(screen {}, film {}, config {})",
            self.screen, self.film, self.config
        )
    }
}

/// A film configuration within one cluster; the scope of a staggering row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StaggerKey {
    pub cluster: ClusterId,
    pub film: FilmId,
    pub config: ConfigIndex,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowKey {
    /// `sum = 1` over the screen's variables.
    Screen(ScreenId),
    /// `sum <= 1` over the configuration's variables.
    Stagger(StaggerKey),
}

impl fmt::Display for RowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowKey::Screen(s) => write!(f, "screen {s}"),
            RowKey::Stagger(k) => write!(f, "film {} config {}", k.film, k.config),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub key: RowKey,
    /// Indices into the model's variable list, ascending.
    pub variables: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulationError {
    #[error("variable {0} is not part of the model")]
    UnknownVariable(VariableRef),
}

/// Immutable BILP over one or more clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilpModel {
    variables: Vec<VariableRef>,
    objective: Vec<Attendance>,
    /// (equality row, inequality row) of each variable.
    membership: Vec<(usize, usize)>,
    equality_rows: Vec<Row>,
    inequality_rows: Vec<Row>,
    clusters: Vec<ClusterId>,
    index: HashMap<VariableRef, usize>,
}

impl BilpModel {
    /// Assembles a model from its variables. Screens listed in `screens`
    /// get an equality row even when they have no variable.
    fn assemble(
        screens: &[ScreenId],
        mut columns: Vec<(VariableRef, StaggerKey, Attendance)>,
    ) -> Self {
        columns.sort_by_key(|(v, _, _)| *v);
        columns.dedup_by_key(|(v, _, _)| *v);

        let screen_set: BTreeSet<ScreenId> = screens
            .iter()
            .copied()
            .chain(columns.iter().map(|(v, _, _)| v.screen))
            .collect();
        let screen_row: BTreeMap<ScreenId, usize> = screen_set
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect();
        let stagger_set: BTreeSet<&StaggerKey> = columns.iter().map(|(_, k, _)| k).collect();
        let stagger_row: BTreeMap<&StaggerKey, usize> = stagger_set
            .iter()
            .enumerate()
            .map(|(i, k)| (*k, i))
            .collect();

        let mut equality_rows: Vec<Row> = screen_set
            .iter()
            .map(|s| Row {
                key: RowKey::Screen(*s),
                variables: Vec::new(),
            })
            .collect();
        let mut inequality_rows: Vec<Row> = stagger_set
            .iter()
            .map(|k| Row {
                key: RowKey::Stagger((*k).clone()),
                variables: Vec::new(),
            })
            .collect();

        let mut membership = Vec::with_capacity(columns.len());
        for (i, (var, key, _)) in columns.iter().enumerate() {
            let eq = screen_row[&var.screen];
            let ineq = stagger_row[key];
            equality_rows[eq].variables.push(i);
            inequality_rows[ineq].variables.push(i);
            membership.push((eq, ineq));
        }

        let clusters: BTreeSet<ClusterId> = stagger_set.iter().map(|k| k.cluster.clone()).collect();
        let variables: Vec<VariableRef> = columns.iter().map(|(v, _, _)| *v).collect();
        let index = variables.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        BilpModel {
            objective: columns.iter().map(|(_, _, c)| *c).collect(),
            variables,
            membership,
            equality_rows,
            inequality_rows,
            clusters: clusters.into_iter().collect(),
            index,
        }
    }

    pub fn variables(&self) -> &[VariableRef] {
        &self.variables
    }

    pub fn objective(&self) -> &[Attendance] {
        &self.objective
    }

    pub fn equality_rows(&self) -> &[Row] {
        &self.equality_rows
    }

    pub fn inequality_rows(&self) -> &[Row] {
        &self.inequality_rows
    }

    /// (equality row, inequality row) indices of variable `var`.
    pub fn rows_of(&self, var: usize) -> (usize, usize) {
        self.membership[var]
    }

    /// Clusters whose staggering rows appear in the model, sorted.
    pub fn clusters(&self) -> &[ClusterId] {
        &self.clusters
    }

    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn screen_count(&self) -> usize {
        self.equality_rows.len()
    }

    pub fn configuration_count(&self) -> usize {
        self.inequality_rows.len()
    }

    pub fn index_of(&self, var: &VariableRef) -> Option<usize> {
        self.index.get(var).copied()
    }

    pub fn coefficient(&self, var: &VariableRef) -> Option<Attendance> {
        self.index_of(var).map(|i| self.objective[i])
    }

    fn columns(&self) -> impl Iterator<Item = (VariableRef, StaggerKey, Attendance)> + '_ {
        self.variables.iter().enumerate().map(|(i, v)| {
            let key = match &self.inequality_rows[self.membership[i].1].key {
                RowKey::Stagger(k) => k.clone(),
                RowKey::Screen(_) => unreachable!("inequality rows are staggering rows"),
            };
            (*v, key, self.objective[i])
        })
    }

    fn screen_ids(&self) -> Vec<ScreenId> {
        self.equality_rows
            .iter()
            .map(|r| match r.key {
                RowKey::Screen(s) => s,
                RowKey::Stagger(_) => unreachable!("equality rows are screen rows"),
            })
            .collect()
    }

    /// Same model with the listed variables removed (fixed to zero).
    pub fn without(&self, forbidden: &[VariableRef]) -> BilpModel {
        let forbidden: BTreeSet<&VariableRef> = forbidden.iter().collect();
        let columns = self
            .columns()
            .filter(|(v, _, _)| !forbidden.contains(v))
            .collect();
        BilpModel::assemble(&self.screen_ids(), columns)
    }

    /// Same structure with every objective coefficient transformed.
    pub fn map_objective(&self, mut f: impl FnMut(Attendance) -> Attendance) -> BilpModel {
        BilpModel {
            objective: self.objective.iter().map(|c| f(*c)).collect(),
            ..self.clone()
        }
    }
}

fn cluster_columns(instance: &ClusterInstance) -> Vec<(VariableRef, StaggerKey, Attendance)> {
    let mut columns = Vec::with_capacity(instance.screens.len() * instance.configurations.len());
    for screen in &instance.screens {
        for cfg in &instance.configurations {
            let var = VariableRef {
                screen: screen.id,
                film: cfg.film_id,
                config: cfg.config_index,
            };
            let key = StaggerKey {
                cluster: instance.cluster_id.clone(),
                film: cfg.film_id,
                config: cfg.config_index,
            };
            // Validated instances have complete forecasts.
            let coefficient = instance
                .forecast
                .get(screen.id, cfg.film_id, cfg.config_index)
                .unwrap_or(Attendance::ZERO);
            columns.push((var, key, coefficient));
        }
    }
    columns
}

/// Model of one cluster; variables ordered by screen, film, configuration.
pub fn build_model(instance: &ClusterInstance) -> BilpModel {
    let screens: Vec<ScreenId> = instance.screens.iter().map(|s| s.id).collect();
    BilpModel::assemble(&screens, cluster_columns(instance))
}

/// One model over every cluster. Staggering rows stay scoped to their own
/// cluster, so the constraint matrix is block diagonal.
pub fn build_joint_model(instance: &MultiClusterInstance) -> BilpModel {
    let screens: Vec<ScreenId> = instance
        .clusters
        .iter()
        .flat_map(|c| c.screens.iter().map(|s| s.id))
        .collect();
    let columns = instance.clusters.iter().flat_map(cluster_columns).collect();
    BilpModel::assemble(&screens, columns)
}

/// Total objective of the chosen variables. Feasibility is not checked.
pub fn evaluate<'a>(
    model: &BilpModel,
    assignment: impl IntoIterator<Item = &'a VariableRef>,
) -> Result<Attendance, FormulationError> {
    let chosen: BTreeSet<&VariableRef> = assignment.into_iter().collect();
    chosen
        .into_iter()
        .map(|v| {
            model
                .coefficient(v)
                .ok_or(FormulationError::UnknownVariable(*v))
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Equal,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowCheck {
    pub key: RowKey,
    pub sense: Sense,
    pub chosen: usize,
}

impl RowCheck {
    pub fn satisfied(&self) -> bool {
        match self.sense {
            Sense::Equal => self.chosen == 1,
            Sense::AtMost => self.chosen <= 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub rows: Vec<RowCheck>,
    /// Chosen variables that are not in the model.
    pub unknown: Vec<VariableRef>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.unknown.is_empty() && self.rows.iter().all(RowCheck::satisfied)
    }

    pub fn violated(&self) -> impl Iterator<Item = &RowCheck> {
        self.rows.iter().filter(|r| !r.satisfied())
    }
}

/// Row-by-row constraint check of an assignment.
pub fn check_feasible<'a>(
    model: &BilpModel,
    assignment: impl IntoIterator<Item = &'a VariableRef>,
) -> FeasibilityReport {
    let chosen: BTreeSet<&VariableRef> = assignment.into_iter().collect();
    let mut eq_counts = vec![0usize; model.equality_rows.len()];
    let mut ineq_counts = vec![0usize; model.inequality_rows.len()];
    let mut unknown = Vec::new();
    for var in chosen {
        match model.index_of(var) {
            Some(i) => {
                let (eq, ineq) = model.membership[i];
                eq_counts[eq] += 1;
                ineq_counts[ineq] += 1;
            }
            None => unknown.push(*var),
        }
    }
    let rows = model
        .equality_rows
        .iter()
        .zip(eq_counts)
        .map(|(r, chosen)| RowCheck {
            key: r.key.clone(),
            sense: Sense::Equal,
            chosen,
        })
        .chain(
            model
                .inequality_rows
                .iter()
                .zip(ineq_counts)
                .map(|(r, chosen)| RowCheck {
                    key: r.key.clone(),
                    sense: Sense::AtMost,
                    chosen,
                }),
        )
        .collect();
    FeasibilityReport { rows, unknown }
}


#[cfg(test)]
mod tests {
    use super::test_support::matrix_model;
    use super::*;
    use crate::domain::load_instance;
    use proptest::prelude::*;

    fn crossover_model() -> BilpModel {
        let multi = load_instance(crate::CROSSOVER_INSTANCE).unwrap();
        build_model(multi.single().unwrap())
    }

    fn table_one() -> Vec<VariableRef> {
        [
            (1, 5, 4),
            (2, 5, 1),
            (3, 3, 2),
            (4, 3, 4),
            (5, 2, 1),
            (6, 1, 2),
            (7, 3, 1),
            (8, 5, 2),
            (9, 4, 4),
        ]
        .iter()
        .map(|&(s, f, c)| VariableRef::new(s, f, c))
        .collect()
    }

    #[test]
    fn crossover_model_shape() {
        let m = crossover_model();
        assert_eq!(m.variable_count(), 144);
        assert_eq!(m.equality_rows().len(), 9);
        assert_eq!(m.inequality_rows().len(), 16);
        assert!(m.equality_rows().iter().all(|r| r.variables.len() == 16));
        assert!(m.inequality_rows().iter().all(|r| r.variables.len() == 9));
        assert_eq!(m.variables()[0], VariableRef::new(1, 1, 1));
        assert_eq!(m.variables()[143], VariableRef::new(9, 5, 4));
    }

    #[test]
    fn each_variable_in_one_row_of_each_kind() {
        let m = crossover_model();
        let mut eq_seen = vec![0; m.variable_count()];
        let mut ineq_seen = vec![0; m.variable_count()];
        for r in m.equality_rows() {
            r.variables.iter().for_each(|&v| eq_seen[v] += 1);
        }
        for r in m.inequality_rows() {
            r.variables.iter().for_each(|&v| ineq_seen[v] += 1);
        }
        assert!(eq_seen.iter().chain(&ineq_seen).all(|&n| n == 1));
    }

    #[test]
    fn small_shapes() {
        let m = matrix_model(&[vec![3]]);
        assert_eq!(
            (
                m.variable_count(),
                m.equality_rows().len(),
                m.inequality_rows().len()
            ),
            (1, 1, 1)
        );
        let m = matrix_model(&[vec![1, 1, 1], vec![1, 1, 1]]);
        assert_eq!(
            (
                m.variable_count(),
                m.equality_rows().len(),
                m.inequality_rows().len()
            ),
            (6, 2, 3)
        );
    }

    #[test]
    fn evaluate_crossover_assignments() {
        let m = crossover_model();
        // 286 + 298 + 293 + 282 + 291 + 293 + 292 + 285 + 295
        assert_eq!(
            evaluate(&m, &table_one()).unwrap(),
            Attendance::from_units(2615)
        );
        assert_eq!(evaluate(&m, &[]).unwrap(), Attendance::ZERO);
        assert_eq!(
            evaluate(&m, &[VariableRef::new(1, 1, 1)]).unwrap(),
            Attendance::from_units(226)
        );
        let bogus = VariableRef::new(1, 1, 3);
        assert_eq!(
            evaluate(&m, &[bogus]),
            Err(FormulationError::UnknownVariable(bogus))
        );
    }

    #[test]
    fn feasibility_of_crossover_assignments() {
        let m = crossover_model();
        assert!(check_feasible(&m, &table_one()).is_feasible());

        let mut clash = table_one();
        clash[0] = VariableRef::new(1, 5, 1);
        let report = check_feasible(&m, &clash);
        assert!(!report.is_feasible());
        let bad: Vec<String> = report.violated().map(|r| r.key.to_string()).collect();
        assert_eq!(bad, ["film 5 config 1"]);

        let missing = &table_one()[..8];
        let report = check_feasible(&m, missing);
        let bad: Vec<String> = report.violated().map(|r| r.key.to_string()).collect();
        assert_eq!(bad, ["screen 9"]);
    }

    #[test]
    fn without_removes_variables_only() {
        let m = crossover_model();
        let smaller = m.without(&[VariableRef::new(1, 5, 4)]);
        assert_eq!(smaller.variable_count(), 143);
        assert_eq!(smaller.equality_rows().len(), 9);
        assert_eq!(smaller.inequality_rows().len(), 16);
        assert!(smaller.index_of(&VariableRef::new(1, 5, 4)).is_none());
    }

    #[test]
    fn joint_model_scopes_staggering_per_cluster() {
        let doc = crate::synth::synth_document(&crate::synth::SynthParams {
            screens: 6,
            films: 2,
            clusters: 2,
            seed: 4,
            ..Default::default()
        })
        .unwrap();
        let multi = doc.to_instance().unwrap();
        let joint = build_joint_model(&multi);
        let parts: Vec<BilpModel> = multi.clusters.iter().map(build_model).collect();
        assert_eq!(
            joint.variable_count(),
            parts.iter().map(BilpModel::variable_count).sum::<usize>()
        );
        assert_eq!(
            joint.inequality_rows().len(),
            parts
                .iter()
                .map(|p| p.inequality_rows().len())
                .sum::<usize>()
        );
        assert_eq!(joint.clusters().len(), 2);
    }

    proptest! {
        #[test]
        fn evaluate_is_linear(
            weights in prop::collection::vec(prop::collection::vec(0i64..1000, 4), 1..5),
            split in prop::collection::vec(any::<Option<bool>>(), 20),
        ) {
            let m = matrix_model(&weights);
            let mut a = Vec::new();
            let mut b = Vec::new();
            for (v, side) in m.variables().iter().zip(split) {
                match side {
                    Some(true) => a.push(*v),
                    Some(false) => b.push(*v),
                    None => {}
                }
            }
            let both: Vec<VariableRef> = a.iter().chain(&b).copied().collect();
            prop_assert_eq!(
                evaluate(&m, &both).unwrap(),
                evaluate(&m, &a).unwrap() + evaluate(&m, &b).unwrap()
            );
        }

        #[test]
        fn feasible_assignments_have_one_variable_per_screen(
            picks in prop::collection::vec(0usize..6, 1..5),
        ) {
            let weights = vec![vec![1i64; 6]; picks.len()];
            let m = matrix_model(&weights);
            let chosen: Vec<VariableRef> = picks
                .iter()
                .enumerate()
                .map(|(s, c)| VariableRef::new(s as u32 + 1, 1, *c as u32 + 1))
                .collect();
            let report = check_feasible(&m, &chosen);
            let distinct: BTreeSet<usize> = picks.iter().copied().collect();
            prop_assert_eq!(report.is_feasible(), distinct.len() == picks.len());
            let eq_total: usize = report.rows.iter().filter(|r| r.sense == Sense::Equal).map(|r| r.chosen).sum();
            prop_assert_eq!(eq_total, picks.len());
        }
    }
}
