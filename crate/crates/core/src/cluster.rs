//! Per-cluster decomposition.
//!
//! Staggering only couples screens inside one cluster of neighbouring
//! locations, so the full problem is block diagonal and each cluster is
//! solved on its own. [`verify_decomposition`] checks that claim against a
//! joint solve.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use thiserror::Error;

use crate::domain::{Attendance, ClusterId, Coordinates, MultiClusterInstance};
use crate::formulation::{build_joint_model, build_model};
use crate::solver::{certify, CertificationError, Schedule, SolveReport, SolveStatus};

/// Default neighbour distance when clusters are derived from coordinates.
pub const DEFAULT_NEIGHBOUR_KM: f64 = 5.0;

/// Default cap on joint-model variables for [`verify_decomposition`].
pub const DEFAULT_JOINT_VARIABLE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSolveReport {
    pub per_cluster: BTreeMap<ClusterId, SolveReport>,
    /// Sum over the clusters that solved to optimality.
    pub combined_objective: Attendance,
    pub overall_status: SolveStatus,
}

impl ClusterSolveReport {
    fn merge(per_cluster: BTreeMap<ClusterId, SolveReport>) -> Self {
        let combined_objective = per_cluster.values().filter_map(|r| r.objective).sum();
        let overall_status = if per_cluster.values().all(SolveReport::is_optimal) {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        ClusterSolveReport {
            per_cluster,
            combined_objective,
            overall_status,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.overall_status == SolveStatus::Optimal
    }

    /// Union of the per-cluster schedules that exist.
    pub fn schedule(&self) -> Schedule {
        let mut out = Schedule::default();
        for s in self
            .per_cluster
            .values()
            .filter_map(|r| r.schedule.as_ref())
        {
            out.merge(s);
        }
        out
    }

    pub fn infeasible_clusters(&self) -> impl Iterator<Item = (&ClusterId, &SolveReport)> {
        self.per_cluster.iter().filter(|(_, r)| !r.is_optimal())
    }
}

/// Certifies every cluster independently. The result does not depend on
/// `parallel`.
pub fn solve_all(
    instance: &MultiClusterInstance,
    parallel: bool,
) -> Result<ClusterSolveReport, CertificationError> {
    let solve_one = |i: usize| {
        let cluster = &instance.clusters[i];
        certify(&build_model(cluster)).map(|r| (cluster.cluster_id.clone(), r))
    };

    let results: Vec<Result<(ClusterId, SolveReport), CertificationError>> =
        if parallel && instance.clusters.len() > 1 {
            let workers = thread::available_parallelism()
                .map_or(2, |n| n.get())
                .min(instance.clusters.len());
            let next = AtomicUsize::new(0);
            let slots = Mutex::new(vec![None; instance.clusters.len()]);
            thread::scope(|scope| {
                for _ in 0..workers {
                    scope.spawn(|| loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= instance.clusters.len() {
                            break;
                        }
                        let result = solve_one(i);
                        slots.lock().expect("no worker panicked")[i] = Some(result);
                    });
                }
            });
            slots
                .into_inner()
                .expect("no worker panicked")
                .into_iter()
                .map(|r| r.expect("every cluster solved"))
                .collect()
        } else {
            (0..instance.clusters.len()).map(solve_one).collect()
        };

    let per_cluster = results.into_iter().collect::<Result<BTreeMap<_, _>, _>>()?;
    Ok(ClusterSolveReport::merge(per_cluster))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("joint model has {variables} variables, above the limit of {limit}")]
    TooLarge { variables: usize, limit: usize },
    #[error(transparent)]
    Certification(#[from] CertificationError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionReport {
    pub joint: SolveReport,
    pub parts: ClusterSolveReport,
}

impl DecompositionReport {
    pub fn joint_objective(&self) -> Option<Attendance> {
        self.joint.objective
    }

    pub fn sum_of_parts(&self) -> Option<Attendance> {
        self.parts
            .is_optimal()
            .then_some(self.parts.combined_objective)
    }

    /// Joint optimum equals the sum of cluster optima (or both are
    /// infeasible).
    pub fn objectives_equal(&self) -> bool {
        self.joint.status == self.parts.overall_status
            && self.joint_objective() == self.sum_of_parts()
    }

    /// The joint schedule is the union of the cluster schedules.
    pub fn schedules_equal(&self) -> bool {
        match &self.joint.schedule {
            Some(s) => *s == self.parts.schedule(),
            None => !self.parts.is_optimal(),
        }
    }
}

/// Solves all clusters as one model and compares with per-cluster solves.
pub fn verify_decomposition(
    instance: &MultiClusterInstance,
    max_variables: usize,
) -> Result<DecompositionReport, DecompositionError> {
    let joint_model = build_joint_model(instance);
    if joint_model.variable_count() > max_variables {
        return Err(DecompositionError::TooLarge {
            variables: joint_model.variable_count(),
            limit: max_variables,
        });
    }
    let joint = certify(&joint_model)?;
    let parts = solve_all(instance, false)?;
    Ok(DecompositionReport { joint, parts })
}

fn haversine_km(a: Coordinates, b: Coordinates) -> f64 {
    const EARTH_RADIUS_KM: f64 = 6371.0;
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Groups locations whose great-circle distance chains within
/// `threshold_km`. Labels are 0-based, numbered by first appearance.
pub fn derive_clusters(coords: &[Coordinates], threshold_km: f64) -> Vec<usize> {
    let n = coords.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if haversine_km(coords[i], coords[j]) <= threshold_km {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut label_of_root = BTreeMap::new();
    (0..n)
        .map(|i| {
            let root = find(&mut parent, i);
            let next = label_of_root.len();
            *label_of_root.entry(root).or_insert(next)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::load_instance;
    use crate::synth::{random_multi_cluster, synth_document, RandomClusterSpec, SynthParams};

    fn c(lat: f64, lon: f64) -> Coordinates {
        Coordinates { lat, lon }
    }

    #[test]
    fn haversine_known_distance() {
        // Toronto to Montreal, roughly 504 km.
        let d = haversine_km(c(43.6532, -79.3832), c(45.5019, -73.5674));
        assert!((d - 504.0).abs() < 5.0, "{d}");
        assert_eq!(haversine_km(c(1.0, 2.0), c(1.0, 2.0)), 0.0);
    }

    #[test]
    fn clusters_chain_transitively() {
        // 0.04 degrees of latitude is about 4.4 km.
        let coords = [
            c(0.0, 0.0),
            c(0.04, 0.0),
            c(0.08, 0.0),
            c(10.0, 10.0),
            c(0.0, 0.0),
        ];
        assert_eq!(derive_clusters(&coords, 5.0), [0, 0, 0, 1, 0]);
        assert_eq!(derive_clusters(&coords, 1.0), [0, 1, 2, 3, 0]);
        assert!(derive_clusters(&[], 5.0).is_empty());
    }

    fn two_crossover_copies() -> MultiClusterInstance {
        let text = crate::CROSSOVER_INSTANCE;
        let mut doc = crate::domain::parse_document(text).unwrap();
        let mut second = doc.clone();
        for l in &mut second.locations {
            l.id += 10;
            l.cluster_id = Some("second".into());
        }
        for s in &mut second.screens {
            s.id += 9;
            s.location_id += 10;
        }
        for e in &mut second.forecast {
            e.screen_id += 9;
        }
        doc.locations.extend(second.locations);
        doc.screens.extend(second.screens);
        doc.forecast.extend(second.forecast);
        doc.to_instance().unwrap()
    }

    #[test]
    fn crossover_copies_add_up() {
        let multi = two_crossover_copies();
        let report = solve_all(&multi, false).unwrap();
        assert!(report.is_optimal());
        assert_eq!(report.combined_objective, Attendance::from_units(2 * 2615));
        let dec = verify_decomposition(&multi, DEFAULT_JOINT_VARIABLE_LIMIT).unwrap();
        assert!(dec.objectives_equal());
        assert!(dec.schedules_equal());
        assert_eq!(dec.joint_objective(), Some(Attendance::from_units(5230)));
    }

    #[test]
    fn single_cluster_matches_certify() {
        let multi = load_instance(crate::CROSSOVER_INSTANCE).unwrap();
        let report = solve_all(&multi, true).unwrap();
        let direct = certify(&build_model(multi.single().unwrap())).unwrap();
        assert_eq!(report.per_cluster.values().next().unwrap(), &direct);
        assert_eq!(report.combined_objective, direct.objective.unwrap());
    }

    #[test]
    fn infeasible_cluster_reported_alongside_optimal() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let specs = [
            RandomClusterSpec {
                screens: 3,
                configurations: 4,
                coeff_range: (200, 299),
            },
            RandomClusterSpec {
                screens: 3,
                configurations: 2,
                coeff_range: (200, 299),
            },
        ];
        let multi = random_multi_cluster(&mut rng, &specs);
        assert!(crate::domain::validate_multi_cluster(&multi).is_empty());
        let report = solve_all(&multi, false).unwrap();
        assert_eq!(report.overall_status, SolveStatus::Infeasible);
        assert_eq!(report.per_cluster.len(), 2);
        let (ok, bad): (Vec<_>, Vec<_>) = report.per_cluster.values().partition(|r| r.is_optimal());
        assert_eq!((ok.len(), bad.len()), (1, 1));
        assert!(bad[0]
            .diagnostic
            .as_ref()
            .unwrap()
            .contains("3 screens but only 2"));
        assert_eq!(report.combined_objective, ok[0].objective.unwrap());

        let dec = verify_decomposition(&multi, DEFAULT_JOINT_VARIABLE_LIMIT).unwrap();
        assert_eq!(dec.joint.status, SolveStatus::Infeasible);
        assert!(dec.objectives_equal());
    }

    #[test]
    fn parallel_and_sequential_identical() {
        let doc = synth_document(&SynthParams {
            screens: 20,
            films: 6,
            clusters: 5,
            seed: 9,
            ..Default::default()
        })
        .unwrap();
        let multi = doc.to_instance().unwrap();
        let a = solve_all(&multi, false).unwrap();
        let b = solve_all(&multi, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_cluster.len(), 5);
    }

    #[test]
    fn joint_size_limit() {
        let multi = two_crossover_copies();
        let err = verify_decomposition(&multi, 100).unwrap_err();
        assert_eq!(
            err,
            DecompositionError::TooLarge {
                variables: 288,
                limit: 100
            }
        );
    }
}
