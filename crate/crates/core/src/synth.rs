//! Seeded synthetic instances for testing and benchmarking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::confgen::generate_configurations;
use crate::domain::{
    Attendance, ClusterId, ClusterInstance, ConfigurationEntry, Film, FilmEntry, FilmId,
    ForecastEntry, ForecastMatrix, InstanceDocument, Location, LocationEntry, LocationId,
    MultiClusterInstance, OperatingWindow, Screen, ScreenEntry, ScreenId, ShowtimeConfiguration,
    TimeOfDay,
};

const OPEN: u32 = 12 * 60;
const LAST: u32 = 23 * 60;
const STAGGER: u32 = 30;

fn window() -> OperatingWindow {
    OperatingWindow {
        open: TimeOfDay::from_minutes(OPEN).expect("valid time"),
        last: TimeOfDay::from_minutes(LAST).expect("valid time"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthParams {
    pub screens: usize,
    pub films: usize,
    pub clusters: usize,
    pub seed: u64,
    /// Inclusive range of whole-unit attendance coefficients.
    pub coeff_range: (i64, i64),
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            screens: 9,
            films: 5,
            clusters: 1,
            seed: 1,
            coeff_range: (200, 299),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("--screens, --films and --clusters must be at least 1")]
    Empty,
    #[error("{clusters} clusters need at least as many screens, got {screens}")]
    TooManyClusters { clusters: usize, screens: usize },
    #[error("invalid coefficient range {0}..{1}")]
    InvalidRange(i64, i64),
}

/// Deterministic instance document: runtimes in 80..=180, a shared
/// 12:00-23:00 window, 30-minute staggering, uniform integer coefficients.
pub fn synth_document(params: &SynthParams) -> Result<InstanceDocument, SynthError> {
    let SynthParams {
        screens,
        films,
        clusters,
        seed,
        coeff_range: (lo, hi),
    } = *params;
    if screens == 0 || films == 0 || clusters == 0 {
        return Err(SynthError::Empty);
    }
    if clusters > screens {
        return Err(SynthError::TooManyClusters { clusters, screens });
    }
    if lo < 0 || lo > hi {
        return Err(SynthError::InvalidRange(lo, hi));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut locations = Vec::new();
    let mut screen_entries = Vec::new();
    for c in 0..clusters {
        let in_cluster = screens / clusters + usize::from(c < screens % clusters);
        let loc_count = in_cluster.min(3);
        let first_loc = locations.len() as u32 + 1;
        for l in 0..loc_count {
            locations.push(LocationEntry {
                id: first_loc + l as u32,
                name: format!("Cluster {} Location {}", c + 1, l + 1),
                cluster_id: Some(format!("cluster-{}", c + 1)),
                open_time: window().open,
                last_showtime: window().last,
                lat: None,
                lon: None,
            });
        }
        for s in 0..in_cluster {
            screen_entries.push(ScreenEntry {
                id: screen_entries.len() as u64 + 1,
                location_id: first_loc + (s * loc_count / in_cluster) as u32,
            });
        }
    }

    let film_entries: Vec<FilmEntry> = (1..=films as u32)
        .map(|id| FilmEntry {
            id,
            title: format!("Film {id}"),
            runtime_minutes: rng.gen_range(80..=180),
        })
        .collect();

    let mut configurations = Vec::new();
    for f in &film_entries {
        let film = Film {
            id: FilmId(f.id),
            title: f.title.clone(),
            runtime_minutes: f.runtime_minutes,
        };
        let cfgs = generate_configurations(&film, window(), STAGGER, 0)
            .expect("runtimes fit the synthetic window");
        configurations.extend(cfgs.into_iter().map(|c| ConfigurationEntry {
            film_id: c.film_id.get(),
            config_index: c.config_index.get(),
            showtimes: c.showtimes,
            cluster_id: None,
        }));
    }

    let mut forecast = Vec::new();
    for s in &screen_entries {
        for c in &configurations {
            forecast.push(ForecastEntry {
                screen_id: s.id,
                film_id: c.film_id,
                config_index: c.config_index,
                attendance: Attendance::from_units(rng.gen_range(lo..=hi)),
            });
        }
    }

    Ok(InstanceDocument {
        stagger_interval_minutes: STAGGER,
        turnover_minutes: 0,
        cluster_threshold_km: None,
        locations,
        screens: screen_entries,
        films: film_entries,
        configurations: Some(configurations),
        forecast,
    })
}

/// Size of one randomly generated cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomClusterSpec {
    pub screens: usize,
    /// Total film configurations F, at least 1.
    pub configurations: usize,
    /// Inclusive range of whole-unit coefficients.
    pub coeff_range: (i64, i64),
}

/// Random valid cluster with exactly the requested S and F. Screens are
/// numbered from 1.
pub fn random_cluster(rng: &mut impl Rng, spec: &RandomClusterSpec) -> ClusterInstance {
    random_cluster_at(rng, spec, "cluster-1", 1, 1)
}

fn random_cluster_at(
    rng: &mut impl Rng,
    spec: &RandomClusterSpec,
    cluster: &str,
    first_screen: u32,
    first_location: u32,
) -> ClusterInstance {
    assert!(spec.configurations >= 1, "at least one configuration");
    let cluster_id = ClusterId::new(cluster);
    let film_count = rng.gen_range(1..=spec.configurations.min(3));
    // Every film gets one configuration, the rest are spread at random.
    let mut per_film = vec![1usize; film_count];
    for _ in film_count..spec.configurations {
        per_film[rng.gen_range(0..film_count)] += 1;
    }

    let mut films = Vec::new();
    let mut configurations: Vec<ShowtimeConfiguration> = Vec::new();
    for (i, &count) in per_film.iter().enumerate() {
        let film = Film {
            id: FilmId(i as u32 + 1),
            title: format!("Film {}", i + 1),
            runtime_minutes: STAGGER * count as u32 - rng.gen_range(0..STAGGER),
        };
        let cfgs = generate_configurations(&film, window(), STAGGER, 0).expect("fits window");
        debug_assert_eq!(cfgs.len(), count);
        configurations.extend(cfgs);
        films.push(film);
    }

    let location_count = spec.screens.clamp(1, 3);
    let locations: Vec<Location> = (0..location_count)
        .map(|l| Location {
            id: LocationId(first_location + l as u32),
            name: format!("{cluster} location {}", l + 1),
            cluster_id: cluster_id.clone(),
            open_time: window().open,
            last_showtime: window().last,
            coordinates: None,
        })
        .collect();
    let screens: Vec<Screen> = (0..spec.screens)
        .map(|s| Screen {
            id: ScreenId(first_screen + s as u32),
            external_id: u64::from(first_screen) + s as u64,
            location_id: locations[s % location_count].id,
        })
        .collect();

    let (lo, hi) = spec.coeff_range;
    let mut forecast = ForecastMatrix::new();
    for s in &screens {
        for c in &configurations {
            forecast.insert(
                s.id,
                c.film_id,
                c.config_index,
                Attendance::from_units(rng.gen_range(lo..=hi)),
            );
        }
    }
    ClusterInstance {
        cluster_id,
        locations,
        screens,
        films,
        configurations,
        stagger_interval_minutes: STAGGER,
        forecast,
    }
}

/// Several random clusters with globally contiguous screen ids.
pub fn random_multi_cluster(
    rng: &mut impl Rng,
    specs: &[RandomClusterSpec],
) -> MultiClusterInstance {
    let mut next_screen = 1u32;
    let mut next_location = 1u32;
    let clusters = specs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let c = random_cluster_at(
                rng,
                spec,
                &format!("cluster-{:02}", i + 1),
                next_screen,
                next_location,
            );
            next_screen += spec.screens as u32;
            next_location += c.locations.len() as u32;
            c
        })
        .collect();
    MultiClusterInstance::new(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{validate_instance, validate_multi_cluster};

    #[test]
    fn same_seed_same_document() {
        let p = SynthParams::default();
        let a = synth_document(&p).unwrap().to_json();
        let b = synth_document(&p).unwrap().to_json();
        assert_eq!(a, b);
        let c = synth_document(&SynthParams { seed: 2, ..p })
            .unwrap()
            .to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn coefficients_within_range() {
        let doc = synth_document(&SynthParams::default()).unwrap();
        assert!(!doc.forecast.is_empty());
        assert!(doc
            .forecast
            .iter()
            .all(|e| (200_000..=299_000).contains(&e.attendance.milli())));
    }

    #[test]
    fn cluster_split() {
        let doc = synth_document(&SynthParams {
            screens: 7,
            clusters: 2,
            ..Default::default()
        })
        .unwrap();
        let multi = doc.to_instance().unwrap();
        assert_eq!(multi.clusters.len(), 2);
        assert_eq!(multi.clusters[0].screens.len(), 4);
        assert_eq!(multi.clusters[1].screens.len(), 3);
    }

    #[test]
    fn parameter_errors() {
        let bad = |p: SynthParams| synth_document(&p).unwrap_err();
        assert_eq!(
            bad(SynthParams {
                films: 0,
                ..Default::default()
            }),
            SynthError::Empty
        );
        assert_eq!(
            bad(SynthParams {
                screens: 2,
                clusters: 3,
                ..Default::default()
            }),
            SynthError::TooManyClusters {
                clusters: 3,
                screens: 2
            }
        );
        assert_eq!(
            bad(SynthParams {
                coeff_range: (5, 4),
                ..Default::default()
            }),
            SynthError::InvalidRange(5, 4)
        );
    }

    #[test]
    fn random_clusters_have_requested_size_and_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for screens in 1..=7 {
            for configurations in 1..=9 {
                let spec = RandomClusterSpec {
                    screens,
                    configurations,
                    coeff_range: (200, 299),
                };
                let c = random_cluster(&mut rng, &spec);
                assert_eq!(c.screen_count(), screens);
                assert_eq!(c.configuration_count(), configurations);
                assert_eq!(validate_instance(&c), vec![]);
            }
        }
        let specs = [RandomClusterSpec {
            screens: 2,
            configurations: 3,
            coeff_range: (0, 9),
        }; 3];
        let multi = random_multi_cluster(&mut rng, &specs);
        assert_eq!(validate_multi_cluster(&multi), vec![]);
        assert_eq!(multi.screen_count(), 6);
    }
}
