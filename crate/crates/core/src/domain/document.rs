//! The on-disk instance document (JSON) and its conversion to validated
//! instances.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::validate::validate_multi_cluster;
use super::{
    Attendance, ClusterId, ClusterInstance, ConfigIndex, Coordinates, Film, FilmId, ForecastMatrix,
    Location, LocationId, MultiClusterInstance, OperatingWindow, Screen, ScreenId,
    ShowtimeConfiguration, TimeOfDay, Violation, ViolationKind,
};
use crate::cluster::{derive_clusters, DEFAULT_NEIGHBOUR_KM};
use crate::confgen;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub stagger_interval_minutes: u32,
    /// Buffer added to every runtime when configurations are generated.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub turnover_minutes: u32,
    /// Neighbour distance for locations without an explicit cluster id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_threshold_km: Option<f64>,
    pub locations: Vec<LocationEntry>,
    pub screens: Vec<ScreenEntry>,
    pub films: Vec<FilmEntry>,
    /// Generated from runtimes and windows when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configurations: Option<Vec<ConfigurationEntry>>,
    #[serde(default)]
    pub forecast: Vec<ForecastEntry>,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationEntry {
    pub id: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_id: Option<String>,
    pub open_time: TimeOfDay,
    pub last_showtime: TimeOfDay,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenEntry {
    pub id: u64,
    pub location_id: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilmEntry {
    pub id: u32,
    pub title: String,
    pub runtime_minutes: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationEntry {
    pub film_id: u32,
    pub config_index: u32,
    pub showtimes: Vec<TimeOfDay>,
    /// Restricts the entry to one cluster; entries without it apply to
    /// every cluster that has no cluster-specific entry for the film.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastEntry {
    pub screen_id: u64,
    pub film_id: u32,
    pub config_index: u32,
    pub attendance: Attendance,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("malformed instance document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{}", ViolationList(.0))]
    Invalid(Vec<Violation>),
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn parse_document(text: &str) -> Result<InstanceDocument, serde_json::Error> {
    serde_json::from_str(text)
}

/// Parses and validates an instance document.
///
/// Explicit configurations are kept as written; missing ones are generated.
/// Screens are renumbered `1..=S` in file order.
pub fn load_instance(text: &str) -> Result<MultiClusterInstance, LoadError> {
    let doc = parse_document(text)?;
    doc.to_instance().map_err(LoadError::Invalid)
}

impl InstanceDocument {
    /// Cluster id of every location, in document order, deriving missing ones
    /// from coordinates.
    pub fn resolve_clusters(&self) -> Result<Vec<ClusterId>, Vec<Violation>> {
        let mut out = Vec::new();
        let explicit: Vec<Option<&str>> = self
            .locations
            .iter()
            .map(|l| l.cluster_id.as_deref())
            .collect();
        if explicit.iter().all(Option::is_some) {
            return Ok(explicit
                .into_iter()
                .map(|id| ClusterId::new(id.unwrap_or_default()))
                .collect());
        }

        let mut missing = Vec::new();
        let mut coords = Vec::new();
        for l in self.locations.iter().filter(|l| l.cluster_id.is_none()) {
            match (l.lat, l.lon) {
                (Some(lat), Some(lon)) => coords.push(Coordinates { lat, lon }),
                _ => missing.push(Violation::new(
                    ViolationKind::MissingClusterId,
                    format!("location {} has neither cluster_id nor coordinates", l.id),
                )),
            }
        }
        if !missing.is_empty() {
            return Err(missing);
        }

        let threshold = self.cluster_threshold_km.unwrap_or(DEFAULT_NEIGHBOUR_KM);
        let mut labels = derive_clusters(&coords, threshold).into_iter();
        for loc in &self.locations {
            out.push(match &loc.cluster_id {
                Some(id) => ClusterId::new(id.clone()),
                None => ClusterId::new(format!("auto-{}", labels.next().unwrap_or(0) + 1)),
            });
        }
        Ok(out)
    }

    fn structural_violations(&self) -> Vec<Violation> {
        use ViolationKind::*;
        let mut out = Vec::new();
        if self.stagger_interval_minutes == 0 {
            out.push(Violation::new(NonPositiveStaggerInterval, ""));
        }
        if self.films.is_empty() {
            out.push(Violation::new(NoFilms, ""));
        }
        if self.locations.is_empty() {
            out.push(Violation::new(NoLocations, ""));
        }
        if self.screens.is_empty() {
            out.push(Violation::new(NoScreens, ""));
        }

        let mut locations = BTreeSet::new();
        for loc in &self.locations {
            if loc.id == 0 {
                out.push(Violation::new(NonPositiveIdentifier, "location 0"));
            }
            if !locations.insert(loc.id) {
                out.push(Violation::new(
                    DuplicateLocationId,
                    format!("location {}", loc.id),
                ));
            }
            if loc.cluster_id.as_deref() == Some("") {
                out.push(Violation::new(
                    EmptyClusterId,
                    format!("location {}", loc.id),
                ));
            }
        }
        let mut screens = BTreeSet::new();
        for screen in &self.screens {
            if screen.id == 0 {
                out.push(Violation::new(NonPositiveIdentifier, "screen 0"));
            }
            if !screens.insert(screen.id) {
                out.push(Violation::new(
                    DuplicateScreenId,
                    format!("screen {}", screen.id),
                ));
            }
            if !locations.contains(&screen.location_id) {
                out.push(Violation::new(
                    UnknownLocation,
                    format!(
                        "screen {} references location {}",
                        screen.id, screen.location_id
                    ),
                ));
            }
        }
        let mut films = BTreeSet::new();
        for film in &self.films {
            if film.id == 0 {
                out.push(Violation::new(NonPositiveIdentifier, "film 0"));
            }
            if !films.insert(film.id) {
                out.push(Violation::new(DuplicateFilmId, format!("film {}", film.id)));
            }
        }
        let mut forecast = BTreeSet::new();
        for e in &self.forecast {
            let label = format!(
                "(screen {}, film {}, config {})",
                e.screen_id, e.film_id, e.config_index
            );
            if !forecast.insert((e.screen_id, e.film_id, e.config_index)) {
                out.push(Violation::new(DuplicateForecastEntry, label.clone()));
            }
            if !screens.contains(&e.screen_id) {
                out.push(Violation::new(UnknownForecastEntry, label));
            }
        }
        out
    }

    /// Builds the validated instance, or every violation found.
    pub fn to_instance(&self) -> Result<MultiClusterInstance, Vec<Violation>> {
        let structural = self.structural_violations();
        if !structural.is_empty() {
            return Err(structural);
        }
        let cluster_of_location = self.resolve_clusters()?;
        let cluster_ids: BTreeSet<ClusterId> = cluster_of_location.iter().cloned().collect();

        let locations: Vec<(ClusterId, Location)> = self
            .locations
            .iter()
            .zip(&cluster_of_location)
            .map(|(l, cid)| {
                let coordinates = match (l.lat, l.lon) {
                    (Some(lat), Some(lon)) => Some(Coordinates { lat, lon }),
                    _ => None,
                };
                (
                    cid.clone(),
                    Location {
                        id: LocationId(l.id),
                        name: l.name.clone(),
                        cluster_id: cid.clone(),
                        open_time: l.open_time,
                        last_showtime: l.last_showtime,
                        coordinates,
                    },
                )
            })
            .collect();
        let location_cluster: HashMap<u32, &ClusterId> = self
            .locations
            .iter()
            .map(|l| l.id)
            .zip(&cluster_of_location)
            .collect();

        let screens: Vec<Screen> = self
            .screens
            .iter()
            .enumerate()
            .map(|(i, s)| Screen {
                id: ScreenId(i as u32 + 1),
                external_id: s.id,
                location_id: LocationId(s.location_id),
            })
            .collect();
        let internal_id: HashMap<u64, ScreenId> =
            screens.iter().map(|s| (s.external_id, s.id)).collect();

        let mut films: Vec<Film> = self
            .films
            .iter()
            .map(|f| Film {
                id: FilmId(f.id),
                title: f.title.clone(),
                runtime_minutes: f.runtime_minutes,
            })
            .collect();
        films.sort_by_key(|f| f.id);

        let mut violations = Vec::new();
        if let Some(entries) = &self.configurations {
            for e in entries {
                if let Some(cid) = &e.cluster_id {
                    if !cluster_ids.contains(&ClusterId::new(cid.clone())) {
                        violations.push(Violation::new(
                            ViolationKind::UnknownCluster,
                            format!(
                                "film {} config {} names cluster {cid:?}",
                                e.film_id, e.config_index
                            ),
                        ));
                    }
                }
            }
        }

        let mut clusters = Vec::new();
        for cid in &cluster_ids {
            let cluster_locations: Vec<Location> = locations
                .iter()
                .filter(|(c, _)| c == cid)
                .map(|(_, l)| l.clone())
                .collect();
            let cluster_screens: Vec<Screen> = screens
                .iter()
                .filter(|s| location_cluster.get(&s.location_id.get()) == Some(&cid))
                .cloned()
                .collect();
            let window = cluster_locations
                .iter()
                .map(Location::window)
                .reduce(OperatingWindow::union)
                .expect("every resolved cluster has a location");

            let configurations = match &self.configurations {
                Some(entries) => select_configurations(entries, cid),
                None => {
                    let mut generated = Vec::new();
                    for film in &films {
                        match confgen::generate_configurations(
                            film,
                            window,
                            self.stagger_interval_minutes,
                            self.turnover_minutes,
                        ) {
                            Ok(cfgs) => generated.extend(cfgs),
                            Err(e) => violations.push(Violation::new(
                                ViolationKind::NoFeasibleConfiguration,
                                e.to_string(),
                            )),
                        }
                    }
                    generated
                }
            };

            let cluster_screen_ids: BTreeSet<ScreenId> =
                cluster_screens.iter().map(|s| s.id).collect();
            let forecast: ForecastMatrix = self
                .forecast
                .iter()
                .filter_map(|e| {
                    let sid = internal_id[&e.screen_id];
                    cluster_screen_ids.contains(&sid).then_some((
                        (sid, FilmId(e.film_id), ConfigIndex(e.config_index)),
                        e.attendance,
                    ))
                })
                .collect();

            clusters.push(ClusterInstance {
                cluster_id: cid.clone(),
                locations: cluster_locations,
                screens: cluster_screens,
                films: films.clone(),
                configurations,
                stagger_interval_minutes: self.stagger_interval_minutes,
                forecast,
            });
        }

        let instance = MultiClusterInstance::new(clusters);
        violations.extend(validate_multi_cluster(&instance));
        if violations.is_empty() {
            Ok(instance)
        } else {
            Err(violations)
        }
    }

    /// Document describing `instance`; loading it again yields an equal
    /// instance.
    pub fn from_instance(instance: &MultiClusterInstance) -> InstanceDocument {
        let first = instance.clusters.first();
        let stagger_interval_minutes = first.map_or(0, |c| c.stagger_interval_minutes);

        let locations = instance
            .clusters
            .iter()
            .flat_map(|c| c.locations.iter())
            .map(|l| LocationEntry {
                id: l.id.get(),
                name: l.name.clone(),
                cluster_id: Some(l.cluster_id.0.clone()),
                open_time: l.open_time,
                last_showtime: l.last_showtime,
                lat: l.coordinates.map(|c| c.lat),
                lon: l.coordinates.map(|c| c.lon),
            })
            .collect();

        let mut all_screens: Vec<&Screen> = instance
            .clusters
            .iter()
            .flat_map(|c| c.screens.iter())
            .collect();
        all_screens.sort_by_key(|s| s.id);
        let external: HashMap<ScreenId, u64> =
            all_screens.iter().map(|s| (s.id, s.external_id)).collect();
        let screens = all_screens
            .iter()
            .map(|s| ScreenEntry {
                id: s.external_id,
                location_id: s.location_id.get(),
            })
            .collect();

        let films = first
            .map(|c| {
                c.films
                    .iter()
                    .map(|f| FilmEntry {
                        id: f.id.get(),
                        title: f.title.clone(),
                        runtime_minutes: f.runtime_minutes,
                    })
                    .collect()
            })
            .unwrap_or_default();

        let shared = instance
            .clusters
            .windows(2)
            .all(|w| w[0].configurations == w[1].configurations);
        let entry = |cfg: &ShowtimeConfiguration, cluster: Option<&ClusterId>| ConfigurationEntry {
            film_id: cfg.film_id.get(),
            config_index: cfg.config_index.get(),
            showtimes: cfg.showtimes.clone(),
            cluster_id: cluster.map(|c| c.0.clone()),
        };
        let configurations = if shared {
            first
                .map(|c| {
                    c.configurations
                        .iter()
                        .map(|cfg| entry(cfg, None))
                        .collect()
                })
                .unwrap_or_default()
        } else {
            instance
                .clusters
                .iter()
                .flat_map(|c| c.configurations.iter().map(move |cfg| (cfg, &c.cluster_id)))
                .map(|(cfg, cid)| entry(cfg, Some(cid)))
                .collect()
        };

        let mut forecast: Vec<((ScreenId, FilmId, ConfigIndex), Attendance)> = instance
            .clusters
            .iter()
            .flat_map(|c| c.forecast.iter())
            .collect();
        forecast.sort_by_key(|(k, _)| *k);
        let forecast = forecast
            .into_iter()
            .map(|((s, f, c), attendance)| ForecastEntry {
                screen_id: external[&s],
                film_id: f.get(),
                config_index: c.get(),
                attendance,
            })
            .collect();

        InstanceDocument {
            stagger_interval_minutes,
            turnover_minutes: 0,
            cluster_threshold_km: None,
            locations,
            screens,
            films,
            configurations: Some(configurations),
            forecast,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("document serializes");
        text.push('\n');
        text
    }
}

/// Configurations that apply to `cluster`, sorted by (film, index).
fn select_configurations(
    entries: &[ConfigurationEntry],
    cluster: &ClusterId,
) -> Vec<ShowtimeConfiguration> {
    let specific: BTreeSet<u32> = entries
        .iter()
        .filter(|e| e.cluster_id.as_deref() == Some(cluster.as_str()))
        .map(|e| e.film_id)
        .collect();
    let mut out: Vec<ShowtimeConfiguration> = entries
        .iter()
        .filter(|e| match e.cluster_id.as_deref() {
            Some(c) => c == cluster.as_str(),
            None => !specific.contains(&e.film_id),
        })
        .map(|e| ShowtimeConfiguration {
            film_id: FilmId(e.film_id),
            config_index: ConfigIndex(e.config_index),
            showtimes: e.showtimes.clone(),
        })
        .collect();
    out.sort_by_key(|c| c.key());
    out
}

/// Per-cluster widest windows, keyed by the resolved cluster id.
pub fn cluster_windows(
    doc: &InstanceDocument,
    clusters: &[ClusterId],
) -> BTreeMap<ClusterId, OperatingWindow> {
    let mut out: BTreeMap<ClusterId, OperatingWindow> = BTreeMap::new();
    for (loc, cid) in doc.locations.iter().zip(clusters) {
        let w = OperatingWindow {
            open: loc.open_time,
            last: loc.last_showtime,
        };
        out.entry(cid.clone())
            .and_modify(|cur| *cur = cur.union(w))
            .or_insert(w);
    }
    out
}
