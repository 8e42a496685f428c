use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{ClusterInstance, ConfigIndex, FilmId, MultiClusterInstance, Screen, ScreenId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    NoFilms,
    NoScreens,
    NoLocations,
    NonPositiveStaggerInterval,
    NonPositiveIdentifier,
    DuplicateFilmId,
    DuplicateLocationId,
    DuplicateScreenId,
    DuplicateConfiguration,
    DuplicateForecastEntry,
    DuplicateClusterId,
    NonPositiveRuntime,
    EmptyClusterId,
    MissingClusterId,
    InvertedWindow,
    LocationOutsideCluster,
    UnknownLocation,
    ScreenOutsideCluster,
    ScreenIndexing,
    UnknownFilm,
    UnknownCluster,
    EmptyShowtimes,
    NonIncreasingShowtimes,
    ShowtimeOutsideWindow,
    FilmWithoutConfiguration,
    NoFeasibleConfiguration,
    MissingForecastEntry,
    UnknownForecastEntry,
    NegativeForecast,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        use ViolationKind::*;
        match self {
            NoFilms => "no films",
            NoScreens => "no screens",
            NoLocations => "no locations",
            NonPositiveStaggerInterval => "stagger interval must be positive",
            NonPositiveIdentifier => "identifier must be positive",
            DuplicateFilmId => "duplicate film id",
            DuplicateLocationId => "duplicate location id",
            DuplicateScreenId => "duplicate screen id",
            DuplicateConfiguration => "duplicate configuration",
            DuplicateForecastEntry => "duplicate forecast entry",
            DuplicateClusterId => "duplicate cluster id",
            NonPositiveRuntime => "runtime must be positive",
            EmptyClusterId => "empty cluster id",
            MissingClusterId => "missing cluster id",
            InvertedWindow => "open time after last showtime",
            LocationOutsideCluster => "location outside cluster",
            UnknownLocation => "unknown location",
            ScreenOutsideCluster => "screen outside cluster",
            ScreenIndexing => "screen ids not contiguous",
            UnknownFilm => "unknown film",
            UnknownCluster => "unknown cluster",
            EmptyShowtimes => "empty showtimes",
            NonIncreasingShowtimes => "non-increasing showtimes",
            ShowtimeOutsideWindow => "showtime outside operating window",
            FilmWithoutConfiguration => "film without configuration",
            NoFeasibleConfiguration => "no feasible configuration",
            MissingForecastEntry => "missing forecast entry",
            UnknownForecastEntry => "unknown forecast entry",
            NegativeForecast => "negative forecast",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One failed invariant, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, message: impl Into<String>) -> Self {
        Violation {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.message.is_empty() {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "{}: {}", self.kind, self.message)
        }
    }
}

fn screen_label(screen: &Screen) -> String {
    format!("screen {}", screen.external_id)
}

/// Checks every invariant of a single-cluster instance. An empty result
/// means the instance is well formed.
pub fn validate_instance(instance: &ClusterInstance) -> Vec<Violation> {
    use ViolationKind::*;
    let mut out = Vec::new();
    let cluster = &instance.cluster_id;

    if instance.stagger_interval_minutes == 0 {
        out.push(Violation::new(NonPositiveStaggerInterval, ""));
    }
    if cluster.as_str().is_empty() {
        out.push(Violation::new(EmptyClusterId, "instance"));
    }
    if instance.films.is_empty() {
        out.push(Violation::new(NoFilms, ""));
    }
    if instance.screens.is_empty() {
        out.push(Violation::new(NoScreens, ""));
    }
    if instance.locations.is_empty() {
        out.push(Violation::new(NoLocations, ""));
    }

    let mut film_ids = BTreeSet::new();
    for film in &instance.films {
        if film.id.get() == 0 {
            out.push(Violation::new(NonPositiveIdentifier, "film 0"));
        }
        if !film_ids.insert(film.id) {
            out.push(Violation::new(DuplicateFilmId, format!("film {}", film.id)));
        }
        if film.runtime_minutes == 0 {
            out.push(Violation::new(
                NonPositiveRuntime,
                format!("film {}", film.id),
            ));
        }
    }

    let mut location_ids = BTreeSet::new();
    for loc in &instance.locations {
        if !location_ids.insert(loc.id) {
            out.push(Violation::new(
                DuplicateLocationId,
                format!("location {}", loc.id),
            ));
        }
        if loc.cluster_id.as_str().is_empty() {
            out.push(Violation::new(
                EmptyClusterId,
                format!("location {}", loc.id),
            ));
        } else if &loc.cluster_id != cluster {
            out.push(Violation::new(
                LocationOutsideCluster,
                format!(
                    "location {} belongs to {:?}, not {:?}",
                    loc.id, loc.cluster_id.0, cluster.0
                ),
            ));
        }
        if loc.open_time > loc.last_showtime {
            out.push(Violation::new(
                InvertedWindow,
                format!(
                    "location {} ({} > {})",
                    loc.id, loc.open_time, loc.last_showtime
                ),
            ));
        }
    }

    let mut screen_ids = BTreeSet::new();
    for screen in &instance.screens {
        if screen.id.get() == 0 {
            out.push(Violation::new(NonPositiveIdentifier, screen_label(screen)));
        }
        if !screen_ids.insert(screen.id) {
            out.push(Violation::new(
                DuplicateScreenId,
                format!("screen {}", screen.id),
            ));
        }
        let in_cluster = instance
            .location(screen.location_id)
            .is_some_and(|l| &l.cluster_id == cluster);
        if !in_cluster {
            out.push(Violation::new(
                ScreenOutsideCluster,
                format!(
                    "{} at location {}",
                    screen_label(screen),
                    screen.location_id
                ),
            ));
        }
    }

    let window = instance.window();
    let mut configs: BTreeMap<FilmId, BTreeSet<ConfigIndex>> = BTreeMap::new();
    for cfg in &instance.configurations {
        let label = format!("film {} config {}", cfg.film_id, cfg.config_index);
        if !film_ids.contains(&cfg.film_id) {
            out.push(Violation::new(UnknownFilm, label.clone()));
        }
        if cfg.config_index.get() == 0 {
            out.push(Violation::new(NonPositiveIdentifier, label.clone()));
        }
        if !configs
            .entry(cfg.film_id)
            .or_default()
            .insert(cfg.config_index)
        {
            out.push(Violation::new(DuplicateConfiguration, label.clone()));
        }
        if cfg.showtimes.is_empty() {
            out.push(Violation::new(EmptyShowtimes, label.clone()));
        }
        if cfg.showtimes.windows(2).any(|w| w[0] >= w[1]) {
            let times: Vec<String> = cfg.showtimes.iter().map(ToString::to_string).collect();
            out.push(Violation::new(
                NonIncreasingShowtimes,
                format!("{label} ({})", times.join(", ")),
            ));
        }
        if let Some(window) = window {
            for t in cfg.showtimes.iter().filter(|t| !window.contains(**t)) {
                out.push(Violation::new(
                    ShowtimeOutsideWindow,
                    format!("{label} at {t} (window {}-{})", window.open, window.last),
                ));
            }
        }
    }
    for film in &instance.films {
        if !configs.contains_key(&film.id) {
            out.push(Violation::new(
                FilmWithoutConfiguration,
                format!("film {}", film.id),
            ));
        }
    }

    for screen in &instance.screens {
        for cfg in &instance.configurations {
            if instance
                .forecast
                .get(screen.id, cfg.film_id, cfg.config_index)
                .is_none()
            {
                out.push(Violation::new(
                    MissingForecastEntry,
                    format!(
                        "(screen {}, film {}, config {})",
                        screen.external_id, cfg.film_id, cfg.config_index
                    ),
                ));
            }
        }
    }
    for ((screen_id, film, config), value) in instance.forecast.iter() {
        let screen = instance.screen(screen_id);
        let label = match screen {
            Some(s) => format!("(screen {}, film {film}, config {config})", s.external_id),
            None => format!("(screen #{screen_id}, film {film}, config {config})"),
        };
        if screen.is_none() || instance.configuration(film, config).is_none() {
            out.push(Violation::new(UnknownForecastEntry, label));
        } else if value.is_negative() {
            out.push(Violation::new(
                NegativeForecast,
                format!("{label} = {value}"),
            ));
        }
    }

    out
}

/// Cluster-level checks plus the cross-cluster invariants: distinct cluster
/// ids and globally contiguous screen indexing.
pub fn validate_multi_cluster(instance: &MultiClusterInstance) -> Vec<Violation> {
    use ViolationKind::*;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for cluster in &instance.clusters {
        if !seen.insert(&cluster.cluster_id) {
            out.push(Violation::new(
                DuplicateClusterId,
                format!("cluster {:?}", cluster.cluster_id.0),
            ));
        }
        out.extend(validate_instance(cluster));
    }

    let mut ids: Vec<ScreenId> = instance
        .clusters
        .iter()
        .flat_map(|c| c.screens.iter().map(|s| s.id))
        .collect();
    ids.sort();
    for pair in ids.windows(2) {
        if pair[0] == pair[1] {
            out.push(Violation::new(
                DuplicateScreenId,
                format!("screen {} in more than one cluster", pair[0]),
            ));
        }
    }
    ids.dedup();
    if ids
        .iter()
        .enumerate()
        .any(|(i, id)| id.get() as usize != i + 1)
    {
        out.push(Violation::new(ScreenIndexing, "expected 1..S"));
    }
    out
}
