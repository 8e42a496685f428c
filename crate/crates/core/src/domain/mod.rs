//! Instance data: films, screens, locations, showtime configurations and the
//! attendance forecast, plus loading and validation.
//!
//! Every other module consumes the types defined here. Instances are
//! immutable once loaded.

mod document;
mod time;
mod units;
mod validate;

pub use document::{
    cluster_windows, load_instance, parse_document, ConfigurationEntry, FilmEntry, ForecastEntry,
    InstanceDocument, LoadError, LocationEntry, ScreenEntry,
};
pub use time::{TimeOfDay, TimeParseError};
pub use units::{Attendance, AttendanceParseError};
pub use validate::{validate_instance, validate_multi_cluster, Violation, ViolationKind};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn get(self) -> u32 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_newtype!(
    /// Screen index, `1..=S` after loading.
    ScreenId
);
id_newtype!(FilmId);
id_newtype!(LocationId);
id_newtype!(
    /// 1-based configuration number within one film.
    ConfigIndex
);

/// Identifier of a cluster of neighbouring locations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub String);

impl ClusterId {
    pub fn new(id: impl Into<String>) -> Self {
        ClusterId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Film {
    pub id: FilmId,
    pub title: String,
    pub runtime_minutes: u32,
}

/// Geographic position in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: LocationId,
    pub name: String,
    pub cluster_id: ClusterId,
    pub open_time: TimeOfDay,
    pub last_showtime: TimeOfDay,
    pub coordinates: Option<Coordinates>,
}

impl Location {
    pub fn window(&self) -> OperatingWindow {
        OperatingWindow {
            open: self.open_time,
            last: self.last_showtime,
        }
    }
}

/// First and last admissible showtime of a day, both inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatingWindow {
    pub open: TimeOfDay,
    pub last: TimeOfDay,
}

impl OperatingWindow {
    pub fn contains(&self, t: TimeOfDay) -> bool {
        self.open <= t && t <= self.last
    }

    /// Smallest window covering both.
    pub fn union(self, other: OperatingWindow) -> OperatingWindow {
        OperatingWindow {
            open: self.open.min(other.open),
            last: self.last.max(other.last),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Screen {
    pub id: ScreenId,
    /// Identifier used in the source document.
    pub external_id: u64,
    pub location_id: LocationId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShowtimeConfiguration {
    pub film_id: FilmId,
    pub config_index: ConfigIndex,
    pub showtimes: Vec<TimeOfDay>,
}

impl ShowtimeConfiguration {
    pub fn key(&self) -> (FilmId, ConfigIndex) {
        (self.film_id, self.config_index)
    }
}

/// Predicted attendance per (screen, film, configuration).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ForecastMatrix {
    entries: BTreeMap<(ScreenId, FilmId, ConfigIndex), Attendance>,
}

impl ForecastMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the previous value if the triple was already present.
    pub fn insert(
        &mut self,
        screen: ScreenId,
        film: FilmId,
        config: ConfigIndex,
        value: Attendance,
    ) -> Option<Attendance> {
        self.entries.insert((screen, film, config), value)
    }

    pub fn get(&self, screen: ScreenId, film: FilmId, config: ConfigIndex) -> Option<Attendance> {
        self.entries.get(&(screen, film, config)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((ScreenId, FilmId, ConfigIndex), Attendance)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// Applies `f` to every coefficient.
    pub fn map(&self, mut f: impl FnMut(Attendance) -> Attendance) -> ForecastMatrix {
        ForecastMatrix {
            entries: self.entries.iter().map(|(k, v)| (*k, f(*v))).collect(),
        }
    }
}

impl FromIterator<((ScreenId, FilmId, ConfigIndex), Attendance)> for ForecastMatrix {
    fn from_iter<I: IntoIterator<Item = ((ScreenId, FilmId, ConfigIndex), Attendance)>>(
        iter: I,
    ) -> Self {
        ForecastMatrix {
            entries: iter.into_iter().collect(),
        }
    }
}

/// One cluster of neighbouring locations, solved as a single model.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterInstance {
    pub cluster_id: ClusterId,
    pub locations: Vec<Location>,
    pub screens: Vec<Screen>,
    pub films: Vec<Film>,
    pub configurations: Vec<ShowtimeConfiguration>,
    pub stagger_interval_minutes: u32,
    pub forecast: ForecastMatrix,
}

impl ClusterInstance {
    pub fn screen_count(&self) -> usize {
        self.screens.len()
    }

    pub fn configuration_count(&self) -> usize {
        self.configurations.len()
    }

    pub fn film(&self, id: FilmId) -> Option<&Film> {
        self.films.iter().find(|f| f.id == id)
    }

    pub fn location(&self, id: LocationId) -> Option<&Location> {
        self.locations.iter().find(|l| l.id == id)
    }

    pub fn screen(&self, id: ScreenId) -> Option<&Screen> {
        self.screens.iter().find(|s| s.id == id)
    }

    pub fn configuration(
        &self,
        film: FilmId,
        config: ConfigIndex,
    ) -> Option<&ShowtimeConfiguration> {
        self.configurations
            .iter()
            .find(|c| c.film_id == film && c.config_index == config)
    }

    /// Widest operating window over the cluster's locations.
    pub fn window(&self) -> Option<OperatingWindow> {
        self.locations
            .iter()
            .map(Location::window)
            .reduce(OperatingWindow::union)
    }

    /// Copy of this instance with every forecast coefficient transformed.
    pub fn map_forecast(&self, f: impl FnMut(Attendance) -> Attendance) -> ClusterInstance {
        ClusterInstance {
            forecast: self.forecast.map(f),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiClusterInstance {
    /// Sorted by cluster id.
    pub clusters: Vec<ClusterInstance>,
}

impl MultiClusterInstance {
    pub fn new(mut clusters: Vec<ClusterInstance>) -> Self {
        clusters.sort_by(|a, b| a.cluster_id.cmp(&b.cluster_id));
        MultiClusterInstance { clusters }
    }

    pub fn screen_count(&self) -> usize {
        self.clusters
            .iter()
            .map(ClusterInstance::screen_count)
            .sum()
    }

    /// The only cluster, if there is exactly one.
    pub fn single(&self) -> Option<&ClusterInstance> {
        match self.clusters.as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }

    pub fn cluster(&self, id: &ClusterId) -> Option<&ClusterInstance> {
        self.clusters.iter().find(|c| &c.cluster_id == id)
    }
}
