//! Schedule documents and their table, CSV and JSON renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterSolveReport;
use crate::domain::{Attendance, ConfigIndex, FilmId, MultiClusterInstance, ScreenId, TimeOfDay};
use crate::formulation::VariableRef;
use crate::solver::{Method, Schedule, SolveStatus};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub screen_id: ScreenId,
    /// Screen id as written in the instance document.
    pub external_id: u64,
    pub cluster_id: String,
    pub location: String,
    pub film_id: FilmId,
    pub film: String,
    pub config_index: ConfigIndex,
    pub showtimes: Vec<TimeOfDay>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster_id: String,
    pub status: SolveStatus,
    pub objective: Option<Attendance>,
    pub method: Method,
    pub certified_by: Vec<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Solver output for a whole instance. Rows are sorted by screen id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub status: SolveStatus,
    pub objective: Attendance,
    pub method: Method,
    pub certified_by: Vec<Method>,
    pub clusters: Vec<ClusterSummary>,
    pub rows: Vec<ScheduleRow>,
}

impl ScheduleDocument {
    pub fn new(instance: &MultiClusterInstance, report: &ClusterSolveReport) -> Self {
        let mut rows = Vec::new();
        let mut clusters = Vec::new();
        for cluster in &instance.clusters {
            let r = &report.per_cluster[&cluster.cluster_id];
            clusters.push(ClusterSummary {
                cluster_id: cluster.cluster_id.to_string(),
                status: r.status,
                objective: r.objective,
                method: r.method,
                certified_by: r.certified_by.clone(),
                diagnostic: r.diagnostic.clone(),
            });
            let Some(schedule) = &r.schedule else {
                continue;
            };
            for (screen_id, film_id, config_index) in schedule.iter() {
                let screen = cluster.screen(screen_id).expect("scheduled screen exists");
                let location = cluster
                    .location(screen.location_id)
                    .map_or_else(String::new, |l| l.name.clone());
                let film = cluster
                    .film(film_id)
                    .map_or_else(String::new, |f| f.title.clone());
                let showtimes = cluster
                    .configuration(film_id, config_index)
                    .map(|c| c.showtimes.clone())
                    .unwrap_or_default();
                rows.push(ScheduleRow {
                    screen_id,
                    external_id: screen.external_id,
                    cluster_id: cluster.cluster_id.to_string(),
                    location,
                    film_id,
                    film,
                    config_index,
                    showtimes,
                });
            }
        }
        rows.sort_by_key(|r| r.screen_id);

        let method = clusters.first().map_or(Method::Assignment, |c| c.method);
        let mut certified_by: Vec<Method> = clusters
            .iter()
            .flat_map(|c| c.certified_by.iter().copied())
            .collect();
        certified_by.sort();
        certified_by.dedup();
        ScheduleDocument {
            status: report.overall_status,
            objective: report.combined_objective,
            method,
            certified_by,
            clusters,
            rows,
        }
    }

    pub fn schedule(&self) -> Schedule {
        let vars: Vec<VariableRef> = self
            .rows
            .iter()
            .map(|r| VariableRef {
                screen: r.screen_id,
                film: r.film_id,
                config: r.config_index,
            })
            .collect();
        Schedule::from_variables(&vars)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("schedule serializes");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "screen_id",
            "external_id",
            "cluster_id",
            "location",
            "film_id",
            "film",
            "config_index",
            "showtimes",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.screen_id.to_string(),
                r.external_id.to_string(),
                r.cluster_id.clone(),
                r.location.clone(),
                r.film_id.to_string(),
                r.film.clone(),
                r.config_index.to_string(),
                join_times(&r.showtimes),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn to_table(&self) -> String {
        let header = ["Screen", "Location", "Film", "Configuration", "Showtimes"];
        let body: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.external_id.to_string(),
                    r.location.clone(),
                    r.film.clone(),
                    r.config_index.to_string(),
                    join_times(&r.showtimes),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }

        let mut out = String::new();
        let mut line = |cells: &[&str]| {
            let mut text = String::new();
            for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
                if i + 1 == cells.len() {
                    text.push_str(cell);
                } else {
                    let _ = write!(text, "{cell:<w$}  ");
                }
            }
            out.push_str(text.trim_end());
            out.push('\n');
        };
        line(&header);
        for row in &body {
            line(&row.each_ref().map(String::as_str));
        }

        let certified = if self.certified_by.is_empty() {
            String::new()
        } else {
            let names: Vec<String> = self.certified_by.iter().map(Method::to_string).collect();
            format!(", certified by {}", names.join(", "))
        };
        let _ = writeln!(
            out,
            "\nObjective: {} ({}, {}{certified})",
            self.objective, self.status, self.method
        );
        out
    }
}

fn join_times(times: &[TimeOfDay]) -> String {
    times
        .iter()
        .map(TimeOfDay::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}
