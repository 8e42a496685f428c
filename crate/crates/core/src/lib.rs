//! Exact film scheduling with staggered showtimes.
//!
//! Films are assigned, each with one daily showtime configuration, to every
//! screen of a cluster of neighbouring theatre locations so that forecast
//! attendance is maximal and no configuration plays on two screens of the
//! same cluster.
//!
//! The pipeline is [`domain::load_instance`] → [`formulation::build_model`]
//! → [`solver::certify`], with [`cluster::solve_all`] driving one solve per
//! cluster.

pub mod cli;
pub mod cluster;
pub mod confgen;
pub mod domain;
pub mod formulation;
pub mod solver;
pub mod synth;

/// Three locations, nine screens, five films and sixteen configurations,
/// with integer attendance forecasts.
pub const CROSSOVER_INSTANCE: &str = include_str!("../examples/crossover_instance.json");
