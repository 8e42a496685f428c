//! Showtime configuration generation.
//!
//! A film repeats on a fixed cycle: its runtime plus turnover, rounded up to
//! a multiple of the stagger interval. Each configuration is that cycle
//! started at a different stagger offset from opening time, so no two
//! configurations of one film share a showtime.

use thiserror::Error;

use crate::domain::{ConfigIndex, Film, FilmId, OperatingWindow, ShowtimeConfiguration, TimeOfDay};

/// Spacing between consecutive showtimes of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CycleLength(u32);

impl CycleLength {
    pub fn minutes(self) -> u32 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfgenError {
    #[error("stagger interval must be positive")]
    ZeroStaggerInterval,
    #[error("open time {open} is after last showtime {last}")]
    InvertedWindow { open: TimeOfDay, last: TimeOfDay },
    #[error("film {0}: no feasible configuration in the operating window")]
    NoFeasibleConfiguration(FilmId),
}

/// Smallest multiple of `stagger_interval` that fits `runtime + turnover`.
///
/// # Panics
/// If `stagger_interval` is zero.
pub fn cycle_length(
    runtime_minutes: u32,
    stagger_interval: u32,
    turnover_minutes: u32,
) -> CycleLength {
    assert!(stagger_interval > 0, "stagger interval must be positive");
    let busy = runtime_minutes + turnover_minutes;
    CycleLength(busy.div_ceil(stagger_interval).max(1) * stagger_interval)
}

/// All configurations of `film` in `window`, numbered 1.. by ascending first
/// showtime.
pub fn generate_configurations(
    film: &Film,
    window: OperatingWindow,
    stagger_interval: u32,
    turnover_minutes: u32,
) -> Result<Vec<ShowtimeConfiguration>, ConfgenError> {
    if stagger_interval == 0 {
        return Err(ConfgenError::ZeroStaggerInterval);
    }
    if window.open > window.last {
        return Err(ConfgenError::InvertedWindow {
            open: window.open,
            last: window.last,
        });
    }
    let cycle = cycle_length(film.runtime_minutes, stagger_interval, turnover_minutes).minutes();
    let open = window.open.minutes();
    let last = window.last.minutes();

    let mut out = Vec::new();
    for offset in (0..cycle).step_by(stagger_interval as usize) {
        let showtimes: Vec<TimeOfDay> = (open + offset..=last)
            .step_by(cycle as usize)
            .filter_map(TimeOfDay::from_minutes)
            .collect();
        if showtimes.is_empty() {
            // Later offsets start even later.
            break;
        }
        out.push(ShowtimeConfiguration {
            film_id: film.id,
            config_index: ConfigIndex(out.len() as u32 + 1),
            showtimes,
        });
    }
    if out.is_empty() {
        return Err(ConfgenError::NoFeasibleConfiguration(film.id));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn film(id: u32, runtime: u32) -> Film {
        Film {
            id: FilmId(id),
            title: format!("Film {id}"),
            runtime_minutes: runtime,
        }
    }

    fn window(open: u32, last: u32) -> OperatingWindow {
        OperatingWindow {
            open: TimeOfDay::from_minutes(open).unwrap(),
            last: TimeOfDay::from_minutes(last).unwrap(),
        }
    }

    fn hm(times: &[TimeOfDay]) -> Vec<String> {
        times.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn cycle_lengths() {
        assert_eq!(cycle_length(90, 30, 0).minutes(), 90);
        assert_eq!(cycle_length(100, 30, 0).minutes(), 120);
        assert_eq!(cycle_length(120, 30, 0).minutes(), 120);
        assert_eq!(cycle_length(85, 30, 0).minutes(), 90);
        assert_eq!(cycle_length(90, 30, 30).minutes(), 120);
        assert_eq!(cycle_length(1, 30, 0).minutes(), 30);
    }

    #[test]
    fn ninety_minute_film() {
        let cfgs = generate_configurations(&film(1, 90), window(720, 1380), 30, 0).unwrap();
        assert_eq!(cfgs.len(), 3);
        let firsts: Vec<String> = cfgs.iter().map(|c| c.showtimes[0].to_string()).collect();
        assert_eq!(firsts, ["12:00", "12:30", "13:00"]);
        let counts: Vec<usize> = cfgs.iter().map(|c| c.showtimes.len()).collect();
        assert_eq!(counts, [8, 8, 7]);
        let idx: Vec<u32> = cfgs.iter().map(|c| c.config_index.get()).collect();
        assert_eq!(idx, [1, 2, 3]);
    }

    #[test]
    fn hundred_minute_film_last_offset() {
        let cfgs = generate_configurations(&film(3, 100), window(720, 1380), 30, 0).unwrap();
        assert_eq!(cfgs.len(), 4);
        assert_eq!(
            hm(&cfgs[3].showtimes),
            ["13:30", "15:30", "17:30", "19:30", "21:30"]
        );
    }

    #[test]
    fn single_slot_window() {
        let cfgs = generate_configurations(&film(9, 30), window(720, 720), 30, 0).unwrap();
        assert_eq!(cfgs.len(), 1);
        assert_eq!(hm(&cfgs[0].showtimes), ["12:00"]);
    }

    #[test]
    fn short_window_truncates_offsets() {
        // Window of 45 minutes on a 120-minute cycle admits offsets 0 and 30.
        let cfgs = generate_configurations(&film(1, 110), window(720, 765), 30, 0).unwrap();
        assert_eq!(cfgs.len(), 2);
    }

    #[test]
    fn turnover_extends_cycle() {
        let cfgs = generate_configurations(&film(1, 90), window(720, 1380), 30, 30).unwrap();
        assert_eq!(cfgs.len(), 4);
        assert!(cfgs.iter().all(|c| c
            .showtimes
            .windows(2)
            .all(|w| w[1].minutes() - w[0].minutes() == 120)));
    }

    #[test]
    fn window_past_representable_range() {
        let cfgs = generate_configurations(&film(1, 90), window(1600, 1679), 30, 0).unwrap();
        assert_eq!(cfgs.len(), 3);
        assert!(cfgs.iter().all(|c| c.showtimes.len() == 1));
    }

    #[test]
    fn errors() {
        assert_eq!(
            generate_configurations(&film(1, 90), window(800, 720), 30, 0),
            Err(ConfgenError::InvertedWindow {
                open: TimeOfDay::from_minutes(800).unwrap(),
                last: TimeOfDay::from_minutes(720).unwrap()
            })
        );
        assert_eq!(
            generate_configurations(&film(1, 90), window(720, 1380), 0, 0),
            Err(ConfgenError::ZeroStaggerInterval)
        );
    }

    proptest! {
        #[test]
        fn generated_configurations_partition_the_grid(
            runtime in 1u32..300,
            dt in prop::sample::select(vec![5u32, 10, 15, 20, 30, 45, 60]),
            turnover in 0u32..40,
            open in 0u32..1200,
            len in 0u32..479,
        ) {
            let last = open + len;
            let w = window(open, last);
            let cfgs = generate_configurations(&film(1, runtime), w, dt, turnover).unwrap();
            let cycle = cycle_length(runtime, dt, turnover).minutes();
            prop_assert_eq!(cycle % dt, 0);
            prop_assert!(cycle >= runtime + turnover && cycle < runtime + turnover + dt);

            let max_count = (cycle / dt) as usize;
            prop_assert!(cfgs.len() <= max_count);
            if len >= cycle {
                prop_assert_eq!(cfgs.len(), max_count);
            }
            let mut seen = BTreeSet::new();
            for (i, cfg) in cfgs.iter().enumerate() {
                prop_assert_eq!(cfg.config_index.get() as usize, i + 1);
                prop_assert_eq!(cfg.showtimes[0].minutes(), open + i as u32 * dt);
                for pair in cfg.showtimes.windows(2) {
                    prop_assert_eq!(pair[1].minutes() - pair[0].minutes(), cycle);
                }
                for t in &cfg.showtimes {
                    prop_assert!(w.contains(*t));
                    prop_assert!(seen.insert(*t), "showtime shared between configurations");
                }
            }
            let again = generate_configurations(&film(1, runtime), w, dt, turnover).unwrap();
            prop_assert_eq!(again, cfgs);
        }
    }
}
