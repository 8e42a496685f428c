//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation or domain failure, 2 I/O or parse
//! failure, 3 infeasible. Results go to standard output, diagnostics to
//! standard error.

mod output;

pub use output::{ClusterSummary, ScheduleDocument, ScheduleRow};

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::cluster::{solve_all, verify_decomposition, DEFAULT_JOINT_VARIABLE_LIMIT};
use crate::confgen::{generate_configurations, ConfgenError};
use crate::domain::{
    cluster_windows, parse_document, Attendance, ConfigurationEntry, Film, FilmId,
    InstanceDocument, MultiClusterInstance, Violation,
};
use crate::formulation::{build_joint_model, build_model, export_lp_text};
use crate::synth::{synth_document, SynthParams};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "showtime",
    version,
    about = "Exact film scheduling with staggered showtimes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an instance document and list every violation.
    Validate { instance: PathBuf },
    /// Solve every cluster exactly and print the schedule.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Also write the model in LP format.
        #[arg(long, value_name = "PATH")]
        export_lp: Option<PathBuf>,
        /// Accepted for interface compatibility; every solver is
        /// deterministic.
        #[arg(long)]
        seed: Option<u64>,
        /// Solve clusters concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Fill in the configurations block from runtimes and windows.
    GenerateConfigs {
        instance: PathBuf,
        /// Minutes added to every runtime; defaults to the document's value.
        #[arg(long)]
        turnover: Option<u32>,
    },
    /// Print model statistics and optionally export the LP text.
    Build {
        instance: PathBuf,
        #[arg(long, value_name = "PATH")]
        export_lp: Option<PathBuf>,
    },
    /// Emit a seeded random instance document.
    Synth {
        #[arg(long, default_value_t = 9)]
        screens: usize,
        #[arg(long, default_value_t = 5)]
        films: usize,
        #[arg(long, default_value_t = 1)]
        clusters: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Inclusive coefficient range, written `lo..hi`.
        #[arg(long, default_value = "200..299")]
        coeff_range: CoeffRange,
    },
    /// Solve all clusters jointly and compare with per-cluster solves.
    VerifyDecomposition {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_JOINT_VARIABLE_LIMIT)]
        max_variables: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CoeffRange(i64, i64);

impl FromStr for CoeffRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
        Ok(CoeffRange(parse(lo)?, parse(hi)?))
    }
}

/// Command failure carrying its exit code. The message goes to standard
/// error.
struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            lines: vec![message.into()],
        }
    }

    fn violations(violations: &[Violation]) -> Self {
        Failure {
            code: EXIT_INVALID,
            lines: violations.iter().map(Violation::to_string).collect(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_IO
                }
            };
        }
    };

    let result = match cli.command {
        Command::Validate { instance } => cmd_validate(&instance, out),
        Command::Solve {
            instance,
            format,
            export_lp,
            seed: _,
            parallel,
        } => cmd_solve(&instance, format, export_lp.as_deref(), parallel, out, err),
        Command::GenerateConfigs { instance, turnover } => {
            cmd_generate_configs(&instance, turnover, out)
        }
        Command::Build {
            instance,
            export_lp,
        } => cmd_build(&instance, export_lp.as_deref(), out),
        Command::Synth {
            screens,
            films,
            clusters,
            seed,
            coeff_range,
        } => cmd_synth(
            &SynthParams {
                screens,
                films,
                clusters,
                seed,
                coeff_range: (coeff_range.0, coeff_range.1),
            },
            out,
        ),
        Command::VerifyDecomposition {
            instance,
            max_variables,
        } => cmd_verify_decomposition(&instance, max_variables, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            for line in &f.lines {
                let _ = writeln!(err, "{line}");
            }
            f.code
        }
    }
}

fn read_document(path: &Path) -> Result<InstanceDocument, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<MultiClusterInstance, Failure> {
    read_document(path)?
        .to_instance()
        .map_err(|v| Failure::violations(&v))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut impl Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write output: {e}")))?;
    Ok(EXIT_OK)
}

fn cmd_validate(path: &Path, out: &mut impl Write) -> CmdResult {
    match read_document(path)?.to_instance() {
        Ok(multi) => {
            let configs: usize = multi.clusters.iter().map(|c| c.configuration_count()).sum();
            emit(
                out,
                &format!(
                    "valid: {} cluster(s), {} screens, {} configurations\n",
                    multi.clusters.len(),
                    multi.screen_count(),
                    configs
                ),
            )
        }
        Err(violations) => {
            let mut text = String::new();
            for v in &violations {
                text.push_str(&v.to_string());
                text.push('\n');
            }
            emit(out, &text)?;
            Ok(EXIT_INVALID)
        }
    }
}

fn cmd_solve(
    path: &Path,
    format: Format,
    export_lp: Option<&Path>,
    parallel: bool,
    out: &mut impl Write,
    err: &mut impl Write,
) -> CmdResult {
    let multi = read_instance(path)?;
    if let Some(lp) = export_lp {
        write_file(lp, &export_lp_text(&build_joint_model(&multi)))?;
    }
    let start = Instant::now();
    let report =
        solve_all(&multi, parallel).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let _ = writeln!(err, "solved in {:.3?}", start.elapsed());

    if !report.is_optimal() {
        let lines = report
            .infeasible_clusters()
            .map(|(id, r)| {
                let diag = r.diagnostic.as_deref().unwrap_or("infeasible");
                format!("infeasible: cluster {id}: {diag}")
            })
            .collect();
        return Err(Failure {
            code: EXIT_INFEASIBLE,
            lines,
        });
    }

    let doc = ScheduleDocument::new(&multi, &report);
    let text = match format {
        Format::Table => doc.to_table(),
        Format::Csv => doc.to_csv(),
        Format::Json => doc.to_json(),
    };
    emit(out, &text)
}

fn cmd_generate_configs(path: &Path, turnover: Option<u32>, out: &mut impl Write) -> CmdResult {
    let mut doc = read_document(path)?;
    let turnover = turnover.unwrap_or(doc.turnover_minutes);
    let clusters = doc
        .resolve_clusters()
        .map_err(|v| Failure::violations(&v))?;
    let windows = cluster_windows(&doc, &clusters);
    let shared = windows.values().all(|w| Some(w) == windows.values().next());

    let mut entries = Vec::new();
    for (cluster, window) in &windows {
        for f in &doc.films {
            let film = Film {
                id: FilmId(f.id),
                title: f.title.clone(),
                runtime_minutes: f.runtime_minutes,
            };
            let cfgs =
                generate_configurations(&film, *window, doc.stagger_interval_minutes, turnover)
                    .map_err(|e| match e {
                        ConfgenError::NoFeasibleConfiguration(_) => {
                            Failure::new(EXIT_INVALID, e.to_string())
                        }
                        _ => {
                            Failure::new(EXIT_INVALID, format!("film {} ({}): {e}", f.id, f.title))
                        }
                    })?;
            entries.extend(cfgs.into_iter().map(|c| ConfigurationEntry {
                film_id: c.film_id.get(),
                config_index: c.config_index.get(),
                showtimes: c.showtimes,
                cluster_id: (!shared).then(|| cluster.to_string()),
            }));
        }
        if shared {
            break;
        }
    }
    doc.turnover_minutes = turnover;
    doc.configurations = Some(entries);
    emit(out, &doc.to_json())
}

fn cmd_build(path: &Path, export_lp: Option<&Path>, out: &mut impl Write) -> CmdResult {
    let multi = read_instance(path)?;
    let mut text = String::new();
    for cluster in &multi.clusters {
        let m = build_model(cluster);
        text.push_str(&format!(
            "cluster {}: {} variables, {} equality rows, {} inequality rows\n",
            cluster.cluster_id,
            m.variable_count(),
            m.equality_rows().len(),
            m.inequality_rows().len()
        ));
    }
    let joint = build_joint_model(&multi);
    text.push_str(&format!(
        "total: {} variables, {} equality rows, {} inequality rows\n",
        joint.variable_count(),
        joint.equality_rows().len(),
        joint.inequality_rows().len()
    ));
    if let Some(lp) = export_lp {
        write_file(lp, &export_lp_text(&joint))?;
    }
    emit(out, &text)
}

fn cmd_synth(params: &SynthParams, out: &mut impl Write) -> CmdResult {
    let doc = synth_document(params).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    emit(out, &doc.to_json())
}

fn cmd_verify_decomposition(path: &Path, max_variables: usize, out: &mut impl Write) -> CmdResult {
    let multi = read_instance(path)?;
    let report = verify_decomposition(&multi, max_variables)
        .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let show =
        |o: Option<Attendance>| o.map_or_else(|| "infeasible".to_string(), |o| o.to_string());
    let equal = report.objectives_equal() && report.schedules_equal();
    let text = format!(
        "clusters: {}\njoint objective: {}\nsum of cluster objectives: {}\nschedules equal: {}\nresult: {}\n",
        multi.clusters.len(),
        show(report.joint_objective()),
        show(report.sum_of_parts()),
        if report.schedules_equal() { "yes" } else { "no" },
        if equal { "equal" } else { "MISMATCH" },
    );
    emit(out, &text)?;
    Ok(if equal { EXIT_OK } else { EXIT_INVALID })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (u8, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("showtime").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    fn crossover_file() -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(crate::CROSSOVER_INSTANCE.as_bytes()).unwrap();
        f
    }

    #[test]
    fn coeff_range_parsing() {
        assert_eq!("200..299".parse::<CoeffRange>(), Ok(CoeffRange(200, 299)));
        assert_eq!("0..=5".parse::<CoeffRange>(), Ok(CoeffRange(0, 5)));
        assert!("200-299".parse::<CoeffRange>().is_err());
        assert!("a..b".parse::<CoeffRange>().is_err());
    }

    #[test]
    fn solve_table_shows_optimum() {
        let f = crossover_file();
        let (code, out, err) = run_args(&["solve", f.path().to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.starts_with("Screen"));
        assert_eq!(
            out.lines()
                .skip(1)
                .filter(|l| l.contains("Location"))
                .count(),
            9
        );
        assert!(
            out.contains("Objective: 2615 (Optimal, assignment"),
            "{out}"
        );
    }

    #[test]
    fn json_round_trips_to_schedule() {
        let f = crossover_file();
        let (code, out, _) = run_args(&["solve", f.path().to_str().unwrap(), "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let doc: ScheduleDocument = serde_json::from_str(&out).unwrap();
        let multi = crate::domain::load_instance(crate::CROSSOVER_INSTANCE).unwrap();
        let report = solve_all(&multi, false).unwrap();
        assert_eq!(doc.schedule(), report.schedule());
        assert_eq!(doc.rows.len(), 9);
    }

    #[test]
    fn usage_error_is_exit_two() {
        let (code, out, err) = run_args(&["solve"]);
        assert_eq!(code, EXIT_IO);
        assert!(out.is_empty());
        assert!(!err.is_empty());
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("generate-configs"));
    }

    #[test]
    fn synth_rejects_inverted_range() {
        let (code, _, err) = run_args(&["synth", "--coeff-range", "9..1"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("invalid coefficient range"));
    }
}
