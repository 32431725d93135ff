//! `eigs`: analysis and simulation of edge iterated graph systems.
//!
//! Five commands tie the pipeline together: `validate` (file checks),
//! `analyze` (matrix-side spectra and diagnostics as a deterministic JSON
//! report), `generate` (materialize a finite iterate), `simulate`
//! (degree-level regressions and growth fits without materializing), and
//! `verify` (cross-check every matrix prediction against brute force).
//!
//! Exit codes are a stable contract:
//! 0 ok, 1 domain failure, 2 parse failure, 3 analysis hard failure,
//! 4 budget exceeded, 5 not applicable.

mod report;
mod verify;

use clap::{Parser, Subcommand};
use eigs_core::engine::{export_edges, export_vertices};
use eigs_core::{
    branch_regression, choice_family, combinatorial_histogram, condensation, degree_analysis,
    degree_matrix, distance_series, edge_series, fits_csv, fractal_analysis, geometric_fit,
    iterate, levels_csv, mass_matrix, parse_spec, scaled_levels, scatter_svg, validate,
    DistanceError, IgsSpec, SpectralError,
};
use report::Section;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_DOMAIN: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_ANALYSIS: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_NOT_APPLICABLE: u8 = 5;

/// Default cap on materialized edges, shared by every command that expands
/// generations.
const DEFAULT_EDGE_BUDGET: u64 = 10_000_000;
/// Default cap on enumerated planted paths per rule.
const DEFAULT_PATH_BUDGET: u64 = 1 << 20;
/// Default cap on enumerated choice combinations (stability, block checks).
const DEFAULT_COMBO_BUDGET: u64 = 1 << 20;

#[derive(Parser)]
#[command(
    name = "eigs",
    version,
    about = "Fractal and degree spectra of edge iterated graph systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a system file; prints violations one per line.
    Validate {
        /// System description file (JSON).
        spec: PathBuf,
    },
    /// Full matrix-side analysis as a deterministic JSON report.
    Analyze {
        spec: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also dump mass.txt and incidence.txt (one row per line,
        /// space-separated integers) into this directory.
        #[arg(long)]
        matrices: Option<PathBuf>,
        /// Cap on enumerated planted paths per rule.
        #[arg(long, default_value_t = DEFAULT_PATH_BUDGET)]
        path_budget: u64,
        /// Cap on enumerated choice combinations in the stability check.
        #[arg(long, default_value_t = DEFAULT_COMBO_BUDGET)]
        combo_budget: u64,
    },
    /// Materialize generation n as an edge list plus provenance sidecar.
    Generate {
        spec: PathBuf,
        /// Generation to build.
        #[arg(short, long)]
        n: u32,
        /// Output prefix: writes <prefix>.edges and <prefix>.vertices.
        /// Without it the edge list goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Refuse generations whose edge count exceeds this.
        #[arg(long, default_value_t = DEFAULT_EDGE_BUDGET)]
        budget_edges: u64,
    },
    /// Degree-level regressions and growth fits at generation n, computed
    /// from the matrices alone (nothing is materialized).
    Simulate {
        spec: PathBuf,
        /// Generation the degree histogram is computed for.
        #[arg(short, long)]
        n: u32,
        /// Directory for levels CSV, fits CSV, and the scatter plot.
        #[arg(long)]
        plots: Option<PathBuf>,
        /// Write a full JSON report (with the empirical section) here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap on enumerated planted paths per rule.
        #[arg(long, default_value_t = DEFAULT_PATH_BUDGET)]
        path_budget: u64,
    },
    /// Cross-check matrix predictions against brute-force iterates and
    /// exhaustive enumeration; prints pass/fail per identity.
    Verify {
        /// System files to check.
        specs: Vec<PathBuf>,
        /// Largest generation the engine identities are checked at.
        #[arg(long, default_value_t = 5)]
        n_max: u32,
        /// Also check this many seeded random systems.
        #[arg(long, default_value_t = 0)]
        random: u32,
        /// First seed of the random corpus.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Refuse generations whose edge count exceeds this.
        #[arg(long, default_value_t = DEFAULT_EDGE_BUDGET)]
        budget_edges: u64,
        /// Relative tolerance for floating-point identity comparisons.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

fn main() -> ExitCode {
    // Die silently on a closed pipe, like every other stream-to-stdout tool,
    // instead of panicking mid-print when the consumer stops reading.
    // SAFETY: restoring a default signal disposition has no preconditions,
    // and no other thread exists yet.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { spec } => cmd_validate(&spec),
        Command::Analyze {
            spec,
            out,
            matrices,
            path_budget,
            combo_budget,
        } => cmd_analyze(&spec, out.as_deref(), matrices.as_deref(), path_budget, combo_budget),
        Command::Generate {
            spec,
            n,
            out,
            budget_edges,
        } => cmd_generate(&spec, n, out.as_deref(), budget_edges),
        Command::Simulate {
            spec,
            n,
            plots,
            out,
            path_budget,
        } => cmd_simulate(&spec, n, plots.as_deref(), out.as_deref(), path_budget),
        Command::Verify {
            specs,
            n_max,
            random,
            seed,
            budget_edges,
            tolerance,
        } => verify::cmd_verify(&specs, n_max, random, seed, budget_edges, tolerance),
    };
    ExitCode::from(code)
}

/// Reads and parses a system file; prints the failure and yields the exit
/// code when it cannot.
fn load_spec(path: &Path) -> Result<(IgsSpec, Vec<u8>), u8> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_PARSE);
        }
    };
    let text = match std::str::from_utf8(&bytes) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {} is not UTF-8: {e}", path.display());
            return Err(EXIT_PARSE);
        }
    };
    match parse_spec(text) {
        Ok(spec) => Ok((spec, bytes)),
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            Err(EXIT_PARSE)
        }
    }
}

/// Loads, parses, and validates; prints violations and yields the domain
/// exit code on an invalid system.
fn load_valid_spec(path: &Path) -> Result<(IgsSpec, Vec<u8>), u8> {
    let (spec, bytes) = load_spec(path)?;
    match validate(&spec) {
        Ok(()) => Ok((spec, bytes)),
        Err(errors) => {
            for v in &errors.violations {
                eprintln!("violation: {v}");
            }
            Err(EXIT_DOMAIN)
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), u8> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = std::fs::create_dir_all(parent) {
                eprintln!("error: cannot create {}: {e}", parent.display());
                return Err(EXIT_DOMAIN);
            }
        }
    }
    std::fs::write(path, content).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_DOMAIN
    })
}

fn cmd_validate(path: &Path) -> u8 {
    let (spec, _) = match load_spec(path) {
        Ok(v) => v,
        Err(code) => return code,
    };
    match validate(&spec) {
        Ok(()) => {
            println!(
                "ok: {} colour{}, {} rule{}",
                spec.colour_count,
                if spec.colour_count == 1 { "" } else { "s" },
                spec.rules.len(),
                if spec.rules.len() == 1 { "" } else { "s" },
            );
            EXIT_OK
        }
        Err(errors) => {
            for v in &errors.violations {
                println!("{v}");
            }
            EXIT_DOMAIN
        }
    }
}

fn cmd_analyze(
    path: &Path,
    out: Option<&Path>,
    matrices_dir: Option<&Path>,
    path_budget: u64,
    combo_budget: u64,
) -> u8 {
    let (spec, bytes) = match load_valid_spec(path) {
        Ok(v) => v,
        Err(code) => return code,
    };

    let mass = mass_matrix(&spec);
    let mass_form = condensation(&mass);
    let incidence = degree_matrix(&spec);
    let incidence_form = condensation(&incidence);

    let family = match choice_family(&spec, path_budget) {
        Ok(f) => f,
        Err(e @ SpectralError::PathBudgetExceeded { .. }) => {
            eprintln!("error: {e}");
            return EXIT_BUDGET;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ANALYSIS;
        }
    };

    let fractal = fractal_analysis(&spec, &family, &mass, &mass_form, combo_budget);
    let degree = degree_analysis(&spec, &mass, &mass_form, &incidence, &incidence_form);

    let flags = report::collect_flags(fractal.as_ref().ok(), degree.as_ref().ok());
    let distance_section = match &fractal {
        Ok(f) => Section::Ok(report::distance_section(f, &mass)),
        Err(e) => Section::Err {
            error: e.to_string(),
        },
    };
    let degree_section = match &degree {
        Ok(d) => Section::Ok(report::degree_section(&spec, d)),
        Err(e) => Section::Err {
            error: e.to_string(),
        },
    };

    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let rpt = report::Report {
        schema: report::SCHEMA_VERSION,
        tool: report::tool(),
        input: report::Input {
            file: file_name,
            sha256: report::sha256_hex(&bytes),
        },
        validation: report::Validation {
            valid: true,
            violations: Vec::new(),
        },
        matrices: report::matrices_section(&mass, &mass_form, &incidence, &incidence_form),
        distance: distance_section,
        degree: degree_section,
        empirical: None,
        flags,
    };
    let rendered = report::render(&rpt);

    if let Some(dir) = matrices_dir {
        if let Err(code) = write_file(&dir.join("mass.txt"), &report::matrix_text(&mass)) {
            return code;
        }
        if let Err(code) = write_file(&dir.join("incidence.txt"), &report::matrix_text(&incidence))
        {
            return code;
        }
    }
    match out {
        Some(p) => {
            if let Err(code) = write_file(p, &rendered) {
                return code;
            }
            eprintln!("wrote {}", p.display());
        }
        None => print!("{rendered}"),
    }

    // Section errors exit nonzero even though the report was written.
    if rpt.distance.is_err() {
        return match fractal {
            Err(DistanceError::TrimEnumerationBudget { .. }) => EXIT_BUDGET,
            _ => EXIT_ANALYSIS,
        };
    }
    if rpt.degree.is_err() {
        return EXIT_ANALYSIS;
    }
    EXIT_OK
}

fn cmd_generate(path: &Path, n: u32, out: Option<&Path>, budget_edges: u64) -> u8 {
    let (spec, _) = match load_valid_spec(path) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let graph = match iterate(&spec, n, budget_edges) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_BUDGET;
        }
    };
    let edges = export_edges(&graph);
    match out {
        Some(prefix) => {
            let edge_path = prefix.with_extension("edges");
            let vertex_path = prefix.with_extension("vertices");
            if let Err(code) = write_file(&edge_path, &edges) {
                return code;
            }
            if let Err(code) = write_file(&vertex_path, &export_vertices(&spec, &graph)) {
                return code;
            }
            println!(
                "generation {}: {} vertices, {} edges",
                n,
                graph.vertices.len(),
                graph.edges.len()
            );
            println!("wrote {}", edge_path.display());
            println!("wrote {}", vertex_path.display());
        }
        None => print!("{edges}"),
    }
    EXIT_OK
}

fn cmd_simulate(
    path: &Path,
    n: u32,
    plots: Option<&Path>,
    out: Option<&Path>,
    path_budget: u64,
) -> u8 {
    let (spec, bytes) = match load_valid_spec(path) {
        Ok(v) => v,
        Err(code) => return code,
    };

    let mass = mass_matrix(&spec);
    let mass_form = condensation(&mass);
    let incidence = degree_matrix(&spec);
    let incidence_form = condensation(&incidence);
    let family = match choice_family(&spec, path_budget) {
        Ok(f) => f,
        Err(e @ SpectralError::PathBudgetExceeded { .. }) => {
            eprintln!("error: {e}");
            return EXIT_BUDGET;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ANALYSIS;
        }
    };
    let degree = match degree_analysis(&spec, &mass, &mass_form, &incidence, &incidence_form) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ANALYSIS;
        }
    };
    if !degree.applicable {
        println!("not applicable: degree growth rate is 1, degrees stay bounded");
        return EXIT_NOT_APPLICABLE;
    }

    let iota = spec.initial_colour.index();
    let histogram = combinatorial_histogram(&degree.types, &mass, &incidence, iota, n);
    let levels = scaled_levels(&degree, &histogram);
    let fits = branch_regression(&levels, degree.lambda_u);

    let dist_series = distance_series(&family, iota, n);
    let dist_fit = geometric_fit(&dist_series);
    let lambda_d = eigs_core::bellman_run(&family, iota).lambda;
    let edge_counts = edge_series(&mass, iota, n);
    let edge_fit = geometric_fit(&edge_counts);
    let mass_rate = mass_form
        .blocks
        .iter()
        .map(|b| b.rho)
        .fold(f64::NEG_INFINITY, f64::max);

    println!("generation {n}: max degree {}", levels.delta);
    for fit in &fits {
        match &fit.fit {
            Some(line) => println!(
                "class{}: slope {:.6} over {} of {} levels (r^2 {:.6})",
                fit.class_index, line.slope, fit.levels_used, fit.levels_total, line.r_squared
            ),
            None => println!(
                "class{}: sparse ({} levels)",
                fit.class_index, fit.levels_total
            ),
        }
    }
    println!(
        "distance growth: fitted rate {:.6} vs recursion rate {:.6}",
        dist_fit.rate, lambda_d
    );
    println!(
        "edge growth: fitted rate {:.6} vs mass radius {:.6}",
        edge_fit.rate, mass_rate
    );

    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "system".to_owned());
    if let Some(dir) = plots {
        let levels_path = dir.join(format!("{stem}-n{n}-levels.csv"));
        let fits_path = dir.join(format!("{stem}-n{n}-fits.csv"));
        let plot_path = dir.join(format!("{stem}-n{n}.svg"));
        if let Err(code) = write_file(&levels_path, &levels_csv(&levels)) {
            return code;
        }
        if let Err(code) = write_file(&fits_path, &fits_csv(&fits)) {
            return code;
        }
        if let Err(code) = write_file(&plot_path, &scatter_svg(&levels, &fits)) {
            return code;
        }
        println!("wrote {}", levels_path.display());
        println!("wrote {}", fits_path.display());
        println!("wrote {}", plot_path.display());
    }

    if let Some(report_path) = out {
        let fractal = fractal_analysis(&spec, &family, &mass, &mass_form, DEFAULT_COMBO_BUDGET);
        let flags = report::collect_flags(fractal.as_ref().ok(), Some(&degree));
        let edges_exact = edge_counts
            .last()
            .map(|(_, e)| e.clone())
            .unwrap_or_default();
        let empirical = report::empirical_section(
            &levels,
            &fits,
            &edges_exact,
            report::growth_report(dist_series.len(), &dist_fit, lambda_d),
            report::growth_report(edge_counts.len(), &edge_fit, mass_rate),
        );
        let file_name = path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let rpt = report::Report {
            schema: report::SCHEMA_VERSION,
            tool: report::tool(),
            input: report::Input {
                file: file_name,
                sha256: report::sha256_hex(&bytes),
            },
            validation: report::Validation {
                valid: true,
                violations: Vec::new(),
            },
            matrices: report::matrices_section(&mass, &mass_form, &incidence, &incidence_form),
            distance: match &fractal {
                Ok(f) => Section::Ok(report::distance_section(f, &mass)),
                Err(e) => Section::Err {
                    error: e.to_string(),
                },
            },
            degree: Section::Ok(report::degree_section(&spec, &degree)),
            empirical: Some(empirical),
            flags,
        };
        if let Err(code) = write_file(report_path, &report::render(&rpt)) {
            return code;
        }
        println!("wrote {}", report_path.display());
    }
    EXIT_OK
}
