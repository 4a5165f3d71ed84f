//! `nsbox` command line. Every subcommand writes JSON to stdout (or
//! `--out`) and a one-line summary to stderr.
//!
//! Exit codes: 0 affirmative result, 1 negative finding, 2 input or
//! validation error, 3 capacity exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Read as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aq::{dykstra_membership, quantum_gram_fixture, AqParams, Fixture, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::boxes::{
    correlated_box, isotropic_box, modified_pr_box, noisy_box, p_eps_box, pr_box, validate, BellBox,
};
use crate::distill::{build_extension, cut_box, distill_schedule};
use crate::error::{Error, Result};
use crate::games::{constant_game, is_uniquely_won, xor_game, UniqueGame};
use crate::orthograph::{build_orthogonality_graph, clique_saturation};
use crate::polytope::classical::{classical_membership, ClassicalOptions, DEFAULT_DETERMINISTIC_CAP};
use crate::polytope::constraints::dimension;
use crate::polytope::vertex::certify_vertex;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::scenario::make_scenario;
use crate::witness::build_witness;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

/// Distillation counts as successful once the parameter reaches this value.
pub const DISTILLED_THRESHOLD: (i64, i64) = (99, 100);

#[derive(Parser, Debug)]
#[command(name = "nsbox", version, about = "Exact analysis of no-signaling boxes")]
pub struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parameter sweeps.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: u32,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit a box from a named family.
    Gen(GenArgs),
    /// Check non-negativity, normalization and no-signaling.
    Validate(BoxArg),
    /// Rank test on the tight constraint rows.
    VertexCert(BoxArg),
    /// Decide membership in the classical polytope.
    Classical {
        #[command(flatten)]
        input: BoxArg,
        #[arg(long, default_value_t = DEFAULT_DETERMINISTIC_CAP)]
        det_cap: u64,
    },
    /// Orthogonality graph and clique manifest.
    Orthograph {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Box whose clique sums are reported; also fixes the scenario.
        #[arg(long = "box")]
        box_path: Option<PathBuf>,
        /// Also write the edge list to this file.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Theta-body separating witness for a non-local vertex.
    Witness(BoxArg),
    /// Almost-quantum feasibility by alternating projections.
    AqCheck {
        #[arg(long = "box", conflicts_with = "fixture", required_unless_present = "fixture")]
        box_path: Option<PathBuf>,
        /// `tsirelson_chsh`, `deterministic:<id>` or `classical_mixture:uniform`.
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
    },
    /// No-signaling graph of a unique game.
    GameGraph {
        #[arg(long, group = "source")]
        xor: bool,
        #[arg(long, group = "source")]
        constant: bool,
        /// Game JSON file.
        #[arg(long, group = "source")]
        game: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Also write the graph's edge list to this file.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Distillation schedule, cross-checked against the explicit wiring.
    Distill {
        /// One or more starting parameters, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<String>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
    },
    /// Non-local extension of the isotropic box and its cut value.
    Extend {
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<String>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Include the extension box itself in the output.
        #[arg(long)]
        with_box: bool,
    },
}

#[derive(Args, Debug)]
pub struct BoxArg {
    /// Box JSON file, or `-` for stdin.
    #[arg(long = "box")]
    pub box_path: PathBuf,
}

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Inputs per party (one value, or one per party).
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    /// Outputs per party (one value, or one per party).
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Family {
    Pr,
    Corr,
    Noisy,
    ModifiedPr,
    Iso,
    PEps,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Mixing parameter `p/q` for `iso` and `p-eps`.
    #[arg(long)]
    pub eps: Option<String>,
}

struct Outcome {
    json: serde_json::Value,
    summary: String,
    code: i32,
}

impl Outcome {
    fn new(json: serde_json::Value, summary: impl Into<String>, affirmative: bool) -> Self {
        Self { json, summary: summary.into(), code: if affirmative { EXIT_OK } else { EXIT_NEGATIVE } }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.json).expect("JSON values serialize") + "\n";
            let written = match &cli.out {
                Some(path) => fs::write(path, text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            eprintln!("{}", outcome.summary);
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_capacity() {
                EXIT_CAPACITY
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn read_text(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn read_box(path: &PathBuf) -> Result<BellBox> {
    BellBox::from_json(&read_text(path)?)
}

fn read_valid_box(path: &PathBuf) -> Result<BellBox> {
    let b = read_box(path)?;
    validate(&b).into_result()?;
    Ok(b)
}

fn box_value(b: &BellBox) -> serde_json::Value {
    serde_json::from_str(&b.to_json()).expect("box JSON is valid")
}

/// Runs `f` over `items` on up to `jobs` threads, keeping input order.
fn sweep<T: Sync, R: Send>(items: &[T], jobs: u32, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let chunk = items.len().div_ceil(jobs.max(1) as usize).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| scope.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn parse_eps_list(values: &[String]) -> Result<Vec<Rational>> {
    values.iter().map(|v| parse_rational(v)).collect()
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gen(args) => {
            let eps = || -> Result<Rational> {
                parse_rational(
                    args.eps.as_deref().ok_or_else(|| Error::InvalidArgument("this family needs --eps p/q".into()))?,
                )
            };
            let b = match args.family {
                Family::Pr => pr_box(args.n, args.k)?,
                Family::Corr => correlated_box(args.n, args.k)?,
                Family::Noisy => noisy_box(args.n, args.k)?,
                Family::ModifiedPr => modified_pr_box(args.n, args.k)?,
                Family::Iso => isotropic_box(args.n, args.k, &eps()?)?,
                Family::PEps => p_eps_box(args.n, args.k, &eps()?)?,
            };
            Ok(Outcome::new(box_value(&b), format!("{:?} box with {} entries", args.family, b.len()), true))
        }
        Command::Validate(arg) => {
            let b = read_box(&arg.box_path)?;
            let report = validate(&b);
            let ok = report.is_valid();
            let summary = match [&report.nonnegativity, &report.normalization, &report.no_signaling]
                .into_iter()
                .flatten()
                .next()
            {
                None => "valid no-signaling box".to_string(),
                Some(v) => format!("invalid box: {v}"),
            };
            let mut json = serde_json::to_value(&report)?;
            json["valid"] = ok.into();
            Ok(Outcome::new(json, summary, ok))
        }
        Command::VertexCert(arg) => {
            let b = read_valid_box(&arg.box_path)?;
            let cert = certify_vertex(&b)?;
            let summary = format!(
                "{}: tight-row rank {} of {}",
                if cert.is_vertex { "vertex" } else { "not a vertex" },
                cert.rank,
                cert.required_rank
            );
            let mut json = serde_json::to_value(&cert)?;
            json["dimension"] = dimension(b.scenario()).into();
            Ok(Outcome::new(json, summary, cert.is_vertex))
        }
        Command::Classical { input, det_cap } => {
            let b = read_valid_box(&input.box_path)?;
            let report = classical_membership(&b, &ClassicalOptions { det_cap: *det_cap })?;
            let local = report.certificate.is_local();
            let summary = match report.certificate.gap() {
                Some(gap) => format!("non-local: Bell functional gap {}", format_rational(&gap)),
                None => "local: convex decomposition found".to_string(),
            };
            let mut json = report.certificate.to_json(&report.strategies);
            json["deterministic_count"] = report.strategies.len().into();
            Ok(Outcome::new(json, summary, local))
        }
        Command::Orthograph { scenario, box_path, edges } => {
            let b = box_path.as_ref().map(read_box).transpose()?;
            let s = match (&b, scenario.n) {
                (Some(b), _) => b.scenario().clone(),
                (None, Some(n)) => make_scenario(n, &scenario.m, &scenario.k)?,
                (None, None) => return Err(Error::InvalidArgument("give --box or --n/--m/--k".into())),
            };
            let g = build_orthogonality_graph(&s);
            if let Some(path) = edges {
                fs::write(path, g.to_edge_list())?;
            }
            let mut json = g.clique_manifest();
            let mut affirmative = true;
            if let Some(b) = &b {
                let sat = clique_saturation(b, &g)?;
                affirmative = sat.all_saturated();
                json["saturation"] = serde_json::to_value(&sat)?;
                json["all_saturated"] = affirmative.into();
            }
            let summary = format!(
                "{} vertices, {} edges, {} normalization and {} no-signaling cliques",
                g.vertex_count(),
                g.edge_count(),
                g.cliques_n.len(),
                g.cliques_ns.len()
            );
            Ok(Outcome::new(json, summary, affirmative))
        }
        Command::Witness(arg) => {
            let b = read_valid_box(&arg.box_path)?;
            match build_witness(&b) {
                Ok(w) => {
                    let summary = format!(
                        "witness at j = {}: epsilon {}, violation {}",
                        w.j,
                        format_rational(&w.epsilon),
                        format_rational(&w.violation)
                    );
                    Ok(Outcome::new(w.to_json(), summary, true))
                }
                Err(e @ (Error::NoSeparation | Error::NotAVertex { .. })) => Ok(Outcome::new(
                    serde_json::json!({ "witness": null, "reason": e.to_string() }),
                    e.to_string(),
                    false,
                )),
                Err(e) => Err(e),
            }
        }
        Command::AqCheck { box_path, fixture, tol, max_iters } => {
            if tol.is_nan() || *tol <= 0.0 || *max_iters == 0 {
                return Err(Error::InvalidArgument("--tol and --max-iters must be positive".into()));
            }
            if let Some(name) = fixture {
                let (fb, cand) = quantum_gram_fixture(&Fixture::by_name(name)?)?;
                let ok = cand.residuals.passes(*tol);
                let json = serde_json::json!({
                    "fixture": name,
                    "box": fb.to_json(),
                    "residuals": cand.residuals,
                    "passes": ok,
                    "tol": tol,
                    "pi_lower": cand.pi_lower_triangle(),
                });
                return Ok(Outcome::new(json, format!("fixture {name}: max residual {:e}", cand.residuals.max()), ok));
            }
            let b = read_valid_box(box_path.as_ref().expect("clap enforces one source"))?;
            let g = build_orthogonality_graph(b.scenario());
            let report = dykstra_membership(&b, &g, &AqParams { max_iters: *max_iters, tol: *tol })?;
            let summary = format!(
                "{} after {} iterations (residual {:e})",
                if report.is_feasible() { "feasible" } else { "infeasible" },
                report.iterations,
                report.residual
            );
            Ok(Outcome::new(report.to_json(), summary, report.is_feasible()))
        }
        Command::GameGraph { xor, constant, game, n, k, edges } => {
            let g: UniqueGame = match (xor, constant, game) {
                (_, _, Some(path)) => UniqueGame::from_json(&read_text(path)?)?,
                (_, true, None) => constant_game(*n, *k)?,
                (true, _, None) | (false, false, None) => xor_game(*n, *k)?,
            };
            let report = is_uniquely_won(&g)?;
            if let Some(path) = edges {
                fs::write(path, report.graph.to_edge_list())?;
            }
            let summary = format!(
                "{} vertices, {} edges, {} component(s)",
                report.graph.vertices.len(),
                report.graph.edge_count(),
                report.graph.component_count
            );
            Ok(Outcome::new(report.to_json(), summary, report.connected))
        }
        Command::Distill { eps, n, k, rounds } => {
            let starts = parse_eps_list(eps)?;
            let traces = sweep(&starts, cli.jobs, |e| distill_schedule(e, *n, *k, *rounds));
            let threshold = Rational::new(DISTILLED_THRESHOLD.0.into(), DISTILLED_THRESHOLD.1.into());
            let mut out = Vec::new();
            let mut all = true;
            for t in traces {
                let t = t?;
                let distilled = *t.last() >= threshold;
                all &= distilled;
                let mut j = t.to_json();
                j["distilled"] = distilled.into();
                out.push(j);
            }
            let summary = format!("{} schedule(s), {} rounds each", out.len(), rounds);
            Ok(Outcome::new(serde_json::json!({ "schedules": out }), summary, all))
        }
        Command::Extend { eps, n, k, with_box } => {
            let values = parse_eps_list(eps)?;
            let results = sweep(&values, cli.jobs, |e| build_extension(*n, *k, e));
            let three = Rational::from_integer(3.into());
            let mut out = Vec::new();
            let mut all = true;
            for e in results {
                let e = e?;
                let beats = e.cut_value > three;
                all &= beats;
                let mut j = serde_json::json!({
                    "epsilon": format_rational(&e.epsilon),
                    "cut_value": format_rational(&e.cut_value),
                    "local_bound": "3/1",
                    "violates_local_bound": beats,
                    "marginal_is_isotropic": true,
                    "cut_box": box_value(&cut_box(&e)),
                });
                if *with_box {
                    j["extension"] = box_value(&e.extension);
                }
                out.push(j);
            }
            let summary = format!("{} extension(s) of the ({n}, 2, {k}) isotropic box", out.len());
            Ok(Outcome::new(serde_json::json!({ "extensions": out }), summary, all))
        }
    }
}
