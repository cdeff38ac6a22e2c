//! `wpsb`: batch front end for the bundle computations and lemma checks.
//!
//! Exit codes: 0 on PASS, 1 on FAIL or INCOMPLETE, 2 on usage errors. Usage errors are
//! reported on stderr as a single JSON object.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use wpsb::bundle::{standard_p, standard_q, standard_r, WpsBundle};
use wpsb::cox::{enumerate_basis, BiPoly};
use wpsb::field::{make_field, minimal_extension};
use wpsb::jets::{rest_surjective, JetTarget, MAX_JET_ORDER};
use wpsb::singular::DEFAULT_BUDGET;
use wpsb::verify::{
    basis_listing, check_census, grid, render_report, run_all, sweep, theorem2_arith, write_certificates, Overall,
    ParamTuple, Verdict, VerifyConfig, MIN_SAMPLE_ORDER,
};
use wpsb::Error;

#[derive(Parser, Debug)]
#[command(
    name = "wpsb",
    version,
    about = "Exact lemma checks for toric WPS bundles P(n,r), Q(n,r,l), R(n,r)"
)]
struct Cli {
    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the grading matrix of P, Q or R.
    Describe {
        #[command(flatten)]
        bundle: BundleArgs,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate the monomial basis of a bidegree piece.
    Basis {
        #[command(flatten)]
        bundle: BundleArgs,
        /// Bidegree as `a,b`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        bidegree: (i64, i64),
        #[arg(long)]
        json: bool,
    },
    /// Rank of the k-jet restriction map at a chart point.
    JetRank(JetRankArgs),
    /// Critical-point census of a random cover.
    Census {
        #[command(flatten)]
        tuple: TupleArgs,
        /// Census field extension degree (default: largest that fits the budget).
        #[arg(long)]
        census_k: Option<u32>,
        /// Admissibility exponent (default: l).
        #[arg(long)]
        mu: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        #[arg(long)]
        json: bool,
    },
    /// Run every check for one tuple and write its certificate.
    Verify {
        #[command(flatten)]
        tuple: TupleArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Directory for the certificate file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run every check over a grid of tuples.
    Sweep {
        #[arg(long, default_value_t = 3)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        /// Smallest fiber weight l = n + 1 - m to include.
        #[arg(long, default_value_t = 3)]
        min_l: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Tabulate e(n) = max { l : 2^l + l <= n }.
    ETable {
        #[arg(long, default_value_t = 3)]
        n_min: u32,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    P,
    Q,
    R,
}

#[derive(Args, Debug)]
struct BundleArgs {
    #[arg(long, value_enum, ignore_case = true)]
    family: FamilyArg,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    r: u32,
    /// Weight of `z`; required for Q.
    #[arg(long)]
    l: Option<u32>,
}

#[derive(Args, Debug)]
struct TupleArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    r: u32,
    #[arg(long)]
    p: u32,
    /// Sampling field extension degree (default: smallest with p^k >= 9).
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Maximum number of points in one exhaustive scan.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    #[arg(long, default_value_t = 25)]
    samples: usize,
    #[arg(long, default_value_t = 100)]
    cover_pairs: usize,
    #[arg(long)]
    census_k: Option<u32>,
    #[arg(long)]
    mu: Option<u32>,
    /// Record wall-clock time per check (makes certificates non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct JetRankArgs {
    #[command(flatten)]
    bundle: BundleArgs,
    /// Bidegree of the sections as `a,b`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    bidegree: (i64, i64),
    #[arg(long)]
    p: u32,
    #[arg(long)]
    k: Option<u32>,
    /// Chart as `base,fiber`, e.g. `u0,x1`.
    #[arg(long, default_value = "u0,x1")]
    chart: String,
    /// Chart coordinates of the center, comma separated (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long, default_value_t = 2)]
    order: u32,
    /// Comma-separated monomials (default: the full basis of the bidegree).
    #[arg(long)]
    sections: Option<String>,
    #[arg(long)]
    json: bool,
}

impl RunArgs {
    fn config(&self) -> VerifyConfig {
        VerifyConfig {
            budget: self.budget,
            samples: self.samples,
            cover_pairs: self.cover_pairs,
            census_k: self.census_k,
            mu: self.mu,
            timing: self.timing,
            ..VerifyConfig::default()
        }
    }
}

impl TupleArgs {
    fn tuple(&self) -> wpsb::Result<ParamTuple> {
        match self.k {
            Some(k) => ParamTuple::with_k(self.n, self.m, self.r, self.p, k, self.seed),
            None => ParamTuple::new(self.n, self.m, self.r, self.p, self.seed),
        }
    }
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let a = a.trim().parse().map_err(|_| format!("bad integer `{a}`"))?;
    let b = b.trim().parse().map_err(|_| format!("bad integer `{b}`"))?;
    Ok((a, b))
}

/// Failures before or outside any computation; exit code 2.
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

type Outcome = Result<bool, Usage>;

fn bundle_of(b: &BundleArgs) -> Result<WpsBundle, Usage> {
    Ok(match b.family {
        FamilyArg::P => standard_p(b.n, b.r)?,
        FamilyArg::R => standard_r(b.n, b.r)?,
        FamilyArg::Q => {
            let l = b.l.ok_or_else(|| Usage("--l is required for family Q".into()))?;
            standard_q(b.n, b.r, l)?
        }
    })
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("output serializes"));
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Pass => "PASS".into(),
        Verdict::Fail => "FAIL".into(),
        Verdict::Skipped { reason, cited } => {
            format!("SKIPPED ({}{reason})", if *cited { "cited: " } else { "" })
        }
    }
}

fn overall_text(o: Overall) -> &'static str {
    match o {
        Overall::Pass => "PASS",
        Overall::Fail => "FAIL",
        Overall::Incomplete => "INCOMPLETE",
    }
}

fn jet_rank(a: &JetRankArgs) -> Outcome {
    let bundle = bundle_of(&a.bundle)?;
    if a.order > MAX_JET_ORDER {
        return Err(Usage(format!("--order must be at most {MAX_JET_ORDER}")));
    }
    let k = a.k.unwrap_or_else(|| minimal_extension(a.p as u64, MIN_SAMPLE_ORDER));
    let field = make_field(a.p as u64, k)?;
    let (base, fiber) = a
        .chart
        .split_once(',')
        .ok_or_else(|| Usage(format!("expected `base,fiber`, got `{}`", a.chart)))?;
    let chart = bundle.chart_by_names(base.trim(), fiber.trim())?;
    let center = match &a.center {
        None => vec![field.zero(); chart.dim()],
        Some(text) => text
            .split(',')
            .map(|c| field.parse(c))
            .collect::<wpsb::Result<Vec<_>>>()?,
    };
    let g = bundle.grading().clone();
    let sections: Vec<BiPoly> = match &a.sections {
        None => enumerate_basis(&g, a.bidegree)
            .into_iter()
            .map(|m| BiPoly::monomial(g.clone(), field.clone(), m))
            .collect::<wpsb::Result<_>>()?,
        Some(text) => text
            .split(',')
            .map(|s| BiPoly::parse_monomial(g.clone(), field.clone(), s.trim()))
            .collect::<wpsb::Result<_>>()?,
    };
    if let Some(s) = sections.iter().find(|s| s.bidegree() != a.bidegree) {
        return Err(Usage(format!(
            "section {} is not of bidegree {:?}",
            s.render(),
            a.bidegree
        )));
    }
    let target = JetTarget::new(chart, center, a.order)?;
    let report = rest_surjective(&sections, &target, &field)?;
    if a.json {
        print_json(&report);
    } else {
        println!(
            "{} at {:?} over {}: rank {} of {} ({})",
            report.chart,
            report.center,
            field.describe(),
            report.rank,
            report.target_dim,
            if report.surjective {
                "surjective"
            } else {
                "not surjective"
            }
        );
    }
    Ok(report.surjective)
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Describe { bundle, json } => {
            let b = bundle_of(bundle)?;
            if *json {
                print_json(&b.descriptor());
            } else {
                println!("{}", b.name());
                println!("{}", b.render_matrix());
            }
            Ok(true)
        }
        Command::Basis { bundle, bidegree, json } => {
            let listing = basis_listing(&bundle_of(bundle)?, *bidegree);
            if *json {
                print_json(&listing);
            } else {
                println!(
                    "{} in bidegree {:?}: dimension {}",
                    listing.bundle, listing.bidegree, listing.dimension
                );
                for m in &listing.monomials {
                    println!("{m}");
                }
            }
            Ok(true)
        }
        Command::JetRank(args) => jet_rank(args),
        Command::Census {
            tuple,
            census_k,
            mu,
            budget,
            json,
        } => {
            let t = tuple.tuple()?;
            let config = VerifyConfig {
                budget: *budget,
                census_k: *census_k,
                mu: *mu,
                ..VerifyConfig::default()
            };
            let cert = match check_census(&t, &config) {
                Err(e @ Error::BudgetExceeded { .. }) => {
                    eprintln!("{}", json!({ "error": e.to_string() }));
                    return Ok(false);
                }
                other => other?,
            };
            if *json {
                print_json(&cert);
            } else {
                let w = &cert.witnesses;
                if let Some(rep) = w.first() {
                    println!(
                        "census over {}: {} critical points, {} on Gamma",
                        rep["field"].as_str().unwrap_or("?"),
                        rep["points"].as_array().map_or(0, Vec::len),
                        rep["gamma_count"]
                    );
                }
                println!("census {}", verdict_text(&cert.verdict));
            }
            Ok(!matches!(
                cert.verdict,
                Verdict::Fail | Verdict::Skipped { cited: false, .. }
            ))
        }
        Command::Verify { tuple, run, out, json } => {
            let t = tuple.tuple()?;
            if cli.verbose {
                eprintln!("verifying {}", t.label());
            }
            let report = run_all(&t, &run.config())?;
            if let Some(dir) = out {
                let paths = write_certificates(std::slice::from_ref(&report), dir)
                    .map_err(|e| Usage(format!("cannot write to {}: {e}", dir.display())))?;
                if cli.verbose {
                    for p in paths {
                        eprintln!("wrote {}", p.display());
                    }
                }
            }
            if *json {
                print!("{}", render_report(&report));
            } else {
                for c in &report.certificates {
                    println!("{:<16} {}", c.lemma_id, verdict_text(&c.verdict));
                }
                for n in &report.notes {
                    println!("note: {n}");
                }
                println!("{} {}", t.label(), overall_text(report.overall));
            }
            Ok(report.overall == Overall::Pass)
        }
        Command::Sweep {
            n_min,
            n_max,
            min_l,
            seed,
            jobs,
            run,
            out,
            json,
        } => {
            if n_min > n_max {
                return Err(Usage("--n-min exceeds --n-max".into()));
            }
            let tuples = grid(*n_min, *n_max, (*min_l).max(2), *seed);
            if cli.verbose {
                eprintln!("sweeping {} tuples on {} threads", tuples.len(), jobs);
            }
            let reports = sweep(&tuples, &run.config(), *jobs)?;
            if let Some(dir) = out {
                write_certificates(&reports, dir)
                    .map_err(|e| Usage(format!("cannot write to {}: {e}", dir.display())))?;
            }
            if *json {
                print_json(&reports);
            } else {
                for rep in &reports {
                    println!("{} {}", rep.tuple.label(), overall_text(rep.overall));
                }
            }
            Ok(reports.iter().all(|r| r.overall == Overall::Pass))
        }
        Command::ETable { n_min, n_max, json } => {
            let rows = (*n_min..=*n_max)
                .map(theorem2_arith)
                .collect::<wpsb::Result<Vec<_>>>()?;
            if *json {
                print_json(&rows);
            } else {
                println!("{:>4} {:>3}  inequalities", "n", "e");
                for row in &rows {
                    println!(
                        "{:>4} {:>3}  {}",
                        row.n,
                        row.e,
                        if row.inequalities_hold { "hold" } else { "FAIL" }
                    );
                }
            }
            Ok(rows.iter().all(|r| r.inequalities_hold))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(msg)) => {
            eprintln!("{}", json!({ "error": msg }));
            ExitCode::from(2)
        }
    }
}
