use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use homlab::experiment::{self, ExperimentKind, ExperimentSpec};
use homlab::graph::{parse_edge_list, MultiGraph};
use homlab::hom::{self, CycleTarget, HomMap, Target};
use homlab::moment::{expected_tight_upper, tight_pair_count, Composition};
use homlab::rate::{certify, CertifyConfig};
use homlab::sampler::{sample_min_girth, seeded_rng, SamplerConfig};

/// Homomorphisms of random cubic graphs into odd cycles.
#[derive(Parser)]
#[command(name = "homlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check, tighten or count homomorphisms.
    #[command(subcommand)]
    Hom(HomCommand),
    /// Upper bound on the circular chromatic number.
    ChiC {
        #[arg(long)]
        graph: PathBuf,
        /// Largest denominator tried.
        #[arg(long, default_value_t = 4)]
        q_max: usize,
    },
    /// Draw a uniform matching triple.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reject draws whose union has a shorter cycle.
        #[arg(long)]
        min_girth: Option<usize>,
        /// Print the union as an edge list instead of the three matchings.
        #[arg(long)]
        union: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo experiments, written as CSV.
    Experiment {
        kind: ExperimentKind,
        #[command(flatten)]
        opts: ExperimentOpts,
    },
    /// Exact first-moment counts.
    #[command(subcommand)]
    Formula(FormulaCommand),
    /// Certify that the rate bound stays below a threshold.
    Certify {
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 0.00125)]
        eps_min: f64,
        #[arg(long, default_value_t = homlab::rate::DEFAULT_SLACK)]
        slack: f64,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        workers: Workers,
    },
}

#[derive(Subcommand)]
enum HomCommand {
    /// Search for a homomorphism, or verify one given with --map.
    Check {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "cycle:7")]
        target: Target,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Write the map that was found here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Make a homomorphism into an odd cycle tight.
    Tighten {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "cycle:7")]
        target: Target,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count homomorphisms into a cycle by enumeration.
    Count {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 7)]
        k: usize,
        /// Only count tight homomorphisms.
        #[arg(long)]
        tight: bool,
    },
}

#[derive(Subcommand)]
enum FormulaCommand {
    /// Tight (map, triple) pairs with the given class sizes.
    Term {
        #[arg(long)]
        n: usize,
        /// Seven comma-separated class sizes.
        #[arg(long)]
        composition: Composition,
    },
    /// Expected number of tight homomorphisms to C_7.
    ExpectedUpper {
        #[arg(long)]
        n: usize,
        /// Also list every non-zero term.
        #[arg(long)]
        terms: bool,
    },
}

#[derive(Args)]
struct Workers {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "HOMLAB_WORKERS")]
    workers: Option<usize>,
}

impl Workers {
    fn count(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

#[derive(Args)]
struct ExperimentOpts {
    /// Comma-separated even vertex counts.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    /// Target cycle length for hom-fraction.
    #[arg(long, default_value_t = 7)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    workers: Workers,
}

/// What a command found, mapped onto the exit status.
enum Outcome {
    Yes,
    No,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_graph(path: &Path) -> Result<MultiGraph> {
    parse_edge_list(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn hom_command(cmd: HomCommand) -> Result<Outcome> {
    match cmd {
        HomCommand::Check {
            graph,
            target,
            map,
            out,
        } => {
            let g = read_graph(&graph)?;
            if let Some(path) = map {
                let m = HomMap::parse(&read(&path)?, g.vertex_count(), target)?;
                return Ok(if hom::verify_homomorphism(&g, &m)? {
                    println!("valid homomorphism to {target}");
                    Outcome::Yes
                } else {
                    println!("not a homomorphism to {target}");
                    Outcome::No
                });
            }
            match hom::find_homomorphism(&g, target)? {
                Some(m) => {
                    eprintln!("homomorphism to {target} found");
                    emit(out.as_deref(), &m.to_text())?;
                    Ok(Outcome::Yes)
                }
                None => {
                    println!("no homomorphism to {target}");
                    Ok(Outcome::No)
                }
            }
        }
        HomCommand::Tighten {
            graph,
            target,
            map,
            out,
        } => {
            let g = read_graph(&graph)?;
            let m = HomMap::parse(&read(&map)?, g.vertex_count(), target)?;
            let t = hom::tighten(&g, &m)?;
            eprintln!("tight after {} steps", t.steps.len());
            emit(out.as_deref(), &t.map.to_text())?;
            Ok(Outcome::Yes)
        }
        HomCommand::Count { graph, k, tight } => {
            let g = read_graph(&graph)?;
            println!("{}", hom::count_homomorphisms(&g, CycleTarget::new(k)?, tight)?);
            Ok(Outcome::Yes)
        }
    }
}

fn formula_command(cmd: FormulaCommand) -> Result<Outcome> {
    match cmd {
        FormulaCommand::Term { n, composition } => {
            if composition.n() != n {
                bail!("composition sums to {}, not {}", composition.n(), n);
            }
            println!("{}", tight_pair_count(&composition)?);
        }
        FormulaCommand::ExpectedUpper { n, terms } => {
            let r = expected_tight_upper(n)?;
            if terms {
                for (c, t) in &r.terms {
                    println!("{c} {t}");
                }
            }
            println!("total {}", r.total);
            println!("triples {}", r.triples);
            println!("expected {}", r.expected);
            println!("approx {:e}", r.expected_f64());
        }
    }
    Ok(Outcome::Yes)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Hom(cmd) => hom_command(cmd),
        Command::ChiC { graph, q_max } => {
            let g = read_graph(&graph)?;
            let b = hom::circular_chromatic_upper(&g, q_max)?;
            println!("{}", b.value);
            Ok(Outcome::Yes)
        }
        Command::Sample {
            n,
            seed,
            min_girth,
            union,
            out,
        } => {
            let mut cfg = SamplerConfig::new(n, seed);
            if let Some(gi) = min_girth {
                cfg = cfg.with_min_girth(gi);
            }
            let (t, attempts) = sample_min_girth(&cfg, &mut seeded_rng(seed))?;
            if min_girth.is_some() {
                eprintln!("accepted after {attempts} attempts");
            }
            let text = if union { t.union().to_string() } else { t.to_string() };
            emit(out.as_deref(), &text)?;
            Ok(Outcome::Yes)
        }
        Command::Experiment { kind, opts } => {
            let spec = ExperimentSpec::new(kind, opts.n, opts.samples, opts.seed).with_cycle(opts.k);
            let rows = experiment::run(&spec, opts.workers.count())?;
            for r in rows.iter().filter(|r| r.mean_mis_ratio.is_some()) {
                eprintln!("n = {}: mean independence ratio {:.4}", r.n, r.mean_mis_ratio.unwrap());
            }
            emit(opts.out.as_deref(), &experiment::to_csv(&rows))?;
            Ok(Outcome::Yes)
        }
        Command::Formula(cmd) => formula_command(cmd),
        Command::Certify {
            threshold,
            eps,
            eps_min,
            slack,
            report,
            workers,
        } => {
            let cfg = CertifyConfig::new(threshold, eps, eps_min)
                .with_slack(slack)
                .with_workers(workers.count());
            let r = certify(&cfg)?;
            if let Some(path) = report {
                fs::write(&path, r.to_json() + "\n")
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            println!("boxes enumerated {}", r.boxes_enumerated);
            println!("boxes feasible   {}", r.boxes_feasible);
            println!("boxes refined    {}", r.boxes_refined);
            match r.max_bound {
                Some(b) => println!("max bound        {b:.9}"),
                None => println!("max bound        none"),
            }
            if r.certified {
                println!("certified: bound below {threshold} everywhere");
                Ok(Outcome::Yes)
            } else {
                println!("not certified: {} offending boxes", r.offender_count);
                Ok(Outcome::No)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
