//! Command-line front end for fare structure design.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fareplan::io::{self, Instance, Report};
use fareplan::milp::{build_milp, check_assignment, parse_lp_file, write_lp_file};
use fareplan::reduction::{generate_bipartite_reduction, generate_multicut_reduction};
use fareplan::zone_pricing::{
    build_levels, price_monotone, price_monotone_lp, price_no_stopover, price_unrestricted,
};
use fareplan::{
    affine_design, affine_design_lp, check_monotone, check_no_stopover_condition, fixtures, flat_design,
    is_connected_partition, objective, solve_exact, CountingMode, DesignConfig, DistanceMetric, DistancePoint,
    Error, MedianPick, Tariff, CROSS_CHECK_EPS,
};

#[derive(Parser)]
#[command(name = "fareplan", version, about = "Design flat, distance and zone tariffs against reference prices")]
struct Cli {
    /// Instance file, or the name of a built-in fixture.
    #[arg(long, global = true)]
    instance: Option<String>,
    /// Write the machine-readable report (or exported model) here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Which weighted median to report when the optimum is an interval.
    #[arg(long, global = true, value_enum, default_value_t = MedianArg::Lower)]
    median: MedianArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MedianArg {
    Lower,
    Upper,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountingArg {
    Multiple,
    Single,
}

impl From<CountingArg> for CountingMode {
    fn from(c: CountingArg) -> CountingMode {
        match c {
            CountingArg::Multiple => CountingMode::Multiple,
            CountingArg::Single => CountingMode::Single,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Network,
    Beeline,
}

#[derive(Args, Clone)]
struct ZoneFlags {
    /// Zone counting mode; defaults to the instance's config block.
    #[arg(long, value_enum)]
    counting: Option<CountingArg>,
    /// Require every zone to induce a connected subgraph.
    #[arg(long)]
    connected: bool,
    /// Upper bound on the number of zones; defaults to the instance's
    /// config block.
    #[arg(long)]
    max_zones: Option<usize>,
    /// Require monotonically increasing prices.
    #[arg(long)]
    no_elongation: bool,
    /// Require the no-stopover price condition.
    #[arg(long)]
    no_stopover: bool,
}

impl ZoneFlags {
    fn resolve(&self, instance: &Instance) -> Result<DesignConfig, Error> {
        let base = instance.config;
        let mode = self
            .counting
            .map(CountingMode::from)
            .or(base.map(|c| c.mode))
            .ok_or_else(|| Error::InvalidInput("--counting required (instance has no config block)".into()))?;
        let max_zones = self
            .max_zones
            .or(base.map(|c| c.max_zones))
            .ok_or_else(|| Error::InvalidInput("--max-zones required (instance has no config block)".into()))?;
        Ok(DesignConfig {
            mode,
            connected: self.connected || base.is_some_and(|c| c.connected),
            max_zones,
            require_no_elongation: self.no_elongation || base.is_some_and(|c| c.require_no_elongation),
            require_no_stopover: self.no_stopover || base.is_some_and(|c| c.require_no_stopover),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Optimal flat tariff (a weighted median of the reference prices).
    Flat,
    /// Optimal affine distance tariff via the finite candidate set.
    Distance {
        #[arg(long, value_enum, default_value_t = MetricArg::Network)]
        metric: MetricArg,
        /// Cross-check the candidate-set optimum against the LP route.
        #[arg(long)]
        verify: bool,
    },
    /// Price a fixed zone partition.
    ZonePrices {
        /// Partition document assigning every station to a zone.
        #[arg(long)]
        partition: PathBuf,
        #[arg(long, value_enum)]
        counting: CountingArg,
        /// Require monotonically increasing prices.
        #[arg(long)]
        monotone: bool,
        /// Require the no-stopover price condition.
        #[arg(long)]
        no_stopover: bool,
        /// Cross-check the merge algorithm against the LP route.
        #[arg(long)]
        verify: bool,
    },
    /// Exact zone tariff design by exhaustive partition search.
    ZoneDesign {
        #[command(flatten)]
        zone: ZoneFlags,
        /// Worker threads for the partition search (results are
        /// independent of this).
        #[arg(long)]
        threads: Option<usize>,
        /// Also write the optimal tariff as a tariff document.
        #[arg(long)]
        out_tariff: Option<PathBuf>,
    },
    /// Write the zone design MILP in LP file format.
    ExportMilp {
        #[command(flatten)]
        zone: ZoneFlags,
    },
    /// Check fairness properties and MILP feasibility of a tariff.
    Check {
        /// Tariff document to check.
        #[arg(long)]
        tariff: PathBuf,
        #[command(flatten)]
        zone: ZoneFlags,
    },
    /// Evaluate a tariff document against the instance demand.
    Eval {
        #[arg(long)]
        tariff: PathBuf,
    },
    /// Generate hard zone-design instances from classic problems.
    GenReduction {
        #[command(subcommand)]
        kind: ReductionKind,
    },
}

#[derive(Subcommand)]
enum ReductionKind {
    /// Maximum bipartite subgraph: is there a bipartite subgraph with at
    /// least --q-prime edges?
    Bipartite {
        /// Source graph document (`nodes`, `edges`).
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        q_prime: usize,
    },
    /// Multicut on a star: can --budget edge deletions separate all
    /// --pairs?
    Multicut {
        /// Source star graph document (`nodes`, `edges`).
        #[arg(long)]
        graph: PathBuf,
        /// Terminal pairs as `a:b,c:d`.
        #[arg(long)]
        pairs: String,
        #[arg(long)]
        budget: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn load_required_instance(cli: &Cli) -> Result<Instance, Error> {
    let arg = cli
        .instance
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("--instance is required".into()))?;
    let path = std::path::Path::new(arg);
    if path.exists() {
        io::load_instance(&std::fs::read_to_string(path)?)
    } else if let Some(fixture) = fixtures::fixture(arg) {
        Ok(fixture.instance)
    } else {
        Err(Error::InvalidInput(format!(
            "{arg:?} is neither a file nor a fixture (fixtures: {})",
            fixtures::fixture_names().join(", ")
        )))
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<(), Error> {
    print!("{}", report.render_table());
    if let Some(path) = &cli.out {
        std::fs::write(path, report.to_toml())?;
    }
    Ok(())
}

fn write_or_print(cli: &Cli, text: &str) -> Result<(), Error> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Flat => {
            let inst = load_required_instance(cli)?;
            let pick = match cli.median {
                MedianArg::Lower => MedianPick::Lower,
                MedianArg::Upper => MedianPick::Upper,
            };
            let sol = flat_design(&inst.demand, pick)?;
            let report =
                Report::for_tariff(&inst.ptn, &Tariff::Flat { price: sol.price }, &inst.demand, "flat")?;
            emit(cli, &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Distance { metric, verify } => {
            let inst = load_required_instance(cli)?;
            let metric = match metric {
                MetricArg::Network => DistanceMetric::Network,
                MetricArg::Beeline => DistanceMetric::Beeline,
            };
            let points = DistancePoint::from_demand(&inst.ptn, &inst.demand, metric)?;
            let sol = affine_design(&points)?;
            let tariff = Tariff::AffineDistance { rate: sol.rate, base: sol.base, metric };
            let report = Report::for_tariff(&inst.ptn, &tariff, &inst.demand, "distance")?;
            emit(cli, &report)?;
            if *verify {
                let lp = affine_design_lp(&points)?;
                let gap = (lp.objective - sol.objective).abs();
                println!("verify: candidate-set objective {:.6}, LP objective {:.6}", sol.objective, lp.objective);
                half_weight_diagnostic(&points, sol.rate, sol.base);
                if gap > CROSS_CHECK_EPS {
                    eprintln!("error: cross-check disagrees by {gap}");
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ZonePrices { partition, counting, monotone, no_stopover, verify } => {
            let inst = load_required_instance(cli)?;
            let partition = io::load_partition(&std::fs::read_to_string(partition)?, &inst.ptn)?;
            let mode: CountingMode = (*counting).into();
            let levels = build_levels(&partition, mode, &inst.demand)?;
            let (prices, _) = if *no_stopover {
                price_no_stopover(&levels, mode, *monotone)?
            } else if *monotone {
                price_monotone(&levels)
            } else {
                price_unrestricted(&levels)
            };
            let tariff = Tariff::Zone { partition, mode, prices };
            let mut report = Report::for_tariff(&inst.ptn, &tariff, &inst.demand, "zone-prices")?;
            report.variant = Some(format!(
                "{} counting{}{}",
                mode.label(),
                if *monotone { ", monotone" } else { "" },
                if *no_stopover { ", no-stopover" } else { "" },
            ));
            emit(cli, &report)?;
            if *verify && *monotone && !*no_stopover {
                let (_, merge_obj) = price_monotone(&levels);
                let (_, lp_obj) = price_monotone_lp(&levels)?;
                println!("verify: merge objective {merge_obj:.6}, LP objective {lp_obj:.6}");
                if (merge_obj - lp_obj).abs() > CROSS_CHECK_EPS {
                    eprintln!("error: cross-check disagrees by {}", (merge_obj - lp_obj).abs());
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ZoneDesign { zone, threads, out_tariff } => {
            let inst = load_required_instance(cli)?;
            let config = zone.resolve(&inst)?;
            let result = match threads {
                None => solve_exact(&inst.ptn, &inst.demand, &config)?,
                Some(t) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(*t)
                        .build()
                        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
                    pool.install(|| solve_exact(&inst.ptn, &inst.demand, &config))?
                }
            };
            let report = Report::for_design_result(&inst.ptn, &result, &inst.demand)?;
            emit(cli, &report)?;
            if let Some(path) = out_tariff {
                std::fs::write(path, io::save_tariff(&result.tariff(), &inst.ptn))?;
            }
            if let Some(threshold) = inst.threshold {
                let answer = if result.objective <= threshold + 1e-9 { "yes" } else { "no" };
                println!("decision: optimum {:.4} vs threshold {:.4} -> {answer}", result.objective, threshold);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportMilp { zone } => {
            let inst = load_required_instance(cli)?;
            let config = zone.resolve(&inst)?;
            let model = build_milp(&inst.ptn, &inst.demand, &config)?;
            let text = write_lp_file(&model);
            parse_lp_file(&text).expect("exported models parse back");
            write_or_print(cli, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { tariff, zone } => {
            let inst = load_required_instance(cli)?;
            let tariff = io::load_tariff(&std::fs::read_to_string(tariff)?, &inst.ptn)?;
            check_tariff(cli, &inst, &tariff, zone)
        }
        Command::Eval { tariff } => {
            let inst = load_required_instance(cli)?;
            let tariff = io::load_tariff(&std::fs::read_to_string(tariff)?, &inst.ptn)?;
            let report = Report::for_tariff(&inst.ptn, &tariff, &inst.demand, "eval")?;
            emit(cli, &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::GenReduction { kind } => {
            let instance = match kind {
                ReductionKind::Bipartite { graph, q_prime } => {
                    let graph = io::load_source_graph(&std::fs::read_to_string(graph)?)?;
                    generate_bipartite_reduction(&graph, *q_prime)?
                }
                ReductionKind::Multicut { graph, pairs, budget } => {
                    let graph = io::load_source_graph(&std::fs::read_to_string(graph)?)?;
                    let pairs = parse_pairs(pairs)?;
                    generate_multicut_reduction(&graph, &pairs, *budget)?
                }
            };
            write_or_print(cli, &io::save_reduction(&instance))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, Error> {
    text.split(',')
        .map(|pair| {
            pair.trim()
                .split_once(':')
                .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                .ok_or_else(|| Error::InvalidInput(format!("terminal pair {pair:?} is not of the form a:b")))
        })
        .collect()
}

/// Prints whether at most half of the passengers sit strictly below and
/// strictly above their fare; holds whenever the nonnegativity bounds do
/// not bind the affine optimum.
fn half_weight_diagnostic(points: &[DistancePoint], rate: f64, base: f64) {
    let total: u64 = points.iter().map(|p| p.passengers).sum();
    let below: u64 = points
        .iter()
        .filter(|p| p.reference_price < rate * p.distance + base)
        .map(|p| p.passengers)
        .sum();
    let above: u64 = points
        .iter()
        .filter(|p| p.reference_price > rate * p.distance + base)
        .map(|p| p.passengers)
        .sum();
    let holds = 2 * below <= total && 2 * above <= total;
    println!(
        "diagnostic: half-weight property {} ({below} of {total} pay above reference, {above} below)",
        if holds { "holds" } else { "does not hold (bounds bind)" }
    );
}

fn check_tariff(cli: &Cli, inst: &Instance, tariff: &Tariff, zone: &ZoneFlags) -> Result<ExitCode, Error> {
    let mut report = Report::for_tariff(&inst.ptn, tariff, &inst.demand, "check")?;
    let mut failed = false;
    match tariff {
        Tariff::Flat { .. } => {
            println!("flat tariff: no-elongation and no-stopover hold for any fixed price");
        }
        Tariff::AffineDistance { metric, .. } => match metric {
            DistanceMetric::Network => {
                println!("network distance tariff: no-elongation and no-stopover hold");
            }
            DistanceMetric::Beeline => {
                println!("beeline distance tariff: no-stopover holds; no-elongation is not guaranteed");
            }
        },
        Tariff::Zone { partition, mode, prices } => {
            let monotone = check_monotone(prices);
            let stopover = check_no_stopover_condition(prices, *mode);
            let connected = is_connected_partition(&inst.ptn, partition);
            println!("monotone price list (no-elongation condition): {monotone}");
            println!("no-stopover condition ({} counting): {stopover}", mode.label());
            println!("connected zones: {connected}");

            let mut config = DesignConfig {
                mode: *mode,
                connected,
                max_zones: partition.zone_count(),
                require_no_elongation: monotone,
                require_no_stopover: stopover,
            };
            if let Ok(resolved) = zone.resolve(inst) {
                config = resolved;
            }
            let model = build_milp(&inst.ptn, &inst.demand, &config)?;
            let check = check_assignment(&model, &inst.ptn, partition, prices, &inst.demand)?;
            println!(
                "MILP assignment ({} N={}{}): {}",
                config.variant(),
                config.max_zones,
                if config.connected { ", connected" } else { "" },
                if check.feasible { "feasible" } else { "infeasible" }
            );
            for violation in &check.violations {
                println!("  violated: {} (by {:.6})", violation.name, violation.amount);
            }
            println!("MILP objective: {:.4}, direct objective: {:.4}", check.objective, report.objective);
            report.variant = Some(config.variant().to_string());
            failed = !check.feasible
                || (config.require_no_elongation && !monotone)
                || (config.require_no_stopover && !stopover)
                || (config.connected && !connected);
        }
    }
    emit(cli, &report)?;
    let unchanged = objective(&inst.ptn, tariff, &inst.demand)?;
    debug_assert_eq!(unchanged, report.objective);
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}
