//! Command-line surface: build stores from versioned N-Quads files, run
//! queries embedded or as SQL text, inspect stats, benchmark, self-test.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use condyr_core::exec::{self, DecodedTable, ExecOptions};
use condyr_core::nquads;
use condyr_core::oracle;
use condyr_core::parser::{parse_with_options, ParseOptions, DEFAULT_METADATA_GRAPH_IRI};
use condyr_core::plan::plan;
use condyr_core::sample;
use condyr_core::sql::{emit, EmitOptions};
use condyr_core::store::Store;
use condyr_core::testgen::{self, GenParams};

#[derive(Parser)]
#[command(
    name = "condyr",
    version,
    about = "Versioned quad store: unique quads with validity bitstrings, embedded querying, SQL emission"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest N-Quads files as successive versions and save the store
    Load(LoadArgs),
    /// Run a query against a store
    Query(QueryArgs),
    /// Print store statistics
    Stats(StatsArgs),
    /// Time queries from a directory and report logical work counters
    Bench(BenchArgs),
    /// Run the golden suite plus randomized equivalence rounds
    Selftest(SelftestArgs),
}

#[derive(clap::Args)]
struct LoadArgs {
    /// Store file to create or extend
    #[arg(long)]
    store: PathBuf,
    /// One N-Quads file per version, ingested in argument order
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QueryMode {
    Execute,
    Sql,
    Explain,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(clap::Args)]
struct QueryArgs {
    #[arg(long)]
    store: PathBuf,
    /// Query text; use --query-file to read it from a file instead
    #[arg(required_unless_present = "query_file", conflicts_with = "query_file")]
    query: Option<String>,
    #[arg(long)]
    query_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "execute")]
    mode: QueryMode,
    /// Render bound terms as resolved integer ids in emitted SQL
    #[arg(long)]
    inline_ids: bool,
    /// IRI of the reserved metadata graph
    #[arg(long, default_value = DEFAULT_METADATA_GRAPH_IRI)]
    metadata_graph: String,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
    /// Sort result rows for reproducible output
    #[arg(long)]
    sort: bool,
}

#[derive(clap::Args)]
struct StatsArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    store: PathBuf,
    /// Directory of query files, run in name order
    #[arg(long)]
    queries: PathBuf,
    /// Total executions per query, including warm-up
    #[arg(long, default_value_t = 200)]
    reps: u32,
    /// Leading executions excluded from the reported times
    #[arg(long, default_value_t = 50)]
    warmup: u32,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(clap::Args)]
struct SelftestArgs {
    /// Randomized equivalence rounds to run after the golden suite
    #[arg(long, default_value_t = 100)]
    rounds: u32,
    #[arg(long, default_value_t = 0xC0D1)]
    seed: u64,
}

/// 0 on success, 1 on user or query errors, 2 on internal invariant
/// violations (failed self-test, corrupted store).
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match cli.command {
        Command::Load(args) => cmd_load(args),
        Command::Query(args) => cmd_query(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Selftest(args) => cmd_selftest(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(err)) => {
            eprintln!("internal error: {err:#}");
            ExitCode::from(2)
        }
    }
}

enum Failure {
    User(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure::User(err)
    }
}

fn open_store(path: &Path) -> Result<Store> {
    Store::load(path).with_context(|| format!("cannot open store {}", path.display()))
}

fn fault_options() -> ExecOptions {
    let fault = std::env::var("CONDYR_FAULT").unwrap_or_default();
    ExecOptions { fault_and_join: fault == "and-join" }
}

fn cmd_load(args: LoadArgs) -> Result<(), Failure> {
    let mut store = if args.store.exists() {
        open_store(&args.store)?
    } else {
        Store::new()
    };
    for file in &args.files {
        let reader = fs::File::open(file)
            .map(BufReader::new)
            .with_context(|| format!("cannot read {}", file.display()))?;
        let scope = file.display().to_string();
        let quads = nquads::parse_nquads(reader, &scope)
            .map_err(|e| anyhow!("{}: {e}", file.display()))?;
        let version = store
            .ingest_version(&quads)
            .map_err(|e| anyhow!("{}: {e}", file.display()))?;
        println!("version {version}: {} quads from {}", quads.len(), file.display());
    }
    store
        .save(&args.store)
        .with_context(|| format!("cannot save store {}", args.store.display()))?;
    let stats = store.stats();
    println!(
        "V={}, quads={}, flat_rows={}",
        stats.version_count, stats.quad_count, stats.flat_row_count
    );
    Ok(())
}

fn read_query(args: &QueryArgs) -> Result<String> {
    match (&args.query, &args.query_file) {
        (Some(text), None) => Ok(text.clone()),
        (None, Some(path)) => {
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
        }
        _ => unreachable!("clap enforces exactly one query source"),
    }
}

fn print_decoded(table: DecodedTable, format: Format, sort: bool) {
    let table = if sort { table.sorted() } else { table };
    match format {
        Format::Tsv => {
            println!("{}", table.columns.join("\t"));
            for row in &table.rows {
                println!("{}", row.join("\t"));
            }
        }
        Format::Json => {
            println!("{}", serde_json::json!({ "columns": table.columns }));
            for row in &table.rows {
                println!("{}", serde_json::json!(row));
            }
        }
    }
}

fn cmd_query(args: QueryArgs) -> Result<(), Failure> {
    let store = open_store(&args.store)?;
    let text = read_query(&args)?;
    let options = ParseOptions { metadata_graph_iri: args.metadata_graph.clone() };
    let algebra = parse_with_options(&text, &options).map_err(|e| anyhow!("{e}"))?;
    let planned = plan(&algebra, &store).map_err(|e| anyhow!("{e}"))?;
    match args.mode {
        QueryMode::Explain => print!("{}", planned.explain()),
        QueryMode::Sql => {
            let sql = emit(&planned, &EmitOptions { inline_ids: args.inline_ids });
            println!("{}", sql.text);
        }
        QueryMode::Execute => {
            let table = exec::execute(&planned, &store);
            let decoded = exec::decode(&table, &store)
                .map_err(|e| Failure::Internal(anyhow!("result decoding failed: {e}")))?;
            print_decoded(decoded, args.format, args.sort);
        }
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), Failure> {
    let stats = open_store(&args.store)?.stats();
    match args.format {
        Format::Tsv => {
            println!(
                "V={}, quads={}, terms={}, vngs={}, flat_rows={}",
                stats.version_count,
                stats.quad_count,
                stats.term_count,
                stats.vng_count,
                stats.flat_row_count
            );
        }
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "version_count": stats.version_count,
                "quad_count": stats.quad_count,
                "term_count": stats.term_count,
                "vng_count": stats.vng_count,
                "flat_row_count": stats.flat_row_count,
            })
        ),
    }
    Ok(())
}

fn median(sorted: &[u128]) -> u128 {
    if sorted.is_empty() {
        return 0;
    }
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2
    } else {
        sorted[mid]
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    if args.reps <= args.warmup {
        return Err(Failure::User(anyhow!(
            "--reps ({}) must exceed --warmup ({})",
            args.reps,
            args.warmup
        )));
    }
    let store = open_store(&args.store)?;
    let mut files: Vec<PathBuf> = fs::read_dir(&args.queries)
        .with_context(|| format!("cannot read {}", args.queries.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::User(anyhow!("no query files in {}", args.queries.display())));
    }

    let flat = oracle::materialize_flat(&store);
    if args.format == Format::Tsv {
        println!("query\truns\tmean_us\tmedian_us\trows_scanned\tand_ops\tflat_rows_scanned");
    }
    for file in &files {
        let name = file.file_name().unwrap_or_default().to_string_lossy().to_string();
        let outcome = (|| -> Result<(u32, u128, u128, u64, u64, u64)> {
            let text = fs::read_to_string(file)?;
            let algebra = parse_with_options(&text, &ParseOptions::default())
                .map_err(|e| anyhow!("{e}"))?;
            let planned = plan(&algebra, &store).map_err(|e| anyhow!("{e}"))?;

            let (_, stats) =
                exec::execute_with_stats(&planned, &store, &ExecOptions::default());
            let (_, flat_scanned) = flat.evaluate_counting(&algebra);

            for _ in 0..args.warmup {
                exec::execute(&planned, &store);
            }
            let measured = args.reps - args.warmup;
            let mut times: Vec<u128> = Vec::with_capacity(measured as usize);
            for _ in 0..measured {
                let start = Instant::now();
                exec::execute(&planned, &store);
                times.push(start.elapsed().as_micros());
            }
            times.sort_unstable();
            let mean = times.iter().sum::<u128>() / times.len() as u128;
            Ok((measured, mean, median(&times), stats.rows_scanned, stats.and_ops, flat_scanned))
        })();
        match (outcome, args.format) {
            (Ok((runs, mean, median, scanned, and_ops, flat_scanned)), Format::Tsv) => {
                println!(
                    "{name}\t{runs}\t{mean}\t{median}\t{scanned}\t{and_ops}\t{flat_scanned}"
                );
            }
            (Ok((runs, mean, median, scanned, and_ops, flat_scanned)), Format::Json) => {
                println!(
                    "{}",
                    serde_json::json!({
                        "query": name,
                        "runs": runs,
                        "mean_us": mean as u64,
                        "median_us": median as u64,
                        "rows_scanned": scanned,
                        "and_ops": and_ops,
                        "flat_rows_scanned": flat_scanned,
                    })
                );
            }
            (Err(err), _) => eprintln!("{name}: failed: {err:#}"),
        }
    }
    Ok(())
}

fn golden_suite(options: &ExecOptions) -> Result<()> {
    let store = sample::sample_store();
    let run = |query: &str| -> Result<DecodedTable> {
        let algebra =
            parse_with_options(query, &ParseOptions::default()).map_err(|e| anyhow!("{e}"))?;
        let planned = plan(&algebra, &store).map_err(|e| anyhow!("{e}"))?;
        let (table, _) = exec::execute_with_stats(&planned, &store, options);
        exec::decode(&table, &store).map_err(|e| anyhow!("{e}"))
    };
    let project = |table: &DecodedTable, names: &[&str]| -> Result<Vec<Vec<String>>> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| table.column_index(n).ok_or_else(|| anyhow!("missing column {n}")))
            .collect::<Result<_>>()?;
        let mut rows: Vec<Vec<String>> =
            table.rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect();
        rows.sort();
        Ok(rows)
    };
    let expect = |label: &str, got: Vec<Vec<String>>, mut want: Vec<Vec<String>>| -> Result<()> {
        want.sort();
        if got != want {
            bail!("golden check '{label}' failed:\n  got:  {got:?}\n  want: {want:?}");
        }
        Ok(())
    };

    let table = run(sample::QUERY_KNOWS)?;
    expect(
        "single pattern",
        project(&table, &["v$s", "v$o", "ng$g", "bs$g"])?,
        sample::expected_knows()
            .into_iter()
            .map(|(s, o, g, bs)| vec![s.into(), o.into(), g.into(), bs.into()])
            .collect(),
    )?;

    let table = run(sample::QUERY_KNOWS_LIKES)?;
    expect(
        "shared-graph join",
        project(&table, &["v$s", "v$o", "v$liked", "ng$g", "bs$g"])?,
        sample::expected_knows_likes()
            .into_iter()
            .map(|(s, o, liked, g, bs)| {
                vec![s.into(), o.into(), format!("\"{liked}\""), g.into(), bs.into()]
            })
            .collect(),
    )?;

    let table = run(sample::QUERY_KNOWS_VERSIONS)?;
    if table.rows.len() != 6 {
        bail!("golden check 'metadata join' failed: expected 6 rows, got {}", table.rows.len());
    }
    expect(
        "metadata join versions",
        project(&table, &["v$s", "v$o", "v$v"])?,
        sample::expected_knows_versions()
            .into_iter()
            .map(|(s, o, _, _, v)| vec![s.into(), o.into(), format!("\"{v}\"")])
            .collect(),
    )?;

    let table = run(sample::QUERY_COUNT_KNOWS)?;
    expect(
        "grouped count",
        project(&table, &["v$o", "v$count"])?,
        sample::expected_count_knows()
            .into_iter()
            .map(|(o, n)| vec![o.to_string(), n.to_string()])
            .collect(),
    )?;
    Ok(())
}

fn cmd_selftest(args: SelftestArgs) -> Result<(), Failure> {
    let options = fault_options();
    let started = Instant::now();

    if let Err(err) = golden_suite(&options) {
        return Err(Failure::Internal(anyhow!("{err:#}")));
    }
    println!("selftest: golden suite passed");

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let params = GenParams::default();
    for round in 0..args.rounds {
        let store = testgen::random_store(&mut rng, &params);
        let query = testgen::random_query(&mut rng, &store);
        if let Err(mismatch) = testgen::check_equivalence_with(&store, &query, &options) {
            eprintln!("selftest: round {round} (seed {}) diverged", args.seed);
            eprintln!("{mismatch}");
            return Err(Failure::Internal(anyhow!(
                "randomized equivalence failed at round {round}"
            )));
        }
    }
    println!(
        "selftest: {} randomized rounds passed in {:.2}s",
        args.rounds,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
