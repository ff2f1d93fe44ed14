//! `rscc` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::ams::{self, AmsParams, DEFAULT_VERTEX_BUDGET};
use crate::graph::{Graph, Vertex};
use crate::io::{self, LibraryManifest};
use crate::partition::{verify_rs_partition, DEFAULT_EDGE_LIMIT};
use crate::rational;
use crate::scheme::{self, DemandVector, PacketLibrary};
use crate::sim::{self, DemandMode, GraphSource, LibrarySource, PartitionMode, SimConfig, SimError};

const AFTER_HELP: &str = "\
Symbols: K users = vertices = packets per file (F = K); N files; B bytes per
packet; t induced matchings = payloads per delivery; R = t/K file
transmissions; M/N fraction of the library each user caches.

Exit codes: 0 ok, 1 usage or input error, 2 partition verification failure,
3 decode mismatch.";

#[derive(Debug, Parser)]
#[command(name = "rscc", version, about = "Coded caching from induced-matching partitions", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Seed for every pseudo-random choice (ChaCha8).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output style; `simulate` defaults to json, everything else to table.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress summary lines.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Greedy,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DemandKind {
    Exhaustive,
    Random,
    Presets,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance-threshold graph on {0..C-1}^n: tuples u != v are adjacent iff
    /// | ||u-v||^2 - n(C^2-1)/6 | < n.
    GenAms {
        /// Alphabet size C.
        #[arg(long)]
        c: u64,
        /// Tuple dimension n (even, n >= 2C unless --relax). K = C^n.
        #[arg(long)]
        n: u64,
        /// Allow odd n or n < 2C.
        #[arg(long)]
        relax: bool,
        #[arg(long, default_value_t = DEFAULT_VERTEX_BUDGET)]
        vertex_budget: usize,
    },
    /// Random graph with independent edges.
    GenRandom {
        /// Number of vertices K.
        #[arg(long)]
        k: usize,
        /// Edge probability.
        #[arg(long)]
        p: f64,
    },
    /// Split a graph's edges into induced matchings and write the partition file.
    Partition {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Greedy)]
        mode: Mode,
        /// Edge cap for --mode exact.
        #[arg(long, default_value_t = DEFAULT_EDGE_LIMIT)]
        edge_limit: usize,
    },
    /// Check that a partition splits the graph into edge-disjoint induced
    /// matchings; prints the average size r and the count t.
    Verify {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(short = 'p', long)]
        partition: PathBuf,
    },
    /// Rate R = t/K, subpacketization F = K and the cache ratio M/N the
    /// placement needs.
    SchemeInfo {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(short = 'p', long)]
        partition: PathBuf,
    },
    /// Place a library, deliver for every demand vector and check every user
    /// decodes its file exactly. Emits a JSON report (or a baseline table).
    Simulate(SimulateArgs),
    /// Smallest construction for rate exponent delta (R = K^delta), as JSON.
    Plan {
        /// Target exponent in (0, 1].
        #[arg(long)]
        delta: f64,
    },
    /// Asymptotic exponents f (t ~ K^f matchings) and g (K^g missing edges).
    Exponents {
        #[arg(long)]
        c: u64,
    },
    /// Read a directory of files into a K x B packet library; prints the manifest.
    Ingest {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        b: usize,
    },
    /// Encode one delivery batch (header line + t payloads) for a demand vector.
    Deliver {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(short = 'p', long)]
        partition: PathBuf,
        #[command(flatten)]
        library: LibraryArgs,
        /// Comma-separated file index per user.
        #[arg(long)]
        demand: String,
    },
    /// Decode one user's file from a delivery batch and its cache.
    Decode {
        #[arg(short = 'g', long)]
        graph: PathBuf,
        #[arg(short = 'p', long)]
        partition: PathBuf,
        #[command(flatten)]
        library: LibraryArgs,
        #[arg(long)]
        batch: PathBuf,
        #[arg(long)]
        user: Vertex,
    },
}

#[derive(Debug, Args)]
struct LibraryArgs {
    /// Number of seeded random files N.
    #[arg(long, default_value_t = 2, conflicts_with = "library_dir")]
    files: usize,
    /// Ingest files from this directory instead (lexicographic order).
    #[arg(long)]
    library_dir: Option<PathBuf>,
    /// Packet size B in bytes.
    #[arg(long, default_value_t = 64)]
    packet_bytes: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Graph file.
    #[arg(short = 'g', long, group = "source")]
    graph: Option<PathBuf>,
    /// Built-in graph: c6, triangle, k16-ams, edgeless-4.
    #[arg(long, group = "source")]
    fixture: Option<String>,
    /// Distance graph alphabet size C (with --ams-n).
    #[arg(long, group = "source", requires = "ams_n")]
    ams_c: Option<u64>,
    /// Distance graph dimension n.
    #[arg(long)]
    ams_n: Option<u64>,
    /// Allow odd n or n < 2C.
    #[arg(long)]
    relax: bool,
    /// Random graph on this many vertices (with --random-p).
    #[arg(long, group = "source", requires = "random_p")]
    random_k: Option<usize>,
    /// Edge probability of the random graph.
    #[arg(long)]
    random_p: Option<f64>,
    /// Graph seed; defaults to --seed.
    #[arg(long)]
    random_seed: Option<u64>,
    /// Refuse distance graphs with more vertices than this.
    #[arg(long, default_value_t = DEFAULT_VERTEX_BUDGET)]
    vertex_budget: usize,

    /// Partition file; otherwise computed with --mode.
    #[arg(short = 'p', long)]
    partition: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Greedy)]
    mode: Mode,
    /// Edge cap for --mode exact.
    #[arg(long, default_value_t = DEFAULT_EDGE_LIMIT)]
    edge_limit: usize,

    #[command(flatten)]
    library: LibraryArgs,

    /// Demand ensembles, concatenated. Default: exhaustive when N^K <= 1e5,
    /// else random plus presets.
    #[arg(long, value_enum)]
    demands: Vec<DemandKind>,
    /// Explicit demand vector, comma separated; repeatable.
    #[arg(long)]
    demand: Vec<String>,
    /// Vectors in the random ensemble.
    #[arg(long, default_value_t = 1000)]
    demand_count: usize,
    /// Demand seed; defaults to --seed.
    #[arg(long)]
    demand_seed: Option<u64>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn verification(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure { code: e.exit_code(), message: e.to_string() }
    }
}

impl From<io::FormatError> for Failure {
    fn from(e: io::FormatError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{}", e.render())
            };
            return code;
        }
    };
    match run(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(global: &GlobalArgs, stdout: &mut dyn Write, bytes: &[u8]) -> CmdResult {
    match &global.out {
        Some(path) => fs::write(path, bytes).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => Ok(stdout.write_all(bytes)?),
    }
}

fn note(global: &GlobalArgs, stdout: &mut dyn Write, line: &str) -> CmdResult {
    if global.out.is_some() && !global.quiet {
        writeln!(stdout, "{line}")?;
    }
    Ok(())
}

fn parse_demand(s: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("bad demand vector `{s}`")))
}

fn load_library(args: &LibraryArgs, k: usize, seed: u64) -> Result<PacketLibrary, Failure> {
    match &args.library_dir {
        Some(dir) => Ok(sim::ingest_library(dir, k, args.packet_bytes)?.0),
        None => PacketLibrary::seeded(args.files, k, args.packet_bytes, seed).map_err(|e| Failure::usage(e.to_string())),
    }
}

fn load_verified(graph: &Path, partition: &Path) -> Result<(Graph, crate::partition::RsPartition), Failure> {
    let g = io::load_graph(graph)?;
    let p = io::load_partition(partition)?;
    verify_rs_partition(&g, &p).map_err(|e| Failure::verification(e.to_string()))?;
    Ok((g, p))
}

fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let global = &cli.global;
    match cli.command {
        Command::GenAms { c, n, relax, vertex_budget } => {
            let params = AmsParams::new(c, n, relax).map_err(|e| Failure::usage(e.to_string()))?;
            let g = ams::ams_graph(&params, vertex_budget).map_err(|e| Failure::usage(e.to_string()))?;
            emit(global, stdout, io::write_graph(&g).as_bytes())?;
            if params.relaxed && !global.quiet {
                writeln!(stderr, "warning: relaxed parameters (n even, n >= 2C not enforced)")?;
            }
            note(
                global,
                stdout,
                &format!(
                    "K={} edges={} min_degree={} degree_bound={:.4} relaxed={}",
                    g.vertex_count(),
                    g.edge_count(),
                    g.min_degree(),
                    ams::ams_min_degree_bound(&params),
                    params.relaxed
                ),
            )
        }
        Command::GenRandom { k, p } => {
            let g = sim::random_graph(k, p, global.seed)?;
            emit(global, stdout, io::write_graph(&g).as_bytes())?;
            note(global, stdout, &format!("K={} edges={} seed={}", k, g.edge_count(), global.seed))
        }
        Command::Partition { graph, mode, edge_limit } => {
            let g = io::load_graph(&graph)?;
            let mode = match mode {
                Mode::Greedy => PartitionMode::Greedy,
                Mode::Exact => PartitionMode::Exact { edge_limit },
            };
            let p = sim::build_partition(&g, &mode)?;
            let params = verify_rs_partition(&g, &p).map_err(|e| Failure::verification(e.to_string()))?;
            emit(global, stdout, io::write_partition(&p).as_bytes())?;
            note(global, stdout, &format!("r={} t={}", rational::format(&params.r_avg), params.t))
        }
        Command::Verify { graph, partition } => {
            let g = io::load_graph(&graph)?;
            let p = io::load_partition(&partition)?;
            let params = verify_rs_partition(&g, &p).map_err(|e| Failure::verification(e.to_string()))?;
            let text = match global.format.unwrap_or(Format::Table) {
                Format::Json => json!({
                    "r": rational::format(&params.r_avg),
                    "t": params.t,
                    "min_size": params.min_size,
                    "max_size": params.max_size,
                })
                .to_string()
                    + "\n",
                Format::Table => format!(
                    "r={} t={} min_size={} max_size={}\n",
                    rational::format(&params.r_avg),
                    params.t,
                    params.min_size,
                    params.max_size
                ),
            };
            emit(global, stdout, text.as_bytes())
        }
        Command::SchemeInfo { graph, partition } => {
            let (g, p) = load_verified(&graph, &partition)?;
            let sp = scheme::scheme_params(&g, &p).map_err(|e| Failure::verification(e.to_string()))?;
            let text = match global.format.unwrap_or(Format::Table) {
                Format::Json => json!({
                    "K": g.vertex_count(),
                    "t": p.t(),
                    "R": rational::format(&sp.rate),
                    "F": sp.subpacketization,
                    "mn_required": rational::format(&sp.mn_required),
                })
                .to_string()
                    + "\n",
                Format::Table => format!(
                    "K={} t={} R={} F={} M/N>={}\n",
                    g.vertex_count(),
                    p.t(),
                    rational::format(&sp.rate),
                    sp.subpacketization,
                    rational::format(&sp.mn_required)
                ),
            };
            emit(global, stdout, text.as_bytes())
        }
        Command::Simulate(args) => simulate(global, args, stdout),
        Command::Plan { delta } => {
            let plan = ams::plan_parameters(delta).map_err(|e| Failure::usage(e.to_string()))?;
            let text = serde_json::to_string(&plan).expect("plain struct") + "\n";
            emit(global, stdout, text.as_bytes())
        }
        Command::Exponents { c } => {
            if c < 2 {
                return Err(Failure::usage("exponents need C >= 2"));
            }
            let e = ams::ams_exponents(c);
            let text = match global.format.unwrap_or(Format::Table) {
                Format::Json => json!({"C": c, "f": e.f, "g": e.g, "asymptotic": true}).to_string() + "\n",
                Format::Table => format!("f={:.6} g={:.6} (asymptotic, vanishing terms dropped)\n", e.f, e.g),
            };
            emit(global, stdout, text.as_bytes())
        }
        Command::Ingest { dir, k, b } => {
            let (lib, names) = sim::ingest_library(&dir, k, b)?;
            let manifest = LibraryManifest {
                n: lib.files(),
                k,
                b,
                seed: None,
                sources: Some(names),
                original_lengths: lib.original_lengths().to_vec(),
            };
            let text = serde_json::to_string_pretty(&manifest).expect("plain struct") + "\n";
            emit(global, stdout, text.as_bytes())
        }
        Command::Deliver { graph, partition, library, demand } => {
            let (g, p) = load_verified(&graph, &partition)?;
            let lib = load_library(&library, g.vertex_count(), global.seed)?;
            let d = DemandVector::new(parse_demand(&demand)?, g.vertex_count(), lib.files())
                .map_err(|e| Failure::usage(e.to_string()))?;
            let batch = scheme::encode_delivery(&p, &d, &lib).map_err(|e| Failure::usage(e.to_string()))?;
            let mut buf = Vec::new();
            io::write_batch(&batch, &mut buf)?;
            emit(global, stdout, &buf)?;
            note(global, stdout, &format!("payloads={} bytes={}", batch.payloads.len(), batch.payloads.len() * lib.packet_bytes()))
        }
        Command::Decode { graph, partition, library, batch, user } => {
            let (g, p) = load_verified(&graph, &partition)?;
            g.check_vertex(user).map_err(|e| Failure::usage(e.to_string()))?;
            let lib = load_library(&library, g.vertex_count(), global.seed)?;
            let batch = io::load_batch(&batch)?;
            let pm = scheme::build_placement(&g);
            let cache = scheme::UserCache::fill(&lib, &pm, user).map_err(|e| Failure::usage(e.to_string()))?;
            let bytes = scheme::decode_user(user, &batch, &pm, &cache, &p, &g).map_err(|e| Failure {
                code: 3,
                message: e.to_string(),
            })?;
            emit(global, stdout, &bytes)
        }
    }
}

fn simulate(global: &GlobalArgs, a: SimulateArgs, stdout: &mut dyn Write) -> CmdResult {
    let graph = if let Some(path) = a.graph {
        GraphSource::File { path }
    } else if let Some(name) = a.fixture {
        GraphSource::Fixture { name }
    } else if let (Some(c), Some(n)) = (a.ams_c, a.ams_n) {
        GraphSource::Ams { c, n, relax: a.relax }
    } else if let (Some(k), Some(edge_prob)) = (a.random_k, a.random_p) {
        GraphSource::Random { k, edge_prob, seed: a.random_seed.unwrap_or(global.seed) }
    } else {
        return Err(Failure::usage("simulate needs one of --graph, --fixture, --ams-c/--ams-n, --random-k/--random-p"));
    };
    let partition = match (a.partition, a.mode) {
        (Some(path), _) => PartitionMode::File { path },
        (None, Mode::Greedy) => PartitionMode::Greedy,
        (None, Mode::Exact) => PartitionMode::Exact { edge_limit: a.edge_limit },
    };
    let library = match a.library.library_dir {
        Some(path) => LibrarySource::Directory { path },
        None => LibrarySource::Seeded { files: a.library.files },
    };
    let demand_seed = a.demand_seed.unwrap_or(global.seed);
    let mut demands: Vec<DemandMode> = a
        .demands
        .iter()
        .map(|kind| match kind {
            DemandKind::Exhaustive => DemandMode::Exhaustive,
            DemandKind::Random => DemandMode::Random { count: a.demand_count, seed: demand_seed },
            DemandKind::Presets => DemandMode::Presets,
        })
        .collect();
    if !a.demand.is_empty() {
        let vectors = a.demand.iter().map(|s| parse_demand(s)).collect::<Result<_, _>>()?;
        demands.push(DemandMode::Explicit { vectors });
    }
    let explicit_modes = !demands.is_empty();

    let mut cfg = SimConfig {
        graph,
        partition,
        library,
        packet_bytes: a.library.packet_bytes,
        demands,
        seed: global.seed,
        vertex_budget: a.vertex_budget,
    };
    if !explicit_modes {
        cfg.demands = vec![DemandMode::Exhaustive];
        match sim::run_simulation(&cfg) {
            Err(SimError::Config(msg)) if msg.starts_with("exhaustive") => {
                cfg.demands = vec![
                    DemandMode::Random { count: a.demand_count, seed: demand_seed },
                    DemandMode::Presets,
                ];
            }
            other => return report(global, other?, stdout),
        }
    }
    let r = sim::run_simulation(&cfg)?;
    report(global, r, stdout)
}

fn report(global: &GlobalArgs, r: sim::SimReport, stdout: &mut dyn Write) -> CmdResult {
    match global.format.unwrap_or(Format::Json) {
        Format::Json => emit(global, stdout, (r.to_json() + "\n").as_bytes()),
        Format::Table => {
            if let Some(path) = &global.out {
                fs::write(path, r.to_json() + "\n").map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            }
            let mut text = format!(
                "K={} F={} N={} t={} R={} M/N>={} demands={} decode_ok={}\n",
                r.k, r.f, r.n, r.t, r.rate_r.exact, r.mn_required.exact, r.demand_vectors, r.decode_ok
            );
            text.push_str(&sim::render_table(&sim::compare_baselines(&r)));
            if !global.quiet {
                stdout.write_all(text.as_bytes())?;
            }
            Ok(())
        }
    }
}
