//! End-to-end runs: build a graph and partition, place a library, then for
//! every demand vector in an ensemble encode the broadcast and check that
//! every user decodes its file byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ams::{self, AmsError, AmsParams, DEFAULT_VERTEX_BUDGET};
use crate::fixtures;
use crate::graph::{Graph, GraphBuilder, Vertex};
use crate::io::{self, FormatError, LibraryManifest};
use crate::partition::{
    exact_min_partition, greedy_partition, required_cache_ratio, verify_rs_partition, PartitionError,
    RsPartition,
};
use crate::rational::{self, ExactValue, Rational};
use crate::scheme::{
    build_placement, check_memory, encode_with_id, Decoder, DemandVector, PacketLibrary, SchemeError,
    UserCache,
};

/// Largest `N^K` for which exhaustive demand enumeration is allowed.
pub const EXHAUSTIVE_LIMIT: u64 = 100_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Ams(#[from] AmsError),
    #[error("partition verification failed: {0}")]
    Verification(#[from] PartitionError),
    #[error("{0}")]
    Scheme(SchemeError),
    #[error("decode mismatch: user {user}, demands {demands:?}, packet {packet}")]
    DecodeMismatch {
        user: Vertex,
        demands: Vec<u32>,
        packet: usize,
    },
    #[error("decoder failure for demands {demands:?}: {source}")]
    Decode {
        demands: Vec<u32>,
        #[source]
        source: SchemeError,
    },
    #[error("accounting violated: {0}")]
    Accounting(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    /// Process exit code: 2 for verification failures, 3 for decoding
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Verification(_) => 2,
            SimError::Scheme(SchemeError::Partition(_)) => 2,
            SimError::DecodeMismatch { .. } | SimError::Decode { .. } | SimError::Accounting(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GraphSource {
    File { path: PathBuf },
    Ams { c: u64, n: u64, relax: bool },
    Random { k: usize, edge_prob: f64, seed: u64 },
    Fixture { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PartitionMode {
    Greedy,
    Exact { edge_limit: usize },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DemandMode {
    Exhaustive,
    Random { count: usize, seed: u64 },
    Explicit { vectors: Vec<Vec<u32>> },
    Presets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LibrarySource {
    /// `files` full-length files drawn from ChaCha8 seeded with the run seed.
    Seeded { files: usize },
    Directory { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub graph: GraphSource,
    pub partition: PartitionMode,
    pub library: LibrarySource,
    pub packet_bytes: usize,
    /// Ensembles are concatenated in order.
    pub demands: Vec<DemandMode>,
    pub seed: u64,
    pub vertex_budget: usize,
}

impl SimConfig {
    pub fn new(graph: GraphSource, files: usize) -> Self {
        SimConfig {
            graph,
            partition: PartitionMode::Greedy,
            library: LibrarySource::Seeded { files },
            packet_bytes: 64,
            demands: vec![DemandMode::Exhaustive],
            seed: 0,
            vertex_budget: DEFAULT_VERTEX_BUDGET,
        }
    }
}

/// Side-by-side view of the measured construction and its asymptotic
/// formulas (vanishing terms dropped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmsSummary {
    #[serde(rename = "C")]
    pub c: u64,
    pub n: u64,
    pub relaxed: bool,
    pub min_degree: usize,
    pub min_degree_bound: f64,
    pub max_non_neighbors: usize,
    pub non_neighbor_bound: f64,
    pub exponent_f: f64,
    pub exponent_g: f64,
    pub t_measured: usize,
    pub t_asymptotic: f64,
    pub missing_edges_measured: usize,
    pub missing_edges_asymptotic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub run: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<u64>,
    pub demands: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "F")]
    pub f: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub t: usize,
    pub edges: usize,
    pub r_avg: ExactValue,
    #[serde(rename = "rate_R")]
    pub rate_r: ExactValue,
    pub mn_required: ExactValue,
    pub cache_packets_per_user: Vec<usize>,
    pub payload_bytes_total: usize,
    pub uncoded_baseline_rate: ExactValue,
    pub naive_rate: ExactValue,
    pub demand_vectors: usize,
    pub users_decoded: usize,
    pub decode_ok: bool,
    pub rate_invariant: bool,
    pub memory_tight: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ams: Option<AmsSummary>,
    pub library: LibraryManifest,
    pub seeds: SeedInfo,
    pub graph_digest: String,
    pub partition_digest: String,
    pub wall_times_ms: BTreeMap<String, f64>,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with wall-clock timings removed, for determinism checks.
    pub fn to_masked_json(&self) -> String {
        let mut masked = self.clone();
        masked.wall_times_ms.clear();
        masked.to_json()
    }

    pub fn digest(&self) -> String {
        io::sha256_hex(self.to_masked_json().as_bytes())
    }
}

/// Independent pair draws in lexicographic order from ChaCha8.
pub fn random_graph(k: usize, edge_prob: f64, seed: u64) -> Result<Graph, SimError> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(SimError::Config(format!("edge probability {edge_prob} not in [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = GraphBuilder::new(k).map_err(|e| SimError::Config(e.to_string()))?;
    for a in 0..k as Vertex {
        for b in a + 1..k as Vertex {
            if rng.gen_bool(edge_prob) {
                builder.add_edge(a, b).expect("each pair drawn once");
            }
        }
    }
    Ok(builder.build())
}

/// All-same, round-robin and reversed round-robin, deduplicated in order.
pub fn worst_case_demand_presets(k: usize, n: usize) -> Vec<DemandVector> {
    let n = n.max(1);
    let candidates = [
        vec![0u32; k],
        (0..k).map(|j| (j % n) as u32).collect(),
        (0..k).map(|j| (n - 1 - j % n) as u32).collect(),
    ];
    let mut out: Vec<DemandVector> = Vec::new();
    for c in candidates {
        let d = DemandVector::new(c, k, n).expect("presets are in range");
        if !out.contains(&d) {
            out.push(d);
        }
    }
    out
}

/// Reads every regular file of `dir` in lexicographic name order.
pub fn ingest_library(dir: &Path, k: usize, b: usize) -> Result<(PacketLibrary, Vec<String>), SimError> {
    let io_err = |source| SimError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut entries: Vec<(String, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let entry = entry.map_err(io_err)?;
        if entry.file_type().map_err(io_err)?.is_file() {
            entries.push((entry.file_name().to_string_lossy().into_owned(), entry.path()));
        }
    }
    if entries.is_empty() {
        return Err(SimError::Config(format!("{} contains no regular files", dir.display())));
    }
    entries.sort();
    let budget = k * b;
    let mut contents = Vec::with_capacity(entries.len());
    for (name, path) in &entries {
        let bytes = fs::read(path).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if bytes.len() > budget {
            return Err(SimError::Config(format!(
                "{name} has {} bytes, over the K*B = {k}*{b} = {budget} byte budget",
                bytes.len()
            )));
        }
        contents.push(bytes);
    }
    let lib = PacketLibrary::from_files(&contents, k, b).map_err(SimError::Scheme)?;
    Ok((lib, entries.into_iter().map(|(n, _)| n).collect()))
}

fn exhaustive_demands(k: usize, n: usize) -> Result<Vec<DemandVector>, SimError> {
    let total = u32::try_from(k)
        .ok()
        .and_then(|k| (n as u64).checked_pow(k))
        .filter(|&t| t <= EXHAUSTIVE_LIMIT)
        .ok_or_else(|| {
            SimError::Config(format!("exhaustive demands need N^K <= {EXHAUSTIVE_LIMIT}, have N={n} K={k}"))
        })?;
    Ok((0..total)
        .map(|mut x| {
            // Last user varies fastest.
            let mut d = vec![0u32; k];
            for slot in d.iter_mut().rev() {
                *slot = (x % n as u64) as u32;
                x /= n as u64;
            }
            DemandVector::new(d, k, n).expect("digits are below N")
        })
        .collect())
}

pub fn random_demands(k: usize, n: usize, count: usize, seed: u64) -> Vec<DemandVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = (0..k).map(|_| rng.gen_range(0..n as u32)).collect();
            DemandVector::new(d, k, n).expect("drawn below N")
        })
        .collect()
}

fn build_graph(cfg: &SimConfig) -> Result<(Graph, Option<AmsParams>), SimError> {
    Ok(match &cfg.graph {
        GraphSource::File { path } => (io::load_graph(path)?, None),
        GraphSource::Ams { c, n, relax } => {
            let params = AmsParams::new(*c, *n, *relax)?;
            (ams::ams_graph(&params, cfg.vertex_budget)?, Some(params))
        }
        GraphSource::Random { k, edge_prob, seed } => (random_graph(*k, *edge_prob, *seed)?, None),
        GraphSource::Fixture { name } => (
            fixtures::fixture(name).ok_or_else(|| {
                SimError::Config(format!("unknown fixture `{name}`; known: {}", fixtures::NAMES.join(", ")))
            })?,
            None,
        ),
    })
}

pub fn build_partition(g: &Graph, mode: &PartitionMode) -> Result<RsPartition, SimError> {
    Ok(match mode {
        PartitionMode::Greedy => greedy_partition(g),
        PartitionMode::Exact { edge_limit } => exact_min_partition(g, *edge_limit)?,
        PartitionMode::File { path } => io::load_partition(path)?,
    })
}

fn ams_summary(params: &AmsParams, g: &Graph, t: usize) -> AmsSummary {
    let k = g.vertex_count();
    let e = ams::ams_exponents(params.c);
    let ln_k = (k as f64).ln();
    let all_pairs = k * (k - 1) / 2;
    AmsSummary {
        c: params.c,
        n: params.n,
        relaxed: params.relaxed,
        min_degree: g.min_degree(),
        min_degree_bound: ams::ams_min_degree_bound(params),
        max_non_neighbors: k - g.min_degree(),
        non_neighbor_bound: ams::ams_non_neighbor_bound(params),
        exponent_f: e.f,
        exponent_g: e.g,
        t_measured: t,
        t_asymptotic: (e.f * ln_k).exp(),
        missing_edges_measured: all_pairs - g.edge_count(),
        missing_edges_asymptotic: (e.g * ln_k).exp(),
    }
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs placement, delivery and decoding over the configured ensemble.
///
/// Fails on the first (in ensemble order) demand vector where some user's
/// reconstruction differs from the library, naming the user and the first
/// wrong packet.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport, SimError> {
    if cfg.packet_bytes == 0 {
        return Err(SimError::Config("packet size B must be positive".into()));
    }
    let mut times = BTreeMap::new();

    let start = Instant::now();
    let (g, ams_params) = build_graph(cfg)?;
    times.insert("graph".to_owned(), ms_since(start));
    let k = g.vertex_count();

    let start = Instant::now();
    let partition = build_partition(&g, &cfg.partition)?;
    times.insert("partition".to_owned(), ms_since(start));

    let start = Instant::now();
    let params = verify_rs_partition(&g, &partition)?;
    times.insert("verify".to_owned(), ms_since(start));

    let start = Instant::now();
    let (lib, manifest) = match &cfg.library {
        LibrarySource::Seeded { files } => {
            let lib = PacketLibrary::seeded(*files, k, cfg.packet_bytes, cfg.seed).map_err(SimError::Scheme)?;
            let manifest = LibraryManifest {
                n: *files,
                k,
                b: cfg.packet_bytes,
                seed: Some(cfg.seed),
                sources: None,
                original_lengths: lib.original_lengths().to_vec(),
            };
            (lib, manifest)
        }
        LibrarySource::Directory { path } => {
            let (lib, names) = ingest_library(path, k, cfg.packet_bytes)?;
            let manifest = LibraryManifest {
                n: lib.files(),
                k,
                b: cfg.packet_bytes,
                seed: None,
                sources: Some(names),
                original_lengths: lib.original_lengths().to_vec(),
            };
            (lib, manifest)
        }
    };
    let n = lib.files();

    let pm = build_placement(&g);
    let mn_required = required_cache_ratio(&g);
    let caches: Vec<UserCache> = (0..k as Vertex)
        .map(|j| UserCache::fill(&lib, &pm, j))
        .collect::<Result<_, _>>()
        .map_err(SimError::Scheme)?;
    for j in 0..k as Vertex {
        let expected = k - g.degrees()[j as usize];
        if pm.per_file_count(j) != expected || caches[j as usize].stored_bytes() != expected * n * cfg.packet_bytes {
            return Err(SimError::Accounting(format!(
                "user {j} caches {} packets per file, expected K - deg = {expected}",
                pm.per_file_count(j)
            )));
        }
    }
    if !check_memory(&pm, n, mn_required) {
        return Err(SimError::Accounting("memory check fails at the required ratio".into()));
    }
    let k_ratio = Rational::from_integer(k as u64);
    let memory_tight = pm
        .per_file_counts()
        .iter()
        .any(|&c| Rational::from_integer(c as u64) == mn_required * k_ratio);
    times.insert("placement".to_owned(), ms_since(start));

    let mut ensemble = Vec::new();
    let mut demand_seeds = Vec::new();
    for mode in &cfg.demands {
        match mode {
            DemandMode::Exhaustive => ensemble.extend(exhaustive_demands(k, n)?),
            DemandMode::Random { count, seed } => {
                demand_seeds.push(*seed);
                ensemble.extend(random_demands(k, n, *count, *seed));
            }
            DemandMode::Explicit { vectors } => {
                for v in vectors {
                    ensemble.push(DemandVector::new(v.clone(), k, n).map_err(|e| SimError::Config(e.to_string()))?);
                }
            }
            DemandMode::Presets => ensemble.extend(worst_case_demand_presets(k, n)),
        }
    }

    let start = Instant::now();
    let partition_id = io::partition_digest(&partition);
    let decoder = Decoder::with_id(&partition, partition_id.clone());
    let outcomes: Vec<Result<usize, SimError>> = ensemble
        .par_iter()
        .map(|d| {
            let batch = encode_with_id(&partition, &partition_id, d, &lib).map_err(SimError::Scheme)?;
            for user in 0..k as Vertex {
                let got = decoder
                    .decode(user, &batch, &pm, &caches[user as usize])
                    .map_err(|source| SimError::Decode {
                        demands: d.as_slice().to_vec(),
                        source,
                    })?;
                let want = lib.file_bytes(d.file_of(user));
                if got != want {
                    let first_bad = got
                        .iter()
                        .zip(want)
                        .position(|(a, b)| a != b)
                        .unwrap_or(got.len().min(want.len()));
                    return Err(SimError::DecodeMismatch {
                        user,
                        demands: d.as_slice().to_vec(),
                        packet: first_bad / cfg.packet_bytes,
                    });
                }
            }
            Ok(batch.payloads.len())
        })
        .collect();
    let payload_counts: Vec<usize> = outcomes.into_iter().collect::<Result<_, _>>()?;
    times.insert("simulate".to_owned(), ms_since(start));

    let rate = Rational::new(params.t as u64, k as u64);
    let uncoded = k_ratio * (Rational::from_integer(1) - mn_required);
    let ams = ams_params.map(|p| ams_summary(&p, &g, params.t));

    Ok(SimReport {
        k,
        f: k,
        n,
        b: cfg.packet_bytes,
        t: params.t,
        edges: g.edge_count(),
        r_avg: params.r_avg.into(),
        rate_r: rate.into(),
        mn_required: mn_required.into(),
        cache_packets_per_user: pm.per_file_counts(),
        payload_bytes_total: params.t * cfg.packet_bytes,
        uncoded_baseline_rate: uncoded.into(),
        naive_rate: k_ratio.into(),
        demand_vectors: ensemble.len(),
        users_decoded: ensemble.len() * k,
        decode_ok: true,
        rate_invariant: payload_counts.iter().all(|&c| c == params.t),
        memory_tight,
        ams,
        library: manifest,
        seeds: SeedInfo {
            run: cfg.seed,
            graph: match cfg.graph {
                GraphSource::Random { seed, .. } => Some(seed),
                _ => None,
            },
            demands: demand_seeds,
        },
        graph_digest: io::graph_digest(&g),
        partition_digest: partition_id,
        wall_times_ms: times,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub scheme: String,
    pub rate: ExactValue,
    /// `rate * F * B`: bytes broadcast to serve one demand vector.
    pub total_bytes: u64,
}

/// The scheme against uncoded caching `K (1 - M/N)` and no caching `K`,
/// sorted by rate (stable).
pub fn compare_baselines(report: &SimReport) -> Vec<BaselineRow> {
    let k = report.k as u64;
    let mn = rational::parse(&report.mn_required.exact).expect("report holds a valid ratio");
    let bytes_per_rate = Rational::from_integer(report.f as u64 * report.b as u64);
    let mut rows: Vec<(Rational, &str)> = vec![
        (Rational::new(report.t as u64, k), "rs-scheme"),
        (Rational::from_integer(k) * (Rational::from_integer(1) - mn), "uncoded"),
        (Rational::from_integer(k), "naive"),
    ];
    rows.sort_by_key(|r| r.0);
    rows.into_iter()
        .map(|(rate, name)| BaselineRow {
            scheme: name.to_owned(),
            rate: rate.into(),
            total_bytes: (rate * bytes_per_rate).to_integer(),
        })
        .collect()
}

pub fn render_table(rows: &[BaselineRow]) -> String {
    let mut out = format!("{:<10} {:>12} {:>14}\n", "scheme", "rate", "total_bytes");
    for r in rows {
        out.push_str(&format!("{:<10} {:>12} {:>14}\n", r.scheme, r.rate.exact, r.total_bytes));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::DEFAULT_EDGE_LIMIT;

    fn fixture_cfg(name: &str, files: usize) -> SimConfig {
        let mut cfg = SimConfig::new(GraphSource::Fixture { name: name.into() }, files);
        cfg.packet_bytes = 4;
        cfg
    }

    #[test]
    fn c6_exhaustive() {
        let r = run_simulation(&fixture_cfg("c6", 2)).unwrap();
        assert_eq!(r.demand_vectors, 64);
        assert!(r.decode_ok && r.rate_invariant && r.memory_tight);
        assert_eq!(r.rate_r.exact, "1/2");
        assert_eq!(r.uncoded_baseline_rate.exact, "2");
        assert_eq!(r.cache_packets_per_user, vec![4; 6]);
        assert_eq!(r.payload_bytes_total, 12);
        let rows = compare_baselines(&r);
        let named: Vec<_> = rows.iter().map(|r| (r.scheme.as_str(), r.rate.exact.as_str())).collect();
        assert_eq!(named, vec![("rs-scheme", "1/2"), ("uncoded", "2"), ("naive", "6")]);
        assert_eq!(rows[0].total_bytes, 12);
    }

    #[test]
    fn ams_2_4_random_demands() {
        let mut cfg = SimConfig::new(GraphSource::Ams { c: 2, n: 4, relax: false }, 3);
        cfg.packet_bytes = 8;
        cfg.demands = vec![DemandMode::Random { count: 200, seed: 11 }];
        let r = run_simulation(&cfg).unwrap();
        assert_eq!(r.t, 120);
        assert_eq!(r.rate_r.exact, "15/2");
        assert_eq!(r.uncoded_baseline_rate.exact, "15");
        assert_eq!(r.demand_vectors, 200);
        let rates: Vec<_> = compare_baselines(&r).into_iter().map(|r| r.rate.exact).collect();
        assert_eq!(rates, vec!["15/2", "15", "16"]);
        let ams = r.ams.unwrap();
        assert_eq!(ams.min_degree, 15);
        assert!(ams.min_degree_bound < 0.0);
    }

    #[test]
    fn edgeless_rows() {
        let r = run_simulation(&fixture_cfg("edgeless-4", 2)).unwrap();
        assert_eq!(r.t, 0);
        assert_eq!(r.payload_bytes_total, 0);
        let rows: Vec<_> = compare_baselines(&r)
            .into_iter()
            .map(|r| (r.scheme, r.rate.exact))
            .collect();
        assert_eq!(
            rows,
            vec![("rs-scheme".into(), "0".into()), ("uncoded".into(), "0".into()), ("naive".into(), "4".into())]
        );
    }

    #[test]
    fn presets_examples() {
        let p = |k, n| -> Vec<Vec<u32>> {
            worst_case_demand_presets(k, n).iter().map(|d| d.as_slice().to_vec()).collect()
        };
        assert_eq!(p(4, 2), vec![vec![0, 0, 0, 0], vec![0, 1, 0, 1], vec![1, 0, 1, 0]]);
        assert!(p(3, 3).contains(&vec![0, 1, 2]));
        assert_eq!(p(5, 1), vec![vec![0; 5]]);
    }

    #[test]
    fn exhaustive_cutoff() {
        let cfg = fixture_cfg("k16-ams", 3);
        assert!(matches!(run_simulation(&cfg), Err(SimError::Config(_))));
        assert_eq!(exhaustive_demands(3, 2).unwrap()[1].as_slice(), &[0, 0, 1]);
    }

    #[test]
    fn ingest_examples() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.bin"), [2u8; 10]).unwrap();
        fs::write(dir.path().join("a.bin"), [1u8; 10]).unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        let (lib, names) = ingest_library(dir.path(), 6, 4).unwrap();
        assert_eq!(names, vec!["a.bin", "b.bin"]);
        assert_eq!(lib.files(), 2);
        assert_eq!(lib.original_lengths(), &[10, 10]);
        assert_eq!(lib.file_bytes(0), &[1u8; 10]);
        assert_eq!(lib.packet(2, 1), &[2, 2, 0, 0]);
        assert_eq!(lib.packet(5, 1), &[0, 0, 0, 0]);

        fs::write(dir.path().join("c.bin"), [3u8; 24]).unwrap();
        let (lib, _) = ingest_library(dir.path(), 6, 4).unwrap();
        assert_eq!(lib.file_bytes(2).len(), 24);

        fs::write(dir.path().join("d.bin"), [3u8; 25]).unwrap();
        let err = ingest_library(dir.path(), 6, 4).unwrap_err().to_string();
        assert!(err.contains("d.bin") && err.contains("24"), "{err}");

        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(ingest_library(empty.path(), 6, 4), Err(SimError::Config(_))));
    }

    #[test]
    fn directory_library_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("one.txt"), b"first file").unwrap();
        fs::write(dir.path().join("two.txt"), b"second, longer file").unwrap();
        let mut cfg = fixture_cfg("c6", 0);
        cfg.library = LibrarySource::Directory { path: dir.path().to_owned() };
        let r = run_simulation(&cfg).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(r.library.original_lengths, vec![10, 19]);
        assert_eq!(r.demand_vectors, 64);
    }

    #[test]
    fn determinism_masks_timings() {
        let mut cfg = SimConfig::new(GraphSource::Random { k: 12, edge_prob: 0.4, seed: 5 }, 3);
        cfg.demands = vec![DemandMode::Random { count: 30, seed: 9 }, DemandMode::Presets];
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(a.to_masked_json(), b.to_masked_json());
        assert_eq!(a.digest(), b.digest());
        assert!(!a.wall_times_ms.is_empty());
    }

    #[test]
    fn verification_failure_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.part");
        fs::write(&path, "0: 0 1; 2 3\n").unwrap();
        let mut cfg = fixture_cfg("c6", 2);
        cfg.partition = PartitionMode::File { path };
        let err = run_simulation(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }

    #[test]
    fn random_graph_is_seeded() {
        let a = random_graph(20, 0.3, 1).unwrap();
        assert_eq!(a, random_graph(20, 0.3, 1).unwrap());
        assert_ne!(a, random_graph(20, 0.3, 2).unwrap());
        assert_eq!(random_graph(5, 1.0, 0).unwrap(), Graph::complete(5).unwrap());
        assert!(random_graph(5, 1.5, 0).is_err());
    }

    #[test]
    fn exact_partition_mode() {
        let mut cfg = fixture_cfg("triangle", 2);
        cfg.partition = PartitionMode::Exact { edge_limit: DEFAULT_EDGE_LIMIT };
        let r = run_simulation(&cfg).unwrap();
        assert_eq!((r.t, r.rate_r.exact.as_str()), (3, "1"));
    }
}
