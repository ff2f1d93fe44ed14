//! Acceptance suite. One line per criterion; non-zero exit if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rscc::ams::{self, AmsParams};
use rscc::graph::Graph;
use rscc::partition::{exact_min_partition, greedy_partition, verify_rs_partition, DEFAULT_EDGE_LIMIT};
use rscc::rational::{self, Rational};
use rscc::scheme::{build_placement, check_memory, encode_delivery, scheme_params, Decoder, PacketLibrary, UserCache};
use rscc::sim::{self, DemandMode, GraphSource, SimConfig, SimReport};
use rscc::{fixtures, io};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn bin(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rscc"))
        .args(args)
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    if !out.status.success() {
        return Err(format!("rscc {} exited {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn simulate(cfg: &SimConfig) -> Result<SimReport, String> {
    sim::run_simulation(cfg).map_err(|e| e.to_string())
}

fn c6_exhaustive() -> Outcome {
    let start = Instant::now();
    let mut counts = Vec::new();
    for (files, expect) in [(2, 64), (3, 729)] {
        let cfg = SimConfig::new(GraphSource::Fixture { name: "c6".into() }, files);
        let r = simulate(&cfg)?;
        ensure!(r.k == 6 && r.f == 6 && r.t == 3, "K/F/t = {}/{}/{}", r.k, r.f, r.t);
        ensure!(r.rate_r.exact == "1/2" && r.mn_required.exact == "2/3", "R={} M/N={}", r.rate_r.exact, r.mn_required.exact);
        ensure!(r.demand_vectors == expect, "N={files}: {} vectors, want {expect}", r.demand_vectors);
        ensure!(r.decode_ok && r.users_decoded == 6 * expect, "N={files}: {} users decoded", r.users_decoded);
        counts.push(r.demand_vectors);
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("{counts:?} vectors decoded in {elapsed:.2?}"))
}

/// Brute-force AMS edge test with its own base-C decoding:
/// `|6d - n(C^2 - 1)| < 6n`.
fn ams_pair_oracle(c: u64, n: u64, a: u64, b: u64) -> bool {
    let digits = |mut x: u64| {
        let mut v = vec![0i64; n as usize];
        for slot in v.iter_mut().rev() {
            *slot = (x % c) as i64;
            x /= c;
        }
        v
    };
    let (x, y) = (digits(a), digits(b));
    let d: i64 = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum();
    let six_mu = (n * (c * c - 1)) as i64;
    (6 * d - six_mu).abs() < 6 * n as i64
}

fn ams_sanity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("k16.graph");
    bin(&["gen-ams", "--c", "2", "--n", "4", "--out", path.to_str().unwrap()])?;
    let small = io::load_graph(&path).map_err(|e| e.to_string())?;
    let k16 = Graph::complete(16).map_err(|e| e.to_string())?;
    ensure!(small == k16, "gen-ams 2 4 is not K16 ({} edges)", small.edge_count());
    for a in 0..16u32 {
        for b in a + 1..16 {
            ensure!(small.has_edge(a, b) == ams_pair_oracle(2, 4, a as u64, b as u64), "pair {a},{b}");
        }
    }

    let start = Instant::now();
    let path = dir.path().join("c3n6.graph");
    bin(&["gen-ams", "--c", "3", "--n", "6", "--out", path.to_str().unwrap()])?;
    let elapsed = start.elapsed();
    let g = io::load_graph(&path).map_err(|e| e.to_string())?;
    ensure!(g.vertex_count() == 729, "K = {}", g.vertex_count());
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    let mut oracle_edges = 0;
    for a in 0..729u32 {
        ensure!(!g.has_edge(a, a), "self loop at {a}");
        for b in 0..729u32 {
            if a == b {
                continue;
            }
            ensure!(g.has_edge(a, b) == g.has_edge(b, a), "asymmetric pair {a},{b}");
            let want = ams_pair_oracle(3, 6, a as u64, b as u64);
            ensure!(g.has_edge(a, b) == want, "pair {a},{b}: graph {} oracle {want}", g.has_edge(a, b));
            oracle_edges += usize::from(want && a < b);
        }
    }
    ensure!(oracle_edges == g.edge_count(), "edge count {} vs oracle {oracle_edges}", g.edge_count());
    let bound = ams::ams_min_degree_bound(&AmsParams::new(3, 6, false).map_err(|e| e.to_string())?);
    let min_deg = g.min_degree();
    ensure!(min_deg as f64 >= bound.max(0.0), "min degree {min_deg} below bound {bound}");
    Ok(format!("K16 exact; C=3 n=6: {} edges in {elapsed:.2?}, min degree {min_deg} >= max(0, {bound:.1})", g.edge_count()))
}

fn k16_numbers() -> Outcome {
    let g = fixtures::fixture("k16-ams").ok_or("missing fixture")?;
    let p = greedy_partition(&g);
    ensure!(p.t() == 120, "greedy t = {}", p.t());
    let params = scheme_params(&g, &p).map_err(|e| e.to_string())?;
    ensure!(params.rate == Rational::new(15, 2), "R = {}", params.rate);
    ensure!(rational::to_f64(&params.rate) == 7.5, "R decimal");
    ensure!(params.subpacketization == 16, "F = {}", params.subpacketization);
    ensure!(params.mn_required == Rational::new(1, 16), "M/N = {}", params.mn_required);

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gp = dir.path().join("k16.graph");
    let pp = dir.path().join("k16.part");
    io::save_graph(&g, &gp).map_err(|e| e.to_string())?;
    io::save_partition(&p, &pp).map_err(|e| e.to_string())?;
    let info = String::from_utf8_lossy(&bin(&["scheme-info", "-g", gp.to_str().unwrap(), "-p", pp.to_str().unwrap()])?).into_owned();
    ensure!(info.contains("t=120") && info.contains("R=15/2") && info.contains("F=16") && info.contains("M/N>=1/16"), "scheme-info: {info}");

    let mut cfg = SimConfig::new(GraphSource::Fixture { name: "k16-ams".into() }, 2);
    cfg.demands = vec![DemandMode::Presets];
    let rows = sim::compare_baselines(&simulate(&cfg)?);
    let got: Vec<(&str, f64)> = rows.iter().map(|r| (r.scheme.as_str(), r.rate.decimal)).collect();
    ensure!(got == [("rs-scheme", 7.5), ("uncoded", 15.0), ("naive", 16.0)], "baselines {got:?}");
    Ok(format!("t=120 R=15/2 F=16 M/N>=1/16; baselines {got:?}"))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut tested = 0;
    let mut strict = 0;
    let mut seed = 0u64;
    while tested < 24 {
        seed += 1;
        let k = 3 + (seed % 6) as usize;
        let p = [0.25, 0.4, 0.55, 0.7][(seed % 4) as usize];
        let g = sim::random_graph(k, p, seed).map_err(|e| e.to_string())?;
        if g.edge_count() > 12 {
            continue;
        }
        let greedy = greedy_partition(&g);
        let exact = exact_min_partition(&g, DEFAULT_EDGE_LIMIT).map_err(|e| format!("seed {seed}: {e}"))?;
        verify_rs_partition(&g, &greedy).map_err(|e| format!("seed {seed} greedy: {e}"))?;
        verify_rs_partition(&g, &exact).map_err(|e| format!("seed {seed} exact: {e}"))?;
        ensure!(exact.t() <= greedy.t(), "seed {seed}: exact {} > greedy {}", exact.t(), greedy.t());
        strict += usize::from(exact.t() < greedy.t());
        tested += 1;
    }
    for (name, want) in [("triangle", 3), ("c6", 3)] {
        let g = fixtures::fixture(name).ok_or("missing fixture")?;
        let t = exact_min_partition(&g, DEFAULT_EDGE_LIMIT).map_err(|e| e.to_string())?.t();
        ensure!(t == want, "{name}: t_exact = {t}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("{tested} graphs ({strict} with exact < greedy), triangle=3, c6=3 in {elapsed:.2?}"))
}

fn formulas() -> Outcome {
    let e = ams::ams_exponents(3);
    ensure!((e.f - 5.2807).abs() < 1e-3 && (e.g - 1.99438).abs() < 1e-3, "exponents {e:?}");
    for c in 1..=8u64 {
        let pair_sum: u64 = (0..c).flat_map(|x| (0..c).map(move |y| x.abs_diff(y).pow(2))).sum();
        for n in 1..=10u64 {
            let brute = Rational::new(pair_sum * n, c * c);
            ensure!(ams::mu_expected_sq_distance(c, n) == brute, "mu C={c} n={n}");
        }
    }
    let plan = ams::plan_parameters(1.0).map_err(|e| e.to_string())?;
    ensure!(plan.c == 111 && plan.n_min == 222, "plan C={} n={}", plan.c, plan.n_min);
    ensure!((plan.ln_k - 1045.5).abs() < 0.1, "ln K = {}", plan.ln_k);
    let mut ratios = Vec::new();
    for delta in [0.3, 0.5] {
        let planned = ams::plan_parameters(delta).map_err(|e| e.to_string())?.epsilon;
        let formula = ams::corollary_epsilon(delta);
        let ratio = formula / planned;
        ensure!((ratio - 1.0).abs() < 0.1, "delta {delta}: eps {planned:e} vs {formula:e}");
        ratios.push(ratio);
    }
    Ok(format!("f={:.4} g={:.5}; mu exact for C<=8; C=111 n=222 lnK={:.2}; eps ratios {ratios:.3?}", e.f, e.g, plan.ln_k))
}

fn memory_accounting() -> Outcome {
    let mut sources: Vec<GraphSource> = fixtures::NAMES.iter().map(|n| GraphSource::Fixture { name: n.to_string() }).collect();
    sources.push(GraphSource::Ams { c: 2, n: 4, relax: false });
    sources.push(GraphSource::Ams { c: 3, n: 2, relax: true });
    for seed in 0..6 {
        sources.push(GraphSource::Random { k: 12 + seed as usize, edge_prob: 0.3 + 0.1 * seed as f64, seed });
    }
    let runs = sources.len();
    for src in sources {
        let mut cfg = SimConfig::new(src.clone(), 3);
        cfg.demands = vec![DemandMode::Presets, DemandMode::Random { count: 20, seed: 5 }];
        let r = simulate(&cfg)?;
        let g = match &src {
            GraphSource::Fixture { name } => fixtures::fixture(name).ok_or("missing fixture")?,
            GraphSource::Ams { c, n, relax } => {
                ams::ams_graph(&AmsParams::new(*c, *n, *relax).map_err(|e| e.to_string())?, ams::DEFAULT_VERTEX_BUDGET)
                    .map_err(|e| e.to_string())?
            }
            GraphSource::Random { k, edge_prob, seed } => sim::random_graph(*k, *edge_prob, *seed).map_err(|e| e.to_string())?,
            GraphSource::File { .. } => unreachable!(),
        };
        let k = g.vertex_count();
        let want: Vec<usize> = g.degrees().iter().map(|d| k - d).collect();
        ensure!(r.cache_packets_per_user == want, "{src:?}: cache counts {:?} want {want:?}", r.cache_packets_per_user);
        ensure!(r.memory_tight && r.decode_ok, "{src:?}: report flags");
        let mn = rational::parse(&r.mn_required.exact).ok_or("bad ratio")?;
        let pm = build_placement(&g);
        ensure!(check_memory(&pm, r.n, mn), "{src:?}: fails at mn_required");
        let tight = pm.per_file_counts().iter().any(|&c| Rational::new(c as u64, k as u64) == mn);
        ensure!(tight, "{src:?}: no vertex at equality");
        let tighter = mn - Rational::new(1, 1000 * k as u64);
        ensure!(!check_memory(&pm, r.n, tighter), "{src:?}: tighter ratio {tighter} accepted");
    }
    Ok(format!("{runs} simulations: cache = K - deg, tight at mn_required, tighter ratio rejected"))
}

fn randomized_robustness() -> Outcome {
    let probs = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let mut vectors = 0;
    for i in 0..50u64 {
        let k = 4 + ((i * 37) % 37) as usize;
        let p = probs[i as usize % probs.len()];
        let seed = 1000 + i;
        let g = sim::random_graph(k, p, seed).map_err(|e| e.to_string())?;
        let part = greedy_partition(&g);
        verify_rs_partition(&g, &part).map_err(|e| format!("graph {i}: {e}"))?;
        let lib = PacketLibrary::seeded(5, k, 8, seed).map_err(|e| e.to_string())?;
        let pm = build_placement(&g);
        let caches: Vec<UserCache> = (0..k as u32)
            .map(|u| UserCache::fill(&lib, &pm, u))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let decoder = Decoder::new(&part);
        for d in sim::random_demands(k, 5, 200, seed) {
            let batch = encode_delivery(&part, &d, &lib).map_err(|e| e.to_string())?;
            ensure!(batch.payloads.len() == part.t(), "graph {i}: {} payloads, t = {}", batch.payloads.len(), part.t());
            for u in 0..k as u32 {
                let got = decoder.decode(u, &batch, &pm, &caches[u as usize]).map_err(|e| format!("graph {i} user {u}: {e}"))?;
                ensure!(got == lib.file_bytes(d.file_of(u)), "graph {i} user {u} demands {:?}", d.as_slice());
            }
            vectors += 1;
        }

        let mut cfg = SimConfig::new(GraphSource::Random { k, edge_prob: p, seed }, 5);
        cfg.demands = vec![DemandMode::Random { count: 200, seed }];
        let r = simulate(&cfg)?;
        ensure!(r.decode_ok && r.rate_invariant && r.demand_vectors == 200, "graph {i}: report flags");
        ensure!(r.t == part.t(), "graph {i}: report t {} vs {}", r.t, part.t());
    }
    Ok(format!("50 graphs, {vectors} demand vectors, zero decode failures"))
}

fn strip_times(json: &[u8]) -> Result<serde_json::Value, String> {
    let mut v: serde_json::Value = serde_json::from_slice(json).map_err(|e| e.to_string())?;
    v.as_object_mut().ok_or("report is not an object")?.remove("wall_times_ms");
    Ok(v)
}

fn determinism() -> Outcome {
    let fixtures_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let c6 = fixtures_dir.join("c6.graph");
    let c6p = fixtures_dir.join("c6.part");
    let (g, p) = (c6.to_str().unwrap(), c6p.to_str().unwrap());
    let commands: Vec<Vec<&str>> = vec![
        vec!["--seed", "7", "gen-random", "--k", "20", "--p", "0.4"],
        vec!["gen-ams", "--c", "3", "--n", "4", "--relax"],
        vec!["partition", "-g", g],
        vec!["scheme-info", "-g", g, "-p", p, "--format", "json"],
        vec!["plan", "--delta", "0.5"],
        vec!["--seed", "11", "deliver", "-g", g, "-p", p, "--files", "3", "--demand", "0,1,2,0,1,2"],
    ];
    for args in &commands {
        let (a, b) = (bin(args)?, bin(args)?);
        ensure!(a == b, "rscc {} differs between runs", args.join(" "));
    }
    let sims: Vec<Vec<&str>> = vec![
        vec!["--seed", "3", "simulate", "--fixture", "c6", "--files", "2"],
        vec!["--seed", "9", "simulate", "--random-k", "14", "--random-p", "0.5", "--files", "4", "--demand-count", "100"],
        vec!["--seed", "2", "simulate", "--ams-c", "2", "--ams-n", "4", "--files", "3", "--demand-count", "50"],
    ];
    for args in &sims {
        let (a, b) = (strip_times(&bin(args)?)?, strip_times(&bin(args)?)?);
        ensure!(a == b, "rscc {} report differs after masking", args.join(" "));
    }
    let mut cfg = SimConfig::new(GraphSource::Random { k: 10, edge_prob: 0.5, seed: 4 }, 3);
    cfg.demands = vec![DemandMode::Random { count: 30, seed: 8 }];
    ensure!(simulate(&cfg)?.digest() == simulate(&cfg)?.digest(), "library report digest differs");
    Ok(format!("{} commands and {} simulations byte-identical", commands.len(), sims.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("c6 exhaustive decode", c6_exhaustive),
        ("AMS construction sanity", ams_sanity),
        ("K16 scheme numbers", k16_numbers),
        ("exact vs greedy partition", oracle_equivalence),
        ("formula checks", formulas),
        ("memory accounting", memory_accounting),
        ("randomized robustness", randomized_robustness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
