//! The distance-threshold graph on `[C]^n` and the asymptotic parameter
//! formulas that come with it.
//!
//! Vertices are tuples over the alphabet `{0, .., C-1}` encoded in mixed
//! radix, most-significant coordinate first. Two distinct tuples are adjacent
//! iff their squared Euclidean distance is within `n` of the mean squared
//! distance `mu = n (C^2 - 1) / 6`. All graph decisions use exact integers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphBuilder, Vertex};
use crate::rational::Rational;

/// Default cap on `K = C^n` for graph generation.
pub const DEFAULT_VERTEX_BUDGET: usize = 5000;

/// `ln 10.5`, the base of the matching-count exponent.
fn ln_10_5() -> f64 {
    10.5f64.ln()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmsError {
    #[error("alphabet size C must be at least 1, got {0}")]
    BadAlphabet(u64),
    #[error("dimension n must be at least 1")]
    BadDimension,
    #[error("n = {n} must be even and at least 2C = {}; pass relax to override", 2 * .c)]
    Unrelaxed { c: u64, n: u64 },
    #[error("C^n = {c}^{n} exceeds the vertex budget {budget}")]
    OverBudget { c: u64, n: u64, budget: usize },
    #[error("delta must lie in (0, 1], got {0}")]
    DeltaOutOfRange(f64),
    #[error("delta = {0} needs an alphabet larger than u64")]
    PlannerOverflow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmsParams {
    #[serde(rename = "C")]
    pub c: u64,
    pub n: u64,
    /// `C^n`, or `None` when it exceeds `u64`.
    #[serde(rename = "K")]
    pub k: Option<u64>,
    /// `6 mu = n (C^2 - 1)`.
    pub mu_times_6: u64,
    /// Set when `n` even / `n >= 2C` were not enforced.
    pub relaxed: bool,
}

impl AmsParams {
    pub fn new(c: u64, n: u64, relax: bool) -> Result<Self, AmsError> {
        if c == 0 {
            return Err(AmsError::BadAlphabet(c));
        }
        if n == 0 {
            return Err(AmsError::BadDimension);
        }
        let satisfied = c >= 2 && n.is_multiple_of(2) && n >= 2 * c;
        if !satisfied && !relax {
            if c < 2 {
                return Err(AmsError::BadAlphabet(c));
            }
            return Err(AmsError::Unrelaxed { c, n });
        }
        let k = u32::try_from(n).ok().and_then(|e| c.checked_pow(e));
        Ok(AmsParams {
            c,
            n,
            k,
            mu_times_6: n * (c * c - 1),
            relaxed: !satisfied,
        })
    }

    pub fn mu(&self) -> Rational {
        mu_expected_sq_distance(self.c, self.n)
    }

    /// Exact adjacency rule: `|6 d - n (C^2 - 1)| < 6 n` for squared
    /// distance `d > 0`.
    pub fn is_edge_distance(&self, sq_dist: u64) -> bool {
        sq_dist > 0 && (6 * sq_dist).abs_diff(self.mu_times_6) < 6 * self.n
    }

    fn vertex_count(&self, budget: usize) -> Result<usize, AmsError> {
        match self.k {
            Some(k) if k as u128 <= budget as u128 => Ok(k as usize),
            _ => Err(AmsError::OverBudget { c: self.c, n: self.n, budget }),
        }
    }
}

/// `E ||x - y||^2` for `x, y` uniform on `{0..C-1}^n`, i.e. `n (C^2 - 1) / 6`.
pub fn mu_expected_sq_distance(c: u64, n: u64) -> Rational {
    Rational::new(n * (c * c - 1), 6)
}

/// Mixed-radix decoding of a vertex index, most-significant coordinate first.
pub fn decode_tuple(index: u64, c: u64, n: u64) -> Vec<u64> {
    let mut out = vec![0; n as usize];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % c;
        rest /= c;
    }
    out
}

pub fn sq_distance(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y).pow(2)).sum()
}

/// Builds the distance-threshold graph, refusing `C^n` above `vertex_budget`.
pub fn ams_graph(params: &AmsParams, vertex_budget: usize) -> Result<Graph, AmsError> {
    let k = params.vertex_count(vertex_budget)?;
    let tuples: Vec<Vec<u64>> = (0..k as u64)
        .map(|i| decode_tuple(i, params.c, params.n))
        .collect();

    // Rows are independent; collecting preserves vertex order.
    let rows: Vec<Vec<Vertex>> = (0..k)
        .into_par_iter()
        .map(|u| {
            (u + 1..k)
                .filter(|&v| params.is_edge_distance(sq_distance(&tuples[u], &tuples[v])))
                .map(|v| v as Vertex)
                .collect()
        })
        .collect();

    let mut builder = GraphBuilder::new(k).expect("K >= 1");
    for (u, row) in rows.into_iter().enumerate() {
        for v in row {
            builder
                .add_edge(u as Vertex, v)
                .expect("pairs generated once with u < v");
        }
    }
    Ok(builder.build())
}

/// `1 / (2 C^4 ln C)`, the exponent shared by the degree bound and the
/// missing-edge exponent.
pub fn density_exponent(c: u64) -> f64 {
    let c = c as f64;
    1.0 / (2.0 * c.powi(4) * c.ln())
}

/// Hoeffding lower bound on every vertex degree: `K (1 - 2 K^{-1/(2 C^4 ln C)})`.
/// Usually negative at small sizes.
pub fn ams_min_degree_bound(params: &AmsParams) -> f64 {
    let ln_k = params.n as f64 * (params.c as f64).ln();
    let k = ln_k.exp();
    k * (1.0 - 2.0 * (-density_exponent(params.c) * ln_k).exp())
}

/// Upper bound on the non-neighbors of any vertex,
/// `2 K^{1 - 1/(2 C^4 ln C)}`.
pub fn ams_non_neighbor_bound(params: &AmsParams) -> f64 {
    let ln_k = params.n as f64 * (params.c as f64).ln();
    2.0 * ((1.0 - density_exponent(params.c)) * ln_k).exp()
}

/// Asymptotic exponents with the vanishing terms dropped: `t ~ K^f` matchings
/// and at most `K^g` missing edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub f: f64,
    pub g: f64,
}

pub fn ams_exponents(c: u64) -> Exponents {
    let ln_c = (c as f64).ln();
    Exponents {
        f: 1.0 + 2.0 * ln_10_5() / ln_c,
        g: 2.0 - density_exponent(c),
    }
}

/// Constants for `eps = c1 * delta * exp(-c2 / delta)`.
///
/// Setting `delta = 2 ln 10.5 / ln C` gives `ln C = 2 ln 10.5 / delta` and
/// `C^4 = exp(8 ln 10.5 / delta)`, so
/// `1 / (2 C^4 ln C) = delta / (4 ln 10.5) * exp(-8 ln 10.5 / delta)`:
/// `c1 = 1 / (4 ln 10.5)`, `c2 = 8 ln 10.5`.
pub fn corollary_constants() -> (f64, f64) {
    (1.0 / (4.0 * ln_10_5()), 8.0 * ln_10_5())
}

/// `c1 * delta * exp(-c2 / delta)` with the derived constants. This is the
/// un-rounded counterpart of [`PlannerResult::epsilon`].
pub fn corollary_epsilon(delta: f64) -> f64 {
    let (c1, c2) = corollary_constants();
    c1 * delta * (-c2 / delta).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerResult {
    pub delta: f64,
    #[serde(rename = "C")]
    pub c: u64,
    pub n_min: u64,
    #[serde(rename = "ln_K")]
    pub ln_k: f64,
    pub epsilon: f64,
    pub mn_lower_bound_ln: f64,
}

/// Smallest construction achieving rate exponent `delta`:
/// `C = ceil(10.5^{2/delta})`, `n = ` smallest even integer `>= 2C`.
///
/// `delta = 1` is accepted and treated as the limit from below.
pub fn plan_parameters(delta: f64) -> Result<PlannerResult, AmsError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(AmsError::DeltaOutOfRange(delta));
    }
    let c_real = (2.0 / delta * ln_10_5()).exp().ceil();
    if !c_real.is_finite() || c_real >= (u64::MAX / 4) as f64 {
        return Err(AmsError::PlannerOverflow(delta));
    }
    let c = c_real as u64;
    let n_min = 2 * c;
    let ln_k = n_min as f64 * (c as f64).ln();
    let epsilon = density_exponent(c);
    Ok(PlannerResult {
        delta,
        c,
        n_min,
        ln_k,
        epsilon,
        mn_lower_bound_ln: 2f64.ln() - epsilon * ln_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Exact average of `(x - y)^2` over all `C^2` coordinate pairs, times n.
    fn mu_brute(c: u64, n: u64) -> Rational {
        let total: u64 = (0..c).flat_map(|x| (0..c).map(move |y| x.abs_diff(y).pow(2))).sum();
        Rational::new(total * n, c * c)
    }

    #[test]
    fn mu_examples_and_brute_force() {
        assert_eq!(mu_expected_sq_distance(1, 5), Rational::from_integer(0));
        assert_eq!(mu_expected_sq_distance(2, 4), Rational::from_integer(2));
        assert_eq!(mu_expected_sq_distance(3, 6), Rational::from_integer(8));
        for c in 1..=8 {
            for n in 1..=6 {
                assert_eq!(mu_expected_sq_distance(c, n), mu_brute(c, n), "C={c} n={n}");
            }
        }
    }

    #[test]
    fn params_enforce_preconditions() {
        assert!(AmsParams::new(2, 4, false).is_ok());
        assert_eq!(AmsParams::new(3, 5, false).unwrap_err(), AmsError::Unrelaxed { c: 3, n: 5 });
        assert_eq!(AmsParams::new(3, 4, false).unwrap_err(), AmsError::Unrelaxed { c: 3, n: 4 });
        let relaxed = AmsParams::new(3, 4, true).unwrap();
        assert!(relaxed.relaxed);
        assert_eq!(relaxed.k, Some(81));
        assert!(!AmsParams::new(3, 6, false).unwrap().relaxed);
        assert!(AmsParams::new(1, 2, false).is_err());
        assert_eq!(AmsParams::new(10, 40, false).unwrap().k, None);
    }

    #[test]
    fn c2_n4_is_complete() {
        let p = AmsParams::new(2, 4, false).unwrap();
        let g = ams_graph(&p, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(g, Graph::complete(16).unwrap());
    }

    #[test]
    fn c3_n6_threshold() {
        let p = AmsParams::new(3, 6, false).unwrap();
        let allowed: Vec<u64> = (0..=24).filter(|&d| p.is_edge_distance(d)).collect();
        assert_eq!(allowed, (3..=13).collect::<Vec<_>>());
        // 000000 vs 000001
        assert!(!p.is_edge_distance(1));
    }

    #[test]
    fn c1_relaxed_is_single_vertex() {
        let p = AmsParams::new(1, 2, true).unwrap();
        let g = ams_graph(&p, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
    }

    #[test]
    fn budget_is_enforced() {
        let p = AmsParams::new(3, 8, false).unwrap();
        assert!(matches!(ams_graph(&p, 5000), Err(AmsError::OverBudget { .. })));
    }

    #[test]
    fn tuple_encoding_is_msb_first() {
        assert_eq!(decode_tuple(1, 3, 6), vec![0, 0, 0, 0, 0, 1]);
        assert_eq!(decode_tuple(3, 3, 3), vec![0, 1, 0]);
        assert_eq!(decode_tuple(26, 3, 3), vec![2, 2, 2]);
    }

    #[test]
    fn degree_bound_examples() {
        let p = AmsParams::new(2, 4, false).unwrap();
        assert_relative_eq!(ams_min_degree_bound(&p), -12.2399, epsilon = 1e-3);
        let p = AmsParams::new(3, 6, false).unwrap();
        assert_relative_eq!(density_exponent(3), 0.0056187, epsilon = 1e-6);
        assert_relative_eq!(ams_min_degree_bound(&p), -676.0, epsilon = 0.1);
    }

    #[test]
    fn exponent_examples() {
        let e = ams_exponents(3);
        assert_relative_eq!(e.f, 5.2807, epsilon = 1e-3);
        assert_relative_eq!(e.g, 1.99438, epsilon = 1e-4);
        assert_relative_eq!(ams_exponents(111).f, 1.9986, epsilon = 1e-3);
        for c in 2..100 {
            let (a, b) = (ams_exponents(c), ams_exponents(c + 1));
            assert!(b.f < a.f && b.g > a.g);
        }
    }

    #[test]
    fn planner_examples() {
        let r = plan_parameters(1.0).unwrap();
        assert_eq!((r.c, r.n_min), (111, 222));
        assert_relative_eq!(r.ln_k, 1045.5, epsilon = 0.1);
        assert_relative_eq!(r.epsilon, 6.99e-10, max_relative = 1e-2);
        assert_eq!(plan_parameters(1.0 - 1e-9).unwrap().c, 111);
        let half = plan_parameters(0.5).unwrap();
        assert_eq!((half.c, half.n_min), (12156, 24312));
        assert!(plan_parameters(0.0).is_err());
        assert!(plan_parameters(1.5).is_err());
        assert!(plan_parameters(f64::NAN).is_err());
        assert!(matches!(plan_parameters(0.01), Err(AmsError::PlannerOverflow(_))));
        let mut prev = plan_parameters(0.95).unwrap();
        for d in [0.8, 0.6, 0.4, 0.3, 0.2] {
            let cur = plan_parameters(d).unwrap();
            assert!(cur.c > prev.c && cur.ln_k > prev.ln_k);
            assert_relative_eq!(cur.mn_lower_bound_ln, 2f64.ln() - cur.epsilon * cur.ln_k);
            prev = cur;
        }
    }

    #[test]
    fn corollary_constants_reproduce_epsilon() {
        for delta in [0.3, 0.5, 1.0 - 1e-9] {
            let planned = plan_parameters(delta).unwrap().epsilon;
            let closed = corollary_epsilon(delta);
            assert!((planned - closed).abs() <= 0.1 * closed, "delta={delta}");
        }
    }
}
