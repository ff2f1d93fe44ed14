//! Coded caching with subpacketization equal to the number of users.
//!
//! A graph `G` on `K` vertices (users) whose edges split into `t` induced
//! matchings gives a caching scheme: user `j` caches packet `i` of every file
//! whenever `{i, j}` is a non-edge, and each matching becomes one XOR
//! broadcast. Every demand vector is served with `t` packet transmissions,
//! i.e. rate `R = t / K`, while each file is cut into only `F = K` packets.
//!
//! - [`graph`]: graphs and the induced-matching predicate.
//! - [`partition`]: greedy and exhaustive induced-matching partitions.
//! - [`ams`]: the distance-threshold construction and its parameter formulas.
//! - [`scheme`]: placement, delivery encoding and decoding.
//! - [`sim`]: end-to-end simulation over demand ensembles with reports.
//! - [`io`]: file formats.

pub mod ams;
pub mod cli;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod partition;
pub mod rational;
pub mod scheme;
pub mod sim;

pub use graph::{Edge, Graph, GraphBuilder, Matching, Vertex};
pub use partition::{RsParams, RsPartition};
pub use rational::Rational;
