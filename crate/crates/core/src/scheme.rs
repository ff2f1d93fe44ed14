//! Placement, XOR delivery and per-user decoding for the caching scheme
//! induced by a graph and an induced-matching partition of its edges.
//!
//! Users and packet indices are both `0..K`, so every file has `F = K`
//! packets. User `j` stores packet `i` of every file exactly when `i == j` or
//! `{i, j}` is a non-edge. Matching `M_q` yields one broadcast payload, the
//! XOR over its edges `(a, b)` of `packet(a, d_b) ^ packet(b, d_a)`.

use std::collections::HashMap;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph, Vertex, VertexSet};
use crate::partition::{required_cache_ratio, verify_rs_partition, PartitionError, RsPartition};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("demand vector has {got} entries, expected {expected}")]
    DemandLength { expected: usize, got: usize },
    #[error("user {user} demands file {file}, library has {files}")]
    DemandOutOfRange { user: usize, file: u32, files: usize },
    #[error("file {file} has {len} bytes, over the K*B budget of {budget}")]
    FileTooLarge { file: usize, len: usize, budget: usize },
    #[error("packet size must be positive")]
    ZeroPacketSize,
    #[error("library needs at least one file")]
    NoFiles,
    #[error("batch was encoded for partition {batch}, decoder holds {expected}")]
    PartitionMismatch { batch: String, expected: String },
    #[error("internal: edge {{{packet},{user}}} is uncached but covered by no matching")]
    EdgeNotCovered { packet: Vertex, user: Vertex },
    #[error("internal: user {user} decoding packet {packet} from payload {payload} lacks cached packet {missing} of file {file}")]
    ConstituentMissing {
        packet: Vertex,
        user: Vertex,
        payload: usize,
        missing: Vertex,
        file: u32,
    },
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Packet indices cached by each user; identical for every file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementMap {
    cached: Vec<VertexSet>,
}

impl PlacementMap {
    pub fn user_count(&self) -> usize {
        self.cached.len()
    }

    pub fn contains(&self, user: Vertex, packet: Vertex) -> bool {
        self.cached[user as usize].contains(packet)
    }

    pub fn cached_packets(&self, user: Vertex) -> Vec<Vertex> {
        self.cached[user as usize].iter().collect()
    }

    /// Equals `K - degree(user)`.
    pub fn per_file_count(&self, user: Vertex) -> usize {
        self.cached[user as usize].len()
    }

    pub fn per_file_counts(&self) -> Vec<usize> {
        self.cached.iter().map(VertexSet::len).collect()
    }
}

/// User `j` caches `{j}` together with every `i` where `{i, j}` is not an edge.
pub fn build_placement(g: &Graph) -> PlacementMap {
    let k = g.vertex_count();
    let cached = (0..k as Vertex)
        .map(|j| {
            let mut set = VertexSet::new(k);
            let row = g.neighbors(j);
            for i in 0..k as Vertex {
                if !row.contains(i) {
                    set.insert(i);
                }
            }
            set
        })
        .collect();
    PlacementMap { cached }
}

/// `(K - deg j) N <= mn_ratio K N` for every user `j`.
pub fn check_memory(pm: &PlacementMap, files: usize, mn_ratio: Rational) -> bool {
    let k = pm.user_count() as u64;
    let n = files as u64;
    let budget = mn_ratio * Rational::from_integer(k * n);
    pm.per_file_counts()
        .iter()
        .all(|&c| Rational::from_integer(c as u64 * n) <= budget)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandVector(Vec<u32>);

impl DemandVector {
    pub fn new(demands: Vec<u32>, users: usize, files: usize) -> Result<Self, SchemeError> {
        if demands.len() != users {
            return Err(SchemeError::DemandLength {
                expected: users,
                got: demands.len(),
            });
        }
        if let Some((user, &file)) = demands.iter().enumerate().find(|(_, &f)| f as usize >= files) {
            return Err(SchemeError::DemandOutOfRange { user, file, files });
        }
        Ok(DemandVector(demands))
    }

    #[inline]
    pub fn file_of(&self, user: Vertex) -> u32 {
        self.0[user as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `N` files of `K` packets of `B` bytes, zero-padded from the original
/// file contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketLibrary {
    files: usize,
    packets: usize,
    packet_bytes: usize,
    data: Vec<u8>,
    original_lengths: Vec<usize>,
}

impl PacketLibrary {
    fn check_dims(files: usize, packets: usize, packet_bytes: usize) -> Result<(), SchemeError> {
        if files == 0 {
            return Err(SchemeError::NoFiles);
        }
        if packet_bytes == 0 {
            return Err(SchemeError::ZeroPacketSize);
        }
        if packets == 0 {
            return Err(SchemeError::DimensionMismatch("K must be positive".into()));
        }
        Ok(())
    }

    pub fn from_files(contents: &[Vec<u8>], packets: usize, packet_bytes: usize) -> Result<Self, SchemeError> {
        Self::check_dims(contents.len(), packets, packet_bytes)?;
        let budget = packets * packet_bytes;
        let mut data = vec![0u8; contents.len() * budget];
        for (f, bytes) in contents.iter().enumerate() {
            if bytes.len() > budget {
                return Err(SchemeError::FileTooLarge {
                    file: f,
                    len: bytes.len(),
                    budget,
                });
            }
            data[f * budget..f * budget + bytes.len()].copy_from_slice(bytes);
        }
        Ok(PacketLibrary {
            files: contents.len(),
            packets,
            packet_bytes,
            data,
            original_lengths: contents.iter().map(Vec::len).collect(),
        })
    }

    /// Library of full-length files filled from ChaCha8 seeded with `seed`.
    pub fn seeded(files: usize, packets: usize, packet_bytes: usize, seed: u64) -> Result<Self, SchemeError> {
        Self::check_dims(files, packets, packet_bytes)?;
        let mut data = vec![0u8; files * packets * packet_bytes];
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut data);
        Ok(PacketLibrary {
            files,
            packets,
            packet_bytes,
            data,
            original_lengths: vec![packets * packet_bytes; files],
        })
    }

    pub fn zeroed(files: usize, packets: usize, packet_bytes: usize) -> Result<Self, SchemeError> {
        Self::check_dims(files, packets, packet_bytes)?;
        Ok(PacketLibrary {
            files,
            packets,
            packet_bytes,
            data: vec![0; files * packets * packet_bytes],
            original_lengths: vec![packets * packet_bytes; files],
        })
    }

    pub fn files(&self) -> usize {
        self.files
    }

    /// Packets per file, `F = K`.
    pub fn packets(&self) -> usize {
        self.packets
    }

    pub fn packet_bytes(&self) -> usize {
        self.packet_bytes
    }

    pub fn original_lengths(&self) -> &[usize] {
        &self.original_lengths
    }

    /// Packet `index` of file `file`.
    #[inline]
    pub fn packet(&self, index: Vertex, file: u32) -> &[u8] {
        let start = (file as usize * self.packets + index as usize) * self.packet_bytes;
        &self.data[start..start + self.packet_bytes]
    }

    /// Original bytes of `file` with padding removed.
    pub fn file_bytes(&self, file: u32) -> &[u8] {
        let start = file as usize * self.packets * self.packet_bytes;
        &self.data[start..start + self.original_lengths[file as usize]]
    }

    /// Packet-wise XOR of two libraries of identical shape.
    pub fn xor(&self, other: &PacketLibrary) -> Result<PacketLibrary, SchemeError> {
        if (self.files, self.packets, self.packet_bytes) != (other.files, other.packets, other.packet_bytes) {
            return Err(SchemeError::DimensionMismatch("library shapes differ".into()));
        }
        Ok(PacketLibrary {
            files: self.files,
            packets: self.packets,
            packet_bytes: self.packet_bytes,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a ^ b).collect(),
            original_lengths: vec![self.packets * self.packet_bytes; self.files],
        })
    }
}

/// What a single user holds after placement: its cached packet indices for
/// every file, plus the public per-file lengths.
#[derive(Debug, Clone)]
pub struct UserCache {
    user: Vertex,
    files: usize,
    packet_bytes: usize,
    slot_of: Vec<Option<usize>>,
    data: Vec<u8>,
    original_lengths: Vec<usize>,
}

impl UserCache {
    pub fn fill(lib: &PacketLibrary, pm: &PlacementMap, user: Vertex) -> Result<Self, SchemeError> {
        if pm.user_count() != lib.packets() {
            return Err(SchemeError::DimensionMismatch(format!(
                "placement has {} users, library has {} packets per file",
                pm.user_count(),
                lib.packets()
            )));
        }
        let indices = pm.cached_packets(user);
        let mut slot_of = vec![None; lib.packets()];
        let mut data = Vec::with_capacity(indices.len() * lib.files() * lib.packet_bytes());
        for (slot, &i) in indices.iter().enumerate() {
            slot_of[i as usize] = Some(slot);
            for f in 0..lib.files() as u32 {
                data.extend_from_slice(lib.packet(i, f));
            }
        }
        Ok(UserCache {
            user,
            files: lib.files(),
            packet_bytes: lib.packet_bytes(),
            slot_of,
            data,
            original_lengths: lib.original_lengths().to_vec(),
        })
    }

    pub fn user(&self) -> Vertex {
        self.user
    }

    pub fn get(&self, index: Vertex, file: u32) -> Option<&[u8]> {
        let slot = (*self.slot_of.get(index as usize)?)?;
        if file as usize >= self.files {
            return None;
        }
        let start = (slot * self.files + file as usize) * self.packet_bytes;
        Some(&self.data[start..start + self.packet_bytes])
    }

    /// Total bytes held, `(K - deg j) N B`.
    pub fn stored_bytes(&self) -> usize {
        self.data.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchHeader {
    pub partition_id: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub demands: Vec<u32>,
}

/// One payload per matching, in matching order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliveryBatch {
    pub header: BatchHeader,
    pub payloads: Vec<Vec<u8>>,
}

fn xor_into(acc: &mut [u8], src: &[u8]) {
    for (a, s) in acc.iter_mut().zip(src) {
        *a ^= s;
    }
}

fn check_partition_dims(p: &RsPartition, k: usize) -> Result<(), SchemeError> {
    let out_of_range = p
        .matchings()
        .iter()
        .flat_map(|m| m.edges())
        .find(|e| e.hi() as usize >= k);
    match out_of_range {
        Some(e) => Err(SchemeError::DimensionMismatch(format!(
            "partition edge {e} exceeds K = {k}"
        ))),
        None => Ok(()),
    }
}

/// Broadcast for one demand vector: payload `q` is the XOR over edges
/// `(a, b)` of `M_q` of `packet(a, d_b) ^ packet(b, d_a)`.
pub fn encode_delivery(
    p: &RsPartition,
    d: &DemandVector,
    lib: &PacketLibrary,
) -> Result<DeliveryBatch, SchemeError> {
    encode_with_id(p, &crate::io::partition_digest(p), d, lib)
}

pub(crate) fn encode_with_id(
    p: &RsPartition,
    partition_id: &str,
    d: &DemandVector,
    lib: &PacketLibrary,
) -> Result<DeliveryBatch, SchemeError> {
    let k = lib.packets();
    if d.len() != k {
        return Err(SchemeError::DemandLength { expected: k, got: d.len() });
    }
    if let Some((user, &file)) = d.as_slice().iter().enumerate().find(|(_, &f)| f as usize >= lib.files()) {
        return Err(SchemeError::DemandOutOfRange { user, file, files: lib.files() });
    }
    check_partition_dims(p, k)?;

    let payloads = p
        .matchings()
        .par_iter()
        .map(|m| {
            let mut acc = vec![0u8; lib.packet_bytes()];
            for e in m.edges() {
                let (a, b) = (e.lo(), e.hi());
                xor_into(&mut acc, lib.packet(a, d.file_of(b)));
                xor_into(&mut acc, lib.packet(b, d.file_of(a)));
            }
            acc
        })
        .collect();

    Ok(DeliveryBatch {
        header: BatchHeader {
            partition_id: partition_id.to_owned(),
            k,
            n: lib.files(),
            b: lib.packet_bytes(),
            demands: d.as_slice().to_vec(),
        },
        payloads,
    })
}

/// Decoding context shared by all users: the partition and an edge-to-matching
/// index. Build once per partition, decode many times.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    partition: &'a RsPartition,
    partition_id: String,
    matching_of: HashMap<Edge, usize>,
}

impl<'a> Decoder<'a> {
    pub fn new(partition: &'a RsPartition) -> Self {
        Self::with_id(partition, crate::io::partition_digest(partition))
    }

    pub fn with_id(partition: &'a RsPartition, partition_id: String) -> Self {
        Decoder {
            partition,
            partition_id,
            matching_of: partition.edge_index(),
        }
    }

    pub fn partition_id(&self) -> &str {
        &self.partition_id
    }

    /// Recovers the padded file `d_user` (K*B bytes) packet by packet.
    pub fn decode_padded(
        &self,
        user: Vertex,
        batch: &DeliveryBatch,
        pm: &PlacementMap,
        cache: &UserCache,
    ) -> Result<Vec<u8>, SchemeError> {
        let h = &batch.header;
        if h.partition_id != self.partition_id {
            return Err(SchemeError::PartitionMismatch {
                batch: h.partition_id.clone(),
                expected: self.partition_id.clone(),
            });
        }
        if h.k != pm.user_count() || h.demands.len() != h.k || (user as usize) >= h.k {
            return Err(SchemeError::DimensionMismatch(format!(
                "batch K = {} vs placement K = {} for user {user}",
                h.k,
                pm.user_count()
            )));
        }
        if batch.payloads.len() != self.partition.t() || cache.user() != user {
            return Err(SchemeError::DimensionMismatch(format!(
                "{} payloads for t = {}, cache of user {}",
                batch.payloads.len(),
                self.partition.t(),
                cache.user()
            )));
        }
        let demands = &h.demands;
        let wanted = demands[user as usize];
        let mut out = Vec::with_capacity(h.k * h.b);

        for f in 0..h.k as Vertex {
            if pm.contains(user, f) {
                let cached = cache.get(f, wanted).ok_or(SchemeError::ConstituentMissing {
                    packet: f,
                    user,
                    payload: usize::MAX,
                    missing: f,
                    file: wanted,
                })?;
                out.extend_from_slice(cached);
                continue;
            }
            let edge = Edge::new(f, user).ok_or(SchemeError::EdgeNotCovered { packet: f, user })?;
            let q = *self
                .matching_of
                .get(&edge)
                .ok_or(SchemeError::EdgeNotCovered { packet: f, user })?;
            let mut acc = batch.payloads[q].clone();
            for e in self.partition.matchings()[q].edges() {
                let (a, b) = (e.lo(), e.hi());
                for (index, owner) in [(a, b), (b, a)] {
                    // The wanted term is packet(f, d_user).
                    if index == f && owner == user {
                        continue;
                    }
                    let file = demands[owner as usize];
                    let known = cache.get(index, file).ok_or(SchemeError::ConstituentMissing {
                        packet: f,
                        user,
                        payload: q,
                        missing: index,
                        file,
                    })?;
                    xor_into(&mut acc, known);
                }
            }
            out.extend_from_slice(&acc);
        }
        Ok(out)
    }

    /// Recovers file `d_user` truncated to its original length.
    pub fn decode(
        &self,
        user: Vertex,
        batch: &DeliveryBatch,
        pm: &PlacementMap,
        cache: &UserCache,
    ) -> Result<Vec<u8>, SchemeError> {
        let mut bytes = self.decode_padded(user, batch, pm, cache)?;
        let wanted = batch.header.demands[user as usize] as usize;
        let len = *cache.original_lengths.get(wanted).ok_or_else(|| {
            SchemeError::DimensionMismatch(format!("no length recorded for file {wanted}"))
        })?;
        bytes.truncate(len);
        Ok(bytes)
    }
}

/// One-shot decode for `user`. The graph is checked against the placement;
/// use [`Decoder`] directly when decoding many users.
pub fn decode_user(
    user: Vertex,
    batch: &DeliveryBatch,
    pm: &PlacementMap,
    cache: &UserCache,
    p: &RsPartition,
    g: &Graph,
) -> Result<Vec<u8>, SchemeError> {
    if g.vertex_count() != pm.user_count() {
        return Err(SchemeError::DimensionMismatch(format!(
            "graph has {} vertices, placement {} users",
            g.vertex_count(),
            pm.user_count()
        )));
    }
    Decoder::new(p).decode(user, batch, pm, cache)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeParams {
    /// File transmissions `R = t / K`.
    pub rate: Rational,
    /// Subpacketization, always `K`.
    pub subpacketization: usize,
    pub mn_required: Rational,
}

pub fn scheme_params(g: &Graph, p: &RsPartition) -> Result<SchemeParams, SchemeError> {
    let params = verify_rs_partition(g, p)?;
    let k = g.vertex_count();
    Ok(SchemeParams {
        rate: Rational::new(params.t as u64, k as u64),
        subpacketization: k,
        mn_required: required_cache_ratio(g),
    })
}
