//! Brute-force cross-checks: bounded move search and the matrix equations
//! behind elementary and shift equivalence.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use itertools::Itertools;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::MultiGraph;
use crate::matrix::{IntMatrix, MatrixError};
use crate::moves::{apply_move, legal_moves, Move, MoveTrace};

/// Largest graph the canonical key handles.
pub const MAX_CANON_VERTICES: usize = 10;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("graph with {vertices} vertices exceeds the limit of {limit}")]
    LimitExceeded { vertices: usize, limit: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("cache file: {0}")]
    Cache(#[from] io::Error),
}

/// Byte encoding of a graph that is equal for two graphs exactly when they
/// are isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonKey(Vec<u8>);

impl CanonKey {
    pub fn of(g: &MultiGraph) -> Result<Self, OracleError> {
        let n = g.vertex_count();
        if n > MAX_CANON_VERTICES {
            return Err(OracleError::LimitExceeded { vertices: n, limit: MAX_CANON_VERTICES });
        }
        let mut adj = vec![vec![0u32; n]; n];
        for e in g.edges() {
            adj[e.source][e.range] += 1;
        }
        let colors = refine(&adj, vec![0; n]);
        let mut best = None;
        search_leaves(&adj, colors, &mut best);
        Ok(CanonKey(best.unwrap_or_else(|| encode(&adj, &[]))))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

/// Colour refinement: splits colour classes by the colours of in- and
/// out-neighbours until stable. Colour ids stay ordered by the previous ones,
/// so the result depends only on the isomorphism class.
fn refine(adj: &[Vec<u32>], mut colors: Vec<usize>) -> Vec<usize> {
    let n = adj.len();
    loop {
        let sigs: Vec<_> = (0..n)
            .map(|v| {
                let outs: Vec<(usize, u32)> =
                    (0..n).filter(|&w| adj[v][w] > 0).map(|w| (colors[w], adj[v][w])).sorted().collect();
                let ins: Vec<(usize, u32)> =
                    (0..n).filter(|&w| adj[w][v] > 0).map(|w| (colors[w], adj[w][v])).sorted().collect();
                (colors[v], adj[v][v], outs, ins)
            })
            .collect();
        let distinct: Vec<_> = sigs.iter().sorted().dedup().collect();
        let next: Vec<usize> = sigs.iter().map(|s| distinct.binary_search(&s).expect("present")).collect();
        let before = colors.iter().unique().count();
        colors = next;
        if distinct.len() == before {
            return colors;
        }
    }
}

fn encode(adj: &[Vec<u32>], order: &[usize]) -> Vec<u8> {
    let mut out = vec![order.len() as u8];
    for &v in order {
        for &w in order {
            out.extend_from_slice(&adj[v][w].to_be_bytes());
        }
    }
    out
}

/// Individualises each vertex of the first non-singleton class in turn and
/// keeps the smallest encoding over all discrete leaves.
fn search_leaves(adj: &[Vec<u32>], colors: Vec<usize>, best: &mut Option<Vec<u8>>) {
    let n = adj.len();
    let counts = colors.iter().counts();
    let Some(cell) = (0..n).find(|c| counts.get(c).copied().unwrap_or(0) > 1) else {
        let mut order = vec![0; n];
        for (v, &c) in colors.iter().enumerate() {
            order[c] = v;
        }
        let code = encode(adj, &order);
        if best.as_ref().is_none_or(|b| code < *b) {
            *best = Some(code);
        }
        return;
    };
    for v in (0..n).filter(|&v| colors[v] == cell) {
        let split: Vec<usize> = colors
            .iter()
            .enumerate()
            .map(|(w, &c)| if c > cell || (c == cell && w != v) { c + 1 } else { c })
            .collect();
        search_leaves(adj, refine(adj, split), best);
    }
}

/// Searches that ran to completion without finding a trace, keyed by a
/// digest of the two graphs and the limits. File layout: `SFTC`, a
/// little-endian `u32` version, then 32-byte digests.
#[derive(Debug, Default)]
pub struct SearchCache {
    path: Option<PathBuf>,
    misses: BTreeSet<[u8; 32]>,
}

const CACHE_MAGIC: &[u8; 4] = b"SFTC";
const CACHE_VERSION: u32 = 1;

impl SearchCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads the cache at `path`; a missing file gives an empty cache.
    pub fn open(path: &Path) -> Result<Self, OracleError> {
        let mut cache = Self { path: Some(path.to_path_buf()), misses: BTreeSet::new() };
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(e.into()),
        };
        let bad = |msg: &str| OracleError::Cache(io::Error::new(io::ErrorKind::InvalidData, msg.to_string()));
        if bytes.len() < 8 || &bytes[..4] != CACHE_MAGIC {
            return Err(bad("missing header"));
        }
        if u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) != CACHE_VERSION {
            return Err(bad("unsupported version"));
        }
        let body = &bytes[8..];
        if body.len() % 32 != 0 {
            return Err(bad("truncated entry"));
        }
        cache.misses = body.chunks_exact(32).map(|c| c.try_into().expect("32 bytes")).collect();
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.misses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.misses.is_empty()
    }

    pub fn save(&self) -> Result<(), OracleError> {
        let Some(path) = &self.path else { return Ok(()) };
        let mut bytes = CACHE_MAGIC.to_vec();
        bytes.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        for d in &self.misses {
            bytes.extend_from_slice(d);
        }
        fs::write(path, bytes)?;
        Ok(())
    }

    fn digest(e: &CanonKey, f: &CanonKey, limits: &SearchLimits) -> [u8; 32] {
        let (lo, hi) = if e <= f { (e, f) } else { (f, e) };
        let mut h = Sha256::new();
        for key in [lo, hi] {
            h.update((key.0.len() as u64).to_le_bytes());
            h.update(&key.0);
        }
        for x in [limits.max_depth, limits.max_vertices, limits.max_classes] {
            h.update((x as u64).to_le_bytes());
        }
        h.finalize().into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_depth: usize,
    pub max_vertices: usize,
    pub max_classes: usize,
}

struct Node {
    graph: MultiGraph,
    parent: Option<(CanonKey, Move)>,
}

/// Bidirectional breadth-first search over legal moves. Returns a trace
/// taking `e` to a graph isomorphic to `f`; `None` proves nothing.
pub fn sse_search(
    e: &MultiGraph,
    f: &MultiGraph,
    limits: SearchLimits,
    cache: Option<&mut SearchCache>,
) -> Result<Option<MoveTrace>, OracleError> {
    let limit = limits.max_vertices.min(MAX_CANON_VERTICES);
    for g in [e, f] {
        if g.vertex_count() > limit {
            return Err(OracleError::LimitExceeded { vertices: g.vertex_count(), limit });
        }
    }
    let ke = CanonKey::of(e)?;
    let kf = CanonKey::of(f)?;
    if ke == kf {
        return Ok(Some(MoveTrace::new()));
    }
    let digest = SearchCache::digest(&ke, &kf, &limits);
    if cache.as_ref().is_some_and(|c| c.misses.contains(&digest)) {
        return Ok(None);
    }

    let mut sides = [HashMap::new(), HashMap::new()];
    sides[0].insert(ke.clone(), Node { graph: e.clone(), parent: None });
    sides[1].insert(kf.clone(), Node { graph: f.clone(), parent: None });
    let mut frontiers = [vec![ke], vec![kf]];
    let mut budget = [limits.max_depth.div_ceil(2), limits.max_depth / 2];

    let meeting = loop {
        let side = match (budget[0] > 0, budget[1] > 0) {
            (false, false) => break None,
            (true, false) => 0,
            (false, true) => 1,
            (true, true) => usize::from(frontiers[1].len() < frontiers[0].len()),
        };
        budget[side] -= 1;
        let mut next = Vec::new();
        let mut found = None;
        'layer: for key in std::mem::take(&mut frontiers[side]) {
            let g = sides[side][&key].graph.clone();
            for (mv, h) in legal_moves(&g, limits.max_classes) {
                if h.vertex_count() > limit {
                    continue;
                }
                let kh = CanonKey::of(&h)?;
                if sides[side].contains_key(&kh) {
                    continue;
                }
                sides[side].insert(kh.clone(), Node { graph: h, parent: Some((key.clone(), mv)) });
                if sides[1 - side].contains_key(&kh) {
                    found = Some(kh);
                    break 'layer;
                }
                next.push(kh);
            }
        }
        if found.is_some() {
            break found;
        }
        if next.is_empty() && budget[side] > 0 {
            budget[side] = 0;
        }
        frontiers[side] = next;
    };

    let Some(meet) = meeting else {
        if let Some(c) = cache {
            c.misses.insert(digest);
        }
        return Ok(None);
    };

    // forward half: stored moves apply to the stored representatives
    let mut forward = Vec::new();
    let mut key = meet.clone();
    while let Some((parent, mv)) = &sides[0][&key].parent {
        forward.push(mv.clone());
        key = parent.clone();
    }
    forward.reverse();
    let mut trace = MoveTrace::new();
    let mut current = e.clone();
    for mv in forward {
        current = apply_move(&current, &mv).expect("recorded move replays");
        trace.push(mv);
    }

    // backward half: invert each step by finding a move to the parent's class
    let mut key = meet;
    while let Some((parent, _)) = &sides[1][&key].parent {
        let (mv, h) = legal_moves(&current, limits.max_classes)
            .find(|(_, h)| CanonKey::of(h).is_ok_and(|k| k == *parent))
            .expect("every move has an inverse among the legal moves");
        trace.push(mv);
        current = h;
        key = parent.clone();
    }
    Ok(Some(trace))
}

fn check_shape(m: &IntMatrix, rows: usize, cols: usize, name: &str) -> Result<(), OracleError> {
    if m.rows() != rows || m.cols() != cols {
        return Err(OracleError::DimensionMismatch(format!(
            "{name} is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn check_witness_shapes(a: &IntMatrix, b: &IntMatrix, r: &IntMatrix, s: &IntMatrix) -> Result<(), OracleError> {
    check_shape(a, a.rows(), a.rows(), "A")?;
    check_shape(b, b.rows(), b.rows(), "B")?;
    check_shape(r, a.rows(), b.rows(), "R")?;
    check_shape(s, b.rows(), a.rows(), "S")
}

/// `A = RS` and `B = SR`.
pub fn verify_elementary(a: &IntMatrix, b: &IntMatrix, r: &IntMatrix, s: &IntMatrix) -> Result<bool, OracleError> {
    if r.cols() != s.rows() || s.cols() != r.rows() {
        return Err(OracleError::DimensionMismatch("R and S do not compose".into()));
    }
    check_shape(a, r.rows(), r.rows(), "A")?;
    check_shape(b, s.rows(), s.rows(), "B")?;
    Ok(r.mul(s)? == *a && s.mul(r)? == *b)
}

/// `A^l = RS`, `B^l = SR`, `AR = RB` and `SA = BS`.
pub fn verify_se_witness(
    a: &IntMatrix,
    b: &IntMatrix,
    r: &IntMatrix,
    s: &IntMatrix,
    lag: u32,
) -> Result<bool, OracleError> {
    if lag == 0 {
        return Err(OracleError::DimensionMismatch("lag must be at least 1".into()));
    }
    check_witness_shapes(a, b, r, s)?;
    Ok(a.pow(lag)? == r.mul(s)? && b.pow(lag)? == s.mul(r)? && a.mul(r)? == r.mul(b)? && s.mul(a)? == b.mul(s)?)
}

/// All matrices of the given shape with entries in `0..=max_entry`.
fn all_matrices(rows: usize, cols: usize, max_entry: u64) -> impl Iterator<Item = IntMatrix> {
    (0..rows * cols).map(|_| 0..=max_entry).multi_cartesian_product().map(move |flat| {
        IntMatrix::from_rows(flat.chunks(cols.max(1)).map(<[u64]>::to_vec).collect()).expect("rectangular")
    })
}

/// Exhaustive search for a shift-equivalence witness with small entries and
/// lag at most `max_lag`.
pub fn search_se_witness(
    a: &IntMatrix,
    b: &IntMatrix,
    max_lag: u32,
    max_entry: u64,
) -> Result<Option<(IntMatrix, IntMatrix, u32)>, OracleError> {
    check_shape(a, a.rows(), a.rows(), "A")?;
    check_shape(b, b.rows(), b.rows(), "B")?;
    let (n, k) = (a.rows(), b.rows());
    let intertwiners: Vec<IntMatrix> =
        all_matrices(n, k, max_entry).filter(|r| matches!((a.mul(r), r.mul(b)), (Ok(x), Ok(y)) if x == y)).collect();
    let back: Vec<IntMatrix> =
        all_matrices(k, n, max_entry).filter(|s| matches!((s.mul(a), b.mul(s)), (Ok(x), Ok(y)) if x == y)).collect();
    for lag in 1..=max_lag {
        let (al, bl) = (a.pow(lag)?, b.pow(lag)?);
        for r in &intertwiners {
            for s in &back {
                if r.mul(s)? == al && s.mul(r)? == bl {
                    return Ok(Some((r.clone(), s.clone(), lag)));
                }
            }
        }
    }
    Ok(None)
}
