//! Fixture graphs and random generators for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::MultiGraph;
use crate::moves::{legal_moves, Move};

fn build(vertices: Vec<String>, pairs: Vec<(usize, usize)>) -> MultiGraph {
    let edges = pairs
        .into_iter()
        .enumerate()
        .map(|(k, (s, r))| (format!("e{k}"), vertices[s].clone(), vertices[r].clone()))
        .collect();
    MultiGraph::new(vertices, edges).expect("generated graphs are well formed")
}

fn named(vertices: &[&str], pairs: &[(&str, &str)]) -> MultiGraph {
    MultiGraph::from_pairs(vertices, pairs).expect("fixture is well formed")
}

/// A single loop.
pub fn loop1() -> MultiGraph {
    named(&["u"], &[("u", "u")])
}

/// A cycle of length `n` on vertices `c0..`.
pub fn cycle(n: usize) -> MultiGraph {
    let vertices: Vec<String> = (0..n).map(|k| format!("c{k}")).collect();
    build(vertices, (0..n).map(|k| (k, (k + 1) % n)).collect())
}

/// Loop at `u`, edge `u -> w`, loop at `w`.
pub fn m1() -> MultiGraph {
    named(&["u", "w"], &[("u", "u"), ("u", "w"), ("w", "w")])
}

/// Source 2-cycle and sink 2-cycle joined by the given edges out of `v0`.
pub fn two_by_two(targets: &[&str]) -> MultiGraph {
    let mut pairs = vec![("v0", "v1"), ("v1", "v0"), ("w0", "w1"), ("w1", "w0")];
    pairs.extend(targets.iter().map(|&t| ("v0", t)));
    named(&["v0", "v1", "w0", "w1"], &pairs)
}

/// Two parallel edges `v0 -> w0`.
pub fn e2() -> MultiGraph {
    two_by_two(&["w0", "w0"])
}

/// Edges `v0 -> w0` and `v0 -> w1`.
pub fn f2() -> MultiGraph {
    two_by_two(&["w0", "w1"])
}

/// Loops `a -> b -> c` chained by single edges.
pub fn chain3() -> MultiGraph {
    named(&["a", "b", "c"], &[("a", "a"), ("a", "b"), ("b", "b"), ("b", "c"), ("c", "c")])
}

/// Two loops at one vertex.
pub fn double_loop() -> MultiGraph {
    named(&["v"], &[("v", "v"), ("v", "v")])
}

/// The two-vertex graph with a loop at each vertex, `k` edges `v -> w` and
/// `k - 1` edges `w -> v`.
pub fn two_vertex(k: usize) -> MultiGraph {
    let mut pairs = vec![("v", "v"), ("w", "w")];
    pairs.extend(std::iter::repeat_n(("v", "w"), k));
    pairs.extend(std::iter::repeat_n(("w", "v"), k.saturating_sub(1)));
    named(&["v", "w"], &pairs)
}

/// The pair of normal-form graphs with two source and two sink 2-cycles whose
/// trail tables agree on (1,1) and differ by a shift of one elsewhere.
pub fn non_sse_pair() -> (MultiGraph, MultiGraph) {
    let vertices = ["c1a", "c1b", "c2a", "c2b", "d1a", "d1b", "d2a", "d2b"];
    let cycles = [
        ("c1a", "c1b"),
        ("c1b", "c1a"),
        ("c2a", "c2b"),
        ("c2b", "c2a"),
        ("d1a", "d1b"),
        ("d1b", "d1a"),
        ("d2a", "d2b"),
        ("d2b", "d2a"),
    ];
    let with = |trails: &[(&'static str, &'static str)]| {
        let mut pairs = cycles.to_vec();
        pairs.extend_from_slice(trails);
        named(&vertices, &pairs)
    };
    let e = with(&[("c1a", "d1a"), ("c1a", "d1a"), ("c1a", "d2a"), ("c2a", "d1b"), ("c2a", "d2b")]);
    let f = with(&[("c1a", "d1a"), ("c1a", "d1a"), ("c1a", "d2b"), ("c2a", "d1a"), ("c2a", "d2a")]);
    (e, f)
}

/// Random connected spanning set of source/sink pairs.
fn spanning_pairs<R: Rng>(rng: &mut R, m: usize, n: usize) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    all.shuffle(rng);
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    let mut chosen = Vec::new();
    for (i, j) in all {
        let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
        if a != b {
            parent[a] = b;
            chosen.push((i, j));
        }
    }
    chosen
}

struct Skeleton {
    vertices: Vec<String>,
    pairs: Vec<(usize, usize)>,
    sources: Vec<Vec<usize>>,
    sinks: Vec<Vec<usize>>,
}

impl Skeleton {
    fn new<R: Rng>(rng: &mut R, max_len: usize, max_vertices: usize) -> Self {
        let mut sk = Skeleton { vertices: Vec::new(), pairs: Vec::new(), sources: Vec::new(), sinks: Vec::new() };
        let m = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=2);
        let mut budget = max_vertices.max(2);
        for k in 0..m + n {
            let remaining_cycles = m + n - k - 1;
            let len = rng.gen_range(1..=max_len).min(budget.saturating_sub(remaining_cycles)).max(1);
            budget -= len.min(budget);
            let cyc = sk.add_cycle(len);
            if k < m {
                sk.sources.push(cyc);
            } else {
                sk.sinks.push(cyc);
            }
        }
        sk
    }

    fn add_cycle(&mut self, len: usize) -> Vec<usize> {
        let start = self.vertices.len();
        for k in 0..len {
            self.vertices.push(format!("x{}", start + k));
            self.pairs.push((start + k, start + (k + 1) % len));
        }
        (start..start + len).collect()
    }

    fn add_vertex(&mut self) -> usize {
        self.vertices.push(format!("x{}", self.vertices.len()));
        self.vertices.len() - 1
    }

    /// Renames vertices randomly and shuffles declaration orders.
    fn finish<R: Rng>(self, rng: &mut R) -> MultiGraph {
        let n = self.vertices.len();
        let mut labels: Vec<usize> = (0..n).collect();
        labels.shuffle(rng);
        let names: Vec<String> = labels.iter().map(|l| format!("v{l}")).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let vertices: Vec<String> = order.iter().map(|&v| names[v].clone()).collect();
        let mut pairs = self.pairs;
        pairs.shuffle(rng);
        let edges = pairs
            .into_iter()
            .enumerate()
            .map(|(k, (s, r))| (format!("e{k}"), names[s].clone(), names[r].clone()))
            .collect();
        MultiGraph::new(vertices, edges).expect("generated graphs are well formed")
    }
}

/// A random GK3 graph with at most `max_vertices` vertices (at least 2).
/// Trails may be longer than one edge and may share interior vertices.
pub fn random_gk3<R: Rng>(rng: &mut R, max_vertices: usize) -> MultiGraph {
    let mut sk = Skeleton::new(rng, 3, max_vertices);
    let (m, n) = (sk.sources.len(), sk.sinks.len());
    let mut wanted = spanning_pairs(rng, m, n);
    for _ in 0..rng.gen_range(0..=2) {
        wanted.push((rng.gen_range(0..m), rng.gen_range(0..n)));
    }
    let mut interior: Vec<usize> = Vec::new();
    for (i, j) in wanted {
        let from = *sk.sources[i].choose(rng).expect("cycle is nonempty");
        let to = *sk.sinks[j].choose(rng).expect("cycle is nonempty");
        // interior path: increasing positions in `interior` keep it acyclic
        let mut path = Vec::new();
        let mut pos = 0;
        for _ in 0..rng.gen_range(0..=2) {
            let reuse = pos < interior.len() && rng.gen_bool(0.5);
            if reuse {
                pos = rng.gen_range(pos..interior.len());
                path.push(interior[pos]);
                pos += 1;
            } else if sk.vertices.len() < max_vertices {
                let v = sk.add_vertex();
                interior.push(v);
                pos = interior.len();
                path.push(v);
            }
        }
        let mut prev = from;
        for v in path {
            sk.pairs.push((prev, v));
            prev = v;
        }
        sk.pairs.push((prev, to));
    }
    sk.finish(rng)
}

/// A random GK3 graph in normal form.
pub fn random_normal_form<R: Rng>(rng: &mut R, max_len: usize) -> MultiGraph {
    let mut sk = Skeleton::new(rng, max_len, usize::MAX);
    let (m, n) = (sk.sources.len(), sk.sinks.len());
    let starts: Vec<usize> = sk.sources.iter().map(|c| *c.choose(rng).expect("nonempty")).collect();
    let mut wanted = spanning_pairs(rng, m, n);
    for _ in 0..rng.gen_range(0..=3) {
        wanted.push((rng.gen_range(0..m), rng.gen_range(0..n)));
    }
    for (i, j) in wanted {
        let to = *sk.sinks[j].choose(rng).expect("nonempty");
        sk.pairs.push((starts[i], to));
    }
    sk.finish(rng)
}

/// One source cycle of length `p`, one sink cycle of length `q`, and
/// `trails` vertex-disjoint trails of random lengths, sources and ranges.
pub fn random_isolated_trails<R: Rng>(rng: &mut R, p: usize, q: usize, trails: usize) -> MultiGraph {
    let mut sk = Skeleton { vertices: Vec::new(), pairs: Vec::new(), sources: Vec::new(), sinks: Vec::new() };
    let c = sk.add_cycle(p);
    let d = sk.add_cycle(q);
    for _ in 0..trails.max(1) {
        let mut prev = *c.choose(rng).expect("nonempty");
        for _ in 0..rng.gen_range(0..=2) {
            let v = sk.add_vertex();
            sk.pairs.push((prev, v));
            prev = v;
        }
        sk.pairs.push((prev, *d.choose(rng).expect("nonempty")));
    }
    sk.finish(rng)
}

/// A uniformly chosen legal move with at most `max_classes` classes.
pub fn random_move<R: Rng>(rng: &mut R, g: &MultiGraph, max_classes: usize) -> (Move, MultiGraph) {
    let moves: Vec<(Move, MultiGraph)> = legal_moves(g, max_classes).collect();
    moves.choose(rng).cloned().expect("essential graphs always admit a split")
}

/// Seed for randomized tests: `SFT_SEED` if set, otherwise `default`.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var("SFT_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(default)
}
