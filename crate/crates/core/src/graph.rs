//! Finite directed multigraphs and their structural predicates.
//!
//! Vertices and edges carry string identifiers. Internally they are addressed
//! by position: vertex `i` is the `i`-th declared vertex and matrix row `i`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge `{edge}` references undeclared vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("vertex `{0}` declared twice")]
    DuplicateVertex(String),
    #[error("edge id `{0}` used twice")]
    DuplicateEdge(String),
    #[error("graph does not have disjoint cycles")]
    NotDisjointCycles,
    #[error("malformed graph input: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: String,
    pub source: usize,
    pub range: usize,
}

#[derive(Debug, Clone)]
pub struct MultiGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl PartialEq for MultiGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for MultiGraph {}

/// A simple closed path. `vertices[k]` is the source of `edges[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }
}

/// Cycles of a disjoint-cycle graph ordered by downstream reachability:
/// `c <= c'` when some path runs from a vertex of `c'` to a vertex of `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclePoset {
    pub cycles: Vec<Cycle>,
    /// `(a, b)` means `cycles[a] <= cycles[b]`; reflexive pairs included.
    pub relation: BTreeSet<(usize, usize)>,
}

impl CyclePoset {
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.relation.contains(&(a, b))
    }

    /// Indices of cycles with nothing strictly above them.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.cycles.len()).filter(|&c| !(0..self.cycles.len()).any(|d| d != c && self.leq(c, d))).collect()
    }

    /// Indices of cycles with nothing strictly below them.
    pub fn minimal(&self) -> Vec<usize> {
        (0..self.cycles.len()).filter(|&c| !(0..self.cycles.len()).any(|d| d != c && self.leq(d, c))).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
struct GraphJson {
    vertices: Vec<String>,
    edges: Vec<(String, String, String)>,
}

impl MultiGraph {
    /// Builds a graph from declared vertices and `(edge-id, source, range)` triples.
    pub fn new(vertices: Vec<String>, edges: Vec<(String, String, String)>) -> Result<Self, GraphError> {
        let mut vertex_index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        let lookup = |edge: &str, v: &str| {
            vertex_index
                .get(v)
                .copied()
                .ok_or_else(|| GraphError::UnknownVertex { edge: edge.to_string(), vertex: v.to_string() })
        };
        let mut resolved = Vec::with_capacity(edges.len());
        for (id, s, r) in edges {
            let source = lookup(&id, &s)?;
            let range = lookup(&id, &r)?;
            resolved.push(Edge { id, source, range });
        }
        Self::from_parts(vertices, resolved)
    }

    /// Builds a graph from `(source, range)` pairs; edges are named `e0, e1, ...`.
    pub fn from_pairs<S: AsRef<str>>(vertices: &[S], pairs: &[(S, S)]) -> Result<Self, GraphError> {
        Self::new(
            vertices.iter().map(|v| v.as_ref().to_string()).collect(),
            pairs
                .iter()
                .enumerate()
                .map(|(k, (s, r))| (format!("e{k}"), s.as_ref().to_string(), r.as_ref().to_string()))
                .collect(),
        )
    }

    /// Graph whose adjacency matrix is `matrix`; vertices `v0..`, edges `e0..`
    /// in row-major order.
    pub fn from_matrix(matrix: &IntMatrix) -> Result<Self, GraphError> {
        if !matrix.is_square() {
            return Err(GraphError::Parse("adjacency matrix must be square".into()));
        }
        let n = matrix.rows();
        let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for _ in 0..matrix.get(i, j) {
                    edges.push(Edge { id: format!("e{}", edges.len()), source: i, range: j });
                }
            }
        }
        Self::from_parts(vertices, edges)
    }

    pub(crate) fn from_parts(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let mut vertex_index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut out = vec![Vec::new(); vertices.len()];
        let mut inc = vec![Vec::new(); vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            if e.source >= vertices.len() || e.range >= vertices.len() {
                return Err(GraphError::UnknownVertex { edge: e.id.clone(), vertex: "<out of range>".into() });
            }
            if edge_index.insert(e.id.clone(), k).is_some() {
                return Err(GraphError::DuplicateEdge(e.id.clone()));
            }
            out[e.source].push(k);
            inc[e.range].push(k);
        }
        Ok(Self { vertices, edges, vertex_index, edge_index, out, inc })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn has_vertex(&self, name: &str) -> bool {
        self.vertex_index.contains_key(name)
    }

    pub fn has_edge(&self, id: &str) -> bool {
        self.edge_index.contains_key(id)
    }

    /// Edge positions leaving `v` (the fiber `s^{-1}(v)`), in declaration order.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Edge positions entering `v` (the fiber `r^{-1}(v)`), in declaration order.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn adjacency_matrix(&self) -> IntMatrix {
        let n = self.vertex_count();
        let mut m = IntMatrix::zeros(n, n);
        for e in &self.edges {
            m.set(e.source, e.range, m.get(e.source, e.range) + 1);
        }
        m
    }

    /// The graph with every edge reversed; identifiers are kept.
    pub fn transpose(&self) -> MultiGraph {
        let edges = self.edges.iter().map(|e| Edge { id: e.id.clone(), source: e.range, range: e.source }).collect();
        Self::from_parts(self.vertices.clone(), edges).expect("transpose of a valid graph is valid")
    }

    pub fn is_essential(&self) -> bool {
        self.vertex_count() > 0 && (0..self.vertex_count()).all(|v| !self.out[v].is_empty() && !self.inc[v].is_empty())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            let nbrs = self.out[v]
                .iter()
                .map(|&e| self.edges[e].range)
                .chain(self.inc[v].iter().map(|&e| self.edges[e].source));
            for w in nbrs {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Vertices reachable from `start` by directed paths of length >= 0.
    pub fn reachable_from(&self, start: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::new();
        for v in start {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &e in &self.out[v] {
                let w = self.edges[e].range;
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Strongly connected components (Tarjan), each listed in discovery order.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comps = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            // (vertex, next out-edge offset)
            let mut work = vec![(root, 0usize)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = work.last_mut() {
                if *pos < self.out[v].len() {
                    let w = self.edges[self.out[v][*pos]].range;
                    *pos += 1;
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    work.pop();
                    if let Some(&(parent, _)) = work.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }

    /// Every cycle up to rotation, each starting at its smallest vertex name.
    /// Parallel edges yield distinct cycles.
    pub fn enumerate_cycles(&self) -> Vec<Cycle> {
        let rank = self.name_ranks();
        let mut order: Vec<usize> = (0..self.vertex_count()).collect();
        order.sort_by_key(|&v| rank[v]);
        let mut cycles = Vec::new();
        for &start in &order {
            let mut path_v = vec![start];
            let mut path_e = Vec::new();
            let mut on_path = vec![false; self.vertex_count()];
            on_path[start] = true;
            self.cycle_dfs(start, start, &rank, &mut on_path, &mut path_v, &mut path_e, &mut cycles);
        }
        cycles
    }

    #[allow(clippy::too_many_arguments)]
    fn cycle_dfs(
        &self,
        start: usize,
        v: usize,
        rank: &[usize],
        on_path: &mut [bool],
        path_v: &mut Vec<usize>,
        path_e: &mut Vec<usize>,
        out: &mut Vec<Cycle>,
    ) {
        for &e in &self.out[v] {
            let w = self.edges[e].range;
            if w == start {
                path_e.push(e);
                out.push(Cycle { vertices: path_v.clone(), edges: path_e.clone() });
                path_e.pop();
            } else if rank[w] > rank[start] && !on_path[w] {
                on_path[w] = true;
                path_v.push(w);
                path_e.push(e);
                self.cycle_dfs(start, w, rank, on_path, path_v, path_e, out);
                path_e.pop();
                path_v.pop();
                on_path[w] = false;
            }
        }
    }

    /// Position of each vertex in the lexicographic order of names.
    pub fn name_ranks(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.vertex_count()).collect();
        order.sort_by(|&a, &b| self.vertices[a].cmp(&self.vertices[b]));
        let mut rank = vec![0; order.len()];
        for (r, v) in order.into_iter().enumerate() {
            rank[v] = r;
        }
        rank
    }

    /// No vertex lies on two distinct cycles. Decided from strongly connected
    /// components: each nontrivial component must be a single simple cycle.
    pub fn has_disjoint_cycles(&self) -> bool {
        for comp in self.strongly_connected_components() {
            let members: HashSet<usize> = comp.iter().copied().collect();
            let trivial = comp.len() == 1 && !self.out[comp[0]].iter().any(|&e| self.edges[e].range == comp[0]);
            if trivial {
                continue;
            }
            for &v in &comp {
                let internal = self.out[v].iter().filter(|&&e| members.contains(&self.edges[e].range)).count();
                if internal != 1 {
                    return false;
                }
            }
        }
        true
    }

    /// The cycles of a disjoint-cycle graph, one per nontrivial strongly
    /// connected component, starting at the smallest vertex name.
    pub fn disjoint_cycles(&self) -> Result<Vec<Cycle>, GraphError> {
        if !self.has_disjoint_cycles() {
            return Err(GraphError::NotDisjointCycles);
        }
        Ok(self.enumerate_cycles())
    }

    pub fn cycle_poset(&self) -> Result<CyclePoset, GraphError> {
        let cycles = self.disjoint_cycles()?;
        let mut relation = BTreeSet::new();
        for (b, upper) in cycles.iter().enumerate() {
            let reach = self.reachable_from(upper.vertices.iter().copied());
            for (a, lower) in cycles.iter().enumerate() {
                if lower.vertices.iter().any(|&v| reach[v]) {
                    relation.insert((a, b));
                }
            }
        }
        for &(a, b) in &relation {
            if a != b && relation.contains(&(b, a)) {
                return Err(GraphError::NotDisjointCycles);
            }
        }
        Ok(CyclePoset { cycles, relation })
    }

    /// Smallest hereditary and saturated vertex set containing `seed`.
    ///
    /// Hereditary: `s(e) ∈ H` implies `r(e) ∈ H`. Saturated: a vertex that
    /// emits at least one edge and all of whose edges land in `H` is in `H`.
    pub fn hereditary_saturated_closure(&self, seed: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut in_set = vec![false; self.vertex_count()];
        for &v in seed {
            in_set[v] = true;
        }
        loop {
            let reach = self.reachable_from((0..self.vertex_count()).filter(|&v| in_set[v]));
            let mut changed = false;
            for v in 0..self.vertex_count() {
                if reach[v] && !in_set[v] {
                    in_set[v] = true;
                    changed = true;
                }
            }
            for v in 0..self.vertex_count() {
                if !in_set[v] && !self.out[v].is_empty() && self.out[v].iter().all(|&e| in_set[self.edges[e].range]) {
                    in_set[v] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..self.vertex_count()).filter(|&v| in_set[v]).collect()
    }

    /// True when `vmap` (a bijection from this graph's vertices onto
    /// `other`'s) carries the edge multiset onto `other`'s edge multiset.
    pub fn is_isomorphism(&self, other: &MultiGraph, vmap: &[usize]) -> bool {
        if self.vertex_count() != other.vertex_count() || self.edge_count() != other.edge_count() {
            return false;
        }
        if vmap.len() != self.vertex_count() {
            return false;
        }
        let mut hit = vec![false; other.vertex_count()];
        for &w in vmap {
            if w >= hit.len() || hit[w] {
                return false;
            }
            hit[w] = true;
        }
        let mut counts: HashMap<(usize, usize), i64> = HashMap::new();
        for e in &self.edges {
            *counts.entry((vmap[e.source], vmap[e.range])).or_default() += 1;
        }
        for e in &other.edges {
            *counts.entry((e.source, e.range)).or_default() -= 1;
        }
        counts.values().all(|&c| c == 0)
    }

    /// Reads the JSON graph format `{"vertices": [...], "edges": [[id, s, r], ...]}`.
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let raw: GraphJson = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        Self::new(raw.vertices, raw.edges)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = GraphJson {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| (e.id.clone(), self.vertices[e.source].clone(), self.vertices[e.range].clone()))
                .collect(),
        };
        serde_json::to_value(raw).expect("graph serializes")
    }

    /// Pretty JSON with one edge per line.
    pub fn to_json(&self) -> String {
        let enc = |v: &[&String]| serde_json::to_string(v).expect("strings serialize");
        let edges: Vec<String> = self
            .edges
            .iter()
            .map(|e| format!("    {}", enc(&[&e.id, &self.vertices[e.source], &self.vertices[e.range]])))
            .collect();
        let edges = if edges.is_empty() { "[]".to_string() } else { format!("[\n{}\n  ]", edges.join(",\n")) };
        let vertices: Vec<&String> = self.vertices.iter().collect();
        format!("{{\n  \"vertices\": {},\n  \"edges\": {edges}\n}}", enc(&vertices))
    }

    pub fn to_dot(&self) -> String {
        self.to_dot_styled(|_| None, |_| None)
    }

    /// DOT rendering with optional per-vertex and per-edge colors.
    pub fn to_dot_styled(
        &self,
        vertex_color: impl Fn(usize) -> Option<&'static str>,
        edge_color: impl Fn(usize) -> Option<&'static str>,
    ) -> String {
        let mut s = String::from("digraph G {\n");
        for (v, name) in self.vertices.iter().enumerate() {
            match vertex_color(v) {
                Some(c) => writeln!(s, "  {name:?} [color={c:?}];").unwrap(),
                None => writeln!(s, "  {name:?};").unwrap(),
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            let (a, b) = (&self.vertices[e.source], &self.vertices[e.range]);
            match edge_color(k) {
                Some(c) => writeln!(s, "  {a:?} -> {b:?} [label={:?}, color={c:?}];", e.id).unwrap(),
                None => writeln!(s, "  {a:?} -> {b:?} [label={:?}];", e.id).unwrap(),
            }
        }
        s.push_str("}\n");
        s
    }
}
