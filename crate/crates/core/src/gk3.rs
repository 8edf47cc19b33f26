//! Graphs of GK dimension three: source cycles, sink cycles and the trails
//! joining them; reduction to normal form and trail-range shifting.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::gk::is_gk3;
use crate::graph::MultiGraph;
use crate::moves::{in_amalgamate, out_split, MoveError, MoveTrace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gk3Error {
    #[error("graph is not connected, essential and of GK dimension 3")]
    NotGK3,
    #[error("cycle through `{0}` has both an exit and an entrance")]
    MixedCycle(String),
    #[error("vertex `{0}` is not an interior trail vertex")]
    NotInterior(String),
    #[error("graph is not in normal form")]
    NotNormalForm,
    #[error("no trail with index {0}")]
    UnknownTrail(usize),
    #[error("trail {0} shares interior vertices with other trails")]
    TrailNotIsolated(usize),
    #[error(transparent)]
    Move(#[from] MoveError),
}

/// A cycle with a chosen starting point: `vertices[k]` has index `k` and
/// `edges[k]` runs from index `k` to index `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedCycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl IndexedCycle {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: usize) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v)
    }
}

/// Path from vertex `a` of source cycle `source` to vertex `b` of sink
/// cycle `sink` whose interior avoids all cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trail {
    pub source: usize,
    pub a: usize,
    pub sink: usize,
    pub b: usize,
    pub edges: Vec<usize>,
}

impl Trail {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Source { cycle: usize, index: usize },
    Sink { cycle: usize, index: usize },
    Interior,
}

#[derive(Debug, Clone)]
pub struct PointedGK3 {
    pub graph: MultiGraph,
    pub sources: Vec<IndexedCycle>,
    pub sinks: Vec<IndexedCycle>,
    pub trails: Vec<Trail>,
    places: Vec<Place>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrailClass {
    pub source: usize,
    pub sink: usize,
    pub f: usize,
    pub modulus: usize,
}

#[derive(Serialize)]
struct CycleDump {
    length: usize,
    vertices: Vec<String>,
}

#[derive(Serialize)]
struct TrailDump {
    source: usize,
    a: usize,
    sink: usize,
    b: usize,
    length: usize,
    edges: Vec<String>,
    class: usize,
}

#[derive(Serialize)]
struct PointedDump {
    m: usize,
    n: usize,
    sources: Vec<CycleDump>,
    sinks: Vec<CycleDump>,
    trails: Vec<TrailDump>,
}

impl PointedGK3 {
    pub fn p(&self, i: usize) -> usize {
        self.sources[i].len()
    }

    pub fn q(&self, j: usize) -> usize {
        self.sinks[j].len()
    }

    pub fn place(&self, v: usize) -> Place {
        self.places[v]
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.places[v] == Place::Interior
    }

    /// Names of the index-0 vertices of all cycles, sources first.
    pub fn anchors(&self) -> Vec<String> {
        self.sources.iter().chain(&self.sinks).map(|c| self.graph.vertex_name(c.vertices[0]).to_string()).collect()
    }

    pub fn is_normal_form(&self) -> bool {
        self.trails.iter().all(|t| t.len() == 1)
            && (0..self.sources.len())
                .all(|i| self.trails.iter().filter(|t| t.source == i).map(|t| t.a).collect::<BTreeSet<_>>().len() <= 1)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let g = &self.graph;
        let dump_cycle = |c: &IndexedCycle| CycleDump {
            length: c.len(),
            vertices: c.vertices.iter().map(|&v| g.vertex_name(v).to_string()).collect(),
        };
        let dump = PointedDump {
            m: self.sources.len(),
            n: self.sinks.len(),
            sources: self.sources.iter().map(dump_cycle).collect(),
            sinks: self.sinks.iter().map(dump_cycle).collect(),
            trails: self
                .trails
                .iter()
                .enumerate()
                .map(|(k, t)| TrailDump {
                    source: t.source,
                    a: t.a,
                    sink: t.sink,
                    b: t.b,
                    length: t.len(),
                    edges: t.edges.iter().map(|&e| g.edges()[e].id.clone()).collect(),
                    class: trail_class(self, k).f,
                })
                .collect(),
        };
        serde_json::to_value(dump).expect("pointed structure serializes")
    }
}

pub fn pointed_structure(g: &MultiGraph) -> Result<PointedGK3, Gk3Error> {
    pointed_structure_anchored(g, &[])
}

/// As [`pointed_structure`], but any cycle containing a vertex named in
/// `anchors` uses the first such vertex as its index-0 vertex.
pub fn pointed_structure_anchored(g: &MultiGraph, anchors: &[String]) -> Result<PointedGK3, Gk3Error> {
    if !is_gk3(g) {
        return Err(Gk3Error::NotGK3);
    }
    let cycles = g.disjoint_cycles().map_err(|_| Gk3Error::NotGK3)?;
    let anchor_ids: Vec<usize> = anchors.iter().filter_map(|a| g.vertex(a)).collect();
    let mut sources = Vec::new();
    let mut sinks = Vec::new();
    for c in cycles {
        let exits: Vec<usize> =
            c.vertices.iter().copied().filter(|&v| g.out_edges(v).iter().any(|e| !c.edges.contains(e))).collect();
        let entered = c.vertices.iter().any(|&v| g.in_edges(v).iter().any(|e| !c.edges.contains(e)));
        if !exits.is_empty() && entered {
            return Err(Gk3Error::MixedCycle(g.vertex_name(c.vertices[0]).to_string()));
        }
        let start = anchor_ids
            .iter()
            .copied()
            .find(|v| c.contains(*v))
            .or_else(|| if exits.len() == 1 { Some(exits[0]) } else { None })
            .unwrap_or(c.vertices[0]);
        let k = c.vertices.iter().position(|&v| v == start).expect("anchor lies on cycle");
        let mut indexed = IndexedCycle { vertices: c.vertices, edges: c.edges };
        indexed.vertices.rotate_left(k);
        indexed.edges.rotate_left(k);
        if exits.is_empty() {
            sinks.push(indexed);
        } else {
            sources.push(indexed);
        }
    }
    let mut places = vec![Place::Interior; g.vertex_count()];
    for (cycle, c) in sources.iter().enumerate() {
        for (index, &v) in c.vertices.iter().enumerate() {
            places[v] = Place::Source { cycle, index };
        }
    }
    for (cycle, c) in sinks.iter().enumerate() {
        for (index, &v) in c.vertices.iter().enumerate() {
            places[v] = Place::Sink { cycle, index };
        }
    }
    let mut trails = Vec::new();
    for (i, c) in sources.iter().enumerate() {
        for (a, &v) in c.vertices.iter().enumerate() {
            for &e in g.out_edges(v) {
                if c.edges.contains(&e) {
                    continue;
                }
                let mut path = vec![e];
                collect_trails(g, &places, i, a, &mut path, &mut trails);
            }
        }
    }
    Ok(PointedGK3 { graph: g.clone(), sources, sinks, trails, places })
}

fn collect_trails(g: &MultiGraph, places: &[Place], i: usize, a: usize, path: &mut Vec<usize>, out: &mut Vec<Trail>) {
    let head = g.edges()[*path.last().expect("nonempty path")].range;
    match places[head] {
        Place::Sink { cycle, index } => out.push(Trail { source: i, a, sink: cycle, b: index, edges: path.clone() }),
        Place::Source { .. } => unreachable!("source cycles have no entrances"),
        Place::Interior => {
            for &e in g.out_edges(head) {
                path.push(e);
                collect_trails(g, places, i, a, path, out);
                path.pop();
            }
        }
    }
}

/// For every vertex: the longest trail suffix starting there (`d`) and the
/// longest trail prefix ending there (`l`). Zero on cycle vertices.
fn all_distances(p: &PointedGK3) -> (Vec<usize>, Vec<usize>) {
    let g = &p.graph;
    let n = g.vertex_count();
    fn down(g: &MultiGraph, p: &PointedGK3, v: usize, memo: &mut [Option<usize>]) -> usize {
        if let Some(d) = memo[v] {
            return d;
        }
        let d = g
            .out_edges(v)
            .iter()
            .map(|&e| {
                let w = g.edges()[e].range;
                if p.is_interior(w) {
                    1 + down(g, p, w, memo)
                } else {
                    1
                }
            })
            .max()
            .unwrap_or(0);
        memo[v] = Some(d);
        d
    }
    fn up(g: &MultiGraph, p: &PointedGK3, v: usize, memo: &mut [Option<usize>]) -> usize {
        if let Some(l) = memo[v] {
            return l;
        }
        let l = g
            .in_edges(v)
            .iter()
            .map(|&e| {
                let w = g.edges()[e].source;
                if p.is_interior(w) {
                    1 + up(g, p, w, memo)
                } else {
                    1
                }
            })
            .max()
            .unwrap_or(0);
        memo[v] = Some(l);
        l
    }
    let mut dm = vec![None; n];
    let mut lm = vec![None; n];
    let mut d = vec![0; n];
    let mut l = vec![0; n];
    for v in (0..n).filter(|&v| p.is_interior(v)) {
        d[v] = down(g, p, v, &mut dm);
        l[v] = up(g, p, v, &mut lm);
    }
    (d, l)
}

/// `(d(v), l(v))` for an interior vertex `v`.
pub fn trail_distances(p: &PointedGK3, v: &str) -> Result<(usize, usize), Gk3Error> {
    let x = p.graph.vertex(v).filter(|&x| p.is_interior(x)).ok_or_else(|| Gk3Error::NotInterior(v.to_string()))?;
    let (d, l) = all_distances(p);
    Ok((d[x], l[x]))
}

pub fn trail_class(p: &PointedGK3, trail: usize) -> TrailClass {
    let t = &p.trails[trail];
    let modulus = p.p(t.source).gcd(&p.q(t.sink));
    let f = (t.b as i64 - (t.a + t.len()) as i64).rem_euclid(modulus as i64) as usize;
    TrailClass { source: t.source, sink: t.sink, f, modulus }
}

pub fn is_normal_form(g: &MultiGraph) -> bool {
    pointed_structure(g).is_ok_and(|p| p.is_normal_form())
}

fn edge_ids(g: &MultiGraph, edges: &[usize]) -> Vec<String> {
    let mut ids: Vec<String> = edges.iter().map(|&e| g.edges()[e].id.clone()).collect();
    ids.sort();
    ids
}

/// Splits `edge` off its (source-cycle) source vertex so the trail it starts
/// begins one step earlier on the cycle. Returns the new first edge.
fn move_trail_start_back(cur: &mut MultiGraph, trace: &mut MoveTrace, edge: &str) -> Result<String, Gk3Error> {
    let e = cur.edge(edge).expect("tracked edge exists");
    let x = cur.edges()[e].source;
    let rest: Vec<usize> = cur.out_edges(x).iter().copied().filter(|&f| f != e).collect();
    let incoming = cur.in_edges(x);
    assert_eq!(incoming.len(), 1, "source-cycle vertex has a single entrance");
    let c = cur.edges()[incoming[0]].id.clone();
    let pivot = cur.vertex_name(x).to_string();
    let (h, mv) = out_split(cur, &pivot, &[edge_ids(cur, &rest), vec![edge.to_string()]])?;
    let first = mv.renaming.edge(&c)[1].to_string();
    trace.push(mv);
    *cur = h;
    Ok(first)
}

/// Merges the last interior vertex of a trail into the sink-cycle
/// predecessor of its range. Returns the new last edge.
fn shorten_trail_end(
    cur: &mut MultiGraph,
    trace: &mut MoveTrace,
    last_edge: &str,
    sink_names: &[String],
) -> Result<String, Gk3Error> {
    let e = cur.edge(last_edge).expect("tracked edge exists");
    let y = cur.edges()[e].source;
    let z = cur.vertex_name(cur.edges()[e].range);
    let k = sink_names.iter().position(|s| s == z).expect("trail ends on the sink cycle");
    let pred = sink_names[(k + sink_names.len() - 1) % sink_names.len()].clone();
    let into_y = cur.in_edges(y);
    assert_eq!(into_y.len(), 1, "interior vertex of an isolated trail");
    let new_last = cur.edges()[into_y[0]].id.clone();
    let group = vec![pred, cur.vertex_name(y).to_string()];
    let (h, mv) = in_amalgamate(cur, &group)?;
    trace.push(mv);
    *cur = h;
    Ok(new_last)
}

/// Reduces a GK3 graph to normal form, recording every move.
pub fn to_normal_form(g: &MultiGraph) -> Result<(MultiGraph, MoveTrace), Gk3Error> {
    let mut cur = g.clone();
    let mut trace = MoveTrace::new();
    pointed_structure(&cur)?;

    // out-split interior vertices emitting several edges, nearest the sinks first
    loop {
        let p = pointed_structure(&cur)?;
        let (d, _) = all_distances(&p);
        let pick = (0..cur.vertex_count())
            .filter(|&v| p.is_interior(v) && cur.out_edges(v).len() > 1)
            .min_by(|&x, &y| (d[x], cur.vertex_name(x)).cmp(&(d[y], cur.vertex_name(y))));
        let Some(v) = pick else { break };
        let classes: Vec<Vec<String>> = edge_ids(&cur, cur.out_edges(v)).into_iter().map(|e| vec![e]).collect();
        let pivot = cur.vertex_name(v).to_string();
        let (h, mv) = out_split(&cur, &pivot, &classes)?;
        trace.push(mv);
        cur = h;
    }
    // in-split interior vertices receiving several edges, nearest the sources first
    loop {
        let p = pointed_structure(&cur)?;
        let (_, l) = all_distances(&p);
        let pick = (0..cur.vertex_count())
            .filter(|&v| p.is_interior(v) && cur.in_edges(v).len() > 1)
            .min_by(|&x, &y| (l[x], cur.vertex_name(x)).cmp(&(l[y], cur.vertex_name(y))));
        let Some(v) = pick else { break };
        let classes: Vec<Vec<String>> = edge_ids(&cur, cur.in_edges(v)).into_iter().map(|e| vec![e]).collect();
        let pivot = cur.vertex_name(v).to_string();
        let (h, mv) = crate::moves::in_split(&cur, &pivot, &classes)?;
        trace.push(mv);
        cur = h;
    }
    // gather the trail starts of each source cycle at one vertex
    let p = pointed_structure(&cur)?;
    let mut targets = Vec::new();
    for (i, c) in p.sources.iter().enumerate() {
        let starts: Vec<usize> = p.trails.iter().filter(|t| t.source == i).map(|t| t.a).collect();
        let cost = |t: usize| starts.iter().map(|&a| (a + c.len() - t) % c.len()).sum::<usize>();
        let best = (0..c.len())
            .min_by(|&x, &y| (cost(x), cur.vertex_name(c.vertices[x])).cmp(&(cost(y), cur.vertex_name(c.vertices[y]))))
            .expect("cycle is nonempty");
        targets.push(cur.vertex_name(c.vertices[best]).to_string());
    }
    for target in &targets {
        loop {
            let p = pointed_structure_anchored(&cur, std::slice::from_ref(target))?;
            let t = cur.vertex(target).expect("target vertices are never split");
            let Place::Source { cycle, .. } = p.place(t) else { unreachable!("target lies on a source cycle") };
            let c = &p.sources[cycle];
            let stray = c
                .vertices
                .iter()
                .filter(|&&v| v != t)
                .flat_map(|&v| cur.out_edges(v).iter().copied().filter(|e| !c.edges.contains(e)))
                .min_by(|&x, &y| cur.edges()[x].id.cmp(&cur.edges()[y].id));
            let Some(e) = stray else { break };
            let id = cur.edges()[e].id.clone();
            move_trail_start_back(&mut cur, &mut trace, &id)?;
        }
    }
    // shorten every trail to a single edge at the cost of moving its range back
    loop {
        let p = pointed_structure(&cur)?;
        let Some(t) = p.trails.iter().find(|t| t.len() > 1) else { break };
        let sink_names: Vec<String> =
            p.sinks[t.sink].vertices.iter().map(|&v| cur.vertex_name(v).to_string()).collect();
        let last = cur.edges()[*t.edges.last().expect("trail has edges")].id.clone();
        shorten_trail_end(&mut cur, &mut trace, &last, &sink_names)?;
    }
    Ok((cur, trace))
}

/// Positive `(pt, qt)` with `pt*p - qt*q = gcd(p, q)`, `pt` minimal.
pub fn bezout_positive(p: usize, q: usize) -> (usize, usize) {
    let d = p.gcd(&q);
    let mut pt = (1..=q / d).find(|&k| (k * p) % q == d % q).expect("p/d is invertible modulo q/d");
    let mut qt = (pt * p - d) / q;
    if qt == 0 {
        pt += q / d;
        qt += p / d;
    }
    (pt, qt)
}

/// Moves the range of trail `trail` of `p` back by `gcd(p_i, q_j)` along its
/// sink cycle, keeping its length and source. The trail must not share
/// interior vertices with other trails.
pub fn shift_trail(p: &PointedGK3, trail: usize) -> Result<(MultiGraph, MoveTrace), Gk3Error> {
    let t = p.trails.get(trail).ok_or(Gk3Error::UnknownTrail(trail))?;
    let g = &p.graph;
    for &e in &t.edges[1..] {
        let y = g.edges()[e].source;
        if g.in_edges(y).len() != 1 || g.out_edges(y).len() != 1 {
            return Err(Gk3Error::TrailNotIsolated(trail));
        }
    }
    let (pl, ql) = (p.p(t.source), p.q(t.sink));
    let d = pl.gcd(&ql);
    let (pt, qt) = bezout_positive(pl, ql);
    let sink_names: Vec<String> = p.sinks[t.sink].vertices.iter().map(|&v| g.vertex_name(v).to_string()).collect();

    let mut cur = g.clone();
    let mut trace = MoveTrace::new();
    let mut first = g.edges()[t.edges[0]].id.clone();
    let mut last = g.edges()[*t.edges.last().expect("trail has edges")].id.clone();
    for _ in 0..pt * pl {
        first = move_trail_start_back(&mut cur, &mut trace, &first)?;
    }
    for _ in 0..qt * ql + d {
        last = shorten_trail_end(&mut cur, &mut trace, &last, &sink_names)?;
    }
    Ok((cur, trace))
}

/// [`shift_trail`] on the default pointed structure of `g`.
pub fn shift_trail_range(g: &MultiGraph, trail: usize) -> Result<(MultiGraph, MoveTrace), Gk3Error> {
    shift_trail(&pointed_structure(g)?, trail)
}

/// Moves every trail of source cycle `i` of a normal-form graph one step
/// back along the cycle, then restores length one; all ranges move back by
/// one. The new common trail source is the cycle predecessor.
pub fn rotate_source(p: &PointedGK3, i: usize) -> Result<(MultiGraph, MoveTrace), Gk3Error> {
    if !p.is_normal_form() {
        return Err(Gk3Error::NotNormalForm);
    }
    let g = &p.graph;
    let mut cur = g.clone();
    let mut trace = MoveTrace::new();
    let ids: Vec<(String, Vec<String>)> = p
        .trails
        .iter()
        .filter(|t| t.source == i)
        .map(|t| {
            let names = p.sinks[t.sink].vertices.iter().map(|&v| g.vertex_name(v).to_string()).collect();
            (g.edges()[t.edges[0]].id.clone(), names)
        })
        .collect();
    for (edge, sink_names) in ids {
        move_trail_start_back(&mut cur, &mut trace, &edge)?;
        shorten_trail_end(&mut cur, &mut trace, &edge, &sink_names)?;
    }
    Ok((cur, trace))
}

/// Trail multiset `(source, a, sink, b, length)` under the given anchors.
pub fn trail_signature(p: &PointedGK3) -> Vec<(usize, usize, usize, usize, usize)> {
    let mut sig: Vec<_> = p.trails.iter().map(|t| (t.source, t.a, t.sink, t.b, t.len())).collect();
    sig.sort_unstable();
    sig
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moves::apply_trace;

    fn graph(vertices: &[&str], pairs: &[(&str, &str)]) -> MultiGraph {
        MultiGraph::from_pairs(vertices, pairs).unwrap()
    }

    fn m1() -> MultiGraph {
        graph(&["u", "w"], &[("u", "u"), ("u", "w"), ("w", "w")])
    }

    #[test]
    fn structure_of_small_graphs() {
        let p = pointed_structure(&m1()).unwrap();
        assert_eq!((p.sources.len(), p.sinks.len(), p.trails.len()), (1, 1, 1));
        assert_eq!((p.trails[0].a, p.trails[0].b, p.trails[0].len()), (0, 0, 1));

        let g =
            graph(&["v0", "v1", "w0", "w1"], &[("v0", "v1"), ("v1", "v0"), ("w0", "w1"), ("w1", "w0"), ("v0", "w0")]);
        let p = pointed_structure(&g).unwrap();
        assert_eq!((p.p(0), p.q(0), p.trails.len()), (2, 2, 1));

        let g = graph(&["u", "w", "x"], &[("u", "u"), ("u", "x"), ("x", "w"), ("w", "w")]);
        let p = pointed_structure(&g).unwrap();
        assert_eq!(p.trails[0].len(), 2);
        assert!(p.is_interior(2));
        assert_eq!(pointed_structure(&graph(&["u"], &[("u", "u")])).unwrap_err(), Gk3Error::NotGK3);
    }

    #[test]
    fn distances_along_a_chain() {
        let g = graph(&["u", "w", "x", "y"], &[("u", "u"), ("u", "x"), ("x", "y"), ("y", "w"), ("w", "w")]);
        let p = pointed_structure(&g).unwrap();
        assert_eq!(trail_distances(&p, "x").unwrap(), (2, 1));
        assert_eq!(trail_distances(&p, "y").unwrap(), (1, 2));
        assert_eq!(trail_distances(&p, "u").unwrap_err(), Gk3Error::NotInterior("u".into()));
    }

    #[test]
    fn classes() {
        assert_eq!(trail_class(&pointed_structure(&m1()).unwrap(), 0).f, 0);
        let two = |b: &str| {
            graph(&["v0", "v1", "w0", "w1"], &[("v0", "v1"), ("v1", "v0"), ("w0", "w1"), ("w1", "w0"), ("v0", b)])
        };
        let p = pointed_structure(&two("w1")).unwrap();
        assert_eq!((p.trails[0].a, p.trails[0].b), (0, 1));
        assert_eq!(trail_class(&p, 0), TrailClass { source: 0, sink: 0, f: 0, modulus: 2 });
        assert_eq!(trail_class(&pointed_structure(&two("w0")).unwrap(), 0).f, 1);
    }

    #[test]
    fn normal_form_of_small_graphs() {
        let (h, trace) = to_normal_form(&m1()).unwrap();
        assert_eq!(h, m1());
        assert!(trace.is_empty());
        assert!(is_normal_form(&m1()));

        // length-2 trail into a 3-cycle at index 1
        let g = graph(
            &["u", "w0", "w1", "w2", "x"],
            &[("u", "u"), ("u", "x"), ("x", "w1"), ("w0", "w1"), ("w1", "w2"), ("w2", "w0")],
        );
        assert!(!is_normal_form(&g));
        let (h, trace) = to_normal_form(&g).unwrap();
        assert!(is_normal_form(&h));
        assert_eq!(apply_trace(&g, &trace).unwrap(), h);
        let p = pointed_structure(&h).unwrap();
        assert_eq!((p.trails[0].len(), p.trails[0].b), (1, 0));

        // two trails leaving a 2-cycle at different vertices
        let g = graph(&["v0", "v1", "w"], &[("v0", "v1"), ("v1", "v0"), ("v0", "w"), ("v1", "w"), ("w", "w")]);
        assert!(!is_normal_form(&g));
        let (h, _) = to_normal_form(&g).unwrap();
        let p = pointed_structure(&h).unwrap();
        assert!(p.is_normal_form());
        assert_eq!(p.trails.iter().map(|t| t.a).collect::<BTreeSet<_>>().len(), 1);
    }

    #[test]
    fn bezout_pairs() {
        assert_eq!(bezout_positive(1, 1), (2, 1));
        assert_eq!(bezout_positive(2, 3), (2, 1));
        for p in 1..=6usize {
            for q in 1..=6usize {
                let (pt, qt) = bezout_positive(p, q);
                assert!(pt > 0 && qt > 0);
                assert_eq!(pt * p - qt * q, p.gcd(&q));
            }
        }
    }

    #[test]
    fn shift_on_m1_is_trivial() {
        let (h, trace) = shift_trail_range(&m1(), 0).unwrap();
        assert!(!trace.is_empty());
        assert_eq!(h.adjacency_matrix(), m1().adjacency_matrix());
        assert_eq!(apply_trace(&m1(), &trace).unwrap(), h);
    }

    #[test]
    fn shift_two_into_three() {
        let g = graph(
            &["v0", "v1", "w0", "w1", "w2"],
            &[("v0", "v1"), ("v1", "v0"), ("w0", "w1"), ("w1", "w2"), ("w2", "w0"), ("v0", "w0")],
        );
        let p = pointed_structure(&g).unwrap();
        let (h, trace) = shift_trail(&p, 0).unwrap();
        let anchors = vec![trace.track_vertex("v0"), "w0".to_string()];
        let q = pointed_structure_anchored(&h, &anchors).unwrap();
        assert_eq!(trail_signature(&q), vec![(0, 0, 0, 2, 1)]);
    }
}
