//! Williams' graph moves: in/out-splittings and their amalgamation inverses.
//!
//! Every move records the renaming it performed so that traces replay
//! bit-for-bit. Split vertices are named `pivot#k` (class `k`), duplicated
//! edges `edge#j` (copy for new vertex `j`); a split into a single class
//! renames nothing. Amalgamations keep the name of the first group member.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, MultiGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("partition class {0} is empty")]
    EmptyClass(usize),
    #[error("classes do not partition the fiber: {0}")]
    NotAPartition(String),
    #[error("vertex `{0}` receives no edges")]
    NoIncomingEdges(String),
    #[error("vertex `{0}` emits no edges")]
    NoOutgoingEdges(String),
    #[error("invalid amalgamation: {0}")]
    InvalidAmalgamation(String),
    #[error("recorded renaming does not match the recomputed one")]
    RenamingMismatch,
    #[error("move {index}: {source}")]
    AtMove {
        index: usize,
        #[source]
        source: Box<MoveError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    InSplit,
    OutSplit,
    InAmalg,
    OutAmalg,
}

/// Old identifier to its replacement(s). Identifiers absent from the map keep
/// their name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Renaming {
    pub vertices: BTreeMap<String, Vec<String>>,
    pub edges: BTreeMap<String, Vec<String>>,
}

impl Renaming {
    /// Names that `vertex` became; the first entry is class 0 for splits.
    pub fn vertex<'a>(&'a self, vertex: &'a str) -> Vec<&'a str> {
        match self.vertices.get(vertex) {
            Some(names) => names.iter().map(String::as_str).collect(),
            None => vec![vertex],
        }
    }

    pub fn edge<'a>(&'a self, edge: &'a str) -> Vec<&'a str> {
        match self.edges.get(edge) {
            Some(names) => names.iter().map(String::as_str).collect(),
            None => vec![edge],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<String>>,
    pub renaming: Renaming,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MoveTrace {
    pub moves: Vec<Move>,
}

impl MoveTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn push(&mut self, mv: Move) {
        self.moves.push(mv);
    }

    pub fn extend(&mut self, other: MoveTrace) {
        self.moves.extend(other.moves);
    }

    /// Follows a vertex through every recorded renaming, taking class 0
    /// whenever the vertex was split.
    pub fn track_vertex(&self, start: &str) -> String {
        let mut name = start.to_string();
        for mv in &self.moves {
            if let Some(next) = mv.renaming.vertices.get(&name) {
                name = next[0].clone();
            }
        }
        name
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn fresh(taken: &mut HashSet<String>, base: &str, k: usize) -> String {
    let mut name = format!("{base}#{k}");
    let mut n = 1;
    while taken.contains(&name) {
        name = format!("{base}#{k}.{n}");
        n += 1;
    }
    taken.insert(name.clone());
    name
}

fn split_in(g: &MultiGraph, pivot: &str, classes: &[Vec<String>]) -> Result<(MultiGraph, Renaming), MoveError> {
    let v = g.vertex(pivot).ok_or_else(|| MoveError::UnknownVertex(pivot.to_string()))?;
    let fiber: BTreeSet<&str> = g.in_edges(v).iter().map(|&e| g.edges()[e].id.as_str()).collect();
    if fiber.is_empty() {
        return Err(MoveError::NoIncomingEdges(pivot.to_string()));
    }
    if classes.is_empty() {
        return Err(MoveError::NotAPartition("no classes given".into()));
    }
    let mut class_of: HashMap<&str, usize> = HashMap::new();
    for (k, class) in classes.iter().enumerate() {
        if class.is_empty() {
            return Err(MoveError::EmptyClass(k));
        }
        for id in class {
            if !fiber.contains(id.as_str()) {
                return Err(MoveError::NotAPartition(format!("edge `{id}` does not end at `{pivot}`")));
            }
            if class_of.insert(id.as_str(), k).is_some() {
                return Err(MoveError::NotAPartition(format!("edge `{id}` appears twice")));
            }
        }
    }
    if class_of.len() != fiber.len() {
        return Err(MoveError::NotAPartition("classes do not cover the fiber".into()));
    }

    let m = classes.len();
    let mut renaming = Renaming::default();
    let mut taken: HashSet<String> = g.vertices().iter().cloned().collect();
    let new_names: Vec<String> =
        if m == 1 { vec![pivot.to_string()] } else { (0..m).map(|k| fresh(&mut taken, pivot, k)).collect() };
    if m > 1 {
        renaming.vertices.insert(pivot.to_string(), new_names.clone());
    }

    let mut vertices = Vec::with_capacity(g.vertex_count() + m - 1);
    for (u, name) in g.vertices().iter().enumerate() {
        if u == v {
            vertices.extend(new_names.iter().cloned());
        } else {
            vertices.push(name.clone());
        }
    }
    let shift = |u: usize| if u > v { u + m - 1 } else { u };

    let mut edge_taken: HashSet<String> = g.edges().iter().map(|e| e.id.clone()).collect();
    let mut edges = Vec::with_capacity(g.edge_count());
    for e in g.edges() {
        let range = if e.range == v { v + class_of[e.id.as_str()] } else { shift(e.range) };
        if e.source == v && m > 1 {
            let copies: Vec<String> = (0..m).map(|j| fresh(&mut edge_taken, &e.id, j)).collect();
            for (j, id) in copies.iter().enumerate() {
                edges.push(Edge { id: id.clone(), source: v + j, range });
            }
            renaming.edges.insert(e.id.clone(), copies);
        } else {
            edges.push(Edge { id: e.id.clone(), source: shift(e.source), range });
        }
    }
    let h = MultiGraph::from_parts(vertices, edges).expect("split of a valid graph is valid");
    Ok((h, renaming))
}

fn amalg_in(g: &MultiGraph, group: &[String]) -> Result<(MultiGraph, Renaming), MoveError> {
    if group.len() < 2 {
        return Err(MoveError::InvalidAmalgamation("a group needs at least two vertices".into()));
    }
    let members: Vec<usize> = group
        .iter()
        .map(|name| g.vertex(name).ok_or_else(|| MoveError::UnknownVertex(name.clone())))
        .collect::<Result<_, _>>()?;
    if members.iter().collect::<HashSet<_>>().len() != members.len() {
        return Err(MoveError::InvalidAmalgamation("repeated vertex in group".into()));
    }
    let head = members[0];
    let ranges = |u: usize| g.out_edges(u).iter().map(|&e| g.edges()[e].range).sorted().collect::<Vec<_>>();
    let head_ranges = ranges(head);
    if members.iter().any(|&u| ranges(u) != head_ranges) {
        return Err(MoveError::InvalidAmalgamation("group members emit edges to different vertices".into()));
    }

    let member_set: HashSet<usize> = members.iter().copied().collect();
    let mut new_index = vec![0usize; g.vertex_count()];
    let mut vertices = Vec::new();
    for (u, name) in g.vertices().iter().enumerate() {
        if member_set.contains(&u) && u != head {
            continue;
        }
        new_index[u] = vertices.len();
        vertices.push(name.clone());
    }
    for &u in &members {
        new_index[u] = new_index[head];
    }

    let mut renaming = Renaming::default();
    let head_name = g.vertex_name(head).to_string();
    for &u in &members[1..] {
        renaming.vertices.insert(g.vertex_name(u).to_string(), vec![head_name.clone()]);
    }
    // each dropped edge is identified with a head edge of the same range
    for &u in &members[1..] {
        let mut pool: Vec<usize> = g.out_edges(head).to_vec();
        for &f in g.out_edges(u) {
            let pos =
                pool.iter().position(|&e| g.edges()[e].range == g.edges()[f].range).expect("range multisets agree");
            let e = pool.remove(pos);
            renaming.edges.insert(g.edges()[f].id.clone(), vec![g.edges()[e].id.clone()]);
        }
    }
    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .filter(|e| !(member_set.contains(&e.source) && e.source != head))
        .map(|e| Edge { id: e.id.clone(), source: new_index[e.source], range: new_index[e.range] })
        .collect();
    let merged = MultiGraph::from_parts(vertices, edges).expect("amalgamation of a valid graph is valid");

    // round trip: re-split with the induced partition and compare
    let mut classes: Vec<Vec<String>> = Vec::with_capacity(members.len());
    let mut seen: HashSet<String> = HashSet::new();
    for &u in &members {
        let mut class: Vec<String> =
            g.in_edges(u).iter().map(|&e| renaming.edge(&g.edges()[e].id)[0].to_string()).unique().collect();
        class.sort();
        for id in &class {
            if !seen.insert(id.clone()) {
                return Err(MoveError::InvalidAmalgamation("induced partition is not disjoint".into()));
            }
        }
        classes.push(class);
    }
    let (resplit, split_names) = split_in(&merged, &head_name, &classes)
        .map_err(|e| MoveError::InvalidAmalgamation(format!("re-split failed: {e}")))?;
    let split_vertex_names = split_names.vertex(&head_name);
    let vmap: Option<Vec<usize>> = (0..g.vertex_count())
        .map(|u| match members.iter().position(|&w| w == u) {
            Some(a) => resplit.vertex(split_vertex_names[a]),
            None => resplit.vertex(g.vertex_name(u)),
        })
        .collect();
    match vmap {
        Some(vmap) if g.is_isomorphism(&resplit, &vmap) => Ok((merged, renaming)),
        _ => Err(MoveError::InvalidAmalgamation("re-splitting does not reproduce the graph".into())),
    }
}

/// In-splitting at `pivot`: the incoming edges are distributed over the new
/// vertices according to `classes`, outgoing edges are copied to each.
pub fn in_split(g: &MultiGraph, pivot: &str, classes: &[Vec<String>]) -> Result<(MultiGraph, Move), MoveError> {
    let (h, renaming) = split_in(g, pivot, classes)?;
    Ok((h, split_move(MoveKind::InSplit, pivot, classes, renaming)))
}

/// Out-splitting, computed as the in-splitting of the transpose.
pub fn out_split(g: &MultiGraph, pivot: &str, classes: &[Vec<String>]) -> Result<(MultiGraph, Move), MoveError> {
    let (h, renaming) = split_in(&g.transpose(), pivot, classes).map_err(|e| match e {
        MoveError::NoIncomingEdges(v) => MoveError::NoOutgoingEdges(v),
        other => other,
    })?;
    Ok((h.transpose(), split_move(MoveKind::OutSplit, pivot, classes, renaming)))
}

pub fn in_amalgamate(g: &MultiGraph, group: &[String]) -> Result<(MultiGraph, Move), MoveError> {
    let (h, renaming) = amalg_in(g, group)?;
    Ok((h, amalg_move(MoveKind::InAmalg, group, renaming)))
}

pub fn out_amalgamate(g: &MultiGraph, group: &[String]) -> Result<(MultiGraph, Move), MoveError> {
    let (h, renaming) = amalg_in(&g.transpose(), group)?;
    Ok((h.transpose(), amalg_move(MoveKind::OutAmalg, group, renaming)))
}

fn split_move(kind: MoveKind, pivot: &str, classes: &[Vec<String>], renaming: Renaming) -> Move {
    Move { kind, pivot: Some(pivot.to_string()), classes: Some(classes.to_vec()), group: None, renaming }
}

fn amalg_move(kind: MoveKind, group: &[String], renaming: Renaming) -> Move {
    Move { kind, pivot: None, classes: None, group: Some(group.to_vec()), renaming }
}

/// Applies a recorded move, checking that it renames exactly as recorded.
pub fn apply_move(g: &MultiGraph, mv: &Move) -> Result<MultiGraph, MoveError> {
    let missing = || MoveError::NotAPartition("move record is missing its specification".into());
    let (h, redone) = match mv.kind {
        MoveKind::InSplit | MoveKind::OutSplit => {
            let pivot = mv.pivot.as_deref().ok_or_else(missing)?;
            let classes = mv.classes.as_deref().ok_or_else(missing)?;
            if mv.kind == MoveKind::InSplit {
                in_split(g, pivot, classes)?
            } else {
                out_split(g, pivot, classes)?
            }
        }
        MoveKind::InAmalg => in_amalgamate(g, mv.group.as_deref().ok_or_else(missing)?)?,
        MoveKind::OutAmalg => out_amalgamate(g, mv.group.as_deref().ok_or_else(missing)?)?,
    };
    if redone.renaming != mv.renaming {
        return Err(MoveError::RenamingMismatch);
    }
    Ok(h)
}

pub fn apply_trace(g: &MultiGraph, trace: &MoveTrace) -> Result<MultiGraph, MoveError> {
    let mut current = g.clone();
    for (index, mv) in trace.moves.iter().enumerate() {
        current = apply_move(&current, mv).map_err(|e| MoveError::AtMove { index, source: Box::new(e) })?;
    }
    Ok(current)
}

/// Set partitions of `items` into at most `max_blocks` blocks, blocks ordered
/// by their first element.
pub fn set_partitions<T: Clone>(items: &[T], max_blocks: usize) -> Vec<Vec<Vec<T>>> {
    fn go<T: Clone>(items: &[T], k: usize, max_blocks: usize, blocks: &mut Vec<Vec<T>>, out: &mut Vec<Vec<Vec<T>>>) {
        if k == items.len() {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(items[k].clone());
            go(items, k + 1, max_blocks, blocks, out);
            blocks[b].pop();
        }
        if blocks.len() < max_blocks {
            blocks.push(vec![items[k].clone()]);
            go(items, k + 1, max_blocks, blocks, out);
            blocks.pop();
        }
    }
    let mut out = Vec::new();
    if max_blocks > 0 || items.is_empty() {
        go(items, 0, max_blocks, &mut Vec::new(), &mut out);
    }
    out
}

/// Every split over fiber partitions with at most `max_classes` classes and
/// every valid amalgamation of at most `max_classes` vertices, together with
/// the resulting graph.
pub fn legal_moves(g: &MultiGraph, max_classes: usize) -> std::vec::IntoIter<(Move, MultiGraph)> {
    let mut out = Vec::new();
    for v in 0..g.vertex_count() {
        let pivot = g.vertex_name(v);
        let fiber = |edges: &[usize]| edges.iter().map(|&e| g.edges()[e].id.clone()).sorted().collect::<Vec<_>>();
        for classes in set_partitions(&fiber(g.in_edges(v)), max_classes) {
            if let Ok((h, mv)) = in_split(g, pivot, &classes) {
                out.push((mv, h));
            }
        }
        for classes in set_partitions(&fiber(g.out_edges(v)), max_classes) {
            if let Ok((h, mv)) = out_split(g, pivot, &classes) {
                out.push((mv, h));
            }
        }
    }
    for size in 2..=max_classes.min(g.vertex_count()) {
        for combo in (0..g.vertex_count()).combinations(size) {
            let group: Vec<String> = combo.iter().map(|&u| g.vertex_name(u).to_string()).collect();
            if let Ok((h, mv)) = in_amalgamate(g, &group) {
                out.push((mv, h));
            }
            if let Ok((h, mv)) = out_amalgamate(g, &group) {
                out.push((mv, h));
            }
        }
    }
    out.into_iter()
}
