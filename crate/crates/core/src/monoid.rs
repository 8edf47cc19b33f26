//! The talented monoid `T_E`: formal sums of shifted vertices `v(i)` modulo
//! `v(i) = Σ_{s(e)=v} r(e)(i+1)`.
//!
//! Elements are compared by flowing every unit to a common level. For
//! normal-form GK3 graphs the adjacency matrix is invertible, so flowing is
//! injective and the comparison is exact.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gk3::PointedGK3;
use crate::graph::MultiGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonoidError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex `{0}` emits no edges and cannot flow")]
    SinkVertex(String),
    #[error("{0}({1}) is not in the support")]
    KeyAbsent(String, i64),
    #[error("graph is not essential")]
    NotEssential,
    #[error("level {level} is below the largest shift {max_shift}")]
    LevelTooLow { level: i64, max_shift: i64 },
    #[error("graph is not in normal form")]
    NotNormalForm,
    #[error("malformed element: {0}")]
    Parse(String),
    #[error("coefficient overflow")]
    Overflow,
}

/// Finitely supported map `(vertex, shift) -> coefficient`, zero entries omitted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonoidElement {
    terms: BTreeMap<(String, i64), u128>,
}

impl MonoidElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn generator(g: &MultiGraph, v: &str, shift: i64) -> Result<Self, MonoidError> {
        if !g.has_vertex(v) {
            return Err(MonoidError::UnknownVertex(v.to_string()));
        }
        Ok(Self::unit(v, shift))
    }

    fn unit(v: &str, shift: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((v.to_string(), shift), 1);
        Self { terms }
    }

    pub fn terms(&self) -> &BTreeMap<(String, i64), u128> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, v: &str, shift: i64, coeff: u128) -> Result<(), MonoidError> {
        if coeff == 0 {
            return Ok(());
        }
        let slot = self.terms.entry((v.to_string(), shift)).or_insert(0);
        *slot = slot.checked_add(coeff).ok_or(MonoidError::Overflow)?;
        Ok(())
    }

    pub fn add(&self, other: &MonoidElement) -> Result<MonoidElement, MonoidError> {
        let mut sum = self.clone();
        for ((v, i), &c) in &other.terms {
            sum.add_term(v, *i, c)?;
        }
        Ok(sum)
    }

    /// The action of `n ∈ Z`: every shift moves by `n`.
    pub fn shift(&self, n: i64) -> MonoidElement {
        Self { terms: self.terms.iter().map(|((v, i), &c)| ((v.clone(), i + n), c)).collect() }
    }

    pub fn max_shift(&self) -> Option<i64> {
        self.terms.keys().map(|(_, i)| *i).max()
    }

    pub fn min_shift(&self) -> Option<i64> {
        self.terms.keys().map(|(_, i)| *i).min()
    }

    /// Parses `u(0) + 2*w(-1)`; `0` is the empty sum. Vertex names are
    /// checked against `g`.
    pub fn parse(g: &MultiGraph, text: &str) -> Result<Self, MonoidError> {
        let mut x = Self::zero();
        let text = text.trim();
        if text == "0" {
            return Ok(x);
        }
        for raw in text.split('+') {
            let term = raw.trim();
            let bad = || MonoidError::Parse(format!("cannot read term `{term}`"));
            let (coeff, gen) = match term.split_once('*') {
                Some((c, rest)) => (c.trim().parse::<u128>().map_err(|_| bad())?, rest.trim()),
                None => (1, term),
            };
            let open = gen.rfind('(').ok_or_else(bad)?;
            let inner = gen[open + 1..].strip_suffix(')').ok_or_else(bad)?;
            let shift: i64 = inner.trim().parse().map_err(|_| bad())?;
            let name = gen[..open].trim();
            if !g.has_vertex(name) {
                return Err(MonoidError::UnknownVertex(name.to_string()));
            }
            x.add_term(name, shift, coeff)?;
        }
        Ok(x)
    }
}

impl fmt::Display for MonoidElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((v, i), &c)| if c == 1 { format!("{v}({i})") } else { format!("{c}*{v}({i})") })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Counts per vertex (in declared order) of an element whose whole support
/// sits at shift `level`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelVector {
    pub level: i64,
    pub counts: Vec<u128>,
}

/// One unit of `v(i)` flows to `Σ r(e)(i+1)` over the edges leaving `v`.
pub fn flow_once(g: &MultiGraph, x: &MonoidElement, v: &str, i: i64) -> Result<MonoidElement, MonoidError> {
    let vi = g.vertex(v).ok_or_else(|| MonoidError::UnknownVertex(v.to_string()))?;
    if g.out_edges(vi).is_empty() {
        return Err(MonoidError::SinkVertex(v.to_string()));
    }
    let key = (v.to_string(), i);
    let mut y = x.clone();
    match y.terms.get_mut(&key) {
        None => return Err(MonoidError::KeyAbsent(v.to_string(), i)),
        Some(1) => {
            y.terms.remove(&key);
        }
        Some(c) => *c -= 1,
    }
    for &e in g.out_edges(vi) {
        y.add_term(g.vertex_name(g.edges()[e].range), i + 1, 1)?;
    }
    Ok(y)
}

/// Applies one flow step to every unit of a level vector.
pub fn advance(g: &MultiGraph, lv: &LevelVector) -> Result<LevelVector, MonoidError> {
    let mut next = vec![0u128; g.vertex_count()];
    for e in g.edges() {
        let c = lv.counts[e.source];
        if c > 0 {
            next[e.range] = next[e.range].checked_add(c).ok_or(MonoidError::Overflow)?;
        }
    }
    Ok(LevelVector { level: lv.level + 1, counts: next })
}

pub fn flow_to_level(g: &MultiGraph, x: &MonoidElement, level: i64) -> Result<LevelVector, MonoidError> {
    if !g.is_essential() {
        return Err(MonoidError::NotEssential);
    }
    if let Some(max_shift) = x.max_shift().filter(|&m| m > level) {
        return Err(MonoidError::LevelTooLow { level, max_shift });
    }
    let start = x.min_shift().unwrap_or(level);
    let mut lv = LevelVector { level: start, counts: vec![0; g.vertex_count()] };
    let mut pending = x.terms.iter().sorted_by_key(|((_, i), _)| *i).peekable();
    loop {
        while let Some(((v, _), &c)) = pending.next_if(|((_, i), _)| *i == lv.level) {
            let vi = g.vertex(v).ok_or_else(|| MonoidError::UnknownVertex(v.clone()))?;
            lv.counts[vi] = lv.counts[vi].checked_add(c).ok_or(MonoidError::Overflow)?;
        }
        if lv.level == level {
            return Ok(lv);
        }
        lv = advance(g, &lv)?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equality {
    Equal {
        level: i64,
    },
    /// No common level up to the bound made the two elements agree. This is
    /// conclusive only when flowing is injective (normal-form GK3 graphs).
    NotEqualUpTo(i64),
}

/// Flows both elements to a common level and compares, raising the level
/// until `max_level`.
pub fn equal_elements(
    g: &MultiGraph,
    x: &MonoidElement,
    y: &MonoidElement,
    max_level: i64,
) -> Result<Equality, MonoidError> {
    let start = x.max_shift().into_iter().chain(y.max_shift()).max().unwrap_or(0);
    if start > max_level {
        return Ok(Equality::NotEqualUpTo(max_level));
    }
    let mut lx = flow_to_level(g, x, start)?;
    let mut ly = flow_to_level(g, y, start)?;
    loop {
        if lx.counts == ly.counts {
            return Ok(Equality::Equal { level: lx.level });
        }
        if lx.level >= max_level {
            return Ok(Equality::NotEqualUpTo(max_level));
        }
        lx = advance(g, &lx)?;
        ly = advance(g, &ly)?;
    }
}

/// `Σ_i Σ_k a[i][k]·v_i(c_i - k) + Σ_j Σ_k b[j][k]·w_j(k)`, where `v_i`, `w_j`
/// are the index-0 vertices of the source and sink cycles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalElement {
    pub anchors: Vec<i64>,
    pub source: Vec<Vec<u128>>,
    pub sink: Vec<Vec<u128>>,
}

impl CanonicalElement {
    pub fn expand(&self, p: &PointedGK3) -> MonoidElement {
        let mut x = MonoidElement::zero();
        for (i, coeffs) in self.source.iter().enumerate() {
            let v = p.graph.vertex_name(p.sources[i].vertices[0]);
            for (k, &a) in coeffs.iter().enumerate() {
                x.add_term(v, self.anchors[i] - k as i64, a).expect("coefficients came from a valid element");
            }
        }
        for (j, coeffs) in self.sink.iter().enumerate() {
            let w = p.graph.vertex_name(p.sinks[j].vertices[0]);
            for (k, &b) in coeffs.iter().enumerate() {
                x.add_term(w, k as i64, b).expect("coefficients came from a valid element");
            }
        }
        x
    }

    pub fn has_source_part(&self) -> bool {
        self.source.iter().flatten().any(|&a| a > 0)
    }

    pub fn sink_units(&self) -> u128 {
        self.sink.iter().flatten().sum()
    }
}

/// Reverses one flow step on a normal-form graph. Entries may go negative.
fn step_back(p: &PointedGK3, into_sink: &[Vec<usize>], v: &[i128]) -> Vec<i128> {
    let mut prev = vec![0i128; v.len()];
    for c in &p.sources {
        for k in 0..c.len() {
            prev[c.vertices[(k + c.len() - 1) % c.len()]] = v[c.vertices[k]];
        }
    }
    for c in &p.sinks {
        for k in 0..c.len() {
            let z = c.vertices[k];
            let inflow: i128 = into_sink[z].iter().map(|&s| prev[s]).sum();
            prev[c.vertices[(k + c.len() - 1) % c.len()]] = v[z] - inflow;
        }
    }
    prev
}

/// The unique presentation of `x`: the level is lowered as far as the level
/// vector stays nonnegative, and each source anchor `c_i` is the top shift
/// occupied at that level.
pub fn canonical_form(p: &PointedGK3, x: &MonoidElement) -> Result<CanonicalElement, MonoidError> {
    if !p.is_normal_form() {
        return Err(MonoidError::NotNormalForm);
    }
    let g = &p.graph;
    for (v, _) in x.terms.keys() {
        if !g.has_vertex(v) {
            return Err(MonoidError::UnknownVertex(v.clone()));
        }
    }
    // sources of the trail edges entering each sink vertex
    let mut into_sink = vec![Vec::new(); g.vertex_count()];
    for t in &p.trails {
        let e = &g.edges()[t.edges[0]];
        into_sink[e.range].push(e.source);
    }
    let mut level = x.max_shift().unwrap_or(0);
    let lv = flow_to_level(g, x, level)?;
    let mut v: Vec<i128> =
        lv.counts.iter().map(|&c| i128::try_from(c).map_err(|_| MonoidError::Overflow)).collect::<Result<_, _>>()?;
    let source_units: i128 = p.sources.iter().flat_map(|c| c.vertices.iter()).map(|&s| v[s]).sum();

    if source_units > 0 {
        let period = p.sources.iter().chain(&p.sinks).fold(1usize, |acc, c| acc.lcm(&c.len()));
        // whole periods at once: sink tracks lose a fixed amount per period
        let mut w = v.clone();
        for _ in 0..period {
            w = step_back(p, &into_sink, &w);
        }
        let blocks = p
            .sinks
            .iter()
            .flat_map(|c| c.vertices.iter())
            .filter(|&&z| v[z] > w[z])
            .map(|&z| v[z] / (v[z] - w[z]))
            .min()
            .expect("a nonzero source part drains into some sink");
        if blocks > 0 {
            for c in &p.sinks {
                for &z in &c.vertices {
                    v[z] -= blocks * (v[z] - w[z]);
                }
            }
            level -= i64::try_from(blocks * period as i128).map_err(|_| MonoidError::Overflow)?;
        }
        loop {
            let prev = step_back(p, &into_sink, &v);
            if prev.iter().any(|&c| c < 0) {
                break;
            }
            v = prev;
            level -= 1;
        }
    }

    let mut anchors = Vec::with_capacity(p.sources.len());
    let mut source = Vec::with_capacity(p.sources.len());
    for c in &p.sources {
        let len = c.len() as i64;
        let at: Vec<(i64, u128)> =
            c.vertices.iter().enumerate().map(|(k, &z)| (level + (len - k as i64) % len, v[z] as u128)).collect();
        let top = at.iter().filter(|(_, a)| *a > 0).map(|(s, _)| *s).max();
        let mut coeffs = vec![0u128; c.len()];
        if let Some(top) = top {
            for (s, a) in at.into_iter().filter(|&(_, a)| a > 0) {
                coeffs[(top - s) as usize] += a;
            }
        }
        anchors.push(top.unwrap_or(0));
        source.push(coeffs);
    }
    let sink = p
        .sinks
        .iter()
        .map(|c| {
            let len = c.len() as i64;
            let mut coeffs = vec![0u128; c.len()];
            for (k, &z) in c.vertices.iter().enumerate() {
                coeffs[(level - k as i64).rem_euclid(len) as usize] += v[z] as u128;
            }
            coeffs
        })
        .collect();
    Ok(CanonicalElement { anchors, source, sink })
}

/// Nonzero and not a sum of two nonzero elements.
pub fn is_atom(p: &PointedGK3, x: &MonoidElement) -> Result<bool, MonoidError> {
    let c = canonical_form(p, x)?;
    Ok(!c.has_source_part() && c.sink_units() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gk3::pointed_structure;

    fn m1() -> MultiGraph {
        MultiGraph::from_pairs(&["u", "w"], &[("u", "u"), ("u", "w"), ("w", "w")]).unwrap()
    }

    fn loop1() -> MultiGraph {
        MultiGraph::from_pairs(&["u"], &[("u", "u")]).unwrap()
    }

    fn el(g: &MultiGraph, s: &str) -> MonoidElement {
        MonoidElement::parse(g, s).unwrap()
    }

    #[test]
    fn shifting_and_adding() {
        let g = m1();
        assert_eq!(MonoidElement::generator(&g, "u", 0).unwrap().shift(3), el(&g, "u(3)"));
        let x = el(&g, "u(0) + 2*w(-1)");
        assert_eq!(x.terms().len(), 2);
        assert_eq!(x.to_string(), "u(0) + 2*w(-1)");
        assert_eq!(x.add(&el(&g, "w(-1)")).unwrap().to_string(), "u(0) + 3*w(-1)");
        assert!(matches!(MonoidElement::parse(&g, "q(0)"), Err(MonoidError::UnknownVertex(_))));
        assert!(matches!(MonoidElement::parse(&g, "u0)"), Err(MonoidError::Parse(_))));
    }

    #[test]
    fn single_flows() {
        let g = loop1();
        assert_eq!(flow_once(&g, &el(&g, "u(0)"), "u", 0).unwrap(), el(&g, "u(1)"));
        let g = m1();
        assert_eq!(flow_once(&g, &el(&g, "u(0)"), "u", 0).unwrap(), el(&g, "u(1) + w(1)"));
        assert_eq!(flow_once(&g, &el(&g, "2*u(0)"), "u", 0).unwrap(), el(&g, "u(0) + u(1) + w(1)"));
        assert_eq!(flow_once(&g, &el(&g, "u(0)"), "w", 0), Err(MonoidError::KeyAbsent("w".into(), 0)));
    }

    #[test]
    fn levels() {
        let g = loop1();
        assert_eq!(flow_to_level(&g, &el(&g, "u(0)"), 5).unwrap().counts, vec![1]);
        let g = m1();
        // u(0) -> u(1) + w(1) -> u(2) + 2*w(2)
        assert_eq!(flow_to_level(&g, &el(&g, "u(0)"), 2).unwrap().counts, vec![1, 2]);
        assert!(matches!(flow_to_level(&g, &el(&g, "u(3)"), 2), Err(MonoidError::LevelTooLow { .. })));
        // terms are not stored in shift order
        assert_eq!(flow_to_level(&g, &el(&g, "u(1) + w(0)"), 1).unwrap().counts, vec![1, 1]);
    }

    #[test]
    fn equalities() {
        let g = m1();
        let x = el(&g, "u(0)");
        let y = flow_once(&g, &x, "u", 0).unwrap();
        assert!(matches!(equal_elements(&g, &x, &y, 10).unwrap(), Equality::Equal { .. }));
        assert_eq!(equal_elements(&g, &el(&g, "u(0)"), &el(&g, "u(1)"), 10).unwrap(), Equality::NotEqualUpTo(10));
        let g = loop1();
        assert!(matches!(equal_elements(&g, &el(&g, "u(0)"), &el(&g, "u(1)"), 10).unwrap(), Equality::Equal { .. }));
    }

    #[test]
    fn canonical_forms_on_m1() {
        let g = m1();
        let p = pointed_structure(&g).unwrap();
        let w = canonical_form(&p, &el(&g, "w(0)")).unwrap();
        assert_eq!((w.source.clone(), w.sink.clone()), (vec![vec![0]], vec![vec![1]]));
        let u1 = canonical_form(&p, &el(&g, "u(1)")).unwrap();
        assert_eq!((u1.anchors.clone(), u1.source.clone(), u1.sink.clone()), (vec![1], vec![vec![1]], vec![vec![0]]));
        // u(1) + w(1) is u(0), which needs no sink term
        let u0 = canonical_form(&p, &el(&g, "u(1) + w(1)")).unwrap();
        assert_eq!((u0.anchors.clone(), u0.source.clone(), u0.sink.clone()), (vec![0], vec![vec![1]], vec![vec![0]]));
        assert_eq!(u0, canonical_form(&p, &el(&g, "u(0)")).unwrap());
        assert_eq!(u0.expand(&p).to_string(), "u(0)");
    }

    #[test]
    fn atoms() {
        let g = m1();
        let p = pointed_structure(&g).unwrap();
        assert!(is_atom(&p, &el(&g, "w(0)")).unwrap());
        assert!(!is_atom(&p, &el(&g, "u(0)")).unwrap());
        assert!(!is_atom(&p, &el(&g, "2*w(0)")).unwrap());
        assert!(!is_atom(&p, &MonoidElement::zero()).unwrap());
    }
}
