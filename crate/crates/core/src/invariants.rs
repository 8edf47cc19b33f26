//! Trail-count tables, the `≈` relation between pointed normal-form graphs,
//! and the resulting decision procedure for strong shift equivalence of
//! GK3 graphs, with certificates that can be checked independently.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gk::is_gk3;
use crate::gk3::{
    pointed_structure, pointed_structure_anchored, rotate_source, shift_trail, to_normal_form, Place, PointedGK3,
};
use crate::graph::MultiGraph;
use crate::moves::{apply_trace, MoveTrace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("graph is not in normal form")]
    NotNormalForm,
    #[error("cycle matching does not preserve lengths")]
    LengthMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantTable {
    pub m: usize,
    pub n: usize,
    pub p: Vec<usize>,
    pub q: Vec<usize>,
    pub d: Vec<Vec<usize>>,
    /// `counts[i][j][c]`: trails from source `i` to sink `j` with range index `≡ c (mod d[i][j])`.
    pub counts: Vec<Vec<Vec<u64>>>,
}

impl InvariantTable {
    pub fn total(&self, i: usize, j: usize) -> u64 {
        self.counts[i][j].iter().sum()
    }
}

pub type ShiftSets = Vec<Vec<BTreeSet<usize>>>;

pub fn invariant_table(p: &PointedGK3) -> Result<InvariantTable, InvariantError> {
    if !p.is_normal_form() {
        return Err(InvariantError::NotNormalForm);
    }
    let (m, n) = (p.sources.len(), p.sinks.len());
    let pl: Vec<usize> = (0..m).map(|i| p.p(i)).collect();
    let ql: Vec<usize> = (0..n).map(|j| p.q(j)).collect();
    let d: Vec<Vec<usize>> = pl.iter().map(|a| ql.iter().map(|b| a.gcd(b)).collect()).collect();
    let mut counts: Vec<Vec<Vec<u64>>> = d.iter().map(|row| row.iter().map(|&g| vec![0; g]).collect()).collect();
    for t in &p.trails {
        counts[t.source][t.sink][t.b % d[t.source][t.sink]] += 1;
    }
    Ok(InvariantTable { m, n, p: pl, q: ql, d, counts })
}

/// `S_ij`: the shifts `s` with `N^E_ij[c] = N^F_{σi,τj}[c + s]` for all `c`.
pub fn shift_sets(
    te: &InvariantTable,
    tf: &InvariantTable,
    sigma: &[usize],
    tau: &[usize],
) -> Result<ShiftSets, InvariantError> {
    if sigma.len() != te.m || tau.len() != te.n || te.m != tf.m || te.n != tf.n {
        return Err(InvariantError::LengthMismatch);
    }
    if (0..te.m).any(|i| te.p[i] != tf.p[sigma[i]]) || (0..te.n).any(|j| te.q[j] != tf.q[tau[j]]) {
        return Err(InvariantError::LengthMismatch);
    }
    Ok((0..te.m)
        .map(|i| {
            (0..te.n)
                .map(|j| {
                    let (x, y) = (&te.counts[i][j], &tf.counts[sigma[i]][tau[j]]);
                    let d = x.len();
                    (0..d).filter(|&s| (0..d).all(|c| x[c] == y[(c + s) % d])).collect()
                })
                .collect()
        })
        .collect())
}

fn lcm_all(values: impl Iterator<Item = usize>) -> usize {
    values.fold(1, |acc, v| acc.lcm(&v))
}

fn find_b(s: &ShiftSets, d: &[Vec<usize>], a: &[usize], j: usize) -> Option<usize> {
    let rows = a.len();
    let modulus = lcm_all((0..s.len()).map(|i| d[i][j]));
    (0..modulus).find(|&b| (0..rows).all(|i| s[i][j].contains(&((a[i] + b) % d[i][j]))))
}

/// Integers `a_i, b_j` with `(a_i + b_j) mod d_ij ∈ S_ij` for every pair, or
/// `None`. `a_0` is fixed to 0 since only the sums matter.
pub fn solve_offsets(s: &ShiftSets, d: &[Vec<usize>]) -> Option<(Vec<usize>, Vec<usize>)> {
    let m = s.len();
    let n = s.first().map_or(0, Vec::len);
    if m == 0 {
        return Some((Vec::new(), vec![0; n]));
    }
    fn search(s: &ShiftSets, d: &[Vec<usize>], a: &mut Vec<usize>, n: usize) -> Option<Vec<usize>> {
        if (0..n).any(|j| find_b(s, d, a, j).is_none()) {
            return None;
        }
        if a.len() == s.len() {
            return Some((0..n).map(|j| find_b(s, d, a, j).expect("checked above")).collect());
        }
        let i = a.len();
        let modulus = lcm_all(d[i].iter().copied());
        for ai in 0..modulus {
            a.push(ai);
            if let Some(b) = search(s, d, a, n) {
                return Some(b);
            }
            a.pop();
        }
        None
    }
    let mut a = vec![0];
    search(s, d, &mut a, n).map(|b| (a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Yes,
    No,
    Unsupported,
}

/// Why one cycle matching admits no offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatchingFailure {
    /// `S_ij` is empty: no shift aligns the two trail tables.
    EmptyShiftSet {
        i: usize,
        j: usize,
    },
    /// Rows `i1` and `i2` force `b_j2 - b_j1` into disjoint residues.
    Congruence {
        i1: usize,
        i2: usize,
        j1: usize,
        j2: usize,
        modulus: usize,
        first: usize,
        second: usize,
    },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingAttempt {
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
    pub failure: MatchingFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Refutation {
    /// The multisets of source or sink cycle lengths differ.
    CycleLengths,
    /// No length-preserving matching agrees on trail totals.
    TrailTotals,
    /// Every surviving matching fails, for the recorded reason.
    Matchings { attempts: Vec<MatchingAttempt> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SseCertificate {
    pub e_normal_form: MoveTrace,
    pub f_normal_form: MoveTrace,
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub e_alignment: MoveTrace,
    pub f_alignment: MoveTrace,
    /// Vertex of the aligned `E` to vertex of the aligned `F`.
    pub bijection: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<SseCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refutation: Option<Refutation>,
}

impl Decision {
    fn no(refutation: Refutation) -> Self {
        Self { verdict: Verdict::No, certificate: None, refutation: Some(refutation) }
    }

    fn unsupported() -> Self {
        Self { verdict: Verdict::Unsupported, certificate: None, refutation: None }
    }
}

fn congruence_witness(s: &ShiftSets, d: &[Vec<usize>]) -> MatchingFailure {
    let m = s.len();
    let n = s.first().map_or(0, Vec::len);
    let differences = |i: usize, j1: usize, j2: usize| {
        let g = d[i][j1].gcd(&d[i][j2]);
        let set: BTreeSet<usize> =
            s[i][j1].iter().flat_map(|&x| s[i][j2].iter().map(move |&y| (y + g - x % g) % g)).collect();
        (g, set)
    };
    for j1 in 0..n {
        for j2 in j1 + 1..n {
            for i1 in 0..m {
                for i2 in i1 + 1..m {
                    let (g1, d1) = differences(i1, j1, j2);
                    let (g2, d2) = differences(i2, j1, j2);
                    let modulus = g1.gcd(&g2);
                    let p1: BTreeSet<usize> = d1.iter().map(|x| x % modulus).collect();
                    let p2: BTreeSet<usize> = d2.iter().map(|x| x % modulus).collect();
                    if p1.is_disjoint(&p2) {
                        let (&first, &second) = (p1.first().expect("nonempty"), p2.first().expect("nonempty"));
                        return MatchingFailure::Congruence { i1, i2, j1, j2, modulus, first, second };
                    }
                }
            }
        }
    }
    MatchingFailure::Infeasible
}

/// Bijections `perm` of `0..sig_e.len()` with `sig_e[x] == sig_f[perm[x]]`,
/// in lexicographic order.
fn compatible_bijections<T: PartialEq>(sig_e: &[T], sig_f: &[T]) -> Vec<Vec<usize>> {
    fn go<T: PartialEq>(e: &[T], f: &[T], used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == e.len() {
            out.push(cur.clone());
            return;
        }
        let x = cur.len();
        for y in 0..f.len() {
            if !used[y] && e[x] == f[y] {
                used[y] = true;
                cur.push(y);
                go(e, f, used, cur, out);
                cur.pop();
                used[y] = false;
            }
        }
    }
    let mut out = Vec::new();
    if sig_e.len() == sig_f.len() {
        go(sig_e, sig_f, &mut vec![false; sig_f.len()], &mut Vec::new(), &mut out);
    }
    out
}

type Signature = (usize, Vec<(usize, u64)>);

fn source_signatures(t: &InvariantTable) -> Vec<Signature> {
    (0..t.m)
        .map(|i| {
            let mut partners: Vec<(usize, u64)> = (0..t.n).map(|j| (t.q[j], t.total(i, j))).collect();
            partners.sort_unstable();
            (t.p[i], partners)
        })
        .collect()
}

fn sink_signatures(t: &InvariantTable) -> Vec<Signature> {
    (0..t.n)
        .map(|j| {
            let mut partners: Vec<(usize, u64)> = (0..t.m).map(|i| (t.p[i], t.total(i, j))).collect();
            partners.sort_unstable();
            (t.q[j], partners)
        })
        .collect()
}

fn sorted<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    v.sort();
    v
}

/// Decides `E ≈ F` for two normal-form graphs, quantifying over all
/// length-preserving cycle matchings. A positive answer carries a
/// certificate whose normal-form traces are empty.
pub fn decide_approx(e_nf: &MultiGraph, f_nf: &MultiGraph) -> Result<Decision, InvariantError> {
    let pe = pointed_structure(e_nf).map_err(|_| InvariantError::NotNormalForm)?;
    let pf = pointed_structure(f_nf).map_err(|_| InvariantError::NotNormalForm)?;
    let te = invariant_table(&pe)?;
    let tf = invariant_table(&pf)?;
    if sorted(&te.p) != sorted(&tf.p) || sorted(&te.q) != sorted(&tf.q) {
        return Ok(Decision::no(Refutation::CycleLengths));
    }
    let sigmas = compatible_bijections(&source_signatures(&te), &source_signatures(&tf));
    let taus = compatible_bijections(&sink_signatures(&te), &sink_signatures(&tf));
    let mut attempts = Vec::new();
    for sigma in &sigmas {
        for tau in &taus {
            let s = shift_sets(&te, &tf, sigma, tau)?;
            let failure = if let Some((i, j)) =
                (0..te.m).flat_map(|i| (0..te.n).map(move |j| (i, j))).find(|&(i, j)| s[i][j].is_empty())
            {
                MatchingFailure::EmptyShiftSet { i, j }
            } else if let Some((a, b)) = solve_offsets(&s, &te.d) {
                let certificate = build_alignment(&pe, &pf, sigma, tau, &a, &b);
                return Ok(Decision { verdict: Verdict::Yes, certificate: Some(certificate), refutation: None });
            } else {
                congruence_witness(&s, &te.d)
            };
            attempts.push(MatchingAttempt { sigma: sigma.clone(), tau: tau.clone(), failure });
        }
    }
    if attempts.is_empty() {
        return Ok(Decision::no(Refutation::TrailTotals));
    }
    Ok(Decision::no(Refutation::Matchings { attempts }))
}

/// Shifts trail ranges back until every range index, measured from the
/// given sink anchors, lies below the gcd of its cycle pair.
fn reduce_ranges(g: &MultiGraph, sink_anchors: &[String]) -> (MultiGraph, MoveTrace) {
    let mut cur = g.clone();
    let mut trace = MoveTrace::new();
    loop {
        let p = pointed_structure_anchored(&cur, sink_anchors).expect("alignment keeps the graph GK3");
        let far = p.trails.iter().position(|t| t.b >= p.p(t.source).gcd(&p.q(t.sink)));
        let Some(t) = far else { break };
        let (h, steps) = shift_trail(&p, t).expect("normal-form trails are isolated");
        cur = h;
        trace.extend(steps);
    }
    (cur, trace)
}

fn sink_anchor_names(p: &PointedGK3, offsets: impl Fn(usize) -> usize) -> Vec<String> {
    p.sinks.iter().enumerate().map(|(j, c)| p.graph.vertex_name(c.vertices[offsets(j) % c.len()]).to_string()).collect()
}

fn build_alignment(
    pe: &PointedGK3,
    pf: &PointedGK3,
    sigma: &[usize],
    tau: &[usize],
    a: &[usize],
    b: &[usize],
) -> SseCertificate {
    let (e_al, e_alignment) = reduce_ranges(&pe.graph, &sink_anchor_names(pe, |_| 0));

    // F sink τ(j) is re-anchored at its vertex of index b_j
    let mut b_of_f_sink = vec![0; b.len()];
    for (j, &fj) in tau.iter().enumerate() {
        b_of_f_sink[fj] = b[j];
    }
    let f_anchors = sink_anchor_names(pf, |fj| b_of_f_sink[fj]);
    let mut cur = pf.graph.clone();
    let mut f_alignment = MoveTrace::new();
    for (i, &fi) in sigma.iter().enumerate() {
        let key = pf.graph.vertex_name(pf.sources[fi].vertices[0]).to_string();
        for _ in 0..a[i] % pf.p(fi) {
            let p = pointed_structure_anchored(&cur, &f_anchors).expect("alignment keeps the graph GK3");
            let v = cur.vertex(&f_alignment.track_vertex(&key)).expect("tracked vertex exists");
            let Place::Source { cycle, .. } = p.place(v) else {
                unreachable!("tracked vertex stays on its source cycle")
            };
            let (h, steps) = rotate_source(&p, cycle).expect("alignment keeps normal form");
            cur = h;
            f_alignment.extend(steps);
        }
    }
    let (f_al, reduce) = reduce_ranges(&cur, &f_anchors);
    f_alignment.extend(reduce);

    let vmap = gk3_isomorphic(&e_al, &f_al)
        .expect("aligned graphs are in normal form")
        .expect("offsets solving the congruences align the graphs");
    let bijection = (0..e_al.vertex_count())
        .map(|v| (e_al.vertex_name(v).to_string(), f_al.vertex_name(vmap[v]).to_string()))
        .collect();
    SseCertificate {
        e_normal_form: MoveTrace::new(),
        f_normal_form: MoveTrace::new(),
        sigma: sigma.to_vec(),
        tau: tau.to_vec(),
        a: a.to_vec(),
        b: b.to_vec(),
        e_alignment,
        f_alignment,
        bijection,
    }
}

/// Simple maximum bipartite matching (Kuhn); `adj[x]` lists the admissible
/// partners of `x`. Returns `partner[x]` when every `x` can be matched.
fn perfect_matching(adj: &[Vec<usize>], right: usize) -> Option<Vec<usize>> {
    fn augment(x: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                if owner[y].is_none_or(|z| augment(z, adj, seen, owner)) {
                    owner[y] = Some(x);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; right];
    for x in 0..adj.len() {
        if !augment(x, adj, &mut vec![false; right], &mut owner) {
            return None;
        }
    }
    let mut partner = vec![0; adj.len()];
    for (y, x) in owner.iter().enumerate() {
        if let Some(x) = x {
            partner[*x] = y;
        }
    }
    Some(partner)
}

/// Searches cycle matchings and sink rotations for a vertex bijection
/// between two normal-form graphs that preserves the edge multiset.
pub fn gk3_isomorphic(e_nf: &MultiGraph, f_nf: &MultiGraph) -> Result<Option<Vec<usize>>, InvariantError> {
    let pe = pointed_structure(e_nf).map_err(|_| InvariantError::NotNormalForm)?;
    let pf = pointed_structure(f_nf).map_err(|_| InvariantError::NotNormalForm)?;
    if !pe.is_normal_form() || !pf.is_normal_form() {
        return Err(InvariantError::NotNormalForm);
    }
    if e_nf.vertex_count() != f_nf.vertex_count() || e_nf.edge_count() != f_nf.edge_count() {
        return Ok(None);
    }
    // count[i][j][k]: edges from source i to index k of sink j
    let counts = |p: &PointedGK3| {
        let mut c: Vec<Vec<Vec<u64>>> =
            (0..p.sources.len()).map(|_| (0..p.sinks.len()).map(|j| vec![0; p.q(j)]).collect()).collect();
        for t in &p.trails {
            c[t.source][t.sink][t.b] += 1;
        }
        c
    };
    let (ce, cf) = (counts(&pe), counts(&pf));
    let lens = |p: &PointedGK3| (0..p.sources.len()).map(|i| p.p(i)).collect::<Vec<_>>();
    let sink_lens = |p: &PointedGK3| (0..p.sinks.len()).map(|j| p.q(j)).collect::<Vec<_>>();
    let (qe, qf) = (sink_lens(&pe), sink_lens(&pf));
    for sigma in compatible_bijections(&lens(&pe), &lens(&pf)) {
        // rotation[j][fj]: a rotation aligning sink j with F sink fj, if any
        let rotation: Vec<Vec<Option<usize>>> = (0..qe.len())
            .map(|j| {
                (0..qf.len())
                    .map(|fj| {
                        if qe[j] != qf[fj] {
                            return None;
                        }
                        let q = qe[j];
                        (0..q).find(|&t| {
                            (0..sigma.len()).all(|i| (0..q).all(|k| ce[i][j][k] == cf[sigma[i]][fj][(k + t) % q]))
                        })
                    })
                    .collect()
            })
            .collect();
        let adj: Vec<Vec<usize>> =
            rotation.iter().map(|row| (0..row.len()).filter(|&fj| row[fj].is_some()).collect()).collect();
        let Some(tau) = perfect_matching(&adj, qf.len()) else { continue };
        let mut vmap = vec![usize::MAX; e_nf.vertex_count()];
        for (i, c) in pe.sources.iter().enumerate() {
            let target = &pf.sources[sigma[i]];
            for (k, &v) in c.vertices.iter().enumerate() {
                vmap[v] = target.vertices[k];
            }
        }
        for (j, c) in pe.sinks.iter().enumerate() {
            let target = &pf.sinks[tau[j]];
            let t = rotation[j][tau[j]].expect("matched pairs have a rotation");
            for (k, &v) in c.vertices.iter().enumerate() {
                vmap[v] = target.vertices[(k + t) % c.len()];
            }
        }
        if vmap.iter().all(|&w| w != usize::MAX) && e_nf.is_isomorphism(f_nf, &vmap) {
            return Ok(Some(vmap));
        }
    }
    Ok(None)
}

/// Length of the graph if it is a single cycle.
fn single_cycle_length(g: &MultiGraph) -> Option<usize> {
    let simple =
        g.is_connected() && (0..g.vertex_count()).all(|v| g.out_edges(v).len() == 1 && g.in_edges(v).len() == 1);
    simple.then_some(g.vertex_count())
}

fn cycle_rotation_bijection(e: &MultiGraph, f: &MultiGraph) -> BTreeMap<String, String> {
    let walk = |g: &MultiGraph| {
        let mut order = vec![0usize];
        while order.len() < g.vertex_count() {
            let v = *order.last().expect("nonempty");
            order.push(g.edges()[g.out_edges(v)[0]].range);
        }
        order
    };
    walk(e)
        .into_iter()
        .zip(walk(f))
        .map(|(x, y)| (e.vertex_name(x).to_string(), f.vertex_name(y).to_string()))
        .collect()
}

/// Strong shift equivalence of the edge shifts of `e` and `f`.
///
/// Supported inputs are pairs of GK3 graphs and pairs of single cycles;
/// anything else is `Unsupported`.
pub fn decide_sse(e: &MultiGraph, f: &MultiGraph) -> Decision {
    if let (Some(pe), Some(pf)) = (single_cycle_length(e), single_cycle_length(f)) {
        if pe != pf {
            return Decision::no(Refutation::CycleLengths);
        }
        let certificate = SseCertificate {
            e_normal_form: MoveTrace::new(),
            f_normal_form: MoveTrace::new(),
            sigma: vec![0],
            tau: Vec::new(),
            a: vec![0],
            b: Vec::new(),
            e_alignment: MoveTrace::new(),
            f_alignment: MoveTrace::new(),
            bijection: cycle_rotation_bijection(e, f),
        };
        return Decision { verdict: Verdict::Yes, certificate: Some(certificate), refutation: None };
    }
    if !is_gk3(e) || !is_gk3(f) {
        return Decision::unsupported();
    }
    let (e_nf, e_trace) = to_normal_form(e).expect("GK3 graphs have normal forms");
    let (f_nf, f_trace) = to_normal_form(f).expect("GK3 graphs have normal forms");
    let mut decision = decide_approx(&e_nf, &f_nf).expect("normal forms are normal");
    if let Some(cert) = decision.certificate.as_mut() {
        cert.e_normal_form = e_trace;
        cert.f_normal_form = f_trace;
    }
    decision
}

/// Shift equivalence. For GK3 graphs shift equivalence and strong shift
/// equivalence coincide, so this returns exactly the verdict of
/// [`decide_sse`]; other inputs are `Unsupported` in the same way.
pub fn decide_se(e: &MultiGraph, f: &MultiGraph) -> Decision {
    decide_sse(e, f)
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    #[error("normal-form trace for {side} does not replay: {message}")]
    TraceReplay { side: char, message: String },
    #[error("normal-form trace for {side} does not reach normal form")]
    NotNormalForm { side: char },
    #[error("cycle matching is not a length-preserving bijection")]
    BadMatching,
    #[error("offsets a_{i} + b_{j} fall outside the shift set")]
    Offset { i: usize, j: usize },
    #[error("alignment trace for {side} does not replay: {message}")]
    AlignmentReplay { side: char, message: String },
    #[error("recorded bijection is not a graph isomorphism")]
    BadBijection,
}

fn is_permutation(v: &[usize], n: usize) -> bool {
    v.len() == n && v.iter().collect::<BTreeSet<_>>().len() == n && v.iter().all(|&x| x < n)
}

/// Checks a certificate from scratch: replays every trace, recomputes the
/// trail tables and shift sets, and checks the final bijection.
pub fn verify_certificate(e: &MultiGraph, f: &MultiGraph, cert: &SseCertificate) -> Result<(), Rejection> {
    let replay = |g: &MultiGraph, t: &MoveTrace, side: char| {
        apply_trace(g, t).map_err(|err| Rejection::TraceReplay { side, message: err.to_string() })
    };
    let e_nf = replay(e, &cert.e_normal_form, 'E')?;
    let f_nf = replay(f, &cert.f_normal_form, 'F')?;
    let single = single_cycle_length(&e_nf).is_some() && single_cycle_length(&f_nf).is_some();
    if !single {
        let pe = pointed_structure(&e_nf).map_err(|_| Rejection::NotNormalForm { side: 'E' })?;
        let pf = pointed_structure(&f_nf).map_err(|_| Rejection::NotNormalForm { side: 'F' })?;
        let te = invariant_table(&pe).map_err(|_| Rejection::NotNormalForm { side: 'E' })?;
        let tf = invariant_table(&pf).map_err(|_| Rejection::NotNormalForm { side: 'F' })?;
        if te.m != tf.m
            || te.n != tf.n
            || !is_permutation(&cert.sigma, te.m)
            || !is_permutation(&cert.tau, te.n)
            || cert.a.len() != te.m
            || cert.b.len() != te.n
        {
            return Err(Rejection::BadMatching);
        }
        let s = shift_sets(&te, &tf, &cert.sigma, &cert.tau).map_err(|_| Rejection::BadMatching)?;
        for (i, row) in s.iter().enumerate() {
            for (j, shifts) in row.iter().enumerate() {
                if !shifts.contains(&((cert.a[i] + cert.b[j]) % te.d[i][j])) {
                    return Err(Rejection::Offset { i, j });
                }
            }
        }
    }
    let align = |g: &MultiGraph, t: &MoveTrace, side: char| {
        apply_trace(g, t).map_err(|err| Rejection::AlignmentReplay { side, message: err.to_string() })
    };
    let e_al = align(&e_nf, &cert.e_alignment, 'E')?;
    let f_al = align(&f_nf, &cert.f_alignment, 'F')?;
    if cert.bijection.len() != e_al.vertex_count() {
        return Err(Rejection::BadBijection);
    }
    let vmap: Option<Vec<usize>> =
        e_al.vertices().iter().map(|v| cert.bijection.get(v).and_then(|w| f_al.vertex(w))).collect();
    match vmap {
        Some(vmap) if e_al.is_isomorphism(&f_al, &vmap) => Ok(()),
        _ => Err(Rejection::BadBijection),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(vertices: &[&str], pairs: &[(&str, &str)]) -> MultiGraph {
        MultiGraph::from_pairs(vertices, pairs).unwrap()
    }

    fn m1() -> MultiGraph {
        graph(&["u", "w"], &[("u", "u"), ("u", "w"), ("w", "w")])
    }

    fn two_two(targets: &[&str]) -> MultiGraph {
        let mut pairs = vec![("v0", "v1"), ("v1", "v0"), ("w0", "w1"), ("w1", "w0")];
        pairs.extend(targets.iter().map(|&t| ("v0", t)));
        graph(&["v0", "v1", "w0", "w1"], &pairs)
    }

    fn table(g: &MultiGraph) -> InvariantTable {
        invariant_table(&pointed_structure(g).unwrap()).unwrap()
    }

    #[test]
    fn tables() {
        let t = table(&m1());
        assert_eq!((t.m, t.n, t.d[0][0]), (1, 1, 1));
        assert_eq!(t.counts[0][0], vec![1]);
        assert_eq!(table(&two_two(&["w0", "w0"])).counts[0][0], vec![2, 0]);
        assert_eq!(table(&two_two(&["w0", "w1"])).counts[0][0], vec![1, 1]);
        let long = graph(&["u", "w", "x"], &[("u", "u"), ("u", "x"), ("x", "w"), ("w", "w")]);
        assert_eq!(invariant_table(&pointed_structure(&long).unwrap()), Err(InvariantError::NotNormalForm));
    }

    #[test]
    fn shift_set_cases() {
        let e2 = table(&two_two(&["w0", "w0"]));
        let f2 = table(&two_two(&["w0", "w1"]));
        assert!(shift_sets(&e2, &e2, &[0], &[0]).unwrap()[0][0].contains(&0));
        assert!(shift_sets(&e2, &f2, &[0], &[0]).unwrap()[0][0].is_empty());
        let t = table(&m1());
        assert_eq!(shift_sets(&t, &e2, &[0], &[0]), Err(InvariantError::LengthMismatch));
    }

    #[test]
    fn offsets() {
        let all_zero = vec![vec![BTreeSet::from([0]), BTreeSet::from([0])]];
        assert_eq!(solve_offsets(&all_zero, &[vec![2, 2]]), Some((vec![0], vec![0, 0])));
        let single = vec![vec![BTreeSet::from([1])]];
        assert_eq!(solve_offsets(&single, &[vec![2]]), Some((vec![0], vec![1])));
        let s = |x: usize| BTreeSet::from([x]);
        let paper = vec![vec![s(0), s(1)], vec![s(1), s(1)]];
        let d = vec![vec![2, 2], vec![2, 2]];
        assert_eq!(solve_offsets(&paper, &d), None);
        assert_eq!(
            congruence_witness(&paper, &d),
            MatchingFailure::Congruence { i1: 0, i2: 1, j1: 0, j2: 1, modulus: 2, first: 1, second: 0 }
        );
    }

    #[test]
    fn small_decisions() {
        let d = decide_sse(&m1(), &m1());
        assert_eq!(d.verdict, Verdict::Yes);
        let cert = d.certificate.unwrap();
        assert_eq!((cert.a.clone(), cert.b.clone()), (vec![0], vec![0]));
        assert!(verify_certificate(&m1(), &m1(), &cert).is_ok());

        let (e2, f2) = (two_two(&["w0", "w0"]), two_two(&["w0", "w1"]));
        assert_eq!(decide_sse(&e2, &f2).verdict, Verdict::No);
        assert_eq!(gk3_isomorphic(&e2, &f2).unwrap(), None);

        let renamed = graph(&["b", "a"], &[("b", "b"), ("b", "a"), ("a", "a")]);
        assert!(gk3_isomorphic(&m1(), &renamed).unwrap().is_some());

        let loop1 = graph(&["u"], &[("u", "u")]);
        assert_eq!(decide_sse(&m1(), &loop1).verdict, Verdict::Unsupported);
        let c2 = graph(&["a", "b"], &[("a", "b"), ("b", "a")]);
        let c3 = graph(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")]);
        assert_eq!(decide_se(&c2, &c3).verdict, Verdict::No);
        let c2r = graph(&["x", "y"], &[("y", "x"), ("x", "y")]);
        let yes = decide_sse(&c2, &c2r);
        assert!(verify_certificate(&c2, &c2r, yes.certificate.as_ref().unwrap()).is_ok());
    }

    #[test]
    fn offset_rotation_is_realised() {
        // same trail tables up to a shift: E lands on w0, F on w1
        let (e, f) = (two_two(&["w0"]), two_two(&["w1"]));
        let d = decide_sse(&e, &f);
        assert_eq!(d.verdict, Verdict::Yes);
        let mut cert = d.certificate.unwrap();
        assert_eq!(verify_certificate(&e, &f, &cert), Ok(()));
        cert.b[0] += 1;
        assert!(matches!(verify_certificate(&e, &f, &cert), Err(Rejection::Offset { .. })));
    }
}
