//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. `SFT_SEED` reseeds the randomized criteria.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_integer::Integer;
use rand::Rng;
use sft_core::generate::{self, random_gk3, random_isolated_trails, random_move, random_normal_form};
use sft_core::gk3::{pointed_structure_anchored, trail_signature, PointedGK3};
use sft_core::invariants::{invariant_table, MatchingFailure, Refutation, Verdict};
use sft_core::monoid::{canonical_form, equal_elements, is_atom, Equality};
use sft_core::oracle::{sse_search, CanonKey, SearchLimits};
use sft_core::{
    apply_trace, decide_se, decide_sse, gk_dimension, is_gk3, is_normal_form, pointed_structure, shift_trail_range,
    to_normal_form, verify_elementary, verify_se_witness, GkDimension, IntMatrix, MonoidElement, MultiGraph,
};

use common::{certified_normal_forms, certified_yes, random_element, rng};

type Outcome = Result<String, String>;

/// Name, time limit in seconds, check.
type Criterion = (&'static str, u64, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn criterion_1() -> Outcome {
    let (e, f) = generate::non_sse_pair();
    for g in [&e, &f] {
        check!(is_normal_form(g), "fixture is not in normal form");
    }
    let te = invariant_table(&pointed_structure(&e).unwrap()).unwrap();
    let tf = invariant_table(&pointed_structure(&f).unwrap()).unwrap();
    check!(te.p == vec![2, 2] && te.q == vec![2, 2], "cycle lengths {:?} {:?}", te.p, te.q);
    check!(te.d.iter().flatten().all(|&d| d == 2), "d = {:?}", te.d);
    for i in 0..2 {
        for j in 0..2 {
            let shift = usize::from((i, j) != (0, 0));
            for c in 0..2 {
                check!(
                    te.counts[i][j][c] == tf.counts[i][j][(c + shift) % 2],
                    "N^E_({},{}) is not N^F shifted by {shift}",
                    i + 1,
                    j + 1
                );
            }
        }
    }
    for (label, decision) in [("sse", decide_sse(&e, &f)), ("se", decide_se(&e, &f))] {
        check!(decision.verdict == Verdict::No, "decide_{label} returned {:?}", decision.verdict);
        let Some(Refutation::Matchings { attempts }) = &decision.refutation else {
            return Err(format!("decide_{label} refutation {:?}", decision.refutation));
        };
        check!(!attempts.is_empty(), "no matching attempts recorded");
        for a in attempts {
            let MatchingFailure::Congruence { modulus, first, second, .. } = a.failure else {
                return Err(format!("attempt {a:?} is not a congruence contradiction"));
            };
            check!(modulus == 2 && first != second, "congruence {first} vs {second} mod {modulus}");
        }
        let identity =
            attempts.iter().find(|a| a.sigma == [0, 1] && a.tau == [0, 1]).ok_or("identity matching missing")?;
        check!(
            identity.failure
                == MatchingFailure::Congruence { i1: 0, i2: 1, j1: 0, j2: 1, modulus: 2, first: 1, second: 0 },
            "identity matching failure {:?}",
            identity.failure
        );
    }
    Ok("b2 - b1 = 1 and 0 (mod 2)".into())
}

fn criterion_2() -> Outcome {
    let mut rng = rng(2);
    let cases = 200;
    for _ in 0..cases {
        let g = random_gk3(&mut rng, 12);
        let (_, h) = random_move(&mut rng, &g, 3);
        certified_yes(&g, &h)?;
    }
    Ok(format!("{cases} graphs, one move each"))
}

fn criterion_3() -> Outcome {
    let mut rng = rng(3);
    let cases = 100;
    for _ in 0..cases {
        let g = random_gk3(&mut rng, 12);
        let (nf, trace) = to_normal_form(&g).map_err(|e| e.to_string())?;
        check!(is_normal_form(&nf), "output not in normal form: {}", nf.to_json());
        check!(apply_trace(&g, &trace).map_err(|e| e.to_string())? == nf, "trace does not replay exactly");
        certified_yes(&g, &nf)?;
    }
    Ok(format!("{cases} graphs"))
}

fn criterion_4() -> Outcome {
    let mut rng = rng(4);
    let mut cases = 0;
    for p in 1..=6 {
        for q in 1..=6 {
            for _ in 0..3 {
                let trails = rng.gen_range(1..=3);
                let g = random_isolated_trails(&mut rng, p, q, trails);
                let before = pointed_structure(&g).unwrap();
                let t = rng.gen_range(0..before.trails.len());
                let (h, trace) = shift_trail_range(&g, t).map_err(|e| e.to_string())?;
                check!(apply_trace(&g, &trace).map_err(|e| e.to_string())? == h, "trace does not replay");
                let anchors: Vec<String> = before.anchors().iter().map(|a| trace.track_vertex(a)).collect();
                let after = pointed_structure_anchored(&h, &anchors).map_err(|e| e.to_string())?;
                let d = p.gcd(&q);
                let mut expected: Vec<_> = before
                    .trails
                    .iter()
                    .enumerate()
                    .map(|(k, tr)| {
                        let b = if k == t { (tr.b + q - d) % q } else { tr.b };
                        (tr.source, tr.a, tr.sink, b, tr.len())
                    })
                    .collect();
                expected.sort_unstable();
                check!(
                    trail_signature(&after) == expected,
                    "p={p} q={q}: {:?} vs {expected:?}",
                    trail_signature(&after)
                );
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} shifts"))
}

fn criterion_5() -> Outcome {
    for n in 1..=5 {
        check!(gk_dimension(&generate::cycle(n)) == GkDimension::Finite(1), "cycle({n})");
    }
    let (e, f) = generate::non_sse_pair();
    let fixtures = [generate::m1(), generate::e2(), generate::f2(), generate::two_vertex(1), e, f];
    for g in &fixtures {
        check!(gk_dimension(g) == GkDimension::Finite(3) && is_gk3(g), "fixture {}", g.to_json());
    }
    check!(gk_dimension(&generate::chain3()) == GkDimension::Finite(5), "chain3");
    for g in [generate::double_loop(), generate::two_vertex(2), generate::two_vertex(3)] {
        check!(gk_dimension(&g) == GkDimension::Infinite, "shared vertex {}", g.to_json());
    }
    Ok("1 / 3 / 5 / infinite".into())
}

/// `x` equals one of the sink generators `w_j(k)`.
fn is_sink_generator(p: &PointedGK3, x: &MonoidElement) -> bool {
    p.sinks.iter().any(|c| {
        let w = p.graph.vertex_name(c.vertices[0]);
        (0..c.len() as i64).any(|k| {
            let y = MonoidElement::generator(&p.graph, w, k).unwrap();
            let level = x.max_shift().unwrap_or(0).max(k);
            matches!(equal_elements(&p.graph, x, &y, level), Ok(Equality::Equal { .. }))
        })
    })
}

fn criterion_6() -> Outcome {
    let mut rng = rng(6);
    let cases = 500;
    let mut equal_pairs = 0;
    for _ in 0..cases {
        let g = random_normal_form(&mut rng, 3);
        let p = pointed_structure(&g).unwrap();
        let x = if rng.gen_bool(0.2) {
            let c = &p.sinks[rng.gen_range(0..p.sinks.len())];
            MonoidElement::generator(&g, g.vertex_name(c.vertices[rng.gen_range(0..c.len())]), rng.gen_range(-3..=3))
                .unwrap()
        } else {
            random_element(&mut rng, &g)
        };
        let cx = canonical_form(&p, &x).map_err(|e| e.to_string())?;
        check!(canonical_form(&p, &cx.expand(&p)).unwrap() == cx, "not idempotent on {x} over {}", g.to_json());

        // y is either an independent element or x after a few flows
        let y = if rng.gen_bool(0.5) {
            random_element(&mut rng, &g)
        } else {
            let mut y = x.clone();
            for _ in 0..rng.gen_range(0..4) {
                let (v, i) = y.terms().keys().next().unwrap().clone();
                y = sft_core::flow_once(&g, &y, &v, i).unwrap();
            }
            y
        };
        let cy = canonical_form(&p, &y).unwrap();
        let level = x.max_shift().into_iter().chain(y.max_shift()).max().unwrap();
        let eq = matches!(equal_elements(&g, &x, &y, level).unwrap(), Equality::Equal { .. });
        check!(
            eq == (cx == cy),
            "equal_elements={eq} but canonical forms {} for {x} and {y}",
            if cx == cy { "agree" } else { "differ" }
        );
        equal_pairs += usize::from(eq);

        let atom = is_atom(&p, &x).unwrap();
        check!(atom == is_sink_generator(&p, &x), "is_atom={atom} on {x}");
    }
    Ok(format!("{cases} elements, {equal_pairs} equal pairs"))
}

fn criterion_7() -> Outcome {
    let mut rng = rng(7);
    let (mut found, mut negatives) = (0, 0);
    while found < 50 {
        let e = random_gk3(&mut rng, 6);
        let mut f = e.clone();
        for _ in 0..rng.gen_range(1..=3) {
            let (_, h) = random_move(&mut rng, &f, 2);
            if h.vertex_count() <= 8 {
                f = h;
            }
        }
        let limits =
            SearchLimits { max_depth: 6, max_vertices: e.vertex_count().max(f.vertex_count()) + 1, max_classes: 2 };
        let trace = sse_search(&e, &f, limits, None).map_err(|e| e.to_string())?;
        let trace = trace.ok_or_else(|| format!("no trace\nE = {}\nF = {}", e.to_json(), f.to_json()))?;
        let end = apply_trace(&e, &trace).map_err(|e| e.to_string())?;
        check!(CanonKey::of(&end).unwrap() == CanonKey::of(&f).unwrap(), "trace ends at a different graph");
        check!(decide_sse(&e, &f).verdict == Verdict::Yes, "trace found but decider disagrees");
        found += 1;
    }
    let mut pairs: Vec<(MultiGraph, MultiGraph)> = vec![generate::non_sse_pair()];
    while pairs.len() < 20 {
        let (e, f) = (random_gk3(&mut rng, 5), random_gk3(&mut rng, 5));
        if decide_sse(&e, &f).verdict == Verdict::No {
            pairs.push((e, f));
        }
    }
    for (e, f) in &pairs {
        check!(decide_sse(e, f).verdict == Verdict::No, "expected a NO pair");
        let limits =
            SearchLimits { max_depth: 4, max_vertices: e.vertex_count().max(f.vertex_count()) + 1, max_classes: 2 };
        let trace = sse_search(e, f, limits, None).map_err(|e| e.to_string())?;
        check!(trace.is_none(), "decider says NO but a trace exists\nE = {}\nF = {}", e.to_json(), f.to_json());
        negatives += 1;
    }
    Ok(format!("{found} traces found, {negatives} NO pairs without traces"))
}

fn mat(rows: &[&[u64]]) -> IntMatrix {
    IntMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

/// Every matrix obtained by moving one entry of `m` up or down by one.
fn perturbations(m: &IntMatrix) -> Vec<IntMatrix> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m.get(i, j);
            for w in [v + 1, v.wrapping_sub(1)] {
                if w != u64::MAX {
                    let mut p = m.clone();
                    p.set(i, j, w);
                    out.push(p);
                }
            }
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let id1 = IntMatrix::identity(1);
    let id2 = IntMatrix::identity(2);
    let witnesses = [
        (id1.clone(), id1.clone(), id1.clone(), id1.clone()),
        (id2.clone(), id2.clone(), id2.clone(), id2.clone()),
        (mat(&[&[2]]), mat(&[&[1, 1], &[1, 1]]), mat(&[&[1, 1]]), mat(&[&[1], &[1]])),
    ];
    let mut rejected = 0;
    for (a, b, r, s) in &witnesses {
        check!(verify_elementary(a, b, r, s).unwrap(), "elementary witness rejected: A={a}");
        for lag in 1..=2 {
            let accepts = verify_se_witness(a, b, r, s, lag).unwrap();
            // at lag 2 only the idempotent witnesses still factor A^2
            check!(accepts == (lag == 1 || a.pow(2).unwrap() == *a), "se witness lag {lag} A={a}");
        }
        for which in 0..4 {
            let base = [a, b, r, s][which];
            for m in perturbations(base) {
                let mut args = [a.clone(), b.clone(), r.clone(), s.clone()];
                args[which] = m;
                let [pa, pb, pr, ps] = &args;
                check!(!verify_elementary(pa, pb, pr, ps).unwrap_or(false), "elementary accepted a perturbation");
                check!(!verify_se_witness(pa, pb, pr, ps, 1).unwrap_or(false), "se accepted a perturbation");
                rejected += 1;
            }
        }
    }
    Ok(format!("{} witnesses accepted, {rejected} perturbations rejected", witnesses.len()))
}

fn criterion_9() -> Outcome {
    let mut rng = rng(9);
    let mut pairs: Vec<(MultiGraph, MultiGraph)> = vec![generate::non_sse_pair(), (generate::e2(), generate::f2())];
    for _ in 0..100 {
        let g = random_gk3(&mut rng, 10);
        let (_, h) = random_move(&mut rng, &g, 3);
        pairs.push((g, h));
        pairs.push((random_gk3(&mut rng, 8), random_gk3(&mut rng, 8)));
        pairs.push((random_normal_form(&mut rng, 2), random_normal_form(&mut rng, 2)));
    }
    let mut yes = 0;
    for (e, f) in &pairs {
        let (sse, se) = (decide_sse(e, f), decide_se(e, f));
        check!(sse.verdict == se.verdict, "decide_se and decide_sse differ");
        let Some(cert) = &sse.certificate else { continue };
        let (pe, pf) = certified_normal_forms(e, f, cert);
        for (i, &si) in cert.sigma.iter().enumerate() {
            check!(pe.p(i) == pf.p(si), "source length not preserved");
        }
        for (j, &tj) in cert.tau.iter().enumerate() {
            check!(pe.q(j) == pf.q(tj), "sink length not preserved");
        }
        let links = |p: &PointedGK3| p.trails.iter().map(|t| (t.source, t.sink)).collect::<BTreeSet<_>>();
        let mapped: BTreeSet<_> = links(&pe).into_iter().map(|(i, j)| (cert.sigma[i], cert.tau[j])).collect();
        check!(mapped == links(&pf), "trail-existence order not preserved");
        yes += 1;
    }
    Ok(format!("{} pairs, {yes} YES certificates", pairs.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("non-SSE example", 1, criterion_1),
        ("move invariance", 60, criterion_2),
        ("normal form", 30, criterion_3),
        ("Bezout trail shift", 10, criterion_4),
        ("GK dimension", 1, criterion_5),
        ("monoid canonical forms", 30, criterion_6),
        ("oracle consistency", 300, criterion_7),
        ("matrix verifiers", 1, criterion_8),
        ("SE and SSE coherence", 60, criterion_9),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(*limit) => Err(format!("{detail}; exceeded {limit}s")),
            other => other,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {}: {status} {name} ({:.2}s) {detail}", n + 1, elapsed.as_secs_f64());
        failed += usize::from(outcome.is_err());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
