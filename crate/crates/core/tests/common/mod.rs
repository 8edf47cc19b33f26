#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use sft_core::generate::seed_from_env;
use sft_core::gk3::PointedGK3;
use sft_core::invariants::{decide_sse, verify_certificate, Verdict};
use sft_core::{apply_trace, pointed_structure, MonoidElement, MultiGraph};

pub fn rng(salt: u64) -> StdRng {
    StdRng::seed_from_u64(seed_from_env(0x5f7) ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// A random element with 1 to 4 terms over the vertices of `g`.
pub fn random_element<R: Rng>(rng: &mut R, g: &MultiGraph) -> MonoidElement {
    let mut x = MonoidElement::zero();
    for _ in 0..rng.gen_range(1..=4) {
        let v = g.vertices().choose(rng).expect("nonempty graph");
        x.add_term(v, rng.gen_range(-3..=3), rng.gen_range(1..=3)).unwrap();
    }
    x
}

/// `decide_sse` says YES and its certificate checks out.
pub fn certified_yes(e: &MultiGraph, f: &MultiGraph) -> Result<(), String> {
    let d = decide_sse(e, f);
    if d.verdict != Verdict::Yes {
        return Err(format!("verdict {:?}\nE = {}\nF = {}", d.verdict, e.to_json(), f.to_json()));
    }
    let cert = d.certificate.ok_or("YES without certificate")?;
    verify_certificate(e, f, &cert)
        .map_err(|r| format!("certificate rejected: {r}\nE = {}\nF = {}", e.to_json(), f.to_json()))
}

/// Pointed structures of both normal forms recorded in a certificate.
pub fn certified_normal_forms(
    e: &MultiGraph,
    f: &MultiGraph,
    cert: &sft_core::SseCertificate,
) -> (PointedGK3, PointedGK3) {
    let en = apply_trace(e, &cert.e_normal_form).unwrap();
    let fn_ = apply_trace(f, &cert.f_normal_form).unwrap();
    (pointed_structure(&en).unwrap(), pointed_structure(&fn_).unwrap())
}
