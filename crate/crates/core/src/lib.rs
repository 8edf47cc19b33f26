//! Shifts of finite type as directed multigraphs.
//!
//! The crate covers Williams' graph moves, Gelfand-Kirillov dimension of
//! graph algebras, the structure theory of dimension-three graphs, a decision
//! procedure for strong shift equivalence of such graphs with checkable
//! certificates, the talented monoid, and a brute-force move search used to
//! cross-check the decider.

pub mod generate;
pub mod gk;
pub mod gk3;
pub mod graph;
pub mod invariants;
pub mod matrix;
pub mod monoid;
pub mod moves;
pub mod oracle;

pub use gk::{chain_lengths, gk_dimension, is_gk3, ChainLengths, GkDimension};
pub use gk3::{
    is_normal_form, pointed_structure, shift_trail_range, to_normal_form, trail_class, trail_distances, Gk3Error,
    PointedGK3, TrailClass,
};
pub use graph::{Cycle, CyclePoset, GraphError, MultiGraph};
pub use invariants::{
    decide_approx, decide_se, decide_sse, gk3_isomorphic, invariant_table, shift_sets, solve_offsets,
    verify_certificate, Decision, InvariantTable, SseCertificate, Verdict,
};
pub use matrix::{IntMatrix, MatrixError};
pub use monoid::{
    canonical_form, equal_elements, flow_once, flow_to_level, is_atom, CanonicalElement, Equality, LevelVector,
    MonoidElement, MonoidError,
};
pub use moves::{
    apply_trace, in_amalgamate, in_split, legal_moves, out_amalgamate, out_split, Move, MoveError, MoveTrace,
};
pub use oracle::{sse_search, verify_elementary, verify_se_witness, CanonKey, OracleError, SearchCache, SearchLimits};
