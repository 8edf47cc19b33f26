//! Gelfand-Kirillov dimension of Leavitt path algebras, read off the graph.
//!
//! For a graph with disjoint cycles the dimension is `max(2*d1 - 1, 2*d2)`,
//! where `d1` is the longest chain of cycles and `d2` the longest chain whose
//! last cycle has an exit. Otherwise it is infinite.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{GraphError, MultiGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLengths {
    pub d1: usize,
    pub d2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GkDimension {
    Finite(usize),
    Infinite,
}

impl fmt::Display for GkDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GkDimension::Finite(d) => write!(f, "{d}"),
            GkDimension::Infinite => f.write_str("∞"),
        }
    }
}

pub fn chain_lengths(g: &MultiGraph) -> Result<ChainLengths, GraphError> {
    let poset = g.cycle_poset()?;
    let k = poset.cycles.len();
    let has_exit: Vec<bool> = poset
        .cycles
        .iter()
        .map(|c| c.vertices.iter().any(|&v| g.out_edges(v).iter().any(|e| !c.edges.contains(e))))
        .collect();
    // longest[c]: longest chain starting at c (c first, going down the order)
    let mut order: Vec<usize> = (0..k).collect();
    // cycles with fewer cycles below them come first
    order.sort_by_key(|&c| (0..k).filter(|&d| poset.leq(d, c)).count());
    let mut longest = vec![1usize; k];
    let mut longest_exit = vec![0usize; k];
    for &c in &order {
        for d in 0..k {
            if d != c && poset.leq(d, c) {
                longest[c] = longest[c].max(longest[d] + 1);
                if longest_exit[d] > 0 {
                    longest_exit[c] = longest_exit[c].max(longest_exit[d] + 1);
                }
            }
        }
        if has_exit[c] {
            longest_exit[c] = longest_exit[c].max(1);
        }
    }
    Ok(ChainLengths {
        d1: longest.iter().copied().max().unwrap_or(0),
        d2: longest_exit.iter().copied().max().unwrap_or(0),
    })
}

pub fn gk_dimension(g: &MultiGraph) -> GkDimension {
    match chain_lengths(g) {
        Err(_) => GkDimension::Infinite,
        Ok(ChainLengths { d1: 0, .. }) => GkDimension::Finite(0),
        Ok(ChainLengths { d1, d2 }) => GkDimension::Finite((2 * d1 - 1).max(2 * d2)),
    }
}

pub fn is_gk3(g: &MultiGraph) -> bool {
    g.is_connected() && g.is_essential() && gk_dimension(g) == GkDimension::Finite(3)
}
