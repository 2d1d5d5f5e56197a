//! Support patterns: the geometry of the occupied cavities of a correlator
//! on the ring, up to rotation and reflection.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::index::CorrelatorIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    /// One cavity.
    A,
    /// Two adjacent cavities.
    B,
    /// Three consecutive cavities.
    C,
    /// Four consecutive cavities.
    D,
    /// Two cavities at distance two.
    E,
    Other,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pattern::A => "a",
            Pattern::B => "b",
            Pattern::C => "c",
            Pattern::D => "d",
            Pattern::E => "e",
            Pattern::Other => "other",
        };
        f.write_str(s)
    }
}

fn ring_distance(n: usize, i: usize, j: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// True if the support is a run of consecutive cavities on the ring.
fn is_consecutive(n: usize, support: &[usize]) -> bool {
    let k = support.len();
    if k == n {
        return true;
    }
    // A run of length k < n has exactly one occupied site whose left
    // neighbour is empty.
    let occupied = |i: usize| support.contains(&i);
    let starts = support.iter().filter(|&&i| !occupied((i + n - 1) % n)).count();
    starts == 1
}

pub fn classify_pattern(idx: &CorrelatorIndex) -> Pattern {
    let n = idx.len();
    let support = idx.support();
    match support.len() {
        1 => Pattern::A,
        2 => match ring_distance(n, support[0], support[1]) {
            1 => Pattern::B,
            2 => Pattern::E,
            _ => Pattern::Other,
        },
        3 if is_consecutive(n, &support) => Pattern::C,
        4 if is_consecutive(n, &support) => Pattern::D,
        _ => Pattern::Other,
    }
}
