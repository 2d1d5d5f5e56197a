//! Correlator indexing and the dihedral canonical form.
//!
//! A correlator on an `N`-ring is named by one exponent pair `(m, n)` per
//! cavity, standing for the normal-ordered moment
//! `<a_1^{+m1} a_1^{n1} ... a_N^{+mN} a_N^{nN}>`. Rotations and the
//! reflection of the ring map a correlator onto an equal one, so only one
//! representative per dihedral orbit is kept.

use std::cmp::{Ordering, Reverse};
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct PairIndex {
    /// Creation exponent.
    pub m: u8,
    /// Annihilation exponent.
    pub n: u8,
}

impl PairIndex {
    pub const ZERO: PairIndex = PairIndex { m: 0, n: 0 };

    pub const fn new(m: u8, n: u8) -> Self {
        Self { m, n }
    }

    pub fn is_zero(self) -> bool {
        self.m == 0 && self.n == 0
    }

    pub fn degree(self) -> u32 {
        self.m as u32 + self.n as u32
    }

    /// Swaps creation and annihilation exponents (complex conjugation).
    pub fn conj(self) -> Self {
        Self { m: self.n, n: self.m }
    }

    /// Ordering key used by the canonical form: larger sum first, then larger
    /// creation exponent.
    fn key(self) -> (u8, u8) {
        (self.m + self.n, self.m)
    }
}

impl fmt::Display for PairIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.m, self.n)
    }
}

/// Exponent pairs for every cavity of the ring, identity excluded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CorrelatorIndex {
    pairs: Vec<PairIndex>,
}

impl CorrelatorIndex {
    /// Returns `None` for the identity (all pairs zero) or an empty ring.
    pub fn new(pairs: Vec<PairIndex>) -> Option<Self> {
        if pairs.is_empty() || pairs.iter().all(|p| p.is_zero()) {
            None
        } else {
            Some(Self { pairs })
        }
    }

    pub fn from_pairs(pairs: &[(u8, u8)]) -> Option<Self> {
        Self::new(pairs.iter().map(|&(m, n)| PairIndex::new(m, n)).collect())
    }

    /// The single-cavity moment `<a^{+m} a^n>` placed on cavity 0 of an
    /// `n_cavities`-ring.
    pub fn single(n_cavities: usize, m: u8, n: u8) -> Option<Self> {
        let mut pairs = vec![PairIndex::ZERO; n_cavities];
        pairs[0] = PairIndex::new(m, n);
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[PairIndex] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn max_exponent(&self) -> u8 {
        self.pairs.iter().map(|p| p.m.max(p.n)).max().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.pairs.iter().map(|p| p.degree()).sum()
    }

    /// Positions of cavities carrying a nonzero pair.
    pub fn support(&self) -> Vec<usize> {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn conj(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(|p| p.conj()).collect(),
        }
    }

    /// True if every cavity has equal creation and annihilation exponents.
    pub fn is_diagonal(&self) -> bool {
        self.pairs.iter().all(|p| p.m == p.n)
    }

    /// All `2N` images under rotations and reflection (with repetitions).
    pub fn dihedral_images(&self) -> Vec<CorrelatorIndex> {
        let n = self.pairs.len();
        let mut out = Vec::with_capacity(2 * n);
        for reflect in [false, true] {
            for shift in 0..n {
                let pairs = (0..n).map(|i| self.pairs[image_pos(n, shift, reflect, i)]).collect();
                out.push(CorrelatorIndex { pairs });
            }
        }
        out
    }

    /// Total order used to sort canonical lists: fewer occupied cavities
    /// first, then lower total degree, then larger canonical key.
    pub fn sort_key(&self) -> (usize, u32, Reverse<Vec<(u8, u8)>>) {
        (
            self.support().len(),
            self.degree(),
            Reverse(self.pairs.iter().map(|p| p.key()).collect()),
        )
    }
}

impl fmt::Display for CorrelatorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

#[inline]
fn image_pos(n: usize, shift: usize, reflect: bool, i: usize) -> usize {
    if reflect {
        (shift + n - i) % n
    } else {
        (shift + i) % n
    }
}

/// Compares two dihedral images of `pairs` without materializing them.
fn cmp_images(pairs: &[PairIndex], a: (usize, bool), b: (usize, bool)) -> Ordering {
    let n = pairs.len();
    for i in 0..n {
        let pa = pairs[image_pos(n, a.0, a.1, i)].key();
        let pb = pairs[image_pos(n, b.0, b.1, i)].key();
        match pa.cmp(&pb) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Unique representative of the dihedral orbit: the image whose sequence of
/// `(m+n, m)` keys is lexicographically largest. Nonzero pairs therefore
/// bunch up on the left with the heaviest pair first.
pub fn canonicalize(idx: &CorrelatorIndex) -> CorrelatorIndex {
    let pairs = &idx.pairs;
    let n = pairs.len();
    let mut best = (0usize, false);
    for reflect in [false, true] {
        for shift in 0..n {
            let cand = (shift, reflect);
            if cmp_images(pairs, cand, best) == Ordering::Greater {
                best = cand;
            }
        }
    }
    CorrelatorIndex {
        pairs: (0..n).map(|i| pairs[image_pos(n, best.0, best.1, i)]).collect(),
    }
}

pub fn is_canonical(idx: &CorrelatorIndex) -> bool {
    let n = idx.pairs.len();
    let id = (0usize, false);
    for reflect in [false, true] {
        for shift in 0..n {
            if cmp_images(&idx.pairs, (shift, reflect), id) == Ordering::Greater {
                return false;
            }
        }
    }
    true
}

/// One representative per dihedral orbit of the non-identity indices with
/// every exponent at most `n_max`, sorted by [`CorrelatorIndex::sort_key`].
pub fn enumerate_canonical(n_cavities: usize, n_max: usize) -> Vec<CorrelatorIndex> {
    assert!(n_cavities >= 1 && n_max >= 1 && n_max < u8::MAX as usize);
    let base = n_max + 1;
    let per_cavity = base * base;
    let total = per_cavity.checked_pow(n_cavities as u32).expect("index space overflow");
    let mut out = Vec::new();
    let mut pairs = vec![PairIndex::ZERO; n_cavities];
    for code in 1..total {
        let mut c = code;
        for p in pairs.iter_mut() {
            let local = c % per_cavity;
            c /= per_cavity;
            *p = PairIndex::new((local / base) as u8, (local % base) as u8);
        }
        let idx = CorrelatorIndex { pairs: pairs.clone() };
        if is_canonical(&idx) {
            out.push(idx);
        }
    }
    sort_canonical(&mut out);
    out
}

pub fn sort_canonical(list: &mut [CorrelatorIndex]) {
    list.sort_by_cached_key(|c| c.sort_key());
}

/// Size of the dihedral orbit of `idx`.
pub fn orbit_size(idx: &CorrelatorIndex) -> usize {
    idx.dihedral_images().into_iter().collect::<HashSet<_>>().len()
}
