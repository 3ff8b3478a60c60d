//! Per-pair uniforms with an enumerable low end.
//!
//! Each unordered pair `{i, j}` gets a uniform `u` on `[0, 1)` and an edge is
//! present iff `u < g(d)`. Drawing `u` naively would force every sampler to
//! touch all `n(n-1)/2` pairs, so the low end of `[0, 1)` is cut into dyadic
//! shells `[2^{-m-1}, 2^{-m})` for `m ≥ BASE_LEVEL`. For each level `m` an
//! independent sparse set of pairs is drawn with geometric jumps over the
//! lexicographic pair order; a pair's shell is the deepest level whose set
//! contains it. The inclusion rates are chosen so the shell of a pair has
//! exactly the dyadic probability, which makes `u` exactly uniform.
//!
//! All pairs with `u < 2^{-m}` are then precisely the pairs recorded at some
//! level `≥ m`, and a sampler can list them without scanning the rest.

use rand::Rng;

use crate::rng::{self, tag};

/// Shallowest level; pairs outside every sparse set have `u ≥ 2^{-BASE_LEVEL}`.
pub const BASE_LEVEL: u32 = 8;
/// Deepest level; pairs recorded here have `u < 2^{-TOP_LEVEL}`.
pub const TOP_LEVEL: u32 = 60;

pub const BASE_P: f64 = 1.0 / (1u64 << BASE_LEVEL) as f64;

fn inclusion_rate(m: u32) -> f64 {
    if m == TOP_LEVEL {
        2f64.powi(-(TOP_LEVEL as i32))
    } else {
        let h = 2f64.powi(-(m as i32) - 1);
        h / (1.0 - h)
    }
}

/// Number of unordered pairs among `n` nodes.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

fn row_start(n: u64, i: u64) -> u64 {
    i * (2 * n - i - 1) / 2
}

/// Position of `{i, j}` in the lexicographic order of pairs `(a, b)`, `a < b`.
pub fn pair_index(n: usize, i: usize, j: usize) -> u64 {
    let (a, b) = if i < j {
        (i as u64, j as u64)
    } else {
        (j as u64, i as u64)
    };
    row_start(n as u64, a) + (b - a - 1)
}

/// Inverse of [`pair_index`].
pub fn pair_from_index(n: usize, idx: u64) -> (usize, usize) {
    let n64 = n as u64;
    let (mut lo, mut hi) = (0u64, n64 - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if row_start(n64, mid) <= idx {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = lo;
    let b = a + 1 + (idx - row_start(n64, a));
    (a as usize, b as usize)
}

/// Sparse record of every pair whose uniform falls below `2^{-BASE_LEVEL}`.
#[derive(Clone, Debug)]
pub struct PairLadder {
    seed: u64,
    n: usize,
    /// `(pair index, deepest level)`, sorted by pair index.
    entries: Vec<(u64, u8)>,
}

impl PairLadder {
    pub fn generate(seed: u64, n: usize) -> Self {
        let total = pair_count(n);
        let mut entries = Vec::new();
        if total > 0 {
            for m in BASE_LEVEL..=TOP_LEVEL {
                let q = inclusion_rate(m);
                let log_keep = (-q).ln_1p();
                let mut rng = rng::stream(seed, tag::LEVEL, m as u64);
                let mut pos: u64 = 0;
                loop {
                    let u: f64 = 1.0 - rng.random::<f64>();
                    let skip = (u.ln() / log_keep).floor();
                    if skip >= (total - pos) as f64 {
                        break;
                    }
                    pos += skip as u64;
                    entries.push((pos, m as u8));
                    pos += 1;
                    if pos >= total {
                        break;
                    }
                }
            }
        }
        entries.sort_unstable();
        // Keep the deepest level per pair: after sorting, it is the last.
        let mut deduped: Vec<(u64, u8)> = Vec::with_capacity(entries.len());
        for e in entries {
            match deduped.last_mut() {
                Some(last) if last.0 == e.0 => last.1 = e.1,
                _ => deduped.push(e),
            }
        }
        PairLadder {
            seed,
            n,
            entries: deduped,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn entries(&self) -> &[(u64, u8)] {
        &self.entries
    }

    pub fn level_of(&self, idx: u64) -> Option<u8> {
        self.entries
            .binary_search_by_key(&idx, |e| e.0)
            .ok()
            .map(|k| self.entries[k].1)
    }

    /// The pair's uniform, given its level from [`level_of`](Self::level_of).
    #[inline]
    pub fn uniform_with_level(&self, i: usize, j: usize, level: Option<u8>) -> f64 {
        let v = rng::pair_uniform(self.seed, tag::EDGE, i, j);
        match level {
            None => BASE_P + (1.0 - BASE_P) * v,
            Some(m) if m as u32 == TOP_LEVEL => v * 2f64.powi(-(TOP_LEVEL as i32)),
            Some(m) => 2f64.powi(-(m as i32) - 1) * (1.0 + v),
        }
    }

    pub fn uniform(&self, i: usize, j: usize) -> f64 {
        let level = self.level_of(pair_index(self.n, i, j));
        self.uniform_with_level(i, j, level)
    }

    /// Pairs whose uniform lies below `2^{-min_level}` (requires
    /// `min_level ≥ BASE_LEVEL`), with their levels.
    pub fn pairs_below(&self, min_level: u32) -> impl Iterator<Item = (usize, usize, u8)> + '_ {
        debug_assert!(min_level >= BASE_LEVEL);
        self.entries
            .iter()
            .filter(move |e| e.1 as u32 >= min_level)
            .map(move |&(idx, m)| {
                let (i, j) = pair_from_index(self.n, idx);
                (i, j, m)
            })
    }
}
