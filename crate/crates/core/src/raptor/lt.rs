//! LT output-symbol generation from a seed both parties share.

use super::degree::DegreeDistribution;
use crate::error::{invalid, Error, Result};
use crate::rng::splitmix64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Seeded { seed: u64, dist: Arc<DegreeDistribution> },
    Fixed,
}

/// The LT graph of one block: index set `G_i` of every output symbol.
///
/// A seeded plan is extended lazily; `G_i` depends only on `(seed, dist,
/// k_prime, i)`, so both parties regenerate identical graphs independently of
/// how far or in what chunks they extend them.
#[derive(Debug, Clone, PartialEq)]
pub struct RaptorBlockPlan {
    k_prime: usize,
    source: Source,
    index_sets: Vec<Vec<u32>>,
}

impl RaptorBlockPlan {
    pub fn seeded(seed: u64, dist: Arc<DegreeDistribution>, k_prime: usize) -> Self {
        Self { k_prime, source: Source::Seeded { seed, dist }, index_sets: Vec::new() }
    }

    /// A hand-built graph that cannot be extended past its given symbols.
    pub fn fixed(k_prime: usize, index_sets: Vec<Vec<u32>>) -> Result<Self> {
        let mut sets = Vec::with_capacity(index_sets.len());
        for mut s in index_sets {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.iter().any(|&i| i as usize >= k_prime) {
                return Err(invalid("index_sets", "empty set or index out of range"));
            }
            sets.push(s);
        }
        Ok(Self { k_prime, source: Source::Fixed, index_sets: sets })
    }

    pub fn k_prime(&self) -> usize {
        self.k_prime
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.source {
            Source::Seeded { seed, .. } => Some(*seed),
            Source::Fixed => None,
        }
    }

    pub fn distribution(&self) -> Option<&Arc<DegreeDistribution>> {
        match &self.source {
            Source::Seeded { dist, .. } => Some(dist),
            Source::Fixed => None,
        }
    }

    /// Number of symbols generated so far.
    pub fn len(&self) -> usize {
        self.index_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_sets.is_empty()
    }

    /// Makes sure the first `n` index sets exist.
    pub fn ensure(&mut self, n: usize) -> Result<()> {
        if n <= self.index_sets.len() {
            return Ok(());
        }
        match &self.source {
            Source::Fixed => Err(Error::LengthMismatch { expected: self.index_sets.len(), actual: n }),
            Source::Seeded { seed, dist } => {
                let (seed, dist) = (*seed, dist.clone());
                let start = self.index_sets.len();
                self.index_sets.extend((start..n).map(|i| index_set(seed, &dist, self.k_prime, i as u64)));
                Ok(())
            }
        }
    }

    pub fn index_set(&self, i: usize) -> &[u32] {
        &self.index_sets[i]
    }

    pub fn index_sets(&self) -> &[Vec<u32>] {
        &self.index_sets
    }
}

/// `G_i`: degree by inverse CDF, then distinct indices by rejection, stored
/// ascending.
fn index_set(seed: u64, dist: &DegreeDistribution, k_prime: usize, i: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(i.wrapping_add(0x632b_e59b_d9b4_e019))));
    let degree = (dist.sample(rng.gen::<f64>()) as usize).min(k_prime);
    let mut set: Vec<u32> = Vec::with_capacity(degree);
    while set.len() < degree {
        let j = rng.gen_range(0..k_prime as u32);
        if let Err(pos) = set.binary_search(&j) {
            set.insert(pos, j);
        }
    }
    set
}

/// Output symbols `from..from + count`: `c_i` is the XOR of `v` over `G_i`.
pub fn lt_encode(v: &[u8], plan: &mut RaptorBlockPlan, from: usize, count: usize) -> Result<Vec<u8>> {
    if v.len() != plan.k_prime {
        return Err(Error::LengthMismatch { expected: plan.k_prime, actual: v.len() });
    }
    if count == 0 {
        return Err(invalid("count", "must be >= 1"));
    }
    plan.ensure(from + count)?;
    Ok(plan.index_sets[from..from + count]
        .iter()
        .map(|g| g.iter().fold(0u8, |acc, &j| acc ^ v[j as usize]) & 1)
        .collect())
}
