//! High-rate LDPC precode: progressive-edge-growth parity structure and a
//! systematic encoder obtained by GF(2) elimination.

use crate::error::{Error, Result};
use crate::rng::{StreamKey, StreamTag};
use rand::Rng;
use std::fmt::Write as _;

/// Message length of the reference configuration.
pub const DEFAULT_K: usize = 9900;
/// Precoded length of the reference configuration (rate 0.99).
pub const DEFAULT_K_PRIME: usize = 10000;
pub const DEFAULT_COLUMN_WEIGHT: usize = 3;

/// A systematic binary precode `v = (u, A u)`.
///
/// `rows` holds the parity-check relations over the `k_prime` positions of
/// `v`; `generator` holds, for every parity position `k + r`, the packed set of
/// message bits it sums. The two are consistent by construction and checked in
/// [`Precode::from_rows`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precode {
    k: usize,
    k_prime: usize,
    rows: Vec<Vec<u32>>,
    generator: Vec<Vec<u64>>,
}

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn pack(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; words(bits.len())];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 64] |= ((b & 1) as u64) << (i % 64);
    }
    out
}

impl Precode {
    /// Rate-one code with no parity relations (`k_prime == k`). Useful for
    /// plain LT experiments and toy instances.
    pub fn identity(k: usize) -> Self {
        Self { k, k_prime: k, rows: Vec::new(), generator: Vec::new() }
    }

    /// Regular column-weight `column_weight` PEG construction with
    /// `k_prime - k` checks, put into systematic form. Construction is a pure
    /// function of the arguments; if the random structure is rank deficient a
    /// fresh attempt is made under the next derived seed.
    pub fn peg(k: usize, k_prime: usize, column_weight: usize, seed: u64) -> Result<Self> {
        if k == 0 || k_prime <= k {
            return Err(Error::Precode(format!("need 0 < k < k_prime, got k={k}, k_prime={k_prime}")));
        }
        let m = k_prime - k;
        if column_weight < 1 || column_weight > m {
            return Err(Error::Precode(format!("column weight {column_weight} incompatible with {m} checks")));
        }
        for attempt in 0..16u64 {
            let rows = peg_rows(m, k_prime, column_weight, StreamKey::new(seed, attempt, StreamTag::Precode));
            if let Ok(code) = Self::systematize(k, k_prime, rows) {
                return Ok(code);
            }
        }
        Err(Error::Precode("no full-rank construction found".into()))
    }

    /// The reference precode: `k = 9900`, `k' = 10000`, column weight 3.
    pub fn reference(seed: u64) -> Result<Self> {
        Self::peg(DEFAULT_K, DEFAULT_K_PRIME, DEFAULT_COLUMN_WEIGHT, seed)
    }

    /// Builds a precode from parity rows that are already in systematic
    /// position: the submatrix on columns `k..k_prime` must be invertible.
    pub fn from_rows(k: usize, k_prime: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.len() != k_prime - k {
            return Err(Error::Precode(format!("{} rows for {} parity positions", rows.len(), k_prime - k)));
        }
        let code = Self::systematize(k, k_prime, rows.clone())?;
        if code.rows != normalize_rows(rows) {
            return Err(Error::Precode("parity columns k..k_prime are not invertible".into()));
        }
        Ok(code)
    }

    /// Gaussian elimination choosing pivots from the last column backwards,
    /// then relabels positions so the pivot columns become the parity block.
    fn systematize(k: usize, k_prime: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        let m = k_prime - k;
        let rows = normalize_rows(rows);
        for r in &rows {
            if r.len() < 2 {
                return Err(Error::Precode("parity relation with fewer than two participants".into()));
            }
            if r.iter().any(|&c| c as usize >= k_prime) {
                return Err(Error::Precode("column index out of range".into()));
            }
        }
        let w = words(k_prime);
        let mut dense: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| {
                let mut v = vec![0u64; w];
                for &c in r {
                    v[c as usize / 64] ^= 1u64 << (c % 64);
                }
                v
            })
            .collect();
        let mut pivot_col = vec![usize::MAX; m];
        let mut is_pivot = vec![false; k_prime];
        let mut rank = 0;
        for col in (0..k_prime).rev() {
            if rank == m {
                break;
            }
            let (wi, bit) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..m).find(|&r| dense[r][wi] & bit != 0) else { continue };
            dense.swap(rank, p);
            let pivot_row = dense[rank].clone();
            for (r, row) in dense.iter_mut().enumerate() {
                if r != rank && row[wi] & bit != 0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                }
            }
            pivot_col[rank] = col;
            is_pivot[col] = true;
            rank += 1;
        }
        if rank < m {
            return Err(Error::Precode(format!("parity structure has rank {rank} < {m}")));
        }
        // new position of every original column
        let mut position = vec![0u32; k_prime];
        let mut next = 0u32;
        for col in 0..k_prime {
            if !is_pivot[col] {
                position[col] = next;
                next += 1;
            }
        }
        for col in 0..k_prime {
            if is_pivot[col] {
                position[col] = next;
                next += 1;
            }
        }
        // generator rows in parity-position order
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&r| position[pivot_col[r]]);
        let dense: Vec<Vec<u64>> = order.iter().map(|&r| std::mem::take(&mut dense[r])).collect();
        let rows = normalize_rows(rows.iter().map(|r| r.iter().map(|&c| position[c as usize]).collect()).collect());
        let generator = dense
            .iter()
            .map(|row| {
                let mut g = vec![0u64; words(k)];
                for col in 0..k_prime {
                    if !is_pivot[col] && row[col / 64] >> (col % 64) & 1 == 1 {
                        let p = position[col] as usize;
                        g[p / 64] |= 1u64 << (p % 64);
                    }
                }
                g
            })
            .collect();
        Ok(Self { k, k_prime, rows, generator })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn k_prime(&self) -> usize {
        self.k_prime
    }

    pub fn num_checks(&self) -> usize {
        self.rows.len()
    }

    /// Parity relations, each a sorted list of positions of `v`.
    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.k_prime as f64
    }

    /// Systematic encoding `u -> (u, A u)`.
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, actual: u.len() });
        }
        let packed = pack(u);
        let mut v = Vec::with_capacity(self.k_prime);
        v.extend(u.iter().map(|b| b & 1));
        for g in &self.generator {
            let ones: u32 = g.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            v.push((ones & 1) as u8);
        }
        Ok(v)
    }

    /// True iff every parity relation holds on `v`.
    pub fn checks_pass(&self, v: &[u8]) -> bool {
        v.len() == self.k_prime
            && self.rows.iter().all(|r| r.iter().fold(0u8, |acc, &c| acc ^ v[c as usize]) & 1 == 0)
    }

    /// Number of unsatisfied relations.
    pub fn syndrome_weight(&self, v: &[u8]) -> usize {
        self.rows.iter().filter(|r| r.iter().fold(0u8, |acc, &c| acc ^ v[c as usize]) & 1 == 1).count()
    }

    /// Text form: `k`, `k_prime` header lines and one `row` line of positions
    /// per parity relation.
    pub fn to_text(&self) -> String {
        let mut s = format!("# precode\nk {}\nk_prime {}\n", self.k, self.k_prime);
        for r in &self.rows {
            s.push_str("row");
            for c in r {
                let _ = write!(s, " {c}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (mut k, mut kp) = (None, None);
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| Error::Parse { line: i + 1, reason: reason.to_string() };
            let mut it = line.split_whitespace();
            match it.next() {
                Some("k") => k = Some(it.next().and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| err("bad k"))?),
                Some("k_prime") => {
                    kp = Some(it.next().and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| err("bad k_prime"))?)
                }
                Some("row") => rows.push(it.map(|t| t.parse::<u32>().map_err(|_| err("bad index"))).collect::<Result<Vec<_>>>()?),
                _ => return Err(err("unknown record")),
            }
        }
        let k = k.ok_or(Error::Parse { line: 0, reason: "missing k".into() })?;
        let kp = kp.ok_or(Error::Parse { line: 0, reason: "missing k_prime".into() })?;
        if kp == k && rows.is_empty() {
            return Ok(Self::identity(k));
        }
        if kp < k {
            return Err(Error::Parse { line: 0, reason: "k_prime < k".into() });
        }
        Self::from_rows(k, kp, rows)
    }
}

fn normalize_rows(rows: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    rows.into_iter()
        .map(|mut r| {
            r.sort_unstable();
            r
        })
        .collect()
}

/// Progressive edge growth: each new edge of a column goes to a check that is
/// as far as possible from it in the current graph, breaking ties by lowest
/// check degree and then uniformly at random.
fn peg_rows(m: usize, n: usize, wc: usize, key: StreamKey) -> Vec<Vec<u32>> {
    let mut rng = key.rng();
    let mut row_adj: Vec<Vec<u32>> = vec![Vec::new(); m];
    let mut col_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut row_seen = vec![u32::MAX; m];
    let mut col_seen = vec![u32::MAX; n];
    let mut stamp = 0u32;
    let mut candidates = Vec::with_capacity(m);

    for col in 0..n {
        for edge in 0..wc {
            candidates.clear();
            if edge == 0 {
                candidates.extend(0..m);
            } else {
                stamp += 1;
                let mut frontier: Vec<usize> = col_adj[col].iter().map(|&r| r as usize).collect();
                for &r in &frontier {
                    row_seen[r] = stamp;
                }
                col_seen[col] = stamp;
                let mut reached = frontier.len();
                loop {
                    let mut next = Vec::new();
                    for &r in &frontier {
                        for &c in &row_adj[r] {
                            let c = c as usize;
                            if col_seen[c] == stamp {
                                continue;
                            }
                            col_seen[c] = stamp;
                            for &r2 in &col_adj[c] {
                                let r2 = r2 as usize;
                                if row_seen[r2] != stamp {
                                    row_seen[r2] = stamp;
                                    next.push(r2);
                                }
                            }
                        }
                    }
                    if next.is_empty() {
                        candidates.extend((0..m).filter(|&r| row_seen[r] != stamp));
                        break;
                    }
                    reached += next.len();
                    if reached == m {
                        candidates.extend(next);
                        break;
                    }
                    frontier = next;
                }
                if candidates.is_empty() {
                    candidates.extend((0..m).filter(|&r| !col_adj[col].contains(&(r as u32))));
                }
            }
            let min_deg = candidates.iter().map(|&r| row_adj[r].len()).min().expect("candidate rows");
            candidates.retain(|&r| row_adj[r].len() == min_deg);
            let r = candidates[rng.gen_range(0..candidates.len())];
            row_adj[r].push(col as u32);
            col_adj[col].push(r as u32);
        }
    }
    row_adj
}
