//! Output-node degree distributions `Omega(x) = sum_d Omega_d x^d`.

use crate::error::{Error, Result};
use std::fmt::Write as _;

/// A degree distribution as `(degree, probability)` pairs in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    name: String,
    entries: Vec<(u32, f64)>,
    cdf: Vec<f64>,
}

const OMEGA_1: &[(u32, f64)] = &[
    (1, 0.0174), (2, 0.3488), (3, 0.2309), (4, 0.0695), (5, 0.0873), (6, 0.0002), (7, 0.0805),
    (8, 0.0004), (11, 0.0191), (12, 0.0518), (20, 0.0122), (41, 0.031), (60, 0.022), (81, 0.002),
    (320, 0.0269),
];
const OMEGA_2: &[(u32, f64)] = &[
    (1, 0.0174), (2, 0.3488), (3, 0.2309), (4, 0.0695), (5, 0.0873), (6, 0.0002), (7, 0.0805),
    (8, 0.0004), (11, 0.0191), (12, 0.0518), (20, 0.0121), (41, 0.03), (60, 0.022), (81, 0.003),
    (300, 0.027),
];
const OMEGA_3: &[(u32, f64)] = &[
    (1, 0.0174), (2, 0.3488), (3, 0.2307), (4, 0.07), (5, 0.087), (6, 0.0003), (7, 0.0803),
    (8, 0.0005), (11, 0.0191), (12, 0.0518), (20, 0.0122), (31, 0.031), (40, 0.0218), (61, 0.002),
    (80, 0.0271),
];
const OMEGA_4: &[(u32, f64)] = &[
    (1, 0.0066), (2, 0.4639), (3, 0.1769), (4, 0.0641), (5, 0.0656), (7, 0.0994), (15, 0.0589),
    (25, 0.0285), (40, 0.0138), (55, 0.0223),
];

/// Tolerance on the total probability mass.
pub const MASS_TOLERANCE: f64 = 1e-9;

impl DegreeDistribution {
    /// Builds and validates a distribution. Entries may come in any order.
    pub fn new(name: impl Into<String>, mut entries: Vec<(u32, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("no entries".into()));
        }
        entries.sort_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidDistribution(format!("duplicate degree {}", w[0].0)));
            }
        }
        let mut total = 0.0;
        let mut cdf = Vec::with_capacity(entries.len());
        for &(d, p) in &entries {
            if d == 0 {
                return Err(Error::InvalidDistribution("degree 0".into()));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidDistribution(format!("probability {p} of degree {d} outside (0, 1]")));
            }
            total += p;
            cdf.push(total);
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { name: name.into(), entries, cdf })
    }

    /// One of the four tabulated distributions, `which` in `1..=4`.
    pub fn omega(which: usize) -> Result<Self> {
        let entries = match which {
            1 => OMEGA_1,
            2 => OMEGA_2,
            3 => OMEGA_3,
            4 => OMEGA_4,
            other => return Err(Error::UnknownDistribution(other)),
        };
        Self::new(format!("omega{which}"), entries.to_vec())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.last().map(|e| e.0).unwrap_or(0)
    }

    /// Probability of a given degree (zero when absent).
    pub fn coefficient(&self, degree: u32) -> f64 {
        self.entries.iter().find(|e| e.0 == degree).map(|e| e.1).unwrap_or(0.0)
    }

    /// Average output degree `Omega'(1)`.
    pub fn mean_degree(&self) -> f64 {
        self.entries.iter().map(|&(d, p)| d as f64 * p).sum()
    }

    /// Inverse-CDF sampling: the smallest degree whose cumulative mass exceeds
    /// `u`. Values of `u` past the accumulated mass (rounding) map to the
    /// largest degree.
    pub fn sample(&self, u: f64) -> u32 {
        let idx = self.cdf.partition_point(|&c| c <= u);
        self.entries[idx.min(self.entries.len() - 1)].0
    }

    /// Text form: a `name <label>` line followed by one `degree probability`
    /// line per entry. `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut s = format!("# degree distribution\nname {}\n", self.name);
        for &(d, p) in &self.entries {
            let _ = writeln!(s, "{d} {p}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut name = String::from("custom");
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("name ") {
                name = rest.trim().to_string();
                continue;
            }
            let mut it = line.split_whitespace();
            let parse_err = |reason: &str| Error::Parse { line: i + 1, reason: reason.to_string() };
            let d: u32 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err("bad degree"))?;
            let p: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err("bad probability"))?;
            if it.next().is_some() {
                return Err(parse_err("trailing tokens"));
            }
            entries.push((d, p));
        }
        Self::new(name, entries)
    }
}

/// Free-function form of [`DegreeDistribution::sample`].
pub fn sample_degree(dist: &DegreeDistribution, u: f64) -> u32 {
    dist.sample(u)
}
