//! Multidimensional reconciliation: normalized `d`-dimensional Gaussian
//! vectors are rotated so that Bob's binary spherical codeword rides a virtual
//! binary-input AWGN channel to Alice.
//!
//! The orthogonal map `M(y', c')` with `M y' = c'` is built from the
//! left-multiplication matrices of the real normed division algebras
//! (reals, complex numbers, quaternions, octonions), see [`AlgebraBasis`].

use crate::error::{Error, Result};
use crate::real::Real;

/// Dimensions with a normed division algebra.
pub const SUPPORTED_DIMS: [usize; 4] = [1, 2, 4, 8];

/// Octonion multiplication: `e_a e_b = e_c` for each triple, cyclically.
const FANO_TRIPLES: [[usize; 3]; 7] = [[1, 2, 3], [1, 4, 5], [1, 7, 6], [2, 4, 6], [2, 5, 7], [3, 4, 7], [3, 6, 5]];

pub fn check_dim(d: usize) -> Result<()> {
    if SUPPORTED_DIMS.contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

/// Unit vector together with the norm it was scaled by.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedVector<F: Real = f64> {
    coords: Vec<F>,
    norm: F,
}

impl<F: Real> NormalizedVector<F> {
    pub fn coords(&self) -> &[F] {
        &self.coords
    }

    /// Norm of the original vector.
    pub fn norm(&self) -> F {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// `x / ||x||`. Rejects zero vectors and unsupported dimensions.
pub fn normalize<F: Real>(x: &[F]) -> Result<NormalizedVector<F>> {
    check_dim(x.len())?;
    let norm = x.iter().fold(F::zero(), |a, &v| a + v * v).sqrt();
    if !(norm > F::zero()) || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(NormalizedVector { coords: x.iter().map(|&v| v / norm).collect(), norm })
}

/// Point `((-1)^{c_1}, ..., (-1)^{c_d}) / sqrt(d)` of the binary spherical code.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCodeword<F: Real = f64> {
    coords: Vec<F>,
}

impl<F: Real> SphericalCodeword<F> {
    pub fn coords(&self) -> &[F] {
        &self.coords
    }

    /// Bits recovered from coordinate signs.
    pub fn bits(&self) -> Vec<u8> {
        self.coords.iter().map(|&c| u8::from(c < F::zero())).collect()
    }
}

pub fn to_spherical<F: Real>(bits: &[u8]) -> Result<SphericalCodeword<F>> {
    check_dim(bits.len())?;
    let a = F::one() / F::from_count(bits.len()).sqrt();
    Ok(SphericalCodeword { coords: bits.iter().map(|&b| if b & 1 == 0 { a } else { -a }).collect() })
}

/// Orthogonal `d x d` matrices `A_1 = I, ..., A_d` with
/// `A_i^T A_j + A_j^T A_i = 0` for `i != j`, so `{A_i y}` is an orthonormal
/// basis for every unit `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraBasis<F: Real = f64> {
    d: usize,
    /// `d` row-major `d x d` matrices.
    mats: Vec<Vec<F>>,
}

impl<F: Real> AlgebraBasis<F> {
    /// Left multiplication by the unit elements `e_0..e_{d-1}` of the reals,
    /// complex numbers, quaternions or octonions.
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        let table = sign_table(d);
        let mats = (0..d)
            .map(|i| {
                let mut m = vec![F::zero(); d * d];
                for j in 0..d {
                    let (k, s) = table[i][j];
                    m[k * d + j] = if s > 0 { F::one() } else { -F::one() };
                }
                m
            })
            .collect();
        Ok(Self { d, mats })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Row-major matrix `A_{i+1}`.
    pub fn matrix(&self, i: usize) -> &[F] {
        &self.mats[i]
    }

    pub fn matrices(&self) -> &[Vec<F>] {
        &self.mats
    }

    /// Text fixture: one `A<i>` header per matrix followed by `d` rows.
    pub fn to_text(&self) -> String {
        let mut s = format!("# algebra basis\nd {}\n", self.d);
        for (i, m) in self.mats.iter().enumerate() {
            s.push_str(&format!("A{}\n", i + 1));
            for r in 0..self.d {
                let row: Vec<String> = (0..self.d).map(|c| format!("{}", m[r * self.d + c].to_f64_lossy())).collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s
    }
}

/// `table[i][j] = (k, sign)` with `e_i e_j = sign e_k`.
fn sign_table(d: usize) -> Vec<Vec<(usize, i8)>> {
    let mut t = vec![vec![(0usize, 1i8); d]; d];
    for (j, entry) in t[0].iter_mut().enumerate() {
        *entry = (j, 1);
    }
    for i in 1..d {
        t[i][0] = (i, 1);
        t[i][i] = (0, -1);
    }
    for tri in FANO_TRIPLES {
        if tri.iter().any(|&a| a >= d) {
            continue;
        }
        for r in 0..3 {
            let (a, b, c) = (tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]);
            t[a][b] = (c, 1);
            t[b][a] = (c, -1);
        }
    }
    t
}

/// Orthogonal map with `M y' = c'`, published by Bob.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingFunction<F: Real = f64> {
    d: usize,
    matrix: Vec<F>,
    coefficients: Vec<F>,
}

impl<F: Real> MappingFunction<F> {
    /// Rebuilds `M = sum_i alpha_i A_i` from its coefficient vector.
    pub fn from_coefficients(coefficients: Vec<F>, basis: &AlgebraBasis<F>) -> Result<Self> {
        let d = basis.dim();
        if coefficients.len() != d {
            return Err(Error::LengthMismatch { expected: d, actual: coefficients.len() });
        }
        let mut matrix = vec![F::zero(); d * d];
        for (alpha, a) in coefficients.iter().zip(basis.matrices()) {
            for (m, &v) in matrix.iter_mut().zip(a) {
                *m += *alpha * v;
            }
        }
        Ok(Self { d, matrix, coefficients })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Row-major matrix.
    pub fn matrix(&self) -> &[F] {
        &self.matrix
    }

    /// `alpha_i = <c', A_i y'>`; the compact form sent over the wire.
    pub fn coefficients(&self) -> &[F] {
        &self.coefficients
    }

    pub fn apply(&self, x: &[F]) -> Result<Vec<F>> {
        if x.len() != self.d {
            return Err(Error::LengthMismatch { expected: self.d, actual: x.len() });
        }
        Ok((0..self.d)
            .map(|r| self.matrix[r * self.d..(r + 1) * self.d].iter().zip(x).fold(F::zero(), |a, (&m, &v)| a + m * v))
            .collect())
    }
}

/// `M(y', c') = sum_i <c', A_i y'> A_i`.
pub fn make_mapping<F: Real>(
    y: &NormalizedVector<F>,
    c: &SphericalCodeword<F>,
    basis: &AlgebraBasis<F>,
) -> Result<MappingFunction<F>> {
    let d = basis.dim();
    if y.dim() != d || c.coords.len() != d {
        return Err(Error::LengthMismatch { expected: d, actual: if y.dim() != d { y.dim() } else { c.coords.len() } });
    }
    let coefficients = basis
        .matrices()
        .iter()
        .map(|a| {
            (0..d).fold(F::zero(), |acc, r| {
                let ay = a[r * d..(r + 1) * d].iter().zip(&y.coords).fold(F::zero(), |s, (&m, &v)| s + m * v);
                acc + c.coords[r] * ay
            })
        })
        .collect();
    MappingFunction::from_coefficients(coefficients, basis)
}

/// `e = M x'`.
pub fn apply_mapping<F: Real>(m: &MappingFunction<F>, x: &NormalizedVector<F>) -> Result<Vec<F>> {
    m.apply(&x.coords)
}

/// How the virtual-channel observation `sqrt(d) e_i` is turned into an LLR.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LlrScaling<F: Real = f64> {
    /// `2 sqrt(snr (1 + snr)) sqrt(d) e_i`: the LLR of the virtual channel
    /// with Alice's norm replaced by its expectation.
    Matched,
    /// `2 snr sqrt(d) e_i`: `sqrt(d) e` read as a unit-amplitude BPSK
    /// observation at the physical SNR.
    Nominal,
    /// `2 snr_eq sqrt(d) e_i` with a caller-chosen `snr_eq`.
    Override(F),
    /// `2 sqrt(1 + snr) ||x|| e_i`: uses Alice's actual norm.
    #[default]
    NormAware,
}

impl<F: Real> LlrScaling<F> {
    /// Factor `g` such that `LLR_i = 2 g sqrt(d) e_i`.
    pub fn gain(&self, snr: F, d: usize, x_norm: F) -> F {
        match *self {
            LlrScaling::Matched => (snr * (F::one() + snr)).sqrt(),
            LlrScaling::Nominal => snr,
            LlrScaling::Override(g) => g,
            LlrScaling::NormAware => (F::one() + snr).sqrt() * x_norm / F::from_count(d).sqrt(),
        }
    }
}

/// Virtual-channel LLRs with the [`LlrScaling::Matched`] gain, for callers
/// that do not keep Alice's norm.
pub fn virtual_llr<F: Real>(e: &[F], snr: F, d: usize) -> Vec<F> {
    virtual_llr_with(e, snr, d, LlrScaling::Matched, F::zero())
}

/// `LLR_i = 2 g sqrt(d) e_i`; positive favours bit 0.
pub fn virtual_llr_with<F: Real>(e: &[F], snr: F, d: usize, scaling: LlrScaling<F>, x_norm: F) -> Vec<F> {
    let k = F::lit(2.0) * scaling.gain(snr, d, x_norm) * F::from_count(d).sqrt();
    e.iter().map(|&v| k * v).collect()
}
