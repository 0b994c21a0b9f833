//! Physical channel model in shot-noise units and the sample generators the
//! rest of the crate consumes.

use crate::error::{invalid, Result};
use crate::real::Real;
use crate::rng::{StreamKey, StreamTag};
use rand_distr::{Distribution, StandardNormal};

/// Standard single-mode fiber loss.
pub const DEFAULT_ALPHA_DB_PER_KM: f64 = 0.2;

/// Physical CV-QKD link parameters. Noise figures are in shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<F: Real = f64> {
    /// Modulation variance `V_A`.
    pub va: F,
    pub distance_km: F,
    pub alpha_db_per_km: F,
    /// Excess noise referred to the channel input.
    pub xi: F,
    /// Homodyne detector efficiency.
    pub eta: F,
    /// Electronic noise of the detector.
    pub vel: F,
}

impl<F: Real> ChannelParams<F> {
    /// The parameter set used throughout the distance sweeps:
    /// `xi = 0.01`, `eta = 0.6`, `vel = 0.015`, `alpha = 0.2 dB/km`.
    pub fn reference(va: F, distance_km: F) -> Self {
        Self {
            va,
            distance_km,
            alpha_db_per_km: F::lit(DEFAULT_ALPHA_DB_PER_KM),
            xi: F::lit(0.01),
            eta: F::lit(0.6),
            vel: F::lit(0.015),
        }
    }

    pub fn with_va(self, va: F) -> Self {
        Self { va, ..self }
    }

    pub fn with_distance(self, distance_km: F) -> Self {
        Self { distance_km, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("va", self.va),
            ("distance_km", self.distance_km),
            ("alpha_db_per_km", self.alpha_db_per_km),
            ("xi", self.xi),
            ("eta", self.eta),
            ("vel", self.vel),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.va <= F::zero() {
            return Err(invalid("va", "must be > 0"));
        }
        if self.distance_km < F::zero() {
            return Err(invalid("distance_km", "must be >= 0"));
        }
        if self.alpha_db_per_km < F::zero() {
            return Err(invalid("alpha_db_per_km", "must be >= 0"));
        }
        if self.xi < F::zero() {
            return Err(invalid("xi", "must be >= 0"));
        }
        if !(self.eta > F::zero() && self.eta <= F::one()) {
            return Err(invalid("eta", "must lie in (0, 1]"));
        }
        if self.vel < F::zero() {
            return Err(invalid("vel", "must be >= 0"));
        }
        Ok(())
    }

    /// Fiber transmittance `T`.
    pub fn transmittance(&self) -> F {
        transmittance_unchecked(self.distance_km, self.alpha_db_per_km)
    }
}

/// Fiber transmittance `10^(-alpha L / 10)`.
pub fn transmittance<F: Real>(distance_km: F, alpha_db_per_km: F) -> Result<F> {
    if !(distance_km >= F::zero()) {
        return Err(invalid("distance_km", "must be >= 0"));
    }
    if !(alpha_db_per_km >= F::zero()) {
        return Err(invalid("alpha_db_per_km", "must be >= 0"));
    }
    Ok(transmittance_unchecked(distance_km, alpha_db_per_km))
}

fn transmittance_unchecked<F: Real>(distance_km: F, alpha_db_per_km: F) -> F {
    F::lit(10.0).powf(-alpha_db_per_km * distance_km / F::lit(10.0))
}

/// Per-quadrature SNR seen by Bob's homodyne detector with trusted detector
/// noise: `eta T V_A / (1 + vel + eta T xi)`.
pub fn channel_snr<F: Real>(params: &ChannelParams<F>) -> Result<F> {
    params.validate()?;
    Ok(snr_unchecked(params))
}

pub(crate) fn snr_unchecked<F: Real>(p: &ChannelParams<F>) -> F {
    let et = p.eta * p.transmittance();
    et * p.va / (F::one() + p.vel + et * p.xi)
}

/// Modulation variance that puts the link at `target_snr`; inverse of
/// [`channel_snr`] in `V_A`.
pub fn va_for_snr<F: Real>(params: &ChannelParams<F>, target_snr: F) -> F {
    let et = params.eta * params.transmittance();
    target_snr * (F::one() + params.vel + et * params.xi) / et
}

pub fn db_to_linear<F: Real>(db: F) -> F {
    F::lit(10.0).powf(db / F::lit(10.0))
}

pub fn linear_to_db<F: Real>(lin: F) -> F {
    F::lit(10.0) * lin.log10()
}

/// Correlated Gaussian sequences `y = x + z`, `x ~ N(0, snr)`, `z ~ N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPair<F: Real = f64> {
    /// Alice side.
    pub x: Vec<F>,
    /// Bob side.
    pub y: Vec<F>,
    pub snr: F,
}

/// Draws `n` correlated pairs; a pure function of `(n, snr, key)`.
pub fn simulate_gaussian_pair<F: Real>(n: usize, snr: F, key: StreamKey) -> Result<GaussianPair<F>> {
    if n == 0 {
        return Err(invalid("n", "must be > 0"));
    }
    if !(snr > F::zero()) || !snr.is_finite() {
        return Err(invalid("snr", "must be finite and > 0"));
    }
    let mut rng = key.rng();
    let sx = snr.sqrt().to_f64_lossy();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = StandardNormal.sample(&mut rng);
        let z: f64 = StandardNormal.sample(&mut rng);
        let xa = sx * a;
        x.push(F::lit(xa));
        y.push(F::lit(xa + z));
    }
    Ok(GaussianPair { x, y, snr })
}

/// Binary-input AWGN observations `y_j = (-1)^{c_j} + z_j`, `z_j ~ N(0, 1/snr)`.
pub fn biawgn_sample<F: Real>(bits: &[u8], snr: F, key: StreamKey) -> Result<Vec<F>> {
    if !(snr > F::zero()) {
        return Err(invalid("snr", "must be > 0"));
    }
    let sigma = (F::one() / snr).sqrt().to_f64_lossy();
    let mut rng = key.rng();
    Ok(bits
        .iter()
        .map(|&b| {
            let z: f64 = StandardNormal.sample(&mut rng);
            F::lit(bpsk(b) + sigma * z)
        })
        .collect())
}

/// `(-1)^b`.
#[inline]
pub fn bpsk(bit: u8) -> f64 {
    if bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Default stream key for channel sampling of one block.
pub fn channel_key(master: u64, block: u64) -> StreamKey {
    StreamKey::new(master, block, StreamTag::Channel)
}
