//! Capacity, efficiency and secret-key-rate analytics.
//!
//! Eve's information is the Holevo bound of the Gaussian entangling cloner
//! for one-way reverse reconciliation with homodyne detection, the detector
//! efficiency and electronic noise being trusted. All logarithms are base 2.

use crate::channel::{snr_unchecked, va_for_snr, ChannelParams};
use crate::error::{invalid, Error, Result};
use crate::real::Real;

/// `C(snr) = 1/2 log2(1 + snr)`.
pub fn capacity<F: Real>(snr: F) -> Result<F> {
    if !(snr >= F::zero()) {
        return Err(invalid("snr", "must be >= 0"));
    }
    Ok(half_log2_1p(snr))
}

/// Gaussian-channel mutual information `I(A:B) = 1/2 log2(1 + snr)`.
pub fn mutual_information<F: Real>(snr: F) -> F {
    half_log2_1p(snr)
}

fn half_log2_1p<F: Real>(snr: F) -> F {
    F::lit(0.5) * snr.ln_1p() / F::LN_2()
}

/// `R = k / E[n]`.
pub fn realized_rate<F: Real>(k: usize, mean_n: F) -> Result<F> {
    if !(mean_n >= F::from_count(k)) {
        return Err(invalid("mean_n", "must be >= k"));
    }
    Ok(F::from_count(k) / mean_n)
}

/// `beta = R / C(snr)`.
pub fn efficiency<F: Real>(rate: F, snr: F) -> Result<F> {
    if !(snr > F::zero()) {
        return Err(invalid("snr", "must be > 0"));
    }
    Ok(rate / half_log2_1p(snr))
}

/// `G(x) = (x + 1) log2(x + 1) - x log2 x`, the entropy of a thermal state
/// with mean photon number `x`.
pub fn entropy_g<F: Real>(x: F) -> F {
    if x <= F::zero() {
        return F::zero();
    }
    let one = F::one();
    ((x + one) * (x + one).log2()) - x * x.log2()
}

/// Symplectic eigenvalues below one by more than this are rejected.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

/// Intermediate quantities of the Holevo computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoTerms<F: Real = f64> {
    /// Symplectic eigenvalues of the Alice-Bob state.
    pub lambda_ab: [F; 2],
    /// Symplectic eigenvalues of Alice's side conditioned on Bob's homodyne
    /// outcome (the third, trivially one, is omitted).
    pub lambda_conditional: [F; 2],
    pub chi: F,
}

/// Holevo information `chi(B:E)` for the given link.
pub fn holevo_bound<F: Real>(params: &ChannelParams<F>) -> Result<F> {
    Ok(holevo_terms(params)?.chi)
}

/// Closed-form symplectic spectrum and Holevo bound.
pub fn holevo_terms<F: Real>(params: &ChannelParams<F>) -> Result<HolevoTerms<F>> {
    params.validate()?;
    let one = F::one();
    let two = F::lit(2.0);
    let half = F::lit(0.5);
    let t = params.transmittance();
    let v = params.va + one;
    let chi_line = one / t - one + params.xi;
    let chi_hom = (one + params.vel) / params.eta - one;
    let chi_tot = chi_line + chi_hom / t;

    let a = v * v * (one - two * t) + two * t + t * t * (v + chi_line).powi(2);
    let b = t * t * (v * chi_line + one).powi(2);
    let (l1, l2) = pair_from_trace_det(a, b, half);

    let sb = b.sqrt();
    let denom = t * (v + chi_tot);
    let c = (v * sb + t * (v + chi_line) + a * chi_hom) / denom;
    let d = sb * (v + sb * chi_hom) / denom;
    let (l3, l4) = pair_from_trace_det(c, d, half);

    let tol = F::lit(PHYSICALITY_TOLERANCE);
    for l in [l1, l2, l3, l4] {
        if !(l >= one - tol) {
            return Err(Error::NonPhysical(l.to_f64_lossy()));
        }
    }
    let g = |l: F| entropy_g(((l - one) * half).max(F::zero()));
    let chi = (g(l1) + g(l2) - g(l3) - g(l4)).max(F::zero());
    Ok(HolevoTerms { lambda_ab: [l1, l2], lambda_conditional: [l3, l4], chi })
}

/// Roots `lambda^2 = (s +- sqrt(s^2 - 4p)) / 2`, returned as `lambda`.
fn pair_from_trace_det<F: Real>(s: F, p: F, half: F) -> (F, F) {
    let disc = (s * s - F::lit(4.0) * p).max(F::zero()).sqrt();
    (((s + disc) * half).sqrt(), ((s - disc) * half).max(F::zero()).sqrt())
}

/// Treatment of the parameter-estimation term of the finite-size rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeModel {
    /// Eve's information evaluated at the true channel parameters.
    Exact,
    /// Eve's information at the pessimistic edge of the `eps_pe` confidence
    /// region for `T` and `xi` estimated from `pe_samples` pairs.
    #[default]
    WorstCase,
}

/// Inputs of the finite-size key rate
/// `K = (n/N) [beta I(A:B) - S(B:E) - Delta(n)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateInputs<F: Real = f64> {
    pub params: ChannelParams<F>,
    pub beta: F,
    /// Total exchanged pairs `N`.
    pub n_total: F,
    /// Pairs used for key extraction `n`.
    pub n_key: F,
    /// Pairs available for parameter estimation; `None` means all `N`
    /// (estimation performed after reconciliation on the full data).
    pub pe_samples: Option<F>,
    pub eps_pe: F,
    pub eps_bar: F,
    pub eps_pa: F,
    /// Pulses per second.
    pub rep_rate: F,
    pub pe_model: PeModel,
}

impl<F: Real> KeyRateInputs<F> {
    /// Defaults: `n = N`, all epsilons `1e-10`, 5 MHz, worst-case estimation.
    pub fn new(params: ChannelParams<F>, beta: F, n_total: F) -> Self {
        Self {
            params,
            beta,
            n_total,
            n_key: n_total,
            pe_samples: None,
            eps_pe: F::lit(1e-10),
            eps_bar: F::lit(1e-10),
            eps_pa: F::lit(1e-10),
            rep_rate: F::lit(5e6),
            pe_model: PeModel::WorstCase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.beta > F::zero() && self.beta <= F::one()) {
            return Err(invalid("beta", "must lie in (0, 1]"));
        }
        if !(self.n_key > F::zero() && self.n_key <= self.n_total) {
            return Err(invalid("n_key", "must satisfy 0 < n <= N"));
        }
        for (name, e) in [("eps_pe", self.eps_pe), ("eps_bar", self.eps_bar), ("eps_pa", self.eps_pa)] {
            if !(e > F::zero() && e < F::one()) {
                return Err(invalid(name, "must lie in (0, 1)"));
            }
        }
        if let Some(m) = self.pe_samples {
            if !(m > F::zero()) {
                return Err(invalid("pe_samples", "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Finite-size offset `Delta(n) = 7 sqrt(log2(2 / eps_bar) / n)`.
pub fn finite_size_offset<F: Real>(n: F, eps_bar: F) -> F {
    F::lit(7.0) * ((F::lit(2.0) / eps_bar).log2() / n).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateReport<F: Real = f64> {
    pub snr: F,
    pub capacity: F,
    pub mutual_info: F,
    /// Eve's information as used in the rate (worst case when so configured).
    pub holevo: F,
    pub delta: F,
    /// Bits per pulse; negative means no key.
    pub k_finite: F,
    /// Bits per second.
    pub k_rate: F,
}

/// Channel parameters at the pessimistic edge of the estimation confidence
/// region: transmittance lowered and excess noise raised by `z` standard
/// deviations each, `z` the two-sided `eps_pe` normal quantile.
pub fn worst_case_params<F: Real>(params: &ChannelParams<F>, pe_samples: F, eps_pe: F) -> ChannelParams<F> {
    let z = F::lit(std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(eps_pe.to_f64_lossy()));
    let one = F::one();
    let t = params.transmittance();
    let slope = (params.eta * t).sqrt();
    let sigma2 = one + params.eta * t * params.xi + params.vel;
    let slope_min = (slope - z * (sigma2 / (pe_samples * params.va)).sqrt()).max(F::lit(1e-300));
    let sigma2_max = sigma2 + z * sigma2 * F::SQRT_2() / pe_samples.sqrt();
    let t_min = slope_min * slope_min / params.eta;
    let xi_max = (sigma2_max - one - params.vel) / (params.eta * t_min);
    let distance = -F::lit(10.0) * t_min.log10() / params.alpha_db_per_km.max(F::lit(1e-300));
    let distance = if params.alpha_db_per_km > F::zero() { distance } else { params.distance_km };
    ChannelParams { distance_km: distance.max(F::zero()), xi: xi_max, ..*params }
}

/// Finite-size secret key rate. A negative rate is a valid report.
pub fn finite_size_key_rate<F: Real>(inputs: &KeyRateInputs<F>) -> Result<KeyRateReport<F>> {
    inputs.validate()?;
    let snr = snr_unchecked(&inputs.params);
    let mi = mutual_information(snr);
    let holevo = match inputs.pe_model {
        PeModel::Exact => holevo_bound(&inputs.params)?,
        PeModel::WorstCase => {
            let m = inputs.pe_samples.unwrap_or(inputs.n_total);
            holevo_bound(&worst_case_params(&inputs.params, m, inputs.eps_pe))?
        }
    };
    let delta = finite_size_offset(inputs.n_key, inputs.eps_bar);
    let k_finite = inputs.n_key / inputs.n_total * (inputs.beta * mi - holevo - delta);
    Ok(KeyRateReport { snr, capacity: mi, mutual_info: mi, holevo, delta, k_finite, k_rate: k_finite * inputs.rep_rate })
}

/// Asymptotic rate `beta I(A:B) - chi(B:E)`.
pub fn asymptotic_key_rate<F: Real>(params: &ChannelParams<F>, beta: F) -> Result<F> {
    Ok(beta * mutual_information(snr_unchecked(params)) - holevo_bound(params)?)
}

/// Search interval for the modulation variance.
pub const VA_RANGE: (f64, f64) = (0.01, 100.0);
pub const VA_REL_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalVa<F: Real = f64> {
    pub va: F,
    pub key_rate: F,
    /// False when no variance in range gives a positive rate.
    pub positive: bool,
}

/// Golden-section maximization of `f` over `[lo, hi]` in log scale, to
/// relative tolerance `rel_tol` in the argument.
pub fn maximize_log_scale<F: Real>(mut f: impl FnMut(F) -> F, lo: F, hi: F, rel_tol: F) -> (F, F) {
    let inv_phi = (F::lit(5.0).sqrt() - F::one()) * F::lit(0.5);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    while b - a > rel_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d.exp());
        }
    }
    let mut best = ((a + b) * F::lit(0.5)).exp();
    let mut fbest = f(best);
    for edge in [lo, hi] {
        let fe = f(edge);
        if fe > fbest {
            best = edge;
            fbest = fe;
        }
    }
    (best, fbest)
}

fn optimize<F: Real>(mut k_of_va: impl FnMut(F) -> Result<F>) -> Result<OptimalVa<F>> {
    let mut failure = None;
    let (va, key_rate) = maximize_log_scale(
        |va| match k_of_va(va) {
            Ok(k) => k,
            Err(e) => {
                failure.get_or_insert(e);
                F::neg_infinity()
            }
        },
        F::lit(VA_RANGE.0),
        F::lit(VA_RANGE.1),
        F::lit(VA_REL_TOLERANCE),
    );
    if !key_rate.is_finite() {
        return Err(failure.unwrap_or(invalid("va", "no finite key rate in range")));
    }
    Ok(OptimalVa { va, key_rate, positive: key_rate > F::zero() })
}

/// `V_A` maximizing the asymptotic rate; the `va` field of `params` is ignored.
pub fn optimal_va<F: Real>(params: &ChannelParams<F>, beta: F) -> Result<OptimalVa<F>> {
    params.with_va(F::one()).validate()?;
    optimize(|va| asymptotic_key_rate(&params.with_va(va), beta))
}

/// `V_A` maximizing the finite-size rate of `inputs`.
pub fn optimal_va_finite<F: Real>(inputs: &KeyRateInputs<F>) -> Result<OptimalVa<F>> {
    let template = KeyRateInputs { params: inputs.params.with_va(F::one()), ..*inputs };
    template.validate()?;
    optimize(|va| Ok(finite_size_key_rate(&KeyRateInputs { params: template.params.with_va(va), ..template })?.k_finite))
}

/// Modulation-variance policy of a distance sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VaMode<F: Real = f64> {
    /// Maximize the finite-size rate at every distance.
    Optimal,
    Fixed(F),
    /// Adjust `V_A` so that the link SNR equals the target.
    TargetSnr(F),
}

impl<F: Real> VaMode<F> {
    pub fn label(&self) -> &'static str {
        match self {
            VaMode::Optimal => "optimal",
            VaMode::Fixed(_) => "fixed",
            VaMode::TargetSnr(_) => "target_snr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkrPoint<F: Real = f64> {
    pub distance_km: F,
    pub va: F,
    pub report: KeyRateReport<F>,
}

/// Key rate along a distance grid; `template.params.distance_km` and `va` are
/// overridden per point.
pub fn skr_vs_distance<F: Real>(grid: &[F], template: &KeyRateInputs<F>, mode: VaMode<F>) -> Result<Vec<SkrPoint<F>>> {
    if grid.is_empty() {
        return Err(invalid("grid", "must not be empty"));
    }
    grid.iter()
        .map(|&distance_km| {
            let base = KeyRateInputs { params: template.params.with_distance(distance_km), ..*template };
            let va = match mode {
                VaMode::Optimal => optimal_va_finite(&base)?.va,
                VaMode::Fixed(va) => va,
                VaMode::TargetSnr(snr) => va_for_snr(&base.params, snr),
            };
            let inputs = KeyRateInputs { params: base.params.with_va(va), ..base };
            Ok(SkrPoint { distance_km, va, report: finite_size_key_rate(&inputs)? })
        })
        .collect()
}
