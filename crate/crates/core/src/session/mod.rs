//! One reverse-reconciliation run between Bob (key reference) and Alice.
//!
//! Bob draws a message `u`, Raptor-encodes it and publishes, for every
//! `d`-chunk of the LT stream, the mapping function taking his normalized
//! Gaussian chunk onto the spherical codeword. Alice applies the published
//! maps to her own chunks, decodes by belief propagation and either stops
//! (parity and check code satisfied), asks for more symbols, or abandons the
//! block once the symbol count would pass `n_val`.
//!
//! The two roles only communicate through [`Message`]s, all of which are
//! recorded in the [`SessionTranscript`]; [`replay`] re-runs Alice from a
//! transcript and her data alone.

mod transcript;

pub use transcript::*;

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{channel_key, db_to_linear, linear_to_db, simulate_gaussian_pair, GaussianPair};
use crate::error::{invalid, Error, Result};
use crate::keyrate::capacity;
use crate::multidim::{
    check_dim, make_mapping, normalize, to_spherical, virtual_llr_with, AlgebraBasis, LlrScaling, MappingFunction,
};
use crate::raptor::{
    check_code, lt_encode, DecoderConfig, DegreeDistribution, Precode, RaptorBlockPlan, RaptorDecoder,
    DEFAULT_CHECK_WIDTH,
};
use crate::real::Real;
use crate::rng::{StreamKey, StreamTag};

/// SNR range of the adaptive distribution table, in dB.
pub const SUPPORTED_SNR_DB: (f64, f64) = (-20.0, 0.0);

/// SNR-indexed choice among the tabulated degree distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    pub version: u32,
    /// `(lower edge in dB, distribution index 1..=4)` in ascending edge order; the first
    /// edge must be the lower end of [`SUPPORTED_SNR_DB`].
    pub bands: Vec<(f64, usize)>,
}

impl ThresholdTable {
    /// Crossovers from a sweep over -12..0 dB in 1 dB steps (6 blocks per
    /// point, k = 9900, d = 8): the distribution with the larger mean
    /// efficiency wins each grid point. Omega_4 leads down to -8 dB and
    /// Omega_3 from -9 to -12 dB. Below -12 dB the table falls back to
    /// Omega_1, which was not swept.
    pub fn calibrated() -> Self {
        Self { version: 2, bands: vec![(-20.0, 1), (-12.0, 3), (-8.0, 4)] }
    }

    pub fn select(&self, snr_db: f64) -> Result<usize> {
        let (lo, hi) = SUPPORTED_SNR_DB;
        let tol = 1e-9;
        if !(snr_db >= lo - tol && snr_db <= hi + tol) {
            return Err(Error::UnsupportedSnr { snr_db, min_db: lo, max_db: hi });
        }
        let idx = self.bands.partition_point(|b| b.0 <= snr_db + tol);
        Ok(self.bands[idx.saturating_sub(1)].1)
    }
}

impl Default for ThresholdTable {
    fn default() -> Self {
        Self::calibrated()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionPolicy {
    Fixed(Arc<DegreeDistribution>),
    Adaptive(ThresholdTable),
}

impl DistributionPolicy {
    /// Fixed policy with tabulated distribution `Omega_which`, `which` in 1..=4.
    pub fn omega(which: usize) -> Result<Self> {
        Ok(Self::Fixed(Arc::new(DegreeDistribution::omega(which)?)))
    }
}

/// Distribution to use at linear SNR `snr`.
pub fn select_distribution(snr: f64, policy: &DistributionPolicy) -> Result<Arc<DegreeDistribution>> {
    match policy {
        DistributionPolicy::Fixed(d) => Ok(d.clone()),
        DistributionPolicy::Adaptive(table) => {
            if !(snr > 0.0) {
                return Err(invalid("snr", "must be > 0"));
            }
            Ok(Arc::new(DegreeDistribution::omega(table.select(linear_to_db(snr))?)?))
        }
    }
}

/// Symbols added per failed decoding attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchPolicy {
    /// `max(d, round(0.02 k / C))`, rounded up to a multiple of `d`.
    #[default]
    Auto,
    Fixed(usize),
}

/// Decoder state handling between attempts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RestartPolicy {
    /// Keep all messages; new edges start from the current beliefs.
    #[default]
    Warm,
    /// Clear all messages before every attempt.
    Cold,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SessionMode {
    /// Feedback loop: start at `k / (start_efficiency C)` and grow by the batch.
    #[default]
    Incremental,
    /// Decode once with `k / (beta C)` symbols, no feedback.
    SingleShot(f64),
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub d: usize,
    pub precode: Arc<Precode>,
    pub distribution: DistributionPolicy,
    pub beta_min: f64,
    pub batch: BatchPolicy,
    pub decoder: DecoderConfig,
    pub check_width: u32,
    pub master_seed: u64,
    pub block: u64,
    pub llr_scaling: LlrScaling<f64>,
    pub restart: RestartPolicy,
    pub mode: SessionMode,
    /// Efficiency of the first request in incremental mode.
    pub start_efficiency: f64,
    /// Overrides the first request size (rounded up to a multiple of `d`).
    pub initial_symbols: Option<usize>,
    /// Keep Alice's LLR inputs in the outcome.
    pub record_llrs: bool,
}

impl SessionConfig {
    /// `d = 8`, adaptive distribution, `beta_min = 0.80`, automatic batch,
    /// 64-bit check code, warm restarts.
    pub fn new(precode: Arc<Precode>) -> Self {
        Self {
            d: 8,
            precode,
            distribution: DistributionPolicy::Adaptive(ThresholdTable::calibrated()),
            beta_min: 0.80,
            batch: BatchPolicy::Auto,
            decoder: DecoderConfig::default(),
            check_width: DEFAULT_CHECK_WIDTH,
            master_seed: 0,
            block: 0,
            llr_scaling: LlrScaling::NormAware,
            restart: RestartPolicy::Warm,
            mode: SessionMode::Incremental,
            start_efficiency: 1.0,
            initial_symbols: None,
            record_llrs: false,
        }
    }

    pub fn k(&self) -> usize {
        self.precode.k()
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.d)?;
        if !(self.beta_min > 0.0 && self.beta_min < 1.0) {
            return Err(invalid("beta_min", "must lie in (0, 1)"));
        }
        if !(self.start_efficiency > 0.0 && self.start_efficiency <= 1.0) {
            return Err(invalid("start_efficiency", "must lie in (0, 1]"));
        }
        if let SessionMode::SingleShot(b) = self.mode {
            if !(b > 0.0 && b <= 1.0) {
                return Err(invalid("mode", "single-shot efficiency must lie in (0, 1]"));
            }
        }
        if let BatchPolicy::Fixed(0) = self.batch {
            return Err(invalid("batch", "must be > 0"));
        }
        if !(1..=64).contains(&self.check_width) {
            return Err(invalid("check_width", "must lie in 1..=64"));
        }
        if self.decoder.max_iters == 0 {
            return Err(invalid("max_iters", "must be > 0"));
        }
        Ok(())
    }

    pub fn batch_size(&self, snr: f64) -> Result<usize> {
        let raw = match self.batch {
            BatchPolicy::Auto => {
                let c = positive_capacity(snr)?;
                ((0.02 * self.k() as f64 / c).round() as usize).max(self.d)
            }
            BatchPolicy::Fixed(b) => b,
        };
        Ok(round_up(raw, self.d))
    }
}

fn round_up(n: usize, d: usize) -> usize {
    n.div_ceil(d) * d
}

fn positive_capacity(snr: f64) -> Result<f64> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(invalid("snr", "must be finite and > 0"));
    }
    capacity(snr)
}

/// Symbol budget `floor(k / (beta_min C(snr)))`, rounded down to a multiple
/// of `d`.
pub fn n_val(snr: f64, beta_min: f64, k: usize, d: usize) -> Result<usize> {
    if !(beta_min > 0.0 && beta_min < 1.0) {
        return Err(invalid("beta_min", "must lie in (0, 1)"));
    }
    if d == 0 {
        return Err(invalid("d", "must be > 0"));
    }
    let c = positive_capacity(snr)?;
    // relative slack absorbs rounding when the quotient is an exact integer
    let raw = (k as f64 / (beta_min * c) * (1.0 + 1e-12)).floor() as usize;
    Ok(raw / d * d)
}

/// First symbol count Alice asks for.
pub fn initial_request(snr: f64, cfg: &SessionConfig) -> Result<usize> {
    let k = cfg.k();
    let raw = match (cfg.initial_symbols, cfg.mode) {
        (Some(n), _) => n,
        (None, SessionMode::SingleShot(b)) => (k as f64 / (b * positive_capacity(snr)?)).ceil() as usize,
        (None, SessionMode::Incremental) => {
            ((k as f64 / (cfg.start_efficiency * positive_capacity(snr)?)).ceil() as usize).max(k)
        }
    };
    Ok(round_up(raw.max(1), cfg.d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionStatus {
    Success,
    Abandoned,
}

#[derive(Debug, Clone)]
pub struct SessionOutcome<F: Real = f64> {
    pub status: SessionStatus,
    /// Alice's decoded message on success.
    pub u: Option<Vec<u8>>,
    /// Bob's message; equals `u` on a correct success.
    pub bob_u: Vec<u8>,
    pub n_used: usize,
    /// `k / n_used` on success.
    pub realized_rate: Option<f64>,
    /// `realized_rate / C(snr)` on success.
    pub efficiency: Option<f64>,
    pub decode_attempts: usize,
    pub total_iterations: usize,
    pub distribution: String,
    pub transcript: SessionTranscript,
    /// Alice's LLR inputs in symbol order, when requested.
    pub llrs: Option<Vec<F>>,
}

impl<F: Real> SessionOutcome<F> {
    pub fn is_success(&self) -> bool {
        self.status == SessionStatus::Success
    }

    /// Success with `u' != u`, the check code having missed the error.
    pub fn undetected_error(&self) -> bool {
        matches!(&self.u, Some(u) if *u != self.bob_u)
    }
}

/// Bob's side: owns `u`, the encoder state and his Gaussian data.
struct Bob<'a, F: Real> {
    d: usize,
    y: &'a [F],
    u: Vec<u8>,
    v: Vec<u8>,
    plan: RaptorBlockPlan,
    basis: AlgebraBasis<F>,
    sent: usize,
}

impl<'a, F: Real> Bob<'a, F> {
    fn new(y: &'a [F], dist: Arc<DegreeDistribution>, cfg: &SessionConfig) -> Result<Self> {
        let precode = &cfg.precode;
        let mut rng = StreamKey::new(cfg.master_seed, cfg.block, StreamTag::Message).rng();
        let u: Vec<u8> = (0..precode.k()).map(|_| rng.gen::<u8>() & 1).collect();
        let v = precode.encode(&u)?;
        let graph_seed = StreamKey::new(cfg.master_seed, cfg.block, StreamTag::LtGraph).derive_u64();
        Ok(Self {
            d: cfg.d,
            y,
            u,
            v,
            plan: RaptorBlockPlan::seeded(graph_seed, dist, precode.k_prime()),
            basis: AlgebraBasis::new(cfg.d)?,
            sent: 0,
        })
    }

    fn opening(&self, cfg: &SessionConfig) -> Result<[Message; 2]> {
        let dist = self.plan.distribution().expect("seeded plan");
        Ok([
            Message::Header {
                d: self.d as u32,
                k: cfg.precode.k() as u32,
                k_prime: cfg.precode.k_prime() as u32,
                graph_seed: self.plan.seed().expect("seeded plan"),
                check_width: cfg.check_width,
                distribution: dist.to_text(),
            },
            Message::CheckCode { tag: check_code(&self.u, cfg.check_width)? },
        ])
    }

    /// Mapping functions for symbols `sent..total`.
    fn extend(&mut self, total: usize) -> Result<Message> {
        if total % self.d != 0 || total <= self.sent {
            return Err(Error::Transcript(format!("bad request for {total} symbols after {}", self.sent)));
        }
        if total > self.y.len() {
            return Err(Error::DataExhausted { needed: total, available: self.y.len() });
        }
        let bits = lt_encode(&self.v, &mut self.plan, self.sent, total - self.sent)?;
        let mut coefficients = Vec::with_capacity(bits.len());
        for (chunk_bits, y_chunk) in bits.chunks(self.d).zip(self.y[self.sent..total].chunks(self.d)) {
            let c = to_spherical::<F>(chunk_bits)?;
            let m = make_mapping(&normalize(y_chunk)?, &c, &self.basis)?;
            coefficients.extend(m.coefficients().iter().map(|a| a.to_f64_lossy()));
        }
        let first_chunk = (self.sent / self.d) as u64;
        self.sent = total;
        Ok(Message::Mappings { first_chunk, coefficients })
    }
}

/// Alice's side: everything she computes derives from the messages she
/// receives and her own data.
struct Alice<'a, 'p, F: Real> {
    x: &'a [F],
    snr: F,
    cfg: &'a SessionConfig,
    n_val: usize,
    batch: usize,
    basis: Option<AlgebraBasis<F>>,
    plan: Option<RaptorBlockPlan>,
    decoder: RaptorDecoder<'p, F>,
    tag: Option<u64>,
    check_width: u32,
    received: usize,
    requested: usize,
    attempts: usize,
    llrs: Option<Vec<F>>,
    decoded: Option<Vec<u8>>,
    distribution: String,
}

impl<'a, 'p, F: Real> Alice<'a, 'p, F> {
    fn new(x: &'a [F], snr: f64, cfg: &'a SessionConfig, precode: &'p Precode) -> Result<Self> {
        Ok(Self {
            x,
            snr: F::lit(snr),
            cfg,
            n_val: n_val(snr, cfg.beta_min, cfg.k(), cfg.d)?,
            batch: cfg.batch_size(snr)?,
            basis: None,
            plan: None,
            decoder: RaptorDecoder::new(precode),
            tag: None,
            check_width: cfg.check_width,
            received: 0,
            requested: 0,
            attempts: 0,
            llrs: cfg.record_llrs.then(Vec::new),
            decoded: None,
            distribution: String::new(),
        })
    }

    /// Handles a Bob message, returning her reply if one is due.
    fn receive(&mut self, m: &Message, snr: f64) -> Result<Option<Message>> {
        match m {
            Message::Header { d, k, k_prime, graph_seed, check_width, distribution } => {
                let p = &self.cfg.precode;
                if *d as usize != self.cfg.d || *k as usize != p.k() || *k_prime as usize != p.k_prime() {
                    return Err(Error::Transcript("header does not match the local code".into()));
                }
                let dist = Arc::new(DegreeDistribution::from_text(distribution)?);
                self.distribution = dist.name().to_string();
                self.plan = Some(RaptorBlockPlan::seeded(*graph_seed, dist, p.k_prime()));
                self.basis = Some(AlgebraBasis::new(self.cfg.d)?);
                self.check_width = *check_width;
                Ok(None)
            }
            Message::CheckCode { tag } => {
                self.tag = Some(*tag);
                Ok(Some(self.first_request(snr)?))
            }
            Message::Mappings { first_chunk, coefficients } => self.absorb(*first_chunk, coefficients).map(Some),
            other => Err(Error::Transcript(format!("unexpected message for Alice: {other:?}"))),
        }
    }

    fn first_request(&mut self, snr: f64) -> Result<Message> {
        let n0 = initial_request(snr, self.cfg)?;
        if n0 > self.n_val {
            return Ok(Message::Abandon { n_used: 0 });
        }
        self.requested = n0;
        Ok(Message::Request { total_symbols: n0 as u64 })
    }

    fn absorb(&mut self, first_chunk: u64, coefficients: &[f64]) -> Result<Message> {
        let d = self.cfg.d;
        let (Some(plan), Some(basis), Some(tag)) = (self.plan.as_mut(), self.basis.as_ref(), self.tag) else {
            return Err(Error::Transcript("mappings before header and check code".into()));
        };
        if first_chunk as usize * d != self.received || coefficients.len() != self.requested - self.received {
            return Err(Error::Transcript("mapping batch does not continue the stream".into()));
        }
        if self.requested > self.x.len() {
            return Err(Error::DataExhausted { needed: self.requested, available: self.x.len() });
        }
        let mut llrs = Vec::with_capacity(coefficients.len());
        for (alpha, x_chunk) in coefficients.chunks(d).zip(self.x[self.received..self.requested].chunks(d)) {
            let m = MappingFunction::from_coefficients(alpha.iter().map(|&a| F::lit(a)).collect(), basis)?;
            let xn = normalize(x_chunk)?;
            let e = m.apply(xn.coords())?;
            llrs.extend(virtual_llr_with(&e, self.snr, d, scaling_in::<F>(self.cfg.llr_scaling), xn.norm()));
        }
        plan.ensure(self.requested)?;
        self.decoder.push_symbols(&llrs, &plan.index_sets()[self.received..self.requested])?;
        if let Some(all) = self.llrs.as_mut() {
            all.extend_from_slice(&llrs);
        }
        self.received = self.requested;

        if self.cfg.restart == RestartPolicy::Cold {
            self.decoder.reset_messages();
        }
        self.attempts += 1;
        let out = self.decoder.run(self.cfg.decoder);
        if let Some(u_hat) = out.u_hat {
            if check_code(&u_hat, self.check_width)? == tag {
                self.decoded = Some(u_hat);
                return Ok(Message::Stop { n_used: self.received as u64 });
            }
        }
        let next = self.received + self.batch;
        if matches!(self.cfg.mode, SessionMode::SingleShot(_)) || next > self.n_val {
            return Ok(Message::Abandon { n_used: self.received as u64 });
        }
        self.requested = next;
        Ok(Message::Request { total_symbols: next as u64 })
    }
}

fn scaling_in<F: Real>(s: LlrScaling<f64>) -> LlrScaling<F> {
    match s {
        LlrScaling::Matched => LlrScaling::Matched,
        LlrScaling::Nominal => LlrScaling::Nominal,
        LlrScaling::Override(g) => LlrScaling::Override(F::lit(g)),
        LlrScaling::NormAware => LlrScaling::NormAware,
    }
}

fn check_inputs<F: Real>(x: &[F], y: Option<&[F]>, snr: f64, d: usize) -> Result<()> {
    if let Some(y) = y {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
        }
    }
    if x.len() % d != 0 {
        return Err(invalid("x", "length must be a multiple of d"));
    }
    positive_capacity(snr).map(|_| ())
}

fn finish<F: Real>(
    status_msg: &Message,
    alice: Alice<'_, '_, F>,
    bob_u: Vec<u8>,
    snr: f64,
    k: usize,
    transcript: SessionTranscript,
) -> Result<SessionOutcome<F>> {
    let (status, n_used) = match *status_msg {
        Message::Stop { n_used } => (SessionStatus::Success, n_used as usize),
        Message::Abandon { n_used } => (SessionStatus::Abandoned, n_used as usize),
        _ => unreachable!("finish called on a non-terminal message"),
    };
    let (realized_rate, efficiency) = if status == SessionStatus::Success {
        let r = k as f64 / n_used as f64;
        (Some(r), Some(r / capacity(snr)?))
    } else {
        (None, None)
    };
    Ok(SessionOutcome {
        status,
        u: alice.decoded,
        bob_u,
        n_used,
        realized_rate,
        efficiency,
        decode_attempts: alice.attempts,
        total_iterations: alice.decoder.total_iterations(),
        distribution: alice.distribution,
        transcript,
        llrs: alice.llrs,
    })
}

/// Runs one session on Alice's `x` and Bob's `y` at linear SNR `snr`.
pub fn run_reconciliation<F: Real>(x: &[F], y: &[F], snr: f64, cfg: &SessionConfig) -> Result<SessionOutcome<F>> {
    cfg.validate()?;
    check_inputs(x, Some(y), snr, cfg.d)?;
    let dist = select_distribution(snr, &cfg.distribution)?;
    let mut bob = Bob::new(y, dist, cfg)?;
    let mut alice = Alice::new(x, snr, cfg, &cfg.precode)?;
    let mut transcript = SessionTranscript::new();

    let mut reply = None;
    for m in bob.opening(cfg)? {
        reply = alice.receive(&m, snr)?;
        transcript.push(m);
    }
    loop {
        let m = reply.take().ok_or_else(|| Error::Transcript("Alice did not reply".into()))?;
        transcript.push(m.clone());
        match m {
            Message::Request { total_symbols } => {
                let mappings = bob.extend(total_symbols as usize)?;
                reply = alice.receive(&mappings, snr)?;
                transcript.push(mappings);
            }
            Message::Stop { .. } | Message::Abandon { .. } => {
                let bob_u = std::mem::take(&mut bob.u);
                return finish(&m, alice, bob_u, snr, cfg.k(), transcript);
            }
            _ => unreachable!("Alice only sends requests and terminal messages"),
        }
    }
}

/// Alice's view of a replayed session.
#[derive(Debug, Clone)]
pub struct ReplayOutcome<F: Real = f64> {
    pub status: SessionStatus,
    pub u: Option<Vec<u8>>,
    pub n_used: usize,
    pub decode_attempts: usize,
    /// Every LLR fed to the decoder, in symbol order.
    pub llrs: Vec<F>,
}

/// Re-runs Alice against a recorded transcript. Every Alice message in the
/// transcript must equal the one she recomputes.
pub fn replay<F: Real>(transcript: &SessionTranscript, x: &[F], snr: f64, cfg: &SessionConfig) -> Result<ReplayOutcome<F>> {
    cfg.validate()?;
    check_inputs(x, None, snr, cfg.d)?;
    let cfg = SessionConfig { record_llrs: true, ..cfg.clone() };
    let mut alice = Alice::new(x, snr, &cfg, &cfg.precode)?;
    let mut expected: Option<Message> = None;
    for m in transcript.messages() {
        match m {
            Message::Request { .. } | Message::Stop { .. } | Message::Abandon { .. } => {
                if expected.as_ref() != Some(m) {
                    return Err(Error::Transcript(format!("recorded {m:?}, recomputed {expected:?}")));
                }
                if let Message::Stop { n_used } | Message::Abandon { n_used } = *m {
                    let status =
                        if matches!(m, Message::Stop { .. }) { SessionStatus::Success } else { SessionStatus::Abandoned };
                    return Ok(ReplayOutcome {
                        status,
                        u: alice.decoded,
                        n_used: n_used as usize,
                        decode_attempts: alice.attempts,
                        llrs: alice.llrs.unwrap_or_default(),
                    });
                }
                expected = None;
            }
            bob_msg => {
                if expected.is_some() {
                    return Err(Error::Transcript("Bob message while Alice's reply is pending".into()));
                }
                expected = alice.receive(bob_msg, snr)?;
            }
        }
    }
    Err(Error::Transcript("transcript ends without stop or abandon".into()))
}

/// Aggregate of independent sessions at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub snr: f64,
    pub blocks: usize,
    pub successes: usize,
    /// Failed fraction; undetected errors count as failures.
    pub fer: f64,
    /// Mean symbols over successful blocks.
    pub mean_n: Option<f64>,
    /// `k / mean_n`.
    pub rate: Option<f64>,
    /// `rate / C(snr)`.
    pub beta: Option<f64>,
    pub distribution: String,
    pub per_block: Vec<BlockResult>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockResult {
    pub block: u64,
    pub success: bool,
    pub n_used: usize,
    pub decode_attempts: usize,
    pub iterations: usize,
}

/// Channel samples of block `block`: enough pairs for the largest request
/// the session may make at `snr`, seeded from `(cfg.master_seed, block)`.
pub fn block_data<F: Real>(snr: f64, cfg: &SessionConfig, block: u64) -> Result<GaussianPair<F>> {
    let budget = n_val(snr, cfg.beta_min, cfg.k(), cfg.d)?.max(initial_request(snr, cfg)?);
    simulate_gaussian_pair::<F>(budget, F::lit(snr), channel_key(cfg.master_seed, block))
}

/// One session on the data of [`block_data`], with `cfg.block` replaced.
pub fn run_block<F: Real>(snr: f64, cfg: &SessionConfig, block: u64) -> Result<SessionOutcome<F>> {
    let pair = block_data::<F>(snr, cfg, block)?;
    let bcfg = SessionConfig { block, ..cfg.clone() };
    run_reconciliation(&pair.x, &pair.y, snr, &bcfg)
}

/// Runs blocks `0..blocks` through [`run_block`]; results do not depend on
/// the thread count.
pub fn measure_efficiency<F: Real>(snr: f64, cfg: &SessionConfig, blocks: usize) -> Result<EfficiencyReport> {
    measure_efficiency_with::<F, _>(snr, cfg, blocks, |_, _| Ok(()))
}

/// [`measure_efficiency`] handing every session outcome to `sink` before it
/// is reduced, e.g. to archive transcripts.
pub fn measure_efficiency_with<F, S>(snr: f64, cfg: &SessionConfig, blocks: usize, sink: S) -> Result<EfficiencyReport>
where
    F: Real,
    S: Fn(u64, &SessionOutcome<F>) -> Result<()> + Sync,
{
    if blocks == 0 {
        return Err(invalid("blocks", "must be >= 1"));
    }
    cfg.validate()?;
    let distribution = select_distribution(snr, &cfg.distribution)?.name().to_string();
    let per_block: Vec<BlockResult> = (0..blocks as u64)
        .into_par_iter()
        .map(|block| {
            let out = run_block::<F>(snr, cfg, block)?;
            sink(block, &out)?;
            Ok(BlockResult {
                block,
                success: out.is_success() && !out.undetected_error(),
                n_used: out.n_used,
                decode_attempts: out.decode_attempts,
                iterations: out.total_iterations,
            })
        })
        .collect::<Result<_>>()?;
    let ok: Vec<&BlockResult> = per_block.iter().filter(|b| b.success).collect();
    let successes = ok.len();
    let mean_n = (successes > 0).then(|| ok.iter().map(|b| b.n_used as f64).sum::<f64>() / successes as f64);
    let rate = mean_n.map(|n| cfg.k() as f64 / n);
    let c = capacity(snr)?;
    Ok(EfficiencyReport {
        snr,
        blocks,
        successes,
        fer: 1.0 - successes as f64 / blocks as f64,
        mean_n,
        rate,
        beta: rate.map(|r| r / c),
        distribution,
        per_block,
    })
}

/// `measure_efficiency` with the SNR given in dB.
pub fn measure_efficiency_db<F: Real>(snr_db: f64, cfg: &SessionConfig, blocks: usize) -> Result<EfficiencyReport> {
    measure_efficiency::<F>(db_to_linear(snr_db), cfg, blocks)
}
