//! Sum-product decoding on the joint LT + precode factor graph.
//!
//! Flooding schedule. Per iteration every LT output node sends
//! `2 atanh(tanh(m0/2) prod_{i' != i} tanh(m_{i'->o}/2))` to each neighbour,
//! every precode check does the same without a channel term, and every input
//! node answers with its total belief minus the incoming message on that edge.
//! Messages travel in the tanh domain on the input-to-output side.

use super::lt::RaptorBlockPlan;
use super::precode::Precode;
use crate::error::{Error, Result};
use crate::real::Real;

/// Magnitude bound applied to LLRs before `tanh` and to every outgoing
/// check-side message. `tanh(19)` already rounds to one in `f64`.
pub const LLR_CLAMP: f64 = 38.0;

pub const DEFAULT_MAX_ITERS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderConfig {
    /// Iterations per call to [`RaptorDecoder::run`].
    pub max_iters: usize,
    /// Stop at the first iteration whose hard decisions satisfy every precode
    /// relation and leave no input node at zero belief. Disable to run exactly `max_iters` iterations.
    pub early_exit: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self { max_iters: DEFAULT_MAX_ITERS, early_exit: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    /// Systematic part of the decoded word, present on success.
    pub u_hat: Option<Vec<u8>>,
    pub iters_used: usize,
}

impl DecodeOutcome {
    pub fn is_success(&self) -> bool {
        self.status == DecodeStatus::Success
    }
}

/// Decoder state for one block. Keeps every message between calls so that
/// symbols appended with [`push_symbols`](Self::push_symbols) extend the
/// graph without starting over.
#[derive(Debug, Clone)]
pub struct RaptorDecoder<'p, F: Real = f64> {
    precode: &'p Precode,
    clamp: F,
    // LT output nodes, CSR by output
    out_start: Vec<usize>,
    out_var: Vec<u32>,
    channel: Vec<F>,
    msg_oi: Vec<F>,
    tanh_io: Vec<F>,
    // precode checks, CSR by check
    chk_start: Vec<usize>,
    chk_var: Vec<u32>,
    msg_cv: Vec<F>,
    tanh_vc: Vec<F>,
    // input nodes
    total: Vec<F>,
    hard: Vec<u8>,
    /// Input nodes whose total belief is exactly zero.
    undecided: usize,
    iterations: usize,
}

impl<'p, F: Real> RaptorDecoder<'p, F> {
    pub fn new(precode: &'p Precode) -> Self {
        let mut chk_start = vec![0];
        let mut chk_var = Vec::new();
        for row in precode.rows() {
            chk_var.extend_from_slice(row);
            chk_start.push(chk_var.len());
        }
        let n_chk_edges = chk_var.len();
        let kp = precode.k_prime();
        Self {
            precode,
            clamp: F::lit(LLR_CLAMP),
            out_start: vec![0],
            out_var: Vec::new(),
            channel: Vec::new(),
            msg_oi: Vec::new(),
            tanh_io: Vec::new(),
            chk_start,
            chk_var,
            msg_cv: vec![F::zero(); n_chk_edges],
            tanh_vc: vec![F::zero(); n_chk_edges],
            total: vec![F::zero(); kp],
            hard: vec![0; kp],
            undecided: kp,
            iterations: 0,
        }
    }

    pub fn num_symbols(&self) -> usize {
        self.channel.len()
    }

    /// Iterations run over the decoder's lifetime.
    pub fn total_iterations(&self) -> usize {
        self.iterations
    }

    pub fn num_edges(&self) -> usize {
        self.out_var.len() + self.chk_var.len()
    }

    /// Appends output symbols with their channel LLRs and index sets. New
    /// edges start from the current belief of their input node.
    pub fn push_symbols(&mut self, llrs: &[F], index_sets: &[Vec<u32>]) -> Result<()> {
        if llrs.len() != index_sets.len() {
            return Err(Error::LengthMismatch { expected: index_sets.len(), actual: llrs.len() });
        }
        let kp = self.precode.k_prime() as u32;
        for (&m0, set) in llrs.iter().zip(index_sets) {
            if set.is_empty() || set.iter().any(|&i| i >= kp) {
                return Err(Error::InvalidParameter { name: "index_sets", reason: "empty set or index >= k'".into() });
            }
            self.channel.push(m0);
            for &i in set {
                self.out_var.push(i);
                self.msg_oi.push(F::zero());
                self.tanh_io.push(half_tanh(self.total[i as usize], self.clamp));
            }
            self.out_start.push(self.out_var.len());
        }
        Ok(())
    }

    /// Forgets every message, keeping the graph and channel LLRs.
    pub fn reset_messages(&mut self) {
        self.msg_oi.iter_mut().for_each(|m| *m = F::zero());
        self.tanh_io.iter_mut().for_each(|m| *m = F::zero());
        self.msg_cv.iter_mut().for_each(|m| *m = F::zero());
        self.tanh_vc.iter_mut().for_each(|m| *m = F::zero());
        self.total.iter_mut().for_each(|m| *m = F::zero());
        self.hard.iter_mut().for_each(|h| *h = 0);
        self.undecided = self.hard.len();
    }

    /// Runs up to `cfg.max_iters` iterations.
    pub fn run(&mut self, cfg: DecoderConfig) -> DecodeOutcome {
        let mut used = 0;
        let mut ok = false;
        for _ in 0..cfg.max_iters {
            self.iterate();
            used += 1;
            // A node no message has reached yet reads as zero, and the all-zero
            // word satisfies every precode relation.
            ok = self.undecided == 0 && self.precode.checks_pass(&self.hard);
            if ok && cfg.early_exit {
                break;
            }
        }
        self.iterations += used;
        if ok {
            DecodeOutcome {
                status: DecodeStatus::Success,
                u_hat: Some(self.hard[..self.precode.k()].to_vec()),
                iters_used: used,
            }
        } else {
            DecodeOutcome { status: DecodeStatus::Failure, u_hat: None, iters_used: used }
        }
    }

    /// Aggregated input-node LLRs after the last iteration.
    pub fn posteriors(&self) -> &[F] {
        &self.total
    }

    pub fn hard_decisions(&self) -> &[u8] {
        &self.hard
    }

    /// Output-to-input messages of the last iteration, edge order.
    pub fn output_messages(&self) -> &[F] {
        &self.msg_oi
    }

    fn iterate(&mut self) {
        let clamp = self.clamp;
        // output -> input
        for o in 0..self.channel.len() {
            let (a, b) = (self.out_start[o], self.out_start[o + 1]);
            let head = half_tanh(self.channel[o], clamp);
            exclusive_products(head, &self.tanh_io[a..b], &mut self.msg_oi[a..b], clamp);
        }
        // check -> variable
        for c in 0..self.chk_start.len() - 1 {
            let (a, b) = (self.chk_start[c], self.chk_start[c + 1]);
            exclusive_products(F::one(), &self.tanh_vc[a..b], &mut self.msg_cv[a..b], clamp);
        }
        // input totals
        self.total.iter_mut().for_each(|t| *t = F::zero());
        for (&v, &m) in self.out_var.iter().zip(&self.msg_oi) {
            self.total[v as usize] += m;
        }
        for (&v, &m) in self.chk_var.iter().zip(&self.msg_cv) {
            self.total[v as usize] += m;
        }
        // input -> output, input -> check
        let total = &self.total;
        for ((t, &v), &m) in self.tanh_io.iter_mut().zip(&self.out_var).zip(&self.msg_oi) {
            *t = half_tanh(total[v as usize] - m, clamp);
        }
        for ((t, &v), &m) in self.tanh_vc.iter_mut().zip(&self.chk_var).zip(&self.msg_cv) {
            *t = half_tanh(total[v as usize] - m, clamp);
        }
        self.undecided = 0;
        for (h, &t) in self.hard.iter_mut().zip(total) {
            *h = u8::from(t < F::zero());
            self.undecided += usize::from(t == F::zero());
        }
    }
}

/// `tanh(llr / 2)` of the clamped LLR, through a single `exp`.
#[inline]
fn half_tanh<F: Real>(llr: F, clamp: F) -> F {
    let one = F::one();
    let e = (-llr.abs().min(clamp)).exp();
    let t = (one - e) / (one + e);
    if llr < F::zero() {
        -t
    } else {
        t
    }
}

/// `2 atanh(t) = ln((1 + t) / (1 - t))`, clamped.
#[inline]
fn atanh2<F: Real>(t: F, clamp: F) -> F {
    let one = F::one();
    if t >= one {
        return clamp;
    }
    if t <= -one {
        return -clamp;
    }
    ((one + t) / (one - t)).ln().max(-clamp).min(clamp)
}

/// `out[e] = 2 atanh(head * prod_{e' != e} tanhs[e'])`.
#[inline]
fn exclusive_products<F: Real>(head: F, tanhs: &[F], out: &mut [F], clamp: F) {
    let mut prefix = head;
    for (o, &t) in out.iter_mut().zip(tanhs) {
        *o = prefix;
        prefix *= t;
    }
    let mut suffix = F::one();
    for (o, &t) in out.iter_mut().zip(tanhs).rev() {
        *o = atanh2(*o * suffix, clamp);
        suffix *= t;
    }
}

/// One-shot decode of the first `llrs.len()` symbols of `plan`.
pub fn bp_decode<F: Real>(
    llrs: &[F],
    plan: &RaptorBlockPlan,
    precode: &Precode,
    cfg: DecoderConfig,
) -> Result<DecodeOutcome> {
    if plan.k_prime() != precode.k_prime() {
        return Err(Error::LengthMismatch { expected: precode.k_prime(), actual: plan.k_prime() });
    }
    if llrs.len() > plan.len() {
        return Err(Error::LengthMismatch { expected: plan.len(), actual: llrs.len() });
    }
    let mut dec = RaptorDecoder::new(precode);
    dec.push_symbols(llrs, &plan.index_sets()[..llrs.len()])?;
    Ok(dec.run(cfg))
}

/// Channel LLRs of BIAWGN observations, `2 snr y`.
pub fn channel_llr<F: Real>(y: &[F], snr: F) -> Vec<F> {
    let s = F::lit(2.0) * snr;
    y.iter().map(|&v| s * v).collect()
}
