//! Classical messages exchanged during one reconciliation run and their
//! archival format.
//!
//! File layout (all integers little endian):
//!
//! ```text
//! magic  "RRTX"            4 bytes
//! version u16              currently 1
//! record*                  tag u8, payload length u32, payload
//! ```
//!
//! | tag | record      | payload                                                        |
//! |-----|-------------|----------------------------------------------------------------|
//! | 1   | `Header`    | d u32, k u32, k' u32, graph seed u64, check width u32, distribution text (u16 length + UTF-8) |
//! | 2   | `CheckCode` | tag u64                                                        |
//! | 3   | `Request`   | total symbols requested u64                                    |
//! | 4   | `Mappings`  | first chunk u64, chunk count u32, count x d coefficients f64   |
//! | 5   | `Stop`      | symbols used u64                                               |
//! | 6   | `Abandon`   | symbols used u64                                               |
//!
//! A mapping function is carried as its coefficient vector over the public
//! [`AlgebraBasis`](crate::multidim::AlgebraBasis); that determines the
//! matrix exactly.

use crate::error::{Error, Result};

pub const TRANSCRIPT_MAGIC: &[u8; 4] = b"RRTX";
pub const TRANSCRIPT_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    /// Bob: block parameters, the LT graph seed and the degree distribution
    /// in [`DegreeDistribution::to_text`](crate::raptor::DegreeDistribution::to_text) form.
    Header { d: u32, k: u32, k_prime: u32, graph_seed: u64, check_width: u32, distribution: String },
    /// Bob: check code `r` of his message.
    CheckCode { tag: u64 },
    /// Alice: asks Bob to extend the symbol stream to `total_symbols`.
    Request { total_symbols: u64 },
    /// Bob: mapping functions of chunks `first_chunk..first_chunk + count`.
    Mappings { first_chunk: u64, coefficients: Vec<f64> },
    /// Alice: decoding succeeded and `r` verified.
    Stop { n_used: u64 },
    /// Alice: symbol budget exhausted, the block is discarded.
    Abandon { n_used: u64 },
}

/// Ordered list of every message of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionTranscript {
    messages: Vec<Message>,
}

impl SessionTranscript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, m: Message) {
        self.messages.push(m);
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Bytes disclosed on the public channel, excluding framing.
    pub fn disclosed_bytes(&self) -> usize {
        self.to_bytes().len() - 6 - 5 * self.messages.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(TRANSCRIPT_MAGIC);
        out.extend_from_slice(&TRANSCRIPT_VERSION.to_le_bytes());
        for m in &self.messages {
            let (tag, payload) = encode(m);
            out.push(tag);
            out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
            out.extend_from_slice(&payload);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != TRANSCRIPT_MAGIC {
            return Err(Error::Transcript("bad magic".into()));
        }
        let version = r.u16()?;
        if version != TRANSCRIPT_VERSION {
            return Err(Error::Transcript(format!("unsupported version {version}")));
        }
        let mut messages = Vec::new();
        while r.pos < bytes.len() {
            let tag = r.take(1)?[0];
            let len = r.u32()? as usize;
            let payload = r.take(len)?;
            messages.push(decode(tag, payload)?);
        }
        Ok(Self { messages })
    }
}

fn encode(m: &Message) -> (u8, Vec<u8>) {
    let mut p = Vec::new();
    let tag = match m {
        Message::Header { d, k, k_prime, graph_seed, check_width, distribution } => {
            p.extend_from_slice(&d.to_le_bytes());
            p.extend_from_slice(&k.to_le_bytes());
            p.extend_from_slice(&k_prime.to_le_bytes());
            p.extend_from_slice(&graph_seed.to_le_bytes());
            p.extend_from_slice(&check_width.to_le_bytes());
            p.extend_from_slice(&(distribution.len() as u16).to_le_bytes());
            p.extend_from_slice(distribution.as_bytes());
            1
        }
        Message::CheckCode { tag } => {
            p.extend_from_slice(&tag.to_le_bytes());
            2
        }
        Message::Request { total_symbols } => {
            p.extend_from_slice(&total_symbols.to_le_bytes());
            3
        }
        Message::Mappings { first_chunk, coefficients } => {
            p.extend_from_slice(&first_chunk.to_le_bytes());
            p.extend_from_slice(&(coefficients.len() as u32).to_le_bytes());
            for c in coefficients {
                p.extend_from_slice(&c.to_bits().to_le_bytes());
            }
            4
        }
        Message::Stop { n_used } => {
            p.extend_from_slice(&n_used.to_le_bytes());
            5
        }
        Message::Abandon { n_used } => {
            p.extend_from_slice(&n_used.to_le_bytes());
            6
        }
    };
    (tag, p)
}

fn decode(tag: u8, payload: &[u8]) -> Result<Message> {
    let mut r = Reader { buf: payload, pos: 0 };
    let m = match tag {
        1 => {
            let (d, k, k_prime, graph_seed, check_width) = (r.u32()?, r.u32()?, r.u32()?, r.u64()?, r.u32()?);
            let n = r.u16()? as usize;
            let distribution = String::from_utf8(r.take(n)?.to_vec()).map_err(|_| Error::Transcript("bad utf-8".into()))?;
            Message::Header { d, k, k_prime, graph_seed, check_width, distribution }
        }
        2 => Message::CheckCode { tag: r.u64()? },
        3 => Message::Request { total_symbols: r.u64()? },
        4 => {
            let first_chunk = r.u64()?;
            let n = r.u32()? as usize;
            let coefficients = (0..n).map(|_| r.u64().map(f64::from_bits)).collect::<Result<Vec<_>>>()?;
            Message::Mappings { first_chunk, coefficients }
        }
        5 => Message::Stop { n_used: r.u64()? },
        6 => Message::Abandon { n_used: r.u64()? },
        other => return Err(Error::Transcript(format!("unknown record tag {other}"))),
    };
    if r.pos != payload.len() {
        return Err(Error::Transcript(format!("trailing bytes in record {tag}")));
    }
    Ok(m)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| Error::Transcript("truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
