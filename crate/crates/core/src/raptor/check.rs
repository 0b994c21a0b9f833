//! Check code `r` Bob sends so Alice can reject decodes that satisfy the
//! precode but differ from `u`.

use crate::error::{invalid, Result};
use crc::{Crc, CRC_64_ECMA_182};

pub const DEFAULT_CHECK_WIDTH: u32 = 64;

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_ECMA_182);

/// CRC-64/ECMA-182 (polynomial `0x42F0E1EBA9EA3693`) over the bits of `u`
/// packed LSB-first into bytes, with the bit length appended as a
/// little-endian `u64`, truncated to the low `width` bits.
pub fn check_code(u: &[u8], width: u32) -> Result<u64> {
    if width == 0 || width > 64 {
        return Err(invalid("width", "must lie in 1..=64"));
    }
    let mut bytes = vec![0u8; u.len().div_ceil(8)];
    for (i, &b) in u.iter().enumerate() {
        bytes[i / 8] |= (b & 1) << (i % 8);
    }
    let mut digest = CRC64.digest();
    digest.update(&bytes);
    digest.update(&(u.len() as u64).to_le_bytes());
    let tag = digest.finalize();
    Ok(if width == 64 { tag } else { tag & ((1u64 << width) - 1) })
}
