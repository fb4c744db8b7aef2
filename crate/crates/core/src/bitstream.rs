// SPDX-License-Identifier: Apache-2.0

//! Bit-granular reader over one chunk of compressed bytes.
//!
//! Bytes move from the source into a small staging buffer in whole blocks
//! (128 bytes by default, one cache line). Bit reads are served from the
//! staging buffer through an 8-byte window, which is why a single request is
//! capped at [`MAX_FETCH_BITS`]: 57 bits always fit in one window whatever the
//! current bit position is.

use thiserror::Error;

/// Largest width accepted by [`InputBitStream::fetch_bits`] and
/// [`InputBitStream::peek_bits`].
pub const MAX_FETCH_BITS: u32 = 57;

/// Refill granularity used when none is given.
pub const DEFAULT_BLOCK_SIZE: usize = 128;

// Slack after the live bytes so an 8-byte window load never goes out of bounds.
const WINDOW_SLACK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BitReadError {
    #[error("read past end of compressed stream")]
    PastEnd,
    #[error("requested {0} bits, at most 57 can be read at once")]
    WidthTooLarge(u32),
    #[error("byte-level read while not on a byte boundary")]
    Unaligned,
    #[error("varint longer than 10 bytes or wider than 64 bits")]
    VarintOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitOrder {
    /// First consumed bit is the least significant bit of the result (RFC 1951).
    LsbFirst,
    /// First consumed bit is the most significant bit of the result (ORC bit packing).
    MsbFirst,
}

/// Counters for block transfers out of the source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadStats {
    pub refills: u64,
    /// Two per refill: one before the block is staged and one after.
    pub sync_points: u64,
    pub bytes_refilled: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputBitStream<'a> {
    source: &'a [u8],
    source_offset: usize,
    buf: Vec<u8>,
    capacity: usize,
    head: usize,
    buffered: usize,
    bit_pos: u32,
    block_size: usize,
    order: BitOrder,
    stats: ReadStats,
}

impl<'a> InputBitStream<'a> {
    /// Creates a stream over `chunk`. `block_size` of zero is treated as one.
    pub fn new(chunk: &'a [u8], order: BitOrder, block_size: usize) -> Self {
        let block_size = block_size.max(1);
        // Two blocks, and always room for a full block next to an 8-byte remainder.
        let capacity = (2 * block_size).max(block_size + WINDOW_SLACK);
        Self {
            source: chunk,
            source_offset: 0,
            buf: vec![0; capacity + WINDOW_SLACK],
            capacity,
            head: 0,
            buffered: 0,
            bit_pos: 0,
            block_size,
            order,
            stats: ReadStats::default(),
        }
    }

    pub fn with_defaults(chunk: &'a [u8], order: BitOrder) -> Self {
        Self::new(chunk, order, DEFAULT_BLOCK_SIZE)
    }

    #[inline]
    pub fn bit_order(&self) -> BitOrder {
        self.order
    }

    #[inline]
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn stats(&self) -> ReadStats {
        self.stats
    }

    #[inline]
    pub fn source_len(&self) -> usize {
        self.source.len()
    }

    #[inline]
    pub fn bit_position(&self) -> u32 {
        self.bit_pos
    }

    #[inline]
    pub fn is_byte_aligned(&self) -> bool {
        self.bit_pos == 0
    }

    #[inline]
    pub fn bits_consumed(&self) -> u64 {
        (self.source_offset as u64) * 8 - self.buffered_bits()
    }

    #[inline]
    pub fn bits_remaining(&self) -> u64 {
        (self.source.len() as u64) * 8 - self.bits_consumed()
    }

    /// Whole bytes consumed so far, counting a partly read byte as consumed.
    pub fn bytes_consumed(&self) -> usize {
        self.bits_consumed().div_ceil(8) as usize
    }

    pub fn is_exhausted(&self) -> bool {
        self.bits_remaining() == 0
    }

    #[inline]
    fn buffered_bits(&self) -> u64 {
        (self.buffered as u64) * 8 - self.bit_pos as u64
    }

    /// Stages one block from the source. Returns false when the source is drained.
    fn refill(&mut self) -> bool {
        let remaining = self.source.len() - self.source_offset;
        if remaining == 0 {
            return false;
        }
        let n = remaining.min(self.block_size);
        if self.head + self.buffered + n > self.capacity {
            self.buf.copy_within(self.head..self.head + self.buffered, 0);
            self.head = 0;
        }
        debug_assert!(self.buffered + n <= self.capacity);
        let dst = self.head + self.buffered;
        self.buf[dst..dst + n].copy_from_slice(&self.source[self.source_offset..self.source_offset + n]);
        self.source_offset += n;
        self.buffered += n;
        self.stats.refills += 1;
        self.stats.sync_points += 2;
        self.stats.bytes_refilled += n as u64;
        true
    }

    #[inline]
    fn ensure_bits(&mut self, n: u32) {
        while self.buffered_bits() < n as u64 && self.refill() {}
    }

    /// Value of the next `n` bits given the 8-byte window at the read head and
    /// the number of real bits in it.
    #[inline]
    fn extract(&self, bytes: [u8; 8], avail: u64, n: u32) -> u64 {
        match self.order {
            BitOrder::LsbFirst => {
                let v = u64::from_le_bytes(bytes) >> self.bit_pos;
                let keep = (n as u64).min(avail) as u32;
                v & low_mask(keep)
            }
            BitOrder::MsbFirst => {
                let v = (u64::from_be_bytes(bytes) << self.bit_pos) >> (64 - n);
                if avail < n as u64 {
                    let missing = n - avail as u32;
                    (v >> missing) << missing
                } else {
                    v
                }
            }
        }
    }

    #[inline]
    fn staged_window(&self) -> [u8; 8] {
        self.buf[self.head..self.head + 8].try_into().unwrap()
    }

    #[inline]
    fn consume(&mut self, n: u32) {
        let bits = self.bit_pos + n;
        let whole = (bits / 8) as usize;
        self.head += whole;
        self.buffered -= whole;
        self.bit_pos = bits % 8;
        if self.buffered == 0 {
            self.head = 0;
        }
    }

    pub fn fetch_bits(&mut self, n: u32) -> Result<u64, BitReadError> {
        if n > MAX_FETCH_BITS {
            return Err(BitReadError::WidthTooLarge(n));
        }
        if n == 0 {
            return Ok(0);
        }
        self.ensure_bits(n);
        if self.buffered_bits() < n as u64 {
            return Err(BitReadError::PastEnd);
        }
        let v = self.extract(self.staged_window(), n as u64, n);
        self.consume(n);
        Ok(v)
    }

    /// Same value a following `fetch_bits(n)` would return, without consuming
    /// anything or staging new blocks. Bits past the end of the source read as
    /// zero as long as one real bit remains.
    pub fn peek_bits(&self, n: u32) -> Result<u64, BitReadError> {
        if n > MAX_FETCH_BITS {
            return Err(BitReadError::WidthTooLarge(n));
        }
        if n == 0 {
            return Ok(0);
        }
        let staged = self.buffered_bits();
        if staged >= n as u64 {
            return Ok(self.extract(self.staged_window(), n as u64, n));
        }
        // Not enough staged: look through to the unstaged source bytes.
        let mut window = [0u8; 8];
        let from_buf = self.buffered.min(8);
        window[..from_buf].copy_from_slice(&self.buf[self.head..self.head + from_buf]);
        let unstaged = &self.source[self.source_offset..];
        let from_src = (8 - from_buf).min(unstaged.len());
        window[from_buf..from_buf + from_src].copy_from_slice(&unstaged[..from_src]);
        let avail = ((from_buf + from_src) as u64) * 8 - self.bit_pos as u64;
        if avail == 0 {
            return Err(BitReadError::PastEnd);
        }
        Ok(self.extract(window, avail, n))
    }

    /// Discards `n` bits previously inspected with `peek_bits`.
    pub fn skip_bits(&mut self, n: u32) -> Result<(), BitReadError> {
        self.fetch_bits(n).map(|_| ())
    }

    pub fn align_to_byte(&mut self) {
        if self.bit_pos != 0 {
            self.consume(8 - self.bit_pos);
        }
    }

    pub fn read_bytes(&mut self, dst: &mut [u8]) -> Result<(), BitReadError> {
        if self.bit_pos != 0 {
            return Err(BitReadError::Unaligned);
        }
        if dst.is_empty() {
            return Ok(());
        }
        let available = self.buffered + (self.source.len() - self.source_offset);
        if dst.len() > available {
            return Err(BitReadError::PastEnd);
        }

        let mut filled = self.drain_buffer(dst);
        // Whole blocks go straight to the destination; each still counts as one refill.
        while dst.len() - filled >= self.block_size {
            let n = self.block_size;
            dst[filled..filled + n].copy_from_slice(&self.source[self.source_offset..self.source_offset + n]);
            self.source_offset += n;
            self.stats.refills += 1;
            self.stats.sync_points += 2;
            self.stats.bytes_refilled += n as u64;
            filled += n;
        }
        while filled < dst.len() {
            let ok = self.refill();
            debug_assert!(ok);
            filled += self.drain_buffer(&mut dst[filled..]);
        }
        Ok(())
    }

    fn drain_buffer(&mut self, dst: &mut [u8]) -> usize {
        let n = dst.len().min(self.buffered);
        dst[..n].copy_from_slice(&self.buf[self.head..self.head + n]);
        self.consume(8 * n as u32);
        n
    }

    #[inline]
    pub fn read_u8(&mut self) -> Result<u8, BitReadError> {
        if self.bit_pos != 0 {
            return Err(BitReadError::Unaligned);
        }
        Ok(self.fetch_bits(8)? as u8)
    }

    /// Base-128 varint, least significant group first, at most 10 bytes.
    pub fn read_varint_u64(&mut self) -> Result<u64, BitReadError> {
        let mut value = 0u64;
        for i in 0..10 {
            let byte = self.read_u8()?;
            let group = (byte & 0x7f) as u64;
            if i == 9 && group > 1 {
                return Err(BitReadError::VarintOverflow);
            }
            value |= group << (7 * i);
            if byte & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(BitReadError::VarintOverflow)
    }

    pub fn read_varint_s64(&mut self) -> Result<i64, BitReadError> {
        self.read_varint_u64().map(zigzag_decode)
    }
}

#[inline]
fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[inline]
pub fn zigzag_decode(z: u64) -> i64 {
    ((z >> 1) as i64) ^ -((z & 1) as i64)
}

#[inline]
pub fn zigzag_encode(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

pub fn write_varint_u64(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

pub fn write_varint_s64(out: &mut Vec<u8>, v: i64) {
    write_varint_u64(out, zigzag_encode(v));
}
