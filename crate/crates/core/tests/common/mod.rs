// SPDX-License-Identifier: Apache-2.0

//! Reference models shared by the integration tests.

#![allow(dead_code)]

use chunkdec::bitstream::{BitOrder, InputBitStream};
use chunkdec::container::ElementWidth;
use chunkdec::outwindow::OutputWindow;

/// Reads bits by indexing the source directly, one bit at a time.
pub struct RefReader<'a> {
    pub src: &'a [u8],
    pub order: BitOrder,
    pub pos: u64,
}

impl<'a> RefReader<'a> {
    pub fn new(src: &'a [u8], order: BitOrder) -> Self {
        Self { src, order, pos: 0 }
    }

    pub fn bit(&self, i: u64) -> u64 {
        let byte = self.src[(i / 8) as usize];
        let shift = match self.order {
            BitOrder::LsbFirst => i % 8,
            BitOrder::MsbFirst => 7 - i % 8,
        };
        ((byte >> shift) & 1) as u64
    }

    pub fn remaining(&self) -> u64 {
        self.src.len() as u64 * 8 - self.pos
    }

    /// `None` when fewer than `n` bits remain.
    pub fn fetch(&mut self, n: u32) -> Option<u64> {
        if (n as u64) > self.remaining() {
            return None;
        }
        let mut v = 0u64;
        for k in 0..n as u64 {
            let b = self.bit(self.pos + k);
            match self.order {
                BitOrder::LsbFirst => v |= b << k,
                BitOrder::MsbFirst => v = (v << 1) | b,
            }
        }
        self.pos += n as u64;
        Some(v)
    }

    pub fn align(&mut self) {
        self.pos = self.pos.div_ceil(8) * 8;
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Op {
    Fetch(u32),
    Peek(u32),
    Skip(u32),
    Align,
    ReadBytes(usize),
}

/// Applies `ops` to both readers, then drains the stream. Returns the
/// number of refills observed after full consumption.
pub fn run_interleaving(src: &[u8], order: BitOrder, block: usize, ops: &[Op]) -> Result<u64, String> {
    let mut s = InputBitStream::new(src, order, block);
    let mut r = RefReader::new(src, order);
    for (step, &op) in ops.iter().enumerate() {
        let ctx = |what: &str| format!("step {step} {op:?}: {what}");
        match op {
            Op::Fetch(n) | Op::Skip(n) => {
                let want = r.fetch(n);
                let got = s.fetch_bits(n);
                match (want, got) {
                    (Some(w), Ok(g)) if w == g => {}
                    (None, Err(_)) => {}
                    (w, g) => return Err(ctx(&format!("want {w:?} got {g:?}"))),
                }
            }
            Op::Peek(n) => {
                let before = s.clone();
                let got = s.peek_bits(n);
                if s != before {
                    return Err(ctx("peek changed state"));
                }
                let mut probe = RefReader {
                    pos: r.pos,
                    ..RefReader::new(src, order)
                };
                let avail = probe.remaining().min(n as u64) as u32;
                if avail == 0 {
                    if got.is_ok() && n > 0 {
                        return Err(ctx("peek past end succeeded"));
                    }
                    continue;
                }
                let mut want = probe.fetch(avail).unwrap();
                if order == BitOrder::MsbFirst {
                    want <<= n - avail;
                }
                if got != Ok(want) {
                    return Err(ctx(&format!("want {want:#x} got {got:?}")));
                }
            }
            Op::Align => {
                s.align_to_byte();
                r.align();
            }
            Op::ReadBytes(k) => {
                if !s.is_byte_aligned() {
                    s.align_to_byte();
                    r.align();
                }
                let mut dst = vec![0u8; k];
                let got = s.read_bytes(&mut dst);
                if (k as u64) * 8 > r.remaining() {
                    if got.is_ok() {
                        return Err(ctx("read past end succeeded"));
                    }
                    continue;
                }
                got.map_err(|e| ctx(&e.to_string()))?;
                let start = (r.pos / 8) as usize;
                if dst != src[start..start + k] {
                    return Err(ctx("bytes differ from source"));
                }
                r.pos += 8 * k as u64;
            }
        }
        if s.bits_consumed() != r.pos {
            return Err(ctx(&format!("position {} vs reference {}", s.bits_consumed(), r.pos)));
        }
    }
    while r.remaining() > 0 {
        let n = r.remaining().min(57) as u32;
        let want = r.fetch(n).unwrap();
        if s.fetch_bits(n) != Ok(want) {
            return Err("drain mismatch".into());
        }
    }
    if !s.is_exhausted() {
        return Err("stream not exhausted after drain".into());
    }
    Ok(s.stats().refills)
}

/// Naive byte-at-a-time match copy.
pub fn naive_copy(buf: &mut Vec<u8>, offset: usize, len: usize) {
    for _ in 0..len {
        let b = buf[buf.len() - offset];
        buf.push(b);
    }
}

/// Runs `copy_within(offset, len)` after a prefix of `prefix` bytes and
/// compares against [`naive_copy`]. Returns a description on mismatch.
pub fn check_copy(prefix: &[u8], offset: usize, len: usize) -> Result<(), String> {
    let mut expected = prefix.to_vec();
    naive_copy(&mut expected, offset, len);

    let total = prefix.len() + len;
    // Slack past the end catches stray writes.
    let mut buf = vec![0xEEu8; total + 16];
    let mut w = OutputWindow::new(&mut buf[..total], ElementWidth::W1);
    w.write_literal_bytes(prefix).map_err(|e| e.to_string())?;
    w.copy_within(offset, len).map_err(|e| e.to_string())?;
    if w.write_pos() != total {
        return Err(format!("write_pos {} != {total}", w.write_pos()));
    }
    if buf[..total] != expected[..] {
        return Err(format!(
            "offset {offset} len {len} prefix {}: output differs",
            prefix.len()
        ));
    }
    if buf[total..].iter().any(|&b| b != 0xEE) {
        return Err("wrote past the window".into());
    }
    Ok(())
}
