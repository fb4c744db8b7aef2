// SPDX-License-Identifier: Apache-2.0

//! ORC run-length encoding, version 1.
//!
//! Integer streams (element width 2, 4, 8) are groups introduced by a signed
//! control byte `c`:
//! - `0..=127`: a run of `c + 3` values, then a signed delta byte, then the
//!   base value as a varint. Value `k` of the run is `base + k * delta`.
//! - `-128..=-1`: `-c` literal values, each a varint.
//!
//! Byte streams (element width 1) use the byte variant: a run is `c + 3`
//! copies of the single raw byte that follows, literals are raw bytes.
//!
//! `[0x61, 0x00, 0x07]` is a hundred 7s in an integer stream.

use crate::bitstream::{write_varint_u64, InputBitStream};
use crate::container::ElementWidth;
use crate::outwindow::OutputWindow;

use super::{sign_extend, CodecError, Decoder, Signedness};

const MIN_RUN: usize = 3;
const MAX_RUN: usize = 127 + MIN_RUN;
const MAX_LITERALS: usize = 128;

#[derive(Debug, Clone, Copy, Default)]
pub struct RleV1Decoder {
    pub sign: Signedness,
}

impl Decoder for RleV1Decoder {
    fn decode(&self, input: &mut InputBitStream<'_>, out: &mut OutputWindow<'_>) -> Result<(), CodecError> {
        decode_rle_v1(input, out, self.sign)
    }
}

pub fn decode_rle_v1(
    input: &mut InputBitStream<'_>,
    out: &mut OutputWindow<'_>,
    sign: Signedness,
) -> Result<(), CodecError> {
    let bytes_mode = out.element_width() == ElementWidth::W1;
    let mut literal_buf = [0u8; MAX_LITERALS];
    while !out.is_full() && !input.is_exhausted() {
        let control = input.read_u8()? as i8;
        if control >= 0 {
            let len = control as usize + MIN_RUN;
            if bytes_mode {
                let value = input.read_u8()?;
                out.write_run(value as u64, len, 0)?;
            } else {
                let delta = input.read_u8()? as i8;
                let base = sign.decode(input.read_varint_u64()?);
                out.write_run(base, len, delta as i64)?;
            }
        } else {
            let count = control.unsigned_abs() as usize;
            if bytes_mode {
                let dst = &mut literal_buf[..count];
                input.read_bytes(dst)?;
                out.write_literal_bytes(dst)?;
            } else {
                for _ in 0..count {
                    let v = sign.decode(input.read_varint_u64()?);
                    out.write_element(v)?;
                }
            }
        }
    }
    Ok(())
}

fn varint_len(v: u64) -> usize {
    (64 - v.leading_zeros() as usize).div_ceil(7).max(1)
}

/// Encodes `values` (low `width` bits significant) so that `decode_rle_v1`
/// reproduces them exactly.
pub fn encode_rle_v1(values: &[u64], width: ElementWidth, sign: Signedness) -> Vec<u8> {
    if width == ElementWidth::W1 {
        encode_bytes(values)
    } else {
        encode_ints(values, width, sign)
    }
}

fn encode_bytes(values: &[u64]) -> Vec<u8> {
    let bytes: Vec<u8> = values.iter().map(|&v| v as u8).collect();
    let mut out = Vec::with_capacity(bytes.len() / 2 + 8);
    let mut literals_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let run = bytes[i..].iter().take(MAX_RUN).take_while(|&&x| x == b).count();
        if run >= MIN_RUN {
            flush_byte_literals(&mut out, &bytes[literals_start..i]);
            out.push((run - MIN_RUN) as u8);
            out.push(b);
            i += run;
            literals_start = i;
        } else {
            i += 1;
        }
    }
    flush_byte_literals(&mut out, &bytes[literals_start..]);
    out
}

fn flush_byte_literals(out: &mut Vec<u8>, lits: &[u8]) {
    for group in lits.chunks(MAX_LITERALS) {
        out.push((group.len() as i8).wrapping_neg() as u8);
        out.extend_from_slice(group);
    }
}

/// Length of the constant-delta run starting at `i`, with its delta.
fn run_at(values: &[u64], i: usize, width: ElementWidth) -> (usize, i64) {
    let mask = width.mask();
    if i + 1 >= values.len() {
        return (1, 0);
    }
    let delta = sign_extend(values[i + 1].wrapping_sub(values[i]) & mask, width);
    if !(-128..=127).contains(&delta) {
        return (1, 0);
    }
    let mut len = 2;
    while i + len < values.len() && len < MAX_RUN {
        let next = values[i + len - 1].wrapping_add(delta as u64) & mask;
        if values[i + len] & mask != next {
            break;
        }
        len += 1;
    }
    (len, delta)
}

fn encode_ints(values: &[u64], width: ElementWidth, sign: Signedness) -> Vec<u8> {
    let mask = width.mask();
    let coded = |v: u64| sign.encode(v & mask, width);
    let mut out = Vec::with_capacity(values.len() + 8);
    let mut literals: Vec<u64> = Vec::with_capacity(MAX_LITERALS);
    let mut i = 0;
    while i < values.len() {
        let (len, delta) = run_at(values, i, width);
        if len >= MIN_RUN {
            let base = coded(values[i]);
            let as_literals: usize = values[i..i + len].iter().map(|&v| varint_len(coded(v))).sum();
            // A run that saves less than a group header is left in the literal group.
            if as_literals >= 2 + varint_len(base) + 2 {
                flush_int_literals(&mut out, &mut literals);
                out.push((len - MIN_RUN) as u8);
                out.push(delta as i8 as u8);
                write_varint_u64(&mut out, base);
                i += len;
                continue;
            }
        }
        literals.push(coded(values[i]));
        if literals.len() == MAX_LITERALS {
            flush_int_literals(&mut out, &mut literals);
        }
        i += 1;
    }
    flush_int_literals(&mut out, &mut literals);
    out
}

fn flush_int_literals(out: &mut Vec<u8>, literals: &mut Vec<u64>) {
    if literals.is_empty() {
        return;
    }
    out.push((literals.len() as i8).wrapping_neg() as u8);
    for &v in literals.iter() {
        write_varint_u64(out, v);
    }
    literals.clear();
}
