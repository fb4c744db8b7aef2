// SPDX-License-Identifier: Apache-2.0

//! Synthetic inputs with the value distributions columnar data tends to have.
//!
//! All generators are deterministic in `(kind, len, width, seed)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::container::ElementWidth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorpusKind {
    /// Long runs of one repeated element.
    ConstantRun,
    /// Segments of constant stride, wrapping at the element width.
    Arithmetic,
    /// Independent uniform bytes.
    UniformRandom,
    /// Zipf-distributed element values.
    PowerLaw,
    /// `ACGT` text with repeats and stretches of `N`.
    Genome,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 5] = [
        CorpusKind::ConstantRun,
        CorpusKind::Arithmetic,
        CorpusKind::UniformRandom,
        CorpusKind::PowerLaw,
        CorpusKind::Genome,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::ConstantRun => "constant",
            CorpusKind::Arithmetic => "arithmetic",
            CorpusKind::UniformRandom => "random",
            CorpusKind::PowerLaw => "powerlaw",
            CorpusKind::Genome => "genome",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl std::fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `len` is rounded down to a multiple of the element width.
pub fn generate(kind: CorpusKind, len: usize, width: ElementWidth, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (kind as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let w = width.bytes();
    let len = len - len % w;
    let mut out = Vec::with_capacity(len);
    match kind {
        CorpusKind::ConstantRun => {
            while out.len() < len {
                let v = rng.next_u64() & width.mask();
                let run = rng.random_range(64..4096);
                push_elements(&mut out, len, width, (0..run).map(|_| v));
            }
        }
        CorpusKind::Arithmetic => {
            while out.len() < len {
                let start = rng.next_u64() & (width.mask() >> 1);
                let delta: i64 = rng.random_range(-8..=8);
                let run = rng.random_range(256..4096u64);
                let seq = (0..run).map(|k| start.wrapping_add((delta * k as i64) as u64) & width.mask());
                push_elements(&mut out, len, width, seq);
            }
        }
        CorpusKind::UniformRandom => {
            out.resize(len, 0);
            rng.fill_bytes(&mut out);
        }
        CorpusKind::PowerLaw => {
            let n = (width.mask().min(1 << 16) + 1) as f64;
            let zipf = Zipf::new(n, 1.2).expect("valid zipf parameters");
            while out.len() < len {
                let v = zipf.sample(&mut rng) as u64 - 1;
                push_elements(&mut out, len, width, std::iter::once(v));
            }
        }
        CorpusKind::Genome => genome(&mut rng, &mut out, len),
    }
    debug_assert_eq!(out.len(), len);
    out
}

fn push_elements(out: &mut Vec<u8>, len: usize, width: ElementWidth, values: impl Iterator<Item = u64>) {
    let w = width.bytes();
    for v in values {
        if out.len() >= len {
            return;
        }
        out.extend_from_slice(&v.to_le_bytes()[..w]);
    }
}

fn genome(rng: &mut ChaCha8Rng, out: &mut Vec<u8>, len: usize) {
    const BASES: &[u8; 4] = b"ACGT";
    while out.len() < len {
        let left = len - out.len();
        match rng.random_range(0..100) {
            // Repeat an earlier stretch with a few point mutations.
            0..=29 if out.len() > 1024 => {
                let n = rng.random_range(32..1024).min(left);
                let from = rng.random_range(0..out.len() - n);
                for k in 0..n {
                    let b = if rng.random_range(0..50) == 0 {
                        BASES[rng.random_range(0..4)]
                    } else {
                        out[from + k]
                    };
                    out.push(b);
                }
            }
            30 => {
                let n = rng.random_range(16..512).min(left);
                out.extend(std::iter::repeat_n(b'N', n));
            }
            _ => {
                let n = rng.random_range(16..256).min(left);
                out.extend((0..n).map(|_| BASES[rng.random_range(0..4)]));
            }
        }
    }
}

/// Byte data whose chunks differ sharply in decode cost: every eighth group
/// of eight chunks is genome text, the rest are constant runs.
pub fn skewed(len: usize, chunk_size: usize, seed: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut i = 0u64;
    while out.len() < len {
        let n = chunk_size.min(len - out.len());
        let kind = if (i / 8).is_multiple_of(8) {
            CorpusKind::Genome
        } else {
            CorpusKind::ConstantRun
        };
        out.extend(generate(kind, n, ElementWidth::W1, seed.wrapping_add(i)));
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        for kind in CorpusKind::ALL {
            for w in [ElementWidth::W1, ElementWidth::W2, ElementWidth::W4, ElementWidth::W8] {
                let a = generate(kind, 10_001, w, 7);
                assert_eq!(a.len(), 10_001 - 10_001 % w.bytes(), "{kind} {w:?}");
                assert_eq!(a, generate(kind, 10_001, w, 7));
            }
            assert_ne!(
                generate(kind, 4096, ElementWidth::W1, 1),
                generate(kind, 4096, ElementWidth::W1, 2)
            );
            assert_eq!(CorpusKind::from_name(kind.name()), Some(kind));
        }
    }

    #[test]
    fn genome_alphabet() {
        let g = generate(CorpusKind::Genome, 50_000, ElementWidth::W1, 3);
        assert!(g.iter().all(|b| b"ACGTN".contains(b)));
    }

    #[test]
    fn power_law_is_skewed() {
        let p = generate(CorpusKind::PowerLaw, 40_000, ElementWidth::W2, 5);
        let zeros = p.chunks(2).filter(|c| c == &[0, 0]).count();
        // The most frequent value takes a large share under s = 1.2.
        assert!(zeros > 20_000 / 10, "{zeros}");
    }

    #[test]
    fn skewed_layout() {
        let s = skewed(64 * 1024, 1024, 9);
        assert_eq!(s.len(), 64 * 1024);
        assert!(s[..1024].iter().all(|b| b"ACGTN".contains(b)));
        let c = &s[8 * 1024..9 * 1024];
        assert!(c.windows(2).filter(|w| w[0] != w[1]).count() < 20);
    }
}
