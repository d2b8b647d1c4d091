use serde::{Deserialize, Serialize};

use crate::tokenize::tokens;

/// Maps text to a fixed-dimension feature vector.
pub trait Encoder: Send + Sync {
    fn dim(&self) -> usize;
    fn encode(&self, text: &str) -> Vec<f64>;
}

/// Signed feature hashing of token n-grams, L2-normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceEncoder {
    pub dim: usize,
    pub orders: Vec<usize>,
    pub seed: u64,
}

impl Default for ReferenceEncoder {
    fn default() -> Self {
        ReferenceEncoder { dim: 4096, orders: vec![1, 2, 3], seed: 0 }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Final avalanche so low bits depend on every input byte.
fn mix(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^ (h >> 33)
}

impl ReferenceEncoder {
    fn hash(&self, gram: &[&str]) -> u64 {
        let mut h = fnv(FNV_OFFSET, &self.seed.to_le_bytes());
        h = fnv(h, &[gram.len() as u8]);
        for t in gram {
            h = fnv(h, t.as_bytes());
            h = fnv(h, &[0xff]);
        }
        mix(h)
    }
}

impl Encoder for ReferenceEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        if self.dim == 0 {
            return v;
        }
        let toks = tokens(text);
        for &n in &self.orders {
            if n == 0 {
                continue;
            }
            for gram in toks.windows(n) {
                let h = self.hash(gram);
                let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
                v[(h % self.dim as u64) as usize] += sign;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}
