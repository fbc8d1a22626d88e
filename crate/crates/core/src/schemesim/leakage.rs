//! Exact leakage `I(X^L; O, Z^L) / L` by enumeration of all source blocks.

use crate::error::{Error, Result};
use crate::measures::mutual_info;
use crate::model::{Joint, JointPmf3};

use super::codebook::seq_from_index;

/// Largest `|X|^L · |Y|^L · |Z|^L` the enumerator accepts.
pub const MAX_SOURCE_BLOCKS: u128 = 1 << 22;
/// Largest `|X|^L · |Z|^L · |O|` table the enumerator accepts.
pub const MAX_TABLE_CELLS: u128 = 1 << 25;

/// Exact per-symbol leakage of one fixed codebook, with the joint table of
/// `(X^L, Z^L, O)` it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLeakage {
    pub bits_per_symbol: f64,
    pub chunk_len: usize,
    /// Low bits of the observation that carry a keyed index.
    pub key_bits: u32,
    table: Joint,
}

impl ExactLeakage {
    pub fn table(&self) -> &Joint {
        &self.table
    }

    /// True iff, for every `(x^L, z^L)` and every value of the unkeyed bits,
    /// all keyed values have bit-identical probability, i.e. the keyed index
    /// is exactly uniform and independent of everything else observed.
    pub fn keyed_index_uniform(&self) -> bool {
        let group = 1usize << self.key_bits;
        self.table
            .probs()
            .chunks(group)
            .all(|g| g.iter().all(|&p| p == g[0]))
    }
}

fn checked_pow(a: usize, l: usize) -> u128 {
    (a as u128).checked_pow(l as u32).unwrap_or(u128::MAX)
}

/// Enumerates every block `(x^L, y^L, z^L)` and accumulates
/// `p(x^L, y^L, z^L) · P(O = o | x^L, y^L)` for the observation law written by
/// `law(x^L, y^L, out)` as `(o, probability)` pairs.
pub fn exact_leakage_by_law<F>(
    model: &JointPmf3,
    len: usize,
    o_size: usize,
    key_bits: u32,
    law: F,
) -> Result<ExactLeakage>
where
    F: Fn(&[u8], &[u8], &mut Vec<(usize, f64)>),
{
    let [nx, ny, nz] = model.sizes();
    if len == 0 {
        return Err(Error::InvalidParameter("block length must be >= 1".into()));
    }
    let (bx, by, bz) = (checked_pow(nx, len), checked_pow(ny, len), checked_pow(nz, len));
    let blocks = bx.saturating_mul(by).saturating_mul(bz);
    if blocks > MAX_SOURCE_BLOCKS {
        return Err(Error::StateSpaceTooLarge {
            cells: blocks,
            limit: MAX_SOURCE_BLOCKS,
        });
    }
    let cells = bx.saturating_mul(bz).saturating_mul(o_size as u128);
    if cells > MAX_TABLE_CELLS {
        return Err(Error::StateSpaceTooLarge {
            cells,
            limit: MAX_TABLE_CELLS,
        });
    }
    let (bx, by, bz) = (bx as usize, by as usize, bz as usize);
    let mut table = vec![0.0; bx * bz * o_size];
    let (mut x, mut y, mut z) = (vec![0u8; len], vec![0u8; len], vec![0u8; len]);
    let mut out = Vec::new();
    for xi in 0..bx {
        seq_from_index(xi, nx, &mut x);
        for yi in 0..by {
            seq_from_index(yi, ny, &mut y);
            out.clear();
            law(&x, &y, &mut out);
            for zi in 0..bz {
                seq_from_index(zi, nz, &mut z);
                let p: f64 = (0..len)
                    .map(|i| model.p(x[i] as usize, y[i] as usize, z[i] as usize))
                    .product();
                if p == 0.0 {
                    continue;
                }
                let base = (xi * bz + zi) * o_size;
                for &(o, w) in &out {
                    table[base + o] += p * w;
                }
            }
        }
    }
    let table = Joint::new(vec![bx, bz, o_size], table)?;
    let bits = mutual_info(&table, &[0], &[1, 2])? / len as f64;
    Ok(ExactLeakage {
        bits_per_symbol: bits,
        chunk_len: len,
        key_bits,
        table,
    })
}
