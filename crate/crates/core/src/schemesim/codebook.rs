//! Random codebooks with balanced random binning.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest alphabet a simulated sequence may use (symbols are stored as `u8`).
pub const MAX_SIM_ALPHABET: usize = 256;

/// `2^bits` sequences of length `len`, drawn i.i.d. per letter, each assigned
/// to one of `2^bin_bits` bins.
///
/// Bins come from a uniformly random permutation of the codewords dealt
/// round-robin into the bins, so every bin holds the same number of codewords
/// (or at most one, when there are more bins than codewords).
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    len: usize,
    bits: u32,
    bin_bits: u32,
    words: Vec<u8>,
    bin_of: Vec<u64>,
    members: Vec<Vec<u32>>,
}

impl Codebook {
    pub fn random<R: Rng>(
        len: usize,
        pmf: &[f64],
        bits: u32,
        bin_bits: u32,
        rng: &mut R,
    ) -> Result<Self> {
        if pmf.len() > MAX_SIM_ALPHABET {
            return Err(Error::Unsupported(format!(
                "alphabet of size {} exceeds {MAX_SIM_ALPHABET}",
                pmf.len()
            )));
        }
        if bits >= 32 || bin_bits >= 64 {
            return Err(Error::CodebookTooLarge { bits, limit: 31 });
        }
        let size = 1usize << bits;
        let dist = WeightedIndex::new(pmf)
            .map_err(|e| Error::InvalidParameter(format!("codeword pmf: {e}")))?;
        let words: Vec<u8> = (0..size * len).map(|_| dist.sample(rng) as u8).collect();
        let mut perm: Vec<u32> = (0..size as u32).collect();
        perm.shuffle(rng);
        let n_bins = 1u64 << bin_bits;
        let mut bin_of = vec![0u64; size];
        let mut members = vec![Vec::new(); (n_bins as usize).min(size)];
        for (j, &w) in perm.iter().enumerate() {
            let b = j as u64 % n_bins;
            bin_of[w as usize] = b;
            members[b as usize].push(w);
        }
        members.iter_mut().for_each(|m| m.sort_unstable());
        Ok(Codebook {
            len,
            bits,
            bin_bits,
            words,
            bin_of,
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn bin_bits(&self) -> u32 {
        self.bin_bits
    }

    /// Number of codewords.
    pub fn size(&self) -> usize {
        self.bin_of.len()
    }

    pub fn word(&self, i: usize) -> &[u8] {
        &self.words[i * self.len..(i + 1) * self.len]
    }

    pub fn bin_of(&self, i: usize) -> u64 {
        self.bin_of[i]
    }

    /// Codewords in bin `b`, in increasing index order.
    pub fn bin(&self, b: u64) -> &[u32] {
        self.members.get(b as usize).map_or(&[], Vec::as_slice)
    }
}

/// Index of a sequence over an alphabet of size `a`; the first symbol is the
/// most significant digit.
pub fn seq_index(seq: &[u8], a: usize) -> usize {
    seq.iter().fold(0, |acc, &s| acc * a + s as usize)
}

/// Inverse of [`seq_index`].
pub fn seq_from_index(mut idx: usize, a: usize, out: &mut [u8]) {
    for s in out.iter_mut().rev() {
        *s = (idx % a) as u8;
        idx /= a;
    }
}
