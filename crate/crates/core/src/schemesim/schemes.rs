//! One-sided helper, forwarding, and keyed-forwarding scheme runners.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::measures::{cond_mutual_info, entropy, mutual_info, pos};
use crate::model::{AuxChannel, Coord, Joint, JointPmf3, Var};
use crate::regions_discrete::{expected_distortion, Decoder, DistortionMatrix, SettingId};

use super::codebook::{seq_index, Codebook};
use super::leakage::{exact_leakage_by_law, ExactLeakage};
use super::typical::{PairTypicality, TypicalityParam};

/// Default cap on `⌈L·R⌉` for any codebook.
pub const DEFAULT_MAX_CODEBOOK_BITS: u32 = 14;
/// Largest `|Y|^L` for which a key partition is tabulated.
pub const MAX_KEY_TABLE: u128 = 1 << 22;

const STREAM_HELPER: u64 = 1;
const STREAM_MAIN: u64 = 2;
const STREAM_KEY: u64 = 4;
const STREAM_TRIAL: u64 = 1000;
const FLOOR_TOL: f64 = 1e-12;

/// Blocklength, trial count, and seeding of a simulation.
///
/// A block of length `n` is coded as `n / L` independent sub-blocks of length
/// `L` that share one codebook; `L` is the largest divisor of `n` whose
/// codebooks fit in `max_codebook_bits`, unless `chunk` fixes it.
#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    pub n: usize,
    pub trials: usize,
    pub eps: TypicalityParam,
    pub seed: u64,
    pub chunk: Option<usize>,
    pub max_codebook_bits: u32,
    /// Also compute the exact per-codebook leakage.
    pub exact_leakage: bool,
}

impl SimParams {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        SimParams {
            n,
            trials,
            eps: TypicalityParam::default(),
            seed,
            chunk: None,
            max_codebook_bits: DEFAULT_MAX_CODEBOOK_BITS,
            exact_leakage: false,
        }
    }
}

/// How the one-time-pad key is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyMode {
    /// Bin index of `y^L` under a seeded, balanced random partition of `Y^L`.
    Binned,
    /// Independent uniform key shared by encoder and decoder (diagnostic).
    ExternalUniform,
}

/// Secret-key rate and key-partition seed.
///
/// The keyed index is sent as `(w + k) mod 2^b` with indices starting at 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyConfig {
    pub rate: f64,
    pub seed: u64,
    pub mode: KeyMode,
}

/// Source, auxiliaries, and rates of the one-sided helper scheme.
///
/// The helper quantizes `y^n` to a `U` codeword and sends its index (rate
/// R2); the encoder quantizes `x^n` to a `V` codeword and sends its bin index
/// (rate R1); the decoder finds `V` in the bin using the `U` codeword.
#[derive(Clone, Debug, PartialEq)]
pub struct OneSidedScheme {
    pub model: JointPmf3,
    pub u: AuxChannel,
    pub v: AuxChannel,
    pub distortion: DistortionMatrix,
    /// Reconstruction over `(u, v)` row-major; `None` takes the per-cell argmin.
    pub g: Option<Vec<usize>>,
    pub r1: f64,
    pub r2: f64,
}

/// Wyner-Ziv coding of `X` with decoder side information `Y`, with the bin
/// index split into a private part (rate R3) and a part forwarded by the
/// helper (rate R1).
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardingScheme {
    pub setting: SettingId,
    pub model: JointPmf3,
    pub v: AuxChannel,
    pub distortion: DistortionMatrix,
    /// Reconstruction over `(v, y)` row-major; `None` takes the per-cell argmin.
    pub g: Option<Vec<usize>>,
    pub r1: f64,
    pub r3: f64,
}

/// Simulation statistics. Leakage is conditioned on the drawn codebook.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub scheme: String,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub eps: f64,
    pub chunk_len: usize,
    pub helper_bits: Option<u32>,
    pub codeword_bits: u32,
    pub bin_bits: u32,
    pub key_bits: Option<u32>,
    /// Expected distortion of the single-letter design.
    pub design_distortion: f64,
    pub below_floor: bool,
    pub distortion_mean: Option<f64>,
    pub distortion_std: Option<f64>,
    pub error_rate: Option<f64>,
    /// Plug-in entropy of the public index, in bits per symbol.
    pub index_entropy: Option<f64>,
    pub exact_leakage: Option<f64>,
}

fn index_bits(len: usize, rate: f64) -> u32 {
    (len as f64 * rate - 1e-9).ceil().max(0.0) as u32
}

/// Codebook on one side: codewords plus the pmf of (observed, codeword).
#[derive(Clone, Debug)]
struct Quantizer {
    book: Codebook,
    typ: PairTypicality,
}

impl Quantizer {
    fn typical(&self, other: &[u8], eps: f64, scratch: &mut [u32]) -> Vec<u32> {
        (0..self.book.size() as u32)
            .filter(|&w| self.typ.check(other, self.book.word(w as usize), eps, scratch))
            .collect()
    }

    /// A uniformly random typical codeword, or a uniformly random codeword
    /// when none is typical.
    fn choose<R: Rng>(&self, other: &[u8], eps: f64, scratch: &mut [u32], rng: &mut R) -> usize {
        let t = self.typical(other, eps, scratch);
        if t.is_empty() {
            rng.gen_range(0..self.book.size())
        } else {
            t[rng.gen_range(0..t.len())] as usize
        }
    }

    /// Exact law of [`Quantizer::choose`].
    fn law(&self, other: &[u8], eps: f64, scratch: &mut [u32]) -> Vec<(usize, f64)> {
        let t = self.typical(other, eps, scratch);
        if t.is_empty() {
            let w = 1.0 / self.book.size() as f64;
            (0..self.book.size()).map(|i| (i, w)).collect()
        } else {
            let w = 1.0 / t.len() as f64;
            t.into_iter().map(|i| (i as usize, w)).collect()
        }
    }
}

/// Bin decoder: the unique codeword in the bin typical with the side
/// sequence, otherwise the most likely one (lowest index on ties).
#[derive(Clone, Debug)]
struct BinDecoder {
    typ: PairTypicality,
    /// `log₂ p(side | v)` at `[side * |V| + v]`.
    loglik: Vec<f64>,
}

impl BinDecoder {
    fn new(pair: &Joint) -> Self {
        let typ = PairTypicality::new(pair);
        let nv = typ.nb();
        let pv: Vec<f64> = (0..nv)
            .map(|v| typ.pmf().iter().skip(v).step_by(nv).sum())
            .collect();
        let loglik = typ
            .pmf()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if p > 0.0 {
                    (p / pv[i % nv]).log2()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        BinDecoder { typ, loglik }
    }

    fn decode(&self, book: &Codebook, bin: u64, side: &[u8], eps: f64, scratch: &mut [u32]) -> usize {
        let cands = book.bin(bin);
        let typical: Vec<u32> = cands
            .iter()
            .copied()
            .filter(|&w| self.typ.check(side, book.word(w as usize), eps, scratch))
            .collect();
        if typical.len() == 1 {
            return typical[0] as usize;
        }
        let pool = if typical.is_empty() { cands } else { &typical[..] };
        let nv = self.typ.nb();
        let mut best = (f64::NEG_INFINITY, pool.first().copied().unwrap_or(0));
        for &w in pool {
            let ll: f64 = side
                .iter()
                .zip(book.word(w as usize))
                .map(|(&s, &v)| self.loglik[s as usize * nv + v as usize])
                .sum();
            if ll > best.0 {
                best = (ll, w);
            }
        }
        best.1 as usize
    }
}

#[derive(Clone, Debug)]
struct KeyPart {
    bits: u32,
    mode: KeyMode,
    seed: u64,
    /// Key of every `y^L` (binned mode).
    table: Vec<u64>,
}

#[derive(Clone, Debug)]
enum Public {
    Helper(Quantizer),
    Forward {
        bits3: u32,
        bits1: u32,
        key: Option<KeyPart>,
    },
}

/// A scheme with its codebooks drawn.
#[derive(Clone, Debug)]
struct Engine {
    name: &'static str,
    model: JointPmf3,
    len: usize,
    eps: f64,
    seed: u64,
    main: Quantizer,
    decoder: BinDecoder,
    /// Reconstruction table and its second-argument alphabet size.
    g: Vec<usize>,
    g_inner: usize,
    distortion: DistortionMatrix,
    public: Public,
    design_distortion: f64,
    below_floor: bool,
}

struct ChunkOutcome {
    distortion: f64,
    error: bool,
    public: u64,
}

impl Engine {
    fn key_bits(&self) -> Option<u32> {
        match &self.public {
            Public::Forward { key: Some(k), .. } => Some(k.bits),
            Public::Forward { .. } => Some(0),
            Public::Helper(_) => None,
        }
    }

    fn public_size(&self) -> usize {
        match &self.public {
            Public::Helper(q) => q.book.size(),
            Public::Forward { bits1, .. } => 1usize << bits1,
        }
    }

    fn chunk<R: Rng>(
        &self,
        x: &[u8],
        y: &[u8],
        rng: &mut R,
        key_rng: &mut R,
        scratch: &mut [u32],
    ) -> ChunkOutcome {
        let book = &self.main.book;
        match &self.public {
            Public::Helper(helper) => {
                let w2 = helper.choose(y, self.eps, scratch, rng);
                let u = helper.book.word(w2);
                let wv = self.main.choose(x, self.eps, scratch, rng);
                let vhat = self.decoder.decode(book, book.bin_of(wv), u, self.eps, scratch);
                let xhat = u
                    .iter()
                    .zip(book.word(vhat))
                    .map(|(&a, &b)| self.g[a as usize * self.g_inner + b as usize]);
                ChunkOutcome {
                    distortion: self.chunk_distortion(x, xhat),
                    error: book.word(vhat) != book.word(wv),
                    public: w2 as u64,
                }
            }
            Public::Forward { bits3, key, .. } => {
                let wv = self.main.choose(x, self.eps, scratch, rng);
                let b = book.bin_of(wv);
                let w3 = b & ((1u64 << bits3) - 1);
                let w1 = b >> bits3;
                let (sent, k) = match key {
                    Some(kp) if kp.bits > 0 => {
                        let k = match kp.mode {
                            KeyMode::Binned => kp.table[seq_index(y, self.model.size(Coord::Y))],
                            KeyMode::ExternalUniform => key_rng.gen_range(0..1u64 << kp.bits),
                        };
                        (pad(w1, k, kp.bits), k)
                    }
                    _ => (w1, 0),
                };
                let kb = key.as_ref().map_or(0, |k| k.bits);
                let w1_dec = unpad(sent, k, kb);
                let vhat = self
                    .decoder
                    .decode(book, (w1_dec << bits3) | w3, y, self.eps, scratch);
                let xhat = book
                    .word(vhat)
                    .iter()
                    .zip(y)
                    .map(|(&a, &b)| self.g[a as usize * self.g_inner + b as usize]);
                ChunkOutcome {
                    distortion: self.chunk_distortion(x, xhat),
                    error: book.word(vhat) != book.word(wv),
                    public: sent,
                }
            }
        }
    }

    fn chunk_distortion(&self, x: &[u8], xhat: impl Iterator<Item = usize>) -> f64 {
        x.iter()
            .zip(xhat)
            .map(|(&a, b)| self.distortion.get(a as usize, b))
            .sum()
    }

    fn trial(&self, n: usize, t: usize) -> (f64, bool, Vec<u64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(STREAM_TRIAL + t as u64);
        let mut key_rng = match &self.public {
            Public::Forward { key: Some(k), .. } => {
                let mut r = ChaCha8Rng::seed_from_u64(k.seed);
                r.set_stream(STREAM_TRIAL + t as u64);
                r
            }
            _ => ChaCha8Rng::seed_from_u64(0),
        };
        let [_, ny, nz] = self.model.sizes();
        let sampler = WeightedIndex::new(self.model.probs()).expect("model is a pmf");
        let mut scratch = vec![0u32; self.scratch_len()];
        let (mut x, mut y) = (vec![0u8; self.len], vec![0u8; self.len]);
        let mut total = 0.0;
        let mut error = false;
        let mut public = Vec::with_capacity(n / self.len);
        for _ in 0..n / self.len {
            for i in 0..self.len {
                let c = sampler.sample(&mut rng);
                x[i] = (c / (ny * nz)) as u8;
                y[i] = ((c / nz) % ny) as u8;
            }
            let o = self.chunk(&x, &y, &mut rng, &mut key_rng, &mut scratch);
            total += o.distortion;
            error |= o.error;
            public.push(o.public);
        }
        (total / n as f64, error, public)
    }

    fn scratch_len(&self) -> usize {
        let helper = match &self.public {
            Public::Helper(h) => h.typ.pmf().len(),
            Public::Forward { .. } => 0,
        };
        self.main
            .typ
            .pmf()
            .len()
            .max(self.decoder.typ.pmf().len())
            .max(helper)
    }

    fn exact_leakage(&self) -> Result<ExactLeakage> {
        let [nx, ny, _] = self.model.sizes();
        let mut scratch = vec![0u32; self.scratch_len()];
        let eps = self.eps;
        let len = self.len;
        let blocks = |a: usize| (a as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
        if blocks(nx).max(blocks(ny)) > super::leakage::MAX_SOURCE_BLOCKS {
            return Err(Error::StateSpaceTooLarge {
                cells: blocks(nx).max(blocks(ny)),
                limit: super::leakage::MAX_SOURCE_BLOCKS,
            });
        }
        let mut seq = vec![0u8; len];
        match &self.public {
            Public::Helper(helper) => {
                let laws: Vec<Vec<(usize, f64)>> = (0..blocks(ny) as usize)
                    .map(|yi| {
                        super::codebook::seq_from_index(yi, ny, &mut seq);
                        helper.law(&seq, eps, &mut scratch)
                    })
                    .collect();
                exact_leakage_by_law(&self.model, len, self.public_size(), 0, |_, y, out| {
                    out.extend_from_slice(&laws[seq_index(y, ny)])
                })
            }
            Public::Forward { bits3, key, .. } => {
                let book = &self.main.book;
                let laws: Vec<Vec<(u64, f64)>> = (0..blocks(nx) as usize)
                    .map(|xi| {
                        super::codebook::seq_from_index(xi, nx, &mut seq);
                        self.main
                            .law(&seq, eps, &mut scratch)
                            .into_iter()
                            .map(|(w, p)| (book.bin_of(w) >> bits3, p))
                            .collect()
                    })
                    .collect();
                let kb = key.as_ref().map_or(0, |k| k.bits);
                exact_leakage_by_law(&self.model, len, self.public_size(), kb, |x, y, out| {
                    let law = &laws[seq_index(x, nx)];
                    match key {
                        Some(kp) if kp.bits > 0 => match kp.mode {
                            KeyMode::Binned => {
                                let k = kp.table[seq_index(y, ny)];
                                out.extend(law.iter().map(|&(w1, p)| (pad(w1, k, kb) as usize, p)));
                            }
                            KeyMode::ExternalUniform => {
                                let share = 1.0 / (1u64 << kb) as f64;
                                for &(w1, p) in law {
                                    for k in 0..1u64 << kb {
                                        out.push((pad(w1, k, kb) as usize, p * share));
                                    }
                                }
                            }
                        },
                        _ => out.extend(law.iter().map(|&(w1, p)| (w1 as usize, p))),
                    }
                })
            }
        }
    }
}

/// Replaces the low `bits` of `w` by `(w + k) mod 2^bits`.
fn pad(w: u64, k: u64, bits: u32) -> u64 {
    let mask = (1u64 << bits) - 1;
    (w & !mask) | (((w & mask) + k) & mask)
}

fn unpad(w: u64, k: u64, bits: u32) -> u64 {
    let mask = (1u64 << bits) - 1;
    (w & !mask) | ((w & mask).wrapping_sub(k) & mask)
}

fn divisors_desc(n: usize) -> Vec<usize> {
    (1..=n).rev().filter(|&l| n.is_multiple_of(l)).collect()
}

/// Picks the sub-block length from the per-length codebook sizes.
fn choose_len(p: &SimParams, bits_at: impl Fn(usize) -> u32) -> Result<usize> {
    if p.n == 0 {
        return Err(Error::InvalidParameter("blocklength must be >= 1".into()));
    }
    let limit = p.max_codebook_bits.min(31);
    if let Some(l) = p.chunk {
        if l == 0 || !p.n.is_multiple_of(l) {
            return Err(Error::InvalidParameter(format!(
                "sub-block length {l} must divide n = {}",
                p.n
            )));
        }
        let bits = bits_at(l);
        if bits > limit {
            return Err(Error::CodebookTooLarge { bits, limit });
        }
        return Ok(l);
    }
    divisors_desc(p.n)
        .into_iter()
        .find(|&l| bits_at(l) <= limit)
        .ok_or(Error::CodebookTooLarge {
            bits: bits_at(1),
            limit,
        })
}

fn sim_alphabets(model: &JointPmf3, aux: &[&AuxChannel]) -> Result<()> {
    let sizes = model.sizes();
    let too_big = sizes.iter().copied().chain(aux.iter().map(|a| a.aux_size()));
    for s in too_big {
        if s > super::codebook::MAX_SIM_ALPHABET {
            return Err(Error::Unsupported(format!("alphabet of size {s} is too large to simulate")));
        }
    }
    Ok(())
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn reconstruction(
    j: &Joint,
    args: &[usize],
    distortion: &DistortionMatrix,
    g: &Option<Vec<usize>>,
) -> Result<(f64, Vec<usize>)> {
    if distortion.x_size() != j.dims()[0] {
        return Err(Error::DimensionMismatch {
            expected: j.dims()[0],
            found: distortion.x_size(),
        });
    }
    let decoder = match g {
        Some(g) => Decoder::Table {
            g: g.clone(),
            distortion: distortion.clone(),
        },
        None => Decoder::Argmin(distortion.clone()),
    };
    let (d, table) = expected_distortion(j, 0, args, &decoder)?;
    Ok((d, table.expect("matrix decoders report their table")))
}

fn one_sided_engine(s: &OneSidedScheme, p: &SimParams) -> Result<Engine> {
    let [nx, ny, _] = s.model.sizes();
    s.u.require_inputs(&[Var::Y], &[ny])?;
    s.v.require_inputs(&[Var::X], &[nx])?;
    sim_alphabets(&s.model, &[&s.u, &s.v])?;
    let j = s.model.joint().attach(&s.u, &[1])?.attach(&s.v, &[0])?;
    let (design, g) = reconstruction(&j, &[3, 4], &s.distortion, &s.g)?;
    let f2 = mutual_info(&j, &[1], &[3])?;
    let f1 = cond_mutual_info(&j, &[0], &[4], &[3])?;
    let below = s.r2 < f2 - FLOOR_TOL || s.r1 < f1 - FLOOR_TOL;
    if below {
        log::warn!("rates below the inner-bound floors (R1 >= {f1}, R2 >= {f2}); decoding may fail");
    }
    let cw_rate = mutual_info(&j, &[0], &[4])? + pos(s.r1 - f1) / 2.0;
    let len = choose_len(p, |l| index_bits(l, s.r2).max(index_bits(l, cw_rate)))?;
    let pu = j.marginal(&[3])?;
    let pv = j.marginal(&[4])?;
    let helper = Quantizer {
        book: Codebook::random(len, pu.probs(), index_bits(len, s.r2), 0, &mut rng(p.seed, STREAM_HELPER))?,
        typ: PairTypicality::new(&j.marginal(&[1, 3])?),
    };
    let main = Quantizer {
        book: Codebook::random(
            len,
            pv.probs(),
            index_bits(len, cw_rate),
            index_bits(len, s.r1),
            &mut rng(p.seed, STREAM_MAIN),
        )?,
        typ: PairTypicality::new(&j.marginal(&[0, 4])?),
    };
    Ok(Engine {
        name: "one-sided",
        model: s.model.clone(),
        len,
        eps: p.eps.eps(),
        seed: p.seed,
        main,
        decoder: BinDecoder::new(&j.marginal(&[3, 4])?),
        g,
        g_inner: s.v.aux_size(),
        distortion: s.distortion.clone(),
        public: Public::Helper(helper),
        design_distortion: design,
        below_floor: below,
    })
}

fn forwarding_engine(
    s: &ForwardingScheme,
    key: Option<&KeyConfig>,
    p: &SimParams,
) -> Result<Engine> {
    use SettingId::*;
    match (key.is_some(), s.setting) {
        (false, TriA | CasA | TriABc | TriC | CasC | TriCBc) => {}
        (true, TriB | CasB | TriBBc) => {}
        (keyed, other) => {
            return Err(Error::InvalidParameter(format!(
                "{} scheme does not apply to {other}",
                if keyed { "keyed" } else { "forwarding" }
            )))
        }
    }
    if !s.setting.has_private_link() && s.r3 != 0.0 {
        return Err(Error::InvalidParameter(format!("{} has no private link", s.setting)));
    }
    if !(s.r1 >= 0.0 && s.r3 >= 0.0 && s.r1.is_finite() && s.r3.is_finite()) {
        return Err(Error::InvalidParameter("rates must be finite and >= 0".into()));
    }
    s.setting.require_markov(&s.model)?;
    let [nx, ny, nz] = s.model.sizes();
    let model = if matches!(s.setting, TriC | CasC | TriCBc) && nz > 1 {
        log::warn!("setting C has no helper side information; ignoring Z");
        let xy = s.model.marginal(&[Coord::X, Coord::Y])?;
        JointPmf3::with_sizes(nx, ny, 1, xy.probs().to_vec())?
    } else {
        s.model.clone()
    };
    s.v.require_inputs(&[Var::X], &[nx])?;
    sim_alphabets(&model, &[&s.v])?;
    let j = model.joint().attach(&s.v, &[0])?;
    let (design, g) = reconstruction(&j, &[3, 1], &s.distortion, &s.g)?;
    let floor = cond_mutual_info(&j, &[0], &[3], &[1])?;
    let total = s.r1 + s.r3;
    let below = total < floor - FLOOR_TOL;
    if below {
        log::warn!("R1 + R3 = {total} below the binning floor {floor}; decoding may fail");
    }
    let cw_rate = mutual_info(&j, &[0], &[3])? + pos(total - floor) / 2.0;
    if let Some(k) = key {
        let cap = (ny as f64).log2();
        if !(k.rate >= 0.0 && k.rate <= cap + FLOOR_TOL) {
            return Err(Error::InvalidParameter(format!(
                "key rate {} outside [0, log2|Y| = {cap}]",
                k.rate
            )));
        }
    }
    let key_table_ok = |l: usize| {
        key.is_none_or(|k| {
            k.mode != KeyMode::Binned
                || index_bits(l, k.rate) == 0
                || (ny as u128).checked_pow(l as u32).is_some_and(|c| c <= MAX_KEY_TABLE)
        })
    };
    let len = choose_len(p, |l| {
        if key_table_ok(l) {
            index_bits(l, cw_rate)
        } else {
            u32::MAX
        }
    })?;
    let bin_bits = index_bits(len, total);
    let bits3 = index_bits(len, s.r3).min(bin_bits);
    let bits1 = bin_bits - bits3;
    let key = match key {
        None => None,
        Some(k) => {
            let want = index_bits(len, k.rate);
            let bits = want.min(bits1);
            if bits < want {
                log::info!("key of {want} bits truncated to the {bits}-bit forwarded index");
            }
            let table = if k.mode == KeyMode::Binned && bits > 0 {
                let count = ny.pow(len as u32);
                let mut perm: Vec<usize> = (0..count).collect();
                perm.shuffle(&mut rng(k.seed, STREAM_KEY));
                let mut table = vec![0u64; count];
                for (j, &seq) in perm.iter().enumerate() {
                    table[seq] = j as u64 % (1u64 << bits);
                }
                table
            } else {
                Vec::new()
            };
            Some(KeyPart {
                bits,
                mode: k.mode,
                seed: k.seed,
                table,
            })
        }
    };
    let pv = j.marginal(&[3])?;
    let main = Quantizer {
        book: Codebook::random(
            len,
            pv.probs(),
            index_bits(len, cw_rate),
            bin_bits,
            &mut rng(p.seed, STREAM_MAIN),
        )?,
        typ: PairTypicality::new(&j.marginal(&[0, 3])?),
    };
    Ok(Engine {
        name: if key.is_some() { "keyed" } else { "forwarding" },
        model,
        len,
        eps: p.eps.eps(),
        seed: p.seed,
        main,
        decoder: BinDecoder::new(&j.marginal(&[1, 3])?),
        g,
        g_inner: ny,
        distortion: s.distortion.clone(),
        public: Public::Forward { bits3, bits1, key },
        design_distortion: design,
        below_floor: below,
    })
}

fn run(engine: &Engine, p: &SimParams, exec: Execution) -> Result<TrialReport> {
    let exact = if p.exact_leakage {
        Some(engine.exact_leakage()?.bits_per_symbol)
    } else {
        None
    };
    let outcomes = exec::map_indexed(exec, p.trials, |t| engine.trial(p.n, t));
    let (mean, std, err, h) = if outcomes.is_empty() {
        (None, None, None, None)
    } else {
        let t = outcomes.len() as f64;
        let mean = outcomes.iter().map(|o| o.0).sum::<f64>() / t;
        let var = if outcomes.len() > 1 {
            outcomes.iter().map(|o| (o.0 - mean).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        let errors = outcomes.iter().filter(|o| o.1).count() as f64;
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for o in &outcomes {
            for &w in &o.2 {
                *counts.entry(w).or_default() += 1;
            }
        }
        let total: u64 = counts.values().sum();
        let freqs: Vec<f64> = counts.values().map(|&c| c as f64 / total as f64).collect();
        (
            Some(mean),
            Some(var.sqrt()),
            Some(errors / t),
            Some(entropy(&freqs) / engine.len as f64),
        )
    };
    let (helper_bits, bin_bits) = match &engine.public {
        Public::Helper(h) => (Some(h.book.bits()), engine.main.book.bin_bits()),
        Public::Forward { .. } => (None, engine.main.book.bin_bits()),
    };
    Ok(TrialReport {
        scheme: engine.name.to_string(),
        n: p.n,
        trials: p.trials,
        seed: p.seed,
        eps: p.eps.eps(),
        chunk_len: engine.len,
        helper_bits,
        codeword_bits: engine.main.book.bits(),
        bin_bits,
        key_bits: engine.key_bits(),
        design_distortion: engine.design_distortion,
        below_floor: engine.below_floor,
        distortion_mean: mean,
        distortion_std: std,
        error_rate: err,
        index_entropy: h,
        exact_leakage: exact,
    })
}

/// Simulates the one-sided helper scheme.
pub fn run_one_sided(s: &OneSidedScheme, p: &SimParams, exec: Execution) -> Result<TrialReport> {
    run(&one_sided_engine(s, p)?, p, exec)
}

/// Simulates Wyner-Ziv coding with the bin index split between the forwarded
/// and private links (settings A and C).
pub fn run_triangular_forwarding(
    s: &ForwardingScheme,
    p: &SimParams,
    exec: Execution,
) -> Result<TrialReport> {
    run(&forwarding_engine(s, None, p)?, p, exec)
}

/// Simulates forwarding with the low bits of the forwarded index padded by a
/// secret key (setting B).
pub fn run_triangular_keyed(
    s: &ForwardingScheme,
    key: &KeyConfig,
    p: &SimParams,
    exec: Execution,
) -> Result<TrialReport> {
    run(&forwarding_engine(s, Some(key), p)?, p, exec)
}

/// A scheme whose exact leakage can be enumerated.
#[derive(Clone, Debug, PartialEq)]
pub enum Scheme {
    OneSided(OneSidedScheme),
    Forwarding(ForwardingScheme),
    Keyed(ForwardingScheme, KeyConfig),
}

/// Exact `I(X^n; public index, Z^n) / n` for the codebook drawn from
/// `p.seed`. Sub-blocks are i.i.d. and share the codebook, so this equals
/// the value for a single sub-block of length `L`.
pub fn run_exact_leakage(scheme: &Scheme, p: &SimParams) -> Result<ExactLeakage> {
    let engine = match scheme {
        Scheme::OneSided(s) => one_sided_engine(s, p)?,
        Scheme::Forwarding(s) => forwarding_engine(s, None, p)?,
        Scheme::Keyed(s, k) => forwarding_engine(s, Some(k), p)?,
    };
    engine.exact_leakage()
}

/// Mean exact leakage over several codebook seeds, approximating the average
/// over random codebooks.
pub fn mean_exact_leakage(scheme: &Scheme, p: &SimParams, seeds: &[u64]) -> Result<f64> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no seeds given".into()));
    }
    let mut sum = 0.0;
    for &seed in seeds {
        let q = SimParams { seed, ..p.clone() };
        sum += run_exact_leakage(scheme, &q)?.bits_per_symbol;
    }
    Ok(sum / seeds.len() as f64)
}
