//! Robust joint typicality.

use crate::error::{Error, Result};
use crate::model::Joint;

/// Relative slack `eps` of robust typicality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypicalityParam(f64);

impl TypicalityParam {
    pub const DEFAULT: f64 = 0.1;

    pub fn new(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!("typicality eps {eps} must be > 0")));
        }
        Ok(TypicalityParam(eps))
    }

    pub fn eps(self) -> f64 {
        self.0
    }
}

impl Default for TypicalityParam {
    fn default() -> Self {
        TypicalityParam(Self::DEFAULT)
    }
}

fn within(count: u32, n: usize, p: f64, eps: f64) -> bool {
    (count as f64 / n as f64 - p).abs() <= eps * p
}

/// True iff every joint empirical frequency `π(a)` of the sequence tuple
/// satisfies `|π(a) − p(a)| ≤ eps · p(a)`; symbols of zero probability must
/// therefore not occur at all.
pub fn typicality_test(seqs: &[&[usize]], pmf: &Joint, eps: f64) -> Result<bool> {
    if seqs.len() != pmf.rank() {
        return Err(Error::DimensionMismatch {
            expected: pmf.rank(),
            found: seqs.len(),
        });
    }
    let n = seqs.first().map_or(0, |s| s.len());
    if n == 0 || seqs.iter().any(|s| s.len() != n) {
        return Err(Error::LengthMismatch(
            "sequences must be nonempty and of equal length".into(),
        ));
    }
    let dims = pmf.dims();
    let mut counts = vec![0u32; pmf.probs().len()];
    for i in 0..n {
        let mut idx = 0;
        for (s, &d) in seqs.iter().zip(dims) {
            if s[i] >= d {
                return Err(Error::InvalidParameter(format!(
                    "symbol {} outside alphabet of size {d}",
                    s[i]
                )));
            }
            idx = idx * d + s[i];
        }
        counts[idx] += 1;
    }
    Ok(counts
        .iter()
        .zip(pmf.probs())
        .all(|(&c, &p)| within(c, n, p, eps)))
}

/// Pair typicality against a fixed two-dimensional pmf, without allocation
/// per test.
#[derive(Clone, Debug)]
pub(crate) struct PairTypicality {
    pmf: Vec<f64>,
    nb: usize,
}

impl PairTypicality {
    pub(crate) fn new(pmf: &Joint) -> Self {
        debug_assert_eq!(pmf.rank(), 2);
        PairTypicality {
            pmf: pmf.probs().to_vec(),
            nb: pmf.dims()[1],
        }
    }

    pub(crate) fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub(crate) fn nb(&self) -> usize {
        self.nb
    }

    pub(crate) fn check(&self, a: &[u8], b: &[u8], eps: f64, counts: &mut [u32]) -> bool {
        counts.fill(0);
        for (&x, &y) in a.iter().zip(b) {
            let i = x as usize * self.nb + y as usize;
            if self.pmf[i] <= 0.0 {
                return false;
            }
            counts[i] += 1;
        }
        counts
            .iter()
            .zip(&self.pmf)
            .all(|(&c, &p)| within(c, a.len(), p, eps))
    }
}
