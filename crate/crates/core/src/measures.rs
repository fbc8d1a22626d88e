//! Exact information measures in bits, and logarithmic-loss distortion.
//!
//! All functions take a dense [`Joint`] and groups of axis indices. Logs are
//! base 2 and `0 · log 0 = 0`. Mutual informations and conditional entropies
//! are clamped at zero to absorb rounding.

use crate::error::{Error, Result};
use crate::model::{Joint, NORM_TOL};

/// A quantity in bits.
pub type Bits = f64;

/// `[a]⁺ = max{0, a}`.
pub fn pos(a: f64) -> f64 {
    a.max(0.0)
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a pmf.
pub fn entropy(p: &[f64]) -> Bits {
    -p.iter().map(|&x| plogp(x)).sum::<f64>()
}

/// Binary entropy function.
pub fn h2(p: f64) -> Bits {
    entropy(&[p, 1.0 - p])
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = a.to_vec();
    out.extend(b.iter().filter(|x| !a.contains(x)));
    out
}

/// Joint entropy of the given axes; the empty group has entropy 0.
pub fn joint_entropy(j: &Joint, axes: &[usize]) -> Result<Bits> {
    if axes.is_empty() {
        return Ok(0.0);
    }
    Ok(entropy(j.marginal(axes)?.probs()))
}

/// H(A | B).
pub fn cond_entropy(j: &Joint, a: &[usize], given: &[usize]) -> Result<Bits> {
    Ok(pos(joint_entropy(j, &union(a, given))? - joint_entropy(j, given)?))
}

/// I(A; B).
pub fn mutual_info(j: &Joint, a: &[usize], b: &[usize]) -> Result<Bits> {
    cond_mutual_info(j, a, b, &[])
}

/// I(A; B | C).
pub fn cond_mutual_info(j: &Joint, a: &[usize], b: &[usize], given: &[usize]) -> Result<Bits> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCoords);
    }
    let hac = joint_entropy(j, &union(a, given))?;
    let hbc = joint_entropy(j, &union(b, given))?;
    let habc = joint_entropy(j, &union(&union(a, b), given))?;
    let hc = joint_entropy(j, given)?;
    Ok(pos(hac + hbc - habc - hc))
}

/// Kullback-Leibler divergence D(p‖q); `+∞` when q lacks mass where p has it.
pub fn kl_div(p: &[f64], q: &[f64]) -> Result<Bits> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += a * (a / b).log2();
        }
    }
    Ok(pos(d))
}

/// Soft reconstruction: a pmf over X for every context symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftReconstruction {
    x_size: usize,
    rows: Vec<f64>,
}

impl SoftReconstruction {
    pub fn new(x_size: usize, rows: Vec<f64>) -> Result<Self> {
        if x_size == 0 || !rows.len().is_multiple_of(x_size) {
            return Err(Error::DimensionMismatch {
                expected: x_size,
                found: rows.len(),
            });
        }
        for (r, row) in rows.chunks(x_size).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidParameter(format!("row {r} is not a pmf")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidParameter(format!("row {r} sums to {s}")));
            }
        }
        Ok(SoftReconstruction { x_size, rows })
    }

    /// The posterior p(x | context) read off `j`; contexts of zero
    /// probability get a uniform row.
    pub fn posterior(j: &Joint, x_axis: usize, ctx_axes: &[usize]) -> Result<Self> {
        let x_size = j.dims()[x_axis];
        let mut axes = ctx_axes.to_vec();
        axes.push(x_axis);
        let m = j.marginal(&axes)?;
        let mut rows = m.probs().to_vec();
        for row in rows.chunks_mut(x_size) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|p| *p /= s);
            } else {
                row.fill(1.0 / x_size as f64);
            }
        }
        Ok(SoftReconstruction { x_size, rows })
    }

    /// Mixes every row with the uniform pmf: `(1 − eta)·row + eta/|X|`.
    pub fn smoothed(&self, eta: f64) -> Self {
        let u = eta / self.x_size as f64;
        SoftReconstruction {
            x_size: self.x_size,
            rows: self.rows.iter().map(|&p| (1.0 - eta) * p + u).collect(),
        }
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn contexts(&self) -> usize {
        self.rows.len() / self.x_size
    }

    pub fn row(&self, ctx: usize) -> &[f64] {
        &self.rows[ctx * self.x_size..(ctx + 1) * self.x_size]
    }
}

/// Expected logarithmic loss `Σ p(ctx, x) log₂(1 / x̂(x | ctx))`.
///
/// Returns `+∞` if the reconstruction puts zero mass on a supported symbol.
pub fn logloss_distortion(
    j: &Joint,
    x_axis: usize,
    ctx_axes: &[usize],
    soft: &SoftReconstruction,
) -> Result<Bits> {
    let mut axes = ctx_axes.to_vec();
    axes.push(x_axis);
    let m = j.marginal(&axes)?;
    let x_size = j.dims()[x_axis];
    let n_ctx = m.probs().len() / x_size;
    if soft.x_size != x_size || soft.contexts() != n_ctx {
        return Err(Error::DimensionMismatch {
            expected: n_ctx * x_size,
            found: soft.rows.len(),
        });
    }
    let mut d = 0.0;
    for (ctx, row) in m.probs().chunks(x_size).enumerate() {
        for (x, &p) in row.iter().enumerate() {
            if p > 0.0 {
                let q = soft.row(ctx)[x];
                if q <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                d -= p * q.log2();
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AuxChannel, Coord, JointPmf3, Var};
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.5, 0.5]), 1.0);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert_abs_diff_eq!(entropy(&[0.9, 0.1]), 0.4689955935892812, epsilon = 1e-15);
    }

    #[test]
    fn mutual_info_examples() {
        let ind = Joint::new(vec![2, 3], vec![0.06, 0.12, 0.12, 0.14, 0.28, 0.28]).unwrap();
        assert_abs_diff_eq!(mutual_info(&ind, &[0], &[1]).unwrap(), 0.0, epsilon = 1e-15);

        let same = Joint::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(mutual_info(&same, &[0], &[1]).unwrap(), 1.0);
        assert_eq!(cond_entropy(&same, &[0], &[1]).unwrap(), 0.0);

        let d = JointPmf3::dsbs_z_const(0.1).unwrap().joint();
        let want = 1.0 - h2(0.1);
        assert_abs_diff_eq!(mutual_info(&d, &[0], &[1]).unwrap(), want, epsilon = 1e-15);
        assert_abs_diff_eq!(want, 0.531004406410719, epsilon = 1e-12);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_div(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(kl_div(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            kl_div(&[0.9, 0.1], &[0.5, 0.5]).unwrap(),
            1.0 - h2(0.9),
            epsilon = 1e-15
        );
        assert_eq!(kl_div(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(kl_div(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn logloss_examples() {
        let m = JointPmf3::dsbs_z_const(0.1).unwrap();
        let j = m.joint().attach(&AuxChannel::bsc(Var::Y, 0.25).unwrap(), &[1]).unwrap();
        let post = SoftReconstruction::posterior(&j, 0, &[3]).unwrap();
        let d = logloss_distortion(&j, 0, &[3], &post).unwrap();
        assert_abs_diff_eq!(d, cond_entropy(&j, &[0], &[3]).unwrap(), epsilon = 1e-14);

        let det = JointPmf3::with_sizes(2, 1, 1, vec![1.0, 0.0]).unwrap().joint();
        let soft = SoftReconstruction::new(2, vec![1.0, 0.0]).unwrap();
        assert_eq!(logloss_distortion(&det, 0, &[1], &soft).unwrap(), 0.0);

        let unif = JointPmf3::dsbs_z_const(0.3).unwrap().joint();
        let guess = SoftReconstruction::new(2, vec![0.5; 4]).unwrap();
        assert_eq!(logloss_distortion(&unif, 0, &[1], &guess).unwrap(), 1.0);

        let wrong = SoftReconstruction::new(2, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(
            logloss_distortion(&unif, 0, &[1], &wrong).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn grouped_axes() {
        let m = JointPmf3::dsbs_z_eq_y(0.1).unwrap();
        let j = m.joint();
        // Z = Y, so I(X; Y, Z) = I(X; Y) and H(Y | Z) = 0.
        let a = mutual_info(&j, &[Coord::X.axis()], &[1, 2]).unwrap();
        let b = mutual_info(&j, &[0], &[1]).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        assert_abs_diff_eq!(cond_entropy(&j, &[1], &[2]).unwrap(), 0.0, epsilon = 1e-15);
        assert!(mutual_info(&j, &[], &[1]).is_err());
    }
}
