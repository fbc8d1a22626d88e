//! Closed-form Gaussian regions.
//!
//! One-sided helper on a `Y − X − Z` chain (`X = Y + N1`, `Z = X + N2`): the
//! helper describes `Y` through a test channel of quality `α ∈ (0,1)`, the
//! fraction of `Var(Y)` left unexplained at the decoder. The minimum
//! quadratic distortion under rate and leakage constraints is
//!
//! ```text
//! D_min = 2^{-2 R1} · max{ 2^{-2 R2} σ_Y² + σ_N1²,  α*(Δ) σ_Y² + σ_N1² }
//! ```
//!
//! where `α*(Δ)` inverts the leakage expression of the corner. The first
//! branch is the rate-limited (saturated) regime, the second the
//! leakage-limited one. Triangular settings A and B use an `X − Y − Z` chain.

use std::io::Write;

use crate::error::{Error, Result};
use crate::measures::pos;
use crate::model::{ChainOrder, GaussianChain, RdlPoint};
use crate::numfmt::fmt_sig;
use crate::regions_discrete::{Achieving, CornerPoint, Verdict};

/// Slack allowed when a leakage value sits on an endpoint of its valid range.
const RANGE_TOL: f64 = 1e-12;
/// Agreement required between the closed-form and bisection crossing points.
const BISECTION_TOL: f64 = 1e-10;

/// Helper-quality parameter, strictly between 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct AlphaParam(f64);

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(AlphaParam(alpha))
        } else {
            Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

fn half_log2(x: f64) -> f64 {
    0.5 * x.log2()
}

/// Leakage of the one-sided Gaussian corner at quality `alpha`.
fn one_sided_leakage(c: &GaussianChain, alpha: f64) -> f64 {
    let (vy, v1, v2) = (c.var_root(), c.var_n1(), c.var_n2());
    let a = alpha * vy + v1;
    half_log2((vy + v1) * (a + v2) / (v2 * a))
}

/// One-sided Gaussian corner at quality `alpha` and distortion `d`:
/// `R2 = ½log(1/α)`, `R1 = [½log((α σ_Y² + σ_N1²)/D)]⁺`, and the leakage
/// `½log((σ_Y²+σ_N1²)(α σ_Y²+σ_N1²+σ_N2²) / (σ_N2² (α σ_Y²+σ_N1²)))`.
pub fn one_sided_gaussian_corner(
    chain: &GaussianChain,
    alpha: AlphaParam,
    d: f64,
) -> Result<CornerPoint> {
    chain.require_order(ChainOrder::YXZ)?;
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidParameter(format!("distortion {d} must be > 0")));
    }
    let a = alpha.get();
    let r2 = half_log2(1.0 / a);
    let r1 = pos(half_log2((a * chain.var_root() + chain.var_n1()) / d));
    let delta = one_sided_leakage(chain, a);
    Ok(CornerPoint {
        point: RdlPoint::new(r1, r2, None, d, delta)?,
        sum_rate: None,
        achieving: Achieving {
            channels: vec![],
            g: None,
            params: vec![("alpha", a)],
        },
    })
}

/// Valid leakage range `[I(X;Z), I(X;Y,Z)]` of the one-sided Gaussian chain.
pub fn leakage_range(chain: &GaussianChain) -> Result<(f64, f64)> {
    chain.require_order(ChainOrder::YXZ)?;
    let (vy, v1, v2) = (chain.var_root(), chain.var_n1(), chain.var_n2());
    let s = vy + v1;
    Ok((half_log2(1.0 + s / v2), half_log2(s * (v1 + v2) / (v1 * v2))))
}

/// The helper quality `α*` whose corner leaks exactly `delta`.
///
/// Solves `2^{2Δ} σ_N2² / (σ_Y² + σ_N1²) − 1 = σ_N2² / (α σ_Y² + σ_N1²)` for α.
/// No range check; see [`dmin_one_sided`].
pub fn alpha_star(chain: &GaussianChain, delta: f64) -> f64 {
    let (vy, v1, v2) = (chain.var_root(), chain.var_n1(), chain.var_n2());
    let a = v2 / ((2f64.powf(2.0 * delta) * v2 / (vy + v1)) - 1.0);
    (a - v1) / vy
}

/// Which branch of the D_min maximum is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `2^{-2R1}(2^{-2R2} σ_Y² + σ_N1²)`: limited by the helper rate.
    Rate,
    /// `2^{-2R1}(α* σ_Y² + σ_N1²)`: limited by the leakage constraint.
    Leakage,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Rate => "rate",
            Branch::Leakage => "leakage",
        }
    }
}

/// Minimum distortion at `(R1, R2, Δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dmin {
    pub dmin: f64,
    pub branch: Branch,
    pub alpha_star: f64,
    /// The leakage actually used, after clamping to the valid range.
    pub delta: f64,
    /// True when Δ was above the range and clamped to its upper end.
    pub clamped: bool,
}

fn check_rate(name: &str, r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be >= 0, got {r}")))
    }
}

/// Minimum quadratic distortion of the one-sided Gaussian helper setting.
///
/// Leakage below `I(X;Z)` is infeasible. Leakage above `I(X;Y,Z)` constrains
/// nothing and is clamped to that value with a logged notice.
pub fn dmin_one_sided(chain: &GaussianChain, r1: f64, r2: f64, delta: f64) -> Result<Dmin> {
    check_rate("R1", r1)?;
    check_rate("R2", r2)?;
    let (lo, hi) = leakage_range(chain)?;
    if delta.is_nan() || delta < lo - RANGE_TOL {
        return Err(Error::Infeasible(format!(
            "Δ = {delta} below I(X;Z) floor {lo}"
        )));
    }
    let clamped = delta > hi + RANGE_TOL;
    if clamped {
        log::info!("Δ = {delta} exceeds I(X;Y,Z) = {hi}; clamping");
    }
    let delta = delta.clamp(lo, hi);
    let raw = alpha_star(chain, delta);
    if !(-1e-9..=1.0 + 1e-9).contains(&raw) {
        return Err(Error::Infeasible(format!(
            "alpha* = {raw} outside [0, 1] at Δ = {delta}"
        )));
    }
    let alpha = raw.clamp(0.0, 1.0);
    let (vy, v1) = (chain.var_root(), chain.var_n1());
    let scale = 2f64.powf(-2.0 * r1);
    let rate_branch = scale * (2f64.powf(-2.0 * r2) * vy + v1);
    let leak_branch = scale * (alpha * vy + v1);
    let (dmin, branch) = if rate_branch >= leak_branch {
        (rate_branch, Branch::Rate)
    } else {
        (leak_branch, Branch::Leakage)
    };
    Ok(Dmin {
        dmin,
        branch,
        alpha_star: alpha,
        delta,
        clamped,
    })
}

/// Leakage at which the two D_min branches meet, i.e. `α*(Δ*) = 2^{-2R2}`.
///
/// Independent of R1. Computed in closed form and checked by bisection.
pub fn delta_star(chain: &GaussianChain, r2: f64) -> Result<f64> {
    chain.require_order(ChainOrder::YXZ)?;
    if !(r2.is_finite() && r2 > 0.0) {
        return Err(Error::InvalidParameter(format!("R2 must be > 0, got {r2}")));
    }
    let closed = one_sided_leakage(chain, 2f64.powf(-2.0 * r2));
    let bisect = delta_star_bisection(chain, r2)?;
    if (closed - bisect).abs() > BISECTION_TOL {
        log::warn!("delta* closed form {closed} and bisection {bisect} disagree");
    }
    Ok(closed)
}

/// Bisection on `α*(Δ) − 2^{-2R2}` over the valid leakage range.
pub fn delta_star_bisection(chain: &GaussianChain, r2: f64) -> Result<f64> {
    let (mut lo, mut hi) = leakage_range(chain)?;
    let target = 2f64.powf(-2.0 * r2);
    // α* decreases in Δ.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alpha_star(chain, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Membership in the one-sided Gaussian region: `D ≥ D_min(R1, R2, Δ)`.
pub fn one_sided_gaussian_check(chain: &GaussianChain, q: &RdlPoint) -> Result<Verdict> {
    q.check()?;
    let (lo, _) = leakage_range(chain)?;
    if q.delta < lo - RANGE_TOL {
        return Ok(Verdict::from_constraints(&[("delta", lo, q.delta)]));
    }
    let dm = dmin_one_sided(chain, q.r1, q.r2, q.delta)?;
    Ok(Verdict::from_constraints(&[
        ("delta", lo, q.delta),
        ("d", dm.dmin, q.d),
    ]))
}

/// Equally spaced grid with `n` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// One point of a distortion-leakage curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub delta: f64,
    pub dmin: f64,
    pub branch: Branch,
    pub alpha_star: f64,
}

/// Minimum distortion as a function of leakage for fixed `(R1, R2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig4Curve {
    pub r1: f64,
    pub r2: f64,
    pub delta_star: f64,
    pub points: Vec<CurvePoint>,
}

impl Fig4Curve {
    /// Writes `delta,dmin,branch,alpha_star` rows with 12 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["delta", "dmin", "branch", "alpha_star"])?;
        for p in &self.points {
            out.write_record([
                fmt_sig(p.delta),
                fmt_sig(p.dmin),
                p.branch.as_str().to_string(),
                fmt_sig(p.alpha_star),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Evaluates D_min at every Δ in `deltas`.
pub fn fig4_curve(chain: &GaussianChain, r1: f64, r2: f64, deltas: &[f64]) -> Result<Fig4Curve> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("empty leakage grid".into()));
    }
    let points = deltas
        .iter()
        .map(|&delta| {
            dmin_one_sided(chain, r1, r2, delta).map(|d| CurvePoint {
                delta,
                dmin: d.dmin,
                branch: d.branch,
                alpha_star: d.alpha_star,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig4Curve {
        r1,
        r2,
        delta_star: delta_star(chain, r2)?,
        points,
    })
}

/// Floors of the Gaussian triangular settings A and B at distortion `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianFloors {
    /// MMSE of X given Y, `σ_X² σ_N1² / (σ_X² + σ_N1²)`.
    pub sigma2: f64,
    /// `I(X;Z) = ½log(1 + σ_X² / (σ_N1² + σ_N2²))`.
    pub i_xz: f64,
    /// Floor on R1 and R2: `[½log(σ²/D) − R3]⁺`.
    pub rate: f64,
    /// Leakage floor without a key (setting A).
    pub leakage_a: f64,
    /// Leakage floor with a key (setting B): `I(X;Z)`.
    pub leakage_b: f64,
}

/// Gaussian floors on an `X − Y − Z` chain.
pub fn gaussian_tri_floors(chain: &GaussianChain, d: f64, r3: f64) -> Result<GaussianFloors> {
    chain.require_order(ChainOrder::XYZ)?;
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidParameter(format!("distortion {d} must be > 0")));
    }
    check_rate("R3", r3)?;
    let (vx, v1, v2) = (chain.var_root(), chain.var_n1(), chain.var_n2());
    let sigma2 = vx * v1 / (vx + v1);
    let i_xz = half_log2(1.0 + vx / (v1 + v2));
    let rate = pos(half_log2(sigma2 / d) - r3);
    Ok(GaussianFloors {
        sigma2,
        i_xz,
        rate,
        leakage_a: i_xz + rate,
        leakage_b: i_xz,
    })
}

/// Gaussian setting A membership; a missing `q.r3` means the cascade.
pub fn tri_a_gaussian_check(chain: &GaussianChain, q: &RdlPoint) -> Result<Verdict> {
    q.check()?;
    let f = gaussian_tri_floors(chain, q.d, q.r3.unwrap_or(0.0))?;
    Ok(Verdict::from_constraints(&[
        ("r1", f.rate, q.r1),
        ("r2", f.rate, q.r2),
        ("delta", f.leakage_a, q.delta),
    ]))
}

/// Gaussian setting B membership; the key removes every rate term from the
/// leakage floor.
pub fn tri_b_gaussian_check(chain: &GaussianChain, q: &RdlPoint) -> Result<Verdict> {
    q.check()?;
    let f = gaussian_tri_floors(chain, q.d, q.r3.unwrap_or(0.0))?;
    Ok(Verdict::from_constraints(&[
        ("r1", f.rate, q.r1),
        ("r2", f.rate, q.r2),
        ("delta", f.leakage_b, q.delta),
    ]))
}
