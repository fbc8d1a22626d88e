//! Corner-point evaluators and membership checks for discrete settings.
//!
//! Coordinate roles per setting, all on a [`JointPmf3`] `(X, Y, Z)`:
//!
//! * One-sided and two-sided helper: `X` is the source, `Y` the helper's
//!   observation, `Z` the eavesdropper's side information. The helper's
//!   description `U` is public.
//! * Triangular/cascade settings A and B: `X` is the source, `Y` is decoder
//!   side information (also known to the encoder in B), `Z` is the helper's
//!   side information. Requires `X − Y − Z`.
//! * Setting C: `X` is the source, `Y` is decoder side information; the
//!   helper has none, so `Z` is ignored.
//! * Setting D: `X` is the source, `Z` is known at the helper and the
//!   encoder, `Y` at the decoder. Requires `X − Z − Y`.
//!
//! Leakage is always measured against the helper's received index together
//! with `Z`, so every setting except C has the floor `Δ ≥ I(X; Z)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::measures::{cond_entropy, cond_mutual_info, mutual_info, pos, Bits};
use crate::model::{AuxChannel, Coord, Joint, JointPmf3, RdlPoint, Var};

/// Slack below which a constraint still counts as satisfied.
pub const MEMBER_TOL: f64 = 1e-12;

const AX_X: usize = 0;
const AX_Y: usize = 1;
const AX_Z: usize = 2;
const AX_U: usize = 3;
const AX_V: usize = 4;

/// The coding settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SettingId {
    OneSided,
    TwoSided,
    TriA,
    CasA,
    TriABc,
    TriB,
    CasB,
    TriBBc,
    TriC,
    CasC,
    TriCBc,
    TriD,
    CasD,
    TriDBc,
}

impl SettingId {
    pub const ALL: [SettingId; 14] = [
        SettingId::OneSided,
        SettingId::TwoSided,
        SettingId::TriA,
        SettingId::CasA,
        SettingId::TriABc,
        SettingId::TriB,
        SettingId::CasB,
        SettingId::TriBBc,
        SettingId::TriC,
        SettingId::CasC,
        SettingId::TriCBc,
        SettingId::TriD,
        SettingId::CasD,
        SettingId::TriDBc,
    ];

    /// Command-line name, e.g. `tri-a-bc`.
    pub fn name(self) -> &'static str {
        match self {
            SettingId::OneSided => "one-sided",
            SettingId::TwoSided => "two-sided",
            SettingId::TriA => "tri-a",
            SettingId::CasA => "cas-a",
            SettingId::TriABc => "tri-a-bc",
            SettingId::TriB => "tri-b",
            SettingId::CasB => "cas-b",
            SettingId::TriBBc => "tri-b-bc",
            SettingId::TriC => "tri-c",
            SettingId::CasC => "cas-c",
            SettingId::TriCBc => "tri-c-bc",
            SettingId::TriD => "tri-d",
            SettingId::CasD => "cas-d",
            SettingId::TriDBc => "tri-d-bc",
        }
    }

    /// Markov chain the model must satisfy, if any.
    pub fn markov(self) -> Option<[Coord; 3]> {
        use SettingId::*;
        match self {
            TriA | CasA | TriABc | TriB | CasB | TriBBc => Some([Coord::X, Coord::Y, Coord::Z]),
            TriD | CasD | TriDBc => Some([Coord::X, Coord::Z, Coord::Y]),
            _ => None,
        }
    }

    /// True for settings with a private encoder-decoder link of rate R3.
    pub fn has_private_link(self) -> bool {
        matches!(
            self,
            SettingId::TriA | SettingId::TriB | SettingId::TriC | SettingId::TriD
        )
    }

    /// True when the region is given in closed form (no auxiliaries).
    pub fn is_closed_form(self) -> bool {
        use SettingId::*;
        matches!(self, TriA | CasA | TriABc | TriB | CasB | TriBBc)
    }

    /// True when Δ ≥ I(X;Z) holds for every achievable point.
    pub fn has_leakage_floor(self) -> bool {
        !matches!(self, SettingId::TriC | SettingId::CasC | SettingId::TriCBc)
    }

    /// Checks the setting's Markov precondition.
    pub fn require_markov(self, model: &JointPmf3) -> Result<()> {
        match self.markov() {
            Some(chain) => model.require_markov(chain),
            None => Ok(()),
        }
    }
}

impl fmt::Display for SettingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SettingId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        SettingId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown setting {s:?}")))
    }
}

/// Per-letter distortion d(x, x̂) as a dense `|X| × |X̂|` table.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionMatrix {
    x_size: usize,
    xhat_size: usize,
    vals: Vec<f64>,
}

impl DistortionMatrix {
    pub fn new(x_size: usize, xhat_size: usize, vals: Vec<f64>) -> Result<Self> {
        if x_size == 0 || xhat_size == 0 || vals.len() != x_size * xhat_size {
            return Err(Error::DimensionMismatch {
                expected: x_size * xhat_size,
                found: vals.len(),
            });
        }
        if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "distortion entries must be finite and >= 0".into(),
            ));
        }
        Ok(DistortionMatrix {
            x_size,
            xhat_size,
            vals,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged distortion rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Hamming distortion on an alphabet of size `n`.
    pub fn hamming(n: usize) -> Self {
        let vals = (0..n * n)
            .map(|i| if i / n == i % n { 0.0 } else { 1.0 })
            .collect();
        DistortionMatrix {
            x_size: n,
            xhat_size: n,
            vals,
        }
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn xhat_size(&self) -> usize {
        self.xhat_size
    }

    pub fn get(&self, x: usize, xhat: usize) -> f64 {
        self.vals[x * self.xhat_size + xhat]
    }
}

/// How the decoder turns its arguments into a reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub enum Decoder {
    /// Fixed lookup table g, indexed row-major over the decoder's arguments.
    Table {
        g: Vec<usize>,
        distortion: DistortionMatrix,
    },
    /// Per-argument argmin of the conditional expected distortion; ties go to
    /// the lowest index.
    Argmin(DistortionMatrix),
    /// Logarithmic loss with the posterior as soft reconstruction, so the
    /// expected distortion is the conditional entropy of X.
    LogLoss,
}

impl Decoder {
    pub fn hamming_argmin(n: usize) -> Self {
        Decoder::Argmin(DistortionMatrix::hamming(n))
    }
}

/// Expected distortion of `decoder` acting on `arg_axes`; also returns the
/// reconstruction table when one is used.
pub fn expected_distortion(
    j: &Joint,
    x_axis: usize,
    arg_axes: &[usize],
    decoder: &Decoder,
) -> Result<(Bits, Option<Vec<usize>>)> {
    let x_size = j.dims()[x_axis];
    let dist = match decoder {
        Decoder::LogLoss => {
            return Ok((cond_entropy(j, &[x_axis], arg_axes)?, None));
        }
        Decoder::Table { distortion, .. } | Decoder::Argmin(distortion) => distortion,
    };
    if dist.x_size != x_size {
        return Err(Error::DimensionMismatch {
            expected: x_size,
            found: dist.x_size,
        });
    }
    let mut axes = arg_axes.to_vec();
    axes.push(x_axis);
    let m = j.marginal(&axes)?;
    let n_ctx = m.probs().len() / x_size;
    let mut table = Vec::with_capacity(n_ctx);
    let mut total = 0.0;
    for (ctx, row) in m.probs().chunks(x_size).enumerate() {
        let cost = |xh: usize| -> f64 {
            row.iter()
                .enumerate()
                .map(|(x, &p)| if p > 0.0 { p * dist.get(x, xh) } else { 0.0 })
                .sum()
        };
        let xh = match decoder {
            Decoder::Table { g, .. } => {
                if g.len() != n_ctx {
                    return Err(Error::DimensionMismatch {
                        expected: n_ctx,
                        found: g.len(),
                    });
                }
                if g[ctx] >= dist.xhat_size {
                    return Err(Error::InvalidParameter(format!(
                        "g[{ctx}] = {} is outside the reconstruction alphabet",
                        g[ctx]
                    )));
                }
                g[ctx]
            }
            _ => {
                let mut best = 0;
                let mut best_cost = cost(0);
                for xh in 1..dist.xhat_size {
                    let c = cost(xh);
                    if c < best_cost {
                        best = xh;
                        best_cost = c;
                    }
                }
                best
            }
        };
        total += cost(xh);
        table.push(xh);
    }
    Ok((total, Some(table)))
}

/// A corner point together with what achieves it.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerPoint {
    pub point: RdlPoint,
    /// Minimal R1 + R2, for settings that constrain the sum rate.
    pub sum_rate: Option<f64>,
    pub achieving: Achieving,
}

/// Auxiliary channels, reconstruction table, and scalar parameters behind a
/// corner point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Achieving {
    pub channels: Vec<AuxChannel>,
    pub g: Option<Vec<usize>>,
    pub params: Vec<(&'static str, f64)>,
}

/// Signed slack `value − floor` of one constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct Slack {
    pub name: &'static str,
    pub floor: f64,
    pub value: f64,
    pub slack: f64,
}

/// Membership verdict with per-constraint slack.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub member: bool,
    pub constraints: Vec<Slack>,
    /// Human-readable reason for a non-member verdict.
    pub reason: Option<String>,
}

impl Verdict {
    /// Builds a verdict from `(name, floor, value)` triples.
    pub fn from_constraints(items: &[(&'static str, f64, f64)]) -> Self {
        let constraints: Vec<Slack> = items
            .iter()
            .map(|&(name, floor, value)| Slack {
                name,
                floor,
                value,
                slack: value - floor,
            })
            .collect();
        let failing: Vec<&Slack> = constraints
            .iter()
            .filter(|s| s.slack < -MEMBER_TOL)
            .collect();
        let reason = if failing.is_empty() {
            None
        } else if failing.iter().any(|s| s.name == "delta") && failing.len() == 1 {
            Some(format!(
                "leakage {} below floor {}",
                failing[0].value, failing[0].floor
            ))
        } else {
            Some(
                failing
                    .iter()
                    .map(|s| format!("{} = {} below floor {}", s.name, s.value, s.floor))
                    .collect::<Vec<_>>()
                    .join("; "),
            )
        };
        Verdict {
            member: failing.is_empty(),
            constraints,
            reason,
        }
    }

    /// Largest violation, 0 for members.
    pub fn max_violation(&self) -> f64 {
        self.constraints
            .iter()
            .map(|s| pos(-s.slack))
            .fold(0.0, f64::max)
    }
}

fn one_axis(model: &JointPmf3, c: Coord) -> usize {
    model.size(c)
}

/// One-sided inner bound: `(R1, R2, D, Δ) = (I(X;V|U), I(Y;U), E d(X, g(U,V)), I(X;U,Z))`
/// under `p(x,y,z) p(u|y) p(v|x)`.
pub fn one_sided_inner_corner(
    model: &JointPmf3,
    p_u_given_y: &AuxChannel,
    p_v_given_x: &AuxChannel,
    decoder: &Decoder,
) -> Result<CornerPoint> {
    let [nx, ny, _] = model.sizes();
    p_u_given_y.require_inputs(&[Var::Y], &[ny])?;
    p_u_given_y.require_cap("U", ny + 4)?;
    p_v_given_x.require_inputs(&[Var::X], &[nx])?;
    p_v_given_x.require_cap("V", nx + 1)?;
    let j = model
        .joint()
        .attach(p_u_given_y, &[AX_Y])?
        .attach(p_v_given_x, &[AX_X])?;
    let r2 = mutual_info(&j, &[AX_Y], &[AX_U])?;
    let r1 = cond_mutual_info(&j, &[AX_X], &[AX_V], &[AX_U])?;
    let (d, g) = expected_distortion(&j, AX_X, &[AX_U, AX_V], decoder)?;
    let delta = mutual_info(&j, &[AX_X], &[AX_U, AX_Z])?;
    Ok(CornerPoint {
        point: RdlPoint::new(r1, r2, None, d, delta)?,
        sum_rate: None,
        achieving: Achieving {
            channels: vec![p_u_given_y.clone(), p_v_given_x.clone()],
            g,
            params: vec![],
        },
    })
}

/// One-sided logarithmic-loss corner at distortion `d`:
/// `(R1, R2, Δ) = ([H(X|U) − D]⁺, I(Y;U), I(X;U,Z))`.
pub fn one_sided_logloss_corner(
    model: &JointPmf3,
    p_u_given_y: &AuxChannel,
    d: f64,
) -> Result<CornerPoint> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::InvalidParameter(format!("distortion {d} must be >= 0")));
    }
    let ny = one_axis(model, Coord::Y);
    p_u_given_y.require_inputs(&[Var::Y], &[ny])?;
    p_u_given_y.require_cap("U", ny + 2)?;
    let j = model.joint().attach(p_u_given_y, &[AX_Y])?;
    let r2 = mutual_info(&j, &[AX_Y], &[AX_U])?;
    let h_x_u = cond_entropy(&j, &[AX_X], &[AX_U])?;
    let delta = mutual_info(&j, &[AX_X], &[AX_U, AX_Z])?;
    Ok(CornerPoint {
        point: RdlPoint::new(pos(h_x_u - d), r2, None, d, delta)?,
        sum_rate: None,
        achieving: Achieving {
            channels: vec![p_u_given_y.clone()],
            g: None,
            params: vec![("h_x_given_u", h_x_u)],
        },
    })
}

/// Two-sided corner: `(R1, R2, D, Δ) = (I(X;X̂|U), I(Y;U), E d(X,X̂), I(X;U,Z))`
/// under `p(x,y,z) p(u|y) p(x̂|u,x)`.
pub fn two_sided_corner(
    model: &JointPmf3,
    p_u_given_y: &AuxChannel,
    p_xhat_given_ux: &AuxChannel,
    distortion: &DistortionMatrix,
) -> Result<CornerPoint> {
    let [nx, ny, _] = model.sizes();
    p_u_given_y.require_inputs(&[Var::Y], &[ny])?;
    p_u_given_y.require_cap("U", ny + 3)?;
    let nu = p_u_given_y.aux_size();
    p_xhat_given_ux.require_inputs(&[Var::U, Var::X], &[nu, nx])?;
    let j = model
        .joint()
        .attach(p_u_given_y, &[AX_Y])?
        .attach(p_xhat_given_ux, &[AX_U, AX_X])?;
    two_sided_measures(&j, distortion, vec![p_u_given_y.clone(), p_xhat_given_ux.clone()])
}

/// Two-sided corner when the reconstruction channel may also depend on `y`,
/// i.e. under `p(x,y,z) p(u|y) p̄(x̂|u,x,y)`.
pub fn two_sided_corner_general(
    model: &JointPmf3,
    p_u_given_y: &AuxChannel,
    p_xhat_given_uxy: &AuxChannel,
    distortion: &DistortionMatrix,
) -> Result<CornerPoint> {
    let [nx, ny, _] = model.sizes();
    p_u_given_y.require_inputs(&[Var::Y], &[ny])?;
    p_u_given_y.require_cap("U", ny + 3)?;
    let nu = p_u_given_y.aux_size();
    p_xhat_given_uxy.require_inputs(&[Var::U, Var::X, Var::Y], &[nu, nx, ny])?;
    let j = model
        .joint()
        .attach(p_u_given_y, &[AX_Y])?
        .attach(p_xhat_given_uxy, &[AX_U, AX_X, AX_Y])?;
    two_sided_measures(&j, distortion, vec![p_u_given_y.clone(), p_xhat_given_uxy.clone()])
}

fn two_sided_measures(
    j: &Joint,
    distortion: &DistortionMatrix,
    channels: Vec<AuxChannel>,
) -> Result<CornerPoint> {
    const AX_XHAT: usize = 4;
    if distortion.xhat_size != j.dims()[AX_XHAT] || distortion.x_size != j.dims()[AX_X] {
        return Err(Error::DimensionMismatch {
            expected: j.dims()[AX_XHAT],
            found: distortion.xhat_size,
        });
    }
    let r2 = mutual_info(j, &[AX_Y], &[AX_U])?;
    let r1 = cond_mutual_info(j, &[AX_X], &[AX_XHAT], &[AX_U])?;
    let pxh = j.marginal(&[AX_X, AX_XHAT])?;
    let nxh = distortion.xhat_size;
    let d = pxh
        .probs()
        .iter()
        .enumerate()
        .map(|(i, &p)| if p > 0.0 { p * distortion.get(i / nxh, i % nxh) } else { 0.0 })
        .sum();
    let delta = mutual_info(j, &[AX_X], &[AX_U, AX_Z])?;
    Ok(CornerPoint {
        point: RdlPoint::new(r1, r2, None, d, delta)?,
        sum_rate: None,
        achieving: Achieving {
            channels,
            g: None,
            params: vec![],
        },
    })
}

/// The `(u, x)`-channel `p̄(x̂|u,x)` induced by `p(x,y,z) p(u|y) p̄(x̂|u,x,y)`.
///
/// Rows for zero-probability `(u, x)` are uniform.
pub fn induced_xhat_channel(
    model: &JointPmf3,
    p_u_given_y: &AuxChannel,
    p_xhat_given_uxy: &AuxChannel,
) -> Result<AuxChannel> {
    let [nx, _, _] = model.sizes();
    let nu = p_u_given_y.aux_size();
    let j = model
        .joint()
        .attach(p_u_given_y, &[AX_Y])?
        .attach(p_xhat_given_uxy, &[AX_U, AX_X, AX_Y])?;
    let m = j.marginal(&[AX_U, AX_X, 4])?;
    let nxh = p_xhat_given_uxy.aux_size();
    let mut probs = m.probs().to_vec();
    for row in probs.chunks_mut(nxh) {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|p| *p /= s);
        } else {
            row.fill(1.0 / nxh as f64);
        }
    }
    AuxChannel::new(vec![Var::U, Var::X], vec![nu, nx], nxh, probs)
}

/// Logarithmic-loss floors shared by settings A and B.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoglossFloors {
    /// `H(X|Y)`.
    pub h_x_given_y: Bits,
    /// `I(X;Z)`.
    pub i_xz: Bits,
    /// `H(Y|X,Z)`, the key-rate ceiling of setting B.
    pub h_y_given_xz: Bits,
    /// Floor on R1 and R2.
    pub rate: Bits,
    /// Floor on Δ.
    pub leakage: Bits,
}

fn logloss_terms(model: &JointPmf3) -> Result<(Bits, Bits, Bits)> {
    let j = model.joint();
    Ok((
        cond_entropy(&j, &[AX_X], &[AX_Y])?,
        mutual_info(&j, &[AX_X], &[AX_Z])?,
        cond_entropy(&j, &[AX_Y], &[AX_X, AX_Z])?,
    ))
}

fn check_d_r3(d: f64, r3: f64) -> Result<()> {
    if !(d.is_finite() && d >= 0.0 && r3.is_finite() && r3 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need D >= 0 and R3 >= 0, got D = {d}, R3 = {r3}"
        )));
    }
    Ok(())
}

/// Setting A floors: rates `[H(X|Y) − D − R3]⁺`, leakage `I(X;Z)` plus the same.
pub fn tri_a_logloss_floors(model: &JointPmf3, d: f64, r3: f64) -> Result<LoglossFloors> {
    check_d_r3(d, r3)?;
    model.require_markov([Coord::X, Coord::Y, Coord::Z])?;
    let (h_x_given_y, i_xz, h_y_given_xz) = logloss_terms(model)?;
    let rate = pos(h_x_given_y - d - r3);
    Ok(LoglossFloors {
        h_x_given_y,
        i_xz,
        h_y_given_xz,
        rate,
        leakage: i_xz + rate,
    })
}

/// Setting B floors: rates as in A, leakage `I(X;Z) + [H(X|Y) − D − R3 − H(Y|X,Z)]⁺`.
pub fn tri_b_logloss_floors(model: &JointPmf3, d: f64, r3: f64) -> Result<LoglossFloors> {
    let a = tri_a_logloss_floors(model, d, r3)?;
    Ok(LoglossFloors {
        leakage: a.i_xz + pos(a.h_x_given_y - d - r3 - a.h_y_given_xz),
        ..a
    })
}

fn q_r3(q: &RdlPoint) -> f64 {
    q.r3.unwrap_or(0.0)
}

/// Setting A membership; a missing `q.r3` means the cascade (R3 = 0).
pub fn tri_a_logloss_check(model: &JointPmf3, q: &RdlPoint) -> Result<Verdict> {
    q.check()?;
    let f = tri_a_logloss_floors(model, q.d, q_r3(q))?;
    Ok(Verdict::from_constraints(&[
        ("r1", f.rate, q.r1),
        ("r2", f.rate, q.r2),
        ("delta", f.leakage, q.delta),
    ]))
}

/// Setting A with a broadcast helper link:
/// `R1 ≥ [H(X|Y) − D]⁺`, `R2 ≥ 0`, `Δ ≥ I(X;Z) + [H(X|Y) − D]⁺`.
pub fn tri_a_bc_logloss_check(model: &JointPmf3, q: &RdlPoint) -> Result<Verdict> {
    q.check()?;
    let f = tri_a_logloss_floors(model, q.d, 0.0)?;
    Ok(Verdict::from_constraints(&[
        ("r1", f.rate, q.r1),
        ("r2", 0.0, q.r2),
        ("delta", f.leakage, q.delta),
    ]))
}

/// Setting B membership; a missing `q.r3` means the cascade (R3 = 0).
pub fn tri_b_logloss_check(model: &JointPmf3, q: &RdlPoint) -> Result<Verdict> {
    q.check()?;
    let f = tri_b_logloss_floors(model, q.d, q_r3(q))?;
    Ok(Verdict::from_constraints(&[
        ("r1", f.rate, q.r1),
        ("r2", f.rate, q.r2),
        ("delta", f.leakage, q.delta),
    ]))
}

/// Setting B with a broadcast helper link.
pub fn tri_b_bc_logloss_check(model: &JointPmf3, q: &RdlPoint) -> Result<Verdict> {
    q.check()?;
    let f = tri_b_logloss_floors(model, q.d, 0.0)?;
    Ok(Verdict::from_constraints(&[
        ("r1", f.rate, q.r1),
        ("r2", 0.0, q.r2),
        ("delta", f.leakage, q.delta),
    ]))
}

/// Closed-form check for settings A and B and their variants.
pub fn closed_form_check(setting: SettingId, model: &JointPmf3, q: &RdlPoint) -> Result<Verdict> {
    let mut q = *q;
    match setting {
        SettingId::CasA | SettingId::CasB => q.r3 = None,
        SettingId::TriA | SettingId::TriB if q.r3.is_none() => {
            return Err(Error::InvalidParameter(format!("{setting} needs R3")));
        }
        _ => {}
    }
    match setting {
        SettingId::TriA | SettingId::CasA => tri_a_logloss_check(model, &q),
        SettingId::TriABc => tri_a_bc_logloss_check(model, &q),
        SettingId::TriB | SettingId::CasB => tri_b_logloss_check(model, &q),
        SettingId::TriBBc => tri_b_bc_logloss_check(model, &q),
        other => Err(Error::Unsupported(format!("{other} has no closed-form region"))),
    }
}

/// Closed-form corner for settings A and B at distortion `d` and private rate `r3`.
pub fn closed_form_corner(
    setting: SettingId,
    model: &JointPmf3,
    d: f64,
    r3: Option<f64>,
) -> Result<CornerPoint> {
    let r3v = if setting.has_private_link() {
        Some(r3.ok_or_else(|| Error::InvalidParameter(format!("{setting} needs R3")))?)
    } else {
        None
    };
    let f = match setting {
        SettingId::TriA | SettingId::CasA | SettingId::TriABc => {
            tri_a_logloss_floors(model, d, r3v.unwrap_or(0.0))?
        }
        SettingId::TriB | SettingId::CasB | SettingId::TriBBc => {
            tri_b_logloss_floors(model, d, r3v.unwrap_or(0.0))?
        }
        other => return Err(Error::Unsupported(format!("{other} has no closed-form region"))),
    };
    let r2 = if matches!(setting, SettingId::TriABc | SettingId::TriBBc) {
        0.0
    } else {
        f.rate
    };
    Ok(CornerPoint {
        point: RdlPoint::new(f.rate, r2, r3v, d, f.leakage)?,
        sum_rate: None,
        achieving: Achieving {
            channels: vec![],
            g: None,
            params: vec![
                ("h_x_given_y", f.h_x_given_y),
                ("i_xz", f.i_xz),
                ("h_y_given_xz", f.h_y_given_xz),
            ],
        },
    })
}

fn setting_c_joint(model: &JointPmf3, p_u_given_x: &AuxChannel) -> Result<Joint> {
    let [nx, _, nz] = model.sizes();
    if nz > 1 {
        log::warn!("setting C has no helper side information; ignoring Z");
    }
    p_u_given_x.require_inputs(&[Var::X], &[nx])?;
    p_u_given_x.require_cap("U", nx + 1)?;
    model
        .marginal(&[Coord::X, Coord::Y])?
        .attach(p_u_given_x, &[AX_X])
}

/// Setting C corner: with `I = I(X;U|Y)`, `(R1, R2, Δ) = ([I − R3]⁺, same, same)` and
/// `D = E d(X, g(U,Y))`. `r3 = None` gives the cascade.
pub fn tri_c_corner(
    model: &JointPmf3,
    p_u_given_x: &AuxChannel,
    decoder: &Decoder,
    r3: Option<f64>,
) -> Result<CornerPoint> {
    let r3v = r3.unwrap_or(0.0);
    check_d_r3(0.0, r3v)?;
    let j = setting_c_joint(model, p_u_given_x)?;
    // Axes: X = 0, Y = 1, U = 2.
    let i = cond_mutual_info(&j, &[0], &[2], &[1])?;
    let (d, g) = expected_distortion(&j, 0, &[2, 1], decoder)?;
    let r = pos(i - r3v);
    Ok(CornerPoint {
        point: RdlPoint::new(r, r, r3, d, r)?,
        sum_rate: None,
        achieving: Achieving {
            channels: vec![p_u_given_x.clone()],
            g,
            params: vec![("i_xu_given_y", i)],
        },
    })
}

/// Setting C with a broadcast helper link: `(R1, R2, Δ) = (I(X;U|Y), 0, I(X;U|Y))`.
pub fn tri_c_bc_corner(
    model: &JointPmf3,
    p_u_given_x: &AuxChannel,
    decoder: &Decoder,
) -> Result<CornerPoint> {
    let j = setting_c_joint(model, p_u_given_x)?;
    let i = cond_mutual_info(&j, &[0], &[2], &[1])?;
    let (d, g) = expected_distortion(&j, 0, &[2, 1], decoder)?;
    Ok(CornerPoint {
        point: RdlPoint::new(i, 0.0, None, d, i)?,
        sum_rate: None,
        achieving: Achieving {
            channels: vec![p_u_given_x.clone()],
            g,
            params: vec![("i_xu_given_y", i)],
        },
    })
}

fn setting_d_u(model: &JointPmf3, p_u_given_xz: &AuxChannel, cap: usize) -> Result<Joint> {
    model.require_markov([Coord::X, Coord::Z, Coord::Y])?;
    let [nx, _, nz] = model.sizes();
    p_u_given_xz.require_inputs(&[Var::X, Var::Z], &[nx, nz])?;
    p_u_given_xz.require_cap("U", cap)?;
    model.joint().attach(p_u_given_xz, &[AX_X, AX_Z])
}

/// Setting D corner: `(R1, R2, R3, D, Δ) = (I(X;U|Z), I(X,Z;U|Y), I(X,Z;V|U,Y),
/// E d(X, g(U,V,Y)), I(X;U,Z))` under `p(x,z) p(y|z) p(u|x,z) p(v|u,x,z)`.
pub fn tri_d_corner(
    model: &JointPmf3,
    p_u_given_xz: &AuxChannel,
    p_v_given_uxz: &AuxChannel,
    decoder: &Decoder,
) -> Result<CornerPoint> {
    let [nx, _, nz] = model.sizes();
    let k = nx * nz;
    let j = setting_d_u(model, p_u_given_xz, k + 3)?;
    let nu = p_u_given_xz.aux_size();
    p_v_given_uxz.require_inputs(&[Var::U, Var::X, Var::Z], &[nu, nx, nz])?;
    p_v_given_uxz.require_cap("V", (k + 3) * (k + 1))?;
    let j = j.attach(p_v_given_uxz, &[AX_U, AX_X, AX_Z])?;
    let r1 = cond_mutual_info(&j, &[AX_X], &[AX_U], &[AX_Z])?;
    let r2 = cond_mutual_info(&j, &[AX_X, AX_Z], &[AX_U], &[AX_Y])?;
    let r3 = cond_mutual_info(&j, &[AX_X, AX_Z], &[AX_V], &[AX_U, AX_Y])?;
    let (d, g) = expected_distortion(&j, AX_X, &[AX_U, AX_V, AX_Y], decoder)?;
    let delta = mutual_info(&j, &[AX_X], &[AX_U, AX_Z])?;
    Ok(CornerPoint {
        point: RdlPoint::new(r1, r2, Some(r3), d, delta)?,
        sum_rate: None,
        achieving: Achieving {
            channels: vec![p_u_given_xz.clone(), p_v_given_uxz.clone()],
            g,
            params: vec![],
        },
    })
}

/// Setting D cascade corner (no private link, no V):
/// `(R1, R2, D, Δ) = (I(X;U|Z), I(X,Z;U|Y), E d(X, g(U,Y)), I(X;U,Z))`.
pub fn cas_d_corner(
    model: &JointPmf3,
    p_u_given_xz: &AuxChannel,
    decoder: &Decoder,
) -> Result<CornerPoint> {
    let [nx, _, nz] = model.sizes();
    let j = setting_d_u(model, p_u_given_xz, nx * nz + 2)?;
    let r1 = cond_mutual_info(&j, &[AX_X], &[AX_U], &[AX_Z])?;
    let r2 = cond_mutual_info(&j, &[AX_X, AX_Z], &[AX_U], &[AX_Y])?;
    let (d, g) = expected_distortion(&j, AX_X, &[AX_U, AX_Y], decoder)?;
    let delta = mutual_info(&j, &[AX_X], &[AX_U, AX_Z])?;
    Ok(CornerPoint {
        point: RdlPoint::new(r1, r2, None, d, delta)?,
        sum_rate: None,
        achieving: Achieving {
            channels: vec![p_u_given_xz.clone()],
            g,
            params: vec![],
        },
    })
}

/// Setting D with a broadcast helper link. Returns the R1 floor `I(X;U|Z)` and
/// the sum-rate floor `I(X,Z;U|Y)` in [`CornerPoint::sum_rate`]; `point.r2` is
/// the smallest R2 at that R1.
pub fn tri_d_bc_corner(
    model: &JointPmf3,
    p_u_given_xz: &AuxChannel,
    decoder: &Decoder,
) -> Result<CornerPoint> {
    let [nx, _, nz] = model.sizes();
    let j = setting_d_u(model, p_u_given_xz, nx * nz + 2)?;
    let r1 = cond_mutual_info(&j, &[AX_X], &[AX_U], &[AX_Z])?;
    let sum = cond_mutual_info(&j, &[AX_X, AX_Z], &[AX_U], &[AX_Y])?;
    let (d, g) = expected_distortion(&j, AX_X, &[AX_U, AX_Y], decoder)?;
    let delta = mutual_info(&j, &[AX_X], &[AX_U, AX_Z])?;
    Ok(CornerPoint {
        point: RdlPoint::new(r1, pos(sum - r1), None, d, delta)?,
        sum_rate: Some(sum),
        achieving: Achieving {
            channels: vec![p_u_given_xz.clone()],
            g,
            params: vec![],
        },
    })
}

/// Outcome of the broadcast setting-D covering/packing system.
#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    /// Signed margins of `R1+R2+R′ > I(X,Z;U)`, `R2+R′ < I(Z;U)`, `R′ < I(Y;U)`.
    pub margins: [(&'static str, f64); 3],
    /// Names of failing inequalities; empty when feasible.
    pub violated: Vec<&'static str>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.violated.is_empty()
    }
}

/// Informations that enter the covering/packing system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct D14Terms {
    pub i_xz_u: Bits,
    pub i_z_u: Bits,
    pub i_y_u: Bits,
}

/// Computes `I(X,Z;U)`, `I(Z;U)` and `I(Y;U)` for the broadcast setting-D scheme.
pub fn d14_terms(model: &JointPmf3, p_u_given_xz: &AuxChannel) -> Result<D14Terms> {
    let [nx, _, nz] = model.sizes();
    let j = setting_d_u(model, p_u_given_xz, nx * nz + 2)?;
    Ok(D14Terms {
        i_xz_u: mutual_info(&j, &[AX_X, AX_Z], &[AX_U])?,
        i_z_u: mutual_info(&j, &[AX_Z], &[AX_U])?,
        i_y_u: mutual_info(&j, &[AX_Y], &[AX_U])?,
    })
}

/// Checks the three achievability inequalities of the broadcast setting-D
/// scheme for a given auxiliary rate `r_prime`:
///
/// * covering: `R1 + R2 + R′ > I(X,Z;U)`,
/// * packing at the helper: `R2 + R′ < I(Z;U)`,
/// * packing at the decoder: `R′ < I(Y;U)`.
///
/// An inequality with a zero-rate or zero-information side is satisfied with
/// equality: one codeword needs no packing, and an independent U needs no
/// covering. Eliminating R′ yields `R1 > I(X;U|Z)` and `R1 + R2 > I(X,Z;U|Y)`.
pub fn feasibility_check_d14(
    model: &JointPmf3,
    p_u_given_xz: &AuxChannel,
    r1: f64,
    r2: f64,
    r_prime: f64,
) -> Result<Feasibility> {
    let t = d14_terms(model, p_u_given_xz)?;
    Ok(feasibility_from_terms(&t, r1, r2, r_prime))
}

fn feasibility_from_terms(t: &D14Terms, r1: f64, r2: f64, r_prime: f64) -> Feasibility {
    let cover = r1 + r2 + r_prime - t.i_xz_u;
    let pack_helper = t.i_z_u - (r2 + r_prime);
    let pack_decoder = t.i_y_u - r_prime;
    let mut violated = Vec::new();
    if !(cover > 0.0 || t.i_xz_u <= MEMBER_TOL) {
        violated.push("covering");
    }
    if !(pack_helper > 0.0 || r2 + r_prime <= MEMBER_TOL) {
        violated.push("helper packing");
    }
    if !(pack_decoder > 0.0 || r_prime <= MEMBER_TOL) {
        violated.push("decoder packing");
    }
    Feasibility {
        margins: [
            ("covering", cover),
            ("helper packing", pack_helper),
            ("decoder packing", pack_decoder),
        ],
        violated,
    }
}

/// Finds an auxiliary rate R′ that satisfies all three inequalities, if any.
///
/// Tries the lower end of the admissible interval, then its midpoint.
pub fn find_r_prime(
    model: &JointPmf3,
    p_u_given_xz: &AuxChannel,
    r1: f64,
    r2: f64,
) -> Result<Option<f64>> {
    let t = d14_terms(model, p_u_given_xz)?;
    let lo = pos(t.i_xz_u - r1 - r2);
    let hi = t.i_y_u.min(t.i_z_u - r2);
    for cand in [lo, 0.5 * (lo + hi)] {
        if cand >= 0.0 && feasibility_from_terms(&t, r1, r2, cand).is_feasible() {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::h2;
    use approx::assert_abs_diff_eq;

    fn dsbs() -> JointPmf3 {
        JointPmf3::dsbs_z_eq_y(0.1).unwrap()
    }

    #[test]
    fn setting_names_round_trip() {
        for s in SettingId::ALL {
            assert_eq!(s.name().parse::<SettingId>().unwrap(), s);
        }
        assert!("tri-e".parse::<SettingId>().is_err());
        assert_eq!("TRI_A_BC".parse::<SettingId>().unwrap(), SettingId::TriABc);
    }

    #[test]
    fn argmin_ties_go_low() {
        let j = Joint::new(vec![2], vec![0.5, 0.5]).unwrap();
        let (d, g) = expected_distortion(&j, 0, &[], &Decoder::hamming_argmin(2)).unwrap();
        assert_eq!(d, 0.5);
        assert_eq!(g.unwrap(), vec![0]);
    }

    #[test]
    fn one_sided_inner_examples() {
        let m = dsbs();
        let u0 = AuxChannel::constant(vec![Var::Y], vec![2]);
        let v0 = AuxChannel::constant(vec![Var::X], vec![2]);
        let c = one_sided_inner_corner(&m, &u0, &v0, &Decoder::hamming_argmin(2)).unwrap();
        let i_xz = 1.0 - h2(0.1);
        assert_eq!((c.point.r1, c.point.r2), (0.0, 0.0));
        assert_abs_diff_eq!(c.point.d, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.point.delta, i_xz, epsilon = 1e-14);

        let vx = AuxChannel::identity(Var::X, 2);
        let g = Decoder::Table {
            g: vec![0, 1],
            distortion: DistortionMatrix::hamming(2),
        };
        let c = one_sided_inner_corner(&m, &u0, &vx, &g).unwrap();
        assert_abs_diff_eq!(c.point.r1, 1.0, epsilon = 1e-14);
        assert_eq!(c.point.d, 0.0);
        assert_abs_diff_eq!(c.point.delta, i_xz, epsilon = 1e-14);

        let big = AuxChannel::identity(Var::Y, 2);
        let too_big_v = AuxChannel::deterministic(vec![Var::X], vec![2], 4, |r| r).unwrap();
        assert!(matches!(
            one_sided_inner_corner(&m, &big, &too_big_v, &Decoder::LogLoss),
            Err(Error::CapExceeded { .. })
        ));
        let bad_g = Decoder::Table {
            g: vec![0, 2],
            distortion: DistortionMatrix::hamming(2),
        };
        assert!(one_sided_inner_corner(&m, &u0, &vx, &bad_g).is_err());
    }

    #[test]
    fn one_sided_logloss_examples() {
        let m = dsbs();
        let u = AuxChannel::bsc(Var::Y, 0.25).unwrap();
        let c = one_sided_logloss_corner(&m, &u, 5.0).unwrap();
        assert_eq!(c.point.r1, 0.0);

        let u0 = AuxChannel::constant(vec![Var::Y], vec![2]);
        let c = one_sided_logloss_corner(&m, &u0, 0.0).unwrap();
        assert_abs_diff_eq!(c.point.r1, 1.0, epsilon = 1e-15);
        assert_eq!(c.point.r2, 0.0);
        assert_abs_diff_eq!(c.point.delta, 1.0 - h2(0.1), epsilon = 1e-14);

        // U = Y through BSC(0.25): X - U is BSC(0.1 * 0.75 + 0.9 * 0.25).
        let c = one_sided_logloss_corner(&m, &u, 0.2).unwrap();
        let flip = 0.1 * 0.75 + 0.9 * 0.25;
        assert_abs_diff_eq!(c.point.r1, h2(flip) - 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(c.point.r2, 1.0 - h2(0.25), epsilon = 1e-14);
    }

    #[test]
    fn two_sided_examples() {
        let m = dsbs();
        let u0 = AuxChannel::constant(vec![Var::Y], vec![2]);
        let xh = AuxChannel::deterministic(vec![Var::U, Var::X], vec![1, 2], 2, |r| r).unwrap();
        let c = two_sided_corner(&m, &u0, &xh, &DistortionMatrix::hamming(2)).unwrap();
        assert_abs_diff_eq!(c.point.r1, 1.0, epsilon = 1e-14);
        assert_eq!(c.point.d, 0.0);

        let u = AuxChannel::bsc(Var::Y, 0.2).unwrap();
        let indep = AuxChannel::new(
            vec![Var::U, Var::X],
            vec![2, 2],
            2,
            vec![0.3, 0.7, 0.3, 0.7, 0.6, 0.4, 0.6, 0.4],
        )
        .unwrap();
        let c = two_sided_corner(&m, &u, &indep, &DistortionMatrix::hamming(2)).unwrap();
        assert_abs_diff_eq!(c.point.r1, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn marginal_matching_identity() {
        let pxy = [0.3, 0.1, 0.15, 0.45];
        let m = JointPmf3::from_xy_and_z_given_y(2, 2, &pxy, &[vec![0.8, 0.2], vec![0.3, 0.7]])
            .unwrap();
        let u = AuxChannel::new(vec![Var::Y], vec![2], 3, vec![0.5, 0.3, 0.2, 0.1, 0.1, 0.8])
            .unwrap();
        let rows: Vec<f64> = (0..12)
            .flat_map(|r| {
                let a = 0.1 + 0.07 * r as f64;
                [a, 1.0 - a]
            })
            .collect();
        let xh_uxy = AuxChannel::new(vec![Var::U, Var::X, Var::Y], vec![3, 2, 2], 2, rows).unwrap();
        let d = DistortionMatrix::hamming(2);
        let general = two_sided_corner_general(&m, &u, &xh_uxy, &d).unwrap();
        let induced = induced_xhat_channel(&m, &u, &xh_uxy).unwrap();
        let matched = two_sided_corner(&m, &u, &induced, &d).unwrap();
        for (a, b) in [
            (general.point.r1, matched.point.r1),
            (general.point.r2, matched.point.r2),
            (general.point.d, matched.point.d),
            (general.point.delta, matched.point.delta),
        ] {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn tri_a_examples() {
        let m = dsbs();
        let hxy = h2(0.1);
        let ixz = 1.0 - h2(0.1);
        let q = RdlPoint::new(0.0, 0.0, Some(0.0), hxy + 0.01, ixz).unwrap();
        assert!(tri_a_logloss_check(&m, &q).unwrap().member);

        let q = RdlPoint::new(1.0, 1.0, Some(0.0), 0.0, ixz - 0.01).unwrap();
        let v = tri_a_logloss_check(&m, &q).unwrap();
        assert!(!v.member);
        assert!(v.reason.unwrap().contains("leakage"));

        let f = tri_a_logloss_floors(&m, 0.2, 0.1).unwrap();
        let q = RdlPoint::new(f.rate, f.rate, Some(0.1), 0.2, f.leakage).unwrap();
        let v = tri_a_logloss_check(&m, &q).unwrap();
        assert!(v.member);
        assert!(v.constraints.iter().all(|s| s.slack.abs() <= 1e-12));
        assert_abs_diff_eq!(f.rate, hxy - 0.3, epsilon = 1e-15);

        let xor = {
            let mut p = vec![0.0; 8];
            for y in 0..2 {
                for z in 0..2 {
                    p[((y ^ z) * 2 + y) * 2 + z] = 0.25;
                }
            }
            JointPmf3::with_sizes(2, 2, 2, p).unwrap()
        };
        assert!(matches!(
            tri_a_logloss_check(&xor, &q),
            Err(Error::MarkovViolated { .. })
        ));
    }

    #[test]
    fn tri_a_bc_examples() {
        let m = dsbs();
        let (hxy, ixz) = (h2(0.1), 1.0 - h2(0.1));
        let d = 0.2;
        let q = RdlPoint::new(hxy - d, 0.0, None, d, ixz + hxy - d).unwrap();
        let v = tri_a_bc_logloss_check(&m, &q).unwrap();
        assert!(v.member);
        assert!(v.constraints.iter().all(|s| s.slack.abs() <= 1e-15));

        let q = RdlPoint::new(100.0, 0.0, None, d, 10.0).unwrap();
        assert!(tri_a_bc_logloss_check(&m, &q).unwrap().member);
        let q = RdlPoint::new(100.0, 0.0, None, d, ixz - 0.001).unwrap();
        assert!(!tri_a_bc_logloss_check(&m, &q).unwrap().member);
    }

    #[test]
    fn tri_b_examples() {
        // Y uniform, X = Y through BSC(0.1), Z = Y through BSC(0.3).
        let pxy = [0.45, 0.05, 0.05, 0.45];
        let m = JointPmf3::from_xy_and_z_given_y(2, 2, &pxy, &[vec![0.7, 0.3], vec![0.3, 0.7]])
            .unwrap();
        let b = tri_b_logloss_floors(&m, 0.3, 0.0).unwrap();
        assert!(b.h_y_given_xz >= b.h_x_given_y - 0.3);
        assert_abs_diff_eq!(b.leakage, b.i_xz, epsilon = 1e-15);

        let zc = JointPmf3::dsbs_z_const(0.1).unwrap();
        let b = tri_b_logloss_floors(&zc, 0.0, 0.0).unwrap();
        let j = zc.joint();
        let hyx = cond_entropy(&j, &[1], &[0]).unwrap();
        assert_abs_diff_eq!(b.h_y_given_xz, hyx, epsilon = 1e-15);
        assert_abs_diff_eq!(b.leakage, pos(h2(0.1) - hyx), epsilon = 1e-15);
    }

    #[test]
    fn tri_c_examples() {
        let m = JointPmf3::dsbs_z_const(0.1).unwrap();
        let u = AuxChannel::bsc(Var::X, 0.2).unwrap();
        let big = tri_c_corner(&m, &u, &Decoder::hamming_argmin(2), Some(10.0)).unwrap();
        assert_eq!((big.point.r1, big.point.r2, big.point.delta), (0.0, 0.0, 0.0));

        let u0 = AuxChannel::constant(vec![Var::X], vec![2]);
        let c = tri_c_corner(&m, &u0, &Decoder::hamming_argmin(2), None).unwrap();
        assert_eq!((c.point.r1, c.point.r2, c.point.delta), (0.0, 0.0, 0.0));
        assert_abs_diff_eq!(c.point.d, 0.1, epsilon = 1e-15);

        let bc = tri_c_bc_corner(&m, &u, &Decoder::hamming_argmin(2)).unwrap();
        let c = tri_c_corner(&m, &u, &Decoder::hamming_argmin(2), Some(0.0)).unwrap();
        assert_eq!(bc.point.r2, 0.0);
        assert_eq!(bc.point.r1, c.point.r1);
        assert_eq!(bc.point.delta, c.point.r1);
    }

    #[test]
    fn tri_d_examples() {
        // X uniform, Z = X through BSC(0.1), Y = Z through BSC(0.2).
        let pxz = [0.45, 0.05, 0.05, 0.45];
        let m = JointPmf3::from_xz_and_y_given_z(2, 2, &pxz, &[vec![0.8, 0.2], vec![0.2, 0.8]])
            .unwrap();
        let u0 = AuxChannel::constant(vec![Var::X, Var::Z], vec![2, 2]);
        let v0 = AuxChannel::constant(vec![Var::U, Var::X, Var::Z], vec![1, 2, 2]);
        let c = tri_d_corner(&m, &u0, &v0, &Decoder::hamming_argmin(2)).unwrap();
        let p = c.point;
        assert_eq!((p.r1, p.r2, p.r3), (0.0, 0.0, Some(0.0)));
        // Decoder sees Y only: X - Y is BSC(0.1*0.8 + 0.9*0.2).
        assert_abs_diff_eq!(p.d, 0.26, epsilon = 1e-15);
        assert_abs_diff_eq!(p.delta, 1.0 - h2(0.1), epsilon = 1e-14);

        let uz = AuxChannel::deterministic(vec![Var::X, Var::Z], vec![2, 2], 2, |r| r % 2).unwrap();
        let c = cas_d_corner(&m, &uz, &Decoder::hamming_argmin(2)).unwrap();
        assert_eq!(c.point.r1, 0.0);

        let bc = tri_d_bc_corner(&m, &uz, &Decoder::hamming_argmin(2)).unwrap();
        let s = bc.sum_rate.unwrap();
        assert_abs_diff_eq!(s, h2(0.2), epsilon = 1e-14);
        assert_abs_diff_eq!(bc.point.r2, s, epsilon = 1e-14);

        let not_xzy = dsbs();
        let mut p = not_xzy.probs().to_vec();
        p.swap(0, 1);
        let bad = JointPmf3::with_sizes(2, 2, 2, p).unwrap();
        assert!(matches!(
            cas_d_corner(&bad, &uz, &Decoder::LogLoss),
            Err(Error::MarkovViolated { .. })
        ));
    }

    #[test]
    fn d14_examples() {
        let pxz = [0.45, 0.05, 0.05, 0.45];
        let m = JointPmf3::from_xz_and_y_given_z(2, 2, &pxz, &[vec![0.9, 0.1], vec![0.1, 0.9]])
            .unwrap();
        let u = AuxChannel::new(
            vec![Var::X, Var::Z],
            vec![2, 2],
            2,
            vec![0.9, 0.1, 0.6, 0.4, 0.4, 0.6, 0.1, 0.9],
        )
        .unwrap();
        let bc = tri_d_bc_corner(&m, &u, &Decoder::LogLoss).unwrap();
        let r1 = bc.point.r1 + 0.1;
        let r2 = bc.sum_rate.unwrap() - bc.point.r1 + 0.1;
        let rp = find_r_prime(&m, &u, r1, r2).unwrap().expect("interior point");
        assert!(feasibility_check_d14(&m, &u, r1, r2, rp).unwrap().is_feasible());

        // Below the R1 floor, an R′ grid finds nothing.
        let r1 = bc.point.r1 - 0.02;
        assert!(find_r_prime(&m, &u, r1, 5.0).unwrap().is_none());
        for i in 0..=2000 {
            let rp = i as f64 * 1e-3;
            assert!(!feasibility_check_d14(&m, &u, r1, 0.3, rp).unwrap().is_feasible());
        }

        let u0 = AuxChannel::constant(vec![Var::X, Var::Z], vec![2, 2]);
        assert!(feasibility_check_d14(&m, &u0, 0.0, 0.0, 0.0).unwrap().is_feasible());
        assert_eq!(find_r_prime(&m, &u0, 0.0, 0.0).unwrap(), Some(0.0));
    }
}
