//! Grid search over quantized auxiliary channels.
//!
//! Every row of a quantized channel is a pmf whose entries are multiples of
//! `1/k`; the rows for an alphabet of size `m` are the
//! `C(k + m − 1, m − 1)` compositions of `k` into `m` parts, enumerated in
//! lexicographic order of their counts. A channel with `c` input symbols is a
//! tuple of `c` rows, so a grid holds `C(k + m − 1, m − 1)^c` channels.
//!
//! [`trace_frontier`] evaluates the setting's corner at every grid point and
//! keeps the Pareto-minimal ones; [`membership`] searches for a corner that
//! dominates a query. Both are deterministic: ties go to the earliest grid
//! point, and parallel evaluation merges in grid order.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::measures::mutual_info;
use crate::model::{AuxChannel, Coord, JointPmf3, RdlPoint, Var};
use crate::numfmt::fmt_sig;
use crate::regions_discrete::{
    cas_d_corner, closed_form_check, closed_form_corner, one_sided_inner_corner,
    one_sided_logloss_corner, tri_c_bc_corner, tri_c_corner, tri_d_bc_corner, tri_d_corner,
    two_sided_corner, CornerPoint, Decoder, DistortionMatrix, SettingId, Verdict, MEMBER_TOL,
};

/// Largest grid [`trace_frontier`] and [`membership`] will enumerate.
pub const MAX_GRID_POINTS: u128 = 50_000_000;
/// Tolerance used when comparing corner coordinates.
pub const DOMINANCE_TOL: f64 = 1e-12;
const CHUNK: u64 = 1024;

/// Grid resolution and alphabet sizes to scan.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    /// Row entries are multiples of `1 / resolution`.
    pub resolution: usize,
    /// Largest first-stage alphabet `|U|` (further capped per setting).
    pub max_aux: usize,
    /// Largest second-stage alphabet `|V|` (further capped per setting).
    pub max_second: usize,
    /// Enumerate every deterministic reconstruction table instead of taking
    /// the per-cell argmin.
    pub scan_reconstruction: bool,
}

impl GridSpec {
    pub fn new(resolution: usize, max_aux: usize) -> Self {
        GridSpec {
            resolution,
            max_aux,
            max_second: 1,
            scan_reconstruction: false,
        }
    }

    pub fn with_second(mut self, max_second: usize) -> Self {
        self.max_second = max_second;
        self
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::new(8, 4)
    }
}

/// Distortion measure used by grid searches.
#[derive(Clone, Debug, PartialEq)]
pub enum DistortionSpec {
    LogLoss,
    Matrix(DistortionMatrix),
}

/// Fixed coordinates of a search; free coordinates are the corner outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub distortion: DistortionSpec,
    /// Target distortion, required where the region is stated at a given D
    /// (logarithmic-loss one-sided and settings A/B).
    pub d: Option<f64>,
    /// Private-link rate for settings with one.
    pub r3: Option<f64>,
}

impl Objective {
    pub fn logloss(d: Option<f64>) -> Self {
        Objective {
            distortion: DistortionSpec::LogLoss,
            d,
            r3: None,
        }
    }

    pub fn matrix(m: DistortionMatrix) -> Self {
        Objective {
            distortion: DistortionSpec::Matrix(m),
            d: None,
            r3: None,
        }
    }

    pub fn with_r3(mut self, r3: f64) -> Self {
        self.r3 = Some(r3);
        self
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of quantized pmfs over `m` symbols at resolution `k`.
pub fn simplex_count(k: usize, m: usize) -> u128 {
    binomial((k + m - 1) as u128, (m - 1) as u128)
}

/// All pmfs over `m` symbols with entries in `{0, 1/k, …, 1}`, in
/// lexicographic order of their integer counts.
pub fn simplex_rows(k: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, m: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if m == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=k {
            prefix.push(c);
            rec(k - c, m - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut counts = Vec::new();
    rec(k, m, &mut Vec::with_capacity(m), &mut counts);
    counts
        .into_iter()
        .map(|c| c.into_iter().map(|n| n as f64 / k as f64).collect())
        .collect()
}

/// Every quantized channel with the given inputs and output alphabet.
#[derive(Clone, Debug)]
pub struct ChannelGrid {
    inputs: Vec<Var>,
    input_dims: Vec<usize>,
    aux_size: usize,
    rows: Vec<Vec<f64>>,
    len: u128,
}

impl ChannelGrid {
    pub fn new(k: usize, inputs: Vec<Var>, input_dims: Vec<usize>, aux_size: usize) -> Self {
        let rows = simplex_rows(k, aux_size);
        let card: u32 = input_dims.iter().product::<usize>() as u32;
        let len = (rows.len() as u128).checked_pow(card).unwrap_or(u128::MAX);
        ChannelGrid {
            inputs,
            input_dims,
            aux_size,
            rows,
            len,
        }
    }

    pub fn len(&self) -> u128 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `i`-th channel; the first input row is the most significant digit.
    pub fn channel(&self, mut i: u64) -> AuxChannel {
        let card: usize = self.input_dims.iter().product();
        let base = self.rows.len() as u64;
        let mut digits = vec![0usize; card];
        for d in digits.iter_mut().rev() {
            *d = (i % base) as usize;
            i /= base;
        }
        let probs = digits
            .iter()
            .flat_map(|&d| self.rows[d].iter().copied())
            .collect();
        AuxChannel::new(
            self.inputs.clone(),
            self.input_dims.clone(),
            self.aux_size,
            probs,
        )
        .expect("grid rows are pmfs")
    }
}

/// What produced a frontier point.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Position in the grid enumeration.
    pub index: u64,
    pub channels: Vec<AuxChannel>,
    pub g: Option<Vec<usize>>,
}

impl Witness {
    /// Serializes channels as decimal-string row lists, e.g.
    /// `U|Y=[[1,0],[0.5,0.5]];g=[0,1]`.
    pub fn encode(&self) -> String {
        let mut s = String::new();
        for (i, ch) in self.channels.iter().enumerate() {
            if i > 0 {
                s.push(';');
            }
            let inputs: Vec<String> = ch.inputs().iter().map(|v| v.to_string()).collect();
            let _ = write!(s, "{}|{}=[", channel_name(i, ch), inputs.join(","));
            for r in 0..ch.input_card() {
                if r > 0 {
                    s.push(',');
                }
                let row: Vec<String> = ch.row(r).iter().map(|p| format!("{p}")).collect();
                let _ = write!(s, "[{}]", row.join(","));
            }
            s.push(']');
        }
        if let Some(g) = &self.g {
            let g: Vec<String> = g.iter().map(|x| x.to_string()).collect();
            let _ = write!(s, ";g=[{}]", g.join(","));
        }
        s
    }
}

fn channel_name(i: usize, ch: &AuxChannel) -> &'static str {
    match (i, ch.inputs()) {
        (0, _) => "U",
        (_, [Var::U, Var::X]) => "Xhat",
        _ => "V",
    }
}

/// A Pareto-optimal corner and its witness.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierPoint {
    pub point: RdlPoint,
    pub sum_rate: Option<f64>,
    pub witness: Witness,
}

/// Pareto-filtered corners of a setting.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierCurve {
    pub setting: SettingId,
    pub resolution: usize,
    pub points: Vec<FrontierPoint>,
}

impl FrontierCurve {
    /// Writes `setting,k,r1,r2,r3,d,delta,witness` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["setting", "k", "r1", "r2", "r3", "d", "delta", "witness"])?;
        for p in &self.points {
            out.write_record([
                self.setting.name().to_string(),
                self.resolution.to_string(),
                fmt_sig(p.point.r1),
                fmt_sig(p.point.r2),
                p.point.r3.map(fmt_sig).unwrap_or_default(),
                fmt_sig(p.point.d),
                fmt_sig(p.point.delta),
                p.witness.encode(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Coordinates compared by the Pareto filter, all minimized.
fn pareto_key(point: &RdlPoint, sum_rate: Option<f64>) -> Vec<f64> {
    let mut k = vec![point.r1, sum_rate.unwrap_or(point.r2)];
    if let Some(r3) = point.r3 {
        k.push(r3);
    }
    k.push(point.d);
    k.push(point.delta);
    k
}

fn dominates_or_ties(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= *y + DOMINANCE_TOL)
}

/// Keeps the points not weakly dominated by an earlier-kept point.
///
/// Points are visited in lexicographic order of their keys, ties in input
/// order, so the first of several equal points survives.
pub fn pareto_filter<T>(items: Vec<(Vec<f64>, T)>) -> Vec<(Vec<f64>, T)> {
    let mut items: Vec<(usize, Vec<f64>, T)> = items
        .into_iter()
        .enumerate()
        .map(|(i, (k, t))| (i, k, t))
        .collect();
    items.sort_by(|a, b| {
        for (x, y) in a.1.iter().zip(&b.1) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => {}
                o => return o,
            }
        }
        a.0.cmp(&b.0)
    });
    let mut kept: Vec<(Vec<f64>, T)> = Vec::new();
    for (_, key, t) in items {
        if !kept.iter().any(|(k, _)| dominates_or_ties(k, &key)) {
            kept.push((key, t));
        }
    }
    kept
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Problem {
    ClosedForm,
    OneSidedLogLoss { d: f64 },
    OneSidedInner,
    TwoSided,
    SettingC { r3: Option<f64>, broadcast: bool },
    SettingD,
    CascadeD,
    BroadcastD,
}

#[derive(Clone, Debug)]
struct Block {
    u: ChannelGrid,
    v: Option<ChannelGrid>,
    /// Decoder argument cells and reconstruction alphabet when tables are scanned.
    g_cells: usize,
    n_g: u128,
    len: u128,
}

struct Search {
    setting: SettingId,
    model: JointPmf3,
    problem: Problem,
    distortion: Option<DistortionMatrix>,
    scan_g: bool,
    blocks: Vec<Block>,
    total: u64,
}

struct Eval {
    key: Vec<f64>,
    corner: CornerPoint,
}

impl Search {
    fn new(
        setting: SettingId,
        model: &JointPmf3,
        grid: &GridSpec,
        objective: &Objective,
    ) -> Result<Self> {
        if grid.resolution == 0 || grid.max_aux == 0 || grid.max_second == 0 {
            return Err(Error::InvalidParameter(
                "grid resolution and alphabet sizes must be >= 1".into(),
            ));
        }
        setting.require_markov(model)?;
        let [nx, ny, nz] = model.sizes();
        let distortion = match &objective.distortion {
            DistortionSpec::LogLoss => None,
            DistortionSpec::Matrix(m) => {
                if m.x_size() != nx {
                    return Err(Error::DimensionMismatch {
                        expected: nx,
                        found: m.x_size(),
                    });
                }
                Some(m.clone())
            }
        };
        let k = grid.resolution;
        let need_r3 = || {
            objective
                .r3
                .ok_or_else(|| Error::InvalidParameter(format!("{setting} needs R3")))
        };
        let problem = match setting {
            s if s.is_closed_form() => {
                if distortion.is_some() {
                    return Err(Error::Unsupported(format!(
                        "{s} is solved for logarithmic loss only"
                    )));
                }
                Problem::ClosedForm
            }
            SettingId::OneSided => match (&distortion, objective.d) {
                (None, Some(d)) => Problem::OneSidedLogLoss { d },
                _ => Problem::OneSidedInner,
            },
            SettingId::TwoSided => {
                if distortion.is_none() {
                    return Err(Error::Unsupported(
                        "two-sided search needs a distortion matrix".into(),
                    ));
                }
                Problem::TwoSided
            }
            SettingId::TriC => Problem::SettingC {
                r3: Some(need_r3()?),
                broadcast: false,
            },
            SettingId::CasC => Problem::SettingC {
                r3: None,
                broadcast: false,
            },
            SettingId::TriCBc => Problem::SettingC {
                r3: None,
                broadcast: true,
            },
            SettingId::TriD => Problem::SettingD,
            SettingId::CasD => Problem::CascadeD,
            SettingId::TriDBc => Problem::BroadcastD,
            _ => unreachable!("closed-form settings handled above"),
        };
        if problem == Problem::ClosedForm && objective.d.is_none() {
            return Err(Error::InvalidParameter(format!("{setting} needs a target D")));
        }
        let model = if matches!(problem, Problem::SettingC { .. }) && nz > 1 {
            log::warn!("setting C has no helper side information; ignoring Z");
            let xy = model.marginal(&[Coord::X, Coord::Y])?;
            JointPmf3::with_sizes(nx, ny, 1, xy.probs().to_vec())?
        } else {
            model.clone()
        };
        let scan_g = grid.scan_reconstruction && distortion.is_some();
        let xhat = distortion.as_ref().map_or(1, DistortionMatrix::xhat_size);
        let sizes = |cap: usize, max: usize| 1..=cap.min(max);
        let mut blocks = Vec::new();
        let mut push = |u: ChannelGrid, v: Option<ChannelGrid>, cells: usize| {
            let n_g = if scan_g {
                (xhat as u128).checked_pow(cells as u32).unwrap_or(u128::MAX)
            } else {
                1
            };
            let len = u
                .len()
                .saturating_mul(v.as_ref().map_or(1, ChannelGrid::len))
                .saturating_mul(n_g);
            blocks.push(Block {
                u,
                v,
                g_cells: cells,
                n_g,
                len,
            });
        };
        match problem {
            Problem::ClosedForm => {}
            Problem::OneSidedLogLoss { .. } => {
                for m in sizes(ny + 2, grid.max_aux) {
                    push(ChannelGrid::new(k, vec![Var::Y], vec![ny], m), None, 0);
                }
            }
            Problem::OneSidedInner => {
                for m in sizes(ny + 4, grid.max_aux) {
                    for mv in sizes(nx + 1, grid.max_second) {
                        let u = ChannelGrid::new(k, vec![Var::Y], vec![ny], m);
                        let v = ChannelGrid::new(k, vec![Var::X], vec![nx], mv);
                        push(u, Some(v), m * mv);
                    }
                }
            }
            Problem::TwoSided => {
                for m in sizes(ny + 3, grid.max_aux) {
                    let u = ChannelGrid::new(k, vec![Var::Y], vec![ny], m);
                    let xh = ChannelGrid::new(k, vec![Var::U, Var::X], vec![m, nx], xhat);
                    push(u, Some(xh), 0);
                }
            }
            Problem::SettingC { .. } => {
                for m in sizes(nx + 1, grid.max_aux) {
                    push(ChannelGrid::new(k, vec![Var::X], vec![nx], m), None, m * ny);
                }
            }
            Problem::SettingD => {
                let c = nx * nz;
                for m in sizes(c + 3, grid.max_aux) {
                    for mv in sizes((c + 3) * (c + 1), grid.max_second) {
                        let u = ChannelGrid::new(k, vec![Var::X, Var::Z], vec![nx, nz], m);
                        let v = ChannelGrid::new(
                            k,
                            vec![Var::U, Var::X, Var::Z],
                            vec![m, nx, nz],
                            mv,
                        );
                        push(u, Some(v), m * mv * ny);
                    }
                }
            }
            Problem::CascadeD | Problem::BroadcastD => {
                for m in sizes(nx * nz + 2, grid.max_aux) {
                    let u = ChannelGrid::new(k, vec![Var::X, Var::Z], vec![nx, nz], m);
                    push(u, None, m * ny);
                }
            }
        }
        let total = blocks
            .iter()
            .fold(0u128, |acc, b| acc.saturating_add(b.len));
        if total > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge {
                points: total,
                limit: MAX_GRID_POINTS,
            });
        }
        Ok(Search {
            setting,
            model,
            problem,
            distortion,
            scan_g,
            blocks,
            total: total as u64,
        })
    }

    fn decoder(&self, g_index: u64, cells: usize) -> Decoder {
        match &self.distortion {
            None => Decoder::LogLoss,
            Some(d) if self.scan_g => {
                let base = d.xhat_size() as u64;
                let mut g = vec![0usize; cells];
                let mut i = g_index;
                for slot in g.iter_mut().rev() {
                    *slot = (i % base) as usize;
                    i /= base;
                }
                Decoder::Table {
                    g,
                    distortion: d.clone(),
                }
            }
            Some(d) => Decoder::Argmin(d.clone()),
        }
    }

    /// Channels and decoder of grid point `idx`.
    fn locate(&self, mut idx: u64) -> (AuxChannel, Option<AuxChannel>, Decoder) {
        for b in &self.blocks {
            if (idx as u128) < b.len {
                let n_g = b.n_g as u64;
                let n_v = b.v.as_ref().map_or(1, |v| v.len() as u64);
                let ig = idx % n_g;
                idx /= n_g;
                let iv = idx % n_v;
                let iu = idx / n_v;
                let u = b.u.channel(iu);
                let v = b.v.as_ref().map(|v| v.channel(iv));
                return (u, v, self.decoder(ig, b.g_cells));
            }
            idx -= b.len as u64;
        }
        unreachable!("index within the grid")
    }

    fn corner(&self, idx: u64) -> Result<CornerPoint> {
        let (u, v, dec) = self.locate(idx);
        let m = &self.model;
        match self.problem {
            Problem::ClosedForm => unreachable!("closed form has no grid"),
            Problem::OneSidedLogLoss { d } => one_sided_logloss_corner(m, &u, d),
            Problem::OneSidedInner => one_sided_inner_corner(m, &u, &v.expect("V grid"), &dec),
            Problem::TwoSided => {
                let d = self.distortion.as_ref().expect("distortion matrix");
                two_sided_corner(m, &u, &v.expect("Xhat grid"), d)
            }
            Problem::SettingC { r3, broadcast } => {
                if broadcast {
                    tri_c_bc_corner(m, &u, &dec)
                } else {
                    tri_c_corner(m, &u, &dec, r3)
                }
            }
            Problem::SettingD => tri_d_corner(m, &u, &v.expect("V grid"), &dec),
            Problem::CascadeD => cas_d_corner(m, &u, &dec),
            Problem::BroadcastD => tri_d_bc_corner(m, &u, &dec),
        }
    }

    fn eval(&self, idx: u64) -> Result<Eval> {
        let corner = self.corner(idx)?;
        Ok(Eval {
            key: pareto_key(&corner.point, corner.sum_rate),
            corner,
        })
    }

    fn frontier_point(&self, idx: u64, corner: CornerPoint) -> FrontierPoint {
        let mut channels = corner.achieving.channels;
        if self.setting == SettingId::TwoSided {
            channels.truncate(2);
        }
        FrontierPoint {
            point: corner.point,
            sum_rate: corner.sum_rate,
            witness: Witness {
                index: idx,
                channels,
                g: corner.achieving.g,
            },
        }
    }

    fn chunks(&self) -> usize {
        self.total.div_ceil(CHUNK) as usize
    }

    fn chunk_range(&self, c: usize) -> std::ops::Range<u64> {
        let lo = c as u64 * CHUNK;
        lo..(lo + CHUNK).min(self.total)
    }
}

/// A corner with its Pareto key and grid index.
type Keyed = (Vec<f64>, (u64, CornerPoint));

/// Traces the Pareto frontier of `setting` over the grid.
///
/// Settings A and B have closed-form regions; their "frontier" is the single
/// corner at the objective's D and R3.
pub fn trace_frontier(
    setting: SettingId,
    model: &JointPmf3,
    grid: &GridSpec,
    objective: &Objective,
    exec: Execution,
) -> Result<FrontierCurve> {
    let search = Search::new(setting, model, grid, objective)?;
    if search.problem == Problem::ClosedForm {
        let corner = closed_form_corner(setting, model, objective.d.unwrap_or(0.0), objective.r3)?;
        return Ok(FrontierCurve {
            setting,
            resolution: grid.resolution,
            points: vec![FrontierPoint {
                point: corner.point,
                sum_rate: None,
                witness: Witness {
                    index: 0,
                    channels: vec![],
                    g: None,
                },
            }],
        });
    }
    let locals = exec::map_indexed(exec, search.chunks(), |c| -> Result<Vec<Keyed>> {
        let mut items = Vec::new();
        for idx in search.chunk_range(c) {
            let e = search.eval(idx)?;
            items.push((e.key, (idx, e.corner)));
        }
        Ok(pareto_filter(items))
    });
    let mut merged = Vec::new();
    for local in locals {
        merged.extend(local?);
    }
    let points = pareto_filter(merged)
        .into_iter()
        .map(|(_, (idx, corner))| search.frontier_point(idx, corner))
        .collect();
    Ok(FrontierCurve {
        setting,
        resolution: grid.resolution,
        points,
    })
}

/// Outcome of a membership search.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport {
    pub inside: bool,
    /// Grid resolution, `None` for closed-form or floor-based verdicts.
    pub resolution: Option<usize>,
    pub witness: Option<FrontierPoint>,
    /// Per-constraint slack for closed-form settings, or against the witness.
    pub verdict: Option<Verdict>,
    pub reason: Option<String>,
}

fn admits(corner: &CornerPoint, q: &RdlPoint) -> bool {
    let c = &corner.point;
    let le = |a: f64, b: f64| a <= b + MEMBER_TOL;
    let rates = match corner.sum_rate {
        Some(sum) => le(c.r1, q.r1) && le(sum, q.r1 + q.r2),
        None => le(c.r1, q.r1) && le(c.r2, q.r2),
    };
    let r3 = c.r3.is_none_or(|r| le(r, q.r3.unwrap_or(0.0)));
    rates && r3 && le(c.d, q.d) && le(c.delta, q.delta)
}

fn witness_verdict(corner: &CornerPoint, q: &RdlPoint) -> Verdict {
    let c = &corner.point;
    let mut items = vec![("r1", c.r1, q.r1)];
    match corner.sum_rate {
        Some(sum) => items.push(("r1+r2", sum, q.r1 + q.r2)),
        None => items.push(("r2", c.r2, q.r2)),
    }
    if let Some(r3) = c.r3 {
        items.push(("r3", r3, q.r3.unwrap_or(0.0)));
    }
    items.push(("d", c.d, q.d));
    items.push(("delta", c.delta, q.delta));
    Verdict::from_constraints(&items)
}

/// Searches for a grid corner that weakly dominates `q`.
///
/// An "outside" answer only means no grid point at this resolution works; it
/// is not a converse. Queries below the channel-independent leakage floor
/// `I(X;Z)` are rejected without searching. For logarithmic loss the query's
/// D (and R3) fix the objective.
pub fn membership(
    setting: SettingId,
    model: &JointPmf3,
    q: &RdlPoint,
    grid: &GridSpec,
    distortion: &DistortionSpec,
    exec: Execution,
) -> Result<MembershipReport> {
    q.check()?;
    setting.require_markov(model)?;
    if setting.has_leakage_floor() {
        let i_xz = mutual_info(&model.joint(), &[0], &[2])?;
        if q.delta < i_xz - MEMBER_TOL {
            return Ok(MembershipReport {
                inside: false,
                resolution: None,
                witness: None,
                verdict: Some(Verdict::from_constraints(&[("delta", i_xz, q.delta)])),
                reason: Some(format!("Δ below I(X;Z) floor ({})", fmt_sig(i_xz))),
            });
        }
    }
    if setting.is_closed_form() {
        let v = closed_form_check(setting, model, q)?;
        return Ok(MembershipReport {
            inside: v.member,
            resolution: None,
            witness: None,
            reason: v.reason.clone(),
            verdict: Some(v),
        });
    }
    let objective = Objective {
        distortion: distortion.clone(),
        d: matches!(distortion, DistortionSpec::LogLoss).then_some(q.d),
        r3: Some(q.r3.unwrap_or(0.0)),
    };
    let search = Search::new(setting, model, grid, &objective)?;
    let found = exec::find_map_first(exec, search.chunks(), |c| {
        for idx in search.chunk_range(c) {
            match search.eval(idx) {
                Ok(e) if admits(&e.corner, q) => return Some(Ok((idx, e.corner))),
                Ok(_) => {}
                Err(err) => return Some(Err(err)),
            }
        }
        None
    });
    match found.transpose()? {
        Some((idx, corner)) => {
            let verdict = witness_verdict(&corner, q);
            Ok(MembershipReport {
                inside: true,
                resolution: Some(grid.resolution),
                witness: Some(search.frontier_point(idx, corner)),
                verdict: Some(verdict),
                reason: None,
            })
        }
        None => Ok(MembershipReport {
            inside: false,
            resolution: Some(grid.resolution),
            witness: None,
            verdict: None,
            reason: Some(format!(
                "no grid corner dominates the query at resolution k = {}",
                grid.resolution
            )),
        }),
    }
}

/// Largest discrepancies between the two logarithmic-loss one-sided regions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrosscheckReport {
    /// Gap at the exact erasure probability `p = 1 − D/H(X|U)`.
    pub matched_gap: f64,
    /// Extra R1 needed when `p` is restricted to multiples of `1/k`.
    pub grid_gap: f64,
    /// Number of (U, D) pairs compared.
    pub compared: usize,
}

/// Compares the two-auxiliary inner bound, evaluated with `V = X` kept with
/// probability `p` and erased otherwise, against the single-auxiliary
/// logarithmic-loss region at every grid `U` and every `D` in `d_grid`.
pub fn crosscheck_logloss(
    model: &JointPmf3,
    grid: &GridSpec,
    d_grid: &[f64],
    exec: Execution,
) -> Result<CrosscheckReport> {
    let [nx, ny, _] = model.sizes();
    let mut channels = Vec::new();
    for m in 1..=grid.max_aux.min(ny + 2) {
        let g = ChannelGrid::new(grid.resolution, vec![Var::Y], vec![ny], m);
        if g.len() > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge {
                points: g.len(),
                limit: MAX_GRID_POINTS,
            });
        }
        channels.extend((0..g.len() as u64).map(|i| g.channel(i)));
    }
    let k = grid.resolution as f64;
    let per_u = exec::map_indexed(exec, channels.len(), |i| -> Result<(f64, f64)> {
        let u = &channels[i];
        let mut matched: f64 = 0.0;
        let mut gridded: f64 = 0.0;
        for &d in d_grid {
            let two = one_sided_logloss_corner(model, u, d)?;
            let h = two
                .achieving
                .params
                .iter()
                .find(|(n, _)| *n == "h_x_given_u")
                .map(|p| p.1)
                .expect("corner reports H(X|U)");
            let p_star = if h > d { 1.0 - d / h } else { 0.0 };
            let v = AuxChannel::erasure(Var::X, nx, p_star)?;
            let one = one_sided_inner_corner(model, u, &v, &Decoder::LogLoss)?;
            let gap = (one.point.r1 - two.point.r1)
                .abs()
                .max((one.point.r2 - two.point.r2).abs())
                .max((one.point.delta - two.point.delta).abs())
                .max(one.point.d - d);
            matched = matched.max(gap);
            let p_grid = ((p_star * k - 1e-9).ceil() / k).min(1.0);
            let v = AuxChannel::erasure(Var::X, nx, p_grid)?;
            let one = one_sided_inner_corner(model, u, &v, &Decoder::LogLoss)?;
            gridded = gridded.max(one.point.r1 - two.point.r1);
        }
        Ok((matched, gridded))
    });
    let mut report = CrosscheckReport {
        matched_gap: 0.0,
        grid_gap: 0.0,
        compared: channels.len() * d_grid.len(),
    };
    for r in per_u {
        let (m, g) = r?;
        report.matched_gap = report.matched_gap.max(m);
        report.grid_gap = report.grid_gap.max(g);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{h2, pos};
    use approx::assert_abs_diff_eq;

    #[test]
    fn simplex_counts() {
        for (k, m) in [(1, 1), (8, 2), (8, 3), (16, 3), (5, 4)] {
            let rows = simplex_rows(k, m);
            assert_eq!(rows.len() as u128, simplex_count(k, m));
            for r in &rows {
                assert_abs_diff_eq!(r.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
        assert_eq!(simplex_count(16, 3), 153);
        assert_eq!(simplex_rows(2, 2), vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
    }

    #[test]
    fn channel_grid_order() {
        let g = ChannelGrid::new(1, vec![Var::Y], vec![2], 2);
        assert_eq!(g.len(), 4);
        assert_eq!(g.channel(1).probs(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(g.channel(2).probs(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn pareto_filter_basics() {
        let pts = vec![
            (vec![1.0, 2.0], 'a'),
            (vec![2.0, 1.0], 'b'),
            (vec![2.0, 2.0], 'c'),
            (vec![1.0, 2.0], 'd'),
            (vec![0.5, 3.0], 'e'),
        ];
        let f = pareto_filter(pts);
        let names: Vec<char> = f.iter().map(|p| p.1).collect();
        assert_eq!(names, vec!['e', 'a', 'b']);
        let again = pareto_filter(f.clone());
        assert_eq!(again, f);
    }

    #[test]
    fn constant_u_only() {
        let m = JointPmf3::dsbs_z_eq_y(0.1).unwrap();
        let d = 0.3;
        let f = trace_frontier(
            SettingId::OneSided,
            &m,
            &GridSpec::new(8, 1),
            &Objective::logloss(Some(d)),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(f.points.len(), 1);
        let p = f.points[0].point;
        assert_abs_diff_eq!(p.r1, pos(1.0 - d), epsilon = 1e-14);
        assert_eq!(p.r2, 0.0);
        assert_abs_diff_eq!(p.delta, 1.0 - h2(0.1), epsilon = 1e-14);
    }

    #[test]
    fn frontier_points_reevaluate_exactly() {
        let m = JointPmf3::dsbs_z_eq_y(0.1).unwrap();
        let f = trace_frontier(
            SettingId::OneSided,
            &m,
            &GridSpec::new(4, 3),
            &Objective::logloss(Some(0.2)),
            Execution::Parallel,
        )
        .unwrap();
        assert!(f.points.len() > 1);
        for p in &f.points {
            let c = one_sided_logloss_corner(&m, &p.witness.channels[0], 0.2).unwrap();
            assert_eq!(c.point, p.point);
        }
    }

    #[test]
    fn argmin_matches_table_scan() {
        let m = JointPmf3::dsbs_z_const(0.2).unwrap();
        let obj = Objective::matrix(DistortionMatrix::hamming(2));
        let mut grid = GridSpec::new(2, 2);
        let a = trace_frontier(SettingId::CasC, &m, &grid, &obj, Execution::Sequential).unwrap();
        grid.scan_reconstruction = true;
        let b = trace_frontier(SettingId::CasC, &m, &grid, &obj, Execution::Sequential).unwrap();
        let ka: Vec<RdlPoint> = a.points.iter().map(|p| p.point).collect();
        let kb: Vec<RdlPoint> = b.points.iter().map(|p| p.point).collect();
        assert_eq!(ka, kb);
    }

    #[test]
    fn closed_form_frontier_is_single_corner() {
        let m = JointPmf3::dsbs_z_eq_y(0.1).unwrap();
        let obj = Objective::logloss(Some(0.1)).with_r3(0.05);
        let f = trace_frontier(SettingId::TriA, &m, &GridSpec::default(), &obj, Execution::Sequential)
            .unwrap();
        assert_eq!(f.points.len(), 1);
        assert_abs_diff_eq!(f.points[0].point.r1, h2(0.1) - 0.15, epsilon = 1e-15);
    }

    #[test]
    fn membership_examples() {
        let m = JointPmf3::dsbs_z_eq_y(0.1).unwrap();
        let i_xz = 1.0 - h2(0.1);
        let grid = GridSpec::new(4, 2);
        let q = RdlPoint::new(1.0, 0.0, None, 0.0, i_xz + 0.01).unwrap();
        let r = membership(SettingId::OneSided, &m, &q, &grid, &DistortionSpec::LogLoss, Execution::Parallel)
            .unwrap();
        assert!(r.inside);
        let w = r.witness.unwrap();
        assert_eq!(w.witness.channels[0].aux_size(), 1);

        let q = RdlPoint::new(5.0, 5.0, None, 0.0, i_xz - 0.01).unwrap();
        let r = membership(SettingId::OneSided, &m, &q, &grid, &DistortionSpec::LogLoss, Execution::Parallel)
            .unwrap();
        assert!(!r.inside);
        assert!(r.reason.unwrap().contains("I(X;Z) floor"));

        let f = trace_frontier(
            SettingId::OneSided,
            &m,
            &GridSpec::new(8, 2),
            &Objective::logloss(Some(0.2)),
            Execution::Sequential,
        )
        .unwrap();
        let target = f.points[f.points.len() / 2].point;
        let r = membership(
            SettingId::OneSided,
            &m,
            &target,
            &GridSpec::new(8, 2),
            &DistortionSpec::LogLoss,
            Execution::Sequential,
        )
        .unwrap();
        assert!(r.inside);
        assert!(r.verdict.unwrap().constraints.iter().all(|s| s.slack >= -1e-12));

        let q = RdlPoint::new(0.0, 0.0, None, 0.0, 5.0).unwrap();
        let r = membership(SettingId::OneSided, &m, &q, &grid, &DistortionSpec::LogLoss, Execution::Parallel)
            .unwrap();
        assert!(!r.inside);
        assert!(r.reason.unwrap().contains("resolution"));
    }

    #[test]
    fn crosscheck_constant_slice() {
        let m = JointPmf3::dsbs_z_const(0.1).unwrap();
        let r = crosscheck_logloss(&m, &GridSpec::new(8, 1), &[0.0, 0.3, 2.0], Execution::Sequential)
            .unwrap();
        // (1 − D/H)·H and H − D differ by rounding only.
        assert!(r.matched_gap <= 4.0 * f64::EPSILON, "{}", r.matched_gap);
        assert_eq!(r.compared, 3);
    }

    #[test]
    fn crosscheck_gap_shrinks() {
        let m = JointPmf3::dsbs_z_const(0.1).unwrap();
        let ds = [0.05, 0.2, 0.4];
        let a = crosscheck_logloss(&m, &GridSpec::new(8, 2), &ds, Execution::Parallel).unwrap();
        let b = crosscheck_logloss(&m, &GridSpec::new(16, 2), &ds, Execution::Parallel).unwrap();
        assert!(a.matched_gap <= 1e-9 && b.matched_gap <= 1e-9);
        assert!(b.grid_gap < a.grid_gap);
        assert!(a.grid_gap <= 1.0 / 8.0 + 1e-12);
    }

    #[test]
    fn grid_limit() {
        let m = JointPmf3::with_sizes(3, 3, 1, vec![1.0 / 9.0; 9]).unwrap();
        let err = trace_frontier(
            SettingId::OneSided,
            &m,
            &GridSpec::new(64, 5),
            &Objective::logloss(Some(0.1)),
            Execution::Sequential,
        );
        assert!(matches!(err, Err(Error::GridTooLarge { .. })));
    }
}
