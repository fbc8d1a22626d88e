//! Subcommand implementations. Each returns the bytes for stdout (or the
//! output file) together with an exit code.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rdl_core::exec::Execution;
use rdl_core::frontier::{membership, trace_frontier, GridSpec, Objective};
use rdl_core::measures::mutual_info;
use rdl_core::model::{AuxChannel, ChainOrder, Coord, GaussianChain, JointPmf3, RdlPoint, SourceModel, Var};
use rdl_core::numfmt::{fmt_sig, round_sig};
use rdl_core::regions_discrete::{
    cas_d_corner, closed_form_corner, one_sided_inner_corner, one_sided_logloss_corner, tri_c_bc_corner,
    tri_c_corner, tri_d_bc_corner, tri_d_corner, two_sided_corner, CornerPoint, SettingId, Verdict,
};
use rdl_core::regions_gaussian::{
    dmin_one_sided, gaussian_tri_floors, leakage_range, linspace, one_sided_gaussian_check,
    one_sided_gaussian_corner, tri_a_gaussian_check, tri_b_gaussian_check, AlphaParam,
};
use rdl_core::schemesim::{
    run_one_sided, run_triangular_forwarding, run_triangular_keyed, ForwardingScheme, OneSidedScheme, SimParams,
    TypicalityParam,
};
use serde_json::{json, Map, Value};

use crate::inputs::{discrete, read_channels, read_model, ChannelFile, DistortionArg, SchemeKind, SimConfig};
use crate::{EvalArgs, Fig4Args, FrontierArgs, GridArgs, MemberArgs, SimulateArgs};

/// Output bytes of a command and its exit code.
pub struct Outcome {
    pub output: Vec<u8>,
    pub code: u8,
}

impl Outcome {
    fn ok(output: Vec<u8>) -> Self {
        Outcome { output, code: 0 }
    }

    /// Pretty JSON; `positive = false` (e.g. a non-member verdict) exits 1.
    fn json(value: &Value, positive: bool) -> Self {
        Self::json_code(value, if positive { 0 } else { 1 })
    }

    fn json_code(value: &Value, code: u8) -> Self {
        let mut output = serde_json::to_vec_pretty(value).expect("JSON values serialize");
        output.push(b'\n');
        Outcome { output, code }
    }
}

/// A JSON number rounded to 12 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round_sig(x))
    } else {
        Value::Null
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Rounds every floating-point number inside `v`.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

pub fn validate(path: &Path) -> Result<Outcome> {
    let model = match read_model(path) {
        Ok(m) => m,
        Err(e) => {
            let v = json!({ "valid": false, "error": format!("{e:#}") });
            return Ok(Outcome::json_code(&v, 2));
        }
    };
    let v = match &model {
        SourceModel::Discrete(m) => {
            let mut markov = Map::new();
            for chain in [[Coord::X, Coord::Y, Coord::Z], [Coord::X, Coord::Z, Coord::Y]] {
                let c = m.check_markov(chain);
                markov.insert(
                    format!("{}-{}-{}", chain[0], chain[1], chain[2]),
                    json!({ "pass": c.pass, "max_violation": num(c.max_violation) }),
                );
            }
            json!({
                "valid": true,
                "kind": "discrete",
                "sizes": m.sizes(),
                "i_xz": num(mutual_info(&m.joint(), &[0], &[2])?),
                "markov": markov,
            })
        }
        SourceModel::Gaussian(c) => json!({
            "valid": true,
            "kind": "gaussian",
            "order": c.order().to_string(),
            "var_root": num(c.var_root()),
            "var_n1": num(c.var_n1()),
            "var_n2": num(c.var_n2()),
        }),
    };
    Ok(Outcome::json(&v, true))
}

fn corner_json(setting: SettingId, c: &CornerPoint) -> Value {
    let params: Map<String, Value> = c.achieving.params.iter().map(|(k, v)| (k.to_string(), num(*v))).collect();
    json!({
        "setting": setting.name(),
        "r1": num(c.point.r1),
        "r2": num(c.point.r2),
        "r3": opt_num(c.point.r3),
        "d": num(c.point.d),
        "delta": num(c.point.delta),
        "sum_rate": opt_num(c.sum_rate),
        "params": params,
        "g": c.achieving.g,
    })
}

fn verdict_json(setting: SettingId, v: &Verdict) -> Value {
    json!({
        "setting": setting.name(),
        "member": v.member,
        "constraints": constraints_json(v),
        "reason": v.reason,
    })
}

fn constraints_json(v: &Verdict) -> Value {
    Value::Array(
        v.constraints
            .iter()
            .map(|s| {
                json!({
                    "name": s.name,
                    "floor": num(s.floor),
                    "value": num(s.value),
                    "slack": num(s.slack),
                })
            })
            .collect(),
    )
}

fn private_rate(setting: SettingId, r3: Option<f64>) -> Option<f64> {
    setting.has_private_link().then(|| r3.unwrap_or(0.0))
}

pub fn region_eval(a: &EvalArgs) -> Result<Outcome> {
    let setting: SettingId = a.setting.parse()?;
    let corner = match read_model(&a.model)? {
        SourceModel::Gaussian(c) => return gaussian_eval(setting, &c, a),
        SourceModel::Discrete(m) => {
            let files = match &a.channels {
                Some(p) => read_channels(p)?,
                None => ChannelFile::default(),
            };
            discrete_eval(setting, &m, &files, a)?
        }
    };
    Ok(Outcome::json(&corner_json(setting, &corner), true))
}

fn require_d(d: Option<f64>, setting: SettingId) -> Result<f64> {
    d.ok_or_else(|| anyhow!("--d is required for {setting}"))
}

fn discrete_eval(setting: SettingId, m: &JointPmf3, files: &ChannelFile, a: &EvalArgs) -> Result<CornerPoint> {
    use SettingId::*;
    setting.require_markov(m)?;
    let [nx, ny, nz] = m.sizes();
    let dist = a.distortion()?;
    let build_u = |inputs: Vec<Var>, dims: Vec<usize>| -> Result<AuxChannel> {
        match &files.u {
            Some(spec) => spec.build(m, None, None),
            None => Ok(AuxChannel::constant(inputs, dims)),
        }
    };
    let decoder = || dist.decoder(nx, files.g.as_ref());
    let corner = match setting {
        TriA | CasA | TriABc | TriB | CasB | TriBBc => {
            closed_form_corner(setting, m, require_d(a.d, setting)?, private_rate(setting, a.r3))?
        }
        OneSided => {
            let u = build_u(vec![Var::Y], vec![ny])?;
            match (&files.v, dist.spec(nx)?, a.d) {
                (None, rdl_core::frontier::DistortionSpec::LogLoss, Some(d)) => one_sided_logloss_corner(m, &u, d)?,
                _ => {
                    let v = match &files.v {
                        Some(spec) => spec.build(m, Some(&u), None)?,
                        None => AuxChannel::constant(vec![Var::X], vec![nx]),
                    };
                    one_sided_inner_corner(m, &u, &v, &decoder()?)?
                }
            }
        }
        TwoSided => {
            let u = build_u(vec![Var::Y], vec![ny])?;
            let xhat = files
                .xhat
                .as_ref()
                .ok_or_else(|| anyhow!("two-sided evaluation needs an xhat channel in the channel file"))?
                .build(m, Some(&u), None)?;
            two_sided_corner(m, &u, &xhat, &dist.matrix(nx)?)?
        }
        TriC | CasC | TriCBc => {
            let u = build_u(vec![Var::X], vec![nx])?;
            match setting {
                TriCBc => tri_c_bc_corner(m, &u, &decoder()?)?,
                _ => tri_c_corner(m, &u, &decoder()?, private_rate(setting, a.r3))?,
            }
        }
        TriD | CasD | TriDBc => {
            let u = build_u(vec![Var::X, Var::Z], vec![nx, nz])?;
            match setting {
                TriD => {
                    let v = match &files.v {
                        Some(spec) => spec.build(m, Some(&u), None)?,
                        None => AuxChannel::constant(vec![Var::U, Var::X, Var::Z], vec![u.aux_size(), nx, nz]),
                    };
                    tri_d_corner(m, &u, &v, &decoder()?)?
                }
                CasD => cas_d_corner(m, &u, &decoder()?)?,
                _ => tri_d_bc_corner(m, &u, &decoder()?)?,
            }
        }
    };
    Ok(corner)
}

fn gaussian_eval(setting: SettingId, c: &GaussianChain, a: &EvalArgs) -> Result<Outcome> {
    let d = require_d(a.d, setting)?;
    let v = match setting {
        SettingId::OneSided => {
            let alpha = a.alpha.ok_or_else(|| anyhow!("--alpha is required for the Gaussian one-sided corner"))?;
            corner_json(setting, &one_sided_gaussian_corner(c, AlphaParam::new(alpha)?, d)?)
        }
        SettingId::TriA | SettingId::CasA | SettingId::TriB | SettingId::CasB => {
            let r3 = private_rate(setting, a.r3);
            let f = gaussian_tri_floors(c, d, r3.unwrap_or(0.0))?;
            let keyed = matches!(setting, SettingId::TriB | SettingId::CasB);
            json!({
                "setting": setting.name(),
                "r1": num(f.rate),
                "r2": num(f.rate),
                "r3": opt_num(r3),
                "d": num(d),
                "delta": num(if keyed { f.leakage_b } else { f.leakage_a }),
                "sum_rate": null,
                "params": { "i_xz": num(f.i_xz), "sigma2": num(f.sigma2) },
                "g": null,
            })
        }
        _ => bail!("setting {setting} has no Gaussian evaluator"),
    };
    Ok(Outcome::json(&v, true))
}

fn grid_spec(g: &GridArgs) -> Result<GridSpec> {
    if g.k == 0 {
        bail!("grid resolution --k must be >= 1");
    }
    Ok(GridSpec {
        scan_reconstruction: g.scan_g,
        ..GridSpec::new(g.k, g.max_aux).with_second(g.max_second)
    })
}

pub fn region_member(a: &MemberArgs, exec: Execution) -> Result<Outcome> {
    let setting: SettingId = a.setting.parse()?;
    let q = RdlPoint::new(a.r1, a.r2, private_rate(setting, a.r3), a.d, a.delta)?;
    let v = match read_model(&a.model)? {
        SourceModel::Gaussian(c) => {
            let verdict = gaussian_member(setting, &c, &q)?;
            let mut v = verdict_json(setting, &verdict);
            v["resolution"] = Value::Null;
            v["witness"] = Value::Null;
            v
        }
        SourceModel::Discrete(m) => {
            let grid = grid_spec(&a.grid)?;
            let dist = a.distortion()?.spec(m.size(Coord::X))?;
            let r = membership(setting, &m, &q, &grid, &dist, exec)?;
            json!({
                "setting": setting.name(),
                "member": r.inside,
                "constraints": r.verdict.as_ref().map(constraints_json).unwrap_or(Value::Array(vec![])),
                "reason": r.reason,
                "resolution": r.resolution,
                "witness": r.witness.as_ref().map(|w| w.witness.encode()),
            })
        }
    };
    let member = v["member"].as_bool().unwrap_or(false);
    if let Some(reason) = v["reason"].as_str() {
        eprintln!("{reason}");
    }
    Ok(Outcome::json(&v, member))
}

fn gaussian_member(setting: SettingId, c: &GaussianChain, q: &RdlPoint) -> Result<Verdict> {
    let i_xz = match c.order() {
        ChainOrder::YXZ => leakage_range(c)?.0,
        ChainOrder::XYZ => gaussian_tri_floors(c, q.d, 0.0)?.i_xz,
    };
    if q.delta < i_xz - rdl_core::regions_discrete::MEMBER_TOL {
        let mut v = Verdict::from_constraints(&[("delta", i_xz, q.delta)]);
        v.reason = Some(format!("Δ below I(X;Z) floor ({})", fmt_sig(i_xz)));
        return Ok(v);
    }
    Ok(match setting {
        SettingId::OneSided => one_sided_gaussian_check(c, q)?,
        SettingId::TriA | SettingId::CasA => tri_a_gaussian_check(c, q)?,
        SettingId::TriB | SettingId::CasB => tri_b_gaussian_check(c, q)?,
        _ => bail!("setting {setting} has no Gaussian membership test"),
    })
}

pub fn fig4(a: &Fig4Args) -> Result<Outcome> {
    let chain = match read_model(&a.model)? {
        SourceModel::Gaussian(c) => c,
        SourceModel::Discrete(_) => bail!("fig4 needs a Gaussian model"),
    };
    let (lo, hi) = leakage_range(&chain)?;
    let (dmin, dmax) = (a.delta_min.unwrap_or(lo), a.delta_max.unwrap_or(hi));
    if a.steps == 0 || dmin.partial_cmp(&dmax).is_none_or(|o| o.is_gt()) {
        return Err(crate::UsageError(format!("empty leakage range [{dmin}, {dmax}] with {} steps", a.steps)).into());
    }
    if a.r1.is_empty() || a.r2.is_empty() {
        return Err(crate::UsageError("at least one --r1 and one --r2 value is required".into()).into());
    }
    let deltas = linspace(dmin, dmax, a.steps);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r1", "r2", "delta", "dmin", "branch", "alpha_star"])?;
    let mut meta = Vec::new();
    for &r1 in &a.r1 {
        for &r2 in &a.r2 {
            for &delta in &deltas {
                let d = dmin_one_sided(&chain, r1, r2, delta)?;
                w.write_record([
                    fmt_sig(r1),
                    fmt_sig(r2),
                    fmt_sig(delta),
                    fmt_sig(d.dmin),
                    d.branch.as_str().to_string(),
                    fmt_sig(d.alpha_star),
                ])?;
            }
            let star = rdl_core::regions_gaussian::delta_star(&chain, r2)?;
            meta.push(format!("# delta_star,{},{},{}\n", fmt_sig(r1), fmt_sig(r2), fmt_sig(star)));
        }
    }
    let mut out = w.into_inner().map_err(|e| anyhow!("flushing CSV: {e}"))?;
    for line in meta {
        out.extend_from_slice(line.as_bytes());
    }
    Ok(Outcome::ok(out))
}

pub fn frontier(a: &FrontierArgs, exec: Execution) -> Result<Outcome> {
    let setting: SettingId = a.setting.parse()?;
    let m = discrete(read_model(&a.model)?, "frontier")?;
    let grid = grid_spec(&a.grid)?;
    let objective = Objective {
        distortion: a.distortion()?.spec(m.size(Coord::X))?,
        d: a.d,
        r3: a.r3,
    };
    let curve = trace_frontier(setting, &m, &grid, &objective, exec)?;
    log::info!("{} frontier points at k = {}", curve.points.len(), grid.resolution);
    let mut out = Vec::new();
    curve.write_csv(&mut out)?;
    Ok(Outcome::ok(out))
}

pub fn simulate(a: &SimulateArgs, exec: Execution) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let echo: Value = serde_json::from_str(&text).context("parsing simulation config")?;
    let cfg: SimConfig = serde_json::from_value(echo.clone()).context("parsing simulation config")?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let m = cfg.model(base)?;
    let [nx, ny, _] = m.sizes();
    let distortion = cfg.distortion(nx)?;

    let mut p = SimParams::new(cfg.n, cfg.trials, a.seed);
    p.eps = TypicalityParam::new(cfg.eps.unwrap_or(TypicalityParam::DEFAULT))?;
    p.chunk = cfg.chunk;
    if let Some(bits) = cfg.max_codebook_bits {
        p.max_codebook_bits = bits;
    }
    p.exact_leakage = cfg.exact_leakage;

    enum Built {
        OneSided(OneSidedScheme),
        Forwarding(ForwardingScheme),
        Keyed(ForwardingScheme, rdl_core::schemesim::KeyConfig),
    }
    let built = match cfg.scheme {
        SchemeKind::OneSided => {
            let u = match &cfg.u {
                Some(spec) => spec.build(&m, None, None)?,
                None => AuxChannel::constant(vec![Var::Y], vec![ny]),
            };
            let v = cfg.v.build(&m, Some(&u), None)?;
            Built::OneSided(OneSidedScheme {
                model: m.clone(),
                u,
                v,
                distortion,
                g: cfg.g.clone(),
                r1: cfg.r1,
                r2: cfg.r2.ok_or_else(|| anyhow!("one_sided scheme needs r2"))?,
            })
        }
        SchemeKind::Forwarding | SchemeKind::Keyed => {
            let setting: SettingId = cfg
                .setting
                .as_deref()
                .ok_or_else(|| anyhow!("{:?} scheme needs a setting", cfg.scheme))?
                .parse()?;
            let s = ForwardingScheme {
                setting,
                model: m.clone(),
                v: cfg.v.build(&m, None, None)?,
                distortion,
                g: cfg.g.clone(),
                r1: cfg.r1,
                r3: cfg.r3.unwrap_or(0.0),
            };
            if cfg.scheme == SchemeKind::Keyed {
                Built::Keyed(s, cfg.key.ok_or_else(|| anyhow!("keyed scheme needs a key"))?)
            } else {
                Built::Forwarding(s)
            }
        }
    };

    let mut mode = Map::new();
    mode.insert("scheme".into(), json!(scheme_name(cfg.scheme)));
    mode.insert("exact_leakage".into(), json!(cfg.exact_leakage));
    if cfg.exact_leakage {
        mode.insert("leakage".into(), json!("conditioned on codebook"));
    }
    if let Built::Keyed(_, k) = &built {
        mode.insert("key_mode".into(), serde_json::to_value(k.mode)?);
    }

    let mut out = Map::new();
    out.insert("config".into(), echo);
    out.insert("seed".into(), json!(a.seed));
    out.insert("n".into(), json!(cfg.n));
    out.insert("trials".into(), json!(cfg.trials));
    out.insert("mode".into(), Value::Object(mode));
    if cfg.trials == 0 {
        log::info!("trials = 0: configuration checked, nothing simulated");
        return Ok(Outcome::json(&Value::Object(out), true));
    }

    let report = match &built {
        Built::OneSided(s) => run_one_sided(s, &p, exec)?,
        Built::Forwarding(s) => run_triangular_forwarding(s, &p, exec)?,
        Built::Keyed(s, k) => run_triangular_keyed(s, k, &p, exec)?,
    };
    if report.below_floor {
        log::warn!("rates are below the scheme's floors; decoding may fail");
    }
    if let Value::Object(fields) = round_floats(serde_json::to_value(&report)?) {
        for (k, v) in fields {
            out.entry(k).or_insert(v);
        }
    }
    Ok(Outcome::json(&Value::Object(out), true))
}

fn scheme_name(k: SchemeKind) -> &'static str {
    match k {
        SchemeKind::OneSided => "one_sided",
        SchemeKind::Forwarding => "forwarding",
        SchemeKind::Keyed => "keyed",
    }
}

impl EvalArgs {
    fn distortion(&self) -> Result<DistortionArg> {
        DistortionArg::from_flag(&self.distortion)
    }
}

impl MemberArgs {
    fn distortion(&self) -> Result<DistortionArg> {
        DistortionArg::from_flag(&self.distortion)
    }
}

impl FrontierArgs {
    fn distortion(&self) -> Result<DistortionArg> {
        DistortionArg::from_flag(&self.distortion)
    }
}
