//! End-to-end acceptance checks. Each test prints one PASS/FAIL line on
//! stderr and fails on FAIL.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdl_core::exec::Execution;
use rdl_core::frontier::{crosscheck_logloss, membership, trace_frontier, DistortionSpec, GridSpec, Objective};
use rdl_core::measures::{cond_entropy, logloss_distortion, mutual_info, SoftReconstruction};
use rdl_core::model::{AuxChannel, JointPmf3, RdlPoint, SourceModel, Var};
use rdl_core::regions_discrete::{
    one_sided_inner_corner, tri_a_logloss_floors, tri_b_logloss_floors, Decoder, DistortionMatrix, SettingId,
};
use rdl_core::regions_gaussian::{dmin_one_sided, leakage_range};
use rdl_core::schemesim::{
    exact_leakage_by_law, run_exact_leakage, ForwardingScheme, KeyConfig, KeyMode, Scheme, SimParams,
    TypicalityParam,
};
use rdl_core::Error;
use serde_json::Value;

struct Row {
    r1: f64,
    r2: f64,
    delta: f64,
    dmin: f64,
}

/// Parses `fig4` output into data rows and `(r1, r2) → Δ*` metadata.
fn parse_fig4(text: &str) -> (Vec<Row>, BTreeMap<(u64, u64), f64>) {
    let mut rows = Vec::new();
    let mut stars = BTreeMap::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if let Some(tag) = f[0].strip_prefix("# ") {
            assert_eq!(tag, "delta_star");
            let r1: f64 = f[1].parse().unwrap();
            let r2: f64 = f[2].parse().unwrap();
            stars.insert((r1.to_bits(), r2.to_bits()), f[3].parse().unwrap());
        } else {
            rows.push(Row {
                r1: f[0].parse().unwrap(),
                r2: f[1].parse().unwrap(),
                delta: f[2].parse().unwrap(),
                dmin: f[3].parse().unwrap(),
            });
        }
    }
    (rows, stars)
}

#[test]
fn gaussian_curve_structure() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "g.json", &SourceModel::Gaussian(example_chain()));
    let (lo, hi) = (0.5 * 4.5f64.log2(), 0.5 * 7f64.log2());
    let t = Instant::now();
    let out = rdl(&[
        "fig4",
        "--model",
        path_str(&model),
        "--r1",
        "1,1.25",
        "--r2",
        "0.5,1,1.25",
        "--delta-min",
        &format!("{lo}"),
        "--delta-max",
        &format!("{hi}"),
        "--steps",
        "200",
    ]);
    let secs = t.elapsed().as_secs_f64();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (rows, stars) = parse_fig4(&stdout(&out));
    let r1s = [1.0, 1.25];
    let r2s = [0.5, 1.0, 1.25];
    let mut ok = rows.len() == 6 * 200 && stars.len() == 6;
    let mut worst_rise = 0.0f64;
    let mut worst_flat = 0.0f64;
    let mut worst_star = 0.0f64;
    let mut worst_coincide = 0.0f64;
    let mut worst_sat = 0.0f64;
    let curve = |r1: f64, r2: f64| -> Vec<&Row> { rows.iter().filter(|r| r.r1 == r1 && r.r2 == r2).collect() };
    for &r1 in &r1s {
        for &r2 in &r2s {
            let c = curve(r1, r2);
            ok &= c.len() == 200;
            for w in c.windows(2) {
                worst_rise = worst_rise.max(w[1].dmin - w[0].dmin);
            }
            let star = stars[&(r1.to_bits(), r2.to_bits())];
            let sat = 2f64.powf(-2.0 * r1) * (2f64.powf(-2.0 * r2) * 0.5 + 0.2);
            for r in c.iter().filter(|r| r.delta >= star) {
                worst_flat = worst_flat.max((r.dmin - sat).abs());
            }
            worst_sat = worst_sat.max((c.last().unwrap().dmin - sat).abs());
            let other = stars[&(r1s[0].to_bits(), r2.to_bits())];
            worst_star = worst_star.max((star - other).abs());
        }
        let min_star = r2s
            .iter()
            .map(|r2| stars[&(r1.to_bits(), r2.to_bits())])
            .fold(f64::INFINITY, f64::min);
        let base = curve(r1, r2s[0]);
        for &r2 in &r2s[1..] {
            for (a, b) in base.iter().zip(curve(r1, r2)) {
                if a.delta < min_star {
                    worst_coincide = worst_coincide.max((a.dmin - b.dmin).abs());
                }
            }
        }
    }
    let corner = 2f64.powf(-2.0) * (2f64.powf(-2.5) * 0.5 + 0.2);
    ok &= worst_rise <= 1e-12
        && worst_flat <= 1e-10
        && worst_star <= 1e-9
        && worst_coincide <= 1e-9
        && worst_sat <= 1e-10
        && (corner - 0.07210).abs() < 5e-6
        && secs < 1.0;
    verdict(
        "gaussian_curve_structure",
        ok,
        &format!(
            "rise {worst_rise:e}, flat {worst_flat:e}, Δ* spread {worst_star:e}, \
             below-Δ* spread {worst_coincide:e}, saturation {worst_sat:e}, {secs:.3} s"
        ),
    );
}

#[test]
fn gaussian_leakage_endpoint() {
    let c = example_chain();
    let (lo, _) = leakage_range(&c).unwrap();
    let mut ok = (lo - 0.5 * 4.5f64.log2()).abs() <= 1e-12 && (lo - 1.084963).abs() < 1e-6;
    let mut worst_alpha = 0.0f64;
    let mut worst_d = 0.0f64;
    for r1 in [1.0, 1.25] {
        for r2 in [0.5, 1.0, 1.25] {
            let d = dmin_one_sided(&c, r1, r2, lo).unwrap();
            worst_alpha = worst_alpha.max((d.alpha_star - 1.0).abs());
            worst_d = worst_d.max((d.dmin - 2f64.powf(-2.0 * r1) * 0.7).abs());
            ok &= matches!(dmin_one_sided(&c, r1, r2, lo - 1e-3), Err(Error::Infeasible(_)));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "g.json", &SourceModel::Gaussian(c));
    let below = rdl(&[
        "fig4",
        "--model",
        path_str(&model),
        "--r1",
        "1",
        "--r2",
        "1",
        "--delta-min",
        &format!("{}", lo - 0.01),
        "--delta-max",
        &format!("{lo}"),
        "--steps",
        "2",
    ]);
    ok &= code(&below) == 1 && worst_alpha <= 1e-9 && worst_d <= 1e-10;
    verdict(
        "gaussian_leakage_endpoint",
        ok,
        &format!("Δ = {lo}, |α* − 1| {worst_alpha:e}, D_min error {worst_d:e}, below-floor exit {}", code(&below)),
    );
}

#[test]
fn logloss_posterior_optimal() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst_eq = 0.0f64;
    let mut worst_below = 0.0f64;
    for _ in 0..100 {
        let (nx, ny, nz) = (rng.gen_range(2..=4), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let m = JointPmf3::with_sizes(nx, ny, nz, random_pmf(&mut rng, nx * ny * nz)).unwrap();
        let j = m.joint();
        for ctx in [vec![1], vec![2], vec![1, 2]] {
            let h = cond_entropy(&j, &[0], &ctx).unwrap();
            let post = SoftReconstruction::posterior(&j, 0, &ctx).unwrap();
            worst_eq = worst_eq.max((logloss_distortion(&j, 0, &ctx, &post).unwrap() - h).abs());
            let mut others = vec![post.smoothed(rng.gen_range(0.0..1.0))];
            let rows: Vec<f64> = (0..post.contexts()).flat_map(|_| random_pmf(&mut rng, nx)).collect();
            others.push(SoftReconstruction::new(nx, rows).unwrap());
            for o in &others {
                worst_below = worst_below.max(h - logloss_distortion(&j, 0, &ctx, o).unwrap());
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = worst_eq <= 1e-12 && worst_below <= 1e-12 && secs < 5.0;
    verdict(
        "logloss_posterior_optimal",
        ok,
        &format!("|E loss − H| {worst_eq:e}, worst undercut {worst_below:e}, {secs:.3} s"),
    );
}

fn binary_z_eq_y(rng: &mut ChaCha8Rng) -> JointPmf3 {
    let pxy = random_pmf(rng, 4);
    let mut probs = vec![0.0; 8];
    for x in 0..2 {
        for y in 0..2 {
            probs[(x * 2 + y) * 2 + y] = pxy[x * 2 + y];
        }
    }
    JointPmf3::with_sizes(2, 2, 2, probs).unwrap()
}

#[test]
fn logloss_regions_agree_on_grid() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let d_grid = [0.0, 0.1, 0.25, 0.5];
    let mut worst_gap = 0.0f64;
    let mut undominated = 0;
    for _ in 0..5 {
        let m = binary_z_eq_y(&mut rng);
        let fine = GridSpec::new(16, 3);
        let r = crosscheck_logloss(&m, &fine, &d_grid, Execution::Parallel).unwrap();
        worst_gap = worst_gap.max(r.matched_gap);
        for d in [0.1, 0.3] {
            let obj = Objective::logloss(Some(d));
            let a = trace_frontier(SettingId::OneSided, &m, &GridSpec::new(8, 3), &obj, Execution::Parallel).unwrap();
            let b = trace_frontier(SettingId::OneSided, &m, &fine, &obj, Execution::Parallel).unwrap();
            for p in &a.points {
                let q = p.point;
                let covered = b.points.iter().any(|f| {
                    let r = f.point;
                    r.r1 <= q.r1 + 1e-12 && r.r2 <= q.r2 + 1e-12 && r.d <= q.d + 1e-12 && r.delta <= q.delta + 1e-12
                });
                undominated += usize::from(!covered);
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = worst_gap <= 1e-9 && undominated == 0 && secs < 120.0;
    verdict(
        "logloss_regions_agree_on_grid",
        ok,
        &format!("matched gap {worst_gap:e}, k=8 points not dominated at k=16: {undominated}, {secs:.1} s"),
    );
}

#[test]
fn leakage_floor_rejects_queries() {
    use SettingId::*;
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let mut checked = 0;
    let mut accepted = Vec::new();
    type ModelGen = fn(&mut ChaCha8Rng) -> JointPmf3;
    let plan: [(&[SettingId], ModelGen); 3] = [
        (&[TriA, CasA, TriABc, TriB, CasB, TriBBc], random_xyz),
        (&[TriD, CasD, TriDBc], random_xzy),
        (&[OneSided, TwoSided], random_xyz),
    ];
    for (settings, gen) in plan {
        let mut models = 0;
        while models < 5 {
            let m = gen(&mut rng);
            let i_xz = mutual_info(&m.joint(), &[0], &[2]).unwrap();
            if i_xz < 0.01 {
                continue;
            }
            models += 1;
            for &s in settings {
                let r3 = s.has_private_link().then_some(5.0);
                let q = RdlPoint::new(5.0, 5.0, r3, 5.0, i_xz - 0.01).unwrap();
                let dist = if s == TwoSided {
                    DistortionSpec::Matrix(DistortionMatrix::hamming(m.sizes()[0]))
                } else {
                    DistortionSpec::LogLoss
                };
                let r = membership(s, &m, &q, &GridSpec::new(4, 2), &dist, Execution::Parallel).unwrap();
                checked += 1;
                if r.inside {
                    accepted.push(s.name());
                }
            }
        }
    }
    verdict(
        "leakage_floor_rejects_queries",
        accepted.is_empty(),
        &format!("{checked} queries at Δ = I(X;Z) − 0.01, accepted in {accepted:?}"),
    );
}

/// `H(A | B)` summed directly over the cells of `m`; `a` and `b` pick
/// coordinates out of `(x, y, z)`.
fn h_cond(m: &JointPmf3, a: fn([usize; 3]) -> usize, b: fn([usize; 3]) -> usize) -> f64 {
    let [nx, ny, nz] = m.sizes();
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut marg: BTreeMap<usize, f64> = BTreeMap::new();
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let c = [x, y, z];
                *joint.entry((a(c), b(c))).or_default() += m.p(x, y, z);
                *marg.entry(b(c)).or_default() += m.p(x, y, z);
            }
        }
    }
    joint
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(&(_, bb), &p)| -p * (p / marg[&bb]).log2())
        .sum()
}

#[test]
fn key_lowers_leakage_floor() {
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let mut worst = 0.0f64;
    let mut active = 0;
    let mut models = 0;
    while models < 10 {
        let m = random_xyz(&mut rng);
        let h_y_xz = h_cond(&m, |c| c[1], |c| c[0] * 16 + c[2]);
        if h_y_xz <= 1e-9 {
            continue;
        }
        models += 1;
        let h_x_y = h_cond(&m, |c| c[0], |c| c[1]);
        for (fd, fr) in [(0.2, 0.1), (0.5, 0.3), (0.7, 0.4)] {
            let (d, r3) = (fd * h_x_y, fr * h_x_y);
            let a = tri_a_logloss_floors(&m, d, r3).unwrap();
            let b = tri_b_logloss_floors(&m, d, r3).unwrap();
            let clamp = h_x_y - d - r3;
            let expect = if clamp > 0.0 { h_y_xz.min(clamp) } else { 0.0 };
            if clamp > 0.0 {
                active += 1;
                if b.leakage >= a.leakage {
                    worst = f64::INFINITY;
                }
            }
            worst = worst.max(((a.leakage - b.leakage) - expect).abs());
        }
    }
    verdict(
        "key_lowers_leakage_floor",
        worst <= 1e-12 && active >= 10,
        &format!("{active} active-clamp cases, worst gap error {worst:e}"),
    );
}

fn chain_model() -> JointPmf3 {
    JointPmf3::from_xy_and_z_given_y(2, 2, &[0.4, 0.1, 0.1, 0.4], &[vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap()
}

fn keyed(r1: f64, rate: f64, mode: KeyMode) -> Scheme {
    Scheme::Keyed(
        ForwardingScheme {
            setting: SettingId::TriB,
            model: chain_model(),
            v: AuxChannel::bsc(Var::X, 0.1).unwrap(),
            distortion: DistortionMatrix::hamming(2),
            g: None,
            r1,
            r3: 0.0,
        },
        KeyConfig { rate, seed: 7, mode },
    )
}

#[test]
fn exact_leakage_identities() {
    let m = chain_model();
    let i_xz = mutual_info(&m.joint(), &[0], &[2]).unwrap();
    let params = |seed| SimParams {
        eps: TypicalityParam::new(1.0).unwrap(),
        ..SimParams::new(4, 0, seed)
    };

    let t = Instant::now();
    let e = exact_leakage_by_law(&m, 4, 1, 0, |_, _, out| out.push((0, 1.0))).unwrap();
    let const_err = (e.bits_per_symbol - i_xz).abs();
    let t_const = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let otp = run_exact_leakage(&keyed(0.8, 1.0, KeyMode::ExternalUniform), &params(0)).unwrap();
    let otp_err = (otp.bits_per_symbol - i_xz).abs();
    let otp_ok = otp.key_bits > 0 && otp.keyed_index_uniform() && otp_err <= 1e-12;
    let t_otp = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut chain_ok = true;
    let mut chains = Vec::new();
    for seed in 0..3 {
        let ext = run_exact_leakage(&keyed(0.8, 0.5, KeyMode::ExternalUniform), &params(seed)).unwrap();
        let bin = run_exact_leakage(&keyed(0.8, 0.5, KeyMode::Binned), &params(seed)).unwrap();
        let none = run_exact_leakage(&keyed(0.8, 0.0, KeyMode::Binned), &params(seed)).unwrap();
        chain_ok &= ext.bits_per_symbol <= bin.bits_per_symbol && bin.bits_per_symbol <= none.bits_per_symbol;
        chains.push(format!(
            "{:.6} ≤ {:.6} ≤ {:.6}",
            ext.bits_per_symbol, bin.bits_per_symbol, none.bits_per_symbol
        ));
    }
    let t_chain = t.elapsed().as_secs_f64();

    let ok = const_err <= 1e-12 && otp_ok && chain_ok && t_const < 10.0 && t_otp < 10.0 && t_chain < 10.0;
    verdict(
        "exact_leakage_identities",
        ok,
        &format!(
            "constant encoder error {const_err:e}; keyed index uniform {}, OTP excess {otp_err:e}; \
             orderings {}; {t_const:.2}/{t_otp:.2}/{t_chain:.2} s",
            otp.keyed_index_uniform(),
            chains.join(", ")
        ),
    );
}

#[test]
fn simulated_one_sided_meets_design() {
    let m = JointPmf3::dsbs_z_eq_y(0.1).unwrap();
    let u = AuxChannel::identity(Var::Y, 2);
    let v = AuxChannel::constant(vec![Var::X], vec![2]);
    let corner = one_sided_inner_corner(&m, &u, &v, &Decoder::hamming_argmin(2)).unwrap();
    let (r1, r2) = (corner.point.r1 + 0.15, corner.point.r2 + 0.15);
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "dsbs.json", &dsbs());
    let config = serde_json::json!({
        "scheme": "one_sided",
        "model": model,
        "u": { "inputs": ["y"], "rows": [["1", "0"], ["0", "1"]] },
        "v": { "inputs": ["x"], "rows": [["1"], ["1"]] },
        "distortion": "hamming",
        "r1": r1,
        "r2": r2,
        "n": 256,
        "trials": 200,
        "eps": 1.0,
    });
    let cfg = write(dir.path(), "sim.json", &config.to_string());
    let t = Instant::now();
    let out = rdl(&["simulate", "--config", path_str(&cfg), "--seed", "2024"]);
    let secs = t.elapsed().as_secs_f64();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let dist = rep["distortion_mean"].as_f64().unwrap();
    let err = rep["error_rate"].as_f64().unwrap();
    let target = corner.point.d;
    let ok = (target - 0.1).abs() <= 1e-12 && dist <= target + 0.05 && err <= 0.05 && secs < 120.0;
    verdict(
        "simulated_one_sided_meets_design",
        ok,
        &format!(
            "R = ({r1:.3}, {r2:.3}), D target {target}, mean distortion {dist}, decode success {:.3}, {secs:.2} s",
            1.0 - err
        ),
    );
}

#[test]
fn cli_outputs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let dsbs = write_model(p, "dsbs.json", &dsbs());
    let gauss = write_model(p, "g.json", &SourceModel::Gaussian(example_chain()));
    write_model(p, "chain.json", &SourceModel::Discrete(chain_model()));
    let sim = write(
        p,
        "sim.json",
        r#"{"scheme": "keyed", "setting": "tri-b", "model": "chain.json",
            "v": {"inputs": ["x"], "rows": [["0.9", "0.1"], ["0.1", "0.9"]]},
            "r1": 0.8, "r3": 0.0, "key": {"rate": 0.5, "seed": 7, "mode": "binned"},
            "n": 8, "trials": 30, "eps": 1.0, "chunk": 4, "exact_leakage": true}"#,
    );
    let (d, g, s) = (path_str(&dsbs), path_str(&gauss), path_str(&sim));
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", d],
        vec!["region", "eval", "--model", d, "--setting", "tri-a", "--d", "0.2", "--r3", "0.1"],
        vec!["region", "member", "--model", d, "--setting", "one-sided", "--r1", "0.5", "--r2", "0.5",
             "--d", "0.6", "--delta", "0.8", "--k", "4"],
        vec!["region", "member", "--model", d, "--setting", "tri-a", "--r1", "1", "--r2", "1", "--d", "0.1",
             "--delta", "0.3"],
        vec!["fig4", "--model", g, "--r1", "1,1.25", "--r2", "0.5,1", "--steps", "50"],
        vec!["frontier", "--model", d, "--setting", "one-sided", "--k", "4", "--max-aux", "2", "--max-second", "2",
             "--distortion", "hamming"],
        vec!["simulate", "--config", s, "--seed", "5"],
    ];
    let mut mismatched = Vec::new();
    for cmd in &commands {
        let variants: [&[&str]; 3] = [&[], &["--jobs", "1"], &["--sequential"]];
        let outputs: Vec<Vec<u8>> = variants
            .iter()
            .chain(std::iter::once(&variants[0]))
            .map(|extra| {
                let args: Vec<&str> = cmd.iter().chain(extra.iter()).copied().collect();
                let o = rdl(&args);
                assert!(code(&o) <= 1, "{args:?}: {}", stderr(&o));
                o.stdout
            })
            .collect();
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            mismatched.push(cmd[0]);
        }
    }
    verdict(
        "cli_outputs_are_byte_deterministic",
        mismatched.is_empty(),
        &format!("{} commands, four runs each; differing: {mismatched:?}", commands.len()),
    );
}
