//! Acceptance criteria, one line each. Exits non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ftqem::analysis::{
    monotonicity_check, nonft_h_logical_error, pl_upper, ps_lower, sso, threshold,
};
use ftqem::codes::compile_logical;
use ftqem::harness::{
    ideal_distribution, load_circuit, run_grid, scenario, simulate_point, RawOutcome, ScenarioRun,
};
use ftqem::mitigation::pcs::{block_stabilizers, build_pcs_circuit, right_check, PcsOptions};
use ftqem::mitigation::{
    decode_shot, mitigate, mitigate_exact, Band, Decision, DecodePolicy, Strategy,
};
use ftqem::sim::{final_density, run_dm, run_trajectories};
use ftqem::{gate_census, parse_circuit, CodeSpec, Convention, Gate, HadamardMode, NoiseModel};

type Outcome = (bool, String);

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn h_error(d: usize, p: f64) -> f64 {
    let logical = parse_circuit("qubits 1\nclbits 1\nideal h 0\nh 0\nmeasure 0 -> 0").unwrap();
    let code = CodeSpec::Repetition(d);
    let enc = compile_logical(&code, &logical, HadamardMode::NonFT).unwrap();
    let model = NoiseModel::uniform(p)
        .unwrap()
        .with_convention(Convention::MaximallyMixed);
    let dist = run_dm(&enc.physical, &model).unwrap();
    mitigate_exact(
        &dist,
        &enc.classical,
        &code,
        Strategy::DM,
        DecodePolicy::PostSelect,
    )
    .unwrap()
    .logical
    .get("1")
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for p in [0.01, 0.05, 0.1] {
        worst = worst.max((h_error(2, p) - nonft_h_logical_error(p)).abs());
        worst = worst.max((h_error(1, p) - p / 2.0).abs());
    }
    let t = start.elapsed();
    (
        worst <= 1e-9 && t < Duration::from_secs(1),
        format!("max |sim - closed form| = {worst:.1e} (tol 1e-9), {t:.2?} (limit 1 s)"),
    )
}

fn ac2() -> Outcome {
    let n = 10_000;
    let interior = (1..=n).all(|i| {
        let p = i as f64 / (n + 1) as f64;
        nonft_h_logical_error(p) > p / 2.0
    });
    let ends = nonft_h_logical_error(0.0) == 0.0 && nonft_h_logical_error(1.0) == 0.5;
    (
        interior && ends,
        format!("strict excess over p/2 on {n} interior points: {interior}; equality at 0 and 1: {ends}"),
    )
}

fn pcs_gap(payload: &str, model: &NoiseModel) -> f64 {
    let code = CodeSpec::Repetition(2);
    let enc =
        compile_logical(&code, &parse_circuit(payload).unwrap(), HadamardMode::NonFT).unwrap();
    let n = enc.physical.num_qubits();
    let checks: Vec<_> = block_stabilizers(n, &enc.layout, &code)
        .into_iter()
        .map(|l| {
            let r = right_check(&enc.physical, &l).unwrap();
            (l, r)
        })
        .collect();
    let opts = PcsOptions {
        ideal_checks: true,
        ..Default::default()
    };
    let pcs = build_pcs_circuit(&enc, &enc.layout, &checks, opts).unwrap();
    let mut c = pcs.circuit.clone();
    let base = c.num_clbits();
    c.grow_clbits(base + n);
    for q in 0..n {
        c.push(Gate::measure(q, base + q).ideal()).unwrap();
    }
    let mut joint = vec![0.0; 1 << n];
    for (k, p) in &run_dm(&c, model).unwrap().probs {
        let b = k.as_bytes();
        if pcs.check_clbits.iter().all(|&i| b[i] == b'0') {
            let idx: usize = (0..n)
                .filter(|&q| b[base + q] == b'1')
                .map(|q| 1 << q)
                .sum();
            joint[idx] += p;
        }
    }
    let mut rho = final_density(&enc.physical, model).unwrap();
    for (_, r) in &checks {
        rho = rho.project_stabilizer(r);
    }
    joint
        .iter()
        .zip(rho.diagonal())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn ac3() -> Outcome {
    let model = NoiseModel::new(0.05, 0.05).unwrap();
    let id = pcs_gap("qubits 2", &model);
    let cx = pcs_gap("qubits 2\ncx 0 1", &model);
    (
        id.max(cx) <= 1e-12,
        format!("max |PCS - projected| identity {id:.1e}, CX {cx:.1e} (tol 1e-12)"),
    )
}

fn logical_of(run: &ScenarioRun) -> ftqem::Circuit {
    load_circuit(&run.config.circuit).unwrap()
}

fn ac4() -> Outcome {
    let s = scenario("hdw35").unwrap();
    let c = gate_census(&logical_of(&s.runs[0])).unwrap().c();
    let ok = threshold(36) >= 0.01 && 0.01 > threshold(37) && c == 35 && c <= 36;
    (
        ok,
        format!(
            "threshold(36) = {:.6}, threshold(37) = {:.6}, hdw35 c = {c}",
            threshold(36),
            threshold(37)
        ),
    )
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// fig4 SSO per (d, strategy), one entry per seed.
fn fig4_sso(ds: &[usize], strategies: &[Strategy]) -> BTreeMap<(usize, Strategy), Vec<f64>> {
    let base = scenario("fig4").unwrap().runs.remove(0);
    let mut out: BTreeMap<(usize, Strategy), Vec<f64>> = BTreeMap::new();
    for seed in SEEDS {
        let mut cfg = base.config.clone();
        cfg.sweep = Some(ds.to_vec());
        cfg.shots = 100_000;
        cfg.seed = seed;
        for r in run_grid(&cfg, strategies, &[DecodePolicy::PostSelect]).unwrap() {
            out.entry((r.d, r.strategy)).or_default().push(r.sso);
        }
    }
    out
}

fn ac5() -> Outcome {
    let start = Instant::now();
    let data = fig4_sso(&[1, 2, 3], &[Strategy::DM]);
    let t = start.elapsed();
    let stats: Vec<(f64, f64)> = (1..=3)
        .map(|d| mean_se(&data[&(d, Strategy::DM)]))
        .collect();
    let mut ok = t < Duration::from_secs(120);
    let mut detail = String::new();
    for w in stats.windows(2) {
        let ((m0, s0), (m1, s1)) = (w[0], w[1]);
        let z = (m1 - m0) / (s0 * s0 + s1 * s1).sqrt();
        let ratio = (1.0 - m1) / (1.0 - m0);
        ok &= m1 > m0 && ratio < 1.0 && z >= 3.0;
        detail.push_str(&format!("ratio {ratio:.3} at {z:.0} sigma; "));
    }
    let means: Vec<String> = stats.iter().map(|(m, _)| format!("{m:.5}")).collect();
    (
        ok,
        format!(
            "SSO d=1..3 [{}]; {detail}{t:.1?} (limit 120 s)",
            means.join(", ")
        ),
    )
}

fn ac6() -> Outcome {
    let data = fig4_sso(&[2, 3], &Strategy::ALL);
    let mut ok = true;
    let mut detail = vec![];
    for d in [2, 3] {
        let (ss, ss_se) = mean_se(&data[&(d, Strategy::SS)]);
        for other in [Strategy::DM, Strategy::DSM] {
            let (m, se) = mean_se(&data[&(d, other)]);
            let excess = (ss - m) / (ss_se * ss_se + se * se).sqrt().max(f64::MIN_POSITIVE);
            ok &= ss <= m || excess <= 3.0;
            detail.push(format!("d={d} SS {ss:.5} vs {other} {m:.5}"));
        }
    }
    (
        ok,
        format!("{} (SS may exceed by at most 3 sigma)", detail.join(", ")),
    )
}

fn ac7() -> Outcome {
    let base = scenario("fig4").unwrap().runs.remove(0).config;
    let logical = load_circuit(&base.circuit).unwrap();
    let mut ok = true;
    let mut detail = vec![];
    for d in [2, 3, 5] {
        let mut cfg = base.clone();
        cfg.shots = 100_000;
        cfg.seed = 17;
        let code = CodeSpec::Repetition(d);
        let result = |strategy| {
            let point = simulate_point(&cfg, &logical, code, strategy).unwrap();
            let RawOutcome::Sampled(hist) = &point.raw else {
                unreachable!()
            };
            mitigate(
                hist,
                &point.encoded.classical,
                &code,
                strategy,
                DecodePolicy::PostSelect,
            )
            .unwrap()
        };
        let (dm, dsm) = (result(Strategy::DM), result(Strategy::DSM));
        let same = dm.accepted == dsm.accepted
            && dm.total == dsm.total
            && dm.logical_counts == dsm.logical_counts;
        ok &= same;
        detail.push(format!("d={d} accepted {} / {}", dm.accepted, dsm.accepted));
    }
    (ok, detail.join(", "))
}

fn ac8() -> Outcome {
    let mut rng = common::rng(20_240_817);
    let model = NoiseModel::new(0.01, 0.02).unwrap();
    let shots = 100_000u64;
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    let mut outliers = vec![];
    for i in 0..20 {
        let n = 2 + i % 5;
        let c = common::random_clifford(&mut rng, n, 6 + 2 * n);
        let exact = run_dm(&c, &model).unwrap();
        let freq = run_trajectories(&c, &model, shots, i as u64)
            .unwrap()
            .frequencies();
        let keys: std::collections::BTreeSet<&String> =
            exact.probs.keys().chain(freq.probs.keys()).collect();
        for k in keys {
            let p = exact.get(k);
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            let dev = (freq.get(k) - p).abs();
            if dev > 4.0 * sigma + 1e-12 {
                bad += 1;
                outliers.push(format!(
                    "circuit {i} outcome {k}: exact {p:.2e}, sampled {:.2e}",
                    freq.get(k)
                ));
            }
            if sigma > 0.0 {
                worst = worst.max(dev / sigma);
            }
        }
    }
    (
        bad == 0,
        format!(
            "20 circuits, {bad} outcomes beyond 4 sigma, worst {worst:.2} sigma {}",
            outliers.join("; ")
        ),
    )
}

fn ac9() -> Outcome {
    let mut identity: f64 = 0.0;
    for c in [1, 10, 100] {
        for p in [0.01, 0.1] {
            identity =
                identity.max((pl_upper(1, c, 0, p) - (1.0 - (1.0f64 - p).powi(c as i32))).abs());
        }
    }
    let mut decreasing = true;
    for c in [1usize, 10, 36] {
        for h in [0usize, 2] {
            let p = threshold(c) / 2.0;
            let r: Vec<f64> = [1, 3, 5, 7]
                .iter()
                .map(|&d| pl_upper(d, c, h, p) / ps_lower(d, c, h, p))
                .collect();
            decreasing &= r.windows(2).all(|w| w[1] < w[0]);
        }
    }
    let mono = monotonicity_check(50, 50);
    (
        identity <= 1e-12 && decreasing && mono,
        format!("identity gap {identity:.1e} (tol 1e-12), ratio decreasing {decreasing}, monotonicity(50,50) {mono}"),
    )
}

fn ac10() -> Outcome {
    let s = scenario("hdw35").unwrap();
    let sigma = DecodePolicy::Correct {
        band: Band::OneSigma,
    };
    let mut ok = true;
    let mut detail = vec![];
    for run in &s.runs {
        let logical = logical_of(run);
        for d in [3, 5] {
            let code = CodeSpec::Repetition(d);
            let point = simulate_point(&run.config, &logical, code, Strategy::DM).unwrap();
            let RawOutcome::Sampled(hist) = &point.raw else {
                unreachable!()
            };
            let cl = &point.encoded.classical;
            let included = hist.counts.keys().all(|k| {
                match decode_shot(
                    k.as_bytes(),
                    cl,
                    &code,
                    Strategy::DM,
                    DecodePolicy::PostSelect,
                )
                .unwrap()
                {
                    Decision::Accept(l) => {
                        decode_shot(k.as_bytes(), cl, &code, Strategy::DM, sigma).unwrap()
                            == Decision::Accept(l)
                    }
                    Decision::Reject => true,
                }
            });
            let rate = |p| {
                mitigate(hist, cl, &code, Strategy::DM, p)
                    .unwrap()
                    .post_rate
            };
            let (ps, os) = (rate(DecodePolicy::PostSelect), rate(sigma));
            ok &= included && os > ps;
            detail.push(format!(
                "{} d={d}: {os:.4} vs {ps:.4}{}",
                run.config.initial.as_deref().unwrap_or("0"),
                if included { "" } else { " (inclusion broken)" }
            ));
        }
    }
    (
        ok,
        format!("post_rate one-sigma vs postselect: {}", detail.join(", ")),
    )
}

fn ac11() -> Outcome {
    let s = scenario("fig5").unwrap();
    let steane = s
        .runs
        .iter()
        .find(|r| r.config.code == CodeSpec::Steane)
        .unwrap();
    let logical = logical_of(steane);
    let enc = compile_logical(&CodeSpec::Steane, &logical, HadamardMode::FTGadget).unwrap();
    let dist = run_dm(&enc.physical, &NoiseModel::noiseless()).unwrap();
    let m = mitigate_exact(
        &dist,
        &enc.classical,
        &CodeSpec::Steane,
        Strategy::DM,
        DecodePolicy::PostSelect,
    )
    .unwrap();
    let marked = m.logical.get("11");
    let rec = run_grid(&steane.config, &[Strategy::DM], &[DecodePolicy::PostSelect]).unwrap();
    let noisy = rec[0].sso;
    let ideal = ideal_distribution(&logical, None).unwrap();
    let self_check = sso(&ideal, &m.logical).unwrap();
    (
        (marked - 1.0).abs() <= 1e-12 && noisy >= 0.99 && (self_check - 1.0).abs() <= 1e-12,
        format!("noiseless P(11) = {marked:.15}, noisy DM SSO = {noisy:.5} (min 0.99)"),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("AC-1", "non-FT Hadamard closed form", ac1),
        ("AC-2", "non-FT Hadamard gives no benefit", ac2),
        ("AC-3", "check sandwich equals end detection", ac3),
        ("AC-4", "threshold margin", ac4),
        ("AC-5", "concatenation suppression", ac5),
        ("AC-6", "SS performs worst", ac6),
        ("AC-7", "DM/DSM equivalence", ac7),
        ("AC-8", "backend agreement", ac8),
        ("AC-9", "bound numerics", ac9),
        ("AC-10", "correction trade-off", ac10),
        ("AC-11", "Steane Grover", ac11),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let (pass, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        failed += usize::from(!pass);
        println!(
            "{id:<6} {} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
