//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tmcnot::budget::{budget_table, compare_reference, EfficiencyModel, REFERENCE_F_MAX, REFERENCE_P_CNOT};
use tmcnot::circuit::{ralph_cnot, synthesize, BeamsplitterSpec, Interferometer};
use tmcnot::experiment::{
    expected_output, gate_fidelity, overlap_sqr, run_bell, run_truth_table, BellOptions, BellState, Imperfections,
    TruthTable, INPUTS, MEASURED_CORRECT,
};
use tmcnot::fock::hom_coincidence;
use tmcnot::source::{calibrate_lambda, TmsvModel};
use tmcnot::tmloop::{compile, equivalence_check, CompileOptions, LoopConfig, PassPolicy};
use tmcnot::tomo::{
    bootstrap_fidelity, reconstruct, simulate_counts, state_fidelity, DensityMatrix, MeasurementSetting, Pauli,
    TomoData,
};
use tmcnot::{c64, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn defaults() -> Imperfections {
    Imperfections {
        source: TmsvModel::new(calibrate_lambda(0.02, 2).unwrap().lambda, 0.98).unwrap(),
        efficiency: EfficiencyModel::default(),
    }
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.2}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn ideal_gate() -> Outcome {
    let t = Instant::now();
    let table = run_truth_table(None).unwrap();
    let mut worst = 0.0f64;
    let mut worst_success = 0.0f64;
    for (i, &(c, tt)) in INPUTS.iter().enumerate() {
        for o in 0..4 {
            let want = if o == expected_output(c, tt) { 1.0 } else { 0.0 };
            worst = worst.max((table.probs[i][o] - want).abs());
        }
        worst_success = worst_success.max((table.success[i] - 1.0 / 9.0).abs());
    }
    let (fast, time) = within(t, Duration::from_secs(1));
    Outcome {
        pass: worst < 1e-10 && worst_success < 1e-10 && fast,
        detail: format!("max table deviation {worst:.1e}, max success deviation {worst_success:.1e}, {time}"),
    }
}

fn random_mesh(rng: &mut ChaCha8Rng) -> Interferometer {
    let n = rng.gen_range(2..=6);
    let layers = rng.gen_range(1..=4);
    let mut elements = Vec::new();
    for layer in 0..layers {
        let mut r = 0;
        while r + 1 < n {
            if rng.gen_bool(0.6) {
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                elements.push(BeamsplitterSpec::new(layer, r, rng.gen_range(0.0..=1.0), sign));
                r += 2;
            } else {
                r += 1;
            }
        }
    }
    Interferometer::new(n, elements).unwrap()
}

fn compiler_soundness() -> Outcome {
    let t = Instant::now();
    let transparent = CompileOptions { pass_policy: PassPolicy::Transparent, ..Default::default() };
    let cfg = LoopConfig::default();
    let gate = ralph_cnot();
    let r = equivalence_check(&synthesize(&gate).unwrap(), &compile(&gate, &transparent).unwrap(), &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = random_mesh(&mut rng);
        let d = equivalence_check(&synthesize(&m).unwrap(), &compile(&m, &transparent).unwrap(), &cfg).unwrap();
        worst = worst.max(d);
    }
    let (fast, time) = within(t, Duration::from_secs(10));
    Outcome {
        pass: r < 1e-9 && worst < 1e-9 && fast,
        detail: format!("C-NOT residual {r:.1e}, worst of 100 random meshes {worst:.1e}, {time}"),
    }
}

fn bell_mapping() -> Outcome {
    let mut worst = 0.0f64;
    for (label, want) in [
        ("00", BellState::PhiMinus),
        ("01", BellState::PsiMinus),
        ("10", BellState::PhiPlus),
        ("11", BellState::PsiPlus),
    ] {
        let r = run_bell(label, BellOptions::default(), None).unwrap();
        worst = worst.max((overlap_sqr(&want.amplitudes(), &r.state) - 1.0).abs());
    }
    let dropped = run_bell("00", BellOptions { drop_sigma_z: true }, None).unwrap();
    let flipped = overlap_sqr(&BellState::PhiPlus.amplitudes(), &dropped.state);
    Outcome {
        pass: worst < 1e-10 && (flipped - 1.0).abs() < 1e-10,
        detail: format!("max fidelity deviation {worst:.1e}; without the reflection phase 00 -> Phi+ with fidelity {flipped:.10}"),
    }
}

fn hom() -> Outcome {
    let mut worst = 0.0f64;
    for v in [0.0, 0.5, 0.98, 1.0] {
        let r = hom_coincidence(v).unwrap();
        worst = worst.max((r.visibility - v).abs()).max((r.coincidence - (1.0 - v) / 2.0).abs());
    }
    Outcome { pass: worst < 1e-10, detail: format!("max deviation {worst:.1e}") }
}

fn error_budget() -> Outcome {
    let t = Instant::now();
    let d = defaults();
    let table = budget_table(&d.source, &d.efficiency).unwrap();
    let n2: Vec<f64> = table.rows.iter().map(|r| r.entry(2, false).unwrap().correct).collect();
    let n2_ok = n2.iter().all(|c| (c - 0.00036).abs() <= 0.00004);
    let p: Vec<f64> = table.rows.iter().map(|r| r.p_cnot).collect();
    let p_ok = p.iter().zip(REFERENCE_P_CNOT).all(|(a, b)| (a - b).abs() <= 0.01);
    let f_ok = (table.f_max - REFERENCE_F_MAX).abs() <= 0.005;
    let disc = compare_reference(&table);
    let off: Vec<String> = disc
        .iter()
        .filter(|x| !x.within_tolerance)
        .map(|x| {
            let tag = format!("{} n={} {} {}", x.input, x.photons, if x.distinguishable { "dist" } else { "indist" }, x.quantity);
            match x.ratio {
                Some(r) => format!("{tag} x{r:.2}"),
                None => format!("{tag} {:.1e} vs 0", x.model),
            }
        })
        .collect();
    let (fast, time) = within(t, Duration::from_secs(120));
    let pct = |v: &[f64]| v.iter().map(|x| format!("{:.1}", 100.0 * x)).collect::<Vec<_>>().join(", ");
    println!(
        "    n=2 indist correct {{{}}} % vs 0.036 % [{}]",
        n2.iter().map(|c| format!("{:.4}", 100.0 * c)).collect::<Vec<_>>().join(", "),
        if n2_ok { "PASS" } else { "FAIL" }
    );
    println!("    P_CNOT {{{}}} % vs {{{}}} % [{}]", pct(&p), pct(&REFERENCE_P_CNOT), if p_ok { "PASS" } else { "FAIL" });
    println!("    F_max {:.2} % vs {:.1} % [{}]", 100.0 * table.f_max, 100.0 * REFERENCE_F_MAX, if f_ok { "PASS" } else { "FAIL" });
    println!("    {} of {} remaining entries outside 30 %: {}", off.len(), disc.len(), off.join("; "));
    Outcome {
        pass: n2_ok && p_ok && f_ok && fast,
        detail: format!("{time}; see breakdown above"),
    }
}

fn gate_fidelity_formula() -> Outcome {
    let mut t = TruthTable { probs: [[0.0; 4]; 4], success: [0.0; 4] };
    for (i, &(c, tt)) in INPUTS.iter().enumerate() {
        t.probs[i][expected_output(c, tt)] = MEASURED_CORRECT[i];
    }
    let f = gate_fidelity(&t);
    Outcome { pass: (f - 0.9383).abs() <= 0.0005, detail: format!("{f:.4}") }
}

fn imperfect_pipeline() -> Outcome {
    let table = run_truth_table(Some(&defaults())).unwrap();
    let f = gate_fidelity(&table);
    let correct = table.correct();
    let diag_ok = correct.iter().all(|p| (0.8..=1.0).contains(p));
    let distinct = correct.iter().zip(MEASURED_CORRECT).any(|(a, b)| (a - b).abs() > 1e-3);
    Outcome {
        pass: (0.92..=0.96).contains(&f) && f <= REFERENCE_F_MAX + 0.005 && diag_ok && distinct,
        detail: format!(
            "gate fidelity {:.2} %, correct outputs {{{}}} %",
            100.0 * f,
            correct.iter().map(|x| format!("{:.2}", 100.0 * x)).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn haar(rng: &mut ChaCha8Rng) -> [C64; 4] {
    let mut v = [c64(0.0, 0.0); 4];
    for a in v.iter_mut() {
        *a = c64(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.map(|a| a / n)
}

fn tomography() -> Outcome {
    let t = Instant::now();
    let all = MeasurementSetting::all();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut states: Vec<[C64; 4]> = BellState::ALL.iter().map(|b| b.amplitudes()).collect();
    states.extend((0..20).map(|_| haar(&mut rng)));
    let mut worst_exact = 1.0f64;
    for psi in &states {
        let d = simulate_counts(&DensityMatrix::from_pure(psi).unwrap(), &all, 0, 0).unwrap();
        worst_exact = worst_exact.min(state_fidelity(&reconstruct(&d).unwrap(), psi));
    }
    let psi = BellState::PsiPlus.amplitudes();
    let rho = DensityMatrix::from_pure(&psi).unwrap();
    let mut fs: Vec<f64> = (0..50)
        .map(|s| state_fidelity(&reconstruct(&simulate_counts(&rho, &all, 1000, s).unwrap()).unwrap(), &psi))
        .collect();
    fs.sort_by(f64::total_cmp);
    let median = 0.5 * (fs[24] + fs[25]);
    let mut physical = true;
    for _ in 0..100 {
        let mut rec = Vec::new();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                for k in 0..4 {
                    rec.push((a, b, k, rng.gen_range(0..30) as f64 + if k == 0 { 1.0 } else { 0.0 }));
                }
            }
        }
        physical &= reconstruct(&TomoData::from_records(&rec).unwrap()).unwrap().validate().is_ok();
    }
    let (fast, time) = within(t, Duration::from_secs(30));
    Outcome {
        pass: worst_exact >= 1.0 - 1e-6 && median >= 0.98 && physical && fast,
        detail: format!("worst exact fidelity {worst_exact:.10}, 1000-shot median {median:.4}, inconsistent counts physical: {physical}, {time}"),
    }
}

fn determinism() -> Outcome {
    let once = || {
        let psi = BellState::PhiMinus.amplitudes();
        let d = simulate_counts(&DensityMatrix::from_pure(&psi).unwrap(), &MeasurementSetting::all(), 500, 42).unwrap();
        let b = bootstrap_fidelity(&d, &psi, 50, 42).unwrap();
        let table = run_truth_table(Some(&defaults())).unwrap();
        serde_json::to_string(&(d, b, table)).unwrap()
    };
    let (a, b) = (once(), once());
    Outcome { pass: a == b, detail: format!("{} bytes, identical: {}", a.len(), a == b) }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("ideal gate oracle", ideal_gate),
        ("compiler soundness", compiler_soundness),
        ("Bell mapping", bell_mapping),
        ("HOM visibility", hom),
        ("error budget reproduction", error_budget),
        ("gate fidelity formula", gate_fidelity_formula),
        ("full imperfect pipeline", imperfect_pipeline),
        ("tomography", tomography),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} {name}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
