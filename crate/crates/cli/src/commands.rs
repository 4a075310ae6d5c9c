use std::path::Path;

use serde::Serialize;
use tmcnot::budget::{
    budget_table, compare_reference, Discrepancy, EfficiencyModel, REFERENCE_F_MAX, REFERENCE_P_CNOT,
};
use tmcnot::circuit::{ralph_cnot, synthesize};
use tmcnot::experiment::{
    expected_output, gate_fidelity, parse_input, pattern_fidelity, run_bell, run_truth_table_via, BellOptions,
    BellRun, BellState, Imperfections, Route, TruthTable, INPUTS, MEASURED_CORRECT,
};
use tmcnot::fock::hom_coincidence;
use tmcnot::source::TmsvModel;
use tmcnot::tmloop::{compile as compile_schedule, equivalence_check, CompileOptions, LoopConfig, PassPolicy};
use tmcnot::tomo::{
    bootstrap_fidelity, reconstruct, simulate_counts, state_fidelity, DensityMatrix, FidelityInterval,
    MeasurementSetting, Pauli, TomoData,
};

use crate::config::{Format, RunConfig};
use crate::CliError;

const OUTCOMES: [&str; 4] = ["00", "01", "10", "11"];

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_body(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn imperfections(cfg: &RunConfig, ideal: bool) -> Result<Option<Imperfections>, CliError> {
    if ideal {
        Ok(None)
    } else {
        Ok(Some(cfg.imperfections()?))
    }
}

#[derive(Serialize)]
struct CompileOut {
    schedule: tmcnot::tmloop::SwitchSchedule,
    /// Residual against the mesh, when the schedule realizes it directly.
    equivalence_residual: Option<f64>,
}

pub fn compile(
    cfg: &RunConfig,
    input: Option<&str>,
    bell: bool,
    separation: bool,
    transparent: bool,
) -> Result<String, CliError> {
    let state_prep = input.map(parse_input).transpose()?;
    let opts = CompileOptions {
        state_prep,
        bell_variant: bell || cfg.schedule.bell_variant,
        separation_round: separation || cfg.schedule.separation_round,
        pass_policy: if transparent { PassPolicy::Transparent } else { PassPolicy::Reflect },
        ..Default::default()
    };
    if opts.bell_variant && opts.state_prep.is_none() {
        return Err(CliError::Validation("the Hadamard variant needs --input".into()));
    }
    let ifm = ralph_cnot();
    let schedule = compile_schedule(&ifm, &opts)?;
    let equivalence_residual = if opts.state_prep.is_none() && opts.pass_policy == PassPolicy::Transparent {
        Some(equivalence_check(&synthesize(&ifm)?, &schedule, &LoopConfig::default())?)
    } else {
        None
    };
    match cfg.output.format {
        Format::Json => json(&CompileOut { schedule, equivalence_residual }),
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, r) in schedule.rounds.iter().enumerate() {
                let tag = serde_json::to_value(r.tag).map_err(|e| CliError::Validation(e.to_string()))?;
                for e in &r.entries {
                    let role = serde_json::to_value(e.role).map_err(|e| CliError::Validation(e.to_string()))?;
                    rows.push(vec![
                        i.to_string(),
                        tag.as_str().unwrap_or_default().to_string(),
                        e.bin.to_string(),
                        format!("{:.6}", e.theta_deg),
                        e.rail.to_string(),
                        role.as_str().unwrap_or_default().to_string(),
                    ]);
                }
            }
            csv_body(&["round", "tag", "bin", "theta_deg", "rail", "role"], rows)
        }
    }
}

#[derive(Serialize)]
struct SimulateOut {
    input: String,
    route: Route,
    expected_output: String,
    probs: [f64; 4],
    success: f64,
}

pub fn simulate(cfg: &RunConfig, ideal: bool, input: &str, path: bool) -> Result<String, CliError> {
    let (c, t) = parse_input(input)?;
    let route = if path { Route::Path } else { Route::Loop };
    let table = run_truth_table_via(imperfections(cfg, ideal)?.as_ref(), route)?;
    let i = INPUTS.iter().position(|&x| x == (c, t)).expect("input in table");
    let out = SimulateOut {
        input: input.to_string(),
        route,
        expected_output: OUTCOMES[expected_output(c, t)].to_string(),
        probs: table.probs[i],
        success: table.success[i],
    };
    match cfg.output.format {
        Format::Json => json(&out),
        Format::Csv => csv_body(
            &["input", "output", "probability"],
            (0..4).map(|k| vec![input.to_string(), OUTCOMES[k].to_string(), out.probs[k].to_string()]).collect(),
        ),
    }
}

#[derive(Serialize)]
struct TruthTableOut {
    ideal: bool,
    table: TruthTable,
    correct: [f64; 4],
    gate_fidelity: f64,
    measured_correct: [f64; 4],
    measured_gate_fidelity: f64,
}

pub fn truth_table(cfg: &RunConfig, ideal: bool) -> Result<String, CliError> {
    let table = run_truth_table_via(imperfections(cfg, ideal)?.as_ref(), Route::Loop)?;
    match cfg.output.format {
        Format::Json => {
            let measured = TruthTable { probs: [[0.0; 4]; 4], success: [0.0; 4] };
            let mut m = measured.clone();
            for (i, &(c, t)) in INPUTS.iter().enumerate() {
                m.probs[i][expected_output(c, t)] = MEASURED_CORRECT[i];
            }
            json(&TruthTableOut {
                ideal,
                correct: table.correct(),
                gate_fidelity: gate_fidelity(&table),
                table,
                measured_correct: MEASURED_CORRECT,
                measured_gate_fidelity: gate_fidelity(&m),
            })
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, row) in table.probs.iter().enumerate() {
                for (k, p) in row.iter().enumerate() {
                    rows.push(vec![OUTCOMES[i].to_string(), OUTCOMES[k].to_string(), p.to_string()]);
                }
            }
            csv_body(&["input", "output", "probability"], rows)
        }
    }
}

#[derive(Serialize)]
struct BellOut {
    run: BellRun,
    /// Classical fidelity of the pattern to the ideal one.
    pattern_fidelity: f64,
}

pub fn bell(cfg: &RunConfig, ideal: bool, input: Option<&str>, drop_sigma_z: bool) -> Result<String, CliError> {
    let labels: Vec<&str> = match input {
        Some(l) => vec![l],
        None => OUTCOMES.to_vec(),
    };
    let imp = imperfections(cfg, ideal)?;
    let opts = BellOptions { drop_sigma_z };
    let mut runs = Vec::new();
    for l in labels {
        let run = run_bell(l, opts, imp.as_ref())?;
        let ideal_pattern = run.target.amplitudes().map(|a| a.norm_sqr());
        let pf = pattern_fidelity(&run.pattern, &ideal_pattern)?;
        if pf.renormalized {
            eprintln!("warning: pattern for {l} renormalized");
        }
        runs.push(BellOut { run, pattern_fidelity: pf.fidelity });
    }
    match cfg.output.format {
        Format::Json => json(&runs),
        Format::Csv => {
            let mut rows = Vec::new();
            for r in &runs {
                for k in 0..4 {
                    rows.push(vec![
                        r.run.input.clone(),
                        r.run.target.name().to_string(),
                        OUTCOMES[k].to_string(),
                        r.run.pattern[k].to_string(),
                    ]);
                }
            }
            csv_body(&["input", "target", "outcome", "probability"], rows)
        }
    }
}

fn read_counts(path: &Path) -> Result<TomoData, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let bad = |what: &str| CliError::Validation(format!("{} record {}: bad {what}", path.display(), line + 1));
        if rec.len() != 4 {
            return Err(bad("column count"));
        }
        let a = Pauli::parse(&rec[0]).map_err(|_| bad("setting_a"))?;
        let b = Pauli::parse(&rec[1]).map_err(|_| bad("setting_b"))?;
        let k = OUTCOMES.iter().position(|o| *o == rec[2].trim()).ok_or_else(|| bad("outcome"))?;
        let n: f64 = rec[3].trim().parse().map_err(|_| bad("count"))?;
        records.push((a, b, k, n));
    }
    Ok(TomoData::from_records(&records)?)
}

#[derive(Serialize)]
struct Rho {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct TomoOut {
    input: String,
    target: BellState,
    shots: Option<u64>,
    seed: u64,
    rho: Rho,
    fidelity: f64,
    interval: Option<FidelityInterval>,
}

pub fn tomo(cfg: &RunConfig, ideal: bool, input: &str, counts: Option<&Path>) -> Result<String, CliError> {
    let (c, t) = parse_input(input)?;
    let target = BellState::for_input(c, t);
    let psi = target.amplitudes();
    let seed = cfg.tomography.seed;
    let (data, shots) = match counts {
        Some(p) => (read_counts(p)?, None),
        None => {
            let shots = if ideal { 0 } else { cfg.tomography.shots };
            let state = run_bell(input, BellOptions::default(), None)?.state;
            let rho = DensityMatrix::from_pure(&state)?;
            (simulate_counts(&rho, &MeasurementSetting::all(), shots, seed)?, Some(shots))
        }
    };
    if cfg.output.format == Format::Csv {
        let mut rows = Vec::new();
        for s in &data.settings {
            for k in 0..4 {
                rows.push(vec![
                    format!("{:?}", s.setting.labels.0),
                    format!("{:?}", s.setting.labels.1),
                    OUTCOMES[k].to_string(),
                    s.counts[k].to_string(),
                ]);
            }
        }
        return csv_body(&["setting_a", "setting_b", "outcome", "count"], rows);
    }
    let rho = reconstruct(&data)?;
    let m = rho.matrix();
    let grid = |f: &dyn Fn(usize, usize) -> f64| (0..4).map(|r| (0..4).map(|c| f(r, c)).collect()).collect();
    let interval = if data.sampled {
        Some(bootstrap_fidelity(&data, &psi, cfg.tomography.resamples, seed)?)
    } else {
        None
    };
    json(&TomoOut {
        input: input.to_string(),
        target,
        shots,
        seed,
        rho: Rho { re: grid(&|r, c| m[(r, c)].re), im: grid(&|r, c| m[(r, c)].im) },
        fidelity: state_fidelity(&rho, &psi),
        interval,
    })
}

#[derive(Serialize)]
struct BudgetOut {
    lambda: f64,
    v: f64,
    p_cnot: Vec<f64>,
    f_max: f64,
    table: tmcnot::budget::BudgetTable,
    reference_p_cnot: [f64; 4],
    reference_f_max: f64,
    discrepancies: Vec<Discrepancy>,
}

pub fn error_budget(cfg: &RunConfig, ideal: bool) -> Result<String, CliError> {
    let (source, eff) = if ideal {
        let mut s = TmsvModel::new(cfg.source_model()?.lambda, 1.0)?;
        s.truncation = 1;
        (s, EfficiencyModel { readout_flip: 0.0, ..cfg.efficiency_model() })
    } else {
        (cfg.source_model()?, cfg.efficiency_model())
    };
    let table = budget_table(&source, &eff)?;
    match cfg.output.format {
        Format::Json => json(&BudgetOut {
            lambda: source.lambda,
            v: source.v,
            p_cnot: table.rows.iter().map(|r| r.p_cnot).collect(),
            f_max: table.f_max,
            discrepancies: compare_reference(&table),
            table,
            reference_p_cnot: REFERENCE_P_CNOT,
            reference_f_max: REFERENCE_F_MAX,
        }),
        Format::Csv => {
            let mut rows = Vec::new();
            for r in &table.rows {
                for e in &r.entries {
                    rows.push(vec![
                        r.input.clone(),
                        e.photons.to_string(),
                        e.distinguishable.to_string(),
                        e.correct.to_string(),
                        e.error.to_string(),
                    ]);
                }
            }
            csv_body(&["input", "n", "dist", "correct", "error"], rows)
        }
    }
}

pub fn hom(cfg: &RunConfig, ideal: bool) -> Result<String, CliError> {
    let v = if ideal { 1.0 } else { cfg.source.v };
    let r = hom_coincidence(v)?;
    match cfg.output.format {
        Format::Json => json(&r),
        Format::Csv => {
            csv_body(&["visibility", "coincidence"], vec![vec![r.visibility.to_string(), r.coincidence.to_string()]])
        }
    }
}
