use tmcnot::budget::EfficiencyModel;
use tmcnot::experiment::{run_bell, run_truth_table, BellOptions, Imperfections};
use tmcnot::source::{calibrate_lambda, TmsvModel};
use tmcnot::tmloop::{compile, CompileOptions, SwitchSchedule};
use tmcnot::tomo::{reconstruct, simulate_counts, state_fidelity, DensityMatrix, MeasurementSetting};
use tmcnot::circuit::ralph_cnot;

#[test]
fn bell_outputs_survive_tomography() {
    for label in ["00", "01", "10", "11"] {
        let state = run_bell(label, BellOptions::default(), None).unwrap().state;
        let rho = DensityMatrix::from_pure(&state).unwrap();
        let d = simulate_counts(&rho, &MeasurementSetting::all(), 0, 0).unwrap();
        assert!(state_fidelity(&reconstruct(&d).unwrap(), &state) >= 1.0 - 1e-6, "{label}");
    }
}

#[test]
fn imperfect_truth_table_degrades_with_visibility() {
    let lambda = calibrate_lambda(0.02, 2).unwrap().lambda;
    let at = |v: f64| {
        let imp = Imperfections { source: TmsvModel::new(lambda, v).unwrap(), efficiency: EfficiencyModel::default() };
        run_truth_table(Some(&imp)).unwrap().correct()
    };
    let (hi, lo) = (at(1.0), at(0.9));
    // the control-0 rows never interfere, so only control-1 rows move
    assert!((hi[0] - lo[0]).abs() < 0.01);
    assert!(lo[2] < hi[2] && lo[3] < hi[3]);
}

#[test]
fn schedule_json_roundtrip() {
    let opts = CompileOptions { state_prep: Some((1, 0)), bell_variant: true, separation_round: true, ..Default::default() };
    let s = compile(&ralph_cnot(), &opts).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    let back: SwitchSchedule = serde_json::from_str(&text).unwrap();
    assert_eq!(back.rounds.len(), s.rounds.len());
    assert_eq!(back.rail_map, s.rail_map);
    back.validate().unwrap();
}
