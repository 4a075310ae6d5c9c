//! End-to-end pipelines: truth table, gate fidelity and Bell-state runs.

use serde::{Deserialize, Serialize};

use crate::budget::{component_joint, EfficiencyModel};
use crate::circuit::{ralph_cnot, synthesize, CONTROL_RAILS, TARGET_RAILS};
use crate::error::{Error, Result};
use crate::fock::{permanent, Postselection};
use crate::matrix::{c64, ComplexMatrix, C64, ZERO};
use crate::source::{pair_state, TmsvModel};
use crate::tmloop::{compile, effective_unitary, CompileOptions, LoopConfig, PassPolicy, SOURCE_RAILS};

/// Computational inputs `(control, target)` in table order.
pub const INPUTS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Correct-output probabilities measured for inputs 00, 01, 10, 11, in the
/// order the truth-table figure lists them. The caption pairs the last two
/// with the subscripts 11 and 10, which reads as transposed; they are kept
/// in figure order here.
pub const MEASURED_CORRECT: [f64; 4] = [1.0000, 0.9864, 0.9262, 0.8406];

/// Read-out index `2c + t` of the C-NOT image of `(c, t)`.
pub fn expected_output(c: u8, t: u8) -> usize {
    2 * usize::from(c) + usize::from(t ^ c)
}

/// A gate unitary together with where the two source arms enter it.
#[derive(Debug, Clone, PartialEq)]
pub struct GateRoute {
    pub unitary: ComplexMatrix,
    /// Rail of the control arm and of the target arm.
    pub source_rails: Vec<usize>,
    pub control: [usize; 2],
    pub target: [usize; 2],
}

impl GateRoute {
    pub fn postselection(&self) -> Postselection {
        Postselection::dual_rail(self.control, self.target)
    }
}

fn check_input(c: u8, t: u8) -> Result<()> {
    if c > 1 || t > 1 {
        return Err(Error::Domain(format!("input ({c}, {t}) is not a pair of bits")));
    }
    Ok(())
}

/// The fiber loop with state preparation for input `(c, t)`, read in mesh
/// coordinates. The Bell configuration adds the Hadamard and the
/// separation round trip.
pub fn gate_route(c: u8, t: u8, bell: bool, policy: PassPolicy) -> Result<GateRoute> {
    check_input(c, t)?;
    let opts = CompileOptions {
        state_prep: Some((c, t)),
        bell_variant: bell,
        separation_round: bell,
        pass_policy: policy,
        ..Default::default()
    };
    let schedule = compile(&ralph_cnot(), &opts)?;
    Ok(GateRoute {
        unitary: effective_unitary(&schedule, &LoopConfig::default())?,
        source_rails: SOURCE_RAILS.to_vec(),
        control: CONTROL_RAILS,
        target: TARGET_RAILS,
    })
}

/// The bare six-rail mesh with the photons injected on the input rails.
pub fn path_route(c: u8, t: u8) -> Result<GateRoute> {
    check_input(c, t)?;
    Ok(GateRoute {
        unitary: synthesize(&ralph_cnot())?,
        source_rails: vec![CONTROL_RAILS[usize::from(c)], TARGET_RAILS[usize::from(t)]],
        control: CONTROL_RAILS,
        target: TARGET_RAILS,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    #[default]
    Loop,
    Path,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imperfections {
    pub source: TmsvModel,
    pub efficiency: EfficiencyModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    /// `probs[input][output]`, conditional on post-selection.
    pub probs: [[f64; 4]; 4],
    /// Post-selection probability per input (per generation with at least one pair).
    pub success: [f64; 4],
}

impl TruthTable {
    pub fn correct(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, &(c, t)) in INPUTS.iter().enumerate() {
            out[i] = self.probs[i][expected_output(c, t)];
        }
        out
    }
}

fn joint_for(route: &GateRoute, imp: Option<&Imperfections>) -> Result<[f64; 4]> {
    match imp {
        None => component_joint(route, &pair_state(1, 1.0)?, &EfficiencyModel::lossless(), 0.0),
        Some(imp) => {
            imp.source.validate()?;
            let mut joint = [0.0; 4];
            for n in 1..=imp.source.truncation {
                let w = imp.source.conditional_pair_prob(n);
                if w == 0.0 {
                    continue;
                }
                let j = component_joint(route, &pair_state(n, imp.source.v)?, &imp.efficiency, imp.efficiency.readout_flip)?;
                for k in 0..4 {
                    joint[k] += w * j[k];
                }
            }
            Ok(joint)
        }
    }
}

fn normalize(joint: [f64; 4]) -> Result<([f64; 4], f64)> {
    let s: f64 = joint.iter().sum();
    if s <= 0.0 {
        return Err(Error::Domain("no post-selected events".into()));
    }
    Ok((joint.map(|x| x / s), s))
}

pub fn run_truth_table(imperfections: Option<&Imperfections>) -> Result<TruthTable> {
    run_truth_table_via(imperfections, Route::Loop)
}

pub fn run_truth_table_via(imperfections: Option<&Imperfections>, route: Route) -> Result<TruthTable> {
    let mut probs = [[0.0; 4]; 4];
    let mut success = [0.0; 4];
    for (i, &(c, t)) in INPUTS.iter().enumerate() {
        let r = match route {
            Route::Loop => gate_route(c, t, false, PassPolicy::Reflect)?,
            Route::Path => path_route(c, t)?,
        };
        let (row, s) = normalize(joint_for(&r, imperfections)?)?;
        probs[i] = row;
        success[i] = s;
    }
    Ok(TruthTable { probs, success })
}

/// Mean probability of the designated C-NOT output.
pub fn gate_fidelity(table: &TruthTable) -> f64 {
    table.correct().iter().sum::<f64>() / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus];

    /// Amplitudes on |00⟩, |01⟩, |10⟩, |11⟩.
    pub fn amplitudes(self) -> [C64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (p, m) = (c64(h, 0.0), c64(-h, 0.0));
        match self {
            BellState::PhiPlus => [p, ZERO, ZERO, p],
            BellState::PhiMinus => [p, ZERO, ZERO, m],
            BellState::PsiPlus => [ZERO, p, p, ZERO],
            BellState::PsiMinus => [ZERO, p, m, ZERO],
        }
    }

    /// Expected output of the Hadamard-variant gate for input `(c, t)`.
    pub fn for_input(c: u8, t: u8) -> BellState {
        match (c, t) {
            (0, 0) => BellState::PhiMinus,
            (0, 1) => BellState::PsiMinus,
            (1, 0) => BellState::PhiPlus,
            _ => BellState::PsiPlus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "Phi+",
            BellState::PhiMinus => "Phi-",
            BellState::PsiPlus => "Psi+",
            BellState::PsiMinus => "Psi-",
        }
    }
}

/// |⟨a|b⟩|².
pub fn overlap_sqr(a: &[C64; 4], b: &[C64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BellOptions {
    /// Route idle pairs transparently instead of by reflection.
    pub drop_sigma_z: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellRun {
    pub input: String,
    /// Computational-basis probabilities of |00⟩, |01⟩, |10⟩, |11⟩.
    pub pattern: [f64; 4],
    /// Post-selected two-qubit state of the ideal gate.
    pub state: [C64; 4],
    pub target: BellState,
    pub fidelity: f64,
    pub success: f64,
}

pub fn parse_input(label: &str) -> Result<(u8, u8)> {
    match label {
        "00" => Ok((0, 0)),
        "01" => Ok((0, 1)),
        "10" => Ok((1, 0)),
        "11" => Ok((1, 1)),
        _ => Err(Error::Domain(format!("unknown input label {label:?}; expected 00, 01, 10 or 11"))),
    }
}

/// Hadamard-variant run for one input. The state is that of the ideal
/// gate; the pattern includes imperfections when given.
pub fn run_bell(label: &str, opts: BellOptions, imperfections: Option<&Imperfections>) -> Result<BellRun> {
    let (c, t) = parse_input(label)?;
    let policy = if opts.drop_sigma_z { PassPolicy::Transparent } else { PassPolicy::Reflect };
    let route = gate_route(c, t, true, policy)?;
    let u = &route.unitary;
    let mut state = [ZERO; 4];
    for oc in 0..2 {
        for ot in 0..2 {
            let sub = u.select(&[route.control[oc], route.target[ot]], &route.source_rails);
            state[2 * oc + ot] = permanent(&sub)?;
        }
    }
    let success: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    if success <= 0.0 {
        return Err(Error::Domain("Bell configuration never post-selects".into()));
    }
    let norm = success.sqrt();
    let state = state.map(|a| a / norm);
    let pattern = match imperfections {
        None => state.map(|a| a.norm_sqr()),
        Some(_) => normalize(joint_for(&route, imperfections)?)?.0,
    };
    let target = BellState::for_input(c, t);
    Ok(BellRun {
        input: label.to_string(),
        pattern,
        state,
        target,
        fidelity: overlap_sqr(&target.amplitudes(), &state),
        success,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternFidelity {
    pub fidelity: f64,
    /// Either input did not sum to one and was rescaled.
    pub renormalized: bool,
}

/// Classical fidelity `(Σ √(p_i q_i))²`.
pub fn pattern_fidelity(p: &[f64; 4], q: &[f64; 4]) -> Result<PatternFidelity> {
    let mut renormalized = false;
    let mut norm = |v: &[f64; 4]| -> Result<[f64; 4]> {
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Domain("pattern entries must be finite and non-negative".into()));
        }
        let s: f64 = v.iter().sum();
        if s <= 0.0 {
            return Err(Error::Domain("pattern sums to zero".into()));
        }
        if (s - 1.0).abs() > 1e-9 {
            renormalized = true;
        }
        Ok(v.map(|x| x / s))
    };
    let (p, q) = (norm(p)?, norm(q)?);
    let b: f64 = p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(PatternFidelity { fidelity: (b * b).min(1.0), renormalized })
}
