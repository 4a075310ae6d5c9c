//! Fiber-loop time-bin compiler.
//!
//! A photon in the loop occupies a (time bin, polarization) mode. Every
//! round trip the EOM applies `U(θ)` to the polarization of each bin, then
//! one polarization takes the long fiber and arrives one bin later. Seen
//! from the mesh, round `r` is one brick-wall layer: the pair of rails
//! `(t, t+1)` meeting in bin `b` is the advancing polarization (top rail)
//! and the staying polarization of the same bin (bottom rail). After the
//! node the top rail continues in the staying polarization and the bottom
//! rail in the advancing one, so in rail coordinates the EOM acts as the
//! rotation `[[cos θ, sin θ], [−sin θ, cos θ]]`.
//!
//! Real beamsplitters are reflections, not rotations. The compiler keeps a
//! ±1 sign per rail (the frame) and writes each desired 2×2 block as
//! `frame · rotation`; the final frame is part of the schedule and is
//! applied when reading the output rails.

use serde::{Deserialize, Serialize};

use crate::circuit::{bs_unitary, BeamsplitterSpec, Interferometer};
use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix, C64, ONE};

pub const HARDWARE_THETA_MIN: f64 = -35.0;
pub const HARDWARE_THETA_MAX: f64 = 90.0;

/// Rails carrying the two source photons before the first round trip.
pub const SOURCE_RAILS: [usize; 2] = [2, 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode {
    pub bin: usize,
    pub pol: Pol,
}

impl Mode {
    pub fn index(self) -> usize {
        2 * self.bin + self.pol.index()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinShift {
    /// V takes the long fiber.
    #[default]
    VerticalAdvances,
    HorizontalAdvances,
}

impl BinShift {
    pub fn advancing(self) -> Pol {
        match self {
            BinShift::VerticalAdvances => Pol::V,
            BinShift::HorizontalAdvances => Pol::H,
        }
    }

    pub fn staying(self) -> Pol {
        match self {
            BinShift::VerticalAdvances => Pol::H,
            BinShift::HorizontalAdvances => Pol::V,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub delay_ns: f64,
    /// Apply only the first `num_rounds` round trips; all when `None`.
    #[serde(default)]
    pub num_rounds: Option<usize>,
    #[serde(default)]
    pub bin_shift: BinShift,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self { delay_ns: 170.0, num_rounds: None, bin_shift: BinShift::VerticalAdvances }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delay_ns.is_finite() && self.delay_ns > 0.0) {
            return Err(Error::Domain(format!("delay_ns must be positive, got {}", self.delay_ns)));
        }
        Ok(())
    }

    pub fn bin_arrival_ns(&self, bin: usize) -> f64 {
        bin as f64 * self.delay_ns
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundTag {
    Split,
    Prep,
    Gate,
    HadamardVariant,
    Separation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryRole {
    Splitter,
    Hadamard,
    Cross,
    Pass,
}

fn six_decimals<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let r = (x * 1e6).round() / 1e6;
    s.serialize_f64(if r == 0.0 { 0.0 } else { r })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub bin: usize,
    #[serde(serialize_with = "six_decimals")]
    pub theta_deg: f64,
    /// Upper rail of the mesh pair realized by this entry (−1 is padding).
    pub rail: i64,
    pub role: EntryRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub tag: RoundTag,
    pub entries: Vec<ScheduleEntry>,
}

/// Where each mesh rail sits before the first and after the last round,
/// and the sign to apply to each output rail. Rails that cannot hold a
/// photon at injection (state preparation) have no input mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RailMap {
    pub input: Vec<Option<Mode>>,
    pub output: Vec<Mode>,
    pub frame: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchSchedule {
    pub num_bins: usize,
    pub bin_shift: BinShift,
    pub rounds: Vec<Round>,
    pub warnings: Vec<String>,
    pub rail_map: RailMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassPolicy {
    /// Idle pairs are routed by reflection, picking up a σ_z sign.
    #[default]
    Reflect,
    Transparent,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CompileOptions {
    /// Prepend the split and preparation round trips routing the source
    /// pair onto the dual-rail input `(control, target)`.
    pub state_prep: Option<(u8, u8)>,
    pub bell_variant: bool,
    pub separation_round: bool,
    pub pass_policy: PassPolicy,
    pub bin_shift: BinShift,
}

/// `[[sin θ, cos θ], [cos θ, −sin θ]]` on (H, V).
pub fn eom_unitary(theta_deg: f64) -> ComplexMatrix {
    let (s, c) = theta_deg.to_radians().sin_cos();
    ComplexMatrix::from_real(2, 2, &[s, c, c, -s]).expect("finite angle")
}

/// EOM angle reproducing `bs_unitary(r, sign, 0, 0)` on a single bin.
pub fn theta_for_bs(r: f64, sign: i8) -> Result<f64> {
    bs_unitary(r, sign, 0.0, 0.0)?;
    Ok((f64::from(sign) * r.sqrt()).asin().to_degrees())
}

/// Fast-axis angle of a half-wave plate acting as a splitter of reflectivity `r`.
pub fn hwp_angle_deg(r: f64) -> Result<f64> {
    bs_unitary(r, 1, 0.0, 0.0)?;
    Ok(0.5 * r.sqrt().acos().to_degrees())
}

#[derive(Debug, Clone, Copy)]
enum MeshOp {
    Splitter(BeamsplitterSpec),
    Hadamard,
    Cross,
    Pass,
}

impl MeshOp {
    fn role(&self) -> EntryRole {
        match self {
            MeshOp::Splitter(_) => EntryRole::Splitter,
            MeshOp::Hadamard => EntryRole::Hadamard,
            MeshOp::Cross => EntryRole::Cross,
            MeshOp::Pass => EntryRole::Pass,
        }
    }

    fn matrix(&self, policy: PassPolicy) -> Result<[[f64; 2]; 2]> {
        Ok(match self {
            MeshOp::Splitter(e) => {
                let u = e.unitary()?;
                if u.data().iter().any(|z| z.im.abs() > 1e-12) {
                    return Err(Error::Schedule(format!(
                        "splitter on rails ({}, {}) has complex phases; the EOM only realizes real rotations",
                        e.top_rail,
                        e.top_rail + 1
                    )));
                }
                [[u[(0, 0)].re, u[(0, 1)].re], [u[(1, 0)].re, u[(1, 1)].re]]
            }
            MeshOp::Hadamard => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                [[h, h], [h, -h]]
            }
            MeshOp::Cross => [[0.0, 1.0], [1.0, 0.0]],
            MeshOp::Pass => match policy {
                PassPolicy::Reflect => [[1.0, 0.0], [0.0, -1.0]],
                PassPolicy::Transparent => [[1.0, 0.0], [0.0, 1.0]],
            },
        })
    }

    fn mixes(&self) -> bool {
        match self {
            MeshOp::Splitter(e) => e.reflectivity < 1.0,
            MeshOp::Hadamard | MeshOp::Cross => true,
            MeshOp::Pass => false,
        }
    }
}

struct MeshRound {
    tag: RoundTag,
    parity: usize,
    ops: Vec<(i64, MeshOp)>,
}

impl MeshRound {
    fn op_at(&self, t: i64) -> Option<MeshOp> {
        self.ops.iter().find(|(r, _)| *r == t).map(|(_, op)| *op)
    }
}

/// Writes `o` as `diag(d) · rotation(θ)` with θ in [−90°, 90°].
fn decompose(o: [[f64; 2]; 2]) -> (f64, [i8; 2]) {
    let det = o[0][0] * o[1][1] - o[0][1] * o[1][0];
    let mut d = [1i8, 1i8];
    let mut o = o;
    if det < 0.0 {
        d = [1, -1];
        o[1] = [-o[1][0], -o[1][1]];
    }
    let mut theta = o[0][1].atan2(o[0][0]);
    let half = std::f64::consts::FRAC_PI_2;
    if theta > half + 1e-12 {
        theta -= std::f64::consts::PI;
        d = [-d[0], -d[1]];
    } else if theta < -half - 1e-12 {
        theta += std::f64::consts::PI;
        d = [-d[0], -d[1]];
    }
    (theta.to_degrees(), d)
}

fn mesh_rounds(ifm: &Interferometer, opts: &CompileOptions) -> Result<Vec<MeshRound>> {
    let n = ifm.num_rails as i64;
    let mut rounds: Vec<MeshRound> = Vec::new();
    if let Some((c, t)) = opts.state_prep {
        if c > 1 || t > 1 {
            return Err(Error::Domain(format!("state-prep input ({c}, {t}) is not a qubit pair")));
        }
        if n < 5 {
            return Err(Error::Schedule("state preparation needs the six-rail dual-rail layout".into()));
        }
        rounds.push(MeshRound { tag: RoundTag::Split, parity: 0, ops: vec![(2, MeshOp::Pass)] });
        let route_c = if c == 0 { MeshOp::Cross } else { MeshOp::Pass };
        let route_t = if t == 1 { MeshOp::Cross } else { MeshOp::Pass };
        rounds.push(MeshRound { tag: RoundTag::Prep, parity: 1, ops: vec![(1, route_c), (3, route_t)] });
        rounds.push(MeshRound { tag: RoundTag::Prep, parity: 0, ops: vec![] });
    }
    let first_gate = rounds.len();
    for (_, layer) in ifm.layers() {
        let mut groups: [Vec<BeamsplitterSpec>; 2] = [Vec::new(), Vec::new()];
        for e in layer {
            groups[e.top_rail % 2].push(e);
        }
        let mut next = rounds.last().map(|r| 1 - r.parity);
        if let Some(p) = next {
            if groups[p].is_empty() && !groups[1 - p].is_empty() {
                rounds.push(MeshRound { tag: RoundTag::Gate, parity: p, ops: vec![] });
                next = Some(1 - p);
            }
        }
        let p0 = next.unwrap_or(if groups[0].is_empty() { 1 } else { 0 });
        for p in [p0, 1 - p0] {
            if groups[p].is_empty() {
                continue;
            }
            if let Some(last) = rounds.last() {
                if last.parity == p {
                    return Err(Error::Schedule("layer parity bookkeeping failed".into()));
                }
            }
            let ops = groups[p].iter().map(|e| (e.top_rail as i64, MeshOp::Splitter(*e))).collect();
            rounds.push(MeshRound { tag: RoundTag::Gate, parity: p, ops });
        }
    }
    if opts.bell_variant {
        let gate = rounds
            .get_mut(first_gate)
            .ok_or_else(|| Error::Schedule("bell variant needs at least one gate round".into()))?;
        if gate.parity != 1 || n < 3 || gate.ops.iter().any(|(t, _)| (*t - 1).abs() < 2) {
            return Err(Error::Schedule(
                "bell variant needs the control pair (1, 2) free in the first gate round".into(),
            ));
        }
        gate.ops.push((1, MeshOp::Hadamard));
        gate.tag = RoundTag::HadamardVariant;
    }
    if opts.separation_round {
        let parity = rounds.last().map_or(0, |r| 1 - r.parity);
        rounds.push(MeshRound { tag: RoundTag::Separation, parity, ops: vec![] });
    }
    if rounds.is_empty() {
        rounds.push(MeshRound { tag: RoundTag::Gate, parity: 0, ops: vec![] });
    }
    Ok(rounds)
}

/// Translates a layered interferometer into round-trip EOM settings.
pub fn compile(ifm: &Interferometer, opts: &CompileOptions) -> Result<SwitchSchedule> {
    ifm.validate()?;
    let n = ifm.num_rails as i64;
    let rounds = mesh_rounds(ifm, opts)?;
    let q = rounds[0].parity;

    // Rails that may hold a photon; pads at −1 and n never do.
    let mut occupied: Vec<bool> = (0..n).map(|_| opts.state_prep.is_none()).collect();
    if opts.state_prep.is_some() {
        for r in SOURCE_RAILS {
            occupied[r] = true;
        }
    }
    let occ = |occupied: &Vec<bool>, x: i64| x >= 0 && x < n && occupied[x as usize];

    // (round, top rail, op) for every node that receives an entry.
    let mut nodes: Vec<(usize, i64, MeshOp)> = Vec::new();
    for (r, round) in rounds.iter().enumerate() {
        let mut spread = Vec::new();
        let mut t = round.parity as i64 - 2;
        while t < n {
            if t >= -1 {
                let op = round.op_at(t);
                let touched = occ(&occupied, t) || occ(&occupied, t + 1);
                if touched || op.is_some() {
                    let op = op.unwrap_or(MeshOp::Pass);
                    let prep = matches!(round.tag, RoundTag::Split | RoundTag::Prep);
                    if touched && (prep || op.mixes()) {
                        spread.push(t);
                    }
                    nodes.push((r, t, op));
                }
            }
            t += 2;
        }
        for t in spread {
            for x in [t, t + 1] {
                if x >= 0 && x < n {
                    occupied[x as usize] = true;
                }
            }
        }
    }

    let k = nodes.iter().map(|&(r, t, _)| t + r as i64).min().unwrap_or(q as i64);
    let parity_of = |r: usize| ((r + q) % 2) as i64;
    let bin_of = |t: i64, r: usize| -> Result<usize> {
        let twice = t + r as i64 - k;
        if twice < 0 || twice % 2 != 0 {
            return Err(Error::Schedule(format!("rail {t} in round {r} does not land on a bin")));
        }
        Ok((twice / 2) as usize)
    };
    let adv = opts.bin_shift.advancing();
    let stay = opts.bin_shift.staying();
    let mode_before = |x: i64, r: usize| -> Result<Mode> {
        if x.rem_euclid(2) == parity_of(r) {
            Ok(Mode { bin: bin_of(x, r)?, pol: adv })
        } else {
            Ok(Mode { bin: bin_of(x - 1, r)?, pol: stay })
        }
    };

    let flip = match opts.bin_shift {
        BinShift::VerticalAdvances => 1.0,
        BinShift::HorizontalAdvances => -1.0,
    };
    let mut frame: Vec<i8> = vec![1; (n + 2) as usize];
    let mut out_rounds: Vec<Round> =
        rounds.iter().map(|mr| Round { tag: mr.tag, entries: Vec::new() }).collect();
    let mut warnings = Vec::new();
    let mut max_bin = 0usize;
    for &(r, t, op) in &nodes {
        let fi = (t + 1) as usize;
        let m = op.matrix(opts.pass_policy)?;
        let (d0, d1) = (f64::from(frame[fi]), f64::from(frame[fi + 1]));
        let o = [[m[0][0] * d0, m[0][1] * d1], [m[1][0] * d0, m[1][1] * d1]];
        let (theta, d) = decompose(o);
        frame[fi] = d[0];
        frame[fi + 1] = d[1];
        let theta = if theta == 0.0 { 0.0 } else { theta * flip };
        let bin = bin_of(t, r)?;
        max_bin = max_bin.max(bin + 1);
        if !(HARDWARE_THETA_MIN..=HARDWARE_THETA_MAX).contains(&theta) {
            warnings.push(format!(
                "round {r} bin {bin}: theta {theta:.6} deg outside hardware range [{HARDWARE_THETA_MIN}, {HARDWARE_THETA_MAX}]"
            ));
        }
        out_rounds[r].entries.push(ScheduleEntry { bin, theta_deg: theta, rail: t, role: op.role() });
    }
    for round in &mut out_rounds {
        round.entries.sort_by_key(|e| e.bin);
    }

    let last = rounds.len();
    let mut input = Vec::new();
    let mut output = Vec::new();
    for x in 0..n {
        let top = if x.rem_euclid(2) == parity_of(0) { x } else { x - 1 };
        let mi = if nodes.iter().any(|&(r, t, _)| r == 0 && t == top) { Some(mode_before(x, 0)?) } else { None };
        let mo = mode_before(x, last)?;
        max_bin = max_bin.max(mi.map_or(0, |m| m.bin)).max(mo.bin);
        input.push(mi);
        output.push(mo);
    }
    let schedule = SwitchSchedule {
        num_bins: max_bin + 1,
        bin_shift: opts.bin_shift,
        rounds: out_rounds,
        warnings,
        rail_map: RailMap { input, output, frame: frame[1..=n as usize].to_vec() },
    };
    schedule.validate()?;
    Ok(schedule)
}

impl SwitchSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.num_bins == 0 {
            return Err(Error::Schedule("a schedule needs at least one bin".into()));
        }
        for (r, round) in self.rounds.iter().enumerate() {
            let mut seen = vec![false; self.num_bins];
            for e in &round.entries {
                if !e.theta_deg.is_finite() || e.theta_deg.abs() > 90.0 + 1e-9 {
                    return Err(Error::Schedule(format!("round {r}: theta {} outside [-90, 90]", e.theta_deg)));
                }
                if e.bin >= self.num_bins {
                    return Err(Error::Schedule(format!("round {r}: bin {} beyond {} bins", e.bin, self.num_bins)));
                }
                if std::mem::replace(&mut seen[e.bin], true) {
                    return Err(Error::Schedule(format!("round {r}: two entries on bin {}", e.bin)));
                }
            }
        }
        let map = &self.rail_map;
        if map.input.len() != map.output.len() || map.frame.len() != map.input.len() {
            return Err(Error::Schedule("rail map lengths disagree".into()));
        }
        if map.frame.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Schedule("readout frame entries must be +1 or -1".into()));
        }
        let ins: Vec<Mode> = map.input.iter().flatten().copied().collect();
        for side in [&ins, &map.output] {
            let mut idx: Vec<usize> = side.iter().map(|m| m.index()).collect();
            if idx.iter().any(|&i| i >= 2 * self.num_bins) {
                return Err(Error::Schedule("rail map points outside the bin range".into()));
            }
            idx.sort_unstable();
            if idx.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Schedule("rail map is not one-to-one".into()));
            }
        }
        Ok(())
    }

    pub fn num_rails(&self) -> usize {
        self.rail_map.input.len()
    }

    pub fn warning_count(&self) -> usize {
        self.warnings.len()
    }

    /// Every rail has an input mode.
    pub fn is_fully_mapped(&self) -> bool {
        self.rail_map.input.iter().all(Option::is_some)
    }
}

/// Product over round trips of (fiber shift ∘ per-bin EOM rotation) on the
/// `2 × num_bins` (bin, polarization) modes, mode index `2·bin + pol`.
pub fn loop_unitary(schedule: &SwitchSchedule, config: &LoopConfig) -> Result<ComplexMatrix> {
    config.validate()?;
    schedule.validate()?;
    if config.bin_shift != schedule.bin_shift {
        return Err(Error::Schedule("loop configuration uses a different bin-shift convention than the schedule".into()));
    }
    let rounds = match config.num_rounds {
        Some(k) if k > schedule.rounds.len() => {
            return Err(Error::Schedule(format!("{k} rounds requested, schedule has {}", schedule.rounds.len())))
        }
        Some(k) => &schedule.rounds[..k],
        None => &schedule.rounds[..],
    };
    let nb = schedule.num_bins;
    let dim = 2 * nb;
    let adv = schedule.bin_shift.advancing().index();
    let mut total = ComplexMatrix::identity(dim);
    for (r, round) in rounds.iter().enumerate() {
        let mut rot = ComplexMatrix::identity(dim);
        for e in &round.entries {
            if e.bin + 1 >= nb {
                return Err(Error::Schedule(format!("round {r}: shift out of bin {} leaves the padded range", e.bin)));
            }
            rot.set_block(2 * e.bin, &eom_unitary(e.theta_deg));
        }
        let mut shifted = ComplexMatrix::zeros(dim, dim);
        for b in 0..nb {
            for p in 0..2 {
                let to = if p == adv { (b + 1) % nb } else { b };
                for c in 0..dim {
                    shifted[(2 * to + p, c)] = rot[(2 * b + p, c)];
                }
            }
        }
        total = shifted.matmul(&total);
    }
    Ok(total)
}

/// Loop unitary read in mesh coordinates: `frame · U_loop[output, input]`.
/// Columns of rails without an input mode are zero.
pub fn effective_unitary(schedule: &SwitchSchedule, config: &LoopConfig) -> Result<ComplexMatrix> {
    let u = loop_unitary(schedule, config)?;
    let map = &schedule.rail_map;
    let n = map.output.len();
    let mut sub = ComplexMatrix::zeros(n, n);
    for (i, (mo, &s)) in map.output.iter().zip(&map.frame).enumerate() {
        for (j, mi) in map.input.iter().enumerate() {
            if let Some(mi) = mi {
                sub[(i, j)] = u[(mo.index(), mi.index())] * f64::from(s);
            }
        }
    }
    Ok(sub)
}

/// `min_φ max |a − e^{iφ} b|`, with φ taken from the overlap of the two.
pub fn phase_aligned_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let overlap: C64 = a.data().iter().zip(b.data()).map(|(x, y)| x * y.conj()).sum();
    let phase = if overlap.norm() > 1e-300 { overlap / overlap.norm() } else { ONE };
    a.max_abs_diff(&b.scale(phase))
}

/// Largest entrywise deviation between a path unitary and the compiled loop
/// read through the schedule's rail map, up to a global phase.
pub fn equivalence_check(u_path: &ComplexMatrix, schedule: &SwitchSchedule, config: &LoopConfig) -> Result<f64> {
    if u_path.rows() != schedule.num_rails() || !u_path.is_square() {
        return Err(Error::Dimension(format!(
            "path unitary is {}x{} but the schedule maps {} rails",
            u_path.rows(),
            u_path.cols(),
            schedule.num_rails()
        )));
    }
    if !schedule.is_fully_mapped() {
        return Err(Error::Schedule("rail map is not a bijection: some rails have no input mode".into()));
    }
    let eff = effective_unitary(schedule, config)?;
    Ok(phase_aligned_diff(u_path, &eff))
}

/// Diagonal ±1 matrix, handy for frame bookkeeping in tests and pipelines.
pub fn sign_matrix(signs: &[i8]) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(signs.len());
    for (i, &s) in signs.iter().enumerate() {
        m[(i, i)] = if s < 0 { c64(-1.0, 0.0) } else { ONE };
    }
    m
}
