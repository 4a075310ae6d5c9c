//! Multi-photon evolution with partial distinguishability.
//!
//! Every photon lives in a computational mode and carries an internal label
//! (0 for the reference wavepacket, 1 for the orthogonal one). The
//! interferometer acts as `U ⊗ I` on (mode, label), so photons with
//! different labels never interfere.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::bs_unitary;
use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix, C64, ONE, ZERO};

pub const NUM_LABELS: usize = 2;
pub const DEFAULT_TRUNCATION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occupation {
    pub mode: usize,
    pub label: usize,
    pub count: usize,
}

/// Multiset of photons over (mode, label), kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhotonConfiguration {
    occupations: Vec<Occupation>,
}

impl PhotonConfiguration {
    pub fn new(occupations: &[Occupation]) -> Result<Self> {
        let mut photons = Vec::new();
        for o in occupations {
            if o.count == 0 {
                return Err(Error::Domain("occupation counts must be at least 1".into()));
            }
            if o.label >= NUM_LABELS {
                return Err(Error::Domain(format!("internal label {} out of range", o.label)));
            }
            photons.extend(std::iter::repeat_n((o.mode, o.label), o.count));
        }
        Ok(Self::from_photons(&photons))
    }

    /// One entry per photon, `(mode, label)`.
    pub fn from_photons(photons: &[(usize, usize)]) -> Self {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &p in photons {
            *counts.entry(p).or_default() += 1;
        }
        Self {
            occupations: counts.into_iter().map(|((mode, label), count)| Occupation { mode, label, count }).collect(),
        }
    }

    fn from_indices(idx: &[usize]) -> Self {
        let photons: Vec<(usize, usize)> = idx.iter().map(|&i| (i / NUM_LABELS, i % NUM_LABELS)).collect();
        Self::from_photons(&photons)
    }

    pub fn occupations(&self) -> &[Occupation] {
        &self.occupations
    }

    pub fn photon_number(&self) -> usize {
        self.occupations.iter().map(|o| o.count).sum()
    }

    /// Photons per computational mode with labels traced out.
    pub fn mode_counts(&self, num_modes: usize) -> Vec<usize> {
        let mut c = vec![0; num_modes];
        for o in &self.occupations {
            c[o.mode] += o.count;
        }
        c
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.occupations.iter().map(|o| o.mode).max()
    }

    fn indices(&self) -> Vec<usize> {
        self.occupations
            .iter()
            .flat_map(|o| std::iter::repeat_n(o.mode * NUM_LABELS + o.label, o.count))
            .collect()
    }

    fn factorial_product(&self) -> f64 {
        self.occupations.iter().map(|o| factorial(o.count)).product()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Superposition of normalized Fock states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonEnsemble {
    pub terms: Vec<(C64, PhotonConfiguration)>,
}

impl PhotonEnsemble {
    pub fn single(config: PhotonConfiguration) -> Self {
        Self { terms: vec![(ONE, config)] }
    }

    /// Merges repeated configurations.
    pub fn new(terms: Vec<(C64, PhotonConfiguration)>) -> Self {
        let mut merged: BTreeMap<PhotonConfiguration, C64> = BTreeMap::new();
        for (a, c) in terms {
            *merged.entry(c).or_insert(ZERO) += a;
        }
        Self { terms: merged.into_iter().map(|(c, a)| (a, c)).collect() }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(a, _)| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < 1e-10
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize an empty ensemble".into()));
        }
        for (a, _) in &mut self.terms {
            *a /= n;
        }
        Ok(self)
    }

    pub fn max_photon_number(&self) -> usize {
        self.terms.iter().map(|(_, c)| c.photon_number()).max().unwrap_or(0)
    }

    /// Moves mode `i` to `targets[i]`, keeping labels.
    pub fn remap(&self, targets: &[usize]) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (a, c) in &self.terms {
            let mut photons = Vec::new();
            for o in c.occupations() {
                let to = *targets
                    .get(o.mode)
                    .ok_or_else(|| Error::Domain(format!("no target for mode {}", o.mode)))?;
                photons.extend(std::iter::repeat_n((to, o.label), o.count));
            }
            terms.push((*a, PhotonConfiguration::from_photons(&photons)));
        }
        Ok(Self::new(terms))
    }
}

/// Permanent by Ryser's formula with Gray-code subset updates, O(2ⁿ·n).
pub fn permanent(m: &ComplexMatrix) -> Result<C64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("permanent of a {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(ONE);
    }
    if n > 20 {
        return Err(Error::Dimension(format!("permanent of size {n} is too large")));
    }
    let mut row_sums = vec![ZERO; n];
    let mut total = ZERO;
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += m[(i, col)];
            } else {
                *s -= m[(i, col)];
            }
        }
        gray = next;
        let prod: C64 = row_sums.iter().product();
        if next.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    Ok(if n % 2 == 1 { -total } else { total })
}

/// Probabilities over output configurations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeDistribution {
    pub num_modes: usize,
    pub probs: BTreeMap<PhotonConfiguration, f64>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn prob(&self, c: &PhotonConfiguration) -> f64 {
        self.probs.get(c).copied().unwrap_or(0.0)
    }

    /// Probability of a photon-number pattern over computational modes.
    pub fn mode_pattern_prob(&self, counts: &[usize]) -> f64 {
        self.probs.iter().filter(|(c, _)| c.mode_counts(self.num_modes) == counts).map(|(_, p)| p).sum()
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self { num_modes: self.num_modes, probs: self.probs.iter().map(|(c, p)| (c.clone(), p * w)).collect() }
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.num_modes = self.num_modes.max(other.num_modes);
        for (c, p) in &other.probs {
            *self.probs.entry(c.clone()).or_insert(0.0) += p;
        }
    }
}

fn multisets(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, left: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i, left - 1, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, m, &mut Vec::new(), &mut out);
    out
}

pub fn evolve(u: &ComplexMatrix, input: &PhotonEnsemble) -> Result<OutcomeDistribution> {
    evolve_truncated(u, input, DEFAULT_TRUNCATION)
}

/// Output distribution of `input` through `U ⊗ I_labels`.
///
/// `U` only needs orthonormal columns on the modes the input occupies.
pub fn evolve_truncated(u: &ComplexMatrix, input: &PhotonEnsemble, truncation: usize) -> Result<OutcomeDistribution> {
    if !u.is_square() {
        return Err(Error::Dimension("evolution needs a square matrix".into()));
    }
    let m = u.rows();
    let n_max = input.max_photon_number();
    if n_max > truncation {
        return Err(Error::Truncation { found: n_max, limit: truncation });
    }
    let mut used = Vec::new();
    for (_, c) in &input.terms {
        if let Some(top) = c.max_mode() {
            if top >= m {
                return Err(Error::Dimension(format!("input mode {top} outside a {m}-mode unitary")));
            }
        }
        for o in c.occupations() {
            if !used.contains(&o.mode) {
                used.push(o.mode);
            }
        }
    }
    let cols = u.select(&(0..m).collect::<Vec<_>>(), &used);
    if cols.adjoint().matmul(&cols).max_abs_diff(&ComplexMatrix::identity(used.len())) > 1e-9 {
        return Err(Error::Domain("unitary is not isometric on the occupied input modes".into()));
    }

    let full = u.kron(&ComplexMatrix::identity(NUM_LABELS));
    let mut by_n: BTreeMap<usize, Vec<(C64, Vec<usize>, f64)>> = BTreeMap::new();
    for (a, c) in &input.terms {
        by_n.entry(c.photon_number()).or_default().push((*a, c.indices(), c.factorial_product()));
    }
    let mut dist = OutcomeDistribution { num_modes: m, probs: BTreeMap::new() };
    for (n, terms) in by_n {
        for out in multisets(n, m * NUM_LABELS) {
            let out_cfg = PhotonConfiguration::from_indices(&out);
            let out_fact = out_cfg.factorial_product();
            let mut amp = ZERO;
            for (a, idx, in_fact) in &terms {
                let sub = full.select(&out, idx);
                amp += a * permanent(&sub)? / (in_fact * out_fact).sqrt();
            }
            let p = amp.norm_sqr();
            if p > 1e-300 {
                *dist.probs.entry(out_cfg).or_insert(0.0) += p;
            }
        }
    }
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomResult {
    pub coincidence: f64,
    pub visibility: f64,
}

/// Two photons on a 50:50 splitter, one with internal state (√V, √(1−V)).
pub fn hom_coincidence(v: f64) -> Result<HomResult> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("visibility {v} outside [0, 1]")));
    }
    let input = PhotonEnsemble::new(vec![
        (c64(v.sqrt(), 0.0), PhotonConfiguration::from_photons(&[(0, 0), (1, 0)])),
        (c64((1.0 - v).sqrt(), 0.0), PhotonConfiguration::from_photons(&[(0, 1), (1, 0)])),
    ]);
    let dist = evolve(&bs_unitary(0.5, 1, 0.0, 0.0)?, &input)?;
    let coincidence = dist.mode_pattern_prob(&[1, 1]);
    Ok(HomResult { coincidence, visibility: 1.0 - 2.0 * coincidence })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    /// Probability that a logical 1 is read as 0.
    pub readout_flip: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self { efficiency: 1.0, readout_flip: 0.0 }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("efficiency", self.efficiency), ("readout_flip", self.readout_flip)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("{name} {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Probabilities over threshold click patterns, one flag per mode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClickDistribution {
    pub probs: BTreeMap<Vec<bool>, f64>,
}

impl ClickDistribution {
    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }
}

/// Independent per-photon survival `survival × efficiency`, then threshold
/// clicks per computational mode.
pub fn detect(dist: &OutcomeDistribution, detector: &DetectorModel, survival: f64) -> Result<ClickDistribution> {
    detector.validate()?;
    if !(0.0..=1.0).contains(&survival) {
        return Err(Error::Domain(format!("survival {survival} outside [0, 1]")));
    }
    let eta = survival * detector.efficiency;
    let m = dist.num_modes;
    let mut out: BTreeMap<Vec<bool>, f64> = BTreeMap::new();
    for (cfg, &p) in &dist.probs {
        let counts = cfg.mode_counts(m);
        // per mode: probability that at least one photon survives
        let mut partial: Vec<(Vec<bool>, f64)> = vec![(Vec::with_capacity(m), p)];
        for &c in &counts {
            let none = (1.0 - eta).powi(c as i32);
            let mut next = Vec::with_capacity(partial.len() * 2);
            for (pat, q) in partial {
                if c == 0 {
                    let mut a = pat;
                    a.push(false);
                    next.push((a, q));
                    continue;
                }
                let mut a = pat.clone();
                a.push(false);
                next.push((a, q * none));
                let mut b = pat;
                b.push(true);
                next.push((b, q * (1.0 - none)));
            }
            partial = next;
        }
        for (pat, q) in partial {
            if q > 0.0 {
                *out.entry(pat).or_insert(0.0) += q;
            }
        }
    }
    Ok(ClickDistribution { probs: out })
}

/// Probability that exactly `k` of `n` photons survive.
pub fn survival_prob(n: usize, k: usize, eta: f64) -> f64 {
    binomial(n, k) * eta.powi(k as i32) * (1.0 - eta).powi((n - k) as i32)
}

/// Which modes carry the logical qubits and which others are watched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Postselection {
    pub control: [usize; 2],
    pub target: [usize; 2],
    /// Extra modes that must stay dark (e.g. monitored ancillas).
    #[serde(default)]
    pub dark: Vec<usize>,
}

impl Postselection {
    pub fn dual_rail(control: [usize; 2], target: [usize; 2]) -> Self {
        Self { control, target, dark: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostselectResult {
    pub success_probability: f64,
    /// Unnormalized probability of each read-out value `2c + t`.
    pub joint: [f64; 4],
    /// `joint` renormalized; zeros when `empty`.
    pub conditional: [f64; 4],
    pub empty: bool,
}

/// Keeps patterns with one click among the control modes, one among the
/// target modes and none on the dark modes, then applies the 1 → 0 readout
/// flip to each logical value.
pub fn postselect(clicks: &ClickDistribution, rule: &Postselection, readout_flip: f64) -> Result<PostselectResult> {
    if !(0.0..=1.0).contains(&readout_flip) {
        return Err(Error::Domain(format!("readout_flip {readout_flip} outside [0, 1]")));
    }
    let mut joint = [0.0; 4];
    for (pat, &p) in &clicks.probs {
        let get = |i: usize| -> Result<bool> {
            pat.get(i).copied().ok_or_else(|| Error::Domain(format!("mode {i} outside the click pattern")))
        };
        let c = [get(rule.control[0])?, get(rule.control[1])?];
        let t = [get(rule.target[0])?, get(rule.target[1])?];
        let mut dark = false;
        for &d in &rule.dark {
            dark |= get(d)?;
        }
        if dark || c[0] == c[1] || t[0] == t[1] {
            continue;
        }
        let (cv, tv) = (usize::from(c[1]), usize::from(t[1]));
        for (cr, pc) in flips(cv, readout_flip) {
            for (tr, pt) in flips(tv, readout_flip) {
                joint[2 * cr + tr] += p * pc * pt;
            }
        }
    }
    let success: f64 = joint.iter().sum();
    let empty = success <= 0.0;
    let conditional = if empty { [0.0; 4] } else { joint.map(|x| x / success) };
    Ok(PostselectResult { success_probability: success, joint, conditional, empty })
}

fn flips(v: usize, p: f64) -> Vec<(usize, f64)> {
    if v == 1 {
        vec![(1, 1.0 - p), (0, p)]
    } else {
        vec![(0, 1.0)]
    }
}
