//! Two-mode squeezed vacuum pair source.
//!
//! The control arm carries `√V â† + √(1−V) b̂†` (label 0 and 1), the target
//! arm is the reference `â†`. Source mode 0 is the control arm, mode 1 the
//! target arm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{PhotonConfiguration, PhotonEnsemble};
use crate::matrix::c64;

pub const CONTROL_ARM: usize = 0;
pub const TARGET_ARM: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmsvModel {
    pub lambda: f64,
    pub v: f64,
    /// Largest pair number kept.
    pub truncation: usize,
    pub wavelength_nm: f64,
    #[serde(default)]
    pub pump_note: String,
}

impl TmsvModel {
    pub fn new(lambda: f64, v: f64) -> Result<Self> {
        let m = Self { lambda, v, truncation: 2, wavelength_nm: 1545.0, pump_note: String::new() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::Domain(format!("lambda {} outside [0, 1)", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.v) {
            return Err(Error::Domain(format!("V {} outside [0, 1]", self.v)));
        }
        Ok(())
    }

    /// Unnormalized pair-number weight `(1−λ²)λ^{2n}`.
    pub fn raw_weight(&self, n: usize) -> f64 {
        let l2 = self.lambda * self.lambda;
        (1.0 - l2) * l2.powi(n as i32)
    }

    /// `P(n pairs | at least one pair)` within the truncation.
    pub fn conditional_pair_prob(&self, n: usize) -> f64 {
        if n == 0 || n > self.truncation {
            return 0.0;
        }
        let norm: f64 = (1..=self.truncation).map(|k| self.raw_weight(k)).sum();
        if norm == 0.0 {
            return 0.0;
        }
        self.raw_weight(n) / norm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairTerm {
    pub pairs: usize,
    /// Weight renormalized over the kept pair numbers.
    pub weight: f64,
    pub ensemble: PhotonEnsemble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TmsvExpansion {
    pub terms: Vec<PairTerm>,
    /// Probability mass above the truncation before renormalization.
    pub discarded_tail: f64,
}

/// Normalized n-pair state `(√V â_c† + √(1−V) b̂_c†)ⁿ (â_t†)ⁿ |0⟩`.
///
/// The amplitude on k label-0 and n−k label-1 control photons is
/// `√(C(n,k) V^k (1−V)^{n−k})`.
pub fn pair_state(n: usize, v: f64) -> Result<PhotonEnsemble> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("V {v} outside [0, 1]")));
    }
    if n == 0 {
        return Ok(PhotonEnsemble::single(PhotonConfiguration::from_photons(&[])));
    }
    let mut terms = Vec::new();
    let mut binom = 1.0;
    for k in 0..=n {
        if k > 0 {
            binom = binom * (n - k + 1) as f64 / k as f64;
        }
        let w = binom * v.powi(k as i32) * (1.0 - v).powi((n - k) as i32);
        if w == 0.0 {
            continue;
        }
        let mut photons = vec![(CONTROL_ARM, 0); k];
        photons.extend(std::iter::repeat_n((CONTROL_ARM, 1), n - k));
        photons.extend(std::iter::repeat_n((TARGET_ARM, 0), n));
        terms.push((c64(w.sqrt(), 0.0), PhotonConfiguration::from_photons(&photons)));
    }
    Ok(PhotonEnsemble::new(terms))
}

pub fn tmsv_ensemble(model: &TmsvModel) -> Result<TmsvExpansion> {
    model.validate()?;
    let kept: f64 = (0..=model.truncation).map(|n| model.raw_weight(n)).sum();
    let mut terms = Vec::new();
    for n in 0..=model.truncation {
        let weight = model.raw_weight(n) / kept;
        if weight == 0.0 {
            continue;
        }
        terms.push(PairTerm { pairs: n, weight, ensemble: pair_state(n, model.v)? });
    }
    Ok(TmsvExpansion { terms, discarded_tail: 1.0 - kept })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub lambda: f64,
    pub lambda_sq: f64,
    /// `λ²/(1−λ²)` for the untruncated source.
    pub mean_pairs: f64,
    pub p2_conditional: f64,
    pub p4_conditional: f64,
}

/// Solves `P(2 pairs | ≥1 pair) = target` within a truncation of
/// `truncation` pairs.
pub fn calibrate_lambda(target: f64, truncation: usize) -> Result<Calibration> {
    if !(target > 0.0 && target < 0.5) {
        return Err(Error::Calibration(format!("target {target} outside (0, 0.5)")));
    }
    if truncation < 2 {
        return Err(Error::Calibration("four-photon events need a truncation of at least two pairs".into()));
    }
    let p4 = |lambda: f64| TmsvModel { lambda, v: 1.0, truncation, wavelength_nm: 1545.0, pump_note: String::new() }
        .conditional_pair_prob(2);
    // p4 rises monotonically from 0 up to 1/truncation as λ → 1
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-12);
    if p4(hi) < target {
        return Err(Error::Calibration(format!("no lambda in [0, 1) reaches P(4) = {target}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p4(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let l2 = lambda * lambda;
    let model = TmsvModel { lambda, v: 1.0, truncation, wavelength_nm: 1545.0, pump_note: String::new() };
    Ok(Calibration {
        lambda,
        lambda_sq: l2,
        mean_pairs: l2 / (1.0 - l2),
        p2_conditional: model.conditional_pair_prob(1),
        p4_conditional: model.conditional_pair_prob(2),
    })
}
