//! Layered beamsplitter interferometers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix};

/// Rail labels of the C-NOT preset, top to bottom.
pub const CNOT_LABELS: [&str; 6] = ["ancilla_top", "C_in0", "C_in1", "T_in0", "T_in1", "ancilla_bottom"];
pub const CONTROL_RAILS: [usize; 2] = [1, 2];
pub const TARGET_RAILS: [usize; 2] = [3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamsplitterSpec {
    pub layer: usize,
    pub top_rail: usize,
    pub reflectivity: f64,
    pub sign: i8,
    #[serde(default)]
    pub reflect_phase: f64,
    #[serde(default)]
    pub transmit_phase: f64,
}

impl BeamsplitterSpec {
    pub fn new(layer: usize, top_rail: usize, reflectivity: f64, sign: i8) -> Self {
        Self { layer, top_rail, reflectivity, sign, reflect_phase: 0.0, transmit_phase: 0.0 }
    }

    pub fn unitary(&self) -> Result<ComplexMatrix> {
        bs_unitary(self.reflectivity, self.sign, self.reflect_phase, self.transmit_phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interferometer {
    pub num_rails: usize,
    pub elements: Vec<BeamsplitterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// `[[±√R e^{iφR}, √(1−R) e^{−iφT}], [√(1−R) e^{iφT}, ∓√R e^{−iφR}]]`
pub fn bs_unitary(r: f64, sign: i8, phi_r: f64, phi_t: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("reflectivity {r} outside [0, 1]")));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::Domain(format!("reflection sign must be +1 or -1, got {sign}")));
    }
    if !phi_r.is_finite() || !phi_t.is_finite() {
        return Err(Error::Domain("non-finite beamsplitter phase".into()));
    }
    let s = f64::from(sign);
    let rr = r.sqrt();
    let tt = (1.0 - r).sqrt();
    let er = c64(0.0, phi_r).exp();
    let et = c64(0.0, phi_t).exp();
    ComplexMatrix::new(2, 2, vec![er * (s * rr), et.conj() * tt, et * tt, er.conj() * (-s * rr)])
}

impl Interferometer {
    pub fn new(num_rails: usize, elements: Vec<BeamsplitterSpec>) -> Result<Self> {
        let ifm = Self { num_rails, elements, labels: None };
        ifm.validate()?;
        Ok(ifm)
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Result<Self> {
        self.labels = Some(labels.iter().map(|s| s.to_string()).collect());
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_rails == 0 {
            return Err(Error::Validation("an interferometer needs at least one rail".into()));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.num_rails {
                return Err(Error::Validation(format!(
                    "{} labels for {} rails",
                    labels.len(),
                    self.num_rails
                )));
            }
        }
        let mut used: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            if e.top_rail + 1 >= self.num_rails {
                return Err(Error::Validation(format!(
                    "element {i} couples rails {} and {} but there are only {} rails",
                    e.top_rail,
                    e.top_rail + 1,
                    self.num_rails
                )));
            }
            e.unitary().map_err(|err| Error::Validation(format!("element {i}: {err}")))?;
            for rail in [e.top_rail, e.top_rail + 1] {
                if let Some(j) = used.insert((e.layer, rail), i) {
                    return Err(Error::Validation(format!(
                        "elements {j} and {i} share rail {rail} in layer {}",
                        e.layer
                    )));
                }
            }
        }
        Ok(())
    }

    /// Elements grouped by layer, in ascending layer order.
    pub fn layers(&self) -> Vec<(usize, Vec<BeamsplitterSpec>)> {
        let mut map: BTreeMap<usize, Vec<BeamsplitterSpec>> = BTreeMap::new();
        for e in &self.elements {
            map.entry(e.layer).or_default().push(*e);
        }
        map.into_iter().collect()
    }

    pub fn rail_index(&self, label: &str) -> Option<usize> {
        self.labels.as_ref()?.iter().position(|l| l == label)
    }
}

/// Unitary of one layer: identity with the 2×2 blocks embedded.
pub fn layer_unitary(num_rails: usize, elements: &[BeamsplitterSpec]) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(num_rails);
    for e in elements {
        u.set_block(e.top_rail, &e.unitary()?);
    }
    Ok(u)
}

pub fn synthesize(ifm: &Interferometer) -> Result<ComplexMatrix> {
    ifm.validate()?;
    let mut u = ComplexMatrix::identity(ifm.num_rails);
    for (_, layer) in ifm.layers() {
        u = layer_unitary(ifm.num_rails, &layer)?.matmul(&u);
    }
    Ok(u)
}

/// The six-rail post-selected C-NOT.
///
/// Several sign patterns on the ±⅓ splitters realize the gate; this one
/// uses −⅓ on the top ancilla and C_in1/T_in0 splitters and +⅓ on the
/// T_in1/ancilla splitter, with both ½ splitters positive.
pub fn ralph_cnot() -> Interferometer {
    let third = 1.0 / 3.0;
    let elements = vec![
        BeamsplitterSpec::new(0, 3, 0.5, 1),
        BeamsplitterSpec::new(1, 0, third, -1),
        BeamsplitterSpec::new(1, 2, third, -1),
        BeamsplitterSpec::new(1, 4, third, 1),
        BeamsplitterSpec::new(2, 3, 0.5, 1),
    ];
    Interferometer {
        num_rails: 6,
        elements,
        labels: Some(CNOT_LABELS.iter().map(|s| s.to_string()).collect()),
    }
}

fn check_rails(rails: &[usize], n: usize, what: &str) -> Result<()> {
    for (i, &r) in rails.iter().enumerate() {
        if r >= n {
            return Err(Error::Domain(format!("{what} rail {r} out of range for {n} rails")));
        }
        if rails[..i].contains(&r) {
            return Err(Error::Domain(format!("{what} rail {r} listed twice")));
        }
    }
    Ok(())
}

/// `U[out_rails, in_rails]`, no renormalization.
pub fn postselected_submatrix(u: &ComplexMatrix, in_rails: &[usize], out_rails: &[usize]) -> Result<ComplexMatrix> {
    check_rails(in_rails, u.cols(), "input")?;
    check_rails(out_rails, u.rows(), "output")?;
    Ok(u.select(out_rails, in_rails))
}

/// Two-photon transfer map on the dual-rail computational subspace.
///
/// Entry `(2c'+t', 2c+t)` is the amplitude for one photon leaving on
/// `control[c']` and one on `target[t']` given one photon entering on
/// `control[c]` and one on `target[t]`, i.e. the permanent of the 2×2
/// submatrix. The four control/target rails must be distinct.
pub fn dual_rail_gate_map(u: &ComplexMatrix, control: [usize; 2], target: [usize; 2]) -> Result<ComplexMatrix> {
    let all = [control[0], control[1], target[0], target[1]];
    check_rails(&all, u.rows().min(u.cols()), "dual-rail")?;
    let mut m = ComplexMatrix::zeros(4, 4);
    for c in 0..2 {
        for t in 0..2 {
            for c2 in 0..2 {
                for t2 in 0..2 {
                    let (i0, i1) = (control[c], target[t]);
                    let (o0, o1) = (control[c2], target[t2]);
                    m[(2 * c2 + t2, 2 * c + t)] = u[(o0, i0)] * u[(o1, i1)] + u[(o0, i1)] * u[(o1, i0)];
                }
            }
        }
    }
    Ok(m)
}

/// Eq.-1 C-NOT in the |CT⟩ basis ordering 00, 01, 10, 11.
pub fn cnot_matrix() -> ComplexMatrix {
    ComplexMatrix::from_real(
        4,
        4,
        &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.],
    )
    .expect("constant matrix")
}
