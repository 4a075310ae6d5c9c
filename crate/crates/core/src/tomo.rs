//! Two-qubit polarization tomography.
//!
//! Each qubit passes a half-wave plate, then a quarter-wave plate, then a
//! polarizing splitter whose H port is outcome 0. Outcome 0 is the +1
//! eigenvalue of the measured Pauli operator.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix, C64, ONE, ZERO};

const TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Wave-plate angles `(hwp_deg, qwp_deg)` realizing this basis.
    pub fn angles(self) -> (f64, f64) {
        match self {
            Pauli::X => (22.5, 0.0),
            Pauli::Y => (45.0, -45.0),
            Pauli::Z => (0.0, 0.0),
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        let d = match self {
            Pauli::X => vec![ZERO, ONE, ONE, ZERO],
            Pauli::Y => vec![ZERO, c64(0.0, -1.0), c64(0.0, 1.0), ZERO],
            Pauli::Z => vec![ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::new(2, 2, d).expect("2x2")
    }

    pub fn parse(s: &str) -> Result<Pauli> {
        match s.trim().to_ascii_uppercase().as_str() {
            "X" => Ok(Pauli::X),
            "Y" => Ok(Pauli::Y),
            "Z" => Ok(Pauli::Z),
            _ => Err(Error::Domain(format!("unknown Pauli label {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePlates {
    pub hwp_deg: f64,
    pub qwp_deg: f64,
}

/// One setting of the two-qubit measurement, control first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub labels: (Pauli, Pauli),
    pub plates: (WavePlates, WavePlates),
}

impl MeasurementSetting {
    pub fn new(a: Pauli, b: Pauli) -> Self {
        let p = |l: Pauli| {
            let (hwp_deg, qwp_deg) = l.angles();
            WavePlates { hwp_deg, qwp_deg }
        };
        Self { labels: (a, b), plates: (p(a), p(b)) }
    }

    /// The nine Pauli pairs, XX first, ZZ last.
    pub fn all() -> Vec<MeasurementSetting> {
        Pauli::ALL.iter().flat_map(|&a| Pauli::ALL.iter().map(move |&b| Self::new(a, b))).collect()
    }

    pub fn label(&self) -> String {
        format!("{:?}{:?}", self.labels.0, self.labels.1)
    }
}

fn hwp(alpha_deg: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * alpha_deg.to_radians()).sin_cos();
    ComplexMatrix::from_real(2, 2, &[c, s, s, -c]).expect("2x2")
}

fn qwp(alpha_deg: f64) -> ComplexMatrix {
    let (s, c) = alpha_deg.to_radians().sin_cos();
    let off = c64(s * c, -s * c);
    ComplexMatrix::new(2, 2, vec![c64(c * c, s * s), off, off, c64(s * s, c * c)]).expect("2x2")
}

/// Jones matrix of the plate pair, half-wave plate first in the beam.
pub fn setting_unitary(hwp_deg: f64, qwp_deg: f64) -> Result<ComplexMatrix> {
    if !hwp_deg.is_finite() || !qwp_deg.is_finite() {
        return Err(Error::Domain("wave-plate angles must be finite".into()));
    }
    Ok(&qwp(qwp_deg) * &hwp(hwp_deg))
}

/// Projectors onto the H (outcome 0) and V (outcome 1) splitter ports.
pub fn setting_projectors(hwp_deg: f64, qwp_deg: f64) -> Result<[ComplexMatrix; 2]> {
    let m = setting_unitary(hwp_deg, qwp_deg)?;
    let proj = |k: usize| {
        let row = m.select(&[k], &[0, 1]);
        &row.adjoint() * &row
    };
    Ok([proj(0), proj(1)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub fn from_pure(psi: &[C64; 4]) -> Result<Self> {
        let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > TOL {
            return Err(Error::InvalidState(format!("state norm {n} is not 1")));
        }
        let mut m = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        Self::new(m)
    }

    pub fn maximally_mixed() -> Self {
        Self { matrix: ComplexMatrix::identity(4).scale(c64(0.25, 0.0)) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if m.rows() != 4 || m.cols() != 4 {
            return Err(Error::Dimension(format!("density matrix is {}x{}, expected 4x4", m.rows(), m.cols())));
        }
        if m.hermiticity_error() > TOL {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let (vals, _) = hermitian_eigen(m);
        if let Some(&min) = vals.iter().min_by(|a, b| a.total_cmp(b)) {
            if min < -TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
            }
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }
}

fn to_na(m: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

/// Eigenvalues and column eigenvectors of the Hermitian part of `m`.
fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, DMatrix<C64>) {
    let a = to_na(m);
    let h = (&a + a.adjoint()) * c64(0.5, 0.0);
    let e = h.symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// Counts, or exact probabilities, of the four outcomes `00, 01, 10, 11`
/// for one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingCounts {
    pub setting: MeasurementSetting,
    pub counts: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomoData {
    pub settings: Vec<SettingCounts>,
    /// Whether the counts are sampled rather than exact probabilities.
    pub sampled: bool,
}

impl TomoData {
    /// Builds data from `(a, b, outcome, count)` records, summing duplicates.
    pub fn from_records(records: &[(Pauli, Pauli, usize, f64)]) -> Result<TomoData> {
        let mut acc: BTreeMap<(Pauli, Pauli), [f64; 4]> = BTreeMap::new();
        for &(a, b, k, n) in records {
            if k > 3 {
                return Err(Error::Domain(format!("outcome index {k} outside 0..4")));
            }
            if !n.is_finite() || n < 0.0 {
                return Err(Error::Domain(format!("count {n} must be finite and non-negative")));
            }
            acc.entry((a, b)).or_default()[k] += n;
        }
        let sampled = acc.values().flatten().all(|x| x.fract() == 0.0);
        Ok(TomoData {
            settings: acc
                .into_iter()
                .map(|((a, b), counts)| SettingCounts { setting: MeasurementSetting::new(a, b), counts })
                .collect(),
            sampled,
        })
    }

    fn get(&self, a: Pauli, b: Pauli) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        let mut found = false;
        for s in self.settings.iter().filter(|s| s.setting.labels == (a, b)) {
            found = true;
            for k in 0..4 {
                out[k] += s.counts[k];
            }
        }
        let total: f64 = out.iter().sum();
        if !found || total <= 0.0 {
            return Err(Error::MissingSetting(format!("{a:?}{b:?}")));
        }
        Ok(out.map(|x| x / total))
    }
}

/// `Tr[(Π_a ⊗ Π_b) ρ]` for the four outcomes of one setting.
pub fn outcome_probabilities(rho: &DensityMatrix, setting: &MeasurementSetting) -> Result<[f64; 4]> {
    let (pa, pb) = setting.plates;
    let a = setting_projectors(pa.hwp_deg, pa.qwp_deg)?;
    let b = setting_projectors(pb.hwp_deg, pb.qwp_deg)?;
    let mut out = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            let p = (&a[i].kron(&b[j]) * rho.matrix()).trace().re;
            out[2 * i + j] = p.clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

fn multinomial(rng: &mut ChaCha8Rng, shots: u64, probs: &[f64; 4]) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    let mut left = shots;
    let mut mass = 1.0;
    for k in 0..3 {
        if left == 0 {
            break;
        }
        let p = if mass > 0.0 { (probs[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let x = Binomial::new(left, p).map_err(|e| Error::Domain(e.to_string()))?.sample(rng);
        out[k] = x as f64;
        left -= x;
        mass -= probs[k];
    }
    out[3] = left as f64;
    Ok(out)
}

/// Outcome statistics for every setting. With `shots == 0` the exact
/// probabilities are returned; otherwise each setting draws `shots` samples
/// from its own ChaCha stream of `seed`.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    shots: u64,
    seed: u64,
) -> Result<TomoData> {
    rho.validate()?;
    let mut out = Vec::with_capacity(settings.len());
    for (i, s) in settings.iter().enumerate() {
        let probs = outcome_probabilities(rho, s)?;
        let counts = if shots == 0 {
            let t: f64 = probs.iter().sum();
            probs.map(|p| p / t)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            multinomial(&mut rng, shots, &probs)?
        };
        out.push(SettingCounts { setting: *s, counts });
    }
    Ok(TomoData { settings: out, sampled: shots > 0 })
}

fn sign(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Linear inversion of Pauli moments followed by projection onto the
/// closest unit-trace positive semidefinite matrix.
pub fn reconstruct(data: &TomoData) -> Result<DensityMatrix> {
    let mut freq = BTreeMap::new();
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            freq.insert((a, b), data.get(a, b)?);
        }
    }
    let ops: [ComplexMatrix; 4] =
        [ComplexMatrix::identity(2), Pauli::X.matrix(), Pauli::Y.matrix(), Pauli::Z.matrix()];
    let mut rho = ComplexMatrix::identity(4);
    for i in 0..4 {
        for j in 0..4 {
            if i == 0 && j == 0 {
                continue;
            }
            // single-qubit moments are averaged over the partner's three bases
            let pairs: Vec<(Pauli, Pauli)> = match (i, j) {
                (0, j) => Pauli::ALL.iter().map(|&a| (a, Pauli::ALL[j - 1])).collect(),
                (i, 0) => Pauli::ALL.iter().map(|&b| (Pauli::ALL[i - 1], b)).collect(),
                (i, j) => vec![(Pauli::ALL[i - 1], Pauli::ALL[j - 1])],
            };
            let mut m = 0.0;
            for p in &pairs {
                let f = freq[p];
                for (k, fk) in f.iter().enumerate() {
                    let (ka, kb) = (k / 2, k % 2);
                    let s = (if i == 0 { 1.0 } else { sign(ka) }) * (if j == 0 { 1.0 } else { sign(kb) });
                    m += s * fk;
                }
            }
            m /= pairs.len() as f64;
            rho = rho.add(&ops[i].kron(&ops[j]).scale(c64(m, 0.0)));
        }
    }
    project_psd(&rho.scale(c64(0.25, 0.0)))
}

/// Clips negative eigenvalues, spreading the deficit over the remaining
/// ones, as in the maximum-likelihood projection of Smolin, Gambetta and
/// Smith.
fn project_psd(m: &ComplexMatrix) -> Result<DensityMatrix> {
    let (vals, vecs) = hermitian_eigen(m);
    let tr: f64 = vals.iter().sum();
    if tr <= 0.0 {
        return Err(Error::InvalidState("estimate has non-positive trace".into()));
    }
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut lam: Vec<f64> = idx.iter().map(|&i| vals[i] / tr).collect();
    let mut acc = 0.0;
    let mut n = lam.len();
    while n > 0 && lam[n - 1] + acc / (n as f64) < 0.0 {
        acc += lam[n - 1];
        lam[n - 1] = 0.0;
        n -= 1;
    }
    for l in lam.iter_mut().take(n) {
        *l += acc / n as f64;
    }
    let mut out = ComplexMatrix::zeros(4, 4);
    for (l, &i) in lam.iter().zip(&idx) {
        if *l == 0.0 {
            continue;
        }
        let v = vecs.column(i);
        for r in 0..4 {
            for c in 0..4 {
                out[(r, c)] += v[r] * v[c].conj() * *l;
            }
        }
    }
    // remove rounding asymmetry
    let out = out.add(&out.adjoint()).scale(c64(0.5, 0.0));
    DensityMatrix::new(out)
}

/// `⟨ψ|ρ|ψ⟩` for a normalized target.
pub fn state_fidelity(rho: &DensityMatrix, target: &[C64; 4]) -> f64 {
    let m = rho.matrix();
    let mut f = ZERO;
    for i in 0..4 {
        for j in 0..4 {
            f += target[i].conj() * m[(i, j)] * target[j];
        }
    }
    f.re.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityInterval {
    pub fidelity: f64,
    pub lower: f64,
    pub upper: f64,
    pub resamples: usize,
}

pub const DEFAULT_RESAMPLES: usize = 200;

/// Percentile bootstrap (2.5 %, 97.5 %) of the reconstructed fidelity,
/// resampling each setting multinomially from its observed frequencies.
pub fn bootstrap_fidelity(data: &TomoData, target: &[C64; 4], resamples: usize, seed: u64) -> Result<FidelityInterval> {
    if !data.sampled {
        return Err(Error::Validation("bootstrap needs sampled counts".into()));
    }
    if resamples == 0 {
        return Err(Error::Validation("at least one resample is needed".into()));
    }
    let fidelity = state_fidelity(&reconstruct(data)?, target);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fs = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut settings = Vec::with_capacity(data.settings.len());
        for s in &data.settings {
            let total: f64 = s.counts.iter().sum();
            let probs = if total > 0.0 { s.counts.map(|c| c / total) } else { [0.0; 4] };
            let counts = multinomial(&mut rng, total as u64, &probs)?;
            settings.push(SettingCounts { setting: s.setting, counts });
        }
        let d = TomoData { settings, sampled: true };
        fs.push(state_fidelity(&reconstruct(&d)?, target));
    }
    fs.sort_by(f64::total_cmp);
    let last = fs.len() - 1;
    let pick = |q: f64| fs[((q * last as f64).round() as usize).min(last)];
    Ok(FidelityInterval { fidelity, lower: pick(0.025), upper: pick(0.975), resamples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::BellState;
    use proptest::prelude::*;
    use rand_distr::StandardNormal;

    fn eigenprojector(p: Pauli, plus: bool) -> ComplexMatrix {
        let s = if plus { 0.5 } else { -0.5 };
        ComplexMatrix::identity(2).scale(c64(0.5, 0.0)).add(&p.matrix().scale(c64(s, 0.0)))
    }

    #[test]
    fn plate_table_lands_on_pauli_bases() {
        for p in Pauli::ALL {
            let (h, q) = p.angles();
            let [p0, p1] = setting_projectors(h, q).unwrap();
            assert!(p0.max_abs_diff(&eigenprojector(p, true)) < 1e-12, "{p:?}");
            assert!(p1.max_abs_diff(&eigenprojector(p, false)) < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn opposite_retarder_sign_fails_y() {
        // with the quarter-wave retardance sign reversed, the Y setting reads out −σ_y
        let m = &qwp(-45.0).adjoint() * &hwp(45.0);
        let row = m.select(&[0], &[0, 1]);
        let p0 = &row.adjoint() * &row;
        assert!(p0.max_abs_diff(&eigenprojector(Pauli::Y, false)) < 1e-12);
    }

    #[test]
    fn plates_are_unitary() {
        for (h, q) in [(0.0, 0.0), (22.5, 0.0), (45.0, -45.0), (13.0, 71.0)] {
            assert!(setting_unitary(h, q).unwrap().unitarity_error() < 1e-12);
        }
        assert!(setting_unitary(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn zz_on_00() {
        let mut psi = [ZERO; 4];
        psi[0] = ONE;
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let p = outcome_probabilities(&rho, &MeasurementSetting::new(Pauli::Z, Pauli::Z)).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xx_on_phi_minus() {
        let rho = DensityMatrix::from_pure(&BellState::PhiMinus.amplitudes()).unwrap();
        let p = outcome_probabilities(&rho, &MeasurementSetting::new(Pauli::X, Pauli::X)).unwrap();
        for (got, want) in p.iter().zip([0.0, 0.5, 0.5, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_tables_sum_to_one() {
        let rho = DensityMatrix::from_pure(&BellState::PsiPlus.amplitudes()).unwrap();
        let d = simulate_counts(&rho, &MeasurementSetting::all(), 0, 1).unwrap();
        assert_eq!(d.settings.len(), 9);
        for s in &d.settings {
            assert!((s.counts.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_states_reconstruct_exactly() {
        for b in BellState::ALL {
            let psi = b.amplitudes();
            let rho = DensityMatrix::from_pure(&psi).unwrap();
            let d = simulate_counts(&rho, &MeasurementSetting::all(), 0, 0).unwrap();
            let r = reconstruct(&d).unwrap();
            assert!(state_fidelity(&r, &psi) >= 1.0 - 1e-9, "{b:?}");
        }
    }

    #[test]
    fn mixed_state_reconstructs_to_identity() {
        let d = simulate_counts(&DensityMatrix::maximally_mixed(), &MeasurementSetting::all(), 0, 0).unwrap();
        let r = reconstruct(&d).unwrap();
        assert!(r.matrix().max_abs_diff(DensityMatrix::maximally_mixed().matrix()) < 1e-12);
        assert!((state_fidelity(&r, &BellState::PhiMinus.amplitudes()) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn missing_setting_rejected() {
        let mut d = simulate_counts(&DensityMatrix::maximally_mixed(), &MeasurementSetting::all(), 0, 0).unwrap();
        d.settings.remove(4);
        assert!(matches!(reconstruct(&d), Err(Error::MissingSetting(s)) if s == "YY"));
    }

    #[test]
    fn invalid_density_matrix_rejected() {
        let m = ComplexMatrix::identity(4).scale(c64(0.5, 0.0));
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidState(_))));
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = c64(1.5, 0.0);
        m[(1, 1)] = c64(-0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let rho = DensityMatrix::from_pure(&BellState::PsiPlus.amplitudes()).unwrap();
        let a = simulate_counts(&rho, &MeasurementSetting::all(), 500, 7).unwrap();
        let b = simulate_counts(&rho, &MeasurementSetting::all(), 500, 7).unwrap();
        let c = simulate_counts(&rho, &MeasurementSetting::all(), 500, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for s in &a.settings {
            assert_eq!(s.counts.iter().sum::<f64>(), 500.0);
        }
    }

    #[test]
    fn sampled_fidelity_median() {
        let psi = BellState::PsiPlus.amplitudes();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let mut fs: Vec<f64> = (0..50)
            .map(|seed| {
                let d = simulate_counts(&rho, &MeasurementSetting::all(), 1000, seed).unwrap();
                state_fidelity(&reconstruct(&d).unwrap(), &psi)
            })
            .collect();
        fs.sort_by(f64::total_cmp);
        let median = 0.5 * (fs[24] + fs[25]);
        assert!(median >= 0.98, "{median}");
    }

    #[test]
    fn bootstrap_brackets_estimate() {
        let psi = BellState::PhiMinus.amplitudes();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let d = simulate_counts(&rho, &MeasurementSetting::all(), 300, 3).unwrap();
        let b = bootstrap_fidelity(&d, &psi, DEFAULT_RESAMPLES, 11).unwrap();
        assert!(b.lower <= b.upper && b.upper <= 1.0);
        assert!(b.lower > 0.8);
        assert_eq!(b, bootstrap_fidelity(&d, &psi, DEFAULT_RESAMPLES, 11).unwrap());
        let exact = simulate_counts(&rho, &MeasurementSetting::all(), 0, 3).unwrap();
        assert!(bootstrap_fidelity(&exact, &psi, 10, 0).is_err());
    }

    fn haar_state(seed: u64) -> [C64; 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = [ZERO; 4];
        for a in v.iter_mut() {
            *a = c64(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        }
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.map(|a| a / n)
    }

    #[test]
    fn haar_states_reconstruct_exactly() {
        for seed in 0..20 {
            let psi = haar_state(seed);
            let d = simulate_counts(&DensityMatrix::from_pure(&psi).unwrap(), &MeasurementSetting::all(), 0, 0).unwrap();
            assert!(state_fidelity(&reconstruct(&d).unwrap(), &psi) >= 1.0 - 1e-9);
        }
    }

    proptest! {
        #[test]
        fn projectors_complete(h in -180.0f64..180.0, q in -180.0f64..180.0) {
            let [a, b] = setting_projectors(h, q).unwrap();
            prop_assert!(a.add(&b).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        }

        #[test]
        fn reconstruction_always_physical(raw in proptest::collection::vec(proptest::collection::vec(0u32..50, 4), 9)) {
            let mut records = Vec::new();
            for (i, row) in raw.iter().enumerate() {
                let (a, b) = (Pauli::ALL[i / 3], Pauli::ALL[i % 3]);
                let total: u32 = row.iter().sum();
                for (k, &n) in row.iter().enumerate() {
                    // keep every setting populated
                    let n = if total == 0 && k == 0 { 1 } else { n };
                    records.push((a, b, k, n as f64));
                }
            }
            let d = TomoData::from_records(&records).unwrap();
            let r = reconstruct(&d).unwrap();
            prop_assert!(r.validate().is_ok());
        }
    }
}
