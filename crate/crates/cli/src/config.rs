use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tmcnot::budget::EfficiencyModel;
use tmcnot::experiment::Imperfections;
use tmcnot::source::{calibrate_lambda, TmsvModel};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub v: f64,
    /// Four-photon share of detected generations; used when `lambda` is absent.
    pub p4_conditional: Option<f64>,
    pub lambda: Option<f64>,
    pub truncation: usize,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self { v: 0.98, p4_conditional: Some(0.02), lambda: None, truncation: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfficiencyConfig {
    pub two_photon_detection_prob: f64,
    pub readout_flip: f64,
    pub detector_efficiency: f64,
}

impl Default for EfficiencyConfig {
    fn default() -> Self {
        let e = EfficiencyModel::default();
        Self {
            two_photon_detection_prob: e.two_photon_detection_prob,
            readout_flip: e.readout_flip,
            detector_efficiency: e.detector_efficiency,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub bell_variant: bool,
    pub separation_round: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyConfig {
    pub shots: u64,
    pub seed: u64,
    pub resamples: usize,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self { shots: 1000, seed: 0, resamples: tmcnot::tomo::DEFAULT_RESAMPLES }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceConfig,
    pub efficiency: EfficiencyConfig,
    pub schedule: ScheduleConfig,
    pub tomography: TomographyConfig,
    pub output: OutputConfig,
}

fn check_prob(name: &str, p: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::Validation(format!("{name} = {p} must lie in [0, 1]")));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.source;
        check_prob("source.v", s.v)?;
        match (s.lambda, s.p4_conditional) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation("give either source.lambda or source.p4_conditional, not both".into()))
            }
            (None, None) => return Err(CliError::Validation("source needs lambda or p4_conditional".into())),
            (Some(l), None) if !(0.0..1.0).contains(&l) => {
                return Err(CliError::Validation(format!("source.lambda = {l} must lie in [0, 1)")))
            }
            (None, Some(p)) => check_prob("source.p4_conditional", p)?,
            _ => {}
        }
        if s.truncation == 0 {
            return Err(CliError::Validation("source.truncation must be at least 1".into()));
        }
        let e = &self.efficiency;
        check_prob("efficiency.two_photon_detection_prob", e.two_photon_detection_prob)?;
        check_prob("efficiency.readout_flip", e.readout_flip)?;
        check_prob("efficiency.detector_efficiency", e.detector_efficiency)?;
        self.efficiency_model().validate()?;
        if self.tomography.resamples == 0 {
            return Err(CliError::Validation("tomography.resamples must be positive".into()));
        }
        Ok(())
    }

    pub fn efficiency_model(&self) -> EfficiencyModel {
        EfficiencyModel {
            two_photon_detection_prob: self.efficiency.two_photon_detection_prob,
            readout_flip: self.efficiency.readout_flip,
            detector_efficiency: self.efficiency.detector_efficiency,
            ..EfficiencyModel::default()
        }
    }

    pub fn source_model(&self) -> Result<TmsvModel, CliError> {
        let s = &self.source;
        let lambda = match (s.lambda, s.p4_conditional) {
            (Some(l), _) => l,
            (None, Some(p)) => calibrate_lambda(p, s.truncation)?.lambda,
            (None, None) => return Err(CliError::Validation("source needs lambda or p4_conditional".into())),
        };
        let mut m = TmsvModel::new(lambda, s.v)?;
        m.truncation = s.truncation;
        Ok(m)
    }

    pub fn imperfections(&self) -> Result<Imperfections, CliError> {
        Ok(Imperfections { source: self.source_model()?, efficiency: self.efficiency_model() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert!((c.source_model().unwrap().lambda - 1.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"source": {"v": 0.9}}"#).unwrap();
        assert_eq!(c.source.v, 0.9);
        assert_eq!(c.source.p4_conditional, Some(0.02));
        assert_eq!(c.tomography.resamples, 200);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sauce": {}}"#).is_err());
    }

    #[test]
    fn bad_values_rejected() {
        let mut c = RunConfig::default();
        c.efficiency.readout_flip = 1.5;
        assert!(matches!(c.validate(), Err(CliError::Validation(_))));
        let mut c = RunConfig::default();
        c.source.lambda = Some(0.1);
        assert!(c.validate().is_err());
        c.source.p4_conditional = None;
        c.validate().unwrap();
    }
}
