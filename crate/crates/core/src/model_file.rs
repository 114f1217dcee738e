//! Versioned on-disk model format: JSON with a leading format-version
//! field, weights as decimal text. Mismatched versions are refused.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    ClassifyError, ConfidencePredictor, LabelConfidence, LogisticModel, MlpModel, StackedModel,
    SvmModel,
};
use crate::embed::FfnModel;
use crate::preprocess::Level;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("failed to read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported model format version {found} (this build reads {supported})")]
    VersionMismatch { found: u32, supported: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme")]
pub enum SavedClassifier {
    Logistic(LogisticModel),
    Mlp(MlpModel),
    Svm(SvmModel),
    Stack(StackedModel),
    Ffn(FfnModel),
}

impl SavedClassifier {
    pub fn scheme(&self) -> &'static str {
        match self {
            SavedClassifier::Logistic(_) => "logistic",
            SavedClassifier::Mlp(_) => "mlp",
            SavedClassifier::Svm(_) => "svm",
            SavedClassifier::Stack(_) => "stack",
            SavedClassifier::Ffn(_) => "ffn",
        }
    }

    pub fn predictor(&self) -> &dyn ConfidencePredictor {
        match self {
            SavedClassifier::Logistic(m) => m,
            SavedClassifier::Mlp(m) => m,
            SavedClassifier::Svm(m) => m,
            SavedClassifier::Stack(m) => m,
            SavedClassifier::Ffn(m) => m,
        }
    }
}

impl ConfidencePredictor for SavedClassifier {
    fn confidence(&self, x: &[f64]) -> Result<LabelConfidence, ClassifyError> {
        self.predictor().confidence(x)
    }
}

/// A trained model plus the provenance needed to reuse it: the seed, the
/// granularity it was trained for, and the review ids that were held out
/// of training (the evaluation split).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub seed: u64,
    pub level: Level,
    pub test_ids: Vec<String>,
    pub model: SavedClassifier,
}

impl ModelFile {
    pub fn new(seed: u64, level: Level, test_ids: Vec<String>, model: SavedClassifier) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            seed,
            level,
            test_ids,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<ModelFile, ModelFileError> {
        #[derive(Deserialize)]
        struct VersionProbe {
            format_version: u32,
        }
        let probe: VersionProbe = serde_json::from_str(text)?;
        if probe.format_version != FORMAT_VERSION {
            return Err(ModelFileError::VersionMismatch {
                found: probe.format_version,
                supported: FORMAT_VERSION,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelFile, ModelFileError> {
        ModelFile::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{testdata, train_logistic, train_stack, TrainConfig};

    fn fixture_model() -> ModelFile {
        let (x, y) = testdata::three_clusters(10, 4.0, 0.5, 31);
        let cfg = TrainConfig {
            seed: 31,
            epochs: 50,
            meta_folds: 3,
            max_passes: 10,
            ..TrainConfig::default()
        };
        let model = train_stack(&x, &y, &cfg).unwrap();
        ModelFile::new(
            31,
            Level::DocumentLevel,
            vec!["r2".to_string(), "r5".to_string()],
            SavedClassifier::Stack(model),
        )
    }

    #[test]
    fn round_trips_byte_identically() {
        let file = fixture_model();
        let json = file.to_json();
        let loaded = ModelFile::from_json(&json).unwrap();
        assert_eq!(loaded, file);
        assert_eq!(loaded.to_json(), json);
        assert_eq!(loaded.model.scheme(), "stack");
        assert_eq!(loaded.test_ids, vec!["r2", "r5"]);
    }

    #[test]
    fn predictions_survive_the_round_trip() {
        let file = fixture_model();
        let loaded = ModelFile::from_json(&file.to_json()).unwrap();
        let x = vec![4.0, 4.0];
        let a = file.model.confidence(&x).unwrap();
        let b = loaded.model.confidence(&x).unwrap();
        assert_eq!(a.as_array(), b.as_array());
    }

    #[test]
    fn refuses_mismatched_versions() {
        let mut file = fixture_model();
        file.format_version = 99;
        let json = file.to_json();
        assert!(matches!(
            ModelFile::from_json(&json),
            Err(ModelFileError::VersionMismatch {
                found: 99,
                supported: FORMAT_VERSION
            })
        ));
    }

    #[test]
    fn rejects_non_model_json() {
        assert!(matches!(
            ModelFile::from_json("{\"hello\": 1}"),
            Err(ModelFileError::Malformed(_))
        ));
        assert!(ModelFile::from_json("not json").is_err());
    }

    #[test]
    fn wraps_every_scheme() {
        let (x, y) = testdata::three_clusters(8, 4.0, 0.5, 32);
        let cfg = TrainConfig {
            seed: 32,
            epochs: 20,
            ..TrainConfig::default()
        };
        let logistic = train_logistic(&x, &y, &cfg).unwrap();
        let saved = SavedClassifier::Logistic(logistic);
        assert_eq!(saved.scheme(), "logistic");
        let file = ModelFile::new(32, Level::SentenceLevel, vec![], saved);
        let loaded = ModelFile::from_json(&file.to_json()).unwrap();
        assert_eq!(loaded, file);
    }
}
