//! JSON model-definition documents.
//!
//! ```json
//! { "name": "cap", "kind": "samples", "samples": [[0,0],[1,0.9],[2,1.2]], "t_max": 2 }
//! { "name": "s", "kind": "builtin", "builtin": "sinclair" }
//! ```

use serde::{Deserialize, Serialize};

use super::{Builtin, ProfileModel};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelDocumentKind {
    Builtin,
    Samples,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub name: String,
    pub kind: ModelDocumentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

impl ModelDocument {
    pub fn build<T: Real>(&self) -> Result<ProfileModel<T>> {
        let t_max = match self.t_max {
            Some(t) if !(t > 0.0 && t.is_finite()) => {
                return Err(Error::Schema(format!("t_max = {t} must be positive and finite")))
            }
            other => other.map(T::lit),
        };
        match self.kind {
            ModelDocumentKind::Builtin => {
                if self.samples.is_some() {
                    return Err(Error::Schema("builtin model must not carry samples".into()));
                }
                let which: Builtin = self
                    .builtin
                    .as_deref()
                    .ok_or_else(|| Error::Schema("missing field `builtin`".into()))?
                    .parse()?;
                let mut model = ProfileModel::builtin(which);
                model.name = self.name.clone();
                if let Some(t) = t_max {
                    model.t_max = t;
                }
                Ok(model)
            }
            ModelDocumentKind::Samples => {
                let samples = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| Error::Schema("missing field `samples`".into()))?;
                let samples: Vec<(T, T)> = samples.iter().map(|s| (T::lit(s[0]), T::lit(s[1]))).collect();
                ProfileModel::from_samples(self.name.clone(), &samples, t_max)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ModelKind;

    #[test]
    fn builtin_document() {
        let m = ProfileModel::<f64>::from_json(r#"{"name":"s","kind":"builtin","builtin":"sinclair"}"#).unwrap();
        assert_eq!(m.kind(), ModelKind::ClosedForm);
        assert_eq!(m.t_max(), 40.0);
        let x = 0.8f64;
        assert!((m.f(x) - (-x * x).exp() * x.tanh()).abs() < 1e-16);
    }

    #[test]
    fn sampled_document() {
        let m = ProfileModel::<f64>::from_json(
            r#"{"name":"cap","kind":"samples","samples":[[0,0],[1,0.9],[2,1.2]],"t_max":2}"#,
        )
        .unwrap();
        assert_eq!(m.kind(), ModelKind::Sampled);
        assert_eq!(m.t_max(), 2.0);
        assert_eq!(m.f(1.0), 0.9);
        assert_eq!(m.f(0.0), 0.0);
    }

    #[test]
    fn schema_errors() {
        for bad in [
            r#"{"name":"x","kind":"builtin"}"#,
            r#"{"name":"x","kind":"samples"}"#,
            r#"{"name":"x","kind":"torus"}"#,
            r#"{"name":"x","kind":"builtin","builtin":"plane","t_max":-1}"#,
            r#"{"name":"x","kind":"builtin","builtin":"plane","extra":1}"#,
        ] {
            let err = ProfileModel::<f64>::from_json(bad).unwrap_err();
            assert!(matches!(err, Error::Schema(_)), "{bad}: {err}");
        }
        let err = ProfileModel::<f64>::from_json(r#"{"name":"x","kind":"builtin","builtin":"torus"}"#).unwrap_err();
        assert!(matches!(err, Error::UnknownModel(_)));
    }
}
