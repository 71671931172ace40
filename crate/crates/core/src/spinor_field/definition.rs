//! Serializable field definitions, as written in scenario files.
//!
//! ```json
//! { "type": "lightlike", "kappa": 1.0, "f": "0", "g": "s" }
//! { "type": "separable",
//!   "u": [1, [0, 1], 0, 2],
//!   "amplitude": { "re": "exp(x0)", "im": "3*exp(x0)" } }
//! { "type": "componentwise",
//!   "components": [ { "log_amp": "kappa*x2", "phase": "0" }, ... ],
//!   "params": { "kappa": 1.0 } }
//! { "type": "superposition", "terms": [ { "type": "lightlike", ... }, ... ] }
//! ```
//!
//! Complex numbers are either a bare real or a `[re, im]` pair. An amplitude
//! is either `{re, im}` (`im` defaults to `"0"`) or `{log_amp, phase}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{superpose, ComplexScalarField, FieldError, LightlikeFamily, SpinorField};
use crate::dirac_algebra::Bispinor;
use crate::fieldexpr::{parse, ParamBindings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_amp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
}

impl AmplitudeDef {
    pub fn cartesian(re: &str, im: &str) -> Self {
        Self {
            re: Some(re.into()),
            im: Some(im.into()),
            ..Self::default()
        }
    }

    pub fn exponential(log_amp: &str, phase: &str) -> Self {
        Self {
            log_amp: Some(log_amp.into()),
            phase: Some(phase.into()),
            ..Self::default()
        }
    }

    pub fn build(&self) -> Result<ComplexScalarField, FieldError> {
        let cartesian = self.re.is_some() || self.im.is_some();
        let exponential = self.log_amp.is_some() || self.phase.is_some();
        match (cartesian, exponential) {
            (true, false) => Ok(ComplexScalarField::parse_cartesian(
                self.re.as_deref().unwrap_or("0"),
                self.im.as_deref().unwrap_or("0"),
            )?),
            (false, true) => Ok(ComplexScalarField::parse_exponential(
                self.log_amp.as_deref().unwrap_or("0"),
                self.phase.as_deref().unwrap_or("0"),
            )?),
            (true, true) => Err(FieldError::Definition(
                "amplitude mixes {re, im} with {log_amp, phase}".into(),
            )),
            (false, false) => Err(FieldError::Definition(
                "amplitude needs {re, im} or {log_amp, phase}".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FieldShape {
    Separable {
        u: [ComplexValue; 4],
        amplitude: AmplitudeDef,
    },
    Componentwise {
        components: [AmplitudeDef; 4],
    },
    Lightlike {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
        f: String,
        g: String,
    },
    Superposition {
        terms: Vec<FieldShape>,
    },
}

impl FieldShape {
    /// `default_kappa` is used by lightlike terms that do not set their own.
    pub fn build(&self, default_kappa: Option<f64>) -> Result<SpinorField, FieldError> {
        match self {
            FieldShape::Separable { u, amplitude } => Ok(SpinorField::separable(
                Bispinor(u.map(Complex64::from)),
                amplitude.build()?,
            )),
            FieldShape::Componentwise { components } => {
                let built: Vec<ComplexScalarField> = components
                    .iter()
                    .map(AmplitudeDef::build)
                    .collect::<Result<_, _>>()?;
                let arr: [ComplexScalarField; 4] = built
                    .try_into()
                    .map_err(|_| FieldError::Definition("expected four components".into()))?;
                Ok(SpinorField::componentwise(arr))
            }
            FieldShape::Lightlike { kappa, f, g } => {
                let kappa = kappa.or(default_kappa).ok_or_else(|| {
                    FieldError::Definition("lightlike field needs `kappa`".into())
                })?;
                Ok(SpinorField::Lightlike(LightlikeFamily::new(
                    kappa,
                    parse(f)?,
                    parse(g)?,
                )?))
            }
            FieldShape::Superposition { terms } => superpose(
                terms
                    .iter()
                    .map(|t| t.build(default_kappa))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        }
    }
}

/// A field shape plus the parameter table its expressions refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDefinition {
    #[serde(flatten)]
    pub shape: FieldShape,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl FieldDefinition {
    /// Builds the field and its bindings. `kappa`, when given, is bound as the
    /// parameter `kappa` unless the table already sets it, and is the default
    /// mass of lightlike terms. Every free parameter must end up bound.
    pub fn build(&self, kappa: Option<f64>) -> Result<(SpinorField, ParamBindings), FieldError> {
        let mut bindings = ParamBindings::new();
        if let Some(k) = kappa {
            bindings.insert("kappa", k)?;
        }
        for (name, value) in &self.params {
            bindings.insert(name.clone(), *value)?;
        }
        let field = self
            .shape
            .build(kappa.or(self.params.get("kappa").copied()))?;
        let unbound: Vec<String> = field
            .params()
            .into_iter()
            .filter(|p| !bindings.contains(p))
            .collect();
        if !unbound.is_empty() {
            return Err(FieldError::Definition(format!(
                "unbound parameters: {}",
                unbound.join(", ")
            )));
        }
        Ok((field, bindings))
    }
}
