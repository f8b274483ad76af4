//! TOML run configuration.
//!
//! ```toml
//! [net]
//! lower = [-1.0, -1.0]
//! upper = [1.0, 1.0]
//! cells = [4, 4]            # or: knots = [[-1, -0.5, 0, 0.5, 1], ...]
//!
//! [fields]
//! f = "exp(-x1^2 - x2^2)"
//! alpha = "0.2"
//! # s = "..."               # exactly one of `s` and [operator]
//!
//! [operator]
//! kind = "multiplication"   # or "blend" with `t`
//! b = "x1^2*x2^2"
//!
//! [run]
//! resolution = [101, 101]
//! tolerance = 1e-9
//! ```
//!
//! A `[fif]` table with `delta` and node values `z` replaces `[fields]` for
//! δ-fractal interpolation functions.

use std::path::Path;
use std::sync::Arc;

use fractalis_core::fractal::{Admission, FifData};
use fractalis_core::operator::{FractalOperator, OperatorSpec};
use fractalis_core::{parse_field, Domain, FieldRef, FractalConfig, Net};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub net: NetSection,
    pub fields: Option<FieldsSection>,
    pub operator: Option<OperatorSection>,
    pub fif: Option<FifSection>,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub knots: Option<Vec<Vec<f64>>>,
    pub cells: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsSection {
    pub f: String,
    pub alpha: String,
    pub s: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKindName {
    Multiplication,
    Blend,
    InterpolantBlend,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub kind: OperatorKindName,
    pub b: Option<String>,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FifSection {
    pub delta: f64,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub resolution: Option<Vec<usize>>,
    pub tolerance: f64,
    pub p: Vec<f64>,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub margin: f64,
    pub admission_points: usize,
    pub max_degree: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            resolution: None,
            tolerance: 1e-9,
            p: vec![1.0, 2.0],
            epsilon: None,
            seed: 0,
            margin: 0.0,
            admission_points: 65,
            max_degree: 8,
        }
    }
}

/// What the configuration describes.
pub enum Model {
    Alpha(AlphaModel),
    Fif(FifData),
}

pub struct AlphaModel {
    pub net: Net,
    pub f: FieldRef,
    pub alpha: FieldRef,
    pub base: Base,
    pub admission: Admission,
}

pub enum Base {
    Explicit(FieldRef),
    Operator(OperatorSpec),
}

impl AlphaModel {
    /// Fails with an analytic error when α is inadmissible or `s` misses a
    /// corner.
    pub fn config(&self) -> Result<FractalConfig, CliError> {
        let cfg = match &self.base {
            Base::Explicit(s) => FractalConfig::new(
                self.net.clone(),
                self.f.clone(),
                self.alpha.clone(),
                s.clone(),
                self.admission,
            ),
            Base::Operator(op) => FractalConfig::with_operator(
                self.net.clone(),
                self.f.clone(),
                self.alpha.clone(),
                op.clone(),
                self.admission,
            ),
        };
        cfg.map_err(CliError::analytic)
    }

    pub fn operator(&self) -> Option<&OperatorSpec> {
        match &self.base {
            Base::Operator(op) => Some(op),
            Base::Explicit(_) => None,
        }
    }

    pub fn fractal_operator(&self, op: &OperatorSpec) -> Result<FractalOperator, CliError> {
        FractalOperator::new(self.net.clone(), self.alpha.clone(), op.clone(), self.admission)
            .map_err(CliError::analytic)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::usage(format!("invalid configuration: {e}")))
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        Domain::new(self.net.lower.clone(), self.net.upper.clone()).map_err(CliError::config)
    }

    pub fn net(&self) -> Result<Net, CliError> {
        let domain = self.domain()?;
        let net = match (&self.net.knots, &self.net.cells) {
            (Some(knots), None) => Net::build(domain, knots.clone()),
            (None, Some(cells)) => Net::uniform(domain, cells),
            _ => {
                return Err(CliError::usage(
                    "[net] needs exactly one of `knots` and `cells`",
                ))
            }
        }
        .map_err(CliError::config)?;
        net.check_contractive().map_err(CliError::config)?;
        Ok(net)
    }

    fn field(&self, name: &str, source: &str, arity: usize) -> Result<FieldRef, CliError> {
        parse_field(source, arity)
            .map(|e| Arc::new(e) as FieldRef)
            .map_err(|e| CliError::usage(format!("expression `{name}` = \"{source}\": {e}")))
    }

    pub fn operator_spec(&self, net: &Net) -> Result<Option<OperatorSpec>, CliError> {
        let Some(section) = &self.operator else {
            return Ok(None);
        };
        let spec = match section.kind {
            OperatorKindName::Multiplication => {
                let source = section
                    .b
                    .as_deref()
                    .ok_or_else(|| CliError::usage("multiplication operator needs `b`"))?;
                let b = self.field("b", source, net.dim())?;
                OperatorSpec::multiplication(b, net, self.run.admission_points)
            }
            OperatorKindName::Blend | OperatorKindName::InterpolantBlend => {
                let t = section
                    .t
                    .ok_or_else(|| CliError::usage("blend operator needs `t`"))?;
                OperatorSpec::blend(t)
            }
        };
        spec.map(Some).map_err(CliError::config)
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let net = self.net()?;
        match (&self.fields, &self.fif) {
            (Some(fields), None) => {
                let k = net.dim();
                let f = self.field("f", &fields.f, k)?;
                let alpha = self.field("alpha", &fields.alpha, k)?;
                let base = match (&fields.s, self.operator_spec(&net)?) {
                    (Some(s), None) => Base::Explicit(self.field("s", s, k)?),
                    (None, Some(op)) => Base::Operator(op),
                    _ => {
                        return Err(CliError::usage(
                            "give exactly one of `fields.s` and an [operator] table",
                        ))
                    }
                };
                Ok(Model::Alpha(AlphaModel {
                    net,
                    f,
                    alpha,
                    base,
                    admission: self.admission(),
                }))
            }
            (None, Some(fif)) => {
                if self.operator.is_some() {
                    return Err(CliError::usage("[operator] does not apply to [fif]"));
                }
                FifData::new(net, fif.z.clone(), fif.delta)
                    .map(Model::Fif)
                    .map_err(CliError::config)
            }
            _ => Err(CliError::usage("give exactly one of [fields] and [fif]")),
        }
    }

    pub fn admission(&self) -> Admission {
        Admission {
            points_per_axis: self.run.admission_points,
            margin: self.run.margin,
        }
    }

    /// Explicit resolution, else the configured one, else 101 per axis.
    pub fn resolution(&self, flag: Option<&[usize]>, dim: usize) -> Result<Vec<usize>, CliError> {
        let r = flag
            .map(<[usize]>::to_vec)
            .or_else(|| self.run.resolution.clone())
            .unwrap_or_else(|| vec![101; dim]);
        match r.len() {
            1 => Ok(vec![r[0]; dim]),
            n if n == dim => Ok(r),
            n => Err(CliError::usage(format!(
                "resolution has {n} entries for a {dim}-dimensional box"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG: &str = r#"
[net]
lower = [-1.0, -1.0]
upper = [1.0, 1.0]
cells = [4, 4]

[fields]
f = "exp(-x1^2 - x2^2)"
alpha = "0.2"

[operator]
kind = "multiplication"
b = "x1^2*x2^2"
"#;

    #[test]
    fn parses_operator_mode() {
        let cfg = RunConfig::parse(FIG).unwrap();
        let Model::Alpha(model) = cfg.model().unwrap() else {
            panic!("expected alpha mode")
        };
        assert_eq!(model.net.node_count(), 25);
        assert!(model.operator().is_some());
        assert_eq!(cfg.resolution(None, 2).unwrap(), vec![101, 101]);
        assert_eq!(cfg.resolution(Some(&[11]), 2).unwrap(), vec![11, 11]);
    }

    #[test]
    fn rejects_base_and_operator_together() {
        let text = FIG.replace("alpha = \"0.2\"", "alpha = \"0.2\"\ns = \"0\"");
        assert_eq!(RunConfig::parse(&text).unwrap().model().err().unwrap().code(), 2);
    }

    #[test]
    fn bad_expression_is_a_usage_error() {
        let text = FIG.replace("0.2", "0.2 +* x1");
        let err = RunConfig::parse(&text).unwrap().model().err().unwrap();
        assert_eq!(err.code(), 2);
        assert!(err.to_string().contains("position"));
    }

    #[test]
    fn fif_mode() {
        let text = "[net]\nlower=[0.0]\nupper=[1.0]\nknots=[[0.0,0.5,1.0]]\n[fif]\ndelta=0.5\nz=[0.0,0.5,1.0]\n";
        assert!(matches!(RunConfig::parse(text).unwrap().model().unwrap(), Model::Fif(_)));
    }
}
