//! Experiment configuration.
//!
//! One TOML file per run with four sections (`[measure]`, `[query]`,
//! `[engine]`, `[output]`) and an optional `[fit]`. Unknown keys are
//! rejected. After defaults are filled in the resolved config is serialized
//! back and embedded in every output file.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use symspin::measures::{DensityMeasure, DiscreteMeasure, IfsMeasure, SpinMeasure, TorusMeasure};
use symspin::scaling::{geometric_grid, CantorKernel, Engine, DEFAULT_TRUNCATION};
use symspin::{ProjectivePoint, RenyiOrder};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub measure: MeasureSpec,
    pub query: QuerySpec,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSpec>,
}

/// A complex vector given as separate real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexVector {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl ComplexVector {
    fn to_point(&self, what: &str) -> Result<ProjectivePoint, CliError> {
        if !self.im.is_empty() && self.im.len() != self.re.len() {
            return Err(CliError::config(format!(
                "{what}: re has {} entries but im has {}",
                self.re.len(),
                self.im.len()
            )));
        }
        let z: Vec<Complex64> = self
            .re
            .iter()
            .enumerate()
            .map(|(i, &re)| Complex64::new(re, self.im.get(i).copied().unwrap_or(0.0)))
            .collect();
        ProjectivePoint::canonicalize(&z).map_err(|e| CliError::config(format!("{what}: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureSpec {
    Discrete {
        atoms: Vec<Atom>,
    },
    Torus {
        p: Vec<f64>,
    },
    Density {
        #[serde(default = "default_density_kind")]
        kind: String,
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<ComplexVector>,
    },
    Cantor {
        #[serde(default = "default_cantor_depth")]
        depth: usize,
    },
}

fn default_density_kind() -> String {
    "uniform".into()
}

fn default_cantor_depth() -> usize {
    12
}

/// A Rényi order: a number, or `"inf"` for the single-copy entropy.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Number(f64),
    Text(String),
}

impl OrderSpec {
    fn resolve(&self) -> Result<RenyiOrder, CliError> {
        let order = match self {
            OrderSpec::Number(n) => RenyiOrder::new(*n),
            OrderSpec::Text(t) => t.parse::<RenyiOrder>(),
        };
        order.map_err(|e| CliError::config(format!("query.n: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: u64,
    pub hi: u64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    pub n: Vec<OrderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Exact,
    Quadrature,
    Mc,
    Asymptotic,
    Dicke,
    Ifs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSpec {
    Exact,
    Gaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSpec {
    pub kind: EngineKind,
    pub seed: u64,
    pub samples: u64,
    /// Torus trapezoid points; 0 selects the exact rule for each m.
    pub grid_points: usize,
    pub n_sites: u64,
    pub level: usize,
    pub kernel: KernelSpec,
    pub truncation: f64,
}

impl Default for EngineSpec {
    fn default() -> Self {
        Self {
            kind: EngineKind::Exact,
            seed: 0,
            samples: 100_000,
            grid_points: 0,
            n_sites: 1_000_000_000,
            level: 12,
            kernel: KernelSpec::Exact,
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// CSV destination; standard output when empty.
    pub csv: String,
    /// JSON metadata destination; next to the CSV (`.json`) when empty.
    pub json: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[u64; 2]>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    /// The config with every default written out, as TOML.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn measure(&self) -> Result<SpinMeasure, CliError> {
        let measure = match &self.measure {
            MeasureSpec::Discrete { atoms } => {
                let atoms = atoms
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let v = ComplexVector {
                            re: a.re.clone(),
                            im: a.im.clone(),
                        };
                        Ok((v.to_point(&format!("measure.atoms[{i}]"))?, a.weight))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                SpinMeasure::Discrete(
                    DiscreteMeasure::new(atoms).map_err(|e| CliError::config(format!("measure: {e}")))?,
                )
            }
            MeasureSpec::Torus { p } => SpinMeasure::Torus(
                TorusMeasure::new(p.clone()).map_err(|e| CliError::config(format!("measure.p: {e}")))?,
            ),
            MeasureSpec::Density {
                kind,
                dim,
                kappa,
                center,
            } => {
                let density = match kind.as_str() {
                    "uniform" => DensityMeasure::uniform(*dim),
                    "coherent" => {
                        let center = center
                            .as_ref()
                            .ok_or_else(|| CliError::config("measure.center is required for kind = \"coherent\""))?
                            .to_point("measure.center")?;
                        if center.dim() != *dim {
                            return Err(CliError::config(format!(
                                "measure.center has D = {} but measure.dim = {dim}",
                                center.dim()
                            )));
                        }
                        let kappa = kappa
                            .ok_or_else(|| CliError::config("measure.kappa is required for kind = \"coherent\""))?;
                        DensityMeasure::coherent_bump(center, kappa)
                    }
                    other => {
                        return Err(CliError::config(format!(
                            "measure.kind: unknown density kind {other:?}"
                        )))
                    }
                };
                SpinMeasure::Density(density.map_err(|e| CliError::config(format!("measure: {e}")))?)
            }
            MeasureSpec::Cantor { depth } => SpinMeasure::Ifs(IfsMeasure::cantor(*depth)),
        };
        Ok(measure)
    }

    pub fn orders(&self) -> Result<Vec<RenyiOrder>, CliError> {
        if self.query.n.is_empty() {
            return Err(CliError::config("query.n: at least one order is required"));
        }
        self.query.n.iter().map(OrderSpec::resolve).collect()
    }

    pub fn m_grid(&self) -> Result<Vec<u64>, CliError> {
        match (&self.query.m, &self.query.grid) {
            (Some(m), None) => {
                if m.is_empty() || m.windows(2).any(|w| w[1] <= w[0]) || m[0] == 0 {
                    return Err(CliError::config(
                        "query.m: need a strictly increasing list of positive integers",
                    ));
                }
                Ok(m.clone())
            }
            (None, Some(g)) => {
                if g.lo == 0 || g.hi < g.lo || g.count == 0 {
                    return Err(CliError::config("query.grid: need 0 < lo <= hi and count >= 1"));
                }
                Ok(geometric_grid(g.lo, g.hi, g.count))
            }
            _ => Err(CliError::config("query: give exactly one of m = [...] or [query.grid]")),
        }
    }

    pub fn engine(&self) -> Engine {
        let e = &self.engine;
        match e.kind {
            EngineKind::Exact => Engine::ExactTransfer,
            EngineKind::Quadrature => Engine::TorusQuadrature {
                grid_points: (e.grid_points > 0).then_some(e.grid_points),
            },
            EngineKind::Mc => Engine::MonteCarlo {
                samples: e.samples,
                seed: e.seed,
            },
            EngineKind::Asymptotic => Engine::Asymptotic,
            EngineKind::Dicke => Engine::DickeExact { n_sites: e.n_sites },
            EngineKind::Ifs => Engine::IfsKernel {
                level: e.level,
                kernel: match e.kernel {
                    KernelSpec::Exact => CantorKernel::ExactOverlap,
                    KernelSpec::Gaussian => CantorKernel::Gaussian,
                },
                truncation: e.truncation,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_is_reported_with_location() {
        let err = ExperimentConfig::parse(
            "[measure]\nfamily = \"torus\"\np = [0.5, 0.5]\ncolour = 1\n[query]\nn = [2]\nm = [1]\n",
        )
        .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("colour"), "{text}");
        assert!(text.contains("line"), "{text}");
    }

    #[test]
    fn defaults_are_written_out() {
        let cfg = ExperimentConfig::parse(
            "[measure]\nfamily = \"torus\"\np = [0.5, 0.5]\n[query]\nn = [2, \"inf\"]\nm = [1, 2]\n",
        )
        .unwrap();
        let resolved = cfg.resolved_toml();
        assert!(resolved.contains("samples = 100000"), "{resolved}");
        assert!(resolved.contains("kind = \"exact\""), "{resolved}");
        let orders = cfg.orders().unwrap();
        assert_eq!(orders, vec![RenyiOrder::Finite(2.0), RenyiOrder::Infinite]);
        let again = ExperimentConfig::parse(&resolved).unwrap();
        assert_eq!(again.resolved_toml(), resolved);
    }
}
