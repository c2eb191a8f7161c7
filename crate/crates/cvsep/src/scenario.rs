//! Scenario documents: a state, an optional bath and search settings.
//!
//! Mode indices in scenarios are one-based, as in the printed tables.

use std::collections::BTreeMap;

use cvsep_core::analysis::AnalysisOptions;
use cvsep_core::channel::BathSpec;
use cvsep_core::separability::SepOptions;
use cvsep_core::states::{self, GfmsvParams, GwwParams, RandomKind, RandomSpec, SqueezeConvention};
use cvsep_core::symplectic::{Bipartition, CovMat};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Fmsv,
    Gfmsv,
    TmsvPair,
    Adesso,
    WernerWolf,
    Gww,
    RandomPure,
    RandomMixed,
}

impl StateKind {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_value(serde_json::Value::String(text.to_string()))
            .map_err(|_| CliError::Schema(format!("unknown state kind '{text}'")))
    }

    /// Accepted parameter names with their defaults (`None` = required).
    fn params(self) -> &'static [(&'static str, Option<f64>)] {
        match self {
            StateKind::Fmsv | StateKind::TmsvPair => &[("r", None)],
            StateKind::Gfmsv => &[
                ("r", None),
                ("theta1", None),
                ("theta2", None),
                ("theta3", None),
            ],
            StateKind::Adesso => &[("s", None), ("a", None)],
            StateKind::WernerWolf => &[],
            StateKind::Gww => &[
                ("A", None),
                ("B", None),
                ("C", None),
                ("D", None),
                ("E", None),
                ("F", None),
            ],
            StateKind::RandomPure => &[("modes", Some(4.0)), ("energy", Some(12.0))],
            StateKind::RandomMixed => &[("modes", Some(4.0))],
        }
    }

    fn is_random(self) -> bool {
        matches!(self, StateKind::RandomPure | StateKind::RandomMixed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    #[default]
    Rad,
    Deg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Fmsv,
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Substream of `seed` for random kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<AngleUnit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
}

impl StateSpec {
    pub fn new(kind: StateKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
            seed: None,
            index: None,
            unit: None,
            convention: None,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn param(&self, key: &str) -> CliResult<f64> {
        let default = self
            .kind
            .params()
            .iter()
            .find(|(k, _)| *k == key)
            .and_then(|(_, d)| *d);
        self.params
            .get(key)
            .copied()
            .or(default)
            .ok_or_else(|| CliError::Schema(format!("state '{}' needs parameter '{key}'", self.kind_name())))
    }

    fn kind_name(&self) -> String {
        serde_json::to_value(self.kind)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default()
    }

    fn check(&self) -> CliResult<()> {
        let known = self.kind.params();
        for (k, v) in &self.params {
            if !known.iter().any(|(n, _)| n == k) {
                return Err(CliError::Schema(format!(
                    "parameter '{k}' is not used by state '{}'",
                    self.kind_name()
                )));
            }
            if !v.is_finite() {
                return Err(CliError::Schema(format!("parameter '{k}' must be finite")));
            }
        }
        if self.unit.is_some() && self.kind != StateKind::Gfmsv {
            return Err(CliError::Schema("'unit' only applies to gfmsv angles".into()));
        }
        if self.convention.is_some() && self.kind != StateKind::Gfmsv {
            return Err(CliError::Schema("'convention' only applies to gfmsv".into()));
        }
        if self.kind.is_random() {
            if self.seed.is_none() {
                return Err(CliError::Schema("random states need a seed".into()));
            }
        } else if self.seed.is_some() || self.index.is_some() {
            return Err(CliError::Schema("'seed' and 'index' only apply to random states".into()));
        }
        Ok(())
    }

    fn angle(&self, key: &str) -> CliResult<f64> {
        let x = self.param(key)?;
        Ok(match self.unit.unwrap_or_default() {
            AngleUnit::Rad => x,
            AngleUnit::Deg => x.to_radians(),
        })
    }

    /// The random-ensemble description of a random state.
    pub fn random_spec(&self) -> CliResult<Option<RandomSpec>> {
        if !self.kind.is_random() {
            return Ok(None);
        }
        self.check()?;
        let modes = self.param("modes")?;
        if modes < 1.0 || modes.fract() != 0.0 {
            return Err(CliError::Schema("'modes' must be a positive integer".into()));
        }
        let kind = match self.kind {
            StateKind::RandomPure => RandomKind::PureHaar {
                energy: self.param("energy")?,
            },
            _ => RandomKind::MixedGoe,
        };
        Ok(Some(RandomSpec {
            modes: modes as usize,
            kind,
            seed: self.seed.unwrap_or_default(),
        }))
    }

    pub fn build(&self) -> CliResult<CovMat> {
        self.check()?;
        if let Some(spec) = self.random_spec()? {
            return Ok(spec.sample(self.index.unwrap_or(0))?);
        }
        let v = match self.kind {
            StateKind::Fmsv => states::fmsv(self.param("r")?)?,
            StateKind::TmsvPair => states::tmsv_pair(self.param("r")?)?,
            StateKind::Gfmsv => {
                let convention = match self.convention.unwrap_or_default() {
                    Convention::Fmsv => SqueezeConvention::Fmsv,
                    Convention::Printed => SqueezeConvention::Printed,
                };
                let p = GfmsvParams::new(
                    self.param("r")?,
                    self.angle("theta1")?,
                    self.angle("theta2")?,
                    self.angle("theta3")?,
                )
                .with_convention(convention);
                states::gfmsv(&p)?
            }
            StateKind::Adesso => states::adesso(self.param("s")?, self.param("a")?)?,
            StateKind::WernerWolf => states::werner_wolf(),
            StateKind::Gww => states::generalized_werner_wolf(&GwwParams {
                A: self.param("A")?,
                B: self.param("B")?,
                C: self.param("C")?,
                D: self.param("D")?,
                E: self.param("E")?,
                F: self.param("F")?,
            })?,
            StateKind::RandomPure | StateKind::RandomMixed => unreachable!(),
        };
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(rename = "N")]
    pub n_photons: f64,
    /// One-based noisy modes.
    pub modes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Regularized time for single-point commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl BathSection {
    pub fn to_spec(&self, modes: usize) -> CliResult<BathSpec> {
        let mut zero = Vec::with_capacity(self.modes.len());
        for &m in &self.modes {
            if m == 0 || m > modes {
                return Err(CliError::Schema(format!(
                    "bath mode {m} out of range 1..={modes}"
                )));
            }
            zero.push(m - 1);
        }
        let mut b = BathSpec::new(self.n_photons, &zero)?;
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(CliError::Schema("gamma must be a non-negative number".into()));
            }
            b = b.with_gamma(g);
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub state: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSection>,
    /// Cut filter such as `["12:34"]`; all cuts when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuts: Option<Vec<String>>,
}

impl Scenario {
    pub fn new(state: StateSpec) -> Self {
        Self {
            state,
            bath: None,
            search: None,
            cuts: None,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked without running an analysis.
    pub fn validate(&self) -> CliResult<()> {
        let v = self.state.build()?;
        if let Some(b) = &self.bath {
            b.to_spec(v.modes())?;
            if let Some(t) = b.tau {
                cvsep_core::channel::RegularizedTime::new(t)?;
            }
        }
        self.cut_filter(v.modes())?;
        self.analysis_options(SepOptions::default()).validate()?;
        Ok(())
    }

    pub fn bath_spec(&self, modes: usize) -> CliResult<Option<BathSpec>> {
        self.bath.as_ref().map(|b| b.to_spec(modes)).transpose()
    }

    pub fn require_bath(&self, modes: usize) -> CliResult<BathSpec> {
        self.bath_spec(modes)?
            .ok_or_else(|| CliError::Schema("this command needs a bath section".into()))
    }

    pub fn cut_filter(&self, modes: usize) -> CliResult<Option<Vec<Bipartition>>> {
        let Some(cuts) = &self.cuts else {
            return Ok(None);
        };
        if cuts.is_empty() {
            return Err(CliError::Schema("the cut filter is empty".into()));
        }
        let mut out = Vec::with_capacity(cuts.len());
        for c in cuts {
            let b = Bipartition::parse(modes, c)?;
            if !out.contains(&b) {
                out.push(b);
            }
        }
        Ok(Some(out))
    }

    pub fn analysis_options(&self, sep: SepOptions) -> AnalysisOptions {
        let mut o = AnalysisOptions {
            sep,
            ..AnalysisOptions::default()
        };
        if let Some(s) = &self.search {
            if let Some(t) = s.tol {
                o.tol = t;
            }
            if let Some(t) = s.tau_max {
                o.tau_max = t;
            }
            if let Some(t) = s.grid_step {
                o.grid_step = t;
            }
        }
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_document() {
        let s = Scenario::from_json(
            r#"{"state": {"kind": "gfmsv", "params": {"r": 0.6, "theta1": 45, "theta2": 30, "theta3": 30},
                "unit": "deg", "convention": "printed"},
               "bath": {"N": 4, "modes": [1, 3]},
               "search": {"tol": 0.001},
               "cuts": ["12:34"]}"#,
        )
        .unwrap();
        assert_eq!(s.bath_spec(4).unwrap().unwrap().noisy_modes(), [0, 2]);
        assert_eq!(s.cut_filter(4).unwrap().unwrap().len(), 1);
    }

    #[test]
    fn rejects_unknown_keys_and_params() {
        assert!(matches!(
            Scenario::from_json(r#"{"state": {"kind": "fmsv", "params": {"r": 0.6}}, "extra": 1}"#),
            Err(CliError::Schema(_))
        ));
        assert!(matches!(
            Scenario::from_json(r#"{"state": {"kind": "fmsv", "params": {"q": 0.6}}}"#),
            Err(CliError::Schema(_))
        ));
        assert!(matches!(
            Scenario::from_json(r#"{"state": {"kind": "fmsv", "params": {"r": 0.6}}, "bath": {"N": 4, "modes": [0]}}"#),
            Err(CliError::Schema(_))
        ));
        assert!(matches!(
            Scenario::from_json(r#"{"state": {"kind": "random-pure"}}"#),
            Err(CliError::Schema(_))
        ));
        assert!(matches!(
            Scenario::from_json(r#"{"state": {"kind": "werner-wolf"}, "bath": {"N": 4, "modes": [1], "tau": 1.0}}"#),
            Err(CliError::Schema(_))
        ));
    }

    #[test]
    fn degrees_and_radians_agree() {
        let deg = StateSpec {
            unit: Some(AngleUnit::Deg),
            ..StateSpec::new(StateKind::Gfmsv)
                .with("r", 0.6)
                .with("theta1", 45.0)
                .with("theta2", 30.0)
                .with("theta3", 10.0)
        };
        let rad = StateSpec::new(StateKind::Gfmsv)
            .with("r", 0.6)
            .with("theta1", 45f64.to_radians())
            .with("theta2", 30f64.to_radians())
            .with("theta3", 10f64.to_radians());
        assert!(deg.build().unwrap().max_abs_diff(&rad.build().unwrap()) < 1e-15);
    }

    #[test]
    fn serializes_back_to_the_same_document() {
        let text = r#"{"state":{"kind":"random-mixed","seed":7,"index":3},"bath":{"N":2.0,"modes":[2]}}"#;
        let s = Scenario::from_json(text).unwrap();
        let again = Scenario::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.state.build().unwrap(), again.state.build().unwrap());
    }
}
