use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use opfold_core::exact::rational;
use opfold_core::measures::{hermite_moments, laguerre_moments, MomentFunctional, SobolevSpec};
use opfold_core::{Matrix, Rational};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

pub const TASKS: [&str; 12] = [
    "moments",
    "gram",
    "orthopoly",
    "recurrence",
    "connection",
    "darboux",
    "fold",
    "ttrr",
    "bispec-verify",
    "bispec-discover",
    "min-order",
    "conjugation",
];

fn dependencies(task: &str) -> &'static [&'static str] {
    match task {
        "gram" => &["moments"],
        "orthopoly" => &["gram"],
        "recurrence" | "fold" => &["orthopoly"],
        "connection" => &["recurrence"],
        "darboux" => &["connection", "fold"],
        "ttrr" => &["fold", "recurrence"],
        "bispec-verify" | "bispec-discover" | "min-order" | "conjugation" => &["fold"],
        _ => &[],
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureConfig {
    Laguerre { alpha: u64 },
    Hermite,
    Moments { moments: Vec<String> },
}

fn default_tolerance() -> String {
    "1e-10".into()
}

/// A single JSON run description.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub measure: MeasureConfig,
    pub c: String,
    #[serde(rename = "N")]
    pub order: usize,
    #[serde(rename = "M")]
    pub mass: Vec<Vec<String>>,
    pub n_max: usize,
    pub tasks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default = "default_tolerance")]
    pub float_tolerance: String,
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub center: Rational,
    pub mass: Matrix,
    pub tolerance: f64,
    /// Requested tasks plus their dependencies, in execution order.
    pub tasks: Vec<&'static str>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Laguerre `alpha = 0`, `c = 0`, `N = 1`, `M = diag(0, 1)`, all tasks.
    pub fn paper() -> Self {
        Self {
            measure: MeasureConfig::Laguerre { alpha: 0 },
            c: "0".into(),
            order: 1,
            mass: vec![vec!["0".into(), "0".into()], vec!["0".into(), "1".into()]],
            n_max: 12,
            tasks: vec!["all".into()],
            output: None,
            float_tolerance: default_tolerance(),
        }
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let bad = |m: String| ConfigError::Invalid(m);
        let center = rational::parse(&self.c).map_err(|e| bad(format!("c: {e}")))?;
        let size = self.order + 1;
        if self.mass.len() != size || self.mass.iter().any(|r| r.len() != size) {
            return Err(bad(format!("M must be {size}x{size}")));
        }
        let rows = self
            .mass
            .iter()
            .map(|r| r.iter().map(|v| rational::parse(v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("M: {e}")))?;
        let mass = Matrix::from_rows(rows);
        if !mass.is_symmetric() {
            return Err(bad("M is not symmetric".into()));
        }
        let tolerance: f64 = self
            .float_tolerance
            .parse()
            .ok()
            .filter(|t: &f64| t.is_finite() && *t > 0.0)
            .ok_or_else(|| bad(format!("float_tolerance {:?}", self.float_tolerance)))?;
        if self.n_max < 2 {
            return Err(bad("n_max must be at least 2".into()));
        }
        if let MeasureConfig::Moments { moments } = &self.measure {
            for m in moments {
                rational::parse(m).map_err(|e| bad(format!("moment: {e}")))?;
            }
        }
        if self.tasks.is_empty() {
            return Err(bad("no tasks".into()));
        }
        let mut wanted = BTreeSet::new();
        for t in &self.tasks {
            if t == "all" {
                wanted.extend(TASKS);
            } else if let Some(known) = TASKS.iter().find(|k| **k == t) {
                wanted.insert(*known);
            } else {
                return Err(bad(format!("unknown task {t:?}")));
            }
        }
        let mut closed = BTreeSet::new();
        let mut stack: Vec<&'static str> = wanted.into_iter().collect();
        while let Some(t) = stack.pop() {
            if closed.insert(t) {
                stack.extend(dependencies(t));
            }
        }
        let tasks = TASKS.iter().copied().filter(|t| closed.contains(t)).collect();
        let resolved = Resolved {
            config: self.clone(),
            center,
            mass,
            tolerance,
            tasks,
        };
        // surfaces a non-PSD mass before any task runs
        resolved.spec(2).map_err(|e| bad(e.to_string()))?;
        Ok(resolved)
    }
}

impl Resolved {
    pub fn moments(&self, count: usize) -> Result<MomentFunctional, ConfigError> {
        Ok(match &self.config.measure {
            MeasureConfig::Laguerre { alpha } => laguerre_moments(*alpha, count),
            MeasureConfig::Hermite => hermite_moments(count),
            MeasureConfig::Moments { moments } => {
                let values = moments
                    .iter()
                    .map(|m| rational::parse(m))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                MomentFunctional::new(values, "user moments")
            }
        })
    }

    pub fn spec(&self, count: usize) -> Result<SobolevSpec, ConfigError> {
        SobolevSpec::new(
            self.moments(count)?,
            self.center.clone(),
            self.config.order,
            self.mass.clone(),
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The configuration whose closed forms and order-8 operator are known.
    pub fn is_paper_case(&self) -> bool {
        let mut m = Matrix::zeros(2, 2);
        m[(1, 1)] = Rational::from_integer(1.into());
        self.config.measure == (MeasureConfig::Laguerre { alpha: 0 })
            && self.center == Rational::from_integer(0.into())
            && self.config.order == 1
            && self.mass == m
    }

    /// Plain Hermite weight at the origin, no mass.
    pub fn is_hermite_case(&self) -> bool {
        self.config.measure == MeasureConfig::Hermite
            && self.center == Rational::from_integer(0.into())
            && self.mass.is_zero()
    }

    pub fn block_size(&self) -> usize {
        self.config.order + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dependencies_are_closed_and_ordered() {
        let mut c = RunConfig::paper();
        c.tasks = vec!["bispec-verify".into()];
        let r = c.resolve().unwrap();
        assert_eq!(r.tasks, vec!["moments", "gram", "orthopoly", "fold", "bispec-verify"]);
        assert!(r.is_paper_case());
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::paper();
        c.mass[0][1] = "1".into();
        assert!(matches!(c.resolve(), Err(ConfigError::Invalid(m)) if m.contains("symmetric")));
        let mut c = RunConfig::paper();
        c.tasks = vec!["plot".into()];
        assert!(c.resolve().is_err());
        let mut c = RunConfig::paper();
        c.mass[1][1] = "-1".into();
        assert!(c.resolve().is_err());
    }

    #[test]
    fn parses_json() {
        let text = r#"{"measure": {"type": "laguerre", "alpha": 2}, "c": "1/2", "N": 1,
            "M": [["0", "0"], ["0", "1"]], "n_max": 6, "tasks": ["moments"]}"#;
        let c: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.float_tolerance, "1e-10");
        let r = c.resolve().unwrap();
        assert_eq!(r.tasks, vec!["moments"]);
        assert_eq!(r.center, rational::rat(1, 2));
    }
}
