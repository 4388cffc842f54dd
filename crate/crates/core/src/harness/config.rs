//! Run configuration files (TOML, or JSON when the text starts with `{`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{DtPolicy, ErrorMode, ProblemSpec};
use crate::solver::SolverConfig;
use crate::spaces::Scheme;

use super::registry::lookup;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub problem: Option<String>,
    pub scheme: Option<Scheme>,
    pub grids: Option<Vec<usize>>,
    pub dt: Option<f64>,
    pub gamma: Option<f64>,
    pub final_time: Option<f64>,
    pub n_ref: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub out_dir: Option<PathBuf>,
    pub vtk: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub solver: SolverConfig,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse {
                what: "JSON configuration",
                detail: e.to_string(),
            })?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse {
                what: "TOML configuration",
                detail: e.to_string(),
            })?
        };
        cfg.solver.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Looks up the named problem and applies the overrides of `[run]`.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let name = self
            .run
            .problem
            .as_deref()
            .ok_or_else(|| Error::invalid("no problem given"))?;
        let mut p = lookup(name)?;
        self.run.apply(&mut p);
        p.validate()?;
        Ok(p)
    }
}

impl RunSection {
    pub fn apply(&self, p: &mut ProblemSpec) {
        if let Some(s) = self.scheme {
            *p = p.with_scheme(s);
        }
        if let Some(g) = &self.grids {
            p.grids = g.clone();
        }
        if let Some(dt) = self.dt {
            p.dt = DtPolicy::Fixed(dt);
        }
        if let Some(g) = self.gamma {
            p.gamma = g;
        }
        if let Some(t) = self.final_time {
            p.final_time = t;
        }
        if let (Some(n), ErrorMode::Reference { .. }) = (self.n_ref, p.mode) {
            p.mode = ErrorMode::Reference { n_ref: Some(n) };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::PreconditionerKind;

    #[test]
    fn toml_overrides() {
        let cfg = RunConfig::parse(
            r#"
            [run]
            problem = "dg_pumped_2d"
            grids = [4, 8]
            gamma = 20.0
            n_ref = 32

            [solver]
            preconditioner = "jacobi"
            newton_max_iter = 30

            [output]
            vtk = true
            "#,
        )
        .unwrap();
        assert_eq!(cfg.solver.preconditioner, PreconditionerKind::Jacobi);
        assert!(cfg.output.vtk);
        let p = cfg.problem().unwrap();
        assert_eq!(p.grids, vec![4, 8]);
        assert_eq!(p.gamma, 20.0);
        assert_eq!(p.mode, ErrorMode::Reference { n_ref: Some(32) });
    }

    #[test]
    fn json_and_errors() {
        let cfg = RunConfig::parse(r#"{"run": {"problem": "cfem_damped_2d", "dt": 0.02}}"#).unwrap();
        assert_eq!(cfg.problem().unwrap().dt, DtPolicy::Fixed(0.02));
        assert!(RunConfig::parse("[run]\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("[solver]\nnewton_max_iter = 0\n").is_err());
        assert!(RunConfig::default().problem().is_err());
    }
}
