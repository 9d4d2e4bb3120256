//! Experiment configuration: a TOML document validated before any computation.

use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};

use pqelab::noise::{EncodingConstants, NoiseModel, ProtocolConfig, SolverVariant, ZneConfig};
use pqelab::pqe::SolverConfig;
use pqelab::PqeSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSource {
    Fcidump {
        path: PathBuf,
    },
    /// One fixture per geometry point, e.g. a bond-length scan.
    FcidumpSweep {
        paths: Vec<PathBuf>,
    },
    Hubbard {
        sites: usize,
        t: f64,
        u: f64,
        nelec: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub kind: SolverVariant,
    pub f_pps: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            kind: SolverVariant::Pqe,
            f_pps: 1.0,
            max_iterations: s.max_iterations,
            tolerance: s.tolerance,
        }
    }
}

impl SolverSection {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
        }
    }

    /// Partition fraction actually used: conventional PQE always uses the full pool.
    pub fn effective_f_pps(&self) -> f64 {
        match self.kind {
            SolverVariant::Pqe => 1.0,
            _ => self.f_pps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub enabled: bool,
    pub p1: f64,
    pub p2: f64,
    pub shots: u64,
    pub trajectories: usize,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let m = NoiseModel::default();
        Self {
            enabled: false,
            p1: m.p1,
            p2: m.p2,
            shots: m.shots,
            trajectories: m.trajectories,
        }
    }
}

impl NoiseSection {
    pub fn model(&self) -> NoiseModel {
        NoiseModel {
            p1: self.p1,
            p2: self.p2,
            shots: self.shots,
            trajectories: self.trajectories,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: PathBuf,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            path: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    /// Target residue accuracy `ε` of the measurement bound.
    pub epsilon: f64,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self { epsilon: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSource,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub encoding: EncodingConstants,
    #[serde(default)]
    pub zne: ZneConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub report: ReportSection,
}

impl ExperimentConfig {
    /// Parses and validates; relative fixture paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).context("config schema violation")?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.system {
            SystemSource::Fcidump { path } => fix(path),
            SystemSource::FcidumpSweep { paths } => paths.iter_mut().for_each(fix),
            SystemSource::Hubbard { .. } => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.solver;
        ensure!(
            s.f_pps > 0.0 && s.f_pps <= 1.0,
            "solver.f_pps must lie in (0, 1], got {}",
            s.f_pps
        );
        ensure!(
            s.tolerance > 0.0,
            "solver.tolerance must be positive, got {}",
            s.tolerance
        );
        ensure!(s.max_iterations > 0, "solver.max_iterations must be positive");
        ensure!(self.report.epsilon > 0.0, "report.epsilon must be positive");
        self.noise.model().validate()?;
        self.zne.validate()?;
        self.protocol.validate()?;
        match &self.system {
            SystemSource::Fcidump { path } => ensure!(path.is_file(), "missing fixture {}", path.display()),
            SystemSource::FcidumpSweep { paths } => {
                ensure!(!paths.is_empty(), "system.paths is empty");
                for p in paths {
                    ensure!(p.is_file(), "missing fixture {}", p.display());
                }
            }
            SystemSource::Hubbard { sites, nelec, .. } => {
                ensure!(*sites >= 2, "a Hubbard chain needs at least two sites");
                ensure!(*nelec > 0 && *nelec < 2 * sites, "nelec must lie in 1..{}", 2 * sites);
            }
        }
        Ok(())
    }

    /// Labelled systems in run order.
    pub fn systems(&self) -> Result<Vec<(String, PqeSystem)>> {
        let load = |p: &Path| -> Result<(String, PqeSystem)> {
            let label = p
                .file_stem()
                .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            let sys = PqeSystem::from_fcidump(p).with_context(|| format!("loading {}", p.display()))?;
            Ok((label, sys))
        };
        match &self.system {
            SystemSource::Fcidump { path } => Ok(vec![load(path)?]),
            SystemSource::FcidumpSweep { paths } => paths.iter().map(|p| load(p)).collect(),
            SystemSource::Hubbard { sites, t, u, nelec } => {
                let sys = PqeSystem::hubbard(*sites, *t, *u, *nelec)?;
                Ok(vec![(format!("hubbard{sites}"), sys)])
            }
        }
    }

    pub fn apply_overrides(&mut self, out: Option<PathBuf>, format: Option<Format>, seed: Option<u64>) {
        if let Some(p) = out {
            self.output.path = p;
        }
        if let Some(f) = format {
            self.output.format = f;
        }
        if let Some(s) = seed {
            self.protocol.base_seed = s;
        }
    }
}
