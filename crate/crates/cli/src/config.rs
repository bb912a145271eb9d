//! Declarative experiment configuration.
//!
//! The format is strict TOML: unknown keys are rejected, since silent typos
//! in physics parameters are the dominant failure mode. A resolved config
//! plus a seed fully determines every output byte.

use anyhow::{anyhow, bail, Context, Result};
use idss_core::counting::{CountOptions, SurfaceModel};
use idss_core::disorder::{
    default_halo, CouplingLaw, EnvelopeKind, LongitudinalFactor, SingleSiteProfile,
};
use idss_core::hamiltonian::{ParallelGrid, ParallelModel, PotentialKind};
use idss_core::magnetic::{canonicalize_field, MagneticStructure};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelBlock,
    pub numerics: NumericsBlock,
    #[serde(default)]
    pub study: StudyBlock,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    /// Canonical block magnitudes of the field (empty or absent for B = 0).
    #[serde(default)]
    pub b: Vec<f64>,
    /// Kernel dimension n (d = 2m + n).
    pub n: usize,
    /// Alternatively, a full antisymmetric matrix (row-major rows).
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    pub parallel: ParallelBlock,
    #[serde(default)]
    pub profile: Option<ProfileBlock>,
    #[serde(default)]
    pub coupling: Option<CouplingBlock>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelBlock {
    /// "delta-well" | "square-well" | "harmonic" | "explicit"
    pub kind: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub depth: Option<f64>,
    #[serde(default)]
    pub well_half_width: Option<f64>,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(default)]
    pub essential_floor: Option<f64>,
    /// Longitudinal Dirichlet box half-width and spacing (grid solvers).
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default)]
    pub h: Option<f64>,
    /// Number of bound states to carry.
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_count() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileBlock {
    /// "power" | "gaussian" | "compact"
    pub envelope: String,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub inv_scale: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// "constant" | "indicator" | "gaussian"
    #[serde(default = "default_longitudinal")]
    pub longitudinal: String,
    #[serde(default)]
    pub long_half_width: Option<f64>,
    #[serde(default)]
    pub long_width: Option<f64>,
    #[serde(default)]
    pub long_center: Option<f64>,
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_longitudinal() -> String {
    "constant".into()
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingBlock {
    /// "uniform" | "power"
    pub kind: String,
    pub e0: f64,
    #[serde(default)]
    pub kappa: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsBlock {
    /// Window side ladder (one entry for a single-volume run).
    pub l: Vec<f64>,
    pub h: f64,
    #[serde(default)]
    pub halo: Option<i64>,
    #[serde(default)]
    pub tail_tol: Option<f64>,
    #[serde(default)]
    pub energies: Option<Vec<f64>>,
    #[serde(default)]
    pub energy_grid: Option<EnergyGrid>,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_realizations() -> usize {
    1
}

fn default_dense_cap() -> usize {
    4000
}

fn default_budget() -> usize {
    idss_core::hamiltonian::DEFAULT_DIMENSION_BUDGET
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StudyBlock {
    /// sandwich flavor: "global" | "ground-edge" | "internal-edge"
    #[serde(default)]
    pub kind: Option<String>,
    /// 1-based level index for edge studies.
    #[serde(default)]
    pub j: Option<usize>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub delta_minus: Option<f64>,
    #[serde(default)]
    pub delta_plus: Option<f64>,
    #[serde(default)]
    pub lambda_star: Option<f64>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub stat_tol: Option<f64>,
    /// Override the sup bound M (defaults to the computed one).
    #[serde(default)]
    pub m_override: Option<f64>,
    /// Ladder cap for the free-density command.
    #[serde(default)]
    pub cap: Option<f64>,
    /// Input curve file for the fit command.
    #[serde(default)]
    pub curve: Option<String>,
    /// "log-lambda" | "log-log-lambda"
    #[serde(default)]
    pub axis: Option<String>,
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
}

/// Everything a run needs, resolved from the config.
pub struct Resolved {
    pub field: MagneticStructure,
    pub parallel: ParallelModel,
    pub parallel_count: usize,
    pub profile: Option<SingleSiteProfile>,
    pub law: Option<CouplingLaw>,
    pub halo: i64,
    pub tail_tol: f64,
    pub energies: Vec<f64>,
    pub opts: CountOptions,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("config does not parse")?;
        Ok(cfg)
    }

    /// Canonical serialized form (feeds the output digest).
    pub fn canonical(&self, seed: u64) -> String {
        let mut body = toml::to_string(self).expect("config reserializes");
        body.push_str(&format!("\n# resolved seed = {seed}\n"));
        body
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let field = self.resolve_field()?;
        let (parallel, count) = self.resolve_parallel()?;
        let profile = self.resolve_profile()?;
        let law = self.resolve_law()?;
        let d = field.dim();
        let halo = match (self.numerics.halo, &profile) {
            (Some(h), _) => {
                if h < 0 {
                    bail!("halo must be non-negative");
                }
                h
            }
            (None, Some(p)) => default_halo(p, d),
            (None, None) => 0,
        };
        let tail_tol = self.numerics.tail_tol.unwrap_or(1e-6);
        let energies = self.resolve_energies()?;
        let opts = CountOptions {
            dense_cap: self.numerics.dense_cap,
            budget: self.numerics.budget,
            ..CountOptions::default()
        };
        Ok(Resolved {
            field,
            parallel,
            parallel_count: count,
            profile,
            law,
            halo,
            tail_tol,
            energies,
            opts,
        })
    }

    pub fn seed(&self, seed_override: Option<u64>) -> u64 {
        seed_override.unwrap_or(self.numerics.seed)
    }

    pub fn surface_model(&self) -> Result<SurfaceModel> {
        let r = self.resolve()?;
        let profile = r
            .profile
            .ok_or_else(|| anyhow!("this command needs [model.profile]"))?;
        let law = r
            .law
            .ok_or_else(|| anyhow!("this command needs [model.coupling]"))?;
        Ok(SurfaceModel {
            field: r.field,
            parallel: r.parallel,
            parallel_count: r.parallel_count,
            profile,
            law,
            halo: r.halo,
            tail_tol: r.tail_tol,
        })
    }

    fn resolve_field(&self) -> Result<MagneticStructure> {
        if let Some(rows) = &self.model.matrix {
            let d = rows.len();
            let mut flat = Vec::with_capacity(d * d);
            for row in rows {
                if row.len() != d {
                    bail!("model.matrix must be square");
                }
                flat.extend_from_slice(row);
            }
            return canonicalize_field(&flat, d).map_err(|e| anyhow!("model.matrix: {e}"));
        }
        if self.model.b.is_empty() {
            if self.model.n == 0 {
                bail!("model needs either b/n or matrix, with d = 2m + n >= 1");
            }
            return Ok(MagneticStructure::zero_field(self.model.n));
        }
        if self.model.b.iter().any(|x| *x <= 0.0) {
            bail!("model.b entries must be positive");
        }
        Ok(MagneticStructure::from_parts(
            self.model.b.clone(),
            self.model.n,
        ))
    }

    fn resolve_parallel(&self) -> Result<(ParallelModel, usize)> {
        let p = &self.model.parallel;
        let grid = || -> Result<ParallelGrid> {
            Ok(ParallelGrid {
                half_width: p
                    .half_width
                    .ok_or_else(|| anyhow!("model.parallel.half_width required for grid solvers"))?,
                h: p.h
                    .ok_or_else(|| anyhow!("model.parallel.h required for grid solvers"))?,
            })
        };
        let model = match p.kind.as_str() {
            "delta-well" => ParallelModel::DeltaWell {
                alpha: p
                    .alpha
                    .ok_or_else(|| anyhow!("model.parallel.alpha required for delta-well"))?,
                grid: grid()?,
            },
            "square-well" => ParallelModel::Potential {
                kind: PotentialKind::SquareWell {
                    depth: p
                        .depth
                        .ok_or_else(|| anyhow!("model.parallel.depth required for square-well"))?,
                    half_width: p.well_half_width.ok_or_else(|| {
                        anyhow!("model.parallel.well_half_width required for square-well")
                    })?,
                },
                grid: grid()?,
                essential_floor: p.essential_floor.unwrap_or(0.0),
            },
            "harmonic" => ParallelModel::Potential {
                kind: PotentialKind::Harmonic,
                grid: grid()?,
                essential_floor: p.essential_floor.unwrap_or(f64::INFINITY),
            },
            "explicit" => ParallelModel::Explicit {
                levels: p
                    .levels
                    .clone()
                    .ok_or_else(|| anyhow!("model.parallel.levels required for explicit"))?,
                essential_floor: p
                    .essential_floor
                    .ok_or_else(|| anyhow!("model.parallel.essential_floor required for explicit"))?,
            },
            other => bail!("unknown parallel kind '{other}'"),
        };
        Ok((model, p.count))
    }

    fn resolve_profile(&self) -> Result<Option<SingleSiteProfile>> {
        let Some(p) = &self.model.profile else {
            return Ok(None);
        };
        let envelope = match p.envelope.as_str() {
            "power" => EnvelopeKind::PowerLaw {
                kappa: p
                    .kappa
                    .ok_or_else(|| anyhow!("model.profile.kappa required for power"))?,
                amplitude: p.amplitude,
            },
            "gaussian" => EnvelopeKind::Gaussian {
                beta: p.beta.unwrap_or(2.0),
                amplitude: p.amplitude,
                inv_scale: p.inv_scale.unwrap_or(1.0),
            },
            "compact" => EnvelopeKind::Compact {
                radius: p
                    .radius
                    .ok_or_else(|| anyhow!("model.profile.radius required for compact"))?,
                amplitude: p.amplitude,
            },
            other => bail!("unknown envelope '{other}'"),
        };
        let longitudinal = match p.longitudinal.as_str() {
            "constant" => LongitudinalFactor::Constant,
            "indicator" => LongitudinalFactor::Indicator {
                half_width: p
                    .long_half_width
                    .ok_or_else(|| anyhow!("model.profile.long_half_width required"))?,
            },
            "gaussian" => LongitudinalFactor::Gaussian {
                width: p
                    .long_width
                    .ok_or_else(|| anyhow!("model.profile.long_width required"))?,
                center: p.long_center.unwrap_or(0.0),
            },
            other => bail!("unknown longitudinal factor '{other}'"),
        };
        Ok(Some(SingleSiteProfile::new(envelope, longitudinal)))
    }

    fn resolve_law(&self) -> Result<Option<CouplingLaw>> {
        let Some(c) = &self.model.coupling else {
            return Ok(None);
        };
        if c.e0 < 0.0 {
            bail!("model.coupling.e0 must be non-negative");
        }
        let law = match c.kind.as_str() {
            "uniform" => CouplingLaw::uniform(c.e0),
            "power" => CouplingLaw::power(
                c.kappa
                    .ok_or_else(|| anyhow!("model.coupling.kappa required for power"))?,
                c.e0,
            ),
            other => bail!("unknown coupling kind '{other}'"),
        };
        Ok(Some(law))
    }

    fn resolve_energies(&self) -> Result<Vec<f64>> {
        match (&self.numerics.energies, &self.numerics.energy_grid) {
            (Some(list), None) => {
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    bail!("numerics.energies must be strictly increasing");
                }
                Ok(list.clone())
            }
            (None, Some(g)) => {
                if g.points < 1 || g.stop <= g.start {
                    bail!("numerics.energy_grid needs stop > start and points >= 1");
                }
                Ok((0..g.points)
                    .map(|k| {
                        if g.points == 1 {
                            g.start
                        } else {
                            g.start + (g.stop - g.start) * k as f64 / (g.points - 1) as f64
                        }
                    })
                    .collect())
            }
            (Some(_), Some(_)) => bail!("give numerics.energies or numerics.energy_grid, not both"),
            (None, None) => Ok(Vec::new()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
b = [1.0]
n = 0

[model.parallel]
kind = "explicit"
levels = [-1.0]
essential_floor = 0.0

[numerics]
l = [8.0]
h = 0.25
energies = [-0.5, -0.2]
"#;

    #[test]
    fn minimal_config_parses_and_resolves() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.field.m(), 1);
        assert_eq!(r.energies.len(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("[numerics]", "[numerics]\nbogus_knob = 3");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(format!("{err:#}").contains("bogus_knob") || format!("{err:#}").contains("unknown"));
    }

    #[test]
    fn energy_grid_expansion() {
        let text = MINIMAL.replace(
            "energies = [-0.5, -0.2]",
            "energy_grid = { start = -1.0, stop = 0.0, points = 5 }",
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.energies.len(), 5);
        assert!((r.energies[1] + 0.75).abs() < 1e-12);
    }
}
