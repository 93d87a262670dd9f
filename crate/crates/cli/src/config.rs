//! Experiment configuration: one strict JSON document.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use qnd_core::analysis::{AxisRange, Grid};
use qnd_core::linalg::{ComplexMatrix, DensityMatrix};
use qnd_core::rng::RngStream;
use qnd_core::{DecoherenceParams64, DensityMatrix64, PhotonBoxParams64};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Validate,
    Simulate,
    RegionScan,
    DecoherenceRun,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Validate => "validate",
            Experiment::Simulate => "simulate",
            Experiment::RegionScan => "region-scan",
            Experiment::DecoherenceRun => "decoherence-run",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when present it must agree with the subcommand.
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub photon_box: PhotonBoxParams64,
    /// Overrides applied to `photon_box` for the estimated filter.
    pub estimated: Option<EstimatedParams>,
    pub decoherence: Option<DecoherenceParams64>,
    #[serde(default)]
    pub trajectory: TrajectoryBlock,
    pub grid: Option<GridBlock>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatedParams {
    pub p0: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub phi0: Option<f64>,
    pub phi_r: Option<f64>,
    pub eps_d: Option<f64>,
    pub eta_g: Option<f64>,
    pub eta_e: Option<f64>,
}

impl EstimatedParams {
    pub fn apply(&self, base: &PhotonBoxParams64) -> PhotonBoxParams64 {
        let mut p = *base;
        let slots = [
            (self.p0, &mut p.p0),
            (self.p1, &mut p.p1),
            (self.p2, &mut p.p2),
            (self.phi0, &mut p.phi0),
            (self.phi_r, &mut p.phi_r),
            (self.eps_d, &mut p.eps_d),
            (self.eta_g, &mut p.eta_g),
            (self.eta_e, &mut p.eta_e),
        ];
        for (v, slot) in slots {
            if let Some(v) = v {
                *slot = v;
            }
        }
        p
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryBlock {
    pub steps: usize,
    pub seed: u64,
    /// Defaults to 1 for `simulate` and 20 for `decoherence-run`.
    pub n_samples: Option<usize>,
    pub true_initial: InitialStateSpec,
    pub estimated_initial: InitialStateSpec,
    /// Least-squares window `[n0, n1]`; defaults to `[steps / 4, steps]`.
    pub rate_window: Option<[usize; 2]>,
}

impl Default for TrajectoryBlock {
    fn default() -> Self {
        Self {
            steps: 2000,
            seed: 0,
            n_samples: None,
            true_initial: InitialStateSpec::RandomPure { seed: None },
            estimated_initial: InitialStateSpec::MaximallyMixed,
            rate_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialStateSpec {
    Fock { n: usize },
    MaximallyMixed,
    /// Normalized vector of standard-normal complex entries. Without a seed,
    /// sample `k` of a run seeded `s` draws from `s + k`; with one, from `seed + k`.
    RandomPure { seed: Option<u64> },
    /// Row-major `[re, im]` entries.
    Explicit { matrix: Vec<Vec<[f64; 2]>> },
}

impl InitialStateSpec {
    pub fn resolve(&self, dim: usize, run_seed: u64, sample: usize) -> Result<DensityMatrix64> {
        let state = match self {
            InitialStateSpec::Fock { n } => {
                if *n >= dim {
                    bail!("fock state {n} outside the truncated space of dimension {dim}");
                }
                DensityMatrix::basis_state(dim, *n)?
            }
            InitialStateSpec::MaximallyMixed => DensityMatrix::maximally_mixed(dim),
            InitialStateSpec::RandomPure { seed } => {
                let s = seed.unwrap_or(run_seed).wrapping_add(sample as u64);
                DensityMatrix::random_pure(dim, &mut RngStream::new(s))?
            }
            InitialStateSpec::Explicit { matrix } => {
                if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
                    bail!("explicit initial state must be {dim} x {dim}");
                }
                let m = ComplexMatrix::from_fn(dim, dim, |r, c| {
                    let [re, im] = matrix[r][c];
                    num_complex::Complex::new(re, im)
                });
                DensityMatrix::new(m)?
            }
        };
        Ok(state)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default = "default_phi0_range")]
    pub phi0_range: [f64; 2],
    #[serde(default = "default_phi_r_range")]
    pub phi_r_range: [f64; 2],
    /// Nodes per axis, `[phi0, phiR]`.
    #[serde(default = "default_resolution")]
    pub resolution: [usize; 2],
}

fn default_phi0_range() -> [f64; 2] {
    let g = Grid::<f64>::default_window();
    [g.phi0.lo, g.phi0.hi]
}

fn default_phi_r_range() -> [f64; 2] {
    let g = Grid::<f64>::default_window();
    [g.phi_r.lo, g.phi_r.hi]
}

fn default_resolution() -> [usize; 2] {
    let g = Grid::<f64>::default_window();
    [g.phi0.n, g.phi_r.n]
}

impl GridBlock {
    pub fn grid(&self) -> Result<Grid<f64>> {
        if self.resolution.contains(&0) {
            bail!("grid resolution must be positive on both axes");
        }
        if self.phi0_range.iter().chain(&self.phi_r_range).any(|v| !v.is_finite()) {
            bail!("grid ranges must be finite");
        }
        Ok(Grid {
            phi0: AxisRange::new(self.phi0_range[0], self.phi0_range[1], self.resolution[0]),
            phi_r: AxisRange::new(self.phi_r_range[0], self.phi_r_range[1], self.resolution[1]),
        })
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("invalid config")?;
        Ok(cfg)
    }

    pub fn estimated_params(&self) -> Option<PhotonBoxParams64> {
        self.estimated.map(|e| e.apply(&self.photon_box))
    }

    /// Validates the parameter blocks and that `kind` has what it needs.
    pub fn check(&self, kind: Experiment) -> Result<()> {
        if let Some(declared) = self.experiment {
            if declared != kind {
                bail!("config declares experiment {:?} but {:?} was requested", declared.name(), kind.name());
            }
        }
        self.photon_box.validate().context("photon_box")?;
        if let Some(est) = self.estimated_params() {
            est.validate().context("estimated")?;
        }
        if let Some(dec) = &self.decoherence {
            dec.validate().context("decoherence")?;
        }
        match kind {
            Experiment::Simulate if self.decoherence.is_some() => {
                bail!("simulate runs the QND model; use decoherence-run with a decoherence block")
            }
            Experiment::DecoherenceRun if self.decoherence.is_none() => {
                bail!("decoherence-run needs a decoherence block")
            }
            Experiment::RegionScan if self.grid.is_none() => bail!("region-scan needs a grid block"),
            _ => {}
        }
        if let Some(g) = &self.grid {
            g.grid().context("grid")?;
        }
        if matches!(kind, Experiment::Simulate | Experiment::DecoherenceRun) {
            let t = &self.trajectory;
            if t.n_samples == Some(0) {
                bail!("trajectory.n_samples must be at least 1");
            }
            if let Some([n0, n1]) = t.rate_window {
                if n1 < n0 + 2 || n1 > t.steps {
                    bail!("trajectory.rate_window [{n0}, {n1}] needs n1 - n0 >= 2 and n1 <= steps");
                }
            }
            let d = self.photon_box.dim();
            t.true_initial.resolve(d, t.seed, 0).context("trajectory.true_initial")?;
            t.estimated_initial.resolve(d, t.seed, 0).context("trajectory.estimated_initial")?;
        }
        Ok(())
    }
}
