//! Monte-Carlo sampling of the true trajectory and synchronous evolution of
//! estimated filters driven by the same outcome stream.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::channel::{ImperfectChannel, PointerBasis, DEGENERATE_WEIGHT};
use crate::error::{Error, Result};
use crate::export::format_float;
use crate::linalg::{fidelity, DensityMatrix};
use crate::rng::RngStream;
use crate::scalar::Real;

/// Filter weight below which the estimate has ruled out the observed outcome.
pub const COLLAPSE_WEIGHT: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct FilterSpec<T> {
    pub label: String,
    pub channel: ImperfectChannel<T>,
    pub initial: DensityMatrix<T>,
}

#[derive(Debug, Clone)]
pub struct TrajectoryConfig<T> {
    pub steps: usize,
    pub seed: u64,
    pub true_channel: ImperfectChannel<T>,
    pub true_initial: DensityMatrix<T>,
    pub filters: Vec<FilterSpec<T>>,
    /// Keep every density matrix in the record (memory grows with `steps`).
    pub keep_states: bool,
}

impl<T: Real> TrajectoryConfig<T> {
    pub fn new(steps: usize, seed: u64, true_channel: ImperfectChannel<T>, true_initial: DensityMatrix<T>) -> Self {
        Self {
            steps,
            seed,
            true_channel,
            true_initial,
            filters: Vec::new(),
            keep_states: false,
        }
    }

    pub fn with_filter(mut self, label: impl Into<String>, channel: ImperfectChannel<T>, initial: DensityMatrix<T>) -> Self {
        self.filters.push(FilterSpec {
            label: label.into(),
            channel,
            initial,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.true_channel.dim();
        if self.true_initial.dim() != d {
            return Err(Error::InvalidParameter(format!(
                "true initial state has dimension {} but the channel acts on {d}",
                self.true_initial.dim()
            )));
        }
        for f in &self.filters {
            if f.channel.dim() != d || f.initial.dim() != d {
                return Err(Error::InvalidParameter(format!("filter {} has mismatched dimension", f.label)));
            }
            if f.channel.outcomes() != self.true_channel.outcomes() {
                return Err(Error::AlphabetMismatch(format!(
                    "filter {} detects {:?}, true channel {:?}",
                    f.label,
                    f.channel.outcomes(),
                    self.true_channel.outcomes()
                )));
            }
        }
        Ok(())
    }
}

/// Samples `i ~ tr Phi_i(rho)` and returns `(i, Phi_i(rho) / tr Phi_i(rho))`.
pub fn step_true<T: Real>(
    ch: &ImperfectChannel<T>,
    rho: &DensityMatrix<T>,
    rng: &mut RngStream,
) -> Result<(usize, DensityMatrix<T>)> {
    let weights = ch.outcome_weights(rho.matrix())?;
    let total: T = weights.iter().copied().sum();
    if !(total >= T::lit(DEGENERATE_WEIGHT)) {
        return Err(Error::DegenerateChannel { total: total.as_f64() });
    }
    let w64: Vec<f64> = weights.iter().map(|w| w.as_f64()).collect();
    let i = rng.sample_index(&w64);
    let m = ch.phi_matrix(i, rho.matrix())?;
    Ok((i, DensityMatrix::from_unnormalized(m)))
}

/// Filter update for an observed outcome.
pub fn step_filter<T: Real>(
    ch: &ImperfectChannel<T>,
    rho_hat: &DensityMatrix<T>,
    observed: usize,
) -> Result<DensityMatrix<T>> {
    let (m, w) = ch.apply_phi(observed, rho_hat)?;
    if !(w >= T::lit(COLLAPSE_WEIGHT)) {
        return Err(Error::FilterCollapse {
            outcome: ch.outcomes()[observed].clone(),
            weight: w.as_f64(),
        });
    }
    Ok(DensityMatrix::from_unnormalized(m))
}

/// Per-step log of one run; index `n` runs over `0..=steps` (0 is the initial state).
#[derive(Debug, Clone)]
pub struct TrajectoryRecord<T> {
    pub seed: u64,
    pub outcome_labels: Vec<String>,
    pub filter_labels: Vec<String>,
    /// `outcomes[n]` drove the transition from `n` to `n + 1`.
    pub outcomes: Vec<usize>,
    /// `populations[n][alpha]`, present when a pointer basis was attached.
    pub populations: Option<Vec<Vec<T>>>,
    /// `filter_populations[f][n][alpha]`.
    pub filter_populations: Option<Vec<Vec<Vec<T>>>>,
    /// `fidelities[f][n] = F(rho_n, rhohat_n)`.
    pub fidelities: Vec<Vec<T>>,
    pub true_states: Option<Vec<DensityMatrix<T>>>,
    /// `filter_states[f][n]`.
    pub filter_states: Option<Vec<Vec<DensityMatrix<T>>>>,
}

fn argmax<T: Real>(v: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, x) in v.iter().enumerate() {
        match best {
            Some(b) if v[b] >= *x => {}
            _ => best = Some(i),
        }
    }
    best
}

impl<T: Real> TrajectoryRecord<T> {
    pub fn steps(&self) -> usize {
        self.outcomes.len()
    }

    pub fn filter_index(&self, label: &str) -> Option<usize> {
        self.filter_labels.iter().position(|l| l == label)
    }

    /// `argmax_alpha q_alpha` at the last step.
    pub fn final_true_pointer(&self) -> Option<usize> {
        self.populations.as_ref().and_then(|p| p.last()).and_then(|q| argmax(q))
    }

    pub fn final_filter_pointer(&self, filter: usize) -> Option<usize> {
        self.filter_populations
            .as_ref()
            .and_then(|p| p.get(filter))
            .and_then(|f| f.last())
            .and_then(|q| argmax(q))
    }

    pub fn final_fidelity(&self, filter: usize) -> Option<T> {
        self.fidelities.get(filter).and_then(|f| f.last()).copied()
    }

    /// CSV with columns `step, outcome, q_*`, then per filter `<label>_qhat_*`,
    /// `<label>_fidelity`. Row 0 is the initial state with an empty outcome.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.populations.as_ref().map(|p| p[0].len()).unwrap_or(0);
        let mut header = vec!["step".to_string(), "outcome".to_string()];
        header.extend((0..d).map(|a| format!("q_{a}")));
        for label in &self.filter_labels {
            header.extend((0..d).map(|a| format!("{label}_qhat_{a}")));
            header.push(format!("{label}_fidelity"));
        }
        writeln!(w, "{}", header.join(","))?;
        for n in 0..=self.steps() {
            let mut row = vec![n.to_string()];
            row.push(if n == 0 {
                String::new()
            } else {
                self.outcome_labels[self.outcomes[n - 1]].clone()
            });
            if let Some(p) = &self.populations {
                row.extend(p[n].iter().map(|x| format_float(x.as_f64())));
            }
            for f in 0..self.filter_labels.len() {
                if let Some(fp) = &self.filter_populations {
                    row.extend(fp[f][n].iter().map(|x| format_float(x.as_f64())));
                }
                row.push(format_float(self.fidelities[f][n].as_f64()));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

pub fn run<T: Real>(config: &TrajectoryConfig<T>, basis: Option<&PointerBasis<T>>) -> Result<TrajectoryRecord<T>> {
    run_from(config, config.seed, config.true_initial.clone(), basis)
}

fn run_from<T: Real>(
    config: &TrajectoryConfig<T>,
    seed: u64,
    true_initial: DensityMatrix<T>,
    basis: Option<&PointerBasis<T>>,
) -> Result<TrajectoryRecord<T>> {
    config.validate()?;
    if true_initial.dim() != config.true_channel.dim() {
        return Err(Error::InvalidParameter("initial state dimension mismatch".into()));
    }
    if let Some(b) = basis {
        if b.len() != config.true_channel.dim() {
            return Err(Error::InvalidParameter("pointer basis dimension mismatch".into()));
        }
    }
    let nf = config.filters.len();
    let mut rng = RngStream::new(seed);
    let mut rho = true_initial;
    let mut hats: Vec<DensityMatrix<T>> = config.filters.iter().map(|f| f.initial.clone()).collect();

    let mut outcomes = Vec::with_capacity(config.steps);
    let mut populations = basis.map(|_| Vec::with_capacity(config.steps + 1));
    let mut filter_populations = basis.map(|_| vec![Vec::with_capacity(config.steps + 1); nf]);
    let mut fidelities = vec![Vec::with_capacity(config.steps + 1); nf];
    let mut true_states = config.keep_states.then(Vec::new);
    let mut filter_states = config.keep_states.then(|| vec![Vec::new(); nf]);

    let mut log = |rho: &DensityMatrix<T>, hats: &[DensityMatrix<T>]| -> Result<()> {
        if let (Some(b), Some(p)) = (basis, populations.as_mut()) {
            p.push(b.populations(rho));
        }
        if let (Some(b), Some(fp)) = (basis, filter_populations.as_mut()) {
            for (f, h) in hats.iter().enumerate() {
                fp[f].push(b.populations(h));
            }
        }
        for (f, h) in hats.iter().enumerate() {
            fidelities[f].push(fidelity(rho, h)?);
        }
        if let Some(ts) = true_states.as_mut() {
            ts.push(rho.clone());
        }
        if let Some(fs) = filter_states.as_mut() {
            for (f, h) in hats.iter().enumerate() {
                fs[f].push(h.clone());
            }
        }
        Ok(())
    };

    log(&rho, &hats).map_err(|e| e.at_step(0))?;
    for n in 0..config.steps {
        let (i, next) = step_true(&config.true_channel, &rho, &mut rng).map_err(|e| e.at_step(n))?;
        rho = next;
        for (h, spec) in hats.iter_mut().zip(&config.filters) {
            *h = step_filter(&spec.channel, h, i).map_err(|e| e.at_step(n))?;
        }
        outcomes.push(i);
        log(&rho, &hats).map_err(|e| e.at_step(n + 1))?;
    }

    Ok(TrajectoryRecord {
        seed,
        outcome_labels: config.true_channel.outcomes().to_vec(),
        filter_labels: config.filters.iter().map(|f| f.label.clone()).collect(),
        outcomes,
        populations,
        filter_populations,
        fidelities,
        true_states,
        filter_states,
    })
}

/// Independent runs with seeds `seed + k`, ordered by sample index.
#[derive(Debug, Clone)]
pub struct Ensemble<T> {
    pub records: Vec<TrajectoryRecord<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary<T> {
    pub seed: u64,
    pub selected_pointer: Option<usize>,
    pub filter_pointers: Vec<Option<usize>>,
    pub final_fidelities: Vec<T>,
}

impl<T: Real> Ensemble<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Per-step mean fidelity of one filter across samples.
    pub fn mean_fidelity(&self, filter: usize) -> Vec<T> {
        let Some(first) = self.records.first() else {
            return Vec::new();
        };
        let n = T::from_usize(self.records.len()).expect("sample count fits scalar");
        (0..first.fidelities[filter].len())
            .map(|k| self.records.iter().map(|r| r.fidelities[filter][k]).sum::<T>() / n)
            .collect()
    }

    pub fn selected_pointers(&self) -> Vec<Option<usize>> {
        self.records.iter().map(|r| r.final_true_pointer()).collect()
    }

    pub fn summaries(&self) -> Vec<RunSummary<T>> {
        self.records
            .iter()
            .map(|r| RunSummary {
                seed: r.seed,
                selected_pointer: r.final_true_pointer(),
                filter_pointers: (0..r.filter_labels.len()).map(|f| r.final_filter_pointer(f)).collect(),
                final_fidelities: (0..r.filter_labels.len()).filter_map(|f| r.final_fidelity(f)).collect(),
            })
            .collect()
    }

    /// One row per step: `step`, `<label>_<k>` per sample, `<label>_mean`, per filter.
    pub fn write_fidelity_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let Some(first) = self.records.first() else {
            return writeln!(w, "step");
        };
        let labels = &first.filter_labels;
        let mut header = vec!["step".to_string()];
        for label in labels {
            header.extend((0..self.records.len()).map(|k| format!("{label}_{k}")));
            header.push(format!("{label}_mean"));
        }
        writeln!(w, "{}", header.join(","))?;
        let means: Vec<Vec<T>> = (0..labels.len()).map(|f| self.mean_fidelity(f)).collect();
        for n in 0..=first.steps() {
            let mut row = vec![n.to_string()];
            for (f, mean) in means.iter().enumerate() {
                row.extend(self.records.iter().map(|r| format_float(r.fidelities[f][n].as_f64())));
                row.push(format_float(mean[n].as_f64()));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn run_ensemble<T: Real>(
    config: &TrajectoryConfig<T>,
    n_samples: usize,
    basis: Option<&PointerBasis<T>>,
) -> Result<Ensemble<T>> {
    run_ensemble_with(config, n_samples, basis, |_| Ok(config.true_initial.clone()))
}

/// Like [`run_ensemble`], with a per-sample true initial state.
pub fn run_ensemble_with<T: Real, F>(
    config: &TrajectoryConfig<T>,
    n_samples: usize,
    basis: Option<&PointerBasis<T>>,
    initial: F,
) -> Result<Ensemble<T>>
where
    F: Fn(usize) -> Result<DensityMatrix<T>> + Sync,
{
    if n_samples == 0 {
        return Err(Error::InvalidParameter("ensemble needs at least one sample".into()));
    }
    config.validate()?;
    let records = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let rho0 = initial(k).map_err(|e| e.at_sample(k))?;
            run_from(config, config.seed.wrapping_add(k as u64), rho0, basis).map_err(|e| e.at_sample(k))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble { records })
}
