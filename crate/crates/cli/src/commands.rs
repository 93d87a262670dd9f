use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qnd_core::analysis::{empirical_rate, region_scan, theoretical_rate, Extended, PopulationSource};
use qnd_core::channel::{check_nondegeneracy, check_qnd, Completeness, COLUMN_SUM_TOL};
use qnd_core::export::format_float;
use qnd_core::photon_box::{build_channel, fock_basis, phase_factory};
use qnd_core::trajectory::{run, run_ensemble_with, Ensemble, TrajectoryConfig};
use qnd_core::{Channel64, DecoherenceParams64, PhotonBoxParams64, PointerBasis64};

use crate::config::ExperimentConfig;

/// How a command ended, beyond I/O and runtime errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    ValidationFailed,
}

/// Creates `dir`, refusing a non-empty existing one unless `force`.
pub fn prepare_output(dir: &Path, force: bool) -> Result<PathBuf> {
    if dir.exists() {
        let non_empty = fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .next()
            .is_some();
        if non_empty && !force {
            anyhow::bail!("output directory {} is not empty (pass --force to write into it)", dir.display());
        }
    } else {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(dir.to_path_buf())
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<()> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_snapshot(dir: &Path, name: &str, ch: &Channel64) -> Result<()> {
    write_file(dir, name, |w| writeln!(w, "{}", ch.to_json()))
}

struct Check {
    name: &'static str,
    status: Status,
    detail: String,
}

#[derive(PartialEq)]
enum Status {
    Pass,
    Warn,
    Fail,
}

fn model_checks(
    tag: &str,
    params: &PhotonBoxParams64,
    dec: Option<&DecoherenceParams64>,
    out: &mut Vec<(String, Check)>,
) -> Result<()> {
    let ch = build_channel(params, dec)?;
    let basis = fock_basis(params);
    let mut push = |c: Check| out.push((tag.to_string(), c));

    let dev = ch.kraus().completeness_deviation();
    push(match ch.kraus().completeness() {
        Completeness::Exact => Check {
            name: "kraus completeness",
            status: Status::Pass,
            detail: format!("exact, deviation {dev:.3e}"),
        },
        Completeness::Approximate { tolerance } => Check {
            name: "kraus completeness",
            status: Status::Warn,
            detail: format!("approximate, deviation {dev:.3e} within {tolerance:.3e}; outcome laws renormalized"),
        },
    });

    let eta = ch.eta();
    let worst = (0..eta.ideal_len())
        .map(|j| (eta.column_sum(j) - 1.0).abs())
        .fold(0.0, f64::max);
    push(Check {
        name: "eta column sums",
        status: if worst <= COLUMN_SUM_TOL { Status::Pass } else { Status::Fail },
        detail: format!("max |sum - 1| = {worst:.3e}"),
    });

    let qnd = check_qnd(ch.kraus(), &basis)?;
    push(Check {
        name: "qnd property",
        status: match (qnd.passed, dec.is_some()) {
            (true, _) => Status::Pass,
            (false, true) => Status::Warn,
            (false, false) => Status::Fail,
        },
        detail: if qnd.passed {
            format!("worst off-diagonal {:.3e}", qnd.worst_deviation)
        } else {
            format!(
                "fails, worst off-diagonal {:.3e}{}",
                qnd.worst_deviation,
                if dec.is_some() { " (expected with decoherence)" } else { "" }
            )
        },
    });

    let nd = check_nondegeneracy(&ch, &basis)?;
    push(Check {
        name: "non-degeneracy",
        status: if nd.passed { Status::Pass } else { Status::Fail },
        detail: match nd.violating {
            Some((a, b)) => format!("pointers {a} and {b} share an outcome law (gap {:.3e})", nd.min_gap),
            None => format!("min pairwise gap {:.3e}", nd.min_gap),
        },
    });

    if let Some(dec) = dec {
        for w in dec.warnings() {
            push(Check { name: "decoherence", status: Status::Warn, detail: w });
        }
    }
    Ok(())
}

pub fn validate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let dec = cfg.decoherence.as_ref();
    let mut checks = Vec::new();
    model_checks("true", &cfg.photon_box, dec, &mut checks)?;
    if let Some(est) = cfg.estimated_params() {
        model_checks("estimated", &est, dec, &mut checks)?;
    }
    let mut failed = false;
    for (tag, c) in &checks {
        let label = match c.status {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => {
                failed = true;
                "FAIL"
            }
        };
        println!("{label} [{tag}] {}: {}", c.name, c.detail);
    }
    Ok(if failed { Outcome::ValidationFailed } else { Outcome::Ok })
}

struct Filters {
    labels: Vec<&'static str>,
    channels: Vec<Channel64>,
}

/// The matched filter, plus an estimated one when the config carries overrides.
fn filters(cfg: &ExperimentConfig, dec: Option<&DecoherenceParams64>) -> Result<Filters> {
    let mut labels = vec!["matched"];
    let mut channels = vec![build_channel(&cfg.photon_box, dec)?];
    if let Some(est) = cfg.estimated_params() {
        labels.push("estimated");
        channels.push(build_channel(&est, dec)?);
    }
    Ok(Filters { labels, channels })
}

fn ensemble(
    cfg: &ExperimentConfig,
    truth: &Channel64,
    filters: &Filters,
    basis: &PointerBasis64,
    n_samples: usize,
) -> Result<Ensemble<f64>> {
    let t = &cfg.trajectory;
    let d = cfg.photon_box.dim();
    let hat0 = t.estimated_initial.resolve(d, t.seed, 0)?;
    let mut config = TrajectoryConfig::new(t.steps, t.seed, truth.clone(), t.true_initial.resolve(d, t.seed, 0)?);
    for (label, ch) in filters.labels.iter().zip(&filters.channels) {
        config = config.with_filter(*label, ch.clone(), hat0.clone());
    }
    let initial = |k: usize| {
        t.true_initial
            .resolve(d, t.seed, k)
            .map_err(|e| qnd_core::Error::InvalidParameter(format!("{e:#}")))
    };
    let hats_vary = matches!(t.estimated_initial, crate::config::InitialStateSpec::RandomPure { .. });
    if hats_vary {
        // per-sample estimated initial states: run one sample at a time
        let mut records = Vec::with_capacity(n_samples);
        for k in 0..n_samples {
            let mut c = config.clone();
            c.seed = t.seed.wrapping_add(k as u64);
            for f in &mut c.filters {
                f.initial = t.estimated_initial.resolve(d, t.seed, k)?;
            }
            c.true_initial = t.true_initial.resolve(d, t.seed, k)?;
            records.push(run(&c, Some(basis)).map_err(|e| runtime(e, k))?);
        }
        return Ok(Ensemble { records });
    }
    run_ensemble_with(&config, n_samples, Some(basis), initial).map_err(anyhow::Error::new)
}

fn runtime(e: qnd_core::Error, sample: usize) -> anyhow::Error {
    anyhow::Error::new(e).context(format!("sample {sample}"))
}

fn extended_cell(x: Extended<f64>) -> String {
    match x {
        Extended::Finite(v) => format_float(v),
        Extended::PosInfinity => "inf".into(),
        Extended::NegInfinity => "-inf".into(),
    }
}

pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let truth = build_channel(&cfg.photon_box, None)?;
    let basis = fock_basis(&cfg.photon_box);
    let filters = filters(cfg, None)?;
    let n_samples = cfg.trajectory.n_samples.unwrap_or(1);
    let ens = ensemble(cfg, &truth, &filters, &basis, n_samples)?;

    write_snapshot(out, "channel.json", &truth)?;
    if filters.channels.len() > 1 {
        write_snapshot(out, "channel_estimated.json", &filters.channels[1])?;
    }
    for (k, rec) in ens.records.iter().enumerate() {
        let name = if k == 0 { "trajectory.csv".to_string() } else { format!("trajectory_{k}.csv") };
        write_file(out, &name, |w| rec.write_csv(w))?;
    }

    let steps = cfg.trajectory.steps;
    let window = match cfg.trajectory.rate_window {
        Some([a, b]) => Some((a, b)),
        None if steps >= 2 => Some((steps / 4, steps)),
        None => None,
    };
    let pointers = basis.len();
    write_file(out, "rates.csv", |w| {
        writeln!(w, "sample,filter,upsilon,alpha,empirical_rate,theoretical_rate,residual,window_start,window_end")?;
        let Some(window) = window else {
            return Ok(());
        };
        for (k, rec) in ens.records.iter().enumerate() {
            let Some(ups) = rec.final_true_pointer() else { continue };
            let sources = std::iter::once(("true", PopulationSource::True, &truth))
                .chain(
                    filters
                        .labels
                        .iter()
                        .zip(&filters.channels)
                        .enumerate()
                        .map(|(f, (l, ch))| (*l, PopulationSource::Filter(f), ch)),
                );
            for (label, source, ch) in sources {
                for alpha in (0..pointers).filter(|&a| a != ups) {
                    let theory = theoretical_rate(&truth, ch, &basis, ups, alpha)
                        .map(extended_cell)
                        .unwrap_or_default();
                    let (fit, residual) = match empirical_rate(rec, source, alpha, window) {
                        Ok(r) => (format_float(r.slope), format_float(r.residual)),
                        Err(e) => {
                            eprintln!("note: sample {k} {label} alpha {alpha}: {e}");
                            (String::new(), String::new())
                        }
                    };
                    writeln!(w, "{k},{label},{ups},{alpha},{fit},{theory},{residual},{},{}", window.0, window.1)?;
                }
            }
        }
        Ok(())
    })?;

    for s in ens.summaries() {
        let agree: Vec<String> = filters
            .labels
            .iter()
            .zip(&s.filter_pointers)
            .map(|(l, p)| format!("{l}={}", p.map_or("-".into(), |p| p.to_string())))
            .collect();
        println!(
            "seed {}: selected pointer {}; filters {}",
            s.seed,
            s.selected_pointer.map_or("-".into(), |p| p.to_string()),
            agree.join(" ")
        );
    }
    Ok(Outcome::Ok)
}

pub fn region(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let grid = cfg.grid.as_ref().expect("checked by config").grid()?;
    let truth = build_channel(&cfg.photon_box, cfg.decoherence.as_ref())?;
    let basis = fock_basis(&cfg.photon_box);
    let factory = phase_factory(cfg.photon_box, cfg.decoherence);
    let scan = region_scan(&truth, &basis, &grid, factory).map_err(anyhow::Error::new)?;
    write_snapshot(out, "channel.json", &truth)?;
    write_file(out, "region.csv", |w| scan.write_csv(w))?;
    println!("holds fraction {:.4} over {} nodes", scan.holds_fraction(), scan.nodes.len());
    Ok(Outcome::Ok)
}

pub fn decoherence(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let dec = cfg.decoherence.as_ref().expect("checked by config");
    for w in dec.warnings() {
        eprintln!("warning: {w}");
    }
    let truth = build_channel(&cfg.photon_box, Some(dec))?;
    let basis = fock_basis(&cfg.photon_box);
    let filters = filters(cfg, Some(dec))?;
    let n_samples = cfg.trajectory.n_samples.unwrap_or(20);
    let ens = ensemble(cfg, &truth, &filters, &basis, n_samples)?;
    write_snapshot(out, "channel.json", &truth)?;
    write_file(out, "fidelity.csv", |w| ens.write_fidelity_csv(w))?;
    for (f, label) in filters.labels.iter().enumerate() {
        let mean = ens.mean_fidelity(f);
        println!("{label}: final mean fidelity {:.6}", mean.last().copied().unwrap_or(f64::NAN));
    }
    Ok(Outcome::Ok)
}
