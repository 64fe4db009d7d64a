//! The four experiment runners.
//!
//! Trials execute in parallel, but every reduction happens in trial
//! order over pre-collected per-trial results, so output bytes depend
//! only on (config, seed).

use rayon::prelude::*;

use crate::beamforming::{design_hybrid, quantize_phases, DesignMethod, PhaseAlphabet};
use crate::channel::{array_response, sample_channel, ChannelRealization};
use crate::error::{Error, Result};
use crate::estimation::{
    build_sensing_matrix, generate_training, mutual_coherence, nmse, omp, reconstruct_estimate,
    AngleDictionary, TrainingKind,
};
use crate::harness::config::{
    ExperimentConfig, ExperimentKind, MethodName, Resolution,
};
use crate::harness::table::{Cell, ResultTable};
use crate::metrics::{
    beam_pattern, degree_grid, energy_efficiency, spectral_efficiency, total_power, Architecture,
    ArchitectureKind,
};
use crate::rng::{derive_rng, trial_rng};
use crate::{CMatrix, CVector};

/// Dispatch on the config's experiment kind.
pub fn run(config: &ExperimentConfig) -> Result<ResultTable> {
    match config.experiment {
        ExperimentKind::SeSweep => run_se_sweep(config),
        ExperimentKind::EeSweep => run_ee_sweep(config),
        ExperimentKind::Beampattern => run_beampattern(config),
        ExperimentKind::Estimation => run_estimation(config),
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One (method, resolution) combination of an SE sweep.
#[derive(Debug, Clone)]
struct Scheme {
    method_label: &'static str,
    resolution: Resolution,
    design: DesignMethod,
}

fn build_schemes(config: &ExperimentConfig) -> Result<Vec<Scheme>> {
    let mut schemes: Vec<Scheme> = Vec::new();
    let mut push_unique = |s: Scheme| {
        if !schemes
            .iter()
            .any(|x| x.method_label == s.method_label && x.resolution == s.resolution)
        {
            schemes.push(s);
        }
    };
    for method in &config.methods {
        match method {
            MethodName::FullDigital => push_unique(Scheme {
                method_label: method.label(),
                resolution: Resolution::Infinite,
                design: DesignMethod::FullDigital,
            }),
            MethodName::PeAltMin => push_unique(Scheme {
                method_label: method.label(),
                resolution: Resolution::Infinite,
                design: DesignMethod::pe_altmin(),
            }),
            discrete => {
                for r in &config.resolutions {
                    match r {
                        // an "infinite" resolution row is the IR-PS scheme
                        Resolution::Infinite => push_unique(Scheme {
                            method_label: MethodName::PeAltMin.label(),
                            resolution: Resolution::Infinite,
                            design: DesignMethod::pe_altmin(),
                        }),
                        Resolution::Finite(n) => {
                            let alphabet = PhaseAlphabet::new(*n)?;
                            let design = match discrete {
                                MethodName::Quantize => DesignMethod::Quantize { alphabet },
                                MethodName::PhaseMatching => {
                                    DesignMethod::phase_matching(alphabet)
                                }
                                MethodName::BinaryRank1 => DesignMethod::BinaryRank1,
                                MethodName::Exhaustive => DesignMethod::Exhaustive { alphabet },
                                _ => unreachable!(),
                            };
                            push_unique(Scheme {
                                method_label: discrete.label(),
                                resolution: *r,
                                design,
                            });
                        }
                    }
                }
            }
        }
    }
    if schemes.is_empty() {
        return Err(Error::InvalidInput(
            "methods and resolutions produce no schemes".into(),
        ));
    }
    Ok(schemes)
}

fn resolution_cell(r: Resolution) -> Cell {
    match r {
        Resolution::Finite(n) => Cell::Int(n as i64),
        Resolution::Infinite => Cell::str("infinite"),
    }
}

/// Spectral efficiency vs SNR, one shared channel per trial across all
/// schemes.
pub fn run_se_sweep(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let schemes = build_schemes(config)?;
    let tx_geo = config.tx_geometry();
    let rx_geo = config.rx_geometry();
    let channel_cfg = config.channel.to_channel_config();
    let d = config.dims;
    let snrs: Vec<f64> = config.snr_db.iter().map(|db| db_to_linear(*db)).collect();

    // per trial: [scheme][snr] spectral efficiencies
    let per_trial: Vec<Vec<Vec<f64>>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<Vec<f64>>> {
            let mut rng = trial_rng(config.seed, t);
            let realization = sample_channel(&tx_geo, &rx_geo, &channel_cfg, &mut rng)?;
            let h = &realization.matrix;
            let mut rows = Vec::with_capacity(schemes.len());
            for scheme in &schemes {
                let (tx, rx) = design_hybrid(h, &scheme.design, d.n_rf_tx, d.n_rf_rx, d.n_s)?;
                let f_eff = tx.effective();
                let w_eff = rx.effective();
                let se_per_snr = snrs
                    .iter()
                    .map(|&snr| spectral_efficiency(h, &f_eff, &w_eff, snr, d.n_s))
                    .collect::<Result<Vec<f64>>>()?;
                rows.push(se_per_snr);
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = ResultTable::new(&[
        "snr_db",
        "method",
        "resolution",
        "mean_se",
        "std_se",
        "trials",
    ]);
    for (snr_idx, &snr_db) in config.snr_db.iter().enumerate() {
        for (scheme_idx, scheme) in schemes.iter().enumerate() {
            let values: Vec<f64> = per_trial
                .iter()
                .map(|trial| trial[scheme_idx][snr_idx])
                .collect();
            let (mean, std) = mean_std(&values);
            table.push_row(vec![
                Cell::Float(snr_db),
                Cell::str(scheme.method_label),
                resolution_cell(scheme.resolution),
                Cell::Float(mean),
                Cell::Float(std),
                Cell::Int(config.trials as i64),
            ]);
        }
    }
    Ok(table)
}

const EE_ARCHITECTURES: [ArchitectureKind; 3] = [
    ArchitectureKind::FullDigital,
    ArchitectureKind::PsHybrid,
    ArchitectureKind::PosSwHybrid,
];

/// Energy efficiency vs RF-chain count with `N_s = N_rf`; the POS-SW
/// architecture uses phase matching at the first finite resolution, the
/// PS hybrid uses alternating minimization, and the full-digital power
/// does not depend on `N_rf`.
pub fn run_ee_sweep(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let tx_geo = config.tx_geometry();
    let rx_geo = config.rx_geometry();
    let channel_cfg = config.channel.to_channel_config();
    let power_model = config.power.to_power_model();
    let snr = db_to_linear(config.snr_db[0]);
    let pos_resolution = config
        .pos_sw_resolution()
        .ok_or_else(|| Error::InvalidInput("no finite resolution configured".into()))?;
    let pos_alphabet = PhaseAlphabet::new(pos_resolution)?;
    let n_t = config.dims.n_t;

    // per trial: [rf index][architecture] spectral efficiency
    let per_trial: Vec<Vec<[f64; 3]>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<[f64; 3]>> {
            let mut rng = trial_rng(config.seed, t);
            let realization = sample_channel(&tx_geo, &rx_geo, &channel_cfg, &mut rng)?;
            let h = &realization.matrix;
            let mut per_rf = Vec::with_capacity(config.rf_chains.len());
            for &n_rf in &config.rf_chains {
                let n_s = n_rf;
                let se_for = |method: &DesignMethod| -> Result<f64> {
                    let (tx, rx) = design_hybrid(h, method, n_rf, n_rf, n_s)?;
                    spectral_efficiency(h, &tx.effective(), &rx.effective(), snr, n_s)
                };
                let se_full = se_for(&DesignMethod::FullDigital)?;
                let (se_ps, se_pos) = if config.shared_se {
                    (se_full, se_full)
                } else {
                    (
                        se_for(&DesignMethod::pe_altmin())?,
                        se_for(&DesignMethod::phase_matching(pos_alphabet))?,
                    )
                };
                per_rf.push([se_full, se_ps, se_pos]);
            }
            Ok(per_rf)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = ResultTable::new(&[
        "n_rf",
        "architecture",
        "power_mw",
        "mean_se",
        "std_se",
        "mean_ee",
        "std_ee",
        "trials",
    ]);
    for (rf_idx, &n_rf) in config.rf_chains.iter().enumerate() {
        for (arch_idx, kind) in EE_ARCHITECTURES.iter().enumerate() {
            let arch = match kind {
                ArchitectureKind::FullDigital => Architecture::full_digital(n_t),
                other => Architecture::new(*other, n_t, n_rf)?,
            };
            let power = total_power(&arch, &power_model);
            let se_values: Vec<f64> = per_trial
                .iter()
                .map(|trial| trial[rf_idx][arch_idx])
                .collect();
            let ee_values: Vec<f64> = se_values
                .iter()
                .map(|&se| energy_efficiency(se, &arch, &power_model))
                .collect::<Result<Vec<f64>>>()?;
            let (mean_se, std_se) = mean_std(&se_values);
            let (mean_ee, std_ee) = mean_std(&ee_values);
            table.push_row(vec![
                Cell::Int(n_rf as i64),
                Cell::str(kind.label()),
                Cell::Float(power),
                Cell::Float(mean_se),
                Cell::Float(std_se),
                Cell::Float(mean_ee),
                Cell::Float(std_ee),
                Cell::Int(config.trials as i64),
            ]);
        }
    }
    Ok(table)
}

/// Beam patterns of steering vectors quantized to each configured
/// resolution, in dB normalized to the pattern peak.
pub fn run_beampattern(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let geo = config.tx_geometry();
    let b = &config.beampattern;
    let grid = degree_grid(b.grid_start_deg, b.grid_end_deg, b.grid_step_deg);

    let mut table = ResultTable::new(&["n_t", "resolution", "dod_deg", "angle_deg", "gain_db"]);
    for resolution in &config.resolutions {
        for &dod_deg in &b.dod_deg {
            let target = array_response(&geo, dod_deg.to_radians());
            let weights: CVector = match resolution {
                Resolution::Infinite => target,
                Resolution::Finite(n) => {
                    let alphabet = PhaseAlphabet::new(*n)?;
                    let analog = quantize_phases(
                        &CMatrix::from_column_slice(geo.num_antennas, 1, target.as_slice()),
                        alphabet,
                    );
                    CVector::from_column_slice(analog.realize().column(0).as_slice())
                }
            };
            let pattern = beam_pattern(&weights, &geo, &grid)?;
            let peak = pattern
                .iter()
                .map(|&(_, g)| g)
                .fold(f64::NEG_INFINITY, f64::max);
            for (angle, gain) in pattern {
                let gain_db = if gain > 0.0 {
                    10.0 * (gain / peak).log10()
                } else {
                    -300.0
                };
                table.push_row(vec![
                    Cell::Int(geo.num_antennas as i64),
                    resolution_cell(*resolution),
                    Cell::Float(dod_deg),
                    Cell::Float(angle.to_degrees()),
                    Cell::Float(gain_db),
                ]);
            }
        }
    }
    Ok(table)
}

struct EstimationTrialOut {
    /// [kind][snr] NMSE.
    nmse: Vec<Vec<f64>>,
    /// [kind][snr] exact-support indicator (NaN when unknown).
    recovered: Vec<Vec<f64>>,
    /// [kind] training coherences.
    coherence_tx: Vec<f64>,
    coherence_rx: Vec<f64>,
}

/// Channel estimation quality: NMSE, support recovery (for on-grid
/// synthetic channels), and training coherence, per (SNR, training kind).
pub fn run_estimation(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let tx_geo = config.tx_geometry();
    let rx_geo = config.rx_geometry();
    let channel_cfg = config.channel.to_channel_config();
    let e = &config.estimation;
    let dictionary = AngleDictionary::new(&tx_geo, &rx_geo, config.estimation_grid_size())?;
    let kinds: Vec<TrainingKind> = e.training.iter().map(|k| k.to_kind()).collect();
    let snrs: Vec<f64> = config.snr_db.iter().map(|db| db_to_linear(*db)).collect();

    let per_trial: Vec<EstimationTrialOut> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<EstimationTrialOut> {
            // ground-truth channel, shared by every kind and SNR
            let mut channel_rng = derive_rng(config.seed, &[1, t]);
            let (h, true_support) = if e.on_grid {
                let (h, support) =
                    synthetic_on_grid_channel(&dictionary, e.num_paths, &mut channel_rng);
                (h, Some(support))
            } else {
                let realization: ChannelRealization =
                    sample_channel(&tx_geo, &rx_geo, &channel_cfg, &mut channel_rng)?;
                (realization.matrix, None)
            };

            let mut out = EstimationTrialOut {
                nmse: Vec::with_capacity(kinds.len()),
                recovered: Vec::with_capacity(kinds.len()),
                coherence_tx: Vec::with_capacity(kinds.len()),
                coherence_rx: Vec::with_capacity(kinds.len()),
            };
            for (kind_idx, kind) in kinds.iter().enumerate() {
                let mut training_rng = derive_rng(config.seed, &[2, t, kind_idx as u64]);
                let training = generate_training(
                    *kind,
                    &tx_geo,
                    &rx_geo,
                    e.num_tx_vectors,
                    e.num_rx_vectors,
                    &mut training_rng,
                )?;
                out.coherence_tx.push(coherence_or_zero(&training.tx_training)?);
                out.coherence_rx.push(coherence_or_zero(&training.rx_training)?);
                let sensing = build_sensing_matrix(&training, &dictionary)?;

                let mut nmse_row = Vec::with_capacity(snrs.len());
                let mut rec_row = Vec::with_capacity(snrs.len());
                for (snr_idx, &snr) in snrs.iter().enumerate() {
                    let mut noise_rng =
                        derive_rng(config.seed, &[3, t, kind_idx as u64, snr_idx as u64]);
                    let y = crate::estimation::measure(&h, &training, snr, &mut noise_rng)?;
                    let solution = omp(&y, &sensing, e.sparsity, 1e-12)?;
                    let estimate = reconstruct_estimate(&solution, &dictionary);
                    nmse_row.push(nmse(&h, &estimate.reconstructed)?);
                    rec_row.push(match &true_support {
                        Some(truth) => {
                            let mut found = estimate.support.clone();
                            found.sort_unstable();
                            let mut expected = truth.clone();
                            expected.sort_unstable();
                            f64::from(u8::from(found == expected))
                        }
                        None => f64::NAN,
                    });
                }
                out.nmse.push(nmse_row);
                out.recovered.push(rec_row);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = ResultTable::new(&[
        "snr_db",
        "kind",
        "mean_nmse",
        "std_nmse",
        "support_recovery_rate",
        "mean_coherence_tx",
        "mean_coherence_rx",
        "trials",
    ]);
    for (snr_idx, &snr_db) in config.snr_db.iter().enumerate() {
        for (kind_idx, kind) in kinds.iter().enumerate() {
            let nmse_values: Vec<f64> = per_trial
                .iter()
                .map(|t| t.nmse[kind_idx][snr_idx])
                .collect();
            let (mean_nmse, std_nmse) = mean_std(&nmse_values);
            let recovery = if e.on_grid {
                per_trial
                    .iter()
                    .map(|t| t.recovered[kind_idx][snr_idx])
                    .sum::<f64>()
                    / config.trials as f64
            } else {
                f64::NAN
            };
            let coh_tx = per_trial.iter().map(|t| t.coherence_tx[kind_idx]).sum::<f64>()
                / config.trials as f64;
            let coh_rx = per_trial.iter().map(|t| t.coherence_rx[kind_idx]).sum::<f64>()
                / config.trials as f64;
            table.push_row(vec![
                Cell::Float(snr_db),
                Cell::str(kind.label()),
                Cell::Float(mean_nmse),
                Cell::Float(std_nmse),
                Cell::Float(recovery),
                Cell::Float(coh_tx),
                Cell::Float(coh_rx),
                Cell::Int(config.trials as i64),
            ]);
        }
    }
    Ok(table)
}

fn coherence_or_zero(matrix: &CMatrix) -> Result<f64> {
    if matrix.ncols() < 2 {
        return Ok(0.0);
    }
    mutual_coherence(matrix)
}

/// Random on-grid channel: `num_paths` distinct dictionary pairs with
/// complex Gaussian gains. Returns the matrix and the (tx, rx) support.
fn synthetic_on_grid_channel(
    dictionary: &AngleDictionary,
    num_paths: usize,
    rng: &mut impl rand::Rng,
) -> (CMatrix, Vec<(usize, usize)>) {
    let g = dictionary.grid_size();
    let n_r = dictionary.rx_geometry.num_antennas;
    let n_t = dictionary.tx_geometry.num_antennas;
    let mut support: Vec<(usize, usize)> = Vec::with_capacity(num_paths);
    while support.len() < num_paths {
        let pair = (rng.gen_range(0..g), rng.gen_range(0..g));
        if !support.contains(&pair) {
            support.push(pair);
        }
    }
    let mut h = CMatrix::zeros(n_r, n_t);
    for &(g_t, g_r) in &support {
        let gain = crate::channel::complex_gaussian(rng);
        let a_r = dictionary.rx_atoms.column(g_r);
        let a_t = dictionary.tx_atoms.column(g_t);
        for t in 0..n_t {
            let col_factor = gain * a_t[t].conj();
            for r in 0..n_r {
                h[(r, t)] += col_factor * a_r[r];
            }
        }
    }
    (h, support)
}
