//! Precoder/combiner design for hybrid arrays whose analog stage is
//! restricted to an N-ary phase alphabet.
//!
//! Designs implemented:
//!
//! - full-digital SVD beamforming (upper-bound reference)
//! - direct phase quantization of the unconstrained optimum
//! - cyclic per-element phase matching for any alphabet resolution
//! - rank-1 candidate codebooks for the binary alphabet
//! - phase-extraction alternating minimization for infinite-resolution
//!   (continuous-phase) analog stages
//! - exhaustive enumeration over the alphabet, used as a small-scale
//!   optimality oracle
//!
//! All precoders satisfy the transmit power constraint
//! `||F_RF F_BB||_F^2 = N_s`; combiner digital stages are plain
//! least-squares fits with no normalization.

use std::f64::consts::TAU;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{fro_norm_sq, lstsq, top_svd};
use crate::{CMatrix, CVector, Complex};

/// Evaluation budget for [`exhaustive_analog_search`].
const EXHAUSTIVE_BUDGET: f64 = 1e7;

/// Number of rotation candidates in [`binary_rank1_design`].
const RANK1_CANDIDATES: usize = 32;

/// The N-ary phase set `{2 pi k / N : k = 0..N-1}` emitted by a phase
/// over-sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseAlphabet {
    resolution: usize,
}

impl PhaseAlphabet {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidInput(format!(
                "phase alphabet needs resolution >= 2, got {resolution}"
            )));
        }
        Ok(Self { resolution })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Phase of alphabet entry `k`, in `[0, 2 pi)`.
    pub fn phase(&self, index: usize) -> f64 {
        TAU * index as f64 / self.resolution as f64
    }

    /// Unit-modulus complex value of alphabet entry `k`.
    pub fn value(&self, index: usize) -> Complex {
        Complex::from_polar(1.0, self.phase(index))
    }

    /// Index of the alphabet phase nearest to `phase`; ties break toward
    /// the smaller index.
    ///
    /// Works in the index domain (`phase * N / 2pi`) so the midpoint tie
    /// is detected exactly.
    pub fn quantize(&self, phase: f64) -> usize {
        let n = self.resolution;
        let pos = phase.rem_euclid(TAU) * n as f64 / TAU;
        let lo = pos.floor();
        let frac = pos - lo;
        let k_lo = (lo as usize) % n;
        let k_hi = (k_lo + 1) % n;
        if frac < 0.5 {
            k_lo
        } else if frac > 0.5 {
            k_hi
        } else {
            k_lo.min(k_hi)
        }
    }
}

/// Constant-modulus analog beamformer in index form: entry (m, k) applies
/// phase `2 pi indices[(m,k)] / N` with amplitude `1/sqrt(num_antennas)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBeamformer {
    indices: DMatrix<usize>,
    alphabet: PhaseAlphabet,
}

impl AnalogBeamformer {
    pub fn new(indices: DMatrix<usize>, alphabet: PhaseAlphabet) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidInput("empty analog beamformer".into()));
        }
        if indices.iter().any(|&i| i >= alphabet.resolution()) {
            return Err(Error::InvalidInput(
                "phase index out of alphabet range".into(),
            ));
        }
        Ok(Self { indices, alphabet })
    }

    pub fn indices(&self) -> &DMatrix<usize> {
        &self.indices
    }

    pub fn alphabet(&self) -> PhaseAlphabet {
        self.alphabet
    }

    pub fn num_antennas(&self) -> usize {
        self.indices.nrows()
    }

    pub fn num_chains(&self) -> usize {
        self.indices.ncols()
    }

    /// Fixed per-element amplitude `1/sqrt(num_antennas)`.
    pub fn amplitude(&self) -> f64 {
        1.0 / (self.num_antennas() as f64).sqrt()
    }

    /// Realized complex matrix: `(1/sqrt(N_ant)) exp(j 2 pi idx / N)`.
    pub fn realize(&self) -> CMatrix {
        let amp = self.amplitude();
        CMatrix::from_fn(self.indices.nrows(), self.indices.ncols(), |m, k| {
            Complex::from_polar(amp, self.alphabet.phase(self.indices[(m, k)]))
        })
    }
}

/// Continuous-phase constant-modulus analog stage (infinite-resolution
/// phase shifters).
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousAnalog {
    pub phases: DMatrix<f64>,
}

impl ContinuousAnalog {
    pub fn realize(&self) -> CMatrix {
        let amp = 1.0 / (self.phases.nrows() as f64).sqrt();
        self.phases.map(|p| Complex::from_polar(amp, p))
    }
}

/// Unconstrained baseband beamformer across RF chains.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalBeamformer {
    pub matrix: CMatrix,
}

/// Analog stage of a designed beamformer.
#[derive(Debug, Clone)]
pub enum AnalogStage {
    /// Discrete POS-SW beamformer.
    Pos(AnalogBeamformer),
    /// Infinite-resolution phase shifters.
    Continuous(ContinuousAnalog),
    /// Full-digital passthrough (no RF constraint).
    Unconstrained(CMatrix),
}

impl AnalogStage {
    pub fn realize(&self) -> CMatrix {
        match self {
            AnalogStage::Pos(a) => a.realize(),
            AnalogStage::Continuous(c) => c.realize(),
            AnalogStage::Unconstrained(m) => m.clone(),
        }
    }
}

/// Cascade of an analog stage and a digital stage.
#[derive(Debug, Clone)]
pub struct HybridBeamformer {
    pub analog: AnalogStage,
    pub digital: DigitalBeamformer,
}

impl HybridBeamformer {
    /// Effective antenna-domain beamformer `analog * digital`.
    pub fn effective(&self) -> CMatrix {
        self.analog.realize() * &self.digital.matrix
    }

    pub fn num_streams(&self) -> usize {
        self.digital.matrix.ncols()
    }

    /// `| ||F_RF F_BB||_F^2 - N_s |`, zero for a precoder meeting the
    /// total power constraint.
    pub fn power_constraint_error(&self) -> f64 {
        (fro_norm_sq(&self.effective()) - self.num_streams() as f64).abs()
    }
}

/// Optimal unconstrained beamformers: top-`num_streams` right (precoder)
/// and left (combiner) singular vectors, equal power per stream.
pub fn svd_full_digital(channel: &CMatrix, num_streams: usize) -> Result<(CMatrix, CMatrix)> {
    let (w, sigma, f) = top_svd(channel, num_streams)?;
    if sigma[0] <= 0.0 {
        return Err(Error::RankDeficientChannel);
    }
    Ok((f, w))
}

/// Quantize each entry's phase onto the alphabet; zero entries map to
/// index 0.
pub fn quantize_phases(target: &CMatrix, alphabet: PhaseAlphabet) -> AnalogBeamformer {
    let indices = DMatrix::from_fn(target.nrows(), target.ncols(), |m, k| {
        let z = target[(m, k)];
        if z.re == 0.0 && z.im == 0.0 {
            0
        } else {
            alphabet.quantize(z.arg())
        }
    });
    AnalogBeamformer { indices, alphabet }
}

/// Target matrix for an analog stage with `num_rf` chains: columns of
/// `opt` repeated cyclically.
fn pad_columns(opt: &CMatrix, num_rf: usize) -> CMatrix {
    CMatrix::from_fn(opt.nrows(), num_rf, |m, k| opt[(m, k % opt.ncols())])
}

/// Warm start for the discrete designs: per column, quantize the target
/// under the best of 32 global phase rotations spanning one alphabet
/// step.
///
/// A global rotation of a column is absorbed by the digital
/// least-squares fit, so scanning rotations only changes which
/// quantization pattern the iteration starts from; it avoids the poor
/// sign patterns plain quantization produces for coarse alphabets.
fn rotation_quantized_init(target: &CMatrix, alphabet: PhaseAlphabet) -> AnalogBeamformer {
    const ROTATIONS: usize = 32;
    let n_ant = target.nrows();
    let amp = 1.0 / (n_ant as f64).sqrt();
    let step = TAU / alphabet.resolution() as f64 / ROTATIONS as f64;
    let mut indices = DMatrix::zeros(n_ant, target.ncols());
    let mut column = vec![0usize; n_ant];
    for k in 0..target.ncols() {
        let mut best_obj = f64::NEG_INFINITY;
        for i in 0..ROTATIONS {
            let rot = i as f64 * step;
            let mut corr = Complex::new(0.0, 0.0);
            for m in 0..n_ant {
                let z = target[(m, k)];
                let idx = if z.re == 0.0 && z.im == 0.0 {
                    0
                } else {
                    alphabet.quantize(z.arg() + rot)
                };
                column[m] = idx;
                corr += z.conj() * alphabet.value(idx) * amp;
            }
            let obj = corr.norm();
            if obj > best_obj {
                best_obj = obj;
                for m in 0..n_ant {
                    indices[(m, k)] = column[m];
                }
            }
        }
    }
    AnalogBeamformer { indices, alphabet }
}

fn scale_to_stream_power(
    analog: &CMatrix,
    digital: CMatrix,
    num_streams: usize,
) -> Result<CMatrix> {
    let power = fro_norm_sq(&(analog * &digital));
    if power <= 0.0 {
        return Err(Error::Numerical("zero effective precoder".into()));
    }
    Ok(digital * Complex::new((num_streams as f64 / power).sqrt(), 0.0))
}

/// Result of [`pe_altmin`].
#[derive(Debug, Clone)]
pub struct PeAltMin {
    /// Continuous analog phases, `num_antennas x num_rf`.
    pub analog: ContinuousAnalog,
    /// Digital stage, scaled to the stream power constraint.
    pub digital: DigitalBeamformer,
    /// Fit residual `||F_opt - A D||_F` after init and each accepted
    /// iteration (pre-scaling); non-increasing.
    pub residuals: Vec<f64>,
    /// True if any least-squares step needed ridge regularization.
    pub ridge_applied: bool,
}

/// Phase-extraction alternating minimization for an infinite-resolution
/// analog stage.
///
/// Alternates a least-squares digital fit with an analog update that
/// extracts the elementwise phase of `F_opt D^H`. Iterates while the
/// residual keeps decreasing by at least `tol`, up to `max_iters`; an
/// update that fails to decrease the residual is discarded, so the
/// recorded residual sequence is non-increasing.
pub fn pe_altmin(f_opt: &CMatrix, num_rf: usize, max_iters: usize, tol: f64) -> Result<PeAltMin> {
    let num_streams = f_opt.ncols();
    if num_rf < num_streams || num_rf > f_opt.nrows() {
        return Err(Error::InvalidInput(format!(
            "num_rf = {num_rf} outside [num_streams = {num_streams}, num_antennas = {}]",
            f_opt.nrows()
        )));
    }
    let amp = 1.0 / (f_opt.nrows() as f64).sqrt();
    let mut phases = pad_columns(f_opt, num_rf).map(|z| z.arg());
    let mut analog = phases.map(|p| Complex::from_polar(amp, p));
    let mut ridge_applied = false;
    let fit = lstsq(&analog, f_opt)?;
    ridge_applied |= fit.ridge_applied;
    let mut digital = fit.solution;
    let mut residual = fro_norm_sq(&(f_opt - &analog * &digital)).sqrt();
    let mut residuals = vec![residual];

    for _ in 0..max_iters {
        let new_phases = (f_opt * digital.adjoint()).map(|z| z.arg());
        let new_analog = new_phases.map(|p| Complex::from_polar(amp, p));
        let fit = lstsq(&new_analog, f_opt)?;
        let new_digital = fit.solution;
        let new_residual = fro_norm_sq(&(f_opt - &new_analog * &new_digital)).sqrt();
        if !(new_residual < residual) {
            break;
        }
        let gain = residual - new_residual;
        phases = new_phases;
        analog = new_analog;
        digital = new_digital;
        ridge_applied |= fit.ridge_applied;
        residual = new_residual;
        residuals.push(residual);
        if gain < tol {
            break;
        }
    }

    let digital = scale_to_stream_power(&analog, digital, num_streams)?;
    Ok(PeAltMin {
        analog: ContinuousAnalog { phases },
        digital: DigitalBeamformer { matrix: digital },
        residuals,
        ridge_applied,
    })
}

/// Result of [`phase_matching`].
#[derive(Debug, Clone)]
pub struct PhaseMatching {
    pub hybrid: HybridBeamformer,
    /// Objective `||F_opt - A D||_F` after init and after each outer
    /// iteration (pre-scaling); non-increasing.
    pub objectives: Vec<f64>,
    pub ridge_applied: bool,
}

/// Cyclic per-element phase matching over a discrete alphabet.
///
/// Starts from the quantized phases of `F_opt`. Each outer iteration
/// sweeps all analog entries, setting each to the alphabet value that
/// maximizes the real part of the conjugated residual correlation (the
/// exact single-entry minimizer of the Frobenius objective), then refits
/// the digital stage by least squares. The final digital stage is scaled
/// to the stream power constraint.
pub fn phase_matching(
    f_opt: &CMatrix,
    alphabet: PhaseAlphabet,
    num_rf: usize,
    outer_iters: usize,
) -> Result<PhaseMatching> {
    let num_streams = f_opt.ncols();
    if num_rf < num_streams || num_rf > f_opt.nrows() {
        return Err(Error::InvalidInput(format!(
            "num_rf = {num_rf} outside [num_streams = {num_streams}, num_antennas = {}]",
            f_opt.nrows()
        )));
    }
    let num_antennas = f_opt.nrows();
    let n = alphabet.resolution();
    let mut analog = rotation_quantized_init(&pad_columns(f_opt, num_rf), alphabet);
    let mut realized = analog.realize();
    let mut ridge_applied = false;

    let fit = lstsq(&realized, f_opt)?;
    ridge_applied |= fit.ridge_applied;
    let mut digital = fit.solution;
    let mut residual_mat = f_opt - &realized * &digital;
    let mut objectives = vec![fro_norm_sq(&residual_mat).sqrt()];

    for _ in 0..outer_iters {
        let row_norms: Vec<f64> = (0..num_rf)
            .map(|k| digital.row(k).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        for m in 0..num_antennas {
            for k in 0..num_rf {
                let old = realized[(m, k)];
                // residual correlation with the current entry added back
                let mut corr = old * Complex::new(row_norms[k], 0.0);
                for s in 0..num_streams {
                    corr += residual_mat[(m, s)] * digital[(k, s)].conj();
                }
                let mut best_idx = 0;
                let mut best_val = f64::NEG_INFINITY;
                for idx in 0..n {
                    let val = (alphabet.value(idx).conj() * corr).re;
                    if val > best_val {
                        best_val = val;
                        best_idx = idx;
                    }
                }
                if best_idx != analog.indices[(m, k)] {
                    let new = Complex::from_polar(analog.amplitude(), alphabet.phase(best_idx));
                    let delta = new - old;
                    for s in 0..num_streams {
                        residual_mat[(m, s)] -= delta * digital[(k, s)];
                    }
                    analog.indices[(m, k)] = best_idx;
                    realized[(m, k)] = new;
                }
            }
        }
        let fit = lstsq(&realized, f_opt)?;
        ridge_applied |= fit.ridge_applied;
        digital = fit.solution;
        residual_mat = f_opt - &realized * &digital;
        objectives.push(fro_norm_sq(&residual_mat).sqrt());
    }

    let digital = scale_to_stream_power(&realized, digital, num_streams)?;
    Ok(PhaseMatching {
        hybrid: HybridBeamformer {
            analog: AnalogStage::Pos(analog),
            digital: DigitalBeamformer { matrix: digital },
        },
        objectives,
        ridge_applied,
    })
}

/// Binary (N = 2) analog column from rank-1 candidate codebooks.
///
/// Builds 32 candidates `b(phi_i)[m] = sign(Re(e^{j phi_i} t_m)) / sqrt(N)`
/// with `phi_i = i pi / 32` and returns the one maximizing `|t^H b|`.
pub fn binary_rank1_design(target: &CVector) -> Result<AnalogBeamformer> {
    if target.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Err(Error::ZeroTarget);
    }
    let n_ant = target.len();
    let alphabet = PhaseAlphabet::new(2)?;
    let amp = 1.0 / (n_ant as f64).sqrt();
    let mut best_obj = f64::NEG_INFINITY;
    let mut best_signs: Vec<bool> = vec![false; n_ant];
    for i in 0..RANK1_CANDIDATES {
        let rot =
            Complex::from_polar(1.0, i as f64 * std::f64::consts::PI / RANK1_CANDIDATES as f64);
        let signs: Vec<bool> = target.iter().map(|t| (rot * t).re < 0.0).collect();
        let mut corr = Complex::new(0.0, 0.0);
        for (t, &neg) in target.iter().zip(&signs) {
            let b = if neg { -amp } else { amp };
            corr += t.conj() * b;
        }
        let obj = corr.norm();
        if obj > best_obj {
            best_obj = obj;
            best_signs = signs;
        }
    }
    let indices = DMatrix::from_fn(n_ant, 1, |m, _| usize::from(best_signs[m]));
    AnalogBeamformer::new(indices, alphabet)
}

/// Globally optimal alphabet-constrained analog column by enumeration.
///
/// Returns the index vector maximizing `|target^H b|` together with the
/// objective value. Enumeration is lexicographic and ties keep the
/// smallest index vector. Errors when `N^num_antennas` exceeds the
/// evaluation budget.
pub fn exhaustive_analog_search(
    target: &CVector,
    alphabet: PhaseAlphabet,
) -> Result<(Vec<usize>, f64)> {
    let n_ant = target.len();
    let n = alphabet.resolution();
    if n_ant == 0 {
        return Err(Error::InvalidInput("empty target".into()));
    }
    let total = (n as f64).powi(n_ant as i32);
    if total > EXHAUSTIVE_BUDGET {
        return Err(Error::SearchSpaceTooLarge(format!(
            "{n}^{n_ant} exceeds {EXHAUSTIVE_BUDGET:.0} evaluations"
        )));
    }
    let amp = 1.0 / (n_ant as f64).sqrt();
    // per-antenna, per-index term of target^H b
    let terms: Vec<Vec<Complex>> = (0..n_ant)
        .map(|m| {
            (0..n)
                .map(|k| target[m].conj() * alphabet.value(k) * amp)
                .collect()
        })
        .collect();

    let mut indices = vec![0usize; n_ant];
    let mut best_indices = indices.clone();
    let mut best_obj = f64::NEG_INFINITY;
    loop {
        let sum: Complex = indices.iter().enumerate().map(|(m, &k)| terms[m][k]).sum();
        let obj = sum.norm();
        if obj > best_obj {
            best_obj = obj;
            best_indices.copy_from_slice(&indices);
        }
        // odometer increment, rightmost digit fastest (lexicographic order)
        let mut digit = n_ant;
        loop {
            if digit == 0 {
                return Ok((best_indices, best_obj));
            }
            digit -= 1;
            indices[digit] += 1;
            if indices[digit] < n {
                break;
            }
            indices[digit] = 0;
        }
    }
}

/// How the analog stage of each side is designed.
#[derive(Debug, Clone)]
pub enum DesignMethod {
    /// Unconstrained SVD beamformers passed through (no analog stage).
    FullDigital,
    /// Infinite-resolution phase shifters via alternating minimization.
    PeAltMin { max_iters: usize, tol: f64 },
    /// Direct elementwise phase quantization.
    Quantize { alphabet: PhaseAlphabet },
    /// Cyclic per-element discrete phase matching.
    PhaseMatching {
        alphabet: PhaseAlphabet,
        outer_iters: usize,
    },
    /// Rank-1 binary candidate codebooks (alphabet fixed at N = 2).
    BinaryRank1,
    /// Per-column exhaustive enumeration (small arrays only).
    Exhaustive { alphabet: PhaseAlphabet },
}

impl DesignMethod {
    /// Phase matching with the default budget of three outer iterations.
    pub fn phase_matching(alphabet: PhaseAlphabet) -> Self {
        DesignMethod::PhaseMatching {
            alphabet,
            outer_iters: 3,
        }
    }

    /// Alternating minimization with the default iteration budget.
    pub fn pe_altmin() -> Self {
        DesignMethod::PeAltMin {
            max_iters: 50,
            tol: 1e-6,
        }
    }
}

/// Design one side's analog stage toward `opt` and fit the digital stage
/// by least squares (unscaled).
fn design_side(
    opt: &CMatrix,
    method: &DesignMethod,
    num_rf: usize,
) -> Result<(AnalogStage, CMatrix)> {
    let analog = match method {
        DesignMethod::FullDigital => {
            let digital = CMatrix::identity(opt.ncols(), opt.ncols());
            return Ok((AnalogStage::Unconstrained(opt.clone()), digital));
        }
        DesignMethod::PeAltMin { max_iters, tol } => {
            let out = pe_altmin(opt, num_rf, *max_iters, *tol)?;
            AnalogStage::Continuous(out.analog)
        }
        DesignMethod::Quantize { alphabet } => {
            AnalogStage::Pos(quantize_phases(&pad_columns(opt, num_rf), *alphabet))
        }
        DesignMethod::PhaseMatching {
            alphabet,
            outer_iters,
        } => {
            let out = phase_matching(opt, *alphabet, num_rf, *outer_iters)?;
            out.hybrid.analog
        }
        DesignMethod::BinaryRank1 => {
            let alphabet = PhaseAlphabet::new(2)?;
            let mut indices = DMatrix::zeros(opt.nrows(), num_rf);
            for k in 0..num_rf {
                let target = CVector::from_column_slice(opt.column(k % opt.ncols()).as_slice());
                let column = binary_rank1_design(&target)?;
                for m in 0..opt.nrows() {
                    indices[(m, k)] = column.indices()[(m, 0)];
                }
            }
            AnalogStage::Pos(AnalogBeamformer::new(indices, alphabet)?)
        }
        DesignMethod::Exhaustive { alphabet } => {
            let mut indices = DMatrix::zeros(opt.nrows(), num_rf);
            for k in 0..num_rf {
                let target = CVector::from_column_slice(opt.column(k % opt.ncols()).as_slice());
                let (col, _) = exhaustive_analog_search(&target, *alphabet)?;
                for m in 0..opt.nrows() {
                    indices[(m, k)] = col[m];
                }
            }
            AnalogStage::Pos(AnalogBeamformer::new(indices, *alphabet)?)
        }
    };
    let digital = lstsq(&analog.realize(), opt)?.solution;
    Ok((analog, digital))
}

/// Design transmit and receive hybrid beamformers for a channel.
///
/// The precoder targets the top right singular vectors and satisfies the
/// stream power constraint; the combiner targets the top left singular
/// vectors with an unconstrained least-squares digital stage.
pub fn design_hybrid(
    channel: &CMatrix,
    method: &DesignMethod,
    num_rf_tx: usize,
    num_rf_rx: usize,
    num_streams: usize,
) -> Result<(HybridBeamformer, HybridBeamformer)> {
    if num_streams == 0 {
        return Err(Error::InvalidInput("num_streams must be positive".into()));
    }
    if num_rf_tx < num_streams || num_rf_tx > channel.ncols() {
        return Err(Error::InvalidInput(format!(
            "tx RF chains {num_rf_tx} outside [{num_streams}, {}]",
            channel.ncols()
        )));
    }
    if num_rf_rx < num_streams || num_rf_rx > channel.nrows() {
        return Err(Error::InvalidInput(format!(
            "rx RF chains {num_rf_rx} outside [{num_streams}, {}]",
            channel.nrows()
        )));
    }
    let (f_opt, w_opt) = svd_full_digital(channel, num_streams)?;

    let (tx_analog, tx_digital) = design_side(&f_opt, method, num_rf_tx)?;
    let tx_digital = scale_to_stream_power(&tx_analog.realize(), tx_digital, num_streams)?;
    let tx = HybridBeamformer {
        analog: tx_analog,
        digital: DigitalBeamformer { matrix: tx_digital },
    };

    let (rx_analog, rx_digital) = design_side(&w_opt, method, num_rf_rx)?;
    let rx = HybridBeamformer {
        analog: rx_analog,
        digital: DigitalBeamformer { matrix: rx_digital },
    };
    Ok((tx, rx))
}
