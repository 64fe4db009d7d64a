//! Link and hardware metrics: spectral efficiency of a beamformed MIMO
//! link, transmitter power consumption per architecture, energy
//! efficiency, and array beam patterns.

use nalgebra::Cholesky;

use crate::channel::{array_response, ArrayGeometry};
use crate::error::{Error, Result};
use crate::linalg::top_svd;
use crate::{CMatrix, CVector};

/// Per-component transmitter power constants, in mW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub p_baseband: f64,
    pub p_rf_chain: f64,
    pub p_phase_shifter: f64,
    pub p_switch: f64,
    pub p_transmit: f64,
    /// Phase over-samplers are passive; default 0, overridable.
    pub p_pos: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            p_baseband: 200.0,
            p_rf_chain: 300.0,
            p_phase_shifter: 40.0,
            p_switch: 5.0,
            p_transmit: 500.0,
            p_pos: 0.0,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.p_baseband,
            self.p_rf_chain,
            self.p_phase_shifter,
            self.p_switch,
            self.p_transmit,
            self.p_pos,
        ];
        if all.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidInput(
                "power constants must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Transmitter front-end architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchitectureKind {
    FullDigital,
    PsHybrid,
    PosSwHybrid,
}

impl ArchitectureKind {
    pub fn label(&self) -> &'static str {
        match self {
            ArchitectureKind::FullDigital => "full_digital",
            ArchitectureKind::PsHybrid => "ps_hybrid",
            ArchitectureKind::PosSwHybrid => "pos_sw_hybrid",
        }
    }
}

/// An architecture instance: kind plus antenna and RF-chain counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    kind: ArchitectureKind,
    num_antennas: usize,
    num_rf_chains: usize,
}

impl Architecture {
    pub fn new(kind: ArchitectureKind, num_antennas: usize, num_rf_chains: usize) -> Result<Self> {
        if num_rf_chains > num_antennas {
            return Err(Error::InvalidInput(format!(
                "{num_rf_chains} RF chains exceed {num_antennas} antennas"
            )));
        }
        if kind == ArchitectureKind::FullDigital && num_rf_chains != num_antennas {
            return Err(Error::InvalidInput(
                "full-digital requires one RF chain per antenna".into(),
            ));
        }
        Ok(Self {
            kind,
            num_antennas,
            num_rf_chains,
        })
    }

    /// Full-digital transmitter: one RF chain per antenna.
    pub fn full_digital(num_antennas: usize) -> Self {
        Self {
            kind: ArchitectureKind::FullDigital,
            num_antennas,
            num_rf_chains: num_antennas,
        }
    }

    pub fn kind(&self) -> ArchitectureKind {
        self.kind
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_rf_chains(&self) -> usize {
        self.num_rf_chains
    }
}

/// Total transmitter power in mW.
///
/// - full-digital: `P_BB + N_t P_RF + P_tx`
/// - PS hybrid: `P_BB + N_rf P_RF + N_t N_rf P_PS + P_tx`
/// - POS-SW hybrid: `P_BB + N_rf P_RF + N_rf P_POS + N_t N_rf P_SW + P_tx`
pub fn total_power(arch: &Architecture, model: &PowerModel) -> f64 {
    let n_t = arch.num_antennas as f64;
    let n_rf = arch.num_rf_chains as f64;
    match arch.kind {
        ArchitectureKind::FullDigital => model.p_baseband + n_t * model.p_rf_chain + model.p_transmit,
        ArchitectureKind::PsHybrid => {
            model.p_baseband
                + n_rf * model.p_rf_chain
                + n_t * n_rf * model.p_phase_shifter
                + model.p_transmit
        }
        ArchitectureKind::PosSwHybrid => {
            model.p_baseband
                + n_rf * model.p_rf_chain
                + n_rf * model.p_pos
                + n_t * n_rf * model.p_switch
                + model.p_transmit
        }
    }
}

/// Energy efficiency in bits/s/Hz per Watt: `se / (total_power_mW / 1000)`.
pub fn energy_efficiency(se: f64, arch: &Architecture, model: &PowerModel) -> Result<f64> {
    let power_mw = total_power(arch, model);
    if !(power_mw > 0.0) {
        return Err(Error::ZeroTotalPower);
    }
    Ok(se / (power_mw / 1000.0))
}

/// Spectral efficiency in bits/s/Hz of the effective link
/// `W^H H F` under Gaussian signaling:
/// `log2 det(I + (snr/N_s) R_n^{-1} W^H H F F^H H^H W)` with
/// `R_n = W^H W` (unit-variance noise, snr = P/sigma^2).
///
/// `f` is the effective precoder (expected to carry total power `N_s`);
/// `w` the effective combiner, any invertible column scaling of which
/// leaves the result unchanged.
pub fn spectral_efficiency(
    channel: &CMatrix,
    f: &CMatrix,
    w: &CMatrix,
    snr_linear: f64,
    num_streams: usize,
) -> Result<f64> {
    if f.ncols() != num_streams || w.ncols() != num_streams {
        return Err(Error::InvalidInput(format!(
            "beamformers must have {num_streams} columns"
        )));
    }
    if channel.nrows() != w.nrows() || channel.ncols() != f.nrows() {
        return Err(Error::InvalidInput("beamformer/channel shape mismatch".into()));
    }
    let r_n = w.adjoint() * w;
    let chol = Cholesky::new(r_n).ok_or(Error::SingularCombiner)?;
    // guard against a factor that only "succeeded" at rounding level
    let mean_diag: f64 =
        chol.l_dirty().diagonal().iter().map(|d| d.re).sum::<f64>() / num_streams as f64;
    let min_pivot = chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|d| d.re)
        .fold(f64::INFINITY, f64::min);
    // exact rank deficiency shows up as a pivot near sqrt(machine eps)
    if !(min_pivot > mean_diag * 1e-7) {
        return Err(Error::SingularCombiner);
    }

    let g = w.adjoint() * channel * f;
    let whitened = chol
        .l()
        .solve_lower_triangular(&g)
        .ok_or(Error::SingularCombiner)?;
    let (_, sigma, _) = top_svd(&whitened, num_streams)?;
    let factor = snr_linear / num_streams as f64;
    Ok(sigma
        .iter()
        .map(|s| (1.0 + factor * s * s).log2())
        .sum())
}

/// Normalized power pattern of a weight vector over an angle grid:
/// `gain(theta) = |a(theta)^H f|^2 / ||f||^2`, values in [0, 1].
pub fn beam_pattern(
    weights: &CVector,
    geometry: &ArrayGeometry,
    angle_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if weights.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Err(Error::ZeroVector);
    }
    if weights.len() != geometry.num_antennas {
        return Err(Error::InvalidInput(
            "weight vector length differs from array size".into(),
        ));
    }
    let norm_sq: f64 = weights.iter().map(|z| z.norm_sqr()).sum();
    Ok(angle_grid
        .iter()
        .map(|&theta| {
            let a = array_response(geometry, theta);
            let corr = (a.adjoint() * weights)[(0, 0)];
            (theta, corr.norm_sqr() / norm_sq)
        })
        .collect())
}

/// Uniform angle grid in degrees, converted to radians, inclusive of both
/// endpoints at the given step.
pub fn degree_grid(start_deg: f64, end_deg: f64, step_deg: f64) -> Vec<f64> {
    let count = ((end_deg - start_deg) / step_deg).round() as usize;
    (0..=count)
        .map(|i| (start_deg + i as f64 * step_deg).to_radians())
        .collect()
}
