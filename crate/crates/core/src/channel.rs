//! Clustered mmWave MIMO channel model with uniform-linear-array steering
//! vectors.
//!
//! A realization is a sum of rank-1 path contributions: cluster mean AoDs
//! are uniform over a configurable range, cluster mean AoAs uniform over a
//! sector, per-ray offsets Laplacian-distributed around the cluster mean,
//! and path gains circularly-symmetric complex Gaussian. The matrix is
//! scaled so that E||H||_F^2 = N_t * N_r.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex};

/// Uniform linear array: antenna count plus element spacing in
/// wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub num_antennas: usize,
    pub element_spacing: f64,
}

impl ArrayGeometry {
    /// Half-wavelength-spaced ULA.
    pub fn ula(num_antennas: usize) -> Self {
        Self {
            num_antennas,
            element_spacing: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_antennas < 1 {
            return Err(Error::InvalidInput("array needs at least one antenna".into()));
        }
        if !(self.element_spacing > 0.0) {
            return Err(Error::InvalidInput("element spacing must be positive".into()));
        }
        Ok(())
    }
}

/// Parameters of the clustered channel model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub num_clusters: usize,
    pub rays_per_cluster: usize,
    /// Laplacian angle spread of per-ray offsets, radians.
    pub angle_spread: f64,
    /// Half-open interval the cluster mean AoDs are drawn from.
    pub aod_mean_range: (f64, f64),
    /// Width of the AoA sector, radians.
    pub aoa_sector_width: f64,
    /// Center of the AoA sector, radians.
    pub aoa_sector_center: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            num_clusters: 10,
            rays_per_cluster: 5,
            angle_spread: 0.5_f64.to_radians(),
            aod_mean_range: (0.0, TAU),
            aoa_sector_width: std::f64::consts::FRAC_PI_3,
            aoa_sector_center: 0.0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_clusters < 1 || self.rays_per_cluster < 1 {
            return Err(Error::InvalidInput(
                "cluster and ray counts must be positive".into(),
            ));
        }
        if !(self.angle_spread > 0.0) {
            return Err(Error::InvalidInput("angle spread must be positive".into()));
        }
        if !(self.aoa_sector_width > 0.0 && self.aoa_sector_width <= TAU) {
            return Err(Error::InvalidInput(
                "AoA sector width must lie in (0, 2*pi]".into(),
            ));
        }
        if !(self.aod_mean_range.1 > self.aod_mean_range.0) {
            return Err(Error::InvalidInput("empty AoD mean range".into()));
        }
        Ok(())
    }

    /// Total number of propagation paths per realization.
    pub fn num_paths(&self) -> usize {
        self.num_clusters * self.rays_per_cluster
    }
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex,
    /// Angle of departure, radians.
    pub aod: f64,
    /// Angle of arrival, radians.
    pub aoa: f64,
}

/// A sampled channel: the matrix together with the ground-truth paths it
/// was built from.
///
/// Paths are ordered cluster-major: rays of cluster `c` occupy indices
/// `c * rays_per_cluster ..`. `cluster_means` records the sampled
/// (mean AoD, mean AoA) per cluster for statistical checks.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub matrix: CMatrix,
    pub paths: Vec<Path>,
    pub cluster_means: Vec<(f64, f64)>,
}

/// ULA steering vector: element k is `(1/sqrt(N)) exp(j 2 pi d k sin(angle))`.
///
/// The output always has unit 2-norm.
pub fn array_response(geometry: &ArrayGeometry, angle: f64) -> CVector {
    let n = geometry.num_antennas;
    let scale = 1.0 / (n as f64).sqrt();
    let step = TAU * geometry.element_spacing * angle.sin();
    CVector::from_fn(n, |k, _| Complex::from_polar(scale, step * k as f64))
}

/// Laplacian sample with scale `spread` via inverse CDF.
fn laplacian(rng: &mut impl Rng, spread: f64) -> f64 {
    // u in (-1/2, 1/2); 1 - 2|u| stays strictly positive
    let u: f64 = rng.gen::<f64>() - 0.5;
    -spread * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Standard circularly-symmetric complex Gaussian, unit variance.
pub(crate) fn complex_gaussian(rng: &mut impl Rng) -> Complex {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im) / std::f64::consts::SQRT_2
}

fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// Draw one clustered channel realization.
///
/// Sampling order is fixed (per cluster: mean AoD, mean AoA, then per
/// ray: AoD offset, AoA offset, gain), so a given RNG state always
/// produces the identical realization.
pub fn sample_channel(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    config: &ChannelConfig,
    rng: &mut impl Rng,
) -> Result<ChannelRealization> {
    tx.validate()?;
    rx.validate()?;
    config.validate()?;

    let mut paths = Vec::with_capacity(config.num_paths());
    let mut cluster_means = Vec::with_capacity(config.num_clusters);
    let (aod_lo, aod_hi) = config.aod_mean_range;
    let aoa_lo = config.aoa_sector_center - config.aoa_sector_width / 2.0;
    let aoa_hi = config.aoa_sector_center + config.aoa_sector_width / 2.0;

    for _ in 0..config.num_clusters {
        let mean_aod = rng.gen_range(aod_lo..aod_hi);
        let mean_aoa = rng.gen_range(aoa_lo..aoa_hi);
        cluster_means.push((mean_aod, mean_aoa));
        for _ in 0..config.rays_per_cluster {
            let aod = wrap_angle(mean_aod + laplacian(rng, config.angle_spread));
            let aoa = wrap_angle(mean_aoa + laplacian(rng, config.angle_spread));
            let gain = complex_gaussian(rng);
            paths.push(Path { gain, aod, aoa });
        }
    }

    let normalization =
        ((tx.num_antennas * rx.num_antennas) as f64 / config.num_paths() as f64).sqrt();
    let matrix = channel_from_paths(&paths, tx, rx, normalization)?;
    Ok(ChannelRealization {
        matrix,
        paths,
        cluster_means,
    })
}

/// Deterministic reconstruction of the channel matrix from a path list:
/// `normalization * sum_p gain_p a_rx(aoa_p) a_tx(aod_p)^H`.
pub fn channel_from_paths(
    paths: &[Path],
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    normalization: f64,
) -> Result<CMatrix> {
    if paths.is_empty() {
        return Err(Error::NoPaths);
    }
    tx.validate()?;
    rx.validate()?;
    let mut h = CMatrix::zeros(rx.num_antennas, tx.num_antennas);
    for path in paths {
        let a_rx = array_response(rx, path.aoa);
        let a_tx = array_response(tx, path.aod);
        for t in 0..tx.num_antennas {
            let col_factor = path.gain * a_tx[t].conj();
            for r in 0..rx.num_antennas {
                h[(r, t)] += col_factor * a_rx[r];
            }
        }
    }
    h.scale_mut(normalization);
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro_norm_sq;
    use crate::rng::trial_rng;

    const N64: ArrayGeometry = ArrayGeometry {
        num_antennas: 64,
        element_spacing: 0.5,
    };

    #[test]
    fn array_response_broadside_is_uniform() {
        let a = array_response(&ArrayGeometry::ula(4), 0.0);
        for k in 0..4 {
            assert!((a[k] - Complex::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn array_response_endfire_alternates_sign() {
        let a = array_response(&ArrayGeometry::ula(2), std::f64::consts::FRAC_PI_2);
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((a[0] - Complex::new(s, 0.0)).norm() < 1e-12);
        assert!((a[1] - Complex::new(-s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn array_response_unit_norm() {
        for &angle in &[0.3, -1.2, 2.7, 0.0, 1.5707] {
            let a = array_response(&N64, angle);
            assert!((a.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_channel_default_has_50_paths() {
        let mut rng = trial_rng(1, 0);
        let real = sample_channel(&N64, &N64, &ChannelConfig::default(), &mut rng).unwrap();
        assert_eq!(real.paths.len(), 50);
        assert_eq!(real.matrix.nrows(), 64);
        assert_eq!(real.matrix.ncols(), 64);
    }

    #[test]
    fn sample_channel_is_deterministic() {
        let cfg = ChannelConfig::default();
        let a = sample_channel(&N64, &N64, &cfg, &mut trial_rng(9, 3)).unwrap();
        let b = sample_channel(&N64, &N64, &cfg, &mut trial_rng(9, 3)).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.paths, b.paths);
    }

    #[test]
    fn realization_round_trips_through_paths() {
        let cfg = ChannelConfig::default();
        let real = sample_channel(&N64, &N64, &cfg, &mut trial_rng(4, 8)).unwrap();
        let normalization = ((64.0 * 64.0) / cfg.num_paths() as f64).sqrt();
        let rebuilt = channel_from_paths(&real.paths, &N64, &N64, normalization).unwrap();
        let max_err = (&real.matrix - &rebuilt)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-12);
    }

    #[test]
    fn single_unit_path_gives_all_ones() {
        let g2 = ArrayGeometry::ula(2);
        let paths = [Path {
            gain: Complex::new(1.0, 0.0),
            aod: 0.0,
            aoa: 0.0,
        }];
        let h = channel_from_paths(&paths, &g2, &g2, 2.0).unwrap();
        for z in h.iter() {
            assert!((z - Complex::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn opposite_gains_cancel() {
        let g2 = ArrayGeometry::ula(2);
        let g = Complex::new(0.3, -0.8);
        let paths = [
            Path { gain: g, aod: 0.7, aoa: -0.2 },
            Path { gain: -g, aod: 0.7, aoa: -0.2 },
        ];
        let h = channel_from_paths(&paths, &g2, &g2, 1.0).unwrap();
        assert!(fro_norm_sq(&h) < 1e-28);
    }

    #[test]
    fn empty_path_list_is_an_error() {
        let g = ArrayGeometry::ula(2);
        assert!(matches!(
            channel_from_paths(&[], &g, &g, 1.0),
            Err(Error::NoPaths)
        ));
    }

    #[test]
    fn frobenius_norm_matches_normalization_in_expectation() {
        // E||H||_F^2 = N_t * N_r under the gain/normalization convention
        let cfg = ChannelConfig::default();
        let trials = 1000;
        let mut acc = 0.0;
        for t in 0..trials {
            let real = sample_channel(&N64, &N64, &cfg, &mut trial_rng(11, t)).unwrap();
            acc += fro_norm_sq(&real.matrix);
        }
        let mean = acc / trials as f64;
        let expected = 64.0 * 64.0;
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "mean ||H||_F^2 = {mean:.1}, expected ~{expected}"
        );
    }

    #[test]
    fn ray_aoas_track_cluster_means() {
        // statistical sanity: sample mean of ray AoAs close to the cluster
        // mean for most clusters
        let cfg = ChannelConfig::default();
        let bound = 3.0 * cfg.angle_spread / (cfg.rays_per_cluster as f64).sqrt();
        let mut within = 0usize;
        let mut total = 0usize;
        for t in 0..50 {
            let real = sample_channel(&N64, &N64, &cfg, &mut trial_rng(23, t)).unwrap();
            for (c, &(_, mean_aoa)) in real.cluster_means.iter().enumerate() {
                let rays = &real.paths[c * cfg.rays_per_cluster..(c + 1) * cfg.rays_per_cluster];
                let avg_dev: f64 = rays
                    .iter()
                    .map(|p| {
                        let d = p.aoa - mean_aoa;
                        (d + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI
                    })
                    .sum::<f64>()
                    / cfg.rays_per_cluster as f64;
                total += 1;
                if avg_dev.abs() <= bound {
                    within += 1;
                }
            }
        }
        assert!(
            within as f64 >= 0.9 * total as f64,
            "only {within}/{total} clusters within the sanity bound"
        );
    }

    #[test]
    fn aoa_means_stay_in_sector() {
        let cfg = ChannelConfig::default();
        let half = cfg.aoa_sector_width / 2.0;
        for t in 0..20 {
            let real = sample_channel(&N64, &N64, &cfg, &mut trial_rng(5, t)).unwrap();
            for &(_, mean_aoa) in &real.cluster_means {
                assert!(mean_aoa >= cfg.aoa_sector_center - half);
                assert!(mean_aoa < cfg.aoa_sector_center + half);
            }
        }
    }
}
