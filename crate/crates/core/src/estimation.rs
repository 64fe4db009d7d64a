//! Open-loop compressed-sensing channel estimation.
//!
//! Training precoders/combiners with discrete entries excite the channel;
//! the stacked measurements are a linear function of the channel's
//! coefficients on an angle-grid dictionary, and orthogonal matching
//! pursuit recovers a sparse coefficient vector from which the channel
//! matrix is rebuilt.

use rand::Rng;

use crate::channel::{array_response, complex_gaussian, ArrayGeometry};
use crate::error::{Error, Result};
use crate::linalg::{fro_norm_sq, lstsq};
use crate::{CMatrix, CVector, Complex};

/// How training beamformers are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingKind {
    /// Entries i.i.d. uniform over {+1, -1} / sqrt(N_ant).
    PseudoRandomBinary,
    /// Entries i.i.d. uniform over {+1, -1, +j, -j} / sqrt(N_ant).
    PseudoRandomQuaternary,
    /// Columns of a Sylvester (+-1) orthogonal construction / sqrt(N_ant).
    Deterministic,
}

impl TrainingKind {
    pub fn label(&self) -> &'static str {
        match self {
            TrainingKind::PseudoRandomBinary => "pseudo_random_binary",
            TrainingKind::PseudoRandomQuaternary => "pseudo_random_quaternary",
            TrainingKind::Deterministic => "deterministic",
        }
    }
}

/// Training matrices for both link ends; columns are unit-norm
/// beamforming vectors.
#[derive(Debug, Clone)]
pub struct TrainingDesign {
    /// N_t x M_t precoding vectors.
    pub tx_training: CMatrix,
    /// N_r x M_r combining vectors.
    pub rx_training: CMatrix,
    pub kind: TrainingKind,
}

impl TrainingDesign {
    pub fn num_tx_vectors(&self) -> usize {
        self.tx_training.ncols()
    }

    pub fn num_rx_vectors(&self) -> usize {
        self.rx_training.ncols()
    }

    /// Total number of measurements one sweep produces.
    pub fn num_measurements(&self) -> usize {
        self.num_tx_vectors() * self.num_rx_vectors()
    }
}

fn random_binary_matrix(n: usize, m: usize, rng: &mut impl Rng) -> CMatrix {
    let amp = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, m, |_, _| {
        if rng.gen::<bool>() {
            Complex::new(amp, 0.0)
        } else {
            Complex::new(-amp, 0.0)
        }
    })
}

fn random_quaternary_matrix(n: usize, m: usize, rng: &mut impl Rng) -> CMatrix {
    let amp = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, m, |_, _| match rng.gen_range(0..4) {
        0 => Complex::new(amp, 0.0),
        1 => Complex::new(0.0, amp),
        2 => Complex::new(-amp, 0.0),
        _ => Complex::new(0.0, -amp),
    })
}

/// First `m` columns of the Sylvester +-1 orthogonal matrix of order `n`
/// (a power of two), scaled to unit-norm columns.
fn sylvester_columns(n: usize, m: usize) -> Result<CMatrix> {
    if !n.is_power_of_two() {
        return Err(Error::DeterministicUnavailable(format!(
            "array size {n} is not a power of two"
        )));
    }
    if m > n {
        return Err(Error::DeterministicUnavailable(format!(
            "{m} orthogonal vectors requested from an order-{n} construction"
        )));
    }
    let amp = 1.0 / (n as f64).sqrt();
    Ok(CMatrix::from_fn(n, m, |r, c| {
        // Sylvester entry: (-1)^{popcount(r & c)}
        if (r & c).count_ones() % 2 == 0 {
            Complex::new(amp, 0.0)
        } else {
            Complex::new(-amp, 0.0)
        }
    }))
}

/// Generate training beamformers for both ends.
///
/// The transmit matrix is drawn before the receive matrix, so a fixed
/// RNG state reproduces the design exactly.
pub fn generate_training(
    kind: TrainingKind,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    num_tx_vectors: usize,
    num_rx_vectors: usize,
    rng: &mut impl Rng,
) -> Result<TrainingDesign> {
    tx.validate()?;
    rx.validate()?;
    if num_tx_vectors == 0 || num_rx_vectors == 0 {
        return Err(Error::InvalidInput(
            "training needs at least one vector per side".into(),
        ));
    }
    let (tx_training, rx_training) = match kind {
        TrainingKind::PseudoRandomBinary => (
            random_binary_matrix(tx.num_antennas, num_tx_vectors, rng),
            random_binary_matrix(rx.num_antennas, num_rx_vectors, rng),
        ),
        TrainingKind::PseudoRandomQuaternary => (
            random_quaternary_matrix(tx.num_antennas, num_tx_vectors, rng),
            random_quaternary_matrix(rx.num_antennas, num_rx_vectors, rng),
        ),
        TrainingKind::Deterministic => (
            sylvester_columns(tx.num_antennas, num_tx_vectors)?,
            sylvester_columns(rx.num_antennas, num_rx_vectors)?,
        ),
    };
    Ok(TrainingDesign {
        tx_training,
        rx_training,
        kind,
    })
}

/// Largest normalized inner product between distinct columns, in [0, 1].
pub fn mutual_coherence(matrix: &CMatrix) -> Result<f64> {
    if matrix.ncols() < 2 {
        return Err(Error::InvalidInput(
            "mutual coherence needs at least two columns".into(),
        ));
    }
    let norms: Vec<f64> = (0..matrix.ncols()).map(|j| matrix.column(j).norm()).collect();
    if norms.iter().any(|&n| n == 0.0) {
        return Err(Error::ZeroColumn);
    }
    let mut max = 0.0_f64;
    for i in 0..matrix.ncols() {
        for j in (i + 1)..matrix.ncols() {
            let dot = (matrix.column(i).adjoint() * matrix.column(j))[(0, 0)].norm();
            max = max.max(dot / (norms[i] * norms[j]));
        }
    }
    Ok(max)
}

/// Angle-grid dictionary: `grid_size` directions per side, uniform in
/// spatial frequency over [-1, 1), with unit-norm steering-vector atoms.
#[derive(Debug, Clone)]
pub struct AngleDictionary {
    pub tx_geometry: ArrayGeometry,
    pub rx_geometry: ArrayGeometry,
    pub tx_grid: Vec<f64>,
    pub rx_grid: Vec<f64>,
    /// N_t x G steering atoms for the transmit side.
    pub tx_atoms: CMatrix,
    /// N_r x G steering atoms for the receive side.
    pub rx_atoms: CMatrix,
}

impl AngleDictionary {
    pub fn new(tx: &ArrayGeometry, rx: &ArrayGeometry, grid_size: usize) -> Result<Self> {
        tx.validate()?;
        rx.validate()?;
        if grid_size < tx.num_antennas.max(rx.num_antennas) {
            return Err(Error::InvalidInput(format!(
                "grid size {grid_size} below max antenna count {}",
                tx.num_antennas.max(rx.num_antennas)
            )));
        }
        let angles: Vec<f64> = (0..grid_size)
            .map(|g| (-1.0 + 2.0 * g as f64 / grid_size as f64).asin())
            .collect();
        let tx_atoms = atoms_for(tx, &angles);
        let rx_atoms = atoms_for(rx, &angles);
        Ok(Self {
            tx_geometry: *tx,
            rx_geometry: *rx,
            tx_grid: angles.clone(),
            rx_grid: angles,
            tx_atoms,
            rx_atoms,
        })
    }

    /// Dictionary with the default grid of `2 * max(N_t, N_r)` points.
    pub fn with_default_grid(tx: &ArrayGeometry, rx: &ArrayGeometry) -> Result<Self> {
        Self::new(tx, rx, 2 * tx.num_antennas.max(rx.num_antennas))
    }

    pub fn grid_size(&self) -> usize {
        self.tx_grid.len()
    }

    /// Number of sensing-matrix columns, `G_t * G_r`.
    pub fn num_atom_pairs(&self) -> usize {
        self.tx_grid.len() * self.rx_grid.len()
    }

    /// Linear column index of the (tx, rx) grid pair: `g_r` varies fastest.
    pub fn pair_to_column(&self, g_t: usize, g_r: usize) -> usize {
        g_t * self.rx_grid.len() + g_r
    }

    /// Inverse of [`Self::pair_to_column`].
    pub fn column_to_pair(&self, column: usize) -> (usize, usize) {
        (column / self.rx_grid.len(), column % self.rx_grid.len())
    }
}

fn atoms_for(geometry: &ArrayGeometry, angles: &[f64]) -> CMatrix {
    let mut atoms = CMatrix::zeros(geometry.num_antennas, angles.len());
    for (g, &angle) in angles.iter().enumerate() {
        atoms.set_column(g, &array_response(geometry, angle));
    }
    atoms
}

/// Sweep all training pairs over the channel: measurement
/// `(m_r, m_t)` is `w_{m_r}^H H f_{m_t}` plus complex Gaussian noise of
/// variance `1/snr_linear` (pass infinity for noiseless), stacked
/// row-major in `(m_r, m_t)`.
pub fn measure(
    channel: &CMatrix,
    training: &TrainingDesign,
    snr_linear: f64,
    rng: &mut impl Rng,
) -> Result<CVector> {
    if channel.nrows() != training.rx_training.nrows()
        || channel.ncols() != training.tx_training.nrows()
    {
        return Err(Error::InvalidInput(
            "channel and training dimensions do not match".into(),
        ));
    }
    if !(snr_linear > 0.0) {
        return Err(Error::InvalidInput("SNR must be positive".into()));
    }
    let clean = training.rx_training.adjoint() * channel * &training.tx_training;
    let m_r = clean.nrows();
    let m_t = clean.ncols();
    let noise_scale = if snr_linear.is_infinite() {
        0.0
    } else {
        (1.0 / snr_linear).sqrt()
    };
    let mut y = CVector::zeros(m_r * m_t);
    for r in 0..m_r {
        for t in 0..m_t {
            let noise = if noise_scale > 0.0 {
                complex_gaussian(rng) * noise_scale
            } else {
                Complex::new(0.0, 0.0)
            };
            y[r * m_t + t] = clean[(r, t)] + noise;
        }
    }
    Ok(y)
}

/// Linear operator mapping grid-pair coefficients to measurements.
///
/// Row `(m_r, m_t)` (row-major) and column `(g_t, g_r)` (`g_r` fastest)
/// hold `(w_{m_r}^H a_r(g_r)) (a_t(g_t)^H f_{m_t})`; the ordering is part
/// of the contract and matches [`measure`] and
/// [`AngleDictionary::pair_to_column`].
pub fn build_sensing_matrix(
    training: &TrainingDesign,
    dictionary: &AngleDictionary,
) -> Result<CMatrix> {
    if training.tx_training.nrows() != dictionary.tx_geometry.num_antennas
        || training.rx_training.nrows() != dictionary.rx_geometry.num_antennas
    {
        return Err(Error::InvalidInput(
            "training and dictionary dimensions do not match".into(),
        ));
    }
    let m_t = training.num_tx_vectors();
    let m_r = training.num_rx_vectors();
    let g_t_count = dictionary.tx_grid.len();
    let g_r_count = dictionary.rx_grid.len();

    // rx correlations: (m_r, g_r) -> w^H a_r ; tx correlations: (g_t, m_t) -> a_t^H f
    let rx_corr = training.rx_training.adjoint() * &dictionary.rx_atoms;
    let tx_corr = dictionary.tx_atoms.adjoint() * &training.tx_training;

    let mut sensing = CMatrix::zeros(m_r * m_t, g_t_count * g_r_count);
    for g_t in 0..g_t_count {
        for g_r in 0..g_r_count {
            let col = dictionary.pair_to_column(g_t, g_r);
            for r in 0..m_r {
                let w_a = rx_corr[(r, g_r)];
                for t in 0..m_t {
                    sensing[(r * m_t + t, col)] = w_a * tx_corr[(g_t, t)];
                }
            }
        }
    }
    Ok(sensing)
}

/// Greedy sparse solution of `y ~ sensing * z`.
#[derive(Debug, Clone)]
pub struct OmpSolution {
    /// Selected sensing-matrix columns, in selection order.
    pub selected: Vec<usize>,
    /// Least-squares coefficients over the final support.
    pub coefficients: Vec<Complex>,
    /// Residual 2-norm before each selection and after the last
    /// refit; non-increasing.
    pub residual_norms: Vec<f64>,
}

/// Orthogonal matching pursuit: per round, pick the atom with the largest
/// norm-weighted correlation to the residual, then refit all selected
/// coefficients by least squares. Stops after `max_sparsity` atoms or
/// when the residual drops below `residual_tol * ||y||`.
pub fn omp(
    y: &CVector,
    sensing: &CMatrix,
    max_sparsity: usize,
    residual_tol: f64,
) -> Result<OmpSolution> {
    if max_sparsity == 0 {
        return Err(Error::InvalidInput("sparsity budget must be positive".into()));
    }
    if max_sparsity > y.len() {
        return Err(Error::InvalidInput(format!(
            "sparsity {max_sparsity} exceeds {} measurements",
            y.len()
        )));
    }
    if sensing.nrows() != y.len() {
        return Err(Error::InvalidInput(
            "sensing matrix rows differ from measurement count".into(),
        ));
    }
    let num_atoms = sensing.ncols();
    let col_norms: Vec<f64> = (0..num_atoms).map(|j| sensing.column(j).norm()).collect();
    let y_norm = y.norm();
    let threshold = residual_tol * y_norm;

    let mut residual = y.clone();
    let mut residual_norm = y_norm;
    let mut residual_norms = vec![residual_norm];
    let mut selected: Vec<usize> = Vec::new();
    let mut coefficients: Vec<Complex> = Vec::new();
    let mut is_selected = vec![false; num_atoms];

    while selected.len() < max_sparsity && residual_norm > threshold && residual_norm > 0.0 {
        let mut best_atom = None;
        let mut best_corr = 0.0_f64;
        for j in 0..num_atoms {
            if is_selected[j] || col_norms[j] == 0.0 {
                continue;
            }
            let corr = (sensing.column(j).adjoint() * &residual)[(0, 0)].norm() / col_norms[j];
            if corr > best_corr {
                best_corr = corr;
                best_atom = Some(j);
            }
        }
        let Some(atom) = best_atom else {
            break; // residual orthogonal to every remaining atom
        };
        selected.push(atom);
        is_selected[atom] = true;

        let mut sub = CMatrix::zeros(y.len(), selected.len());
        for (c, &j) in selected.iter().enumerate() {
            sub.set_column(c, &sensing.column(j));
        }
        let rhs = CMatrix::from_column_slice(y.len(), 1, y.as_slice());
        let fit = lstsq(&sub, &rhs)?;
        let new_residual = &rhs - &sub * &fit.solution;
        coefficients = fit.solution.column(0).iter().copied().collect();
        residual = CVector::from_column_slice(new_residual.as_slice());
        let new_norm = residual.norm();
        debug_assert!(new_norm <= residual_norm * (1.0 + 1e-12));
        residual_norm = new_norm;
        residual_norms.push(residual_norm);
    }

    Ok(OmpSolution {
        selected,
        coefficients,
        residual_norms,
    })
}

/// Sparse channel estimate on the dictionary grid.
#[derive(Debug, Clone)]
pub struct SparseEstimate {
    /// (tx grid index, rx grid index) per recovered path.
    pub support: Vec<(usize, usize)>,
    pub coefficients: Vec<Complex>,
    /// `sum_i coef_i a_r(g_r_i) a_t(g_t_i)^H`.
    pub reconstructed: CMatrix,
    /// Residual 2-norm history from the OMP solve.
    pub residual_norms: Vec<f64>,
}

const OMP_RESIDUAL_TOL: f64 = 1e-12;

/// Map an OMP solution back to grid pairs and rebuild the channel matrix
/// from rank-1 atom products.
pub fn reconstruct_estimate(solution: &OmpSolution, dictionary: &AngleDictionary) -> SparseEstimate {
    let n_r = dictionary.rx_geometry.num_antennas;
    let n_t = dictionary.tx_geometry.num_antennas;
    let mut reconstructed = CMatrix::zeros(n_r, n_t);
    let mut support = Vec::with_capacity(solution.selected.len());
    for (&column, &coef) in solution.selected.iter().zip(&solution.coefficients) {
        let (g_t, g_r) = dictionary.column_to_pair(column);
        support.push((g_t, g_r));
        let a_r = dictionary.rx_atoms.column(g_r);
        let a_t = dictionary.tx_atoms.column(g_t);
        for t in 0..n_t {
            let col_factor = coef * a_t[t].conj();
            for r in 0..n_r {
                reconstructed[(r, t)] += col_factor * a_r[r];
            }
        }
    }
    SparseEstimate {
        support,
        coefficients: solution.coefficients.clone(),
        reconstructed,
        residual_norms: solution.residual_norms.clone(),
    }
}

/// End-to-end estimation: sensing-matrix construction, OMP recovery, and
/// rank-1 channel reconstruction.
pub fn estimate_channel(
    measurements: &CVector,
    training: &TrainingDesign,
    dictionary: &AngleDictionary,
    max_sparsity: usize,
) -> Result<SparseEstimate> {
    let sensing = build_sensing_matrix(training, dictionary)?;
    let solution = omp(measurements, &sensing, max_sparsity, OMP_RESIDUAL_TOL)?;
    Ok(reconstruct_estimate(&solution, dictionary))
}

/// Normalized mean squared error `||H - H_est||_F^2 / ||H||_F^2`.
pub fn nmse(h_true: &CMatrix, h_est: &CMatrix) -> Result<f64> {
    if h_true.shape() != h_est.shape() {
        return Err(Error::InvalidInput("channel shapes differ".into()));
    }
    let denom = fro_norm_sq(h_true);
    if denom == 0.0 {
        return Err(Error::ZeroTrueChannel);
    }
    Ok(fro_norm_sq(&(h_true - h_est)) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use rand::Rng;

    fn g(n: usize) -> ArrayGeometry {
        ArrayGeometry::ula(n)
    }

    // -- training ----------------------------------------------------------

    #[test]
    fn binary_training_alphabet_is_exact() {
        let mut rng = derive_rng(401, &[0]);
        let design = generate_training(
            TrainingKind::PseudoRandomBinary,
            &g(64),
            &g(64),
            16,
            16,
            &mut rng,
        )
        .unwrap();
        let amp = 1.0 / 8.0;
        for z in design.tx_training.iter() {
            assert!(z.im == 0.0 && (z.re == amp || z.re == -amp));
        }
        for j in 0..design.tx_training.ncols() {
            assert!((design.tx_training.column(j).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quaternary_training_alphabet_is_exact() {
        let mut rng = derive_rng(403, &[0]);
        let design = generate_training(
            TrainingKind::PseudoRandomQuaternary,
            &g(16),
            &g(16),
            8,
            8,
            &mut rng,
        )
        .unwrap();
        let amp = 1.0 / 4.0;
        for z in design.rx_training.iter() {
            let ok = (z.re.abs() == amp && z.im == 0.0) || (z.re == 0.0 && z.im.abs() == amp);
            assert!(ok, "entry {z} outside the quaternary alphabet");
        }
    }

    #[test]
    fn deterministic_training_is_orthogonal() {
        let mut rng = derive_rng(405, &[0]);
        let design =
            generate_training(TrainingKind::Deterministic, &g(4), &g(4), 4, 4, &mut rng).unwrap();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let dot = (design.tx_training.column(i).adjoint() * design.tx_training.column(j))
                    [(0, 0)]
                .norm();
                assert_eq!(dot, 0.0);
            }
        }
        assert_eq!(mutual_coherence(&design.tx_training).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_training_beats_random_coherence() {
        let det = sylvester_columns(64, 32).unwrap();
        let det_coherence = mutual_coherence(&det).unwrap();
        let mut acc = 0.0;
        let seeds = 50;
        for s in 0..seeds {
            let mut rng = derive_rng(407, &[s]);
            let rand_mat = random_binary_matrix(64, 32, &mut rng);
            acc += mutual_coherence(&rand_mat).unwrap();
        }
        let mean_random = acc / seeds as f64;
        assert!(
            det_coherence <= mean_random,
            "deterministic {det_coherence} vs random mean {mean_random}"
        );
    }

    #[test]
    fn deterministic_training_needs_power_of_two() {
        let mut rng = derive_rng(409, &[0]);
        assert!(matches!(
            generate_training(TrainingKind::Deterministic, &g(6), &g(8), 4, 4, &mut rng),
            Err(Error::DeterministicUnavailable(_))
        ));
        assert!(matches!(
            generate_training(TrainingKind::Deterministic, &g(8), &g(8), 16, 4, &mut rng),
            Err(Error::DeterministicUnavailable(_))
        ));
    }

    // -- mutual coherence -------------------------------------------------------

    #[test]
    fn coherence_of_identity_is_zero() {
        let m = CMatrix::identity(4, 4);
        assert_eq!(mutual_coherence(&m).unwrap(), 0.0);
    }

    #[test]
    fn coherence_of_duplicated_column_is_one() {
        let mut rng = derive_rng(411, &[0]);
        let col = CVector::from_fn(6, |_, _| complex_gaussian(&mut rng));
        let mut m = CMatrix::zeros(6, 2);
        m.set_column(0, &col);
        m.set_column(1, &col);
        assert!((mutual_coherence(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_matches_pairwise_oracle_on_steering_dictionary() {
        let dict = AngleDictionary::new(&g(64), &g(64), 128).unwrap();
        let value = mutual_coherence(&dict.tx_atoms).unwrap();
        // brute-force pairwise maximum
        let mut oracle = 0.0_f64;
        for i in 0..128 {
            let ci = dict.tx_atoms.column(i);
            for j in (i + 1)..128 {
                let cj = dict.tx_atoms.column(j);
                let dot = (ci.adjoint() * cj)[(0, 0)].norm() / (ci.norm() * cj.norm());
                oracle = oracle.max(dot);
            }
        }
        assert!((value - oracle).abs() < 1e-14);
    }

    #[test]
    fn coherence_rejects_zero_columns_and_single_column() {
        let mut m = CMatrix::identity(3, 2);
        m.set_column(1, &CVector::zeros(3).column(0));
        assert!(matches!(mutual_coherence(&m), Err(Error::ZeroColumn)));
        let single = CMatrix::identity(3, 1);
        assert!(mutual_coherence(&single).is_err());
    }

    // -- measurements --------------------------------------------------------------

    #[test]
    fn aligned_training_measures_unity() {
        let tx = g(8);
        let rx = g(8);
        let aod = 0.4;
        let aoa = -0.2;
        let a_t = array_response(&tx, aod);
        let a_r = array_response(&rx, aoa);
        let mut h = CMatrix::zeros(8, 8);
        for t in 0..8 {
            for r in 0..8 {
                h[(r, t)] += a_r[r] * a_t[t].conj();
            }
        }
        let training = TrainingDesign {
            tx_training: CMatrix::from_column_slice(8, 1, a_t.as_slice()),
            rx_training: CMatrix::from_column_slice(8, 1, a_r.as_slice()),
            kind: TrainingKind::PseudoRandomBinary,
        };
        let mut rng = derive_rng(413, &[0]);
        let y = measure(&h, &training, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(y.len(), 1);
        assert!((y[0] - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_channel_measures_zero_noiseless() {
        let mut rng = derive_rng(417, &[0]);
        let training =
            generate_training(TrainingKind::PseudoRandomBinary, &g(8), &g(8), 4, 4, &mut rng)
                .unwrap();
        let h = CMatrix::zeros(8, 8);
        let y = measure(&h, &training, f64::INFINITY, &mut rng).unwrap();
        assert!(y.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn measurement_noise_is_reproducible() {
        let mut rng_a = derive_rng(419, &[7]);
        let mut rng_b = derive_rng(419, &[7]);
        let training = generate_training(
            TrainingKind::PseudoRandomBinary,
            &g(8),
            &g(8),
            4,
            4,
            &mut derive_rng(419, &[8]),
        )
        .unwrap();
        let mut h = CMatrix::zeros(8, 8);
        h[(0, 0)] = Complex::new(1.0, 0.0);
        let ya = measure(&h, &training, 100.0, &mut rng_a).unwrap();
        let yb = measure(&h, &training, 100.0, &mut rng_b).unwrap();
        assert_eq!(ya, yb);
    }

    // -- sensing matrix -----------------------------------------------------------------

    #[test]
    fn single_pair_sensing_entry_matches_definition() {
        let tx = g(4);
        let rx = g(4);
        let dict = AngleDictionary::new(&tx, &rx, 4).unwrap();
        let mut rng = derive_rng(421, &[0]);
        let training =
            generate_training(TrainingKind::PseudoRandomBinary, &tx, &rx, 1, 1, &mut rng).unwrap();
        let sensing = build_sensing_matrix(&training, &dict).unwrap();
        assert_eq!(sensing.nrows(), 1);
        assert_eq!(sensing.ncols(), 16);
        let g_t = 2;
        let g_r = 1;
        let w_a = (training.rx_training.column(0).adjoint() * dict.rx_atoms.column(g_r))[(0, 0)];
        let a_f = (dict.tx_atoms.column(g_t).adjoint() * training.tx_training.column(0))[(0, 0)];
        let expected = w_a * a_f;
        assert!((sensing[(0, dict.pair_to_column(g_t, g_r))] - expected).norm() < 1e-14);
    }

    #[test]
    fn sensing_matrix_matches_brute_force_oracle() {
        let tx = g(4);
        let rx = g(3);
        let dict = AngleDictionary::new(&tx, &rx, 5).unwrap();
        let mut rng = derive_rng(423, &[0]);
        let training =
            generate_training(TrainingKind::PseudoRandomQuaternary, &tx, &rx, 3, 2, &mut rng)
                .unwrap();
        let sensing = build_sensing_matrix(&training, &dict).unwrap();
        // direct double loop over (measurement, atom pair)
        for m_r in 0..2 {
            for m_t in 0..3 {
                for g_t in 0..5 {
                    for g_r in 0..5 {
                        let w = training.rx_training.column(m_r);
                        let f = training.tx_training.column(m_t);
                        let expected = (w.adjoint() * dict.rx_atoms.column(g_r))[(0, 0)]
                            * (dict.tx_atoms.column(g_t).adjoint() * f)[(0, 0)];
                        let got = sensing[(m_r * 3 + m_t, dict.pair_to_column(g_t, g_r))];
                        assert!((got - expected).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn sensing_columns_are_contractions_for_orthonormal_training() {
        let tx = g(4);
        let rx = g(4);
        let dict = AngleDictionary::new(&tx, &rx, 4).unwrap();
        let mut rng = derive_rng(427, &[0]);
        let training =
            generate_training(TrainingKind::Deterministic, &tx, &rx, 4, 4, &mut rng).unwrap();
        let sensing = build_sensing_matrix(&training, &dict).unwrap();
        for j in 0..sensing.ncols() {
            assert!(sensing.column(j).norm() <= 1.0 + 1e-12);
        }
    }

    // -- OMP --------------------------------------------------------------------------

    #[test]
    fn omp_recovers_single_scaled_atom() {
        let tx = g(8);
        let rx = g(8);
        let dict = AngleDictionary::new(&tx, &rx, 8).unwrap();
        let mut rng = derive_rng(429, &[0]);
        let training =
            generate_training(TrainingKind::PseudoRandomBinary, &tx, &rx, 8, 8, &mut rng).unwrap();
        let sensing = build_sensing_matrix(&training, &dict).unwrap();
        let atom = dict.pair_to_column(3, 5);
        let y = CVector::from_column_slice(
            (sensing.column(atom) * Complex::new(3.0, 0.0)).as_slice(),
        );
        let out = omp(&y, &sensing, 4, 1e-12).unwrap();
        assert_eq!(out.selected, vec![atom]);
        assert!((out.coefficients[0] - Complex::new(3.0, 0.0)).norm() < 1e-10);
        assert!(*out.residual_norms.last().unwrap() < 1e-10);
    }

    #[test]
    fn omp_empty_measurement_returns_empty_support() {
        let sensing = CMatrix::identity(4, 4);
        let y = CVector::zeros(4);
        let out = omp(&y, &sensing, 2, 1e-12).unwrap();
        assert!(out.selected.is_empty());
    }

    #[test]
    fn omp_rejects_oversized_sparsity() {
        let sensing = CMatrix::identity(4, 4);
        let y = CVector::zeros(4);
        assert!(omp(&y, &sensing, 5, 1e-12).is_err());
        assert!(omp(&y, &sensing, 0, 1e-12).is_err());
    }

    #[test]
    fn omp_residuals_monotone_and_support_distinct() {
        let mut rng = derive_rng(431, &[0]);
        let sensing = CMatrix::from_fn(16, 40, |_, _| complex_gaussian(&mut rng));
        let y = CVector::from_fn(16, |_, _| complex_gaussian(&mut rng));
        let out = omp(&y, &sensing, 8, 0.0).unwrap();
        for w in out.residual_norms.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let mut sorted = out.selected.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), out.selected.len());
    }

    #[test]
    fn omp_exact_recovery_on_grid() {
        let tx = g(16);
        let rx = g(16);
        let dict = AngleDictionary::new(&tx, &rx, 32).unwrap();
        let mut exact = 0;
        let trials = 50;
        for trial in 0..trials {
            let mut rng = derive_rng(433, &[trial]);
            let training =
                generate_training(TrainingKind::PseudoRandomBinary, &tx, &rx, 16, 16, &mut rng)
                    .unwrap();
            // 3 distinct on-grid paths
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            while pairs.len() < 3 {
                let p = (rng.gen_range(0..32), rng.gen_range(0..32));
                if !pairs.contains(&p) {
                    pairs.push(p);
                }
            }
            let mut h = CMatrix::zeros(16, 16);
            for &(g_t, g_r) in &pairs {
                let gain = complex_gaussian(&mut rng);
                let a_r = dict.rx_atoms.column(g_r);
                let a_t = dict.tx_atoms.column(g_t);
                for t in 0..16 {
                    for r in 0..16 {
                        h[(r, t)] += gain * a_r[r] * a_t[t].conj();
                    }
                }
            }
            let y = measure(&h, &training, f64::INFINITY, &mut rng).unwrap();
            let est = estimate_channel(&y, &training, &dict, 3).unwrap();
            let mut found: Vec<(usize, usize)> = est.support.clone();
            found.sort_unstable();
            let mut truth = pairs.clone();
            truth.sort_unstable();
            if found == truth {
                exact += 1;
            }
        }
        assert!(
            exact * 100 >= trials * 98,
            "exact support recovery in only {exact}/{trials} trials"
        );
    }

    // -- end-to-end estimate ----------------------------------------------------------

    #[test]
    fn noiseless_on_grid_single_path_is_exact() {
        let tx = g(8);
        let rx = g(8);
        let dict = AngleDictionary::with_default_grid(&tx, &rx).unwrap();
        let mut rng = derive_rng(437, &[0]);
        let training =
            generate_training(TrainingKind::PseudoRandomBinary, &tx, &rx, 8, 8, &mut rng).unwrap();
        let (g_t, g_r) = (4, 11);
        let gain = Complex::new(0.8, -1.1);
        let mut h = CMatrix::zeros(8, 8);
        let a_r = dict.rx_atoms.column(g_r);
        let a_t = dict.tx_atoms.column(g_t);
        for t in 0..8 {
            for r in 0..8 {
                h[(r, t)] += gain * a_r[r] * a_t[t].conj();
            }
        }
        let y = measure(&h, &training, f64::INFINITY, &mut rng).unwrap();
        let est = estimate_channel(&y, &training, &dict, 1).unwrap();
        assert_eq!(est.support, vec![(g_t, g_r)]);
        assert!(nmse(&h, &est.reconstructed).unwrap() <= 1e-20);
    }

    #[test]
    fn off_grid_path_leaves_a_leakage_floor() {
        let tx = g(8);
        let rx = g(8);
        let dict = AngleDictionary::with_default_grid(&tx, &rx).unwrap();
        let mut rng = derive_rng(439, &[0]);
        let training =
            generate_training(TrainingKind::PseudoRandomBinary, &tx, &rx, 8, 8, &mut rng).unwrap();
        // angle halfway between grid points
        let aod = (dict.tx_grid[4] + dict.tx_grid[5]) / 2.0;
        let aoa = (dict.rx_grid[9] + dict.rx_grid[10]) / 2.0;
        let a_r = array_response(&rx, aoa);
        let a_t = array_response(&tx, aod);
        let mut h = CMatrix::zeros(8, 8);
        for t in 0..8 {
            for r in 0..8 {
                h[(r, t)] += a_r[r] * a_t[t].conj();
            }
        }
        let y = measure(&h, &training, f64::INFINITY, &mut rng).unwrap();
        let est = estimate_channel(&y, &training, &dict, 4).unwrap();
        let err = nmse(&h, &est.reconstructed).unwrap();
        assert!(err > 0.0, "off-grid estimate cannot be exact");
    }

    // -- NMSE --------------------------------------------------------------------------

    #[test]
    fn nmse_identities() {
        let mut rng = derive_rng(441, &[0]);
        let h = CMatrix::from_fn(4, 4, |_, _| complex_gaussian(&mut rng));
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert!((nmse(&h, &CMatrix::zeros(4, 4)).unwrap() - 1.0).abs() < 1e-12);
        let doubled = &h * Complex::new(2.0, 0.0);
        assert!((nmse(&h, &doubled).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            nmse(&CMatrix::zeros(4, 4), &h),
            Err(Error::ZeroTrueChannel)
        ));
    }
}
