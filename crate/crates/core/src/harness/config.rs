//! Experiment configuration: serde types, file loading, and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{ArrayGeometry, ChannelConfig};
use crate::error::{Error, Result};
use crate::metrics::PowerModel;

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SeSweep,
    EeSweep,
    Beampattern,
    Estimation,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::SeSweep => "se_sweep",
            ExperimentKind::EeSweep => "ee_sweep",
            ExperimentKind::Beampattern => "beampattern",
            ExperimentKind::Estimation => "estimation",
        }
    }
}

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Analog design algorithm named in a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    FullDigital,
    PeAltMin,
    Quantize,
    PhaseMatching,
    BinaryRank1,
    Exhaustive,
}

impl MethodName {
    pub fn label(&self) -> &'static str {
        match self {
            MethodName::FullDigital => "full_digital",
            MethodName::PeAltMin => "pe_altmin",
            MethodName::Quantize => "quantize",
            MethodName::PhaseMatching => "phase_matching",
            MethodName::BinaryRank1 => "binary_rank1",
            MethodName::Exhaustive => "exhaustive",
        }
    }

    /// Methods that take a finite phase alphabet.
    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            MethodName::Quantize
                | MethodName::PhaseMatching
                | MethodName::BinaryRank1
                | MethodName::Exhaustive
        )
    }
}

/// Phase resolution: a finite alphabet size or "infinite".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Finite(usize),
    Infinite,
}

impl Resolution {
    pub fn label(&self) -> String {
        match self {
            Resolution::Finite(n) => n.to_string(),
            Resolution::Infinite => "infinite".to_string(),
        }
    }
}

impl Serialize for Resolution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Resolution::Finite(n) => serializer.serialize_u64(*n as u64),
            Resolution::Infinite => serializer.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Resolution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;

        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(n) => Ok(Resolution::Finite(n as usize)),
            Raw::Text(s) if s == "infinite" || s == "inf" => Ok(Resolution::Infinite),
            Raw::Text(s) => Err(D::Error::custom(format!(
                "resolution must be an integer >= 2 or \"infinite\", got {s:?}"
            ))),
        }
    }
}

/// Training kinds selectable in estimation configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingKindName {
    PseudoRandomBinary,
    PseudoRandomQuaternary,
    Deterministic,
}

impl TrainingKindName {
    pub fn to_kind(self) -> crate::estimation::TrainingKind {
        match self {
            TrainingKindName::PseudoRandomBinary => {
                crate::estimation::TrainingKind::PseudoRandomBinary
            }
            TrainingKindName::PseudoRandomQuaternary => {
                crate::estimation::TrainingKind::PseudoRandomQuaternary
            }
            TrainingKindName::Deterministic => crate::estimation::TrainingKind::Deterministic,
        }
    }
}

/// Array, RF-chain, and stream dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    #[serde(default = "default_antennas")]
    pub n_t: usize,
    #[serde(default = "default_antennas")]
    pub n_r: usize,
    #[serde(default = "default_rf")]
    pub n_rf_tx: usize,
    #[serde(default = "default_rf")]
    pub n_rf_rx: usize,
    #[serde(default = "default_rf")]
    pub n_s: usize,
}

fn default_antennas() -> usize {
    64
}

fn default_rf() -> usize {
    6
}

impl Default for Dims {
    fn default() -> Self {
        Self {
            n_t: 64,
            n_r: 64,
            n_rf_tx: 6,
            n_rf_rx: 6,
            n_s: 6,
        }
    }
}

/// Clustered channel parameters, angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(default = "default_clusters")]
    pub num_clusters: usize,
    #[serde(default = "default_rays")]
    pub rays_per_cluster: usize,
    #[serde(default = "default_spread")]
    pub angle_spread_deg: f64,
    #[serde(default = "default_sector_width")]
    pub aoa_sector_width_deg: f64,
    #[serde(default)]
    pub aoa_sector_center_deg: f64,
    #[serde(default = "default_spacing")]
    pub element_spacing: f64,
}

fn default_clusters() -> usize {
    10
}

fn default_rays() -> usize {
    5
}

fn default_spread() -> f64 {
    0.5
}

fn default_sector_width() -> f64 {
    60.0
}

fn default_spacing() -> f64 {
    0.5
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            num_clusters: 10,
            rays_per_cluster: 5,
            angle_spread_deg: 0.5,
            aoa_sector_width_deg: 60.0,
            aoa_sector_center_deg: 0.0,
            element_spacing: 0.5,
        }
    }
}

impl ChannelSection {
    pub fn to_channel_config(&self) -> ChannelConfig {
        ChannelConfig {
            num_clusters: self.num_clusters,
            rays_per_cluster: self.rays_per_cluster,
            angle_spread: self.angle_spread_deg.to_radians(),
            aod_mean_range: (0.0, std::f64::consts::TAU),
            aoa_sector_width: self.aoa_sector_width_deg.to_radians(),
            aoa_sector_center: self.aoa_sector_center_deg.to_radians(),
        }
    }

    pub fn geometry(&self, num_antennas: usize) -> ArrayGeometry {
        ArrayGeometry {
            num_antennas,
            element_spacing: self.element_spacing,
        }
    }
}

/// Power constants in mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    #[serde(default = "default_p_bb")]
    pub p_baseband_mw: f64,
    #[serde(default = "default_p_rf")]
    pub p_rf_chain_mw: f64,
    #[serde(default = "default_p_ps")]
    pub p_phase_shifter_mw: f64,
    #[serde(default = "default_p_sw")]
    pub p_switch_mw: f64,
    #[serde(default = "default_p_tx")]
    pub p_transmit_mw: f64,
    #[serde(default)]
    pub p_pos_mw: f64,
}

fn default_p_bb() -> f64 {
    200.0
}

fn default_p_rf() -> f64 {
    300.0
}

fn default_p_ps() -> f64 {
    40.0
}

fn default_p_sw() -> f64 {
    5.0
}

fn default_p_tx() -> f64 {
    500.0
}

impl Default for PowerSection {
    fn default() -> Self {
        Self {
            p_baseband_mw: 200.0,
            p_rf_chain_mw: 300.0,
            p_phase_shifter_mw: 40.0,
            p_switch_mw: 5.0,
            p_transmit_mw: 500.0,
            p_pos_mw: 0.0,
        }
    }
}

impl PowerSection {
    pub fn to_power_model(&self) -> PowerModel {
        PowerModel {
            p_baseband: self.p_baseband_mw,
            p_rf_chain: self.p_rf_chain_mw,
            p_phase_shifter: self.p_phase_shifter_mw,
            p_switch: self.p_switch_mw,
            p_transmit: self.p_transmit_mw,
            p_pos: self.p_pos_mw,
        }
    }
}

/// Beam-pattern experiment controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeampatternSection {
    #[serde(default = "default_dods")]
    pub dod_deg: Vec<f64>,
    #[serde(default = "default_grid_start")]
    pub grid_start_deg: f64,
    #[serde(default = "default_grid_end")]
    pub grid_end_deg: f64,
    #[serde(default = "default_grid_step")]
    pub grid_step_deg: f64,
}

fn default_dods() -> Vec<f64> {
    vec![15.0, 45.0, 75.0]
}

fn default_grid_start() -> f64 {
    0.0
}

fn default_grid_end() -> f64 {
    90.0
}

fn default_grid_step() -> f64 {
    0.1
}

impl Default for BeampatternSection {
    fn default() -> Self {
        Self {
            dod_deg: default_dods(),
            grid_start_deg: 0.0,
            grid_end_deg: 90.0,
            grid_step_deg: 0.1,
        }
    }
}

/// Estimation experiment controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSection {
    #[serde(default = "default_training_kinds")]
    pub training: Vec<TrainingKindName>,
    #[serde(default = "default_m")]
    pub num_tx_vectors: usize,
    #[serde(default = "default_m")]
    pub num_rx_vectors: usize,
    /// Dictionary grid points per side; defaults to 2 * max(N_t, N_r).
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default = "default_sparsity")]
    pub sparsity: usize,
    /// Draw ground-truth paths on the dictionary grid (enables support
    /// recovery scoring) instead of the clustered channel model.
    #[serde(default = "default_true")]
    pub on_grid: bool,
    #[serde(default = "default_sparsity")]
    pub num_paths: usize,
}

fn default_training_kinds() -> Vec<TrainingKindName> {
    vec![TrainingKindName::PseudoRandomBinary]
}

fn default_m() -> usize {
    16
}

fn default_sparsity() -> usize {
    3
}

fn default_true() -> bool {
    true
}

impl Default for EstimationSection {
    fn default() -> Self {
        Self {
            training: default_training_kinds(),
            num_tx_vectors: 16,
            num_rx_vectors: 16,
            grid_size: None,
            sparsity: 3,
            on_grid: true,
            num_paths: 3,
        }
    }
}

fn default_trials() -> usize {
    500
}

fn default_snr_db() -> Vec<f64> {
    vec![0.0]
}

fn default_rf_chains() -> Vec<usize> {
    (2..=8).collect()
}

fn default_resolutions() -> Vec<Resolution> {
    vec![
        Resolution::Finite(2),
        Resolution::Finite(4),
        Resolution::Finite(8),
        Resolution::Infinite,
    ]
}

fn default_methods() -> Vec<MethodName> {
    vec![MethodName::FullDigital, MethodName::PhaseMatching]
}

/// Full experiment description, loadable from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub dims: Dims,
    #[serde(default = "default_snr_db")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_rf_chains")]
    pub rf_chains: Vec<usize>,
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<Resolution>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodName>,
    /// Energy-efficiency sweep: reuse the full-digital SE for every
    /// architecture so only the power denominators differ.
    #[serde(default)]
    pub shared_se: bool,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub power: PowerSection,
    #[serde(default)]
    pub beampattern: BeampatternSection,
    #[serde(default)]
    pub estimation: EstimationSection,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    /// Minimal config for an experiment kind; everything else defaulted.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 0,
            trials: default_trials(),
            dims: Dims::default(),
            snr_db: default_snr_db(),
            rf_chains: default_rf_chains(),
            resolutions: default_resolutions(),
            methods: default_methods(),
            shared_se: false,
            channel: ChannelSection::default(),
            power: PowerSection::default(),
            beampattern: BeampatternSection::default(),
            estimation: EstimationSection::default(),
            output: None,
            format: OutputFormat::Csv,
        }
    }

    /// Load from a `.toml` or `.json` file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        let config: ExperimentConfig = if is_json {
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("config parse error: {e}")))?
        } else {
            toml::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("config parse error: {e}")))?
        };
        Ok(config)
    }

    pub fn tx_geometry(&self) -> ArrayGeometry {
        self.channel.geometry(self.dims.n_t)
    }

    pub fn rx_geometry(&self) -> ArrayGeometry {
        self.channel.geometry(self.dims.n_r)
    }

    /// Validate everything the selected experiment will use; called before
    /// any computation starts.
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        let d = &self.dims;
        if d.n_s < 1 {
            return Err(Error::InvalidInput("n_s must be >= 1".into()));
        }
        if !(d.n_s <= d.n_rf_tx && d.n_rf_tx <= d.n_t) {
            return Err(Error::InvalidInput(format!(
                "need n_s <= n_rf_tx <= n_t, got {} / {} / {}",
                d.n_s, d.n_rf_tx, d.n_t
            )));
        }
        if !(d.n_s <= d.n_rf_rx && d.n_rf_rx <= d.n_r) {
            return Err(Error::InvalidInput(format!(
                "need n_s <= n_rf_rx <= n_r, got {} / {} / {}",
                d.n_s, d.n_rf_rx, d.n_r
            )));
        }
        self.channel.to_channel_config().validate()?;
        self.power.to_power_model().validate()?;
        for r in &self.resolutions {
            if let Resolution::Finite(n) = r {
                if *n < 2 {
                    return Err(Error::InvalidInput(format!(
                        "phase resolution must be >= 2, got {n}"
                    )));
                }
            }
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("methods list is empty".into()));
        }

        match self.experiment {
            ExperimentKind::SeSweep => {
                if self.snr_db.is_empty() {
                    return Err(Error::InvalidInput("snr_db list is empty".into()));
                }
                if self.resolutions.is_empty() {
                    return Err(Error::InvalidInput("resolutions list is empty".into()));
                }
                self.validate_method_resolutions()?;
            }
            ExperimentKind::EeSweep => {
                if self.rf_chains.is_empty() {
                    return Err(Error::InvalidInput("rf_chains list is empty".into()));
                }
                if self.snr_db.is_empty() {
                    return Err(Error::InvalidInput("snr_db list is empty".into()));
                }
                let max_rf = d.n_t.min(d.n_r);
                for &n_rf in &self.rf_chains {
                    if n_rf < 1 || n_rf > max_rf {
                        return Err(Error::InvalidInput(format!(
                            "rf_chains entry {n_rf} outside [1, {max_rf}]"
                        )));
                    }
                }
                if self.pos_sw_resolution().is_none() {
                    return Err(Error::InvalidInput(
                        "ee_sweep needs at least one finite phase resolution".into(),
                    ));
                }
            }
            ExperimentKind::Beampattern => {
                let b = &self.beampattern;
                if b.dod_deg.is_empty() {
                    return Err(Error::InvalidInput("dod_deg list is empty".into()));
                }
                if !(b.grid_step_deg > 0.0) || !(b.grid_end_deg > b.grid_start_deg) {
                    return Err(Error::InvalidInput("bad beam-pattern grid".into()));
                }
                if self.resolutions.is_empty() {
                    return Err(Error::InvalidInput("resolutions list is empty".into()));
                }
            }
            ExperimentKind::Estimation => {
                let e = &self.estimation;
                if self.snr_db.is_empty() {
                    return Err(Error::InvalidInput("snr_db list is empty".into()));
                }
                if e.training.is_empty() {
                    return Err(Error::InvalidInput("training kinds list is empty".into()));
                }
                if e.num_tx_vectors < 1 || e.num_rx_vectors < 1 {
                    return Err(Error::InvalidInput(
                        "training vector counts must be >= 1".into(),
                    ));
                }
                let measurements = e.num_tx_vectors * e.num_rx_vectors;
                if e.sparsity < 1 || e.sparsity > measurements {
                    return Err(Error::InvalidInput(format!(
                        "sparsity {} outside [1, {measurements}]",
                        e.sparsity
                    )));
                }
                let grid = self.estimation_grid_size();
                if grid < d.n_t.max(d.n_r) {
                    return Err(Error::InvalidInput(format!(
                        "grid size {grid} below max antenna count {}",
                        d.n_t.max(d.n_r)
                    )));
                }
                if e.on_grid && (e.num_paths < 1 || e.num_paths > e.sparsity) {
                    return Err(Error::InvalidInput(format!(
                        "on-grid path count {} outside [1, sparsity = {}]",
                        e.num_paths, e.sparsity
                    )));
                }
                if e.training.contains(&TrainingKindName::Deterministic) {
                    for (n, m) in [
                        (d.n_t, e.num_tx_vectors),
                        (d.n_r, e.num_rx_vectors),
                    ] {
                        if !n.is_power_of_two() || m > n {
                            return Err(Error::DeterministicUnavailable(format!(
                                "{m} vectors over {n} antennas"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_method_resolutions(&self) -> Result<()> {
        for method in &self.methods {
            if !method.is_discrete() {
                continue;
            }
            for r in &self.resolutions {
                if let Resolution::Finite(n) = r {
                    if *method == MethodName::BinaryRank1 && *n != 2 {
                        return Err(Error::InvalidInput(format!(
                            "binary_rank1 requires resolution 2, config lists {n}"
                        )));
                    }
                    if *method == MethodName::Exhaustive {
                        let total = (*n as f64).powi(self.dims.n_t.max(self.dims.n_r) as i32);
                        if total > 1e7 {
                            return Err(Error::SearchSpaceTooLarge(format!(
                                "exhaustive design at {n}^{} evaluations",
                                self.dims.n_t.max(self.dims.n_r)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Alphabet resolution the EE sweep uses for the POS-SW architecture:
    /// the first finite entry in `resolutions`.
    pub fn pos_sw_resolution(&self) -> Option<usize> {
        self.resolutions.iter().find_map(|r| match r {
            Resolution::Finite(n) => Some(*n),
            Resolution::Infinite => None,
        })
    }

    pub fn estimation_grid_size(&self) -> usize {
        self.estimation
            .grid_size
            .unwrap_or(2 * self.dims.n_t.max(self.dims.n_r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for kind in [
            ExperimentKind::SeSweep,
            ExperimentKind::EeSweep,
            ExperimentKind::Beampattern,
        ] {
            ExperimentConfig::new(kind).validate().unwrap();
        }
        let mut est = ExperimentConfig::new(ExperimentKind::Estimation);
        est.dims = Dims {
            n_t: 16,
            n_r: 16,
            n_rf_tx: 4,
            n_rf_rx: 4,
            n_s: 4,
        };
        est.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_with_infinite_resolution() {
        let text = r#"
experiment = "se_sweep"
seed = 7
trials = 3
snr_db = [-10.0, 0.0, 10.0]
resolutions = [2, 4, "infinite"]
methods = ["full_digital", "phase_matching"]

[dims]
n_t = 16
n_r = 16
n_rf_tx = 4
n_rf_rx = 4
n_s = 2
"#;
        let config: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(config.resolutions.len(), 3);
        assert_eq!(config.resolutions[2], Resolution::Infinite);
        config.validate().unwrap();
        let emitted = toml::to_string(&config).unwrap();
        let back: ExperimentConfig = toml::from_str(&emitted).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn zero_trials_is_a_config_error() {
        let mut config = ExperimentConfig::new(ExperimentKind::Estimation);
        config.trials = 0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn stream_rf_antenna_ordering_is_enforced() {
        let mut config = ExperimentConfig::new(ExperimentKind::SeSweep);
        config.dims.n_s = 10;
        assert!(config.validate().is_err());
        config.dims = Dims {
            n_t: 4,
            n_r: 64,
            n_rf_tx: 6,
            n_rf_rx: 6,
            n_s: 6,
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn binary_rank1_requires_resolution_two() {
        let mut config = ExperimentConfig::new(ExperimentKind::SeSweep);
        config.methods = vec![MethodName::BinaryRank1];
        config.resolutions = vec![Resolution::Finite(4)];
        assert!(config.validate().is_err());
        config.resolutions = vec![Resolution::Finite(2)];
        config.validate().unwrap();
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let text = "experiment = \"se_sweep\"\nbogus_key = 3\n";
        assert!(toml::from_str::<ExperimentConfig>(text).is_err());
    }
}
