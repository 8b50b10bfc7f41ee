//! Scenario configuration file.
//!
//! JSON object; every key is optional and unknown keys are rejected.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `protocol` | `"geams"` | protocol for a single run |
//! | `nodes` | `100` | sensor count for a single run |
//! | `seed` | `1` | seed for a single run |
//! | `protocols` | `["geams","gpsr"]` | experiment protocols |
//! | `node_counts` | `[30,50,80,100]` | experiment sensor counts |
//! | `seeds` | `1..=20` | experiment seeds |
//! | `field_width_m` / `field_height_m` | `500` / `200` | field size |
//! | `sink_x_m` / `sink_y_m` | `490` / `90` | sink position |
//! | `source_x_m` / `source_y_m` | `10` / `90` | source position |
//! | `radio_range_m` | `80` | inclusive radio range |
//! | `min_separation_m` | `1` | minimum node spacing, at least 1 |
//! | `e_elec_j_per_bit` | `5e-6` | radio electronics energy |
//! | `eps_amp_j_per_bit_m2` | `1e-9` | amplifier energy |
//! | `initial_energy_j` | `1.0` | sensor battery |
//! | `beacon_energy` | `"on"` | charge beacons and void announcements |
//! | `images` | `30` | images emitted by the source |
//! | `image_interval_s` | `1.0` | time between images |
//! | `image_bits` | `10000` | image size |
//! | `packet_payload_bits` | `1000` | payload per data packet |
//! | `header_bits` | `64` | data packet header |
//! | `beacon_bits` | `128` | beacon size |
//! | `void_announcement_bits` | `128` | void announcement size |
//! | `beacon_interval_s` | `1.0` | beacon period |
//! | `neighbor_timeout_intervals` | `2.5` | beacon periods before a neighbor expires |
//! | `traffic_start_s` | `1.0` | first image emission |
//! | `queue_capacity` | `10` | waiting packets per node |
//! | `ttl` | `null` | hop budget; `null` means twice the node count |
//! | `horizon_s` | `120` | hard stop |
//! | `link_base_rate_bps` | `250000` | rate of a 1 m link |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::EnergyModelParams;
use crate::routing::Protocol;
use crate::sim::link::{LinkModel, MIN_LINK_LENGTH};
use crate::topology::{FieldSpec, Position};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read scenario file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: line {line}, column {column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    #[default]
    On,
    Off,
}

impl Toggle {
    pub fn is_on(self) -> bool {
        self == Toggle::On
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    pub nodes: usize,
    pub seed: u64,
    pub protocols: Vec<Protocol>,
    pub node_counts: Vec<usize>,
    pub seeds: Vec<u64>,

    pub field_width_m: f64,
    pub field_height_m: f64,
    pub sink_x_m: f64,
    pub sink_y_m: f64,
    pub source_x_m: f64,
    pub source_y_m: f64,
    pub radio_range_m: f64,
    pub min_separation_m: f64,

    pub e_elec_j_per_bit: f64,
    pub eps_amp_j_per_bit_m2: f64,
    pub initial_energy_j: f64,
    pub beacon_energy: Toggle,

    pub images: u32,
    pub image_interval_s: f64,
    pub image_bits: u64,
    pub packet_payload_bits: u64,
    pub header_bits: u64,
    pub beacon_bits: u64,
    pub void_announcement_bits: u64,
    pub beacon_interval_s: f64,
    pub neighbor_timeout_intervals: f64,
    pub traffic_start_s: f64,
    pub queue_capacity: usize,
    pub ttl: Option<u32>,
    pub horizon_s: f64,
    pub link_base_rate_bps: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let field = FieldSpec::default();
        let energy = EnergyModelParams::default();
        Self {
            protocol: Protocol::Geams,
            nodes: 100,
            seed: 1,
            protocols: vec![Protocol::Geams, Protocol::Gpsr],
            node_counts: vec![30, 50, 80, 100],
            seeds: (1..=20).collect(),
            field_width_m: field.width,
            field_height_m: field.height,
            sink_x_m: field.sink_position.x,
            sink_y_m: field.sink_position.y,
            source_x_m: field.source_position.x,
            source_y_m: field.source_position.y,
            radio_range_m: field.radio_range,
            min_separation_m: field.min_separation,
            e_elec_j_per_bit: energy.e_elec,
            eps_amp_j_per_bit_m2: energy.eps_amp,
            initial_energy_j: 1.0,
            beacon_energy: Toggle::On,
            images: 30,
            image_interval_s: 1.0,
            image_bits: 10_000,
            packet_payload_bits: 1000,
            header_bits: 64,
            beacon_bits: 128,
            void_announcement_bits: 128,
            beacon_interval_s: 1.0,
            neighbor_timeout_intervals: 2.5,
            traffic_start_s: 1.0,
            queue_capacity: 10,
            ttl: None,
            horizon_s: 120.0,
            link_base_rate_bps: LinkModel::default().base_rate,
        }
    }
}

fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            key,
            message: format!("must be positive and finite, got {v}"),
        })
    }
}

fn nonempty<T>(key: &'static str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(ConfigError::Invalid {
            key,
            message: "must not be empty".into(),
        })
    } else {
        Ok(())
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn field(&self) -> FieldSpec {
        FieldSpec {
            width: self.field_width_m,
            height: self.field_height_m,
            sink_position: Position::new(self.sink_x_m, self.sink_y_m),
            source_position: Position::new(self.source_x_m, self.source_y_m),
            radio_range: self.radio_range_m,
            min_separation: self.min_separation_m,
        }
    }

    pub fn energy(&self) -> EnergyModelParams {
        EnergyModelParams {
            e_elec: self.e_elec_j_per_bit,
            eps_amp: self.eps_amp_j_per_bit_m2,
        }
    }

    pub fn link(&self) -> LinkModel {
        LinkModel {
            base_rate: self.link_base_rate_bps,
        }
    }

    /// Size of a data packet on air.
    pub fn packet_bits(&self) -> u64 {
        self.packet_payload_bits + self.header_bits
    }

    pub fn packets_per_image(&self) -> u64 {
        self.image_bits.div_ceil(self.packet_payload_bits)
    }

    pub fn ttl_for(&self, total_nodes: usize) -> u32 {
        self.ttl.unwrap_or(2 * total_nodes as u32)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("field_width_m", self.field_width_m)?;
        positive("field_height_m", self.field_height_m)?;
        positive("radio_range_m", self.radio_range_m)?;
        positive("e_elec_j_per_bit", self.e_elec_j_per_bit)?;
        positive("eps_amp_j_per_bit_m2", self.eps_amp_j_per_bit_m2)?;
        positive("initial_energy_j", self.initial_energy_j)?;
        positive("image_interval_s", self.image_interval_s)?;
        positive("beacon_interval_s", self.beacon_interval_s)?;
        positive("neighbor_timeout_intervals", self.neighbor_timeout_intervals)?;
        positive("horizon_s", self.horizon_s)?;
        positive("link_base_rate_bps", self.link_base_rate_bps)?;
        if !(self.min_separation_m >= MIN_LINK_LENGTH) || !self.min_separation_m.is_finite() {
            return Err(ConfigError::Invalid {
                key: "min_separation_m",
                message: format!("must be at least {MIN_LINK_LENGTH} m, got {}", self.min_separation_m),
            });
        }
        if !(self.traffic_start_s >= 0.0) {
            return Err(ConfigError::Invalid {
                key: "traffic_start_s",
                message: "must be nonnegative".into(),
            });
        }
        if self.packet_payload_bits == 0 {
            return Err(ConfigError::Invalid {
                key: "packet_payload_bits",
                message: "must be positive".into(),
            });
        }
        if self.queue_capacity == 0 {
            return Err(ConfigError::Invalid {
                key: "queue_capacity",
                message: "must be positive".into(),
            });
        }
        if self.nodes == 0 {
            return Err(ConfigError::Invalid {
                key: "nodes",
                message: "must be positive".into(),
            });
        }
        nonempty("protocols", &self.protocols)?;
        nonempty("node_counts", &self.node_counts)?;
        nonempty("seeds", &self.seeds)?;
        if self.node_counts.contains(&0) {
            return Err(ConfigError::Invalid {
                key: "node_counts",
                message: "sensor counts must be positive".into(),
            });
        }
        self.field().validate().map_err(|e| ConfigError::Invalid {
            key: "field",
            message: e.to_string(),
        })
    }
}
