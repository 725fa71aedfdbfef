//! Traffic generators: Promote, Herald and Bruit.
//!
//! All three inject items into the cache of a generating node. Promote mints
//! random ids under any of the three traffic models, Bruit is the same with the
//! uniform model only, and Herald hands out a fixed catalog without
//! replacement, labeled with per-node usefulness before the run starts.
//! Items minted by Promote and Bruit get their usefulness labels at creation.

mod traffic;
mod usefulness;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use traffic::{next_generation_time, TrafficKind, TrafficModel};
pub use usefulness::{assign_usefulness, UsefulnessTable};

use crate::engine::{Purpose, RngStream};
use crate::forwarding::DataItem;
use crate::ids::{DataId, NodeId};

pub const DEFAULT_LIKED_PROBABILITY: f64 = 0.25;
pub const DEFAULT_ITEM_SIZE: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AppError {
    #[error("invalid traffic model: {0}")]
    InvalidModel(String),
    #[error("invalid application config: {0}")]
    InvalidConfig(String),
    #[error("no node other than the generator can be a destination")]
    NoValidDestination,
    #[error("herald catalog exhausted")]
    CatalogExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AppKind {
    Promote,
    Herald,
    Bruit,
}

impl AppKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AppKind::Promote => "promote",
            AppKind::Herald => "herald",
            AppKind::Bruit => "bruit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DestinationMode {
    Oriented,
    DestinationLess,
}

/// Whether each node runs its own generation process or one network-wide
/// process picks a random generator per event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenerationMode {
    PerNode,
    Network,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppConfig {
    pub app: AppKind,
    pub traffic: TrafficModel,
    pub destination_mode: DestinationMode,
    pub generation_mode: GenerationMode,
    /// Required for Herald, rejected otherwise.
    pub herald_catalog_size: Option<usize>,
    pub liked_probability: f64,
    pub item_size: u64,
}

impl AppConfig {
    pub fn new(app: AppKind, traffic: TrafficModel) -> Self {
        Self {
            app,
            traffic,
            destination_mode: DestinationMode::Oriented,
            generation_mode: GenerationMode::PerNode,
            herald_catalog_size: None,
            liked_probability: DEFAULT_LIKED_PROBABILITY,
            item_size: DEFAULT_ITEM_SIZE,
        }
    }

    pub fn validate(&self) -> Result<(), AppError> {
        self.traffic.validate()?;
        match (self.app, self.herald_catalog_size) {
            (AppKind::Herald, None) => {
                return Err(AppError::InvalidConfig(
                    "herald needs a catalog size".into(),
                ))
            }
            (AppKind::Herald, Some(0)) => {
                return Err(AppError::InvalidConfig(
                    "herald catalog must be non-empty".into(),
                ))
            }
            (AppKind::Promote | AppKind::Bruit, Some(_)) => {
                return Err(AppError::InvalidConfig(
                    "catalog size only applies to herald".into(),
                ))
            }
            _ => {}
        }
        if self.app == AppKind::Bruit && self.traffic.kind != TrafficKind::Uniform {
            return Err(AppError::InvalidConfig(
                "bruit only supports uniform traffic".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.liked_probability) {
            return Err(AppError::InvalidConfig(
                "liked_probability must lie in [0, 1]".into(),
            ));
        }
        if self.item_size == 0 {
            return Err(AppError::InvalidConfig("item_size must be positive".into()));
        }
        Ok(())
    }
}

/// Network-wide generator state: id minting, the Herald catalog and the
/// usefulness labels.
#[derive(Debug, Clone)]
pub struct TrafficGenerator {
    config: AppConfig,
    node_count: usize,
    traffic_rng: RngStream,
    usefulness_rng: RngStream,
    remaining_catalog: Vec<DataId>,
    usefulness: UsefulnessTable,
    minted: u64,
}

impl TrafficGenerator {
    pub fn new(config: AppConfig, node_count: usize, seed: u64) -> Result<Self, AppError> {
        config.validate()?;
        let mut usefulness_rng = RngStream::new(seed, Purpose::Usefulness);
        let (remaining_catalog, usefulness) = match config.herald_catalog_size {
            Some(n) => {
                let catalog: Vec<DataId> =
                    (0..n).map(|i| DataId::new(format!("h{i:05}"))).collect();
                let table = assign_usefulness(
                    node_count,
                    &catalog,
                    config.liked_probability,
                    &mut usefulness_rng,
                );
                (catalog, table)
            }
            None => (Vec::new(), UsefulnessTable::new(node_count)),
        };
        Ok(Self {
            config,
            node_count,
            traffic_rng: RngStream::new(seed, Purpose::Traffic),
            usefulness_rng,
            remaining_catalog,
            usefulness,
            minted: 0,
        })
    }

    pub fn config(&self) -> &AppConfig {
        &self.config
    }

    pub fn usefulness(&self) -> &UsefulnessTable {
        &self.usefulness
    }

    pub fn next_time(&mut self, now: f64) -> Result<f64, AppError> {
        next_generation_time(&self.config.traffic, now, &mut self.traffic_rng)
    }

    /// Creates the next item at time `t`.
    ///
    /// `generator` is the node running the process in per-node mode; `None`
    /// picks one uniformly at random.
    pub fn generate_item(
        &mut self,
        t: f64,
        generator: Option<NodeId>,
    ) -> Result<(DataItem, NodeId), AppError> {
        if self.node_count == 0 {
            return Err(AppError::InvalidConfig("no nodes".into()));
        }
        let origin = match generator {
            Some(n) => n,
            None => NodeId::from_index(self.traffic_rng.below(self.node_count)),
        };
        let destination = match self.config.destination_mode {
            DestinationMode::DestinationLess => None,
            DestinationMode::Oriented => {
                if self.node_count < 2 {
                    return Err(AppError::NoValidDestination);
                }
                let k = self.traffic_rng.below(self.node_count - 1);
                let k = if k >= origin.index() { k + 1 } else { k };
                Some(NodeId::from_index(k))
            }
        };
        let id = match self.config.app {
            AppKind::Herald => {
                if self.remaining_catalog.is_empty() {
                    return Err(AppError::CatalogExhausted);
                }
                let k = self.traffic_rng.below(self.remaining_catalog.len());
                self.remaining_catalog.swap_remove(k)
            }
            AppKind::Promote | AppKind::Bruit => {
                let id = DataId::new(format!(
                    "d{:06}-{:08x}",
                    self.minted,
                    self.traffic_rng.next_u32()
                ));
                self.usefulness
                    .label(&id, self.config.liked_probability, &mut self.usefulness_rng);
                id
            }
        };
        self.minted += 1;
        let item = DataItem {
            id,
            origin,
            created_at: t,
            size: self.config.item_size,
            destination,
            payload_tag: self.minted,
        };
        Ok((item, origin))
    }
}
