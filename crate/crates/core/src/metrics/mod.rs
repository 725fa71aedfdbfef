//! Run ledger and the metrics derived from it: liked and non-liked receipt
//! ratios, traffic spread (CoV), delivery ratio, delivery delay and its CDF,
//! contact duration and contact count.

mod ledger;
mod report;
pub mod stats;

pub use ledger::{DropReason, Ledger, LogEvent, Record};
pub use report::{
    avg_delivery_time, contact_stats, delay_cdf, delivery_ratio, liked_ratios, traffic_spread_cov,
    MetricsReport, NodeMetrics,
};
