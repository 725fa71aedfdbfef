use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::ledger::{Ledger, LogEvent};
use super::stats::{coefficient_of_variation, empirical_cdf};
use crate::ids::{DataId, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub node: NodeId,
    /// Distinct items received.
    pub receipts: u64,
    pub sends: u64,
    pub liked_ratio: Option<f64>,
    pub nonliked_ratio: Option<f64>,
}

/// All metrics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub node_count: usize,
    pub t_end: f64,
    pub liked_ratio: Option<f64>,
    pub nonliked_ratio: Option<f64>,
    /// Coefficient of variation of per-node receipt counts.
    pub cov: f64,
    /// Same over per-node data sends.
    pub cov_sends: f64,
    pub delivery_ratio: Option<f64>,
    pub avg_delivery_time: Option<f64>,
    pub avg_contact_time: Option<f64>,
    pub contact_count: u64,
    /// Mean over node pairs of each pair's mean contact duration.
    pub avg_contact_time_per_pair: Option<f64>,
    /// Mean fraction of nodes holding each destination-less item at `t_end`.
    pub destination_less_reach: Option<f64>,
    pub generated: u64,
    pub generated_oriented: u64,
    pub delivered: u64,
    pub receipts: u64,
    /// `(delay, cumulative fraction)`, one point per distinct delay.
    pub delay_cdf: Vec<(f64, f64)>,
    pub per_node: Vec<NodeMetrics>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `(liked, non-liked)` receipt ratios; `None` where nothing was received.
pub type RatioPair = (Option<f64>, Option<f64>);

/// Per-node and network-wide receipt ratios.
pub fn liked_ratios(ledger: &Ledger) -> (Vec<RatioPair>, RatioPair) {
    let (liked, total) = receipt_counts(ledger);
    let per_node = liked
        .iter()
        .zip(&total)
        .map(|(&l, &t)| (ratio(l, t), ratio(t - l, t)))
        .collect();
    let (l, t): (u64, u64) = (liked.iter().sum(), total.iter().sum());
    (per_node, (ratio(l, t), ratio(t - l, t)))
}

/// Per-node `(liked, all)` distinct receipt counts.
fn receipt_counts(ledger: &Ledger) -> (Vec<u64>, Vec<u64>) {
    let mut liked = vec![0u64; ledger.node_count];
    let mut total = vec![0u64; ledger.node_count];
    let mut seen: HashSet<(&DataId, NodeId)> = HashSet::new();
    for (item, node, _, is_liked) in ledger.receipts() {
        if node.index() < ledger.node_count && seen.insert((item, node)) {
            total[node.index()] += 1;
            liked[node.index()] += u64::from(is_liked);
        }
    }
    (liked, total)
}

pub fn traffic_spread_cov(ledger: &Ledger) -> f64 {
    let (_, total) = receipt_counts(ledger);
    let xs: Vec<f64> = total.iter().map(|&c| c as f64).collect();
    coefficient_of_variation(&xs)
}

/// Delays of first deliveries of destination-oriented items, in log order.
fn delivery_delays(ledger: &Ledger) -> (Vec<f64>, u64) {
    let mut created: HashMap<&DataId, (f64, NodeId)> = HashMap::new();
    let mut oriented = 0u64;
    for (item, t, _, dest) in ledger.generations() {
        if let Some(d) = dest {
            created.insert(item, (t, d));
            oriented += 1;
        }
    }
    let mut delivered: HashSet<(&DataId, NodeId)> = HashSet::new();
    let mut delays = Vec::new();
    for (item, node, t) in ledger.deliveries() {
        if let Some(&(t0, dest)) = created.get(item) {
            if dest == node && delivered.insert((item, node)) {
                delays.push(t - t0);
            }
        }
    }
    (delays, oriented)
}

pub fn delivery_ratio(ledger: &Ledger) -> Option<f64> {
    let (delays, oriented) = delivery_delays(ledger);
    ratio(delays.len() as u64, oriented)
}

pub fn avg_delivery_time(ledger: &Ledger) -> Option<f64> {
    let (delays, _) = delivery_delays(ledger);
    super::stats::mean(&delays)
}

pub fn delay_cdf(ledger: &Ledger) -> Vec<(f64, f64)> {
    empirical_cdf(&delivery_delays(ledger).0)
}

/// `(avg_contact_time, contact_count)`.
pub fn contact_stats(ledger: &Ledger) -> (Option<f64>, u64) {
    let durations: Vec<f64> = ledger.contacts().iter().map(|c| c.duration()).collect();
    (super::stats::mean(&durations), durations.len() as u64)
}

fn per_pair_contact_mean(ledger: &Ledger) -> Option<f64> {
    let mut pairs: BTreeMap<(NodeId, NodeId), (f64, u64)> = BTreeMap::new();
    for c in ledger.contacts() {
        let e = pairs.entry((c.a, c.b)).or_insert((0.0, 0));
        e.0 += c.duration();
        e.1 += 1;
    }
    let means: Vec<f64> = pairs.values().map(|(s, n)| s / *n as f64).collect();
    super::stats::mean(&means)
}

fn destination_less_reach(ledger: &Ledger) -> Option<f64> {
    let mut holders: BTreeMap<&DataId, HashSet<NodeId>> = BTreeMap::new();
    for r in &ledger.records {
        match &r.event {
            LogEvent::Generated {
                item,
                origin,
                destination: None,
                ..
            } => {
                holders.entry(item).or_default().insert(*origin);
            }
            LogEvent::Received { item, node, .. } => {
                if let Some(h) = holders.get_mut(item) {
                    h.insert(*node);
                }
            }
            LogEvent::Evicted { item, node } => {
                if let Some(h) = holders.get_mut(item) {
                    h.remove(node);
                }
            }
            LogEvent::Dropped {
                item: Some(item),
                node,
                reason: super::DropReason::ItemTooLarge,
            } => {
                if let Some(h) = holders.get_mut(item) {
                    h.remove(node);
                }
            }
            _ => {}
        }
    }
    if ledger.node_count == 0 {
        return None;
    }
    let fractions: Vec<f64> = holders
        .values()
        .map(|h| h.len() as f64 / ledger.node_count as f64)
        .collect();
    super::stats::mean(&fractions)
}

impl MetricsReport {
    pub fn from_ledger(ledger: &Ledger) -> Self {
        let (liked, total) = receipt_counts(ledger);
        let mut sends = vec![0u64; ledger.node_count];
        for r in &ledger.records {
            if let LogEvent::Sent { node, .. } = r.event {
                if let Some(s) = sends.get_mut(node.index()) {
                    *s += 1;
                }
            }
        }
        let per_node = (0..ledger.node_count)
            .map(|i| NodeMetrics {
                node: NodeId::from_index(i),
                receipts: total[i],
                sends: sends[i],
                liked_ratio: ratio(liked[i], total[i]),
                nonliked_ratio: ratio(total[i] - liked[i], total[i]),
            })
            .collect();
        let (l, t): (u64, u64) = (liked.iter().sum(), total.iter().sum());
        let receipts_f: Vec<f64> = total.iter().map(|&c| c as f64).collect();
        let sends_f: Vec<f64> = sends.iter().map(|&c| c as f64).collect();
        let (delays, oriented) = delivery_delays(ledger);
        let (avg_contact_time, contact_count) = contact_stats(ledger);
        Self {
            node_count: ledger.node_count,
            t_end: ledger.t_end,
            liked_ratio: ratio(l, t),
            nonliked_ratio: ratio(t - l, t),
            cov: coefficient_of_variation(&receipts_f),
            cov_sends: coefficient_of_variation(&sends_f),
            delivery_ratio: ratio(delays.len() as u64, oriented),
            avg_delivery_time: super::stats::mean(&delays),
            avg_contact_time,
            contact_count,
            avg_contact_time_per_pair: per_pair_contact_mean(ledger),
            destination_less_reach: destination_less_reach(ledger),
            generated: ledger.generations().count() as u64,
            generated_oriented: oriented,
            delivered: delays.len() as u64,
            receipts: t,
            delay_cdf: empirical_cdf(&delays),
            per_node,
        }
    }

    /// Raw delivery delays, for callers that need more than the CDF.
    pub fn delays_of(ledger: &Ledger) -> Vec<f64> {
        delivery_delays(ledger).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::LogEvent::*;

    fn gen(l: &mut Ledger, t: f64, id: &str, origin: u32, dest: Option<u32>) {
        l.push(
            t,
            Generated {
                item: DataId::new(id),
                origin: NodeId(origin),
                destination: dest.map(NodeId),
                size: 10,
            },
        );
    }

    fn recv(l: &mut Ledger, t: f64, id: &str, node: u32, liked: bool) {
        l.push(
            t,
            Received {
                node: NodeId(node),
                from: NodeId(0),
                item: DataId::new(id),
                liked,
            },
        );
    }

    #[test]
    fn liked_three_of_four() {
        let mut l = Ledger::new(2);
        for (k, liked) in [true, true, true, false].into_iter().enumerate() {
            recv(&mut l, k as f64, &format!("d{k}"), 1, liked);
        }
        let (per_node, net) = liked_ratios(&l);
        assert_eq!(per_node[1], (Some(0.75), Some(0.25)));
        assert_eq!(per_node[0], (None, None));
        assert_eq!(net, (Some(0.75), Some(0.25)));
    }

    #[test]
    fn repeated_receipts_count_once() {
        let mut l = Ledger::new(1);
        recv(&mut l, 1.0, "x", 0, true);
        recv(&mut l, 2.0, "x", 0, true);
        assert_eq!(MetricsReport::from_ledger(&l).receipts, 1);
    }

    #[test]
    fn delivery_ratio_nine_of_ten() {
        let mut l = Ledger::new(3);
        for k in 0..10 {
            gen(&mut l, 0.0, &format!("d{k}"), 0, Some(1));
        }
        for k in 0..9 {
            l.push(
                5.0,
                Delivered {
                    node: NodeId(1),
                    item: DataId::new(format!("d{k}")),
                },
            );
        }
        assert_eq!(delivery_ratio(&l), Some(0.9));
    }

    #[test]
    fn destination_less_has_no_delivery_ratio() {
        let mut l = Ledger::new(3);
        gen(&mut l, 0.0, "a", 0, None);
        gen(&mut l, 0.0, "b", 1, None);
        assert_eq!(delivery_ratio(&l), None);
        assert_eq!(avg_delivery_time(&l), None);
        l.t_end = 10.0;
        recv(&mut l, 3.0, "a", 2, false);
        // a held by 2 of 3 nodes, b by 1 of 3
        let reach = MetricsReport::from_ledger(&l)
            .destination_less_reach
            .unwrap();
        assert!((reach - 0.5).abs() < 1e-12);
    }

    #[test]
    fn delay_mean_and_cdf() {
        let mut l = Ledger::new(2);
        for (k, d) in [10.0, 20.0, 30.0].into_iter().enumerate() {
            gen(&mut l, 0.0, &format!("d{k}"), 0, Some(1));
            l.push(
                d,
                Delivered {
                    node: NodeId(1),
                    item: DataId::new(format!("d{k}")),
                },
            );
        }
        assert_eq!(avg_delivery_time(&l), Some(20.0));
        let cdf = delay_cdf(&l);
        assert_eq!(
            cdf.iter().map(|p| p.0).collect::<Vec<_>>(),
            vec![10.0, 20.0, 30.0]
        );
        assert_eq!(cdf[2].1, 1.0);
    }

    #[test]
    fn single_delivery() {
        let mut l = Ledger::new(2);
        gen(&mut l, 0.0, "x", 0, Some(1));
        l.push(
            100.0,
            Delivered {
                node: NodeId(1),
                item: DataId::new("x"),
            },
        );
        assert_eq!(avg_delivery_time(&l), Some(100.0));
    }

    #[test]
    fn contacts_mean_and_count() {
        let mut l = Ledger::new(3);
        l.push(
            0.0,
            ContactOpen {
                a: NodeId(0),
                b: NodeId(1),
            },
        );
        l.push(
            50.0,
            ContactOpen {
                a: NodeId(1),
                b: NodeId(2),
            },
        );
        l.push(
            100.0,
            ContactClose {
                a: NodeId(0),
                b: NodeId(1),
            },
        );
        l.push(
            250.0,
            ContactClose {
                a: NodeId(1),
                b: NodeId(2),
            },
        );
        l.t_end = 300.0;
        assert_eq!(contact_stats(&l), (Some(150.0), 2));
        assert_eq!(contact_stats(&Ledger::new(2)), (None, 0));
    }

    #[test]
    fn open_contact_closed_at_end() {
        let mut l = Ledger::new(2);
        l.push(
            10.0,
            ContactOpen {
                a: NodeId(0),
                b: NodeId(1),
            },
        );
        l.t_end = 60.0;
        assert_eq!(contact_stats(&l), (Some(50.0), 1));
    }

    #[test]
    fn cov_over_receipts() {
        let mut l = Ledger::new(3);
        let mut k = 0;
        for (node, n) in [(0u32, 2), (1, 4), (2, 6)] {
            for _ in 0..n {
                recv(&mut l, 0.0, &format!("i{k}"), node, false);
                k += 1;
            }
        }
        assert!((traffic_spread_cov(&l) - 0.408248290463863).abs() < 1e-12);
    }
}
