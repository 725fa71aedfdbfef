//! Byte-bounded store-and-forward cache.

use std::fmt;

use indexmap::IndexMap;

use super::{DataItem, ForwardingError};
use crate::ids::DataId;

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub item: DataItem,
    pub inserted_at: f64,
}

/// Chooses which entry to drop when the cache overflows.
pub trait EvictionPolicy: fmt::Debug + Send {
    /// Index (in insertion order) of the entry to evict. `protect` must not
    /// be chosen.
    fn victim(&self, entries: &IndexMap<DataId, CacheEntry>, protect: &DataId) -> Option<usize>;
}

/// Evicts the oldest-inserted entry first.
#[derive(Debug, Default, Clone, Copy)]
pub struct Fifo;

impl EvictionPolicy for Fifo {
    fn victim(&self, entries: &IndexMap<DataId, CacheEntry>, protect: &DataId) -> Option<usize> {
        entries.keys().position(|k| k != protect)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InsertOutcome {
    Inserted {
        evicted: Vec<DataItem>,
    },
    /// The id was already cached; nothing changed.
    Duplicate,
}

#[derive(Debug)]
pub struct Cache {
    capacity: u64,
    used: u64,
    entries: IndexMap<DataId, CacheEntry>,
    policy: Box<dyn EvictionPolicy>,
}

impl Cache {
    pub fn new(capacity: u64) -> Self {
        Self::with_policy(capacity, Box::new(Fifo))
    }

    pub fn with_policy(capacity: u64, policy: Box<dyn EvictionPolicy>) -> Self {
        Self {
            capacity,
            used: 0,
            entries: IndexMap::new(),
            policy,
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used_bytes(&self) -> u64 {
        self.used
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &DataId) -> bool {
        self.entries.contains_key(id)
    }

    pub fn get(&self, id: &DataId) -> Option<&CacheEntry> {
        self.entries.get(id)
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.entries.values()
    }

    pub fn ids(&self) -> Vec<DataId> {
        self.entries.keys().cloned().collect()
    }

    /// Stores `item`, evicting per policy until the cache fits again.
    pub fn insert(&mut self, item: DataItem, t: f64) -> Result<InsertOutcome, ForwardingError> {
        if item.size > self.capacity {
            return Err(ForwardingError::ItemTooLarge {
                id: item.id,
                size: item.size,
                capacity: self.capacity,
            });
        }
        if self.entries.contains_key(&item.id) {
            return Ok(InsertOutcome::Duplicate);
        }
        let id = item.id.clone();
        self.used += item.size;
        self.entries.insert(
            id.clone(),
            CacheEntry {
                item,
                inserted_at: t,
            },
        );
        let mut evicted = Vec::new();
        while self.used > self.capacity {
            let idx = self
                .policy
                .victim(&self.entries, &id)
                .expect("an item no larger than capacity always fits after evicting others");
            let (_, entry) = self
                .entries
                .shift_remove_index(idx)
                .expect("policy returned a valid index");
            self.used -= entry.item.size;
            evicted.push(entry.item);
        }
        Ok(InsertOutcome::Inserted { evicted })
    }
}

/// Free-function form of [`Cache::insert`].
pub fn cache_insert(
    cache: &mut Cache,
    item: DataItem,
    t: f64,
) -> Result<InsertOutcome, ForwardingError> {
    cache.insert(item, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::NodeId;
    use proptest::prelude::*;

    fn item(id: &str, size: u64) -> DataItem {
        DataItem {
            id: DataId::new(id),
            origin: NodeId(0),
            created_at: 0.0,
            size,
            destination: None,
            payload_tag: 0,
        }
    }

    #[test]
    fn fourth_insert_evicts_first() {
        let mut c = Cache::new(3);
        for (i, id) in ["a", "b", "c"].iter().enumerate() {
            c.insert(item(id, 1), i as f64).unwrap();
        }
        let out = c.insert(item("d", 1), 3.0).unwrap();
        assert_eq!(
            out,
            InsertOutcome::Inserted {
                evicted: vec![item("a", 1)]
            }
        );
        assert_eq!(
            c.ids(),
            vec![DataId::new("b"), DataId::new("c"), DataId::new("d")]
        );
    }

    #[test]
    fn duplicate_is_noop() {
        let mut c = Cache::new(3);
        c.insert(item("a", 1), 0.0).unwrap();
        assert_eq!(
            c.insert(item("a", 1), 1.0).unwrap(),
            InsertOutcome::Duplicate
        );
        assert_eq!(c.len(), 1);
        assert_eq!(c.get(&DataId::new("a")).unwrap().inserted_at, 0.0);
    }

    #[test]
    fn too_large_rejected() {
        let mut c = Cache::new(10);
        assert!(matches!(
            c.insert(item("big", 11), 0.0),
            Err(ForwardingError::ItemTooLarge {
                size: 11,
                capacity: 10,
                ..
            })
        ));
        assert!(c.is_empty());
    }

    #[test]
    fn large_item_evicts_several() {
        let mut c = Cache::new(10);
        for id in ["a", "b", "c"] {
            c.insert(item(id, 3), 0.0).unwrap();
        }
        let InsertOutcome::Inserted { evicted } = c.insert(item("d", 8), 1.0).unwrap() else {
            panic!()
        };
        assert_eq!(evicted.len(), 3);
        assert_eq!(c.used_bytes(), 8);
    }

    proptest! {
        #[test]
        fn never_exceeds_capacity(
            capacity in 1u64..200,
            ops in prop::collection::vec((0u8..40, 1u64..80), 1..200),
        ) {
            let mut c = Cache::new(capacity);
            for (k, (id, size)) in ops.into_iter().enumerate() {
                let _ = c.insert(item(&format!("i{id}"), size), k as f64);
                prop_assert!(c.used_bytes() <= capacity);
                let sum: u64 = c.entries().map(|e| e.item.size).sum();
                prop_assert_eq!(sum, c.used_bytes());
            }
        }
    }
}
