//! Tiny episodic memories for experience replay.
//!
//! `Ring` keeps a FIFO per class, where a class is a `(task_id, label)` pair:
//! the same digit under two different permutations is two classes. The total
//! capacity is split evenly among the classes seen so far, so quotas shrink
//! as new classes arrive and the oldest items of over-full classes go first.
//! `Reservoir` is Vitter's algorithm R over the whole stream.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binio::{put_f32s, put_u32, to_u32, ByteReader};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryStrategy {
    Ring,
    Reservoir,
}

impl FromStr for MemoryStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(MemoryStrategy::Ring),
            "reservoir" | "res" => Ok(MemoryStrategy::Reservoir),
            _ => Err(Error::InvalidConfig(format!("unknown memory strategy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryItem {
    pub features: Vec<f32>,
    pub label: usize,
    pub task_id: usize,
}

impl MemoryItem {
    fn key(&self) -> (usize, usize) {
        (self.task_id, self.label)
    }
}

#[derive(Debug, Clone)]
pub struct EpisodicMemory {
    strategy: MemoryStrategy,
    capacity: usize,
    slots: Vec<MemoryItem>,
    seen_count: u64,
    classes: BTreeSet<(usize, usize)>,
    rng: ChaCha8Rng,
}

impl EpisodicMemory {
    /// A capacity of zero is allowed and yields a memory that never stores.
    pub fn new(strategy: MemoryStrategy, capacity: usize, seed: u64) -> Self {
        EpisodicMemory {
            strategy,
            capacity,
            slots: Vec::with_capacity(capacity),
            seen_count: 0,
            classes: BTreeSet::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn strategy(&self) -> MemoryStrategy {
        self.strategy
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn seen_count(&self) -> u64 {
        self.seen_count
    }

    pub fn slots(&self) -> &[MemoryItem] {
        &self.slots
    }

    /// Current per-class quota of a ring memory.
    pub fn ring_quota(&self) -> usize {
        self.capacity / self.classes.len().max(1)
    }

    pub fn update<I: IntoIterator<Item = MemoryItem>>(&mut self, batch: I) {
        for item in batch {
            self.seen_count += 1;
            match self.strategy {
                MemoryStrategy::Ring => self.insert_ring(item),
                MemoryStrategy::Reservoir => self.insert_reservoir(item),
            }
        }
    }

    fn insert_ring(&mut self, item: MemoryItem) {
        let key = item.key();
        if self.classes.insert(key) {
            let quota = self.ring_quota();
            for class in self.classes.clone() {
                while self.class_len(class) > quota {
                    self.evict_oldest(class);
                }
            }
        }
        let quota = self.ring_quota();
        if quota == 0 {
            return;
        }
        if self.class_len(key) >= quota {
            self.evict_oldest(key);
        }
        self.slots.push(item);
    }

    fn class_len(&self, key: (usize, usize)) -> usize {
        self.slots.iter().filter(|s| s.key() == key).count()
    }

    fn evict_oldest(&mut self, key: (usize, usize)) {
        if let Some(pos) = self.slots.iter().position(|s| s.key() == key) {
            self.slots.remove(pos);
        }
    }

    fn insert_reservoir(&mut self, item: MemoryItem) {
        if self.capacity == 0 {
            return;
        }
        if self.slots.len() < self.capacity {
            self.slots.push(item);
            return;
        }
        let j = self.rng.random_range(0..self.seen_count);
        if (j as usize) < self.capacity {
            self.slots[j as usize] = item;
        }
    }

    /// Uniform sample without replacement of `min(batch_size, len)` items.
    /// An empty memory returns an empty batch without touching the RNG.
    pub fn sample(&mut self, batch_size: usize) -> Vec<&MemoryItem> {
        let amount = batch_size.min(self.slots.len());
        if amount == 0 {
            return Vec::new();
        }
        index::sample(&mut self.rng, self.slots.len(), amount)
            .into_iter()
            .map(|i| &self.slots[i])
            .collect()
    }

    /// Binary dump including the RNG position, so a restored memory continues
    /// the same random stream. Little-endian throughout.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MEMORY_MAGIC);
        let strategy = match self.strategy {
            MemoryStrategy::Ring => 0,
            MemoryStrategy::Reservoir => 1,
        };
        let io = |e| Error::io("encoding memory", e);
        put_u32(&mut out, strategy).map_err(io)?;
        put_u32(&mut out, to_u32(self.capacity, "capacity")?).map_err(io)?;
        out.extend_from_slice(&self.seen_count.to_le_bytes());
        out.extend_from_slice(&self.rng.get_seed());
        out.extend_from_slice(&self.rng.get_stream().to_le_bytes());
        out.extend_from_slice(&self.rng.get_word_pos().to_le_bytes());
        put_u32(&mut out, to_u32(self.classes.len(), "class count")?).map_err(io)?;
        for &(task, label) in &self.classes {
            put_u32(&mut out, to_u32(task, "task id")?).map_err(io)?;
            put_u32(&mut out, to_u32(label, "label")?).map_err(io)?;
        }
        let dim = self.slots.first().map_or(0, |s| s.features.len());
        put_u32(&mut out, to_u32(self.slots.len(), "slot count")?).map_err(io)?;
        put_u32(&mut out, to_u32(dim, "feature width")?).map_err(io)?;
        for s in &self.slots {
            if s.features.len() != dim {
                return Err(Error::shape(dim, s.features.len()));
            }
            put_u32(&mut out, to_u32(s.task_id, "task id")?).map_err(io)?;
            put_u32(&mut out, to_u32(s.label, "label")?).map_err(io)?;
            put_f32s(&mut out, &s.features).map_err(io)?;
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes, "memory dump");
        if r.take(4)? != MEMORY_MAGIC {
            return Err(Error::Format("memory dump has the wrong magic".into()));
        }
        let strategy = match r.u32_le()? {
            0 => MemoryStrategy::Ring,
            1 => MemoryStrategy::Reservoir,
            s => return Err(Error::Format(format!("unknown memory strategy tag {s}"))),
        };
        let capacity = r.u32_le()? as usize;
        let seen_count = r.u64_le()?;
        let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
        let stream = r.u64_le()?;
        let word_pos = r.u128_le()?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        let n_classes = r.u32_le()? as usize;
        let mut classes = BTreeSet::new();
        for _ in 0..n_classes {
            classes.insert((r.u32_le()? as usize, r.u32_le()? as usize));
        }
        let n = r.u32_le()? as usize;
        let dim = r.u32_le()? as usize;
        if n > capacity {
            return Err(Error::Format(format!("{n} slots exceed capacity {capacity}")));
        }
        let mut slots = Vec::with_capacity(capacity);
        for _ in 0..n {
            let task_id = r.u32_le()? as usize;
            let label = r.u32_le()? as usize;
            let features = r.f32s_le(dim)?;
            slots.push(MemoryItem {
                features,
                label,
                task_id,
            });
        }
        r.finish()?;
        Ok(EpisodicMemory {
            strategy,
            capacity,
            slots,
            seen_count,
            classes,
            rng,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_bytes(&bytes)
    }
}

const MEMORY_MAGIC: &[u8; 4] = b"TPMM";

#[cfg(test)]
mod tests {
    use super::*;

    fn item(id: usize, label: usize, task: usize) -> MemoryItem {
        MemoryItem {
            features: vec![id as f32],
            label,
            task_id: task,
        }
    }

    fn ids(mem: &EpisodicMemory) -> Vec<usize> {
        mem.slots().iter().map(|s| s.features[0] as usize).collect()
    }

    #[test]
    fn stores_while_below_capacity() {
        for strategy in [MemoryStrategy::Ring, MemoryStrategy::Reservoir] {
            let mut mem = EpisodicMemory::new(strategy, 10, 0);
            mem.update((0..3).map(|i| item(i, i, 0)));
            assert_eq!(mem.len(), 3);
        }
    }

    #[test]
    fn ring_quota_one_keeps_newest() {
        let mut mem = EpisodicMemory::new(MemoryStrategy::Ring, 1, 0);
        mem.update([item(0, 0, 0), item(1, 0, 0)]);
        assert_eq!(ids(&mem), vec![1]);
    }

    #[test]
    fn ring_quota_shrinks_with_new_classes() {
        let mut mem = EpisodicMemory::new(MemoryStrategy::Ring, 4, 0);
        mem.update((0..4).map(|i| item(i, 0, 0)));
        assert_eq!(mem.ring_quota(), 4);
        mem.update([item(10, 1, 0)]);
        assert_eq!(mem.ring_quota(), 2);
        assert_eq!(ids(&mem), vec![2, 3, 10]);
        mem.update([item(11, 0, 1)]);
        assert_eq!(mem.ring_quota(), 1);
        assert_eq!(ids(&mem), vec![3, 10, 11]);
    }

    #[test]
    fn zero_capacity_never_stores() {
        for strategy in [MemoryStrategy::Ring, MemoryStrategy::Reservoir] {
            let mut mem = EpisodicMemory::new(strategy, 0, 0);
            mem.update((0..5).map(|i| item(i, 0, 0)));
            assert!(mem.is_empty());
            assert!(mem.sample(10).is_empty());
        }
    }

    #[test]
    fn sample_clamps_and_has_no_duplicates() {
        let mut mem = EpisodicMemory::new(MemoryStrategy::Reservoir, 10, 4);
        assert!(mem.sample(10).is_empty());
        mem.update((0..5).map(|i| item(i, i, 0)));
        let mut got: Vec<usize> = mem.sample(10).iter().map(|s| s.features[0] as usize).collect();
        got.sort();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn dump_restore_continues_stream() {
        let mut a = EpisodicMemory::new(MemoryStrategy::Reservoir, 5, 77);
        a.update((0..50).map(|i| item(i, i % 3, i / 20)));
        let mut b = EpisodicMemory::from_bytes(&a.to_bytes().unwrap()).unwrap();
        a.update((50..80).map(|i| item(i, 0, 3)));
        b.update((50..80).map(|i| item(i, 0, 3)));
        assert_eq!(a.slots(), b.slots());
        let sa: Vec<_> = a.sample(3).into_iter().cloned().collect();
        let sb: Vec<_> = b.sample(3).into_iter().cloned().collect();
        assert_eq!(sa, sb);
    }

    #[test]
    fn restore_rejects_garbage() {
        assert!(EpisodicMemory::from_bytes(b"nope").is_err());
        let mem = EpisodicMemory::new(MemoryStrategy::Ring, 2, 0);
        let bytes = mem.to_bytes().unwrap();
        assert!(EpisodicMemory::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
