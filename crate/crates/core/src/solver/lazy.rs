use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::network::NodeId;

#[derive(Debug, Clone, Copy)]
struct Entry {
    key: f64,
    gain: f64,
    advertiser: u32,
    node: NodeId,
    version: u32,
}

// Larger key first, then larger gain (rates tie at 1 for every zero-cost
// node), then the smaller advertiser, then the smaller node.
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| self.gain.total_cmp(&other.gain))
            .then_with(|| other.advertiser.cmp(&self.advertiser))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

/// Element picked by [`LazyQueue::pop`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pick {
    pub advertiser: usize,
    pub node: NodeId,
    pub key: f64,
    pub gain: f64,
}

/// Max-queue over `(node, advertiser)` elements with lazily refreshed keys.
///
/// Each advertiser's seed set carries a version that the caller bumps on
/// every insertion. An entry whose version is current holds its exact key;
/// stale entries hold upper bounds (marginal gains and rates only shrink as
/// seed sets grow), so the first current entry at the top is the exact
/// argmax, tie-broken by gain, advertiser id and node id.
#[derive(Debug, Default)]
pub struct LazyQueue {
    heap: BinaryHeap<Entry>,
    versions: Vec<u32>,
}

impl LazyQueue {
    pub fn new(advertisers: usize) -> Self {
        LazyQueue {
            heap: BinaryHeap::new(),
            versions: vec![0; advertisers],
        }
    }

    /// Adds an element whose key is exact for the current seed set.
    pub fn push(&mut self, advertiser: usize, node: NodeId, key: f64, gain: f64) {
        self.heap.push(Entry {
            key,
            gain,
            advertiser: advertiser as u32,
            node,
            version: self.versions[advertiser],
        });
    }

    /// Marks every key of `advertiser` as stale.
    pub fn bump(&mut self, advertiser: usize) {
        self.versions[advertiser] += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Removes and returns the exact argmax.
    ///
    /// Entries failing `keep` are dropped without evaluation; `eval` returns
    /// the fresh `(key, gain)` of a stale entry.
    pub fn pop(
        &mut self,
        mut keep: impl FnMut(usize, NodeId) -> bool,
        mut eval: impl FnMut(usize, NodeId) -> (f64, f64),
    ) -> Option<Pick> {
        while let Some(e) = self.heap.pop() {
            let adv = e.advertiser as usize;
            if !keep(adv, e.node) {
                continue;
            }
            if e.version == self.versions[adv] {
                return Some(Pick {
                    advertiser: adv,
                    node: e.node,
                    key: e.key,
                    gain: e.gain,
                });
            }
            let (key, gain) = eval(adv, e.node);
            self.push(adv, e.node, key, gain);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_break_prefers_small_ids() {
        let mut q = LazyQueue::new(2);
        q.push(1, 0, 1.0, 1.0);
        q.push(0, 5, 1.0, 1.0);
        q.push(0, 2, 1.0, 1.0);
        q.push(1, 9, 2.0, 2.0);
        q.push(1, 7, 1.0, 3.0);
        let order: Vec<_> = std::iter::from_fn(|| q.pop(|_, _| true, |_, _| unreachable!()))
            .map(|p| (p.advertiser, p.node))
            .collect();
        assert_eq!(order, vec![(1, 9), (1, 7), (0, 2), (0, 5), (1, 0)]);
    }

    #[test]
    fn stale_entries_are_refreshed() {
        let mut q = LazyQueue::new(1);
        q.push(0, 0, 5.0, 5.0);
        q.push(0, 1, 4.0, 4.0);
        q.bump(0);
        // Node 0 drops to 1.0 after the bump; node 1 keeps 4.0.
        let fresh = |_: usize, v: NodeId| if v == 0 { (1.0, 1.0) } else { (4.0, 4.0) };
        assert_eq!(q.pop(|_, _| true, fresh).unwrap().node, 1);
        assert_eq!(q.pop(|_, _| true, fresh).unwrap().node, 0);
        assert!(q.pop(|_, _| true, fresh).is_none());
    }
}
