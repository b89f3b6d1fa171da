use fixedbitset::FixedBitSet;

use super::{RrCollection, RrError};
use crate::network::NodeId;
use crate::oracle::{RevenueEvaluator, RevenueTracker};

/// Covered tag-`i` sets of one advertiser's growing seed set.
///
/// Remembers the collection generation it was built for; queries against a
/// collection that has since grown fail with [`RrError::StaleCoverage`].
#[derive(Debug, Clone)]
pub struct CoverageState {
    advertiser: usize,
    generation: u64,
    covered: FixedBitSet,
    count: usize,
}

impl CoverageState {
    pub fn new(coll: &RrCollection, advertiser: usize) -> Self {
        CoverageState {
            advertiser,
            generation: coll.generation(),
            covered: FixedBitSet::with_capacity(coll.tag_count(advertiser)),
            count: 0,
        }
    }

    fn check(&self, coll: &RrCollection) -> Result<(), RrError> {
        if self.generation == coll.generation() {
            Ok(())
        } else {
            Err(RrError::StaleCoverage {
                state: self.generation,
                collection: coll.generation(),
            })
        }
    }

    pub fn advertiser(&self) -> usize {
        self.advertiser
    }

    /// Number of covered sets.
    pub fn covered(&self) -> usize {
        self.count
    }

    /// Uncovered tag-`i` sets containing `v`.
    pub fn gain_count(&self, coll: &RrCollection, v: NodeId) -> Result<usize, RrError> {
        self.check(coll)?;
        Ok(self.gain_count_unchecked(coll, v))
    }

    /// `π̃_i(v | S)`.
    pub fn marginal_gain(&self, coll: &RrCollection, v: NodeId) -> Result<f64, RrError> {
        Ok(self.gain_count(coll, v)? as f64 * coll.unit_revenue())
    }

    /// Marks the sets containing `v` as covered and returns the gain.
    pub fn commit(&mut self, coll: &RrCollection, v: NodeId) -> Result<f64, RrError> {
        self.check(coll)?;
        Ok(self.commit_unchecked(coll, v) as f64 * coll.unit_revenue())
    }

    pub(super) fn gain_count_unchecked(&self, coll: &RrCollection, v: NodeId) -> usize {
        coll.sets_containing(self.advertiser, v)
            .iter()
            .filter(|&&l| !self.covered.contains(l as usize))
            .count()
    }

    pub(super) fn commit_unchecked(&mut self, coll: &RrCollection, v: NodeId) -> usize {
        let mut fresh = 0;
        for &l in coll.sets_containing(self.advertiser, v) {
            if !self.covered.put(l as usize) {
                fresh += 1;
            }
        }
        self.count += fresh;
        fresh
    }
}

/// `π̃(·, R)` as a [`RevenueEvaluator`], so the oracle-mode solvers run on
/// an RR collection unchanged.
///
/// Trackers borrow the collection, so they cannot outlive a resize.
#[derive(Debug, Clone, Copy)]
pub struct RrEstimator<'c> {
    coll: &'c RrCollection,
}

impl<'c> RrEstimator<'c> {
    pub fn new(coll: &'c RrCollection) -> Self {
        RrEstimator { coll }
    }

    pub fn collection(&self) -> &'c RrCollection {
        self.coll
    }

    /// `π̃_i({v})` straight from the inverted index.
    pub fn singleton(&self, advertiser: usize, v: NodeId) -> f64 {
        self.coll.sets_containing(advertiser, v).len() as f64 * self.coll.unit_revenue()
    }
}

#[derive(Debug, Clone)]
pub struct RrTracker<'a> {
    coll: &'a RrCollection,
    state: CoverageState,
}

impl RrTracker<'_> {
    pub fn state(&self) -> &CoverageState {
        &self.state
    }
}

impl RevenueTracker for RrTracker<'_> {
    fn value(&self) -> f64 {
        self.state.covered() as f64 * self.coll.unit_revenue()
    }

    fn gain(&self, v: NodeId) -> f64 {
        self.state.gain_count_unchecked(self.coll, v) as f64 * self.coll.unit_revenue()
    }

    fn insert(&mut self, v: NodeId) {
        self.state.commit_unchecked(self.coll, v);
    }

    fn value_with(&self, v: NodeId) -> f64 {
        (self.state.covered() + self.state.gain_count_unchecked(self.coll, v)) as f64 * self.coll.unit_revenue()
    }
}

impl RevenueEvaluator for RrEstimator<'_> {
    type Tracker<'a>
        = RrTracker<'a>
    where
        Self: 'a;

    fn node_count(&self) -> usize {
        self.coll.node_count()
    }

    fn advertiser_count(&self) -> usize {
        self.coll.advertiser_count()
    }

    fn tracker(&self, advertiser: usize) -> RrTracker<'_> {
        RrTracker {
            coll: self.coll,
            state: CoverageState::new(self.coll, advertiser),
        }
    }
}
