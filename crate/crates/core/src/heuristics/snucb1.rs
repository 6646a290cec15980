//! SN-UCB1: border nodes grouped by their exact set of queried neighbors,
//! with UCB1 over the (volatile) groups.
//!
//! A group is identified by its signature. When a query changes a border
//! node's queried neighbors its signature changes, so it lands in a new
//! group with fresh statistics. Groups that lose all members are dropped.
//! New groups wait in a FIFO queue and each gets one forced pull before the
//! UCB index applies.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use crate::error::{HarvestError, Result};
use crate::graph::{NodeId, ObservedState};

pub type Signature = Vec<NodeId>;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassStats {
    pub pulls: u64,
    pub payoff: f64,
}

impl ClassStats {
    pub fn mean(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.payoff / self.pulls as f64
        }
    }

    /// `mean + sqrt(2 ln N / n)`; infinite for a class never pulled.
    pub fn ucb(&self, total_pulls: u64) -> f64 {
        if self.pulls == 0 {
            return f64::INFINITY;
        }
        self.mean() + (2.0 * (total_pulls.max(1) as f64).ln() / self.pulls as f64).sqrt()
    }
}

#[derive(Debug, Clone, Default)]
pub struct EquivClassState {
    stats: BTreeMap<Signature, ClassStats>,
    members: BTreeMap<Signature, Vec<NodeId>>,
    fresh_queue: VecDeque<Signature>,
    total_pulls: u64,
    pending: Option<Signature>,
}

impl EquivClassState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Regroups the current border. Existing signatures keep their
    /// statistics; new ones enter the fresh queue in border order.
    pub fn refresh(&mut self, state: &ObservedState) {
        let mut members: BTreeMap<Signature, Vec<NodeId>> = BTreeMap::new();
        let mut appeared = Vec::new();
        for &b in state.border() {
            let sig: Signature = state.observed_neighbors(b).collect();
            if !self.stats.contains_key(&sig) && !members.contains_key(&sig) {
                appeared.push(sig.clone());
            }
            members.entry(sig).or_default().push(b);
        }
        self.stats.retain(|sig, _| members.contains_key(sig));
        self.fresh_queue.retain(|sig| members.contains_key(sig));
        for sig in appeared {
            self.stats.insert(sig.clone(), ClassStats::default());
            self.fresh_queue.push_back(sig);
        }
        self.members = members;
    }

    /// Picks a class (fresh first, then by UCB index) and returns a uniformly
    /// chosen member. Feed the payoff back through [`Self::update`].
    pub fn select<R: Rng + ?Sized>(&mut self, state: &ObservedState, rng: &mut R) -> Result<NodeId> {
        self.refresh(state);
        if self.members.is_empty() {
            return Err(HarvestError::ExhaustedBorder);
        }
        let sig = match self.fresh_queue.pop_front() {
            Some(sig) => sig,
            None => {
                let indices: Vec<(&Signature, f64)> = self
                    .stats
                    .iter()
                    .map(|(sig, st)| (sig, st.ucb(self.total_pulls)))
                    .collect();
                let best = indices.iter().map(|(_, u)| *u).fold(f64::NEG_INFINITY, f64::max);
                let ties: Vec<&Signature> = indices.iter().filter(|(_, u)| *u == best).map(|(s, _)| *s).collect();
                ties[if ties.len() > 1 { rng.random_range(0..ties.len()) } else { 0 }].clone()
            }
        };
        let members = &self.members[&sig];
        let node = members[if members.len() > 1 { rng.random_range(0..members.len()) } else { 0 }];
        self.pending = Some(sig);
        Ok(node)
    }

    /// Credits the class chosen by the last [`Self::select`].
    pub fn update(&mut self, payoff: f64) -> Result<()> {
        let sig = self
            .pending
            .take()
            .ok_or_else(|| HarvestError::Contract("SN-UCB1 update without a preceding select".into()))?;
        let st = self.stats.entry(sig).or_default();
        st.pulls += 1;
        st.payoff += payoff;
        self.total_pulls += 1;
        Ok(())
    }

    pub fn class_count(&self) -> usize {
        self.members.len()
    }

    pub fn total_pulls(&self) -> u64 {
        self.total_pulls
    }

    pub fn stats(&self, sig: &[NodeId]) -> Option<ClassStats> {
        self.stats.get(sig).copied()
    }

    pub fn members(&self, sig: &[NodeId]) -> Option<&[NodeId]> {
        self.members.get(sig).map(Vec::as_slice)
    }

    pub fn fresh_len(&self) -> usize {
        self.fresh_queue.len()
    }

    /// Signature of every border node's class, for invariant checks.
    pub fn classes(&self) -> impl Iterator<Item = (&Signature, &[NodeId])> {
        self.members.iter().map(|(s, m)| (s, m.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::fixtures::graph;
    use crate::graph::init_state;
    use crate::rng::seeded;

    #[test]
    fn ucb_index_arithmetic() {
        let good = ClassStats { pulls: 5, payoff: 5.0 };
        let bad = ClassStats { pulls: 5, payoff: 0.0 };
        let bonus = (2.0 * 10f64.ln() / 5.0).sqrt();
        assert!((good.ucb(10) - (1.0 + bonus)).abs() < 1e-15);
        assert!((bad.ucb(10) - bonus).abs() < 1e-15);
        assert!(good.ucb(10) > bad.ucb(10));
    }

    #[test]
    fn fresh_class_is_pulled_before_seen_one() {
        // seeds 0 and 1; border 2 ~ {0}, border 3 ~ {1}
        let g = Arc::new(graph(4, &[(0, 2), (1, 3)], &[]));
        let s = init_state(g, &[0, 1]).unwrap();
        let mut ec = EquivClassState::new();
        let mut rng = seeded(0);
        let first = ec.select(&s, &mut rng).unwrap();
        ec.update(1.0).unwrap();
        let second = ec.select(&s, &mut rng).unwrap();
        assert_ne!(first, second);
        assert_eq!(ec.fresh_len(), 0);
    }

    #[test]
    fn every_border_node_in_exactly_one_class() {
        let edges = [(0, 2), (0, 3), (1, 3), (1, 4), (0, 5), (1, 5)];
        let g = Arc::new(graph(6, &edges, &[]));
        let s = init_state(g, &[0, 1]).unwrap();
        let mut ec = EquivClassState::new();
        ec.refresh(&s);
        let mut seen: Vec<NodeId> = ec.classes().flat_map(|(_, m)| m.to_vec()).collect();
        seen.sort_unstable();
        let mut border = s.border().to_vec();
        border.sort_unstable();
        assert_eq!(seen, border);
        assert_eq!(ec.members(&[0, 1]).map(<[NodeId]>::len), Some(2));
        assert_eq!(ec.class_count(), 3);
    }

    #[test]
    fn class_split_resets_statistics() {
        // seed 0; border {1,2,3} all share signature {0}
        // querying 1 (adjacent to 2) moves 2 into class {0,1}; 3 stays in {0}
        let edges = [(0, 1), (0, 2), (0, 3), (1, 2)];
        let g = Arc::new(graph(4, &edges, &[1]));
        let mut s = init_state(g, &[0]).unwrap();
        let mut ec = EquivClassState::new();
        let mut rng = seeded(3);
        ec.refresh(&s);
        assert_eq!(ec.members(&[0]).unwrap().len(), 3);

        // force the pull onto node 1 by querying it and crediting class {0}
        let picked = ec.select(&s, &mut rng).unwrap();
        ec.update(1.0).unwrap();
        s.query(picked).unwrap();
        ec.refresh(&s);
        let kept = ec.stats(&[0]);
        match picked {
            1 => {
                // 2 re-signatured to {0,1}: fresh class; {0} keeps node 3 and its stats
                assert_eq!(ec.members(&[0, 1]), Some(&[2][..]));
                assert_eq!(ec.stats(&[0, 1]), Some(ClassStats::default()));
                assert_eq!(ec.members(&[0]), Some(&[3][..]));
                assert_eq!(kept, Some(ClassStats { pulls: 1, payoff: 1.0 }));
            }
            2 => {
                assert_eq!(ec.members(&[0, 2]), Some(&[1][..]));
                assert_eq!(ec.members(&[0]), Some(&[3][..]));
                assert_eq!(kept.unwrap().pulls, 1);
            }
            3 => {
                let mut m = ec.members(&[0]).unwrap().to_vec();
                m.sort_unstable();
                assert_eq!(m, vec![1, 2]);
            }
            _ => unreachable!(),
        }
        assert_eq!(ec.fresh_len(), if picked == 3 { 0 } else { 1 });
    }

    #[test]
    fn empty_class_removed() {
        let g = Arc::new(graph(3, &[(0, 1), (1, 2)], &[]));
        let mut s = init_state(g, &[0]).unwrap();
        let mut ec = EquivClassState::new();
        let mut rng = seeded(1);
        let v = ec.select(&s, &mut rng).unwrap();
        assert_eq!(v, 1);
        ec.update(0.0).unwrap();
        s.query(1).unwrap();
        ec.refresh(&s);
        assert!(ec.stats(&[0]).is_none());
        assert_eq!(ec.members(&[1]), Some(&[2][..]));
    }

    #[test]
    fn exhausted_border() {
        let g = Arc::new(graph(2, &[], &[]));
        let s = init_state(g, &[0]).unwrap();
        assert!(matches!(EquivClassState::new().select(&s, &mut seeded(0)), Err(HarvestError::ExhaustedBorder)));
        assert!(EquivClassState::new().update(1.0).is_err());
    }
}
