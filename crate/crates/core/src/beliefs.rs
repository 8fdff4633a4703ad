//! Beta-Bernoulli beliefs about pairwise interdependencies.
//!
//! For every ordered pair `(i, j)`, `i != j`, an agent keeps counters `p` and
//! `q` starting at 1. The belief that flipping `i` moves the contribution of
//! `j` is the Beta mean `p / (p + q)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefState {
    n: usize,
    p: Vec<u32>,
    q: Vec<u32>,
}

impl BeliefState {
    /// Uniform prior: every counter 1, every belief 0.5.
    pub fn new(n_decisions: usize) -> Self {
        BeliefState {
            n: n_decisions,
            p: vec![1; n_decisions * n_decisions],
            q: vec![1; n_decisions * n_decisions],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self, i: usize, j: usize) -> (u32, u32) {
        let k = i * self.n + j;
        (self.p[k], self.q[k])
    }

    /// Observations recorded for `(i, j)`.
    pub fn observations(&self, i: usize, j: usize) -> u32 {
        let (p, q) = self.counts(i, j);
        p + q - 2
    }

    pub fn belief(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::Domain(format!(
                "belief about a decision and itself ({i})"
            )));
        }
        if i >= self.n || j >= self.n {
            return Err(Error::Domain(format!(
                "belief index ({i}, {j}) out of range"
            )));
        }
        Ok(self.belief_unchecked(i, j))
    }

    pub(crate) fn belief_unchecked(&self, i: usize, j: usize) -> f64 {
        let (p, q) = self.counts(i, j);
        f64::from(p) / f64::from(p + q)
    }

    /// Records one observation that flipping `i` did (`changed`) or did not move contribution `j`.
    pub fn observe(&mut self, i: usize, j: usize, changed: bool) {
        let k = i * self.n + j;
        if changed {
            self.p[k] += 1;
        } else {
            self.q[k] += 1;
        }
    }

    /// Update after the agent flipped decision `flipped`.
    ///
    /// Every other decision `j` in `own` is compared exactly between the two
    /// periods' contributions. Decisions outside `own` are not observed.
    pub fn update(
        &mut self,
        flipped: usize,
        own: &[usize],
        contribs_prev: &[f64],
        contribs_now: &[f64],
    ) -> Result<()> {
        if !own.contains(&flipped) {
            return Err(Error::Internal(format!(
                "flipped decision {flipped} is not owned by the agent"
            )));
        }
        for &j in own.iter().filter(|&&j| j != flipped) {
            #[allow(clippy::float_cmp)]
            let changed = contribs_now[j] != contribs_prev[j];
            self.observe(flipped, j, changed);
        }
        Ok(())
    }
}

/// One belief state per agent.
pub fn init_beliefs(n_decisions: usize, n_agents: usize) -> Vec<BeliefState> {
    vec![BeliefState::new(n_decisions); n_agents]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_beliefs_are_one_half() {
        let states = init_beliefs(4, 3);
        assert_eq!(states.len(), 3);
        for s in &states {
            for i in 0..4 {
                for j in (0..4).filter(|&j| j != i) {
                    assert_eq!(s.belief(i, j).unwrap(), 0.5);
                    assert_eq!(s.observations(i, j), 0);
                }
            }
        }
    }

    #[test]
    fn beta_mean_arithmetic() {
        let mut s = BeliefState::new(3);
        s.observe(0, 1, true);
        s.observe(0, 1, true);
        assert_eq!(s.belief(0, 1).unwrap(), 0.75);
        for _ in 0..8 {
            s.observe(0, 2, false);
        }
        assert_eq!(s.belief(0, 2).unwrap(), 0.1);
    }

    #[test]
    fn single_observations() {
        let mut s = BeliefState::new(3);
        s.observe(1, 2, true);
        assert_eq!(s.belief(1, 2).unwrap(), 2.0 / 3.0);
        s.observe(2, 1, false);
        assert_eq!(s.belief(2, 1).unwrap(), 1.0 / 3.0);
        // the reverse pair is a separate belief
        assert_eq!(s.belief(2, 0).unwrap(), 0.5);
    }

    #[test]
    fn diagonal_is_a_domain_error() {
        let s = BeliefState::new(3);
        assert!(matches!(s.belief(1, 1), Err(Error::Domain(_))));
        assert!(s.belief(0, 3).is_err());
    }

    #[test]
    fn update_branches() {
        let mut s = BeliefState::new(4);
        let prev = [0.1, 0.2, 0.3, 0.4];
        let now = [0.6, 0.2, 0.9, 0.4];
        s.update(0, &[0, 1, 2], &prev, &now).unwrap();
        assert!(s.belief(0, 1).unwrap() < 0.5);
        assert!(s.belief(0, 2).unwrap() > 0.5);
        // decision 3 is not owned
        assert_eq!(s.counts(0, 3), (1, 1));
        assert!(matches!(
            s.update(3, &[0, 1], &prev, &now),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn update_increments_own_minus_one_counters() {
        let mut s = BeliefState::new(6);
        let own = [0, 2, 3, 5];
        let prev = [0.0; 6];
        let now = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        s.update(2, &own, &prev, &now).unwrap();
        let total: u32 = (0..6)
            .flat_map(|i| (0..6).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s.observations(i, j))
            .sum();
        assert_eq!(total, 3);
    }
}
