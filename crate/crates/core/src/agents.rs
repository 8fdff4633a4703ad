//! Organizational units: task allocation, utilities, ring pairing and the
//! individual and collaborative search steps of one period.
//!
//! Every step evaluates candidates against the vector implemented in the
//! previous period. Agents never see each other's same-period choices.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::landscape::{DecisionVector, Landscape};

/// Partition of decisions `0..n` among agents `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    owner: Vec<usize>,
    /// Owned decisions per agent, ascending.
    areas: Vec<Vec<usize>>,
    /// Residual decisions per agent, ascending.
    residuals: Vec<Vec<usize>>,
}

impl Allocation {
    /// Validates that `areas` partitions `0..n_decisions`.
    pub fn from_areas(n_decisions: usize, mut areas: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; n_decisions];
        for (m, area) in areas.iter_mut().enumerate() {
            area.sort_unstable();
            for &i in area.iter() {
                if i >= n_decisions {
                    return Err(Error::Internal(format!("decision {i} out of range")));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::Internal(format!(
                        "decision {i} owned by agents {} and {m}",
                        owner[i]
                    )));
                }
                owner[i] = m;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Internal(format!("decision {i} has no owner")));
        }
        let mut alloc = Allocation {
            owner,
            areas,
            residuals: Vec::new(),
        };
        alloc.refresh_residuals();
        Ok(alloc)
    }

    /// Contiguous equal blocks: agent `m` owns `m*N/M .. (m+1)*N/M`.
    pub fn contiguous(n_decisions: usize, n_agents: usize) -> Result<Self> {
        check_divisible(n_decisions, n_agents)?;
        let size = n_decisions / n_agents;
        Self::from_areas(
            n_decisions,
            (0..n_agents)
                .map(|m| (m * size..(m + 1) * size).collect())
                .collect(),
        )
    }

    /// Uniformly random partition into `M` areas of `N/M` decisions each.
    pub fn random_equal<R: Rng + ?Sized>(
        n_decisions: usize,
        n_agents: usize,
        rng: &mut R,
    ) -> Result<Self> {
        check_divisible(n_decisions, n_agents)?;
        let size = n_decisions / n_agents;
        let mut order: Vec<usize> = (0..n_decisions).collect();
        order.shuffle(rng);
        Self::from_areas(
            n_decisions,
            order.chunks(size).map(<[usize]>::to_vec).collect(),
        )
    }

    fn refresh_residuals(&mut self) {
        self.residuals = (0..self.areas.len())
            .map(|m| {
                (0..self.owner.len())
                    .filter(|&i| self.owner[i] != m)
                    .collect()
            })
            .collect();
    }

    pub fn n_agents(&self) -> usize {
        self.areas.len()
    }

    pub fn n_decisions(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self, decision: usize) -> usize {
        self.owner[decision]
    }

    pub fn area(&self, agent: usize) -> &[usize] {
        &self.areas[agent]
    }

    pub fn residual(&self, agent: usize) -> &[usize] {
        &self.residuals[agent]
    }

    pub fn areas(&self) -> &[Vec<usize>] {
        &self.areas
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.areas.iter().map(Vec::len).collect()
    }

    /// Moves `task` from `seller` to `buyer`.
    pub fn transfer(&mut self, task: usize, seller: usize, buyer: usize) -> Result<()> {
        if task >= self.owner.len() || self.owner[task] != seller {
            return Err(Error::Internal(format!(
                "task {task} is not owned by agent {seller}"
            )));
        }
        if buyer >= self.areas.len() || buyer == seller {
            return Err(Error::Internal(format!(
                "invalid buyer {buyer} for task {task}"
            )));
        }
        self.areas[seller].retain(|&i| i != task);
        let area = &mut self.areas[buyer];
        let pos = area.partition_point(|&i| i < task);
        area.insert(pos, task);
        self.owner[task] = buyer;
        self.refresh_residuals();
        Ok(())
    }

    /// Errors when any agent holds more decisions than its capacity.
    pub fn check_capacities(&self, capacities: &[usize]) -> Result<()> {
        if capacities.len() != self.areas.len() {
            return Err(Error::Internal(format!(
                "{} capacities for {} agents",
                capacities.len(),
                self.areas.len()
            )));
        }
        for (m, (area, &cap)) in self.areas.iter().zip(capacities).enumerate() {
            if area.len() > cap {
                return Err(Error::Internal(format!(
                    "agent {m} holds {} decisions, capacity {cap}",
                    area.len()
                )));
            }
        }
        Ok(())
    }
}

fn check_divisible(n_decisions: usize, n_agents: usize) -> Result<()> {
    if n_agents == 0 || !n_decisions.is_multiple_of(n_agents) {
        return Err(Error::Config(format!(
            "N = {n_decisions} is not divisible by M = {n_agents}"
        )));
    }
    Ok(())
}

/// Incentive weight and capacity of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentParams {
    pub alpha: f64,
    pub capacity: usize,
}

impl AgentParams {
    pub fn new(alpha: f64, capacity: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha = {alpha} outside [0, 1]")));
        }
        if capacity == 0 {
            return Err(Error::Config("capacity must be at least 1".into()));
        }
        Ok(AgentParams { alpha, capacity })
    }
}

/// Linear outcome-based incentive: `alpha * own + (1 - alpha) * residual`.
pub fn utility(own_perf: f64, residual_perf: f64, alpha: f64) -> f64 {
    alpha * own_perf + (1.0 - alpha) * residual_perf
}

/// Utility of `agent` if vector `d` were implemented.
///
/// An agent owning every decision has no residual; its utility is then its own performance.
pub fn agent_utility(
    landscape: &Landscape,
    alloc: &Allocation,
    agent: usize,
    d: &DecisionVector,
    alpha: f64,
) -> Result<f64> {
    let own = landscape.partial_performance(alloc.area(agent), d)?;
    let residual = match alloc.residual(agent) {
        [] => own,
        rest => landscape.partial_performance(rest, d)?,
    };
    Ok(utility(own, residual, alpha))
}

/// Copy of `current` with one uniformly chosen decision of `own` flipped.
pub fn propose_flip<R: Rng + ?Sized>(
    own: &[usize],
    current: &DecisionVector,
    rng: &mut R,
) -> Result<(DecisionVector, usize)> {
    let &i = own.choose(rng).ok_or_else(|| {
        Error::Domain("cannot propose a flip for an agent without decisions".into())
    })?;
    Ok((current.flipped(i), i))
}

/// An agent's decisions for the period, aligned with its area, and the flip it made if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentChoice {
    pub agent: usize,
    pub decisions: Vec<bool>,
    pub flipped: Option<usize>,
}

impl AgentChoice {
    fn from_vector(
        agent: usize,
        alloc: &Allocation,
        d: &DecisionVector,
        flipped: Option<usize>,
    ) -> Self {
        AgentChoice {
            agent,
            decisions: alloc.area(agent).iter().map(|&i| d.get(i)).collect(),
            flipped,
        }
    }
}

/// One-agent hill-climbing step: status quo versus one proposal, status quo on ties.
pub fn individual_step<R: Rng + ?Sized>(
    agent: usize,
    landscape: &Landscape,
    alloc: &Allocation,
    prev: &DecisionVector,
    alpha: f64,
    rng: &mut R,
) -> Result<AgentChoice> {
    let (proposal, i) = propose_flip(alloc.area(agent), prev, rng)?;
    let keep = agent_utility(landscape, alloc, agent, prev, alpha)?;
    let moved = agent_utility(landscape, alloc, agent, &proposal, alpha)?;
    Ok(if moved > keep {
        AgentChoice::from_vector(agent, alloc, &proposal, Some(i))
    } else {
        AgentChoice::from_vector(agent, alloc, prev, None)
    })
}

/// Disjoint ring-neighbour pairs active in one period, as `(initiator, partner)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
}

impl Pairing {
    pub fn partner_of(&self, agent: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == agent {
                Some(b)
            } else if b == agent {
                Some(a)
            } else {
                None
            }
        })
    }
}

/// Visits agents in random order; each unpaired agent, with probability `prob`,
/// picks its left or right ring neighbour and pairs with it if that neighbour is still free.
pub fn pair_agents<R: Rng + ?Sized>(n_agents: usize, prob: f64, rng: &mut R) -> Result<Pairing> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::Domain(format!(
            "pairing probability {prob} outside [0, 1]"
        )));
    }
    let mut pairing = Pairing::default();
    if n_agents < 2 {
        return Ok(pairing);
    }
    let mut order: Vec<usize> = (0..n_agents).collect();
    order.shuffle(rng);
    let mut paired = vec![false; n_agents];
    for m in order {
        if paired[m] || !rng.gen_bool(prob) {
            continue;
        }
        let neighbour = if rng.gen_bool(0.5) {
            (m + 1) % n_agents
        } else {
            (m + n_agents - 1) % n_agents
        };
        if !paired[neighbour] {
            paired[m] = true;
            paired[neighbour] = true;
            pairing.pairs.push((m, neighbour));
        }
    }
    Ok(pairing)
}

fn ring_adjacent(a: usize, b: usize, n_agents: usize) -> bool {
    a != b && ((a + 1) % n_agents == b || (b + 1) % n_agents == a)
}

/// Mean of the two agents' utilities.
pub fn joint_utility(
    landscape: &Landscape,
    alloc: &Allocation,
    pair: (usize, usize),
    d: &DecisionVector,
    alpha: f64,
) -> Result<f64> {
    let u_first = agent_utility(landscape, alloc, pair.0, d, alpha)?;
    let u_second = agent_utility(landscape, alloc, pair.1, d, alpha)?;
    Ok(0.5 * (u_first + u_second))
}

/// Adjacent hill-climbing for a ring-neighbour pair.
///
/// Both agents propose one flip. The candidates are (old, old), (new, old) and
/// (old, new); both flips together are never considered. Ties prefer the
/// candidates in that order, so at most one of the two agents flips.
pub fn adjacent_step<R: Rng + ?Sized>(
    pair: (usize, usize),
    landscape: &Landscape,
    alloc: &Allocation,
    prev: &DecisionVector,
    alpha: f64,
    rng: &mut R,
) -> Result<(AgentChoice, AgentChoice)> {
    let (m, n) = pair;
    if !ring_adjacent(m, n, alloc.n_agents()) {
        return Err(Error::Domain(format!(
            "agents {m} and {n} are not ring neighbours"
        )));
    }
    let (prop_m, flip_m) = propose_flip(alloc.area(m), prev, rng)?;
    let (prop_n, flip_n) = propose_flip(alloc.area(n), prev, rng)?;

    let candidates = [
        (prev, None),
        (&prop_m, Some((m, flip_m))),
        (&prop_n, Some((n, flip_n))),
    ];
    let mut best = 0;
    let mut best_u = f64::NEG_INFINITY;
    for (idx, (d, _)) in candidates.iter().enumerate() {
        let u = joint_utility(landscape, alloc, pair, d, alpha)?;
        if u > best_u {
            best_u = u;
            best = idx;
        }
    }
    let (chosen, flip) = candidates[best];
    let flipped_by = |agent| flip.and_then(|(who, i)| (who == agent).then_some(i));
    Ok((
        AgentChoice::from_vector(m, alloc, chosen, flipped_by(m)),
        AgentChoice::from_vector(n, alloc, chosen, flipped_by(n)),
    ))
}

/// Places every agent's decisions at their global indices.
pub fn assemble_vector(per_agent: &[Vec<bool>], alloc: &Allocation) -> Result<DecisionVector> {
    if per_agent.len() != alloc.n_agents() {
        return Err(Error::Internal(format!(
            "{} decision lists for {} agents",
            per_agent.len(),
            alloc.n_agents()
        )));
    }
    let mut bits = vec![None; alloc.n_decisions()];
    for (m, decisions) in per_agent.iter().enumerate() {
        let area = alloc.area(m);
        if decisions.len() != area.len() {
            return Err(Error::Internal(format!(
                "agent {m} reported {} decisions for an area of {}",
                decisions.len(),
                area.len()
            )));
        }
        for (&i, &b) in area.iter().zip(decisions) {
            if bits[i].replace(b).is_some() {
                return Err(Error::Internal(format!("decision {i} placed twice")));
            }
        }
    }
    bits.into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| Error::Internal(format!("decision {i} missing"))))
        .collect::<Result<Vec<_>>>()
        .map(DecisionVector::from_bits)
}

/// Inverse of [`assemble_vector`].
pub fn split_vector(d: &DecisionVector, alloc: &Allocation) -> Vec<Vec<bool>> {
    alloc
        .areas()
        .iter()
        .map(|area| area.iter().map(|&i| d.get(i)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{
        build_influence_matrix, generate_landscape, InfluenceMatrix, MatrixKind,
    };
    use crate::rng::SeedKey;

    #[test]
    fn utility_examples() {
        assert_eq!(utility(0.7, 0.3, 1.0), 0.7);
        assert_eq!(utility(0.7, 0.3, 0.0), 0.3);
        assert!((utility(0.6, 0.2, 0.25) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn params_domain() {
        assert!(AgentParams::new(0.5, 5).is_ok());
        assert!(AgentParams::new(1.5, 5).is_err());
        assert!(AgentParams::new(-0.1, 5).is_err());
        assert!(AgentParams::new(0.5, 0).is_err());
    }

    #[test]
    fn allocation_partition_checks() {
        assert!(Allocation::from_areas(4, vec![vec![0, 1], vec![2, 3]]).is_ok());
        assert!(Allocation::from_areas(4, vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(Allocation::from_areas(4, vec![vec![0, 1], vec![2]]).is_err());
        assert!(Allocation::from_areas(4, vec![vec![0, 1], vec![2, 3, 4]]).is_err());
        assert!(matches!(
            Allocation::contiguous(15, 4),
            Err(Error::Config(_))
        ));
        let a = Allocation::contiguous(15, 5).unwrap();
        assert_eq!(a.area(1), &[3, 4, 5]);
        assert_eq!(a.residual(4), &(0..12).collect::<Vec<_>>()[..]);
        assert!(a.check_capacities(&[3; 5]).is_ok());
        assert!(a.check_capacities(&[2; 5]).is_err());
    }

    #[test]
    fn random_equal_partition_sizes() {
        let mut rng = SeedKey::new(1).rng();
        for _ in 0..20 {
            let a = Allocation::random_equal(15, 5, &mut rng).unwrap();
            assert_eq!(a.sizes(), vec![3; 5]);
        }
    }

    #[test]
    fn transfer_moves_ownership() {
        let mut a = Allocation::contiguous(6, 3).unwrap();
        a.transfer(0, 0, 2).unwrap();
        assert_eq!(a.area(0), &[1]);
        assert_eq!(a.area(2), &[0, 4, 5]);
        assert_eq!(a.owner(0), 2);
        assert!(a.residual(2).iter().all(|&i| a.owner(i) != 2));
        assert!(matches!(a.transfer(0, 0, 1), Err(Error::Internal(_))));
    }

    #[test]
    fn single_own_decision_flips_deterministically() {
        let d = DecisionVector::zeros(4);
        let mut rng = SeedKey::new(0).rng();
        let (p, i) = propose_flip(&[2], &d, &mut rng).unwrap();
        assert_eq!(i, 2);
        assert_eq!(p.to_string(), "0010");
        assert!(propose_flip(&[], &d, &mut rng).is_err());
    }

    #[test]
    fn proposal_frequencies_are_uniform() {
        let mut rng = SeedKey::new(8).rng();
        let d = DecisionVector::zeros(6);
        let own = [1, 3, 4];
        let mut counts = [0usize; 6];
        let draws = 10_000;
        for _ in 0..draws {
            let (p, i) = propose_flip(&own, &d, &mut rng).unwrap();
            assert_eq!(p.hamming(&d), 1);
            assert!(own.contains(&i));
            counts[i] += 1;
        }
        for &i in &own {
            let freq = counts[i] as f64 / draws as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.02, "index {i}: {freq}");
        }
    }

    fn small_landscape(seed: u64, n: usize, k: usize) -> Landscape {
        let mut rng = SeedKey::new(seed).rng();
        let m = build_influence_matrix(MatrixKind::Random { k }, n, &mut rng).unwrap();
        generate_landscape(m, &mut rng).unwrap()
    }

    #[test]
    fn individual_step_matches_two_option_enumeration() {
        let landscape = small_landscape(21, 4, 1);
        let alloc = Allocation::contiguous(4, 2).unwrap();
        for trial in 0..200u64 {
            let mut rng = SeedKey::new(trial).rng();
            let prev = DecisionVector::random(4, &mut rng);
            let alpha = [0.0, 0.25, 0.5, 1.0][trial as usize % 4];
            let agent = (trial % 2) as usize;
            let choice = individual_step(
                agent,
                &landscape,
                &alloc,
                &prev,
                alpha,
                &mut SeedKey::new(trial).child(1).rng(),
            )
            .unwrap();
            // replay the same proposal
            let (proposal, i) = propose_flip(
                alloc.area(agent),
                &prev,
                &mut SeedKey::new(trial).child(1).rng(),
            )
            .unwrap();
            let score = |d: &DecisionVector| {
                let own: f64 = alloc
                    .area(agent)
                    .iter()
                    .map(|&j| landscape.contribution(j, d))
                    .sum::<f64>()
                    / 2.0;
                let res: f64 = alloc
                    .residual(agent)
                    .iter()
                    .map(|&j| landscape.contribution(j, d))
                    .sum::<f64>()
                    / 2.0;
                alpha * own + (1.0 - alpha) * res
            };
            let expected = if score(&proposal) > score(&prev) {
                (&proposal, Some(i))
            } else {
                (&prev, None)
            };
            assert_eq!(choice.flipped, expected.1);
            let expected_bits: Vec<bool> = alloc
                .area(agent)
                .iter()
                .map(|&j| expected.0.get(j))
                .collect();
            assert_eq!(choice.decisions, expected_bits);
        }
    }

    #[test]
    fn individual_step_keeps_status_quo_when_proposal_is_worse() {
        // one decision per agent, no interactions; agent 0 prefers 0
        let m = InfluenceMatrix::identity(2);
        let l = Landscape::new(m, vec![vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        let alloc = Allocation::contiguous(2, 2).unwrap();
        let mut rng = SeedKey::new(0).rng();
        let prev = DecisionVector::zeros(2);
        let c = individual_step(0, &l, &alloc, &prev, 1.0, &mut rng).unwrap();
        assert_eq!(c.flipped, None);
        assert_eq!(c.decisions, vec![false]);
        let prev: DecisionVector = "10".parse().unwrap();
        let c = individual_step(0, &l, &alloc, &prev, 1.0, &mut rng).unwrap();
        assert_eq!(c.flipped, Some(0));
        assert_eq!(c.decisions, vec![false]);
        // exact tie: agent 1 indifferent, keeps status quo
        let c = individual_step(1, &l, &alloc, &prev, 1.0, &mut rng).unwrap();
        assert_eq!(c.flipped, None);
    }

    #[test]
    fn alpha_one_never_lowers_own_performance() {
        let landscape = small_landscape(5, 8, 3);
        let alloc = Allocation::contiguous(8, 4).unwrap();
        let mut rng = SeedKey::new(6).rng();
        for _ in 0..500 {
            let prev = DecisionVector::random(8, &mut rng);
            let agent = rng.gen_range(0..4);
            let c = individual_step(agent, &landscape, &alloc, &prev, 1.0, &mut rng).unwrap();
            let mut per_agent = split_vector(&prev, &alloc);
            per_agent[agent] = c.decisions;
            let next = assemble_vector(&per_agent, &alloc).unwrap();
            let before = landscape
                .partial_performance(alloc.area(agent), &prev)
                .unwrap();
            let after = landscape
                .partial_performance(alloc.area(agent), &next)
                .unwrap();
            assert!(after >= before);
        }
    }

    #[test]
    fn pairing_zero_probability_is_empty() {
        let mut rng = SeedKey::new(1).rng();
        for _ in 0..50 {
            assert!(pair_agents(5, 0.0, &mut rng).unwrap().pairs.is_empty());
        }
        assert!(pair_agents(5, 1.5, &mut rng).is_err());
        assert!(pair_agents(1, 1.0, &mut rng).unwrap().pairs.is_empty());
    }

    #[test]
    fn pairing_full_probability_five_agents_leaves_one_single() {
        let mut rng = SeedKey::new(2).rng();
        for _ in 0..500 {
            let p = pair_agents(5, 1.0, &mut rng).unwrap();
            assert_eq!(p.pairs.len(), 2, "{p:?}");
        }
    }

    #[test]
    fn pairs_are_disjoint_ring_neighbours() {
        let mut rng = SeedKey::new(3).rng();
        for m in 2..9 {
            for &prob in &[0.1, 0.5, 0.9, 1.0] {
                for _ in 0..100 {
                    let p = pair_agents(m, prob, &mut rng).unwrap();
                    let mut seen = vec![false; m];
                    for &(a, b) in &p.pairs {
                        assert!(ring_adjacent(a, b, m));
                        assert!(!seen[a] && !seen[b]);
                        seen[a] = true;
                        seen[b] = true;
                    }
                }
            }
        }
    }

    #[test]
    fn adjacent_step_matches_three_tuple_scoring() {
        let landscape = small_landscape(33, 6, 2);
        let alloc = Allocation::contiguous(6, 3).unwrap();
        for trial in 0..300u64 {
            let mut rng = SeedKey::new(trial).rng();
            let prev = DecisionVector::random(6, &mut rng);
            let alpha = [0.25, 0.5, 0.75][trial as usize % 3];
            let pair = [(0, 1), (1, 2), (2, 0), (1, 0)][trial as usize % 4];
            let key = SeedKey::new(trial).child(9);
            let (a, b) =
                adjacent_step(pair, &landscape, &alloc, &prev, alpha, &mut key.rng()).unwrap();

            let mut replay = key.rng();
            let (pm, im) = propose_flip(alloc.area(pair.0), &prev, &mut replay).unwrap();
            let (pn, in_) = propose_flip(alloc.area(pair.1), &prev, &mut replay).unwrap();
            let u = |agent: usize, d: &DecisionVector| {
                let own: f64 = alloc
                    .area(agent)
                    .iter()
                    .map(|&j| landscape.contribution(j, d))
                    .sum::<f64>()
                    / 2.0;
                let res: f64 = alloc
                    .residual(agent)
                    .iter()
                    .map(|&j| landscape.contribution(j, d))
                    .sum::<f64>()
                    / 4.0;
                alpha * own + (1.0 - alpha) * res
            };
            let joint = |d: &DecisionVector| 0.5 * (u(pair.0, d) + u(pair.1, d));
            let scores = [joint(&prev), joint(&pm), joint(&pn)];
            let mut best = 0;
            for k in 1..3 {
                if scores[k] > scores[best] {
                    best = k;
                }
            }
            let (chosen, fa, fb) = match best {
                0 => (&prev, None, None),
                1 => (&pm, Some(im), None),
                _ => (&pn, None, Some(in_)),
            };
            assert_eq!(a.flipped, fa);
            assert_eq!(b.flipped, fb);
            let bits = |agent: usize| {
                alloc
                    .area(agent)
                    .iter()
                    .map(|&j| chosen.get(j))
                    .collect::<Vec<_>>()
            };
            assert_eq!(a.decisions, bits(pair.0));
            assert_eq!(b.decisions, bits(pair.1));
            assert!(a.flipped.is_none() || b.flipped.is_none());
        }
    }

    #[test]
    fn adjacent_step_retains_status_quo_when_both_proposals_hurt() {
        // each agent owns one decision; 0 is strictly better for both
        let m = InfluenceMatrix::identity(3);
        let l = Landscape::new(m, vec![vec![0.9, 0.1]; 3]).unwrap();
        let alloc = Allocation::contiguous(3, 3).unwrap();
        let prev = DecisionVector::zeros(3);
        let (a, b) =
            adjacent_step((0, 1), &l, &alloc, &prev, 0.5, &mut SeedKey::new(0).rng()).unwrap();
        assert_eq!((a.flipped, b.flipped), (None, None));
        assert!(adjacent_step((0, 0), &l, &alloc, &prev, 0.5, &mut SeedKey::new(0).rng()).is_err());
        let alloc4 = Allocation::contiguous(4, 4).unwrap();
        let l4 = Landscape::new(InfluenceMatrix::identity(4), vec![vec![0.9, 0.1]; 4]).unwrap();
        assert!(adjacent_step(
            (0, 2),
            &l4,
            &alloc4,
            &DecisionVector::zeros(4),
            0.5,
            &mut SeedKey::new(0).rng()
        )
        .is_err());
    }

    #[test]
    fn assemble_identity_and_permutations() {
        let d: DecisionVector = "101101".parse().unwrap();
        let single = Allocation::contiguous(6, 1).unwrap();
        assert_eq!(
            assemble_vector(&split_vector(&d, &single), &single).unwrap(),
            d
        );
        let alloc = Allocation::from_areas(6, vec![vec![5, 0], vec![3, 1], vec![4, 2]]).unwrap();
        let parts = split_vector(&d, &alloc);
        assert_eq!(assemble_vector(&parts, &alloc).unwrap(), d);
        // direct placement oracle
        let mut direct = vec![false; 6];
        for (m, area) in alloc.areas().iter().enumerate() {
            for (k, &i) in area.iter().enumerate() {
                direct[i] = parts[m][k];
            }
        }
        assert_eq!(DecisionVector::from_bits(direct), d);
        let mut short = parts.clone();
        short[0].pop();
        assert!(matches!(
            assemble_vector(&short, &alloc),
            Err(Error::Internal(_))
        ));
        assert!(assemble_vector(&parts[..2], &alloc).is_err());
    }
}
