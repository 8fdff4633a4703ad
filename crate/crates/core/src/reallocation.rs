//! Periodic bottom-up task re-allocation.
//!
//! Each agent offers the task it believes is least entangled with the rest of
//! its area, at a threshold equal to that belief. Agents with spare capacity
//! bid their mean belief that the task interacts with their own decisions.
//! Offers resolve one at a time in random order; a task moves when the best
//! bidder that still has capacity bids at least the threshold.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::Allocation;
use crate::beliefs::BeliefState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offer {
    pub seller: usize,
    pub task: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signal {
    pub bidder: usize,
    pub task: usize,
    pub value: f64,
}

/// One executed transfer. `rank` is the winner's position among all signals
/// for the task (0 = highest); it is non-zero only when higher bidders had
/// filled their capacity by resolution time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub period: u32,
    pub task: usize,
    pub seller: usize,
    pub buyer: usize,
    pub threshold: f64,
    pub signal: f64,
    pub rank: usize,
}

fn mean(values: impl Iterator<Item = f64>, count: usize) -> f64 {
    values.sum::<f64>() / count as f64
}

/// The owned task with the lowest mean belief about the agent's other tasks.
///
/// Agents with at most one task make no offer. Ties are broken uniformly.
pub fn compute_offer<R: Rng + ?Sized>(
    agent: usize,
    owned: &[usize],
    beliefs: &BeliefState,
    rng: &mut R,
) -> Option<Offer> {
    if owned.len() <= 1 {
        return None;
    }
    let means: Vec<f64> = owned
        .iter()
        .map(|&i| {
            mean(
                owned
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| beliefs.belief_unchecked(i, j)),
                owned.len() - 1,
            )
        })
        .collect();
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    let tied: Vec<usize> = (0..owned.len()).filter(|&k| means[k] == min).collect();
    let &k = tied.choose(rng).expect("at least one minimum");
    Some(Offer {
        seller: agent,
        task: owned[k],
        threshold: min,
    })
}

/// Mean belief of `agent` that `task` interacts with each of its owned decisions,
/// or `None` when the agent is at capacity.
pub fn compute_signal(
    agent: usize,
    task: usize,
    owned: &[usize],
    beliefs: &BeliefState,
    capacity: usize,
) -> Result<Option<Signal>> {
    if owned.contains(&task) {
        return Err(Error::Domain(format!(
            "agent {agent} cannot bid on its own task {task}"
        )));
    }
    if owned.is_empty() || owned.len() >= capacity {
        return Ok(None);
    }
    Ok(Some(Signal {
        bidder: agent,
        task,
        value: mean(
            owned.iter().map(|&j| beliefs.belief_unchecked(task, j)),
            owned.len(),
        ),
    }))
}

/// Offers of every agent, from the period-start allocation.
pub fn collect_offers<R: Rng + ?Sized>(
    alloc: &Allocation,
    beliefs: &[BeliefState],
    rng: &mut R,
) -> Vec<Offer> {
    (0..alloc.n_agents())
        .filter_map(|m| compute_offer(m, alloc.area(m), &beliefs[m], rng))
        .collect()
}

/// Signals from every non-seller below capacity, for every offer.
pub fn collect_signals(
    offers: &[Offer],
    alloc: &Allocation,
    beliefs: &[BeliefState],
    capacities: &[usize],
) -> Result<Vec<Signal>> {
    let mut signals = Vec::new();
    for offer in offers {
        for r in (0..alloc.n_agents()).filter(|&r| r != offer.seller) {
            if let Some(s) =
                compute_signal(r, offer.task, alloc.area(r), &beliefs[r], capacities[r])?
            {
                signals.push(s);
            }
        }
    }
    Ok(signals)
}

/// Resolves offers sequentially in uniformly random order.
///
/// For each offer the bidders are ranked by signal (ties uniform). The best
/// bidder still below capacity wins if its signal is at least the threshold.
pub fn resolve_offers<R: Rng + ?Sized>(
    offers: &[Offer],
    signals: &[Signal],
    alloc: &Allocation,
    capacities: &[usize],
    period: u32,
    rng: &mut R,
) -> Result<(Allocation, Vec<Transfer>)> {
    let mut next = alloc.clone();
    let mut log = Vec::new();
    let mut order: Vec<&Offer> = offers.iter().collect();
    order.shuffle(rng);
    for offer in order {
        if next.owner(offer.task) != offer.seller {
            return Err(Error::Internal(format!(
                "offered task {} is not owned by seller {}",
                offer.task, offer.seller
            )));
        }
        let mut bids: Vec<&Signal> = signals.iter().filter(|s| s.task == offer.task).collect();
        bids.shuffle(rng);
        bids.sort_by(|a, b| b.value.total_cmp(&a.value));
        let winner = bids
            .iter()
            .enumerate()
            .find(|(_, s)| next.area(s.bidder).len() < capacities[s.bidder]);
        if let Some((rank, bid)) = winner {
            if bid.value >= offer.threshold {
                next.transfer(offer.task, offer.seller, bid.bidder)?;
                log.push(Transfer {
                    period,
                    task: offer.task,
                    seller: offer.seller,
                    buyer: bid.bidder,
                    threshold: offer.threshold,
                    signal: bid.value,
                    rank,
                });
            }
        }
    }
    Ok((next, log))
}

/// Full re-allocation round: offers, signals and resolution from one allocation snapshot.
pub fn reallocate<R: Rng + ?Sized>(
    alloc: &Allocation,
    beliefs: &[BeliefState],
    capacities: &[usize],
    period: u32,
    rng: &mut R,
) -> Result<(Allocation, Vec<Transfer>)> {
    let offers = collect_offers(alloc, beliefs, rng);
    let signals = collect_signals(&offers, alloc, beliefs, capacities)?;
    resolve_offers(&offers, &signals, alloc, capacities, period, rng)
}
