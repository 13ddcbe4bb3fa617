//! Bootstrap percolation on finite regions: synchronous rounds, closures
//! and infection times.
//!
//! The production engine is generation-layered: when a site becomes
//! infected, only the translates `x = z - y` over rule sites `y` are
//! re-examined, and layers coincide with synchronous rounds. A naive
//! repeat-until-stable scan is kept as an independent reference.

use thiserror::Error;

use crate::config::Configuration;
use crate::family::UpdateFamily;
use crate::lattice::Vec2;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("the region does not contain the origin")]
    OriginOutsideRegion,
}

/// Does some rule fire at `x` given the current state? Rule translates that
/// leave a box/polygon region disable that rule at that site; on the torus
/// offsets wrap.
fn site_fires(cfg: &Configuration, fam: &UpdateFamily, x: Vec2) -> bool {
    fam.rules().iter().any(|rule| {
        rule.sites()
            .iter()
            .all(|&y| cfg.is_infected(x + y).unwrap_or(false))
    })
}

/// Runs at most `max_rounds` synchronous rounds (`None` for unlimited) and
/// reports the number executed before reaching a fixed point.
fn run_rounds(
    seed: &Configuration,
    fam: &UpdateFamily,
    max_rounds: Option<u64>,
) -> (Configuration, u64) {
    let mut cfg = seed.clone();
    let index = cfg.site_index().clone();
    let offsets = fam.candidate_offsets();

    let mut frontier: Vec<u32> = (0..index.len() as u32)
        .filter(|&i| cfg.is_infected_idx(i))
        .collect();
    let mut rounds = 0u64;
    let mut next: Vec<u32> = Vec::new();
    let mut pending: Vec<bool> = vec![false; index.len()];

    while !frontier.is_empty() {
        if let Some(cap) = max_rounds {
            if rounds >= cap {
                break;
            }
        }
        next.clear();
        for &zi in &frontier {
            let z = index.site(zi);
            for &off in &offsets {
                let x = z + off;
                let Some(xi) = index.index_of(x) else { continue };
                if cfg.is_infected_idx(xi) || pending[xi as usize] {
                    continue;
                }
                if site_fires(&cfg, fam, index.site(xi)) {
                    pending[xi as usize] = true;
                    next.push(xi);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        for &xi in &next {
            cfg.set_idx(xi, true);
            pending[xi as usize] = false;
        }
        std::mem::swap(&mut frontier, &mut next);
        rounds += 1;
    }
    (cfg, rounds)
}

/// Least fixed point of the restricted bootstrap map on the seed's region.
pub fn closure(seed: &Configuration, fam: &UpdateFamily) -> Configuration {
    run_rounds(seed, fam, None).0
}

/// State after exactly `t` synchronous rounds.
pub fn evolve_rounds(seed: &Configuration, fam: &UpdateFamily, t: u64) -> Configuration {
    run_rounds(seed, fam, Some(t)).0
}

/// Reference implementation: rescans every healthy site each round until
/// stable. Kept independent of the frontier engine for oracle checks.
pub fn closure_naive(seed: &Configuration, fam: &UpdateFamily) -> Configuration {
    let mut cfg = seed.clone();
    let index = cfg.site_index().clone();
    loop {
        let mut newly: Vec<u32> = Vec::new();
        for i in 0..index.len() as u32 {
            if cfg.is_infected_idx(i) {
                continue;
            }
            if site_fires(&cfg, fam, index.site(i)) {
                newly.push(i);
            }
        }
        if newly.is_empty() {
            return cfg;
        }
        for i in newly {
            cfg.set_idx(i, true);
        }
    }
}

/// Least `t` with the origin infected in the round-`t` state, or `None`
/// when the origin stays healthy in the closure.
pub fn bootstrap_tau0(omega: &Configuration, fam: &UpdateFamily) -> Result<Option<u64>, EngineError> {
    let index = omega.site_index().clone();
    let origin = index
        .index_of(Vec2::ZERO)
        .ok_or(EngineError::OriginOutsideRegion)?;
    if omega.is_infected_idx(origin) {
        return Ok(Some(0));
    }

    // layered run with early exit at the origin
    let mut cfg = omega.clone();
    let offsets = fam.candidate_offsets();
    let mut frontier: Vec<u32> = (0..index.len() as u32)
        .filter(|&i| cfg.is_infected_idx(i))
        .collect();
    let mut round = 0u64;
    let mut next: Vec<u32> = Vec::new();
    let mut pending: Vec<bool> = vec![false; index.len()];
    while !frontier.is_empty() {
        next.clear();
        for &zi in &frontier {
            let z = index.site(zi);
            for &off in &offsets {
                let x = z + off;
                let Some(xi) = index.index_of(x) else { continue };
                if cfg.is_infected_idx(xi) || pending[xi as usize] {
                    continue;
                }
                if site_fires(&cfg, fam, index.site(xi)) {
                    pending[xi as usize] = true;
                    next.push(xi);
                }
            }
        }
        if next.is_empty() {
            return Ok(None);
        }
        round += 1;
        for &xi in &next {
            cfg.set_idx(xi, true);
            pending[xi as usize] = false;
        }
        if cfg.is_infected_idx(origin) {
            return Ok(Some(round));
        }
        std::mem::swap(&mut frontier, &mut next);
    }
    Ok(None)
}
