//! The stochastic kinetically constrained model: exact continuous-time
//! Glauber dynamics with legal-update resampling.
//!
//! One simulation step draws an Exponential(N) waiting time, a uniform
//! site, and, when the constraint holds, resamples the site's state to
//! healthy with probability `1 - q`. Rejected rings advance time only.
//! Every draw comes from one counter-based stream, so a trace is a pure
//! function of the master seed.

use rayon::prelude::*;
use thiserror::Error;

use crate::config::Configuration;
use crate::family::UpdateFamily;
use crate::lattice::Vec2;
use crate::region::{Region, RegionError};
use crate::rng::CounterRng;

/// State of the lattice outside the simulated region.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Sites outside the region are healthy (can never help a constraint).
    #[default]
    AllHealthy,
    /// Sites outside the region are infected.
    AllInfected,
    /// Explicit frozen states; unlisted outside sites are healthy.
    Frozen(Vec<(Vec2, bool)>),
}

impl Boundary {
    fn infected_outside(&self, p: Vec2) -> bool {
        match self {
            Boundary::AllHealthy => false,
            Boundary::AllInfected => true,
            Boundary::Frozen(list) => list
                .iter()
                .find(|(s, _)| *s == p)
                .map(|(_, inf)| *inf)
                .unwrap_or(false),
        }
    }
}

/// How the update constraint is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConstraintKind {
    /// The family constraint: some rule translate fully infected.
    #[default]
    Family,
    /// Test hook: every update is legal (unconstrained Glauber dynamics).
    AlwaysLegal,
}

/// Simulation parameters.
#[derive(Clone, Debug)]
pub struct KcmParams {
    pub q: f64,
    pub region: Region,
    pub boundary: Boundary,
    pub t_max: f64,
    pub master_seed: u64,
    pub constraint: ConstraintKind,
}

impl KcmParams {
    pub fn new(q: f64, region: Region, t_max: f64, master_seed: u64) -> KcmParams {
        assert!(q > 0.0 && q < 1.0, "q must lie in (0,1)");
        assert!(t_max >= 0.0);
        KcmParams {
            q,
            region,
            boundary: Boundary::AllHealthy,
            t_max,
            master_seed,
            constraint: ConstraintKind::Family,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> KcmParams {
        self.boundary = boundary;
        self
    }

    pub fn with_constraint(mut self, constraint: ConstraintKind) -> KcmParams {
        self.constraint = constraint;
        self
    }
}

/// Initial condition of a run.
#[derive(Clone, Debug)]
pub enum Initial {
    /// Explicit configuration on the run's region.
    Config(Configuration),
    /// Draw from the equilibrium product measure (each site infected with
    /// probability `q`).
    Mu,
}

/// One legal update as seen by observers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateEvent {
    pub time: f64,
    pub site: Vec2,
    pub old_infected: bool,
    pub new_infected: bool,
}

#[derive(Error, Debug)]
pub enum KcmError {
    #[error("the region does not contain the origin")]
    OriginOutsideRegion,
    #[error("region: {0}")]
    Region(#[from] RegionError),
}

/// The update constraint `c_x`: 1 iff some rule has all of `x + U`
/// infected, with boundary semantics supplied by `boundary` (the torus
/// wraps through the region's own canonicalization).
pub fn constraint(
    x: Vec2,
    cfg: &Configuration,
    fam: &UpdateFamily,
    boundary: &Boundary,
) -> bool {
    fam.rules().iter().any(|rule| {
        rule.sites().iter().all(|&y| {
            let p = x + y;
            match cfg.is_infected(p) {
                Some(inf) => inf,
                None => boundary.infected_outside(p),
            }
        })
    })
}

/// Summary of a finished run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub final_config: Configuration,
    pub final_time: f64,
    pub ring_count: u64,
    pub legal_updates: u64,
}

/// Runs the KCM until `t_max`, invoking each observer on every legal
/// update. The trace is fully determined by the master seed.
pub fn run_kcm(
    params: &KcmParams,
    fam: &UpdateFamily,
    initial: Initial,
    observers: &mut [&mut dyn FnMut(&UpdateEvent)],
) -> Result<RunResult, KcmError> {
    run_kcm_until(params, fam, initial, observers, |_, _| false)
}

/// Like [`run_kcm`] but stops early when `stop(event, config)` returns true
/// after applying a legal update. The stopping event's time is exact.
pub fn run_kcm_until(
    params: &KcmParams,
    fam: &UpdateFamily,
    initial: Initial,
    observers: &mut [&mut dyn FnMut(&UpdateEvent)],
    mut stop: impl FnMut(&UpdateEvent, &Configuration) -> bool,
) -> Result<RunResult, KcmError> {
    let mut rng = CounterRng::new(params.master_seed, 0);
    let mut cfg = match initial {
        Initial::Config(c) => {
            debug_assert_eq!(c.region(), &params.region);
            c
        }
        Initial::Mu => {
            let mut c = Configuration::empty(params.region.clone())?;
            for i in 0..c.len() as u32 {
                if rng.next_bool(params.q) {
                    c.set_idx(i, true);
                }
            }
            c
        }
    };
    let n = cfg.len();
    assert!(n > 0, "empty region");
    let rate = n as f64;
    let index = cfg.site_index().clone();

    let mut time = 0.0f64;
    let mut rings = 0u64;
    let mut legal = 0u64;
    loop {
        let dt = rng.next_exp(rate);
        if time + dt > params.t_max {
            break;
        }
        time += dt;
        rings += 1;
        let site_idx = rng.next_index(n) as u32;
        let site = index.site(site_idx);
        let legal_now = match params.constraint {
            ConstraintKind::Family => constraint(site, &cfg, fam, &params.boundary),
            ConstraintKind::AlwaysLegal => true,
        };
        if !legal_now {
            continue;
        }
        // legal update: resample, healthy with probability 1 - q
        let new_infected = rng.next_bool(params.q);
        let old_infected = cfg.is_infected_idx(site_idx);
        cfg.set_idx(site_idx, new_infected);
        legal += 1;
        let event = UpdateEvent {
            time,
            site,
            old_infected,
            new_infected,
        };
        for obs in observers.iter_mut() {
            obs(&event);
        }
        if stop(&event, &cfg) {
            return Ok(RunResult {
                final_config: cfg,
                final_time: time,
                ring_count: rings,
                legal_updates: legal,
            });
        }
    }
    Ok(RunResult {
        final_config: cfg,
        final_time: params.t_max,
        ring_count: rings,
        legal_updates: legal,
    })
}

/// Outcome of an infection-time measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct KcmTauSample {
    pub seed: u64,
    pub q: f64,
    /// Exact infection time of the origin, or `None` when `t_max` elapsed
    /// first (the sample is truncated, which is data, not an error).
    pub tau: Option<f64>,
    pub t_max: f64,
    pub ring_count: u64,
}

/// Measures the equilibrium infection time of the origin: the initial
/// state is drawn from the product measure; `tau = 0` when the origin
/// starts infected, otherwise the first legal update writing an infected
/// origin decides.
pub fn sample_tau0_kcm(
    params: &KcmParams,
    fam: &UpdateFamily,
    seed: u64,
) -> Result<KcmTauSample, KcmError> {
    if !params.region.contains(Vec2::ZERO) {
        return Err(KcmError::OriginOutsideRegion);
    }
    let mut p = params.clone();
    p.master_seed = seed;
    // peek at the initial draw: the mu-draw consumes counters 0..n-1 in
    // site order, so the origin's state is one addressed value
    let origin_pos = {
        let idx = crate::region::SiteIndex::new(p.region.clone())?;
        idx.index_of(Vec2::ZERO).unwrap()
    };
    let probe = CounterRng::new(seed, 0);
    let origin_infected_at_start =
        (probe.value_at(origin_pos as u64) >> 11) as f64 * (1.0 / (1u64 << 53) as f64) < p.q;
    if origin_infected_at_start {
        return Ok(KcmTauSample {
            seed,
            q: p.q,
            tau: Some(0.0),
            t_max: p.t_max,
            ring_count: 0,
        });
    }
    let result = run_kcm_until(&p, fam, Initial::Mu, &mut [], |ev, _| {
        ev.site == Vec2::ZERO && ev.new_infected
    })?;
    let tau = if result.final_time < p.t_max {
        Some(result.final_time)
    } else {
        None
    };
    Ok(KcmTauSample {
        seed,
        q: p.q,
        tau,
        t_max: p.t_max,
        ring_count: result.ring_count,
    })
}

/// Samples `trials` equilibrium infection times in parallel with seeds
/// derived from the master seed, ordered by trial index.
pub fn sample_tau0_kcm_batch(
    params: &KcmParams,
    fam: &UpdateFamily,
    master_seed: u64,
    trials: u64,
) -> Result<Vec<KcmTauSample>, KcmError> {
    if !params.region.contains(Vec2::ZERO) {
        return Err(KcmError::OriginOutsideRegion);
    }
    let samples: Vec<KcmTauSample> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = crate::rng::mix64(master_seed ^ crate::rng::mix64(trial ^ 0x7a0_5eed));
            sample_tau0_kcm(params, fam, seed).expect("origin checked above")
        })
        .collect();
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::zoo;
    use crate::lattice::v2;

    #[test]
    fn unconstrained_marginals_match_bernoulli() {
        // constraint hook: after t = 25 every site has flipped many times;
        // the marginal of the centre site must match Bernoulli(q) within
        // 3 sigma over many trials
        let fam = zoo::two_neighbour();
        let q = 0.35;
        let trials = 4000;
        let mut infected = 0u32;
        for trial in 0..trials {
            let params = KcmParams::new(q, Region::Torus { w: 3, h: 3 }, 25.0, 1000 + trial)
                .with_constraint(ConstraintKind::AlwaysLegal);
            let r = run_kcm(
                &params,
                &fam,
                Initial::Config(Configuration::empty(params.region.clone()).unwrap()),
                &mut [],
            )
            .unwrap();
            if r.final_config.is_infected(v2(1, 1)).unwrap() {
                infected += 1;
            }
        }
        let p_hat = infected as f64 / trials as f64;
        let sigma = (q * (1.0 - q) / trials as f64).sqrt();
        assert!(
            (p_hat - q).abs() < 3.0 * sigma,
            "p_hat {p_hat} vs q {q} (sigma {sigma})"
        );
    }

    #[test]
    fn traces_are_deterministic() {
        let fam = zoo::two_neighbour();
        let run = |seed| {
            let params = KcmParams::new(0.4, Region::Torus { w: 8, h: 8 }, 5.0, seed);
            let mut events = Vec::new();
            let mut rec = |e: &UpdateEvent| events.push(*e);
            let r = run_kcm(&params, &fam, Initial::Mu, &mut [&mut rec]).unwrap();
            (events, r.ring_count, r.final_config)
        };
        let (e1, r1, c1) = run(99);
        let (e2, r2, c2) = run(99);
        assert_eq!(e1, e2);
        assert_eq!(r1, r2);
        assert_eq!(c1, c2);
        let (e3, ..) = run(100);
        assert_ne!(e1, e3);
    }

    #[test]
    fn stationarity_of_mu_at_small_scale() {
        // density of infected sites at t_max stays within 3 sigma of q
        let fam = zoo::two_neighbour();
        let q = 0.4;
        let trials = 60u64;
        let mut total_sites = 0usize;
        let mut total_infected = 0usize;
        for trial in 0..trials {
            let params = KcmParams::new(q, Region::Torus { w: 16, h: 16 }, 8.0, 500 + trial);
            let r = run_kcm(&params, &fam, Initial::Mu, &mut []).unwrap();
            total_sites += r.final_config.len();
            total_infected += r.final_config.infected_count();
        }
        let p_hat = total_infected as f64 / total_sites as f64;
        let sigma = (q * (1.0 - q) / total_sites as f64).sqrt();
        assert!(
            (p_hat - q).abs() < 3.5 * sigma,
            "density {p_hat} vs q {q} (sigma {sigma})"
        );
    }

    #[test]
    fn trace_events_are_legal_on_pre_update_state() {
        let fam = zoo::two_neighbour();
        let params = KcmParams::new(0.45, Region::Torus { w: 6, h: 6 }, 10.0, 7);
        // replay: reconstruct the initial mu-draw from the same stream,
        // then audit every event against the pre-update state
        let mut replay = {
            let mut rng = CounterRng::new(params.master_seed, 0);
            let mut c = Configuration::empty(params.region.clone()).unwrap();
            for i in 0..c.len() as u32 {
                if rng.next_bool(params.q) {
                    c.set_idx(i, true);
                }
            }
            c
        };
        let mut audit_failures = 0u32;
        {
            let mut audit = |e: &UpdateEvent| {
                if !constraint(e.site, &replay, &fam, &Boundary::AllHealthy) {
                    audit_failures += 1;
                }
                if replay.is_infected(e.site).unwrap() != e.old_infected {
                    audit_failures += 1;
                }
                replay.set(e.site, e.new_infected);
            };
            let _ = run_kcm(&params, &fam, Initial::Mu, &mut [&mut audit]).unwrap();
        }
        assert_eq!(audit_failures, 0);
    }

    #[test]
    fn tau0_zero_frequency_matches_q() {
        let fam = zoo::two_neighbour();
        let params = KcmParams::new(0.3, Region::Torus { w: 8, h: 8 }, 1.0, 0);
        let samples = sample_tau0_kcm_batch(&params, &fam, 321, 600).unwrap();
        let zeros = samples
            .iter()
            .filter(|s| s.tau == Some(0.0))
            .count() as f64;
        let p_hat = zeros / samples.len() as f64;
        let sigma = (0.3f64 * 0.7 / samples.len() as f64).sqrt();
        assert!(
            (p_hat - 0.3).abs() < 4.0 * sigma,
            "zero-tau frequency {p_hat}"
        );
    }

    #[test]
    fn tau0_is_exact_event_time() {
        let fam = zoo::two_neighbour();
        let params = KcmParams::new(0.4, Region::Torus { w: 8, h: 8 }, 50.0, 0);
        for seed in 0..40 {
            let s = sample_tau0_kcm(&params, &fam, seed).unwrap();
            if let Some(tau) = s.tau {
                assert!(tau <= params.t_max);
                assert!(tau >= 0.0);
            }
        }
    }

    #[test]
    fn boundary_conditions_feed_constraints() {
        // single east rule: the rightmost site of a 1x1 box is legal only
        // with an infected east boundary
        let fam = zoo::east_one();
        let region = Region::Box { x0: 0, y0: 0, w: 1, h: 1 };
        let cfg = Configuration::empty(region).unwrap();
        assert!(!constraint(v2(0, 0), &cfg, &fam, &Boundary::AllHealthy));
        assert!(constraint(v2(0, 0), &cfg, &fam, &Boundary::AllInfected));
        assert!(constraint(
            v2(0, 0),
            &cfg,
            &fam,
            &Boundary::Frozen(vec![(v2(1, 0), true)])
        ));
        assert!(!constraint(
            v2(0, 0),
            &cfg,
            &fam,
            &Boundary::Frozen(vec![(v2(1, 0), false)])
        ));
    }

    #[test]
    fn constraint_spec_cases() {
        let fam = zoo::east_heavy();
        let region = Region::Box { x0: -3, y0: -3, w: 7, h: 7 };
        let cfg = Configuration::from_infected(
            region.clone(),
            [v2(-1, 0), v2(-2, 0), v2(0, -1)],
        )
        .unwrap();
        assert!(constraint(v2(0, 0), &cfg, &fam, &Boundary::AllHealthy));
        let empty = Configuration::empty(region).unwrap();
        for p in [v2(0, 0), v2(1, 1), v2(-2, 2)] {
            assert!(!constraint(p, &empty, &fam, &Boundary::AllHealthy));
        }
    }
}
