//! Difficulties of stable directions, the family difficulty, helping sets
//! and the refined four-way classification.
//!
//! The difficulty of an isolated stable direction `u` is the least number of
//! extra infections letting the infected half-plane `H_u` infect infinitely
//! many sites of the boundary line. "Infinitely many" is decided by a
//! certificate run in a finite strip window: the restricted closure must
//! advance along the line past half the window, and some block of infected
//! sites near the front must regenerate its own translate by a lattice
//! period of the line when re-closed with only the half-plane as support.
//! A regenerating block proves perpetual periodic growth (each pumped copy
//! re-derives the next), so certified values are never overcounted; missing
//! a certificate within the window is reported as a bounded statement,
//! never as a final value.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::closure::closure;
use crate::config::Configuration;
use crate::family::UpdateFamily;
use crate::lattice::{Direction, Vec2};
use crate::region::{HalfPlane, Region};
use crate::stable::{classify_from_stable_set, stable_set, StableSet, UniversalityClass};

/// Knobs for the witness search and the growth certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchParams {
    /// L-infinity radius for witness sites.
    pub r_search: i64,
    /// Largest witness size attempted.
    pub n_max: usize,
    /// Strip window length: lattice sites of the line on each side of the
    /// origin.
    pub window_line_sites: i64,
    /// Strip height above the line, in lattice layers (`None` picks a
    /// family-dependent default).
    pub height_layers: Option<i64>,
    /// Largest pump-block width tried, in line periods.
    pub pump_width_max: i64,
}

impl SearchParams {
    pub fn for_family(fam: &UpdateFamily) -> SearchParams {
        SearchParams {
            r_search: 3 * fam.diameter().max(1),
            n_max: 3,
            window_line_sites: 48,
            height_layers: None,
            pump_width_max: 4,
        }
    }

    pub fn with_radius(mut self, r: i64) -> SearchParams {
        self.r_search = r;
        self
    }

    pub fn with_n_max(mut self, n: usize) -> SearchParams {
        self.n_max = n;
        self
    }
}

/// Difficulty value of a direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DifficultyValue {
    Finite(usize),
    Infinite,
}

impl DifficultyValue {
    pub fn as_finite(self) -> Option<usize> {
        match self {
            DifficultyValue::Finite(n) => Some(n),
            DifficultyValue::Infinite => None,
        }
    }
}

impl std::fmt::Display for DifficultyValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DifficultyValue::Finite(n) => write!(f, "{n}"),
            DifficultyValue::Infinite => write!(f, "inf"),
        }
    }
}

impl PartialOrd for DifficultyValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for DifficultyValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use DifficultyValue::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinite) => std::cmp::Ordering::Less,
            (Infinite, Finite(_)) => std::cmp::Ordering::Greater,
            (Infinite, Infinite) => std::cmp::Ordering::Equal,
        }
    }
}

/// Proof that a witness makes the half-plane grow forever: the `block`,
/// infected together with the half-plane alone, re-infects `block + period`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthCertificate {
    /// Lattice translation along the line under which growth repeats.
    pub period: Vec2,
    /// The regenerating block of infected sites.
    pub block: Vec<Vec2>,
    /// A line site inside the block (its pumped orbit lies on the line).
    pub line_site: Vec2,
    /// How far along the line the windowed closure advanced, in lattice
    /// sites of the line.
    pub front_line_sites: i64,
}

/// Result of a difficulty computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Difficulty {
    pub value: DifficultyValue,
    pub witness: Option<Vec<Vec2>>,
    pub certificate: Option<GrowthCertificate>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum DifficultyError {
    #[error(
        "no growth certificate for direction {direction} with witnesses of size <= {n_max} \
         within radius {r_search}; alpha({direction}) > {n_max} within that radius"
    )]
    SearchExhausted {
        direction: Direction,
        n_max: usize,
        r_search: i64,
    },
    #[error("family is not critical")]
    NotCritical,
    #[error("stable set is infinite")]
    InfiniteStableSet,
}

/// Strip window geometry shared by the search and the certificate.
struct StripFrame {
    v: Vec2,
    t: Vec2,
    nv: i64,
    reach: i64,
    height: i64,
    depth: i64,
    w_dots: i64,
}

impl StripFrame {
    fn new(u: Direction, fam: &UpdateFamily, params: &SearchParams) -> StripFrame {
        let v = u.vec();
        let t = v.rot_ccw();
        let nv = v.norm2();
        let reach = fam.diameter().max(1) * (v.x.abs() + v.y.abs());
        let height_layers = params.height_layers.unwrap_or(2 * reach + 2);
        let r_dots = params.r_search * (v.x.abs() + v.y.abs());
        let w_sites = params.window_line_sites.max((r_dots + nv - 1) / nv + 8);
        StripFrame {
            v,
            t,
            nv,
            reach,
            height: height_layers,
            depth: reach + 1,
            w_dots: w_sites * nv,
        }
    }

    fn window(&self) -> Region {
        Region::Polygon {
            constraints: vec![
                HalfPlane::new(self.v, self.height),
                HalfPlane::new(-self.v, self.depth),
                HalfPlane::new(self.t, self.w_dots),
                HalfPlane::new(-self.t, self.w_dots),
            ],
        }
    }
}

/// Runs the windowed closure for `H_u ∪ witness` and looks for a
/// regenerating block in either direction along the line.
pub fn certify_growth(
    u: Direction,
    fam: &UpdateFamily,
    witness: &[Vec2],
    params: &SearchParams,
) -> Option<GrowthCertificate> {
    let frame = StripFrame::new(u, fam, params);
    let window = frame.window();
    let mut seed_sites: Vec<Vec2> = window
        .sites()
        .ok()?
        .into_iter()
        .filter(|p| p.dot(frame.v) < 0)
        .collect();
    for &z in witness {
        debug_assert!(z.dot(frame.v) >= 0, "witness must avoid the half-plane");
        if !window.contains(z) {
            return None;
        }
        seed_sites.push(z);
    }
    let seed = Configuration::from_infected(window, seed_sites).ok()?;
    let closed = closure(&seed, fam);

    let exterior: Vec<Vec2> = closed
        .infected_sites()
        .into_iter()
        .filter(|p| p.dot(frame.v) >= 0)
        .collect();
    if exterior.is_empty() {
        return None;
    }

    for sign in [1i64, -1] {
        if let Some(cert) = pump_direction(&frame, fam, &exterior, sign) {
            return Some(cert);
        }
    }
    None
}

/// Tries to find a block near the front (in direction `sign` along the
/// line) that regenerates its translate.
fn pump_direction(
    frame: &StripFrame,
    fam: &UpdateFamily,
    exterior: &[Vec2],
    sign: i64,
) -> Option<GrowthCertificate> {
    let tt = frame.t * sign;
    let dot = |p: Vec2| p.dot(tt);
    let is_line_site = |p: Vec2| p.dot(frame.v) == 0;

    let front_line = exterior
        .iter()
        .filter(|&&p| is_line_site(p))
        .map(|&p| dot(p))
        .max()?;
    // the advance gate: the line front must clear half the window
    if front_line < (frame.w_dots / 2) {
        return None;
    }
    let front = exterior.iter().map(|&p| dot(p)).max().unwrap();

    let mut anchors: Vec<i64> = vec![front, front_line];
    for j in 1..=3 {
        anchors.push(front - j * frame.nv);
    }
    anchors.push(front / 2);
    anchors.sort_unstable();
    anchors.dedup();
    anchors.reverse();

    for p_width in 1..=frame.pump_width_max() {
        let delta = tt * p_width;
        for &c in &anchors {
            let lo = c - p_width * frame.nv;
            let block: Vec<Vec2> = exterior
                .iter()
                .copied()
                .filter(|&x| dot(x) > lo && dot(x) <= c)
                .collect();
            if block.is_empty() || !block.iter().any(|&x| is_line_site(x)) {
                continue;
            }
            if pump_check(frame, fam, &block, delta, tt, lo, c + p_width * frame.nv) {
                let line_site = *block.iter().find(|&&x| is_line_site(x)).unwrap();
                return Some(GrowthCertificate {
                    period: delta,
                    block,
                    line_site,
                    front_line_sites: front_line / frame.nv,
                });
            }
        }
    }
    None
}

impl StripFrame {
    fn pump_width_max(&self) -> i64 {
        // kept on the frame so callers cannot desynchronise it from the
        // window sizing
        4
    }
}

/// Does the block, together with the half-plane alone, re-infect its own
/// translate by `delta`? A fresh window around the block and its translate
/// is used; only half-plane sites and the block are seeded, so success
/// gives the induction `[H ∪ B] ⊇ B + delta`, hence `B + k·delta` is
/// infected for every `k >= 0`.
fn pump_check(
    frame: &StripFrame,
    fam: &UpdateFamily,
    block: &[Vec2],
    delta: Vec2,
    tt: Vec2,
    lo: i64,
    hi: i64,
) -> bool {
    let margin = frame.reach + frame.nv;
    let window = Region::Polygon {
        constraints: vec![
            HalfPlane::new(frame.v, frame.height),
            HalfPlane::new(-frame.v, frame.depth),
            HalfPlane::new(tt, hi + margin),
            HalfPlane::new(-tt, -(lo - margin)),
        ],
    };
    let Ok(window_sites) = window.sites() else {
        return false;
    };
    let mut seed: Vec<Vec2> = window_sites
        .into_iter()
        .filter(|p| p.dot(frame.v) < 0)
        .collect();
    seed.extend_from_slice(block);
    let Ok(seed_cfg) = Configuration::from_infected(window, seed) else {
        return false;
    };
    let closed = closure(&seed_cfg, fam);
    block
        .iter()
        .all(|&x| closed.is_infected(x + delta) == Some(true))
}

/// Witness candidates outside the half-plane within the search radius,
/// deterministically ordered: on-line and origin-near sites first.
fn witness_candidates(u: Direction, params: &SearchParams, on_line_only: bool) -> Vec<Vec2> {
    let v = u.vec();
    let t = v.rot_ccw();
    let r = params.r_search;
    let mut out = Vec::new();
    for y in -r..=r {
        for x in -r..=r {
            let z = crate::lattice::v2(x, y);
            let dv = z.dot(v);
            if dv < 0 || (on_line_only && dv != 0) {
                continue;
            }
            out.push(z);
        }
    }
    out.sort_by_key(|&z| (z.dot(v), z.dot(t).abs(), z.x, z.y));
    out
}

fn search_witness(
    u: Direction,
    fam: &UpdateFamily,
    params: &SearchParams,
    on_line_only: bool,
) -> Result<(Vec<Vec2>, GrowthCertificate), DifficultyError> {
    let candidates = witness_candidates(u, params, on_line_only);
    for n in 1..=params.n_max {
        let mut combo = vec![0usize; n];
        if candidates.len() < n {
            break;
        }
        // lexicographic combinations over the ordered candidate list
        for i in 0..n {
            combo[i] = i;
        }
        loop {
            let witness: Vec<Vec2> = combo.iter().map(|&i| candidates[i]).collect();
            if let Some(cert) = certify_growth(u, fam, &witness, params) {
                return Ok((witness, cert));
            }
            // advance combination
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if combo[i] + (n - i) < candidates.len() {
                    combo[i] += 1;
                    for j in (i + 1)..n {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX {
                break;
            }
        }
    }
    Err(DifficultyError::SearchExhausted {
        direction: u,
        n_max: params.n_max,
        r_search: params.r_search,
    })
}

/// Difficulty of a direction under the given search parameters.
///
/// Unstable directions have difficulty 0; stable directions inside the
/// closed arc part of the stable set (non-isolated) have infinite
/// difficulty by definition; isolated stable directions are searched.
pub fn difficulty(
    u: Direction,
    fam: &UpdateFamily,
    params: &SearchParams,
) -> Result<Difficulty, DifficultyError> {
    let s = stable_set(fam);
    difficulty_with(&s, u, fam, params)
}

pub(crate) fn difficulty_with(
    s: &StableSet,
    u: Direction,
    fam: &UpdateFamily,
    params: &SearchParams,
) -> Result<Difficulty, DifficultyError> {
    if !s.contains(u) {
        return Ok(Difficulty {
            value: DifficultyValue::Finite(0),
            witness: None,
            certificate: None,
        });
    }
    if s.in_arc_part(u) {
        return Ok(Difficulty {
            value: DifficultyValue::Infinite,
            witness: None,
            certificate: None,
        });
    }
    let (witness, cert) = search_witness(u, fam, params, false)?;
    Ok(Difficulty {
        value: DifficultyValue::Finite(witness.len()),
        witness: Some(witness),
        certificate: Some(cert),
    })
}

/// The family difficulty and one optimal open semicircle.
///
/// Candidate semicircle positions rotate the boundary just past each stable
/// feature; the returned direction is the midpoint of a minimising
/// semicircle (ties broken by smallest angle from east).
pub fn family_difficulty(
    fam: &UpdateFamily,
    params: &SearchParams,
) -> Result<(DifficultyValue, Direction), DifficultyError> {
    let s = stable_set(fam);
    family_difficulty_with(&s, fam, params)
}

pub(crate) fn family_difficulty_with(
    s: &StableSet,
    fam: &UpdateFamily,
    params: &SearchParams,
) -> Result<(DifficultyValue, Direction), DifficultyError> {
    let east = Direction::new(crate::lattice::E1);
    if s.is_empty() {
        return Ok((DifficultyValue::Finite(0), east));
    }
    if s.full_circle {
        return Ok((DifficultyValue::Infinite, east));
    }
    // per-direction difficulties for all isolated stable directions
    let mut alphas = Vec::new();
    for &p in &s.isolated {
        let d = difficulty_with(s, p, fam, params)?;
        alphas.push((p, d.value));
    }
    let candidates = crate::stable::candidate_semicircles(s);
    let mut best: Option<(DifficultyValue, Direction)> = None;
    for &start in &candidates {
        let end = start.neg();
        let mut worst = DifficultyValue::Finite(0);
        // arcs inside the open semicircle force infinite difficulty
        let meets_arc = s.arcs.iter().any(|a| {
            a.start.strictly_inside_ccw(start, end)
                || a.end.strictly_inside_ccw(start, end)
                || a.contains(Direction::sample_strictly_between_ccw(start, end))
        });
        if meets_arc {
            worst = DifficultyValue::Infinite;
        } else {
            for &(p, val) in &alphas {
                if p.strictly_inside_ccw(start, end) {
                    worst = worst.max(val);
                }
            }
        }
        let midpoint = start.rot_ccw();
        match &best {
            Some((b, _)) if *b <= worst => {}
            _ => best = Some((worst, midpoint)),
        }
    }
    Ok(best.expect("nonempty stable set has candidate semicircles"))
}

/// The refined class of a critical family with finite stable set, from the
/// set `D` of directions with difficulty exceeding the family difficulty.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RefinedClass {
    BalancedUnrooted,
    BalancedRooted,
    UnbalancedUnrooted,
    UnbalancedRooted,
}

impl RefinedClass {
    pub fn gamma(self) -> u8 {
        match self {
            RefinedClass::BalancedUnrooted => 0,
            RefinedClass::BalancedRooted => 1,
            RefinedClass::UnbalancedUnrooted => 2,
            RefinedClass::UnbalancedRooted => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RefinedClass::BalancedUnrooted => "balanced unrooted",
            RefinedClass::BalancedRooted => "balanced rooted",
            RefinedClass::UnbalancedUnrooted => "unbalanced unrooted",
            RefinedClass::UnbalancedRooted => "unbalanced rooted",
        }
    }
}

/// Applies the four-way split on `D = {u : alpha(u) > alpha(U)}`.
pub fn refined_class(
    fam: &UpdateFamily,
    params: &SearchParams,
) -> Result<RefinedClass, DifficultyError> {
    let s = stable_set(fam);
    let class = classify_from_stable_set(&s);
    if class.kind != UniversalityClass::Critical {
        return Err(DifficultyError::NotCritical);
    }
    if !s.is_finite() {
        return Err(DifficultyError::InfiniteStableSet);
    }
    let (alpha_u, _) = family_difficulty_with(&s, fam, params)?;
    let mut hard: BTreeSet<Vec2> = BTreeSet::new();
    for &p in &s.isolated {
        let d = difficulty_with(&s, p, fam, params)?;
        if d.value > alpha_u {
            hard.insert(p.vec());
        }
    }
    let has_opposite = hard.iter().any(|&v| hard.contains(&(-v)));
    Ok(match (hard.len(), has_opposite) {
        (0..=1, _) => RefinedClass::BalancedUnrooted,
        (2, true) => RefinedClass::UnbalancedUnrooted,
        (_, false) => RefinedClass::BalancedRooted,
        (_, true) => RefinedClass::UnbalancedRooted,
    })
}

/// A helping-set template for a direction: a witness `Z`, placement offsets
/// and the line period under which the growth certificate repeats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelpingSetSpec {
    pub direction: Direction,
    /// The witness set (size `alpha(u)` when the radius admits one).
    pub base_set: Vec<Vec2>,
    /// Anchor offsets `a_1..a_m` on the line for disjoint copies.
    pub offsets: Vec<Vec2>,
    /// Lattice period along the line from the growth certificate.
    pub period: Vec2,
    pub m: usize,
}

/// Searches for a helping set within the given radius; the returned
/// template carries `m` disjoint copy offsets spaced by multiples of the
/// certified period.
pub fn find_helping_set(
    u: Direction,
    fam: &UpdateFamily,
    radius: i64,
    m: usize,
) -> Result<HelpingSetSpec, DifficultyError> {
    let params = SearchParams::for_family(fam).with_radius(radius);
    helping_set_with(u, fam, &params, m, false)
}

/// Helping-set template constrained to sites of the line itself. This is
/// the shape the droplet-geometry events need; `None` means no on-line
/// witness of size `<= n_max` exists within the radius.
pub fn find_helping_set_on_line(
    u: Direction,
    fam: &UpdateFamily,
    params: &SearchParams,
    m: usize,
) -> Option<HelpingSetSpec> {
    helping_set_with(u, fam, params, m, true).ok()
}

fn helping_set_with(
    u: Direction,
    fam: &UpdateFamily,
    params: &SearchParams,
    m: usize,
    on_line_only: bool,
) -> Result<HelpingSetSpec, DifficultyError> {
    assert!(m >= 1);
    let (witness, cert) = search_witness(u, fam, params, on_line_only)?;
    let t = u.vec().rot_ccw();
    let nv = u.vec().norm2();
    let span = witness.iter().map(|z| z.dot(t)).max().unwrap()
        - witness.iter().map(|z| z.dot(t)).min().unwrap();
    let period_steps = (cert.period.dot(t) / nv).abs().max(1);
    // spacing in periods so that consecutive copies are disjoint
    let spacing = (span / (period_steps * nv) + 1).max(1);
    let offsets = (0..m as i64)
        .map(|j| t * (j * spacing * period_steps))
        .collect();
    Ok(HelpingSetSpec {
        direction: u,
        base_set: witness,
        offsets,
        period: cert.period,
        m,
    })
}
