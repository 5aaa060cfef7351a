//! Trial execution.
//!
//! Agents never communicate once the search starts, so each agent's
//! trajectory is simulated on its own and the trial's hitting time is the
//! minimum over agents. Within a trajectory the first visit to the target is
//! found per segment in constant time instead of by stepping.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Point, MAX_RADIUS};
use crate::protocols::{Advice, AgentCount, AgentProgram, AgentState, Oracle, OracleSpec, Segment};
use crate::rng::{stream, Purpose};

/// Where the adversary puts the treasure, at Manhattan distance `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Placement {
    #[serde(rename = "axis-e")]
    AxisE,
    #[serde(rename = "axis-n")]
    AxisN,
    /// `(⌈D/2⌉, ⌊D/2⌋)`.
    #[serde(rename = "diagonal")]
    Diagonal,
    /// Uniform over the `4D` nodes at distance `D`, drawn per trial.
    #[serde(rename = "random-angle")]
    RandomAngle,
    /// The four axis points and four near-diagonal points at distance `D`,
    /// all searched by the same agents; the trial reports the slowest.
    #[serde(rename = "worst-of-set")]
    WorstOfSet,
}

impl Placement {
    pub const ALL: [Placement; 5] =
        [Placement::AxisE, Placement::AxisN, Placement::Diagonal, Placement::RandomAngle, Placement::WorstOfSet];

    pub fn name(self) -> &'static str {
        match self {
            Placement::AxisE => "axis-e",
            Placement::AxisN => "axis-n",
            Placement::Diagonal => "diagonal",
            Placement::RandomAngle => "random-angle",
            Placement::WorstOfSet => "worst-of-set",
        }
    }

    /// Treasure candidates for one trial.
    pub fn targets<R: Rng + ?Sized>(self, d: u64, rng: &mut R) -> Vec<Point> {
        let di = d as i64;
        let (hi, lo) = (di - di / 2, di / 2);
        match self {
            Placement::AxisE => vec![Point::new(di, 0)],
            Placement::AxisN => vec![Point::new(0, di)],
            Placement::Diagonal => vec![Point::new(hi, lo)],
            Placement::RandomAngle if d == 0 => vec![Point::ORIGIN],
            Placement::RandomAngle => vec![grid::sphere_point(Point::ORIGIN, d, rng.gen_range(0..4 * d))],
            Placement::WorstOfSet => vec![
                Point::new(di, 0),
                Point::new(0, di),
                Point::new(-di, 0),
                Point::new(0, -di),
                Point::new(hi, lo),
                Point::new(-lo, hi),
                Point::new(-hi, -lo),
                Point::new(lo, -hi),
            ],
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Placement::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown placement {s:?}")))
    }
}

/// Default per-agent time budget: `64 · max(1, log₂ k) · (D + D²/k)`.
pub fn default_cap(k: u64, d: u64) -> u64 {
    let phi = (k as f64).log2().max(1.0);
    let base = d as f64 + (d as f64).powi(2) / k as f64;
    (64.0 * phi * base).ceil() as u64
}

/// Everything needed to run one trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub k: u64,
    pub d: u64,
    pub placement: Placement,
    /// Time budget per agent; hits after `cap` do not count.
    pub cap: u64,
    pub master_seed: u64,
    pub program: AgentProgram,
    pub oracle: OracleSpec,
    /// Keep every agent's own first-hit time in the outcome. Disables the
    /// early cut-off that skips agents which cannot beat the current best.
    #[serde(default)]
    pub record_per_agent: bool,
}

impl TrialConfig {
    /// A config with the program's default oracle, axis placement and the
    /// default cap.
    pub fn new(program: AgentProgram, k: u64, d: u64, master_seed: u64) -> Self {
        TrialConfig {
            k,
            d,
            placement: Placement::AxisE,
            cap: default_cap(k, d),
            master_seed,
            program,
            oracle: program.default_oracle(),
            record_per_agent: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.d == 0 {
            return Err(Error::Config("D must be positive".into()));
        }
        if self.d > MAX_RADIUS {
            return Err(Error::Config(format!("D must be at most {MAX_RADIUS}")));
        }
        if self.cap < self.d {
            return Err(Error::Config(format!("cap {} is below D = {}; no trial could succeed", self.cap, self.d)));
        }
        self.program.check_oracle(self.oracle)?;
        self.oracle.advice_for(AgentCount::Exact(self.k))?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HitTime {
    Found(u64),
    /// No agent reached the target within the cap.
    Capped,
}

impl HitTime {
    pub fn found(self) -> Option<u64> {
        match self {
            HitTime::Found(t) => Some(t),
            HitTime::Capped => None,
        }
    }

    pub fn is_capped(self) -> bool {
        self == HitTime::Capped
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub hit_time: HitTime,
    /// Agent that found the (reported) target first.
    pub winner: Option<u64>,
    /// Each agent's first hit on the reported target, if requested.
    pub per_agent_first_hit: Option<Vec<Option<u64>>>,
}

/// Earliest offset within `seg` at which the agent stands on `target`.
pub fn segment_first_hit(seg: &Segment, target: Point) -> Option<u64> {
    seg.first_hit(target)
}

/// Runs one agent from `state` against several targets at once.
///
/// `limits[j]` is the latest hit time worth reporting for target `j`
/// (`None` to ignore the target). The agent stops as soon as every target is
/// resolved or the clock passes every limit. Returns, per target, the agent's
/// first hit if it is within the limit.
pub fn run_agent_targets<R: Rng + ?Sized>(
    mut state: AgentState,
    targets: &[Point],
    limits: &[Option<u64>],
    rng: &mut R,
) -> Vec<Option<u64>> {
    debug_assert_eq!(targets.len(), limits.len());
    let mut hits = vec![None; targets.len()];
    let mut open: Vec<bool> = limits.iter().map(Option::is_some).collect();
    let horizon = |open: &[bool]| -> Option<u64> {
        open.iter().zip(limits).filter(|(o, _)| **o).filter_map(|(_, l)| *l).max()
    };
    let mut until = horizon(&open);
    let mut elapsed = 0u64;
    while let Some(limit) = until {
        if elapsed > limit {
            break;
        }
        let seg = state.next_segment(rng);
        let mut changed = false;
        for (j, &target) in targets.iter().enumerate() {
            if !open[j] {
                continue;
            }
            if let Some(offset) = seg.first_hit(target) {
                let t = elapsed.saturating_add(offset);
                if limits[j].is_some_and(|l| t <= l) {
                    hits[j] = Some(t);
                }
                // Later visits can only be later.
                open[j] = false;
                changed = true;
            }
        }
        if changed {
            until = horizon(&open);
        }
        match seg.duration() {
            Some(d) => elapsed = elapsed.saturating_add(d),
            None => break,
        }
    }
    hits
}

/// Runs a single agent with the given advice; returns its first visit to
/// `target` at or before `cap`.
pub fn run_agent<R: Rng + ?Sized>(
    program: AgentProgram,
    advice: &Advice,
    target: Point,
    cap: u64,
    rng: &mut R,
) -> Result<Option<u64>> {
    let state = program.start(advice, rng)?;
    Ok(run_agent_targets(state, &[target], &[Some(cap)], rng)[0])
}

/// Runs trial number `trial` of `cfg`.
///
/// Agent `a` draws its advice from stream `(seed, trial, Oracle, a)` and its
/// moves from `(seed, trial, Agent, a)`, so the outcome depends only on
/// `(cfg, trial)`.
pub fn run_trial(cfg: &TrialConfig, trial: u64) -> Result<TrialOutcome> {
    cfg.validate()?;
    let seed = cfg.master_seed;
    let targets = cfg.placement.targets(cfg.d, &mut stream(seed, trial, Purpose::Placement, 0));
    let group = AgentCount::Exact(cfg.k);

    // Best (time, agent) per target so far.
    let mut best: Vec<Option<(u64, u64)>> = vec![None; targets.len()];
    let mut per_agent: Vec<Vec<Option<u64>>> = Vec::new();
    for agent in 0..cfg.k {
        let advice = cfg.oracle.assign(group, agent, &mut stream(seed, trial, Purpose::Oracle, agent))?;
        let mut rng = stream(seed, trial, Purpose::Agent, agent);
        let state = cfg.program.start(&advice, &mut rng)?;
        let limits: Vec<Option<u64>> = if cfg.record_per_agent {
            vec![Some(cfg.cap); targets.len()]
        } else {
            best.iter()
                .map(|b| match b {
                    None => Some(cfg.cap),
                    Some((t, _)) => t.checked_sub(1),
                })
                .collect()
        };
        let hits = run_agent_targets(state, &targets, &limits, &mut rng);
        for (slot, hit) in best.iter_mut().zip(&hits) {
            if let Some(t) = *hit {
                if slot.is_none_or(|(bt, _)| t < bt) {
                    *slot = Some((t, agent));
                }
            }
        }
        if cfg.record_per_agent {
            per_agent.push(hits);
        }
    }

    let worst = if best.iter().any(Option::is_none) {
        best.iter().position(Option::is_none)
    } else {
        // First target attaining the maximum.
        let max = best.iter().map(|b| b.unwrap().0).max().unwrap_or(0);
        best.iter().position(|b| b.unwrap().0 == max)
    }
    .unwrap_or(0);

    let (hit_time, winner) = match best[worst] {
        Some((t, a)) => (HitTime::Found(t), Some(a)),
        None => (HitTime::Capped, None),
    };
    let per_agent_first_hit =
        cfg.record_per_agent.then(|| per_agent.iter().map(|hits| hits[worst]).collect());
    Ok(TrialOutcome { hit_time, winner, per_agent_first_hit })
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = available
/// parallelism).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}

/// Runs trials `0..trials` of `cfg`, in parallel, returning outcomes in trial
/// order.
pub fn run_trials(cfg: &TrialConfig, trials: u64, workers: usize) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    with_workers(workers, || (0..trials).into_par_iter().map(|t| run_trial(cfg, t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::SegmentKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_hit_examples() {
        let s = Segment::spiral(Point::ORIGIN, Some(10));
        assert_eq!(segment_first_hit(&s, Point::new(1, 0)), Some(1));
        let s = Segment::spiral(Point::ORIGIN, Some(0));
        assert_eq!(segment_first_hit(&s, Point::new(1, 0)), None);
        let w = Segment::walk(Point::ORIGIN, Point::new(2, 1));
        assert_eq!(segment_first_hit(&w, Point::new(2, 0)), Some(2));
        let r = Segment { start: Point::new(2, 1), kind: SegmentKind::Return };
        assert_eq!(segment_first_hit(&r, Point::new(0, 1)), Some(2));
    }

    #[test]
    fn target_at_source_is_immediate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for program in AgentProgram::ALL {
            let advice = program.default_oracle().advice_for(AgentCount::Exact(16)).unwrap();
            assert_eq!(run_agent(program, &advice, Point::ORIGIN, 1, &mut rng).unwrap(), Some(0));
        }
    }

    #[test]
    fn pure_spiral_hits_at_spiral_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for d in 1..30i64 {
            let target = Point::new(0, d);
            let hit = run_agent(AgentProgram::PureSpiral, &Advice::empty(), target, u64::MAX, &mut rng).unwrap();
            assert_eq!(hit, Some(grid::spiral_index(Point::ORIGIN, target)));
            assert!(hit.unwrap() <= ((2 * d + 1) * (2 * d + 1)) as u64);
            assert!(hit.unwrap() >= d as u64);
        }
    }

    #[test]
    fn cap_below_distance_never_hits() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for program in AgentProgram::ALL {
            let advice = program.default_oracle().advice_for(AgentCount::Exact(16)).unwrap();
            for d in 1..20 {
                let hit = run_agent(program, &advice, Point::new(d, 0), d as u64 - 1, &mut rng).unwrap();
                assert_eq!(hit, None);
            }
        }
    }

    #[test]
    fn single_spiral_agent_trial() {
        let cfg = TrialConfig::new(AgentProgram::PureSpiral, 1, 5, 42);
        let out = run_trial(&cfg, 0).unwrap();
        assert_eq!(out.hit_time, HitTime::Found(grid::spiral_index(Point::ORIGIN, Point::new(5, 0))));
        assert_eq!(out.winner, Some(0));
        assert_eq!(run_trial(&cfg, 17).unwrap(), out);
    }

    #[test]
    fn agents_get_distinct_streams() {
        let cfg = TrialConfig { record_per_agent: true, ..TrialConfig::new(AgentProgram::RandomWalk, 2, 3, 5) };
        let mut differ = 0;
        for trial in 0..200 {
            let mut a = stream(cfg.master_seed, trial, Purpose::Agent, 0);
            let mut b = stream(cfg.master_seed, trial, Purpose::Agent, 1);
            let mut sa = AgentState::Walk { position: Point::ORIGIN };
            let mut sb = sa;
            let pa: Vec<_> = (0..20).map(|_| sa.next_segment(&mut a)).collect();
            let pb: Vec<_> = (0..20).map(|_| sb.next_segment(&mut b)).collect();
            differ += (pa != pb) as u32;
        }
        assert!(differ >= 199);
    }

    #[test]
    fn worst_of_set_has_eight_targets_at_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for d in [1u64, 2, 7, 32] {
            let t = Placement::WorstOfSet.targets(d, &mut rng);
            assert_eq!(t.len(), 8);
            assert!(t.iter().all(|p| p.norm() == d));
            let r = Placement::RandomAngle.targets(d, &mut rng);
            assert_eq!(r[0].norm(), d);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = TrialConfig::new(AgentProgram::AlgA, 3, 10, 0);
        assert!(cfg.validate().unwrap_err().is_config());
        cfg.k = 16;
        cfg.validate().unwrap();
        cfg.cap = 9;
        assert!(cfg.validate().is_err());
        cfg.cap = 100;
        cfg.oracle = OracleSpec::Null;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn trial_minimum_matches_per_agent_times() {
        for program in [AgentProgram::AlgA, AgentProgram::KnownK] {
            let cfg = TrialConfig {
                record_per_agent: true,
                placement: Placement::WorstOfSet,
                ..TrialConfig::new(program, 8, 12, 3)
            };
            let fast = TrialConfig { record_per_agent: false, ..cfg.clone() };
            for trial in 0..50 {
                let full = run_trial(&cfg, trial).unwrap();
                let per_agent = full.per_agent_first_hit.clone().unwrap();
                assert_eq!(per_agent.len(), 8);
                let min = per_agent.iter().flatten().min().copied();
                assert_eq!(full.hit_time.found(), min);
                // Any order of reduction gives the same minimum.
                let rev = per_agent.iter().rev().flatten().fold(None, |m: Option<u64>, &t| Some(m.map_or(t, |m| m.min(t))));
                assert_eq!(rev, min);
                let quick = run_trial(&fast, trial).unwrap();
                assert_eq!(quick.hit_time, full.hit_time);
                assert_eq!(quick.winner, full.winner);
            }
        }
    }

    #[test]
    fn raising_cap_keeps_found_outcomes() {
        let base = TrialConfig { cap: 300, ..TrialConfig::new(AgentProgram::AlgA, 16, 20, 9) };
        let wide = TrialConfig { cap: 30_000, ..base.clone() };
        for trial in 0..100 {
            let a = run_trial(&base, trial).unwrap();
            if let HitTime::Found(t) = a.hit_time {
                assert_eq!(run_trial(&wide, trial).unwrap().hit_time, HitTime::Found(t));
            }
        }
    }

    #[test]
    fn parallel_runs_are_identical() {
        let cfg = TrialConfig { placement: Placement::RandomAngle, ..TrialConfig::new(AgentProgram::AlgA, 32, 40, 77) };
        let one = run_trials(&cfg, 40, 1).unwrap();
        let four = run_trials(&cfg, 40, 4).unwrap();
        assert_eq!(one, four);
    }
}
