//! Advice oracles and agent programs.
//!
//! An oracle turns the number of agents `k` into a per-agent [`Advice`]
//! bitstring. An [`AgentProgram`] turns an advice and a random stream into an
//! endless sequence of [`Segment`]s (walks, spirals, returns to the source).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Ball, Point, MAX_RADIUS};

/// Longest finite segment a program will emit. Phase lengths grow like
/// `4^i`, so this is only reached far beyond any practical time cap.
pub const MAX_DURATION: u64 = 1 << 62;

/// Number of agents. Large powers of two can be named without materializing
/// them, which is all the advice audit needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentCount {
    Exact(u64),
    PowerOfTwo(u32),
}

impl AgentCount {
    /// `⌊log₂ k⌋`; errors for `k = 0`.
    pub fn floor_log2(self) -> Result<u32> {
        match self {
            AgentCount::Exact(0) => Err(Error::Domain("agent count must be positive".into())),
            AgentCount::Exact(k) => Ok(k.ilog2()),
            AgentCount::PowerOfTwo(e) => Ok(e),
        }
    }

    /// The count as a machine integer, if it fits.
    pub fn as_u64(self) -> Option<u64> {
        match self {
            AgentCount::Exact(k) => Some(k),
            AgentCount::PowerOfTwo(e) => 1u64.checked_shl(e),
        }
    }

    /// `log₂ k` as a float, exact for powers of two.
    pub fn log2(self) -> f64 {
        match self {
            AgentCount::Exact(k) => (k as f64).log2(),
            AgentCount::PowerOfTwo(e) => e as f64,
        }
    }
}

impl From<u64> for AgentCount {
    fn from(k: u64) -> Self {
        AgentCount::Exact(k)
    }
}

impl fmt::Display for AgentCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_u64() {
            Some(k) => write!(f, "{k}"),
            None => match self {
                AgentCount::PowerOfTwo(e) => write!(f, "2^{e}"),
                AgentCount::Exact(k) => write!(f, "{k}"),
            },
        }
    }
}

impl FromStr for AgentCount {
    type Err = Error;

    /// Accepts a decimal integer or `2^e`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse agent count {s:?}"));
        if let Some(exp) = s.strip_prefix("2^") {
            let e: u32 = exp.parse().map_err(|_| bad())?;
            return Ok(match 1u64.checked_shl(e) {
                Some(k) if e < 64 => AgentCount::Exact(k),
                _ => AgentCount::PowerOfTwo(e),
            });
        }
        s.parse::<u64>().map(AgentCount::Exact).map_err(|_| bad())
    }
}

/// `⌊log₂ log₂ k⌋`, the advice of the `logloglog` oracle. Needs `k ≥ 2`.
pub fn floor_log_log(k: AgentCount) -> Result<u32> {
    let m = k.floor_log2()?;
    if m == 0 {
        return Err(Error::Domain("log log k is undefined for k < 2".into()));
    }
    Ok(m.ilog2())
}

/// Advice bitstring handed to an agent before the search starts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Advice {
    bits: Vec<bool>,
}

impl Advice {
    pub fn empty() -> Self {
        Advice::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Advice { bits }
    }

    /// Minimal big-endian binary encoding of `value`; zero is the single bit
    /// `0`, so every encoded integer occupies at least one bit.
    pub fn encode(value: u64) -> Self {
        let len = (u64::BITS - value.leading_zeros()).max(1);
        let bits = (0..len).rev().map(|b| (value >> b) & 1 == 1).collect();
        Advice { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of bits, the quantity the advice-size audit measures.
    pub fn size(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Decodes the bits as a big-endian integer; `None` for empty advice or
    /// more than 64 bits.
    pub fn value(&self) -> Option<u64> {
        if self.bits.is_empty() || self.bits.len() > 64 {
            return None;
        }
        Some(self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }
}

impl fmt::Display for Advice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("ε");
        }
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Assigns advice to the agents of a group of size `k`.
///
/// Implementations may be randomized and may treat agents differently; the
/// built-in [`OracleSpec`] oracles are neither.
pub trait Oracle {
    fn assign(&self, k: AgentCount, agent_index: u64, rng: &mut dyn RngCore) -> Result<Advice>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleSpec {
    /// `⌊log₂ log₂ k⌋` to every agent; requires `k ≥ 4`.
    #[serde(rename = "logloglog")]
    LogLogLog,
    /// `⌊log₂ k⌋` to every agent, i.e. a power-of-two 2-approximation of `k`.
    #[serde(rename = "two-approx")]
    TwoApprox,
    /// No advice at all.
    #[serde(rename = "null")]
    Null,
}

impl OracleSpec {
    pub const ALL: [OracleSpec; 3] = [OracleSpec::LogLogLog, OracleSpec::TwoApprox, OracleSpec::Null];

    pub fn name(self) -> &'static str {
        match self {
            OracleSpec::LogLogLog => "logloglog",
            OracleSpec::TwoApprox => "two-approx",
            OracleSpec::Null => "null",
        }
    }

    /// The advice every agent receives.
    pub fn advice_for(self, k: AgentCount) -> Result<Advice> {
        match self {
            OracleSpec::LogLogLog => {
                if k.floor_log2()? < 2 {
                    return Err(Error::Domain(format!("k must be >= 4 for the logloglog oracle, got {k}")));
                }
                Ok(Advice::encode(floor_log_log(k)? as u64))
            }
            OracleSpec::TwoApprox => Ok(Advice::encode(k.floor_log2()? as u64)),
            OracleSpec::Null => Ok(Advice::empty()),
        }
    }
}

impl Oracle for OracleSpec {
    fn assign(&self, k: AgentCount, _agent_index: u64, _rng: &mut dyn RngCore) -> Result<Advice> {
        self.advice_for(k)
    }
}

impl fmt::Display for OracleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OracleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OracleSpec::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown oracle {s:?} (expected logloglog, two-approx or null)")))
    }
}

/// A power of two, stored by exponent so that members of `K(α)` for large
/// `α` can be represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PowerOfTwo(pub u32);

impl PowerOfTwo {
    pub fn exponent(self) -> u32 {
        self.0
    }

    pub fn value(self) -> Option<u128> {
        1u128.checked_shl(self.0)
    }
}

/// `g(α) = |K(α)| = 2^α`.
pub fn guess_count(alpha: u32) -> u64 {
    1u64 << alpha
}

/// `K(α)`: the powers of two `k` with `⌊log₂ log₂ k⌋ = α`, ascending.
///
/// These are `2^j` for `2^α ≤ j < 2^(α+1)`. `k_set(0)` is `[2]`.
pub fn k_set(alpha: u32) -> Vec<PowerOfTwo> {
    let lo = 1u32 << alpha;
    (lo..2 * lo).map(PowerOfTwo).collect()
}

/// `k_ρ(α)`, the `rho`-th smallest element of `K(α)` (1-based).
pub fn k_rho(alpha: u32, rho: u64) -> PowerOfTwo {
    debug_assert!((1..=guess_count(alpha)).contains(&rho));
    PowerOfTwo((1u32 << alpha) + (rho - 1) as u32)
}

fn pow2_saturating(e: u32) -> u64 {
    if e >= 62 {
        MAX_DURATION
    } else {
        1 << e
    }
}

/// `⌈2^(2i + extra) / 2^guess_log2⌉`, at least 1.
fn spiral_budget(phase: u32, extra: u32, guess_log2: u32) -> u64 {
    let num = 2 * phase + extra;
    pow2_saturating(num.saturating_sub(guess_log2))
}

/// One macro-move of an agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point,
    pub kind: SegmentKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    /// Staircase walk to `to`, x-displacement first.
    Walk { to: Point },
    /// Canonical spiral around `center` for `duration` steps, or forever when
    /// `duration` is `None`. The agent must already stand at `center`.
    Spiral { center: Point, duration: Option<u64> },
    /// Staircase walk back to the source.
    Return,
}

impl Segment {
    pub fn walk(start: Point, to: Point) -> Self {
        Segment { start, kind: SegmentKind::Walk { to } }
    }

    pub fn spiral(center: Point, duration: Option<u64>) -> Self {
        Segment { start: center, kind: SegmentKind::Spiral { center, duration } }
    }

    pub fn ret(start: Point) -> Self {
        Segment { start, kind: SegmentKind::Return }
    }

    /// Number of time units the segment takes; `None` if it never ends.
    pub fn duration(&self) -> Option<u64> {
        match self.kind {
            SegmentKind::Walk { to } => Some(grid::manhattan(self.start, to)),
            SegmentKind::Spiral { duration, .. } => duration,
            SegmentKind::Return => Some(self.start.norm()),
        }
    }

    /// Position once the segment is done.
    pub fn end(&self) -> Option<Point> {
        self.duration().map(|d| self.point_at(d))
    }

    /// Position `offset` time units into the segment (clamped to the end).
    pub fn point_at(&self, offset: u64) -> Point {
        match self.kind {
            SegmentKind::Walk { to } => grid::walk_point(self.start, to, offset),
            SegmentKind::Spiral { center, duration } => {
                grid::spiral_point(center, duration.map_or(offset, |d| offset.min(d)))
            }
            SegmentKind::Return => grid::walk_point(self.start, Point::ORIGIN, offset),
        }
    }

    /// Earliest offset at which the agent stands on `target`, computed in
    /// constant time.
    pub fn first_hit(&self, target: Point) -> Option<u64> {
        match self.kind {
            SegmentKind::Walk { to } => grid::walk_offset(self.start, to, target),
            SegmentKind::Spiral { center, duration } => {
                let i = grid::spiral_index(center, target);
                match duration {
                    Some(d) if i > d => None,
                    _ => Some(i),
                }
            }
            SegmentKind::Return => grid::walk_offset(self.start, Point::ORIGIN, target),
        }
    }
}

/// The search protocol every agent runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentProgram {
    /// Guess `k` from `⌊log log k⌋` advice, then run the phase double loop.
    #[serde(rename = "alg-a")]
    AlgA,
    /// Reconstructed baseline: the same double loop driven by a
    /// 2-approximation of `k`, without guessing.
    #[serde(rename = "known-k")]
    KnownK,
    /// One unbounded spiral around the source.
    #[serde(rename = "spiral")]
    PureSpiral,
    /// Simple random walk.
    #[serde(rename = "walk")]
    RandomWalk,
}

impl AgentProgram {
    pub const ALL: [AgentProgram; 4] =
        [AgentProgram::AlgA, AgentProgram::KnownK, AgentProgram::PureSpiral, AgentProgram::RandomWalk];

    pub fn name(self) -> &'static str {
        match self {
            AgentProgram::AlgA => "alg-a",
            AgentProgram::KnownK => "known-k",
            AgentProgram::PureSpiral => "spiral",
            AgentProgram::RandomWalk => "walk",
        }
    }

    /// Oracle used when none is given.
    pub fn default_oracle(self) -> OracleSpec {
        match self {
            AgentProgram::AlgA => OracleSpec::LogLogLog,
            AgentProgram::KnownK => OracleSpec::TwoApprox,
            AgentProgram::PureSpiral | AgentProgram::RandomWalk => OracleSpec::Null,
        }
    }

    /// Rejects program/oracle pairs whose advice the program cannot read.
    pub fn check_oracle(self, oracle: OracleSpec) -> Result<()> {
        match (self, oracle) {
            (AgentProgram::AlgA, OracleSpec::LogLogLog)
            | (AgentProgram::KnownK, OracleSpec::TwoApprox)
            | (AgentProgram::PureSpiral | AgentProgram::RandomWalk, _) => Ok(()),
            _ => Err(Error::Config(format!(
                "protocol {} cannot run with the {} oracle (expected {})",
                self.name(),
                oracle.name(),
                self.default_oracle().name()
            ))),
        }
    }

    /// Builds the initial state from the agent's advice. Draws `ρ` from `rng`
    /// for [`AgentProgram::AlgA`].
    pub fn start<R: Rng + ?Sized>(self, advice: &Advice, rng: &mut R) -> Result<AgentState> {
        match self {
            AgentProgram::AlgA => {
                let alpha = advice
                    .value()
                    .ok_or_else(|| Error::Config("alg-a needs the logloglog advice".into()))?;
                let alpha = u32::try_from(alpha)
                    .ok()
                    .filter(|&a| a < 32)
                    .ok_or_else(|| Error::Domain(format!("advice {alpha} is out of range")))?;
                if alpha == 0 {
                    return Err(Error::Domain("alg-a needs advice alpha >= 1 (k >= 4)".into()));
                }
                let rho = rng.gen_range(1..=guess_count(alpha));
                Ok(AgentState::Phased(AlgAState::guessing(alpha, rho)))
            }
            AgentProgram::KnownK => {
                let log2_k = advice
                    .value()
                    .and_then(|v| u32::try_from(v).ok())
                    .ok_or_else(|| Error::Config("known-k needs the two-approx advice".into()))?;
                Ok(AgentState::Phased(AlgAState::known(log2_k)))
            }
            AgentProgram::PureSpiral => Ok(AgentState::Spiral),
            AgentProgram::RandomWalk => Ok(AgentState::Walk { position: Point::ORIGIN }),
        }
    }
}

impl fmt::Display for AgentProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentProgram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AgentProgram::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown protocol {s:?} (expected alg-a, known-k, spiral or walk)")))
    }
}

/// Position inside one phase: the five moves, in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PhaseStep {
    SourceSpiral,
    ReturnFromSource,
    Jump,
    LocalSpiral,
    ReturnFromLocal,
}

/// State of the stage/phase double loop.
///
/// Stage `j = 1, 2, ...` runs phases `i = 1..=j`. Phase `i` spirals around
/// the source for `t_i + 2^i`, returns, jumps to a uniform node of the ball
/// of radius `2^i`, spirals there for `t_i` and returns again, where
/// `t_i = ⌈2^(2i + α + 2) / k_guess⌉` (at least 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlgAState {
    alpha: u32,
    rho: Option<u64>,
    guess_log2: u32,
    stage: u32,
    phase: u32,
    step: PhaseStep,
    position: Point,
}

impl AlgAState {
    /// Guessing variant: `ρ ∈ [1, g(α)]` already drawn, `k_guess = k_ρ(α)`.
    pub fn guessing(alpha: u32, rho: u64) -> Self {
        AlgAState {
            alpha,
            rho: Some(rho),
            guess_log2: k_rho(alpha, rho).exponent(),
            stage: 1,
            phase: 1,
            step: PhaseStep::SourceSpiral,
            position: Point::ORIGIN,
        }
    }

    /// Known-k variant: `k_guess = 2^log2_k` and the `α` term is dropped.
    pub fn known(log2_k: u32) -> Self {
        AlgAState {
            alpha: 0,
            rho: None,
            guess_log2: log2_k,
            stage: 1,
            phase: 1,
            step: PhaseStep::SourceSpiral,
            position: Point::ORIGIN,
        }
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn rho(&self) -> Option<u64> {
        self.rho
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    /// `log₂` of the group size the agent is acting on.
    pub fn guess_log2(&self) -> u32 {
        self.guess_log2
    }

    /// `t_i` for phase `i`.
    pub fn spiral_time(&self, phase: u32) -> u64 {
        spiral_budget(phase, self.alpha + 2, self.guess_log2)
    }

    /// Radius of the ball the jump target is drawn from in phase `i`.
    pub fn jump_radius(phase: u32) -> u64 {
        pow2_saturating(phase).min(MAX_RADIUS)
    }

    pub fn next_segment<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Segment {
        let i = self.phase;
        let t = self.spiral_time(i);
        let seg = match self.step {
            PhaseStep::SourceSpiral => {
                debug_assert_eq!(self.position, Point::ORIGIN);
                self.step = PhaseStep::ReturnFromSource;
                Segment::spiral(Point::ORIGIN, Some(t.saturating_add(pow2_saturating(i)).min(MAX_DURATION)))
            }
            PhaseStep::ReturnFromSource | PhaseStep::ReturnFromLocal => {
                let seg = Segment::ret(self.position);
                if self.step == PhaseStep::ReturnFromSource {
                    self.step = PhaseStep::Jump;
                } else {
                    self.step = PhaseStep::SourceSpiral;
                    self.advance();
                }
                seg
            }
            PhaseStep::Jump => {
                let u = grid::sample_ball_uniform(&Ball::new(Point::ORIGIN, Self::jump_radius(i)), rng);
                self.step = PhaseStep::LocalSpiral;
                Segment::walk(self.position, u)
            }
            PhaseStep::LocalSpiral => {
                self.step = PhaseStep::ReturnFromLocal;
                Segment::spiral(self.position, Some(t))
            }
        };
        self.position = seg.end().expect("phase segments are finite");
        seg
    }

    fn advance(&mut self) {
        if self.phase < self.stage {
            self.phase += 1;
        } else {
            self.stage += 1;
            self.phase = 1;
        }
    }
}

/// Running state of any [`AgentProgram`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentState {
    Phased(AlgAState),
    /// Emits one never-ending spiral around the source.
    Spiral,
    Walk { position: Point },
}

impl AgentState {
    pub fn next_segment<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Segment {
        match self {
            AgentState::Phased(state) => state.next_segment(rng),
            AgentState::Spiral => Segment::spiral(Point::ORIGIN, None),
            AgentState::Walk { position } => {
                let (dx, dy) = [(1, 0), (0, 1), (-1, 0), (0, -1)][rng.gen_range(0..4)];
                let seg = Segment::walk(*position, position.offset(dx, dy));
                *position = position.offset(dx, dy);
                seg
            }
        }
    }
}
