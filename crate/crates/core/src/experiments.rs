//! Statistical harness: hitting-time estimates, competitive-ratio sweeps,
//! advice-size audits and coverage diagnostics.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{default_cap, run_trial, with_workers, HitTime, Placement, TrialConfig};
use crate::error::{Error, Result};
use crate::grid::{self, Point};
use crate::protocols::{Advice, AgentCount, AgentProgram, Oracle, OracleSpec, Segment, SegmentKind};
use crate::rng::{stream, Purpose};

/// Exact CSV header of a sweep file.
pub const SWEEP_HEADER: &str =
    "protocol,oracle,k,d,trials,mean_time,mean_time_uncapped,std_err,capped_fraction,ratio,advice_bits";

/// Value in the `protocol` column of the trailing fit row.
pub const FIT_ROW_TAG: &str = "fit";

/// `D + D²/k`, the benchmark every ratio is taken against.
pub fn lower_bound(k: u64, d: u64) -> f64 {
    d as f64 + (d as f64).powi(2) / k as f64
}

/// Sample mean and standard error of the mean.
pub fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// One `(protocol, oracle, k, D)` measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub protocol: AgentProgram,
    pub oracle: OracleSpec,
    pub k: u64,
    pub d: u64,
    pub trials: u64,
    /// Mean hitting time with capped trials counted at the cap.
    pub mean_time: f64,
    /// Mean over trials that were not capped; empty when all were.
    pub mean_time_uncapped: Option<f64>,
    pub std_err: f64,
    pub capped_fraction: f64,
    /// `mean_time / (D + D²/k)`.
    pub ratio: f64,
    pub advice_bits: u64,
}

impl SweepRecord {
    /// More than half the trials hit the cap, so the censored mean says
    /// little about the true mean.
    pub fn unreliable(&self) -> bool {
        self.capped_fraction > 0.5
    }

    /// Aggregates the hitting times of `cfg`'s trials.
    pub fn from_hits(cfg: &TrialConfig, hits: &[HitTime]) -> Result<Self> {
        if hits.is_empty() {
            return Err(Error::Config("need at least one trial".into()));
        }
        let censored: Vec<f64> = hits.iter().map(|h| h.found().unwrap_or(cfg.cap) as f64).collect();
        let found: Vec<f64> = hits.iter().filter_map(|h| h.found()).map(|t| t as f64).collect();
        let (mean_time, std_err) = mean_and_std_err(&censored);
        let capped = hits.iter().filter(|h| h.is_capped()).count();
        Ok(SweepRecord {
            protocol: cfg.program,
            oracle: cfg.oracle,
            k: cfg.k,
            d: cfg.d,
            trials: hits.len() as u64,
            mean_time,
            mean_time_uncapped: (!found.is_empty()).then(|| mean_and_std_err(&found).0),
            std_err,
            capped_fraction: capped as f64 / hits.len() as f64,
            ratio: mean_time / lower_bound(cfg.k, cfg.d),
            advice_bits: cfg.oracle.advice_for(AgentCount::Exact(cfg.k))?.size() as u64,
        })
    }
}

/// Runs trials `0..trials` of `cfg` and aggregates them.
pub fn estimate_tau(cfg: &TrialConfig, trials: u64, workers: usize) -> Result<SweepRecord> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    cfg.validate()?;
    let hits: Vec<HitTime> = with_workers(workers, || {
        (0..trials).into_par_iter().map(|t| run_trial(cfg, t).map(|o| o.hit_time)).collect::<Result<_>>()
    })?;
    SweepRecord::from_hits(cfg, &hits)
}

/// Parameters of a full `ks × Ds` sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub program: AgentProgram,
    pub oracle: OracleSpec,
    pub placement: Placement,
    pub ks: Vec<u64>,
    pub ds: Vec<u64>,
    pub trials: u64,
    pub master_seed: u64,
    /// Fixed cap for every cell; `None` uses [`default_cap`].
    pub cap: Option<u64>,
}

impl SweepSpec {
    pub fn cell(&self, k: u64, d: u64) -> TrialConfig {
        TrialConfig {
            k,
            d,
            placement: self.placement,
            cap: self.cap.unwrap_or_else(|| default_cap(k, d)),
            master_seed: self.master_seed,
            program: self.program,
            oracle: self.oracle,
            record_per_agent: false,
        }
    }

    /// Cells in output order: by `k`, then by `D`.
    pub fn cells(&self) -> Vec<TrialConfig> {
        self.ks.iter().flat_map(|&k| self.ds.iter().map(move |&d| (k, d))).map(|(k, d)| self.cell(k, d)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub records: Vec<SweepRecord>,
    /// Least-squares slope `C` of `ratio ≈ C · log₂ k` (through the origin).
    pub slope: Option<f64>,
}

/// Slope of the best fit `ratio = C · log₂ k` through the origin.
pub fn fit_log_slope(records: &[SweepRecord]) -> Option<f64> {
    let (sxy, sxx) = records.iter().fold((0.0, 0.0), |(sxy, sxx), r| {
        let x = (r.k as f64).log2();
        (sxy + x * r.ratio, sxx + x * x)
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Hitting time of every trial of every cell, in [`SweepSpec::cells`] order.
/// All `(cell, trial)` pairs are scheduled together; the result does not
/// depend on `workers`.
pub fn sweep_hits(spec: &SweepSpec, workers: usize) -> Result<Vec<(TrialConfig, Vec<HitTime>)>> {
    if spec.trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let cells = spec.cells();
    for cell in &cells {
        cell.validate()?;
    }
    let trials = spec.trials;
    let hits: Vec<HitTime> = with_workers(workers, || {
        (0..cells.len() as u64 * trials)
            .into_par_iter()
            .map(|job| run_trial(&cells[(job / trials) as usize], job % trials).map(|o| o.hit_time))
            .collect::<Result<_>>()
    })?;
    Ok(cells.into_iter().zip(hits.chunks(trials as usize).map(<[HitTime]>::to_vec)).collect())
}

/// Builds a sweep from per-cell hitting times.
pub fn aggregate_sweep(cells: &[(TrialConfig, Vec<HitTime>)]) -> Result<Sweep> {
    let records =
        cells.iter().map(|(cfg, hits)| SweepRecord::from_hits(cfg, hits)).collect::<Result<Vec<_>>>()?;
    let slope = fit_log_slope(&records);
    Ok(Sweep { records, slope })
}

/// Runs every `(k, D)` cell of `spec`; records come out ordered by `k`, then `D`.
pub fn competitive_sweep(spec: &SweepSpec, workers: usize) -> Result<Sweep> {
    aggregate_sweep(&sweep_hits(spec, workers)?)
}

impl Sweep {
    /// Writes the CSV: header, one row per record, and a trailing row whose
    /// `protocol` column is `fit` and whose `ratio` column holds the slope.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        if self.records.is_empty() {
            w.write_record(SWEEP_HEADER.split(','))?;
        }
        for r in &self.records {
            w.serialize(r)?;
        }
        let oracle = self.records.first().map_or("", |r| r.oracle.name());
        let slope = self.slope.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([FIT_ROW_TAG, oracle, "", "", "", "", "", "", "", slope.as_str(), ""])?;
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Parses a file produced by [`Sweep::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>().join(",") != SWEEP_HEADER {
            return Err(Error::Config("not a sweep CSV: unexpected header".into()));
        }
        let mut records = Vec::new();
        let mut slope = None;
        for row in rdr.records() {
            let row = row?;
            if row.get(0) == Some(FIT_ROW_TAG) {
                let field = row.get(9).unwrap_or("");
                if !field.is_empty() {
                    slope = Some(field.parse::<f64>().map_err(|e| Error::Config(format!("bad fit slope: {e}")))?);
                }
                continue;
            }
            records.push(row.deserialize(Some(&headers))?);
        }
        Ok(Sweep { records, slope })
    }
}

/// Competitiveness function used to size the coverage rings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PhiModel {
    /// `2 · C · log₂ k` from a fitted slope `C`. The factor 2 turns the
    /// competitiveness bound `Φ'(D + D²/k)` into `Φ · D²/k` for `k ≤ D`.
    Fitted { slope: f64 },
    /// `log₂ k`.
    LogK,
    Const(f64),
}

impl PhiModel {
    pub fn eval(&self, k: f64) -> f64 {
        match *self {
            PhiModel::Fitted { slope } => 2.0 * slope * k.log2(),
            PhiModel::LogK => k.log2(),
            PhiModel::Const(c) => c,
        }
    }
}

impl fmt::Display for PhiModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiModel::Fitted { slope } => write!(f, "fit:{slope}"),
            PhiModel::LogK => f.write_str("logk"),
            PhiModel::Const(c) => write!(f, "const:{c}"),
        }
    }
}

impl FromStr for PhiModel {
    type Err = Error;

    /// Parses `logk`, `const:C` or `fit:C`.
    fn from_str(s: &str) -> Result<Self> {
        let num = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|c| c.is_finite() && *c > 0.0)
                .ok_or_else(|| Error::Config(format!("bad phi constant {v:?}")))
        };
        if s == "logk" {
            Ok(PhiModel::LogK)
        } else if let Some(c) = s.strip_prefix("const:") {
            Ok(PhiModel::Const(num(c)?))
        } else if let Some(c) = s.strip_prefix("fit:") {
            Ok(PhiModel::Fitted { slope: num(c)? })
        } else {
            Err(Error::Config(format!("unknown phi {s:?} (expected fit, logk or const:C)")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub program: AgentProgram,
    pub oracle: OracleSpec,
    /// Group size is `k_i = 2^i`.
    pub i: u32,
    /// Time parameter; agents run for `2T`.
    pub t: u64,
    pub trials: u64,
    pub master_seed: u64,
}

/// Coverage of the ring `B(d_i) \ B(d_{i-1})` by `k_i` agents within `2T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingCoverageRecord {
    pub i: u32,
    pub k_i: u64,
    pub t: u64,
    pub d_i: u64,
    pub d_prev: u64,
    pub ring_size: u64,
    pub trials: u64,
    /// Mean number of distinct ring nodes visited.
    pub mean_covered: f64,
    /// `mean_covered / ring_size`.
    pub covered_fraction: f64,
    /// Standard error of `covered_fraction`.
    pub std_err: f64,
}

/// `round(√(T · k / Φ(k)))`.
pub fn ring_radius(t: u64, k: u64, phi: &PhiModel) -> Result<u64> {
    let p = phi.eval(k as f64);
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain(format!("phi({k}) = {p} is not a positive number")));
    }
    Ok((t as f64 * k as f64 / p).sqrt().round() as u64)
}

/// Marks every node a segment prefix (offsets `0..=last`) visits inside the
/// ball of radius `radius` around the source. Spiral rings that cannot meet
/// the ball, or lie wholly inside `B(skip_within)`, are not enumerated.
fn visit_in_ball(seg: &Segment, last: u64, radius: u64, skip_within: Option<u64>, mut visit: impl FnMut(Point)) {
    match seg.kind {
        SegmentKind::Spiral { center, .. } => {
            let c_inf = center.x.unsigned_abs().max(center.y.unsigned_abs());
            let c_one = center.norm();
            for ring in 0..=grid::spiral_ring(last) {
                // Every node on this ring has norm >= ring - |c|∞.
                if ring.saturating_sub(c_inf) > radius {
                    break;
                }
                if skip_within.is_some_and(|s| c_one + 2 * ring <= s) {
                    continue;
                }
                let lo = grid::spiral_ring_start(ring);
                let hi = grid::spiral_ring_start(ring + 1).saturating_sub(1).min(last);
                for idx in lo..=hi {
                    let p = grid::spiral_point(center, idx);
                    if p.norm() <= radius {
                        visit(p);
                    }
                }
            }
        }
        SegmentKind::Walk { .. } | SegmentKind::Return => {
            for off in 0..=last {
                let p = seg.point_at(off);
                if p.norm() <= radius {
                    visit(p);
                }
            }
        }
    }
}

/// Calls `visit(segment, last_offset)` for every segment an agent executes
/// within the window `[0, horizon]`.
fn walk_window<R: rand::Rng + ?Sized>(
    program: AgentProgram,
    advice: &Advice,
    horizon: u64,
    rng: &mut R,
    mut visit: impl FnMut(&Segment, u64),
) -> Result<()> {
    let mut state = program.start(advice, rng)?;
    let mut elapsed = 0u64;
    loop {
        let seg = state.next_segment(rng);
        let room = horizon - elapsed;
        let dur = seg.duration();
        visit(&seg, dur.map_or(room, |d| d.min(room)));
        match dur {
            Some(d) if d < room => elapsed += d,
            _ => return Ok(()),
        }
    }
}

/// Dense membership table for the nodes of a ball around the source.
struct BallBitmap {
    radius: i64,
    side: usize,
    cells: Vec<bool>,
}

impl BallBitmap {
    fn new(radius: u64) -> Self {
        let side = 2 * radius as usize + 1;
        BallBitmap { radius: radius as i64, side, cells: vec![false; side * side] }
    }

    /// Sets the node; returns whether it was newly set.
    fn insert(&mut self, p: Point) -> bool {
        let idx = (p.y + self.radius) as usize * self.side + (p.x + self.radius) as usize;
        !std::mem::replace(&mut self.cells[idx], true)
    }
}

/// Runs `k_i = 2^i` agents for `2T` time units and measures how many nodes of
/// the ring `B(d_i) \ B(d_{i-1})` at least one of them visits.
pub fn ring_coverage(spec: &RingSpec, phi: &PhiModel, workers: usize) -> Result<RingCoverageRecord> {
    if spec.trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    if spec.i == 0 || spec.i >= 32 {
        return Err(Error::Domain(format!("i must be in 1..32, got {}", spec.i)));
    }
    let k_i = 1u64 << spec.i;
    if k_i.saturating_mul(k_i) > spec.t {
        return Err(Error::Domain(format!("need 2^i <= sqrt(T): 2^{} exceeds sqrt({})", spec.i, spec.t)));
    }
    let d_i = ring_radius(spec.t, k_i, phi)?;
    let d_prev = ring_radius(spec.t, k_i / 2, phi)?;
    if d_i == 0 {
        return Err(Error::Domain("ring radius d_i rounds to 0".into()));
    }
    let ring = grid::Ring::new(Point::ORIGIN, d_prev, d_i)
        .map_err(|_| Error::Domain(format!("empty ring: d_(i-1) = {d_prev} >= d_i = {d_i}")))?;
    spec.program.check_oracle(spec.oracle)?;
    let group = AgentCount::Exact(k_i);
    spec.oracle.advice_for(group)?;

    let horizon = 2 * spec.t;
    let covered: Vec<u64> = with_workers(workers, || {
        (0..spec.trials)
            .into_par_iter()
            .map(|trial| -> Result<u64> {
                let mut seen = BallBitmap::new(d_i);
                let mut count = 0u64;
                for agent in 0..k_i {
                    let advice = spec.oracle.assign(
                        group,
                        agent,
                        &mut stream(spec.master_seed, trial, Purpose::Oracle, agent),
                    )?;
                    let mut rng = stream(spec.master_seed, trial, Purpose::Agent, agent);
                    walk_window(spec.program, &advice, horizon, &mut rng, |seg, last| {
                        visit_in_ball(seg, last, d_i, Some(d_prev), |p| {
                            if ring.contains(p) && seen.insert(p) {
                                count += 1;
                            }
                        })
                    })?;
                }
                Ok(count)
            })
            .collect::<Result<_>>()
    })?;

    let fractions: Vec<f64> = covered.iter().map(|&c| c as f64 / ring.size() as f64).collect();
    let (covered_fraction, std_err) = mean_and_std_err(&fractions);
    Ok(RingCoverageRecord {
        i: spec.i,
        k_i,
        t: spec.t,
        d_i,
        d_prev,
        ring_size: ring.size(),
        trials: spec.trials,
        mean_covered: covered.iter().sum::<u64>() as f64 / covered.len() as f64,
        covered_fraction,
        std_err,
    })
}

impl RingCoverageRecord {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.serialize(self)?;
        w.flush()?;
        Ok(())
    }
}

/// Distinct nodes visited by time `2T` when one agent runs per advice value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdviceCoverage {
    pub t: u64,
    pub per_agent: Vec<u64>,
    pub union: u64,
}

impl AdviceCoverage {
    /// An agent moves one edge per time unit, so it sees at most `2T + 1`
    /// nodes by time `2T`.
    pub fn respects_speed_bound(&self) -> bool {
        self.per_agent.iter().all(|&n| n <= 2 * self.t + 1)
    }
}

/// Runs one agent per advice in `advices` (agent `j` gets `advices[j]`) for
/// `2T` time units and counts distinct visited nodes, per agent and overall.
/// One entry per trial.
pub fn per_advice_coverage(
    program: AgentProgram,
    advices: &[Advice],
    t: u64,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<AdviceCoverage>> {
    let horizon = 2 * t;
    with_workers(workers, || {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut union: HashSet<Point> = HashSet::new();
                let mut per_agent = Vec::with_capacity(advices.len());
                for (j, advice) in advices.iter().enumerate() {
                    let mut mine: HashSet<Point> = HashSet::new();
                    let mut rng = stream(master_seed, trial, Purpose::Agent, j as u64);
                    walk_window(program, advice, horizon, &mut rng, |seg, last| {
                        mine.extend((0..=last).map(|o| seg.point_at(o)));
                    })?;
                    per_agent.push(mine.len() as u64);
                    union.extend(mine);
                }
                Ok(AdviceCoverage { t, per_agent, union: union.len() as u64 })
            })
            .collect()
    })
}

/// One row of an advice-size audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRow {
    pub k: AgentCount,
    pub advice_bits: u64,
}

/// Oracle invocations per audited `k`.
pub const AUDIT_INVOCATIONS: u64 = 100;
/// Agents inspected per invocation (all of them when `k` is smaller).
pub const AUDIT_AGENTS: u64 = 256;

/// `Ψ̂(k)`: the longest advice seen over [`AUDIT_INVOCATIONS`] oracle runs and
/// up to [`AUDIT_AGENTS`] agents per run.
pub fn advice_audit(oracle: &dyn Oracle, ks: &[AgentCount], master_seed: u64) -> Result<Vec<AuditRow>> {
    ks.iter()
        .map(|&k| {
            let agents = k.as_u64().map_or(AUDIT_AGENTS, |n| n.min(AUDIT_AGENTS));
            let mut longest = 0u64;
            for run in 0..AUDIT_INVOCATIONS {
                for agent in 0..agents {
                    let mut rng = stream(master_seed, run, Purpose::Oracle, agent);
                    longest = longest.max(oracle.assign(k, agent, &mut rng)?.size() as u64);
                }
            }
            Ok(AuditRow { k, advice_bits: longest })
        })
        .collect()
}

/// Writes audit rows as `k,advice_bits`.
pub fn write_audit_csv<W: Write>(rows: &[AuditRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["k", "advice_bits"])?;
    for row in rows {
        w.write_record([row.k.to_string(), row.advice_bits.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_spiral_has_zero_variance() {
        let cfg = TrialConfig::new(AgentProgram::PureSpiral, 1, 8, 3);
        let rec = estimate_tau(&cfg, 10, 1).unwrap();
        let expected = grid::spiral_index(Point::ORIGIN, Point::new(8, 0)) as f64;
        assert_eq!(rec.mean_time, expected);
        assert_eq!(rec.std_err, 0.0);
        assert_eq!(rec.capped_fraction, 0.0);
        assert_eq!(rec.advice_bits, 0);
        assert!(rec.mean_time >= 8.0);
    }

    #[test]
    fn capped_trials_are_censored() {
        let cfg = TrialConfig { cap: 10, ..TrialConfig::new(AgentProgram::PureSpiral, 1, 8, 3) };
        let rec = estimate_tau(&cfg, 4, 1).unwrap();
        assert_eq!(rec.capped_fraction, 1.0);
        assert_eq!(rec.mean_time, 10.0);
        assert_eq!(rec.mean_time_uncapped, None);
        assert!(rec.unreliable());
    }

    #[test]
    fn sweep_csv_round_trip() {
        let spec = SweepSpec {
            program: AgentProgram::AlgA,
            oracle: OracleSpec::LogLogLog,
            placement: Placement::RandomAngle,
            ks: vec![4, 16],
            ds: vec![5, 9],
            trials: 12,
            master_seed: 1,
            cap: None,
        };
        let sweep = competitive_sweep(&spec, 1).unwrap();
        assert_eq!(sweep.records.len(), 4);
        let text = sweep.to_csv_string().unwrap();
        assert!(text.starts_with(&format!("{SWEEP_HEADER}\n")));
        assert!(!text.contains('\r'));
        let back = Sweep::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, sweep);
        assert_eq!(back.to_csv_string().unwrap(), text);
    }

    #[test]
    fn fit_through_origin() {
        let mk = |k: u64, ratio: f64| SweepRecord {
            protocol: AgentProgram::AlgA,
            oracle: OracleSpec::LogLogLog,
            k,
            d: 1,
            trials: 1,
            mean_time: 0.0,
            mean_time_uncapped: None,
            std_err: 0.0,
            capped_fraction: 0.0,
            ratio,
            advice_bits: 0,
        };
        let slope = fit_log_slope(&[mk(16, 8.0), mk(256, 16.0)]).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert_eq!(fit_log_slope(&[mk(1, 3.0)]), None);
    }

    #[test]
    fn audit_examples() {
        let rows = advice_audit(&OracleSpec::Null, &[AgentCount::Exact(4), AgentCount::Exact(1 << 20)], 0).unwrap();
        assert!(rows.iter().all(|r| r.advice_bits == 0));
        let rows = advice_audit(&OracleSpec::LogLogLog, &[AgentCount::PowerOfTwo(256)], 0).unwrap();
        assert_eq!(rows[0].advice_bits, 4);
        let rows = advice_audit(&OracleSpec::TwoApprox, &[AgentCount::Exact(1 << 10)], 0).unwrap();
        assert_eq!(rows[0].advice_bits, 4);
        assert!(advice_audit(&OracleSpec::LogLogLog, &[AgentCount::Exact(3)], 0).is_err());
    }

    #[test]
    fn pure_spiral_never_revisits() {
        let cov = per_advice_coverage(AgentProgram::PureSpiral, &[Advice::empty()], 50, 1, 0, 1).unwrap();
        assert_eq!(cov[0].per_agent, vec![101]);
        assert_eq!(cov[0].union, 101);
    }

    #[test]
    fn guessing_protocol_revisits_the_source() {
        let advices: Vec<Advice> = (1..=3).map(Advice::encode).collect();
        let cov = per_advice_coverage(AgentProgram::AlgA, &advices, 500, 5, 0, 1).unwrap();
        for c in &cov {
            assert!(c.respects_speed_bound());
            assert!(c.per_agent.iter().all(|&n| n < 2 * c.t + 1));
            assert!(c.union >= *c.per_agent.iter().max().unwrap());
        }
    }

    #[test]
    fn ring_preconditions() {
        let spec = RingSpec {
            program: AgentProgram::AlgA,
            oracle: OracleSpec::LogLogLog,
            i: 5,
            t: 1000,
            trials: 1,
            master_seed: 0,
        };
        // 2^5 = 32 > sqrt(1000).
        assert!(ring_coverage(&spec, &PhiModel::LogK, 1).unwrap_err().is_config());
    }

    #[test]
    fn stay_at_home_covers_nothing() {
        let spec = RingSpec {
            program: AgentProgram::RandomWalk,
            oracle: OracleSpec::Null,
            i: 2,
            t: 16,
            trials: 3,
            master_seed: 0,
        };
        // d_i = round(sqrt(16 * 4 / 0.01)) = 80, d_prev = round(sqrt(16 * 2 / 0.01)) = 57:
        // a walk of 32 steps never leaves B(57).
        let rec = ring_coverage(&spec, &PhiModel::Const(0.01), 1).unwrap();
        assert_eq!((rec.d_i, rec.d_prev), (80, 57));
        assert_eq!(rec.covered_fraction, 0.0);
    }

    #[test]
    fn ring_fraction_is_a_fraction() {
        let spec = RingSpec {
            program: AgentProgram::AlgA,
            oracle: OracleSpec::LogLogLog,
            i: 3,
            t: 1 << 10,
            trials: 20,
            master_seed: 4,
        };
        let rec = ring_coverage(&spec, &PhiModel::LogK, 1).unwrap();
        assert!((0.0..=1.0).contains(&rec.covered_fraction));
        assert!(rec.mean_covered <= rec.ring_size as f64);
    }

    #[test]
    fn ring_counting_matches_step_enumeration() {
        // Count the same quantity by expanding every time step.
        let spec = RingSpec {
            program: AgentProgram::AlgA,
            oracle: OracleSpec::LogLogLog,
            i: 3,
            t: 1 << 9,
            trials: 6,
            master_seed: 21,
        };
        let phi = PhiModel::LogK;
        let rec = ring_coverage(&spec, &phi, 1).unwrap();
        let ring = grid::Ring::new(Point::ORIGIN, rec.d_prev, rec.d_i).unwrap();
        let mut total = 0usize;
        for trial in 0..spec.trials {
            let mut seen = HashSet::new();
            for agent in 0..rec.k_i {
                let advice = OracleSpec::LogLogLog.advice_for(AgentCount::Exact(rec.k_i)).unwrap();
                let mut rng = stream(spec.master_seed, trial, Purpose::Agent, agent);
                let mut state = spec.program.start(&advice, &mut rng).unwrap();
                let mut time = 0u64;
                'outer: loop {
                    let seg = state.next_segment(&mut rng);
                    for off in 0..=seg.duration().unwrap() {
                        if time + off > 2 * spec.t {
                            break 'outer;
                        }
                        let p = seg.point_at(off);
                        if ring.contains(p) {
                            seen.insert(p);
                        }
                    }
                    time += seg.duration().unwrap();
                }
            }
            total += seen.len();
        }
        assert_eq!(rec.mean_covered, total as f64 / spec.trials as f64);
    }

    #[test]
    fn phi_parsing() {
        assert_eq!("logk".parse::<PhiModel>().unwrap(), PhiModel::LogK);
        assert_eq!("const:2.5".parse::<PhiModel>().unwrap(), PhiModel::Const(2.5));
        assert_eq!("fit:1.5".parse::<PhiModel>().unwrap(), PhiModel::Fitted { slope: 1.5 });
        assert!("const:-1".parse::<PhiModel>().is_err());
        assert!("wat".parse::<PhiModel>().is_err());
    }
}
