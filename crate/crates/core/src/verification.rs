//! The staged experiments certifying the subcone property: sample plans that
//! discretize piecewise-linear functions, stage records showing scaled
//! witness distances track exact tree distances inside the `1/2^(N-1)`
//! envelope, Cauchy extension chains with closed-form distances, and the
//! completion rounds extending the certificate to limits of chains.
//!
//! Stage N samples each function pair at a rational time within
//! `1/2^(N+1)` past the pair's segregation moment. The discretized pair then
//! differs from the exact pair distance by at most twice that slack, and an
//! epsilon deep enough in the schedule brings the scaled plane distance
//! within `1/2^N` of the discrete distance, so every recorded error lands
//! under `1/2^N + 2/2^(N+1) = 1/2^(N-1)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::hyperbolic::{
    polar_distance_logdomain_with_gap, witness_angle_gap, witness_point, EpsilonSchedule,
};
use crate::tree::{DiscreteFunction, Knot, PlFunction};
use crate::{rat_f64, Rational};

#[derive(Debug, Error)]
pub enum StageError {
    #[error("functions {0} and {1} are equal; sample plans need pairwise distinct inputs")]
    IndistinctInputs(usize, usize),
    #[error(
        "epsilon schedule exhausted at stage {stage}; smallest epsilon tried was {smallest_epsilon}"
    )]
    ScheduleExhausted { stage: u32, smallest_epsilon: f64 },
    #[error("stage {stage}, pair ({k1},{k2}): error {error} escapes the bound {bound}")]
    EnvelopeViolated {
        stage: u32,
        k1: usize,
        k2: usize,
        error: f64,
        bound: f64,
    },
    #[error("bad chain: {0}")]
    InvalidChain(String),
}

// 1/2^n
fn dyadic(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2).pow(n))
}

/// Sample time for one unordered function pair, kept with the segregation
/// moment it was measured from.
#[derive(Clone, Debug)]
pub struct PairSample {
    pub k1: usize,
    pub k2: usize,
    pub time: Rational,
    pub segregation: Rational,
}

/// Stage-N sampling data: per pair a rational time in
/// `(s, s + 1/2^(N+1))` whose values distinguish the pair whenever it lies
/// in both domains, all times globally distinct, plus the merged time set.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    stage: u32,
    pairs: Vec<PairSample>,
    times: Vec<Rational>,
}

impl SamplePlan {
    /// Plan carrying the given sample times and no pair annotations.
    pub fn from_times(stage: u32, mut times: Vec<Rational>) -> Self {
        times.sort();
        times.dedup();
        SamplePlan {
            stage,
            pairs: Vec::new(),
            times,
        }
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn pairs(&self) -> &[PairSample] {
        &self.pairs
    }

    /// Merged sample times, ascending.
    pub fn times(&self) -> &[Rational] {
        &self.times
    }
}

/// Picks the per-pair sample times for stage N. The first candidate is the
/// midpoint of the admissible window `(s, s + 1/2^(N+1))`; it halves toward
/// `s` past value collisions (a crossing exactly at the candidate) and times
/// already taken by earlier pairs, so the plan is deterministic.
///
/// When the window starts at or beyond the shorter domain the value
/// condition is vacuous: past the shorter function's end there is nothing to
/// distinguish.
pub fn make_sample_plan(fs: &[PlFunction], stage: u32) -> Result<SamplePlan, StageError> {
    for k1 in 0..fs.len() {
        for k2 in k1 + 1..fs.len() {
            if fs[k1] == fs[k2] {
                return Err(StageError::IndistinctInputs(k1, k2));
            }
        }
    }
    let window = dyadic(stage + 1);
    let mut used: BTreeSet<Rational> = BTreeSet::new();
    let mut pairs = Vec::new();
    for k1 in 0..fs.len() {
        for k2 in k1 + 1..fs.len() {
            let s = fs[k1].segregation(&fs[k2]).moment;
            let min_rho = fs[k1].rho().min(fs[k2].rho());
            let mut offset = &window / Rational::from_integer(2.into());
            let mut guard = 0;
            let time = loop {
                let t = &s + &offset;
                let distinguishes = if &t <= min_rho {
                    fs[k1].evaluate(&t).unwrap() != fs[k2].evaluate(&t).unwrap()
                } else {
                    true
                };
                if distinguishes && !used.contains(&t) {
                    break t;
                }
                offset /= Rational::from_integer(2.into());
                guard += 1;
                // distinct PL functions separate immediately past s, so the
                // halving can only stall on a bug
                assert!(guard < 1000, "sample-time search stalled for pair ({k1},{k2})");
            };
            used.insert(time.clone());
            pairs.push(PairSample {
                k1,
                k2,
                time,
                segregation: s,
            });
        }
    }
    Ok(SamplePlan {
        stage,
        pairs,
        times: used.into_iter().collect(),
    })
}

/// Discrete snapshot of `f` on the plan's time set: support at the sample
/// times inside the half-open domain `[0, rho)`, carrying f's exact values
/// there, zeros dropped.
pub fn discretize(f: &PlFunction, plan: &SamplePlan) -> DiscreteFunction {
    let zero = Rational::zero();
    let mut support = Vec::new();
    for t in plan.times() {
        if *t > zero && t < f.rho() {
            let v = f.evaluate(t).expect("sample time inside the domain");
            if !v.is_zero() {
                support.push(Knot::new(t.clone(), v));
            }
        }
    }
    DiscreteFunction::new(f.rho().clone(), support).expect("sample times form a valid support")
}

/// Outcome of one pair inside a stage run. `d_s` and `d_d` are exact; the
/// epsilon-scaled witness distance and its errors are floats.
#[derive(Clone, Debug)]
pub struct PairOutcome {
    pub k1: usize,
    pub k2: usize,
    pub d_s: Rational,
    pub d_d: Rational,
    pub eps_d_x: f64,
    pub err_vs_d: f64,
    pub err_vs_s: f64,
    /// `2 (t - s)`: the sampling slack, bounding `|d_d - d_s|` exactly.
    pub slack: Rational,
}

/// One verification stage: the epsilon that worked, where it sat in the
/// schedule, and the per-pair errors under the `1/2^(N-1)` bound.
#[derive(Clone, Debug)]
pub struct StageRecord {
    pub stage: u32,
    pub epsilon: f64,
    pub schedule_index: usize,
    pub bound: Rational,
    pub pairs: Vec<PairOutcome>,
}

fn scaled_witness_distance(g1: &DiscreteFunction, g2: &DiscreteFunction, eps: f64) -> f64 {
    let d_x = polar_distance_logdomain_with_gap(
        &witness_point(g1, eps),
        &witness_point(g2, eps),
        witness_angle_gap(g1, g2, eps),
    );
    eps * d_x
}

fn stage_from(
    fs: &[PlFunction],
    stage: u32,
    schedule: &EpsilonSchedule,
    start: usize,
) -> Result<StageRecord, StageError> {
    assert!(stage >= 1, "stages are numbered from 1");
    let plan = make_sample_plan(fs, stage)?;
    let gs: Vec<DiscreteFunction> = fs.iter().map(|f| discretize(f, &plan)).collect();

    struct Prep {
        k1: usize,
        k2: usize,
        d_s: Rational,
        d_d: Rational,
        d_d_f64: f64,
        slack: Rational,
    }
    let preps: Vec<Prep> = plan
        .pairs()
        .iter()
        .map(|p| {
            let d_d = gs[p.k1].distance(&gs[p.k2]);
            Prep {
                k1: p.k1,
                k2: p.k2,
                d_s: fs[p.k1].distance(&fs[p.k2]),
                d_d_f64: rat_f64(&d_d),
                d_d,
                slack: (&p.time - &p.segregation) * Rational::from_integer(2.into()),
            }
        })
        .collect();

    let tol = 2f64.powi(-(stage as i32));
    let bound = dyadic(stage - 1);
    let bound_f64 = rat_f64(&bound);

    'schedule: for index in start..schedule.len() {
        let eps = schedule.values()[index];
        let mut scaled = Vec::with_capacity(preps.len());
        for p in &preps {
            let eps_d_x = scaled_witness_distance(&gs[p.k1], &gs[p.k2], eps);
            if (eps_d_x - p.d_d_f64).abs() > tol {
                continue 'schedule;
            }
            scaled.push(eps_d_x);
        }
        let mut pairs = Vec::with_capacity(preps.len());
        for (p, eps_d_x) in preps.iter().zip(scaled) {
            let err_vs_s = (eps_d_x - rat_f64(&p.d_s)).abs();
            if err_vs_s >= bound_f64 {
                return Err(StageError::EnvelopeViolated {
                    stage,
                    k1: p.k1,
                    k2: p.k2,
                    error: err_vs_s,
                    bound: bound_f64,
                });
            }
            pairs.push(PairOutcome {
                k1: p.k1,
                k2: p.k2,
                d_s: p.d_s.clone(),
                d_d: p.d_d.clone(),
                eps_d_x,
                err_vs_d: (eps_d_x - p.d_d_f64).abs(),
                err_vs_s,
                slack: p.slack.clone(),
            });
        }
        return Ok(StageRecord {
            stage,
            epsilon: eps,
            schedule_index: index,
            bound,
            pairs,
        });
    }
    Err(StageError::ScheduleExhausted {
        stage,
        smallest_epsilon: *schedule.values().last().unwrap(),
    })
}

/// Runs stage N from the top of the schedule: finds an epsilon bringing
/// every scaled witness distance within `1/2^N` of the exact discrete
/// distance, then records the per-pair errors against the exact tree
/// distances, which the sampling slack keeps under `1/2^(N-1)`.
pub fn run_stage(
    fs: &[PlFunction],
    stage: u32,
    schedule: &EpsilonSchedule,
) -> Result<StageRecord, StageError> {
    stage_from(fs, stage, schedule, 0)
}

/// Stages 1 through `max_stage`, each resuming strictly past the schedule
/// index the previous stage stopped at, so the chosen epsilons strictly
/// decrease.
pub fn run_all_stages(
    fs: &[PlFunction],
    max_stage: u32,
    schedule: &EpsilonSchedule,
) -> Result<Vec<StageRecord>, StageError> {
    let mut records = Vec::with_capacity(max_stage as usize);
    let mut start = 0;
    for stage in 1..=max_stage {
        let record = stage_from(fs, stage, schedule, start)?;
        start = record.schedule_index + 1;
        records.push(record);
    }
    Ok(records)
}

/// Extension chain `f_0, f_1, ...` whose domain lengths rise to
/// `limit_length`: `f_k` is `stem` continued by a unit-slope zigzag turning
/// at `tau_j = L - (L - b) / 2^j` for `j <= k`, where `b` is the stem
/// length. Each element extends the previous one and
/// `d(f_k, f_m) = rho_m - rho_k` falls like `2^-k`, yet nothing in the space
/// sits at distance 0 from the whole tail: a candidate would need the
/// infinite breakpoint set `{tau_j}` before `L`.
#[derive(Clone, Debug)]
pub struct CauchyChain {
    stem: PlFunction,
    limit_length: Rational,
}

impl CauchyChain {
    pub fn new(stem: PlFunction, limit_length: Rational) -> Result<Self, StageError> {
        if limit_length <= *stem.rho() {
            return Err(StageError::InvalidChain(format!(
                "limit length {} must exceed the stem length {}",
                limit_length,
                stem.rho()
            )));
        }
        Ok(CauchyChain { stem, limit_length })
    }

    /// The chain over `[0, 1)`: zero stem and domain lengths `1 - 2^-k`.
    pub fn dyadic_zigzag() -> Self {
        CauchyChain {
            stem: PlFunction::zero(),
            limit_length: Rational::one(),
        }
    }

    pub fn stem(&self) -> &PlFunction {
        &self.stem
    }

    pub fn limit_length(&self) -> &Rational {
        &self.limit_length
    }

    // L - b, the length still to be filled in
    fn gap(&self) -> Rational {
        &self.limit_length - self.stem.rho()
    }

    /// Domain length of the k-th element, `L - (L - b) / 2^k`.
    pub fn depth_rho(&self, k: u32) -> Rational {
        &self.limit_length - self.gap() * dyadic(k)
    }

    /// The k-th chain element.
    pub fn function(&self, k: u32) -> PlFunction {
        let mut f = self.stem.clone();
        for j in 1..=k {
            let length = self.depth_rho(j) - self.depth_rho(j - 1);
            let slope = if j % 2 == 1 {
                Rational::one()
            } else {
                -Rational::one()
            };
            f = f.concat(&PlFunction::linear(slope, length).unwrap());
        }
        f
    }

    /// `d(f_k, f_m)` in closed form: extension chains segregate at the
    /// shorter domain, so the distance is the difference of domain lengths.
    pub fn distance(&self, k: u32, m: u32) -> Rational {
        let (lo, hi) = if k <= m { (k, m) } else { (m, k) };
        self.depth_rho(hi) - self.depth_rho(lo)
    }

    /// Distance between the limits of two chains: zero exactly when the
    /// chains share a tail, otherwise `(L_a - s) + (L_b - s)` for the
    /// segregation moment `s` the deep elements stabilize at.
    pub fn limit_distance(&self, other: &CauchyChain) -> Rational {
        if self.is_cofinal(other) {
            return Rational::zero();
        }
        for k in 1..=512 {
            let fa = self.function(k);
            let fb = other.function(k);
            let s = fa.segregation(&fb).moment;
            if &s < fa.rho().min(fb.rho()) {
                // branch strictly inside both domains: deeper elements only
                // extend past it, so the moment is final
                return (&self.limit_length - &s) + (&other.limit_length - &s);
            }
        }
        unreachable!("non-cofinal chains branch at bounded depth");
    }

    // The tails coincide exactly when the limits agree, the remaining gaps
    // differ by an even power of two (odd shifts flip the zigzag phase), and
    // the deeper chain's stem is literally the shallower chain's element at
    // the shift depth.
    fn is_cofinal(&self, other: &CauchyChain) -> bool {
        if self.limit_length != other.limit_length {
            return false;
        }
        let (shallow, deep) = if self.gap() >= other.gap() {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = shallow.gap() / deep.gap();
        let Some(shift) = dyadic_log2(&ratio) else {
            return false;
        };
        shift % 2 == 0 && deep.stem == shallow.function(shift)
    }
}

// Some(m) iff r == 2^m for a nonnegative integer m.
fn dyadic_log2(r: &Rational) -> Option<u32> {
    if !r.denom().is_one() || !r.numer().is_positive() {
        return None;
    }
    let n = r.numer();
    match n.trailing_zeros() {
        Some(tz) if tz + 1 == n.bits() => Some(tz as u32),
        _ => None,
    }
}

/// One pair of chains in a completion round: the exact limit distance and
/// the scaled witness distance of the representatives.
#[derive(Clone, Debug)]
pub struct CompletionPair {
    pub k1: usize,
    pub k2: usize,
    pub limit_distance: Rational,
    pub eps_d_x: f64,
    pub error: f64,
}

/// Completion round r: representatives taken deep enough that each sits
/// within `1/2^(r+1)` of its chain's limit, then driven through the stage
/// machinery until the scaled witness distances match the limit distances
/// within `1/2^(r-1)`.
#[derive(Clone, Debug)]
pub struct CompletionRecord {
    pub stage: u32,
    pub depth: u32,
    pub epsilon: f64,
    pub schedule_index: usize,
    pub bound: Rational,
    pub pairs: Vec<CompletionPair>,
}

/// One completion round from the top of the schedule.
pub fn completion_witness(
    chains: &[CauchyChain],
    stage: u32,
    schedule: &EpsilonSchedule,
) -> Result<CompletionRecord, StageError> {
    completion_from(chains, stage, schedule, 0)
}

fn completion_from(
    chains: &[CauchyChain],
    stage: u32,
    schedule: &EpsilonSchedule,
    start: usize,
) -> Result<CompletionRecord, StageError> {
    assert!(stage >= 1, "completion rounds are numbered from 1");
    // depth at which every representative is within 1/2^(stage+1) of its limit
    let rep_tol = dyadic(stage + 1);
    let mut depth = 0;
    while chains
        .iter()
        .any(|c| c.gap() * dyadic(depth) >= rep_tol)
    {
        depth += 1;
        assert!(depth <= 4096, "chain gaps are finite, so this depth exists");
    }

    // cofinal chains can collide at this depth; the stage machinery wants
    // distinct functions, so dedupe and remember who went where
    let mut unique: Vec<PlFunction> = Vec::new();
    let mut rep_index = Vec::with_capacity(chains.len());
    for chain in chains {
        let rep = chain.function(depth);
        match unique.iter().position(|u| *u == rep) {
            Some(i) => rep_index.push(i),
            None => {
                rep_index.push(unique.len());
                unique.push(rep);
            }
        }
    }

    let inner = stage_from(&unique, stage + 1, schedule, start)?;
    let bound = dyadic(stage - 1);
    let bound_f64 = rat_f64(&bound);
    let mut pairs = Vec::new();
    for k1 in 0..chains.len() {
        for k2 in k1 + 1..chains.len() {
            let (u1, u2) = (rep_index[k1], rep_index[k2]);
            let eps_d_x = if u1 == u2 {
                0.0
            } else {
                let (lo, hi) = (u1.min(u2), u1.max(u2));
                inner
                    .pairs
                    .iter()
                    .find(|p| (p.k1, p.k2) == (lo, hi))
                    .expect("stage covers every unique pair")
                    .eps_d_x
            };
            let limit_distance = chains[k1].limit_distance(&chains[k2]);
            let error = (eps_d_x - rat_f64(&limit_distance)).abs();
            if error >= bound_f64 {
                return Err(StageError::EnvelopeViolated {
                    stage,
                    k1,
                    k2,
                    error,
                    bound: bound_f64,
                });
            }
            pairs.push(CompletionPair {
                k1,
                k2,
                limit_distance,
                eps_d_x,
                error,
            });
        }
    }
    Ok(CompletionRecord {
        stage,
        depth,
        epsilon: inner.epsilon,
        schedule_index: inner.schedule_index,
        bound,
        pairs,
    })
}

/// Completion rounds 1 through `max_stage` with the chosen epsilons falling
/// strictly faster than half per round.
pub fn completion_stages(
    chains: &[CauchyChain],
    max_stage: u32,
    schedule: &EpsilonSchedule,
) -> Result<Vec<CompletionRecord>, StageError> {
    let mut records = Vec::with_capacity(max_stage as usize);
    let mut start = 0;
    let mut previous = f64::INFINITY;
    for stage in 1..=max_stage {
        while start < schedule.len() && schedule.values()[start] >= previous / 2.0 {
            start += 1;
        }
        if start >= schedule.len() {
            return Err(StageError::ScheduleExhausted {
                stage,
                smallest_epsilon: *schedule.values().last().unwrap(),
            });
        }
        let record = completion_from(chains, stage, schedule, start)?;
        previous = record.epsilon;
        start = record.schedule_index + 1;
        records.push(record);
    }
    Ok(records)
}
