//! Deterministic discrete-event model of deploying and running a grouped
//! pipeline.
//!
//! Setup is additive: every group starts a pod, and on a cold start every
//! distinct image is pulled once. During execution each group owns a single
//! worker that runs its operators' tasks one at a time, first come first
//! served. Messages between operators take `l_intra` or `l_inter` depending
//! on whether both ends share a group. A fibonacci operator receiving `n`
//! computes for `work_units(n) * t_unit` and then sends `n + fib_step` to its
//! successors; the terminator consumes messages instantly.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GroupingConfig;
use crate::workload::{OperatorRole, Workload};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// Pod start time per group.
    pub t_pod: f64,
    /// Pull time per distinct image, cold starts only.
    pub t_pull: f64,
    pub l_intra: f64,
    pub l_inter: f64,
    /// Time per Fibonacci work unit.
    pub t_unit: f64,
    /// Multiplicative noise on task durations; off when `None`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter: Option<Jitter>,
}

/// Each task duration is scaled by a factor drawn uniformly from
/// `[1 - amplitude, 1 + amplitude]`, seeded per repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jitter {
    pub seed: u64,
    pub amplitude: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            t_pod: 200.0,
            t_pull: 1000.0,
            l_intra: 1.0,
            l_inter: 20.0,
            t_unit: 1.0,
            jitter: None,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("t_pod", self.t_pod),
            ("t_pull", self.t_pull),
            ("l_intra", self.l_intra),
            ("l_inter", self.l_inter),
            ("t_unit", self.t_unit),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        if self.l_inter < self.l_intra {
            return Err(Error::InvalidParams(
                "l_inter must be at least l_intra".into(),
            ));
        }
        if let Some(j) = self.jitter {
            if !(0.0..1.0).contains(&j.amplitude) {
                return Err(Error::InvalidParams(
                    "jitter amplitude must lie in [0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheState {
    pub cold: bool,
}

impl CacheState {
    pub const COLD: CacheState = CacheState { cold: true };
    pub const WARM: CacheState = CacheState { cold: false };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub setup_time: f64,
    pub execution_time: f64,
    pub total_time: f64,
    /// Time each operator last finished a task (or, for terminators, last
    /// consumed a message).
    pub per_operator_completion: BTreeMap<String, f64>,
    pub terminator_messages: u64,
}

/// Calls made by the naive recursive Fibonacci algorithm for `n`:
/// `2 F(n+1) - 1` with `F(1) = F(2) = 1`.
pub fn work_units(n: u32) -> Result<u64> {
    if n < 1 {
        return Err(Error::InvalidParams("work_units needs n >= 1".into()));
    }
    let (mut a, mut b) = (1u64, 1u64); // F(1), F(2)
    for _ in 1..n {
        let next = a
            .checked_add(b)
            .ok_or_else(|| Error::InvalidParams(format!("work_units({n}) overflows")))?;
        a = b;
        b = next;
    }
    b.checked_mul(2)
        .map(|x| x - 1)
        .ok_or_else(|| Error::InvalidParams(format!("work_units({n}) overflows")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    /// Worker of a group finished the task of `op`.
    Finish {
        group: usize,
        op: usize,
        n: u32,
        round: u32,
    },
    Arrival {
        op: usize,
        n: u32,
        round: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: Time,
    seq: u64,
    kind: EventKind,
}

/// Queued task; workers pick the smallest (arrival, operator id, round).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Task {
    arrival: Time,
    op_rank: usize,
    round: u32,
    seq: u64,
    op: usize,
    n: u32,
}

pub fn simulate(
    config: &GroupingConfig,
    workload: &Workload,
    sim: &SimParams,
    cache: CacheState,
) -> Result<SimResult> {
    simulate_rep(config, workload, sim, cache, 0)
}

fn simulate_rep(
    config: &GroupingConfig,
    workload: &Workload,
    sim: &SimParams,
    cache: CacheState,
    rep: usize,
) -> Result<SimResult> {
    sim.validate()?;
    let member = workload.instance.membership(config)?;
    let pipeline = workload.pipeline();
    let n_ops = pipeline.len();

    let mut setup_time = sim.t_pod * config.groups.len() as f64;
    if cache.cold {
        setup_time += sim.t_pull * config.distinct_images().len() as f64;
    }

    let successors: Vec<Vec<usize>> = (0..n_ops)
        .map(|o| pipeline.successors(o).collect())
        .collect();
    let mut by_id: Vec<usize> = (0..n_ops).collect();
    by_id.sort_by(|&a, &b| pipeline.operators()[a].id.cmp(&pipeline.operators()[b].id));
    let mut op_rank = vec![0; n_ops];
    for (rank, &o) in by_id.iter().enumerate() {
        op_rank[o] = rank;
    }
    let latency = |a: usize, b: usize| {
        if member[a] == member[b] {
            sim.l_intra
        } else {
            sim.l_inter
        }
    };
    let mut rng = sim.jitter.map(|j| {
        (
            ChaCha8Rng::seed_from_u64(j.seed.wrapping_add(rep as u64)),
            j.amplitude,
        )
    });

    let mut events: BinaryHeap<Reverse<Event>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |events: &mut BinaryHeap<Reverse<Event>>, time: f64, kind: EventKind| {
        seq += 1;
        events.push(Reverse(Event {
            time: Time(time),
            seq,
            kind,
        }));
    };

    for round in 0..workload.rounds {
        for g in (0..n_ops).filter(|&o| workload.role(o) == OperatorRole::Generator) {
            for &s in &successors[g] {
                push(
                    &mut events,
                    latency(g, s),
                    EventKind::Arrival {
                        op: s,
                        n: workload.base_n,
                        round,
                    },
                );
            }
        }
    }

    let groups = config.groups.len();
    let mut ready: Vec<BinaryHeap<Reverse<Task>>> = vec![BinaryHeap::new(); groups];
    let mut busy = vec![false; groups];
    let mut completion: BTreeMap<String, f64> = BTreeMap::new();
    let mut terminator_messages = 0u64;
    let mut last_event = 0.0f64;
    let mut task_seq = 0u64;
    let mut now = 0.0f64;
    let mut batch = VecDeque::new();

    loop {
        // idle workers pick up queued work
        for g in 0..groups {
            if busy[g] {
                continue;
            }
            if let Some(Reverse(task)) = ready[g].pop() {
                let mut duration = work_units(task.n)? as f64 * sim.t_unit;
                if let Some((rng, amp)) = rng.as_mut() {
                    duration *= rng.gen_range(1.0 - *amp..=1.0 + *amp);
                }
                busy[g] = true;
                push(
                    &mut events,
                    now + duration,
                    EventKind::Finish {
                        group: g,
                        op: task.op,
                        n: task.n,
                        round: task.round,
                    },
                );
            }
        }

        let Some(Reverse(head)) = events.peek() else {
            break;
        };
        now = head.time.0;
        while events.peek().is_some_and(|Reverse(e)| e.time.0 == now) {
            batch.push_back(events.pop().expect("peeked").0);
        }
        last_event = last_event.max(now);

        while let Some(event) = batch.pop_front() {
            match event.kind {
                EventKind::Arrival { op, n, round } => match workload.role(op) {
                    OperatorRole::Terminator => {
                        terminator_messages += 1;
                        completion.insert(pipeline.operators()[op].id.clone(), now);
                    }
                    OperatorRole::Fibonacci => {
                        task_seq += 1;
                        ready[member[op]].push(Reverse(Task {
                            arrival: Time(now),
                            op_rank: op_rank[op],
                            round,
                            seq: task_seq,
                            op,
                            n,
                        }));
                    }
                    // sources never receive messages
                    OperatorRole::Generator => {}
                },
                EventKind::Finish {
                    group,
                    op,
                    n,
                    round,
                } => {
                    busy[group] = false;
                    completion.insert(pipeline.operators()[op].id.clone(), now);
                    let out = n + workload.fib_step;
                    for &s in &successors[op] {
                        let at = now + latency(op, s);
                        if at == now {
                            task_seq += 1;
                            batch.push_back(Event {
                                time: Time(at),
                                seq: task_seq,
                                kind: EventKind::Arrival {
                                    op: s,
                                    n: out,
                                    round,
                                },
                            });
                        } else {
                            push(
                                &mut events,
                                at,
                                EventKind::Arrival {
                                    op: s,
                                    n: out,
                                    round,
                                },
                            );
                        }
                    }
                }
            }
        }
    }

    Ok(SimResult {
        setup_time,
        execution_time: last_event,
        total_time: setup_time + last_event,
        per_operator_completion: completion,
        terminator_messages,
    })
}

/// Runs the same deployment `reps` times; the first run is a cold start.
pub fn run_repetitions(
    config: &GroupingConfig,
    workload: &Workload,
    sim: &SimParams,
    reps: usize,
) -> Result<Vec<SimResult>> {
    if reps == 0 {
        return Err(Error::InvalidParams("reps must be at least 1".into()));
    }
    (0..reps)
        .map(|rep| {
            let cache = if rep == 0 {
                CacheState::COLD
            } else {
                CacheState::WARM
            };
            simulate_rep(config, workload, sim, cache, rep)
        })
        .collect()
}
