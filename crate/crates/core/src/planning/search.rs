//! Uniform-cost search over canonical grouping states.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use super::task::{GroupingAction, GroupingState, GroupingTask, Plan};
use crate::error::{Error, Result};
use crate::model::Cost;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchOptions {
    /// Adds an admissible bound: every edge whose later endpoint is still
    /// unassigned will cost at least the intra-group weight. Turns the
    /// search into A*. Off by default.
    pub lower_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub plan: Plan,
    pub expanded: usize,
    pub generated: usize,
}

struct Node {
    state: GroupingState,
    g: Cost,
    parent: Option<usize>,
    action: Option<GroupingAction>,
}

/// Minimal-cost plan for the task.
pub fn solve_optimal(task: &GroupingTask<'_>) -> Result<Plan> {
    Ok(solve_with(task, SearchOptions::default())?.plan)
}

pub fn solve_with(task: &GroupingTask<'_>, options: SearchOptions) -> Result<SearchOutcome> {
    let bound = EdgeBound::new(task, options.lower_bound);
    let mut nodes = vec![Node {
        state: GroupingState::initial(),
        g: 0,
        parent: None,
        action: None,
    }];
    let mut best: HashMap<Vec<u16>, Cost> = HashMap::new();
    best.insert(nodes[0].state.key(), 0);
    // (f, insertion order, node); insertion order makes ties FIFO, and
    // successors are inserted in lexicographic action order.
    let mut open = BinaryHeap::new();
    let mut seq: u64 = 0;
    open.push(Reverse((bound.h(&nodes[0].state), seq, 0usize)));

    let mut expanded = 0;
    let mut successors = Vec::new();
    while let Some(Reverse((_, _, id))) = open.pop() {
        let g = nodes[id].g;
        if best.get(&nodes[id].state.key()).is_some_and(|&b| b < g) {
            continue;
        }
        if task.is_goal(&nodes[id].state) {
            return Ok(SearchOutcome {
                plan: reconstruct(&nodes, id),
                expanded,
                generated: nodes.len(),
            });
        }
        expanded += 1;

        candidate_actions(task, &nodes[id].state, &mut successors);
        for action in successors.drain(..) {
            let Ok((child, cost)) = task.check_step(&nodes[id].state, &action) else {
                continue;
            };
            let g2 = g + cost;
            match best.entry(child.key()) {
                Entry::Occupied(mut e) => {
                    if *e.get() <= g2 {
                        continue;
                    }
                    e.insert(g2);
                }
                Entry::Vacant(e) => {
                    e.insert(g2);
                }
            }
            let f = g2 + bound.h(&child);
            nodes.push(Node {
                state: child,
                g: g2,
                parent: Some(id),
                action: Some(action),
            });
            seq += 1;
            open.push(Reverse((f, seq, nodes.len() - 1)));
        }
    }
    Err(Error::NoPlan)
}

/// Actions worth trying from `state`, in lexicographic order (action name,
/// then arguments). Creating a group whose image cannot host the next
/// operator is skipped: the empty group could never be filled.
fn candidate_actions(
    task: &GroupingTask<'_>,
    state: &GroupingState,
    out: &mut Vec<GroupingAction>,
) {
    let created = state.created();
    let reserved = task.reserved_groups();
    if created < reserved {
        out.push(GroupingAction::CreateGroup {
            group: created + 1,
            image: task.reserved_image(created + 1).expect("reserved group"),
        });
        return;
    }
    let op = state.next_operator();
    if op >= task.operator_count() {
        return;
    }
    if let Some(g) = task.pending_group(state) {
        out.push(GroupingAction::AssignOperator {
            operator: op,
            group: g,
        });
        return;
    }
    if let Some(r) = task.fixed_group(op) {
        out.push(GroupingAction::AssignOperator {
            operator: op,
            group: r,
        });
        return;
    }
    for group in reserved + 1..=created {
        if task.supports(state.group_images[group - 1] as usize, op) {
            out.push(GroupingAction::AssignOperator {
                operator: op,
                group,
            });
        }
    }
    if created < task.max_groups() {
        for &image in &task.image_order {
            if task.supports(image, op) {
                out.push(GroupingAction::CreateGroup {
                    group: created + 1,
                    image,
                });
            }
        }
    }
}

fn reconstruct(nodes: &[Node], goal: usize) -> Plan {
    let mut steps = Vec::new();
    let mut cur = Some(goal);
    while let Some(id) = cur {
        if let Some(a) = nodes[id].action {
            steps.push(a);
        }
        cur = nodes[id].parent;
    }
    steps.reverse();
    Plan {
        steps,
        total_cost: nodes[goal].g,
    }
}

struct EdgeBound {
    enabled: bool,
    intra: Cost,
    group_cost: Cost,
    reserved: usize,
    /// `unpaid[i]`: edges whose later endpoint has index >= i.
    unpaid: Vec<Cost>,
}

impl EdgeBound {
    fn new(task: &GroupingTask<'_>, enabled: bool) -> Self {
        let n = task.operator_count();
        let mut by_later = vec![0 as Cost; n + 1];
        for &(a, b) in task.instance().pipeline.edge_indices() {
            by_later[a.max(b)] += 1;
        }
        let mut unpaid = vec![0; n + 1];
        for i in (0..n).rev() {
            unpaid[i] = unpaid[i + 1] + by_later[i];
        }
        let w = task.weights();
        EdgeBound {
            enabled,
            intra: w.intra.min(w.inter),
            group_cost: w.group_cost,
            reserved: task.reserved_groups(),
            unpaid,
        }
    }

    fn h(&self, state: &GroupingState) -> Cost {
        if !self.enabled {
            return 0;
        }
        let missing = self.reserved.saturating_sub(state.created()) as Cost;
        self.unpaid[state.next_operator()] * self.intra + missing * self.group_cost
    }
}
