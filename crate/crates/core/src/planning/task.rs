//! The grouping task: operators are assigned one at a time, in declaration
//! order, to groups created in index order. Assigning an operator costs the
//! intra- or inter-group weight for every neighbour already placed, so each
//! edge is charged exactly once, when its second endpoint is assigned.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::formalism::{self, ActionCost, ActionInstance, Condition, Fact, State};
use crate::error::{Error, Result};
use crate::model::{satisfies, Cost, Group, GroupingConfig, Instance, StrategyWeights};

/// One grounded action of the grouping task. Group numbers are 1-based;
/// `image` and `operator` index the catalog and the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum GroupingAction {
    CreateGroup { group: usize, image: usize },
    AssignOperator { operator: usize, group: usize },
}

impl GroupingAction {
    pub fn name(&self) -> &'static str {
        match self {
            GroupingAction::CreateGroup { .. } => "create-group",
            GroupingAction::AssignOperator { .. } => "assign-operator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<GroupingAction>,
    pub total_cost: Cost,
}

pub fn group_name(group: usize) -> String {
    format!("g{group}")
}

/// Canonical search state. Groups are numbered contiguously from 1 and
/// operators are placed in declaration order, so `assignment` is a prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupingState {
    pub(crate) assignment: Vec<u16>,
    pub(crate) group_images: Vec<u16>,
    pub(crate) group_sizes: Vec<u16>,
}

impl GroupingState {
    pub fn initial() -> Self {
        GroupingState {
            assignment: Vec::new(),
            group_images: Vec::new(),
            group_sizes: Vec::new(),
        }
    }

    /// Index of the lowest unassigned operator.
    pub fn next_operator(&self) -> usize {
        self.assignment.len()
    }

    pub fn created(&self) -> usize {
        self.group_images.len()
    }

    /// Group of an assigned operator.
    pub fn group_of(&self, op: usize) -> Option<usize> {
        self.assignment.get(op).map(|&g| g as usize)
    }

    pub fn image_of(&self, group: usize) -> Option<usize> {
        self.group_images
            .get(group.wrapping_sub(1))
            .map(|&i| i as usize)
    }

    /// Duplicate-detection key: group images then the assignment prefix.
    pub(crate) fn key(&self) -> Vec<u16> {
        let mut k = Vec::with_capacity(1 + self.group_images.len() + self.assignment.len());
        k.push(self.group_images.len() as u16);
        k.extend_from_slice(&self.group_images);
        k.extend_from_slice(&self.assignment);
        k
    }
}

/// Planning instance for one pipeline, catalog and weight profile.
#[derive(Debug, Clone)]
pub struct GroupingTask<'a> {
    pub(crate) instance: &'a Instance,
    pub(crate) weights: StrategyWeights,
    pub(crate) max_groups: usize,
    /// Reserved group number (1-based) for pre-assigned operators.
    pub(crate) fixed: Vec<Option<usize>>,
    /// Catalog index of each reserved group's image.
    pub(crate) reserved_images: Vec<usize>,
    /// `compat[image][op]`
    pub(crate) compat: Vec<Vec<bool>>,
    /// Catalog indices ordered by image id.
    pub(crate) image_order: Vec<usize>,
}

pub fn build_grouping_task(
    instance: &Instance,
    weights: StrategyWeights,
    max_groups: Option<usize>,
) -> Result<GroupingTask<'_>> {
    let pipeline = &instance.pipeline;
    let catalog = &instance.catalog;
    if catalog.is_empty() {
        return Err(Error::InvalidCatalog("image catalog is empty".into()));
    }
    if catalog.len() > u16::MAX as usize {
        return Err(Error::InvalidCatalog("too many images".into()));
    }
    if let Some(op) = instance.first_unsatisfiable() {
        return Err(Error::UnsatisfiableOperator(op.id.clone()));
    }

    let mut fixed = vec![None; pipeline.len()];
    let mut reserved_images = Vec::new();
    for (r, g) in pipeline.preassigned().iter().enumerate() {
        let image = catalog.position(&g.image).ok_or_else(|| {
            Error::InvalidPipeline(format!(
                "pre-assigned group {} uses image {} which is not in the catalog",
                g.id, g.image
            ))
        })?;
        for op_id in &g.operators {
            let op = pipeline.index_of(op_id).expect("validated pipeline");
            if !satisfies(&catalog.images()[image], &pipeline.operators()[op]) {
                return Err(Error::InvalidPipeline(format!(
                    "pre-assigned group {}: image {} does not satisfy {}",
                    g.id, g.image, op_id
                )));
            }
            fixed[op] = Some(r + 1);
        }
        reserved_images.push(image);
    }

    let reserved = reserved_images.len();
    let free_ops = fixed.iter().filter(|f| f.is_none()).count();
    let max_groups = max_groups.unwrap_or(reserved + free_ops).max(reserved);
    if max_groups == 0 && !pipeline.is_empty() {
        return Err(Error::InvalidParams("max_groups must be at least 1".into()));
    }
    if max_groups > u16::MAX as usize {
        return Err(Error::InvalidParams("max_groups too large".into()));
    }

    let compat = catalog
        .images()
        .iter()
        .map(|img| {
            pipeline
                .operators()
                .iter()
                .map(|op| satisfies(img, op))
                .collect()
        })
        .collect();
    let mut image_order: Vec<usize> = (0..catalog.len()).collect();
    image_order.sort_by(|&a, &b| catalog.images()[a].id.cmp(&catalog.images()[b].id));

    Ok(GroupingTask {
        instance,
        weights,
        max_groups,
        fixed,
        reserved_images,
        compat,
        image_order,
    })
}

impl<'a> GroupingTask<'a> {
    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn weights(&self) -> StrategyWeights {
        self.weights
    }

    pub fn max_groups(&self) -> usize {
        self.max_groups
    }

    pub fn reserved_groups(&self) -> usize {
        self.reserved_images.len()
    }

    pub fn operator_count(&self) -> usize {
        self.instance.pipeline.len()
    }

    /// The reserved group an operator is pinned to, if any.
    pub fn fixed_group(&self, op: usize) -> Option<usize> {
        self.fixed[op]
    }

    pub fn reserved_image(&self, group: usize) -> Option<usize> {
        self.reserved_images.get(group.wrapping_sub(1)).copied()
    }

    pub(crate) fn supports(&self, image: usize, op: usize) -> bool {
        self.compat[image][op]
    }

    /// The group created last when it is a free group still awaiting its
    /// first operator.
    pub fn pending_group(&self, state: &GroupingState) -> Option<usize> {
        let created = state.created();
        (created > self.reserved_groups() && state.group_sizes[created - 1] == 0).then_some(created)
    }

    pub fn is_goal(&self, state: &GroupingState) -> bool {
        state.next_operator() == self.operator_count()
            && state.created() >= self.reserved_groups()
            && self.pending_group(state).is_none()
    }

    pub fn action_label(&self, action: &GroupingAction) -> String {
        match *action {
            GroupingAction::CreateGroup { group, image } => {
                let img = self
                    .instance
                    .catalog
                    .images()
                    .get(image)
                    .map_or("?", |i| i.id.as_str());
                format!("(create-group {} {img})", group_name(group))
            }
            GroupingAction::AssignOperator { operator, group } => {
                let op = self
                    .instance
                    .pipeline
                    .operators()
                    .get(operator)
                    .map_or("?", |o| o.id.as_str());
                format!("(assign-operator {op} {})", group_name(group))
            }
        }
    }

    /// Cost of assigning `op` to `group` in `state`.
    pub(crate) fn assign_cost(&self, state: &GroupingState, op: usize, group: usize) -> Cost {
        self.instance
            .pipeline
            .neighbors(op)
            .iter()
            .filter_map(|&n| state.group_of(n))
            .map(|g| self.weights.edge_cost(g == group))
            .sum()
    }

    /// Applies one action under the task's preconditions. The error string
    /// names the failed precondition.
    pub(crate) fn check_step(
        &self,
        state: &GroupingState,
        action: &GroupingAction,
    ) -> std::result::Result<(GroupingState, Cost), String> {
        let created = state.created();
        let pending = self.pending_group(state);
        match *action {
            GroupingAction::CreateGroup { group, image } => {
                if group == 0 || group > self.max_groups {
                    return Err(format!("no group object {}", group_name(group)));
                }
                if image >= self.instance.catalog.len() {
                    return Err(format!("unknown image index {image}"));
                }
                if group != created + 1 {
                    return Err(format!(
                        "groups are created in index order; next is {}",
                        group_name(created + 1)
                    ));
                }
                if let Some(p) = pending {
                    return Err(format!("{} has no operator yet", group_name(p)));
                }
                if let Some(r) = self.reserved_image(group) {
                    if r != image {
                        return Err(format!(
                            "{} is reserved for image {}",
                            group_name(group),
                            self.instance.catalog.images()[r].id
                        ));
                    }
                }
                let mut next = state.clone();
                next.group_images.push(image as u16);
                next.group_sizes.push(0);
                Ok((next, self.weights.group_cost))
            }
            GroupingAction::AssignOperator { operator, group } => {
                if operator >= self.operator_count() {
                    return Err(format!("unknown operator index {operator}"));
                }
                if operator != state.next_operator() {
                    return Err(format!(
                        "{} is not the lowest unassigned operator",
                        self.instance.pipeline.operators()[operator].id
                    ));
                }
                if group == 0 || group > created {
                    return Err(format!("{} does not exist", group_name(group)));
                }
                if let Some(p) = pending {
                    if p != group {
                        return Err(format!("{} has no operator yet", group_name(p)));
                    }
                }
                match self.fixed[operator] {
                    Some(r) if r != group => {
                        return Err(format!("operator is pinned to {}", group_name(r)))
                    }
                    None if group <= self.reserved_groups() => {
                        return Err(format!("{} is a pre-assigned group", group_name(group)))
                    }
                    _ => {}
                }
                let image = state.group_images[group - 1] as usize;
                if !self.supports(image, operator) {
                    return Err(format!(
                        "image {} does not satisfy the operator's tags",
                        self.instance.catalog.images()[image].id
                    ));
                }
                let cost = self.assign_cost(state, operator, group);
                let mut next = state.clone();
                next.assignment.push(group as u16);
                next.group_sizes[group - 1] += 1;
                Ok((next, cost))
            }
        }
    }

    pub fn apply_step(
        &self,
        state: &GroupingState,
        action: &GroupingAction,
    ) -> Result<(GroupingState, Cost)> {
        self.check_step(state, action)
            .map_err(|reason| Error::InapplicableAction {
                action: self.action_label(action),
                reason,
            })
    }

    /// Executes the steps from the initial state and checks the goal.
    pub fn replay(&self, steps: &[GroupingAction]) -> Result<(GroupingState, Cost)> {
        let mut state = GroupingState::initial();
        let mut total = 0;
        for (i, a) in steps.iter().enumerate() {
            let (next, c) = self.check_step(&state, a).map_err(|reason| {
                Error::InvalidPlan(format!("step {} {}: {reason}", i + 1, self.action_label(a)))
            })?;
            state = next;
            total += c;
        }
        if !self.is_goal(&state) {
            return Err(Error::InvalidPlan(
                "plan does not reach the goal (every operator assigned, no empty group)".into(),
            ));
        }
        Ok((state, total))
    }

    pub fn plan_cost(&self, plan: &Plan) -> Result<Cost> {
        Ok(self.replay(&plan.steps)?.1)
    }

    /// Translates a plan into the grouping it induces. Group `k` becomes
    /// `g<k>` with its operators in declaration order.
    pub fn plan_to_config(&self, plan: &Plan) -> Result<GroupingConfig> {
        let (state, _) = self.replay(&plan.steps)?;
        Ok(self.state_to_config(&state))
    }

    pub(crate) fn state_to_config(&self, state: &GroupingState) -> GroupingConfig {
        let ops = self.instance.pipeline.operators();
        let images = self.instance.catalog.images();
        let groups = (1..=state.created())
            .map(|k| {
                let members = state
                    .assignment
                    .iter()
                    .enumerate()
                    .filter(|(_, &g)| g as usize == k)
                    .map(|(o, _)| ops[o].id.clone())
                    .collect();
                Group::new(
                    group_name(k),
                    members,
                    images[state.group_images[k - 1] as usize].id.clone(),
                )
            })
            .collect();
        GroupingConfig::new(groups)
    }

    /// The forced plan that rebuilds a given config: reserved groups first,
    /// then a group is created just before its first operator is assigned.
    pub fn config_to_plan(&self, config: &GroupingConfig) -> Result<Plan> {
        let member = self.instance.membership(config)?;
        let catalog = &self.instance.catalog;
        let mut mapped: Vec<Option<usize>> = vec![None; config.groups.len()];
        let mut steps = Vec::new();

        for (r, pre) in self.instance.pipeline.preassigned().iter().enumerate() {
            let first = self
                .instance
                .pipeline
                .index_of(&pre.operators[0])
                .expect("validated");
            let cg = member[first];
            let same_ops: BTreeSet<&String> = config.groups[cg].operators.iter().collect();
            let want: BTreeSet<&String> = pre.operators.iter().collect();
            if same_ops != want || config.groups[cg].image != pre.image {
                return Err(Error::InvalidPlan(format!(
                    "config does not preserve pre-assigned group {}",
                    pre.id
                )));
            }
            mapped[cg] = Some(r + 1);
            steps.push(GroupingAction::CreateGroup {
                group: r + 1,
                image: self.reserved_images[r],
            });
        }

        let mut next_group = self.reserved_groups() + 1;
        for (op, &cg) in member.iter().enumerate() {
            let group = match mapped[cg] {
                Some(g) => g,
                None => {
                    let image = catalog.position(&config.groups[cg].image).ok_or_else(|| {
                        Error::InvalidPlan(format!(
                            "image {} is not in the catalog",
                            config.groups[cg].image
                        ))
                    })?;
                    steps.push(GroupingAction::CreateGroup {
                        group: next_group,
                        image,
                    });
                    mapped[cg] = Some(next_group);
                    next_group += 1;
                    next_group - 1
                }
            };
            steps.push(GroupingAction::AssignOperator {
                operator: op,
                group,
            });
        }

        let (_, total_cost) = self.replay(&steps)?;
        Ok(Plan { steps, total_cost })
    }

    fn group_fact(pred: &str, group: usize) -> Fact {
        Fact::new(pred, [group_name(group)])
    }

    /// Initial state in the ground formalism: only the first operator is
    /// marked as next.
    pub fn initial_state(&self) -> State {
        self.instance
            .pipeline
            .operators()
            .first()
            .map(|op| Fact::new("next", [op.id.clone()]))
            .into_iter()
            .collect()
    }

    pub fn goal(&self) -> Condition {
        let positive = self
            .instance
            .pipeline
            .operators()
            .iter()
            .map(|op| Fact::new("assigned", [op.id.clone()]))
            .collect();
        let negative = (1..=self.max_groups)
            .map(|j| Self::group_fact("pending", j))
            .collect();
        Condition::new(positive, negative).expect("disjoint predicates")
    }

    /// Grounds an action into the generic formalism. Fails when no such
    /// ground action exists (pinned operators, reserved images, group
    /// numbers past `max_groups`).
    pub fn ground(&self, action: &GroupingAction) -> Result<ActionInstance> {
        let unknown = |why: &str| Error::InapplicableAction {
            action: self.action_label(action),
            reason: why.to_string(),
        };
        let ops = self.instance.pipeline.operators();
        let images = self.instance.catalog.images();
        match *action {
            GroupingAction::CreateGroup { group, image } => {
                if group == 0 || group > self.max_groups || image >= images.len() {
                    return Err(unknown("no such ground action"));
                }
                if self.reserved_image(group).is_some_and(|r| r != image) {
                    return Err(unknown("reserved group bound to another image"));
                }
                let mut pos = BTreeSet::new();
                if group > 1 {
                    pos.insert(Self::group_fact("created", group - 1));
                }
                let mut neg: BTreeSet<Fact> = (1..=self.max_groups)
                    .map(|j| Self::group_fact("pending", j))
                    .collect();
                neg.insert(Self::group_fact("created", group));
                let mut add: BTreeSet<Fact> = images[image]
                    .tags
                    .iter()
                    .map(|t| Fact::new("supports", [group_name(group), t.to_string()]))
                    .collect();
                add.insert(Self::group_fact("created", group));
                if group > self.reserved_groups() {
                    add.insert(Self::group_fact("pending", group));
                }
                ActionInstance::new(
                    "create-group",
                    vec![group_name(group), images[image].id.clone()],
                    Condition::new(pos, neg)?,
                    add,
                    BTreeSet::new(),
                    ActionCost::Constant(self.weights.group_cost),
                )
            }
            GroupingAction::AssignOperator { operator, group } => {
                if operator >= ops.len() || group == 0 || group > self.max_groups {
                    return Err(unknown("no such ground action"));
                }
                match self.fixed[operator] {
                    Some(r) if r != group => return Err(unknown("operator pinned elsewhere")),
                    None if group <= self.reserved_groups() => {
                        return Err(unknown("group reserved for pre-assigned operators"))
                    }
                    _ => {}
                }
                let op = &ops[operator];
                let gname = group_name(group);
                let mut pos: BTreeSet<Fact> = op
                    .tags
                    .iter()
                    .map(|t| Fact::new("supports", [gname.clone(), t.to_string()]))
                    .collect();
                pos.insert(Fact::new("next", [op.id.clone()]));
                pos.insert(Self::group_fact("created", group));
                let neg = (1..=self.max_groups)
                    .filter(|&j| j != group)
                    .map(|j| Self::group_fact("pending", j))
                    .collect();
                let mut add = BTreeSet::from([
                    Fact::new("assigned", [op.id.clone()]),
                    Fact::new("in", [op.id.clone(), gname.clone()]),
                ]);
                if let Some(succ) = ops.get(operator + 1) {
                    add.insert(Fact::new("next", [succ.id.clone()]));
                }
                let del = BTreeSet::from([
                    Fact::new("next", [op.id.clone()]),
                    Self::group_fact("pending", group),
                ]);

                let neighbours: Vec<String> = self
                    .instance
                    .pipeline
                    .neighbors(operator)
                    .iter()
                    .map(|&n| ops[n].id.clone())
                    .collect();
                let w = self.weights;
                let cost = move |s: &State| -> Cost {
                    neighbours
                        .iter()
                        .map(|n| {
                            if s.contains(&Fact::new("in", [n.clone(), gname.clone()])) {
                                w.intra
                            } else if s.contains(&Fact::new("assigned", [n.clone()])) {
                                w.inter
                            } else {
                                0
                            }
                        })
                        .sum()
                };
                ActionInstance::new(
                    "assign-operator",
                    vec![op.id.clone(), group_name(group)],
                    Condition::new(pos, neg)?,
                    add,
                    del,
                    ActionCost::StateDependent(Arc::new(cost)),
                )
            }
        }
    }

    pub fn ground_plan(&self, plan: &Plan) -> Result<Vec<ActionInstance>> {
        plan.steps.iter().map(|a| self.ground(a)).collect()
    }

    /// Plan cost computed through the ground formalism, independently of
    /// the search-state semantics.
    pub fn formal_plan_cost(&self, plan: &Plan) -> Result<Cost> {
        let ground = self.ground_plan(plan)?;
        formalism::validate_plan(&self.initial_state(), &ground, &self.goal())
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "plan of {} steps, cost {}",
            self.steps.len(),
            self.total_cost
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{tags, Edge, Image, ImageCatalog, Operator, Pipeline};

    fn instance(n: usize, edges: &[(usize, usize)]) -> Instance {
        let ops = (0..n)
            .map(|i| Operator::new(format!("op{}", i + 1), "golang", tags(["golang"])))
            .collect();
        let edges = edges
            .iter()
            .map(|&(a, b)| Edge::new(format!("op{}", a + 1), format!("op{}", b + 1)))
            .collect();
        let p = Pipeline::new(ops, edges, vec![]).unwrap();
        let c = ImageCatalog::new(vec![
            Image::new("img-default", tags(["golang"])),
            Image::new("img-wide", tags(["golang", "x"])),
        ])
        .unwrap();
        Instance::new(p, c)
    }

    use GroupingAction::*;

    #[test]
    fn line_plan_cost_matches_objective() {
        let inst = instance(3, &[(0, 1), (1, 2)]);
        let task = build_grouping_task(&inst, StrategyWeights::CONNECTION, None).unwrap();
        let steps = vec![
            CreateGroup { group: 1, image: 0 },
            AssignOperator {
                operator: 0,
                group: 1,
            },
            AssignOperator {
                operator: 1,
                group: 1,
            },
            AssignOperator {
                operator: 2,
                group: 1,
            },
        ];
        let plan = Plan {
            total_cost: task.replay(&steps).unwrap().1,
            steps,
        };
        assert_eq!(plan.total_cost, 60);
        assert_eq!(task.formal_plan_cost(&plan).unwrap(), 60);
        let cfg = task.plan_to_config(&plan).unwrap();
        assert_eq!(
            inst.objective_cost(&cfg, &StrategyWeights::CONNECTION)
                .unwrap(),
            60
        );
        assert_eq!(task.config_to_plan(&cfg).unwrap(), plan);
    }

    #[test]
    fn preconditions_enforced() {
        let inst = instance(2, &[(0, 1)]);
        let task = build_grouping_task(&inst, StrategyWeights::CONNECTION, Some(2)).unwrap();
        let s0 = GroupingState::initial();
        // assign before any group exists
        assert!(task
            .apply_step(
                &s0,
                &AssignOperator {
                    operator: 0,
                    group: 1
                }
            )
            .is_err());
        // groups out of order
        assert!(task
            .apply_step(&s0, &CreateGroup { group: 2, image: 0 })
            .is_err());
        let (s1, c) = task
            .apply_step(&s0, &CreateGroup { group: 1, image: 0 })
            .unwrap();
        assert_eq!(c, 50);
        // pending group must receive the next operator before another create
        assert!(task
            .apply_step(&s1, &CreateGroup { group: 2, image: 0 })
            .is_err());
        // operators in declaration order
        assert!(task
            .apply_step(
                &s1,
                &AssignOperator {
                    operator: 1,
                    group: 1
                }
            )
            .is_err());
        let (s2, _) = task
            .apply_step(
                &s1,
                &AssignOperator {
                    operator: 0,
                    group: 1,
                },
            )
            .unwrap();
        let (s3, _) = task
            .apply_step(&s2, &CreateGroup { group: 2, image: 1 })
            .unwrap();
        assert!(task
            .apply_step(&s3, &CreateGroup { group: 3, image: 0 })
            .is_err());
        let (s4, c) = task
            .apply_step(
                &s3,
                &AssignOperator {
                    operator: 1,
                    group: 2,
                },
            )
            .unwrap();
        assert_eq!(c, 20);
        assert!(task.is_goal(&s4));
    }

    #[test]
    fn trailing_empty_group_is_not_a_goal() {
        let inst = instance(1, &[]);
        let task = build_grouping_task(&inst, StrategyWeights::CONNECTION, Some(2)).unwrap();
        let steps = [
            CreateGroup { group: 1, image: 0 },
            AssignOperator {
                operator: 0,
                group: 1,
            },
            CreateGroup { group: 2, image: 0 },
        ];
        assert!(matches!(task.replay(&steps), Err(Error::InvalidPlan(_))));
        let ground: Vec<_> = steps.iter().map(|a| task.ground(a).unwrap()).collect();
        assert!(formalism::validate_plan(&task.initial_state(), &ground, &task.goal()).is_err());
    }

    #[test]
    fn unsatisfiable_operator_named() {
        let p = Pipeline::new(
            vec![Operator::new("special", "golang", tags(["spt-9"]))],
            vec![],
            vec![],
        )
        .unwrap();
        let c = ImageCatalog::new(vec![Image::new("img-default", tags(["golang"]))]).unwrap();
        let inst = Instance::new(p, c);
        match build_grouping_task(&inst, StrategyWeights::CONNECTION, None) {
            Err(Error::UnsatisfiableOperator(op)) => assert_eq!(op, "special"),
            other => panic!("expected unsatisfiable operator, got {other:?}"),
        }
    }

    #[test]
    fn preassigned_groups_are_pinned() {
        let ops = vec![
            Operator::new("a", "go", tags(["golang"])),
            Operator::new("b", "go", tags(["golang"])),
            Operator::new("c", "go", tags(["golang"])),
        ];
        let p = Pipeline::new(
            ops,
            vec![Edge::new("a", "b"), Edge::new("b", "c")],
            vec![Group::new("mine", vec!["b".into()], "img-default")],
        )
        .unwrap();
        let c = ImageCatalog::new(vec![Image::new("img-default", tags(["golang"]))]).unwrap();
        let inst = Instance::new(p, c);
        let task = build_grouping_task(&inst, StrategyWeights::CONNECTION, None).unwrap();
        assert_eq!(task.reserved_groups(), 1);
        assert_eq!(task.fixed_group(1), Some(1));
        // free operator may not join the reserved group
        let s = task
            .apply_step(
                &GroupingState::initial(),
                &CreateGroup { group: 1, image: 0 },
            )
            .unwrap()
            .0;
        assert!(task
            .apply_step(
                &s,
                &AssignOperator {
                    operator: 0,
                    group: 1
                }
            )
            .is_err());
        assert!(task
            .ground(&AssignOperator {
                operator: 0,
                group: 1
            })
            .is_err());
        assert!(task
            .ground(&AssignOperator {
                operator: 1,
                group: 2
            })
            .is_err());
    }
}
