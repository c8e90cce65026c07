//! Grouping strategies: two planner weight profiles, a random baseline and
//! the single-group default.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{satisfies, Group, GroupingConfig, Image, Instance, StrategyWeights, Tag};
use crate::planning::{build_grouping_task, solve_optimal, Plan};

pub const UNIVERSAL_IMAGE_ID: &str = "img-universal";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Connection,
    Node,
    Random,
    Default,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Connection,
        StrategyKind::Node,
        StrategyKind::Random,
        StrategyKind::Default,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Connection => "connection",
            StrategyKind::Node => "node",
            StrategyKind::Random => "random",
            StrategyKind::Default => "default",
        }
    }

    /// Weight profile for the planner-backed strategies.
    pub fn weights(self) -> Option<StrategyWeights> {
        match self {
            StrategyKind::Connection => Some(StrategyWeights::CONNECTION),
            StrategyKind::Node => Some(StrategyWeights::NODE),
            _ => None,
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyOutcome {
    pub config: GroupingConfig,
    /// Present for planner-backed strategies.
    pub plan: Option<Plan>,
}

/// Solves the grouping task for the weight profile and translates the plan.
pub fn planned_strategy(
    instance: &Instance,
    weights: StrategyWeights,
) -> Result<(Plan, GroupingConfig)> {
    let task = build_grouping_task(instance, weights, None)?;
    let plan = solve_optimal(&task)?;
    let config = task.plan_to_config(&plan)?;
    Ok((plan, config))
}

pub fn connection_strategy(instance: &Instance) -> Result<GroupingConfig> {
    Ok(planned_strategy(instance, StrategyWeights::CONNECTION)?.1)
}

pub fn node_strategy(instance: &Instance) -> Result<GroupingConfig> {
    Ok(planned_strategy(instance, StrategyWeights::NODE)?.1)
}

/// Repeatedly draws an image uniformly, then a uniform count `m` in
/// `[1, n]` of the `n` ungrouped operators it can host, then `m` of them
/// uniformly without replacement, until every operator is grouped.
pub fn random_strategy(instance: &Instance, seed: u64) -> Result<GroupingConfig> {
    if let Some(op) = instance.first_unsatisfiable() {
        return Err(Error::UnsatisfiableOperator(op.id.clone()));
    }
    let pipeline = &instance.pipeline;
    let images = instance.catalog.images();
    let mut groups: Vec<Group> = pipeline.preassigned().to_vec();
    let taken: BTreeSet<&str> = groups
        .iter()
        .flat_map(|g| g.operators.iter().map(String::as_str))
        .collect();
    let mut ungrouped: Vec<usize> = (0..pipeline.len())
        .filter(|&o| !taken.contains(pipeline.operators()[o].id.as_str()))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_id = 1;
    while !ungrouped.is_empty() {
        let image = &images[rng.gen_range(0..images.len())];
        let hosted: Vec<usize> = ungrouped
            .iter()
            .copied()
            .filter(|&o| satisfies(image, &pipeline.operators()[o]))
            .collect();
        if hosted.is_empty() {
            continue;
        }
        let m = rng.gen_range(1..=hosted.len());
        let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, hosted.len(), m)
            .into_iter()
            .map(|i| hosted[i])
            .collect();
        picked.sort_unstable();
        ungrouped.retain(|o| picked.binary_search(o).is_err());

        let id = fresh_group_id(&groups, &mut next_id);
        let ops = picked
            .iter()
            .map(|&o| pipeline.operators()[o].id.clone())
            .collect();
        groups.push(Group::new(id, ops, image.id.clone()));
    }
    Ok(GroupingConfig::new(groups))
}

/// Every operator outside user groups in a single group. Uses the first
/// catalog image that hosts them all; otherwise, when allowed, a synthetic
/// simulation-only image carrying the union of their tags.
pub fn default_strategy(instance: &Instance, allow_universal: bool) -> Result<GroupingConfig> {
    let pipeline = &instance.pipeline;
    let mut groups: Vec<Group> = pipeline.preassigned().to_vec();
    let taken: BTreeSet<&str> = groups
        .iter()
        .flat_map(|g| g.operators.iter().map(String::as_str))
        .collect();
    let rest: Vec<_> = pipeline
        .operators()
        .iter()
        .filter(|o| !taken.contains(o.id.as_str()))
        .collect();
    if rest.is_empty() {
        return Ok(GroupingConfig::new(groups));
    }

    let ids = rest.iter().map(|o| o.id.clone()).collect();
    let mut next_id = 1;
    let gid = fresh_group_id(&groups, &mut next_id);
    if let Some(img) = instance
        .catalog
        .images()
        .iter()
        .find(|img| rest.iter().all(|o| satisfies(img, o)))
    {
        groups.push(Group::new(gid, ids, img.id.clone()));
        return Ok(GroupingConfig::new(groups));
    }
    if !allow_universal {
        return Err(Error::DefaultInfeasible);
    }

    let union: BTreeSet<Tag> = rest.iter().flat_map(|o| o.tags.iter().cloned()).collect();
    let mut image_id = UNIVERSAL_IMAGE_ID.to_string();
    while instance.catalog.get(&image_id).is_some() {
        image_id.push_str("-sim");
    }
    let universal = Image {
        id: image_id.clone(),
        tags: union,
        simulation_only: true,
    };
    groups.push(Group::new(gid, ids, image_id));
    Ok(GroupingConfig {
        groups,
        synthetic_images: vec![universal],
    })
}

fn fresh_group_id(groups: &[Group], next: &mut usize) -> String {
    loop {
        let id = format!("g{next}");
        *next += 1;
        if groups.iter().all(|g| g.id != id) {
            return id;
        }
    }
}

pub fn run_strategy(
    kind: StrategyKind,
    instance: &Instance,
    seed: u64,
    allow_universal: bool,
) -> Result<StrategyOutcome> {
    match kind {
        StrategyKind::Connection | StrategyKind::Node => {
            let weights = kind.weights().expect("planner strategy");
            let (plan, config) = planned_strategy(instance, weights)?;
            Ok(StrategyOutcome {
                config,
                plan: Some(plan),
            })
        }
        StrategyKind::Random => Ok(StrategyOutcome {
            config: random_strategy(instance, seed)?,
            plan: None,
        }),
        StrategyKind::Default => Ok(StrategyOutcome {
            config: default_strategy(instance, allow_universal)?,
            plan: None,
        }),
    }
}
