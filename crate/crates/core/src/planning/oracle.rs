//! Exhaustive reference solver: enumerates every set partition of the
//! operators (restricted growth strings) and keeps the cheapest feasible one.

use crate::error::{Error, Result};
use crate::model::{satisfies, Cost, Group, GroupingConfig, Instance, StrategyWeights};

pub const DEFAULT_ORACLE_CAP: usize = 10;

pub fn brute_force_grouping(
    instance: &Instance,
    weights: &StrategyWeights,
) -> Result<(GroupingConfig, Cost)> {
    brute_force_grouping_capped(instance, weights, DEFAULT_ORACLE_CAP)
}

pub fn brute_force_grouping_capped(
    instance: &Instance,
    weights: &StrategyWeights,
    cap: usize,
) -> Result<(GroupingConfig, Cost)> {
    let pipeline = &instance.pipeline;
    let n = pipeline.len();
    if n > cap {
        return Err(Error::TooLargeForOracle { operators: n, cap });
    }

    // pre-assigned operators: (group label, image) that must match exactly
    let mut pinned: Vec<Option<usize>> = vec![None; n];
    let mut pinned_images = Vec::new();
    for (r, g) in pipeline.preassigned().iter().enumerate() {
        for op in &g.operators {
            pinned[pipeline.index_of(op).expect("validated")] = Some(r);
        }
        pinned_images.push(
            instance
                .catalog
                .position(&g.image)
                .ok_or(Error::Unsatisfiable)?,
        );
    }

    let mut best: Option<(Vec<usize>, Vec<usize>, Cost)> = None;
    let mut labels = vec![0usize; n];
    for_each_partition(&mut labels, &mut |labels: &[usize]| {
        let blocks = labels.iter().copied().max().map_or(0, |m| m + 1);
        let Some(images) = feasible_images(instance, labels, blocks, &pinned, &pinned_images)
        else {
            return;
        };
        let mut cost = weights.group_cost * blocks as Cost;
        for &(a, b) in pipeline.edge_indices() {
            cost += if labels[a] == labels[b] {
                weights.intra
            } else {
                weights.inter
            };
        }
        if best.as_ref().is_none_or(|(_, _, c)| cost < *c) {
            best = Some((labels.to_vec(), images, cost));
        }
    });

    let (labels, images, cost) = best.ok_or(Error::Unsatisfiable)?;
    let blocks = images.len();
    let groups = (0..blocks)
        .map(|b| {
            let ops = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == b)
                .map(|(o, _)| pipeline.operators()[o].id.clone())
                .collect();
            Group::new(
                format!("g{}", b + 1),
                ops,
                instance.catalog.images()[images[b]].id.clone(),
            )
        })
        .collect();
    Ok((GroupingConfig::new(groups), cost))
}

/// First catalog image per block that hosts all of its operators, honouring
/// pre-assigned groups. `None` if some block has no such image.
fn feasible_images(
    instance: &Instance,
    labels: &[usize],
    blocks: usize,
    pinned: &[Option<usize>],
    pinned_images: &[usize],
) -> Option<Vec<usize>> {
    let ops = instance.pipeline.operators();
    let mut images = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let members: Vec<usize> = (0..labels.len()).filter(|&o| labels[o] == b).collect();
        let pins: Vec<Option<usize>> = members.iter().map(|&o| pinned[o]).collect();
        let image = match pins[0] {
            Some(r) => {
                // block must be exactly the pre-assigned group
                let exact = pins.iter().all(|p| *p == Some(r))
                    && pinned.iter().filter(|p| **p == Some(r)).count() == members.len();
                if !exact {
                    return None;
                }
                pinned_images[r]
            }
            None => {
                if pins.iter().any(Option::is_some) {
                    return None;
                }
                instance
                    .catalog
                    .images()
                    .iter()
                    .position(|img| members.iter().all(|&o| satisfies(img, &ops[o])))?
            }
        };
        if members
            .iter()
            .any(|&o| !satisfies(&instance.catalog.images()[image], &ops[o]))
        {
            return None;
        }
        images.push(image);
    }
    Some(images)
}

/// Calls `f` with every restricted growth string of length `labels.len()`.
fn for_each_partition(labels: &mut [usize], f: &mut impl FnMut(&[usize])) {
    fn rec(labels: &mut [usize], pos: usize, max: usize, f: &mut impl FnMut(&[usize])) {
        if pos == labels.len() {
            f(labels);
            return;
        }
        let upper = if pos == 0 { 0 } else { max + 1 };
        for l in 0..=upper {
            labels[pos] = l;
            rec(labels, pos + 1, max.max(l), f);
        }
    }
    rec(labels, 0, 0, f);
}
