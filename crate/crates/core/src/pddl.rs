//! PDDL export of the grouping task and import of plan files.
//!
//! The domain targets the numeric fragment accepted by common numeric
//! planners. The state-dependent assignment cost is a numeric expression over
//! the `in-group` and `placed` fluents of each neighbour; the built-in solver
//! remains the reference semantics.
//!
//! Plan files hold one `(action arg ...)` per line. Text after `;` is a
//! comment, blank lines are skipped and an optional `<step>:` prefix is
//! accepted. Any cost footer is ignored and the cost is recomputed.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::StrategyWeights;
use crate::planning::{group_name, GroupingAction, GroupingState, GroupingTask, Plan};

pub const DOMAIN_NAME: &str = "pipeline-grouping";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PddlArtifacts {
    pub domain_text: String,
    pub problem_text: String,
}

/// PDDL object names for a task: lowercase tokens, unique across kinds.
struct Names {
    operators: Vec<String>,
    images: Vec<String>,
    tags: Vec<String>,
    groups: Vec<String>,
}

fn pddl_name(raw: &str) -> Result<String> {
    let name = raw.to_lowercase();
    let mut chars = name.chars();
    let ok = chars.next().is_some_and(|c| c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_');
    if ok {
        Ok(name)
    } else {
        Err(Error::PddlName(format!("{raw:?} is not a valid PDDL name")))
    }
}

impl Names {
    fn new(task: &GroupingTask<'_>) -> Result<Self> {
        let inst = task.instance();
        let operators = inst
            .pipeline
            .operators()
            .iter()
            .map(|o| pddl_name(&o.id))
            .collect::<Result<Vec<_>>>()?;
        let images = inst
            .catalog
            .images()
            .iter()
            .map(|i| pddl_name(&i.id))
            .collect::<Result<Vec<_>>>()?;
        let mut tags: Vec<String> = Vec::new();
        let all_tags = inst
            .catalog
            .images()
            .iter()
            .flat_map(|i| i.tags.iter())
            .chain(inst.pipeline.operators().iter().flat_map(|o| o.tags.iter()));
        for t in all_tags {
            let n = pddl_name(t.as_str())?;
            if !tags.contains(&n) {
                tags.push(n);
            }
        }
        tags.sort();
        let groups = (1..=task.max_groups()).map(group_name).collect();
        let names = Names {
            operators,
            images,
            tags,
            groups,
        };
        let mut seen = HashMap::new();
        for (kind, list) in [
            ("operator", &names.operators),
            ("image", &names.images),
            ("tag", &names.tags),
            ("group", &names.groups),
        ] {
            for n in list {
                if let Some(prev) = seen.insert(n.as_str(), kind) {
                    return Err(Error::PddlName(format!(
                        "{n} names both a {prev} and a {kind}"
                    )));
                }
            }
        }
        Ok(names)
    }
}

pub fn emit_pddl(task: &GroupingTask<'_>) -> Result<PddlArtifacts> {
    let names = Names::new(task)?;
    Ok(PddlArtifacts {
        domain_text: emit_domain(&task.weights()),
        problem_text: emit_problem(task, &names),
    })
}

/// The domain fixes the weight profile: it is where the strategy lives.
pub fn emit_domain(w: &StrategyWeights) -> String {
    format!(
        r#"; operator grouping with state-dependent assignment costs
; weights: intra {intra}, inter {inter}, group {group}
(define (domain {DOMAIN_NAME})
  (:requirements :typing :negative-preconditions :disjunctive-preconditions :equality
                 :existential-preconditions :universal-preconditions :conditional-effects
                 :numeric-fluents :action-costs)
  (:types operator image tag group)
  (:predicates
    (requires ?o - operator ?t - tag)
    (supports ?i - image ?t - tag)
    (edge ?a - operator ?b - operator)
    (op-after ?a - operator ?b - operator)
    (first-group ?g - group)
    (group-after ?a - group ?b - group)
    (reserved ?g - group)
    (reserved-image ?g - group ?i - image)
    (preassigned ?o - operator)
    (fixed ?o - operator ?g - group)
    (next ?o - operator)
    (created ?g - group)
    (pending ?g - group)
    (group-supports ?g - group ?t - tag)
    (assigned ?o - operator))
  (:functions
    (total-cost)
    (in-group ?o - operator ?g - group)
    (placed ?o - operator))
  (:action create-group
    :parameters (?g - group ?i - image)
    :precondition (and
      (not (created ?g))
      (or (first-group ?g) (exists (?p - group) (and (group-after ?p ?g) (created ?p))))
      (not (exists (?x - group) (pending ?x)))
      (imply (reserved ?g) (reserved-image ?g ?i)))
    :effect (and
      (created ?g)
      (when (not (reserved ?g)) (pending ?g))
      (forall (?t - tag) (when (supports ?i ?t) (group-supports ?g ?t)))
      (increase (total-cost) {group})))
  (:action assign-operator
    :parameters (?o - operator ?g - group)
    :precondition (and
      (next ?o)
      (created ?g)
      (forall (?x - group) (imply (pending ?x) (= ?x ?g)))
      (imply (preassigned ?o) (fixed ?o ?g))
      (imply (not (preassigned ?o)) (not (reserved ?g)))
      (forall (?t - tag) (imply (requires ?o ?t) (group-supports ?g ?t))))
    :effect (and
      (assigned ?o)
      (not (next ?o))
      (not (pending ?g))
      (forall (?n - operator) (when (op-after ?o ?n) (next ?n)))
      (forall (?n - operator)
        (when (or (edge ?o ?n) (edge ?n ?o))
          (increase (total-cost)
            (+ (* {intra} (in-group ?n ?g)) (* {inter} (- (placed ?n) (in-group ?n ?g)))))))
      (assign (in-group ?o ?g) 1)
      (assign (placed ?o) 1)))
)
"#,
        intra = w.intra,
        inter = w.inter,
        group = w.group_cost,
    )
}

fn emit_problem(task: &GroupingTask<'_>, names: &Names) -> String {
    let inst = task.instance();
    let ops = inst.pipeline.operators();
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem grouping-{}-operators)", ops.len());
    let _ = writeln!(s, "  (:domain {DOMAIN_NAME})");
    s.push_str("  (:objects\n");
    for (list, ty) in [
        (&names.operators, "operator"),
        (&names.images, "image"),
        (&names.tags, "tag"),
        (&names.groups, "group"),
    ] {
        if !list.is_empty() {
            let _ = writeln!(s, "    {} - {ty}", list.join(" "));
        }
    }
    s.push_str("  )\n  (:init\n");
    for (o, op) in ops.iter().enumerate() {
        for t in &op.tags {
            let _ = writeln!(
                s,
                "    (requires {} {})",
                names.operators[o],
                t.as_str().to_lowercase()
            );
        }
    }
    for (i, img) in inst.catalog.images().iter().enumerate() {
        for t in &img.tags {
            let _ = writeln!(
                s,
                "    (supports {} {})",
                names.images[i],
                t.as_str().to_lowercase()
            );
        }
    }
    for &(a, b) in inst.pipeline.edge_indices() {
        let _ = writeln!(
            s,
            "    (edge {} {})",
            names.operators[a], names.operators[b]
        );
    }
    if let Some(first) = names.operators.first() {
        let _ = writeln!(s, "    (next {first})");
    }
    for pair in names.operators.windows(2) {
        let _ = writeln!(s, "    (op-after {} {})", pair[0], pair[1]);
    }
    if let Some(first) = names.groups.first() {
        let _ = writeln!(s, "    (first-group {first})");
    }
    for pair in names.groups.windows(2) {
        let _ = writeln!(s, "    (group-after {} {})", pair[0], pair[1]);
    }
    for r in 1..=task.reserved_groups() {
        let g = &names.groups[r - 1];
        let img = &names.images[task.reserved_image(r).expect("reserved")];
        let _ = writeln!(s, "    (reserved {g})");
        let _ = writeln!(s, "    (reserved-image {g} {img})");
    }
    for (o, name) in names.operators.iter().enumerate() {
        if let Some(r) = task.fixed_group(o) {
            let _ = writeln!(s, "    (preassigned {name})");
            let _ = writeln!(s, "    (fixed {name} {})", names.groups[r - 1]);
        }
    }
    s.push_str("    (= (total-cost) 0)\n");
    for o in &names.operators {
        let _ = writeln!(s, "    (= (placed {o}) 0)");
    }
    for o in &names.operators {
        for g in &names.groups {
            let _ = writeln!(s, "    (= (in-group {o} {g}) 0)");
        }
    }
    s.push_str("  )\n  (:goal (and\n");
    for o in &names.operators {
        let _ = writeln!(s, "    (assigned {o})");
    }
    s.push_str("    (not (exists (?g - group) (pending ?g)))))\n");
    s.push_str("  (:metric minimize (total-cost))\n)\n");
    s
}

/// Writes `domain.pddl` and `problem.pddl` into `dir`.
pub fn write_artifacts(artifacts: &PddlArtifacts, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let domain = dir.join("domain.pddl");
    let problem = dir.join("problem.pddl");
    fs::write(&domain, &artifacts.domain_text).map_err(|e| Error::io(&domain, e))?;
    fs::write(&problem, &artifacts.problem_text).map_err(|e| Error::io(&problem, e))?;
    Ok((domain, problem))
}

/// Plan text in the import grammar, with a cost footer comment.
pub fn serialize_plan(plan: &Plan, task: &GroupingTask<'_>) -> Result<String> {
    let names = Names::new(task)?;
    let mut s = String::new();
    for step in &plan.steps {
        match *step {
            GroupingAction::CreateGroup { group, image } => {
                let _ = writeln!(
                    s,
                    "(create-group {} {})",
                    names.groups[group - 1],
                    names.images[image]
                );
            }
            GroupingAction::AssignOperator { operator, group } => {
                let _ = writeln!(
                    s,
                    "(assign-operator {} {})",
                    names.operators[operator],
                    names.groups[group - 1]
                );
            }
        }
    }
    let _ = writeln!(s, "; cost = {}", plan.total_cost);
    Ok(s)
}

/// Parses and validates a plan file against the task. Errors carry the
/// 1-based line number of the offending line.
pub fn parse_plan(text: &str, task: &GroupingTask<'_>) -> Result<Plan> {
    let names = Names::new(task)?;
    let index = |list: &[String]| -> HashMap<String, usize> {
        list.iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect()
    };
    let ops = index(&names.operators);
    let images = index(&names.images);
    let groups = index(&names.groups);

    let mut state = GroupingState::initial();
    let mut steps = Vec::new();
    let mut total = 0;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let err = |message: String| Error::PlanLine { line, message };
        let body = raw.split(';').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let body = strip_step_prefix(body);
        let inner = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| err(format!("expected one parenthesised action, found {body:?}")))?;
        if inner.contains(['(', ')']) {
            return Err(err("nested expressions are not allowed".into()));
        }
        let tokens: Vec<String> = inner.split_whitespace().map(str::to_lowercase).collect();
        let Some((name, args)) = tokens.split_first() else {
            return Err(err("empty action".into()));
        };
        let lookup = |map: &HashMap<String, usize>, kind: &str, tok: &String| {
            map.get(tok)
                .copied()
                .ok_or_else(|| err(format!("unknown {kind} {tok}")))
        };
        let action = match name.as_str() {
            "create-group" | "assign-operator" if args.len() != 2 => {
                return Err(err(format!("{name} takes 2 arguments, got {}", args.len())));
            }
            "create-group" => GroupingAction::CreateGroup {
                group: lookup(&groups, "group", &args[0])? + 1,
                image: lookup(&images, "image", &args[1])?,
            },
            "assign-operator" => GroupingAction::AssignOperator {
                operator: lookup(&ops, "operator", &args[0])?,
                group: lookup(&groups, "group", &args[1])? + 1,
            },
            other => return Err(err(format!("unknown action {other}"))),
        };
        let (next, cost) = task
            .check_step(&state, &action)
            .map_err(|reason| err(format!("inapplicable {body}: {reason}")))?;
        state = next;
        total += cost;
        steps.push(action);
    }
    if !task.is_goal(&state) {
        return Err(Error::PlanLine {
            line: last_line.max(1),
            message: "plan ends before every operator is assigned".into(),
        });
    }
    Ok(Plan {
        steps,
        total_cost: total,
    })
}

fn strip_step_prefix(body: &str) -> &str {
    match body.split_once(':') {
        Some((step, rest))
            if !step.is_empty() && step.trim().chars().all(|c| c.is_ascii_digit() || c == '.') =>
        {
            rest.trim()
        }
        _ => body,
    }
}

/// Balanced parentheses with exactly one top-level form, ignoring comments.
pub fn is_well_formed(text: &str) -> bool {
    let mut depth = 0i64;
    let mut forms = 0;
    for line in text.lines() {
        let code = line.split(';').next().unwrap_or("");
        for c in code.chars() {
            match c {
                '(' => {
                    if depth == 0 {
                        forms += 1;
                    }
                    depth += 1;
                }
                ')' => {
                    depth -= 1;
                    if depth < 0 {
                        return false;
                    }
                }
                _ => {}
            }
        }
    }
    depth == 0 && forms == 1
}
