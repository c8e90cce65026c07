//! Synthetic Fibonacci pipelines (line and parallel topologies) and their
//! image catalog.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{tags, Edge, Image, ImageCatalog, Instance, Operator, Pipeline, Tag};

pub const DEFAULT_TAG: &str = "golang";
pub const SPECIAL_TAGS: [&str; 3] = ["spt-1", "spt-2", "spt-3"];
pub const LINE_COMPUTING_OPERATORS: usize = 12;
pub const GENERATOR_ID: &str = "generator";
pub const TERMINATOR_ID: &str = "terminator";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Line,
    Parallel,
}

impl Topology {
    pub const ALL: [Topology; 2] = [Topology::Line, Topology::Parallel];

    pub fn name(self) -> &'static str {
        match self {
            Topology::Line => "line",
            Topology::Parallel => "parallel",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Topology::Line),
            "parallel" => Ok(Topology::Parallel),
            other => Err(Error::InvalidParams(format!("unknown topology {other:?}"))),
        }
    }
}

/// How special operators and images are tagged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogMode {
    /// Each image carries exactly one tag and special operators require only
    /// their special tag, so a special operator runs on its own image only.
    #[default]
    Exclusive,
    /// Every image also carries the default tag and special operators keep
    /// it, so one special image can host the whole pipeline.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorkloadParams {
    pub topology: Topology,
    pub special_ops: usize,
    pub fib_step: u32,
    pub base_n: u32,
    pub rounds: u32,
    /// Parallel topology only.
    pub lines: usize,
    /// Parallel topology only.
    pub ops_per_line: usize,
    pub seed: u64,
    #[serde(default)]
    pub catalog: CatalogMode,
}

impl WorkloadParams {
    pub fn new(topology: Topology, special_ops: usize, fib_step: u32, seed: u64) -> Self {
        WorkloadParams {
            topology,
            special_ops,
            fib_step,
            base_n: 5,
            rounds: 5,
            lines: 3,
            ops_per_line: 4,
            seed,
            catalog: CatalogMode::Exclusive,
        }
    }

    pub fn computing_operators(&self) -> usize {
        match self.topology {
            Topology::Line => LINE_COMPUTING_OPERATORS,
            Topology::Parallel => self.lines * self.ops_per_line,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.special_ops == 0 {
            return bad("special_ops must be at least 1".into());
        }
        if self.fib_step == 0 {
            return bad("fib_step must be at least 1".into());
        }
        if self.base_n == 0 {
            return bad("base_n must be at least 1".into());
        }
        if self.topology == Topology::Parallel && (self.lines == 0 || self.ops_per_line == 0) {
            return bad("parallel topology needs at least one line of one operator".into());
        }
        if self.special_ops > self.computing_operators() {
            return bad(format!(
                "special_ops {} exceeds the {} fibonacci operators",
                self.special_ops,
                self.computing_operators()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorRole {
    Generator,
    Fibonacci,
    Terminator,
}

/// A pipeline ready for simulation: the instance plus each operator's role
/// and the Fibonacci message parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workload {
    /// "line", "parallel" or "custom".
    pub label: String,
    pub instance: Instance,
    pub roles: Vec<OperatorRole>,
    pub base_n: u32,
    pub fib_step: u32,
    pub rounds: u32,
    depth: Vec<u32>,
}

impl Workload {
    /// Wraps an arbitrary acyclic pipeline. Sources act as generators,
    /// sinks as terminators, everything else computes Fibonacci numbers.
    pub fn from_instance(
        instance: Instance,
        base_n: u32,
        fib_step: u32,
        rounds: u32,
    ) -> Result<Self> {
        let p = &instance.pipeline;
        let roles = (0..p.len())
            .map(|o| {
                let has_in = p.predecessors(o).next().is_some();
                let has_out = p.successors(o).next().is_some();
                match (has_in, has_out) {
                    (false, _) => OperatorRole::Generator,
                    (true, false) => OperatorRole::Terminator,
                    (true, true) => OperatorRole::Fibonacci,
                }
            })
            .collect();
        Self::with_roles("custom".into(), instance, roles, base_n, fib_step, rounds)
    }

    fn with_roles(
        label: String,
        instance: Instance,
        roles: Vec<OperatorRole>,
        base_n: u32,
        fib_step: u32,
        rounds: u32,
    ) -> Result<Self> {
        if base_n == 0 {
            return Err(Error::InvalidParams("base_n must be at least 1".into()));
        }
        let depth = fib_depths(&instance.pipeline, &roles)?;
        Ok(Workload {
            label,
            instance,
            roles,
            base_n,
            fib_step,
            rounds,
            depth,
        })
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.instance.pipeline
    }

    pub fn catalog(&self) -> &ImageCatalog {
        &self.instance.catalog
    }

    pub fn role(&self, op: usize) -> OperatorRole {
        self.roles[op]
    }

    /// Fibonacci argument received by an operator:
    /// `base_n + depth * fib_step`, depth counting fibonacci predecessors.
    pub fn fib_argument(&self, operator_id: &str) -> Result<u32> {
        let op = self
            .pipeline()
            .index_of(operator_id)
            .filter(|&o| self.roles[o] == OperatorRole::Fibonacci)
            .ok_or_else(|| Error::NotFibonacci(operator_id.to_string()))?;
        Ok(self.base_n + self.depth[op] * self.fib_step)
    }

    /// Fibonacci operators in declaration order.
    pub fn fibonacci_operators(&self) -> Vec<usize> {
        (0..self.roles.len())
            .filter(|&o| self.roles[o] == OperatorRole::Fibonacci)
            .collect()
    }
}

/// Longest chain of fibonacci predecessors per operator. Rejects cycles.
fn fib_depths(p: &Pipeline, roles: &[OperatorRole]) -> Result<Vec<u32>> {
    let n = p.len();
    let mut indegree = vec![0usize; n];
    for &(_, b) in p.edge_indices() {
        indegree[b] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&o| indegree[o] == 0).collect();
    let mut depth = vec![0u32; n];
    let mut seen = 0;
    while let Some(o) = queue.pop() {
        seen += 1;
        let carried = depth[o] + u32::from(roles[o] == OperatorRole::Fibonacci);
        for s in p.successors(o).collect::<Vec<_>>() {
            if roles[o] == OperatorRole::Fibonacci || roles[s] == OperatorRole::Fibonacci {
                depth[s] = depth[s].max(carried);
            }
            indegree[s] -= 1;
            if indegree[s] == 0 {
                queue.push(s);
            }
        }
    }
    if seen != n {
        return Err(Error::InvalidPipeline("pipeline has a cycle".into()));
    }
    Ok(depth)
}

pub fn image_catalog(mode: CatalogMode) -> ImageCatalog {
    let mut images = vec![Image::new("img-default", tags([DEFAULT_TAG]))];
    for t in SPECIAL_TAGS {
        let image_tags = match mode {
            CatalogMode::Exclusive => tags([t]),
            CatalogMode::Literal => tags([DEFAULT_TAG, t]),
        };
        images.push(Image::new(format!("img-{t}"), image_tags));
    }
    ImageCatalog::new(images).expect("static catalog")
}

/// Builds the topology, tags special operators and returns it with the
/// image catalog.
pub fn generate_pipeline(params: &WorkloadParams) -> Result<Workload> {
    params.validate()?;
    let default_op = |id: String| Operator::new(id, DEFAULT_TAG, tags([DEFAULT_TAG]));

    let mut ops = vec![default_op(GENERATOR_ID.into())];
    let mut roles = vec![OperatorRole::Generator];
    let mut edges = Vec::new();

    let chains: Vec<Vec<String>> = match params.topology {
        Topology::Line => vec![(1..=LINE_COMPUTING_OPERATORS)
            .map(|i| format!("fib-{i}"))
            .collect()],
        Topology::Parallel => (1..=params.lines)
            .map(|l| {
                (1..=params.ops_per_line)
                    .map(|i| format!("fib-{l}-{i}"))
                    .collect()
            })
            .collect(),
    };
    for chain in &chains {
        for id in chain {
            ops.push(default_op(id.clone()));
            roles.push(OperatorRole::Fibonacci);
        }
    }
    ops.push(default_op(TERMINATOR_ID.into()));
    roles.push(OperatorRole::Terminator);

    for chain in &chains {
        edges.push(Edge::new(GENERATOR_ID, chain[0].clone()));
    }
    for chain in &chains {
        for pair in chain.windows(2) {
            edges.push(Edge::new(pair[0].clone(), pair[1].clone()));
        }
    }
    for chain in &chains {
        edges.push(Edge::new(chain[chain.len() - 1].clone(), TERMINATOR_ID));
    }
    edges.push(Edge::new(GENERATOR_ID, TERMINATOR_ID));

    let plain = Pipeline::new(ops, edges, vec![])?;
    let pipeline = assign_special_tags(
        &plain,
        &roles,
        params.special_ops,
        params.seed,
        params.catalog,
    )?;
    Workload::with_roles(
        params.topology.name().into(),
        Instance::new(pipeline, image_catalog(params.catalog)),
        roles,
        params.base_n,
        params.fib_step,
        params.rounds,
    )
}

/// Picks `n` distinct fibonacci operators uniformly at random and gives the
/// i-th pick the tag `spt-(i mod 3 + 1)`.
pub fn assign_special_tags(
    pipeline: &Pipeline,
    roles: &[OperatorRole],
    n: usize,
    seed: u64,
    mode: CatalogMode,
) -> Result<Pipeline> {
    let fibs: Vec<usize> = (0..pipeline.len())
        .filter(|&o| roles[o] == OperatorRole::Fibonacci)
        .collect();
    if n == 0 {
        return Err(Error::InvalidParams(
            "at least one special operator is required".into(),
        ));
    }
    if n > fibs.len() {
        return Err(Error::InvalidParams(format!(
            "{n} special operators requested but only {} fibonacci operators exist",
            fibs.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, fibs.len(), n);
    let mut out = pipeline.clone();
    for (i, pick) in picks.iter().enumerate() {
        let special = SPECIAL_TAGS[i % SPECIAL_TAGS.len()];
        let new_tags: BTreeSet<Tag> = match mode {
            CatalogMode::Exclusive => tags([special]),
            CatalogMode::Literal => tags([DEFAULT_TAG, special]),
        };
        out = out.with_operator_tags(fibs[pick], new_tags)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::satisfies;

    fn special_tags_of(w: &Workload) -> Vec<String> {
        let mut out: Vec<String> = w
            .pipeline()
            .operators()
            .iter()
            .flat_map(|o| o.tags.iter())
            .filter(|t| t.as_str() != DEFAULT_TAG)
            .map(|t| t.to_string())
            .collect();
        out.sort();
        out
    }

    #[test]
    fn line_defaults() {
        let w = generate_pipeline(&WorkloadParams::new(Topology::Line, 1, 1, 7)).unwrap();
        assert_eq!(w.pipeline().len(), 14);
        assert_eq!(w.pipeline().edges().len(), 14);
        assert_eq!(special_tags_of(&w), vec!["spt-1"]);
    }

    #[test]
    fn parallel_defaults() {
        let w = generate_pipeline(&WorkloadParams::new(Topology::Parallel, 2, 1, 7)).unwrap();
        assert_eq!(w.pipeline().len(), 14);
        assert_eq!(w.pipeline().edges().len(), 16);
        assert_eq!(w.fibonacci_operators().len(), 12);
    }

    #[test]
    fn special_tag_cycling() {
        let w = generate_pipeline(&WorkloadParams::new(Topology::Line, 3, 1, 3)).unwrap();
        assert_eq!(special_tags_of(&w), vec!["spt-1", "spt-2", "spt-3"]);
        let w = generate_pipeline(&WorkloadParams::new(Topology::Line, 4, 1, 3)).unwrap();
        assert_eq!(
            special_tags_of(&w),
            vec!["spt-1", "spt-1", "spt-2", "spt-3"]
        );
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(generate_pipeline(&WorkloadParams::new(Topology::Line, 0, 1, 1)).is_err());
        assert!(generate_pipeline(&WorkloadParams::new(Topology::Line, 13, 1, 1)).is_err());
        assert!(generate_pipeline(&WorkloadParams::new(Topology::Line, 1, 0, 1)).is_err());
    }

    #[test]
    fn generator_and_terminator_stay_default() {
        for seed in 0..50 {
            let w =
                generate_pipeline(&WorkloadParams::new(Topology::Parallel, 12, 1, seed)).unwrap();
            let p = w.pipeline();
            assert_eq!(p.operator(GENERATOR_ID).unwrap().tags, tags([DEFAULT_TAG]));
            assert_eq!(p.operator(TERMINATOR_ID).unwrap().tags, tags([DEFAULT_TAG]));
        }
    }

    #[test]
    fn exactly_one_image_per_operator_in_exclusive_mode() {
        let w = generate_pipeline(&WorkloadParams::new(Topology::Line, 4, 2, 9)).unwrap();
        for op in w.pipeline().operators() {
            let hosts = w
                .catalog()
                .images()
                .iter()
                .filter(|i| satisfies(i, op))
                .count();
            assert_eq!(hosts, 1, "{}", op.id);
        }
    }

    #[test]
    fn fib_arguments() {
        let w = generate_pipeline(&WorkloadParams::new(Topology::Line, 1, 3, 1)).unwrap();
        assert_eq!(w.fib_argument("fib-1").unwrap(), 5);
        assert_eq!(w.fib_argument("fib-3").unwrap(), 11);
        let w = generate_pipeline(&WorkloadParams::new(Topology::Line, 1, 1, 1)).unwrap();
        assert_eq!(w.fib_argument("fib-12").unwrap(), 16);
        assert!(matches!(
            w.fib_argument(GENERATOR_ID),
            Err(Error::NotFibonacci(_))
        ));
        let w = generate_pipeline(&WorkloadParams::new(Topology::Parallel, 1, 2, 1)).unwrap();
        for l in 1..=3 {
            assert_eq!(w.fib_argument(&format!("fib-{l}-1")).unwrap(), 5);
            assert_eq!(w.fib_argument(&format!("fib-{l}-4")).unwrap(), 11);
        }
    }

    #[test]
    fn deterministic_bytes() {
        let p = WorkloadParams::new(Topology::Parallel, 4, 2, 42);
        let a = generate_pipeline(&p).unwrap().pipeline().to_json().unwrap();
        let b = generate_pipeline(&p).unwrap().pipeline().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn roles_inferred_for_custom_pipelines() {
        let p = Pipeline::new(
            ["a", "b", "c"]
                .iter()
                .map(|i| Operator::new(*i, "go", tags([DEFAULT_TAG])))
                .collect(),
            vec![Edge::new("a", "b"), Edge::new("b", "c")],
            vec![],
        )
        .unwrap();
        let w = Workload::from_instance(
            Instance::new(p, image_catalog(CatalogMode::Exclusive)),
            5,
            1,
            1,
        )
        .unwrap();
        assert_eq!(
            w.roles,
            vec![
                OperatorRole::Generator,
                OperatorRole::Fibonacci,
                OperatorRole::Terminator
            ]
        );
        assert_eq!(w.fib_argument("b").unwrap(), 5);

        let cyclic = Pipeline::new(
            ["a", "b", "c"]
                .iter()
                .map(|i| Operator::new(*i, "go", tags([DEFAULT_TAG])))
                .collect(),
            vec![
                Edge::new("a", "b"),
                Edge::new("b", "c"),
                Edge::new("c", "b"),
            ],
            vec![],
        )
        .unwrap();
        assert!(Workload::from_instance(
            Instance::new(cyclic, image_catalog(CatalogMode::Exclusive)),
            5,
            1,
            1
        )
        .is_err());
    }
}
