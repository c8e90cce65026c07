//! Pipeline formalism: operators, tags, images, groups and edges, plus the
//! validation rules and the grouping objective shared by every strategy.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact integer cost units used by the objective and the planner.
pub type Cost = u64;

/// A named runtime requirement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Tag(String);

impl Tag {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidPipeline(format!(
                "tag {name:?} must be a non-empty token"
            )));
        }
        Ok(Tag(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Tag {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Tag::new(value)
    }
}

impl From<Tag> for String {
    fn from(tag: Tag) -> String {
        tag.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Builds a tag set from string literals. Panics on an empty or whitespace
/// token, so it is meant for fixed vocabularies.
pub fn tags<I, S>(names: I) -> BTreeSet<Tag>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names
        .into_iter()
        .map(|n| Tag::new(n).expect("tag literal"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operator {
    pub id: String,
    /// Metadata only; executability is expressed through tags.
    #[serde(default)]
    pub sdk: String,
    pub tags: BTreeSet<Tag>,
}

impl Operator {
    pub fn new(id: impl Into<String>, sdk: impl Into<String>, tags: BTreeSet<Tag>) -> Self {
        Operator {
            id: id.into(),
            sdk: sdk.into(),
            tags,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Image {
    pub id: String,
    pub tags: BTreeSet<Tag>,
    /// Set on synthetic images that exist only for simulation (the universal
    /// image of the single-group baseline). Not deployable.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub simulation_only: bool,
}

impl Image {
    pub fn new(id: impl Into<String>, tags: BTreeSet<Tag>) -> Self {
        Image {
            id: id.into(),
            tags,
            simulation_only: false,
        }
    }
}

/// True iff every tag the operator requires is supported by the image.
pub fn satisfies(image: &Image, operator: &Operator) -> bool {
    operator.tags.is_subset(&image.tags)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub id: String,
    pub operators: Vec<String>,
    pub image: String,
}

impl Group {
    pub fn new(id: impl Into<String>, operators: Vec<String>, image: impl Into<String>) -> Self {
        Group {
            id: id.into(),
            operators,
            image: image.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PipelineDoc {
    operators: Vec<Operator>,
    edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    groups: Vec<Group>,
}

/// A validated data pipeline. Operator order is the declaration order and is
/// significant: the planner assigns operators in this order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PipelineDoc", into = "PipelineDoc")]
pub struct Pipeline {
    operators: Vec<Operator>,
    edges: Vec<Edge>,
    groups: Vec<Group>,
    index: HashMap<String, usize>,
    edge_index: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl PartialEq for Pipeline {
    fn eq(&self, other: &Self) -> bool {
        self.operators == other.operators
            && self.edges == other.edges
            && self.groups == other.groups
    }
}

impl Eq for Pipeline {}

impl Pipeline {
    pub fn new(operators: Vec<Operator>, edges: Vec<Edge>, groups: Vec<Group>) -> Result<Self> {
        let mut index = HashMap::with_capacity(operators.len());
        for (i, op) in operators.iter().enumerate() {
            if op.id.is_empty() {
                return Err(Error::InvalidPipeline("operator with empty id".into()));
            }
            if op.tags.is_empty() {
                return Err(Error::InvalidPipeline(format!(
                    "operator {} has no required tags",
                    op.id
                )));
            }
            if index.insert(op.id.clone(), i).is_some() {
                return Err(Error::InvalidPipeline(format!(
                    "duplicate operator id {}",
                    op.id
                )));
            }
        }

        let mut seen = HashSet::with_capacity(edges.len());
        let mut edge_index = Vec::with_capacity(edges.len());
        let mut neighbors = vec![Vec::new(); operators.len()];
        for e in &edges {
            let (Some(&a), Some(&b)) = (index.get(&e.from), index.get(&e.to)) else {
                return Err(Error::InvalidPipeline(format!(
                    "edge {} -> {} references an unknown operator",
                    e.from, e.to
                )));
            };
            if a == b {
                return Err(Error::InvalidPipeline(format!("self-loop on {}", e.from)));
            }
            if !seen.insert((a, b)) {
                return Err(Error::InvalidPipeline(format!(
                    "duplicate edge {} -> {}",
                    e.from, e.to
                )));
            }
            edge_index.push((a, b));
            neighbors[a].push(b);
            neighbors[b].push(a);
        }

        let mut owner: HashMap<&str, &str> = HashMap::new();
        let mut group_ids = HashSet::new();
        for g in &groups {
            if !group_ids.insert(g.id.as_str()) {
                return Err(Error::InvalidPipeline(format!(
                    "duplicate group id {}",
                    g.id
                )));
            }
            if g.operators.is_empty() {
                return Err(Error::InvalidPipeline(format!("group {} is empty", g.id)));
            }
            for op in &g.operators {
                if !index.contains_key(op) {
                    return Err(Error::InvalidPipeline(format!(
                        "group {} references unknown operator {op}",
                        g.id
                    )));
                }
                if let Some(prev) = owner.insert(op.as_str(), g.id.as_str()) {
                    return Err(Error::InvalidPipeline(format!(
                        "operator {op} pre-assigned to both {prev} and {}",
                        g.id
                    )));
                }
            }
        }

        Ok(Pipeline {
            operators,
            edges,
            groups,
            index,
            edge_index,
            neighbors,
        })
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// User pre-assigned groups; treated as hard constraints.
    pub fn preassigned(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn operator(&self, id: &str) -> Option<&Operator> {
        self.index_of(id).map(|i| &self.operators[i])
    }

    /// Edges as (from, to) operator indices, in declaration order.
    pub fn edge_indices(&self) -> &[(usize, usize)] {
        &self.edge_index
    }

    /// Undirected adjacency by operator index.
    pub fn neighbors(&self, op: usize) -> &[usize] {
        &self.neighbors[op]
    }

    pub fn successors(&self, op: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_index
            .iter()
            .filter(move |(a, _)| *a == op)
            .map(|&(_, b)| b)
    }

    pub fn predecessors(&self, op: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_index
            .iter()
            .filter(move |(_, b)| *b == op)
            .map(|&(a, _)| a)
    }

    /// Returns a copy with the operator's tag set replaced.
    pub fn with_operator_tags(&self, op: usize, tags: BTreeSet<Tag>) -> Result<Pipeline> {
        let mut operators = self.operators.clone();
        operators[op].tags = tags;
        Pipeline::new(operators, self.edges.clone(), self.groups.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl TryFrom<PipelineDoc> for Pipeline {
    type Error = Error;

    fn try_from(doc: PipelineDoc) -> Result<Self> {
        Pipeline::new(doc.operators, doc.edges, doc.groups)
    }
}

impl From<Pipeline> for PipelineDoc {
    fn from(p: Pipeline) -> Self {
        PipelineDoc {
            operators: p.operators,
            edges: p.edges,
            groups: p.groups,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogDoc {
    images: Vec<Image>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CatalogDoc", into = "CatalogDoc")]
pub struct ImageCatalog {
    images: Vec<Image>,
}

impl ImageCatalog {
    pub fn new(images: Vec<Image>) -> Result<Self> {
        let mut ids = HashSet::new();
        for img in &images {
            if img.id.is_empty() {
                return Err(Error::InvalidCatalog("image with empty id".into()));
            }
            if img.tags.is_empty() {
                return Err(Error::InvalidCatalog(format!(
                    "image {} has no tags",
                    img.id
                )));
            }
            if !ids.insert(img.id.as_str()) {
                return Err(Error::InvalidCatalog(format!(
                    "duplicate image id {}",
                    img.id
                )));
            }
        }
        Ok(ImageCatalog { images })
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    pub fn get(&self, id: &str) -> Option<&Image> {
        self.images.iter().find(|i| i.id == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.images.iter().position(|i| i.id == id)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl TryFrom<CatalogDoc> for ImageCatalog {
    type Error = Error;

    fn try_from(doc: CatalogDoc) -> Result<Self> {
        ImageCatalog::new(doc.images)
    }
}

impl From<ImageCatalog> for CatalogDoc {
    fn from(c: ImageCatalog) -> Self {
        CatalogDoc { images: c.images }
    }
}

/// A complete grouping: every operator in exactly one group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingConfig {
    pub groups: Vec<Group>,
    /// Images referenced by groups that are not part of the catalog (the
    /// simulation-only universal image).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub synthetic_images: Vec<Image>,
}

impl GroupingConfig {
    pub fn new(groups: Vec<Group>) -> Self {
        GroupingConfig {
            groups,
            synthetic_images: Vec::new(),
        }
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Distinct image ids in first-use order.
    pub fn distinct_images(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.groups
            .iter()
            .filter(|g| seen.insert(g.image.as_str()))
            .map(|g| g.image.as_str())
            .collect()
    }

    /// True when any group runs on a simulation-only image.
    pub fn is_simulation_only(&self) -> bool {
        self.groups.iter().any(|g| {
            self.synthetic_images
                .iter()
                .any(|i| i.id == g.image && i.simulation_only)
        })
    }

    /// Canonical form for equality checks that ignore group naming and
    /// ordering: sorted (sorted operator list, image) pairs.
    pub fn canonical(&self) -> Vec<(Vec<String>, String)> {
        let mut out: Vec<(Vec<String>, String)> = self
            .groups
            .iter()
            .map(|g| {
                let mut ops = g.operators.clone();
                ops.sort();
                (ops, g.image.clone())
            })
            .collect();
        out.sort();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyWeights {
    pub intra: Cost,
    pub inter: Cost,
    pub group_cost: Cost,
}

impl StrategyWeights {
    /// Connection profile: inter-group links are expensive, groups cost a
    /// medium amount.
    pub const CONNECTION: StrategyWeights = StrategyWeights {
        intra: 5,
        inter: 20,
        group_cost: 50,
    };

    /// Node profile: links cost the same either way, groups are very
    /// expensive.
    pub const NODE: StrategyWeights = StrategyWeights {
        intra: 5,
        inter: 5,
        group_cost: 1000,
    };

    pub fn new(intra: Cost, inter: Cost, group_cost: Cost) -> Result<Self> {
        if inter < intra {
            return Err(Error::InvalidParams(format!(
                "inter-group weight {inter} below intra-group weight {intra}"
            )));
        }
        Ok(StrategyWeights {
            intra,
            inter,
            group_cost,
        })
    }

    /// Cost of one edge given whether both endpoints share a group.
    pub fn edge_cost(&self, same_group: bool) -> Cost {
        if same_group {
            self.intra
        } else {
            self.inter
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingOperator {
        operator: String,
    },
    DuplicateAssignment {
        operator: String,
        groups: Vec<String>,
    },
    UnknownOperator {
        group: String,
        operator: String,
    },
    UnknownImage {
        group: String,
        image: String,
    },
    TagUnsatisfied {
        group: String,
        operator: String,
        image: String,
    },
    EmptyGroup {
        group: String,
    },
    DuplicateGroupId {
        group: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingOperator { operator } => {
                write!(f, "operator {operator} is in no group")
            }
            Violation::DuplicateAssignment { operator, groups } => {
                write!(
                    f,
                    "duplicate assignment of {operator} to {}",
                    groups.join(", ")
                )
            }
            Violation::UnknownOperator { group, operator } => {
                write!(f, "group {group} references unknown operator {operator}")
            }
            Violation::UnknownImage { group, image } => {
                write!(f, "group {group} references unknown image {image}")
            }
            Violation::TagUnsatisfied {
                group,
                operator,
                image,
            } => write!(
                f,
                "tag unsatisfied: {operator} cannot run on {image} in group {group}"
            ),
            Violation::EmptyGroup { group } => write!(f, "group {group} is empty"),
            Violation::DuplicateGroupId { group } => write!(f, "group id {group} used twice"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let msg = self
            .violations
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::InvalidConfig(msg))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub intra: usize,
    pub inter: usize,
}

/// A pipeline together with the images it may be deployed on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub pipeline: Pipeline,
    pub catalog: ImageCatalog,
}

impl Instance {
    pub fn new(pipeline: Pipeline, catalog: ImageCatalog) -> Self {
        Instance { pipeline, catalog }
    }

    /// Resolves an image id against the catalog, then the config's synthetic
    /// images.
    pub fn resolve_image<'a>(&'a self, config: &'a GroupingConfig, id: &str) -> Option<&'a Image> {
        self.catalog
            .get(id)
            .or_else(|| config.synthetic_images.iter().find(|i| i.id == id))
    }

    pub fn validate_config(&self, config: &GroupingConfig) -> ValidationReport {
        let mut violations = Vec::new();
        let mut owners: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        let mut group_ids = HashSet::new();

        for g in &config.groups {
            if !group_ids.insert(g.id.as_str()) {
                violations.push(Violation::DuplicateGroupId {
                    group: g.id.clone(),
                });
            }
            if g.operators.is_empty() {
                violations.push(Violation::EmptyGroup {
                    group: g.id.clone(),
                });
            }
            let image = self.resolve_image(config, &g.image);
            if image.is_none() {
                violations.push(Violation::UnknownImage {
                    group: g.id.clone(),
                    image: g.image.clone(),
                });
            }
            for op_id in &g.operators {
                let Some(op) = self.pipeline.operator(op_id) else {
                    violations.push(Violation::UnknownOperator {
                        group: g.id.clone(),
                        operator: op_id.clone(),
                    });
                    continue;
                };
                owners.entry(op_id.as_str()).or_default().push(g.id.clone());
                if let Some(image) = image {
                    if !satisfies(image, op) {
                        violations.push(Violation::TagUnsatisfied {
                            group: g.id.clone(),
                            operator: op_id.clone(),
                            image: image.id.clone(),
                        });
                    }
                }
            }
        }

        for op in self.pipeline.operators() {
            match owners.get(op.id.as_str()) {
                None => violations.push(Violation::MissingOperator {
                    operator: op.id.clone(),
                }),
                Some(groups) if groups.len() > 1 => {
                    violations.push(Violation::DuplicateAssignment {
                        operator: op.id.clone(),
                        groups: groups.clone(),
                    })
                }
                Some(_) => {}
            }
        }

        ValidationReport { violations }
    }

    /// Group index per operator index. Requires a valid config.
    pub fn membership(&self, config: &GroupingConfig) -> Result<Vec<usize>> {
        self.validate_config(config).into_result()?;
        let mut member = vec![usize::MAX; self.pipeline.len()];
        for (gi, g) in config.groups.iter().enumerate() {
            for op in &g.operators {
                // validated above
                member[self.pipeline.index_of(op).expect("known operator")] = gi;
            }
        }
        Ok(member)
    }

    pub fn edge_counts(&self, config: &GroupingConfig) -> Result<EdgeCounts> {
        let member = self.membership(config)?;
        let mut counts = EdgeCounts::default();
        for &(a, b) in self.pipeline.edge_indices() {
            if member[a] == member[b] {
                counts.intra += 1;
            } else {
                counts.inter += 1;
            }
        }
        Ok(counts)
    }

    /// `group_cost * |groups| + intra * |intra edges| + inter * |inter edges|`.
    pub fn objective_cost(&self, config: &GroupingConfig, w: &StrategyWeights) -> Result<Cost> {
        let counts = self.edge_counts(config)?;
        Ok(w.group_cost * config.groups.len() as Cost
            + w.intra * counts.intra as Cost
            + w.inter * counts.inter as Cost)
    }

    /// First operator (declaration order) that no catalog image satisfies.
    pub fn first_unsatisfiable(&self) -> Option<&Operator> {
        self.pipeline
            .operators()
            .iter()
            .find(|op| !self.catalog.images().iter().any(|img| satisfies(img, op)))
    }
}
