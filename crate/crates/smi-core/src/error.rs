//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by validation and enumeration.
///
/// Every variant carries enough data to name the offending item; the CLI
/// maps variants onto machine-readable codes and exit statuses.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("self-loop at vertex `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("empty graph")]
    EmptyGraph,

    #[error("multiplication table is not square: row {row} has length {len}, order is {order}")]
    TableNotSquare { row: usize, len: usize, order: usize },
    #[error("table entry out of range: {0}*{1} = {2}")]
    TableEntryOutOfRange(usize, usize, usize),
    #[error("identity law fails: {0}*{1} != {1}")]
    IdentityLawFails(usize, usize),
    #[error("no inverse for element {0}")]
    NoInverse(usize),
    #[error("associativity fails on ({0}, {1}, {2})")]
    AssociativityFails(usize, usize, usize),
    #[error("group order must be positive")]
    EmptyGroup,

    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("element index {elem} out of range for group of order {order}")]
    ElementOutOfRange { elem: usize, order: usize },
    #[error("unknown element name `{0}`")]
    UnknownElement(String),
    #[error("identity syllable at vertex `{0}`")]
    IdentitySyllable(String),
    #[error("vertex group mismatch at `{vertex}`: source and target tables differ away from the base vertex")]
    VertexGroupMismatch { vertex: String },

    #[error("ball truncation cap exceeded: {size} elements at radius {radius}, cap {cap}")]
    TruncationCap { size: usize, radius: usize, cap: usize },

    #[error("weight of point `{point}` is {weight}, must be positive")]
    NonPositiveWeight { point: String, weight: String },
    #[error("weights sum to {got}, expected 1")]
    WeightSum { got: String },
    #[error("empty probability space")]
    EmptySpace,
    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    #[error("element {elem} does not act as a permutation: points {p} and {q} both map to {image}")]
    NotAPermutation { elem: usize, p: usize, q: usize, image: usize },
    #[error("action is not weight-preserving: element {elem} sends `{from}` (weight {wfrom}) to `{to}` (weight {wto})")]
    NotWeightPreserving { elem: usize, from: String, wfrom: String, to: String, wto: String },
    #[error("action law fails on ({g}, {h}) at point `{point}`")]
    ActionLawFails { g: usize, h: usize, point: String },
    #[error("generators do not generate the group: element {0} unreached")]
    NotGenerating(usize),
    #[error("cocycle inconsistent: extending to element {elem} via generator {gen} at point `{point}` gives {got}, previously {expected}")]
    CocycleInconsistent { elem: usize, gen: usize, point: String, got: usize, expected: usize },
    #[error("cocycle identity fails on ({g}, {h}) at point `{point}`")]
    CocycleIdentityFails { g: usize, h: usize, point: String },

    #[error("cocycle system is not SMI-certified: {0}")]
    NotCertified(String),
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("actions do not commute at point `{point}` under ({lambda}, {gamma})")]
    ActionsDoNotCommute { point: String, lambda: usize, gamma: usize },
    #[error("action of {group} is not free: element {elem} fixes point `{point}`")]
    ActionNotFree { group: String, elem: usize, point: String },
    #[error("fundamental domain not computed")]
    MissingDomain,

    #[error("view too small: need radius {needed}, have {have}")]
    ViewTooSmall { needed: usize, have: usize },
    #[error("search radius {have} below the displacement margin {needed}")]
    MarginViolation { needed: usize, have: usize },

    #[error("germ domain too small: `{0}` not in the domain")]
    GermDomain(String),
    #[error("germ measure is not supported on injective maps: germ {0} is not injective")]
    GermNotInjective(usize),
    #[error("germ measure is not invariant under {0}")]
    GermNotInvariant(String),
    #[error("germ action does not close on the support: {0}")]
    GermActionNotClosed(String),

    #[error("config error: {0}")]
    Config(String),
    #[error("dangling reference: {kind} `{name}`")]
    DanglingReference { kind: String, name: String },
    #[error("json syntax error: {0}")]
    Json(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable code for reports.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            SelfLoop(_) | DuplicateEdge(_, _) | UnknownVertex(_) | EmptyGraph => "graph",
            TableNotSquare { .. } | TableEntryOutOfRange(..) | IdentityLawFails(..)
            | NoInverse(_) | AssociativityFails(..) | EmptyGroup => "group-table",
            UnknownGroup(_) | ElementOutOfRange { .. } | UnknownElement(_)
            | IdentitySyllable(_) | VertexGroupMismatch { .. } => "element",
            TruncationCap { .. } => "truncation-cap",
            NonPositiveWeight { .. } | WeightSum { .. } | EmptySpace | UnknownPoint(_) => "space",
            NotAPermutation { .. } | NotWeightPreserving { .. } | ActionLawFails { .. }
            | NotGenerating(_) => "action",
            CocycleInconsistent { .. } | CocycleIdentityFails { .. } => "cocycle",
            NotCertified(_) => "not-certified",
            GroupMismatch(_) => "group-mismatch",
            ActionsDoNotCommute { .. } | ActionNotFree { .. } | MissingDomain => "coupling",
            ViewTooSmall { .. } | MarginViolation { .. } => "view",
            GermDomain(_) | GermNotInjective(_) | GermNotInvariant(_)
            | GermActionNotClosed(_) => "germ",
            Config(_) | DanglingReference { .. } | Json(_) | Io(_) => "config",
        }
    }

    /// Process exit status the CLI should use for this error.
    pub fn exit_status(&self) -> i32 {
        match self {
            Error::TruncationCap { .. } => 3,
            _ => 2,
        }
    }
}
