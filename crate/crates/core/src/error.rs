use thiserror::Error;

use crate::model::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain size {0} is outside 1..=64")]
    DomainSize(usize),
    #[error("relation `{name}`: {reason}")]
    BadRelation { name: String, reason: String },
    #[error("duplicate relation name `{0}`")]
    DuplicateRelation(String),
    #[error("duplicate value name `{0}`")]
    DuplicateValue(String),
    #[error("invalid instance: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("new potato for `{variable}` is not a subset of its current potato")]
    PotatoGrows { variable: String },
    #[error("assignment is not total: `{0}` has no value")]
    PartialAssignment(String),
    #[error("assignment has {found} entries, instance has {expected} variables")]
    AssignmentLength { expected: usize, found: usize },
    #[error("occurrence {position} out of range for constraint {constraint} of arity {arity}")]
    BadOccurrence {
        constraint: usize,
        position: usize,
        arity: usize,
    },
    #[error("step must connect two distinct positions (got {0} -> {0})")]
    DegenerateStep(usize),
    #[error("pattern error: {0}")]
    Pattern(String),
    #[error("instance too large for brute force: {0}")]
    TooLarge(String),
    #[error("domain too large for DATALOG generation: |A| = {0} > 8")]
    ProgramDomain(usize),
    #[error("program/instance mismatch: {0}")]
    ProgramMismatch(String),
    #[error("AC derived a contradiction")]
    Contradiction,
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
