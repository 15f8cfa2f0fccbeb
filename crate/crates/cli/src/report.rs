use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use slac::model::ValueDoc;
use slac::{DomainSet, Instance, Value, VarId};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub subcommand: String,
    pub method: Option<String>,
    pub template_sha256: String,
    pub instance_sha256: String,
    pub mode: ModeFlags,
    pub result: RunResult,
    pub timing: Vec<Phase>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeFlags {
    pub threads: usize,
    pub frozen_sweeps: bool,
    pub witness: bool,
    pub seed: Option<SeedDoc>,
    pub max_cycle_len: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedDoc {
    pub variable: String,
    pub value: ValueDoc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub contradiction: bool,
    pub potatoes: Vec<PotatoDoc>,
    pub removals: Vec<RemovalDoc>,
    pub witness: Option<String>,
    pub sweeps: Option<usize>,
    pub probes: Option<usize>,
    pub solution: Option<BTreeMap<String, ValueDoc>>,
    pub pq: Option<PqSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotatoDoc {
    pub variable: String,
    pub values: Vec<ValueDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalDoc {
    pub variable: String,
    pub value: ValueDoc,
    pub sweep: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PqSummary {
    pub checks: usize,
    pub violations: Vec<PqViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PqViolation {
    pub variable: String,
    pub value: ValueDoc,
    pub p_steps: usize,
    pub q_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub ms: f64,
}

/// Wall-clock per named phase.
pub struct Timer {
    last: Instant,
    pub phases: Vec<Phase>,
}

impl Timer {
    pub fn start() -> Self {
        Timer {
            last: Instant::now(),
            phases: Vec::new(),
        }
    }

    pub fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.phases.push(Phase {
            name: name.to_string(),
            ms: (now - self.last).as_secs_f64() * 1e3,
        });
        self.last = now;
    }
}

pub fn potatoes(instance: &Instance, sets: &[DomainSet]) -> Vec<PotatoDoc> {
    let t = instance.template();
    instance
        .var_ids()
        .map(|v| PotatoDoc {
            variable: instance.variable_name(v).to_string(),
            values: sets[v.0].iter().map(|a| ValueDoc::for_value(t, a)).collect(),
        })
        .collect()
}

pub fn removal(instance: &Instance, v: VarId, a: Value, sweep: Option<usize>) -> RemovalDoc {
    RemovalDoc {
        variable: instance.variable_name(v).to_string(),
        value: ValueDoc::for_value(instance.template(), a),
        sweep,
    }
}

pub fn print_potatoes(instance: &Instance, sets: &[DomainSet]) {
    let t = instance.template();
    for v in instance.var_ids() {
        say!("  {} = {}", instance.variable_name(v), t.format_set(sets[v.0]));
    }
}
