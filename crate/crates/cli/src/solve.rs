use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use slac::model::ValueDoc;
use slac::{check_solution, slac_fixpoint, Assignment, DomainSet, Instance, Value};

use crate::input;
use crate::report::{self, ModeFlags, RunReport, RunResult, Timer};
use crate::{Inputs, EXIT_CONTRADICTION, EXIT_OK};

#[derive(Debug, Default)]
pub struct SearchStats {
    pub nodes: usize,
}

/// SLAC at every node, branching on a smallest non-singleton potato.
pub fn search(instance: &Instance, stats: &mut SearchStats) -> Result<Option<Vec<Value>>> {
    stats.nodes += 1;
    let r = slac_fixpoint(instance);
    if r.contradiction {
        return Ok(None);
    }
    let pots = r.final_potatoes;
    let branch = instance
        .var_ids()
        .filter(|v| pots[v.0].len() > 1)
        .min_by_key(|v| pots[v.0].len());
    let Some(x) = branch else {
        let values: Vec<Value> = pots.iter().map(|p| DomainSet::min(*p).expect("non-empty")).collect();
        let ok = check_solution(instance, &Assignment::total(values.clone()))?;
        return Ok(ok.then_some(values));
    };
    for a in pots[x.0].iter() {
        let mut next = pots.clone();
        next[x.0] = DomainSet::singleton(a);
        if let Some(s) = search(&instance.restrict(&next)?, stats)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

pub fn run(argv: Vec<String>, inputs: &Inputs, json: Option<&Path>) -> Result<u8> {
    let mut timer = Timer::start();
    let loaded = input::load(inputs)?;
    let instance = &loaded.instance;
    timer.lap("parse");
    let mut stats = SearchStats::default();
    let found = search(instance, &mut stats)?;
    timer.lap("search");

    let t = instance.template();
    match &found {
        Some(values) => {
            say!("solution:");
            for v in instance.var_ids() {
                say!("  {} = {}", instance.variable_name(v), t.value_name(values[v.0]));
            }
        }
        None => say!("UNSAT"),
    }
    say!("nodes: {}", stats.nodes);

    if let Some(path) = json {
        let potatoes: Vec<DomainSet> = match &found {
            Some(values) => values.iter().map(|&a| DomainSet::singleton(a)).collect(),
            None => vec![DomainSet::default(); instance.num_variables()],
        };
        let solution = found.as_ref().map(|values| {
            instance
                .var_ids()
                .map(|v| {
                    (
                        instance.variable_name(v).to_string(),
                        ValueDoc::for_value(t, values[v.0]),
                    )
                })
                .collect::<BTreeMap<_, _>>()
        });
        let report = RunReport {
            command: argv,
            subcommand: "solve".into(),
            method: Some("slac".into()),
            template_sha256: loaded.template_sha256.clone(),
            instance_sha256: loaded.instance_sha256.clone(),
            mode: ModeFlags {
                threads: 1,
                ..ModeFlags::default()
            },
            result: RunResult {
                contradiction: found.is_none(),
                potatoes: report::potatoes(instance, &potatoes),
                solution,
                probes: Some(stats.nodes),
                ..RunResult::default()
            },
            timing: timer.phases,
        };
        input::write(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(if found.is_some() { EXIT_OK } else { EXIT_CONTRADICTION })
}
