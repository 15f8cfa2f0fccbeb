//! Singleton arc consistency (SAC) and singleton linear arc consistency
//! (SLAC).
//!
//! Both loops probe every remaining pair `(x, a)`: restrict the instance by
//! the current potatoes and `x = a`, run the inner engine (AC for SAC, LAC
//! seeded with `(x, {a})` for SLAC) and remove `a` from the potato of `x` on
//! a contradiction. Sweeps repeat until one removes nothing.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{DomainSet, Value};
use crate::model::{Instance, VarId};
use crate::patterns::{extract_witness, Certificate, Witness};
use crate::propagate::{ac_fixpoint_with, is_one_consistent, lac_closure, AcOptions, Fact};

/// Inner engine of a singleton loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeEngine {
    /// SAC.
    Ac,
    /// SLAC.
    Lac,
}

impl ProbeEngine {
    pub fn name(self) -> &'static str {
        match self {
            ProbeEngine::Ac => "sac",
            ProbeEngine::Lac => "slac",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepMode {
    /// Removals take effect for the very next probe. Reference semantics.
    Immediate,
    /// Every probe of a sweep sees the potatoes as they were at the start of
    /// the sweep; removals are applied when the sweep ends. Probes run on
    /// `threads` worker threads.
    Frozen { threads: usize },
}

#[derive(Clone, Debug)]
pub struct SingletonOptions {
    pub mode: SweepMode,
    /// Probe order within a sweep. `None` means variables in declaration
    /// order, values ascending. Pairs absent from the list are never probed.
    pub order: Option<Vec<(VarId, Value)>>,
    /// Keep a witness for every removal.
    pub record_witnesses: bool,
}

impl Default for SingletonOptions {
    fn default() -> Self {
        SingletonOptions {
            mode: SweepMode::Immediate,
            order: None,
            record_witnesses: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub variable: VarId,
    pub value: Value,
    pub sweep: usize,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug)]
pub struct SingletonReport {
    pub engine: ProbeEngine,
    pub mode: SweepMode,
    pub final_potatoes: Vec<DomainSet>,
    pub contradiction: bool,
    pub removals: Vec<Removal>,
    pub sweeps: usize,
    pub probes: usize,
}

impl SingletonReport {
    /// The removed `(variable, value)` pairs in removal order.
    pub fn removed(&self) -> Vec<(VarId, Value)> {
        self.removals.iter().map(|r| (r.variable, r.value)).collect()
    }

    /// Removal witnesses in order; empty unless witnesses were recorded.
    pub fn certificate(&self) -> Certificate {
        Certificate {
            method: self.engine.name().to_string(),
            witnesses: self.removals.iter().filter_map(|r| r.witness.clone()).collect(),
        }
    }
}

/// Runs one probe on `potatoes` restricted by `x = a`. Returns `None` when
/// the probe passes, otherwise the witness (if requested).
pub fn probe(
    instance: &Instance,
    potatoes: &[DomainSet],
    engine: ProbeEngine,
    x: VarId,
    a: Value,
    with_witness: bool,
) -> Option<Option<Witness>> {
    let mut restricted = potatoes.to_vec();
    restricted[x.0] &= DomainSet::singleton(a);
    let probed = instance.restrict_unchecked(restricted);
    let (trace, failing) = match engine {
        ProbeEngine::Ac => {
            let out = ac_fixpoint_with(
                &probed,
                &AcOptions {
                    order: None,
                    stop_on_contradiction: true,
                },
            );
            (out.trace, out.empty_fact?)
        }
        ProbeEngine::Lac => {
            let out = lac_closure(
                &probed,
                &[Fact {
                    variable: x,
                    set: DomainSet::singleton(a),
                }],
            );
            (out.trace, out.empty_fact?)
        }
    };
    if !with_witness {
        return Some(None);
    }
    let w = extract_witness(&probed, &trace, failing)
        .expect("engine traces end in an empty fact")
        .with_probe(potatoes.to_vec(), x, a);
    Some(Some(w))
}

pub fn sac_fixpoint(instance: &Instance) -> SingletonReport {
    singleton_fixpoint(instance, ProbeEngine::Ac, &SingletonOptions::default())
}

pub fn slac_fixpoint(instance: &Instance) -> SingletonReport {
    singleton_fixpoint(instance, ProbeEngine::Lac, &SingletonOptions::default())
}

pub fn sac_fixpoint_with(instance: &Instance, opts: &SingletonOptions) -> SingletonReport {
    singleton_fixpoint(instance, ProbeEngine::Ac, opts)
}

pub fn slac_fixpoint_with(instance: &Instance, opts: &SingletonOptions) -> SingletonReport {
    singleton_fixpoint(instance, ProbeEngine::Lac, opts)
}

pub fn singleton_fixpoint(instance: &Instance, engine: ProbeEngine, opts: &SingletonOptions) -> SingletonReport {
    let order: Vec<(VarId, Value)> = match &opts.order {
        Some(o) => o.clone(),
        None => instance
            .var_ids()
            .flat_map(|v| instance.template().full().iter().map(move |a| (v, a)))
            .collect(),
    };
    let mut report = SingletonReport {
        engine,
        mode: opts.mode,
        final_potatoes: instance.potatoes().to_vec(),
        contradiction: instance.potatoes().iter().any(|p| p.is_empty()),
        removals: Vec::new(),
        sweeps: 0,
        probes: 0,
    };
    if report.contradiction {
        return report;
    }
    match opts.mode {
        SweepMode::Immediate => immediate(instance, engine, opts, &order, &mut report),
        SweepMode::Frozen { threads } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .expect("thread pool");
            pool.install(|| frozen(instance, engine, opts, &order, &mut report));
        }
    }
    report
}

fn immediate(
    instance: &Instance,
    engine: ProbeEngine,
    opts: &SingletonOptions,
    order: &[(VarId, Value)],
    report: &mut SingletonReport,
) {
    loop {
        report.sweeps += 1;
        let mut changed = false;
        for &(x, a) in order {
            if !report.final_potatoes[x.0].contains(a) {
                continue;
            }
            report.probes += 1;
            let Some(witness) = probe(instance, &report.final_potatoes, engine, x, a, opts.record_witnesses) else {
                continue;
            };
            report.final_potatoes[x.0].remove(a);
            report.removals.push(Removal {
                variable: x,
                value: a,
                sweep: report.sweeps,
                witness,
            });
            changed = true;
            if report.final_potatoes[x.0].is_empty() {
                report.contradiction = true;
                return;
            }
        }
        if !changed {
            return;
        }
    }
}

fn frozen(
    instance: &Instance,
    engine: ProbeEngine,
    opts: &SingletonOptions,
    order: &[(VarId, Value)],
    report: &mut SingletonReport,
) {
    loop {
        report.sweeps += 1;
        let frozen = report.final_potatoes.clone();
        let pairs: Vec<(VarId, Value)> = order
            .iter()
            .copied()
            .filter(|&(x, a)| frozen[x.0].contains(a))
            .collect();
        report.probes += pairs.len();
        let failed: Vec<(VarId, Value, Option<Witness>)> = pairs
            .par_iter()
            .filter_map(|&(x, a)| probe(instance, &frozen, engine, x, a, opts.record_witnesses).map(|w| (x, a, w)))
            .collect();
        if failed.is_empty() {
            return;
        }
        for (x, a, witness) in failed {
            report.final_potatoes[x.0].remove(a);
            report.removals.push(Removal {
                variable: x,
                value: a,
                sweep: report.sweeps,
                witness,
            });
        }
        if report.final_potatoes.iter().any(|p| p.is_empty()) {
            report.contradiction = true;
            return;
        }
    }
}

/// 1-consistent and a SLAC sweep removes nothing.
pub fn is_slac_stable(instance: &Instance) -> bool {
    if instance.potatoes().iter().any(|p| p.is_empty()) || !is_one_consistent(instance) {
        return false;
    }
    instance.var_ids().all(|x| {
        instance
            .potato(x)
            .iter()
            .all(|a| probe(instance, instance.potatoes(), ProbeEngine::Lac, x, a, false).is_none())
    })
}
