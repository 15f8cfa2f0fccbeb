use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use slac::datalog::{generate_ac_program, generate_lac_program};
use slac::model::ValueDoc;
use slac::patterns::{enumerate_cycles, extract_witness, pq_check, verify_certificate, Certificate, CertificateDoc};
use slac::propagate::Fact;
use slac::singleton::{singleton_fixpoint, ProbeEngine, SingletonOptions, SweepMode};
use slac::{ac_fixpoint, lac_closure, DomainSet, Instance, Value, VarId};

use crate::input::{self, Loaded};
use crate::report::{self, ModeFlags, PqSummary, PqViolation, RunReport, RunResult, SeedDoc, Timer};
use crate::{Inputs, Method, ProgramMethod, EXIT_CONTRADICTION, EXIT_OK};

/// Upper bound on `(value, p, q)` triples tried by `--method pq`.
pub const MAX_PQ_CHECKS: usize = 10_000_000;

pub struct CheckArgs {
    pub argv: Vec<String>,
    pub method: Method,
    pub inputs: Inputs,
    pub witness: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub seed: Option<(String, String)>,
    pub max_cycle_len: usize,
    pub threads: usize,
}

struct Outcome {
    potatoes: Vec<DomainSet>,
    contradiction: bool,
    removals: Vec<(VarId, Value, Option<usize>)>,
    certificate: Option<Certificate>,
    sweeps: Option<usize>,
    probes: Option<usize>,
    pq: Option<PqSummary>,
}

impl Outcome {
    fn shrinkage(instance: &Instance, potatoes: Vec<DomainSet>, contradiction: bool) -> Outcome {
        let removals = instance
            .var_ids()
            .flat_map(|v| {
                let gone = instance.potato(v) - potatoes[v.0];
                gone.iter().map(move |a| (v, a, None))
            })
            .collect();
        Outcome {
            potatoes,
            contradiction,
            removals,
            certificate: None,
            sweeps: None,
            probes: None,
            pq: None,
        }
    }
}

pub fn run(args: CheckArgs) -> Result<u8> {
    let mut timer = Timer::start();
    let Loaded {
        instance,
        template_sha256,
        instance_sha256,
        ..
    } = input::load(&args.inputs)?;
    let seed = match &args.seed {
        Some((var, val)) => Some(input::resolve_seed(&instance, var, val)?),
        None => None,
    };
    if seed.is_some() && args.witness.is_some() && matches!(args.method, Method::Sac | Method::Slac) {
        bail!("--witness cannot be combined with a seed for sac/slac");
    }
    if seed.is_some() && args.method == Method::Pq {
        bail!("--method pq takes no seed");
    }
    let want_witness = args.witness.is_some();
    timer.lap("parse");

    let out = match args.method {
        Method::Ac => run_ac(&instance, seed, want_witness)?,
        Method::Lac => run_lac(&instance, seed, want_witness)?,
        Method::Sac | Method::Slac => {
            let engine = if args.method == Method::Sac {
                ProbeEngine::Ac
            } else {
                ProbeEngine::Lac
            };
            let seeded = match seed {
                Some((x, a)) => restrict_to(&instance, x, a)?,
                None => instance.clone(),
            };
            let opts = SingletonOptions {
                mode: if args.threads > 1 {
                    SweepMode::Frozen { threads: args.threads }
                } else {
                    SweepMode::Immediate
                },
                order: None,
                record_witnesses: want_witness,
            };
            let r = singleton_fixpoint(&seeded, engine, &opts);
            Outcome {
                potatoes: r.final_potatoes.clone(),
                contradiction: r.contradiction,
                removals: r
                    .removals
                    .iter()
                    .map(|m| (m.variable, m.value, Some(m.sweep)))
                    .collect(),
                certificate: want_witness.then(|| r.certificate()),
                sweeps: Some(r.sweeps),
                probes: Some(r.probes),
                pq: None,
            }
        }
        Method::Pq => run_pq(&instance, args.max_cycle_len)?,
    };
    timer.lap("run");

    let mut witness_ref = None;
    if let (Some(path), Some(cert)) = (&args.witness, &out.certificate) {
        input::write(path, &cert.to_json(&instance))?;
        witness_ref = Some(path.display().to_string());
    }
    timer.lap("witness");

    say!("method: {}", args.method.name());
    say!("contradiction: {}", if out.contradiction { "yes" } else { "no" });
    if let Some(s) = out.sweeps {
        say!("sweeps: {s}");
    }
    say!("removals: {}", out.removals.len());
    if let Some(pq) = &out.pq {
        say!("pq checks: {}", pq.checks);
        for v in &pq.violations {
            say!(
                "  violation at {} = {} (cycles of {} and {} steps)",
                v.variable,
                v.value,
                v.p_steps,
                v.q_steps
            );
        }
    }
    say!("potatoes:");
    report::print_potatoes(&instance, &out.potatoes);
    match (&args.witness, &out.certificate) {
        (Some(path), Some(c)) if !c.witnesses.is_empty() => {
            say!("witness: {} ({} patterns)", path.display(), c.witnesses.len())
        }
        (Some(_), _) => say!("witness: none"),
        _ => {}
    }

    if let Some(path) = &args.json {
        let t = instance.template();
        let report = RunReport {
            command: args.argv,
            subcommand: "check".into(),
            method: Some(args.method.name().into()),
            template_sha256,
            instance_sha256,
            mode: ModeFlags {
                threads: args.threads,
                frozen_sweeps: args.threads > 1 && matches!(args.method, Method::Sac | Method::Slac),
                witness: want_witness,
                seed: seed.map(|(x, a)| SeedDoc {
                    variable: instance.variable_name(x).to_string(),
                    value: ValueDoc::for_value(t, a),
                }),
                max_cycle_len: (args.method == Method::Pq).then_some(args.max_cycle_len),
            },
            result: RunResult {
                contradiction: out.contradiction,
                potatoes: report::potatoes(&instance, &out.potatoes),
                removals: out
                    .removals
                    .iter()
                    .map(|&(v, a, s)| report::removal(&instance, v, a, s))
                    .collect(),
                witness: witness_ref,
                sweeps: out.sweeps,
                probes: out.probes,
                solution: None,
                pq: out.pq.clone(),
            },
            timing: timer.phases,
        };
        input::write(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(if out.contradiction { EXIT_CONTRADICTION } else { EXIT_OK })
}

fn restrict_to(instance: &Instance, x: VarId, a: Value) -> Result<Instance> {
    let mut pots = instance.potatoes().to_vec();
    pots[x.0] &= DomainSet::singleton(a);
    Ok(instance.restrict(&pots)?)
}

fn run_ac(instance: &Instance, seed: Option<(VarId, Value)>, want_witness: bool) -> Result<Outcome> {
    let seeded = match seed {
        Some((x, a)) => restrict_to(instance, x, a)?,
        None => instance.clone(),
    };
    let r = ac_fixpoint(&seeded);
    let mut out = Outcome::shrinkage(instance, r.potatoes, r.contradiction);
    if want_witness {
        let mut cert = Certificate {
            method: "ac".into(),
            witnesses: Vec::new(),
        };
        if let Some(id) = r.empty_fact {
            let mut w = extract_witness(&seeded, &r.trace, id)?;
            if let Some((x, a)) = seed {
                w = w.with_probe(instance.potatoes().to_vec(), x, a);
            }
            cert.witnesses.push(w);
        }
        out.certificate = Some(cert);
    }
    Ok(out)
}

fn run_lac(instance: &Instance, seed: Option<(VarId, Value)>, want_witness: bool) -> Result<Outcome> {
    let seeds: Vec<Fact> = seed
        .map(|(x, a)| Fact {
            variable: x,
            set: DomainSet::singleton(a),
        })
        .into_iter()
        .collect();
    let r = lac_closure(instance, &seeds);
    let potatoes: Vec<DomainSet> = instance.var_ids().map(|v| r.strongest(v, instance.potato(v))).collect();
    let mut out = Outcome::shrinkage(instance, potatoes, r.contradiction);
    if want_witness {
        let mut cert = Certificate {
            method: "lac".into(),
            witnesses: Vec::new(),
        };
        if let Some(id) = r.empty_fact {
            let mut w = extract_witness(instance, &r.trace, id)?;
            if let Some((x, a)) = seed {
                w = w.with_probe(instance.potatoes().to_vec(), x, a);
            }
            cert.witnesses.push(w);
        }
        out.certificate = Some(cert);
    }
    Ok(out)
}

fn run_pq(instance: &Instance, max_len: usize) -> Result<Outcome> {
    let t = instance.template();
    let mut summary = PqSummary::default();
    for x in instance.var_ids() {
        let cycles: Vec<_> = enumerate_cycles(instance, x, max_len)?.collect();
        let pot = instance.potato(x);
        summary.checks += pot.len() * cycles.len() * cycles.len();
        if summary.checks > MAX_PQ_CHECKS {
            bail!("more than {MAX_PQ_CHECKS} pq checks; lower --max-cycle-len");
        }
        for a in pot.iter() {
            'pairs: for p in &cycles {
                for q in &cycles {
                    if !pq_check(instance, x, a, p, q)?.passes {
                        summary.violations.push(PqViolation {
                            variable: instance.variable_name(x).to_string(),
                            value: ValueDoc::for_value(t, a),
                            p_steps: p.len(),
                            q_steps: q.len(),
                        });
                        break 'pairs;
                    }
                }
            }
        }
    }
    let contradiction = !summary.violations.is_empty();
    let mut out = Outcome::shrinkage(instance, instance.potatoes().to_vec(), contradiction);
    out.pq = Some(summary);
    Ok(out)
}

pub fn gen_datalog(template: &str, method: ProgramMethod, out: Option<&Path>) -> Result<u8> {
    let (t, _) = input::load_template(template)?;
    let program = match method {
        ProgramMethod::Ac => generate_ac_program(&t)?,
        ProgramMethod::Lac => generate_lac_program(&t)?,
    };
    let text = program.to_text();
    match out {
        Some(path) => input::write(path, &text)?,
        None => {
            use std::io::Write as _;
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

pub fn witness_verify(argv: Vec<String>, witness: &Path, inputs: &Inputs, json: Option<&Path>) -> Result<u8> {
    let mut timer = Timer::start();
    let loaded = input::load(inputs)?;
    let text = fs::read_to_string(witness).with_context(|| format!("reading {}", witness.display()))?;
    let doc: CertificateDoc =
        serde_json::from_str(&text).with_context(|| format!("parsing certificate {}", witness.display()))?;
    timer.lap("parse");
    let verdict = verify_certificate(&loaded.instance, &doc).context("certificate rejected")?;
    timer.lap("verify");
    say!(
        "accepted: {} witnesses, {} removals",
        verdict.witnesses,
        verdict.removals.len()
    );
    say!("unsat: {}", if verdict.unsat { "yes" } else { "no" });
    if let Some(path) = json {
        let t = loaded.instance.template();
        let mut remaining = loaded.instance.potatoes().to_vec();
        for (v, a) in &verdict.removals {
            if let Some(x) = loaded.instance.variable_id(v) {
                remaining[x.0].remove(*a);
            }
        }
        let report = RunReport {
            command: argv,
            subcommand: "witness-verify".into(),
            method: Some(doc.method.clone()),
            template_sha256: loaded.template_sha256,
            instance_sha256: loaded.instance_sha256,
            mode: ModeFlags {
                threads: 1,
                witness: true,
                ..ModeFlags::default()
            },
            result: RunResult {
                contradiction: verdict.unsat,
                potatoes: report::potatoes(&loaded.instance, &remaining),
                removals: verdict
                    .removals
                    .iter()
                    .map(|(v, a)| report::RemovalDoc {
                        variable: v.clone(),
                        value: ValueDoc::for_value(t, *a),
                        sweep: None,
                    })
                    .collect(),
                witness: Some(witness.display().to_string()),
                ..RunResult::default()
            },
            timing: timer.phases,
        };
        input::write(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(if verdict.unsat { EXIT_CONTRADICTION } else { EXIT_OK })
}
