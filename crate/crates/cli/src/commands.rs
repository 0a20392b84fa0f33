use std::path::Path;

use anyhow::{Context, Result};
use bfnlab_core::constp::{fkn_approx, ks_recursive, oracle_closest, KsCaps, OracleParams};
use bfnlab_core::corpus::{perturbed_junta, planted_sparse_junta, random_bf_hypergraph, PlantedInstance};
use bfnlab_core::cube::sample::derive_seed;
use bfnlab_core::cube::DENSE_CAP;
use bfnlab_core::deviation::{fd_construct, fd_value};
use bfnlab_core::io::{function_from_json, function_to_json, hypergraph_from_json, hypergraph_to_json, FunctionRepr};
use bfnlab_core::sparse::{
    build, converse_check, quantization_set, verify_properties, ApproxParams, ConverseReport, EnsembleStats, Route,
    VerifyReport,
};
use bfnlab_core::{BiasedMeasure, Mode, Subset, SubsetPoly, TruthTable, ValueSet};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{emit, usage, write_dir, Outputs};
use crate::{
    ApproximateArgs, BfArgs, Cli, Command, CorpusKind, GenCorpusArgs, Method, OracleArgs, VerifyArgs,
};

/// Recovered coefficients must match the truth within this distance.
const RECOVERY_TOL: f64 = 1e-9;

pub fn run(cli: Cli) -> Result<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(usage("worker count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
    }
    let workers = rayon::current_num_threads();
    match cli.command {
        Command::Approximate(a) => approximate(a, workers),
        Command::Verify(a) => verify(a),
        Command::Oracle(a) => oracle(a),
        Command::Bf(a) => bf(a),
        Command::Experiment(e) => crate::experiment::run(e),
        Command::GenCorpus(a) => gen_corpus(a),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

pub fn read_function(path: &Path) -> Result<FunctionRepr> {
    function_from_json(&read_text(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn parse_values(text: &str) -> Result<ValueSet> {
    text.parse::<ValueSet>().context("--values")
}

/// Exact when every polynomial's relevant variables fit the dense cap.
pub fn choose_mode(polys: &[&SubsetPoly], samples: usize, seed: u64) -> Mode {
    let vars = polys.iter().fold(Subset::EMPTY, |acc, p| acc.union(p.relevant_vars()));
    if vars.len() <= DENSE_CAP {
        Mode::Exact
    } else {
        Mode::MonteCarlo { samples, seed }
    }
}

fn mode_json(mode: Mode) -> Value {
    match mode {
        Mode::Exact => json!("exact"),
        Mode::MonteCarlo { samples, seed } => json!({"monte_carlo": {"samples": samples, "seed": seed}}),
    }
}

fn function_value(f: &FunctionRepr) -> Result<Value> {
    Ok(serde_json::from_str(&function_to_json(f, false)?)?)
}

/// Ground truth from a function file or from the `truth` field of a sidecar.
fn read_truth(path: &Path) -> Result<SubsetPoly> {
    let text = read_text(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let inner = match v.get("truth") {
        Some(t) => t.to_string(),
        None => text,
    };
    Ok(function_from_json(&inner).with_context(|| format!("in {}", path.display()))?.to_poly())
}

fn same_coefficients(a: &SubsetPoly, b: &SubsetPoly) -> bool {
    a.n() == b.n() && a.sub(b).map(|d| d.max_abs_coeff() <= RECOVERY_TOL).unwrap_or(false)
}

#[derive(Serialize)]
struct ApproximateConfig<'a> {
    input: &'a Path,
    out: &'a Path,
    truth: Option<&'a Path>,
    workers: usize,
    verify_mode: Value,
    mc_samples: usize,
    #[serde(flatten)]
    params: ApproxParams,
}

#[derive(Serialize)]
struct ApproximateReport<'a> {
    #[serde(flatten)]
    verify: VerifyReport,
    route: Route,
    n_samples: usize,
    ensemble: Option<EnsembleStats>,
    recovery: Option<bool>,
    config: ApproximateConfig<'a>,
}

fn approximate(a: ApproximateArgs, workers: usize) -> Result<()> {
    let f = read_function(&a.input)?.to_poly();
    let values = parse_values(&a.values)?;
    let truth = a.truth.as_deref().map(read_truth).transpose()?;
    let mut params = ApproxParams::new(a.p, a.degree, values.clone(), a.seed);
    params.n_samples = a.samples;
    params.junta_cap = a.junta_cap;
    params.exact = a.exact;
    params.p0 = a.p0;
    params.budget = a.budget;
    let res = build(&f, &params)?;
    if !params.exact && res.route == Route::Local {
        params.n_samples = Some(res.n_samples);
    }
    let mode = choose_mode(&[&f, &res.g], a.mc_samples, derive_seed(a.seed, 7));
    let quant = quantization_set(&values, a.degree, a.junta_cap, a.budget)?;
    let mut report = verify_properties(&f, &res.g, &values, &quant, a.p, mode)?;
    report.votes = Some(res.votes.clone());
    let recovery = truth.as_ref().map(|t| same_coefficients(&res.g, t));
    let report = ApproximateReport {
        verify: report,
        route: res.route,
        n_samples: res.n_samples,
        ensemble: res.ensemble,
        recovery,
        config: ApproximateConfig {
            input: &a.input,
            out: &a.out,
            truth: a.truth.as_deref(),
            workers,
            verify_mode: mode_json(mode),
            mc_samples: a.mc_samples,
            params,
        },
    };
    let g_text = function_to_json(&FunctionRepr::YPoly(res.g), false)? + "\n";
    let report_text = serde_json::to_string_pretty(&report)? + "\n";
    let mut out = Outputs::new();
    out.add(&a.out, g_text.as_bytes())?;
    match &a.report {
        Some(path) => {
            out.add(path, report_text.as_bytes())?;
            out.commit()
        }
        None => {
            out.commit()?;
            print!("{report_text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    #[serde(flatten)]
    verify: VerifyReport,
    converse: Option<ConverseReport>,
    config: Value,
}

fn verify(a: VerifyArgs) -> Result<()> {
    let f = read_function(&a.f)?.to_poly();
    let g = read_function(&a.g)?.to_poly();
    let values = parse_values(&a.values)?;
    let degree = a.degree.unwrap_or(g.degree());
    let quant = quantization_set(&values, degree, a.junta_cap, bfnlab_core::constp::DEFAULT_BUDGET)?;
    let mode = choose_mode(&[&f, &g], a.mc.mc_samples, a.mc.seed);
    let verify = verify_properties(&f, &g, &values, &quant, a.p, mode)?;
    let converse = if a.converse {
        Some(converse_check(&g, &values, a.p, mode)?)
    } else {
        None
    };
    let report = VerifyOutput {
        verify,
        converse,
        config: json!({
            "f": a.f, "g": a.g, "p": a.p, "values": values, "degree": degree,
            "junta_cap": a.junta_cap, "mode": mode_json(mode),
            "mc_samples": a.mc.mc_samples, "seed": a.mc.seed,
        }),
    };
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn oracle(a: OracleArgs) -> Result<()> {
    let f = read_function(&a.input)?;
    let tt = match &f {
        FunctionRepr::TruthTable(t) => t.clone(),
        FunctionRepr::YPoly(p) => p.to_truth_table()?,
    };
    let values = parse_values(&a.values)?;
    let mut params = OracleParams::new(a.degree, values.clone());
    params.junta_cap = a.junta_cap;
    params.exhaustive = a.exhaustive;
    params.budget = a.budget;
    let caps = KsCaps {
        junta_cap: a.junta_cap,
        budget: a.budget,
    };
    let (g, details): (TruthTable, Value) = match a.method {
        Method::Oracle => {
            params.validate()?;
            let r = oracle_closest(&tt, &params, BiasedMeasure::new(a.p)?)?;
            let d = json!({"err": r.err, "junta": r.junta, "stats": r.stats});
            (r.g, d)
        }
        Method::Ks => {
            let r = ks_recursive(&tt, &values, a.degree, &caps)?;
            let d = json!({"dist2": r.dist2, "trace": r.trace});
            (r.g, d)
        }
        Method::Fkn => {
            let input = if a.project {
                tt.fourier_truncate(BiasedMeasure::uniform(), 1)
            } else {
                tt.clone()
            };
            let r = fkn_approx(&input, &values)?;
            let d = json!({"junta": r.junta, "diagnostics": r.diagnostics});
            (r.g, d)
        }
    };
    let g_poly = g.y_expand();
    let report = json!({
        "method": a.method,
        "g": function_value(&FunctionRepr::YPoly(g_poly.clone()))?,
        "result": details,
        "config": {
            "input": a.input, "degree": a.degree, "values": values, "junta_cap": a.junta_cap,
            "p": if a.method == Method::Oracle { a.p } else { 0.5 },
            "exhaustive": a.exhaustive, "project": a.project, "budget": a.budget.to_string(),
        },
    });
    let report_text = serde_json::to_string_pretty(&report)? + "\n";
    let mut out = Outputs::new();
    if let Some(path) = &a.out {
        out.add(path, (function_to_json(&FunctionRepr::YPoly(g_poly), false)? + "\n").as_bytes())?;
    }
    match &a.report {
        Some(path) => {
            out.add(path, report_text.as_bytes())?;
            out.commit()
        }
        None => {
            out.commit()?;
            print!("{report_text}");
            Ok(())
        }
    }
}

fn bf(a: BfArgs) -> Result<()> {
    let h = hypergraph_from_json(&read_text(&a.hypergraph)?).with_context(|| format!("in {}", a.hypergraph.display()))?;
    if a.witness {
        let w = h.branching_witness();
        println!("{}", serde_json::to_string_pretty(&w)?);
    } else {
        println!("{}", h.branching_factor());
    }
    Ok(())
}

fn instance_name(i: usize) -> String {
    format!("instance-{i:04}")
}

fn json_bytes(v: &Value) -> Result<Vec<u8>> {
    Ok((serde_json::to_string_pretty(v)? + "\n").into_bytes())
}

fn planted_files(i: usize, seed: u64, inst: &PlantedInstance) -> Result<Vec<(String, Vec<u8>)>> {
    let name = instance_name(i);
    let sidecar = json!({
        "seed": seed,
        "truth": function_value(&FunctionRepr::YPoly(inst.truth.clone()))?,
        "noise": function_value(&FunctionRepr::YPoly(inst.noise.clone()))?,
        "noise_norm2": inst.noise_norm2,
    });
    Ok(vec![
        (format!("{name}.json"), (function_to_json(&FunctionRepr::YPoly(inst.f.clone()), false)? + "\n").into_bytes()),
        (format!("{name}.truth.json"), json_bytes(&sidecar)?),
    ])
}

fn gen_corpus(a: GenCorpusArgs) -> Result<()> {
    let values = parse_values(&a.values)?;
    let mut files = Vec::new();
    for i in 0..a.size {
        let seed = derive_seed(a.seed, i as u64);
        match a.kind {
            CorpusKind::PlantedSparseJunta => {
                files.extend(planted_files(i, seed, &planted_sparse_junta(seed, a.n, a.degree, a.p, a.noise)?)?);
            }
            CorpusKind::PerturbedJunta => {
                files.extend(planted_files(i, seed, &perturbed_junta(seed, a.n, a.degree, &values, a.p, a.noise)?)?);
            }
            CorpusKind::RandomBfHypergraph => {
                let h = random_bf_hypergraph(seed, a.n, a.rho, a.edges, a.max_size)?;
                let bf = h.branching_factor();
                if bf > a.rho + 1e-12 {
                    anyhow::bail!("generated hypergraph has branching factor {bf} above {}", a.rho);
                }
                let name = instance_name(i);
                files.push((format!("{name}.json"), (hypergraph_to_json(&h)? + "\n").into_bytes()));
                files.push((
                    format!("{name}.truth.json"),
                    json_bytes(&json!({"seed": seed, "branching_factor": bf, "target": a.rho, "edges": h.len()}))?,
                ));
            }
            CorpusKind::FdFamily => {
                let d = i + 1;
                let f = fd_construct(d, a.n)?;
                let table: Vec<i128> = (0..=a.n as u64).map(|m| fd_value(d as u64, m)).collect::<Result<_, _>>()?;
                let name = instance_name(i);
                files.push((format!("{name}.json"), (function_to_json(&FunctionRepr::YPoly(f), false)? + "\n").into_bytes()));
                files.push((
                    format!("{name}.truth.json"),
                    json_bytes(&json!({"d": d, "n": a.n, "value_by_live_count": table.iter().map(|v| v.to_string()).collect::<Vec<_>>()}))?,
                ));
            }
        }
    }
    let mut manifest = serde_json::to_value(&a)?;
    manifest["values"] = serde_json::to_value(&values)?;
    manifest["instances"] = json!((0..a.size).map(instance_name).collect::<Vec<_>>());
    files.push(("manifest.json".into(), json_bytes(&manifest)?));
    write_dir(&a.out_dir, &files)
}
