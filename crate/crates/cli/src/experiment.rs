use anyhow::{Context, Result};
use bfnlab_core::corpus::random_bf_hypergraph;
use bfnlab_core::cube::sample::derive_seed;
use bfnlab_core::cube::DENSE_CAP;
use bfnlab_core::deviation::{
    bias_profile, default_t_grid, fd_slope, log_grid, moment_check, tail_estimate, TailTarget,
};
use bfnlab_core::hypergraph::Hypergraph;
use bfnlab_core::io::hypergraph_from_json;
use bfnlab_core::{BiasedMeasure, Mode};
use serde_json::{json, Value};

use crate::commands::{parse_values, read_function, read_text};
use crate::output::{emit, usage};
use crate::{BiasArgs, ExperimentCommand, ExperimentOut, FdArgs, Format, MomentsArgs, TailArgs};

pub fn run(cmd: ExperimentCommand) -> Result<()> {
    match cmd {
        ExperimentCommand::Fd(a) => fd(a),
        ExperimentCommand::Moments(a) => moments(a),
        ExperimentCommand::Tail(a) => tail(a),
        ExperimentCommand::Bias(a) => bias(a),
    }
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn finish(out: &ExperimentOut, header: &[&str], rows: &[Vec<String>], summary: Value) -> Result<()> {
    let text = match out.format {
        Format::Csv => csv_text(header, rows)?,
        Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
    };
    emit(out.out.as_deref(), &text)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn fd(a: FdArgs) -> Result<()> {
    let mode = if a.n <= DENSE_CAP {
        Mode::Exact
    } else {
        let samples = a.mc_samples.ok_or_else(|| usage(format!("n = {} exceeds {DENSE_CAP}; pass --mc-samples", a.n)))?;
        Mode::MonteCarlo { samples, seed: a.seed }
    };
    if !(a.delta_min > 0.0 && a.delta_max >= a.delta_min) || a.points == 0 {
        return Err(usage("need 0 < delta-min <= delta-max and at least one point"));
    }
    let deltas = log_grid(a.delta_min, a.delta_max, a.points);
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &d in &a.degrees {
        let s = fd_slope(d, a.n, &deltas, mode)?;
        for pt in &s.points {
            rows.push(vec![
                pt.d.to_string(),
                pt.n.to_string(),
                pt.p.to_string(),
                pt.delta.to_string(),
                pt.pr_not_boolean.to_string(),
                pt.std_err.to_string(),
                pt.binomial.to_string(),
                pt.poisson.to_string(),
            ]);
        }
        fits.push(s);
    }
    let summary = json!({
        "slopes": fits.iter().map(|s| json!({"d": s.d, "slope": s.slope, "expected": s.expected})).collect::<Vec<_>>(),
        "points": fits.iter().flat_map(|s| s.points.iter()).collect::<Vec<_>>(),
        "config": {
            "degrees": a.degrees, "n": a.n, "deltas": deltas, "mode": format!("{mode:?}"),
            "seed": a.seed,
        },
    });
    finish(
        &a.out,
        &["d", "n", "p", "delta", "pr_not_boolean", "std_err", "binomial", "poisson"],
        &rows,
        summary,
    )
}

fn moments(a: MomentsArgs) -> Result<()> {
    let instances: Vec<(String, Hypergraph)> = if a.hypergraph.is_empty() {
        (0..a.count)
            .map(|i| {
                let h = random_bf_hypergraph(derive_seed(a.seed, i as u64), a.n, a.rho, a.edges, a.max_size)?;
                Ok((format!("random-{i}"), h))
            })
            .collect::<Result<_>>()?
    } else {
        a.hypergraph
            .iter()
            .map(|p| {
                let h = hypergraph_from_json(&read_text(p)?).with_context(|| format!("in {}", p.display()))?;
                Ok((p.display().to_string(), h))
            })
            .collect::<Result<_>>()?
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut violations = 0;
    for (name, h) in &instances {
        let mode = if h.vertices().len() <= DENSE_CAP {
            Mode::Exact
        } else {
            let samples = a
                .mc_samples
                .ok_or_else(|| usage(format!("{name} has more than {DENSE_CAP} vertices; pass --mc-samples")))?;
            Mode::MonteCarlo { samples, seed: a.seed }
        };
        for &p in &a.p {
            let mu = BiasedMeasure::new(p)?;
            for k in 1..=a.k {
                let r = moment_check(h, mu, k, mode)?;
                violations += usize::from(!r.holds);
                rows.push(vec![
                    name.clone(),
                    p.to_string(),
                    k.to_string(),
                    r.d.to_string(),
                    r.uniform.to_string(),
                    r.moment.to_string(),
                    r.bf.to_string(),
                    r.c.to_string(),
                    r.c_eff.to_string(),
                    r.log_bound.to_string(),
                    r.log_slack.to_string(),
                    r.holds.to_string(),
                    r.holds_with_c.to_string(),
                ]);
                reports.push(json!({"instance": name, "p": p, "report": r}));
            }
        }
    }
    let summary = json!({
        "violations": violations,
        "rows": reports,
        "config": {
            "hypergraph": a.hypergraph, "p": a.p, "k": a.k, "count": a.count, "n": a.n, "rho": a.rho,
            "edges": a.edges, "max_size": a.max_size, "seed": a.seed, "mc_samples": a.mc_samples,
        },
    });
    finish(
        &a.out,
        &[
            "instance", "p", "k", "d", "uniform", "moment", "bf", "c", "c_eff", "log_bound", "log_slack", "holds",
            "holds_with_c",
        ],
        &rows,
        summary,
    )
}

fn tail(a: TailArgs) -> Result<()> {
    let mu = BiasedMeasure::new(a.p)?;
    let mode = match a.mc_samples {
        Some(samples) => Mode::MonteCarlo { samples, seed: a.seed },
        None => Mode::Exact,
    };
    let (h, f);
    let target = match (&a.hypergraph, &a.input) {
        (Some(path), None) => {
            h = hypergraph_from_json(&read_text(path)?).with_context(|| format!("in {}", path.display()))?;
            TailTarget::LiveEdges(&h)
        }
        (None, Some(path)) => {
            f = read_function(path)?.to_poly();
            TailTarget::AbsValue(&f)
        }
        _ => return Err(usage("pass exactly one of --hypergraph and --input")),
    };
    let ts = if a.t.is_empty() { default_t_grid(target.scale()) } else { a.t.clone() };
    let pts = tail_estimate(target, mu, &ts, mode)?;
    let rows: Vec<Vec<String>> = pts
        .iter()
        .map(|pt| {
            vec![
                pt.t.to_string(),
                pt.tail.to_string(),
                pt.lower.to_string(),
                pt.upper.to_string(),
                opt(pt.samples.map(|s| s as f64)),
            ]
        })
        .collect();
    let summary = json!({
        "points": pts,
        "config": {
            "hypergraph": a.hypergraph, "input": a.input, "p": a.p, "t": ts,
            "mc_samples": a.mc_samples, "seed": a.seed,
        },
    });
    finish(&a.out, &["t", "tail", "lower", "upper", "samples"], &rows, summary)
}

fn bias(a: BiasArgs) -> Result<()> {
    let g = read_function(&a.input)?.to_poly();
    let values = parse_values(&a.values)?;
    let mode = match a.mc_samples {
        Some(samples) => Mode::MonteCarlo { samples, seed: a.seed },
        None if g.relevant_vars().len() <= DENSE_CAP => Mode::Exact,
        None => return Err(usage(format!("more than {DENSE_CAP} relevant variables; pass --mc-samples"))),
    };
    let r = bias_profile(&g, &values, BiasedMeasure::new(a.p)?, mode)?;
    let rows: Vec<Vec<String>> = r.hist.iter().map(|(v, w)| vec![v.to_string(), w.to_string()]).collect();
    let summary = json!({
        "a_star": r.a_star,
        "pr_ne": r.pr_ne,
        "hist": r.hist,
        "samples": r.samples,
        "config": {"input": a.input, "values": values, "p": a.p, "mc_samples": a.mc_samples, "seed": a.seed},
    });
    finish(&a.out, &["value", "probability"], &rows, summary)
}
