//! Executes one experiment and renders `summary.json` and `table.csv`.

use serde_json::{json, Value};
use sofic_core::entropy::{
    classical_entropy_sequence, count_microstates_exact, emit_convergence_data, exact_rate, good_function_log_count,
    good_microstates, relative_entropy, sofic_entropy_estimate, upper_sofic_block_entropy, BlockMeasure, CountMethod,
    EstimateMode,
};
use sofic_core::rational::to_f64;
use sofic_core::sofic::{defect_stats, random_defect_stats, DefectStats};
use sofic_core::{Error, Result};

use crate::config::{Config, Kind, SCHEMA_VERSION};

pub struct Outputs {
    pub summary: String,
    pub csv: String,
}

fn render(kind: Kind, body: Value) -> String {
    let mut v = json!({ "schema": SCHEMA_VERSION, "kind": kind.name() });
    if let (Value::Object(out), Value::Object(extra)) = (&mut v, body) {
        out.extend(extra);
    }
    let mut s = serde_json::to_string_pretty(&v).expect("summary serialises");
    s.push('\n');
    s
}

fn missing(field: &str, kind: Kind) -> Error {
    Error::Invalid {
        field: field.to_string(),
        reason: format!("required for {}", kind.name()),
    }
}

pub fn execute(cfg: &Config, kind: Kind, seed: Option<u64>) -> Result<Outputs> {
    match kind {
        Kind::Classical => classical(cfg, kind),
        Kind::SoficCount | Kind::SoficMc | Kind::Compare => sofic(cfg, kind, seed),
        Kind::Relative => relative(cfg, kind),
        Kind::Defects => defects(cfg, kind),
        Kind::BlockEntropy => block_entropy(cfg, kind),
    }
}

fn classical(cfg: &Config, kind: Kind) -> Result<Outputs> {
    let proc = cfg.process(kind)?;
    let table = classical_entropy_sequence(&proc, cfg.n_max(kind)?)?;
    let rate = exact_rate(&proc);
    let target = cfg.target.or(rate);
    Ok(Outputs {
        csv: emit_convergence_data(&table, target)?,
        summary: render(kind, json!({ "exact_rate": rate, "target": target, "table": table })),
    })
}

fn sofic(cfg: &Config, kind: Kind, seed: Option<u64>) -> Result<Outputs> {
    let proc = cfg.process(kind)?;
    let sigmas = cfg.sofic_maps(kind, proc.group())?;
    let windows = cfg.windows(kind, proc.group())?;
    let eps = cfg.eps(kind)?;
    let mode = match kind {
        Kind::SoficMc => EstimateMode::MonteCarlo {
            samples: cfg.samples.ok_or_else(|| missing("samples", kind))?,
            seed: seed.or(cfg.seed).ok_or_else(|| missing("seed", kind))?,
        },
        _ => EstimateMode::Exact(cfg.method.unwrap_or(CountMethod::Auto)),
    };
    let (table, counts) = sofic_entropy_estimate(&sigmas, &proc, &windows, &eps, mode)?;
    let rate = exact_rate(&proc);
    let target = match kind {
        Kind::Compare => Some(cfg.target.or(rate).ok_or_else(|| missing("target", kind))?),
        _ => cfg.target,
    };
    let residual = target.zip(table.summary).map(|(t, s)| s - t);
    let seed_used = match mode {
        EstimateMode::MonteCarlo { seed, .. } => Some(seed),
        EstimateMode::Exact(_) => None,
    };
    Ok(Outputs {
        csv: emit_convergence_data(&table, target)?,
        summary: render(
            kind,
            json!({
                "seed": seed_used,
                "exact_rate": rate,
                "target": target,
                "summary": table.summary,
                "summary_residual": residual,
                "counts": counts,
                "table": table,
            }),
        ),
    })
}

fn relative(cfg: &Config, kind: Kind) -> Result<Outputs> {
    let proc = cfg.process(kind)?;
    let beta = cfg.beta.as_ref().ok_or_else(|| missing("beta", kind))?;
    let r = relative_entropy(&proc, beta, cfg.n_max(kind)?)?;
    let target = cfg.target.or(r.exact);
    Ok(Outputs {
        csv: emit_convergence_data(&r.table, target)?,
        summary: render(kind, json!({ "exact": r.exact, "target": target, "table": r.table })),
    })
}

fn defect_rows(label: &str, stats: &DefectStats, w: &mut csv::Writer<Vec<u8>>) -> Result<Value> {
    let mut out = Vec::new();
    let groups = [("mult", &stats.mult), ("free", &stats.free)];
    for (which, map) in groups {
        for ((g, h), r) in map {
            let value = to_f64(r);
            w.write_record([label, which, &g.to_string(), &h.to_string(), &r.to_string(), &value.to_string()])
                .map_err(csv_error)?;
            out.push(json!({
                "defect": which, "g": g.to_string(), "h": h.to_string(),
                "exact": r.to_string(), "value": value,
            }));
        }
    }
    Ok(Value::Array(out))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Invalid {
        field: "csv".into(),
        reason: e.to_string(),
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Invalid {
        field: "csv".into(),
        reason: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn defects(cfg: &Config, kind: Kind) -> Result<Outputs> {
    let group = cfg.group(kind)?;
    let pairs = cfg.element_pairs("pairs", &group)?;
    let distinct = cfg.element_pairs("distinct", &group)?;
    if pairs.is_empty() && distinct.is_empty() {
        return Err(missing("pairs", kind));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sigma", "defect", "g", "h", "exact", "value"]).map_err(csv_error)?;
    let mut results = Vec::new();
    if let Some(kappa) = cfg.random(kind, &group)? {
        let stats = random_defect_stats(&kappa, &pairs, &distinct)?;
        let rows = defect_rows("random", &stats, &mut w)?;
        results.push(json!({ "sigma": "random", "m": kappa.m(), "atoms": kappa.atoms().len(), "defects": rows }));
    } else {
        for sigma in cfg.sofic_maps(kind, &group)? {
            let stats = defect_stats(&sigma, &pairs, &distinct)?;
            let label = sigma.describe();
            let rows = defect_rows(&label, &stats, &mut w)?;
            results.push(json!({ "sigma": label, "m": sigma.m(), "defects": rows }));
        }
    }
    Ok(Outputs {
        csv: finish_csv(w)?,
        summary: render(kind, json!({ "group": group.name(), "results": results })),
    })
}

fn block_entropy(cfg: &Config, kind: Kind) -> Result<Outputs> {
    let (atoms, good_set) = match cfg.block_atoms()? {
        Some(a) => (a, Value::Null),
        None => {
            // the uniform measure on the ε-good set of the first (σ, W, ε)
            let proc = cfg.process(kind)?;
            let sigma = cfg
                .sofic_maps(kind, proc.group())?
                .into_iter()
                .next()
                .ok_or_else(|| missing("sofic", kind))?;
            let w = cfg.windows(kind, proc.group())?.into_iter().next().ok_or_else(|| missing("windows", kind))?;
            let eps = *cfg.eps(kind)?.first().ok_or_else(|| missing("eps", kind))?;
            let good = good_microstates(&sigma, &proc, &w, eps)?;
            if good.is_empty() {
                return Err(Error::Invalid {
                    field: "eps".into(),
                    reason: "no microstate is eps-good".into(),
                });
            }
            let count = count_microstates_exact(&sigma, &proc, &w, eps)?;
            let nu = BlockMeasure::uniform_on(proc.alphabet().to_vec(), &good)?;
            (vec![(1.0, nu)], json!({ "count": count }))
        }
    };
    let h = upper_sofic_block_entropy(&atoms)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut good_rows = Vec::new();
    if let Some(gf) = &cfg.good_function {
        if atoms.len() != 1 {
            return Err(Error::Invalid {
                field: "good_function".into(),
                reason: "needs exactly one block measure".into(),
            });
        }
        let nu = &atoms[0].1;
        if let Some(m_n) = &gf.m_n {
            if m_n.len() != gf.k.len() {
                return Err(Error::Invalid {
                    field: "good_function.m_n".into(),
                    reason: "one m_n per k required".into(),
                });
            }
        }
        w.write_record(["k", "d", "kd", "m_n", "log_count", "per_site", "exact_count"])
            .map_err(csv_error)?;
        for (i, &k) in gf.k.iter().enumerate() {
            let m_n = match &gf.m_n {
                Some(list) => list[i],
                None => k * gf.d * nu.m(),
            };
            let g = good_function_log_count(nu, gf.d, k, m_n)?;
            let exact = g.exact.as_ref().map(|c| c.to_string()).unwrap_or_default();
            w.write_record([
                k.to_string(),
                gf.d.to_string(),
                (k * gf.d).to_string(),
                m_n.to_string(),
                g.log_count.to_string(),
                g.per_site.to_string(),
                exact,
            ])
            .map_err(csv_error)?;
            good_rows.push(json!({ "k": k, "m_n": m_n, "result": g }));
        }
    } else {
        w.write_record(["atom", "weight", "m", "entropy"]).map_err(csv_error)?;
        for (i, (weight, nu)) in atoms.iter().enumerate() {
            w.write_record([i.to_string(), weight.to_string(), nu.m().to_string(), nu.entropy().to_string()])
                .map_err(csv_error)?;
        }
    }
    Ok(Outputs {
        csv: finish_csv(w)?,
        summary: render(
            kind,
            json!({
                "m": atoms[0].1.m(),
                "block_entropy": h,
                "good_set": good_set,
                "good_function": good_rows,
            }),
        ),
    })
}
