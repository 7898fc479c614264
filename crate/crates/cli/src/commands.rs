use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use orderflow_core::brokerage::{
    apply_map, correlated_broker_assignment, fixed_random_map, BrokerProfile, BrokerageMap,
};
use orderflow_core::decomposition::{
    agent_diagonals, conditional_decompose, decompose, pair_counts_at, write_decomposition_csv,
    PriceCondition,
};
use orderflow_core::event_model::{
    agent_summaries, export, filter_inactive, gini, ingest_path, EventLog,
};
use orderflow_core::simulators::frequencies::{azn_like_profile, zipf, zipf_with_variance};
use orderflow_core::simulators::{
    build_preferential_attachment, simulate_imitation, simulate_public_info, simulate_splitting,
    ImitationParams, PublicInfoParams, SocialNetwork, SplittingModelParams,
};
use orderflow_core::stats::{
    conditional_probabilities, generate_antiherding, shuffle_test, AntiHerdingParams,
    ShuffleOptions, ShuffleScheme,
};
use serde_json::{json, Value};

use crate::{Settings, UsageError};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

/// Creates `path` and writes the settings header before `body`.
pub fn write_with_header(
    path: &Path,
    settings: &Settings,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(settings.header().as_bytes())?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn out_dir(settings: &Settings) -> Result<PathBuf> {
    let dir: PathBuf = settings.get_or("out", PathBuf::from("."))?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Reads the input log and optionally drops agents below `min_events`.
fn load(settings: &Settings) -> Result<EventLog> {
    let path: PathBuf = settings.require("input")?;
    let log = ingest_path(&path).with_context(|| format!("reading {}", path.display()))?;
    match settings.get::<u64>("min_events")? {
        Some(k) => Ok(filter_inactive(&log, k)?),
        None => Ok(log),
    }
}

fn json_opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn log_summary(log: &EventLog) -> Value {
    let n = log.len() as f64;
    let mean_sign = log.signs().iter().map(|&s| s as f64).sum::<f64>() / n;
    let active = log.agent_counts().iter().filter(|&&c| c > 0).count();
    json!({
        "events": log.len(),
        "agents": log.num_agents(),
        "active_agents": active,
        "price_flags": log.has_price_flags(),
        "mean_sign": mean_sign,
        "gini": gini(log),
    })
}

/// Agent ids ordered by activity, most active first; ties by id.
fn by_activity(log: &EventLog) -> Vec<u32> {
    let counts = log.agent_counts();
    let mut ids: Vec<u32> = (0..counts.len() as u32).collect();
    ids.sort_by_key(|&a| (std::cmp::Reverse(counts[a as usize]), a));
    ids
}

pub fn ingest_check(settings: &Settings) -> Result<()> {
    let log = load(settings)?;
    let top_k: usize = settings.get_or("top_k", 10)?;
    let summaries = agent_summaries(&log);
    let top: Vec<Value> = by_activity(&log)
        .into_iter()
        .take(top_k)
        .map(|a| {
            let s = &summaries[a as usize];
            json!({
                "agent": log.registry().labels()[a as usize],
                "events": s.count,
                "frequency": s.frequency,
                "mean_sign": s.mean_sign,
            })
        })
        .collect();
    let mut summary = log_summary(&log);
    summary["top_agents"] = Value::Array(top);
    summary["metadata"] = log
        .metadata
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect::<serde_json::Map<_, _>>()
        .into();
    let report = json!({ "config": settings.to_json(), "log": summary });
    match settings.get::<PathBuf>("out")? {
        Some(path) => write_json(&path, &report),
        None => {
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

pub fn run_decompose(settings: &Settings) -> Result<()> {
    let log = load(settings)?;
    let dir = out_dir(settings)?;
    let tau_max: usize = settings.get_or("tau_max", 100)?;
    let top_k: usize = settings.get_or("top_k", 10)?;
    let d = decompose(&log, tau_max)?;
    write_with_header(&dir.join("decomposition.csv"), settings, |w| {
        write_decomposition_csv(w, &d, None)
    })?;
    write_with_header(&dir.join("splitting_ratio.csv"), settings, |w| {
        writeln!(w, "tau,S")?;
        for tau in d.lags() {
            writeln!(w, "{tau},{}", fmt_opt(d.s[tau - 1]))?;
        }
        Ok(())
    })?;

    let top: Vec<u32> = by_activity(&log).into_iter().take(top_k).collect();
    let diagonals = agent_diagonals(&log, &top, tau_max)?;
    let labels = log.registry().labels();
    write_with_header(&dir.join("agent_diagonals.csv"), settings, |w| {
        writeln!(w, "agent,tau,C_ii,P_tilde_ii")?;
        for diag in &diagonals {
            for tau in 1..=tau_max {
                writeln!(
                    w,
                    "{},{tau},{},{}",
                    labels[diag.agent as usize],
                    fmt_opt(diag.c[tau - 1]),
                    diag.p_tilde[tau - 1]
                )?;
            }
        }
        Ok(())
    })?;

    // Pairs that never occur at lag 1 are omitted; their P^{ij}(1) is zero.
    let freqs: Vec<f64> = agent_summaries(&log).iter().map(|s| s.frequency).collect();
    let pairs = pair_counts_at(&log, 1)?;
    let n = log.len() as f64;
    write_with_header(&dir.join("pair_scatter.csv"), settings, |w| {
        writeln!(w, "agent_i,agent_j,P_ij_1,Pi_Pj")?;
        for &(i, j, c) in &pairs {
            writeln!(
                w,
                "{},{},{},{}",
                labels[i as usize],
                labels[j as usize],
                c as f64 / n,
                freqs[i as usize] * freqs[j as usize]
            )?;
        }
        Ok(())
    })?;

    let first = |v: &[f64]| v.first().copied();
    let summary = json!({
        "config": settings.to_json(),
        "log": log_summary(&log),
        "tau_max": tau_max,
        "mean_splitting_ratio": json_opt(d.mean_splitting_ratio(1, 50)),
        "mean_splitting_ratio_lags": [1, tau_max.min(50)],
        "C_1": json_opt(first(&d.c)),
        "C_split_1": json_opt(first(&d.c_split)),
        "C_herd_1": json_opt(first(&d.c_herd)),
        "files": ["decomposition.csv", "splitting_ratio.csv", "agent_diagonals.csv", "pair_scatter.csv"],
    });
    write_json(&dir.join("summary.json"), &summary)
}

/// Broker profile from a spec: `azn`, `uniform:M`, `variance:M:V`, `zipf:M:EXPONENT`, or
/// a `broker,frequency` CSV path.
pub fn parse_profile(spec: &str) -> Result<BrokerProfile> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.parse().map_err(|_| usage(format!("profile {spec:?}: {s:?} is not a number")))
    };
    let count = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| usage(format!("profile {spec:?}: {s:?} is not a count")))
    };
    let freqs = match parts.as_slice() {
        ["azn"] => azn_like_profile(),
        ["uniform", m] => vec![1.0 / count(m)? as f64; count(m)?],
        ["variance", m, v] => {
            let (m, v) = (count(m)?, num(v)?);
            if v == 0.0 {
                vec![1.0 / m as f64; m]
            } else {
                zipf_with_variance(m, v)?
            }
        }
        ["zipf", m, s] => zipf(count(m)?, num(s)?),
        _ => return Ok(BrokerProfile::read_path(spec)?),
    };
    Ok(BrokerProfile::new(freqs)?)
}

/// The network an imitation log was simulated on.
pub fn network_for(settings: &Settings, log: Option<&EventLog>) -> Result<SocialNetwork> {
    let from_log = |key: &str| log.and_then(|l| l.metadata.get(key)).map(str::to_string);
    let investors: usize = match settings.get("investors")? {
        Some(m) => m,
        None => from_log("investors")
            .ok_or_else(|| usage("correlated map needs investors (not found in the log metadata)"))?
            .parse()?,
    };
    let seed: u64 = match settings.get("network_seed")? {
        Some(s) => s,
        None => from_log("network_seed")
            .ok_or_else(|| usage("correlated map needs network_seed (not found in the log metadata)"))?
            .parse()?,
    };
    Ok(build_preferential_attachment(investors, seed)?)
}

pub fn simulate(settings: &Settings) -> Result<()> {
    let model: String = settings.require("model")?;
    let events: usize = settings.get_or("n", 1_000_000)?;
    let seed: u64 = settings.get_or("seed", 0)?;
    let out: PathBuf = settings.require("out")?;
    let mut log = simulate_model(&model, settings, events, seed)?;
    for (k, v) in settings.iter() {
        log.metadata.set(format!("config.{k}"), v);
    }
    let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    export(&log, file)?;
    log::info!("wrote {} events to {}", log.len(), out.display());
    Ok(())
}

/// Runs one investor-level model with settings-supplied parameters.
pub fn simulate_model(model: &str, settings: &Settings, events: usize, seed: u64) -> Result<EventLog> {
    Ok(match model {
        "splitting" => simulate_splitting(&SplittingModelParams {
            investors: settings.get_or("investors", 10_000)?,
            beta: settings.get_or("beta", 1.5)?,
            v_min: settings.get_or("v_min", 1)?,
            pool_size: settings.get_or("pool_size", 5)?,
            events,
            seed,
        })?,
        "public-info" | "public_info" => {
            let m: usize = settings.get_or("investors", 50)?;
            let frequencies = match settings.get::<f64>("variance")? {
                Some(v) if v > 0.0 => zipf_with_variance(m, v)?,
                Some(_) => vec![1.0 / m as f64; m],
                None => zipf(m, settings.get_or("zipf", 0.0)?),
            };
            simulate_public_info(&PublicInfoParams {
                frequencies,
                run_tail: settings.get_or("run_tail", 1.5)?,
                n_min: settings.get_or("n_min", 1)?,
                events,
                seed,
            })?
        }
        "imitation" => {
            let m: usize = settings.get_or("investors", 10_000)?;
            let network_seed: u64 = settings.get_or("network_seed", seed)?;
            let net = build_preferential_attachment(m, network_seed)?;
            let mut log = simulate_imitation(
                &net,
                &ImitationParams {
                    investors: m,
                    p: settings.get_or("p", 0.9)?,
                    events,
                    seed,
                },
            )?;
            log.metadata.set("network_seed", network_seed);
            log
        }
        "antiherding" | "anti-herding" => {
            let d = AntiHerdingParams::default();
            generate_antiherding(&AntiHerdingParams {
                splitters: settings.get_or("splitters", d.splitters)?,
                contrarians: settings.get_or("contrarians", d.contrarians)?,
                contrarian_share: settings.get_or("contrarian_share", d.contrarian_share)?,
                beta: settings.get_or("beta", d.beta)?,
                v_min: settings.get_or("v_min", d.v_min)?,
                pool_size: settings.get_or("pool_size", d.pool_size)?,
                flag_prob: settings.get_or("flag_prob", d.flag_prob)?,
                window: settings.get_or("window", d.window)?,
                response: settings.get_or("response", d.response)?,
                events,
                seed,
            })?
        }
        other => {
            return Err(usage(format!(
                "unknown model {other:?}; expected splitting, public-info, imitation or antiherding"
            )))
        }
    })
}

pub fn run_map(settings: &Settings) -> Result<()> {
    let kind: String = settings.require("kind")?;
    let profile = parse_profile(&settings.require::<String>("profile")?)?;
    let seed: u64 = settings.get_or("seed", 0)?;
    let input: PathBuf = settings.require("input")?;
    let out: PathBuf = settings.require("out")?;
    let log = ingest_path(&input).with_context(|| format!("reading {}", input.display()))?;
    let map = match kind.as_str() {
        "fixed" => {
            let n = log.len() as f64;
            let freqs: Vec<f64> = log.agent_counts().iter().map(|&c| c as f64 / n).collect();
            fixed_random_map(&freqs, &profile, seed)?
        }
        "dynamic" => BrokerageMap::dynamic(profile, seed),
        "correlated" => {
            let phi: f64 = settings.require("phi")?;
            let net = network_for(settings, Some(&log))?;
            correlated_broker_assignment(&net, &profile, phi, seed)?
        }
        other => {
            return Err(usage(format!(
                "unknown map kind {other:?}; expected fixed, dynamic or correlated"
            )))
        }
    };
    let mut mapped = apply_map(&log, &map)?;
    for (k, v) in settings.iter() {
        mapped.metadata.set(format!("config.{k}"), v);
    }
    let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    export(&mapped, file)?;
    if let Some(path) = settings.get::<PathBuf>("map_out")? {
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        map.write_csv(BufWriter::new(file), Some(log.registry()))?;
    }
    Ok(())
}

pub fn nulltest(settings: &Settings) -> Result<()> {
    let log = load(settings)?;
    let dir = out_dir(settings)?;
    let scheme = match settings.get_or("scheme", "independent".to_string())?.as_str() {
        "independent" => ShuffleScheme::Independent,
        "joint" => ShuffleScheme::Joint,
        other => return Err(usage(format!("unknown shuffle scheme {other:?}"))),
    };
    let options = ShuffleOptions {
        replicates: settings.get_or("replicates", 1000)?,
        alpha: settings.get_or("alpha", 0.05)?,
        seed: settings.get_or("seed", 0)?,
        scheme,
    };
    let tau_max: usize = settings.get_or("tau_max", 100)?;
    let res = shuffle_test(&log, tau_max, options)?;
    write_with_header(&dir.join("nulltest.csv"), settings, |w| {
        writeln!(w, "# scheme={}", scheme.label())?;
        // The band is the null mean plus or minus three null standard deviations.
        writeln!(w, "tau,C_herd,null_mean,null_std,band_lo,band_hi,p_value,reject")?;
        for k in 0..tau_max {
            let (m, sd) = (res.null_mean[k], res.null_std[k]);
            writeln!(
                w,
                "{},{},{m},{sd},{},{},{},{}",
                k + 1,
                res.observed[k],
                m - 3.0 * sd,
                m + 3.0 * sd,
                res.p_values[k],
                u8::from(res.reject[k])
            )?;
        }
        Ok(())
    })?;
    let summary = json!({
        "config": settings.to_json(),
        "scheme": scheme.label(),
        "replicates": options.replicates,
        "alpha": options.alpha,
        "rejection_fraction": res.rejection_fraction(),
        "rejected_lags": (1..=tau_max).filter(|&t| res.reject[t - 1]).collect::<Vec<_>>(),
        "observed_C_herd": res.observed,
        "null_mean": res.null_mean,
        "null_std": res.null_std,
        "p_values": res.p_values,
    });
    write_json(&dir.join("nulltest.json"), &summary)
}

pub fn condprob(settings: &Settings) -> Result<()> {
    let log = load(settings)?;
    let dir = out_dir(settings)?;
    let tau_max: usize = settings.get_or("tau_max", 100)?;
    let cp = conditional_probabilities(&log, tau_max)?;
    write_with_header(&dir.join("condprob.csv"), settings, |w| cp.write_csv(w))?;
    let conditions = [PriceCondition::NoPriceChange, PriceCondition::PriceChange];
    let parts = conditions
        .iter()
        .map(|&c| conditional_decompose(&log, tau_max, c))
        .collect::<orderflow_core::Result<Vec<_>>>()?;
    write_with_header(&dir.join("conditional_decomposition.csv"), settings, |w| {
        for (k, part) in parts.iter().enumerate() {
            let mut buf = Vec::new();
            write_decomposition_csv(&mut buf, &part.result, Some(part.condition))?;
            // One header row for the stacked table.
            let text = String::from_utf8_lossy(&buf);
            let body = if k == 0 { &text[..] } else { text.split_once('\n').map_or("", |x| x.1) };
            w.write_all(body.as_bytes())?;
        }
        Ok(())
    })?;
    let [same0, diff0, same1, diff1] = cp.by_agent();
    let col = |v: &[Option<f64>]| v.iter().map(|&x| json_opt(x)).collect::<Vec<_>>();
    let summary = json!({
        "config": settings.to_json(),
        "tau_max": tau_max,
        "same_agent_nochange": col(&same0),
        "diff_agent_nochange": col(&diff0),
        "same_agent_change": col(&same1),
        "diff_agent_change": col(&diff1),
        "pairs_nochange": parts[0].counts,
        "pairs_change": parts[1].counts,
    });
    write_json(&dir.join("condprob.json"), &summary)
}
