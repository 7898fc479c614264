//! Null-hypothesis scenarios: simulate investors, map them to brokers, and report the
//! mean splitting ratio over `1 ≤ τ ≤ 50` against the broker frequency variance.

use std::io::Write;

use anyhow::{anyhow, Result};
use orderflow_core::brokerage::{
    apply_map, correlated_broker_assignment, fixed_random_map, BrokerProfile, BrokerageMap,
};
use orderflow_core::decomposition::decompose;
use orderflow_core::event_model::EventLog;
use orderflow_core::simulators::frequencies::{max_variance, variance};
use orderflow_core::simulators::{build_preferential_attachment, simulate_imitation, ImitationParams};
use orderflow_core::stats::eq14_prediction;
use rayon::prelude::*;
use serde_json::json;

use crate::commands::{parse_profile, simulate_model, write_json, write_with_header};
use crate::config::{parse_sweep, Settings, Sweep};
use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Public-information investors behind a fixed random map.
    PublicInfoFrb,
    /// Imitating investors behind a network-correlated map; sweeps `phi`.
    ImitationFrb,
    /// Any investor model behind a dynamically random map.
    AnyDrb,
    /// Splitting investors behind a fixed random map.
    SplittingFrb,
}

impl Scenario {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "public-info-frb" => Scenario::PublicInfoFrb,
            "imitation-frb" => Scenario::ImitationFrb,
            "any-drb" => Scenario::AnyDrb,
            "splitting-frb" => Scenario::SplittingFrb,
            other => {
                return Err(anyhow!(UsageError(format!(
                    "unknown scenario {other:?}; expected public-info-frb, imitation-frb, any-drb or splitting-frb"
                ))))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::PublicInfoFrb => "public-info-frb",
            Scenario::ImitationFrb => "imitation-frb",
            Scenario::AnyDrb => "any-drb",
            Scenario::SplittingFrb => "splitting-frb",
        }
    }

    fn swept_key(self) -> &'static str {
        match self {
            Scenario::ImitationFrb => "phi",
            _ => "var",
        }
    }

    /// Column holding the swept value; the realized variance has its own `var` column.
    fn swept_column(self) -> &'static str {
        match self {
            Scenario::ImitationFrb => "phi_target",
            _ => "var_target",
        }
    }

    fn default_sweep(self, brokers: usize) -> Sweep {
        let max = max_variance(brokers);
        let values = match self {
            Scenario::ImitationFrb => vec![0.0, 0.25, 0.5, 0.75, 1.0],
            // A fixed map needs a broker large enough for the heaviest splitter, which rules
            // out a flat profile, and steep profiles leave the smallest brokers with too few
            // events to match within tolerance.
            Scenario::SplittingFrb => [0.02, 0.1, 0.2, 0.4].iter().map(|f| f * max).collect(),
            _ => [0.0, 0.2, 0.4, 0.6, 0.8].iter().map(|f| f * max).collect(),
        };
        Sweep {
            key: self.swept_key().into(),
            values,
        }
    }
}

/// One simulated scenario point.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub value: f64,
    pub seed: u64,
    /// Variance of the realized broker frequencies.
    pub var: f64,
    pub phi: Option<f64>,
    pub s_bar: Option<f64>,
}

fn broker_variance(log: &EventLog) -> f64 {
    let n = log.len() as f64;
    let f: Vec<f64> = log.agent_counts().iter().map(|&c| c as f64 / n).collect();
    variance(&f)
}

struct Plan {
    scenario: Scenario,
    sweep: Sweep,
    seeds: u64,
    base_seed: u64,
    events: usize,
    brokers: usize,
    investor_model: String,
    profile: Option<String>,
    tau_hi: usize,
}

fn profile_for(plan: &Plan, value: f64) -> Result<BrokerProfile> {
    match plan.scenario {
        Scenario::ImitationFrb => parse_profile(plan.profile.as_deref().unwrap_or("azn")),
        _ => parse_profile(&format!("variance:{}:{value}", plan.brokers)),
    }
}

fn run_point(plan: &Plan, settings: &Settings, value: f64, k: u64) -> Result<Row> {
    let seed = plan.base_seed + k;
    let map_seed = plan.base_seed.wrapping_add(1_000_003).wrapping_add(k);
    let profile = profile_for(plan, value)?;
    let (brokers, phi) = match plan.scenario {
        Scenario::PublicInfoFrb | Scenario::SplittingFrb => {
            let model = if plan.scenario == Scenario::PublicInfoFrb { "public-info" } else { "splitting" };
            let log = simulate_model(model, settings, plan.events, seed)?;
            let n = log.len() as f64;
            let freqs: Vec<f64> = log.agent_counts().iter().map(|&c| c as f64 / n).collect();
            (apply_map(&log, &fixed_random_map(&freqs, &profile, map_seed)?)?, None)
        }
        Scenario::AnyDrb => {
            let log = simulate_model(&plan.investor_model, settings, plan.events, seed)?;
            (apply_map(&log, &BrokerageMap::dynamic(profile, map_seed))?, None)
        }
        Scenario::ImitationFrb => {
            let m: usize = settings.require("investors")?;
            let net = build_preferential_attachment(m, seed)?;
            let log = simulate_imitation(
                &net,
                &ImitationParams {
                    investors: m,
                    p: settings.get_or("p", 0.9)?,
                    events: plan.events,
                    seed,
                },
            )?;
            let map = correlated_broker_assignment(&net, &profile, value, map_seed)?;
            (apply_map(&log, &map)?, Some(value))
        }
    };
    let d = decompose(&brokers, plan.tau_hi)?;
    Ok(Row {
        value,
        seed,
        var: broker_variance(&brokers),
        phi,
        s_bar: d.mean_splitting_ratio(1, plan.tau_hi),
    })
}

pub fn run(settings: &Settings) -> Result<()> {
    let scenario = Scenario::parse(&settings.require::<String>("name")?)?;
    let mut settings = settings.clone();
    match scenario {
        // Many light investors keep every fixed assignment feasible.
        Scenario::PublicInfoFrb => settings.set_default("investors", 1000),
        Scenario::ImitationFrb => settings.set_default("investors", 2000),
        Scenario::AnyDrb | Scenario::SplittingFrb => settings.set_default("investors", 10_000),
    }
    let settings = &settings;
    let brokers: usize = settings.get_or("brokers", 50)?;
    let sweep = match settings.raw("sweep") {
        Some(spec) => parse_sweep(spec)?,
        None => scenario.default_sweep(brokers),
    };
    if sweep.key != scenario.swept_key() {
        return Err(anyhow!(UsageError(format!(
            "scenario {} sweeps {}, not {}",
            scenario.name(),
            scenario.swept_key(),
            sweep.key
        ))));
    }
    let plan = Plan {
        scenario,
        seeds: settings.get_or("seeds", 10)?,
        base_seed: settings.get_or("seed", 0)?,
        events: settings.get_or("n", 100_000)?,
        brokers,
        investor_model: settings.get_or("investor_model", "splitting".to_string())?,
        profile: settings.get("profile")?,
        tau_hi: settings.get_or("tau_hi", 50)?,
        sweep,
    };
    if plan.seeds == 0 {
        return Err(anyhow!(UsageError("seeds must be positive".into())));
    }
    let dir: std::path::PathBuf = settings.get_or("out", ".".into())?;
    std::fs::create_dir_all(&dir)?;

    let jobs: Vec<(f64, u64)> = plan
        .sweep
        .values
        .iter()
        .flat_map(|&v| (0..plan.seeds).map(move |k| (v, k)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(v, k)| run_point(&plan, settings, v, k))
        .collect::<Result<Vec<Row>>>()?;

    write_with_header(&dir.join("scenario.csv"), settings, |w| {
        writeln!(w, "scenario,{},seed,var,phi,S_bar", scenario.swept_column())?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                scenario.name(),
                r.value,
                r.seed,
                r.var,
                r.phi.map(|p| p.to_string()).unwrap_or_default(),
                r.s_bar.map(|s| s.to_string()).unwrap_or_default()
            )?;
        }
        Ok(())
    })?;

    let mut points = Vec::new();
    for &value in &plan.sweep.values {
        let group: Vec<&Row> = rows.iter().filter(|r| r.value == value).collect();
        let s: Vec<f64> = group.iter().filter_map(|r| r.s_bar).collect();
        let var = group.iter().map(|r| r.var).sum::<f64>() / group.len() as f64;
        let mean = s.iter().sum::<f64>() / s.len().max(1) as f64;
        let se = if s.len() > 1 {
            (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s.len() - 1) as f64).sqrt()
                / (s.len() as f64).sqrt()
        } else {
            f64::NAN
        };
        let predicted = match scenario {
            Scenario::SplittingFrb => Some(1.0),
            Scenario::ImitationFrb => None,
            _ => Some(eq14_prediction(plan.brokers, var.max(0.0))?.0),
        };
        points.push((value, var, mean, se, s.len(), predicted));
    }
    write_with_header(&dir.join("scenario_summary.csv"), settings, |w| {
        writeln!(w, "{},var,S_bar_mean,S_bar_se,runs,predicted", scenario.swept_column())?;
        for (value, var, mean, se, n, predicted) in &points {
            writeln!(
                w,
                "{value},{var},{mean},{se},{n},{}",
                predicted.map(|p| p.to_string()).unwrap_or_default()
            )?;
        }
        Ok(())
    })?;
    let summary = json!({
        "config": settings.to_json(),
        "scenario": scenario.name(),
        "sweep_key": plan.sweep.key,
        "points": points.iter().map(|(value, var, mean, se, n, predicted)| json!({
            "value": value,
            "var": var,
            "S_bar_mean": mean,
            "S_bar_se": if se.is_finite() { json!(se) } else { json!(null) },
            "runs": n,
            "predicted": predicted,
        })).collect::<Vec<_>>(),
    });
    write_json(&dir.join("scenario.json"), &summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in [Scenario::PublicInfoFrb, Scenario::ImitationFrb, Scenario::AnyDrb, Scenario::SplittingFrb] {
            assert_eq!(Scenario::parse(s.name()).unwrap(), s);
        }
        assert!(Scenario::parse("nope").is_err());
    }

    #[test]
    fn drb_point_follows_the_closed_form() {
        let mut settings = Settings::default();
        settings.set("investors", 500);
        let plan = Plan {
            scenario: Scenario::AnyDrb,
            sweep: Scenario::AnyDrb.default_sweep(10),
            seeds: 1,
            base_seed: 3,
            events: 100_000,
            brokers: 10,
            investor_model: "splitting".into(),
            profile: None,
            tau_hi: 50,
        };
        let var = 0.5 * max_variance(10);
        let row = run_point(&plan, &settings, var, 0).unwrap();
        let (predicted, _) = eq14_prediction(10, var).unwrap();
        assert!((row.s_bar.unwrap() - predicted).abs() < 0.02);
        assert!((row.var - var).abs() < 0.1 * var);
    }
}
