use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use ctp_core::centrality::{
    canadian_betweenness, canadian_betweenness_all, geodesic_edge_betweenness, CbcConfig, CbcMethod, CbcMode,
    CentralityRow, CentralityTable, FailureHandling,
};
use ctp_core::elicit::{
    fit_prior, mix_experts, pushforward_probabilities, sample_beta, BetaPrior, LogitVector,
};
use ctp_core::formats::{self, json_num, to_pretty};
use ctp_core::traveler::{
    evaluate_policy_with_cap, exact_expected_time_with_cap, simulate_policy, Policy, PolicyKind,
};
use ctp_core::{
    blockage_probabilities, load_network, BetaVector, BlockageModel, Error, Overrides, Result, RoadNetwork,
};

use crate::args::{
    Baseline, CentralityArgs, ElicitArgs, Handling, Method, Mode, NetworkArgs, RouteArgs, SimulateArgs,
};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn summary_path(explicit: Option<&PathBuf>, output: Option<&PathBuf>) -> Option<PathBuf> {
    explicit.cloned().or_else(|| {
        output.map(|o| {
            let mut s = o.clone().into_os_string();
            s.push(".summary.json");
            PathBuf::from(s)
        })
    })
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// Network, blockage model and failure cost, plus their echo.
struct Inputs {
    net: RoadNetwork,
    model: BlockageModel,
    failure_cost: f64,
    echo: Map<String, Value>,
}

fn load_inputs(args: &NetworkArgs) -> Result<Inputs> {
    let net = load_network(&read_text(&args.graph)?)?;
    net.node_index(&args.source)?;
    net.node_index(&args.sink)?;
    let (model, probabilities) = match (&args.probabilities, &args.covariates, &args.beta) {
        (Some(path), None, None) => (
            formats::read_probabilities(open(path)?)?,
            json!({"source": "csv", "path": path_str(path)}),
        ),
        (None, Some(path), Some(beta)) => {
            let z = formats::read_covariates(open(path)?)?;
            let model = blockage_probabilities(&z, &BetaVector::new(beta.clone())?)?;
            (
                model,
                json!({
                    "source": "covariates",
                    "path": path_str(path),
                    "beta": beta.iter().map(|&b| json_num(b)).collect::<Vec<_>>(),
                }),
            )
        }
        (None, None, None) => (BlockageModel::from_network(&net), json!({"source": "inline"})),
        _ => {
            return Err(Error::IncompatibleOptions(
                "give either --probabilities or --covariates with --beta, not both".into(),
            ))
        }
    };
    let model = model.for_network(&net)?;
    let failure_cost = args.failure_cost.unwrap_or_else(|| net.default_failure_cost());
    let mut echo = Map::new();
    echo.insert("graph".into(), json!(path_str(&args.graph)));
    echo.insert("source".into(), json!(args.source));
    echo.insert("sink".into(), json!(args.sink));
    echo.insert("probabilities".into(), probabilities);
    echo.insert("failure_cost".into(), json_num(failure_cost));
    echo.insert("cap".into(), json!(args.cap));
    Ok(Inputs {
        net,
        model,
        failure_cost,
        echo,
    })
}

fn parse_policy(text: &str) -> Result<PolicyKind> {
    match text {
        "optimal" => Ok(PolicyKind::Optimal),
        "replan" => Ok(PolicyKind::ReplanGreedy),
        _ => match text.strip_prefix("route:") {
            Some(nodes) => Ok(PolicyKind::FixedRoute(
                nodes.split(',').map(|n| n.trim().to_string()).collect(),
            )),
            None => Err(Error::BadRoute(format!(
                "policy must be optimal, replan or route:<nodes>, got {text:?}"
            ))),
        },
    }
}

fn build_policy<'a>(inputs: &'a Inputs, kind: PolicyKind, sink: &str, cap: usize) -> Result<Policy<'a>> {
    Policy::with_cap(kind, &inputs.net, &inputs.model, sink, inputs.failure_cost, cap)
}

pub fn route(args: &RouteArgs) -> Result<()> {
    let inputs = load_inputs(&args.network)?;
    let net_args = &args.network;
    let kind = parse_policy(&args.policy)?;
    let mut report = Map::new();
    let mut config = inputs.echo.clone();
    config.insert("subcommand".into(), json!("route"));
    config.insert("policy".into(), json!(args.policy));
    config.insert("method".into(), json!(args.run.method.as_str()));
    config.insert("seed".into(), json!(args.run.seed));
    match args.run.method {
        Method::Exact => {
            let value = if kind == PolicyKind::Optimal {
                exact_expected_time_with_cap(
                    &inputs.net,
                    &inputs.model,
                    &net_args.source,
                    &net_args.sink,
                    inputs.failure_cost,
                    net_args.cap,
                )?
            } else {
                let policy = build_policy(&inputs, kind, &net_args.sink, net_args.cap)?;
                evaluate_policy_with_cap(
                    &inputs.net,
                    &inputs.model,
                    &policy,
                    &net_args.source,
                    &Overrides::new(),
                    net_args.cap,
                )?
            };
            report.insert("value".into(), json_num(value.value));
            report.insert("failure_probability".into(), json_num(value.failure_probability));
        }
        Method::Mc => {
            config.insert("replications".into(), json!(args.run.reps));
            let policy = build_policy(&inputs, kind, &net_args.sink, net_args.cap)?;
            let dist = simulate_policy(
                &inputs.net,
                &inputs.model,
                &policy,
                &net_args.source,
                args.run.reps,
                args.run.seed,
                &Overrides::new(),
            )?;
            let s = dist.summary();
            report.insert("value".into(), json_num(s.mean));
            report.insert("failure_probability".into(), json_num(dist.failure_frequency()));
            report.insert("std_error".into(), json_num(s.std_error));
            report.insert("replications".into(), json!(dist.replications()));
            report.insert(
                "quantiles".into(),
                json!({
                    "q05": json_num(s.q05),
                    "q25": json_num(s.q25),
                    "q50": json_num(s.q50),
                    "q75": json_num(s.q75),
                    "q95": json_num(s.q95),
                }),
            );
        }
    }
    report.insert("method".into(), json!(args.run.method.as_str()));
    report.insert("config".into(), Value::Object(config));
    emit(args.run.output.as_deref(), to_pretty(&Value::Object(report)).as_bytes())
}

pub fn centrality(args: &CentralityArgs) -> Result<()> {
    let inputs = load_inputs(&args.network)?;
    let net_args = &args.network;
    let method = match args.run.method {
        Method::Exact => CbcMethod::Exact,
        Method::Mc => CbcMethod::MonteCarlo {
            replications: args.run.reps,
            seed: args.run.seed,
        },
    };
    let mode = match args.mode {
        Mode::OthersStochastic => CbcMode::OthersStochastic,
        Mode::OthersOpen => CbcMode::OthersOpen,
    };
    let handling = match args.failure_handling {
        Handling::Penalty => FailureHandling::Penalty,
        Handling::Conditional => FailureHandling::Conditional,
    };
    let mut cbc_config = CbcConfig::new(mode, method, inputs.failure_cost).with_failure_handling(handling);
    cbc_config.cap = net_args.cap;

    let mut table = if args.edges.is_empty() {
        canadian_betweenness_all(&inputs.net, &inputs.model, &net_args.source, &net_args.sink, &cbc_config)?
    } else {
        let mut ids = args.edges.clone();
        ids.sort();
        ids.dedup();
        let rows = ids
            .iter()
            .map(|id| {
                let r = canadian_betweenness(
                    &inputs.net,
                    &inputs.model,
                    &net_args.source,
                    &net_args.sink,
                    id,
                    &cbc_config,
                )?;
                Ok(CentralityRow {
                    edge_id: id.clone(),
                    cbc: Some(r),
                    geodesic: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CentralityTable {
            source: Some(net_args.source.clone()),
            sink: Some(net_args.sink.clone()),
            config: Some(cbc_config),
            rows,
        }
    };
    if args.baseline == Some(Baseline::Geodesic) {
        table.attach_geodesic(&geodesic_edge_betweenness(&inputs.net));
    }
    emit(args.run.output.as_deref(), table.to_csv()?.as_bytes())?;

    if let Some(path) = summary_path(args.summary.as_ref(), args.run.output.as_ref()) {
        let mut config = inputs.echo;
        config.insert("subcommand".into(), json!("centrality"));
        config.insert("mode".into(), json!(mode.as_str()));
        config.insert("method".into(), json!(args.run.method.as_str()));
        config.insert("failure_handling".into(), json!(handling.as_str()));
        config.insert("seed".into(), json!(args.run.seed));
        if args.run.method == Method::Mc {
            config.insert("replications".into(), json!(args.run.reps));
        }
        config.insert(
            "baseline".into(),
            json!(args.baseline.map(|_| "geodesic")),
        );
        config.insert("edges".into(), json!(table.rows.iter().map(|r| &r.edge_id).collect::<Vec<_>>()));
        let summary = json!({ "rows": table.rows.len(), "config": config });
        emit(Some(&path), to_pretty(&summary).as_bytes())?;
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let inputs = load_inputs(&args.network)?;
    let net_args = &args.network;
    let kind = parse_policy(&args.policy)?;
    let policy = build_policy(&inputs, kind, &net_args.sink, net_args.cap)?;
    let dist = simulate_policy(
        &inputs.net,
        &inputs.model,
        &policy,
        &net_args.source,
        args.reps,
        args.seed,
        &Overrides::new(),
    )?;
    let mut csv = Vec::new();
    formats::write_replicates(&dist, &mut csv)?;
    emit(args.output.as_deref(), &csv)?;

    if let Some(path) = summary_path(args.summary.as_ref(), args.output.as_ref()) {
        let mut config = inputs.echo;
        config.insert("subcommand".into(), json!("simulate"));
        config.insert("policy".into(), json!(args.policy));
        config.insert("replications".into(), json!(args.reps));
        config.insert("seed".into(), json!(args.seed));
        let s = dist.summary();
        let summary = json!({
            "mean": json_num(s.mean),
            "std_error": json_num(s.std_error),
            "failure_frequency": json_num(dist.failure_frequency()),
            "q05": json_num(s.q05),
            "q50": json_num(s.q50),
            "q95": json_num(s.q95),
            "replications": dist.replications(),
            "config": config,
        });
        emit(Some(&path), to_pretty(&summary).as_bytes())?;
    }
    Ok(())
}

pub fn elicit(args: &ElicitArgs) -> Result<()> {
    let z = formats::read_covariates(open(&args.covariates)?)?;
    let ids = z.row_ids().to_vec();
    let mut config = Map::new();
    config.insert("subcommand".into(), json!("elicit"));
    config.insert("covariates".into(), json!(path_str(&args.covariates)));
    config.insert("clamp".into(), json_num(args.clamp));
    config.insert("seed".into(), json!(args.seed));

    let (prior, clamped, sample) = match (&args.experts, &args.draws) {
        (Some(path), None) => {
            config.insert("experts".into(), json!(path_str(path)));
            config.insert("samples".into(), json!(args.samples));
            let probs = formats::read_expert_points(open(path)?, &ids)?;
            let logits = LogitVector::from_probabilities(&probs, args.clamp)?;
            let prior = fit_prior(&z, &logits)?;
            let clamped = logits.clamped().iter().map(|&i| ids[i].clone()).collect::<Vec<_>>();
            let sample = if args.pushforward.is_some() || args.betas.is_some() {
                Some(sample_beta(&prior, args.samples, args.seed)?)
            } else {
                None
            };
            (prior, clamped, sample)
        }
        (None, Some(path)) => {
            config.insert("draws".into(), json!(path_str(path)));
            config.insert("per_draw".into(), json!(args.per_draw));
            let draws = formats::read_expert_draws(open(path)?, &ids)?;
            let logits = draws
                .iter()
                .map(|d| LogitVector::from_probabilities(&d.probabilities, args.clamp))
                .collect::<Result<Vec<_>>>()?;
            let priors = logits.iter().map(|l| fit_prior(&z, l)).collect::<Result<Vec<_>>>()?;
            let prior = BetaPrior::moment_mixture(&priors)?;
            let mut clamped_rows: Vec<usize> = logits.iter().flat_map(|l| l.clamped().iter().copied()).collect();
            clamped_rows.sort_unstable();
            clamped_rows.dedup();
            let clamped = clamped_rows.into_iter().map(|i| ids[i].clone()).collect();
            let sample = if args.pushforward.is_some() || args.betas.is_some() {
                Some(mix_experts(&z, &logits, args.per_draw, args.seed)?)
            } else {
                None
            };
            (prior, clamped, sample)
        }
        _ => {
            return Err(Error::IncompatibleOptions(
                "give exactly one of --experts and --draws".into(),
            ))
        }
    };

    let mut doc = formats::prior_json(&prior, z.column_names(), &clamped);
    if let Some(sample) = &sample {
        doc["sample"] = json!({
            "draws": sample.len(),
            "provenance": sample.provenance().as_str(),
        });
    }
    doc["config"] = Value::Object(config);
    emit(args.output.as_deref(), to_pretty(&doc).as_bytes())?;

    if let Some(sample) = &sample {
        if let Some(path) = &args.pushforward {
            let rows = pushforward_probabilities(&z, sample)?;
            let mut csv = Vec::new();
            formats::write_pushforward(&rows, &mut csv)?;
            emit(Some(path), &csv)?;
        }
        if let Some(path) = &args.betas {
            let mut csv = Vec::new();
            formats::write_beta_draws(z.column_names(), sample.draws(), &mut csv)?;
            emit(Some(path), &csv)?;
        }
    }
    if prior.is_degenerate() {
        eprintln!("warning: as many covariates as roads; residual variance set to 0");
    }
    if !clamped.is_empty() {
        eprintln!("warning: clamped expert probabilities for {}", clamped.join(", "));
    }
    Ok(())
}
