//! Subcommand definitions and their runners.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sqrbm_core::datasets::DatasetKind;
use sqrbm_core::model::{param_count, OperatorSet};
use sqrbm_core::optim::AmsGradConfig;
use sqrbm_core::trainer::{
    gradient_variance_study, mapping_check, train_one, ModelKind, RunConfig, VarianceStudy,
};

use crate::config::{flag_names, merge, Span};
use crate::io::{self, artifact, num, Checkpoint};
use crate::sweep::{merge_rows, run_grid, summary};
use crate::verify::{run_suite, Options, Suite};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "sqrbm",
    version,
    about = "Exact training and verification of RBMs and semi-quantum RBMs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model on one target and write the run record and final checkpoint.
    Train(TrainArgs),
    /// Train a grid of (dataset, n, m, model, seed) runs and write a CSV table and summary.
    Sweep(SweepArgs),
    /// Run verification batteries; exit 0 iff every check is within tolerance.
    Verify(VerifyArgs),
    /// Gradient variance of a_1, b_1^P and w_11^{Z,P} over random initializations (parity target).
    Gradvar(GradvarArgs),
    /// Print or write a target distribution as JSON.
    Dataset(DatasetArgs),
    /// Map an sqRBM to an RBM with |W_h|*m hidden units and report the TVD between them.
    Equiv(EquivArgs),
}

/// Optimizer and training-loop settings shared by `train` and `sweep`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Knobs {
    /// Maximum optimizer iterations per run [default: 1000]
    #[arg(long)]
    pub iters: Option<usize>,
    /// AMSGrad learning rate [default: 0.1]
    #[arg(long)]
    pub lr: Option<f64>,
    /// AMSGrad first-moment decay [default: 0.9]
    #[arg(long)]
    pub beta1: Option<f64>,
    /// AMSGrad second-moment decay [default: 0.999]
    #[arg(long)]
    pub beta2: Option<f64>,
    /// AMSGrad denominator offset [default: 1e-8]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Lower end of the uniform initialization range [default: -1]
    #[arg(long, allow_negative_numbers = true)]
    pub init_lo: Option<f64>,
    /// Upper end of the uniform initialization range [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub init_hi: Option<f64>,
    /// Record the trajectory every this many iterations [default: 10]
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Early-stop window in iterations [default: 50]
    #[arg(long)]
    pub patience: Option<usize>,
    /// Stop when KL improved by less than this over the window [default: 1e-6]
    #[arg(long)]
    pub min_improvement: Option<f64>,
    /// Stop when every gradient entry is at most this in magnitude [default: 1e-12]
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Mean-TVD threshold for the minimum-hidden-units analysis [default: 0.2]
    #[arg(long)]
    pub tvd_threshold: Option<f64>,
}

impl Knobs {
    fn apply(&self, c: &mut RunConfig) {
        let o = &mut c.optimizer;
        set(&mut c.max_iters, self.iters);
        set(&mut o.lr, self.lr);
        set(&mut o.beta1, self.beta1);
        set(&mut o.beta2, self.beta2);
        set(&mut o.eps, self.eps);
        set(&mut c.init_lo, self.init_lo);
        set(&mut c.init_hi, self.init_hi);
        set(&mut c.record_every, self.record_every);
        set(&mut c.patience, self.patience);
        set(&mut c.min_improvement, self.min_improvement);
        set(&mut c.grad_tol, self.grad_tol);
        set(&mut c.tvd_threshold, self.tvd_threshold);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainArgs {
    /// TOML or JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Model: rbm, sqrbm-xz, sqrbm-yz or sqrbm-xyz
    #[arg(long)]
    pub model: Option<String>,
    /// Number of visible units
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of hidden units
    #[arg(long)]
    pub m: Option<usize>,
    /// Target: parity, cardinality, bas or poly
    #[arg(long)]
    pub dataset: Option<String>,
    /// Run seed for initialization and the seeded dataset [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: Knobs,
    /// Run record (JSON) [default: results.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Final parameters (JSON) [default: model.json]
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    /// TOML or JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Comma-separated targets [default: parity]
    #[arg(long, value_delimiter = ',')]
    pub datasets: Option<Vec<String>>,
    /// Visible sizes, e.g. 6 or 4,6 or 4-8
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<Span>>,
    /// Hidden sizes, e.g. 1-8
    #[arg(long, value_delimiter = ',')]
    pub ms: Option<Vec<Span>>,
    /// Comma-separated models [default: all four]
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    /// Run seeds [default: 0-19]
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<Span>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: Knobs,
    /// Worker threads [default: available cores]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Result table (CSV) [default: sweep.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Threshold analysis (JSON) [default: the table path with a .json extension]
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Recompute every row instead of skipping rows already in the output table
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_resume: Option<bool>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// TOML or JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// oracle, grads, commutator, equivalence or all [default: all]
    #[arg(long)]
    pub suite: Option<String>,
    /// Seed for the random instances [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Perturb the analytic gradient (negative control)
    #[arg(long, hide = true, num_args = 0..=1, default_missing_value = "true")]
    pub inject_gradient_fault: Option<bool>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GradvarArgs {
    /// TOML or JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Visible sizes, e.g. 8 or 4-8 [default: 8]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<Span>>,
    /// Hidden sizes, e.g. 1-6 (conflicts with --mmax)
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<Span>>,
    /// Hidden sizes 1..=mmax [default: 6]
    #[arg(long)]
    pub mmax: Option<usize>,
    /// Random initializations per (model, n, m) [default: 1000]
    #[arg(long)]
    pub draws: Option<usize>,
    /// Lower end of the initialization range [default: -10]
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Upper end of the initialization range [default: 10]
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    /// Comma-separated models [default: all four]
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    /// Base seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output table (CSV) [default: gradvar.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DatasetArgs {
    /// TOML or JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// parity, cardinality, bas or poly
    #[arg(long)]
    pub name: Option<String>,
    /// Number of bits
    #[arg(long)]
    pub n: Option<usize>,
    /// Run seed; only poly depends on it [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path, `-` for stdout [default: -]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EquivArgs {
    /// TOML or JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Number of visible units
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of sqRBM hidden units
    #[arg(long)]
    pub m: Option<usize>,
    /// Hidden operator set, e.g. xz or xyz
    #[arg(long)]
    pub ops: Option<String>,
    /// Parameters drawn uniform in [-scale, scale] [default: 0.01]
    #[arg(long)]
    pub scale: Option<f64>,
    /// Seed for the parameter draw [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path, `-` for stdout [default: -]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn keys(sub: &str) -> BTreeSet<String> {
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(sub).expect("subcommand exists");
    flag_names(sub)
}

fn resolve<T>(args: &T, config: Option<&Path>, sub: &str) -> Result<T, CliError>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    merge(args, config, &keys(sub))
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn parse_model(s: &str) -> Result<ModelKind, CliError> {
    ModelKind::from_name(s).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown model `{s}` (expected rbm, sqrbm-xz, sqrbm-yz or sqrbm-xyz)"
        ))
    })
}

fn parse_dataset(s: &str) -> Result<DatasetKind, CliError> {
    DatasetKind::from_name(s).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown dataset `{s}` (expected parity, cardinality, bas or poly)"
        ))
    })
}

fn to_usize(v: u64, flag: &str) -> Result<usize, CliError> {
    usize::try_from(v).map_err(|_| CliError::Usage(format!("--{flag} value {v} is too large")))
}

/// Resolved training settings in flag spelling, echoed into every artifact.
fn training_json(c: &RunConfig) -> Map<String, Value> {
    let AmsGradConfig {
        lr,
        beta1,
        beta2,
        eps,
    } = c.optimizer;
    let Value::Object(map) = json!({
        "iters": c.max_iters,
        "lr": lr,
        "beta1": beta1,
        "beta2": beta2,
        "eps": eps,
        "init-lo": c.init_lo,
        "init-hi": c.init_hi,
        "record-every": c.record_every,
        "patience": c.patience,
        "min-improvement": c.min_improvement,
        "grad-tol": c.grad_tol,
        "tvd-threshold": c.tvd_threshold,
    }) else {
        unreachable!()
    };
    map
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(a) => train(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Verify(a) => verify(&a),
        Command::Gradvar(a) => gradvar(&a),
        Command::Dataset(a) => dataset(&a),
        Command::Equiv(a) => equiv(&a),
    }
}

fn train(args: &TrainArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let a = resolve(args, args.config.as_deref(), "train")?;
    let model = parse_model(&required(a.model, "model")?)?;
    let dataset = parse_dataset(&required(a.dataset, "dataset")?)?;
    let (n, m) = (required(a.n, "n")?, required(a.m, "m")?);
    let seed = a.seed.unwrap_or(0);
    let mut rc = RunConfig::new(model, n, m, dataset);
    a.knobs.apply(&mut rc);
    rc.seeds = vec![seed];
    rc.validate().map_err(CliError::usage)?;
    let spec = rc.spec().map_err(CliError::usage)?;

    let r = train_one(&rc, seed).map_err(CliError::runtime)?;

    let mut config = Map::new();
    config.insert("model".into(), json!(model.name()));
    config.insert("n".into(), json!(n));
    config.insert("m".into(), json!(m));
    config.insert("dataset".into(), json!(dataset.name()));
    config.insert("seed".into(), json!(seed));
    config.extend(training_json(&rc));
    let trajectory: Vec<Value> = r
        .trajectory
        .iter()
        .map(|p| json!({ "iter": p.iter, "kl": num(p.kl), "tvd": num(p.tvd) }))
        .collect();
    let body = json!({
        "result": {
            "seed": r.seed,
            "param_count": param_count(&spec).map_err(CliError::runtime)?,
            "initial_kl": num(r.initial_kl),
            "initial_tvd": num(r.initial_tvd),
            "final_kl": num(r.final_kl),
            "final_tvd": num(r.final_tvd),
            "iterations": r.iterations,
            "stopped_early": r.stopped_early,
            "trajectory": trajectory,
        }
    });
    let out = a.out.unwrap_or_else(|| "results.json".into());
    io::write_json(&out, &artifact("train", &config, body, started))?;

    let mut ck = Checkpoint::new(&spec, &r.params);
    ck.version = Some(sqrbm_core::VERSION.to_string());
    ck.config = Some(Value::Object(config));
    let ck_path = a.checkpoint.unwrap_or_else(|| "model.json".into());
    let text = serde_json::to_string_pretty(&ck).map_err(|e| CliError::Runtime(e.to_string()))?;
    io::write_file(&ck_path, format!("{text}\n").as_bytes())?;

    println!(
        "{model} n={n} m={m} {dataset} seed={seed}: KL {:.6e} -> {:.6e}, TVD {:.6} -> {:.6} after {} iterations",
        r.initial_kl, r.final_kl, r.initial_tvd, r.final_tvd, r.iterations
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let a = resolve(args, args.config.as_deref(), "sweep")?;
    let datasets = a
        .datasets
        .clone()
        .unwrap_or_else(|| vec!["parity".into()])
        .iter()
        .map(|s| parse_dataset(s))
        .collect::<Result<Vec<_>, _>>()?;
    let models = match &a.models {
        Some(list) => list
            .iter()
            .map(|s| parse_model(s))
            .collect::<Result<Vec<_>, _>>()?,
        None => ModelKind::ALL.to_vec(),
    };
    let ns = Span::expand(&required(a.ns.clone(), "ns")?);
    let ms = Span::expand(&required(a.ms.clone(), "ms")?);
    let seeds = Span::expand(
        &a.seeds
            .clone()
            .unwrap_or_else(|| vec![Span { lo: 0, hi: 19 }]),
    );

    let mut grid = Vec::new();
    let mut template = RunConfig::new(ModelKind::Rbm, 2, 1, DatasetKind::Parity);
    a.knobs.apply(&mut template);
    template.seeds = seeds.clone();
    for &dataset in &datasets {
        for &n in &ns {
            for &m in &ms {
                for &model in &models {
                    let c = RunConfig {
                        model,
                        n: to_usize(n, "ns")?,
                        m: to_usize(m, "ms")?,
                        dataset,
                        ..template.clone()
                    };
                    c.validate().map_err(CliError::usage)?;
                    grid.push(c);
                }
            }
        }
    }

    let mut config = Map::new();
    config.insert(
        "datasets".into(),
        json!(datasets.iter().map(|d| d.name()).collect::<Vec<_>>()),
    );
    config.insert("ns".into(), json!(ns));
    config.insert("ms".into(), json!(ms));
    config.insert(
        "models".into(),
        json!(models.iter().map(|m| m.name()).collect::<Vec<_>>()),
    );
    config.insert("seeds".into(), json!(seeds));
    config.extend(training_json(&template));
    let config = Value::Object(config);

    let out = a.out.clone().unwrap_or_else(|| "sweep.csv".into());
    let summary_path = a
        .summary
        .clone()
        .unwrap_or_else(|| out.with_extension("json"));
    let resume = !a.no_resume.unwrap_or(false);
    let existing = if resume && out.exists() {
        let planned: BTreeSet<_> = grid
            .iter()
            .flat_map(|c| {
                c.seeds
                    .iter()
                    .map(move |&s| (c.dataset, c.n, c.m, c.model, s))
            })
            .collect();
        io::read_sweep_csv(&out)?
            .into_iter()
            .filter(|r| planned.contains(&r.key()))
            .collect()
    } else {
        Vec::new()
    };
    let done = existing.iter().map(|r| r.key()).collect();
    let jobs = a.jobs.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    let skipped = existing.len();
    let (fresh, failures) = run_grid(&grid, &done, jobs)?;
    let ran = fresh.len();
    let rows = merge_rows(existing, fresh);
    io::write_sweep_csv(&out, &rows, &config)?;
    let body = json!({ "summary": summary(&rows, template.tvd_threshold) });
    io::write_json(&summary_path, &artifact("sweep", &config, body, started))?;
    println!(
        "{} rows written to {} ({ran} run, {skipped} resumed)",
        rows.len(),
        out.display()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        for f in &failures {
            eprintln!("run {:?} failed: {}", f.key, f.message);
        }
        Err(CliError::Runtime(format!("{} runs failed", failures.len())))
    }
}

fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let a = resolve(args, args.config.as_deref(), "verify")?;
    let name = a.suite.unwrap_or_else(|| "all".into());
    let suites = Suite::parse_list(&name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown suite `{name}` (expected oracle, grads, commutator, equivalence or all)"
        ))
    })?;
    let opts = Options {
        seed: a.seed.unwrap_or(0),
        inject_gradient_fault: a.inject_gradient_fault.unwrap_or(false),
    };
    let mut failed = 0;
    for suite in suites {
        let started = Instant::now();
        for check in run_suite(suite, &opts)? {
            if !check.passed() {
                failed += 1;
            }
            println!("{check}");
        }
        eprintln!("[{suite}] {:.1} s", started.elapsed().as_secs_f64());
    }
    if failed == 0 {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliError::Runtime(format!("{failed} checks failed")))
    }
}

fn gradvar(args: &GradvarArgs) -> Result<(), CliError> {
    let a = resolve(args, args.config.as_deref(), "gradvar")?;
    let ns = Span::expand(&a.n.clone().unwrap_or_else(|| vec![Span { lo: 8, hi: 8 }]));
    let ms = match (&a.m, a.mmax) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--m and --mmax are mutually exclusive".into(),
            ))
        }
        (Some(list), None) => Span::expand(list),
        (None, mmax) => (1..=mmax.unwrap_or(6) as u64).collect(),
    };
    let models = match &a.models {
        Some(list) => list
            .iter()
            .map(|s| parse_model(s))
            .collect::<Result<Vec<_>, _>>()?,
        None => ModelKind::ALL.to_vec(),
    };
    let study = VarianceStudy {
        models: models.clone(),
        ns: ns
            .iter()
            .map(|&n| to_usize(n, "n"))
            .collect::<Result<_, _>>()?,
        ms: ms
            .iter()
            .map(|&m| to_usize(m, "m"))
            .collect::<Result<_, _>>()?,
        draws: a.draws.unwrap_or(1000),
        lo: a.lo.unwrap_or(-10.0),
        hi: a.hi.unwrap_or(10.0),
        seed: a.seed.unwrap_or(0),
    };
    for &model in &study.models {
        for &n in &study.ns {
            sqrbm_core::datasets::DatasetKind::Parity
                .check(n)
                .map_err(CliError::usage)?;
            for &m in &study.ms {
                model.spec(n, m).map_err(CliError::usage)?;
            }
        }
    }
    if study.draws == 0 || study.lo.partial_cmp(&study.hi) != Some(std::cmp::Ordering::Less) {
        return Err(CliError::Usage("need --draws >= 1 and --lo < --hi".into()));
    }
    let rows = gradient_variance_study(&study).map_err(CliError::runtime)?;
    let config = json!({
        "n": study.ns,
        "m": study.ms,
        "draws": study.draws,
        "lo": study.lo,
        "hi": study.hi,
        "models": models.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "seed": study.seed,
        "target": "parity",
    });
    let out = a.out.unwrap_or_else(|| "gradvar.csv".into());
    io::write_gradvar_csv(&out, &rows, &config)?;
    println!("{} rows written to {}", rows.len(), out.display());
    Ok(())
}

fn dataset(args: &DatasetArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let a = resolve(args, args.config.as_deref(), "dataset")?;
    let kind = parse_dataset(&required(a.name, "name")?)?;
    let n = required(a.n, "n")?;
    let seed = a.seed.unwrap_or(0);
    kind.check(n).map_err(CliError::usage)?;
    let q = kind
        .generate(n, sqrbm_core::trainer::dataset_seed(seed))
        .map_err(CliError::usage)?;
    let config = json!({ "name": kind.name(), "n": n, "seed": seed });
    let value = artifact("dataset", &config, io::target_json(&q), started);
    let mut text =
        serde_json::to_string_pretty(&value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    io::emit(&a.out.unwrap_or_else(|| "-".into()), &text)
}

fn equiv(args: &EquivArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let a = resolve(args, args.config.as_deref(), "equiv")?;
    let n = required(a.n, "n")?;
    let m = required(a.m, "m")?;
    let ops = OperatorSet::parse(&required(a.ops, "ops")?).map_err(CliError::usage)?;
    let scale = a.scale.unwrap_or(0.01);
    let seed = a.seed.unwrap_or(0);
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(CliError::Usage(format!(
            "--scale must be non-negative, got {scale}"
        )));
    }
    sqrbm_core::model::ModelSpec::restricted(n, m, ops).map_err(CliError::usage)?;
    let r = mapping_check(n, m, ops, scale, seed).map_err(CliError::runtime)?;
    let config = json!({ "n": n, "m": m, "ops": ops.label(), "scale": scale, "seed": seed });
    let body = json!({
        "report": {
            "rbm_hidden": r.rbm_hidden,
            "sq_param_count": r.sq_param_count,
            "rbm_param_count": r.rbm_param_count,
            "tvd": num(r.tvd),
        }
    });
    let value = artifact("equiv", &config, body, started);
    let mut text =
        serde_json::to_string_pretty(&value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    io::emit(&a.out.unwrap_or_else(|| "-".into()), &text)
}
