use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use urysohn::concentration::{levy_check, ConcentrationError, FamilyMember, LevyRow, MMSpace, DEFAULT_EXHAUSTIVE_CAP};
use urysohn::group::PermutationGroup;
use urysohn::hamming::HammingPower;
use urysohn::invariant::{max_bounded_metric, max_invariant_pseudometric, InvariantError};
use urysohn::io::{read_group, read_json, to_json, ActionJson, VValuesJson};
use urysohn::levy::chain::{audit_chain, run_chain, ChainBundle, ChainConfig, ChainError, ChainMode};
use urysohn::levy::extend::{extend_action_approximating, ExtendError, ExtendParams, ExtensionReport, TargetSpec};
use urysohn::metric::{validate, FiniteMetricSpace};
use urysohn::rational::{common_denominator, Rational};

const VALIDATION_FAILURE: u8 = 1;
const INPUT_ERROR: u8 = 2;
const SEARCH_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "urysohn", version, about = "Finite metric spaces, invariant metrics on finite groups and concentration of measure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a space file.
    Validate { space: PathBuf },
    /// Largest left-invariant (pseudo)metric with prescribed values on a subset.
    CayleyMetric {
        group: PathBuf,
        values: PathBuf,
        /// Cap distances at 1; elements not joined by paths get distance 1.
        #[arg(long)]
        bounded: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extend a free isometric action so a new element approximates a target.
    Extend {
        action: PathBuf,
        target: PathBuf,
        #[arg(long, required = true)]
        eps: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        caps: Caps,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a chain of group extensions stage by stage.
    LevyChain {
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON chain configuration; missing fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Continue the stages recorded in an existing bundle.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long)]
        dense: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Concentration function table of an mm-space or of Hamming powers.
    Concentration {
        #[arg(required_unless_present = "hamming", conflicts_with = "hamming")]
        mm: Option<PathBuf>,
        /// Base space (plain or with weights) and largest exponent.
        #[arg(long, num_args = 2, value_names = ["BASE", "M"])]
        hamming: Option<Vec<String>>,
        #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
        eps_grid: Vec<Rational>,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
        cap: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Caps {
    #[arg(long)]
    max_extra: Option<usize>,
    #[arg(long)]
    max_attempts: Option<usize>,
    #[arg(long)]
    ball_cap: Option<usize>,
    #[arg(long)]
    group_cap: Option<usize>,
    #[arg(long)]
    radius_cap: Option<usize>,
}

impl Caps {
    fn apply(&self, p: &mut ExtendParams) -> Result<()> {
        let q = &mut p.quotient;
        for (slot, v) in [
            (&mut q.max_extra, self.max_extra),
            (&mut q.max_attempts, self.max_attempts),
            (&mut q.ball_cap, self.ball_cap),
            (&mut q.group_cap, self.group_cap),
            (&mut p.radius_cap, self.radius_cap),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if q.max_attempts == 0 || q.ball_cap == 0 || q.group_cap == 0 || p.radius_cap == 0 {
            bail!("caps must be positive");
        }
        Ok(())
    }
}

/// A failure with its exit status.
#[derive(Debug)]
struct Exit {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8, error: impl Into<anyhow::Error>) -> Exit {
    Exit { code, error: error.into() }
}

trait InputContext<T> {
    fn input(self) -> std::result::Result<T, Exit>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for std::result::Result<T, E> {
    fn input(self) -> std::result::Result<T, Exit> {
        self.map_err(|e| fail(INPUT_ERROR, e))
    }
}

fn emit(output: Option<&Path>, text: &str) -> std::result::Result<(), Exit> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).input(),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing to stdout").input(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(INPUT_ERROR);
    }
    let result = match cli.command {
        Command::Validate { space } => cmd_validate(&space),
        Command::CayleyMetric { group, values, bounded, output } => cmd_cayley_metric(&group, &values, bounded, output.as_deref()),
        Command::Extend { action, target, eps, seed, caps, output } => cmd_extend(&action, &target, eps, seed, &caps, output.as_deref()),
        Command::LevyChain { stages, seed, config, resume, dense, output, csv } => {
            cmd_levy_chain(stages, seed, config.as_deref(), resume.as_deref(), dense, output.as_deref(), csv.as_deref())
        }
        Command::Concentration { mm, hamming, eps_grid, cap, output } => cmd_concentration(mm.as_deref(), hamming.as_deref(), &eps_grid, cap, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit { code, error }) => {
            eprintln!("error: {}", describe(&error));
            ExitCode::from(code)
        }
    }
}

/// The error chain, skipping causes already quoted by the message above them.
fn describe(error: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in error.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("URYSOHN_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("URYSOHN_THREADS={v:?} is not a count"))?;
        if n == 0 {
            bail!("URYSOHN_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn cmd_validate(path: &Path) -> std::result::Result<(), Exit> {
    let space: FiniteMetricSpace = read_json(path).input()?;
    let violations = validate(&space);
    if violations.is_empty() {
        println!("ok: {} points", space.ids().len());
        return Ok(());
    }
    for v in &violations {
        println!("violation: {v}");
    }
    Err(fail(VALIDATION_FAILURE, anyhow!("{} violation(s) in {}", violations.len(), path.display())))
}

#[derive(Serialize)]
struct MetricOutput {
    bounded: bool,
    group: PermutationGroup,
    order: usize,
    is_metric: bool,
    den: i128,
    from_identity: Vec<i128>,
}

fn cmd_cayley_metric(group: &Path, values: &Path, bounded: bool, output: Option<&Path>) -> std::result::Result<(), Exit> {
    let pg = read_group(group).input()?;
    let g = pg.enumerate(ExtendParams::default().quotient.group_cap).input()?;
    let raw: VValuesJson = read_json(values).input()?;
    let v = raw.resolve(&g).input()?;
    let metric = if bounded { max_bounded_metric(&g, &v) } else { max_invariant_pseudometric(&g, &v) };
    let metric = metric.map_err(|e| match e {
        InvariantError::Disconnected { .. } => fail(VALIDATION_FAILURE, e),
        other => fail(INPUT_ERROR, other),
    })?;
    let den = common_denominator(metric.from_identity.iter());
    let out = MetricOutput {
        bounded,
        order: g.order(),
        group: pg,
        is_metric: metric.is_metric(),
        den,
        from_identity: metric.from_identity.iter().map(|r| r.scaled_to(den).expect("common denominator")).collect(),
    };
    emit(output, &to_json(&out))
}

#[derive(Serialize)]
struct ExtendConfig {
    eps: Rational,
    seed: u64,
    params: ExtendParams,
}

#[derive(Serialize)]
struct ExtendOutput {
    config: ExtendConfig,
    report: ExtensionReport,
    group: PermutationGroup,
    order: usize,
    scale: Rational,
    from_identity: Vec<Rational>,
    g_embedding: Vec<usize>,
    x_embedding: Vec<usize>,
    f_tilde: usize,
}

fn cmd_extend(action: &Path, target: &Path, eps: Rational, seed: u64, caps: &Caps, output: Option<&Path>) -> std::result::Result<(), Exit> {
    let mut params = ExtendParams::default();
    caps.apply(&mut params).input()?;
    params.quotient.seed = seed;
    let act_json: ActionJson = read_json(action).input()?;
    let act = act_json.build(params.quotient.group_cap).input()?;
    let spec: TargetSpec = read_json(target).input()?;
    let x = FiniteMetricSpace::from_space(&*act.space);
    let target = spec.build(&x).input()?;
    let ext = extend_action_approximating(&act, &target, eps, &params).map_err(|e| match e {
        ExtendError::Quotient(_) | ExtendError::RadiusCap { .. } => fail(SEARCH_FAILURE, e),
        ExtendError::Action(_) | ExtendError::Degenerate { .. } | ExtendError::ConnectorConflict(..) | ExtendError::Postcondition(_) => {
            fail(VALIDATION_FAILURE, e)
        }
        other => fail(INPUT_ERROR, other),
    })?;
    let out = ExtendOutput {
        config: ExtendConfig { eps, seed, params },
        group: ext.group.as_group(),
        order: ext.group.order(),
        scale: ext.scale,
        from_identity: ext.metric.from_identity.clone(),
        g_embedding: ext.g_embedding,
        x_embedding: ext.x_embedding,
        f_tilde: ext.f_tilde,
        report: ext.report,
    };
    emit(output, &to_json(&out))
}

fn cmd_levy_chain(
    stages: Option<usize>,
    seed: Option<u64>,
    config: Option<&Path>,
    resume: Option<&Path>,
    dense: bool,
    output: Option<&Path>,
    csv: Option<&Path>,
) -> std::result::Result<(), Exit> {
    let bundle: Option<ChainBundle> = resume.map(read_json).transpose().input()?;
    let mut cfg: ChainConfig = match (config, &bundle) {
        (Some(p), _) => read_json(p).input()?,
        (None, Some(b)) => b.config.clone(),
        (None, None) => ChainConfig::default(),
    };
    if let Some(s) = stages {
        cfg.stages = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if dense {
        cfg.mode = ChainMode::Dense;
    }
    let (bundle, err) = run_chain(&cfg, bundle).map_err(|e| match e {
        ChainError::Bundle(_) => fail(INPUT_ERROR, e),
        other => fail(VALIDATION_FAILURE, other),
    })?;
    emit(output, &to_json(&bundle))?;
    if let Some(p) = csv {
        fs::write(p, chain_csv(&bundle)).with_context(|| format!("writing {}", p.display())).input()?;
    }
    if let Some(e) = err {
        let code = if e.is_search_failure() { SEARCH_FAILURE } else { VALIDATION_FAILURE };
        return Err(fail(code, e));
    }
    audit_chain(&bundle).map_err(|e| fail(VALIDATION_FAILURE, e))?;
    Ok(())
}

fn chain_csv(bundle: &ChainBundle) -> String {
    let mut s = format!("# seed={} stages={} mode={:?}\n", bundle.config.seed, bundle.config.stages, bundle.config.mode);
    s.push_str("n,group_order,points,a_n,m_n,epsilon,alpha_kind,alpha,bound\n");
    let mut order = bundle.initial.order;
    let mut points = bundle.initial.points;
    for st in &bundle.stages {
        for r in &st.concentration {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                st.n,
                order,
                points,
                st.a_n,
                st.m_n,
                r.epsilon,
                r.alpha_kind.label(),
                r.alpha,
                r.bound.map(|b| b.to_string()).unwrap_or_default()
            ));
        }
        order = st.result.order;
        points = st.result.points;
    }
    s
}

fn load_mm(path: &Path) -> Result<MMSpace> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("weights").is_some() {
        return Ok(serde_json::from_value(value)?);
    }
    let space: FiniteMetricSpace = serde_json::from_value(value)?;
    Ok(MMSpace::uniform(space))
}

fn cmd_concentration(
    mm: Option<&Path>,
    hamming: Option<&[String]>,
    grid: &[Rational],
    cap: usize,
    output: Option<&Path>,
) -> std::result::Result<(), Exit> {
    if let Some(e) = grid.iter().find(|e| e.is_negative()) {
        return Err(fail(INPUT_ERROR, ConcentrationError::NegativeEpsilon(*e)));
    }
    let (family, source) = match (mm, hamming) {
        (Some(p), _) => {
            let mm = load_mm(p).input()?;
            (vec![FamilyMember::Explicit { n: 1, mm }], format!("mm={}", p.display()))
        }
        (None, Some([base, m])) => {
            let base_mm = load_mm(Path::new(base)).input()?;
            let m: usize = m.parse().with_context(|| format!("exponent {m:?}")).input()?;
            if m == 0 {
                return Err(fail(INPUT_ERROR, anyhow!("the exponent must be positive")));
            }
            let family = (1..=m)
                .map(|n| FamilyMember::Power {
                    power: HammingPower::new(base_mm.space.clone(), n).expect("positive exponent"),
                    weights: base_mm.weights.clone(),
                })
                .collect();
            (family, format!("hamming={base} m={m}"))
        }
        _ => return Err(fail(INPUT_ERROR, anyhow!("give an mm-space file or --hamming BASE M"))),
    };
    let report = levy_check(&family, grid, cap).input()?;
    let grid_text: Vec<String> = grid.iter().map(Rational::to_string).collect();
    let mut s = format!("# {source} eps_grid={} cap={cap} levy_consistent={}\n", grid_text.join(";"), report.consistent);
    for note in &report.footnotes {
        s.push_str(&format!("# {note}\n"));
    }
    s.push_str("n,epsilon,alpha_kind,alpha,sep,bound\n");
    for r in &report.rows {
        s.push_str(&csv_row(r));
    }
    emit(output, &s)
}

fn csv_row(r: &LevyRow) -> String {
    format!(
        "{},{},{},{},{},{}\n",
        r.n,
        r.epsilon,
        r.alpha_kind.label(),
        r.alpha,
        r.sep.map(|v| v.to_string()).unwrap_or_default(),
        r.bound.map(|b| b.to_string()).unwrap_or_default()
    )
}
