use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use hardy_rellich::agmon::{
    build_cutoffs, completeness_probe, energy_decay, first_shell_beyond, graph_norm_defect,
};
use hardy_rellich::constants::grushin_constants;
use hardy_rellich::form_calculus::{run_family, DiscreteForm, FamilyReport};
use hardy_rellich::grushin::{
    grushin_hardy_estimate, product_rellich_quotient, GrushinConfig, RadialFactor, SecondFactor,
    LAMBDA_SWEEP,
};
use hardy_rellich::radial::{
    hardy_convergence, rellich_convergence, rellich_quotient_min, trial_alpha, trial_jet, Cutoff,
    TrialSide,
};
use hardy_rellich::{
    rellich_constant, ConstantLedger, ConvergenceReport, Error, Exponent, GridSpec, QuotientKind,
    RadialGrid, WeightParams, WeightProfile,
};

use crate::config::RunConfig;
use crate::report::{write_json, write_rows, LedgerSnapshot, ReportRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_RELLICH_FAILS: i32 = 2;
pub const EXIT_HARDY_FAILS: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "hrverify",
    version,
    about = "Numerical checks of weighted Hardy and Rellich inequalities"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for identities and sweep.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Print the report record as JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Debug, Default)]
struct WeightOverride {
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    delta: Option<Exponent>,
    #[arg(long = "delta-prime")]
    delta_prime: Option<Exponent>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the constant ledger for (d, delta, delta').
    Constants {
        dim: u32,
        delta: Exponent,
        delta_prime: Exponent,
        /// Treat d as the first-factor dimension of a Grushin form with this d2.
        #[arg(long, value_name = "D2")]
        grushin: Option<u32>,
    },
    /// Refine the discrete Hardy quotient towards a1.
    VerifyHardy(WeightOverride),
    /// Refine the discrete Rellich quotient towards a2.
    VerifyRellich(WeightOverride),
    /// Run the form-calculus identity suite.
    Identities,
    /// Distance probe, eikonal bound and cutoff energy decay.
    Agmon(WeightOverride),
    /// Separated Grushin quotients.
    Grushin(WeightOverride),
    /// Ledgers (and optionally estimates) over a parameter grid.
    Sweep,
}

struct Ctx<'a> {
    cfg: RunConfig,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    json: bool,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn artifact(&self, name: &str) -> anyhow::Result<Option<PathBuf>> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
                Ok(Some(dir.join(name)))
            }
            None => Ok(None),
        }
    }

    fn pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.jobs {
            b = b.num_threads(n.max(1));
        }
        Ok(b.build()?)
    }
}

/// Failure with a fixed exit code.
#[derive(Debug)]
struct Exit {
    code: i32,
    message: String,
}

type Outcome = Result<i32, Exit>;

fn fail(code: i32) -> impl Fn(anyhow::Error) -> Exit {
    move |e| Exit {
        code,
        message: format!("{e:#}"),
    }
}

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Outcome {
    let mut cfg = match &cli.global.config {
        Some(path) => RunConfig::load(path).map_err(fail(EXIT_USAGE))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.global.seed {
        cfg.seed = seed;
    }
    if cli.global.jobs == Some(0) {
        return Err(fail(EXIT_USAGE)(anyhow::anyhow!("--jobs must be positive")));
    }
    let mut ctx = Ctx {
        cfg,
        out: cli.global.out,
        jobs: cli.global.jobs,
        json: cli.global.json,
        stdout,
    };
    let result = match cli.command {
        Command::Constants {
            dim,
            delta,
            delta_prime,
            grushin,
        } => constants(&mut ctx, dim, delta, delta_prime, grushin),
        Command::VerifyHardy(w) => verify(&mut ctx, QuotientKind::Hardy, w),
        Command::VerifyRellich(w) => verify(&mut ctx, QuotientKind::Rellich, w),
        Command::Identities => identities(&mut ctx),
        Command::Agmon(w) => agmon(&mut ctx, w),
        Command::Grushin(w) => grushin(&mut ctx, w),
        Command::Sweep => sweep(&mut ctx),
    };
    ctx.stdout
        .flush()
        .map_err(|e| fail(EXIT_FAILURE)(e.into()))?;
    result
}

fn apply_override(ctx: &mut Ctx, w: WeightOverride) -> Result<WeightParams, Exit> {
    let weights = &mut ctx.cfg.weights;
    if let Some(d) = w.dim {
        weights.dim = d;
    }
    if let Some(d) = w.delta {
        weights.delta = d;
    }
    if let Some(d) = w.delta_prime {
        weights.delta_prime = d;
    }
    weights.params().map_err(fail(EXIT_USAGE))
}

fn io(e: std::io::Error) -> Exit {
    fail(EXIT_FAILURE)(e.into())
}

fn ledger_code(ledger: &ConstantLedger) -> i32 {
    if !ledger.hardy_valid {
        EXIT_HARDY_FAILS
    } else if !ledger.rellich_valid {
        EXIT_RELLICH_FAILS
    } else {
        EXIT_OK
    }
}

fn constants(
    ctx: &mut Ctx,
    dim: u32,
    delta: Exponent,
    delta_prime: Exponent,
    d2: Option<u32>,
) -> Outcome {
    let params = WeightParams::from_exponents(dim, delta, delta_prime)
        .map_err(|e| fail(EXIT_USAGE)(e.into()))?;
    let ledger = match d2 {
        Some(0) => return Err(fail(EXIT_USAGE)(anyhow::anyhow!("--grushin needs d2 >= 1"))),
        Some(_) => grushin_constants(&params),
        None => rellich_constant(&params),
    };
    if ctx.json {
        let snap = serde_json::to_string_pretty(&LedgerSnapshot::of(&ledger))
            .expect("snapshot serializes");
        writeln!(ctx.stdout, "{snap}").map_err(io)?;
    } else {
        write!(ctx.stdout, "{}", ledger.render()).map_err(io)?;
    }
    Ok(ledger_code(&ledger))
}

/// Runs `schedule` one step at a time so each solve can be timed.
fn timed_convergence(
    profile: &WeightProfile,
    kind: QuotientKind,
    schedule: &[GridSpec],
    ctx: &Ctx,
) -> Result<(ConvergenceReport, Vec<f64>), Error> {
    let solve = match kind {
        QuotientKind::Hardy => hardy_convergence,
        QuotientKind::Rellich => rellich_convergence,
    };
    let mut estimates = Vec::with_capacity(schedule.len());
    let mut seconds = Vec::with_capacity(schedule.len());
    let mut first = None;
    for (step, spec) in schedule.iter().enumerate() {
        let start = Instant::now();
        let report =
            solve(profile, std::slice::from_ref(spec), &ctx.cfg.solver).map_err(|e| match e {
                Error::Refinement { source, .. } => Error::Refinement { step, source },
                other => other,
            })?;
        seconds.push(if ctx.cfg.report.record_timings {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        });
        estimates.extend(report.estimates.iter().cloned());
        first.get_or_insert(report);
    }
    let first = first.ok_or_else(|| Error::Config("empty grid schedule".into()))?;
    Ok((
        ConvergenceReport::from_estimates(first.target, kind, first.sharp, estimates),
        seconds,
    ))
}

fn print_estimates(ctx: &mut Ctx, record: &ReportRecord) -> std::io::Result<()> {
    writeln!(
        ctx.stdout,
        "{:>6} {:>10} {:>10} {:>18} {:>12} {:>10}",
        "n", "r_min", "r_max", "estimate", "gap", "residual"
    )?;
    for row in &record.estimates {
        writeln!(
            ctx.stdout,
            "{:>6} {:>10.1e} {:>10.1e} {:>18.12} {:>12.4e} {:>10.2e}",
            row.n, row.r_min, row.r_max, row.estimate, row.gap, row.residual
        )?;
    }
    Ok(())
}

fn verify(ctx: &mut Ctx, kind: QuotientKind, w: WeightOverride) -> Outcome {
    let params = apply_override(ctx, w)?;
    let ledger = rellich_constant(&params);
    let command = match kind {
        QuotientKind::Hardy => "verify-hardy",
        QuotientKind::Rellich => "verify-rellich",
    };
    if !ledger.hardy_valid {
        writeln!(
            ctx.stdout,
            "refusing {command}: no Hardy inequality for {params}"
        )
        .map_err(io)?;
        return Ok(EXIT_HARDY_FAILS);
    }
    if kind == QuotientKind::Rellich && !ledger.rellich_valid {
        writeln!(
            ctx.stdout,
            "refusing {command}: criterion nu<a1 fails for {params}"
        )
        .map_err(io)?;
        return Ok(EXIT_RELLICH_FAILS);
    }
    let profile = WeightProfile::new(params);
    let schedule = ctx.cfg.grid.schedule.clone();
    let (report, seconds) = timed_convergence(&profile, kind, &schedule, ctx)
        .map_err(|e| fail(EXIT_FAILURE)(e.into()))?;
    let record = ReportRecord::new(
        ctx.cfg.run_id(command),
        command,
        &ledger,
        ctx.cfg.report.record_timings,
    )
    .with_convergence(&report, &seconds);

    print_estimates(ctx, &record).map_err(io)?;
    let gap = report.final_relative_gap().unwrap_or(f64::NAN);
    writeln!(
        ctx.stdout,
        "target {:.12}  final gap {:.4}%  monotone {}  one-sided {}",
        report.target,
        100.0 * gap,
        report.monotone,
        report.one_sided()
    )
    .map_err(io)?;
    if ctx.json {
        writeln!(ctx.stdout, "{}", record.to_json()).map_err(io)?;
    }
    if let Some(csv) = ctx
        .artifact(&format!("{command}.csv"))
        .map_err(fail(EXIT_FAILURE))?
    {
        write_rows(&csv, &record.estimates).map_err(fail(EXIT_FAILURE))?;
        write_json(&csv.with_extension("json"), &record).map_err(fail(EXIT_FAILURE))?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct IdentityRow {
    dim: u32,
    delta: String,
    delta_prime: String,
    check: String,
    equality: bool,
    worst: f64,
}

fn identities(ctx: &mut Ctx) -> Outcome {
    let id = ctx.cfg.identities.clone();
    let grid =
        RadialGrid::log(id.r_min, id.r_max, id.nodes).map_err(|e| fail(EXIT_USAGE)(e.into()))?;
    let mut families = Vec::new();
    for d in &id.dims {
        for a in &id.exponents {
            for b in &id.exponents {
                let p = WeightParams::from_exponents(*d, a.clone(), b.clone())
                    .map_err(|e| fail(EXIT_USAGE)(e.into()))?;
                families.push(p);
            }
        }
    }
    let seed = ctx.cfg.seed;
    let pool = ctx.pool().map_err(fail(EXIT_FAILURE))?;
    let reports: Vec<FamilyReport> = pool
        .install(|| {
            families
                .par_iter()
                .enumerate()
                .map(|(i, p)| run_family(p, &grid, id.samples, seed, i as u64))
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(|e| fail(EXIT_FAILURE)(e.into()))?;

    // worst value per check across families, in first-seen order
    let mut worst: Vec<(String, bool, f64)> = Vec::new();
    for r in &reports {
        for c in &r.checks {
            match worst.iter_mut().find(|w| w.0 == c.name) {
                Some(w) => w.2 = w.2.max(c.worst),
                None => worst.push((c.name.clone(), c.equality, c.worst)),
            }
        }
    }
    let mut all_pass = true;
    writeln!(
        ctx.stdout,
        "{} families x {} samples, seed {seed}",
        reports.len(),
        id.samples
    )
    .map_err(io)?;
    for (name, equality, value) in &worst {
        let (label, limit) = if *equality {
            ("residual", id.equality_tolerance)
        } else {
            ("excess", id.inequality_slack)
        };
        let ok = *value <= limit;
        all_pass &= ok;
        writeln!(
            ctx.stdout,
            "{:<28} max {label:<8} {value:>11.3e}  limit {limit:.0e}  {}",
            name,
            if ok { "PASS" } else { "FAIL" }
        )
        .map_err(io)?;
    }
    if ctx.json {
        writeln!(
            ctx.stdout,
            "{}",
            serde_json::to_string_pretty(&reports).expect("reports serialize")
        )
        .map_err(io)?;
    }
    if let Some(path) = ctx.artifact("identities.csv").map_err(fail(EXIT_FAILURE))? {
        let rows: Vec<IdentityRow> = reports
            .iter()
            .flat_map(|r| {
                r.checks.iter().map(move |c| IdentityRow {
                    dim: r.params.dim,
                    delta: r.params.delta.to_string(),
                    delta_prime: r.params.delta_prime.to_string(),
                    check: c.name.clone(),
                    equality: c.equality,
                    worst: c.worst,
                })
            })
            .collect();
        write_rows(&path, &rows).map_err(fail(EXIT_FAILURE))?;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_FAILURE })
}

#[derive(Serialize)]
struct DecayRow {
    n: usize,
    inner: f64,
    outer: f64,
    value: f64,
    bound: f64,
    graph_defect: f64,
}

fn agmon(ctx: &mut Ctx, w: WeightOverride) -> Outcome {
    let params = apply_override(ctx, w)?;
    let cfg = ctx.cfg.agmon;
    let solver_err = |e: Error| fail(EXIT_FAILURE)(e.into());

    let radii: Vec<f64> = cfg.exhaustion.shells().iter().map(|s| s.inner).collect();
    let probe = completeness_probe(1.0, &radii).map_err(solver_err)?;
    let beyond = first_shell_beyond(1.0, &radii, cfg.m).map_err(solver_err)?;
    writeln!(
        ctx.stdout,
        "probe from r=1: d2 to 10^-1 = {:.12}, to 10^-{} = {:.6}, first shell beyond m: {}",
        probe.first().copied().unwrap_or(f64::NAN),
        probe.len(),
        probe.last().copied().unwrap_or(f64::NAN),
        beyond.map_or("none".to_string(), |i| (i + 1).to_string())
    )
    .map_err(io)?;

    let grid = cfg.grid().map_err(solver_err)?;
    let cutoffs = build_cutoffs(&grid, cfg.m, &cfg.exhaustion).map_err(solver_err)?;
    writeln!(
        ctx.stdout,
        "eikonal max excess {:.3e}  lipschitz max excess {:.3e}",
        cutoffs.eikonal_excess(),
        cutoffs.lipschitz_excess()
    )
    .map_err(io)?;

    let profile = WeightProfile::new(params.clone());
    let ledger = rellich_constant(&params);
    if !ledger.hardy_valid {
        writeln!(ctx.stdout, "no Hardy trial function for {params}").map_err(io)?;
        return Ok(EXIT_HARDY_FAILS);
    }
    let form = DiscreteForm::new(&profile, &grid).map_err(solver_err)?;
    let alpha = trial_alpha(&profile, TrialSide::Origin, 0.1);
    let cutoff = Cutoff::default_for(TrialSide::Origin);
    let phi = form.analytic(|r| trial_jet(alpha, &cutoff, TrialSide::Origin, r));
    let energy = form.energy(&phi, &phi);
    let terms = energy_decay(&form, &cutoffs, &phi);
    let defect = graph_norm_defect(&form, &cutoffs, &phi);
    let rows: Vec<DecayRow> = terms
        .iter()
        .zip(&defect)
        .zip(&cutoffs.shells)
        .map(|((t, g), s)| DecayRow {
            n: t.n,
            inner: s.inner,
            outer: s.outer,
            value: t.value,
            bound: t.bound,
            graph_defect: *g,
        })
        .collect();
    let crossing = terms
        .iter()
        .rposition(|t| t.value >= 1e-6 * energy)
        .map(|i| i + 1)
        .filter(|i| *i < terms.len())
        .map(|i| terms[i].n);
    writeln!(
        ctx.stdout,
        "trial energy {energy:.12e}; h(rho_n) below 1e-6 E from n = {}",
        crossing.map_or("never".to_string(), |n| n.to_string())
    )
    .map_err(io)?;

    if ctx.json {
        writeln!(
            ctx.stdout,
            "{}",
            serde_json::to_string_pretty(&rows).expect("rows serialize")
        )
        .map_err(io)?;
    }
    match ctx
        .artifact("agmon_decay.csv")
        .map_err(fail(EXIT_FAILURE))?
    {
        Some(path) => write_rows(&path, &rows).map_err(fail(EXIT_FAILURE))?,
        None if !ctx.json => print_csv(ctx.stdout, &rows).map_err(fail(EXIT_FAILURE))?,
        None => {}
    }
    Ok(EXIT_OK)
}

fn print_csv<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LambdaRow {
    lambda: f64,
    hardy: f64,
    rellich: Option<f64>,
}

fn grushin(ctx: &mut Ctx, w: WeightOverride) -> Outcome {
    let params = apply_override(ctx, w)?;
    let block = ctx.cfg.grushin.clone();
    let config = GrushinConfig {
        params: params.clone(),
        dim2: block.dim2,
        b: block.b,
        half_width: block.half_width,
        second_nodes: block.second_nodes,
    };
    let ledger = grushin_constants(&params);
    if !ledger.hardy_valid {
        write!(ctx.stdout, "{}", ledger.render()).map_err(io)?;
        return Ok(EXIT_HARDY_FAILS);
    }
    let solver_err = |e: Error| fail(EXIT_FAILURE)(e.into());
    let hardy =
        grushin_hardy_estimate(&config, &block.schedule, &ctx.cfg.solver).map_err(solver_err)?;

    // Rellich side on the finest grid, only where the identity applies
    let rellich: Option<Vec<f64>> = match (
        ledger.rellich_valid,
        config.b.constant(),
        block.schedule.last(),
    ) {
        (true, Some(_), Some(spec)) => {
            let radial = RadialFactor::new(&config, spec).map_err(solver_err)?;
            let psi = rellich_quotient_min(&radial.forms, &ctx.cfg.solver).map_err(solver_err)?;
            let chi = SecondFactor::bump(&config).map_err(solver_err)?;
            Some(
                LAMBDA_SWEEP
                    .iter()
                    .map(|l| product_rellich_quotient(&radial, &psi.eigenvector, &chi, *l))
                    .collect::<Result<_, _>>()
                    .map_err(solver_err)?,
            )
        }
        _ => None,
    };
    let rows: Vec<LambdaRow> = hardy
        .lambda_sweep
        .iter()
        .enumerate()
        .map(|(i, (lambda, q))| LambdaRow {
            lambda: *lambda,
            hardy: *q,
            rellich: rellich.as_ref().map(|r| r[i]),
        })
        .collect();

    let command = "grushin";
    let record = ReportRecord::new(
        ctx.cfg.run_id(command),
        command,
        &ledger,
        ctx.cfg.report.record_timings,
    )
    .with_convergence(&hardy.convergence, &[]);
    writeln!(
        ctx.stdout,
        "d1 = {}, d2 = {}, target a1 = {:.12}",
        params.dim, config.dim2, hardy.convergence.target
    )
    .map_err(io)?;
    print_estimates(ctx, &record).map_err(io)?;
    writeln!(
        ctx.stdout,
        "first-factor quotient {:.12}",
        hardy.first_factor
    )
    .map_err(io)?;
    for row in &rows {
        match row.rellich {
            Some(r) => writeln!(
                ctx.stdout,
                "lambda {:>7.0e}  hardy {:.12}  rellich {:.12}",
                row.lambda, row.hardy, r
            ),
            None => writeln!(
                ctx.stdout,
                "lambda {:>7.0e}  hardy {:.12}",
                row.lambda, row.hardy
            ),
        }
        .map_err(io)?;
    }
    if ctx.json {
        writeln!(ctx.stdout, "{}", record.to_json()).map_err(io)?;
    }
    if let Some(path) = ctx.artifact("grushin.csv").map_err(fail(EXIT_FAILURE))? {
        write_rows(&path, &record.estimates).map_err(fail(EXIT_FAILURE))?;
        write_rows(&path.with_file_name("grushin_lambda.csv"), &rows)
            .map_err(fail(EXIT_FAILURE))?;
        write_json(&path.with_extension("json"), &record).map_err(fail(EXIT_FAILURE))?;
    }
    Ok(EXIT_OK)
}

/// One line of the sweep summary.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub dim: u32,
    pub delta: String,
    pub delta_prime: String,
    pub sum: f64,
    pub a1: Option<f64>,
    pub nu: f64,
    pub gamma: Option<f64>,
    pub a2: Option<f64>,
    pub regime: String,
    pub hardy_valid: bool,
    pub rellich_valid: bool,
    pub formula_agrees: bool,
    pub hardy_estimate: Option<f64>,
    pub rellich_estimate: Option<f64>,
}

fn sweep_cell(cfg: &RunConfig, params: &WeightParams) -> Result<(SweepRow, ReportRecord), Error> {
    let ledger = rellich_constant(params);
    let name = format!(
        "sweep {} {} {}",
        params.dim, params.delta, params.delta_prime
    );
    let mut record = ReportRecord::new(
        cfg.run_id(&name),
        "sweep",
        &ledger,
        cfg.report.record_timings,
    );
    let mut hardy_estimate = None;
    let mut rellich_estimate = None;
    if cfg.sweep.verify {
        let profile = WeightProfile::new(params.clone());
        let mut reports = Vec::new();
        if ledger.hardy_valid {
            let r = hardy_convergence(&profile, &cfg.sweep.schedule, &cfg.solver)?;
            hardy_estimate = r.final_estimate().map(|e| e.value);
            reports.push(r);
        }
        if ledger.rellich_valid {
            let r = rellich_convergence(&profile, &cfg.sweep.schedule, &cfg.solver)?;
            rellich_estimate = r.final_estimate().map(|e| e.value);
            reports.push(r);
        }
        for r in &reports {
            let part =
                ReportRecord::new(String::new(), "", &ledger, false).with_convergence(r, &[]);
            record.estimates.extend(part.estimates);
            record.gaps.extend(part.gaps);
            if record.diagnostics.is_none() {
                record.diagnostics = part.diagnostics;
            }
        }
    }
    let snap = &record.ledger;
    let row = SweepRow {
        dim: params.dim,
        delta: snap.delta.clone(),
        delta_prime: snap.delta_prime.clone(),
        sum: params.delta.value() + params.delta_prime.value(),
        a1: snap.a1_decimal,
        nu: snap.nu_decimal,
        gamma: snap.gamma_decimal,
        a2: snap.a2_decimal,
        regime: ledger.regime.to_string(),
        hardy_valid: ledger.hardy_valid,
        rellich_valid: ledger.rellich_valid,
        formula_agrees: ledger.formula_agrees(),
        hardy_estimate,
        rellich_estimate,
    };
    Ok((row, record))
}

fn sweep(ctx: &mut Ctx) -> Outcome {
    let s = ctx.cfg.sweep.clone();
    let mut cells = Vec::new();
    for d in &s.dims {
        for a in &s.exponents {
            for b in &s.exponents {
                cells.push(
                    WeightParams::from_exponents(*d, a.clone(), b.clone())
                        .map_err(|e| fail(EXIT_USAGE)(e.into()))?,
                );
            }
        }
    }
    let pool = ctx.pool().map_err(fail(EXIT_FAILURE))?;
    let cfg = &ctx.cfg;
    let results = pool
        .install(|| {
            cells
                .par_iter()
                .map(|p| sweep_cell(cfg, p))
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(|e| fail(EXIT_FAILURE)(e.into()))?;

    let rows: Vec<SweepRow> = results.iter().map(|(r, _)| r.clone()).collect();
    let disagreements = rows.iter().filter(|r| !r.formula_agrees).count();
    if let Some(path) = ctx
        .artifact("sweep_summary.csv")
        .map_err(fail(EXIT_FAILURE))?
    {
        write_rows(&path, &rows).map_err(fail(EXIT_FAILURE))?;
        write_jsonl(
            &path.with_file_name("sweep_records.jsonl"),
            results.iter().map(|(_, r)| r),
        )
        .map_err(fail(EXIT_FAILURE))?;
        writeln!(
            ctx.stdout,
            "{} cells written to {}",
            rows.len(),
            path.display()
        )
        .map_err(io)?;
    } else if ctx.json {
        for (_, r) in &results {
            writeln!(
                ctx.stdout,
                "{}",
                serde_json::to_string(r).expect("record serializes")
            )
            .map_err(io)?;
        }
    } else {
        print_csv(ctx.stdout, &rows).map_err(fail(EXIT_FAILURE))?;
    }
    if disagreements > 0 {
        writeln!(
            ctx.stdout,
            "{disagreements} cells disagree with the regime formula"
        )
        .map_err(io)?;
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

fn write_jsonl<'a>(
    path: &Path,
    records: impl Iterator<Item = &'a ReportRecord>,
) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    for r in records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}
