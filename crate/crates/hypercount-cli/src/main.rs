//! hypercount: counts of SL2(Z)-orbits in the hyperbolic plane, quadratic
//! form class groups, theta coefficients, spectral kernels, and the
//! experiment drivers around them.

mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num::BigRational;
use num_complex::Complex64;

use hypercount::count::{
    count_general, count_heegner_exact, count_heegner_exact_m, error_samples, fit_loglog_slope,
    pair_class_number, CountReport,
};
use hypercount::heegner::{HeegnerPoint, PlanePoint};
use hypercount::kernel::{h_pm, h_r, Sign};
use hypercount::momentkit::orthogonality_sum;
use hypercount::qforms::{characters, ClassCharacter, ClassGroup, QuadForm};
use hypercount::theta::lambda_table;
use hypercount::verify::{run_suites, Suite};

use config::ExperimentConfig;
use emit::{fmt_real, Emitter, Format};

#[derive(Parser)]
#[command(name = "hypercount", version, about)]
struct Cli {
    /// Config file with per-subcommand default sections
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_parser = emit::parse_format)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count group elements inside a hyperbolic ball
    Count(CountArgs),
    /// Theta series coefficients of a class group character
    Theta(ThetaArgs),
    /// Class group of a discriminant
    Classgroup(ClassgroupArgs),
    /// Pair class number h(d, d', Delta) with orbit representatives
    Pairclass(PairclassArgs),
    /// Spectral transforms h_R / h±
    Kernel(KernelArgs),
    /// Character orthogonality sums over primes
    Moments(MomentsArgs),
    /// Error-term sampling E(x) = N(x) - 6x and its second moment
    ErrorMoment(ErrorMomentArgs),
    /// Run the invariant suites
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CountArgs {
    /// First point: `i`, `rho`, or `x,y`
    #[arg(long)]
    z: Option<String>,
    /// Second point, same syntax
    #[arg(long)]
    w: Option<String>,
    /// First form `a,b,c` (its Heegner point stands in for --z)
    #[arg(long)]
    form: Option<String>,
    /// Second form `a,b,c`
    #[arg(long)]
    form0: Option<String>,
    /// Threshold X >= 2
    #[arg(long = "X")]
    x: Option<f64>,
    /// Exact integer threshold on the codiscriminant, e.g. `m<=5`
    #[arg(long = "X-exact")]
    x_exact: Option<String>,
    /// Use the exact Heegner counter (requires --form/--form0)
    #[arg(long)]
    exact: bool,
    /// Report orbits of {γ, −γ} instead of matrices
    #[arg(long)]
    mod_pm1: bool,
}

#[derive(Args)]
struct ThetaArgs {
    #[arg(long, allow_hyphen_values = true)]
    d: i64,
    /// `trivial`, `genus:d1,d2`, or `index:k`
    #[arg(long, default_value = "trivial")]
    char: String,
    /// Truncation: coefficients 0..=N
    #[arg(long = "N", default_value_t = 100)]
    n: u64,
}

#[derive(Args)]
struct ClassgroupArgs {
    #[arg(long, allow_hyphen_values = true)]
    d: i64,
}

#[derive(Args)]
struct PairclassArgs {
    #[arg(long, allow_hyphen_values = true)]
    d: i64,
    #[arg(long, allow_hyphen_values = true)]
    dprime: i64,
    #[arg(long, allow_hyphen_values = true)]
    delta: i64,
}

#[derive(Args)]
struct KernelArgs {
    /// Ball radius R (direct transform mode)
    #[arg(long = "R")]
    r: Option<f64>,
    /// Threshold X (smoothed mode: h± with --delta)
    #[arg(long = "X")]
    x: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Spectral parameters: comma-separated reals, `i/2` allowed
    #[arg(long)]
    t: String,
    #[arg(long, default_value = "plus", value_parser = parse_sign)]
    sign: Sign,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long, allow_hyphen_values = true)]
    d: i64,
    #[arg(long, allow_hyphen_values = true)]
    dprime: i64,
    #[arg(long, default_value = "trivial")]
    char: String,
    #[arg(long, default_value = "trivial")]
    charprime: String,
    /// Comma-separated x values
    #[arg(long)]
    x_grid: String,
}

#[derive(Args)]
struct ErrorMomentArgs {
    #[arg(long, allow_hyphen_values = true)]
    d: i64,
    #[arg(long, allow_hyphen_values = true)]
    dprime: i64,
    /// Base threshold(s); each samples [X, 2X]. Repeatable.
    #[arg(long = "X", required = true)]
    x: Vec<f64>,
    #[arg(long, default_value_t = 16)]
    samples: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Negative control: corrupt one theta coefficient
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "plus" | "+" => Ok(Sign::Plus),
        "minus" | "-" => Ok(Sign::Minus),
        other => Err(format!("sign must be plus or minus, got '{other}'")),
    }
}

fn parse_point(s: &str) -> Result<PlanePoint> {
    match s {
        "i" => Ok(PlanePoint::new(0.0, 1.0)?),
        "rho" => Ok(PlanePoint::new(0.5, 3f64.sqrt() / 2.0)?),
        _ => {
            let (x, y) = s
                .split_once(',')
                .ok_or_else(|| anyhow!("point must be `i`, `rho`, or `x,y`: {s}"))?;
            Ok(PlanePoint::new(x.trim().parse()?, y.trim().parse()?)?)
        }
    }
}

fn parse_form(s: &str) -> Result<QuadForm> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse().context("form coefficient"))
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        bail!("form must be `a,b,c`: {s}");
    }
    Ok(QuadForm::new(parts[0], parts[1], parts[2]))
}

fn parse_character(group: &Arc<ClassGroup>, spec: &str) -> Result<ClassCharacter> {
    if spec == "trivial" {
        return Ok(ClassCharacter::trivial(Arc::clone(group)));
    }
    if let Some(rest) = spec.strip_prefix("genus:") {
        let (d1, d2) = rest
            .split_once(',')
            .ok_or_else(|| anyhow!("genus character spec is `genus:d1,d2`"))?;
        return Ok(ClassCharacter::genus(
            Arc::clone(group),
            d1.trim().parse()?,
            d2.trim().parse()?,
        )?);
    }
    if let Some(k) = spec.strip_prefix("index:") {
        let k: usize = k.parse()?;
        let all = characters(group);
        return all
            .into_iter()
            .nth(k)
            .ok_or_else(|| anyhow!("character index {k} out of range (h = {})", group.h()));
    }
    bail!("character spec must be `trivial`, `genus:d1,d2`, or `index:k`");
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().context("grid value"))
        .collect()
}

fn emit_count_report(emitter: &mut Emitter, rep: &CountReport, mod_pm1: bool) -> Result<()> {
    let count = if mod_pm1 { rep.count / 2 } else { rep.count };
    emitter.header(&["X", "count", "main_term", "error"])?;
    emitter.row(&[
        fmt_real(rep.x),
        count.to_string(),
        fmt_real(rep.main_term),
        fmt_real(rep.error),
    ])?;
    Ok(())
}

fn cmd_count(args: &CountArgs, emitter: &mut Emitter) -> Result<()> {
    let forms = match (&args.form, &args.form0) {
        (Some(f), Some(f0)) => Some((parse_form(f)?, parse_form(f0)?)),
        (None, None) => None,
        _ => bail!("--form and --form0 must be given together"),
    };
    if let Some(spec) = &args.x_exact {
        let (p, p0) = forms.ok_or_else(|| anyhow!("--X-exact needs --form and --form0"))?;
        let m_max: i64 = spec
            .strip_prefix("m<=")
            .ok_or_else(|| anyhow!("exact threshold syntax is `m<=K`"))?
            .trim()
            .parse()?;
        let count = count_heegner_exact_m(&p, &p0, m_max)?;
        let dd0 = (p.discriminant() * p0.discriminant()) as f64;
        let x = 2.0 * m_max as f64 / dd0.sqrt();
        let rep = CountReport {
            x,
            count,
            main_term: 6.0 * x,
            error: count as f64 - 6.0 * x,
            mode: hypercount::count::CountMode::ExactHeegner,
        };
        return emit_count_report(emitter, &rep, args.mod_pm1);
    }
    let x = args.x.ok_or_else(|| anyhow!("--X is required"))?;
    if args.exact {
        let (p, p0) = forms.ok_or_else(|| anyhow!("--exact needs --form and --form0"))?;
        let xr = BigRational::from_float(x).ok_or_else(|| anyhow!("X must be finite"))?;
        let rep = count_heegner_exact(&p, &p0, &xr)?;
        return emit_count_report(emitter, &rep, args.mod_pm1);
    }
    let (z, w) = if let Some((p, p0)) = forms {
        (
            HeegnerPoint::new(p)?.point(),
            HeegnerPoint::new(p0)?.point(),
        )
    } else {
        let z = parse_point(args.z.as_deref().ok_or_else(|| anyhow!("--z or --form needed"))?)?;
        let w = parse_point(args.w.as_deref().ok_or_else(|| anyhow!("--w or --form0 needed"))?)?;
        (z, w)
    };
    let rep = count_general(z, w, x)?;
    emit_count_report(emitter, &rep, args.mod_pm1)
}

fn cache_dir() -> PathBuf {
    std::env::var_os("HYPERCOUNT_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hypercount-cache"))
}

fn cmd_theta(args: &ThetaArgs, emitter: &mut Emitter) -> Result<()> {
    let group = Arc::new(ClassGroup::new(args.d)?);
    let xi = parse_character(&group, &args.char)?;
    let key = format!("theta_d{}_{}_N{}.json", args.d, xi.id(), args.n);
    let cache_path = cache_dir().join(key);
    let lam: Vec<f64> = match std::fs::read_to_string(&cache_path) {
        Ok(text) => serde_json::from_str(&text).context("corrupt cache entry")?,
        Err(_) => {
            let lam = lambda_table(&xi, args.n)?;
            if let Some(dir) = cache_path.parent() {
                let _ = std::fs::create_dir_all(dir);
            }
            let _ = std::fs::write(&cache_path, serde_json::to_string(&lam)?);
            lam
        }
    };
    emitter.header(&["n", "lambda"])?;
    for (n, v) in lam.iter().enumerate() {
        emitter.row(&[n.to_string(), fmt_real(*v)])?;
    }
    Ok(())
}

fn cmd_classgroup(args: &ClassgroupArgs, emitter: &mut Emitter) -> Result<()> {
    let group = ClassGroup::new(args.d)?;
    if emitter.format() == Format::Json {
        emitter.json(&group.to_json())?;
        return Ok(());
    }
    emitter.header(&["index", "a", "b", "c"])?;
    for (i, f) in group.forms.iter().enumerate() {
        emitter.row(&[
            i.to_string(),
            f.a.to_string(),
            f.b.to_string(),
            f.c.to_string(),
        ])?;
    }
    Ok(())
}

fn cmd_pairclass(args: &PairclassArgs, emitter: &mut Emitter) -> Result<()> {
    let inst = pair_class_number(args.d, args.dprime, args.delta)?;
    if emitter.format() == Format::Json {
        let reps: Vec<_> = inst
            .representatives
            .iter()
            .map(|(p, q)| serde_json::json!({"form": [p.a, p.b, p.c], "form0": [q.a, q.b, q.c]}))
            .collect();
        emitter.json(&serde_json::json!({
            "d": inst.d, "dprime": inst.d0, "delta": inst.delta,
            "h": inst.h(), "representatives": reps,
        }))?;
        return Ok(());
    }
    emitter.header(&["a", "b", "c", "a0", "b0", "c0"])?;
    for (p, q) in &inst.representatives {
        emitter.row(&[
            p.a.to_string(),
            p.b.to_string(),
            p.c.to_string(),
            q.a.to_string(),
            q.b.to_string(),
            q.c.to_string(),
        ])?;
    }
    Ok(())
}

fn parse_t_values(s: &str) -> Result<Vec<Complex64>> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            if p == "i/2" {
                Ok(Complex64::new(0.0, 0.5))
            } else {
                Ok(Complex64::new(p.parse::<f64>().context("t value")?, 0.0))
            }
        })
        .collect()
}

fn cmd_kernel(args: &KernelArgs, emitter: &mut Emitter) -> Result<()> {
    let ts = parse_t_values(&args.t)?;
    emitter.header(&["t", "value", "bound_ratio"])?;
    for t in ts {
        let label = if t.im != 0.0 {
            "i/2".to_string()
        } else {
            fmt_real(t.re)
        };
        let (value, ratio) = if let Some(x) = args.x {
            let delta = args.delta.ok_or_else(|| anyhow!("--X mode needs --delta"))?;
            let v = h_pm(x, delta, t, args.sign)?;
            let ratio = if t.re > 0.0 {
                let envelope =
                    x.sqrt() * (t.re.powf(-1.5)).min(delta.powf(-1.5) * t.re.powf(-3.0));
                v.norm() / envelope
            } else {
                0.0
            };
            (v.re, ratio)
        } else {
            let r = args.r.ok_or_else(|| anyhow!("give either --R or --X"))?;
            let ev = h_r(r, t)?;
            let ratio = ev.value.norm() * (1.0 + t.norm()).powf(1.5) / (r / 2.0).exp();
            (ev.value.re, ratio)
        };
        emitter.row(&[label, fmt_real(value), fmt_real(ratio)])?;
    }
    Ok(())
}

fn cmd_moments(args: &MomentsArgs, emitter: &mut Emitter) -> Result<()> {
    let g = Arc::new(ClassGroup::new(args.d)?);
    let g2 = Arc::new(ClassGroup::new(args.dprime)?);
    let xi = parse_character(&g, &args.char)?;
    let xi2 = parse_character(&g2, &args.charprime)?;
    emitter.header(&["x", "sum", "predicted", "drift"])?;
    for x in parse_grid(&args.x_grid)? {
        if x > 1e8 {
            bail!("x = {x} exceeds the 1e8 prime-sum cap");
        }
        let rep = orthogonality_sum(&xi, &xi2, x);
        let predicted = rep.predicted_b * x.max(std::f64::consts::E).ln().ln().max(0.0);
        emitter.row(&[
            fmt_real(x),
            fmt_real(rep.sum),
            fmt_real(predicted),
            fmt_real(rep.drift),
        ])?;
    }
    Ok(())
}

fn cmd_error_moment(args: &ErrorMomentArgs, emitter: &mut Emitter) -> Result<()> {
    let principal = |d: i64| -> Result<PlanePoint> {
        let g = ClassGroup::new(d)?;
        Ok(HeegnerPoint::new(g.forms[g.identity_index()])?.point())
    };
    let z = principal(args.d)?;
    let w = principal(args.dprime)?;
    if args.samples == 0 {
        bail!("--samples must be positive");
    }
    emitter.header(&["x", "count", "error"])?;
    let mut moments = Vec::new();
    for &x0 in &args.x {
        if !(2.0..=1e6).contains(&x0) {
            bail!("X = {x0} outside the supported range [2, 1e6]");
        }
        let rows = error_samples(z, w, x0, args.samples)?;
        let mean_e: f64 = rows.iter().map(|r| r.2).sum::<f64>() / rows.len() as f64;
        let mean_e2: f64 = rows.iter().map(|r| r.2 * r.2).sum::<f64>() / rows.len() as f64;
        for (x, count, err) in &rows {
            emitter.row(&[fmt_real(*x), count.to_string(), fmt_real(*err)])?;
        }
        moments.push((x0, mean_e, mean_e2));
    }
    let slope = if moments.len() >= 2 {
        fit_loglog_slope(
            &moments
                .iter()
                .map(|&(x, _, m2)| (x, m2.max(1e-12)))
                .collect::<Vec<_>>(),
        )
    } else {
        f64::NAN
    };
    for &(x0, mean_e, mean_e2) in &moments {
        emitter.note(&format!(
            "X={} mean_E={} second_moment={}",
            fmt_real(x0),
            fmt_real(mean_e),
            fmt_real(mean_e2)
        ))?;
    }
    if moments.len() >= 2 {
        emitter.note(&format!("fitted_exponent={}", fmt_real(slope)))?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, emitter: &mut Emitter, default_seed: u64) -> Result<bool> {
    let suite: Suite = args
        .suite
        .parse()
        .map_err(|e: String| anyhow!(e))?;
    let seed = args.seed.unwrap_or(default_seed);
    let reports = run_suites(suite, seed, args.inject_fault);
    let all_passed = reports.iter().all(|r| r.passed());
    emitter.json(&serde_json::json!({
        "passed": all_passed,
        "suites": reports.iter().map(|r| serde_json::to_value(r).unwrap()).collect::<Vec<_>>(),
    }))?;
    Ok(all_passed)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let format = cli
        .format
        .or_else(|| cfg.format.as_deref().and_then(|f| emit::parse_format(f).ok()))
        .unwrap_or(Format::Csv);
    let output = cli.output.clone().or_else(|| cfg.output.clone().map(PathBuf::from));
    let mut emitter = Emitter::new(format, output.as_deref())?;
    match &cli.command {
        Command::Count(a) => cmd_count(a, &mut emitter)?,
        Command::Theta(a) => cmd_theta(a, &mut emitter)?,
        Command::Classgroup(a) => cmd_classgroup(a, &mut emitter)?,
        Command::Pairclass(a) => cmd_pairclass(a, &mut emitter)?,
        Command::Kernel(a) => cmd_kernel(a, &mut emitter)?,
        Command::Moments(a) => cmd_moments(a, &mut emitter)?,
        Command::ErrorMoment(a) => cmd_error_moment(a, &mut emitter)?,
        Command::Verify(a) => {
            let passed = cmd_verify(a, &mut emitter, cfg.seed.unwrap_or(42))?;
            emitter.finish()?;
            return Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
    }
    emitter.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
