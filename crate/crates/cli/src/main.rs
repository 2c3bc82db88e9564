//! `lriemann`: integrals, band decompositions and theorem checks on `R^A`
//! from the command line.
//!
//! Exit status is 0 on success, 1 on usage or input errors, and 2 when an
//! integral fails to converge or a verification fails.

mod input;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lattice_riemann::{
    darboux_sums, integrate, lbp_check, signed_integrate, totord, trichotomy, verify_by_parts,
    verify_ftc1, verify_ftc2, verify_ftc2_pairs, verify_mvt, verify_mvt_pairs, verify_substitution,
    Band, Element, IntegralResult, LatticeFunction, LbpVerdict, OrderInterval, Partition,
    ToleranceSchedule, VerificationReport, VerifyOptions,
};
use serde::Serialize;

use input::{
    build_function, kernel_function, order_interval, parse_element, parse_points, resolve_dim,
    CliResult,
};
use output::Format;

#[derive(Parser)]
#[command(
    name = "lriemann",
    version,
    about = "Riemann integration on the atomic f-algebra R^A"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FunctionArgs {
    /// Number of atoms; inferred from the endpoints when omitted.
    #[arg(long)]
    dim: Option<usize>,
    /// Scalar kernel in the variable `t`; repeat once per atom or give one to broadcast.
    #[arg(long = "kernel", allow_hyphen_values = true)]
    kernels: Vec<String>,
    /// JSON function descriptor, inline or as a file path.
    #[arg(long)]
    function: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 24)]
    max_depth: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Clone)]
struct Span {
    #[arg(long, value_parser = parse_element, allow_hyphen_values = true)]
    lo: Element,
    #[arg(long, value_parser = parse_element, allow_hyphen_values = true)]
    hi: Element,
}

/// Either an explicit endpoint pair or an interval to sample pairs from.
#[derive(Args, Clone)]
struct Pairs {
    #[arg(long, value_parser = parse_element, allow_hyphen_values = true, requires = "y")]
    x: Option<Element>,
    #[arg(long, value_parser = parse_element, allow_hyphen_values = true, requires = "x")]
    y: Option<Element>,
    #[arg(long, value_parser = parse_element, allow_hyphen_values = true, requires = "hi", conflicts_with = "x")]
    lo: Option<Element>,
    #[arg(long, value_parser = parse_element, allow_hyphen_values = true, requires = "lo")]
    hi: Option<Element>,
}

#[derive(Args, Clone)]
struct Sampling {
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Integral over the order interval [lo, hi].
    Integrate {
        #[command(flatten)]
        f: FunctionArgs,
        #[command(flatten)]
        span: Span,
    },
    /// Integral from a to b, where a and b may be incomparable.
    SignedIntegrate {
        #[command(flatten)]
        f: FunctionArgs,
        #[arg(long, value_parser = parse_element, allow_hyphen_values = true)]
        a: Element,
        #[arg(long, value_parser = parse_element, allow_hyphen_values = true)]
        b: Element,
    },
    /// Numerical checks of the calculus theorems.
    #[command(subcommand)]
    Verify(Verify),
    /// Trichotomy bands of x and y.
    Bands {
        #[arg(long, value_parser = parse_element, allow_hyphen_values = true)]
        x: Element,
        #[arg(long, value_parser = parse_element, allow_hyphen_values = true)]
        y: Element,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Total orderisation of a point list such as "1,0;0,1".
    Totord {
        #[arg(long, allow_hyphen_values = true)]
        points: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Built-in demonstrations.
    #[command(subcommand)]
    Demo(Demo),
}

#[derive(Subcommand)]
enum Verify {
    /// d/dx of the antiderivative recovers the kernel.
    Ftc1 {
        #[command(flatten)]
        f: FunctionArgs,
        #[command(flatten)]
        span: Span,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// The integral from x to y equals F(y) - F(x).
    Ftc2 {
        #[command(flatten)]
        f: FunctionArgs,
        /// Antiderivative kernel F.
        #[arg(long, allow_hyphen_values = true, required = true)]
        anti: Vec<String>,
        #[command(flatten)]
        pairs: Pairs,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// (y - x) f(c) equals the integral from x to y.
    Mvt {
        #[command(flatten)]
        f: FunctionArgs,
        #[command(flatten)]
        pairs: Pairs,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Integral of f(G) g over [lo, hi] equals the integral of f from G(lo) to G(hi).
    Usub {
        #[command(flatten)]
        f: FunctionArgs,
        /// Inner map G.
        #[arg(long = "G", allow_hyphen_values = true, required = true)]
        big_g: Vec<String>,
        /// Derivative of G; symbolic by default.
        #[arg(long = "g", allow_hyphen_values = true)]
        g: Vec<String>,
        #[command(flatten)]
        span: Span,
    },
    /// Integration by parts for f and g, with symbolic derivatives.
    Parts {
        #[command(flatten)]
        f: FunctionArgs,
        #[arg(long = "g", allow_hyphen_values = true, required = true)]
        g: Vec<String>,
        #[command(flatten)]
        span: Span,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// The swap map (x, y) -> (y, x), which is not integrable.
    Swap {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

enum Outcome {
    Success(String),
    Failure(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Success(out)) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Failure(out)) => {
            println!("{out}");
            ExitCode::from(2)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn schedule(f: &FunctionArgs) -> CliResult<ToleranceSchedule> {
    ToleranceSchedule::new(f.tol, f.max_depth).map_err(|e| e.to_string())
}

/// Verification reports use `--tol` as the pass threshold and integrate one
/// order of magnitude tighter.
fn verify_options(f: &FunctionArgs, sampling: Option<&Sampling>) -> CliResult<VerifyOptions> {
    Ok(VerifyOptions {
        samples: sampling.map_or(1, |s| s.samples),
        seed: sampling.map_or(0, |s| s.seed),
        tol: f.tol,
        sched: ToleranceSchedule::new(f.tol / 10.0, f.max_depth).map_err(|e| e.to_string())?,
        ..VerifyOptions::default()
    })
}

fn integral_outcome(r: &IntegralResult, format: Format) -> Outcome {
    let text = output::integral(r, format);
    if r.converged {
        Outcome::Success(text)
    } else {
        Outcome::Failure(text)
    }
}

fn report_outcome(r: &VerificationReport, format: Format) -> Outcome {
    let text = output::report(r, format);
    if r.pass {
        Outcome::Success(text)
    } else {
        Outcome::Failure(text)
    }
}

fn err(e: lattice_riemann::Error) -> String {
    e.to_string()
}

fn run(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Integrate { f, span } => {
            let dim = resolve_dim(f.dim, &[&span.lo, &span.hi])?;
            let func = build_function(&f.kernels, f.function.as_deref(), dim)?;
            let i = order_interval(&span.lo, &span.hi)?;
            let r = integrate(&func, &i, &schedule(&f)?).map_err(err)?;
            Ok(integral_outcome(&r, f.format))
        }
        Command::SignedIntegrate { f, a, b } => {
            let dim = resolve_dim(f.dim, &[&a, &b])?;
            let func = build_function(&f.kernels, f.function.as_deref(), dim)?;
            let r = signed_integrate(&func, &a, &b, &schedule(&f)?).map_err(err)?;
            Ok(integral_outcome(&r, f.format))
        }
        Command::Verify(v) => run_verify(v),
        Command::Bands { x, y, format } => {
            let parts = trichotomy(&x, &y).map_err(err)?.into_parts();
            Ok(Outcome::Success(bands(&parts, format)))
        }
        Command::Totord { points, format } => {
            let points = parse_points(&points)?;
            let chain = totord(&points).map_err(err)?;
            Ok(Outcome::Success(output::chain(&chain, format)))
        }
        Command::Demo(Demo::Swap { format }) => swap_demo(format),
    }
}

fn run_verify(v: Verify) -> CliResult<Outcome> {
    match v {
        Verify::Ftc1 { f, span, sampling } => {
            let dim = resolve_dim(f.dim, &[&span.lo, &span.hi])?;
            let func = build_function(&f.kernels, f.function.as_deref(), dim)?;
            let i = order_interval(&span.lo, &span.hi)?;
            let r = verify_ftc1(&func, &i, &verify_options(&f, Some(&sampling))?).map_err(err)?;
            Ok(report_outcome(&r, f.format))
        }
        Verify::Ftc2 {
            f,
            anti,
            pairs,
            sampling,
        } => {
            let (dim, target) = pair_target(&f, &pairs)?;
            let func = build_function(&f.kernels, f.function.as_deref(), dim)?;
            let big_f = kernel_function(&anti, dim, "--anti")?;
            let opts = verify_options(&f, Some(&sampling))?;
            let r = match target {
                PairTarget::Pair(x, y) => verify_ftc2_pairs(&big_f, &func, &[(x, y)], &opts),
                PairTarget::Sample(i) => verify_ftc2(&big_f, &func, &i, &opts),
            }
            .map_err(err)?;
            Ok(report_outcome(&r, f.format))
        }
        Verify::Mvt { f, pairs, sampling } => {
            let (dim, target) = pair_target(&f, &pairs)?;
            let func = build_function(&f.kernels, f.function.as_deref(), dim)?;
            let opts = verify_options(&f, Some(&sampling))?;
            let r = match target {
                PairTarget::Pair(x, y) => verify_mvt_pairs(&func, &[(x, y)], &opts),
                PairTarget::Sample(i) => verify_mvt(&func, &i, &opts),
            }
            .map_err(err)?;
            Ok(report_outcome(&r, f.format))
        }
        Verify::Usub { f, big_g, g, span } => {
            let dim = resolve_dim(f.dim, &[&span.lo, &span.hi])?;
            let outer = build_function(&f.kernels, f.function.as_deref(), dim)?;
            let inner = kernel_function(&big_g, dim, "--G")?;
            let dinner = if g.is_empty() {
                inner
                    .derivative()
                    .map_err(|e| format!("--G: {e}; pass --g explicitly"))?
            } else {
                kernel_function(&g, dim, "--g")?
            };
            let i = order_interval(&span.lo, &span.hi)?;
            let r = verify_substitution(
                &outer,
                &dinner,
                &inner,
                &i,
                &verify_options(&f, None)?,
                None,
            )
            .map_err(err)?;
            Ok(report_outcome(&r, f.format))
        }
        Verify::Parts { f, g, span } => {
            let dim = resolve_dim(f.dim, &[&span.lo, &span.hi])?;
            let ff = build_function(&f.kernels, f.function.as_deref(), dim)?;
            let gg = kernel_function(&g, dim, "--g")?;
            let df = ff.derivative().map_err(|e| format!("--kernel: {e}"))?;
            let dg = gg.derivative().map_err(|e| format!("--g: {e}"))?;
            let i = order_interval(&span.lo, &span.hi)?;
            let r =
                verify_by_parts(&ff, &gg, &df, &dg, &i, &verify_options(&f, None)?).map_err(err)?;
            Ok(report_outcome(&r, f.format))
        }
    }
}

enum PairTarget {
    Pair(Element, Element),
    Sample(OrderInterval),
}

fn pair_target(f: &FunctionArgs, p: &Pairs) -> CliResult<(usize, PairTarget)> {
    match (&p.x, &p.y, &p.lo, &p.hi) {
        (Some(x), Some(y), None, None) => Ok((
            resolve_dim(f.dim, &[x, y])?,
            PairTarget::Pair(x.clone(), y.clone()),
        )),
        (None, None, Some(lo), Some(hi)) => Ok((
            resolve_dim(f.dim, &[lo, hi])?,
            PairTarget::Sample(order_interval(lo, hi)?),
        )),
        _ => Err("give either --x and --y, or --lo and --hi".into()),
    }
}

#[derive(Serialize)]
struct BandsReport<'a> {
    lt: &'a Band,
    gt: &'a Band,
    eq: &'a Band,
}

fn bands(parts: &[Band], format: Format) -> String {
    let report = BandsReport {
        lt: &parts[0],
        gt: &parts[1],
        eq: &parts[2],
    };
    match format {
        Format::Json => serde_json::to_string(&report).expect("bands serialize"),
        Format::Csv | Format::Text => {
            let atoms = |b: &Band| {
                b.atoms()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let sep = if format == Format::Csv { "," } else { ": " };
            format!(
                "lt{sep}{}\ngt{sep}{}\neq{sep}{}",
                atoms(report.lt),
                atoms(report.gt),
                atoms(report.eq)
            )
        }
    }
}

#[derive(Serialize)]
struct SwapReport {
    p: Vec<Element>,
    q: Vec<Element>,
    lower_p: Element,
    upper_q: Element,
    lower_p_leq_upper_q: bool,
    band_preserving: LbpVerdict,
    integral: IntegralResult,
}

fn swap_demo(format: Format) -> CliResult<Outcome> {
    let e = |v: [f64; 2]| Element::new(v.to_vec()).expect("finite");
    let swap = LatticeFunction::swap_demo();
    let unit = OrderInterval::new(e([0.0, 0.0]), e([1.0, 1.0])).map_err(err)?;
    let p = vec![e([0.0, 0.0]), e([1.0, 0.0]), e([1.0, 1.0])];
    let q = vec![e([0.0, 0.0]), e([0.0, 1.0]), e([1.0, 1.0])];
    let sums = |pts: &[Element]| {
        let part = Partition::new(pts.to_vec(), unit.clone()).map_err(err)?;
        darboux_sums(&swap, &part, 0.0).map_err(err)
    };
    let lower_p = sums(&p)?.lower;
    let upper_q = sums(&q)?.upper;
    let report = SwapReport {
        lower_p_leq_upper_q: lower_p.leq(&upper_q).map_err(err)?,
        band_preserving: lbp_check(&swap, &unit, 100, 0),
        integral: integrate(&swap, &unit, &ToleranceSchedule::default()).map_err(err)?,
        p,
        q,
        lower_p,
        upper_q,
    };
    let text = match format {
        Format::Json => output::json(&report),
        Format::Csv | Format::Text => [
            output::element_line("L(f,P)", &report.lower_p),
            output::element_line("U(f,Q)", &report.upper_q),
            format!("L(f,P) <= U(f,Q): {}", report.lower_p_leq_upper_q),
            format!("integrable: {}", report.integral.converged),
        ]
        .join("\n"),
    };
    Ok(if report.integral.converged {
        Outcome::Success(text)
    } else {
        Outcome::Failure(text)
    })
}
