//! Command-line surface of the ultraspherical sharp-inequality toolkit.
//!
//! Every command is deterministic for a fixed seed and configuration, so
//! repeated runs produce byte-identical output. Exit codes follow one
//! contract: 0 when all checks pass, 1 when a mathematical check is
//! violated, 2 on invalid configuration.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use output::{emit, fmt_sig, json_array, Format, Report, Table};
use ultrasphere_core::certificates::{
    self, alpha_improved, critical_exponents, figure_curves, two_sharp, two_star, Rational,
};
use ultrasphere_core::flows::{
    beckner_chain_check, default_t_max, geometric_grid, hypercontractivity_run, run_heat_flow,
};
use ultrasphere_core::functionals::{self, Exponent};
use ultrasphere_core::measure::{normalization_zd, Dim, NodalFn, QuadratureRule};
use ultrasphere_core::minimizer::{minimize_logsob, minimize_quotient, perturbation_sharpness};
use ultrasphere_core::rng::SplitMix64;
use ultrasphere_core::spectral::{eigenvalue, Basis};

#[derive(Parser)]
#[command(
    name = "ultrasphere",
    about = "Numerical verification toolkit for the sharp interpolation inequalities of the ultraspherical operator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalization constant, critical exponents, low eigenvalues and the
    /// improved-constant coefficient for a dimension
    Constants(ConstantsArgs),
    /// Sample the interpolation quotient on a random corpus and minimize
    /// it; exit 1 if any value dips below the sharp constant
    Verify(VerifyArgs),
    /// Entropy/Fisher trace of the heat flow started from 1 + eps x
    Flow(FlowArgs),
    /// Hypercontractivity experiment at the norm-doubling time
    Hyper(HyperArgs),
    /// Discriminant certificate and pointwise sum-of-squares summary
    Certify(CertifyArgs),
    /// Multi-start projected gradient minimization of the quotient
    Minimize(MinimizeArgs),
    /// CSV curves of the exponent thresholds d -> 2#(d), 2*(d)
    Figure(FigureArgs),
    /// Quotient along the explicit minimizing family 1 + eps x
    Sharpness(SharpnessArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Quadrature node count
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Basis degree (at most nodes/2)
    #[arg(long, default_value_t = 20)]
    kmax: usize,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Dimension parameter (any real d >= 1)
    #[arg(long)]
    d: f64,
    /// Also emit the quadrature rule with this many nodes
    #[arg(long)]
    nodes: Option<usize>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    d: f64,
    /// Interpolation exponent; p = 2 dispatches the log-Sobolev form
    #[arg(long)]
    p: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Random starts of the minimizer
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long)]
    d: f64,
    #[arg(long)]
    p: f64,
    /// Amplitude of the initial datum 1 + eps x
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Time horizon (default 5/(2d))
    #[arg(long)]
    tmax: Option<f64>,
    /// Sample count of the geometric time grid
    #[arg(long, default_value_t = 40)]
    samples: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct HyperArgs {
    #[arg(long)]
    d: f64,
    /// Initial exponent, in (1, 2)
    #[arg(long)]
    p: f64,
    /// Amplitude of the datum 1 + eps x
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    d: f64,
    #[arg(long)]
    p: f64,
    /// Substitution exponent of the discriminant certificate
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct MinimizeArgs {
    #[arg(long)]
    d: f64,
    /// Exponent; p = 2 dispatches the log-Sobolev minimizer
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quadrature node count
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long)]
    dmin: f64,
    #[arg(long)]
    dmax: f64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct SharpnessArgs {
    #[arg(long)]
    d: f64,
    #[arg(long)]
    p: f64,
    /// Largest amplitude of the family; subsequent rows halve it
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    /// Number of rows
    #[arg(long, default_value_t = 6)]
    steps: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    io: IoArgs,
}

/// Error carrying the exit code mandated by the contract.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn violation(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn config_err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::config(e.to_string())
}

fn build(d: f64, nodes: usize, kmax: usize) -> Result<(Arc<QuadratureRule>, Basis), Failure> {
    let dim = Dim::new(d).map_err(config_err)?;
    let rule = QuadratureRule::new(dim, nodes).map_err(config_err)?;
    let basis = Basis::new(&rule, kmax).map_err(config_err)?;
    Ok((rule, basis))
}

/// Small-denominator rational reconstruction: exact certificate arithmetic
/// engages only when the float input is exactly a fraction with
/// denominator up to 1000.
fn to_rational(x: f64) -> Option<Rational> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    for den in 1..=1000i64 {
        let num = (x * den as f64).round();
        if num.abs() < 9e15 && num / den as f64 == x {
            return Some(Rational::new(num as i64, den));
        }
    }
    None
}

fn fmt_rational(r: Rational) -> String {
    if *r.denom() == 1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn random_corpus(basis: &Basis, count: usize, seed: u64, floor: f64) -> Vec<NodalFn> {
    let rule = basis.rule();
    let n = rule.len();
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| {
            let mut w = vec![0.0; n];
            for k in 1..=6.min(basis.kmax()) {
                let gamma = rng.next_normal();
                for (acc, &v) in w.iter_mut().zip(basis.mode(k).unwrap().values()) {
                    *acc += gamma * v;
                }
            }
            let norm = (w
                .iter()
                .zip(rule.weights())
                .map(|(&v, &wt)| wt * v * v)
                .sum::<f64>())
            .sqrt()
            .max(f64::MIN_POSITIVE);
            let mut amp = 0.3;
            loop {
                let values: Vec<f64> = w.iter().map(|&v| 1.0 + amp * v / norm).collect();
                if values.iter().cloned().fold(f64::INFINITY, f64::min) >= floor {
                    break NodalFn::new(rule, values).unwrap();
                }
                amp *= 0.5;
            }
        })
        .collect()
}

fn cmd_constants(args: ConstantsArgs) -> CmdResult {
    let d = Dim::new(args.d).map_err(config_err)?;
    let (star, sharp) = critical_exponents(d);
    let mut report = Report::new()
        .num("d", d.get())
        .num("Z_d", normalization_zd(d))
        .num("two_star", star)
        .num("two_sharp", sharp);
    for k in 1..=5 {
        report = report.num(&format!("lambda_{k}"), eigenvalue(k, d));
    }
    let mut alpha_ps = vec![1.0, 1.5, 2.0, 2.5, 3.0];
    if sharp.is_finite() {
        alpha_ps.push(sharp);
    }
    for p in alpha_ps {
        report = report.num(&format!("alpha[p={}]", fmt_sig(p)), alpha_improved(p, d));
    }
    if let Some(n) = args.nodes {
        let rule = QuadratureRule::new(d, n).map_err(config_err)?;
        report = report
            .int("n", rule.len() as u64)
            .value("nodes", json_array(rule.nodes()))
            .value("weights", json_array(rule.weights()));
    }
    emit(&args.io.out, &report.render(args.io.format)).map_err(config_err)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let d = Dim::new(args.d).map_err(config_err)?;
    if !(args.p.is_finite() && args.p >= 1.0) {
        return Err(Failure::config("exponent must satisfy p >= 1"));
    }
    let (rule, basis) = build(args.d, args.grid.nodes, args.grid.kmax)?;
    let star = two_star(d);
    let outside = args.p > star;

    let corpus = random_corpus(&basis, 200, args.seed, 0.05);
    let mut corpus_min = f64::INFINITY;
    if args.p == 2.0 {
        for f in &corpus {
            corpus_min = corpus_min.min(functionals::logsob_ratio(&basis, f).map_err(config_err)?);
        }
    } else {
        let exp = Exponent::new(args.p, d).map_err(config_err)?;
        for f in &corpus {
            corpus_min =
                corpus_min.min(functionals::quotient_qp(&basis, f, &exp).map_err(config_err)?);
        }
    }

    let result = if args.p == 2.0 {
        minimize_logsob(&rule, args.starts, args.seed).map_err(config_err)?
    } else {
        let exp = Exponent::new(args.p, d).map_err(config_err)?;
        minimize_quotient(&rule, &exp, args.starts, args.seed).map_err(config_err)?
    };

    let pass = corpus_min >= 1.0 - 1e-3 && result.best_value >= 1.0 - 1e-3;
    let verdict = if outside {
        "outside theorem range (informational)"
    } else if pass {
        "pass"
    } else {
        "violated"
    };
    let report = Report::new()
        .num("d", d.get())
        .num("p", args.p)
        .num("two_star", star)
        .num("two_sharp", two_sharp(d))
        .int("corpus_size", corpus.len() as u64)
        .num("corpus_min", corpus_min)
        .num("best_value", result.best_value)
        .flag("converged", result.converged)
        .num("gradient_norm", result.gradient_norm)
        .flag("outside_theorem_range", outside)
        .text("verdict", verdict);
    emit(&args.io.out, &report.render(args.io.format)).map_err(config_err)?;
    if outside || pass {
        Ok(0)
    } else {
        Ok(1)
    }
}

fn cmd_flow(args: FlowArgs) -> CmdResult {
    let d = Dim::new(args.d).map_err(config_err)?;
    if args.eps.abs() >= 1.0 || args.eps.is_nan() {
        return Err(Failure::config("flow amplitude must satisfy |eps| < 1"));
    }
    if args.samples < 2 {
        return Err(Failure::config("need at least 2 samples"));
    }
    let (rule, basis) = build(args.d, args.grid.nodes, args.grid.kmax)?;
    let exp = Exponent::new(args.p, d).map_err(config_err)?;
    let t_max = args.tmax.unwrap_or_else(|| default_t_max(d));
    if t_max <= 0.0 || t_max.is_nan() {
        return Err(Failure::config("time horizon must be positive"));
    }
    let grid = geometric_grid(t_max, args.samples);
    let f0 = NodalFn::from_fn(&rule, |x| 1.0 + args.eps * x);
    let trace = run_heat_flow(&basis, &f0, &exp, &grid)
        .map_err(|e| Failure::violation(format!("flow failed: {e}")))?;

    let payload = match args.io.format {
        Format::Csv => {
            let mut table = Table::new("t,F,I,mass,min_g");
            for i in 0..trace.times.len() {
                table.row(vec![
                    trace.times[i],
                    trace.entropy[i],
                    trace.fisher[i],
                    trace.mass[i],
                    trace.min_g[i],
                ]);
            }
            table.render_csv()
        }
        Format::Json => {
            // flat object of the trace fields, plus the spectral
            // coefficients of the initial datum g(0) = f0^p
            let g0 = f0.map(|v| v.powf(args.p));
            let hat = basis.to_spectral(&g0).map_err(config_err)?;
            Report::new()
                .num("p", trace.p)
                .num("d", trace.d)
                .value("t", json_array(&trace.times))
                .value("F", json_array(&trace.entropy))
                .value("I", json_array(&trace.fisher))
                .value("mass", json_array(&trace.mass))
                .value("min_g", json_array(&trace.min_g))
                .value("initial_coeffs", json_array(hat.coeffs()))
                .render(Format::Json)
        }
    };
    emit(&args.io.out, &payload).map_err(config_err)?;

    // trace invariants: conserved mass, nonnegative monotone entropy
    let m0 = trace.mass[0];
    let mut ok = true;
    for i in 0..trace.times.len() {
        ok &= (trace.mass[i] - m0).abs() <= 1e-12 * m0.abs();
        ok &= trace.entropy[i] >= -1e-12 && trace.fisher[i] >= -1e-12;
        ok &= trace.min_g[i] > 0.0;
        if i > 0 {
            ok &= trace.entropy[i] <= trace.entropy[i - 1] + 1e-12;
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_hyper(args: HyperArgs) -> CmdResult {
    let _ = Dim::new(args.d).map_err(config_err)?;
    if !(args.p > 1.0 && args.p < 2.0) {
        return Err(Failure::config("hypercontractivity needs p in (1, 2)"));
    }
    let (rule, basis) = build(args.d, args.grid.nodes, args.grid.kmax)?;
    let u = NodalFn::from_fn(&rule, |x| 1.0 + args.eps * x);
    let hyper = hypercontractivity_run(&basis, &u, args.p).map_err(config_err)?;
    let chain = beckner_chain_check(&basis, &u, args.p).map_err(config_err)?;

    let ok = hyper.lhs <= hyper.rhs_p + 1e-10
        && hyper.spectral_identity_error < 1e-10
        && chain.holds(1e-10);
    let report = Report::new()
        .num("d", args.d)
        .num("p", args.p)
        .num("eps", args.eps)
        .num("t_star", hyper.t_star)
        .num("lhs", hyper.lhs)
        .num("rhs_p", hyper.rhs_p)
        .num("rhs_2_over_p", hyper.rhs_2_over_p)
        .num("spectral_identity_error", hyper.spectral_identity_error)
        .num("chain_interpolation", chain.interpolation)
        .num("chain_semigroup", chain.semigroup)
        .num("chain_dirichlet", chain.dirichlet)
        .num("chain_saturation", chain.saturation)
        .flag("checks_pass", ok);
    emit(&args.io.out, &report.render(args.io.format)).map_err(config_err)?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_certify(args: CertifyArgs) -> CmdResult {
    let d = Dim::new(args.d).map_err(config_err)?;
    let disc = certificates::discriminant(args.p, d, args.beta).map_err(config_err)?;

    let mut report = Report::new()
        .num("p", disc.p)
        .num("d", disc.d)
        .num("beta", disc.beta)
        .num("lambda", disc.lambda)
        .num("a", disc.a)
        .num("b", disc.b)
        .num("c", disc.c)
        .num("A", disc.big_a)
        .num("B", disc.big_b)
        .num("delta", disc.delta)
        .flag("feasible", disc.feasible);

    if let (Some(p), Some(dd), Some(beta)) = (
        to_rational(args.p),
        to_rational(args.d),
        to_rational(args.beta),
    ) {
        if let Ok(exact) = certificates::discriminant_exact(p, dd, beta) {
            report = report
                .text("delta_exact", &fmt_rational(exact.delta))
                .text("A_exact", &fmt_rational(exact.big_a))
                .text("B_exact", &fmt_rational(exact.big_b));
        }
    }

    // two computation paths for the discriminant must agree
    let via_quadratic = disc.big_a * args.beta * args.beta + disc.big_b * args.beta + 1.0;
    let paths_agree = (disc.delta - via_quadratic).abs() <= 1e-12 * disc.delta.abs().max(1.0);

    // pointwise h and its sum-of-squares reconstruction on a random corpus
    let (_, basis) = build(args.d, args.grid.nodes, args.grid.kmax)?;
    let exp = Exponent::new(args.p.max(1.0), d).map_err(config_err)?;
    let corpus = random_corpus(&basis, 50, args.seed, 0.3);
    let mut h_min = f64::INFINITY;
    let mut sos_max_error = 0.0f64;
    for f in &corpus {
        let h = certificates::pointwise_h(&basis, f, &exp).map_err(config_err)?;
        let sos = certificates::sos_check(&basis, f, &exp).map_err(config_err)?;
        for (&a, &b) in h.values().iter().zip(sos.values()) {
            h_min = h_min.min(a);
            sos_max_error = sos_max_error.max((a - b).abs());
        }
    }
    let sharp = two_sharp(d);
    let within_sharp = args.p <= sharp;
    report = report
        .num("two_sharp", sharp)
        .flag("p_within_two_sharp", within_sharp)
        .num("h_min", h_min)
        .num("sos_max_error", sos_max_error)
        .num(
            "h_form_determinant",
            certificates::h_form_determinant(args.p, d),
        )
        .flag("delta_paths_agree", paths_agree);
    emit(&args.io.out, &report.render(args.io.format)).map_err(config_err)?;

    let ok = paths_agree && sos_max_error <= 1e-9 && (!within_sharp || h_min >= -1e-10);
    Ok(if ok { 0 } else { 1 })
}

fn cmd_minimize(args: MinimizeArgs) -> CmdResult {
    let d = Dim::new(args.d).map_err(config_err)?;
    if !(args.p.is_finite() && args.p >= 1.0) {
        return Err(Failure::config("exponent must satisfy p >= 1"));
    }
    let rule = QuadratureRule::new(d, args.nodes).map_err(config_err)?;
    let result = if args.p == 2.0 {
        minimize_logsob(&rule, args.starts, args.seed).map_err(config_err)?
    } else {
        let exp = Exponent::new(args.p, d).map_err(config_err)?;
        minimize_quotient(&rule, &exp, args.starts, args.seed).map_err(config_err)?
    };
    let outside = args.p > two_star(d);

    let mut report = Report::new()
        .num("p", result.p)
        .num("d", result.d)
        .num("best_value", result.best_value)
        .int("starts", result.starts as u64)
        .flag("converged", result.converged)
        .num("gradient_norm", result.gradient_norm)
        .flag("outside_theorem_range", outside);
    if args.io.format == Format::Json {
        report = report.value("argmin", json_array(result.argmin.values()));
    }
    emit(&args.io.out, &report.render(args.io.format)).map_err(config_err)?;
    Ok(if outside || result.best_value >= 1.0 - 1e-3 {
        0
    } else {
        1
    })
}

fn cmd_figure(args: FigureArgs) -> CmdResult {
    let rows = figure_curves(args.dmin, args.dmax, args.steps).map_err(config_err)?;
    let with_star = rows.first().is_some_and(|r| r.two_star.is_some());
    let mut table = Table::new(if with_star {
        "d,two_sharp,two_star"
    } else {
        "d,two_sharp"
    });
    let mut ordered = true;
    for r in &rows {
        if let Some(star) = r.two_star {
            ordered &= r.two_sharp < star;
            table.row(vec![r.d, r.two_sharp, star]);
        } else {
            table.row(vec![r.d, r.two_sharp]);
        }
    }
    emit(&args.io.out, &table.render(args.io.format)).map_err(config_err)?;
    Ok(if ordered { 0 } else { 1 })
}

fn cmd_sharpness(args: SharpnessArgs) -> CmdResult {
    let d = Dim::new(args.d).map_err(config_err)?;
    if args.p == 2.0 {
        return Err(Failure::config("the family quotient needs p != 2"));
    }
    if args.steps < 2 {
        return Err(Failure::config("need at least 2 rows"));
    }
    let (_, basis) = build(args.d, args.grid.nodes, args.grid.kmax)?;
    let exp = Exponent::new(args.p, d).map_err(config_err)?;
    let eps_list: Vec<f64> = (0..args.steps)
        .map(|j| args.eps / (1u64 << j) as f64)
        .collect();
    let rows = perturbation_sharpness(&basis, &exp, &eps_list).map_err(config_err)?;

    let mut table = Table::new("eps,Q");
    for &(eps, q) in &rows {
        table.row(vec![eps, q]);
    }
    emit(&args.io.out, &table.render(args.io.format)).map_err(config_err)?;

    // values decrease toward 1 (the family is exactly flat at p = 1)
    let mut ok = true;
    for w in rows.windows(2) {
        ok &= w[1].1 <= w[0].1 + 1e-12;
    }
    let (e1, q1) = rows[rows.len() - 2];
    let (e2, q2) = rows[rows.len() - 1];
    let limit = q2 - e2 * e2 * (q1 - q2) / (e1 * e1 - e2 * e2);
    ok &= (limit - 1.0).abs() < 1e-6;
    Ok(if ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Constants(args) => cmd_constants(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Flow(args) => cmd_flow(args),
        Command::Hyper(args) => cmd_hyper(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Minimize(args) => cmd_minimize(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Sharpness(args) => cmd_sharpness(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
