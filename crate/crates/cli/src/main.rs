//! Command-line front end: reads problem documents, runs the solvers and the
//! Darboux pipeline, and writes JSON reports.
//!
//! Exit codes: 0 success, 1 input error, 2 certificate failure,
//! 3 precondition or hypothesis violation.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use padic_darboux::certificate::{Certificate, Check, Level};
use padic_darboux::darboux::{self, Residual};
use padic_darboux::format::{
    self, DarbouxReportDoc, FieldDoc, FormDoc, InitialDoc, IvpProblemDoc, RationalProblemDoc, RunDoc,
    SalernoReportDoc, SeriesDoc,
};
use padic_darboux::padic::{format_rational, parse_rational};
use padic_darboux::salerno::{self, SalernoParams, Variant};
use padic_darboux::solver::{self, Initial, IvpProblem, Mode};
use padic_darboux::{Context, Error, MultiSeries};

const MAX_ORDER: u32 = 64;

#[derive(Parser)]
#[command(name = "padic-darboux", version, about = "Exact p-adic series, forms and Darboux coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// The prime p.
    #[arg(long, default_value_t = 5)]
    prime: u64,
    /// Total-degree truncation order D.
    #[arg(long, default_value_t = 10)]
    order: u32,
    /// Degree cap in the time variable.
    #[arg(long = "t-order", default_value_t = 8)]
    t_order: u32,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accept orders above the default guard.
    #[arg(long)]
    allow_large_order: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a rational function and certify coefficient decay.
    ExpandRational {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
        /// Claimed radius exponent ρ (R = p^ρ); defaults to the Newton-polygon bound.
        #[arg(long, allow_hyphen_values = true)]
        claim_radius: Option<String>,
    },
    /// Solve a power-series initial value problem.
    SolveIvp {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
        /// Compare against the closed form recorded in the problem file.
        #[arg(long, value_enum)]
        oracle: Option<Oracle>,
    },
    /// Radial homotopy primitive of a closed form.
    Primitive {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run the Darboux pipeline on a 2-form.
    Darboux {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run the Salerno-form example end to end.
    Salerno {
        #[command(flatten)]
        common: Common,
        /// ν as "num/den".
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long, value_enum, default_value_t = VariantArg::Derived)]
        variant: VariantArg,
        #[arg(long, default_value_t = 1)]
        pairs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    ClosedForm,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Printed,
    Derived,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Printed => Variant::Printed,
            VariantArg::Derived => Variant::Derived,
        }
    }
}

enum Failure {
    Input(String),
    Precondition(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e.root() {
            Error::Hypothesis(_)
            | Error::NotClosed(_)
            | Error::Singular
            | Error::NotSkew
            | Error::NonzeroConstantTerm(_) => Failure::Precondition(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn context(c: &Common) -> Result<Context, Failure> {
    if c.order > MAX_ORDER && !c.allow_large_order {
        return Err(Failure::Input(format!(
            "order {} exceeds {MAX_ORDER}; pass --allow-large-order to proceed",
            c.order
        )));
    }
    Ok(Context::new(c.prime, c.order, c.t_order)?)
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(common: &Common, doc: &T) -> Result<(), Failure> {
    let text = format::to_json(doc);
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ExpansionDoc {
    run: RunDoc,
    series: SeriesDoc,
    newton_polygon: solver::NewtonPolygon,
    root_abs_exponent: Option<String>,
    claimed_exponent: String,
    claim: Certificate,
    decay: Certificate,
}

fn expand_rational(common: &Common, input: &PathBuf, claim: Option<&str>) -> Outcome {
    let ctx = context(common)?;
    let doc: RationalProblemDoc = format::from_json(&read(input)?)?;
    let num = format::parse_rationals(&doc.numerator)?;
    let den = format::parse_rationals(&doc.denominator)?;
    let series = solver::rational_expand_univariate(&doc.var, &num, &den, ctx.order())?;
    let np = solver::newton_polygon(&den, &ctx)?;
    let bound = solver::min_root_abs(&den, &ctx)?;
    let rho = match claim {
        Some(s) => parse_rational(s)?,
        None => bound.clone().unwrap_or_else(|| parse_rational("0").expect("literal")),
    };
    // the claim must not exceed the smallest root norm
    let claim_check = match &bound {
        Some(b) => vec![Check::new(0, None, Level::finite(b.clone()), Level::finite(rho.clone()))],
        None => Vec::new(),
    };
    let claim_cert = Certificate::from_checks("radius-claim", claim_check);
    let decay = solver::check_decay(&series, &rho, &ctx)?;
    let ok = claim_cert.passed() && decay.passed();
    eprintln!(
        "expand-rational: {} coefficients, smallest root |z|_p = p^{}, decay {}",
        series.len(),
        bound.as_ref().map_or("inf".to_string(), format_rational),
        decay.verdict
    );
    emit(
        common,
        &ExpansionDoc {
            run: RunDoc::of(&ctx),
            series: SeriesDoc::from_series(&series, Some(ctx.p())),
            newton_polygon: np,
            root_abs_exponent: bound.as_ref().map(format_rational),
            claimed_exponent: format_rational(&rho),
            claim: claim_cert,
            decay,
        },
    )?;
    Ok(ok)
}

#[derive(Serialize)]
struct OracleRow {
    index: u32,
    solver: String,
    oracle: String,
    equal: bool,
}

#[derive(Serialize)]
struct IvpSolutionDoc {
    run: RunDoc,
    solution: Vec<SeriesDoc>,
    ode_residual: Residual,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<Vec<OracleRow>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

fn solve_ivp(common: &Common, input: &PathBuf, oracle: Option<Oracle>) -> Outcome {
    let ctx = context(common)?;
    let doc: IvpProblemDoc = format::from_json(&read(input)?)?;
    let f: Vec<MultiSeries> = doc.rhs.iter().map(SeriesDoc::to_series).collect::<Result<_, _>>()?;
    let initial = match &doc.initial {
        InitialDoc::Values(v) => Initial::Concrete(format::parse_rationals(v)?),
        InitialDoc::Symbolic(names) => Initial::Symbolic(names.clone()),
    };
    let prob = IvpProblem {
        f,
        initial,
        x0: parse_rational(doc.x0.as_deref().unwrap_or("0"))?,
        mode: if doc.certified { Mode::Certified } else { Mode::Plain },
    };
    let sol = solver::ivp_solve(&prob, ctx.order())?;
    let residual = Residual::of_series("ode", &solver::ode_residual(&prob, &sol)?, &ctx);
    let mut ok = residual.is_zero();

    let (mut radius, mut bound) = (None, None);
    if doc.certified {
        let (e, cert) = solver::admissible_radius(&prob, &ctx)?;
        let e = doc.radius_exponent.unwrap_or(e);
        if !sol.symbolic {
            let b = solver::check_bound(&sol, e, &ctx);
            ok &= b.passed();
            bound = Some(b);
        }
        ok &= cert.passed();
        radius = Some(cert);
    }

    let mut rows = None;
    if let Some(Oracle::ClosedForm) = oracle {
        let closed = doc
            .closed_form
            .as_ref()
            .ok_or_else(|| Failure::Input("problem file has no closed_form record".into()))?;
        if closed.reciprocal_of.len() != sol.y.len() {
            return Err(Failure::Input("closed_form must list one series per component".into()));
        }
        let mut table = Vec::new();
        for (yi, r) in sol.y.iter().zip(&closed.reciprocal_of) {
            if yi.nvars() != 1 {
                return Err(Failure::Input("closed-form oracle needs a concrete initial value".into()));
            }
            let expected = r.to_series()?.inverse()?;
            for k in 0..=yi.order().min(expected.order()) {
                let a = yi.coeff(&[k]);
                let b = expected.coeff(&[k]);
                let equal = a == b;
                ok &= equal;
                table.push(OracleRow {
                    index: k,
                    solver: format_rational(&a),
                    oracle: format_rational(&b),
                    equal,
                });
            }
        }
        rows = Some(table);
    }
    eprintln!(
        "solve-ivp: {} component(s) through order {}, ode residual {}",
        sol.y.len(),
        sol.order(),
        if residual.is_zero() { "zero" } else { "NONZERO" }
    );
    emit(
        common,
        &IvpSolutionDoc {
            run: RunDoc::of(&ctx),
            solution: sol.y.iter().map(|s| SeriesDoc::from_series(s, Some(ctx.p()))).collect(),
            ode_residual: residual,
            radius,
            bound,
            oracle: rows,
            notes: sol.notes.clone(),
        },
    )?;
    Ok(ok)
}

#[derive(Serialize)]
struct PrimitiveDoc {
    beta: FormDoc,
    residual: Residual,
}

fn primitive(common: &Common, input: &PathBuf) -> Outcome {
    let ctx = context(common)?;
    let doc: FormDoc = format::from_json(&read(input)?)?;
    let alpha = doc.to_form()?;
    let beta = darboux::poincare_primitive(&alpha)?;
    let residual = Residual::of_form("d(beta) - alpha", &beta.exterior_d().checked_sub(&alpha)?, &ctx);
    let ok = residual.is_zero();
    eprintln!("primitive: {} terms, residual {}", beta.nonzero_terms(), if ok { "zero" } else { "NONZERO" });
    emit(
        common,
        &PrimitiveDoc {
            beta: FormDoc::from_form(&beta, Some(ctx.p())),
            residual,
        },
    )?;
    Ok(ok)
}

fn run_darboux(common: &Common, input: &PathBuf) -> Outcome {
    let ctx = context(common)?;
    let doc: FormDoc = format::from_json(&read(input)?)?;
    let omega1 = doc.to_form()?;
    let report = darboux::darboux_transform(&omega1, &ctx)?;
    summarize(&report.residuals);
    emit(common, &DarbouxReportDoc::new(&report, &ctx))?;
    Ok(report.succeeded())
}

#[derive(Serialize)]
struct SalernoCliDoc {
    variant: String,
    field: FieldDoc,
    field_residuals: Vec<Residual>,
    #[serde(flatten)]
    report: SalernoReportDoc,
}

fn run_salerno(common: &Common, nu: &str, variant: Variant, pairs: usize) -> Outcome {
    let ctx = context(common)?;
    let params = SalernoParams::new(parse_rational(nu)?).with_pairs(pairs.max(1));
    let report = salerno::salerno_end_to_end(&params, &ctx)?;
    let field = salerno::closed_form_field(&params, variant, &ctx)?;
    let (c, m) = salerno::field_residuals(&field, &params, &ctx)?;
    let field_residuals = vec![
        Residual::of_form("contraction", &c, &ctx),
        Residual::of_form("moser identity", &m, &ctx),
    ];
    summarize(&report.pipelines[0].residuals);
    summarize(&report.identities);
    summarize(&field_residuals);
    let ok = report.succeeded() && field_residuals.iter().all(Residual::is_zero);
    emit(
        common,
        &SalernoCliDoc {
            variant: variant.to_string(),
            field: FieldDoc::from_field(&field),
            field_residuals,
            report: SalernoReportDoc::new(&report, &ctx),
        },
    )?;
    Ok(ok)
}

fn summarize(residuals: &[Residual]) {
    for r in residuals {
        eprintln!(
            "  {:<24} {}",
            r.stage,
            if r.is_zero() {
                "zero".to_string()
            } else {
                format!("{} terms, max |c|_p = p^{}", r.terms, -r.max_abs_valuation.finite().unwrap_or(0))
            }
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::ExpandRational {
            common,
            input,
            claim_radius,
        } => expand_rational(common, input, claim_radius.as_deref()),
        Command::SolveIvp { common, input, oracle } => solve_ivp(common, input, *oracle),
        Command::Primitive { common, input } => primitive(common, input),
        Command::Darboux { common, input } => run_darboux(common, input),
        Command::Salerno {
            common,
            nu,
            variant,
            pairs,
        } => run_salerno(common, nu, (*variant).into(), *pairs),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("certificate failure");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Precondition(msg)) => {
            eprintln!("precondition violated: {msg}");
            ExitCode::from(3)
        }
    }
}
