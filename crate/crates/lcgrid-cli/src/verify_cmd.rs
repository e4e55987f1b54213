//! The `verify` subcommand: seeded verification suites over the corpus,
//! reported as a flat CSV of checks plus one structured JSON record.
//!
//! CSV schema (stable): `suite,entry,step,label,gated,lambda,lhs,rhs,ratio,
//! pass,note`. Every row is one inequality or verdict; `gated` marks the
//! rows that decide the exit code (ungated rows are diagnostics recorded
//! for completeness, e.g. the pipeline's stretch symmetry measurements).
//! Non-finite numbers are left empty.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lcgrid::corpus::{self, Family};
use lcgrid::func::ConvexityCheck;
use lcgrid::santalo::{lambda_split, santalo_point};
use lcgrid::steiner::prekopa_check;
use lcgrid::{
    ball_lemma_check, pipeline_slice_triple, run_pipeline, unconditional_product_check,
    verify_separation_lemma, AffineSubspace, ConjugatePlan, GridSpec, LogConcaveFnGrid,
};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{io_err, CliError, Result};
use crate::{corpus_cmd, Suite, VerifyArgs};

/// Default grids for the corpus-driven suites, per dimension. The dual
/// windows cover the corpus slope ranges so conjugate maximizers stay off
/// the boundary.
const SRC_HALF: [f64; 3] = [10.0, 6.0, 4.0];
const SRC_NODES: [usize; 3] = [513, 97, 33];
const DUAL_HALF: [f64; 3] = [12.0, 12.0, 8.0];
const DUAL_NODES: [usize; 3] = [769, 97, 33];

/// Defaults for the slice-triple suite. The source windows are wider than
/// the profiles need so the node-aligned supports keep clear margins.
const L21_SRC_HALF: [f64; 3] = [10.0, 6.0, 4.0];
const L21_SRC_NODES: [usize; 3] = [513, 65, 17];
const L21_DUAL_HALF: [f64; 3] = [6.0, 10.0, 8.0];
const L21_DUAL_NODES: [usize; 3] = [769, 129, 33];

/// Pipeline verdicts that decide the exit code. The remaining verdicts
/// (the unconditional stretch diagnostics) measure symmetry the grid
/// rearrangement cannot deliver exactly and are reported ungated.
const GATED_VERDICTS: [&str; 5] = [
    "first-step-bound",
    "monotone-products",
    "polar-mass-conserved",
    "santalo-converged",
    "final-bound",
];

struct Row {
    suite: &'static str,
    entry: usize,
    step: Option<usize>,
    label: &'static str,
    gated: bool,
    lambda: Option<f64>,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    pass: bool,
    note: Option<String>,
}

impl Row {
    fn check(
        suite: &'static str,
        entry: usize,
        label: &'static str,
        lambda: Option<f64>,
        lhs: f64,
        rhs: f64,
        pass: bool,
    ) -> Row {
        Row {
            suite,
            entry,
            step: None,
            label,
            gated: true,
            lambda,
            lhs,
            rhs,
            ratio: lhs / rhs,
            pass,
            note: None,
        }
    }
}

#[derive(Serialize)]
struct SuiteSummary {
    name: &'static str,
    checks: usize,
    failures: usize,
    first_failure: Option<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    suite: &'a str,
    seed: u64,
    dim: usize,
    count: usize,
    family: &'a str,
    lambda: f64,
    counterexample: bool,
    checks: usize,
    failures: usize,
    pass: bool,
    suites: &'a [SuiteSummary],
    csv: &'static str,
}

struct Ctx<'a> {
    args: &'a VerifyArgs,
}

impl Ctx<'_> {
    fn dim(&self) -> usize {
        self.args.dim
    }

    fn grids(&self, suite: Suite) -> Result<(GridSpec, GridSpec)> {
        let d = self.dim() - 1;
        let (sh, sn, dh, dn) = if suite == Suite::Lemma21 {
            (L21_SRC_HALF[d], L21_SRC_NODES[d], L21_DUAL_HALF[d], L21_DUAL_NODES[d])
        } else {
            (SRC_HALF[d], SRC_NODES[d], DUAL_HALF[d], DUAL_NODES[d])
        };
        let a = &self.args;
        let src = corpus_cmd::cube_spec(a.dim, a.half, a.nodes, sh, sn)?;
        let dual = corpus_cmd::cube_spec(a.dim, a.dual_half, a.dual_nodes, dh, dn)?;
        Ok((src, dual))
    }

    fn corpus(&self, spec: &GridSpec, fallback: Family) -> Result<Vec<corpus::CorpusEntry>> {
        let family = self.args.family.unwrap_or(fallback);
        Ok(corpus::generate(spec, family, self.args.count, self.args.seed)?)
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64) * (1.0 / 9007199254740992.0)
}

fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n.max(1) as u64) as usize
}

fn theorem1(ctx: &Ctx) -> Result<Vec<Row>> {
    let (spec, dual) = ctx.grids(Suite::Theorem1)?;
    let bound = TAU.powi(ctx.dim() as i32);
    let mut rows = Vec::new();
    for e in ctx.corpus(&spec, Family::Mixed)? {
        let mass = e.f.integrate()?;
        let res = santalo_point(&e.f, dual.clone(), &AffineSubspace::full())?;
        let product = mass * res.polar_mass;
        let pass = res.converged && product <= bound * (1.0 + lcgrid::tol::BOUND_BUDGET);
        rows.push(Row::check("theorem1", e.index, "santalo-bound", None, product, bound, pass));
    }
    Ok(rows)
}

fn theorem2(ctx: &Ctx) -> Result<Vec<Row>> {
    let (spec, dual) = ctx.grids(Suite::Theorem2)?;
    let plan = ConjugatePlan::legendre(spec.clone(), dual)?;
    let mut rows = Vec::new();
    for e in ctx.corpus(&spec, Family::Mixed)? {
        let split = lambda_split(&e.f, 0, ctx.args.lambda)?;
        let rep = run_pipeline(&e.f, split.plane, ctx.args.lambda, &plan)?;
        if let Some(msg) = &rep.aborted {
            rows.push(Row {
                note: Some(msg.clone()),
                ..Row::check("theorem2", e.index, "pipeline-aborted", Some(rep.lambda_1), 0.0, 0.0, false)
            });
            continue;
        }
        // The per-step product table. The monotone chain runs between
        // successive steps; the first row is informational (its ratio to
        // the base product reflects the 4l(1-l) factor of the first-step
        // bound, which the pipeline verdict below gates).
        let mut prev = rep.base_product;
        for (i, s) in rep.steps.iter().enumerate() {
            rows.push(Row {
                step: Some(i + 1),
                lambda: Some(s.lambda),
                gated: i > 0,
                ..Row::check(
                    "theorem2",
                    e.index,
                    "step-product",
                    None,
                    s.product,
                    prev,
                    i == 0 || s.product >= prev * (1.0 - lcgrid::tol::EPS_MONOTONE),
                )
            });
            prev = s.product;
        }
        for v in &rep.verdicts {
            rows.push(Row {
                gated: GATED_VERDICTS.contains(&v.label),
                ..Row::check("theorem2", e.index, v.label, Some(rep.lambda_1), v.lhs, v.rhs, v.pass)
            });
        }
    }
    Ok(rows)
}

/// Exponential-box profile with walls and kink on grid nodes, so the
/// pipeline stays inside the class the discrete conjugate resolves exactly
/// (an off-node wall inflates conjugate tails with grid placement noise).
fn aligned_ebox(spec: &GridSpec, rng: &mut ChaCha8Rng) -> Result<LogConcaveFnGrid> {
    let geo: Vec<(f64, f64, f64, f64)> = (0..spec.dim())
        .map(|k| {
            let n = spec.axis(k).count;
            let ic = n / 2 - n / 32 + pick(rng, (n / 16).max(1));
            let wa = n / 8 + pick(rng, (3 * n / 16).max(1));
            let wb = n / 8 + pick(rng, (3 * n / 16).max(1));
            let rate = 0.7 + 2.1 * unit(rng);
            let ax = spec.axis(k);
            (ax.node(ic - wa), ax.node(ic), ax.node(ic + wb), rate)
        })
        .collect();
    Ok(LogConcaveFnGrid::from_fn(spec.clone(), |x| {
        let mut v = 1.0;
        for (k, &(a, c, b, r)) in geo.iter().enumerate() {
            if x[k] < a || x[k] > b {
                return 0.0;
            }
            v *= (-r * (x[k] - c).abs()).exp();
        }
        v
    })?)
}

fn lemma21(ctx: &Ctx) -> Result<Vec<Row>> {
    let (spec, dual) = ctx.grids(Suite::Lemma21)?;
    let plan = ConjugatePlan::legendre(spec.clone(), dual)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.args.seed);
    let mut rows = Vec::new();
    let mut first_triple = None;
    for run in 0..ctx.args.count {
        let f = aligned_ebox(&spec, &mut rng)?;
        let lam = 0.3 + 0.4 * unit(&mut rng);
        let split = lambda_split(&f, 0, lam)?;
        let t = pipeline_slice_triple(&f, split.plane, &plan)?;
        // A failed hypothesis is a verification verdict, not a numeric
        // abort: record it as a failing row.
        let row = match ball_lemma_check(&t.f0, &t.f1, &t.f2, t.spacing, 500, ctx.args.seed ^ run as u64)
        {
            Ok(rep) => Row::check(
                "lemma21",
                run,
                "ball-lemma",
                Some(split.achieved),
                rep.lhs,
                rep.rhs,
                rep.ok(),
            ),
            Err(e @ lcgrid::Error::HypothesisFailed { .. }) => Row {
                note: Some(e.to_string()),
                ..Row::check("lemma21", run, "ball-lemma", Some(split.achieved), 0.0, 1.0, false)
            },
            Err(other) => return Err(other.into()),
        };
        rows.push(row);
        if first_triple.is_none() {
            first_triple = Some(t);
        }
    }
    if ctx.args.counterexample {
        let t = first_triple
            .ok_or_else(|| CliError::Usage(String::from("--counterexample needs --count >= 1")))?;
        let halved: Vec<f64> = t.f0.iter().map(|v| 0.5 * v).collect();
        let row = match ball_lemma_check(&halved, &t.f1, &t.f2, t.spacing, 500, !ctx.args.seed) {
            Err(e @ lcgrid::Error::HypothesisFailed { .. }) => Row {
                note: Some(e.to_string()),
                ..Row::check("lemma21", ctx.args.count, "counterexample", None, 0.0, 1.0, false)
            },
            Err(other) => return Err(other.into()),
            // The doctored triple slipping through is itself a failure.
            Ok(rep) => Row {
                note: Some(String::from("doctored triple was not rejected")),
                ..Row::check("lemma21", ctx.args.count, "counterexample", None, rep.lhs, rep.rhs, false)
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

fn lemma45(ctx: &Ctx) -> Result<Vec<Row>> {
    let (spec, dual) = ctx.grids(Suite::Lemma45)?;
    let plan = ConjugatePlan::legendre(spec.clone(), dual.clone())?;
    let mut rows = Vec::new();
    for e in ctx.corpus(&spec, Family::ExponentialBox)? {
        let split = lambda_split(&e.f, 0, ctx.args.lambda)?;
        let sub = AffineSubspace::new(vec![(split.plane.axis, split.plane.offset)])?;
        let z = santalo_point(&e.f, dual.clone(), &sub)?.z;
        let rep = verify_separation_lemma(&e.f, &z, split.plane, &plan)?;
        rows.push(Row::check(
            "lemma45",
            e.index,
            "separation",
            Some(rep.lambda),
            rep.lhs,
            rep.rhs,
            rep.ok(),
        ));
    }
    Ok(rows)
}

/// Unconditional version of `f`: pointwise minimum with the mirror image
/// about the central node, per axis. Keeps log-concavity (the profile is a
/// pointwise maximum of convex profiles) and forces zero symmetry defect.
fn evenize(f: &LogConcaveFnGrid) -> Result<LogConcaveFnGrid> {
    let spec = f.spec().clone();
    let mut vals = f.values().to_vec();
    for axis in 0..spec.dim() {
        let n = spec.axis(axis).count;
        let c = (n - 1) / 2;
        let stride = spec.stride(axis);
        for base in spec.line_bases(axis) {
            for i in 0..n {
                let j = 2 * c;
                if j < i || j - i >= n {
                    continue;
                }
                let (lo, hi) = (base + i * stride, base + (j - i) * stride);
                let m = vals[lo].min(vals[hi]);
                vals[lo] = m;
                vals[hi] = m;
            }
        }
    }
    Ok(LogConcaveFnGrid::with_check(spec, vals, ConvexityCheck::OneCellAllowance)?)
}

fn lemma46(ctx: &Ctx) -> Result<Vec<Row>> {
    let (spec, dual) = ctx.grids(Suite::Lemma46)?;
    let plan = ConjugatePlan::legendre(spec.clone(), dual)?;
    let center: Vec<f64> =
        (0..spec.dim()).map(|k| spec.axis(k).node((spec.axis(k).count - 1) / 2)).collect();
    let mut rows = Vec::new();
    for e in ctx.corpus(&spec, Family::Mixed)? {
        let even = evenize(&e.f)?;
        let rep = unconditional_product_check(&even, &center, &plan)?;
        rows.push(Row::check(
            "lemma46",
            e.index,
            "unconditional",
            None,
            rep.product,
            rep.bound,
            rep.ok(),
        ));
    }
    Ok(rows)
}

fn prekopa(ctx: &Ctx) -> Result<Vec<Row>> {
    let (spec, _) = ctx.grids(Suite::Prekopa)?;
    let entries = ctx.corpus(&spec, Family::Mixed)?;
    if entries.len() < 2 {
        return Err(CliError::Usage(String::from("prekopa needs --count >= 2")));
    }
    let mut rows = Vec::new();
    for i in 0..ctx.args.count {
        let f = &entries[i % entries.len()].f;
        let g = &entries[(i + 1) % entries.len()].f;
        let lam = [0.25, 0.5, 0.75][i % 3];
        let rep = prekopa_check(f, g, lam)?;
        rows.push(Row::check("prekopa", i, "prekopa", Some(lam), rep.lhs, rep.rhs, rep.ok()));
    }
    Ok(rows)
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut out = String::from("suite,entry,step,label,gated,lambda,lhs,rhs,ratio,pass,note\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},\"{}\"",
            r.suite,
            r.entry,
            r.step.map(|s| s.to_string()).unwrap_or_default(),
            r.label,
            r.gated,
            r.lambda.map(num).unwrap_or_default(),
            num(r.lhs),
            num(r.rhs),
            num(r.ratio),
            r.pass,
            r.note.as_deref().unwrap_or("").replace('"', "'"),
        );
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

fn failure_text(r: &Row) -> String {
    match &r.note {
        Some(note) => format!("{} entry {} [{}]: {note}", r.suite, r.entry, r.label),
        None => format!(
            "{} entry {} [{}]: lhs {} vs rhs {}",
            r.suite, r.entry, r.label, r.lhs, r.rhs
        ),
    }
}

fn summarize(name: &'static str, rows: &[Row]) -> SuiteSummary {
    let gated: Vec<&Row> = rows.iter().filter(|r| r.gated).collect();
    let failures: Vec<&&Row> = gated.iter().filter(|r| !r.pass).collect();
    SuiteSummary {
        name,
        checks: gated.len(),
        failures: failures.len(),
        first_failure: failures.first().map(|r| failure_text(r)),
    }
}

pub fn run(args: VerifyArgs) -> Result<()> {
    if !(1..=3).contains(&args.dim) {
        return Err(CliError::Usage(format!("dim must be 1..=3, got {}", args.dim)));
    }
    if !(args.lambda > 0.0 && args.lambda < 1.0) {
        return Err(CliError::Usage(format!(
            "lambda must lie strictly between 0 and 1, got {}",
            args.lambda
        )));
    }
    if args.counterexample && args.suite != Suite::Lemma21 && args.suite != Suite::All {
        return Err(CliError::Usage(String::from("--counterexample applies to --suite lemma21")));
    }
    let ctx = Ctx { args: &args };
    let selected: Vec<Suite> = match args.suite {
        Suite::All => vec![
            Suite::Theorem1,
            Suite::Theorem2,
            Suite::Lemma21,
            Suite::Lemma45,
            Suite::Lemma46,
            Suite::Prekopa,
        ],
        one => vec![one],
    };

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for s in selected {
        let suite_rows = match s {
            Suite::Theorem1 => theorem1(&ctx)?,
            Suite::Theorem2 => theorem2(&ctx)?,
            Suite::Lemma21 => lemma21(&ctx)?,
            Suite::Lemma45 => lemma45(&ctx)?,
            Suite::Lemma46 => lemma46(&ctx)?,
            Suite::Prekopa => prekopa(&ctx)?,
            Suite::All => unreachable!(),
        };
        summaries.push(summarize(s.name(), &suite_rows));
        rows.extend(suite_rows);
    }

    fs::create_dir_all(&args.report_dir).map_err(|e| io_err(&args.report_dir, e))?;
    write_csv(&args.report_dir.join("report.csv"), &rows)?;

    let checks: usize = summaries.iter().map(|s| s.checks).sum();
    let failures: usize = summaries.iter().map(|s| s.failures).sum();
    let report = Report {
        command: "verify",
        suite: args.suite.name(),
        seed: args.seed,
        dim: args.dim,
        count: args.count,
        family: args.family.map_or("suite-default", |f| f.name()),
        lambda: args.lambda,
        counterexample: args.counterexample,
        checks,
        failures,
        pass: failures == 0,
        suites: &summaries,
        csv: "report.csv",
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Usage(format!("report serialization failed: {e}")))?;
    let json_path = args.report_dir.join("report.json");
    fs::write(&json_path, json).map_err(|e| io_err(&json_path, e))?;

    println!(
        "verify {}: {} checks, {} failures -> {}",
        args.suite.name(),
        checks,
        failures,
        args.report_dir.join("report.{csv,json}").display(),
    );
    match summaries.iter().find_map(|s| s.first_failure.as_ref()) {
        Some(first) => Err(CliError::Verification(first.clone())),
        None => Ok(()),
    }
}
