use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use curvreal::algebra::{self, random_aco, ClassConstraint, Classification};
use curvreal::document::{form_rows, ChristoffelDocument, Model, ModelDocument, ModelOptions, FORMAT_VERSION};
use curvreal::frame::{orthonormal_frame, quadratic_normalize, random_metric};
use curvreal::rational::format_rational;
use curvreal::realizer;
use curvreal::verifier::{self, Verdict};
use curvreal::{RealizationReport, Signature, VerificationSuite};

use crate::{CheckArgs, ClassifyArgs, RandomModelArgs, RealizeArgs};

const DEFAULT_ORDER: u32 = 4;

#[derive(Debug)]
pub enum Failure {
    Io(anyhow::Error),
    Validation(String),
    Verification(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Validation(_) => 3,
            Failure::Verification(_) => 4,
            Failure::Internal(_) => 5,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(e) => write!(f, "{e:#}"),
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Internal(m) => write!(f, "internal invariant violated: {m}"),
        }
    }
}

impl From<curvreal::Error> for Failure {
    fn from(e: curvreal::Error) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Io)?;
    serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(Failure::Io),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout").map_err(Failure::Io),
    }
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    let doc: ModelDocument = read_json(path)?;
    doc.into_model().map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn describe(v: &Verdict) -> String {
    match &v.witness {
        Some(w) => format!(
            "{} at component {:?}, monomial exponents {:?}: expected {}, found {}",
            v.name,
            w.component,
            w.exponents,
            format_rational(&w.expected),
            format_rational(&w.found)
        ),
        None => v.name.clone(),
    }
}

fn verdict_failure(suite: &VerificationSuite) -> Result<(), Failure> {
    match suite.failures().next() {
        None => Ok(()),
        Some(v) => Err(Failure::Verification(describe(v))),
    }
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    format_version: u32,
    kind: &'static str,
    report: &'a RealizationReport,
}

pub fn realize(args: &RealizeArgs) -> Result<(), Failure> {
    let model = load_model(&args.model)?;
    let order = args.order.or(model.options.order).unwrap_or(DEFAULT_ORDER);
    let g = model.metric(order + 1)?;
    let mut r = realizer::realize(&model.operator, &g, order)?;
    let suite = verifier::verify(&r.gamma, &model.operator, &r.metric, &r.frame)?;
    r.report.verification = Some(suite.clone());

    if let Some(path) = &args.report {
        write_json(Some(path), &ReportDocument { format_version: FORMAT_VERSION, kind: "realization-report", report: &r.report })?;
    }
    if !args.check_only {
        write_json(args.output.as_deref(), &ChristoffelDocument::from_field(&r.gamma))?;
    }
    eprintln!(
        "realized m = {}, N = {order}: {} steps, verification {}",
        model.dim(),
        r.report.iterations.len(),
        if suite.all_pass { "passed" } else { "FAILED" }
    );
    if !r.report.invariants_hold() {
        return Err(Failure::Internal("an iteration invariant failed; see the report".into()));
    }
    verdict_failure(&suite)
}

#[derive(Serialize)]
struct VerdictDocument<'a> {
    format_version: u32,
    kind: &'static str,
    suite: &'a VerificationSuite,
}

pub fn check(args: &CheckArgs) -> Result<(), Failure> {
    let doc: ChristoffelDocument = read_json(&args.christoffel)?;
    let gamma = doc.into_field().map_err(|e| Failure::Validation(format!("{}: {e}", args.christoffel.display())))?;
    let model = load_model(&args.model)?;
    if gamma.dim() != model.dim() {
        return Err(Failure::Validation(format!(
            "shape mismatch: {}-dimensional connection for a {}-dimensional model",
            gamma.dim(),
            model.dim()
        )));
    }
    if gamma.cap() < 3 {
        return Err(Failure::Validation(format!("Christoffel cap {} is below 3", gamma.cap())));
    }
    let (_, g) = quadratic_normalize(&model.metric(gamma.cap())?)?;
    let frame = orthonormal_frame(&g)?;
    let suite = verifier::verify(&gamma, &model.operator, &g, &frame)?;
    write_json(args.output.as_deref(), &VerdictDocument { format_version: FORMAT_VERSION, kind: "verdicts", suite: &suite })?;
    verdict_failure(&suite)
}

#[derive(Serialize)]
struct ClassificationDocument {
    format_version: u32,
    kind: &'static str,
    dim: usize,
    signature: Signature,
    classification: Classification,
    scalar_curvature: String,
    ricci: Vec<Vec<String>>,
    ricci_antisymmetric: Vec<Vec<String>>,
    ricci_symmetric: Vec<Vec<String>>,
    trace_free_ricci: Vec<Vec<String>>,
}

pub fn classify(args: &ClassifyArgs) -> Result<(), Failure> {
    let model = load_model(&args.model)?;
    let a = &model.operator;
    let g0 = model.metric(1)?.inner_product_at_origin()?;
    let rho = algebra::ricci(a);
    let (anti, sym) = algebra::ricci_split(&rho);
    let doc = ClassificationDocument {
        format_version: FORMAT_VERSION,
        kind: "classification",
        dim: model.dim(),
        signature: model.signature,
        classification: algebra::classify(a, &g0)?,
        scalar_curvature: format_rational(&algebra::scalar_curvature(a, &g0)?),
        ricci: form_rows(&rho),
        ricci_antisymmetric: form_rows(&anti),
        ricci_symmetric: form_rows(&sym),
        trace_free_ricci: form_rows(&algebra::trace_free_ricci(a, &g0)?),
    };
    write_json(args.output.as_deref(), &doc)
}

pub fn random_model(args: &RandomModelArgs) -> Result<(), Failure> {
    if args.dim < 3 {
        return Err(Failure::Validation(format!("dimension must be at least 3, got {}", args.dim)));
    }
    let signature = args.signature.map_or(Signature::riemannian(args.dim), |(p, q)| Signature::new(p, q));
    if signature.dim() != args.dim {
        return Err(Failure::Validation(format!(
            "signature ({}, {}) does not match dimension {}",
            signature.timelike, signature.spacelike, args.dim
        )));
    }
    let order = args.order.unwrap_or(DEFAULT_ORDER);
    let constraint = ClassConstraint {
        ricci_symmetric: args.ricci_symmetric,
        ricci_antisymmetric: args.ricci_antisymmetric,
        ricci_traceless: args.traceless,
    };
    let g0 = curvreal::InnerProduct::standard(signature);
    let a = algebra::impose(&random_aco(args.seed, args.dim, 3)?, &g0, constraint)?;
    let mut model = Model::new(a, signature, ModelOptions { order: Some(order), seed: Some(args.seed) })?;
    if args.curved {
        model = model.with_metric(&random_metric(args.seed, signature, order + 1, &[2])?);
    }
    write_json(args.output.as_deref(), &ModelDocument::from_model(&model))
}
