//! Command line interface.
//!
//! Three subcommands:
//!
//! * `identity-suite` exercises the symmetric-function algebra on random
//!   shape matrices and reports worst-case residuals,
//! * `verify-example` samples a model family, evaluates `L_k` along both
//!   routes, fits `(A, b)`, runs the structural identities and classifies
//!   the surface,
//! * `fit` does the fit and classification on a raw CSV of samples.
//!
//! All reports are JSON on stdout (or `--out`). Floats are written in
//! fixed-width scientific notation and every run is fully seeded, so a
//! report is byte-for-byte reproducible; file paths are deliberately not
//! echoed into the report for the same reason.
//!
//! Exit codes: 0 all checks passed, 1 checks ran but failed, 2 bad usage,
//! configuration or schema, 3 I/O failure.

use std::io;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{AxisKind, ExampleFamily};
use crate::chart::AmbientSpace;
use crate::error::{Error, Result};
use crate::symfun::{self, ShapeMatrix};
use crate::tol;
use crate::util;
use crate::verify::{self, ClassificationInput, ClassificationReport, EvaluationOptions, SampleSet};

// ───────────────────────────── JSON output ─────────────────────────────

/// Pretty JSON with every float in `{:.16e}` form (17 significant digits,
/// enough to round-trip any f64 and stable across platforms).
struct SciFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl SciFormatter {
    fn new() -> Self {
        Self {
            inner: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::begin_array(&mut self.inner, writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::end_array(&mut self.inner, writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::begin_array_value(&mut self.inner, writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::end_array_value(&mut self.inner, writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::begin_object(&mut self.inner, writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::end_object(&mut self.inner, writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::begin_object_key(&mut self.inner, writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::begin_object_value(&mut self.inner, writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::end_object_value(&mut self.inner, writer)
    }
}

fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter::new());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

// ───────────────────────────── report schema ─────────────────────────────

#[derive(Serialize, Clone, Default)]
struct ConfigEcho {
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_class: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constrain_selfadjoint: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
}

#[derive(Serialize)]
struct PredictedJson {
    a_matrix: Vec<Vec<f64>>,
    b_vector: Vec<f64>,
    hk: f64,
    hk1: f64,
    curvatures: Vec<f64>,
}

#[derive(Serialize)]
struct FittedJson {
    a_matrix: Vec<Vec<f64>>,
    b_vector: Vec<f64>,
    residual_rms: f64,
    residual_max: f64,
    design_rank: usize,
    design_nullity: usize,
    gauge_fixed: bool,
    constrained: bool,
    selfadjoint_defect: f64,
}

#[derive(Serialize, Default)]
struct ResidualsJson {
    fit_rms: f64,
    fit_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_vs_predicted: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lk_position_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lk_position_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lk_gauss_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lk_gauss_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weingarten: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    position_decomposition: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slice_constant_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slice_constant_stddev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normal_constant_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normal_constant_stddev: Option<f64>,
}

#[derive(Serialize)]
struct SuitePerN {
    n: usize,
    trials: usize,
    recursion_vs_sum_max: f64,
    commutation_max: f64,
    cayley_hamilton_max: f64,
    trace_identity_max: f64,
    eigen_route_max: f64,
    charpoly_root_max: f64,
    scalar_identity_max: f64,
}

#[derive(Serialize, Default)]
struct IdentitiesJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    suite: Option<Vec<SuitePerN>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    overall_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_identity_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cayley_hamilton_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    charpoly_root_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scalar_curvature_max: Option<f64>,
}

#[derive(Serialize)]
struct ClassificationJson {
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matches_expected: Option<bool>,
    hk1_abs_mean: f64,
    hk_stddev: f64,
    umbilicity_defect: Option<f64>,
    quadratic_lambda: Option<f64>,
    quadratic_defect: Option<f64>,
    cluster_means: Option<Vec<f64>>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    config_echo: ConfigEcho,
    predicted: Option<PredictedJson>,
    fitted: Option<FittedJson>,
    residuals: Option<ResidualsJson>,
    identities: Option<IdentitiesJson>,
    classification: Option<ClassificationJson>,
    checks_passed: bool,
    failures: Vec<String>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn classification_json(
    report: &ClassificationReport,
    expected: Option<verify::Verdict>,
) -> ClassificationJson {
    ClassificationJson {
        verdict: report.verdict.as_str().to_string(),
        expected: expected.map(|v| v.as_str().to_string()),
        matches_expected: expected.map(|v| v == report.verdict),
        hk1_abs_mean: report.hk1_abs_mean,
        hk_stddev: report.hk_stddev,
        umbilicity_defect: report.umbilicity_defect,
        quadratic_lambda: report.quadratic.as_ref().map(|q| q.lambda),
        quadratic_defect: report.quadratic.as_ref().map(|q| q.defect),
        cluster_means: report.cluster_means.clone(),
        notes: report.notes.clone(),
    }
}

// ───────────────────────────── argument types ─────────────────────────────

#[derive(Parser)]
#[command(
    name = "newtonlk",
    version,
    about = "Newton transformations and L_k operators on hypersurfaces of space forms"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stress the symmetric-function identities on random shape matrices.
    IdentitySuite(IdentitySuiteArgs),
    /// Sample a model family, fit (A, b) and verify structure.
    VerifyExample(VerifyExampleArgs),
    /// Fit (A, b) to samples read from CSV and classify.
    Fit(FitArgs),
}

#[derive(Args)]
struct IdentitySuiteArgs {
    /// Largest hypersurface dimension exercised (starting at 2).
    #[arg(long = "n-max", default_value_t = 8)]
    n_max: usize,
    /// Random shape matrices per dimension.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    #[value(name = "zero_hk1")]
    ZeroHk1,
    #[value(name = "umbilic_sphere_cap")]
    UmbilicSphereCap,
    #[value(name = "umbilic_hyperbolic")]
    UmbilicHyperbolic,
    #[value(name = "riemannian_product")]
    RiemannianProduct,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    Spacelike,
    Timelike,
    Lightlike,
}

impl AxisArg {
    fn kind(self) -> AxisKind {
        match self {
            AxisArg::Spacelike => AxisKind::Spacelike,
            AxisArg::Timelike => AxisKind::Timelike,
            AxisArg::Lightlike => AxisKind::Lightlike,
        }
    }

    fn name(self) -> &'static str {
        match self {
            AxisArg::Spacelike => "spacelike",
            AxisArg::Timelike => "timelike",
            AxisArg::Lightlike => "lightlike",
        }
    }
}

#[derive(Args)]
struct VerifyExampleArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Hypersurface dimension.
    #[arg(long)]
    n: usize,
    /// Operator order, 0 <= k <= n-1.
    #[arg(long)]
    k: usize,
    /// Ambient curvature sign, +1 or -1; inferred from the family if omitted.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<i32>,
    /// Slice height for the umbilic families.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    /// Second-factor radius for riemannian_product.
    #[arg(long)]
    r: Option<f64>,
    /// Splitting index for riemannian_product, 1 <= m <= n-1.
    #[arg(long)]
    m: Option<usize>,
    /// Axis causal type for umbilic_hyperbolic.
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Classification tolerance.
    #[arg(long = "tol-class", default_value_t = tol::CLASS_DEFAULT)]
    tol_class: f64,
    /// Restrict the fit to operators self-adjoint for the ambient metric.
    #[arg(long)]
    constrain_selfadjoint: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the evaluated samples as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Sample CSV with columns u_1..u_n, x_0..x_{n+1}, Lkx_0..Lkx_{n+1}.
    #[arg(long)]
    csv: PathBuf,
    /// Operator order the samples were generated at.
    #[arg(long)]
    k: usize,
    /// Ambient curvature sign, +1 or -1.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    c: i32,
    /// Restrict the fit to operators self-adjoint for the ambient metric.
    #[arg(long)]
    constrain_selfadjoint: bool,
    /// Classification tolerance.
    #[arg(long = "tol-class", default_value_t = tol::CLASS_DEFAULT)]
    tol_class: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

// ───────────────────────────── identity suite ─────────────────────────────

fn run_identity_suite(args: &IdentitySuiteArgs) -> Result<(Report, bool)> {
    if !(2..=symfun::MAX_DIM).contains(&args.n_max) {
        return Err(Error::DimensionOutOfRange { n: args.n_max });
    }
    if args.trials == 0 {
        return Err(Error::Inadmissible("--trials must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut suite = Vec::new();
    let mut overall: f64 = 0.0;
    for n in 2..=args.n_max {
        let mut per = SuitePerN {
            n,
            trials: args.trials,
            recursion_vs_sum_max: 0.0,
            commutation_max: 0.0,
            cayley_hamilton_max: 0.0,
            trace_identity_max: 0.0,
            eigen_route_max: 0.0,
            charpoly_root_max: 0.0,
            scalar_identity_max: 0.0,
        };
        for _ in 0..args.trials {
            let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let shape = ShapeMatrix::new(0.5 * (&raw + raw.transpose()))?;
            let (curv, vectors) = shape.eigen();
            let snorm = util::max_abs(curv.values());

            for k in 0..=n {
                let p = symfun::newton_matrix(&shape, k)?;
                let p_sum = symfun::newton_matrix_sum(&shape, k)?;
                per.recursion_vs_sum_max = per
                    .recursion_vs_sum_max
                    .max(util::amax(&(&p - &p_sum)) / util::degree_scale(snorm, k));

                let comm = shape.matrix() * &p - &p * shape.matrix();
                per.commutation_max = per
                    .commutation_max
                    .max(util::amax(&comm) / util::degree_scale(snorm, k + 1));

                let t = symfun::trace_identities(&shape, k)?;
                let scaled = [
                    (t.trace_pk - t.closed_trace_pk).abs() / util::degree_scale(snorm, k),
                    (t.trace_s_pk - t.closed_trace_s_pk).abs()
                        / util::degree_scale(snorm, k + 1),
                    (t.trace_s2_pk - t.closed_trace_s2_pk).abs()
                        / util::degree_scale(snorm, k + 2),
                ];
                for s in scaled {
                    per.trace_identity_max = per.trace_identity_max.max(s);
                }

                let mu = symfun::newton_eigenvalues(&curv, k)?;
                let action = &p * &vectors - &vectors * DMatrix::from_diagonal(&DVector::from_vec(mu));
                per.eigen_route_max = per
                    .eigen_route_max
                    .max(util::amax(&action) / util::degree_scale(snorm, k));

                if k == n {
                    per.cayley_hamilton_max = per
                        .cayley_hamilton_max
                        .max(util::amax(&p) / util::degree_scale(snorm, n));
                }
            }

            let coeffs = symfun::characteristic_polynomial(&shape);
            for &kappa in curv.values() {
                per.charpoly_root_max = per.charpoly_root_max.max(
                    symfun::eval_polynomial(&coeffs, kappa).abs()
                        / util::degree_scale(snorm, n),
                );
            }
            for c in [1.0, -1.0] {
                per.scalar_identity_max = per.scalar_identity_max.max(
                    symfun::scalar_curvature_check(&shape, c).abs() / util::degree_scale(snorm, 2),
                );
            }
        }
        overall = overall
            .max(per.recursion_vs_sum_max)
            .max(per.commutation_max)
            .max(per.cayley_hamilton_max)
            .max(per.trace_identity_max)
            .max(per.eigen_route_max)
            .max(per.charpoly_root_max)
            .max(per.scalar_identity_max);
        suite.push(per);
    }

    let pass = overall <= tol::ALGEBRA_REL;
    let mut failures = Vec::new();
    if !pass {
        failures.push(format!(
            "identity residual {overall:.3e} exceeds {:.3e}",
            tol::ALGEBRA_REL
        ));
    }
    let report = Report {
        schema_version: 1,
        config_echo: ConfigEcho {
            command: "identity-suite".into(),
            seed: Some(args.seed),
            n_max: Some(args.n_max),
            trials: Some(args.trials),
            ..Default::default()
        },
        predicted: None,
        fitted: None,
        residuals: None,
        identities: Some(IdentitiesJson {
            suite: Some(suite),
            overall_max: Some(overall),
            ..Default::default()
        }),
        classification: None,
        checks_passed: pass,
        failures,
    };
    Ok((report, pass))
}

// ───────────────────────────── verify-example ─────────────────────────────

fn resolve_family(args: &VerifyExampleArgs) -> Result<(ExampleFamily, ConfigEcho)> {
    let c = match (args.family, args.c) {
        (FamilyArg::UmbilicSphereCap, None) => 1,
        (FamilyArg::UmbilicSphereCap, Some(1)) => 1,
        (FamilyArg::UmbilicSphereCap, Some(c)) => {
            return Err(Error::Inadmissible(format!(
                "umbilic_sphere_cap lives in the sphere (c=1), got c={c}"
            )))
        }
        (FamilyArg::UmbilicHyperbolic, None) => -1,
        (FamilyArg::UmbilicHyperbolic, Some(-1)) => -1,
        (FamilyArg::UmbilicHyperbolic, Some(c)) => {
            return Err(Error::Inadmissible(format!(
                "umbilic_hyperbolic lives in hyperbolic space (c=-1), got c={c}"
            )))
        }
        (_, Some(c)) if c == 1 || c == -1 => c,
        (_, None) => 1,
        (_, Some(c)) => {
            return Err(Error::Inadmissible(format!("c must be +1 or -1, got {c}")))
        }
    };

    let mut echo = ConfigEcho {
        command: "verify-example".into(),
        n: Some(args.n),
        k: Some(args.k),
        c: Some(c),
        samples: Some(args.samples),
        seed: Some(args.seed),
        tol_class: Some(args.tol_class),
        constrain_selfadjoint: Some(args.constrain_selfadjoint),
        ..Default::default()
    };

    let family = match args.family {
        FamilyArg::ZeroHk1 => ExampleFamily::zero_hk1(args.n, c)?,
        FamilyArg::UmbilicSphereCap => {
            let tau = args.tau.unwrap_or(0.0);
            echo.tau = Some(tau);
            ExampleFamily::umbilic_sphere_cap(args.n, tau)?
        }
        FamilyArg::UmbilicHyperbolic => {
            let axis = args.axis.ok_or_else(|| {
                Error::Inadmissible("--axis is required for umbilic_hyperbolic".into())
            })?;
            let tau = args.tau.ok_or_else(|| {
                Error::Inadmissible("--tau is required for umbilic_hyperbolic".into())
            })?;
            echo.axis = Some(axis.name().into());
            echo.tau = Some(tau);
            ExampleFamily::umbilic_hyperbolic(args.n, axis.kind(), tau)?
        }
        FamilyArg::RiemannianProduct => {
            let r = args.r.ok_or_else(|| {
                Error::Inadmissible("--r is required for riemannian_product".into())
            })?;
            let m = args.m.ok_or_else(|| {
                Error::Inadmissible("--m is required for riemannian_product".into())
            })?;
            echo.radius = Some(r);
            echo.m = Some(m);
            ExampleFamily::riemannian_product(args.n, m, r, c)?
        }
    };
    echo.family = Some(family.name().into());
    Ok((family, echo))
}

/// Residuals of the pure algebra identities evaluated on each sampled
/// curvature diagonal, scaled by the usual degree factor.
fn sample_identity_residuals(
    samples: &[verify::EvaluatedSample],
    c: f64,
) -> Result<IdentitiesJson> {
    let mut trace_max: f64 = 0.0;
    let mut cayley_max: f64 = 0.0;
    let mut charpoly_max: f64 = 0.0;
    let mut scalar_max: f64 = 0.0;
    for s in samples {
        let shape = ShapeMatrix::from_diagonal(s.frame.curvatures.values())?;
        let n = shape.dim();
        let snorm = util::max_abs(s.frame.curvatures.values());
        for k in 0..=n {
            let t = symfun::trace_identities(&shape, k)?;
            trace_max = trace_max
                .max((t.trace_pk - t.closed_trace_pk).abs() / util::degree_scale(snorm, k))
                .max(
                    (t.trace_s_pk - t.closed_trace_s_pk).abs()
                        / util::degree_scale(snorm, k + 1),
                )
                .max(
                    (t.trace_s2_pk - t.closed_trace_s2_pk).abs()
                        / util::degree_scale(snorm, k + 2),
                );
        }
        let pn = symfun::newton_matrix(&shape, n)?;
        cayley_max = cayley_max.max(util::amax(&pn) / util::degree_scale(snorm, n));
        let coeffs = symfun::characteristic_polynomial(&shape);
        for &kappa in s.frame.curvatures.values() {
            charpoly_max = charpoly_max.max(
                symfun::eval_polynomial(&coeffs, kappa).abs() / util::degree_scale(snorm, n),
            );
        }
        scalar_max = scalar_max
            .max(symfun::scalar_curvature_check(&shape, c).abs() / util::degree_scale(snorm, 2));
    }
    Ok(IdentitiesJson {
        trace_identity_max: Some(trace_max),
        cayley_hamilton_max: Some(cayley_max),
        charpoly_root_max: Some(charpoly_max),
        scalar_curvature_max: Some(scalar_max),
        ..Default::default()
    })
}

fn run_verify_example(args: &VerifyExampleArgs) -> Result<(Report, bool)> {
    let (family, echo) = resolve_family(args)?;
    family.check_order(args.k)?;
    let space = family.space();

    let opts = EvaluationOptions {
        samples: args.samples,
        seed: args.seed,
        with_gauss: true,
        with_curvature_gradients: true,
    };
    let evaluated = verify::evaluate_family(&family, args.k, &opts)?;
    let set = verify::to_sample_set(family.n(), &evaluated)?;
    if let Some(path) = &args.csv {
        let file = std::fs::File::create(path)?;
        set.write_csv(file)?;
    }

    let fit = verify::fit_affine(&space, &set, args.constrain_selfadjoint)?;
    let predicted = family.predicted_affine(args.k)?;
    let fit_vs_predicted = {
        let da = util::amax(&(&fit.a_matrix - &predicted.a_matrix));
        let db = (&fit.b_vector - &predicted.b_vector).amax();
        da.max(db) / (1.0 + util::amax(&predicted.a_matrix))
    };

    let pos_disc: Vec<f64> = evaluated.iter().map(|s| s.lk_position.discrepancy).collect();
    let gauss_disc: Vec<f64> = evaluated
        .iter()
        .filter_map(|s| s.lk_gauss.as_ref().map(|g| g.discrepancy))
        .collect();
    let lk_position_max = util::max_abs(&pos_disc);
    let lk_gauss_max = util::max_abs(&gauss_disc);

    let checks = verify::structural_checks(&space, args.k, &fit.a_matrix, &fit.b_vector, &evaluated)?;
    let identities = sample_identity_residuals(&evaluated, space.curvature_sign())?;

    let class_input = ClassificationInput::from_evaluated(&evaluated);
    let class = verify::classify(&space, &class_input, args.tol_class);
    let expected = verify::expected_verdict(&family);

    let mut failures = Vec::new();
    if fit_vs_predicted > tol::FIT_MATCH_REL {
        failures.push(format!(
            "fitted constants deviate from the model by {fit_vs_predicted:.3e} (limit {:.1e})",
            tol::FIT_MATCH_REL
        ));
    }
    if lk_position_max > tol::LK_POSITION_REL {
        failures.push(format!(
            "dual-route L_k x discrepancy {lk_position_max:.3e} (limit {:.1e})",
            tol::LK_POSITION_REL
        ));
    }
    if lk_gauss_max > tol::LK_GAUSS_REL {
        failures.push(format!(
            "dual-route L_k N discrepancy {lk_gauss_max:.3e} (limit {:.1e})",
            tol::LK_GAUSS_REL
        ));
    }
    if fit.selfadjoint_defect > tol::SELFADJOINT_DEFECT {
        failures.push(format!(
            "self-adjointness defect {:.3e} (limit {:.1e})",
            fit.selfadjoint_defect,
            tol::SELFADJOINT_DEFECT
        ));
    }
    if checks.weingarten_residual > tol::STRUCTURAL_REL {
        failures.push(format!(
            "Weingarten-type residual {:.3e} (limit {:.1e})",
            checks.weingarten_residual,
            tol::STRUCTURAL_REL
        ));
    }
    if checks.position_residual > tol::STRUCTURAL_REL {
        failures.push(format!(
            "A x decomposition residual {:.3e} (limit {:.1e})",
            checks.position_residual,
            tol::STRUCTURAL_REL
        ));
    }
    if checks.slice_constant_stddev > tol::SLICE_CONSTANT_STD {
        failures.push(format!(
            "slice constant spread {:.3e} (limit {:.1e})",
            checks.slice_constant_stddev,
            tol::SLICE_CONSTANT_STD
        ));
    }
    if class.verdict != expected {
        failures.push(format!(
            "classified as {} but the family is {}",
            class.verdict.as_str(),
            expected.as_str()
        ));
    }
    let pass = failures.is_empty();

    let report = Report {
        schema_version: 1,
        config_echo: echo,
        predicted: Some(PredictedJson {
            a_matrix: matrix_rows(&predicted.a_matrix),
            b_vector: predicted.b_vector.iter().copied().collect(),
            hk: family.predicted_hk(args.k)?,
            hk1: family.predicted_hk(args.k + 1)?,
            curvatures: family.predicted_curvatures(),
        }),
        fitted: Some(FittedJson {
            a_matrix: matrix_rows(&fit.a_matrix),
            b_vector: fit.b_vector.iter().copied().collect(),
            residual_rms: fit.residual_rms,
            residual_max: fit.residual_max,
            design_rank: fit.design_rank,
            design_nullity: fit.design_nullity,
            gauge_fixed: fit.gauge_fixed,
            constrained: fit.constrained,
            selfadjoint_defect: fit.selfadjoint_defect,
        }),
        residuals: Some(ResidualsJson {
            fit_rms: fit.residual_rms,
            fit_max: fit.residual_max,
            fit_vs_predicted: Some(fit_vs_predicted),
            lk_position_max: Some(lk_position_max),
            lk_position_mean: Some(util::mean(&pos_disc)),
            lk_gauss_max: Some(lk_gauss_max),
            lk_gauss_mean: Some(util::mean(&gauss_disc)),
            weingarten: Some(checks.weingarten_residual),
            position_decomposition: Some(checks.position_residual),
            slice_constant_mean: Some(checks.slice_constant_mean),
            slice_constant_stddev: Some(checks.slice_constant_stddev),
            normal_constant_mean: Some(checks.normal_constant_mean),
            normal_constant_stddev: Some(checks.normal_constant_stddev),
        }),
        identities: Some(identities),
        classification: Some(classification_json(&class, Some(expected))),
        checks_passed: pass,
        failures,
    };
    Ok((report, pass))
}

// ───────────────────────────────── fit ─────────────────────────────────

fn run_fit(args: &FitArgs) -> Result<Report> {
    if args.c != 1 && args.c != -1 {
        return Err(Error::Inadmissible(format!(
            "c must be +1 or -1, got {}",
            args.c
        )));
    }
    let file = std::fs::File::open(&args.csv)?;
    let set = SampleSet::read_csv(file)?;
    let space = AmbientSpace::from_sign(set.n, args.c)?;
    if args.k + 1 > set.n {
        return Err(Error::OrderOutOfRange {
            k: args.k,
            n: set.n,
        });
    }

    let fit = verify::fit_affine(&space, &set, args.constrain_selfadjoint)?;
    let input = ClassificationInput::from_records(&space, args.k, &set)?;
    let class = verify::classify(&space, &input, args.tol_class);

    Ok(Report {
        schema_version: 1,
        config_echo: ConfigEcho {
            command: "fit".into(),
            n: Some(set.n),
            k: Some(args.k),
            c: Some(args.c),
            tol_class: Some(args.tol_class),
            constrain_selfadjoint: Some(args.constrain_selfadjoint),
            ..Default::default()
        },
        predicted: None,
        fitted: Some(FittedJson {
            a_matrix: matrix_rows(&fit.a_matrix),
            b_vector: fit.b_vector.iter().copied().collect(),
            residual_rms: fit.residual_rms,
            residual_max: fit.residual_max,
            design_rank: fit.design_rank,
            design_nullity: fit.design_nullity,
            gauge_fixed: fit.gauge_fixed,
            constrained: fit.constrained,
            selfadjoint_defect: fit.selfadjoint_defect,
        }),
        residuals: Some(ResidualsJson {
            fit_rms: fit.residual_rms,
            fit_max: fit.residual_max,
            ..Default::default()
        }),
        identities: None,
        classification: Some(classification_json(&class, None)),
        checks_passed: true,
        failures: Vec::new(),
    })
}

// ───────────────────────────────── entry ─────────────────────────────────

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    let bytes = to_json_bytes(report)?;
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 3,
        Error::Csv(e) => match e.kind() {
            csv::ErrorKind::Io(_) => 3,
            _ => 2,
        },
        _ => 2,
    }
}

/// Parse arguments, run the selected subcommand and return the process
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };

    let outcome: Result<(Report, Option<PathBuf>, i32)> = match &cli.command {
        Command::IdentitySuite(a) => run_identity_suite(a)
            .map(|(report, pass)| (report, a.out.clone(), if pass { 0 } else { 1 })),
        Command::VerifyExample(a) => run_verify_example(a)
            .map(|(report, pass)| (report, a.out.clone(), if pass { 0 } else { 1 })),
        Command::Fit(a) => run_fit(a).map(|report| (report, a.out.clone(), 0)),
    };

    match outcome {
        Ok((report, out, code)) => match emit(&report, out.as_deref()) {
            Ok(()) => code,
            Err(err) => {
                eprintln!("error: {err}");
                exit_code(&err)
            }
        },
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}
