//! Sampling, affine fitting and structural verification.
//!
//! The central question: given samples `(x_i, L_k x_i)` of a hypersurface,
//! recover constants `(A, b)` with `L_k x = A x + b` and decide which model
//! family the surface belongs to.
//!
//! Fitting is least squares. When the sampled surface lies inside an
//! affine hyperplane `{<a,x> = τ}` (all the umbilic slice families do),
//! the design matrix is rank deficient and `(A, b)` is only determined up
//! to the gauge moves `A → A + w aᵀ`, `b → b − τ w`. The raw minimum-norm
//! solution is then a poor representative; [`fit_affine`] therefore snaps
//! along the estimated null space to the representative closest (in
//! Frobenius norm) to a scalar matrix `σI`, which is the form the model
//! families actually take. Full-rank fits are left untouched, and the
//! snap never changes the predictions `A x_i + b` on the sampled surface.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::catalog::ExampleFamily;
use crate::chart::{AmbientSpace, FrameData};
use crate::error::{Error, Result};
use crate::lkop::{self, DualVector};
use crate::symfun;
use crate::tol;
use crate::util;

// ───────────────────────────── sample sets ─────────────────────────────

/// One sampled point: chart coordinates, position and `L_k x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub u: Vec<f64>,
    pub position: DVector<f64>,
    pub lk_position: DVector<f64>,
}

/// A batch of samples of one hypersurface at one fixed order `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub n: usize,
    pub records: Vec<SampleRecord>,
}

impl SampleSet {
    pub fn new(n: usize, records: Vec<SampleRecord>) -> Result<Self> {
        symfun::check_dim(n)?;
        let d = n + 2;
        for r in &records {
            if r.u.len() != n || r.position.len() != d || r.lk_position.len() != d {
                return Err(Error::MalformedSamples(format!(
                    "record shapes (u={}, x={}, Lkx={}) do not match n={n}",
                    r.u.len(),
                    r.position.len(),
                    r.lk_position.len()
                )));
            }
            let finite = r.u.iter().all(|v| v.is_finite())
                && r.position.iter().all(|v| v.is_finite())
                && r.lk_position.iter().all(|v| v.is_finite());
            if !finite {
                return Err(Error::MalformedSamples("non-finite sample entry".into()));
            }
        }
        Ok(Self { n, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Column layout: `u_1..u_n`, `x_0..x_{n+1}`, `Lkx_0..Lkx_{n+1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.n + 2;
        let mut header = Vec::new();
        header.extend((1..=self.n).map(|i| format!("u_{i}")));
        header.extend((0..d).map(|i| format!("x_{i}")));
        header.extend((0..d).map(|i| format!("Lkx_{i}")));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = Vec::with_capacity(self.n + 2 * d);
            row.extend(r.u.iter().map(|v| format!("{v}")));
            row.extend(r.position.iter().map(|v| format!("{v}")));
            row.extend(r.lk_position.iter().map(|v| format!("{v}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers()?.clone();
        let n = header.iter().filter(|h| h.starts_with("u_")).count();
        let d = header.iter().filter(|h| h.starts_with("x_")).count();
        let dl = header.iter().filter(|h| h.starts_with("Lkx_")).count();
        if n == 0 || d != n + 2 || dl != d || header.len() != n + 2 * d {
            return Err(Error::MalformedSamples(format!(
                "header has {n} u-columns, {d} x-columns, {dl} Lkx-columns"
            )));
        }
        let expected: Vec<String> = (1..=n)
            .map(|i| format!("u_{i}"))
            .chain((0..d).map(|i| format!("x_{i}")))
            .chain((0..d).map(|i| format!("Lkx_{i}")))
            .collect();
        if header.iter().ne(expected.iter().map(|s| s.as_str())) {
            return Err(Error::MalformedSamples(
                "columns must be ordered u_1..u_n, x_0..x_{n+1}, Lkx_0..Lkx_{n+1}".into(),
            ));
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::MalformedSamples(format!("bad float {s:?}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != n + 2 * d {
                return Err(Error::MalformedSamples(format!(
                    "row has {} fields, expected {}",
                    vals.len(),
                    n + 2 * d
                )));
            }
            records.push(SampleRecord {
                u: vals[0..n].to_vec(),
                position: DVector::from_column_slice(&vals[n..n + d]),
                lk_position: DVector::from_column_slice(&vals[n + d..]),
            });
        }
        if records.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        Self::new(n, records)
    }
}

// ─────────────────────────── family evaluation ───────────────────────────

/// Frame plus operator evaluations at one sampled point.
#[derive(Debug, Clone)]
pub struct EvaluatedSample {
    pub frame: FrameData,
    pub lk_position: DualVector,
    pub lk_gauss: Option<DualVector>,
    pub hk: f64,
    pub hk1: f64,
    /// Chart partials `∂_i H_k`, when curvature gradients were requested.
    pub hk_partials: Option<DVector<f64>>,
    pub hk1_partials: Option<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub struct EvaluationOptions {
    pub samples: usize,
    pub seed: u64,
    /// Also run the (more expensive) dual-route Gauss map evaluation.
    pub with_gauss: bool,
    /// Also compute chart partials of `H_k` and `H_{k+1}`.
    pub with_curvature_gradients: bool,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self {
            samples: 50,
            seed: 1,
            with_gauss: true,
            with_curvature_gradients: true,
        }
    }
}

/// Build a rayon pool sized by `NEWTONLK_THREADS` (default: rayon's own).
fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = std::env::var("NEWTONLK_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Inadmissible(format!("thread pool: {e}")))
}

/// Evaluate a model family at seeded sample points. The point sequence is
/// drawn sequentially from one seeded generator, and the per-point work is
/// order-preserving, so output is independent of thread count.
pub fn evaluate_family(
    family: &ExampleFamily,
    k: usize,
    opts: &EvaluationOptions,
) -> Result<Vec<EvaluatedSample>> {
    if opts.samples == 0 {
        return Err(Error::EmptySampleSet);
    }
    family.check_order(k)?;
    let chart = family.chart();
    let points = family.sample_points(opts.samples, opts.seed);
    let pool = thread_pool()?;
    pool.install(|| {
        points
            .par_iter()
            .map(|u| {
                let frame = chart.frame(u)?;
                let lk_position = lkop::lk_position(&chart, &frame, k)?;
                let lk_gauss = if opts.with_gauss {
                    Some(lkop::lk_gauss(&chart, &frame, k)?)
                } else {
                    None
                };
                let profile = frame.profile();
                let (hk, hk1) = (profile.h(k), profile.h_ext(k + 1));
                let (hk_partials, hk1_partials) = if opts.with_curvature_gradients {
                    let (pk, _) = lkop::curvature_gradient(&chart, &frame, k)?;
                    let (pk1, _) = lkop::curvature_gradient(&chart, &frame, k + 1)?;
                    (Some(pk), Some(pk1))
                } else {
                    (None, None)
                };
                Ok(EvaluatedSample {
                    frame,
                    lk_position,
                    lk_gauss,
                    hk,
                    hk1,
                    hk_partials,
                    hk1_partials,
                })
            })
            .collect()
    })
}

/// Package evaluated samples as a plain sample set (generic-route `L_k x`).
pub fn to_sample_set(n: usize, samples: &[EvaluatedSample]) -> Result<SampleSet> {
    SampleSet::new(
        n,
        samples
            .iter()
            .map(|s| SampleRecord {
                u: s.frame.u.clone(),
                position: s.frame.position.clone(),
                lk_position: s.lk_position.generic.clone(),
            })
            .collect(),
    )
}

// ───────────────────────────── affine fitting ─────────────────────────────

/// Result of fitting `y ≈ A x + b`.
#[derive(Debug, Clone)]
pub struct AffineFit {
    pub a_matrix: DMatrix<f64>,
    pub b_vector: DVector<f64>,
    /// `sqrt(mean_i ‖A x_i + b − y_i‖²)`.
    pub residual_rms: f64,
    /// `max_i ‖A x_i + b − y_i‖_∞`.
    pub residual_max: f64,
    pub design_rank: usize,
    pub design_nullity: usize,
    /// Whether a gauge snap was applied (rank-deficient design).
    pub gauge_fixed: bool,
    pub constrained: bool,
    /// `amax(AᵀG − GA) / (1 + amax(A))` of the returned matrix.
    pub selfadjoint_defect: f64,
}

/// `amax(AᵀG − GA) / (1 + amax(A))`: failure of `A` to be self-adjoint for
/// the ambient inner product.
pub fn selfadjoint_defect(space: &AmbientSpace, a: &DMatrix<f64>) -> f64 {
    let g = space.metric_diagonal();
    let d = a.nrows();
    let mut defect: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            // (AᵀG)_ij = A_ji G_jj, (GA)_ij = G_ii A_ij
            defect = defect.max((a[(j, i)] * g[j] - g[i] * a[(i, j)]).abs());
        }
    }
    defect / (1.0 + util::amax(a))
}

/// Fit `L_k x ≈ A x + b` by least squares.
///
/// With `constrain_selfadjoint` the fit is restricted to matrices that are
/// self-adjoint for the ambient metric (`A = G M`, `M` symmetric).
pub fn fit_affine(
    space: &AmbientSpace,
    set: &SampleSet,
    constrain_selfadjoint: bool,
) -> Result<AffineFit> {
    if set.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if set.n != space.dim() {
        return Err(Error::BadShape {
            rows: set.n,
            cols: 1,
            expected: space.dim(),
        });
    }
    let d = space.ambient_dim();
    let m = set.len();

    // Design for the affine map, shared by rank analysis and fitting:
    // row i = [x_iᵀ, 1].
    let design = DMatrix::from_fn(m, d + 1, |i, j| {
        if j < d {
            set.records[i].position[j]
        } else {
            1.0
        }
    });
    let svd = design.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let rank_tol = sigma_max * tol::RANK_REL;
    let design_rank = svd.singular_values.iter().filter(|&&s| s > rank_tol).count();
    let design_nullity = d + 1 - design_rank.min(d + 1);

    let (mut a_matrix, mut b_vector) = if constrain_selfadjoint {
        fit_constrained(space, set, rank_tol)?
    } else {
        // Min-norm solution for all target coordinates at once.
        let targets = DMatrix::from_fn(m, d, |i, j| set.records[i].lk_position[j]);
        let theta = svd
            .solve(&targets, rank_tol)
            .map_err(|e| Error::Inadmissible(format!("least squares: {e}")))?;
        let a = theta.rows(0, d).transpose();
        let b = theta.row(d).transpose();
        (a, b)
    };

    // Canonical gauge: represent the solution modulo the design null space
    // as the matrix nearest to σI.
    let null_vectors: Vec<DVector<f64>> = (design_rank..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] <= rank_tol)
        .filter_map(|j| svd.v_t.as_ref().map(|vt| vt.row(j).transpose()))
        .collect();
    let gauge_fixed = !null_vectors.is_empty() && null_vectors.len() < d;
    if gauge_fixed {
        let (da, db) = gauge_snap(space, &a_matrix, &null_vectors, constrain_selfadjoint);
        a_matrix += da;
        b_vector += db;
    }

    let mut sq = Vec::with_capacity(m);
    let mut residual_max: f64 = 0.0;
    for r in &set.records {
        let resid = &a_matrix * &r.position + &b_vector - &r.lk_position;
        sq.push(resid.norm_squared());
        residual_max = residual_max.max(resid.amax());
    }
    let residual_rms = util::mean(&sq).sqrt();

    let defect = selfadjoint_defect(space, &a_matrix);
    Ok(AffineFit {
        a_matrix,
        b_vector,
        residual_rms,
        residual_max,
        design_rank,
        design_nullity,
        gauge_fixed,
        constrained: constrain_selfadjoint,
        selfadjoint_defect: defect,
    })
}

/// Least squares over `A = G M` (`M` symmetric) and `b`, jointly.
fn fit_constrained(
    space: &AmbientSpace,
    set: &SampleSet,
    rank_tol: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let d = space.ambient_dim();
    let g = space.metric_diagonal();
    let m = set.len();
    let sym = d * (d + 1) / 2;
    let cols = sym + d;
    // Unknowns: M_{pq} for p <= q, then b.
    let pair_index = |p: usize, q: usize| -> usize {
        // index into the p <= q triangle, row-major
        p * d - p * (p + 1) / 2 + q
    };
    let mut design = DMatrix::zeros(m * d, cols);
    let mut rhs = DVector::zeros(m * d);
    for (i, rec) in set.records.iter().enumerate() {
        for r in 0..d {
            let row = i * d + r;
            rhs[row] = rec.lk_position[r];
            for q in 0..d {
                let (p, qq) = if r <= q { (r, q) } else { (q, r) };
                design[(row, pair_index(p, qq))] += g[r] * rec.position[q];
            }
            design[(row, sym + r)] = 1.0;
        }
    }
    let svd = design.svd(true, true);
    let theta = svd
        .solve(&rhs, rank_tol)
        .map_err(|e| Error::Inadmissible(format!("least squares: {e}")))?;
    let mut a = DMatrix::zeros(d, d);
    for p in 0..d {
        for q in p..d {
            let v = theta[pair_index(p, q)];
            a[(p, q)] = g[p] * v;
            a[(q, p)] = g[q] * v;
        }
    }
    let b = DVector::from_fn(d, |r, _| theta[sym + r]);
    Ok((a, b))
}

/// Correction `(ΔA, Δb)` moving `a` as close as possible to a scalar
/// matrix along the admissible gauge directions.
fn gauge_snap(
    space: &AmbientSpace,
    a: &DMatrix<f64>,
    null_vectors: &[DVector<f64>],
    constrained: bool,
) -> (DMatrix<f64>, DVector<f64>) {
    let d = a.nrows();
    let g = space.metric_diagonal();
    // Each direction is a rank-one update of A with a matching b shift.
    let mut dirs_a: Vec<DMatrix<f64>> = Vec::new();
    let mut dirs_b: Vec<DVector<f64>> = Vec::new();
    for nu in null_vectors {
        let nu_x = nu.rows(0, d).clone_owned();
        let nu_1 = nu[d];
        if constrained {
            // A += t G ν νᵀ keeps GA symmetric.
            let gnu = DVector::from_fn(d, |i, _| g[i] * nu_x[i]);
            dirs_a.push(&gnu * nu_x.transpose());
            dirs_b.push(gnu * nu_1);
        } else {
            for r in 0..d {
                let mut da = DMatrix::zeros(d, d);
                for q in 0..d {
                    da[(r, q)] = nu_x[q];
                }
                let mut db = DVector::zeros(d);
                db[r] = nu_1;
                dirs_a.push(da);
                dirs_b.push(db);
            }
        }
    }
    // Minimize ‖A + Σ θ_j ΔA_j − σ I‖_F over (θ, σ).
    let cols = dirs_a.len() + 1;
    let mut design = DMatrix::zeros(d * d, cols);
    let mut rhs = DVector::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            let row = i * d + j;
            rhs[row] = -a[(i, j)];
            for (t, da) in dirs_a.iter().enumerate() {
                design[(row, t)] = da[(i, j)];
            }
            design[(row, cols - 1)] = if i == j { -1.0 } else { 0.0 };
        }
    }
    let svd = design.svd(true, true);
    let eps = svd.singular_values.max() * tol::RANK_REL;
    let theta = match svd.solve(&rhs, eps) {
        Ok(t) => t,
        Err(_) => return (DMatrix::zeros(d, d), DVector::zeros(d)),
    };
    let mut da = DMatrix::zeros(d, d);
    let mut db = DVector::zeros(d);
    for (t, coeff) in theta.iter().take(dirs_a.len()).enumerate() {
        da += &dirs_a[t] * *coeff;
        db += &dirs_b[t] * *coeff;
    }
    (da, db)
}

// ─────────────────────────── structural checks ───────────────────────────

/// Pointwise identities tying `(A, b)` to the geometry of the samples.
#[derive(Debug, Clone)]
pub struct StructuralChecks {
    /// Max over samples and tangent directions of the Weingarten-type
    /// relation for `A X`, scaled by `1 + amax(A)`.
    pub weingarten_residual: f64,
    /// Max over samples of the normal/position decomposition of `A x`,
    /// scaled by `1 + amax(A)`.
    pub position_residual: f64,
    /// Mean of `<b,x> − c_k H_k` over samples.
    pub slice_constant_mean: f64,
    /// Standard deviation of the same quantity; small means constant.
    pub slice_constant_stddev: f64,
    /// Mean and spread of `<b,N> − c_k H_{k+1}` (diagnostic only).
    pub normal_constant_mean: f64,
    pub normal_constant_stddev: f64,
}

/// Evaluate the structural identities for given constants `(A, b)` against
/// evaluated samples. Requires curvature gradients on the samples.
pub fn structural_checks(
    space: &AmbientSpace,
    k: usize,
    a_matrix: &DMatrix<f64>,
    b_vector: &DVector<f64>,
    samples: &[EvaluatedSample],
) -> Result<StructuralChecks> {
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let n = space.dim();
    let c = space.curvature_sign();
    let ck = symfun::newton_trace_coefficient(n, k);
    let scale = 1.0 + util::amax(a_matrix);

    let mut weingarten: f64 = 0.0;
    let mut position: f64 = 0.0;
    let mut slice_consts = Vec::with_capacity(samples.len());
    let mut normal_consts = Vec::with_capacity(samples.len());
    for s in &samples[..] {
        let f = &s.frame;
        let dk = s
            .hk_partials
            .as_ref()
            .ok_or_else(|| Error::Inadmissible("curvature gradients not evaluated".into()))?;
        let dk1 = s
            .hk1_partials
            .as_ref()
            .ok_or_else(|| Error::Inadmissible("curvature gradients not evaluated".into()))?;

        // A X = −c_k H_{k+1} S X − c c_k H_k X + c_k (∂H_{k+1}·X) N
        //       − c c_k (∂H_k·X) x, for X = ∂_i.
        for i in 0..n {
            let x_dir = f.tangents.column(i).clone_owned();
            let s_dir = &f.tangents * f.shape_operator.column(i);
            let rhs = s_dir * (-ck * s.hk1) - &x_dir * (c * ck * s.hk)
                + &f.normal * (ck * dk1[i])
                - &f.position * (c * ck * dk[i]);
            let lhs = a_matrix * &x_dir;
            weingarten = weingarten.max((lhs - rhs).amax() / scale);
        }

        // A x = −b_tan + (c_k H_{k+1} − <b,N>) N − c (c_k H_k + <b,x>) x.
        let b_n = space.inner(b_vector, &f.normal);
        let b_x = space.inner(b_vector, &f.position);
        let rhs = -f.tangential_projection(b_vector) + &f.normal * (ck * s.hk1 - b_n)
            - &f.position * (c * (ck * s.hk + b_x));
        let lhs = a_matrix * &f.position;
        position = position.max((lhs - rhs).amax() / scale);

        slice_consts.push(b_x - ck * s.hk);
        normal_consts.push(b_n - ck * s.hk1);
    }

    Ok(StructuralChecks {
        weingarten_residual: weingarten,
        position_residual: position,
        slice_constant_mean: util::mean(&slice_consts),
        slice_constant_stddev: util::stddev(&slice_consts),
        normal_constant_mean: util::mean(&normal_consts),
        normal_constant_stddev: util::stddev(&normal_consts),
    })
}

// ───────────────────────────── classification ─────────────────────────────

/// Best-fit `λ` and residual of the relation `κ² + λκ − c = 0` over a pool
/// of principal curvatures. Products of two space forms satisfy it
/// exactly; `λ = 0` picks out the minimal ones.
#[derive(Debug, Clone)]
pub struct QuadraticCheck {
    pub lambda: f64,
    pub defect: f64,
}

pub fn quadratic_shape_check(c: f64, curvatures: &[f64]) -> QuadraticCheck {
    let denom: f64 = curvatures.iter().map(|k| k * k).sum();
    let lambda = if denom > 0.0 {
        -curvatures.iter().map(|k| k * (k * k - c)).sum::<f64>() / denom
    } else {
        0.0
    };
    let defect = curvatures
        .iter()
        .map(|k| (k * k + lambda * k - c).abs())
        .fold(0.0, f64::max);
    QuadraticCheck { lambda, defect }
}

/// Split sorted values into clusters separated by gaps larger than
/// [`tol::CURVATURE_GAP`]; returns the cluster means.
fn curvature_clusters(pool: &[f64]) -> Vec<f64> {
    let mut sorted = pool.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tol::CURVATURE_GAP {
            clusters.push(util::mean(&sorted[start..i]));
            start = i;
        }
    }
    clusters
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ZeroHk1ConstHk,
    TotallyUmbilical,
    IsoparametricProduct,
    NoMatch,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ZeroHk1ConstHk => "zero_Hk1_const_Hk",
            Verdict::TotallyUmbilical => "totally_umbilical",
            Verdict::IsoparametricProduct => "isoparametric_product",
            Verdict::NoMatch => "no_match",
        }
    }
}

/// Curvature evidence feeding the classifier.
#[derive(Debug, Clone)]
pub struct ClassificationInput {
    /// `H_k` per sample.
    pub hk_values: Vec<f64>,
    /// `|H_{k+1}|` per sample.
    pub hk1_abs_values: Vec<f64>,
    /// Principal curvatures per sample; `None` when only scalar data is
    /// available (fits from raw CSV).
    pub sample_curvatures: Option<Vec<Vec<f64>>>,
}

impl ClassificationInput {
    pub fn from_evaluated(samples: &[EvaluatedSample]) -> Self {
        Self {
            hk_values: samples.iter().map(|s| s.hk).collect(),
            hk1_abs_values: samples.iter().map(|s| s.hk1.abs()).collect(),
            sample_curvatures: Some(
                samples
                    .iter()
                    .map(|s| s.frame.curvatures.values().to_vec())
                    .collect(),
            ),
        }
    }

    /// Scalar curvature evidence straight from `(x, L_k x)` samples:
    /// `H_k = −<y,x>/c_k` and `c_k² H_{k+1}² = <y,y> − c c_k² H_k²`.
    pub fn from_records(space: &AmbientSpace, k: usize, set: &SampleSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        let n = space.dim();
        if k + 1 > n {
            return Err(Error::OrderOutOfRange { k, n });
        }
        let c = space.curvature_sign();
        let ck = symfun::newton_trace_coefficient(n, k);
        let mut hk_values = Vec::with_capacity(set.len());
        let mut hk1_abs_values = Vec::with_capacity(set.len());
        for r in &set.records {
            let yx = space.inner(&r.lk_position, &r.position);
            let yy = space.inner(&r.lk_position, &r.lk_position);
            let hk = -yx / ck;
            let hk1_sq = (yy / (ck * ck) - c * hk * hk).max(0.0);
            hk_values.push(hk);
            hk1_abs_values.push(hk1_sq.sqrt());
        }
        Ok(Self {
            hk_values,
            hk1_abs_values,
            sample_curvatures: None,
        })
    }
}

/// Outcome of the classification cascade, with the evidence that drove it.
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub hk1_abs_mean: f64,
    pub hk_stddev: f64,
    pub umbilicity_defect: Option<f64>,
    pub quadratic: Option<QuadraticCheck>,
    pub cluster_means: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

/// Decide which model family the evidence matches, first hit wins:
///
/// 1. `H_{k+1} ≈ 0` with `H_k` constant. If the principal curvatures
///    nevertheless form two distinct clusters satisfying the product
///    quadratic, the surface is a product that happens to have vanishing
///    `H_{k+1}` and is reported as such.
/// 2. Totally umbilical (needs principal curvatures).
/// 3. Two curvature clusters satisfying `κ² + λκ − c = 0` (needs
///    principal curvatures).
/// 4. Otherwise `no_match`.
pub fn classify(space: &AmbientSpace, input: &ClassificationInput, tol_class: f64) -> ClassificationReport {
    let c = space.curvature_sign();
    let hk1_abs_mean = util::mean(&input.hk1_abs_values);
    let hk_stddev = util::stddev(&input.hk_values);
    let mut notes = Vec::new();

    let curvature_data = input.sample_curvatures.as_ref();
    let pool: Option<Vec<f64>> =
        curvature_data.map(|per| per.iter().flatten().copied().collect());
    let umbilicity_defect = curvature_data.map(|per| {
        per.iter()
            .map(|ks| {
                let m = util::mean(ks);
                ks.iter().map(|k| (k - m).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    });
    let quadratic = pool.as_ref().map(|p| quadratic_shape_check(c, p));
    let cluster_means = pool.as_ref().map(|p| curvature_clusters(p));
    if curvature_data.is_none() {
        notes.push(
            "no principal curvature evidence; umbilic and product branches unavailable".into(),
        );
    }

    let two_cluster_product = match (&quadratic, &cluster_means) {
        (Some(q), Some(cl)) => cl.len() == 2 && q.defect <= tol_class,
        _ => false,
    };

    let verdict = if hk1_abs_mean <= tol_class && hk_stddev <= tol_class {
        if two_cluster_product {
            notes.push(
                "H_{k+1} vanishes but the curvatures split into two product clusters".into(),
            );
            Verdict::IsoparametricProduct
        } else {
            Verdict::ZeroHk1ConstHk
        }
    } else if umbilicity_defect.is_some_and(|d| d <= tol_class) {
        Verdict::TotallyUmbilical
    } else if two_cluster_product {
        Verdict::IsoparametricProduct
    } else {
        Verdict::NoMatch
    };

    ClassificationReport {
        verdict,
        hk1_abs_mean,
        hk_stddev,
        umbilicity_defect,
        quadratic,
        cluster_means,
        notes,
    }
}

/// The verdict a correctly working pipeline should reach for a model
/// family at its nominal parameters. Slices with `τ = 0` are totally
/// geodesic, so they land in the degenerate first branch rather than the
/// umbilical one.
pub fn expected_verdict(family: &ExampleFamily) -> Verdict {
    use crate::catalog::FamilyKind;
    match family.kind() {
        FamilyKind::ZeroHk1 => Verdict::ZeroHk1ConstHk,
        FamilyKind::UmbilicSphereCap { tau } | FamilyKind::UmbilicHyperbolic { tau, .. } => {
            if *tau == 0.0 {
                Verdict::ZeroHk1ConstHk
            } else {
                Verdict::TotallyUmbilical
            }
        }
        FamilyKind::RiemannianProduct { .. } => Verdict::IsoparametricProduct,
    }
}

/// Add seeded Gaussian-ish noise to the `L_k x` columns; used as the
/// negative control ("garbage in, no verdict out").
pub fn perturb_lk(set: &SampleSet, amplitude: f64, seed: u64) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = set.clone();
    for r in &mut out.records {
        for v in r.lk_position.iter_mut() {
            *v += amplitude * (rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0));
        }
    }
    out
}
