//! Symmetric-function algebra of principal curvatures.
//!
//! For a shape operator with eigenvalues `κ_1..κ_n` the elementary symmetric
//! functions `s_k = σ_k(κ)` define the higher-order mean curvatures through
//! `binom(n,k) H_k = s_k`, and the Newton transformations through the
//! recursion `P_0 = I`, `P_k = s_k I - S P_{k-1}`. The traces of `P_k`,
//! `S∘P_k` and `S²∘P_k` have closed forms used as cross-checks everywhere
//! else in the crate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tol;
use crate::util;

/// Largest hypersurface dimension the algebra accepts. Binomials up to
/// `binom(32,16)` stay exactly representable in `f64`, so nothing here ever
/// rounds a combinatorial coefficient.
pub const MAX_DIM: usize = 32;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::DimensionOutOfRange { n })
    }
}

/// Exact binomial coefficient as `f64`. Panics if `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n, "binomial({n}, {k}) out of range");
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc as f64
}

/// Coefficient `c_k = (n-k) binom(n,k) = (k+1) binom(n,k+1)` appearing in
/// `tr(P_k) = c_k H_k` and `tr(S∘P_k) = c_k H_{k+1}`.
pub fn newton_trace_coefficient(n: usize, k: usize) -> f64 {
    assert!(k <= n, "coefficient c_{k} undefined for n={n}");
    (n - k) as f64 * binomial(n, k)
}

/// Elementary symmetric functions `σ_0..σ_m` of the given values, computed by
/// the textbook product recurrence (one pass, updating top-down).
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// Mean curvatures `H_0..H_n` of the given principal curvatures,
/// `H_k = σ_k(κ) / binom(n,k)`.
pub fn mean_curvatures(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    elementary_symmetric(values)
        .into_iter()
        .enumerate()
        .map(|(k, s)| s / binomial(n, k))
        .collect()
}

/// Principal curvatures of an `n`-dimensional hypersurface, stored in
/// ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalCurvatures {
    values: Vec<f64>,
}

impl PrincipalCurvatures {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        check_dim(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "principal curvatures".into(),
            });
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn profile(&self) -> CurvatureProfile {
        CurvatureProfile::from_curvatures(self)
    }
}

/// The full ladder `s_0..s_n`, `H_0..H_n` for one curvature vector.
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    n: usize,
    sigma: Vec<f64>,
    h: Vec<f64>,
}

impl CurvatureProfile {
    pub fn from_curvatures(curv: &PrincipalCurvatures) -> Self {
        let n = curv.dim();
        let sigma = elementary_symmetric(curv.values());
        let h = sigma
            .iter()
            .enumerate()
            .map(|(k, s)| s / binomial(n, k))
            .collect();
        Self { n, sigma, h }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `σ_k`. Panics if `k > n`.
    pub fn sigma(&self, k: usize) -> f64 {
        self.sigma[k]
    }

    /// `H_k`. Panics if `k > n`.
    pub fn h(&self, k: usize) -> f64 {
        self.h[k]
    }

    /// `H_k` extended by zero beyond the top order, the convention used in
    /// all boundary cases of the trace identities.
    pub fn h_ext(&self, k: usize) -> f64 {
        if k <= self.n {
            self.h[k]
        } else {
            0.0
        }
    }

    /// `σ_k` extended by zero beyond the top order.
    pub fn sigma_ext(&self, k: usize) -> f64 {
        if k <= self.n {
            self.sigma[k]
        } else {
            0.0
        }
    }
}

/// A symmetric shape operator in some orthonormal frame.
///
/// Construction symmetrizes the entries, but only after checking the
/// asymmetry is at rounding level; a genuinely lopsided matrix is an error,
/// not something to be averaged away.
#[derive(Debug, Clone)]
pub struct ShapeMatrix {
    n: usize,
    m: DMatrix<f64>,
}

impl ShapeMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(Error::BadShape {
                rows,
                cols,
                expected: rows,
            });
        }
        check_dim(rows)?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "shape matrix entries".into(),
            });
        }
        let defect = util::amax(&(&m - m.transpose()));
        let tol = tol::SYMMETRY_REL * util::amax(&m);
        if defect > tol {
            return Err(Error::NotSymmetric { defect, tol });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { n: rows, m: sym })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        check_dim(diag.len())?;
        Ok(Self {
            n: diag.len(),
            m: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(diag)),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Eigenvalues in ascending order together with the matching orthonormal
    /// eigenvector columns.
    pub fn eigen(&self) -> (PrincipalCurvatures, DMatrix<f64>) {
        let eig = self.m.clone().symmetric_eigen();
        let n = self.n;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(i));
        }
        let curv = PrincipalCurvatures::new(values).expect("eigenvalues of a valid shape matrix");
        (curv, vectors)
    }

    pub fn curvatures(&self) -> PrincipalCurvatures {
        self.eigen().0
    }

    pub fn profile(&self) -> CurvatureProfile {
        self.curvatures().profile()
    }
}

/// Newton transformation `P_k` by the recursion `P_k = s_k I - S P_{k-1}`.
pub fn newton_matrix(shape: &ShapeMatrix, k: usize) -> Result<DMatrix<f64>> {
    let n = shape.dim();
    if k > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    let profile = shape.profile();
    let mut p = DMatrix::identity(n, n);
    for j in 1..=k {
        p = DMatrix::from_diagonal_element(n, n, profile.sigma(j)) - shape.matrix() * p;
    }
    Ok(p)
}

/// Newton transformation by the explicit sum
/// `P_k = Σ_{j=0..k} (-1)^j s_{k-j} S^j`; used to cross-check the recursion.
pub fn newton_matrix_sum(shape: &ShapeMatrix, k: usize) -> Result<DMatrix<f64>> {
    let n = shape.dim();
    if k > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    let profile = shape.profile();
    let mut p = DMatrix::zeros(n, n);
    let mut power = DMatrix::identity(n, n);
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        p += &power * (sign * profile.sigma(k - j));
        if j < k {
            power = shape.matrix() * power;
        }
    }
    Ok(p)
}

/// Eigenvalues `μ_{i,k} = σ_k(κ with κ_i removed)` of `P_k` on the eigenbasis
/// of the shape operator, ordered like `curv.values()`. They coincide with
/// the partial derivatives `∂σ_{k+1}/∂κ_i`.
pub fn newton_eigenvalues(curv: &PrincipalCurvatures, k: usize) -> Result<Vec<f64>> {
    let n = curv.dim();
    if k > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    let values = curv.values();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let reduced: Vec<f64> = values
            .iter()
            .enumerate()
            .filter_map(|(j, &v)| (j != i).then_some(v))
            .collect();
        let sig = elementary_symmetric(&reduced);
        out.push(if k < sig.len() { sig[k] } else { 0.0 });
    }
    Ok(out)
}

/// The three Newton traces along with their closed forms.
#[derive(Debug, Clone, Copy)]
pub struct TraceIdentities {
    pub k: usize,
    /// `tr(P_k)` computed from the recursion matrix.
    pub trace_pk: f64,
    /// `tr(S ∘ P_k)`.
    pub trace_s_pk: f64,
    /// `tr(S² ∘ P_k)`.
    pub trace_s2_pk: f64,
    /// Closed form `(n-k) s_k = c_k H_k`.
    pub closed_trace_pk: f64,
    /// Closed form `(k+1) s_{k+1} = c_k H_{k+1}`.
    pub closed_trace_s_pk: f64,
    /// Closed form `s_1 s_{k+1} - (k+2) s_{k+2}`.
    pub closed_trace_s2_pk: f64,
}

/// Traces of `P_k`, `S∘P_k`, `S²∘P_k` with their closed forms. Valid for
/// `k ≤ n`, with `s_{n+1} = s_{n+2} = 0` at the boundary.
pub fn trace_identities(shape: &ShapeMatrix, k: usize) -> Result<TraceIdentities> {
    let n = shape.dim();
    if k > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    let profile = shape.profile();
    let p = newton_matrix(shape, k)?;
    let sp = shape.matrix() * &p;
    let s2p = shape.matrix() * &sp;
    Ok(TraceIdentities {
        k,
        trace_pk: p.trace(),
        trace_s_pk: sp.trace(),
        trace_s2_pk: s2p.trace(),
        closed_trace_pk: (n - k) as f64 * profile.sigma(k),
        closed_trace_s_pk: (k + 1) as f64 * profile.sigma_ext(k + 1),
        closed_trace_s2_pk: profile.sigma(1) * profile.sigma_ext(k + 1)
            - (k + 2) as f64 * profile.sigma_ext(k + 2),
    })
}

/// Coefficients of the characteristic polynomial
/// `Q_S(t) = Σ_k (-1)^k s_k t^{n-k}`, leading coefficient first.
pub fn characteristic_polynomial(shape: &ShapeMatrix) -> Vec<f64> {
    let profile = shape.profile();
    (0..=shape.dim())
        .map(|k| if k % 2 == 0 { profile.sigma(k) } else { -profile.sigma(k) })
        .collect()
}

/// Horner evaluation of a polynomial given leading coefficient first.
pub fn eval_polynomial(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * t + c)
}

/// Residual of the scalar-curvature identity
/// `n(n-1)c + n²H_1² - tr(S²) = n(n-1)(c + H_2)`
/// for ambient curvature sign `c`. Zero up to rounding for every symmetric S;
/// the identity is what ties `H_2` to intrinsic scalar curvature.
pub fn scalar_curvature_check(shape: &ShapeMatrix, c: f64) -> f64 {
    let n = shape.dim() as f64;
    let profile = shape.profile();
    let tr_s2 = (shape.matrix() * shape.matrix()).trace();
    let lhs = n * (n - 1.0) * c + n * n * profile.h(1) * profile.h(1) - tr_s2;
    let rhs = n * (n - 1.0) * (c + profile.h(2));
    lhs - rhs
}
