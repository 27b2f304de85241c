//! Model hypersurface families with closed-form curvature data.
//!
//! Four kinds are provided, all carrying constants `(A, b)` such that the
//! position vector satisfies `L_k x = A x + b`:
//!
//! * totally geodesic slices (the degenerate case `H_{k+1} = 0` with `H_k`
//!   constant),
//! * umbilic caps `{<a,x> = τ}` in the sphere,
//! * umbilic slices `{<a,x> = τ}` in hyperbolic space, one per causal type
//!   of the axis `a` (spacelike, timelike, lightlike),
//! * standard products `{x_{m+1}² + .. + x_{n+1}² = r²}`, spheres over
//!   spheres or over hyperbolic factors.
//!
//! Charts use spherical / hyperbolic-polar coordinates built from products
//! of `sin/cos/sinh/cosh` factors, so first and second derivatives are
//! available in closed form; the horosphere case (lightlike axis) is a
//! quadratic graph chart.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chart::{AmbientSpace, Chart, SecondDerivatives, SpaceForm, Surface};
use crate::error::{Error, Result};
use crate::symfun;

// ─────────────────────────── factor-product maps ───────────────────────────

#[derive(Debug, Clone, Copy)]
enum Trig {
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Trig {
    fn val(self, t: f64) -> f64 {
        match self {
            Trig::Sin => t.sin(),
            Trig::Cos => t.cos(),
            Trig::Sinh => t.sinh(),
            Trig::Cosh => t.cosh(),
        }
    }

    fn d1(self, t: f64) -> f64 {
        match self {
            Trig::Sin => t.cos(),
            Trig::Cos => -t.sin(),
            Trig::Sinh => t.cosh(),
            Trig::Cosh => t.sinh(),
        }
    }

    fn d2(self, t: f64) -> f64 {
        match self {
            Trig::Sin => -t.sin(),
            Trig::Cos => -t.cos(),
            Trig::Sinh => t.sinh(),
            Trig::Cosh => t.cosh(),
        }
    }
}

/// A map `R^d -> R^{d+1}` whose components are products of univariate
/// sin/cos/sinh/cosh factors, each variable appearing at most once per
/// component. Covers polar coordinates on `S^d` and on `H^d` and
/// differentiates exactly.
#[derive(Debug, Clone)]
struct FactorMap {
    in_dim: usize,
    comps: Vec<Vec<(usize, Trig)>>,
}

impl FactorMap {
    /// Polar coordinates on the unit sphere `S^d`:
    /// `σ_j = sin u_1 ... sin u_j cos u_{j+1}` (last component all sines).
    fn sphere(d: usize) -> Self {
        let mut comps = Vec::with_capacity(d + 1);
        for j in 0..=d {
            let mut factors: Vec<(usize, Trig)> = (0..j).map(|t| (t, Trig::Sin)).collect();
            if j < d {
                factors.push((j, Trig::Cos));
            }
            comps.push(factors);
        }
        Self { in_dim: d, comps }
    }

    /// Polar coordinates on the upper hyperboloid sheet `H^d`:
    /// `η_0 = cosh u_1`, spatial part `sinh u_1` times a sphere map.
    fn hyperbolic(d: usize) -> Self {
        assert!(d >= 1);
        let inner = Self::sphere(d - 1);
        let mut comps = vec![vec![(0, Trig::Cosh)]];
        for factors in inner.comps {
            let mut shifted = vec![(0, Trig::Sinh)];
            shifted.extend(factors.into_iter().map(|(v, t)| (v + 1, t)));
            comps.push(shifted);
        }
        Self { in_dim: d, comps }
    }

    fn out_dim(&self) -> usize {
        self.comps.len()
    }

    fn component(&self, u: &[f64], j: usize) -> f64 {
        self.comps[j]
            .iter()
            .fold(1.0, |acc, &(v, t)| acc * t.val(u[v]))
    }

    fn partial(&self, u: &[f64], j: usize, i: usize) -> f64 {
        if !self.comps[j].iter().any(|&(v, _)| v == i) {
            return 0.0;
        }
        self.comps[j].iter().fold(1.0, |acc, &(v, t)| {
            acc * if v == i { t.d1(u[v]) } else { t.val(u[v]) }
        })
    }

    fn second(&self, u: &[f64], j: usize, i: usize, l: usize) -> f64 {
        let has = |var: usize| self.comps[j].iter().any(|&(v, _)| v == var);
        if !has(i) || !has(l) {
            return 0.0;
        }
        self.comps[j].iter().fold(1.0, |acc, &(v, t)| {
            let f = if i == l && v == i {
                t.d2(u[v])
            } else if v == i || v == l {
                t.d1(u[v])
            } else {
                t.val(u[v])
            };
            acc * f
        })
    }
}

// ─────────────────────────────── surfaces ───────────────────────────────

#[derive(Debug, Clone)]
enum Hint {
    /// `axis + coef * x`, the unnormalized normal of the umbilic families.
    Affine { axis: DVector<f64>, coef: f64 },
    /// Blockwise rescaling of `x`, the unnormalized product normal.
    Blockwise { split: usize, first: f64, second: f64 },
}

#[derive(Debug, Clone)]
struct ScaledBlock {
    map: FactorMap,
    scale: f64,
    row0: usize,
    var0: usize,
}

/// Position made of scaled factor-map blocks plus fixed coordinates.
struct BlockSurface {
    space: AmbientSpace,
    blocks: Vec<ScaledBlock>,
    fixed: Vec<(usize, f64)>,
    hint: Hint,
}

impl BlockSurface {
    fn block_of(&self, var: usize) -> &ScaledBlock {
        self.blocks
            .iter()
            .find(|b| (b.var0..b.var0 + b.map.in_dim).contains(&var))
            .expect("variable belongs to some block")
    }
}

impl Surface for BlockSurface {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn space(&self) -> AmbientSpace {
        self.space
    }

    fn position(&self, u: &[f64]) -> DVector<f64> {
        let mut x = DVector::zeros(self.space.ambient_dim());
        for b in &self.blocks {
            let local = &u[b.var0..b.var0 + b.map.in_dim];
            for j in 0..b.map.out_dim() {
                x[b.row0 + j] = b.scale * b.map.component(local, j);
            }
        }
        for &(row, v) in &self.fixed {
            x[row] = v;
        }
        x
    }

    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(self.space.ambient_dim(), self.dim());
        for b in &self.blocks {
            let local = &u[b.var0..b.var0 + b.map.in_dim];
            for i in 0..b.map.in_dim {
                for j in 0..b.map.out_dim() {
                    jac[(b.row0 + j, b.var0 + i)] = b.scale * b.map.partial(local, j, i);
                }
            }
        }
        Some(jac)
    }

    fn second_derivatives(&self, u: &[f64]) -> Option<SecondDerivatives> {
        let d = self.space.ambient_dim();
        Some(SecondDerivatives::build(self.dim(), |gi, gj| {
            let b = self.block_of(gi);
            let mut col = DVector::zeros(d);
            if (b.var0..b.var0 + b.map.in_dim).contains(&gj) {
                let local = &u[b.var0..b.var0 + b.map.in_dim];
                for j in 0..b.map.out_dim() {
                    col[b.row0 + j] = b.scale * b.map.second(local, j, gi - b.var0, gj - b.var0);
                }
            }
            col
        }))
    }

    fn orientation_hint(&self, _u: &[f64], x: &DVector<f64>) -> DVector<f64> {
        match &self.hint {
            Hint::Affine { axis, coef } => axis + x * *coef,
            Hint::Blockwise {
                split,
                first,
                second,
            } => DVector::from_fn(x.len(), |i, _| {
                if i < *split {
                    first * x[i]
                } else {
                    second * x[i]
                }
            }),
        }
    }
}

/// Horosphere `{<a,x> = τ}` for a lightlike axis, as a quadratic graph over
/// the flat factor `R^n`.
struct HorosphereSurface {
    space: AmbientSpace,
    /// `sτ` where `s = ±1` is the sign baked into the axis; always negative.
    tau_eff: f64,
    axis: DVector<f64>,
    tau: f64,
}

impl Surface for HorosphereSurface {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn space(&self) -> AmbientSpace {
        self.space
    }

    fn position(&self, u: &[f64]) -> DVector<f64> {
        let d = self.space.ambient_dim();
        let y2: f64 = u.iter().map(|y| y * y).sum();
        let v = (1.0 + y2) / (-self.tau_eff);
        let mut x = DVector::zeros(d);
        x[0] = 0.5 * (v - self.tau_eff);
        for (i, &y) in u.iter().enumerate() {
            x[i + 1] = y;
        }
        x[d - 1] = 0.5 * (v + self.tau_eff);
        x
    }

    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        let d = self.space.ambient_dim();
        let n = self.dim();
        let mut jac = DMatrix::zeros(d, n);
        for i in 0..n {
            let dv = u[i] / (-self.tau_eff);
            jac[(0, i)] = dv;
            jac[(i + 1, i)] = 1.0;
            jac[(d - 1, i)] = dv;
        }
        Some(jac)
    }

    fn second_derivatives(&self, _u: &[f64]) -> Option<SecondDerivatives> {
        let d = self.space.ambient_dim();
        Some(SecondDerivatives::build(self.dim(), |i, j| {
            let mut col = DVector::zeros(d);
            if i == j {
                let dvv = 1.0 / (-self.tau_eff);
                col[0] = dvv;
                col[d - 1] = dvv;
            }
            col
        }))
    }

    fn orientation_hint(&self, _u: &[f64], x: &DVector<f64>) -> DVector<f64> {
        &self.axis + x * self.tau
    }
}

// ─────────────────────────────── families ───────────────────────────────

/// Causal type of the axis of a hyperbolic umbilic slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Spacelike,
    Timelike,
    Lightlike,
}

impl AxisKind {
    /// `<a,a>` for a representative axis of this kind.
    pub fn norm(self) -> f64 {
        match self {
            AxisKind::Spacelike => 1.0,
            AxisKind::Timelike => -1.0,
            AxisKind::Lightlike => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// Totally geodesic slice: `H_j = 0` for every `j >= 1`.
    ZeroHk1,
    /// `{<a,x> = τ}` in the sphere, `|τ| < 1`.
    UmbilicSphereCap { tau: f64 },
    /// `{<a,x> = τ}` in hyperbolic space.
    UmbilicHyperbolic { axis: AxisKind, tau: f64 },
    /// `{x_{m+1}² + .. + x_{n+1}² = r²}`.
    RiemannianProduct { m: usize, radius: f64 },
}

/// The predicted affine data of a family: `L_k x = A x + b` on the nose.
#[derive(Debug, Clone)]
pub struct PredictedAffine {
    pub a_matrix: DMatrix<f64>,
    pub b_vector: DVector<f64>,
}

/// One model family in a fixed ambient space.
#[derive(Debug, Clone)]
pub struct ExampleFamily {
    space: AmbientSpace,
    kind: FamilyKind,
}

impl ExampleFamily {
    /// Totally geodesic slice of the given space form.
    pub fn zero_hk1(n: usize, c: i32) -> Result<Self> {
        Ok(Self {
            space: AmbientSpace::from_sign(n, c)?,
            kind: FamilyKind::ZeroHk1,
        })
    }

    /// Umbilic cap `{<a,x> = τ}` in `S^{n+1}` with axis `a = e_{n+1}`.
    pub fn umbilic_sphere_cap(n: usize, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau.abs() < 1.0) {
            return Err(Error::Inadmissible(format!(
                "spherical cap requires |tau| < 1, got {tau}"
            )));
        }
        Ok(Self {
            space: AmbientSpace::sphere(n)?,
            kind: FamilyKind::UmbilicSphereCap { tau },
        })
    }

    /// Umbilic slice `{<a,x> = τ}` in `H^{n+1}`. Requires `<a,a> + τ² > 0`:
    /// any `τ` for a spacelike axis, `|τ| > 1` for timelike, `τ != 0` for
    /// lightlike.
    pub fn umbilic_hyperbolic(n: usize, axis: AxisKind, tau: f64) -> Result<Self> {
        if !tau.is_finite() || axis.norm() + tau * tau <= 0.0 {
            return Err(Error::Inadmissible(format!(
                "hyperbolic slice requires <a,a> + tau^2 > 0, got <a,a>={}, tau={tau}",
                axis.norm()
            )));
        }
        Ok(Self {
            space: AmbientSpace::hyperbolic(n)?,
            kind: FamilyKind::UmbilicHyperbolic { axis, tau },
        })
    }

    /// Standard product `{x_{m+1}² + .. + x_{n+1}² = r²}` with `1 <= m < n`;
    /// `0 < r < 1` in the sphere, any `r > 0` in hyperbolic space.
    pub fn riemannian_product(n: usize, m: usize, radius: f64, c: i32) -> Result<Self> {
        let space = AmbientSpace::from_sign(n, c)?;
        if m < 1 || m >= n {
            return Err(Error::Inadmissible(format!(
                "product splitting requires 1 <= m < n, got m={m}, n={n}"
            )));
        }
        let ok = match space.form() {
            SpaceForm::Sphere => radius > 0.0 && radius < 1.0,
            SpaceForm::Hyperbolic => radius > 0.0,
        };
        if !(radius.is_finite() && ok) {
            return Err(Error::Inadmissible(format!(
                "product radius {radius} out of range for c={c}"
            )));
        }
        Ok(Self {
            space,
            kind: FamilyKind::RiemannianProduct { m, radius },
        })
    }

    pub fn n(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> AmbientSpace {
        self.space
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// Stable machine name used by the CLI and reports.
    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::ZeroHk1 => "zero_hk1",
            FamilyKind::UmbilicSphereCap { .. } => "umbilic_sphere_cap",
            FamilyKind::UmbilicHyperbolic { .. } => "umbilic_hyperbolic",
            FamilyKind::RiemannianProduct { .. } => "riemannian_product",
        }
    }

    /// `L_k` is defined for `k = 0..n-1`.
    pub fn check_order(&self, k: usize) -> Result<()> {
        if k + 1 > self.n() {
            return Err(Error::OrderOutOfRange { k, n: self.n() });
        }
        Ok(())
    }

    /// The axis vector `a` of the slice families. The sign convention keeps
    /// the slice on the upper hyperboloid sheet: for timelike and lightlike
    /// axes the representative is flipped when `τ > 0`.
    pub fn axis(&self) -> Option<DVector<f64>> {
        let d = self.space.ambient_dim();
        match &self.kind {
            FamilyKind::ZeroHk1 => {
                let mut a = DVector::zeros(d);
                a[d - 1] = 1.0;
                Some(a)
            }
            FamilyKind::UmbilicSphereCap { .. } => {
                let mut a = DVector::zeros(d);
                a[d - 1] = 1.0;
                Some(a)
            }
            FamilyKind::UmbilicHyperbolic { axis, tau } => {
                let mut a = DVector::zeros(d);
                match axis {
                    AxisKind::Spacelike => a[d - 1] = 1.0,
                    AxisKind::Timelike => a[0] = if *tau > 0.0 { -1.0 } else { 1.0 },
                    AxisKind::Lightlike => {
                        let s = if *tau > 0.0 { -1.0 } else { 1.0 };
                        a[0] = s;
                        a[d - 1] = s;
                    }
                }
                Some(a)
            }
            FamilyKind::RiemannianProduct { .. } => None,
        }
    }

    /// Constant principal curvatures of the family, in block order (not
    /// sorted).
    pub fn predicted_curvatures(&self) -> Vec<f64> {
        let n = self.n();
        match &self.kind {
            FamilyKind::ZeroHk1 => vec![0.0; n],
            FamilyKind::UmbilicSphereCap { tau } => {
                vec![tau / (1.0 - tau * tau).sqrt(); n]
            }
            FamilyKind::UmbilicHyperbolic { axis, tau } => {
                let omega = (axis.norm() + tau * tau).sqrt();
                vec![-tau / omega; n]
            }
            FamilyKind::RiemannianProduct { m, radius } => {
                let c = self.space.curvature_sign();
                let s = (1.0 - c * radius * radius).sqrt();
                let first = c * radius / s;
                let second = -s / radius;
                let mut k = vec![first; *m];
                k.extend(std::iter::repeat(second).take(n - m));
                k
            }
        }
    }

    /// Closed-form `H_k`.
    pub fn predicted_hk(&self, k: usize) -> Result<f64> {
        if k > self.n() {
            return Err(Error::OrderOutOfRange { k, n: self.n() });
        }
        Ok(match &self.kind {
            FamilyKind::ZeroHk1 => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            FamilyKind::UmbilicSphereCap { tau } => {
                tau.powi(k as i32) / (1.0 - tau * tau).powf(k as f64 / 2.0)
            }
            FamilyKind::UmbilicHyperbolic { axis, tau } => {
                let omega = (axis.norm() + tau * tau).sqrt();
                (-tau / omega).powi(k as i32)
            }
            FamilyKind::RiemannianProduct { .. } => {
                symfun::mean_curvatures(&self.predicted_curvatures())[k]
            }
        })
    }

    /// The constants of `L_k x = A x + b` for this family.
    pub fn predicted_affine(&self, k: usize) -> Result<PredictedAffine> {
        self.check_order(k)?;
        let n = self.n();
        let d = self.space.ambient_dim();
        let c = self.space.curvature_sign();
        let ck = symfun::newton_trace_coefficient(n, k);
        Ok(match &self.kind {
            FamilyKind::ZeroHk1 => {
                let hk = if k == 0 { 1.0 } else { 0.0 };
                PredictedAffine {
                    a_matrix: DMatrix::identity(d, d) * (-c * ck * hk),
                    b_vector: DVector::zeros(d),
                }
            }
            FamilyKind::UmbilicSphereCap { tau } => {
                let w = 1.0 - tau * tau;
                let scale = ck * tau.powi(k as i32) / w.powf((k as f64 + 2.0) / 2.0);
                let b_scale = ck * tau.powi(k as i32 + 1) / w.powf((k as f64 + 2.0) / 2.0);
                PredictedAffine {
                    a_matrix: DMatrix::identity(d, d) * (-scale),
                    b_vector: self.axis().unwrap() * b_scale,
                }
            }
            FamilyKind::UmbilicHyperbolic { axis, tau } => {
                let a_norm = axis.norm();
                let omega2 = a_norm + tau * tau;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let a_scale =
                    sign * ck * a_norm * tau.powi(k as i32) / omega2.powf((k as f64 + 2.0) / 2.0);
                let b_scale =
                    -sign * ck * tau.powi(k as i32 + 1) / omega2.powf((k as f64 + 2.0) / 2.0);
                PredictedAffine {
                    a_matrix: DMatrix::identity(d, d) * a_scale,
                    b_vector: self.axis().unwrap() * b_scale,
                }
            }
            FamilyKind::RiemannianProduct { m, radius } => {
                let profile = symfun::PrincipalCurvatures::new(self.predicted_curvatures())?
                    .profile();
                let (hk, hk1) = (profile.h(k), profile.h_ext(k + 1));
                let s = (1.0 - c * radius * radius).sqrt();
                let lambda = -c * ck * hk1 * radius / s - c * ck * hk;
                let mu = ck * hk1 * s / radius - c * ck * hk;
                let mut a_matrix = DMatrix::zeros(d, d);
                for i in 0..d {
                    a_matrix[(i, i)] = if i <= *m { lambda } else { mu };
                }
                PredictedAffine {
                    a_matrix,
                    b_vector: DVector::zeros(d),
                }
            }
        })
    }

    /// Chart with closed-form derivatives covering the sampling box.
    pub fn chart(&self) -> Chart {
        let n = self.n();
        let surface: Arc<dyn Surface> = match &self.kind {
            FamilyKind::ZeroHk1 => match self.space.form() {
                SpaceForm::Sphere => Arc::new(cap_surface(self.space, 0.0)),
                SpaceForm::Hyperbolic => Arc::new(spacelike_slice_surface(self.space, 0.0)),
            },
            FamilyKind::UmbilicSphereCap { tau } => Arc::new(cap_surface(self.space, *tau)),
            FamilyKind::UmbilicHyperbolic { axis, tau } => match axis {
                AxisKind::Spacelike => Arc::new(spacelike_slice_surface(self.space, *tau)),
                AxisKind::Timelike => {
                    let omega = (tau * tau - 1.0).sqrt();
                    Arc::new(BlockSurface {
                        space: self.space,
                        blocks: vec![ScaledBlock {
                            map: FactorMap::sphere(n),
                            scale: omega,
                            row0: 1,
                            var0: 0,
                        }],
                        fixed: vec![(0, tau.abs())],
                        hint: Hint::Affine {
                            axis: self.axis().unwrap(),
                            coef: *tau,
                        },
                    })
                }
                AxisKind::Lightlike => {
                    let s = if *tau > 0.0 { -1.0 } else { 1.0 };
                    Arc::new(HorosphereSurface {
                        space: self.space,
                        tau_eff: s * tau,
                        axis: self.axis().unwrap(),
                        tau: *tau,
                    })
                }
            },
            FamilyKind::RiemannianProduct { m, radius } => {
                let c = self.space.curvature_sign();
                let s = (1.0 - c * radius * radius).sqrt();
                let first_map = match self.space.form() {
                    SpaceForm::Sphere => FactorMap::sphere(*m),
                    SpaceForm::Hyperbolic => FactorMap::hyperbolic(*m),
                };
                Arc::new(BlockSurface {
                    space: self.space,
                    blocks: vec![
                        ScaledBlock {
                            map: first_map,
                            scale: s,
                            row0: 0,
                            var0: 0,
                        },
                        ScaledBlock {
                            map: FactorMap::sphere(n - m),
                            scale: *radius,
                            row0: m + 1,
                            var0: *m,
                        },
                    ],
                    fixed: vec![],
                    hint: Hint::Blockwise {
                        split: m + 1,
                        first: -c * radius / s,
                        second: s / radius,
                    },
                })
            }
        };
        Chart::new(surface)
    }

    /// Coordinate box the family is sampled from. Polar charts stay away
    /// from their axis singularities; the horosphere graph is sampled
    /// around the origin.
    pub fn sample_box(&self) -> Vec<(f64, f64)> {
        let n = self.n();
        match &self.kind {
            FamilyKind::UmbilicHyperbolic {
                axis: AxisKind::Lightlike,
                ..
            } => vec![(-0.8, 0.8); n],
            _ => vec![(0.4, 1.2); n],
        }
    }

    /// Deterministic sample of chart coordinates.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let box_ = self.sample_box();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                box_.iter()
                    .map(|&(lo, hi)| rng.random_range(lo..hi))
                    .collect()
            })
            .collect()
    }
}

fn cap_surface(space: AmbientSpace, tau: f64) -> BlockSurface {
    let n = space.dim();
    let d = space.ambient_dim();
    let mut axis = DVector::zeros(d);
    axis[d - 1] = 1.0;
    BlockSurface {
        space,
        blocks: vec![ScaledBlock {
            map: FactorMap::sphere(n),
            scale: (1.0 - tau * tau).sqrt(),
            row0: 0,
            var0: 0,
        }],
        fixed: vec![(d - 1, tau)],
        hint: Hint::Affine { axis, coef: -tau },
    }
}

fn spacelike_slice_surface(space: AmbientSpace, tau: f64) -> BlockSurface {
    let n = space.dim();
    let d = space.ambient_dim();
    let mut axis = DVector::zeros(d);
    axis[d - 1] = 1.0;
    BlockSurface {
        space,
        blocks: vec![ScaledBlock {
            map: FactorMap::hyperbolic(n),
            scale: (1.0 + tau * tau).sqrt(),
            row0: 0,
            var0: 0,
        }],
        fixed: vec![(d - 1, tau)],
        hint: Hint::Affine { axis, coef: tau },
    }
}

// ───────────────────────── slice classification ─────────────────────────

/// Intrinsic type of the slice `{<a,x> = τ}` of hyperbolic space, by causal
/// type of the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceType {
    /// Spacelike axis: a copy of `H^n` of radius `sqrt(1+τ²)`.
    HyperbolicSpace { radius: f64 },
    /// Timelike axis: a round sphere of radius `sqrt(τ²-1)`.
    Sphere { radius: f64 },
    /// Lightlike axis: a horosphere, flat `R^n`.
    EuclideanSpace,
}

impl std::fmt::Display for SliceType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SliceType::HyperbolicSpace { radius } => write!(f, "H^n(-{radius})"),
            SliceType::Sphere { radius } => write!(f, "S^n({radius})"),
            SliceType::EuclideanSpace => write!(f, "R^n"),
        }
    }
}

/// Classify the slice of `H^{n+1}` cut by `{<a,x> = τ}` from the causal norm
/// `<a,a> ∈ {1, 0, -1}` of the axis. Admissible when `<a,a> + τ² > 0`.
pub fn hyperbolic_slice_type(axis_norm: f64, tau: f64) -> Result<SliceType> {
    if ![1.0, 0.0, -1.0].contains(&axis_norm) {
        return Err(Error::Inadmissible(format!(
            "axis norm must be one of 1, 0, -1, got {axis_norm}"
        )));
    }
    if !tau.is_finite() || axis_norm + tau * tau <= 0.0 {
        return Err(Error::Inadmissible(format!(
            "slice requires <a,a> + tau^2 > 0, got <a,a>={axis_norm}, tau={tau}"
        )));
    }
    Ok(if axis_norm > 0.0 {
        SliceType::HyperbolicSpace {
            radius: (1.0 + tau * tau).sqrt(),
        }
    } else if axis_norm < 0.0 {
        SliceType::Sphere {
            radius: (tau * tau - 1.0).sqrt(),
        }
    } else {
        SliceType::EuclideanSpace
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn factor_map_matches_explicit_sphere() {
        let map = FactorMap::sphere(2);
        let u = [0.7, 1.1];
        assert_abs_diff_eq!(map.component(&u, 0), u[0].cos());
        assert_abs_diff_eq!(map.component(&u, 1), u[0].sin() * u[1].cos());
        assert_abs_diff_eq!(map.component(&u, 2), u[0].sin() * u[1].sin());
        // unit norm
        let norm2: f64 = (0..3).map(|j| map.component(&u, j).powi(2)).sum();
        assert_abs_diff_eq!(norm2, 1.0, epsilon = 1e-15);
        // a couple of exact partials
        assert_abs_diff_eq!(map.partial(&u, 1, 0), u[0].cos() * u[1].cos());
        assert_abs_diff_eq!(map.partial(&u, 1, 1), -u[0].sin() * u[1].sin());
        assert_abs_diff_eq!(map.second(&u, 2, 0, 1), u[0].cos() * u[1].cos());
        assert_abs_diff_eq!(map.second(&u, 0, 0, 0), -u[0].cos());
    }

    #[test]
    fn factor_map_hyperbolic_stays_on_sheet() {
        let map = FactorMap::hyperbolic(3);
        let u = [0.9, 0.6, 1.0];
        let eta: Vec<f64> = (0..4).map(|j| map.component(&u, j)).collect();
        let lorentz: f64 = -eta[0] * eta[0] + eta[1..].iter().map(|v| v * v).sum::<f64>();
        assert_abs_diff_eq!(lorentz, -1.0, epsilon = 1e-14);
        assert!(eta[0] >= 1.0);
    }

    #[test]
    fn all_family_charts_satisfy_the_quadric_constraint() {
        let families = vec![
            ExampleFamily::zero_hk1(3, 1).unwrap(),
            ExampleFamily::zero_hk1(3, -1).unwrap(),
            ExampleFamily::umbilic_sphere_cap(3, 0.5).unwrap(),
            ExampleFamily::umbilic_hyperbolic(3, AxisKind::Spacelike, 0.8).unwrap(),
            ExampleFamily::umbilic_hyperbolic(3, AxisKind::Timelike, -1.7).unwrap(),
            ExampleFamily::umbilic_hyperbolic(3, AxisKind::Timelike, 2.3).unwrap(),
            ExampleFamily::umbilic_hyperbolic(3, AxisKind::Lightlike, -0.7).unwrap(),
            ExampleFamily::umbilic_hyperbolic(3, AxisKind::Lightlike, 1.3).unwrap(),
            ExampleFamily::riemannian_product(3, 1, 0.6, 1).unwrap(),
            ExampleFamily::riemannian_product(3, 2, 0.7, -1).unwrap(),
        ];
        for fam in families {
            let chart = fam.chart();
            for u in fam.sample_points(5, 7) {
                let x = chart.position(&u).expect("on-manifold position");
                // slice families also satisfy <a,x> = tau
                if let Some(a) = fam.axis() {
                    let tau = match fam.kind() {
                        FamilyKind::ZeroHk1 => 0.0,
                        FamilyKind::UmbilicSphereCap { tau } => *tau,
                        FamilyKind::UmbilicHyperbolic { tau, .. } => *tau,
                        FamilyKind::RiemannianProduct { .. } => unreachable!(),
                    };
                    assert_abs_diff_eq!(fam.space().inner(&a, &x), tau, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn cap_curvatures_match_frame() {
        let fam = ExampleFamily::umbilic_sphere_cap(2, 0.5).unwrap();
        let chart = fam.chart();
        let frame = chart.frame(&[0.8, 0.6]).unwrap();
        let expected = 0.5 / 0.75_f64.sqrt();
        for &k in frame.curvatures.values() {
            assert_abs_diff_eq!(k, expected, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(fam.predicted_hk(1).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(fam.predicted_hk(2).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn hyperbolic_umbilic_curvatures_match_frames() {
        for (axis, tau) in [
            (AxisKind::Spacelike, 0.9),
            (AxisKind::Spacelike, -0.4),
            (AxisKind::Timelike, -2.0),
            (AxisKind::Timelike, 1.5),
            (AxisKind::Lightlike, -0.8),
            (AxisKind::Lightlike, 0.6),
        ] {
            let fam = ExampleFamily::umbilic_hyperbolic(2, axis, tau).unwrap();
            let chart = fam.chart();
            let u = fam.sample_points(1, 3)[0].clone();
            let frame = chart.frame(&u).unwrap();
            let expected = -tau / (axis.norm() + tau * tau).sqrt();
            for &k in frame.curvatures.values() {
                assert_abs_diff_eq!(k, expected, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn product_curvatures_match_frames() {
        let fam = ExampleFamily::riemannian_product(3, 1, 0.6, 1).unwrap();
        let chart = fam.chart();
        let frame = chart.frame(&[0.7, 0.9, 1.1]).unwrap();
        let mut predicted = fam.predicted_curvatures();
        predicted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in frame.curvatures.values().iter().zip(&predicted) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn clifford_constants() {
        let r = 0.5_f64.sqrt();
        let fam = ExampleFamily::riemannian_product(2, 1, r, 1).unwrap();
        let mut kappa = fam.predicted_curvatures();
        kappa.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(kappa[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kappa[1], 1.0, epsilon = 1e-12);
        let affine = fam.predicted_affine(0).unwrap();
        assert!(crate::util::amax(
            &(&affine.a_matrix + DMatrix::<f64>::identity(4, 4) * 2.0)
        ) < 1e-12);
        assert_eq!(affine.b_vector.amax(), 0.0);
    }

    #[test]
    fn cap_affine_anchor() {
        let fam = ExampleFamily::umbilic_sphere_cap(2, 0.5).unwrap();
        let affine = fam.predicted_affine(0).unwrap();
        let expected = -8.0 / 3.0;
        for i in 0..4 {
            assert_abs_diff_eq!(affine.a_matrix[(i, i)], expected, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(affine.b_vector[3], 4.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn spacelike_slice_h1_anchor() {
        let fam = ExampleFamily::umbilic_hyperbolic(3, AxisKind::Spacelike, 1.0).unwrap();
        assert_abs_diff_eq!(
            fam.predicted_hk(1).unwrap(),
            -1.0 / 2.0_f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn lightlike_predicted_a_vanishes() {
        let fam = ExampleFamily::umbilic_hyperbolic(2, AxisKind::Lightlike, -0.7).unwrap();
        let affine = fam.predicted_affine(1).unwrap();
        assert_eq!(crate::util::amax(&affine.a_matrix), 0.0);
        assert!(affine.b_vector.amax() > 0.0);
    }

    #[test]
    fn admissibility_is_enforced() {
        assert!(ExampleFamily::umbilic_sphere_cap(2, 1.0).is_err());
        assert!(ExampleFamily::umbilic_hyperbolic(2, AxisKind::Timelike, 0.5).is_err());
        assert!(ExampleFamily::umbilic_hyperbolic(2, AxisKind::Lightlike, 0.0).is_err());
        assert!(ExampleFamily::riemannian_product(3, 0, 0.5, 1).is_err());
        assert!(ExampleFamily::riemannian_product(3, 3, 0.5, 1).is_err());
        assert!(ExampleFamily::riemannian_product(3, 1, 1.0, 1).is_err());
        assert!(ExampleFamily::riemannian_product(3, 1, 2.0, -1).is_ok());
    }

    #[test]
    fn slice_classification_table() {
        match hyperbolic_slice_type(1.0, 1.0).unwrap() {
            SliceType::HyperbolicSpace { radius } => {
                assert_abs_diff_eq!(radius, 2.0_f64.sqrt(), epsilon = 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
        match hyperbolic_slice_type(-1.0, 2.0).unwrap() {
            SliceType::Sphere { radius } => {
                assert_abs_diff_eq!(radius, 3.0_f64.sqrt(), epsilon = 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            hyperbolic_slice_type(0.0, 5.0).unwrap(),
            SliceType::EuclideanSpace
        );
        assert!(hyperbolic_slice_type(-1.0, 0.5).is_err());
        assert!(hyperbolic_slice_type(0.0, 0.0).is_err());
        assert!(hyperbolic_slice_type(0.5, 1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let fam = ExampleFamily::umbilic_sphere_cap(3, 0.5).unwrap();
        assert_eq!(fam.sample_points(10, 99), fam.sample_points(10, 99));
        assert_ne!(fam.sample_points(10, 99), fam.sample_points(10, 100));
    }
}
