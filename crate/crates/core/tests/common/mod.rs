//! Shared helpers for the integration suites: brute-force oracles for the
//! symmetric functions, random matrix generators and the catalog grid the
//! acceptance criteria run over.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use newtonlk::catalog::{AxisKind, ExampleFamily};

/// `σ_k` by literal subset enumeration; independent of the production
/// recurrence on purpose.
pub fn sigma_subsets(values: &[f64], k: usize) -> f64 {
    let n = values.len();
    assert!(n <= 20, "oracle is exponential");
    if k > n {
        return 0.0;
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut prod = 1.0;
        for (i, v) in values.iter().enumerate() {
            if mask & (1 << i) != 0 {
                prod *= v;
            }
        }
        total += prod;
    }
    total
}

/// `μ_{i,k} = σ_k` of the list with entry `i` removed, again by subsets.
pub fn mu_subsets(values: &[f64], i: usize, k: usize) -> f64 {
    let reduced: Vec<f64> = values
        .iter()
        .enumerate()
        .filter_map(|(j, &v)| (j != i).then_some(v))
        .collect();
    sigma_subsets(&reduced, k)
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    0.5 * (&raw + raw.transpose())
}

/// Proper rotation of Euclidean `R^d` from the QR of a random matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let q = raw.qr().q();
    q
}

/// Matrix exponential by scaling and squaring with a Taylor tail; fine for
/// the moderate norms used in tests.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = m.amax() * m.nrows() as f64;
    let s = norm.log2().ceil().max(0.0) as u32 + 1;
    let t = m / 2f64.powi(s as i32);
    let dim = m.nrows();
    let mut term = DMatrix::identity(dim, dim);
    let mut sum = DMatrix::identity(dim, dim);
    for j in 1..=20 {
        term = &term * &t / j as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Isometry of the Lorentz metric `G = diag(-1,1,..,1)` preserving the
/// upper hyperboloid sheet: `exp(G Ω)` with `Ω` antisymmetric and small.
/// `(GΩ)ᵀ G = -G (GΩ)`, so the exponential satisfies `Rᵀ G R = G`, and the
/// small generator keeps it in the identity component.
pub fn random_lorentz(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(d, d, |_, _| rng.random_range(-0.25..0.25));
    let omega = &raw - raw.transpose();
    let mut generator = omega;
    {
        let negated = -generator.row(0);
        generator.set_row(0, &negated);
    }
    expm(&generator)
}

/// The family grid the acceptance criteria quantify over: spherical caps at
/// three heights, the three hyperbolic axis types, and the product list for
/// both ambient signs.
pub fn catalog_grid() -> Vec<ExampleFamily> {
    let mut grid = vec![
        ExampleFamily::umbilic_sphere_cap(2, 0.0).unwrap(),
        ExampleFamily::umbilic_sphere_cap(2, 0.5).unwrap(),
        ExampleFamily::umbilic_sphere_cap(2, 0.9).unwrap(),
        ExampleFamily::umbilic_hyperbolic(2, AxisKind::Spacelike, 0.8).unwrap(),
        ExampleFamily::umbilic_hyperbolic(2, AxisKind::Timelike, -1.6).unwrap(),
        ExampleFamily::umbilic_hyperbolic(2, AxisKind::Lightlike, 0.9).unwrap(),
        ExampleFamily::riemannian_product(2, 1, std::f64::consts::FRAC_1_SQRT_2, 1).unwrap(),
        ExampleFamily::riemannian_product(3, 1, 0.6, 1).unwrap(),
        ExampleFamily::riemannian_product(3, 2, 0.6, 1).unwrap(),
    ];
    for (n, m) in [(2, 1), (3, 1), (3, 2)] {
        for r in [0.5, 1.0] {
            grid.push(ExampleFamily::riemannian_product(n, m, r, -1).unwrap());
        }
    }
    grid
}

/// Totally geodesic configurations for the classification criterion.
pub fn geodesic_grid() -> Vec<ExampleFamily> {
    vec![
        ExampleFamily::zero_hk1(2, 1).unwrap(),
        ExampleFamily::zero_hk1(3, 1).unwrap(),
        ExampleFamily::zero_hk1(2, -1).unwrap(),
        ExampleFamily::zero_hk1(3, -1).unwrap(),
    ]
}
