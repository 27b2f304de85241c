//! Central-difference stencils with one Richardson extrapolation level.
//!
//! Everything works on vector-valued maps `R^n -> R^d`; scalar callers wrap
//! their function in a length-1 vector. First derivatives combine the
//! two-point stencil at steps `h` and `h/2` as `(4 D_{h/2} - D_h) / 3`,
//! second derivatives do the same with the three/four-point stencils, which
//! cancels the leading `h²` truncation term in both cases.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tol;

/// Step used for first derivatives at `u`.
pub fn first_step(u: &[f64]) -> f64 {
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    tol::STEP_FIRST * norm.max(1.0)
}

/// Step used for second derivatives at `u`.
pub fn second_step(u: &[f64]) -> f64 {
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    tol::STEP_SECOND * norm.max(1.0)
}

fn shifted(u: &[f64], i: usize, di: f64) -> Vec<f64> {
    let mut v = u.to_vec();
    v[i] += di;
    v
}

fn shifted2(u: &[f64], i: usize, di: f64, j: usize, dj: f64) -> Vec<f64> {
    let mut v = u.to_vec();
    v[i] += di;
    v[j] += dj;
    v
}

fn check_finite(v: &DVector<f64>, context: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: context.to_string(),
        });
    }
    Ok(())
}

/// Jacobian of `f` at `u`; entry `(c, i)` is `∂f_c/∂u_i`.
pub fn jacobian<F>(f: &F, u: &[f64], out_dim: usize, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>> + ?Sized,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::NonFinite {
            context: "derivative step".into(),
        });
    }
    let n = u.len();
    let mut jac = DMatrix::zeros(out_dim, n);
    for i in 0..n {
        let col = first_partial(f, u, i, h)?;
        jac.set_column(i, &col);
    }
    Ok(jac)
}

/// Richardson-extrapolated central difference `∂f/∂u_i`.
pub fn first_partial<F>(f: &F, u: &[f64], i: usize, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>> + ?Sized,
{
    let d = |step: f64| -> Result<DVector<f64>> {
        let fp = f(&shifted(u, i, step))?;
        let fm = f(&shifted(u, i, -step))?;
        Ok((fp - fm) / (2.0 * step))
    };
    let coarse = d(h)?;
    let fine = d(h * 0.5)?;
    let out = (fine * 4.0 - coarse) / 3.0;
    check_finite(&out, "first derivative")?;
    Ok(out)
}

/// Gradient and lower-triangular-complete Hessian stack of a map, sharing one
/// stencil across all output components.
///
/// Returns `(partials, hessians)` where `partials` is `d x n` and
/// `hessians[c]` is the symmetric `n x n` matrix of coordinate second
/// partials `∂²f_c/∂u_i∂u_j` (no Christoffel correction here; that belongs
/// to the caller, who knows the geometry).
pub fn partials_and_hessians<F>(
    f: &F,
    u: &[f64],
    out_dim: usize,
    h: f64,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)>
where
    F: Fn(&[f64]) -> Result<DVector<f64>> + ?Sized,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::NonFinite {
            context: "derivative step".into(),
        });
    }
    let n = u.len();
    let f0 = f(u)?;
    check_finite(&f0, "stencil center")?;

    // axis evaluations at both scales
    let mut fp = vec![[DVector::zeros(out_dim), DVector::zeros(out_dim)]; n];
    let mut fm = vec![[DVector::zeros(out_dim), DVector::zeros(out_dim)]; n];
    for i in 0..n {
        for (s, step) in [h, h * 0.5].into_iter().enumerate() {
            fp[i][s] = f(&shifted(u, i, step))?;
            fm[i][s] = f(&shifted(u, i, -step))?;
        }
    }

    let mut partials = DMatrix::zeros(out_dim, n);
    for i in 0..n {
        let coarse = (&fp[i][0] - &fm[i][0]) / (2.0 * h);
        let fine = (&fp[i][1] - &fm[i][1]) / h;
        partials.set_column(i, &((fine * 4.0 - coarse) / 3.0));
    }

    let mut hessians = vec![DMatrix::zeros(n, n); out_dim];
    for i in 0..n {
        let coarse = (&fp[i][0] + &fm[i][0] - &f0 * 2.0) / (h * h);
        let fine = (&fp[i][1] + &fm[i][1] - &f0 * 2.0) / (0.25 * h * h);
        let second = (fine * 4.0 - coarse) / 3.0;
        for c in 0..out_dim {
            hessians[c][(i, i)] = second[c];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let m = |s: f64| -> Result<DVector<f64>> {
                let fpp = f(&shifted2(u, i, s, j, s))?;
                let fpm = f(&shifted2(u, i, s, j, -s))?;
                let fmp = f(&shifted2(u, i, -s, j, s))?;
                let fmm = f(&shifted2(u, i, -s, j, -s))?;
                Ok((fpp - fpm - fmp + fmm) / (4.0 * s * s))
            };
            let coarse = m(h)?;
            let fine = m(h * 0.5)?;
            let mixed = (fine * 4.0 - coarse) / 3.0;
            for c in 0..out_dim {
                hessians[c][(i, j)] = mixed[c];
                hessians[c][(j, i)] = mixed[c];
            }
        }
    }

    for hess in &hessians {
        if hess.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "second derivative".into(),
            });
        }
    }
    check_finite(&DVector::from_column_slice(partials.as_slice()), "first derivative")?;
    Ok((partials, hessians))
}
