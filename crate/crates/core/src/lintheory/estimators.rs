//! Least-squares machinery for the linear laboratory: plain OLS, the
//! two-stage distillation estimator, and the teacher-on-privileged-only
//! variant used to demonstrate why that strategy can trail the baseline.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SVD};

/// Relative singular-value cutoff for rank decisions.
const SV_CUTOFF: f64 = 1e-10;

/// A least-squares solution. `degenerate` is set when the design matrix was
/// rank-deficient at the cutoff and the minimum-norm solution was returned.
#[derive(Debug, Clone)]
pub struct LsFit {
    pub coef: DVector<f64>,
    pub degenerate: bool,
}

/// Minimum-norm least squares via SVD with cutoff `1e-10 * sigma_max`.
pub fn least_squares(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<LsFit> {
    if design.nrows() != target.len() {
        return Err(Error::validation(format!(
            "design has {} rows but target has {} entries",
            design.nrows(),
            target.len()
        )));
    }
    if design.ncols() == 0 {
        return Ok(LsFit {
            coef: DVector::zeros(0),
            degenerate: true,
        });
    }
    let svd = SVD::new(design.clone(), true, true);
    let max_sv = svd.singular_values.max();
    let cutoff = SV_CUTOFF * max_sv;
    let degenerate = max_sv == 0.0 || svd.singular_values.min() <= cutoff;
    let coef = svd
        .solve(target, cutoff)
        .map_err(Error::validation)?
        .column(0)
        .into_owned();
    Ok(LsFit { coef, degenerate })
}

/// Ordinary least squares of `y` on `x`. Needs at least as many rows as
/// columns.
pub fn ols_fit(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LsFit> {
    if x.nrows() < x.ncols() {
        return Err(Error::validation(format!(
            "{} rows cannot identify {} coefficients",
            x.nrows(),
            x.ncols()
        )));
    }
    least_squares(x, y)
}

/// Two-stage estimator: regress y on the concatenation [x | z], score every
/// row of the larger pool with that fit, then regress the scores back onto
/// the regular features alone. With no privileged columns this collapses to
/// OLS on x.
pub fn pfd_two_stage_fit(
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    x_all: &DMatrix<f64>,
    z_all: &DMatrix<f64>,
) -> Result<LsFit> {
    if x.nrows() != z.nrows() || x_all.nrows() != z_all.nrows() {
        return Err(Error::validation("labeled/pool row counts disagree"));
    }
    if x.ncols() != x_all.ncols() || z.ncols() != z_all.ncols() {
        return Err(Error::validation("labeled/pool column counts disagree"));
    }
    if x.nrows() <= x.ncols() + z.ncols() {
        return Err(Error::validation(format!(
            "stage one needs more than {} labeled rows, got {}",
            x.ncols() + z.ncols(),
            x.nrows()
        )));
    }
    if x_all.nrows() < x_all.ncols() {
        return Err(Error::validation("pool smaller than regular dimension"));
    }
    let teacher = least_squares(&hstack(x, z), y)?;
    let scores = hstack(x_all, z_all) * &teacher.coef;
    let student = least_squares(x_all, &scores)?;
    Ok(LsFit {
        coef: student.coef,
        degenerate: teacher.degenerate || student.degenerate,
    })
}

/// Teacher fitted on privileged columns only, then distilled onto the
/// regular features. With independent x and z the student coefficient has
/// zero mean, which is the failure mode this estimator exists to exhibit.
pub fn gend_linear_fit(
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    x_all: &DMatrix<f64>,
    z_all: &DMatrix<f64>,
) -> Result<LsFit> {
    if z.ncols() == 0 {
        return Ok(LsFit {
            coef: DVector::zeros(x_all.ncols()),
            degenerate: true,
        });
    }
    if z.nrows() <= z.ncols() {
        return Err(Error::validation(format!(
            "teacher needs more than {} labeled rows, got {}",
            z.ncols(),
            z.nrows()
        )));
    }
    if z.ncols() != z_all.ncols() || x_all.nrows() != z_all.nrows() {
        return Err(Error::validation("pool shapes disagree"));
    }
    let teacher = least_squares(z, y)?;
    let scores = z_all * &teacher.coef;
    let student = least_squares(x_all, &scores)?;
    Ok(LsFit {
        coef: student.coef,
        degenerate: teacher.degenerate || student.degenerate,
    })
}

pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}
