//! Ghost spinor detection.
//!
//! A ghost spinor is a solution of the free Dirac equation whose
//! energy-momentum tensor vanishes identically while its current does not.
//! Three routes are offered:
//!
//! - [`classify_separable`]: `ψ = u (f + i g)` is a ghost iff `g = a f` for a
//!   real constant `a`; for `exp(α + iβ)` this means a constant phase `β`.
//! - [`classify_componentwise`]: ghost if every component is a complex
//!   multiple of one common real profile `h(x)`; otherwise numeric.
//! - [`classify_numeric`]: evaluates `T_ik` and `j^(0)` on a lattice.
//!
//! Verdicts are three-way; values between the ghost and non-ghost thresholds
//! are reported as [`Verdict::Indeterminate`] rather than rounded either way.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dirac_algebra::Bispinor;
use crate::fieldexpr::{ParamBindings, ScalarExpr};
use crate::spinor_field::{
    grid_scan, ComplexScalarField, FieldError, SampleGrid, ScalarForm, SpinorField,
};

/// Proportionality residual at or below which two profiles count as
/// proportional.
pub const PROPORTIONALITY_TOLERANCE: f64 = 1e-8;
/// Relative Dirac residual above which a field is not treated as a solution.
pub const SOLUTION_TOLERANCE: f64 = 1e-8;
/// `max|T| <= GHOST_T_TOLERANCE * scale` is a vanishing tensor.
pub const GHOST_T_TOLERANCE: f64 = 1e-10;
/// `max|T| > NON_GHOST_T_THRESHOLD * scale` is a non-vanishing tensor.
pub const NON_GHOST_T_THRESHOLD: f64 = 1e-6;
/// Smallest density accepted as a non-vanishing current.
pub const MIN_DENSITY: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("sample lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("both profiles vanish on every sample")]
    BothZero,
    #[error("constant spinor has u*u = 0")]
    ZeroSpinor,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Ghost,
    NonGhost,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Proportionality of real and imaginary parts of a separable amplitude.
    Theorem1,
    /// Constant phase of an exponential amplitude.
    Corollary1,
    /// Common real profile across all components.
    Theorem2Structural,
    /// Direct tensor and current evaluation on a grid.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// The constant `a` in `g = a f`, when it exists.
    pub fitted_a: Option<f64>,
    /// Absent when only the numeric test ran.
    pub proportionality_residual: Option<f64>,
    pub max_abs_t: Option<f64>,
    pub min_j0: Option<f64>,
    pub max_j0: Option<f64>,
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhostVerdict {
    pub verdict: Verdict,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl GhostVerdict {
    pub fn is_ghost(&self) -> bool {
        self.verdict == Verdict::Ghost
    }
}

/// Least-squares fit of `g ≈ a f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionalityFit {
    /// `Σ f g / Σ f²`; `None` when `f` vanishes on every sample.
    pub a: Option<f64>,
    /// `max|g - a f| / max(1, max|g|)`, infinite when `a` is `None`.
    pub residual: f64,
}

pub fn proportionality_fit(f: &[f64], g: &[f64]) -> Result<ProportionalityFit, ClassifyError> {
    if f.len() != g.len() {
        return Err(ClassifyError::LengthMismatch(f.len(), g.len()));
    }
    if f.len() < 2 {
        return Err(ClassifyError::TooFewSamples(f.len()));
    }
    let ff: f64 = f.iter().map(|v| v * v).sum();
    let g_zero = g.iter().all(|v| *v == 0.0);
    if ff == 0.0 {
        if g_zero {
            return Err(ClassifyError::BothZero);
        }
        return Ok(ProportionalityFit {
            a: None,
            residual: f64::INFINITY,
        });
    }
    let fg: f64 = f.iter().zip(g).map(|(x, y)| x * y).sum();
    let a = fg / ff;
    let max_g = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let dev = f
        .iter()
        .zip(g)
        .map(|(x, y)| (y - a * x).abs())
        .fold(0.0, f64::max);
    Ok(ProportionalityFit {
        a: Some(a),
        residual: dev / max_g.max(1.0),
    })
}

fn sample_expr(
    e: &ScalarExpr,
    grid: &SampleGrid,
    b: &ParamBindings,
) -> Result<Vec<f64>, ClassifyError> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| e.eval(&grid.point(i), b).map_err(FieldError::from))
        .collect::<Result<Vec<_>, _>>()
        .map_err(ClassifyError::from)
}

fn structural(
    verdict: Verdict,
    method: Method,
    fitted_a: Option<f64>,
    residual: f64,
) -> GhostVerdict {
    GhostVerdict {
        verdict,
        method,
        diagnostics: Diagnostics {
            fitted_a,
            proportionality_residual: Some(residual),
            ..Diagnostics::default()
        },
    }
}

/// Two-way fit between `f` and `g`: `g = a f`, or `f = b g` when `f` is the
/// smaller one (covers purely imaginary amplitudes). Returns the best
/// residual and the implied `a` (absent when `f ≡ 0`).
fn mutual_fit(f: &[f64], g: &[f64]) -> Result<(f64, Option<f64>), ClassifyError> {
    let forward = proportionality_fit(f, g)?;
    let backward = proportionality_fit(g, f)?;
    if forward.residual <= backward.residual {
        Ok((forward.residual, forward.a))
    } else {
        let a = backward.a.filter(|b| *b != 0.0).map(|b| 1.0 / b);
        Ok((backward.residual, a))
    }
}

/// Structural test for `ψ = u G(x)`.
pub fn classify_separable(
    u: &Bispinor,
    amplitude: &ComplexScalarField,
    grid: &SampleGrid,
    b: &ParamBindings,
) -> Result<GhostVerdict, ClassifyError> {
    if u.norm_sqr() == 0.0 {
        return Err(ClassifyError::ZeroSpinor);
    }
    if let ScalarForm::Exponential { phase, .. } = amplitude.form() {
        if !phase.depends_on_any_coordinate() {
            let beta = phase.eval(&grid.point(0), b).map_err(FieldError::from)?;
            let fitted = (beta.cos().abs() > 1e-12).then(|| beta.tan());
            return Ok(structural(Verdict::Ghost, Method::Corollary1, fitted, 0.0));
        }
    }
    let (re, im) = amplitude.cartesian_parts();
    let f = sample_expr(&re, grid, b)?;
    let g = sample_expr(&im, grid, b)?;
    match mutual_fit(&f, &g) {
        Err(ClassifyError::BothZero) => Ok(structural(
            Verdict::Indeterminate,
            Method::Theorem1,
            None,
            0.0,
        )),
        Err(e) => Err(e),
        Ok((residual, a)) => {
            let verdict = if residual <= PROPORTIONALITY_TOLERANCE {
                Verdict::Ghost
            } else {
                Verdict::NonGhost
            };
            Ok(structural(verdict, Method::Theorem1, a, residual))
        }
    }
}

/// Common-profile test over the eight real component functions, falling back
/// to [`classify_numeric`] when no common profile exists.
pub fn classify_componentwise(
    field: &SpinorField,
    kappa: f64,
    grid: &SampleGrid,
    b: &ParamBindings,
) -> Result<GhostVerdict, ClassifyError> {
    let mut profiles = Vec::with_capacity(8);
    for comp in field.to_components() {
        let (re, im) = comp.cartesian_parts();
        profiles.push(sample_expr(&re, grid, b)?);
        profiles.push(sample_expr(&im, grid, b)?);
    }
    let energy = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>();
    let (reference, best) = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| (i, energy(p)))
        .fold((0, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if best == 0.0 {
        return Ok(structural(
            Verdict::Indeterminate,
            Method::Theorem2Structural,
            None,
            0.0,
        ));
    }
    let mut worst = 0.0_f64;
    for p in &profiles {
        worst = worst.max(proportionality_fit(&profiles[reference], p)?.residual);
    }
    if worst <= PROPORTIONALITY_TOLERANCE {
        return Ok(structural(
            Verdict::Ghost,
            Method::Theorem2Structural,
            None,
            worst,
        ));
    }
    let mut numeric = classify_numeric(field, kappa, grid, b)?;
    numeric.diagnostics.proportionality_residual = Some(worst);
    Ok(numeric)
}

/// Decides from sampled `T_ik` and `j^(0)`. Fields that do not solve the
/// Dirac equation on the grid are `Indeterminate`.
pub fn classify_numeric(
    field: &SpinorField,
    kappa: f64,
    grid: &SampleGrid,
    b: &ParamBindings,
) -> Result<GhostVerdict, ClassifyError> {
    let s = grid_scan(field, kappa, grid, b)?;
    let scale = (s.max_j0 * kappa).max(1.0);
    let residual_scale = (kappa * s.max_j0.sqrt()).max(1.0);
    let verdict = if s.max_residual > SOLUTION_TOLERANCE * residual_scale {
        Verdict::Indeterminate
    } else if s.max_abs_t <= GHOST_T_TOLERANCE * scale && s.min_j0 >= MIN_DENSITY {
        Verdict::Ghost
    } else if s.max_abs_t > NON_GHOST_T_THRESHOLD * scale {
        Verdict::NonGhost
    } else {
        Verdict::Indeterminate
    };
    Ok(GhostVerdict {
        verdict,
        method: Method::Numeric,
        diagnostics: Diagnostics {
            fitted_a: None,
            proportionality_residual: None,
            max_abs_t: Some(s.max_abs_t),
            min_j0: Some(s.min_j0),
            max_j0: Some(s.max_j0),
            max_residual: Some(s.max_residual),
        },
    })
}

/// Runs the structural test that matches the field's shape.
pub fn classify_structural(
    field: &SpinorField,
    kappa: f64,
    grid: &SampleGrid,
    b: &ParamBindings,
) -> Result<GhostVerdict, ClassifyError> {
    match field {
        SpinorField::Separable { u, amplitude } => classify_separable(u, amplitude, grid, b),
        SpinorField::Lightlike(family) => classify_separable(
            &crate::spinor_field::LightlikeFamily::spinor(),
            family.amplitude(),
            grid,
            b,
        ),
        SpinorField::Componentwise { .. } | SpinorField::Superposition { .. } => {
            classify_componentwise(field, kappa, grid, b)
        }
    }
}
