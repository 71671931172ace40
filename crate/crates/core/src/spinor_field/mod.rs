//! Bispinor-valued fields `ψ(x)`, their exact partial derivatives, and the
//! bilinears built from them: the free Dirac residual, the Dirac current
//! `j^(k) = ψ* γ^(0) γ^(k) ψ` and the energy-momentum tensor `T_ik`.
//!
//! Natural units `ħ = c = 1` are used throughout; the only physical parameter
//! is `κ = mc/ħ`. The metric signature is (+,-,-,-).

pub mod definition;

use std::collections::BTreeSet;
use std::sync::LazyLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dirac_algebra::{
    sesquilinear_form, standard_gammas, Bispinor, ComplexMatrix4, GammaMatrices,
};
use crate::fieldexpr::{
    self, add, call, mul, num, sub, ExprError, Func, ParamBindings, ScalarExpr,
};

/// Relative bound on the imaginary part of `T_ik` before it is discarded.
pub const TENSOR_IMAGINARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("non-finite field value at {0:?}")]
    NonFinite(SpacetimePoint),
    #[error("superposition needs at least one term")]
    EmptySuperposition,
    #[error("coordinate axis {0} out of range 0..=3")]
    InvalidAxis(usize),
    #[error("kappa must be positive and finite, got {0}")]
    InvalidKappa(f64),
    #[error("lightlike profile `{0}` must depend on `s` only, not on x0..x3")]
    ProfileDependsOnCoordinates(String),
    #[error("energy-momentum tensor has imaginary residue {residue:e} (scale {scale:e})")]
    NonRealTensor { residue: f64, scale: f64 },
    #[error("invalid sample grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field definition: {0}")]
    Definition(String),
}

/// A point `(x^0, x^1, x^2, x^3)` of Minkowski space, `x^0 = ct`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint(pub [f64; 4]);

impl SpacetimePoint {
    pub const ORIGIN: SpacetimePoint = SpacetimePoint([0.0; 4]);

    pub fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self([x0, x1, x2, x3])
    }

    pub fn coords(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn shifted(&self, axis: usize, delta: f64) -> Self {
        let mut out = *self;
        out.0[axis] += delta;
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// How a complex scalar amplitude is written.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarForm {
    /// `f(x) + i g(x)`
    Cartesian { re: ScalarExpr, im: ScalarExpr },
    /// `exp(α(x) + i β(x))`
    Exponential {
        log_amp: ScalarExpr,
        phase: ScalarExpr,
    },
}

/// A complex scalar function of spacetime together with the symbolic
/// derivatives of its two real parts, computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexScalarField {
    form: ScalarForm,
    d_first: [ScalarExpr; 4],
    d_second: [ScalarExpr; 4],
}

impl ComplexScalarField {
    pub fn cartesian(re: ScalarExpr, im: ScalarExpr) -> Self {
        Self::from_form(ScalarForm::Cartesian { re, im })
    }

    pub fn exponential(log_amp: ScalarExpr, phase: ScalarExpr) -> Self {
        Self::from_form(ScalarForm::Exponential { log_amp, phase })
    }

    /// Parses both parts of `f + i g`.
    pub fn parse_cartesian(re: &str, im: &str) -> Result<Self, ExprError> {
        Ok(Self::cartesian(
            fieldexpr::parse(re)?,
            fieldexpr::parse(im)?,
        ))
    }

    /// Parses both parts of `exp(α + i β)`.
    pub fn parse_exponential(log_amp: &str, phase: &str) -> Result<Self, ExprError> {
        Ok(Self::exponential(
            fieldexpr::parse(log_amp)?,
            fieldexpr::parse(phase)?,
        ))
    }

    pub fn constant(value: Complex64) -> Self {
        Self::cartesian(num(value.re), num(value.im))
    }

    fn from_form(form: ScalarForm) -> Self {
        let (a, b) = match &form {
            ScalarForm::Cartesian { re, im } => (re, im),
            ScalarForm::Exponential { log_amp, phase } => (log_amp, phase),
        };
        let d_first = std::array::from_fn(|k| a.differentiate(k));
        let d_second = std::array::from_fn(|k| b.differentiate(k));
        Self {
            form,
            d_first,
            d_second,
        }
    }

    pub fn form(&self) -> &ScalarForm {
        &self.form
    }

    /// Real and imaginary parts as expressions (`e^α cos β`, `e^α sin β` for
    /// the exponential form).
    pub fn cartesian_parts(&self) -> (ScalarExpr, ScalarExpr) {
        match &self.form {
            ScalarForm::Cartesian { re, im } => (re.clone(), im.clone()),
            ScalarForm::Exponential { log_amp, phase } => {
                let amp = call(Func::Exp, log_amp.clone());
                (
                    mul(amp.clone(), call(Func::Cos, phase.clone())),
                    mul(amp, call(Func::Sin, phase.clone())),
                )
            }
        }
    }

    pub fn params(&self) -> BTreeSet<String> {
        let (a, b) = match &self.form {
            ScalarForm::Cartesian { re, im } => (re, im),
            ScalarForm::Exponential { log_amp, phase } => (log_amp, phase),
        };
        let mut out = a.params();
        out.extend(b.params());
        out
    }

    pub fn depends_on(&self, axis: usize) -> bool {
        match &self.form {
            ScalarForm::Cartesian { re, im } => re.depends_on(axis) || im.depends_on(axis),
            ScalarForm::Exponential { log_amp, phase } => {
                log_amp.depends_on(axis) || phase.depends_on(axis)
            }
        }
    }

    /// `λ · G` as a field of the same form.
    pub fn scaled(&self, factor: Complex64) -> Self {
        if factor == Complex64::new(0.0, 0.0) {
            return Self::constant(factor);
        }
        match &self.form {
            ScalarForm::Cartesian { re, im } => {
                let (a, b) = (num(factor.re), num(factor.im));
                Self::cartesian(
                    sub(mul(a.clone(), re.clone()), mul(b.clone(), im.clone())),
                    add(mul(a, im.clone()), mul(b, re.clone())),
                )
            }
            ScalarForm::Exponential { log_amp, phase } => Self::exponential(
                add(log_amp.clone(), num(factor.norm().ln())),
                add(phase.clone(), num(factor.arg())),
            ),
        }
    }

    pub fn value(&self, p: &SpacetimePoint, b: &ParamBindings) -> Result<Complex64, ExprError> {
        match &self.form {
            ScalarForm::Cartesian { re, im } => Ok(Complex64::new(re.eval(p, b)?, im.eval(p, b)?)),
            ScalarForm::Exponential { log_amp, phase } => Ok(Complex64::from_polar(
                log_amp.eval(p, b)?.exp(),
                phase.eval(p, b)?,
            )),
        }
    }

    /// `∂G/∂x^axis` at `p`.
    pub fn derivative(
        &self,
        p: &SpacetimePoint,
        axis: usize,
        b: &ParamBindings,
    ) -> Result<Complex64, ExprError> {
        if axis > 3 {
            return Err(ExprError::InvalidAxis(axis));
        }
        let da = self.d_first[axis].eval(p, b)?;
        let db = self.d_second[axis].eval(p, b)?;
        match &self.form {
            ScalarForm::Cartesian { .. } => Ok(Complex64::new(da, db)),
            ScalarForm::Exponential { .. } => Ok(Complex64::new(da, db) * self.value(p, b)?),
        }
    }

    /// Value and all four partial derivatives.
    pub fn jet(
        &self,
        p: &SpacetimePoint,
        b: &ParamBindings,
    ) -> Result<(Complex64, [Complex64; 4]), ExprError> {
        let value = self.value(p, b)?;
        let mut partials = [Complex64::new(0.0, 0.0); 4];
        for (k, slot) in partials.iter_mut().enumerate() {
            let da = self.d_first[k].eval(p, b)?;
            let db = self.d_second[k].eval(p, b)?;
            *slot = match self.form {
                ScalarForm::Cartesian { .. } => Complex64::new(da, db),
                ScalarForm::Exponential { .. } => Complex64::new(da, db) * value,
            };
        }
        Ok((value, partials))
    }
}

/// The explicit lightlike solution family
/// `ψ = (1, 1, -1, 1) · exp(κ x^2 + f(s) + i g(s))`, `s = x^0 + x^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct LightlikeFamily {
    kappa: f64,
    f: ScalarExpr,
    g: ScalarExpr,
    amplitude: ComplexScalarField,
}

impl LightlikeFamily {
    /// The constant bispinor `(1, 1, -1, 1)`.
    pub fn spinor() -> Bispinor {
        Bispinor::from_real([1.0, 1.0, -1.0, 1.0])
    }

    /// `f` and `g` are expressions in the variable `s` (and free parameters).
    pub fn new(kappa: f64, f: ScalarExpr, g: ScalarExpr) -> Result<Self, FieldError> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(FieldError::InvalidKappa(kappa));
        }
        for profile in [&f, &g] {
            if profile.depends_on_any_coordinate() {
                return Err(FieldError::ProfileDependsOnCoordinates(profile.to_string()));
            }
        }
        let s = ScalarExpr::Add(
            Box::new(ScalarExpr::Coord(0)),
            Box::new(ScalarExpr::Coord(3)),
        );
        let log_amp = add(mul(num(kappa), ScalarExpr::Coord(2)), f.substitute("s", &s));
        let phase = g.substitute("s", &s);
        Ok(Self {
            kappa,
            f,
            g,
            amplitude: ComplexScalarField::exponential(log_amp, phase),
        })
    }

    pub fn parse(kappa: f64, f: &str, g: &str) -> Result<Self, FieldError> {
        Self::new(kappa, fieldexpr::parse(f)?, fieldexpr::parse(g)?)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn f(&self) -> &ScalarExpr {
        &self.f
    }

    pub fn g(&self) -> &ScalarExpr {
        &self.g
    }

    /// The scalar factor `exp(κ x^2 + f(s) + i g(s))`.
    pub fn amplitude(&self) -> &ComplexScalarField {
        &self.amplitude
    }

    /// The same field written component by component.
    pub fn expand(&self) -> SpinorField {
        SpinorField::Componentwise {
            components: Box::new(separable_components(&Self::spinor(), &self.amplitude)),
        }
    }
}

/// A bispinor-valued field.
#[derive(Debug, Clone, PartialEq)]
pub enum SpinorField {
    /// `ψ = u · G(x)`
    Separable {
        u: Bispinor,
        amplitude: ComplexScalarField,
    },
    /// `ψ = (G_0(x), G_1(x), G_2(x), G_3(x))`
    Componentwise {
        components: Box<[ComplexScalarField; 4]>,
    },
    Lightlike(LightlikeFamily),
    Superposition {
        terms: Vec<SpinorField>,
    },
}

/// Value and first partial derivatives of a field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    pub value: Bispinor,
    pub partials: [Bispinor; 4],
}

impl std::ops::Add for FieldJet {
    type Output = FieldJet;
    fn add(self, rhs: FieldJet) -> FieldJet {
        FieldJet {
            value: self.value + rhs.value,
            partials: std::array::from_fn(|k| self.partials[k] + rhs.partials[k]),
        }
    }
}

fn separable_components(u: &Bispinor, amplitude: &ComplexScalarField) -> [ComplexScalarField; 4] {
    let (re, im) = amplitude.cartesian_parts();
    let base = ComplexScalarField::cartesian(re, im);
    std::array::from_fn(|k| base.scaled(u[k]))
}

impl SpinorField {
    pub fn separable(u: Bispinor, amplitude: ComplexScalarField) -> Self {
        SpinorField::Separable { u, amplitude }
    }

    pub fn componentwise(components: [ComplexScalarField; 4]) -> Self {
        SpinorField::Componentwise {
            components: Box::new(components),
        }
    }

    pub fn lightlike(kappa: f64, f: &str, g: &str) -> Result<Self, FieldError> {
        Ok(SpinorField::Lightlike(LightlikeFamily::parse(kappa, f, g)?))
    }

    /// The identically vanishing field.
    pub fn zero() -> Self {
        Self::separable(
            Bispinor::zero(),
            ComplexScalarField::constant(Complex64::new(0.0, 0.0)),
        )
    }

    /// `λ ψ`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        match self {
            SpinorField::Separable { u, amplitude } => SpinorField::Separable {
                u: u.scale(factor),
                amplitude: amplitude.clone(),
            },
            SpinorField::Componentwise { components } => {
                Self::componentwise(std::array::from_fn(|k| components[k].scaled(factor)))
            }
            SpinorField::Lightlike(family) => SpinorField::Separable {
                u: LightlikeFamily::spinor().scale(factor),
                amplitude: family.amplitude.clone(),
            },
            SpinorField::Superposition { terms } => SpinorField::Superposition {
                terms: terms.iter().map(|t| t.scaled(factor)).collect(),
            },
        }
    }

    /// All four components in Cartesian form `f_k + i g_k`.
    pub fn to_components(&self) -> [ComplexScalarField; 4] {
        match self {
            SpinorField::Separable { u, amplitude } => separable_components(u, amplitude),
            SpinorField::Componentwise { components } => std::array::from_fn(|k| {
                let (re, im) = components[k].cartesian_parts();
                ComplexScalarField::cartesian(re, im)
            }),
            SpinorField::Lightlike(family) => {
                separable_components(&LightlikeFamily::spinor(), &family.amplitude)
            }
            SpinorField::Superposition { terms } => {
                let mut parts: [(ScalarExpr, ScalarExpr); 4] =
                    std::array::from_fn(|_| (num(0.0), num(0.0)));
                for term in terms {
                    for (slot, comp) in parts.iter_mut().zip(term.to_components().iter()) {
                        let (re, im) = comp.cartesian_parts();
                        let (acc_re, acc_im) = std::mem::replace(slot, (num(0.0), num(0.0)));
                        *slot = (add(acc_re, re), add(acc_im, im));
                    }
                }
                parts.map(|(re, im)| ComplexScalarField::cartesian(re, im))
            }
        }
    }

    pub fn params(&self) -> BTreeSet<String> {
        match self {
            SpinorField::Separable { amplitude, .. } => amplitude.params(),
            SpinorField::Componentwise { components } => {
                components.iter().flat_map(|c| c.params()).collect()
            }
            SpinorField::Lightlike(family) => family.amplitude.params(),
            SpinorField::Superposition { terms } => terms.iter().flat_map(|t| t.params()).collect(),
        }
    }

    /// `ψ(p)`.
    pub fn evaluate(&self, p: &SpacetimePoint, b: &ParamBindings) -> Result<Bispinor, FieldError> {
        let value = match self {
            SpinorField::Separable { u, amplitude } => u.scale(amplitude.value(p, b)?),
            SpinorField::Componentwise { components } => {
                let mut out = Bispinor::zero();
                for (k, c) in components.iter().enumerate() {
                    out[k] = c.value(p, b)?;
                }
                out
            }
            SpinorField::Lightlike(family) => {
                LightlikeFamily::spinor().scale(family.amplitude.value(p, b)?)
            }
            SpinorField::Superposition { terms } => {
                let mut acc = Bispinor::zero();
                for t in terms {
                    acc = acc + t.evaluate(p, b)?;
                }
                acc
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(FieldError::NonFinite(*p))
        }
    }

    /// `∂ψ/∂x^axis` at `p`, from the symbolic derivatives of the components.
    pub fn partial(
        &self,
        p: &SpacetimePoint,
        axis: usize,
        b: &ParamBindings,
    ) -> Result<Bispinor, FieldError> {
        if axis > 3 {
            return Err(FieldError::InvalidAxis(axis));
        }
        let value = match self {
            SpinorField::Separable { u, amplitude } => u.scale(amplitude.derivative(p, axis, b)?),
            SpinorField::Componentwise { components } => {
                let mut out = Bispinor::zero();
                for (k, c) in components.iter().enumerate() {
                    out[k] = c.derivative(p, axis, b)?;
                }
                out
            }
            SpinorField::Lightlike(family) => {
                LightlikeFamily::spinor().scale(family.amplitude.derivative(p, axis, b)?)
            }
            SpinorField::Superposition { terms } => {
                let mut acc = Bispinor::zero();
                for t in terms {
                    acc = acc + t.partial(p, axis, b)?;
                }
                acc
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(FieldError::NonFinite(*p))
        }
    }

    /// Value and all partials in one pass.
    pub fn jet(&self, p: &SpacetimePoint, b: &ParamBindings) -> Result<FieldJet, FieldError> {
        let jet = match self {
            SpinorField::Separable { u, amplitude } => scalar_jet(u, amplitude, p, b)?,
            SpinorField::Lightlike(family) => {
                scalar_jet(&LightlikeFamily::spinor(), &family.amplitude, p, b)?
            }
            SpinorField::Componentwise { components } => {
                let mut jet = FieldJet {
                    value: Bispinor::zero(),
                    partials: [Bispinor::zero(); 4],
                };
                for (c, comp) in components.iter().enumerate() {
                    let (v, d) = comp.jet(p, b)?;
                    jet.value[c] = v;
                    for k in 0..4 {
                        jet.partials[k][c] = d[k];
                    }
                }
                jet
            }
            SpinorField::Superposition { terms } => {
                let mut iter = terms.iter();
                let first = iter.next().ok_or(FieldError::EmptySuperposition)?;
                let mut acc = first.jet(p, b)?;
                for t in iter {
                    acc = acc + t.jet(p, b)?;
                }
                acc
            }
        };
        let finite = jet.value.is_finite() && jet.partials.iter().all(Bispinor::is_finite);
        if finite {
            Ok(jet)
        } else {
            Err(FieldError::NonFinite(*p))
        }
    }
}

fn scalar_jet(
    u: &Bispinor,
    amplitude: &ComplexScalarField,
    p: &SpacetimePoint,
    b: &ParamBindings,
) -> Result<FieldJet, FieldError> {
    let (v, d) = amplitude.jet(p, b)?;
    Ok(FieldJet {
        value: u.scale(v),
        partials: d.map(|dk| u.scale(dk)),
    })
}

/// Builds a superposition; evaluation distributes over the terms.
pub fn superpose(fields: Vec<SpinorField>) -> Result<SpinorField, FieldError> {
    if fields.is_empty() {
        return Err(FieldError::EmptySuperposition);
    }
    Ok(SpinorField::Superposition { terms: fields })
}

struct Bilinears {
    gammas: GammaMatrices,
    /// `γ^(0) γ^(k)`
    current: [ComplexMatrix4; 4],
    /// `γ^(0) γ_i`
    tensor: [ComplexMatrix4; 4],
}

static BILINEARS: LazyLock<Bilinears> = LazyLock::new(|| {
    let gammas = standard_gammas();
    Bilinears {
        gammas,
        current: std::array::from_fn(|k| gammas.current_matrix(k).expect("index in range")),
        tensor: std::array::from_fn(|i| gammas.tensor_matrix(i).expect("index in range")),
    }
});

/// Dirac current four-vector `j^(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourCurrent(pub [f64; 4]);

impl FourCurrent {
    pub fn density(&self) -> f64 {
        self.0[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Symmetric real energy-momentum tensor `T_ik` (lower indices).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyMomentumTensor(pub [[f64; 4]; 4]);

impl EnergyMomentumTensor {
    /// Index pairs `(i, k)` with `i <= k`, row-major.
    pub const INDEPENDENT: [(usize, usize); 10] = [
        (0, 0),
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 1),
        (1, 2),
        (1, 3),
        (2, 2),
        (2, 3),
        (3, 3),
    ];

    pub fn component(&self, i: usize, k: usize) -> f64 {
        self.0[i][k]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn independent(&self) -> [f64; 10] {
        Self::INDEPENDENT.map(|(i, k)| self.0[i][k])
    }
}

/// `R = i γ^(k) ∂_k ψ - κ ψ`, the free Dirac equation divided by `ħc`.
pub fn residual_from_jet(jet: &FieldJet, kappa: f64) -> Bispinor {
    let g = &BILINEARS.gammas;
    let mut acc = Bispinor::zero();
    for k in 0..4 {
        acc = acc + g.upper[k].apply(&jet.partials[k]);
    }
    acc.scale(Complex64::new(0.0, 1.0)) - jet.value.scale(Complex64::new(kappa, 0.0))
}

pub fn current_from_value(psi: &Bispinor) -> FourCurrent {
    FourCurrent(std::array::from_fn(|k| {
        sesquilinear_form(psi, &BILINEARS.current[k], psi).re
    }))
}

/// `T_ik = (i/4){ψ*γ0γ_i ∂_kψ - ∂_kψ* γ0γ_i ψ + (i <-> k)}` with `ħc = 1`.
///
/// Each unordered pair is evaluated once and written to both slots, so the
/// result is exactly symmetric. The Hermitian combination is real up to
/// rounding; a larger imaginary part is an error.
pub fn tensor_from_jet(jet: &FieldJet) -> Result<EnergyMomentumTensor, FieldError> {
    let psi = &jet.value;
    let dmax = jet
        .partials
        .iter()
        .map(Bispinor::norm_sqr)
        .fold(0.0, f64::max)
        .sqrt();
    let scale = psi.norm_sqr().sqrt() * dmax;
    let half = |i: usize, k: usize| {
        let m = &BILINEARS.tensor[i];
        sesquilinear_form(psi, m, &jet.partials[k]) - sesquilinear_form(&jet.partials[k], m, psi)
    };
    let mut t = [[0.0; 4]; 4];
    for (i, k) in EnergyMomentumTensor::INDEPENDENT {
        let value = Complex64::new(0.0, 0.25) * (half(i, k) + half(k, i));
        if value.im.abs() > TENSOR_IMAGINARY_TOLERANCE * scale {
            return Err(FieldError::NonRealTensor {
                residue: value.im.abs(),
                scale,
            });
        }
        t[i][k] = value.re;
        t[k][i] = value.re;
    }
    Ok(EnergyMomentumTensor(t))
}

pub fn dirac_residual(
    field: &SpinorField,
    p: &SpacetimePoint,
    kappa: f64,
    b: &ParamBindings,
) -> Result<Bispinor, FieldError> {
    check_kappa(kappa)?;
    Ok(residual_from_jet(&field.jet(p, b)?, kappa))
}

pub fn current(
    field: &SpinorField,
    p: &SpacetimePoint,
    b: &ParamBindings,
) -> Result<FourCurrent, FieldError> {
    Ok(current_from_value(&field.evaluate(p, b)?))
}

pub fn energy_momentum(
    field: &SpinorField,
    p: &SpacetimePoint,
    b: &ParamBindings,
) -> Result<EnergyMomentumTensor, FieldError> {
    tensor_from_jet(&field.jet(p, b)?)
}

fn check_kappa(kappa: f64) -> Result<(), FieldError> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(FieldError::InvalidKappa(kappa))
    }
}

/// Regular lattice over a coordinate box; `samples[k] >= 2` on every axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    lo: [f64; 4],
    hi: [f64; 4],
    samples: [usize; 4],
}

impl SampleGrid {
    pub fn new(lo: [f64; 4], hi: [f64; 4], samples: [usize; 4]) -> Result<Self, FieldError> {
        for k in 0..4 {
            if samples[k] < 2 {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {k} has {} samples, need at least 2",
                    samples[k]
                )));
            }
            if !(lo[k].is_finite() && hi[k].is_finite()) || lo[k] > hi[k] {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {k} bounds [{}, {}] are not a finite interval",
                    lo[k], hi[k]
                )));
            }
        }
        Ok(Self { lo, hi, samples })
    }

    /// `[lo, hi]^4` with `n` samples per axis.
    pub fn cube(lo: f64, hi: f64, n: usize) -> Result<Self, FieldError> {
        Self::new([lo; 4], [hi; 4], [n; 4])
    }

    pub fn lo(&self) -> [f64; 4] {
        self.lo
    }

    pub fn hi(&self) -> [f64; 4] {
        self.hi
    }

    pub fn samples(&self) -> [usize; 4] {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `index`-th lattice point, `x^0` varying slowest.
    pub fn point(&self, mut index: usize) -> SpacetimePoint {
        let mut x = [0.0; 4];
        for k in (0..4).rev() {
            let n = self.samples[k];
            let i = index % n;
            index /= n;
            let t = i as f64 / (n - 1) as f64;
            x[k] = if i == n - 1 {
                self.hi[k]
            } else {
                self.lo[k] + t * (self.hi[k] - self.lo[k])
            };
        }
        SpacetimePoint(x)
    }

    pub fn points(&self) -> impl Iterator<Item = SpacetimePoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Extrema of the residual, the tensor and the density over a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub max_residual: f64,
    pub max_abs_t: f64,
    pub min_j0: f64,
    pub max_j0: f64,
    pub points: usize,
}

/// Pointwise quantities behind [`grid_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSample {
    pub point: SpacetimePoint,
    pub residual: f64,
    pub tensor: EnergyMomentumTensor,
    pub current: FourCurrent,
}

pub fn sample_point(
    field: &SpinorField,
    kappa: f64,
    p: &SpacetimePoint,
    b: &ParamBindings,
) -> Result<PointSample, FieldError> {
    let jet = field.jet(p, b)?;
    Ok(PointSample {
        point: *p,
        residual: residual_from_jet(&jet, kappa).max_abs(),
        tensor: tensor_from_jet(&jet)?,
        current: current_from_value(&jet.value),
    })
}

/// Evaluates every lattice point (in parallel) and returns the samples in
/// lattice order.
pub fn sample_grid(
    field: &SpinorField,
    kappa: f64,
    grid: &SampleGrid,
    b: &ParamBindings,
) -> Result<Vec<PointSample>, FieldError> {
    check_kappa(kappa)?;
    (0..grid.len())
        .into_par_iter()
        .map(|i| sample_point(field, kappa, &grid.point(i), b))
        .collect()
}

pub fn grid_scan(
    field: &SpinorField,
    kappa: f64,
    grid: &SampleGrid,
    b: &ParamBindings,
) -> Result<GridSummary, FieldError> {
    let samples = sample_grid(field, kappa, grid, b)?;
    let mut summary = GridSummary {
        max_residual: 0.0,
        max_abs_t: 0.0,
        min_j0: f64::INFINITY,
        max_j0: 0.0,
        points: samples.len(),
    };
    for s in &samples {
        summary.max_residual = summary.max_residual.max(s.residual);
        summary.max_abs_t = summary.max_abs_t.max(s.tensor.max_abs());
        summary.min_j0 = summary.min_j0.min(s.current.density());
        summary.max_j0 = summary.max_j0.max(s.current.density());
    }
    Ok(summary)
}

/// Negated field, `-ψ`.
pub fn negated(field: &SpinorField) -> SpinorField {
    field.scaled(Complex64::new(-1.0, 0.0))
}
