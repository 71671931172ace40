//! Interference intensities.
//!
//! Two models live here:
//!
//! - the superposition of the lightlike real wave (`g = s`) and ghost wave
//!   (`f = g = 0`), whose density is `8 e^{2κx²} (1 + cos(x⁰ + x³))`;
//! - a two-slit setup with one real particle and `n` shadow particles. Slit 1
//!   sits at `x = -d`, slit 2 at `x = +d`, and every amplitude carries the
//!   Gaussian envelope `e^{-A(x ± d)²}`. The real particle has phases `α(x)`,
//!   `β(x)` at the two slits; shadow particle `m` has constant phases
//!   `c₁⁽ᵐ⁾`, `c₂⁽ᵐ⁾`.
//!
//! The common bispinor of all amplitudes contributes only the factor
//! `norm = u*u` per particle, so amplitudes are complex scalars.
//!
//! [`expand_bruteforce`] sums all `2^(n+1)` slit assignments explicitly and is
//! the reference for the factorized [`combined_intensity`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fieldexpr::{parse_with_params, ExprError, ParamBindings, ScalarExpr};
use crate::spinor_field::SpacetimePoint;

/// Largest shadow count accepted by [`expand_bruteforce`].
pub const MAX_BRUTEFORCE_SHADOWS: usize = 20;

/// Names usable in `alpha` and `beta` expressions.
pub const PHASE_VARIABLES: [&str; 4] = ["x", "q", "A", "d"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterferenceError {
    #[error("invalid two-slit configuration: {0}")]
    InvalidConfig(String),
    #[error("phase expression: {0}")]
    Expr(#[from] ExprError),
    #[error("shadow index {m} out of range 1..={n}")]
    InvalidShadowIndex { m: usize, n: usize },
    #[error("brute-force expansion supports at most {max} shadows, got {n}")]
    TooManyShadows { n: usize, max: usize },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("invalid sampling range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("kappa must be positive and finite, got {0}")]
    InvalidKappa(f64),
}

fn default_norm() -> f64 {
    1.0
}

fn default_alpha() -> String {
    "q*x".into()
}

fn default_beta() -> String {
    "-q*x".into()
}

/// Two-slit parameters as they appear in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSlitConfig {
    /// Inverse squared Gaussian width.
    #[serde(rename = "A")]
    pub a: f64,
    /// Half the slit separation.
    pub d: f64,
    /// Fringe wavenumber used by the default phases.
    pub q: f64,
    /// `u*u` of the common bispinor.
    #[serde(default = "default_norm")]
    pub norm: f64,
    /// Real-particle phase at slit 1, an expression in `x`, `q`, `A`, `d`.
    #[serde(default = "default_alpha")]
    pub alpha: String,
    /// Real-particle phase at slit 2.
    #[serde(default = "default_beta")]
    pub beta: String,
    /// `[c₁⁽ᵐ⁾, c₂⁽ᵐ⁾]` for each shadow particle; its length is `n`.
    #[serde(default)]
    pub shadow_phases: Vec<[f64; 2]>,
}

impl TwoSlitConfig {
    pub fn new(a: f64, d: f64, q: f64) -> Self {
        Self {
            a,
            d,
            q,
            norm: 1.0,
            alpha: default_alpha(),
            beta: default_beta(),
            shadow_phases: Vec::new(),
        }
    }

    pub fn with_shadows(mut self, phases: Vec<[f64; 2]>) -> Self {
        self.shadow_phases = phases;
        self
    }

    pub fn n(&self) -> usize {
        self.shadow_phases.len()
    }
}

/// A validated configuration with parsed phase expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSlit {
    cfg: TwoSlitConfig,
    alpha: ScalarExpr,
    beta: ScalarExpr,
    bindings: ParamBindings,
}

fn compile_phase(text: &str) -> Result<ScalarExpr, InterferenceError> {
    // `x` is carried as coordinate 1 so evaluation needs no per-point bindings
    let e = parse_with_params(text, &PHASE_VARIABLES)?;
    if e.depends_on_any_coordinate() {
        return Err(InterferenceError::InvalidConfig(format!(
            "phase `{text}` may only use x, q, A, d"
        )));
    }
    Ok(e.substitute("x", &ScalarExpr::Coord(1)))
}

impl TwoSlit {
    pub fn new(cfg: TwoSlitConfig) -> Result<Self, InterferenceError> {
        let positive = [("A", cfg.a), ("d", cfg.d), ("norm", cfg.norm)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(InterferenceError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !cfg.q.is_finite() {
            return Err(InterferenceError::InvalidConfig(format!(
                "q must be finite, got {}",
                cfg.q
            )));
        }
        if cfg.shadow_phases.iter().flatten().any(|c| !c.is_finite()) {
            return Err(InterferenceError::InvalidConfig(
                "shadow phases must be finite".into(),
            ));
        }
        let alpha = compile_phase(&cfg.alpha)?;
        let beta = compile_phase(&cfg.beta)?;
        let bindings = ParamBindings::new()
            .with("q", cfg.q)?
            .with("A", cfg.a)?
            .with("d", cfg.d)?;
        Ok(Self {
            cfg,
            alpha,
            beta,
            bindings,
        })
    }

    pub fn config(&self) -> &TwoSlitConfig {
        &self.cfg
    }

    pub fn n(&self) -> usize {
        self.cfg.n()
    }

    fn envelopes(&self, x: f64) -> (f64, f64) {
        let (a, d) = (self.cfg.a, self.cfg.d);
        (
            (-a * (x + d) * (x + d)).exp(),
            (-a * (x - d) * (x - d)).exp(),
        )
    }

    /// `(α(x), β(x))`.
    pub fn real_phases(&self, x: f64) -> Result<(f64, f64), InterferenceError> {
        let p = SpacetimePoint::new(0.0, x, 0.0, 0.0);
        Ok((
            self.alpha.eval(&p, &self.bindings)?,
            self.beta.eval(&p, &self.bindings)?,
        ))
    }

    fn shadow(&self, m: usize) -> Result<[f64; 2], InterferenceError> {
        if m == 0 || m > self.n() {
            return Err(InterferenceError::InvalidShadowIndex { m, n: self.n() });
        }
        Ok(self.cfg.shadow_phases[m - 1])
    }

    /// `norm (g₊² + g₋² + 2 g₊ g₋ cos Δ)`, clamped at zero.
    fn pair(&self, x: f64, delta: f64) -> f64 {
        let (gp, gm) = self.envelopes(x);
        let v = self.cfg.norm * (gp * gp + gm * gm + 2.0 * gp * gm * delta.cos());
        v.max(0.0)
    }
}

/// Which particle an amplitude belongs to; shadows are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Particle {
    Real,
    Shadow(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slit {
    /// At `x = -d`.
    One,
    /// At `x = +d`.
    Two,
}

/// `⟨x|a⟩⟨a|s⟩` for one particle through one slit. Paths from the source
/// through the other slit's screen state do not exist, so each particle has
/// exactly two amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathAmplitude(pub Complex64);

impl PathAmplitude {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }
}

pub fn slit_amplitude(
    model: &TwoSlit,
    particle: Particle,
    slit: Slit,
    x: f64,
) -> Result<PathAmplitude, InterferenceError> {
    let (gp, gm) = model.envelopes(x);
    let envelope = match slit {
        Slit::One => gp,
        Slit::Two => gm,
    };
    let phase = match particle {
        Particle::Real => {
            let (alpha, beta) = model.real_phases(x)?;
            match slit {
                Slit::One => alpha,
                Slit::Two => beta,
            }
        }
        Particle::Shadow(m) => {
            let [c1, c2] = model.shadow(m)?;
            match slit {
                Slit::One => c1,
                Slit::Two => c2,
            }
        }
    };
    Ok(PathAmplitude(Complex64::from_polar(envelope, phase)))
}

/// `8 e^{2κx²} (1 + cos(x⁰ + x³))`.
pub fn ghost_real_intensity(kappa: f64, p: &SpacetimePoint) -> Result<f64, InterferenceError> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(InterferenceError::InvalidKappa(kappa));
    }
    let [x0, _, x2, x3] = p.0;
    Ok(8.0 * (2.0 * kappa * x2).exp() * (1.0 + (x0 + x3).cos()))
}

/// `norm |ψ₁ + ψ₂|²`.
pub fn real_pair_intensity(model: &TwoSlit, x: f64) -> Result<f64, InterferenceError> {
    let (alpha, beta) = model.real_phases(x)?;
    Ok(model.pair(x, alpha - beta))
}

/// `norm |θ₁⁽ᵐ⁾ + θ₂⁽ᵐ⁾|²`; the phase difference is constant, so there are
/// no fringes.
pub fn shadow_pair_intensity(model: &TwoSlit, m: usize, x: f64) -> Result<f64, InterferenceError> {
    let [c1, c2] = model.shadow(m)?;
    Ok(model.pair(x, c1 - c2))
}

fn shadow_product(model: &TwoSlit, x: f64) -> Result<f64, InterferenceError> {
    let mut acc = 1.0;
    for m in 1..=model.n() {
        acc *= shadow_pair_intensity(model, m, x)?;
    }
    Ok(acc)
}

/// `norm |ψ₁ + ψ₂|² · Π_m norm |θ₁⁽ᵐ⁾ + θ₂⁽ᵐ⁾|²`.
pub fn combined_intensity(model: &TwoSlit, x: f64) -> Result<f64, InterferenceError> {
    Ok(real_pair_intensity(model, x)? * shadow_product(model, x)?)
}

/// `norm (|ψ₁|² + |ψ₂|²) · Π_m norm |θ₁⁽ᵐ⁾ + θ₂⁽ᵐ⁾|²`, the real particle's
/// path being known.
pub fn which_way_intensity(model: &TwoSlit, x: f64) -> Result<f64, InterferenceError> {
    let (gp, gm) = model.envelopes(x);
    Ok(model.cfg.norm * (gp * gp + gm * gm) * shadow_product(model, x)?)
}

/// `norm^(n+1) |Σ_assignments Π_particles amplitude|²`, summed term by term.
pub fn expand_bruteforce(model: &TwoSlit, x: f64) -> Result<f64, InterferenceError> {
    let n = model.n();
    if n > MAX_BRUTEFORCE_SHADOWS {
        return Err(InterferenceError::TooManyShadows {
            n,
            max: MAX_BRUTEFORCE_SHADOWS,
        });
    }
    let mut amps = Vec::with_capacity(n + 1);
    let particles = std::iter::once(Particle::Real).chain((1..=n).map(Particle::Shadow));
    for particle in particles {
        amps.push([
            slit_amplitude(model, particle, Slit::One, x)?.value(),
            slit_amplitude(model, particle, Slit::Two, x)?.value(),
        ]);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 0u32..(1u32 << (n + 1)) {
        let mut term = Complex64::new(1.0, 0.0);
        for (k, pair) in amps.iter().enumerate() {
            term *= pair[((mask >> k) & 1) as usize];
        }
        total += term;
    }
    Ok(model.cfg.norm.powi(n as i32 + 1) * total.norm_sqr())
}

/// Intensity sampled on a uniform screen grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityProfile {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl IntensityProfile {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    Real,
    /// Shadow factor `m` alone (1-based).
    Shadow(usize),
    Combined,
    WhichWay,
}

impl Formula {
    pub fn label(&self) -> String {
        match self {
            Formula::Real => "real".into(),
            Formula::Shadow(m) => format!("shadow_{m}"),
            Formula::Combined => "combined".into(),
            Formula::WhichWay => "whichway".into(),
        }
    }
}

/// `count` points from `lo` to `hi` inclusive. A range symmetric about zero
/// gives exactly mirrored points.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, InterferenceError> {
    if count < 2 {
        return Err(InterferenceError::TooFewSamples {
            need: 2,
            got: count,
        });
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(InterferenceError::InvalidRange { lo, hi });
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let i = i as f64;
            (lo * (last - i) + hi * i) / last
        })
        .collect())
}

/// Samples one of the two-slit formulas. With `normalize`, each shadow factor
/// is divided by its maximum over the sampled points first.
pub fn sample_profile(
    model: &TwoSlit,
    formula: Formula,
    range: (f64, f64),
    count: usize,
    normalize: bool,
) -> Result<IntensityProfile, InterferenceError> {
    let xs = uniform_grid(range.0, range.1, count)?;
    let factor = |m: usize| -> Result<Vec<f64>, InterferenceError> {
        let mut v: Vec<f64> = xs
            .iter()
            .map(|&x| shadow_pair_intensity(model, m, x))
            .collect::<Result<_, _>>()?;
        if normalize {
            let peak = v.iter().copied().fold(0.0, f64::max);
            if peak > 0.0 {
                v.iter_mut().for_each(|y| *y /= peak);
            }
        }
        Ok(v)
    };
    let shadows = |values: &mut Vec<f64>| -> Result<(), InterferenceError> {
        for m in 1..=model.n() {
            for (y, s) in values.iter_mut().zip(factor(m)?) {
                *y *= s;
            }
        }
        Ok(())
    };
    let values = match formula {
        Formula::Real => xs
            .iter()
            .map(|&x| real_pair_intensity(model, x))
            .collect::<Result<_, _>>()?,
        Formula::Shadow(m) => {
            model.shadow(m)?;
            factor(m)?
        }
        Formula::Combined => {
            let mut v = xs
                .iter()
                .map(|&x| real_pair_intensity(model, x))
                .collect::<Result<Vec<_>, _>>()?;
            shadows(&mut v)?;
            v
        }
        Formula::WhichWay => {
            let mut v: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    let (gp, gm) = model.envelopes(x);
                    model.cfg.norm * (gp * gp + gm * gm)
                })
                .collect();
            shadows(&mut v)?;
            v
        }
    };
    Ok(IntensityProfile {
        xs,
        values,
        label: formula.label(),
    })
}

/// `ghost_real_intensity` along `x³` with `x⁰`, `x¹`, `x²` fixed.
pub fn ghost_real_profile(
    kappa: f64,
    x0: f64,
    x2: f64,
    x3_range: (f64, f64),
    count: usize,
) -> Result<IntensityProfile, InterferenceError> {
    let xs = uniform_grid(x3_range.0, x3_range.1, count)?;
    let values = xs
        .iter()
        .map(|&x3| ghost_real_intensity(kappa, &SpacetimePoint::new(x0, 0.0, x2, x3)))
        .collect::<Result<_, _>>()?;
    Ok(IntensityProfile {
        xs,
        values,
        label: "ghostreal".into(),
    })
}

/// Interior strict local extrema of a profile, by sample index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Extrema {
    pub minima: Vec<usize>,
    pub maxima: Vec<usize>,
}

impl Extrema {
    pub fn minima_x(&self, profile: &IntensityProfile) -> Vec<f64> {
        self.minima.iter().map(|&i| profile.xs[i]).collect()
    }

    pub fn maxima_x(&self, profile: &IntensityProfile) -> Vec<f64> {
        self.maxima.iter().map(|&i| profile.xs[i]).collect()
    }
}

/// Three-point comparison; a plateau counts once, at its leftmost sample, if
/// both of its neighbours lie on the same side. Endpoints are never extrema.
pub fn locate_extrema(profile: &IntensityProfile) -> Result<Extrema, InterferenceError> {
    let v = &profile.values;
    if v.len() < 3 {
        return Err(InterferenceError::TooFewSamples {
            need: 3,
            got: v.len(),
        });
    }
    let mut out = Extrema::default();
    let mut i = 1;
    while i < v.len() - 1 {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        if j == v.len() - 1 {
            break;
        }
        let (left, right) = (v[i - 1], v[j + 1]);
        if v[i] > left && v[i] > right {
            out.maxima.push(i);
        } else if v[i] < left && v[i] < right {
            out.minima.push(i);
        }
        i = j + 1;
    }
    Ok(out)
}
