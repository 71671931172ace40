use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ghostspin_core::fieldexpr::ParamBindings;
use ghostspin_core::ghost_classifier::{classify_numeric, classify_structural, Method, Verdict};
use ghostspin_core::interference::{ghost_real_intensity, ghost_real_profile, locate_extrema};
use ghostspin_core::spinor_field::definition::FieldDefinition;
use ghostspin_core::spinor_field::{
    current, energy_momentum, grid_scan, negated, superpose, ComplexScalarField, LightlikeFamily,
    SampleGrid, SpacetimePoint, SpinorField,
};

fn none() -> ParamBindings {
    ParamBindings::new()
}

#[test]
fn lightlike_ghosts_with_real_profiles_classify_as_ghosts() {
    let grid = SampleGrid::cube(-1.0, 1.0, 5).unwrap();
    for f in ["0", "0.3*s", "sin(s)", "-0.2*s^2"] {
        let family = LightlikeFamily::parse(0.8, f, "0").unwrap();
        let field = family.expand();
        let structural = classify_structural(&field, 0.8, &grid, &none()).unwrap();
        let numeric = classify_numeric(&field, 0.8, &grid, &none()).unwrap();
        assert_eq!(structural.verdict, Verdict::Ghost, "f = {f}");
        assert_eq!(numeric.verdict, Verdict::Ghost, "f = {f}");
    }
}

#[test]
fn lightlike_phases_classify_as_real() {
    let grid = SampleGrid::cube(-1.0, 1.0, 5).unwrap();
    for g in ["s", "2*s", "s + 0.1*s^2"] {
        let field = SpinorField::lightlike(1.2, "0", g).unwrap();
        let structural = classify_structural(&field, 1.2, &grid, &none()).unwrap();
        let numeric = classify_numeric(&field, 1.2, &grid, &none()).unwrap();
        assert_eq!(structural.verdict, Verdict::NonGhost, "g = {g}");
        assert_eq!(numeric.verdict, Verdict::NonGhost, "g = {g}");
    }
}

#[test]
fn field_minus_itself_has_no_current() {
    let field = SpinorField::lightlike(1.0, "0.1*s", "s").unwrap();
    let zero = superpose(vec![field.clone(), negated(&field)]).unwrap();
    let p = SpacetimePoint::new(0.2, -0.4, 0.1, 0.7);
    assert_eq!(current(&zero, &p, &none()).unwrap().max_abs(), 0.0);
    assert_eq!(energy_momentum(&zero, &p, &none()).unwrap().max_abs(), 0.0);
}

#[test]
fn ghost_plus_real_density_matches_closed_form_on_grid() {
    let kappa = 0.6;
    let sum = superpose(vec![
        SpinorField::lightlike(kappa, "0", "s").unwrap(),
        SpinorField::lightlike(kappa, "0", "0").unwrap(),
    ])
    .unwrap();
    let grid = SampleGrid::cube(-1.0, 1.0, 4).unwrap();
    for p in grid.points() {
        let j0 = current(&sum, &p, &none()).unwrap().density();
        let closed = 8.0 * (2.0 * kappa * p.0[2]).exp() * (1.0 + (p.0[0] + p.0[3]).cos());
        assert!((j0 - closed).abs() <= 1e-12 * closed.max(1.0));
        assert!(
            (ghost_real_intensity(kappa, &p).unwrap() - closed).abs() <= 1e-12 * closed.max(1.0)
        );
    }
}

#[test]
fn ghost_plus_real_fringe_period_is_two_pi() {
    let profile = ghost_real_profile(1.0, 0.5, 0.0, (0.0, 6.0 * PI), 3001).unwrap();
    let e = locate_extrema(&profile).unwrap();
    let minima = e.minima_x(&profile);
    assert_eq!(minima.len(), 3);
    for pair in minima.windows(2) {
        assert!((pair[1] - pair[0] - 2.0 * PI).abs() <= 1e-2);
    }
}

#[test]
fn sum_of_real_fluctuation_terms_is_componentwise_ghost() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let grid = SampleGrid::cube(-1.0, 1.0, 4).unwrap();
    let kappa = 1.0;
    for _ in 0..5 {
        let a = rng.gen_range(0.2..1.0);
        let psi = SpinorField::separable(
            LightlikeFamily::spinor(),
            ComplexScalarField::parse_cartesian(&format!("exp(x2)*{a}*(x0+x3)"), "exp(x2)")
                .unwrap(),
        );
        let theta = SpinorField::separable(
            LightlikeFamily::spinor(),
            ComplexScalarField::parse_cartesian(&format!("exp(x2) - exp(x2)*{a}*(x0+x3)"), "0")
                .unwrap(),
        );
        let sum = superpose(vec![psi, theta]).unwrap();
        let verdict = classify_structural(&sum, kappa, &grid, &none()).unwrap();
        assert_eq!(verdict.verdict, Verdict::Ghost);
        assert_eq!(verdict.method, Method::Theorem2Structural);
        assert!(grid_scan(&sum, kappa, &grid, &none()).unwrap().max_abs_t <= 1e-12);
    }
}

#[test]
fn definition_built_field_matches_direct_construction() {
    let def: FieldDefinition =
        serde_json::from_str(r#"{"type":"lightlike","f":"0","g":"s"}"#).unwrap();
    let (field, bindings) = def.build(Some(0.9)).unwrap();
    let direct = SpinorField::lightlike(0.9, "0", "s").unwrap();
    let p = SpacetimePoint::new(0.3, 0.1, -0.2, 0.4);
    let a = field.evaluate(&p, &bindings).unwrap();
    let b = direct.evaluate(&p, &none()).unwrap();
    assert!((a - b).max_abs() <= 1e-15);
    let scaled = direct
        .scaled(Complex64::new(0.0, 2.0))
        .evaluate(&p, &none())
        .unwrap();
    assert!((scaled - b.scale(Complex64::new(0.0, 2.0))).max_abs() <= 1e-15);
}
