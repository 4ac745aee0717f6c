use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::Rng;

use cspline_core::algebra::{pure_state_grid, AlgebraElement, AlgebraSpec, PureState};
use cspline_core::forms::{self, ModuleOperator, SesquilinearForm};
use cspline_core::hilbert_module::{functional_representer, inner_product, ModuleSpace};
use cspline_core::linalg::CMat;
use cspline_core::localization;
use cspline_core::random::{self, InstanceRng};
use cspline_core::spline::{self, SplineProblem};

fn specs() -> impl Strategy<Value = AlgebraSpec> {
    prop::collection::vec(1usize..=3, 1..=3).prop_map(|b| AlgebraSpec::new(b).unwrap())
}

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

fn state(rng: &mut InstanceRng, spec: &AlgebraSpec) -> PureState {
    let grid = pure_state_grid(spec, 4, rng.random());
    grid[rng.random_range(0..grid.len())].clone()
}

fn space(rng: &mut InstanceRng) -> ModuleSpace {
    random::space(rng, 24)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn adjoint_is_an_involution(spec in specs(), seed in seeds()) {
        let a = random::element(&mut random::rng(seed), &spec);
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn c_star_identity(spec in specs(), seed in seeds()) {
        let a = random::element(&mut random::rng(seed), &spec);
        let n = a.norm();
        let lhs = a.adjoint().mul(&a).unwrap().norm();
        prop_assert!((lhs - n * n).abs() <= 1e-9 * n * n);
    }

    #[test]
    fn positivity_cone(spec in specs(), seed in seeds()) {
        let mut rng = random::rng(seed);
        let a = random::element(&mut rng, &spec);
        prop_assert!(a.adjoint().mul(&a).unwrap().is_positive(1e-10));
        let h = a.add(&a.adjoint()).unwrap();
        let neg = h.scale(C64::new(-1.0, 0.0));
        if h.is_positive(1e-10) && neg.is_positive(1e-10) {
            prop_assert!(h.norm() <= 1e-9);
        }
        prop_assert!(!(h.is_positive(0.0) && neg.is_positive(0.0)) || h.norm() == 0.0);
    }

    #[test]
    fn states_are_linear_positive_unital(spec in specs(), seed in seeds()) {
        let mut rng = random::rng(seed);
        let f = state(&mut rng, &spec);
        let a = random::element(&mut rng, &spec);
        let b = random::element(&mut rng, &spec);
        let z = random::complex(&mut rng);
        let lin = f.evaluate(&a.scale(z).add(&b).unwrap()) - (z * f.evaluate(&a) + f.evaluate(&b));
        prop_assert!(lin.norm() <= 1e-10 * (1.0 + a.norm() * z.norm() + b.norm()));
        prop_assert!((f.evaluate(&a.adjoint()) - f.evaluate(&a).conj()).norm() <= 1e-12 * (1.0 + a.norm()));
        let p = f.evaluate(&a.adjoint().mul(&a).unwrap());
        prop_assert!(p.re >= -1e-12 && p.im.abs() <= 1e-10 * (1.0 + a.norm() * a.norm()));
        prop_assert!((f.evaluate(&AlgebraElement::identity(&spec)) - C64::new(1.0, 0.0)).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn submodule_projector_invariants(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let y = random::submodule(&mut rng, &sp);
        let p = y.projector();
        prop_assert!((&p * &p - &p).norm() <= 1e-9);
        prop_assert!((&p - p.adjoint()).norm() <= 1e-9);
        for b in sp.spec().basis() {
            let r = sp.right_action_flat(&b);
            prop_assert!((&p * &r - &r * &p).norm() <= 1e-9);
        }
        let q = y.orthogonal_complement().projector();
        prop_assert!((p + q - CMat::identity(sp.flat_dim(), sp.flat_dim())).norm() <= 1e-12);
    }

    #[test]
    fn projection_is_module_orthogonal(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let y = random::submodule(&mut rng, &sp);
        let x = random::vector(&mut rng, &sp);
        let r = x.sub(&y.project(&x));
        for g in y.basis_vectors() {
            prop_assert!(inner_product(&sp, &r, &g).unwrap().norm() <= 1e-9 * (1.0 + x.flat_norm()));
        }
    }

    #[test]
    fn self_duality_roundtrip(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let x = random::vector(&mut rng, &sp);
        let back = functional_representer(&sp, &x.hat(&sp), 1e-9).unwrap();
        prop_assert!(back.sub(&x).flat_norm() <= 1e-10 * (1.0 + x.flat_norm()));
    }

    #[test]
    fn riesz_roundtrip(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let b = SesquilinearForm::new(random::operator(&mut rng, &sp));
        let t = SesquilinearForm::riesz_from_values(&sp, &b.values()).unwrap();
        prop_assert!((t.flat_t() - b.flat_t()).norm() <= 1e-10 * (1.0 + b.flat_t().norm()));
    }

    #[test]
    fn radicals_coincide_for_positive_forms(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let y = random::nonzero_submodule(&mut rng, &sp);
        let b = random::positive_form_on(&mut rng, &y, true);
        prop_assert!(forms::is_positive_on(&b, &y, 1e-9).unwrap());
        let right = forms::right_radical(&b, &y).unwrap();
        let left = forms::left_radical(&b, &y).unwrap();
        prop_assert!(right.distance(&left) <= 1e-8);
        prop_assert!(right.is_subset_of(&y, 1e-8) && left.is_subset_of(&y, 1e-8));
        for v in right.basis_vectors() {
            prop_assert!(b.apply(&v, &v).unwrap().norm() <= 1e-9);
        }
        for _ in 0..8 {
            let v = y.project(&random::vector(&mut rng, &sp));
            let scale = 1.0 / (1.0 + v.flat_norm());
            let v = v.scale(C64::new(scale, 0.0));
            prop_assert_eq!(forms::null_membership(&b, &v, 1e-7), right.contains(&v, 1e-7));
        }
        for v in right.basis_vectors() {
            prop_assert!(forms::null_membership(&b, &v, 1e-7));
        }
    }

    #[test]
    fn adjoint_swaps_radicals(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let cut = ModuleOperator::projection(&random::submodule(&mut rng, &sp));
        let b = SesquilinearForm::new(cut.compose(&random::operator(&mut rng, &sp)));
        let full = cspline_core::hilbert_module::Submodule::full(&sp);
        let b2 = b.adjoint_form();
        let d1 = forms::left_radical(&b, &full).unwrap().distance(&forms::right_radical(&b2, &full).unwrap());
        let d2 = forms::right_radical(&b, &full).unwrap().distance(&forms::left_radical(&b2, &full).unwrap());
        prop_assert!(d1 <= 1e-8 && d2 <= 1e-8);
    }

    #[test]
    fn normal_forms_have_equal_radicals(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let b = random::normal_form(&mut rng, &sp);
        let full = cspline_core::hilbert_module::Submodule::full(&sp);
        prop_assert!(forms::is_normal_on(&b, &full, 1e-9).unwrap());
        let r = forms::right_radical(&b, &full).unwrap();
        let l = forms::left_radical(&b, &full).unwrap();
        prop_assert!(r.distance(&l) <= 1e-8);
    }

    #[test]
    fn solutions_are_sound_and_shift_by_radical(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let y = random::submodule(&mut rng, &sp);
        let b = if rng.random_bool(0.5) {
            random::positive_form_on(&mut rng, &y, true)
        } else {
            SesquilinearForm::new(random::operator(&mut rng, &sp))
        };
        let x = random::vector(&mut rng, &sp);
        let p = SplineProblem::new(y.clone(), b, x.clone(), spline::DEFAULT_TOL).unwrap();
        let r = spline::solve(&p);
        if let Some(s) = &r.solution {
            let scale = 1.0 + x.flat_norm();
            prop_assert!(r.residual <= p.tol() * scale);
            prop_assert!(y.contains(&s.sub(&x), p.tol() * scale));
            let rad = forms::right_radical(p.form(), &y).unwrap();
            for v in rad.basis_vectors() {
                prop_assert!(spline::spline_residual(&p, &s.add(&v)) <= 2.0 * p.tol() * scale);
            }
        }
    }

    #[test]
    fn positive_plus_necessary_is_sufficient(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let y = random::nonzero_submodule(&mut rng, &sp);
        let b = random::positive_form_on(&mut rng, &y, true);
        let p = SplineProblem::new(y, b, random::vector(&mut rng, &sp), spline::DEFAULT_TOL).unwrap();
        if spline::check_necessary_condition(&p) {
            for _ in 0..5 {
                let q = p.with_target(random::vector(&mut rng, &sp)).unwrap();
                prop_assert!(spline::check_existence(&q));
            }
        }
    }

    #[test]
    fn localized_gram_and_identities(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let f = state(&mut rng, sp.spec());
        let h = localization::localize(&f, &sp);
        prop_assert!(h.min_gram_eigenvalue() >= -1e-10);
        let x = random::vector(&mut rng, &sp);
        let y = random::vector(&mut rng, &sp);
        let direct = f.evaluate(&inner_product(&sp, &y, &x).unwrap());
        prop_assert!((h.inner(&x, &y) - direct).norm() <= 1e-10 * (1.0 + x.flat_norm() * y.flat_norm()));
        prop_assert!(localization::localized_functional_identity(&f, &x, &y).unwrap() <= 1e-10 * (1.0 + x.flat_norm() * y.flat_norm()));
    }

    #[test]
    fn localized_cauchy_schwarz(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let full = cspline_core::hilbert_module::Submodule::full(&sp);
        let b = random::positive_form_on(&mut rng, &full, true);
        let f = state(&mut rng, sp.spec());
        let x = random::vector(&mut rng, &sp);
        let y = random::vector(&mut rng, &sp);
        let fxy = f.evaluate(&b.apply(&x, &y).unwrap()).norm_sqr();
        let fxx = f.evaluate(&b.apply(&x, &x).unwrap()).re;
        let fyy = f.evaluate(&b.apply(&y, &y).unwrap()).re;
        prop_assert!(fxy <= fxx * fyy + 1e-9 * (1.0 + fxx * fyy));
    }

    #[test]
    fn ratios_bounded_by_normalized_form(seed in seeds()) {
        let mut rng = random::rng(seed);
        let sp = space(&mut rng);
        let y = random::nonzero_submodule(&mut rng, &sp);
        let b = random::positive_form_on(&mut rng, &y, false);
        let t = b.operator().scale(C64::new(1.0 / b.operator().norm(), 0.0));
        let b = SesquilinearForm::new(t);
        let f = state(&mut rng, sp.spec());
        let x = random::vector(&mut rng, &sp);
        for v in y.basis_vectors() {
            if let Some(r) = localization::coercivity_ratio(&b, &f, &x, &v) {
                prop_assert!(r <= 1.0 + 1e-9);
            }
        }
    }
}

#[test]
fn operator_from_entries_roundtrip() {
    let mut rng = random::rng(1);
    let sp = space(&mut rng);
    let t = random::operator(&mut rng, &sp);
    let back = ModuleOperator::from_entries(&sp, &t.entries()).unwrap();
    assert!((back.flat() - t.flat()).norm() <= 1e-12);
}
