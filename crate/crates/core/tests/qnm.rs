mod common;

use common::{c, random_rational, rel, rng, Rational};
use mmcert::certify::fabry_perot_shift;
use mmcert::qnm::{
    build_expansion, compute_residue, convergence_report, evaluate_truncated, find_poles, Counting, Fallible,
    Meromorphic, ScanRegion,
};
use mmcert::witness::{single_mode_levshift, LevelShiftCurve};
use mmcert::{Error, Window, C64};

#[test]
fn single_constructed_pole() {
    let f = |z: C64| (z - c(5.0, -0.5)).inv();
    let found = find_poles(&f, &ScanRegion::new(0.0, 10.0, -2.0, 0.0).unwrap()).unwrap();
    assert_eq!(found.poles.len(), 1);
    assert!((found.poles[0].omega - c(5.0, -0.5)).norm() < 1e-10);
    assert!(found.poles[0].residual < 1e-10);
}

#[test]
fn two_constructed_poles() {
    let (z1, z2) = (c(3.0, -0.2), c(7.0, -1.1));
    let f = Rational { poles: vec![z1, z2], residues: vec![c(1.0, 0.0), c(2.0, 1.0)], constant: c(0.0, 0.0) };
    let region = ScanRegion::new(0.0, 10.0, -2.0, 0.0).unwrap();
    let found = find_poles(&f, &region).unwrap();
    let got: Vec<C64> = found.poles.iter().map(|p| p.omega).collect();
    assert_eq!(got.len(), 2, "{got:?}");
    assert!((got[0] - z1).norm() < 1e-10 && (got[1] - z2).norm() < 1e-10);
    // The pair has one zero between the poles.
    assert_eq!(found.zeros, 1);
}

#[test]
fn single_mode_levshift_has_one_pole() {
    let f = |z: C64| c(0.1, 0.05).norm_sqr() / (z - 10.0 + c(0.0, 0.2));
    let found = find_poles(&f, &ScanRegion::lower_half(5.0, 15.0, 1.2).unwrap()).unwrap();
    assert_eq!(found.poles.len(), 1);
    assert!((found.poles[0].omega - c(10.0, -0.2)).norm() < 1e-10);
    // The same model written as a real-axis formula agrees with the pole form.
    assert!(rel(f(c(9.7, 0.0)), single_mode_levshift(c(0.1, 0.05), 10.0, 0.4, 9.7)) < 1e-14);
}

#[test]
fn rational_oracle() {
    let mut r = rng(2024);
    let region = ScanRegion::new(0.0, 10.0, -2.0, 0.1).unwrap();
    let window = Window::new(0.0, 10.0).unwrap();
    for case in 0..200 {
        let f = random_rational(&mut r);
        let e = build_expansion(&f, &region, window).unwrap();
        assert_eq!(e.poles.len(), f.poles.len(), "case {case}: {:?} vs {:?}", e.poles, f.poles);
        for (p, r) in f.poles.iter().zip(&f.residues) {
            let got = e.poles.iter().min_by(|a, b| (a.omega - p).norm().total_cmp(&(b.omega - p).norm())).unwrap();
            assert!((got.omega - p).norm() < 1e-10, "case {case}: pole {} vs {p}", got.omega);
            assert!(rel(got.residue, *r) < 1e-10, "case {case}: residue {} vs {r}", got.residue);
        }
        assert!(e.constant.norm() < 1e-10 * e.scale);
    }
}

#[test]
fn residue_examples() {
    let z0 = c(1.3, -0.4);
    let (r, _) = compute_residue(&|z: C64| (z - z0).inv(), z0, 0.1, 64).unwrap();
    assert!((r - 1.0).norm() < 1e-12);
    let (r, _) = compute_residue(&|z: C64| z.exp(), c(-0.7, 2.0), 0.5, 64).unwrap();
    assert!(r.norm() < 1e-12);
    let f = |z: C64| c(2.0, 1.0) / (z - z0) + z.sin() * z.exp() / (z - c(5.0, 3.0));
    let (r, err) = compute_residue(&f, z0, 0.2, 64).unwrap();
    assert!(rel(r, c(2.0, 1.0)) < 1e-10, "{r}");
    assert!(err < 1e-10);
    assert!(compute_residue(&f, z0, 0.0, 64).is_err());
    assert!(compute_residue(&f, z0, 0.1, 8).is_err());
}

#[test]
fn residue_error_estimate_flags_a_coarse_circle() {
    // A second pole just outside a large circle slows the trapezoid rule.
    let f = |z: C64| z.inv() + (z - c(1.05, 0.0)).inv();
    let (_, err) = compute_residue(&f, c(0.0, 0.0), 1.0, 16).unwrap();
    assert!(err > 1e-3);
}

#[test]
fn fabry_perot_residues_do_not_depend_on_the_radius() {
    let ls = fabry_perot_shift(4.0, 1).unwrap();
    let region = ScanRegion::lower_half(0.5, 3.25, 2.5).unwrap();
    let found = find_poles(&ls, &region).unwrap();
    assert!(!found.poles.is_empty());
    for p in &found.poles {
        let rho = 0.05;
        let (a, _) = compute_residue(&ls, p.omega, rho, 256).unwrap();
        let (b, _) = compute_residue(&ls, p.omega, rho / 2.0, 256).unwrap();
        assert!(rel(a, b) < 1e-9, "{}: {a} vs {b}", p.omega);
    }
}

#[test]
fn double_pole_is_rejected() {
    let f = |z: C64| (z - c(4.0, -0.3)).powi(-2);
    let err = find_poles(&f, &ScanRegion::new(0.0, 10.0, -2.0, 0.0).unwrap()).unwrap_err();
    assert!(matches!(err, Error::HigherOrderPole { order: 2, .. }), "{err}");
}

#[test]
fn pole_on_the_boundary_is_reported() {
    let f = |z: C64| (z - c(5.0, 0.0)).inv();
    let err = find_poles(&f, &ScanRegion::new(0.0, 10.0, -2.0, 0.0).unwrap()).unwrap_err();
    assert!(matches!(err, Error::UnresolvedRegion { .. }), "{err}");
}

#[test]
fn errors_from_the_evaluator_propagate() {
    let f = Fallible(|z: C64| if z.im < -1.0 { Err(Error::Overflow { layer: 0, exponent: 800.0 }) } else { Ok(z.exp()) });
    assert!(matches!(find_poles(&f, &ScanRegion::new(0.0, 1.0, -2.0, 0.0).unwrap()), Err(Error::Overflow { .. })));
    // Near-pole failures on the contour mean the boundary must move.
    let f = Fallible(|z: C64| if z.im < -1.0 { Err(Error::NearPole { omega: z }) } else { Ok(z.exp()) });
    assert!(matches!(find_poles(&f, &ScanRegion::new(0.0, 1.0, -2.0, 0.0).unwrap()), Err(Error::UnresolvedRegion { .. })));
}

#[test]
fn found_poles_are_separated_by_the_dedupe_radius() {
    let mut r = rng(5);
    let region = ScanRegion::new(0.0, 10.0, -2.0, 0.1).unwrap();
    assert!((region.dedupe() - 1e-5).abs() < 1e-18);
    for _ in 0..10 {
        let f = random_rational(&mut r);
        let found = find_poles(&f, &region).unwrap();
        for (i, a) in found.poles.iter().enumerate() {
            for b in &found.poles[i + 1..] {
                assert!((a.omega - b.omega).norm() > region.dedupe());
            }
        }
        let sorted = found.poles.windows(2).all(|w| w[0].omega.re <= w[1].omega.re);
        assert!(sorted);
    }
}

#[test]
fn search_is_deterministic() {
    let ls = fabry_perot_shift(6.0, 1).unwrap();
    let region = ScanRegion::lower_half(-4.25, 4.25, 2.5).unwrap();
    let a = find_poles(&ls, &region).unwrap();
    let b = find_poles(&ls, &region).unwrap();
    assert_eq!(a, b);
}

#[test]
fn branch_cuts_are_refused_or_cleared() {
    let region = ScanRegion::lower_half(0.0, 10.0, 1.0).unwrap();
    assert_eq!(region.crossing_cut(&[c(4.0, 0.0)]), Some(c(4.0, 0.0)));
    // Cuts hang downward: a branch point below the region does not cross it.
    assert_eq!(region.crossing_cut(&[c(4.0, -3.0)]), None);
    assert_eq!(region.crossing_cut(&[c(12.0, 0.0)]), None);

    let clipped = region.clear_of_cuts(&[c(2.0, 0.0), c(9.0, 0.0)], 4.0, 6.0).unwrap();
    assert_eq!(clipped.crossing_cut(&[c(2.0, 0.0), c(9.0, 0.0)]), None);
    assert!(clipped.re_min > 2.0 && clipped.re_min < 4.0);
    assert!(clipped.re_max > 6.0 && clipped.re_max < 9.0);
    assert!(region.clear_of_cuts(&[c(5.0, 0.0)], 4.0, 6.0).is_err());

    struct Cut<F>(F);
    impl<F: Fn(C64) -> C64 + Sync> Meromorphic for Cut<F> {
        fn value(&self, z: C64) -> mmcert::Result<C64> {
            Ok((self.0)(z))
        }
        fn branch_points(&self) -> Vec<C64> {
            vec![c(4.0, 0.0)]
        }
    }
    let g = Cut(|z: C64| (z - 4.0).sqrt());
    assert!(matches!(find_poles(&g, &region), Err(Error::UnresolvedRegion { ref reason, .. }) if reason.contains("branch cut")));
}

#[test]
fn conjugate_symmetry_of_a_real_structure() {
    let ls = fabry_perot_shift(4.0, 1).unwrap();
    let region = ScanRegion::lower_half(-6.25, 6.25, 2.5).unwrap();
    let e = build_expansion(&ls, &region, Window::centered(1.4, 1.0).unwrap()).unwrap();
    let tiny = |p: &&mmcert::qnm::Pole| p.omega.re.abs() < 1e-9 * p.omega.norm();
    let positive: Vec<_> = e.poles.iter().filter(|p| !tiny(p) && p.omega.re > 0.0).collect();
    let negative: Vec<_> = e.poles.iter().filter(|p| !tiny(p) && p.omega.re < 0.0).collect();
    assert_eq!(positive.len(), negative.len());
    assert!(positive.len() >= 3);
    for p in positive {
        let m = negative
            .iter()
            .min_by(|a, b| (a.omega + p.omega.conj()).norm().total_cmp(&(b.omega + p.omega.conj()).norm()))
            .unwrap();
        assert!((m.omega + p.omega.conj()).norm() < 1e-10 * p.omega.norm());
        assert!(rel(m.residue, p.residue.conj()) < 1e-8, "{} vs {}", m.residue, p.residue);
    }
    // A pole on the imaginary axis is its own mirror and has a real residue.
    for p in e.poles.iter().filter(|p| tiny(p)) {
        assert!(p.residue.im.abs() < 1e-8 * p.residue.norm());
    }
    // Mirror pairs are counted together.
    for g in &e.groups {
        let own = g.len() == 1 && tiny(&&e.poles[g[0]]);
        assert!(g.len() == 2 || own, "{g:?}");
    }
}

#[test]
fn truncation_of_exact_rationals() {
    let f = Rational {
        poles: vec![c(2.0, -0.3), c(4.0, -0.5), c(6.5, -0.1)],
        residues: vec![c(0.5, 0.2), c(1.0, -0.3), c(0.2, 0.0)],
        constant: c(0.0, 0.0),
    };
    let mut e = build_expansion(&f, &ScanRegion::new(0.0, 10.0, -2.0, 0.1).unwrap(), Window::new(1.0, 7.0).unwrap()).unwrap();
    e.rank(4.0, Counting::Individual);
    assert!(e.constant_vanishing);
    for i in 0..=100 {
        let w = 1.0 + 0.06 * i as f64;
        let exact = f.value(w.into()).unwrap();
        assert!((evaluate_truncated(&e, 3, w).unwrap() - exact).norm() < 1e-12 * exact.norm().max(1.0));
    }
    assert!(evaluate_truncated(&e, 4, 1.0).is_err());

    let single = |z: C64| 0.04 / (z - c(10.0, -0.2));
    let e = build_expansion(&single, &ScanRegion::lower_half(5.0, 15.0, 1.0).unwrap(), Window::centered(10.0, 1.0).unwrap())
        .unwrap();
    assert_eq!(e.poles.len(), 1);
    assert!(e.poles[0].residue.im.abs() < 1e-12 && (e.poles[0].residue.re - 0.04).abs() < 1e-12);
    assert!(e.constant.norm() < 1e-12);
    for w in [9.5, 9.9, 10.0, 10.3] {
        assert!(rel(evaluate_truncated(&e, 1, w).unwrap(), single(w.into())) < 1e-12);
    }
}

#[test]
fn convergence_examples() {
    let window = Window::centered(5.0, 1.0).unwrap();
    let single = |z: C64| 0.04 / (z - c(5.0, -0.1));
    let e = build_expansion(&single, &ScanRegion::lower_half(0.0, 10.0, 1.0).unwrap(), window).unwrap();
    let exact = LevelShiftCurve::sample(|w| Ok(single(w.into())), window, 2001).unwrap();
    assert_eq!(convergence_report(&e, &exact, 1e-6).unwrap().n_star, 1);

    // Second Lorentzian three widths-of-window away contributes a few percent.
    let two = |z: C64| 0.04 / (z - c(5.0, -0.1)) + 0.04 / (z - c(8.0, -0.1));
    let mut e = build_expansion(&two, &ScanRegion::lower_half(0.0, 10.0, 1.0).unwrap(), window).unwrap();
    e.rank(5.0, Counting::Individual);
    let exact = LevelShiftCurve::sample(|w| Ok(two(w.into())), window, 2001).unwrap();
    assert_eq!(convergence_report(&e, &exact, 0.1).unwrap().n_star, 1);
    let strict = convergence_report(&e, &exact, 1e-3).unwrap();
    assert_eq!(strict.n_star, 2);
    assert!(strict.errors[0] > 1e-3 && strict.errors[1] < 1e-10);

    // A pole outside the region leaves an error no truncation removes.
    let e = build_expansion(&two, &ScanRegion::lower_half(0.0, 7.0, 1.0).unwrap(), window).unwrap();
    assert!(matches!(convergence_report(&e, &exact, 1e-3), Err(Error::RegionTooSmall { .. })));
}

#[test]
fn fabry_perot_truncation_sweep() {
    let ls = fabry_perot_shift(4.0, 1).unwrap();
    let window = Window::centered(1.386, 1.0).unwrap();
    let mut e = build_expansion(&ls, &ScanRegion::lower_half(-30.25, 30.25, 2.5).unwrap(), window).unwrap();
    e.rank(1.386, Counting::MirrorPairs);
    let exact = LevelShiftCurve::sample(|w| ls.eval(w.into()), window, 2001).unwrap();
    let report = convergence_report(&e, &exact, 0.02).unwrap();
    println!("n_mirror = 4 truncation errors: {:?}", &report.errors[..7.min(report.errors.len())]);
    println!("N at 2%: {}", report.n_star);
    assert!(report.errors[0] > 0.02);
    assert!(report.n_star >= 2);
    assert!(report.errors[..7].windows(2).all(|w| w[1] <= w[0] * 1.5));
}
