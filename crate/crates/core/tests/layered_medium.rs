use std::f64::consts::PI;

use mmcert::layered_medium::{
    propagation_matrix, EmitterSpec, Layer, LayerStack, Mat2, Material, MaterialTable, Side, WaveProblem, XrayCavity,
};
use mmcert::{Error, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn vacuum_stack(thickness: f64) -> LayerStack {
    LayerStack::new(Material::vacuum(), vec![Layer::new(Material::vacuum(), thickness)], Material::vacuum(), None).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn mat_rel(a: &Mat2, b: &Mat2) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn empty_stack_transfer_matrix_is_identity() {
    let empty = LayerStack::new(Material::vacuum(), vec![], Material::vacuum(), None).unwrap();
    let p = WaveProblem::normal_incidence(empty).unwrap();
    for w in [0.3, 1.0, 7.5] {
        let m = p.transfer_matrix(w.into()).unwrap();
        assert!(mat_rel(&m, &Mat2::identity()) < 1e-15);
        assert_eq!(p.reflection(w.into()).unwrap(), c(0.0, 0.0));
    }
    let p = WaveProblem::normal_incidence(vacuum_stack(2.5)).unwrap();
    assert!(p.reflection(c(1.7, -0.2)).unwrap().norm() < 1e-15);
}

#[test]
fn single_interface_follows_fresnel() {
    let stack = LayerStack::new(Material::vacuum(), vec![], Material::constant("glass", c(2.0, 0.0)), None).unwrap();
    let p = WaveProblem::normal_incidence(stack).unwrap();
    for w in [0.1, 1.0, 13.0] {
        let r = p.reflection(w.into()).unwrap();
        assert!(rel(r, c(-1.0 / 3.0, 0.0)) < 1e-14, "{r}");
        assert!((p.reflectance(w).unwrap() - 1.0 / 9.0).abs() < 1e-14);
    }
}

#[test]
fn determinant_is_ratio_of_cladding_wavenumbers() {
    let stack = LayerStack::new(
        Material::constant("a", c(1.5, 0.01)),
        vec![Layer::new(Material::constant("b", c(3.0, 0.2)), 0.4)],
        Material::constant("c", c(2.2, 0.0)),
        None,
    )
    .unwrap();
    for k_par in [0.0, 0.3] {
        let p = WaveProblem::new(stack.clone(), k_par).unwrap();
        let w = c(1.3, -0.05);
        let det = p.transfer_matrix(w).unwrap().determinant();
        let ratio = p.cladding_kz(Side::Right, w).unwrap() / p.cladding_kz(Side::Left, w).unwrap();
        assert!(rel(det, ratio) < 1e-13);
    }
}

#[test]
fn two_layer_interior_matrix_composes_bitwise() {
    let a = Layer::new(Material::constant("a", c(2.0, 0.1)), 0.3);
    let b = Layer::new(Material::constant("b", c(1.4, 0.0)), 0.7);
    let both = WaveProblem::normal_incidence(
        LayerStack::new(Material::vacuum(), vec![a.clone(), b.clone()], Material::vacuum(), None).unwrap(),
    )
    .unwrap();
    let only = |l: &Layer| {
        WaveProblem::normal_incidence(LayerStack::new(Material::vacuum(), vec![l.clone()], Material::vacuum(), None).unwrap())
            .unwrap()
    };
    let w = c(2.1, -0.3);
    let lhs = both.interior_matrix(w).unwrap();
    let rhs = only(&a).interior_matrix(w).unwrap() * only(&b).interior_matrix(w).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn fabry_perot_builder_geometry() {
    let s = LayerStack::fabry_perot(1.0, 20.0).unwrap();
    assert_eq!(s.layers.len(), 3);
    assert!((s.total_thickness() - 1.02).abs() < 1e-15);
    let e = s.emitter.unwrap();
    assert!((e.position - 0.51).abs() < 1e-15);
    assert!(LayerStack::fabry_perot(1.0, 0.5).is_err());
    assert!(LayerStack::fabry_perot(-1.0, 4.0).is_err());
}

#[test]
fn unit_mirror_index_is_free_space() {
    let p = WaveProblem::normal_incidence(LayerStack::fabry_perot(1.0, 1.0).unwrap()).unwrap();
    for i in 1..50 {
        assert!(p.reflection((0.37 * i as f64).into()).unwrap().norm() < 1e-14);
    }
}

/// Interior local minima of sampled data.
fn minima(x: &[f64], y: &[f64]) -> Vec<f64> {
    (1..y.len() - 1).filter(|&i| y[i] < y[i - 1] && y[i] <= y[i + 1]).map(|i| x[i]).collect()
}

fn maxima(x: &[f64], y: &[f64]) -> Vec<f64> {
    (1..y.len() - 1).filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1]).map(|i| x[i]).collect()
}

/// Round-trip phase of a symmetric slab resonator from the Airy formula for
/// the reflection off one mirror slab, seen from the gap.
fn airy_round_trip_phase(n: f64, d: f64, gap: f64, k: f64) -> f64 {
    let r12 = (1.0 - n) / (1.0 + n);
    let e = C64::from_polar(1.0, 2.0 * n * k * d);
    let r = r12 * (1.0 - e) / (1.0 - r12 * r12 * e);
    (r * r * C64::from_polar(1.0, 2.0 * k * gap)).arg()
}

/// Resonances of the Airy round trip in `[lo, hi]` by bisection on the phase.
fn airy_resonances(n: f64, d: f64, gap: f64, lo: f64, hi: f64) -> Vec<f64> {
    let f = |k| airy_round_trip_phase(n, d, gap, k);
    let steps = 100_000;
    let h = (hi - lo) / steps as f64;
    let mut out = Vec::new();
    for i in 0..steps {
        let (mut a, mut b) = (lo + h * i as f64, lo + h * (i + 1) as f64);
        let (fa, fb) = (f(a), f(b));
        // A genuine zero, not the ±π wrap.
        if fa < 0.0 && fb >= 0.0 && fb - fa < 1.0 {
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if f(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
    }
    out
}

#[test]
fn fabry_perot_dips_match_airy_resonances() {
    let p = WaveProblem::normal_incidence(LayerStack::fabry_perot(1.0, 20.0).unwrap()).unwrap();
    let n = 40_001;
    let step = 4.0 * PI / (n - 1) as f64;
    let w: Vec<f64> = (0..n).map(|i| 0.5 * PI + step * i as f64).collect();
    let r: Vec<f64> = w.iter().map(|&w| p.reflectance(w).unwrap()).collect();
    let dips = minima(&w, &r);
    let airy = airy_resonances(20.0, 0.01, 1.0, 0.5 * PI, 4.5 * PI);
    assert_eq!(dips.len(), 4, "{dips:?}");
    assert_eq!(airy.len(), 4, "{airy:?}");
    for (d, a) in dips.iter().zip(&airy) {
        assert!((d - a).abs() <= step, "{d} vs {a}");
    }
    // Away from the band edges the dips also sit within 1% of the ideal
    // mirror condition mπ/L. The thin high-index mirrors add a reflection
    // phase that moves the fundamental by about 4%.
    for m in [2, 3] {
        let ideal = m as f64 * PI;
        assert!((dips[m - 1] - ideal).abs() < 1e-2 * ideal, "mode {m}: {} vs {ideal}", dips[m - 1]);
    }
    assert!((dips[0] / PI - 1.0411852).abs() < 1e-4);
}

#[test]
fn green_peaks_coincide_with_reflectance_dips() {
    let stack = LayerStack::fabry_perot(1.0, 20.0).unwrap();
    let x = stack.emitter.unwrap().position;
    let p = WaveProblem::normal_incidence(stack).unwrap();
    let n = 20_001;
    let step = 4.0 * PI / (n - 1) as f64;
    let w: Vec<f64> = (0..n).map(|i| 0.5 * PI + step * i as f64).collect();
    let r: Vec<f64> = w.iter().map(|&w| p.reflectance(w).unwrap()).collect();
    let g: Vec<f64> = w.iter().map(|&w| p.green(x, x, w.into()).unwrap().norm()).collect();
    let dips = minima(&w, &r);
    let peaks = maxima(&w, &g);
    // The centre is a node of the even modes, so only odd modes peak there.
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    for pk in peaks {
        let nearest = dips.iter().map(|d| (d - pk).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest <= step * (1.0 + 1e-9), "peak {pk} misses a dip by {nearest}");
    }
}

#[test]
fn free_space_green_function() {
    let p = WaveProblem::normal_incidence(vacuum_stack(3.0)).unwrap();
    for (x, xp, w) in [(0.5f64, 2.0f64, c(1.3, 0.0)), (2.9, 0.1, c(0.7, -0.2)), (-1.0, 4.0, c(5.0, 0.1)), (1.0, 1.0, c(2.0, 0.0))] {
        let exact = (C64::i() * w * (x - xp).abs()).exp() / (2.0 * C64::i() * w);
        let got = p.green(x, xp, w).unwrap();
        assert!(rel(got, exact) < 1e-13, "{got} vs {exact}");
    }
}

/// Fourth-order one-sided derivative in `x`; `dir` is `+1` or `-1`.
fn one_sided_dx(p: &WaveProblem, x: f64, xp: f64, w: C64, dir: f64) -> C64 {
    let h = 2e-4 * dir;
    let f = |j: f64| p.green(x + j * h, xp, w).unwrap();
    (-25.0 * f(0.0) + 48.0 * f(1.0) - 36.0 * f(2.0) + 16.0 * f(3.0) - 3.0 * f(4.0)) / (12.0 * h)
}

#[test]
fn green_derivative_jumps_by_one_at_the_source_only() {
    let p = WaveProblem::normal_incidence(LayerStack::fabry_perot(1.0, 4.0).unwrap()).unwrap();
    for w in [c(2.3, 0.0), c(5.1, -0.4)] {
        for xp in [0.005, 0.31, 0.7] {
            let jump = one_sided_dx(&p, xp, xp, w, 1.0) - one_sided_dx(&p, xp, xp, w, -1.0);
            assert!(rel(jump, c(1.0, 0.0)) < 1e-8, "jump {jump} at {xp}");
        }
        // Interfaces at 0.01 and 1.01: value and slope are continuous.
        let xp = 0.5;
        for x in [0.01, 1.01] {
            let (gl, gr) = (p.green(x - 1e-12, xp, w).unwrap(), p.green(x + 1e-12, xp, w).unwrap());
            assert!(rel(gl, gr) < 1e-10);
            let (dl, dr) = (one_sided_dx(&p, x, xp, w, -1.0), one_sided_dx(&p, x, xp, w, 1.0));
            assert!((dl - dr).norm() < 1e-8 * dl.norm().max(1.0), "{dl} vs {dr}");
        }
    }
}

#[test]
fn green_function_satisfies_cauchy_riemann() {
    let p = WaveProblem::normal_incidence(LayerStack::fabry_perot(1.0, 6.0).unwrap()).unwrap();
    let x = 0.51;
    let h = 1e-4;
    for w in [c(1.7, -0.05), c(4.4, -0.3), c(7.9, -0.6), c(2.6, 0.2)] {
        let g = |z: C64| p.green(x, x, z).unwrap();
        let along_re = (g(w + h) - g(w - h)) / (2.0 * h);
        let along_im = (g(w + c(0.0, h)) - g(w - c(0.0, h))) / c(0.0, 2.0 * h);
        assert!(rel(along_im, along_re) < 1e-6, "{along_re} vs {along_im}");
    }
}

#[test]
fn domain_errors() {
    let p = WaveProblem::normal_incidence(LayerStack::fabry_perot(1.0, 4.0).unwrap()).unwrap();
    assert!(matches!(p.transfer_matrix(c(0.0, 0.0)), Err(Error::ZeroFrequency)));
    let oblique = WaveProblem::new(vacuum_stack(1.0), 2.0).unwrap();
    assert!(matches!(oblique.cladding_kz(Side::Left, c(2.0, 0.0)), Err(Error::BranchPoint { .. })));
    let thick = WaveProblem::normal_incidence(vacuum_stack(1.0)).unwrap();
    assert!(matches!(thick.transfer_matrix(c(1.0, -800.0)), Err(Error::Overflow { .. })));
    assert!(WaveProblem::new(vacuum_stack(1.0), -1.0).is_err());
}

#[test]
fn material_validation() {
    let gain = Material::constant("gain", c(1.5, -0.1));
    assert!(LayerStack::new(Material::vacuum(), vec![Layer::new(gain, 1.0)], Material::vacuum(), None).is_err());
    let zero = Layer::new(Material::vacuum(), 0.0);
    assert!(LayerStack::new(Material::vacuum(), vec![zero], Material::vacuum(), None).is_err());
    let outside = EmitterSpec { position: 2.0, frequency: 1.0, gamma: 1.0 };
    assert!(vacuum_stack(1.0).with_emitter(outside).is_err());
}

#[test]
fn oblique_cladding_branch() {
    let p = WaveProblem::new(vacuum_stack(1.0), 1.0).unwrap();
    // Propagating above the light line, evanescent below it.
    let k = p.cladding_kz(Side::Left, c(2.0, 0.0)).unwrap();
    assert!((k - c(3.0f64.sqrt(), 0.0)).norm() < 1e-15);
    let k = p.cladding_kz(Side::Left, c(0.5, 0.0)).unwrap();
    assert!((k - c(0.0, 0.75f64.sqrt())).norm() < 1e-15);
    // Continued straight down, the root stays next to its real-axis value.
    let k = p.cladding_kz(Side::Left, c(2.0, -0.1)).unwrap();
    assert!(k.re > 0.0 && k.im < 0.0);
    let bp = p.branch_points();
    assert!(bp.iter().any(|b| (b - c(1.0, 0.0)).norm() < 1e-15));
    assert!(WaveProblem::normal_incidence(vacuum_stack(1.0)).unwrap().branch_points().is_empty());
}

#[test]
fn lorentzian_cladding_branch_points_are_zeros_of_kz() {
    let m = Material::lorentzian("res", c(0.2, 0.0), 3.0, 0.4, 0.5);
    let stack = LayerStack::new(Material::vacuum(), vec![], m.clone(), None).unwrap();
    let p = WaveProblem::new(stack, 1.3).unwrap();
    let bps: Vec<C64> = p.branch_points().into_iter().filter(|b| (b.norm() - 1.3).abs() > 1e-9).collect();
    assert!(!bps.is_empty());
    for b in bps {
        let k2 = p.kz_squared(&m, b);
        assert!(k2.norm() < 1e-12, "{b}: {k2}");
    }
}

#[test]
fn bundled_xray_cavities() {
    let table = MaterialTable::bundled();
    let cav = XrayCavity::two_ensemble();
    let stack = cav.stack(&table).unwrap();
    assert_eq!(stack.layers.len(), 9);
    let nm: f64 = cav.layers.iter().map(|l| l.thickness_nm).sum();
    assert!((nm - 57.0).abs() < 1e-12);
    // The emitter sits at the centre of the resonant layer.
    assert!((cav.emitter_depth_nm().unwrap() - 18.5).abs() < 1e-12);
    let p = cav.problem(&table, 4e-3).unwrap();
    assert!((p.k_par - cav.transition_kev * (4e-3f64).cos()).abs() < 1e-15);
    let r = p.reflectance(cav.transition_kev).unwrap();
    assert!(r > 0.0 && r < 1.0);
}

#[test]
fn xray_cavity_with_vacuum_table_does_not_reflect() {
    let text = r#"{"version": 1, "energy_kev": 14.4125, "source": "test",
        "materials": {"Pt": {"delta": 0, "beta": 0}, "C": {"delta": 0, "beta": 0},
                      "Fe": {"delta": 0, "beta": 0}, "57Fe": {"delta": 0, "beta": 0},
                      "Si": {"delta": 0, "beta": 0}}}"#;
    let table = MaterialTable::from_json(text).unwrap();
    let p = XrayCavity::two_ensemble().problem(&table, 3e-3).unwrap();
    assert!(p.reflection(14.4125.into()).unwrap().norm() < 1e-13);
}

#[test]
fn material_table_errors() {
    let text = r#"{"version": 1, "energy_kev": 14.4125, "source": "test", "materials": {"C": {"delta": 1e-6, "beta": 0}}}"#;
    let table = MaterialTable::from_json(text).unwrap();
    match XrayCavity::two_ensemble().stack(&table) {
        Err(Error::MaterialTable(m)) => assert!(m.contains("Pt"), "{m}"),
        other => panic!("expected a table error, got {other:?}"),
    }
    let v2 = text.replace("\"version\": 1", "\"version\": 2");
    assert!(matches!(MaterialTable::from_json(&v2), Err(Error::MaterialTable(_))));
    let unknown = text.replace("\"source\"", "\"extra\": 1, \"source\"");
    assert!(MaterialTable::from_json(&unknown).is_err());
}

#[test]
fn propagation_matrix_small_argument() {
    // Exactly zero wavenumber is a pure shift of the slope.
    let m = propagation_matrix(c(0.0, 0.0), 2.0);
    assert_eq!(m, Mat2::new(c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
    let k = c(1e-5, 1e-6);
    let m = propagation_matrix(k, 3.0);
    let s = (k * 3.0).sin() / k;
    assert!(rel(m[(0, 1)], s) < 1e-12);
}

fn arb_stack() -> impl Strategy<Value = LayerStack> {
    let layer = (1.0f64..4.0, 0.0f64..0.3, 0.05f64..1.5)
        .prop_map(|(n, k, d)| Layer::new(Material::constant("m", C64::new(n, k)), d));
    (prop::collection::vec(layer, 1..5), 1.0f64..2.5, 0.0f64..0.2).prop_map(|(layers, nr, kr)| {
        LayerStack::new(Material::vacuum(), layers, Material::constant("sub", C64::new(nr, kr)), None).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn passive_reflectance_is_bounded(stack in arb_stack(), w in 0.05f64..20.0, theta in 0.0f64..1.2) {
        let k_par = if theta == 0.0 { 0.0 } else { w * theta.cos() * 0.5 };
        let p = WaveProblem::new(stack, k_par).unwrap();
        let r = p.reflectance(w).unwrap();
        prop_assert!(r <= 1.0 + 1e-12, "{}", r);
    }

    #[test]
    fn green_function_is_reciprocal(stack in arb_stack(), w in 0.1f64..10.0, wi in -0.3f64..0.0,
                                    a in -0.5f64..1.0, b in -0.5f64..1.0) {
        let d = stack.total_thickness();
        let (x, xp) = (a * d * 1.2, b * d * 1.2);
        let p = WaveProblem::normal_incidence(stack).unwrap();
        let omega = C64::new(w, wi);
        let g1 = p.green(x, xp, omega).unwrap();
        let g2 = p.green(xp, x, omega).unwrap();
        prop_assert!(rel(g1, g2) < 1e-12);
    }

    #[test]
    fn transfer_matrix_composes(stack in arb_stack(), w in 0.1f64..10.0, wi in -0.3f64..0.3, split in 0usize..4) {
        let omega = C64::new(w, wi);
        let k = split.min(stack.layers.len());
        // Splitting the stack at an interface filled by an arbitrary
        // intermediate medium leaves the product unchanged.
        let mid = Material::constant("mid", C64::new(1.7, 0.05));
        let left = LayerStack::new(stack.left.clone(), stack.layers[..k].to_vec(), mid.clone(), None).unwrap();
        let right = LayerStack::new(mid, stack.layers[k..].to_vec(), stack.right.clone(), None).unwrap();
        let full = WaveProblem::normal_incidence(stack).unwrap().transfer_matrix(omega).unwrap();
        let a = WaveProblem::normal_incidence(left).unwrap().transfer_matrix(omega).unwrap();
        let b = WaveProblem::normal_incidence(right).unwrap().transfer_matrix(omega).unwrap();
        prop_assert!(mat_rel(&(a * b), &full) < 1e-12, "{}", mat_rel(&(a * b), &full));
    }

    #[test]
    fn interior_matrix_is_ordered_product(stack in arb_stack(), w in 0.1f64..10.0, wi in -0.3f64..0.3) {
        let omega = C64::new(w, wi);
        let p = WaveProblem::normal_incidence(stack.clone()).unwrap();
        let mut prod = Mat2::identity();
        for j in 0..stack.layers.len() {
            prod *= p.layer_matrix(j, omega).unwrap();
        }
        prop_assert!(mat_rel(&prod, &p.interior_matrix(omega).unwrap()) < 1e-13);
    }
}
