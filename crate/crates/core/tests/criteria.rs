use proptest::prelude::*;
use robust_la::criteria::*;
use robust_la::linalg::DenseMatrix;
use robust_la::Error;

fn mc() -> MohrCoulombParams {
    MohrCoulombParams::new(1.0, 30f64.to_radians(), 0.5)
}

fn sample_criteria() -> Vec<StrengthCriterion> {
    let vm = StrengthCriterion::plane_stress_von_mises(1.3).unwrap();
    let l1 = ConicAtom::new(AtomKind::L1Ball, DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![-0.2, 1.0]]).unwrap(), 2.0).unwrap();
    let linf = ConicAtom::new(AtomKind::LinfBall, DenseMatrix::identity(2), 1.5)
        .unwrap()
        .with_offset(vec![0.3, -0.2])
        .unwrap();
    let soc = ConicAtom::new(AtomKind::Soc, DenseMatrix::identity(2), 2.0)
        .unwrap()
        .with_offset(vec![0.4, 0.1])
        .unwrap()
        .with_linear(vec![0.5, -0.3])
        .unwrap();
    vec![
        vm.clone(),
        vm.translated(&[0.2, -0.3]).unwrap(),
        StrengthCriterion::new(2, vec![l1, linf, soc], "mixed").unwrap(),
        StrengthCriterion::mohr_coulomb_tension_cutoff(&mc()).unwrap(),
    ]
}

#[test]
fn gauge_examples() {
    let interval = StrengthCriterion::interval(2.0).unwrap();
    assert_eq!(interval.gauge_value(&[1.0]).unwrap(), 0.5);
    let vm = StrengthCriterion::plane_stress_von_mises(1.0).unwrap();
    assert!((vm.gauge_value(&[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
    assert!((vm.gauge_value(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
    let vm3 = StrengthCriterion::plane_stress_von_mises(3f64.sqrt()).unwrap();
    assert!((vm3.gauge_value(&[1.0, -1.0]).unwrap() - 1.0).abs() < 1e-12);
    for g in sample_criteria() {
        assert_eq!(g.gauge_value(&[0.0, 0.0]).unwrap(), 0.0);
    }
}

#[test]
fn von_mises_matches_formula() {
    let s0 = 1.7;
    let vm = StrengthCriterion::plane_stress_von_mises(s0).unwrap();
    for k in 0..50 {
        let t = k as f64 * 0.37;
        let s = [2.0 * t.cos(), 1.5 * (1.3 * t).sin()];
        let formula = (s[0] * s[0] + s[1] * s[1] - s[0] * s[1]).sqrt() / s0;
        assert!((vm.gauge_value(&s).unwrap() - formula).abs() < 1e-12);
    }
    assert!(matches!(StrengthCriterion::plane_stress_von_mises(0.0), Err(Error::InvalidInput(_))));
}

#[test]
fn mohr_coulomb_examples() {
    let p = mc();
    let g = StrengthCriterion::mohr_coulomb_tension_cutoff(&p).unwrap();
    assert!(g.gauge_value(&[0.0, 0.0]).unwrap() < 1.0);
    // pure shear σ₁ = −σ₃ = τ
    let tau = 1.0 / g.gauge_value(&[1.0, -1.0]).unwrap();
    assert!((tau - p.c0 * p.phi0.cos()).abs() < 1e-9);
    assert!(g.membership(&[tau, -tau], 1e-12).unwrap());
    assert!(!g.membership(&[tau * 1.001, -tau * 1.001], 0.0).unwrap());
    assert!(!g.membership(&[p.ft0 + 0.01, p.ft0 + 1e-6], 0.0).unwrap());
    let mut bad = p;
    bad.rho = 0.5;
    assert!(StrengthCriterion::mohr_coulomb_tension_cutoff(&bad).is_err());
    assert!(bad.validate().is_err());
}

#[test]
fn homothetic_scaling() {
    let g = StrengthCriterion::interval(2.0).unwrap();
    assert_eq!(g.homothetic_scale(0.0).unwrap(), g);
    let half = g.homothetic_scale(0.5).unwrap();
    assert_eq!(half, StrengthCriterion::interval(1.0).unwrap().with_label(g.label()));
    assert!(matches!(g.homothetic_scale(1.0), Err(Error::DegenerateCriterion(_))));
}

#[test]
fn tracing() {
    let strip = StrengthCriterion::new(
        2,
        vec![ConicAtom::new(AtomKind::Abs, DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap(), 1.0).unwrap()],
        "strip",
    )
    .unwrap();
    let t = strip.trace_boundary(4).unwrap();
    assert!(t[0].point.is_some() && t[1].point.is_none() && t[3].point.is_none());
    let vm = StrengthCriterion::plane_stress_von_mises(1.0).unwrap();
    for p in vm.trace_boundary(4).unwrap() {
        assert!((vm.gauge_value(&p.point.unwrap()).unwrap() - 1.0).abs() < 1e-9);
    }
    for g in sample_criteria() {
        for p in g.trace_boundary(24).unwrap() {
            if let Some(x) = p.point {
                assert!((g.gauge_value(&x).unwrap() - 1.0).abs() < 1e-9, "{}", g.label());
            }
        }
    }
    assert!(matches!(StrengthCriterion::interval(1.0).unwrap().trace_boundary(8), Err(Error::TraceRequires2D(1))));
    let csv = trace_to_csv(&t);
    assert!(csv.starts_with("theta,x,y\n") && csv.lines().count() == 5);
}

#[test]
fn mohr_envelope_measures() {
    let p = mc();
    let g = StrengthCriterion::mohr_coulomb_tension_cutoff(&MohrCoulombParams { ft0: 10.0, ..p }).unwrap();
    assert!((envelope_cohesion(&g).unwrap() - p.c0).abs() < 1e-6);
    let apex = p.c0 / p.phi0.tan();
    assert!((hydrostatic_apex(&g).unwrap() - apex).abs() < 1e-9);
}

#[test]
fn linearization_is_consistent_with_exact_parameters() {
    let mut p = mc();
    p.dc = 0.1;
    p.dphi = 0.05;
    p.dft = 0.02;
    p.rho = -0.4;
    let [line, cut] = p.linearization();
    let k = p.k_matrix();
    // first-order agreement with the exact Mohr–Coulomb data at small steps
    for (j, col) in k.iter().enumerate() {
        let h = 1e-6;
        let (c, phi) = (p.c0 + h * col[0], p.phi0 + h * col[1]);
        let a = [1.0 + phi.sin(), -1.0 + phi.sin()];
        let b = 2.0 * c * phi.cos();
        assert!(((a[0] - line.a0[0]) / h - line.da[j][0]).abs() < 1e-5);
        assert!(((b - line.b0) / h - line.db[j]).abs() < 1e-5);
        assert!((cut.db[j] - col[2]).abs() < 1e-15);
    }
    let real = p.realization(&[0.0; 3]).unwrap();
    assert_eq!(real.atoms(), StrengthCriterion::mohr_coulomb_tension_cutoff(&p).unwrap().atoms());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gauge_is_homogeneous(x in -3.0f64..3.0, y in -3.0f64..3.0, t in 0.0f64..10.0, which in 0usize..4) {
        let g = &sample_criteria()[which];
        let a = g.gauge_value(&[t * x, t * y]).unwrap();
        let b = t * g.gauge_value(&[x, y]).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn gauge_is_subadditive(x in prop::array::uniform4(-3.0f64..3.0), which in 0usize..4) {
        let g = &sample_criteria()[which];
        let s = g.gauge_value(&[x[0] + x[2], x[1] + x[3]]).unwrap();
        let a = g.gauge_value(&[x[0], x[1]]).unwrap();
        let b = g.gauge_value(&[x[2], x[3]]).unwrap();
        prop_assert!(s <= a + b + 1e-10);
    }

    #[test]
    fn gauge_matches_membership(x in -3.0f64..3.0, y in -3.0f64..3.0, which in 0usize..4) {
        let g = &sample_criteria()[which];
        let gv = g.gauge_value(&[x, y]).unwrap();
        // skip the measure-zero band where rounding decides
        prop_assume!((gv - 1.0).abs() > 1e-9);
        prop_assert_eq!(gv <= 1.0, g.membership(&[x, y], 0.0).unwrap());
    }
}

#[test]
fn membership_equivalence_on_a_thousand_points() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for g in sample_criteria() {
        for _ in 0..1000 {
            let s = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let gv = g.gauge_value(&s).unwrap();
            if (gv - 1.0).abs() > 1e-9 {
                assert_eq!(gv <= 1.0, g.membership(&s, 0.0).unwrap(), "{} at {s:?}", g.label());
            }
        }
    }
}
