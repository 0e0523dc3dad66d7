mod common;

use addcat::coherence::{
    certify_morphism, certify_uniform, factor_monic_splitepi, is_exact_at, resolve, vnr_witness, Certificate,
    ExactStatus, SamplingPolicy,
};
use addcat::exec::Exec;
use addcat::matcat::{Mor, Obj};
use addcat::report::Verdict;
use addcat::ring::linalg::kernel_gens;
use addcat::ring::{Mat, RingSpec};
use common::{brute_exact, mat, rand_mat, ring, rng, sample_rings};
use proptest::prelude::*;

fn mor(m: Mat) -> Mor {
    Mor::from_mat(m)
}

#[test]
fn exactness_examples() {
    let z = ring(RingSpec::Integers);
    let f0 = mor(mat(&z, &[&[2]]));
    let f1 = mor(Mat::zeros(z.clone(), 0, 1));
    let v = is_exact_at(&f0, &f1).unwrap();
    assert_eq!(v.status, ExactStatus::NotExact);
    assert_eq!(v.witness, Some(mat(&z, &[&[1]])));
    let (_, cx) = v.evidence(&f0, &f1);
    assert!(cx.unwrap().verify().unwrap());
    let q = ring(RingSpec::Rationals);
    assert!(is_exact_at(&mor(mat(&q, &[&[2]])), &mor(Mat::zeros(q.clone(), 0, 1))).unwrap().is_exact());
    let bad = is_exact_at(&mor(mat(&z, &[&[1]])), &mor(mat(&z, &[&[1]]))).unwrap();
    assert_eq!(bad.composite, Some(mat(&z, &[&[1]])));
}

#[test]
fn certifier_examples() {
    let z = ring(RingSpec::Integers);
    let q = ring(RingSpec::Rationals);
    assert!(vnr_witness(&mor(Mat::zeros(z.clone(), 2, 3))).unwrap().unwrap().g.mat().is_zero());
    assert!(vnr_witness(&mor(mat(&z, &[&[2]]))).unwrap().is_none());
    let w = vnr_witness(&mor(mat(&q, &[&[2]]))).unwrap().unwrap();
    assert_eq!(q.elem_to_json(w.g.mat().get(0, 0)), serde_json::json!("1/2"));

    let c = factor_monic_splitepi(&mor(mat(&z, &[&[2]]))).unwrap().unwrap();
    assert_eq!(
        (c.middle().rank(), c.f1.mat().clone(), c.f0.mat().clone(), c.s.mat().clone()),
        (1, mat(&z, &[&[1]]), mat(&z, &[&[2]]), mat(&z, &[&[1]]))
    );
    assert_eq!(factor_monic_splitepi(&mor(mat(&z, &[&[0]]))).unwrap().unwrap().middle().rank(), 0);
    let c = factor_monic_splitepi(&mor(mat(&q, &[&[1, 0], &[0, 0]]))).unwrap().unwrap();
    assert_eq!(
        (c.f0.mat().clone(), c.f1.mat().clone(), c.s.mat().clone()),
        (mat(&q, &[&[1], &[0]]), mat(&q, &[&[1, 0]]), mat(&q, &[&[1], &[0]]))
    );
    assert!(factor_monic_splitepi(&mor(mat(&ring(RingSpec::IntegersMod(4)), &[&[2]]))).is_err());

    assert_eq!(resolve(&mor(mat(&z, &[&[2]])), 3).unwrap().cert().unwrap().length(), 1);
    let z4 = ring(RingSpec::IntegersMod(4));
    assert!(resolve(&mor(mat(&z4, &[&[2]])), 6).unwrap().cert().is_none());
}

#[test]
fn batch_examples() {
    let q = ring(RingSpec::Rationals);
    let r =
        certify_uniform(&q, &SamplingPolicy { trials: 30, ..SamplingPolicy::default() }, 0, Exec::Parallel).unwrap();
    assert_eq!(r.aggregate, Verdict::Certified);
    let z = ring(RingSpec::Integers);
    let policy = SamplingPolicy { trials: 5, explicit: vec![mor(mat(&z, &[&[2]]))], ..SamplingPolicy::default() };
    let r = certify_uniform(&z, &policy, 0, Exec::Parallel).unwrap();
    assert_eq!((r.aggregate, r.trials[0].1.verdict), (Verdict::Refuted, Verdict::Refuted));
    assert!(r.reverify().unwrap());
    let r = certify_uniform(
        &z,
        &SamplingPolicy { trials: 200, max_rows: 5, max_cols: 5, ..SamplingPolicy::default() },
        1,
        Exec::Parallel,
    )
    .unwrap();
    assert_eq!(r.aggregate, Verdict::Certified);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exactness_matches_enumeration(seed in any::<u64>(), n in 2u64..5, a in 0usize..3, b in 1usize..3, c in 0usize..3) {
        let r = ring(RingSpec::IntegersMod(n));
        let mut g = rng(seed);
        let f1 = rand_mat(&r, &mut g, c, b);
        // bias towards composable pairs: build f0 from kernel columns half the time
        let f0 = if seed % 2 == 0 {
            let k = kernel_gens(&f1);
            k.mul(&rand_mat(&r, &mut g, k.cols(), a)).unwrap()
        } else {
            rand_mat(&r, &mut g, b, a)
        };
        let v = is_exact_at(&mor(f0.clone()), &mor(f1.clone())).unwrap();
        prop_assert_eq!(v.is_exact(), brute_exact(&f0, &f1));
        let (cert, cx) = v.evidence(&mor(f0), &mor(f1));
        match (cert, cx) {
            (Some(c), None) => prop_assert!(c.verify().unwrap()),
            (None, Some(x)) => prop_assert!(x.verify().unwrap()),
            _ => prop_assert!(false, "no evidence"),
        }
    }

    #[test]
    fn kernel_inclusions_are_exact(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        for r in sample_rings() {
            let f1 = mor(rand_mat(&r, &mut rng(seed), m, n));
            let k = kernel_gens(f1.mat());
            let f0 = Mor::new(Obj::new(k.cols()), f1.dom().clone(), k).unwrap();
            prop_assert!(is_exact_at(&f0, &f1).unwrap().is_exact());
        }
    }

    #[test]
    fn fields_are_von_neumann_regular(seed in any::<u64>(), m in 1usize..6, n in 1usize..6) {
        for spec in [RingSpec::Rationals, RingSpec::PrimeField(5), RingSpec::FiniteField(3, 2)] {
            let f = mor(rand_mat(&ring(spec), &mut rng(seed), m, n));
            prop_assert!(vnr_witness(&f).unwrap().expect("fields are regular").verify().unwrap());
        }
    }

    #[test]
    fn vnr_witnesses_reverify(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        for r in sample_rings() {
            let f = mor(rand_mat(&r, &mut rng(seed), m, n));
            if let Some(w) = vnr_witness(&f).unwrap() {
                prop_assert!(w.verify().unwrap());
            }
        }
    }

    #[test]
    fn integer_factorizations(seed in any::<u64>(), m in 1usize..6, n in 1usize..6) {
        let z = ring(RingSpec::Integers);
        let f = mor(rand_mat(&z, &mut rng(seed), m, n));
        let c = factor_monic_splitepi(&f).unwrap().expect("integers always factor");
        prop_assert!(c.verify().unwrap());
        let zero = Mor::zero(z.clone(), &Obj::zero(), c.middle());
        prop_assert!(is_exact_at(&zero, &c.f0).unwrap().is_exact());
        let r = resolve(&f, 2).unwrap();
        let cert = r.cert().expect("integer kernels are free");
        prop_assert!(cert.length() <= 2 && cert.verify().unwrap());
    }

    #[test]
    fn resolutions_reverify(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        for r in sample_rings() {
            let f = mor(rand_mat(&r, &mut rng(seed), m, n));
            if let Some(c) = resolve(&f, 6).unwrap().cert() {
                prop_assert!(c.verify().unwrap());
            }
        }
    }

    #[test]
    fn product_certificates_glue(seed in any::<u64>(), w in 2usize..5, m in 1usize..4, n in 1usize..4, l in 0usize..3) {
        let r = ring(RingSpec::Product(Box::new(RingSpec::Rationals), w));
        let f = mor(rand_mat(&r, &mut rng(seed), m, n));
        let out = certify_morphism(&f, l, l.max(1)).unwrap();
        prop_assert_eq!(out.verdict, Verdict::Certified);
        prop_assert!(out.reverify().unwrap());
        if let Some(Certificate::Product { assembled, .. }) = &out.certificate {
            prop_assert_eq!(assembled.is_some(), l == 0);
        } else {
            prop_assert!(false, "expected a product certificate");
        }
    }

    #[test]
    fn batches_are_deterministic(seed in any::<u64>(), l in 0usize..3) {
        let z = ring(RingSpec::Integers);
        let policy = SamplingPolicy { trials: 8, seed, ..SamplingPolicy::default() };
        let a = certify_uniform(&z, &policy, l, Exec::Sequential).unwrap().to_json();
        let b = certify_uniform(&z, &policy, l, Exec::Parallel).unwrap().to_json();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
