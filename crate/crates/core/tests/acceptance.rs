//! Acceptance suite. Each criterion prints one PASS or FAIL line; the
//! process exits non-zero when any criterion fails.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use addcat::charseq::{build_char_seq, mutate_shift, verify_char_seq};
use addcat::coherence::{
    certify_morphism, certify_uniform, factor_monic_splitepi, is_exact_at, resolve, vnr_witness, Certificate,
    ResolveOutcome, SamplingPolicy,
};
use addcat::exec::Exec;
use addcat::matcat::{Mor, Obj};
use addcat::nested::{
    certify_s_l, lift_in_l, lift_in_s, LiftIndex, LiftOutcome, MorTail, NestedModel, NestedPolicy, SeqMor, SeqObj,
};
use addcat::report::Verdict;
use addcat::ring::{Mat, RingElem, RingSpec};
use addcat::twisted::{
    default_nil_bound, degree_data, division_step, find_lift, laurent_compose, nil_degree, LaurentMor, NilObject,
};
use common::{all_mats, mat, rand_laurent, rand_mat, ring, rng, sample_auts, twisted_power, unimodular};
use num_bigint::BigInt;
use rand::Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Vectors of a finite module as a hashable key.
fn key(m: &Mat) -> String {
    m.to_json().to_string()
}

fn exhaustive_exactness() -> Outcome {
    let mut pairs = 0usize;
    for n in [2u64, 3, 4] {
        let r = ring(RingSpec::IntegersMod(n));
        for a in 0..=2 {
            for b in 0..=2 {
                for c in 0..=2 {
                    let f0s = all_mats(&r, b, a);
                    let f1s = all_mats(&r, c, b);
                    let images: Vec<HashSet<String>> = f0s
                        .iter()
                        .map(|f0| all_mats(&r, a, 1).iter().map(|y| key(&f0.mul(y).unwrap())).collect())
                        .collect();
                    let kernels: Vec<Vec<String>> = f1s
                        .iter()
                        .map(|f1| {
                            all_mats(&r, b, 1)
                                .into_iter()
                                .filter(|x| f1.mul(x).unwrap().is_zero())
                                .map(|x| key(&x))
                                .collect()
                        })
                        .collect();
                    let bad: Vec<Option<String>> = Exec::Parallel.map(f0s.len(), |i| {
                        let f0 = &f0s[i];
                        for (j, f1) in f1s.iter().enumerate() {
                            let expect =
                                f1.mul(f0).unwrap().is_zero() && kernels[j].iter().all(|k| images[i].contains(k));
                            let v = is_exact_at(&Mor::from_mat(f0.clone()), &Mor::from_mat(f1.clone())).unwrap();
                            if v.is_exact() != expect {
                                return Some(format!("Z/{n} f0={} f1={}", key(f0), key(f1)));
                            }
                        }
                        None
                    });
                    if let Some(b) = bad.into_iter().flatten().next() {
                        return Err(format!("disagreement at {b}"));
                    }
                    pairs += f0s.len() * f1s.len();
                }
            }
        }
    }
    Ok(format!("{pairs} pairs agree"))
}

fn fields_regular() -> Outcome {
    for spec in [RingSpec::Rationals, RingSpec::PrimeField(5)] {
        let r = ring(spec.clone());
        let mut g = rng(500);
        for i in 0..500 {
            let (m, n) = (g.gen_range(1..=6), g.gen_range(1..=6));
            let f = Mor::from_mat(rand_mat(&r, &mut g, m, n));
            let ok = vnr_witness(&f).unwrap().is_some_and(|w| w.verify().unwrap());
            ensure(ok, || format!("{spec}: sample {i} has no verified witness"))?;
        }
    }
    Ok("1000/1000 witnesses verified".into())
}

fn integer_factorization() -> Outcome {
    let z = ring(RingSpec::Integers);
    let mut g = rng(200);
    let mut longest = 0;
    for i in 0..200 {
        let (m, n) = (g.gen_range(1..=5), g.gen_range(1..=5));
        let f = Mor::from_mat(rand_mat(&z, &mut g, m, n));
        let ok = factor_monic_splitepi(&f).unwrap().is_some_and(|c| c.verify().unwrap());
        ensure(ok, || format!("sample {i} has no verified factorization"))?;
        let out = resolve(&f, 6).unwrap();
        let cert = out.cert().ok_or_else(|| format!("sample {i} did not resolve"))?;
        ensure(cert.verify().unwrap(), || format!("sample {i}: resolution fails to verify"))?;
        // stages after the first are kernel continuations
        longest = longest.max(cert.length() - 1);
    }
    ensure(longest <= 1, || format!("a resolution needed {longest} continuation steps"))?;
    Ok(format!("200/200 factorizations verified, at most {longest} continuation step"))
}

fn negative_controls() -> Outcome {
    let z = ring(RingSpec::Integers);
    let out = certify_morphism(&Mor::from_mat(mat(&z, &[&[2]])), 0, 1).unwrap();
    ensure(out.verdict == Verdict::Refuted && out.reverify().unwrap(), || {
        format!("[2] over Z at l=0: {:?}", out.verdict)
    })?;
    let z4 = ring(RingSpec::IntegersMod(4));
    let f = Mor::from_mat(mat(&z4, &[&[2]]));
    let res = resolve(&f, 6).unwrap();
    ensure(matches!(res, ResolveOutcome::Cycle { .. }), || format!("[2] over Z/4: {res:?}"))?;
    let out = certify_morphism(&f, 2, 6).unwrap();
    ensure(out.verdict == Verdict::Undecided, || format!("[2] over Z/4 at l=2: {:?}", out.verdict))?;
    Ok("Z [2] refuted at l=0, Z/4 [2] undecided with a kernel cycle".into())
}

fn int(e: &RingElem) -> BigInt {
    match e {
        RingElem::Int(x) => x.clone(),
        other => panic!("not an integer: {other:?}"),
    }
}

fn laurent_algebra() -> Outcome {
    for aut in sample_auts() {
        let mut g = rng(5);
        for i in 0..500 {
            let d: Vec<usize> = (0..4).map(|_| g.gen_range(1..=3)).collect();
            let f = rand_laurent(&aut, &mut g, d[0], d[1], -3, 3);
            let f2 = rand_laurent(&aut, &mut g, d[0], d[1], -3, 3);
            let gg = rand_laurent(&aut, &mut g, d[1], d[2], -3, 3);
            let h = rand_laurent(&aut, &mut g, d[2], d[3], -3, 3);
            let c = |a: &LaurentMor, b: &LaurentMor| laurent_compose(a, b).unwrap();
            let assoc = c(&h, &c(&gg, &f)) == c(&c(&h, &gg), &f);
            let right = c(&gg, &f.add(&f2).unwrap()) == c(&gg, &f).add(&c(&gg, &f2)).unwrap();
            let left = c(&h.add(&h).unwrap(), &gg) == c(&h, &gg).add(&c(&h, &gg)).unwrap();
            ensure(assoc && right && left, || format!("{}: triple {i} fails", aut.kind()))?;
        }
    }
    let id = &sample_auts()[0];
    let mut g = rng(55);
    for i in 0..500 {
        let f = rand_laurent(id, &mut g, 1, 1, -3, 3);
        let h = rand_laurent(id, &mut g, 1, 1, -3, 3);
        let mut want: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (j, hj) in h.coeffs() {
            for (k, fk) in f.coeffs() {
                *want.entry(j + k).or_default() += int(hj.get(0, 0)) * int(fk.get(0, 0));
            }
        }
        want.retain(|_, v| *v != BigInt::from(0));
        let got: BTreeMap<i64, BigInt> =
            laurent_compose(&h, &f).unwrap().coeffs().iter().map(|(d, m)| (*d, int(m.get(0, 0)))).collect();
        ensure(got == want, || format!("differential sample {i} disagrees"))?;
    }
    Ok("1500 triples and 500 differential samples".into())
}

fn division_steps() -> Outcome {
    let auts = sample_auts();
    let mut steps = 0;
    for i in 0..200u64 {
        let aut = &auts[i as usize % auts.len()];
        let r = aut.ring().clone();
        let mut g = rng(1000 + i);
        let rank = g.gen_range(1..=2);
        let d0 = g.gen_range(0..=2);
        let lead = rand_laurent(aut, &mut g, rank, rank, 0, d0 - 1)
            .add(
                &LaurentMor::monomial(Obj::new(rank), Obj::new(rank), aut.clone(), d0, unimodular(&r, &mut g, rank))
                    .unwrap(),
            )
            .unwrap();
        let mut gens = vec![lead];
        for _ in 0..g.gen_range(0..=2) {
            let k = g.gen_range(1..=2);
            gens.push(rand_laurent(aut, &mut g, k, rank, 0, 3));
        }
        let cols = g.gen_range(1..=2);
        let mut f = LaurentMor::zero(Obj::new(cols), Obj::new(rank), aut.clone());
        for gen in &gens {
            let h = rand_laurent(aut, &mut g, cols, gen.dom().rank(), 0, 3);
            f = f.add(&laurent_compose(gen, &h).unwrap()).unwrap();
        }
        let mut cur = f;
        let mut first = true;
        while let Some(d) = degree_data(&cur).unwrap().degree {
            let Some(lifts) = find_lift(&cur, &gens).unwrap() else {
                ensure(!first, || format!("instance {i} is not solvable"))?;
                break;
            };
            first = false;
            let next = division_step(&cur, &gens, &lifts).unwrap();
            let e = degree_data(&next).unwrap().degree;
            ensure(e.is_none_or(|e| e < d), || format!("instance {i}: degree {d} -> {e:?}"))?;
            steps += 1;
            cur = next;
        }
        ensure(cur.max_degree().is_none_or(|e| e < d0), || {
            format!("instance {i}: remainder above the leading degree")
        })?;
    }
    Ok(format!("200 instances, {steps} strictly decreasing steps"))
}

fn nil_degrees() -> Outcome {
    let z = ring(RingSpec::Integers);
    let id = &sample_auts()[0];
    for k in 2..=5 {
        let mut f = Mat::zeros(z.clone(), k, k);
        for i in 0..k - 1 {
            f.set(i, i + 1, z.one());
        }
        let nil = NilObject::new(Obj::new(k), f.clone(), id.clone()).unwrap();
        let got = nil_degree(&nil, default_nil_bound(&nil)).unwrap();
        ensure(got == Some(k), || format!("block of size {k}: {got:?}"))?;
        ensure(twisted_power(id, &f, k).is_zero() && !twisted_power(id, &f, k - 1).is_zero(), || {
            format!("block {k} recompute")
        })?;
    }
    let rot = &sample_auts()[2];
    let r = rot.ring().clone();
    let mut g = rng(77);
    for i in 0..100 {
        let n = g.gen_range(1..=3);
        let mut f = rand_mat(&r, &mut g, n, n);
        if i % 2 == 0 {
            for a in 0..n {
                for b in 0..=a {
                    f.set(a, b, r.zero());
                }
            }
        }
        let nil = NilObject::new(Obj::new(n), f.clone(), rot.clone()).unwrap();
        let bound = default_nil_bound(&nil);
        let ok = match nil_degree(&nil, bound).unwrap() {
            Some(k) => twisted_power(rot, &f, k).is_zero() && (k == 1 || !twisted_power(rot, &f, k - 1).is_zero()),
            None => !twisted_power(rot, &f, bound).is_zero(),
        };
        ensure(ok, || format!("rotation sample {i} fails recomputation"))?;
    }
    Ok("degrees 2..5 exact, 100 rotation verdicts recomputed".into())
}

fn characteristic_sequences() -> Outcome {
    let mut runs = 0;
    for aut in sample_auts() {
        for rank in 0..=3 {
            for depth in [4, 6] {
                let report = verify_char_seq(&build_char_seq(&Obj::new(rank), &aut, depth).unwrap()).unwrap();
                ensure(report.passed(), || format!("{} rank {rank} depth {depth}: {:?}", aut.kind(), report.failures))?;
                runs += 1;
            }
        }
    }
    let auts = sample_auts();
    for i in 0..50u64 {
        let mut g = rng(i);
        let aut = &auts[i as usize % 3];
        let rank = g.gen_range(1..=3);
        let depth = [4, 6][g.gen_range(0..2)];
        let mut maps = build_char_seq(&Obj::new(rank), aut, depth).unwrap();
        let hit = mutate_shift(&mut maps, &mut g).ok_or("mutation found nothing to corrupt")?;
        ensure(!verify_char_seq(&maps).unwrap().passed(), || format!("mutation {hit:?} slipped through"))?;
    }
    Ok(format!("{runs} sequences pass, 50/50 mutations caught"))
}

fn product_stability() -> Outcome {
    for w in 2..=4 {
        let r = ring(RingSpec::Product(Box::new(RingSpec::Rationals), w));
        let mut g = rng(900 + w as u64);
        for i in 0..100 {
            let (m, n) = (g.gen_range(1..=3), g.gen_range(1..=3));
            let out = certify_morphism(&Mor::from_mat(rand_mat(&r, &mut g, m, n)), 0, 1).unwrap();
            let assembled = matches!(&out.certificate, Some(Certificate::Product { assembled: Some(_), .. }));
            ensure(out.verdict == Verdict::Certified && assembled && out.reverify().unwrap(), || {
                format!("w={w} sample {i}")
            })?;
        }
    }
    Ok("300/300 assembled certificates verified".into())
}

fn nested_report(spec: RingSpec, l: usize, exec: Exec) -> addcat::nested::NestedReport {
    let model = NestedModel::graded_full(ring(spec));
    let policy = NestedPolicy { trials: 30, seed: 8, horizon: 8, ..NestedPolicy::default() };
    certify_s_l(&model, l, &policy, exec).unwrap()
}

fn nested_transfer() -> Outcome {
    for (spec, l) in [(RingSpec::PrimeField(5), 0), (RingSpec::Integers, 1)] {
        let r = nested_report(spec.clone(), l, Exec::Parallel);
        ensure(r.aggregate == Verdict::Certified && r.reverify().unwrap(), || {
            format!("{spec} l={l}: {:?}", r.aggregate)
        })?;
    }
    let r = nested_report(RingSpec::Integers, 0, Exec::Parallel);
    ensure(r.aggregate == Verdict::Refuted, || format!("Z l=0: {:?}", r.aggregate))?;
    let cx = r.trials.iter().find_map(|t| t.counterexample.as_ref()).ok_or("no counterexample")?;
    ensure(matches!(cx.index, LiftIndex::Component(_)) && cx.verify().unwrap(), || {
        format!("counterexample at {:?}", cx.index)
    })?;

    let z = ring(RingSpec::Integers);
    let one = SeqObj::canonical(1);
    let id = SeqMor::identity(z.clone(), one.clone());
    let f_cur = SeqMor::zero(z.clone(), one.clone(), SeqObj::zero());
    for i in 0..50u64 {
        let mut g = rng(i);
        let h = g.gen_range(1..=8);
        let mut entries = vec![mat(&z, &[&[1]]); h];
        let bad: Vec<usize> = (0..g.gen_range(1..=3)).map(|_| g.gen_range(0..h)).collect();
        for &b in &bad {
            entries[b] = mat(&z, &[&[2]]);
        }
        let f_next = SeqMor::new(z.clone(), one.clone(), one.clone(), entries, MorTail::Scalar(z.one())).unwrap();
        ensure(matches!(lift_in_s(&id, &f_next, &f_cur).unwrap(), LiftOutcome::Blocked(_)), || {
            format!("instance {i} lifts strictly")
        })?;
        let out = lift_in_l(&id, &f_next, &f_cur).unwrap();
        let cert = out.cert().ok_or_else(|| format!("instance {i}: no limit lift"))?;
        let want = bad.iter().max().unwrap() + 1;
        ensure(cert.threshold == want && cert.verify().unwrap(), || {
            format!("instance {i}: threshold {}", cert.threshold)
        })?;
    }
    let doubling = SeqMor::new(z.clone(), one.clone(), one, Vec::new(), MorTail::Scalar(z.from_i64(2))).unwrap();
    let out = lift_in_l(&id, &doubling, &f_cur).unwrap();
    ensure(matches!(out, LiftOutcome::Blocked(LiftIndex::Tail)), || "doubling tail lifted".into())?;
    Ok("F5 l=0 and Z l=1 certified, Z l=0 refuted, 50 finite obstructions lifted, doubling tail blocked".into())
}

/// Every seeded report the suite produces, in one document.
fn suite_document(exec: Exec) -> Value {
    let mut batches = Vec::new();
    for (spec, l) in [
        (RingSpec::Integers, 0),
        (RingSpec::Integers, 1),
        (RingSpec::Integers, 2),
        (RingSpec::Rationals, 0),
        (RingSpec::IntegersMod(4), 2),
        (RingSpec::Product(Box::new(RingSpec::Rationals), 3), 0),
    ] {
        let policy = SamplingPolicy { trials: 40, seed: 17, ..SamplingPolicy::default() };
        batches.push(certify_uniform(&ring(spec), &policy, l, exec).unwrap().to_json());
    }
    let nested: Vec<Value> = [(RingSpec::PrimeField(5), 0), (RingSpec::Integers, 1), (RingSpec::Integers, 0)]
        .into_iter()
        .map(|(spec, l)| nested_report(spec, l, exec).to_json())
        .collect();
    let charseq: Vec<Value> = sample_auts()
        .iter()
        .map(|a| verify_char_seq(&build_char_seq(&Obj::new(2), a, 4).unwrap()).unwrap().to_json())
        .collect();
    json!({ "batches": batches, "nested": nested, "charseq": charseq })
}

fn determinism() -> Outcome {
    let a = serde_json::to_string(&suite_document(Exec::Parallel)).unwrap();
    let b = serde_json::to_string(&suite_document(Exec::Parallel)).unwrap();
    let c = serde_json::to_string(&suite_document(Exec::Sequential)).unwrap();
    ensure(a == b, || "two parallel runs differ".into())?;
    ensure(a == c, || "parallel and sequential runs differ".into())?;
    Ok(format!("{} bytes identical across three runs", a.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exactness oracle vs enumeration", exhaustive_exactness),
        ("fields are von Neumann regular", fields_regular),
        ("integer factorization and resolution", integer_factorization),
        ("negative controls", negative_controls),
        ("twisted Laurent algebra", laurent_algebra),
        ("division step lowers degree", division_steps),
        ("nil degrees", nil_degrees),
        ("characteristic sequence", characteristic_sequences),
        ("product stability", product_stability),
        ("nested transfer", nested_transfer),
        ("determinism", determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
