use std::io::Write;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn addcat(args: &[&str], doc: Option<&Value>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_addcat"));
    cmd.args(args);
    let _file = doc.map(|d| {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{d}").unwrap();
        cmd.arg(f.path());
        f
    });
    cmd.output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn doc(ring: Value, payload: Value) -> Value {
    json!({ "version": "1.0", "ring": { "kind": ring }, "payload": payload })
}

fn int_mor(rows: &[&[i64]]) -> Value {
    let entries: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(i64::to_string).collect()).collect();
    let (m, n) = (rows.len(), rows.first().map_or(0, |r| r.len()));
    json!({ "dom": { "rank": n }, "cod": { "rank": m }, "mat": { "rows": m, "cols": n, "entries": entries } })
}

fn strict_upper(k: usize) -> Value {
    let entries: Vec<Vec<String>> =
        (0..k).map(|i| (0..k).map(|j| if j == i + 1 { "1".into() } else { "0".into() }).collect()).collect();
    json!({ "nil_object": { "obj": { "rank": k }, "phi_mor": { "rows": k, "cols": k, "entries": entries } } })
}

#[test]
fn rational_batch_certifies() {
    let out = addcat(
        &["certify", "--l", "0"],
        Some(&doc(json!("Rationals"), json!({ "batch_policy": { "trials": 25, "seed": 4 } }))),
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "certified");
    assert_eq!(r["certificate"]["counts"]["certified"], 25);
}

#[test]
fn integer_two_is_refuted_at_level_zero() {
    let out = addcat(&["certify", "--l", "0"], Some(&doc(json!("Integers"), json!({ "morphism": int_mor(&[&[2]]) }))));
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!((r["verdict"].as_str(), r["counterexample"]["kind"].as_str()), (Some("refuted"), Some("no_vnr")));
}

#[test]
fn nil_degree_beyond_bound_is_undecided() {
    let d = doc(json!("Integers"), strict_upper(3));
    let out = addcat(&["nil-degree", "--bound", "2"], Some(&d));
    assert_eq!(out.status.code(), Some(2));
    let out = addcat(&["nil-degree"], Some(&d));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["certificate"]["degree"], 3);
}

#[test]
fn input_errors_exit_three() {
    let bad_version =
        json!({ "version": "2.0", "ring": { "kind": "Integers" }, "payload": { "morphism": int_mor(&[&[1]]) } });
    assert_eq!(addcat(&["certify"], Some(&bad_version)).status.code(), Some(3));
    let mut extra = doc(json!("Integers"), json!({ "morphism": int_mor(&[&[1]]) }));
    extra["extra"] = json!(1);
    assert_eq!(addcat(&["certify"], Some(&extra)).status.code(), Some(3));
    let wrong_kind = doc(json!("Integers"), strict_upper(2));
    assert_eq!(addcat(&["check-exact"], Some(&wrong_kind)).status.code(), Some(3));
    assert_eq!(addcat(&["check-exact"], None).status.code(), Some(3));
    assert_eq!(addcat(&["no-such-command"], None).status.code(), Some(3));
}

#[test]
fn unsupported_ring_exits_four() {
    let d = doc(json!({ "IntegersMod": 6 }), json!({ "morphism": int_mor(&[&[3]]) }));
    assert_eq!(addcat(&["idem-split"], Some(&d)).status.code(), Some(4));
}

#[test]
fn exactness_and_divisibility() {
    let pair = doc(json!("Integers"), json!({ "morphism": [int_mor(&[&[2]]), int_mor(&[&[0]])] }));
    let out = addcat(&["check-exact"], Some(&pair));
    assert_eq!(out.status.code(), Some(1));
    let pair = doc(json!("Integers"), json!({ "morphism": [int_mor(&[&[1], &[0]]), int_mor(&[&[0, 0]])] }));
    let out = addcat(&["check-exact"], Some(&pair));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["counterexample"]["kind"], "not_exact");
    let clash = doc(json!("Integers"), json!({ "morphism": [int_mor(&[&[1, 0]]), int_mor(&[&[0, 1]])] }));
    assert_eq!(addcat(&["check-exact"], Some(&clash)).status.code(), Some(3));
    let ok = doc(json!("Integers"), json!({ "morphism": [int_mor(&[&[0], &[1]]), int_mor(&[&[1, 0]])] }));
    assert_eq!(addcat(&["check-exact"], Some(&ok)).status.code(), Some(0));

    let div = doc(json!("Integers"), json!({ "morphism": [int_mor(&[&[6]]), int_mor(&[&[2]])] }));
    let out = addcat(&["divides"], Some(&div));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["certificate"]["h"]["mat"]["entries"], json!([["3"]]));
    let div = doc(json!("Integers"), json!({ "morphism": [int_mor(&[&[3]]), int_mor(&[&[2]])] }));
    assert_eq!(addcat(&["divides"], Some(&div)).status.code(), Some(1));
}

#[test]
fn idempotents_split() {
    let d = doc(json!("Integers"), json!({ "morphism": int_mor(&[&[1, 1], &[0, 0]]) }));
    let out = addcat(&["idem-split"], Some(&d));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["certificate"]["split_rank"], 1);
    let d = doc(json!("Integers"), json!({ "morphism": int_mor(&[&[2]]) }));
    assert_eq!(addcat(&["idem-split"], Some(&d)).status.code(), Some(1));
}

#[test]
fn laurent_operations() {
    let m = |v: i64| json!({ "rows": 1, "cols": 1, "entries": [[v.to_string()]] });
    let f = json!({ "dom": { "rank": 1 }, "cod": { "rank": 1 }, "coeffs": [{ "deg": -1, "mat": m(1) }, { "deg": 1, "mat": m(2) }] });
    let out =
        addcat(&["laurent", "normalize"], Some(&doc(json!("Integers"), json!({ "laurent_morphism": f.clone() }))));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["certificate"]["shift"], 1);

    let out =
        addcat(&["laurent", "compose"], Some(&doc(json!("Integers"), json!({ "laurent_morphism": [f.clone(), f] }))));
    assert_eq!(out.status.code(), Some(0));
    let coeffs = report(&out)["certificate"]["composite"]["coeffs"].clone();
    assert_eq!(coeffs.as_array().unwrap().len(), 3);

    // 2t^2 + 3 divided by t + 1 over Q leaves 5
    let q = |s: &str| json!({ "rows": 1, "cols": 1, "entries": [[s]] });
    let f = json!({ "dom": { "rank": 1 }, "cod": { "rank": 1 }, "coeffs": [{ "deg": 0, "mat": q("3") }, { "deg": 2, "mat": q("2") }] });
    let g = json!({ "dom": { "rank": 1 }, "cod": { "rank": 1 }, "coeffs": [{ "deg": 0, "mat": q("1") }, { "deg": 1, "mat": q("1") }] });
    let out =
        addcat(&["laurent", "divide"], Some(&doc(json!("Rationals"), json!({ "laurent_morphism": [f, g.clone()] }))));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["certificate"]["remainder"]["coeffs"][0]["mat"]["entries"], json!([["5"]]));
    // 2t^2 + 2t is a multiple of t + 1
    let f = json!({ "dom": { "rank": 1 }, "cod": { "rank": 1 }, "coeffs": [{ "deg": 1, "mat": q("2") }, { "deg": 2, "mat": q("2") }] });
    let out = addcat(&["laurent", "divide"], Some(&doc(json!("Rationals"), json!({ "laurent_morphism": [f, g] }))));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["certificate"]["steps"].as_array().unwrap().len(), 1);
}

#[test]
fn charseq_from_flags_and_documents() {
    let out = addcat(
        &["charseq-verify", "--ring", "Product(Integers,2)", "--aut", "rotation:1", "--rank", "2", "--depth", "4"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let d = doc(
        json!({ "FiniteField": [2, 2] }),
        json!({ "charseq_params": { "rank": 1, "aut": { "Frobenius": 1 }, "depth": 6 } }),
    );
    let out = addcat(&["charseq-verify"], Some(&d));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["bounds"]["depth"], 6);
}

fn seq(entries: &[i64], tail: Option<i64>) -> Value {
    let mats: Vec<Value> =
        entries.iter().map(|v| json!({ "rows": 1, "cols": 1, "entries": [[v.to_string()]] })).collect();
    let obj = json!({ "horizon": 0, "entries": [], "tail": { "kind": "Canonical", "rank": 1 } });
    let tail = match tail {
        Some(v) => json!({ "kind": "Scalar", "value": v.to_string() }),
        None => json!({ "kind": "Zero" }),
    };
    json!({ "dom": obj, "cod": obj, "horizon": entries.len(), "entries": mats, "tail": tail })
}

#[test]
fn nested_commands() {
    let out = addcat(
        &[
            "nested",
            "certify",
            "--model",
            "graded",
            "--ring",
            "PrimeField(5)",
            "--l",
            "0",
            "--horizon",
            "8",
            "--trials",
            "10",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let out =
        addcat(&["nested", "certify", "--ring", "Integers", "--l", "0", "--horizon", "8", "--trials", "20"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["counterexample"].is_object());

    let zero = json!({ "dom": { "horizon": 0, "entries": [], "tail": { "kind": "Canonical", "rank": 1 } },
                        "cod": { "horizon": 0, "entries": [], "tail": { "kind": "Zero" } },
                        "horizon": 0, "entries": [], "tail": { "kind": "Zero" } });
    let inst = |f_next: Value| {
        doc(
            json!("Integers"),
            json!({ "sequence_instance": { "mu": seq(&[], Some(1)), "f_next": f_next, "f_cur": zero.clone() } }),
        )
    };
    let finite = inst(seq(&[1, 2, 1], Some(1)));
    let out = addcat(&["nested", "lift"], Some(&finite));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["certificate"]["threshold"], 2);
    assert_eq!(addcat(&["nested", "lift", "--strict"], Some(&finite)).status.code(), Some(1));
    let out = addcat(&["nested", "lift"], Some(&inst(seq(&[], Some(2)))));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["counterexample"]["obstruction"], "tail");

    let eq = |f: Value, g: Value| doc(json!("Integers"), json!({ "sequence_instance": { "f": f, "g": g } }));
    assert_eq!(
        addcat(&["nested", "limit-eq"], Some(&eq(seq(&[5, 7], Some(3)), seq(&[], Some(3))))).status.code(),
        Some(0)
    );
    assert_eq!(
        addcat(&["nested", "limit-eq"], Some(&eq(seq(&[5], Some(3)), seq(&[5], Some(2))))).status.code(),
        Some(1)
    );
}

#[test]
fn reports_are_deterministic() {
    let d = doc(json!("Integers"), json!({ "batch_policy": { "trials": 30, "seed": 9 } }));
    let a = addcat(&["certify", "--l", "2"], Some(&d));
    let b = addcat(&["certify", "--l", "2", "--sequential"], Some(&d));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}
