use std::io::Cursor;
use std::path::Path;
use std::process::Command;

use benaloh::cipher::{decrypt, encrypt_with_nonce};
use benaloh::keyfile::{parse_private_key, serialize_private};
use benaloh::{fixtures, Backend};
use benaloh_cli::{run, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
use num_bigint::BigUint;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn invoke(args: &[&str], stdin: &str) -> Outcome {
    let mut input = Cursor::new(stdin.as_bytes().to_vec());
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("benaloh").chain(args.iter().copied());
    let code = run(argv, &mut input, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write_key(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn audit_reports_the_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let key = write_key(dir.path(), "bad.key", &serialize_private(&fixtures::counterexample_key()));
    let o = invoke(&["audit", "--key", &key], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    for line in [
        "passes_original=true",
        "passes_corrected=false",
        "failing_primes=3",
        "actual_space=5",
    ] {
        assert!(o.stdout.lines().any(|l| l == line), "missing {line} in {}", o.stdout);
    }
}

#[test]
fn prob_prints_exact_ratio() {
    let o = invoke(&["prob", "--r-factors", "3,5"], "");
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(o.stdout.lines().next(), Some("3/7"));
    let o = invoke(&["prob", "--r-factors", "15"], "");
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let key = write_key(dir.path(), "k.key", &serialize_private(&fixtures::counterexample_corrected_key()));
    for args in [
        vec!["frobnicate"],
        vec!["audit"],
        vec!["audit", "--key", &key, "--bogus"],
        vec!["decrypt", "--key", &key, "12x"],
        vec!["decrypt", "--key", &key, "0"],
        vec!["decrypt", "--key", &key, "--backend", "magic", "1"],
        vec!["keygen", "--mode", "sideways"],
        vec!["keygen", "--r", "prescribed:"],
    ] {
        let o = invoke(&args, "");
        assert_eq!(o.code, EXIT_USAGE, "{args:?}: {}", o.stderr);
        assert!(!o.stderr.is_empty());
    }
    let o = invoke(&["frobnicate"], "");
    assert!(o.stderr.contains("Usage"));
    let o = invoke(&["--help"], "");
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("keygen"));
}

#[test]
fn domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_key(dir.path(), "k.key", &serialize_private(&fixtures::counterexample_corrected_key()));
    let bad = write_key(dir.path(), "bad.key", &serialize_private(&fixtures::counterexample_key()));
    for args in [
        vec!["encrypt", "--key", &good, "15"],
        vec!["craft-faulty", "--key", &good, "--u", "4"],
        vec!["craft-faulty", "--key", &bad, "--u", "3"],
        vec!["audit", "--key", "/nonexistent/key"],
        vec!["keygen", "--bits", "8"],
    ] {
        let o = invoke(&args, "");
        assert_eq!(o.code, EXIT_DOMAIN, "{args:?}: {}", o.stderr);
    }
}

#[test]
fn encrypt_then_decrypt_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let sk = fixtures::counterexample_corrected_key();
    let key = write_key(dir.path(), "k.key", &serialize_private(&sk));
    let messages: Vec<String> = (0..15).map(|m| m.to_string()).collect();
    let stdin = messages.join("\n");
    let enc = invoke(&["encrypt", "--key", &key, "--seed", "9"], &stdin);
    assert_eq!(enc.code, EXIT_OK, "{}", enc.stderr);
    for backend in ["exhaustive", "bsgs", "pohlig-hellman"] {
        let dec = invoke(&["decrypt", "--key", &key, "--backend", backend], &enc.stdout);
        assert_eq!(dec.code, EXIT_OK);
        assert_eq!(dec.stdout.lines().collect::<Vec<_>>(), messages);
    }
    for m in 0..15u32 {
        let c = encrypt_with_nonce(&sk.public(), &m.into(), &BigUint::from(7u8)).unwrap();
        let o = invoke(&["encrypt", "--key", &key, "--nonce", "7", &m.to_string()], "");
        assert_eq!(o.stdout.trim(), c.to_string());
        let lib = decrypt(&sk, &c, Backend::Bsgs).unwrap();
        let o = invoke(&["decrypt", "--key", &key, &c.to_string()], "");
        assert_eq!(o.stdout.trim(), lib.to_string());
    }
}

#[test]
fn collisions_under_the_faulty_key() {
    let dir = tempfile::tempdir().unwrap();
    let key = write_key(dir.path(), "bad.key", &serialize_private(&fixtures::counterexample_key()));
    let a = invoke(&["encrypt", "--key", &key, "--nonce", "12", "1"], "");
    let b = invoke(&["encrypt", "--key", &key, "--nonce", "4", "6"], "");
    assert_eq!(a.stdout, "24187\n");
    assert_eq!(b.stdout, "24187\n");
    let d = invoke(&["decrypt", "--key", &key, "24187"], "");
    assert_eq!(d.stdout, "1\n");
}

#[test]
fn hom_commands() {
    let dir = tempfile::tempdir().unwrap();
    let sk = fixtures::counterexample_corrected_key();
    let key = write_key(dir.path(), "k.key", &serialize_private(&sk));
    let enc = invoke(&["encrypt", "--key", &key, "--seed", "1", "4", "9", "13"], "");
    let sum = invoke(&["hom", "add", "--key", &key], &enc.stdout);
    assert_eq!(sum.code, EXIT_OK);
    let d = invoke(&["decrypt", "--key", &key], &sum.stdout);
    assert_eq!(d.stdout, "11\n");
    let scaled = invoke(&["hom", "scale", "--key", &key, "--k", "4"], &enc.stdout);
    let d = invoke(&["decrypt", "--key", &key], &scaled.stdout);
    assert_eq!(d.stdout, "1\n6\n7\n");
}

#[test]
fn keygen_is_deterministic_under_seed_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = invoke(&["keygen", "--bits", "64", "--r", "smooth:100", "--seed", "42"], "");
    let b = invoke(&["keygen", "--bits", "64", "--r", "smooth:100", "--seed", "42"], "");
    assert_eq!(a.code, EXIT_OK, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let sk = parse_private_key(&a.stdout).unwrap();
    assert_eq!(serialize_private(&sk), a.stdout);

    let prefix = dir.path().join("node");
    let o = invoke(&["keygen", "--seed", "1", "--out-prefix", prefix.to_str().unwrap()], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let public = std::fs::read_to_string(dir.path().join("node.pub")).unwrap();
    let private = std::fs::read_to_string(dir.path().join("node.key")).unwrap();
    assert!(public.starts_with("BENALOH PUBLIC KEY v1\n"));
    assert_eq!(parse_private_key(&private).unwrap().public(), benaloh::keyfile::parse_public_key(&public).unwrap());
}

#[test]
fn craft_then_audit() {
    let dir = tempfile::tempdir().unwrap();
    let key = write_key(dir.path(), "k.key", &serialize_private(&fixtures::counterexample_corrected_key()));
    let out = dir.path().join("faulty.key");
    let o = invoke(&["craft-faulty", "--key", &key, "--u", "3", "--out", out.to_str().unwrap()], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let report = invoke(&["audit", "--key", out.to_str().unwrap()], "");
    assert!(report.stdout.contains("passes_corrected=false\n"));
    assert!(report.stdout.contains("collapse_factor=3\n"));
    let census = invoke(&["census", "--key", out.to_str().unwrap()], "");
    assert_eq!(census.stdout, "eligible=39872\nfaulty=17088\nratio=3/7\n");
}

#[test]
fn demos_print_summary_lines() {
    let o = invoke(&["demo", "vote", "--faulty", "--seed", "1"], "");
    assert!(o.stdout.contains("tally_yes=4 tally_no=16"), "{}", o.stdout);
    let o = invoke(&["demo", "vote", "--ballots", "1,0,1", "--seed", "1"], "");
    assert!(o.stdout.contains("tally_yes=2"));
    let o = invoke(&["demo", "vote", "--ballots", "1,2"], "");
    assert_eq!(o.code, EXIT_USAGE);

    let o = invoke(&["demo", "trust", "--faulty", "1", "--seed", "2"], "");
    assert!(o.stdout.contains("r_prime=35 faulty_contribution=34 true_total=0"), "{}", o.stdout);
    let o = invoke(&["demo", "trust", "--scenario", "random", "--seed", "2"], "");
    assert_eq!(o.code, EXIT_OK);

    let o = invoke(&["demo", "cards", "--m1", "10", "--m2", "20", "--alphas", "20,30,3", "--seed", "3"], "");
    assert!(o.stdout.contains("verdict=equal recovered_alphas=20,30,3"), "{}", o.stdout);
    let o = invoke(
        &["demo", "cards", "--m1", "10", "--m2", "20", "--alphas", "20,30,3", "--mode", "fixed", "--seed", "3"],
        "",
    );
    assert!(o.stdout.contains("recovered_alphas=none,none,none"), "{}", o.stdout);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_benaloh");
    let ok = Command::new(bin).args(["prob", "--r-factors", "3,5"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).lines().next(), Some("3/7"));
    let bad = Command::new(bin).arg("nonsense").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("Usage"));
}
