//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails or runs over its time limit.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use pmcode_cli::{cli_run, share_name, EXIT_OK};
use pmcode_core::audit::{self, ContextDependent, Independence, Leakage, Recoverability, ViewSpec};
use pmcode_core::mds::{decode_bw, decode_exhaustive};
use pmcode_core::sharefile::{ShareFile, HEADER_LEN};
use pmcode_core::{
    node_forms, Code, CodeSpec, Detection, EncodingMatrix, Fe, MbrParams, MsrParams, Observation, PrimeField, Regime,
    RegeneratingCode, Share,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(r).collect()
}

const HEPTAGON_POINTS: [u64; 7] = [0, 1, 3, 2, 6, 5, 4];

fn pentagon() -> Code {
    CodeSpec::new(Regime::Mbr, 5, 2, 2, 5)
        .with_psi(vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2], vec![1, 3]])
        .build()
        .unwrap()
}

fn triangle() -> Code {
    CodeSpec::new(Regime::Mbr, 3, 2, 2, 3).secure(1, 1).with_points(&[1, 2, 0]).build().unwrap()
}

fn heptagon() -> CodeSpec {
    CodeSpec::new(Regime::Msr, 7, 3, 4, 13).with_points(&HEPTAGON_POINTS)
}

fn table(code: &Code) -> Vec<Vec<Vec<u64>>> {
    node_forms(code).unwrap().iter().map(|m| m.to_u64_rows()).collect()
}

fn random_message(code: &Code, rng: &mut ChaCha8Rng) -> Vec<Fe> {
    let q = code.field().modulus() as u64;
    (0..code.message_unit()).map(|_| code.field().elem(rng.gen_range(0..q))).collect()
}

fn nonzero_vectors(field: PrimeField, len: usize) -> Vec<Vec<Fe>> {
    let q = field.modulus() as u64;
    let total = q.pow(len as u32);
    (1..total)
        .map(|mut idx| {
            (0..len)
                .map(|_| {
                    let v = idx % q;
                    idx /= q;
                    field.elem(v)
                })
                .collect()
        })
        .collect()
}

fn parameter_identities() -> Result<String, String> {
    let mut checked = 0;
    for n in 2..=10usize {
        for k in 1..=5usize.min(n - 1) {
            for d in k..n {
                for beta in 1..=2usize {
                    for ell in 0..k {
                        for m in 0..=ell {
                            let p = MbrParams::derive(n, k, d, beta, ell, m).map_err(|e| e.to_string())?;
                            ensure!(p.alpha == d * beta, "MBR alpha {n},{k},{d}");
                            ensure!(p.b == (k * d - k * (k - 1) / 2) * beta, "MBR B {n},{k},{d}");
                            ensure!(
                                p.r == (ell * d - ell * ell.saturating_sub(1) / 2) * beta,
                                "MBR R {n},{k},{d},{ell}"
                            );
                            ensure!(p.b_star == (ell..k).map(|i| (d - i) * beta).sum::<usize>(), "MBR B* {n},{k},{d},{ell}");
                            ensure!(p.b_star + p.r == p.b, "MBR B*+R");
                            checked += 1;
                            if let Ok(p) = MsrParams::derive(n, k, d, beta, ell, m) {
                                ensure!(p.alpha == (d - k + 1) * beta, "MSR alpha {n},{k},{d}");
                                ensure!(p.b == k * p.alpha, "MSR B {n},{k},{d}");
                                ensure!(p.b == (0..k).map(|i| p.alpha.min((d - i) * beta)).sum::<usize>(), "MSR cut-set");
                                ensure!(p.b_star == (k - ell) * (p.alpha - m * beta), "MSR B* {n},{k},{d},{ell},{m}");
                                ensure!(p.r == p.b - p.b_star, "MSR R");
                                checked += 1;
                            } else {
                                ensure!(k < 2 || d + 2 < 2 * k, "MSR rejected valid {n},{k},{d}");
                            }
                        }
                    }
                }
            }
        }
    }
    let b = MbrParams::derive(5, 2, 2, 1, 0, 0).unwrap().b;
    let s = MbrParams::derive(3, 2, 2, 1, 1, 1).unwrap();
    let h = MsrParams::derive(7, 3, 4, 1, 0, 0).unwrap().b;
    let t = MsrParams::derive(7, 3, 4, 1, 1, 0).unwrap();
    ensure!(b == 3 && (s.b_star, s.r) == (1, 2), "MBR spot values");
    ensure!(h == 6 && (t.b_star, t.r) == (4, 2), "MSR spot values");
    Ok(format!("{checked} parameter sets"))
}

fn example_tables() -> Result<String, String> {
    let five = table(&pentagon());
    let expect: Vec<Vec<Vec<u64>>> = vec![
        vec![vec![1, 0, 0], vec![0, 1, 0]],
        vec![vec![0, 1, 0], vec![0, 0, 1]],
        vec![vec![1, 1, 0], vec![0, 1, 1]],
        vec![vec![1, 2, 0], vec![0, 1, 2]],
        vec![vec![1, 3, 0], vec![0, 1, 3]],
    ];
    ensure!(five == expect, "systematic MBR table {five:?}");

    let plain = table(&heptagon().build().unwrap());
    ensure!(plain[1] == vec![vec![1, 1, 0, 1, 1, 0], vec![0, 1, 1, 0, 1, 1]], "MSR node 2 {:?}", plain[1]);

    let sys = table(&heptagon().systematic().build().unwrap());
    ensure!(sys[0] == vec![vec![1, 0, 0, 0, 0, 0], vec![0, 1, 0, 0, 0, 0]], "systematic node 1");
    ensure!(sys[3] == vec![vec![6, 8, 2, 0, 6, 0], vec![6, 4, 3, 11, 4, 10]], "systematic node 4 {:?}", sys[3]);

    let short = table(&CodeSpec::new(Regime::Msr, 6, 2, 3, 13).with_points(&HEPTAGON_POINTS).build().unwrap());
    for node in 0..6 {
        let expect: Vec<Vec<u64>> = sys[node + 1].iter().map(|r| r[2..].to_vec()).collect();
        ensure!(short[node] == expect, "shortened node {}", node + 1);
    }
    ensure!(short[2] == vec![vec![2, 0, 6, 0], vec![3, 11, 4, 10]], "shortened node 3");

    let secure = table(&heptagon().secure(1, 0).build().unwrap());
    ensure!(secure[1] == vec![vec![0, 1, 1, 0, 1, 1], vec![1, 0, 1, 1, 0, 1]], "secure MSR node 2 {:?}", secure[1]);

    let tri = table(&triangle());
    for (i, rows) in tri.iter().enumerate() {
        let x = [1, 2, 0][i];
        ensure!(*rows == vec![vec![0, 1, x], vec![x, 0, 1]], "secure MBR node {}", i + 1);
    }
    Ok("6 tables".into())
}

fn exhaustive_repair() -> Result<String, String> {
    let mut cases = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for code in [pentagon(), heptagon().build().unwrap()] {
        let field = code.field();
        let q = field.modulus() as u64;
        let (n, d) = (code.n(), code.d());
        for _ in 0..2 {
            let msg = random_message(&code, &mut rng);
            let shares = code.encode(&msg, &mut rng).map_err(|e| e.to_string())?;
            for failed in 1..=n {
                let others: Vec<&Share> = shares.iter().filter(|s| s.node != failed).collect();
                for p in [0usize, 1] {
                    for set in combinations(others.len(), d + 2 * p) {
                        let hs: Vec<&Share> = set.iter().map(|&i| others[i]).collect();
                        let clean = code.helper_data(&hs, failed).map_err(|e| e.to_string())?;
                        let mut patterns = vec![clean.clone()];
                        if p == 1 {
                            for b in 0..hs.len() {
                                for delta in 1..q {
                                    let mut data = clean.clone();
                                    data[b].symbols[0] += field.elem(delta);
                                    patterns.push(data);
                                }
                            }
                        }
                        for data in patterns {
                            cases += 1;
                            let got = code.repair(failed, &data, p).map_err(|e| format!("node {failed}: {e}"))?;
                            ensure!(got == shares[failed - 1], "node {failed} p={p} repaired wrongly");
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{cases} repairs"))
}

fn exhaustive_reconstruction() -> Result<String, String> {
    let mut cases = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for code in [pentagon(), heptagon().build().unwrap()] {
        let field = code.field();
        let (n, k, alpha) = (code.n(), code.k(), code.alpha());
        let errors = nonzero_vectors(field, alpha);
        let msg = random_message(&code, &mut rng);
        let shares = code.encode(&msg, &mut rng).map_err(|e| e.to_string())?;
        for p in [0usize, 1] {
            let per_set = 1 + (k + 2 * p) as u64 * errors.len() as u64 * p as u64;
            let total = combinations(n, k + 2 * p).len() as u64 * per_set;
            ensure!(total <= 1_000_000, "pattern space {total} needs sampling");
            for set in combinations(n, k + 2 * p) {
                let chosen: Vec<Share> = set.iter().map(|&i| shares[i].clone()).collect();
                let mut patterns = vec![chosen.clone()];
                if p == 1 {
                    for b in 0..chosen.len() {
                        for e in &errors {
                            let mut bad = chosen.clone();
                            for (x, &y) in bad[b].stripes[0].iter_mut().zip(e) {
                                *x += y;
                            }
                            patterns.push(bad);
                        }
                    }
                }
                for pattern in patterns {
                    cases += 1;
                    let got = code.reconstruct(&pattern, p).map_err(|e| format!("{set:?} p={p}: {e}"))?;
                    ensure!(got == msg, "{set:?} p={p} decoded wrongly");
                }
            }
        }
    }
    Ok(format!("{cases} reads, 0 failures"))
}

fn leakage() -> Result<String, String> {
    let code = triangle();
    let space = 3u64.pow((code.message_len() + code.random_len()) as u32);
    ensure!(space == 27, "pair space {space}");
    let views = ViewSpec::all_admissible(3, 1, 1, 2);
    ensure!(views.len() == 3, "views {}", views.len());
    for v in &views {
        let r = audit::leakage_oracle(&code, v, audit::DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        ensure!(r == Leakage::Secure, "{v:?} leaked");
    }
    let over = ViewSpec::new(&[2, 3], &[]);
    match audit::leakage_oracle(&code, &over, audit::DEFAULT_BUDGET).map_err(|e| e.to_string())? {
        Leakage::Leaky { witness } => Ok(format!("3 views secure; two-node view leaky, witness {witness:?}")),
        Leakage::Secure => Err("two-node view reported secure".into()),
    }
}

fn recoverability_and_rank() -> Result<String, String> {
    let f13 = heptagon().secure(1, 0).build().unwrap();
    let cases = [(triangle(), ViewSpec::new(&[], &[1])), (f13, ViewSpec::new(&[1], &[]))];
    for (code, view) in cases {
        let a = audit::audit_view(&code, &view, audit::DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        ensure!(a.recoverability == Recoverability::Determined, "{view:?} not determined");
        ensure!(a.rank.rank == 2 && code.random_len() == 2, "{view:?} rank {}", a.rank.rank);
        ensure!(a.leakage.is_secure() && a.implication_holds, "{view:?} chain broken");
    }
    Ok("rank 2 = R, determined, secure on both".into())
}

fn detection() -> Result<String, String> {
    let code = pentagon();
    let field = code.field();
    let (n, k, d) = (code.n(), code.k(), code.d());
    let p = 1;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let msg = random_message(&code, &mut rng);
    let shares = code.encode(&msg, &mut rng).map_err(|e| e.to_string())?;
    let mut cases = 0;
    for failed in 1..=n {
        let others: Vec<&Share> = shares.iter().filter(|s| s.node != failed).collect();
        for set in combinations(others.len(), d + p) {
            let hs: Vec<&Share> = set.iter().map(|&i| others[i]).collect();
            let clean = code.helper_data(&hs, failed).map_err(|e| e.to_string())?;
            ensure!(code.detect_repair(failed, &clean, p) == Ok(Detection::Clean), "clean repair flagged");
            for b in 0..hs.len() {
                for delta in 1..5 {
                    let mut data = clean.clone();
                    data[b].symbols[0] += field.elem(delta);
                    cases += 1;
                    ensure!(
                        code.detect_repair(failed, &data, p) == Ok(Detection::Corrupted),
                        "missed corruption of helper {} for node {failed}",
                        hs[b].node
                    );
                }
            }
        }
    }
    let errors = nonzero_vectors(field, code.alpha());
    for set in combinations(n, k + p) {
        let chosen: Vec<Share> = set.iter().map(|&i| shares[i].clone()).collect();
        ensure!(code.detect_shares(&chosen, p) == Ok(Detection::Clean), "clean shares flagged");
        for b in 0..chosen.len() {
            for e in &errors {
                let mut bad = chosen.clone();
                for (x, &y) in bad[b].stripes[0].iter_mut().zip(e) {
                    *x += y;
                }
                cases += 1;
                ensure!(code.detect_shares(&bad, p) == Ok(Detection::Corrupted), "missed share corruption {set:?}");
            }
        }
    }
    Ok(format!("{cases} corrupted patterns flagged"))
}

fn helper_independence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let codes = [
        pentagon(),
        triangle(),
        heptagon().build().unwrap(),
        heptagon().systematic().build().unwrap(),
        heptagon().secure(1, 0).build().unwrap(),
        CodeSpec::new(Regime::Mbr, 6, 3, 4, 11).systematic().build().unwrap(),
        CodeSpec::new(Regime::Msr, 6, 2, 3, 13).with_points(&HEPTAGON_POINTS).build().unwrap(),
    ];
    let mut held = 0;
    for code in &codes {
        let msg = random_message(code, &mut rng);
        let shares = code.encode(&msg, &mut rng).map_err(|e| e.to_string())?;
        let r = audit::helper_independence(code, &shares).map_err(|e| e.to_string())?;
        ensure!(matches!(r, Independence::Holds { .. }), "{:?} violated: {r:?}", code.spec());
        held += 1;
    }
    let code = pentagon();
    let shares = code.encode(&random_message(&code, &mut rng), &mut rng).map_err(|e| e.to_string())?;
    let mock = audit::helper_independence(&ContextDependent(code), &shares).map_err(|e| e.to_string())?;
    ensure!(matches!(mock, Independence::Violated { .. }), "mock not caught");
    Ok(format!("{held} codes hold, mock violated"))
}

fn decoder_equivalence() -> Result<String, String> {
    let primes = [11u64, 13, 17, 19, 23];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut total, mut within) = (0, 0);
    while total < 12_000 {
        let field = PrimeField::new(primes[rng.gen_range(0..primes.len())]).unwrap();
        let q = field.modulus() as u64;
        let p = rng.gen_range(0..=2usize);
        let n = rng.gen_range((1 + 2 * p).max(2)..=9);
        let d = rng.gen_range(1..=n - 2 * p);
        let mut pts: Vec<u64> = (0..q).collect();
        for i in (1..pts.len()).rev() {
            pts.swap(i, rng.gen_range(0..=i));
        }
        let gen = EncodingMatrix::vandermonde_with_points(field, &field.elems(&pts[..n]), d).map_err(|e| e.to_string())?;
        let msg: Vec<Fe> = (0..d).map(|_| field.elem(rng.gen_range(0..q))).collect();
        let mut y = gen.psi().mul_vec(&msg).map_err(|e| e.to_string())?;
        let weight = rng.gen_range(0..=p + 1).min(n);
        let positions = rand::seq::index::sample(&mut rng, n, weight);
        for i in positions {
            y[i] += field.elem(rng.gen_range(1..q));
        }
        let obs = Observation::new(gen, y).map_err(|e| e.to_string())?;
        let bw = decode_bw(&obs, p).ok();
        let ex = decode_exhaustive(&obs, p).ok();
        ensure!(bw == ex, "disagreement at n={n} d={d} p={p} q={q}");
        if weight <= p {
            ensure!(bw.as_deref() == Some(&msg[..]), "miscorrection within radius");
            within += 1;
        }
        total += 1;
    }
    Ok(format!("{total} instances agree ({within} within radius)"))
}

fn run_cli(args: &[&str]) -> i32 {
    cli_run(std::iter::once("pmcode").chain(args.iter().copied()))
}

/// Adds one (mod q) to every payload symbol, keeping the file valid.
fn corrupt_share_file(path: &Path) -> Result<(), String> {
    let mut bytes = fs::read(path).map_err(|e| e.to_string())?;
    let q = ShareFile::from_bytes(&bytes).map_err(|e| e.to_string())?.header.modulus;
    for chunk in bytes[HEADER_LEN..].chunks_exact_mut(8) {
        let v = u64::from_le_bytes(chunk.try_into().unwrap());
        chunk.copy_from_slice(&((v + 1) % q).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| e.to_string())
}

fn cli_round_trip() -> Result<String, String> {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let input = dir.path().join("input.bin");
    let mut data = vec![0u8; 1 << 20];
    ChaCha8Rng::seed_from_u64(10).fill(&mut data[..]);
    fs::write(&input, &data).map_err(|e| e.to_string())?;
    let shares = dir.path().join("shares");
    let (i, s) = (input.to_str().unwrap(), shares.to_str().unwrap());
    let code = run_cli(&["encode", "--regime", "msr", "-n", "7", "-k", "3", "-d", "4", "--field", "65537", i, s]);
    ensure!(code == EXIT_OK, "encode exited {code}");

    let lost = shares.join(share_name(2));
    let before = fs::read(&lost).map_err(|e| e.to_string())?;
    fs::remove_file(&lost).map_err(|e| e.to_string())?;
    corrupt_share_file(&shares.join(share_name(5)))?;
    let code = run_cli(&["repair", "--failed", "2", "--helpers", "1,3,4,5,6,7", "-p", "1", s]);
    ensure!(code == EXIT_OK, "repair exited {code}");
    ensure!(fs::read(&lost).map_err(|e| e.to_string())? == before, "repaired share differs");

    let output = dir.path().join("output.bin");
    let files: Vec<String> = [1, 2, 3, 4, 5].iter().map(|&n| shares.join(share_name(n)).to_str().unwrap().to_string()).collect();
    let mut args = vec!["reconstruct", "-p", "1", "-o", output.to_str().unwrap()];
    args.extend(files.iter().map(String::as_str));
    let code = run_cli(&args);
    ensure!(code == EXIT_OK, "reconstruct exited {code}");
    ensure!(fs::read(&output).map_err(|e| e.to_string())? == data, "output differs from input");
    Ok("1 MiB bit-identical".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, u64); 10] = [
        ("parameter identities", parameter_identities, 1),
        ("example encoding tables", example_tables, 1),
        ("exhaustive exact repair", exhaustive_repair, 30),
        ("exhaustive reconstruction", exhaustive_reconstruction, 60),
        ("leakage oracle", leakage, 5),
        ("recoverability and rank", recoverability_and_rank, 10),
        ("detection contract", detection, 5),
        ("helper independence", helper_independence, 1),
        ("decoder equivalence", decoder_equivalence, 30),
        ("cli round trip", cli_round_trip, 10),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*limit);
        let (tag, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {limit}s limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} {:>2}. {name}: {detail} [{:.3}s / {limit}s]", i + 1, elapsed.as_secs_f64());
    }
    if failed == 0 {
        println!("all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
