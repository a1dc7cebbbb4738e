//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use metaudit::cli::{AuditArgs, Format, SimulateArgs, SpaceArgs};
use metaudit::commands::{cmd_audit, cmd_simulate, cmd_space};
use metaudit_core::audit::{bilinearity_test, p_from_ratio_ci, quadratic_fit, EffectRecord, PValuePlot};
use metaudit_core::stats::{ks_statistic, ks_uniform_test, ols_fit, quantile_type6, Design};
use num::{BigRational, One, ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use serde_json::Value;

// Tolerances and budgets.
const SPACE_RUNTIME: Duration = Duration::from_secs(1);
const REFERENCE_P: f64 = 0.36;
const REFERENCE_TOL: f64 = 0.005;
const LINEAR_MIN_P: f64 = 0.999;
const HOCKEY_MAX_P: f64 = 0.01;
const OLS_ORACLE_TOL: f64 = 1e-9;
const RATE_TOL: f64 = 0.01;
const SIM_RUNTIME: Duration = Duration::from_secs(60);
const KS_ALPHA: f64 = 0.01;
const BIAS_TOL: f64 = 0.01;
const SLOPE_RATIO: f64 = 3.0;
const INVARIANT_CASES: u32 = 200;

// Seeds.
const SEED_RATE: u64 = 42;
const SEED_NULL: u64 = 7;
const SEED_HACKED: u64 = 1;
const SEED_HONEST: u64 = 1001;
/// Studies from each arm of the end-to-end mixture.
const MIXTURE_HALF: usize = 20;

/// (id, space1, space2, space3) for the bundled counts file.
const EXPECTED_SPACES: [(&str, u64, u64, u64); 14] = [
    ("12 Barnett", 28, 8_192, 229_376),
    ("13 Zanobetti", 24, 128, 3_072),
    ("14 Zanobetti", 95, 32, 3_040),
    ("15 Peters", 156, 4_096, 638_976),
    ("20 Lanki", 40, 32, 1_280),
    ("21 Cendon", 10, 64, 640),
    ("40 Koken", 300, 32, 9_600),
    ("41 Linn", 80, 256, 20_480),
    ("42 Mann", 588, 512, 301_056),
    ("43 Peters", 14, 32, 448),
    ("44 Pope", 14, 512, 7_168),
    ("45 Sullivan", 48, 1_024, 49_152),
    ("46 Ye", 200, 32, 6_400),
    ("47 Zanobetti", 40, 128, 5_120),
];

const EXPECTED_SUMMARY: [(&str, [f64; 5]); 3] = [
    ("space1", [10.0, 21.5, 44.0, 167.0, 588.0]),
    ("space2", [32.0, 32.0, 128.0, 640.0, 8192.0]),
    ("space3", [448.0, 2600.0, 6784.0, 94208.0, 638976.0]),
];

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn counts_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/nawrot_counts.csv")
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn space_outputs(dir: &Path) -> Result<Duration, String> {
    let start = Instant::now();
    cmd_space(&SpaceArgs {
        input: counts_file(),
        output: dir.to_path_buf(),
        format: Format::Json,
    })
    .map_err(|e| e.to_string())?;
    Ok(start.elapsed())
}

fn criterion_1(work: &Path) -> Outcome {
    let dir = work.join("c1");
    let elapsed = space_outputs(&dir)?;
    let text = fs::read_to_string(dir.join("spaces.csv")).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut matched = 0;
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    check(rows.len() == EXPECTED_SPACES.len(), format!("{} rows", rows.len()))?;
    for (row, (id, s1, s2, s3)) in rows.iter().zip(EXPECTED_SPACES) {
        check(&row[0] == id, format!("row order: {} vs {id}", &row[0]))?;
        for (col, want) in [(5, s1), (6, s2), (7, s3)] {
            let got: u64 = row[col].parse().map_err(|_| format!("{id}: `{}`", &row[col]))?;
            check(got == want, format!("{id} column {col}: {got} != {want}"))?;
            matched += 1;
        }
    }
    check(elapsed < SPACE_RUNTIME, format!("took {elapsed:?}"))?;
    Ok(format!("{matched}/42 space values exact, {:.3} s", elapsed.as_secs_f64()))
}

fn criterion_2(work: &Path) -> Outcome {
    let dir = work.join("c2");
    space_outputs(&dir)?;
    let doc = read_json(&dir.join("space_summary.json"))?;
    let mut shown = Vec::new();
    for (name, want) in EXPECTED_SUMMARY {
        let col = &doc["space_summary"][name];
        let got: Vec<f64> = ["minimum", "lower_quartile", "median", "upper_quartile", "maximum"]
            .iter()
            .map(|k| col[*k].as_f64().unwrap_or(f64::NAN))
            .collect();
        check(got == want, format!("{name}: {got:?} != {want:?}"))?;
        shown.push(format!("{name} {got:?}"));
    }
    Ok(shown.join("; "))
}

fn criterion_3() -> Outcome {
    let p = p_from_ratio_ci(&EffectRecord::interval("m", "", 1.003, 0.99659, 1.00946)).map_err(|e| e.to_string())?;
    check((p - REFERENCE_P).abs() <= REFERENCE_TOL, format!("p = {p}"))?;
    Ok(format!("p = {p:.6} (target {REFERENCE_P} ± {REFERENCE_TOL})"))
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Solves XᵀX β = Xᵀy exactly by Gauss-Jordan elimination over the rationals.
fn exact_normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<BigRational> {
    let k = rows[0].len();
    let x: Vec<Vec<BigRational>> = rows.iter().map(|r| r.iter().map(|&v| rational(v)).collect()).collect();
    let y: Vec<BigRational> = y.iter().map(|&v| rational(v)).collect();
    let mut a = vec![vec![BigRational::zero(); k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = x.iter().fold(BigRational::zero(), |acc, r| acc + &r[i] * &r[j]);
        }
        a[i][k] = x.iter().zip(&y).fold(BigRational::zero(), |acc, (r, yv)| acc + &r[i] * yv);
    }
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero()).expect("full rank");
        a.swap(col, pivot);
        let inv = BigRational::one() / &a[col][col];
        for x in a[col].iter_mut().skip(col) {
            *x = &*x * &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let factor = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &factor * p;
                }
            }
        }
    }
    a.into_iter().map(|row| row[k].clone()).collect()
}

fn criterion_4() -> Outcome {
    let linear: Vec<f64> = (1..=14).map(|i| i as f64 / 15.0).collect();
    let lin = bilinearity_test(&PValuePlot::from_pvalues(&linear)).map_err(|e| e.to_string())?;
    check(lin.p_value >= LINEAR_MIN_P, format!("linear p = {}", lin.p_value))?;

    let mut hockey: Vec<f64> = (1..=7).map(|i| i as f64 / 1000.0).collect();
    hockey.extend((2..=8).map(|i| i as f64 / 10.0));
    let plot = PValuePlot::from_pvalues(&hockey);
    let test = bilinearity_test(&plot).map_err(|e| e.to_string())?;
    check(test.p_value < HOCKEY_MAX_P, format!("hockey-stick p = {}", test.p_value))?;

    let rows: Vec<Vec<f64>> = (1..=hockey.len()).map(|i| vec![1.0, i as f64, (i * i) as f64]).collect();
    let exact = exact_normal_equations(&rows, &hockey);
    let direct = ols_fit(&Design::from_rows(&rows).map_err(|e| e.to_string())?, &hockey).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (got, want) in direct.coefficients.iter().zip(&exact) {
        worst = worst.max((got - want.to_f64().unwrap()).abs());
    }
    let centred = quadratic_fit(&plot).map_err(|e| e.to_string())?;
    worst = worst.max((centred.coefficients[2] - exact[2].to_f64().unwrap()).abs());
    check(worst <= OLS_ORACLE_TOL, format!("OLS oracle gap {worst:e}"))?;
    check(
        (test.statistic - direct.t_statistics[2]).abs() <= 1e-6 * direct.t_statistics[2].abs(),
        "quadratic t differs between centred and raw ranks",
    )?;
    Ok(format!(
        "linear p = {:.6}, hockey-stick p = {:.3e}, OLS oracle gap {worst:.1e}",
        lin.p_value, test.p_value
    ))
}

fn sim_args(dir: PathBuf) -> SimulateArgs {
    SimulateArgs {
        output: dir,
        format: Format::Json,
        ..SimulateArgs::default()
    }
}

fn rate_args(dir: PathBuf) -> SimulateArgs {
    SimulateArgs {
        k: Some(10),
        correlation: Some(0.0),
        effect: Some(0.0),
        selection: Some("report-min-p".into()),
        replicates: Some(100_000),
        seed: Some(SEED_RATE),
        ..sim_args(dir)
    }
}

fn null_args(dir: PathBuf) -> SimulateArgs {
    SimulateArgs {
        k: Some(1),
        effect: Some(0.0),
        replicates: Some(100_000),
        seed: Some(SEED_NULL),
        ..sim_args(dir)
    }
}

fn mixture_arms(dir: &Path) -> [SimulateArgs; 2] {
    [
        SimulateArgs {
            k: Some(10),
            censor: Some(true),
            replicates: Some(2000),
            n_studies: Some(MIXTURE_HALF),
            seed: Some(SEED_HACKED),
            id_prefix: Some("selected".into()),
            ..sim_args(dir.join("selected"))
        },
        SimulateArgs {
            k: Some(1),
            replicates: Some(2000),
            n_studies: Some(MIXTURE_HALF),
            seed: Some(SEED_HONEST),
            id_prefix: Some("honest".into()),
            ..sim_args(dir.join("honest"))
        },
    ]
}

fn criterion_5(work: &Path) -> Outcome {
    let dir = work.join("c5");
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    pool.install(|| cmd_simulate(&rate_args(dir.clone()))).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let rate = read_json(&dir.join("summary.json"))?["publication_rate"].as_f64().ok_or("no rate")?;
    let expected = 1.0 - 0.95f64.powi(10);
    check((rate - expected).abs() <= RATE_TOL, format!("rate {rate} vs {expected}"))?;
    check(elapsed < SIM_RUNTIME, format!("took {elapsed:?}"))?;
    Ok(format!(
        "publication_rate = {rate:.5} (target {expected:.4} ± {RATE_TOL}), {:.1} s on one thread",
        elapsed.as_secs_f64()
    ))
}

fn criterion_6(work: &Path) -> Outcome {
    let dir = work.join("c6");
    cmd_simulate(&null_args(dir.clone())).map_err(|e| e.to_string())?;
    let text = fs::read_to_string(dir.join("simulation.csv")).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let ps: Vec<f64> = reader
        .records()
        .map(|r| r.map_err(|e| e.to_string()).and_then(|r| r[3].parse::<f64>().map_err(|e| e.to_string())))
        .collect::<Result<_, _>>()?;
    check(ps.len() == 100_000, format!("{} reported p-values", ps.len()))?;
    let ks = ks_uniform_test(&ps).map_err(|e| e.to_string())?;
    check(ks.p_value >= KS_ALPHA, format!("KS p = {}", ks.p_value))?;
    let bias = read_json(&dir.join("summary.json"))?["bias"].as_f64().ok_or("no bias")?;
    check(bias.abs() <= BIAS_TOL, format!("bias {bias}"))?;
    Ok(format!("KS D = {:.5}, p = {:.4}; selection bias = {bias:+.5}", ks.statistic, ks.p_value))
}

fn run_mixture(dir: &Path) -> Result<Value, String> {
    let mut combined = String::new();
    for args in mixture_arms(dir) {
        cmd_simulate(&args).map_err(|e| e.to_string())?;
        let text = fs::read_to_string(args.output.join("effects.csv")).map_err(|e| e.to_string())?;
        let body = if combined.is_empty() { &text[..] } else { text.split_once('\n').map_or("", |(_, rest)| rest) };
        combined.push_str(body);
    }
    let mixed = dir.join("mixture.csv");
    fs::write(&mixed, combined).map_err(|e| e.to_string())?;
    cmd_audit(&AuditArgs {
        input: mixed,
        counts: None,
        alpha: 0.05,
        output: dir.join("audit"),
        format: Format::Json,
    })
    .map_err(|e| e.to_string())?;
    read_json(&dir.join("audit/report.json"))
}

fn criterion_7(work: &Path) -> Outcome {
    let doc = run_mixture(&work.join("c7"))?;
    let n = doc["plot"]["n"].as_u64().unwrap_or(0);
    check(n == 2 * MIXTURE_HALF as u64, format!("mixture has {n} studies"))?;
    let p = doc["tests"]["bilinearity"]["p_value"].as_f64().ok_or("no bilinearity p")?;
    let hs = &doc["tests"]["hockey_stick"];
    let (left, right) = (
        hs["left_slope"].as_f64().ok_or("no left slope")?,
        hs["right_slope"].as_f64().ok_or("no right slope")?,
    );
    check(p < HOCKEY_MAX_P, format!("bilinearity p = {p}"))?;
    check(right > SLOPE_RATIO * left, format!("slopes {left} / {right}"))?;
    Ok(format!(
        "n = {n}, bilinearity p = {p:.3e}, breakpoint {}, slopes {left:.5} -> {right:.5} ({:.1}x)",
        hs["breakpoint"],
        right / left
    ))
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).into_iter().flatten().flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

fn criterion_8(work: &Path) -> Outcome {
    let rerun = work.join("c8");
    cmd_simulate(&rate_args(rerun.join("c5"))).map_err(|e| e.to_string())?;
    cmd_simulate(&null_args(rerun.join("c6"))).map_err(|e| e.to_string())?;
    run_mixture(&rerun.join("c7"))?;
    let mut compared = 0;
    for name in ["c5", "c6", "c7"] {
        let first = files_under(&work.join(name));
        let second = files_under(&rerun.join(name));
        check(!first.is_empty() && first.len() == second.len(), format!("{name}: file lists differ"))?;
        for (a, b) in first.iter().zip(&second) {
            let same = fs::read(a).ok() == fs::read(b).ok();
            check(same, format!("{} differs from {}", a.display(), b.display()))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} output files byte-identical across reruns"))
}

fn brute_force_ks(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mut best = 0.0f64;
    for &x in values {
        let at = values.iter().filter(|&&v| v <= x).count() as f64 / n;
        let before = values.iter().filter(|&&v| v < x).count() as f64 / n;
        best = best.max((at - x).abs()).max((before - x).abs());
    }
    best
}

fn interval(r: f64, lo: f64, hi: f64) -> EffectRecord {
    EffectRecord::interval("x", "", r, lo, hi)
}

fn invariant_suites() -> Result<Vec<(&'static str, u32)>, String> {
    let mut done = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut(&mut TestRunner) -> Result<(), String>| {
        let mut runner = TestRunner::new(Config {
            cases: INVARIANT_CASES,
            failure_persistence: None,
            ..Config::default()
        });
        f(&mut runner).map_err(|e| format!("{name}: {e}"))?;
        done.push((name, INVARIANT_CASES));
        Ok::<(), String>(())
    };

    run("CI reciprocal invariance", &mut |runner| {
        runner
            .run(&(-2.0f64..2.0, 0.01f64..1.0, 0.01f64..1.0), |(m, a, b)| {
                let (r, lo, hi) = (m.exp(), (m - a).exp(), (m + b).exp());
                let p = p_from_ratio_ci(&interval(r, lo, hi)).unwrap();
                let q = p_from_ratio_ci(&interval(1.0 / r, 1.0 / hi, 1.0 / lo)).unwrap();
                prop_assert!((p - q).abs() <= 1e-9 * p.max(1e-300), "{p} vs {q}");
                Ok(())
            })
            .map_err(|e| e.to_string())
    })?;
    run("CI widening monotonicity", &mut |runner| {
        runner
            .run(&(-2.0f64..2.0, 0.01f64..1.0, 1.0f64..5.0), |(m, h, w)| {
                let narrow = p_from_ratio_ci(&interval(m.exp(), (m - h).exp(), (m + h).exp())).unwrap();
                let wide = p_from_ratio_ci(&interval(m.exp(), (m - w * h).exp(), (m + w * h).exp())).unwrap();
                prop_assert!(wide >= narrow, "{narrow} > {wide}");
                Ok(())
            })
            .map_err(|e| e.to_string())
    })?;
    run("KS brute-force equivalence (n <= 20)", &mut |runner| {
        runner
            .run(&prop::collection::vec(0.0f64..=1.0, 1..=20), |mut v| {
                v.sort_by(f64::total_cmp);
                let fast = ks_statistic(&v);
                let slow = brute_force_ks(&v);
                prop_assert!((fast - slow).abs() <= 1e-12, "{fast} vs {slow}");
                Ok(())
            })
            .map_err(|e| e.to_string())
    })?;
    run("OLS exact recovery", &mut |runner| {
        let strategy = (prop::collection::vec(-5.0f64..5.0, 3), 6usize..30);
        runner
            .run(&strategy, |(beta, n)| {
                let xs: Vec<f64> = (0..n).map(|i| i as f64 / 3.0 - 2.0).collect();
                let ys: Vec<f64> = xs.iter().map(|x| beta[0] + beta[1] * x + beta[2] * x * x).collect();
                let fit = ols_fit(&Design::polynomial(&xs, 2), &ys).map_err(|e| TestCaseError::fail(e.to_string()))?;
                for (got, want) in fit.coefficients.iter().zip(&beta) {
                    prop_assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
    })?;
    run("quantile boundaries", &mut |runner| {
        runner
            .run(&(prop::collection::vec(-1e6f64..1e6, 1..40), 0.0f64..=1.0, 0.0f64..=1.0), |(v, a, b)| {
                let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(quantile_type6(&v, 0.0).unwrap(), min);
                prop_assert_eq!(quantile_type6(&v, 1.0).unwrap(), max);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let (qa, qb) = (quantile_type6(&v, lo).unwrap(), quantile_type6(&v, hi).unwrap());
                prop_assert!(min <= qa && qa <= qb && qb <= max);
                Ok(())
            })
            .map_err(|e| e.to_string())
    })?;
    Ok(done)
}

fn criterion_9() -> Outcome {
    let suites = invariant_suites()?;
    Ok(suites
        .iter()
        .map(|(name, cases)| format!("{name} ({cases})"))
        .collect::<Vec<_>>()
        .join(", "))
}

fn main() -> ExitCode {
    let work = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create work dir: {e}");
            return ExitCode::FAILURE;
        }
    };
    let w = work.path();
    let criteria: Vec<Criterion<'_>> = vec![
        ("per-study search spaces", Box::new(|| criterion_1(w))),
        ("search-space summary quartiles", Box::new(|| criterion_2(w))),
        ("CI to p conversion", Box::new(criterion_3)),
        ("bilinearity test and OLS oracle", Box::new(criterion_4)),
        ("min-p publication rate law", Box::new(|| criterion_5(w))),
        ("null calibration", Box::new(|| criterion_6(w))),
        ("end-to-end hockey-stick shape", Box::new(|| criterion_7(w))),
        ("determinism", Box::new(|| criterion_8(w))),
        ("invariant suites", Box::new(criterion_9)),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
