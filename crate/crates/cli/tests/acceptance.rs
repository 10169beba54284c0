//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::LN_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use uncq::bernoulli::{construct_matched_degenerates, BernoulliReport, Posterior1D, Shape};
use uncq::estimator::{convergence_report, Component};
use uncq::eval::{auroc, selective_prediction_auc, ScoredSet, SelectiveSet};
use uncq::io::{generate_synthetic, read_uep_from, write_uep_to, SyntheticConfig};
use uncq::measures::*;
use uncq::rng::SeededRng;
use uncq::Nats;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

fn uncq() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_uncq"));
    c.env_remove("UNCQ_SEED");
    c
}

fn run_ok(cmd: &mut Command) -> Result<Vec<u8>, String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{:?} exited with {}: {}",
            cmd,
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

// Independent reference computations, written as plain loops.

fn oracle_bma(rows: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; rows[0].len()];
    for (row, wi) in rows.iter().zip(w) {
        for (bk, p) in b.iter_mut().zip(row) {
            *bk += wi * p;
        }
    }
    b
}

fn oracle_cross_entropy(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| -a * b.ln())
        .sum()
}

fn oracle_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum()
}

/// Strictly positive ensemble with `S ∈ 1..=64`, `K ∈ 2..=100`. Half use
/// uniform weights; logits have random spread so both flat and peaked rows
/// occur.
fn random_ensemble(rng: &mut SeededRng, index: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let s = 1 + rng.below(64);
    let k = 2 + rng.below(99);
    let spread = 0.1 + 4.0 * rng.uniform();
    let rows = (0..s)
        .map(|_| {
            let z: Vec<f64> = (0..k).map(|_| (spread * rng.normal()).exp()).collect();
            let t: f64 = z.iter().sum();
            z.iter().map(|x| x / t).collect()
        })
        .collect();
    let w = if index.is_multiple_of(2) {
        vec![1.0 / s as f64; s]
    } else {
        let raw: Vec<f64> = (0..s).map(|_| 0.05 + rng.uniform()).collect();
        let t: f64 = raw.iter().sum();
        raw.iter().map(|x| x / t).collect()
    };
    (rows, w)
}

fn corpus(n: usize) -> Vec<(Vec<Vec<f64>>, Vec<f64>, PosteriorEnsemble)> {
    let mut rng = SeededRng::new(20_240_601);
    (0..n)
        .map(|i| {
            let (rows, w) = random_ensemble(&mut rng, i);
            let ens = PosteriorEnsemble::from_rows(rows.clone(), Some(w.clone())).unwrap();
            let w = ens.weights().to_vec();
            (rows, w, ens)
        })
        .collect()
}

const CORPUS_SIZE: usize = 10_000;

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let corpus = corpus(CORPUS_SIZE);
    let mut worst: f64 = 0.0;
    for (_, _, ens) in &corpus {
        let m = EnsembleMeasures::compute(ens);
        let (k, i, r) = (
            m.expected_pairwise_kl,
            m.mutual_information,
            m.reverse_mutual_information,
        );
        ensure!(k.is_finite() && i.is_finite() && r.is_finite(), "non-finite measure");
        let scale = k.value().max(1.0);
        let resid = (k.value() - (i.value() + r.value())).abs() / scale;
        worst = worst.max(resid);
        ensure!(resid <= 1e-9, "|EPKL - (MI + RMI)| = {:e}", resid * scale);
        ensure!(k >= i && i >= Nats::ZERO && r >= Nats::ZERO, "ordering: K {k}, I {i}, M {r}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "{CORPUS_SIZE} ensembles, worst scaled residual {worst:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for (rows, w, ens) in corpus(CORPUS_SIZE) {
        let b = oracle_bma(&rows, &w);
        let ce: f64 = rows.iter().zip(&w).map(|(p, wi)| wi * oracle_cross_entropy(p, &b)).sum();
        let kl: f64 = rows.iter().zip(&w).map(|(p, wi)| wi * oracle_kl(p, &b)).sum();
        let h_bma = entropy(&bma(&ens)).value();
        let e_h = expected_entropy(&ens).value();
        let d1 = (ce - h_bma).abs();
        let d2 = (kl - (h_bma - e_h)).abs();
        worst = worst.max(d1).max(d2);
        ensure!(d1 <= 1e-9, "E[CE(p, BMA)] - H(BMA) = {d1:e}");
        ensure!(d2 <= 1e-9, "E[KL(p || BMA)] - (H(BMA) - E[H]) = {d2:e}");
    }
    Ok(format!("{CORPUS_SIZE} ensembles, worst deviation {worst:.1e}"))
}

fn with_zeros(rng: &mut SeededRng) -> PosteriorEnsemble {
    let s = 2 + rng.below(6);
    let k = 2 + rng.below(5);
    let rows: Vec<Vec<f64>> = (0..s)
        .map(|_| {
            let mut z: Vec<f64> = (0..k).map(|_| rng.uniform()).collect();
            for _ in 0..rng.below(k) {
                let j = rng.below(k);
                z[j] = 0.0;
            }
            if z.iter().all(|&x| x == 0.0) {
                z[rng.below(k)] = 1.0;
            }
            let t: f64 = z.iter().sum();
            z.iter().map(|x| x / t).collect()
        })
        .collect();
    PosteriorEnsemble::from_rows(rows, None).unwrap()
}

fn criterion_3() -> Outcome {
    let mut finite = 0;
    let mut infinite = 0;
    let mut worst: f64 = 0.0;
    let mut check = |ens: &PosteriorEnsemble| -> Result<(), String> {
        let avg: Nats = (0..ens.len())
            .map(|i| model_conditional_uncertainty(i, ens).unwrap().total().scale(ens.weights()[i]))
            .sum();
        let epkl_total = decompose(ens, View::EpklBased).total();
        if avg.is_infinite() || epkl_total.is_infinite() {
            ensure!(avg.is_infinite() && epkl_total.is_infinite(), "one-sided infinity: {avg} vs {epkl_total}");
            infinite += 1;
        } else {
            let d = (avg.value() - epkl_total.value()).abs();
            worst = worst.max(d);
            ensure!(d <= 1e-9, "weighted per-model totals differ by {d:e}");
            finite += 1;
        }
        Ok(())
    };
    for (_, _, ens) in corpus(2_000) {
        check(&ens)?;
    }
    let mut rng = SeededRng::new(33);
    for _ in 0..2_000 {
        check(&with_zeros(&mut rng))?;
    }
    ensure!(infinite > 0, "no infinite cases exercised");
    Ok(format!("{finite} finite (worst {worst:.1e}), {infinite} jointly infinite"))
}

fn parse_csv(bytes: &[u8]) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            header
                .iter()
                .zip(rec.unwrap().iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let out = run_ok(uncq().args(["bernoulli", "fig2", "--format", "csv"]))?;
    let elapsed = start.elapsed();
    let rows = parse_csv(&out);
    ensure!(rows.len() == 6, "{} rows", rows.len());
    let num = |row: &std::collections::HashMap<String, String>, c: &str| -> f64 {
        row[c].parse().unwrap()
    };
    let delta = &rows[5];
    ensure!(delta["family"] == "delta-mixture", "last row is {}", delta["family"]);
    ensure!(num(delta, "aleatoric") == 0.0, "delta aleatoric {}", delta["aleatoric"]);
    ensure!((num(delta, "mi_epistemic") - LN_2).abs() <= 1e-10, "delta MI {}", delta["mi_epistemic"]);
    for c in ["epkl_total", "epkl_epistemic", "rmi"] {
        ensure!(delta[c] == "inf", "delta {c} = {}", delta[c]);
    }
    // Analytic values for the uniform posterior.
    let u = &rows[0];
    ensure!(u["posterior"] == "U[0,1]", "first row is {}", u["posterior"]);
    for (c, want) in [("aleatoric", 0.5), ("epkl_epistemic", 0.5), ("mi_epistemic", LN_2 - 0.5)] {
        let got = num(u, c);
        ensure!((got - want).abs() <= 1e-8, "U[0,1] {c} = {got}, expected {want}");
    }
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("6 rows, delta row inf/inf/inf, {:.3}s", elapsed.as_secs_f64()))
}

fn criterion_5() -> Outcome {
    let mut smallest = f64::INFINITY;
    for target in [0.3, 0.5, 0.65] {
        let m = construct_matched_degenerates(target).map_err(|e| e.to_string())?;
        let reports: Vec<BernoulliReport> = m
            .posteriors()
            .iter()
            .map(|p| BernoulliReport::compute(p).unwrap())
            .collect();
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (&reports[i], &reports[j]);
                for (x, y) in [
                    (a.mi.total(), b.mi.total()),
                    (a.mi.aleatoric(), b.mi.aleatoric()),
                    (a.mi.epistemic(), b.mi.epistemic()),
                ] {
                    ensure!((x.value() - y.value()).abs() <= 1e-8, "target {target}: MI {x} vs {y}");
                }
                let gap = (a.epkl.epistemic().value() - b.epkl.epistemic().value()).abs();
                smallest = smallest.min(gap);
                ensure!(gap > 1e-3, "target {target}: EPKL gap {gap:e}");
            }
        }
    }
    Ok(format!("targets 0.3/0.5/0.65, smallest EPKL gap {smallest:.3e}"))
}

fn pairwise_auroc(recs: &[(String, f64, bool)]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for p in recs.iter().filter(|r| r.2) {
        for n in recs.iter().filter(|r| !r.2) {
            pairs += 1.0;
            wins += if p.1 > n.1 {
                1.0
            } else if p.1 == n.1 {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / pairs
}

fn curve_oracle(recs: &[(String, f64, bool)]) -> f64 {
    let mut sorted: Vec<_> = recs.to_vec();
    // Insertion sort keyed on (uncertainty, id).
    for i in 1..sorted.len() {
        let mut j = i;
        while j > 0
            && (sorted[j].1 < sorted[j - 1].1
                || (sorted[j].1 == sorted[j - 1].1 && sorted[j].0 < sorted[j - 1].0))
        {
            sorted.swap(j, j - 1);
            j -= 1;
        }
    }
    let n = sorted.len() as f64;
    let acc = |m: usize| sorted[..m].iter().filter(|r| r.2).count() as f64 / m as f64;
    let mut area = 0.0;
    let mut prev = (0.0, acc(1));
    for m in 1..=sorted.len() {
        let cur = (m as f64 / n, acc(m));
        area += (cur.0 - prev.0) * (cur.1 + prev.1) / 2.0;
        prev = cur;
    }
    area
}

fn criterion_6() -> Outcome {
    let mut rng = SeededRng::new(6);
    let (mut with_ties, mut with_inf) = (0, 0);
    for set in 0..1000 {
        let n = 2 + rng.below(199);
        let coarse = set % 2 == 0;
        let mut recs: Vec<(String, f64, bool)> = (0..n)
            .map(|i| {
                let score = match rng.below(20) {
                    0 => f64::INFINITY,
                    _ if coarse => rng.below(8) as f64 / 8.0,
                    _ => rng.normal(),
                };
                (format!("{i:04}"), score, rng.below(2) == 1)
            })
            .collect();
        recs[0].2 = true;
        recs[1].2 = false;
        let mut scores: Vec<f64> = recs.iter().map(|r| r.1).collect();
        scores.sort_by(f64::total_cmp);
        with_ties += scores.windows(2).any(|w| w[0] == w[1]) as usize;
        with_inf += scores.last().unwrap().is_infinite() as usize;
        let got = auroc(&ScoredSet::new(recs.clone()).unwrap());
        let want = pairwise_auroc(&recs);
        ensure!((got - want).abs() <= 1e-12, "set {set}: AUROC {got} vs {want}");
        let got = selective_prediction_auc(&SelectiveSet::new(recs.clone()).unwrap());
        let want = curve_oracle(&recs);
        ensure!((got - want).abs() <= 1e-12, "set {set}: selective {got} vs {want}");
    }
    Ok(format!("1000 sets ({with_ties} with ties, {with_inf} with inf)"))
}

fn criterion_7() -> Outcome {
    let mut rng = SeededRng::new(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let parity = rng.below(2);
        let (rows, w) = random_ensemble(&mut rng, parity);
        let ens = PosteriorEnsemble::from_rows(rows, Some(w)).unwrap();
        let fast = expected_pairwise_kl(&ens);
        let brute = expected_pairwise_kl_pairwise(&ens);
        ensure!(fast.is_finite() && brute.is_finite(), "non-finite on positive input");
        let d = (fast.value() - brute.value()).abs();
        worst = worst.max(d);
        ensure!(d <= 1e-10, "fast {fast} vs brute {brute}");
    }
    // Inputs on which EPKL diverges: both paths must say so.
    let mut infinite = 0;
    for _ in 0..500 {
        let ens = with_zeros(&mut rng);
        let (fast, brute) = (expected_pairwise_kl(&ens), expected_pairwise_kl_pairwise(&ens));
        ensure!(fast.is_infinite() == brute.is_infinite(), "disagree on divergence: {fast} vs {brute}");
        infinite += fast.is_infinite() as usize;
    }
    let pair = PosteriorEnsemble::from_rows([vec![1.0, 0.0], vec![0.0, 1.0]], None).unwrap();
    ensure!(
        expected_pairwise_kl(&pair).is_infinite() && expected_pairwise_kl_pairwise(&pair).is_infinite(),
        "delta pair not infinite"
    );
    let same = PosteriorEnsemble::from_rows(vec![vec![0.2, 0.8]; 5], None).unwrap();
    ensure!(
        expected_pairwise_kl(&same) == Nats::ZERO && expected_pairwise_kl_pairwise(&same) == Nats::ZERO,
        "identical members not zero"
    );
    Ok(format!("1000 finite (worst {worst:.1e}), {infinite} jointly infinite"))
}

fn criterion_8() -> Outcome {
    let mut rng = SeededRng::new(8);
    let mut count = 0;
    for trial in 0..500 {
        let n = 1 + rng.below(6);
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(n);
        while atoms.len() < n {
            let theta = match rng.below(6) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.uniform(),
            };
            if atoms.iter().all(|a| a.0 != theta) {
                atoms.push((theta, 0.05 + rng.uniform()));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let post = Posterior1D::delta_mixture(atoms.iter().map(|&(t, w)| (t, w / total)))
            .map_err(|e| format!("trial {trial}: {e}"))?;
        let Shape::DeltaMixture(stored) = post.shape() else { unreachable!() };
        let ens = PosteriorEnsemble::with_weights(
            stored.iter().map(|a| ProbabilityVector::bernoulli(a.theta).unwrap()).collect(),
            stored.iter().map(|a| a.weight).collect(),
        )
        .unwrap();
        let m = EnsembleMeasures::compute(&ens);
        let lab = BernoulliReport::compute(&post).map_err(|e| e.to_string())?;
        let (mi, epkl) = (m.triple(View::MiBased), m.triple(View::EpklBased));
        for (name, a, b) in [
            ("mi total", lab.mi.total(), mi.total()),
            ("mi aleatoric", lab.mi.aleatoric(), mi.aleatoric()),
            ("mi epistemic", lab.mi.epistemic(), mi.epistemic()),
            ("epkl total", lab.epkl.total(), epkl.total()),
            ("epkl aleatoric", lab.epkl.aleatoric(), epkl.aleatoric()),
            ("epkl epistemic", lab.epkl.epistemic(), epkl.epistemic()),
            ("rmi", lab.rmi, m.reverse_mutual_information),
        ] {
            let ok = if a.is_infinite() || b.is_infinite() {
                a.is_infinite() && b.is_infinite()
            } else {
                (a.value() - b.value()).abs() <= 1e-9
            };
            ensure!(ok, "{post}: {name} {a} vs {b}");
        }
        count += 1;
    }
    Ok(format!("{count} mixtures, 7 quantities each"))
}

fn detect(dir: &Path, a: &str, b: &str, seed: &str) -> Result<Vec<u8>, String> {
    run_ok(uncq().args([
        "detect",
        "--in",
        dir.join(a).to_str().unwrap(),
        "--anom",
        dir.join(b).to_str().unwrap(),
        "--seed",
        seed,
        "--format",
        "csv",
    ]))
}

fn gen(dir: &Path, name: &str, seed: &str, n: &str, extra: &[&str]) -> Result<(), String> {
    let out = dir.join(name);
    let mut cmd = uncq();
    cmd.args(["gen", "--seed", seed, "-n", n, "-s", "8", "-k", "3", "--out", out.to_str().unwrap()]);
    cmd.args(extra);
    run_ok(&mut cmd).map(|_| ())
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    gen(d, "in.uep", "101", "3000", &[])?;
    gen(d, "same.uep", "202", "1000", &["--shift", "0"])?;
    let report = detect(d, "in.uep", "same.uep", "5")?;
    let rows = parse_csv(&report);
    ensure!(rows.len() == 5, "{} components", rows.len());
    let mut means = Vec::new();
    for r in &rows {
        let m: f64 = r["mean"].parse().unwrap();
        ensure!((0.45..=0.55).contains(&m), "{}: mean AUROC {m}", r["component"]);
        means.push(m);
    }
    ensure!(detect(d, "in.uep", "same.uep", "5")? == report, "report not reproducible");

    gen(d, "agree.uep", "303", "600", &["--disagreement", "0"])?;
    gen(d, "disagree.uep", "404", "300", &["--disagreement", "3", "--model-seed", "9"])?;
    let rows = parse_csv(&detect(d, "agree.uep", "disagree.uep", "6")?);
    for r in rows.iter().filter(|r| r["component"].ends_with("epistemic")) {
        for i in 0..3 {
            let v = &r[&format!("split_{i}")];
            ensure!(v.parse::<f64>().unwrap() == 1.0, "{} split {i}: {v}", r["component"]);
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!(
        "shift 0 means {:.3}..{:.3}, epistemic AUROC 1.0, reproducible, {:.2}s",
        means.iter().copied().fold(f64::INFINITY, f64::min),
        means.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        elapsed.as_secs_f64()
    ))
}

fn criterion_10() -> Outcome {
    let mut cfg = SyntheticConfig::new(10, 1, 512, 5);
    cfg.disagreement = 1.0;
    cfg.shift = 1.0;
    let ens = generate_synthetic(&cfg).map_err(|e| e.to_string())?.0.ensemble(0);
    let report = convergence_report(&ens, &[8, 32, 128], 200, 10).map_err(|e| e.to_string())?;
    let mut weakest = f64::INFINITY;
    for c in Component::ALL {
        for r in report.dispersion_ratios(c) {
            weakest = weakest.min(r);
            ensure!(r >= 2.0 / 1.5, "{c}: ratio {r:.3}");
        }
    }
    Ok(format!("weakest 4x-step ratio {weakest:.3} (need >= 1.333)"))
}

fn random_batch(rng: &mut SeededRng) -> uncq::estimator::EnsembleBatch {
    let (n, s, k) = (1 + rng.below(20), 1 + rng.below(10), 2 + rng.below(10));
    let mut probs = Vec::new();
    for _ in 0..n * s {
        let row: Vec<f64> = (0..k).map(|_| rng.uniform_open_low()).collect();
        let t: f64 = row.iter().sum();
        probs.extend(row.iter().map(|x| x / t));
    }
    let weights = (rng.below(2) == 0).then(|| {
        let w: Vec<f64> = (0..s).map(|_| rng.uniform_open_low()).collect();
        let t: f64 = w.iter().sum();
        w.iter().map(|x| x / t).collect()
    });
    uncq::estimator::EnsembleBatch::new(n, s, k, probs, weights, None).unwrap()
}

fn criterion_11() -> Outcome {
    let mut rng = SeededRng::new(11);
    let mut last = Vec::new();
    for i in 0..100 {
        let batch = random_batch(&mut rng);
        let mut first = Vec::new();
        write_uep_to(&batch, &mut first).unwrap();
        let back = read_uep_from(&first[..]).map_err(|e| format!("cycle {i}: {e}"))?;
        let mut second = Vec::new();
        write_uep_to(&back, &mut second).unwrap();
        ensure!(first == second, "cycle {i}: bytes differ");
        ensure!(back == batch, "cycle {i}: batch differs");
        last = first;
    }
    let code = |bytes: &[u8]| read_uep_from(bytes).map(|_| ()).unwrap_err().code();
    let mut magic = last.clone();
    magic[..4].copy_from_slice(b"UEP0");
    let truncated = &last[..last.len() - 3];
    let mut sum = last.clone();
    let n = sum.len();
    sum[n - 1] ^= 0x40;
    let codes = [code(&magic), code(truncated), code(&sum)];
    ensure!(codes == ["bad-magic", "truncated", "sum-check"], "codes {codes:?}");
    Ok(format!("100 cycles byte-identical; codes {}", codes.join("/")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("identity suite", criterion_1),
        ("cross-entropy and KL to the BMA", criterion_2),
        ("per-model totals average to EPKL total", criterion_3),
        ("bernoulli fig2 table", criterion_4),
        ("matched degenerate posteriors", criterion_5),
        ("AUROC and selective AUC oracles", criterion_6),
        ("EPKL fast path", criterion_7),
        ("Bernoulli mixtures vs ensembles", criterion_8),
        ("end-to-end synthetic detection", criterion_9),
        ("Monte Carlo convergence", criterion_10),
        ("UEP round-trip and corruption codes", criterion_11),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
