//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::fs;
use std::time::{Duration, Instant};

use mtrd::cli::{cmd_region, RunConfig, EXIT_OK};
use mtrd::feasibility::{in_s_out1, in_s_out3, SetId, DEFAULT_TOLERANCE};
use mtrd::oracle::{
    common_info_channel, exhaustive_decoder_check, grid_search_weighted_rate, random_joint, random_markov_triple,
    validate_single_letter_conditions, ValidationConfig,
};
use mtrd::probkit::{binary_entropy, join, letter_axis, Distortion};
use mtrd::regions::{minimize_weighted_rate, sample_channel, RegionProblem};
use mtrd::rng::{derive_seed, rng_from_seed};
use mtrd::spectral::{dpi_check, kronecker_power, tilde, tilde_grouped, DpiVerdict};
use mtrd::{ChannelSizes, ProbTensor, SourceModel};
use rand::Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: mtrd::Error) -> String {
    e.to_string()
}

fn tilde_spectrum() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..=10 {
        let p = 0.05 * k as f64;
        let s = tilde(SourceModel::dsbs(p).map_err(err)?.joint()).map_err(err)?.spectrum().map_err(err)?;
        worst = worst.max((s.lambda(1) - 1.0).abs()).max((s.lambda(2) - (1.0 - 2.0 * p).abs()).abs());
    }
    let s = tilde(SourceModel::dsbs(0.1).map_err(err)?.joint()).map_err(err)?.spectrum().map_err(err)?;
    ensure((s.lambda(2) - 0.8).abs() <= 1e-9, || format!("DSBS(0.1) lambda2 = {}", s.lambda(2)))?;
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("11 crossovers, max deviation {worst:.1e}"))
}

fn bsc_chain() -> mtrd::Result<ProbTensor> {
    let bsc = |p: f64| [[1.0 - p, p], [p, 1.0 - p]];
    let (a, b) = (bsc(0.1), bsc(0.2));
    let mut values = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                values.push(0.5 * a[x][y] * b[y][z]);
            }
        }
    }
    ProbTensor::new(["X", "Y", "Z"], vec![2, 2, 2], values)
}

fn spectral_dpi() -> Check {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for t in 0..1000u64 {
        let mut rng = rng_from_seed(derive_seed(2, &[t]));
        let sizes = [rng.random_range(2..=4), rng.random_range(2..=4), rng.random_range(2..=4)];
        let r = dpi_check(&random_markov_triple(&mut rng, sizes).map_err(err)?).map_err(err)?;
        if let Some(s) = r.min_slack {
            worst = worst.min(s);
            if s < -1e-9 {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} triples violate the inequality"))?;
    let r = dpi_check(&bsc_chain().map_err(err)?).map_err(err)?;
    let l = r.entries[0].lambda_xz;
    ensure((l - 0.48).abs() <= 1e-9 && r.verdict == DpiVerdict::NecessaryConditionHolds, || format!("BSC chain lambda2(XZ) = {l}"))?;
    Ok(format!("1000 triples, min slack {worst:.2e}; BSC chain lambda2 = {l:.12}"))
}

fn iid_kronecker() -> Check {
    let mut worst_gap: f64 = 0.0;
    for t in 0..100u64 {
        let mut rng = rng_from_seed(derive_seed(3, &[t]));
        let sizes = vec![rng.random_range(2..=3), rng.random_range(2..=3)];
        let p = random_joint(&mut rng, ["A", "B"], sizes).map_err(err)?;
        let single = tilde(&p).map_err(err)?;
        let lambda2 = single.spectrum().map_err(err)?.lambda(2);
        for k in [2, 3] {
            let ext = p.iid_extend(k).map_err(err)?;
            let rows: Vec<String> = (1..=k).map(|i| letter_axis("A", i)).collect();
            let cols: Vec<String> = (1..=k).map(|i| letter_axis("B", i)).collect();
            let block = tilde_grouped(&ext, &rows, &cols).map_err(err)?;
            let kron = kronecker_power(single.values(), k);
            ensure(block.values().shape() == kron.shape(), || format!("trial {t}: shape mismatch"))?;
            let gap = (block.values() - &kron).amax();
            worst_gap = worst_gap.max(gap);
            ensure(gap <= 1e-10, || format!("trial {t}, k = {k}: entry gap {gap:e}"))?;
            let s = block.spectrum().map_err(err)?;
            let second = s.lambda(2);
            let multiplicity = s.values().iter().filter(|v| (*v - second).abs() <= 1e-9).count();
            ensure((second - lambda2).abs() <= 1e-9 && multiplicity >= k, || {
                format!("trial {t}, k = {k}: lambda2 {second} (single {lambda2}) multiplicity {multiplicity}")
            })?;
        }
    }
    Ok(format!("100 joints, k in {{2, 3}}, max entry gap {worst_gap:.1e}"))
}

fn asymmetric_source() -> mtrd::Result<SourceModel> {
    let joint = ProbTensor::from_matrix("U", "V", &[vec![0.3, 0.05, 0.05], vec![0.02, 0.2, 0.08], vec![0.1, 0.05, 0.15]])?;
    SourceModel::with_hamming(joint)
}

fn single_letter_conditions() -> Check {
    let sources = [("DSBS(0.1)", SourceModel::dsbs(0.1).map_err(err)?), ("asymmetric 3x3", asymmetric_source().map_err(err)?)];
    let mut lines = Vec::new();
    for (name, src) in &sources {
        for n in [1, 2] {
            let cfg = ValidationConfig {
                n,
                x1: src.u_size() + 1,
                x2: src.v_size() + 1,
                trials: 500,
                seed: 4,
                tolerance: DEFAULT_TOLERANCE,
            };
            let r = validate_single_letter_conditions(src, &cfg, &[]).map_err(err)?;
            ensure(r.passed(), || format!("{name}, n = {n}: {} failures, first {:?}", r.failures.len(), r.failures.first().map(|f| (&f.test, f.seed))))?;
            lines.push(format!("{name} n={n} margin {:.4}", r.worst_margin));
        }
    }
    Ok(format!("4 x 500 samples, 0 failures ({})", lines.join(", ")))
}

fn common_information() -> Check {
    let src = SourceModel::dsbs(0.1).map_err(err)?;
    let ch = common_info_channel(&[0, 1], &[0, 1], 2).map_err(err)?;
    ensure(in_s_out1(&ch, DEFAULT_TOLERANCE).is_accepted(), || "short chains rejected".into())?;
    let r = in_s_out3(&ch, &src, DEFAULT_TOLERANCE).map_err(err)?;
    let margin = -r.margins.as_ref().map_or(f64::NAN, |m| m.worst());
    ensure(!r.is_accepted() && margin >= 0.2 - 1e-9, || format!("spectral verdict {:?}, margin {margin}", r.verdict))?;
    Ok(format!("short chains accepted, spectral rejected by {margin:.12}"))
}

fn lossless_corner() -> Check {
    let problem = RegionProblem::new(SourceModel::dsbs(0.1).map_err(err)?, [0.0, 0.0], 2, 2).map_err(err)?;
    let target = 1.0 + binary_entropy(0.1);
    let mut parts = Vec::new();
    for set in SetId::ALL {
        let v = minimize_weighted_rate(&problem, set, [1.0, 1.0], 200, 6)
            .map_err(err)?
            .value()
            .ok_or_else(|| format!("{set}: infeasible at budget"))?;
        let ok = if set == SetId::In { (v - target).abs() <= 1e-3 } else { v <= target + 1e-6 };
        ensure(ok, || format!("{set}: {v} against 1 + h(0.1) = {target}"))?;
        parts.push(format!("{set} {v:.6}"));
    }
    Ok(parts.join(", "))
}

fn region_config(dir: &std::path::Path, weights: usize, budget: usize) -> RunConfig {
    RunConfig::from_json(&format!(
        r#"{{"source": {{"dsbs": 0.1}}, "d": [0.05, 0.05], "weights": {weights}, "budget": {budget}, "seed": 17, "out": {:?}}}"#,
        dir
    ))
    .expect("valid config")
}

fn nesting_sweep() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = region_config(dir.path(), 17, 200);
    let mut out = Vec::new();
    let mut errs = Vec::new();
    let code = cmd_region(&cfg, &mut out, &mut errs);
    ensure(code == EXIT_OK, || format!("exit {code}: {}{}", String::from_utf8_lossy(&out), String::from_utf8_lossy(&errs)))?;
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("nesting.json")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let weights = doc["report"]["weights"].as_array().ok_or("no weights in report")?;
    ensure(weights.len() == 17, || format!("{} weights", weights.len()))?;
    let mut tightest = f64::INFINITY;
    for w in weights {
        let v = |s: &str| w["values"][s].as_f64().unwrap_or(f64::INFINITY);
        let (vin, vcap, v1, v3) = (v("in"), v("cap13"), v("out1"), v("out3"));
        ensure(vin >= vcap - 1e-4 && vcap >= v1.max(v3) - 1e-4, || format!("ordering broken at {w}"))?;
        tightest = tightest.min(vin - vcap).min(vcap - v1.max(v3));
    }
    Ok(format!("17 weights, 4 sets, budget 200 each, smallest gap {tightest:.2e}"))
}

fn oracle_equivalence() -> Check {
    let asym = SourceModel::with_hamming(ProbTensor::from_matrix("U", "V", &[vec![0.45, 0.1], vec![0.15, 0.3]]).map_err(err)?).map_err(err)?;
    let sources = [SourceModel::dsbs(0.1).map_err(err)?, asym];
    let weights = [[1.0, 1.0], [1.0, 0.5], [0.3, 1.0], [1.0, 0.0], [0.0, 1.0]];
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for src in &sources {
        for d in [[0.0, 0.0], [0.5, 0.5]] {
            let problem = RegionProblem::new(src.clone(), d, 2, 2).map_err(err)?;
            for w in weights {
                let grid = grid_search_weighted_rate(src, d, 2, 2, w, 0.25).map_err(err)?.value();
                let opt = minimize_weighted_rate(&problem, SetId::In, w, 300, 8).map_err(err)?.value();
                let (Some(g), Some(o)) = (grid, opt) else {
                    return Err(format!("D = {d:?}, w = {w:?}: grid {grid:?}, optimizer {opt:?}"));
                };
                worst = worst.max((g - o).abs());
                ensure((g - o).abs() <= 1e-9, || format!("D = {d:?}, w = {w:?}: grid {g}, optimizer {o}"))?;
                cases += 1;
            }
        }
    }
    let mut rng = rng_from_seed(9);
    for t in 0..20 {
        let joint = random_joint(&mut rng, ["U", "V"], vec![2, 2]).map_err(err)?;
        let n_hat = rng.random_range(2..=3);
        let rand_d = |rng: &mut rand_chacha::ChaCha8Rng| Distortion::new((0..2).map(|_| (0..n_hat).map(|_| rng.random::<f64>()).collect()).collect());
        let (d1, d2) = (rand_d(&mut rng).map_err(err)?, rand_d(&mut rng).map_err(err)?);
        let src = SourceModel::new(joint, d1, d2).map_err(err)?;
        let ch = sample_channel(SetId::Out3, ChannelSizes::new(2, 2, 2, 2), &src, &mut rng).map_err(err)?;
        let c = exhaustive_decoder_check(&join(src.joint(), &ch).map_err(err)?, &src).map_err(err)?;
        ensure(c.matches, || format!("decoder joint {t}: optimal {:?} vs enumeration ({}, {})", c.optimal, c.min_ed1, c.min_ed2))?;
    }
    Ok(format!("{cases} grid instances, max gap {worst:.1e}; 20 decoder enumerations match"))
}

fn determinism() -> Check {
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    for dir in [&a, &b] {
        let code = cmd_region(&region_config(dir.path(), 5, 40), &mut Vec::new(), &mut Vec::new());
        ensure(code == EXIT_OK, || format!("exit {code}"))?;
    }
    let mut bytes = 0;
    for set in SetId::ALL {
        let name = format!("region_{set}.csv");
        let x = fs::read(a.path().join(&name)).map_err(|e| e.to_string())?;
        let y = fs::read(b.path().join(&name)).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{name} differs between runs"))?;
        bytes += x.len();
    }
    Ok(format!("4 CSVs byte-identical ({bytes} bytes)"))
}

fn main() {
    let criteria: [(&str, fn() -> Check, Duration); 9] = [
        ("tilde spectrum", tilde_spectrum, Duration::from_secs(1)),
        ("spectral DPI", spectral_dpi, Duration::from_secs(10)),
        ("i.i.d. Kronecker spectrum", iid_kronecker, Duration::from_secs(30)),
        ("single-letter conditions", single_letter_conditions, Duration::from_secs(120)),
        ("common-information example", common_information, Duration::from_secs(1)),
        ("lossless corner", lossless_corner, Duration::from_secs(60)),
        ("nesting sweep", nesting_sweep, Duration::from_secs(600)),
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(60)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(detail) => println!("[PASS] {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
