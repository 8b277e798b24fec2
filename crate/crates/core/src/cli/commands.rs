use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use super::config::{RunConfig, SizesSpec};
use super::{EXIT_CONFIG, EXIT_NEGATIVE, EXIT_NESTING, EXIT_OK};
use crate::error::Result;
use crate::feasibility::check_membership;
use crate::oracle::{common_info_channel, validate_single_letter_conditions, write_failure_artifacts, ValidationConfig};
use crate::regions::{compare_regions, trace_regions};
use crate::spectral::{dpi_check, DpiVerdict};

pub const CARDINALITY_CAVEAT: &str = "Auxiliary alphabet sizes are fixed by the run configuration. \
No cardinality bound is known for the outer sets, so outer regions computed here are heuristic \
under-approximations of the true outer bounds at these sizes.";

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn report_error(err: &mut dyn Write, e: &crate::Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    EXIT_CONFIG
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Traces every configured set and writes `region_<set>.csv`,
/// `region_<set>.json`, `meta.json` and `nesting.json` to the output directory.
pub fn cmd_region(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run_region(cfg, out) {
        Ok(code) => code,
        Err(e) => report_error(err, &e),
    }
}

fn run_region(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let problem = cfg.region_problem()?;
    let trace = cfg.trace_config()?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("mtrd-out"));
    let mut resolved = cfg.clone();
    resolved.sizes = Some(SizesSpec {
        x1: problem.sizes.x1,
        x2: problem.sizes.x2,
    });
    resolved.out = Some(dir.clone());

    let started = unix_seconds();
    let clock = Instant::now();
    let boundaries = trace_regions(&problem, &cfg.sets, &trace)?;
    let report = compare_regions(&boundaries, cfg.epsilon)?;
    let elapsed = clock.elapsed().as_secs_f64();

    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for b in &boundaries {
        let set = b.metadata.set.as_str();
        let csv = dir.join(format!("region_{set}.csv"));
        b.write_csv(std::io::BufWriter::new(fs::File::create(&csv)?))?;
        let full = dir.join(format!("region_{set}.json"));
        write_json(&full, b)?;
        files.extend([csv, full]);
    }
    let header = json!({
        "tool": "mtrd",
        "version": crate::VERSION,
        "config": resolved,
        "seed": cfg.seed,
        "wall_clock": {"started_unix": started, "elapsed_seconds": elapsed},
        "caveat": CARDINALITY_CAVEAT,
    });
    let mut meta = header.clone();
    meta["source_fingerprint"] = json!(boundaries[0].metadata.source_fingerprint);
    meta["d"] = json!(problem.d);
    meta["sizes"] = json!(problem.sizes);
    meta["budget"] = json!(trace.budget);
    meta["weights"] = json!(trace.weights);
    meta["regions"] = json!(boundaries.iter().map(|b| &b.metadata).collect::<Vec<_>>());
    meta["files"] = json!(files);
    write_json(&dir.join("meta.json"), &meta)?;
    let mut nesting = header;
    nesting["report"] = json!(report);
    write_json(&dir.join("nesting.json"), &nesting)?;

    writeln!(out, "theta      {}", cfg.sets.iter().map(|s| format!("{:>10}", s.as_str())).collect::<String>())?;
    for w in &report.weights {
        let cells: String = cfg
            .sets
            .iter()
            .map(|s| match w.values.get(s).copied().flatten() {
                Some(v) => format!("{v:>10.6}"),
                None => format!("{:>10}", "-"),
            })
            .collect();
        writeln!(out, "{:<10.4} {cells}", w.theta)?;
    }
    for v in &report.violations {
        writeln!(
            out,
            "violation at theta={:.4}: {} = {:?} < {} = {:?} - {}",
            v.theta, v.subset, v.subset_value, v.superset, v.superset_value, cfg.epsilon
        )?;
    }
    writeln!(out, "wrote {} files to {}", files.len() + 2, dir.display())?;
    Ok(if report.ok { EXIT_OK } else { EXIT_NESTING })
}

/// Checks the spectral data-processing inequality on the configured triple.
pub fn cmd_dpi(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut run = || -> Result<i32> {
        let report = dpi_check(cfg.triple()?)?;
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        Ok(match report.verdict {
            DpiVerdict::NecessaryConditionHolds => EXIT_OK,
            DpiVerdict::Violated => EXIT_NEGATIVE,
        })
    };
    run().unwrap_or_else(|e| report_error(err, &e))
}

/// Membership of the configured channel in every configured set.
pub fn cmd_feasible(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut run = || -> Result<i32> {
        let src = cfg.source_model()?;
        let ch = cfg.channel()?;
        let reports = cfg
            .sets
            .iter()
            .map(|&set| check_membership(set, &ch, &src, cfg.tolerance))
            .collect::<Result<Vec<_>>>()?;
        writeln!(out, "{}", serde_json::to_string_pretty(&reports)?)?;
        Ok(if reports.iter().all(|r| r.is_accepted()) { EXIT_OK } else { EXIT_NEGATIVE })
    };
    run().unwrap_or_else(|e| report_error(err, &e))
}

/// Runs the multi-letter validation suite. With `self_test`, a channel with
/// common information is slipped in and must be caught.
pub fn cmd_validate(cfg: &RunConfig, self_test: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut run = || -> Result<i32> {
        let src = cfg.source_model()?;
        let spec = cfg.validate.clone().unwrap_or_default();
        if spec.trials == 0 {
            return Err(crate::Error::Config {
                field: "validate.trials".into(),
                message: "must be at least 1".into(),
            });
        }
        let sizes = spec.sizes.unwrap_or(SizesSpec {
            x1: src.u_size() + 1,
            x2: src.v_size() + 1,
        });
        let inject = if self_test {
            let f1: Vec<usize> = (0..src.u_size()).collect();
            let f2: Vec<usize> = (0..src.v_size()).collect();
            vec![common_info_channel(&f1, &f2, 2)?]
        } else {
            Vec::new()
        };
        let started = unix_seconds();
        let mut reports = Vec::new();
        for &n in &spec.n {
            let vcfg = ValidationConfig {
                n,
                x1: sizes.x1,
                x2: sizes.x2,
                trials: spec.trials,
                seed: cfg.seed,
                tolerance: cfg.tolerance,
            };
            let mut report = validate_single_letter_conditions(&src, &vcfg, &inject).map_err(|e| crate::Error::Config {
                field: "validate".into(),
                message: e.to_string(),
            })?;
            if let Some(dir) = &cfg.out {
                write_failure_artifacts(&mut report, &dir.join("validation-failures"))?;
            }
            reports.push(report);
        }
        let passed = reports.iter().all(|r| r.passed());
        let doc = json!({
            "tool": "mtrd",
            "version": crate::VERSION,
            "config": cfg,
            "seed": cfg.seed,
            "self_test": self_test,
            "wall_clock": {"started_unix": started, "elapsed_seconds": unix_seconds() - started},
            "caveat": CARDINALITY_CAVEAT,
            "passed": passed,
            "reports": reports,
        });
        if let Some(dir) = &cfg.out {
            fs::create_dir_all(dir)?;
            write_json(&dir.join("validation.json"), &doc)?;
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        Ok(if passed { EXIT_OK } else { EXIT_NEGATIVE })
    };
    run().unwrap_or_else(|e| report_error(err, &e))
}
