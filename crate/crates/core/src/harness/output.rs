use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_error as io_err, Result};

use super::ExperimentResult;

#[derive(Debug, Clone)]
pub struct CsvPaths {
    pub curves: PathBuf,
    pub runs: PathBuf,
    pub diagnostics: PathBuf,
}

fn wrap(path: &Path) -> impl Fn(csv::Error) -> crate::Error + '_ {
    move |e| io_err(path, e)
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

/// Round indices emitted for a curve of `len` rounds.
pub fn curve_rounds(len: usize, stride: usize) -> Vec<usize> {
    let mut rounds: Vec<usize> = (0..len).step_by(stride.max(1)).collect();
    if len > 0 && rounds.last() != Some(&(len - 1)) {
        rounds.push(len - 1);
    }
    rounds
}

fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.10}")
    } else {
        x.to_string()
    }
}

/// Writes `curves.csv`, `runs.csv` and `diagnostics.csv` under `dir`. Rows
/// follow result order, so output is byte-stable for a fixed config.
pub fn emit_csv(results: &[ExperimentResult], dir: &Path) -> Result<CsvPaths> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let paths = CsvPaths {
        curves: dir.join("curves.csv"),
        runs: dir.join("runs.csv"),
        diagnostics: dir.join("diagnostics.csv"),
    };

    let mut curves = writer(&paths.curves)?;
    curves
        .write_record([
            "scenario",
            "policy",
            "round",
            "mean_cum_reward",
            "stderr_cum_reward",
            "mean_cum_regret",
        ])
        .map_err(wrap(&paths.curves))?;
    for res in results {
        for p in &res.policies {
            let c = &p.curve;
            for t in curve_rounds(c.rounds(), res.config.curve_stride) {
                curves
                    .write_record([
                        res.scenario.clone(),
                        p.label.clone(),
                        t.to_string(),
                        fmt(c.mean_reward[t]),
                        fmt(c.stderr_reward[t]),
                        fmt(c.mean_regret[t]),
                    ])
                    .map_err(wrap(&paths.curves))?;
            }
        }
    }
    curves.flush().map_err(|e| io_err(&paths.curves, e))?;

    let mut runs = writer(&paths.runs)?;
    runs.write_record([
        "scenario",
        "policy",
        "replication",
        "seed",
        "status",
        "rounds",
        "pulls",
        "spend",
        "final_cum_reward",
        "final_cum_regret",
        "accepted_arms",
        "cutoff",
        "identification_spend",
        "error",
    ])
    .map_err(wrap(&paths.runs))?;
    for res in results {
        for p in &res.policies {
            for rep in &p.replications {
                let m = rep.metrics();
                let (status, error) = match &rep.result {
                    Ok(_) => ("ok", String::new()),
                    Err(f) => ("failed", f.error.to_string()),
                };
                let (accepted, id_spend) = match &m.stage1 {
                    Some(s) => (
                        s.accepted.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "),
                        fmt(s.spend),
                    ),
                    None => (String::new(), String::new()),
                };
                runs.write_record([
                    res.scenario.clone(),
                    p.label.clone(),
                    rep.index.to_string(),
                    rep.seed.to_string(),
                    status.to_string(),
                    m.rounds().to_string(),
                    m.pulls().to_string(),
                    fmt(m.total_spend()),
                    fmt(m.final_reward()),
                    fmt(m.final_regret()),
                    accepted,
                    fmt(m.cutoff),
                    id_spend,
                    error,
                ])
                .map_err(wrap(&paths.runs))?;
            }
        }
    }
    runs.flush().map_err(|e| io_err(&paths.runs, e))?;

    let mut diag = writer(&paths.diagnostics)?;
    diag.write_record([
        "scenario",
        "policy",
        "replication",
        "round",
        "source",
        "context",
        "arm",
        "key",
        "value",
    ])
    .map_err(wrap(&paths.diagnostics))?;
    let opt = |x: Option<usize>| x.map_or(String::new(), |v| v.to_string());
    for res in results {
        for p in &res.policies {
            for rep in &p.replications {
                for d in &rep.metrics().diagnostics {
                    diag.write_record([
                        res.scenario.clone(),
                        p.label.clone(),
                        rep.index.to_string(),
                        d.round.to_string(),
                        d.source.to_string(),
                        opt(d.context),
                        opt(d.arm),
                        d.key.to_string(),
                        fmt(d.value),
                    ])
                    .map_err(wrap(&paths.diagnostics))?;
                }
            }
        }
    }
    diag.flush().map_err(|e| io_err(&paths.diagnostics, e))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_results_write_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_csv(&[], dir.path()).unwrap();
        for p in [&paths.curves, &paths.runs, &paths.diagnostics] {
            let text = fs::read_to_string(p).unwrap();
            assert_eq!(text.lines().count(), 1);
        }
        assert!(fs::read_to_string(&paths.curves)
            .unwrap()
            .starts_with("scenario,policy,round,mean_cum_reward"));
    }

    #[test]
    fn stride_includes_last_round() {
        assert_eq!(curve_rounds(10, 4), vec![0, 4, 8, 9]);
        assert_eq!(curve_rounds(9, 4), vec![0, 4, 8]);
        assert!(curve_rounds(0, 4).is_empty());
    }
}
