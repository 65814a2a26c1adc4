//! Curve export: CSV with an embedded resolved-config echo, a parse-back
//! helper, and a self-contained plotting script generator.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::federation::UpdateRule;

use super::{CurveMeta, ErrorCurve};

pub const CSV_HEADER: &str = "rule,M,N_i,epsilon,round,e_r,std";

/// 12 significant digits, scientific.
fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Renders curves to CSV: `#`-prefixed metadata lines first (the resolved
/// configuration echo plus one line per curve), then the header and one row
/// per (curve, round) in deterministic order.
pub fn render_curves_csv(curves: &[ErrorCurve], config_echo: &[String]) -> String {
    let mut out = String::new();
    for line in config_echo {
        let _ = writeln!(out, "# {line}");
    }
    for (idx, curve) in curves.iter().enumerate() {
        let _ = writeln!(
            out,
            "# curve {idx}: rule={} M={} N_i={} epsilon={}",
            curve.meta.rule, curve.meta.clients, curve.meta.rollouts_per_client, curve.meta.epsilon
        );
    }
    let _ = writeln!(out, "{CSV_HEADER}");
    for curve in curves {
        for (i, &round) in curve.rounds.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                curve.meta.rule,
                curve.meta.clients,
                curve.meta.rollouts_per_client,
                sig12(curve.meta.epsilon),
                round,
                sig12(curve.e_r[i]),
                sig12(curve.std[i]),
            );
        }
    }
    out
}

pub fn write_curves_csv(curves: &[ErrorCurve], path: &Path, config_echo: &[String]) -> Result<()> {
    let body = render_curves_csv(curves, config_echo);
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a CSV produced by `write_curves_csv` back into curves (rows with
/// equal metadata are grouped in file order).
pub fn read_curves_csv(path: &Path) -> Result<Vec<ErrorCurve>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_curves_csv(&text)
}

pub fn parse_curves_csv(text: &str) -> Result<Vec<ErrorCurve>> {
    let mut curves: Vec<ErrorCurve> = Vec::new();
    let mut saw_header = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != CSV_HEADER {
                return Err(Error::Config(format!(
                    "line {}: expected header '{CSV_HEADER}'",
                    lineno + 1
                )));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Config(format!(
                "line {}: expected 7 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let bad = |what: &str| Error::Config(format!("line {}: bad {what}", lineno + 1));
        let rule: UpdateRule = fields[0].parse()?;
        let clients: usize = fields[1].parse().map_err(|_| bad("M"))?;
        let rollouts: usize = fields[2].parse().map_err(|_| bad("N_i"))?;
        let epsilon: f64 = fields[3].parse().map_err(|_| bad("epsilon"))?;
        let round: usize = fields[4].parse().map_err(|_| bad("round"))?;
        let e_r: f64 = fields[5].parse().map_err(|_| bad("e_r"))?;
        let std: f64 = fields[6].parse().map_err(|_| bad("std"))?;

        let meta = CurveMeta {
            rule,
            clients,
            rollouts_per_client: rollouts,
            epsilon,
        };
        match curves.last_mut() {
            Some(curve) if curve.meta == meta => {
                curve.rounds.push(round);
                curve.e_r.push(e_r);
                curve.std.push(std);
            }
            _ => curves.push(ErrorCurve {
                rounds: vec![round],
                e_r: vec![e_r],
                std: vec![std],
                meta,
            }),
        }
    }
    if !saw_header {
        return Err(Error::Config("no CSV header found".into()));
    }
    Ok(curves)
}

/// Emits a self-contained Python plotting script that reads the given CSV,
/// draws one line per curve on a log-scaled error axis, and saves a PNG next
/// to the script. Output bytes depend only on the CSV path.
pub fn emit_plot_script(curves_csv_path: &Path, out_path: &Path) -> Result<()> {
    let csv = curves_csv_path.to_string_lossy().replace('\\', "/");
    let png = out_path.with_extension("png");
    let png = png.to_string_lossy().replace('\\', "/");
    let script = format!(
        r##"#!/usr/bin/env python3
"""Plot federated estimation-error curves from {csv}."""
import csv
from collections import OrderedDict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = "{csv}"
OUT_PATH = "{png}"

curves = OrderedDict()
with open(CSV_PATH) as fh:
    rows = [line for line in fh if not line.startswith("#")]
for row in csv.DictReader(rows):
    key = (row["rule"], row["M"], row["N_i"], row["epsilon"])
    curves.setdefault(key, ([], []))
    curves[key][0].append(int(row["round"]))
    curves[key][1].append(float(row["e_r"]))

fig, ax = plt.subplots(figsize=(6.0, 4.0))
for (rule, m, n_i, eps), (rounds, errs) in curves.items():
    label = f"{{rule}} M={{m}} N={{n_i}} eps={{float(eps):g}}"
    ax.plot(rounds, errs, label=label)
ax.set_yscale("log")
ax.set_xlabel("global round")
ax.set_ylabel("estimation error e_r")
ax.grid(True, which="both", alpha=0.3)
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT_PATH, dpi=150)
print(f"wrote {{OUT_PATH}}")
"##
    );
    std::fs::write(out_path, script).map_err(|source| Error::Io {
        path: out_path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_curve(rounds: usize, rule: UpdateRule) -> ErrorCurve {
        ErrorCurve {
            rounds: (0..=rounds).collect(),
            e_r: (0..=rounds).map(|r| 1.5 / (r as f64 + 1.0)).collect(),
            std: (0..=rounds).map(|r| 0.01 / (r as f64 + 1.0)).collect(),
            meta: CurveMeta {
                rule,
                clients: 50,
                rollouts_per_client: 25,
                epsilon: 0.01,
            },
        }
    }

    #[test]
    fn one_curve_with_one_round_gives_two_data_rows() {
        let body = render_curves_csv(&[sample_curve(1, UpdateRule::FedLin)], &[]);
        let data_rows: Vec<&str> = body
            .lines()
            .filter(|l| !l.starts_with('#') && *l != CSV_HEADER && !l.is_empty())
            .collect();
        assert_eq!(data_rows.len(), 2);
        assert!(data_rows[0].starts_with("fedlin,50,25,"));
    }

    #[test]
    fn empty_curve_list_yields_a_header_only_file() {
        let body = render_curves_csv(&[], &["seed = 1".into()]);
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(lines, vec!["# seed = 1", CSV_HEADER]);
    }

    #[test]
    fn csv_round_trips_to_12_significant_digits() {
        let curves = vec![
            sample_curve(5, UpdateRule::FedLin),
            sample_curve(5, UpdateRule::FedAvg),
        ];
        let body = render_curves_csv(&curves, &["trials = 25".into()]);
        let parsed = parse_curves_csv(&body).unwrap();
        assert_eq!(parsed.len(), 2);
        for (orig, back) in curves.iter().zip(parsed.iter()) {
            assert_eq!(orig.meta, back.meta);
            assert_eq!(orig.rounds, back.rounds);
            for (a, b) in orig.e_r.iter().zip(back.e_r.iter()) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let curves = vec![sample_curve(3, UpdateRule::FedLin)];
        let echo = vec!["seed = 5".to_string()];
        assert_eq!(
            render_curves_csv(&curves, &echo),
            render_curves_csv(&curves, &echo)
        );
    }

    #[test]
    fn plot_script_embeds_the_csv_path_and_is_stable() {
        let dir = std::env::temp_dir().join("fedsysid_plot_test");
        std::fs::create_dir_all(&dir).unwrap();
        let csv_path = dir.join("curves.csv");
        let script_path = dir.join("curves.py");
        emit_plot_script(&csv_path, &script_path).unwrap();
        let first = std::fs::read(&script_path).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        assert!(text.contains(csv_path.to_string_lossy().as_ref()));
        assert!(text.contains("set_yscale(\"log\")"));
        emit_plot_script(&csv_path, &script_path).unwrap();
        let second = std::fs::read(&script_path).unwrap();
        assert_eq!(first, second);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
