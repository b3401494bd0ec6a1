//! Post-run validation and comparison report: bound-ordering checks,
//! per-SNR method disagreements, and dB-gap readouts at target outage
//! levels.

use std::collections::BTreeMap;

use serde_json::json;

use crate::runner::{Method, Metric, ResultRow};

/// Deterministic methods must respect orderings to this slack.
const DET_TOL: f64 = 1e-9;
/// Allowance added to 2 ci95 for statistical comparisons; covers the
/// zero-count corner where the binomial half-width collapses to 0 (the
/// rule-of-three bound at 10^6 trials is 3e-6).
const STAT_FLOOR: f64 = 1e-5;

/// Machine-checkable outcome of [`compare_report`].
pub struct Report {
    pub text: String,
    pub summary: serde_json::Value,
    pub bound_violations: usize,
}

type Key = (String, u64, u32); // scenario, snr bits, m

fn key(r: &ResultRow) -> Key {
    (r.scenario.clone(), r.snr_db.to_bits(), r.m)
}

/// Build the comparison report for the rows of one run.
pub fn compare_report(rows: &[ResultRow]) -> Report {
    let mut text = String::new();
    let mut violations = 0usize;
    let mut max_violation = 0.0f64;
    let mut disagreements = Vec::new();

    if rows.is_empty() {
        return Report { text, summary: json!({"empty": true}), bound_violations: 0 };
    }

    // index outage rows per (scenario, snr, m)
    let mut groups: BTreeMap<Key, BTreeMap<&'static str, (f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metric == Metric::Outage) {
        groups.entry(key(r)).or_default().insert(r.method.tag(), (r.value, r.ci95));
    }

    let ordered_pairs: [(&str, &str, bool); 4] = [
        // (lower, upper, statistical)
        ("lemma2", "clt_quadrature", false),
        ("clt_quadrature", "lemma3", false),
        ("lemma4", "clt_quadrature", false),
        ("clt_quadrature", "lemma5", false),
    ];
    for ((scen, snr_bits, m), methods) in &groups {
        let snr = f64::from_bits(*snr_bits);
        for (lo_tag, hi_tag, _) in &ordered_pairs {
            if let (Some(&(lo, _)), Some(&(hi, _))) = (methods.get(lo_tag), methods.get(hi_tag)) {
                let gap = lo - hi;
                if gap > DET_TOL {
                    violations += 1;
                    max_violation = max_violation.max(gap);
                    text.push_str(&format!(
                        "VIOLATION {scen} snr={snr} m={m}: {lo_tag}={lo:.6e} > {hi_tag}={hi:.6e}\n"
                    ));
                }
            }
        }
        if let Some(&(mc, ci)) = methods.get("mc") {
            let stat_tol = 2.0 * ci + STAT_FLOOR;
            if let Some(&(lower, _)) = methods.get("lower_jensen") {
                let gap = lower - mc - stat_tol;
                if gap > 0.0 {
                    violations += 1;
                    max_violation = max_violation.max(gap);
                    text.push_str(&format!(
                        "VIOLATION {scen} snr={snr} m={m}: lower_jensen={lower:.6e} above mc={mc:.6e}+tol\n"
                    ));
                }
            }
            if let Some(&(upper, _)) = methods.get("upper_minkowski") {
                let gap = mc - upper - stat_tol;
                if gap > 0.0 {
                    violations += 1;
                    max_violation = max_violation.max(gap);
                    text.push_str(&format!(
                        "VIOLATION {scen} snr={snr} m={m}: upper_minkowski={upper:.6e} below mc={mc:.6e}-tol\n"
                    ));
                }
            }
            if let Some(&(ana, _)) = methods.get("clt_quadrature") {
                let diff = (mc - ana).abs();
                disagreements.push(json!({
                    "scenario": scen, "snr_db": snr, "m": m,
                    "mc": mc, "clt_quadrature": ana,
                    "abs_diff": diff, "stat_tol": stat_tol,
                    "within": diff <= stat_tol,
                }));
                text.push_str(&format!(
                    "{scen} snr={snr} m={m}: |mc-clt| = {diff:.3e} (tol {stat_tol:.3e}) {}\n",
                    if diff <= stat_tol { "ok" } else { "DISAGREES" }
                ));
            }
        }
    }

    // dB gaps at target outage levels, per curve, log-linear interpolation
    // on strictly decreasing segments only
    let mut gaps = serde_json::Map::new();
    let mut curves: BTreeMap<(String, &'static str, u32), Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metric == Metric::Outage) {
        curves
            .entry((r.scenario.clone(), r.method.tag(), r.m))
            .or_default()
            .push((r.snr_db, r.value));
    }
    for ((scen, method, m), mut pts) in curves {
        pts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for target in [1e-1, 1e-2] {
            if let Some(snr) = snr_at_outage(&pts, target) {
                let label = format!("{scen}|{method}|m{m}|@{target:.0e}");
                gaps.insert(label.clone(), json!(snr));
                text.push_str(&format!("{label}: SNR = {snr:.3} dB\n"));
            }
        }
    }

    // HARQ-depth readout: relative throughput improvement per added round
    let mut eta: BTreeMap<(u64, u32), f64> = BTreeMap::new();
    for r in rows.iter().filter(|r| {
        r.metric == Metric::Throughput && r.method == Method::Mc && r.scenario.contains(":M")
    }) {
        eta.insert((r.snr_db.to_bits(), r.m), r.value);
    }
    if !eta.is_empty() {
        let snrs: Vec<u64> = {
            let mut v: Vec<u64> = eta.keys().map(|k| k.0).collect();
            v.dedup();
            v
        };
        for snr_bits in snrs {
            let snr = f64::from_bits(snr_bits);
            let mut per_m: Vec<(u32, f64)> = eta
                .iter()
                .filter(|((s, _), _)| *s == snr_bits)
                .map(|((_, m), &v)| (*m, v))
                .collect();
            per_m.sort_by_key(|(m, _)| *m);
            if per_m.len() >= 2 {
                let mut best = (0u32, f64::NEG_INFINITY);
                for w in per_m.windows(2) {
                    let rel = (w[1].1 - w[0].1) / w[0].1.max(1e-12);
                    if rel > best.1 {
                        best = (w[1].0, rel);
                    }
                }
                text.push_str(&format!(
                    "snr={snr}: largest relative throughput gain at M={} ({:+.3e})\n",
                    best.0, best.1
                ));
            }
        }
    }

    text.push_str(&format!(
        "bound-ordering violations: {violations} (max excess {max_violation:.3e})\n"
    ));
    let summary = json!({
        "bound_violations": violations,
        "max_violation": max_violation,
        "disagreements": disagreements,
        "snr_at_outage": gaps,
    });
    Report { text, summary, bound_violations: violations }
}

/// SNR where a (snr, outage) curve crosses `target`, interpolating
/// log-linearly; only strictly decreasing positive segments qualify.
pub fn snr_at_outage(pts: &[(f64, f64)], target: f64) -> Option<f64> {
    for w in pts.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if y0 > y1 && y1 > 0.0 && y0 >= target && target >= y1 {
            let t = (target.ln() - y0.ln()) / (y1.ln() - y0.ln());
            return Some(x0 + t * (x1 - x0));
        }
    }
    None
}
