//! Built-in experiment setups matching the reference figures.

use crate::config::{ExperimentSpec, FsoSpec, OutputFormat, RfSpec, Scenario};

fn db_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = start;
    while x <= stop + 1e-9 {
        v.push(x);
        x += step;
    }
    v
}

fn base(scenario: Scenario, fso: FsoSpec, r: f64, m: u32, n: u32, snr: Vec<f64>) -> ExperimentSpec {
    ExperimentSpec {
        scenario,
        fso,
        rf: RfSpec::Rayleigh,
        rate_r: r,
        max_rounds_m: m,
        fso_realizations_n: n,
        psi: 1.0,
        detection_c: 1.0,
        snr_db: snr,
        trials: 1_000_000,
        seed: 20_240_914,
        n_values: vec![1, 5, 50],
        m_values: vec![1, 2, 3, 4],
        rate_grid: (1..=48).map(|k| 0.25 * k as f64).collect(),
        outer_draws: 200,
        inner_packets: 10_000,
        composite_delta: 0.70,
        unit_median_rates: false,
        grid_points: 101,
        out: None,
        format: OutputFormat::Csv,
    }
}

const EXP1: FsoSpec = FsoSpec::Exponential { lambda: 1.0 };
const LN1: FsoSpec = FsoSpec::LogNormal { varpi: 0.0, delta: 1.0 };
/// Gamma-Gamma shapes for Rytov variance 1.
const GG1: FsoSpec = FsoSpec::GammaGamma { a: 4.3939, b: 2.5636 };

/// Resolve a preset by name (`fig3` .. `fig11`).
pub fn preset(name: &str) -> Option<ExperimentSpec> {
    let spec = match name {
        // CLT accuracy vs N: exponential FSO, R=4, M=2
        "fig3" => base(Scenario::Fig3CltN, EXP1, 4.0, 2, 50, db_grid(0.0, 24.0, 2.0)),
        // lemma bounds, R=5, N=50, per-distribution
        "fig4" => base(Scenario::Fig4to6LemmaBounds, EXP1, 5.0, 2, 50, db_grid(0.0, 40.0, 2.5)),
        "fig5" => base(Scenario::Fig4to6LemmaBounds, LN1, 5.0, 2, 50, db_grid(0.0, 40.0, 2.5)),
        "fig6" => base(Scenario::Fig4to6LemmaBounds, GG1, 5.0, 2, 50, db_grid(0.0, 40.0, 2.5)),
        // small-N product/sum bounds: Gamma-Gamma, N=1
        "fig7" => base(Scenario::Fig7SmallN, GG1, 5.0, 2, 1, db_grid(5.0, 30.0, 2.5)),
        // HARQ depth sweep: R=6, N=100
        "fig8" => {
            let mut s = base(Scenario::Fig8HarqDepth, EXP1, 6.0, 4, 100, db_grid(0.0, 24.0, 2.0));
            s.trials = 200_000;
            s
        }
        // throughput vs initial rate: log-normal FSO, N=100
        "fig9" => {
            let mut s =
                base(Scenario::Fig9RateSweep, LN1, 6.0, 2, 100, vec![10.0, 20.0, 30.0]);
            s.trials = 100_000;
            s.m_values = vec![1, 2];
            s
        }
        // joint vs single-link comparison under composite exponential links
        "fig10" => {
            let mut s = base(
                Scenario::Fig10RfVsFsoVsJoint,
                EXP1,
                5.0,
                2,
                100,
                db_grid(8.0, 38.0, 2.0),
            );
            s.rf = RfSpec::CompositeLogNormalRate { delta: 0.70, unit_median: false };
            s
        }
        // power allocation: N=20, M=2, R=5
        "fig11" => base(Scenario::Fig11PowerAlloc, EXP1, 5.0, 2, 20, db_grid(0.0, 40.0, 2.5)),
        _ => return None,
    };
    Some(spec)
}

pub const PRESET_NAMES: [&str; 9] =
    ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11"];
