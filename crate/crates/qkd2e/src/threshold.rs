//! Interception thresholds from the Wigner test, analytic and simulated.

use qkd2e_core::protocol::{Channel, SessionConfig};
use qkd2e_core::source::Dof;
use qkd2e_core::strategy::{EavesdropConfig, FixedChoice, Strategy};
use qkd2e_core::wigner::{
    analytic_sweep, dof_wigner, estimate_wigner, intercepted_wigner, is_detected, max_undetected_fraction_for,
    shift_slope, SweepRow, WignerSettings,
};
use qkd2e_core::Result;
use serde::{Deserialize, Serialize};

use crate::runner::wigner_parallel;

/// Eve measures in the key basis, which sits at analyser angle 0.
pub const EVE_ANGLE: f64 = 0.0;

/// Default η grid of the sweep: 0 to 0.2 in steps of 0.01.
pub fn default_etas() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// One Wigner test (single channel).
    pub single: f64,
    /// Two simultaneous tests (double channel).
    pub double: f64,
    /// How the two tests are combined.
    pub combination: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofEstimate {
    pub dof: Dof,
    #[serde(rename = "W")]
    pub w: f64,
    pub stderr: f64,
    pub trials: u64,
    /// `(Ŵ − W_expected)/stderr`.
    pub z: f64,
    pub key_bits: u64,
    pub key_errors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub pairs: u64,
    pub seed: u64,
    pub channel: Channel,
    pub eta: f64,
    pub detection_efficiency: f64,
    #[serde(rename = "W_expected")]
    pub w_expected: f64,
    pub per_dof: Vec<DofEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerThresholdReport {
    pub tool_version: String,
    pub angles_deg: [f64; 3],
    pub rel_uncertainty: f64,
    #[serde(rename = "W_quantum")]
    pub w_quantum: f64,
    /// `dW/dη` with Eve in the key basis, per DOF.
    pub slope_pol: f64,
    pub slope_phase: f64,
    pub thresholds: Thresholds,
    pub eta: f64,
    #[serde(rename = "W_at_eta")]
    pub w_at_eta: f64,
    pub detected_at_eta: bool,
    pub sweep: Vec<SweepRow>,
    pub monte_carlo: Option<MonteCarlo>,
}

/// Monte Carlo parameters for [`threshold_report`].
#[derive(Debug, Clone, Copy)]
pub struct SimulationRequest {
    pub pairs: u64,
    pub seed: u64,
    pub channel: Channel,
    pub efficiency: f64,
}

pub fn threshold_report(
    angles_deg: [f64; 3],
    rel_uncertainty: f64,
    eta: f64,
    simulate: Option<SimulationRequest>,
) -> Result<WignerThresholdReport> {
    let settings = WignerSettings::from_degrees(angles_deg[0], angles_deg[1], angles_deg[2]);
    let w_quantum = dof_wigner(Dof::Polarization, &settings, None)?;
    let single = max_undetected_fraction_for(&settings, EVE_ANGLE, rel_uncertainty, 1)?;
    let double = max_undetected_fraction_for(&settings, EVE_ANGLE, rel_uncertainty, 2)?;
    let w_at_eta = intercepted_wigner(&settings, eta, EVE_ANGLE)?;
    let mut etas = default_etas();
    if !etas.contains(&eta) {
        etas.push(eta);
        etas.sort_by(f64::total_cmp);
    }
    let monte_carlo = simulate.map(|req| simulate_wigner(&settings, eta, req)).transpose()?;
    Ok(WignerThresholdReport {
        tool_version: crate::TOOL_VERSION.to_string(),
        angles_deg,
        rel_uncertainty,
        w_quantum,
        slope_pol: shift_slope(Dof::Polarization, &settings, EVE_ANGLE)?,
        slope_phase: shift_slope(Dof::Phase, &settings, EVE_ANGLE)?,
        thresholds: Thresholds {
            single,
            double,
            combination: "two independent tests shrink the tolerated shift by sqrt(2); summing the two shifts \
                          would instead halve it"
                .to_string(),
        },
        eta,
        w_at_eta,
        detected_at_eta: is_detected(w_at_eta - w_quantum, w_quantum, rel_uncertainty, 1),
        sweep: analytic_sweep(&settings, &etas, EVE_ANGLE, rel_uncertainty, 1)?,
        monte_carlo,
    })
}

fn simulate_wigner(settings: &WignerSettings, eta: f64, req: SimulationRequest) -> Result<MonteCarlo> {
    let mut cfg =
        SessionConfig::ekert_wigner(req.channel, req.pairs, req.seed, settings).with_efficiency(req.efficiency);
    if eta > 0.0 {
        let eve = Strategy::FixedBasis { choice: FixedChoice::Selected { pol: 0, phase: 0 } };
        cfg = cfg.with_eve(EavesdropConfig::new(eve, eta));
    }
    let data = wigner_parallel(cfg, settings)?;
    let w_expected = intercepted_wigner(settings, eta, EVE_ANGLE)?;
    let per_dof = data
        .per_dof
        .iter()
        .map(|d| {
            let (w, stderr) = estimate_wigner(d)?;
            Ok(DofEstimate {
                dof: d.dof,
                w,
                stderr,
                trials: d.total_trials(),
                z: if stderr > 0.0 { (w - w_expected) / stderr } else { 0.0 },
                key_bits: d.key_bits,
                key_errors: d.key_errors,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MonteCarlo {
        pairs: req.pairs,
        seed: req.seed,
        channel: req.channel,
        eta,
        detection_efficiency: req.efficiency,
        w_expected,
        per_dof,
    })
}

/// Sweep rows for CSV output, with the simulated points appended.
pub fn sweep_rows(report: &WignerThresholdReport) -> Vec<SweepRow> {
    let mut rows = report.sweep.clone();
    if let Some(mc) = &report.monte_carlo {
        for d in &mc.per_dof {
            rows.push(SweepRow {
                eta: mc.eta,
                w: d.w,
                stderr: d.stderr,
                detected: is_detected(d.w - report.w_quantum, report.w_quantum, report.rel_uncertainty, 1),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_thresholds() {
        let r = threshold_report([0.0, 30.0, 60.0], 0.1, 0.0, None).unwrap();
        assert!((r.w_quantum + 0.125).abs() < 1e-9);
        assert!((r.slope_pol - 3.0 / 16.0).abs() < 1e-9);
        assert!((r.slope_phase - 3.0 / 16.0).abs() < 1e-9);
        assert!((r.thresholds.single - 0.0667).abs() < 1e-4);
        assert!((r.thresholds.double - 0.0471).abs() < 1e-4);
        assert_eq!(r.sweep.len(), 21);
        assert!(!r.sweep[6].detected && r.sweep[7].detected);
    }

    #[test]
    fn threshold_scales_with_uncertainty() {
        let a = threshold_report([0.0, 30.0, 60.0], 0.1, 0.0, None).unwrap();
        let b = threshold_report([0.0, 30.0, 60.0], 0.2, 0.0, None).unwrap();
        assert!((b.thresholds.single - 2.0 * a.thresholds.single).abs() < 1e-12);
    }

    #[test]
    fn extra_eta_joins_the_sweep() {
        let r = threshold_report([0.0, 30.0, 60.0], 0.1, 0.333, None).unwrap();
        assert_eq!(r.sweep.len(), 22);
        assert!(r.sweep.windows(2).all(|w| w[0].eta < w[1].eta));
    }

    #[test]
    fn small_simulation() {
        let req = SimulationRequest { pairs: 20_000, seed: 5, channel: Channel::Double, efficiency: 1.0 };
        let r = threshold_report([0.0, 30.0, 60.0], 0.1, 0.0, Some(req)).unwrap();
        let mc = r.monte_carlo.as_ref().unwrap();
        assert_eq!(mc.per_dof.len(), 2);
        assert!(mc.per_dof.iter().all(|d| d.z.abs() < 5.0 && d.key_errors == 0));
        assert_eq!(sweep_rows(&r).len(), 23);
    }
}
