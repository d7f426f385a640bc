//! The summary document written by `qkd2e simulate`.

use qkd2e_core::info::{analytics_for, ChannelKind, ErrorModel};
use qkd2e_core::protocol::{Channel, SessionLog, SessionMeta, SessionSummary, WignerRunData};
use qkd2e_core::strategy::{FixedChoice, Strategy};
use qkd2e_core::wigner::{estimate_wigner, intercepted_wigner, WignerSettings};
use qkd2e_core::Result;
use serde::{Deserialize, Serialize};

use crate::threshold::{DofEstimate, EVE_ANGLE};

/// One row of the per-DOF table; `dof` is `xor` for the joint key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QberRow {
    pub dof: String,
    pub sifted: u64,
    pub errors: u64,
    pub qber: Option<f64>,
    /// Physical-model prediction at the configured η, when one exists.
    pub expected: Option<f64>,
    pub eve_compared: u64,
    pub eve_errors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub tool_version: String,
    pub meta: SessionMeta,
    pub intercepted: u64,
    pub rows: Vec<QberRow>,
    pub wigner: Option<Vec<DofEstimate>>,
}

fn expected(meta: &SessionMeta, channel: ChannelKind) -> Option<f64> {
    match &meta.eve {
        None => Some(0.0),
        Some(eve) if eve.strategy == Strategy::None => Some(0.0),
        Some(eve) => Some(eve.eta * analytics_for(&eve.strategy, channel, ErrorModel::Physical).ok()?.q_ab),
    }
}

pub fn bb84_report(meta: SessionMeta, summary: &SessionSummary) -> SimulateReport {
    let per_dof_expected = expected(&meta, ChannelKind::Single);
    let mut rows: Vec<QberRow> = summary
        .dofs
        .iter()
        .zip(&summary.per_dof)
        .map(|(dof, t)| QberRow {
            dof: dof.name().to_string(),
            sifted: t.sifted,
            errors: t.errors,
            qber: t.qber(),
            expected: per_dof_expected,
            eve_compared: t.eve_compared,
            eve_errors: t.eve_errors,
        })
        .collect();
    if meta.channel == Channel::Double {
        rows.push(QberRow {
            dof: "xor".to_string(),
            sifted: summary.joint_sifted,
            errors: summary.xor_errors,
            qber: summary.xor_qber(),
            expected: expected(&meta, ChannelKind::Double),
            eve_compared: 0,
            eve_errors: 0,
        });
    }
    SimulateReport {
        tool_version: crate::TOOL_VERSION.to_string(),
        intercepted: summary.intercepted,
        meta,
        rows,
        wigner: None,
    }
}

pub fn ekert_report(log: &SessionLog, settings: &WignerSettings) -> Result<SimulateReport> {
    let meta = log.meta.clone();
    let mut data = WignerRunData::new(*settings, &meta.dofs);
    for r in &log.records {
        data.add(r);
    }
    let eta = meta.eve.map_or(0.0, |e| e.eta);
    // Only the key-basis attack has a closed-form W.
    let w_expected = match meta.eve.map(|e| e.strategy) {
        None => Some(intercepted_wigner(settings, 0.0, EVE_ANGLE)?),
        Some(Strategy::FixedBasis { choice: FixedChoice::Selected { pol: 0, phase: 0 } }) => {
            Some(intercepted_wigner(settings, eta, EVE_ANGLE)?)
        }
        _ => None,
    };
    let estimates = data
        .per_dof
        .iter()
        .map(|d| {
            let (w, stderr) = estimate_wigner(d)?;
            let z = match w_expected {
                Some(e) if stderr > 0.0 => (w - e) / stderr,
                _ => 0.0,
            };
            Ok(DofEstimate {
                dof: d.dof,
                w,
                stderr,
                trials: d.total_trials(),
                z,
                key_bits: d.key_bits,
                key_errors: d.key_errors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = estimates
        .iter()
        .map(|e| QberRow {
            dof: e.dof.name().to_string(),
            sifted: e.key_bits,
            errors: e.key_errors,
            qber: (e.key_bits > 0).then(|| e.key_errors as f64 / e.key_bits as f64),
            expected: None,
            eve_compared: 0,
            eve_errors: 0,
        })
        .collect();
    Ok(SimulateReport {
        tool_version: crate::TOOL_VERSION.to_string(),
        intercepted: log.intercepted(),
        meta,
        rows,
        wigner: Some(estimates),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qkd2e_core::protocol::{run_session, Session, SessionConfig};
    use qkd2e_core::strategy::EavesdropConfig;

    #[test]
    fn clean_run_has_zero_qber() {
        let s = Session::prepare(SessionConfig::bb84x2(Channel::Double, 1000, 1)).unwrap();
        let r = bb84_report(s.meta(), &s.summarize().unwrap());
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|row| row.qber == Some(0.0) && row.expected == Some(0.0)));
    }

    #[test]
    fn breidbart_expectations() {
        let cfg =
            SessionConfig::bb84x2(Channel::Double, 100, 1).with_eve(EavesdropConfig::new(Strategy::Breidbart, 0.5));
        let s = Session::prepare(cfg).unwrap();
        let r = bb84_report(s.meta(), &s.summarize().unwrap());
        assert!((r.rows[0].expected.unwrap() - 0.125).abs() < 1e-15);
        assert!((r.rows[2].expected.unwrap() - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn ekert_rows_use_key_bits() {
        let settings = WignerSettings::standard();
        let cfg = SessionConfig::ekert_wigner(Channel::SinglePol, 5000, 2, &settings).with_efficiency(1.0);
        let cfg = qkd2e_core::protocol::wigner_config(cfg, &settings).unwrap();
        let log = run_session(cfg).unwrap();
        let r = ekert_report(&log, &settings).unwrap();
        let w = r.wigner.as_ref().unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(r.rows[0].sifted, w[0].key_bits);
        assert_eq!(r.rows[0].errors, 0);
    }
}
