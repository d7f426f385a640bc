//! Random-rotation attack: SO(2) on each single channel against SO(4) on
//! the double channel, run with matched seeds.

use qkd2e_core::protocol::{Channel, DofTally, Session, SessionConfig};
use qkd2e_core::rng::pair_rng;
use qkd2e_core::source::Dof;
use qkd2e_core::strategy::{EavesdropConfig, Strategy};
use qkd2e_core::Result;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::runner::summarize_parallel;

/// Stream of the master seed used for bootstrap draws.
const BOOTSTRAP_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmTally {
    pub channel: Channel,
    pub dof: Dof,
    pub sifted: u64,
    pub errors: u64,
    pub qber: Option<f64>,
}

impl ArmTally {
    fn new(channel: Channel, dof: Dof, t: &DofTally) -> Self {
        ArmTally { channel, dof, sifted: t.sifted, errors: t.errors, qber: t.qber() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct So4Report {
    pub tool_version: String,
    pub pairs: u64,
    pub seed: u64,
    pub bootstrap: u32,
    pub arms: Vec<ArmTally>,
    /// Pooled per-bit QBER of the two SO(2) single-channel arms.
    pub e2: Option<f64>,
    /// Pooled per-bit QBER of both DOFs under SO(4).
    pub e4: Option<f64>,
    /// `e4/e2`; absent when `e2` is zero.
    pub ratio: Option<f64>,
    /// 95% percentile bootstrap interval of `ratio`.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    /// Bootstrap replicates with `e2 = 0`, left out of the interval.
    pub undefined_replicates: u32,
    /// Polarisation-only comparison.
    pub pol_ratio: Option<f64>,
    /// Double-channel XOR error over the pooled single-channel error.
    pub xor_ratio: Option<f64>,
    pub metric: String,
}

fn arm(channel: Channel, pairs: u64, seed: u64) -> Result<qkd2e_core::protocol::SessionSummary> {
    let cfg = SessionConfig::bb84x2(channel, pairs, seed)
        .with_eve(EavesdropConfig::new(Strategy::random_rotation_for(channel), 1.0));
    summarize_parallel(&Session::prepare(cfg)?)
}

fn rate(errors: u64, n: u64) -> Option<f64> {
    (n > 0).then(|| errors as f64 / n as f64)
}

fn ratio(num: Option<f64>, den: Option<f64>) -> Option<f64> {
    match (num, den) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    }
}

fn pooled(arms: &[&ArmTally]) -> Option<f64> {
    rate(arms.iter().map(|a| a.errors).sum(), arms.iter().map(|a| a.sifted).sum())
}

/// Percentile from sorted data, nearest rank.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

pub fn so4_report(pairs: u64, seed: u64, bootstrap: u32) -> Result<So4Report> {
    let pol = arm(Channel::SinglePol, pairs, seed)?;
    let phase = arm(Channel::SinglePhase, pairs, seed)?;
    let double = arm(Channel::Double, pairs, seed)?;
    let arms = vec![
        ArmTally::new(Channel::SinglePol, Dof::Polarization, &pol.per_dof[0]),
        ArmTally::new(Channel::SinglePhase, Dof::Phase, &phase.per_dof[0]),
        ArmTally::new(Channel::Double, Dof::Polarization, &double.per_dof[0]),
        ArmTally::new(Channel::Double, Dof::Phase, &double.per_dof[1]),
    ];
    let e2 = pooled(&[&arms[0], &arms[1]]);
    let e4 = pooled(&[&arms[2], &arms[3]]);

    let mut rng = pair_rng(seed, BOOTSTRAP_STREAM);
    let mut ratios = Vec::with_capacity(bootstrap as usize);
    let mut undefined = 0;
    for _ in 0..bootstrap {
        let draws: Vec<ArmTally> = arms
            .iter()
            .map(|a| {
                let errors = match a.qber {
                    Some(p) => Binomial::new(a.sifted, p).expect("rate in [0, 1]").sample(&mut rng),
                    None => 0,
                };
                ArmTally { errors, ..a.clone() }
            })
            .collect();
        match ratio(pooled(&[&draws[2], &draws[3]]), pooled(&[&draws[0], &draws[1]])) {
            Some(r) => ratios.push(r),
            None => undefined += 1,
        }
    }
    ratios.sort_by(f64::total_cmp);
    let (ci_low, ci_high) = if ratios.is_empty() {
        (None, None)
    } else {
        (Some(percentile(&ratios, 0.025)), Some(percentile(&ratios, 0.975)))
    };

    Ok(So4Report {
        tool_version: crate::TOOL_VERSION.to_string(),
        pairs,
        seed,
        bootstrap,
        e2,
        e4,
        ratio: ratio(e4, e2),
        ci_low,
        ci_high,
        undefined_replicates: undefined,
        pol_ratio: ratio(arms[2].qber, arms[0].qber),
        xor_ratio: ratio(double.xor_qber(), e2),
        arms,
        metric: "pooled per-bit QBER over both DOFs, SO(4) double channel against SO(2) single channels".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.025), 3.0);
        assert_eq!(percentile(&v, 0.975), 98.0);
        assert_eq!(percentile(&[7.0], 0.5), 7.0);
    }

    #[test]
    fn tiny_runs_do_not_fail() {
        let r = so4_report(3, 3, 50).unwrap();
        assert_eq!(r.arms.len(), 4);
        assert!(r.undefined_replicates <= 50);
        assert_eq!(r.ci_low.is_some(), r.undefined_replicates < 50);
    }

    #[test]
    fn repeatable() {
        assert_eq!(so4_report(2000, 11, 100).unwrap(), so4_report(2000, 11, 100).unwrap());
    }

    #[test]
    fn ratio_near_analytic() {
        let r = so4_report(40_000, 3, 200).unwrap();
        // Haar averages: e2 = 5/16, e4 = 3/8.
        assert!((r.e2.unwrap() - 5.0 / 16.0).abs() < 0.02);
        assert!((r.e4.unwrap() - 3.0 / 8.0).abs() < 0.02);
        let (lo, hi) = (r.ci_low.unwrap(), r.ci_high.unwrap());
        assert!(lo < r.ratio.unwrap() && r.ratio.unwrap() < hi);
    }
}
