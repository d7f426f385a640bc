//! Binary-symmetric-channel information and closed-form attack analytics.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::protocol::Channel;
use crate::strategy::Strategy;

/// Eve's per-basis error in the Breidbart basis, `(2 − √2)/4`.
pub const BREIDBART_ERROR: f64 = (2.0 - core::f64::consts::SQRT_2) / 4.0;

fn check_probability(p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

fn plogp(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * libm::log2(p)
    }
}

/// `1 + p log₂ p + (1 − p) log₂(1 − p)`, bits per use of a binary symmetric
/// channel that transmits correctly with probability `p`.
pub fn bsc_information(p: f64) -> Result<f64> {
    check_probability(p)?;
    // Written so that p and 1 − p give bit-identical results.
    let (lo, hi) = if p <= 0.5 { (p, 1.0 - p) } else { (1.0 - p, p) };
    Ok(1.0 + plogp(lo) + plogp(hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelInfoReport {
    pub p: f64,
    #[cfg_attr(feature = "serde", serde(rename = "I"))]
    pub info: f64,
}

pub fn channel_info(p: f64) -> Result<ChannelInfoReport> {
    Ok(ChannelInfoReport { p, info: bsc_information(p)? })
}

/// Error rate of the XOR of two bits that each err independently with rate `e`.
pub fn xor_error(e: f64) -> f64 {
    2.0 * e * (1.0 - e)
}

/// Error rate of two binary symmetric channels in series.
pub fn cascade_error(e1: f64, e2: f64) -> f64 {
    e1 + e2 - 2.0 * e1 * e2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AttackKind {
    FixedBasis,
    Breidbart,
}

impl AttackKind {
    pub const ALL: [AttackKind; 2] = [AttackKind::FixedBasis, AttackKind::Breidbart];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::FixedBasis => "fixed-basis",
            AttackKind::Breidbart => "breidbart",
        }
    }

    /// Eve's error on one DOF for each of the two legitimate bases.
    fn per_basis_errors(self) -> [f64; 2] {
        match self {
            AttackKind::FixedBasis => [0.0, 0.5],
            AttackKind::Breidbart => [BREIDBART_ERROR, BREIDBART_ERROR],
        }
    }
}

impl TryFrom<&Strategy> for AttackKind {
    type Error = Error;

    fn try_from(s: &Strategy) -> Result<Self> {
        match s {
            Strategy::FixedBasis { .. } => Ok(AttackKind::FixedBasis),
            Strategy::Breidbart => Ok(AttackKind::Breidbart),
            other => Err(Error::UnsupportedStrategy(other.name())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ChannelKind {
    Single,
    Double,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 2] = [ChannelKind::Single, ChannelKind::Double];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Single => "single",
            ChannelKind::Double => "double",
        }
    }
}

impl From<Channel> for ChannelKind {
    fn from(c: Channel) -> Self {
        match c {
            Channel::Double => ChannelKind::Double,
            Channel::SinglePol | Channel::SinglePhase => ChannelKind::Single,
        }
    }
}

/// How Alice–Bob errors are accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ErrorModel {
    /// Alice→Eve and Eve→Bob as independent binary symmetric channels.
    Cascade,
    /// Correlated intercept-resend: Eve's and Bob's errors conditioned on
    /// the same legitimate basis.
    Physical,
}

impl ErrorModel {
    pub const ALL: [ErrorModel; 2] = [ErrorModel::Cascade, ErrorModel::Physical];

    pub fn name(self) -> &'static str {
        match self {
            ErrorModel::Cascade => "cascade",
            ErrorModel::Physical => "physical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttackAnalytics {
    pub strategy: AttackKind,
    pub channel: ChannelKind,
    pub model: ErrorModel,
    /// Eve's error on one DOF, averaged over the legitimate bases.
    pub q1: f64,
    /// Probability Eve's key bit is correct.
    pub p2: f64,
    #[cfg_attr(feature = "serde", serde(rename = "I_AE"))]
    pub i_ae: f64,
    #[cfg_attr(feature = "serde", serde(rename = "q_AB"))]
    pub q_ab: f64,
    #[cfg_attr(feature = "serde", serde(rename = "I_AB"))]
    pub i_ab: f64,
}

pub fn strategy_analytics(strategy: AttackKind, channel: ChannelKind, model: ErrorModel) -> AttackAnalytics {
    let q = strategy.per_basis_errors();
    let q1 = 0.5 * (q[0] + q[1]);
    let per_dof_ab = match model {
        ErrorModel::Cascade => cascade_error(q1, q1),
        // Bob errs when Eve's resent eigenstate flips his outcome: 2q(1 − q)
        // in each legitimate basis.
        ErrorModel::Physical => 0.5 * (xor_error(q[0]) + xor_error(q[1])),
    };
    let (eve_error, q_ab) = match channel {
        ChannelKind::Single => (q1, per_dof_ab),
        ChannelKind::Double => (xor_error(q1), xor_error(per_dof_ab)),
    };
    let p2 = 1.0 - eve_error;
    AttackAnalytics {
        strategy,
        channel,
        model,
        q1,
        p2,
        i_ae: bsc_information(p2).expect("probability by construction"),
        q_ab,
        i_ab: bsc_information(1.0 - q_ab).expect("probability by construction"),
    }
}

/// Analytics for a configured strategy; random rotation and `none` have no
/// closed form.
pub fn analytics_for(strategy: &Strategy, channel: ChannelKind, model: ErrorModel) -> Result<AttackAnalytics> {
    Ok(strategy_analytics(AttackKind::try_from(strategy)?, channel, model))
}

/// Every strategy × channel × model combination, in that nesting order.
pub fn analytics_table() -> Vec<AttackAnalytics> {
    let mut rows = Vec::new();
    for s in AttackKind::ALL {
        for c in ChannelKind::ALL {
            for m in ErrorModel::ALL {
                rows.push(strategy_analytics(s, c, m));
            }
        }
    }
    rows
}

/// Ratio of induced Alice–Bob error on the double channel to that on the
/// single channel when Eve intercepts just enough pairs on each to learn
/// the same information.
pub fn equal_info_error_ratio(single: &AttackAnalytics, double: &AttackAnalytics) -> Result<f64> {
    if double.i_ae == 0.0 {
        return Err(Error::ZeroInformation);
    }
    if single.q_ab == 0.0 {
        return Err(Error::ZeroReferenceError);
    }
    let eta_ratio = single.i_ae / double.i_ae;
    Ok(double.q_ab * eta_ratio / single.q_ab)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorCorrectionParams {
    /// Intercepted fraction.
    pub eta: f64,
    /// Key-length reduction factor of error correction.
    pub alpha: f64,
}

impl ErrorCorrectionParams {
    pub fn validate(&self) -> Result<()> {
        check_probability(self.eta)?;
        if !(self.alpha.is_finite() && self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::ProbabilityOutOfRange(self.alpha));
        }
        Ok(())
    }
}

/// Cited coefficients of the post-error-correction information bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundCoefficients {
    pub single: f64,
    pub double: f64,
}

impl Default for BoundCoefficients {
    fn default() -> Self {
        BoundCoefficients { single: 0.299, double: 0.118 }
    }
}

/// Upper bound on Eve's information after error correction: `c·η·α`.
pub fn huttner_ekert_bound(
    params: &ErrorCorrectionParams,
    channel: ChannelKind,
    coefficients: &BoundCoefficients,
) -> Result<f64> {
    params.validate()?;
    let c = match channel {
        ChannelKind::Single => coefficients.single,
        ChannelKind::Double => coefficients.double,
    };
    Ok(c * params.eta * params.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct transcription of the formula, no symmetry trick.
    fn oracle(p: f64) -> f64 {
        let t = |x: f64| if x == 0.0 { 0.0 } else { x * x.log2() };
        1.0 + t(p) + t(1.0 - p)
    }

    #[test]
    fn information_values() {
        assert_eq!(bsc_information(0.5).unwrap(), 0.0);
        assert_eq!(bsc_information(0.0).unwrap(), 1.0);
        assert_eq!(bsc_information(1.0).unwrap(), 1.0);
        for (p, expect, tol) in [
            (5.0 / 8.0, 0.04557, 5e-4),
            (3.0 / 4.0, 0.18872, 5e-4),
            (17.0 / 32.0, 0.00284, 5e-5),
            (1.0 - BREIDBART_ERROR, 0.399, 5e-4),
        ] {
            let i = bsc_information(p).unwrap();
            assert!((i - expect).abs() < tol, "{p}: {i}");
            assert!((i - oracle(p)).abs() < 1e-15);
        }
        assert!(bsc_information(-0.1).is_err());
        assert!(bsc_information(f64::NAN).is_err());
    }

    #[test]
    fn error_composition() {
        assert_eq!(xor_error(0.25), 0.375);
        assert_eq!(xor_error(0.375), 15.0 / 32.0);
        assert_eq!(xor_error(0.0), 0.0);
        assert_eq!(cascade_error(0.25, 0.25), 0.375);
        assert_eq!(cascade_error(0.3, 0.0), 0.3);
        assert_eq!(cascade_error(0.5, 0.17), 0.5);
    }

    #[test]
    fn fixed_basis_cascade_double() {
        let a = strategy_analytics(AttackKind::FixedBasis, ChannelKind::Double, ErrorModel::Cascade);
        assert_eq!(a.q1, 0.25);
        assert_eq!(a.p2, 0.625);
        assert_eq!(a.q_ab, 15.0 / 32.0);
        assert!((a.i_ae - 0.0456).abs() < 1e-4);
        assert!((a.i_ab - 0.0028).abs() < 5e-5);
    }

    #[test]
    fn fixed_basis_single_models_differ() {
        let c = strategy_analytics(AttackKind::FixedBasis, ChannelKind::Single, ErrorModel::Cascade);
        let p = strategy_analytics(AttackKind::FixedBasis, ChannelKind::Single, ErrorModel::Physical);
        assert_eq!(c.q_ab, 0.375);
        assert_eq!(p.q_ab, 0.25);
    }

    #[test]
    fn breidbart_rows() {
        let s = strategy_analytics(AttackKind::Breidbart, ChannelKind::Single, ErrorModel::Physical);
        assert_eq!(s.q1, BREIDBART_ERROR);
        assert!((s.q_ab - 0.25).abs() < 1e-15);
        assert!((s.i_ae - 0.399).abs() < 5e-4);
        assert!((s.i_ab - 0.1887).abs() < 1e-4);
        let d = strategy_analytics(AttackKind::Breidbart, ChannelKind::Double, ErrorModel::Physical);
        assert!((d.p2 - 0.75).abs() < 1e-15);
        assert!((d.q_ab - 0.375).abs() < 1e-15);
        assert!((d.i_ae - 0.1887).abs() < 1e-4);
        assert!((d.i_ab - 0.0456).abs() < 1e-4);
    }

    #[test]
    fn ratios() {
        let b = |c| strategy_analytics(AttackKind::Breidbart, c, ErrorModel::Physical);
        let r = equal_info_error_ratio(&b(ChannelKind::Single), &b(ChannelKind::Double)).unwrap();
        assert!((r / (19.0 / 6.0) - 1.0).abs() < 0.02, "{r}");
        let single = strategy_analytics(AttackKind::FixedBasis, ChannelKind::Single, ErrorModel::Physical);
        let double = strategy_analytics(AttackKind::FixedBasis, ChannelKind::Double, ErrorModel::Cascade);
        let r = equal_info_error_ratio(&single, &double).unwrap();
        assert!((r / 7.7 - 1.0).abs() < 0.02, "{r}");
        assert_eq!(equal_info_error_ratio(&single, &single).unwrap(), 1.0);
        let mut zero = double;
        zero.i_ae = 0.0;
        assert_eq!(equal_info_error_ratio(&single, &zero), Err(Error::ZeroInformation));
    }

    #[test]
    fn unsupported_strategies() {
        let rot = Strategy::RandomRotation { dim: 4 };
        assert!(matches!(
            analytics_for(&rot, ChannelKind::Double, ErrorModel::Physical),
            Err(Error::UnsupportedStrategy(_))
        ));
        assert!(analytics_for(&Strategy::None, ChannelKind::Single, ErrorModel::Cascade).is_err());
    }

    #[test]
    fn bound() {
        let k = BoundCoefficients::default();
        let p = |eta, alpha| ErrorCorrectionParams { eta, alpha };
        assert_eq!(huttner_ekert_bound(&p(1.0, 1.0), ChannelKind::Single, &k).unwrap(), 0.299);
        assert_eq!(huttner_ekert_bound(&p(1.0, 1.0), ChannelKind::Double, &k).unwrap(), 0.118);
        assert_eq!(huttner_ekert_bound(&p(0.0, 0.4), ChannelKind::Double, &k).unwrap(), 0.0);
        assert!(huttner_ekert_bound(&p(0.5, 0.0), ChannelKind::Single, &k).is_err());
    }
}
