//! The three-setting Wigner inequality
//! `W = p(χ,ψ) + p(ψ,ω) − p(χ,ω) ≥ 0` on the simulated source.
//!
//! `p(a, b)` is the probability that Alice's analyser at `a` gives outcome 0
//! while Bob's at `b` gives outcome 1. With this convention the maximally
//! entangled source reaches `W = −1/8` at `(0°, 30°, 60°)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::protocol::DofWignerCounts;
use crate::quantum::Subsystem;
use crate::source::{analyzer_basis, biphoton_state, Dof, Side, SourceParams};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WignerSettings {
    pub chi: f64,
    pub psi: f64,
    pub omega: f64,
}

impl WignerSettings {
    pub fn new(chi: f64, psi: f64, omega: f64) -> Self {
        WignerSettings { chi, psi, omega }
    }

    pub fn from_degrees(chi: f64, psi: f64, omega: f64) -> Self {
        let r = |d: f64| d * core::f64::consts::PI / 180.0;
        WignerSettings::new(r(chi), r(psi), r(omega))
    }

    /// `(0°, 30°, 60°)`, the maximally violating triple.
    pub fn standard() -> Self {
        WignerSettings::from_degrees(0.0, 30.0, 60.0)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.chi, self.psi, self.omega].iter().all(|a| a.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("Wigner angles"))
        }
    }

    /// The setting pairs `(χ,ψ)`, `(ψ,ω)`, `(χ,ω)` in inequality order.
    pub fn pairs(&self) -> [(f64, f64); 3] {
        [(self.chi, self.psi), (self.psi, self.omega), (self.chi, self.omega)]
    }
}

/// Coincidence probability on `dof` for the maximally entangled source at
/// pump phase `pump_phase`. With `eve = Some(angle)` the ensemble is the one
/// left after Eve measured Bob's photon at that analyser angle and resent it.
pub fn dof_coincidence_probability(dof: Dof, params: &SourceParams, a: f64, b: f64, eve: Option<f64>) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && eve.is_none_or(f64::is_finite)) {
        return Err(Error::NonFinite("analyser angle"));
    }
    let state = biphoton_state(params)?;
    let dims = state.layout().dims().to_vec();
    let phi = params.pump_phase;
    let pair = Subsystem::new(&dims, &[dof.alice_factor(), dof.bob_factor()])?;
    let basis = analyzer_basis(dof, Side::Alice, a, phi).tensor(&analyzer_basis(dof, Side::Bob, b, phi));
    // Outcome (Alice 0, Bob 1).
    const TARGET: usize = 1;
    match eve {
        None => Ok(pair.distribution(&state, &basis)?[TARGET]),
        Some(e) => {
            let bob = Subsystem::new(&dims, &[dof.bob_factor()])?;
            let eve_basis = analyzer_basis(dof, Side::Bob, e, phi);
            let mut total = 0.0;
            for (k, &pk) in bob.distribution(&state, &eve_basis)?.iter().enumerate() {
                if pk < crate::quantum::PROBABILITY_FLOOR {
                    continue;
                }
                let (_, resent) = bob.project_outcome(&state, &eve_basis, k)?;
                total += pk * pair.distribution(&resent, &basis)?[TARGET];
            }
            Ok(total)
        }
    }
}

/// Polarisation coincidence probability on the default source.
pub fn coincidence_probability(a: f64, b: f64, eve: Option<f64>) -> Result<f64> {
    dof_coincidence_probability(Dof::Polarization, &SourceParams::default(), a, b, eve)
}

/// `p(χ,ψ) + p(ψ,ω) − p(χ,ω)` for an arbitrary coincidence function.
pub fn wigner_value<F>(settings: &WignerSettings, mut p: F) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    Ok(wigner_from_terms(wigner_terms(settings, &mut p)?))
}

fn wigner_terms<F>(settings: &WignerSettings, p: &mut F) -> Result<[f64; 3]>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    settings.validate()?;
    let [x, y, z] = settings.pairs();
    Ok([p(x.0, x.1)?, p(y.0, y.1)?, p(z.0, z.1)?])
}

fn wigner_from_terms(t: [f64; 3]) -> f64 {
    t[0] + t[1] - t[2]
}

/// W on `dof` of the default source, optionally after full interception at
/// `eve`.
pub fn dof_wigner(dof: Dof, settings: &WignerSettings, eve: Option<f64>) -> Result<f64> {
    let params = SourceParams::default();
    wigner_value(settings, |a, b| dof_coincidence_probability(dof, &params, a, b, eve))
}

/// `W(η) = (1 − η)·W_quantum + η·W_intercepted` (polarisation DOF).
pub fn intercepted_wigner(settings: &WignerSettings, eta: f64, eve_angle: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::ProbabilityOutOfRange(eta));
    }
    let wq = dof_wigner(Dof::Polarization, settings, None)?;
    let wi = dof_wigner(Dof::Polarization, settings, Some(eve_angle))?;
    Ok((1.0 - eta) * wq + eta * wi)
}

/// `dW/dη` when Eve measures Bob's `dof` at `eve_angle`.
pub fn shift_slope(dof: Dof, settings: &WignerSettings, eve_angle: f64) -> Result<f64> {
    Ok(dof_wigner(dof, settings, Some(eve_angle))? - dof_wigner(dof, settings, None)?)
}

/// Largest η whose W shift stays within `rel_uncertainty·|W_quantum|/√n`
/// for `n_tests` independent Wigner tests.
pub fn max_undetected_fraction_for(
    settings: &WignerSettings,
    eve_angle: f64,
    rel_uncertainty: f64,
    n_tests: u32,
) -> Result<f64> {
    if !(rel_uncertainty.is_finite() && rel_uncertainty > 0.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "relative uncertainty must be positive, got {rel_uncertainty}"
        )));
    }
    if n_tests == 0 {
        return Err(Error::InvalidConfig(alloc::string::String::from("need at least one Wigner test")));
    }
    let wq = dof_wigner(Dof::Polarization, settings, None)?;
    let slope = shift_slope(Dof::Polarization, settings, eve_angle)?;
    if slope.abs() < 1e-12 {
        return Err(Error::ZeroSlope);
    }
    Ok(rel_uncertainty * wq.abs() / (slope.abs() * libm::sqrt(n_tests as f64)))
}

/// Threshold for the standard settings with Eve at the key basis (0°).
pub fn max_undetected_fraction(rel_uncertainty: f64, n_tests: u32) -> Result<f64> {
    max_undetected_fraction_for(&WignerSettings::standard(), 0.0, rel_uncertainty, n_tests)
}

/// Whether a W shift exceeds the detection threshold.
pub fn is_detected(shift: f64, w_quantum: f64, rel_uncertainty: f64, n_tests: u32) -> bool {
    shift.abs() > rel_uncertainty * w_quantum.abs() / libm::sqrt(n_tests.max(1) as f64)
}

/// Ŵ and its binomial standard error from one DOF's counts.
pub fn estimate_wigner(counts: &DofWignerCounts) -> Result<(f64, f64)> {
    const NAMES: [&str; 3] = ["(chi, psi)", "(psi, omega)", "(chi, omega)"];
    let mut p = [0.0; 3];
    let mut var = 0.0;
    for (i, c) in counts.wigner_terms().iter().enumerate() {
        if c.trials == 0 {
            return Err(Error::ZeroTrials(NAMES[i]));
        }
        let n = c.trials as f64;
        p[i] = c.coincidences as f64 / n;
        var += p[i] * (1.0 - p[i]) / n;
    }
    Ok((wigner_from_terms(p), libm::sqrt(var)))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WignerReport {
    pub settings: WignerSettings,
    pub dof: Dof,
    /// `p(χ,ψ)`, `p(ψ,ω)`, `p(χ,ω)` of the mixed ensemble.
    pub p_pairs: [f64; 3],
    #[cfg_attr(feature = "serde", serde(rename = "W"))]
    pub w: f64,
    pub eta: f64,
    pub eve_angle: f64,
    pub rel_uncertainty: f64,
    pub n_tests: u32,
    pub slope: f64,
    pub max_undetected_eta: f64,
}

impl WignerReport {
    /// Analytic report for interception fraction `eta` at `eve_angle`.
    pub fn analytic(
        dof: Dof,
        settings: &WignerSettings,
        eta: f64,
        eve_angle: f64,
        rel_uncertainty: f64,
        n_tests: u32,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::ProbabilityOutOfRange(eta));
        }
        let params = SourceParams::default();
        let mut clean = |a, b| dof_coincidence_probability(dof, &params, a, b, None);
        let q = wigner_terms(settings, &mut clean)?;
        let mut hit = |a, b| dof_coincidence_probability(dof, &params, a, b, Some(eve_angle));
        let e = wigner_terms(settings, &mut hit)?;
        let p_pairs = core::array::from_fn(|i| (1.0 - eta) * q[i] + eta * e[i]);
        let slope = wigner_from_terms(e) - wigner_from_terms(q);
        if slope.abs() < 1e-12 {
            return Err(Error::ZeroSlope);
        }
        let max_undetected_eta =
            rel_uncertainty * wigner_from_terms(q).abs() / (slope.abs() * libm::sqrt(n_tests.max(1) as f64));
        Ok(WignerReport {
            settings: *settings,
            dof,
            p_pairs,
            w: wigner_from_terms(p_pairs),
            eta,
            eve_angle,
            rel_uncertainty,
            n_tests,
            slope,
            max_undetected_eta,
        })
    }
}

/// One row of an η sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub eta: f64,
    #[cfg_attr(feature = "serde", serde(rename = "W"))]
    pub w: f64,
    pub stderr: f64,
    pub detected: bool,
}

/// Analytic sweep (zero standard error) over `etas`.
pub fn analytic_sweep(
    settings: &WignerSettings,
    etas: &[f64],
    eve_angle: f64,
    rel_uncertainty: f64,
    n_tests: u32,
) -> Result<Vec<SweepRow>> {
    let wq = dof_wigner(Dof::Polarization, settings, None)?;
    etas.iter()
        .map(|&eta| {
            let w = intercepted_wigner(settings, eta, eve_angle)?;
            Ok(SweepRow { eta, w, stderr: 0.0, detected: is_detected(w - wq, wq, rel_uncertainty, n_tests) })
        })
        .collect()
}

/// A deterministic local assignment: outcomes for Alice and Bob at each of
/// `χ, ψ, ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalAssignment {
    pub alice: [u8; 3],
    pub bob: [u8; 3],
}

impl LocalAssignment {
    /// All 64 assignments.
    pub fn all() -> impl Iterator<Item = LocalAssignment> {
        (0u8..64).map(|m| LocalAssignment {
            alice: [m & 1, (m >> 1) & 1, (m >> 2) & 1],
            bob: [(m >> 3) & 1, (m >> 4) & 1, (m >> 5) & 1],
        })
    }

    fn p(&self, a: usize, b: usize) -> i32 {
        (self.alice[a] == 0 && self.bob[b] == 1) as i32
    }

    pub fn wigner(&self) -> i32 {
        const CHI: usize = 0;
        const PSI: usize = 1;
        const OMEGA: usize = 2;
        self.p(CHI, PSI) + self.p(PSI, OMEGA) - self.p(CHI, OMEGA)
    }

    /// Reproduces the source's perfect correlation: equal outcomes whenever
    /// both sides use the same setting.
    pub fn is_correlated(&self) -> bool {
        self.alice == self.bob
    }

    /// Equal outcomes at `ψ`, the one setting both parties share.
    pub fn is_correlated_at_psi(&self) -> bool {
        self.alice[1] == self.bob[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LhvCheck {
    pub total: u32,
    /// Assignments correlated at the shared setting ψ.
    pub correlated: u32,
    /// Minimum W over those.
    pub correlated_min_w: i32,
    /// Assignments with W < 0 among all 64.
    pub negative: u32,
    /// Whether every negative assignment breaks the ψ correlation.
    pub negatives_uncorrelated: bool,
}

impl LhvCheck {
    pub fn holds(&self) -> bool {
        self.total == 64 && self.correlated_min_w >= 0 && self.negatives_uncorrelated
    }
}

/// Exhaustive check over all 64 deterministic local assignments.
pub fn lhv_check() -> LhvCheck {
    let mut check =
        LhvCheck { total: 0, correlated: 0, correlated_min_w: i32::MAX, negative: 0, negatives_uncorrelated: true };
    for a in LocalAssignment::all() {
        let w = a.wigner();
        check.total += 1;
        if a.is_correlated_at_psi() {
            check.correlated += 1;
            check.correlated_min_w = check.correlated_min_w.min(w);
        }
        if w < 0 {
            check.negative += 1;
            check.negatives_uncorrelated &= !a.is_correlated_at_psi();
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::SettingCounts;

    const TOL: f64 = 1e-9;

    #[test]
    fn maximal_violation() {
        let s = WignerSettings::standard();
        for dof in Dof::ALL {
            assert!((dof_wigner(dof, &s, None).unwrap() + 0.125).abs() < TOL);
        }
        assert!((coincidence_probability(0.0, s.psi, None).unwrap() - 0.125).abs() < TOL);
    }

    #[test]
    fn interception_at_key_basis() {
        let s = WignerSettings::standard();
        for dof in Dof::ALL {
            assert!((dof_wigner(dof, &s, Some(0.0)).unwrap() - 0.0625).abs() < TOL);
            assert!((shift_slope(dof, &s, 0.0).unwrap() - 0.1875).abs() < TOL);
        }
        assert!((intercepted_wigner(&s, 1.0 / 15.0, 0.0).unwrap() + 0.1125).abs() < TOL);
        assert!((intercepted_wigner(&s, 0.0, 0.0).unwrap() + 0.125).abs() < TOL);
    }

    #[test]
    fn degenerate_settings_are_nonnegative() {
        for a in [0.0, 0.3, 1.1] {
            let s = WignerSettings::new(a, a, a);
            assert!(dof_wigner(Dof::Polarization, &s, None).unwrap() >= -TOL);
        }
    }

    #[test]
    fn thresholds() {
        assert!((max_undetected_fraction(0.10, 1).unwrap() - 0.0667).abs() < 1e-4);
        assert!((max_undetected_fraction(0.10, 2).unwrap() - 0.0471).abs() < 1e-4);
        assert!((max_undetected_fraction(0.20, 1).unwrap() - 0.1333).abs() < 1e-4);
        assert!(max_undetected_fraction(0.0, 1).is_err());
        assert!(max_undetected_fraction(0.1, 0).is_err());
    }

    #[test]
    fn zero_slope_is_an_error() {
        // Settings all equal: W is p(a,a) = 0 before and after interception.
        let s = WignerSettings::new(0.0, 0.0, 0.0);
        assert_eq!(max_undetected_fraction_for(&s, 0.0, 0.1, 1), Err(Error::ZeroSlope));
    }

    #[test]
    fn estimate_arithmetic() {
        let c = SettingCounts { coincidences: 30, trials: 100 };
        let mut counts =
            DofWignerCounts { dof: Dof::Polarization, counts: Default::default(), key_bits: 0, key_errors: 0 };
        counts.counts[0][0] = c;
        counts.counts[1][1] = c;
        counts.counts[0][1] = c;
        let (w, se) = estimate_wigner(&counts).unwrap();
        assert!((w - 0.3).abs() < 1e-15);
        assert!((se - (3.0 * 0.3 * 0.7 / 100.0f64).sqrt()).abs() < 1e-15);
        counts.counts[1][1].trials = 0;
        assert!(matches!(estimate_wigner(&counts), Err(Error::ZeroTrials(_))));
    }

    #[test]
    fn local_assignments() {
        let c = lhv_check();
        assert_eq!(c.total, 64);
        assert_eq!(c.correlated, 32);
        assert_eq!(c.correlated_min_w, 0);
        assert_eq!(c.negative, 4);
        assert!(c.holds());
        assert!(LocalAssignment::all().filter(|a| a.is_correlated()).all(|a| a.wigner() >= 0));
    }

    #[test]
    fn report_is_self_consistent() {
        let r = WignerReport::analytic(Dof::Phase, &WignerSettings::standard(), 0.3, 0.0, 0.1, 2).unwrap();
        assert_eq!(r.w, r.p_pairs[0] + r.p_pairs[1] - r.p_pairs[2]);
        assert!((r.max_undetected_eta - 0.0471).abs() < 1e-4);
    }
}
