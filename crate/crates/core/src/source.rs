//! The doubly entangled photon-pair source and the analysers that read it.
//!
//! Each photon is a 4-dimensional system: a time-bin qubit (`s`, `l`: pair
//! created by a pump photon that took the short or long arm of the pump
//! interferometer) times a polarisation qubit (`H`, `V`). Per-photon basis
//! order is `sH, sV, lH, lV`; in the 16-dimensional pair space photon A
//! (Alice's) is the slower index, so the tensor factors are
//! `[A time-bin, A polarisation, B time-bin, B polarisation]`.
//!
//! Time-bin analysis is modelled on the post-selected central detection
//! slot only: each photon's unbalanced interferometer with long-arm phase θ
//! becomes a projective measurement in [`phase_basis`]`(θ)`. The discarded
//! side slots appear only as the constant [`CENTRAL_SLOT_FRACTION`].

use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::quantum::{
    inner, ComplexAmp, Layout, MeasurementBasis, StateVector, Subsystem, CONSTRUCTION_TOLERANCE, NORM_TOLERANCE,
};

/// Tensor factor positions inside the biphoton layout.
pub const ALICE_TIMEBIN: usize = 0;
pub const ALICE_POL: usize = 1;
pub const BOB_TIMEBIN: usize = 2;
pub const BOB_POL: usize = 3;
pub const ALICE_PHOTON: [usize; 2] = [ALICE_TIMEBIN, ALICE_POL];
pub const BOB_PHOTON: [usize; 2] = [BOB_TIMEBIN, BOB_POL];

/// Fraction of detections landing in the central time slot, per
/// interferometer.
pub const CENTRAL_SLOT_FRACTION: f64 = 0.5;

/// Degree of freedom carrying a key bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Dof {
    #[cfg_attr(feature = "serde", serde(rename = "pol"))]
    Polarization,
    #[cfg_attr(feature = "serde", serde(rename = "phase"))]
    Phase,
}

impl Dof {
    pub const ALL: [Dof; 2] = [Dof::Polarization, Dof::Phase];

    pub fn name(self) -> &'static str {
        match self {
            Dof::Polarization => "pol",
            Dof::Phase => "phase",
        }
    }

    pub fn alice_factor(self) -> usize {
        match self {
            Dof::Polarization => ALICE_POL,
            Dof::Phase => ALICE_TIMEBIN,
        }
    }

    pub fn bob_factor(self) -> usize {
        match self {
            Dof::Polarization => BOB_POL,
            Dof::Phase => BOB_TIMEBIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

/// Source parameters. The weights are real amplitudes of the `H` and `s`
/// branches; `1/√2` for both gives the maximally doubly entangled state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SourceParams {
    pub pump_phase: f64,
    pub pol_weight_h: f64,
    pub timebin_weight_s: f64,
}

impl Default for SourceParams {
    fn default() -> Self {
        SourceParams { pump_phase: 0.0, pol_weight_h: FRAC_1_SQRT_2, timebin_weight_s: FRAC_1_SQRT_2 }
    }
}

impl SourceParams {
    pub fn with_pump_phase(pump_phase: f64) -> Self {
        SourceParams { pump_phase, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pump_phase.is_finite() && self.pol_weight_h.is_finite() && self.timebin_weight_s.is_finite()) {
            return Err(Error::NonFinite("source parameters"));
        }
        for w in [self.pol_weight_h, self.timebin_weight_s] {
            if w * w > 1.0 {
                return Err(Error::InvalidConfig(format!("amplitude weight {w} exceeds 1")));
            }
        }
        Ok(())
    }

    pub fn is_maximal(&self) -> bool {
        (self.pol_weight_h - FRAC_1_SQRT_2).abs() < CONSTRUCTION_TOLERANCE
            && (self.timebin_weight_s - FRAC_1_SQRT_2).abs() < CONSTRUCTION_TOLERANCE
    }
}

/// Phases of the pump interferometer and of Alice's and Bob's analysers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerSettings {
    pub pump_phase: f64,
    pub alice_phase: f64,
    pub bob_phase: f64,
}

/// One party's local analyser: polariser angle and long-arm phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSetting {
    pub pol_angle: f64,
    pub phase: f64,
}

impl AnalyzerSetting {
    pub fn bases(&self) -> Result<(MeasurementBasis, MeasurementBasis)> {
        if !(self.pol_angle.is_finite() && self.phase.is_finite()) {
            return Err(Error::NonFinite("analyzer setting"));
        }
        Ok((pol_basis(self.pol_angle), phase_basis(self.phase)))
    }
}

pub fn pol_layout() -> Arc<Layout> {
    Layout::flat(&["H", "V"]).expect("static layout")
}

pub fn timebin_layout() -> Arc<Layout> {
    Layout::flat(&["s", "l"]).expect("static layout")
}

/// Single-photon layout: factors `[time-bin, polarisation]`.
pub fn photon_layout() -> Arc<Layout> {
    Layout::new(vec![2, 2], ["sH", "sV", "lH", "lV"].iter().map(|s| s.to_string()).collect()).expect("static layout")
}

pub fn biphoton_layout() -> Arc<Layout> {
    let photon = photon_layout();
    photon.tensor(&photon)
}

/// Pump photon after the pump interferometer: `(|s⟩ + e^{iφ}|l⟩)/√2`.
pub fn pump_superposition(phi: f64) -> StateVector {
    StateVector::new(
        timebin_layout(),
        vec![ComplexAmp::new(FRAC_1_SQRT_2, 0.0), ComplexAmp::from_polar(FRAC_1_SQRT_2, phi)],
    )
    .expect("unit norm by construction")
}

/// The biphoton state
/// `(c_s|s s⟩ + c_l e^{iφ}|l l⟩) ⊗ (c_H|H H⟩ + c_V|V V⟩)`, written in the
/// per-photon ordering; with default weights every nonzero amplitude has
/// magnitude 1/2.
pub fn biphoton_state(params: &SourceParams) -> Result<StateVector> {
    params.validate()?;
    let c_h = params.pol_weight_h;
    let c_v = libm::sqrt(1.0 - c_h * c_h);
    let c_s = params.timebin_weight_s;
    let c_l = libm::sqrt(1.0 - c_s * c_s);
    let time = [ComplexAmp::new(c_s, 0.0), ComplexAmp::from_polar(c_l, params.pump_phase)];
    let pol = [c_h, c_v];

    let mut amps = vec![ComplexAmp::new(0.0, 0.0); 16];
    for (t, &ta) in time.iter().enumerate() {
        for (p, &pa) in pol.iter().enumerate() {
            let photon = t * 2 + p;
            amps[photon * 4 + photon] = ta * pa;
        }
    }
    let state = StateVector::new(biphoton_layout(), amps)?;
    debug_assert!((state.norm_sqr() - 1.0).abs() < CONSTRUCTION_TOLERANCE);
    Ok(state)
}

/// Linear polarisation analyser at `angle`:
/// `{cos θ|H⟩ + sin θ|V⟩, −sin θ|H⟩ + cos θ|V⟩}`.
pub fn pol_basis(angle: f64) -> MeasurementBasis {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    let layout = pol_layout();
    let vectors = vec![
        StateVector::from_real(layout.clone(), &[c, s]).expect("unit norm"),
        StateVector::from_real(layout, &[-s, c]).expect("unit norm"),
    ];
    MeasurementBasis::new(format!("pol({:.4}°)", angle.to_degrees()), vectors).expect("orthonormal")
}

/// Time-bin analyser with long-arm phase θ:
/// `{(|s⟩ + e^{iθ}|l⟩)/√2, (|s⟩ − e^{iθ}|l⟩)/√2}`.
pub fn phase_basis(theta: f64) -> MeasurementBasis {
    let layout = timebin_layout();
    let s = ComplexAmp::new(FRAC_1_SQRT_2, 0.0);
    let l = ComplexAmp::from_polar(FRAC_1_SQRT_2, theta);
    let vectors = vec![
        StateVector::new(layout.clone(), vec![s, l]).expect("unit norm"),
        StateVector::new(layout, vec![s, -l]).expect("unit norm"),
    ];
    MeasurementBasis::new(format!("phase({theta:.4})"), vectors).expect("orthonormal")
}

/// The basis a party uses for `dof` at analyser angle `angle`.
///
/// Angles are in polarisation units for both degrees of freedom, so that
/// the same settings mean the same Bloch-sphere geometry. Polarisation uses
/// [`pol_basis`]`(angle)` on both sides. Time-bin analysers sit on the
/// equator at twice the angle: Alice uses phase `2·angle`, Bob uses
/// `φ − 2·angle`, which locks his interferometer to the pump so equal
/// settings give equal outcomes.
pub fn analyzer_basis(dof: Dof, side: Side, angle: f64, pump_phase: f64) -> MeasurementBasis {
    match (dof, side) {
        (Dof::Polarization, _) => pol_basis(angle),
        (Dof::Phase, Side::Alice) => phase_basis(2.0 * angle),
        (Dof::Phase, Side::Bob) => phase_basis(pump_phase - 2.0 * angle),
    }
}

/// Outcome of re-expressing the biphoton state in the diagonal
/// polarisation basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceCheck {
    pub invariant: bool,
    pub residual: f64,
}

/// Rewrites the state in the `|±⟩` polarisation basis on both photons and
/// compares against the same form as in the `H/V` basis: amplitude 1/2 on
/// `s+ s+` and `s− s−`, `e^{iφ}/2` on `l+ l+` and `l− l−`, zero elsewhere.
pub fn basis_invariance_check(params: &SourceParams) -> Result<InvarianceCheck> {
    let state = biphoton_state(params)?;
    let time = MeasurementBasis::computational(&timebin_layout(), "s/l");
    let photon = time.tensor(&pol_basis(FRAC_PI_4));
    let pair = photon.tensor(&photon);

    let mut residual = 0.0f64;
    for (k, v) in pair.vectors().iter().enumerate() {
        let v = v.clone().relabel(state.layout().clone())?;
        let amp = inner(&v, &state)?;
        let (a, b) = (k / 4, k % 4);
        let expected = if a != b {
            ComplexAmp::new(0.0, 0.0)
        } else if a / 2 == 0 {
            ComplexAmp::new(0.5, 0.0)
        } else {
            ComplexAmp::from_polar(0.5, params.pump_phase)
        };
        residual = residual.max((amp - expected).norm());
    }
    Ok(InvarianceCheck { invariant: residual < NORM_TOLERANCE, residual })
}

/// Probabilities that Alice's and Bob's time-bin outcomes agree or differ,
/// by projecting the maximally entangled state onto
/// `phase_basis(τ_A) ⊗ phase_basis(ψ_B)`.
pub fn franson_coincidence(settings: &InterferometerSettings) -> Result<(f64, f64)> {
    if !(settings.pump_phase.is_finite() && settings.alice_phase.is_finite() && settings.bob_phase.is_finite()) {
        return Err(Error::NonFinite("interferometer phases"));
    }
    let state = biphoton_state(&SourceParams::with_pump_phase(settings.pump_phase))?;
    let sub = Subsystem::new(state.layout().dims(), &[ALICE_TIMEBIN, BOB_TIMEBIN])?;
    let basis = phase_basis(settings.alice_phase).tensor(&phase_basis(settings.bob_phase));
    let p: Vec<f64> = sub.distribution(&state, &basis)?;
    Ok((p[0] + p[3], p[1] + p[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::born_distribution;
    use core::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn pump_examples() {
        let p = pump_superposition(0.0);
        assert!((p.amplitudes()[1] - ComplexAmp::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let p = pump_superposition(PI);
        assert!((p.amplitudes()[1] - ComplexAmp::new(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        for phi in [-3.0, 0.1, 2.0, 100.0] {
            assert!((pump_superposition(phi).norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn biphoton_default_amplitudes() {
        let s = biphoton_state(&SourceParams::default()).unwrap();
        for label in ["sH⊗sH", "sV⊗sV", "lV⊗lV", "lH⊗lH"] {
            assert!((s.amplitude(label).unwrap() - ComplexAmp::new(0.5, 0.0)).norm() < 1e-15);
        }
        let nonzero = s.amplitudes().iter().filter(|a| a.norm() > 0.0).count();
        assert_eq!(nonzero, 4);
        let s = biphoton_state(&SourceParams::with_pump_phase(FRAC_PI_2)).unwrap();
        assert!((s.amplitude("lH⊗lH").unwrap() - ComplexAmp::new(0.0, 0.5)).norm() < 1e-15);
        assert!((s.amplitude("lV⊗lV").unwrap() - ComplexAmp::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn product_limit_weights() {
        let params = SourceParams { pump_phase: 0.7, pol_weight_h: 1.0, timebin_weight_s: FRAC_1_SQRT_2 };
        let s = biphoton_state(&params).unwrap();
        assert!((s.amplitude("sH⊗sH").unwrap().norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude("lH⊗lH").unwrap() - ComplexAmp::from_polar(FRAC_1_SQRT_2, 0.7)).norm() < 1e-15);
        assert_eq!(s.amplitude("sV⊗sV").unwrap().norm(), 0.0);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let bad = SourceParams { pol_weight_h: 1.2, ..Default::default() };
        assert!(biphoton_state(&bad).is_err());
    }

    #[test]
    fn computational_distribution_of_source() {
        let s = biphoton_state(&SourceParams::default()).unwrap();
        let basis = MeasurementBasis::computational(s.layout(), "z");
        let p = born_distribution(&s, &basis).unwrap();
        for (label, prob) in s.labels().iter().zip(&p) {
            let expect =
                if ["sH⊗sH", "sV⊗sV", "lV⊗lV", "lH⊗lH"].contains(&label.as_str()) { 0.25 } else { 0.0 };
            assert!((prob - expect).abs() < 1e-15, "{label}");
        }
    }

    #[test]
    fn basis_examples() {
        let b = pol_basis(0.0);
        assert_eq!(b.vector(0).amplitudes()[0], ComplexAmp::new(1.0, 0.0));
        let d = pol_basis(FRAC_PI_4);
        assert!((d.vector(0).amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let p = phase_basis(FRAC_PI_2);
        assert!((p.vector(0).amplitudes()[1] - ComplexAmp::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((p.vector(1).amplitudes()[1] - ComplexAmp::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
        for theta in [0.0, 0.3, 1.0, FRAC_PI_2, 5.0] {
            assert!(crate::quantum::orthonormality_deviation(phase_basis(theta).vectors()) < 1e-12);
        }
    }

    #[test]
    fn invariance_examples() {
        for phi in [0.0, 1.3] {
            let r = basis_invariance_check(&SourceParams::with_pump_phase(phi)).unwrap();
            assert!(r.invariant && r.residual < 1e-9);
        }
        let r = basis_invariance_check(&SourceParams { pol_weight_h: 0.9, ..Default::default() }).unwrap();
        assert!(!r.invariant);
        assert!(r.residual > 1e-3);
    }

    #[test]
    fn franson_examples() {
        let at = |delta: f64| {
            franson_coincidence(&InterferometerSettings { pump_phase: delta, alice_phase: 0.0, bob_phase: 0.0 })
                .unwrap()
        };
        let (same, diff) = at(0.0);
        assert!((same - 1.0).abs() < 1e-12 && diff.abs() < 1e-12);
        let (same, diff) = at(PI);
        assert!(same.abs() < 1e-12 && (diff - 1.0).abs() < 1e-12);
        let (same, diff) = at(FRAC_PI_2);
        assert!((same - 0.5).abs() < 1e-12 && (diff - 0.5).abs() < 1e-12);
    }

    #[test]
    fn analyzer_bases_align_bob_with_pump() {
        let phi = 0.9;
        let state = biphoton_state(&SourceParams::with_pump_phase(phi)).unwrap();
        let sub = Subsystem::new(state.layout().dims(), &[ALICE_TIMEBIN, BOB_TIMEBIN]).unwrap();
        for angle in [0.0, FRAC_PI_4, 0.3] {
            let basis = analyzer_basis(Dof::Phase, Side::Alice, angle, phi).tensor(&analyzer_basis(
                Dof::Phase,
                Side::Bob,
                angle,
                phi,
            ));
            let p = sub.distribution(&state, &basis).unwrap();
            assert!((p[0] + p[3] - 1.0).abs() < 1e-12);
        }
    }
}
