//! Intercept-resend attacks on Bob's photon.
//!
//! Eve never touches Alice's photon. When she intercepts, she measures
//! Bob's photon (one or both degrees of freedom, or the whole photon
//! jointly) and forwards the eigenstate she found.

use alloc::format;
use alloc::string::String;

use arrayvec::ArrayVec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::protocol::Channel;
use crate::quantum::{haar_rotation, rotate_basis, MeasurementBasis, RotationMatrix, StateVector, Subsystem};
use crate::rng::session_rng;
use crate::source::{analyzer_basis, photon_layout, pol_layout, timebin_layout, Dof, Side, BOB_PHOTON};

/// Per-DOF outcomes or basis indices; index 0 is the first active DOF.
pub type DofBits = ArrayVec<u8, 2>;

/// How a fixed-basis eavesdropper picks between the two legitimate bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FixedChoice {
    /// One draw per DOF for the whole session.
    PerSession,
    /// A fresh draw per DOF for every intercepted pair.
    PerPair,
    /// Explicit basis indices for polarisation and phase.
    Selected { pol: u8, phase: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case", tag = "kind"))]
pub enum Strategy {
    None,
    /// Measure each DOF in one of the two legitimate bases.
    FixedBasis {
        choice: FixedChoice,
    },
    /// Measure each DOF in the basis midway between the legitimate pair.
    Breidbart,
    /// Measure in a Haar-random rotation of the computational basis: SO(2)
    /// on the single DOF of a single channel, SO(4) on the whole photon of
    /// the double channel.
    RandomRotation {
        dim: usize,
    },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::FixedBasis { .. } => "fixed-basis",
            Strategy::Breidbart => "breidbart",
            Strategy::RandomRotation { .. } => "random-rotation",
        }
    }

    /// Random rotation sized for `channel`.
    pub fn random_rotation_for(channel: Channel) -> Strategy {
        let dim = if channel == Channel::Double { 4 } else { 2 };
        Strategy::RandomRotation { dim }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EavesdropConfig {
    pub strategy: Strategy,
    /// Probability of intercepting any given pair.
    pub eta: f64,
}

impl EavesdropConfig {
    pub fn new(strategy: Strategy, eta: f64) -> Self {
        EavesdropConfig { strategy, eta }
    }

    pub fn validate(&self, channel: Channel) -> Result<()> {
        if !(self.eta.is_finite() && (0.0..=1.0).contains(&self.eta)) {
            return Err(Error::ProbabilityOutOfRange(self.eta));
        }
        match self.strategy {
            Strategy::RandomRotation { dim } => {
                let expected = if channel == Channel::Double { 4 } else { 2 };
                if dim != expected {
                    return Err(Error::InvalidConfig(format!(
                        "rotation dimension {dim} does not match channel {} (needs {expected})",
                        channel.name()
                    )));
                }
            }
            Strategy::FixedBasis { choice: FixedChoice::Selected { pol, phase } } if pol > 1 || phase > 1 => {
                return Err(Error::InvalidConfig(String::from("fixed basis index must be 0 or 1")));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Which basis Eve used on an intercepted pair.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum EveBasis {
    /// Legitimate basis index per active DOF.
    Legitimate(DofBits),
    Breidbart,
    Rotation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EveRecord {
    pub pair_index: u64,
    pub basis: EveBasis,
    /// Bits per active DOF, or a single rotated-basis outcome index.
    pub outcomes: DofBits,
}

/// A session's eavesdropper with all of her bases built up front.
#[derive(Debug, Clone)]
pub struct Interceptor {
    config: EavesdropConfig,
    dofs: &'static [Dof],
    /// Bob-side legitimate bases, `[dof][choice]`.
    legit: [[MeasurementBasis; 2]; 2],
    breidbart: [MeasurementBasis; 2],
    session_choice: [u8; 2],
    factor: [Subsystem; 2],
    photon: Subsystem,
    dof_computational: [MeasurementBasis; 2],
    photon_computational: MeasurementBasis,
}

impl Interceptor {
    /// `reference_angles` are the two legitimate analyser angles on Bob's
    /// side; the Breidbart basis sits midway between them.
    pub fn new(
        config: EavesdropConfig,
        channel: Channel,
        reference_angles: [f64; 2],
        pump_phase: f64,
        seed: u64,
    ) -> Result<Self> {
        config.validate(channel)?;
        let bob = |dof, angle| analyzer_basis(dof, Side::Bob, angle, pump_phase);
        let mid = 0.5 * (reference_angles[0] + reference_angles[1]);
        let legit = Dof::ALL.map(|d| reference_angles.map(|a| bob(d, a)));
        let breidbart = Dof::ALL.map(|d| bob(d, mid));

        let session_choice = match config.strategy {
            Strategy::FixedBasis { choice: FixedChoice::PerSession } => {
                let mut rng = session_rng(seed);
                [rng.random_range(0..2u8), rng.random_range(0..2u8)]
            }
            Strategy::FixedBasis { choice: FixedChoice::Selected { pol, phase } } => [pol, phase],
            _ => [0, 0],
        };

        let dims = [2usize, 2, 2, 2];
        Ok(Interceptor {
            config,
            dofs: channel.dofs(),
            legit,
            breidbart,
            session_choice,
            factor: Dof::ALL.map(|d| Subsystem::new(&dims, &[d.bob_factor()]).expect("static")),
            photon: Subsystem::new(&dims, &BOB_PHOTON).expect("static"),
            dof_computational: [
                MeasurementBasis::computational(&pol_layout(), "H/V"),
                MeasurementBasis::computational(&timebin_layout(), "s/l"),
            ],
            photon_computational: MeasurementBasis::computational(&photon_layout(), "sH/sV/lH/lV"),
        })
    }

    pub fn config(&self) -> &EavesdropConfig {
        &self.config
    }

    /// Basis indices drawn for the whole session (fixed-basis attack only).
    pub fn session_choice(&self) -> Option<[u8; 2]> {
        match self.config.strategy {
            Strategy::FixedBasis { choice: FixedChoice::PerSession | FixedChoice::Selected { .. } } => {
                Some(self.session_choice)
            }
            _ => None,
        }
    }

    fn measure_dofs<'a, R, F>(
        &'a self,
        mut state: StateVector,
        basis_for: F,
        rng: &mut R,
    ) -> Result<(StateVector, DofBits)>
    where
        R: Rng + ?Sized,
        F: Fn(Dof) -> &'a MeasurementBasis,
    {
        let mut bits = DofBits::new();
        for &dof in self.dofs {
            let (k, post) = self.factor[dof_index(dof)].measure(&state, basis_for(dof), rng.random())?;
            bits.push(k as u8);
            state = post;
        }
        Ok((state, bits))
    }

    /// Measures each active DOF of Bob's photon in legitimate basis
    /// `choice[dof]` and resends the collapsed eigenstate.
    pub fn intercept_fixed<R: Rng + ?Sized>(
        &self,
        state: StateVector,
        choice: [u8; 2],
        rng: &mut R,
    ) -> Result<(StateVector, DofBits)> {
        self.measure_dofs(state, |d| &self.legit[dof_index(d)][choice[dof_index(d)] as usize], rng)
    }

    pub fn intercept_breidbart<R: Rng + ?Sized>(
        &self,
        state: StateVector,
        rng: &mut R,
    ) -> Result<(StateVector, DofBits)> {
        self.measure_dofs(state, |d| &self.breidbart[dof_index(d)], rng)
    }

    /// Measures Bob's photon in the computational basis rotated by
    /// `rotation` and resends the basis vector found.
    pub fn intercept_rotated(
        &self,
        state: &StateVector,
        rotation: &RotationMatrix,
        u: f64,
    ) -> Result<(StateVector, usize)> {
        match rotation.n() {
            4 => {
                let basis = rotate_basis(&self.photon_computational, rotation)?;
                self.photon.measure(state, &basis, u).map(|(k, s)| (s, k))
            }
            2 => {
                let dof = self.dofs[0];
                let basis = rotate_basis(&self.dof_computational[dof_index(dof)], rotation)?;
                self.factor[dof_index(dof)].measure(state, &basis, u).map(|(k, s)| (s, k))
            }
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// Draws a fresh Haar rotation of dimension `dim` and intercepts with it.
    pub fn intercept_random_rotation<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        dim: usize,
        rng: &mut R,
    ) -> Result<(StateVector, usize)> {
        let rotation = haar_rotation(dim, rng)?;
        self.intercept_rotated(state, &rotation, rng.random())
    }

    /// With probability η applies the configured attack to Bob's photon;
    /// otherwise passes the state through untouched.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        pair_index: u64,
        state: StateVector,
        rng: &mut R,
    ) -> Result<(StateVector, Option<EveRecord>)> {
        let u: f64 = rng.random();
        if matches!(self.config.strategy, Strategy::None) || u >= self.config.eta {
            return Ok((state, None));
        }
        let (state, basis, outcomes) = match self.config.strategy {
            Strategy::None => unreachable!(),
            Strategy::FixedBasis { choice } => {
                let choice = match choice {
                    FixedChoice::PerPair => [rng.random_range(0..2u8), rng.random_range(0..2u8)],
                    _ => self.session_choice,
                };
                let (s, bits) = self.intercept_fixed(state, choice, rng)?;
                let used = self.dofs.iter().map(|&d| choice[dof_index(d)]).collect();
                (s, EveBasis::Legitimate(used), bits)
            }
            Strategy::Breidbart => {
                let (s, bits) = self.intercept_breidbart(state, rng)?;
                (s, EveBasis::Breidbart, bits)
            }
            Strategy::RandomRotation { dim } => {
                let (s, k) = self.intercept_random_rotation(&state, dim, rng)?;
                let mut bits = DofBits::new();
                bits.push(k as u8);
                (s, EveBasis::Rotation, bits)
            }
        };
        Ok((state, Some(EveRecord { pair_index, basis, outcomes })))
    }

    /// Eve's best guess of Bob's bit on `dof` once the legitimate basis
    /// `choice` is announced: the outcome her resent photon most likely
    /// produces. Used for the rotation attack, whose raw outcomes are not bits.
    pub fn guess_bit(&self, resent: &StateVector, dof: Dof, choice: u8) -> Result<u8> {
        let p = self.factor[dof_index(dof)].distribution(resent, &self.legit[dof_index(dof)][choice as usize])?;
        Ok(if p[1] > p[0] { 1 } else { 0 })
    }
}

pub(crate) fn dof_index(dof: Dof) -> usize {
    match dof {
        Dof::Polarization => 0,
        Dof::Phase => 1,
    }
}
