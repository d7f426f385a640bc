//! Seeded key-distribution sessions over the simulated source.
//!
//! Each pair is simulated independently from its own random substream:
//! basis choices, then (optionally) Eve on Bob's photon, then Alice's and
//! Bob's measurements, then detection thinning. Nothing depends on the
//! order pairs are simulated in.
//!
//! Two protocols are supported. `bb84x2` gives each party the same two
//! analyser angles per DOF and keys on matching choices. `ekert-wigner`
//! gives Alice `{χ, ψ, key}` and Bob `{ψ, ω, key}`; rounds where both pick
//! the key setting build the key and the rest feed the Wigner test.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use core::f64::consts::FRAC_PI_4;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quantum::{MeasurementBasis, StateVector, Subsystem};
use crate::rng::pair_rng;
use crate::source::{analyzer_basis, biphoton_state, Dof, Side, SourceParams, CENTRAL_SLOT_FRACTION};
use crate::strategy::{dof_index, DofBits, EavesdropConfig, EveBasis, Interceptor};
use crate::wigner::WignerSettings;

/// Analyser angles of the two key bases per DOF (0° and 45° polarisation;
/// phases 0 and π/2 on the time-bin equator).
pub const BB84_ANGLES: [f64; 2] = [0.0, FRAC_PI_4];
/// Per-photon detection efficiency used by default for Wigner sessions.
pub const DEFAULT_DETECTION_EFFICIENCY: f64 = 0.05;
/// Index of the key setting in Ekert-Wigner angle lists.
pub const KEY_SETTING: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Protocol {
    #[cfg_attr(feature = "serde", serde(rename = "bb84x2"))]
    Bb84x2,
    #[cfg_attr(feature = "serde", serde(rename = "ekert-wigner"))]
    EkertWigner,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Bb84x2 => "bb84x2",
            Protocol::EkertWigner => "ekert-wigner",
        }
    }

    fn is_key(self, alice: u8, bob: u8) -> bool {
        match self {
            Protocol::Bb84x2 => alice == bob,
            Protocol::EkertWigner => alice == KEY_SETTING && bob == KEY_SETTING,
        }
    }
}

/// Which degrees of freedom are entangled and measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Channel {
    SinglePol,
    SinglePhase,
    Double,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::SinglePol => "single-pol",
            Channel::SinglePhase => "single-phase",
            Channel::Double => "double",
        }
    }

    pub fn dofs(self) -> &'static [Dof] {
        match self {
            Channel::SinglePol => &[Dof::Polarization],
            Channel::SinglePhase => &[Dof::Phase],
            Channel::Double => &Dof::ALL,
        }
    }

    /// Source for this channel. Single channels use the product limit in
    /// the unused DOF (all pairs created in the short time bin, or all
    /// horizontally polarised).
    pub fn source_params(self, pump_phase: f64) -> SourceParams {
        let base = SourceParams::with_pump_phase(pump_phase);
        match self {
            Channel::SinglePol => SourceParams { timebin_weight_s: 1.0, ..base },
            Channel::SinglePhase => SourceParams { pol_weight_h: 1.0, ..base },
            Channel::Double => base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SessionConfig {
    pub protocol: Protocol,
    pub n_pairs: u64,
    pub channel: Channel,
    pub eve: Option<EavesdropConfig>,
    pub seed: u64,
    /// Alice's analyser angles (polarisation units), shared by both DOFs.
    pub alice_angles: Vec<f64>,
    pub bob_angles: Vec<f64>,
    pub pump_phase: f64,
    /// Per-photon detection probability.
    pub detection_efficiency: f64,
}

impl SessionConfig {
    pub fn bb84x2(channel: Channel, n_pairs: u64, seed: u64) -> Self {
        SessionConfig {
            protocol: Protocol::Bb84x2,
            n_pairs,
            channel,
            eve: None,
            seed,
            alice_angles: BB84_ANGLES.to_vec(),
            bob_angles: BB84_ANGLES.to_vec(),
            pump_phase: 0.0,
            detection_efficiency: 1.0,
        }
    }

    /// Ekert-Wigner session with the key setting at analyser angle 0.
    pub fn ekert_wigner(channel: Channel, n_pairs: u64, seed: u64, settings: &WignerSettings) -> Self {
        let mut cfg = SessionConfig {
            protocol: Protocol::EkertWigner,
            detection_efficiency: DEFAULT_DETECTION_EFFICIENCY,
            ..Self::bb84x2(channel, n_pairs, seed)
        };
        cfg.set_wigner_settings(settings, 0.0);
        cfg
    }

    pub fn with_eve(mut self, eve: EavesdropConfig) -> Self {
        self.eve = Some(eve);
        self
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Self {
        self.detection_efficiency = efficiency;
        self
    }

    fn set_wigner_settings(&mut self, s: &WignerSettings, key: f64) {
        self.alice_angles = [s.chi, s.psi, key].to_vec();
        self.bob_angles = [s.psi, s.omega, key].to_vec();
    }

    /// The key analyser angle (Ekert-Wigner) or the first key basis.
    pub fn key_angle(&self) -> f64 {
        match self.protocol {
            Protocol::Bb84x2 => self.bob_angles.first().copied().unwrap_or(0.0),
            Protocol::EkertWigner => self.bob_angles.get(KEY_SETTING as usize).copied().unwrap_or(0.0),
        }
    }

    /// Bob-side angles Eve treats as the legitimate pair.
    fn eve_reference_angles(&self) -> [f64; 2] {
        match self.protocol {
            Protocol::Bb84x2 => [self.bob_angles[0], self.bob_angles[1]],
            Protocol::EkertWigner => {
                let key = self.key_angle();
                [key, key + FRAC_PI_4]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_pairs == 0 {
            return invalid(String::from("n_pairs must be at least 1"));
        }
        if !self.pump_phase.is_finite() {
            return Err(Error::NonFinite("pump phase"));
        }
        if self.alice_angles.iter().chain(&self.bob_angles).any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("analyser angles"));
        }
        if !(0.0..=1.0).contains(&self.detection_efficiency) {
            return Err(Error::ProbabilityOutOfRange(self.detection_efficiency));
        }
        match self.protocol {
            Protocol::Bb84x2 => {
                if self.alice_angles.len() != 2 || self.alice_angles != self.bob_angles {
                    return invalid(String::from("bb84x2 needs the same two analyser angles for both parties"));
                }
                if self.alice_angles[0] == self.alice_angles[1] {
                    return invalid(String::from("bb84x2 basis angles must differ"));
                }
            }
            Protocol::EkertWigner => {
                if self.alice_angles.len() != 3 || self.bob_angles.len() != 3 {
                    return invalid(format!(
                        "ekert-wigner needs three angles per party, got {} and {}",
                        self.alice_angles.len(),
                        self.bob_angles.len()
                    ));
                }
                if self.alice_angles[2] != self.bob_angles[2] {
                    return invalid(String::from("ekert-wigner key settings must coincide"));
                }
            }
        }
        if let Some(eve) = &self.eve {
            eve.validate(self.channel)?;
        }
        Ok(())
    }
}

/// One pair's audit record. Basis and outcome arrays hold one entry per
/// active DOF in the order `pol, phase`; an outcome array is absent when
/// that photon was not detected.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairRecord {
    pub idx: u64,
    pub a_basis: DofBits,
    pub b_basis: DofBits,
    pub a_out: Option<DofBits>,
    pub b_out: Option<DofBits>,
    pub eve: bool,
    pub eve_out: Option<DofBits>,
    pub sifted: bool,
    /// Not part of the serialised log.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub eve_basis: Option<EveBasis>,
}

/// Session-level facts needed to interpret a log.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SessionMeta {
    pub protocol: Protocol,
    pub channel: Channel,
    pub n_pairs: u64,
    pub seed: u64,
    pub dofs: Vec<Dof>,
    pub alice_angles: Vec<f64>,
    pub bob_angles: Vec<f64>,
    pub pump_phase: f64,
    pub detection_efficiency: f64,
    pub eve: Option<EavesdropConfig>,
    pub eve_session_choice: Option<[u8; 2]>,
    /// Central-slot post-selection factor per interferometer; applies to
    /// raw rates only, never to the simulated statistics.
    pub central_slot_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SessionLog {
    pub meta: SessionMeta,
    pub records: Vec<PairRecord>,
}

impl SessionLog {
    pub fn intercepted(&self) -> u64 {
        self.records.iter().filter(|r| r.eve).count() as u64
    }
}

/// A prepared session: source state, bases and eavesdropper built once and
/// shared by every pair.
#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    state: StateVector,
    alice: [Vec<MeasurementBasis>; 2],
    bob: [Vec<MeasurementBasis>; 2],
    alice_factor: [Subsystem; 2],
    bob_factor: [Subsystem; 2],
    interceptor: Option<Interceptor>,
}

impl Session {
    pub fn prepare(config: SessionConfig) -> Result<Self> {
        config.validate()?;
        let state = biphoton_state(&config.channel.source_params(config.pump_phase))?;
        let bases = |side, angles: &[f64]| {
            Dof::ALL.map(|d| angles.iter().map(|&a| analyzer_basis(d, side, a, config.pump_phase)).collect::<Vec<_>>())
        };
        let alice = bases(Side::Alice, &config.alice_angles);
        let bob = bases(Side::Bob, &config.bob_angles);
        let dims = state.layout().dims().to_vec();
        let alice_factor = Dof::ALL.map(|d| Subsystem::new(&dims, &[d.alice_factor()]).expect("static"));
        let bob_factor = Dof::ALL.map(|d| Subsystem::new(&dims, &[d.bob_factor()]).expect("static"));
        let interceptor = match config.eve {
            Some(eve) => Some(Interceptor::new(
                eve,
                config.channel,
                config.eve_reference_angles(),
                config.pump_phase,
                config.seed,
            )?),
            None => None,
        };
        Ok(Session { config, state, alice, bob, alice_factor, bob_factor, interceptor })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn meta(&self) -> SessionMeta {
        let c = &self.config;
        SessionMeta {
            protocol: c.protocol,
            channel: c.channel,
            n_pairs: c.n_pairs,
            seed: c.seed,
            dofs: c.channel.dofs().to_vec(),
            alice_angles: c.alice_angles.clone(),
            bob_angles: c.bob_angles.clone(),
            pump_phase: c.pump_phase,
            detection_efficiency: c.detection_efficiency,
            eve: c.eve,
            eve_session_choice: self.interceptor.as_ref().and_then(Interceptor::session_choice),
            central_slot_fraction: CENTRAL_SLOT_FRACTION,
        }
    }

    /// Simulates pair `idx` from its own substream.
    pub fn run_pair(&self, idx: u64) -> Result<PairRecord> {
        let c = &self.config;
        let dofs = c.channel.dofs();
        let mut rng = pair_rng(c.seed, idx);

        let na = c.alice_angles.len();
        let nb = c.bob_angles.len();
        let a_basis: DofBits = dofs.iter().map(|_| rng.random_range(0..na) as u8).collect();
        let b_basis: DofBits = dofs.iter().map(|_| rng.random_range(0..nb) as u8).collect();

        let mut state = self.state.clone();
        let mut eve = None;
        if let Some(interceptor) = &self.interceptor {
            let (s, record) = interceptor.apply(idx, state, &mut rng)?;
            state = s;
            eve = record;
        }

        let mut a_out = DofBits::new();
        for (i, &dof) in dofs.iter().enumerate() {
            let d = dof_index(dof);
            let basis = &self.alice[d][a_basis[i] as usize];
            let (k, post) = self.alice_factor[d].measure(&state, basis, rng.random())?;
            a_out.push(k as u8);
            state = post;
        }
        let mut b_out = DofBits::new();
        for (i, &dof) in dofs.iter().enumerate() {
            let d = dof_index(dof);
            let basis = &self.bob[d][b_basis[i] as usize];
            let (k, post) = self.bob_factor[d].measure(&state, basis, rng.random())?;
            b_out.push(k as u8);
            state = post;
        }

        let a_detected = rng.random::<f64>() < c.detection_efficiency;
        let b_detected = rng.random::<f64>() < c.detection_efficiency;
        let sifted = a_detected && b_detected && a_basis.iter().zip(&b_basis).all(|(&a, &b)| c.protocol.is_key(a, b));

        Ok(PairRecord {
            idx,
            a_basis,
            b_basis,
            a_out: a_detected.then_some(a_out),
            b_out: b_detected.then_some(b_out),
            eve: eve.is_some(),
            eve_out: eve.as_ref().map(|e| e.outcomes.clone()),
            sifted,
            eve_basis: eve.map(|e| e.basis),
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = Result<PairRecord>> + '_ {
        (0..self.config.n_pairs).map(move |i| self.run_pair(i))
    }

    pub fn run(&self) -> Result<SessionLog> {
        Ok(SessionLog { meta: self.meta(), records: self.pairs().collect::<Result<_>>()? })
    }

    /// Streams every pair into a [`SessionSummary`] without keeping records.
    pub fn summarize(&self) -> Result<SessionSummary> {
        let mut summary = SessionSummary::new(&self.meta());
        for rec in self.pairs() {
            summary.add(&rec?);
        }
        Ok(summary)
    }
}

/// Runs a full session and keeps every pair record.
pub fn run_session(config: SessionConfig) -> Result<SessionLog> {
    Session::prepare(config)?.run()
}

/// Key bits kept after sifting, with the pair index each bit came from.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SiftedKey {
    indices: Vec<u64>,
    bits_alice: Vec<u8>,
    bits_bob: Vec<u8>,
    errors: u64,
    /// `None` for an empty key.
    qber: Option<f64>,
    n_pairs: u64,
}

impl SiftedKey {
    pub fn new(indices: Vec<u64>, bits_alice: Vec<u8>, bits_bob: Vec<u8>, n_pairs: u64) -> Result<Self> {
        if bits_alice.len() != bits_bob.len() {
            return Err(Error::DimensionMismatch { expected: bits_alice.len(), found: bits_bob.len() });
        }
        if indices.len() != bits_alice.len() {
            return Err(Error::DimensionMismatch { expected: indices.len(), found: bits_alice.len() });
        }
        let errors = bits_alice.iter().zip(&bits_bob).filter(|(a, b)| a != b).count() as u64;
        let qber = (!bits_alice.is_empty()).then(|| errors as f64 / bits_alice.len() as f64);
        Ok(SiftedKey { indices, bits_alice, bits_bob, errors, qber, n_pairs })
    }

    pub fn len(&self) -> usize {
        self.bits_alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits_alice.is_empty()
    }

    pub fn errors(&self) -> u64 {
        self.errors
    }

    pub fn qber(&self) -> Option<f64> {
        self.qber
    }

    /// Fraction of the session's pairs that survived sifting.
    pub fn retention(&self) -> f64 {
        self.len() as f64 / self.n_pairs as f64
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn bits_alice(&self) -> &[u8] {
        &self.bits_alice
    }

    pub fn bits_bob(&self) -> &[u8] {
        &self.bits_bob
    }
}

fn key_from(log: &SessionLog, slot: usize, keep: impl Fn(&PairRecord) -> bool) -> SiftedKey {
    let mut indices = Vec::new();
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    for r in log.records.iter().filter(|r| keep(r)) {
        if let (Some(a), Some(b)) = (&r.a_out, &r.b_out) {
            indices.push(r.idx);
            alice.push(a[slot]);
            bob.push(b[slot]);
        }
    }
    SiftedKey::new(indices, alice, bob, log.meta.n_pairs).expect("parallel vectors")
}

/// Per-DOF sifting: a pair contributes to a DOF's key when both photons
/// were detected and the two parties' choices on that DOF form a key pair.
pub fn sift(log: &SessionLog) -> Vec<(Dof, SiftedKey)> {
    let protocol = log.meta.protocol;
    log.meta
        .dofs
        .iter()
        .enumerate()
        .map(|(slot, &dof)| {
            let key = key_from(log, slot, |r| protocol.is_key(r.a_basis[slot], r.b_basis[slot]));
            (dof, key)
        })
        .collect()
}

/// Sifting for XOR keying: only pairs matching on every DOF, so all
/// returned keys share the same pair indices.
pub fn sift_joint(log: &SessionLog) -> Vec<(Dof, SiftedKey)> {
    log.meta.dofs.iter().enumerate().map(|(slot, &dof)| (dof, key_from(log, slot, |r| r.sifted))).collect()
}

/// Bitwise XOR of the polarisation and phase keys, for Alice and Bob
/// separately.
pub fn xor_key(pol: &SiftedKey, phase: &SiftedKey) -> Result<SiftedKey> {
    if pol.indices != phase.indices {
        return Err(Error::MisalignedKeys);
    }
    let xor = |a: &[u8], b: &[u8]| a.iter().zip(b).map(|(x, y)| x ^ y).collect::<Vec<u8>>();
    SiftedKey::new(
        pol.indices.clone(),
        xor(&pol.bits_alice, &phase.bits_alice),
        xor(&pol.bits_bob, &phase.bits_bob),
        pol.n_pairs,
    )
}

/// Sifts a double-channel log on both DOFs and XORs the two keys.
pub fn session_xor_key(log: &SessionLog) -> Result<SiftedKey> {
    if log.meta.channel != Channel::Double {
        return Err(Error::InvalidConfig(String::from("XOR keying needs the double channel")));
    }
    let keys = sift_joint(log);
    xor_key(&keys[0].1, &keys[1].1)
}

/// Streaming counts for one DOF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DofTally {
    pub sifted: u64,
    pub errors: u64,
    /// Sifted, intercepted pairs where Eve measured this DOF bitwise.
    pub eve_compared: u64,
    /// Of those, pairs where Eve's bit differs from Alice's.
    pub eve_errors: u64,
    /// Pairs where Alice detected her photon.
    pub alice_detected: u64,
    /// Of those, outcomes equal to 0.
    pub alice_zero: u64,
    /// Pairs where Alice chose setting 0 on this DOF.
    pub alice_basis_zero: u64,
}

impl DofTally {
    pub fn qber(&self) -> Option<f64> {
        (self.sifted > 0).then(|| self.errors as f64 / self.sifted as f64)
    }

    pub fn eve_error_rate(&self) -> Option<f64> {
        (self.eve_compared > 0).then(|| self.eve_errors as f64 / self.eve_compared as f64)
    }

    fn merge(&mut self, o: &DofTally) {
        self.sifted += o.sifted;
        self.errors += o.errors;
        self.eve_compared += o.eve_compared;
        self.eve_errors += o.eve_errors;
        self.alice_detected += o.alice_detected;
        self.alice_zero += o.alice_zero;
        self.alice_basis_zero += o.alice_basis_zero;
    }
}

/// Order-independent aggregate of a session.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SessionSummary {
    pub protocol: Protocol,
    pub dofs: Vec<Dof>,
    pub n_pairs: u64,
    pub intercepted: u64,
    pub per_dof: Vec<DofTally>,
    /// Pairs sifted on every DOF.
    pub joint_sifted: u64,
    /// Errors in the XOR of all DOF bits over jointly sifted pairs.
    pub xor_errors: u64,
}

impl SessionSummary {
    pub fn new(meta: &SessionMeta) -> Self {
        SessionSummary {
            protocol: meta.protocol,
            dofs: meta.dofs.clone(),
            n_pairs: 0,
            intercepted: 0,
            per_dof: meta.dofs.iter().map(|_| DofTally::default()).collect(),
            joint_sifted: 0,
            xor_errors: 0,
        }
    }

    pub fn add(&mut self, r: &PairRecord) {
        self.n_pairs += 1;
        self.intercepted += r.eve as u64;
        let bitwise_eve = matches!(r.eve_basis, Some(EveBasis::Legitimate(_) | EveBasis::Breidbart));
        for (slot, tally) in self.per_dof.iter_mut().enumerate() {
            tally.alice_basis_zero += (r.a_basis[slot] == 0) as u64;
            if let Some(a) = &r.a_out {
                tally.alice_detected += 1;
                tally.alice_zero += (a[slot] == 0) as u64;
            }
            let (Some(a), Some(b)) = (&r.a_out, &r.b_out) else { continue };
            if !self.protocol.is_key(r.a_basis[slot], r.b_basis[slot]) {
                continue;
            }
            tally.sifted += 1;
            tally.errors += (a[slot] != b[slot]) as u64;
            if let (true, Some(e)) = (bitwise_eve, &r.eve_out) {
                tally.eve_compared += 1;
                tally.eve_errors += (e[slot] != a[slot]) as u64;
            }
        }
        if r.sifted {
            if let (Some(a), Some(b)) = (&r.a_out, &r.b_out) {
                self.joint_sifted += 1;
                let parity = |v: &DofBits| v.iter().fold(0u8, |acc, x| acc ^ x);
                self.xor_errors += (parity(a) != parity(b)) as u64;
            }
        }
    }

    pub fn merge(&mut self, other: &SessionSummary) {
        self.n_pairs += other.n_pairs;
        self.intercepted += other.intercepted;
        for (a, b) in self.per_dof.iter_mut().zip(&other.per_dof) {
            a.merge(b);
        }
        self.joint_sifted += other.joint_sifted;
        self.xor_errors += other.xor_errors;
    }

    pub fn tally(&self, dof: Dof) -> Option<&DofTally> {
        self.dofs.iter().position(|&d| d == dof).map(|i| &self.per_dof[i])
    }

    pub fn xor_qber(&self) -> Option<f64> {
        (self.joint_sifted > 0).then(|| self.xor_errors as f64 / self.joint_sifted as f64)
    }

    /// Errors and sifted bits pooled over all DOFs.
    pub fn pooled(&self) -> (u64, u64) {
        self.per_dof.iter().fold((0, 0), |(e, n), t| (e + t.errors, n + t.sifted))
    }
}

/// `(coincidences, trials)` for one Alice/Bob setting pair. A coincidence
/// is Alice's outcome 0 together with Bob's outcome 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SettingCounts {
    pub coincidences: u64,
    pub trials: u64,
}

/// Coincidence counts for every `(Alice setting, Bob setting)` on one DOF,
/// indexed `[alice][bob]` over `{χ, ψ, key}` × `{ψ, ω, key}`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DofWignerCounts {
    pub dof: Dof,
    pub counts: [[SettingCounts; 3]; 3],
    pub key_bits: u64,
    pub key_errors: u64,
}

impl DofWignerCounts {
    /// Counts for the three Wigner terms `p(χ,ψ)`, `p(ψ,ω)`, `p(χ,ω)`.
    pub fn wigner_terms(&self) -> [SettingCounts; 3] {
        [self.counts[0][0], self.counts[1][1], self.counts[0][1]]
    }

    pub fn total_trials(&self) -> u64 {
        self.counts.iter().flatten().map(|c| c.trials).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WignerRunData {
    pub settings: WignerSettings,
    pub n_pairs: u64,
    pub per_dof: Vec<DofWignerCounts>,
}

impl WignerRunData {
    pub fn new(settings: WignerSettings, dofs: &[Dof]) -> Self {
        WignerRunData {
            settings,
            n_pairs: 0,
            per_dof: dofs
                .iter()
                .map(|&dof| DofWignerCounts { dof, counts: Default::default(), key_bits: 0, key_errors: 0 })
                .collect(),
        }
    }

    pub fn add(&mut self, r: &PairRecord) {
        self.n_pairs += 1;
        let (Some(a), Some(b)) = (&r.a_out, &r.b_out) else { return };
        for (slot, d) in self.per_dof.iter_mut().enumerate() {
            let (sa, sb) = (r.a_basis[slot], r.b_basis[slot]);
            let c = &mut d.counts[sa as usize][sb as usize];
            c.trials += 1;
            c.coincidences += (a[slot] == 0 && b[slot] == 1) as u64;
            if sa == KEY_SETTING && sb == KEY_SETTING {
                d.key_bits += 1;
                d.key_errors += (a[slot] != b[slot]) as u64;
            }
        }
    }

    pub fn merge(&mut self, other: &WignerRunData) {
        self.n_pairs += other.n_pairs;
        for (x, y) in self.per_dof.iter_mut().zip(&other.per_dof) {
            for (cx, cy) in x.counts.iter_mut().flatten().zip(y.counts.iter().flatten()) {
                cx.coincidences += cy.coincidences;
                cx.trials += cy.trials;
            }
            x.key_bits += y.key_bits;
            x.key_errors += y.key_errors;
        }
    }

    pub fn dof(&self, dof: Dof) -> Option<&DofWignerCounts> {
        self.per_dof.iter().find(|d| d.dof == dof)
    }
}

/// Applies `settings` (with the config's key angle) to an Ekert-Wigner
/// config.
pub fn wigner_config(mut config: SessionConfig, settings: &WignerSettings) -> Result<SessionConfig> {
    if config.protocol != Protocol::EkertWigner {
        return Err(Error::InvalidConfig(String::from("Wigner sessions need the ekert-wigner protocol")));
    }
    settings.validate()?;
    let key = config.key_angle();
    config.set_wigner_settings(settings, key);
    Ok(config)
}

/// Runs an Ekert-Wigner session and accumulates coincidence counts.
pub fn wigner_session(config: SessionConfig, settings: &WignerSettings) -> Result<WignerRunData> {
    let session = Session::prepare(wigner_config(config, settings)?)?;
    let mut data = WignerRunData::new(*settings, session.config.channel.dofs());
    for rec in session.pairs() {
        data.add(&rec?);
    }
    Ok(data)
}
