//! Pure-state arithmetic for small Hilbert spaces.
//!
//! States carry a shared [`Layout`] describing the tensor factors and the
//! label of every computational basis state, so a 16-dimensional biphoton
//! amplitude can be addressed as `"sH⊗lV"` as well as by index. Layouts are
//! reference counted; measuring or collapsing a state never copies labels.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Complex amplitude stored as an explicit `(re, im)` pair.
pub type ComplexAmp = Complex64;

/// Tolerance for algebraic invariants (normalisation, orthonormality).
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Tolerance for freshly constructed states.
pub const CONSTRUCTION_TOLERANCE: f64 = 1e-12;
/// Outcome probabilities below this are treated as exactly zero.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Tensor-factor dimensions plus one label per computational basis state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl Layout {
    pub fn new(dims: Vec<usize>, labels: Vec<String>) -> Result<Arc<Self>> {
        let dim: usize = dims.iter().product();
        if dims.is_empty() || dim == 0 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if labels.len() != dim {
            return Err(Error::LabelCount { labels: labels.len(), dim });
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Arc::new(Layout { dims, labels }))
    }

    /// Single-factor layout.
    pub fn flat(labels: &[&str]) -> Result<Arc<Self>> {
        Self::new(vec![labels.len()], labels.iter().map(|l| l.to_string()).collect())
    }

    /// Single-factor layout labelled `0..dim`.
    pub fn indexed(dim: usize) -> Result<Arc<Self>> {
        Self::new(vec![dim], (0..dim).map(|k| format!("{k}")).collect())
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Product layout; labels are joined with `⊗`, the left factor varies slowest.
    pub fn tensor(&self, other: &Layout) -> Arc<Layout> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let labels = self.labels.iter().flat_map(|a| other.labels.iter().map(move |b| format!("{a}⊗{b}"))).collect();
        Arc::new(Layout { dims, labels })
    }
}

/// A normalised pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<ComplexAmp>,
    layout: Arc<Layout>,
}

impl StateVector {
    /// Builds a state, rejecting non-finite or non-normalised amplitudes.
    pub fn new(layout: Arc<Layout>, amps: Vec<ComplexAmp>) -> Result<Self> {
        check_len(&layout, amps.len())?;
        check_finite(&amps)?;
        let norm_sqr = norm_sqr(&amps);
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(StateVector { amps, layout })
    }

    /// Rescales arbitrary amplitudes to unit norm.
    pub fn normalized(layout: Arc<Layout>, mut amps: Vec<ComplexAmp>) -> Result<Self> {
        check_len(&layout, amps.len())?;
        check_finite(&amps)?;
        let norm_sqr = norm_sqr(&amps);
        if norm_sqr < PROBABILITY_FLOOR {
            return Err(Error::DegenerateOutcome { probability: norm_sqr });
        }
        let scale = 1.0 / libm::sqrt(norm_sqr);
        amps.iter_mut().for_each(|a| *a *= scale);
        Ok(StateVector { amps, layout })
    }

    pub fn from_real(layout: Arc<Layout>, amps: &[f64]) -> Result<Self> {
        Self::new(layout, amps.iter().map(|&x| ComplexAmp::new(x, 0.0)).collect())
    }

    /// The `k`-th computational basis state.
    pub fn basis_state(layout: Arc<Layout>, k: usize) -> Result<Self> {
        let dim = layout.dim();
        if k >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: k });
        }
        let mut amps = vec![ComplexAmp::new(0.0, 0.0); dim];
        amps[k] = ComplexAmp::new(1.0, 0.0);
        Ok(StateVector { amps, layout })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[ComplexAmp] {
        &self.amps
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn labels(&self) -> &[String] {
        self.layout.labels()
    }

    pub fn amplitude(&self, label: &str) -> Option<ComplexAmp> {
        self.layout.index_of(label).map(|k| self.amps[k])
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Same amplitudes under a different layout of equal dimension.
    pub fn relabel(self, layout: Arc<Layout>) -> Result<Self> {
        check_len(&layout, self.amps.len())?;
        Ok(StateVector { amps: self.amps, layout })
    }
}

fn check_len(layout: &Layout, len: usize) -> Result<()> {
    if layout.dim() != len {
        return Err(Error::DimensionMismatch { expected: layout.dim(), found: len });
    }
    Ok(())
}

fn check_finite(amps: &[ComplexAmp]) -> Result<()> {
    if amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("amplitudes"))
    }
}

fn norm_sqr(amps: &[ComplexAmp]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// `a ⊗ b`; the amplitude of `(i, j)` is `a_i b_j`.
pub fn tensor(a: &StateVector, b: &StateVector) -> StateVector {
    let amps = a.amps.iter().flat_map(|x| b.amps.iter().map(move |y| x * y)).collect();
    StateVector { amps, layout: a.layout.tensor(&b.layout) }
}

/// `⟨a|b⟩ = Σ conj(a_k) b_k`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<ComplexAmp> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(inner_raw(&a.amps, &b.amps))
}

fn inner_raw(a: &[ComplexAmp], b: &[ComplexAmp]) -> ComplexAmp {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// An orthonormal family of `dim` vectors defining a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    vectors: Vec<StateVector>,
    tag: String,
}

impl MeasurementBasis {
    pub fn new(tag: impl Into<String>, vectors: Vec<StateVector>) -> Result<Self> {
        let dim = vectors.first().map(StateVector::dim).unwrap_or(0);
        if dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        if vectors.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: vectors.len() });
        }
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
        }
        let deviation = orthonormality_deviation(&vectors);
        if deviation > NORM_TOLERANCE {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(MeasurementBasis { vectors, tag: tag.into() })
    }

    /// The computational basis of a layout.
    pub fn computational(layout: &Arc<Layout>, tag: impl Into<String>) -> Self {
        let vectors =
            (0..layout.dim()).map(|k| StateVector::basis_state(layout.clone(), k).expect("index in range")).collect();
        MeasurementBasis { vectors, tag: tag.into() }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &StateVector {
        &self.vectors[k]
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Product basis; outcome `(i, j)` has index `i * other.dim() + j`.
    pub fn tensor(&self, other: &MeasurementBasis) -> MeasurementBasis {
        let vectors = self.vectors.iter().flat_map(|a| other.vectors.iter().map(move |b| tensor(a, b))).collect();
        MeasurementBasis { vectors, tag: format!("{}⊗{}", self.tag, other.tag) }
    }
}

/// Largest `|⟨v_i|v_j⟩ − δ_ij|` over the family.
pub fn orthonormality_deviation(vectors: &[StateVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = (inner_raw(&a.amps, &b.amps) - target).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Born-rule outcome probabilities `|⟨b_k|ψ⟩|²`.
pub fn born_distribution(state: &StateVector, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    if state.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: state.dim() });
    }
    Ok(basis.vectors.iter().map(|b| inner_raw(&b.amps, &state.amps).norm_sqr()).collect())
}

/// Inverse-CDF sampling over `probs` in index order. Outcomes below
/// [`PROBABILITY_FLOOR`] are never selected.
pub fn sample_outcome(probs: &[f64], u: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::UniformOutOfRange(u));
    }
    let total: f64 = probs.iter().filter(|&&p| p >= PROBABILITY_FLOOR).sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = None;
    for (k, &p) in probs.iter().enumerate() {
        if p < PROBABILITY_FLOOR {
            continue;
        }
        acc += p;
        last = Some(k);
        if target < acc {
            return Ok(k);
        }
    }
    last.ok_or(Error::DegenerateOutcome { probability: total })
}

/// Full projective measurement. The post-measurement state is the selected
/// basis vector.
pub fn projective_measure(state: &StateVector, basis: &MeasurementBasis, u: f64) -> Result<(usize, StateVector)> {
    let probs = born_distribution(state, basis)?;
    let k = sample_outcome(&probs, u)?;
    Ok((k, basis.vectors[k].clone()))
}

/// A choice of tensor factors inside a multi-factor layout, with the index
/// bookkeeping needed to project onto it precomputed.
#[derive(Debug, Clone)]
pub struct Subsystem {
    full_dims: Vec<usize>,
    positions: Vec<usize>,
    sub_dim: usize,
    rest_dim: usize,
    /// `(sub index, rest index)` for every full index.
    split: Vec<(usize, usize)>,
}

impl Subsystem {
    pub fn new(full_dims: &[usize], positions: &[usize]) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidSubsystem("empty factor set"));
        }
        for (i, &p) in positions.iter().enumerate() {
            if p >= full_dims.len() {
                return Err(Error::InvalidSubsystem("factor position out of range"));
            }
            if positions[..i].contains(&p) {
                return Err(Error::InvalidSubsystem("repeated factor position"));
            }
        }
        let full: usize = full_dims.iter().product();
        let sub_dim: usize = positions.iter().map(|&p| full_dims[p]).product();
        let rest: Vec<usize> = (0..full_dims.len()).filter(|p| !positions.contains(p)).collect();
        let rest_dim = full / sub_dim;

        let mut split = Vec::with_capacity(full);
        let mut digits = vec![0usize; full_dims.len()];
        for idx in 0..full {
            let mut r = idx;
            for f in (0..full_dims.len()).rev() {
                digits[f] = r % full_dims[f];
                r /= full_dims[f];
            }
            let s = positions.iter().fold(0, |acc, &p| acc * full_dims[p] + digits[p]);
            let o = rest.iter().fold(0, |acc, &p| acc * full_dims[p] + digits[p]);
            split.push((s, o));
        }
        Ok(Subsystem { full_dims: full_dims.to_vec(), positions: positions.to_vec(), sub_dim, rest_dim, split })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn dim(&self) -> usize {
        self.sub_dim
    }

    fn check(&self, state: &StateVector, basis: &MeasurementBasis) -> Result<()> {
        if state.layout.dims() != self.full_dims.as_slice() {
            return Err(Error::InvalidSubsystem("state layout differs from subsystem layout"));
        }
        if basis.dim() != self.sub_dim {
            return Err(Error::DimensionMismatch { expected: self.sub_dim, found: basis.dim() });
        }
        Ok(())
    }

    /// `(⟨b| ⊗ 1)|ψ⟩` as an unnormalised vector over the remaining factors.
    fn project(&self, state: &StateVector, b: &StateVector) -> Vec<ComplexAmp> {
        let mut rest = vec![ComplexAmp::new(0.0, 0.0); self.rest_dim];
        for (&(s, o), amp) in self.split.iter().zip(&state.amps) {
            rest[o] += b.amps[s].conj() * amp;
        }
        rest
    }

    fn collapse(&self, state: &StateVector, b: &StateVector, rest: &[ComplexAmp], prob: f64) -> StateVector {
        let scale = 1.0 / libm::sqrt(prob);
        let amps = self.split.iter().map(|&(s, o)| b.amps[s] * rest[o] * scale).collect();
        StateVector { amps, layout: state.layout.clone() }
    }

    /// Marginal outcome probabilities for measuring these factors.
    pub fn distribution(&self, state: &StateVector, basis: &MeasurementBasis) -> Result<Vec<f64>> {
        self.check(state, basis)?;
        Ok(basis.vectors.iter().map(|b| norm_sqr(&self.project(state, b))).collect())
    }

    /// Projects onto outcome `k` and renormalises. Fails if the outcome has
    /// vanishing probability.
    pub fn project_outcome(
        &self,
        state: &StateVector,
        basis: &MeasurementBasis,
        k: usize,
    ) -> Result<(f64, StateVector)> {
        self.check(state, basis)?;
        if k >= basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: k });
        }
        let b = &basis.vectors[k];
        let rest = self.project(state, b);
        let prob = norm_sqr(&rest);
        if prob < PROBABILITY_FLOOR {
            return Err(Error::DegenerateOutcome { probability: prob });
        }
        Ok((prob, self.collapse(state, b, &rest, prob)))
    }

    /// Born-rule measurement of these factors; returns the outcome and the
    /// collapsed joint state.
    pub fn measure(&self, state: &StateVector, basis: &MeasurementBasis, u: f64) -> Result<(usize, StateVector)> {
        self.check(state, basis)?;
        let rests: Vec<Vec<ComplexAmp>> = basis.vectors.iter().map(|b| self.project(state, b)).collect();
        let probs: Vec<f64> = rests.iter().map(|r| norm_sqr(r)).collect();
        let k = sample_outcome(&probs, u)?;
        if probs[k] < PROBABILITY_FLOOR {
            return Err(Error::DegenerateOutcome { probability: probs[k] });
        }
        Ok((k, self.collapse(state, &basis.vectors[k], &rests[k], probs[k])))
    }
}

/// Measures the factors at `positions` of `state` in `basis`.
pub fn partial_measure(
    state: &StateVector,
    positions: &[usize],
    basis: &MeasurementBasis,
    u: f64,
) -> Result<(usize, StateVector)> {
    Subsystem::new(state.layout.dims(), positions)?.measure(state, basis, u)
}

/// A special orthogonal matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl RotationMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("rotation entries"));
        }
        let r = RotationMatrix { n, entries };
        let residual = r.orthogonality_residual();
        let det = r.det();
        if residual > NORM_TOLERANCE || (det - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotRotation { residual, det });
        }
        Ok(r)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        (0..n).for_each(|i| entries[i * n + i] = 1.0);
        RotationMatrix { n, entries }
    }

    /// `[[cos θ, −sin θ], [sin θ, cos θ]]`.
    pub fn so2(theta: f64) -> Self {
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        RotationMatrix { n: 2, entries: vec![c, -s, s, c] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|k| self.get(k % n, k / n)).collect();
        RotationMatrix { n, entries }
    }

    /// `max |(R Rᵀ − I)_ij|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| self.get(i, k) * self.get(j, k)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut m = self.entries.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n).max_by(|&a, &b| m[a * n + col].abs().total_cmp(&m[b * n + col].abs())).unwrap_or(col);
            if m[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    m.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = m[col * n + col];
            det *= p;
            for row in col + 1..n {
                let f = m[row * n + col] / p;
                for k in col..n {
                    m[row * n + k] -= f * m[col * n + k];
                }
            }
        }
        det
    }
}

/// Draws a rotation from the Haar measure on SO(n), `n ∈ {2, 4}`.
///
/// A matrix of independent standard normals is orthonormalised column by
/// column (a QR factorisation whose R has a positive diagonal); if the
/// result is a reflection its first column is negated.
pub fn haar_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<RotationMatrix> {
    if n != 2 && n != 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    // Column-major scratch: cols[c][r].
    let mut cols: Vec<Vec<f64>> =
        (0..n).map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
    for c in 0..n {
        let (done, rest) = cols.split_at_mut(c);
        let col = &mut rest[0];
        for prev in done.iter() {
            let dot: f64 = col.iter().zip(prev).map(|(x, y)| x * y).sum();
            col.iter_mut().zip(prev).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = libm::sqrt(col.iter().map(|x| x * x).sum());
        if norm < PROBABILITY_FLOOR {
            // Measure-zero event; redraw.
            return haar_rotation(n, rng);
        }
        col.iter_mut().for_each(|x| *x /= norm);
    }
    let mut m = RotationMatrix { n, entries: (0..n * n).map(|k| cols[k % n][k / n]).collect() };
    if m.det() < 0.0 {
        for r in 0..n {
            m.entries[r * n] = -m.entries[r * n];
        }
    }
    RotationMatrix::new(n, m.entries)
}

/// Output vector `k` is `Σ_j R_jk · v_j`.
pub fn rotate_basis(basis: &MeasurementBasis, rotation: &RotationMatrix) -> Result<MeasurementBasis> {
    let n = basis.dim();
    if rotation.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rotation.n() });
    }
    let layout = basis.vectors[0].layout.clone();
    let vectors = (0..n)
        .map(|k| {
            let mut amps = vec![ComplexAmp::new(0.0, 0.0); n];
            for (j, v) in basis.vectors.iter().enumerate() {
                let w = rotation.get(j, k);
                for (a, x) in amps.iter_mut().zip(&v.amps) {
                    *a += x * w;
                }
            }
            StateVector { amps, layout: layout.clone() }
        })
        .collect();
    MeasurementBasis::new(format!("{}·R", basis.tag), vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const H: f64 = core::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> ComplexAmp {
        ComplexAmp::new(re, 0.0)
    }

    fn qubit(a: f64, b: f64) -> StateVector {
        StateVector::from_real(Layout::flat(&["0", "1"]).unwrap(), &[a, b]).unwrap()
    }

    fn close(a: &[ComplexAmp], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - c(*y)).norm() < 1e-12)
    }

    #[test]
    fn tensor_examples() {
        assert!(close(tensor(&qubit(1.0, 0.0), &qubit(1.0, 0.0)).amplitudes(), &[1.0, 0.0, 0.0, 0.0]));
        let t = tensor(&qubit(H, H), &qubit(1.0, 0.0));
        assert!(close(t.amplitudes(), &[H, 0.0, H, 0.0]));
        assert_eq!(t.labels()[2], "1⊗0");
        assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_examples() {
        let v = qubit(0.6, 0.8);
        assert!((inner(&v, &v).unwrap() - c(1.0)).norm() < 1e-12);
        assert_eq!(inner(&qubit(1.0, 0.0), &qubit(0.0, 1.0)).unwrap(), c(0.0));
        assert!(inner(&qubit(H, H), &qubit(H, -H)).unwrap().norm() < 1e-15);
        let big = StateVector::basis_state(Layout::indexed(4).unwrap(), 0).unwrap();
        assert_eq!(inner(&v, &big), Err(Error::DimensionMismatch { expected: 2, found: 4 }));
    }

    #[test]
    fn rejects_bad_states() {
        let l = Layout::flat(&["0", "1"]).unwrap();
        assert!(matches!(StateVector::from_real(l.clone(), &[1.0, 1.0]), Err(Error::NotNormalized { .. })));
        assert_eq!(StateVector::from_real(l, &[f64::NAN, 0.0]), Err(Error::NonFinite("amplitudes")));
        assert!(matches!(Layout::flat(&["a", "a"]), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn non_orthogonal_basis_rejected() {
        let r = MeasurementBasis::new("bad", vec![qubit(1.0, 0.0), qubit(H, H)]);
        assert!(matches!(r, Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn projective_measure_examples() {
        let l = Layout::flat(&["0", "1"]).unwrap();
        let comp = MeasurementBasis::computational(&l, "z");
        for u in [0.0, 0.5, 0.999] {
            let (k, post) = projective_measure(&qubit(1.0, 0.0), &comp, u).unwrap();
            assert_eq!(k, 0);
            assert_eq!(post, qubit(1.0, 0.0));
        }
        assert_eq!(projective_measure(&qubit(H, H), &comp, 0.2).unwrap().0, 0);
        assert_eq!(projective_measure(&qubit(H, H), &comp, 0.7).unwrap().0, 1);
        assert_eq!(projective_measure(&qubit(H, H), &comp, 1.0), Err(Error::UniformOutOfRange(1.0)));
    }

    #[test]
    fn zero_probability_outcomes_never_sampled() {
        assert_eq!(sample_outcome(&[1.0, 0.0], 0.999_999).unwrap(), 0);
        assert_eq!(sample_outcome(&[0.0, 1e-13, 1.0], 0.0).unwrap(), 2);
    }

    #[test]
    fn partial_measure_bell_pair() {
        let l = Layout::new(vec![2, 2], ["HH", "HV", "VH", "VV"].iter().map(|s| s.to_string()).collect()).unwrap();
        let bell = StateVector::from_real(l.clone(), &[H, 0.0, 0.0, H]).unwrap();
        let hv = MeasurementBasis::computational(&Layout::flat(&["H", "V"]).unwrap(), "hv");
        let (k, post) = partial_measure(&bell, &[0], &hv, 0.1).unwrap();
        assert_eq!(k, 0);
        assert!(close(post.amplitudes(), &[1.0, 0.0, 0.0, 0.0]));
        let (k2, _) = partial_measure(&post, &[1], &hv, 0.99).unwrap();
        assert_eq!(k2, 0);
    }

    #[test]
    fn degenerate_projection_is_an_error() {
        let l = Layout::indexed(4).unwrap();
        let s = StateVector::basis_state(Layout::new(vec![2, 2], l.labels().to_vec()).unwrap(), 0).unwrap();
        let z = MeasurementBasis::computational(&Layout::indexed(2).unwrap(), "z");
        let sub = Subsystem::new(&[2, 2], &[0]).unwrap();
        assert!(matches!(sub.project_outcome(&s, &z, 1), Err(Error::DegenerateOutcome { .. })));
        assert!(Subsystem::new(&[2, 2], &[0, 0]).is_err());
        assert!(Subsystem::new(&[2, 2], &[2]).is_err());
    }

    #[test]
    fn so2_rotation_of_computational_basis_gives_diagonal_basis() {
        let l = Layout::flat(&["H", "V"]).unwrap();
        let comp = MeasurementBasis::computational(&l, "hv");
        let rotated = rotate_basis(&comp, &RotationMatrix::so2(core::f64::consts::FRAC_PI_4)).unwrap();
        assert!(close(rotated.vector(0).amplitudes(), &[H, H]));
        // (−H + V)/√2 = −|−⟩: the same projector as |−⟩.
        assert!(close(rotated.vector(1).amplitudes(), &[-H, H]));
        let back = rotate_basis(&rotated, &RotationMatrix::so2(core::f64::consts::FRAC_PI_4).transpose()).unwrap();
        for (a, b) in back.vectors().iter().zip(comp.vectors()) {
            assert!(close(a.amplitudes(), &[b.amplitudes()[0].re, b.amplitudes()[1].re]));
        }
        assert_eq!(rotate_basis(&comp, &RotationMatrix::identity(2)).unwrap().vectors(), comp.vectors());
        assert!(rotate_basis(&comp, &RotationMatrix::identity(4)).is_err());
    }

    #[test]
    fn haar_rotation_is_special_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4] {
            for _ in 0..10_000 {
                let r = haar_rotation(n, &mut rng).unwrap();
                assert!(r.orthogonality_residual() < 1e-9);
                assert!((r.det() - 1.0).abs() < 1e-9);
            }
        }
        let r = haar_rotation(2, &mut rng).unwrap();
        assert!((r.get(0, 0) - r.get(1, 1)).abs() < 1e-12);
        assert!((r.get(0, 1) + r.get(1, 0)).abs() < 1e-12);
        assert_eq!(haar_rotation(3, &mut rng), Err(Error::UnsupportedDimension(3)));
    }

    #[test]
    fn rotation_constructor_rejects_reflections() {
        assert!(matches!(RotationMatrix::new(2, vec![1.0, 0.0, 0.0, -1.0]), Err(Error::NotRotation { .. })));
        assert!(RotationMatrix::new(2, vec![0.0, -1.0, 1.0, 0.0]).is_ok());
    }
}
