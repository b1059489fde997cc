//! Dense complex linear algebra over the truncated two-mode Fock space.
//!
//! Each mode is truncated to `d` Fock levels (`0..d`), so the two-mode space
//! has dimension `d²`. Sectors of fixed total photon number `m + n ≤ d − 1`
//! are represented without loss; beam splitters and phase shifters act
//! exactly on them.

mod expm;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::C64;

pub use expm::matrix_exponential;

/// Maps the two-mode label `(m, n)` to the flat index `m·d + n` and back.
///
/// Mode `a` is the major index and mode `b` the minor one; every module in
/// the crate uses this ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeIndexer {
    cutoff: usize,
}

impl ModeIndexer {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidDimension("cutoff must be at least 1".into()));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff * self.cutoff
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        debug_assert!(m < self.cutoff && n < self.cutoff);
        m * self.cutoff + n
    }

    #[inline]
    pub fn labels(&self, k: usize) -> (usize, usize) {
        (k / self.cutoff, k % self.cutoff)
    }

    /// Total photon number `m + n` of flat index `k`.
    #[inline]
    pub fn total(&self, k: usize) -> usize {
        let (m, n) = self.labels(k);
        m + n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

/// Which space an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// One mode, dimension `d`.
    Single,
    /// Two modes, dimension `d²`.
    TwoMode,
}

impl Space {
    pub fn dim(self, cutoff: usize) -> usize {
        match self {
            Space::Single => cutoff,
            Space::TwoMode => cutoff * cutoff,
        }
    }
}

/// Dense complex matrix acting on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    cutoff: usize,
    space: Space,
    entries: Array2<C64>,
}

impl OperatorMatrix {
    pub fn from_array(cutoff: usize, space: Space, entries: Array2<C64>) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidDimension("cutoff must be at least 1".into()));
        }
        let dim = space.dim(cutoff);
        if entries.dim() != (dim, dim) {
            return Err(Error::InvalidDimension(format!(
                "expected {dim}x{dim} entries, got {:?}",
                entries.dim()
            )));
        }
        Ok(Self {
            cutoff,
            space,
            entries,
        })
    }

    pub fn zeros(cutoff: usize, space: Space) -> Result<Self> {
        let dim = space.dim(cutoff);
        Self::from_array(cutoff, space, Array2::zeros((dim, dim)))
    }

    pub fn identity(cutoff: usize, space: Space) -> Result<Self> {
        let dim = space.dim(cutoff);
        Self::from_array(cutoff, space, Array2::eye(dim))
    }

    /// Diagonal operator with the given diagonal.
    pub fn diagonal(cutoff: usize, space: Space, diag: &[C64]) -> Result<Self> {
        let dim = space.dim(cutoff);
        if diag.len() != dim {
            return Err(Error::InvalidDimension(format!(
                "diagonal of length {} for dimension {dim}",
                diag.len()
            )));
        }
        let mut entries = Array2::zeros((dim, dim));
        for (k, &v) in diag.iter().enumerate() {
            entries[[k, k]] = v;
        }
        Self::from_array(cutoff, space, entries)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[[row, col]]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            cutoff: self.cutoff,
            space: self.space,
            entries: self.entries.t().mapv(|z| z.conj()),
        }
    }

    /// Entrywise complex conjugate (not transposed).
    pub fn conj(&self) -> Self {
        Self {
            cutoff: self.cutoff,
            space: self.space,
            entries: self.entries.mapv(|z| z.conj()),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            cutoff: self.cutoff,
            space: self.space,
            entries: &self.entries * factor,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.cutoff != other.cutoff {
            return Err(Error::CutoffMismatch {
                left: self.cutoff,
                right: other.cutoff,
            });
        }
        if self.space != other.space {
            return Err(Error::InvalidDimension(format!(
                "space mismatch: {:?} vs {:?}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(Self {
            cutoff: self.cutoff,
            space: self.space,
            entries: self.entries.dot(&rhs.entries),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(Self {
            cutoff: self.cutoff,
            space: self.space,
            entries: &self.entries + &rhs.entries,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(Self {
            cutoff: self.cutoff,
            space: self.space,
            entries: &self.entries - &rhs.entries,
        })
    }

    /// `self · ψ` for a two-mode state.
    pub fn apply(&self, state: &TwoModeState) -> Result<TwoModeState> {
        if self.space != Space::TwoMode {
            return Err(Error::InvalidDimension(
                "apply needs a two-mode operator".into(),
            ));
        }
        if self.cutoff != state.cutoff {
            return Err(Error::CutoffMismatch {
                left: self.cutoff,
                right: state.cutoff,
            });
        }
        let amplitudes = matvec(&self.entries, &state.amplitudes);
        Ok(TwoModeState {
            cutoff: self.cutoff,
            amplitudes,
        })
    }

    /// `‖M − M†‖_max`.
    pub fn hermiticity_residual(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0_f64;
        for r in 0..dim {
            for c in r..dim {
                let d = (self.entries[[r, c]] - self.entries[[c, r]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// `‖M†M − I‖_max`.
    pub fn unitarity_residual(&self) -> f64 {
        let dim = self.dim();
        let prod = self.entries.t().mapv(|z| z.conj()).dot(&self.entries);
        let mut worst = 0.0_f64;
        for r in 0..dim {
            for c in 0..dim {
                let target = if r == c {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((prod[[r, c]] - target).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.entries
            .indexed_iter()
            .all(|((r, c), z)| r == c || z.norm() <= tol)
    }

    /// Largest `|M_rc − N_rc|` over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).norm())))
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

pub(crate) fn matvec(m: &Array2<C64>, v: &Array1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(m.nrows());
    for (r, row) in m.outer_iter().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in row.iter().zip(v.iter()) {
            acc += a * b;
        }
        out[r] = acc;
    }
    out
}

/// Single-mode state vector over `0..cutoff` Fock levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleModeState {
    amplitudes: Vec<C64>,
}

impl SingleModeState {
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension("cutoff must be at least 1".into()));
        }
        Ok(Self { amplitudes })
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amplitudes[n]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Pure state on the truncated two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    cutoff: usize,
    amplitudes: Array1<C64>,
}

impl TwoModeState {
    pub fn from_amplitudes(cutoff: usize, amplitudes: Array1<C64>) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidDimension("cutoff must be at least 1".into()));
        }
        if amplitudes.len() != cutoff * cutoff {
            return Err(Error::InvalidDimension(format!(
                "expected {} amplitudes, got {}",
                cutoff * cutoff,
                amplitudes.len()
            )));
        }
        Ok(Self { cutoff, amplitudes })
    }

    /// `|a⟩ ⊗ |b⟩`.
    pub fn product(a: &SingleModeState, b: &SingleModeState) -> Result<Self> {
        if a.cutoff() != b.cutoff() {
            return Err(Error::CutoffMismatch {
                left: a.cutoff(),
                right: b.cutoff(),
            });
        }
        let d = a.cutoff();
        let mut amplitudes = Array1::zeros(d * d);
        for m in 0..d {
            for n in 0..d {
                amplitudes[m * d + n] = a.amplitudes[m] * b.amplitudes[n];
            }
        }
        Ok(Self {
            cutoff: d,
            amplitudes,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn indexer(&self) -> ModeIndexer {
        ModeIndexer {
            cutoff: self.cutoff,
        }
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, m: usize, n: usize) -> C64 {
        self.amplitudes[m * self.cutoff + n]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `1 − ‖ψ‖²`: probability mass lost to truncation.
    pub fn norm_deficit(&self) -> f64 {
        1.0 - self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.cutoff != other.cutoff {
            return Err(Error::CutoffMismatch {
                left: self.cutoff,
                right: other.cutoff,
            });
        }
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in self.amplitudes.iter().zip(other.amplitudes.iter()) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// Pointwise phase multiplication, used for diagonal operators.
    pub(crate) fn map_indexed(&self, f: impl Fn(usize, usize, C64) -> C64) -> Self {
        let d = self.cutoff;
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, &z)| f(k / d, k % d, z))
            .collect();
        Self {
            cutoff: d,
            amplitudes,
        }
    }
}

/// Single-mode annihilation operator: `A[m, m+1] = √(m+1)`.
pub fn annihilation_matrix(cutoff: usize) -> Result<OperatorMatrix> {
    let mut op = OperatorMatrix::zeros(cutoff, Space::Single)?;
    for m in 0..cutoff.saturating_sub(1) {
        op.entries[[m, m + 1]] = C64::new(((m + 1) as f64).sqrt(), 0.0);
    }
    Ok(op)
}

/// Single-mode number operator `diag(0, 1, …, d−1)`.
pub fn number_matrix(cutoff: usize) -> Result<OperatorMatrix> {
    let diag: Vec<C64> = (0..cutoff).map(|n| C64::new(n as f64, 0.0)).collect();
    OperatorMatrix::diagonal(cutoff, Space::Single, &diag)
}

/// Lift a single-mode operator into the two-mode space: `op ⊗ I` for mode
/// `A`, `I ⊗ op` for mode `B`.
pub fn embed(op: &OperatorMatrix, mode: Mode, cutoff: usize) -> Result<OperatorMatrix> {
    if op.space != Space::Single || op.cutoff != cutoff {
        return Err(Error::InvalidDimension(format!(
            "embed needs a single-mode {cutoff}x{cutoff} operator, got {:?} with cutoff {}",
            op.space, op.cutoff
        )));
    }
    let d = cutoff;
    let mut out = Array2::zeros((d * d, d * d));
    for r in 0..d {
        for c in 0..d {
            let v = op.entries[[r, c]];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for s in 0..d {
                match mode {
                    Mode::A => out[[r * d + s, c * d + s]] = v,
                    Mode::B => out[[s * d + r, s * d + c]] = v,
                }
            }
        }
    }
    OperatorMatrix::from_array(d, Space::TwoMode, out)
}

/// Two-mode ladder operators `(A ⊗ I, I ⊗ A)`.
pub fn two_mode_annihilators(cutoff: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let a = annihilation_matrix(cutoff)?;
    Ok((embed(&a, Mode::A, cutoff)?, embed(&a, Mode::B, cutoff)?))
}

/// `⟨ψ|O|ψ⟩`, summed row by row in index order.
pub fn expectation(state: &TwoModeState, op: &OperatorMatrix) -> Result<C64> {
    if op.space != Space::TwoMode {
        return Err(Error::InvalidDimension(
            "expectation needs a two-mode operator".into(),
        ));
    }
    if op.cutoff != state.cutoff {
        return Err(Error::CutoffMismatch {
            left: state.cutoff,
            right: op.cutoff,
        });
    }
    let psi = &state.amplitudes;
    let mut total = C64::new(0.0, 0.0);
    for (r, row) in op.entries.outer_iter().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in row.iter().zip(psi.iter()) {
            acc += a * b;
        }
        total += psi[r].conj() * acc;
    }
    Ok(total)
}

#[derive(Serialize, Deserialize)]
struct DenseJson {
    cutoff: usize,
    entries: Vec<[f64; 2]>,
}

fn flatten<'a>(it: impl Iterator<Item = &'a C64>) -> Vec<[f64; 2]> {
    it.map(|z| [z.re, z.im]).collect()
}

impl Serialize for OperatorMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DenseJson {
            cutoff: self.cutoff,
            entries: flatten(self.entries.iter()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = DenseJson::deserialize(d)?;
        let c = raw.cutoff;
        let len = raw.entries.len();
        // d⁴ entries for a two-mode operator, d² for a single-mode one.
        let space = if len == c.pow(4) {
            Space::TwoMode
        } else if len == c * c {
            Space::Single
        } else {
            return Err(D::Error::custom(format!(
                "{len} entries do not fit cutoff {c}"
            )));
        };
        let dim = space.dim(c);
        let data: Vec<C64> = raw.entries.iter().map(|p| C64::new(p[0], p[1])).collect();
        let arr = Array2::from_shape_vec((dim, dim), data).map_err(D::Error::custom)?;
        OperatorMatrix::from_array(c, space, arr).map_err(D::Error::custom)
    }
}

impl Serialize for TwoModeState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DenseJson {
            cutoff: self.cutoff,
            entries: flatten(self.amplitudes.iter()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoModeState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = DenseJson::deserialize(d)?;
        let amps: Array1<C64> = raw.entries.iter().map(|p| C64::new(p[0], p[1])).collect();
        TwoModeState::from_amplitudes(raw.cutoff, amps).map_err(D::Error::custom)
    }
}
