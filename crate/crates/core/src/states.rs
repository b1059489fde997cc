//! State constructors: Fock, coherent, squeezed vacuum, NOON, and the
//! entangled states `|η⟩`, `|ξ⟩` through two-variable Hermite polynomials.
//!
//! Truncated coherent and squeezed states are *not* renormalized; their norm
//! deficit `1 − ‖ψ‖²` is the weight lost above the cutoff. Entangled states
//! are delta-normalized in the continuum and are stored unnormalized.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::tensor::{SingleModeState, TwoModeState};
use crate::C64;

/// Largest Hermite order accepted by [`hermite_mn`] and [`HermiteTable`].
pub const MAX_HERMITE_ORDER: usize = 200;

/// Values of `H_{m,n}(x, y)` for `m ≤ max_m`, `n ≤ max_n`, where
///
/// `Σ H_{m,n}(x, y) tᵐ t'ⁿ / (m! n!) = exp(−tt' + tx + t'y)`.
///
/// Filled with `H_{0,n} = yⁿ` and `H_{m+1,n} = x·H_{m,n} − n·H_{m,n−1}`.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    x: C64,
    y: C64,
    values: Array2<C64>,
}

impl HermiteTable {
    pub fn new(max_m: usize, max_n: usize, x: C64, y: C64) -> Result<Self> {
        if max_m > MAX_HERMITE_ORDER || max_n > MAX_HERMITE_ORDER {
            return Err(Error::OutOfRange(format!(
                "Hermite order ({max_m}, {max_n}) exceeds {MAX_HERMITE_ORDER}"
            )));
        }
        if !is_finite(x) || !is_finite(y) {
            return Err(Error::NonFinite("Hermite argument".into()));
        }
        let mut values = Array2::<C64>::zeros((max_m + 1, max_n + 1));
        let mut power = C64::new(1.0, 0.0);
        for n in 0..=max_n {
            values[[0, n]] = power;
            power *= y;
        }
        for m in 0..max_m {
            for n in 0..=max_n {
                let lower = if n > 0 {
                    values[[m, n - 1]] * n as f64
                } else {
                    C64::new(0.0, 0.0)
                };
                values[[m + 1, n]] = x * values[[m, n]] - lower;
            }
        }
        Ok(Self { x, y, values })
    }

    pub fn max_m(&self) -> usize {
        self.values.nrows() - 1
    }

    pub fn max_n(&self) -> usize {
        self.values.ncols() - 1
    }

    pub fn args(&self) -> (C64, C64) {
        (self.x, self.y)
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.values[[m, n]]
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }
}

/// `H_{m,n}(x, y)`.
pub fn hermite_mn(m: usize, n: usize, x: C64, y: C64) -> Result<C64> {
    Ok(HermiteTable::new(m, n, x, y)?.get(m, n))
}

fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `|η = η1 + iη2⟩`, common eigenvector of `x̂₁ − x̂₂` and `p̂₁ + p̂₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaParams {
    pub eta1: f64,
    pub eta2: f64,
}

impl EtaParams {
    pub fn new(eta1: f64, eta2: f64) -> Self {
        Self { eta1, eta2 }
    }

    pub fn value(&self) -> C64 {
        C64::new(self.eta1, self.eta2)
    }
}

/// `|ξ = ξ1 + iξ2⟩`, common eigenvector of `x̂₁ + x̂₂` and `p̂₁ − p̂₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiParams {
    pub xi1: f64,
    pub xi2: f64,
}

impl XiParams {
    pub fn new(xi1: f64, xi2: f64) -> Self {
        Self { xi1, xi2 }
    }

    pub fn value(&self) -> C64 {
        C64::new(self.xi1, self.xi2)
    }
}

/// Sign of the `a†b†` term in the entangled-state exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Family {
    /// `exp[ηa† − η*b† + a†b†]`, amplitudes carry `(−1)ⁿ`.
    Eta,
    /// `exp[ξa† + ξ*b† − a†b†]`.
    Xi,
}

/// Writes the `d²` amplitudes of a truncated entangled state into `out`.
///
/// Uses the normalized recurrence for `h_{m,n} = H_{m,n}/√(m!n!)`:
/// `h_{0,n} = h_{0,n−1}·y/√n`, `h_{m+1,n} = (x·h_{m,n} − √n·h_{m,n−1})/√(m+1)`,
/// which keeps intermediate values bounded by the amplitudes themselves.
pub(crate) fn fill_entangled(family: Family, z: C64, cutoff: usize, out: &mut [C64]) {
    let d = cutoff;
    debug_assert_eq!(out.len(), d * d);
    let x = z;
    let y = z.conj();
    let gauss = (-0.5 * z.norm_sqr()).exp();

    out[0] = C64::new(gauss, 0.0);
    for n in 1..d {
        out[n] = out[n - 1] * y / (n as f64).sqrt();
    }
    for m in 0..d - 1 {
        let inv = 1.0 / ((m + 1) as f64).sqrt();
        for n in 0..d {
            let lower = if n > 0 {
                out[m * d + n - 1] * (n as f64).sqrt()
            } else {
                C64::new(0.0, 0.0)
            };
            out[(m + 1) * d + n] = (x * out[m * d + n] - lower) * inv;
        }
    }
    if family == Family::Eta {
        for m in 0..d {
            for n in (1..d).step_by(2) {
                out[m * d + n] = -out[m * d + n];
            }
        }
    }
}

fn entangled(family: Family, z: C64, cutoff: usize) -> Result<TwoModeState> {
    if cutoff == 0 {
        return Err(Error::InvalidDimension("cutoff must be at least 1".into()));
    }
    if !is_finite(z) {
        return Err(Error::NonFinite("entangled-state parameter".into()));
    }
    let mut amps = vec![C64::new(0.0, 0.0); cutoff * cutoff];
    fill_entangled(family, z, cutoff, &mut amps);
    TwoModeState::from_amplitudes(cutoff, Array1::from(amps))
}

/// Truncated `|η⟩`: `c_{m,n} = e^{−|η|²/2} (−1)ⁿ H_{m,n}(η, η*) / √(m!n!)`.
pub fn eta_state(p: EtaParams, cutoff: usize) -> Result<TwoModeState> {
    entangled(Family::Eta, p.value(), cutoff)
}

/// Truncated `|ξ⟩`: `c_{m,n} = e^{−|ξ|²/2} H_{m,n}(ξ, ξ*) / √(m!n!)`.
pub fn xi_state(p: XiParams, cutoff: usize) -> Result<TwoModeState> {
    entangled(Family::Xi, p.value(), cutoff)
}

/// `|m⟩_a |n⟩_b`.
pub fn fock_state(m: usize, n: usize, cutoff: usize) -> Result<TwoModeState> {
    if m >= cutoff || n >= cutoff {
        return Err(Error::OutOfRange(format!(
            "Fock label ({m}, {n}) needs cutoff > {}",
            m.max(n)
        )));
    }
    let mut amps = Array1::zeros(cutoff * cutoff);
    amps[m * cutoff + n] = C64::new(1.0, 0.0);
    TwoModeState::from_amplitudes(cutoff, amps)
}

pub fn vacuum(cutoff: usize) -> Result<SingleModeState> {
    let mut amps = vec![C64::new(0.0, 0.0); cutoff];
    if let Some(first) = amps.first_mut() {
        *first = C64::new(1.0, 0.0);
    }
    SingleModeState::from_amplitudes(amps)
}

/// `c_n = e^{−|α|²/2} αⁿ / √(n!)` for `n < cutoff`.
///
/// Logs a warning when `|α|² > cutoff/4`, where truncation starts to bite.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<SingleModeState> {
    if !is_finite(alpha) {
        return Err(Error::NonFinite("coherent amplitude".into()));
    }
    if alpha.norm_sqr() > cutoff as f64 / 4.0 {
        log::warn!(
            "coherent state |alpha|^2 = {:.3} exceeds cutoff/4 = {:.3}; truncation may be significant",
            alpha.norm_sqr(),
            cutoff as f64 / 4.0
        );
    }
    let mut amps = Vec::with_capacity(cutoff);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    SingleModeState::from_amplitudes(amps)
}

/// Squeezed vacuum: `c_{2k} = sech^{1/2}(r) (−tanh r)^k √((2k)!) / (2^k k!)`,
/// odd amplitudes zero.
pub fn squeezed_vacuum(r: f64, cutoff: usize) -> Result<SingleModeState> {
    if !r.is_finite() {
        return Err(Error::NonFinite("squeezing parameter".into()));
    }
    let t = r.tanh();
    let mut amps = vec![C64::new(0.0, 0.0); cutoff];
    let mut c = (1.0 / r.cosh()).sqrt();
    let mut k = 0usize;
    while 2 * k < cutoff {
        if k > 0 {
            let two_k = (2 * k) as f64;
            c *= -t * (two_k * (two_k - 1.0)).sqrt() / two_k;
        }
        amps[2 * k] = C64::new(c, 0.0);
        k += 1;
    }
    SingleModeState::from_amplitudes(amps)
}

/// `(|N,0⟩ + |0,N⟩)/√2`. For `N = 0` both terms coincide and the result is
/// the normalized vacuum.
pub fn noon_state(photons: usize, cutoff: usize) -> Result<TwoModeState> {
    if photons >= cutoff {
        return Err(Error::OutOfRange(format!(
            "NOON N = {photons} needs cutoff > {photons}"
        )));
    }
    if photons == 0 {
        log::warn!("NOON state with N = 0 collapses to the vacuum |0,0>");
        return fock_state(0, 0, cutoff);
    }
    let mut amps = Array1::zeros(cutoff * cutoff);
    let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[photons * cutoff] = amp;
    amps[photons] = amp;
    TwoModeState::from_amplitudes(cutoff, amps)
}

/// Interferometer input described by a short string.
///
/// | spec                 | state                                  |
/// |----------------------|----------------------------------------|
/// | `fock:m,n`           | `|m⟩_a|n⟩_b`                          |
/// | `noon:N`             | `(|N,0⟩ + |0,N⟩)/√2`                   |
/// | `coherent:re,im`     | `|α⟩_a|0⟩_b`                           |
/// | `sqvac:r`            | `|0⟩_a|r⟩_b`                           |
/// | `cs-sv:zre,zim,r`    | `|z⟩_a|r⟩_b`                           |
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Fock { m: usize, n: usize },
    Noon { photons: usize },
    Coherent { alpha: C64 },
    SqueezedVacuum { r: f64 },
    CoherentSqueezed { z: C64, r: f64 },
}

impl StateSpec {
    pub fn build(&self, cutoff: usize) -> Result<TwoModeState> {
        match *self {
            StateSpec::Fock { m, n } => fock_state(m, n, cutoff),
            StateSpec::Noon { photons } => noon_state(photons, cutoff),
            StateSpec::Coherent { alpha } => {
                TwoModeState::product(&coherent_state(alpha, cutoff)?, &vacuum(cutoff)?)
            }
            StateSpec::SqueezedVacuum { r } => {
                TwoModeState::product(&vacuum(cutoff)?, &squeezed_vacuum(r, cutoff)?)
            }
            StateSpec::CoherentSqueezed { z, r } => {
                TwoModeState::product(&coherent_state(z, cutoff)?, &squeezed_vacuum(r, cutoff)?)
            }
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("state spec '{s}': {why}"));
        let (kind, args) = s.split_once(':').ok_or_else(|| bad("expected KIND:ARGS"))?;
        let fields: Vec<&str> = args.split(',').map(str::trim).collect();
        let float = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| bad(&format!("bad number '{t}'")))
        };
        let int = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| bad(&format!("bad integer '{t}'")))
        };
        let arity = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(bad(&format!(
                    "expected {n} argument(s), got {}",
                    fields.len()
                )))
            }
        };
        match kind.trim() {
            "fock" => {
                arity(2)?;
                Ok(StateSpec::Fock {
                    m: int(fields[0])?,
                    n: int(fields[1])?,
                })
            }
            "noon" => {
                arity(1)?;
                Ok(StateSpec::Noon {
                    photons: int(fields[0])?,
                })
            }
            "coherent" => {
                arity(2)?;
                Ok(StateSpec::Coherent {
                    alpha: C64::new(float(fields[0])?, float(fields[1])?),
                })
            }
            "sqvac" => {
                arity(1)?;
                Ok(StateSpec::SqueezedVacuum {
                    r: float(fields[0])?,
                })
            }
            "cs-sv" => {
                arity(3)?;
                Ok(StateSpec::CoherentSqueezed {
                    z: C64::new(float(fields[0])?, float(fields[1])?),
                    r: float(fields[2])?,
                })
            }
            other => Err(bad(&format!("unknown kind '{other}'"))),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Fock { m, n } => write!(f, "fock:{m},{n}"),
            StateSpec::Noon { photons } => write!(f, "noon:{photons}"),
            StateSpec::Coherent { alpha } => write!(f, "coherent:{},{}", alpha.re, alpha.im),
            StateSpec::SqueezedVacuum { r } => write!(f, "sqvac:{r}"),
            StateSpec::CoherentSqueezed { z, r } => write!(f, "cs-sv:{},{},{r}", z.re, z.im),
        }
    }
}
