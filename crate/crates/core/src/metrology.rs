//! Parity-detection interferometry: input state, optional first beam
//! splitter, phase shift `exp[iφ(a†a − b†b)/2]`, then parity detection
//! expressed as the projector `μ̂` acting on the pre-detection state.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::angle::{parse_angle, same_angle, unit_phase};
use crate::error::{Error, Result};
use crate::projectors::{mu_fock, BsParams, ProjectorMethod, QuadratureOptions};
use crate::quadrature::{integrate, QuadratureGrid};
use crate::states::{fill_entangled, noon_state, Family, StateSpec};
use crate::tensor::{
    expectation, matrix_exponential, two_mode_annihilators, OperatorMatrix, Space, TwoModeState,
};
use crate::C64;

/// Largest truncation loss `1 − ‖ψ_in‖²` accepted for an input state.
pub const MAX_NORM_DEFICIT: f64 = 1e-8;
/// Half-width of the central difference used for sensitivities.
pub const SENSITIVITY_STEP: f64 = 1e-4;
/// Slopes below this are treated as stationary points with no sensitivity.
pub const MIN_SLOPE: f64 = 1e-6;
/// Agreement required between the two routes of [`noon_pipeline_check`].
pub const NOON_ROUTE_TOLERANCE: f64 = 1e-6;

/// First beam splitter of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bs1 {
    None,
    /// `exp[iπ(a†b + ab†)/4]`.
    SymmetricI,
    /// `exp[(θ/2)(a†b e^{iφ} − ab† e^{−iφ})]`.
    Custom(BsParams),
}

impl Bs1 {
    pub fn matrix(&self, cutoff: usize) -> Result<Option<OperatorMatrix>> {
        match *self {
            Bs1::None => Ok(None),
            Bs1::SymmetricI => bs1_symmetric_i(cutoff).map(Some),
            Bs1::Custom(p) => crate::projectors::beam_splitter(p, cutoff).map(Some),
        }
    }
}

impl FromStr for Bs1 {
    type Err = Error;

    /// `none`, `symmetric-i`, or `bs:THETA,PHI`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Parse(format!(
                "first beam splitter '{s}': expected none, symmetric-i or bs:THETA,PHI"
            ))
        };
        match s.trim() {
            "none" => Ok(Bs1::None),
            "symmetric-i" => Ok(Bs1::SymmetricI),
            other => {
                let args = other.strip_prefix("bs:").ok_or_else(bad)?;
                let (t, p) = args.split_once(',').ok_or_else(bad)?;
                Ok(Bs1::Custom(BsParams::new(
                    parse_angle(t)?,
                    parse_angle(p)?,
                )?))
            }
        }
    }
}

impl fmt::Display for Bs1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bs1::None => f.write_str("none"),
            Bs1::SymmetricI => f.write_str("symmetric-i"),
            Bs1::Custom(p) => write!(f, "bs:{},{}", p.theta, p.phi),
        }
    }
}

/// Full description of one interferometer configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerSpec {
    pub input: StateSpec,
    pub bs1: Bs1,
    pub phase: f64,
    pub detection: ProjectorMethod,
    pub cutoff: usize,
    /// Grid for quadrature detection routes; `None` uses the route default.
    pub grid: Option<QuadratureGrid>,
}

/// `exp[iφ(a†a − b†b)/2]`: diagonal entries `e^{iφ(m−n)/2}`.
pub fn phase_shifter(phi: f64, cutoff: usize) -> Result<OperatorMatrix> {
    let d = cutoff;
    let diag: Vec<C64> = (0..d * d)
        .map(|k| unit_phase(phi * ((k / d) as f64 - (k % d) as f64) / 2.0))
        .collect();
    OperatorMatrix::diagonal(cutoff, Space::TwoMode, &diag)
}

/// `exp[iπ(A†B + AB†)/4]`.
///
/// Unlike the balanced splitter of [`crate::projectors::beam_splitter`] the
/// generator carries a factor `i`, so `|1,0⟩ ↦ (|1,0⟩ + i|0,1⟩)/√2`.
pub fn bs1_symmetric_i(cutoff: usize) -> Result<OperatorMatrix> {
    let (a, b) = two_mode_annihilators(cutoff)?;
    let hop = a.adjoint().matmul(&b)?;
    let generator = hop.add(&hop.adjoint())?.scale(C64::new(0.0, PI / 4.0));
    matrix_exponential(&generator)
}

/// `(i^N/2)[e^{iNφ} + (−1)^N e^{−iNφ}]`; real for every `N`.
pub fn noon_parity_closed(photons: usize, phi: f64) -> C64 {
    let n = photons as f64;
    let i_n = unit_phase(n * FRAC_PI_2);
    let parity = if photons.is_multiple_of(2) { 1.0 } else { -1.0 };
    i_n * 0.5 * (C64::from_polar(1.0, n * phi) + parity * C64::from_polar(1.0, -n * phi))
}

/// Parity signal for `|z⟩_a ⊗ |r⟩_b` behind the `i`-convention first beam
/// splitter:
///
/// `exp{[2(cosφ − 1 − s)|z|² − sinh2r · sin²φ · Re(z²)] / [2(1 + s)]} / √(1 + s)`
/// with `s = sinh²r · sin²φ`.
pub fn cs_sv_parity_closed(z: C64, r: f64, phi: f64) -> f64 {
    let sin2 = phi.sin().powi(2);
    let s = r.sinh().powi(2) * sin2;
    let numer = 2.0 * (phi.cos() - 1.0 - s) * z.norm_sqr() - (2.0 * r).sinh() * sin2 * (z * z).re;
    (numer / (2.0 * (1.0 + s))).exp() / (1.0 + s).sqrt()
}

/// Real part and the discarded imaginary part of a parity expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParitySignal {
    pub value: f64,
    pub imaginary_residual: f64,
}

/// An interferometer with everything but the phase fixed: the state after the
/// first beam splitter and the detection projector are built once.
pub struct Interferometer {
    spec: InterferometerSpec,
    prepared: TwoModeState,
    projector: OperatorMatrix,
}

impl Interferometer {
    pub fn prepare(spec: &InterferometerSpec) -> Result<Self> {
        let input = spec.input.build(spec.cutoff)?;
        let deficit = input.norm_deficit();
        if deficit > MAX_NORM_DEFICIT {
            return Err(Error::Truncation {
                deficit,
                limit: MAX_NORM_DEFICIT,
            });
        }
        let prepared = match spec.bs1.matrix(spec.cutoff)? {
            Some(u) => u.apply(&input)?,
            None => input,
        };
        let (projector, _) = spec.detection.build(
            spec.cutoff,
            spec.grid.as_ref(),
            QuadratureOptions::default(),
        )?;
        Ok(Self {
            spec: *spec,
            prepared,
            projector,
        })
    }

    pub fn spec(&self) -> &InterferometerSpec {
        &self.spec
    }

    pub fn projector(&self) -> &OperatorMatrix {
        &self.projector
    }

    /// State just before detection at phase `phi`.
    pub fn state_at(&self, phi: f64) -> TwoModeState {
        self.prepared
            .map_indexed(|m, n, z| z * unit_phase(phi * (m as f64 - n as f64) / 2.0))
    }

    pub fn signal(&self, phi: f64) -> Result<ParitySignal> {
        let v = expectation(&self.state_at(phi), &self.projector)?;
        Ok(ParitySignal {
            value: v.re,
            imaginary_residual: v.im.abs(),
        })
    }

    /// Closed-form reference, when the configuration matches one: NOON input
    /// without a first splitter, or coherent⊗squeezed behind the `i`-convention
    /// splitter, both detected at `θ = π/2, φ_BS = −π/2`.
    pub fn closed_form(&self, phi: f64) -> Option<f64> {
        closed_form(&self.spec, phi)
    }

    /// `√(1 − ⟨Π⟩²) / |d⟨Π⟩/dφ|`, using `Π² = 1`; `None` at stationary points.
    pub fn sensitivity(&self, phi: f64) -> Result<Option<f64>> {
        let s = self.signal(phi)?.value;
        let up = self.signal(phi + SENSITIVITY_STEP)?.value;
        let down = self.signal(phi - SENSITIVITY_STEP)?.value;
        let slope = (up - down) / (2.0 * SENSITIVITY_STEP);
        let spread = (1.0 - s * s).max(0.0).sqrt();
        let value = spread / slope.abs();
        Ok((slope.abs() >= MIN_SLOPE && value.is_finite()).then_some(value))
    }
}

fn detects_minus_quarter(method: &ProjectorMethod) -> bool {
    method
        .equivalent_bs()
        .is_some_and(|p| same_angle(p.theta, FRAC_PI_2) && same_angle(p.phi, -FRAC_PI_2))
}

fn closed_form(spec: &InterferometerSpec, phi: f64) -> Option<f64> {
    if !detects_minus_quarter(&spec.detection) {
        return None;
    }
    match (spec.input, spec.bs1) {
        (StateSpec::Noon { photons }, Bs1::None) => Some(noon_parity_closed(photons, phi).re),
        (StateSpec::CoherentSqueezed { z, r }, Bs1::SymmetricI) => {
            Some(cs_sv_parity_closed(z, r, phi))
        }
        _ => None,
    }
}

/// `⟨ψ|μ̂|ψ⟩` for the configured interferometer.
pub fn parity_signal(spec: &InterferometerSpec) -> Result<f64> {
    let signal = Interferometer::prepare(spec)?.signal(spec.phase)?;
    if signal.imaginary_residual > 1e-8 {
        log::warn!(
            "parity expectation has imaginary part {:.3e}; projector may not be Hermitian",
            signal.imaginary_residual
        );
    }
    Ok(signal.value)
}

/// NOON signal computed twice: as the `η`-plane integral
/// `∫ dη1 dη2/π ⟨ψ|η1 + iη2⟩⟨η2 + iη1|ψ⟩` on the default grid and as
/// `⟨ψ|μ̂(φ_BS = −π/2)|ψ⟩`. Returns the quadrature value.
pub fn noon_pipeline_check(photons: usize, phi: f64, cutoff: usize) -> Result<f64> {
    let psi = noon_state(photons, cutoff)?
        .map_indexed(|m, n, z| z * unit_phase(phi * (m as f64 - n as f64) / 2.0));
    let d = cutoff;
    let amps = psi.amplitudes();

    let grid = QuadratureGrid::default_plane();
    let integral = integrate(
        |p| {
            let mut ket = vec![C64::new(0.0, 0.0); d * d];
            let mut bra = vec![C64::new(0.0, 0.0); d * d];
            fill_entangled(Family::Eta, C64::new(p[0], p[1]), d, &mut ket);
            fill_entangled(Family::Eta, C64::new(p[1], p[0]), d, &mut bra);
            // ⟨ψ|η⟩ and ⟨η̃|ψ⟩
            let left: C64 = amps.iter().zip(&ket).map(|(a, k)| a.conj() * k).sum();
            let right: C64 = amps.iter().zip(&bra).map(|(a, b)| b.conj() * a).sum();
            left * right
        },
        &grid,
    )? / PI;

    let matrix = expectation(&psi, &mu_fock(-FRAC_PI_2, cutoff)?)?;
    let diff = (integral.re - matrix.re).abs();
    if diff > NOON_ROUTE_TOLERANCE || integral.im.abs() > NOON_ROUTE_TOLERANCE {
        return Err(Error::Disagreement {
            quadrature: integral.re,
            matrix: matrix.re,
            diff: diff.max(integral.im.abs()),
            tol: NOON_ROUTE_TOLERANCE,
        });
    }
    Ok(integral.re)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub phi: f64,
    pub signal: f64,
    pub closed_form: Option<f64>,
    pub abs_err: Option<f64>,
    pub sensitivity: Option<f64>,
    #[serde(skip)]
    pub imaginary_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn max_abs_err(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.abs_err).reduce(f64::max)
    }

    pub fn max_imaginary_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.imaginary_residual)
            .fold(0.0, f64::max)
    }

    /// CSV with header `phi,signal,closed_form,abs_err,sensitivity`; absent
    /// values are empty fields, floats use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,signal,closed_form,abs_err,sensitivity\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{:?},{:?},{},{},{}\n",
                r.phi,
                r.signal,
                opt(r.closed_form),
                opt(r.abs_err),
                opt(r.sensitivity)
            ));
        }
        out
    }
}

/// Signal on `steps` equally spaced phases from `phi_min` to `phi_max`
/// inclusive.
pub fn phase_sweep(
    spec: &InterferometerSpec,
    phi_min: f64,
    phi_max: f64,
    steps: usize,
) -> Result<SweepResult> {
    if steps < 2 {
        return Err(Error::OutOfRange(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    if !(phi_min.is_finite() && phi_max.is_finite()) {
        return Err(Error::NonFinite("sweep range".into()));
    }
    let ifm = Interferometer::prepare(spec)?;
    let span = phi_max - phi_min;
    let rows: Result<Vec<SweepRow>> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let phi = if i == steps - 1 {
                phi_max
            } else {
                phi_min + span * i as f64 / (steps - 1) as f64
            };
            let signal = ifm.signal(phi)?;
            let closed_form = ifm.closed_form(phi);
            Ok(SweepRow {
                phi,
                signal: signal.value,
                closed_form,
                abs_err: closed_form.map(|c| (c - signal.value).abs()),
                sensitivity: ifm.sensitivity(phi)?,
                imaginary_residual: signal.imaginary_residual,
            })
        })
        .collect();
    Ok(SweepResult { rows: rows? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::fock_state;

    fn noon_spec(photons: usize, phase: f64, cutoff: usize) -> InterferometerSpec {
        InterferometerSpec {
            input: StateSpec::Noon { photons },
            bs1: Bs1::None,
            phase,
            detection: ProjectorMethod::Fock { phi: -FRAC_PI_2 },
            cutoff,
            grid: None,
        }
    }

    #[test]
    fn phase_shifter_on_fock() {
        assert_eq!(
            phase_shifter(0.0, 4).unwrap(),
            OperatorMatrix::identity(4, Space::TwoMode).unwrap()
        );
        let phi = 0.37;
        let out = phase_shifter(phi, 5)
            .unwrap()
            .apply(&fock_state(3, 0, 5).unwrap())
            .unwrap();
        assert!((out.amplitude(3, 0) - C64::from_polar(1.0, phi * 1.5)).norm() < 1e-15);
        assert!(phase_shifter(phi, 5).unwrap().is_unitary(1e-15));
    }

    #[test]
    fn symmetric_splitter_single_photon() {
        let u = bs1_symmetric_i(4).unwrap();
        let out = u.apply(&fock_state(1, 0, 4).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitude(1, 0) - C64::new(h, 0.0)).norm() < 1e-14);
        assert!((out.amplitude(0, 1) - C64::new(0.0, h)).norm() < 1e-14);
        assert!(u.is_unitary(1e-10));
    }

    #[test]
    fn closed_forms_at_reference_points() {
        assert!((noon_parity_closed(0, 1.3) - 1.0).norm() < 1e-15);
        for &phi in &[0.0, 0.4, 2.0] {
            assert!((noon_parity_closed(2, phi).re + (2.0 * phi).cos()).abs() < 1e-14);
            assert!((noon_parity_closed(1, phi).re + phi.sin()).abs() < 1e-14);
        }
        assert!((noon_parity_closed(1, FRAC_PI_2).re + 1.0).abs() < 1e-15);
        assert_eq!(cs_sv_parity_closed(C64::new(0.8, 0.1), 0.4, 0.0), 1.0);
        assert!((cs_sv_parity_closed(C64::new(0.0, 0.0), 0.0, 1.2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noon_single_photon_signal() {
        for &phi in &[0.0, 0.3, 1.0, -2.2] {
            let v = parity_signal(&noon_spec(1, phi, 8)).unwrap();
            assert!((v + phi.sin()).abs() < 1e-12, "phi={phi}");
        }
    }

    #[test]
    fn vacuum_signal_is_one() {
        let spec = InterferometerSpec {
            input: StateSpec::Fock { m: 0, n: 0 },
            bs1: Bs1::SymmetricI,
            phase: 0.9,
            detection: ProjectorMethod::Conjugation(BsParams::new(1.0, 0.3).unwrap()),
            cutoff: 4,
            grid: None,
        };
        assert!((parity_signal(&spec).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_guard() {
        let spec = InterferometerSpec {
            input: StateSpec::Coherent {
                alpha: C64::new(3.0, 0.0),
            },
            bs1: Bs1::None,
            phase: 0.0,
            detection: ProjectorMethod::Parity,
            cutoff: 8,
            grid: None,
        };
        let err = parity_signal(&spec).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
        assert!(err.to_string().contains("increase the cutoff"));
    }

    #[test]
    fn sweep_endpoints_and_columns() {
        let res = phase_sweep(&noon_spec(1, 0.0, 6), 0.0, 1.0, 5).unwrap();
        assert_eq!(res.rows.len(), 5);
        assert_eq!(res.rows[0].phi, 0.0);
        assert_eq!(res.rows[4].phi, 1.0);
        assert!(res.max_abs_err().unwrap() < 1e-12);
        let csv = res.to_csv();
        assert!(csv.starts_with("phi,signal,closed_form,abs_err,sensitivity\n"));
        assert_eq!(csv.lines().count(), 6);
        assert!(phase_sweep(&noon_spec(1, 0.0, 6), 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn closed_form_only_for_matching_configuration() {
        let mut spec = noon_spec(2, 0.0, 6);
        spec.detection = ProjectorMethod::Fock { phi: FRAC_PI_2 };
        let res = phase_sweep(&spec, 0.0, 1.0, 3).unwrap();
        assert!(res
            .rows
            .iter()
            .all(|r| r.closed_form.is_none() && r.abs_err.is_none()));
    }

    #[test]
    fn bs1_tags() {
        assert_eq!("none".parse::<Bs1>().unwrap(), Bs1::None);
        assert_eq!("symmetric-i".parse::<Bs1>().unwrap(), Bs1::SymmetricI);
        let b: Bs1 = "bs:pi/2,0".parse().unwrap();
        assert_eq!(b, Bs1::Custom(BsParams::new(FRAC_PI_2, 0.0).unwrap()));
        assert!("bs:1".parse::<Bs1>().is_err());
    }
}
