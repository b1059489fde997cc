//! Parity detection behind a beam splitter, `μ̂ = U_BS† (I ⊗ Π) U_BS`, built
//! by every available route.
//!
//! | route                    | builder                         | exact on               |
//! |--------------------------|---------------------------------|------------------------|
//! | conjugation              | [`mu_conjugation`]              | sectors `m+n ≤ d−1`    |
//! | Fock sum (θ = π/2)       | [`mu_fock`]                     | every entry            |
//! | `|η⟩` quadrature          | [`mu_from_eta_quadrature`]      | up to grid error       |
//! | `|ξ⟩` quadrature          | [`mu_from_xi_quadrature`]       | up to grid error       |
//! | coherent 4-D quadrature  | [`mu_coherent_quadrature`]      | up to grid error       |
//!
//! The `|η⟩` route integrates `|η1 + iη2⟩⟨η2 + iη1|`, which equals `μ̂` at
//! `θ = π/2, φ = −π/2`; the `|ξ⟩` route gives `φ = +π/2`. Quadrature entries
//! are exact matrix elements of the infinite-dimensional operator up to the
//! quadrature error, since each entry only involves two Fock amplitudes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use serde::Serialize;

use crate::angle::{parse_angle, unit_phase};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_outer, GridDim, QuadratureGrid};
use crate::states::{fill_entangled, Family};
use crate::tensor::{
    matrix_exponential, two_mode_annihilators, ModeIndexer, OperatorMatrix, Space,
};
use crate::C64;

/// Nodes above which the 4-D coherent quadrature refuses to run unless forced.
pub const COHERENT_4D_NODE_LIMIT: usize = 100_000_000;
/// Largest cutoff accepted by the 4-D coherent quadrature unless forced.
pub const COHERENT_4D_MAX_CUTOFF: usize = 4;

/// Beam splitter `exp[(θ/2)(a†b e^{iφ} − ab† e^{−iφ})]`.
///
/// Canonical ranges are `θ ∈ [0, π]` and `φ ∈ (−π, π]`; other values are
/// accepted as-is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsParams {
    pub theta: f64,
    pub phi: f64,
}

impl BsParams {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::NonFinite(format!(
                "beam splitter angles ({theta}, {phi})"
            )));
        }
        Ok(Self { theta, phi })
    }

    /// 50:50 splitter with phase `φ`.
    pub fn balanced(phi: f64) -> Result<Self> {
        Self::new(FRAC_PI_2, phi)
    }
}

/// The anti-Hermitian generator `(θ/2)(A†B e^{iφ} − AB† e^{−iφ})`.
pub fn bs_generator(p: BsParams, cutoff: usize) -> Result<OperatorMatrix> {
    let (a, b) = two_mode_annihilators(cutoff)?;
    let hop = a.adjoint().matmul(&b)?; // A†B
    let forward = hop.scale(C64::from_polar(p.theta / 2.0, p.phi));
    // AB† = (A†B)†, so the generator is X − X† with X = (θ/2) e^{iφ} A†B.
    forward.sub(&forward.adjoint())
}

pub fn beam_splitter(p: BsParams, cutoff: usize) -> Result<OperatorMatrix> {
    matrix_exponential(&bs_generator(p, cutoff)?)
}

/// `(−1)^{b†b}` on a single mode.
pub fn parity_single(cutoff: usize) -> Result<OperatorMatrix> {
    let diag: Vec<C64> = (0..cutoff).map(|n| C64::new(sign(n), 0.0)).collect();
    OperatorMatrix::diagonal(cutoff, Space::Single, &diag)
}

/// `I ⊗ (−1)^{b†b}`: entry `(−1)ⁿ` at `(m, n)`.
pub fn parity_op(cutoff: usize) -> Result<OperatorMatrix> {
    let ix = ModeIndexer::new(cutoff)?;
    let diag: Vec<C64> = (0..ix.dim())
        .map(|k| C64::new(sign(ix.labels(k).1), 0.0))
        .collect();
    OperatorMatrix::diagonal(cutoff, Space::TwoMode, &diag)
}

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `U† (I ⊗ Π) U` with `U` from [`beam_splitter`].
pub fn mu_conjugation(p: BsParams, cutoff: usize) -> Result<OperatorMatrix> {
    let u = beam_splitter(p, cutoff)?;
    let parity = parity_op(cutoff)?;
    u.adjoint().matmul(&parity.matmul(&u)?)
}

/// `Σ e^{i(m−n)φ} |m,n⟩⟨n,m|`, the balanced (`θ = π/2`) projector.
pub fn mu_fock(phi: f64, cutoff: usize) -> Result<OperatorMatrix> {
    fock_sum(cutoff, |m, n| unit_phase((m as f64 - n as f64) * phi))
}

/// `Σ i^{n−m} |m,n⟩⟨n,m|`, the discrete form of the `|η⟩` projector.
pub fn mu_fock_eta_form(cutoff: usize) -> Result<OperatorMatrix> {
    fock_sum(cutoff, |m, n| i_power(n as i64 - m as i64))
}

/// `Σ i^{m−n} |m,n⟩⟨n,m|`, the discrete form of the `|ξ⟩` projector.
pub fn mu_fock_xi_form(cutoff: usize) -> Result<OperatorMatrix> {
    fock_sum(cutoff, |m, n| i_power(m as i64 - n as i64))
}

fn i_power(k: i64) -> C64 {
    match k.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn fock_sum(cutoff: usize, coeff: impl Fn(usize, usize) -> C64) -> Result<OperatorMatrix> {
    let ix = ModeIndexer::new(cutoff)?;
    let mut entries = Array2::zeros((ix.dim(), ix.dim()));
    for m in 0..cutoff {
        for n in 0..cutoff {
            entries[[ix.index(m, n), ix.index(n, m)]] = coeff(m, n);
        }
    }
    OperatorMatrix::from_array(cutoff, Space::TwoMode, entries)
}

/// Closed form of `⟨α′,β′| μ̂(θ, φ) |α,β⟩` from the normal-ordered exponential
/// `:exp[a†a cosθ − b†b cosθ + a†b e^{iφ} sinθ + ab† e^{−iφ} sinθ − a†a − b†b]:`,
/// with operators replaced by coherent eigenvalues.
pub fn mu_coherent_matrix_element(
    p: BsParams,
    alpha: C64,
    beta: C64,
    alpha_out: C64,
    beta_out: C64,
) -> C64 {
    let (s, c) = p.theta.sin_cos();
    let e = C64::from_polar(1.0, p.phi);
    let ao = alpha_out.conj();
    let bo = beta_out.conj();
    let exponent = ao * alpha * c - bo * beta * c + ao * beta * e * s + bo * alpha * e.conj() * s
        - ao * alpha
        - bo * beta;
    exponent.exp() * coherent_overlap(alpha_out, alpha) * coherent_overlap(beta_out, beta)
}

/// `⟨β|α⟩ = exp(−|β|²/2 − |α|²/2 + β*α)`.
pub fn coherent_overlap(bra: C64, ket: C64) -> C64 {
    (bra.conj() * ket - 0.5 * (bra.norm_sqr() + ket.norm_sqr())).exp()
}

/// Largest `|M1 − M2|` over rows and columns with total photon number `≤ block`.
pub fn compare_projectors(m1: &OperatorMatrix, m2: &OperatorMatrix, block: usize) -> Result<f64> {
    if m1.cutoff() != m2.cutoff() {
        return Err(Error::CutoffMismatch {
            left: m1.cutoff(),
            right: m2.cutoff(),
        });
    }
    if m1.space() != Space::TwoMode || m2.space() != Space::TwoMode {
        return Err(Error::InvalidDimension(
            "compare_projectors needs two-mode operators".into(),
        ));
    }
    let keep = block_indices(m1.cutoff(), block);
    let mut worst = 0.0_f64;
    for &r in &keep {
        for &c in &keep {
            worst = worst.max((m1.get(r, c) - m2.get(r, c)).norm());
        }
    }
    Ok(worst)
}

/// Flat indices with `m + n ≤ block`, ascending.
pub fn block_indices(cutoff: usize, block: usize) -> Vec<usize> {
    (0..cutoff * cutoff)
        .filter(|&k| k / cutoff + k % cutoff <= block)
        .collect()
}

/// Default comparison block `K = d/2 − 2`, floored at zero.
pub fn default_block(cutoff: usize) -> usize {
    (cutoff / 2).saturating_sub(2)
}

#[derive(Debug, Clone, Serialize)]
pub struct GridDescriptor {
    pub radius: f64,
    pub step: f64,
    pub dim: usize,
    pub nodes: usize,
}

impl From<&QuadratureGrid> for GridDescriptor {
    fn from(g: &QuadratureGrid) -> Self {
        Self {
            radius: g.radius(),
            step: g.effective_step(),
            dim: g.dim().rank(),
            nodes: g.node_count(),
        }
    }
}

/// What was built, how, and how well.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectorBuildReport {
    pub method: String,
    pub cutoff: usize,
    pub grid: Option<GridDescriptor>,
    pub hermiticity_residual: f64,
    pub seconds: f64,
    /// Block-restricted max difference against the same quadrature on a grid
    /// with twice the step, when requested.
    pub convergence: Option<f64>,
    pub warnings: Vec<String>,
}

/// Settings shared by the quadrature routes.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadratureOptions {
    /// Also build on a step-`2h` grid and report the block difference.
    pub check_convergence: bool,
    /// Block used for the convergence comparison; defaults to `d/2 − 2`.
    pub block: Option<usize>,
    /// Bypass the 4-D cost guard.
    pub force: bool,
}

fn grid_warning(grid: &QuadratureGrid, needed: f64) -> Option<String> {
    (grid.radius() < needed).then(|| {
        format!(
            "grid radius {} is below the recommended {:.3}; high Fock entries may be inaccurate",
            grid.radius(),
            needed
        )
    })
}

fn finish(
    method: &str,
    op: OperatorMatrix,
    grid: Option<&QuadratureGrid>,
    started: Instant,
    convergence: Option<f64>,
    warnings: Vec<String>,
) -> (OperatorMatrix, ProjectorBuildReport) {
    for w in &warnings {
        log::warn!("{method}: {w}");
    }
    let report = ProjectorBuildReport {
        method: method.to_string(),
        cutoff: op.cutoff(),
        grid: grid.map(GridDescriptor::from),
        hermiticity_residual: op.hermiticity_residual(),
        seconds: started.elapsed().as_secs_f64(),
        convergence,
        warnings,
    };
    (op, report)
}

/// `∫ d²β/π |β⟩⟨−β|` on a single mode.
pub fn parity_from_coherent_quadrature(
    grid: &QuadratureGrid,
    cutoff: usize,
) -> Result<(OperatorMatrix, ProjectorBuildReport)> {
    let started = Instant::now();
    let grid = grid.with_dim(GridDim::Two);
    let mut warnings = Vec::new();
    warnings.extend(grid_warning(&grid, (2.0 * cutoff as f64).sqrt()));
    let entries = integrate_outer(&grid, cutoff, |p, ket, bra| {
        let beta = C64::new(p[0], p[1]);
        fill_coherent(beta, ket);
        fill_coherent(-beta, bra);
    })? / C64::new(PI, 0.0);
    let op = OperatorMatrix::from_array(cutoff, Space::Single, entries)?;
    Ok(finish(
        "parity-coherent-quadrature",
        op,
        Some(&grid),
        started,
        None,
        warnings,
    ))
}

fn fill_coherent(alpha: C64, out: &mut [C64]) {
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        *slot = c;
    }
}

fn entangled_quadrature(
    family: Family,
    grid: &QuadratureGrid,
    cutoff: usize,
) -> Result<OperatorMatrix> {
    let dim = cutoff * cutoff;
    let entries = integrate_outer(grid, dim, |p, ket, bra| {
        // ket |v1 + i v2⟩, bra ⟨v2 + i v1|
        fill_entangled(family, C64::new(p[0], p[1]), cutoff, ket);
        fill_entangled(family, C64::new(p[1], p[0]), cutoff, bra);
    })? / C64::new(PI, 0.0);
    OperatorMatrix::from_array(cutoff, Space::TwoMode, entries)
}

fn entangled_route(
    family: Family,
    method: &str,
    grid: &QuadratureGrid,
    cutoff: usize,
    opts: QuadratureOptions,
) -> Result<(OperatorMatrix, ProjectorBuildReport)> {
    let started = Instant::now();
    if cutoff == 0 {
        return Err(Error::InvalidDimension("cutoff must be at least 1".into()));
    }
    let grid = grid.with_dim(GridDim::Two);
    let mut warnings = Vec::new();
    warnings.extend(grid_warning(&grid, (2.0 * cutoff as f64).sqrt() + 1.0));
    let op = entangled_quadrature(family, &grid, cutoff)?;
    let convergence = if opts.check_convergence {
        let coarse = entangled_quadrature(family, &grid.rescaled(2.0)?, cutoff)?;
        let block = opts.block.unwrap_or_else(|| default_block(cutoff));
        Some(compare_projectors(&op, &coarse, block)?)
    } else {
        None
    };
    Ok(finish(
        method,
        op,
        Some(&grid),
        started,
        convergence,
        warnings,
    ))
}

/// `∫ dη1 dη2/π |η1 + iη2⟩⟨η2 + iη1|`.
pub fn mu_from_eta_quadrature(
    grid: &QuadratureGrid,
    cutoff: usize,
    opts: QuadratureOptions,
) -> Result<(OperatorMatrix, ProjectorBuildReport)> {
    entangled_route(Family::Eta, "eta-quadrature", grid, cutoff, opts)
}

/// `∫ dξ1 dξ2/π |ξ1 + iξ2⟩⟨ξ2 + iξ1|`.
pub fn mu_from_xi_quadrature(
    grid: &QuadratureGrid,
    cutoff: usize,
    opts: QuadratureOptions,
) -> Result<(OperatorMatrix, ProjectorBuildReport)> {
    entangled_route(Family::Xi, "xi-quadrature", grid, cutoff, opts)
}

/// `∫ d²α d²β/π² |α⟩_a|β⟩_b ⟨α|_b⟨β|_a` on a 4-D grid with node coordinates
/// `(Re α, Im α, Re β, Im β)`.
pub fn mu_coherent_quadrature(
    grid: &QuadratureGrid,
    cutoff: usize,
    opts: QuadratureOptions,
) -> Result<(OperatorMatrix, ProjectorBuildReport)> {
    let started = Instant::now();
    let grid = grid.with_dim(GridDim::Four);
    if !opts.force {
        if cutoff > COHERENT_4D_MAX_CUTOFF {
            return Err(Error::CostGuard(format!(
                "4-D coherent quadrature at cutoff {cutoff} (limit {COHERENT_4D_MAX_CUTOFF})"
            )));
        }
        if grid.node_count() > COHERENT_4D_NODE_LIMIT {
            return Err(Error::CostGuard(format!(
                "4-D grid with {} nodes (limit {COHERENT_4D_NODE_LIMIT})",
                grid.node_count()
            )));
        }
    }
    let mut warnings = Vec::new();
    warnings.extend(grid_warning(&grid, (2.0 * cutoff as f64).sqrt()));
    let d = cutoff;
    let entries = integrate_outer(&grid, d * d, |p, ket, bra| {
        let mut stack = [C64::new(0.0, 0.0); 16];
        let mut heap;
        let scratch: &mut [C64] = if 2 * d <= stack.len() {
            &mut stack[..2 * d]
        } else {
            heap = vec![C64::new(0.0, 0.0); 2 * d];
            &mut heap
        };
        let (ca, cb) = scratch.split_at_mut(d);
        fill_coherent(C64::new(p[0], p[1]), ca);
        fill_coherent(C64::new(p[2], p[3]), cb);
        for m in 0..d {
            for n in 0..d {
                ket[m * d + n] = ca[m] * cb[n];
                bra[m * d + n] = cb[m] * ca[n];
            }
        }
    })? / C64::new(PI * PI, 0.0);
    let op = OperatorMatrix::from_array(cutoff, Space::TwoMode, entries)?;
    Ok(finish(
        "coherent-quadrature",
        op,
        Some(&grid),
        started,
        None,
        warnings,
    ))
}

/// Construction routes addressable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectorMethod {
    /// `U(θ,φ)† (I⊗Π) U(θ,φ)`.
    Conjugation(BsParams),
    /// Balanced Fock sum at phase `φ`.
    Fock {
        phi: f64,
    },
    /// `Σ i^{n−m} |m,n⟩⟨n,m|`.
    FockEta,
    /// `Σ i^{m−n} |m,n⟩⟨n,m|`.
    FockXi,
    EtaQuadrature,
    XiQuadrature,
    CoherentQuadrature,
    /// Bare `I ⊗ Π`.
    Parity,
}

impl ProjectorMethod {
    pub fn is_quadrature(&self) -> bool {
        matches!(
            self,
            ProjectorMethod::EtaQuadrature
                | ProjectorMethod::XiQuadrature
                | ProjectorMethod::CoherentQuadrature
        )
    }

    /// Grid used when none is given.
    pub fn default_grid(&self) -> QuadratureGrid {
        match self {
            ProjectorMethod::CoherentQuadrature => {
                QuadratureGrid::new(4.0, 0.1, GridDim::Four).expect("valid default grid")
            }
            _ => QuadratureGrid::default_plane(),
        }
    }

    /// The `(θ, φ)` of the beam splitter this route represents, if any.
    pub fn equivalent_bs(&self) -> Option<BsParams> {
        let balanced = |phi| {
            Some(BsParams {
                theta: FRAC_PI_2,
                phi,
            })
        };
        match *self {
            ProjectorMethod::Conjugation(p) => Some(p),
            ProjectorMethod::Fock { phi } => balanced(phi),
            ProjectorMethod::FockEta | ProjectorMethod::EtaQuadrature => balanced(-FRAC_PI_2),
            ProjectorMethod::FockXi | ProjectorMethod::XiQuadrature => balanced(FRAC_PI_2),
            ProjectorMethod::CoherentQuadrature => balanced(0.0),
            ProjectorMethod::Parity => Some(BsParams {
                theta: 0.0,
                phi: 0.0,
            }),
        }
    }

    /// Build the operator. `grid` overrides [`Self::default_grid`] for
    /// quadrature routes and is ignored otherwise.
    pub fn build(
        &self,
        cutoff: usize,
        grid: Option<&QuadratureGrid>,
        opts: QuadratureOptions,
    ) -> Result<(OperatorMatrix, ProjectorBuildReport)> {
        let grid = grid.copied().unwrap_or_else(|| self.default_grid());
        let started = Instant::now();
        let exact =
            |op: OperatorMatrix| Ok(finish(&self.to_string(), op, None, started, None, vec![]));
        match *self {
            ProjectorMethod::Conjugation(p) => exact(mu_conjugation(p, cutoff)?),
            ProjectorMethod::Fock { phi } => exact(mu_fock(phi, cutoff)?),
            ProjectorMethod::FockEta => exact(mu_fock_eta_form(cutoff)?),
            ProjectorMethod::FockXi => exact(mu_fock_xi_form(cutoff)?),
            ProjectorMethod::Parity => exact(parity_op(cutoff)?),
            ProjectorMethod::EtaQuadrature => mu_from_eta_quadrature(&grid, cutoff, opts),
            ProjectorMethod::XiQuadrature => mu_from_xi_quadrature(&grid, cutoff, opts),
            ProjectorMethod::CoherentQuadrature => mu_coherent_quadrature(&grid, cutoff, opts),
        }
    }
}

impl FromStr for ProjectorMethod {
    type Err = Error;

    /// `conjugation:THETA,PHI`, `fock:PHI`, `fock-eta`, `fock-xi`,
    /// `eta-quadrature`, `xi-quadrature`, `coherent-quadrature`, `parity`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("projector method '{s}': {why}"));
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let no_args = |m: ProjectorMethod| match args {
            None => Ok(m),
            Some(_) => Err(bad("takes no arguments")),
        };
        match kind {
            "conjugation" => {
                let args = args.ok_or_else(|| bad("expected conjugation:THETA,PHI"))?;
                let (t, p) = args
                    .split_once(',')
                    .ok_or_else(|| bad("expected THETA,PHI"))?;
                Ok(ProjectorMethod::Conjugation(BsParams::new(
                    parse_angle(t)?,
                    parse_angle(p)?,
                )?))
            }
            "fock" => {
                let args = args.ok_or_else(|| bad("expected fock:PHI"))?;
                Ok(ProjectorMethod::Fock {
                    phi: parse_angle(args)?,
                })
            }
            "fock-eta" => no_args(ProjectorMethod::FockEta),
            "fock-xi" => no_args(ProjectorMethod::FockXi),
            "eta-quadrature" => no_args(ProjectorMethod::EtaQuadrature),
            "xi-quadrature" => no_args(ProjectorMethod::XiQuadrature),
            "coherent-quadrature" => no_args(ProjectorMethod::CoherentQuadrature),
            "parity" => no_args(ProjectorMethod::Parity),
            other => Err(bad(&format!("unknown method '{other}'"))),
        }
    }
}

impl fmt::Display for ProjectorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectorMethod::Conjugation(p) => write!(f, "conjugation:{},{}", p.theta, p.phi),
            ProjectorMethod::Fock { phi } => write!(f, "fock:{phi}"),
            ProjectorMethod::FockEta => f.write_str("fock-eta"),
            ProjectorMethod::FockXi => f.write_str("fock-xi"),
            ProjectorMethod::EtaQuadrature => f.write_str("eta-quadrature"),
            ProjectorMethod::XiQuadrature => f.write_str("xi-quadrature"),
            ProjectorMethod::CoherentQuadrature => f.write_str("coherent-quadrature"),
            ProjectorMethod::Parity => f.write_str("parity"),
        }
    }
}
