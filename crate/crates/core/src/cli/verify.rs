//! Verification suites: each check reduces to one residual compared against a
//! named tolerance.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::Tolerances;
use crate::error::{Error, Result};
use crate::metrology::{
    bs1_symmetric_i, cs_sv_parity_closed, noon_parity_closed, noon_pipeline_check, parity_signal,
    phase_sweep, Bs1, Interferometer, InterferometerSpec,
};
use crate::projectors::{
    beam_splitter, compare_projectors, mu_coherent_matrix_element, mu_coherent_quadrature,
    mu_conjugation, mu_fock, mu_fock_eta_form, mu_fock_xi_form, mu_from_eta_quadrature,
    mu_from_xi_quadrature, parity_from_coherent_quadrature, parity_single, BsParams,
    ProjectorMethod, QuadratureOptions,
};
use crate::quadrature::{
    gauss1d_closed, gauss2d_closed, gauss2d_general_closed, integrate, integrate_outer, GridDim,
    QuadratureGrid,
};
use crate::states::{
    coherent_state, eta_state, fill_entangled, squeezed_vacuum, xi_state, EtaParams, Family,
    HermiteTable, StateSpec, XiParams,
};
use crate::tensor::{two_mode_annihilators, ModeIndexer, OperatorMatrix, TwoModeState};
use crate::C64;

const SEED: u64 = 0x005e_ed0f_9a1e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Gaussians,
    Hermite,
    States,
    Projectors,
    Metrology,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Gaussians => "gaussians",
            Suite::Hermite => "hermite",
            Suite::States => "states",
            Suite::Projectors => "projectors",
            Suite::Metrology => "metrology",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Suite::Gaussians,
            Suite::Hermite,
            Suite::States,
            Suite::Projectors,
            Suite::Metrology,
            Suite::All,
        ]
        .into_iter()
        .find(|x| x.name() == s)
        .ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn from_result(name: &str, tolerance: f64, outcome: Result<f64>) -> Self {
        match outcome {
            Ok(residual) => Self {
                name: name.to_string(),
                residual,
                tolerance,
                // NaN fails here.
                pass: residual <= tolerance,
                error: None,
            },
            Err(e) => Self {
                name: name.to_string(),
                residual: f64::NAN,
                tolerance,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
    pub total: usize,
    pub seconds: Option<f64>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Inputs to the suites.
#[derive(Debug, Clone, Copy)]
pub struct VerifyContext {
    /// Cutoff for the entangled-quadrature projector checks.
    pub cutoff: usize,
    pub grid: QuadratureGrid,
    /// Comparison block `m + n ≤ K`.
    pub block: usize,
    pub tol: Tolerances,
    pub force: bool,
}

impl Default for VerifyContext {
    fn default() -> Self {
        Self {
            cutoff: 16,
            grid: QuadratureGrid::default_plane(),
            block: 6,
            tol: Tolerances::default(),
            force: false,
        }
    }
}

struct Checks<'a> {
    out: Vec<Check>,
    ctx: &'a VerifyContext,
}

impl Checks<'_> {
    fn run(&mut self, name: &str, tolerance: f64, f: impl FnOnce() -> Result<f64>) {
        let started = Instant::now();
        let check = Check::from_result(name, tolerance, f());
        log::info!(
            "{} {name}: residual {:e} (tol {:e}, {:.2}s)",
            if check.pass { "PASS" } else { "FAIL" },
            check.residual,
            tolerance,
            started.elapsed().as_secs_f64()
        );
        self.out.push(check);
    }
}

pub fn run_suite(suite: Suite, ctx: &VerifyContext, timing: bool) -> VerifyReport {
    let started = Instant::now();
    let mut checks = Checks {
        out: Vec::new(),
        ctx,
    };
    match suite {
        Suite::Gaussians => gaussians(&mut checks),
        Suite::Hermite => hermite(&mut checks),
        Suite::States => states(&mut checks),
        Suite::Projectors => projectors(&mut checks),
        Suite::Metrology => metrology(&mut checks),
        Suite::All => {
            gaussians(&mut checks);
            hermite(&mut checks);
            states(&mut checks);
            projectors(&mut checks);
            metrology(&mut checks);
        }
    }
    let checks = checks.out;
    let passed = checks.iter().filter(|c| c.pass).count();
    VerifyReport {
        suite: suite.name().to_string(),
        total: checks.len(),
        failed: checks.len() - passed,
        passed,
        checks,
        seconds: timing.then(|| started.elapsed().as_secs_f64()),
    }
}

fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn uniform_c(rng: &mut ChaCha8Rng, re: (f64, f64), im: (f64, f64)) -> C64 {
    C64::new(rng.gen_range(re.0..=re.1), rng.gen_range(im.0..=im.1))
}

const GAUSSIAN_DRAWS: usize = 50;

fn gaussians(c: &mut Checks) {
    let tol = c.ctx.tol.gaussian;
    c.run("gauss1d closed form vs quadrature (50 draws)", tol, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let grid = QuadratureGrid::new(10.0, 0.01, GridDim::One)?;
        let mut worst = 0.0_f64;
        for _ in 0..GAUSSIAN_DRAWS {
            let alpha = uniform_c(&mut rng, (0.5, 2.0), (-1.0, 1.0));
            let beta = uniform_c(&mut rng, (-1.0, 1.0), (-1.0, 1.0));
            let num = integrate(|p| (-alpha * p[0] * p[0] + beta * p[0]).exp(), &grid)?;
            worst = worst.max(rel_err(num, gauss1d_closed(alpha, beta)?));
        }
        Ok(worst)
    });
    c.run("gauss2d closed form vs quadrature (50 draws)", tol, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
        let grid = QuadratureGrid::plane(10.0, 0.05)?;
        let mut worst = 0.0_f64;
        for _ in 0..GAUSSIAN_DRAWS {
            let zeta = uniform_c(&mut rng, (-2.0, -1.0), (-0.5, 0.5));
            let xi = uniform_c(&mut rng, (-0.5, 0.5), (-0.5, 0.5));
            let eta = uniform_c(&mut rng, (-0.5, 0.5), (-0.5, 0.5));
            let num = integrate(
                |p| {
                    let z = C64::new(p[0], p[1]);
                    (zeta * z.norm_sqr() + xi * z + eta * z.conj()).exp()
                },
                &grid,
            )? / PI;
            worst = worst.max(rel_err(num, gauss2d_closed(zeta, xi, eta)?));
        }
        Ok(worst)
    });
    c.run(
        "gauss2d general closed form vs quadrature (50 draws)",
        tol,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
            let grid = QuadratureGrid::plane(10.0, 0.05)?;
            let mut worst = 0.0_f64;
            let mut accepted = 0;
            while accepted < GAUSSIAN_DRAWS {
                let zeta = uniform_c(&mut rng, (-2.0, -1.0), (-0.5, 0.5));
                let xi = uniform_c(&mut rng, (-0.5, 0.5), (-0.5, 0.5));
                let eta = uniform_c(&mut rng, (-0.5, 0.5), (-0.5, 0.5));
                let f = uniform_c(&mut rng, (-0.25, 0.25), (-0.25, 0.25));
                let g = uniform_c(&mut rng, (-0.25, 0.25), (-0.25, 0.25));
                // Redraw outside the convergence region.
                let Ok(closed) = gauss2d_general_closed(zeta, xi, eta, f, g) else {
                    continue;
                };
                accepted += 1;
                let num = integrate(
                    |p| {
                        let z = C64::new(p[0], p[1]);
                        let zc = z.conj();
                        (zeta * z.norm_sqr() + xi * z + eta * zc + f * z * z + g * zc * zc).exp()
                    },
                    &grid,
                )? / PI;
                worst = worst.max(rel_err(num, closed));
            }
            Ok(worst)
        },
    );
}

/// `H_{m,n}(x, y) = Σ_k (−1)^k m! n! / (k! (m−k)! (n−k)!) x^{m−k} y^{n−k}`.
pub(crate) fn hermite_expansion(m: usize, n: usize, x: C64, y: C64) -> C64 {
    let fact = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
    (0..=m.min(n))
        .map(|k| {
            let coeff = fact(m) * fact(n) / (fact(k) * fact(m - k) * fact(n - k));
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            x.powu((m - k) as u32) * y.powu((n - k) as u32) * (sign * coeff)
        })
        .sum()
}

fn hermite(c: &mut Checks) {
    c.run(
        "hermite recurrence vs expansion, m,n <= 6, 10 arguments",
        c.ctx.tol.hermite,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
            let mut worst = 0.0_f64;
            for _ in 0..10 {
                let x = uniform_c(&mut rng, (-2.0, 2.0), (-2.0, 2.0));
                let y = uniform_c(&mut rng, (-2.0, 2.0), (-2.0, 2.0));
                let table = HermiteTable::new(6, 6, x, y)?;
                for m in 0..=6 {
                    for n in 0..=6 {
                        worst = worst.max(rel_err(table.get(m, n), hermite_expansion(m, n, x, y)));
                    }
                }
            }
            Ok(worst)
        },
    );
}

/// Amplitudes of `e^{−|z|²/2} exp(z a† + s z* b† + t a†b†)|0,0⟩`, expanded
/// term by term.
fn entangled_power_series(z: C64, s: f64, t: f64, cutoff: usize) -> Vec<C64> {
    let fact = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
    let x = z;
    let y = z.conj() * s;
    let gauss = (-0.5 * z.norm_sqr()).exp();
    let mut out = vec![C64::new(0.0, 0.0); cutoff * cutoff];
    for m in 0..cutoff {
        for n in 0..cutoff {
            let sum: C64 = (0..=m.min(n))
                .map(|k| {
                    x.powu((m - k) as u32) * y.powu((n - k) as u32) * t.powi(k as i32)
                        / (fact(m - k) * fact(n - k) * fact(k))
                })
                .sum();
            out[m * cutoff + n] = sum * gauss * (fact(m) * fact(n)).sqrt();
        }
    }
    out
}

fn block_max_diff(a: &[C64], b: &[C64], cutoff: usize, block: usize) -> f64 {
    (0..cutoff * cutoff)
        .filter(|k| k / cutoff + k % cutoff <= block)
        .map(|k| (a[k] - b[k]).norm())
        .fold(0.0, f64::max)
}

/// Max `|[(a + s b†) ψ − z ψ]_{m,n}|` over `m + n ≤ d − 2`.
fn eigen_residual(psi: &TwoModeState, z: C64, s: f64) -> f64 {
    let d = psi.cutoff();
    let mut worst = 0.0_f64;
    for m in 0..d {
        for n in 0..d {
            if m + n > d - 2 {
                continue;
            }
            let lower_a = psi.amplitude(m + 1, n) * ((m + 1) as f64).sqrt();
            let raise_b = if n > 0 {
                psi.amplitude(m, n - 1) * (n as f64).sqrt()
            } else {
                C64::new(0.0, 0.0)
            };
            let lhs = lower_a + raise_b * s;
            worst = worst.max((lhs - z * psi.amplitude(m, n)).norm());
        }
    }
    worst
}

fn completeness(family: Family, grid: &QuadratureGrid, cutoff: usize, block: usize) -> Result<f64> {
    let resolved = integrate_outer(grid, cutoff * cutoff, |p, ket, bra| {
        fill_entangled(family, C64::new(p[0], p[1]), cutoff, ket);
        bra.copy_from_slice(ket);
    })? / C64::new(PI, 0.0);
    let ix = ModeIndexer::new(cutoff)?;
    let mut worst = 0.0_f64;
    for r in 0..ix.dim() {
        for c in 0..ix.dim() {
            if ix.total(r) <= block && ix.total(c) <= block {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((resolved[[r, c]] - target).norm());
            }
        }
    }
    Ok(worst)
}

const ENTANGLED_SAMPLES: [(f64, f64); 3] = [(0.7, 0.4), (1.3, -0.9), (-2.0, 0.5)];

fn states(c: &mut Checks) {
    let tol = c.ctx.tol;
    c.run(
        "eta state vs power series (d=16, m+n <= 8)",
        tol.power_series,
        || {
            let mut worst = 0.0_f64;
            for (a, b) in ENTANGLED_SAMPLES {
                let z = C64::new(a, b);
                let psi = eta_state(EtaParams::new(a, b), 16)?;
                let series = entangled_power_series(z, -1.0, 1.0, 16);
                worst = worst.max(block_max_diff(
                    psi.amplitudes().as_slice().unwrap(),
                    &series,
                    16,
                    8,
                ));
            }
            Ok(worst)
        },
    );
    c.run(
        "xi state vs power series (d=16, m+n <= 8)",
        tol.power_series,
        || {
            let mut worst = 0.0_f64;
            for (a, b) in ENTANGLED_SAMPLES {
                let z = C64::new(a, b);
                let psi = xi_state(XiParams::new(a, b), 16)?;
                let series = entangled_power_series(z, 1.0, -1.0, 16);
                worst = worst.max(block_max_diff(
                    psi.amplitudes().as_slice().unwrap(),
                    &series,
                    16,
                    8,
                ));
            }
            Ok(worst)
        },
    );
    c.run(
        "eta eigenvalue relation (a - b^dag)|eta> = eta|eta>",
        tol.exact,
        || {
            let mut worst = 0.0_f64;
            for (a, b) in ENTANGLED_SAMPLES {
                let psi = eta_state(EtaParams::new(a, b), 16)?;
                worst = worst.max(eigen_residual(&psi, C64::new(a, b), -1.0));
            }
            Ok(worst)
        },
    );
    c.run(
        "xi eigenvalue relation (a + b^dag)|xi> = xi|xi>",
        tol.exact,
        || {
            let mut worst = 0.0_f64;
            for (a, b) in ENTANGLED_SAMPLES {
                let psi = xi_state(XiParams::new(a, b), 16)?;
                worst = worst.max(eigen_residual(&psi, C64::new(a, b), 1.0));
            }
            Ok(worst)
        },
    );
    c.run("coherent state norm (d=40)", tol.coherent_norm, || {
        let psi = coherent_state(C64::new(1.2, 0.5), 40)?;
        Ok((1.0 - psi.norm() * psi.norm()).abs())
    });
    c.run("squeezed vacuum norm (d=40)", tol.coherent_norm, || {
        let psi = squeezed_vacuum(0.5, 40)?;
        Ok((1.0 - psi.norm() * psi.norm()).abs())
    });
    let grid = c.ctx.grid;
    c.run("eta completeness (d=10, m+n <= 6)", tol.quadrature, || {
        completeness(Family::Eta, &grid, 10, 6)
    });
    c.run("xi completeness (d=10, m+n <= 6)", tol.quadrature, || {
        completeness(Family::Xi, &grid, 10, 6)
    });
}

fn block_residual(m: &OperatorMatrix) -> f64 {
    let ix = ModeIndexer::new(m.cutoff()).expect("cutoff already validated");
    let mut worst = 0.0_f64;
    for r in 0..ix.dim() {
        for c in 0..ix.dim() {
            if ix.total(r) != ix.total(c) {
                worst = worst.max(m.get(r, c).norm());
            }
        }
    }
    worst
}

/// Max entry of `U† A U − (A cos(θ/2) + e^{iφ} B sin(θ/2))` and the matching
/// relation for `B`, over rows and columns with `m + n ≤ d − 2`.
pub(crate) fn transformation_residual(p: BsParams, cutoff: usize) -> Result<f64> {
    let u = beam_splitter(p, cutoff)?;
    let (a, b) = two_mode_annihilators(cutoff)?;
    let (s, c) = (p.theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, p.phi);
    let a_out = u.adjoint().matmul(&a.matmul(&u)?)?;
    let b_out = u.adjoint().matmul(&b.matmul(&u)?)?;
    let a_expected = a.scale(C64::new(c, 0.0)).add(&b.scale(e * s))?;
    let b_expected = b.scale(C64::new(c, 0.0)).sub(&a.scale(e.conj() * s))?;
    let block = cutoff.saturating_sub(2);
    Ok(
        compare_projectors(&a_out, &a_expected, block)?.max(compare_projectors(
            &b_out,
            &b_expected,
            block,
        )?),
    )
}

fn hermiticity_of(
    method: ProjectorMethod,
    cutoff: usize,
    grid: &QuadratureGrid,
    force: bool,
) -> Result<f64> {
    let opts = QuadratureOptions {
        force,
        ..Default::default()
    };
    let (m, _) = method.build(cutoff, Some(grid), opts)?;
    Ok(m.hermiticity_residual())
}

fn projectors(c: &mut Checks) {
    let ctx = *c.ctx;
    let tol = ctx.tol;
    let d = ctx.cutoff;
    let k = ctx.block;
    let grid = ctx.grid;
    let opts = QuadratureOptions {
        force: ctx.force,
        ..Default::default()
    };

    let mut eta_q = None;
    c.run(
        &format!("eta quadrature vs mu_fock(-pi/2) (d={d}, m+n <= {k})"),
        tol.quadrature,
        || {
            let (m, _) = mu_from_eta_quadrature(&grid, d, opts)?;
            let diff = compare_projectors(&m, &mu_fock(-FRAC_PI_2, d)?, k);
            eta_q = Some(m);
            diff
        },
    );
    let mut xi_q = None;
    c.run(
        &format!("xi quadrature vs mu_fock(+pi/2) (d={d}, m+n <= {k})"),
        tol.quadrature,
        || {
            let (m, _) = mu_from_xi_quadrature(&grid, d, opts)?;
            let diff = compare_projectors(&m, &mu_fock(FRAC_PI_2, d)?, k);
            xi_q = Some(m);
            diff
        },
    );
    c.run(
        "xi quadrature = conjugate of eta quadrature",
        tol.quadrature,
        || match (&eta_q, &xi_q) {
            (Some(e), Some(x)) => compare_projectors(&e.conj(), x, k),
            _ => Err(Error::Convergence(
                "quadrature projectors unavailable".into(),
            )),
        },
    );
    c.run(
        "quadrature projector hermiticity",
        tol.quadrature,
        || match (&eta_q, &xi_q) {
            (Some(e), Some(x)) => Ok(e.hermiticity_residual().max(x.hermiticity_residual())),
            _ => Err(Error::Convergence(
                "quadrature projectors unavailable".into(),
            )),
        },
    );

    c.run(
        "conjugation(pi/2, phi) vs mu_fock(phi), phi in {0, +-pi/2}, d=12",
        tol.exact,
        || {
            let mut worst = 0.0_f64;
            for phi in [0.0, FRAC_PI_2, -FRAC_PI_2] {
                let conj = mu_conjugation(BsParams::balanced(phi)?, 12)?;
                worst = worst.max(compare_projectors(&conj, &mu_fock(phi, 12)?, 11)?);
            }
            Ok(worst)
        },
    );
    c.run("i-power forms vs mu_fock(-+pi/2)", tol.exact, || {
        let eta = mu_fock_eta_form(d)?.max_abs_diff(&mu_fock(-FRAC_PI_2, d)?)?;
        let xi = mu_fock_xi_form(d)?.max_abs_diff(&mu_fock(FRAC_PI_2, d)?)?;
        Ok(eta.max(xi))
    });
    c.run(
        "coherent 4-D quadrature vs swap (d=3, R=4, h=0.1)",
        tol.coherent4d,
        || {
            let g4 = QuadratureGrid::new(4.0, 0.1, GridDim::Four)?;
            let (m, _) = mu_coherent_quadrature(&g4, 3, opts)?;
            Ok(m.max_abs_diff(&mu_fock(0.0, 3)?)?
                .max(m.hermiticity_residual()))
        },
    );
    c.run(
        "parity from coherent quadrature vs diagonal parity (d=8)",
        tol.quadrature,
        || {
            let (m, _) = parity_from_coherent_quadrature(&grid, 8)?;
            m.max_abs_diff(&parity_single(8)?)
        },
    );
    c.run("exact projector hermiticity", tol.exact, || {
        let methods = [
            ProjectorMethod::Conjugation(BsParams::new(FRAC_PI_4, 0.3)?),
            ProjectorMethod::Conjugation(BsParams::balanced(-FRAC_PI_2)?),
            ProjectorMethod::Fock { phi: 0.7 },
            ProjectorMethod::FockEta,
            ProjectorMethod::FockXi,
            ProjectorMethod::Parity,
        ];
        let mut worst = 0.0_f64;
        for m in methods {
            worst = worst.max(hermiticity_of(m, 12, &grid, ctx.force)?);
        }
        Ok(worst)
    });
    c.run(
        "mu_fock involution and +-1 spectrum (M^2 = I, M = M^dag)",
        tol.exact,
        || {
            let mut worst = 0.0_f64;
            for phi in [0.0, FRAC_PI_2, -FRAC_PI_2, 0.37, 2.9] {
                let m = mu_fock(phi, 12)?;
                let sq = m.matmul(&m)?;
                let id = OperatorMatrix::identity(12, sq.space())?;
                worst = worst
                    .max(sq.max_abs_diff(&id)?)
                    .max(m.hermiticity_residual());
            }
            Ok(worst)
        },
    );
    let bs_samples = [
        (FRAC_PI_2, 0.0),
        (FRAC_PI_4, 0.3),
        (1.1, -2.0),
        (PI, FRAC_PI_2),
    ];
    c.run("beam splitter unitarity (d=24)", tol.exact, || {
        let mut worst = 0.0_f64;
        for (t, p) in bs_samples {
            worst = worst.max(beam_splitter(BsParams::new(t, p)?, 24)?.unitarity_residual());
        }
        Ok(worst)
    });
    c.run(
        "beam splitter photon-number block structure (d=16)",
        tol.exact,
        || {
            let mut worst = 0.0_f64;
            for (t, p) in bs_samples {
                worst = worst.max(block_residual(&beam_splitter(BsParams::new(t, p)?, 16)?));
            }
            worst = worst.max(block_residual(&bs1_symmetric_i(16)?));
            Ok(worst)
        },
    );
    c.run(
        "mode transformation under beam splitter (d=12)",
        tol.transform,
        || {
            let mut worst = 0.0_f64;
            for (t, p) in bs_samples {
                worst = worst.max(transformation_residual(BsParams::new(t, p)?, 12)?);
            }
            Ok(worst)
        },
    );
    c.run(
        "normal-ordered element vs conjugation (d=25, 20 draws)",
        tol.coherent_element,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
            let mut worst = 0.0_f64;
            for theta in [FRAC_PI_4, PI / 3.0] {
                let p = BsParams::new(theta, rng.gen_range(-PI..PI))?;
                let mu = mu_conjugation(p, 25)?;
                for _ in 0..10 {
                    let mut draw =
                        || C64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(-PI..PI));
                    let (a, b, a2, b2) = (draw(), draw(), draw(), draw());
                    let ket = coherent_pair(a, b, 25)?;
                    let bra = coherent_pair(a2, b2, 25)?;
                    let numeric = bra.inner(&mu.apply(&ket)?)?;
                    let closed = mu_coherent_matrix_element(p, a, b, a2, b2);
                    worst = worst.max((numeric - closed).norm());
                }
            }
            Ok(worst)
        },
    );
}

fn coherent_pair(a: C64, b: C64, cutoff: usize) -> Result<TwoModeState> {
    TwoModeState::product(&coherent_state(a, cutoff)?, &coherent_state(b, cutoff)?)
}

fn noon_spec(photons: usize, cutoff: usize, detection: ProjectorMethod) -> InterferometerSpec {
    InterferometerSpec {
        input: StateSpec::Noon { photons },
        bs1: Bs1::None,
        phase: 0.0,
        detection,
        cutoff,
        grid: None,
    }
}

fn cs_sv_spec(z: C64, r: f64, cutoff: usize) -> InterferometerSpec {
    InterferometerSpec {
        input: StateSpec::CoherentSqueezed { z, r },
        bs1: Bs1::SymmetricI,
        phase: 0.0,
        detection: ProjectorMethod::Fock { phi: -FRAC_PI_2 },
        cutoff,
        grid: None,
    }
}

/// Sweep phases strictly inside `(0, 2π)` so that no point sits on a
/// stationary point of every NOON signal.
fn sweep_range() -> (f64, f64) {
    (0.05, 2.0 * PI - 0.05)
}

fn metrology(c: &mut Checks) {
    let tol = c.ctx.tol;
    let fock_minus = ProjectorMethod::Fock { phi: -FRAC_PI_2 };
    let mut worst_imag = 0.0_f64;
    let mut worst_bound = 0.0_f64;

    c.run(
        "NOON pipeline vs closed form, N=1..6, 50 phases (d=12)",
        tol.noon,
        || {
            let (lo, hi) = sweep_range();
            let mut worst = 0.0_f64;
            for n in 1..=6 {
                let res = phase_sweep(&noon_spec(n, 12, fock_minus), lo, hi, 50)?;
                worst = worst.max(res.max_abs_err().unwrap_or(f64::NAN));
                worst_imag = worst_imag.max(res.max_imaginary_residual());
                for r in &res.rows {
                    worst_bound = worst_bound.max(r.signal.abs() - 1.0);
                }
            }
            Ok(worst)
        },
    );
    c.run(
        "NOON eta-plane integral vs closed form, N=0..3",
        tol.quadrature,
        || {
            let mut worst = 0.0_f64;
            for (n, phi) in [(0, 0.3), (1, 0.0), (2, FRAC_PI_4), (3, 0.4)] {
                let v = noon_pipeline_check(n, phi, 8)?;
                worst = worst.max((v - noon_parity_closed(n, phi).re).abs());
            }
            Ok(worst)
        },
    );
    c.run("NOON signal period 2pi/N (d=12)", tol.exact, || {
        let mut worst = 0.0_f64;
        for n in 1..=6 {
            let ifm = Interferometer::prepare(&noon_spec(n, 12, fock_minus))?;
            for phi in [0.1, 0.8, 2.3] {
                let shifted = phi + 2.0 * PI / n as f64;
                worst = worst.max((ifm.signal(phi)?.value - ifm.signal(shifted)?.value).abs());
            }
        }
        Ok(worst)
    });
    c.run(
        "NOON sensitivity 1/N at steepest slope",
        tol.sensitivity,
        || {
            let mut worst = 0.0_f64;
            for n in 1..=6 {
                let ifm = Interferometer::prepare(&noon_spec(n, 12, fock_minus))?;
                // Odd N gives −sin-like signals, even N cos-like ones.
                let phi = if n % 2 == 0 {
                    PI / (2.0 * n as f64)
                } else {
                    PI / (4.0 * n as f64)
                };
                let dphi = ifm
                    .sensitivity(phi)?
                    .ok_or_else(|| Error::Convergence(format!("zero slope for N={n}")))?;
                let expected = 1.0 / n as f64;
                worst = worst.max((dphi - expected).abs() / expected);
            }
            Ok(worst)
        },
    );
    c.run(
        "detection route independence (NOON N=3, d=16)",
        tol.quadrature,
        || {
            let methods = [
                ProjectorMethod::Conjugation(BsParams::balanced(-FRAC_PI_2)?),
                fock_minus,
                ProjectorMethod::FockEta,
                ProjectorMethod::EtaQuadrature,
            ];
            let mut values = Vec::new();
            for m in methods {
                let mut spec = noon_spec(3, 16, m);
                spec.phase = 0.45;
                values.push(parity_signal(&spec)?);
            }
            Ok(values
                .iter()
                .map(|v| (v - values[0]).abs())
                .fold(0.0, f64::max))
        },
    );

    let cs_params = [(0.5, 0.2), (0.5, 0.5), (1.0, 0.2), (1.0, 0.5)];
    c.run(
        "coherent+squeezed pipeline vs closed form, 20 phases (d=30)",
        tol.cs_sv,
        || {
            let (lo, hi) = sweep_range();
            let mut worst = 0.0_f64;
            for (amp, r) in cs_params {
                let z = C64::from_polar(amp, 0.3);
                let res = phase_sweep(&cs_sv_spec(z, r, 30), lo, hi, 20)?;
                worst = worst.max(res.max_abs_err().unwrap_or(f64::NAN));
                worst_imag = worst_imag.max(res.max_imaginary_residual());
                for row in &res.rows {
                    worst_bound = worst_bound.max(row.signal.abs() - 1.0);
                }
            }
            Ok(worst)
        },
    );
    c.run(
        "coherent+squeezed reference point z=0.8, r=0.4, phi=pi/6",
        tol.cs_sv,
        || {
            let z = C64::new(0.8, 0.0);
            let mut spec = cs_sv_spec(z, 0.4, 30);
            spec.phase = PI / 6.0;
            Ok((parity_signal(&spec)? - cs_sv_parity_closed(z, 0.4, PI / 6.0)).abs())
        },
    );
    c.run(
        "coherent+squeezed cutoff convergence d=30 -> 40",
        tol.cutoff_convergence,
        || {
            let mut worst = 0.0_f64;
            for (amp, r) in cs_params {
                let z = C64::from_polar(amp, 0.3);
                let lo = Interferometer::prepare(&cs_sv_spec(z, r, 30))?;
                let hi = Interferometer::prepare(&cs_sv_spec(z, r, 40))?;
                for phi in [0.4, 1.3, 2.8] {
                    worst = worst.max((lo.signal(phi)?.value - hi.signal(phi)?.value).abs());
                }
            }
            Ok(worst)
        },
    );
    c.run("parity signal imaginary residual", tol.reality, || {
        Ok(worst_imag)
    });
    c.run("parity signal within [-1, 1]", tol.reality, || {
        Ok(worst_bound.max(0.0))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [
            Suite::Gaussians,
            Suite::Hermite,
            Suite::States,
            Suite::Projectors,
            Suite::Metrology,
            Suite::All,
        ] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn failed_checks_carry_errors() {
        let c = Check::from_result("x", 1.0, Err(Error::Convergence("boom".into())));
        assert!(!c.pass);
        assert!(c.error.unwrap().contains("boom"));
        assert!(!Check::from_result("nan", 1.0, Ok(f64::NAN)).pass);
        assert!(Check::from_result("ok", 1.0, Ok(1.0)).pass);
    }

    #[test]
    fn hermite_expansion_low_orders() {
        let (x, y) = (C64::new(0.3, 1.0), C64::new(-0.7, 0.2));
        assert_eq!(hermite_expansion(0, 0, x, y), C64::new(1.0, 0.0));
        assert!((hermite_expansion(1, 1, x, y) - (x * y - 1.0)).norm() < 1e-15);
    }
}
