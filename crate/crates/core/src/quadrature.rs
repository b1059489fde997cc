//! Uniform midpoint quadrature on `[-R, R]^k` and closed-form Gaussian
//! integrals used as oracles.
//!
//! Every integrand in this crate is damped by at least `e^{-|z|²/2}`, for
//! which the midpoint rule converges faster than any power of `h`. Node
//! order is row-major with the first coordinate outermost; parallel tiles
//! are always combined in tile order, so results do not depend on the
//! thread count.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

/// Largest `R / h` accepted per axis.
pub const MAX_RADIUS_OVER_STEP: f64 = 2000.0;

/// Nodes handled by one tile of [`integrate_outer`].
const TILE: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridDim {
    One,
    Two,
    Four,
}

impl GridDim {
    pub fn rank(self) -> usize {
        match self {
            GridDim::One => 1,
            GridDim::Two => 2,
            GridDim::Four => 4,
        }
    }
}

/// Midpoint grid on `[-R, R]^k`.
///
/// The axis is split into `n = round(2R/h)` cells, so the effective step is
/// `2R/n`; it equals `h` whenever `2R/h` is an integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureGrid {
    radius: f64,
    step: f64,
    dim: GridDim,
}

impl QuadratureGrid {
    pub fn new(radius: f64, step: f64, dim: GridDim) -> Result<Self> {
        if !(radius.is_finite() && step.is_finite()) || radius <= 0.0 || step <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "radius and step must be positive and finite (R={radius}, h={step})"
            )));
        }
        if radius / step > MAX_RADIUS_OVER_STEP {
            return Err(Error::InvalidGrid(format!(
                "R/h = {} exceeds {MAX_RADIUS_OVER_STEP}",
                radius / step
            )));
        }
        Ok(Self { radius, step, dim })
    }

    /// 2-D grid over the complex plane.
    pub fn plane(radius: f64, step: f64) -> Result<Self> {
        Self::new(radius, step, GridDim::Two)
    }

    /// The default plane grid, `R = 7`, `h = 0.05`.
    pub fn default_plane() -> Self {
        Self {
            radius: 7.0,
            step: 0.05,
            dim: GridDim::Two,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dim(&self) -> GridDim {
        self.dim
    }

    pub fn with_dim(&self, dim: GridDim) -> Self {
        Self { dim, ..*self }
    }

    /// Same radius, step `factor · h`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.radius, self.step * factor, self.dim)
    }

    pub fn nodes_per_axis(&self) -> usize {
        ((2.0 * self.radius / self.step).round() as usize).max(1)
    }

    pub fn effective_step(&self) -> f64 {
        2.0 * self.radius / self.nodes_per_axis() as f64
    }

    /// Cell volume `h_eff^k`.
    pub fn weight(&self) -> f64 {
        self.effective_step().powi(self.dim.rank() as i32)
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis().pow(self.dim.rank() as u32)
    }

    /// Midpoint coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        let n = self.nodes_per_axis();
        let h = self.effective_step();
        (0..n)
            .map(|i| -self.radius + (i as f64 + 0.5) * h)
            .collect()
    }

    /// Coordinates of node `index`, first coordinate outermost.
    fn node(&self, axis: &[f64], index: usize, out: &mut [f64]) {
        let n = axis.len();
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = axis[rest % n];
            rest /= n;
        }
    }
}

fn non_finite_node(coords: &[f64]) -> Error {
    Error::NonFinite(format!("integrand at node {coords:?}"))
}

/// Midpoint rule `h^k Σ f(node)` for a scalar integrand.
pub fn integrate<F>(f: F, grid: &QuadratureGrid) -> Result<C64>
where
    F: Fn(&[f64]) -> C64 + Sync,
{
    let axis = grid.axis();
    let n = axis.len();
    let rank = grid.dim.rank();
    let per_slice = grid.node_count() / n;

    // One slice per value of the first coordinate.
    let slices: Vec<Result<C64>> = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut coords = vec![0.0; rank];
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..per_slice {
                grid.node(&axis, i0 * per_slice + j, &mut coords);
                let v = f(&coords);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(non_finite_node(&coords));
                }
                acc += v;
            }
            Ok(acc)
        })
        .collect();

    let mut total = C64::new(0.0, 0.0);
    for s in slices {
        total += s?;
    }
    Ok(total * grid.weight())
}

/// Midpoint rule for a rank-one matrix-valued integrand,
/// `h^k Σ ket(node) ⊗ bra(node)†`.
///
/// `fill(node, ket, bra)` writes both vectors (length `dim`) for a node.
pub fn integrate_outer<F>(grid: &QuadratureGrid, dim: usize, fill: F) -> Result<Array2<C64>>
where
    F: Fn(&[f64], &mut [C64], &mut [C64]) + Sync,
{
    let axis = grid.axis();
    let rank = grid.dim.rank();
    let total = grid.node_count();
    let tiles = total.div_ceil(TILE);
    let group = 2 * rayon::current_num_threads().max(1);

    let tile_sum = |t: usize| -> Result<Array2<C64>> {
        let start = t * TILE;
        let len = TILE.min(total - start);
        let mut kets = Array2::<C64>::zeros((len, dim));
        let mut bras = Array2::<C64>::zeros((len, dim));
        let mut coords = vec![0.0; rank];
        for j in 0..len {
            grid.node(&axis, start + j, &mut coords);
            let mut ket_row = kets.row_mut(j);
            let mut bra_row = bras.row_mut(j);
            let ket = ket_row.as_slice_mut().expect("row-major tile");
            let bra = bra_row.as_slice_mut().expect("row-major tile");
            fill(&coords, ket, bra);
            let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
            if !ket.iter().all(finite) || !bra.iter().all(finite) {
                return Err(non_finite_node(&coords));
            }
            bra.iter_mut().for_each(|z| *z = z.conj());
        }
        Ok(kets.t().dot(&bras))
    };

    let mut acc = Array2::<C64>::zeros((dim, dim));
    let mut t0 = 0;
    while t0 < tiles {
        let t1 = (t0 + group).min(tiles);
        let parts: Vec<Result<Array2<C64>>> = (t0..t1).into_par_iter().map(tile_sum).collect();
        for p in parts {
            acc += &p?;
        }
        t0 = t1;
    }
    acc *= C64::new(grid.weight(), 0.0);
    Ok(acc)
}

/// `∫ exp(−αx² + βx) dx = √(π/α) · exp(β²/4α)` for `Re α > 0`.
pub fn gauss1d_closed(alpha: C64, beta: C64) -> Result<C64> {
    if alpha.re.is_nan() || alpha.re <= 0.0 {
        return Err(Error::Convergence(format!(
            "Re(alpha) = {} must be > 0",
            alpha.re
        )));
    }
    let pi = C64::new(std::f64::consts::PI, 0.0);
    Ok((pi / alpha).sqrt() * (beta * beta / (4.0 * alpha)).exp())
}

/// `∫ d²z/π · exp(ζ|z|² + ξz + ηz*) = −(1/ζ) · exp(−ξη/ζ)` for `Re ζ < 0`.
pub fn gauss2d_closed(zeta: C64, xi: C64, eta: C64) -> Result<C64> {
    if zeta.re.is_nan() || zeta.re >= 0.0 {
        return Err(Error::Convergence(format!(
            "Re(zeta) = {} must be < 0",
            zeta.re
        )));
    }
    Ok(-(1.0 / zeta) * (-xi * eta / zeta).exp())
}

/// `∫ d²z/π · exp(ζ|z|² + ξz + ηz* + fz² + gz*²)
///   = exp[(−ζξη + ξ²g + η²f)/(ζ² − 4fg)] / √(ζ² − 4fg)`.
///
/// Requires `Re(ζ ± f ± g) < 0` and `Re((ζ² − 4fg)/(ζ ± f ± g)) < 0` for all
/// four sign choices. Uses the principal square root.
pub fn gauss2d_general_closed(zeta: C64, xi: C64, eta: C64, f: C64, g: C64) -> Result<C64> {
    let det = zeta * zeta - 4.0 * f * g;
    let mut failures = Vec::new();
    for (sf, sg) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let s = zeta + sf * f + sg * g;
        let tag = format!("zeta{}f{}g", sign_char(sf), sign_char(sg));
        if s.re.is_nan() || s.re >= 0.0 {
            failures.push(format!("Re({tag}) = {} >= 0", s.re));
        }
        let ratio = det / s;
        if ratio.re.is_nan() || ratio.re >= 0.0 {
            failures.push(format!("Re((zeta^2-4fg)/({tag})) = {} >= 0", ratio.re));
        }
    }
    if !failures.is_empty() {
        return Err(Error::Convergence(failures.join("; ")));
    }
    Ok(((-zeta * xi * eta + xi * xi * g + eta * eta * f) / det).exp() / det.sqrt())
}

fn sign_char(s: f64) -> char {
    if s > 0.0 {
        '+'
    } else {
        '-'
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_invariants() {
        assert!(QuadratureGrid::plane(0.0, 0.1).is_err());
        assert!(QuadratureGrid::plane(1.0, -0.1).is_err());
        assert!(QuadratureGrid::plane(10.0, 0.001).is_err());
        let g = QuadratureGrid::default_plane();
        assert_eq!(g.nodes_per_axis(), 280);
        assert_eq!(g.node_count(), 280 * 280);
        let axis = g.axis();
        assert!((axis[0] + 6.975).abs() < 1e-12);
        assert!((axis[279] - 6.975).abs() < 1e-12);
    }

    #[test]
    fn zero_and_gaussian() {
        let g = QuadratureGrid::default_plane();
        let zero = integrate(|_| C64::new(0.0, 0.0), &g).unwrap();
        assert_eq!(zero, C64::new(0.0, 0.0));
        let v = integrate(|p| C64::new((-(p[0] * p[0] + p[1] * p[1])).exp(), 0.0), &g).unwrap();
        assert!((v.re - PI).abs() < 1e-8);
    }

    #[test]
    fn non_finite_node_is_named() {
        let g = QuadratureGrid::plane(1.0, 0.5).unwrap();
        let err = integrate(|p| C64::new(1.0 / (p[0] + 0.75), 0.0), &g).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("-0.75"), "{msg}");
    }

    #[test]
    fn separable_integral_matches_product_of_1d_closed_forms() {
        // ∫ e^{−|η|² + η} d²η/π with η = x + iy separates into
        // ∫e^{−x²+x}dx · ∫e^{−y²+iy}dy / π.
        let g = QuadratureGrid::default_plane();
        let v = integrate(
            |p| (C64::new(-(p[0] * p[0] + p[1] * p[1]), 0.0) + C64::new(p[0], p[1])).exp(),
            &g,
        )
        .unwrap()
            / PI;
        let one = C64::new(1.0, 0.0);
        let expected = gauss1d_closed(one, one).unwrap()
            * gauss1d_closed(one, C64::new(0.0, 1.0)).unwrap()
            / PI;
        assert!((v - expected).norm() < 1e-12, "{v} vs {expected}");
    }

    #[test]
    fn closed_form_values() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert!((gauss1d_closed(one, zero).unwrap().re - PI.sqrt()).abs() < 1e-15);
        assert!(gauss1d_closed(C64::new(0.0, 1.0), zero).is_err());
        assert!((gauss2d_closed(-one, zero, zero).unwrap() - one).norm() < 1e-15);
        assert!((gauss2d_closed(-one, one, one).unwrap().re - 1f64.exp()).abs() < 1e-14);
        assert!(gauss2d_closed(one, zero, zero).is_err());
        let v = gauss2d_general_closed(-one, zero, zero, C64::new(0.2, 0.0), C64::new(0.2, 0.0));
        assert!((v.unwrap().re - 1.0 / 0.84f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn general_form_lists_failures() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let err = gauss2d_general_closed(-one, zero, zero, C64::new(1.5, 0.0), zero).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("zeta+f+g"), "{msg}");
        assert!(msg.contains("zeta+f-g"), "{msg}");
        assert!(!msg.contains("Re(zeta-f+g)"), "{msg}");
    }
}
