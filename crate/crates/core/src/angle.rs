//! Angle tokens: decimal radians or multiples of π such as `pi`, `-pi/2`,
//! `3pi/4`, `2*pi`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::C64;

pub fn parse_angle(token: &str) -> Result<f64> {
    let t = token.trim();
    let bad = || Error::Parse(format!("bad angle '{token}'"));
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let (numer, denom) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (body, 1.0),
    };
    let coeff = numer.strip_suffix("pi").ok_or_else(bad)?;
    let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
    let k = if coeff.is_empty() {
        1.0
    } else {
        coeff.parse::<f64>().map_err(|_| bad())?
    };
    if denom == 0.0 || !k.is_finite() {
        return Err(bad());
    }
    Ok(sign * k * PI / denom)
}

/// `e^{it}`, exact when `t` is within `1e-12` of a multiple of `π/2`.
pub fn unit_phase(t: f64) -> C64 {
    let q = t / FRAC_PI_2;
    let r = q.round();
    if (q - r).abs() < 1e-12 {
        match (r as i64).rem_euclid(4) {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    } else {
        C64::from_polar(1.0, t)
    }
}

/// Whether two angles agree modulo 2π.
pub fn same_angle(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(2.0 * PI);
    d < 1e-12 || 2.0 * PI - d < 1e-12
}
