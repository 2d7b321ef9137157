//! Analytic references used by tests, acceptance and the `reference` CLI
//! subcommand: classical round-wire skin-effect impedance (Bessel
//! solution) and the DC sheet resistance of a plate.

use crate::{C64, MU0};

#[allow(unused_imports)]
use num_traits::Float;

/// Round wire geometry and material.
#[derive(Debug, Clone, Copy)]
pub struct WireSpec {
    pub radius: f64,
    pub length: f64,
    pub sigma: f64,
}

/// |z| below which the power series is used; the Hankel asymptotic takes
/// over above. Both are valid in [9, 14].
const SERIES_LIMIT: f64 = 11.0;

/// J0 by power series (complex argument).
fn j0_series(z: C64) -> C64 {
    let q = -z * z * 0.25;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..300 {
        term = term * q / ((k * k) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// J1 by power series (complex argument).
fn j1_series(z: C64) -> C64 {
    let q = -z * z * 0.25;
    let mut term = z * 0.5;
    let mut sum = term;
    for k in 1..300 {
        term = term * q / ((k * (k + 1)) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// Hankel asymptotic J_nu(z) = sqrt(2/(pi z)) [P cos chi - Q sin chi],
/// chi = z - nu pi/2 - pi/4, with optimally truncated P/Q sums.
fn j_asymptotic(nu: usize, z: C64) -> C64 {
    let mu = 4.0 * (nu * nu) as f64;
    let chi = z - core::f64::consts::FRAC_PI_2 * (nu as f64 + 0.5);
    let mut p = C64::new(1.0, 0.0);
    let mut q = C64::new(0.0, 0.0);
    // a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k); P takes even k with
    // alternating sign, Q odd k
    let mut a = C64::new(1.0, 0.0); // a_k / z^k accumulated
    let mut prev_mag = f64::INFINITY;
    for k in 1..24usize {
        let num = mu - ((2 * k - 1) * (2 * k - 1)) as f64;
        a = a * num / (8.0 * k as f64) / z;
        let mag = a.norm();
        if mag > prev_mag {
            break; // asymptotic series started diverging
        }
        prev_mag = mag;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += a * sign;
        } else {
            q += a * sign;
        }
    }
    let front = (C64::new(2.0 / core::f64::consts::PI, 0.0) / z).sqrt();
    front * (p * chi.cos() - q * chi.sin())
}

/// Bessel J0 valid across the solver's argument range.
pub fn bessel_j0(z: C64) -> C64 {
    if z.norm() <= SERIES_LIMIT {
        j0_series(z)
    } else {
        j_asymptotic(0, z)
    }
}

/// Bessel J1 valid across the solver's argument range.
pub fn bessel_j1(z: C64) -> C64 {
    if z.norm() <= SERIES_LIMIT {
        j1_series(z)
    } else {
        j_asymptotic(1, z)
    }
}

/// Internal impedance of a round wire of the given length:
/// Z = k J0(ka) / (2 pi a sigma J1(ka)) * length, k = sqrt(-j w mu0 sigma).
/// At f = 0 this is the DC resistance length/(sigma pi a^2).
pub fn wire_internal_impedance(spec: &WireSpec, f: f64) -> C64 {
    let a = spec.radius;
    if f == 0.0 {
        return C64::new(
            spec.length / (spec.sigma * core::f64::consts::PI * a * a),
            0.0,
        );
    }
    let w = 2.0 * core::f64::consts::PI * f;
    let k = C64::new(0.0, -w * MU0 * spec.sigma).sqrt();
    let za = k * a;
    k / (2.0 * core::f64::consts::PI * a * spec.sigma) * bessel_j0(za) / bessel_j1(za)
        * spec.length
}

/// DC resistance of a rectangular plate: length/(sigma width thickness).
pub fn dc_plate_resistance(length: f64, width: f64, sigma: f64, thickness: f64) -> f64 {
    assert!(length > 0.0 && width > 0.0 && sigma > 0.0 && thickness > 0.0);
    length / (sigma * width * thickness)
}
