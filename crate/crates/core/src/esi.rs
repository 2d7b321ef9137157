//! Equivalent surface impedance of a conductor sheet: double-plane model
//! interpolating between the DC sheet resistance 2/(sigma*zeta) and the
//! one-sided skin impedance (1+j)/(sigma*delta).

use crate::mesh::ConductorMaterial;
use crate::{C64, MU0};

#[allow(unused_imports)]
use num_traits::Float;

/// Surface impedance sample at one frequency.
#[derive(Debug, Clone, Copy)]
pub struct EsiValue {
    pub z_s: C64,
    pub frequency: f64,
    pub conductor_id: usize,
}

/// DC sheet resistance of one plane, ohms per square.
pub fn r_dc(material: &ConductorMaterial) -> f64 {
    2.0 / (material.sigma * material.thickness)
}

/// High-frequency coefficient: Z -> (1+j) R_RF sqrt(f).
pub fn r_rf(material: &ConductorMaterial) -> f64 {
    (core::f64::consts::PI * MU0 / material.sigma).sqrt()
}

/// Double-plane surface impedance, ohms per square.
///
/// Z = (1+j) R_RF sqrt(f) / (1 - exp(-(1+j) R_RF sqrt(f) / R_DC)).
/// Near f = 0 the quotient is evaluated by a truncated Taylor expansion of
/// u/(1 - e^-u) to avoid the 0/0 cancellation; at f = 0 it returns R_DC
/// exactly.
pub fn esi(material: &ConductorMaterial, f: f64) -> C64 {
    debug_assert!(material.sigma > 0.0 && material.thickness > 0.0);
    debug_assert!(f >= 0.0);
    let rdc = r_dc(material);
    if f == 0.0 {
        return C64::new(rdc, 0.0);
    }
    let x = r_rf(material) * f.sqrt();
    let u = C64::new(1.0, 1.0) * (x / rdc);
    if u.norm() < 1e-4 {
        // (1 - e^-u)/u = 1 - u/2 + u^2/6 - u^3/24 (+O(u^4))
        let series = C64::new(1.0, 0.0) - u / 2.0 + u * u / 6.0 - u * u * u / 24.0;
        return rdc / series;
    }
    C64::new(1.0, 1.0) * x / (C64::new(1.0, 0.0) - (-u).exp())
}

/// Skin depth 1/sqrt(pi f mu0 sigma), meters.
pub fn skin_depth(material: &ConductorMaterial, f: f64) -> f64 {
    assert!(f > 0.0, "skin depth undefined for f <= 0");
    1.0 / (core::f64::consts::PI * f * MU0 * material.sigma).sqrt()
}
