//! Closed-form constants.

use std::f64::consts::PI;

/// Γ(k/2) for integer k ≥ 1.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1);
    if k.is_multiple_of(2) {
        // Γ(m) = (m−1)!
        (1..k / 2).map(|i| i as f64).product()
    } else {
        // Γ(m + 1/2) = √π · Π_{i<m} (i + 1/2)
        let m = k / 2;
        PI.sqrt() * (0..m).map(|i| i as f64 + 0.5).product::<f64>()
    }
}

/// Area of the unit sphere S^{n−1} ⊂ ℝⁿ, 2π^{n/2}/Γ(n/2).
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// c_n = 4(n−1)/(n−2), the conformal Laplacian constant.
pub fn conformal_constant(n: usize) -> f64 {
    assert!(n >= 3, "conformal constant needs n ≥ 3");
    4.0 * (n as f64 - 1.0) / (n as f64 - 2.0)
}

/// First primes, one Halton base per axis.
pub const HALTON_BASES: [u32; 7] = [2, 3, 5, 7, 11, 13, 17];

/// i-th element of the van der Corput sequence in base b, in [0, 1).
pub fn halton(mut i: u32, b: u32) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}
