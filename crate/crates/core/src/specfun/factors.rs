//! Explicit Coulomb factors of the Jost-function representation: the Coulomb
//! phase shift, the barrier factor `C_ℓ(η)`, `D_ℓ = C_ℓ k^{ℓ+1}` and `M(k)`.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::gamma::{digamma, ln_gamma};
use super::kinematics::Kinematics;
use crate::error::Result;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn ln_factorial(l: u32) -> f64 {
    (1..=l).map(|n| (n as f64).ln()).sum()
}

/// Pure Coulomb phase shift `δ_ℓ^c = [ln Γ(ℓ+1+iη) − ln Γ(ℓ+1−iη)] / 2i`.
pub fn coulomb_phase(l: u32, eta: Complex64) -> Result<Complex64> {
    if eta == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let a = Complex64::new(l as f64 + 1.0, 0.0);
    let plus = ln_gamma(a + I * eta)?;
    let minus = ln_gamma(a - I * eta)?;
    Ok((plus - minus) / (2.0 * I))
}

/// Barrier factor normalised so that `C_ℓ(0) = 1` for every ℓ.
///
/// Equals the Abramowitz–Stegun `C_ℓ(η)` multiplied by `(2ℓ+1)!!`.
pub fn barrier_c(l: u32, eta: Complex64) -> Result<Complex64> {
    if eta == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let a = Complex64::new(l as f64 + 1.0, 0.0);
    let sum = ln_gamma(a + I * eta)? + ln_gamma(a - I * eta)?;
    Ok((-0.5 * PI * eta + 0.5 * sum - ln_factorial(l)).exp())
}

/// `C_0(η)²`, the s-wave Gamow factor.
pub fn barrier_c0_squared(eta: Complex64) -> Result<Complex64> {
    if eta == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok((-PI * eta + ln_gamma(one + I * eta)? + ln_gamma(one - I * eta)?).exp())
}

/// `D_ℓ(η, k) = C_ℓ(η) k^{ℓ+1}`, with the power taken as an integer power.
pub fn d_factor(l: u32, eta: Complex64, k: Complex64) -> Result<Complex64> {
    Ok(barrier_c(l, eta)? * k.powi(l as i32 + 1))
}

/// `h(η) = ½[ψ(1+iη) + ψ(1−iη)] − ln η` with the logarithm taken from
/// [`Kinematics::ln_abs_eta`].
pub fn h_function(kin: &Kinematics) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let eta = kin.eta;
    let psi = 0.5 * (digamma(one + I * eta)? + digamma(one - I * eta)?);
    Ok(psi - kin.ln_abs_eta())
}

/// `M(k) = 2η h(η) / C_0²(η)`; identically zero for neutral particles.
pub fn m_factor(kin: &Kinematics) -> Result<Complex64> {
    if kin.is_neutral() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let h = h_function(kin)?;
    Ok(2.0 * kin.eta * h / barrier_c0_squared(kin.eta)?)
}
