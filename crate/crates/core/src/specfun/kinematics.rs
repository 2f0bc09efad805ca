use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Selects a sheet of the energy Riemann surface.
///
/// `k_branch = +1` picks the wave number with `Im k >= 0` (physical sheet),
/// `k_branch = -1` the one with `Im k <= 0` (where resonances live). On the
/// positive real energy axis both give `k > 0`, the rim from which each
/// sheet is continued. `log_branch` counts extra windings of the logarithm in
/// the Coulomb factor `h(η)`; zero is the principal branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetSelector {
    pub k_branch: i8,
    pub log_branch: i32,
}

impl SheetSelector {
    pub const PHYSICAL: SheetSelector = SheetSelector { k_branch: 1, log_branch: 0 };
    pub const RESONANCE: SheetSelector = SheetSelector { k_branch: -1, log_branch: 0 };

    pub fn new(k_branch: i8, log_branch: i32) -> Result<Self> {
        if k_branch != 1 && k_branch != -1 {
            return Err(Error::InvalidParams(format!("k_branch must be ±1, got {k_branch}")));
        }
        Ok(Self { k_branch, log_branch })
    }

    pub fn label(&self) -> String {
        let side = if self.k_branch > 0 { "phys" } else { "unphys" };
        format!("{side}:{}", self.log_branch)
    }
}

impl Default for SheetSelector {
    fn default() -> Self {
        Self::PHYSICAL
    }
}

/// Energy-dependent kinematic quantities with `ħ = 1`.
///
/// `z = 2kη` is the Coulomb strength (the product `2μ e² Z₁Z₂`), constant in energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub energy: Complex64,
    pub mu: f64,
    pub z: f64,
    pub k: Complex64,
    pub eta: Complex64,
    pub sheet: SheetSelector,
}

impl Kinematics {
    /// Builds kinematics for energy `E` on the given sheet.
    pub fn new(energy: Complex64, mu: f64, z: f64, sheet: SheetSelector) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::Domain(format!("reduced mass must be positive, got {mu}")));
        }
        if energy.norm() == 0.0 {
            return Err(Error::Domain("threshold E = 0 is excluded".into()));
        }
        let s = (2.0 * mu * energy).sqrt();
        let k = if s.im > 0.0 {
            if sheet.k_branch > 0 { s } else { -s }
        } else if s.im < 0.0 {
            if sheet.k_branch > 0 { -s } else { s }
        } else {
            s
        };
        Ok(Self::assemble(energy, mu, z, k, sheet))
    }

    /// Real-energy convenience constructor on the physical sheet.
    pub fn real(energy: f64, mu: f64, z: f64) -> Result<Self> {
        Self::new(Complex64::new(energy, 0.0), mu, z, SheetSelector::PHYSICAL)
    }

    /// Builds kinematics directly from the wave number; the sheet label is
    /// inferred from the sign of `Im k`.
    pub fn from_k(k: Complex64, mu: f64, z: f64, log_branch: i32) -> Result<Self> {
        if k.norm() == 0.0 {
            return Err(Error::Domain("threshold k = 0 is excluded".into()));
        }
        let energy = k * k / (2.0 * mu);
        let k_branch = if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) { -1 } else { 1 };
        Ok(Self::assemble(energy, mu, z, k, SheetSelector { k_branch, log_branch }))
    }

    /// Same energy, opposite wave number.
    pub fn flipped(&self) -> Self {
        let sheet = SheetSelector { k_branch: -self.sheet.k_branch, ..self.sheet };
        Self::assemble(self.energy, self.mu, self.z, -self.k, sheet)
    }

    fn assemble(energy: Complex64, mu: f64, z: f64, k: Complex64, sheet: SheetSelector) -> Self {
        Self { energy, mu, z, k, eta: z / (2.0 * k), sheet }
    }

    pub fn is_neutral(&self) -> bool {
        self.z == 0.0
    }

    /// `ln k` continued to the selected logarithmic winding.
    pub fn ln_k(&self) -> Complex64 {
        self.k.ln() + Complex64::new(0.0, TAU * self.sheet.log_branch as f64)
    }

    /// Logarithm of `|η|` continued off the real axis: `ln(|z|/2) − ln k`.
    ///
    /// For repulsive fields this is the principal `ln η`. For attractive
    /// fields `η < 0` on the real axis and the principal value would carry a
    /// constant `iπ`; this continuation keeps the Coulomb factor `M` real on
    /// the physical axis.
    pub fn ln_abs_eta(&self) -> Complex64 {
        (0.5 * self.z.abs()).ln() - self.ln_k()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_number_squares_to_energy() {
        for (re, im) in [(3.0, 0.0), (4.0, -0.5), (1.2, 0.7), (-0.3, -0.1)] {
            for sheet in [SheetSelector::PHYSICAL, SheetSelector::RESONANCE] {
                let kin = Kinematics::new(Complex64::new(re, im), 1.0, -1.0, sheet).unwrap();
                assert!((kin.k * kin.k - 2.0 * kin.energy).norm() < 1e-14);
                assert!((kin.eta * kin.k - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sheets_pick_sign_of_imaginary_part() {
        let e = Complex64::new(4.0, -0.5);
        let phys = Kinematics::new(e, 1.0, -1.0, SheetSelector::PHYSICAL).unwrap();
        let res = Kinematics::new(e, 1.0, -1.0, SheetSelector::RESONANCE).unwrap();
        assert!(phys.k.im >= 0.0);
        assert!(res.k.im <= 0.0);
        assert!((phys.k + res.k).norm() < 1e-15);
        let real = Kinematics::new(Complex64::new(3.0, 0.0), 1.0, -1.0, SheetSelector::RESONANCE).unwrap();
        assert!(real.k.re > 0.0 && real.k.im == 0.0);
    }

    #[test]
    fn threshold_and_bad_branch_are_rejected() {
        assert!(Kinematics::real(0.0, 1.0, -1.0).is_err());
        assert!(SheetSelector::new(0, 0).is_err());
    }

    #[test]
    fn ln_abs_eta_is_real_on_the_physical_axis() {
        let kin = Kinematics::real(2.0, 1.0, -1.0).unwrap();
        let l = kin.ln_abs_eta();
        assert!(l.im.abs() < 1e-16);
        assert!((l.re - (0.25f64).ln()).abs() < 1e-15);
    }
}
