//! Phenomenological single-channel R-matrix baseline.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jostmodel::BasisLabel;
use crate::poles::{find_resonances, Resonance, SearchOptions, SearchRegion};
use crate::specfun::{coulomb_phase, hankel_pair_for, Kinematics};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default channel radii per partial wave.
pub const DEFAULT_CHANNEL_RADII: [f64; 3] = [0.53, 1.31, 0.94];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RParams {
    pub l: u32,
    pub energies: Vec<f64>,
    pub labels: Vec<BasisLabel>,
    pub gammas: Vec<f64>,
    pub a: f64,
    #[serde(rename = "B_R", default)]
    pub b_r: f64,
}

impl RParams {
    pub fn new(l: u32, energies: Vec<f64>, labels: Vec<BasisLabel>, gammas: Vec<f64>, a: f64, b_r: f64) -> Result<Self> {
        let p = Self { l, energies, labels, gammas, a, b_r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.energies.len() != self.gammas.len() || self.energies.len() != self.labels.len() {
            return Err(Error::InvalidParams(format!(
                "R-matrix sizes differ: {} energies, {} gammas, {} labels",
                self.energies.len(),
                self.gammas.len(),
                self.labels.len()
            )));
        }
        if !(self.a > 0.0) {
            return Err(Error::InvalidParams(format!("channel radius must be positive, got {}", self.a)));
        }
        if self.energies.iter().chain(&self.gammas).any(|v| !v.is_finite()) || !self.b_r.is_finite() {
            return Err(Error::InvalidParams("non-finite R-matrix parameter".into()));
        }
        Ok(())
    }

    /// Fitted parameter sets of the comparison fit, `ℓ = 0, 1, 2`.
    pub fn reference_set() -> Vec<RParams> {
        use BasisLabel::{Background as B, Resonance as R};
        vec![
            RParams::new(0, vec![0.0, 1.78, 4.0, 20.0], vec![B, R, R, B], vec![0.36862, 0.59070e-2, 0.44958, 0.88622], 0.53, 0.0),
            RParams::new(1, vec![0.0, 3.85, 10.0, 20.0], vec![B, R, B, B], vec![1.4806, 0.19240, 0.10105e-3, 3.0343], 1.31, 0.0),
            RParams::new(2, vec![0.0, 4.9, 20.0], vec![B, R, B], vec![1.2198, 0.3462, 1.5640], 0.94, 0.0),
        ]
        .into_iter()
        .map(|p| p.expect("reference parameters are valid"))
        .collect()
    }
}

/// `R(E) = Σ γ_n² / (E_n − E)`.
pub fn r_matrix_value(rp: &RParams, e: Complex64) -> Result<Complex64> {
    let mut r = Complex64::new(0.0, 0.0);
    for (&en, &g) in rp.energies.iter().zip(&rp.gammas) {
        let d = en - e;
        if d.norm() <= 1e-14 * (1.0 + en.abs()) {
            return Err(Error::Pole { re: e.re, im: e.im });
        }
        r += g * g / d;
    }
    Ok(r)
}

/// Numerator and denominator of the R-matrix S-matrix,
/// `H^∓ − [aH^∓′ − B_R H^∓]R` at `r = a`, times `Π(E_n − E)` to cancel the
/// poles of `R`.
fn matching(rp: &RParams, kin: &Kinematics) -> Result<(Complex64, Complex64)> {
    let pair = hankel_pair_for(rp.l, kin, rp.a)?;
    let e = kin.energy;
    let p0: Complex64 = rp.energies.iter().map(|&en| en - e).product();
    // R·P₀ without dividing by a possibly vanishing factor
    let mut rp0 = Complex64::new(0.0, 0.0);
    for (n, &g) in rp.gammas.iter().enumerate() {
        let others: Complex64 = rp.energies.iter().enumerate().filter(|&(m, _)| m != n).map(|(_, &em)| em - e).product();
        rp0 += g * g * others;
    }
    let side = |h: Complex64, hp_rho: Complex64| {
        let hp = hp_rho * kin.k;
        h * p0 - (rp.a * hp - rp.b_r * h) * rp0
    };
    Ok((side(pair.h_minus, pair.hp_minus), side(pair.h_plus, pair.hp_plus)))
}

/// `S = −e^{2iσ} {H⁻ − [aH⁻′ − B_R H⁻]R} / {H⁺ − [aH⁺′ − B_R H⁺]R}`.
pub fn s_matrix_rmatrix(rp: &RParams, kin: &Kinematics) -> Result<Complex64> {
    let (num, den) = matching(rp, kin)?;
    if den.norm() == 0.0 || den.norm() < 1e-15 * num.norm() {
        return Err(Error::Pole { re: kin.energy.re, im: kin.energy.im });
    }
    let sigma = coulomb_phase(rp.l, kin.eta)?;
    Ok(-(2.0 * I * sigma).exp() * num / den)
}

/// Poles of the R-matrix S-matrix: zeros of its (pole-free) denominator.
pub fn rmatrix_pole_search(
    rp: &RParams,
    spec: &crate::oracle::PotentialSpec,
    region: &SearchRegion,
) -> Result<Vec<Resonance>> {
    let f = |e: Complex64| {
        let kin = spec.kinematics(e, region.sheet)?;
        matching(rp, &kin).map(|(_, den)| den)
    };
    find_resonances(&f, rp.l, region, &SearchOptions::default())
}
