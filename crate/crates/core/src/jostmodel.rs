//! Semi-analytic Jost functions
//!
//! `f^{in/out}(E) = e^{∓iσ} k^ℓ {(k/D) A(E) − [M(k) ± i] D B(E)}`
//!
//! where all multivalued dependence sits in the Coulomb factors `σ`, `D`, `M`
//! and the single-valued parts `A`, `B` are polynomials in `E`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rmatrix::{r_matrix_value, RParams};
use crate::specfun::{coulomb_phase, d_factor, humblet_tilde, m_factor, Kinematics};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub use crate::poles::Resonance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisLabel {
    Resonance,
    Background,
}

impl BasisLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BasisLabel::Resonance => "resonance",
            BasisLabel::Background => "background",
        }
    }
}

/// Basis energies `E_n` (n = 1..N) of the product polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyBasis {
    energies: Vec<f64>,
    labels: Vec<BasisLabel>,
}

impl PolyBasis {
    pub fn new(energies: Vec<f64>, labels: Vec<BasisLabel>) -> Result<Self> {
        if energies.len() != labels.len() {
            return Err(Error::InvalidParams(format!(
                "{} basis energies but {} labels",
                energies.len(),
                labels.len()
            )));
        }
        for (i, e) in energies.iter().enumerate() {
            if !e.is_finite() {
                return Err(Error::InvalidParams(format!("basis energy {i} is not finite")));
            }
            if energies[..i].contains(e) {
                return Err(Error::InvalidParams(format!("basis energy {e} appears twice")));
            }
        }
        Ok(Self { energies, labels })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    /// Number of basis energies `N`.
    pub fn order(&self) -> usize {
        self.energies.len()
    }
}

/// `𝒫₀(E) = Π(E_m − E)` for `n = 0`, otherwise the same product without the
/// `n`-th factor (so `𝒫_n(E_n) ≠ 0`).
pub fn poly_p(basis: &PolyBasis, n: usize, e: Complex64) -> Complex64 {
    basis
        .energies
        .iter()
        .enumerate()
        .filter(|&(m, _)| m + 1 != n)
        .fold(ONE, |acc, (_, &em)| acc * (em - e))
}

/// Real coefficients of `A = Σ α_n 𝒫_n` and `B = Σ β_n 𝒫_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ABParams {
    pub l: u32,
    pub basis: PolyBasis,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ABParamsFile {
    l: u32,
    #[serde(rename = "N")]
    n: usize,
    energies: Vec<f64>,
    labels: Vec<BasisLabel>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl Serialize for ABParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ABParamsFile {
            l: self.l,
            n: self.basis.order(),
            energies: self.basis.energies.clone(),
            labels: self.basis.labels.clone(),
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ABParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = ABParamsFile::deserialize(d)?;
        if f.n != f.energies.len() {
            return Err(serde::de::Error::custom(format!("N = {} but {} energies", f.n, f.energies.len())));
        }
        let basis = PolyBasis::new(f.energies, f.labels).map_err(serde::de::Error::custom)?;
        ABParams::new(f.l, basis, f.alpha, f.beta).map_err(serde::de::Error::custom)
    }
}

impl ABParams {
    pub fn new(l: u32, basis: PolyBasis, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let n = basis.order() + 1;
        if alpha.len() != n || beta.len() != n {
            return Err(Error::InvalidParams(format!(
                "need {n} α and β coefficients, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        if alpha.iter().chain(&beta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite coefficient".into()));
        }
        Ok(Self { l, basis, alpha, beta })
    }

    pub fn zeros(l: u32, basis: PolyBasis) -> Self {
        let n = basis.order() + 1;
        Self { l, basis, alpha: vec![0.0; n], beta: vec![0.0; n] }
    }
}

pub fn eval_a_b(params: &ABParams, e: Complex64) -> (Complex64, Complex64) {
    let mut a = Complex64::new(0.0, 0.0);
    let mut b = Complex64::new(0.0, 0.0);
    for n in 0..params.alpha.len() {
        let p = poly_p(&params.basis, n, e);
        a += params.alpha[n] * p;
        b += params.beta[n] * p;
    }
    (a, b)
}

/// Truncated Taylor series of `A` and `B` around `E₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorParams {
    pub l: u32,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "E0")]
    pub e0: f64,
}

impl TaylorParams {
    pub fn new(l: u32, a: Vec<f64>, b: Vec<f64>, e0: f64) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidParams(format!("Taylor coefficient lengths {} and {}", a.len(), b.len())));
        }
        Ok(Self { l, a, b, e0 })
    }

    pub fn order(&self) -> usize {
        self.a.len() - 1
    }
}

pub fn eval_a_b_taylor(params: &TaylorParams, e: Complex64) -> (Complex64, Complex64) {
    let x = e - params.e0;
    let horner = |c: &[f64]| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * x + v);
    (horner(&params.a), horner(&params.b))
}

/// `f_in`, `f_out` from given single-valued parts at the kinematics `kin`.
pub fn jost_from_ab(kin: &Kinematics, l: u32, a: Complex64, b: Complex64) -> Result<(Complex64, Complex64)> {
    if kin.k.norm() == 0.0 {
        return Err(Error::Domain("Jost functions undefined at threshold".into()));
    }
    let (kin_in, kin_out) = braces(kin, l, a, b)?;
    let sigma = coulomb_phase(l, kin.eta)?;
    let kl = kin.k.powi(l as i32);
    Ok(((-I * sigma).exp() * kl * kin_in, (I * sigma).exp() * kl * kin_out))
}

/// The two braces `(k/D)A − (M ± i)DB`.
fn braces(kin: &Kinematics, l: u32, a: Complex64, b: Complex64) -> Result<(Complex64, Complex64)> {
    let d = d_factor(l, kin.eta, kin.k)?;
    let m = m_factor(kin)?;
    let base = kin.k / d * a;
    Ok((base - (m + I) * d * b, base - (m - I) * d * b))
}

/// Anything providing `A(E)` and `B(E)` for one partial wave.
pub trait SingleValuedParts: Sync {
    fn l(&self) -> u32;
    fn a_b(&self, kin: &Kinematics) -> Result<(Complex64, Complex64)>;
}

impl SingleValuedParts for ABParams {
    fn l(&self) -> u32 {
        self.l
    }
    fn a_b(&self, kin: &Kinematics) -> Result<(Complex64, Complex64)> {
        Ok(eval_a_b(self, kin.energy))
    }
}

impl SingleValuedParts for TaylorParams {
    fn l(&self) -> u32 {
        self.l
    }
    fn a_b(&self, kin: &Kinematics) -> Result<(Complex64, Complex64)> {
        Ok(eval_a_b_taylor(self, kin.energy))
    }
}

impl SingleValuedParts for RParams {
    fn l(&self) -> u32 {
        self.l
    }
    fn a_b(&self, kin: &Kinematics) -> Result<(Complex64, Complex64)> {
        ab_from_rmatrix(self, kin)
    }
}

/// `S = e^{2iσ} (kA − [M−i]D²B) / (kA − [M+i]D²B)`.
pub fn s_matrix_from_ab(kin: &Kinematics, l: u32, a: Complex64, b: Complex64) -> Result<Complex64> {
    let (den, num) = braces(kin, l, a, b)?;
    if den.norm() == 0.0 || den.norm() < 1e-15 * num.norm() {
        return Err(Error::Pole { re: kin.energy.re, im: kin.energy.im });
    }
    let sigma = coulomb_phase(l, kin.eta)?;
    Ok((2.0 * I * sigma).exp() * num / den)
}

pub fn s_matrix_model<P: SingleValuedParts + ?Sized>(kin: &Kinematics, params: &P) -> Result<Complex64> {
    let (a, b) = params.a_b(kin)?;
    s_matrix_from_ab(kin, params.l(), a, b)
}

/// Incoming Jost function of a model, the target of resonance searches.
pub fn f_in_model<P: SingleValuedParts + ?Sized>(kin: &Kinematics, params: &P) -> Result<Complex64> {
    let (a, b) = params.a_b(kin)?;
    Ok(jost_from_ab(kin, params.l(), a, b)?.0)
}

/// Partial cross sections for waves `0..=l_max` (missing waves contribute
/// nothing) and their sum, at real energy on the physical sheet.
pub fn sigma_model<P: SingleValuedParts>(
    spec: &crate::oracle::PotentialSpec,
    params: &[P],
    e: f64,
    l_max: u32,
) -> Result<(Vec<f64>, f64)> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!("cross sections need E > 0, got {e}")));
    }
    let kin = spec.kinematics(Complex64::new(e, 0.0), crate::specfun::SheetSelector::PHYSICAL)?;
    let k2 = kin.k.norm_sqr();
    let mut out = vec![0.0; l_max as usize + 1];
    for p in params.iter().filter(|p| p.l() <= l_max) {
        let s = s_matrix_model(&kin, p)?;
        out[p.l() as usize] = std::f64::consts::PI / k2 * (2 * p.l() + 1) as f64 * (s - 1.0).norm_sqr();
    }
    let total = out.iter().sum();
    Ok((out, total))
}

/// Single-valued parts equivalent to an R-matrix parametrisation (common
/// factor `1/Q` dropped):
/// `A = G̃ − [aG̃′ − B_R G̃]R`, `B = −F̃ + [aF̃′ − B_R F̃]R` at `r = a`.
pub fn ab_from_rmatrix(rp: &RParams, kin: &Kinematics) -> Result<(Complex64, Complex64)> {
    let h = humblet_tilde(rp.l, kin, rp.a)?;
    let r = r_matrix_value(rp, kin.energy)?;
    let a = h.g - (rp.a * h.gp - rp.b_r * h.g) * r;
    let b = -h.f + (rp.a * h.fp - rp.b_r * h.f) * r;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::SheetSelector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis(e: &[f64]) -> PolyBasis {
        PolyBasis::new(e.to_vec(), vec![BasisLabel::Resonance; e.len()]).unwrap()
    }

    #[test]
    fn product_polynomials() {
        let b = basis(&[2.0]);
        assert_eq!(poly_p(&b, 0, c(0.5, 0.0)), c(1.5, 0.0));
        assert_eq!(poly_p(&b, 1, c(0.5, 0.0)), c(1.0, 0.0));
        let b = basis(&[1.78, 4.0, 0.0]);
        assert_eq!(poly_p(&b, 0, c(1.78, 0.0)), c(0.0, 0.0));
        assert!((poly_p(&b, 1, c(1.78, 0.0)) - c((4.0 - 1.78) * (0.0 - 1.78), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_basis_rejected() {
        assert!(PolyBasis::new(vec![1.0, 1.0], vec![BasisLabel::Background; 2]).is_err());
    }

    #[test]
    fn taylor_basics() {
        let t = TaylorParams::new(0, vec![1.5, 2.0], vec![-0.5, 1.0], 3.0).unwrap();
        assert_eq!(eval_a_b_taylor(&t, c(3.0, 0.0)), (c(1.5, 0.0), c(-0.5, 0.0)));
    }

    #[test]
    fn neutral_free_collapse() {
        let kin = Kinematics::real(2.0, 1.0, 0.0).unwrap();
        let a = c(0.7, 0.0);
        let (fi, fo) = jost_from_ab(&kin, 2, a, c(0.0, 0.0)).unwrap();
        assert!((fi - a).norm() < 1e-14 && (fo - a).norm() < 1e-14);
    }

    #[test]
    fn model_s_matrix_is_unimodular_and_matches_ratio() {
        let p = ABParams::new(1, basis(&[3.85, 4.75, 0.0]), vec![23.197, 8.5161, 180.56, -185.34], vec![-8.3005, -5.3308, -6.5849, -75.727])
            .unwrap();
        for i in 0..20 {
            let e = 1.7 + 0.17 * i as f64;
            let kin = Kinematics::real(e, 1.0, -2.0).unwrap();
            let s = s_matrix_model(&kin, &p).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
            let (a, b) = eval_a_b(&p, kin.energy);
            let (fi, fo) = jost_from_ab(&kin, 1, a, b).unwrap();
            assert!((fo / fi - s).norm() < 1e-12);
        }
    }

    #[test]
    fn pure_coulomb_when_b_vanishes() {
        let kin = Kinematics::real(3.0, 1.0, -2.0).unwrap();
        let s = s_matrix_from_ab(&kin, 0, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let sigma = coulomb_phase(0, kin.eta).unwrap();
        assert!((s - (2.0 * I * sigma).exp()).norm() < 1e-14);
    }

    #[test]
    fn scaled_braces_swap_under_k_reflection() {
        // kA − (M∓i)D²B at −k equals −[kA − (M±i)D²B] at k when ln(−k) = ln k ∓ iπ
        let p = ABParams::new(0, basis(&[1.78, 4.0, 0.0]), vec![1.0, -0.3, 0.2, 0.5], vec![0.4, 0.1, -0.7, 0.2]).unwrap();
        let pi = c(0.0, std::f64::consts::PI);
        for l in 0..3 {
            let kin = Kinematics::new(c(2.3, -0.4), 1.0, -2.0, SheetSelector::RESONANCE).unwrap();
            let (a, b) = eval_a_b(&p, kin.energy);
            let scaled = |k: &Kinematics| {
                let (bi, bo) = braces(k, l, a, b).unwrap();
                let d = d_factor(l, k.eta, k.k).unwrap();
                (bi * d, bo * d)
            };
            let (bin, bout) = scaled(&kin);
            for shift in [-1.0, 1.0] {
                let minus_k = -kin.k;
                let want = kin.ln_k() + shift * pi;
                let branch = ((want - minus_k.ln()).im / std::f64::consts::TAU).round() as i32;
                let flipped = Kinematics::from_k(minus_k, 1.0, -2.0, branch).unwrap();
                assert!((flipped.ln_k() - want).norm() < 1e-14);
                let (fin2, fout2) = scaled(&flipped);
                if shift < 0.0 {
                    assert!((fout2 + bin).norm() < 1e-10 * bin.norm(), "l={l}: {fout2} vs {bin}");
                } else {
                    assert!((fin2 + bout).norm() < 1e-10 * bout.norm(), "l={l}: {fin2} vs {bout}");
                }
            }
        }
    }
}
