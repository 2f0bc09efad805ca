//! Humblet's single-valued factors `F̃_ℓ(E,r)` and `G̃_ℓ(E,r)`, defined by
//! `F = D F̃` and `G = M D F̃ + (k/D) G̃`.

use num_complex::Complex64;

use super::coulomb::{hankel_pair_for, regular_series};
use super::factors::{d_factor, m_factor};
use super::kinematics::Kinematics;
use crate::error::{Error, Result};

/// Values and `r`-derivatives of the Humblet functions at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumbletTilde {
    pub f: Complex64,
    pub fp: Complex64,
    pub g: Complex64,
    pub gp: Complex64,
}

/// `F̃ = F/D` and `G̃ = (G − M D F̃) D/k` at radius `r`.
///
/// `F̃` is summed directly from its power series in `r`, whose coefficients
/// depend on `E` only through `k² = 2μE` and `kη`. `G̃` is assembled from the
/// continued irregular function on the sheet carried by `kin`.
pub fn humblet_tilde(l: u32, kin: &Kinematics, r: f64) -> Result<HumbletTilde> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let d = d_factor(l, kin.eta, kin.k)?;
    if d.norm() == 0.0 || kin.k.norm() == 0.0 {
        return Err(Error::Domain("D_ℓ vanishes at threshold".into()));
    }
    let norm: f64 = (0..=l).map(|n| (2 * n + 1) as f64).product();
    let k2 = 2.0 * kin.mu * kin.energy;
    let (u, up, _) = regular_series(
        l,
        Complex64::new(kin.z, 0.0),
        -k2,
        Complex64::new(r, 0.0),
    )?;
    let f = u / norm;
    let fp = up / norm;

    let m = m_factor(kin)?;
    let pair = hankel_pair_for(l, kin, r)?;
    let (g_coul, gp_rho) = pair.irregular();
    let gp_coul = gp_rho * kin.k;
    let g = (g_coul - m * d * f) * d / kin.k;
    let gp = (gp_coul - m * d * fp) * d / kin.k;
    Ok(HumbletTilde { f, fp, g, gp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::SheetSelector;

    #[test]
    fn neutral_s_wave() {
        let kin = Kinematics::real(2.0, 1.0, 0.0).unwrap();
        let k = kin.k.re;
        for r in [0.3, 1.0, 2.5] {
            let h = humblet_tilde(0, &kin, r).unwrap();
            assert!((h.f.re - (k * r).sin() / k).abs() < 1e-13);
            assert!((h.g.re - (k * r).cos()).abs() < 1e-12);
            assert!(h.f.im.abs() < 1e-15 && h.g.im.abs() < 1e-12);
        }
    }

    #[test]
    fn regular_factor_reproduces_coulomb_f() {
        let kin = Kinematics::real(3.0, 1.0, -1.0).unwrap();
        let h = humblet_tilde(1, &kin, 1.0).unwrap();
        let d = d_factor(1, kin.eta, kin.k).unwrap();
        let fg = crate::specfun::coulomb_fg(1, kin.eta.re, kin.k.re).unwrap();
        assert!((d * h.f - fg.f).norm() < 1e-13);
    }

    #[test]
    fn invariant_under_k_sign_flip() {
        for e in [Complex64::new(3.0, -0.4), Complex64::new(1.9, 0.8), Complex64::new(4.5, -1.2)] {
            let kin = Kinematics::new(e, 1.0, -1.0, SheetSelector::PHYSICAL).unwrap();
            let flipped = kin.flipped();
            for l in 0..3 {
                let a = humblet_tilde(l, &kin, 1.1).unwrap();
                let b = humblet_tilde(l, &flipped, 1.1).unwrap();
                for (x, y) in [(a.f, b.f), (a.fp, b.fp), (a.g, b.g), (a.gp, b.gp)] {
                    assert!((x - y).norm() < 1e-8 * (1.0 + x.norm()), "ℓ={l} E={e}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn flip_invariant_just_off_the_real_axis() {
        // the flipped ρ lies just above the negative real axis
        let e = Complex64::new(2.984, 0.0084);
        let kin = Kinematics::new(e, 1.0, -2.0, SheetSelector::PHYSICAL).unwrap();
        let a = humblet_tilde(1, &kin, 1.338).unwrap();
        let b = humblet_tilde(1, &kin.flipped(), 1.338).unwrap();
        assert!((a.g - b.g).norm() < 1e-10 * a.g.norm());
        assert!((a.gp - b.gp).norm() < 1e-10 * a.gp.norm());
    }

    #[test]
    fn invariant_under_log_winding() {
        let e = Complex64::new(3.2, -0.6);
        let kin0 = Kinematics::new(e, 1.0, -1.0, SheetSelector::RESONANCE).unwrap();
        let kin1 = Kinematics::new(e, 1.0, -1.0, SheetSelector { k_branch: -1, log_branch: 1 }).unwrap();
        let a = humblet_tilde(1, &kin0, 0.9).unwrap();
        let b = humblet_tilde(1, &kin1, 0.9).unwrap();
        assert!((a.g - b.g).norm() < 1e-9 * a.g.norm());
    }
}
