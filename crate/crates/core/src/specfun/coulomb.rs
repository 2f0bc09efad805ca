//! Coulomb wave functions.
//!
//! Real arguments use Steed's method (continued fractions CF1 for `F'/F` and
//! CF2 for `H'/H`, normalised by the Wronskian), with the regular function
//! taken from its power series at small `ρ`. Complex arguments are reached by
//! seeding the outgoing/incoming functions with their asymptotic expansion far
//! out along the real direction and stepping the Coulomb equation back to the
//! target with local Taylor series.
//!
//! Conventions: `H^{(±)} = F ∓ iG`, derivatives are with respect to `ρ`, and
//! `F'G − FG' = 1`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::factors::{barrier_c, barrier_c0_squared, coulomb_phase};
use super::kinematics::Kinematics;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Widest `|Im E|` for which complex continuation of `H^{(±)}` is trusted.
pub const COMPLEX_H_IM_E_BAND: f64 = 3.0;

const CF_EPS: f64 = 1e-16;
const CF_MAX_ITER: usize = 2_000_000;
const SERIES_RHO_MAX: f64 = 1.0;

/// Regular and irregular Coulomb functions with their `ρ`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombFG {
    pub f: f64,
    pub g: f64,
    pub fp: f64,
    pub gp: f64,
}

/// Incoming or outgoing Coulomb wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveSign {
    /// `H^{(+)} = F − iG`, outgoing (`∝ e^{+iρ}`).
    Outgoing,
    /// `H^{(−)} = F + iG`, incoming (`∝ e^{−iρ}`).
    Incoming,
}

impl WaveSign {
    fn s(self) -> f64 {
        match self {
            WaveSign::Outgoing => 1.0,
            WaveSign::Incoming => -1.0,
        }
    }
}

/// Both Coulomb-Hankel functions and their `ρ`-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelPair {
    pub h_plus: Complex64,
    pub hp_plus: Complex64,
    pub h_minus: Complex64,
    pub hp_minus: Complex64,
}

impl HankelPair {
    pub fn get(&self, sign: WaveSign) -> (Complex64, Complex64) {
        match sign {
            WaveSign::Outgoing => (self.h_plus, self.hp_plus),
            WaveSign::Incoming => (self.h_minus, self.hp_minus),
        }
    }

    /// `F = (H⁺ + H⁻)/2` and `F'`.
    pub fn regular(&self) -> (Complex64, Complex64) {
        (0.5 * (self.h_plus + self.h_minus), 0.5 * (self.hp_plus + self.hp_minus))
    }

    /// `G = (H⁻ − H⁺)/2i` and `G'`.
    pub fn irregular(&self) -> (Complex64, Complex64) {
        let d = 2.0 * I;
        ((self.h_minus - self.h_plus) / d, (self.hp_minus - self.hp_plus) / d)
    }

    pub fn from_fg(fg: &CoulombFG) -> Self {
        Self {
            h_plus: Complex64::new(fg.f, -fg.g),
            hp_plus: Complex64::new(fg.fp, -fg.gp),
            h_minus: Complex64::new(fg.f, fg.g),
            hp_minus: Complex64::new(fg.fp, fg.gp),
        }
    }
}

fn double_factorial_odd(l: u32) -> f64 {
    (0..=l).map(|n| (2 * n + 1) as f64).product()
}

/// Power series of the regular solution of
/// `u'' = [ℓ(ℓ+1)/x² − p/x − q] u` normalised to `x^{ℓ+1}` at the origin.
///
/// Returns `(u, u', max_term / |sum|)`; the last value measures cancellation.
pub(crate) fn regular_series(
    l: u32,
    p: Complex64,
    q: Complex64,
    x: Complex64,
) -> Result<(Complex64, Complex64, f64)> {
    let lf = l as f64;
    let mut c_prev2 = ZERO;
    let mut c_prev = Complex64::new(1.0, 0.0);
    let mut xp = Complex64::new(1.0, 0.0);
    let mut sum = c_prev;
    let mut dsum = c_prev * (lf + 1.0);
    let mut max_term = 1.0f64;
    let mut small = 0;
    for j in 1..5000usize {
        let jf = j as f64;
        let c = (p * c_prev + q * c_prev2) / (jf * (jf + 2.0 * lf + 1.0));
        xp *= x;
        let term = c * xp;
        sum += term;
        dsum += term * (jf + lf + 1.0);
        max_term = max_term.max(term.norm());
        if term.norm() <= 1e-18 * sum.norm() && c_prev.norm() * xp.norm() <= 1e-16 * sum.norm() {
            small += 1;
            if small >= 3 {
                let xl = x.powi(l as i32);
                return Ok((sum * xl * x, dsum * xl, max_term / sum.norm()));
            }
        } else {
            small = 0;
        }
        c_prev2 = c_prev;
        c_prev = c;
    }
    Err(Error::Convergence(format!("regular power series at x = {x}")))
}

fn steed_cf1(l: u32, eta: f64, rho: f64) -> Result<(f64, f64)> {
    let tiny = 1e-300;
    let s = |m: f64| m / rho + eta / m;
    let r2 = |m: f64| 1.0 + eta * eta / (m * m);
    let l1 = l as f64 + 1.0;
    let mut f = s(l1);
    if f == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = 0.0;
    let mut sign = 1.0;
    for j in 1..CF_MAX_ITER {
        let m = l as f64 + j as f64;
        let a = -r2(m);
        let b = s(m) + s(m + 1.0);
        d = b + a * d;
        if d == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if d < 0.0 {
            sign = -sign;
        }
        if (delta - 1.0).abs() < CF_EPS {
            return Ok((f, sign));
        }
    }
    Err(Error::Convergence(format!("CF1 for ℓ={l}, η={eta}, ρ={rho}")))
}

fn steed_cf2(l: u32, eta: f64, rho: f64) -> Result<Complex64> {
    let tiny = Complex64::new(1e-150, 0.0);
    let a = Complex64::new(1.0 + l as f64, eta);
    let c0 = Complex64::new(-(l as f64), eta);
    // Lentz on w = a1/(b1 + a2/(b2 + ...)), b0 = 0
    let mut f = tiny;
    let mut cc = f;
    let mut d = ZERO;
    for j in 1..CF_MAX_ITER {
        let jf = j as f64;
        let aj = (a + jf - 1.0) * (c0 + jf - 1.0);
        let bj = 2.0 * Complex64::new(rho - eta, jf);
        d = bj + aj * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        cc = bj + aj / cc;
        if cc.norm() == 0.0 {
            cc = tiny;
        }
        d = d.inv();
        let delta = cc * d;
        f *= delta;
        if (delta - 1.0).norm() < CF_EPS || aj.norm() == 0.0 {
            return Ok(I * (1.0 - eta / rho) + I / rho * f);
        }
    }
    Err(Error::Convergence(format!("CF2 for ℓ={l}, η={eta}, ρ={rho}")))
}

/// Regular power series for `F_ℓ(η, ρ)`, valid for any complex `η`, `ρ`.
pub fn coulomb_f_series(l: u32, eta: Complex64, rho: Complex64) -> Result<(Complex64, Complex64)> {
    let norm = barrier_c(l, eta)? / double_factorial_odd(l);
    let (u, up, _) = regular_series(l, 2.0 * eta, Complex64::new(-1.0, 0.0), rho)?;
    Ok((norm * u, norm * up))
}

/// `F_ℓ(η,ρ)`, `G_ℓ(η,ρ)` and their `ρ`-derivatives for real `η` and `ρ > 0`.
pub fn coulomb_fg(l: u32, eta: f64, rho: f64) -> Result<CoulombFG> {
    if !(rho > 0.0) || !rho.is_finite() || !eta.is_finite() {
        return Err(Error::Domain(format!("coulomb_fg needs finite η and ρ > 0, got η={eta}, ρ={rho}")));
    }
    if rho <= SERIES_RHO_MAX {
        // CF2 converges poorly this close to the origin: take F from its
        // series and G from inward continuation, where G is dominant.
        let eta_c = Complex64::new(eta, 0.0);
        let (fs, fps) = coulomb_f_series(l, eta_c, Complex64::new(rho, 0.0))?;
        let pair = hankel_pair_complex(l, eta_c, Complex64::new(rho, 0.0))?;
        let (g, gp) = pair.irregular();
        return Ok(CoulombFG { f: fs.re, g: g.re, fp: fps.re, gp: gp.re });
    }
    let (f_ratio, sign) = steed_cf1(l, eta, rho)?;
    let pq = steed_cf2(l, eta, rho)?;
    let (p, q) = (pq.re, pq.im);
    let gamma = (f_ratio - p) / q;
    let f = sign / (q * (1.0 + gamma * gamma)).sqrt();
    let g = gamma * f;
    let gp = p * g - q * f;
    let fp = f_ratio * f;
    Ok(CoulombFG { f, g, fp, gp })
}

/// `H^{(±)}_ℓ(η, ρ) = F ∓ iG` and its `ρ`-derivative for real arguments.
pub fn coulomb_h(l: u32, eta: f64, rho: f64, sign: WaveSign) -> Result<(Complex64, Complex64)> {
    let fg = coulomb_fg(l, eta, rho)?;
    Ok(HankelPair::from_fg(&fg).get(sign))
}

/// Asymptotic expansion of `H^{(±)}` in the convention `H^{(±)} = F ∓ iG` at large `|ρ|`.
/// Returns `None` when the series has not reached double precision before diverging.
fn asymptotic_h(
    l: u32,
    eta: Complex64,
    rho: Complex64,
    ln_2rho: Complex64,
    sigma: Complex64,
    sign: WaveSign,
) -> Option<(Complex64, Complex64)> {
    let s = sign.s();
    let a = s * I * eta - l as f64;
    let b = s * I * eta + l as f64 + 1.0;
    let x = s * 2.0 * I * rho;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut dsum = ZERO;
    let mut last = f64::INFINITY;
    let mut converged = false;
    for k in 0..400 {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((kf + 1.0) * x);
        let mag = term.norm();
        if mag > last && mag > 1e-17 {
            return None;
        }
        sum += term;
        dsum -= (kf + 1.0) * term / rho;
        last = mag;
        if mag < 1e-17 * sum.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let theta = rho - eta * ln_2rho - l as f64 * FRAC_PI_2 + sigma;
    let e = (s * I * theta).exp();
    let h_std = e * sum;
    let hp_std = e * (s * I * (1.0 - eta / rho) * sum + dsum);
    // F ∓ iG = ∓i (G ± iF)
    let pref = Complex64::new(0.0, -s);
    Some((pref * h_std, pref * hp_std))
}

/// One Taylor step of `ρ² u'' = (ℓ(ℓ+1) + 2ηρ − ρ²) u` from `s` to `s + h`.
fn taylor_step(
    l: u32,
    eta: Complex64,
    s: Complex64,
    h: Complex64,
    u: Complex64,
    up: Complex64,
) -> Result<(Complex64, Complex64)> {
    let ll = (l * (l + 1)) as f64;
    let s2 = s * s;
    let k0 = ll + 2.0 * eta * s - s2;
    let k1 = 2.0 * eta - 2.0 * s;
    let mut cm = u;
    let mut cm1 = up; // c_{m+1}
    let mut val = u + up * h;
    let mut der = up;
    let mut hp = h; // h^{m+1}
    let scale = u.norm() + up.norm() * h.norm();
    let mut small = 0;
    let mut cm_1 = ZERO;
    let mut cm_2 = ZERO;
    for m in 0..400usize {
        let mf = m as f64;
        let num = k0 * cm + k1 * cm_1 - cm_2 - 2.0 * s * (mf + 1.0) * mf * cm1 - mf * (mf - 1.0) * cm;
        let cm2 = num / (s2 * (mf + 2.0) * (mf + 1.0));
        der += cm2 * (mf + 2.0) * hp;
        hp *= h;
        let term = cm2 * hp;
        val += term;
        if term.norm() <= 1e-18 * scale && (cm2 * (mf + 2.0) * hp / h).norm() <= 1e-18 * (scale + der.norm()) {
            small += 1;
            if small >= 3 {
                return Ok((val, der));
            }
        } else {
            small = 0;
        }
        cm_2 = cm_1;
        cm_1 = cm;
        cm = cm1;
        cm1 = cm2;
    }
    Err(Error::Convergence(format!("Taylor step from ρ = {s}")))
}

/// Steps `(u, u')` from `start` to `end` along a straight line.
/// Returns the end values and the largest `|u|` seen.
fn step_path(
    l: u32,
    eta: Complex64,
    start: Complex64,
    end: Complex64,
    mut u: Complex64,
    mut up: Complex64,
) -> Result<(Complex64, Complex64, f64)> {
    let mut s = start;
    let mut peak = u.norm();
    let total = (end - start).norm();
    if total == 0.0 {
        return Ok((u, up, peak));
    }
    let dir = (end - start) / total;
    let mut travelled = 0.0;
    let mut steps = 0;
    while travelled < total {
        let radius = s.norm();
        if total - travelled <= 1e-14 * total {
            break;
        }
        let hmag = (0.4 * radius).min(1.0).min(total - travelled);
        if radius < 1e-10 {
            return Err(Error::ContinuationUnreliable(format!("path passes too close to ρ = 0 near {s}")));
        }
        let h = dir * hmag;
        let (nu, nup) = taylor_step(l, eta, s, h, u, up)?;
        u = nu;
        up = nup;
        travelled += hmag;
        s = if travelled >= total { end } else { start + dir * travelled };
        peak = peak.max(u.norm());
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::Convergence("Coulomb path stepping".into()));
        }
    }
    Ok((u, up, peak))
}

/// Waypoints from the asymptotic seed (right half-plane) to `rho`.
///
/// Targets in the left half-plane are reached along an arc of radius
/// `max(|ρ|, 2)` on `rho`'s side of the real axis, so the path neither
/// approaches the origin nor crosses the cut.
fn continuation_path(seed: Complex64, rho: Complex64) -> Vec<Complex64> {
    if rho.re >= 0.0 {
        return vec![seed, rho];
    }
    let radius = rho.norm().max(2.0);
    let end = rho.arg();
    let n = (end.abs() / (PI / 8.0)).ceil().max(1.0) as usize;
    let mut path = vec![seed];
    path.extend((0..=n).map(|i| Complex64::from_polar(radius, end * i as f64 / n as f64)));
    path.push(rho);
    path.dedup_by(|a, b| (*a - *b).norm() == 0.0);
    path
}

/// `H^{(±)}_ℓ(η, ρ)` for complex `η` and `ρ` on the principal continuation
/// (logarithm of `ρ` continuous along paths that avoid the negative real axis).
pub fn hankel_pair_complex(l: u32, eta: Complex64, rho: Complex64) -> Result<HankelPair> {
    if rho.im == 0.0 && rho.re <= 0.0 {
        return Err(Error::Domain(format!("ρ = {rho} lies on the branch cut")));
    }
    let sigma = coulomb_phase(l, eta)?;
    let r_asym = 25.0 + 4.0 * eta.norm() + l as f64;
    let mut shift = if rho.norm() >= r_asym { 0.0 } else { r_asym - rho.re };
    let mut attempts = 0;
    loop {
        let seed = rho + shift;
        let ln_2rho = (2.0 * seed).ln();
        let plus = asymptotic_h(l, eta, seed, ln_2rho, sigma, WaveSign::Outgoing);
        let minus = asymptotic_h(l, eta, seed, ln_2rho, sigma, WaveSign::Incoming);
        if let (Some((hp, hpp)), Some((hm, hmp))) = (plus, minus) {
            if shift == 0.0 {
                return Ok(HankelPair { h_plus: hp, hp_plus: hpp, h_minus: hm, hp_minus: hmp });
            }
            let path = continuation_path(seed, rho);
            let (mut h_plus, mut hp_plus, mut peak_p) = (hp, hpp, 0.0f64);
            let (mut h_minus, mut hp_minus, mut peak_m) = (hm, hmp, 0.0f64);
            for w in path.windows(2) {
                let (u, up, pk) = step_path(l, eta, w[0], w[1], h_plus, hp_plus)?;
                (h_plus, hp_plus, peak_p) = (u, up, peak_p.max(pk));
                let (u, up, pk) = step_path(l, eta, w[0], w[1], h_minus, hp_minus)?;
                (h_minus, hp_minus, peak_m) = (u, up, peak_m.max(pk));
            }
            for (v, peak) in [(h_plus, peak_p), (h_minus, peak_m)] {
                if peak > 1e8 * v.norm() {
                    return Err(Error::ContinuationUnreliable(format!(
                        "growth ratio {:.2e} while continuing to ρ = {rho}",
                        peak / v.norm()
                    )));
                }
            }
            return Ok(HankelPair { h_plus, hp_plus, h_minus, hp_minus });
        }
        attempts += 1;
        if attempts > 6 {
            return Err(Error::Convergence(format!("asymptotic seed for ρ = {rho}, η = {eta}")));
        }
        shift += r_asym;
    }
}

/// Adds `m` windings of `ln ρ` around the origin: `G → G + 2πi m (2η/C₀²) F`.
pub fn apply_log_winding(pair: HankelPair, eta: Complex64, m: i32) -> Result<HankelPair> {
    if m == 0 || eta == ZERO {
        return Ok(pair);
    }
    let (f, fp) = pair.regular();
    let coef = I * (TAU * m as f64) * 2.0 * eta / barrier_c0_squared(eta)?;
    // H± = F ∓ iG, so ΔH± = ∓i ΔG
    Ok(HankelPair {
        h_plus: pair.h_plus - I * coef * f,
        hp_plus: pair.hp_plus - I * coef * fp,
        h_minus: pair.h_minus + I * coef * f,
        hp_minus: pair.hp_minus + I * coef * fp,
    })
}

/// `H^{(±)}_ℓ(η(k), kr)` and its `ρ`-derivative for complex energy.
///
/// The logarithm of `ρ = kr` is continued consistently with
/// [`Kinematics::ln_k`], so windings selected by `log_branch` are honoured.
pub fn coulomb_h_complex(l: u32, kin: &Kinematics, r: f64, sign: WaveSign) -> Result<(Complex64, Complex64)> {
    Ok(hankel_pair_for(l, kin, r)?.get(sign))
}

/// Both Hankel functions at `ρ = kr` for the given kinematics.
pub fn hankel_pair_for(l: u32, kin: &Kinematics, r: f64) -> Result<HankelPair> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if kin.energy.im.abs() > COMPLEX_H_IM_E_BAND {
        return Err(Error::ContinuationUnreliable(format!(
            "|Im E| = {} exceeds the validity band {COMPLEX_H_IM_E_BAND}",
            kin.energy.im.abs()
        )));
    }
    let rho = kin.k * r;
    if kin.energy.im == 0.0 && kin.k.im == 0.0 && kin.k.re > 0.0 && kin.eta.im == 0.0 && kin.sheet.log_branch == 0 {
        let fg = coulomb_fg(l, kin.eta.re, rho.re)?;
        return Ok(HankelPair::from_fg(&fg));
    }
    let pair = hankel_pair_complex(l, kin.eta, rho)?;
    // principal continuation has Im ln ρ = arg ρ; the sheet asks for Im(ln k)
    let wanted = kin.ln_k().im;
    let m = ((wanted - rho.arg()) / TAU).round() as i32;
    apply_log_winding(pair, kin.eta, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wronskian(fg: &CoulombFG) -> f64 {
        fg.fp * fg.g - fg.f * fg.gp
    }

    #[test]
    fn neutral_s_wave_is_sine_and_cosine() {
        for rho in [0.1, 0.7, 1.0, 2.5, 10.0, 40.0] {
            let fg = coulomb_fg(0, 0.0, rho).unwrap();
            assert!((fg.f - rho.sin()).abs() < 1e-13, "F at {rho}");
            assert!((fg.g - rho.cos()).abs() < 1e-13, "G at {rho}");
            assert!((fg.fp - rho.cos()).abs() < 1e-13);
            assert!((fg.gp + rho.sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn neutral_p_wave_riccati_bessel() {
        for rho in [0.3, 1.7, 4.4, 9.0] {
            let fg = coulomb_fg(1, 0.0, rho).unwrap();
            let f = rho.sin() / rho - rho.cos();
            let g = rho.cos() / rho + rho.sin();
            assert!((fg.f - f).abs() < 1e-13);
            assert!((fg.g - g).abs() < 1e-12);
        }
    }

    #[test]
    fn wronskian_on_grid() {
        for l in 0..3 {
            for eta in [-2.0, -0.7, -0.25, 0.0, 0.5, 2.0] {
                for i in 0..40 {
                    let rho = 0.1 * (500.0f64).powf(i as f64 / 39.0);
                    let fg = coulomb_fg(l, eta, rho).unwrap();
                    let w = wronskian(&fg);
                    assert!((w - 1.0).abs() < 1e-10, "ℓ={l} η={eta} ρ={rho}: W={w}");
                }
            }
        }
    }

    #[test]
    fn steed_matches_series_in_overlap() {
        for l in 0..3 {
            for eta in [-1.0, -0.25, 0.3] {
                for rho in [1.5, 3.0, 4.5, 6.0] {
                    let fg = coulomb_fg(l, eta, rho).unwrap();
                    let (fs, fps) = coulomb_f_series(l, Complex64::new(eta, 0.0), Complex64::new(rho, 0.0)).unwrap();
                    assert!((fg.f - fs.re).abs() < 1e-11 * (1.0 + fs.re.abs()), "F ℓ={l} η={eta} ρ={rho}: {} vs {}", fg.f, fs.re);
                    assert!((fg.fp - fps.re).abs() < 1e-11 * (1.0 + fps.re.abs()));
                }
            }
        }
    }

    #[test]
    fn hankel_sum_is_twice_regular() {
        let (hp, _) = coulomb_h(1, -0.25, 2.0, WaveSign::Outgoing).unwrap();
        let (hm, _) = coulomb_h(1, -0.25, 2.0, WaveSign::Incoming).unwrap();
        let fg = coulomb_fg(1, -0.25, 2.0).unwrap();
        assert!((hp + hm - 2.0 * fg.f).norm() < 1e-15);
    }

    #[test]
    fn neutral_hankel_exponentials() {
        let rho = 1.3;
        let (hp, _) = coulomb_h(0, 0.0, rho, WaveSign::Outgoing).unwrap();
        let (hm, _) = coulomb_h(0, 0.0, rho, WaveSign::Incoming).unwrap();
        assert!((hp - (-I) * (I * rho).exp()).norm() < 1e-13);
        assert!((hm - I * (-I * rho).exp()).norm() < 1e-13);
    }

    #[test]
    fn complex_route_agrees_with_steed_on_real_axis() {
        for l in 0..3 {
            for eta in [-0.5, -0.25, 0.4] {
                for rho in [0.8, 2.0, 7.0, 30.0, 90.0] {
                    let pair = hankel_pair_complex(l, Complex64::new(eta, 0.0), Complex64::new(rho, 0.0)).unwrap();
                    let fg = coulomb_fg(l, eta, rho).unwrap();
                    let (f, fp) = pair.regular();
                    let (g, gp) = pair.irregular();
                    let scale = 1.0 + fg.g.abs();
                    assert!((f.re - fg.f).abs() < 1e-9 * scale && f.im.abs() < 1e-9 * scale, "F ℓ={l} η={eta} ρ={rho}: {f} vs {}", fg.f);
                    assert!((g.re - fg.g).abs() < 1e-9 * scale, "G ℓ={l} η={eta} ρ={rho}: {g} vs {}", fg.g);
                    assert!((fp.re - fg.fp).abs() < 1e-9 * (1.0 + fg.gp.abs()));
                    assert!((gp.re - fg.gp).abs() < 1e-9 * (1.0 + fg.gp.abs()));
                }
            }
        }
    }

    #[test]
    fn complex_neutral_s_wave_closed_form() {
        for rho in [Complex64::new(2.0, -0.7), Complex64::new(0.5, 0.3), Complex64::new(-1.0, -0.4)] {
            let pair = hankel_pair_complex(0, ZERO, rho).unwrap();
            assert!((pair.h_plus - (-I) * (I * rho).exp()).norm() < 1e-11 * pair.h_plus.norm());
            assert!((pair.h_minus - I * (-I * rho).exp()).norm() < 1e-11 * pair.h_minus.norm());
        }
    }

    #[test]
    fn complex_wronskian_is_constant() {
        // W(H⁻, H⁺) = 2i in ρ for any complex η, ρ
        let eta = Complex64::new(-0.24, 0.015);
        for rho in [Complex64::new(2.8, -0.2), Complex64::new(1.0, -0.05), Complex64::new(0.6, 0.4)] {
            for l in 0..3 {
                let p = hankel_pair_complex(l, eta, rho).unwrap();
                let w = p.h_minus * p.hp_plus - p.hp_minus * p.h_plus;
                assert!((w - 2.0 * I).norm() < 1e-10, "ℓ={l} ρ={rho}: W={w}");
            }
        }
    }
}
