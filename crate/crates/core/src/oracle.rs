//! Exact reference solver for the model potential `V(r) = s·r²e^{−r} + c/r`.
//!
//! The radial equation reads `φ'' = [ℓ(ℓ+1)/r² + (2μ/ħ²)V − k²]φ` with
//! `k² = 2μE/ħ²`, so the Sommerfeld parameter is `η = μc/(ħ²k)`.
//!
//! The regular solution is started from its power series near the origin,
//! integrated along the ray `r = x·e^{iθ}` and decomposed into incoming and
//! outgoing Coulomb waves at the matching radius:
//!
//! `φ → ½[H⁻ e^{iσ} f_in + H⁺ e^{−iσ} f_out]`,
//!
//! the factor ½ making `f_in = f_out = 1` for free motion.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, StepControl};
use crate::poles::{find_resonances, Resonance, SearchOptions, SearchRegion};
use crate::specfun::{coulomb_phase, hankel_pair_complex, HankelPair, Kinematics, SheetSelector};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub strength: f64,
    pub coulomb_z: f64,
    pub mu: f64,
    pub hbar: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self { strength: 7.5, coulomb_z: -1.0, mu: 1.0, hbar: 1.0 }
    }
}

impl PotentialSpec {
    pub fn free() -> Self {
        Self { strength: 0.0, coulomb_z: 0.0, ..Self::default() }
    }

    /// `2μ/ħ²`, the factor turning energies into squared wave numbers.
    pub fn mass_factor(&self) -> f64 {
        2.0 * self.mu / (self.hbar * self.hbar)
    }

    /// Kinematics at energy `E` on `sheet`, with `k² = 2μE/ħ²`.
    pub fn kinematics(&self, energy: Complex64, sheet: SheetSelector) -> Result<Kinematics> {
        self.validate()?;
        Kinematics::new(energy, self.mass_factor() / 2.0, self.reduced_z(), sheet)
    }

    /// Coulomb strength `2kη` of the reduced equation.
    pub fn reduced_z(&self) -> f64 {
        self.mass_factor() * self.coulomb_z
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.hbar > 0.0) || !self.strength.is_finite() || !self.coulomb_z.is_finite() {
            return Err(Error::InvalidParams(format!("invalid potential {self:?}")));
        }
        Ok(())
    }

    /// Short-range part of the reduced potential `(2μ/ħ²)V`.
    fn short_range(&self, r: Complex64) -> Complex64 {
        self.mass_factor() * self.strength * r * r * (-r).exp()
    }
}

/// Potential energy `V(r)`.
pub fn potential_value(spec: &PotentialSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("potential needs r > 0, got {r}")));
    }
    Ok(spec.strength * r * r * (-r).exp() + spec.coulomb_z / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub r_min: f64,
    pub r_max: f64,
    pub rotation_theta: f64,
    pub tolerance: f64,
    pub max_steps: usize,
    /// Sheet on which `k` is taken for complex energies.
    pub sheet: SheetSelector,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            r_min: 1e-4,
            r_max: 60.0,
            rotation_theta: 0.0,
            tolerance: 1e-12,
            max_steps: 2_000_000,
            sheet: SheetSelector::RESONANCE,
        }
    }
}

impl IntegrationSettings {
    /// Settings for locating resonances: rotated ray on the resonance sheet.
    pub fn rotated(theta: f64) -> Self {
        Self { rotation_theta: theta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.r_min > 0.0
            && self.r_max > self.r_min
            && self.tolerance > 0.0
            && (0.0..FRAC_PI_2).contains(&self.rotation_theta)
            && self.max_steps > 0;
        if !ok {
            return Err(Error::InvalidParams(format!("invalid integration settings {self:?}")));
        }
        Ok(())
    }
}

/// Ray angle that makes `k·r` real along the path: both Jost functions are
/// then extracted without exponential dominance of one wave.
pub fn balanced_rotation(spec: &PotentialSpec, energy: Complex64, sheet: SheetSelector) -> Result<f64> {
    let k = spec.kinematics(energy, sheet)?.k;
    Ok((-k.arg()).clamp(0.0, FRAC_PI_2 - 1e-3))
}

/// Regular solution and its r-derivative at complex `r` from the power series
/// `φ = Σ c_j r^{j+ℓ+1}`, normalised to `(kr)^{ℓ+1}/(2ℓ+1)!!`.
fn regular_series(spec: &PotentialSpec, l: u32, k2: Complex64, k: Complex64, r: Complex64) -> Result<(Complex64, Complex64)> {
    let l1 = l as i32 + 1;
    let dfact: f64 = (1..=l).map(|j| (2 * j + 1) as f64).product();
    // r²(reduced potential − k²) = z r − k² r² + Σ_{n≥4} q_n rⁿ with q_n from s·r⁴e^{−r}
    let q: Vec<f64> = (0..400usize)
        .scan(1.0f64, |fact, m| {
            if m > 0 {
                *fact *= m as f64;
            }
            Some(spec.mass_factor() * spec.strength * if m % 2 == 0 { 1.0 } else { -1.0 } / *fact)
        })
        .collect();
    let mut c: Vec<Complex64> = vec![k.powi(l1) / dfact];
    let mut phi = Complex64::new(0.0, 0.0);
    let mut dphi = Complex64::new(0.0, 0.0);
    let mut rp = r.powi(l1);
    let mut small = 0;
    for j in 0..400usize {
        if j > 0 {
            let mut acc = spec.reduced_z() * c[j - 1];
            if j >= 2 {
                acc -= k2 * c[j - 2];
            }
            for n in 4..=j {
                acc += q[n - 4] * c[j - n];
            }
            c.push(acc / (j as f64 * (j as f64 + 2.0 * l as f64 + 1.0)));
        }
        let term = c[j] * rp;
        phi += term;
        dphi += term * ((j as i32 + l1) as f64) / r;
        rp *= r;
        if term.norm() <= 1e-18 * phi.norm() {
            small += 1;
            if small >= 4 {
                return Ok((phi, dphi));
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Convergence(format!("origin series at r = {r}")))
}

/// Incoming and outgoing Jost functions of the exact problem.
pub fn solve_jost(spec: &PotentialSpec, l: u32, energy: Complex64, settings: &IntegrationSettings) -> Result<(Complex64, Complex64)> {
    settings.validate()?;
    let kin = spec.kinematics(energy, settings.sheet)?;
    let k = kin.k;
    let k2 = k * k;
    let theta = settings.rotation_theta;
    let w = Complex64::from_polar(1.0, theta);
    if (k * w).im < -1e-12 * k.norm() {
        return Err(Error::Domain(format!(
            "rotation θ = {theta} does not uncover E = {energy}: need θ ≥ {:.6}",
            -k.arg()
        )));
    }
    let rm = settings.r_max * w;
    let tail = (spec.short_range(rm) / k2).norm();
    if tail > 10.0 * settings.tolerance {
        return Err(Error::Convergence(format!(
            "short-range potential not negligible at r_max = {} (relative size {tail:.2e})",
            settings.r_max
        )));
    }

    let r0 = settings.r_min * w;
    let (phi0, dphi0) = regular_series(spec, l, k2, k, r0)?;
    let ll = (l * (l + 1)) as f64;
    let z = spec.reduced_z();
    let rhs = |x: f64, y: &[Complex64; 2]| {
        let r = x * w;
        let qv = ll / (r * r) + z / r + spec.short_range(r) - k2;
        [w * y[1], w * qv * y[0]]
    };
    let ctl = StepControl {
        rtol: settings.tolerance,
        atol: 1e-300,
        max_steps: settings.max_steps,
        initial_step: settings.r_min,
    };
    let out = integrate(rhs, settings.r_min, settings.r_max, [phi0, dphi0], &ctl, &[], |_, _| {})?;
    let [phi, dphi] = out.y;

    let pair = hankel_at(l, &kin, rm)?;
    let sigma = coulomb_phase(l, kin.eta)?;
    // r-derivatives of H: d/dr = k d/dρ
    let (hp, hpp) = (pair.h_plus, pair.hp_plus * k);
    let (hm, hmp) = (pair.h_minus, pair.hp_minus * k);
    let two_ik = 2.0 * I * k;
    let a = (phi * hpp - dphi * hp) / two_ik;
    let b = (hm * dphi - hmp * phi) / two_ik;
    let f_in = 2.0 * (-I * sigma).exp() * a;
    let f_out = 2.0 * (I * sigma).exp() * b;
    if !(f_in.re.is_finite() && f_in.im.is_finite() && f_out.re.is_finite() && f_out.im.is_finite()) {
        return Err(Error::Integration(format!("non-finite Jost function at E = {energy}")));
    }
    Ok((f_in, f_out))
}

/// `H^{(±)}` at complex radius `r`, with `ln ρ` continued as on the sheet of `kin`.
fn hankel_at(l: u32, kin: &Kinematics, r: Complex64) -> Result<HankelPair> {
    let rho = kin.k * r;
    let pair = if rho.im == 0.0 && kin.eta.im == 0.0 && rho.re > 0.0 && kin.sheet.log_branch == 0 {
        HankelPair::from_fg(&crate::specfun::coulomb_fg(l, kin.eta.re, rho.re)?)
    } else {
        hankel_pair_complex(l, kin.eta, rho)?
    };
    let wanted = kin.ln_k().im + r.arg();
    let m = ((wanted - rho.arg()) / std::f64::consts::TAU).round() as i32;
    crate::specfun::apply_log_winding(pair, kin.eta, m)
}

/// `S_ℓ = f_out / f_in`.
pub fn s_matrix_exact(spec: &PotentialSpec, l: u32, energy: Complex64, settings: &IntegrationSettings) -> Result<Complex64> {
    let (f_in, f_out) = solve_jost(spec, l, energy, settings)?;
    if f_in.norm() <= 1e-300 || f_in.norm() < 1e-14 * f_out.norm() {
        return Err(Error::Pole { re: energy.re, im: energy.im });
    }
    Ok(f_out / f_in)
}

/// Partial and total cross sections `σ_ℓ = (π/k²)(2ℓ+1)|S_ℓ − 1|²`.
pub fn cross_sections_exact(spec: &PotentialSpec, energy: f64, l_max: u32) -> Result<(Vec<f64>, f64)> {
    cross_sections_with(spec, energy, l_max, &IntegrationSettings::default())
}

pub fn cross_sections_with(spec: &PotentialSpec, energy: f64, l_max: u32, settings: &IntegrationSettings) -> Result<(Vec<f64>, f64)> {
    if !(energy > 0.0) {
        return Err(Error::Domain(format!("cross sections need E > 0, got {energy}")));
    }
    let real = IntegrationSettings { rotation_theta: 0.0, ..*settings };
    let k2 = spec.mass_factor() * energy;
    let sig: Result<Vec<f64>> = (0..=l_max)
        .map(|l| {
            let s = s_matrix_exact(spec, l, Complex64::new(energy, 0.0), &real)?;
            Ok(std::f64::consts::PI / k2 * (2 * l + 1) as f64 * (s - 1.0).norm_sqr())
        })
        .collect();
    let sig = sig?;
    let total = sig.iter().sum();
    Ok((sig, total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaPolicy {
    /// Same uncertainty for every point.
    Constant { value: f64 },
    /// Uncertainty proportional to the cross section, floored at `floor`.
    Relative { fraction: f64, floor: f64 },
}

impl Default for DeltaPolicy {
    fn default() -> Self {
        DeltaPolicy::Constant { value: 1.0 }
    }
}

impl DeltaPolicy {
    fn delta(&self, sigma: f64) -> Result<f64> {
        let d = match *self {
            DeltaPolicy::Constant { value } => value,
            DeltaPolicy::Relative { fraction, floor } => (fraction * sigma).max(floor),
        };
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParams(format!("uncertainty policy {self:?} gives Δ = {d}")));
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub energy: f64,
    pub sigma: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionDataset {
    pub points: Vec<DataPoint>,
    pub l_max: u32,
    pub provenance: String,
}

pub const DATASET_CSV_HEADER: &str = "E,sigma_total,delta";

impl CrossSectionDataset {
    pub fn new(points: Vec<DataPoint>, l_max: u32, provenance: impl Into<String>) -> Result<Self> {
        let d = Self { points, l_max, provenance: provenance.into() };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if !(p.energy > 0.0 && p.sigma >= 0.0 && p.delta > 0.0) || !p.sigma.is_finite() {
                return Err(Error::InvalidParams(format!("dataset point {i} invalid: {p:?}")));
            }
            if i > 0 && p.energy <= self.points[i - 1].energy {
                return Err(Error::InvalidParams(format!("dataset energies not increasing at point {i}")));
            }
        }
        Ok(())
    }

    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energy).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{DATASET_CSV_HEADER}\n");
        for p in &self.points {
            // shortest round-trip representation
            s.push_str(&format!("{:?},{:?},{:?}\n", p.energy, p.sigma, p.delta));
        }
        s
    }

    pub fn from_csv(text: &str, l_max: u32, provenance: impl Into<String>) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == DATASET_CSV_HEADER => {}
            other => return Err(Error::Parse(format!("expected header `{DATASET_CSV_HEADER}`, got {other:?}"))),
        }
        let mut points = Vec::new();
        for (n, line) in lines.enumerate() {
            let v: std::result::Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            match v {
                Ok(v) if v.len() == 3 => points.push(DataPoint { energy: v[0], sigma: v[1], delta: v[2] }),
                _ => return Err(Error::Parse(format!("bad dataset row {}: `{line}`", n + 2))),
            }
        }
        Self::new(points, l_max, provenance)
    }

    /// Path of the JSON sidecar holding `l_max` and provenance.
    pub fn metadata_path(csv: &Path) -> PathBuf {
        csv.with_extension("meta.json")
    }

    pub fn write(&self, csv: &Path) -> Result<()> {
        fs::write(csv, self.to_csv())?;
        let meta = DatasetMeta { l_max: self.l_max, provenance: self.provenance.clone(), n_points: self.points.len() };
        fs::write(Self::metadata_path(csv), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    pub fn read(csv: &Path) -> Result<Self> {
        let text = fs::read_to_string(csv)?;
        let meta_path = Self::metadata_path(csv);
        let meta: DatasetMeta = if meta_path.exists() {
            serde_json::from_str(&fs::read_to_string(meta_path)?)?
        } else {
            DatasetMeta { l_max: 2, provenance: String::from("unknown"), n_points: 0 }
        };
        Self::from_csv(&text, meta.l_max, meta.provenance)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetMeta {
    l_max: u32,
    provenance: String,
    n_points: usize,
}

/// Uniform energy grid including both endpoints.
pub fn uniform_grid(e_min: f64, e_max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { e_max } else { e_min + (e_max - e_min) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Placement of the data energies in `[E_min, E_max]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPolicy {
    /// Uniform, endpoints included.
    #[default]
    Closed,
    /// Uniform, strictly inside: `E_min + i(E_max − E_min)/(n+1)`, `i = 1..n`.
    Open,
}

impl GridPolicy {
    pub fn grid(&self, e_min: f64, e_max: f64, n: usize) -> Vec<f64> {
        match self {
            GridPolicy::Closed => uniform_grid(e_min, e_max, n),
            GridPolicy::Open => (1..=n).map(|i| e_min + (e_max - e_min) * i as f64 / (n + 1) as f64).collect(),
        }
    }
}

/// Synthetic total cross-section data on a uniform grid.
pub fn generate_dataset(
    spec: &PotentialSpec,
    e_min: f64,
    e_max: f64,
    n_points: usize,
    l_max: u32,
    delta_policy: DeltaPolicy,
    grid_policy: GridPolicy,
) -> Result<CrossSectionDataset> {
    if !(0.0 < e_min && e_min < e_max) || n_points < 2 {
        return Err(Error::InvalidParams(format!("dataset range ({e_min}, {e_max}) with {n_points} points")));
    }
    let grid = grid_policy.grid(e_min, e_max, n_points);
    let points: Result<Vec<DataPoint>> = grid
        .par_iter()
        .map(|&e| {
            let (_, sigma) = cross_sections_exact(spec, e, l_max)?;
            Ok(DataPoint { energy: e, sigma, delta: delta_policy.delta(sigma)? })
        })
        .collect();
    let provenance = format!(
        "exact cross sections, strength {}, coulomb_z {}, mu {}, {n_points} points ({grid_policy:?} grid) on [{e_min}, {e_max}], l_max {l_max}, delta {delta_policy:?}",
        spec.strength, spec.coulomb_z, spec.mu
    );
    CrossSectionDataset::new(points?, l_max, provenance)
}

/// Exact partial and total cross sections at each of `energies`, in parallel.
pub fn cross_sections_on(spec: &PotentialSpec, energies: &[f64], l_max: u32) -> Result<Vec<(Vec<f64>, f64)>> {
    energies.par_iter().map(|&e| cross_sections_exact(spec, e, l_max)).collect()
}

/// Zeros of the exact `f_in` in `region`, found on a rotated ray.
pub fn exact_resonances(
    spec: &PotentialSpec,
    l: u32,
    region: &SearchRegion,
    settings: &IntegrationSettings,
) -> Result<Vec<Resonance>> {
    let s = IntegrationSettings { sheet: region.sheet, ..*settings };
    let f = |e: Complex64| solve_jost(spec, l, e, &s).map(|(f_in, _)| f_in);
    find_resonances(&f, l, region, &SearchOptions::default())
}
