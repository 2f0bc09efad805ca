//! χ² fits of the Jost, Taylor and R-matrix models to total cross sections.
//!
//! Everything that does not depend on the fit parameters (Coulomb factors,
//! basis polynomials, Humblet functions at the channel radius) is computed
//! once per data energy, so an objective evaluation costs a few hundred
//! floating-point operations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jostmodel::{f_in_model, poly_p, s_matrix_model, ABParams, BasisLabel, PolyBasis, SingleValuedParts, TaylorParams};
use crate::oracle::{CrossSectionDataset, PotentialSpec};
use crate::poles::{find_resonances, Resonance, SearchOptions, SearchRegion};
use crate::rmatrix::{rmatrix_pole_search, RParams};
use crate::specfun::{coulomb_phase, d_factor, humblet_tilde, m_factor, Kinematics, SheetSelector};

/// Objective contribution of a data point at which the model has a pole.
pub const POLE_PENALTY: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Jost,
    Rmatrix,
    JostTaylor,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jost" => Ok(ModelKind::Jost),
            "rmatrix" => Ok(ModelKind::Rmatrix),
            "jost_taylor" => Ok(ModelKind::JostTaylor),
            _ => Err(Error::InvalidParams(format!("unknown model `{s}` (expected jost, rmatrix or jost_taylor)"))),
        }
    }
}

/// Fixed, non-fitted description of one partial wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveSpec {
    Jost { basis: PolyBasis },
    Rmatrix { energies: Vec<f64>, labels: Vec<BasisLabel>, a: f64, b_r: f64 },
    JostTaylor { order: usize, e0: f64 },
}

impl WaveSpec {
    fn n_params(&self) -> usize {
        match self {
            WaveSpec::Jost { basis } => 2 * (basis.order() + 1),
            WaveSpec::Rmatrix { energies, .. } => energies.len(),
            WaveSpec::JostTaylor { order, .. } => 2 * (order + 1),
        }
    }

    fn kind(&self) -> ModelKind {
        match self {
            WaveSpec::Jost { .. } => ModelKind::Jost,
            WaveSpec::Rmatrix { .. } => ModelKind::Rmatrix,
            WaveSpec::JostTaylor { .. } => ModelKind::JostTaylor,
        }
    }
}

/// Fitted parameters unpacked into per-wave model objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "waves", rename_all = "snake_case")]
pub enum FittedModel {
    Jost(Vec<ABParams>),
    Rmatrix(Vec<RParams>),
    JostTaylor(Vec<TaylorParams>),
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Jost(_) => ModelKind::Jost,
            FittedModel::Rmatrix(_) => ModelKind::Rmatrix,
            FittedModel::JostTaylor(_) => ModelKind::JostTaylor,
        }
    }

    pub fn l_max(&self) -> u32 {
        let n = match self {
            FittedModel::Jost(w) => w.len(),
            FittedModel::Rmatrix(w) => w.len(),
            FittedModel::JostTaylor(w) => w.len(),
        };
        n.saturating_sub(1) as u32
    }

    /// The wave `l` as a generic single-valued-parts provider.
    pub fn wave(&self, l: u32) -> Option<&dyn SingleValuedParts> {
        let i = l as usize;
        match self {
            FittedModel::Jost(w) => w.get(i).map(|p| p as &dyn SingleValuedParts),
            FittedModel::Rmatrix(w) => w.get(i).map(|p| p as &dyn SingleValuedParts),
            FittedModel::JostTaylor(w) => w.get(i).map(|p| p as &dyn SingleValuedParts),
        }
    }

    /// S-matrix of wave `l` at kinematics `kin` (any sheet).
    pub fn s_matrix(&self, l: u32, kin: &Kinematics) -> Result<Complex64> {
        let w = self.wave(l).ok_or_else(|| Error::InvalidParams(format!("model has no wave ℓ = {l}")))?;
        match self {
            FittedModel::Rmatrix(w) => crate::rmatrix::s_matrix_rmatrix(&w[l as usize], kin),
            _ => s_matrix_model(kin, w),
        }
    }

    /// Resonances of wave `l` in `region`: zeros of the model `f_in`, or for
    /// the R-matrix model the poles of its S-matrix.
    pub fn resonances(&self, spec: &PotentialSpec, l: u32, region: &SearchRegion) -> Result<Vec<Resonance>> {
        region.validate()?;
        if let FittedModel::Rmatrix(w) = self {
            let rp = w.get(l as usize).ok_or_else(|| Error::InvalidParams(format!("model has no wave ℓ = {l}")))?;
            return rmatrix_pole_search(rp, spec, region);
        }
        let w = self.wave(l).ok_or_else(|| Error::InvalidParams(format!("model has no wave ℓ = {l}")))?;
        let f = |e: Complex64| {
            let kin = spec.kinematics(e, region.sheet)?;
            f_in_model(&kin, w)
        };
        find_resonances(&f, l, region, &SearchOptions::default())
    }

    /// Partial and total cross sections at real energy.
    pub fn sigma(&self, spec: &PotentialSpec, e: f64) -> Result<(Vec<f64>, f64)> {
        if !(e > 0.0) {
            return Err(Error::Domain(format!("cross sections need E > 0, got {e}")));
        }
        let kin = spec.kinematics(Complex64::new(e, 0.0), SheetSelector::PHYSICAL)?;
        let k2 = kin.k.norm_sqr();
        let mut out = Vec::new();
        for l in 0..=self.l_max() {
            let s = self.s_matrix(l, &kin)?;
            out.push(PI / k2 * (2 * l + 1) as f64 * (s - 1.0).norm_sqr());
        }
        let total = out.iter().sum();
        Ok((out, total))
    }
}

/// Energy-only quantities at one data point for one wave.
#[derive(Debug, Clone)]
struct PointCache {
    k: f64,
    m: f64,
    d2: f64,
    phase: f64,
    weight: f64,
    /// Basis values: 𝒫_n, powers of (E − E₀), or Humblet values (F̃, F̃′, G̃, G̃′).
    basis: Vec<f64>,
    energy: f64,
}

#[derive(Debug, Clone)]
pub struct FitProblem {
    pub dataset: CrossSectionDataset,
    pub spec: PotentialSpec,
    pub waves: Vec<WaveSpec>,
    cache: Vec<Vec<PointCache>>,
    offsets: Vec<usize>,
    scales: Vec<f64>,
}

impl FitProblem {
    pub fn new(dataset: CrossSectionDataset, spec: PotentialSpec, waves: Vec<WaveSpec>) -> Result<Self> {
        dataset.validate()?;
        if waves.is_empty() {
            return Err(Error::InvalidParams("fit needs at least one partial wave".into()));
        }
        let kind = waves[0].kind();
        if waves.iter().any(|w| w.kind() != kind) {
            return Err(Error::InvalidParams("all partial waves must use the same model".into()));
        }
        let mut cache = Vec::new();
        for (l, w) in waves.iter().enumerate() {
            let l = l as u32;
            let rows: Result<Vec<PointCache>> = dataset
                .points
                .par_iter()
                .map(|p| {
                    let kin = spec.kinematics(Complex64::new(p.energy, 0.0), SheetSelector::PHYSICAL)?;
                    let d = d_factor(l, kin.eta, kin.k)?;
                    let e = Complex64::new(p.energy, 0.0);
                    let basis = match w {
                        WaveSpec::Jost { basis } => (0..=basis.order()).map(|n| poly_p(basis, n, e).re).collect(),
                        WaveSpec::JostTaylor { order, e0 } => (0..=*order).map(|n| (p.energy - e0).powi(n as i32)).collect(),
                        WaveSpec::Rmatrix { a, .. } => {
                            let h = humblet_tilde(l, &kin, *a)?;
                            vec![h.f.re, h.fp.re, h.g.re, h.gp.re]
                        }
                    };
                    Ok(PointCache {
                        k: kin.k.re,
                        m: m_factor(&kin)?.re,
                        d2: (d * d).re,
                        phase: coulomb_phase(l, kin.eta)?.re,
                        weight: PI / (kin.k.re * kin.k.re) * (2 * l + 1) as f64,
                        basis,
                        energy: p.energy,
                    })
                })
                .collect();
            cache.push(rows?);
        }
        let mut offsets = vec![0];
        for w in &waves {
            offsets.push(offsets.last().unwrap() + w.n_params());
        }
        let mut prob = Self { dataset, spec, waves, cache, offsets, scales: Vec::new() };
        prob.scales = prob.default_scales();
        Ok(prob)
    }

    /// Jost model with one basis per partial wave `ℓ = 0..bases.len()−1`.
    pub fn jost(dataset: CrossSectionDataset, spec: PotentialSpec, bases: Vec<PolyBasis>) -> Result<Self> {
        Self::new(dataset, spec, bases.into_iter().map(|basis| WaveSpec::Jost { basis }).collect())
    }

    pub fn model(&self) -> ModelKind {
        self.waves[0].kind()
    }

    pub fn l_max(&self) -> u32 {
        self.waves.len() as u32 - 1
    }

    /// Number of free parameters.
    pub fn n_params(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Parameter range of wave `l` in the packed vector.
    pub fn wave_range(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l]..self.offsets[l + 1]
    }

    /// Typical magnitudes of the parameters: the inverse of the largest basis
    /// value over the data, so every term contributes O(1) at unit scale.
    fn default_scales(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.n_params());
        for (l, w) in self.waves.iter().enumerate() {
            let rows = &self.cache[l];
            match w {
                WaveSpec::Jost { .. } | WaveSpec::JostTaylor { .. } => {
                    let nb = rows[0].basis.len();
                    let mut per = vec![0.0f64; nb];
                    let mut per_b = vec![0.0f64; nb];
                    for r in rows {
                        for n in 0..nb {
                            per[n] = per[n].max((r.k * r.basis[n]).abs());
                            per_b[n] = per_b[n].max((r.d2 * r.basis[n]).abs());
                        }
                    }
                    s.extend(per.iter().map(|v| if *v > 0.0 { 1.0 / v } else { 1.0 }));
                    s.extend(per_b.iter().map(|v| if *v > 0.0 { 1.0 / v } else { 1.0 }));
                }
                // γ² / (E_n − E) is O(1) when γ ~ √(distance from E_n to the data)
                WaveSpec::Rmatrix { energies, .. } => s.extend(energies.iter().map(|en| {
                    let d = rows.iter().map(|r| (en - r.energy).abs()).fold(f64::INFINITY, f64::min);
                    if d > 0.0 && d.is_finite() { d.sqrt() } else { 1.0 }
                })),
            }
        }
        s
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn unpack(&self, x: &[f64]) -> Result<FittedModel> {
        if x.len() != self.n_params() {
            return Err(Error::InvalidParams(format!("expected {} parameters, got {}", self.n_params(), x.len())));
        }
        let l_of = |l: usize| l as u32;
        Ok(match self.model() {
            ModelKind::Jost => FittedModel::Jost(
                self.waves
                    .iter()
                    .enumerate()
                    .map(|(l, w)| {
                        let WaveSpec::Jost { basis } = w else { unreachable!() };
                        let xs = &x[self.wave_range(l)];
                        let h = xs.len() / 2;
                        ABParams::new(l_of(l), basis.clone(), xs[..h].to_vec(), xs[h..].to_vec())
                    })
                    .collect::<Result<_>>()?,
            ),
            ModelKind::JostTaylor => FittedModel::JostTaylor(
                self.waves
                    .iter()
                    .enumerate()
                    .map(|(l, w)| {
                        let WaveSpec::JostTaylor { e0, .. } = w else { unreachable!() };
                        let xs = &x[self.wave_range(l)];
                        let h = xs.len() / 2;
                        TaylorParams::new(l_of(l), xs[..h].to_vec(), xs[h..].to_vec(), *e0)
                    })
                    .collect::<Result<_>>()?,
            ),
            ModelKind::Rmatrix => FittedModel::Rmatrix(
                self.waves
                    .iter()
                    .enumerate()
                    .map(|(l, w)| {
                        let WaveSpec::Rmatrix { energies, labels, a, b_r } = w else { unreachable!() };
                        RParams::new(l_of(l), energies.clone(), labels.clone(), x[self.wave_range(l)].to_vec(), *a, *b_r)
                    })
                    .collect::<Result<_>>()?,
            ),
        })
    }

    /// Inverse of [`FitProblem::unpack`].
    pub fn pack(&self, model: &FittedModel) -> Result<Vec<f64>> {
        let mut x = Vec::with_capacity(self.n_params());
        match model {
            FittedModel::Jost(w) => w.iter().for_each(|p| {
                x.extend(&p.alpha);
                x.extend(&p.beta);
            }),
            FittedModel::JostTaylor(w) => w.iter().for_each(|p| {
                x.extend(&p.a);
                x.extend(&p.b);
            }),
            FittedModel::Rmatrix(w) => w.iter().for_each(|p| x.extend(&p.gammas)),
        }
        if x.len() != self.n_params() || model.kind() != self.model() {
            return Err(Error::InvalidParams("parameter set does not match the fit problem".into()));
        }
        Ok(x)
    }

    /// Model partial cross section of wave `l` at data point `i`, or `None` at a pole.
    fn sigma_point(&self, l: usize, i: usize, xs: &[f64]) -> Option<f64> {
        let c = &self.cache[l][i];
        let (a, b) = match &self.waves[l] {
            WaveSpec::Jost { .. } | WaveSpec::JostTaylor { .. } => {
                let h = xs.len() / 2;
                let a: f64 = xs[..h].iter().zip(&c.basis).map(|(p, v)| p * v).sum();
                let b: f64 = xs[h..].iter().zip(&c.basis).map(|(p, v)| p * v).sum();
                (a, b)
            }
            WaveSpec::Rmatrix { energies, a: radius, b_r, .. } => {
                let mut r = 0.0;
                for (g, en) in xs.iter().zip(energies) {
                    let d = en - c.energy;
                    if d == 0.0 {
                        return None;
                    }
                    r += g * g / d;
                }
                let (f, fp, g, gp) = (c.basis[0], c.basis[1], c.basis[2], c.basis[3]);
                (g - (radius * gp - b_r * g) * r, -f + (radius * fp - b_r * f) * r)
            }
        };
        // S = e^{2iσ}(w + iv)/(w − iv) with w = kA − M D²B, v = D²B
        let v = c.d2 * b;
        let w = c.k * a - c.m * v;
        if (w == 0.0 && v == 0.0) || !w.is_finite() || !v.is_finite() {
            return None;
        }
        let s = (c.phase + v.atan2(w)).sin();
        Some(4.0 * c.weight * s * s)
    }

    /// Normalised residuals `(σ_fit − σ)/Δ`; points at model poles get
    /// `√POLE_PENALTY`.
    pub fn residuals(&self, x: &[f64], out: &mut [f64]) {
        for (i, p) in self.dataset.points.iter().enumerate() {
            let mut total = 0.0;
            let mut pole = false;
            for l in 0..self.waves.len() {
                match self.sigma_point(l, i, &x[self.wave_range(l)]) {
                    Some(s) => total += s,
                    None => pole = true,
                }
            }
            out[i] = if pole { POLE_PENALTY.sqrt() } else { (total - p.sigma) / p.delta };
        }
    }

    pub fn n_residuals(&self) -> usize {
        self.dataset.points.len()
    }
}

/// `Σ [(σ_i − σ_fit(E_i))/Δ_i]²`.
pub fn chi2(problem: &FitProblem, x: &[f64]) -> f64 {
    let mut r = vec![0.0; problem.n_residuals()];
    problem.residuals(x, &mut r);
    r.iter().map(|v| v * v).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    /// Objective-evaluation budget of the simplex stage.
    pub max_evals: usize,
    /// Relative spread of simplex values at which the simplex stops.
    pub simplex_tol: f64,
    /// Initial simplex edge in scaled units.
    pub simplex_step: f64,
    /// Simplex restarts from the current best point.
    pub restarts: usize,
    pub lm_max_iter: usize,
    /// Expected remaining χ² decrease, relative to χ², at which the
    /// least-squares polish stops.
    pub lm_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_evals: 20_000, simplex_tol: 1e-10, simplex_step: 0.5, restarts: 2, lm_max_iter: 1000, lm_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub index: usize,
    pub chi2_start: f64,
    pub chi2: f64,
    pub n_evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub params: Vec<f64>,
    pub fitted: FittedModel,
    pub chi2: f64,
    pub n_evaluations: usize,
    pub converged: bool,
    pub seed: Option<u64>,
    pub history: Vec<StartRecord>,
}

/// Counts objective evaluations for one minimisation.
struct Objective<'a> {
    problem: &'a FitProblem,
    evals: usize,
}

impl Objective<'_> {
    /// χ² at scaled coordinates `y` (parameters are `y ⊙ scales`).
    fn value(&mut self, y: &[f64]) -> f64 {
        self.evals += 1;
        let x: Vec<f64> = y.iter().zip(self.problem.scales()).map(|(a, s)| a * s).collect();
        chi2(self.problem, &x)
    }

    fn residuals(&mut self, y: &[f64], out: &mut [f64]) {
        self.evals += 1;
        let x: Vec<f64> = y.iter().zip(self.problem.scales()).map(|(a, s)| a * s).collect();
        self.problem.residuals(&x, out);
    }
}

/// Adaptive Nelder–Mead. Returns (best point, best value, converged).
fn nelder_mead(obj: &mut Objective, start: &[f64], step: f64, tol: f64, budget: usize) -> (Vec<f64>, f64, bool) {
    let n = start.len();
    if n == 0 {
        return (Vec::new(), obj.value(start), true);
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut pts: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += if p[i].abs() > 1e-12 { step * p[i].abs().max(0.1) } else { step };
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| obj.value(p)).collect();
    let mut used = n + 1;
    let mut converged = false;
    while used < budget {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let (best, worst) = (vals[0], vals[n]);
        if (worst - best).abs() <= tol * (best.abs() + 1e-300) || worst - best <= 1e-300 {
            converged = true;
            break;
        }
        let mut c = vec![0.0; n];
        for p in &pts[..n] {
            for j in 0..n {
                c[j] += p[j] / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| c[j] + t * (pts[n][j] - c[j])).collect() };
        let xr = along(-alpha);
        let fr = obj.value(&xr);
        used += 1;
        if fr < vals[0] {
            let xe = along(-alpha * gamma);
            let fe = obj.value(&xe);
            used += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = along(-alpha * rho);
                let fc = obj.value(&xc);
                (xc, fc)
            } else {
                let xc = along(rho);
                let fc = obj.value(&xc);
                (xc, fc)
            };
            used += 1;
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    for j in 0..n {
                        pts[i][j] = pts[0][j] + sigma * (pts[i][j] - pts[0][j]);
                    }
                    vals[i] = obj.value(&pts[i]);
                }
                used += n;
            }
        }
    }
    let b = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[b].clone(), vals[b], converged)
}

/// Levenberg–Marquardt on the residual vector with a central-difference
/// Jacobian. Converged when the Gauss–Newton estimate of the remaining
/// decrease, `½ gᵀ(JᵀJ)⁻¹g`, is below `tol·χ² + 1e-14·m`.
fn levenberg_marquardt(obj: &mut Objective, start: &[f64], max_iter: usize, tol: f64) -> (Vec<f64>, f64, bool) {
    let n = start.len();
    let m = obj.problem.n_residuals();
    let mut y = start.to_vec();
    let mut r = vec![0.0; m];
    obj.residuals(&y, &mut r);
    let mut f = r.iter().map(|v| v * v).sum::<f64>();
    if n == 0 {
        return (y, f, true);
    }
    let floor = 1e-14 * m as f64;
    let mut lambda = 1e-3;
    let mut rp = vec![0.0; m];
    let mut rm = vec![0.0; m];
    for _ in 0..max_iter {
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let h = 1e-6 * (1.0 + y[j].abs());
            let mut yp = y.clone();
            yp[j] += h;
            obj.residuals(&yp, &mut rp);
            yp[j] -= 2.0 * h;
            obj.residuals(&yp, &mut rm);
            for i in 0..m {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_column_slice(&r);
        let dmax = jtj.diagonal().max().max(1e-300);
        let damped = |mu: f64| {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += mu * jtj[(j, j)] + 1e-12 * dmax;
            }
            a.cholesky().map(|c| c.solve(&(-&g)))
        };
        // χ² = rᵀr, so the Gauss–Newton decrease is -gᵀδ with δ = −(JᵀJ)⁻¹g
        let edm = damped(0.0).map(|d| -g.dot(&d)).unwrap_or(f64::INFINITY);
        if edm <= tol * f + floor {
            return (y, f, true);
        }
        let mut improved = false;
        for _ in 0..30 {
            let Some(step) = damped(lambda) else {
                lambda *= 10.0;
                continue;
            };
            let yn: Vec<f64> = y.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let mut rn = vec![0.0; m];
            obj.residuals(&yn, &mut rn);
            let fnew: f64 = rn.iter().map(|v| v * v).sum();
            if fnew.is_finite() && fnew < f {
                y = yn;
                r = rn;
                f = fnew;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !improved {
            // no downhill step at any damping: a minimum to working precision
            return (y, f, true);
        }
    }
    (y, f, false)
}

/// Local minimisation from `start` (unscaled parameters): simplex with
/// restarts, then a Levenberg–Marquardt polish.
pub fn minimize(problem: &FitProblem, start: &[f64], options: &MinimizeOptions) -> Result<FitResult> {
    if start.len() != problem.n_params() || start.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("start vector has wrong length or non-finite entries".into()));
    }
    let mut obj = Objective { problem, evals: 0 };
    let y0: Vec<f64> = start.iter().zip(problem.scales()).map(|(a, s)| a / s).collect();
    let f0 = obj.value(&y0);
    let (mut y, mut f, mut converged) = (y0.clone(), f0, false);
    if options.max_evals > 0 {
        let per = options.max_evals / (options.restarts + 1);
        for round in 0..=options.restarts {
            let step = options.simplex_step / (1 + round) as f64;
            let (yn, fnew, conv) = nelder_mead(&mut obj, &y, step, options.simplex_tol, per);
            if fnew <= f {
                y = yn;
                f = fnew;
            }
            converged = conv;
        }
    }
    if options.lm_max_iter > 0 {
        let (yn, fnew, conv) = levenberg_marquardt(&mut obj, &y, options.lm_max_iter, options.lm_tol);
        if fnew <= f {
            y = yn;
            f = fnew;
        }
        converged = conv || converged;
    }
    let params: Vec<f64> = if y == y0 {
        start.to_vec()
    } else {
        y.iter().zip(problem.scales()).map(|(a, s)| a * s).collect()
    };
    let chi2_final = f;
    Ok(FitResult {
        model: problem.model(),
        fitted: problem.unpack(&params)?,
        params,
        chi2: chi2_final,
        n_evaluations: obj.evals,
        converged,
        seed: None,
        history: vec![StartRecord { index: 0, chi2_start: f0, chi2: chi2_final, n_evaluations: obj.evals, converged }],
    })
}

/// Start vector in which every wave carries a Breit–Wigner-like resonance
/// of width `width` at each of its resonance-labelled basis energies.
///
/// On the real axis the model phase is `δ = arg(w + iv)` with
/// `w = kA − M D²B`, `v = D²B`; the start makes `w + iv ∝ Π (E_n − E + iΓ/2)`
/// in the least-squares sense over the data energies, so the wave's Jost
/// function starts with zeros near `E_n − iΓ/2`. Waves without resonance
/// labels start as pure Coulomb scattering. Only the Jost model has labels to
/// use; R-matrix widths start at `width.sqrt()` and Taylor models at
/// `A = 1, B = 0`.
pub fn seeded_start(problem: &FitProblem, width: f64) -> Result<Vec<f64>> {
    if !(width > 0.0) {
        return Err(Error::InvalidParams(format!("seed width must be positive, got {width}")));
    }
    let mut x = Vec::with_capacity(problem.n_params());
    for (l, w) in problem.waves.iter().enumerate() {
        let rows = &problem.cache[l];
        match w {
            WaveSpec::Jost { basis } => {
                let resonances: Vec<f64> = basis
                    .energies()
                    .iter()
                    .zip(basis.labels())
                    .filter(|(_, lab)| **lab == BasisLabel::Resonance)
                    .map(|(e, _)| *e)
                    .collect();
                let nb = basis.order() + 1;
                let targets: Vec<Complex64> = rows
                    .iter()
                    .map(|c| resonances.iter().map(|en| Complex64::new(en - c.energy, width / 2.0)).product())
                    .collect();
                let norm = targets.iter().map(|t| t.norm()).fold(0.0, f64::max).max(1e-300);
                let design = |f: &dyn Fn(&PointCache) -> f64| {
                    DMatrix::from_fn(rows.len(), nb, |i, n| f(&rows[i]) * rows[i].basis[n])
                };
                let solve = |a: DMatrix<f64>, b: DVector<f64>| -> Result<DVector<f64>> {
                    a.svd(true, true)
                        .solve(&b, 1e-14)
                        .map_err(|e| Error::InvalidParams(format!("seeded start: {e}")))
                };
                let v = DVector::from_iterator(rows.len(), targets.iter().map(|t| t.im / norm));
                let beta = solve(design(&|c| c.d2), v)?;
                let w_rhs = DVector::from_iterator(
                    rows.len(),
                    rows.iter().zip(&targets).map(|(c, t)| {
                        let b: f64 = beta.iter().zip(&c.basis).map(|(p, q)| p * q).sum();
                        t.re / norm + c.m * c.d2 * b
                    }),
                );
                let alpha = solve(design(&|c| c.k), w_rhs)?;
                x.extend(alpha.iter());
                x.extend(beta.iter());
            }
            WaveSpec::JostTaylor { order, .. } => {
                x.push(1.0);
                x.extend(std::iter::repeat(0.0).take(2 * order + 1));
            }
            WaveSpec::Rmatrix { energies, .. } => x.extend(energies.iter().map(|_| width.sqrt())),
        }
    }
    Ok(x)
}

/// How random starts are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalePolicy {
    /// Uniform in `[−w, w]` times each parameter's natural scale.
    Scaled { half_width: f64 },
    /// Uniform in `[−w, w]` around a given centre, relative to the scales;
    /// start 0 is the centre itself.
    Around { center: Vec<f64>, half_width: f64 },
}

impl Default for ScalePolicy {
    fn default() -> Self {
        ScalePolicy::Scaled { half_width: 1.0 }
    }
}

/// Start vector number `index` of a seeded multistart.
pub fn start_vector(problem: &FitProblem, policy: &ScalePolicy, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let s = problem.scales();
    match policy {
        ScalePolicy::Scaled { half_width } => s.iter().map(|sc| rng.gen_range(-1.0..=1.0) * half_width * sc).collect(),
        ScalePolicy::Around { center, .. } if index == 0 => center.clone(),
        ScalePolicy::Around { center, half_width } => {
            center.iter().zip(s).map(|(c, sc)| c + rng.gen_range(-1.0..=1.0) * half_width * sc).collect()
        }
    }
}

/// Best of `n_starts` independent minimisations from seeded random starts.
///
/// Starts run in parallel; the result depends only on the inputs, not on
/// thread scheduling (ties go to the lowest start index). `converged` is
/// false only when no start converged; per-start flags are in `history`.
pub fn multistart(
    problem: &FitProblem,
    n_starts: usize,
    policy: &ScalePolicy,
    seed: u64,
    options: &MinimizeOptions,
) -> Result<FitResult> {
    if n_starts == 0 {
        return Err(Error::InvalidParams("multistart needs at least one start".into()));
    }
    if let ScalePolicy::Around { center, .. } = policy {
        if center.len() != problem.n_params() {
            return Err(Error::InvalidParams("multistart centre has the wrong length".into()));
        }
    }
    let runs: Result<Vec<FitResult>> = (0..n_starts)
        .into_par_iter()
        .map(|i| minimize(problem, &start_vector(problem, policy, seed, i), options))
        .collect();
    let runs = runs?;
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.chi2.total_cmp(&b.chi2).then(ia.cmp(ib)))
        .map(|(i, _)| i)
        .unwrap();
    let history: Vec<StartRecord> = runs
        .iter()
        .enumerate()
        .map(|(i, r)| StartRecord { index: i, ..r.history[0].clone() })
        .collect();
    let mut out = runs[best].clone();
    out.n_evaluations = runs.iter().map(|r| r.n_evaluations).sum();
    out.converged = runs.iter().any(|r| r.converged);
    out.seed = Some(seed);
    out.history = history;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub l: u32,
    pub n: usize,
    pub energy: Option<f64>,
    pub label: Option<BasisLabel>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamTable {
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
}

/// Per-(ℓ, n) parameter table: α/β for Jost models, a/b for Taylor, γ for R-matrix.
pub fn param_report(result: &FitResult) -> ParamTable {
    let mut rows = Vec::new();
    let columns = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let cols = match &result.fitted {
        FittedModel::Jost(w) => {
            for p in w {
                for n in 0..p.alpha.len() {
                    rows.push(ReportRow {
                        l: p.l,
                        n,
                        energy: (n > 0).then(|| p.basis.energies()[n - 1]),
                        label: (n > 0).then(|| p.basis.labels()[n - 1]),
                        values: vec![p.alpha[n], p.beta[n]],
                    });
                }
            }
            columns(&["alpha", "beta"])
        }
        FittedModel::JostTaylor(w) => {
            for p in w {
                for n in 0..p.a.len() {
                    rows.push(ReportRow { l: p.l, n, energy: None, label: None, values: vec![p.a[n], p.b[n]] });
                }
            }
            columns(&["a", "b"])
        }
        FittedModel::Rmatrix(w) => {
            for p in w {
                for n in 0..p.gammas.len() {
                    rows.push(ReportRow {
                        l: p.l,
                        n: n + 1,
                        energy: Some(p.energies[n]),
                        label: Some(p.labels[n]),
                        values: vec![p.gammas[n]],
                    });
                }
            }
            columns(&["gamma"])
        }
    };
    ParamTable { columns: cols, rows }
}

impl ParamTable {
    pub fn to_text(&self) -> String {
        let mut s = format!("{:>3} {:>3} {:>12} {:>11}", "l", "n", "E_nl", "type");
        for c in &self.columns {
            s.push_str(&format!(" {c:>22}"));
        }
        s.push('\n');
        for r in &self.rows {
            let e = r.energy.map(|v| format!("{v:.6}")).unwrap_or_default();
            let t = r.label.map(|v| v.as_str()).unwrap_or("");
            s.push_str(&format!("{:>3} {:>3} {:>12} {:>11}", r.l, r.n, e, t));
            for v in &r.values {
                s.push_str(&format!(" {v:>22.14e}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,n,E_nl,type");
        for c in &self.columns {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for r in &self.rows {
            let e = r.energy.map(|v| format!("{v:?}")).unwrap_or_default();
            let t = r.label.map(|v| v.as_str()).unwrap_or("");
            s.push_str(&format!("{},{},{},{}", r.l, r.n, e, t));
            for v in &r.values {
                s.push_str(&format!(",{v:?}"));
            }
            s.push('\n');
        }
        s
    }
}
