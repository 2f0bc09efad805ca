//! Certified zero search in rectangles of the complex energy plane.
//!
//! Zeros are counted with the argument principle along adaptively sampled
//! rectangle boundaries, isolated by recursive subdivision, and polished
//! with Muller's method.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::specfun::SheetSelector;

/// Rectangle `re_range × im_range` on a given sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub sheet: SheetSelector,
    /// Initial samples per edge along (Re, Im).
    pub grid: (usize, usize),
}

impl SearchRegion {
    pub fn new(re_range: (f64, f64), im_range: (f64, f64), sheet: SheetSelector) -> Result<Self> {
        let r = Self { re_range, im_range, sheet, grid: (64, 32) };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.re_range;
        let (c, d) = self.im_range;
        if !(a < b && c < d) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams(format!("degenerate search region {self:?}")));
        }
        if a <= 0.0 && b >= 0.0 && c <= 0.0 && d >= 0.0 {
            return Err(Error::InvalidParams("search region contains E = 0".into()));
        }
        if self.grid.0 < 2 || self.grid.1 < 2 {
            return Err(Error::InvalidParams("search grid needs at least 2 samples per edge".into()));
        }
        Ok(())
    }

    fn rect(&self) -> Rect {
        Rect { x0: self.re_range.0, x1: self.re_range.1, y0: self.im_range.0, y1: self.im_range.1 }
    }
}

/// A located S-matrix pole, `E = E_r − iΓ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub l: u32,
    #[serde(rename = "Re_E")]
    pub re_e: f64,
    #[serde(rename = "Im_E")]
    pub im_e: f64,
    #[serde(rename = "E_r")]
    pub e_r: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    pub sheet: SheetSelector,
}

impl Resonance {
    pub fn new(l: u32, e: Complex64, sheet: SheetSelector) -> Self {
        Self { l, re_e: e.re, im_e: e.im, e_r: e.re, gamma: -2.0 * e.im, sheet }
    }

    pub fn energy(&self) -> Complex64 {
        Complex64::new(self.re_e, self.im_e)
    }
}

pub const RESONANCE_CSV_HEADER: &str = "l,E_r,Gamma,Re_E,Im_E,sheet";

pub fn resonances_to_csv(list: &[Resonance]) -> String {
    let mut s = String::from(RESONANCE_CSV_HEADER);
    s.push('\n');
    for r in list {
        s.push_str(&format!(
            "{},{:.15e},{:.15e},{:.15e},{:.15e},{}\n",
            r.l,
            r.e_r,
            r.gamma,
            r.re_e,
            r.im_e,
            r.sheet.label()
        ));
    }
    s
}

/// Tuning for counting, isolation and refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Smallest box height (in Im E) before subdivision gives up.
    pub min_box_height: f64,
    /// Relative step tolerance for the refinement.
    pub tol: f64,
    pub max_refine_iter: usize,
    /// Cap on function evaluations spent on one boundary.
    pub max_boundary_evals: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { min_box_height: 1e-8, tol: 1e-13, max_refine_iter: 100, max_boundary_evals: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }
    fn width(&self) -> f64 {
        self.x1 - self.x0
    }
    fn height(&self) -> f64 {
        self.y1 - self.y0
    }
    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }
    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }
}

fn wrap(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d < -PI {
        d += 2.0 * PI;
    }
    d
}

/// Accumulated phase of `f` along `a → b`, bisecting wherever consecutive
/// samples differ by more than π/2 in argument.
fn segment_phase<F>(f: &F, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, budget: &mut usize) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut total = 0.0;
    let mut stack = vec![(a, fa, b, fb)];
    while let Some((a, fa, b, fb)) = stack.pop() {
        if fa == Complex64::new(0.0, 0.0) || fb == Complex64::new(0.0, 0.0) {
            return Err(Error::Boundary { re: a.re, im: a.im });
        }
        let d = wrap(fb.arg() - fa.arg());
        if d.abs() <= FRAC_PI_2 {
            total += d;
            continue;
        }
        let m = 0.5 * (a + b);
        if (b - a).norm() < 1e-13 * (1.0 + m.norm()) || *budget == 0 {
            return Err(Error::Boundary { re: m.re, im: m.im });
        }
        *budget -= 1;
        let fm = f(m)?;
        // Second half first so the stack processes the path in order.
        stack.push((m, fm, b, fb));
        stack.push((a, fa, m, fm));
    }
    Ok(total)
}

fn rect_count<F>(f: &F, r: &Rect, samples: (usize, usize), opts: &SearchOptions) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let c = r.corners();
    let mut budget = opts.max_boundary_evals;
    let mut phase = 0.0;
    for e in 0..4 {
        let (p, q) = (c[e], c[(e + 1) % 4]);
        let n = if e % 2 == 0 { samples.0 } else { samples.1 };
        let mut zp = p;
        let mut fp = f(p)?;
        for j in 1..=n {
            let zq = if j == n { q } else { p + (q - p) * (j as f64 / n as f64) };
            let fq = f(zq)?;
            phase += segment_phase(f, zp, fp, zq, fq, &mut budget)?;
            zp = zq;
            fp = fq;
        }
    }
    let w = phase / (2.0 * PI);
    let n = w.round();
    if (w - n).abs() > 0.1 {
        return Err(Error::Boundary { re: r.x0, im: r.y0 });
    }
    Ok(n as i64)
}

/// Number of zeros of `f` inside `region` (argument principle).
///
/// If a zero sits on or very near the boundary, the rectangle is nudged
/// outward a few times before giving up with a boundary error.
pub fn contour_count<F>(f: &F, region: &SearchRegion, opts: &SearchOptions) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    region.validate()?;
    count_with_nudge(f, &region.rect(), region.grid, opts).map(|(n, _)| n)
}

fn count_with_nudge<F>(f: &F, r: &Rect, grid: (usize, usize), opts: &SearchOptions) -> Result<(i64, Rect)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut last = None;
    for attempt in 0..4 {
        let eps = [0.0, 1.3e-3, -2.7e-3, 4.1e-3][attempt];
        let dx = eps * r.width();
        let dy = eps * r.height();
        let rr = Rect { x0: r.x0 - dx, x1: r.x1 + dx, y0: r.y0 - dy, y1: r.y1 + dy };
        match rect_count(f, &rr, grid, opts) {
            Ok(n) => return Ok((n, rr)),
            Err(e @ Error::Boundary { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

/// Muller iteration for a simple zero, starting from three points around `seed`.
pub fn refine_zero<F>(f: &F, seed: Complex64, scale: f64, tol: f64, max_iter: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let h = if scale > 0.0 { scale } else { 1e-3 * (1.0 + seed.norm()) };
    let mut x = [seed - h, seed + Complex64::new(0.0, h), seed + h];
    let mut y = [f(x[0])?, f(x[1])?, f(x[2])?];
    let mut trace = Vec::new();
    for _ in 0..max_iter {
        if y[2] == Complex64::new(0.0, 0.0) {
            return Ok(x[2]);
        }
        let h1 = x[1] - x[0];
        let h2 = x[2] - x[1];
        let d1 = (y[1] - y[0]) / h1;
        let d2 = (y[2] - y[1]) / h2;
        let a = (d2 - d1) / (h2 + h1);
        let b = a * h2 + d2;
        let disc = (b * b - 4.0 * a * y[2]).sqrt();
        let den = if (b + disc).norm() >= (b - disc).norm() { b + disc } else { b - disc };
        let step = if den.norm() == 0.0 { Complex64::new(h2.norm().max(tol), 0.0) } else { -2.0 * y[2] / den };
        let xn = x[2] + step;
        trace.push(xn);
        let yn = f(xn)?;
        if !yn.re.is_finite() || !yn.im.is_finite() {
            return Err(Error::Convergence(format!("refinement left the domain at {xn}; trace {trace:?}")));
        }
        x = [x[1], x[2], xn];
        y = [y[1], y[2], yn];
        if step.norm() <= tol * (1.0 + xn.norm()) {
            return Ok(xn);
        }
    }
    let tail: Vec<_> = trace.iter().rev().take(5).collect();
    Err(Error::Convergence(format!("Muller did not converge from {seed}; last iterates {tail:?}")))
}

fn split(r: &Rect, frac: f64) -> [Rect; 2] {
    // Compare extents relative to the initial sampling so narrow boxes near
    // the real axis are split across their long side.
    if r.width() >= r.height() {
        let xm = r.x0 + frac * r.width();
        [Rect { x1: xm, ..*r }, Rect { x0: xm, ..*r }]
    } else {
        let ym = r.y0 + frac * r.height();
        [Rect { y1: ym, ..*r }, Rect { y0: ym, ..*r }]
    }
}

fn isolate<F>(f: &F, r: Rect, n: i64, grid: (usize, usize), opts: &SearchOptions, out: &mut Vec<Complex64>) -> Result<()>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if n == 0 {
        return Ok(());
    }
    let small = (grid.0 / 2).max(8);
    let small = (small, small);
    if n == 1 {
        let scale = 0.05 * r.width().min(r.height()).max(1e-12);
        if let Ok(z) = refine_zero(f, r.center(), scale, opts.tol, opts.max_refine_iter) {
            let pad_x = 1e-9 * (1.0 + r.width());
            let pad_y = 1e-9 * (1.0 + r.height());
            let grown = Rect { x0: r.x0 - pad_x, x1: r.x1 + pad_x, y0: r.y0 - pad_y, y1: r.y1 + pad_y };
            if grown.contains(z) {
                out.push(z);
                return Ok(());
            }
        }
    }
    if r.height() < opts.min_box_height && r.width() < opts.min_box_height.max(1e-12 * (1.0 + r.x0.abs())) {
        return Err(Error::IncompleteSearch(format!(
            "{n} zero(s) unresolved in box Re [{}, {}] Im [{}, {}]",
            r.x0, r.x1, r.y0, r.y1
        )));
    }
    let mut fracs = [0.5, 0.4713, 0.5329, 0.4418].into_iter();
    loop {
        let Some(frac) = fracs.next() else {
            return Err(Error::IncompleteSearch(format!("could not split box Re [{}, {}] Im [{}, {}]", r.x0, r.x1, r.y0, r.y1)));
        };
        let halves = split(&r, frac);
        let counts: Result<Vec<i64>> = halves.iter().map(|h| rect_count(f, h, small, opts)).collect();
        match counts {
            Ok(c) if c.iter().sum::<i64>() == n && c.iter().all(|&v| v >= 0) => {
                for (h, cn) in halves.iter().zip(c) {
                    isolate(f, *h, cn, small, opts, out)?;
                }
                return Ok(());
            }
            Ok(_) | Err(Error::Boundary { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// All zeros of `f` in `region`, sorted by real part.
///
/// The number returned always equals the contour count over the whole
/// region; otherwise an incomplete-search error is raised.
pub fn find_zeros<F>(f: &F, region: &SearchRegion, opts: &SearchOptions) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    region.validate()?;
    let (n, r) = count_with_nudge(f, &region.rect(), region.grid, opts)?;
    if n < 0 {
        return Err(Error::IncompleteSearch(format!("negative winding {n}: poles inside the region")));
    }
    let mut out = Vec::new();
    isolate(f, r, n, region.grid, opts, &mut out)?;
    if out.len() as i64 != n {
        return Err(Error::IncompleteSearch(format!("contour count {n}, refined {}", out.len())));
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(out)
}

/// Zeros of `f` converted to resonance records.
pub fn find_resonances<F>(f: &F, l: u32, region: &SearchRegion, opts: &SearchOptions) -> Result<Vec<Resonance>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    Ok(find_zeros(f, region, opts)?.into_iter().map(|z| Resonance::new(l, z, region.sheet)).collect())
}
