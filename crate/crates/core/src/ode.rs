//! Adaptive Dormand–Prince 5(4) integrator for complex first-order systems
//! parametrised by a real variable.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

#[derive(Debug, Clone)]
pub struct OdeOutcome<const N: usize> {
    pub y: [Complex64; N],
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `dy/dx = f(x, y)` from `x0` to `x1`, stopping exactly at each
/// of the (increasing) `checkpoints` to hand the state to `observe`.
pub fn integrate<const N: usize, F, O>(
    f: F,
    x0: f64,
    x1: f64,
    y0: [Complex64; N],
    ctl: &StepControl,
    checkpoints: &[f64],
    mut observe: O,
) -> Result<OdeOutcome<N>>
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
    O: FnMut(f64, &[Complex64; N]),
{
    let mut x = x0;
    let mut y = y0;
    let mut h = ctl.initial_step.min(x1 - x0);
    let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
    k[0] = f(x, &y);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut next_cp = checkpoints.iter().copied().filter(|&c| c > x0 && c <= x1);
    let mut cp = next_cp.next();
    while x < x1 {
        if accepted + rejected > ctl.max_steps {
            return Err(Error::Integration(format!("step budget {} exhausted at x = {x}", ctl.max_steps)));
        }
        let target = cp.unwrap_or(x1);
        let mut hit = false;
        if x + h >= target {
            h = target - x;
            hit = true;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += kj[i] * (h * a);
                    }
                }
            }
            k[s] = f(x + C[s] * h, &ys);
        }
        let mut y_new = y;
        let mut err = 0.0f64;
        let mut hs = [Complex64::new(0.0, 0.0); N];
        for i in 0..N {
            let mut hi = Complex64::new(0.0, 0.0);
            let mut lo = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                hi += k[s][i] * B[s];
                lo += k[s][i] * B_LOW[s];
            }
            y_new[i] = y[i] + hi * h;
            hs[i] = (hi - lo) * h;
        }
        // one scale for the whole state so nodes of a single component do not stall the step
        let size = y.iter().chain(y_new.iter()).fold(0.0f64, |m, v| m.max(v.norm()));
        let sc = ctl.atol + ctl.rtol * size;
        for e in hs {
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite state at x = {x}")));
        }
        if err <= 1.0 {
            x = if hit { target } else { x + h };
            y = y_new;
            k[0] = k[6];
            accepted += 1;
            if hit && cp.is_some() {
                observe(x, &y);
                cp = next_cp.next();
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < 1e-14 * (1.0 + x.abs()) {
                return Err(Error::Integration(format!("step size underflow at x = {x}")));
            }
        }
    }
    Ok(OdeOutcome { y, accepted, rejected })
}
