//! Adaptive Dormand–Prince 5(4) integration of `i dψ/dt = H(t)ψ`.
//!
//! Each step runs in a frame rotating at the current energy expectation, a
//! pure global phase that keeps the slow ground-state component from setting
//! the step size.

use num_complex::Complex64;

use super::operator::FlipOperator;
use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const NORM_CHECK_INTERVAL: u64 = 1024;

#[derive(Debug, Clone, Copy, Default)]
pub struct RkStats {
    pub accepted: u64,
    pub rejected: u64,
}

struct Rhs<'a> {
    op: &'a FlipOperator,
    total: f64,
}

impl Rhs<'_> {
    /// `out = (H(t) − shift) y`; the factor `−i` is applied in [`combine`].
    fn eval(&self, t: f64, shift: f64, y: &[Complex64], out: &mut [Complex64]) {
        let s = (t / self.total).clamp(0.0, 1.0);
        self.op.apply_shifted(s, shift, -(1.0 - s), y, out);
    }
}

/// `out = y − i·h·Σ c_j k_j`.
fn combine(y: &[Complex64], h: f64, ks: &[&[Complex64]], coeffs: &[f64], out: &mut [Complex64]) {
    let mut first = true;
    for (k, &c) in ks.iter().zip(coeffs) {
        if c == 0.0 {
            continue;
        }
        if first {
            for (o, &kv) in out.iter_mut().zip(k.iter()) {
                *o = kv * c;
            }
            first = false;
        } else {
            for (o, &kv) in out.iter_mut().zip(k.iter()) {
                *o += kv * c;
            }
        }
    }
    for (o, &yv) in out.iter_mut().zip(y) {
        *o = Complex64::new(yv.re + h * o.im, yv.im - h * o.re);
    }
}

fn norm_sqr(y: &[Complex64]) -> f64 {
    y.iter().map(|v| v.norm_sqr()).sum()
}

/// Integrate `psi` from `t = 0` to `t = total`. Norm drift beyond
/// `norm_tol` (relative to the initial norm) is an error, never repaired.
pub fn integrate(
    op: &FlipOperator,
    total: f64,
    rel_tol: f64,
    abs_tol: f64,
    norm_tol: f64,
    psi: &mut [Complex64],
) -> Result<RkStats> {
    let dim = psi.len();
    let rhs = Rhs { op, total };
    let mut k: Vec<Vec<Complex64>> = (0..7).map(|_| vec![Complex64::default(); dim]).collect();
    let mut stage = vec![Complex64::default(); dim];
    let mut y_new = vec![Complex64::default(); dim];
    let norm0 = norm_sqr(psi);
    let mut stats = RkStats::default();

    let mut t = 0.0;
    let mut shift = 0.0;
    rhs.eval(t, shift, psi, &mut k[0]);

    let (lo, hi) = op.spectral_bounds(0.0, -1.0);
    let width = (hi - lo).max(f64::MIN_POSITIVE);
    let mut h = (0.1 / width).min(total);
    let h_min = 1e-13 * total.max(1.0);
    let mut last_rejected = false;

    while t < total {
        // re-centre on <H>: k1 = (H − c)y gives <y, Hy> = c|y|² + Re<y, k1>
        let yy = norm_sqr(psi);
        let yk: f64 = psi.iter().zip(&k[0]).map(|(y, kv)| y.re * kv.re + y.im * kv.im).sum();
        let new_shift = shift + yk / yy;
        let d = shift - new_shift;
        for (kv, &y) in k[0].iter_mut().zip(psi.iter()) {
            *kv += y * d;
        }
        shift = new_shift;

        if h < h_min {
            return Err(Error::StepUnderflow { t, h });
        }
        let h_step = h.min(total - t);
        {
            let (head, tail) = k.split_at_mut(1);
            combine(psi, h_step, &[&head[0]], &A2, &mut stage);
            rhs.eval(t + C[1] * h_step, shift, &stage, &mut tail[0]);
        }
        {
            let (head, tail) = k.split_at_mut(2);
            combine(psi, h_step, &[&head[0], &head[1]], &A3, &mut stage);
            rhs.eval(t + C[2] * h_step, shift, &stage, &mut tail[0]);
        }
        {
            let (head, tail) = k.split_at_mut(3);
            combine(psi, h_step, &[&head[0], &head[1], &head[2]], &A4, &mut stage);
            rhs.eval(t + C[3] * h_step, shift, &stage, &mut tail[0]);
        }
        {
            let (head, tail) = k.split_at_mut(4);
            combine(psi, h_step, &[&head[0], &head[1], &head[2], &head[3]], &A5, &mut stage);
            rhs.eval(t + C[4] * h_step, shift, &stage, &mut tail[0]);
        }
        {
            let (head, tail) = k.split_at_mut(5);
            combine(
                psi,
                h_step,
                &[&head[0], &head[1], &head[2], &head[3], &head[4]],
                &A6,
                &mut stage,
            );
            rhs.eval(t + C[5] * h_step, shift, &stage, &mut tail[0]);
        }
        {
            let (head, tail) = k.split_at_mut(6);
            combine(
                psi,
                h_step,
                &[&head[0], &head[1], &head[2], &head[3], &head[4], &head[5]],
                &B,
                &mut y_new,
            );
            rhs.eval(t + h_step, shift, &y_new, &mut tail[0]);
        }

        let mut acc = 0.0;
        for idx in 0..dim {
            let mut e = Complex64::default();
            for (s, &ec) in E.iter().enumerate() {
                if ec != 0.0 {
                    e += k[s][idx] * ec;
                }
            }
            let scale = abs_tol + rel_tol * psi[idx].norm_sqr().max(y_new[idx].norm_sqr()).sqrt();
            acc += e.norm_sqr() / (scale * scale);
        }
        let err = h_step * (acc / dim as f64).sqrt();

        if err <= 1.0 {
            t = if h_step == total - t { total } else { t + h_step };
            psi.copy_from_slice(&y_new);
            k.swap(0, 6);
            stats.accepted += 1;
            if stats.accepted % NORM_CHECK_INTERVAL == 0 {
                let drift = (norm_sqr(psi) / norm0 - 1.0).abs();
                if drift > norm_tol {
                    return Err(Error::NormDrift { t, drift });
                }
            }
            let mut factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = false;
            h = h_step * factor;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h = h_step * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
        }
    }
    let drift = (norm_sqr(psi) / norm0 - 1.0).abs();
    if drift > norm_tol {
        return Err(Error::NormDrift { t: total, drift });
    }
    Ok(stats)
}
