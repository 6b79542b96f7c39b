//! Chebyshev expansion of `exp(−iτA)` applied to a vector, for
//! `A = a·E + b·F` with a Gershgorin enclosure of its spectrum.
//!
//! With `A = c + r·Â` and `‖Â‖ ≤ 1`,
//!
//! ```text
//! exp(−iτA) = e^{−iτc} Σ_k (2 − δ_k0) (−i)^k J_k(τr) T_k(Â)
//! ```
//!
//! The series is cut once `|J_k|` falls below [`SERIES_CUTOFF`] past the
//! turning point `k ≈ τr`, so the cost is about `τr + O(τr^{1/3})` operator
//! applications.

use num_complex::Complex64;

use super::operator::FlipOperator;

pub const SERIES_CUTOFF: f64 = 1e-16;

/// `J_0(z) ..= J_kmax(z)` for `z ≥ 0`, by Miller's backward recurrence
/// normalized with `J_0 + 2 Σ J_2k = 1`. Trailing negligible orders are
/// trimmed.
pub fn bessel_j_sequence(z: f64) -> Vec<f64> {
    assert!(z >= 0.0 && z.is_finite(), "bessel argument {z}");
    if z == 0.0 {
        return vec![1.0];
    }
    let start = (z + 12.0 * z.cbrt() + 40.0).ceil() as usize;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-280;
    for k in (1..=start).rev() {
        let next = 2.0 * k as f64 / z * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    for v in vals.iter_mut() {
        *v /= norm;
    }
    // keep up to the last order that still matters
    let mut kmax = vals.len() - 1;
    while kmax > 0 && (kmax as f64) > z && vals[kmax].abs() < SERIES_CUTOFF {
        kmax -= 1;
    }
    vals.truncate(kmax + 2);
    vals
}

/// Scratch buffers for repeated propagation in one space.
pub struct ChebyshevWorkspace {
    prev: Vec<Complex64>,
    curr: Vec<Complex64>,
    acc: Vec<Complex64>,
    pub applications: u64,
}

impl ChebyshevWorkspace {
    pub fn new(dim: usize) -> Self {
        Self {
            prev: vec![Complex64::default(); dim],
            curr: vec![Complex64::default(); dim],
            acc: vec![Complex64::default(); dim],
            applications: 0,
        }
    }

    /// `psi ← exp(−iτ(a·E + b·F)) psi`.
    pub fn propagate(&mut self, op: &FlipOperator, a: f64, b: f64, tau: f64, psi: &mut [Complex64]) {
        let (lo, hi) = op.spectral_bounds(a, b);
        let center = 0.5 * (lo + hi);
        let radius = 0.5 * (hi - lo);
        let phase = Complex64::from_polar(1.0, -tau * center);
        if radius * tau.abs() < 1e-300 {
            psi.iter_mut().for_each(|v| *v *= phase);
            return;
        }
        let coeffs = bessel_j_sequence(radius * tau.abs());
        let sign = tau.signum();

        // Â = (A − c)/r
        let (ah, ch, bh) = (a / radius, center / radius, b / radius);

        // (−i·sign)^k
        let step = Complex64::new(0.0, -sign);
        let mut unit = Complex64::new(1.0, 0.0);

        self.prev.copy_from_slice(psi);
        for (acc, &p) in self.acc.iter_mut().zip(psi.iter()) {
            *acc = p * coeffs[0];
        }
        if coeffs.len() > 1 {
            op.apply_shifted(ah, ch, bh, &self.prev, &mut self.curr);
            self.applications += 1;
            unit *= step;
            let c = unit * (2.0 * coeffs[1]);
            for (acc, &v) in self.acc.iter_mut().zip(&self.curr) {
                *acc += v * c;
            }
        }
        for &jk in coeffs.iter().skip(2) {
            // prev ← 2 Â curr − prev
            op.apply_minus_prev(2.0 * ah, 2.0 * ch, 2.0 * bh, &self.curr, &mut self.prev);
            self.applications += 1;
            std::mem::swap(&mut self.prev, &mut self.curr);
            unit *= step;
            let c = unit * (2.0 * jk);
            for (acc, &v) in self.acc.iter_mut().zip(&self.curr) {
                *acc += v * c;
            }
        }
        for (p, &acc) in psi.iter_mut().zip(&self.acc) {
            *p = acc * phase;
        }
    }
}
