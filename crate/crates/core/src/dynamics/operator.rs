//! Matrix-free application of `a·E + b·F`, where `E` is a diagonal of
//! classical energies and `F = Σ_i σ^x_i` flips one spin. The annealing
//! Hamiltonian at fraction `s` is `s·E − (1−s)·F`.
//!
//! Models without local fields commute with the global spin flip, and the
//! uniform initial state is flip-even, so evolution never leaves the even
//! sector. [`Space::Even`] stores only the `2^(n−1)` amplitudes with the top
//! spin up; the flip of the top spin maps onto the complement of the lower
//! bits.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub trait Amplitude:
    Copy + Default + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl Amplitude for f64 {}
impl Amplitude for Complex64 {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Full,
    Even,
}

/// Operator data for one model: `n` spins and the diagonal over the stored
/// basis states.
#[derive(Debug, Clone)]
pub struct FlipOperator {
    n: usize,
    space: Space,
    diag: Vec<f64>,
}

impl FlipOperator {
    /// `full_diag` has `2^n` entries. When `space` is `Even` it must be
    /// invariant under complementing the index.
    pub fn new(n: usize, full_diag: &[f64], space: Space) -> Self {
        assert_eq!(full_diag.len(), 1usize << n);
        let diag = match space {
            Space::Full => full_diag.to_vec(),
            Space::Even => full_diag[..1usize << (n - 1)].to_vec(),
        };
        Self { n, space, diag }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn diag_range(&self) -> (f64, f64) {
        self.diag
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)))
    }

    /// Gershgorin enclosure of the spectrum of `a·E + b·F`.
    pub fn spectral_bounds(&self, a: f64, b: f64) -> (f64, f64) {
        let (dlo, dhi) = self.diag_range();
        let (lo, hi) = if a >= 0.0 { (a * dlo, a * dhi) } else { (a * dhi, a * dlo) };
        let r = b.abs() * self.n as f64;
        (lo - r, hi + r)
    }

    /// `out = a·E·x + b·F·x`.
    pub fn apply<T: Amplitude>(&self, a: f64, b: f64, x: &[T], out: &mut [T]) {
        self.apply_with(a, 0.0, b, x, out, |_, v| v);
    }

    /// `out = (a·E − shift)·x + b·F·x`.
    pub fn apply_shifted<T: Amplitude>(&self, a: f64, shift: f64, b: f64, x: &[T], out: &mut [T]) {
        self.apply_with(a, shift, b, x, out, |_, v| v);
    }

    /// `out = (a·E − shift)·x + b·F·x − out`, the Chebyshev three-term step.
    pub fn apply_minus_prev<T: Amplitude>(&self, a: f64, shift: f64, b: f64, x: &[T], out: &mut [T]) {
        self.apply_with(a, shift, b, x, out, |old, v| v - old);
    }

    /// The first pass fuses the diagonal with the lowest-bit flip (and the
    /// folded top-spin flip in the even sector); the remaining bits are
    /// added block-wise.
    #[inline(always)]
    fn apply_with<T: Amplitude, C: Fn(T, T) -> T>(
        &self,
        a: f64,
        shift: f64,
        b: f64,
        x: &[T],
        out: &mut [T],
        combine: C,
    ) {
        let dim = self.dim();
        assert!(x.len() == dim && out.len() == dim);
        let d = &self.diag[..dim];
        if dim == 1 {
            // n = 1 in the even sector: the only flip maps the state onto itself
            let flip = if self.space == Space::Even { x[0] * b } else { T::default() };
            out[0] = combine(out[0], x[0] * (a * d[0] - shift) + flip);
            return;
        }
        match self.space {
            Space::Full => {
                for ((o, xx), dd) in out.chunks_exact_mut(2).zip(x.chunks_exact(2)).zip(d.chunks_exact(2)) {
                    o[0] = combine(o[0], xx[0] * (a * dd[0] - shift) + xx[1] * b);
                    o[1] = combine(o[1], xx[1] * (a * dd[1] - shift) + xx[0] * b);
                }
            }
            Space::Even => {
                // top-spin flip, folded back through the global flip
                let rev = x.rchunks_exact(2);
                for (((o, xx), dd), r) in out
                    .chunks_exact_mut(2)
                    .zip(x.chunks_exact(2))
                    .zip(d.chunks_exact(2))
                    .zip(rev)
                {
                    o[0] = combine(o[0], xx[0] * (a * dd[0] - shift) + (xx[1] + r[1]) * b);
                    o[1] = combine(o[1], xx[1] * (a * dd[1] - shift) + (xx[0] + r[0]) * b);
                }
            }
        }
        if b != 0.0 {
            self.add_flips_from(1, b, x, out);
        }
    }

    /// `out += b·F·x`.
    pub fn add_flips<T: Amplitude>(&self, b: f64, x: &[T], out: &mut [T]) {
        if b == 0.0 {
            return;
        }
        self.add_flips_from(0, b, x, out);
        if self.space == Space::Even {
            for (o, &xr) in out.iter_mut().zip(x.iter().rev()) {
                *o = *o + xr * b;
            }
        }
    }

    fn add_flips_from<T: Amplitude>(&self, first_bit: usize, b: f64, x: &[T], out: &mut [T]) {
        let stored_bits = match self.space {
            Space::Full => self.n,
            Space::Even => self.n - 1,
        };
        for bit in first_bit..stored_bits {
            let m = 1usize << bit;
            for (o, xx) in out.chunks_exact_mut(2 * m).zip(x.chunks_exact(2 * m)) {
                let (lo_out, hi_out) = o.split_at_mut(m);
                let (lo_x, hi_x) = xx.split_at(m);
                for t in 0..m {
                    lo_out[t] = lo_out[t] + hi_x[t] * b;
                    hi_out[t] = hi_out[t] + lo_x[t] * b;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_apply(n: usize, diag: &[f64], a: f64, b: f64, x: &[f64]) -> Vec<f64> {
        (0..1usize << n)
            .map(|k| a * diag[k] * x[k] + b * (0..n).map(|i| x[k ^ (1 << i)]).sum::<f64>())
            .collect()
    }

    #[test]
    fn full_space_matches_dense() {
        let n = 4;
        let diag: Vec<f64> = (0..16).map(|k| (k as f64 * 0.37).sin()).collect();
        let x: Vec<f64> = (0..16).map(|k| (k as f64 * 1.3).cos()).collect();
        let op = FlipOperator::new(n, &diag, Space::Full);
        let mut out = vec![0.0; 16];
        op.apply(0.7, -0.4, &x, &mut out);
        let want = dense_apply(n, &diag, 0.7, -0.4, &x);
        for (o, w) in out.iter().zip(&want) {
            assert!((o - w).abs() < 1e-14);
        }
    }

    #[test]
    fn even_space_matches_symmetric_full_vector() {
        let n = 5;
        let full = 1usize << n;
        let mask = full - 1;
        let diag: Vec<f64> = (0..full)
            .map(|k| {
                let c = k.min(k ^ mask) as f64;
                (c * 0.91).cos()
            })
            .collect();
        let xf: Vec<f64> = (0..full).map(|k| ((k.min(k ^ mask)) as f64 * 0.5).sin() + 1.0).collect();
        let want = dense_apply(n, &diag, 1.3, 0.6, &xf);
        let op = FlipOperator::new(n, &diag, Space::Even);
        let mut out = vec![0.0; full / 2];
        op.apply(1.3, 0.6, &xf[..full / 2], &mut out);
        for k in 0..full / 2 {
            assert!((out[k] - want[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn fused_variants_match_dense() {
        for n in 1..=6 {
            let full = 1usize << n;
            let mask = full - 1;
            let diag: Vec<f64> = (0..full).map(|k| ((k.min(k ^ mask)) as f64 * 0.73).sin()).collect();
            let xf: Vec<f64> = (0..full).map(|k| ((k.min(k ^ mask)) as f64 * 0.29).cos() + 0.5).collect();
            let prev: Vec<f64> = (0..full).map(|k| (k as f64 * 0.11).sin()).collect();
            let dense: Vec<f64> = dense_apply(n, &diag, 0.8, -0.35, &xf)
                .iter()
                .zip(&xf)
                .map(|(v, x)| v - 0.2 * x)
                .collect();
            for space in [Space::Full, Space::Even] {
                let op = FlipOperator::new(n, &diag, space);
                let dim = op.dim();
                let mut out = vec![0.0; dim];
                op.apply_shifted(0.8, 0.2, -0.35, &xf[..dim], &mut out);
                for k in 0..dim {
                    assert!((out[k] - dense[k]).abs() < 1e-13, "n={n} {space:?} k={k}");
                }
                let mut out = prev[..dim].to_vec();
                op.apply_minus_prev(0.8, 0.2, -0.35, &xf[..dim], &mut out);
                for k in 0..dim {
                    assert!((out[k] - (dense[k] - prev[k])).abs() < 1e-13);
                }
                let mut out = vec![0.0; dim];
                op.add_flips(-0.35, &xf[..dim], &mut out);
                let mut want = vec![0.0; dim];
                op.apply(0.0, -0.35, &xf[..dim], &mut want);
                for k in 0..dim {
                    assert!((out[k] - want[k]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gershgorin_bounds() {
        let diag = vec![-1.0, 2.0, 0.5, 3.0];
        let op = FlipOperator::new(2, &diag, Space::Full);
        assert_eq!(op.spectral_bounds(1.0, -0.5), (-2.0, 4.0));
        assert_eq!(op.spectral_bounds(-1.0, 0.0), (-3.0, 1.0));
    }
}
