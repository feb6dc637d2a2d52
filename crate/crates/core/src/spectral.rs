//! Periodic grids on the unit interval and their FFTs.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::real::Real;

/// `n` equispaced points `y_j = j / n` on `[0, 1)` with a cached FFT plan.
///
/// Coefficients use the convention `v_j = sum_k c_k exp(2 pi i k j / n)`, so
/// [`PeriodicGrid::analyze`] divides by `n` and [`PeriodicGrid::synthesize`]
/// does not.
pub struct PeriodicGrid<R: Real> {
    n: usize,
    fwd: Arc<dyn Fft<R>>,
    inv: Arc<dyn Fft<R>>,
    scratch: Vec<Complex<R>>,
    wavenumbers: Vec<R>,
}

impl<R: Real> Clone for PeriodicGrid<R> {
    fn clone(&self) -> Self {
        Self::new(self.n)
    }
}

impl<R: Real> std::fmt::Debug for PeriodicGrid<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).finish()
    }
}

impl<R: Real> PeriodicGrid<R> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "grid needs at least two points");
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        let two_pi = R::TAU();
        let wavenumbers = (0..n)
            .map(|j| two_pi * R::lit(signed_index(j, n) as f64))
            .collect();
        Self {
            n,
            fwd,
            inv,
            scratch: vec![Complex::default(); len],
            wavenumbers,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, j: usize) -> R {
        R::from_usize_lossy(j) / R::from_usize_lossy(self.n)
    }

    pub fn points(&self) -> Vec<R> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Angular wavenumbers `2 pi k` in FFT order, `k` in `[-n/2, n/2)`.
    pub fn wavenumbers(&self) -> &[R] {
        &self.wavenumbers
    }

    /// Physical values to Fourier coefficients, in place.
    pub fn analyze(&mut self, buf: &mut [Complex<R>]) {
        self.fwd.process_with_scratch(buf, &mut self.scratch);
        let scale = R::one() / R::from_usize_lossy(self.n);
        for c in buf.iter_mut() {
            *c = c.scale(scale);
        }
    }

    /// Fourier coefficients to physical values, in place.
    pub fn synthesize(&mut self, buf: &mut [Complex<R>]) {
        self.inv.process_with_scratch(buf, &mut self.scratch);
    }

    /// Samples a trigonometric series `sum_q c_q exp(2 pi i q y)` on the grid,
    /// for arbitrary integer frequencies `q`. Frequencies are folded modulo `n`,
    /// which is exact at the grid points.
    pub fn sample_series<I>(&mut self, terms: I) -> Vec<Complex<R>>
    where
        I: IntoIterator<Item = (i64, Complex<R>)>,
    {
        let mut buf = vec![Complex::default(); self.n];
        let n = self.n as i64;
        for (q, c) in terms {
            let r = q.rem_euclid(n) as usize;
            buf[r] = buf[r] + c;
        }
        self.synthesize(&mut buf);
        buf
    }

    /// Samples `sum_q b_q sin(2 pi q y)` on the grid.
    pub fn sample_sine_series<I>(&mut self, terms: I) -> Vec<R>
    where
        I: IntoIterator<Item = (i64, R)>,
    {
        self.sample_series(
            terms
                .into_iter()
                .map(|(q, b)| (q, Complex::new(b, R::zero()))),
        )
        .into_iter()
        .map(|c| c.im)
        .collect()
    }

    /// Samples `sum_q b_q cos(2 pi q y)` on the grid.
    pub fn sample_cosine_series<I>(&mut self, terms: I) -> Vec<R>
    where
        I: IntoIterator<Item = (i64, R)>,
    {
        self.sample_series(
            terms
                .into_iter()
                .map(|(q, b)| (q, Complex::new(b, R::zero()))),
        )
        .into_iter()
        .map(|c| c.re)
        .collect()
    }

    /// `int_0^1 |v|^2` and `int_0^1 |v'|^2` from Fourier coefficients.
    pub fn norms_from_coefficients(&self, coeffs: &[Complex<R>]) -> (R, R) {
        let mut l2 = R::zero();
        let mut h1 = R::zero();
        for (c, &k) in coeffs.iter().zip(&self.wavenumbers) {
            let p = c.norm_sqr();
            l2 = l2 + p;
            h1 = h1 + k * k * p;
        }
        (l2, h1)
    }
}

/// Signed frequency of FFT slot `j` on an `n`-point grid.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n.div_ceil(2) {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Samples a real function on the grid as a complex buffer.
pub fn sample_complex<R: Real, F: Fn(R) -> R>(grid: &PeriodicGrid<R>, f: F) -> Vec<Complex<R>> {
    (0..grid.len())
        .map(|j| Complex::new(f(grid.point(j)), R::zero()))
        .collect()
}

/// Fourier coefficients of the spectral derivative of a real grid function.
pub fn derivative<R: Real>(grid: &mut PeriodicGrid<R>, values: &[Complex<R>]) -> Vec<Complex<R>> {
    let mut buf = values.to_vec();
    grid.analyze(&mut buf);
    let ks = grid.wavenumbers().to_vec();
    for (c, k) in buf.iter_mut().zip(ks) {
        *c = *c * Complex::new(R::zero(), k);
    }
    grid.synthesize(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folded_sine_series_matches_direct_sum() {
        let mut g = PeriodicGrid::<f64>::new(64);
        let terms: Vec<(i64, f64)> = (1..200)
            .map(|i| (2 * i - 1, 1.0 / (i * i) as f64))
            .collect();
        let folded = g.sample_sine_series(terms.iter().copied());
        for j in [0usize, 5, 17, 33, 63] {
            let y = j as f64 / 64.0;
            let direct: f64 = terms
                .iter()
                .map(|&(q, b)| b * (std::f64::consts::TAU * q as f64 * y).sin())
                .sum();
            assert!(
                (folded[j] - direct).abs() < 1e-12,
                "{j}: {} {}",
                folded[j],
                direct
            );
        }
    }

    #[test]
    fn parseval_and_derivative() {
        let mut g = PeriodicGrid::<f64>::new(32);
        let v = sample_complex(&g, |y| (std::f64::consts::TAU * 3.0 * y).sin());
        let mut c = v.clone();
        g.analyze(&mut c);
        let (l2, h1) = g.norms_from_coefficients(&c);
        assert!((l2 - 0.5).abs() < 1e-14);
        let k = std::f64::consts::TAU * 3.0;
        assert!((h1 - 0.5 * k * k).abs() < 1e-10);
        let d = derivative(&mut g, &v);
        for (j, dj) in d.iter().enumerate() {
            let y = g.point(j);
            assert!((dj.re - k * (k * y).cos()).abs() < 1e-10);
        }
    }
}
