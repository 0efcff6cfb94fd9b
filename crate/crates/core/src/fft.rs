//! Radix-2 FFT used by the spectral descriptors and the autocorrelation
//! pitch tracker.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Precomputed twiddles for one power-of-two transform size.
pub(crate) struct Fft {
    size: usize,
    twiddles: Vec<Complex>,
}

impl Fft {
    pub fn new(size: usize) -> Self {
        assert!(size.is_power_of_two(), "FFT size must be a power of two");
        let twiddles = (0..size / 2)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / size as f64;
                Complex {
                    re: libm::cos(angle),
                    im: libm::sin(angle),
                }
            })
            .collect();
        Self { size, twiddles }
    }

    /// Smallest power of two holding at least `n` points.
    pub fn for_len(n: usize) -> Self {
        Self::new(n.max(2).next_power_of_two())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn forward(&self, buf: &mut [Complex]) {
        self.transform(buf, false);
    }

    /// Unnormalised inverse; callers divide by `size`.
    pub fn inverse(&self, buf: &mut [Complex]) {
        self.transform(buf, true);
    }

    fn transform(&self, buf: &mut [Complex], inverse: bool) {
        let n = self.size;
        assert_eq!(buf.len(), n);

        let mut j = 0;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                buf.swap(i, j);
            }
        }

        let mut len = 2;
        while len <= n {
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w.im = -w.im;
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + len / 2].mul(w);
                    buf[start + k] = Complex {
                        re: a.re + b.re,
                        im: a.im + b.im,
                    };
                    buf[start + k + len / 2] = Complex {
                        re: a.re - b.re,
                        im: a.im - b.im,
                    };
                }
            }
            len <<= 1;
        }
    }

    /// Power spectrum `|X_k|^2` for bins `0..=size/2` of a zero-padded real input.
    pub fn power_spectrum(&self, input: &[f64]) -> Vec<f64> {
        let mut buf = self.load(input);
        self.forward(&mut buf);
        buf[..=self.size / 2].iter().map(|c| c.norm_sqr()).collect()
    }

    /// Linear (non-circular) autocorrelation `sum_n x[n] x[n+lag]` for
    /// `lag in 0..=max_lag`. Requires `size >= input.len() + max_lag`.
    pub fn autocorrelation(&self, input: &[f64], max_lag: usize) -> Vec<f64> {
        assert!(self.size >= input.len() + max_lag);
        let mut buf = self.load(input);
        self.forward(&mut buf);
        for c in buf.iter_mut() {
            *c = Complex {
                re: c.norm_sqr(),
                im: 0.0,
            };
        }
        self.inverse(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf[..=max_lag].iter().map(|c| c.re * scale).collect()
    }

    fn load(&self, input: &[f64]) -> Vec<Complex> {
        assert!(input.len() <= self.size);
        let mut buf = alloc::vec![Complex::default(); self.size];
        for (slot, &x) in buf.iter_mut().zip(input) {
            slot.re = x;
        }
        buf
    }
}
