//! FFT-backed transforms: the type-I sine transform that diagonalizes the
//! discrete Dirichlet Laplacian, and in-place multidimensional complex FFTs
//! on periodic lattices.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

/// Lines gathered per batch when transforming along a strided axis.
const STRIP: usize = 16;

/// Unnormalized DST-I of length `m` along every axis of an `m^dim` array,
/// `S_k = Σ_{j=1}^{m} x_j sin(π j k / (m+1))`.
///
/// Two real lines share one complex FFT of length `2(m+1)`: the odd
/// extensions of real data have purely imaginary spectra, so the real and
/// imaginary parts of the combined spectrum separate the two transforms.
pub(crate) struct SineTransform {
    m: usize,
    dim: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl SineTransform {
    pub fn new(grid: &Grid) -> Self {
        let m = grid.interior_per_axis();
        let mut planner = FftPlanner::new();
        Self {
            m,
            dim: grid.dim(),
            fft: planner.plan_fft_forward(2 * (m + 1)),
        }
    }

    /// Applies the transform along all axes in place.
    pub fn forward(&self, data: &mut [f64]) {
        debug_assert_eq!(data.len(), self.m.pow(self.dim as u32));
        for axis in 0..self.dim {
            self.along_axis(data, axis);
        }
    }

    fn along_axis(&self, data: &mut [f64], axis: usize) {
        let m = self.m;
        let len = 2 * (m + 1);
        let stride = m.pow((self.dim - 1 - axis) as u32);
        let outer = m.pow(axis as u32);
        let starts: Vec<usize> = (0..outer)
            .flat_map(|o| (0..stride).map(move |i| o * m * stride + i))
            .collect();

        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for pair in starts.chunks(2) {
            let a = pair[0];
            let b = pair.get(1).copied();
            buf[0] = Complex64::new(0.0, 0.0);
            buf[m + 1] = Complex64::new(0.0, 0.0);
            for j in 0..m {
                let re = data[a + j * stride];
                let im = b.map_or(0.0, |b| data[b + j * stride]);
                buf[j + 1] = Complex64::new(re, im);
                buf[len - 1 - j] = Complex64::new(-re, -im);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..m {
                let z = buf[k + 1];
                data[a + k * stride] = -0.5 * z.im;
                if let Some(b) = b {
                    data[b + k * stride] = 0.5 * z.re;
                }
            }
        }
    }
}

/// Exact solver for `(-Δ_h + shift) w = r` with zero Dirichlet data.
pub(crate) struct ShiftedPoissonSolver {
    transform: SineTransform,
    /// 1D stencil eigenvalues `(4/h²) sin²(π k / (2(m+1)))`, `k = 1..m`.
    eig1d: Vec<f64>,
    shift: f64,
    dim: usize,
    m: usize,
}

impl ShiftedPoissonSolver {
    pub fn new(grid: &Grid, shift: f64) -> Self {
        let m = grid.interior_per_axis();
        let h = grid.h();
        let eig1d = (1..=m)
            .map(|k| {
                let s = (PI * k as f64 / (2.0 * (m + 1) as f64)).sin();
                4.0 * s * s / (h * h)
            })
            .collect();
        Self {
            transform: SineTransform::new(grid),
            eig1d,
            shift,
            dim: grid.dim(),
            m,
        }
    }

    pub fn solve(&self, rhs: &[f64], out: &mut [f64]) {
        out.copy_from_slice(rhs);
        self.transform.forward(out);
        let m = self.m;
        // The DST-I is its own inverse up to (2/(m+1)) per axis.
        let norm = (2.0 / (m + 1) as f64).powi(self.dim as i32);
        match self.dim {
            2 => {
                for i in 0..m {
                    for j in 0..m {
                        out[i * m + j] *= norm / (self.eig1d[i] + self.eig1d[j] + self.shift);
                    }
                }
            }
            3 => {
                for i in 0..m {
                    for j in 0..m {
                        for l in 0..m {
                            let lam = self.eig1d[i] + self.eig1d[j] + self.eig1d[l] + self.shift;
                            out[(i * m + j) * m + l] *= norm / lam;
                        }
                    }
                }
            }
            _ => unreachable!("grid dimension is validated at construction"),
        }
        self.transform.forward(out);
    }
}

/// In-place forward complex FFT over a periodic `side^dim` lattice.
pub(crate) struct TorusFft {
    side: usize,
    dim: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl TorusFft {
    pub fn new(side: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            side,
            dim,
            fft: planner.plan_fft_forward(side),
        }
    }

    pub fn len(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        let side = self.side;
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        // Last axis is contiguous.
        self.fft.process_with_scratch(data, &mut scratch);
        let mut strip = vec![Complex64::new(0.0, 0.0); STRIP * side];
        for axis in 0..self.dim - 1 {
            let stride = side.pow((self.dim - 1 - axis) as u32);
            let outer = side.pow(axis as u32);
            for o in 0..outer {
                let base = o * side * stride;
                let mut inner = 0;
                while inner < stride {
                    let width = STRIP.min(stride - inner);
                    for k in 0..side {
                        let row = base + k * stride + inner;
                        for b in 0..width {
                            strip[b * side + k] = data[row + b];
                        }
                    }
                    self.fft
                        .process_with_scratch(&mut strip[..width * side], &mut scratch);
                    for k in 0..side {
                        let row = base + k * stride + inner;
                        for b in 0..width {
                            data[row + b] = strip[b * side + k];
                        }
                    }
                    inner += width;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{apply_shifted_laplacian, GridFunction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dst(x: &[f64]) -> Vec<f64> {
        let m = x.len();
        (1..=m)
            .map(|k| {
                (1..=m)
                    .map(|j| x[j - 1] * (PI * (j * k) as f64 / (m + 1) as f64).sin())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn sine_transform_matches_direct_sum_on_rows() {
        let grid = Grid::new(2, 9).unwrap();
        let m = grid.interior_per_axis();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..m * m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut y = x.clone();
        let t = SineTransform::new(&grid);
        t.along_axis(&mut y, 1);
        for i in 0..m {
            let expect = naive_dst(&x[i * m..(i + 1) * m]);
            for j in 0..m {
                assert!((y[i * m + j] - expect[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn poisson_solver_inverts_the_stencil() {
        for (dim, n) in [(2, 12), (3, 8)] {
            let grid = Grid::new(dim, n).unwrap();
            let shift = 3.5;
            let mut rng = ChaCha8Rng::seed_from_u64(dim as u64);
            let w: Vec<f64> = (0..grid.interior_count())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let coef = vec![shift; w.len()];
            let mut r = vec![0.0; w.len()];
            apply_shifted_laplacian(&grid, &w, Some(&coef), &mut r);
            let mut back = vec![0.0; w.len()];
            ShiftedPoissonSolver::new(&grid, shift).solve(&r, &mut back);
            let err = w
                .iter()
                .zip(&back)
                .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
            assert!(err < 1e-11, "dim {dim}: {err}");
        }
    }

    #[test]
    fn poisson_solver_on_sine_mode() {
        let grid = Grid::new(2, 17).unwrap();
        let v = GridFunction::sine_mode(grid);
        let mut out = vec![0.0; v.len()];
        ShiftedPoissonSolver::new(&grid, 0.0).solve(v.values(), &mut out);
        let lam = grid.dirichlet_lambda1();
        for (o, vi) in out.iter().zip(v.values()) {
            assert!((o * lam - vi).abs() < 1e-12);
        }
    }

    #[test]
    fn torus_fft_matches_direct_dft() {
        let side = 6;
        let fft = TorusFft::new(side, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<Complex64> = (0..side * side)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut y = x.clone();
        fft.forward(&mut y);
        for k1 in 0..side {
            for k2 in 0..side {
                let mut acc = Complex64::new(0.0, 0.0);
                for j1 in 0..side {
                    for j2 in 0..side {
                        let ph = -2.0 * PI * ((j1 * k1 + j2 * k2) as f64) / side as f64;
                        acc += x[j1 * side + j2] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - y[k1 * side + k2]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn torus_fft_3d_of_delta_is_flat() {
        let fft = TorusFft::new(8, 3);
        let mut y = vec![Complex64::new(0.0, 0.0); fft.len()];
        y[0] = Complex64::new(1.0, 0.0);
        fft.forward(&mut y);
        assert!(y.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }
}
