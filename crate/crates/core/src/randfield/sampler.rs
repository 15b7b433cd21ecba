use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use super::model::{gaussian_covariance, PotentialKind, PotentialModel};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, MAX_DIM};
use crate::seed::rng_from_seed;
use crate::spectral::TorusFft;

/// Grid points required per correlation length: `h ≤ ε / 8`.
pub const RESOLUTION: f64 = 8.0;

/// Eigenvalues in `[-CLIP_TOL·max, 0)` are clipped to zero; anything more
/// negative rejects the embedding.
pub const CLIP_TOL: f64 = 1e-10;

/// Smallest torus, as a multiple of the grid extent.
pub const MIN_PADDING: usize = 4;

/// Largest torus, in total lattice points.
pub const MAX_TORUS_POINTS: usize = 1 << 25;

/// One realization of `q(x/ε, ω)` at the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub q_eps: GridFunction,
    pub epsilon: f64,
    pub seed: u64,
    q_mean: f64,
}

impl FieldSample {
    /// The fluctuation `ν_ε = q_ε - q̄`.
    pub fn nu_eps(&self) -> GridFunction {
        self.q_eps.map(|q| q - self.q_mean)
    }
}

/// Checks the resolution rule `h ≤ ε/8`, with a relative slack for round-off.
pub fn check_resolution(grid: &Grid, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    if grid.h() > epsilon / RESOLUTION * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "resolution rule h <= epsilon/8 violated: h = {}, epsilon = {epsilon}",
            grid.h()
        )));
    }
    Ok(())
}

/// Spectral factor of a nonnegative definite circulant on a periodic
/// lattice of spacing `spacing` (in units of the unscaled field).
///
/// The covariance is tapered smoothly to zero between the largest distance
/// realized on the grid, `√d (n-1)·spacing`, and half the torus side, so it
/// is exact for every pair of grid nodes. The torus starts at
/// [`MIN_PADDING`] times the grid extent and doubles until the spectrum is
/// nonnegative up to [`CLIP_TOL`].
pub struct CirculantEmbedding {
    side: usize,
    dim: usize,
    /// `sqrt(λ_k / N)`.
    amplitude: Vec<f64>,
    fft: TorusFft,
    /// Most negative `λ/λ_max` before clipping.
    pub min_ratio: f64,
}

impl CirculantEmbedding {
    pub fn new(alpha: f64, dim: usize, nodes_per_axis: usize, spacing: f64) -> Result<Self> {
        let extent = nodes_per_axis - 1;
        let mut side = (MIN_PADDING * extent).next_power_of_two();
        let mut last_ratio;
        loop {
            let (amplitude, fft, ratio) = Self::spectrum(alpha, dim, side, extent, spacing);
            last_ratio = ratio;
            if ratio >= -CLIP_TOL {
                return Ok(Self {
                    side,
                    dim,
                    amplitude,
                    fft,
                    min_ratio: ratio,
                });
            }
            if (2 * side).pow(dim as u32) > MAX_TORUS_POINTS {
                break;
            }
            side *= 2;
        }
        Err(Error::Embedding {
            min_ratio: last_ratio,
            torus: side,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    fn spectrum(
        alpha: f64,
        dim: usize,
        side: usize,
        extent: usize,
        spacing: f64,
    ) -> (Vec<f64>, TorusFft, f64) {
        let fft = TorusFft::new(side, dim);
        let total = fft.len();
        let r_exact = (dim as f64).sqrt() * extent as f64 * spacing;
        let r_zero = 0.5 * side as f64 * spacing;
        let wrap: Vec<f64> = (0..side)
            .map(|k| k.min(side - k) as f64 * spacing)
            .collect();
        let mut c = vec![Complex64::new(0.0, 0.0); total];
        for (idx, ci) in c.iter_mut().enumerate() {
            let mut rest = idx;
            let mut r2 = 0.0;
            for _ in 0..dim {
                let d = wrap[rest % side];
                r2 += d * d;
                rest /= side;
            }
            let r = r2.sqrt();
            let taper = smooth_step((r - r_exact) / (r_zero - r_exact));
            *ci = Complex64::new(gaussian_covariance(alpha, r) * taper, 0.0);
        }
        fft.forward(&mut c);
        let max = c.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let min = c.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let amplitude = c
            .iter()
            .map(|z| (z.re.max(0.0) / total as f64).sqrt())
            .collect();
        (amplitude, fft, min / max)
    }

    /// Two independent samples of the Gaussian field on the first
    /// `nodes_per_axis^d` torus points, from the real and imaginary parts of
    /// one transform.
    fn sample_pair(&self, rng: &mut impl Rng) -> Vec<Complex64> {
        let mut w: Vec<Complex64> = self
            .amplitude
            .iter()
            .map(|&a| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(a * re, a * im)
            })
            .collect();
        self.fft.forward(&mut w);
        w
    }

    fn torus_index(&self, node: &[usize; MAX_DIM]) -> usize {
        (0..self.dim).fold(0, |acc, a| acc * self.side + node[a])
    }
}

/// `1` on `t ≤ 0`, `0` on `t ≥ 1`, infinitely smooth in between.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / (1.0 - t)).exp();
        let b = (-1.0 / t).exp();
        a / (a + b)
    }
}

/// Sampler for one `(model, grid, ε)`; expensive set-up (the circulant
/// spectrum) happens once and draws are pure functions of the seed.
pub struct FieldSampler {
    model: PotentialModel,
    grid: Grid,
    epsilon: f64,
    embedding: Option<CirculantEmbedding>,
}

impl FieldSampler {
    pub fn new(model: &PotentialModel, grid: &Grid, epsilon: f64) -> Result<Self> {
        check_resolution(grid, epsilon)?;
        let embedding = match model.kind {
            PotentialKind::LongRange { dim, alpha, .. } => {
                if dim != grid.dim() {
                    return Err(Error::Config(format!(
                        "long-range model built for dim {dim} used on a {}-dimensional grid",
                        grid.dim()
                    )));
                }
                Some(CirculantEmbedding::new(alpha, dim, grid.n(), grid.h() / epsilon)?)
            }
            _ => None,
        };
        Ok(Self {
            model: *model,
            grid: *grid,
            epsilon,
            embedding,
        })
    }

    pub fn model(&self) -> &PotentialModel {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn embedding(&self) -> Option<&CirculantEmbedding> {
        self.embedding.as_ref()
    }

    pub fn sample(&self, seed: u64) -> FieldSample {
        let nu = match self.model.kind {
            PotentialKind::Constant => GridFunction::zeros(self.grid),
            PotentialKind::ShortRange { amplitude } => self.checkerboard(amplitude, seed),
            PotentialKind::LongRange { .. } => {
                let g = self.gaussian(seed);
                g.map(|s| self.model.phi(s))
            }
        };
        let q_mean = self.model.q_mean;
        FieldSample {
            q_eps: nu.map(|v| q_mean + v),
            epsilon: self.epsilon,
            seed,
            q_mean,
        }
    }

    /// Realizations produced per seed by [`FieldSampler::sample_batch`].
    pub fn batch_size(&self) -> usize {
        if self.embedding.is_some() {
            2
        } else {
            1
        }
    }

    /// Independent realizations from one seed. Long-range models use both
    /// the real and imaginary parts of a single transform.
    pub fn sample_batch(&self, seed: u64) -> Vec<FieldSample> {
        if self.embedding.is_none() {
            return vec![self.sample(seed)];
        }
        let (a, b) = self.gaussian_pair(seed);
        let q_mean = self.model.q_mean;
        [a, b]
            .into_iter()
            .map(|g| FieldSample {
                q_eps: g.map(|s| q_mean + self.model.phi(s)),
                epsilon: self.epsilon,
                seed,
                q_mean,
            })
            .collect()
    }

    /// The underlying Gaussian field `𝔤(x/ε)` of a long-range model.
    pub fn gaussian(&self, seed: u64) -> GridFunction {
        self.gaussian_pair(seed).0
    }

    /// Both independent Gaussian fields produced by one transform.
    pub fn gaussian_pair(&self, seed: u64) -> (GridFunction, GridFunction) {
        let ce = self
            .embedding
            .as_ref()
            .expect("Gaussian field requested from a model without one");
        let mut rng = rng_from_seed(seed);
        let z = ce.sample_pair(&mut rng);
        let mut re = Vec::with_capacity(self.grid.interior_count());
        let mut im = Vec::with_capacity(self.grid.interior_count());
        for i in 0..self.grid.interior_count() {
            let v = z[ce.torus_index(&self.grid.node_of(i))];
            re.push(v.re);
            im.push(v.im);
        }
        (
            GridFunction::from_values(self.grid, re),
            GridFunction::from_values(self.grid, im),
        )
    }

    fn checkerboard(&self, amplitude: f64, seed: u64) -> GridFunction {
        let dim = self.grid.dim();
        let mut rng = rng_from_seed(seed);
        let mut shift = [0.0; MAX_DIM];
        for s in shift.iter_mut().take(dim) {
            *s = rng.random::<f64>();
        }
        // Cells covering [0, 1/ε + 1) per axis.
        let cells = (1.0 / self.epsilon).floor() as usize + 2;
        let coins: Vec<f64> = (0..cells.pow(dim as u32))
            .map(|_| if rng.random::<bool>() { amplitude } else { -amplitude })
            .collect();
        let values = (0..self.grid.interior_count())
            .map(|i| {
                let x = self.grid.coords(i);
                let cell = (0..dim).fold(0, |acc, a| {
                    let k = (x[a] / self.epsilon + shift[a]).floor() as usize;
                    acc * cells + k.min(cells - 1)
                });
                coins[cell]
            })
            .collect();
        GridFunction::from_values(self.grid, values)
    }
}

/// One realization of the scaled potential.
pub fn sample_potential(
    model: &PotentialModel,
    grid: &Grid,
    epsilon: f64,
    seed: u64,
) -> Result<FieldSample> {
    Ok(FieldSampler::new(model, grid, epsilon)?.sample(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randfield::model::build_long_range;
    use crate::randfield::model::build_short_range;

    #[test]
    fn resolution_rule() {
        let grid = Grid::new(2, 65).unwrap();
        assert!(check_resolution(&grid, 1.0 / 8.0).is_ok());
        assert!(check_resolution(&grid, 1.0 / 16.0).is_err());
        let m = build_short_range(5.0, 0.5).unwrap();
        assert!(matches!(sample_potential(&m, &grid, 0.1, 1), Err(Error::Config(_))));
    }

    #[test]
    fn coin_support_and_determinism() {
        let grid = Grid::new(2, 65).unwrap();
        let m = build_short_range(5.0, 0.5).unwrap();
        let a = sample_potential(&m, &grid, 0.125, 9).unwrap();
        let b = sample_potential(&m, &grid, 0.125, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.q_eps.values().iter().all(|&q| q == 4.5 || q == 5.5));
        let c = sample_potential(&m, &grid, 0.125, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn checkerboard_cells_have_width_epsilon() {
        // Along each axis the field changes at most once every ε/h nodes.
        let grid = Grid::new(2, 129).unwrap();
        let m = build_short_range(0.0, 1.0).unwrap();
        let s = sample_potential(&m, &grid, 0.125, 3).unwrap();
        let mm = grid.interior_per_axis();
        let row = &s.q_eps.values()[..mm];
        let changes: Vec<usize> = (1..mm).filter(|&j| row[j] != row[j - 1]).collect();
        for w in changes.windows(2) {
            assert!(w[1] - w[0] >= 16);
        }
    }

    #[test]
    fn long_range_values_stay_in_range() {
        let grid = Grid::new(2, 33).unwrap();
        let m = build_long_range(2.0, 1.0, 0.75, 2).unwrap();
        let sampler = FieldSampler::new(&m, &grid, 0.25).unwrap();
        assert!(sampler.embedding().unwrap().min_ratio >= -CLIP_TOL);
        let s = sampler.sample(4);
        assert!(s.q_eps.values().iter().all(|&q| (1.25..=2.75).contains(&q)));
        assert_eq!(s, sampler.sample(4));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let grid = Grid::new(2, 33).unwrap();
        let m = build_long_range(2.0, 1.0, 0.75, 3).unwrap();
        assert!(FieldSampler::new(&m, &grid, 0.25).is_err());
    }

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(-0.1), 1.0);
        assert_eq!(smooth_step(1.2), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }
}
