//! Uniform Cartesian grids on the unit square or cube.
//!
//! Fields live on interior nodes only; boundary nodes carry the homogeneous
//! Dirichlet value and are never stored. Interior nodes are numbered
//! lexicographically with the last axis varying fastest.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    h: f64,
}

impl Grid {
    /// Grid on `(0,1)^dim` with `n` nodes per axis, boundary included.
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::Config(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 3 {
            return Err(Error::Config(format!("n must be at least 3, got {n}")));
        }
        Ok(Self {
            dim,
            n,
            h: 1.0 / (n - 1) as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis, boundary included.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Interior nodes per axis, `n - 2`.
    pub fn interior_per_axis(&self) -> usize {
        self.n - 2
    }

    pub fn interior_count(&self) -> usize {
        self.interior_per_axis().pow(self.dim as u32)
    }

    /// Quadrature weight `h^dim` of one node.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Index strides of the interior numbering, one per axis.
    pub fn strides(&self) -> [usize; MAX_DIM] {
        let m = self.interior_per_axis();
        let mut s = [0; MAX_DIM];
        let mut acc = 1;
        for a in (0..self.dim).rev() {
            s[a] = acc;
            acc *= m;
        }
        s
    }

    /// Node multi-index (0..n per axis) of an interior linear index.
    pub fn node_of(&self, index: usize) -> [usize; MAX_DIM] {
        let m = self.interior_per_axis();
        let mut node = [0; MAX_DIM];
        let mut rest = index;
        for a in (0..self.dim).rev() {
            node[a] = rest % m + 1;
            rest /= m;
        }
        node
    }

    /// Interior linear index of a node, `None` for boundary or out-of-range nodes.
    pub fn index_of(&self, node: &[usize]) -> Option<usize> {
        if node.len() != self.dim || self.is_boundary(node) {
            return None;
        }
        let s = self.strides();
        Some(node.iter().zip(s).map(|(&i, st)| (i - 1) * st).sum())
    }

    /// A node is on the boundary when any index is `0` or `n-1`; indices past
    /// the grid also count as boundary.
    pub fn is_boundary(&self, node: &[usize]) -> bool {
        node.iter().any(|&i| i == 0 || i >= self.n - 1)
    }

    /// Physical coordinates of an interior index; unused axes are zero.
    pub fn coords(&self, index: usize) -> [f64; MAX_DIM] {
        let node = self.node_of(index);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = node[a] as f64 * self.h;
        }
        x
    }

    /// Closed-form first eigenvalue of the discrete Dirichlet Laplacian,
    /// `dim * (4/h²) sin²(πh/2)`.
    pub fn dirichlet_lambda1(&self) -> f64 {
        let s = (PI * self.h / 2.0).sin();
        self.dim as f64 * 4.0 * s * s / (self.h * self.h)
    }
}

/// A real field on the interior nodes of a grid, zero on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.interior_count()],
        }
    }

    /// Panics when `values` does not match the interior node count.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            grid.interior_count(),
            "field length does not match the grid interior"
        );
        Self { grid, values }
    }

    /// Samples `f` at the interior node coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.interior_count())
            .map(|i| f(&grid.coords(i)[..dim]))
            .collect();
        Self { grid, values }
    }

    /// The product `Π sin(π x_a)`, the first Dirichlet eigenfunction.
    pub fn sine_mode(grid: Grid) -> Self {
        Self::from_fn(grid, |x| x.iter().map(|&xi| (PI * xi).sin()).product())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check(&self, other: &GridFunction) {
        assert_eq!(self.grid, other.grid, "grid functions live on different grids");
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Self {
        self.check(other);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Nodewise product.
    pub fn hadamard(&self, other: &GridFunction) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn add(&self, other: &GridFunction) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &GridFunction) {
        self.check(other);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(self)
    }

    pub fn linf_norm(&self) -> f64 {
        linf_norm(self)
    }

    pub fn inner(&self, other: &GridFunction) -> f64 {
        inner_product(self, other)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `sqrt(h^dim Σ v_i²)`.
pub fn l2_norm(v: &GridFunction) -> f64 {
    inner_product(v, v).sqrt()
}

pub fn linf_norm(v: &GridFunction) -> f64 {
    v.values.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `h^dim Σ v_i w_i`.
pub fn inner_product(v: &GridFunction, w: &GridFunction) -> f64 {
    v.check(w);
    v.grid.cell_volume() * dot(&v.values, &w.values)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `w = -Δ_h v` with the `2·dim+1` point stencil and zero Dirichlet data.
pub fn laplacian_apply(grid: &Grid, v: &GridFunction) -> GridFunction {
    assert_eq!(grid, v.grid(), "field does not live on this grid");
    let mut out = vec![0.0; v.len()];
    apply_shifted_laplacian(grid, v.values(), None, &mut out);
    GridFunction::from_values(*grid, out)
}

/// `out = (-Δ_h + c) v`, with `c` a nodewise coefficient (absent means zero).
pub(crate) fn apply_shifted_laplacian(grid: &Grid, v: &[f64], coef: Option<&[f64]>, out: &mut [f64]) {
    let m = grid.interior_per_axis();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let center = 2.0 * grid.dim() as f64;
    match grid.dim() {
        2 => {
            for i in 0..m {
                let row = i * m;
                for j in 0..m {
                    let k = row + j;
                    let mut nb = 0.0;
                    if i > 0 {
                        nb += v[k - m];
                    }
                    if i + 1 < m {
                        nb += v[k + m];
                    }
                    if j > 0 {
                        nb += v[k - 1];
                    }
                    if j + 1 < m {
                        nb += v[k + 1];
                    }
                    out[k] = (center * v[k] - nb) * inv_h2;
                }
            }
        }
        3 => {
            let mm = m * m;
            for i in 0..m {
                for j in 0..m {
                    let row = i * mm + j * m;
                    for l in 0..m {
                        let k = row + l;
                        let mut nb = 0.0;
                        if i > 0 {
                            nb += v[k - mm];
                        }
                        if i + 1 < m {
                            nb += v[k + mm];
                        }
                        if j > 0 {
                            nb += v[k - m];
                        }
                        if j + 1 < m {
                            nb += v[k + m];
                        }
                        if l > 0 {
                            nb += v[k - 1];
                        }
                        if l + 1 < m {
                            nb += v[k + 1];
                        }
                        out[k] = (center * v[k] - nb) * inv_h2;
                    }
                }
            }
        }
        _ => unreachable!("grid dimension is validated at construction"),
    }
    if let Some(c) = coef {
        for ((o, &vi), &ci) in out.iter_mut().zip(v).zip(c) {
            *o += ci * vi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grids() {
        let g = Grid::new(2, 3).unwrap();
        assert_eq!(g.interior_count(), 1);
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.coords(0)[..2], [0.5, 0.5]);

        let g = Grid::new(2, 5).unwrap();
        assert_eq!(g.interior_count(), 9);
        assert_eq!(g.h(), 0.25);

        let g = Grid::new(3, 5).unwrap();
        assert_eq!(g.interior_count(), 27);
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.h() * (g.n() - 1) as f64, 1.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(Grid::new(1, 5), Err(Error::Config(_))));
        assert!(matches!(Grid::new(4, 5), Err(Error::Config(_))));
        assert!(matches!(Grid::new(2, 2), Err(Error::Config(_))));
    }

    #[test]
    fn boundary_bookkeeping() {
        let g = Grid::new(3, 6).unwrap();
        assert!(g.is_boundary(&[0, 2, 2]));
        assert!(g.is_boundary(&[2, 5, 2]));
        assert!(!g.is_boundary(&[1, 4, 3]));
        for idx in [0, 17, g.interior_count() - 1] {
            let node = g.node_of(idx);
            assert_eq!(g.index_of(&node[..3]), Some(idx));
        }
        assert_eq!(g.index_of(&[0, 1, 1]), None);
    }

    #[test]
    fn laplacian_of_zero_is_zero() {
        let g = Grid::new(2, 9).unwrap();
        let w = laplacian_apply(&g, &GridFunction::zeros(g));
        assert!(w.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn laplacian_of_sine_mode_is_eigenpair() {
        let g = Grid::new(2, 17).unwrap();
        let v = GridFunction::sine_mode(g);
        let w = laplacian_apply(&g, &v);
        let h = g.h();
        let lambda = 8.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        for (wi, vi) in w.values().iter().zip(v.values()) {
            assert!((wi - lambda * vi).abs() <= 1e-12 * (lambda * vi).abs());
        }
    }

    #[test]
    fn impulse_response_is_the_stencil() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 5).unwrap();
            let centre = vec![2; dim];
            let k = g.index_of(&centre).unwrap();
            let mut v = GridFunction::zeros(g);
            v.values_mut()[k] = 1.0;
            let w = laplacian_apply(&g, &v);
            let inv_h2 = 1.0 / (g.h() * g.h());
            assert_eq!(w.values()[k], 2.0 * dim as f64 * inv_h2);
            let mut neighbours = 0;
            for (i, &wi) in w.values().iter().enumerate() {
                if i == k {
                    continue;
                }
                let node = g.node_of(i);
                let dist: usize = (0..dim).map(|a| node[a].abs_diff(2)).sum();
                if dist == 1 {
                    assert_eq!(wi, -inv_h2);
                    neighbours += 1;
                } else {
                    assert_eq!(wi, 0.0);
                }
            }
            assert_eq!(neighbours, 2 * dim);
        }
    }

    #[test]
    fn norms() {
        let g = Grid::new(2, 5).unwrap();
        let z = GridFunction::zeros(g);
        assert_eq!(z.l2_norm(), 0.0);
        assert_eq!(z.linf_norm(), 0.0);
        assert_eq!(z.inner(&z), 0.0);
        let one = GridFunction::constant(g, 1.0);
        assert!((one.l2_norm() - 0.75).abs() < 1e-15);
        assert_eq!(one.linf_norm(), 1.0);

        let g = Grid::new(2, 65).unwrap();
        let s = GridFunction::sine_mode(g);
        assert!((s.l2_norm().powi(2) - 0.25).abs() < 1e-3);
    }

    #[test]
    #[should_panic(expected = "different grids")]
    fn mismatched_grids_panic() {
        let a = GridFunction::zeros(Grid::new(2, 5).unwrap());
        let b = GridFunction::zeros(Grid::new(2, 7).unwrap());
        let _ = inner_product(&a, &b);
    }
}
