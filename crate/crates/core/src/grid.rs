//! Uniform P1 (1D) and Q1 (2D) meshes with lumped mass, coefficient-weighted
//! stiffness, the gravity load and Dirichlet condensation.

use std::io::Write;

use crate::error::{HysteraError, Result};

/// What a nodal vector stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    U,
    V,
    S,
    P,
    Residual,
}

/// One value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    pub role: Role,
    pub values: Vec<f64>,
}

impl FieldVector {
    pub fn new(role: Role, values: Vec<f64>, grid: &Grid) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(HysteraError::Usage(format!(
                "{role:?} field has {} entries for {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(HysteraError::Corrupted(format!(
                "{role:?} field has non-finite value {} at node {i}",
                values[i]
            )));
        }
        Ok(Self { role, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Deref for FieldVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Symmetric matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    /// Set when the operator is a lumped (diagonal) mass matrix.
    pub lumped: bool,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
            lumped: false,
        }
    }

    pub fn diagonal_matrix(d: &[f64]) -> Self {
        let mut op = Self::from_triplets(d.len(), d.iter().enumerate().map(|(i, &x)| (i, i, x)).collect());
        op.lumped = true;
        op
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, a)| a * x[j]).sum()).collect()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, a)| (a - self.get(j, i)).abs() <= tol))
    }

    pub fn is_tridiagonal(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, _)| i.abs_diff(j) <= 1))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        a
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: f64, other: &SparseOperator) -> Self {
        let mut t = Vec::with_capacity(self.vals.len() + other.vals.len());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, s * v)));
        }
        Self::from_triplets(self.n, t)
    }

    /// Block with the given rows and columns, renumbered in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.n];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut t = Vec::new();
        for (r, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if col_map[j] != usize::MAX {
                    t.push((r, col_map[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), t)
    }
}

/// Uniform box mesh in one or two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    nodes: [usize; 2],
    h: [f64; 2],
    boundary: Vec<bool>,
    interior: Vec<usize>,
    boundary_nodes: Vec<usize>,
    mass: Vec<f64>,
}

impl Grid {
    /// `[0, length]` with `nodes` equally spaced nodes, Dirichlet at both ends.
    pub fn line(length: f64, nodes: usize) -> Result<Self> {
        Self::build(1, [length, 1.0], [nodes, 1])
    }

    /// `[0, lx] × [0, ly]`, Dirichlet on the whole perimeter.
    pub fn rect(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::build(2, [lx, ly], [nx, ny])
    }

    fn build(dim: usize, extent: [f64; 2], nodes: [usize; 2]) -> Result<Self> {
        for a in 0..dim {
            if nodes[a] < 3 {
                return Err(HysteraError::Config {
                    line: 0,
                    detail: format!("grid needs at least 3 nodes per axis, got {}", nodes[a]),
                });
            }
            if !(extent[a] > 0.0 && extent[a].is_finite()) {
                return Err(HysteraError::Config {
                    line: 0,
                    detail: format!("grid extent must be positive, got {}", extent[a]),
                });
            }
        }
        let h = [
            extent[0] / (nodes[0] - 1) as f64,
            if dim == 2 { extent[1] / (nodes[1] - 1) as f64 } else { 1.0 },
        ];
        let n = nodes[0] * nodes[1];
        let mut boundary = vec![false; n];
        let mut mass = vec![0.0; n];
        for j in 0..nodes[1] {
            for i in 0..nodes[0] {
                let k = j * nodes[0] + i;
                let edge_x = i == 0 || i == nodes[0] - 1;
                let edge_y = dim == 2 && (j == 0 || j == nodes[1] - 1);
                boundary[k] = edge_x || edge_y;
                let wx = if edge_x { 0.5 * h[0] } else { h[0] };
                let wy = if dim == 1 {
                    1.0
                } else if edge_y {
                    0.5 * h[1]
                } else {
                    h[1]
                };
                mass[k] = wx * wy;
            }
        }
        let interior = (0..n).filter(|&k| !boundary[k]).collect();
        let boundary_nodes = (0..n).filter(|&k| boundary[k]).collect();
        Ok(Self {
            dim,
            nodes,
            h,
            boundary,
            interior,
            boundary_nodes,
            mass,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.boundary.len()
    }

    /// Nodes per axis.
    pub fn shape(&self) -> [usize; 2] {
        self.nodes
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.h
    }

    pub fn coords(&self, k: usize) -> [f64; 2] {
        let i = k % self.nodes[0];
        let j = k / self.nodes[0];
        [i as f64 * self.h[0], if self.dim == 2 { j as f64 * self.h[1] } else { 0.0 }]
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.boundary[k]
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// Lumped mass weights (trapezoid rule).
    pub fn lumped_mass(&self) -> &[f64] {
        &self.mass
    }

    /// Element connectivity: pairs in 1D, `(i,j), (i+1,j), (i,j+1), (i+1,j+1)` in 2D.
    pub fn elements(&self) -> Vec<Vec<usize>> {
        let nx = self.nodes[0];
        if self.dim == 1 {
            (0..nx - 1).map(|i| vec![i, i + 1]).collect()
        } else {
            let mut e = Vec::with_capacity((nx - 1) * (self.nodes[1] - 1));
            for j in 0..self.nodes[1] - 1 {
                for i in 0..nx - 1 {
                    let k = j * nx + i;
                    e.push(vec![k, k + 1, k + nx, k + nx + 1]);
                }
            }
            e
        }
    }

    fn element_stiffness(&self) -> Vec<Vec<f64>> {
        if self.dim == 1 {
            let a = 1.0 / self.h[0];
            return vec![vec![a, -a], vec![-a, a]];
        }
        let (hx, hy) = (self.h[0], self.h[1]);
        let k1 = [[1.0, -1.0], [-1.0, 1.0]];
        let m1 = [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]];
        let mut k = vec![vec![0.0; 4]; 4];
        for (a, row) in k.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                let (ia, ja, ib, jb) = (a % 2, a / 2, b % 2, b / 2);
                *x = hy / hx * k1[ia][ib] * m1[ja][jb] + hx / hy * m1[ia][ib] * k1[ja][jb];
            }
        }
        k
    }

    /// `∫_e ∇φ_a` for each local node of an element.
    fn element_gradient_integrals(&self) -> Vec<[f64; 2]> {
        if self.dim == 1 {
            return vec![[-1.0, 0.0], [1.0, 0.0]];
        }
        let (hx, hy) = (self.h[0], self.h[1]);
        (0..4)
            .map(|a| {
                let sx = if a % 2 == 0 { -1.0 } else { 1.0 };
                let sy = if a / 2 == 0 { -1.0 } else { 1.0 };
                [sx * 0.5 * hy, sy * 0.5 * hx]
            })
            .collect()
    }

    pub fn mass_operator(&self) -> SparseOperator {
        SparseOperator::diagonal_matrix(&self.mass)
    }

    /// Stiffness for `(D ∇u, ∇φ)` with `D` averaged over each element's nodes.
    pub fn stiffness(&self, d: &[f64]) -> Result<SparseOperator> {
        self.check_len(d.len())?;
        if let Some(k) = d.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(HysteraError::Degenerate { node: k, value: d[k] });
        }
        let ke = self.element_stiffness();
        let mut t = Vec::new();
        for e in self.elements() {
            let de = e.iter().map(|&k| d[k]).sum::<f64>() / e.len() as f64;
            for (a, &i) in e.iter().enumerate() {
                for (b, &j) in e.iter().enumerate() {
                    t.push((i, j, de * ke[a][b]));
                }
            }
        }
        Ok(SparseOperator::from_triplets(self.n_nodes(), t))
    }

    /// Stiffness with `D ≡ 1`.
    pub fn unit_stiffness(&self) -> SparseOperator {
        self.stiffness(&vec![1.0; self.n_nodes()]).expect("unit coefficient is positive")
    }

    /// `(F, ∇φ_i)` with `F` averaged over each element's nodes.
    pub fn flux_load(&self, f: &[[f64; 2]]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        let g = self.element_gradient_integrals();
        let mut load = vec![0.0; self.n_nodes()];
        for e in self.elements() {
            let w = 1.0 / e.len() as f64;
            let fe = e.iter().fold([0.0, 0.0], |acc, &k| [acc[0] + w * f[k][0], acc[1] + w * f[k][1]]);
            for (a, &i) in e.iter().enumerate() {
                load[i] += fe[0] * g[a][0] + fe[1] * g[a][1];
            }
        }
        Ok(load)
    }

    /// Lumped `(a, b)`.
    pub fn l2_inner(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        Ok(self.mass.iter().zip(a).zip(b).map(|((m, x), y)| m * x * y).sum())
    }

    pub fn l2_norm_sq(&self, a: &[f64]) -> Result<f64> {
        self.l2_inner(a, a)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.n_nodes() {
            return Err(HysteraError::Usage(format!(
                "vector of length {n} on a grid with {} nodes",
                self.n_nodes()
            )));
        }
        Ok(())
    }

    /// Writes `node_index,x,y,boundary`.
    pub fn write_nodes_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "node_index,x,y,boundary")?;
        for k in 0..self.n_nodes() {
            let [x, y] = self.coords(k);
            writeln!(w, "{k},{x},{y},{}", u8::from(self.boundary[k]))?;
        }
        Ok(())
    }
}

/// `M + Δt K(D)` condensed to the interior nodes, with what is needed to form
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct StepSystem {
    /// Condensed operator on the interior nodes.
    pub matrix: SparseOperator,
    /// `Δt K_IB` coupling interior rows to boundary columns.
    pub coupling: SparseOperator,
    /// Full-length `(F, ∇φ_i)`.
    pub load: Vec<f64>,
    pub dt: f64,
}

impl StepSystem {
    /// Interior right-hand side `r_I - Δt K_IB u_B` for a full-length `r`.
    pub fn condense_rhs(&self, grid: &Grid, r: &[f64], u: &[f64]) -> Vec<f64> {
        let ub: Vec<f64> = grid.boundary_nodes().iter().map(|&k| u[k]).collect();
        let c = self.coupling.matvec(&ub);
        grid.interior().iter().zip(c).map(|(&k, ck)| r[k] - ck).collect()
    }
}

/// Assembles the linear system of one implicit step.
pub fn assemble_step_system(grid: &Grid, d: &[f64], f: &[[f64; 2]], dt: f64) -> Result<StepSystem> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(HysteraError::Usage(format!("time step must be positive, got {dt}")));
    }
    let k = grid.stiffness(d)?;
    let full = grid.mass_operator().add_scaled(dt, &k);
    let matrix = full.submatrix(grid.interior(), grid.interior());
    let mut coupling = k.submatrix(grid.interior(), grid.boundary_nodes());
    coupling.vals.iter_mut().for_each(|x| *x *= dt);
    let load = grid.flux_load(f)?;
    Ok(StepSystem {
        matrix,
        coupling,
        load,
        dt,
    })
}
