//! Uniform triangulation of `[−1,1]²` and exact P1 element integrals.
//!
//! Each of the `n × n` squares is cut along its `/` diagonal, i.e. from its
//! lower-left to its upper-right corner.

use crate::error::Result;
use crate::la::SparseMatrix;

/// Grid vertex `(i, j)` sits at `(−1 + i h, −1 + j h)`.
pub type Vertex = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuredMesh {
    n: usize,
}

impl StructuredMesh {
    pub fn new(n_cells_per_side: usize) -> Self {
        Self { n: n_cells_per_side }
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        2.0 / self.n as f64
    }

    pub fn vertex_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn interior_count(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    pub fn coord(&self, v: Vertex) -> [f64; 2] {
        let h = self.h();
        [-1.0 + v.0 as f64 * h, -1.0 + v.1 as f64 * h]
    }

    /// Row-major index among interior vertices; `None` on the boundary.
    pub fn interior_index(&self, v: Vertex) -> Option<usize> {
        let (i, j) = v;
        if i == 0 || j == 0 || i >= self.n || j >= self.n {
            None
        } else {
            Some((j - 1) * (self.n - 1) + (i - 1))
        }
    }

    /// Index among all vertices.
    pub fn vertex_index(&self, v: Vertex) -> usize {
        v.1 * (self.n + 1) + v.0
    }

    /// Triangles with counter-clockwise vertices, square by square.
    pub fn triangles(&self) -> impl Iterator<Item = [Vertex; 3]> + '_ {
        (0..self.n).flat_map(move |j| {
            (0..self.n).flat_map(move |i| {
                [
                    [(i, j), (i + 1, j), (i + 1, j + 1)],
                    [(i, j), (i + 1, j + 1), (i, j + 1)],
                ]
            })
        })
    }

    pub fn centroid(&self, t: &[Vertex; 3]) -> [f64; 2] {
        let c: Vec<[f64; 2]> = t.iter().map(|&v| self.coord(v)).collect();
        [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0]
    }

    pub fn element(&self, t: &[Vertex; 3]) -> Element {
        Element::new([self.coord(t[0]), self.coord(t[1]), self.coord(t[2])])
    }
}

/// Area and hat-function gradients of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

impl Element {
    pub fn new(p: [[f64; 2]; 3]) -> Self {
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let mut grads = [[0.0; 2]; 3];
        for (k, g) in grads.iter_mut().enumerate() {
            let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
            *g = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
        }
        Self {
            area: 0.5 * det.abs(),
            grads,
        }
    }

    /// `∫ ∇φ_l · ∇φ_k`.
    pub fn stiffness(&self) -> [[f64; 3]; 3] {
        self.local(|k, l| self.area * (self.grads[k][0] * self.grads[l][0] + self.grads[k][1] * self.grads[l][1]))
    }

    /// `∫ φ_l φ_k`.
    pub fn mass(&self) -> [[f64; 3]; 3] {
        self.local(|k, l| self.area / 12.0 * if k == l { 2.0 } else { 1.0 })
    }

    /// `∫ (b · ∇φ_l) φ_k` for constant `b`.
    pub fn convection(&self, b: [f64; 2]) -> [[f64; 3]; 3] {
        self.local(|_, l| self.area / 3.0 * (b[0] * self.grads[l][0] + b[1] * self.grads[l][1]))
    }

    /// `∫ ε(φ_l e_b) : ε(φ_k e_a)`.
    pub fn strain(&self, a: usize, b: usize) -> [[f64; 3]; 3] {
        let (g, area) = (&self.grads, self.area);
        self.local(|k, l| {
            let same = if a == b { g[k][0] * g[l][0] + g[k][1] * g[l][1] } else { 0.0 };
            0.5 * area * (same + g[k][b] * g[l][a])
        })
    }

    /// `∫ ∂_b φ_l ∂_a φ_k` — the divergence coupling of components `a`, `b`.
    pub fn div_div(&self, a: usize, b: usize) -> [[f64; 3]; 3] {
        self.local(|k, l| self.area * self.grads[k][a] * self.grads[l][b])
    }

    /// `∫ φ_k`.
    pub fn load(&self) -> f64 {
        self.area / 3.0
    }

    fn local(&self, f: impl Fn(usize, usize) -> f64) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (k, row) in out.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate() {
                *v = f(k, l);
            }
        }
        out
    }
}

/// Maps grid vertices to unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofMap {
    /// Homogeneous Dirichlet: interior vertices only.
    Interior,
    /// Every vertex.
    All,
}

impl DofMap {
    pub fn count(&self, mesh: &StructuredMesh) -> usize {
        match self {
            DofMap::Interior => mesh.interior_count(),
            DofMap::All => mesh.vertex_count(),
        }
    }

    pub fn index(&self, mesh: &StructuredMesh, v: Vertex) -> Option<usize> {
        match self {
            DofMap::Interior => mesh.interior_index(v),
            DofMap::All => Some(mesh.vertex_index(v)),
        }
    }
}

/// Scatters `local(triangle)` into a square matrix of `blocks × blocks`
/// components. `local` returns, per element, `(row block, col block, values)`
/// triples; `None` skips the element.
pub(crate) fn assemble<F>(mesh: &StructuredMesh, dofs: DofMap, blocks: usize, mut local: F) -> Result<SparseMatrix>
where
    F: FnMut(&[Vertex; 3], &Element) -> Vec<(usize, usize, [[f64; 3]; 3])>,
{
    let nd = dofs.count(mesh);
    let mut triplets = Vec::new();
    for t in mesh.triangles() {
        let e = mesh.element(&t);
        let ids: Vec<Option<usize>> = t.iter().map(|&v| dofs.index(mesh, v)).collect();
        for (rb, cb, vals) in local(&t, &e) {
            for k in 0..3 {
                let Some(r) = ids[k] else { continue };
                for l in 0..3 {
                    let Some(c) = ids[l] else { continue };
                    if vals[k][l] != 0.0 {
                        triplets.push((rb * nd + r, cb * nd + c, vals[k][l]));
                    }
                }
            }
        }
    }
    SparseMatrix::from_triplets(blocks * nd, blocks * nd, &triplets)
}

/// Load vector of a constant source per component.
pub(crate) fn load(mesh: &StructuredMesh, dofs: DofMap, values: &[f64]) -> Vec<f64> {
    let nd = dofs.count(mesh);
    let mut out = vec![0.0; values.len() * nd];
    for t in mesh.triangles() {
        let w = mesh.element(&t).load();
        for &v in &t {
            if let Some(i) = dofs.index(mesh, v) {
                for (c, &s) in values.iter().enumerate() {
                    out[c * nd + i] += s * w;
                }
            }
        }
    }
    out
}
