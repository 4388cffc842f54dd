//! Structured simplicial meshes of the unit square and unit cube.
//!
//! Vertices are numbered with x varying fastest, then y, then z. Grid cells
//! are visited in the same order and each one is split into simplices: two
//! triangles along the (0,0)–(1,1) diagonal in 2D, six Kuhn tetrahedra along
//! the main diagonal in 3D. Local facet `i` of a cell is the facet opposite
//! its local vertex `i`.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Tolerance used for point-in-cell tests and domain membership.
const LOCATE_TOL: f64 = 1e-12;

/// A codimension-one face of the mesh (edge in 2D, triangle in 3D).
#[derive(Debug, Clone)]
pub struct Facet {
    vertices: [usize; 3],
    dim: usize,
    cells: (usize, Option<usize>),
    local: (usize, usize),
    /// Unit normal pointing out of the first adjacent cell.
    pub normal: [f64; 3],
    /// Length (2D) or area (3D).
    pub measure: f64,
    /// Longest edge of the facet.
    pub diameter: f64,
}

impl Facet {
    pub fn vertices(&self) -> &[usize] {
        &self.vertices[..self.dim]
    }

    /// The cell the normal points out of.
    pub fn plus_cell(&self) -> usize {
        self.cells.0
    }

    /// The neighbouring cell, `None` on the boundary.
    pub fn minus_cell(&self) -> Option<usize> {
        self.cells.1
    }

    /// Local facet index inside the plus and minus cells.
    pub fn local_indices(&self) -> (usize, Option<usize>) {
        (self.local.0, self.cells.1.map(|_| self.local.1))
    }

    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }

    pub fn adjacent_cells(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.cells.0).chain(self.cells.1)
    }
}

/// A conforming simplicial triangulation of `(0,1)^dim`.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    n: usize,
    vertices: Vec<[f64; 3]>,
    cells: Vec<[usize; 4]>,
    cell_facets: Vec<[usize; 4]>,
    measures: Vec<f64>,
    bary_grads: Vec<[[f64; 3]; 4]>,
    facets: Vec<Facet>,
    h: f64,
}

/// Builds the `n × n` mesh of the unit square.
pub fn build_unit_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::invalid("mesh resolution must be at least 1"));
    }
    let stride = n + 1;
    let mut vertices = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64, 0.0]);
        }
    }
    let vid = |i: usize, j: usize| i + stride * j;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            cells.push([v00, v10, v11, 0]);
            cells.push([v00, v11, v01, 0]);
        }
    }
    Ok(Mesh::from_parts(2, n, vertices, cells))
}

/// Builds the `n × n × n` Kuhn mesh of the unit cube.
pub fn build_unit_cube_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::invalid("mesh resolution must be at least 1"));
    }
    let stride = n + 1;
    let mut vertices = Vec::with_capacity(stride * stride * stride);
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
            }
        }
    }
    let vid = |c: [usize; 3]| c[0] + stride * (c[1] + stride * c[2]);
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut corner = [i, j, k];
                    let mut tet = [0usize; 4];
                    tet[0] = vid(corner);
                    for (slot, &axis) in perm.iter().enumerate() {
                        corner[axis] += 1;
                        tet[slot + 1] = vid(corner);
                    }
                    // odd permutations give negatively oriented tetrahedra
                    if permutation_is_odd(perm) {
                        tet.swap(2, 3);
                    }
                    cells.push(tet);
                }
            }
        }
    }
    Ok(Mesh::from_parts(3, n, vertices, cells))
}

fn permutation_is_odd(p: [usize; 3]) -> bool {
    let mut inversions = 0;
    for a in 0..3 {
        for b in a + 1..3 {
            if p[a] > p[b] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Builds the unit-domain mesh of the given dimension.
pub fn build_unit_mesh(dim: usize, n: usize) -> Result<Mesh> {
    match dim {
        2 => build_unit_square_mesh(n),
        3 => build_unit_cube_mesh(n),
        _ => Err(Error::invalid(format!("dimension must be 2 or 3, got {dim}"))),
    }
}

/// Largest cell diameter of the mesh.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    mesh.h
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Mesh {
    fn from_parts(dim: usize, n: usize, vertices: Vec<[f64; 3]>, cells: Vec<[usize; 4]>) -> Mesh {
        let nv = dim + 1;
        let mut measures = Vec::with_capacity(cells.len());
        let mut bary_grads = Vec::with_capacity(cells.len());
        let mut h: f64 = 0.0;
        for cell in &cells {
            let x0 = vertices[cell[0]];
            let edges: Vec<[f64; 3]> = (1..nv).map(|i| sub(&vertices[cell[i]], &x0)).collect();
            let (signed, grads) = if dim == 2 {
                let det = edges[0][0] * edges[1][1] - edges[0][1] * edges[1][0];
                // rows of the inverse Jacobian give ∇λ_1, ∇λ_2
                let g1 = [edges[1][1] / det, -edges[1][0] / det, 0.0];
                let g2 = [-edges[0][1] / det, edges[0][0] / det, 0.0];
                let g0 = [-g1[0] - g2[0], -g1[1] - g2[1], 0.0];
                (det / 2.0, [g0, g1, g2, [0.0; 3]])
            } else {
                let c12 = cross(&edges[1], &edges[2]);
                let det = dot(&edges[0], &c12);
                let c20 = cross(&edges[2], &edges[0]);
                let c01 = cross(&edges[0], &edges[1]);
                let g1 = c12.map(|v| v / det);
                let g2 = c20.map(|v| v / det);
                let g3 = c01.map(|v| v / det);
                let g0 = [
                    -g1[0] - g2[0] - g3[0],
                    -g1[1] - g2[1] - g3[1],
                    -g1[2] - g2[2] - g3[2],
                ];
                (det / 6.0, [g0, g1, g2, g3])
            };
            debug_assert!(signed > 0.0, "cell with non-positive orientation");
            measures.push(signed);
            bary_grads.push(grads);
            for a in 0..nv {
                for b in a + 1..nv {
                    h = h.max(norm(&sub(&vertices[cell[a]], &vertices[cell[b]])));
                }
            }
        }

        let mut mesh = Mesh {
            dim,
            n,
            vertices,
            cells,
            cell_facets: Vec::new(),
            measures,
            bary_grads,
            facets: Vec::new(),
            h,
        };
        mesh.build_facets();
        mesh
    }

    fn build_facets(&mut self) {
        let dim = self.dim;
        let nv = dim + 1;
        let mut lookup: HashMap<[usize; 3], usize> = HashMap::with_capacity(self.cells.len() * nv);
        let mut facets: Vec<Facet> = Vec::new();
        let mut cell_facets = vec![[usize::MAX; 4]; self.cells.len()];
        for (c, cell) in self.cells.iter().enumerate() {
            for local in 0..nv {
                let mut verts = [usize::MAX; 3];
                let mut k = 0;
                for (i, &v) in cell[..nv].iter().enumerate() {
                    if i != local {
                        verts[k] = v;
                        k += 1;
                    }
                }
                let mut key = verts;
                key[..dim].sort_unstable();
                match lookup.get(&key) {
                    Some(&f) => {
                        let facet = &mut facets[f];
                        debug_assert!(facet.cells.1.is_none(), "facet shared by more than two cells");
                        facet.cells.1 = Some(c);
                        facet.local.1 = local;
                        cell_facets[c][local] = f;
                    }
                    None => {
                        let f = facets.len();
                        lookup.insert(key, f);
                        let g = self.bary_grads[c][local];
                        let gn = norm(&g);
                        let normal = g.map(|v| -v / gn);
                        let pts: Vec<[f64; 3]> = verts[..dim].iter().map(|&v| self.vertices[v]).collect();
                        let (measure, diameter) = if dim == 2 {
                            let l = norm(&sub(&pts[1], &pts[0]));
                            (l, l)
                        } else {
                            let e1 = sub(&pts[1], &pts[0]);
                            let e2 = sub(&pts[2], &pts[0]);
                            let e3 = sub(&pts[2], &pts[1]);
                            let area = 0.5 * norm(&cross(&e1, &e2));
                            (area, norm(&e1).max(norm(&e2)).max(norm(&e3)))
                        };
                        facets.push(Facet {
                            vertices: verts,
                            dim,
                            cells: (c, None),
                            local: (local, usize::MAX),
                            normal,
                            measure,
                            diameter,
                        });
                        cell_facets[c][local] = f;
                    }
                }
            }
        }
        self.facets = facets;
        self.cell_facets = cell_facets;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid intervals per axis.
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.vertices[v][..self.dim]
    }

    pub fn vertex3(&self, v: usize) -> [f64; 3] {
        self.vertices[v]
    }

    pub fn cell_vertices(&self, c: usize) -> &[usize] {
        &self.cells[c][..self.dim + 1]
    }

    /// Facet indices of a cell; entry `i` is the facet opposite local vertex `i`.
    pub fn cell_facets(&self, c: usize) -> &[usize] {
        &self.cell_facets[c][..self.dim + 1]
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        self.measures[c]
    }

    /// Constant gradients of the barycentric coordinates of a cell.
    pub fn barycentric_gradients(&self, c: usize) -> &[[f64; 3]] {
        &self.bary_grads[c][..self.dim + 1]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet(&self, f: usize) -> &Facet {
        &self.facets[f]
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Maps barycentric coordinates in cell `c` to a physical point.
    pub fn point_in_cell(&self, c: usize, bary: &[f64]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (i, &v) in self.cell_vertices(c).iter().enumerate() {
            let p = &self.vertices[v];
            for a in 0..3 {
                x[a] += bary[i] * p[a];
            }
        }
        x
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 3] {
        let w = 1.0 / (self.dim + 1) as f64;
        self.point_in_cell(c, &[w; 4])
    }

    /// Barycentric coordinates of `x` with respect to cell `c`.
    pub fn barycentric(&self, c: usize, x: &[f64]) -> [f64; 4] {
        let centroid = self.cell_centroid(c);
        let base = 1.0 / (self.dim + 1) as f64;
        let mut lam = [0.0; 4];
        for (i, g) in self.barycentric_gradients(c).iter().enumerate() {
            let mut s = base;
            for a in 0..self.dim {
                s += g[a] * (x[a] - centroid[a]);
            }
            lam[i] = s;
        }
        lam
    }

    pub fn is_boundary_point(&self, x: &[f64]) -> bool {
        x[..self.dim].iter().any(|&c| c.abs() < LOCATE_TOL || (c - 1.0).abs() < LOCATE_TOL)
    }

    /// Finds the lowest-index cell containing `x`, using the structured layout
    /// to restrict the search to the grid cells around the point.
    pub fn locate(&self, x: &[f64]) -> Result<(usize, [f64; 4])> {
        let dim = self.dim;
        if x.len() < dim || x[..dim].iter().any(|&c| !(-LOCATE_TOL..=1.0 + LOCATE_TOL).contains(&c)) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        let n = self.n as i64;
        let per_grid_cell = if dim == 2 { 2 } else { 6 };
        let mut ranges = [(0i64, 0i64); 3];
        for a in 0..dim {
            let base = ((x[a] * self.n as f64).floor() as i64).clamp(0, n - 1);
            ranges[a] = ((base - 1).max(0), (base + 1).min(n - 1));
        }
        let mut candidates = Vec::with_capacity(27);
        let (kr0, kr1) = if dim == 3 { ranges[2] } else { (0, 0) };
        for k in kr0..=kr1 {
            for j in ranges[1].0..=ranges[1].1 {
                for i in ranges[0].0..=ranges[0].1 {
                    let lo = [i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64];
                    let hi = [(i + 1) as f64 / n as f64, (j + 1) as f64 / n as f64, (k + 1) as f64 / n as f64];
                    if (0..dim).all(|a| x[a] >= lo[a] - LOCATE_TOL && x[a] <= hi[a] + LOCATE_TOL) {
                        candidates.push((i + n * (j + n * k)) as usize);
                    }
                }
            }
        }
        candidates.sort_unstable();
        for grid_cell in candidates {
            for sub in 0..per_grid_cell {
                let c = grid_cell * per_grid_cell + sub;
                let lam = self.barycentric(c, x);
                if lam[..=dim].iter().all(|&l| l >= -LOCATE_TOL) {
                    return Ok((c, lam));
                }
            }
        }
        Err(Error::OutsideDomain { point: x.to_vec() })
    }

    /// Whether each vertex lies on the domain boundary.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.n_vertices()];
        for f in self.facets.iter().filter(|f| f.is_boundary()) {
            for &v in f.vertices() {
                flags[v] = true;
            }
        }
        flags
    }

    /// Measure of the whole domain, summed over cells.
    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_topology(mesh: &Mesh) {
        for (c, facets) in mesh.cell_facets.iter().enumerate() {
            for (local, &f) in facets[..mesh.dim + 1].iter().enumerate() {
                let facet = mesh.facet(f);
                let (lp, lm) = facet.local_indices();
                if facet.plus_cell() == c {
                    assert_eq!(lp, local);
                } else {
                    assert_eq!(facet.minus_cell(), Some(c));
                    assert_eq!(lm, Some(local));
                }
            }
        }
        for facet in mesh.facets() {
            assert!((norm(&facet.normal) - 1.0).abs() < 1e-12);
            if facet.is_boundary() {
                for &v in facet.vertices() {
                    assert!(mesh.is_boundary_point(mesh.vertex(v)));
                }
                // outward normal of a boundary facet is an axis direction
                let centroid = mesh.cell_centroid(facet.plus_cell());
                let x = mesh.vertex3(facet.vertices()[0]);
                assert!(dot(&facet.normal, &sub(&x, &centroid)) > 0.0);
            } else {
                let minus = facet.minus_cell().unwrap();
                let (_, lm) = facet.local_indices();
                let g = mesh.barycentric_gradients(minus)[lm.unwrap()];
                let gn = norm(&g);
                let out_minus = g.map(|v| -v / gn);
                for a in 0..3 {
                    assert!((out_minus[a] + facet.normal[a]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn square_counts_and_size() {
        let m = build_unit_square_mesh(4).unwrap();
        assert_eq!(m.n_vertices(), 25);
        assert_eq!(m.n_cells(), 32);
        assert_eq!(m.n_facets(), 56);
        assert!((m.h() - 3.5355e-1).abs() < 1e-5);
        assert!((m.total_measure() - 1.0).abs() < 1e-12);
        check_topology(&m);
    }

    #[test]
    fn smallest_square() {
        let m = build_unit_square_mesh(1).unwrap();
        assert_eq!(m.n_cells(), 2);
        let interior = m.facets().iter().filter(|f| !f.is_boundary()).count();
        assert_eq!(interior, 1);
        assert_eq!(m.n_facets() - interior, 4);
    }

    #[test]
    fn zero_resolution_rejected() {
        assert!(build_unit_square_mesh(0).is_err());
        assert!(build_unit_cube_mesh(0).is_err());
    }

    #[test]
    fn mesh_sizes_match_reported_columns() {
        assert!((mesh_size(&build_unit_square_mesh(8).unwrap()) - 1.7678e-1).abs() < 1e-5);
        assert!((mesh_size(&build_unit_square_mesh(128).unwrap()) - 1.1049e-2).abs() < 1e-6);
        assert!((mesh_size(&build_unit_cube_mesh(10).unwrap()) - 3f64.sqrt() / 10.0).abs() < 1e-14);
        assert!((mesh_size(&build_unit_cube_mesh(5).unwrap()) - 3.4641e-1).abs() < 1e-5);
    }

    #[test]
    fn cube_counts_and_measures() {
        let m = build_unit_cube_mesh(1).unwrap();
        assert_eq!(m.n_cells(), 6);
        for c in 0..6 {
            assert!((m.cell_measure(c) - 1.0 / 6.0).abs() < 1e-15);
        }
        check_topology(&m);
        let m5 = build_unit_cube_mesh(5).unwrap();
        assert_eq!(m5.n_cells(), 750);
        assert!((m5.total_measure() - 1.0).abs() < 1e-12);
        check_topology(&build_unit_cube_mesh(3).unwrap());
    }

    #[test]
    fn build_is_deterministic() {
        let a = build_unit_cube_mesh(3).unwrap();
        let b = build_unit_cube_mesh(3).unwrap();
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.vertices, b.vertices);
        assert_eq!(a.cell_facets, b.cell_facets);
    }

    #[test]
    fn locate_prefers_lowest_index() {
        let m = build_unit_square_mesh(2).unwrap();
        // on the shared diagonal of grid cell 0
        let (c, _) = m.locate(&[0.25, 0.25]).unwrap();
        assert_eq!(c, 0);
        // on the vertical line shared by grid cells 0 and 1
        let (c, _) = m.locate(&[0.5, 0.1]).unwrap();
        assert_eq!(c, 0);
        let (c, lam) = m.locate(&[0.9, 0.8]).unwrap();
        let x = m.point_in_cell(c, &lam);
        assert!((x[0] - 0.9).abs() < 1e-14 && (x[1] - 0.8).abs() < 1e-14);
        assert!(m.locate(&[1.2, 0.5]).is_err());
    }

    #[test]
    fn locate_in_cube() {
        let m = build_unit_cube_mesh(3).unwrap();
        for &p in &[[0.1, 0.7, 0.35], [0.99, 0.01, 0.5], [1.0, 1.0, 1.0], [0.0, 0.0, 0.0]] {
            let (c, lam) = m.locate(&p).unwrap();
            let x = m.point_in_cell(c, &lam);
            for a in 0..3 {
                assert!((x[a] - p[a]).abs() < 1e-13);
            }
        }
    }
}
