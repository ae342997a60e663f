//! Fixed simplicial partition of a planar domain: reference triangle,
//! affine element maps, quadrature and point location.

mod locate;
pub mod quadrature;

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{invalid, Error, Result};
use crate::scalar::{Point2, Real};

pub use locate::PointLocation;
pub use quadrature::{gauss_legendre_unit, simplex_quadrature, QuadratureRule, MAX_SIMPLEX_DEGREE};

/// The unit reference triangle with vertices (0,0), (1,0), (0,1).
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceSimplex;

impl ReferenceSimplex {
    pub const DIM: usize = 2;

    pub fn vertices<T: Real>() -> [Point2<T>; 3] {
        [
            [T::zero(), T::zero()],
            [T::one(), T::zero()],
            [T::zero(), T::one()],
        ]
    }

    pub fn area<T: Real>() -> T {
        T::lit(0.5)
    }

    /// Barycentric coordinates `(1 - x1 - x2, x1, x2)` of a reference point.
    #[inline]
    pub fn barycentric<T: Real>(xhat: Point2<T>) -> [T; 3] {
        [T::one() - xhat[0] - xhat[1], xhat[0], xhat[1]]
    }

    #[inline]
    pub fn contains<T: Real>(xhat: Point2<T>, tol: T) -> bool {
        Self::barycentric(xhat).iter().all(|&l| l >= -tol)
    }
}

/// Axis-aligned rectangle `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox<T> {
    pub lo: Point2<T>,
    pub hi: Point2<T>,
}

impl<T: Real> DomainBox<T> {
    pub fn new(lo: Point2<T>, hi: Point2<T>) -> Result<Self> {
        let ok = lo.iter().chain(&hi).all(|v| v.is_finite()) && hi[0] > lo[0] && hi[1] > lo[1];
        if !ok {
            return invalid("degenerate domain box");
        }
        Ok(Self { lo, hi })
    }

    /// The square `(-1, 1)^2`.
    pub fn symmetric_unit() -> Self {
        Self {
            lo: [-T::one(), -T::one()],
            hi: [T::one(), T::one()],
        }
    }

    pub fn measure(&self) -> T {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    pub fn contains(&self, y: Point2<T>) -> bool {
        (0..2).all(|d| y[d] >= self.lo[d] && y[d] <= self.hi[d])
    }

    pub fn clamp(&self, y: Point2<T>) -> Point2<T> {
        [
            y[0].max(self.lo[0]).min(self.hi[0]),
            y[1].max(self.lo[1]).min(self.hi[1]),
        ]
    }
}

/// How each grid square is split into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalSplit {
    /// Every square is cut along its lower-left to upper-right diagonal.
    #[default]
    LowerLeftUpperRight,
    /// Diagonal direction alternates in a checkerboard pattern.
    Crisscross,
}

impl std::str::FromStr for DiagonalSplit {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower-left-upper-right" | "llur" => Ok(Self::LowerLeftUpperRight),
            "crisscross" => Ok(Self::Crisscross),
            _ => invalid(format!("unknown diagonal split '{s}'")),
        }
    }
}

impl DiagonalSplit {
    fn uses_main_diagonal(self, i: usize, j: usize) -> bool {
        match self {
            DiagonalSplit::LowerLeftUpperRight => true,
            DiagonalSplit::Crisscross => (i + j).is_multiple_of(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredGrid<T> {
    pub n: usize,
    pub domain: DomainBox<T>,
    pub split: DiagonalSplit,
}

/// Affine map `x = B xhat + a` from the reference triangle onto an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap<T> {
    pub b: [[T; 2]; 2],
    pub b_inv: [[T; 2]; 2],
    pub a: Point2<T>,
    pub det: T,
}

impl<T: Real> AffineMap<T> {
    fn from_vertices(p: [Point2<T>; 3]) -> Self {
        let b = [
            [p[1][0] - p[0][0], p[2][0] - p[0][0]],
            [p[1][1] - p[0][1], p[2][1] - p[0][1]],
        ];
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        let b_inv = [
            [b[1][1] / det, -b[0][1] / det],
            [-b[1][0] / det, b[0][0] / det],
        ];
        Self {
            b,
            b_inv,
            a: p[0],
            det,
        }
    }

    #[inline]
    pub fn apply(&self, xhat: Point2<T>) -> Point2<T> {
        [
            self.b[0][0] * xhat[0] + self.b[0][1] * xhat[1] + self.a[0],
            self.b[1][0] * xhat[0] + self.b[1][1] * xhat[1] + self.a[1],
        ]
    }

    #[inline]
    pub fn inverse(&self, x: Point2<T>) -> Point2<T> {
        let d = [x[0] - self.a[0], x[1] - self.a[1]];
        [
            self.b_inv[0][0] * d[0] + self.b_inv[0][1] * d[1],
            self.b_inv[1][0] * d[0] + self.b_inv[1][1] * d[1],
        ]
    }

    /// Maps a reference gradient to a physical one: `B^{-T} g`.
    #[inline]
    pub fn push_gradient(&self, g: Point2<T>) -> Point2<T> {
        [
            self.b_inv[0][0] * g[0] + self.b_inv[1][0] * g[1],
            self.b_inv[0][1] * g[0] + self.b_inv[1][1] * g[1],
        ]
    }
}

/// Conforming triangulation with counterclockwise elements.
///
/// Local edge `m` of an element joins its vertices `m` and `(m + 1) % 3`.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    vertices: Vec<Point2<T>>,
    elements: Vec<[usize; 3]>,
    neighbors: Vec<[Option<usize>; 3]>,
    affine: Vec<AffineMap<T>>,
    vertex_elements: Vec<Vec<usize>>,
    structured: Option<StructuredGrid<T>>,
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh from raw connectivity, checking orientation and conformity.
    pub fn new(vertices: Vec<Point2<T>>, elements: Vec<[usize; 3]>) -> Result<Self> {
        if elements.is_empty() {
            return invalid("mesh has no elements");
        }
        let nv = vertices.len();
        if vertices
            .iter()
            .any(|v| !v[0].is_finite() || !v[1].is_finite())
        {
            return invalid("non-finite vertex coordinate");
        }
        let mut affine = Vec::with_capacity(elements.len());
        for (e, tri) in elements.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return invalid(format!("element {e} references a missing vertex"));
            }
            let map =
                AffineMap::from_vertices([vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]]);
            if !(map.det > T::zero()) {
                return invalid(format!("element {e} is degenerate or clockwise"));
            }
            affine.push(map);
        }

        let mut edge_owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut neighbors = vec![[None; 3]; elements.len()];
        for (e, tri) in elements.iter().enumerate() {
            for m in 0..3 {
                let (a, b) = (tri[m], tri[(m + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match edge_owner.get(&key) {
                    None => {
                        edge_owner.insert(key, (e, m));
                    }
                    Some(&(other, om)) => {
                        if neighbors[other][om].is_some() {
                            return invalid(format!(
                                "edge {key:?} shared by more than two elements"
                            ));
                        }
                        neighbors[other][om] = Some(e);
                        neighbors[e][m] = Some(other);
                    }
                }
            }
        }

        let mut vertex_elements = vec![Vec::new(); nv];
        for (e, tri) in elements.iter().enumerate() {
            for &v in tri {
                vertex_elements[v].push(e);
            }
        }

        Ok(Self {
            vertices,
            elements,
            neighbors,
            affine,
            vertex_elements,
            structured: None,
        })
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_vertices(&self, e: usize) -> [Point2<T>; 3] {
        let t = self.elements[e];
        [
            self.vertices[t[0]],
            self.vertices[t[1]],
            self.vertices[t[2]],
        ]
    }

    pub fn affine(&self, e: usize) -> &AffineMap<T> {
        &self.affine[e]
    }

    pub fn neighbor(&self, e: usize, local_edge: usize) -> Option<usize> {
        self.neighbors[e][local_edge]
    }

    pub fn is_boundary_edge(&self, e: usize, local_edge: usize) -> bool {
        self.neighbors[e][local_edge].is_none()
    }

    pub fn vertex_elements(&self, v: usize) -> &[usize] {
        &self.vertex_elements[v]
    }

    pub fn structured(&self) -> Option<&StructuredGrid<T>> {
        self.structured.as_ref()
    }

    pub fn element_area(&self, e: usize) -> T {
        self.affine[e].det * T::lit(0.5)
    }

    pub fn measure(&self) -> T {
        (0..self.num_elements()).map(|e| self.element_area(e)).sum()
    }

    /// Longest edge length over the mesh.
    pub fn max_edge_length(&self) -> T {
        let mut h = T::zero();
        for e in 0..self.num_elements() {
            let p = self.element_vertices(e);
            for m in 0..3 {
                h = h.max(crate::scalar::dist2(p[m], p[(m + 1) % 3]).sqrt());
            }
        }
        h
    }

    pub fn map_to_physical(&self, e: usize, xhat: Point2<T>) -> Result<Point2<T>> {
        self.check_element(e)?;
        Ok(self.affine[e].apply(xhat))
    }

    pub fn map_to_reference(&self, e: usize, x: Point2<T>) -> Result<Point2<T>> {
        self.check_element(e)?;
        Ok(self.affine[e].inverse(x))
    }

    fn check_element(&self, e: usize) -> Result<()> {
        if e >= self.elements.len() {
            return invalid(format!("element index {e} out of range"));
        }
        Ok(())
    }

    /// Writes `2 nv ne`, the vertex coordinates and the 0-based element triples.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "2 {} {}", self.num_vertices(), self.num_elements())?;
        for v in &self.vertices {
            writeln!(w, "{:.16e} {:.16e}", v[0], v[1])?;
        }
        for t in &self.elements {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut tokens = Vec::new();
        for line in r.lines() {
            let line = line?;
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        let mut next = |what: &str| {
            it.next()
                .ok_or_else(|| Error::Parse(format!("missing {what}")))
        };
        let parse_usize = |s: String| {
            s.parse::<usize>()
                .map_err(|e| Error::Parse(format!("{s}: {e}")))
        };
        let d = parse_usize(next("dimension")?)?;
        if d != 2 {
            return Err(Error::Parse(format!("unsupported dimension {d}")));
        }
        let nv = parse_usize(next("vertex count")?)?;
        let ne = parse_usize(next("element count")?)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let mut p = [T::zero(); 2];
            for c in &mut p {
                let s = next("coordinate")?;
                let v: f64 = s.parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
                *c = T::lit(v);
            }
            vertices.push(p);
        }
        let mut elements = Vec::with_capacity(ne);
        for _ in 0..ne {
            let mut t = [0usize; 3];
            for c in &mut t {
                *c = parse_usize(next("element index")?)?;
            }
            elements.push(t);
        }
        Mesh::new(vertices, elements)
    }
}

/// Uniform triangulation of a box with `n` segments per edge: `(n+1)^2`
/// vertices (row-major from `lo`) and `2 n^2` triangles, two per square.
pub fn build_uniform_square_mesh<T: Real>(
    domain: DomainBox<T>,
    n: usize,
    split: DiagonalSplit,
) -> Result<Mesh<T>> {
    if n == 0 {
        return invalid("mesh needs at least one segment per edge");
    }
    DomainBox::new(domain.lo, domain.hi)?;
    let nf = T::from_usize_lossy(n);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let s = T::from_usize_lossy(i) / nf;
            let r = T::from_usize_lossy(j) / nf;
            let x = if i == n {
                domain.hi[0]
            } else {
                domain.lo[0] + s * (domain.hi[0] - domain.lo[0])
            };
            let y = if j == n {
                domain.hi[1]
            } else {
                domain.lo[1] + r * (domain.hi[1] - domain.lo[1])
            };
            vertices.push([x, y]);
        }
    }
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            if split.uses_main_diagonal(i, j) {
                elements.push([v00, v10, v11]);
                elements.push([v00, v11, v01]);
            } else {
                elements.push([v00, v10, v01]);
                elements.push([v10, v11, v01]);
            }
        }
    }
    let mut mesh = Mesh::new(vertices, elements)?;
    mesh.structured = Some(StructuredGrid { n, domain, split });
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> Mesh<f64> {
        build_uniform_square_mesh(DomainBox::symmetric_unit(), n, DiagonalSplit::default()).unwrap()
    }

    #[test]
    fn counts_and_area() {
        let m = square(1);
        assert_eq!((m.num_elements(), m.num_vertices()), (2, 4));
        assert!((m.measure() - 4.0).abs() < 1e-15);
        let m = square(2);
        assert_eq!((m.num_elements(), m.num_vertices()), (8, 9));
        let m = square(64);
        assert_eq!(m.num_elements(), 8192);
        // Summation oracle: Kahan-compensated sum of shoelace areas.
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for e in 0..m.num_elements() {
            let p = m.element_vertices(e);
            let a = 0.5
                * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                    - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
            assert!(a > 0.0);
            let y = a - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        assert!((s - 4.0).abs() < 4e-12);
        assert!((m.measure() - 4.0).abs() < 4e-12);
    }

    #[test]
    fn zero_segments_rejected() {
        assert!(build_uniform_square_mesh::<f64>(
            DomainBox::symmetric_unit(),
            0,
            DiagonalSplit::default()
        )
        .is_err());
    }

    #[test]
    fn interior_edges_shared_twice() {
        for split in [
            DiagonalSplit::LowerLeftUpperRight,
            DiagonalSplit::Crisscross,
        ] {
            let n = 5;
            let m =
                build_uniform_square_mesh::<f64>(DomainBox::symmetric_unit(), n, split).unwrap();
            let boundary: usize = (0..m.num_elements())
                .map(|e| (0..3).filter(|&k| m.is_boundary_edge(e, k)).count())
                .sum();
            assert_eq!(boundary, 4 * n);
            for e in 0..m.num_elements() {
                for k in 0..3 {
                    if let Some(o) = m.neighbor(e, k) {
                        assert!((0..3).any(|j| m.neighbor(o, j) == Some(e)));
                    }
                }
            }
        }
    }

    #[test]
    fn affine_maps() {
        let m = square(3);
        for e in 0..m.num_elements() {
            let p = m.element_vertices(e);
            for (v, xhat) in ReferenceSimplex::vertices::<f64>().iter().enumerate() {
                let x = m.map_to_physical(e, *xhat).unwrap();
                assert!((x[0] - p[v][0]).abs() < 1e-15 && (x[1] - p[v][1]).abs() < 1e-15);
            }
            let c = m.map_to_physical(e, [1.0 / 3.0, 1.0 / 3.0]).unwrap();
            let mean = [
                (p[0][0] + p[1][0] + p[2][0]) / 3.0,
                (p[0][1] + p[1][1] + p[2][1]) / 3.0,
            ];
            assert!((c[0] - mean[0]).abs() < 1e-14 && (c[1] - mean[1]).abs() < 1e-14);
            let x = m.map_to_physical(e, [0.2, 0.3]).unwrap();
            let back = m.map_to_reference(e, x).unwrap();
            assert!((back[0] - 0.2).abs() < 1e-13 && (back[1] - 0.3).abs() < 1e-13);
        }
        assert!(m.map_to_physical(m.num_elements(), [0.0, 0.0]).is_err());
    }

    #[test]
    fn rejects_clockwise_and_nonconforming() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(Mesh::new(v.clone(), vec![[0, 2, 1]]).is_err());
        let v4 = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, -1.0]];
        // Edge (0,1) claimed by three triangles.
        let bad = vec![[0, 1, 2], [1, 0, 4], [0, 1, 3]];
        assert!(Mesh::new(v4, bad).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let m = build_uniform_square_mesh::<f64>(
            DomainBox::symmetric_unit(),
            3,
            DiagonalSplit::Crisscross,
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2 16 18\n"));
        let back = Mesh::<f64>::read_text(&buf[..]).unwrap();
        assert_eq!(back.elements(), m.elements());
        for (a, b) in back.vertices().iter().zip(m.vertices()) {
            assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        }
        assert!(Mesh::<f64>::read_text(&b"2 3"[..]).is_err());
    }
}
