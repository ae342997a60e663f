use super::{Mesh, ReferenceSimplex};
use crate::error::{invalid, Result};
use crate::scalar::{dist2, Point2, Real};

/// Result of locating a physical point in the fixed mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLocation<T> {
    pub element: usize,
    pub reference: Point2<T>,
    /// Set when the query lay outside the domain and was projected onto it.
    pub clamped: bool,
}

/// Barycentric slack accepted when testing containment.
pub fn locate_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(64.0))
}

impl<T: Real> Mesh<T> {
    /// Finds the element containing `y`.
    ///
    /// Points shared by several elements resolve to the lowest element index.
    /// Points outside the domain are projected onto its boundary first.
    pub fn locate_point(&self, y: Point2<T>, hint: Option<usize>) -> Result<PointLocation<T>> {
        if !y[0].is_finite() || !y[1].is_finite() {
            return invalid("cannot locate a non-finite point");
        }
        let (y, clamped) = match &self.structured {
            Some(grid) if !grid.domain.contains(y) => (grid.domain.clamp(y), true),
            _ => (y, false),
        };
        let found = self
            .structured_candidate(y)
            .or_else(|| {
                hint.filter(|&h| h < self.num_elements())
                    .and_then(|h| self.walk(y, h))
            })
            .or_else(|| self.brute_force(y));
        match found {
            Some(e) => Ok(self.lowest_containing(y, e, clamped)),
            None => {
                let p = self.project_to_boundary(y);
                let e = self
                    .brute_force(p)
                    .expect("projected point lies on a boundary edge");
                Ok(self.lowest_containing(p, e, true))
            }
        }
    }

    /// Moves `y` into the closed domain when it lies outside.
    pub fn project_into_domain(&self, y: Point2<T>) -> (Point2<T>, bool) {
        if let Some(grid) = &self.structured {
            return if grid.domain.contains(y) {
                (y, false)
            } else {
                (grid.domain.clamp(y), true)
            };
        }
        if self.brute_force(y).is_some() {
            (y, false)
        } else {
            (self.project_to_boundary(y), true)
        }
    }

    fn contains(&self, e: usize, y: Point2<T>) -> Option<Point2<T>> {
        let xhat = self.affine[e].inverse(y);
        ReferenceSimplex::contains(xhat, locate_tolerance()).then_some(xhat)
    }

    fn structured_candidate(&self, y: Point2<T>) -> Option<usize> {
        let grid = self.structured.as_ref()?;
        let n = grid.n;
        let cell = |d: usize| {
            let s = (y[d] - grid.domain.lo[d]) / (grid.domain.hi[d] - grid.domain.lo[d])
                * T::from_usize_lossy(n);
            s.floor().to_f64_lossy().clamp(0.0, (n - 1) as f64) as usize
        };
        let base = 2 * (cell(1) * n + cell(0));
        (base..base + 2).find(|&e| self.contains(e, y).is_some())
    }

    fn walk(&self, y: Point2<T>, start: usize) -> Option<usize> {
        let max_steps = 4 * (self.num_elements() as f64).sqrt() as usize + 16;
        let mut e = start;
        for _ in 0..max_steps {
            let lambda = ReferenceSimplex::barycentric(self.affine[e].inverse(y));
            let (worst, &lmin) = lambda
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            if lmin >= -locate_tolerance::<T>() {
                return Some(e);
            }
            // Edge opposite vertex `worst`.
            e = self.neighbors[e][(worst + 1) % 3]?;
        }
        None
    }

    fn brute_force(&self, y: Point2<T>) -> Option<usize> {
        (0..self.num_elements()).find(|&e| self.contains(e, y).is_some())
    }

    fn lowest_containing(&self, y: Point2<T>, found: usize, clamped: bool) -> PointLocation<T> {
        let mut best = found;
        for &v in &self.elements[found] {
            for &e in &self.vertex_elements[v] {
                if e < best && self.contains(e, y).is_some() {
                    best = e;
                }
            }
        }
        PointLocation {
            element: best,
            reference: self.affine[best].inverse(y),
            clamped,
        }
    }

    fn project_to_boundary(&self, y: Point2<T>) -> Point2<T> {
        let mut best = (T::infinity(), y);
        for e in 0..self.num_elements() {
            for m in 0..3 {
                if self.neighbors[e][m].is_some() {
                    continue;
                }
                let a = self.vertices[self.elements[e][m]];
                let b = self.vertices[self.elements[e][(m + 1) % 3]];
                let ab = [b[0] - a[0], b[1] - a[1]];
                let len2 = ab[0] * ab[0] + ab[1] * ab[1];
                let s = (((y[0] - a[0]) * ab[0] + (y[1] - a[1]) * ab[1]) / len2)
                    .max(T::zero())
                    .min(T::one());
                let p = [a[0] + s * ab[0], a[1] + s * ab[1]];
                let d = dist2(p, y);
                if d < best.0 {
                    best = (d, p);
                }
            }
        }
        best.1
    }
}
