//! Brute-force distance oracle: shortest paths on a structured graph over
//! the polar grid.
//!
//! Vertices sit at `(t_i, θ_j)` with `t_0 = 0` collapsed into a single pole
//! vertex. Every vertex is joined to the vertices at a set of primitive
//! lattice offsets `(Δi, Δj)`; the pole is joined to the first ring. An edge
//! is weighted by the length of the curve along which `t` and `θ` both move
//! linearly between its ends, integrated by quadrature. Graph distances are
//! therefore lengths of actual curves and never fall below the true distance.
//! Under nested refinement each coarse edge splits into two fine edges
//! tracing the same curve, so refined distances never grow.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesic::PolarPoint;
use crate::profile::ProfileModel;
use crate::quadrature;
use crate::scalar::{wrap_pi, wrap_two_pi, Real};

/// Default largest radial step of an edge, in rings.
pub const DEFAULT_RADIAL_REACH: usize = 16;
/// Default largest angular step of an edge, in θ-knots.
pub const DEFAULT_ANGULAR_REACH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Offset {
    di: i32,
    dj: i32,
}

/// Immutable graph over the polar grid of a model.
#[derive(Debug, Clone)]
pub struct RevolutionMesh<T> {
    t_knots: Vec<T>,
    n_theta: usize,
    d_theta: T,
    warps: Vec<T>,
    /// Outgoing edges of every vertex on ring `i`, shared by the ring.
    rings: Vec<Vec<Edge<T>>>,
}

#[derive(Debug, Clone, Copy)]
struct Edge<T> {
    offset: Offset,
    weight: T,
}

/// Result of a graph query.
#[derive(Debug, Clone)]
pub struct OracleDistance<T> {
    /// Graph distance between the snapped vertices.
    pub length: T,
    /// Bound on the metric distance moved by snapping both endpoints.
    pub snap_error: T,
    pub from: PolarPoint<T>,
    pub to: PolarPoint<T>,
    /// Vertices along the shortest graph path.
    pub path: Vec<PolarPoint<T>>,
    /// Heading of the graph path where it leaves `from`, measured like
    /// [`crate::geodesic::GeodesicState::launch`].
    pub phi_hint: Option<T>,
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn stencil(radial: i32, angular: i32) -> Vec<Offset> {
    let mut out = Vec::new();
    for di in -radial..=radial {
        for dj in -angular..=angular {
            if (di, dj) != (0, 0) && gcd(di, dj) == 1 {
                out.push(Offset { di, dj });
            }
        }
    }
    out
}

/// Length of the curve on which `t` runs over `[lo, hi]` while `θ` advances
/// linearly by `sweep`.
fn curve_length<T: Real>(model: &ProfileModel<T>, lo: T, hi: T, sweep: T) -> T {
    let rise = hi - lo;
    let speed = |s: T| rise.hypot(model.f(lo + s * rise) * sweep);
    quadrature::integrate(speed, T::zero(), T::one(), T::zero(), T::lit(1e-14), 64).value
}

/// Largest value of `f` on `[lo, hi]`, locating an interior maximum by
/// golden-section search when the slope changes sign.
fn max_on<T: Real>(model: &ProfileModel<T>, lo: T, hi: T) -> T {
    let (f_lo, f_hi) = (model.f(lo), model.f(hi));
    let mut best = f_lo.max(f_hi);
    if model.df(lo) > T::zero() && model.df(hi) < T::zero() {
        let g = T::lit(0.618_033_988_749_894_9);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if model.f(c) > model.f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best = best.max(model.f((a + b) / T::lit(2.0)));
    }
    best
}

impl<T: Real> RevolutionMesh<T> {
    /// Mesh with `n_t` radial knots on `[0, t_max]` (knot 0 is the pole) and
    /// `n_theta` angular knots, using the default stencil.
    pub fn build(model: &ProfileModel<T>, t_max: T, n_t: usize, n_theta: usize) -> Result<Self> {
        Self::build_with_stencil(model, t_max, n_t, n_theta, DEFAULT_RADIAL_REACH, DEFAULT_ANGULAR_REACH)
    }

    pub fn build_with_stencil(
        model: &ProfileModel<T>,
        t_max: T,
        n_t: usize,
        n_theta: usize,
        radial_reach: usize,
        angular_reach: usize,
    ) -> Result<Self> {
        if n_t < 2 || n_theta < 3 {
            return Err(Error::Precondition(format!(
                "mesh needs n_t ≥ 2 and n_θ ≥ 3, got {n_t} × {n_theta}"
            )));
        }
        if !(t_max > T::zero()) || radial_reach == 0 || angular_reach == 0 {
            return Err(Error::Precondition("mesh needs t_max > 0 and non-empty stencil reach".into()));
        }
        let dt = t_max / T::from_usize_lossy(n_t - 1);
        let t_knots: Vec<T> = (0..n_t).map(|i| T::from_usize_lossy(i) * dt).collect();
        let d_theta = T::TAU() / T::from_usize_lossy(n_theta);
        let warps: Vec<T> = t_knots.iter().map(|&t| model.f(t)).collect();
        // Near the pole a θ-step is much shorter than a t-step, so the
        // angular reach grows like dt / (t·dθ) to keep the edge directions
        // evenly spread. Reach is keyed to the outer end of each edge, which
        // keeps it refinement-invariant for nested knots.
        let half = (n_theta / 2) as i32;
        let base_reach = (angular_reach as i32).min(half).max(1);
        let reach_at = |t: T| -> i32 {
            let wide = (T::lit(radial_reach as f64 / 6.0) * dt / (t * d_theta)).ceil();
            wide.to_i32().unwrap_or(half).clamp(base_reach, half)
        };
        let radial = radial_reach.min(n_t - 1) as i32;
        let widest = stencil(radial, reach_at(t_knots[1]));
        let ring_edges = |i: usize| -> Vec<Edge<T>> {
            let mut ring = Vec::new();
            if i == 0 {
                return ring;
            }
            for &offset in &widest {
                let target = i as i64 + offset.di as i64;
                if target < 1 || target >= n_t as i64 {
                    continue;
                }
                let (lo, hi) = (i.min(target as usize), i.max(target as usize));
                if offset.dj.abs() > reach_at(t_knots[hi]) {
                    continue;
                }
                let across = T::lit(offset.dj.abs() as f64) * d_theta;
                let weight = if lo == hi {
                    warps[i] * across
                } else {
                    curve_length(model, t_knots[lo], t_knots[hi], across)
                };
                ring.push(Edge {
                    offset,
                    weight,
                });
            }
            ring
        };
        let rings: Vec<Vec<Edge<T>>> = (0..n_t).into_par_iter().map(ring_edges).collect();
        Ok(RevolutionMesh {
            t_knots,
            n_theta,
            d_theta,
            warps,
            rings,
        })
    }

    pub fn n_t(&self) -> usize {
        self.t_knots.len()
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn vertex_count(&self) -> usize {
        1 + (self.n_t() - 1) * self.n_theta
    }

    /// Number of directed edges, counting the pole's.
    pub fn edge_count(&self) -> usize {
        let per_ring: usize = self.rings.iter().map(Vec::len).sum();
        per_ring * self.n_theta + 2 * self.n_theta
    }

    pub fn t_max(&self) -> T {
        self.t_knots[self.t_knots.len() - 1]
    }

    pub fn t_knots(&self) -> &[T] {
        &self.t_knots
    }

    fn index(&self, i: usize, j: usize) -> usize {
        if i == 0 {
            0
        } else {
            1 + (i - 1) * self.n_theta + j
        }
    }

    fn ring_of(&self, v: usize) -> (usize, usize) {
        if v == 0 {
            (0, 0)
        } else {
            (1 + (v - 1) / self.n_theta, (v - 1) % self.n_theta)
        }
    }

    /// Coordinates of vertex `v`.
    pub fn vertex(&self, v: usize) -> PolarPoint<T> {
        let (i, j) = self.ring_of(v);
        PolarPoint::new(self.t_knots[i], T::from_usize_lossy(j) * self.d_theta)
    }

    /// Vertex on ring `i`, knot `j` (`i = 0` is the pole).
    pub fn vertex_at(&self, i: usize, j: usize) -> PolarPoint<T> {
        self.vertex(self.index(i, j % self.n_theta))
    }

    /// Nearest vertex and a bound on the metric distance to it.
    pub fn snap(&self, model: &ProfileModel<T>, p: &PolarPoint<T>) -> (usize, T) {
        let dt = self.t_knots[1];
        let last = self.n_t() - 1;
        let i = (p.t / dt).round().to_usize().unwrap_or(last).min(last);
        if i == 0 {
            return (0, p.t);
        }
        let j = (wrap_two_pi(p.theta) / self.d_theta).round().to_usize().unwrap_or(0) % self.n_theta;
        let v = self.index(i, j);
        let q = self.vertex(v);
        let err = (p.t - q.t).abs() + max_on(model, p.t.min(q.t), p.t.max(q.t)) * wrap_pi(p.theta - q.theta).abs();
        (v, err)
    }

    fn neighbours(&self, v: usize, mut visit: impl FnMut(usize, T)) {
        let n_theta = self.n_theta as i64;
        if v == 0 {
            for j in 0..self.n_theta {
                visit(self.index(1, j), self.t_knots[1]);
            }
            return;
        }
        let (i, j) = self.ring_of(v);
        if i == 1 {
            visit(0, self.t_knots[1]);
        }
        for edge in &self.rings[i] {
            let ti = (i as i64 + edge.offset.di as i64) as usize;
            let tj = (j as i64 + edge.offset.dj as i64).rem_euclid(n_theta) as usize;
            visit(self.index(ti, tj), edge.weight);
        }
    }

    /// Shortest graph path between the vertices nearest to `a` and `b`.
    pub fn distance(&self, model: &ProfileModel<T>, a: &PolarPoint<T>, b: &PolarPoint<T>) -> OracleDistance<T> {
        let (va, ea) = self.snap(model, a);
        let (vb, eb) = self.snap(model, b);
        let n = self.vertex_count();
        let mut dist = vec![T::infinity(); n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[va] = T::zero();
        heap.push(Entry { d: T::zero(), v: va });
        while let Some(Entry { d, v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if v == vb {
                break;
            }
            self.neighbours(v, |w, len| {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    prev[w] = v;
                    heap.push(Entry { d: nd, v: w });
                }
            });
        }
        let mut chain = vec![vb];
        while let Some(&last) = chain.last() {
            let p = prev[last];
            if p == usize::MAX {
                break;
            }
            chain.push(p);
        }
        chain.reverse();
        let path: Vec<PolarPoint<T>> = chain.iter().map(|&v| self.vertex(v)).collect();
        let phi_hint = path.get(1).map(|next| {
            let from = &path[0];
            if from.is_pole() {
                return next.theta;
            }
            let dt = next.t - from.t;
            let f = self.warps[self.ring_of(chain[0]).0];
            let dth = wrap_pi(next.theta - from.theta);
            (f * dth).atan2(dt)
        });
        OracleDistance {
            length: dist[vb],
            snap_error: ea + eb,
            from: self.vertex(va),
            to: self.vertex(vb),
            path,
            phi_hint,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry<T> {
    d: T,
    v: usize,
}

impl<T: Real> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Entry<T> {}

impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Entry<T> {
    /// Reversed so that `BinaryHeap` pops the nearest vertex first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .d
            .partial_cmp(&self.d)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.v.cmp(&self.v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ProfileModel;
    use std::f64::consts::PI;

    #[test]
    fn vertex_count_and_preconditions() {
        let m = ProfileModel::plane();
        let mesh = RevolutionMesh::build(&m, 10.0, 11, 8).unwrap();
        assert_eq!(mesh.vertex_count(), 81);
        assert!(matches!(RevolutionMesh::build(&m, 10.0, 11, 2), Err(Error::Precondition(_))));
        assert!(matches!(RevolutionMesh::build(&m, 10.0, 1, 8), Err(Error::Precondition(_))));
    }

    #[test]
    fn pole_to_vertex_is_meridian_sum() {
        let m = ProfileModel::plane();
        let mesh = RevolutionMesh::build(&m, 10.0, 101, 64).unwrap();
        let d = mesh.distance(&m, &PolarPoint::pole(), &PolarPoint::new(5.0, 2.0 * PI / 64.0 * 3.0));
        assert!((d.length - 5.0).abs() < 1e-12);
        assert!(d.snap_error < 1e-12);
    }

    #[test]
    fn plane_law_of_cosines_coarse() {
        let m = ProfileModel::plane();
        let mesh = RevolutionMesh::build(&m, 10.0, 501, 256).unwrap();
        let d = mesh.distance(&m, &PolarPoint::new(3.0, 0.0), &PolarPoint::new(4.0, PI / 2.0));
        assert!(d.snap_error < 1e-12);
        assert!(d.length >= 5.0 - 1e-12);
        assert!(d.length <= 5.0 * 1.02, "{}", d.length);
    }

    #[test]
    fn nested_refinement_never_lengthens() {
        let m = ProfileModel::sinclair();
        let coarse = RevolutionMesh::build_with_stencil(&m, 4.0, 21, 16, 6, 2).unwrap();
        let fine = RevolutionMesh::build_with_stencil(&m, 4.0, 41, 32, 6, 2).unwrap();
        for (i, j) in [(3usize, 5usize), (10, 1), (20, 9), (7, 15)] {
            for (k, l) in [(5usize, 0usize), (12, 8), (1, 3)] {
                let a = coarse.vertex_at(i, j);
                let b = coarse.vertex_at(k, l);
                let dc = coarse.distance(&m, &a, &b).length;
                let df = fine.distance(&m, &a, &b).length;
                assert!(df <= dc + 1e-12, "{dc} → {df}");
            }
        }
    }

    #[test]
    fn interior_maximum_of_warp() {
        let m = ProfileModel::sinclair();
        let peak = max_on(&m, 0.0, 2.0);
        for k in 0..=2000 {
            assert!(m.f(k as f64 * 1e-3) <= peak + 1e-15);
        }
    }

    #[test]
    fn hint_points_along_first_edge() {
        let m = ProfileModel::plane();
        let mesh = RevolutionMesh::build(&m, 4.0, 41, 64).unwrap();
        let d = mesh.distance(&m, &PolarPoint::new(1.0, 0.0), &PolarPoint::new(3.0, 0.0));
        assert_eq!(d.phi_hint, Some(0.0));
        assert!((d.length - 2.0).abs() < 1e-12);
    }
}
