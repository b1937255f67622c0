//! Barnes–Hut quadtree for the regularized Biot–Savart sum.
//!
//! Each node stores the complex moments `a_k = Σ Γ_j (z_j − z_c)^k`, `k = 0..=P`, about
//! its square's center `z_c`. Far from the node the complex velocity `u − i v` is
//!
//! ```text
//! 1/(2πi) · Σ_k a_k / (z − z_c)^(k+1)
//! ```
//!
//! which holds for any mix of signs up to a truncation error of order
//! `(r/|z − z_c|)^(P+1)`, with `r` the node's half-diagonal. `a_0` alone is the
//! monopole; the higher moments carry the dipole and beyond, which dominate in wakes
//! whose net circulation nearly cancels. A node is accepted for target `z` when
//!
//! ```text
//! width / |z − z_c| < theta_open,   r < |z − z_c| / 2,   |z − z_c| − r > 4·σ_max
//! ```
//!
//! The middle condition bounds the series ratio by 1/2 for any `theta_open`; the last
//! keeps every member core at least four radii from the target, where the Gaussian core
//! factor differs from one by less than `exp(−16)`. Otherwise the node is opened, and
//! leaves are summed directly. `theta_open = 0` accepts nothing and reproduces direct
//! summation. There are no translation operators: each target walks the tree.

use std::f64::consts::TAU;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::vec2::Vec2;
use crate::vortex2d::kernel::{CompensatedSum, PointVortex};

/// Maximum subdivision depth; deeper clusters stay in one leaf.
pub const MAX_DEPTH: u32 = 32;

/// Highest moment kept in each node expansion.
pub const EXPANSION_ORDER: usize = 6;

/// Required clearance between a target and a node's members, in member core radii.
pub const CORE_CLEARANCE: f64 = 4.0;

const MOMENTS: usize = EXPANSION_ORDER + 1;

const ZERO: Complex<f64> = Complex::new(0.0, 0.0);

fn complex(p: Vec2) -> Complex<f64> {
    Complex::new(p.x, p.y)
}

/// Velocity from a complex potential derivative `s = 2πi · (u − i v)`.
fn velocity(s: Complex<f64>) -> Vec2 {
    Vec2::new(s.im, s.re) / TAU
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub center: Vec2,
    /// Half the side length of the node square.
    pub half_width: f64,
    pub depth: u32,
    pub total_gamma: f64,
    pub abs_gamma: f64,
    /// |Γ|-weighted centroid (plain centroid when all members have zero circulation).
    pub centroid: Vec2,
    /// Largest core radius among the members.
    pub max_core_radius: f64,
    /// Indices into the tree's node list; empty for leaves.
    pub children: Vec<u32>,
    /// Range into the tree's member order.
    pub start: u32,
    pub end: u32,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (p.x - self.center.x).abs() <= self.half_width && (p.y - self.center.y).abs() <= self.half_width
    }

    fn half_diagonal(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.half_width
    }
}

/// Compact copy of what a tree walk reads per node.
#[derive(Clone, Copy, Debug)]
struct WalkNode {
    center: Vec2,
    width_sq: f64,
    /// `(2r)²`: closer targets would see a series ratio above 1/2.
    series_sq: f64,
    /// `(r + 4·σ_max)²`.
    clear_sq: f64,
    children: [u32; 4],
    child_count: u32,
    start: u32,
    end: u32,
}

#[derive(Clone, Debug)]
pub struct VortexTree {
    nodes: Vec<TreeNode>,
    walk_nodes: Vec<WalkNode>,
    /// `MOMENTS` expansion coefficients per node, in node order.
    moments: Vec<Complex<f64>>,
    /// Original vortex indices, grouped so each node owns a contiguous range.
    order: Vec<u32>,
    /// Vortices copied in `order` for locality.
    sorted: Vec<PointVortex>,
    leaf_capacity: usize,
}

impl VortexTree {
    /// Build a quadtree with at most `leaf_capacity` vortices per leaf, except where
    /// [`MAX_DEPTH`] or coincident positions stop subdivision.
    pub fn build(vortices: &[PointVortex], leaf_capacity: usize) -> Result<Self> {
        let mut tree = Self::build_structure(vortices, leaf_capacity)?;
        tree.compute_moments();
        Ok(tree)
    }

    fn build_structure(vortices: &[PointVortex], leaf_capacity: usize) -> Result<Self> {
        if leaf_capacity == 0 {
            return Err(Error::Argument("leaf_capacity must be at least 1".into()));
        }
        let mut tree = VortexTree {
            nodes: Vec::new(),
            walk_nodes: Vec::new(),
            moments: Vec::new(),
            order: (0..vortices.len() as u32).collect(),
            sorted: Vec::new(),
            leaf_capacity,
        };
        if vortices.is_empty() {
            return Ok(tree);
        }
        let (mut lo, mut hi) = (vortices[0].position, vortices[0].position);
        for v in vortices {
            lo.x = lo.x.min(v.position.x);
            lo.y = lo.y.min(v.position.y);
            hi.x = hi.x.max(v.position.x);
            hi.y = hi.y.max(v.position.y);
        }
        let center = (lo + hi) * 0.5;
        let extent = (hi.x - lo.x).max(hi.y - lo.y);
        // pad so boundary points fall strictly inside
        let half_width = if extent > 0.0 {
            0.5 * extent * (1.0 + 1e-9)
        } else {
            f64::MIN_POSITIVE.max(center.x.abs().max(center.y.abs()) * 1e-12)
        };
        let mut scratch = Vec::with_capacity(vortices.len());
        tree.subdivide(vortices, center, half_width, 0, 0, vortices.len(), &mut scratch);
        tree.sorted = tree.order.iter().map(|&i| vortices[i as usize]).collect();
        Ok(tree)
    }

    fn compute_moments(&mut self) {
        self.walk_nodes = self
            .nodes
            .iter()
            .map(|n| {
                let r = n.half_diagonal();
                let mut children = [0; 4];
                children[..n.children.len()].copy_from_slice(&n.children);
                WalkNode {
                    center: n.center,
                    width_sq: n.width() * n.width(),
                    series_sq: 4.0 * r * r,
                    clear_sq: (r + CORE_CLEARANCE * n.max_core_radius).powi(2),
                    children,
                    child_count: n.children.len() as u32,
                    start: n.start,
                    end: n.end,
                }
            })
            .collect();
        self.moments = vec![ZERO; self.nodes.len() * MOMENTS];
        for (id, node) in self.nodes.iter().enumerate() {
            let zc = complex(node.center);
            let a = &mut self.moments[id * MOMENTS..(id + 1) * MOMENTS];
            for v in &self.sorted[node.start as usize..node.end as usize] {
                let zeta = complex(v.position) - zc;
                let mut term = Complex::new(v.gamma, 0.0);
                for coeff in a.iter_mut() {
                    *coeff += term;
                    term *= zeta;
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn subdivide(
        &mut self,
        vortices: &[PointVortex],
        center: Vec2,
        half_width: f64,
        depth: u32,
        start: usize,
        end: usize,
        scratch: &mut Vec<u32>,
    ) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(TreeNode {
            center,
            half_width,
            depth,
            total_gamma: 0.0,
            abs_gamma: 0.0,
            centroid: center,
            max_core_radius: 0.0,
            children: Vec::new(),
            start: start as u32,
            end: end as u32,
        });

        let members = &self.order[start..end];
        let first = vortices[members[0] as usize].position;
        let coincident = members.iter().all(|&i| vortices[i as usize].position == first);
        let split = end - start > self.leaf_capacity && depth < MAX_DEPTH && !coincident;

        if !split {
            let (mut total, mut abs, mut weighted, mut plain, mut core) = (0.0, 0.0, Vec2::ZERO, Vec2::ZERO, 0.0f64);
            for &i in &self.order[start..end] {
                let v = &vortices[i as usize];
                total += v.gamma;
                abs += v.gamma.abs();
                weighted += v.position * v.gamma.abs();
                plain += v.position;
                core = core.max(v.core_radius);
            }
            let node = &mut self.nodes[id as usize];
            node.total_gamma = total;
            node.abs_gamma = abs;
            node.centroid = if abs > 0.0 { weighted / abs } else { plain / (end - start) as f64 };
            node.max_core_radius = core;
            return id;
        }

        // stable bucket sort into quadrants: SW, SE, NW, NE
        let quadrant = |p: Vec2| (p.x >= center.x) as usize + 2 * ((p.y >= center.y) as usize);
        scratch.clear();
        let mut bounds = [start; 5];
        for q in 0..4 {
            bounds[q] = start + scratch.len();
            scratch.extend(
                self.order[start..end]
                    .iter()
                    .copied()
                    .filter(|&i| quadrant(vortices[i as usize].position) == q),
            );
        }
        bounds[4] = end;
        self.order[start..end].copy_from_slice(scratch);

        let child_half = 0.5 * half_width;
        let mut children = Vec::with_capacity(4);
        for q in 0..4 {
            let (s, e) = (bounds[q], bounds[q + 1]);
            if s == e {
                continue;
            }
            let offset = Vec2::new(
                if q & 1 == 1 { child_half } else { -child_half },
                if q & 2 == 2 { child_half } else { -child_half },
            );
            let child = self.subdivide(vortices, center + offset, child_half, depth + 1, s, e, scratch);
            children.push(child);
        }

        let (mut total, mut abs, mut weighted, mut plain, mut core) = (0.0, 0.0, Vec2::ZERO, Vec2::ZERO, 0.0f64);
        for &c in &children {
            let n = &self.nodes[c as usize];
            total += n.total_gamma;
            abs += n.abs_gamma;
            weighted += n.centroid * n.abs_gamma;
            plain += n.centroid * n.len() as f64;
            core = core.max(n.max_core_radius);
        }
        let node = &mut self.nodes[id as usize];
        node.total_gamma = total;
        node.abs_gamma = abs;
        node.centroid = if abs > 0.0 { weighted / abs } else { plain / (end - start) as f64 };
        node.max_core_radius = core;
        node.children = children;
        id
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> Option<&TreeNode> {
        self.nodes.first()
    }

    /// Expansion coefficients `a_0..=a_P` of node `id`.
    pub fn moments(&self, id: usize) -> &[Complex<f64>] {
        &self.moments[id * MOMENTS..(id + 1) * MOMENTS]
    }

    /// Original indices of the vortices owned by `node`.
    pub fn members(&self, node: &TreeNode) -> &[u32] {
        &self.order[node.start as usize..node.end as usize]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Velocity induced at `point` by all vortices in the tree.
    pub fn eval(&self, point: Vec2, theta_open: f64) -> Vec2 {
        if self.nodes.is_empty() {
            return Vec2::ZERO;
        }
        self.walk(point, theta_open, &mut Vec::with_capacity(64))
    }

    /// Velocities at many targets. Targets are visited in quadtree order so consecutive
    /// walks touch the same nodes; results come back in input order.
    pub fn eval_many(&self, points: &[Vec2], theta_open: f64) -> Vec<Vec2> {
        let mut out = vec![Vec2::ZERO; points.len()];
        if self.nodes.is_empty() || points.is_empty() {
            return out;
        }
        let dummies: Vec<PointVortex> = points.iter().map(|&p| PointVortex::new(p, 0.0, 1.0)).collect();
        let visit = Self::build_structure(&dummies, self.leaf_capacity).expect("capacity checked at build");
        let mut stack = Vec::with_capacity(64);
        for &i in &visit.order {
            out[i as usize] = self.walk(points[i as usize], theta_open, &mut stack);
        }
        out
    }

    fn walk(&self, point: Vec2, theta_open: f64, stack: &mut Vec<u32>) -> Vec2 {
        let theta_sq = theta_open * theta_open;
        let mut u = CompensatedSum::default();
        stack.clear();
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.walk_nodes[id as usize];
            let d2 = (point - node.center).norm_sq();
            let accept = theta_open > 0.0
                && node.end - node.start > 1
                && node.width_sq < theta_sq * d2
                && node.series_sq < d2
                && node.clear_sq < d2;
            if accept {
                u.add(self.far_field(id as usize, point));
            } else if node.child_count == 0 {
                for v in &self.sorted[node.start as usize..node.end as usize] {
                    u.add(v.velocity_at(point));
                }
            } else {
                // reversed so children are visited in quadrant order
                stack.extend(node.children[..node.child_count as usize].iter().rev());
            }
        }
        u.total()
    }

    /// Truncated expansion of node `id` evaluated at `point`.
    fn far_field(&self, id: usize, point: Vec2) -> Vec2 {
        let q = complex(point - self.walk_nodes[id].center).inv();
        let a = self.moments(id);
        let mut s = a[EXPANSION_ORDER];
        for coeff in a[..EXPANSION_ORDER].iter().rev() {
            s = s * q + coeff;
        }
        velocity(s * q)
    }
}
