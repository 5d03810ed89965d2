//! Exact nearest-neighbor search over a point cloud.
//!
//! A kd-tree with median splits on the widest axis of each node's bounding
//! box. Queries are exact and break distance ties by the lowest point index,
//! so results match a brute-force scan bit for bit.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::cloud::{squared_distance, Point3, PointCloud};
use crate::error::{Error, Result};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable nearest-neighbor index over the points of one cloud.
#[derive(Debug, Clone)]
pub struct SpatialIndex<'a> {
    points: &'a [Point3],
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// Result of a nearest-neighbor query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub squared_distance: f64,
}

impl Neighbor {
    /// Orders by distance, then by point index.
    fn precedes(&self, other: &Neighbor) -> bool {
        match self.squared_distance.total_cmp(&other.squared_distance) {
            Ordering::Less => true,
            Ordering::Equal => self.index < other.index,
            Ordering::Greater => false,
        }
    }
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.squared_distance
            .total_cmp(&other.squared_distance)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> SpatialIndex<'a> {
    pub fn build(cloud: &'a PointCloud) -> Self {
        Self::from_points(cloud.points())
    }

    /// Builds over a raw point slice. Construction is deterministic for a
    /// given input order.
    pub fn from_points(points: &'a [Point3]) -> Self {
        let mut index = Self {
            points,
            order: (0..points.len()).collect(),
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
        };
        if !points.is_empty() {
            index.build_node(0, points.len());
        }
        index
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &'a [Point3] {
        self.points
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        if end - start <= LEAF_SIZE {
            return id;
        }

        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            let p = &self.points[i];
            for axis in 0..3 {
                lo[axis] = lo[axis].min(p[axis]);
                hi[axis] = hi[axis].max(p[axis]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .unwrap_or(0);
        if hi[axis] - lo[axis] <= 0.0 {
            // every point in this node coincides
            return id;
        }

        let mid = start + (end - start) / 2;
        let points = self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
        });
        let value = points[self.order[mid]][axis];

        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Exact nearest neighbor of `query`; ties go to the lowest point index.
    pub fn nearest(&self, query: &Point3) -> Result<Neighbor> {
        if !query.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFiniteQuery);
        }
        if self.points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut best = Neighbor {
            index: usize::MAX,
            squared_distance: f64::INFINITY,
        };
        self.search_nearest(0, query, &mut best);
        Ok(best)
    }

    fn search_nearest(&self, node: usize, query: &Point3, best: &mut Neighbor) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let candidate = Neighbor {
                        index: i,
                        squared_distance: squared_distance(query, &self.points[i]),
                    };
                    if candidate.precedes(best) {
                        *best = candidate;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search_nearest(near, query, best);
                // equality still visits: a tie may carry a lower index
                if diff * diff <= best.squared_distance {
                    self.search_nearest(far, query, best);
                }
            }
        }
    }

    /// The `k` nearest points to `query`, ascending by (distance, index),
    /// optionally skipping one point index (the query point itself).
    pub fn nearest_k(
        &self,
        query: &Point3,
        k: usize,
        exclude: Option<usize>,
    ) -> Result<Vec<Neighbor>> {
        if !query.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFiniteQuery);
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        if k > 0 && !self.points.is_empty() {
            self.search_k(0, query, k, exclude, &mut heap);
        }
        Ok(heap.into_sorted_vec())
    }

    fn search_k(
        &self,
        node: usize,
        query: &Point3,
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Neighbor>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let candidate = Neighbor {
                        index: i,
                        squared_distance: squared_distance(query, &self.points[i]),
                    };
                    if heap.len() < k {
                        heap.push(candidate);
                    } else if heap.peek().is_some_and(|worst| candidate < *worst) {
                        heap.pop();
                        heap.push(candidate);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search_k(near, query, k, exclude, heap);
                let bound = if heap.len() < k {
                    f64::INFINITY
                } else {
                    heap.peek().map_or(f64::INFINITY, |n| n.squared_distance)
                };
                if diff * diff <= bound {
                    self.search_k(far, query, k, exclude, heap);
                }
            }
        }
    }
}
