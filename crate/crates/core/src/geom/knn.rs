//! k-d tree over weighted points: Euclidean KNN and power-distance queries.

use super::{Aabb, Vec3};

const LEAF: usize = 8;

#[derive(Clone, Debug)]
struct KdNode {
    bbox: Aabb,
    max_w: f64,
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

/// Points with weights `w_j` (squared radii) for power distance `|x - p_j|^2 - w_j`.
#[derive(Clone, Debug)]
pub struct KdTree {
    pts: Vec<Vec3>,
    w: Vec<f64>,
    order: Vec<usize>,
    nodes: Vec<KdNode>,
}

impl KdTree {
    pub fn new(pts: &[Vec3]) -> Self {
        Self::with_weights(pts, &vec![0.0; pts.len()])
    }

    pub fn with_weights(pts: &[Vec3], w: &[f64]) -> Self {
        let mut t = Self { pts: pts.to_vec(), w: w.to_vec(), order: (0..pts.len()).collect(), nodes: Vec::new() };
        if !pts.is_empty() {
            t.build(0, pts.len());
        }
        t
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    fn build(&mut self, start: usize, end: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let bbox = Aabb::from_points(self.order[start..end].iter().map(|&i| &self.pts[i]));
        let max_w = self.order[start..end].iter().map(|&i| self.w[i]).fold(f64::NEG_INFINITY, f64::max);
        self.nodes.push(KdNode { bbox, max_w, start: start as u32, end: end as u32, left: 0, right: 0 });
        if end - start > LEAF {
            let axis = bbox.longest_axis();
            let mid = (start + end) / 2;
            let pts = &self.pts;
            self.order[start..end]
                .select_nth_unstable_by(mid - start, |&a, &b| pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b)));
            let l = self.build(start, mid);
            let r = self.build(mid, end);
            self.nodes[id as usize].left = l;
            self.nodes[id as usize].right = r;
        }
        id
    }

    fn is_leaf(n: &KdNode) -> bool {
        n.left == 0
    }

    /// The `k` nearest points to `x` (excluding `skip`), nearest first, ties by index.
    pub fn knn(&self, x: &Vec3, k: usize, skip: Option<usize>) -> Vec<usize> {
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        // Sorted (dist, index) list of the best k so far.
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let n = &self.nodes[ni as usize];
            let lb = n.bbox.distance_sq(x);
            if best.len() == k && lb > best[k - 1].0 {
                continue;
            }
            if Self::is_leaf(n) {
                for &i in &self.order[n.start as usize..n.end as usize] {
                    if Some(i) == skip {
                        continue;
                    }
                    let d = (self.pts[i] - x).norm_squared();
                    let key = (d, i);
                    if best.len() < k || key < best[k - 1] {
                        let pos = best.partition_point(|b| *b < key);
                        best.insert(pos, key);
                        best.truncate(k);
                    }
                }
            } else {
                let (l, r) = (n.left, n.right);
                let dl = self.nodes[l as usize].bbox.distance_sq(x);
                let dr = self.nodes[r as usize].bbox.distance_sq(x);
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best.into_iter().map(|(_, i)| i).collect()
    }

    /// Index minimizing the power distance `|x - p|^2 - w`, ties by index.
    pub fn power_nearest(&self, x: &Vec3) -> Option<usize> {
        let mut best = (f64::INFINITY, usize::MAX);
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let Some(n) = self.nodes.get(ni as usize) else { break };
            if n.bbox.distance_sq(x) - n.max_w > best.0 {
                continue;
            }
            if Self::is_leaf(n) {
                for &i in &self.order[n.start as usize..n.end as usize] {
                    let key = ((self.pts[i] - x).norm_squared() - self.w[i], i);
                    if key < best {
                        best = key;
                    }
                }
            } else {
                stack.push(n.right);
                stack.push(n.left);
            }
        }
        (best.1 != usize::MAX).then_some(best.1)
    }

    /// Every index `j` whose power distance can drop below `bound` somewhere in
    /// the ball `B(c, rho)`: `(max(0, |c - p_j| - rho))^2 - w_j < bound`.
    pub fn power_candidates(&self, c: &Vec3, rho: f64, bound: f64, out: &mut Vec<usize>) {
        out.clear();
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let n = &self.nodes[ni as usize];
            let gap = (n.bbox.distance_sq(c).sqrt() - rho).max(0.0);
            if gap * gap - n.max_w >= bound {
                continue;
            }
            if Self::is_leaf(n) {
                for &i in &self.order[n.start as usize..n.end as usize] {
                    let g = ((self.pts[i] - c).norm() - rho).max(0.0);
                    if g * g - self.w[i] < bound {
                        out.push(i);
                    }
                }
            } else {
                stack.push(n.right);
                stack.push(n.left);
            }
        }
        out.sort_unstable();
    }
}

/// For each point, the indices of its `k` nearest other points, ties by index.
/// With fewer than `k + 1` points every other point is returned.
pub fn knn(centers: &[Vec3], k: usize) -> Vec<Vec<usize>> {
    use rayon::prelude::*;
    let tree = KdTree::new(centers);
    let k = k.min(centers.len().saturating_sub(1));
    (0..centers.len())
        .into_par_iter()
        .map(|i| tree.knn(&centers[i], k, Some(i)))
        .collect()
}
