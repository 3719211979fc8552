//! Bounding volume hierarchy over items given by their boxes.

use super::{Aabb, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
pub struct Node {
    pub bbox: Aabb,
    /// Largest per-item radius below this node (0 when built without radii).
    pub max_radius: f64,
    start: u32,
    count: u32,
    right: u32,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

#[derive(Clone, Debug, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
    boxes: Vec<Aabb>,
}

impl Bvh {
    pub fn build(boxes: &[Aabb]) -> Self {
        Self::build_with_radius(boxes, &vec![0.0; boxes.len()])
    }

    /// Build with a per-item radius bound, exposed as [`Node::max_radius`].
    pub fn build_with_radius(boxes: &[Aabb], radius: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..boxes.len()).collect();
        let centers: Vec<Vec3> = boxes.iter().map(|b| b.center()).collect();
        let mut nodes = Vec::with_capacity(2 * boxes.len() / LEAF_SIZE + 1);
        if !boxes.is_empty() {
            build_rec(&mut nodes, &mut order, 0, boxes.len(), boxes, radius, &centers);
        }
        Self { nodes, order, boxes: boxes.to_vec() }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Best-first search for the item minimizing `eval`. `bound` must return a
    /// lower bound of `eval` over every item below a node. Ties keep the lowest
    /// item index.
    pub fn nearest_by<B, F>(&self, bound: B, mut eval: F) -> Option<(usize, f64)>
    where
        B: Fn(&Node) -> f64,
        F: FnMut(usize) -> f64,
    {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        let mut stack: Vec<(u32, f64)> = vec![(0, bound(&self.nodes[0]))];
        while let Some((ni, lb)) = stack.pop() {
            if lb > best.1 {
                continue;
            }
            let node = &self.nodes[ni as usize];
            if node.is_leaf() {
                for &item in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    let d = eval(item);
                    if d < best.1 || (d == best.1 && item < best.0) {
                        best = (item, d);
                    }
                }
            } else {
                let (l, r) = (ni + 1, node.right);
                let bl = bound(&self.nodes[l as usize]);
                let br = bound(&self.nodes[r as usize]);
                // Push the farther child first so the nearer one pops next.
                if bl <= br {
                    stack.push((r, br));
                    stack.push((l, bl));
                } else {
                    stack.push((l, bl));
                    stack.push((r, br));
                }
            }
        }
        (best.0 != usize::MAX).then_some(best)
    }

    /// Closest item to `p` under an exact squared-distance callback.
    pub fn nearest(&self, p: &Vec3, dist_sq: impl FnMut(usize) -> f64) -> Option<(usize, f64)> {
        self.nearest_by(|n| n.bbox.distance_sq(p), dist_sq)
    }

    /// Visit every item whose box intersects `query`.
    pub fn visit_overlapping(&self, query: &Aabb, mut visit: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if disjoint(&node.bbox, query) {
                continue;
            }
            if node.is_leaf() {
                for &item in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    if !disjoint(&self.boxes[item], query) {
                        visit(item);
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(ni + 1);
            }
        }
    }
}

fn disjoint(a: &Aabb, b: &Aabb) -> bool {
    (0..3).any(|k| a.min[k] > b.max[k] || a.max[k] < b.min[k])
}

fn build_rec(
    nodes: &mut Vec<Node>,
    order: &mut [usize],
    start: usize,
    end: usize,
    boxes: &[Aabb],
    radius: &[f64],
    centers: &[Vec3],
) -> u32 {
    let idx = nodes.len() as u32;
    let mut bbox = Aabb::empty();
    let mut cbox = Aabb::empty();
    let mut max_radius: f64 = 0.0;
    for &i in &order[start..end] {
        bbox = bbox.merge(&boxes[i]);
        cbox.grow(&centers[i]);
        max_radius = max_radius.max(radius[i]);
    }
    nodes.push(Node { bbox, max_radius, start: start as u32, count: 0, right: 0 });
    if end - start <= LEAF_SIZE {
        nodes[idx as usize].count = (end - start) as u32;
        return idx;
    }
    let axis = cbox.longest_axis();
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centers[a][axis].total_cmp(&centers[b][axis]).then(a.cmp(&b))
    });
    build_rec(nodes, order, start, mid, boxes, radius, centers);
    let right = build_rec(nodes, order, mid, end, boxes, radius, centers);
    nodes[idx as usize].right = right;
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nearest_point_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Vec3> = (0..500).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen())).collect();
        let boxes: Vec<Aabb> = pts.iter().map(|p| Aabb { min: *p, max: *p }).collect();
        let bvh = Bvh::build(&boxes);
        for _ in 0..200 {
            let q = Vec3::new(rng.gen(), rng.gen(), rng.gen());
            let (i, d) = bvh.nearest(&q, |i| (pts[i] - q).norm_squared()).unwrap();
            let (j, e) = pts
                .iter()
                .enumerate()
                .map(|(j, p)| (j, (p - q).norm_squared()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert_eq!(i, j);
            assert_eq!(d, e);
        }
    }

    #[test]
    fn overlap_visits_all_hits() {
        let boxes: Vec<Aabb> = (0..100)
            .map(|i| {
                let p = Vec3::new(i as f64, 0.0, 0.0);
                Aabb { min: p, max: p + Vec3::repeat(0.5) }
            })
            .collect();
        let bvh = Bvh::build(&boxes);
        let mut hit = Vec::new();
        bvh.visit_overlapping(&Aabb { min: Vec3::new(10.2, 0.0, 0.0), max: Vec3::new(13.1, 1.0, 1.0) }, |i| hit.push(i));
        hit.sort_unstable();
        assert_eq!(hit, vec![10, 11, 12, 13]);
    }
}
