//! kd-tree with step-capped depth-first search.
//!
//! Every node visit, leaves included, costs one step. A search that reaches
//! its deadline stops and returns what it has found so far.

use std::cmp::Ordering;

use super::cloud::{squared_distance, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Inner {
        dim: usize,
        split: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdTree {
    points: Vec<Point>,
    nodes: Vec<Node>,
    /// Point indices in leaf order.
    perm: Vec<usize>,
    leaf_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// `(point index, squared distance)`, nearest first, ties by index.
    pub neighbors: Vec<(usize, f64)>,
    pub steps_used: usize,
    pub truncated: bool,
}

impl SearchResult {
    pub fn indices(&self) -> Vec<usize> {
        self.neighbors.iter().map(|&(i, _)| i).collect()
    }
}

fn by_distance(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

impl KdTree {
    pub const ROOT: usize = 0;

    /// Median split on the axis of widest extent; ties in coordinate are
    /// ordered by point index.
    pub fn build(points: &[Point], leaf_size: usize) -> Self {
        assert!(!points.is_empty(), "kd-tree needs at least one point");
        assert!(leaf_size >= 1, "leaf size must be >= 1");
        let mut tree = Self {
            points: points.to_vec(),
            nodes: Vec::new(),
            perm: (0..points.len()).collect(),
            leaf_size,
        };
        tree.build_node(0, points.len());
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= self.leaf_size {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        self.nodes.push(Node::Leaf { start, end });
        let slice = &mut self.perm[start..end];
        let pts = &self.points;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in slice.iter() {
            for d in 0..3 {
                lo[d] = lo[d].min(pts[i][d]);
                hi[d] = hi[d].max(pts[i][d]);
            }
        }
        let dim = (0..3).fold(0, |best, d| {
            if hi[d] - lo[d] > hi[best] - lo[best] {
                d
            } else {
                best
            }
        });
        slice.sort_unstable_by(|&a, &b| pts[a][dim].total_cmp(&pts[b][dim]).then(a.cmp(&b)));
        let mid = start + (end - start) / 2;
        let split = pts[self.perm[mid]][dim];
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Inner {
            dim,
            split,
            left,
            right,
        };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_points(&self, start: usize, end: usize) -> &[usize] {
        &self.perm[start..end]
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn depth(&self) -> usize {
        fn go(t: &KdTree, n: usize) -> usize {
            match t.nodes[n] {
                Node::Leaf { .. } => 0,
                Node::Inner { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, Self::ROOT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Goal {
    Nearest(usize),
    Within(f64),
}

/// Resumable depth-first search; one call to [`Traversal::visit`] is one
/// step.
#[derive(Debug, Clone)]
pub struct Traversal<'t> {
    tree: &'t KdTree,
    query: Point,
    goal: Goal,
    /// Pending nodes with a lower bound on their squared distance.
    stack: Vec<(usize, f64)>,
    found: Vec<(usize, f64)>,
    steps: usize,
}

impl<'t> Traversal<'t> {
    pub fn nearest(tree: &'t KdTree, query: Point, k: usize) -> Self {
        assert!(k >= 1, "k must be >= 1");
        Self::new(tree, query, Goal::Nearest(k))
    }

    pub fn within(tree: &'t KdTree, query: Point, radius: f64) -> Self {
        assert!(radius > 0.0, "radius must be > 0");
        Self::new(tree, query, Goal::Within(radius * radius))
    }

    fn new(tree: &'t KdTree, query: Point, goal: Goal) -> Self {
        Self {
            tree,
            query,
            goal,
            stack: vec![(KdTree::ROOT, 0.0)],
            found: Vec::new(),
            steps: 0,
        }
    }

    fn bound(&self) -> f64 {
        match self.goal {
            Goal::Nearest(k) if self.found.len() == k => self.found[k - 1].1,
            Goal::Nearest(_) => f64::INFINITY,
            Goal::Within(r2) => r2,
        }
    }

    /// Next node worth visiting; pruned nodes are dropped for free.
    pub fn peek(&mut self) -> Option<usize> {
        while let Some(&(node, lower)) = self.stack.last() {
            if lower > self.bound() {
                self.stack.pop();
            } else {
                return Some(node);
            }
        }
        None
    }

    /// Visits the node returned by [`peek`](Self::peek), calling `seen` for
    /// every point the visit examines.
    pub fn visit(&mut self, mut seen: impl FnMut(usize)) {
        let (node, lower) = self.stack.pop().expect("visit follows a successful peek");
        self.steps += 1;
        match self.tree.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.tree.perm[start..end] {
                    seen(i);
                    let d = squared_distance(&self.tree.points[i], &self.query);
                    self.offer((i, d));
                }
            }
            Node::Inner {
                dim,
                split,
                left,
                right,
            } => {
                let diff = self.query[dim] - split;
                let (near, far) = if diff <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.stack.push((far, lower.max(diff * diff)));
                self.stack.push((near, lower));
            }
        }
    }

    /// Drops the node returned by [`peek`](Self::peek) and its subtree, at
    /// the cost of one step.
    pub fn skip(&mut self) {
        self.stack.pop().expect("skip follows a successful peek");
        self.steps += 1;
    }

    fn offer(&mut self, cand: (usize, f64)) {
        match self.goal {
            Goal::Within(r2) => {
                if cand.1 <= r2 {
                    self.found.push(cand);
                }
            }
            Goal::Nearest(k) => {
                if self.found.len() == k && by_distance(&cand, &self.found[k - 1]) != Ordering::Less
                {
                    return;
                }
                let at = self
                    .found
                    .partition_point(|f| by_distance(f, &cand) == Ordering::Less);
                self.found.insert(at, cand);
                self.found.truncate(k);
            }
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Runs until done or until `deadline` steps have been spent.
    pub fn run(&mut self, deadline: Option<usize>, mut seen: impl FnMut(usize)) -> bool {
        while self.peek().is_some() {
            if deadline.is_some_and(|d| self.steps >= d) {
                return true;
            }
            self.visit(&mut seen);
        }
        false
    }

    pub fn finish(mut self, truncated: bool) -> SearchResult {
        self.found.sort_by(by_distance);
        SearchResult {
            neighbors: self.found,
            steps_used: self.steps,
            truncated,
        }
    }
}

/// k nearest neighbours; exact when `deadline` is `None`. Asking for more
/// neighbours than points returns every point.
pub fn knn_search(tree: &KdTree, query: Point, k: usize, deadline: Option<usize>) -> SearchResult {
    knn_search_visiting(tree, query, k, deadline, |_| {})
}

/// [`knn_search`] reporting every point the traversal examines.
pub fn knn_search_visiting(
    tree: &KdTree,
    query: Point,
    k: usize,
    deadline: Option<usize>,
    seen: impl FnMut(usize),
) -> SearchResult {
    assert!(deadline != Some(0), "deadline must be >= 1");
    let mut t = Traversal::nearest(tree, query, k);
    let truncated = t.run(deadline, seen);
    t.finish(truncated)
}

/// Points within `radius` (inclusive) of `query`.
pub fn range_search(
    tree: &KdTree,
    query: Point,
    radius: f64,
    deadline: Option<usize>,
) -> SearchResult {
    assert!(deadline != Some(0), "deadline must be >= 1");
    let mut t = Traversal::within(tree, query, radius);
    let truncated = t.run(deadline, |_| {});
    t.finish(truncated)
}

pub fn brute_force_knn(points: &[Point], query: Point, k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, squared_distance(p, &query)))
        .collect();
    all.sort_by(by_distance);
    all.truncate(k);
    all
}

pub fn brute_force_range(points: &[Point], query: Point, radius: f64) -> Vec<(usize, f64)> {
    let r2 = radius * radius;
    let mut hits: Vec<(usize, f64)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, squared_distance(p, &query)))
        .filter(|&(_, d)| d <= r2)
        .collect();
    hits.sort_by(by_distance);
    hits
}

/// Fraction of the true `k` nearest neighbours present in `found`.
pub fn recall(found: &[(usize, f64)], truth: &[(usize, f64)]) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let hits = truth
        .iter()
        .filter(|t| found.iter().any(|f| f.0 == t.0))
        .count();
    hits as f64 / truth.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::cloud::PointCloud;

    /// Eight points in four well separated pairs along x; leaf size 2 gives a
    /// root, two inner nodes and four leaves.
    fn eight() -> KdTree {
        let xs = [0.0, 1.0, 10.0, 11.0, 20.0, 21.0, 30.0, 31.0];
        let pts: Vec<Point> = xs.iter().map(|&x| [x, 0.0, 0.0]).collect();
        KdTree::build(&pts, 2)
    }

    #[test]
    fn single_point_is_a_leaf() {
        let t = KdTree::build(&[[1.0, 2.0, 3.0]], 4);
        assert_eq!(t.nodes().len(), 1);
        let r = knn_search(&t, [0.0; 3], 3, None);
        assert_eq!(r.indices(), vec![0]);
        assert_eq!(r.steps_used, 1);
    }

    #[test]
    fn duplicates_build_and_search() {
        let pts = vec![[0.5; 3]; 40];
        let t = KdTree::build(&pts, 4);
        let r = knn_search(&t, [0.5; 3], 5, None);
        assert_eq!(r.indices(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn short_and_long_traversals_under_deadline() {
        let t = eight();
        assert_eq!(t.nodes().len(), 7);
        // Next to the first pair: root, inner, leaf.
        let q0 = knn_search(&t, [0.4, 0.0, 0.0], 2, Some(5));
        assert_eq!((q0.steps_used, q0.truncated), (3, false));
        assert_eq!(q0.indices(), vec![0, 1]);
        // Far off the line: no subtree can be pruned.
        let far = [15.5, 100.0, 0.0];
        assert_eq!(knn_search(&t, far, 2, None).steps_used, 7);
        let q1 = knn_search(&t, far, 2, Some(5));
        assert_eq!((q1.steps_used, q1.truncated), (5, true));
    }

    #[test]
    fn exact_point_query() {
        let c = PointCloud::synthetic(500, 3).unwrap();
        let t = KdTree::build(c.points(), 8);
        let r = knn_search(&t, c.point(123), 1, None);
        assert_eq!(r.neighbors, vec![(123, 0.0)]);
        let r = range_search(&t, c.point(123), 1e-12, None);
        assert_eq!(r.indices(), vec![123]);
    }

    #[test]
    fn matches_brute_force() {
        let c = PointCloud::synthetic(2000, 4).unwrap();
        let t = KdTree::build(c.points(), 16);
        let queries = PointCloud::synthetic(50, 5).unwrap();
        for &q in queries.points() {
            for k in [1, 8, 32] {
                assert_eq!(
                    knn_search(&t, q, k, None).neighbors,
                    brute_force_knn(c.points(), q, k)
                );
            }
            assert_eq!(
                range_search(&t, q, 0.1, None).neighbors,
                brute_force_range(c.points(), q, 0.1)
            );
        }
        let all = range_search(&t, [0.5; 3], 2.0, None);
        assert_eq!(all.neighbors.len(), 2000);
    }

    #[test]
    fn k_beyond_count_returns_all() {
        let t = eight();
        assert_eq!(knn_search(&t, [0.0; 3], 100, None).neighbors.len(), 8);
    }
}
