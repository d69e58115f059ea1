//! Binary sum tree over leaf weights with O(log n) update and prefix-sum
//! retrieval. Backs proportional prioritized sampling.

/// Array-backed complete binary tree: internal nodes in `0..capacity-1`,
/// leaves in `capacity-1..2*capacity-1`. Works for any capacity >= 1.
#[derive(Debug, Clone)]
pub struct SumTree {
    capacity: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "sum tree needs at least one leaf");
        Self { capacity, nodes: vec![0.0; 2 * capacity - 1] }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Sum of every leaf weight, maintained incrementally at the root.
    pub fn total(&self) -> f64 {
        self.nodes[0]
    }

    /// Independent linear recomputation of the total; test oracle for the
    /// incrementally maintained root.
    pub fn leaf_sum(&self) -> f64 {
        self.nodes[self.capacity - 1..].iter().sum()
    }

    pub fn get(&self, leaf: usize) -> f64 {
        self.nodes[self.capacity - 1 + leaf]
    }

    /// Sets one leaf weight and propagates the difference to the root.
    pub fn set(&mut self, leaf: usize, weight: f64) {
        assert!(weight >= 0.0, "leaf weights must be non-negative");
        let mut idx = self.capacity - 1 + leaf;
        let delta = weight - self.nodes[idx];
        self.nodes[idx] = weight;
        while idx > 0 {
            idx = (idx - 1) / 2;
            self.nodes[idx] += delta;
        }
    }

    /// Finds the leaf whose cumulative weight interval contains `prefix`.
    /// `prefix` is clamped into [0, total); zero-weight subtrees are never
    /// entered, so rounding noise at interval edges cannot select an empty
    /// leaf.
    pub fn find(&self, prefix: f64) -> usize {
        let mut s = prefix.clamp(0.0, self.total());
        let mut idx = 0usize;
        loop {
            let left = 2 * idx + 1;
            if left >= self.nodes.len() {
                return idx - (self.capacity - 1);
            }
            let right = left + 1;
            if s < self.nodes[left] || self.nodes[right] <= 0.0 {
                idx = left;
            } else {
                s -= self.nodes[left];
                idx = right;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn root_tracks_leaf_updates() {
        let mut t = SumTree::new(5);
        for (i, w) in [1.0, 2.0, 3.0, 4.0, 5.0].iter().enumerate() {
            t.set(i, *w);
        }
        assert_relative_eq!(t.total(), 15.0, max_relative = 1e-12);
        t.set(2, 0.5);
        assert_relative_eq!(t.total(), 12.5, max_relative = 1e-12);
        assert_eq!(t.get(2), 0.5);
    }

    #[test]
    fn find_maps_prefix_sums_to_leaves() {
        let mut t = SumTree::new(4);
        for (i, w) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            t.set(i, *w);
        }
        assert_eq!(t.find(0.0), 0);
        assert_eq!(t.find(0.99), 0);
        assert_eq!(t.find(1.0), 1);
        assert_eq!(t.find(2.99), 1);
        assert_eq!(t.find(3.0), 2);
        assert_eq!(t.find(5.99), 2);
        assert_eq!(t.find(6.0), 3);
        assert_eq!(t.find(9.99), 3);
    }

    #[test]
    fn find_skips_zero_weight_leaves() {
        let mut t = SumTree::new(6);
        t.set(1, 2.0);
        t.set(4, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let leaf = t.find(rng.gen::<f64>() * t.total());
            assert!(leaf == 1 || leaf == 4);
        }
    }

    #[test]
    fn root_equals_leaf_sum_after_mixed_operations() {
        let mut t = SumTree::new(513); // odd size: exercises the non-power-of-two layout
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let leaf = rng.gen_range(0..513);
            t.set(leaf, rng.gen::<f64>() * 10.0);
            if rng.gen_bool(0.25) {
                t.set(rng.gen_range(0..513), 0.0);
            }
        }
        assert_relative_eq!(t.total(), t.leaf_sum(), max_relative = 1e-9);
    }
}
