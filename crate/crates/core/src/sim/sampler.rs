//! Prefix-sum tree over integer weights, used to draw exposed posts in
//! logarithmic time.

#[derive(Debug, Clone, Default)]
pub(crate) struct WeightTree {
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
}

impl WeightTree {
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn push(&mut self, weight: u64) {
        let i = self.weights.len() + 1;
        let low = i & i.wrapping_neg();
        // Node i covers (i - low, i]; everything except the new weight is
        // already stored.
        let node = weight + self.prefix(i - 1) - self.prefix(i - low);
        self.tree.push(node);
        self.weights.push(weight);
        self.total += weight;
    }

    pub fn set(&mut self, i: usize, weight: u64) {
        let old = self.weights[i];
        if old == weight {
            return;
        }
        self.weights[i] = weight;
        self.total = self.total - old + weight;
        let mut j = i + 1;
        while j <= self.tree.len() {
            self.tree[j - 1] = self.tree[j - 1] - old + weight;
            j += j & j.wrapping_neg();
        }
    }

    /// Sum of the first `n` weights.
    fn prefix(&self, n: usize) -> u64 {
        let mut sum = 0;
        let mut j = n;
        while j > 0 {
            sum += self.tree[j - 1];
            j &= j - 1;
        }
        sum
    }

    /// Index `i` with `prefix(i) <= target < prefix(i + 1)`. Requires
    /// `target < total`.
    pub fn find(&self, target: u64) -> usize {
        debug_assert!(target < self.total);
        let mut pos = 0;
        let mut rem = target;
        let mut step = self.tree.len().next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.tree.len() && self.tree[next - 1] <= rem {
                pos = next;
                rem -= self.tree[next - 1];
            }
            step >>= 1;
        }
        pos
    }
}
