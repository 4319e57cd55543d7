use ndarray::ArrayView2;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features examined per split; `None` means all of them.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub depth: usize,
    pub n_samples: usize,
    pub value: f64,
    pub split: Option<Split>,
}

/// CART regression tree, variance-reduction splits. Samples go left when
/// `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            let node = &self.nodes[i];
            match node.split {
                None => return node.value,
                Some(s) => i = if row[s.feature] <= s.threshold { s.left } else { s.right },
            }
        }
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn split_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_features];
        for s in self.nodes.iter().filter_map(|n| n.split) {
            counts[s.feature] += 1;
        }
        counts
    }
}

struct Builder<'a, R> {
    x: ArrayView2<'a, f64>,
    rows: &'a [usize],
    y: &'a [f64],
    params: TreeParams,
    go_left: Vec<bool>,
    nodes: Vec<Node>,
    rng: &'a mut R,
}

impl<R: Rng> Builder<'_, R> {
    fn value(&self, pos: usize, feature: usize) -> f64 {
        self.x[[self.rows[pos], feature]]
    }

    /// Best split as `(feature, threshold)`, lowest feature then lowest
    /// threshold on exact ties.
    fn best_split(&mut self, lists: &[Vec<usize>], sum: f64, sse: f64) -> Option<(usize, f64)> {
        let m = lists.len();
        let n = lists[0].len();
        let features: Vec<usize> = match self.params.max_features {
            Some(k) if k < m => {
                let mut f = index::sample(self.rng, m, k).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..m).collect(),
        };
        let parent = sum * sum / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &features {
            let list = &lists[f];
            let mut left = 0.0;
            for i in 0..n - 1 {
                left += self.y[list[i]];
                let (a, b) = (self.value(list[i], f), self.value(list[i + 1], f));
                if a >= b {
                    continue;
                }
                let (nl, nr) = ((i + 1) as f64, (n - i - 1) as f64);
                let right = sum - left;
                let score = left * left / nl + right * right / nr;
                if best.is_none_or(|(s, _, _)| score > s) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((score, f, threshold));
                }
            }
        }
        let (score, f, t) = best?;
        (score - parent > 1e-12 * sse).then_some((f, t))
    }

    fn build(&mut self, lists: Vec<Vec<usize>>, depth: usize) -> usize {
        let n = lists[0].len();
        let sum: f64 = lists[0].iter().map(|&p| self.y[p]).sum();
        let mean = sum / n as f64;
        let sse: f64 = lists[0].iter().map(|&p| (self.y[p] - mean).powi(2)).sum();
        let id = self.nodes.len();
        self.nodes.push(Node { depth, n_samples: n, value: mean, split: None });
        if depth >= self.params.max_depth || n < self.params.min_samples_split.max(2) || sse <= 0.0 {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&lists, sum, sse) else {
            return id;
        };
        for &p in &lists[0] {
            self.go_left[p] = self.value(p, feature) <= threshold;
        }
        let (mut ll, mut rl) = (Vec::with_capacity(lists.len()), Vec::with_capacity(lists.len()));
        for list in lists {
            let (l, r): (Vec<usize>, Vec<usize>) = list.into_iter().partition(|&p| self.go_left[p]);
            ll.push(l);
            rl.push(r);
        }
        let left = self.build(ll, depth + 1);
        let right = self.build(rl, depth + 1);
        self.nodes[id].split = Some(Split { feature, threshold, left, right });
        id
    }
}

/// Fits a tree on `rows` of `x` (repeats allowed, as in a bootstrap
/// sample) against `y[rows[k]]`.
pub fn fit_tree(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    rows: &[usize],
    params: TreeParams,
    rng: &mut impl Rng,
) -> RegressionTree {
    let m = x.ncols();
    let ys: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    let mut builder = Builder { x, rows, y: &ys, params, go_left: vec![false; rows.len()], nodes: Vec::new(), rng };
    if rows.is_empty() {
        return RegressionTree { nodes: vec![Node { depth: 0, n_samples: 0, value: 0.0, split: None }], n_features: m };
    }
    let lists: Vec<Vec<usize>> = if m == 0 {
        vec![(0..rows.len()).collect()]
    } else {
        (0..m)
            .map(|f| {
                let mut l: Vec<usize> = (0..rows.len()).collect();
                l.sort_by(|&a, &b| x[[rows[a], f]].total_cmp(&x[[rows[b], f]]).then(a.cmp(&b)));
                l
            })
            .collect()
    };
    if m == 0 {
        builder.params.max_depth = 0;
    }
    builder.build(lists, 0);
    RegressionTree { nodes: builder.nodes, n_features: m }
}
