//! Reverse Cuthill–McKee ordering.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::la::SparseMatrix;

/// A bijection on `0..n`; `perm[new] = old`, `inverse[old] = new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut inverse = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            if old >= n || inverse[old] != usize::MAX {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
            inverse[old] = new;
        }
        Ok(Self { perm, inverse })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// `y[new] = x[perm[new]]`.
    pub fn gather(&self, x: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&o| x[o]).collect()
    }

    /// Inverse of [`gather`](Self::gather): `x[perm[new]] = y[new]`.
    pub fn scatter(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; y.len()];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Adjacency lists of the symmetrised pattern of `a`, diagonal excluded.
pub(crate) fn symmetric_adjacency(a: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, seen: &mut [bool]) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![start]];
    seen[start] = true;
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    levels
}

/// George–Liu pseudo-peripheral node search inside the component of `start`.
fn pseudo_peripheral(adj: &[Vec<usize>], start: usize, n: usize) -> usize {
    let mut root = start;
    let mut depth = 0;
    for _ in 0..8 {
        let mut seen = vec![false; n];
        let levels = bfs_levels(adj, root, &mut seen);
        if levels.len() <= depth {
            break;
        }
        depth = levels.len();
        let last = levels.last().unwrap();
        let cand = *last.iter().min_by_key(|&&v| (adj[v].len(), v)).unwrap();
        if cand == root {
            break;
        }
        root = cand;
    }
    root
}

/// Reverse Cuthill–McKee on the symmetrised pattern; disconnected components are
/// ordered one after another. Falls back to the natural order when that has the
/// smaller or equal bandwidth.
pub fn rcm_order(a: &SparseMatrix) -> Permutation {
    let n = a.nrows();
    let adj = symmetric_adjacency(a);
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (adj[v].len(), v));
    for &seed in &by_degree {
        if placed[seed] {
            continue;
        }
        let root = pseudo_peripheral(&adj, seed, n);
        let mut queue = VecDeque::from([root]);
        placed[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            nbrs.sort_by_key(|&w| (adj[w].len(), w));
            for w in nbrs {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    let rcm = Permutation::new(order).expect("bfs visits every vertex once");
    if bandwidth_under(&adj, &rcm) < bandwidth_under(&adj, &Permutation::identity(n)) {
        rcm
    } else {
        Permutation::identity(n)
    }
}

fn bandwidth_under(adj: &[Vec<usize>], p: &Permutation) -> usize {
    let inv = p.inverse();
    adj.iter()
        .enumerate()
        .flat_map(|(v, l)| l.iter().map(move |&w| inv[v].abs_diff(inv[w])))
        .max()
        .unwrap_or(0)
}
