//! Sparse symmetric positive definite solves: envelope (profile) Cholesky
//! under a reverse Cuthill-McKee ordering.

use crate::scalar::Real;

/// Breadth-first levels from `start`; returns the visit order and the last level.
fn bfs(adj: &[Vec<usize>], start: usize, seen: &mut [bool], degree: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut order = vec![start];
    seen[start] = true;
    let mut level = vec![start];
    loop {
        let mut next = Vec::new();
        for &v in &level {
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|w| !seen[*w]).collect();
            nb.sort_by_key(|w| (degree[*w], *w));
            for w in nb {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (order, level);
        }
        order.extend_from_slice(&next);
        level = next;
    }
}

/// Reverse Cuthill-McKee ordering of an undirected graph; `order[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|v| (degree[*v], *v));
    for &root in &by_degree {
        if done[root] {
            continue;
        }
        // move to the far end of the component: a pseudo-peripheral start
        let mut probe = done.clone();
        let (_, last) = bfs(adj, root, &mut probe, &degree);
        let start = *last.iter().min_by_key(|v| (degree[**v], **v)).unwrap_or(&root);
        let (comp, _) = bfs(adj, start, &mut done, &degree);
        order.extend(comp);
    }
    order.reverse();
    order
}

/// `L Lᵀ` factor stored row by row from each row's first nonzero column.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky<S> {
    /// `order[new] = old`
    order: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<S>,
}

impl<S: Real> EnvelopeCholesky<S> {
    /// Factors the symmetric matrix with diagonal `diag` and off-diagonal
    /// entries `off[i] = [(j, a_ij), ...]` (both triangles listed). Returns
    /// `None` when the matrix is not positive definite.
    pub fn factor(diag: &[S], off: &[Vec<(usize, S)>]) -> Option<Self> {
        let n = diag.len();
        let adj: Vec<Vec<usize>> = off.iter().map(|r| r.iter().map(|(j, _)| *j).collect()).collect();
        let order = reverse_cuthill_mckee(&adj);
        let mut inv = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }
        let first: Vec<usize> = (0..n)
            .map(|i| off[order[i]].iter().map(|(j, _)| inv[*j]).filter(|j| *j < i).min().unwrap_or(i))
            .collect();
        let mut start = Vec::with_capacity(n + 1);
        let mut len = 0;
        for i in 0..n {
            start.push(len);
            len += i - first[i] + 1;
        }
        start.push(len);
        let mut values = vec![S::zero(); len];
        for i in 0..n {
            values[start[i] + i - first[i]] = diag[order[i]];
            for &(j, a) in &off[order[i]] {
                let j = inv[j];
                if j < i {
                    values[start[i] + j - first[i]] += a;
                }
            }
        }
        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let k0 = fi.max(fj);
                let mut s = values[si + j - fi];
                for k in k0..j {
                    s -= values[si + k - fi] * values[sj + k - fj];
                }
                values[si + j - fi] = s / values[sj + j - fj];
            }
            let a_ii = diag[order[i]];
            let mut d = values[si + i - fi];
            for k in fi..i {
                let l = values[si + k - fi];
                d -= l * l;
            }
            // a pivot lost to cancellation means a (numerically) singular matrix
            if !(d > a_ii * S::epsilon() * S::lit(1e3)) {
                return None;
            }
            values[si + i - fi] = d.sqrt();
        }
        Some(EnvelopeCholesky { order, first, start, values })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    /// Solves `A x = b`; `work` is scratch of the same length.
    pub fn solve_into(&self, b: &[S], x: &mut [S], work: &mut [S]) {
        let n = self.len();
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let mut s = b[self.order[i]];
            for k in fi..i {
                s -= self.values[si + k - fi] * work[k];
            }
            work[i] = s / self.values[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            let xi = work[i] / self.values[si + i - fi];
            work[i] = xi;
            for k in fi..i {
                work[k] -= self.values[si + k - fi] * xi;
            }
        }
        for i in 0..n {
            x[self.order[i]] = work[i];
        }
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let mut x = vec![S::zero(); b.len()];
        let mut w = vec![S::zero(); b.len()];
        self.solve_into(b, &mut x, &mut w);
        x
    }
}
