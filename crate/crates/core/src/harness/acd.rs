//! Accuracy of community detection: the share of vertices on which a
//! colouring agrees with the ground truth under the best colour-to-community
//! bijection.

use crate::colouring::Colouring;

/// `m[c][j]` = number of vertices with colour `c` in community `j`.
pub fn confusion_matrix(communities: &Colouring, sigma: &Colouring, k: usize) -> Vec<Vec<usize>> {
    assert_eq!(communities.n(), sigma.n());
    let mut m = vec![vec![0usize; k]; k];
    for (c, j) in sigma.as_slice().iter().zip(communities.as_slice()) {
        m[c.index()][j.index()] += 1;
    }
    m
}

pub fn acd(communities: &Colouring, sigma: &Colouring, k: usize) -> f64 {
    let n = sigma.n();
    if n == 0 {
        return 0.0;
    }
    let m = confusion_matrix(communities, sigma, k);
    let weights: Vec<Vec<i64>> = m
        .iter()
        .map(|row| row.iter().map(|&x| x as i64).collect())
        .collect();
    let assignment = max_weight_assignment(&weights);
    let matched: usize = assignment.iter().enumerate().map(|(c, &j)| m[c][j]).sum();
    matched as f64 / n as f64
}

/// Maximum-weight perfect matching on a square matrix (Hungarian method,
/// O(k³)). Returns `col[row]`.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> Vec<usize> {
    let k = weights.len();
    if k == 0 {
        return Vec::new();
    }
    let max = weights.iter().flatten().copied().max().unwrap_or(0);
    // Minimise cost = max - weight. 1-based potentials with a virtual
    // column 0.
    let cost = |i: usize, j: usize| max - weights[i - 1][j - 1];
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut row_of = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = vec![0usize; k];
    for j in 1..=k {
        col[row_of[j] - 1] = j - 1;
    }
    col
}
