//! Linear sum assignment by the Hungarian method (shortest augmenting paths
//! with row/column potentials), O(n^3).

use crate::cmath::RMat;

/// Assignment minimizing `sum_i cost[i][perm[i]]`.
pub fn solve_lsap_min(cost: &RMat) -> Vec<usize> {
    let n = cost.rows();
    assert_eq!(n, cost.cols(), "cost matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    // 1-based potentials; column 0 is a virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let i0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[owner[j] - 1] = j - 1;
    }
    perm
}

/// Assignment maximizing `sum_i cost[i][perm[i]]`, i.e. `trace(cost^T S)`.
pub fn solve_lsap_max(cost: &RMat) -> Vec<usize> {
    let neg = RMat::from_fn(cost.rows(), cost.cols(), |i, j| -cost.get(i, j));
    solve_lsap_min(&neg)
}

/// `sum_i cost[i][perm[i]]`, summed in row order.
pub fn assignment_value(cost: &RMat, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum()
}
