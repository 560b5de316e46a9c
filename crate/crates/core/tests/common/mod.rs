#![allow(dead_code)]

use bdris::RMat;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// Maximum of `sum_i cost[i][p[i]]` over every permutation.
pub fn brute_force_max(cost: &RMat) -> f64 {
    permutations(cost.rows())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}
