//! Exact partitioning by dynamic programming over subsets.

/// Minimum of `sum_parts part_cost[part]` over partitions of all `n`
/// points into at most `k` parts. `part_cost` is indexed by bitmask.
/// Returns the total and the parts (as masks).
pub fn best_partition(n: usize, k: usize, part_cost: &[f64]) -> (f64, Vec<u32>) {
    let full = (1u32 << n) - 1;
    let size = 1usize << n;
    // best[j][mask]: optimum for `mask` with at most j parts.
    let mut best = vec![vec![f64::INFINITY; size]; k + 1];
    let mut choice = vec![vec![0u32; size]; k + 1];
    for row in best.iter_mut() {
        row[0] = 0.0;
    }
    for j in 1..=k {
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let mut value = best[j - 1][mask as usize];
            let mut pick = 0;
            // Enumerate parts containing the lowest point.
            let mut sub = rest;
            loop {
                let part = sub | low;
                let v = part_cost[part as usize] + best[j - 1][(mask ^ part) as usize];
                if v < value {
                    value = v;
                    pick = part;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            best[j][mask as usize] = value;
            choice[j][mask as usize] = pick;
        }
    }
    let mut parts = Vec::new();
    let mut mask = full;
    let mut j = k;
    while mask != 0 {
        let pick = choice[j][mask as usize];
        if pick != 0 {
            parts.push(pick);
            mask ^= pick;
        }
        j -= 1;
    }
    (best[k][full as usize], parts)
}

pub fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_pairs() {
        // Points 0,1,4,5 on a line; part cost = sum of squared deviations.
        let pos = [0.0, 1.0, 4.0, 5.0];
        let cost: Vec<f64> = (0..16u32)
            .map(|m| {
                let idx = members(m);
                if idx.is_empty() {
                    return 0.0;
                }
                let mean = idx.iter().map(|&i| pos[i]).sum::<f64>() / idx.len() as f64;
                idx.iter().map(|&i| (pos[i] - mean).powi(2)).sum()
            })
            .collect();
        let (v, mut parts) = best_partition(4, 2, &cost);
        parts.sort_unstable();
        assert_eq!(v, 1.0);
        assert_eq!(parts, vec![0b0011, 0b1100]);
        let (v1, p1) = best_partition(4, 1, &cost);
        assert_eq!(p1, vec![0b1111]);
        assert_eq!(v1, cost[15]);
    }
}
