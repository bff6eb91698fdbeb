//! Brute-force checks shared by integration tests.

type Check<'a> = dyn FnMut(&[(f64, f64)]) -> bool + 'a;

/// Checks by enumeration that every family of at most `k` intervals with
/// endpoints at coreset positions that covers the coreset also covers all
/// positions once each interval is stretched 3x about its midpoint.
/// Restricting endpoints to coreset positions loses nothing: shrinking an
/// interval to the hull of the coreset points it holds shrinks its
/// stretched copy too.
pub fn interval_audit(positions: &[f64], coreset: &[usize], k: usize) -> bool {
    let q: Vec<f64> = coreset.iter().map(|&i| positions[i]).collect();
    let mut intervals = Vec::new();
    for &a in &q {
        for &b in &q {
            if a <= b {
                intervals.push((a, b));
            }
        }
    }
    let covers = |family: &[(f64, f64)], p: f64, stretch: f64| {
        family.iter().any(|&(a, b)| {
            let w = (b - a) * (stretch - 1.0) / 2.0;
            p >= a - w - 1e-9 && p <= b + w + 1e-9
        })
    };
    let mut family = Vec::with_capacity(k);
    fn rec(
        intervals: &[(f64, f64)],
        start: usize,
        k: usize,
        family: &mut Vec<(f64, f64)>,
        check: &mut Check,
    ) -> bool {
        if !check(family) {
            return false;
        }
        if family.len() == k {
            return true;
        }
        for i in start..intervals.len() {
            family.push(intervals[i]);
            let ok = rec(intervals, i, k, family, check);
            family.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut check = |family: &[(f64, f64)]| -> bool {
        if family.is_empty() || !q.iter().all(|&p| covers(family, p, 1.0)) {
            return true;
        }
        positions.iter().all(|&p| covers(family, p, 3.0))
    };
    rec(&intervals, 0, k, &mut family, &mut check)
}
