use alloc::vec;
use alloc::vec::Vec;

/// One agglomeration step. Labels `0..n` are the input points; the merge at
/// step `t` creates label `n + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    /// Ward linkage distance, on the same scale as the input coordinates.
    pub cost: f64,
    pub size: usize,
}

/// Ward agglomerative clustering through the Lance-Williams recurrence.
///
/// Ties on cost go to the pair with the smallest `(left, right)` labels.
pub fn ward_cluster(points: &[Vec<f64>]) -> Vec<Merge> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut d = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let mut label: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);

    for t in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in ((i + 1)..n).filter(|&j| active[j]) {
                let (lo, hi) = if label[i] < label[j] { (label[i], label[j]) } else { (label[j], label[i]) };
                let cand = (d[i * n + j], lo, hi, i, j);
                let better = match best {
                    None => true,
                    Some(b) => cand.0 < b.0 || (cand.0 == b.0 && (lo, hi) < (b.1, b.2)),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let (dij, lo, hi, i, j) = best.expect("two active clusters remain");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in (0..n).filter(|&k| active[k] && k != i && k != j) {
            let nk = size[k] as f64;
            let v = ((ni + nk) * d[k * n + i] + (nj + nk) * d[k * n + j] - nk * dij) / (ni + nj + nk);
            d[k * n + i] = v;
            d[i * n + k] = v;
        }
        active[j] = false;
        size[i] += size[j];
        label[i] = n + t;
        merges.push(Merge { left: lo, right: hi, cost: libm::sqrt(dij.max(0.0)), size: size[i] });
    }
    merges
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    /// Textbook Ward: merge the pair whose union increases the total
    /// within-cluster sum of squares the least, computed from centroids.
    fn reference(points: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
        let n = points.len();
        let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
        let centroid = |m: &[usize]| -> Vec<f64> {
            let dim = points[0].len();
            (0..dim).map(|a| m.iter().map(|&i| points[i][a]).sum::<f64>() / m.len() as f64).collect()
        };
        let mut out = Vec::new();
        for t in 0..n - 1 {
            let mut best = (f64::INFINITY, 0, 0);
            for a in 0..clusters.len() {
                for b in (a + 1)..clusters.len() {
                    let (ca, cb) = (centroid(&clusters[a].1), centroid(&clusters[b].1));
                    let (na, nb) = (clusters[a].1.len() as f64, clusters[b].1.len() as f64);
                    let gap: f64 = ca.iter().zip(&cb).map(|(x, y)| (x - y) * (x - y)).sum();
                    let delta = na * nb / (na + nb) * gap;
                    if delta < best.0 {
                        best = (delta, a, b);
                    }
                }
            }
            let (delta, a, b) = best;
            let (la, lb) = (clusters[a].0, clusters[b].0);
            let mut members = clusters[a].1.clone();
            members.extend(&clusters[b].1);
            clusters.remove(b);
            clusters.remove(a);
            clusters.push((n + t, members));
            out.push((la.min(lb), la.max(lb), (2.0 * delta).sqrt()));
        }
        out
    }

    #[test]
    fn three_points_on_a_line() {
        let m = ward_cluster(&[vec![0.0], vec![1.0], vec![10.0]]);
        assert_eq!((m[0].left, m[0].right, m[0].size), (0, 1, 2));
        assert!((m[0].cost - 1.0).abs() < 1e-12);
        assert_eq!((m[1].left, m[1].right, m[1].size), (2, 3, 3));
        assert!((m[1].cost - (361.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matches_centroid_reference_on_random_points() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..8).map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
            let got = ward_cluster(&pts);
            let want = reference(&pts);
            for (g, w) in got.iter().zip(&want) {
                assert_eq!((g.left, g.right), (w.0, w.1));
                assert!((g.cost - w.2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ties_prefer_smallest_labels() {
        // Four corners of a unit square: every side ties.
        let m = ward_cluster(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!((m[0].left, m[0].right), (0, 1));
        assert_eq!((m[1].left, m[1].right), (2, 3));
        assert_eq!((m[2].left, m[2].right), (4, 5));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(ward_cluster(&[]).is_empty());
        assert!(ward_cluster(&[vec![1.0]]).is_empty());
        let m = ward_cluster(&[vec![0.0], vec![0.0], vec![0.0]]);
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].size, 3);
    }
}
