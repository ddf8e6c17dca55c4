//! Lloyd's k-means on unit vectors with k-means++ seeding. Centroids are
//! projected back onto the unit sphere after every update.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoding::normalize_l2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances after each assignment pass.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansResult {
    pub fn inertia(&self) -> f64 {
        self.inertia_history.last().copied().unwrap_or(0.0)
    }
}

pub fn kmeans(rows: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::Config("k-means needs k ≥ 1".into()));
    }
    if rows.is_empty() {
        return Err(Error::Empty("k-means input"));
    }
    if k > rows.len() {
        return Err(Error::Config(format!(
            "k = {k} exceeds the number of rows ({})",
            rows.len()
        )));
    }
    let dim = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: r.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(rows, k, &mut rng);
    let mut assignments = vec![usize::MAX; rows.len()];
    let mut inertia_history = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iters.max(1) {
        iterations += 1;
        let mut changed = false;
        let mut inertia = 0.0;
        for (row, slot) in rows.iter().zip(assignments.iter_mut()) {
            let (best, d) = nearest(&centroids, row);
            inertia += d;
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        inertia_history.push(inertia);
        if !changed {
            break;
        }
        // update: normalized member mean; empty or degenerate clusters keep their centroid
        let mut sums = vec![vec![0.0; dim]; k];
        for (row, &a) in rows.iter().zip(&assignments) {
            for (s, v) in sums[a].iter_mut().zip(row) {
                *s += v;
            }
        }
        for (c, s) in centroids.iter_mut().zip(sums) {
            if let Ok(unit) = normalize_l2(&s) {
                *c = unit;
            }
        }
    }

    Ok(KMeansResult {
        centroids,
        assignments,
        inertia_history,
        iterations,
    })
}

/// Index and squared distance of the nearest centroid; ties go to the lowest index.
pub fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.random_range(0..rows.len())];
    let mut dist: Vec<f64> = rows
        .iter()
        .map(|r| squared_distance(r, &rows[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = dist.iter().rposition(|&d| d > 0.0).unwrap_or(0);
            for (i, &d) in dist.iter().enumerate() {
                if u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            // all remaining rows coincide with a chosen centroid
            (0..rows.len()).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (d, r) in dist.iter_mut().zip(rows) {
            *d = d.min(squared_distance(r, &rows[next]));
        }
    }
    chosen.into_iter().map(|i| rows[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: &[f64]) -> Vec<f64> {
        normalize_l2(v).unwrap()
    }

    #[test]
    fn k_equals_rows_gives_zero_inertia() {
        let rows = vec![unit(&[1.0, 0.0]), unit(&[0.0, 1.0]), unit(&[1.0, 1.0])];
        let r = kmeans(&rows, 3, 9, 50).unwrap();
        assert!(r.inertia() < 1e-24);
        let mut sorted = r.assignments.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn two_separated_pairs() {
        let rows = vec![
            unit(&[1.0, 0.05]),
            unit(&[1.0, 0.0]),
            unit(&[0.0, 1.0]),
            unit(&[0.05, 1.0]),
        ];
        // Brute force over all 2-partitions: the optimum groups {0,1} and {2,3}.
        let mut best = (f64::INFINITY, 0u32);
        for mask in 1u32..15 {
            let mut cost = 0.0;
            for side in [true, false] {
                let members: Vec<&Vec<f64>> = rows
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| ((mask >> i) & 1 == 1) == side)
                    .map(|(_, r)| r)
                    .collect();
                let mut mean = vec![0.0; 2];
                for m in &members {
                    mean[0] += m[0];
                    mean[1] += m[1];
                }
                let c = unit(&mean);
                cost += members.iter().map(|m| squared_distance(m, &c)).sum::<f64>();
            }
            if cost < best.0 {
                best = (cost, mask);
            }
        }
        assert!(best.1 == 0b0011 || best.1 == 0b1100);

        let r = kmeans(&rows, 2, 1, 100).unwrap();
        assert_eq!(r.assignments[0], r.assignments[1]);
        assert_eq!(r.assignments[2], r.assignments[3]);
        assert_ne!(r.assignments[0], r.assignments[2]);
        let c01 = &r.centroids[r.assignments[0]];
        let expect = unit(&[rows[0][0] + rows[1][0], rows[0][1] + rows[1][1]]);
        assert!(squared_distance(c01, &expect) < 1e-24);
        assert!((r.inertia() - best.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                unit(&[
                    1.0 + (i as f64 * 0.37).sin(),
                    1.0 + (i as f64 * 0.91).cos(),
                    0.3,
                ])
            })
            .collect();
        let a = kmeans(&rows, 5, 42, 100).unwrap();
        let b = kmeans(&rows, 5, 42, 100).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        let rows = vec![unit(&[1.0, 0.0])];
        assert!(kmeans(&rows, 0, 0, 10).is_err());
        assert!(kmeans(&rows, 2, 0, 10).is_err());
        assert!(kmeans(&[], 1, 0, 10).is_err());
    }

    #[test]
    fn tie_breaks_to_lowest_index() {
        let cents = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(nearest(&cents, &unit(&[1.0, 1.0])).0, 0);
    }
}
