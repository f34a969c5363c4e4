use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::numeric::{Matrix, RngStream};

/// Centre of class `k` among `num_classes`: spaced on a circle in the first
/// two coordinates (or along the axis when `dim == 1`).
pub(crate) fn blob_mean(k: usize, num_classes: usize, dim: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    let radius = (2.0 * num_classes as f64 / PI).max(4.0);
    if dim == 1 {
        mean[0] = radius * k as f64;
    } else {
        let angle = 2.0 * PI * k as f64 / num_classes as f64;
        mean[0] = radius * angle.cos();
        mean[1] = radius * angle.sin();
    }
    mean
}

/// Isotropic Gaussian clusters, one per class, rows grouped by class.
pub fn gen_blobs(
    n_per_class: usize,
    num_classes: usize,
    dim: usize,
    spread: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if n_per_class == 0 || dim == 0 {
        return Err(invalid("blobs need positive n_per_class and dim"));
    }
    if num_classes < 2 {
        return Err(invalid("blobs need at least 2 classes"));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(invalid(format!("spread must be positive, got {spread}")));
    }
    let n = n_per_class * num_classes;
    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for k in 0..num_classes {
        let mean = blob_mean(k, num_classes, dim);
        for _ in 0..n_per_class {
            data.extend(mean.iter().map(|m| m + spread * rng.standard_normal()));
            labels.push(k);
        }
    }
    Dataset::new(Matrix::new(n, dim, data)?, labels, num_classes)
}

/// Two interleaved half circles. Class 0 is the upper unit arc centred at
/// the origin, class 1 the lower unit arc centred at `(1, 0.5)`. Angles are
/// uniform on `[0, π]`; `noise` is the std-dev of added Gaussian jitter.
pub fn gen_two_moons(n: usize, noise: f64, rng: &mut RngStream) -> Result<Dataset> {
    if n < 2 {
        return Err(invalid(format!("two moons need n >= 2, got {n}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(invalid(format!("noise must be non-negative, got {noise}")));
    }
    let n_outer = n.div_ceil(2);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let t = PI * rng.uniform();
        let (label, x, y) = if i < n_outer {
            (0, t.cos(), t.sin())
        } else {
            (1, 1.0 - t.cos(), 0.5 - t.sin())
        };
        let (dx, dy) = if noise > 0.0 {
            (noise * rng.standard_normal(), noise * rng.standard_normal())
        } else {
            (0.0, 0.0)
        };
        data.push(x + dx);
        data.push(y + dy);
        labels.push(label);
    }
    Dataset::new(Matrix::new(n, 2, data)?, labels, 2)
}

/// Keeps `floor(count / ratio)` uniformly chosen rows of every minority
/// class. Surviving rows keep their original relative order.
pub fn make_imbalanced(
    d: &Dataset,
    minority_classes: &BTreeSet<usize>,
    ratio: usize,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if ratio == 0 {
        return Err(invalid("imbalance ratio must be >= 1"));
    }
    if let Some(&c) = minority_classes.iter().find(|&&c| c >= d.num_classes()) {
        return Err(invalid(format!("minority class {c} outside [0, {})", d.num_classes())));
    }
    let mut keep = vec![true; d.len()];
    for &class in minority_classes {
        let mut members: Vec<usize> = (0..d.len()).filter(|&i| d.labels()[i] == class).collect();
        let retained = members.len() / ratio;
        if retained == 0 {
            return Err(invalid(format!(
                "class {class} has {} samples, fewer than ratio {ratio}",
                members.len()
            )));
        }
        rng.shuffle(&mut members);
        for &i in &members[retained..] {
            keep[i] = false;
        }
    }
    let rows: Vec<usize> = (0..d.len()).filter(|&i| keep[i]).collect();
    d.subset(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Purpose;

    fn rng(seed: u64) -> RngStream {
        RngStream::new(seed, Purpose::DataGen)
    }

    #[test]
    fn blobs_are_balanced() {
        let d = gen_blobs(10, 2, 2, 0.1, &mut rng(0)).unwrap();
        assert_eq!(d.len(), 20);
        assert_eq!(d.class_counts(), vec![10, 10]);
    }

    #[test]
    fn vanishing_spread_collapses_to_means() {
        let d = gen_blobs(5, 3, 3, 1e-300, &mut rng(1)).unwrap();
        for (row, &l) in d.features().iter_rows().zip(d.labels()) {
            let mean = blob_mean(l, 3, 3);
            for (a, b) in row.iter().zip(&mean) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blobs_are_separable_by_nearest_neighbour() {
        let train = gen_blobs(500, 4, 2, 1.0, &mut rng(2)).unwrap();
        let test = gen_blobs(100, 4, 2, 1.0, &mut rng(3)).unwrap();
        let mut correct = 0;
        for (row, &label) in test.features().iter_rows().zip(test.labels()) {
            let nearest = train
                .features()
                .iter_rows()
                .enumerate()
                .map(|(i, r)| (i, r.iter().zip(row).map(|(a, b)| (a - b).powi(2)).sum::<f64>()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0;
            correct += usize::from(train.labels()[nearest] == label);
        }
        assert!(correct as f64 / test.len() as f64 > 0.5);
    }

    #[test]
    fn noiseless_moons_lie_on_arcs() {
        let d = gen_two_moons(4, 0.0, &mut rng(4)).unwrap();
        for (row, &l) in d.features().iter_rows().zip(d.labels()) {
            let (x, y) = (row[0], row[1]);
            if l == 0 {
                assert!((x * x + y * y - 1.0).abs() < 1e-12 && y >= 0.0);
            } else {
                assert!(((x - 1.0).powi(2) + (y - 0.5).powi(2) - 1.0).abs() < 1e-12 && y <= 0.5);
            }
        }
    }

    #[test]
    fn moons_balanced() {
        assert_eq!(
            gen_two_moons(1000, 0.1, &mut rng(5)).unwrap().class_counts(),
            vec![500, 500]
        );
        assert_eq!(gen_two_moons(7, 0.1, &mut rng(5)).unwrap().class_counts(), vec![4, 3]);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            gen_two_moons(50, 0.2, &mut rng(9)).unwrap(),
            gen_two_moons(50, 0.2, &mut rng(9)).unwrap()
        );
        assert_eq!(
            gen_blobs(5, 3, 4, 0.5, &mut rng(9)).unwrap(),
            gen_blobs(5, 3, 4, 0.5, &mut rng(9)).unwrap()
        );
    }

    #[test]
    fn imbalance_ratio_one_is_identity() {
        let d = gen_blobs(20, 3, 2, 1.0, &mut rng(6)).unwrap();
        let out = make_imbalanced(&d, &BTreeSet::from([0, 1]), 1, &mut rng(7)).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn imbalance_thins_minority_only() {
        let d = gen_blobs(1000, 10, 2, 1.0, &mut rng(6)).unwrap();
        let minority = BTreeSet::from([0, 3, 5, 7, 9]);
        let out = make_imbalanced(&d, &minority, 100, &mut rng(7)).unwrap();
        for (c, &n) in out.class_counts().iter().enumerate() {
            assert_eq!(n, if minority.contains(&c) { 10 } else { 1000 });
        }
        // every surviving row is an unmodified original row
        for row in out.features().iter_rows() {
            assert!(d.features().iter_rows().any(|r| r == row));
        }
    }

    #[test]
    fn imbalance_rejects_emptying_a_class() {
        let d = gen_blobs(5, 2, 2, 1.0, &mut rng(6)).unwrap();
        assert!(make_imbalanced(&d, &BTreeSet::from([0]), 6, &mut rng(7)).is_err());
        assert!(make_imbalanced(&d, &BTreeSet::from([2]), 2, &mut rng(7)).is_err());
        assert!(make_imbalanced(&d, &BTreeSet::from([0]), 0, &mut rng(7)).is_err());
    }
}
