use crate::scalar::Real;

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex<T: Real>(v: &mut [T]) {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (i, s) in sorted.iter().enumerate() {
        cumsum = cumsum + *s;
        let t = (cumsum - T::one()) / T::from_usize_lossy(i + 1);
        if *s - t > T::zero() {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(T::zero());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_projections() {
        let mut v = [0.5f64, 0.5];
        project_simplex(&mut v);
        assert_eq!(v, [0.5, 0.5]);
        let mut v = [2.0f64, 0.0];
        project_simplex(&mut v);
        assert_eq!(v, [1.0, 0.0]);
        let mut v = [0.0f64, 0.0, 0.0];
        project_simplex(&mut v);
        assert!(v.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    proptest! {
        #[test]
        fn lands_on_simplex(v in prop::collection::vec(-3.0f64..3.0, 1..8)) {
            let mut p = v.clone();
            project_simplex(&mut p);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // projection is idempotent
            let mut q = p.clone();
            project_simplex(&mut q);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
