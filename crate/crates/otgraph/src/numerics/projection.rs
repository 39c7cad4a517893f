//! Euclidean projection onto the probability simplex by the sort-and-threshold
//! rule: the projection of `v` is `max(v_i - theta, 0)` where `theta` is chosen
//! so the positive parts sum to one. Exact in O(n log n).

/// Project `v` onto `{ x : x_i >= 0, sum x_i = 1 }` in place.
pub fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    debug_assert!(n > 0);
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    let mut k = 0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
            k = j + 1;
        } else {
            break;
        }
    }
    debug_assert!(k > 0);
    let _ = k;
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_on_simplex(x: &[f64]) {
        assert!(x.iter().all(|&v| v >= 0.0));
        let s: f64 = x.iter().sum();
        assert!((s - 1.0).abs() < 1e-12, "sum {s}");
    }

    #[test]
    fn already_on_simplex_is_fixed() {
        let mut v = vec![0.2, 0.3, 0.5];
        project_simplex(&mut v);
        assert!((v[0] - 0.2).abs() < 1e-15);
        assert!((v[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clamps_negatives() {
        let mut v = vec![1.4, -0.7, 0.6];
        project_simplex(&mut v);
        assert_on_simplex(&v);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn random_vectors_project_onto_simplex() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for n in 1..12 {
            let mut v: Vec<f64> = (0..n).map(|_| next()).collect();
            project_simplex(&mut v);
            assert_on_simplex(&v);
        }
    }
}
