//! Classical fixed-step fourth-order Runge-Kutta.

use crate::scalar::Scalar;

/// One RK4 step of `dx/dt = f(x, t)` from `(x, t)` with step `h`.
pub fn rk4_step<T, F>(f: &F, x: &[T], t: T, h: T) -> Vec<T>
where
    T: Scalar,
    F: Fn(&[T], T) -> Vec<T> + ?Sized,
{
    let two = T::of(2.0);
    let half = h / two;
    let k1 = f(x, t);
    let x2: Vec<T> = x.iter().zip(&k1).map(|(x, k)| *x + half * *k).collect();
    let k2 = f(&x2, t + half);
    let x3: Vec<T> = x.iter().zip(&k2).map(|(x, k)| *x + half * *k).collect();
    let k3 = f(&x3, t + half);
    let x4: Vec<T> = x.iter().zip(&k3).map(|(x, k)| *x + h * *k).collect();
    let k4 = f(&x4, t + h);
    let sixth = h / T::of(6.0);
    (0..x.len())
        .map(|i| x[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect()
}

/// Number of equal sub-steps of size at most `h` covering `span`.
pub(crate) fn substeps<T: Scalar>(span: T, h: T) -> usize {
    let n = (span / h).to_f64().unwrap_or(0.0);
    // tolerate representation noise such as 0.1 / 0.01 = 9.999999999999998
    let r = n.round();
    if (n - r).abs() < 1e-9 * r.max(1.0) {
        r.max(1.0) as usize
    } else {
        n.ceil().max(1.0) as usize
    }
}

/// Clamps coordinates into `[lo, hi]` (physical saturation such as a car
/// that cannot reverse).
pub(crate) fn saturate<T: Scalar>(x: &mut [T], bounds: Option<&(Vec<T>, Vec<T>)>) {
    if let Some((lo, hi)) = bounds {
        for i in 0..x.len() {
            x[i] = x[i].max(lo[i]).min(hi[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_error(h: f64) -> f64 {
        let f = |x: &[f64], _t: f64| vec![x[0]];
        let n = substeps(1.0, h);
        let mut x = vec![1.0];
        for k in 0..n {
            x = rk4_step(&f, &x, k as f64 * h, h);
        }
        (x[0] - 1f64.exp()).abs()
    }

    #[test]
    fn fourth_order_on_exponential() {
        let e1 = exp_error(0.1);
        let e2 = exp_error(0.05);
        let order = (e1 / e2).log2();
        assert!(order > 3.8, "fitted order {order}");
    }

    #[test]
    fn linear_ramp_is_exact() {
        let f = |_x: &[f64], _t: f64| vec![2.0];
        let x = rk4_step(&f, &[1.0], 0.0, 0.5);
        assert_eq!(x, vec![2.0]);
    }

    #[test]
    fn substep_counts() {
        assert_eq!(substeps(0.1, 0.01), 10);
        assert_eq!(substeps(1.0, 0.3), 4);
        assert_eq!(substeps(1.0, 2.0), 1);
    }
}
