//! Smooth cutoff chi: 1 on (-inf, 1], 0 on [2, inf), built from exp(-1/t).

fn g(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn gp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        g(s) / (s * s)
    }
}

pub fn chi(t: f64) -> f64 {
    if t <= 1.0 {
        return 1.0;
    }
    if t >= 2.0 {
        return 0.0;
    }
    let a = g(2.0 - t);
    let b = g(t - 1.0);
    a / (a + b)
}

pub fn chi_prime(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        return 0.0;
    }
    let a = g(2.0 - t);
    let b = g(t - 1.0);
    let s = a + b;
    -(gp(2.0 - t) * b + a * gp(t - 1.0)) / (s * s)
}

/// max |chi'|, attained at t = 3/2 by symmetry.
pub const CHI_PRIME_MAX: f64 = 2.0;

pub fn chi_n(n: u32, r: f64) -> f64 {
    chi(r / 2f64.powi(n as i32))
}

pub fn chi_n_prime(n: u32, r: f64) -> f64 {
    let s = 2f64.powi(n as i32);
    chi_prime(r / s) / s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus_and_symmetry() {
        assert_eq!(chi(0.3), 1.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(2.0), 0.0);
        assert_eq!(chi(7.0), 0.0);
        assert!((chi(1.5) - 0.5).abs() < 1e-15);
        for k in 1..100 {
            let s = k as f64 / 200.0;
            assert!((chi(1.5 + s) + chi(1.5 - s) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_differences_and_bound() {
        let mut worst: f64 = 0.0;
        for k in 1..400 {
            let t = 1.0 + k as f64 / 400.0;
            let h = 1e-6;
            let fd = (chi(t + h) - chi(t - h)) / (2.0 * h);
            assert!((fd - chi_prime(t)).abs() < 1e-6, "t = {t}");
            assert!(chi_prime(t) <= 0.0);
            worst = worst.max(chi_prime(t).abs());
        }
        assert!(worst <= CHI_PRIME_MAX && worst > 0.9 * CHI_PRIME_MAX);
    }

    #[test]
    fn dyadic_rescaling() {
        assert_eq!(chi_n(3, 8.0), 1.0);
        assert_eq!(chi_n(3, 16.0), 0.0);
        assert!((chi_n_prime(3, 12.0) - chi_prime(1.5) / 8.0).abs() < 1e-15);
    }
}
