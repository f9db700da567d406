//! Shared numeric kernels: stable log-space primitives, Gaussian special
//! functions, adaptive quadrature, and a small least-squares fit.
//!
//! The acceptance computations all run in log space; `log1p_exp` is the
//! two-branch form that stays exact for arguments up to `1e308` in magnitude.

use crate::scalar::{cast, Scalar};

/// `ln(1 + e^u)`, branch-stable for any finite `u`.
#[inline]
pub fn log1p_exp<T: Scalar>(u: T) -> T {
    if u > T::zero() {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^{-u})` without overflow.
#[inline]
pub fn logistic<T: Scalar>(u: T) -> T {
    if u >= T::zero() {
        T::one() / (T::one() + (-u).exp())
    } else {
        let e = u.exp();
        e / (T::one() + e)
    }
}

/// Log-density of N(0, sigma^2) at `w`.
#[inline]
pub fn log_normal_pdf<T: Scalar>(w: T, sigma: T) -> T {
    let z = w / sigma;
    let half = cast::<T>(0.5);
    -half * z * z - sigma.ln() - half * (T::TAU()).ln()
}

/// Standard normal CDF. Underflows to zero below t ~ -38 in f64; use
/// [`log_normal_cdf`] when the log is what is needed.
#[inline]
pub fn normal_cdf<T: Scalar>(t: T) -> T {
    let s = -t / T::SQRT_2();
    cast::<T>(0.5) * s.erfc()
}

/// Continued fraction for `sqrt(pi) * e^{s^2} * erfc(s)`, accurate for s >= 3.
///
/// A&S 7.1.14: the partial numerators are k/2 and the partial denominators
/// are all `s`. Evaluated with modified Lentz.
fn erfcx_cf<T: Scalar>(s: T) -> T {
    let tiny = cast::<T>(1e-300);
    let eps = cast::<T>(1e-17);
    let mut f = s;
    let mut c = f;
    let mut d = T::zero();
    for k in 1..200 {
        let a = cast::<T>(k as f64 / 2.0);
        d = s + a * d;
        if d == T::zero() {
            d = tiny;
        }
        c = s + a / c;
        if c == T::zero() {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f *= delta;
        if (delta - T::one()).abs() < eps {
            break;
        }
    }
    f.recip()
}

/// Log of the standard normal CDF, finite for every finite argument.
///
/// Direct `ln(erfc)` below t = -5 would hit 0/0 underflow near t ~ -38;
/// the deep-tail branch goes through the scaled complementary error
/// function instead.
pub fn log_normal_cdf<T: Scalar>(t: T) -> T {
    if t >= cast::<T>(-5.0) {
        normal_cdf(t).ln()
    } else {
        let s = -t / T::SQRT_2();
        // Phi(t) = K(s) e^{-s^2} / (2 sqrt(pi)) with K the CF above.
        erfcx_cf(s).ln() - s * s - (cast::<T>(2.0) * T::PI().sqrt()).ln()
    }
}

/// Mills-type hazard `phi(t) / Phi(t)` for the standard normal, stable in
/// the deep left tail where both terms underflow.
pub fn normal_hazard<T: Scalar>(t: T) -> T {
    if t >= cast::<T>(-5.0) {
        let half = cast::<T>(0.5);
        let log_phi = -half * t * t - half * (T::TAU()).ln();
        (log_phi - normal_cdf(t).ln()).exp()
    } else {
        T::SQRT_2() / erfcx_cf(-t / T::SQRT_2())
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. The interval is pre-split into 32 uniform panels so narrow
/// features cannot hide between the initial sample points; each panel is
/// then refined adaptively. Depth-capped; every integrand in this crate is
/// light-tailed and piecewise smooth, for which this converges well before
/// the cap.
pub fn integrate<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> T {
    const PANELS: usize = 32;
    let two = cast::<T>(2.0);
    let six = cast::<T>(6.0);
    let width = (b - a) / cast::<T>(PANELS as f64);
    let panel_tol = tol / cast::<T>(PANELS as f64);
    let mut total = T::zero();
    for p in 0..PANELS {
        let lo = a + width * cast::<T>(p as f64);
        let hi = if p + 1 == PANELS {
            b
        } else {
            a + width * cast::<T>((p + 1) as f64)
        };
        let m = (lo + hi) / two;
        let flo = f(lo);
        let fm = f(m);
        let fhi = f(hi);
        let whole = (hi - lo) / six * (flo + cast::<T>(4.0) * fm + fhi);
        total += simpson_step(f, lo, hi, flo, fm, fhi, whole, panel_tol, 44);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Scalar, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let two = cast::<T>(2.0);
    let six = cast::<T>(6.0);
    let four = cast::<T>(4.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= cast::<T>(15.0) * tol {
        left + right + err / cast::<T>(15.0)
    } else {
        let half_tol = tol / two;
        simpson_step(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
    }
}

/// Ordinary least squares of `y` on `x`. Returns `(slope, intercept, r2)`.
pub fn linear_fit<T: Scalar>(xs: &[T], ys: &[T]) -> (T, T, T) {
    assert_eq!(xs.len(), ys.len(), "linear_fit: length mismatch");
    assert!(xs.len() >= 2, "linear_fit: need at least two points");
    let n = cast::<T>(xs.len() as f64);
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > T::zero() {
        sxy * sxy / (sxx * syy)
    } else {
        T::one()
    };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log1p_exp_matches_naive_in_safe_range() {
        for &u in &[-30.0, -2.5, -1e-9, 0.0, 1e-9, 2.5, 30.0] {
            let naive = (1.0 + f64::exp(u)).ln();
            assert!((log1p_exp(u) - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn log1p_exp_huge_arguments() {
        assert_eq!(log1p_exp(1e308), 1e308);
        assert_eq!(log1p_exp(-1e308), 0.0);
        assert!((log1p_exp(750.0f64) - 750.0).abs() < 1e-12);
    }

    #[test]
    fn logistic_complements() {
        for &u in &[-700.0, -3.0, 0.0, 0.5, 100.0] {
            let p: f64 = logistic(u);
            assert!((p + logistic(-u) - 1.0).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&p));
        }
        assert!((logistic(3f64.ln()) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0f64) - 0.5).abs() < 1e-16);
        // Literature values for the deep tail.
        let cases: [(f64, f64); 3] = [
            (-10.0, 7.619853024160526e-24),
            (-20.0, 2.7536241186062337e-89),
            (-30.0, 4.906713927148187e-198),
        ];
        for (t, phi) in cases {
            let lp: f64 = log_normal_cdf(t);
            assert!(
                (lp - phi.ln()).abs() < 1e-10 * phi.ln().abs(),
                "log Phi({t}) = {lp}, want {}",
                phi.ln()
            );
        }
    }

    #[test]
    fn log_normal_cdf_continuous_at_branch() {
        let below: f64 = log_normal_cdf(-5.0 - 1e-9);
        let above: f64 = log_normal_cdf(-5.0 + 1e-9);
        assert!((below - above).abs() < 1e-7);
        let hb: f64 = normal_hazard(-5.0 - 1e-9);
        let ha: f64 = normal_hazard(-5.0 + 1e-9);
        assert!((hb - ha).abs() < 1e-7 * hb.abs());
    }

    #[test]
    fn hazard_deep_tail_is_finite_and_asymptotic() {
        // phi/Phi(t) -> |t| as t -> -inf.
        for &t in &[-10.0, -50.0, -300.0, -1e6] {
            let h: f64 = normal_hazard(t);
            assert!(h.is_finite());
            assert!(h > -t && h < -t + 1.0, "hazard({t}) = {h}");
        }
    }

    #[test]
    fn quadrature_gaussian_mass() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = integrate(&f, -12.0, 12.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn quadrature_matches_polynomial() {
        let f = |x: f64| 3.0 * x * x + x;
        let v = integrate(&f, -1.0, 2.0, 1e-12);
        assert!((v - (9.0 + 1.5)).abs() < 1e-10);
    }

    #[test]
    fn fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (s, b, r2) = linear_fit(&xs, &ys);
        assert!((s - 2.5).abs() < 1e-12);
        assert!((b + 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }
}
