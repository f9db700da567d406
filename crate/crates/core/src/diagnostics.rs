//! Performance and robustness metrics: expected squared jump distance,
//! effective sample size, first-moment mean squared error, tuning distance
//! and adaptation time, acceptance-order fits, and one-dimensional total
//! variation distance.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::math::{integrate, linear_fit};
use crate::proposals::{BalancingFn, ProposalFamily, ProposalKernel};
use crate::sampler::Trace;
use crate::scalar::{cast, Scalar};
use crate::targets::TargetModel;

/// Rao--Blackwellised expected squared jump distance:
/// `mean_t [ alpha_t * ||y_t - x_{t-1}||^2 ]`.
pub fn esjd<T: Scalar>(trace: &Trace<T>) -> T {
    let mut acc = T::zero();
    for t in 0..trace.len() {
        let x = trace.state_before(t);
        let y = trace.proposal_row(t);
        let sq = x
            .iter()
            .zip(y)
            .map(|(a, b)| (*b - *a) * (*b - *a))
            .sum::<T>();
        acc += trace.accept_prob[t] * sq;
    }
    acc / cast::<T>(trace.len() as f64)
}

/// ESJD divided by the dimension.
pub fn esjd_per_coord<T: Scalar>(trace: &Trace<T>) -> T {
    esjd(trace) / cast::<T>(trace.dim as f64)
}

/// Plain mean squared realized jump, `mean_t ||x_t - x_{t-1}||^2`; the
/// noisier estimator of the same quantity, used for cross-checks.
pub fn naive_esjd<T: Scalar>(trace: &Trace<T>) -> T {
    let mut acc = T::zero();
    for t in 0..trace.len() {
        let x = trace.state_before(t);
        let y = trace.sample_row(t);
        acc += x
            .iter()
            .zip(y)
            .map(|(a, b)| (*b - *a) * (*b - *a))
            .sum::<T>();
    }
    acc / cast::<T>(trace.len() as f64)
}

/// Streaming ESJD accumulator for runs too large to keep as traces.
#[derive(Clone, Copy, Debug, Default)]
pub struct EsjdAccumulator {
    sum: f64,
    n: u64,
}

impl EsjdAccumulator {
    pub fn push(&mut self, accept_prob: f64, sq_jump: f64) {
        self.sum += accept_prob * sq_jump;
        self.n += 1;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }
}

/// Effective sample size by Geyer's initial monotone sequence estimator.
///
/// Autocovariances are paired as `Gamma_m = gamma_{2m} + gamma_{2m+1}`; the
/// sum runs while the pairs stay positive and is forced non-increasing.
/// Degenerate (constant) series return 0; the estimate is capped at the
/// series length.
pub fn ess<T: Scalar>(series: &[T]) -> T {
    let n = series.len();
    assert!(n >= 10, "ess needs at least 10 points");
    let xs: Vec<f64> = series
        .iter()
        .map(|v| v.to_f64().expect("series values finite"))
        .collect();
    if xs.iter().all(|x| *x == xs[0]) {
        return T::zero();
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let gamma = autocovariances(&centered);
    let gamma0 = gamma[0];
    if gamma0 <= 0.0 {
        return T::zero();
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = 0usize;
    while 2 * m + 1 < gamma.len() {
        let pair = gamma[2 * m] + gamma[2 * m + 1];
        if pair <= 0.0 {
            break;
        }
        let clipped = pair.min(prev);
        sum += clipped;
        prev = clipped;
        m += 1;
    }
    let asym_var = 2.0 * sum - gamma0;
    let out = if asym_var <= 0.0 {
        n as f64
    } else {
        (n as f64 * gamma0 / asym_var).min(n as f64)
    };
    cast(out)
}

/// Biased-normalization autocovariances `gamma_k = (1/n) sum z_i z_{i+k}`
/// for all lags, via FFT for long series.
fn autocovariances(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    if n < 512 {
        let max_lag = n - 1;
        return (0..=max_lag)
            .map(|k| {
                z[..n - k]
                    .iter()
                    .zip(&z[k..])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    / n as f64
            })
            .collect();
    }
    let m = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = z
        .iter()
        .map(|v| Complex::new(*v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    (0..n).map(|k| buf[k].re / (m as f64 * n as f64)).collect()
}

/// Average over coordinates and traces of the squared error of the
/// post-burn-in estimate of `E[x_i / eta_i]`, with burn-in `len / 2`.
/// Requires the target's exact moments.
pub fn mse_first_moments<T: Scalar>(traces: &[Trace<T>], target: &TargetModel<T>) -> T {
    assert!(!traces.is_empty());
    let mean = target
        .known_mean()
        .expect("mse_first_moments needs exact target means");
    let cov = target
        .known_cov_diag()
        .expect("mse_first_moments needs exact target scales");
    let d = target.dim();
    let mut total = T::zero();
    for trace in traces {
        assert_eq!(trace.dim, d);
        let burn = trace.len() / 2;
        let kept = trace.len() - burn;
        let mut sums = vec![T::zero(); d];
        for t in burn..trace.len() {
            for (s, v) in sums.iter_mut().zip(trace.sample_row(t)) {
                *s += *v;
            }
        }
        let mut err = T::zero();
        for i in 0..d {
            let eta = cov[i].sqrt();
            let est = sums[i] / cast::<T>(kept as f64) / eta;
            let truth = mean[i] / eta;
            err += (est - truth) * (est - truth);
        }
        total += err / cast::<T>(d as f64);
    }
    total / cast::<T>(traces.len() as f64)
}

/// Tuning distance between a covariance-diagonal estimate and the truth:
/// the root-mean-square of the log-scale differences,
/// `d = sqrt(sum_i (ln S_ii - ln Sigma_ii)^2) / sqrt(d)`.
pub fn tuning_distance<T: Scalar>(sigma_t_diag: &[T], sigma_true_diag: &[T]) -> T {
    assert_eq!(sigma_t_diag.len(), sigma_true_diag.len());
    let d = sigma_t_diag.len();
    let sq = sigma_t_diag
        .iter()
        .zip(sigma_true_diag)
        .map(|(a, b)| {
            let diff = a.ln() - b.ln();
            diff * diff
        })
        .sum::<T>();
    sq.sqrt() / cast::<T>(d as f64).sqrt()
}

/// First step at which the tuning distance drops to `epsilon`, or censored
/// at the series length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TauAdapt {
    At(usize),
    Censored(usize),
}

impl TauAdapt {
    /// The crossing step, or the censoring horizon when it never crossed
    /// (a conservative lower bound on the true adaptation time).
    pub fn as_steps(&self) -> usize {
        match self {
            TauAdapt::At(t) | TauAdapt::Censored(t) => *t,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, TauAdapt::Censored(_))
    }
}

impl fmt::Display for TauAdapt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauAdapt::At(t) => write!(f, "{t}"),
            TauAdapt::Censored(n) => write!(f, ">{n}"),
        }
    }
}

/// `tau_adapt(eps) = inf {t >= 1 : d_t <= eps}`; `d_series[i]` holds
/// `d_{i+1}`.
pub fn tau_adapt<T: Scalar>(d_series: &[T], epsilon: T) -> TauAdapt {
    for (i, d) in d_series.iter().enumerate() {
        if *d <= epsilon {
            return TauAdapt::At(i + 1);
        }
    }
    TauAdapt::Censored(d_series.len())
}

/// Fit the order of the log-acceptance decay: slope of
/// `ln |ln r(x, x + sigma u)|` against `ln sigma`, where `r` is the
/// unclipped Hastings ratio of the family's own proposal density at scale
/// `sigma`.
pub fn acceptance_order_fit<T: Scalar>(
    family: ProposalFamily,
    balancing: Option<BalancingFn<T>>,
    target: &TargetModel<T>,
    x: T,
    u: T,
    sigma_grid: &[T],
) -> T {
    assert_eq!(target.dim(), 1, "acceptance order fit is one-dimensional");
    assert!(sigma_grid.len() >= 2);
    let mut log_sigma = Vec::with_capacity(sigma_grid.len());
    let mut log_log_r = Vec::with_capacity(sigma_grid.len());
    for &sigma in sigma_grid {
        let kernel = kernel_for(family, balancing.clone(), sigma);
        let xs = [x];
        let y = [x + sigma * u];
        let (lp_x, g_x) = target.log_density_and_grad(&xs);
        let (lp_y, g_y) = target.log_density_and_grad(&y);
        let fwd = kernel.log_q(&xs, &g_x, &y).expect("tractable density");
        let rev = kernel.log_q(&y, &g_y, &xs).expect("tractable density");
        let log_r = (lp_y - lp_x) + (rev - fwd);
        assert!(
            log_r != T::zero() && log_r.is_finite(),
            "degenerate acceptance ratio in order fit"
        );
        log_sigma.push(sigma.ln());
        log_log_r.push(log_r.abs().ln());
    }
    linear_fit(&log_sigma, &log_log_r).0
}

fn kernel_for<T: Scalar>(
    family: ProposalFamily,
    balancing: Option<BalancingFn<T>>,
    sigma: T,
) -> ProposalKernel<T> {
    match family {
        ProposalFamily::Rwm => ProposalKernel::rwm(sigma),
        ProposalFamily::Mala => ProposalKernel::mala(sigma),
        ProposalFamily::Barker => ProposalKernel::barker(sigma),
        ProposalFamily::BarkerGlobalFlip => ProposalKernel::barker_global_flip(sigma),
        ProposalFamily::Malta => ProposalKernel::malta(sigma, None),
        ProposalFamily::MaltaC => ProposalKernel::maltac(sigma),
        ProposalFamily::GenericLb => ProposalKernel::generic_lb(
            sigma,
            balancing.expect("generic_lb needs a balancing function"),
        ),
        ProposalFamily::Hmc => panic!("no tractable proposal density for hmc"),
    }
    .expect("valid kernel")
}

/// Total variation distance `0.5 * integral |a - b|` between two densities
/// on `[lo, hi]`, by adaptive quadrature.
pub fn tv_distance_1d<T: Scalar, A: Fn(T) -> T, B: Fn(T) -> T>(a: A, b: B, lo: T, hi: T) -> T {
    let f = |x: T| (a(x) - b(x)).abs();
    cast::<T>(0.5) * integrate(&f, lo, hi, cast(1e-10))
}

/// A named metric sampled over a sweep variable (or time), tagged with the
/// replicate that produced it.
#[derive(Clone, Debug)]
pub struct MetricSeries {
    pub name: String,
    pub replicate: u32,
    /// `(sweep value or step, metric value)` pairs.
    pub points: Vec<(f64, f64)>,
}

impl MetricSeries {
    /// Average several replicates of the same series pointwise.
    pub fn mean_over_replicates(series: &[MetricSeries]) -> MetricSeries {
        assert!(!series.is_empty());
        let len = series[0].points.len();
        assert!(series.iter().all(|s| s.points.len() == len));
        let mut points = Vec::with_capacity(len);
        for i in 0..len {
            let x = series[0].points[i].0;
            let mean = series.iter().map(|s| s.points[i].1).sum::<f64>() / series.len() as f64;
            points.push((x, mean));
        }
        MetricSeries {
            name: series[0].name.clone(),
            replicate: u32::MAX,
            points,
        }
    }

    /// Append rows `(sweep_value_or_t, metric, replicate, value)`.
    pub fn append_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (x, v) in &self.points {
            writeln!(w, "{x},{},{},{v}", self.name, self.replicate)?;
        }
        Ok(())
    }
}

/// Write metric series to a CSV file with the standard header.
pub fn write_metric_csv(path: &Path, series: &[MetricSeries]) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "sweep_value_or_t,metric,replicate,value")?;
    for s in series {
        s.append_csv(&mut w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::run_chain;

    #[test]
    fn esjd_trivial_cases() {
        let target = TargetModel::std_gaussian(1);
        let kernel = ProposalKernel::rwm(0.5).unwrap();
        let mut trace = run_chain(vec![0.0], &kernel, &target, 50, 3);
        // force all-rejected with zero acceptance
        for a in trace.accept_prob.iter_mut() {
            *a = 0.0;
        }
        assert_eq!(esjd(&trace), 0.0);
        // unit acceptance with fixed displacement delta: esjd = delta^2
        let delta = 0.3f64;
        for t in 0..trace.len() {
            let before = trace.state_before(t).to_vec();
            trace.proposals[t] = before[0] + delta;
            trace.samples[t] = before[0]; // keep states put; esjd uses proposals
            trace.accept_prob[t] = 1.0;
        }
        assert!((esjd(&trace) - delta * delta).abs() < 1e-12);
    }

    #[test]
    fn ess_iid_close_to_n() {
        let mut rng = crate::sampler::replicate_rng(9, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| f64::std_normal(&mut rng)).collect();
        let e = ess(&xs);
        let ratio = e / xs.len() as f64;
        assert!((0.95..=1.05).contains(&ratio), "ESS/n = {ratio}");
    }

    #[test]
    fn ess_constant_series_is_zero() {
        let xs = vec![1.2345f64; 1000];
        assert_eq!(ess(&xs), 0.0);
    }

    #[test]
    fn ess_affine_invariance() {
        let mut rng = crate::sampler::replicate_rng(11, 0);
        let mut xs = vec![0.0f64];
        for _ in 0..5000 {
            let prev = *xs.last().unwrap();
            xs.push(0.7 * prev + f64::std_normal(&mut rng));
        }
        let mapped: Vec<f64> = xs.iter().map(|x| -3.0 * x + 11.0).collect();
        let a = ess(&xs);
        let b = ess(&mapped);
        assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    }

    #[test]
    fn tuning_distance_examples() {
        let truth = vec![1.0f64, 2.0, 3.0, 4.0];
        assert_eq!(tuning_distance(&truth, &truth), 0.0);
        // one coordinate off by a factor e^2 in Sigma: contributes |ln e^2| = 2
        let mut est = truth.clone();
        est[2] *= (2.0f64).exp();
        let d = tuning_distance(&est, &truth);
        assert!((d - 2.0 / 4.0f64.sqrt()).abs() < 1e-12);
        // common rescaling cancels
        let est2: Vec<f64> = est.iter().map(|v| v * 17.0).collect();
        let truth2: Vec<f64> = truth.iter().map(|v| v * 17.0).collect();
        assert!((tuning_distance(&est2, &truth2) - d).abs() < 1e-12);
    }

    #[test]
    fn tau_adapt_cases() {
        assert_eq!(tau_adapt(&[2.0f64, 1.5, 1.2], 1.0), TauAdapt::Censored(3));
        assert_eq!(tau_adapt(&[0.5f64, 2.0], 1.0), TauAdapt::At(1));
        let mut d = vec![5.0f64; 600];
        d[523] = 0.9;
        assert_eq!(tau_adapt(&d, 1.0), TauAdapt::At(524));
        assert_eq!(format!("{}", tau_adapt(&d, 1e-9)), ">600");
    }

    #[test]
    fn metric_csv_schema() {
        let series = vec![
            MetricSeries {
                name: "esjd".into(),
                replicate: 0,
                points: vec![(0.1, 1.5), (0.2, 2.5)],
            },
            MetricSeries {
                name: "esjd".into(),
                replicate: 1,
                points: vec![(0.1, 1.7), (0.2, 2.3)],
            },
        ];
        let mean = MetricSeries::mean_over_replicates(&series);
        assert_eq!(mean.points, vec![(0.1, 1.6), (0.2, 2.4)]);
        let dir = std::env::temp_dir().join("barker_mcmc_metric_csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.csv");
        write_metric_csv(&path, &series).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "sweep_value_or_t,metric,replicate,value");
        assert_eq!(lines.next().unwrap(), "0.1,esjd,0,1.5");
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn tv_identical_densities_zero() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let tv = tv_distance_1d(f, f, -12.0, 12.0);
        assert!(tv.abs() < 1e-12);
    }

    #[test]
    fn tv_shifted_gaussians_closed_form() {
        let phi = |m: f64| move |x: f64| {
            (-0.5 * (x - m) * (x - m)).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        let tv = tv_distance_1d(phi(0.0), phi(1.0), -14.0, 15.0);
        let want = 2.0 * crate::math::normal_cdf(0.5) - 1.0;
        assert!((tv - want).abs() < 1e-8, "tv = {tv}, want {want}");
        assert!((want - 0.38292).abs() < 1e-5);
    }
}
