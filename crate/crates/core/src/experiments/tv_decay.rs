//! Total-variation decay of gradient-based proposals toward the random
//! walk as the target stretches: TV(Q_lambda(x, .), Q_rwm(x, .)) over a
//! lambda grid, evaluated at the origin of a mean-shifted Gaussian so the
//! local gradient is exactly `1 / lambda`.

use crate::diagnostics::tv_distance_1d;
use crate::math::{linear_fit, log_normal_pdf};
use crate::proposals::barker_log_density_1d;
use crate::targets::TargetModel;

use super::config::SamplerName;

#[derive(Clone, Debug)]
pub struct TvRow {
    pub family: SamplerName,
    pub lambda: f64,
    pub grad_at_x: f64,
    pub tv: f64,
}

#[derive(Clone, Debug)]
pub struct TvDecayResult {
    pub rows: Vec<TvRow>,
}

impl TvDecayResult {
    /// Log-log slope of TV against lambda for one family.
    pub fn slope(&self, family: SamplerName) -> f64 {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for r in &self.rows {
            if r.family == family {
                xs.push(r.lambda.ln());
                ys.push(r.tv.ln());
            }
        }
        linear_fit(&xs, &ys).0
    }
}

pub fn run_tv_decay(samplers: &[SamplerName], lambda_grid: &[f64], sigma: f64) -> TvDecayResult {
    let base = TargetModel::gaussian_with_mean(vec![1.0], vec![1.0]);
    let mut rows = Vec::new();
    for &lambda in lambda_grid {
        let scaled = base.clone().scale_family(lambda, 1).expect("lambda > 0");
        let grad = scaled.grad_log_density(&[0.0])[0];
        for &family in samplers {
            let tv = tv_at(family, grad, sigma);
            rows.push(TvRow {
                family,
                lambda,
                grad_at_x: grad,
                tv,
            });
        }
    }
    TvDecayResult { rows }
}

/// TV distance between the family's proposal at local gradient `grad` and
/// the random-walk proposal, both at scale `sigma`, by quadrature.
pub fn tv_at(family: SamplerName, grad: f64, sigma: f64) -> f64 {
    let rwm = move |w: f64| log_normal_pdf(w, sigma).exp();
    let half_window = 12.0 * sigma;
    match family {
        SamplerName::Barker => {
            let barker = move |w: f64| barker_log_density_1d(w, grad, sigma).exp();
            tv_distance_1d(barker, rwm, -half_window, half_window)
        }
        SamplerName::Mala => {
            let drift = 0.5 * sigma * sigma * grad;
            let mala = move |w: f64| log_normal_pdf(w - drift, sigma).exp();
            tv_distance_1d(
                mala,
                rwm,
                -half_window - drift.abs(),
                half_window + drift.abs(),
            )
        }
        other => panic!("tv decay is defined for mala and barker, not {other:?}"),
    }
}
