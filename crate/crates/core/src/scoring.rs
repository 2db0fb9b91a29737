//! Box-Cox normalization and score fusion.
//!
//! Every raw metric except the edit size is mapped through a Box-Cox power
//! transform fitted on the whole run, then rescaled to mean `post_mean` and
//! standard deviation `post_std` (1 and 1/3 by default) and clamped at 0.

use serde::{Deserialize, Serialize};

use crate::config::NormalizeConfig;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCoxParams<T> {
    pub lambda: T,
    /// Added to every input so the fitted sample is strictly positive.
    pub shift: T,
    /// Mean and standard deviation of the transformed sample.
    pub transformed_mean: T,
    pub transformed_std: T,
    pub post_mean: T,
    pub post_std: T,
    /// Constant or undersized sample: every value maps to `post_mean`.
    pub degenerate: bool,
}

impl<T: Scalar> BoxCoxParams<T> {
    pub fn degenerate(post_mean: T, post_std: T) -> Self {
        Self {
            lambda: T::one(),
            shift: T::zero(),
            transformed_mean: T::zero(),
            transformed_std: T::one(),
            post_mean,
            post_std,
            degenerate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub min_samples: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
    pub post_mean: f64,
    pub post_std: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self::from(&NormalizeConfig::default())
    }
}

impl From<&NormalizeConfig> for FitOptions {
    fn from(c: &NormalizeConfig) -> Self {
        Self {
            min_samples: c.min_samples,
            lambda_min: c.lambda_min,
            lambda_max: c.lambda_max,
            lambda_step: c.lambda_step,
            post_mean: c.post_mean,
            post_std: c.post_std,
        }
    }
}

fn transform(x: f64, lambda: f64) -> f64 {
    if lambda.abs() < 1e-12 {
        x.ln()
    } else {
        (x.powf(lambda) - 1.0) / lambda
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Profile log-likelihood of the transformed sample under a normal model.
fn log_likelihood(xs: &[f64], sum_ln: f64, lambda: f64) -> f64 {
    let t: Vec<f64> = xs.iter().map(|&x| transform(x, lambda)).collect();
    let (_, sd) = mean_std(&t);
    if !sd.is_finite() || sd <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let n = xs.len() as f64;
    (lambda - 1.0) * sum_ln - n * sd.ln()
}

/// Fit lambda by grid search of the log-likelihood; ties go to the lambda closest to 1.
/// Accumulation runs in `f64` regardless of `T`.
pub fn fit_boxcox<T: Scalar>(samples: &[T], opts: &FitOptions) -> BoxCoxParams<T> {
    let post_mean = T::of(opts.post_mean);
    let post_std = T::of(opts.post_std);
    let raw: Vec<f64> = samples.iter().map(|s| s.as_f64()).collect();
    if raw.len() < opts.min_samples.max(2) {
        return BoxCoxParams::degenerate(post_mean, post_std);
    }
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return BoxCoxParams::degenerate(post_mean, post_std);
    }
    let shift = if min <= 0.0 { 1.0 - min } else { 0.0 };
    let xs: Vec<f64> = raw.iter().map(|x| x + shift).collect();
    let sum_ln: f64 = xs.iter().map(|x| x.ln()).sum();

    let steps = ((opts.lambda_max - opts.lambda_min) / opts.lambda_step).round() as i64;
    let mut best = (f64::NEG_INFINITY, 1.0f64);
    for i in 0..=steps {
        // snap to the grid so 1.0 and 0.0 are hit exactly
        let lambda = ((opts.lambda_min + i as f64 * opts.lambda_step) / opts.lambda_step).round() * opts.lambda_step;
        let ll = log_likelihood(&xs, sum_ln, lambda);
        let closer = (lambda - 1.0).abs() < (best.1 - 1.0).abs();
        if ll > best.0 || (ll == best.0 && closer) {
            best = (ll, lambda);
        }
    }
    let lambda = best.1;
    let t: Vec<f64> = xs.iter().map(|&x| transform(x, lambda)).collect();
    let (mean, sd) = mean_std(&t);
    if !sd.is_finite() || sd <= 0.0 {
        return BoxCoxParams::degenerate(post_mean, post_std);
    }
    BoxCoxParams {
        lambda: T::of(lambda),
        shift: T::of(shift),
        transformed_mean: T::of(mean),
        transformed_std: T::of(sd),
        post_mean,
        post_std,
        degenerate: false,
    }
}

/// Transform, rescale and clamp at 0. Values at or below `-shift` map to 0.
pub fn normalize<T: Scalar>(value: T, params: &BoxCoxParams<T>) -> T {
    if params.degenerate {
        return params.post_mean;
    }
    let x = value.as_f64() + params.shift.as_f64();
    if x <= 0.0 {
        return T::zero();
    }
    let z = (transform(x, params.lambda.as_f64()) - params.transformed_mean.as_f64()) / params.transformed_std.as_f64();
    let y = params.post_mean.as_f64() + params.post_std.as_f64() * z;
    T::of(y.max(0.0))
}

/// `max(1, (loc + cc + hv - pcom) / 2 + 1)` over normalized inputs.
pub fn combine_complexity<T: Scalar>(loc: T, cc: T, hv: T, pcom: T) -> T {
    let half = T::of(0.5);
    (half * (loc + cc + hv - pcom) + T::one()).max(T::one())
}

pub fn function_score<T: Scalar>(delta_ast: T, cm: T, ip: T, ir: T) -> T {
    delta_ast * cm * (ip + T::one()) * ir
}

pub fn commit_cvalue<T: Scalar>(scores: &[FunctionScore<T>]) -> T {
    scores.iter().fold(T::zero(), |acc, s| acc + s.score)
}

/// Fitted transforms for every normalized metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricParams<T> {
    pub loc: BoxCoxParams<T>,
    pub cc: BoxCoxParams<T>,
    pub hv: BoxCoxParams<T>,
    pub pcom: BoxCoxParams<T>,
    pub ip: BoxCoxParams<T>,
    pub ddg: BoxCoxParams<T>,
    pub cdg: BoxCoxParams<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizedMetrics<T> {
    pub loc: T,
    pub cc: T,
    pub hv: T,
    pub pcom: T,
    pub ip: T,
    pub ddg: T,
    pub cdg: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionScore<T> {
    pub file: String,
    pub function: String,
    pub delta_ast: T,
    pub cm: T,
    pub ip: T,
    pub ir: T,
    pub score: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized: Option<NormalizedMetrics<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitScore<T> {
    pub commit: String,
    pub function_scores: Vec<FunctionScore<T>>,
    pub cvalue: T,
}

impl<T: Scalar> CommitScore<T> {
    pub fn new(commit: impl Into<String>, function_scores: Vec<FunctionScore<T>>) -> Self {
        let cvalue = commit_cvalue(&function_scores);
        Self {
            commit: commit.into(),
            function_scores,
            cvalue,
        }
    }

    pub fn delta_ast(&self) -> T {
        self.function_scores.iter().fold(T::zero(), |acc, f| acc + f.delta_ast)
    }
}
