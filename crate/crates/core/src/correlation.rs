//! Objective/subjective agreement: cubic MOS mapping, PLCC, SROCC and RMSE.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One rated stimulus: its mean opinion score and any objective scores.
#[derive(Debug, Clone, PartialEq)]
pub struct MosRecord {
    pub stimulus_id: String,
    pub mos: f64,
    pub objective_scores: BTreeMap<String, f64>,
}

/// `mos = a + b y + c y^2 + d y^3`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RegressionModel {
    pub fn predict(&self, y: f64) -> f64 {
        self.a + y * (self.b + y * (self.c + y * self.d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub metric_label: String,
    pub n: usize,
    /// Records skipped because their objective score was `+inf`.
    pub excluded_infinite: usize,
    /// Pearson between raw objective scores and MOS.
    pub plcc_raw: f64,
    /// Pearson between fitted predictions and MOS.
    pub plcc_fitted: f64,
    pub srocc: f64,
    pub rmse: f64,
    pub model: RegressionModel,
}

fn check_pairs(pairs: &[(f64, f64)], needed: usize) -> Result<()> {
    if pairs.len() < needed {
        return Err(Error::TooFewSamples {
            needed,
            got: pairs.len(),
        });
    }
    if pairs.iter().any(|(y, m)| !y.is_finite() || !m.is_finite()) {
        return Err(Error::NonFiniteSample);
    }
    Ok(())
}

/// Least-squares cubic from objective score `y` to MOS.
///
/// The fit runs on `y` shifted to zero mean and unit spread, solved with a
/// Householder QR, and the coefficients are expanded back to raw `y`.
pub fn fit_cubic(pairs: &[(f64, f64)]) -> Result<RegressionModel> {
    check_pairs(pairs, 4)?;
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    ys.sort_unstable_by(f64::total_cmp);
    ys.dedup();
    if ys.len() < 4 {
        return Err(Error::RankDeficient { distinct: ys.len() });
    }

    let n = pairs.len() as f64;
    let shift = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let scale = libm::sqrt(pairs.iter().map(|p| (p.0 - shift) * (p.0 - shift)).sum::<f64>() / n);

    let mut design: Vec<[f64; 4]> = pairs
        .iter()
        .map(|p| {
            let t = (p.0 - shift) / scale;
            [1.0, t, t * t, t * t * t]
        })
        .collect();
    let mut rhs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let alpha = householder_solve(&mut design, &mut rhs)
        .ok_or(Error::RankDeficient { distinct: ys.len() })?;

    // sum_k alpha_k ((y - shift) / scale)^k expanded in powers of y
    let mut coef = [0.0f64; 4];
    let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    for k in 0..4 {
        let ak = alpha[k] / libm::pow(scale, k as f64);
        for j in 0..=k {
            coef[j] += ak * binom[k][j] * libm::pow(-shift, (k - j) as f64);
        }
    }
    let model = RegressionModel {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        d: coef[3],
    };
    if coef.iter().all(|c| c.is_finite()) {
        Ok(model)
    } else {
        Err(Error::NonFiniteSample)
    }
}

/// Solves `min |A x - b|` for a tall `m x 4` system in place.
fn householder_solve(a: &mut [[f64; 4]], b: &mut [f64]) -> Option<[f64; 4]> {
    let m = a.len();
    let norm_a = libm::sqrt(a.iter().flatten().map(|v| v * v).sum::<f64>());
    for k in 0..4 {
        let norm = libm::sqrt(a[k..].iter().map(|r| r[k] * r[k]).sum::<f64>());
        if norm <= 1e-12 * norm_a {
            return None;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k..].iter().map(|r| r[k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for j in k..4 {
            let s: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..m {
                a[i][j] -= s * v[i - k];
            }
        }
        let s: f64 = (k..m).map(|i| v[i - k] * b[i]).sum::<f64>() * 2.0 / vnorm2;
        for i in k..m {
            b[i] -= s * v[i - k];
        }
    }
    let mut x = [0.0; 4];
    for k in (0..4).rev() {
        let tail: f64 = (k + 1..4).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - tail) / a[k][k];
    }
    Some(x)
}

/// Sample Pearson correlation coefficient.
pub fn plcc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn srocc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::NonFiniteSample);
    }
    plcc(&fractional_ranks(x), &fractional_ranks(y))
}

/// Root mean squared residual of `model` over `(y, mos)` pairs.
pub fn rmse(model: &RegressionModel, pairs: &[(f64, f64)]) -> Result<f64> {
    check_pairs(pairs, 1)?;
    let sq: f64 = pairs
        .iter()
        .map(|&(y, mos)| {
            let r = mos - model.predict(y);
            r * r
        })
        .sum();
    Ok(libm::sqrt(sq / pairs.len() as f64))
}

/// Fits the cubic mapping for one objective score column and reports the
/// agreement statistics. Records whose score is `+inf` (lossless) are left
/// out and counted.
pub fn evaluate_metric(records: &[MosRecord], metric_label: &str) -> Result<CorrelationReport> {
    let mut pairs = Vec::with_capacity(records.len());
    let mut excluded_infinite = 0;
    for r in records {
        let y = *r
            .objective_scores
            .get(metric_label)
            .ok_or_else(|| Error::MissingScore {
                stimulus: r.stimulus_id.clone(),
                label: metric_label.into(),
            })?;
        if y == f64::INFINITY {
            excluded_infinite += 1;
        } else {
            pairs.push((y, r.mos));
        }
    }
    check_pairs(&pairs, 4)?;
    // canonical order makes every statistic independent of record order
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));

    let ys: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mos: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let model = fit_cubic(&pairs)?;
    let predicted: Vec<f64> = ys.iter().map(|&y| model.predict(y)).collect();
    Ok(CorrelationReport {
        metric_label: metric_label.into(),
        n: pairs.len(),
        excluded_infinite,
        plcc_raw: plcc(&ys, &mos)?,
        plcc_fitted: plcc(&predicted, &mos)?,
        srocc: srocc(&ys, &mos)?,
        rmse: rmse(&model, &pairs)?,
        model,
    })
}
