use serde::{Deserialize, Serialize};

use super::{delay_embed, DelayParams, EmbedError};

pub const DEFAULT_MI_BINS: usize = 16;
pub const DEFAULT_FNN_RTOL: f64 = 15.0;
/// A dimension is accepted once fewer than this fraction of neighbors are false.
const FNN_ACCEPT_FRACTION: f64 = 0.01;

/// Why an estimate is less trustworthy than a clean minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateFlag {
    /// Constant input; the statistic is undefined.
    Degenerate,
    /// No qualifying value within the search range; the range maximum is returned.
    NoMinimum,
    /// The minimum is a plateau of several delays; its midpoint is returned.
    Flat,
    /// The curve reached the estimator's noise floor before any minimum.
    NoiseFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub tau: usize,
    pub flag: Option<EstimateFlag>,
    /// `curve[t - 1]` is the mutual information at delay `t`, in nats.
    pub curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub dim: usize,
    pub flag: Option<EstimateFlag>,
    /// `fractions[d - 1]` is the false-neighbor fraction at dimension `d`.
    pub fractions: Vec<f64>,
}

/// Histogram estimate (equal-width bins over the series range, shared by
/// both coordinates) of the mutual information between `z[n]` and
/// `z[n + tau]`, in nats. Returns `None` for a constant series.
pub fn mutual_information(series: &[f64], tau: usize, bins: usize) -> Option<f64> {
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let width = hi - lo;
    if !(width > 0.0) || tau >= series.len() || bins == 0 {
        return None;
    }
    let bin = |v: f64| (((v - lo) / width * bins as f64) as usize).min(bins - 1);

    let pairs = series.len() - tau;
    let mut joint = vec![0u32; bins * bins];
    let mut left = vec![0u32; bins];
    let mut right = vec![0u32; bins];
    for n in 0..pairs {
        let a = bin(series[n]);
        let b = bin(series[n + tau]);
        joint[a * bins + b] += 1;
        left[a] += 1;
        right[b] += 1;
    }
    let total = pairs as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c == 0 {
                continue;
            }
            let pab = f64::from(c) / total;
            let pa = f64::from(left[a]) / total;
            let pb = f64::from(right[b]) / total;
            mi += pab * (pab / (pa * pb)).ln();
        }
    }
    Some(mi.max(0.0))
}

/// First minimum of the mutual-information curve over `1..=max_tau`.
///
/// The scan stops at the first `t` with `MI(t + 1) > MI(t)`, which is then
/// widened to the midpoint of the flat basin around it, or at
/// the first `t` whose `MI(t)` is within three standard deviations above the
/// bias of the histogram estimator under independence (the white-noise
/// floor).
pub fn estimate_tau_mutual_information(
    series: &[f64],
    max_tau: usize,
    bins: usize,
) -> Result<TauEstimate, EmbedError> {
    if max_tau == 0 || bins < 2 {
        return Err(EmbedError::Precondition(format!(
            "max_tau must be >= 1 and bins >= 2 (got max_tau={max_tau}, bins={bins})"
        )));
    }
    if series.len() < 4 * max_tau {
        return Err(EmbedError::Precondition(format!(
            "mutual information needs a series of at least 4*max_tau = {} samples, got {}",
            4 * max_tau,
            series.len()
        )));
    }
    // max_tau + 1 is evaluated to decide whether max_tau itself is a minimum
    let last = (max_tau + 1).min(series.len() - 1);
    let mut curve = Vec::with_capacity(last);
    for tau in 1..=last {
        match mutual_information(series, tau, bins) {
            Some(mi) => curve.push(mi),
            None => {
                return Ok(TauEstimate {
                    tau: 1,
                    flag: Some(EstimateFlag::Degenerate),
                    curve: Vec::new(),
                })
            }
        }
    }

    let dof = ((bins - 1) * (bins - 1)) as f64;
    let span = max_tau.min(curve.len());
    let mut first_min = None;
    for tau in 1..=span {
        let mi = curve[tau - 1];
        let pairs = (series.len() - tau) as f64;
        let floor = (dof + 3.0 * (2.0 * dof).sqrt()) / (2.0 * pairs);
        if mi <= floor {
            curve.truncate(max_tau);
            return Ok(TauEstimate {
                tau,
                flag: Some(EstimateFlag::NoiseFloor),
                curve,
            });
        }
        if curve.get(tau).is_some_and(|&next| next > mi) {
            first_min = Some(tau);
            break;
        }
    }
    let (tau, flag) = match first_min {
        Some(t0) => min_basin_midpoint(&curve[..span], t0),
        None => (max_tau, Some(EstimateFlag::NoMinimum)),
    };
    curve.truncate(max_tau);
    Ok(TauEstimate { tau, flag, curve })
}

/// Fraction of the initial descent `MI(1) - min` below which differences
/// along the curve count as flat.
const MI_FLAT_FRACTION: f64 = 0.1;

/// Resolve the first local minimum `t0` of `curve` (1-based delays) into a
/// basin: follow the running minimum until the curve rises more than the
/// flatness tolerance above it, then return the midpoint of the contiguous
/// run of delays within tolerance of the basin minimum. Histogram estimates
/// of periodic signals are flat across a wide basin whose interior dips are
/// binning noise.
fn min_basin_midpoint(curve: &[f64], t0: usize) -> (usize, Option<EstimateFlag>) {
    let at = |t: usize| curve[t - 1];
    let tol = |m: f64| MI_FLAT_FRACTION * (at(1) - m);
    let (mut m, mut arg) = (at(t0), t0);
    for t in (t0 + 1)..=curve.len() {
        if at(t) > m + tol(m) {
            break;
        }
        if at(t) < m {
            (m, arg) = (at(t), t);
        }
    }
    let within = |t: usize| at(t) <= m + tol(m);
    let (mut lo, mut hi) = (arg, arg);
    while lo > 1 && within(lo - 1) {
        lo -= 1;
    }
    while hi < curve.len() && within(hi + 1) {
        hi += 1;
    }
    let flag = (hi > lo).then_some(EstimateFlag::Flat);
    ((lo + hi) / 2, flag)
}

/// Fraction of points whose nearest neighbor in dimension `dim` stops being
/// near once the `(dim + 1)`-th delay coordinate is added. `None` when fewer
/// than two points have that extra coordinate.
pub fn fnn_fraction(series: &[f64], tau: usize, dim: usize, rtol: f64) -> Option<f64> {
    let extra = dim * tau;
    if dim == 0 || tau == 0 || series.len() < extra + 2 {
        return None;
    }
    let m = series.len() - extra;
    let coord = |n: usize, j: usize| series[n + j * tau];

    let mut false_count = 0usize;
    for i in 0..m {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for j in 0..m {
            if j == i {
                continue;
            }
            let mut d2 = 0.0;
            for k in 0..dim {
                let diff = coord(i, k) - coord(j, k);
                d2 += diff * diff;
                if d2 >= best {
                    break;
                }
            }
            if d2 < best {
                best = d2;
                best_j = j;
            }
        }
        let r = best.sqrt();
        let gap = (series[i + extra] - series[best_j + extra]).abs();
        let is_false = if r > 0.0 { gap / r > rtol } else { gap > 0.0 };
        if is_false {
            false_count += 1;
        }
    }
    Some(false_count as f64 / m as f64)
}

/// Smallest `D <= max_dim` whose false-nearest-neighbor fraction is below 1%.
pub fn estimate_dim_fnn(
    series: &[f64],
    tau: usize,
    max_dim: usize,
    rtol: f64,
) -> Result<DimEstimate, EmbedError> {
    if max_dim == 0 || tau == 0 || !(rtol > 0.0) {
        return Err(EmbedError::Precondition(format!(
            "need max_dim >= 1, tau >= 1, rtol > 0 (got {max_dim}, {tau}, {rtol})"
        )));
    }
    let params = DelayParams { dim: max_dim, tau };
    if params.point_count(series.len()) < 10 {
        return Err(EmbedError::Precondition(format!(
            "a {max_dim}-dimensional embedding with tau={tau} needs at least {} samples for 10 points, got {}",
            params.min_len() + 9,
            series.len()
        )));
    }
    // sanity: the embedding itself must be constructible
    delay_embed(series, params)?;

    let mut fractions = Vec::with_capacity(max_dim);
    for dim in 1..=max_dim {
        match fnn_fraction(series, tau, dim, rtol) {
            Some(f) => {
                fractions.push(f);
                if f < FNN_ACCEPT_FRACTION {
                    return Ok(DimEstimate {
                        dim,
                        flag: None,
                        fractions,
                    });
                }
            }
            None => break,
        }
    }
    Ok(DimEstimate {
        dim: max_dim,
        flag: Some(EstimateFlag::NoMinimum),
        fractions,
    })
}
