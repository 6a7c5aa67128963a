//! Degrees-of-freedom arithmetic for the aligned X-channel and the
//! block-aligned three-user interference channel.
//!
//! Powers are carried as base-2 logarithms so that sweeps to large `Q` stay
//! finite in floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::channels::{build_xchannel, constellation_difference, ChannelModel, ChannelParams};
use crate::{Error, ExactReal, Limits, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    XChannel,
    Gic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofPoint {
    /// `Q` for the X-channel, `k` for the interference channel.
    pub sweep: u64,
    pub lambda_log2: f64,
    pub power_log2: f64,
    /// Message bits per channel use (`4 log2 Q` for the X-channel).
    pub bits: f64,
    /// `1/2 log2(1 + P)`.
    pub benchmark: f64,
    pub ratio: f64,
    /// Exact value for the interference channel.
    pub exact: Option<BigRational>,
    /// Unscaled measured minimum distance.
    pub d_hat: Option<ExactReal>,
    /// `exp(-(lambda d_hat)^2 / 8)`.
    pub reliability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofReport {
    pub scheme: Scheme,
    pub eps: f64,
    /// Implied constant in `P = c (lambda Q)^2`.
    pub constant: f64,
    pub points: Vec<DofPoint>,
    pub limit: f64,
    /// Largest ratio over the sweep.
    pub sup: f64,
}

/// `log2(1 + 2^x)` without overflow.
fn log2_one_plus_pow2(x: f64) -> f64 {
    if x > 60.0 {
        x + (-x).exp2().ln_1p() / std::f64::consts::LN_2
    } else {
        x.exp2().ln_1p() / std::f64::consts::LN_2
    }
}

/// `4 / (3 + 2 eps)`.
pub fn xchannel_limit(eps: f64) -> f64 {
    4.0 / (3.0 + 2.0 * eps)
}

/// Rate ratio `4 log2 Q / (1/2 log2(1 + P))` with `P = c Q^{6+4 eps}`.
pub fn xchannel_ratio(q: u64, eps: f64, constant: f64) -> f64 {
    let lq = (q as f64).log2();
    let p = (6.0 + 4.0 * eps) * lq + constant.log2();
    4.0 * lq / (0.5 * log2_one_plus_pow2(p))
}

/// Sweeps `Q` for the aligned X-channel with `lambda = Q^{2+2 eps}`. When a
/// model is given its gains are used to measure the minimum distance at
/// every `Q`.
pub fn xchannel_dof_sweep(
    eps: f64,
    qs: &[u64],
    constant: f64,
    model: Option<&ChannelModel>,
    limits: &Limits,
) -> Result<DofReport> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if !(constant > 0.0) {
        return Err(Error::InvalidArgument("constant must be positive".into()));
    }
    if qs.is_empty() || qs.windows(2).any(|w| w[0] >= w[1]) || qs[0] < 2 {
        return Err(Error::InvalidArgument("Q list must be ascending and start at 2 or more".into()));
    }
    let mut points = Vec::with_capacity(qs.len());
    for &q in qs {
        let lq = (q as f64).log2();
        let lambda_log2 = (2.0 + 2.0 * eps) * lq;
        let power_log2 = 2.0 * (lambda_log2 + lq) + constant.log2();
        let benchmark = 0.5 * log2_one_plus_pow2(power_log2);
        let bits = 4.0 * lq;
        let (d_hat, reliability) = match model {
            Some(m) => {
                let d = measured_d_min(m, None, q, limits)?;
                let r = reliability(&d, lambda_log2);
                (Some(d), Some(r))
            }
            None => (None, None),
        };
        points.push(DofPoint {
            sweep: q,
            lambda_log2,
            power_log2,
            bits,
            benchmark,
            ratio: bits / benchmark,
            exact: None,
            d_hat,
            reliability,
        });
    }
    let sup = points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(DofReport { scheme: Scheme::XChannel, eps, constant, points, limit: xchannel_limit(eps), sup })
}

fn reliability(d: &ExactReal, lambda_log2: f64) -> f64 {
    let x = d.to_f64() * lambda_log2.exp2();
    (-(x * x) / 8.0).exp()
}

/// Unscaled minimum distance of the aligned X-channel with the model's gains
/// at message bound `q`; the least over both receivers unless one is named.
fn measured_d_min(model: &ChannelModel, receiver: Option<usize>, q: u64, limits: &Limits) -> Result<ExactReal> {
    let ChannelParams::XChannel { h, .. } = &model.params else {
        return Err(Error::InvalidArgument("measured distances need an X-channel model".into()));
    };
    let m = build_xchannel(h, q, &ExactReal::one())?;
    match receiver {
        Some(i) => Ok(constellation_difference(&m, i, limits)?.d_min),
        None => {
            let a = constellation_difference(&m, 0, limits)?.d_min;
            let b = constellation_difference(&m, 1, limits)?.d_min;
            a.min_with(&b, limits.precision_bits)
        }
    }
}

/// `3 k^{m_g} / (k^{m_g} + (k+1)^{m_g} + 2 eps)`.
pub fn gic_value(k: u64, m_g: u32, eps: &BigRational) -> BigRational {
    let m = BigInt::from(k).pow(m_g);
    let m1 = BigInt::from(k + 1).pow(m_g);
    let den = BigRational::from_integer(&m + m1) + eps * BigInt::from(2);
    BigRational::from_integer(m * 3) / den
}

pub fn gic_dof_formula(ks: &[u64], m_g: u32, eps: &BigRational) -> Result<DofReport> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::InvalidArgument("k values must be at least 1".into()));
    }
    if m_g == 0 {
        return Err(Error::InvalidArgument("m_g must be positive".into()));
    }
    if eps < &BigRational::from_integer(0.into()) {
        return Err(Error::InvalidArgument("eps must be non-negative".into()));
    }
    let points: Vec<DofPoint> = ks
        .iter()
        .map(|&k| {
            let v = gic_value(k, m_g, eps);
            DofPoint {
                sweep: k,
                lambda_log2: f64::NAN,
                power_log2: f64::NAN,
                bits: f64::NAN,
                benchmark: f64::NAN,
                ratio: v.to_f64().unwrap_or(f64::NAN),
                exact: Some(v),
                d_hat: None,
                reliability: None,
            }
        })
        .collect();
    let sup = points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(DofReport { scheme: Scheme::Gic, eps: eps.to_f64().unwrap_or(f64::NAN), constant: 1.0, points, limit: 1.5, sup })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityRow {
    pub q: u64,
    pub d_hat: ExactReal,
    pub lambda_log2: f64,
    pub value: f64,
    /// `exp(-(c kappa C2 Q^eps)^2 / 8)`, an upper bound for `value` that is
    /// strictly decreasing when `kappa > 0`.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityReport {
    pub receiver: usize,
    pub eps: f64,
    pub lambda_factor: f64,
    pub rows: Vec<ReliabilityRow>,
    /// Least `d_hat Q^{2+eps} / C2` over the sweep.
    pub kappa: f64,
    /// The envelope decays to zero (`kappa > 0`).
    pub decaying: bool,
    /// The measured series itself strictly decreases.
    pub monotone: bool,
}

/// `exp(-(c lambda d_hat)^2 / 8)` along a `Q` sweep, `lambda = Q^{2+2 eps}`
/// scaled by `lambda_factor = c`.
pub fn reliability_report(
    model: &ChannelModel,
    receiver: usize,
    eps: f64,
    qs: &[u64],
    lambda_factor: f64,
    limits: &Limits,
) -> Result<ReliabilityReport> {
    if qs.is_empty() || qs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("Q list must be ascending".into()));
    }
    if !(lambda_factor >= 1.0) {
        return Err(Error::InvalidArgument("lambda factor must be at least 1".into()));
    }
    let ChannelParams::XChannel { h, .. } = &model.params else {
        return Err(Error::InvalidArgument("measured distances need an X-channel model".into()));
    };
    let unit = build_xchannel(h, 1, &ExactReal::one())?;
    let rx = unit.receivers.get(receiver).ok_or_else(|| Error::InvalidArgument("no such receiver".into()))?;
    let c2 = rx.coeffs().iter().map(|c| c.to_f64()).fold(0.0, f64::max);
    let mut measured = Vec::with_capacity(qs.len());
    for &q in qs {
        measured.push(measured_d_min(model, Some(receiver), q, limits)?);
    }
    let kappa = qs
        .iter()
        .zip(&measured)
        .map(|(q, d)| d.to_f64() * (*q as f64).powf(2.0 + eps) / c2)
        .fold(f64::INFINITY, f64::min);
    let rows: Vec<ReliabilityRow> = qs
        .iter()
        .zip(measured)
        .map(|(&q, d)| {
            let lambda_log2 = (2.0 + 2.0 * eps) * (q as f64).log2() + lambda_factor.log2();
            let e = lambda_factor * kappa * c2 * (q as f64).powf(eps);
            ReliabilityRow { q, value: reliability(&d, lambda_log2), d_hat: d, lambda_log2, envelope: (-(e * e) / 8.0).exp() }
        })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].value < w[0].value);
    Ok(ReliabilityReport { receiver, eps, lambda_factor, rows, kappa, decaying: kappa > 0.0 && eps > 0.0, monotone })
}
