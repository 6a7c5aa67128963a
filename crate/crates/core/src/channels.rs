//! Channel models with integer-coded messages: the two-user multiple access
//! channel, the two-user X-channel with real interference alignment, the
//! block-aligned three-user interference channel and the multi-antenna
//! matrix builder.
//!
//! Every receiver sees a linear form `lambda * sum_j c_j d_j` whose digits
//! `d_j` are sums of transmitted messages. Constellations, minimum distances,
//! bounds and decoding are computed on that form.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::exactnum::search::{
    abs_interval, for_each_digit_tuple, half_box_size, half_box_tasks, resolve_min, run_half_box_task, FixedVec,
    MinTracker,
};
use crate::linforms::LinearFormMatrix;
use crate::measures::sample_stream;
use crate::{Error, ExactReal, Limits, Result};

/// Largest digit box that full enumeration will materialize.
pub const FULL_ENUMERATION_MAX: u128 = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Mac,
    XChannel,
    Gic,
    MultiAnt,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChannelKind::Mac => "mac",
            ChannelKind::XChannel => "xchannel",
            ChannelKind::Gic => "gic",
            ChannelKind::MultiAnt => "multiant",
        };
        f.write_str(s)
    }
}

/// One transmitted message, uniform on `0..=range`.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub label: String,
    pub range: u64,
}

/// One coordinate of a receiver's form: digit `d = sum of sources`, so
/// `0 <= d <= range`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub label: String,
    pub coeff: ExactReal,
    pub range: u64,
    pub sources: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Receiver {
    pub directions: Vec<Direction>,
}

impl Receiver {
    pub fn coeffs(&self) -> Vec<ExactReal> {
        self.directions.iter().map(|d| d.coeff.clone()).collect()
    }

    pub fn ranges(&self) -> Vec<u64> {
        self.directions.iter().map(|d| d.range).collect()
    }
}

/// Direction bookkeeping of the block-aligned interference channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GicParams {
    pub h: [[ExactReal; 3]; 3],
    pub k: u64,
    pub base: u64,
    pub generators: Vec<ExactReal>,
    /// `map[i][j]` is the generator index of interferer `(i, j)`; unused on
    /// the diagonal.
    pub map: [[usize; 3]; 3],
    pub reduced: bool,
    /// `k^{m_g}`.
    pub nominal_m: u128,
    /// `k^{m_g} + (k+1)^{m_g}`.
    pub nominal_m_prime: u128,
    /// Per receiver: multiplicity of every `s in S_{k+1}`, lexicographic.
    pub multiplicity: Vec<Vec<u8>>,
}

impl GicParams {
    pub fn m_g(&self) -> usize {
        self.generators.len()
    }

    /// `M' - 1`.
    pub fn nominal_n(&self) -> u128 {
        self.nominal_m_prime - 1
    }

    /// Number of unwanted directions with positive multiplicity at receiver `i`.
    pub fn unwanted_support(&self, i: usize) -> usize {
        self.multiplicity[i].iter().filter(|m| **m > 0).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelParams {
    Mac { h1: ExactReal, h2: ExactReal, alpha: ExactReal, beta: ExactReal },
    /// `gains = None` is the aligned encoding; otherwise `(alpha1, beta1, alpha2, beta2)`.
    XChannel { h: [[ExactReal; 2]; 2], gains: Option<[ExactReal; 4]> },
    Gic(GicParams),
    MultiAnt { h: Vec<Vec<ExactReal>>, alpha: Vec<ExactReal> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    /// Message bound (zero for the interference channel, which uses digits).
    pub q: u64,
    pub lambda: ExactReal,
    pub messages: Vec<Message>,
    pub receivers: Vec<Receiver>,
    pub params: ChannelParams,
}

fn cap() -> u32 {
    Limits::default().precision_bits
}

fn require_positive(x: &ExactReal, what: &str) -> Result<()> {
    if x.sign_with(cap())? <= 0 {
        return Err(Error::InvalidArgument(format!("{what} must be positive")));
    }
    Ok(())
}

fn require_lambda(lambda: &ExactReal) -> Result<()> {
    if lambda.cmp_with(&ExactReal::one(), cap())? == Ordering::Less {
        return Err(Error::InvalidArgument("lambda must be at least 1".into()));
    }
    Ok(())
}

fn dir(label: &str, coeff: ExactReal, range: u64, sources: Vec<usize>) -> Direction {
    Direction { label: label.to_string(), coeff, range, sources }
}

fn msg(label: &str, range: u64) -> Message {
    Message { label: label.to_string(), range }
}

fn require_q(q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidArgument("Q must be at least 1".into()));
    }
    Ok(())
}

/// `y = lambda (h1 alpha u1 + h2 beta u2)` with `u1, u2 in 0..=Q`.
pub fn build_mac(
    h1: &ExactReal,
    h2: &ExactReal,
    alpha: &ExactReal,
    beta: &ExactReal,
    q: u64,
    lambda: &ExactReal,
) -> Result<ChannelModel> {
    for (x, w) in [(h1, "h1"), (h2, "h2"), (alpha, "alpha"), (beta, "beta")] {
        require_positive(x, w)?;
    }
    require_lambda(lambda)?;
    require_q(q)?;
    let rx = Receiver {
        directions: vec![dir("u1", h1.mul_ref(alpha), q, vec![0]), dir("u2", h2.mul_ref(beta), q, vec![1])],
    };
    Ok(ChannelModel {
        kind: ChannelKind::Mac,
        q,
        lambda: lambda.clone(),
        messages: vec![msg("u1", q), msg("u2", q)],
        receivers: vec![rx],
        params: ChannelParams::Mac { h1: h1.clone(), h2: h2.clone(), alpha: alpha.clone(), beta: beta.clone() },
    })
}

/// `xi = h1 alpha / (h2 beta)`, inverted when it exceeds one.
pub fn mac_xi(model: &ChannelModel) -> Result<ExactReal> {
    let ChannelParams::Mac { h1, h2, alpha, beta } = &model.params else {
        return Err(Error::InvalidArgument("not a MAC model".into()));
    };
    let xi = h1.mul_ref(alpha).div_ref(&h2.mul_ref(beta))?;
    if xi.cmp_with(&ExactReal::one(), cap())? == Ordering::Greater {
        xi.recip()
    } else {
        Ok(xi)
    }
}

fn check_h2(h: &[[ExactReal; 2]; 2]) -> Result<()> {
    for (i, row) in h.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            require_positive(x, &format!("h{}{}", i + 1, j + 1))?;
        }
    }
    Ok(())
}

const X_MESSAGES: [&str; 4] = ["u1", "v1", "u2", "v2"];

/// Aligned X-channel: transmitter `j` sends `alpha_j u_j + beta_j v_j` with
/// `alpha1 = lambda h22, beta1 = lambda h12, alpha2 = lambda h21, beta2 = lambda h11`.
/// Messages are ordered `(u1, v1, u2, v2)`; `u` is meant for receiver 1.
pub fn build_xchannel(h: &[[ExactReal; 2]; 2], q: u64, lambda: &ExactReal) -> Result<ChannelModel> {
    check_h2(h)?;
    require_lambda(lambda)?;
    require_q(q)?;
    let [[h11, h12], [h21, h22]] = h;
    let r1 = Receiver {
        directions: vec![
            dir("u1", h11.mul_ref(h22), q, vec![0]),
            dir("u2", h21.mul_ref(h12), q, vec![2]),
            dir("v1+v2", h11.mul_ref(h12), 2 * q, vec![1, 3]),
        ],
    };
    let r2 = Receiver {
        directions: vec![
            dir("v1", h21.mul_ref(h12), q, vec![1]),
            dir("v2", h11.mul_ref(h22), q, vec![3]),
            dir("u1+u2", h21.mul_ref(h22), 2 * q, vec![0, 2]),
        ],
    };
    Ok(ChannelModel {
        kind: ChannelKind::XChannel,
        q,
        lambda: lambda.clone(),
        messages: X_MESSAGES.iter().map(|l| msg(l, q)).collect(),
        receivers: vec![r1, r2],
        params: ChannelParams::XChannel { h: h.clone(), gains: None },
    })
}

/// X-channel with explicit gains `(alpha1, beta1, alpha2, beta2)` and no
/// alignment: each receiver sees four directions.
pub fn build_xchannel_unaligned(
    h: &[[ExactReal; 2]; 2],
    gains: &[ExactReal; 4],
    q: u64,
    lambda: &ExactReal,
) -> Result<ChannelModel> {
    check_h2(h)?;
    for g in gains {
        require_positive(g, "gain")?;
    }
    require_lambda(lambda)?;
    require_q(q)?;
    let [a1, b1, a2, b2] = gains;
    let rx = |row: &[ExactReal; 2]| Receiver {
        directions: vec![
            dir("u1", row[0].mul_ref(a1), q, vec![0]),
            dir("v1", row[0].mul_ref(b1), q, vec![1]),
            dir("u2", row[1].mul_ref(a2), q, vec![2]),
            dir("v2", row[1].mul_ref(b2), q, vec![3]),
        ],
    };
    Ok(ChannelModel {
        kind: ChannelKind::XChannel,
        q,
        lambda: lambda.clone(),
        messages: X_MESSAGES.iter().map(|l| msg(l, q)).collect(),
        receivers: vec![rx(&h[0]), rx(&h[1])],
        params: ChannelParams::XChannel { h: h.clone(), gains: Some(gains.clone()) },
    })
}

fn x_h(model: &ChannelModel) -> Result<&[[ExactReal; 2]; 2]> {
    match &model.params {
        ChannelParams::XChannel { h, .. } => Ok(h),
        _ => Err(Error::InvalidArgument("not an X-channel model".into())),
    }
}

/// Generator choice for the interference channel. `Full` uses the six cross
/// gains; `Reduced` lists at most two generators and assigns one to every
/// interferer `(i, j)`, whose gain must equal it.
#[derive(Debug, Clone, PartialEq)]
pub enum GicGenerators {
    Full,
    Reduced { generators: Vec<ExactReal>, map: [[usize; 3]; 3] },
}

/// Exponent vectors of `{0..side-1}^m` in lexicographic order.
fn exponent_box(side: u64, m: usize) -> Vec<Vec<u64>> {
    let w = vec![side as i64 - 1; m];
    let mut out = Vec::new();
    for_each_digit_tuple(&w, |a| out.push(a.iter().map(|x| *x as u64).collect()));
    out
}

fn box_index(s: &[u64], side: u64) -> usize {
    s.iter().fold(0usize, |acc, x| acc * side as usize + *x as usize)
}

fn monomial(gens: &[ExactReal], s: &[u64]) -> Result<ExactReal> {
    let mut acc = ExactReal::one();
    for (g, e) in gens.iter().zip(s) {
        acc = acc.mul_ref(&g.powi(*e as i32)?);
    }
    Ok(acc)
}

fn exponent_label(prefix: &str, s: &[u64]) -> String {
    let body: Vec<String> = s.iter().map(|x| x.to_string()).collect();
    format!("{prefix}[{}]", body.join(","))
}

/// Block-aligned three-user interference channel. User `j` sends one digit
/// `u_{j,s} in 0..B-1` along `T^s` for every `s in S_k`; at receiver `i` the
/// wanted directions are `h_ii T^s` and the unwanted ones `T^{s'}`,
/// `s' in S_{k+1}`, carrying the sum of the interferer digits shifted onto them.
pub fn build_gic(
    h: &[[ExactReal; 3]; 3],
    k: u64,
    base: u64,
    lambda: &ExactReal,
    generators: &GicGenerators,
) -> Result<ChannelModel> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if base < 2 {
        return Err(Error::InvalidArgument("digit base must be at least 2".into()));
    }
    for (i, row) in h.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            require_positive(x, &format!("h{}{}", i + 1, j + 1))?;
        }
    }
    require_lambda(lambda)?;

    let (gens, map, reduced) = match generators {
        GicGenerators::Full => {
            let mut map = [[usize::MAX; 3]; 3];
            let mut gens = Vec::new();
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        map[i][j] = gens.len();
                        gens.push(h[i][j].clone());
                    }
                }
            }
            (gens, map, false)
        }
        GicGenerators::Reduced { generators, map } => {
            if generators.is_empty() || generators.len() > 2 {
                return Err(Error::InvalidArgument("invalid generator map: reduced mode takes 1 or 2 generators".into()));
            }
            let mut m = *map;
            for i in 0..3 {
                for j in 0..3 {
                    if i == j {
                        m[i][j] = usize::MAX;
                        continue;
                    }
                    let g = map[i][j];
                    if g >= generators.len() {
                        return Err(Error::InvalidArgument(format!(
                            "invalid generator map: interferer ({},{}) has no generator",
                            i + 1,
                            j + 1
                        )));
                    }
                    if h[i][j].cmp_with(&generators[g], cap())? != Ordering::Equal {
                        return Err(Error::InvalidArgument(format!(
                            "invalid generator map: h{}{} differs from generator {}",
                            i + 1,
                            j + 1,
                            g + 1
                        )));
                    }
                }
            }
            (generators.clone(), m, true)
        }
    };
    let mg = gens.len();
    let sk = exponent_box(k, mg);
    let sk1 = exponent_box(k + 1, mg);
    let big_m = sk.len();
    let messages: Vec<Message> = (0..3)
        .flat_map(|j| sk.iter().map(move |s| msg(&exponent_label(&format!("u{}", j + 1), s), base - 1)))
        .collect();

    let mut receivers = Vec::with_capacity(3);
    let mut multiplicity = Vec::with_capacity(3);
    for i in 0..3 {
        let mut mult = vec![0u8; sk1.len()];
        let mut sources: Vec<Vec<usize>> = vec![Vec::new(); sk1.len()];
        for j in (0..3).filter(|j| *j != i) {
            let g = map[i][j];
            for (si, s) in sk.iter().enumerate() {
                let mut shifted = s.clone();
                shifted[g] += 1;
                let t = box_index(&shifted, k + 1);
                mult[t] += 1;
                sources[t].push(j * big_m + si);
            }
        }
        let mut directions = Vec::new();
        for (t, s) in sk1.iter().enumerate() {
            if mult[t] > 0 {
                let label = exponent_label("T", s);
                directions.push(dir(&label, monomial(&gens, s)?, mult[t] as u64 * (base - 1), sources[t].clone()));
            }
        }
        for (si, s) in sk.iter().enumerate() {
            let label = exponent_label(&format!("h{}{}*T", i + 1, i + 1), s);
            directions.push(dir(&label, h[i][i].mul_ref(&monomial(&gens, s)?), base - 1, vec![i * big_m + si]));
        }
        receivers.push(Receiver { directions });
        multiplicity.push(mult);
    }
    let nominal_m = (k as u128).pow(mg as u32);
    let nominal_m_prime = nominal_m + ((k + 1) as u128).pow(mg as u32);
    Ok(ChannelModel {
        kind: ChannelKind::Gic,
        q: 0,
        lambda: lambda.clone(),
        messages,
        receivers,
        params: ChannelParams::Gic(GicParams {
            h: h.clone(),
            k,
            base,
            generators: gens,
            map,
            reduced,
            nominal_m,
            nominal_m_prime,
            multiplicity,
        }),
    })
}

fn check_multiant(h: &[Vec<ExactReal>], alpha: &[ExactReal]) -> Result<usize> {
    let n = alpha.len();
    if h.len() != 2 || h.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("expected a 2 x n gain matrix matching the encoder gains".into()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument("need at least 3 transmitters".into()));
    }
    Ok(n)
}

/// The `(n-2) x 2` matrix `(L^{-1} [h_{ij} alpha_j]_{j >= 3})^T` with
/// `L = [[h11 alpha1, h12 alpha2], [h21 alpha1, h22 alpha2]]`.
pub fn build_multiantenna_xi(h: &[Vec<ExactReal>], alpha: &[ExactReal]) -> Result<LinearFormMatrix> {
    let n = check_multiant(h, alpha)?;
    let l = |i: usize, j: usize| h[i][j].mul_ref(&alpha[j]);
    let (a, b, c, d) = (l(0, 0), l(0, 1), l(1, 0), l(1, 1));
    let det = a.mul_ref(&d).sub_ref(&b.mul_ref(&c));
    if det.sign_with(cap())? == 0 {
        return Err(Error::SingularMatrix);
    }
    let mut entries = Vec::with_capacity(2 * (n - 2));
    for j in 2..n {
        let (x, y) = (l(0, j), l(1, j));
        entries.push(d.mul_ref(&x).sub_ref(&b.mul_ref(&y)).div_ref(&det)?);
        entries.push(a.mul_ref(&y).sub_ref(&c.mul_ref(&x)).div_ref(&det)?);
    }
    LinearFormMatrix::new(n - 2, 2, entries)
}

/// Two receivers observing `lambda sum_j h_ij alpha_j u_j`, `u_j in 0..=Q`.
pub fn build_multiantenna(h: &[Vec<ExactReal>], alpha: &[ExactReal], q: u64, lambda: &ExactReal) -> Result<ChannelModel> {
    let n = check_multiant(h, alpha)?;
    for row in h {
        for x in row {
            require_positive(x, "gain")?;
        }
    }
    for a in alpha {
        require_positive(a, "encoder gain")?;
    }
    require_lambda(lambda)?;
    require_q(q)?;
    let receivers = (0..2)
        .map(|i| Receiver {
            directions: (0..n).map(|j| dir(&format!("u{}", j + 1), h[i][j].mul_ref(&alpha[j]), q, vec![j])).collect(),
        })
        .collect();
    Ok(ChannelModel {
        kind: ChannelKind::MultiAnt,
        q,
        lambda: lambda.clone(),
        messages: (0..n).map(|j| msg(&format!("u{}", j + 1), q)).collect(),
        receivers,
        params: ChannelParams::MultiAnt { h: h.to_vec(), alpha: alpha.to_vec() },
    })
}

// ------------------------------------------------------------ constellations

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FullEnumeration,
    DifferenceForm,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::FullEnumeration => "full-enumeration",
            Provenance::DifferenceForm => "difference-form",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Constellation {
    pub receiver: usize,
    /// Unscaled coefficients; received values are `lambda * sum c_j d_j`.
    pub coeffs: Vec<ExactReal>,
    pub ranges: Vec<u64>,
    pub lambda: ExactReal,
    /// Number of digit tuples.
    pub tuples: u128,
    /// Distinct values (full enumeration only).
    pub value_count: Option<u64>,
    /// Tuples minus distinct values (full enumeration only).
    pub collisions: Option<u64>,
    pub collision: bool,
    /// Scaled minimum distance; zero when two tuples collide.
    pub d_min: ExactReal,
    /// A nonzero difference vector attaining `d_min`.
    pub witness: Vec<i64>,
    pub provenance: Provenance,
    reps: Vec<u64>,
    class_of: Vec<u32>,
}

impl Constellation {
    fn digits(&self, mut idx: u64) -> Vec<u64> {
        let mut d = vec![0u64; self.ranges.len()];
        for j in (0..self.ranges.len()).rev() {
            let r = self.ranges[j] + 1;
            d[j] = idx % r;
            idx /= r;
        }
        d
    }

    /// Representative digit tuples of the distinct values, ascending.
    pub fn representatives(&self) -> Vec<Vec<u64>> {
        self.reps.iter().map(|r| self.digits(*r)).collect()
    }

    /// Exact scaled value of the `k`-th distinct outcome.
    pub fn value(&self, k: usize) -> ExactReal {
        let d: Vec<i64> = self.digits(self.reps[k]).iter().map(|x| *x as i64).collect();
        form_value(&self.coeffs, &d).mul_ref(&self.lambda)
    }

    pub fn values(&self) -> Vec<ExactReal> {
        (0..self.reps.len()).map(|k| self.value(k)).collect()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        let c: Vec<f64> = self.coeffs.iter().map(|c| c.to_f64()).collect();
        let l = self.lambda.to_f64();
        self.reps
            .iter()
            .map(|r| l * self.digits(*r).iter().zip(&c).map(|(d, c)| *d as f64 * c).sum::<f64>())
            .collect()
    }

    /// Index of the distinct value taken by a digit tuple (full enumeration only).
    pub fn class_of(&self, digits: &[u64]) -> Option<usize> {
        if self.class_of.is_empty() {
            return None;
        }
        let idx = digits.iter().zip(&self.ranges).fold(0u64, |acc, (d, r)| acc * (r + 1) + d);
        Some(self.class_of[idx as usize] as usize)
    }
}

fn form_value(coeffs: &[ExactReal], a: &[i64]) -> ExactReal {
    let mut acc = ExactReal::zero();
    for (c, x) in coeffs.iter().zip(a) {
        if *x != 0 {
            acc = acc.add_ref(&c.mul_int(*x));
        }
    }
    acc
}

fn box_count(ranges: &[u64], mul: u128) -> u128 {
    ranges.iter().fold(1u128, |acc, r| acc.saturating_mul(mul * *r as u128 + 1))
}

fn receiver_of(model: &ChannelModel, i: usize) -> Result<&Receiver> {
    model
        .receivers
        .get(i)
        .ok_or_else(|| Error::InvalidArgument(format!("receiver {} does not exist", i + 1)))
}

/// Full enumeration when the digit box fits the work limit, otherwise the
/// difference form.
pub fn constellation(model: &ChannelModel, i: usize, limits: &Limits) -> Result<Constellation> {
    let rx = receiver_of(model, i)?;
    let n = box_count(&rx.ranges(), 1);
    if n <= limits.work as u128 && n <= FULL_ENUMERATION_MAX {
        constellation_full(model, i, limits)
    } else {
        constellation_difference(model, i, limits)
    }
}

/// Enumerates every digit tuple, groups equal values exactly and takes the
/// least gap between consecutive distinct values.
pub fn constellation_full(model: &ChannelModel, i: usize, limits: &Limits) -> Result<Constellation> {
    let rx = receiver_of(model, i)?;
    let cap = limits.precision_bits;
    let coeffs = rx.coeffs();
    let ranges = rx.ranges();
    let n = box_count(&ranges, 1);
    limits.check_work(n)?;
    if n > FULL_ENUMERATION_MAX {
        return Err(Error::WorkLimit { required: n, limit: FULL_ENUMERATION_MAX as u64 });
    }
    if n < 2 {
        return Err(Error::InvalidArgument("constellation has a single point".into()));
    }
    let fx = FixedVec::new(&coeffs, &ranges, 0, cap)?;
    let w: Vec<i64> = ranges.iter().map(|r| *r as i64).collect();
    let mut pts: Vec<(i128, i128, u64)> = Vec::with_capacity(n as usize);
    let mut idx = 0u64;
    for_each_digit_tuple(&w, |d| {
        let (lo, hi) = fx.dot(d);
        pts.push((lo, hi, idx));
        idx += 1;
    });
    pts.par_sort_unstable();

    let value_of = |idx: u64| -> ExactReal {
        let mut d = vec![0i64; ranges.len()];
        let mut r = idx;
        for j in (0..ranges.len()).rev() {
            d[j] = (r % (ranges[j] + 1)) as i64;
            r /= ranges[j] + 1;
        }
        form_value(&coeffs, &d)
    };

    // Distinct classes in ascending order, each with a representative and
    // the enclosure of that representative.
    let mut reps: Vec<(u64, i128, i128)> = Vec::new();
    let mut class_of = vec![0u32; n as usize];
    let mut start = 0usize;
    while start < pts.len() {
        let mut end = start + 1;
        let mut top = pts[start].1;
        while end < pts.len() && pts[end].0 <= top {
            top = top.max(pts[end].1);
            end += 1;
        }
        let cluster = &pts[start..end];
        if cluster.len() == 1 || fx.exact {
            // Exact enclosures: equal lower ends mean equal values.
            let mut k = 0;
            while k < cluster.len() {
                let mut e = k + 1;
                while e < cluster.len() && cluster[e].0 == cluster[k].0 {
                    e += 1;
                }
                let rep = cluster[k..e].iter().map(|p| p.2).min().unwrap();
                let c = reps.len() as u32;
                for p in &cluster[k..e] {
                    class_of[p.2 as usize] = c;
                }
                reps.push((rep, cluster[k].0, cluster[k].1));
                k = e;
            }
        } else {
            let mut vals: Vec<(ExactReal, u64, i128, i128)> =
                cluster.iter().map(|p| (value_of(p.2), p.2, p.0, p.1)).collect();
            let mut err = None;
            vals.sort_by(|a, b| match a.0.cmp_with(&b.0, cap) {
                Ok(Ordering::Equal) => a.1.cmp(&b.1),
                Ok(o) => o,
                Err(e) => {
                    err = Some(e);
                    Ordering::Equal
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            let mut k = 0;
            while k < vals.len() {
                let mut e = k + 1;
                while e < vals.len() && vals[e].0.cmp_with(&vals[k].0, cap)? == Ordering::Equal {
                    e += 1;
                }
                let c = reps.len() as u32;
                for v in &vals[k..e] {
                    class_of[v.1 as usize] = c;
                }
                reps.push((vals[k].1, vals[k].2, vals[k].3));
                k = e;
            }
        }
        start = end;
    }

    let collisions = (n - reps.len() as u128) as u64;
    let (d_min, witness) = if collisions > 0 {
        let c = class_of.iter().enumerate().collect::<Vec<_>>();
        let mut seen: Vec<Option<u64>> = vec![None; reps.len()];
        let mut pair = (0u64, 0u64);
        for (idx, cl) in c {
            match seen[*cl as usize] {
                Some(first) => {
                    pair = (idx as u64, first);
                    break;
                }
                None => seen[*cl as usize] = Some(idx as u64),
            }
        }
        (ExactReal::zero(), difference_of(&ranges, pair.0, pair.1))
    } else {
        let mut tr = MinTracker::new();
        for k in 0..reps.len() - 1 {
            let (_, lo0, hi0) = reps[k];
            let (_, lo1, hi1) = reps[k + 1];
            let (a, b) = abs_interval(lo1 - hi0, hi1 - lo0);
            tr.push(k, a, b);
        }
        let gap = |k: &usize| value_of(reps[*k + 1].0).sub_ref(&value_of(reps[*k].0)).abs_with(cap);
        let (k, v) = resolve_min(tr.finish(), fx.exact, gap, cap)?.expect("at least two values");
        (v.mul_ref(&model.lambda), difference_of(&ranges, reps[k + 1].0, reps[k].0))
    };
    Ok(Constellation {
        receiver: i,
        coeffs,
        ranges,
        lambda: model.lambda.clone(),
        tuples: n,
        value_count: Some(reps.len() as u64),
        collisions: Some(collisions),
        collision: collisions > 0,
        d_min,
        witness,
        provenance: Provenance::FullEnumeration,
        reps: reps.into_iter().map(|r| r.0).collect(),
        class_of,
    })
}

fn difference_of(ranges: &[u64], a: u64, b: u64) -> Vec<i64> {
    let (mut a, mut b) = (a, b);
    let mut out = vec![0i64; ranges.len()];
    for j in (0..ranges.len()).rev() {
        let r = ranges[j] + 1;
        out[j] = (a % r) as i64 - (b % r) as i64;
        a /= r;
        b /= r;
    }
    out
}

/// `lambda * min |sum c_j a_j|` over nonzero `a` with `|a_j| <= W_j`. Every
/// such `a` is a difference of two digit tuples, so this is the minimum
/// distance; a zero minimum is a collision.
pub fn constellation_difference(model: &ChannelModel, i: usize, limits: &Limits) -> Result<Constellation> {
    let rx = receiver_of(model, i)?;
    let cap = limits.precision_bits;
    let coeffs = rx.coeffs();
    let ranges = rx.ranges();
    let n = box_count(&ranges, 1);
    let w: Vec<i64> = ranges.iter().map(|r| *r as i64).collect();
    limits.check_work(box_count(&ranges, 2))?;
    if half_box_size(&w) == 0 {
        return Err(Error::InvalidArgument("constellation has a single point".into()));
    }
    let fx = FixedVec::new(&coeffs, &ranges, 0, cap)?;
    let tracker = half_box_tasks(&w)
        .into_par_iter()
        .map(|task| {
            let mut tr = MinTracker::new();
            run_half_box_task(&w, task, |a| {
                let (lo, hi) = fx.dot(a);
                let (x, y) = abs_interval(lo, hi);
                if x <= tr.best_hi() {
                    tr.push(a.to_vec(), x, y);
                }
            });
            tr
        })
        .reduce(MinTracker::new, MinTracker::merge);
    let value = |a: &Vec<i64>| form_value(&coeffs, a).abs_with(cap);
    let (a, v) = resolve_min(tracker.finish(), fx.exact, value, cap)?.expect("nonempty box");
    let collision = v.is_zero();
    Ok(Constellation {
        receiver: i,
        coeffs,
        ranges,
        lambda: model.lambda.clone(),
        tuples: n,
        value_count: None,
        collisions: None,
        collision,
        d_min: v.mul_ref(&model.lambda),
        witness: a,
        provenance: Provenance::DifferenceForm,
        reps: Vec::new(),
        class_of: Vec::new(),
    })
}

// ------------------------------------------------------------------- bounds

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    /// Separation if the outcomes were equally spaced.
    pub perfect_separation: ExactReal,
    /// Upper bound on the minimum distance (a scale only for the
    /// interference channel).
    pub upper_bound: Option<ExactReal>,
    /// The constant of the upper bound, before scaling by `lambda`.
    pub constant: Option<ExactReal>,
    pub upper_is_scale: bool,
}

fn max_of(xs: &[ExactReal]) -> Result<ExactReal> {
    let mut m = xs[0].clone();
    for x in &xs[1..] {
        m = m.max_with(x, cap())?;
    }
    Ok(m)
}

fn equal_spacing(rx: &Receiver, lambda: &ExactReal) -> Result<ExactReal> {
    let mut span = ExactReal::zero();
    for d in &rx.directions {
        span = span.add_ref(&d.coeff.mul_ref(&ExactReal::from_bigint(BigInt::from(d.range))));
    }
    let count = box_count(&rx.ranges(), 1);
    let gaps = ExactReal::from_bigint(BigInt::from(count - 1));
    span.mul_ref(lambda).div_ref(&gaps)
}

fn int(v: u128) -> ExactReal {
    ExactReal::from_bigint(BigInt::from(v))
}

pub fn theoretical_bounds(model: &ChannelModel, i: usize) -> Result<Bounds> {
    let rx = receiver_of(model, i)?;
    let l = &model.lambda;
    let q = model.q as u128;
    match &model.params {
        ChannelParams::Mac { .. } => {
            let c = rx.coeffs();
            let perfect = c[0].add_ref(&c[1]).mul_ref(l).div_ref(&int(q + 2))?;
            let c1 = max_of(&c)?;
            let upper = c1.mul_ref(l).div_ref(&int(q))?;
            Ok(Bounds { perfect_separation: perfect, upper_bound: Some(upper), constant: Some(c1), upper_is_scale: false })
        }
        ChannelParams::XChannel { gains: None, .. } => {
            let c = rx.coeffs();
            let span = c[0].add_ref(&c[1]).add_ref(&c[2].mul_int(2));
            let perfect = span.mul_ref(l).mul_ref(&int(q)).div_ref(&int((2 * q + 1) * (q + 1) * (q + 1)))?;
            let c2 = max_of(&c)?;
            let upper = c2.mul_ref(l).div_ref(&int(q * q))?;
            Ok(Bounds { perfect_separation: perfect, upper_bound: Some(upper), constant: Some(c2), upper_is_scale: false })
        }
        ChannelParams::Gic(g) => {
            let c = rx.coeffs();
            let big = max_of(&c)?;
            let n_act = rx.directions.len() as u32 - 1;
            let scale = big.mul_ref(l).div_ref(&int((g.base as u128).pow(n_act)))?;
            Ok(Bounds {
                perfect_separation: equal_spacing(rx, l)?,
                upper_bound: Some(scale),
                constant: Some(big),
                upper_is_scale: true,
            })
        }
        _ => Ok(Bounds { perfect_separation: equal_spacing(rx, l)?, upper_bound: None, constant: None, upper_is_scale: false }),
    }
}

// ----------------------------------------------------------- derived points

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DerivedWhich {
    Xi,
    XiA,
    XiB,
    XiPrime,
    XiPrimeA,
    XiPrimeB,
}

impl DerivedWhich {
    pub const ALL: [DerivedWhich; 6] = [
        DerivedWhich::Xi,
        DerivedWhich::XiA,
        DerivedWhich::XiB,
        DerivedWhich::XiPrime,
        DerivedWhich::XiPrimeA,
        DerivedWhich::XiPrimeB,
    ];

    pub fn is_prime(self) -> bool {
        matches!(self, DerivedWhich::XiPrime | DerivedWhich::XiPrimeA | DerivedWhich::XiPrimeB)
    }
}

impl fmt::Display for DerivedWhich {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DerivedWhich::Xi => "xi",
            DerivedWhich::XiA => "xi-a",
            DerivedWhich::XiB => "xi-b",
            DerivedWhich::XiPrime => "xi'",
            DerivedWhich::XiPrimeA => "xi'-a",
            DerivedWhich::XiPrimeB => "xi'-b",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedPoint {
    pub which: DerivedWhich,
    pub point: [ExactReal; 2],
}

/// The five maps relating the receiver-1 and receiver-2 points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FMap {
    /// `(1/x, 1/y)`
    Inverse,
    /// `(x, x/y)`
    KeepX,
    /// `(x/y, x)`
    RatioX,
    /// `(y, y/x)`
    KeepY,
    /// `(y/x, y)`
    RatioY,
}

impl FMap {
    pub const ALL: [FMap; 5] = [FMap::Inverse, FMap::KeepX, FMap::RatioX, FMap::KeepY, FMap::RatioY];

    pub fn apply(self, p: &[ExactReal; 2]) -> Result<[ExactReal; 2]> {
        let [x, y] = p;
        Ok(match self {
            FMap::Inverse => [x.recip()?, y.recip()?],
            FMap::KeepX => [x.clone(), x.div_ref(y)?],
            FMap::RatioX => [x.div_ref(y)?, x.clone()],
            FMap::KeepY => [y.clone(), y.div_ref(x)?],
            FMap::RatioY => [y.div_ref(x)?, y.clone()],
        })
    }
}

impl fmt::Display for FMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FMap::Inverse => "(1/x,1/y)",
            FMap::KeepX => "(x,x/y)",
            FMap::RatioX => "(x/y,x)",
            FMap::KeepY => "(y,y/x)",
            FMap::RatioY => "(y/x,y)",
        })
    }
}

/// The three receiver-1 points and the three receiver-2 points of the
/// aligned X-channel.
pub fn derived_points(model: &ChannelModel) -> Result<Vec<DerivedPoint>> {
    let [[h11, h12], [h21, h22]] = x_h(model)?;
    let a = h11.mul_ref(h22);
    let b = h21.mul_ref(h12);
    let pt = |which, x: ExactReal, y: ExactReal| DerivedPoint { which, point: [x, y] };
    Ok(vec![
        pt(DerivedWhich::Xi, h22.div_ref(h12)?, h21.div_ref(h11)?),
        pt(DerivedWhich::XiA, b.div_ref(&a)?, h12.div_ref(h22)?),
        pt(DerivedWhich::XiB, a.div_ref(&b)?, h11.div_ref(h21)?),
        pt(DerivedWhich::XiPrime, h12.div_ref(h22)?, h11.div_ref(h21)?),
        pt(DerivedWhich::XiPrimeA, a.div_ref(&b)?, h22.div_ref(h12)?),
        pt(DerivedWhich::XiPrimeB, b.div_ref(&a)?, h21.div_ref(h11)?),
    ])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FMapPairing {
    pub map: FMap,
    pub xi: DerivedWhich,
    pub xi_prime: DerivedWhich,
}

/// Every pairing `xi' = f(xi)` that holds exactly.
pub fn fmap_pairings(points: &[DerivedPoint], cap: u32) -> Result<Vec<FMapPairing>> {
    let mut out = Vec::new();
    for f in FMap::ALL {
        for p in points.iter().filter(|p| !p.which.is_prime()) {
            let img = f.apply(&p.point)?;
            for t in points.iter().filter(|t| t.which.is_prime()) {
                if img[0].cmp_with(&t.point[0], cap)? == Ordering::Equal
                    && img[1].cmp_with(&t.point[1], cap)? == Ordering::Equal
                {
                    out.push(FMapPairing { map: f, xi: p.which, xi_prime: t.which });
                }
            }
        }
    }
    Ok(out)
}

// -------------------------------------------------------- noise and decoding

/// `Prob(|z| >= d/2)` for `z ~ N(0, 1)`.
pub fn analytic_error_prob(d: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    libm::erfc(d / (2.0 * std::f64::consts::SQRT_2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    Gaussian,
    /// Noise forced to zero.
    Zero,
    /// Samples with `|z| >= d_min / 2` are discarded.
    BelowHalfDistance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerEstimate {
    pub rate: f64,
    pub errors: u64,
    /// Samples decoded.
    pub samples: u64,
    /// Samples discarded by the noise filter.
    pub filtered: u64,
    /// Decodes that fell exactly between two outcomes.
    pub ties: u64,
    /// `4 sqrt(p(1-p)/N)`.
    pub radius: f64,
    pub seed: u64,
}

const SER_CHUNK: u64 = 1 << 14;

/// Sends uniform messages, adds unit Gaussian noise and decodes to the
/// nearest outcome (ties to the lower value). Sample `i` uses its own
/// generator seeded from `(seed, i)`.
pub fn mc_symbol_error_rate(
    model: &ChannelModel,
    con: &Constellation,
    n: u64,
    seed: u64,
    noise: NoiseMode,
) -> Result<SerEstimate> {
    let rx = receiver_of(model, con.receiver)?;
    if con.class_of.is_empty() {
        return Err(Error::WorkLimit { required: con.tuples, limit: FULL_ENUMERATION_MAX as u64 });
    }
    if rx.ranges() != con.ranges {
        return Err(Error::InvalidArgument("constellation does not belong to this model".into()));
    }
    let vals = con.values_f64();
    let half = con.d_min.to_f64() / 2.0;
    let chunks = n.div_ceil(SER_CHUNK);
    let (errors, samples, filtered, ties) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = (0u64, 0u64, 0u64, 0u64);
            let mut m = vec![0u64; model.messages.len()];
            let mut d = vec![0u64; rx.directions.len()];
            for i in c * SER_CHUNK..((c + 1) * SER_CHUNK).min(n) {
                let mut rng = ChaCha8Rng::seed_from_u64(sample_stream(seed, i));
                for (x, msg) in m.iter_mut().zip(&model.messages) {
                    *x = rng.random_range(0..=msg.range);
                }
                let z: f64 = match noise {
                    NoiseMode::Zero => 0.0,
                    _ => rng.sample(StandardNormal),
                };
                if noise == NoiseMode::BelowHalfDistance && z.abs() >= half {
                    acc.2 += 1;
                    continue;
                }
                for (x, dir) in d.iter_mut().zip(&rx.directions) {
                    *x = dir.sources.iter().map(|s| m[*s]).sum();
                }
                let sent = con.class_of(&d).expect("class table present");
                let (got, tie) = nearest(&vals, vals[sent] + z);
                acc.1 += 1;
                if got != sent {
                    acc.0 += 1;
                }
                if tie {
                    acc.3 += 1;
                }
            }
            acc
        })
        .reduce(|| (0, 0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    let rate = if samples == 0 { 0.0 } else { errors as f64 / samples as f64 };
    let radius = if samples == 0 { 0.0 } else { 4.0 * (rate * (1.0 - rate) / samples as f64).sqrt() };
    Ok(SerEstimate { rate, errors, samples, filtered, ties, radius, seed })
}

/// Nearest entry of an ascending list; ties go to the lower entry.
fn nearest(vals: &[f64], y: f64) -> (usize, bool) {
    let k = vals.partition_point(|v| *v < y);
    if k == 0 {
        return (0, false);
    }
    if k == vals.len() {
        return (k - 1, false);
    }
    let below = y - vals[k - 1];
    let above = vals[k] - y;
    match below.partial_cmp(&above) {
        Some(Ordering::Greater) => (k, false),
        Some(Ordering::Equal) => (k - 1, true),
        _ => (k - 1, false),
    }
}

// ------------------------------------------------------ separation constants

#[derive(Debug, Clone, PartialEq)]
pub struct KgRow {
    pub q: u64,
    pub d_min: ExactReal,
    /// `d_min Q^{2+eps} / (C2 lambda)`.
    pub ratio: f64,
    pub passes: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KgReport {
    pub receiver: usize,
    pub eps: f64,
    pub kappa: Option<f64>,
    pub rows: Vec<KgRow>,
    /// Least ratio over the sweep: the largest `kappa` for which every `Q` passes.
    pub empirical_kappa: f64,
    pub all_pass: Option<bool>,
}

/// Checks `d_min(Q) >= kappa C2 lambda / Q^{2+eps}` with exact minimum
/// distances of the aligned X-channel.
pub fn kg_separation_check(
    model: &ChannelModel,
    i: usize,
    qs: &[u64],
    eps: f64,
    kappa: Option<f64>,
    limits: &Limits,
) -> Result<KgReport> {
    let h = x_h(model)?;
    if qs.is_empty() {
        return Err(Error::InvalidArgument("empty Q list".into()));
    }
    let mut rows = Vec::with_capacity(qs.len());
    for &q in qs {
        let m = build_xchannel(h, q, &model.lambda)?;
        let con = constellation_difference(&m, i, limits)?;
        let c2l = max_of(&m.receivers[i].coeffs())?.mul_ref(&m.lambda).to_f64();
        let ratio = con.d_min.to_f64() * (q as f64).powf(2.0 + eps) / c2l;
        rows.push(KgRow { q, d_min: con.d_min, ratio, passes: kappa.map(|k| ratio >= k) });
    }
    let empirical_kappa = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let all_pass = kappa.map(|_| rows.iter().all(|r| r.passes == Some(true)));
    Ok(KgReport { receiver: i, eps, kappa, rows, empirical_kappa, all_pass })
}

/// `h1 + h2 = 1` normalization helper: `(h, 1 - h)`.
pub fn normalized_pair(h1: &BigRational) -> Result<(ExactReal, ExactReal)> {
    let a = ExactReal::from_rational(h1.clone());
    let b = ExactReal::one().sub_ref(&a);
    require_positive(&a, "h1")?;
    require_positive(&b, "h2")?;
    Ok((a, b))
}
