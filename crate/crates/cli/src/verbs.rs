//! Verb implementations: typed parameter access and one report per run.

use std::cmp::Ordering;
use std::str::FromStr;

use dioph_core::channels::{
    analytic_error_prob, build_gic, build_mac, build_multiantenna, build_multiantenna_xi, build_xchannel,
    build_xchannel_unaligned, constellation, constellation_difference, constellation_full, derived_points,
    fmap_pairings, kg_separation_check, mac_xi, mc_symbol_error_rate, theoretical_bounds, ChannelKind, ChannelModel,
    Constellation, GicGenerators, NoiseMode,
};
use dioph_core::dof::{gic_dof_formula, xchannel_dof_sweep};
use dioph_core::exactnum::cf::{cf_expand, convergents};
use dioph_core::exactnum::dirichlet::{dirichlet_approx, dirichlet_sweep};
use dioph_core::latdyn::{
    dani_consistency, escape_set, shortest_sup_vector, z_membership, DaniOutcome, Dominant, OrbitLattice, Time,
};
use dioph_core::linforms::{
    dirichlet_bound, effective_lower_bound_with, joint_profile, joint_witness, one_form_profile, one_form_witness,
    system_witness, BoundVariant, LinearFormMatrix, PsiFamily,
};
use dioph_core::measures::{b1_report, mc_probability, totient_sum_report, Event, Verdict};
use dioph_core::{ExactReal, Limits};
use num_rational::BigRational;

use crate::config::{parse_config_text, RunConfig};
use crate::report::{Cell, Report};
use crate::CliError;

type R<T> = Result<T, CliError>;

/// Typed view of a resolved configuration.
pub struct Params<'a> {
    cfg: &'a RunConfig,
}

fn bad(key: &str, v: &str, why: &str) -> CliError {
    CliError::Parse(format!("--{key} `{v}`: {why}"))
}

impl<'a> Params<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        Params { cfg }
    }

    pub fn opt(&self, key: &str) -> Option<&'a str> {
        self.cfg.get(key)
    }

    pub fn req(&self, key: &str) -> R<&'a str> {
        self.opt(key).ok_or_else(|| CliError::Parse(format!("missing --{key}")))
    }

    pub fn u64(&self, key: &str) -> R<u64> {
        let v = self.req(key)?;
        v.trim().parse().map_err(|_| bad(key, v, "expected a non-negative integer"))
    }

    pub fn f64(&self, key: &str) -> R<f64> {
        let v = self.req(key)?;
        parse_f64(key, v)
    }

    pub fn opt_f64(&self, key: &str) -> R<Option<f64>> {
        self.opt(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn bool(&self, key: &str) -> R<bool> {
        let v = self.req(key)?;
        match v.trim() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(bad(key, v, "expected true or false")),
        }
    }

    pub fn real(&self, key: &str) -> R<ExactReal> {
        let v = self.req(key)?;
        Ok(ExactReal::from_str(v)?)
    }

    pub fn rational(&self, key: &str) -> R<BigRational> {
        let v = self.req(key)?;
        ExactReal::from_str(v)?.as_rational().ok_or_else(|| bad(key, v, "expected a rational"))
    }

    pub fn reals(&self, key: &str) -> R<Vec<ExactReal>> {
        reals_of(self.req(key)?)
    }

    pub fn matrix(&self, key: &str) -> R<Vec<Vec<ExactReal>>> {
        self.req(key)?.split(';').map(reals_of).collect()
    }

    pub fn u64_list(&self, key: &str) -> R<Vec<u64>> {
        let v = self.req(key)?;
        let mut out = Vec::new();
        for part in v.split(',') {
            let part = part.trim();
            let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad(key, v, "expected integers or a..b ranges"));
            match part.split_once("..") {
                Some((a, b)) => {
                    let (a, b) = (num(a)?, num(b)?);
                    if a > b {
                        return Err(bad(key, v, "empty range"));
                    }
                    out.extend(a..=b);
                }
                None => out.push(num(part)?),
            }
        }
        Ok(out)
    }

    pub fn time(&self, key: &str) -> R<Time> {
        Ok(Time::from_str(self.req(key)?)?)
    }

    pub fn limits(&self) -> R<Limits> {
        let bits = self.u64("precision")?;
        let bits = u32::try_from(bits).map_err(|_| bad("precision", &bits.to_string(), "too large"))?;
        Ok(Limits::default().with_work(self.u64("work")?).with_precision(bits))
    }

    pub fn family(&self) -> R<PsiFamily> {
        match self.req("family")? {
            "power" => Ok(PsiFamily::Power),
            "log" => Ok(PsiFamily::Log),
            v => Err(bad("family", v, "expected power or log")),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> R<f64> {
    let t = v.trim();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    // Rational and surd shorthands are accepted where a float is expected.
    ExactReal::from_str(t).map(|x| x.to_f64()).map_err(|_| bad(key, v, "expected a number"))
}

fn reals_of(s: &str) -> R<Vec<ExactReal>> {
    s.split(',').map(|x| Ok(ExactReal::from_str(x)?)).collect()
}

pub fn run(cfg: &RunConfig) -> R<Report> {
    let p = Params::new(cfg);
    match cfg.verb.path {
        ["dirichlet"] => dirichlet(&p),
        ["cf"] => cf(&p),
        ["profile"] => profile(&p),
        ["witness"] => witness(&p),
        ["joint-profile"] => joint(&p),
        ["bound"] => bound(&p),
        ["measure-b1"] => measure_b1(&p),
        ["totient-sum"] => totient(&p),
        ["mc"] => mc(&p),
        ["orbit"] => orbit(&p),
        ["channel", kind] => channel(&p, kind),
        ["dof", "xchannel"] => dof_xchannel(&p),
        ["dof", "gic"] => dof_gic(&p),
        _ => Err(CliError::Usage(format!("unknown verb `{}`", cfg.verb_name()))),
    }
}

// ------------------------------------------------------------ approximation

fn dirichlet(p: &Params) -> R<Report> {
    let xi = p.real("xi")?;
    let big_q = p.u64("Q")?;
    let limits = p.limits()?;
    let rows = if p.bool("sweep")? {
        dirichlet_sweep(&xi, big_q, &limits)?
    } else {
        vec![dirichlet_approx(&xi, big_q, &limits)?]
    };
    let first_q = big_q + 1 - rows.len() as u64;
    let mut r = Report::new(&["Q", "q", "p", "distance", "distance_f64", "profile", "profile_f64"]);
    for (k, w) in rows.iter().enumerate() {
        let qq = first_q + k as u64;
        let prof = w.distance.mul_int(qq as i64);
        r.push(vec![
            Cell::Int(qq as i128),
            Cell::Int(w.q as i128),
            Cell::Text(w.p.to_string()),
            Cell::exact(&w.distance),
            Cell::Real(w.distance.to_f64()),
            Cell::exact(&prof),
            Cell::Real(prof.to_f64()),
        ]);
    }
    Ok(r)
}

fn cf(p: &Params) -> R<Report> {
    let xi = p.real("xi")?;
    let depth = p.u64("depth")? as usize;
    let e = cf_expand(&xi, depth, &p.limits()?)?;
    let mut r = Report::new(&["k", "a", "p", "q", "terminated"]);
    for (c, a) in convergents(&e.quotients).iter().zip(&e.quotients) {
        r.push(vec![
            Cell::Int(c.k as i128),
            Cell::Text(a.to_string()),
            Cell::Text(c.p.to_string()),
            Cell::Text(c.q.to_string()),
            Cell::Bool(e.terminated),
        ]);
    }
    Ok(r)
}

fn profile(p: &Params) -> R<Report> {
    let xi = p.reals("xi")?;
    let big_q = p.u64("Q")?;
    let limits = p.limits()?;
    let w = one_form_witness(&xi, big_q, &limits)?;
    let prof = one_form_profile(&xi, big_q, &limits)?;
    let mut r = Report::new(&["n", "Q", "q", "p", "value", "value_f64", "profile", "profile_f64", "bound"]);
    r.push(vec![
        Cell::Int(xi.len() as i128),
        Cell::Int(big_q as i128),
        Cell::ints(&w.q),
        Cell::ints(&w.p),
        Cell::exact(&w.value),
        Cell::Real(w.value.to_f64()),
        Cell::exact(&prof),
        Cell::Real(prof.to_f64()),
        Cell::Real(dirichlet_bound(xi.len(), 1, big_q)),
    ]);
    Ok(r)
}

fn form_matrix(p: &Params) -> R<LinearFormMatrix> {
    let rows = p.matrix("xi")?;
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(bad("xi", p.req("xi")?, "rows differ in length"));
    }
    Ok(LinearFormMatrix::new(rows.len(), m, rows.concat())?)
}

fn witness(p: &Params) -> R<Report> {
    let xi = form_matrix(p)?;
    let big_q = p.u64("Q")?;
    let w = system_witness(&xi, big_q, &p.limits()?)?;
    let mut r = Report::new(&["n", "m", "Q", "q", "p", "value", "value_f64", "bound"]);
    r.push(vec![
        Cell::Int(xi.n() as i128),
        Cell::Int(xi.m() as i128),
        Cell::Int(big_q as i128),
        Cell::ints(&w.q),
        Cell::ints(&w.p),
        Cell::exact(&w.value),
        Cell::Real(w.value.to_f64()),
        Cell::Real(dirichlet_bound(xi.n(), xi.m(), big_q)),
    ]);
    Ok(r)
}

fn joint(p: &Params) -> R<Report> {
    let xi = form_matrix(p)?;
    let big_q = p.u64("Q")?;
    let limits = p.limits()?;
    let w = joint_witness(&xi, big_q, &limits)?;
    let prof = joint_profile(&xi, big_q, &limits)?;
    let mut r = Report::new(&["n", "m", "Q", "q", "column", "p", "value", "value_f64", "profile", "profile_f64"]);
    r.push(vec![
        Cell::Int(xi.n() as i128),
        Cell::Int(xi.m() as i128),
        Cell::Int(big_q as i128),
        Cell::ints(&w.q),
        Cell::Int(w.column as i128 + 1),
        Cell::Int(w.p as i128),
        Cell::exact(&w.value),
        Cell::Real(w.value.to_f64()),
        Cell::exact(&prof),
        Cell::Real(prof.to_f64()),
    ]);
    Ok(r)
}

fn bound(p: &Params) -> R<Report> {
    let variant_name = p.req("variant")?;
    let n = p.u64("n")? as u32;
    let variant = match variant_name {
        "mum2" => BoundVariant::Mum2 { n, big_q: p.u64("Q")?, kappa: p.rational("kappa")? },
        "ekg" => BoundVariant::Ekg { n, kappa: p.f64("kappa")?, family: p.family()?, eps: p.f64("eps")? },
        "eff" => BoundVariant::Eff {
            n,
            m: p.u64("m")? as u32,
            kappa: p.f64("kappa")?,
            family: p.family()?,
            eps: p.f64("eps")?,
        },
        v => return Err(bad("variant", v, "expected mum2, ekg or eff")),
    };
    let b = effective_lower_bound_with(&variant, p.u64("terms")?)?;
    let mut r = Report::new(&["variant", "value", "exact", "truncated_sum", "tail_bound", "terms"]);
    r.push(vec![
        Cell::Text(variant_name.into()),
        Cell::Real(b.value),
        Cell::opt(b.exact.as_ref(), Cell::rational),
        Cell::Real(b.truncated_sum),
        Cell::Real(b.tail_bound),
        Cell::Int(b.terms as i128),
    ]);
    Ok(r)
}

// ----------------------------------------------------------------- measures

fn measure_b1(p: &Params) -> R<Report> {
    let big_q = p.u64("Q")?;
    let kappa = p.rational("kappa")?;
    let b = b1_report(big_q, &kappa)?;
    let mut r = Report::new(&["Q", "kappa", "exact", "exact_f64", "union_bound", "asymptotic", "asymptotic_holds"]);
    use num_traits::ToPrimitive;
    r.push(vec![
        Cell::Int(big_q as i128),
        Cell::rational(&kappa),
        Cell::rational(&b.exact),
        Cell::Real(b.exact.to_f64().unwrap_or(f64::NAN)),
        Cell::rational(&b.union_bound),
        Cell::Real(b.asymptotic),
        Cell::Bool(b.asymptotic_holds),
    ]);
    Ok(r)
}

fn totient(p: &Params) -> R<Report> {
    let t = totient_sum_report(p.u64("Q")?)?;
    let mut r = Report::new(&["Q", "sum", "sum_f64", "asymptote", "verdict"]);
    r.push(vec![
        Cell::Int(t.big_q as i128),
        Cell::opt(t.sum.as_ref(), Cell::rational),
        Cell::Real(t.sum_f64),
        Cell::Real(t.asymptote),
        Cell::Text(match t.verdict {
            Verdict::Within => "within".into(),
            Verdict::Exceeds => "exceeds".into(),
        }),
    ]);
    Ok(r)
}

fn mc(p: &Params) -> R<Report> {
    let name = p.req("event")?;
    let n = p.u64("n")? as usize;
    let event = match name {
        "always" => Event::Always,
        "bn" => Event::Bn { n, big_q: p.u64("Q")?, kappa: p.rational("kappa")? },
        "bpsi" => Event::Bpsi {
            n,
            kappa: p.f64("kappa")?,
            family: p.family()?,
            eps: p.f64("eps")?,
            truncation: p.u64("truncation")?,
        },
        v => return Err(bad("event", v, "expected always, bn or bpsi")),
    };
    let e = mc_probability(&event, p.u64("samples")?, p.u64("seed")?, &p.limits()?)?;
    let mut r = Report::new(&[
        "event",
        "samples",
        "hits",
        "estimate",
        "radius",
        "precision_failures",
        "bias_correction",
        "seed",
    ]);
    r.push(vec![
        Cell::Text(name.into()),
        Cell::Int(e.samples as i128),
        Cell::Int(e.hits as i128),
        Cell::Real(e.estimate),
        Cell::Real(e.radius),
        Cell::Int(e.precision_failures as i128),
        Cell::Real(e.bias_correction),
        Cell::Int(e.seed as i128),
    ]);
    Ok(r)
}

// -------------------------------------------------------------------- orbit

fn check_dim(p: &Params, xi: &[ExactReal]) -> R<()> {
    if let Some(v) = p.opt("n") {
        let n: usize = v.trim().parse().map_err(|_| bad("n", v, "expected an integer"))?;
        if n != xi.len() {
            return Err(bad("n", v, &format!("xi has {} coordinates", xi.len())));
        }
    }
    Ok(())
}

fn orbit(p: &Params) -> R<Report> {
    let limits = p.limits()?;
    match p.req("mode")? {
        "escape" => {
            let xi = p.reals("xi")?;
            check_dim(p, &xi)?;
            let e = escape_set(&xi, &p.time("s")?, p.u64("N")?, &p.real("eps")?, &limits)?;
            let mut r = Report::new(&["l", "t", "lower", "upper", "in_k_eps", "boundary", "fraction"]);
            for row in &e.rows {
                r.push(vec![
                    Cell::Int(row.l as i128),
                    Cell::Text(row.t.to_string()),
                    Cell::Real(row.lower),
                    Cell::Real(row.upper),
                    Cell::Bool(row.in_k_eps),
                    Cell::Bool(row.boundary),
                    Cell::rational(&e.fraction),
                ]);
            }
            Ok(r)
        }
        "shortest" => {
            let xi = p.reals("xi")?;
            check_dim(p, &xi)?;
            let t = p.time("t")?;
            let v = shortest_sup_vector(&OrbitLattice::new(xi, t.clone())?, &limits)?;
            let mut r =
                Report::new(&["t", "p", "q", "form_abs", "box_norm", "dominant", "lower", "upper", "exact"]);
            r.push(vec![
                Cell::Text(t.to_string()),
                Cell::Int(v.p as i128),
                Cell::ints(&v.q),
                Cell::exact(&v.form_abs),
                Cell::Int(v.box_norm as i128),
                Cell::Text(match v.dominant {
                    Dominant::Form => "form".into(),
                    Dominant::Box => "box".into(),
                }),
                Cell::Real(v.lower),
                Cell::Real(v.upper),
                Cell::opt(v.exact.as_ref(), Cell::exact),
            ]);
            Ok(r)
        }
        "dani" => {
            let xi = p.reals("xi")?;
            check_dim(p, &xi)?;
            let t = p.time("t")?;
            let eps = p.real("eps")?;
            let out = dani_consistency(&xi, &t, &eps, &limits)?;
            let (name, lat, dio) = match out {
                DaniOutcome::Agree(b) => ("agree", Some(b), Some(b)),
                DaniOutcome::Disagree { lattice, diophantine } => ("disagree", Some(lattice), Some(diophantine)),
                DaniOutcome::Boundary => ("boundary", None, None),
            };
            let mut r = Report::new(&["t", "eps", "outcome", "lattice", "diophantine"]);
            r.push(vec![
                Cell::Text(t.to_string()),
                Cell::exact(&eps),
                Cell::Text(name.into()),
                Cell::opt(lat, Cell::Bool),
                Cell::opt(dio, Cell::Bool),
            ]);
            Ok(r)
        }
        "z" => {
            let points = p.matrix("xi")?;
            for x in &points {
                check_dim(p, x)?;
            }
            let delta: Vec<BigRational> = reals_of(p.req("delta")?)?
                .iter()
                .map(|d| d.as_rational().ok_or_else(|| bad("delta", p.req("delta").unwrap_or(""), "expected rationals")))
                .collect::<R<_>>()?;
            let z = z_membership(&points, &p.time("s")?, p.u64("N")?, &p.real("eps")?, &delta, &limits)?;
            let mut r = Report::new(&["point", "fraction", "delta", "member", "delta_sum", "joint"]);
            for (k, (f, d)) in z.fractions.iter().zip(&delta).enumerate() {
                r.push(vec![
                    Cell::Int(k as i128 + 1),
                    Cell::rational(f),
                    Cell::rational(d),
                    Cell::Bool(z.members[k]),
                    Cell::rational(&z.delta_sum),
                    Cell::opt(z.joint, Cell::Bool),
                ]);
            }
            Ok(r)
        }
        v => Err(bad("mode", v, "expected escape, shortest, dani or z")),
    }
}

// ----------------------------------------------------------------- channels

fn fixed<const N: usize>(key: &str, v: &str, xs: Vec<ExactReal>) -> R<[ExactReal; N]> {
    xs.try_into().map_err(|_| bad(key, v, &format!("expected {N} values")))
}

fn xchannel_gains(p: &Params) -> R<[[ExactReal; 2]; 2]> {
    let [a, b, c, d] = fixed::<4>("h", p.req("h")?, p.reals("h")?)?;
    Ok([[a, b], [c, d]])
}

fn build_model(p: &Params, kind: &str) -> R<ChannelModel> {
    let lambda = p.real("lambda")?;
    Ok(match kind {
        "mac" => {
            let [h1, h2] = fixed::<2>("h", p.req("h")?, p.reals("h")?)?;
            build_mac(&h1, &h2, &p.real("alpha")?, &p.real("beta")?, p.u64("Q")?, &lambda)?
        }
        "xchannel" => {
            let h = xchannel_gains(p)?;
            match p.opt("gains") {
                Some(g) => build_xchannel_unaligned(&h, &fixed::<4>("gains", g, reals_of(g)?)?, p.u64("Q")?, &lambda)?,
                None => build_xchannel(&h, p.u64("Q")?, &lambda)?,
            }
        }
        "gic" => {
            let flat = fixed::<9>("h", p.req("h")?, p.reals("h")?)?;
            let [a, b, c, d, e, f, g, h, i] = flat;
            let hm = [[a, b, c], [d, e, f], [g, h, i]];
            let gens = match p.req("generators")? {
                "full" => GicGenerators::Full,
                list => {
                    let generators = reals_of(list)?;
                    let raw = p.req("map").map_err(|_| CliError::Parse("reduced generators need --map".into()))?;
                    let idx: Vec<usize> = raw
                        .split(',')
                        .map(|s| match s.trim().parse::<usize>() {
                            Ok(v) if v >= 1 => Ok(v - 1),
                            _ => Err(bad("map", raw, "expected 1-based generator indices")),
                        })
                        .collect::<R<_>>()?;
                    if idx.len() != 6 {
                        return Err(bad("map", raw, "expected 6 indices"));
                    }
                    let mut map = [[0usize; 3]; 3];
                    let off = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
                    for ((i, j), g) in off.iter().zip(idx) {
                        map[*i][*j] = g;
                    }
                    GicGenerators::Reduced { generators, map }
                }
            };
            build_gic(&hm, p.u64("k")?, p.u64("B")?, &lambda, &gens)?
        }
        "multiant" => build_multiantenna(&p.matrix("h")?, &p.reals("alpha")?, p.u64("Q")?, &lambda)?,
        v => return Err(CliError::Usage(format!("unknown channel `{v}`"))),
    })
}

fn receivers(p: &Params, model: &ChannelModel) -> R<Vec<usize>> {
    let v = p.req("receiver")?;
    let count = model.receivers.len();
    if v == "all" {
        return Ok((0..count).collect());
    }
    match v.trim().parse::<usize>() {
        Ok(i) if (1..=count).contains(&i) => Ok(vec![i - 1]),
        _ => Err(bad("receiver", v, &format!("expected all or 1..={count}"))),
    }
}

fn build_constellation(p: &Params, model: &ChannelModel, i: usize) -> R<Constellation> {
    let limits = p.limits()?;
    Ok(match p.req("method")? {
        "auto" => constellation(model, i, &limits)?,
        "full" => constellation_full(model, i, &limits)?,
        "difference" => constellation_difference(model, i, &limits)?,
        v => return Err(bad("method", v, "expected auto, full or difference")),
    })
}

fn digits(d: &[u64]) -> Cell {
    Cell::Text(d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
}

fn channel(p: &Params, kind: &str) -> R<Report> {
    let model = build_model(p, kind)?;
    let action = p.req("action")?;
    let rxs = receivers(p, &model)?;
    match action {
        "constellation" => {
            let mut r = Report::new(&["receiver", "index", "value", "value_f64", "digits"]);
            for &i in &rxs {
                let con = build_constellation(p, &model, i)?;
                if con.value_count.is_none() {
                    return Err(CliError::Core(dioph_core::Error::InvalidArgument(
                        "constellation too large to list; use dmin".into(),
                    )));
                }
                let vals = con.values_f64();
                for (k, rep) in con.representatives().iter().enumerate() {
                    r.push(vec![
                        Cell::Int(i as i128 + 1),
                        Cell::Int(k as i128),
                        Cell::exact(&con.value(k)),
                        Cell::Real(vals[k]),
                        digits(rep),
                    ]);
                }
            }
            Ok(r)
        }
        "dmin" => {
            let mut r = Report::new(&[
                "receiver",
                "provenance",
                "tuples",
                "values",
                "collisions",
                "collision",
                "d_min",
                "d_min_f64",
                "witness",
            ]);
            for &i in &rxs {
                let con = build_constellation(p, &model, i)?;
                r.push(vec![
                    Cell::Int(i as i128 + 1),
                    Cell::Text(con.provenance.to_string()),
                    Cell::Int(con.tuples as i128),
                    Cell::opt(con.value_count, |v| Cell::Int(v as i128)),
                    Cell::opt(con.collisions, |v| Cell::Int(v as i128)),
                    Cell::Bool(con.collision),
                    Cell::exact(&con.d_min),
                    Cell::Real(con.d_min.to_f64()),
                    Cell::ints(&con.witness),
                ]);
            }
            Ok(r)
        }
        "bounds" => {
            let cap = p.limits()?.precision_bits;
            let mut r = Report::new(&[
                "receiver",
                "d_min",
                "d_min_f64",
                "perfect_separation",
                "upper_bound",
                "upper_bound_f64",
                "constant",
                "upper_is_scale",
                "below_upper",
            ]);
            for &i in &rxs {
                let con = build_constellation(p, &model, i)?;
                let b = theoretical_bounds(&model, i)?;
                let below = match (&b.upper_bound, b.upper_is_scale) {
                    (Some(u), false) => Some(con.d_min.cmp_with(u, cap)? != Ordering::Greater),
                    _ => None,
                };
                r.push(vec![
                    Cell::Int(i as i128 + 1),
                    Cell::exact(&con.d_min),
                    Cell::Real(con.d_min.to_f64()),
                    Cell::exact(&b.perfect_separation),
                    Cell::opt(b.upper_bound.as_ref(), Cell::exact),
                    Cell::opt(b.upper_bound.as_ref(), |u| Cell::Real(u.to_f64())),
                    Cell::opt(b.constant.as_ref(), Cell::exact),
                    Cell::Bool(b.upper_is_scale),
                    Cell::opt(below, Cell::Bool),
                ]);
            }
            Ok(r)
        }
        "points" => points(p, &model),
        "ser" => {
            let noise = match p.req("noise")? {
                "gaussian" => NoiseMode::Gaussian,
                "zero" => NoiseMode::Zero,
                "below-half" => NoiseMode::BelowHalfDistance,
                v => return Err(bad("noise", v, "expected gaussian, zero or below-half")),
            };
            let (samples, seed) = (p.u64("samples")?, p.u64("seed")?);
            let mut r = Report::new(&[
                "receiver", "d_min_f64", "samples", "errors", "rate", "radius", "analytic", "filtered", "ties", "seed",
            ]);
            for &i in &rxs {
                let con = build_constellation(p, &model, i)?;
                let s = mc_symbol_error_rate(&model, &con, samples, seed, noise)?;
                let d = con.d_min.to_f64();
                r.push(vec![
                    Cell::Int(i as i128 + 1),
                    Cell::Real(d),
                    Cell::Int(s.samples as i128),
                    Cell::Int(s.errors as i128),
                    Cell::Real(s.rate),
                    Cell::Real(s.radius),
                    Cell::Real(analytic_error_prob(d)),
                    Cell::Int(s.filtered as i128),
                    Cell::Int(s.ties as i128),
                    Cell::Int(s.seed as i128),
                ]);
            }
            Ok(r)
        }
        "kg-check" => {
            if model.kind != ChannelKind::XChannel {
                return Err(CliError::Core(dioph_core::Error::InvalidArgument(
                    "kg-check applies to the X-channel".into(),
                )));
            }
            let qs = p.u64_list("qs")?;
            let eps = p.f64("eps")?;
            let kappa = p.opt_f64("kappa")?;
            let limits = p.limits()?;
            let mut r =
                Report::new(&["receiver", "Q", "d_min", "d_min_f64", "ratio", "passes", "empirical_kappa", "all_pass"]);
            for &i in &rxs {
                let kg = kg_separation_check(&model, i, &qs, eps, kappa, &limits)?;
                for row in &kg.rows {
                    r.push(vec![
                        Cell::Int(i as i128 + 1),
                        Cell::Int(row.q as i128),
                        Cell::exact(&row.d_min),
                        Cell::Real(row.d_min.to_f64()),
                        Cell::Real(row.ratio),
                        Cell::opt(row.passes, Cell::Bool),
                        Cell::Real(kg.empirical_kappa),
                        Cell::opt(kg.all_pass, Cell::Bool),
                    ]);
                }
            }
            Ok(r)
        }
        v => Err(bad("action", v, "expected constellation, dmin, bounds, points, ser or kg-check")),
    }
}

fn points(p: &Params, model: &ChannelModel) -> R<Report> {
    let cap = p.limits()?.precision_bits;
    let mut r = Report::new(&["kind", "name", "x", "y", "x_f64", "y_f64"]);
    let point = |name: String, x: &ExactReal, y: Option<&ExactReal>| {
        vec![
            Cell::Text("point".into()),
            Cell::Text(name),
            Cell::exact(x),
            Cell::opt(y, Cell::exact),
            Cell::Real(x.to_f64()),
            Cell::opt(y, |y| Cell::Real(y.to_f64())),
        ]
    };
    match &model.params {
        dioph_core::channels::ChannelParams::Mac { .. } => r.push(point("xi".into(), &mac_xi(model)?, None)),
        dioph_core::channels::ChannelParams::XChannel { gains: None, .. } => {
            let pts = derived_points(model)?;
            for d in &pts {
                r.push(point(d.which.to_string(), &d.point[0], Some(&d.point[1])));
            }
            for f in fmap_pairings(&pts, cap)? {
                r.push(vec![
                    Cell::Text("pairing".into()),
                    Cell::Text(format!("{} = {}({})", f.xi_prime, f.map, f.xi)),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                ]);
            }
        }
        dioph_core::channels::ChannelParams::MultiAnt { h, alpha } => {
            let xi = build_multiantenna_xi(h, alpha)?;
            for i in 0..xi.n() {
                for j in 0..xi.m() {
                    r.push(point(format!("xi[{}][{}]", i + 1, j + 1), xi.get(i, j), None));
                }
            }
        }
        _ => {
            return Err(CliError::Core(dioph_core::Error::InvalidArgument(
                "points are defined for mac, aligned xchannel and multiant".into(),
            )))
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------- dof

fn dof_xchannel(p: &Params) -> R<Report> {
    let h_text = match (p.opt("h"), p.opt("model-file")) {
        (Some(_), Some(_)) => return Err(CliError::Parse("give --h or --model-file, not both".into())),
        (Some(h), None) => Some(h.to_string()),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            let (_, map) = parse_config_text(&text)?;
            if let Some(k) = map.keys().find(|k| *k != "h") {
                return Err(CliError::Parse(format!("model file: unknown key `{k}`")));
            }
            Some(map.get("h").cloned().ok_or_else(|| CliError::Parse("model file has no `h`".into()))?)
        }
        (None, None) => None,
    };
    let model = match &h_text {
        Some(h) => {
            let [a, b, c, d] = fixed::<4>("h", h, reals_of(h)?)?;
            Some(build_xchannel(&[[a, b], [c, d]], 1, &ExactReal::one())?)
        }
        None => None,
    };
    let rep = xchannel_dof_sweep(p.f64("eps")?, &p.u64_list("sweep")?, p.f64("constant")?, model.as_ref(), &p.limits()?)?;
    let mut r = Report::new(&[
        "Q",
        "lambda_log2",
        "power_log2",
        "bits",
        "benchmark",
        "ratio",
        "limit",
        "d_hat",
        "reliability",
    ]);
    for pt in &rep.points {
        r.push(vec![
            Cell::Int(pt.sweep as i128),
            Cell::Real(pt.lambda_log2),
            Cell::Real(pt.power_log2),
            Cell::Real(pt.bits),
            Cell::Real(pt.benchmark),
            Cell::Real(pt.ratio),
            Cell::Real(rep.limit),
            Cell::opt(pt.d_hat.as_ref(), Cell::exact),
            Cell::opt(pt.reliability, Cell::Real),
        ]);
    }
    Ok(r)
}

fn dof_gic(p: &Params) -> R<Report> {
    let mg = u32::try_from(p.u64("mg")?).map_err(|_| CliError::Parse("--mg too large".into()))?;
    let rep = gic_dof_formula(&p.u64_list("sweep")?, mg, &p.rational("eps")?)?;
    let mut r = Report::new(&["k", "value", "value_f64", "limit"]);
    for pt in &rep.points {
        r.push(vec![
            Cell::Int(pt.sweep as i128),
            Cell::opt(pt.exact.as_ref(), Cell::rational),
            Cell::Real(pt.ratio),
            Cell::Real(rep.limit),
        ]);
    }
    Ok(r)
}
