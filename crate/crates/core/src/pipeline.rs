//! Assembly of the top coefficients: per-`f` series, residue extraction and
//! the Möbius-weighted sum over the gcd spectrum.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{gcd_list, lcm, Int, Rat};
use crate::cone::{barvinok_decompose_dual, build_lattice, KnapsackLattice, SignedUnimodularCone};
use crate::error::{Error, Result};
use crate::poset::{mobius, MobiusTable, SpectrumTable};
use crate::series::{
    eps_constant_term, exp_eps_step_linear, exp_step_linear, inv_one_minus_exp, inv_one_minus_exp_perturbed,
    residue_coefficient, EpsSeries, ScalarSeries, XSeries,
};
use crate::step_poly::{eval_quasi_polynomial, StepPolynomial};
use crate::Cancel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    alphas: Vec<Int>,
    gcd: Int,
}

impl KnapsackInstance {
    /// Divides the entries by their gcd; `E(a)(g t) = E(a/g)(t)`.
    pub fn new(alphas: Vec<Int>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidInstance("no entries".into()));
        }
        if let Some(a) = alphas.iter().find(|a| !a.is_positive()) {
            return Err(Error::InvalidInstance(format!("entry {a} is not positive")));
        }
        let gcd = gcd_list(alphas.iter());
        let alphas = alphas.into_iter().map(|a| a / &gcd).collect();
        Ok(KnapsackInstance { alphas, gcd })
    }

    pub fn from_i64(v: &[i64]) -> Result<Self> {
        Self::new(v.iter().map(|&x| Int::from(x)).collect())
    }

    /// The normalized entries.
    pub fn alphas(&self) -> &[Int] {
        &self.alphas
    }

    /// Gcd of the original input.
    pub fn gcd(&self) -> &Int {
        &self.gcd
    }

    /// `N`, one less than the number of entries.
    pub fn n(&self) -> usize {
        self.alphas.len() - 1
    }

    /// `1/(N! prod alpha_i)`.
    pub fn leading_coefficient(&self) -> Rat {
        let prod: Int = self.alphas.iter().product();
        Rat::new(Int::one(), crate::arith::factorial(self.n() as u32) * prod)
    }
}

/// Per-`f` work summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FStats {
    pub f: String,
    pub rank: usize,
    pub cones: usize,
    pub perturbed_cones: usize,
    pub millis: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopKResult {
    pub instance: KnapsackInstance,
    pub k: usize,
    /// Degree `m` to `E_m`, for `m` in `N-k ..= N`.
    pub coefficients: BTreeMap<usize, StepPolynomial>,
    /// The spectra and Möbius values used, by threshold `m`.
    pub mobius: BTreeMap<usize, MobiusTable>,
    pub stats: Vec<FStats>,
    /// Lcm of the coefficient periods.
    pub period_bound: Int,
}

impl TopKResult {
    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn coefficient(&self, m: usize) -> Option<&StepPolynomial> {
        self.coefficients.get(&m)
    }

    /// `sum_m E_m(t) t^m` over the computed degrees; for the normalized instance.
    pub fn evaluate(&self, t: &Int) -> Rat {
        eval_quasi_polynomial(self.coefficients.iter().map(|(m, p)| (*m as u32, p)), t)
    }

    /// The polynomial in `t` valid on `t = q mod period_bound`; entry `m` is
    /// the coefficient of `t^m` (zero below `N-k`).
    pub fn coset_polynomial(&self, q: &Int) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.n() + 1];
        for (m, p) in &self.coefficients {
            out[*m] = p.eval(q);
        }
        out
    }

    /// All coset polynomials for `q = 0 .. period_bound`.
    pub fn coset_polynomials(&self) -> Vec<Vec<Rat>> {
        let q: u64 = self.period_bound.clone().try_into().expect("period fits in u64");
        (0..q).map(|q| self.coset_polynomial(&Int::from(q))).collect()
    }

    /// Evaluates through precomputed coset polynomials when the period bound
    /// is at most `limit`, else term by term.
    pub fn evaluator(&self, limit: u64) -> impl Fn(&Int) -> Rat + '_ {
        let table = u64::try_from(&self.period_bound)
            .ok()
            .filter(|q| *q <= limit)
            .map(|_| self.coset_polynomials());
        move |t: &Int| match &table {
            Some(cosets) => {
                let q = usize::try_from(t.mod_floor(&self.period_bound)).expect("coset index");
                let tr = Rat::from_integer(t.clone());
                cosets[q].iter().rev().fold(Rat::zero(), |acc, c| acc * &tr + c)
            }
            None => self.evaluate(t),
        }
    }

    /// The closed formula in the variable `t`, highest degree first.
    pub fn display_formula(&self) -> String {
        let mut parts = Vec::new();
        for (m, p) in self.coefficients.iter().rev() {
            if p.is_zero() {
                continue;
            }
            let body = p.display_with("t");
            let wrapped = if p.len() > 1 { format!("({body})") } else { body };
            parts.push(match m {
                0 => wrapped,
                1 => format!("{wrapped} t"),
                _ => format!("{wrapped} t^{m}"),
            });
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut s = parts.remove(0);
        for p in parts {
            match p.strip_prefix('-') {
                Some(rest) => s.push_str(&format!(" - {}", rest.trim_start())),
                None => s.push_str(&format!(" + {p}")),
            }
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: serde_json::Map<String, serde_json::Value> = self
            .coefficients
            .iter()
            .map(|(m, p)| (m.to_string(), serde_json::to_value(p).expect("serializable")))
            .collect();
        let mobius: serde_json::Map<String, serde_json::Value> = self
            .mobius
            .iter()
            .map(|(m, t)| {
                let inner: serde_json::Map<String, serde_json::Value> =
                    t.iter().map(|(f, mu)| (f.to_string(), serde_json::Value::String(mu.to_string()))).collect();
                (m.to_string(), serde_json::Value::Object(inner))
            })
            .collect();
        serde_json::json!({
            "instance": self.instance.alphas.iter().map(Int::to_string).collect::<Vec<_>>(),
            "gcd": self.instance.gcd.to_string(),
            "k": self.k,
            "N": self.n(),
            "coefficients": coeffs,
            "mobius": mobius,
            "period_bound": self.period_bound.to_string(),
            "stats": self.stats,
        })
    }

    /// Inverse of [`TopKResult::to_json`]; `instance` holds the normalized
    /// entries and `gcd` the original scale.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |what: &str| Error::InvalidArgument(format!("result json: {what}"));
        let parse_int = |s: &serde_json::Value| -> Result<Int> {
            s.as_str().ok_or_else(|| bad("expected string integer"))?.parse::<Int>().map_err(|_| bad("bad integer"))
        };
        let alphas = v["instance"]
            .as_array()
            .ok_or_else(|| bad("instance"))?
            .iter()
            .map(parse_int)
            .collect::<Result<Vec<_>>>()?;
        let gcd = parse_int(&v["gcd"])?;
        let mut instance = KnapsackInstance::new(alphas)?;
        instance.gcd = gcd;
        let k = v["k"].as_u64().ok_or_else(|| bad("k"))? as usize;
        let mut coefficients = BTreeMap::new();
        for (m, p) in v["coefficients"].as_object().ok_or_else(|| bad("coefficients"))? {
            let m: usize = m.parse().map_err(|_| bad("degree key"))?;
            let p: StepPolynomial = serde_json::from_value(p.clone()).map_err(|e| bad(&e.to_string()))?;
            coefficients.insert(m, p);
        }
        let mut mobius = BTreeMap::new();
        if let Some(obj) = v["mobius"].as_object() {
            for (m, t) in obj {
                let m: usize = m.parse().map_err(|_| bad("mobius threshold"))?;
                let mut table = MobiusTable::new();
                for (f, mu) in t.as_object().ok_or_else(|| bad("mobius table"))? {
                    table.insert(f.parse().map_err(|_| bad("mobius key"))?, parse_int(mu)?);
                }
                mobius.insert(m, table);
            }
        }
        let stats = serde_json::from_value(v["stats"].clone()).unwrap_or_default();
        let period_bound = parse_int(&v["period_bound"])?;
        Ok(TopKResult { instance, k, coefficients, mobius, stats, period_bound })
    }
}

#[cfg(not(target_arch = "wasm32"))]
fn start_clock() -> std::time::Instant {
    std::time::Instant::now()
}

#[cfg(not(target_arch = "wasm32"))]
fn elapsed_ms(t: &std::time::Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

#[cfg(target_arch = "wasm32")]
fn start_clock() {}

#[cfg(target_arch = "wasm32")]
fn elapsed_ms(_: &()) -> u64 {
    0
}

fn check(cancel: Cancel) -> Result<()> {
    if cancel.is_some_and(|c| c()) {
        Err(Error::Cancelled)
    } else {
        Ok(())
    }
}

/// A direction `beta` on the moment curve with `<beta, g> != 0` for every
/// generator `g` orthogonal to `a_J`.
fn perturbation_direction(r: usize, singular: &[&Vec<Int>]) -> Vec<Int> {
    let mut m = Int::one();
    loop {
        let beta: Vec<Int> = (0..r).map(|i| num_traits::pow(m.clone(), i)).collect();
        let ok = singular.iter().all(|g| !g.iter().zip(&beta).map(|(a, b)| a * b).sum::<Int>().is_zero());
        if ok {
            return beta;
        }
        m += 1;
    }
}

fn dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Signed series of one cone whose pairings are all nonzero, without the
/// factor `f` and the `f | alpha_j` factors.
fn regular_cone_series(cone: &SignedUnimodularCone, f: &Int, len: usize) -> Result<XSeries> {
    let high = len as i64 - 2;
    let mut s = ScalarSeries::new(0, {
        let mut v = vec![Rat::zero(); len];
        v[0] = Rat::from_integer(Int::from(cone.sign));
        v
    });
    for c in &cone.pairings {
        s = s.mul(&inv_one_minus_exp(&Rat::from_integer(c.clone()), high)?);
    }
    let l = cone.exponent(f)?;
    Ok(exp_step_linear(&l, len as i64 - 1)?.mul_scalar_series(&s))
}

/// Same for a cone with some zero pairing, through the `epsilon` layer.
fn singular_cone_series(
    cone: &SignedUnimodularCone,
    f: &Int,
    beta: &[Int],
    len: usize,
) -> Result<EpsSeries> {
    let x_high_h = len as i64 - 2;
    let z = cone.pairings.iter().filter(|c| c.is_zero()).count() as i64;
    let d: Vec<Int> = cone.generators.iter().map(|g| dot(g, beta)).collect();
    let shifts = cone.fractional_shift(f)?;
    let mut l0 = StepPolynomial::zero();
    let mut l1 = StepPolynomial::zero();
    for ((fs, c), dj) in shifts.iter().zip(&cone.pairings).zip(&d) {
        l0.add_scaled_assign(&Rat::from_integer(c.clone()), fs);
        l1.add_scaled_assign(&Rat::from_integer(dj.clone()), fs);
    }
    let mut acc = exp_eps_step_linear(&l1, z, len as i64 - 1).mul_x(&exp_step_linear(&l0, len as i64 - 1)?);
    for (c, dj) in cone.pairings.iter().zip(&d) {
        let (c, dj) = (Rat::from_integer(c.clone()), Rat::from_integer(dj.clone()));
        let eps_high = if c.is_zero() { z - 1 } else { z };
        acc = acc.mul(&inv_one_minus_exp_perturbed(&c, &dj, eps_high, x_high_h)?);
    }
    Ok(scale_eps(&acc, &Rat::from_integer(Int::from(cone.sign))))
}

fn scale_eps(e: &EpsSeries, c: &Rat) -> EpsSeries {
    let coeffs = (e.low()..=e.high()).map(|j| e.coeff(j).map(|x| x.scale(c))).collect();
    EpsSeries::new(e.low(), coeffs)
}

/// Work record for one spectrum value.
#[derive(Clone, Debug)]
pub struct Contribution {
    pub f: Int,
    pub series: XSeries,
    pub stats: FStats,
}

/// Laurent expansion of `F(a, f, T)(x)` with the `len` coefficients of
/// `x^{-(N+1)} ..= x^{-(N+1)+len-1}`.
pub fn contribution_series(inst: &KnapsackInstance, f: &Int, len: usize, cancel: Cancel) -> Result<Contribution> {
    let clock = start_clock();
    if len == 0 {
        return Err(Error::InvalidArgument("series length must be positive".into()));
    }
    let lat: KnapsackLattice = build_lattice(inst.alphas(), f)?;
    let cones = barvinok_decompose_dual(&lat, cancel)?;
    let high_h = len as i64 - 2;

    let singular: Vec<&Vec<Int>> = cones
        .iter()
        .flat_map(|c| c.generators.iter().zip(&c.pairings).filter(|(_, p)| p.is_zero()).map(|(g, _)| g))
        .collect();
    let beta = if singular.is_empty() { Vec::new() } else { perturbation_direction(lat.rank(), &singular) };

    let mut regular_sum: Option<XSeries> = None;
    let mut eps_sum: Option<EpsSeries> = None;
    let mut perturbed = 0;
    for cone in &cones {
        check(cancel)?;
        if cone.pairings.iter().any(Zero::is_zero) {
            perturbed += 1;
            let e = singular_cone_series(cone, f, &beta, len)?;
            match &mut eps_sum {
                Some(acc) => acc.add_scaled_assign(&Rat::one(), &e),
                None => eps_sum = Some(e),
            }
        } else {
            let s = regular_cone_series(cone, f, len)?;
            match &mut regular_sum {
                Some(acc) => acc.add_scaled_assign(&Rat::one(), &s),
                None => regular_sum = Some(s),
            }
        }
    }
    let r = lat.rank() as i64;
    let mut total = XSeries::zero(-r, -r + len as i64 - 1);
    if let Some(s) = regular_sum {
        total.add_scaled_assign(&Rat::one(), &s);
    }
    if let Some(e) = eps_sum {
        total.add_scaled_assign(&Rat::one(), &eps_constant_term(&e)?);
    }
    let mut common = ScalarSeries::new(0, {
        let mut v = vec![Rat::zero(); len];
        v[0] = Rat::from_integer(f.clone());
        v
    });
    for a in inst.alphas().iter().filter(|a| a.is_multiple_of(f)) {
        common = common.mul(&inv_one_minus_exp(&Rat::from_integer(a.clone()), high_h)?);
    }
    let series = total.mul_scalar_series(&common);
    let stats = FStats {
        f: f.to_string(),
        rank: lat.rank(),
        cones: cones.len(),
        perturbed_cones: perturbed,
        millis: elapsed_ms(&clock),
    };
    Ok(Contribution { f: f.clone(), series, stats })
}

/// `E_i(f)(T)`: coefficient of `x^{-1}` in `(-x)^i/i! F`.
pub fn coefficient_extract(series: &XSeries, i: usize) -> Result<StepPolynomial> {
    residue_coefficient(series, i as u32)
}

#[cfg(feature = "parallel")]
fn map_contributions(
    inst: &KnapsackInstance,
    fs: &[Int],
    len: usize,
    cancel: Cancel,
) -> Result<Vec<Contribution>> {
    use rayon::prelude::*;
    fs.par_iter().map(|f| contribution_series(inst, f, len, cancel)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_contributions(
    inst: &KnapsackInstance,
    fs: &[Int],
    len: usize,
    cancel: Cancel,
) -> Result<Vec<Contribution>> {
    fs.iter().map(|f| contribution_series(inst, f, len, cancel)).collect()
}

/// `(m, f, mu) -> replacement` for `mu_{>m}(f)`.
pub type MobiusOverride<'a> = &'a dyn Fn(usize, &Int, &Int) -> Int;

/// Options for [`top_k_with`].
#[derive(Clone, Copy, Default)]
pub struct TopKOptions<'a> {
    pub cancel: Cancel<'a>,
    /// Replaces `mu_{>m}(f)` before summation; used by negative controls.
    pub mobius_override: Option<MobiusOverride<'a>>,
}

pub fn top_k(inst: &KnapsackInstance, k: usize) -> Result<TopKResult> {
    top_k_with(inst, k, TopKOptions::default())
}

pub fn top_k_with(inst: &KnapsackInstance, k: usize, opts: TopKOptions) -> Result<TopKResult> {
    let n = inst.n();
    if k > n {
        return Err(Error::KOutOfRange { k: k as i64, n });
    }
    let table = SpectrumTable::build(inst.alphas(), k);
    let widest = table.above(n - k)?;
    let fs: Vec<Int> = widest.iter().cloned().collect();
    let contributions = map_contributions(inst, &fs, k + 1, opts.cancel)?;
    let by_f: BTreeMap<&Int, &Contribution> = contributions.iter().map(|c| (&c.f, c)).collect();

    let mut coefficients = BTreeMap::new();
    let mut tables = BTreeMap::new();
    for m in n - k..=n {
        check(opts.cancel)?;
        let spec = table.above(m)?;
        let mut mu = mobius(&spec);
        if let Some(o) = opts.mobius_override {
            for (f, v) in mu.iter_mut() {
                *v = o(m, f, v);
            }
        }
        let mut e = StepPolynomial::zero();
        for (f, muf) in &mu {
            if muf.is_zero() {
                continue;
            }
            let c = coefficient_extract(&by_f[f].series, m)?;
            e.add_scaled_assign(&Rat::from_integer(-muf.clone()), &c);
        }
        coefficients.insert(m, e);
        tables.insert(m, mu);
    }
    let period_bound = coefficients.values().fold(Int::one(), |acc, p| lcm(&acc, &p.period()));
    let stats = contributions.into_iter().map(|c| c.stats).collect();
    Ok(TopKResult { instance: inst.clone(), k, coefficients, mobius: tables, stats, period_bound })
}

/// The whole quasi-polynomial, `k = N`.
pub fn full_quasipolynomial(inst: &KnapsackInstance) -> Result<TopKResult> {
    top_k(inst, inst.n())
}

/// Value of the computed terms at `t` for the original (unnormalized) input:
/// zero off `g Z`, else the normalized value at `t / g`.
pub fn evaluate(res: &TopKResult, t: &Int) -> Rat {
    let g = res.instance.gcd();
    if !t.is_multiple_of(g) {
        return Rat::zero();
    }
    res.evaluate(&(t / g))
}
