//! Step polynomials: rational combinations of products of fractional-part
//! functions `{r T}^n` with rational rates `r`.
//!
//! These are functions on the integers. Rates are therefore reduced modulo 1
//! (`{(r + m) T} = {r T}` whenever `T` is an integer), and a factor with rate
//! 0 kills its monomial. The written form is not canonical as a function
//! (fractional parts satisfy polynomial relations), so [`StepPolynomial::agrees_with`]
//! decides equality by evaluating over one full period, while `==` compares the
//! normalized syntax only.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{fmt_rat, frac, parse_rat, rat_int, Int, Rat};
use crate::error::{Error, Result};

/// `T -> {r T}` with `r` reduced into `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FracForm(Rat);

impl FracForm {
    pub fn new(rate: Rat) -> Self {
        FracForm(frac(&rate))
    }

    pub fn rate(&self) -> &Rat {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn eval(&self, t: &Int) -> Rat {
        let num = (self.0.numer() * t).mod_floor(self.0.denom());
        Rat::new(num, self.0.denom().clone())
    }

    pub fn period(&self) -> &Int {
        self.0.denom()
    }
}

/// Sorted factor list of a monomial; exponents are at least one.
pub type Factors = Vec<(FracForm, u32)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepMonomial {
    pub coefficient: Rat,
    pub factors: Factors,
}

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct StepPolynomial {
    terms: BTreeMap<Factors, Rat>,
}

fn merge_factors(a: &Factors, b: &Factors) -> Factors {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn eval_factors(factors: &Factors, t: &Int) -> Rat {
    let mut v = Rat::one();
    for (form, n) in factors {
        let x = form.eval(t);
        if x.is_zero() {
            return x;
        }
        v *= num_traits::pow(x, *n as usize);
    }
    v
}

impl StepPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Self::zero();
        p.add_term(c, Vec::new());
        p
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    /// `c * {r T}`.
    pub fn linear(c: Rat, rate: Rat) -> Self {
        Self::monomial(c, vec![(rate, 1)])
    }

    /// `c * prod {r_j T}^{n_j}`; factors are normalized and merged.
    pub fn monomial(c: Rat, factors: Vec<(Rat, u32)>) -> Self {
        let mut norm: Factors = Vec::new();
        for (r, n) in factors {
            if n == 0 {
                continue;
            }
            let form = FracForm::new(r);
            if form.is_zero() {
                return Self::zero();
            }
            norm = merge_factors(&norm, &vec![(form, n)]);
        }
        let mut p = Self::zero();
        p.add_term(c, norm);
        p
    }

    fn add_term(&mut self, c: Rat, factors: Factors) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(factors) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = StepMonomial> + '_ {
        self.terms
            .iter()
            .map(|(f, c)| StepMonomial { coefficient: c.clone(), factors: f.clone() })
    }

    /// The value when the polynomial has no fractional-part factors at all.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    /// Degree bound: largest total exponent over the terms.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|f| f.iter().map(|(_, n)| n).sum()).max().unwrap_or(0)
    }

    /// lcm of all rate denominators; a multiple of the minimal period.
    pub fn period(&self) -> Int {
        self.terms
            .keys()
            .flat_map(|f| f.iter().map(|(form, _)| form.period()))
            .fold(Int::one(), |acc, d| acc.lcm(d))
    }

    /// Smallest divisor `p` of [`Self::period`] with `phi(T + p) = phi(T)` for
    /// all `T`, found by evaluation. Returns `None` when the period exceeds
    /// `limit` evaluations.
    pub fn minimal_period(&self, limit: u64) -> Option<Int> {
        let q = self.period();
        let qn: u64 = num_traits::ToPrimitive::to_u64(&q)?;
        if qn > limit {
            return None;
        }
        let values: Vec<Rat> = (0..qn).map(|t| self.eval(&Int::from(t))).collect();
        let mut divisors: Vec<u64> = (1..=qn).filter(|d| qn.is_multiple_of(*d)).collect();
        divisors.sort_unstable();
        divisors
            .into_iter()
            .find(|&d| (0..qn).all(|t| values[t as usize] == values[((t + d) % qn) as usize]))
            .map(Int::from)
    }

    pub fn eval(&self, t: &Int) -> Rat {
        self.terms
            .iter()
            .map(|(f, c)| c * eval_factors(f, t))
            .fold(Rat::zero(), |acc, x| acc + x)
    }

    /// Equality as functions on the integers: compares values over one
    /// common period.
    pub fn agrees_with(&self, other: &StepPolynomial) -> bool {
        let q = self.period().lcm(&other.period());
        let mut t = Int::zero();
        while t < q {
            if self.eval(&t) != other.eval(&t) {
                return false;
            }
            t += 1;
        }
        true
    }

    pub fn scale(&self, c: &Rat) -> StepPolynomial {
        if c.is_zero() {
            return Self::zero();
        }
        StepPolynomial { terms: self.terms.iter().map(|(f, x)| (f.clone(), x * c)).collect() }
    }

    /// `self += c * other`.
    pub fn add_scaled_assign(&mut self, c: &Rat, other: &StepPolynomial) {
        if c.is_zero() {
            return;
        }
        for (f, x) in &other.terms {
            self.add_term(x * c, f.clone());
        }
    }

    pub fn add_assign_ref(&mut self, other: &StepPolynomial) {
        self.add_scaled_assign(&Rat::one(), other);
    }

    pub fn mul_ref(&self, other: &StepPolynomial) -> StepPolynomial {
        let mut out = StepPolynomial::zero();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &other.terms {
                let f = if fa.is_empty() {
                    fb.clone()
                } else if fb.is_empty() {
                    fa.clone()
                } else {
                    merge_factors(fa, fb)
                };
                out.add_term(ca * cb, f);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> StepPolynomial {
        let mut acc = StepPolynomial::one();
        for _ in 0..n {
            acc = acc.mul_ref(self);
        }
        acc
    }

    /// Renders with the given variable name, e.g. `1/4 - 1/6*{2/3 t}`.
    pub fn display_with(&self, var: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (f, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let body: Vec<String> = f
                .iter()
                .map(|(form, n)| {
                    let base = format!("{{{} {}}}", fmt_rat(form.rate()), var);
                    if *n == 1 {
                        base
                    } else {
                        format!("{base}^{n}")
                    }
                })
                .collect();
            if body.is_empty() {
                out.push_str(&fmt_rat(&mag));
            } else if mag.is_one() {
                out.push_str(&body.join("*"));
            } else {
                out.push_str(&fmt_rat(&mag));
                out.push('*');
                out.push_str(&body.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for StepPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with("T"))
    }
}

impl fmt::Debug for StepPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StepPolynomial({self})")
    }
}

impl Add for &StepPolynomial {
    type Output = StepPolynomial;
    fn add(self, rhs: &StepPolynomial) -> StepPolynomial {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub for &StepPolynomial {
    type Output = StepPolynomial;
    fn sub(self, rhs: &StepPolynomial) -> StepPolynomial {
        let mut out = self.clone();
        out.add_scaled_assign(&-Rat::one(), rhs);
        out
    }
}

impl Mul for &StepPolynomial {
    type Output = StepPolynomial;
    fn mul(self, rhs: &StepPolynomial) -> StepPolynomial {
        self.mul_ref(rhs)
    }
}

impl Neg for &StepPolynomial {
    type Output = StepPolynomial;
    fn neg(self) -> StepPolynomial {
        self.scale(&-Rat::one())
    }
}

#[derive(Serialize, Deserialize)]
struct FactorJson {
    r: String,
    n: u32,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    c: String,
    factors: Vec<FactorJson>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    terms: Vec<TermJson>,
}

impl Serialize for StepPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            terms: self
                .terms
                .iter()
                .map(|(f, c)| TermJson {
                    c: fmt_rat(c),
                    factors: f.iter().map(|(form, n)| FactorJson { r: fmt_rat(form.rate()), n: *n }).collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        StepPolynomial::try_from_json(raw).map_err(serde::de::Error::custom)
    }
}

impl StepPolynomial {
    fn try_from_json(raw: PolyJson) -> Result<Self> {
        let mut p = StepPolynomial::zero();
        for t in raw.terms {
            let c = parse_rat(&t.c)?;
            let mut factors = Vec::new();
            for f in t.factors {
                if f.n == 0 {
                    return Err(Error::InvalidArgument("factor exponent must be positive".into()));
                }
                factors.push((parse_rat(&f.r)?, f.n));
            }
            let m = StepPolynomial::monomial(c, factors);
            p.add_assign_ref(&m);
        }
        Ok(p)
    }
}

/// Exact value of `sum_m phi_m(t) t^m` for a coefficient map.
pub fn eval_quasi_polynomial<'a>(coeffs: impl IntoIterator<Item = (u32, &'a StepPolynomial)>, t: &Int) -> Rat {
    let tr = rat_int(t);
    coeffs
        .into_iter()
        .map(|(m, phi)| phi.eval(t) * num_traits::pow(tr.clone(), m as usize))
        .fold(Rat::zero(), |acc, x| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use proptest::prelude::*;

    /// Closed-formula coefficients of the [6,2,3] denumerant as written in
    /// the literature, with rates -1/3 and 1/2.
    pub(crate) fn example_linear() -> StepPolynomial {
        let mut p = StepPolynomial::constant(rat(1, 4));
        p.add_assign_ref(&StepPolynomial::linear(rat(-1, 6), rat(-1, 3)));
        p.add_assign_ref(&StepPolynomial::linear(rat(-1, 6), rat(1, 2)));
        p
    }

    pub(crate) fn example_constant() -> StepPolynomial {
        let mut p = StepPolynomial::constant(rat(1, 1));
        p.add_assign_ref(&StepPolynomial::linear(rat(-3, 2), rat(-1, 3)));
        p.add_assign_ref(&StepPolynomial::linear(rat(-3, 2), rat(1, 2)));
        p.add_assign_ref(&StepPolynomial::monomial(rat(1, 2), vec![(rat(-1, 3), 2)]));
        p.add_assign_ref(&StepPolynomial::monomial(rat(1, 1), vec![(rat(-1, 3), 1), (rat(1, 2), 1)]));
        p.add_assign_ref(&StepPolynomial::monomial(rat(1, 2), vec![(rat(1, 2), 2)]));
        p
    }

    #[test]
    fn evaluation_examples() {
        let half = StepPolynomial::linear(rat(1, 1), rat(1, 2));
        assert_eq!(half.eval(&int(3)), rat(1, 2));
        let third = StepPolynomial::linear(rat(1, 1), rat(-1, 3));
        assert_eq!(third.eval(&int(1)), rat(2, 3));
        assert_eq!(half.mul_ref(&half).eval(&int(3)), rat(1, 4));
        assert_eq!(half.mul_ref(&half), StepPolynomial::monomial(rat(1, 1), vec![(rat(1, 2), 2)]));
        assert_eq!(example_linear().eval(&int(1)), rat(1, 18));
        assert_eq!(example_constant().eval(&int(0)), rat(1, 1));
    }

    #[test]
    fn add_negation_cancels() {
        let p = example_constant();
        assert!((&p + &(-&p)).is_zero());
        assert!((&p - &p).is_empty());
    }

    #[test]
    fn periods_and_degrees() {
        assert_eq!(StepPolynomial::constant(rat(3, 2)).period(), int(1));
        let p = &StepPolynomial::linear(rat(1, 1), rat(1, 2)) + &StepPolynomial::linear(rat(1, 1), rat(1, 3));
        assert_eq!(p.period(), int(6));
        assert_eq!(example_constant().period(), int(6));
        assert_eq!(example_constant().degree(), 2);
        assert_eq!(example_linear().degree(), 1);
        // {T/2} + {-T/2} = 2{T/2} as functions, although written differently
        let a = &StepPolynomial::linear(rat(1, 1), rat(1, 2)) + &StepPolynomial::linear(rat(1, 1), rat(-1, 2));
        let b = StepPolynomial::linear(rat(2, 1), rat(1, 2));
        assert!(a.agrees_with(&b));
        // {T/4}*4 - 2*{T/2} ... minimal period detection on a mixed form
        let c = &StepPolynomial::linear(rat(1, 1), rat(1, 6)) - &StepPolynomial::linear(rat(1, 1), rat(1, 6));
        assert_eq!(c.minimal_period(100), Some(int(1)));
        assert_eq!(example_linear().minimal_period(100), Some(int(6)));
    }

    #[test]
    fn zero_rate_kills_monomial() {
        assert!(StepPolynomial::linear(rat(5, 1), rat(3, 1)).is_zero());
        assert_eq!(FracForm::new(rat(7, 3)).rate(), &rat(1, 3));
    }

    #[test]
    fn display_and_json() {
        let p = example_linear();
        let s = p.display_with("t");
        assert_eq!(s, "1/4 - 1/6*{1/2 t} - 1/6*{2/3 t}");
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"{"terms":[{"c":"1/4","factors":[]},{"c":"-1/6","factors":[{"r":"1/2","n":1}]},{"c":"-1/6","factors":[{"r":"2/3","n":1}]}]}"#
        );
        let back: StepPolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<StepPolynomial>(r#"{"terms":[{"c":"1/0","factors":[]}]}"#).is_err());
    }

    fn arb_poly() -> impl Strategy<Value = StepPolynomial> {
        let factor = (-7i64..8, 1i64..7, 1u32..3);
        let term = (-20i64..21, 1i64..5, prop::collection::vec(factor, 0..3));
        prop::collection::vec(term, 0..4).prop_map(|terms| {
            let mut p = StepPolynomial::zero();
            for (cn, cd, fs) in terms {
                let fs = fs.into_iter().map(|(n, d, e)| (rat(n, d), e)).collect();
                p.add_assign_ref(&StepPolynomial::monomial(rat(cn, cd), fs));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn ring_laws_under_evaluation(a in arb_poly(), b in arb_poly(), c in arb_poly(), t in -1000i64..1000) {
            let t = int(t);
            let (va, vb) = (a.eval(&t), b.eval(&t));
            prop_assert_eq!((&a * &b).eval(&t), &va * &vb);
            prop_assert_eq!((&a + &b).eval(&t), &va + &vb);
            prop_assert_eq!((&(&a * &b) * &c).eval(&t), (&a * &(&b * &c)).eval(&t));
            prop_assert_eq!((&a * &(&b + &c)).eval(&t), (&(&a * &b) + &(&a * &c)).eval(&t));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn period_is_a_period(a in arb_poly(), t in -300i64..300) {
            let t = int(t);
            prop_assert_eq!(a.eval(&t), a.eval(&(&t + a.period())));
        }

        #[test]
        fn json_round_trip(a in arb_poly()) {
            let s = serde_json::to_string(&a).unwrap();
            let b: StepPolynomial = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(&b, &a);
            // canonicalization is idempotent
            let s2 = serde_json::to_string(&b).unwrap();
            prop_assert_eq!(s, s2);
        }

        #[test]
        fn degree_bounds_products(a in arb_poly(), b in arb_poly()) {
            let p = &a * &b;
            prop_assert!(p.is_zero() || p.degree() <= a.degree() + b.degree());
        }
    }
}
