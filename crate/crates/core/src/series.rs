//! Truncated Laurent series in `x`, and the `epsilon` layer used when a cone
//! generator is orthogonal to the evaluation direction.
//!
//! A series stores a nominal lowest exponent `low` and the coefficients of
//! `x^low ..= x^high`; everything up to `high` is exact. Products keep only
//! the exactly known part (`min` over the operands' precisions).

use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{factorial, rat_int, Int, Rat};
use crate::error::{Error, Result};
use crate::step_poly::StepPolynomial;

/// Coefficient ring of a [`Laurent`] series.
pub trait Coefficient: Clone + fmt::Debug {
    fn zero_coeff() -> Self;
    fn is_zero_coeff(&self) -> bool;
    fn add_scaled_assign(&mut self, c: &Rat, other: &Self);
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: &Rat) -> Self;
}

impl Coefficient for Rat {
    fn zero_coeff() -> Self {
        Zero::zero()
    }
    fn is_zero_coeff(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_scaled_assign(&mut self, c: &Rat, other: &Self) {
        *self += c * other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: &Rat) -> Self {
        self * c
    }
}

impl Coefficient for StepPolynomial {
    fn zero_coeff() -> Self {
        StepPolynomial::zero()
    }
    fn is_zero_coeff(&self) -> bool {
        StepPolynomial::is_zero(self)
    }
    fn add_scaled_assign(&mut self, c: &Rat, other: &Self) {
        StepPolynomial::add_scaled_assign(self, c, other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.mul_ref(other)
    }
    fn scale(&self, c: &Rat) -> Self {
        StepPolynomial::scale(self, c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Laurent<C> {
    low: i64,
    coeffs: Vec<C>,
}

/// Laurent series in `x` with step-polynomial coefficients.
pub type XSeries = Laurent<StepPolynomial>;
/// Laurent series in `x` with rational coefficients.
pub type ScalarSeries = Laurent<Rat>;

impl<C: Coefficient> Laurent<C> {
    /// Coefficients of `x^low, x^(low+1), ...`; the last one fixes the precision.
    pub fn new(low: i64, coeffs: Vec<C>) -> Self {
        Laurent { low, coeffs }
    }

    pub fn zero(low: i64, high: i64) -> Self {
        let len = (high - low + 1).max(0) as usize;
        Laurent { low, coeffs: vec![C::zero_coeff(); len] }
    }

    /// The constant 1 known up to `x^high`.
    pub fn one(high: i64) -> Self
    where
        C: From<Rat>,
    {
        let mut s = Self::zero(0, high);
        if let Some(c) = s.coeffs.first_mut() {
            *c = C::from(Rat::one());
        }
        s
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    /// Highest exponent known exactly.
    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coefficients(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `x^j`; zero below the lowest exponent.
    pub fn coeff(&self, j: i64) -> Result<C> {
        if j > self.high() {
            return Err(Error::InsufficientTruncation { requested: j, available: self.high() });
        }
        if j < self.low {
            return Ok(C::zero_coeff());
        }
        Ok(self.coeffs[(j - self.low) as usize].clone())
    }

    /// Leading nonzero exponent, if any coefficient is nonzero.
    pub fn order(&self) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.is_zero_coeff()).map(|i| self.low + i as i64)
    }

    /// Drops coefficients above `x^high`.
    pub fn truncate(mut self, high: i64) -> Self {
        let len = (high - self.low + 1).max(0) as usize;
        self.coeffs.truncate(len);
        self
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Laurent<C>) -> Laurent<C> {
        let len = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![C::zero_coeff(); len];
        for (i, a) in self.coeffs.iter().take(len).enumerate() {
            if a.is_zero_coeff() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(len - i).enumerate() {
                if b.is_zero_coeff() {
                    continue;
                }
                out[i + j].add_scaled_assign(&Rat::one(), &a.mul(b));
            }
        }
        Laurent { low: self.low + other.low, coeffs: out }
    }

    /// Product with a series of rational coefficients.
    pub fn mul_scalar_series(&self, other: &ScalarSeries) -> Laurent<C> {
        let len = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![C::zero_coeff(); len];
        for (j, b) in other.coeffs.iter().take(len).enumerate() {
            if Zero::is_zero(b) {
                continue;
            }
            for (i, a) in self.coeffs.iter().take(len - j).enumerate() {
                out[i + j].add_scaled_assign(b, a);
            }
        }
        Laurent { low: self.low + other.low, coeffs: out }
    }

    pub fn scale(&self, c: &Rat) -> Laurent<C> {
        Laurent { low: self.low, coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect() }
    }

    /// `self += c * other`, aligned by exponent; the precision becomes the
    /// smaller of the two.
    pub fn add_scaled_assign(&mut self, c: &Rat, other: &Laurent<C>) {
        let high = self.high().min(other.high());
        let low = self.low.min(other.low);
        if low < self.low {
            let mut coeffs = vec![C::zero_coeff(); (self.low - low) as usize];
            coeffs.append(&mut self.coeffs);
            self.coeffs = coeffs;
            self.low = low;
        }
        self.coeffs.truncate((high - self.low + 1).max(0) as usize);
        for (i, x) in other.coeffs.iter().enumerate() {
            let e = other.low + i as i64;
            if e > high {
                break;
            }
            self.coeffs[(e - self.low) as usize].add_scaled_assign(c, x);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coefficient::is_zero_coeff)
    }
}

impl From<Rat> for StepPolynomial {
    fn from(c: Rat) -> Self {
        StepPolynomial::constant(c)
    }
}

impl From<&ScalarSeries> for XSeries {
    fn from(s: &ScalarSeries) -> Self {
        Laurent { low: s.low, coeffs: s.coeffs.iter().cloned().map(StepPolynomial::constant).collect() }
    }
}

/// Coefficients `h_{-1}, h_0, h_1, ...` of `1/(1 - e^y) = sum h_k y^k`,
/// obtained by inverting `(e^y - 1)/y = sum y^n/(n+1)!` term by term.
pub fn inv_one_minus_exp_unit(len: usize) -> Vec<Rat> {
    // b = (e^y - 1)/y, c = 1/b, then 1/(1-e^y) = -c/y
    let b: Vec<Rat> = (0..len).map(|n| Rat::new(Int::one(), factorial(n as u32 + 1))).collect();
    let mut c: Vec<Rat> = Vec::with_capacity(len);
    for n in 0..len {
        if n == 0 {
            c.push(Rat::one());
            continue;
        }
        let s: Rat = (1..=n).map(|i| &b[i] * &c[n - i]).fold(Rat::zero(), |a, x| a + x);
        c.push(-s);
    }
    c.into_iter().map(|x| -x).collect()
}

/// Expansion of `1/(1 - e^{c x})` at `x = 0`, exact up to `x^order`.
pub fn inv_one_minus_exp(c: &Rat, order: i64) -> Result<ScalarSeries> {
    if Zero::is_zero(c) {
        return Err(Error::ZeroExponentRate);
    }
    let len = (order + 2).max(0) as usize;
    let unit = inv_one_minus_exp_unit(len);
    let mut pow = Rat::one() / c; // c^{-1}
    let coeffs = unit
        .into_iter()
        .map(|h| {
            let v = h * &pow;
            pow *= c;
            v
        })
        .collect();
    Ok(Laurent::new(-1, coeffs))
}

/// `sum_{n=0}^{order} L^n x^n / n!` for a step-linear `L`.
pub fn exp_step_linear(l: &StepPolynomial, order: i64) -> Result<XSeries> {
    if l.degree() > 1 {
        return Err(Error::InvalidArgument(format!("exponent rate has degree {} > 1", l.degree())));
    }
    let mut coeffs = Vec::new();
    let mut power = StepPolynomial::one();
    for n in 0..=order.max(-1) {
        if n > 0 {
            power = power.mul_ref(l);
        }
        coeffs.push(power.scale(&Rat::new(Int::one(), factorial(n as u32))));
    }
    Ok(Laurent::new(0, coeffs))
}

/// Generalized binomial coefficient `binom(k, n)` for integer `k`, `n >= 0`.
fn binom(k: i64, n: u32) -> Rat {
    let mut num = Int::one();
    for i in 0..n as i64 {
        num *= Int::from(k - i);
    }
    Rat::new(num, factorial(n))
}

/// Laurent series in `epsilon` whose coefficients are [`XSeries`];
/// `None` marks an exact zero coefficient.
#[derive(Clone, Debug)]
pub struct EpsSeries {
    low: i64,
    coeffs: Vec<Option<XSeries>>,
}

impl EpsSeries {
    pub fn new(low: i64, coeffs: Vec<Option<XSeries>>) -> Self {
        EpsSeries { low, coeffs }
    }

    /// An `epsilon`-free series.
    pub fn constant(x: XSeries) -> Self {
        EpsSeries { low: 0, coeffs: vec![Some(x)] }
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, j: i64) -> Option<&XSeries> {
        if j < self.low || j > self.high() {
            return None;
        }
        self.coeffs[(j - self.low) as usize].as_ref()
    }

    pub fn mul(&self, other: &EpsSeries) -> EpsSeries {
        let len = self.coeffs.len().min(other.coeffs.len());
        let mut out: Vec<Option<XSeries>> = vec![None; len];
        for (i, a) in self.coeffs.iter().take(len).enumerate() {
            let Some(a) = a else { continue };
            for (j, b) in other.coeffs.iter().take(len - i).enumerate() {
                let Some(b) = b else { continue };
                let p = a.mul(b);
                match &mut out[i + j] {
                    Some(acc) => acc.add_scaled_assign(&Rat::one(), &p),
                    slot => *slot = Some(p),
                }
            }
        }
        EpsSeries { low: self.low + other.low, coeffs: out }
    }

    /// Multiplies every coefficient by an `epsilon`-free series.
    pub fn mul_x(&self, x: &XSeries) -> EpsSeries {
        EpsSeries { low: self.low, coeffs: self.coeffs.iter().map(|c| c.as_ref().map(|c| c.mul(x))).collect() }
    }

    pub fn add_scaled_assign(&mut self, c: &Rat, other: &EpsSeries) {
        let high = self.high().min(other.high());
        let low = self.low.min(other.low);
        if low < self.low {
            let mut coeffs = vec![None; (self.low - low) as usize];
            coeffs.append(&mut self.coeffs);
            self.coeffs = coeffs;
            self.low = low;
        }
        self.coeffs.truncate((high - self.low + 1).max(0) as usize);
        for (i, x) in other.coeffs.iter().enumerate() {
            let e = other.low + i as i64;
            if e > high {
                break;
            }
            let Some(x) = x else { continue };
            match &mut self.coeffs[(e - self.low) as usize] {
                Some(acc) => acc.add_scaled_assign(c, x),
                slot => *slot = Some(x.scale(c)),
            }
        }
    }
}

/// `1/(1 - e^{(c + eps*d) x})` as a series in `epsilon` with `x`-series
/// coefficients, known up to `epsilon^eps_high`; every `x`-coefficient
/// series runs from nominal `x^-1` to `x^x_high`.
///
/// For `c != 0` this is `sum_k h_k x^k (c + eps d)^k` expanded binomially;
/// for `c = 0` it is `sum_k h_k (eps d x)^k`, with a simple pole in `epsilon`.
pub fn inv_one_minus_exp_perturbed(c: &Rat, d: &Rat, eps_high: i64, x_high: i64) -> Result<EpsSeries> {
    let x_len = (x_high + 2).max(0) as usize;
    if Zero::is_zero(c) {
        if Zero::is_zero(d) {
            return Err(Error::ZeroExponentRate);
        }
        let n_len = (eps_high + 2).max(0) as usize;
        let h = inv_one_minus_exp_unit(n_len.max(x_len));
        let coeffs = (-1..=eps_high)
            .map(|n| {
                let mut s = Laurent::<StepPolynomial>::zero(-1, x_high);
                if n <= x_high {
                    let v = &h[(n + 1) as usize] * dpow(d, n);
                    s.coeffs[(n + 1) as usize] = StepPolynomial::constant(v);
                }
                Some(s)
            })
            .collect();
        return Ok(EpsSeries { low: -1, coeffs });
    }
    let h = inv_one_minus_exp_unit(x_len);
    let coeffs = (0..=eps_high.max(-1))
        .map(|n| {
            let n = n as u32;
            let cs: Vec<StepPolynomial> = (0..x_len)
                .map(|i| {
                    let k = i as i64 - 1;
                    let v = &h[i] * binom(k, n) * dpow(c, k - n as i64) * dpow(d, n as i64);
                    StepPolynomial::constant(v)
                })
                .collect();
            Some(Laurent::new(-1, cs))
        })
        .collect();
    Ok(EpsSeries { low: 0, coeffs })
}

fn dpow(base: &Rat, e: i64) -> Rat {
    if e >= 0 {
        num_traits::pow(base.clone(), e as usize)
    } else {
        num_traits::pow(Rat::one() / base, (-e) as usize)
    }
}

/// `exp(eps * x * L)` up to `epsilon^eps_high`; coefficient `n` is
/// `x^n L^n / n!` on the window `x^0 ..= x^x_high`.
pub fn exp_eps_step_linear(l: &StepPolynomial, eps_high: i64, x_high: i64) -> EpsSeries {
    let mut power = StepPolynomial::one();
    let coeffs = (0..=eps_high.max(-1))
        .map(|n| {
            if n > 0 {
                power = power.mul_ref(l);
            }
            let mut s = XSeries::zero(0, x_high);
            if n <= x_high {
                s.coeffs[n as usize] = power.scale(&Rat::new(Int::one(), factorial(n as u32)));
            }
            Some(s)
        })
        .collect();
    EpsSeries { low: 0, coeffs }
}

/// Decides that a step polynomial vanishes on the integers: on a full period
/// when it is short, otherwise on a prefix plus a deterministic spread.
fn vanishes(p: &StepPolynomial) -> bool {
    if p.is_zero() {
        return true;
    }
    let q = p.period();
    if q <= Int::from(4096) {
        let mut t = Int::zero();
        while t < q {
            if !Zero::is_zero(&p.eval(&t)) {
                return false;
            }
            t += 1;
        }
        return true;
    }
    let prefix = (0..64u64).map(Int::from);
    let spread = (0..64u64).map(|i| (&q * Int::from(i * 2654435761u64 % 1000003)) / Int::from(1000003u64));
    prefix.chain(spread).all(|t| Zero::is_zero(&p.eval(&t)))
}

/// The `epsilon^0` coefficient of a summed expansion. Every strictly negative
/// `epsilon` order must have cancelled (as functions of `T`).
pub fn eps_constant_term(e: &EpsSeries) -> Result<XSeries> {
    for j in e.low..0 {
        if let Some(x) = e.coeff(j) {
            for (i, c) in x.coefficients().iter().enumerate() {
                if !vanishes(c) {
                    return Err(Error::PerturbationInconsistency(format!(
                        "epsilon^{j} x^{} coefficient {} survives",
                        x.low() + i as i64,
                        c
                    )));
                }
            }
        }
    }
    if e.high() < 0 {
        return Err(Error::InsufficientTruncation { requested: 0, available: e.high() });
    }
    Ok(e.coeff(0).cloned().unwrap_or_else(|| XSeries::zero(0, -1)))
}

/// `x^-1` coefficient of `((-x)^i / i!) F`, i.e. `((-1)^i / i!)` times the
/// coefficient of `x^{-(i+1)}` in `F`.
pub fn residue_coefficient(f: &XSeries, i: u32) -> Result<StepPolynomial> {
    let c = f.coeff(-(i as i64) - 1)?;
    let sign = if i.is_multiple_of(2) { Rat::one() } else { -Rat::one() };
    Ok(c.scale(&(sign / rat_int(&factorial(i)))))
}
