//! Integer factorization for the periodicity predictor: trial division up to
//! 10^6, then Miller–Rabin and Pollard rho (Brent) on what is left.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::Int;
use crate::error::{Error, Result};

const TRIAL_LIMIT: u64 = 1_000_000;

/// Prime-power factorization, stored as `prime -> exponent`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Factorization(BTreeMap<Int, u32>);

impl Factorization {
    pub fn new(map: BTreeMap<Int, u32>) -> Self {
        Factorization(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn value(&self) -> Int {
        self.0.iter().map(|(p, e)| num_traits::pow(p.clone(), *e as usize)).product()
    }

    pub fn primes(&self) -> impl Iterator<Item = &Int> {
        self.0.keys()
    }

    pub fn exponents(&self) -> &BTreeMap<Int, u32> {
        &self.0
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Parses `"p1^e1*p2^e2*..."`; `"1"` is the empty product. Primality of the
/// bases is not checked here.
impl FromStr for Factorization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut map = BTreeMap::new();
        if s == "1" {
            return Ok(Factorization(map));
        }
        for part in s.split('*') {
            let part = part.trim();
            let (base, exp) = match part.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim()),
                None => (part, "1"),
            };
            let p: Int = base
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad prime '{base}' in '{s}'")))?;
            let e: u32 = exp
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad exponent '{exp}' in '{s}'")))?;
            if p <= Int::one() {
                return Err(Error::InvalidArgument(format!("base {p} is not a prime in '{s}'")));
            }
            *map.entry(p).or_insert(0) += e;
        }
        Ok(Factorization::new(map))
    }
}

/// Factors `n >= 1`. The flag reports whether Pollard rho was needed.
pub fn factorize(n: &Int) -> (Factorization, bool) {
    assert!(n.is_positive(), "factorize expects a positive integer");
    let mut map = BTreeMap::new();
    let mut m = n.clone();
    let mut p = 2u64;
    while p <= TRIAL_LIMIT {
        let pp = Int::from(p);
        if &pp * &pp > m {
            break;
        }
        while (&m % &pp).is_zero() {
            m /= &pp;
            *map.entry(pp.clone()).or_insert(0) += 1;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut used_rho = false;
    if !m.is_one() {
        let mut stack = vec![m];
        while let Some(x) = stack.pop() {
            if x.is_one() {
                continue;
            }
            if is_probable_prime(&x) {
                *map.entry(x).or_insert(0) += 1;
                continue;
            }
            used_rho = true;
            let d = pollard_brent(&x);
            let q = &x / &d;
            stack.push(d);
            stack.push(q);
        }
    }
    (Factorization(map), used_rho)
}

fn is_probable_prime(n: &Int) -> bool {
    if n < &Int::from(2) {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let p = Int::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = Int::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    // these bases are deterministic below 3.3e24
    'base: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let mut x = Int::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&Int::from(2), n);
            if x == nm1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: &Int) -> Int {
    if n.is_even() {
        return Int::from(2);
    }
    let mut c = Int::one();
    loop {
        let f = |y: &Int| (y * y + &c) % n;
        let mut y = Int::from(2);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut g = Int::one();
        let mut q = Int::one();
        let mut r = 1u64;
        let m = 128u64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    q = (q * (&x - &y).abs()) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if &g == n {
            // the batched product hit zero; redo the last batch one step at a time
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1;
    }
}
