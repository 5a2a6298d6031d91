//! Gcd spectra of sublists, the Möbius function of their divisibility poset,
//! and the fan analysis that predicts the first periodic coefficient.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{gcd_list, Int};
use crate::error::{Error, Result};
use crate::factor::Factorization;

/// Gcds of all sublists of size `> threshold`, each with one witness sublist
/// (0-based indices, sorted).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GcdSpectrum {
    pub threshold: usize,
    pub values: BTreeMap<Int, Vec<usize>>,
}

impl GcdSpectrum {
    pub fn contains(&self, f: &Int) -> bool {
        self.values.contains_key(f)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Int> {
        self.values.keys()
    }
}

/// Every gcd realised by a sublist of size `>= min_size`, with the largest
/// such sublist size and a witness. Built once and sliced per threshold.
#[derive(Clone, Debug)]
pub struct SpectrumTable {
    n_items: usize,
    min_size: usize,
    best: BTreeMap<Int, (usize, Vec<usize>)>,
}

impl SpectrumTable {
    /// Enumerates complements of size `<= max_removed`.
    pub fn build(alphas: &[Int], max_removed: usize) -> Self {
        let n = alphas.len();
        let max_removed = max_removed.min(n.saturating_sub(1));
        let mut best: BTreeMap<Int, (usize, Vec<usize>)> = BTreeMap::new();
        let mut removed = Vec::with_capacity(max_removed);
        enumerate_complements(n, max_removed, 0, &mut removed, &mut |removed| {
            let kept: Vec<usize> = (0..n).filter(|i| !removed.contains(i)).collect();
            let g = gcd_list(kept.iter().map(|&i| &alphas[i]));
            let size = kept.len();
            match best.get(&g) {
                Some((s, _)) if *s >= size => {}
                _ => {
                    best.insert(g, (size, kept));
                }
            }
        });
        SpectrumTable { n_items: n, min_size: n - max_removed, best }
    }

    /// `G_{>m}`: gcds of sublists with more than `m` elements.
    pub fn above(&self, m: usize) -> Result<GcdSpectrum> {
        if m + 1 < self.min_size {
            return Err(Error::InvalidArgument(format!(
                "threshold {m} below enumerated range (sublists of size >= {})",
                self.min_size
            )));
        }
        let values = self
            .best
            .iter()
            .filter(|(_, (size, _))| *size > m)
            .map(|(f, (_, w))| (f.clone(), w.clone()))
            .collect();
        Ok(GcdSpectrum { threshold: m, values })
    }

    pub fn items(&self) -> usize {
        self.n_items
    }
}

fn enumerate_complements(
    n: usize,
    max_removed: usize,
    start: usize,
    removed: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    visit(removed);
    if removed.len() == max_removed {
        return;
    }
    for i in start..n {
        removed.push(i);
        enumerate_complements(n, max_removed, i + 1, removed, visit);
        removed.pop();
    }
}

/// `G_{>N-k}` for an instance of `N+1` entries.
pub fn gcd_spectrum(alphas: &[Int], k: usize) -> Result<GcdSpectrum> {
    let n = alphas.len().checked_sub(1).ok_or_else(|| Error::InvalidInstance("empty instance".into()))?;
    if k > n {
        return Err(Error::KOutOfRange { k: k as i64, n });
    }
    SpectrumTable::build(alphas, k).above(n - k)
}

pub type MobiusTable = BTreeMap<Int, Int>;

/// `mu(f) = 1 - sum of mu(v)` over proper multiples `v` of `f` in the spectrum.
pub fn mobius(spec: &GcdSpectrum) -> MobiusTable {
    mobius_of(spec.values.keys())
}

pub fn mobius_of<'a>(values: impl IntoIterator<Item = &'a Int>) -> MobiusTable {
    let mut vals: Vec<&Int> = values.into_iter().collect();
    vals.sort();
    vals.dedup();
    let mut mu = MobiusTable::new();
    for (i, f) in vals.iter().enumerate().rev() {
        let mut m = Int::one();
        for v in &vals[i + 1..] {
            if v.is_multiple_of(f) {
                m -= &mu[*v];
            }
        }
        mu.insert((*f).clone(), m);
    }
    mu
}

/// Result of the prime-column scan over a factored instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanAnalysis {
    /// Size of the largest sublist with gcd different from 1.
    pub ell: usize,
    /// The distinct maximal sublists realising `ell`.
    pub sublists: Vec<Vec<usize>>,
    /// `G_{>ell-1}`, with witnesses.
    pub spectrum: GcdSpectrum,
    pub mobius: MobiusTable,
}

impl FanAnalysis {
    /// `ell - 1`, or `None` when every entry is 1.
    pub fn first_nonconstant_degree(&self) -> Option<usize> {
        self.ell.checked_sub(1)
    }

    /// Product of the nontrivial spectrum values.
    pub fn predicted_period(&self) -> Int {
        self.spectrum.iter().filter(|f| !f.is_one()).product()
    }
}

pub fn largest_nontrivial_sublists(alphas: &[Int], factored: &[Factorization]) -> Result<FanAnalysis> {
    if alphas.len() != factored.len() {
        return Err(Error::InconsistentFactorization(format!(
            "{} entries but {} factorizations",
            alphas.len(),
            factored.len()
        )));
    }
    for (i, (a, fac)) in alphas.iter().zip(factored).enumerate() {
        if &fac.value() != a {
            return Err(Error::InconsistentFactorization(format!("entry {i}: {} != {a}", fac)));
        }
    }
    let mut columns: BTreeMap<Int, Vec<usize>> = BTreeMap::new();
    for (i, fac) in factored.iter().enumerate() {
        for p in fac.primes() {
            columns.entry(p.clone()).or_default().push(i);
        }
    }
    let ell = columns.values().map(Vec::len).max().unwrap_or(0);
    if ell == alphas.len() && ell > 0 {
        return Err(Error::DegenerateGcd);
    }
    let mut sublists: Vec<Vec<usize>> = columns.into_values().filter(|c| c.len() == ell && ell > 0).collect();
    sublists.sort();
    sublists.dedup();
    let mut values = BTreeMap::new();
    values.insert(Int::one(), (0..alphas.len()).collect::<Vec<_>>());
    for s in &sublists {
        let g = gcd_list(s.iter().map(|&i| &alphas[i]));
        values.entry(g).or_insert_with(|| s.clone());
    }
    let spectrum = GcdSpectrum { threshold: ell.saturating_sub(1), values };
    let mobius = mobius(&spectrum);
    Ok(FanAnalysis { ell, sublists, spectrum, mobius })
}

/// `ell - 1` from the prime-column scan, `None` if all entries equal 1.
pub fn first_nonconstant_degree(alphas: &[Int], factored: &[Factorization]) -> Result<Option<usize>> {
    Ok(largest_nontrivial_sublists(alphas, factored)?.first_nonconstant_degree())
}

/// Checks `sum_{f : d | f} mu(f) = 1` for every `d` dividing some spectrum
/// value; `d` ranges over the gcd-closure of the spectrum, which is where the
/// sum can change.
pub fn inclusion_exclusion_holds(spec: &GcdSpectrum, mu: &MobiusTable) -> bool {
    let vals: Vec<Int> = spec.values.keys().cloned().collect();
    let mut closure: Vec<Int> = vals.clone();
    loop {
        let mut added = false;
        let snapshot = closure.clone();
        for a in &snapshot {
            for b in &snapshot {
                let g = a.gcd(b);
                if !closure.contains(&g) {
                    closure.push(g);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    closure.iter().all(|d| {
        let s: Int = vals.iter().filter(|f| f.is_multiple_of(d)).map(|f| mu[f].clone()).sum();
        s.is_one() || (s.is_zero() && !vals.iter().any(|f| f.is_multiple_of(d)))
    })
}
