//! LLL reduction (delta = 3/4) in exact integer arithmetic and exhaustive
//! shortest-vector enumeration. Dimensions here are tiny (at most the
//! number of requested coefficients), so exactness is affordable.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{Int, IntMatrix, Rat};
use crate::error::{Error, Result};

fn dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Integral LLL state (Cohen, Alg. 2.6.7): `d[i]` are the leading Gram
/// minors, `lam[k][j] = d[j+1] * mu[k][j]` stays integral.
struct Lll {
    b: Vec<Vec<Int>>,
    d: Vec<Int>, // d[0] = 1, d[i+1] belongs to vector i
    lam: Vec<Vec<Int>>,
}

impl Lll {
    fn new(b: Vec<Vec<Int>>) -> Result<Self> {
        let n = b.len();
        let mut s = Lll { b, d: vec![Int::one(); n + 1], lam: vec![vec![Int::zero(); n]; n] };
        for k in 0..n {
            s.gram_schmidt_row(k)?;
        }
        Ok(s)
    }

    fn gram_schmidt_row(&mut self, k: usize) -> Result<()> {
        for j in 0..=k {
            let mut u = dot(&self.b[k], &self.b[j]);
            for i in 0..j {
                u = (&self.d[i + 1] * &u - &self.lam[k][i] * &self.lam[j][i]) / &self.d[i];
            }
            if j < k {
                self.lam[k][j] = u;
            } else {
                if u.is_zero() {
                    return Err(Error::Singular);
                }
                self.d[k + 1] = u;
            }
        }
        Ok(())
    }

    fn reduce(&mut self, k: usize, l: usize) {
        let two_lam: Int = &self.lam[k][l] * 2;
        let dl = &self.d[l + 1];
        if two_lam.abs() > *dl {
            // nearest integer to lam / d
            let q = (&two_lam + dl).div_floor(&(dl * 2));
            let bl = self.b[l].clone();
            for (x, y) in self.b[k].iter_mut().zip(&bl) {
                *x -= &q * y;
            }
            self.lam[k][l] -= &q * dl;
            for i in 0..l {
                let v = &q * &self.lam[l][i];
                self.lam[k][i] -= v;
            }
        }
    }

    fn swap(&mut self, k: usize) {
        self.b.swap(k, k - 1);
        for j in 0..k - 1 {
            let t = self.lam[k][j].clone();
            self.lam[k][j] = self.lam[k - 1][j].clone();
            self.lam[k - 1][j] = t;
        }
        let lam = self.lam[k][k - 1].clone();
        let n = self.b.len();
        let bnew = (&self.d[k - 1] * &self.d[k + 1] + &lam * &lam) / &self.d[k];
        for i in k + 1..n {
            let t = self.lam[i][k].clone();
            self.lam[i][k] = (&self.d[k + 1] * &self.lam[i][k - 1] - &lam * &t) / &self.d[k];
            self.lam[i][k - 1] = (&bnew * &t + &lam * &self.lam[i][k]) / &self.d[k + 1];
        }
        self.d[k] = bnew;
    }

    fn run(&mut self) {
        let n = self.b.len();
        let mut k = 1;
        while k < n {
            self.reduce(k, k - 1);
            // Lovász with delta = 3/4: 4 d_k d_{k-2} >= 3 d_{k-1}^2 - 4 lam^2
            let lhs = &self.d[k + 1] * &self.d[k - 1] * 4;
            let rhs = &self.d[k] * &self.d[k] * 3 - &self.lam[k][k - 1] * &self.lam[k][k - 1] * 4;
            if lhs < rhs {
                self.swap(k);
                k = k.saturating_sub(1).max(1);
            } else {
                for l in (0..k.saturating_sub(1)).rev() {
                    self.reduce(k, l);
                }
                k += 1;
            }
        }
    }
}

/// LLL-reduces the columns of a nonsingular square basis.
pub fn lll_reduce(basis: &IntMatrix) -> Result<IntMatrix> {
    check_basis(basis)?;
    let mut s = Lll::new(basis.columns())?;
    s.run();
    Ok(IntMatrix::from_columns(&s.b))
}

fn check_basis(basis: &IntMatrix) -> Result<()> {
    if !basis.is_square() {
        return Err(Error::Dimension("lattice basis must be square".into()));
    }
    if basis.rows() == 0 || basis.det()?.is_zero() {
        return Err(Error::Singular);
    }
    Ok(())
}

/// Deterministic representative: first nonzero coordinate positive.
fn normalize_sign(v: &mut [Int]) {
    if v.iter().find(|x| !x.is_zero()).is_some_and(Signed::is_negative) {
        for x in v.iter_mut() {
            *x = -x.clone();
        }
    }
}

/// A nonzero lattice vector of minimal Euclidean norm. Ties go to the
/// lexicographically smallest vector whose first nonzero entry is positive.
pub fn shortest_vector(basis: &IntMatrix) -> Result<Vec<Int>> {
    let reduced = lll_reduce(basis)?;
    let b = reduced.columns();
    let n = b.len();
    let s = Lll::new(b.clone())?;
    // rational Gram-Schmidt data from the integral representation
    let bstar: Vec<Rat> = (0..n).map(|i| Rat::new(s.d[i + 1].clone(), s.d[i].clone())).collect();
    let mu: Vec<Vec<Rat>> = (0..n)
        .map(|k| (0..k).map(|j| Rat::new(s.lam[k][j].clone(), s.d[j + 1].clone())).collect())
        .collect();

    let mut best: Vec<Int> = b[0].clone();
    normalize_sign(&mut best);
    let mut best_norm = Rat::from_integer(dot(&best, &best));

    let mut coeffs = vec![Int::zero(); n];
    enumerate(n, &b, &bstar, &mu, &mut coeffs, Rat::zero(), &mut best, &mut best_norm, None);
    Ok(best)
}

/// All nonzero lattice vectors of squared norm `<= bound`, one of each
/// `+-v` pair (first nonzero entry positive), in lexicographic order.
pub fn vectors_within(basis: &IntMatrix, bound: &Int) -> Result<Vec<Vec<Int>>> {
    let reduced = lll_reduce(basis)?;
    let b = reduced.columns();
    let n = b.len();
    let s = Lll::new(b.clone())?;
    let bstar: Vec<Rat> = (0..n).map(|i| Rat::new(s.d[i + 1].clone(), s.d[i].clone())).collect();
    let mu: Vec<Vec<Rat>> = (0..n)
        .map(|k| (0..k).map(|j| Rat::new(s.lam[k][j].clone(), s.d[j + 1].clone())).collect())
        .collect();
    let mut found = Vec::new();
    let mut best = Vec::new();
    let mut best_norm = Rat::from_integer(bound.clone());
    let mut coeffs = vec![Int::zero(); n];
    enumerate(n, &b, &bstar, &mu, &mut coeffs, Rat::zero(), &mut best, &mut best_norm, Some(&mut found));
    found.sort();
    found.dedup();
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    level: usize,
    b: &[Vec<Int>],
    bstar: &[Rat],
    mu: &[Vec<Rat>],
    coeffs: &mut Vec<Int>,
    partial: Rat,
    best: &mut Vec<Int>,
    best_norm: &mut Rat,
    mut collect: Option<&mut Vec<Vec<Int>>>,
) {
    let n = b.len();
    if level == 0 {
        if coeffs.iter().all(Zero::is_zero) {
            return;
        }
        let mut v = vec![Int::zero(); b[0].len()];
        for (c, bi) in coeffs.iter().zip(b) {
            if !c.is_zero() {
                for (x, y) in v.iter_mut().zip(bi) {
                    *x += c * y;
                }
            }
        }
        normalize_sign(&mut v);
        let norm = Rat::from_integer(dot(&v, &v));
        if let Some(out) = collect {
            if norm <= *best_norm {
                out.push(v);
            }
            return;
        }
        if norm < *best_norm || (norm == *best_norm && v < *best) {
            *best = v;
            *best_norm = norm;
        }
        return;
    }
    let i = level - 1;
    let center: Rat = -(i + 1..n).map(|j| &mu[j][i] * Rat::from_integer(coeffs[j].clone())).sum::<Rat>();
    let budget = &*best_norm - &partial;
    if budget.is_negative() {
        return;
    }
    // (x - center)^2 * bstar_i <= budget
    let bound = &budget / &bstar[i];
    let radius = bound.floor().to_integer().sqrt() + Int::one();
    let lo = (&center - Rat::from_integer(radius.clone())).floor().to_integer();
    let hi = (&center + Rat::from_integer(radius)).ceil().to_integer();
    let mut x = lo;
    while x <= hi {
        let dev = Rat::from_integer(x.clone()) - &center;
        let contrib = &dev * &dev * &bstar[i];
        if contrib <= budget {
            coeffs[i] = x.clone();
            let next = &partial + &contrib;
            enumerate(i, b, bstar, mu, coeffs, next, best, best_norm, collect.as_deref_mut());
        }
        x += 1;
    }
    coeffs[i] = Int::zero();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use proptest::prelude::*;

    fn norm2(v: &[Int]) -> Int {
        dot(v, v)
    }

    /// Brute force: all coefficient vectors in a box, keep the minimum.
    fn brute_shortest(basis: &IntMatrix, range: i64) -> Int {
        let n = basis.cols();
        let mut best: Option<Int> = None;
        let mut c = vec![-range; n];
        loop {
            if c.iter().any(|&x| x != 0) {
                let v = basis.mul_vec(&c.iter().map(|&x| int(x)).collect::<Vec<_>>());
                let nv = norm2(&v);
                if best.as_ref().is_none_or(|b| nv < *b) {
                    best = Some(nv);
                }
            }
            let mut i = 0;
            while i < n {
                c[i] += 1;
                if c[i] <= range {
                    break;
                }
                c[i] = -range;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        best.unwrap()
    }

    #[test]
    fn shortest_examples() {
        let v = shortest_vector(&IntMatrix::identity(2)).unwrap();
        assert_eq!(v, vec![int(0), int(1)]);
        let b = IntMatrix::from_columns(&[vec![int(2), int(0)], vec![int(0), int(3)]]);
        assert_eq!(shortest_vector(&b).unwrap(), vec![int(2), int(0)]);
        // columns (5,0) and (3,1)
        let b = IntMatrix::from_columns(&[vec![int(5), int(0)], vec![int(3), int(1)]]);
        let v = shortest_vector(&b).unwrap();
        assert_eq!(norm2(&v), brute_shortest(&b, 6));
        assert_eq!(norm2(&v), int(5));
    }

    #[test]
    fn singular_rejected() {
        let b = IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(shortest_vector(&b), Err(Error::Singular));
        assert_eq!(lll_reduce(&b), Err(Error::Singular));
    }

    fn rat_gs(b: &[Vec<Int>]) -> (Vec<Rat>, Vec<Vec<Rat>>) {
        let n = b.len();
        let mut star: Vec<Vec<Rat>> = Vec::new();
        let mut mu = vec![vec![Rat::zero(); n]; n];
        let mut norms = Vec::new();
        for k in 0..n {
            let mut v: Vec<Rat> = b[k].iter().map(|x| Rat::from_integer(x.clone())).collect();
            for j in 0..k {
                let num: Rat = b[k].iter().zip(&star[j]).map(|(x, y)| Rat::from_integer(x.clone()) * y).sum();
                mu[k][j] = num / &norms[j];
                for (a, s) in v.iter_mut().zip(&star[j]) {
                    *a -= &mu[k][j] * s;
                }
            }
            norms.push(v.iter().map(|x| x * x).sum::<Rat>());
            star.push(v);
        }
        (norms, mu)
    }

    #[test]
    fn vectors_within_small_ball() {
        let v = vectors_within(&IntMatrix::identity(2), &int(2)).unwrap();
        let expect: Vec<Vec<Int>> = [[0, 1], [1, -1], [1, 0], [1, 1]].iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        assert_eq!(v, expect);
        let b = IntMatrix::from_rows(&[vec![5, 3], vec![0, 1]]);
        let v = vectors_within(&b, &int(10)).unwrap();
        let expect: Vec<Vec<Int>> = [[1, -3], [1, 2], [2, -1], [3, 1]].iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        assert_eq!(v, expect);
    }

    proptest! {
        #[test]
        fn lll_output_is_reduced_and_equivalent(v in prop::collection::vec(-30i64..31, 9)) {
            let rows: Vec<Vec<i64>> = v.chunks(3).map(|c| c.to_vec()).collect();
            let b = IntMatrix::from_rows(&rows);
            prop_assume!(!b.det().unwrap().is_zero());
            let r = lll_reduce(&b).unwrap();
            prop_assert_eq!(r.det().unwrap().abs(), b.det().unwrap().abs());
            // every reduced column is an integer combination of the input
            for col in r.columns() {
                let x = b.inverse_times(&col).unwrap();
                prop_assert!(x.iter().all(|q| q.is_integer()));
            }
            let (norms, mu) = rat_gs(&r.columns());
            let half = Rat::new(int(1), int(2));
            for k in 0..3 {
                for j in 0..k {
                    prop_assert!(mu[k][j].abs() <= half);
                }
                if k > 0 {
                    let lhs = norms[k].clone();
                    let rhs = (Rat::new(int(3), int(4)) - &mu[k][k - 1] * &mu[k][k - 1]) * &norms[k - 1];
                    prop_assert!(lhs >= rhs);
                }
            }
        }

        #[test]
        fn shortest_matches_brute_force(v in prop::collection::vec(-12i64..13, 4)) {
            let b = IntMatrix::from_rows(&[vec![v[0], v[1]], vec![v[2], v[3]]]);
            prop_assume!(!b.det().unwrap().is_zero());
            let s = shortest_vector(&b).unwrap();
            // coefficients of a shortest vector are bounded well within 40 here
            prop_assert_eq!(norm2(&s), brute_shortest(&b, 40));
            let x = b.inverse_times(&s).unwrap();
            prop_assert!(x.iter().all(|q| q.is_integer()));
        }
    }
}
