//! Exact integer and rational arithmetic, plus the small amount of integer
//! linear algebra the lattice code needs (determinants, exact solves,
//! Hermite normal form, kernel lattices of congruences).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn rat_int(v: &Int) -> Rat {
    Rat::from_integer(v.clone())
}

/// Fractional part `{q} = q - floor(q)`, always in `[0, 1)`.
pub fn frac(q: &Rat) -> Rat {
    q - q.floor()
}

pub fn lcm(a: &Int, b: &Int) -> Int {
    a.lcm(b)
}

pub fn factorial(n: u32) -> Int {
    (1..=n).fold(Int::one(), |acc, i| acc * Int::from(i))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_rat(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p` or `p/q` (denominator nonzero).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("malformed rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().map_err(|_| bad())?;
            let d: Int = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Extended gcd of a list: returns `g = gcd(v) > 0` and a certificate
/// `c` with `sum c_i v_i = g`.
pub fn ext_gcd_list(v: &[Int]) -> Result<(Int, Vec<Int>)> {
    if v.iter().all(Zero::is_zero) {
        return Err(Error::DegenerateGcd);
    }
    let mut g = Int::zero();
    let mut coeffs = vec![Int::zero(); v.len()];
    for (i, x) in v.iter().enumerate() {
        if g.is_zero() {
            if !x.is_zero() {
                g = x.abs();
                coeffs[i] = Int::from(x.signum());
            }
            continue;
        }
        let e = g.extended_gcd(x);
        // e.gcd = e.x * g + e.y * x
        for c in coeffs.iter_mut().take(i) {
            *c *= &e.x;
        }
        coeffs[i] = e.y;
        g = e.gcd;
    }
    if g.is_negative() {
        g = -g;
        for c in coeffs.iter_mut() {
            *c = -c.clone();
        }
    }
    Ok((g, coeffs))
}

pub fn gcd_list<'a>(v: impl IntoIterator<Item = &'a Int>) -> Int {
    v.into_iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// Dense integer matrix, row-major. Lattice bases are stored column-wise:
/// the columns generate the lattice.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows<T: Into<Int> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, x) in row.iter().enumerate() {
                m[(i, j)] = x.clone().into();
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<Int>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Int> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Int>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Int::zero();
                for l in 0..self.cols {
                    acc += &self[(i, l)] * &other[(l, j)];
                }
                m[(i, j)] = acc;
            }
        }
        Ok(m)
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<Int> {
        if !self.is_square() {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Int::one());
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(p) => {
                        for j in 0..n {
                            a.data.swap(k * n + j, p * n + j);
                        }
                        sign = -sign;
                    }
                    None => return Ok(Int::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        Ok(sign * a[(n - 1, n - 1)].clone())
    }

    /// Exact rational solution of `self * x = v`.
    pub fn inverse_times(&self, v: &[Int]) -> Result<Vec<Rat>> {
        let cols: Vec<Vec<Rat>> = vec![v.iter().map(rat_int).collect()];
        Ok(self.solve_many(&cols)?.pop().expect("one column"))
    }

    /// Solves `self * X = C` for each right-hand side column of `rhs`.
    pub fn solve_many(&self, rhs: &[Vec<Rat>]) -> Result<Vec<Vec<Rat>>> {
        if !self.is_square() {
            return Err(Error::Dimension("solve with a non-square matrix".into()));
        }
        let n = self.rows;
        let m = rhs.len();
        // augmented [A | C]
        let mut a: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                let mut row: Vec<Rat> = (0..n).map(|j| rat_int(&self[(i, j)])).collect();
                row.extend(rhs.iter().map(|c| {
                    assert_eq!(c.len(), n, "rhs length");
                    c[i].clone()
                }));
                row
            })
            .collect();
        for k in 0..n {
            let p = (k..n).find(|&i| !a[i][k].is_zero()).ok_or(Error::Singular)?;
            a.swap(k, p);
            let pivot = a[k][k].clone();
            for x in a[k].iter_mut().skip(k) {
                *x /= &pivot;
            }
            for i in 0..n {
                if i != k && !a[i][k].is_zero() {
                    let factor = a[i][k].clone();
                    for j in k..n + m {
                        let d = &factor * &a[k][j];
                        a[i][j] -= d;
                    }
                }
            }
        }
        Ok((0..m).map(|c| (0..n).map(|i| a[i][n + c].clone()).collect()).collect())
    }

    /// Adjugate matrix, `adj(A) = det(A) * A^{-1}`; requires nonsingular input.
    pub fn adjugate(&self) -> Result<IntMatrix> {
        let d = self.det()?;
        if d.is_zero() {
            return Err(Error::Singular);
        }
        let n = self.rows;
        let ident: Vec<Vec<Rat>> = (0..n)
            .map(|j| (0..n).map(|i| if i == j { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        let inv = self.solve_many(&ident)?;
        let dr = rat_int(&d);
        let mut adj = IntMatrix::zeros(n, n);
        for (j, col) in inv.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                let v = x * &dr;
                debug_assert!(v.is_integer());
                adj[(i, j)] = v.to_integer();
            }
        }
        Ok(adj)
    }

    /// Column-style Hermite normal form of a square nonsingular matrix:
    /// lower triangular, positive diagonal, entries left of the diagonal
    /// reduced into `[0, diag)`. Spans the same column lattice.
    pub fn hermite_normal_form(&self) -> Result<IntMatrix> {
        if !self.is_square() {
            return Err(Error::Dimension("HNF of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        for i in 0..n {
            // gather the gcd of row i over columns i.. into column i
            for j in i + 1..n {
                if a[(i, j)].is_zero() {
                    continue;
                }
                if a[(i, i)].is_zero() {
                    a.swap_cols(i, j);
                    continue;
                }
                let (x, y) = (a[(i, i)].clone(), a[(i, j)].clone());
                let e = x.extended_gcd(&y);
                let (p, q) = (&x / &e.gcd, &y / &e.gcd);
                for r in 0..n {
                    let ci = a[(r, i)].clone();
                    let cj = a[(r, j)].clone();
                    a[(r, i)] = &e.x * &ci + &e.y * &cj;
                    a[(r, j)] = &p * &cj - &q * &ci;
                }
            }
            if a[(i, i)].is_zero() {
                return Err(Error::Singular);
            }
            if a[(i, i)].is_negative() {
                for r in 0..n {
                    a[(r, i)] = -a[(r, i)].clone();
                }
            }
            let d = a[(i, i)].clone();
            for j in 0..i {
                let q = a[(i, j)].div_floor(&d);
                if !q.is_zero() {
                    for r in 0..n {
                        let v = &q * &a[(r, i)];
                        a[(r, j)] -= v;
                    }
                }
            }
        }
        Ok(a)
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

/// Z-basis (as HNF columns) of `{ y in Z^r : <row, y> = 0 mod modulus }`.
///
/// The congruence lattice is the projection of the integer kernel of the
/// row `[row | modulus]`; that kernel is read off a unimodular column
/// transformation reducing the row to `[g, 0, ..., 0]`.
pub fn hnf_kernel_basis(row: &[Int], modulus: &Int) -> Result<IntMatrix> {
    if !modulus.is_positive() {
        return Err(Error::NonPositiveModulus(modulus.to_string()));
    }
    let r = row.len();
    if r == 0 {
        return Ok(IntMatrix::zeros(0, 0));
    }
    let mut full: Vec<Int> = Vec::with_capacity(r + 1);
    full.push(modulus.clone());
    full.extend(row.iter().cloned());
    // columns of U; entry 0 is the modulus coordinate
    let mut u = IntMatrix::identity(r + 1);
    let mut vals = full.clone();
    for j in 1..=r {
        if vals[j].is_zero() {
            continue;
        }
        let e = vals[0].extended_gcd(&vals[j]);
        let (p, q) = (&vals[0] / &e.gcd, &vals[j] / &e.gcd);
        for i in 0..=r {
            let c0 = u[(i, 0)].clone();
            let cj = u[(i, j)].clone();
            u[(i, 0)] = &e.x * &c0 + &e.y * &cj;
            u[(i, j)] = &p * &cj - &q * &c0;
        }
        vals[0] = e.gcd;
        vals[j] = Int::zero();
    }
    let mut basis = IntMatrix::zeros(r, r);
    for j in 0..r {
        for i in 0..r {
            basis[(i, j)] = u[(i + 1, j + 1)].clone();
        }
    }
    basis.hermite_normal_form()
}

/// Converts a small nonnegative integer, panicking on overflow; used for
/// exponents and dimensions only.
pub fn to_usize(v: &Int) -> usize {
    v.to_usize().expect("value fits in usize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| Int::from(x)).collect()
    }

    fn dot(a: &[Int], b: &[Int]) -> Int {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn ext_gcd_examples() {
        for v in [vec![6, 10, 15], vec![6, 2, 3], vec![7], vec![0, -4, 6]] {
            let v = ints(&v);
            let (g, c) = ext_gcd_list(&v).unwrap();
            assert_eq!(dot(&c, &v), g);
            assert_eq!(g, gcd_list(&v));
        }
        assert_eq!(ext_gcd_list(&ints(&[7])).unwrap(), (int(7), ints(&[1])));
        assert_eq!(ext_gcd_list(&[]), Err(Error::DegenerateGcd));
        assert_eq!(ext_gcd_list(&ints(&[0, 0])), Err(Error::DegenerateGcd));
    }

    #[test]
    fn determinants() {
        assert_eq!(IntMatrix::identity(3).det().unwrap(), int(1));
        assert_eq!(IntMatrix::from_rows(&[vec![1, 0], vec![1, 2]]).det().unwrap(), int(2));
        assert_eq!(IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).det().unwrap(), int(-1));
        assert_eq!(IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]).det().unwrap(), int(0));
    }

    fn cofactor_det(m: &[Vec<i64>]) -> i64 {
        if m.len() == 1 {
            return m[0][0];
        }
        (0..m.len())
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * cofactor_det(&minor)
            })
            .sum()
    }

    proptest! {
        #[test]
        fn det_matches_cofactor_expansion(v in prop::collection::vec(-9i64..10, 9)) {
            let rows: Vec<Vec<i64>> = v.chunks(3).map(|c| c.to_vec()).collect();
            let m = IntMatrix::from_rows(&rows);
            prop_assert_eq!(m.det().unwrap(), int(cofactor_det(&rows)));
        }

        #[test]
        fn inverse_times_solves(v in prop::collection::vec(-9i64..10, 9), rhs in prop::collection::vec(-20i64..20, 3)) {
            let rows: Vec<Vec<i64>> = v.chunks(3).map(|c| c.to_vec()).collect();
            let m = IntMatrix::from_rows(&rows);
            let b = ints(&rhs);
            match m.inverse_times(&b) {
                Ok(x) => {
                    for i in 0..3 {
                        let lhs: Rat = (0..3).map(|j| rat_int(&m[(i, j)]) * &x[j]).sum();
                        prop_assert_eq!(lhs, rat_int(&b[i]));
                    }
                }
                Err(e) => {
                    prop_assert_eq!(e, Error::Singular);
                    prop_assert_eq!(m.det().unwrap(), int(0));
                }
            }
        }

        #[test]
        fn ext_gcd_certificate(v in prop::collection::vec(-1000i64..1000, 1..6)) {
            let v = ints(&v);
            prop_assume!(v.iter().any(|x| !x.is_zero()));
            let (g, c) = ext_gcd_list(&v).unwrap();
            prop_assert!(g.is_positive());
            prop_assert_eq!(dot(&c, &v), g.clone());
            for x in &v {
                prop_assert!((x % &g).is_zero());
            }
        }

        #[test]
        fn kernel_basis_index_and_membership(row in prop::collection::vec(-12i64..13, 1..4), f in 1i64..9) {
            let row = ints(&row);
            let f = int(f);
            let basis = hnf_kernel_basis(&row, &f).unwrap();
            for col in basis.columns() {
                prop_assert!((dot(&row, &col) % &f).is_zero());
            }
            // index = number of residues <row,y> mod f hit by y in {0..f-1}^r
            let r = row.len();
            let fu = to_usize(&f);
            let mut seen = std::collections::BTreeSet::new();
            let mut y = vec![0usize; r];
            loop {
                let val: Int = row.iter().zip(&y).map(|(a, &b)| a * Int::from(b)).sum();
                seen.insert(val.mod_floor(&f));
                let mut i = 0;
                while i < r {
                    y[i] += 1;
                    if y[i] < fu { break; }
                    y[i] = 0;
                    i += 1;
                }
                if i == r { break; }
            }
            prop_assert_eq!(basis.det().unwrap().abs(), Int::from(seen.len()));
        }
    }

    #[test]
    fn kernel_basis_examples() {
        let b = hnf_kernel_basis(&ints(&[2, 2]), &int(3)).unwrap();
        assert_eq!(b.det().unwrap().abs(), int(3));
        assert_eq!(b, IntMatrix::from_rows(&[vec![1, 0], vec![2, 3]]));
        let b = hnf_kernel_basis(&ints(&[5]), &int(1)).unwrap();
        assert_eq!(b, IntMatrix::identity(1));
        let b = hnf_kernel_basis(&ints(&[1, 1]), &int(2)).unwrap();
        assert_eq!(b.det().unwrap().abs(), int(2));
        for col in b.columns() {
            assert!((dot(&ints(&[1, 1]), &col) % int(2)).is_zero());
        }
        assert!(matches!(hnf_kernel_basis(&ints(&[1]), &int(0)), Err(Error::NonPositiveModulus(_))));
    }

    #[test]
    fn hnf_is_canonical() {
        let a = IntMatrix::from_rows(&[vec![2, 3], vec![5, 7]]);
        let h = a.hermite_normal_form().unwrap();
        assert_eq!(h, IntMatrix::identity(2));
        let b = IntMatrix::from_rows(&[vec![4, 2], vec![0, 6]]);
        let c = IntMatrix::from_rows(&[vec![6, 2], vec![6, 6]]);
        assert_eq!(b.hermite_normal_form().unwrap(), c.hermite_normal_form().unwrap());
    }

    #[test]
    fn adjugate_times_matrix_is_det() {
        let a = IntMatrix::from_rows(&[vec![5, 3], vec![0, 1]]);
        let adj = a.adjugate().unwrap();
        assert_eq!(adj.mul(&a).unwrap(), {
            let mut m = IntMatrix::identity(2);
            m[(0, 0)] = int(5);
            m[(1, 1)] = int(5);
            m
        });
    }

    #[test]
    fn fractional_parts() {
        assert_eq!(frac(&rat(-1, 3)), rat(2, 3));
        assert_eq!(frac(&rat(7, 2)), rat(1, 2));
        assert_eq!(frac(&rat(4, 1)), rat(0, 1));
        assert_eq!(parse_rat(" -3/6 ").unwrap(), rat(-1, 2));
        assert_eq!(fmt_rat(&rat(6, 3)), "2");
    }
}
