//! The lattice `Lambda(a, f)`, its Bezout shift, and the signed unimodular
//! decomposition of the nonnegative orthant relative to that lattice, done on
//! the dual cone.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::arith::{ext_gcd_list, fmt_rat, gcd_list, hnf_kernel_basis, Int, IntMatrix, Rat};
use crate::error::{Error, Result};
use crate::lattice::{shortest_vector, vectors_within};
use crate::step_poly::StepPolynomial;
use crate::Cancel;

#[derive(Clone, Debug)]
pub struct KnapsackLattice {
    pub f: Int,
    /// Positions `i` with `f` not dividing `alpha_i`.
    pub j: Vec<usize>,
    pub a_j: Vec<Int>,
    /// Columns span `Lambda(a, f)` inside `Z^J`.
    pub basis: IntMatrix,
    /// Bezout certificate: `1 = <s, a_J> + s0 * f`.
    pub shift: Vec<Int>,
    pub s0: Int,
    /// `s` in the coordinates of `basis`.
    shift_in_basis: Vec<Rat>,
}

impl KnapsackLattice {
    pub fn rank(&self) -> usize {
        self.j.len()
    }

    pub fn shift_in_basis(&self) -> &[Rat] {
        &self.shift_in_basis
    }

    /// Whether `y` lies in the lattice.
    pub fn contains(&self, y: &[Int]) -> bool {
        let dot: Int = y.iter().zip(&self.a_j).map(|(a, b)| a * b).sum();
        dot.is_multiple_of(&self.f)
    }
}

pub fn build_lattice(alphas: &[Int], f: &Int) -> Result<KnapsackLattice> {
    if !f.is_positive() {
        return Err(Error::NonPositiveModulus(f.to_string()));
    }
    if !alphas.iter().any(|a| a.is_multiple_of(f)) {
        return Err(Error::NotInSpectrum(format!("{f} divides no entry")));
    }
    let j: Vec<usize> = (0..alphas.len()).filter(|&i| !alphas[i].is_multiple_of(f)).collect();
    let a_j: Vec<Int> = j.iter().map(|&i| alphas[i].clone()).collect();
    let mut with_f = a_j.clone();
    with_f.push(f.clone());
    let (g, cert) = ext_gcd_list(&with_f)?;
    if !g.is_one() {
        return Err(Error::NotInSpectrum(format!("gcd of {f} and the entries it does not divide is {g}")));
    }
    let r = j.len();
    let shift = cert[..r].to_vec();
    let s0 = cert[r].clone();
    let basis = hnf_kernel_basis(&a_j, f)?;
    let shift_in_basis = if r == 0 { Vec::new() } else { basis.inverse_times(&shift)? };
    Ok(KnapsackLattice { f: f.clone(), j, a_j, basis, shift, s0, shift_in_basis })
}

fn primitive(v: Vec<Int>) -> Vec<Int> {
    let g = gcd_list(v.iter());
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.into_iter().map(|x| x / &g).collect()
}

/// Generators (columns) of the dual of the cone `B^{-1} R^r_{>=0}`: the rows
/// of `B`, made primitive.
pub fn dual_cone(b: &IntMatrix) -> Result<IntMatrix> {
    if !b.is_square() {
        return Err(Error::Dimension("dual_cone needs a square matrix".into()));
    }
    if b.rows() == 0 || b.det()?.is_zero() {
        return Err(Error::Singular);
    }
    let cols: Vec<Vec<Int>> = (0..b.rows()).map(|i| primitive(b.row(i))).collect();
    Ok(IntMatrix::from_columns(&cols))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedUnimodularCone {
    pub sign: i8,
    /// Primal generators in `Z^J`; together they form a basis of `Lambda(a, f)`.
    pub generators: Vec<Vec<Int>>,
    /// `<a_J, g>` for each generator.
    pub pairings: Vec<Int>,
    /// Coordinates of the Bezout shift `s` in the generator basis.
    pub shift_coords: Vec<Rat>,
}

impl SignedUnimodularCone {
    /// `{T s_i}` for each generator.
    pub fn fractional_shift(&self, f: &Int) -> Result<Vec<StepPolynomial>> {
        self.shift_coords
            .iter()
            .map(|si| {
                if !f.is_multiple_of(si.denom()) {
                    return Err(Error::ShiftNotPeriodic(format!("coordinate {} has denominator not dividing {f}", fmt_rat(si))));
                }
                Ok(StepPolynomial::linear(Rat::one(), si.clone()))
            })
            .collect()
    }

    /// `l_U(T) = sum_i {T s_i} <a_J, g_i>`.
    pub fn exponent(&self, f: &Int) -> Result<StepPolynomial> {
        let mut l = StepPolynomial::zero();
        for (fs, c) in self.fractional_shift(f)?.iter().zip(&self.pairings) {
            l.add_scaled_assign(&Rat::from_integer(c.clone()), fs);
        }
        Ok(l)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "sign": self.sign,
            "generators": self.generators.iter().map(|g| g.iter().map(Int::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "pairings": self.pairings.iter().map(Int::to_string).collect::<Vec<_>>(),
            "shift_coords": self.shift_coords.iter().map(fmt_rat).collect::<Vec<_>>(),
        })
    }
}

/// The step vector for one Barvinok split of the cone with generator
/// columns `u`: an integer `w = U lambda` with `||lambda||_inf < 1`.
/// Returns `(w, lambda)`.
fn split_vector(u: &IntMatrix, det: &Int) -> Result<(Vec<Int>, Vec<Rat>)> {
    let adj = u.adjugate()?;
    let d = det.abs();
    let mut v = shortest_vector(&adj)?;
    if v.iter().any(|x| x.abs() >= d) {
        let r = u.rows();
        let bound = Int::from(r) * (&d - 1u32) * (&d - 1u32);
        let candidates = vectors_within(&adj, &bound)?;
        v = candidates
            .into_iter()
            .filter(|c| c.iter().all(|x| x.abs() < d))
            .min_by(|a, b| {
                let ma = a.iter().map(Signed::abs).max();
                let mb = b.iter().map(Signed::abs).max();
                ma.cmp(&mb).then_with(|| a.cmp(b))
            })
            .ok_or_else(|| Error::Dimension("no short vector in the parallelepiped lattice".into()))?;
    }
    let lambda: Vec<Rat> = v.iter().map(|x| Rat::new(x.clone(), det.clone())).collect();
    // u * adj = det * I, so this division is exact
    let w: Vec<Int> = u.mul_vec(&v).into_iter().map(|x| x / det).collect();
    Ok((w, lambda))
}

/// Signed decomposition of the orthant `R^J_{>=0}` into cones unimodular
/// with respect to `Lambda(a, f)`, modulo cones containing lines.
pub fn barvinok_decompose_dual(lat: &KnapsackLattice, cancel: Cancel) -> Result<Vec<SignedUnimodularCone>> {
    let r = lat.rank();
    if r == 0 {
        return Ok(vec![SignedUnimodularCone { sign: 1, generators: vec![], pairings: vec![], shift_coords: vec![] }]);
    }
    let mut stack: Vec<(i8, IntMatrix)> = vec![(1, dual_cone(&lat.basis)?)];
    let mut out = Vec::new();
    while let Some((sign, u)) = stack.pop() {
        if cancel.is_some_and(|c| c()) {
            return Err(Error::Cancelled);
        }
        let det = u.det()?;
        if det.abs().is_one() {
            out.push(primal_cone(lat, sign, &u, &det)?);
            continue;
        }
        let (mut w, mut lambda) = split_vector(&u, &det)?;
        if !lambda.iter().any(Signed::is_positive) {
            // with every coefficient <= 0 the signed identity fails; -w works
            w.iter_mut().for_each(|x| *x = -x.clone());
            lambda.iter_mut().for_each(|x| *x = -x.clone());
        }
        // pushed in reverse so generator 0 is expanded first
        for i in (0..r).rev() {
            if lambda[i].is_zero() {
                continue;
            }
            let mut cols = u.columns();
            cols[i] = w.clone();
            let s = if lambda[i].is_positive() { sign } else { -sign };
            stack.push((s, IntMatrix::from_columns(&cols)));
        }
    }
    Ok(out)
}

/// Primal cone of a unimodular dual cone `V`: generators are the columns of
/// `V^{-T}`, mapped from lattice coordinates back into `Z^J`.
fn primal_cone(lat: &KnapsackLattice, sign: i8, v: &IntMatrix, det: &Int) -> Result<SignedUnimodularCone> {
    let adj = v.adjugate()?;
    let inv_t = adj.transpose();
    let w_cols: Vec<Vec<Int>> = inv_t.columns().into_iter().map(|c| c.into_iter().map(|x| x * det).collect()).collect();
    let generators: Vec<Vec<Int>> = w_cols.iter().map(|c| lat.basis.mul_vec(c)).collect();
    let pairings = generators.iter().map(|g| g.iter().zip(&lat.a_j).map(|(a, b)| a * b).sum()).collect();
    // coordinates in the basis W = V^{-T} are V^T t
    let vt = v.transpose();
    let t = lat.shift_in_basis();
    let shift_coords = (0..vt.rows())
        .map(|i| (0..vt.cols()).map(|k| Rat::from_integer(vt[(i, k)].clone()) * &t[k]).sum())
        .collect();
    Ok(SignedUnimodularCone { sign, generators, pairings, shift_coords })
}

pub fn decomposition_json(lat: &KnapsackLattice, cones: &[SignedUnimodularCone]) -> Value {
    json!({
        "f": lat.f.to_string(),
        "J": lat.j,
        "a_J": lat.a_j.iter().map(Int::to_string).collect::<Vec<_>>(),
        "basis": lat.basis.columns().iter().map(|c| c.iter().map(Int::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "shift": lat.shift.iter().map(Int::to_string).collect::<Vec<_>>(),
        "s0": lat.s0.to_string(),
        "cones": cones.iter().map(SignedUnimodularCone::to_json).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn check_lattice(lat: &KnapsackLattice, alphas: &[Int]) {
        let r = lat.rank();
        if r > 0 {
            assert_eq!(lat.basis.det().unwrap().abs(), lat.f);
            for c in lat.basis.columns() {
                assert!(lat.contains(&c));
            }
            let fs: Vec<Int> = lat.shift.iter().map(|x| x * &lat.f).collect();
            assert!(lat.contains(&fs));
        }
        let lhs: Int = lat.shift.iter().zip(&lat.a_j).map(|(a, b)| a * b).sum::<Int>() + &lat.s0 * &lat.f;
        assert!(lhs.is_one());
        for (&i, a) in lat.j.iter().zip(&lat.a_j) {
            assert_eq!(&alphas[i], a);
            assert!(!a.is_multiple_of(&lat.f));
        }
    }

    #[test]
    fn lattice_examples() {
        let a = ints(&[6, 2, 2, 3, 3]);
        let lat = build_lattice(&a, &int(3)).unwrap();
        assert_eq!(lat.j, vec![1, 2]);
        check_lattice(&lat, &a);
        assert!(lat.contains(&ints(&[1, 2])));
        assert!(!lat.contains(&ints(&[1, 0])));

        let a = ints(&[6, 2, 3]);
        let lat = build_lattice(&a, &int(6)).unwrap();
        assert_eq!(lat.j, vec![1, 2]);
        check_lattice(&lat, &a);

        let lat = build_lattice(&a, &int(1)).unwrap();
        assert_eq!(lat.rank(), 0);
        let cones = barvinok_decompose_dual(&lat, None).unwrap();
        assert_eq!(cones.len(), 1);
        assert!(cones[0].exponent(&lat.f).unwrap().is_zero());

        assert!(matches!(build_lattice(&a, &int(5)), Err(Error::NotInSpectrum(_))));
        assert!(matches!(build_lattice(&ints(&[4, 2]), &int(4)), Err(Error::NotInSpectrum(_))));
    }

    #[test]
    fn dual_cone_examples() {
        assert_eq!(dual_cone(&IntMatrix::identity(3)).unwrap(), IntMatrix::identity(3));
        let b = IntMatrix::from_rows(&[vec![1, 0], vec![1, 2]]);
        let d = dual_cone(&b).unwrap();
        // eta_i . (B^{-1} e_j) = delta_ij * positive
        let binv_cols: Vec<Vec<Rat>> = (0..2)
            .map(|j| {
                let mut e = vec![int(0); 2];
                e[j] = int(1);
                b.inverse_times(&e).unwrap()
            })
            .collect();
        for i in 0..2 {
            for (j, y) in binv_cols.iter().enumerate() {
                let p: Rat = d.column(i).iter().zip(y).map(|(a, b)| Rat::from_integer(a.clone()) * b).sum();
                if i == j {
                    assert!(p.is_positive());
                } else {
                    assert!(p.is_zero());
                }
            }
        }
        assert_eq!(dual_cone(&IntMatrix::from_rows(&[vec![4]])).unwrap(), IntMatrix::from_rows(&[vec![1]]));
        assert_eq!(dual_cone(&IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]])), Err(Error::Singular));
    }

    #[test]
    fn unimodular_input_is_kept() {
        // f = 2 with a_J = [1]: one-dimensional, already unimodular
        let lat = build_lattice(&ints(&[2, 1]), &int(2)).unwrap();
        let cones = barvinok_decompose_dual(&lat, None).unwrap();
        assert_eq!(cones.len(), 1);
        assert_eq!(cones[0].sign, 1);
        assert_eq!(cones[0].generators, vec![ints(&[2])]);
    }

    #[test]
    fn index_two_square() {
        let lat = build_lattice(&ints(&[2, 1, 1]), &int(2)).unwrap();
        let cones = barvinok_decompose_dual(&lat, None).unwrap();
        assert!(cones.len() >= 2);
        for c in &cones {
            let m = IntMatrix::from_columns(&c.generators);
            assert_eq!(m.det().unwrap().abs(), int(2));
        }
    }

    #[test]
    fn shift_examples() {
        let c = SignedUnimodularCone { sign: 1, generators: vec![], pairings: vec![int(3)], shift_coords: vec![rat(2, 1)] };
        assert!(c.exponent(&int(2)).unwrap().is_zero());
        let c = SignedUnimodularCone { sign: 1, generators: vec![], pairings: vec![int(1)], shift_coords: vec![rat(1, 2)] };
        let l = c.exponent(&int(2)).unwrap();
        assert_eq!(l.eval(&int(0)), rat(0, 1));
        assert_eq!(l.eval(&int(1)), rat(1, 2));
        assert_eq!(l.eval(&int(2)), rat(0, 1));
        let c = SignedUnimodularCone { sign: 1, generators: vec![], pairings: vec![int(1)], shift_coords: vec![rat(1, 3)] };
        assert!(matches!(c.exponent(&int(2)), Err(Error::ShiftNotPeriodic(_))));
    }

    #[test]
    fn cancellation_is_honoured() {
        let lat = build_lattice(&ints(&[6, 2, 3]), &int(6)).unwrap();
        let stop = || true;
        assert_eq!(barvinok_decompose_dual(&lat, Some(&stop)), Err(Error::Cancelled));
    }

    #[test]
    fn json_dump_shape() {
        let a = ints(&[6, 2, 3]);
        let lat = build_lattice(&a, &int(6)).unwrap();
        let cones = barvinok_decompose_dual(&lat, None).unwrap();
        let v = decomposition_json(&lat, &cones);
        assert_eq!(v["f"], "6");
        assert_eq!(v["cones"].as_array().unwrap().len(), cones.len());
    }

    proptest! {
        #[test]
        fn decomposition_cones_are_lattice_bases(
            v in prop::collection::vec(1i64..400, 2..5),
            fsel in 0usize..4,
        ) {
            let a = ints(&v);
            prop_assume!(gcd_list(a.iter()).is_one());
            // pick f as the gcd of some pair
            let i = fsel % a.len();
            let j = (fsel + 1) % a.len();
            let f = a[i].gcd(&a[j]);
            let Ok(lat) = build_lattice(&a, &f) else { return Ok(()) };
            check_lattice(&lat, &a);
            let cones = barvinok_decompose_dual(&lat, None).unwrap();
            prop_assert!(!cones.is_empty());
            for c in &cones {
                let m = IntMatrix::from_columns(&c.generators);
                if lat.rank() > 0 {
                    prop_assert_eq!(m.det().unwrap().abs(), lat.f.clone());
                    for g in &c.generators {
                        prop_assert!(lat.contains(g));
                    }
                }
                for si in &c.shift_coords {
                    prop_assert!(lat.f.is_multiple_of(si.denom()));
                }
                let l = c.exponent(&lat.f).unwrap();
                for t in 0..lat.f.to_string().parse::<i64>().unwrap().min(40) {
                    prop_assert_eq!(l.eval(&int(t)), l.eval(&(int(t) + &lat.f)));
                }
            }
        }
    }
}
