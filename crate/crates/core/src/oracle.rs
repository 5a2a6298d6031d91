//! Ground truth that shares no code with the pipeline: counting by dynamic
//! programming, per-coset interpolation, and lattice-point enumeration for
//! the cone identity.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factorial, lcm, Int, Rat};
use crate::cone::{KnapsackLattice, SignedUnimodularCone};
use crate::error::{Error, Result};
use crate::pipeline::TopKResult;

fn small(a: &[Int]) -> Vec<usize> {
    a.iter().map(|x| x.to_usize().expect("entry too large for the counting oracle")).collect()
}

/// `E(a)(t)` for every `t <= t_max`, by `D_i(t) = D_{i-1}(t) + D_i(t - alpha_i)`.
pub fn dp_table(a: &[Int], t_max: usize) -> Vec<Int> {
    let mut d = vec![Int::zero(); t_max + 1];
    d[0] = Int::one();
    for alpha in small(a) {
        for t in alpha..=t_max {
            let (lo, hi) = d.split_at_mut(t);
            hi[0] += &lo[t - alpha];
        }
    }
    d
}

pub fn count_dp(a: &[Int], t: usize) -> Int {
    dp_table(a, t).pop().expect("nonempty table")
}

/// The truncated product `prod 1/(1 - z^alpha)` by naive convolution.
pub fn count_series_naive(a: &[Int], t_max: usize) -> Vec<Int> {
    let mut p = vec![Int::zero(); t_max + 1];
    p[0] = Int::one();
    for alpha in small(a) {
        let mut q = vec![Int::zero(); t_max + 1];
        for (t, qt) in q.iter_mut().enumerate() {
            let mut j = 0;
            while j * alpha <= t {
                *qt += &p[t - j * alpha];
                j += 1;
            }
        }
        p = q;
    }
    p
}

/// Per-coset polynomials of `E(a)(t)` with respect to `period = lcm(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolatedQP {
    pub period: usize,
    /// `cosets[q][m]` is the coefficient of `t^m` on `t = q mod period`.
    pub cosets: Vec<Vec<Rat>>,
}

impl InterpolatedQP {
    pub fn degree(&self) -> usize {
        self.cosets[0].len() - 1
    }

    /// Whether the coefficient of `t^m` is the same on every coset.
    pub fn is_constant(&self, m: usize) -> bool {
        self.cosets.iter().all(|c| c[m] == self.cosets[0][m])
    }

    /// Largest degree whose coefficient varies with the coset.
    pub fn largest_nonconstant_degree(&self) -> Option<usize> {
        (0..=self.degree()).rev().find(|&m| !self.is_constant(m))
    }

    /// Smallest `p | period` with `c_m^{[q]} = c_m^{[q+p]}` for all `q`.
    pub fn minimal_period(&self, m: usize) -> usize {
        let q = self.period;
        (1..=q)
            .filter(|p| q.is_multiple_of(*p))
            .find(|&p| (0..q).all(|i| self.cosets[i][m] == self.cosets[(i + p) % q][m]))
            .unwrap_or(q)
    }

    pub fn eval(&self, t: usize) -> Rat {
        let c = &self.cosets[t % self.period];
        let t = Rat::from_integer(Int::from(t));
        c.iter().rev().fold(Rat::zero(), |acc, x| acc * &t + x)
    }
}

/// Polynomial through `(x0 + j h, y_j)` for `j = 0..=n`, as power-basis
/// coefficients in `x`, via Newton forward differences.
fn newton_interpolate(x0: &Int, h: &Int, ys: &[Int]) -> Vec<Rat> {
    let n = ys.len() - 1;
    let mut diffs: Vec<Int> = ys.to_vec();
    let mut lead = Vec::with_capacity(n + 1);
    for i in 0..=n {
        lead.push(diffs[0].clone());
        for j in 0..n - i {
            diffs[j] = &diffs[j + 1] - &diffs[j];
        }
    }
    // c_i = Delta^i y_0 / (i! h^i); p(x) = sum c_i prod_{l<i} (x - x_l)
    let c: Vec<Rat> = lead
        .into_iter()
        .enumerate()
        .map(|(i, d)| Rat::new(d, factorial(i as u32) * num_traits::pow(h.clone(), i)))
        .collect();
    let mut poly = vec![Rat::zero(); n + 1];
    poly[0] = c[n].clone();
    for i in (0..n).rev() {
        let node = Rat::from_integer(x0 + h * Int::from(i));
        // poly <- poly * (x - node) + c_i
        let mut next = vec![Rat::zero(); n + 1];
        for m in 0..n {
            if poly[m].is_zero() {
                continue;
            }
            next[m + 1] += &poly[m];
            next[m] -= &node * &poly[m];
        }
        next[0] += &c[i];
        poly = next;
    }
    poly
}

/// Reconstructs every coset polynomial from the counting table and checks
/// one extra point per coset.
pub fn interpolate_qp(a: &[Int]) -> Result<InterpolatedQP> {
    let n = a.len() - 1;
    let period = a.iter().fold(Int::one(), |acc, x| lcm(&acc, x));
    let q = period.to_usize().ok_or_else(|| Error::InvalidArgument("period too large".into()))?;
    let table = dp_table(a, q * (n + 2));
    let h = Int::from(q);
    let mut cosets = Vec::with_capacity(q);
    for r in 0..q {
        let ys: Vec<Int> = (0..=n).map(|j| table[r + j * q].clone()).collect();
        let poly = newton_interpolate(&Int::from(r), &h, &ys);
        let t = r + (n + 1) * q;
        let tr = Rat::from_integer(Int::from(t));
        let v = poly.iter().rev().fold(Rat::zero(), |acc, x| acc * &tr + x);
        if v != Rat::from_integer(table[t].clone()) {
            return Err(Error::PeriodAssumptionViolated(format!("coset {r} fails at t = {t}")));
        }
        cosets.push(poly);
    }
    Ok(InterpolatedQP { period: q, cosets })
}

const EVALUATOR_LIMIT: u64 = 200_000;

/// Outcome of checking a pipeline result against the oracles.
#[derive(Clone, Debug, Default)]
pub struct CompareReport {
    pub passed: bool,
    pub checked_points: usize,
    pub checked_coefficients: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

/// Checks `res` on `t = 0..=t_max` (in the normalized variable).
///
/// For `k = N` values must match exactly. For `k < N` the returned degrees
/// must match the interpolated coefficients on every coset, and the residual
/// must stay within `C t^{N-k-1}`, `C` the sum of the largest lower
/// coefficients.
pub fn compare(res: &TopKResult, t_max: usize, interpolation_limit: usize) -> CompareReport {
    let a = res.instance.alphas();
    let n = res.n();
    let k = res.k;
    let mut rep = CompareReport::default();
    let table = dp_table(a, t_max);
    let period = a.iter().fold(Int::one(), |acc, x| lcm(&acc, x));
    let interp = match period.to_usize() {
        Some(q) if q * (n + 2) <= interpolation_limit => match interpolate_qp(a) {
            Ok(i) => Some(i),
            Err(e) => {
                rep.failures.push(format!("interpolation: {e}"));
                None
            }
        },
        _ => {
            rep.notes.push(format!("interpolation skipped: lcm {period} too large"));
            None
        }
    };
    let eval = res.evaluator(EVALUATOR_LIMIT);
    if k == n {
        for (t, c) in table.iter().enumerate() {
            let v = eval(&Int::from(t));
            rep.checked_points += 1;
            if v != Rat::from_integer(c.clone()) {
                rep.failures.push(format!("t = {t}: formula {v}, count {c}"));
                if rep.failures.len() > 20 {
                    break;
                }
            }
        }
    }
    if let Some(interp) = &interp {
        for m in n - k..=n {
            let Some(p) = res.coefficient(m) else {
                rep.failures.push(format!("degree {m} missing"));
                continue;
            };
            for (q, c) in interp.cosets.iter().enumerate() {
                rep.checked_coefficients += 1;
                let v = p.eval(&Int::from(q));
                if v != c[m] {
                    rep.failures.push(format!("degree {m}, coset {q}: formula {v}, oracle {}", c[m]));
                    break;
                }
            }
        }
        if k < n {
            let bound: Rat = (0..n - k)
                .map(|m| interp.cosets.iter().map(|c| c[m].abs()).max().unwrap_or_else(Rat::zero))
                .sum();
            let e = n - k - 1;
            for (t, c) in table.iter().enumerate().skip(1) {
                rep.checked_points += 1;
                let diff = (Rat::from_integer(c.clone()) - eval(&Int::from(t))).abs();
                let allowed = &bound * Rat::from_integer(num_traits::pow(Int::from(t), e));
                if diff > allowed {
                    rep.failures.push(format!("t = {t}: residual {diff} above {allowed}"));
                    break;
                }
            }
        }
    } else if k < n {
        rep.notes.push("truncated result not checked without interpolation".into());
    }
    rep.passed = rep.failures.is_empty();
    rep
}

/// A linear form, positive on the orthant and nonzero on every generator.
pub fn generic_form(r: usize, cones: &[SignedUnimodularCone]) -> Vec<Int> {
    let mut m = Int::from(2);
    loop {
        let l: Vec<Int> = (0..r).map(|i| num_traits::pow(m.clone(), i)).collect();
        let ok = cones
            .iter()
            .flat_map(|c| &c.generators)
            .all(|g| !g.iter().zip(&l).map(|(a, b)| a * b).sum::<Int>().is_zero());
        if ok {
            return l;
        }
        m += 1;
    }
}

fn ceil_div(q: &Rat) -> Int {
    q.ceil().to_integer()
}

/// Points of `{ n in Lambda : n >= -T s }` with `<l, n> <= bound`, by direct
/// enumeration of `Z^J`.
pub fn shifted_orthant_points(lat: &KnapsackLattice, t: &Int, l: &[Int], bound: &Int) -> BTreeMap<Vec<Int>, i64> {
    let r = lat.rank();
    let lo: Vec<Int> = lat.shift.iter().map(|s| ceil_div(&Rat::from_integer(-(t * s)))).collect();
    let mut out = BTreeMap::new();
    let base: Int = lo.iter().zip(l).map(|(a, b)| a * b).sum();
    let mut y = lo.clone();
    fn rec(i: usize, r: usize, y: &mut Vec<Int>, lo: &[Int], l: &[Int], slack: Int, lat: &KnapsackLattice, out: &mut BTreeMap<Vec<Int>, i64>) {
        if i == r {
            if lat.contains(y) {
                out.insert(y.clone(), 1);
            }
            return;
        }
        let mut step = Int::zero();
        while step <= slack {
            y[i] = &lo[i] + &step / &l[i];
            rec(i + 1, r, y, lo, l, &slack - &step, lat, out);
            step += &l[i];
        }
        y[i] = lo[i].clone();
    }
    if base <= *bound {
        rec(0, r, &mut y, &lo, l, bound - &base, lat, &mut out);
    }
    out
}

/// Signed points of the cones at vertex `-T s`, with generators `g` having
/// `<l, g> < 0` flipped, restricted to `<l, n> <= bound`.
pub fn signed_cone_points(
    cones: &[SignedUnimodularCone],
    t: &Int,
    l: &[Int],
    bound: &Int,
) -> BTreeMap<Vec<Int>, i64> {
    let mut out: BTreeMap<Vec<Int>, i64> = BTreeMap::new();
    for cone in cones {
        let r = cone.generators.len();
        let lg: Vec<Int> = cone.generators.iter().map(|g| g.iter().zip(l).map(|(a, b)| a * b).sum()).collect();
        let mut sign = cone.sign as i64;
        // m_i >= ceil(-T s_i), or m_i <= ceil(-T s_i) - 1 when flipped
        let mut start = Vec::with_capacity(r);
        let mut dir = Vec::with_capacity(r);
        for (si, li) in cone.shift_coords.iter().zip(&lg) {
            let c = ceil_div(&(-(Rat::from_integer(t.clone()) * si)));
            if li.is_negative() {
                sign = -sign;
                start.push(c - 1);
                dir.push(-1i32);
            } else {
                start.push(c);
                dir.push(1);
            }
        }
        let base: Int = start.iter().zip(&lg).map(|(a, b)| a * b).sum();
        if base > *bound {
            continue;
        }
        let mut m = start.clone();
        #[allow(clippy::too_many_arguments)]
        fn rec(
            i: usize,
            m: &mut Vec<Int>,
            start: &[Int],
            dir: &[i32],
            lg: &[Int],
            slack: Int,
            cone: &SignedUnimodularCone,
            sign: i64,
            out: &mut BTreeMap<Vec<Int>, i64>,
        ) {
            if i == m.len() {
                let dim = cone.generators.first().map_or(0, Vec::len);
                let mut p = vec![Int::zero(); dim];
                for (mi, g) in m.iter().zip(&cone.generators) {
                    for (x, y) in p.iter_mut().zip(g) {
                        *x += mi * y;
                    }
                }
                *out.entry(p).or_insert(0) += sign;
                return;
            }
            let step = lg[i].abs();
            let mut used = Int::zero();
            let mut j = Int::zero();
            while used <= slack {
                m[i] = &start[i] + &j * Int::from(dir[i]);
                rec(i + 1, m, start, dir, lg, &slack - &used, cone, sign, out);
                used += &step;
                j += 1;
            }
            m[i] = start[i].clone();
        }
        rec(0, &mut m, &start, &dir, &lg, bound - &base, cone, sign, &mut out);
    }
    out.retain(|_, v| *v != 0);
    out
}

/// Exact comparison of the two enumerations for one `T`, within the slab
/// `<l, n> <= <l, ceil(-T s)> + window * max(l)`.
pub fn cone_identity_holds(lat: &KnapsackLattice, cones: &[SignedUnimodularCone], t: &Int, window: u32) -> bool {
    let r = lat.rank();
    if r == 0 {
        return cones.len() == 1 && cones[0].sign == 1;
    }
    let l = generic_form(r, cones);
    let lo: Vec<Int> = lat.shift.iter().map(|s| ceil_div(&Rat::from_integer(-(t * s)))).collect();
    let base: Int = lo.iter().zip(&l).map(|(a, b)| a * b).sum();
    let bound = base + Int::from(window) * l.iter().max().cloned().unwrap_or_else(Int::one);
    shifted_orthant_points(lat, t, &l, &bound) == signed_cone_points(cones, t, &l, &bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::cone::{barvinok_decompose_dual, build_lattice};

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn dp_examples() {
        assert_eq!(count_dp(&ints(&[6, 2, 3]), 6), int(3));
        assert_eq!(count_dp(&ints(&[5, 7]), 0), int(1));
        assert_eq!(count_dp(&ints(&[2, 3]), 1), int(0));
        assert_eq!(dp_table(&ints(&[1, 1]), 4), ints(&[1, 2, 3, 4, 5]));
    }

    #[test]
    fn dp_matches_naive_series_and_is_order_free() {
        for a in [vec![6, 2, 3], vec![5, 13, 2, 8, 3], vec![9, 10, 17, 5, 2]] {
            let a = ints(&a);
            let mut b = a.clone();
            b.reverse();
            assert_eq!(dp_table(&a, 150), count_series_naive(&a, 150));
            assert_eq!(dp_table(&a, 150), dp_table(&b, 150));
        }
    }

    #[test]
    fn interpolation_examples() {
        let i = interpolate_qp(&ints(&[1, 1])).unwrap();
        assert_eq!(i.cosets, vec![vec![rat(1, 1), rat(1, 1)]]);
        let i = interpolate_qp(&ints(&[6, 2, 3])).unwrap();
        assert_eq!(i.period, 6);
        assert_eq!(i.cosets[0], vec![rat(1, 1), rat(1, 4), rat(1, 72)]);
        assert_eq!(i.cosets[1], vec![rat(-5, 72), rat(1, 18), rat(1, 72)]);
        assert_eq!(i.largest_nonconstant_degree(), Some(1));
        let i = interpolate_qp(&ints(&[5, 3, 1, 4, 2])).unwrap();
        let table = dp_table(&ints(&[5, 3, 1, 4, 2]), 3 * 60 * 8);
        for t in (0..table.len()).step_by(7) {
            assert_eq!(i.eval(t), Rat::from_integer(table[t].clone()));
        }
        assert_eq!(i.cosets[0][4], rat(1, 24 * 120));
    }

    #[test]
    fn cone_identity_small_fixtures() {
        for (a, f) in [(vec![2, 1, 1], 2), (vec![6, 2, 3], 6), (vec![6, 2, 2, 3, 3], 3), (vec![6, 2, 2, 3, 3], 2)] {
            let a = ints(&a);
            let lat = build_lattice(&a, &int(f)).unwrap();
            let cones = barvinok_decompose_dual(&lat, None).unwrap();
            for t in 0..f {
                assert!(cone_identity_holds(&lat, &cones, &int(t), 20), "a = {a:?}, f = {f}, T = {t}");
            }
        }
    }

    #[test]
    fn cone_identity_detects_a_wrong_sign() {
        let a = ints(&[6, 2, 3]);
        let lat = build_lattice(&a, &int(6)).unwrap();
        let mut cones = barvinok_decompose_dual(&lat, None).unwrap();
        if cones.len() > 1 {
            cones[0].sign = -cones[0].sign;
        } else {
            cones[0].shift_coords[0] += rat(1, 1);
        }
        assert!(!(0..6).all(|t| cone_identity_holds(&lat, &cones, &int(t), 20)));
    }
}
