use denumerant::arith::Int;
use denumerant::cone::{barvinok_decompose_dual, build_lattice};
use denumerant::oracle::cone_identity_holds;

const FIXTURES: &[(&[i64], i64)] = &[
    (&[6, 2, 3], 2),
    (&[6, 2, 3], 3),
    (&[8, 12, 11], 4),
    (&[10, 3, 7], 10),
    (&[15, 4, 7], 15),
    (&[20, 7, 9], 20),
    (&[9, 2, 4, 5], 9),
    (&[12, 5, 7, 11], 12),
    (&[14, 3, 5, 9], 14),
    (&[16, 3, 5, 7], 16),
    (&[18, 5, 7, 11], 18),
    (&[20, 3, 7, 9], 20),
    (&[17, 34, 3, 5, 8], 17),
];

#[test]
fn signed_cones_match_lattice_enumeration() {
    for (a, f) in FIXTURES {
        let a: Vec<Int> = a.iter().map(|&x| Int::from(x)).collect();
        let f = Int::from(*f);
        let lat = build_lattice(&a, &f).unwrap();
        assert!(lat.rank() <= 3);
        let cones = barvinok_decompose_dual(&lat, None).unwrap();
        for t in 0..u64::try_from(&f).unwrap() {
            assert!(cone_identity_holds(&lat, &cones, &Int::from(t), 20), "a = {a:?}, f = {f}, T = {t}");
        }
    }
}

#[test]
fn sign_flip_is_detected() {
    let a: Vec<Int> = [20, 3, 7, 9].iter().map(|&x| Int::from(x)).collect();
    let lat = build_lattice(&a, &Int::from(20)).unwrap();
    let mut cones = barvinok_decompose_dual(&lat, None).unwrap();
    assert!(cones.len() > 1);
    cones[0].sign = -cones[0].sign;
    assert!((0..20).any(|t| !cone_identity_holds(&lat, &cones, &Int::from(t), 20)));
}
