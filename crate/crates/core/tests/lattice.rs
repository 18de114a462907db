use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use proptest::prelude::*;
use setfree::arrangement::{Arrangement, FlatLattice};
use setfree::family::Schema;
use setfree::linalg::{Field, FieldSpec, Prime, PrimeField, Rationals, RowMatrix};

fn f(p: u64) -> PrimeField {
    PrimeField::new(Prime::new(p).unwrap())
}

fn sumfree(p: u64) -> Schema {
    Schema::sum_free(Prime::new(p).unwrap())
}

/// Intersect every subset of the hyperplanes. Returns each flat's canonical
/// equations with mu(0, x) from Whitney's formula: the sum of (-1)^|S| over
/// subsets S whose intersection is x.
fn brute_force<F: Field>(a: &Arrangement<F>) -> BTreeMap<Vec<F::Elem>, (usize, i128)> {
    let m = a.len();
    assert!(m <= 16);
    let mut out: BTreeMap<Vec<F::Elem>, (usize, i128)> = BTreeMap::new();
    for mask in 0u32..(1 << m) {
        let rows: Vec<Vec<F::Elem>> = (0..m)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| a.hyperplanes()[i].form().to_vec())
            .collect();
        let eqs = RowMatrix::new(a.field().clone(), a.k(), rows).unwrap().rref();
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        let e = out.entry(eqs.entries().to_vec()).or_insert((eqs.nrows(), 0));
        e.1 += sign;
    }
    out
}

fn assert_matches_brute_force<F: Field>(a: &Arrangement<F>) {
    let lattice = FlatLattice::build(a).unwrap();
    let brute = brute_force(a);
    assert_eq!(lattice.len(), brute.len(), "flat count for {a:?}");
    for (x, flat) in lattice.flats().iter().enumerate() {
        let (codim, mu) = brute[flat.equations().entries()];
        assert_eq!(flat.codim(), codim);
        assert_eq!(lattice.mobius(x), mu, "mu at {:?}", flat.equations());
    }
}

#[test]
fn lattice_equals_subset_intersections() {
    for k in 0..=3 {
        let (set3, _) = Schema::set().validate_in(f(3)).unwrap();
        assert_matches_brute_force(&set3.expand(k));
        let (setq, _) = Schema::set().over(FieldSpec::Generic).validate_in(Rationals).unwrap();
        assert_matches_brute_force(&setq.expand(k));
        for p in [2, 5, 7] {
            let (s, _) = sumfree(p).validate_in(f(p)).unwrap();
            assert_matches_brute_force(&s.expand(k));
        }
    }
}

#[test]
fn lattice_equals_subset_intersections_braid_and_generic() {
    // Braid arrangement in 4-space: 6 hyperplanes, 15 flats.
    let braid = Arrangement::from_i64_forms(
        Rationals,
        4,
        &[
            &[1, -1, 0, 0],
            &[1, 0, -1, 0],
            &[1, 0, 0, -1],
            &[0, 1, -1, 0],
            &[0, 1, 0, -1],
            &[0, 0, 1, -1],
        ],
    )
    .unwrap();
    assert_matches_brute_force(&braid);
    assert_eq!(FlatLattice::build(&braid).unwrap().len(), 15);
    // Four generic planes in 3-space over F_7.
    let generic = Arrangement::from_i64_forms(f(7), 3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]]).unwrap();
    assert_matches_brute_force(&generic);
}

#[test]
fn braid_chi_is_falling_factorial() {
    let field = f(5);
    for k in 1..=5 {
        let forms: Vec<Vec<i64>> = (0..k)
            .flat_map(|i| {
                ((i + 1)..k).map(move |j| {
                    let mut v = vec![0; k];
                    v[i] = 1;
                    v[j] = -1;
                    v
                })
            })
            .collect();
        let refs: Vec<&[i64]> = forms.iter().map(|v| v.as_slice()).collect();
        let a = Arrangement::from_i64_forms(field, k, &refs).unwrap();
        let chi = FlatLattice::build(&a).unwrap().char_poly().unwrap();
        for t in 0..8i64 {
            let falling: i64 = (0..k as i64).map(|i| t - i).product();
            assert_eq!(chi.eval(&BigInt::from(t)), BigInt::from(falling));
        }
    }
}

#[test]
fn set_lattices_are_well_formed() {
    let (s, _) = Schema::set().validate_in(f(3)).unwrap();
    for k in 0..=6 {
        let a = s.expand(k);
        let lattice = FlatLattice::build(&a).unwrap();
        let chi = lattice.char_poly().unwrap();
        assert!(chi.coeff(0).is_one());
        assert!(lattice.sign_condition_holds());
        assert_eq!(chi.coeff(1), BigUint::from(a.len()));
        if k >= 2 {
            assert_eq!(lattice.level_sizes()[1], a.len());
            assert!(chi.eval(&BigInt::one()).is_zero(), "chi(1) at k = {k}");
        }
    }
}

#[test]
fn known_polynomials() {
    let (s3, _) = Schema::set().validate_in(f(3)).unwrap();
    let chi = |k| {
        FlatLattice::build(&s3.expand(k))
            .unwrap()
            .char_poly()
            .unwrap()
            .to_string()
    };
    assert_eq!(chi(2), "t^2 - t");
    assert_eq!(chi(3), "t^3 - 4t^2 + 3t");
    assert_eq!(chi(4), "t^4 - 10t^3 + 27t^2 - 18t");
    let (sq, _) = Schema::set().over(FieldSpec::Generic).validate_in(Rationals).unwrap();
    let chi_q = FlatLattice::build(&sq.expand(3)).unwrap().char_poly().unwrap();
    assert_eq!(chi_q.to_string(), "t^3 - 4t^2 + 5t - 2");
    assert_eq!(chi_q.point_count(5).unwrap(), BigInt::from(48));
}

#[test]
fn flat_indexing_is_deterministic() {
    let (s, _) = Schema::set().validate_in(f(3)).unwrap();
    let a = s.expand(5);
    let one = FlatLattice::build(&a).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let two = pool.install(|| FlatLattice::build(&a).unwrap());
    assert_eq!(one.len(), two.len());
    for (x, y) in one.flats().iter().zip(two.flats()) {
        assert_eq!(x.equations(), y.equations());
    }
    assert_eq!(one.mobius_values(), two.mobius_values());
}

/// Drop coordinates `j..` from forms that do not involve them.
fn truncate<F: Field>(a: &Arrangement<F>, j: usize) -> Vec<Vec<F::Elem>> {
    a.hyperplanes()
        .iter()
        .filter(|h| h.support(a.field()).iter().all(|&c| c < j))
        .map(|h| h.form()[..j].to_vec())
        .collect()
}

#[test]
fn expansion_truncates() {
    for p in [2, 3, 5, 7] {
        let schema = if p == 3 { Schema::set() } else { sumfree(p) };
        let (s, _) = schema.validate_in(f(p)).unwrap();
        for k in 0..=6 {
            let big = s.expand(k);
            for j in 0..=k {
                let small: Vec<Vec<u64>> = s.expand(j).hyperplanes().iter().map(|h| h.form().to_vec()).collect();
                assert_eq!(truncate(&big, j), small, "p = {p}, j = {j}, k = {k}");
            }
        }
    }
}

#[test]
fn hyperplane_counts_match_formula() {
    for p in [2, 3, 5, 7] {
        let schema = if p == 3 { Schema::set() } else { sumfree(p) };
        let (s, _) = schema.validate_in(f(p)).unwrap();
        for k in 0..=8 {
            assert_eq!(BigUint::from(s.expand(k).len()), s.hyperplane_count_formula(k));
        }
    }
    let (s5, _) = sumfree(5).validate_in(f(5)).unwrap();
    assert_eq!(s5.expand(3).len(), 6);
}

#[test]
fn appending_a_card_is_bounded() {
    // chi_k(q) <= q * chi_{k-1}(q)
    let (s, _) = Schema::set().validate_in(f(3)).unwrap();
    let chis: Vec<_> = (0..=5)
        .map(|k| FlatLattice::build(&s.expand(k)).unwrap().char_poly().unwrap())
        .collect();
    for q in [3u64, 9] {
        for k in 1..=5 {
            let now = chis[k].point_count(q).unwrap();
            let before = chis[k - 1].point_count(q).unwrap();
            assert!(now <= before * BigInt::from(q), "k = {k}, q = {q}");
        }
    }
}

fn permutation(k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..k).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn expansion_is_permutation_invariant((k, perm) in (0usize..=7).prop_flat_map(|k| (Just(k), permutation(k))), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let schema = if p == 3 { Schema::set() } else { sumfree(p) };
        let (s, _) = schema.validate_in(f(p)).unwrap();
        let a = s.expand(k);
        prop_assert_eq!(a.permuted(&perm).unwrap(), a);
    }

    #[test]
    fn chi_is_permutation_invariant((k, perm) in (0usize..=5).prop_flat_map(|k| (Just(k), permutation(k)))) {
        let (s, _) = Schema::set().validate_in(f(3)).unwrap();
        let a = s.expand(k);
        let chi = FlatLattice::build(&a).unwrap().char_poly().unwrap();
        let relabeled = FlatLattice::build(&a.permuted(&perm).unwrap()).unwrap().char_poly().unwrap();
        prop_assert_eq!(chi, relabeled);
    }

    /// Random arrangements: the closure agrees with subset intersection.
    #[test]
    fn random_arrangements_match_brute_force(
        forms in prop::collection::vec(prop::collection::vec(-2i64..=2, 3), 1..7),
        p in prop::sample::select(vec![2u64, 3, 5]),
    ) {
        let forms: Vec<Vec<i64>> = forms.into_iter().filter(|v| v.iter().any(|&x| x.rem_euclid(p as i64) != 0)).collect();
        let refs: Vec<&[i64]> = forms.iter().map(|v| v.as_slice()).collect();
        let a = Arrangement::from_i64_forms(f(p), 3, &refs).unwrap();
        assert_matches_brute_force(&a);
        let lattice = FlatLattice::build(&a).unwrap();
        prop_assert!(lattice.sign_condition_holds());
        let chi = lattice.char_poly().unwrap();
        // Complement count over F_p by direct point enumeration.
        let mut count = 0u64;
        for x in 0..p.pow(3) {
            let pt = [x % p, x / p % p, x / (p * p)];
            if a.avoids(&pt) { count += 1; }
        }
        prop_assert_eq!(chi.point_count(p).unwrap(), BigInt::from(count));
    }
}
