use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use symwalk::characters::CycleType;
use symwalk::distances::{chi_square_of, l2_continuous, l2_discrete, tv_of};
use symwalk::oracle::*;
use symwalk::spectra::{
    lazy_class_measure, random_transposition_measure, spectrum, uniform_class_measure, Group,
};
use symwalk::{ClassMeasure, Real};

const PREC: usize = 128;

fn class_walks(n: usize) -> Vec<ClassMeasure> {
    let mut out = vec![random_transposition_measure(n).unwrap()];
    out.push(uniform_class_measure(&CycleType::cycle(3, n).unwrap()).unwrap());
    if n >= 4 {
        out.push(uniform_class_measure(&CycleType::cycle(4, n).unwrap()).unwrap());
    }
    let half = BigRational::new(1.into(), 2.into());
    out.push(lazy_class_measure(&CycleType::cycle(3, n).unwrap(), &half).unwrap());
    out
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn convolution_powers_match_spectral_sums() {
    for n in 3..=6 {
        for q in class_walks(n) {
            let s = spectrum(&q, Group::Symmetric).unwrap();
            let elem = element_measure_of(&q).unwrap();
            for_each_power(&elem, 30, |t, law| {
                let oracle = chi_square_of(law, PREC).unwrap().to_f64();
                let spectral = l2_discrete(&s, t, PREC).to_f64();
                assert!(rel_close(oracle, spectral, 1e-8), "{} n={n} t={t}: {oracle} vs {spectral}", q.name());
                let tv = tv_of(law, PREC).unwrap().to_f64();
                assert!(2.0 * tv <= oracle + 1e-12);
            })
            .unwrap();
        }
    }
}

#[test]
fn named_cross_checks() {
    let q = random_transposition_measure(5).unwrap();
    let s = spectrum(&q, Group::Symmetric).unwrap();
    let elem = element_measure(&Walk::RandomTransposition, 5).unwrap();
    for t in [5u64, 6] {
        let oracle = chi_square_of(&convolution_power(&elem, t).unwrap(), PREC).unwrap().to_f64();
        assert!((oracle - l2_discrete(&s, t, PREC).to_f64()).abs() < 1e-9);
    }
    let law4 = convolution_power(&elem, 4).unwrap();
    let tv = tv_of(&law4, PREC).unwrap().to_f64();
    assert!(2.0 * tv <= chi_square_of(&law4, PREC).unwrap().to_f64());

    let t = Real::from_f64(8.0, PREC);
    let (law, cut) = continuous_law(&elem, &t, 1e-14, PREC).unwrap();
    assert!(cut > 8);
    let oracle = chi_square_of(&law, PREC).unwrap().to_f64();
    assert!((oracle - l2_continuous(&s, &t, PREC).to_f64()).abs() < 1e-8);
}

#[test]
fn low_powers() {
    let elem = element_measure(&Walk::RandomInsertion, 4).unwrap();
    let zero = convolution_power(&elem, 0).unwrap();
    assert_eq!(zero.exact(0).unwrap(), BigRational::from_integer(BigInt::from(1)));
    let one = convolution_power(&elem, 1).unwrap();
    for x in 0..24 {
        assert_eq!(one.exact(x), elem.exact(x));
    }
    let (law, cut) = continuous_law(&elem, &Real::zero(PREC), 1e-14, PREC).unwrap();
    assert_eq!(cut, 0);
    assert!((law.real(0, PREC).to_f64() - 1.0).abs() < 1e-30);
}

#[test]
fn continuous_laws_match_spectral_sums() {
    let times: Vec<Real> = [0.5, 2.0, 5.0, 9.5].iter().map(|&t| Real::from_f64(t, PREC)).collect();
    for n in 3..=5 {
        for q in class_walks(n) {
            let s = spectrum(&q, Group::Symmetric).unwrap();
            let elem = element_measure_of(&q).unwrap();
            let laws = continuous_laws(&elem, &times, 1e-14, PREC).unwrap();
            for ((law, _), t) in laws.iter().zip(&times) {
                let oracle = chi_square_of(law, PREC).unwrap().to_f64();
                let spectral = l2_continuous(&s, t, PREC).to_f64();
                assert!(rel_close(oracle, spectral, 1e-8), "{} n={n}: {oracle} vs {spectral}", q.name());
            }
        }
    }
}

#[test]
fn operator_eigenvalues_match_spectrum() {
    for n in 3..=6 {
        let q = random_transposition_measure(n).unwrap();
        let s = spectrum(&q, Group::Symmetric).unwrap();
        let mut expected = Vec::new();
        for e in s.entries() {
            let m: usize = e.multiplicity.to_string().parse().unwrap();
            let b = e.eigenvalue.numer().to_string().parse::<f64>().unwrap()
                / e.eigenvalue.denom().to_string().parse::<f64>().unwrap();
            expected.extend(std::iter::repeat(b).take(m));
        }
        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let found = operator_eigenvalues(&element_measure_of(&q).unwrap()).unwrap();
        assert_eq!(found.len(), expected.len());
        for (a, b) in found.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn transpose_top_against_dense_operator() {
    for n in 3..=6 {
        let elem = element_measure(&Walk::TransposeTop, n).unwrap();
        let eigs = operator_eigenvalues(&elem).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - (1.0 - 1.0 / n as f64)).abs() < 1e-10);
        let count = eigs.iter().filter(|&&b| (b - (1.0 - 1.0 / n as f64)).abs() < 1e-9).count();
        assert!(count >= (n - 1) * (n - 2));
        for_each_power(&elem, 20, |t, law| {
            let oracle = chi_square_of(law, PREC).unwrap().to_f64();
            assert!(rel_close(oracle, l2_from_eigenvalues(&eigs, t), 1e-8), "n={n} t={t}");
            let lower = ((n - 1) * (n - 2)) as f64 * (1.0 - 1.0 / n as f64).powi(2 * t as i32);
            assert!(oracle * oracle >= lower * (1.0 - 1e-9));
        })
        .unwrap();
    }
}

#[test]
fn eigenfunctions() {
    let n = 5;
    let rt = element_measure(&Walk::RandomTransposition, n).unwrap();
    let phi = fixed_point_function(n).unwrap();
    assert!(eigenfunction_residual(&phi, &rt, 1.0 - 2.0 / n as f64).unwrap() <= 1e-12);

    let ttr = element_measure(&Walk::TransposeTop, n).unwrap();
    let f = ttr_remark_function(n).unwrap();
    assert!(eigenfunction_residual(&f, &ttr, 1.0 - 1.0 / n as f64).unwrap() <= 1e-12);
    assert!((f.values[0].powi(2) - ((n - 1) * (n - 2)) as f64).abs() < 1e-12);

    for n in 3..=7 {
        let ri = element_measure(&Walk::RandomInsertion, n).unwrap();
        let w = ri_wilson_function(n).unwrap();
        let beta = ri_wilson_eigenvalue(n);
        let beta_f = beta.numer().to_string().parse::<f64>().unwrap() / beta.denom().to_string().parse::<f64>().unwrap();
        assert!(eigenfunction_residual(&w, &ri, beta_f).unwrap() <= 1e-12, "n={n}");
        // the stated 1 - 1/n misses by exactly 2/n² times the sup norm
        let sup = w.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let off = eigenfunction_residual(&w, &ri, 1.0 - 1.0 / n as f64).unwrap();
        assert!((off - 2.0 / (n * n) as f64 * sup).abs() < 1e-12, "n={n}");
        let order: usize = (1..=n).product();
        // Σ_σ ⟨σv, v⟩² = n (n-2)! |v|⁴ with |v|² = n(n+1)/(3(n-1))
        let expected = BigRational::new(
            BigInt::from(order * n * n * (n + 1) * (n + 1)),
            BigInt::from(9 * (n - 1).pow(3)),
        );
        assert_eq!(ri_wilson_square_sum_exact(n).unwrap(), expected);
        let stated = BigRational::new(BigInt::from(order * n * n), BigInt::from(n - 1));
        assert_ne!(expected, stated);
        let exact_f = expected.numer().to_string().parse::<f64>().unwrap() / expected.denom().to_string().parse::<f64>().unwrap();
        assert!((w.square_sum() / exact_f - 1.0).abs() < 1e-12);
        if n >= 4 {
            assert!(square_gradient_sup(&w, &ri).unwrap() <= 32.0);
        }
    }
    assert_eq!(ri_wilson_square_sum_exact(5).unwrap(), BigRational::new(375.into(), 2.into()));

    for n in 3..=5 {
        let one = GroupFunction::constant(n, 1.0).unwrap();
        for walk in [Walk::RandomTransposition, Walk::TransposeTop, Walk::RandomInsertion] {
            let q = element_measure(&walk, n).unwrap();
            assert!(eigenfunction_residual(&one, &q, 1.0).unwrap() <= 1e-15);
            assert_eq!(square_gradient_sup(&one, &q).unwrap(), 0.0);
            assert_eq!(dirichlet_form(&q, &one).unwrap(), 0.0);
        }
    }
    assert!(square_gradient_sup(&phi, &rt).unwrap().is_finite());
}

#[test]
fn comparison_of_insertion_and_transpositions() {
    for n in [4, 5] {
        let rt = element_measure(&Walk::RandomTransposition, n).unwrap();
        let ri = element_measure(&Walk::RandomInsertion, n).unwrap();
        assert!(comparison_gap(&ri, &rt, 4.0).unwrap() >= -1e-10, "n={n}");
    }
    for n in 3..=5 {
        let rt = element_measure(&Walk::RandomTransposition, n).unwrap();
        let ri = element_measure(&Walk::RandomInsertion, n).unwrap();
        let a = comparison_constant(&ri, &rt).unwrap();
        assert!(a > 0.0 && a <= 4.0 + 1e-9, "n={n}: {a}");
        assert!(comparison_gap(&ri, &rt, a + 1e-6).unwrap() >= -1e-10);
        assert!(comparison_gap(&ri, &rt, 0.9 * a).unwrap() < -1e-6);
        let back = comparison_constant(&rt, &ri).unwrap();
        assert!(comparison_gap(&rt, &ri, back + 1e-6).unwrap() >= -1e-10);
        let nf = n as f64;
        assert!((a - 2.0 * nf / (nf + 1.0)).abs() < 1e-9, "n={n}: {a}");
        assert!((back - nf / 2.0).abs() < 1e-9, "n={n}: {back}");
    }
    let rt = element_measure(&Walk::RandomTransposition, 5).unwrap();
    assert!((comparison_constant(&rt, &rt).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn insertion_walk_is_dominated_by_slowed_transpositions() {
    for n in 3..=6 {
        let rt = random_transposition_measure(n).unwrap();
        let s = spectrum(&rt, Group::Symmetric).unwrap();
        let ri = element_measure(&Walk::RandomInsertion, n).unwrap();
        for_each_power(&ri, 40, |t, law| {
            if t % 4 != 0 {
                return;
            }
            let lhs = chi_square_of(law, PREC).unwrap().to_f64();
            let rhs = l2_continuous(&s, &Real::from_f64(t as f64 / 4.0, PREC), PREC).to_f64();
            assert!(lhs <= rhs * (1.0 + 1e-9), "n={n} t={t}: {lhs} > {rhs}");
        })
        .unwrap();
    }
}

#[test]
fn odd_classes_are_periodic() {
    for n in 4..=6 {
        let q = uniform_class_measure(&CycleType::cycle(4, n).unwrap()).unwrap();
        let elem = element_measure_of(&q).unwrap();
        let eigs = operator_eigenvalues(&elem).unwrap();
        assert!(eigs.iter().any(|&b| (b + 1.0).abs() < 1e-9));
        let group = SymmetricGroup::new(n).unwrap();
        for_each_power(&elem, 6, |t, law| {
            assert_eq!(law.supported_on_alternating(&group), t % 2 == 0, "n={n} t={t}");
        })
        .unwrap();
    }
}

#[test]
fn alternating_distances_of_even_walks() {
    let q = uniform_class_measure(&CycleType::cycle(3, 5).unwrap()).unwrap();
    let s = spectrum(&q, Group::Alternating).unwrap();
    let elem = element_measure_of(&q).unwrap();
    for_each_power(&elem, 20, |t, law| {
        let oracle = chi_square_on(law, Group::Alternating, PREC).unwrap().to_f64();
        let spectral = l2_discrete(&s, t, PREC).to_f64();
        assert!(rel_close(oracle, spectral, 1e-8), "t={t}: {oracle} vs {spectral}");
        let tv = tv_on(law, Group::Alternating, PREC).unwrap().to_f64();
        assert!(2.0 * tv <= oracle + 1e-12);
    })
    .unwrap();
}

#[test]
fn census_and_guards() {
    let census = fixed_point_census(5).unwrap();
    let counts: Vec<u64> = census.iter().map(|c| c.to_string().parse().unwrap()).collect();
    assert_eq!(counts, vec![44, 45, 20, 10, 0, 1]);
    assert!(element_measure(&Walk::RandomTransposition, 9).is_err());
    let q = element_measure(&Walk::RandomTransposition, 7).unwrap();
    assert!(comparison_gap(&q, &q, 1.0).is_err());
    assert!(element_measure(&Walk::Lazy(CycleType::cycle(3, 4).unwrap(), BigRational::from_integer(1.into())), 4)
        .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lehmer_codes_round_trip(n in 1usize..=8, seed in any::<u64>()) {
        let order: usize = (1..=n).product();
        let r = (seed % order as u64) as usize;
        let p = lehmer_unrank(n, r);
        prop_assert_eq!(lehmer_rank(&p), r);
        prop_assert_eq!(compose(&p, &inverse(&p)), identity(n));
        prop_assert_eq!(is_even(&p), is_even(&inverse(&p)));
    }

    #[test]
    fn tv_never_exceeds_half_chi_square(n in 3usize..=5, t in 0u64..8, pick in 0usize..3) {
        let walk = [Walk::RandomTransposition, Walk::TransposeTop, Walk::RandomInsertion][pick].clone();
        let law = convolution_power(&element_measure(&walk, n).unwrap(), t).unwrap();
        let tv = tv_of(&law, PREC).unwrap().to_f64();
        let chi = chi_square_of(&law, PREC).unwrap().to_f64();
        prop_assert!(2.0 * tv <= chi + 1e-12);
    }
}

#[test]
fn walk_names_round_trip() {
    let n = 7;
    for spec in ["rt", "ttr", "ri", "class:3", "class:4", "class:3,2", "lazy:3:1/2", "lazy:2,2:1/3"] {
        let w = Walk::parse(spec, n).unwrap();
        assert_eq!(w.name(), spec);
        assert_eq!(Walk::parse(&w.name(), n).unwrap(), w);
    }
    for bad in ["", "foo", "class:", "class:8", "class:4,4", "class:1", "lazy:3", "lazy:3:2", "lazy:3:x"] {
        assert!(Walk::parse(bad, n).is_err(), "{bad}");
    }
}

#[test]
fn ratio_parsing() {
    let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
    assert_eq!(parse_ratio("1/2").unwrap(), r(1, 2));
    assert_eq!(parse_ratio(" 3/6 ").unwrap(), r(1, 2));
    assert_eq!(parse_ratio("0.25").unwrap(), r(1, 4));
    assert_eq!(parse_ratio("1").unwrap(), r(1, 1));
    for bad in ["", "1/0", "a/b", "0.2.5", "x"] {
        assert!(parse_ratio(bad).is_err(), "{bad}");
    }
}

#[test]
fn cross_check_agrees_with_both_references() {
    let times = [0.5, 1.0, 3.0];
    for spec in ["rt", "class:3", "lazy:3:1/2"] {
        let c = cross_check(&Walk::parse(spec, 5).unwrap(), 5, 6, &times, 1e-8, PREC).unwrap();
        assert_eq!(c.reference, "spectrum");
        assert!(c.pass && c.tv_dominated, "{spec}: {}", c.max_rel_error);
        assert!(c.comparisons > 0);
    }
    for spec in ["ttr", "ri"] {
        let c = cross_check(&Walk::parse(spec, 5).unwrap(), 5, 6, &times, 1e-8, PREC).unwrap();
        assert_eq!(c.reference, "dense");
        assert!(c.pass, "{spec}: {}", c.max_rel_error);
    }
}
