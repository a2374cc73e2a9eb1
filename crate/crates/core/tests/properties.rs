use proptest::prelude::*;

use conjlim::criteria::{basis_s_ker, dim_s_ker, in_s_ker};
use conjlim::goodpath::{construct_good_path, identity_residuals, in_c_prime, verify_rigidity};
use conjlim::io::{matrix_from_csv, matrix_from_json, matrix_to_csv, matrix_to_json};
use conjlim::modifier::{gershgorin, in_s_union_phi, j_norm_bound, Modifier};
use conjlim::numkit::{
    complex_normal, eigenvalues, ginibre, norm2, random_rank, rank, seeded_rng, Matrix, Tolerance,
};
use conjlim::pathsim::{polynomial_path_bounded, simulate, PathSpec, Verdict};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn kernel_member(z: &Matrix, seed: u64) -> Matrix {
    let mut rng = seeded_rng(seed);
    let n = z.nrows();
    basis_s_ker(z, &tol())
        .unwrap()
        .iter()
        .fold(Matrix::zeros(n, n), |acc, b| acc + b * complex_normal(&mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_algebra_is_closed(n in 2usize..6, r in 0usize..6, seed in any::<u64>()) {
        let r = r % n;
        let z = random_rank(n, r, &mut seeded_rng(seed));
        let a = kernel_member(&z, seed ^ 1);
        let b = kernel_member(&z, seed ^ 2);
        prop_assert!(in_s_ker(&(&a * &b), &z, &tol()).unwrap().member);
        prop_assert!(in_s_ker(&(&a + &b), &z, &tol()).unwrap().member);
        prop_assert!(in_s_ker(&Matrix::identity(n, n), &z, &tol()).unwrap().member);
        prop_assert_eq!(basis_s_ker(&z, &tol()).unwrap().len(), dim_s_ker(n, rank(&z, &tol())).unwrap());
    }

    #[test]
    fn kernel_criterion_transports_under_right_multiplication(n in 2usize..5, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let z = random_rank(n, n / 2, &mut rng);
        let p = ginibre(n, n, &mut rng);
        let pinv = p.clone().try_inverse().unwrap();
        let a = if seed % 2 == 0 { kernel_member(&z, seed) } else { ginibre(n, n, &mut rng) };
        let here = in_s_ker(&a, &z, &tol()).unwrap().member;
        let there = in_s_ker(&(&pinv * &a * &p), &(&z * &p), &tol()).unwrap().member;
        prop_assert_eq!(here, there);
    }

    #[test]
    fn good_paths_invert(n in 1usize..7, r in 0usize..7, seed in any::<u64>()) {
        let z = random_rank(n, r % (n + 1), &mut seeded_rng(seed));
        let gp = construct_good_path(&z, &tol(), 6).unwrap();
        let (left, right) = identity_residuals(&gp);
        prop_assert!(left <= 1e-8 && right <= 1e-8, "left {left:e} right {right:e}");
        prop_assert!(in_c_prime(&gp.c_neg, &z, &tol()).unwrap());
        prop_assert_eq!(verify_rigidity(&gp.z, &gp.e, &tol()).unwrap(), 1);
    }

    #[test]
    fn growth_matches_kernel_criterion(n in 2usize..5, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let z = random_rank(n, 1 + (seed as usize) % (n - 1), &mut rng);
        let a = if seed % 2 == 0 { kernel_member(&z, seed) } else { ginibre(n, n, &mut rng) };
        let gp = construct_good_path(&z, &tol(), 4).unwrap();
        let rep = simulate(&PathSpec::good_path(gp.clone()), &a, &Modifier::Identity).unwrap();
        let member = in_s_ker(&a, &z, &tol()).unwrap().member;
        prop_assert_eq!(rep.verdict, if member { Verdict::Bounded } else { Verdict::Divergent });
        let exact = polynomial_path_bounded(&gp.z, &gp.e, &a, &tol()).unwrap();
        prop_assert_eq!(exact, member);
    }

    #[test]
    fn j_union_equals_kernel_criterion(n in 2usize..5, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let z = random_rank(n, (seed as usize) % n, &mut rng);
        let a = if seed % 2 == 0 { kernel_member(&z, seed) } else { ginibre(n, n, &mut rng) };
        let j = in_s_union_phi(&a, &z, &Modifier::j(n), &tol(), seed).unwrap().member;
        prop_assert_eq!(j, in_s_ker(&a, &z, &tol()).unwrap().member);
    }

    #[test]
    fn eigenvalues_in_disks_and_diagonal_bound(n in 1usize..7, seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let a = ginibre(n, n, &mut seeded_rng(seed)).scale(scale);
        let g = gershgorin(&a).unwrap();
        for l in eigenvalues(&a) {
            prop_assert!(g.contains(l, 1e-8 * scale.max(1.0)));
        }
        prop_assert!(j_norm_bound(&a).unwrap().holds);
    }

    #[test]
    fn interchange_round_trips(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let m = ginibre(rows, cols, &mut seeded_rng(seed));
        let j = matrix_from_json(&matrix_to_json(&m)).unwrap();
        let c = matrix_from_csv(&matrix_to_csv(&m)).unwrap();
        prop_assert!(norm2(&(&j - &m)) <= 1e-15 * norm2(&m));
        prop_assert!(norm2(&(&c - &m)) <= 1e-15 * norm2(&m));
    }
}
