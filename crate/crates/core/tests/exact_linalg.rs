use gcx::exact_linalg::{cohomology_dim, inverse, kernel_basis, rank, SparseMatQ};
use gcx::rational::{q_frac, Q};
use num_traits::Zero;
use proptest::prelude::*;

/// Textbook dense elimination, kept separate from the sparse integer one.
fn dense_rank(mut a: Vec<Vec<Q>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[r][c];
                for j in 0..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

fn entry() -> impl Strategy<Value = Q> {
    prop_oneof![
        3 => Just(Q::zero()),
        2 => (-4i64..=4, 1i64..=3).prop_map(|(n, d)| q_frac(n, d)),
    ]
}

fn matrix(max: usize) -> impl Strategy<Value = Vec<Vec<Q>>> {
    (1..=max, 1..=max)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(entry(), c), r))
}

/// Products `B·C` through a thin middle dimension, so the rank is often deficient.
fn low_rank(max: usize) -> impl Strategy<Value = SparseMatQ> {
    (1..=max, 1..=max, 1..=3usize).prop_flat_map(|(r, c, k)| {
        (
            prop::collection::vec(prop::collection::vec(entry(), k), r),
            prop::collection::vec(prop::collection::vec(entry(), c), k),
        )
            .prop_map(|(b, c)| {
                SparseMatQ::from_dense(&b)
                    .mul(&SparseMatQ::from_dense(&c))
                    .unwrap()
            })
    })
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut x = seed;
    for i in (1..n).rev() {
        x = x
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        p.swap(i, (x >> 33) as usize % (i + 1));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rank_matches_dense_elimination(a in matrix(7)) {
        prop_assert_eq!(rank(&SparseMatQ::from_dense(&a)), dense_rank(a));
    }

    #[test]
    fn rank_of_products(m in low_rank(7)) {
        prop_assert_eq!(rank(&m), dense_rank(m.to_dense()));
        prop_assert!(rank(&m) <= 3);
    }

    #[test]
    fn rank_ignores_transpose_and_permutation(m in low_rank(8), s in any::<u64>(), t in any::<u64>()) {
        let r = rank(&m);
        prop_assert_eq!(rank(&m.transpose()), r);
        let p = m.permute(&shuffled(m.rows(), s), &shuffled(m.cols(), t));
        prop_assert_eq!(rank(&p), r);
    }

    #[test]
    fn kernel_vectors_span_the_kernel(m in low_rank(7)) {
        let ker = kernel_basis(&m);
        prop_assert_eq!(ker.len(), m.cols() - rank(&m));
        for v in &ker {
            prop_assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
        if !ker.is_empty() {
            let cols: Vec<Vec<Q>> = (0..m.cols())
                .map(|i| ker.iter().map(|v| v[i].clone()).collect())
                .collect();
            prop_assert_eq!(dense_rank(cols), ker.len());
        }
    }

    #[test]
    fn inverse_when_full_rank(a in (1..=5usize).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(entry(), n), n)
    })) {
        let m = SparseMatQ::from_dense(&a);
        let n = m.rows();
        match inverse(&m) {
            Some(inv) => {
                prop_assert_eq!(rank(&m), n);
                prop_assert_eq!(m.mul(&inv).unwrap(), SparseMatQ::identity(n));
            }
            None => prop_assert!(rank(&m) < n),
        }
    }

    #[test]
    fn sms_round_trip(m in low_rank(6)) {
        prop_assert_eq!(SparseMatQ::from_sms(&m.to_sms()).unwrap(), m);
    }

    #[test]
    fn cohomology_of_a_split_sequence(m in low_rank(6)) {
        // The kernel inclusion followed by m is exact in the middle.
        let ker = kernel_basis(&m);
        let inc = SparseMatQ::from_dense(
            &(0..m.cols()).map(|i| ker.iter().map(|v| v[i].clone()).collect()).collect::<Vec<Vec<Q>>>(),
        );
        if !ker.is_empty() {
            prop_assert_eq!(cohomology_dim(&inc, &m).unwrap(), 0);
        }
    }
}
