use novikov::scalar_linalg::{
    cohomology_at, kernel_basis, rref, smith_normal_form, LinalgError, ModuleShape, Scalar, ScalarRing, SparseMatrix,
};
use proptest::prelude::*;

fn fp(p: u32, rows: &[Vec<i64>]) -> SparseMatrix {
    SparseMatrix::from_i64_rows(ScalarRing::Fp(p), rows)
}

fn zp(p: u32, rows: &[Vec<i64>]) -> SparseMatrix {
    SparseMatrix::from_i64_rows(ScalarRing::Zp(p), rows)
}

fn dense_u32(m: &SparseMatrix) -> Vec<Vec<u32>> {
    m.to_dense().iter().map(|r| r.iter().map(|x| x.residue().unwrap()).collect()).collect()
}

#[test]
fn rref_examples() {
    let id = fp(2, &[vec![1, 0], vec![0, 1]]);
    let r = rref(&id).unwrap();
    assert_eq!(r.matrix, id);
    assert_eq!(r.pivots, vec![0, 1]);
    assert_eq!(r.rank, 2);

    let r = rref(&fp(2, &[vec![1, 1], vec![1, 1]])).unwrap();
    assert_eq!(dense_u32(&r.matrix), vec![vec![1, 1], vec![0, 0]]);
    assert_eq!(r.rank, 1);

    let r = rref(&fp(5, &[vec![1, 2], vec![2, 4]])).unwrap();
    assert_eq!(dense_u32(&r.matrix), vec![vec![1, 2], vec![0, 0]]);
    assert_eq!(r.rank, 1);
}

#[test]
fn rref_rejects_zp() {
    assert!(matches!(rref(&zp(2, &[vec![1]])), Err(LinalgError::RingMismatch(..))));
}

#[test]
fn kernel_examples() {
    let k = kernel_basis(&fp(2, &[vec![1, 1]])).unwrap();
    assert_eq!(k.len(), 1);
    assert!(k[0].iter().all(|x| x.residue() == Some(1)));
    assert!(kernel_basis(&fp(3, &[vec![1, 0], vec![0, 1]])).unwrap().is_empty());
    let k = kernel_basis(&SparseMatrix::zero(ScalarRing::Fp(2), 2, 3)).unwrap();
    assert_eq!(k.len(), 3);
    for (i, v) in k.iter().enumerate() {
        for (j, x) in v.iter().enumerate() {
            assert_eq!(x.residue().unwrap(), (i == j) as u32);
        }
    }
}

#[test]
fn snf_examples() {
    let s = smith_normal_form(&zp(2, &[vec![2, 0], vec![0, 4]])).unwrap();
    assert_eq!(s.exponents(), vec![1, 2]);
    let s = smith_normal_form(&zp(2, &[vec![2, 4], vec![1, 2]])).unwrap();
    assert_eq!(s.rank, 1);
    assert_eq!(s.exponents(), vec![0]);
    let s = smith_normal_form(&zp(2, &[vec![3]])).unwrap();
    assert_eq!(s.exponents(), vec![0]);
}

fn check_snf(m: &SparseMatrix) {
    let s = smith_normal_form(m).unwrap();
    let d = s.u.mul(m).unwrap().mul(&s.v).unwrap();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let want = if i == j && i < s.diag.len() { s.diag[i].clone() } else { Scalar::zero(m.ring()) };
            assert_eq!(d.get(i, j), want, "entry ({i},{j})");
        }
    }
    let ex = s.exponents();
    assert!(ex.windows(2).all(|w| w[0] <= w[1]), "divisibility order");
    for t in [&s.u, &s.v] {
        assert!(det_is_unit(t), "transform not invertible over Z_(p)");
    }
}

// determinant by fraction-free elimination over Q, then valuation check
fn det_is_unit(m: &SparseMatrix) -> bool {
    let n = m.rows();
    let mut a: Vec<Vec<num_rational::BigRational>> =
        m.to_dense().iter().map(|r| r.iter().map(|x| x.to_rational()).collect()).collect();
    let mut det = num_rational::BigRational::from_integer(1.into());
    for k in 0..n {
        let Some(pr) = (k..n).find(|&i| a[i][k] != num_rational::BigRational::from_integer(0.into())) else {
            return false;
        };
        if pr != k {
            a.swap(pr, k);
            det = -det;
        }
        det *= a[k][k].clone();
        for i in k + 1..n {
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
    }
    let p = m.ring().prime().unwrap();
    Scalar::Zp { p, q: det }.is_unit()
}

#[test]
fn cohomology_examples() {
    let f2 = ScalarRing::Fp(2);
    let z = cohomology_at(&SparseMatrix::zero(f2, 3, 0), &SparseMatrix::zero(f2, 0, 3)).unwrap();
    assert_eq!(z, ModuleShape { free_rank: 3, torsion: vec![] });

    let z2 = ScalarRing::Zp(2);
    let h = cohomology_at(&zp(2, &[vec![2]]), &SparseMatrix::zero(z2, 0, 1)).unwrap();
    assert_eq!(h, ModuleShape { free_rank: 0, torsion: vec![1] });

    let h = cohomology_at(&SparseMatrix::zero(f2, 2, 0), &fp(2, &[vec![1, 1]])).unwrap();
    assert_eq!(h, ModuleShape { free_rank: 1, torsion: vec![] });
}

#[test]
fn cohomology_rejects_nonzero_composition() {
    let e = cohomology_at(&fp(2, &[vec![1], vec![0]]), &fp(2, &[vec![1, 0]]));
    assert_eq!(e, Err(LinalgError::CompositionNotZero));
}

// independent dense Gaussian elimination
fn brute_rank(p: u32, rows: &[Vec<u32>]) -> usize {
    let mut a: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| x as u64).collect()).collect();
    let p = p as u64;
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..a.len()).find(|&i| a[i][c] % p != 0) else { continue };
        a.swap(pr, rank);
        let inv = (1..p).find(|x| a[rank][c] * x % p == 1).unwrap();
        for j in 0..cols {
            a[rank][j] = a[rank][j] * inv % p;
        }
        for i in 0..a.len() {
            if i != rank && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..cols {
                    a[i][j] = (a[i][j] + (p - f) * a[rank][j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn matrix_strategy(p: u32, max: usize) -> impl Strategy<Value = (usize, usize, Vec<u32>)> {
    (1..=max, 1..=max).prop_flat_map(move |(r, c)| (Just(r), Just(c), prop::collection::vec(0..p, r * c)))
}

fn to_rows(r: usize, c: usize, v: &[u32]) -> Vec<Vec<i64>> {
    (0..r).map(|i| (0..c).map(|j| v[i * c + j] as i64).collect()).collect()
}

proptest! {
    #[test]
    fn rank_nullity((r, c, v) in matrix_strategy(3, 6)) {
        let m = fp(3, &to_rows(r, c, &v));
        let rr = rref(&m).unwrap();
        let k = kernel_basis(&m).unwrap();
        prop_assert_eq!(rr.rank + k.len(), c);
        for vec in &k {
            prop_assert!(m.apply(vec).iter().all(|x| x.is_zero()));
        }
        prop_assert_eq!(rr.rank, brute_rank(3, &dense_u32(&m)));
    }

    #[test]
    fn rref_is_idempotent((r, c, v) in matrix_strategy(5, 6)) {
        let m = fp(5, &to_rows(r, c, &v));
        let once = rref(&m).unwrap();
        let twice = rref(&once.matrix).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn snf_is_valid((r, c, v) in (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(-12i64..=12, r * c)))) {
        let rows: Vec<Vec<i64>> = (0..r).map(|i| v[i * c..(i + 1) * c].to_vec()).collect();
        check_snf(&zp(2, &rows));
        check_snf(&zp(3, &rows));
    }

    #[test]
    fn random_fp_complexes((n0, n1, n2, a, b) in (1usize..=4, 1usize..=5, 1usize..=4).prop_flat_map(|(n0, n1, n2)| {
        (Just(n0), Just(n1), Just(n2), prop::collection::vec(0u32..2, n1 * n2), prop::collection::vec(0u32..2, n1 * n0))
    })) {
        // dout is random; din is a random combination of kernel vectors of dout
        let p = 2;
        let dout = fp(p, &to_rows(n2, n1, &a));
        let ker = kernel_basis(&dout).unwrap();
        let mut din_rows = vec![vec![0i64; n0]; n1];
        if !ker.is_empty() {
            for j in 0..n0 {
                for (k, kv) in ker.iter().enumerate() {
                    if b[(j * ker.len() + k) % b.len()] == 1 {
                        for i in 0..n1 {
                            din_rows[i][j] += kv[i].residue().unwrap() as i64;
                        }
                    }
                }
            }
        }
        let din = fp(p, &din_rows);
        let h = cohomology_at(&din, &dout).unwrap();
        let din_t: Vec<Vec<u32>> = (0..n0).map(|j| (0..n1).map(|i| din_rows[i][j].rem_euclid(2) as u32).collect()).collect();
        let expected = n1 - brute_rank(p, &dense_u32(&dout)) - brute_rank(p, &din_t);
        prop_assert_eq!(h.free_rank, expected);
        prop_assert!(h.torsion.is_empty());
    }

    #[test]
    fn random_zp_complexes(exps in prop::collection::vec(0u32..4, 0..3), free in 0usize..3, out_rank in 0usize..2, seed in any::<u64>()) {
        // C^{s} = Z^k ⊕ Z^free ⊕ Z^out_rank with din hitting p^{e_i} on the
        // first block and dout injective on the last block, then conjugated
        // by a unimodular change of basis.
        let p = 2i64;
        let k = exps.len();
        let n = k + free + out_rank;
        if n == 0 { return Ok(()); }
        let mut din = vec![vec![0i64; k]; n];
        for (i, e) in exps.iter().enumerate() { din[i][i] = p.pow(*e); }
        let mut dout = vec![vec![0i64; n]; out_rank];
        for i in 0..out_rank { dout[i][k + free + i] = 1; }
        // unimodular M = product of elementary ops; apply M to din rows and M^{-1} to dout columns
        let mut s = seed;
        for _ in 0..6 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let i = (s >> 33) as usize % n;
            let j = (s >> 17) as usize % n;
            if i == j { continue; }
            let f = ((s >> 5) % 5) as i64 - 2;
            // row_i += f row_j on din; column_j -= f column_i on dout
            for c in 0..k { let t = din[j][c]; din[i][c] += f * t; }
            for r in 0..out_rank { let t = dout[r][i]; dout[r][j] -= f * t; }
        }
        let z = ScalarRing::Zp(2);
        let din_m = if k == 0 { SparseMatrix::zero(z, n, 0) } else { zp(2, &din) };
        let dout_m = if out_rank == 0 { SparseMatrix::zero(z, 0, n) } else { zp(2, &dout) };
        let h = cohomology_at(&din_m, &dout_m).unwrap();
        let mut tors: Vec<u32> = exps.iter().copied().filter(|e| *e > 0).collect();
        tors.sort();
        prop_assert_eq!(h, ModuleShape { free_rank: free, torsion: tors });
    }
}
