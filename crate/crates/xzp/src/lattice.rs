//! Exact integer linear algebra: ranks mod p, integral kernels, lattice
//! saturation and LLL reduction, all in arbitrary precision.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("matrix dimensions are inconsistent")]
    Dimensions,
    #[error("vectors are linearly dependent over Q")]
    RankDeficient,
    #[error("no nonsingular maximal submatrix exists")]
    NoNonsingularSubmatrix,
}

/// Dense integer matrix, row-major, arbitrary-precision entries.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self, LatticeError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        if rows.iter().any(|v| v.len() != c) {
            return Err(LatticeError::Dimensions);
        }
        Ok(IntegerMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .expect("rectangular input")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let (_, _, rank) = rref_rational(&self.to_rational());
        rank
    }

    pub fn to_rational(&self) -> Vec<Vec<BigRational>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect()
    }
}

/// Basis of a sublattice of `Z^dim`: linearly independent integer vectors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LatticeBasis {
    dim: usize,
    vectors: Vec<Vec<BigInt>>,
}

impl LatticeBasis {
    /// Checked constructor: the vectors must be independent over `Q`.
    pub fn new(vectors: Vec<Vec<BigInt>>) -> Result<Self, LatticeError> {
        if vectors.is_empty() {
            return Ok(LatticeBasis {
                dim: 0,
                vectors,
            });
        }
        let dim = vectors[0].len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(LatticeError::Dimensions);
        }
        let m = IntegerMatrix::from_rows(vectors.clone())?;
        if m.rank() != vectors.len() {
            return Err(LatticeError::RankDeficient);
        }
        Ok(LatticeBasis { dim, vectors })
    }

    pub fn empty(dim: usize) -> Self {
        LatticeBasis {
            dim,
            vectors: Vec::new(),
        }
    }

    pub fn from_i64(vectors: &[&[i64]]) -> Self {
        Self::new(
            vectors
                .iter()
                .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .expect("independent input")
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }
    pub fn vectors(&self) -> &[Vec<BigInt>] {
        &self.vectors
    }
    pub fn into_vectors(self) -> Vec<Vec<BigInt>> {
        self.vectors
    }

    pub fn to_matrix(&self) -> IntegerMatrix {
        IntegerMatrix::from_rows(self.vectors.clone()).expect("rectangular")
    }

    /// Is `v` an integer combination of the basis vectors? Returns the
    /// coefficients if so.
    pub fn express(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        // Solve x * B = v over Q, then check integrality.
        let coeffs = solve_left_rational(&self.vectors, v)?;
        let mut out = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            if !c.denom().is_one() {
                return None;
            }
            out.push(c.numer().clone());
        }
        Some(out)
    }
}

// ---------------------------------------------------------------------------
// rational elimination helpers
// ---------------------------------------------------------------------------

/// Reduced row echelon form over `Q`. Returns (rref, pivot columns, rank).
pub fn rref_rational(m: &[Vec<BigRational>]) -> (Vec<Vec<BigRational>>, Vec<usize>, usize) {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for j in c..cols {
            let v = &a[r][j] * &inv;
            a[r][j] = v;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..cols {
                    let v = &a[i][j] - &f * &a[r][j];
                    a[i][j] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots, r)
}

/// Solve `x * rows = v` over `Q` when `rows` are independent; `None` if `v`
/// is outside the span.
fn solve_left_rational(rows: &[Vec<BigInt>], v: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = rows.len();
    if n == 0 {
        return if v.iter().all(|x| x.is_zero()) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let dim = rows[0].len();
    // Transpose system: rows^T * x^T = v^T, augmented elimination.
    let aug: Vec<Vec<BigRational>> = (0..dim)
        .map(|j| {
            let mut row: Vec<BigRational> = rows
                .iter()
                .map(|r| BigRational::from_integer(r[j].clone()))
                .collect();
            row.push(BigRational::from_integer(v[j].clone()));
            row
        })
        .collect();
    let (rref, pivots, rank) = rref_rational(&aug);
    // Inconsistent if a pivot lands in the last column.
    if pivots.iter().any(|&c| c == n) {
        return None;
    }
    if rank < n {
        // rows were assumed independent; treat as unsolvable defensively
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rref[i][n].clone();
    }
    Some(x)
}

/// Determinant by fraction-free Bareiss elimination.
pub fn bareiss_det(m: &IntegerMatrix) -> BigInt {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.row_vecs();
    let mut sign = 1i64;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = &t / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

// ---------------------------------------------------------------------------
// primality and factoring (for candidate primes)
// ---------------------------------------------------------------------------

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // deterministic Miller-Rabin for u64 with the standard witness set
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    acc
}

pub fn is_prime_bigint(n: &BigInt) -> bool {
    if let Ok(u) = u64::try_from(n) {
        return is_prime_u64(u);
    }
    if n.sign() != Sign::Plus {
        return false;
    }
    let two = BigInt::from(2);
    if (n % &two).is_zero() {
        return false;
    }
    // Miller-Rabin with fixed small bases; inputs here are candidate
    // divisors of determinants, so probabilistic certainty is acceptable
    // only because every consumer re-verifies via exact dependency checks.
    let n1: BigInt = n - 1;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let a = BigInt::from(a);
        if &a >= n {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factor `n > 0` into primes by trial division plus Pollard rho.
pub fn factor_bigint(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    let push = |p: BigInt, out: &mut Vec<(BigInt, u32)>| {
        if let Some(e) = out.iter_mut().find(|(q, _)| *q == p) {
            e.1 += 1;
        } else {
            out.push((p, 1));
        }
    };
    let mut p = 2u64;
    while p <= 100_000 && !n.is_one() {
        let pb = BigInt::from(p);
        if (&pb * &pb) > n {
            break;
        }
        while (&n % &pb).is_zero() {
            n = &n / &pb;
            push(pb.clone(), &mut out);
        }
        p = if p == 2 { 3 } else { p + 2 };
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime_bigint(&m) {
            push(m, &mut out);
            continue;
        }
        let d = pollard_rho(&m);
        stack.push(&m / &d);
        stack.push(d);
    }
    out.sort();
    out
}

fn pollard_rho(n: &BigInt) -> BigInt {
    // Brent's cycle variant; n is odd, composite, > 10^10.
    let mut c = BigInt::one();
    loop {
        let mut x = BigInt::from(2);
        let mut y = BigInt::from(2);
        let mut d = BigInt::one();
        let f = |v: &BigInt| (v * v + &c) % n;
        let mut iter = 0u64;
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            d = (&x - &y).abs().gcd(n);
            iter += 1;
            if iter > 2_000_000 {
                break;
            }
        }
        if !d.is_one() && d != *n {
            return d;
        }
        c += 1;
    }
}

// ---------------------------------------------------------------------------
// rank mod p and dependencies mod p
// ---------------------------------------------------------------------------

/// Rank of an integer matrix over `F_p`.
pub fn rank_mod_p(m: &IntegerMatrix, p: &BigInt) -> usize {
    if let Ok(pu) = u64::try_from(p) {
        if pu < (1 << 62) {
            return rank_mod_small(m, pu);
        }
    }
    let mut a: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|i| m.row(i).iter().map(|x| x.mod_floor(p)).collect())
        .collect();
    let rows = m.rows;
    let cols = m.cols;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pi) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pi);
        let inv = mod_inverse(&a[r][c], p).expect("pivot invertible mod prime");
        for j in c..cols {
            a[r][j] = (&a[r][j] * &inv).mod_floor(p);
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..cols {
                    let t = (&a[i][j] - &f * &a[r][j]).mod_floor(p);
                    a[i][j] = t;
                }
            }
        }
        r += 1;
    }
    r
}

fn rank_mod_small(m: &IntegerMatrix, p: u64) -> usize {
    let pb = BigInt::from(p);
    let mut a: Vec<Vec<u64>> = (0..m.rows)
        .map(|i| {
            m.row(i)
                .iter()
                .map(|x| u64::try_from(x.mod_floor(&pb)).unwrap())
                .collect()
        })
        .collect();
    let rows = m.rows;
    let cols = m.cols;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pi) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, pi);
        let inv = pow_mod_u64(a[r][c], p - 2, p);
        for j in c..cols {
            a[r][j] = mul_mod_u64(a[r][j], inv, p);
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for j in c..cols {
                    let t = mul_mod_u64(f, a[r][j], p);
                    a[i][j] = (a[i][j] + p - t) % p;
                }
            }
        }
        r += 1;
    }
    r
}

pub fn mod_inverse(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return None;
    }
    let e = a.extended_gcd(p);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(p))
}

/// If the basis vectors are dependent mod `p`, return integer coefficients
/// (not all divisible by `p`) of a dependency, normalized so that the
/// lowest-index nonzero coefficient is 1.
pub fn is_dependent_mod_p(basis: &LatticeBasis, p: &BigInt) -> Option<Vec<BigInt>> {
    let n = basis.rank();
    if n == 0 {
        return None;
    }
    let dim = basis.ambient_dim();
    // Row-reduce [vectors | I] mod p; a zero row in the left block exposes a
    // dependency in the right block.
    let mut a: Vec<Vec<BigInt>> = basis
        .vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut row: Vec<BigInt> = v.iter().map(|x| x.mod_floor(p)).collect();
            row.extend((0..n).map(|j| {
                if i == j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            }));
            row
        })
        .collect();
    let mut r = 0;
    for c in 0..dim {
        if r == n {
            break;
        }
        let Some(pi) = (r..n).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pi);
        let inv = mod_inverse(&a[r][c], p).expect("prime modulus");
        for j in 0..dim + n {
            a[r][j] = (&a[r][j] * &inv).mod_floor(p);
        }
        for i in 0..n {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..dim + n {
                    let t = (&a[i][j] - &f * &a[r][j]).mod_floor(p);
                    a[i][j] = t;
                }
            }
        }
        r += 1;
    }
    if r == n {
        return None;
    }
    // any row with zero left block carries a dependency
    let row = a
        .iter()
        .find(|row| row[..dim].iter().all(|x| x.is_zero()))
        .expect("rank deficit implies a zero row");
    let mut dep: Vec<BigInt> = row[dim..].to_vec();
    let lead = dep.iter().position(|x| !x.is_zero()).expect("nonzero dependency");
    let inv = mod_inverse(&dep[lead], p).expect("unit");
    for x in dep.iter_mut() {
        *x = (&*x * &inv).mod_floor(p);
    }
    Some(dep)
}

// ---------------------------------------------------------------------------
// candidate primes and saturation
// ---------------------------------------------------------------------------

/// Primes that can divide the index of the spanned lattice in its
/// saturation: computed from gcds of maximal minors of the basis matrix.
pub fn candidate_primes(basis: &LatticeBasis) -> Vec<BigInt> {
    let g = basis.rank();
    if g == 0 {
        return Vec::new();
    }
    let m = basis.to_matrix();
    let cols = pick_independent_columns(&m).expect("full-rank basis");
    let mut delta = bareiss_det(&submatrix(&m, &cols)).abs();
    assert!(!delta.is_zero(), "chosen submatrix must be nonsingular");
    // Shrink by gcd-ing against a few more maximal minors: the index divides
    // every one of them.
    let mut tried = 0;
    let mut offset = 1;
    while !delta.is_one() && tried < 6 && offset + g <= m.cols() {
        let alt: Vec<usize> = (0..g).map(|i| (cols[i] + offset) % m.cols()).collect();
        let mut alt_sorted = alt.clone();
        alt_sorted.sort_unstable();
        alt_sorted.dedup();
        if alt_sorted.len() == g {
            let d = bareiss_det(&submatrix(&m, &alt_sorted)).abs();
            if !d.is_zero() {
                delta = delta.gcd(&d);
                tried += 1;
            }
        }
        offset += 1;
    }
    factor_bigint(&delta).into_iter().map(|(p, _)| p).collect()
}

fn submatrix(m: &IntegerMatrix, cols: &[usize]) -> IntegerMatrix {
    IntegerMatrix::from_rows(
        (0..m.rows())
            .map(|i| cols.iter().map(|&j| m.get(i, j).clone()).collect())
            .collect(),
    )
    .expect("rectangular")
}

/// Lexicographically first set of columns on which the matrix has full row
/// rank (via rational elimination pivots).
fn pick_independent_columns(m: &IntegerMatrix) -> Option<Vec<usize>> {
    let (_, pivots, rank) = rref_rational(&m.to_rational());
    if rank == m.rows() {
        Some(pivots)
    } else {
        None
    }
}

#[derive(Clone, Debug)]
pub struct SaturationResult {
    pub basis: LatticeBasis,
    /// Index of the input lattice inside the saturated lattice.
    pub index: BigInt,
}

/// Saturate the spanned lattice: return a basis of `span_Q ∩ Z^m`.
///
/// Runs the dependency-elimination loop prime by prime: while the basis is
/// dependent mod `p`, replace one vector by the exact `1/p`-scaled
/// dependency combination. Each replacement divides the index by `p`.
pub fn saturate(basis: &LatticeBasis) -> Result<SaturationResult, LatticeError> {
    let g = basis.rank();
    if g == 0 {
        return Ok(SaturationResult {
            basis: basis.clone(),
            index: BigInt::one(),
        });
    }
    let mut vectors = basis.vectors.clone();
    let mut index = BigInt::one();
    let mut primes = candidate_primes(basis);
    while let Some(p) = primes.pop() {
        loop {
            let current = LatticeBasis {
                dim: basis.dim,
                vectors: vectors.clone(),
            };
            let Some(dep) = is_dependent_mod_p(&current, &p) else {
                break;
            };
            // replace the lowest-index vector whose coefficient is 1
            let lead = dep
                .iter()
                .position(|c| c.is_one())
                .expect("normalized dependency has a unit coefficient");
            let mut combo = vec![BigInt::zero(); basis.dim];
            for (c, v) in dep.iter().zip(vectors.iter()) {
                if c.is_zero() {
                    continue;
                }
                for (t, x) in combo.iter_mut().zip(v.iter()) {
                    *t += c * x;
                }
            }
            for t in combo.iter_mut() {
                let (q, r) = t.div_rem(&p);
                assert!(r.is_zero(), "dependency combination must be divisible by p");
                *t = q;
            }
            vectors[lead] = combo;
            index *= &p;
        }
    }
    let out = LatticeBasis::new(vectors)?;
    // Certify: no candidate prime of the output admits a dependency.
    for p in candidate_primes(&out) {
        if is_dependent_mod_p(&out, &p).is_some() {
            // Can only happen if factoring missed a prime; retry on it.
            return saturate(&out).map(|mut r| {
                r.index *= &index;
                r
            });
        }
    }
    Ok(SaturationResult { basis: out, index })
}

// ---------------------------------------------------------------------------
// integral kernel
// ---------------------------------------------------------------------------

/// Saturated basis of `ker(M) ∩ Z^cols`: every integer kernel vector is a
/// `Z`-combination of the returned vectors.
pub fn integral_kernel(m: &IntegerMatrix) -> LatticeBasis {
    let (rref, pivots, rank) = rref_rational(&m.to_rational());
    let cols = m.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    if free.is_empty() {
        return LatticeBasis::empty(cols);
    }
    let mut vecs = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![BigRational::zero(); cols];
        v[f] = BigRational::one();
        for (i, &pc) in pivots.iter().enumerate().take(rank) {
            v[pc] = -rref[i][f].clone();
        }
        // clear denominators
        let mut den = BigInt::one();
        for x in &v {
            den = den.lcm(x.denom());
        }
        let iv: Vec<BigInt> = v
            .iter()
            .map(|x| x.numer() * (&den / x.denom()))
            .collect();
        // make primitive
        let mut content = BigInt::zero();
        for x in &iv {
            content = content.gcd(x);
        }
        let iv = if content.is_zero() || content.is_one() {
            iv
        } else {
            iv.into_iter().map(|x| x / &content).collect()
        };
        vecs.push(iv);
    }
    let basis = LatticeBasis::new(vecs).expect("kernel vectors independent");
    saturate(&basis).expect("saturation of kernel").basis
}

// ---------------------------------------------------------------------------
// LLL
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct LllResult {
    pub basis: LatticeBasis,
    /// Unimodular transform with `reduced = transform * input`.
    pub transform: Vec<Vec<BigInt>>,
}

/// Exact LLL reduction with delta = 99/100: strong reduction, coefficient
/// quality over speed at these sizes.
pub fn lll_reduce(basis: &LatticeBasis) -> Result<LllResult, LatticeError> {
    let n = basis.rank();
    if n <= 1 {
        return Ok(LllResult {
            basis: basis.clone(),
            transform: identity(n),
        });
    }
    // Work on the Gram matrix; apply the same row operations to U.
    let gram0 = gram_matrix(&basis.vectors);
    let mut u = identity(n);
    let delta = BigRational::new(BigInt::from(99), BigInt::from(100));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));

    // Current Gram of U * B
    let cur_gram = |u: &Vec<Vec<BigInt>>| -> Vec<Vec<BigRational>> {
        let n = u.len();
        let mut g = vec![vec![BigRational::zero(); n]; n];
        // g = U G0 U^T
        let mut ug = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigInt::zero();
                for k in 0..n {
                    s += &u[i][k] * &gram0[k][j];
                }
                ug[i][j] = s;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = BigInt::zero();
                for k in 0..n {
                    s += &ug[i][k] * &u[j][k];
                }
                g[i][j] = BigRational::from_integer(s);
            }
        }
        g
    };

    // Gram-Schmidt data from a Gram matrix: squared norms B_i and mu_{i,j}.
    let gso = |g: &Vec<Vec<BigRational>>| -> (Vec<BigRational>, Vec<Vec<BigRational>>) {
        let n = g.len();
        let mut b = vec![BigRational::zero(); n];
        let mut mu = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..i {
                let mut s = g[i][j].clone();
                for k in 0..j {
                    s -= &mu[i][k] * &mu[j][k] * &b[k];
                }
                mu[i][j] = &s / &b[j];
            }
            let mut s = g[i][i].clone();
            for k in 0..i {
                s -= &mu[i][k] * &mu[i][k] * &b[k];
            }
            b[i] = s;
        }
        (b, mu)
    };

    let round = |x: &BigRational| -> BigInt { (x + &half).floor().to_integer() };

    let mut k = 1usize;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        assert!(guard < 100_000, "LLL failed to terminate");
        let g = cur_gram(&u);
        let (b, mu) = gso(&g);
        // size-reduce b_k against b_{k-1}
        if mu[k][k - 1].abs() > half {
            let q = round(&mu[k][k - 1]);
            row_sub(&mut u, k, k - 1, &q);
            continue;
        }
        let lhs = b[k].clone();
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if lhs < rhs {
            u.swap(k, k - 1);
            if k > 1 {
                k -= 1;
            }
        } else {
            // size-reduce against the rest, then advance
            let mut changed = false;
            for l in (0..k.saturating_sub(1)).rev() {
                if mu[k][l].abs() > half {
                    let q = round(&mu[k][l]);
                    row_sub(&mut u, k, l, &q);
                    changed = true;
                    break;
                }
            }
            if !changed {
                k += 1;
            }
        }
    }

    let vectors: Vec<Vec<BigInt>> = u
        .iter()
        .map(|row| {
            let mut v = vec![BigInt::zero(); basis.dim];
            for (c, bv) in row.iter().zip(basis.vectors.iter()) {
                if c.is_zero() {
                    continue;
                }
                for (t, x) in v.iter_mut().zip(bv.iter()) {
                    *t += c * x;
                }
            }
            v
        })
        .collect();
    let out = LatticeBasis::new(vectors)?;
    debug_assert!(is_unimodular(&u));
    Ok(LllResult {
        basis: out,
        transform: u,
    })
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

fn row_sub(u: &mut [Vec<BigInt>], k: usize, l: usize, q: &BigInt) {
    let lrow = u[l].clone();
    for (a, b) in u[k].iter_mut().zip(lrow.iter()) {
        *a -= q * b;
    }
}

pub fn gram_matrix(vectors: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = vectors.len();
    let mut g = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = BigInt::zero();
            for (a, b) in vectors[i].iter().zip(vectors[j].iter()) {
                s += a * b;
            }
            g[i][j] = s.clone();
            g[j][i] = s;
        }
    }
    g
}

pub fn is_unimodular(u: &[Vec<BigInt>]) -> bool {
    let n = u.len();
    let m = IntegerMatrix::from_rows(u.to_vec()).expect("square");
    if m.cols() != n {
        return false;
    }
    bareiss_det(&m).abs().is_one()
}

/// Row-style Hermite normal form (lower-left zeros, pivot columns
/// left-to-right, pivots positive, entries above pivots reduced).
/// Returns (hnf rows with zero rows dropped, rank).
pub fn hnf_rows(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        // gcd down the column by Euclidean row ops
        loop {
            let mut piv: Option<usize> = None;
            for i in r..nrows {
                if !a[i][c].is_zero() {
                    piv = match piv {
                        None => Some(i),
                        Some(p) => {
                            if a[i][c].abs() < a[p][c].abs() {
                                Some(i)
                            } else {
                                Some(p)
                            }
                        }
                    };
                }
            }
            let Some(p) = piv else {
                break;
            };
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..nrows {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = div_round(&a[i][c], &a[r][c]);
                if !q.is_zero() {
                    for j in 0..ncols {
                        let t = &a[i][j] - &q * &a[r][j];
                        a[i][j] = t;
                    }
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for j in 0..ncols {
                a[r][j] = -a[r][j].clone();
            }
        }
        // reduce entries above the pivot
        for i in 0..r {
            if !a[i][c].is_zero() {
                let q = a[i][c].div_floor(&a[r][c]);
                if !q.is_zero() {
                    for j in 0..ncols {
                        let t = &a[i][j] - &q * &a[r][j];
                        a[i][j] = t;
                    }
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // nearest-integer division
    let (q, r) = a.div_rem(b);
    let two_r: BigInt = &r * 2;
    if two_r.abs() > b.abs() {
        if (r.sign() == b.sign()) || r.is_zero() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_mod_p_examples() {
        let id2 = IntegerMatrix::from_i64_rows(&[&[1, 0], &[0, 1]]);
        assert_eq!(rank_mod_p(&id2, &BigInt::from(5)), 2);
        assert_eq!(rank_mod_p(&id2, &BigInt::from(2)), 2);

        let ones = IntegerMatrix::from_i64_rows(&[&[1, 1], &[1, 1]]);
        assert_eq!(rank_mod_p(&ones, &BigInt::from(5)), 1);

        let m = IntegerMatrix::from_i64_rows(&[&[2, 0], &[0, 1]]);
        assert_eq!(rank_mod_p(&m, &BigInt::from(2)), 1);
    }

    #[test]
    fn integral_kernel_examples() {
        let m = IntegerMatrix::from_i64_rows(&[&[1, 0]]);
        let k = integral_kernel(&m);
        assert_eq!(k.rank(), 1);
        assert_eq!(k.vectors()[0], vec![BigInt::zero(), BigInt::one()]);

        let id2 = IntegerMatrix::from_i64_rows(&[&[1, 0], &[0, 1]]);
        assert_eq!(integral_kernel(&id2).rank(), 0);

        let m = IntegerMatrix::from_i64_rows(&[&[1, 1, 1]]);
        let k = integral_kernel(&m);
        assert_eq!(k.rank(), 2);
        // (1,-1,0) and (0,1,-1) must be integer combinations of the basis
        for v in [[1i64, -1, 0], [0, 1, -1]] {
            let v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
            assert!(k.express(&v).is_some());
        }
    }

    #[test]
    fn candidate_primes_examples() {
        let b = LatticeBasis::from_i64(&[&[2, 0], &[0, 1]]);
        assert_eq!(candidate_primes(&b), vec![BigInt::from(2)]);

        let b = LatticeBasis::from_i64(&[&[1, 0], &[0, 1]]);
        assert!(candidate_primes(&b).is_empty());

        let b = LatticeBasis::from_i64(&[&[1, 1, 0], &[1, -1, 0]]);
        assert_eq!(candidate_primes(&b), vec![BigInt::from(2)]);
    }

    #[test]
    fn dependency_examples() {
        let b = LatticeBasis::from_i64(&[&[1, 1, 0], &[1, -1, 0]]);
        let dep = is_dependent_mod_p(&b, &BigInt::from(2)).unwrap();
        assert_eq!(dep, vec![BigInt::one(), BigInt::one()]);

        let b = LatticeBasis::from_i64(&[&[1, 0], &[0, 1]]);
        assert!(is_dependent_mod_p(&b, &BigInt::from(2)).is_none());
        assert!(is_dependent_mod_p(&b, &BigInt::from(97)).is_none());

        let b = LatticeBasis::from_i64(&[&[2, 0], &[0, 1]]);
        let dep = is_dependent_mod_p(&b, &BigInt::from(2)).unwrap();
        assert_eq!(dep, vec![BigInt::one(), BigInt::zero()]);
    }

    #[test]
    fn saturate_examples() {
        let b = LatticeBasis::from_i64(&[&[2, 0], &[0, 1]]);
        let s = saturate(&b).unwrap();
        assert_eq!(s.index, BigInt::from(2));
        let e1: Vec<BigInt> = vec![BigInt::one(), BigInt::zero()];
        assert!(s.basis.express(&e1).is_some());

        let b = LatticeBasis::from_i64(&[&[1, 1, 0], &[1, -1, 0]]);
        let s = saturate(&b).unwrap();
        assert_eq!(s.index, BigInt::from(2));
        for v in [[1i64, 0, 0], [0, 1, 0]] {
            let v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
            assert!(s.basis.express(&v).is_some(), "{v:?} missing");
        }
        // idempotent
        let s2 = saturate(&s.basis).unwrap();
        assert!(s2.index.is_one());
    }

    #[test]
    fn lll_examples() {
        let b = LatticeBasis::from_i64(&[&[1, 0], &[4, 1]]);
        let r = lll_reduce(&b).unwrap();
        assert!(is_unimodular(&r.transform));
        let norms: Vec<BigInt> = r
            .basis
            .vectors()
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum())
            .collect();
        assert!(norms.iter().all(|n| *n <= BigInt::from(2)));
        // same lattice both ways
        for v in b.vectors() {
            assert!(r.basis.express(v).is_some());
        }
        for v in r.basis.vectors() {
            assert!(b.express(v).is_some());
        }

        let id = LatticeBasis::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let r = lll_reduce(&id).unwrap();
        for v in r.basis.vectors() {
            let nz: Vec<_> = v.iter().filter(|x| !x.is_zero()).collect();
            assert_eq!(nz.len(), 1);
            assert!(nz[0].abs().is_one());
        }
    }

    #[test]
    fn hnf_simple() {
        let rows: Vec<Vec<BigInt>> = vec![
            vec![BigInt::from(2), BigInt::from(4)],
            vec![BigInt::from(1), BigInt::from(3)],
        ];
        let h = hnf_rows(&rows);
        assert_eq!(h.len(), 2);
        assert_eq!(h[0], vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(h[1], vec![BigInt::from(0), BigInt::from(2)]);
    }
}
