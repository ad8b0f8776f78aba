//! Arithmetic modulo word-sized primes, and the multimodular characteristic
//! polynomial of an integer matrix.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::UnivariatePolynomial;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    // Deterministic Miller-Rabin for 64-bit inputs.
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero residue modulo a prime.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// Residue of an integer modulo `p`.
pub fn bigint_mod(x: &BigInt, p: u64) -> u64 {
    let r = x % BigInt::from(p);
    let r = if r.is_negative() {
        r + BigInt::from(p)
    } else {
        r
    };
    r.to_u64().expect("residue fits in u64")
}

/// Characteristic polynomial `det(x I - A)` of a square matrix over `F_p`,
/// ascending coefficients, via reduction to upper Hessenberg form.
pub fn charpoly_mod_p(a: &[Vec<u64>], p: u64) -> Vec<u64> {
    let n = a.len();
    let mut h: Vec<Vec<u64>> = a
        .iter()
        .map(|r| r.iter().map(|x| x % p).collect())
        .collect();
    for j in 0..n.saturating_sub(2) {
        let Some(i) = (j + 1..n).find(|&i| h[i][j] != 0) else {
            continue;
        };
        if i != j + 1 {
            h.swap(i, j + 1);
            for row in h.iter_mut() {
                row.swap(i, j + 1);
            }
        }
        let inv = inv_mod(h[j + 1][j], p);
        for k in j + 2..n {
            if h[k][j] == 0 {
                continue;
            }
            let u = mul_mod(h[k][j], inv, p);
            // row_k -= u * row_{j+1}
            for c in 0..n {
                let t = mul_mod(u, h[j + 1][c], p);
                h[k][c] = (h[k][c] + p - t) % p;
            }
            // col_{j+1} += u * col_k
            for row in h.iter_mut() {
                let t = mul_mod(u, row[k], p);
                row[j + 1] = (row[j + 1] + t) % p;
            }
        }
    }
    // p_0 = 1; p_{k+1} = (x - h_kk) p_k - sum_{i<k} h_ik (prod_{l=i+1..k} h_{l,l-1}) p_i
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for k in 0..n {
        let prev = &polys[k];
        let mut next = vec![0u64; k + 2];
        for (d, &c) in prev.iter().enumerate() {
            next[d + 1] = (next[d + 1] + c) % p;
            next[d] = (next[d] + p - mul_mod(h[k][k], c, p)) % p;
        }
        let mut prod = 1u64;
        for i in (0..k).rev() {
            prod = mul_mod(prod, h[i + 1][i], p);
            let coef = mul_mod(h[i][k], prod, p);
            if coef == 0 {
                continue;
            }
            for (d, &c) in polys[i].iter().enumerate() {
                next[d] = (next[d] + p - mul_mod(coef, c, p)) % p;
            }
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

/// Exact characteristic polynomial of an integer matrix by Chinese
/// remaindering over enough 31-bit primes to exceed the coefficient bound
/// `(1 + R)^n`, where `R` is the largest absolute row sum.
pub fn integer_charpoly(a: &[Vec<i64>]) -> UnivariatePolynomial {
    let n = a.len();
    let row_sum = a
        .iter()
        .map(|r| r.iter().map(|x| x.unsigned_abs()).sum::<u64>())
        .max()
        .unwrap_or(0);
    let bound = num_traits::pow(BigInt::from(row_sum + 1), n);
    let target = bound * 2u32 + 1u32;

    let mut modulus = BigInt::one();
    let mut acc: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    let mut p: u64 = (1 << 31) - 1;
    while modulus < target {
        while !is_prime(p) {
            p -= 2;
        }
        let reduced: Vec<Vec<u64>> = a
            .iter()
            .map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect())
            .collect();
        let cp = charpoly_mod_p(&reduced, p);
        // CRT: acc ≡ acc mod modulus, acc ≡ cp mod p
        let m_mod_p = bigint_mod(&modulus, p);
        let m_inv = inv_mod(m_mod_p, p);
        for (k, c) in cp.iter().enumerate() {
            let cur = bigint_mod(&acc[k], p);
            let diff = (c + p - cur) % p;
            let t = mul_mod(diff, m_inv, p);
            acc[k] += &modulus * BigInt::from(t);
        }
        modulus *= BigInt::from(p);
        p -= 2;
    }
    let half = &modulus / 2u32;
    let coeffs: Vec<BigInt> = acc
        .into_iter()
        .map(|c| if c > half { c - &modulus } else { c })
        .collect();
    UnivariatePolynomial::from_integers(&coeffs)
}
