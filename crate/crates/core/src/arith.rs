//! Scalar arithmetic modulo small integers.

/// Trial-division primality test; inputs are desk-scale.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    (a + b) % m
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    (a + m - b % m) % m
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn neg_mod(a: u64, m: u64) -> u64 {
    (m - a % m) % m
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// Canonical representative of a signed integer in `[0, m)`.
#[inline]
pub fn reduce_signed(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Base-`p` digits of `a`, least significant first.
pub fn base_digits(mut a: u64, p: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while a > 0 {
        out.push(a % p);
        a /= p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn inverses() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
        assert_eq!(inv_mod(3, 8), Some(3));
        for a in 1..9u64 {
            if a % 3 != 0 {
                assert_eq!(mul_mod(a, inv_mod(a, 9).unwrap(), 9), 1);
            }
        }
    }

    #[test]
    fn signed_and_digits() {
        assert_eq!(reduce_signed(-2, 4), 2);
        assert_eq!(reduce_signed(-9, 4), 3);
        assert_eq!(base_digits(11, 3), vec![2, 0, 1]);
        assert!(base_digits(0, 2).is_empty());
    }
}
