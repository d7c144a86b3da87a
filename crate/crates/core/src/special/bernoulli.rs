//! Even-index Bernoulli numbers, exact, via tangent numbers.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

static CACHE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();

/// Tangent numbers T_1..T_n (1, 2, 16, 272, ...), Brent-Harvey in-place scheme.
fn tangent_numbers(n: usize) -> Vec<BigInt> {
    let mut t = vec![BigInt::zero(); n + 1];
    if n == 0 {
        return Vec::new();
    }
    t[1] = BigInt::one();
    for k in 2..=n {
        t[k] = &t[k - 1] * BigInt::from(k - 1);
    }
    for k in 2..=n {
        for j in k..=n {
            t[j] = &t[j - 1] * BigInt::from(j - k) + &t[j] * BigInt::from(j - k + 2);
        }
    }
    t.remove(0);
    t
}

fn compute(n: usize) -> Vec<BigRational> {
    tangent_numbers(n)
        .into_iter()
        .enumerate()
        .map(|(i, tk)| {
            let k = i + 1;
            let four_k = BigInt::one() << (2 * k);
            let den = &four_k * (&four_k - BigInt::one());
            let num = tk * BigInt::from(2 * k);
            let b = BigRational::new(num, den);
            if k % 2 == 1 {
                b
            } else {
                -b
            }
        })
        .collect()
}

/// `B_{2k}` for `k >= 1`.
pub fn bernoulli_even(k: usize) -> BigRational {
    assert!(k >= 1, "B_0 is not served from the even table");
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().expect("bernoulli cache poisoned");
    if guard.len() < k {
        let want = k.max(2 * guard.len()).max(32);
        *guard = compute(want);
    }
    guard[k - 1].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn first_values() {
        assert_eq!(bernoulli_even(1), q(1, 6));
        assert_eq!(bernoulli_even(2), q(-1, 30));
        assert_eq!(bernoulli_even(3), q(1, 42));
        assert_eq!(bernoulli_even(4), q(-1, 30));
        assert_eq!(bernoulli_even(5), q(5, 66));
        assert_eq!(bernoulli_even(6), q(-691, 2730));
        assert_eq!(bernoulli_even(7), q(7, 6));
    }

    #[test]
    fn tangent_sequence() {
        let t = tangent_numbers(5);
        let expect: Vec<BigInt> = [1, 2, 16, 272, 7936].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(t, expect);
    }

    #[test]
    fn grows_on_demand() {
        // B_60 denominator is 56786730.
        assert_eq!(bernoulli_even(30).denom(), &BigInt::from(56_786_730));
    }
}
