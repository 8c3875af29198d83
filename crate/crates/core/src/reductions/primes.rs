//! Prime numbers indexed from one: `p(1) = 2`.

use crate::error::{Error, Result};

/// Largest index accepted by [`nth_prime`]; keeps the sieve within a few hundred megabytes.
pub const MAX_PRIME_INDEX: u64 = 50_000_000;

pub fn nth_prime(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::input("prime indices start at 1"));
    }
    if n > MAX_PRIME_INDEX {
        return Err(Error::resource("prime index", MAX_PRIME_INDEX));
    }
    Ok(primal::StreamingSieve::nth_prime(n as usize) as u64)
}

pub fn is_prime(p: u64) -> bool {
    primal::is_prime(p)
}

/// `p(1), ..., p(n)`.
pub fn first_primes(n: usize) -> Vec<u64> {
    primal::Primes::all().take(n).map(|p| p as u64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(p: u64) -> bool {
        p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
    }

    #[test]
    fn small_indices() {
        assert_eq!(nth_prime(1).unwrap(), 2);
        assert_eq!(nth_prime(2).unwrap(), 3);
        assert_eq!(nth_prime(96).unwrap(), 503);
        assert!(nth_prime(0).is_err());
    }

    #[test]
    fn agrees_with_trial_division() {
        let by_trial: Vec<u64> = (0..2000).filter(|&p| trial(p)).collect();
        assert_eq!(first_primes(by_trial.len()), by_trial);
        for p in 0..2000 {
            assert_eq!(is_prime(p), trial(p), "{p}");
        }
    }

    #[test]
    fn reserved_primes_fit_the_width() {
        // p(2^{2s} z) ≤ 2^{11s} with z = 2s + 2
        for s in 1..=3u32 {
            let n = (1u64 << (2 * s)) * (2 * s as u64 + 2);
            assert!(nth_prime(n).unwrap() <= 1u64 << (11 * s));
        }
    }
}
