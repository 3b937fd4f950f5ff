//! Prime sieving and the arithmetic functions Λ(n), ψ(x), π(x).

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Real;
use crate::sum::CompensatedSum;

/// Default number of odd candidates handled by one sieve segment.
pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArithError {
    #[error("{what} = {value} is outside the admissible domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("argument {requested} exceeds the sieved range [2, {limit}]; re-sieve with a larger limit")]
    InsufficientTable { requested: f64, limit: u64 },
}

/// Primality predicate on `[2, limit]`.
///
/// Only odd candidates are stored, one bit each: bit `i` stands for `2i + 1`.
/// The even prime is answered by a special case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    bits: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Number of odd candidates `1, 3, 5, ... <= limit`.
    fn odd_count(&self) -> u64 {
        self.limit.div_ceil(2)
    }

    /// # Panics
    /// If `n` exceeds the sieved limit.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n <= self.limit, "{n} is beyond the sieve limit {}", self.limit);
        if n == 2 {
            return true;
        }
        if n < 2 || n.is_multiple_of(2) {
            return false;
        }
        let i = (n - 1) / 2;
        (self.bits[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    /// Primes in ascending order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = (self.limit >= 2).then_some(2);
        let odd_count = self.odd_count();
        let odd = self.bits.iter().enumerate().flat_map(move |(w, &word)| {
            let base = w as u64 * 64;
            BitIter(word)
                .map(move |b| base + b)
                .take_while(move |&i| i < odd_count)
                .map(|i| 2 * i + 1)
        });
        two.into_iter().chain(odd)
    }

    /// Number of primes `<= n`, for `n <= limit`.
    pub fn count_up_to(&self, n: u64) -> u64 {
        assert!(n <= self.limit);
        if n < 2 {
            return 0;
        }
        // odd candidates 1..=n have indices 0..=last
        let last = (n - 1) / 2;
        let full_words = ((last + 1) / 64) as usize;
        let mut count: u64 = self.bits[..full_words].iter().map(|w| w.count_ones() as u64).sum();
        let rem = (last + 1) % 64;
        if rem > 0 {
            let mask = (1u64 << rem) - 1;
            count += (self.bits[full_words] & mask).count_ones() as u64;
        }
        count + 1
    }

    /// Total number of primes in the table.
    pub fn prime_count(&self) -> u64 {
        self.count_up_to(self.limit)
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as u64;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Sieves `[2, limit]` with the default segment size.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable, ArithError> {
    sieve_primes_segmented(limit, DEFAULT_SEGMENT_SIZE)
}

/// Segmented sieve of Eratosthenes over odd candidates.
///
/// Segments are sieved in parallel and concatenated in index order, so the
/// result is identical for every `segment_size`.
pub fn sieve_primes_segmented(limit: u64, segment_size: usize) -> Result<PrimeTable, ArithError> {
    if limit < 2 {
        return Err(ArithError::Domain {
            what: "limit",
            value: limit as f64,
            expected: "limit >= 2",
        });
    }
    if segment_size == 0 {
        return Err(ArithError::Domain {
            what: "segment_size",
            value: 0.0,
            expected: "segment_size >= 1",
        });
    }
    let odd_count = limit.div_ceil(2);
    // segments are whole words so they can be concatenated directly
    let seg = (segment_size as u64).div_ceil(64) * 64;
    let base = small_odd_primes(isqrt(limit));
    let n_segments = odd_count.div_ceil(seg);

    let segments: Vec<Vec<u64>> = (0..n_segments)
        .into_par_iter()
        .map(|k| {
            let lo = k * seg;
            let hi = (lo + seg).min(odd_count);
            sieve_segment(lo, hi, &base)
        })
        .collect();

    let mut bits = Vec::with_capacity(odd_count.div_ceil(64) as usize);
    for s in segments {
        bits.extend_from_slice(&s);
    }
    // index 0 is the number 1
    bits[0] &= !1;
    let tail = odd_count % 64;
    if tail != 0 {
        let last = bits.len() - 1;
        bits[last] &= (1u64 << tail) - 1;
    }
    Ok(PrimeTable { limit, bits })
}

/// Crosses off odd multiples of the base primes in odd-index range `[lo, hi)`.
fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let mut words = vec![u64::MAX; (hi - lo).div_ceil(64) as usize];
    for &p in base {
        // 2i+1 = p^2
        let first = (p * p - 1) / 2;
        if first >= hi {
            break;
        }
        // odd multiples of p sit at indices i ≡ (p-1)/2 (mod p)
        let start = if first >= lo {
            first
        } else {
            let r = (p - 1) / 2;
            lo + (r + p - lo % p) % p
        };
        let mut i = start;
        while i < hi {
            let j = i - lo;
            words[(j / 64) as usize] &= !(1u64 << (j % 64));
            i += p;
        }
    }
    words
}

fn small_odd_primes(bound: u64) -> Vec<u64> {
    let bound = bound as usize;
    let mut composite = vec![false; bound + 1];
    let mut out = Vec::new();
    for n in 2..=bound {
        if composite[n] {
            continue;
        }
        if n > 2 {
            out.push(n as u64);
        }
        let mut m = n * n;
        while m <= bound {
            composite[m] = true;
            m += n;
        }
    }
    out
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Von Mangoldt function: `log p` if `n = p^k`, otherwise zero.
pub fn mangoldt<R: Real>(n: u64, table: &PrimeTable) -> Result<R, ArithError> {
    if n == 0 || n > table.limit() {
        return Err(ArithError::Domain {
            what: "n",
            value: n as f64,
            expected: "1 <= n <= table limit",
        });
    }
    Ok(prime_power_base(n, table).map_or(R::zero(), |p| R::from_count(p).ln()))
}

/// Returns `p` if `n = p^k` for a prime `p` and `k >= 1`.
fn prime_power_base(n: u64, table: &PrimeTable) -> Option<u64> {
    if n < 2 {
        return None;
    }
    if table.is_prime(n) {
        return Some(n);
    }
    for p in table.primes() {
        if p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut m = n;
            while m.is_multiple_of(p) {
                m /= p;
            }
            return (m == 1).then_some(p);
        }
    }
    None
}

/// One jump of ψ: at the prime power `location = p^k` ψ rises by `weight = log p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiJump<R> {
    pub location: u64,
    pub weight: R,
}

/// All jumps of ψ on `[1, cutoff]`, sorted by location, with running sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiJumpList<R> {
    cutoff: R,
    jumps: Vec<PsiJump<R>>,
    cumulative: Vec<R>,
}

impl<R: Real> PsiJumpList<R> {
    pub fn cutoff(&self) -> R {
        self.cutoff
    }

    pub fn jumps(&self) -> &[PsiJump<R>] {
        &self.jumps
    }

    /// ψ at each jump location, in the same order as [`Self::jumps`].
    pub fn cumulative(&self) -> &[R] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Number of jumps at locations `<= x`.
    pub fn count_through(&self, x: R) -> usize {
        if x < R::one() {
            return 0;
        }
        let xi = x.floor().to_u64().unwrap_or(u64::MAX);
        self.jumps.partition_point(|j| j.location <= xi)
    }

    /// ψ(x) for `x <= cutoff`.
    pub fn psi(&self, x: R) -> Result<R, ArithError> {
        if x > self.cutoff {
            return Err(ArithError::InsufficientTable {
                requested: x.as_f64(),
                limit: self.cutoff.floor().to_u64().unwrap_or(0),
            });
        }
        let k = self.count_through(x);
        Ok(if k == 0 { R::zero() } else { self.cumulative[k - 1] })
    }

    /// ψ at the cutoff.
    pub fn total(&self) -> R {
        self.cumulative.last().copied().unwrap_or_else(R::zero)
    }
}

/// Enumerates every prime power `p^k <= x_max` with weight `log p`.
pub fn psi_jumps<R: Real>(x_max: R, table: &PrimeTable) -> Result<PsiJumpList<R>, ArithError> {
    if !(x_max >= R::one()) {
        return Err(ArithError::Domain {
            what: "X",
            value: x_max.as_f64(),
            expected: "X >= 1",
        });
    }
    let xi = checked_floor(x_max, table)?;
    let mut jumps = Vec::new();
    for p in table.primes().take_while(|&p| p <= xi) {
        // one log per prime; every power reuses it
        let weight = R::from_count(p).ln();
        let mut q = p;
        loop {
            jumps.push(PsiJump { location: q, weight });
            match q.checked_mul(p) {
                Some(next) if next <= xi => q = next,
                _ => break,
            }
        }
    }
    jumps.sort_unstable_by_key(|j| j.location);
    assert!(
        jumps.windows(2).all(|w| w[0].location < w[1].location),
        "distinct (p, k) produced the same prime power"
    );
    let mut acc = CompensatedSum::new();
    let cumulative = jumps
        .iter()
        .map(|j| {
            acc.add(j.weight);
            acc.value()
        })
        .collect();
    Ok(PsiJumpList {
        cutoff: x_max,
        jumps,
        cumulative,
    })
}

/// π(x): number of primes `<= x`.
pub fn pi_count<R: Real>(x: R, table: &PrimeTable) -> Result<u64, ArithError> {
    if x < R::lit(2.0) {
        return Ok(0);
    }
    let xi = checked_floor(x, table)?;
    Ok(table.count_up_to(xi))
}

fn checked_floor<R: Real>(x: R, table: &PrimeTable) -> Result<u64, ArithError> {
    let fl = x.floor();
    match fl.to_u64() {
        Some(xi) if x <= R::from_count(table.limit()) => Ok(xi),
        _ => Err(ArithError::InsufficientTable {
            requested: x.as_f64(),
            limit: table.limit(),
        }),
    }
}
