use serde::Serialize;

use super::{BaseError, Frac128};

pub const MAX_CF_DEPTH: usize = 40;

/// Denominators beyond this are past what a 128-bit proxy determines.
const Q_LIMIT: u128 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuedFraction {
    /// `(a_k, q_k)` for `k = 0, 1, ...`; `a_0 = 0` and `q_0 = 1`.
    pub entries: Vec<(u64, u64)>,
    /// Set when fewer than `depth` terms are trustworthy.
    pub truncated: bool,
}

impl ContinuedFraction {
    pub fn denominators(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn partial_quotients(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().skip(1).map(|e| e.0)
    }
}

/// Expansion `α = [0; a_1, a_2, ...]` of the exact rational `α.0 / 2^128`
/// with convergent denominators `q_k = a_k q_{k-1} + q_{k-2}`, up to `depth`
/// terms after `a_0`.
pub fn continued_fraction(alpha: Frac128, depth: usize) -> Result<ContinuedFraction, BaseError> {
    if !(1..=MAX_CF_DEPTH).contains(&depth) {
        return Err(BaseError::InvalidParameter(format!(
            "continued fraction depth {depth} outside 1..={MAX_CF_DEPTH}"
        )));
    }
    if alpha.0 == 0 {
        return Err(BaseError::RationalAlpha(alpha.to_hex()));
    }
    let mut entries = vec![(0u64, 1u64)];
    // First division step: 2^128 = a_1 · p + r.
    let p = alpha.0;
    let mut quotient = u128::MAX / p;
    let mut rem = u128::MAX % p + 1;
    if rem == p {
        quotient += 1;
        rem = 0;
    }
    let (mut num, mut den) = (p, rem);
    let (mut q_prev, mut q) = (0u128, 1u128);
    let mut a = quotient;
    let mut truncated = false;
    loop {
        let next = a.checked_mul(q).and_then(|v| v.checked_add(q_prev));
        match next {
            Some(v) if v <= Q_LIMIT => {
                q_prev = q;
                q = v;
                entries.push((a as u64, q as u64));
            }
            _ => {
                truncated = true;
                break;
            }
        }
        if entries.len() > depth {
            break;
        }
        if den == 0 {
            truncated = true;
            break;
        }
        a = num / den;
        let r = num % den;
        num = den;
        den = r;
    }
    Ok(ContinuedFraction { entries, truncated })
}

#[cfg(test)]
mod tests {
    use super::super::NamedAlpha;
    use super::*;

    /// Record setters of `‖nα‖` for `1 <= n <= limit`: the best
    /// approximation denominators.
    fn best_approximations(alpha: Frac128, limit: u64) -> Vec<u64> {
        let mut best = Frac128::HALF;
        let mut out = Vec::new();
        let mut x = Frac128::ZERO;
        for n in 1..=limit {
            x = x.wrapping_add(alpha);
            let d = x.circle_norm();
            if d < best {
                best = d;
                out.push(n);
            }
        }
        out
    }

    fn distinct_q_up_to(cf: &ContinuedFraction, limit: u64) -> Vec<u64> {
        let mut qs: Vec<u64> = cf.denominators().filter(|&q| q <= limit).collect();
        qs.dedup();
        qs
    }

    #[test]
    fn golden_denominators_are_fibonacci() {
        let alpha = NamedAlpha::Golden.value();
        let cf = continued_fraction(alpha, 30).unwrap();
        assert!(!cf.truncated);
        assert!(cf.partial_quotients().all(|a| a == 1));
        let qs = distinct_q_up_to(&cf, 10_000);
        assert_eq!(&qs[..6], &[1, 2, 3, 5, 8, 13]);
        assert_eq!(qs, best_approximations(alpha, 10_000));
    }

    #[test]
    fn sqrt2_partial_quotients_are_two() {
        let alpha = NamedAlpha::Sqrt2Minus1.value();
        let cf = continued_fraction(alpha, 30).unwrap();
        assert!(cf.partial_quotients().all(|a| a == 2));
        let qs = distinct_q_up_to(&cf, 10_000);
        assert_eq!(&qs[..5], &[1, 2, 5, 12, 29]);
        assert_eq!(qs, best_approximations(alpha, 10_000));
    }

    #[test]
    fn convergent_quality() {
        for n in NamedAlpha::ALL {
            let alpha = n.value();
            let cf = continued_fraction(alpha, MAX_CF_DEPTH).unwrap();
            for w in cf.entries.windows(2) {
                let (q, q_next) = (w[0].1, w[1].1);
                let err = alpha.wrapping_mul_int(q as i128).circle_norm().0;
                // ‖q α‖ · q_next < 1, i.e. the product stays below 2^128
                assert!(err.checked_mul(q_next as u128).is_some(), "{n:?} q={q}");
            }
        }
    }

    #[test]
    fn tiny_alpha_truncates() {
        let cf = continued_fraction(Frac128((1 << 70) | 1), 10).unwrap();
        assert!(cf.truncated);
        assert!(cf.entries.len() < 11);
    }

    #[test]
    fn depth_bounds() {
        let alpha = NamedAlpha::Golden.value();
        assert!(continued_fraction(alpha, 0).is_err());
        assert!(continued_fraction(alpha, 41).is_err());
        assert_eq!(continued_fraction(alpha, 5).unwrap().entries.len(), 6);
    }
}
