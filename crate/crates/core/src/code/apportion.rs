//! Largest-remainder (Hamilton) apportionment of an integer total.

/// Splits `total` into integer shares proportional to `quotas`.
///
/// Each share is the floor of its quota plus at most one, handed to the
/// largest fractional remainders first (ties to the lower index). Shares sum
/// to `total` exactly, also when the quotas themselves carry rounding error.
pub fn largest_remainder(quotas: &[f64], total: u128) -> Vec<u128> {
    if quotas.is_empty() {
        return Vec::new();
    }
    let mut shares: Vec<u128> = quotas.iter().map(|&q| q.max(0.0).floor() as u128).collect();
    let remainders: Vec<f64> = quotas
        .iter()
        .zip(&shares)
        .map(|(&q, &s)| q.max(0.0) - s as f64)
        .collect();

    let assigned: u128 = shares.iter().sum();
    if assigned <= total {
        let mut deficit = total - assigned;
        let count = shares.len() as u128;
        // Only rounding on huge totals leaves more than one unit per member.
        if deficit >= count {
            let each = deficit / count;
            shares.iter_mut().for_each(|s| *s += each);
            deficit -= each * count;
        }
        let mut order: Vec<usize> = (0..shares.len()).collect();
        order.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]));
        for &i in order.iter().take(deficit as usize) {
            shares[i] += 1;
        }
    } else {
        let mut excess = assigned - total;
        let mut order: Vec<usize> = (0..shares.len()).collect();
        order.sort_by(|&a, &b| remainders[a].total_cmp(&remainders[b]));
        while excess > 0 {
            let mut moved = false;
            for &i in &order {
                if excess == 0 {
                    break;
                }
                if shares[i] > 0 {
                    let take = (excess / shares.len() as u128).clamp(1, shares[i]);
                    shares[i] -= take;
                    excess -= take;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }
    shares
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_examples() {
        assert_eq!(largest_remainder(&[4.8, 3.2], 8), vec![5, 3]);
        assert_eq!(
            largest_remainder(&[2.0, 2.0, 2.0, 2.0], 8),
            vec![2, 2, 2, 2]
        );
        assert_eq!(largest_remainder(&[1.5, 1.5], 3), vec![2, 1]);
        assert_eq!(largest_remainder(&[], 0), Vec::<u128>::new());
    }

    #[test]
    fn rounding_noise_is_absorbed() {
        assert_eq!(
            largest_remainder(&[4.0000000001, 4.0000000001], 8),
            vec![4, 4]
        );
        assert_eq!(
            largest_remainder(&[3.9999999999, 3.9999999999], 8),
            vec![4, 4]
        );
        let big = 2f64.powi(100);
        let shares = largest_remainder(&[big * 0.3, big * 0.7], 1u128 << 100);
        assert_eq!(shares.iter().sum::<u128>(), 1u128 << 100);
    }

    proptest! {
        #[test]
        fn conserves_total_and_stays_within_one(
            weights in prop::collection::vec(0.001f64..1.0, 1..20),
            exponent in 0u32..40,
        ) {
            let total = 1u128 << exponent;
            let sum: f64 = weights.iter().sum();
            let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
            let shares = largest_remainder(&quotas, total);
            prop_assert_eq!(shares.iter().sum::<u128>(), total);
            for (s, q) in shares.iter().zip(&quotas) {
                prop_assert!((*s as f64 - q).abs() < 1.0 + 1e-9);
            }
        }
    }
}
