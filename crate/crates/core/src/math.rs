//! Floating-point helpers that work without `std`.

pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn round(x: f64) -> f64 {
    libm::round(x)
}

pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `-p log2 p` with the `0 log 0 = 0` convention.
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * log2(p)
    } else {
        0.0
    }
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// `x` rounded to the nearest integer when it is within a relative `1e-12` of it.
///
/// Cumulative sums of masses land a few ulps below integers (`0.1 + 0.2 + 0.7`);
/// floor and ceil must see the intended value.
pub fn snap(x: f64) -> f64 {
    let r = round(x);
    let scale = if abs(x) > 1.0 { abs(x) } else { 1.0 };
    if abs(x - r) <= 1e-12 * scale {
        r
    } else {
        x
    }
}

pub fn snapped_floor(x: f64) -> f64 {
    floor(snap(x))
}

pub fn snapped_ceil(x: f64) -> f64 {
    ceil(snap(x))
}

/// Neumaier compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if abs(sum) >= abs(v) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `ln(k!)` for small `k`, exact summation.
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| ln(i as f64)).sum()
}

/// `max(1, round(2^(n * rate)))`, the size of an index set `[1, 2^{nR}]`.
pub fn index_set_size(n: usize, rate: f64) -> usize {
    let v = round(exp2(n as f64 * rate));
    if v < 1.0 {
        1
    } else {
        v as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_only_moves_near_integers() {
        assert_eq!(snap(2.9999999999999996), 3.0);
        assert_eq!(snap(2.5), 2.5);
        assert_eq!(snapped_floor(0.1 * 3.0 * 10.0), 3.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(v), 1.0);
    }

    #[test]
    fn index_sizes_round_and_clamp() {
        assert_eq!(index_set_size(10, 0.0187), 1);
        assert_eq!(index_set_size(4, 0.5), 4);
        assert_eq!(index_set_size(3, -1.0), 1);
    }
}
