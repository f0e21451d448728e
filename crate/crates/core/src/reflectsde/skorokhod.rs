use crate::real::Real;

/// One projected step: the new point and the pushes it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step<T> {
    pub x: T,
    /// Push up from the lower barrier, `≥ 0`.
    pub dk_lower: T,
    /// Push down from the upper barrier, `≥ 0`.
    pub dk_upper: T,
}

/// Projects `y` onto `[lo, hi]`. Requires `lo ≤ hi`; either may be infinite.
#[inline]
pub fn project<T: Real>(y: T, lo: T, hi: T) -> Step<T> {
    let zero = T::zero();
    if y < lo {
        Step { x: lo, dk_lower: lo - y, dk_upper: zero }
    } else if y > hi {
        Step { x: hi, dk_lower: zero, dk_upper: y - hi }
    } else {
        Step { x: y, dk_lower: zero, dk_upper: zero }
    }
}

/// Discrete two-sided Skorokhod problem on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SkorokhodSolution<T> {
    pub x: Vec<T>,
    /// Cumulative push from the lower barrier.
    pub k_lower: Vec<T>,
    /// Cumulative push from the upper barrier.
    pub k_upper: Vec<T>,
    /// Number of grid points solved; shorter than the input when the barriers crossed.
    pub horizon: usize,
    pub crossed: bool,
}

impl<T: Real> SkorokhodSolution<T> {
    /// Signed regulator `k = k_lower − k_upper`, so that `x = z + k`.
    pub fn k(&self) -> Vec<T> {
        self.k_lower.iter().zip(&self.k_upper).map(|(&a, &b)| a - b).collect()
    }
}

/// Solves `x = z + k_lower − k_upper ∈ [lower, upper]` by stepwise projection.
///
/// This is the Skorokhod map of the piecewise-constant interpolation
/// of `z`, so for a constant lower barrier it reproduces
/// `x(t) = z(t) + max_{s≤t}(lower − z(s))⁺` on the grid. Missing barriers are
/// `∓∞`. The first index with `lower ≥ upper` ends the horizon.
pub fn skorokhod_map<T: Real>(z: &[T], lower: Option<&[T]>, upper: Option<&[T]>) -> SkorokhodSolution<T> {
    let lo_at = |i: usize| lower.map_or(T::neg_infinity(), |v| v[i]);
    let hi_at = |i: usize| upper.map_or(T::infinity(), |v| v[i]);
    let n = [Some(z.len()), lower.map(<[T]>::len), upper.map(<[T]>::len)].into_iter().flatten().min().unwrap_or(0);
    let mut sol = SkorokhodSolution {
        x: Vec::with_capacity(n),
        k_lower: Vec::with_capacity(n),
        k_upper: Vec::with_capacity(n),
        horizon: 0,
        crossed: false,
    };
    let (mut kl, mut ku) = (T::zero(), T::zero());
    for i in 0..n {
        let (lo, hi) = (lo_at(i), hi_at(i));
        if lo >= hi {
            sol.crossed = true;
            break;
        }
        // `z_i + k_{i−1}` equals `x_{i−1} + Δz_i` and is exact while k = 0.
        let s = project(z[i] + (kl - ku), lo, hi);
        kl = kl + s.dk_lower;
        ku = ku + s.dk_upper;
        sol.x.push(s.x);
        sol.k_lower.push(kl);
        sol.k_upper.push(ku);
        sol.horizon = i + 1;
    }
    sol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_example() {
        let z = [0.0, -1.0, -0.5];
        let lo = [0.0; 3];
        let s = skorokhod_map(&z, Some(&lo), None);
        assert_eq!(s.x, vec![0.0, 0.0, 0.5]);
        assert_eq!(s.k(), vec![0.0, 1.0, 1.0]);
        assert!(!s.crossed);
    }

    #[test]
    fn generic_over_f32() {
        let z = [0.0f32, -1.0, -0.5];
        let s = skorokhod_map(&z, Some(&[0.0f32; 3]), None);
        assert_eq!(s.x, vec![0.0f32, 0.0, 0.5]);
    }

    #[test]
    fn crossing_truncates() {
        let z = [0.0, 0.0, 0.0];
        let s = skorokhod_map(&z, Some(&[-1.0, 0.5, 0.0]), Some(&[1.0, 0.5, 1.0]));
        assert!(s.crossed);
        assert_eq!(s.horizon, 1);
    }
}
