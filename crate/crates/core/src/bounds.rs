//! The analytic side: the region measure `|Lambda_alpha|`, the function
//! `h` and its minimization, lattice counting, the finite-n upper-bound
//! inequality, and gcd-sum diagnostics.
//!
//! The upper-bound machinery splits the consecutive sums of a strictly
//! increasing sequence in `[n]` into small sums (at most
//! `alpha(n+1)^2/2` of them) and large sums, the latter injecting into
//! the lattice set
//!
//! ```text
//! L_n(alpha) = { (i, j) | 0 <= i < j <= n,
//!                sum_{u=i+1..j} u >= alpha (n+1)^2 / 2 }
//! ```
//!
//! whose normalized size converges to the area `|Lambda_alpha| =
//! (1/2)(sqrt(1-alpha) - alpha log((1+sqrt(1-alpha))/sqrt(alpha)))`.
//! Optimizing `alpha + 2|Lambda_alpha|` over `alpha` yields the constant
//! `c4`. The gcd-sum `G(n) = sum_{l<=n} l^{-3/2} sum_{k<=l} gcd(k, l)`
//! enters the second-moment argument; the Pillai identity
//! `sum_{k<=l} gcd(k, l) = sum_{d|l} d phi(l/d)` accelerates it.

use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::sequences::{count_distinct_sums_capped, Sequence, DEFAULT_SIEVE_CAP_MIB};

/// Guard for lattice counting (`O(n)` time, but `ratio` uses `(n+1)^2`
/// exactly in 64-bit arithmetic).
pub const LATTICE_GUARD_N: u64 = 100_000;

/// Guard for the direct double-loop gcd sum.
pub const GCD_DIRECT_GUARD: u64 = 100_000;

/// Guard for the totient-accelerated gcd sum.
pub const GCD_ACCEL_GUARD: u64 = 10_000_000;

/// Guard for the exhaustive Pillai identity check.
pub const PILLAI_GUARD: u64 = 1_000_000;

/// Named constants with their closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MathConstants {
    /// `(e^2 - 1) / (2(e^2 + 1))`: the consecutive-sum density constant.
    pub c4: f64,
    /// `(2e / (e^2 + 1))^2`: the minimizer of `h`.
    pub alpha_star: f64,
    /// `(e^2 - 1) / (e^2 + 1) = tanh 1`: the minimum value of `h`.
    pub h_min: f64,
    /// `(1 + e^-2) / 4`: the random-permutation density.
    pub konieczny: f64,
    /// `1 - (1 + log log 2) / log 2`: the Erdos-Ford-Tenenbaum exponent.
    pub eft_delta: f64,
    /// Rough lower-bound constant for the rademacher construction.
    pub c2_rough: f64,
    /// Rough lower-bound constant for the block construction.
    pub c3_rough: f64,
}

impl MathConstants {
    pub fn new() -> MathConstants {
        let e2 = std::f64::consts::E * std::f64::consts::E;
        MathConstants {
            c4: (e2 - 1.0) / (2.0 * (e2 + 1.0)),
            alpha_star: (2.0 * std::f64::consts::E / (e2 + 1.0)).powi(2),
            h_min: (e2 - 1.0) / (e2 + 1.0),
            konieczny: (1.0 + (-2.0f64).exp()) / 4.0,
            eft_delta: 1.0 - (1.0 + std::f64::consts::LN_2.ln()) / std::f64::consts::LN_2,
            c2_rough: 2e-2,
            c3_rough: 2e-3,
        }
    }
}

impl Default for MathConstants {
    fn default() -> Self {
        MathConstants::new()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && 0.0 < alpha && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha = {alpha} outside (0, 1)")))
    }
}

/// Area of `Lambda_alpha`: `integral_0^sqrt(1-alpha) (1 - sqrt(x^2 +
/// alpha)) dx`, in closed form.
pub fn lambda_measure(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let s = (1.0 - alpha).sqrt();
    Ok(0.5 * (s - alpha * ((1.0 + s) / alpha.sqrt()).ln()))
}

/// `h(alpha) = alpha + sqrt(1-alpha) - alpha log((1+sqrt(1-alpha)) /
/// sqrt(alpha))`, the quantity whose minimum is `2 c4`.
pub fn h(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let s = (1.0 - alpha).sqrt();
    Ok(alpha + s - alpha * ((1.0 + s) / alpha.sqrt()).ln())
}

/// `h'(alpha) = 1 - log((1+sqrt(1-alpha)) / sqrt(alpha))`, strictly
/// increasing on `(0, 1)`.
pub fn h_prime(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let s = (1.0 - alpha).sqrt();
    Ok(1.0 - ((1.0 + s) / alpha.sqrt()).ln())
}

/// Minimize `h` by bisection on `h'` over `(1e-9, 1 - 1e-9)`, driving
/// `|h'|` to `1e-12`; returns `(argmin, minimum)`.
pub fn minimize_h() -> (f64, f64) {
    let mut lo = 1e-9;
    let mut hi = 1.0 - 1e-9;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let d = h_prime(mid).expect("mid stays inside (0, 1)");
        if d.abs() <= 1e-12 {
            break;
        }
        if d < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (mid, h(mid).expect("mid stays inside (0, 1)"))
}

/// Exact count of the lattice set, with its normalized ratio and the
/// limiting measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeCount {
    pub n: u64,
    pub alpha: f64,
    pub count: u64,
    pub ratio: f64,
    pub measure: f64,
}

impl LatticeCount {
    pub const CSV_HEADER: &'static str = "n,alpha,count,ratio,measure,abs_err";

    pub fn abs_err(&self) -> f64 {
        (self.ratio - self.measure).abs()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n,
            self.alpha,
            self.count,
            self.ratio,
            self.measure,
            self.abs_err()
        )
    }
}

/// Count pairs `0 <= i < j <= n` with `sum_{u=i+1..j} u >= alpha (n+1)^2
/// / 2`, i.e. `(j - i)(i + j + 1) >= alpha (n+1)^2` in integers.
///
/// For fixed `i` the left side grows with `j`, and the first qualifying
/// `j` is nondecreasing in `i`, so one forward-only pointer suffices.
pub fn lattice_count(n: u64, alpha: f64) -> Result<LatticeCount> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::Domain("lattice count needs n >= 1".into()));
    }
    if n > LATTICE_GUARD_N {
        return Err(Error::Guard {
            what: "lattice_count n",
            limit: LATTICE_GUARD_N,
            actual: n,
        });
    }

    let threshold = alpha * ((n + 1) as f64) * ((n + 1) as f64);
    let mut count = 0u64;
    let mut j = 1u64;
    for i in 0..n {
        if j <= i {
            j = i + 1;
        }
        while j <= n && (((j - i) * (i + j + 1)) as f64) < threshold {
            j += 1;
        }
        if j > n {
            break;
        }
        count += n - j + 1;
    }

    let cells = ((n + 1) * (n + 1)) as f64;
    Ok(LatticeCount {
        n,
        alpha,
        count,
        ratio: count as f64 / cells,
        measure: lambda_measure(alpha)?,
    })
}

/// Outcome of the finite-n two-part upper bound on `|S(a)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundCheck {
    pub n: u64,
    pub alpha: f64,
    /// `|S(a)|`.
    pub lhs: u64,
    /// `ceil(alpha (n+1)^2 / 2) + |L_n(alpha)|`.
    pub rhs: u64,
    pub ok: bool,
}

/// Verify `|S(a)| <= ceil(alpha (n+1)^2 / 2) + |L_n(alpha)|` for a
/// strictly increasing sequence with values in `[n]`.
///
/// Every consecutive sum is either below `alpha(n+1)^2/2` (there are at
/// most that many positive integers down there) or is the sum of some
/// run `i+1..j` of *distinct* values in `[n]`, which forces
/// `sum_{u=i+1..j} u` itself above the threshold — a lattice point.
pub fn upper_bound_check(a: &Sequence, alpha: f64) -> Result<UpperBoundCheck> {
    upper_bound_check_capped(a, alpha, DEFAULT_SIEVE_CAP_MIB)
}

/// [`upper_bound_check`] with an explicit sieve memory cap.
pub fn upper_bound_check_capped(a: &Sequence, alpha: f64, cap_mib: u64) -> Result<UpperBoundCheck> {
    check_alpha(alpha)?;
    if !a.values.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Precondition(
            "upper bound requires a strictly increasing sequence".into(),
        ));
    }
    if let Some(&last) = a.values.last() {
        if last > a.n {
            return Err(Error::Precondition(format!(
                "upper bound requires values in [n]; found {last} > n = {}",
                a.n
            )));
        }
    }
    let n = a.n;
    let lattice = lattice_count(n, alpha)?;
    let small = (0.5 * alpha * ((n + 1) as f64) * ((n + 1) as f64)).ceil() as u64;
    let rhs = small + lattice.count;
    let lhs = count_distinct_sums_capped(a, cap_mib)?;
    Ok(UpperBoundCheck {
        n,
        alpha,
        lhs,
        rhs,
        ok: lhs <= rhs,
    })
}

/// Euler totients `phi(0..=limit)` by linear sieve; built once per
/// process and grown on demand, shared read-only.
pub fn totients(limit: u64) -> Arc<Vec<u32>> {
    static CACHE: OnceLock<RwLock<Arc<Vec<u32>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(Arc::new(Vec::new())));
    {
        let held = cache.read().expect("totient cache poisoned");
        if held.len() > limit as usize {
            return Arc::clone(&held);
        }
    }
    let mut held = cache.write().expect("totient cache poisoned");
    if held.len() <= limit as usize {
        *held = Arc::new(totient_sieve(limit));
    }
    Arc::clone(&held)
}

fn totient_sieve(limit: u64) -> Vec<u32> {
    let limit = limit as usize;
    let mut phi = vec![0u32; limit + 1];
    if limit >= 1 {
        phi[1] = 1;
    }
    let mut primes: Vec<usize> = Vec::new();
    for i in 2..=limit {
        if phi[i] == 0 {
            primes.push(i);
            phi[i] = (i - 1) as u32;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > limit {
                break;
            }
            if i % p == 0 {
                phi[ip] = phi[i] * p as u32;
                break;
            }
            phi[ip] = phi[i] * (p as u32 - 1);
        }
    }
    phi
}

/// `sum_{k=1..l} gcd(k, l)` by literal gcd enumeration.
pub fn pillai_direct(l: u64) -> u64 {
    (1..=l).map(|k| gcd(k, l)).sum()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `sum_{d|l} d phi(l/d)` by trial-division divisor enumeration.
pub fn pillai_totient(l: u64, phi: &[u32]) -> u64 {
    let mut total = 0u64;
    let mut d = 1u64;
    while d * d <= l {
        if l.is_multiple_of(d) {
            total += d * phi[(l / d) as usize] as u64;
            let e = l / d;
            if e != d {
                total += e * phi[d as usize] as u64;
            }
        }
        d += 1;
    }
    total
}

/// Check the Pillai identity `sum_k gcd(k, l) = sum_{d|l} d phi(l/d)`
/// exactly for every `l <= l_max`.
pub fn pillai_check(l_max: u64) -> Result<bool> {
    if l_max == 0 {
        return Err(Error::Domain("pillai check needs l_max >= 1".into()));
    }
    if l_max > PILLAI_GUARD {
        return Err(Error::Guard {
            what: "pillai_check l_max",
            limit: PILLAI_GUARD,
            actual: l_max,
        });
    }
    let phi = totients(l_max);
    Ok((1..=l_max).all(|l| pillai_direct(l) == pillai_totient(l, &phi)))
}

/// One row of the gcd-sum diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcdSumRow {
    pub n: u64,
    /// `G(n) = sum_{l<=n} l^{-3/2} sum_{k<=l} gcd(k, l)`.
    #[serde(rename = "G")]
    pub g: f64,
    /// `G(n) / (sqrt(n) log n)`, the surrogate that should stay bounded.
    #[serde(rename = "G_over_sqrtn_logn")]
    pub g_over_sqrtn_logn: f64,
}

impl GcdSumRow {
    pub const CSV_HEADER: &'static str = "n,G,G_over_sqrtn_logn";

    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.n, self.g, self.g_over_sqrtn_logn)
    }
}

fn gcd_sum_row(n: u64, g: f64) -> GcdSumRow {
    let nf = n as f64;
    let denom = nf.sqrt() * nf.ln();
    GcdSumRow {
        n,
        g,
        // log 1 = 0; report the raw sum there rather than an infinity.
        g_over_sqrtn_logn: if n > 1 { g / denom } else { g },
    }
}

/// Fold exact per-l numerators into `G(n)`. Both gcd-sum paths fund the
/// same fold with the same integers in the same order, so they can only
/// differ if the integer stages disagree.
fn fold_gcd_sum<I: Iterator<Item = u64>>(pillai_values: I) -> f64 {
    pillai_values
        .enumerate()
        .map(|(idx, s)| {
            let l = (idx + 1) as f64;
            s as f64 / (l * l.sqrt())
        })
        .collect::<KahanSum>()
        .value()
}

/// `G(n)` by the direct double loop over `gcd(k, l)`.
pub fn gcd_sum_direct(n: u64) -> Result<GcdSumRow> {
    if n == 0 {
        return Err(Error::Domain("gcd sum needs n >= 1".into()));
    }
    if n > GCD_DIRECT_GUARD {
        return Err(Error::Guard {
            what: "gcd_sum_direct n",
            limit: GCD_DIRECT_GUARD,
            actual: n,
        });
    }
    Ok(gcd_sum_row(n, fold_gcd_sum((1..=n).map(pillai_direct))))
}

/// `G(n)` via the Pillai identity: one divisor-scatter pass computes
/// every `sum_{k<=l} gcd(k, l)` in `O(n log n)` additions.
pub fn gcd_sum(n: u64) -> Result<GcdSumRow> {
    if n == 0 {
        return Err(Error::Domain("gcd sum needs n >= 1".into()));
    }
    if n > GCD_ACCEL_GUARD {
        return Err(Error::Guard {
            what: "gcd_sum n",
            limit: GCD_ACCEL_GUARD,
            actual: n,
        });
    }
    let phi = totients(n);
    let mut pillai = vec![0u64; n as usize + 1];
    for d in 1..=n {
        let mut q = 1u64;
        while d * q <= n {
            pillai[(d * q) as usize] += d * phi[q as usize] as u64;
            q += 1;
        }
    }
    Ok(gcd_sum_row(n, fold_gcd_sum(pillai.into_iter().skip(1))))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson quadrature, used only as a test oracle.
    fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
        }
        #[allow(clippy::too_many_arguments)]
        fn recurse<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            whole: f64,
            m: f64,
            fm: f64,
            eps: f64,
            depth: u32,
        ) -> f64 {
            let (left, lm, flm) = simpson(f, a, fa, m, fm);
            let (right, rm, frm) = simpson(f, m, fm, b, fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * eps {
                left + right + delta / 15.0
            } else {
                recurse(f, a, fa, m, fm, left, lm, flm, eps / 2.0, depth - 1)
                    + recurse(f, m, fm, b, fb, right, rm, frm, eps / 2.0, depth - 1)
            }
        }
        let fa = f(a);
        let fb = f(b);
        let (whole, m, fm) = simpson(f, a, fa, b, fb);
        recurse(f, a, fa, b, fb, whole, m, fm, eps, 40)
    }

    #[test]
    fn constants_against_quoted_decimals() {
        let c = MathConstants::new();
        assert!((c.c4 - 0.380797).abs() <= 1e-6);
        assert!((c.alpha_star - 0.419974).abs() <= 1e-6);
        assert!((c.h_min - 0.761594).abs() <= 1e-6);
        assert!((c.konieczny - 0.283834).abs() <= 1e-6);
        assert!((c.eft_delta - 0.086).abs() <= 5e-4);
        assert_eq!(c.c2_rough, 2e-2);
        assert_eq!(c.c3_rough, 2e-3);
    }

    #[test]
    fn constants_internal_identities() {
        let c = MathConstants::new();
        // h_min = tanh 1, alpha_star = sech^2 1, c4 = h_min / 2.
        assert!((c.h_min - 1f64.tanh()).abs() <= 1e-15);
        assert!((c.alpha_star - (1.0 / 1f64.cosh()).powi(2)).abs() <= 1e-15);
        assert!((c.c4 - c.h_min / 2.0).abs() <= 1e-16);
        assert!((h(c.alpha_star).unwrap() - c.h_min).abs() <= 1e-14);
        assert!(h_prime(c.alpha_star).unwrap().abs() <= 1e-14);
    }

    #[test]
    fn lambda_domain_and_limits() {
        assert!(matches!(lambda_measure(0.0), Err(Error::Domain(_))));
        assert!(matches!(lambda_measure(1.0), Err(Error::Domain(_))));
        assert!(matches!(lambda_measure(f64::NAN), Err(Error::Domain(_))));
        assert!((lambda_measure(1e-12).unwrap() - 0.5).abs() < 1e-5);
        assert!(lambda_measure(1.0 - 1e-12).unwrap().abs() < 1e-5);
    }

    #[test]
    fn lambda_matches_quadrature() {
        for i in 1..=9 {
            let alpha = i as f64 / 10.0;
            let integrand = |x: f64| 1.0 - (x * x + alpha).sqrt();
            let numeric = adaptive_simpson(&integrand, 0.0, (1.0 - alpha).sqrt(), 1e-12);
            let closed = lambda_measure(alpha).unwrap();
            assert!(
                (numeric - closed).abs() <= 1e-8,
                "alpha = {alpha}: quadrature {numeric}, closed form {closed}"
            );
        }
    }

    #[test]
    fn h_is_alpha_plus_twice_lambda() {
        for i in 1..=99 {
            let alpha = i as f64 / 100.0;
            let lhs = h(alpha).unwrap();
            let rhs = alpha + 2.0 * lambda_measure(alpha).unwrap();
            assert!((lhs - rhs).abs() <= 1e-14, "alpha = {alpha}");
        }
    }

    #[test]
    fn h_prime_matches_finite_differences() {
        let step = 1e-6;
        for i in 1..=99 {
            let alpha = i as f64 / 100.0;
            if alpha - step <= 0.0 || alpha + step >= 1.0 {
                continue;
            }
            let fd = (h(alpha + step).unwrap() - h(alpha - step).unwrap()) / (2.0 * step);
            let exact = h_prime(alpha).unwrap();
            assert!(
                (fd - exact).abs() <= 1e-6,
                "alpha = {alpha}: finite difference {fd}, closed form {exact}"
            );
        }
    }

    #[test]
    fn minimization_hits_the_closed_forms() {
        let c = MathConstants::new();
        let (alpha, value) = minimize_h();
        assert!((alpha - c.alpha_star).abs() <= 1e-9, "argmin {alpha}");
        assert!((value - c.h_min).abs() <= 1e-9, "minimum {value}");
        assert!(h_prime(alpha).unwrap().abs() <= 1e-12);
        assert!((value / 2.0 - 0.3807970780).abs() <= 1e-9);
    }

    #[test]
    fn lattice_tiny_cases() {
        // n = 1: the single pair (0, 1) has run-sum 1 >= 2 alpha iff
        // alpha <= 1/2.
        assert_eq!(lattice_count(1, 0.4).unwrap().count, 1);
        assert_eq!(lattice_count(1, 0.6).unwrap().count, 0);
        // Threshold above the largest run-sum empties the set.
        let c = lattice_count(10, 0.999999).unwrap();
        assert_eq!(c.count, 0);
        assert_eq!(c.ratio, 0.0);
        assert!(matches!(lattice_count(0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(
            lattice_count(LATTICE_GUARD_N + 1, 0.5),
            Err(Error::Guard { .. })
        ));
    }

    #[test]
    fn lattice_matches_double_loop() {
        for n in [1u64, 2, 3, 7, 30, 61] {
            for i in 1..=19 {
                let alpha = i as f64 / 20.0;
                let threshold = alpha * ((n + 1) as f64) * ((n + 1) as f64);
                let mut brute = 0u64;
                for a in 0..n {
                    for b in (a + 1)..=n {
                        if ((b - a) * (a + b + 1)) as f64 >= threshold {
                            brute += 1;
                        }
                    }
                }
                assert_eq!(
                    lattice_count(n, alpha).unwrap().count,
                    brute,
                    "n = {n}, alpha = {alpha}"
                );
            }
        }
    }

    #[test]
    fn lattice_ratio_near_measure() {
        let c = lattice_count(1000, 0.42).unwrap();
        assert!(c.abs_err() <= 5.0 / 1001.0, "abs err {}", c.abs_err());
        assert!(c.ratio <= 0.5);
    }

    #[test]
    fn upper_bound_accepts_increasing_sequences() {
        let alpha_star = MathConstants::new().alpha_star;
        let id = Sequence::identity(100);
        for alpha in [0.2, alpha_star, 0.6] {
            let r = upper_bound_check(&id, alpha).unwrap();
            assert!(r.ok, "identity n=100, alpha={alpha}: {} > {}", r.lhs, r.rhs);
            assert!(r.lhs <= 100 * 101 / 2);
        }
        let sub = Sequence::prandom(100, 0.5, 11).unwrap();
        let r = upper_bound_check(&sub, 0.2).unwrap();
        assert!(r.ok);
    }

    #[test]
    fn upper_bound_rejects_out_of_range_values() {
        let rad = Sequence::rademacher(20, 0);
        let err = upper_bound_check(&rad, 0.4);
        assert!(matches!(err, Err(Error::Precondition(_))));

        let perm = Sequence::permutation(30, 1);
        if perm.values.windows(2).any(|w| w[0] > w[1]) {
            assert!(matches!(
                upper_bound_check(&perm, 0.4),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn empty_sequence_satisfies_the_bound() {
        let empty = Sequence::prandom(50, 0.0, 0).unwrap();
        let r = upper_bound_check(&empty, 0.3).unwrap();
        assert_eq!(r.lhs, 0);
        assert!(r.ok);
    }

    #[test]
    fn pillai_small_values() {
        let phi = totients(10);
        assert_eq!(pillai_direct(1), 1);
        assert_eq!(pillai_totient(1, &phi), 1);
        // l = 6: gcds 1,2,3,2,1,6 sum to 15 = 1*phi(6)+2*phi(3)+3*phi(2)+6*phi(1).
        assert_eq!(pillai_direct(6), 15);
        assert_eq!(pillai_totient(6, &phi), 15);
    }

    #[test]
    fn pillai_identity_holds_exhaustively() {
        assert!(pillai_check(1000).unwrap());
        assert!(matches!(pillai_check(0), Err(Error::Domain(_))));
        assert!(matches!(
            pillai_check(PILLAI_GUARD + 1),
            Err(Error::Guard { .. })
        ));
    }

    #[test]
    fn totient_sieve_small_values() {
        let phi = totients(12);
        let want = [0u32, 1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        assert_eq!(&phi[..=12], &want);
    }

    #[test]
    fn gcd_sum_tiny_closed_forms() {
        let g1 = gcd_sum_direct(1).unwrap();
        assert_eq!(g1.g, 1.0);
        let g2 = gcd_sum_direct(2).unwrap();
        let expected = 1.0 + 3.0 / (2.0 * 2f64.sqrt());
        assert!((g2.g - expected).abs() <= 1e-12);
        assert!((g2.g - 2.0607).abs() <= 1e-4);
    }

    #[test]
    fn gcd_sum_paths_agree() {
        for n in [1u64, 2, 10, 97, 500, 3000] {
            let direct = gcd_sum_direct(n).unwrap();
            let fast = gcd_sum(n).unwrap();
            let rel = (direct.g - fast.g).abs() / direct.g;
            assert!(
                rel <= 1e-12,
                "n = {n}: direct {} vs fast {}",
                direct.g,
                fast.g
            );
        }
    }

    #[test]
    fn gcd_sum_guards() {
        assert!(matches!(gcd_sum_direct(0), Err(Error::Domain(_))));
        assert!(matches!(
            gcd_sum_direct(GCD_DIRECT_GUARD + 1),
            Err(Error::Guard { .. })
        ));
        assert!(matches!(
            gcd_sum(GCD_ACCEL_GUARD + 1),
            Err(Error::Guard { .. })
        ));
    }

    #[test]
    fn csv_rows_have_pinned_shapes() {
        assert_eq!(
            LatticeCount::CSV_HEADER,
            "n,alpha,count,ratio,measure,abs_err"
        );
        assert_eq!(GcdSumRow::CSV_HEADER, "n,G,G_over_sqrtn_logn");
        let row = gcd_sum_direct(1).unwrap().csv_row();
        assert_eq!(row, "1,1,1");
    }
}
