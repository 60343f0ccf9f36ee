//! Small-modulus power series for the elliptic-integral combinations that
//! suffer catastrophic cancellation in direct evaluation.
//!
//! All series are in t = k^2 and have exactly rational coefficients
//! (multiples of pi/2), so they are generated once in integer arithmetic and
//! evaluated by Horner's rule. This keeps quantities like K - E, whose
//! leading behaviour is O(k^2), fully accurate down to k = 1e-8.

use std::f64::consts::PI;

const N_TERMS: usize = 14;

/// Switch-over modulus: below this, series evaluation is used.
pub const SMALL_K: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    const ZERO: Frac = Frac { num: 0, den: 1 };
    const ONE: Frac = Frac { num: 1, den: 1 };

    fn new(num: i128, den: i128) -> Self {
        Frac { num, den }.reduced()
    }

    fn reduced(self) -> Self {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        let g = gcd(self.num, self.den).max(1);
        let s = if self.den < 0 { -1 } else { 1 };
        Frac {
            num: s * self.num / g,
            den: s * self.den / g,
        }
    }

    fn add(self, o: Frac) -> Frac {
        Frac::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    fn sub(self, o: Frac) -> Frac {
        self.add(Frac {
            num: -o.num,
            den: o.den,
        })
    }

    fn mul_int(self, m: i128) -> Frac {
        Frac::new(self.num * m, self.den)
    }

    fn div_int(self, m: i128) -> Frac {
        Frac::new(self.num, self.den * m)
    }

    fn mul(self, o: Frac) -> Frac {
        // reduce cross-wise first to keep the i128 products small
        let a = Frac::new(self.num, o.den);
        let b = Frac::new(o.num, self.den);
        Frac {
            num: a.num * b.num,
            den: a.den * b.den,
        }
        .reduced()
    }

    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Truncated Cauchy product of two coefficient series.
fn series_mul(a: &[Frac], b: &[Frac], len: usize) -> Vec<Frac> {
    let mut out = vec![Frac::ZERO; len];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            if i + j < len {
                out[i + j] = out[i + j].add(ai.mul(bj));
            }
        }
    }
    out
}

/// Coefficient tables, all relative to a factor pi/2.
struct Tables {
    /// K(k)/(pi/2) = sum a_n t^n
    a: [Frac; N_TERMS],
    /// E(k)/(pi/2) = sum e_n t^n
    e: [Frac; N_TERMS],
}

fn tables() -> Tables {
    let mut a = [Frac::ZERO; N_TERMS];
    let mut e = [Frac::ZERO; N_TERMS];
    a[0] = Frac::ONE;
    e[0] = Frac::ONE;
    for n in 1..N_TERMS {
        let n_i = n as i128;
        // a_n = a_{n-1} * ((2n-1)/(2n))^2
        a[n] = a[n - 1]
            .mul_int((2 * n_i - 1) * (2 * n_i - 1))
            .div_int(4 * n_i * n_i);
        e[n] = a[n].mul_int(-1).div_int(2 * n_i - 1);
    }
    Tables { a, e }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn horner_derivative_t(coeffs: &[f64], t: f64) -> f64 {
    // d/dt of sum c_n t^n
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (n, &c)| acc * t + n as f64 * c)
}

/// Precomputed f64 series, shared by the elliptic and selection modules.
pub struct SmallKSeries {
    k_coeffs: Vec<f64>,
    e_coeffs: Vec<f64>,
    /// (K - E)/(pi/2) = t * sum km_e[n] t^n
    km_e: Vec<f64>,
    /// ((1-k^2)K - E)/(pi/2) = t * sum kc2k_e[n] t^n  (leading term -1/2)
    kc2k_e: Vec<f64>,
    /// Selection-ratio numerator tail: N(k)/(pi/2) = t^2 * sum n_tail[n] t^n
    pub n_tail: Vec<f64>,
    /// Selection-ratio denominator tail: D(k)/(pi/2) = t^2 * sum d_tail[n] t^n
    pub d_tail: Vec<f64>,
    /// Homogeneous-balance coefficient tail:
    /// 3E^2 - 2(2-t)EK + (1-t)K^2 = (pi/2)^2 t^2 * sum pt_tail[n] t^n
    /// (the numerator of Pt(k) relative to K^2; it cancels to O(t^2)).
    pt_tail: Vec<f64>,
}

impl SmallKSeries {
    pub fn shared() -> &'static SmallKSeries {
        use std::sync::OnceLock;
        static CELL: OnceLock<SmallKSeries> = OnceLock::new();
        CELL.get_or_init(SmallKSeries::build)
    }

    fn build() -> SmallKSeries {
        let tb = tables();
        let frac = |f: Frac| f.to_f64();
        let at = |i: isize| {
            if i < 0 { Frac::ZERO } else { tb.a[i as usize] }
        };
        let et = |i: isize| {
            if i < 0 { Frac::ZERO } else { tb.e[i as usize] }
        };

        let k_coeffs: Vec<f64> = tb.a.iter().map(|&f| frac(f)).collect();
        let e_coeffs: Vec<f64> = tb.e.iter().map(|&f| frac(f)).collect();

        // K - E: coefficient of t^n (n>=1) is a_n * 2n/(2n-1); factor one t out.
        let km_e: Vec<f64> = (1..N_TERMS)
            .map(|n| frac(tb.a[n].mul_int(2 * n as i128).div_int(2 * n as i128 - 1)))
            .collect();

        // (1-k^2)K - E = (K - E) - t*K: coefficient of t^n (n>=1):
        //   a_n*2n/(2n-1) - a_{n-1}; factor one t out.
        let kc2k_e: Vec<f64> = (1..N_TERMS)
            .map(|n| {
                frac(
                    tb.a[n]
                        .mul_int(2 * n as i128)
                        .div_int(2 * n as i128 - 1)
                        .sub(tb.a[n - 1]),
                )
            })
            .collect();

        // Selection-principle numerator and denominator,
        //   N = 2(t^2 - t + 1)E - (1 - t)(2 - t)K
        //   D = (-2 + 3t + 3t^2 - 2t^3)E + (t^3 + t^2 - 4t + 2)K,
        // both of which vanish to O(t^2); factor t^2 out exactly.
        let mut n_tail = Vec::new();
        let mut d_tail = Vec::new();
        for n in 2..N_TERMS as isize {
            let num = et(n)
                .sub(et(n - 1))
                .add(et(n - 2))
                .mul_int(2)
                .sub(at(n).mul_int(2).sub(at(n - 1).mul_int(3)).add(at(n - 2)));
            n_tail.push(frac(num));
            let den = et(n)
                .mul_int(-2)
                .add(et(n - 1).mul_int(3))
                .add(et(n - 2).mul_int(3))
                .sub(et(n - 3).mul_int(2))
                .add(at(n).mul_int(2))
                .sub(at(n - 1).mul_int(4))
                .add(at(n - 2))
                .add(at(n - 3));
            d_tail.push(frac(den));
        }

        // 3E^2 - 2(2-t)EK + (1-t)K^2, exact to O(t^2)
        let ee = series_mul(&tb.e, &tb.e, N_TERMS);
        let ek = series_mul(&tb.e, &tb.a, N_TERMS);
        let kk = series_mul(&tb.a, &tb.a, N_TERMS);
        let mut pt_tail = Vec::new();
        for n in 2..N_TERMS as isize {
            let g = |s: &[Frac], i: isize| if i < 0 { Frac::ZERO } else { s[i as usize] };
            let c = g(&ee, n)
                .mul_int(3)
                .sub(g(&ek, n).mul_int(4).sub(g(&ek, n - 1).mul_int(2)))
                .add(g(&kk, n).sub(g(&kk, n - 1)));
            pt_tail.push(frac(c));
        }

        SmallKSeries {
            k_coeffs,
            e_coeffs,
            km_e,
            kc2k_e,
            n_tail,
            d_tail,
            pt_tail,
        }
    }

    /// K(k) by series; valid for k <= ~0.5, full accuracy below SMALL_K.
    pub fn big_k(&self, k: f64) -> f64 {
        0.5 * PI * horner(&self.k_coeffs, k * k)
    }

    /// E(k) by series.
    pub fn big_e(&self, k: f64) -> f64 {
        0.5 * PI * horner(&self.e_coeffs, k * k)
    }

    /// K(k) - E(k), accurate for small k (leading term (pi/4) k^2).
    pub fn k_minus_e(&self, k: f64) -> f64 {
        let t = k * k;
        0.5 * PI * t * horner(&self.km_e, t)
    }

    /// (1-k^2)K(k) - E(k), accurate for small k (leading term -(pi/4) k^2).
    pub fn kc2_k_minus_e(&self, k: f64) -> f64 {
        let t = k * k;
        0.5 * PI * t * horner(&self.kc2k_e, t)
    }

    /// Selection ratio N/D with the common t^2 factor cancelled.
    pub fn selection_ratio(&self, k: f64) -> f64 {
        let t = k * k;
        horner(&self.n_tail, t) / horner(&self.d_tail, t)
    }

    /// d/dk of the selection ratio.
    pub fn selection_ratio_deriv(&self, k: f64) -> f64 {
        let t = k * k;
        let n = horner(&self.n_tail, t);
        let d = horner(&self.d_tail, t);
        let np = horner_derivative_t(&self.n_tail, t);
        let dp = horner_derivative_t(&self.d_tail, t);
        (np * d - n * dp) / (d * d) * 2.0 * k
    }

    /// Pt(k) = (1-k^2) - 2(2-k^2) E/K + 3 (E/K)^2 and its k-derivative,
    /// evaluated through the cancellation-free numerator series
    /// (Pt vanishes to O(k^4) as k -> 0).
    pub fn pt_and_deriv(&self, k: f64) -> (f64, f64) {
        let t = k * k;
        let big_k = self.big_k(k);
        let quarter_pi2 = 0.25 * PI * PI; // (pi/2)^2
        let tail = horner(&self.pt_tail, t);
        let tail_d = horner_derivative_t(&self.pt_tail, t);
        let numer = quarter_pi2 * t * t * tail;
        let numer_dk = quarter_pi2 * (4.0 * k * t * tail + 2.0 * k * t * t * tail_d);
        // dK/dk via the stable combination
        let kc2 = 1.0 - t;
        let dk_dk = -self.kc2_k_minus_e(k) / (k * kc2);
        let pt = numer / (big_k * big_k);
        let pt_dk = numer_dk / (big_k * big_k) - 2.0 * pt * dk_dk / big_k;
        (pt, pt_dk)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_selection_coefficients_are_exact() {
        let s = SmallKSeries::shared();
        // N = (pi/2)(15/8) k^4 + ..., D = (pi/2)(21/8) k^4 + ...
        assert_eq!(s.n_tail[0], 15.0 / 8.0);
        assert_eq!(s.d_tail[0], 21.0 / 8.0);
        // limit ratio 5/7 => F^2(0) = (7/20)(5/7) = 1/4
        assert!((s.selection_ratio(0.0) - 5.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn pt_series_matches_direct_evaluation_in_overlap() {
        // the series is used below k = 0.1; the overlap window is limited by
        // the truncation (~t^12) on the large side
        let s = SmallKSeries::shared();
        for &k in &[0.12f64, 0.2, 0.3] {
            let (pt, ptp) = s.pt_and_deriv(k);
            let big_k = s.big_k(k);
            let big_e = s.big_e(k);
            let r = big_e / big_k;
            let direct = (1.0 - k * k) - 2.0 * (2.0 - k * k) * r + 3.0 * r * r;
            assert!((pt - direct).abs() < 1e-11 * direct.abs().max(1e-3), "Pt at k={k}");
            let h = 1e-6;
            let fd = (s.pt_and_deriv(k + h).0 - s.pt_and_deriv(k - h).0) / (2.0 * h);
            assert!((ptp - fd).abs() < 1e-6 * fd.abs().max(1e-3), "Pt' at k={k}");
        }
        // leading behaviour: Pt ~ -k^4 * 3/16? assert smooth smallness at tiny k
        let (pt, _) = s.pt_and_deriv(1e-6);
        assert!(pt.abs() < 1e-22 && pt != 0.0 || pt.abs() < 1e-22);
    }

    #[test]
    fn k_minus_e_leading_term() {
        let s = SmallKSeries::shared();
        let k = 1e-6;
        let expected = 0.25 * PI * k * k;
        assert!((s.k_minus_e(k) - expected).abs() < 1e-12 * expected.abs() + 1e-300);
        assert!((s.kc2_k_minus_e(k) + expected).abs() < 1e-12 * expected);
    }
}
