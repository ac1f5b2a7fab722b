//! Scalar root finding: grid scans with bracketing, bisection, and a small
//! dense polynomial type used to bound the scan intervals.

/// Real polynomial with coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly(coeffs);
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.0.len() > 1 && *self.0.last().unwrap() == 0.0 {
            self.0.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let c = (0..n)
            .map(|i| self.0.get(i).copied().unwrap_or(0.0) + other.0.get(i).copied().unwrap_or(0.0))
            .collect();
        Poly::new(c)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut c = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    /// Fujiwara's bound: every complex root satisfies
    /// `|z| <= 2 max_k |c_{n-k}/c_n|^{1/k}`.
    pub fn root_bound(&self) -> f64 {
        let n = self.degree();
        if n == 0 {
            return 0.0;
        }
        let lead = self.0[n];
        let mut bound: f64 = 0.0;
        for k in 1..=n {
            let c = (self.0[n - k] / lead).abs();
            let term = if k == n { (c / 2.0).powf(1.0 / k as f64) } else { c.powf(1.0 / k as f64) };
            bound = bound.max(term);
        }
        2.0 * bound
    }
}

/// Bisection on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite
/// sign (or one of them zero). Stops when the bracket is narrower than
/// `xtol` or after 200 halvings.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection on a boolean predicate that is `true` at `lo` and `false` at
/// `hi`; returns the final `(last_true, first_false)` bracket.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    for _ in 0..200 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// A root located by [`scan_roots`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScannedRoot {
    pub x: f64,
    /// Found as a tangency (local extremum touching zero) rather than a sign
    /// change.
    pub double: bool,
}

/// Scans `n` uniform intervals of `[lo, hi]`, bisecting every sign change.
/// Near-tangencies whose minimum modulus drops below `touch_tol` are
/// reported once as double roots.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize, touch_tol: f64) -> Vec<ScannedRoot> {
    let h = (hi - lo) / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| if i == n { hi } else { lo + h * i as f64 }).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let xtol = 4.0 * f64::EPSILON * (lo.abs().max(hi.abs()).max(1.0));
    let mut roots = Vec::new();
    for i in 0..n {
        let (f0, f1) = (fs[i], fs[i + 1]);
        if !f0.is_finite() || !f1.is_finite() {
            continue;
        }
        if f0 == 0.0 {
            roots.push(ScannedRoot { x: xs[i], double: false });
        } else if f0 * f1 < 0.0 {
            roots.push(ScannedRoot {
                x: bisect(&f, xs[i], xs[i + 1], xtol),
                double: false,
            });
        } else if i > 0 && f1 != 0.0 && touch_tol > 0.0 {
            // interior node where |f| has a local minimum without a sign change
            let fm = fs[i - 1];
            if fm * f0 > 0.0 && f0.abs() <= fm.abs() && f0.abs() <= f1.abs() {
                let sgn = f0.signum();
                let x = golden_min(|x| sgn * f(x), xs[i - 1], xs[i + 1], xtol);
                if f(x).abs() <= touch_tol {
                    roots.push(ScannedRoot { x, double: true });
                }
            }
        }
    }
    if fs[n] == 0.0 {
        roots.push(ScannedRoot { x: xs[n], double: false });
    }
    roots
}

/// Golden-section minimisation on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn poly_arithmetic() {
        let p = Poly::new(vec![-2.0, 0.0, 1.0]); // x^2 - 2
        assert_eq!(p.degree(), 2);
        assert!((p.eval(2f64.sqrt())).abs() < 1e-15);
        let q = p.mul(&Poly::new(vec![1.0, 1.0]));
        assert_eq!(q.0, vec![-2.0, -2.0, 1.0, 1.0]);
        assert_eq!(p.add(&p.scale(-1.0)).0, vec![0.0]);
    }

    #[test]
    fn scan_finds_all_simple_roots() {
        let f = |x: f64| (x - 0.3) * (x - 1.1) * (x + 2.0);
        let r = scan_roots(f, -3.0, 3.0, 2000, 0.0);
        let xs: Vec<f64> = r.iter().map(|r| r.x).collect();
        assert_eq!(xs.len(), 3);
        for (x, want) in xs.iter().zip([-2.0, 0.3, 1.1]) {
            assert!((x - want).abs() < 1e-13);
        }
    }

    #[test]
    fn scan_reports_tangency_once() {
        let f = |x: f64| (x - 0.5_f64).powi(2) * (x + 1.0);
        let r = scan_roots(f, 0.013, 1.0, 100, 1e-12);
        assert_eq!(r.len(), 1);
        assert!(r[0].double);
        assert!((r[0].x - 0.5).abs() < 1e-6);
    }

    #[test]
    fn predicate_bisection_brackets_boundary() {
        let (lo, hi) = bisect_predicate(|x| x < 0.7, 0.0, 1.0, 1e-12);
        assert!(lo < 0.7 && hi >= 0.7 && hi - lo <= 1e-12);
    }

    proptest! {
        #[test]
        fn fujiwara_bounds_every_root(r1 in -50.0f64..50.0, r2 in -50.0f64..50.0, r3 in -50.0f64..50.0, lead in 0.1f64..10.0) {
            let p = Poly::new(vec![-r1, 1.0])
                .mul(&Poly::new(vec![-r2, 1.0]))
                .mul(&Poly::new(vec![-r3, 1.0]))
                .scale(lead);
            let b = p.root_bound();
            for r in [r1, r2, r3] {
                prop_assert!(r.abs() <= b * (1.0 + 1e-12));
            }
        }

        #[test]
        fn bisection_converges_to_sqrt(c in 0.01f64..100.0) {
            let x = bisect(|x| x * x - c, 0.0, c.max(1.0), 1e-14);
            prop_assert!((x - c.sqrt()).abs() <= 1e-12 * c.sqrt().max(1.0));
        }
    }
}
