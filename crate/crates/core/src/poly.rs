//! Real-root isolation for low-degree polynomials.
//!
//! Roots are bracketed with a Sturm sequence, each isolating interval is
//! bisected down to `1e-12`, and the midpoint is polished by one Newton step.
//! Sturm counts give exact root counts on an interval (up to rounding near
//! multiple roots), which the equilibrium census relies on.

/// Polynomial with coefficients in ascending order (`coeffs[i]` multiplies `x^i`).
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

const BISECT_WIDTH: f64 = 1e-12;
const MAX_SPLIT_DEPTH: usize = 200;

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// Monic cubic `x^3 + b x^2 + c x + d`.
    pub fn monic_cubic(b: f64, c: f64, d: f64) -> Self {
        Self::new(vec![d, c, b, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Remainder of euclidean division by `divisor`.
    fn rem(&self, divisor: &Poly) -> Poly {
        let mut r = self.coeffs.clone();
        let d = &divisor.coeffs;
        let dl = d.len();
        let lead = d[dl - 1];
        while r.len() >= dl {
            let factor = r[r.len() - 1] / lead;
            let shift = r.len() - dl;
            for (i, &dc) in d.iter().enumerate() {
                r[shift + i] -= factor * dc;
            }
            r.pop();
        }
        // Drop coefficients that are pure cancellation noise.
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for c in r.iter_mut() {
            if c.abs() <= 64.0 * f64::EPSILON * scale {
                *c = 0.0;
            }
        }
        Poly::new(r)
    }

    /// Cauchy bound: every real root lies in `[-bound, bound]`.
    pub fn root_bound(&self) -> f64 {
        let lead = self.coeffs[self.degree()];
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .fold(0.0f64, |m, c| m.max((c / lead).abs()))
    }
}

/// Sturm sequence `p, p', -rem(p, p'), ...`.
pub fn sturm_sequence(p: &Poly) -> Vec<Poly> {
    let mut seq = vec![p.clone()];
    if p.degree() == 0 {
        return seq;
    }
    let mut prev = p.clone();
    let mut cur = p.derivative();
    while !cur.is_zero() {
        seq.push(cur.clone());
        if cur.degree() == 0 {
            break;
        }
        let mut r = prev.rem(&cur);
        for c in r.coeffs.iter_mut() {
            *c = -*c;
        }
        prev = cur;
        cur = r;
    }
    seq
}

fn sign_changes(seq: &[Poly], x: f64) -> usize {
    let mut changes = 0;
    let mut last = 0.0f64;
    for p in seq {
        let v = p.eval(x);
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Number of distinct real roots in `(lo, hi]`.
pub fn count_roots(seq: &[Poly], lo: f64, hi: f64) -> usize {
    sign_changes(seq, lo).saturating_sub(sign_changes(seq, hi))
}

/// A real root together with how it was located.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    /// The interval carried no sign change: a touching (even multiplicity) root.
    pub touching: bool,
}

/// All distinct real roots of `p` in `(lo, hi)`, ascending.
pub fn real_roots_in(p: &Poly, lo: f64, hi: f64) -> Vec<Root> {
    if p.degree() == 0 || !(lo < hi) {
        return Vec::new();
    }
    let seq = sturm_sequence(p);
    let mut intervals = Vec::new();
    isolate(&seq, lo, hi, 0, &mut intervals);
    let mut roots: Vec<Root> = intervals
        .into_iter()
        .filter_map(|(a, b)| refine(p, a, b))
        .filter(|r| r.value > lo && r.value < hi)
        .collect();
    roots.sort_by(|x, y| x.value.total_cmp(&y.value));
    roots.dedup_by(|x, y| (x.value - y.value).abs() <= 4.0 * BISECT_WIDTH);
    roots
}

/// All distinct real roots of `p`.
pub fn real_roots(p: &Poly) -> Vec<Root> {
    let b = p.root_bound() * (1.0 + 1e-9) + 1e-9;
    real_roots_in(p, -b, b)
}

fn isolate(seq: &[Poly], lo: f64, hi: f64, depth: usize, out: &mut Vec<(f64, f64)>) {
    let n = count_roots(seq, lo, hi);
    if n == 0 {
        return;
    }
    if n == 1 || depth >= MAX_SPLIT_DEPTH || hi - lo <= BISECT_WIDTH {
        out.push((lo, hi));
        return;
    }
    let mid = 0.5 * (lo + hi);
    isolate(seq, lo, mid, depth + 1, out);
    isolate(seq, mid, hi, depth + 1, out);
}

fn refine(p: &Poly, lo: f64, hi: f64) -> Option<Root> {
    let (flo, fhi) = (p.eval(lo), p.eval(hi));
    if fhi == 0.0 {
        return Some(Root {
            value: hi,
            touching: false,
        });
    }
    if flo != 0.0 && (flo > 0.0) != (fhi > 0.0) {
        let x = bisect(|x| p.eval(x), lo, hi, flo);
        return Some(Root {
            value: newton_polish(p, x, lo, hi),
            touching: false,
        });
    }
    // No sign change: the isolated root has even multiplicity (or the
    // interval is a rounding cluster). Locate it as a root of p'.
    let dp = p.derivative();
    let (dlo, dhi) = (dp.eval(lo), dp.eval(hi));
    let x = if dlo != 0.0 && dhi != 0.0 && (dlo > 0.0) != (dhi > 0.0) {
        bisect(|x| dp.eval(x), lo, hi, dlo)
    } else {
        0.5 * (lo + hi)
    };
    let scale = p.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if p.eval(x).abs() <= 1e-12 * scale.max(1.0) {
        Some(Root {
            value: x,
            touching: true,
        })
    } else {
        None
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..2000 {
        if hi - lo <= BISECT_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
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

fn newton_polish(p: &Poly, x: f64, lo: f64, hi: f64) -> f64 {
    let d = p.derivative().eval(x);
    if d == 0.0 {
        return x;
    }
    let y = x - p.eval(x) / d;
    if y >= lo && y <= hi && p.eval(y).abs() <= p.eval(x).abs() {
        y
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(roots: &[Root]) -> Vec<f64> {
        roots.iter().map(|r| r.value).collect()
    }

    #[test]
    fn cubic_with_three_roots() {
        // (x+1)(x-0.5)(x-2)
        let p = Poly::new(vec![1.0, -1.5, -1.5, 1.0]);
        let r = values(&real_roots(&p));
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-1.0, 0.5, 2.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn sturm_counts() {
        let p = Poly::new(vec![1.0, -1.5, -1.5, 1.0]);
        let seq = sturm_sequence(&p);
        assert_eq!(count_roots(&seq, -10.0, 10.0), 3);
        assert_eq!(count_roots(&seq, 0.0, 1.0), 1);
        assert_eq!(count_roots(&seq, 0.6, 1.9), 0);
    }

    #[test]
    fn single_real_root() {
        // x^3 + x + 1 has one real root near -0.6823
        let p = Poly::monic_cubic(0.0, 1.0, 1.0);
        let r = values(&real_roots(&p));
        assert_eq!(r.len(), 1);
        assert!((r[0] + 0.682_327_803_828_019_3).abs() < 1e-12);
    }

    #[test]
    fn double_root_is_found_once() {
        // (x-0.5)^2 (x+1)
        let p = Poly::new(vec![0.25, -0.75, 0.0, 1.0]);
        let r = real_roots(&p);
        let vals = values(&r);
        assert_eq!(vals.len(), 2, "{vals:?}");
        assert!((vals[1] - 0.5).abs() < 1e-6);
        assert!(r[1].touching);
    }

    #[test]
    fn restricted_interval() {
        let p = Poly::new(vec![1.0, -1.5, -1.5, 1.0]);
        let r = values(&real_roots_in(&p, 0.0, 1.0));
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).abs() < 1e-12);
    }
}
