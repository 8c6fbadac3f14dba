#![allow(dead_code)]

use mhtlab_core::{DimensionalParams, NonDimParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Rescaled parameters with `M` of the requested sign.
pub fn nondim(rng: &mut impl Rng, strong: bool, alt_food: bool) -> NonDimParams {
    NonDimParams {
        a: log_uniform(rng, 1e-3, 0.5),
        c: if alt_food {
            log_uniform(rng, 1e-4, 0.3)
        } else {
            0.0
        },
        q: log_uniform(rng, 1e-3, 2.0),
        s: log_uniform(rng, 1e-3, 1.0),
        m: if strong {
            rng.random_range(0.01..0.6)
        } else {
            -rng.random_range(0.01..0.9)
        },
    }
}

/// Weak Allee parameters whose cubic has three roots in (0, 1), built from the roots.
pub fn weak_three_roots(rng: &mut impl Rng) -> NonDimParams {
    loop {
        let mut r = [
            rng.random_range(0.01..0.99),
            rng.random_range(0.01..0.99),
            rng.random_range(0.01..0.99),
        ];
        r.sort_by(f64::total_cmp);
        if r[1] - r[0] < 1e-3 || r[2] - r[1] < 1e-3 {
            continue;
        }
        let sum: f64 = r.iter().sum();
        let prod: f64 = r.iter().product();
        let e2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        // M = A + sum - 1 and A M = -prod.
        let b = sum - 1.0;
        let disc = b * b - 4.0 * prod;
        if disc <= 0.0 {
            continue;
        }
        for a in [0.5 * (-b + disc.sqrt()), 0.5 * (-b - disc.sqrt())] {
            let m = a + b;
            let q = e2 - m + a * (m + 1.0);
            if a > 0.0 && m < 0.0 && m > -1.0 && q > 0.0 {
                return NonDimParams {
                    a,
                    c: 0.0,
                    q,
                    s: log_uniform(rng, 1e-3, 1.0),
                    m,
                };
            }
        }
    }
}

/// Parameters with a double interior root `E` and negative root `-G`.
pub fn saddle_node(rng: &mut impl Rng, alt_food: bool) -> (NonDimParams, f64) {
    loop {
        let g = log_uniform(rng, 1e-3, 0.3);
        let e = rng.random_range(0.05..0.95);
        let (a, m, q, c);
        if alt_food {
            a = log_uniform(rng, 1e-3, 0.5);
            m = 2.0 * e - g - 1.0 + a;
            q = e * e - 2.0 * g * e - m + a * (m + 1.0);
            if q <= 0.0 {
                continue;
            }
            c = (g * e * e - a * m) / q;
            if !(c > 0.0) {
                continue;
            }
        } else {
            // A (2E - G - 1 + A) = G E^2
            let b = 2.0 * e - g - 1.0;
            let disc = b * b + 4.0 * g * e * e;
            a = 0.5 * (-b + disc.sqrt());
            m = a + b;
            q = e * e - 2.0 * g * e - m + a * (m + 1.0);
            c = 0.0;
        }
        if !(a > 0.0 && m > 0.0 && m < e && q > 0.0) {
            continue;
        }
        let np = NonDimParams { a, c, q, s: 0.0, m };
        let thr = mhtlab_core::equilibria::saddle_node_threshold(a, m, g);
        let s = if thr > 0.0 && rng.random_bool(0.5) {
            thr * log_uniform(rng, 0.2, 5.0)
        } else {
            log_uniform(rng, 1e-3, 1.0)
        };
        return (NonDimParams { s, ..np }, e);
    }
}

/// Dimensional parameters scattered around the default values.
pub fn dimensional(rng: &mut impl Rng, strong: bool) -> DimensionalParams {
    let k = log_uniform(rng, 50.0, 400.0);
    DimensionalParams {
        r: log_uniform(rng, 0.5, 8.0),
        k,
        q: log_uniform(rng, 50.0, 3000.0),
        a: log_uniform(rng, 0.5, 30.0),
        s: log_uniform(rng, 0.1, 5.0),
        n: log_uniform(rng, 0.005, 0.1),
        c: log_uniform(rng, 1e-3, 0.5),
        m: if strong {
            rng.random_range(0.02..0.5) * k
        } else {
            -rng.random_range(0.02..0.9) * k
        },
    }
}
