//! Maximizes `min_i f_i(beta1, beta2)` over the margin simplex
//! `{beta1, beta2 >= d, beta1 + beta2 <= 1 - d}` for concave `f_i`.
//!
//! The minimum of concave functions is concave, so its partial maximum over
//! `beta2` is concave in `beta1` and both one-dimensional problems are
//! unimodal. A coarse scan brackets each maximizer (the best scan point's
//! neighbours enclose it), then golden-section search closes the bracket.
//! Functions may return `-inf` outside their domain; the feasible region is
//! convex so the scan still brackets correctly when it hits a finite point.

use super::{InnerMethod, SolverOptions};
use crate::rate_model::PAFactors;
use crate::{Error, Result};

pub type ConcaveFn<'a> = Box<dyn Fn(f64, f64) -> f64 + Send + Sync + 'a>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxMin {
    pub beta: PAFactors,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_SECTION_STEPS: usize = 200;

/// `min_i f_i`, with NaN read as `-inf`.
pub fn min_of(funcs: &[ConcaveFn<'_>], b1: f64, b2: f64) -> f64 {
    let mut v = f64::INFINITY;
    for f in funcs {
        let x = f(b1, b2);
        if x.is_nan() {
            return f64::NEG_INFINITY;
        }
        v = v.min(x);
    }
    v
}

pub fn inner_maximin(funcs: &[ConcaveFn<'_>], opts: &SolverOptions) -> Result<MaxMin> {
    inner_maximin_from(funcs, opts, None)
}

/// Like [`inner_maximin`], but never returns a worse point than `start`.
pub fn inner_maximin_from(
    funcs: &[ConcaveFn<'_>],
    opts: &SolverOptions,
    start: Option<PAFactors>,
) -> Result<MaxMin> {
    if funcs.is_empty() {
        return Err(Error::InvalidConfig(
            "inner_maximin needs at least one function".into(),
        ));
    }
    let (mut b1, mut b2, mut v) = match opts.inner_method {
        InnerMethod::NestedSection => nested_section(funcs, opts),
        InnerMethod::GridRefine => grid_refine(funcs, opts),
    };
    if let Some(s) = start {
        let sv = min_of(funcs, s.beta1, s.beta2);
        if sv >= v {
            (b1, b2, v) = (s.beta1, s.beta2, sv);
        }
    }
    if v == f64::NEG_INFINITY {
        return Err(Error::Infeasible);
    }
    Ok(MaxMin {
        beta: PAFactors::from_users(b1, b2),
        value: v,
    })
}

#[derive(Debug, Clone, Copy)]
struct Probe<T> {
    x: f64,
    v: f64,
    extra: T,
}

/// Maximizes a unimodal `f` on `[lo, hi]`: `scan` equally spaced samples,
/// then golden section between the best sample's neighbours.
fn section_max<T: Copy>(
    lo: f64,
    hi: f64,
    scan: usize,
    tol: f64,
    mut f: impl FnMut(f64) -> (f64, T),
) -> Probe<T> {
    let mut eval = |x: f64| {
        let (v, extra) = f(x);
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        Probe { x, v, extra }
    };
    if hi - lo <= 0.0 {
        return eval(lo);
    }
    let scan = scan.max(3);
    let step = (hi - lo) / (scan - 1) as f64;
    let at = |k: usize| {
        if k + 1 == scan {
            hi
        } else {
            lo + k as f64 * step
        }
    };

    let mut best = eval(lo);
    let mut best_k = 0;
    for k in 1..scan {
        let p = eval(at(k));
        if p.v > best.v {
            best = p;
            best_k = k;
        }
    }
    if best.v == f64::NEG_INFINITY || hi - lo <= tol {
        return best;
    }

    let mut a = at(best_k.saturating_sub(1));
    let mut b = at((best_k + 1).min(scan - 1));
    let mut c = eval(b - INV_PHI * (b - a));
    let mut d = eval(a + INV_PHI * (b - a));
    for p in [c, d] {
        if p.v > best.v {
            best = p;
        }
    }
    let mut steps = 0;
    while b - a > tol && steps < MAX_SECTION_STEPS {
        steps += 1;
        let keep_left = if c.v == f64::NEG_INFINITY && d.v == f64::NEG_INFINITY {
            best.x <= c.x
        } else {
            c.v >= d.v
        };
        if keep_left {
            b = d.x;
            d = c;
            c = eval(b - INV_PHI * (b - a));
            if c.v > best.v {
                best = c;
            }
        } else {
            a = c.x;
            c = d;
            d = eval(a + INV_PHI * (b - a));
            if d.v > best.v {
                best = d;
            }
        }
    }
    best
}

fn nested_section(funcs: &[ConcaveFn<'_>], opts: &SolverOptions) -> (f64, f64, f64) {
    let m = opts.box_margin;
    let scan = opts.inner_grid_init;
    let tol = opts.inner_tol;
    let best = section_max(m, 1.0 - 2.0 * m, scan, tol, |b1| {
        let inner = section_max(m, 1.0 - m - b1, scan, tol, |b2| (min_of(funcs, b1, b2), ()));
        (inner.v, inner.x)
    });
    (best.x, best.extra, best.v)
}

fn grid_refine(funcs: &[ConcaveFn<'_>], opts: &SolverOptions) -> (f64, f64, f64) {
    let m = opts.box_margin;
    let n = opts.inner_grid_init.max(2);
    let mut h = (1.0 - 3.0 * m) / (n - 1) as f64;
    let mut best = (m, m, min_of(funcs, m, m));
    for i in 0..n {
        for j in 0..n - i {
            let (b1, b2) = (m + i as f64 * h, m + j as f64 * h);
            let v = min_of(funcs, b1, b2);
            if v > best.2 {
                best = (b1, b2, v);
            }
        }
    }
    let inside = |b1: f64, b2: f64| b1 >= m && b2 >= m && b1 + b2 <= 1.0 - m;
    for _ in 0..opts.inner_refine_rounds {
        if h <= opts.inner_tol {
            break;
        }
        h /= 4.0;
        let (c1, c2) = (best.0, best.1);
        for di in -8i32..=8 {
            for dj in -8i32..=8 {
                let (b1, b2) = (c1 + di as f64 * h, c2 + dj as f64 * h);
                if !inside(b1, b2) {
                    continue;
                }
                let v = min_of(funcs, b1, b2);
                if v > best.2 {
                    best = (b1, b2, v);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn both_methods() -> [SolverOptions; 2] {
        [
            SolverOptions::default(),
            SolverOptions {
                inner_method: InnerMethod::GridRefine,
                ..SolverOptions::default()
            },
        ]
    }

    #[test]
    fn symmetric_maximin_is_the_centroid() {
        let funcs: Vec<ConcaveFn> = vec![
            Box::new(|b1, _| b1),
            Box::new(|_, b2| b2),
            Box::new(|b1, b2| 1.0 - b1 - b2),
        ];
        for opts in both_methods() {
            let r = inner_maximin(&funcs, &opts).unwrap();
            assert!(
                (r.value - 1.0 / 3.0).abs() < 1e-7,
                "{:?}: {r:?}",
                opts.inner_method
            );
            assert!((r.beta.beta1 - 1.0 / 3.0).abs() < 1e-6);
            assert!((r.beta.beta2 - 1.0 / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn monotone_objective_hits_the_boundary() {
        let funcs: Vec<ConcaveFn> = vec![Box::new(|b1, _| 1.0 + b1)];
        for opts in both_methods() {
            let r = inner_maximin(&funcs, &opts).unwrap();
            let edge = 1.0 - 2.0 * opts.box_margin;
            assert!((r.beta.beta1 - edge).abs() < 1e-9, "{r:?}");
            assert!((r.value - 2.0).abs() < 1e-5);
        }
    }

    #[test]
    fn everywhere_infeasible_is_an_error() {
        let funcs: Vec<ConcaveFn> = vec![Box::new(|_, _| f64::NEG_INFINITY)];
        assert!(matches!(
            inner_maximin(&funcs, &SolverOptions::default()),
            Err(Error::Infeasible)
        ));
        assert!(inner_maximin(&[], &SolverOptions::default()).is_err());
    }

    #[test]
    fn tiny_feasible_region_is_found() {
        // feasible only for b1 in [0.5, 0.52]
        let funcs: Vec<ConcaveFn> = vec![Box::new(|b1, b2| {
            if (0.5..=0.52).contains(&b1) {
                b2
            } else {
                f64::NEG_INFINITY
            }
        })];
        let r = inner_maximin(&funcs, &SolverOptions::default()).unwrap();
        assert!(
            (r.beta.beta1 - 0.5).abs() < 1e-6 && (r.value - 0.5).abs() < 2e-6,
            "{r:?}"
        );
    }

    #[test]
    fn warm_start_is_never_lost() {
        let funcs: Vec<ConcaveFn> = vec![Box::new(|b1, b2| -(b1 - 0.2).abs() - (b2 - 0.3).abs())];
        let start = PAFactors::from_users(0.2, 0.3);
        let opts = SolverOptions {
            inner_grid_init: 3,
            inner_refine_rounds: 1,
            inner_method: InnerMethod::GridRefine,
            ..SolverOptions::default()
        };
        let r = inner_maximin_from(&funcs, &opts, Some(start)).unwrap();
        assert_eq!(r.value, 0.0);
    }

    /// Concave quadratic `c - a1 (b1 - x1)^2 - a2 (b2 - x2)^2 + k (b1 - x1)(b2 - x2)`
    /// with `k^2 < 4 a1 a2`, plus a bound on its gradient over the unit square.
    #[derive(Clone, Copy, Debug)]
    struct Quad {
        c: f64,
        a1: f64,
        a2: f64,
        k: f64,
        x1: f64,
        x2: f64,
    }

    impl Quad {
        fn eval(&self, b1: f64, b2: f64) -> f64 {
            let (u, w) = (b1 - self.x1, b2 - self.x2);
            self.c - self.a1 * u * u - self.a2 * w * w + self.k * u * w
        }

        fn grad_bound(&self) -> f64 {
            // |u|, |w| <= 1 + |x| over the square
            let u = 1.0 + self.x1.abs();
            let w = 1.0 + self.x2.abs();
            let g1 = 2.0 * self.a1 * u + self.k.abs() * w;
            let g2 = 2.0 * self.a2 * w + self.k.abs() * u;
            g1.hypot(g2)
        }
    }

    fn random_quad(rng: &mut ChaCha8Rng) -> Quad {
        let a1: f64 = rng.random_range(0.1..3.0);
        let a2 = rng.random_range(0.1..3.0);
        let kmax = 2.0 * (a1 * a2).sqrt() * 0.95;
        Quad {
            c: rng.random_range(-0.5..0.5),
            a1,
            a2,
            k: rng.random_range(-kmax..kmax),
            x1: rng.random_range(-0.5..1.5),
            x2: rng.random_range(-0.5..1.5),
        }
    }

    /// Brute force over the margin simplex at spacing 1/2000. The true
    /// maximizer lies within one grid cell of some grid point, so
    /// `brute <= true max <= brute + L * h * sqrt(2)`.
    fn brute_force(quads: &[Quad; 3], margin: f64) -> (f64, f64) {
        let n = 2000usize;
        let h = (1.0 - 3.0 * margin) / n as f64;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let (b1, b2) = (margin + i as f64 * h, margin + j as f64 * h);
                let v = quads
                    .iter()
                    .map(|q| q.eval(b1, b2))
                    .fold(f64::INFINITY, f64::min);
                best = best.max(v);
            }
        }
        let lip = quads.iter().map(Quad::grad_bound).fold(0.0, f64::max);
        (best, lip * h * std::f64::consts::SQRT_2)
    }

    #[test]
    fn matches_brute_force_on_random_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let opts = SolverOptions::default();
        for case in 0..100 {
            let quads = [
                random_quad(&mut rng),
                random_quad(&mut rng),
                random_quad(&mut rng),
            ];
            let funcs: Vec<ConcaveFn> = quads
                .iter()
                .map(|q| {
                    let q = *q;
                    Box::new(move |b1, b2| q.eval(b1, b2)) as ConcaveFn
                })
                .collect();
            let got = inner_maximin(&funcs, &opts).unwrap();
            let (brute, slack) = brute_force(&quads, opts.box_margin);
            assert!(
                got.value >= brute - 1e-9,
                "case {case}: {} < brute {brute}",
                got.value
            );
            assert!(
                got.value <= brute + slack.max(1e-5),
                "case {case}: {} vs brute {brute} (+{slack})",
                got.value
            );
        }
    }
}
