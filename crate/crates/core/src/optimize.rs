//! Box-constrained Nelder–Mead for small dimensions.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Stop when every vertex is within this of the best one (per coordinate,
    /// relative to the initial step).
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 400,
            f_tol: 1e-9,
            x_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub evals: usize,
}

fn clamp<const N: usize>(mut x: [f64; N], lo: &[f64; N], hi: &[f64; N]) -> [f64; N] {
    for i in 0..N {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
    x
}

fn combine<const N: usize>(a: &[f64; N], b: &[f64; N], t: f64) -> [f64; N] {
    // a + t (b - a)
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = a[i] + t * (b[i] - a[i]);
    }
    out
}

/// Minimizes `f` over the box `[lo, hi]` starting from `x0` with initial
/// simplex edge lengths `step`. Points leaving the box are projected back.
pub fn nelder_mead<const N: usize, F: FnMut(&[f64; N]) -> f64>(
    mut f: F,
    x0: [f64; N],
    step: [f64; N],
    lo: [f64; N],
    hi: [f64; N],
    opts: NelderMeadOptions,
) -> Minimum<N> {
    let mut evals = 0usize;
    let mut eval = |x: &[f64; N], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let x0 = clamp(x0, &lo, &hi);
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((x0, eval(&x0, &mut evals)));
    for i in 0..N {
        let mut x = x0;
        x[i] += step[i];
        if x[i] > hi[i] {
            x[i] = x0[i] - step[i];
        }
        let x = clamp(x, &lo, &hi);
        simplex.push((x, eval(&x, &mut evals)));
    }

    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[N].1;
        let spread_ok = (worst - best).abs() <= opts.f_tol;
        let size_ok = simplex[1..].iter().all(|(x, _)| {
            (0..N).all(|i| (x[i] - simplex[0].0[i]).abs() <= opts.x_tol * step[i].abs().max(1e-300))
        });
        if spread_ok && size_ok {
            break;
        }

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for i in 0..N {
                centroid[i] += x[i] / N as f64;
            }
        }
        let worst_x = simplex[N].0;
        let reflected = clamp(combine(&centroid, &worst_x, -1.0), &lo, &hi);
        let fr = eval(&reflected, &mut evals);

        if fr < simplex[0].1 {
            let expanded = clamp(combine(&centroid, &worst_x, -2.0), &lo, &hi);
            let fe = eval(&expanded, &mut evals);
            simplex[N] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (reflected, fr);
        } else {
            let (cx, fc) = if fr < worst {
                let c = clamp(combine(&centroid, &reflected, 0.5), &lo, &hi);
                (c, eval(&c, &mut evals))
            } else {
                let c = combine(&centroid, &worst_x, 0.5);
                (c, eval(&c, &mut evals))
            };
            if fc < worst.min(fr) {
                simplex[N] = (cx, fc);
            } else {
                // shrink towards the best vertex
                let best_x = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let x = combine(&best_x, &v.0, 0.5);
                    *v = (x, eval(&x, &mut evals));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Minimum {
        x: simplex[0].0,
        value: simplex[0].1,
        evals,
    }
}
