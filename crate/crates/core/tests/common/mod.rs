//! Independent reference computations, written without the library's
//! profile enumeration or closed forms where a direct route exists.
#![allow(dead_code)]

/// All type-index vectors of length `n` over `m` types.
pub fn vectors(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..m).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

/// Multisets as count vectors, with multinomial probabilities computed
/// through log-factorials.
pub fn multisets(n: usize, probs: &[f64]) -> Vec<(Vec<usize>, f64)> {
    let m = probs.len();
    let mut out = Vec::new();
    let mut counts = vec![0usize; m];
    fn rec(k: usize, left: usize, counts: &mut Vec<usize>, probs: &[f64], out: &mut Vec<(Vec<usize>, f64)>) {
        let m = counts.len();
        if k == m - 1 {
            counts[k] = left;
            let n: usize = counts.iter().sum();
            let mut logw = ln_fact(n);
            let mut p = 1.0;
            for (j, &c) in counts.iter().enumerate() {
                logw -= ln_fact(c);
                if c > 0 {
                    p *= probs[j].powi(c as i32);
                }
            }
            out.push((counts.clone(), logw.exp() * p));
            return;
        }
        for c in 0..=left {
            counts[k] = c;
            rec(k + 1, left - c, counts, probs, out);
        }
    }
    rec(0, n, &mut counts, probs, &mut out);
    out
}

fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

pub fn u0(mu: f64, d: &[f64], t: &[f64]) -> f64 {
    let lam: f64 = d.iter().sum();
    if lam >= mu {
        return 0.0;
    }
    let n = d.len() as f64;
    let logs: f64 = d.iter().zip(t).map(|(x, ti)| ti / n * x.ln()).sum();
    (mu - lam) * logs.exp()
}

pub fn ui(mu: f64, x: f64, t: f64, others: f64, extra: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    x.powf(t) * (mu - others - x - extra)
}

/// Optimum obtained by maximizing `ln U0`: stationarity gives
/// `t_i / (n d_i) = 1 / (mu - sum d)`, i.e. `d_i = t_i r / n` with the
/// residual `r` fixed by `r = mu - r sum t / n`.
pub fn optimum(mu: f64, t: &[f64]) -> Vec<f64> {
    let n = t.len() as f64;
    let r = mu / (1.0 + t.iter().sum::<f64>() / n);
    t.iter().map(|ti| ti * r / n).collect()
}

/// Expanded type values of a multiset.
pub fn expand(counts: &[usize], values: &[f64]) -> Vec<f64> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat_n(values[k], c))
        .collect()
}

/// Expected manager utility of compliant users at the optimum.
pub fn max_efficiency(mu: f64, n: usize, values: &[f64], probs: &[f64]) -> f64 {
    multisets(n, probs)
        .into_iter()
        .map(|(c, p)| {
            let t = expand(&c, values);
            p * u0(mu, &optimum(mu, &t), &t)
        })
        .sum()
}

/// Golden-section maximizer of a unimodal function on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
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

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
