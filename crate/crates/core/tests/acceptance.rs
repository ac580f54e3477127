//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one `PASS`/`FAIL` line each and exits non-zero if any failed.
//!
//! Run a subset with `cargo test --test acceptance -- 3 8`.

use std::f64::consts::PI;
use std::time::Instant;

use pseudospec::codes::{self, DualCode};
use pseudospec::ensembles::{Ensemble, EnsembleKind, EnsembleSpec};
use pseudospec::experiment::{self, norm_band};
use pseudospec::gf2m::FieldParams;
use pseudospec::independence::{self, Mode};
use pseudospec::laws::{self, LimitLaw};
use pseudospec::matrix::Matrix;
use pseudospec::spectral;
use pseudospec::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn dual(m: u32, delta: u32) -> DualCode {
    let field = FieldParams::new(m).unwrap();
    codes::dual_code(&codes::bch_generator(&field, delta).unwrap()).unwrap()
}

fn pseudo_wigner(m: u32, delta: u32, n: usize, seed: u64) -> Ensemble {
    let spec = EnsembleSpec::wigner(
        EnsembleKind::PseudoWigner,
        n,
        Some(u64::from(delta) - 1),
        seed,
    )
    .unwrap();
    Ensemble::pseudo(spec, dual(m, delta)).unwrap()
}

fn pseudo_mp(m: u32, delta: u32, n: usize, p: usize, seed: u64) -> Ensemble {
    let spec = EnsembleSpec::mp(
        EnsembleKind::PseudoMp,
        n,
        p,
        Some(u64::from(delta) - 1),
        seed,
    )
    .unwrap();
    Ensemble::pseudo(spec, dual(m, delta)).unwrap()
}

fn random_wigner(n: usize, seed: u64) -> Ensemble {
    Ensemble::random(EnsembleSpec::wigner(EnsembleKind::RandomWigner, n, None, seed).unwrap())
        .unwrap()
}

/// Minimum nonzero weight over the full codeword list.
fn min_weight_by_enumeration(code: &codes::CyclicCode) -> usize {
    code.enumerate()
        .unwrap()
        .iter()
        .map(|w| w.weight())
        .filter(|&w| w > 0)
        .min()
        .unwrap()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    let f4 = FieldParams::new(4).unwrap();
    for (delta, want_k, want_d) in [(5, 7, 5), (3, 11, 3)] {
        let c = codes::bch_generator(&f4, delta).unwrap();
        let d = codes::min_distance_exact(&c).unwrap();
        let oracle = min_weight_by_enumeration(&c);
        ok &= c.n() == 15 && c.k() == want_k && d == want_d && oracle == want_d;
        notes.push(format!(
            "δ={delta}: ({}, {}) d={d} enum={oracle}",
            c.n(),
            c.k()
        ));
    }
    let simplex = dual(3, 3);
    let sd = codes::min_distance_exact(simplex.code()).unwrap();
    let so = min_weight_by_enumeration(simplex.code());
    let all_four = simplex
        .code()
        .enumerate()
        .unwrap()
        .iter()
        .all(|w| w.weight() == 0 || w.weight() == 4);
    ok &= simplex.n() == 7 && simplex.k_dual() == 3 && sd == 4 && so == 4 && all_four;
    notes.push(format!(
        "Hamming(7,4) dual: ({}, {}) d={sd} enum={so}",
        simplex.n(),
        simplex.k_dual()
    ));
    let elapsed = t.elapsed().as_secs_f64();
    ok &= elapsed < 1.0;
    outcome(ok, format!("{}; {elapsed:.3}s", notes.join("; ")))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let bch = dual(4, 5);
    let rep = independence::verify_r_independence(&bch, 4, Mode::Exact, 1_000_000, 0).unwrap();
    let by_rank = independence::verify_exact_by_rank(&bch, 4, 1_000_000, 0).unwrap();
    let simplex = dual(3, 3);
    let fail = independence::verify_r_independence(&simplex, 3, Mode::Exact, 1_000_000, 0).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let ok = rep.passed()
        && rep.max_total_variation == 0.0
        && rep.subsets_checked == 1365
        && by_rank.max_total_variation == 0.0
        && !fail.passed()
        && elapsed < 10.0;
    outcome(
        ok,
        format!(
            "(15,7,5) dual r=4: {:?} TV={} over {} subsets; simplex r=3: {:?} TV={} at {:?}; {elapsed:.3}s",
            rep.verdict, rep.max_total_variation, rep.subsets_checked, fail.verdict, fail.max_total_variation,
            fail.failing_subset.unwrap_or_default()
        ),
    )
}

fn criterion_3() -> Outcome {
    let wigner = pseudo_wigner(10, 21, 44, 3);
    let mp = pseudo_mp(10, 21, 40, 25, 3);
    let mut worst_w: f64 = 0.0;
    let mut worst_mp: f64 = 0.0;
    for i in 0..1000 {
        let a = wigner.sample(i).unwrap().spectral_matrix();
        let tr2: f64 = a.as_slice().iter().map(|x| x * x).sum::<f64>() / 44.0;
        worst_w = worst_w.max((tr2 - 0.25).abs());
        let g = mp.sample(i).unwrap().spectral_matrix();
        worst_mp = worst_mp.max((g.trace() / 25.0 - 1.0).abs());
    }
    outcome(
        worst_w <= 1e-12 && worst_mp <= 1e-12,
        format!("1000 instances each; max |Tr(A²)/N − 1/4| = {worst_w:e}, max |Tr(YᵀY)/p − 1| = {worst_mp:e}"),
    )
}

fn criterion_4() -> Outcome {
    let r: f64 = 20.0;
    let mut notes = Vec::new();
    let mut ok = true;
    let cases = [
        ("pseudo-wigner N=44", pseudo_wigner(10, 21, 44, 4), 44usize),
        ("pseudo-mp N=40 p=25", pseudo_mp(10, 21, 40, 25, 4), 40),
    ];
    for (name, ens, n) in cases {
        let law = experiment::law_for(ens.spec()).unwrap();
        let spectra = experiment::sample_spectra(&ens, 0..500).unwrap();
        let bound = (1.0 / r).max(2.0 / (n as f64).sqrt());
        let ks: Vec<f64> = spectra
            .iter()
            .map(|s| spectral::ks_distance(s, &law))
            .collect();
        let frac = ks.iter().filter(|&&k| k <= bound).count() as f64 / ks.len() as f64;
        ok &= frac >= 0.95;
        notes.push(format!(
            "{name}: {:.1}% within {bound:.4} (median KS {:.4})",
            100.0 * frac,
            stats::quantile_sorted(&sorted(&ks), 0.5)
        ));
    }
    outcome(ok, notes.join("; "))
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn criterion_5() -> Outcome {
    let eps = experiment::DEFAULT_EPSILON;
    let mut ok = true;
    let mut notes = Vec::new();
    let families = [
        (
            "wigner",
            pseudo_wigner(10, 21, 44, 5),
            pseudo_wigner(12, 33, 88, 5),
        ),
        (
            "mp",
            pseudo_mp(10, 21, 40, 25, 5),
            pseudo_mp(12, 33, 80, 50, 5),
        ),
    ];
    for (name, small, large) in families {
        let mut devs = Vec::new();
        for ens in [&small, &large] {
            let norms = experiment::sample_norms(ens, 0..2000).unwrap();
            let s = experiment::summarize_norms(ens.spec(), &norms, eps).unwrap();
            let n = ens.spec().n;
            let band = norm_band(n, 5.0, eps);
            let inside = (s.mean - 1.0).abs() <= band;
            ok &= inside;
            let se = stats::std_dev(&s.deviation) / (s.count as f64).sqrt();
            devs.push((s.deviation_mean, se));
            notes.push(format!(
                "{name} N={n}: mean ‖·‖ {:.4} (band ±{band:.3}), dev {:.4}±{se:.4}",
                s.mean, s.deviation_mean
            ));
        }
        // Doubling N must not increase the size of the deviation statistic
        // beyond three combined standard errors.
        let ((d1, se1), (d2, se2)) = (devs[0], devs[1]);
        let no_upward = d2.abs() <= d1.abs() + 3.0 * se1.hypot(se2);
        ok &= no_upward;
        notes.push(format!(
            "{name} trend {}",
            if no_upward { "flat/down" } else { "UP" }
        ));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_6() -> Outcome {
    const COUNT: u64 = 24;
    const N: usize = 1024;
    let mut ok = true;
    let mut notes = Vec::new();
    let ensembles = [
        ("random", random_wigner(N, 6)),
        ("pseudo", pseudo_wigner(20, 33, N, 6)),
    ];
    for (name, ens) in &ensembles {
        let rows = experiment::moments_table(ens, COUNT, 16).unwrap();
        let mut parts = Vec::new();
        for s in [4u32, 8, 16] {
            let row = &rows[s as usize - 1];
            // mean of (1/N)Tr(A^s), so E Tr(A^s) / (√(8/(πs³))·N) is:
            let ratio = row.sample_mean / (8.0 / (PI * f64::from(s).powi(3))).sqrt();
            let limit = laws::to_f64(&laws::semicircle_moment(u64::from(s)))
                / (8.0 / (PI * f64::from(s).powi(3))).sqrt();
            let inside = (0.8..=1.2).contains(&ratio);
            ok &= inside;
            parts.push(format!(
                "s={s} ratio {ratio:.4}{} (N→∞ value {limit:.4})",
                if inside { "" } else { " OUT" }
            ));
        }
        let mut worst_z: f64 = 0.0;
        for s in (1..=15).step_by(2) {
            let row = &rows[s - 1];
            let z = row.sample_mean.abs() / row.std_error.max(f64::MIN_POSITIVE);
            worst_z = worst_z.max(z);
        }
        ok &= worst_z <= 4.0;
        parts.push(format!("odd s≤15 max |mean|/SE {worst_z:.2}"));
        notes.push(format!("{name}: {}", parts.join(", ")));
    }
    outcome(
        ok,
        format!("N={N}, {COUNT} samples each; {}", notes.join("; ")),
    )
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Characteristic polynomial `det(xI − A)` by Faddeev–LeVerrier;
/// coefficients highest degree first.
fn char_poly(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut coeffs = vec![1.0];
    let mut m = Matrix::zeros(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        // M_k = A M_{k−1} + c_{n−k+1} I, c_{n−k} = −Tr(A M_k)/k
        let mut next = a.matmul(&m);
        for i in 0..n {
            next[(i, i)] += c;
        }
        m = next;
        c = -a.matmul(&m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

fn horner(p: &[f64], x: f64) -> (f64, f64) {
    let (mut v, mut d) = (0.0, 0.0);
    for &c in p {
        d = d * x + v;
        v = v * x + c;
    }
    (v, d)
}

/// Real roots of a real-rooted polynomial, descending. Newton from above
/// the largest root converges monotonically; deflate and repeat, then
/// polish on the original polynomial.
fn real_roots(p: &[f64]) -> Vec<f64> {
    let bound = 1.0 + p[1..].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let mut q = p.to_vec();
    let mut roots = Vec::new();
    while q.len() > 1 {
        let mut x = bound;
        for _ in 0..500 {
            let (v, d) = horner(&q, x);
            if d == 0.0 {
                break;
            }
            let step = v / d;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        for _ in 0..5 {
            let (v, d) = horner(p, x);
            if d != 0.0 {
                x -= v / d;
            }
        }
        roots.push(x);
        // synthetic division by (t − x)
        let mut next = Vec::with_capacity(q.len() - 1);
        let mut acc = 0.0;
        for &c in &q[..q.len() - 1] {
            acc = acc * x + c;
            next.push(acc);
        }
        q = next;
    }
    roots
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut recon, mut orth, mut trace, mut frob): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut ok = true;
    for (n, reps) in [(5usize, 100), (50, 70), (200, 30)] {
        for _ in 0..reps {
            let a = random_symmetric(&mut rng, n);
            let (s, q) = spectral::symmetric_eigen(&a, true).unwrap();
            let q = q.unwrap();
            let lambda =
                Matrix::from_fn(n, n, |i, j| if i == j { s.eigenvalues()[i] } else { 0.0 });
            let rel = a
                .sub(&q.matmul(&lambda).matmul(&q.transpose()))
                .frobenius_norm()
                / a.frobenius_norm();
            let o = q
                .transpose()
                .matmul(&q)
                .sub(&Matrix::identity(n))
                .frobenius_norm();
            let sum: f64 = s.eigenvalues().iter().sum();
            let sq: f64 = s.eigenvalues().iter().map(|l| l * l).sum();
            let tr_rel = (sum - a.trace()).abs() / a.frobenius_norm();
            let fr_rel = (sq - a.frobenius_norm().powi(2)).abs() / a.frobenius_norm().powi(2);
            ok &= rel <= 1e-10 && o <= 1e-10 * n as f64 && tr_rel <= 1e-9 && fr_rel <= 1e-9;
            recon = recon.max(rel);
            orth = orth.max(o / n as f64);
            trace = trace.max(tr_rel);
            frob = frob.max(fr_rel);
        }
    }
    let mut oracle: f64 = 0.0;
    for n in 1..=4 {
        for _ in 0..50 {
            let a = random_symmetric(&mut rng, n);
            let mut roots = real_roots(&char_poly(&a));
            roots.sort_by(f64::total_cmp);
            let s = spectral::eigenvalues(&a).unwrap();
            for (x, y) in roots.iter().zip(s.eigenvalues()) {
                oracle = oracle.max((x - y).abs());
            }
        }
    }
    ok &= oracle <= 1e-9;
    outcome(
        ok,
        format!(
            "200 matrices: reconstruction {recon:.2e}, orthogonality/N {orth:.2e}, trace {trace:.2e}, \
             Frobenius {frob:.2e}; char-poly oracle N≤4 max diff {oracle:.2e}"
        ),
    )
}

/// `∫ g(x) dx` over `[c − h, c + h]` via `x = c + h cos θ` and the midpoint
/// rule in θ, which is spectrally accurate for these integrands.
fn theta_midpoint(c: f64, h: f64, g: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let step = PI / panels as f64;
    (0..panels)
        .map(|i| {
            let t = (i as f64 + 0.5) * step;
            g(c + h * t.cos()) * h * t.sin()
        })
        .sum::<f64>()
        * step
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut worst_moment: f64 = 0.0;
    let mut worst_mass: f64 = 0.0;
    let mut worst_cdf: f64 = 0.0;
    for gamma in [0.25, 0.5, 0.625, 1.0] {
        let (a, b) = laws::mp_support(gamma);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let law = LimitLaw::marchenko_pastur(gamma).unwrap();
        let exact_gamma = laws::rational(gamma).unwrap();
        for s in 1..=8u64 {
            let exact = laws::to_f64(&laws::mp_moment(s, &exact_gamma));
            let quad = theta_midpoint(c, h, |x| x.powi(s as i32) * laws::mp_pdf(x, gamma), 4000);
            worst_moment = worst_moment.max((exact - quad).abs() / exact);
        }
        let mass = theta_midpoint(c, h, |x| laws::mp_pdf(x, gamma), 4000);
        worst_mass = worst_mass.max((mass - 1.0).abs());
        for frac in [0.1, 0.37, 0.5, 0.81] {
            let x = a + frac * (b - a);
            // mass below x is the θ-range [θ(x), π]
            let theta_x = ((x - c) / h).clamp(-1.0, 1.0).acos();
            let panels = 4000;
            let step = (PI - theta_x) / panels as f64;
            let cdf: f64 = (0..panels)
                .map(|i| {
                    let t = theta_x + (i as f64 + 0.5) * step;
                    laws::mp_pdf(c + h * t.cos(), gamma) * h * t.sin()
                })
                .sum::<f64>()
                * step;
            worst_cdf = worst_cdf.max((cdf - law.cdf(x)).abs());
        }
    }
    let semi_mass = theta_midpoint(0.0, 1.0, laws::semicircle_pdf, 4000);
    worst_mass = worst_mass.max((semi_mass - 1.0).abs());
    let half = laws::semicircle_cdf(0.0);
    ok &= worst_moment <= 1e-8 && worst_mass <= 1e-8 && half == 0.5 && worst_cdf <= 1e-8;
    outcome(
        ok,
        format!(
            "mp moments s≤8 max rel diff {worst_moment:.2e}; pdf masses max |1 − ∫| {worst_mass:.2e}; \
             semicircle cdf(0) = {half}; mp cdf vs quadrature {worst_cdf:.2e}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let random = experiment::sample_norms(&random_wigner(44, 9), 0..2000).unwrap();
    let pseudo = experiment::sample_norms(&pseudo_wigner(10, 21, 44, 9), 0..2000).unwrap();
    let ks = stats::two_sample_ks(&random, &pseudo);
    outcome(
        ks <= 0.1,
        format!(
            "N=44, 2000 each: two-sample KS {ks:.4}; means {:.4} vs {:.4}",
            stats::mean(&random),
            stats::mean(&pseudo)
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "code construction", criterion_1),
        (2, "dual-code r-independence", criterion_2),
        (3, "exact trace identities", criterion_3),
        (4, "KS band at desk scale", criterion_4),
        (5, "norm concentration", criterion_5),
        (6, "trace moment asymptotics", criterion_6),
        (7, "eigensolver properties", criterion_7),
        (8, "law evaluators", criterion_8),
        (9, "random vs pseudo norm distributions", criterion_9),
    ];
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {id} ({name}): {} [{:.1}s]",
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
