//! Acceptance run: one PASS/FAIL line per criterion. Runs without the test
//! harness so the lines always reach the output; exits nonzero on any FAIL.

use std::time::{Duration, Instant};

use quatforms::experiments::{
    default_test_forms, sibony_experiment, skoda_elmir_experiment, ClosednessVerdict, IntegrabilityVerdict,
    QuadratureGrid, SingularFamily, DEFAULT_BETA, DEFAULT_CAUCHY_TOL, DEFAULT_STOKES_TOL,
};
use quatforms::scalar::rat;
use quatforms::suites::{run_suite, SuiteConfig};
use quatforms::vmap::canonical_data;

struct Line {
    id: usize,
    title: &'static str,
    ok: bool,
    detail: String,
    elapsed: Duration,
}

fn suites(names: &[&str], trials: usize) -> (bool, String) {
    let cfg = SuiteConfig { trials, seed: 0, samples: 512 };
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let out = run_suite(name, &cfg).expect("known suite");
        ok &= out.passed();
        parts.push(format!("{} {}/{}", out.name, out.checks - out.failures.len(), out.checks));
        for f in out.failures.iter().take(3) {
            parts.push(format!("[{f}]"));
        }
    }
    (ok, parts.join("; "))
}

fn timed(id: usize, title: &'static str, limit: Option<Duration>, f: impl FnOnce() -> (bool, String)) -> Line {
    let start = Instant::now();
    let (mut ok, mut detail) = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            ok = false;
            detail.push_str(&format!("; over the {}s budget", limit.as_secs()));
        }
    }
    Line { id, title, ok, detail, elapsed }
}

fn exact_identities() -> (bool, String) {
    suites(
        &[
            "nilpotency",
            "rproj-rmap",
            "intertwining",
            "rproj-intertwining",
            "vmap-conjugation",
            "vmap-intertwining",
            "real-structure",
        ],
        200,
    )
}

fn representation_theory() -> (bool, String) {
    suites(&["casimir", "clebsch-gordan", "plus-rank"], 1)
}

fn lambda() -> (bool, String) {
    let (mut ok, mut detail) = suites(&["lambda-two-path"], 1);
    let golden = [(1, rat(2, 1), rat(1, 1)), (2, rat(6, 1), rat(2, 3)), (3, rat(20, 1), rat(2, 5))];
    for (n, lambda, gamma) in golden {
        let d = canonical_data(n).expect("n ≤ 3");
        ok &= d.lambda == lambda && d.gamma == gamma;
        detail.push_str(&format!("; n={n} λ={} γ={}", d.lambda, d.gamma));
    }
    (ok, detail)
}

fn sibony() -> (bool, String) {
    let fam = SingularFamily::point(2, DEFAULT_BETA).expect("family");
    let r = sibony_experiment(&fam, &QuadratureGrid::standard(0)).expect("runs");
    let ok = r.verdict == IntegrabilityVerdict::Consistent && r.relative_change < DEFAULT_CAUCHY_TOL;
    let fit = r.fitted_exponent.map_or("none".into(), |v| format!("{v:.4}"));
    (ok, format!("relative change {:.2e}, shell exponent {fit} (expected {})", r.relative_change, r.expected_exponent))
}

fn skoda() -> (bool, String) {
    let fam = SingularFamily::point(2, DEFAULT_BETA).expect("family");
    let tests = default_test_forms(fam.space(), 0).expect("test forms");
    let r = match skoda_elmir_experiment(&fam, &tests, &QuadratureGrid::standard(0)) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let mut ok = r.verdict == ClosednessVerdict::Consistent && r.tests.len() == 3;
    let mut parts = Vec::new();
    for (i, t) in r.tests.iter().enumerate() {
        let decays = t.decay_exponent.is_some_and(|e| e > 0.0);
        ok &= t.relative_pairing < DEFAULT_STOKES_TOL && decays;
        let exp = t.decay_exponent.map_or("none".into(), |e| format!("{e:.3}"));
        parts.push(format!("form {}: pairing {:.1e}, decay {exp}", i + 1, t.relative_pairing));
    }
    (ok, parts.join("; "))
}

fn main() {
    let lines = [
        timed(1, "exact identity suite, n = 1, 2", Some(Duration::from_secs(60)), exact_identities),
        timed(2, "Casimir spectra and top-weight ranks", Some(Duration::from_secs(30)), representation_theory),
        timed(3, "λ two-path agreement, n = 1, 2, 3", None, lambda),
        timed(4, "weak positivity: exact vs sampled vs (p,p) side", None, || {
            suites(&["positivity-verdicts", "positivity-correspondence"], 1000)
        }),
        timed(5, "q-eigenvalue criterion vs sampled positivity", None, || suites(&["eigenvalue-criterion"], 1000)),
        timed(6, "positivity transfer", None, || suites(&["positivity-transfer"], 1000)),
        timed(7, "Sibony integrability experiment", Some(Duration::from_secs(60)), sibony),
        timed(8, "Skoda–El Mir extension experiment", Some(Duration::from_secs(120)), skoda),
    ];
    let mut all = true;
    for l in &lines {
        all &= l.ok;
        let status = if l.ok { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {} ({:.1}s) {}", l.id, l.title, l.elapsed.as_secs_f64(), l.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
