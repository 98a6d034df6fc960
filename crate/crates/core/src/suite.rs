//! Runs the library's structural invariants against a single matrix set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{hausdorff, hull_membership, HullMode};
use crate::jsr::{
    aggregate, barabanov_nonexistence, barabanov_norm, check_budget, conv_invariance_check, finiteness_product,
    for_each_product, induced_norm, jsr, jsr_bounds, verify_barabanov, verify_barabanov_at_level, verify_extremal,
    MatrixSet, DEFAULT_SAMPLES,
};
use crate::maxcore::{MaxMatrix, MaxPermutation, Tolerance};
use crate::oracles::{bf_cycle_mean, bf_gsr_truncation};
use crate::spectral::{self, is_irreducible, principal_eigenpair, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
}

impl Tally {
    pub fn of(outcomes: &[CheckOutcome]) -> Tally {
        let mut t = Tally::default();
        for o in outcomes {
            match o.status {
                CheckStatus::Pass => t.pass += 1,
                CheckStatus::Fail => t.fail += 1,
                CheckStatus::Skip => t.skip += 1,
            }
        }
        t
    }
}

struct Recorder(Vec<CheckOutcome>);

impl Recorder {
    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        self.0.push(CheckOutcome { name: name.into(), status, detail: detail.into() });
    }

    fn skip(&mut self, name: &str, why: impl Into<String>) {
        self.0.push(CheckOutcome { name: name.into(), status: CheckStatus::Skip, detail: why.into() });
    }
}

fn random_perm(rng: &mut impl Rng, n: usize) -> MaxPermutation {
    let mut sigma: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        sigma.swap(i, rng.random_range(0..=i));
    }
    let w = (0..n).map(|_| 10f64.powf(rng.random_range(-1.0..=1.0))).collect();
    MaxPermutation::new(sigma, w).expect("valid permutation")
}

fn nudge(psi: &MatrixSet, rng: &mut impl Rng, h: f64) -> MatrixSet {
    psi.map(|a| {
        let data = a.as_slice().iter().map(|&x| (x + h * rng.random_range(-1.0..=1.0)).max(0.0)).collect();
        MaxMatrix::new(a.n(), data).expect("finite")
    })
}

/// Evaluates every invariant that applies to `psi`; inapplicable ones are
/// reported as skipped.
pub fn invariant_suite(psi: &MatrixSet, seed: u64, tol: Tolerance) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Recorder(Vec::new());
    let n = psi.n();
    let s = aggregate(psi);
    let mu = jsr(psi);
    let irreducible = is_irreducible(&s);

    let transpose_ok = psi.matrices().chain([&s]).all(|a| spectral::mu(a) == spectral::mu(&a.transpose()));
    r.check("transpose_invariance", transpose_ok, "μ(A) = μ(Aᵀ) for members and S");

    let power_ok = (1..=4).all(|k| tol.rel_eq(spectral::mu(&s.max_power(k)), mu.powi(k as i32)) || mu == 0.0);
    r.check("power_law", power_ok, "μ(S^k) = μ(S)^k for k ≤ 4");

    if n <= 7 {
        let mut worst = 0.0f64;
        for a in psi.matrices().chain([&s]) {
            let fast = spectral::mu(a);
            let slow = bf_cycle_mean(a).map(|b| b.mu).unwrap_or(f64::NAN);
            worst = worst.max((fast - slow).abs() / fast.abs().max(slow.abs()).max(f64::MIN_POSITIVE));
        }
        r.check("oracle_equivalence", worst <= 1e-12, format!("max relative gap {worst:.3e}"));
    } else {
        r.skip("oracle_equivalence", "dimension above 7");
    }

    match principal_eigenpair(&s, Side::Right, tol) {
        Ok(e) => {
            let ax = s.apply(&e.vector).expect("dimension");
            let ok = e.vector.is_strictly_positive()
                && ax.as_slice().iter().zip(e.vector.as_slice()).all(|(a, b)| tol.eq(*a, e.lambda * b));
            r.check("eigen_consistency", ok, "S ⊗ v = μ v with v ≫ 0");
        }
        Err(e) => r.skip("eigen_consistency", e.to_string()),
    }

    let p = random_perm(&mut rng, n);
    let conj = psi.map(|a| p.conjugate(a).expect("dimension"));
    r.check("similarity_invariance", tol.eq(jsr(&conj), mu), "μ(PΨP⁻¹) = μ(Ψ)");

    let c = 10f64.powf(rng.random_range(-1.0..=1.0));
    r.check("homogeneity", tol.eq(jsr(&psi.scale(c)), c * mu), format!("μ(cΨ) = cμ(Ψ), c = {c:.4}"));

    for m in 1..=5u32 {
        if check_budget(psi.len(), m, 100_000).is_err() || n > 9 {
            break;
        }
        let (lo, hi) = bf_gsr_truncation(psi, m).expect("within budget");
        let name = format!("sandwich_m{m}");
        r.check(&name, tol.le(lo, mu) && tol.le(mu, hi), format!("{lo:.6} ≤ {mu:.6} ≤ {hi:.6}"));
    }

    let depth5 = (n <= 9).then(|| check_budget(psi.len(), 5, 100_000).ok()).flatten();
    if let (Some(_), Ok((_, u1)), Ok((_, u5))) = (depth5, bf_gsr_truncation(psi, 1), bf_gsr_truncation(psi, 5)) {
        r.check(
            "berger_wang_truncation",
            tol.le(mu, u5) && tol.le(u5 - mu, u1 - mu),
            format!("u1 = {u1:.6}, u5 = {u5:.6}"),
        );
    } else {
        r.skip("berger_wang_truncation", "product budget");
    }

    let witness = barabanov_nonexistence(psi, tol);
    match barabanov_norm(psi, tol) {
        Ok(nu) => {
            let ext = verify_extremal(psi, &nu, tol).map(|c| c.holds).unwrap_or(false);
            let bar = verify_barabanov(psi, &nu, DEFAULT_SAMPLES, seed, tol).map(|c| c.holds).unwrap_or(false);
            r.check("barabanov_norm", ext && bar, "constructed norm is extremal and Barabanov");
            let eta = psi.matrices().map(|a| induced_norm(a, &nu).expect("dimension")).fold(0.0, f64::max);
            r.check("norm_characterization", tol.eq(eta, mu), format!("max η_ν = {eta:.9}"));
            let off = mu * (1.0 + 1e-3) + 1e-3;
            let conv = verify_barabanov_at_level(psi, &nu, off, 8, seed, tol).map(|c| c.holds).unwrap_or(true);
            r.check("barabanov_converse", !conv, "no other level is accepted");
            if let Ok(b) = jsr_bounds(psi, 1, &nu) {
                r.check("bounds_with_barabanov", tol.le(b.lower, mu) && tol.eq(b.upper, mu), "depth-1 bracket");
            }
            r.check("nonexistence_consistency", matches!(witness, Ok(None)), "irreducible sets have no obstruction");
        }
        Err(e) => {
            r.skip("barabanov_norm", e.to_string());
            if let Ok(Some(w)) = &witness {
                let sx = s.apply(&w.vector).expect("dimension");
                let ok = w.eigenvalue < mu
                    && w.vector.max_entry() > 0.0
                    && sx.as_slice().iter().zip(w.vector.as_slice()).all(|(a, b)| tol.eq(*a, w.eigenvalue * b));
                r.check("nonexistence_witness", ok, format!("S ⊗ x = {} x", w.eigenvalue));
            }
        }
    }

    if mu > 0.0 {
        match finiteness_product(psi, tol) {
            Ok(cert) => {
                let got = spectral::mu(&cert.product).powf(1.0 / cert.k as f64);
                r.check("finiteness", cert.k <= n && tol.rel_eq(got, mu), format!("k = {}", cert.k));
            }
            Err(e) => r.check("finiteness", false, e.to_string()),
        }

        if let Ok(star) = s.scale(1.0 / mu).kleene_star(tol) {
            let cap = star.max_entry();
            let normalized = psi.scale(1.0 / mu);
            let mut ok = true;
            for depth in 1..=6u32 {
                if for_each_product(&normalized, depth, 20_000, |_, b| ok &= tol.le(b.max_entry(), cap)).is_err() {
                    break;
                }
            }
            r.check("normalized_boundedness", ok, format!("entries ≤ {cap:.6}"));
        }
    } else {
        r.skip("finiteness", "μ(Ψ) = 0");
    }

    r.check("conv_invariance", conv_invariance_check(psi, 20, seed, tol), "max-convex combinations keep μ");

    let gens: Vec<Vec<f64>> = psi.matrices().map(|a| a.as_slice().to_vec()).collect();
    let ok = hull_membership(s.as_slice(), &gens, HullMode::Conv, tol)
        .map(|c| c.inside && c.coefficients.is_some_and(|a| a.iter().all(|&x| x == 1.0)))
        .unwrap_or(false);
    r.check("aggregate_membership", ok, "S ∈ conv⊗(Ψ) with unit coefficients");

    let scale = s.max_entry().max(1.0) * 0.05;
    let phi = nudge(psi, &mut rng, scale);
    let chi = nudge(psi, &mut rng, scale);
    let h_pf = hausdorff(psi, &phi).expect("dimension").distance;
    let h_fp = hausdorff(&phi, psi).expect("dimension").distance;
    let h_pc = hausdorff(psi, &chi).expect("dimension").distance;
    let h_fc = hausdorff(&phi, &chi).expect("dimension").distance;
    r.check("hausdorff_metric", h_pf == h_fp && tol.le(h_pc, h_pf + h_fc), "symmetry and triangle inequality");
    let smap = aggregate(psi).dist_max(&aggregate(&phi)).expect("dimension");
    r.check("aggregate_lipschitz", tol.le(smap, h_pf), format!("max |S(Ψ) − S(Φ)| = {smap:.6} ≤ H = {h_pf:.6}"));

    if irreducible {
        if let (Ok(a), Ok(b)) = (barabanov_norm(psi, tol), barabanov_norm(&phi, tol)) {
            let c = crate::geometry::eccentricity(&a).0.max(crate::geometry::eccentricity(&b).0);
            let gap = (jsr(&phi) - mu).abs();
            r.check("lipschitz_transfer", gap <= c * h_pf + 1e-8, format!("|Δμ| = {gap:.3e} ≤ {c:.3} · {h_pf:.3e}"));
        }
    }

    r.0
}
