//! Certificates emitted by the command-line tool.
//!
//! Every certificate carries the data needed to re-check its claim by direct
//! evaluation: witness cycles, subeigenvectors, products and weight vectors.
//! [`verify`] never runs the algorithms that produced them.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use maxjsr::geometry::SetSide;
use maxjsr::jsr::JsrBounds;
use maxjsr::regularity::{ProbeWitness, RegularityProbe};
use maxjsr::spectral::cycle_mean;
use maxjsr::{FrobeniusForm, MatrixSet, MaxMatrix, Tolerance};

use crate::setfile::SetFile;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Mu,
    Jsr,
    Barabanov,
    Finiteness,
    Hausdorff,
    Nonexistence,
    Probe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: Kind,
    pub tool_version: String,
    pub tolerance_used: f64,
    /// Kind-specific record; `null` when the command refused.
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}

/// Why a command refused, with evidence for the refusal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub error: String,
    pub aggregate: MaxMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frobenius_form: Option<FrobeniusForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_proof: Option<MuProof>,
}

impl Certificate {
    pub fn new<P: Serialize>(kind: Kind, tol: Tolerance, payload: &P) -> Certificate {
        Certificate {
            kind,
            tool_version: TOOL_VERSION.into(),
            tolerance_used: tol.value(),
            payload: serde_json::to_value(payload).expect("payloads serialise"),
            diagnostic: None,
        }
    }

    pub fn refusal(kind: Kind, tol: Tolerance, diagnostic: Diagnostic) -> Certificate {
        Certificate {
            kind,
            tool_version: TOOL_VERSION.into(),
            tolerance_used: tol.value(),
            payload: Value::Null,
            diagnostic: Some(diagnostic),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialise")
    }
}

/// Evidence for the value of μ(A).
///
/// For μ > 0: a cycle with geometric mean μ (so μ(A) >= μ) and a positive
/// vector with `A ⊗ x <= μ x` (so μ(A) <= μ). For μ = 0: an ordering of the
/// nodes in which every edge points forward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuProof {
    pub mu: f64,
    pub witness_cycle: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subeigenvector: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acyclic_order: Option<Vec<usize>>,
}

impl MuProof {
    pub fn build(a: &MaxMatrix, tol: Tolerance) -> maxjsr::Result<MuProof> {
        let r = cycle_mean(a, tol);
        if r.mu == 0.0 {
            return Ok(MuProof {
                mu: 0.0,
                witness_cycle: vec![],
                subeigenvector: None,
                acyclic_order: Some(topological_order(a)),
            });
        }
        let star = a.scale(1.0 / r.mu).kleene_star(tol)?;
        let x = star.rows().map(|row| row.iter().copied().fold(0.0, f64::max)).collect();
        Ok(MuProof { mu: r.mu, witness_cycle: r.witness_cycle, subeigenvector: Some(x), acyclic_order: None })
    }

    pub fn check(&self, a: &MaxMatrix, tol: Tolerance) -> Result<(), String> {
        let n = a.n();
        if self.mu == 0.0 {
            let order = self.acyclic_order.as_ref().ok_or("μ = 0 without an acyclic order")?;
            let pos = positions(order, n).ok_or("acyclic order is not a permutation of the nodes")?;
            for i in 0..n {
                for j in 0..n {
                    if a.get(i, j) > 0.0 && pos[i] >= pos[j] {
                        return Err(format!("edge {i} -> {j} points backwards in the acyclic order"));
                    }
                }
            }
            return Ok(());
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(format!("μ = {} is not a finite positive number", self.mu));
        }
        let c = &self.witness_cycle;
        let k = c.len();
        if k == 0 || c.iter().any(|&v| v >= n) || (1..k).any(|t| c[..t].contains(&c[t])) {
            return Err("witness is not an elementary cycle".into());
        }
        let logs: f64 = (0..k).map(|t| a.get(c[t], c[(t + 1) % k]).ln()).sum();
        let mean = (logs / k as f64).exp();
        if !tol.eq(mean, self.mu) {
            return Err(format!("witness cycle has geometric mean {mean}, claimed μ = {}", self.mu));
        }
        let x = self.subeigenvector.as_ref().ok_or("μ > 0 without a subeigenvector")?;
        if x.len() != n || x.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err("subeigenvector is not a positive vector of the right length".into());
        }
        for i in 0..n {
            let ax = (0..n).map(|j| a.get(i, j) * x[j]).fold(0.0, f64::max);
            if !tol.le(ax, self.mu * x[i]) {
                return Err(format!("(A ⊗ x)_{i} = {ax} exceeds μ x_{i} = {}", self.mu * x[i]));
            }
        }
        Ok(())
    }
}

fn positions(order: &[usize], n: usize) -> Option<Vec<usize>> {
    let mut pos = vec![usize::MAX; n];
    if order.len() != n {
        return None;
    }
    for (p, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return None;
        }
        pos[v] = p;
    }
    Some(pos)
}

fn topological_order(a: &MaxMatrix) -> Vec<usize> {
    let n = a.n();
    let mut indeg: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| a.get(i, j) > 0.0).count()).collect();
    let mut ready: Vec<usize> = (0..n).rev().filter(|&j| indeg[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop() {
        order.push(i);
        for j in (0..n).rev() {
            if a.get(i, j) > 0.0 {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.push(j);
                }
            }
        }
    }
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuPayload {
    pub matrix: String,
    pub rows: MaxMatrix,
    pub proof: MuProof,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsrPayload {
    pub set: SetFile,
    pub aggregate: MaxMatrix,
    pub proof: MuProof,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsClaim>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsClaim {
    pub bounds: JsrBounds,
    /// Weights of the norm used for the upper bound.
    pub weights: Vec<f64>,
    pub lower_proof: MuProof,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarabanovPayload {
    pub set: SetFile,
    pub aggregate: MaxMatrix,
    pub jsr: MuProof,
    /// `ν(x) = max_i v_i |x_i|`.
    pub weights: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub extremal: bool,
    pub barabanov: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitenessPayload {
    pub set: SetFile,
    pub aggregate: MaxMatrix,
    pub jsr: MuProof,
    pub region_cycle: Vec<usize>,
    /// `A_1, ..., A_k`; the product is `A_k ⊗ ··· ⊗ A_1`.
    pub matrix_names: Vec<String>,
    pub k: usize,
    pub product: MaxMatrix,
    pub product_proof: MuProof,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffPayload {
    pub left: SetFile,
    pub right: SetFile,
    pub distance: f64,
    pub argmax_side: SetSide,
    pub argmax_member: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub class: usize,
    pub class_nodes: Vec<usize>,
    pub eigenvalue: f64,
    /// `S ⊗ x = λ x` with `λ < μ(S)`.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonexistencePayload {
    pub set: SetFile,
    pub aggregate: MaxMatrix,
    pub jsr: MuProof,
    pub frobenius_form: FrobeniusForm,
    pub obstruction: Option<Obstruction>,
    /// Weights of a Barabanov norm, present when S is irreducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barabanov_weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeCenter {
    Matrix { rows: MaxMatrix },
    Set { set: SetFile },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePayload {
    pub center: ProbeCenter,
    pub probe: RegularityProbe,
    /// μ proofs for the two witnesses (their aggregates for sets).
    pub witness_proofs: Option<(MuProof, MuProof)>,
}

fn payload<P: for<'de> Deserialize<'de>>(cert: &Certificate) -> Result<P, String> {
    serde_json::from_value(cert.payload.clone()).map_err(|e| format!("malformed payload: {e}"))
}

fn to_set(f: &SetFile) -> Result<MatrixSet, String> {
    f.to_set().map_err(|e| format!("embedded set: {e}"))
}

fn check_aggregate(psi: &MatrixSet, claimed: &MaxMatrix) -> Result<(), String> {
    let n = psi.n();
    if claimed.n() != n {
        return Err("aggregate has the wrong dimension".into());
    }
    for i in 0..n {
        for j in 0..n {
            let s = psi.matrices().map(|a| a.get(i, j)).fold(0.0, f64::max);
            if s != claimed.get(i, j) {
                return Err(format!("aggregate entry ({i}, {j}) is {}, members give {s}", claimed.get(i, j)));
            }
        }
    }
    Ok(())
}

/// Left-to-right product of the listed members.
fn word_product(psi: &MatrixSet, word: &[usize]) -> Result<MaxMatrix, String> {
    let members = psi.members();
    let mut p = MaxMatrix::identity(psi.n());
    for &w in word {
        let a = &members.get(w).ok_or_else(|| format!("member index {w} out of range"))?.1;
        p = p.max_mul(a).map_err(|e| e.to_string())?;
    }
    Ok(p)
}

fn induced(a: &MaxMatrix, v: &[f64]) -> f64 {
    let n = a.n();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if a.get(i, j) > 0.0 {
                best = best.max(v[i] * a.get(i, j) / v[j]);
            }
        }
    }
    best
}

fn check_weights(v: &[f64], n: usize) -> Result<(), String> {
    if v.len() != n || v.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err("weights must be n positive finite numbers".into());
    }
    Ok(())
}

/// `max_i v_i s_ij = μ v_j` for every j: the weighted max norm is extremal
/// and Barabanov for any set with aggregate S.
fn check_barabanov_closed_form(s: &MaxMatrix, v: &[f64], mu: f64, tol: Tolerance) -> Result<(), String> {
    check_weights(v, s.n())?;
    for j in 0..s.n() {
        let lhs = (0..s.n()).map(|i| v[i] * s.get(i, j)).fold(0.0, f64::max);
        if !tol.eq(lhs, mu * v[j]) {
            return Err(format!("column {j}: max_i v_i s_ij = {lhs}, μ v_j = {}", mu * v[j]));
        }
    }
    Ok(())
}

fn matrices_close(a: &MaxMatrix, b: &MaxMatrix, tol: Tolerance) -> bool {
    a.n() == b.n() && a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| tol.eq(*x, *y))
}

/// Re-checks a certificate. `tol` overrides the tolerance it records.
pub fn verify(cert: &Certificate, tol: Option<Tolerance>) -> Result<(), String> {
    let tol = match tol {
        Some(t) => t,
        None => Tolerance::new(cert.tolerance_used).map_err(|e| e.to_string())?,
    };
    if let Some(d) = &cert.diagnostic {
        return verify_diagnostic(d, tol);
    }
    match cert.kind {
        Kind::Mu => {
            let p: MuPayload = payload(cert)?;
            p.proof.check(&p.rows, tol)
        }
        Kind::Jsr => {
            let p: JsrPayload = payload(cert)?;
            let psi = to_set(&p.set)?;
            check_aggregate(&psi, &p.aggregate)?;
            p.proof.check(&p.aggregate, tol)?;
            if let Some(b) = &p.bounds {
                verify_bounds(&psi, b, p.proof.mu, tol)?;
            }
            Ok(())
        }
        Kind::Barabanov => {
            let p: BarabanovPayload = payload(cert)?;
            let psi = to_set(&p.set)?;
            check_aggregate(&psi, &p.aggregate)?;
            p.jsr.check(&p.aggregate, tol)?;
            if !(p.extremal && p.barabanov) {
                return Err("certificate records a failed check".into());
            }
            check_barabanov_closed_form(&p.aggregate, &p.weights, p.jsr.mu, tol)
        }
        Kind::Finiteness => {
            let p: FinitenessPayload = payload(cert)?;
            let psi = to_set(&p.set)?;
            check_aggregate(&psi, &p.aggregate)?;
            p.jsr.check(&p.aggregate, tol)?;
            if p.k != p.matrix_names.len() || p.k == 0 || p.k > psi.n() {
                return Err(format!("k = {} is not a product length in 1..={}", p.k, psi.n()));
            }
            let mut word = Vec::with_capacity(p.k);
            for name in p.matrix_names.iter().rev() {
                word.push(psi.members().iter().position(|(m, _)| m == name).ok_or(format!("unknown member {name}"))?);
            }
            let product = word_product(&psi, &word)?;
            if !matrices_close(&product, &p.product, tol) {
                return Err("recorded product does not match the named members".into());
            }
            p.product_proof.check(&product, tol)?;
            let expected = p.jsr.mu.powi(p.k as i32);
            if !tol.eq(p.product_proof.mu, expected) {
                return Err(format!("μ(product) = {}, μ(Ψ)^k = {expected}", p.product_proof.mu));
            }
            Ok(())
        }
        Kind::Hausdorff => {
            let p: HausdorffPayload = payload(cert)?;
            let (a, b) = (to_set(&p.left)?, to_set(&p.right)?);
            let d = direct_hausdorff(&a, &b)?;
            if !tol.eq(d, p.distance) {
                return Err(format!("distance recomputes to {d}, recorded {}", p.distance));
            }
            Ok(())
        }
        Kind::Nonexistence => {
            let p: NonexistencePayload = payload(cert)?;
            let psi = to_set(&p.set)?;
            check_aggregate(&psi, &p.aggregate)?;
            p.jsr.check(&p.aggregate, tol)?;
            check_form(&p.aggregate, &p.frobenius_form)?;
            match (&p.obstruction, &p.barabanov_weights) {
                (Some(o), _) => check_obstruction(&p.aggregate, o, p.jsr.mu, tol),
                (None, Some(v)) => check_barabanov_closed_form(&p.aggregate, v, p.jsr.mu, tol),
                (None, None) => Ok(()),
            }
        }
        Kind::Probe => {
            let p: ProbePayload = payload(cert)?;
            verify_probe(&p, tol)
        }
    }
}

fn verify_bounds(psi: &MatrixSet, b: &BoundsClaim, mu: f64, tol: Tolerance) -> Result<(), String> {
    let m = b.bounds.m;
    if m == 0 || b.bounds.lower_word.len() != m as usize || b.bounds.upper_word.len() != m as usize {
        return Err("bound witnesses must be words of length m".into());
    }
    check_weights(&b.weights, psi.n())?;
    let root = 1.0 / m as f64;
    let low = word_product(psi, &b.bounds.lower_word)?;
    b.lower_proof.check(&low, tol)?;
    if !tol.eq(b.lower_proof.mu.powf(root), b.bounds.lower) {
        return Err("lower bound does not match its witness product".into());
    }
    let high = word_product(psi, &b.bounds.upper_word)?;
    if !tol.eq(induced(&high, &b.weights).powf(root), b.bounds.upper) {
        return Err("upper bound does not match its witness product".into());
    }
    if !(tol.le(b.bounds.lower, mu) && tol.le(mu, b.bounds.upper)) {
        return Err(format!("bracket [{}, {}] does not contain μ = {mu}", b.bounds.lower, b.bounds.upper));
    }
    Ok(())
}

fn direct_hausdorff(a: &MatrixSet, b: &MatrixSet) -> Result<f64, String> {
    if a.n() != b.n() {
        return Err("sets have different dimensions".into());
    }
    let one_way = |x: &MatrixSet, y: &MatrixSet| {
        x.matrices()
            .map(|p| y.matrices().map(|q| p.dist_inf(q).expect("same dimension")).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(one_way(a, b).max(one_way(b, a)))
}

fn check_form(a: &MaxMatrix, form: &FrobeniusForm) -> Result<(), String> {
    let n = a.n();
    let flat: Vec<usize> = form.classes.iter().flatten().copied().collect();
    if positions(&flat, n).is_none() || flat != form.permutation {
        return Err("Frobenius classes do not partition the nodes in permutation order".into());
    }
    if !form.is_block_lower_triangular(a) {
        return Err("recorded form is not block lower triangular".into());
    }
    Ok(())
}

fn check_obstruction(s: &MaxMatrix, o: &Obstruction, mu: f64, tol: Tolerance) -> Result<(), String> {
    let n = s.n();
    let x = &o.vector;
    if x.len() != n || x.iter().any(|&v| !(v.is_finite() && v >= 0.0)) || x.iter().all(|&v| v == 0.0) {
        return Err("obstruction vector must be nonnegative and nonzero".into());
    }
    for i in 0..n {
        let sx = (0..n).map(|j| s.get(i, j) * x[j]).fold(0.0, f64::max);
        if !tol.eq(sx, o.eigenvalue * x[i]) {
            return Err(format!("(S ⊗ x)_{i} = {sx}, λ x_{i} = {}", o.eigenvalue * x[i]));
        }
    }
    if o.eigenvalue >= mu || tol.eq(o.eigenvalue, mu) {
        return Err(format!("eigenvalue {} is not below μ(S) = {mu}", o.eigenvalue));
    }
    Ok(())
}

fn verify_diagnostic(d: &Diagnostic, tol: Tolerance) -> Result<(), String> {
    if let Some(form) = &d.frobenius_form {
        check_form(&d.aggregate, form)?;
        if form.classes.len() < 2 {
            return Err("a single class does not show reducibility".into());
        }
    }
    if let Some(p) = &d.mu_proof {
        p.check(&d.aggregate, tol)?;
    }
    if d.frobenius_form.is_none() && d.mu_proof.is_none() {
        return Err("diagnostic carries no evidence".into());
    }
    Ok(())
}

fn verify_probe(p: &ProbePayload, tol: Tolerance) -> Result<(), String> {
    let probe = &p.probe;
    let (Some(witness), Some((px, py))) = (&probe.witness, &p.witness_proofs) else {
        return if probe.max_ratio == 0.0 { Ok(()) } else { Err("positive ratio without a witness".into()) };
    };
    let r = probe.radius * (1.0 + tol.value()) + tol.value();
    let near = |x: &MaxMatrix, c: &MaxMatrix, h: f64| x.dist_max(c).is_ok_and(|d| d <= h);
    let (mx, my, d) = match (witness, &p.center) {
        (ProbeWitness::Matrices { x, y }, ProbeCenter::Matrix { rows }) => {
            if !(near(x, rows, r) && near(y, rows, r)) {
                return Err("witness matrices lie outside the probe radius".into());
            }
            px.check(x, tol)?;
            py.check(y, tol)?;
            (px.mu, py.mu, x.dist_inf(y).map_err(|e| e.to_string())?)
        }
        (ProbeWitness::Sets { x, y }, ProbeCenter::Set { set }) => {
            let c = to_set(set)?;
            let h = r / c.n() as f64;
            for w in [x, y] {
                if w.len() != c.len() || !w.matrices().zip(c.matrices()).all(|(a, b)| near(a, b, h)) {
                    return Err("witness sets lie outside the probe radius".into());
                }
            }
            let agg = |s: &MatrixSet| {
                MaxMatrix::new(
                    s.n(),
                    (0..s.n() * s.n()).map(|k| s.matrices().map(|a| a.as_slice()[k]).fold(0.0, f64::max)).collect(),
                )
                .expect("finite")
            };
            px.check(&agg(x), tol)?;
            py.check(&agg(y), tol)?;
            (px.mu, py.mu, direct_hausdorff(x, y)?)
        }
        _ => return Err("witness and centre kinds differ".into()),
    };
    let q = (mx - my).abs() / d.powf(probe.alpha);
    if !tol.eq(q, probe.max_ratio) {
        return Err(format!("witness quotient {q}, recorded max_ratio {}", probe.max_ratio));
    }
    Ok(())
}
