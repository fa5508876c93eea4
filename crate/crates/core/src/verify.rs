//! End-to-end verification pipeline and certificate emission.
//!
//! Every check lives in [`REGISTRY`]; [`run_pipeline`] walks the registry in
//! order, so a check cannot exist without being run and recorded.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{OctoError, Result};
use crate::exterior::{
    ftilde_matrix, g2_equivariant, hom_space, invariance_witness, is_invariant, kernel_u, lambda2,
    quotient_action, spin, SubspaceU, DIM_V, U_DIM, WEDGE_DIM,
};
use crate::field::FieldPrime;
use crate::g2::{count_triples, is_automorphism, G2Element, G2Sampler};
use crate::group::{
    lift_automorphism, structure_report, verify_group_axioms, PGroupContext, PGroupElement,
};
use crate::linalg::{FpMatrix, FpVector, Subspace};
use crate::octonion::{table, Octonion};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest p accepted by the full pipeline.
pub const PIPELINE_MAX_PRIME: u32 = 13;

pub const DEFAULT_ISOMETRY_ATTEMPTS: u64 = 10_000;

/// |G2(3)| = 3^6 (3^6 - 1)(3^2 - 1).
pub const G2_3_ORDER: u64 = 4_245_696;

const ALTERNATIVITY_PAIRS: usize = 10_000;
const GROUP_SAMPLES: usize = 10_000;
const LIFT_PAIRS: usize = 1_000;
const SPIN_OUTSIDE: usize = 100;
const SPIN_INSIDE: usize = 20;
const SPIN_GENERATORS: usize = 20;
const HOM_GENERATORS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    PaperTrusted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub samples: usize,
    pub witness: Option<String>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: String,
    pub p: u32,
    pub seed: u64,
    pub samples: usize,
    pub u_digest: String,
    pub matrices_digest: String,
    pub checks: Vec<CheckRecord>,
}

impl Certificate {
    pub fn all_pass(&self) -> bool {
        self.checks.len() == REGISTRY.len()
            && self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The certificate with every timing field zeroed.
    pub fn without_timings(&self) -> Certificate {
        let mut c = self.clone();
        for r in &mut c.checks {
            r.runtime_ms = 0;
        }
        c
    }
}

/// Structural validation of a certificate document.
pub fn validate_certificate_json(v: &serde_json::Value) -> std::result::Result<(), String> {
    let obj = v.as_object().ok_or("certificate is not an object")?;
    for key in ["version", "u_digest", "matrices_digest"] {
        obj.get(key)
            .and_then(|x| x.as_str())
            .ok_or(format!("missing string field {key}"))?;
    }
    for key in ["p", "seed", "samples"] {
        obj.get(key)
            .and_then(|x| x.as_u64())
            .ok_or(format!("missing integer field {key}"))?;
    }
    let checks = obj
        .get("checks")
        .and_then(|x| x.as_array())
        .ok_or("missing checks array")?;
    let mut seen = std::collections::BTreeSet::new();
    for c in checks {
        let c = c.as_object().ok_or("check is not an object")?;
        let name = c
            .get("name")
            .and_then(|x| x.as_str())
            .ok_or("check without name")?;
        if !seen.insert(name.to_string()) {
            return Err(format!("check {name} listed twice"));
        }
        let status = c
            .get("status")
            .and_then(|x| x.as_str())
            .ok_or("check without status")?;
        if !["pass", "fail", "paper-trusted"].contains(&status) {
            return Err(format!("unknown status {status}"));
        }
        if status == "paper-trusted" && !TRUSTED.contains(&name) {
            return Err(format!("{name} may not be paper-trusted"));
        }
        c.get("samples")
            .and_then(|x| x.as_u64())
            .ok_or("check without samples")?;
        c.get("runtime_ms")
            .and_then(|x| x.as_u64())
            .ok_or("check without runtime_ms")?;
        match c.get("witness") {
            Some(serde_json::Value::Null) | Some(serde_json::Value::String(_)) => {}
            _ => return Err(format!("{name}: witness must be null or a string")),
        }
    }
    Ok(())
}

/// SHA-256 of the compact JSON serialisation.
pub fn json_digest<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serialisable");
    hex::encode(Sha256::digest(&bytes))
}

/// A β-reflection `x -> x - (2 β(x,v) / β(v,v)) v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReflectionWitness {
    pub v: FpVector,
    pub matrix: FpMatrix,
}

impl ReflectionWitness {
    pub fn new(v: FpVector) -> Result<Self> {
        let p = v.p;
        let n = v.len();
        let c = p.mul(2, p.inv(v.dot(&v))?);
        let mut m = FpMatrix::identity(p, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, p.sub(m.get(i, j), p.mul(c, p.mul(v[i], v[j]))));
            }
        }
        Ok(ReflectionWitness { v, matrix: m })
    }
}

/// `m mᵀ = I` and `det m = 1`.
pub fn is_special_isometry(m: &FpMatrix) -> bool {
    m.is_square()
        && m.mul(&m.transpose())
            .map(|g| g == FpMatrix::identity(m.p, m.rows))
            .unwrap_or(false)
        && m.det().map(|d| d == 1).unwrap_or(false)
}

#[derive(Clone, Debug)]
pub struct NonStabilisingIsometry {
    pub first: ReflectionWitness,
    pub second: ReflectionWitness,
    pub matrix: FpMatrix,
    /// Basis row of `U` whose image leaves `U`.
    pub witness_row: usize,
    pub attempts: u64,
}

/// Search products of two reflections for a determinant-one isometry whose
/// exterior square moves `U`.
pub fn find_nonstabilizing_isometry(
    p: FieldPrime,
    seed: u64,
    max_attempts: u64,
) -> Result<NonStabilisingIsometry> {
    let u = kernel_u(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| loop {
        let v = FpVector::new(
            p,
            (0..DIM_V).map(|_| rng.random_range(0..p.get())).collect(),
        )
        .unwrap();
        if let Ok(r) = ReflectionWitness::new(v) {
            return r;
        }
    };
    for attempt in 1..=max_attempts {
        let first = draw(&mut rng);
        let second = draw(&mut rng);
        let m = first.matrix.mul(&second.matrix)?;
        if !is_special_isometry(&m) {
            continue;
        }
        if let Some(row) = invariance_witness(&u, &lambda2(&m))? {
            return Ok(NonStabilisingIsometry {
                first,
                second,
                matrix: m,
                witness_row: row,
                attempts: attempt,
            });
        }
    }
    Err(OctoError::SearchExhausted(max_attempts))
}

/// Shared artifacts for one pipeline run.
pub struct Pipeline {
    pub p: FieldPrime,
    pub samples: usize,
    pub seed: u64,
    pub u: SubspaceU,
    pub ftilde: FpMatrix,
    /// `max(samples, 2 * HOM_GENERATORS)` sampled automorphisms.
    pub g2: Vec<G2Element>,
    pub lambda2: Vec<FpMatrix>,
    pub group: PGroupContext,
    pub isometry: Option<FpMatrix>,
}

impl Pipeline {
    pub fn new(p: FieldPrime, samples: usize, seed: u64) -> Result<Self> {
        if p.get() > PIPELINE_MAX_PRIME {
            return Err(OctoError::PrimeTooLarge(p.get(), PIPELINE_MAX_PRIME));
        }
        let u = kernel_u(p);
        let g2 = G2Sampler::new(p, seed).batch(samples.max(2 * HOM_GENERATORS))?;
        let lambda2 = g2.par_iter().map(|g| lambda2(g.matrix())).collect();
        Ok(Pipeline {
            p,
            samples,
            seed,
            group: PGroupContext::new(u.clone()),
            ftilde: ftilde_matrix(p),
            u,
            g2,
            lambda2,
            isometry: None,
        })
    }

    fn sampled(&self) -> &[G2Element] {
        &self.g2[..self.samples]
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        r.set_stream(stream);
        r
    }

    fn random_vector(&self, rng: &mut ChaCha8Rng, n: usize) -> FpVector {
        FpVector::new(
            self.p,
            (0..n).map(|_| rng.random_range(0..self.p.get())).collect(),
        )
        .unwrap()
    }

    fn random_octonion(&self, rng: &mut ChaCha8Rng) -> Octonion {
        Octonion::new(
            self.p,
            std::array::from_fn(|_| rng.random_range(0..self.p.get())),
        )
        .unwrap()
    }

    /// Every matrix the pipeline reports on, for the certificate digest.
    pub fn emitted_matrices(&self) -> Vec<&FpMatrix> {
        let mut out = vec![&self.ftilde, self.u.basis()];
        out.extend(self.g2.iter().map(|g| g.matrix()));
        out.extend(self.isometry.iter());
        out
    }
}

pub struct Outcome {
    pub pass: bool,
    pub samples: usize,
    pub witness: Option<String>,
}

impl Outcome {
    fn from_witness(samples: usize, witness: Option<String>) -> Self {
        Outcome {
            pass: witness.is_none(),
            samples,
            witness,
        }
    }
}

pub struct CheckEntry {
    pub name: &'static str,
    pub module: &'static str,
    pub run: fn(&mut Pipeline) -> Result<Outcome>,
}

/// Claims recorded without computational verification.
pub const TRUSTED: [&str; 2] = [
    "trusted.normaliser_is_scalars_times_g2",
    "trusted.p3_second_nonisomorphic_group",
];

macro_rules! check {
    ($module:literal, $name:literal, $f:expr) => {
        CheckEntry {
            name: $name,
            module: $module,
            run: $f,
        }
    };
}

pub const MODULES: [&str; 6] = ["linalg", "octonion", "g2", "exterior", "group", "verify"];

pub static REGISTRY: &[CheckEntry] = &[
    check!("linalg", "linalg.rref_canonical", check_rref_canonical),
    check!("linalg", "linalg.rank_nullity", check_rank_nullity),
    check!("linalg", "linalg.matmul_laws", check_matmul_laws),
    check!("octonion", "octonion.table_rules", check_table_rules),
    check!(
        "octonion",
        "octonion.anticommutation",
        check_anticommutation
    ),
    check!("octonion", "octonion.alternativity", check_alternativity),
    check!(
        "octonion",
        "octonion.non_associativity_witness",
        check_non_associativity
    ),
    check!("octonion", "octonion.norm_laws", check_norm_laws),
    check!(
        "octonion",
        "octonion.conjugation_anti_automorphism",
        check_conjugation
    ),
    check!(
        "octonion",
        "octonion.beta_orthonormal",
        check_beta_orthonormal
    ),
    check!("g2", "g2.multiplicativity", check_g2_multiplicative),
    check!("g2", "g2.preserves_beta", check_g2_orthogonal),
    check!("g2", "g2.det_one", check_g2_det),
    check!("g2", "g2.composition_closure", check_g2_closure),
    check!("g2", "g2.triple_count_p3", check_triple_count),
    check!(
        "exterior",
        "exterior.kernel_dimension",
        check_kernel_dimension
    ),
    check!(
        "exterior",
        "exterior.lambda2_functorial",
        check_lambda2_functorial
    ),
    check!("exterior", "exterior.u_invariant", check_u_invariant),
    check!(
        "exterior",
        "exterior.scalars_stabilise_u",
        check_scalars_stabilise
    ),
    check!("exterior", "exterior.equivariance", check_equivariance),
    check!("exterior", "exterior.v_irreducible_spin", check_v_spin),
    check!("exterior", "exterior.spin_inside_u", check_spin_inside),
    check!("exterior", "exterior.spin_outside_u", check_spin_outside),
    check!(
        "exterior",
        "exterior.quotient_functorial",
        check_quotient_functorial
    ),
    check!("exterior", "exterior.hom_v_v", check_hom_v_v),
    check!("exterior", "exterior.hom_wedge_v_stable", check_hom_wedge_v),
    check!(
        "exterior",
        "exterior.quotient_isomorphic_to_v",
        check_quotient_iso
    ),
    check!("group", "group.axioms", check_group_axioms),
    check!("group", "group.exponent", check_group_exponent),
    check!("group", "group.structure", check_group_structure),
    check!("group", "group.lift_g2", check_lift_g2),
    check!("group", "group.lift_scalars", check_lift_scalars),
    check!("group", "group.lift_composition", check_lift_composition),
    check!("verify", "verify.nonstabilising_isometry", check_isometry),
    check!(
        "verify",
        "trusted.normaliser_is_scalars_times_g2",
        paper_trusted
    ),
    check!(
        "verify",
        "trusted.p3_second_nonisomorphic_group",
        paper_trusted
    ),
];

fn first_failure<T: Sync>(
    items: &[T],
    f: impl Fn(usize, &T) -> Option<String> + Sync,
) -> Option<String> {
    items
        .par_iter()
        .enumerate()
        .filter_map(|(i, x)| f(i, x))
        .find_first(|_| true)
}

fn check_rref_canonical(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    let mut rng = pl.rng(1);
    let n = 20;
    for k in 0..n {
        let m = FpMatrix::new(
            p,
            8,
            21,
            (0..8 * 21).map(|_| rng.random_range(0..p.get())).collect(),
        )?;
        let t = loop {
            let t = FpMatrix::new(
                p,
                8,
                8,
                (0..64).map(|_| rng.random_range(0..p.get())).collect(),
            )?;
            if t.det()? != 0 {
                break t;
            }
        };
        let r = m.rref();
        if r.matrix != t.mul(&m)?.rref().matrix || r.matrix.rref() != r {
            return Ok(Outcome::from_witness(n, Some(format!("sample {k}"))));
        }
    }
    Ok(Outcome::from_witness(n, None))
}

fn check_rank_nullity(pl: &mut Pipeline) -> Result<Outcome> {
    let mut failure = None;
    let mut count = 0;
    for (i, g) in pl.lambda2.iter().take(10).enumerate() {
        count += 1;
        if g.rank() + g.kernel().dim() != g.rows {
            failure = Some(format!("lambda2 sample {i}"));
        }
    }
    let f = &pl.ftilde;
    count += 1;
    if f.rank() + f.kernel().dim() != f.rows {
        failure = Some("ftilde".into());
    }
    Ok(Outcome::from_witness(count, failure))
}

fn check_matmul_laws(pl: &mut Pipeline) -> Result<Outcome> {
    let g = &pl.g2;
    let mut n = 0;
    for w in g.windows(3).take(20) {
        n += 1;
        let (a, b, c) = (w[0].matrix(), w[1].matrix(), w[2].matrix());
        let assoc = a.mul(b)?.mul(c)? == a.mul(&b.mul(c)?)?;
        let dist = a.mul(&b.add(c)?)? == a.mul(b)?.add(&a.mul(c)?)?;
        if !assoc || !dist {
            return Ok(Outcome::from_witness(
                n,
                Some(format!("triple at {}", n - 1)),
            ));
        }
    }
    Ok(Outcome::from_witness(n, None))
}

fn check_table_rules(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    let e = |k| Octonion::basis(p, k);
    let i = |t: usize| Octonion::unit(p, t);
    let minus_one = Octonion::scalar(p, p.neg(1));
    for k in 0..8 {
        if e(0).mul(&e(k)) != e(k) || e(k).mul(&e(0)) != e(k) {
            return Ok(Outcome::from_witness(
                64,
                Some(format!("identity rule at e{k}")),
            ));
        }
    }
    for t in 0..7 {
        if i(t).mul(&i(t)) != minus_one {
            return Ok(Outcome::from_witness(64, Some(format!("i{t}^2"))));
        }
        for (a, b, c) in [(t, t + 1, t + 3), (t + 1, t + 3, t), (t + 3, t, t + 1)] {
            if i(a).mul(&i(b)) != i(c) {
                return Ok(Outcome::from_witness(
                    64,
                    Some(format!("i{} i{}", a % 7, b % 7)),
                ));
            }
        }
    }
    // Every one of the 64 slots is a signed basis element.
    let t = table();
    let all_signed_basis = (0..8).all(|a| (0..8).all(|b| t.get(a, b).index < 8));
    Ok(Outcome::from_witness(
        64,
        (!all_signed_basis).then(|| "table slot".to_string()),
    ))
}

fn check_anticommutation(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    let i = |t: usize| Octonion::unit(p, t);
    let mut n = 0;
    for s in 0..7 {
        for t in 0..7 {
            if s == t {
                continue;
            }
            n += 1;
            if i(s).mul(&i(t)) != i(t).mul(&i(s)).neg() {
                return Ok(Outcome::from_witness(n, Some(format!("(i{s}, i{t})"))));
            }
        }
    }
    Ok(Outcome::from_witness(n, None))
}

fn check_alternativity(pl: &mut Pipeline) -> Result<Outcome> {
    let mut rng = pl.rng(2);
    for k in 0..ALTERNATIVITY_PAIRS {
        let x = pl.random_octonion(&mut rng);
        let y = pl.random_octonion(&mut rng);
        let xx = x.mul(&x);
        if xx.mul(&y) != x.mul(&x.mul(&y)) || y.mul(&xx) != y.mul(&x).mul(&x) {
            return Ok(Outcome::from_witness(
                ALTERNATIVITY_PAIRS,
                Some(format!("pair {k}: x={x}, y={y}")),
            ));
        }
    }
    Ok(Outcome::from_witness(ALTERNATIVITY_PAIRS, None))
}

fn check_non_associativity(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    let i = |t: usize| Octonion::unit(p, t);
    let left = i(0).mul(&i(1)).mul(&i(2));
    let right = i(0).mul(&i(1).mul(&i(2)));
    Ok(Outcome::from_witness(
        1,
        (left == right).then(|| "(i0 i1) i2 == i0 (i1 i2)".to_string()),
    ))
}

fn check_norm_laws(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    let mut rng = pl.rng(3);
    let n = 1000;
    for k in 0..n {
        let x = pl.random_octonion(&mut rng);
        let y = pl.random_octonion(&mut rng);
        let nx = x.norm();
        let coord_sum = x.coords().iter().fold(0, |acc, &c| p.add(acc, p.mul(c, c)));
        let ok = x.mul(&x.conjugate()) == Octonion::scalar(p, nx)
            && nx == x.beta(&x)
            && nx == coord_sum
            && x.mul(&y).norm() == p.mul(nx, y.norm());
        if !ok {
            return Ok(Outcome::from_witness(n, Some(format!("sample {k}: x={x}"))));
        }
    }
    Ok(Outcome::from_witness(n, None))
}

fn check_conjugation(pl: &mut Pipeline) -> Result<Outcome> {
    let mut rng = pl.rng(4);
    let n = 1000;
    for k in 0..n {
        let x = pl.random_octonion(&mut rng);
        let y = pl.random_octonion(&mut rng);
        if x.mul(&y).conjugate() != y.conjugate().mul(&x.conjugate())
            || x.conjugate().conjugate() != x
        {
            return Ok(Outcome::from_witness(n, Some(format!("sample {k}"))));
        }
    }
    Ok(Outcome::from_witness(n, None))
}

fn check_beta_orthonormal(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    for a in 0..8 {
        for b in 0..8 {
            if Octonion::basis(p, a).beta(&Octonion::basis(p, b)) != (a == b) as u32 {
                return Ok(Outcome::from_witness(64, Some(format!("(e{a}, e{b})"))));
            }
        }
    }
    Ok(Outcome::from_witness(64, None))
}

fn check_g2_multiplicative(pl: &mut Pipeline) -> Result<Outcome> {
    let w = first_failure(pl.sampled(), |i, g| {
        let c = is_automorphism(g.matrix());
        (!c.holds()).then(|| format!("sample {i}: {c:?}"))
    });
    Ok(Outcome::from_witness(pl.samples, w))
}

fn check_g2_orthogonal(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    let id = FpMatrix::identity(p, DIM_V);
    let w = first_failure(pl.sampled(), |i, g| {
        let m = g.matrix();
        (m.mul(&m.transpose()).ok() != Some(id.clone())).then(|| format!("sample {i}"))
    });
    Ok(Outcome::from_witness(pl.samples, w))
}

fn check_g2_det(pl: &mut Pipeline) -> Result<Outcome> {
    let w = first_failure(pl.sampled(), |i, g| {
        (g.matrix().det().ok() != Some(1)).then(|| format!("sample {i}"))
    });
    Ok(Outcome::from_witness(pl.samples, w))
}

fn check_g2_closure(pl: &mut Pipeline) -> Result<Outcome> {
    let g = pl.sampled();
    let n = g.len().min(50);
    let pairs: Vec<(usize, usize)> = (0..n).map(|k| (k, (k + 1) % g.len())).collect();
    let w = first_failure(&pairs, |_, &(a, b)| {
        let gh = g[a].compose(&g[b]).ok()?;
        let inv = g[a].inverse();
        (!is_automorphism(gh.matrix()).holds() || !is_automorphism(inv.matrix()).holds())
            .then(|| format!("pair ({a}, {b})"))
    });
    Ok(Outcome::from_witness(n, w))
}

fn check_triple_count(pl: &mut Pipeline) -> Result<Outcome> {
    let p3 = FieldPrime::new(3)?;
    let counts = count_triples(p3, pl.seed)?;
    let q: u64 = 3;
    let classical = q.pow(6) * (q.pow(6) - 1) * (q.pow(2) - 1);
    let ok = counts.product == G2_3_ORDER && classical == G2_3_ORDER && counts.stages_independent();
    Ok(Outcome::from_witness(
        1 + counts.alternatives.len(),
        (!ok).then(|| format!("{counts:?}")),
    ))
}

fn check_kernel_dimension(pl: &mut Pipeline) -> Result<Outcome> {
    let rank = pl.ftilde.rank();
    let dim = pl.u.dim();
    let ok = rank == DIM_V && dim == U_DIM && pl.u.ambient_dim == WEDGE_DIM;
    Ok(Outcome::from_witness(
        1,
        (!ok).then(|| format!("rank {rank}, kernel dim {dim}")),
    ))
}

fn check_lambda2_functorial(pl: &mut Pipeline) -> Result<Outcome> {
    let n = pl.samples.min(50);
    let idx: Vec<usize> = (0..n).collect();
    let len = pl.g2.len();
    let w = first_failure(&idx, |_, &k| {
        let j = (k + 1) % len;
        let gh = pl.g2[k].matrix().mul(pl.g2[j].matrix()).ok()?;
        (pl.lambda2[k].mul(&pl.lambda2[j]).ok()? != lambda2(&gh))
            .then(|| format!("pair ({k}, {j})"))
    });
    Ok(Outcome::from_witness(n, w))
}

fn check_u_invariant(pl: &mut Pipeline) -> Result<Outcome> {
    let u = pl.u.space();
    let w = first_failure(&pl.lambda2[..pl.samples], |i, l2| {
        let image = Subspace::row_space(&u.basis().mul(l2).ok()?);
        (image != *u).then(|| format!("sample {i}"))
    });
    Ok(Outcome::from_witness(pl.samples, w))
}

fn check_scalars_stabilise(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    for lambda in 1..p.get() {
        if !is_invariant(&pl.u, &lambda2(&FpMatrix::scalar(p, DIM_V, lambda)))? {
            return Ok(Outcome::from_witness(
                p.get() as usize - 1,
                Some(format!("lambda = {lambda}")),
            ));
        }
    }
    Ok(Outcome::from_witness(p.get() as usize - 1, None))
}

fn check_equivariance(pl: &mut Pipeline) -> Result<Outcome> {
    let w = first_failure(pl.sampled(), |i, g| {
        (!g2_equivariant(g)).then(|| format!("sample {i}"))
    });
    Ok(Outcome::from_witness(pl.samples, w))
}

fn check_v_spin(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    let gens: Vec<FpMatrix> = pl
        .g2
        .iter()
        .take(SPIN_GENERATORS)
        .map(|g| g.matrix().clone())
        .collect();
    for i in 0..DIM_V {
        let s = spin(&FpVector::unit(p, DIM_V, i), &gens)?;
        if s.dim() != DIM_V {
            return Ok(Outcome::from_witness(
                DIM_V,
                Some(format!("e{i} spins to dimension {}", s.dim())),
            ));
        }
    }
    Ok(Outcome::from_witness(DIM_V, None))
}

fn check_spin_inside(pl: &mut Pipeline) -> Result<Outcome> {
    let mut rng = pl.rng(5);
    let gens = &pl.lambda2[..SPIN_GENERATORS];
    let basis = pl.u.basis();
    for k in 0..SPIN_INSIDE {
        let coeffs = loop {
            let c = pl.random_vector(&mut rng, U_DIM);
            if !c.is_zero() {
                break c;
            }
        };
        let v = coeffs.mul_mat(basis)?;
        let s = spin(&v, gens)?;
        if !s.is_subspace_of(&pl.u)? {
            return Ok(Outcome::from_witness(
                SPIN_INSIDE,
                Some(format!("sample {k} leaves U")),
            ));
        }
    }
    Ok(Outcome::from_witness(SPIN_INSIDE, None))
}

fn check_spin_outside(pl: &mut Pipeline) -> Result<Outcome> {
    let mut rng = pl.rng(6);
    let gens = &pl.lambda2[..SPIN_GENERATORS];
    let mut vectors = Vec::with_capacity(SPIN_OUTSIDE);
    while vectors.len() < SPIN_OUTSIDE {
        let v = pl.random_vector(&mut rng, WEDGE_DIM);
        if !pl.u.contains(&v)? {
            vectors.push(v);
        }
    }
    let w = first_failure(&vectors, |k, v| {
        let s = spin(v, gens).ok()?;
        (s.dim() != WEDGE_DIM).then(|| format!("sample {k} spins to dimension {}", s.dim()))
    });
    Ok(Outcome::from_witness(SPIN_OUTSIDE, w))
}

fn check_quotient_functorial(pl: &mut Pipeline) -> Result<Outcome> {
    let n = pl.samples.min(50);
    let idx: Vec<usize> = (0..n).collect();
    let len = pl.g2.len();
    let u = &pl.u;
    let w = first_failure(&idx, |_, &k| {
        let j = (k + 1) % len;
        let (g, h) = (pl.g2[k].matrix(), pl.g2[j].matrix());
        let qg = quotient_action(g, u).ok()?;
        let qh = quotient_action(h, u).ok()?;
        let qgh = quotient_action(&g.mul(h).ok()?, u).ok()?;
        (qg.mul(&qh).ok()? != qgh || qg.det().ok()? != 1).then(|| format!("pair ({k}, {j})"))
    });
    Ok(Outcome::from_witness(n, w))
}

fn v_gens(pl: &Pipeline, n: usize) -> Vec<FpMatrix> {
    pl.g2[..n].iter().map(|g| g.matrix().clone()).collect()
}

fn check_hom_v_v(pl: &mut Pipeline) -> Result<Outcome> {
    let gens = v_gens(pl, HOM_GENERATORS);
    let h = hom_space(&gens, &gens)?;
    Ok(Outcome::from_witness(
        HOM_GENERATORS,
        (h.dim() != 1).then(|| format!("dim {}", h.dim())),
    ))
}

fn check_hom_wedge_v(pl: &mut Pipeline) -> Result<Outcome> {
    let dims = [HOM_GENERATORS, 2 * HOM_GENERATORS]
        .map(|n| hom_space(&pl.lambda2[..n], &v_gens(pl, n)).map(|h| h.dim()));
    let [d30, d60] = [
        dims[0].as_ref().map_err(clone_err)?,
        dims[1].as_ref().map_err(clone_err)?,
    ];
    let ok = *d30 == 1 && *d60 == 1;
    Ok(Outcome::from_witness(
        2 * HOM_GENERATORS,
        (!ok).then(|| format!("dim {d30} at 30, {d60} at 60")),
    ))
}

fn clone_err(e: &OctoError) -> OctoError {
    OctoError::Shape(e.to_string())
}

fn check_quotient_iso(pl: &mut Pipeline) -> Result<Outcome> {
    let n = HOM_GENERATORS;
    let vg = v_gens(pl, n);
    let quotients = vg
        .iter()
        .map(|g| quotient_action(g, &pl.u))
        .collect::<Result<Vec<_>>>()?;
    let hq = hom_space(&quotients, &vg)?;
    if hq.dim() != 1 {
        return Ok(Outcome::from_witness(
            n,
            Some(format!("Hom(quotient, V) has dim {}", hq.dim())),
        ));
    }
    if hq.basis[0].det()? == 0 {
        return Ok(Outcome::from_witness(
            n,
            Some("quotient intertwiner is singular".into()),
        ));
    }
    // The intertwiner Λ²V -> V vanishes on U and induces an isomorphism on the quotient.
    let hw = hom_space(&pl.lambda2[..n], &vg)?;
    let Some(x) = hw.basis.first() else {
        return Ok(Outcome::from_witness(
            n,
            Some("Hom(wedge, V) is zero".into()),
        ));
    };
    if !pl.u.basis().mul(x)?.is_zero() {
        return Ok(Outcome::from_witness(
            n,
            Some("intertwiner does not vanish on U".into()),
        ));
    }
    let rows: Vec<FpVector> = pl.u.non_pivots().iter().map(|&c| x.row_vector(c)).collect();
    let induced = FpMatrix::from_rows(pl.p, DIM_V, &rows)?;
    Ok(Outcome::from_witness(
        n,
        (induced.det()? == 0).then(|| "induced map is singular".into()),
    ))
}

fn check_group_axioms(pl: &mut Pipeline) -> Result<Outcome> {
    let r = verify_group_axioms(&pl.group, GROUP_SAMPLES, pl.seed);
    Ok(Outcome::from_witness(
        GROUP_SAMPLES,
        (!r.all_pass()).then(|| format!("{r:?}")),
    ))
}

fn check_group_exponent(pl: &mut Pipeline) -> Result<Outcome> {
    let ctx = &pl.group;
    let p = pl.p.get() as i64;
    let mut rng = pl.rng(7);
    let elems: Vec<PGroupElement> = (0..GROUP_SAMPLES)
        .map(|_| PGroupElement::random(&mut rng, pl.p))
        .collect();
    let w = first_failure(&elems, |k, a| {
        let mut acc = PGroupElement::identity(ctx.p);
        for j in 1..=p {
            acc = ctx.multiply(&acc, a);
            if acc != ctx.power(a, j) {
                return Some(format!("sample {k}: power formula fails at {j}"));
            }
            if j < p && acc.is_identity() && !a.is_identity() {
                return Some(format!("sample {k}: order {j} below p"));
            }
        }
        (!acc.is_identity()).then(|| format!("sample {k}: a^p != 1"))
    });
    Ok(Outcome::from_witness(GROUP_SAMPLES, w))
}

fn check_group_structure(pl: &mut Pipeline) -> Result<Outcome> {
    let r = structure_report(&pl.group);
    let ok = r.order_exponent == 14
        && r.class == 2
        && r.rank == 7
        && r.exponent_is_p
        && r.center_dim == 7
        && r.derived_dim == 7
        && r.frattini_dim == 7
        && r.center_equals_derived;
    Ok(Outcome::from_witness(1, (!ok).then(|| format!("{r:?}"))))
}

fn check_lift_g2(pl: &mut Pipeline) -> Result<Outcome> {
    let ctx = &pl.group;
    let seed = pl.seed;
    let w = first_failure(pl.sampled(), |i, g| {
        let lift = match lift_automorphism(g.matrix(), ctx) {
            Ok(l) => l,
            Err(e) => return Some(format!("sample {i}: {e}")),
        };
        if lift.frattini_action() != *g.matrix() || !lift.is_bijective() {
            return Some(format!("sample {i}: wrong Frattini action"));
        }
        lift.homomorphism_failure(ctx, LIFT_PAIRS, seed.wrapping_add(i as u64))
            .map(|k| format!("sample {i}: pair {k}"))
    });
    Ok(Outcome::from_witness(pl.samples, w))
}

fn check_lift_scalars(pl: &mut Pipeline) -> Result<Outcome> {
    let p = pl.p;
    let ctx = &pl.group;
    for lambda in 1..p.get() {
        let m = FpMatrix::scalar(p, DIM_V, lambda);
        let lift = lift_automorphism(&m, ctx)?;
        if lift.frattini_action() != m
            || lift
                .homomorphism_failure(ctx, LIFT_PAIRS, pl.seed)
                .is_some()
        {
            return Ok(Outcome::from_witness(
                p.get() as usize - 1,
                Some(format!("lambda = {lambda}")),
            ));
        }
    }
    Ok(Outcome::from_witness(p.get() as usize - 1, None))
}

fn check_lift_composition(pl: &mut Pipeline) -> Result<Outcome> {
    let ctx = &pl.group;
    let mut rng = pl.rng(8);
    let n = pl.samples.min(20);
    for k in 0..n {
        let (g, h) = (pl.g2[k].matrix(), pl.g2[k + 1].matrix());
        let lg = lift_automorphism(g, ctx)?;
        let lh = lift_automorphism(h, ctx)?;
        let lgh = lift_automorphism(&g.mul(h)?, ctx)?;
        for _ in 0..50 {
            let a = PGroupElement::random(&mut rng, pl.p);
            if lgh.apply(&a) != lh.apply(&lg.apply(&a)) {
                return Ok(Outcome::from_witness(
                    n,
                    Some(format!("pair ({k}, {})", k + 1)),
                ));
            }
        }
    }
    Ok(Outcome::from_witness(n, None))
}

fn check_isometry(pl: &mut Pipeline) -> Result<Outcome> {
    let found = find_nonstabilizing_isometry(pl.p, pl.seed, DEFAULT_ISOMETRY_ATTEMPTS)?;
    let m = &found.matrix;
    let ok = is_special_isometry(m) && !is_invariant(&pl.u, &lambda2(m))?;
    pl.isometry = Some(m.clone());
    Ok(Outcome::from_witness(
        found.attempts as usize,
        (!ok).then(|| "triple check failed".into()),
    ))
}

fn paper_trusted(_: &mut Pipeline) -> Result<Outcome> {
    Ok(Outcome {
        pass: true,
        samples: 0,
        witness: None,
    })
}

/// Run every registered check in order. An `Err` aborts the run; the
/// returned certificate then ends with the failing check.
pub fn run_pipeline(p: FieldPrime, samples: usize, seed: u64) -> Result<Certificate> {
    run_checks(p, samples, seed, |_| true)
}

/// Run the registered checks accepted by `select`, in registry order.
pub fn run_checks(
    p: FieldPrime,
    samples: usize,
    seed: u64,
    select: impl Fn(&CheckEntry) -> bool,
) -> Result<Certificate> {
    let mut pl = Pipeline::new(p, samples, seed)?;
    let mut checks = Vec::with_capacity(REGISTRY.len());
    for entry in REGISTRY.iter().filter(|e| select(e)) {
        let start = Instant::now();
        let outcome = (entry.run)(&mut pl);
        let runtime_ms = start.elapsed().as_millis() as u64;
        let record = match outcome {
            Ok(o) => CheckRecord {
                name: entry.name.to_string(),
                status: if TRUSTED.contains(&entry.name) {
                    CheckStatus::PaperTrusted
                } else if o.pass {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
                samples: o.samples,
                witness: o.witness,
                runtime_ms,
            },
            Err(e) => {
                checks.push(CheckRecord {
                    name: entry.name.to_string(),
                    status: CheckStatus::Fail,
                    samples: 0,
                    witness: Some(e.to_string()),
                    runtime_ms,
                });
                break;
            }
        };
        checks.push(record);
    }
    Ok(Certificate {
        version: VERSION.to_string(),
        p: p.get(),
        seed,
        samples,
        u_digest: json_digest(&pl.u),
        matrices_digest: json_digest(&pl.emitted_matrices()),
        checks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportKind {
    Table,
    U,
    Matrices,
    Cert,
}

#[derive(Serialize)]
struct TableJson {
    basis: Vec<String>,
    table: Vec<Vec<String>>,
}

pub fn table_json() -> serde_json::Value {
    let basis = (0..8).map(crate::octonion::basis_symbol).collect();
    serde_json::to_value(TableJson {
        basis,
        table: table().symbols(),
    })
    .expect("serialisable")
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s).map_err(|source| OctoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let s = std::fs::read_to_string(path).map_err(|source| OctoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&s)?)
}

/// Write one pipeline artifact.
pub fn export(
    what: ExportKind,
    pl: &Pipeline,
    cert: Option<&Certificate>,
    path: &Path,
) -> Result<()> {
    match what {
        ExportKind::Table => write_json(path, &table_json()),
        ExportKind::U => write_json(path, &pl.u),
        ExportKind::Matrices => {
            write_json(path, &pl.g2.iter().map(|g| g.matrix()).collect::<Vec<_>>())
        }
        ExportKind::Cert => match cert {
            Some(c) => write_json(path, c),
            None => Err(OctoError::Shape("no certificate to export".into())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> FieldPrime {
        FieldPrime::new(p).unwrap()
    }

    #[test]
    fn reflection_properties() {
        let p = fp(7);
        let r = ReflectionWitness::new(FpVector::from_i64(p, &[1, 2, 0, 0, 1, 0, 3])).unwrap();
        let m = &r.matrix;
        assert_eq!(m.mul(m).unwrap(), FpMatrix::identity(p, 7));
        assert_eq!(m.mul(&m.transpose()).unwrap(), FpMatrix::identity(p, 7));
        assert_eq!(m.det().unwrap(), p.neg(1));
        // negative control: a single reflection fails the det filter
        assert!(!is_special_isometry(m));
        // isotropic vectors have no reflection: 1 + 1 + 1 = 0 mod 3
        assert!(ReflectionWitness::new(FpVector::from_i64(fp(3), &[1, 1, 1, 0, 0, 0, 0])).is_err());
    }

    #[test]
    fn isometry_search_p3_seed1() {
        let p = fp(3);
        let found = find_nonstabilizing_isometry(p, 1, DEFAULT_ISOMETRY_ATTEMPTS).unwrap();
        assert!(is_special_isometry(&found.matrix));
        let u = kernel_u(p);
        let row = u.basis().row_vector(found.witness_row);
        assert!(!u
            .contains(&row.mul_mat(&lambda2(&found.matrix)).unwrap())
            .unwrap());
        assert_eq!(
            found.matrix,
            found.first.matrix.mul(&found.second.matrix).unwrap()
        );
    }

    #[test]
    fn search_exhaustion_reported() {
        assert!(matches!(
            find_nonstabilizing_isometry(fp(5), 0, 0),
            Err(OctoError::SearchExhausted(0))
        ));
    }

    #[test]
    fn registry_is_well_formed() {
        let mut names: Vec<&str> = REGISTRY.iter().map(|c| c.name).collect();
        let before = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), before, "duplicate check names");
        for m in MODULES {
            assert!(
                REGISTRY.iter().any(|c| c.module == m),
                "module {m} has no registered check"
            );
        }
        for t in TRUSTED {
            assert!(REGISTRY.iter().any(|c| c.name == t));
        }
    }

    #[test]
    fn pipeline_rejects_large_p() {
        assert!(matches!(
            Pipeline::new(fp(17), 10, 0),
            Err(OctoError::PrimeTooLarge(17, 13))
        ));
    }

    #[test]
    fn certificate_validation_rejects_bad_status() {
        let bad = serde_json::json!({
            "version": "0", "p": 3, "seed": 0, "samples": 1, "u_digest": "", "matrices_digest": "",
            "checks": [{"name": "group.axioms", "status": "paper-trusted", "samples": 0, "witness": null, "runtime_ms": 0}]
        });
        assert!(validate_certificate_json(&bad).is_err());
    }
}
