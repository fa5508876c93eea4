//! The class-two group `P_U = V × Λ²V/U` with multiplication
//! `(v, w+U)(v', w'+U) = (v+v', w+w'+v∧v'+U)`.
//!
//! Elements are stored as `(v, c)` where `c` is the coset coordinate vector of
//! `w + U` (see [`SubspaceU::coset_coords`]). Because `∧` is bilinear and the
//! second coordinate is central, the law is associative; with `v ∧ v = 0` it
//! follows that `(v, w)^k = (kv, kw)` and `[a, b] = (0, 2·(a.v ∧ b.v) + U)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{OctoError, Result};
use crate::exterior::{
    invariance_witness, kernel_u, lambda2, quotient_of, wedge, SubspaceU, DIM_V, WEDGE_DIM,
};
use crate::field::FieldPrime;
use crate::linalg::{FpMatrix, FpVector, Subspace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PGroupContext {
    pub p: FieldPrime,
    pub u: SubspaceU,
    /// Mutation hook: skip one basis row during coset reduction.
    #[serde(skip)]
    dropped_row: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PGroupElement {
    pub v: FpVector,
    pub w: FpVector,
}

impl PGroupElement {
    pub fn identity(p: FieldPrime) -> Self {
        PGroupElement {
            v: FpVector::zeros(p, DIM_V),
            w: FpVector::zeros(p, DIM_V),
        }
    }

    pub fn new(v: FpVector, w: FpVector) -> Result<Self> {
        if v.len() != DIM_V || w.len() != DIM_V {
            return Err(OctoError::Shape(format!(
                "group element with parts of length {} and {}",
                v.len(),
                w.len()
            )));
        }
        if v.p != w.p {
            return Err(OctoError::FieldMismatch(v.p.get(), w.p.get()));
        }
        Ok(PGroupElement { v, w })
    }

    /// `(v, 0)`.
    pub fn generator(v: FpVector) -> Self {
        let p = v.p;
        PGroupElement {
            v,
            w: FpVector::zeros(p, DIM_V),
        }
    }

    pub fn random(rng: &mut impl Rng, p: FieldPrime) -> Self {
        let mut draw = || {
            FpVector::new(
                p,
                (0..DIM_V).map(|_| rng.random_range(0..p.get())).collect(),
            )
            .unwrap()
        };
        PGroupElement {
            v: draw(),
            w: draw(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.v.is_zero() && self.w.is_zero()
    }
}

impl PGroupContext {
    pub fn new(u: SubspaceU) -> Self {
        PGroupContext {
            p: u.p,
            u,
            dropped_row: None,
        }
    }

    pub fn for_prime(p: FieldPrime) -> Self {
        Self::new(kernel_u(p))
    }

    /// A deliberately broken copy whose reduction ignores basis row `row` of
    /// `U`. Used to show the verification checks can fail.
    pub fn with_dropped_pivot(&self, row: usize) -> Self {
        PGroupContext {
            dropped_row: Some(row),
            ..self.clone()
        }
    }

    /// Coset coordinates of a wedge vector.
    pub fn reduce(&self, w: &FpVector) -> FpVector {
        match self.dropped_row {
            None => self
                .u
                .coset_coords(w)
                .expect("wedge vectors have length 21"),
            Some(skip) => {
                let p = self.p;
                let basis = self.u.basis();
                let mut r = w.entries().to_vec();
                for (i, &c) in self.u.pivots().iter().enumerate() {
                    let f = r[c];
                    if i == skip || f == 0 {
                        continue;
                    }
                    for (x, &b) in r.iter_mut().zip(basis.row(i)) {
                        *x = p.sub(*x, p.mul(f, b));
                    }
                }
                FpVector::new(p, self.u.non_pivots().iter().map(|&c| r[c]).collect()).unwrap()
            }
        }
    }

    fn check(&self, a: &PGroupElement) -> Result<()> {
        if a.v.p != self.p {
            return Err(OctoError::FieldMismatch(a.v.p.get(), self.p.get()));
        }
        Ok(())
    }

    pub fn try_multiply(&self, a: &PGroupElement, b: &PGroupElement) -> Result<PGroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.multiply(a, b))
    }

    pub fn multiply(&self, a: &PGroupElement, b: &PGroupElement) -> PGroupElement {
        let cross = self.reduce(&wedge(&a.v, &b.v));
        PGroupElement {
            v: a.v.add(&b.v),
            w: a.w.add(&b.w).add(&cross),
        }
    }

    pub fn inverse(&self, a: &PGroupElement) -> PGroupElement {
        PGroupElement {
            v: a.v.neg(),
            w: a.w.neg(),
        }
    }

    pub fn power(&self, a: &PGroupElement, k: i64) -> PGroupElement {
        let c = self.p.reduce(k);
        PGroupElement {
            v: a.v.scale(c),
            w: a.w.scale(c),
        }
    }

    /// `a^-1 b^-1 a b`.
    pub fn commutator(&self, a: &PGroupElement, b: &PGroupElement) -> PGroupElement {
        let w = self.reduce(&wedge(&a.v, &b.v).scale(2));
        PGroupElement {
            v: FpVector::zeros(self.p, DIM_V),
            w,
        }
    }

    /// Number of coordinates of each part: the group has order `p^(7 + 7)`.
    pub fn order_exponent(&self) -> usize {
        DIM_V + (WEDGE_DIM - self.u.dim())
    }
}

/// Outcome of the sampled group-law checks.
#[derive(Clone, Debug, Serialize)]
pub struct GroupAxiomReport {
    pub samples: usize,
    pub seed: u64,
    pub associativity_failure: Option<usize>,
    pub identity_ok: bool,
    pub inverses_ok: bool,
    pub wedge_bilinear_ok: bool,
    /// Reduction kills every basis vector of `U` and fixes every canonical
    /// coset representative.
    pub reduction_ok: bool,
}

impl GroupAxiomReport {
    pub fn all_pass(&self) -> bool {
        self.associativity_failure.is_none()
            && self.identity_ok
            && self.inverses_ok
            && self.wedge_bilinear_ok
            && self.reduction_ok
    }
}

pub fn verify_group_axioms(ctx: &PGroupContext, samples: usize, seed: u64) -> GroupAxiomReport {
    let p = ctx.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = PGroupElement::identity(p);
    let mut report = GroupAxiomReport {
        samples,
        seed,
        associativity_failure: None,
        identity_ok: true,
        inverses_ok: true,
        wedge_bilinear_ok: wedge_bilinear_on_basis(p),
        reduction_ok: reduction_consistent(ctx),
    };
    for k in 0..samples {
        let a = PGroupElement::random(&mut rng, p);
        let b = PGroupElement::random(&mut rng, p);
        let c = PGroupElement::random(&mut rng, p);
        let left = ctx.multiply(&ctx.multiply(&a, &b), &c);
        let right = ctx.multiply(&a, &ctx.multiply(&b, &c));
        if left != right && report.associativity_failure.is_none() {
            report.associativity_failure = Some(k);
        }
        if ctx.multiply(&a, &e) != a || ctx.multiply(&e, &a) != a {
            report.identity_ok = false;
        }
        let inv = ctx.inverse(&a);
        if !ctx.multiply(&a, &inv).is_identity() || !ctx.multiply(&inv, &a).is_identity() {
            report.inverses_ok = false;
        }
    }
    report
}

/// `(a e_i + b e_j) ∧ e_k = a (e_i ∧ e_k) + b (e_j ∧ e_k)` and the mirror
/// identity, over all basis triples and a fixed pair of scalars.
fn wedge_bilinear_on_basis(p: FieldPrime) -> bool {
    let (a, b) = (p.reduce(2), p.reduce(-3));
    let unit = |i| FpVector::unit(p, DIM_V, i);
    for i in 0..DIM_V {
        for j in 0..DIM_V {
            let combo = unit(i).scale(a).add(&unit(j).scale(b));
            for k in 0..DIM_V {
                let left = wedge(&combo, &unit(k));
                let split = wedge(&unit(i), &unit(k))
                    .scale(a)
                    .add(&wedge(&unit(j), &unit(k)).scale(b));
                if left != split || wedge(&unit(k), &combo) != split.neg() {
                    return false;
                }
            }
        }
    }
    true
}

fn reduction_consistent(ctx: &PGroupContext) -> bool {
    let p = ctx.p;
    let kills_u = (0..ctx.u.dim()).all(|r| ctx.reduce(&ctx.u.basis().row_vector(r)).is_zero());
    let fixes_reps = (0..DIM_V).all(|j| {
        let c = FpVector::unit(p, DIM_V, j);
        ctx.reduce(&ctx.u.coset_representative(&c)) == c
    });
    kills_u && fixes_reps
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureReport {
    pub order_exponent: usize,
    pub class: usize,
    pub rank: usize,
    pub exponent_is_p: bool,
    pub center_dim: usize,
    pub derived_dim: usize,
    pub frattini_dim: usize,
    /// Dimension of `{v : v ∧ e_j ∈ U for all j}`; zero means no element with
    /// nonzero `V` part is central.
    pub central_v_dim: usize,
    /// Center, derived subgroup and Frattini subgroup coincide.
    pub center_equals_derived: bool,
}

#[derive(Serialize)]
struct StructureJson {
    order: String,
    class: usize,
    rank: usize,
    exponent: String,
    center_dim: usize,
    derived_dim: usize,
    frattini_dim: usize,
}

impl Serialize for StructureReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StructureJson {
            order: format!("p^{}", self.order_exponent),
            class: self.class,
            rank: self.rank,
            exponent: if self.exponent_is_p {
                "p".into()
            } else {
                "not p".into()
            },
            center_dim: self.center_dim,
            derived_dim: self.derived_dim,
            frattini_dim: self.frattini_dim,
        }
        .serialize(s)
    }
}

pub fn structure_report(ctx: &PGroupContext) -> StructureReport {
    let p = ctx.p;
    let unit = |i| FpVector::unit(p, DIM_V, i);
    let gens: Vec<PGroupElement> = (0..DIM_V)
        .map(|i| PGroupElement::generator(unit(i)))
        .collect();

    // Derived subgroup: spanned by commutators of generators, all of shape (0, c).
    let mut derived = Subspace::zero(p, DIM_V);
    let mut derived_in_second_factor = true;
    for a in &gens {
        for b in &gens {
            let c = ctx.commutator(a, b);
            derived_in_second_factor &= c.v.is_zero();
            derived.insert(&c.w).expect("length 7");
        }
    }

    // p-th powers vanish structurally; record that they are trivial on generators
    // and on a generic element.
    let generic = PGroupElement::new(
        FpVector::from_i64(p, &[1, 2, 3, 4, 5, 6, 7]),
        FpVector::from_i64(p, &[7, 6, 5, 4, 3, 2, 1]),
    )
    .expect("length 7");
    let exponent_is_p = gens
        .iter()
        .chain([&generic])
        .all(|g| ctx.power(g, p.get() as i64).is_identity())
        && !generic.is_identity();
    let mut frattini = derived.clone();
    for g in &gens {
        frattini
            .insert(&ctx.power(g, p.get() as i64).w)
            .expect("length 7");
    }

    // Central V-parts: v with reduce(v ∧ e_j) = 0 for all j, as the left kernel
    // of the 7x49 matrix whose row i is [reduce(e_i ∧ e_0) | ... | reduce(e_i ∧ e_6)].
    let mut entries = Vec::with_capacity(DIM_V * DIM_V * DIM_V);
    for i in 0..DIM_V {
        for j in 0..DIM_V {
            entries.extend_from_slice(ctx.reduce(&wedge(&unit(i), &unit(j))).entries());
        }
    }
    let central_v_dim = FpMatrix::new(p, DIM_V, DIM_V * DIM_V, entries)
        .expect("7x49")
        .kernel()
        .dim();
    let w_dim = WEDGE_DIM - ctx.u.dim();
    let center_dim = central_v_dim + w_dim;
    let derived_dim = derived.dim();
    let frattini_dim = frattini.dim();

    let class = if derived_dim == 0 {
        1
    } else if derived_in_second_factor {
        // second-factor elements commute with everything: [a,(0,w)] = (0, 2 a.v ∧ 0)
        2
    } else {
        3
    };
    StructureReport {
        order_exponent: ctx.order_exponent(),
        class,
        rank: ctx.order_exponent() - frattini_dim,
        exponent_is_p,
        center_dim,
        derived_dim,
        frattini_dim,
        central_v_dim,
        center_equals_derived: central_v_dim == 0
            && derived_dim == w_dim
            && frattini_dim == derived_dim,
    }
}

/// The automorphism `(v, w+U) -> (v g, (w+U) Q(g))` induced by a matrix `g`
/// stabilising `U`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedAutomorphism {
    pub g: FpMatrix,
    pub quotient: FpMatrix,
}

impl LiftedAutomorphism {
    pub fn apply(&self, a: &PGroupElement) -> PGroupElement {
        PGroupElement {
            v: a.v.mul_mat(&self.g).expect("7x7"),
            w: a.w.mul_mat(&self.quotient).expect("7x7"),
        }
    }

    /// Index of the first sampled pair on which the map is not multiplicative.
    pub fn homomorphism_failure(
        &self,
        ctx: &PGroupContext,
        samples: usize,
        seed: u64,
    ) -> Option<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples).find(|_| {
            let a = PGroupElement::random(&mut rng, ctx.p);
            let b = PGroupElement::random(&mut rng, ctx.p);
            self.apply(&ctx.multiply(&a, &b)) != ctx.multiply(&self.apply(&a), &self.apply(&b))
        })
    }

    /// The induced map on `P / Φ(P)`, read off the images of `(e_i, 0)`.
    pub fn frattini_action(&self) -> FpMatrix {
        let p = self.g.p;
        let rows: Vec<FpVector> = (0..DIM_V)
            .map(|i| {
                self.apply(&PGroupElement::generator(FpVector::unit(p, DIM_V, i)))
                    .v
            })
            .collect();
        FpMatrix::from_rows(p, DIM_V, &rows).expect("7 columns")
    }

    pub fn is_bijective(&self) -> bool {
        self.g.det().map(|d| d != 0).unwrap_or(false)
            && self.quotient.det().map(|d| d != 0).unwrap_or(false)
    }
}

pub fn lift_automorphism(g: &FpMatrix, ctx: &PGroupContext) -> Result<LiftedAutomorphism> {
    if g.rows != DIM_V || g.cols != DIM_V {
        return Err(OctoError::Shape(format!(
            "lifting a {}x{} matrix",
            g.rows, g.cols
        )));
    }
    let l2 = lambda2(g);
    if let Some(row) = invariance_witness(&ctx.u, &l2)? {
        return Err(OctoError::NotInvariant { row });
    }
    Ok(LiftedAutomorphism {
        g: g.clone(),
        quotient: quotient_of(&l2, &ctx.u)?,
    })
}
