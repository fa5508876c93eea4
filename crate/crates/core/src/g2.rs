//! Elements of G2(p) = Aut(O) realised as 7x7 matrices on the imaginary
//! octonions.
//!
//! An automorphism is pinned down by the images `(x, y, z)` of `i_0, i_1, i_2`
//! (a basic triple); the remaining images follow from
//! `i_3 = i_0 i_1`, `i_4 = i_1 i_2`, `i_5 = i_2 i_3`, `i_6 = i_3 i_4`.
//!
//! Sampling draws each of `x`, `y`, `z` uniformly from F_p^7 and rejects until
//! the triple constraints hold. The resulting distribution on G2(p) is not
//! claimed to be exactly uniform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{OctoError, Result};
use crate::field::FieldPrime;
use crate::linalg::FpMatrix;
use crate::octonion::{table, ImaginaryOctonion, Octonion};

pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// Largest p for which `count_triples` scans F_p^7 exhaustively.
pub const COUNT_MAX_PRIME: u32 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasicTriple {
    x: ImaginaryOctonion,
    y: ImaginaryOctonion,
    z: ImaginaryOctonion,
}

fn is_minus_one(v: &Octonion) -> bool {
    v.real() == v.p.neg(1) && v.coords()[1..].iter().all(|&c| c == 0)
}

impl BasicTriple {
    pub fn new(x: ImaginaryOctonion, y: ImaginaryOctonion, z: ImaginaryOctonion) -> Result<Self> {
        let p = x.p;
        if y.p != p || z.p != p {
            return Err(OctoError::FieldMismatch(y.p.get(), z.p.get()));
        }
        for v in [&x, &y, &z] {
            if v.norm() != 1 || !is_minus_one(&v.mul(v)) {
                return Err(OctoError::InvalidTriple("entries must square to -1"));
            }
        }
        if x.beta(&y) != 0 {
            return Err(OctoError::InvalidTriple("x and y are not orthogonal"));
        }
        let xy = x.mul(&y);
        if z.beta(&Octonion::one(p)) != 0 || z.beta(&x) != 0 || z.beta(&y) != 0 || z.beta(&xy) != 0
        {
            return Err(OctoError::InvalidTriple(
                "z is not orthogonal to <1, x, y, xy>",
            ));
        }
        Ok(BasicTriple { x, y, z })
    }

    pub fn standard(p: FieldPrime) -> Self {
        let u = |t| ImaginaryOctonion::unit(p, t);
        BasicTriple {
            x: u(0),
            y: u(1),
            z: u(2),
        }
    }

    pub fn parts(&self) -> (&ImaginaryOctonion, &ImaginaryOctonion, &ImaginaryOctonion) {
        (&self.x, &self.y, &self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Triple(BasicTriple),
    Composed,
}

/// An automorphism of the octonions, stored as its action on `i_0..i_6`:
/// row `t` of `mat7` holds the coordinates of the image of `i_t`.
#[derive(Clone, Debug)]
pub struct G2Element {
    mat7: FpMatrix,
    provenance: Provenance,
}

impl PartialEq for G2Element {
    fn eq(&self, other: &Self) -> bool {
        self.mat7 == other.mat7
    }
}

impl Eq for G2Element {}

/// Outcome of the 64-pair multiplicativity test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AutomorphismCheck {
    Holds,
    /// `phi(e_a e_b) != phi(e_a) phi(e_b)` for basis indices `a`, `b`
    /// (0 is `1`, `t+1` is `i_t`).
    FailsAt(usize, usize),
    WrongShape,
}

impl AutomorphismCheck {
    pub fn holds(self) -> bool {
        self == AutomorphismCheck::Holds
    }
}

fn basis_images(m: &FpMatrix) -> [Octonion; 8] {
    let p = m.p;
    std::array::from_fn(|k| {
        if k == 0 {
            Octonion::one(p)
        } else {
            *ImaginaryOctonion::from_slice(p, m.row(k - 1))
        }
    })
}

/// Test whether the 8x8 map fixing `1` and acting on `i_t` by row `t` of `m`
/// is multiplicative on all basis pairs.
pub fn is_automorphism(m: &FpMatrix) -> AutomorphismCheck {
    if m.rows != 7 || m.cols != 7 {
        return AutomorphismCheck::WrongShape;
    }
    let images = basis_images(m);
    let t = table();
    for a in 0..8 {
        for b in 0..8 {
            let prod = t.get(a, b);
            let lhs = if prod.negative {
                images[prod.index].neg()
            } else {
                images[prod.index]
            };
            if lhs != images[a].mul(&images[b]) {
                return AutomorphismCheck::FailsAt(a, b);
            }
        }
    }
    AutomorphismCheck::Holds
}

pub fn extend_triple(t: &BasicTriple) -> Result<G2Element> {
    let p = t.x.p;
    let (x, y, z) = (*t.x, *t.y, *t.z);
    let xy = x.mul(&y);
    let yz = y.mul(&z);
    let images = [x, y, z, xy, yz, z.mul(&xy), xy.mul(&yz)];
    let mut entries = Vec::with_capacity(49);
    for img in &images {
        entries.extend_from_slice(&img.coords()[1..]);
    }
    let mat7 = FpMatrix::from_raw(p, 7, 7, entries);
    match is_automorphism(&mat7) {
        AutomorphismCheck::Holds => Ok(G2Element {
            mat7,
            provenance: Provenance::Triple(*t),
        }),
        AutomorphismCheck::FailsAt(a, b) => Err(OctoError::ConstructionFailure(a, b)),
        AutomorphismCheck::WrongShape => unreachable!(),
    }
}

impl G2Element {
    pub fn identity(p: FieldPrime) -> Self {
        G2Element {
            mat7: FpMatrix::identity(p, 7),
            provenance: Provenance::Triple(BasicTriple::standard(p)),
        }
    }

    /// `i_t -> i_{t+1}`.
    pub fn shift(p: FieldPrime) -> Self {
        let u = |t| ImaginaryOctonion::unit(p, t);
        let triple = BasicTriple::new(u(1), u(2), u(3)).expect("shifted standard triple is basic");
        extend_triple(&triple).expect("index shift is an automorphism")
    }

    /// Wrap a matrix after checking multiplicativity.
    pub fn from_matrix(m: FpMatrix) -> std::result::Result<Self, AutomorphismCheck> {
        match is_automorphism(&m) {
            AutomorphismCheck::Holds => Ok(G2Element {
                mat7: m,
                provenance: Provenance::Composed,
            }),
            failure => Err(failure),
        }
    }

    pub fn matrix(&self) -> &FpMatrix {
        &self.mat7
    }

    pub fn into_matrix(self) -> FpMatrix {
        self.mat7
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn p(&self) -> FieldPrime {
        self.mat7.p
    }

    /// `g` then `h`.
    pub fn compose(&self, h: &G2Element) -> Result<G2Element> {
        Ok(G2Element {
            mat7: self.mat7.mul(&h.mat7)?,
            provenance: Provenance::Composed,
        })
    }

    pub fn inverse(&self) -> G2Element {
        let inv = self
            .mat7
            .inverse()
            .expect("square")
            .expect("automorphisms are invertible");
        G2Element {
            mat7: inv,
            provenance: Provenance::Composed,
        }
    }

    /// Image of an imaginary octonion.
    pub fn apply(&self, x: &ImaginaryOctonion) -> ImaginaryOctonion {
        let v = x.to_vector().mul_mat(&self.mat7).expect("7x7");
        ImaginaryOctonion::from_vector(&v).expect("length 7")
    }
}

/// Deterministic source of G2(p) elements: sample `k` depends only on
/// `(seed, k)`.
#[derive(Clone, Copy, Debug)]
pub struct G2Sampler {
    pub p: FieldPrime,
    pub seed: u64,
    pub max_attempts: u64,
}

impl G2Sampler {
    pub fn new(p: FieldPrime, seed: u64) -> Self {
        G2Sampler {
            p,
            seed,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    pub fn sample(&self, index: u64) -> Result<G2Element> {
        let mut rng = self.rng(index);
        let triple = self.draw_triple(&mut rng)?;
        extend_triple(&triple)
    }

    pub fn batch(&self, count: usize) -> Result<Vec<G2Element>> {
        (0..count as u64)
            .into_par_iter()
            .map(|k| self.sample(k))
            .collect()
    }

    fn draw_until(
        &self,
        rng: &mut ChaCha8Rng,
        attempts: &mut u64,
        accept: impl Fn(&ImaginaryOctonion) -> bool,
    ) -> Result<ImaginaryOctonion> {
        let p = self.p;
        loop {
            if *attempts >= self.max_attempts {
                return Err(OctoError::SamplingExhausted(self.max_attempts));
            }
            *attempts += 1;
            let coeffs: [u32; 7] = std::array::from_fn(|_| rng.random_range(0..p.get()));
            let v = ImaginaryOctonion::from_slice(p, &coeffs);
            if accept(&v) {
                return Ok(v);
            }
        }
    }

    pub fn draw_triple(&self, rng: &mut ChaCha8Rng) -> Result<BasicTriple> {
        let one = Octonion::one(self.p);
        let mut attempts = 0;
        let x = self.draw_until(rng, &mut attempts, |v| v.norm() == 1)?;
        let y = self.draw_until(rng, &mut attempts, |v| v.norm() == 1 && v.beta(&x) == 0)?;
        let xy = x.mul(&y);
        let z = self.draw_until(rng, &mut attempts, |v| {
            v.norm() == 1
                && v.beta(&one) == 0
                && v.beta(&x) == 0
                && v.beta(&y) == 0
                && v.beta(&xy) == 0
        })?;
        BasicTriple::new(x, y, z)
    }
}

/// A single seeded sample.
pub fn random_g2(seed: u64, p: FieldPrime) -> Result<G2Element> {
    G2Sampler::new(p, seed).sample(0)
}

/// Staged exhaustive counts of basic triples.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct TripleCounts {
    pub p: u32,
    pub n_x: u64,
    pub n_y_given_x: u64,
    pub n_z_given_xy: u64,
    pub product: u64,
    /// Stage counts recomputed for alternative first/second stage choices.
    pub alternatives: Vec<(u64, u64)>,
}

impl TripleCounts {
    pub fn stages_independent(&self) -> bool {
        self.alternatives
            .iter()
            .all(|&(ny, nz)| ny == self.n_y_given_x && nz == self.n_z_given_xy)
    }
}

fn all_imaginary(p: FieldPrime) -> impl Iterator<Item = ImaginaryOctonion> {
    let q = p.get();
    let total = (q as u64).pow(7);
    (0..total).map(move |mut k| {
        let coeffs: [u32; 7] = std::array::from_fn(|_| {
            let d = (k % q as u64) as u32;
            k /= q as u64;
            d
        });
        ImaginaryOctonion::from_slice(p, &coeffs)
    })
}

fn squares_to(v: &Octonion, target: u32) -> bool {
    let sq = v.mul(v);
    sq.real() == target && sq.coords()[1..].iter().all(|&c| c == 0)
}

/// Number of imaginary `x` with `x^2 = target * 1`, by full scan of F_p^7.
pub fn count_square_roots(p: FieldPrime, target: i64) -> Result<u64> {
    if p.get() > COUNT_MAX_PRIME {
        return Err(OctoError::PrimeTooLarge(p.get(), COUNT_MAX_PRIME));
    }
    let t = p.reduce(target);
    Ok(all_imaginary(p).filter(|v| squares_to(v, t)).count() as u64)
}

fn y_candidates(p: FieldPrime, x: &Octonion) -> impl Iterator<Item = ImaginaryOctonion> + '_ {
    let m1 = p.neg(1);
    all_imaginary(p).filter(move |v| squares_to(v, m1) && v.beta(x) == 0)
}

fn count_z(p: FieldPrime, x: &Octonion, y: &Octonion) -> u64 {
    let m1 = p.neg(1);
    let one = Octonion::one(p);
    let xy = x.mul(y);
    all_imaginary(p)
        .filter(|v| {
            squares_to(v, m1)
                && v.beta(&one) == 0
                && v.beta(x) == 0
                && v.beta(y) == 0
                && v.beta(&xy) == 0
        })
        .count() as u64
}

/// Count basic triples stage by stage. The first stage choices are the
/// first hits in scan order; five further `(x, y)` choices drawn with `seed`
/// are recounted to confirm the stage counts do not depend on the choice.
pub fn count_triples(p: FieldPrime, seed: u64) -> Result<TripleCounts> {
    if p.get() > COUNT_MAX_PRIME {
        return Err(OctoError::PrimeTooLarge(p.get(), COUNT_MAX_PRIME));
    }
    let m1 = p.neg(1);
    let xs: Vec<ImaginaryOctonion> = all_imaginary(p).filter(|v| squares_to(v, m1)).collect();
    let n_x = xs.len() as u64;
    let x0 = *xs[0];
    let ys: Vec<ImaginaryOctonion> = y_candidates(p, &x0).collect();
    let n_y = ys.len() as u64;
    let n_z = count_z(p, &x0, &ys[0]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = (0..5).map(|_| rng.random_range(0..xs.len())).collect();
    let alternatives = picks
        .into_par_iter()
        .enumerate()
        .map(|(k, xi)| {
            let x = *xs[xi];
            let ys: Vec<ImaginaryOctonion> = y_candidates(p, &x).collect();
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(k as u64 + 1);
            let y = ys[r.random_range(0..ys.len())];
            (ys.len() as u64, count_z(p, &x, &y))
        })
        .collect();

    Ok(TripleCounts {
        p: p.get(),
        n_x,
        n_y_given_x: n_y,
        n_z_given_xy: n_z,
        product: n_x * n_y * n_z,
        alternatives,
    })
}
