//! The exterior square of the seven-dimensional module, the map
//! `f~ : x ∧ y -> Im(xy)`, its 14-dimensional kernel `U`, and the
//! module-level checks built on them (invariance, spinning, Hom spaces).
//!
//! Wedge coordinates are indexed by pairs `(s, t)` with `s < t` in
//! lexicographic order. Coordinates on the quotient `Λ²V / U` are the seven
//! non-pivot coordinates of a vector after reduction against `U`'s echelon
//! basis.

use std::collections::VecDeque;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{OctoError, Result};
use crate::field::FieldPrime;
use crate::g2::G2Element;
use crate::linalg::{FpMatrix, FpVector, Subspace};
use crate::octonion::{f_map, Octonion};

pub const DIM_V: usize = 7;
pub const WEDGE_DIM: usize = 21;
pub const U_DIM: usize = 14;

/// Lexicographic pairs `(s, t)`, `s < t < n`.
pub fn wedge_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|s| (s + 1..n).map(move |t| (s, t)))
        .collect()
}

/// Position of `(s, t)`, `s < t < n`, in the lexicographic order.
pub fn wedge_index(n: usize, s: usize, t: usize) -> usize {
    debug_assert!(s < t && t < n);
    s * (2 * n - s - 1) / 2 + (t - s - 1)
}

/// `u ∧ v`, coordinate `(s, t)` being `u_s v_t - u_t v_s`.
pub fn wedge(u: &FpVector, v: &FpVector) -> FpVector {
    let p = u.p;
    let n = u.len();
    debug_assert_eq!(n, v.len());
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for s in 0..n {
        for t in s + 1..n {
            out.push(p.sub(p.mul(u[s], v[t]), p.mul(u[t], v[s])));
        }
    }
    FpVector::new(p, out).expect("canonical")
}

/// The induced action on the exterior square: row `(s, t)` is
/// `(e_s g) ∧ (e_t g)`.
pub fn lambda2(g: &FpMatrix) -> FpMatrix {
    assert!(g.is_square(), "lambda2 of a non-square matrix");
    let n = g.rows;
    let rows = g.row_vectors();
    let images: Vec<FpVector> = wedge_pairs(n)
        .into_iter()
        .map(|(s, t)| wedge(&rows[s], &rows[t]))
        .collect();
    FpMatrix::from_rows(g.p, n * (n - 1) / 2, &images).expect("wedge rows have matching length")
}

/// The 21x7 matrix of `f~`: row `(s, t)` holds `Im(i_s i_t)`.
pub fn ftilde_matrix(p: FieldPrime) -> FpMatrix {
    let rows: Vec<FpVector> = wedge_pairs(DIM_V)
        .into_iter()
        .map(|(s, t)| {
            f_map(&Octonion::unit(p, s), &Octonion::unit(p, t))
                .expect("basis units are imaginary")
                .to_vector()
        })
        .collect();
    FpMatrix::from_rows(p, DIM_V, &rows).expect("seven columns")
}

/// `ker f~`, a 14-dimensional subspace of the 21-dimensional exterior square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SubspaceU {
    space: Subspace,
    #[serde(skip)]
    non_pivots: Vec<usize>,
}

impl<'de> Deserialize<'de> for SubspaceU {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let space = Subspace::deserialize(d)?;
        SubspaceU::new(space).map_err(serde::de::Error::custom)
    }
}

impl SubspaceU {
    pub fn new(space: Subspace) -> Result<Self> {
        if space.ambient_dim != WEDGE_DIM || space.dim() != U_DIM {
            return Err(OctoError::Shape(format!(
                "expected a {U_DIM}-dimensional subspace of F_p^{WEDGE_DIM}, got dimension {} in {}",
                space.dim(),
                space.ambient_dim
            )));
        }
        let non_pivots = space.non_pivots();
        Ok(SubspaceU { space, non_pivots })
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn non_pivots(&self) -> &[usize] {
        &self.non_pivots
    }

    /// Coordinates of `w + U` in `Λ²V / U`.
    pub fn coset_coords(&self, w: &FpVector) -> Result<FpVector> {
        let r = self.space.reduce(w)?;
        Ok(FpVector::new(w.p, self.non_pivots.iter().map(|&c| r[c]).collect()).expect("canonical"))
    }

    /// The canonical representative of the coset with coordinates `c`.
    pub fn coset_representative(&self, c: &FpVector) -> FpVector {
        let mut out = vec![0u32; WEDGE_DIM];
        for (&col, &x) in self.non_pivots.iter().zip(c.entries()) {
            out[col] = x;
        }
        FpVector::new(c.p, out).expect("canonical")
    }
}

impl Deref for SubspaceU {
    type Target = Subspace;
    fn deref(&self) -> &Subspace {
        &self.space
    }
}

pub fn kernel_u(p: FieldPrime) -> SubspaceU {
    SubspaceU::new(ftilde_matrix(p).kernel()).expect("ker f~ has dimension 14")
}

/// First basis row of `u` whose image under `m` leaves `u`.
pub fn invariance_witness(u: &Subspace, m: &FpMatrix) -> Result<Option<usize>> {
    if !m.is_square() || m.rows != u.ambient_dim {
        return Err(OctoError::Shape(format!(
            "{}x{} matrix on a subspace of dimension-{} space",
            m.rows, m.cols, u.ambient_dim
        )));
    }
    for r in 0..u.dim() {
        let image = u.basis().row_vector(r).mul_mat(m)?;
        if !u.contains(&image)? {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

pub fn is_invariant(u: &Subspace, m: &FpMatrix) -> Result<bool> {
    Ok(invariance_witness(u, m)?.is_none())
}

/// `Λ²(g) F = F g`.
pub fn equivariance_check(g: &FpMatrix) -> bool {
    let f = ftilde_matrix(g.p);
    match (lambda2(g).mul(&f), f.mul(g)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

pub fn g2_equivariant(g: &G2Element) -> bool {
    equivariance_check(g.matrix())
}

/// Smallest subspace containing `v` and closed under every matrix in `gens`.
pub fn spin(v: &FpVector, gens: &[FpMatrix]) -> Result<Subspace> {
    if v.is_zero() {
        return Err(OctoError::ZeroVector);
    }
    let n = v.len();
    let mut span = Subspace::zero(v.p, n);
    span.insert(v)?;
    let mut queue = VecDeque::from([v.clone()]);
    while let Some(w) = queue.pop_front() {
        for g in gens {
            let image = w.mul_mat(g)?;
            if span.insert(&image)? {
                if span.dim() == n {
                    return Ok(span);
                }
                queue.push_back(image);
            }
        }
    }
    Ok(span)
}

/// Matrix of `Λ²(g)` on `Λ²V / U` in coset coordinates.
pub fn quotient_action(g: &FpMatrix, u: &SubspaceU) -> Result<FpMatrix> {
    quotient_of(&lambda2(g), u)
}

/// Matrix induced on `Λ²V / U` by a 21x21 matrix stabilising `U`.
pub fn quotient_of(l2: &FpMatrix, u: &SubspaceU) -> Result<FpMatrix> {
    if let Some(row) = invariance_witness(u, l2)? {
        return Err(OctoError::NotInvariant { row });
    }
    let p = l2.p;
    let rows = u
        .non_pivots()
        .iter()
        .map(|&c| u.coset_coords(&FpVector::unit(p, WEDGE_DIM, c).mul_mat(l2)?))
        .collect::<Result<Vec<_>>>()?;
    FpMatrix::from_rows(p, DIM_V, &rows)
}

/// The space of intertwiners `X` (n x m) with `A_i X = X B_i` for all `i`.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub rows: usize,
    pub cols: usize,
    pub basis: Vec<FpMatrix>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Solve the intertwining equations generator by generator, shrinking the
/// candidate space each time.
pub fn hom_space(gens_a: &[FpMatrix], gens_b: &[FpMatrix]) -> Result<HomSpace> {
    if gens_a.len() != gens_b.len() || gens_a.is_empty() {
        return Err(OctoError::Shape(format!(
            "hom_space needs matched generator lists, got {} and {}",
            gens_a.len(),
            gens_b.len()
        )));
    }
    let p = gens_a[0].p;
    let (n, m) = (gens_a[0].rows, gens_b[0].rows);
    if gens_a.iter().any(|a| !a.is_square() || a.rows != n)
        || gens_b.iter().any(|b| !b.is_square() || b.rows != m)
    {
        return Err(OctoError::Shape(
            "generators must be square of a common size".into(),
        ));
    }
    let mut basis: Vec<FpMatrix> = (0..n * m)
        .map(|k| {
            let mut x = FpMatrix::zeros(p, n, m);
            x.set(k / m, k % m, 1);
            x
        })
        .collect();
    for (a, b) in gens_a.iter().zip(gens_b) {
        if basis.is_empty() {
            break;
        }
        let residuals = basis
            .iter()
            .map(|x| {
                let r = a.mul(x)?.sub(&x.mul(b)?)?;
                FpVector::new(p, r.entries().to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        let coeffs = FpMatrix::from_rows(p, n * m, &residuals)?.kernel();
        let flat = FpMatrix::from_rows(
            p,
            n * m,
            &basis
                .iter()
                .map(|x| FpVector::new(p, x.entries().to_vec()))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let next = coeffs.basis().mul(&flat)?;
        basis = Subspace::row_space(&next)
            .basis()
            .row_vectors()
            .into_iter()
            .map(|v| FpMatrix::new(p, n, m, v.into_entries()))
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(HomSpace {
        rows: n,
        cols: m,
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2::G2Sampler;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fp(p: u64) -> FieldPrime {
        FieldPrime::new(p).unwrap()
    }

    fn random_vector(rng: &mut impl Rng, p: FieldPrime, n: usize) -> FpVector {
        FpVector::new(p, (0..n).map(|_| rng.random_range(0..p.get())).collect()).unwrap()
    }

    fn random_invertible(rng: &mut impl Rng, p: FieldPrime, n: usize) -> FpMatrix {
        loop {
            let rows: Vec<_> = (0..n).map(|_| random_vector(rng, p, n)).collect();
            let m = FpMatrix::from_rows(p, n, &rows).unwrap();
            if m.det().unwrap() != 0 {
                return m;
            }
        }
    }

    fn e(p: FieldPrime, s: usize, t: usize) -> FpVector {
        FpVector::unit(p, WEDGE_DIM, wedge_index(DIM_V, s, t))
    }

    #[test]
    fn wedge_index_matches_pairs() {
        for (k, (s, t)) in wedge_pairs(7).into_iter().enumerate() {
            assert_eq!(wedge_index(7, s, t), k);
        }
        assert_eq!(wedge_pairs(7).len(), 21);
    }

    #[test]
    fn wedge_basics() {
        let p = fp(5);
        let w = wedge(&FpVector::unit(p, 7, 0), &FpVector::unit(p, 7, 1));
        assert_eq!(w, FpVector::unit(p, 21, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let u = random_vector(&mut rng, p, 7);
            let v = random_vector(&mut rng, p, 7);
            assert!(wedge(&u, &u).is_zero());
            assert_eq!(wedge(&u, &v), wedge(&v, &u).neg());
        }
    }

    #[test]
    fn lambda2_functorial() {
        let p = fp(7);
        assert_eq!(
            lambda2(&FpMatrix::identity(p, 7)),
            FpMatrix::identity(p, 21)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let gs = G2Sampler::new(p, 4).batch(6).unwrap();
        for w in gs.windows(2) {
            let (g, h) = (w[0].matrix(), w[1].matrix());
            assert_eq!(
                lambda2(g).mul(&lambda2(h)).unwrap(),
                lambda2(&g.mul(h).unwrap())
            );
        }
        for _ in 0..10 {
            let g = random_invertible(&mut rng, p, 7);
            let u = random_vector(&mut rng, p, 7);
            let v = random_vector(&mut rng, p, 7);
            let lhs = wedge(&u, &v).mul_mat(&lambda2(&g)).unwrap();
            assert_eq!(lhs, wedge(&u.mul_mat(&g).unwrap(), &v.mul_mat(&g).unwrap()));
            assert_eq!(lambda2(&g).det().unwrap(), p.pow(g.det().unwrap(), 6));
        }
    }

    #[test]
    fn ftilde_rows() {
        let p = fp(3);
        let f = ftilde_matrix(p);
        assert_eq!(f.row_vector(wedge_index(7, 1, 3)), FpVector::unit(p, 7, 0));
        assert_eq!(f.row_vector(wedge_index(7, 0, 1)), FpVector::unit(p, 7, 3));
        assert_eq!(f.rank(), 7);
        for r in 0..21 {
            let row = f.row(r);
            assert_eq!(row.iter().filter(|&&x| x != 0).count(), 1);
            assert!(row.iter().all(|&x| x == 0 || x == 1 || x == p.neg(1)));
        }
    }

    #[test]
    fn kernel_membership_examples() {
        for q in [3, 5, 7, 11] {
            let p = fp(q);
            let u = kernel_u(p);
            assert_eq!(u.dim(), 14);
            assert!(u.contains(&e(p, 0, 1).add(&e(p, 2, 5))).unwrap());
            assert!(!u.contains(&e(p, 0, 1)).unwrap());
        }
    }

    #[test]
    fn scalars_and_g2_stabilise_u() {
        let p = fp(5);
        let u = kernel_u(p);
        for lambda in 1..5 {
            assert!(is_invariant(&u, &FpMatrix::scalar(p, 21, lambda)).unwrap());
        }
        for g in G2Sampler::new(p, 8).batch(20).unwrap() {
            assert!(is_invariant(&u, &lambda2(g.matrix())).unwrap());
            assert!(g2_equivariant(&g));
        }
        assert!(equivariance_check(G2Element::shift(p).matrix()));
        assert!(equivariance_check(&FpMatrix::identity(p, 7)));
    }

    #[test]
    fn random_invertible_breaks_equivariance() {
        let p = fp(7);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let found = (0..20).any(|_| !equivariance_check(&random_invertible(&mut rng, p, 7)));
        assert!(found);
    }

    #[test]
    fn spin_rejects_zero_and_closes() {
        let p = fp(3);
        assert!(matches!(
            spin(&FpVector::zeros(p, 7), &[]),
            Err(OctoError::ZeroVector)
        ));
        let gens: Vec<FpMatrix> = G2Sampler::new(p, 3)
            .batch(10)
            .unwrap()
            .into_iter()
            .map(|g| g.into_matrix())
            .collect();
        let s = spin(&FpVector::unit(p, 7, 0), &gens).unwrap();
        assert_eq!(s.dim(), 7);
        // no generators: just the line
        assert_eq!(spin(&FpVector::unit(p, 7, 2), &[]).unwrap().dim(), 1);
    }

    #[test]
    fn quotient_action_identity_and_errors() {
        let p = fp(5);
        let u = kernel_u(p);
        assert_eq!(
            quotient_action(&FpMatrix::identity(p, 7), &u).unwrap(),
            FpMatrix::identity(p, 7)
        );
        let mut bad = FpMatrix::identity(p, 7);
        bad.set(0, 1, 1);
        assert!(matches!(
            quotient_action(&bad, &u),
            Err(OctoError::NotInvariant { .. })
        ));
    }

    #[test]
    fn coset_roundtrip() {
        let p = fp(7);
        let u = kernel_u(p);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let w = random_vector(&mut rng, p, 21);
            let c = u.coset_coords(&w).unwrap();
            let rep = u.coset_representative(&c);
            assert!(u.contains(&w.sub(&rep)).unwrap());
        }
    }

    #[test]
    fn hom_space_small_cases() {
        let p = fp(5);
        // trivial group: everything intertwines
        let id2 = FpMatrix::identity(p, 2);
        let id3 = FpMatrix::identity(p, 3);
        assert_eq!(
            hom_space(std::slice::from_ref(&id2), std::slice::from_ref(&id3))
                .unwrap()
                .dim(),
            6
        );
        // a 2x2 Jordan block commutes with polynomials in itself
        let j = FpMatrix::from_i64(p, 2, 2, &[1, 1, 0, 1]).unwrap();
        let h = hom_space(std::slice::from_ref(&j), std::slice::from_ref(&j)).unwrap();
        assert_eq!(h.dim(), 2);
        for x in &h.basis {
            assert_eq!(j.mul(x).unwrap(), x.mul(&j).unwrap());
        }
        assert!(hom_space(&[id2], &[]).is_err());
    }

    #[test]
    fn subspace_u_json_roundtrip() {
        let p = fp(3);
        let u = kernel_u(p);
        let s = serde_json::to_string(&u).unwrap();
        let back: SubspaceU = serde_json::from_str(&s).unwrap();
        assert!(back.equals(&u).unwrap());
        assert_eq!(back.non_pivots(), u.non_pivots());
        let line = serde_json::to_string(&Subspace::full(p, 21)).unwrap();
        assert!(serde_json::from_str::<SubspaceU>(&line).is_err());
    }
}
