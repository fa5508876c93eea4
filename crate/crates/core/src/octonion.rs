//! The eight-dimensional octonion algebra over F_p.
//!
//! Basis order is `{1, i_0, ..., i_6}`; coordinate 0 is the real part and
//! coordinate `t + 1` is the coefficient of `i_t`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{OctoError, Result};
use crate::field::FieldPrime;
use crate::linalg::FpVector;

/// Product of two basis elements: `sign * e_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisProduct {
    pub negative: bool,
    pub index: usize,
}

impl fmt::Display for BasisProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative { '-' } else { '+' };
        write!(f, "{sign}{}", basis_symbol(self.index))
    }
}

pub fn basis_symbol(index: usize) -> String {
    if index == 0 {
        "1".to_string()
    } else {
        format!("i{}", index - 1)
    }
}

/// The frozen 8x8 table of basis products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicationTable {
    entries: [[BasisProduct; 8]; 8],
    /// For each output coordinate, the `(a, b, negative)` input pairs landing there.
    by_output: [Vec<(usize, usize, bool)>; 8],
}

impl MultiplicationTable {
    fn build() -> Self {
        let mut slots: [[Option<BasisProduct>; 8]; 8] = [[None; 8]; 8];
        let mut put = |a: usize, b: usize, prod: BasisProduct| {
            assert!(
                slots[a][b].is_none(),
                "table slot ({a}, {b}) assigned twice"
            );
            slots[a][b] = Some(prod);
        };
        let pos = |index| BasisProduct {
            negative: false,
            index,
        };
        let neg = |index| BasisProduct {
            negative: true,
            index,
        };
        let imag = |t: usize| (t % 7) + 1;

        for e in 0..8 {
            put(0, e, pos(e));
            if e != 0 {
                put(e, 0, pos(e));
            }
        }
        for t in 0..7 {
            put(imag(t), imag(t), neg(0));
        }
        for t in 0..7 {
            for (a, b, c) in [(t, t + 1, t + 3), (t + 1, t + 3, t), (t + 3, t, t + 1)] {
                put(imag(a), imag(b), pos(imag(c)));
                put(imag(b), imag(a), neg(imag(c)));
            }
        }

        let entries = slots.map(|row| row.map(|s| s.expect("every basis pair is covered")));
        let mut by_output: [Vec<(usize, usize, bool)>; 8] = Default::default();
        for (a, row) in entries.iter().enumerate() {
            for (b, prod) in row.iter().enumerate() {
                by_output[prod.index].push((a, b, prod.negative));
            }
        }
        MultiplicationTable { entries, by_output }
    }

    pub fn get(&self, a: usize, b: usize) -> BasisProduct {
        self.entries[a][b]
    }

    /// Signed basis symbols, row `a` column `b` holding `e_a * e_b`.
    pub fn symbols(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|p| p.to_string()).collect())
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::from("  *  ");
        for b in 0..8 {
            out.push_str(&format!("{:>5}", basis_symbol(b)));
        }
        out.push('\n');
        for a in 0..8 {
            out.push_str(&format!("{:>4} ", basis_symbol(a)));
            for b in 0..8 {
                out.push_str(&format!("{:>5}", self.entries[a][b].to_string()));
            }
            out.push('\n');
        }
        out
    }
}

pub fn table() -> &'static MultiplicationTable {
    static TABLE: OnceLock<MultiplicationTable> = OnceLock::new();
    TABLE.get_or_init(MultiplicationTable::build)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "OctonionJson")]
pub struct Octonion {
    pub p: FieldPrime,
    coords: [u32; 8],
}

#[derive(Deserialize)]
struct OctonionJson {
    p: FieldPrime,
    coords: [u64; 8],
}

impl TryFrom<OctonionJson> for Octonion {
    type Error = OctoError;
    fn try_from(raw: OctonionJson) -> Result<Self> {
        let mut coords = [0u32; 8];
        for (c, &r) in coords.iter_mut().zip(&raw.coords) {
            *c = raw.p.check(r)?;
        }
        Ok(Octonion { p: raw.p, coords })
    }
}

impl Octonion {
    pub fn new(p: FieldPrime, coords: [u32; 8]) -> Result<Self> {
        for &c in &coords {
            p.check(c as u64)?;
        }
        Ok(Octonion { p, coords })
    }

    pub fn from_i64(p: FieldPrime, coords: [i64; 8]) -> Self {
        Octonion {
            p,
            coords: coords.map(|c| p.reduce(c)),
        }
    }

    pub fn zero(p: FieldPrime) -> Self {
        Octonion { p, coords: [0; 8] }
    }

    pub fn one(p: FieldPrime) -> Self {
        Self::basis(p, 0)
    }

    /// Basis element `e_index` (index 0 is `1`, index `t+1` is `i_t`).
    pub fn basis(p: FieldPrime, index: usize) -> Self {
        let mut coords = [0; 8];
        coords[index] = 1;
        Octonion { p, coords }
    }

    /// The imaginary unit `i_t`, `t` taken mod 7.
    pub fn unit(p: FieldPrime, t: usize) -> Self {
        Self::basis(p, t % 7 + 1)
    }

    pub fn scalar(p: FieldPrime, c: u32) -> Self {
        let mut coords = [0; 8];
        coords[0] = c % p.get();
        Octonion { p, coords }
    }

    pub fn coords(&self) -> &[u32; 8] {
        &self.coords
    }

    pub fn real(&self) -> u32 {
        self.coords[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn is_imaginary(&self) -> bool {
        self.coords[0] == 0
    }

    fn check_field(&self, other: &Octonion) -> Result<()> {
        if self.p != other.p {
            Err(OctoError::FieldMismatch(self.p.get(), other.p.get()))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Octonion) -> Octonion {
        let p = self.p;
        Octonion {
            p,
            coords: std::array::from_fn(|i| p.add(self.coords[i], other.coords[i])),
        }
    }

    pub fn sub(&self, other: &Octonion) -> Octonion {
        let p = self.p;
        Octonion {
            p,
            coords: std::array::from_fn(|i| p.sub(self.coords[i], other.coords[i])),
        }
    }

    pub fn neg(&self) -> Octonion {
        let p = self.p;
        Octonion {
            p,
            coords: self.coords.map(|c| p.neg(c)),
        }
    }

    pub fn scale(&self, c: u32) -> Octonion {
        let p = self.p;
        Octonion {
            p,
            coords: self.coords.map(|x| p.mul(x, c)),
        }
    }

    /// Coordinate `k` of `self * other`.
    fn product_coord(&self, other: &Octonion, k: usize) -> u32 {
        let p = self.p;
        let pm = p.get() as u64;
        let (mut plus, mut minus) = (0u64, 0u64);
        for &(a, b, negative) in &table().by_output[k] {
            let t = self.coords[a] as u64 * other.coords[b] as u64 % pm;
            if negative {
                minus += t;
            } else {
                plus += t;
            }
        }
        p.sub((plus % pm) as u32, (minus % pm) as u32)
    }

    /// Bilinear extension of the basis table.
    pub fn mul(&self, other: &Octonion) -> Octonion {
        debug_assert_eq!(self.p, other.p);
        Octonion {
            p: self.p,
            coords: std::array::from_fn(|k| self.product_coord(other, k)),
        }
    }

    pub fn try_mul(&self, other: &Octonion) -> Result<Octonion> {
        self.check_field(other)?;
        Ok(self.mul(other))
    }

    pub fn conjugate(&self) -> Octonion {
        let p = self.p;
        let mut coords = self.coords.map(|c| p.neg(c));
        coords[0] = self.coords[0];
        Octonion { p, coords }
    }

    pub fn re(&self) -> Octonion {
        Self::scalar(self.p, self.coords[0])
    }

    pub fn im(&self) -> ImaginaryOctonion {
        let mut coords = self.coords;
        coords[0] = 0;
        ImaginaryOctonion(Octonion { p: self.p, coords })
    }

    /// The scalar `n` with `x * conj(x) = n * 1`.
    pub fn norm(&self) -> u32 {
        self.product_coord(&self.conjugate(), 0)
    }

    /// `Re(x * conj(y))`.
    pub fn beta(&self, other: &Octonion) -> u32 {
        self.product_coord(&other.conjugate(), 0)
    }
}

impl fmt::Display for Octonion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coords
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| format!("{c}*{}", basis_symbol(i)))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// An octonion with zero real part, i.e. an element of span{i_0..i_6}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ImaginaryOctonion(Octonion);

impl ImaginaryOctonion {
    pub fn new(x: Octonion) -> Result<Self> {
        if x.is_imaginary() {
            Ok(ImaginaryOctonion(x))
        } else {
            Err(OctoError::NotImaginary)
        }
    }

    pub fn unit(p: FieldPrime, t: usize) -> Self {
        ImaginaryOctonion(Octonion::unit(p, t))
    }

    pub fn zero(p: FieldPrime) -> Self {
        ImaginaryOctonion(Octonion::zero(p))
    }

    /// From the seven coefficients of `i_0..i_6`.
    pub fn from_slice(p: FieldPrime, coeffs: &[u32]) -> Self {
        debug_assert_eq!(coeffs.len(), 7);
        let mut coords = [0; 8];
        coords[1..].copy_from_slice(coeffs);
        ImaginaryOctonion(Octonion { p, coords })
    }

    pub fn from_vector(v: &FpVector) -> Result<Self> {
        if v.len() != 7 {
            return Err(OctoError::Shape(format!(
                "imaginary octonion from {} coordinates",
                v.len()
            )));
        }
        Ok(Self::from_slice(v.p, v.entries()))
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.0.coords[1..]
    }

    pub fn to_vector(&self) -> FpVector {
        FpVector::from_raw(self.0.p, self.coeffs().to_vec())
    }

    pub fn as_octonion(&self) -> &Octonion {
        &self.0
    }

    pub fn neg(&self) -> Self {
        ImaginaryOctonion(self.0.neg())
    }
}

impl std::ops::Deref for ImaginaryOctonion {
    type Target = Octonion;
    fn deref(&self) -> &Octonion {
        &self.0
    }
}

/// `Im(x y)` for imaginary `x`, `y`.
pub fn f_map(x: &Octonion, y: &Octonion) -> Result<ImaginaryOctonion> {
    if !x.is_imaginary() || !y.is_imaginary() {
        return Err(OctoError::NotImaginary);
    }
    Ok(x.try_mul(y)?.im())
}
