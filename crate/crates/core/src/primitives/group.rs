//! Thin newtypes over the BLS12-381 type-3 pairing groups.
//!
//! Target-group elements are written multiplicatively here even though
//! arkworks models `PairingOutput` additively.

use alloc::vec::Vec;

use ark_bls12_381::{Bls12_381, Fr, G1Affine, G2Affine};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup, PrimeGroup};
use ark_ff::{BigInteger, Field, One, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand_core::{CryptoRng, RngCore};

use crate::error::{Error, Result};

type Gt = PairingOutput<Bls12_381>;

/// Non-zero exponent modulo the group order `p`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Scalar(pub(crate) Fr);

impl Scalar {
    pub const LEN: usize = 32;

    pub fn one() -> Self {
        Self(Fr::one())
    }

    pub fn from_u64(v: u64) -> Result<Self> {
        Self::from_field(Fr::from(v))
    }

    /// `p - 1`.
    pub fn minus_one() -> Self {
        Self(-Fr::one())
    }

    pub(crate) fn from_field(f: Fr) -> Result<Self> {
        if f.is_zero() {
            Err(Error::ZeroScalar)
        } else {
            Ok(Self(f))
        }
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let f = Fr::rand(rng);
            if !f.is_zero() {
                return Self(f);
            }
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0.inverse().map(Self).ok_or(Error::ZeroScalar)
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        // Product of two non-zero elements of a prime field is non-zero.
        Scalar(self.0 * other.0)
    }

    /// `self / other`.
    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&other.inverse()?))
    }

    /// 32-byte big-endian encoding.
    pub fn to_bytes(&self) -> [u8; 32] {
        let be = self.0.into_bigint().to_bytes_be();
        let mut out = [0u8; 32];
        out.copy_from_slice(&be);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::LEN {
            return Err(Error::Decode("scalar must be 32 bytes"));
        }
        let mut le = [0u8; 32];
        le.copy_from_slice(bytes);
        le.reverse();
        let f = Fr::deserialize_compressed(&le[..]).map_err(|_| Error::Decode("scalar out of range"))?;
        Self::from_field(f).map_err(|_| Error::Decode("scalar is zero"))
    }
}

macro_rules! curve_point {
    ($name:ident, $affine:ty, $len:expr) => {
        #[derive(Clone, Copy, PartialEq, Eq, Debug)]
        pub struct $name(pub(crate) $affine);

        impl $name {
            pub const LEN: usize = $len;

            #[allow(dead_code)]
            pub(crate) fn from_affine(p: $affine) -> Self {
                Self(p)
            }

            pub fn generator() -> Self {
                Self(<$affine>::generator())
            }

            pub fn mul(&self, k: &Scalar) -> Self {
                Self((self.0 * k.0).into_affine())
            }

            pub(crate) fn mul_fr(&self, k: &Fr) -> Self {
                Self((self.0 * k).into_affine())
            }

            pub fn add(&self, other: &Self) -> Self {
                Self((self.0 + other.0).into_affine())
            }

            pub fn neg(&self) -> Self {
                Self(-self.0)
            }

            pub fn is_identity(&self) -> bool {
                self.0.is_zero()
            }

            /// Compressed canonical encoding.
            pub fn to_bytes(&self) -> [u8; $len] {
                let mut out = [0u8; $len];
                self.0
                    .serialize_compressed(&mut out[..])
                    .expect("buffer sized to the compressed encoding");
                out
            }

            /// Decodes and checks curve and subgroup membership.
            pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
                if bytes.len() != $len {
                    return Err(Error::Decode(concat!(stringify!($name), " has the wrong length")));
                }
                <$affine>::deserialize_compressed(bytes)
                    .map(Self)
                    .map_err(|_| Error::Decode(concat!("invalid ", stringify!($name))))
            }
        }
    };
}

curve_point!(G1Point, G1Affine, 48);
curve_point!(G2Point, G2Affine, 96);

/// Element of the target group `G_T`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GtElement(pub(crate) Gt);

impl GtElement {
    pub const LEN: usize = 576;

    pub fn identity() -> Self {
        Self(Gt::zero())
    }

    /// `e(g1, g2)`.
    pub fn generator() -> Self {
        Self(Gt::generator())
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::generator().pow(&Scalar::random(rng))
    }

    /// Group operation.
    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0 + other.0)
    }

    pub fn inverse(&self) -> Self {
        Self(-self.0)
    }

    pub fn pow(&self, k: &Scalar) -> Self {
        Self(self.0 * k.0)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::LEN);
        self.0
            .serialize_compressed(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::LEN {
            return Err(Error::Decode("GT element has the wrong length"));
        }
        Gt::deserialize_compressed(bytes)
            .map(Self)
            .map_err(|_| Error::Decode("invalid GT element"))
    }
}

pub fn g1_generator() -> G1Point {
    G1Point::generator()
}

pub fn g2_generator() -> G2Point {
    G2Point::generator()
}

pub fn pair(a: &G1Point, b: &G2Point) -> GtElement {
    GtElement(Bls12_381::pairing(a.0, b.0))
}

/// Product of pairings with one shared final exponentiation.
pub(crate) fn multi_pair(lhs: &[G1Point], rhs: &[G2Point]) -> GtElement {
    debug_assert_eq!(lhs.len(), rhs.len());
    GtElement(Bls12_381::multi_pairing(
        lhs.iter().map(|p| p.0),
        rhs.iter().map(|q| q.0),
    ))
}

/// The asymmetric bilinear group `(G1, G2, GT, p, e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams {
    pub g1: G1Point,
    pub g2: G2Point,
}

impl GroupParams {
    pub const CURVE_ID: &'static str = "bls12-381";

    pub fn bls12_381() -> Self {
        Self { g1: g1_generator(), g2: g2_generator() }
    }

    pub fn from_curve_id(id: &str) -> Result<Self> {
        if id.eq_ignore_ascii_case(Self::CURVE_ID) {
            Ok(Self::bls12_381())
        } else {
            Err(Error::InvalidParameter("unsupported curve id"))
        }
    }

    /// Big-endian group order `p`.
    pub fn order_be() -> [u8; 32] {
        let mut out = [0u8; 32];
        out.copy_from_slice(&Fr::MODULUS.to_bytes_be());
        out
    }

    pub fn pairing_generator(&self) -> GtElement {
        pair(&self.g1, &self.g2)
    }
}

impl Default for GroupParams {
    fn default() -> Self {
        Self::bls12_381()
    }
}
