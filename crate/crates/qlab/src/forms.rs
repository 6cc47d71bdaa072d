//! Integral cubic forms at three generality levels: binary `a x^3 + b y^3`,
//! diagonal `a_1 x_1^3 + ... + a_r x_r^3`, and general sparse forms
//! `sum a_ijk x_i x_j x_k`. Evaluation, gradients, primitivity, anisotropy
//! modulo `p`, and attained valuation spectra.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith;
use crate::padic::{int_valuation, Prime};
use crate::residue::{hensel_exponent, is_cubic_residue};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormError {
    #[error("coefficients must be nonzero")]
    ZeroCoefficient,
    #[error("a diagonal form needs at least 2 variables")]
    TooFewVariables,
    #[error("monomial index {0} is out of range for {1} variables")]
    IndexOutOfRange(usize, usize),
    #[error("form has no monomials")]
    EmptyForm,
    #[error("point has {got} coordinates but the form has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("enumeration over {0} points exceeds the configured limit {1}")]
    EnumerationTooLarge(u128, u128),
}

/// An integer point, paired with a form of matching dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPoint(pub Vec<BigInt>);

impl IntegerPoint {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }
}

impl From<Vec<i64>> for IntegerPoint {
    fn from(v: Vec<i64>) -> Self {
        IntegerPoint(v.into_iter().map(BigInt::from).collect())
    }
}

impl From<Vec<BigInt>> for IntegerPoint {
    fn from(v: Vec<BigInt>) -> Self {
        IntegerPoint(v)
    }
}

/// Shared surface of the three form representations.
pub trait CubicForm {
    fn nvars(&self) -> usize;

    /// Exact value at an integer point.
    fn evaluate(&self, point: &IntegerPoint) -> Result<BigInt, FormError>;

    /// Exact partial derivatives at an integer point.
    fn gradient(&self, point: &IntegerPoint) -> Result<Vec<BigInt>, FormError>;

    /// Gcd of all coefficients.
    fn content(&self) -> BigUint;

    fn is_primitive(&self) -> bool {
        self.content().is_one()
    }
}

fn check_dim(expected: usize, point: &IntegerPoint) -> Result<(), FormError> {
    if point.len() == expected {
        Ok(())
    } else {
        Err(FormError::DimensionMismatch { expected, got: point.len() })
    }
}

/// `a x^3 + b y^3` with nonzero integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryCubicForm {
    a: BigInt,
    b: BigInt,
}

impl BinaryCubicForm {
    pub fn new(a: BigInt, b: BigInt) -> Result<Self, FormError> {
        if a.is_zero() || b.is_zero() {
            return Err(FormError::ZeroCoefficient);
        }
        Ok(BinaryCubicForm { a, b })
    }

    pub fn from_i64(a: i64, b: i64) -> Result<Self, FormError> {
        Self::new(BigInt::from(a), BigInt::from(b))
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    /// The form with the two coefficients exchanged; its value set is the
    /// same, so verdicts transfer verbatim.
    pub fn swapped(&self) -> Self {
        BinaryCubicForm { a: self.b.clone(), b: self.a.clone() }
    }
}

impl CubicForm for BinaryCubicForm {
    fn nvars(&self) -> usize {
        2
    }

    fn evaluate(&self, point: &IntegerPoint) -> Result<BigInt, FormError> {
        check_dim(2, point)?;
        let x = &point.0[0];
        let y = &point.0[1];
        Ok(&self.a * x.pow(3) + &self.b * y.pow(3))
    }

    fn gradient(&self, point: &IntegerPoint) -> Result<Vec<BigInt>, FormError> {
        check_dim(2, point)?;
        let x = &point.0[0];
        let y = &point.0[1];
        Ok(vec![
            BigInt::from(3) * &self.a * x.pow(2),
            BigInt::from(3) * &self.b * y.pow(2),
        ])
    }

    fn content(&self) -> BigUint {
        self.a.gcd(&self.b).to_biguint().expect("gcd is nonnegative")
    }
}

/// `a_1 x_1^3 + ... + a_r x_r^3` with nonzero coefficients, `r >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalCubicForm {
    coeffs: Vec<BigInt>,
}

impl DiagonalCubicForm {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self, FormError> {
        if coeffs.len() < 2 {
            return Err(FormError::TooFewVariables);
        }
        if coeffs.iter().any(Zero::is_zero) {
            return Err(FormError::ZeroCoefficient);
        }
        Ok(DiagonalCubicForm { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self, FormError> {
        Self::new(coeffs.iter().copied().map(BigInt::from).collect())
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }
}

impl CubicForm for DiagonalCubicForm {
    fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    fn evaluate(&self, point: &IntegerPoint) -> Result<BigInt, FormError> {
        check_dim(self.coeffs.len(), point)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&point.0)
            .map(|(a, x)| a * x.pow(3))
            .sum())
    }

    fn gradient(&self, point: &IntegerPoint) -> Result<Vec<BigInt>, FormError> {
        check_dim(self.coeffs.len(), point)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&point.0)
            .map(|(a, x)| BigInt::from(3) * a * x.pow(2))
            .collect())
    }

    fn content(&self) -> BigUint {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
            .to_biguint()
            .expect("gcd is nonnegative")
    }
}

/// A sparse general cubic form: monomials indexed by sorted variable triples
/// `i <= j <= k`. Non-degeneracy cannot be computed here and is carried as a
/// caller-supplied assertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralCubicForm {
    nvars: usize,
    monomials: BTreeMap<[usize; 3], BigInt>,
    nondegenerate_assertion: bool,
}

impl GeneralCubicForm {
    pub fn new(
        nvars: usize,
        monomials: impl IntoIterator<Item = ([usize; 3], BigInt)>,
        nondegenerate_assertion: bool,
    ) -> Result<Self, FormError> {
        let mut map: BTreeMap<[usize; 3], BigInt> = BTreeMap::new();
        for (mut idx, coeff) in monomials {
            idx.sort_unstable();
            if let Some(&bad) = idx.iter().find(|&&i| i >= nvars) {
                return Err(FormError::IndexOutOfRange(bad, nvars));
            }
            *map.entry(idx).or_insert_with(BigInt::zero) += coeff;
        }
        map.retain(|_, c| !c.is_zero());
        if map.is_empty() {
            return Err(FormError::EmptyForm);
        }
        Ok(GeneralCubicForm { nvars, monomials: map, nondegenerate_assertion })
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&[usize; 3], &BigInt)> {
        self.monomials.iter()
    }

    pub fn nondegenerate_assertion(&self) -> bool {
        self.nondegenerate_assertion
    }

    /// Restriction to one variable with the others frozen: the univariate
    /// cubic `t -> C(..., t, ...)` in coordinate `pivot`.
    pub fn restrict(&self, point: &IntegerPoint, pivot: usize) -> Result<[BigInt; 4], FormError> {
        check_dim(self.nvars, point)?;
        assert!(pivot < self.nvars, "pivot out of range");
        let mut coeffs = [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
        for (idx, c) in &self.monomials {
            let degree = idx.iter().filter(|&&i| i == pivot).count();
            let frozen: BigInt = idx
                .iter()
                .filter(|&&i| i != pivot)
                .map(|&i| point.0[i].clone())
                .product();
            coeffs[degree] += c * frozen;
        }
        Ok(coeffs)
    }
}

impl From<&DiagonalCubicForm> for GeneralCubicForm {
    fn from(d: &DiagonalCubicForm) -> Self {
        GeneralCubicForm::new(
            d.nvars(),
            d.coefficients()
                .iter()
                .enumerate()
                .map(|(i, c)| ([i, i, i], c.clone())),
            true,
        )
        .expect("diagonal forms convert cleanly")
    }
}

impl From<&BinaryCubicForm> for GeneralCubicForm {
    fn from(f: &BinaryCubicForm) -> Self {
        GeneralCubicForm::new(
            2,
            [([0, 0, 0], f.a().clone()), ([1, 1, 1], f.b().clone())],
            true,
        )
        .expect("binary forms convert cleanly")
    }
}

impl CubicForm for GeneralCubicForm {
    fn nvars(&self) -> usize {
        self.nvars
    }

    fn evaluate(&self, point: &IntegerPoint) -> Result<BigInt, FormError> {
        check_dim(self.nvars, point)?;
        Ok(self
            .monomials
            .iter()
            .map(|(idx, c)| c * &point.0[idx[0]] * &point.0[idx[1]] * &point.0[idx[2]])
            .sum())
    }

    fn gradient(&self, point: &IntegerPoint) -> Result<Vec<BigInt>, FormError> {
        check_dim(self.nvars, point)?;
        let mut grad = vec![BigInt::zero(); self.nvars];
        for (idx, c) in &self.monomials {
            for m in 0..self.nvars {
                let count = idx.iter().filter(|&&i| i == m).count();
                if count == 0 {
                    continue;
                }
                let mut rest = BigInt::from(count as u64) * c;
                let mut removed = false;
                for &i in idx {
                    if i == m && !removed {
                        removed = true;
                        continue;
                    }
                    rest *= &point.0[i];
                }
                grad[m] += rest;
            }
        }
        Ok(grad)
    }

    fn content(&self) -> BigUint {
        self.monomials
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
            .to_biguint()
            .expect("gcd is nonnegative")
    }
}

/// Any of the three representations, as carried by the JSON interchange
/// format `{"kind": "binary" | "diagonal" | "general", ...}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Form {
    Binary(BinaryCubicForm),
    Diagonal(DiagonalCubicForm),
    General(GeneralCubicForm),
}

impl CubicForm for Form {
    fn nvars(&self) -> usize {
        match self {
            Form::Binary(f) => f.nvars(),
            Form::Diagonal(f) => f.nvars(),
            Form::General(f) => f.nvars(),
        }
    }

    fn evaluate(&self, point: &IntegerPoint) -> Result<BigInt, FormError> {
        match self {
            Form::Binary(f) => f.evaluate(point),
            Form::Diagonal(f) => f.evaluate(point),
            Form::General(f) => f.evaluate(point),
        }
    }

    fn gradient(&self, point: &IntegerPoint) -> Result<Vec<BigInt>, FormError> {
        match self {
            Form::Binary(f) => f.gradient(point),
            Form::Diagonal(f) => f.gradient(point),
            Form::General(f) => f.gradient(point),
        }
    }

    fn content(&self) -> BigUint {
        match self {
            Form::Binary(f) => f.content(),
            Form::Diagonal(f) => f.content(),
            Form::General(f) => f.content(),
        }
    }
}

/// No nonzero point of `(Z/p)^2` is a zero of `a x^3 + b y^3`.
///
/// Computed without enumeration: a vanishing coefficient modulo `p` yields a
/// zero immediately; `p = 3` and `p = 2 (mod 3)` always admit one (cubing is
/// linear respectively bijective there); otherwise the form is anisotropic
/// exactly when `-b a^-1` is not a cube modulo `p`.
pub fn is_anisotropic_mod_p(form: &BinaryCubicForm, p: Prime) -> bool {
    let pr = p.get();
    let p_big = BigInt::from(pr);
    if (form.a() * form.b() % &p_big).is_zero() {
        return false;
    }
    if pr == 3 || pr % 3 == 2 {
        return false;
    }
    let modulus = BigUint::from(pr);
    let a_inv = arith::mod_inverse(form.a(), &modulus).expect("a is a unit");
    let ratio = arith::reduce_mod(&(-form.b() * BigInt::from(a_inv)), &modulus);
    !is_cubic_residue(&BigInt::from(ratio), p, hensel_exponent(p))
        .expect("ratio of units is a unit")
}

/// Walks the box `[-bound, bound]^r` in lexicographic order.
struct BoxWalker {
    coords: Vec<i64>,
    bound: i64,
    done: bool,
}

impl BoxWalker {
    fn new(r: usize, bound: i64) -> Self {
        BoxWalker { coords: vec![-bound; r], bound, done: r == 0 }
    }
}

impl Iterator for BoxWalker {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        let current = self.coords.clone();
        for i in (0..self.coords.len()).rev() {
            if self.coords[i] < self.bound {
                self.coords[i] += 1;
                return Some(current);
            }
            self.coords[i] = -self.bound;
        }
        self.done = true;
        Some(current)
    }
}

const SPECTRUM_POINT_LIMIT: u128 = 50_000_000;

/// The exact set of valuations `v_p(C(x))` attained on the integer box
/// `[-bound, bound]^r`, zero values excluded.
pub fn valuation_spectrum<F: CubicForm + ?Sized>(
    form: &F,
    p: Prime,
    bound: i64,
) -> Result<BTreeSet<i64>, FormError> {
    assert!(bound >= 1);
    let r = form.nvars();
    let points = (2u128 * bound as u128 + 1).pow(r as u32);
    if points > SPECTRUM_POINT_LIMIT {
        return Err(FormError::EnumerationTooLarge(points, SPECTRUM_POINT_LIMIT));
    }
    let mut out = BTreeSet::new();
    for coords in BoxWalker::new(r, bound) {
        let point = IntegerPoint::from(coords);
        let value = form.evaluate(&point)?;
        if let Some(v) = int_valuation(&value, p).finite() {
            out.insert(v);
        }
    }
    Ok(out)
}

// --- JSON interchange -------------------------------------------------

/// Coefficients travel as decimal strings so arbitrary precision survives
/// any JSON consumer; plain JSON integers are accepted on input.
#[derive(Serialize)]
#[serde(transparent)]
struct Coefficient(String);

fn bigint_to_json(c: &BigInt) -> Coefficient {
    Coefficient(c.to_string())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoefficientIn {
    Int(i64),
    Str(String),
}

impl CoefficientIn {
    fn parse(self) -> Result<BigInt, String> {
        match self {
            CoefficientIn::Int(n) => Ok(BigInt::from(n)),
            CoefficientIn::Str(s) => s.parse().map_err(|_| format!("invalid integer literal {s:?}")),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FormWire {
    Binary {
        coeffs: [Coefficient; 2],
    },
    Diagonal {
        coeffs: Vec<Coefficient>,
    },
    General {
        nvars: usize,
        monomials: Vec<(usize, usize, usize, Coefficient)>,
        nondegenerate: bool,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FormWireIn {
    Binary {
        coeffs: Vec<CoefficientIn>,
    },
    Diagonal {
        coeffs: Vec<CoefficientIn>,
    },
    General {
        nvars: usize,
        monomials: Vec<(usize, usize, usize, CoefficientIn)>,
        #[serde(default)]
        nondegenerate: bool,
    },
}

impl Serialize for Form {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = match self {
            Form::Binary(f) => FormWire::Binary {
                coeffs: [bigint_to_json(f.a()), bigint_to_json(f.b())],
            },
            Form::Diagonal(f) => FormWire::Diagonal {
                coeffs: f.coefficients().iter().map(bigint_to_json).collect(),
            },
            Form::General(f) => FormWire::General {
                nvars: f.nvars(),
                monomials: f
                    .monomials()
                    .map(|(idx, c)| (idx[0], idx[1], idx[2], bigint_to_json(c)))
                    .collect(),
                nondegenerate: f.nondegenerate_assertion(),
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = FormWireIn::deserialize(deserializer)?;
        let build = |e: FormError| D::Error::custom(e.to_string());
        match wire {
            FormWireIn::Binary { coeffs } => {
                let parsed: Result<Vec<BigInt>, String> =
                    coeffs.into_iter().map(CoefficientIn::parse).collect();
                let parsed = parsed.map_err(D::Error::custom)?;
                if parsed.len() != 2 {
                    return Err(D::Error::custom("binary forms take exactly 2 coefficients"));
                }
                BinaryCubicForm::new(parsed[0].clone(), parsed[1].clone())
                    .map(Form::Binary)
                    .map_err(build)
            }
            FormWireIn::Diagonal { coeffs } => {
                let parsed: Result<Vec<BigInt>, String> =
                    coeffs.into_iter().map(CoefficientIn::parse).collect();
                DiagonalCubicForm::new(parsed.map_err(D::Error::custom)?)
                    .map(Form::Diagonal)
                    .map_err(build)
            }
            FormWireIn::General { nvars, monomials, nondegenerate } => {
                let parsed: Result<Vec<([usize; 3], BigInt)>, String> = monomials
                    .into_iter()
                    .map(|(i, j, k, c)| c.parse().map(|c| ([i, j, k], c)))
                    .collect();
                GeneralCubicForm::new(nvars, parsed.map_err(D::Error::custom)?, nondegenerate)
                    .map(Form::General)
                    .map_err(build)
            }
        }
    }
}
