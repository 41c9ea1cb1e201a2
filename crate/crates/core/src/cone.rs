//! Cohomology-level bookkeeping for the flow: polyhedral Kähler cones, first
//! Chern classes, maximal existence time and terminal behaviour.
//!
//! Classes evolve by `[ω(t)] = [ω₀] − t c₁`. Coefficients are either exact
//! rationals or floats; float comparisons use a small relative tolerance.

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("class has {found} coefficients, model basis has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("initial class is not Kähler")]
    NotKahler,
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("bad coefficient {0:?}")]
    BadCoefficient(String),
}

/// Coefficient field for classes.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Sign with a tolerance scaled by `scale` for inexact types.
    fn sign(&self, scale: f64) -> i8;
    fn render(&self) -> String;
}

impl Scalar for Rational64 {
    const EXACT: bool = true;
    fn from_i64(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn sign(&self, _scale: f64) -> i8 {
        if self.is_zero() {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

/// Relative tolerance of float sign tests.
pub const FLOAT_TOL: f64 = 1e-12;

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sign(&self, scale: f64) -> i8 {
        let tol = FLOAT_TOL * scale.max(1.0);
        if *self > tol {
            1
        } else if *self < -tol {
            -1
        } else {
            0
        }
    }
    fn render(&self) -> String {
        format!("{self}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyClass<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> CohomologyClass<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coeffs: vec![T::zero(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn check(&self, dim: usize) -> Result<(), ConeError> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(ConeError::DimensionMismatch { expected: dim, found: self.dim() })
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: &T, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + s.clone() * b.clone()).collect();
        Self { coeffs }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        if T::EXACT {
            self.coeffs.iter().all(|c| c.is_zero())
        } else {
            self.max_abs() < FLOAT_TOL
        }
    }

    pub fn to_f64(&self) -> CohomologyClass<f64> {
        CohomologyClass { coeffs: self.coeffs.iter().map(|c| c.to_f64()).collect() }
    }

    /// Comma-separated coefficients.
    pub fn render(&self) -> String {
        self.coeffs.iter().map(|c| c.render()).collect::<Vec<_>>().join(",")
    }
}

/// Strict linear inequalities `ℓ_k(v) > 0`; the nef cone uses `≥`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeSpec<T> {
    pub facets: Vec<Vec<T>>,
}

impl<T: Scalar> ConeSpec<T> {
    /// The open positive orthant.
    pub fn orthant(dim: usize) -> Self {
        let facets = (0..dim)
            .map(|k| (0..dim).map(|i| if i == k { T::one() } else { T::zero() }).collect())
            .collect();
        Self { facets }
    }

    pub fn eval(&self, k: usize, v: &CohomologyClass<T>) -> T {
        self.facets[k].iter().zip(&v.coeffs).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    fn scale_of(&self, v: &CohomologyClass<T>) -> f64 {
        let f = self.facets.iter().flatten().map(|c| c.to_f64().abs()).fold(0.0, f64::max);
        f * v.max_abs()
    }

    fn signs(&self, v: &CohomologyClass<T>) -> Vec<i8> {
        let scale = self.scale_of(v);
        (0..self.facets.len()).map(|k| self.eval(k, v).sign(scale)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldModel<T> {
    pub name: String,
    pub basis: Vec<String>,
    pub cone: ConeSpec<T>,
    pub c1: CohomologyClass<T>,
}

/// Terminal behaviour of the class path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Behavior {
    /// (a) the path reaches the zero class at `T`.
    HitsZero,
    /// (b) `c₁ = 0`; the class does not move.
    Stationary,
    /// (c) the path stays in the cone for all time.
    ImmortalInterior,
    /// (d) the path reaches a nonzero boundary class at `T`.
    HitsBoundaryNonzero,
}

impl Behavior {
    pub fn letter(&self) -> char {
        match self {
            Behavior::HitsZero => 'a',
            Behavior::Stationary => 'b',
            Behavior::ImmortalInterior => 'c',
            Behavior::HitsBoundaryNonzero => 'd',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TerminalReport<T> {
    /// `None` for `T = ∞`.
    pub time: Option<T>,
    pub behavior: Behavior,
    /// `[ω₀] − T c₁` when `T` is finite.
    pub boundary: Option<CohomologyClass<T>>,
    /// Facets vanishing on the boundary class.
    pub active_facets: Vec<usize>,
}

impl<T: Scalar> ManifoldModel<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_kahler(&self, v: &CohomologyClass<T>) -> Result<bool, ConeError> {
        v.check(self.dim())?;
        Ok(self.cone.signs(v).iter().all(|s| *s > 0))
    }

    pub fn is_nef(&self, v: &CohomologyClass<T>) -> Result<bool, ConeError> {
        v.check(self.dim())?;
        Ok(self.cone.signs(v).iter().all(|s| *s >= 0))
    }

    /// `T = min ℓ_k(ω₀)/ℓ_k(c₁)` over facets with `ℓ_k(c₁) > 0`, and the
    /// terminal behaviour of the path.
    pub fn max_time(&self, omega0: &CohomologyClass<T>) -> Result<TerminalReport<T>, ConeError> {
        if !self.is_kahler(omega0)? {
            return Err(ConeError::NotKahler);
        }
        if self.c1.is_zero() {
            return Ok(TerminalReport { time: None, behavior: Behavior::Stationary, boundary: None, active_facets: vec![] });
        }
        let scale = self.cone.scale_of(&self.c1);
        let mut best: Option<T> = None;
        for k in 0..self.cone.facets.len() {
            let rate = self.cone.eval(k, &self.c1);
            if rate.sign(scale) > 0 {
                let t = self.cone.eval(k, omega0) / rate;
                if best.as_ref().is_none_or(|b| t < *b) {
                    best = Some(t);
                }
            }
        }
        let Some(t) = best else {
            return Ok(TerminalReport {
                time: None,
                behavior: Behavior::ImmortalInterior,
                boundary: None,
                active_facets: vec![],
            });
        };
        let boundary = self.class_path(omega0, &t)?;
        let active: Vec<usize> =
            self.cone.signs(&boundary).iter().enumerate().filter(|(_, s)| **s == 0).map(|(k, _)| k).collect();
        // Float zero test is relative to the starting class.
        let zero = if T::EXACT {
            boundary.is_zero()
        } else {
            boundary.max_abs() < FLOAT_TOL * omega0.max_abs().max(1.0)
        };
        let behavior = if zero { Behavior::HitsZero } else { Behavior::HitsBoundaryNonzero };
        Ok(TerminalReport { time: Some(t), behavior, boundary: Some(boundary), active_facets: active })
    }

    /// `sup {t ≥ 0 : [ω₀] − t c₁ nef}`, from the interval of admissible `t`
    /// cut out by each facet separately.
    pub fn max_time_nef(&self, omega0: &CohomologyClass<T>) -> Result<Option<T>, ConeError> {
        if !self.is_kahler(omega0)? {
            return Err(ConeError::NotKahler);
        }
        let scale = self.cone.scale_of(&self.c1).max(self.cone.scale_of(omega0));
        let mut upper: Option<T> = None;
        for k in 0..self.cone.facets.len() {
            // ℓ(ω₀) − t ℓ(c₁) ≥ 0 bounds t above only when ℓ(c₁) > 0.
            let a = self.cone.eval(k, omega0);
            let b = self.cone.eval(k, &self.c1);
            if b.sign(scale) <= 0 {
                continue;
            }
            let hi = a / b;
            upper = match upper {
                Some(u) if u <= hi => Some(u),
                _ => Some(hi),
            };
        }
        Ok(upper)
    }

    /// `[ω₀] − t c₁`.
    pub fn class_path(&self, omega0: &CohomologyClass<T>, t: &T) -> Result<CohomologyClass<T>, ConeError> {
        omega0.check(self.dim())?;
        Ok(omega0.axpy(&-t.clone(), &self.c1))
    }

    /// `e^{−t}[ω₀] + (1 − e^{−t})(−c₁)`.
    pub fn normalized_class_path(
        &self,
        omega0: &CohomologyClass<T>,
        t: f64,
    ) -> Result<CohomologyClass<f64>, ConeError> {
        omega0.check(self.dim())?;
        let decay = (-t).exp();
        let coeffs = omega0
            .coeffs
            .iter()
            .zip(&self.c1.coeffs)
            .map(|(w, c)| decay * w.to_f64() - (1.0 - decay) * c.to_f64())
            .collect();
        Ok(CohomologyClass { coeffs })
    }

    /// One CSV row: model, class, T, behaviour, boundary class, active facets.
    pub fn report_row(&self, omega0: &CohomologyClass<T>, report: &TerminalReport<T>) -> Vec<String> {
        vec![
            self.name.clone(),
            omega0.render(),
            report.time.as_ref().map(|t| t.render()).unwrap_or_else(|| "inf".into()),
            report.behavior.letter().to_string(),
            report.boundary.as_ref().map(|b| b.render()).unwrap_or_default(),
            report.active_facets.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";"),
        ]
    }
}

pub const REPORT_COLUMNS: [&str; 6] = ["model", "omega0", "T", "behavior", "boundary", "active_facets"];

fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v)
}

/// Complex projective line in the basis `[ω_FS]`; `Ric(ω_FS) = 2ω_FS`.
pub fn p1<T: Scalar>() -> ManifoldModel<T> {
    ManifoldModel {
        name: "P1".into(),
        basis: vec!["[omega_FS]".into()],
        cone: ConeSpec::orthant(1),
        c1: CohomologyClass::new(vec![int(2)]),
    }
}

/// Compact Riemann surface of the given genus, in the basis of its
/// Kähler-Einstein class (`Ric = μ ω` with `μ = 1, 0, −1`).
pub fn riemann_surface<T: Scalar>(genus: u32) -> ManifoldModel<T> {
    let mu = match genus {
        0 => 1,
        1 => 0,
        _ => -1,
    };
    ManifoldModel {
        name: format!("RiemannSurface({genus})"),
        basis: vec![format!("[omega_KE,g={genus}]")],
        cone: ConeSpec::orthant(1),
        c1: CohomologyClass::new(vec![int(mu)]),
    }
}

/// Basis concatenation, cone conjunction, `c₁` concatenation.
pub fn product_model<T: Scalar>(a: &ManifoldModel<T>, b: &ManifoldModel<T>) -> ManifoldModel<T> {
    let (da, db) = (a.dim(), b.dim());
    let pad = |f: &Vec<T>, before: usize, after: usize| {
        let mut v = vec![T::zero(); before];
        v.extend(f.iter().cloned());
        v.extend(std::iter::repeat_n(T::zero(), after));
        v
    };
    let mut facets: Vec<Vec<T>> = a.cone.facets.iter().map(|f| pad(f, 0, db)).collect();
    facets.extend(b.cone.facets.iter().map(|f| pad(f, da, 0)));
    let mut c1 = a.c1.coeffs.clone();
    c1.extend(b.c1.coeffs.iter().cloned());
    let mut basis = a.basis.iter().map(|s| format!("pr1*{s}")).collect::<Vec<_>>();
    basis.extend(b.basis.iter().map(|s| format!("pr2*{s}")));
    ManifoldModel {
        name: format!("Product({},{})", a.name, b.name),
        basis,
        cone: ConeSpec { facets },
        c1: CohomologyClass::new(c1),
    }
}

/// `P¹ × P¹` in the basis `α_i = [pr_i* ω_KE]`, `c₁ = α₁ + α₂`.
pub fn p1_x_p1<T: Scalar>() -> ManifoldModel<T> {
    ManifoldModel { name: "P1xP1".into(), ..product_model(&riemann_surface(0), &riemann_surface(0)) }
}

/// Torus times a surface of genus 2 in the basis `([ω_E], [ω_S])`,
/// `c₁ = −[ω_S]`.
pub fn e_x_s<T: Scalar>() -> ManifoldModel<T> {
    ManifoldModel { name: "ExS".into(), ..product_model(&riemann_surface(1), &riemann_surface(2)) }
}

/// Blow-up of `P²` at a point in the basis `([f*ω_P¹], [π*ω_P²])`, with
/// cone `x, y > 0` and `c₁ = (1, 2)`.
pub fn blp_p2<T: Scalar>() -> ManifoldModel<T> {
    ManifoldModel {
        name: "BlpP2".into(),
        basis: vec!["[f*omega_P1]".into(), "[pi*omega_P2]".into()],
        cone: ConeSpec::orthant(2),
        c1: CohomologyClass::new(vec![int(1), int(2)]),
    }
}

/// Looks up a catalog entry: `P1`, `P1xP1`, `ExS`, `BlpP2`,
/// `RiemannSurface(g)`, or `Product(A,B)` of any of these.
pub fn catalog<T: Scalar>(name: &str) -> Result<ManifoldModel<T>, ConeError> {
    let name = name.trim();
    let unknown = || ConeError::UnknownModel(name.to_string());
    match name {
        "P1" => return Ok(p1()),
        "P1xP1" => return Ok(p1_x_p1()),
        "ExS" => return Ok(e_x_s()),
        "BlpP2" => return Ok(blp_p2()),
        _ => {}
    }
    if let Some(arg) = name.strip_prefix("RiemannSurface(").and_then(|s| s.strip_suffix(')')) {
        let g: u32 = arg.trim().parse().map_err(|_| unknown())?;
        return Ok(riemann_surface(g));
    }
    if let Some(args) = name.strip_prefix("Product(").and_then(|s| s.strip_suffix(')')) {
        // Split at the top-level comma.
        let mut depth = 0i32;
        for (i, ch) in args.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    let a = catalog(&args[..i])?;
                    let b = catalog(&args[i + 1..])?;
                    return Ok(product_model(&a, &b));
                }
                _ => {}
            }
        }
    }
    Err(unknown())
}

/// Parsed class: exact when every coefficient is an integer or a fraction.
#[derive(Clone, Debug, PartialEq)]
pub enum ParsedClass {
    Exact(CohomologyClass<Rational64>),
    Float(CohomologyClass<f64>),
}

/// Parses `a,b,...`; each coefficient is `p`, `p/q`, or a decimal.
pub fn parse_class(text: &str) -> Result<ParsedClass, ConeError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let exact: Option<Vec<Rational64>> = parts.iter().map(|p| p.parse::<Rational64>().ok()).collect();
    if let Some(v) = exact {
        return Ok(ParsedClass::Exact(CohomologyClass::new(v)));
    }
    let float: Result<Vec<f64>, _> = parts
        .iter()
        .map(|p| p.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| ConeError::BadCoefficient(p.to_string())))
        .collect();
    Ok(ParsedClass::Float(CohomologyClass::new(float?)))
}

/// Runs the catalog lookup and terminal analysis in whichever arithmetic the
/// class was given in; returns the CSV row.
pub fn analyze(model: &str, class: &str) -> Result<Vec<String>, ConeError> {
    match parse_class(class)? {
        ParsedClass::Exact(c) => {
            let m = catalog::<Rational64>(model)?;
            let r = m.max_time(&c)?;
            Ok(m.report_row(&c, &r))
        }
        ParsedClass::Float(c) => {
            let m = catalog::<f64>(model)?;
            let r = m.max_time(&c)?;
            Ok(m.report_row(&c, &r))
        }
    }
}
