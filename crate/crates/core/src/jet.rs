//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f(p) / α!` of a scalar
//! field around a chart point `p`, truncated at a total degree `d ≤ MAX_ORDER`.
//! Monomials are kept in graded order so that truncation to a lower degree is a
//! prefix of the coefficient vector and multiplication only visits index pairs
//! whose combined degree survives truncation.
//!
//! Binary operations on jets of different degree truncate to the smaller one:
//! the result is only trusted up to the degree both operands are valid to.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::Real;

/// Highest total degree a jet may carry.
pub const MAX_ORDER: usize = 5;

/// Monomial bookkeeping for jets in a fixed number of variables.
pub struct JetSpace {
    nvars: usize,
    exponents: Vec<Vec<u8>>,
    degree_end: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    products: Vec<(u32, u32, u32)>,
    product_end: Vec<usize>,
    // shift[v][i]: index of exponents[i] + e_v, for monomials of degree < MAX_ORDER
    shift: Vec<Vec<u32>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("monomials", &self.exponents.len())
            .finish()
    }
}

fn monomials_of_degree(nvars: usize, degree: usize) -> Vec<Vec<u8>> {
    if nvars == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut rest in monomials_of_degree(nvars - 1, degree - first) {
            let mut e = Vec::with_capacity(nvars);
            e.push(first as u8);
            e.append(&mut rest);
            out.push(e);
        }
    }
    out
}

impl JetSpace {
    fn build(nvars: usize) -> Self {
        let mut exponents = Vec::new();
        let mut degree_end = Vec::with_capacity(MAX_ORDER + 1);
        for d in 0..=MAX_ORDER {
            exponents.extend(monomials_of_degree(nvars, d));
            degree_end.push(exponents.len());
        }
        let index: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let deg = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut products = Vec::new();
        for (ia, a) in exponents.iter().enumerate() {
            let da = deg(a);
            for (ib, b) in exponents[..degree_end[MAX_ORDER - da]].iter().enumerate() {
                let c: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((ia as u32, ib as u32, index[&c] as u32));
            }
        }
        products.sort_by_key(|&(_, _, c)| c);
        let product_end = (0..=MAX_ORDER)
            .map(|d| products.partition_point(|&(_, _, c)| (c as usize) < degree_end[d]))
            .collect();

        let shift = (0..nvars)
            .map(|v| {
                exponents[..degree_end[MAX_ORDER - 1]]
                    .iter()
                    .map(|e| {
                        let mut s = e.clone();
                        s[v] += 1;
                        index[&s] as u32
                    })
                    .collect()
            })
            .collect();

        JetSpace {
            nvars,
            exponents,
            degree_end,
            index,
            products,
            product_end,
            shift,
        }
    }

    /// Shared space for `nvars` variables.
    pub fn for_vars(nvars: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry(nvars)
            .or_insert_with(|| Arc::new(JetSpace::build(nvars)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of monomials of total degree at most `degree`.
    pub fn len(&self, degree: usize) -> usize {
        self.degree_end[degree]
    }

    pub fn exponent(&self, i: usize) -> &[u8] {
        &self.exponents[i]
    }

    pub fn index_of(&self, exponent: &[u8]) -> Option<usize> {
        self.index.get(exponent).copied()
    }
}

/// Exponent vector of a multi-index given as a list of axis indices.
pub fn exponent_of(nvars: usize, axes: &[usize]) -> Vec<u8> {
    let mut e = vec![0u8; nvars];
    for &a in axes {
        e[a] += 1;
    }
    e
}

/// Product of factorials of the exponents.
pub fn multi_factorial(exponent: &[u8]) -> u64 {
    exponent
        .iter()
        .map(|&k| (1..=k as u64).product::<u64>())
        .product()
}

/// Truncated Taylor expansion of a scalar field.
#[derive(Clone)]
pub struct Jet<T> {
    space: Arc<JetSpace>,
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("degree", &self.degree)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl<T: Real> Jet<T> {
    pub fn constant(space: &Arc<JetSpace>, degree: usize, value: T) -> Self {
        assert!(degree <= MAX_ORDER);
        let mut coeffs = vec![T::zero(); space.len(degree)];
        coeffs[0] = value;
        Jet {
            space: space.clone(),
            degree,
            coeffs,
        }
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(space: &Arc<JetSpace>, degree: usize, var: usize, value: T) -> Self {
        let mut j = Self::constant(space, degree, value);
        if degree >= 1 {
            j.coeffs[1 + var] = T::one();
        }
        j
    }

    /// Jet from raw Taylor coefficients (graded order).
    pub fn from_coeffs(space: &Arc<JetSpace>, degree: usize, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), space.len(degree));
        Jet {
            space: space.clone(),
            degree,
            coeffs,
        }
    }

    /// Coordinate jets `p_i + δ_i` for every chart axis.
    pub fn coordinates(point: &[T], degree: usize) -> Vec<Self> {
        let space = JetSpace::for_vars(point.len());
        point
            .iter()
            .enumerate()
            .map(|(i, &p)| Self::variable(&space, degree, i, p))
            .collect()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Value at the expansion point.
    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Partial derivative `∂^α f(p)` for a multi-index given as axis list.
    pub fn partial(&self, axes: &[usize]) -> T {
        assert!(axes.len() <= self.degree, "partial beyond jet degree");
        let e = exponent_of(self.nvars(), axes);
        let i = self.space.index_of(&e).expect("valid multi-index");
        self.coeffs[i] * T::lit(multi_factorial(&e) as f64)
    }

    pub fn truncate(&self, degree: usize) -> Self {
        let degree = degree.min(self.degree);
        Jet {
            space: self.space.clone(),
            degree,
            coeffs: self.coeffs[..self.space.len(degree)].to_vec(),
        }
    }

    /// Expansion of `∂f/∂x_var`; valid to one degree less.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(self.degree >= 1, "cannot differentiate a degree-0 jet");
        let degree = self.degree - 1;
        let len = self.space.len(degree);
        let shift = &self.space.shift[var];
        let coeffs = (0..len)
            .map(|i| {
                let src = shift[i] as usize;
                let k = self.space.exponents[src][var];
                self.coeffs[src] * T::of(k as usize)
            })
            .collect();
        Jet {
            space: self.space.clone(),
            degree,
            coeffs,
        }
    }

    /// Re-expresses a jet in a larger space whose variables
    /// `offset..offset + self.nvars()` are this jet's variables.
    pub fn embed(&self, target: &Arc<JetSpace>, offset: usize) -> Self {
        assert!(offset + self.nvars() <= target.nvars);
        let mut coeffs = vec![T::zero(); target.len(self.degree)];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let mut e = vec![0u8; target.nvars];
            e[offset..offset + self.nvars()].copy_from_slice(&self.space.exponents[i]);
            coeffs[target.index_of(&e).expect("embedded monomial")] = c;
        }
        Jet {
            space: target.clone(),
            degree: self.degree,
            coeffs,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Jet {
            space: self.space.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: T) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.nvars(), other.nvars());
        let degree = self.degree.min(other.degree);
        let len = self.space.len(degree);
        Jet {
            space: self.space.clone(),
            degree,
            coeffs: (0..len).map(|i| f(self.coeffs[i], other.coeffs[i])).collect(),
        }
    }

    fn product(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nvars(), other.nvars());
        let degree = self.degree.min(other.degree);
        let mut coeffs = vec![T::zero(); self.space.len(degree)];
        for &(a, b, c) in &self.space.products[..self.space.product_end[degree]] {
            coeffs[c as usize] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Jet {
            space: self.space.clone(),
            degree,
            coeffs,
        }
    }

    /// `Σ_k derivs[k]/k! · δ^k` with `δ = self − value`: composition with a
    /// univariate function whose derivatives at the value are `derivs`.
    fn compose(&self, derivs: &[T]) -> Self {
        let mut delta = self.clone();
        delta.coeffs[0] = T::zero();
        let mut out = Jet::constant(&self.space, self.degree, derivs[0]);
        let mut power = Jet::constant(&self.space, self.degree, T::one());
        let mut fact = T::one();
        for (k, &d) in derivs.iter().enumerate().take(self.degree + 1).skip(1) {
            power = &power * &delta;
            fact *= T::of(k);
            out = &out + &power.scale(d / fact);
        }
        out
    }

    /// `self^p` for real `p`; the value must be positive unless `p` is integral.
    pub fn powf(&self, p: T) -> Self {
        let a = self.value();
        let mut derivs = Vec::with_capacity(self.degree + 1);
        let mut coef = T::one();
        for k in 0..=self.degree {
            derivs.push(coef * a.powf(p - T::of(k)));
            coef *= p - T::of(k);
        }
        self.compose(&derivs)
    }

    pub fn recip(&self) -> Self {
        let a = self.value();
        let mut derivs = Vec::with_capacity(self.degree + 1);
        let mut coef = T::one();
        let inv = a.recip();
        let mut pw = inv;
        for k in 0..=self.degree {
            derivs.push(coef * pw);
            coef *= -T::of(k + 1);
            pw *= inv;
        }
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(T::lit(0.5))
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.degree + 1])
    }

    pub fn ln(&self) -> Self {
        let a = self.value();
        let mut derivs = vec![a.ln()];
        let mut coef = T::one();
        let mut pw = a.recip();
        for k in 1..=self.degree {
            derivs.push(coef * pw);
            coef *= -T::of(k);
            pw /= a;
        }
        self.compose(&derivs)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&(0..=self.degree).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&(0..=self.degree).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn sinh(&self) -> Self {
        let a = self.value();
        let cycle = [a.sinh(), a.cosh()];
        self.compose(&(0..=self.degree).map(|k| cycle[k % 2]).collect::<Vec<_>>())
    }

    pub fn cosh(&self) -> Self {
        let a = self.value();
        let cycle = [a.cosh(), a.sinh()];
        self.compose(&(0..=self.degree).map(|k| cycle[k % 2]).collect::<Vec<_>>())
    }
}

impl<'a, T: Real> Div<&'a Jet<T>> for &'a Jet<T> {
    type Output = Jet<T>;
    fn div(self, rhs: &'a Jet<T>) -> Jet<T> {
        self * &rhs.recip()
    }
}


macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a, 'b, T: Real> $trait<&'b Jet<T>> for &'a Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: &'b Jet<T>) -> Jet<T> {
                let f: fn(&Jet<T>, &Jet<T>) -> Jet<T> = $body;
                f(self, rhs)
            }
        }
        impl<T: Real> $trait<Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: Jet<T>) -> Jet<T> {
                (&self).$method(&rhs)
            }
        }
        impl<'b, T: Real> $trait<&'b Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: &'b Jet<T>) -> Jet<T> {
                (&self).$method(rhs)
            }
        }
        impl<'a, T: Real> $trait<Jet<T>> for &'a Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: Jet<T>) -> Jet<T> {
                self.$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.product(b));

impl<T: Real> Mul<T> for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: T) -> Jet<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Mul<T> for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: T) -> Jet<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Add<T> for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: T) -> Jet<T> {
        self.add_scalar(rhs)
    }
}

impl<T: Real> Add<T> for Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: T) -> Jet<T> {
        self.add_scalar(rhs)
    }
}

impl<T: Real> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.scale(-T::one())
    }
}

/// Sum of a non-empty sequence of jets.
pub fn sum<T: Real>(mut terms: impl Iterator<Item = Jet<T>>) -> Jet<T> {
    let first = terms.next().expect("sum of at least one jet");
    terms.fold(first, |acc, t| &acc + &t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn monomial_counts_are_binomial() {
        let s = JetSpace::for_vars(3);
        // C(3 + d, d)
        assert_eq!(s.len(0), 1);
        assert_eq!(s.len(1), 4);
        assert_eq!(s.len(2), 10);
        assert_eq!(s.len(5), 56);
    }

    #[test]
    fn product_rule_on_polynomials() {
        let x = Jet::coordinates(&[2.0, -1.0], 5);
        // f = x0^2 * x1^3
        let f = &(&x[0] * &x[0]) * &(&(&x[1] * &x[1]) * &x[1]);
        assert!(approx(f.value(), -4.0, 1e-14));
        assert!(approx(f.partial(&[0]), 2.0 * 2.0 * -1.0, 1e-14));
        assert!(approx(f.partial(&[1, 1]), 4.0 * 6.0 * -1.0, 1e-13));
        assert!(approx(f.partial(&[0, 0, 1, 1, 1]), 12.0, 1e-13));
        assert_eq!(f.partial(&[1, 0]), f.partial(&[0, 1]));
    }

    #[test]
    fn transcendental_derivatives_match_closed_forms() {
        let x = Jet::coordinates(&[0.3], 5);
        let s = x[0].sin();
        let c = x[0].cosh();
        let l = x[0].ln();
        for k in 0..=5usize {
            let axes = vec![0; k];
            let sin_k = match k % 4 {
                0 => 0.3f64.sin(),
                1 => 0.3f64.cos(),
                2 => -0.3f64.sin(),
                _ => -0.3f64.cos(),
            };
            assert!(approx(s.partial(&axes), sin_k, 1e-12));
            let cosh_k = if k % 2 == 0 { 0.3f64.cosh() } else { 0.3f64.sinh() };
            assert!(approx(c.partial(&axes), cosh_k, 1e-12));
        }
        // d^3/dx^3 ln x = 2 / x^3
        assert!(approx(l.partial(&[0, 0, 0]), 2.0 / 0.027, 1e-9));
        let r = x[0].recip();
        assert!(approx(r.partial(&[0, 0]), 2.0 / 0.027, 1e-9));
        let q = x[0].sqrt();
        assert!(approx(q.partial(&[0]), 0.5 / 0.3f64.sqrt(), 1e-12));
    }

    #[test]
    fn derivative_and_embed() {
        let x = Jet::coordinates(&[0.5, 1.5], 4);
        let f = &x[0].exp() * &x[1].sin();
        let fy = f.derivative(1);
        assert_eq!(fy.degree(), 3);
        assert!(approx(fy.partial(&[0, 0]), 0.5f64.exp() * 1.5f64.cos(), 1e-12));

        let big = JetSpace::for_vars(3);
        let e = x[0].exp().embed(&big, 1);
        assert!(approx(e.partial(&[1, 1]), 0.5f64.exp(), 1e-12));
        assert_eq!(e.partial(&[0]), 0.0);
    }

    #[test]
    fn mixed_degrees_truncate_to_minimum() {
        let x = Jet::coordinates(&[1.0], 5);
        let y = x[0].truncate(2);
        let z = &x[0] * &y;
        assert_eq!(z.degree(), 2);
    }
}
