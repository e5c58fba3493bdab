//! Symbolic reduction of order.
//!
//! With `y = exp(int (z + mu))` every derivative satisfies `y^(j) = P_j y`
//! where `P_0 = 1` and `P_{j+1} = (z + mu) P_j + D(P_j)`, `D` being the
//! formal derivation `z^(k) -> z^(k+1)`. Substituting into
//! `y^(n) + sum (a_i + r_i) y^(i) = 0` and removing the linear constant
//! coefficient part and the characteristic constant leaves the right-hand
//! side of the reduced equation
//!
//! ```text
//! z^(n-1) + sum_{i<n-1} b_i z^(i) = sum_alpha Omega_alpha (z, z', ..., z^(n-2))^alpha
//! ```
//!
//! which is collected here into the multi-index table `Omega_alpha`.
//! The table is built from the recurrence and is the authoritative form;
//! [`printed_f`] and [`printed_h`] reproduce the closed-form expansions
//! that are only used as cross-checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::poly::{rational_from_f64, rational_to_f64, Poly, Rational, Ring};
use crate::spectral::binomial;

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("order n = {0} outside the supported range {MIN_ORDER}..={MAX_ORDER}")]
    OrderOutOfRange(usize),
    #[error("coefficient vector has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("non-finite parameter value")]
    NonFinite,
}

/// Index layout of the symbolic variables for an order-n problem:
/// `v_0..v_{n-1}` (standing for `z..z^(n-1)`), `mu`, `a_0..a_{n-1}`, `r_0..r_{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    pub n: usize,
}

impl VarLayout {
    pub fn count(&self) -> usize {
        3 * self.n + 1
    }
    pub fn v(&self, k: usize) -> usize {
        debug_assert!(k < self.n);
        k
    }
    pub fn mu(&self) -> usize {
        self.n
    }
    pub fn a(&self, i: usize) -> usize {
        self.n + 1 + i
    }
    pub fn r(&self, i: usize) -> usize {
        2 * self.n + 1 + i
    }
    /// Indices of the variables that form the multi-index (`v_0..v_{n-2}`).
    pub fn jet_vars(&self) -> Vec<usize> {
        (0..self.n - 1).collect()
    }
    pub fn r_vars(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.r(i)).collect()
    }
    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.count());
        for k in 0..self.n {
            names.push(if k == 0 { "z".into() } else { format!("z{k}") });
        }
        names.push("mu".into());
        names.extend((0..self.n).map(|i| format!("a{i}")));
        names.extend((0..self.n).map(|i| format!("r{i}")));
        names
    }
    fn var(&self, index: usize) -> Poly {
        Poly::var(self.count(), index)
    }
    fn int(&self, k: i64) -> Poly {
        Poly::int(self.count(), k)
    }
}

fn check_order(n: usize) -> Result<(), ReductionError> {
    if (MIN_ORDER..=MAX_ORDER).contains(&n) {
        Ok(())
    } else {
        Err(ReductionError::OrderOutOfRange(n))
    }
}

/// `P_0..P_n` with `y^(j) = P_j y`.
#[derive(Debug, Clone)]
pub struct DerivativePolynomials {
    pub layout: VarLayout,
    pub p: Vec<Poly>,
}

pub fn build_derivative_polynomials(n: usize) -> Result<DerivativePolynomials, ReductionError> {
    check_order(n)?;
    let layout = VarLayout { n };
    let shifted = &layout.var(layout.v(0)) + &layout.var(layout.mu());
    let derivation = |i: usize| {
        if i + 1 < n {
            Some(layout.var(i + 1))
        } else {
            None
        }
    };
    let mut p = vec![layout.int(1)];
    for j in 0..n {
        let next = &(&shifted * &p[j]) + &p[j].derive(derivation);
        p.push(next);
    }
    Ok(DerivativePolynomials { layout, p })
}

impl DerivativePolynomials {
    /// `y^(j)/y` at a numeric jet `(z, z', ...)`; the jet must hold at least
    /// `j` entries (missing higher entries are treated as zero).
    pub fn ratio(&self, j: usize, mu: f64, jet: &[f64]) -> f64 {
        let l = self.layout;
        let mut vals = vec![0.0; l.count()];
        for (k, z) in jet.iter().take(l.n).enumerate() {
            vals[l.v(k)] = *z;
        }
        vals[l.mu()] = mu;
        self.p[j].eval(&vals)
    }
}

/// Numeric parameter or a free symbol kept in the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param<T> {
    Symbolic,
    Value(T),
}

/// The `alpha -> Omega_alpha` table of the reduced right-hand side.
///
/// Multi-indices run over `(z, z', ..., z^(n-2))`; each coefficient is a
/// polynomial in `mu`, `r_0..r_{n-1}` and (if left symbolic) `a_0..a_{n-1}`.
#[derive(Debug, Clone)]
pub struct OmegaTable {
    pub layout: VarLayout,
    pub entries: BTreeMap<Vec<u16>, Poly>,
    /// r-free part of `P_n + sum (a_i + r_i) P_i` that is linear in `v`.
    pub linear: Poly,
    /// r-free, v-free part: the characteristic polynomial at `mu`.
    pub characteristic: Poly,
    /// `P_n + sum (a_i + r_i) P_i` itself.
    pub full: Poly,
}

pub fn build_reduced_rhs(
    n: usize,
    a: Param<&[f64]>,
    mu: Param<f64>,
) -> Result<OmegaTable, ReductionError> {
    let dp = build_derivative_polynomials(n)?;
    let l = dp.layout;
    let mut full = dp.p[n].clone();
    for i in 0..n {
        let coeff = &l.var(l.a(i)) + &l.var(l.r(i));
        full = &full + &(&coeff * &dp.p[i]);
    }
    if let Param::Value(a) = a {
        if a.len() != n {
            return Err(ReductionError::Length {
                expected: n,
                got: a.len(),
            });
        }
        for (i, ai) in a.iter().enumerate() {
            let q = rational_from_f64(*ai).ok_or(ReductionError::NonFinite)?;
            full = full.substitute(l.a(i), &q);
        }
    }
    if let Param::Value(mu) = mu {
        let q = rational_from_f64(mu).ok_or(ReductionError::NonFinite)?;
        full = full.substitute(l.mu(), &q);
    }

    let all_v: Vec<usize> = (0..n).map(|k| l.v(k)).collect();
    let r_vars = l.r_vars();
    let mut linear = Poly::zero(l.count());
    let mut characteristic = Poly::zero(l.count());
    let mut nonlinear = Poly::zero(l.count());
    for (m, c) in full.terms() {
        let v_deg: u32 = all_v.iter().map(|&v| m[v] as u32).sum();
        let r_deg: u32 = r_vars.iter().map(|&v| m[v] as u32).sum();
        let target = match (r_deg, v_deg) {
            (0, 0) => &mut characteristic,
            (0, 1) => &mut linear,
            _ => &mut nonlinear,
        };
        target.add_term(m.clone(), c.clone());
    }
    debug_assert_eq!(nonlinear.degree_in(&[l.v(n - 1)]), 0);
    let rhs = -&nonlinear;
    let entries = rhs.collect_by(&l.jet_vars());
    Ok(OmegaTable {
        layout: l,
        entries,
        linear,
        characteristic,
        full,
    })
}

impl OmegaTable {
    pub fn order(&self) -> usize {
        self.layout.n
    }

    /// Coefficient polynomial of the all-zero multi-index.
    pub fn omega_zero(&self) -> Poly {
        let key = vec![0u16; self.layout.n - 1];
        self.entries
            .get(&key)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.layout.count()))
    }

    /// `sum_alpha Omega_alpha v^alpha` as a polynomial.
    pub fn rhs_polynomial(&self) -> Poly {
        let l = self.layout;
        let mut out = Poly::zero(l.count());
        for (alpha, coeff) in &self.entries {
            let mut mono = Poly::one(l.count());
            for (k, &e) in alpha.iter().enumerate() {
                mono = &mono * &l.var(l.v(k)).pow(e as u32);
            }
            out = &out + &(&mono * coeff);
        }
        out
    }

    fn values(&self, mu: f64, a: Option<&[f64]>, rvals: &[f64], zvals: &[f64]) -> Vec<f64> {
        let l = self.layout;
        let mut vals = vec![0.0; l.count()];
        for (k, z) in zvals.iter().enumerate() {
            vals[l.v(k)] = *z;
        }
        vals[l.mu()] = mu;
        if let Some(a) = a {
            for (i, ai) in a.iter().enumerate() {
                vals[l.a(i)] = *ai;
            }
        }
        for (i, r) in rvals.iter().enumerate() {
            vals[l.r(i)] = *r;
        }
        vals
    }

    /// `sum_alpha Omega_alpha(mu, r) z^alpha` straight from the symbolic table.
    pub fn evaluate(&self, mu: f64, rvals: &[f64], zvals: &[f64]) -> f64 {
        let vals = self.values(mu, None, rvals, zvals);
        let jet = self.layout.jet_vars();
        self.entries
            .iter()
            .map(|(alpha, coeff)| {
                let mono: f64 = alpha
                    .iter()
                    .zip(&jet)
                    .map(|(&e, &v)| vals[v].powi(e as i32))
                    .product();
                coeff.eval(&vals) * mono
            })
            .sum()
    }

    /// Numeric form for a fixed `mu` (and `a`, if the table is still symbolic in it).
    pub fn compile(&self, mu: f64, a: Option<&[f64]>) -> CompiledRhs {
        let l = self.layout;
        let vals = self.values(mu, a, &vec![0.0; l.n], &[]);
        let mut terms = Vec::with_capacity(self.entries.len());
        for (alpha, coeff) in &self.entries {
            let mut constant = 0.0;
            let mut r_coeffs = vec![0.0; l.n];
            for (m, c) in coeff.terms() {
                let mut factor = rational_to_f64(c);
                let mut which_r = None;
                for (idx, &e) in m.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    if idx >= l.r(0) {
                        debug_assert!(e == 1 && which_r.is_none());
                        which_r = Some(idx - l.r(0));
                    } else {
                        factor *= vals[idx].powi(e as i32);
                    }
                }
                match which_r {
                    None => constant += factor,
                    Some(i) => r_coeffs[i] += factor,
                }
            }
            terms.push(CompiledTerm {
                alpha: alpha.clone(),
                degree: alpha.iter().map(|&e| e as usize).sum(),
                constant,
                r_coeffs,
            });
        }
        CompiledRhs { n: l.n, mu, terms }
    }

    /// Structured text, one row per multi-index.
    pub fn render(&self) -> String {
        let names = self.layout.names();
        let mut out = String::new();
        let _ = writeln!(out, "# n = {}", self.layout.n);
        let _ = writeln!(out, "# alpha indexes (z, z1, ..., z{})", self.layout.n - 2);
        for (alpha, coeff) in &self.entries {
            let idx: Vec<String> = alpha.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(
                out,
                "alpha=({}) |alpha|={} : {}",
                idx.join(","),
                alpha.iter().map(|&e| e as u32).sum::<u32>(),
                coeff.render(&names)
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CompiledTerm {
    pub alpha: Vec<u16>,
    pub degree: usize,
    pub constant: f64,
    pub r_coeffs: Vec<f64>,
}

impl CompiledTerm {
    pub fn coefficient(&self, rvals: &[f64]) -> f64 {
        self.constant
            + self
                .r_coeffs
                .iter()
                .zip(rvals)
                .map(|(c, r)| c * r)
                .sum::<f64>()
    }
}

/// Numeric `Omega` table for a fixed `mu`: each coefficient is affine in `r`.
#[derive(Debug, Clone)]
pub struct CompiledRhs {
    pub n: usize,
    pub mu: f64,
    pub terms: Vec<CompiledTerm>,
}

impl CompiledRhs {
    pub fn evaluate(&self, rvals: &[f64], zvals: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                let c = term.coefficient(rvals);
                if c == 0.0 {
                    return 0.0;
                }
                term.alpha.iter().zip(zvals).fold(c, |acc, (&e, z)| {
                    if e == 0 {
                        acc
                    } else {
                        acc * z.powi(e as i32)
                    }
                })
            })
            .sum()
    }

    pub fn omega_zero(&self, rvals: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.degree == 0)
            .map(|t| t.coefficient(rvals))
            .sum()
    }

    /// `sum_{|alpha| = k} |Omega_alpha|` for `k = 0..=n`.
    pub fn mass_by_degree(&self, rvals: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for t in &self.terms {
            out[t.degree] += t.coefficient(rvals).abs();
        }
        out
    }

    /// `sum_{|alpha| >= 1} |Omega_alpha|`.
    pub fn nonconstant_mass(&self, rvals: &[f64]) -> f64 {
        self.mass_by_degree(rvals)[1..].iter().sum()
    }

    /// Signed `sum_{|alpha| >= 1} Omega_alpha`, i.e. the right-hand side at
    /// `z = z' = ... = 1` minus `Omega_0`.
    pub fn h_hat(&self, rvals: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.degree >= 1)
            .map(|t| t.coefficient(rvals))
            .sum()
    }

    /// Partial derivatives of the right-hand side with respect to each jet entry.
    pub fn gradient(&self, rvals: &[f64], zvals: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        for term in &self.terms {
            if term.degree == 0 {
                continue;
            }
            let c = term.coefficient(rvals);
            if c == 0.0 {
                continue;
            }
            for k in 0..term.alpha.len() {
                let e = term.alpha[k];
                if e == 0 {
                    continue;
                }
                let mut g = c * e as f64 * zvals[k].powi(e as i32 - 1);
                for (q, (&eq, zq)) in term.alpha.iter().zip(zvals).enumerate() {
                    if q != k && eq > 0 {
                        g *= zq.powi(eq as i32);
                    }
                }
                out[k] += g;
            }
        }
    }
}

/// The closed-form `Omega_0 = -sum_{l<n} mu^l r_l` (sign of the right-hand side).
pub fn expected_omega_zero(layout: VarLayout) -> Poly {
    let mut out = Poly::zero(layout.count());
    for l in 0..layout.n {
        let term = &layout.var(layout.mu()).pow(l as u32) * &layout.var(layout.r(l));
        out = &out - &term;
    }
    out
}

/// Ingredients of the printed closed forms, in any ring.
pub struct PrintedInputs<T> {
    /// `z, z', ..., z^(n-2)`.
    pub z: Vec<T>,
    pub mu: T,
    /// `a_0..a_{n-1}`.
    pub a: Vec<T>,
    /// `r_0..r_{n-1}`.
    pub r: Vec<T>,
}

impl<T: Ring> PrintedInputs<T> {
    fn int(&self, k: i64) -> T {
        T::int_like(&self.mu, k)
    }

    fn zd(&self, k: usize) -> T {
        self.z[k].clone()
    }

    /// `(z + mu)^(l)`: derivative of order l, equal to `z^(l)` for l >= 1.
    fn shifted_derivative(&self, l: usize) -> T {
        if l == 0 {
            self.z[0].clone() + self.mu.clone()
        } else {
            self.z[l].clone()
        }
    }

    fn pow(&self, x: &T, k: usize) -> T {
        (0..k).fold(self.int(1), |acc, _| acc * x.clone())
    }

    fn binom(&self, n: usize, k: usize) -> T {
        self.int(binomial(n, k).round() as i64)
    }
}

/// Enumerate the nested index tuples `(l_1, ..., l_m)` of the printed
/// Leibniz sums together with their binomial weight and the trailing order
/// `e = j - sum l - m - 1`.
fn leibniz_tuples(m: usize, j: usize) -> Vec<(Vec<usize>, i64, usize)> {
    fn rec(m: usize, j: usize, prefix: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i64, usize)>) {
        let depth = prefix.len();
        let used: usize = prefix.iter().sum();
        if depth == m {
            let mut weight = binomial(j - 1, prefix[0]);
            let mut partial = 0;
            for i in 1..m {
                partial += prefix[i - 1];
                weight *= binomial(j - partial - i - 1, prefix[i]);
            }
            let e = j - used - m - 1;
            out.push((prefix.clone(), weight.round() as i64, e));
            return;
        }
        let upper = j as i64 - used as i64 - (m as i64 + 2);
        if upper < 0 {
            return;
        }
        for l in 0..=upper as usize {
            prefix.push(l);
            rec(m, j, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m >= 1 && j >= m + 2 {
        rec(m, j, &mut Vec::new(), &mut out);
    }
    out
}

fn printed_s<T: Ring>(x: &PrintedInputs<T>, m: usize, j: usize) -> T {
    if m == 0 {
        let lead = x.zd(j - 1);
        let tail = x.int(j as i64 - 1) * x.zd(j - 2) * (x.zd(0) + x.mu.clone());
        return lead + tail;
    }
    let mut acc = x.int(0);
    for (ls, weight, e) in leibniz_tuples(m, j) {
        let mut prod = x.int(weight);
        for &l in &ls {
            prod = prod * x.shifted_derivative(l);
        }
        let bracket = x.shifted_derivative(e)
            + x.int(e as i64) * x.shifted_derivative(e - 1) * (x.zd(0) + x.mu.clone());
        acc = acc + prod * bracket;
    }
    acc
}

fn printed_s_hat<T: Ring>(x: &PrintedInputs<T>, m: usize, j: usize) -> T {
    if m == 0 {
        return x.int(j as i64) + x.mu.clone() * x.int(j as i64 - 1);
    }
    let mut acc = x.int(0);
    for (_, weight, e) in leibniz_tuples(m, j) {
        let bracket = x.int(1) + x.int(e as i64) * (x.int(1) + x.mu.clone());
        acc = acc + x.int(weight) * bracket;
    }
    acc
}

/// The closed-form nonlinear side as printed, in the convention where the
/// reduced equation reads `linear part = -F`. Requires n >= 3.
pub fn printed_f<T: Ring>(n: usize, x: &PrintedInputs<T>) -> T {
    assert!(n >= 3, "printed closed form needs n >= 3");
    let zmu = x.zd(0) + x.mu.clone();
    let mut f = x.int(n as i64 - 1) * x.zd(n - 2) * x.zd(0);
    for m in 1..=n.saturating_sub(3) {
        f = f + printed_s(x, m, n);
    }
    for i in 3..n {
        let mut a_part = x.int(i as i64 - 1) * x.zd(i - 2) * x.zd(0);
        for m in 1..=i - 3 {
            a_part = a_part + printed_s(x, m, i);
        }
        a_part = a_part + x.zd(i - 1) * x.zd(1);
        for j in 1..=i - 2 {
            a_part = a_part + x.binom(i, j) * x.zd(i - j) * x.pow(&x.mu, j);
        }
        let mut r_part = x.int(0);
        for m in 0..=i - 3 {
            r_part = r_part + printed_s(x, m, i);
        }
        r_part = r_part + x.zd(i - 1) * x.zd(1) + x.pow(&zmu, i);
        f = f + x.a[i].clone() * a_part + x.r[i].clone() * r_part;
    }
    f = f + x.a[2].clone() * x.zd(0) * x.zd(0);
    f = f + x.r[2].clone() * (x.zd(1) + x.pow(&zmu, 2));
    f = f + x.r[1].clone() * zmu + x.r[0].clone();
    f
}

/// The closed-form `H(t, mu)` as printed (same sign convention as [`printed_f`]).
pub fn printed_h<T: Ring>(n: usize, x: &PrintedInputs<T>) -> T {
    assert!(n >= 3, "printed closed form needs n >= 3");
    let one = x.int(1);
    let mut h = x.int(n as i64 - 1)
        + x.a[2].clone()
        + x.r[2].clone() * (x.int(2) + x.int(2) * x.mu.clone())
        + x.r[1].clone();
    for m in 1..=n.saturating_sub(3) {
        h = h + printed_s_hat(x, m, n);
    }
    for i in 3..n {
        let mut a_part = x.int(i as i64 - 1);
        for m in 1..=i - 3 {
            a_part = a_part + printed_s_hat(x, m, i);
        }
        a_part = a_part + one.clone();
        for j in 1..=i - 2 {
            a_part = a_part + x.binom(i, j) * x.pow(&x.mu, j);
        }
        let mut r_part = x.int(0);
        for m in 0..=i - 3 {
            r_part = r_part + printed_s_hat(x, m, i);
        }
        r_part = r_part + x.pow(&(one.clone() + x.mu.clone()), i);
        h = h + x.a[i].clone() * a_part + x.r[i].clone() * r_part;
    }
    h
}

fn symbolic_inputs(layout: VarLayout) -> PrintedInputs<Poly> {
    PrintedInputs {
        z: (0..layout.n - 1).map(|k| layout.var(layout.v(k))).collect(),
        mu: layout.var(layout.mu()),
        a: (0..layout.n).map(|i| layout.var(layout.a(i))).collect(),
        r: (0..layout.n).map(|i| layout.var(layout.r(i))).collect(),
    }
}

/// Numeric evaluation of the printed closed form.
pub fn printed_f_reference(n: usize, mu: f64, a: &[f64], rvals: &[f64], zvals: &[f64]) -> f64 {
    let x = PrintedInputs {
        z: zvals.to_vec(),
        mu,
        a: a.to_vec(),
        r: rvals.to_vec(),
    };
    printed_f(n, &x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonomialMismatch {
    pub monomial: String,
    pub recurrence: Rational,
    pub printed: Rational,
}

/// Monomial-by-monomial comparison of a printed closed form against the
/// recurrence-built polynomial (both in the printed sign convention).
#[derive(Debug, Clone)]
pub struct CrossCheckReport {
    pub n: usize,
    pub what: &'static str,
    pub mismatches: Vec<MonomialMismatch>,
    /// `printed - recurrence` as a polynomial.
    pub difference: Poly,
}

impl CrossCheckReport {
    fn from_polys(n: usize, what: &'static str, recurrence: &Poly, printed: &Poly) -> Self {
        let layout = VarLayout { n };
        let names = layout.names();
        let difference = printed - recurrence;
        let lookup = |p: &Poly, m: &Vec<u16>| {
            p.terms()
                .find(|(mm, _)| *mm == m)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(Rational::zero)
        };
        let mismatches = difference
            .terms()
            .map(|(m, _)| {
                let mut mono = Poly::zero(layout.count());
                mono.add_term(m.clone(), Rational::one());
                MonomialMismatch {
                    monomial: mono.render(&names),
                    recurrence: lookup(recurrence, m),
                    printed: lookup(printed, m),
                }
            })
            .collect();
        CrossCheckReport {
            n,
            what,
            mismatches,
            difference,
        }
    }

    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# cross-check of printed {} against the recurrence, n = {}: {} mismatching monomial(s)",
            self.what,
            self.n,
            self.mismatches.len()
        );
        let _ = writeln!(out, "monomial,recurrence,printed");
        for m in &self.mismatches {
            let _ = writeln!(out, "{},{},{}", m.monomial, m.recurrence, m.printed);
        }
        out
    }
}

/// Compare the printed `F` with `-(sum_alpha Omega_alpha v^alpha)` built by
/// the recurrence, with `a`, `mu` and `r` all symbolic.
pub fn cross_check_printed_f(n: usize) -> Result<CrossCheckReport, ReductionError> {
    check_order(n)?;
    if n < 3 {
        return Err(ReductionError::OrderOutOfRange(n));
    }
    let table = build_reduced_rhs(n, Param::Symbolic, Param::Symbolic)?;
    let recurrence = -&table.rhs_polynomial();
    let printed = printed_f(n, &symbolic_inputs(table.layout));
    Ok(CrossCheckReport::from_polys(n, "F", &recurrence, &printed))
}

/// Compare the printed `H` with `-(sum_{|alpha|>=1} Omega_alpha)` built by the recurrence.
pub fn cross_check_printed_h(n: usize) -> Result<CrossCheckReport, ReductionError> {
    check_order(n)?;
    if n < 3 {
        return Err(ReductionError::OrderOutOfRange(n));
    }
    let table = build_reduced_rhs(n, Param::Symbolic, Param::Symbolic)?;
    let l = table.layout;
    let mut h = Poly::zero(l.count());
    for (alpha, coeff) in &table.entries {
        if alpha.iter().any(|&e| e > 0) {
            h = &h + coeff;
        }
    }
    let recurrence = -&h;
    let printed = printed_h(n, &symbolic_inputs(l));
    Ok(CrossCheckReport::from_polys(n, "H", &recurrence, &printed))
}
