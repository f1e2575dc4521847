//! Polynomial substrate: graded-lex monomial bases, multivariate and
//! univariate polynomials, box integration, Sturm-sequence real-root
//! isolation and constrained univariate minimization.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative threshold below which leading coefficients are trimmed before
/// root isolation.
const LEADING_TRIM: f64 = 1e-14;

/// Exponent vector of a single monomial, one entry per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    /// Total degree (sum of exponents).
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// All monomials of total degree at most `d` in `n` variables, in graded
/// lexicographic order. The order is fixed once and serialized with every
/// model so files are self-describing.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    n: usize,
    d: u32,
    indices: Vec<MultiIndex>,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn enumerate_degree(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if n == 1 {
        prefix.push(total);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    // First variable takes the largest exponent first: lex-descending within
    // each grade.
    for e in (0..=total).rev() {
        prefix.push(e);
        enumerate_degree(n - 1, total - e, prefix, out);
        prefix.pop();
    }
}

impl MonomialBasis {
    /// Enumerate all `C(n+d, n)` multi-indices of total degree at most `d`.
    pub fn new(n: usize, d: u32) -> Self {
        assert!(n >= 1, "basis needs at least one variable");
        let mut indices = Vec::with_capacity(binomial(n + d as usize, n));
        let mut prefix = Vec::with_capacity(n);
        for total in 0..=d {
            enumerate_degree(n, total, &mut prefix, &mut indices);
        }
        MonomialBasis { n, d, indices }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Position of an exponent vector in this basis, if within degree.
    pub fn position(&self, exponents: &[u32]) -> Option<usize> {
        if exponents.len() != self.n {
            return None;
        }
        let total: u32 = exponents.iter().sum();
        if total > self.d {
            return None;
        }
        // Offset of the grade block, then rank within the grade.
        let mut pos = 0usize;
        for g in 0..total {
            pos += binomial(self.n + g as usize - 1, self.n - 1);
        }
        Some(pos + grade_rank(exponents, total))
    }

    /// Values of every basis monomial at `x`, in basis order.
    pub fn eval_all(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let powers = power_table(x, self.d);
        Ok(self
            .indices
            .iter()
            .map(|mi| {
                mi.0.iter()
                    .enumerate()
                    .map(|(j, &e)| powers[j][e as usize])
                    .product()
            })
            .collect())
    }
}

/// Rank of `exponents` (summing to `total`) within its grade block, under
/// lex-descending order on the exponent vector.
fn grade_rank(exponents: &[u32], total: u32) -> usize {
    let n = exponents.len();
    if n == 1 {
        return 0;
    }
    let mut rank = 0usize;
    let mut remaining = total;
    for (j, &e) in exponents.iter().enumerate().take(n - 1) {
        let vars_after = n - j - 1;
        // Count vectors whose exponent at position j exceeds e.
        for higher in (e + 1)..=remaining {
            rank += binomial(vars_after + (remaining - higher) as usize - 1, vars_after - 1);
        }
        remaining -= e;
    }
    rank
}

fn power_table(x: &[f64], max_degree: u32) -> Vec<Vec<f64>> {
    x.iter()
        .map(|&xi| {
            let mut row = Vec::with_capacity(max_degree as usize + 1);
            row.push(1.0);
            for e in 1..=max_degree as usize {
                row.push(row[e - 1] * xi);
            }
            row
        })
        .collect()
}

/// A multivariate polynomial: coefficients aligned with a [`MonomialBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct MVPoly {
    basis: MonomialBasis,
    coeffs: Vec<f64>,
}

impl MVPoly {
    pub fn new(basis: MonomialBasis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: coeffs.len() });
        }
        Ok(MVPoly { basis, coeffs })
    }

    pub fn zero(n: usize, d: u32) -> Self {
        let basis = MonomialBasis::new(n, d);
        let coeffs = vec![0.0; basis.len()];
        MVPoly { basis, coeffs }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        let basis = MonomialBasis::new(n, 0);
        MVPoly { basis, coeffs: vec![value] }
    }

    /// The monomial `x_j` in `n` variables.
    pub fn variable(n: usize, j: usize) -> Self {
        assert!(j < n);
        let mut p = MVPoly::zero(n, 1);
        let mut exps = vec![0u32; n];
        exps[j] = 1;
        let pos = p.basis.position(&exps).expect("degree-1 monomial in basis");
        p.coeffs[pos] = 1.0;
        p
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dimension(&self) -> usize {
        self.basis.n
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.basis.n {
            return Err(Error::DimensionMismatch { expected: self.basis.n, got: x.len() });
        }
        let powers = power_table(x, self.basis.d);
        let mut acc = 0.0;
        for (mi, &c) in self.basis.indices.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let mut term = c;
            for (j, &e) in mi.0.iter().enumerate() {
                term *= powers[j][e as usize];
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Re-embed into a basis of at least degree `d`.
    pub fn with_degree(&self, d: u32) -> MVPoly {
        if d <= self.basis.d {
            return self.clone();
        }
        let basis = MonomialBasis::new(self.basis.n, d);
        let mut coeffs = vec![0.0; basis.len()];
        for (mi, &c) in self.basis.indices.iter().zip(&self.coeffs) {
            let pos = basis.position(&mi.0).expect("embedding preserves degree");
            coeffs[pos] = c;
        }
        MVPoly { basis, coeffs }
    }

    pub fn add(&self, other: &MVPoly) -> Result<MVPoly> {
        if self.basis.n != other.basis.n {
            return Err(Error::DimensionMismatch { expected: self.basis.n, got: other.basis.n });
        }
        let d = self.basis.d.max(other.basis.d);
        let mut out = self.with_degree(d);
        let other = other.with_degree(d);
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MVPoly) -> Result<MVPoly> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> MVPoly {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= factor;
        }
        out
    }

    pub fn mul(&self, other: &MVPoly) -> Result<MVPoly> {
        if self.basis.n != other.basis.n {
            return Err(Error::DimensionMismatch { expected: self.basis.n, got: other.basis.n });
        }
        let basis = MonomialBasis::new(self.basis.n, self.basis.d + other.basis.d);
        let lookup: HashMap<&[u32], usize> = basis
            .indices
            .iter()
            .enumerate()
            .map(|(i, mi)| (mi.0.as_slice(), i))
            .collect();
        let mut coeffs = vec![0.0; basis.len()];
        let mut exps = vec![0u32; self.basis.n];
        for (mi_a, &ca) in self.basis.indices.iter().zip(&self.coeffs) {
            if ca == 0.0 {
                continue;
            }
            for (mi_b, &cb) in other.basis.indices.iter().zip(&other.coeffs) {
                if cb == 0.0 {
                    continue;
                }
                for (e, (&a, &b)) in exps.iter_mut().zip(mi_a.0.iter().zip(&mi_b.0)) {
                    *e = a + b;
                }
                let pos = lookup[exps.as_slice()];
                coeffs[pos] += ca * cb;
            }
        }
        Ok(MVPoly { basis, coeffs })
    }

    pub fn powi(&self, e: u32) -> Result<MVPoly> {
        let mut out = MVPoly::constant(self.basis.n, 1.0);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Integral over a box, using the closed-form monomial moments.
    pub fn integral_over(&self, b: &BoxDomain) -> Result<f64> {
        let mut acc = 0.0;
        for (mi, &c) in self.basis.indices.iter().zip(&self.coeffs) {
            if c != 0.0 {
                acc += c * box_monomial_integral(mi, b)?;
            }
        }
        Ok(acc)
    }
}

/// A univariate polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<f64>,
}

impl UniPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Structural degree: index of the last stored coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }

    /// Formal derivative.
    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        }
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        UniPoly { coeffs }
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> UniPoly {
        UniPoly { coeffs: self.coeffs.iter().map(|&c| c * factor).collect() }
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UniPoly { coeffs }
    }

    /// Drop leading coefficients below `LEADING_TRIM` relative to the largest
    /// coefficient, to avoid spurious degree during root isolation.
    fn trimmed(&self) -> UniPoly {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return UniPoly::zero();
        }
        let tol = LEADING_TRIM * scale;
        let mut coeffs = self.coeffs.clone();
        while let Some(&last) = coeffs.last() {
            if last.abs() <= tol && coeffs.len() > 1 {
                coeffs.pop();
            } else {
                break;
            }
        }
        UniPoly { coeffs }
    }
}

/// A nonempty interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Interval { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, y: f64) -> bool {
        self.a <= y && y <= self.b
    }

    pub fn clamp(&self, y: f64) -> f64 {
        y.clamp(self.a, self.b)
    }
}

/// An axis-aligned box, one interval per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    intervals: Vec<Interval>,
}

impl BoxDomain {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidParams("box needs at least one dimension".into()));
        }
        Ok(BoxDomain { intervals })
    }

    pub fn dimension(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }
}

/// Exact integral of the monomial `m` over the box `B`:
/// the product of `(u^(k+1) - l^(k+1)) / (k+1)` over dimensions.
pub fn box_monomial_integral(m: &MultiIndex, b: &BoxDomain) -> Result<f64> {
    if m.len() != b.dimension() {
        return Err(Error::DimensionMismatch { expected: b.dimension(), got: m.len() });
    }
    let mut acc = 1.0;
    for (&k, iv) in m.0.iter().zip(b.intervals()) {
        let e = k as i32 + 1;
        acc *= (iv.b.powi(e) - iv.a.powi(e)) / f64::from(e);
    }
    Ok(acc)
}

/// Restrict `p(x, y) = sum_k h_k(x) y^k` to a fixed `x`, returning the
/// univariate polynomial in `y` (zero constant term by construction).
pub fn restrict_to_y(h: &[MVPoly], x: &[f64]) -> Result<UniPoly> {
    let mut coeffs = vec![0.0; h.len() + 1];
    for (k, hk) in h.iter().enumerate() {
        coeffs[k + 1] = hk.eval(x)?;
    }
    Ok(UniPoly::new(coeffs))
}

// --- Sturm-sequence root isolation ----------------------------------------

/// Polynomial division remainder, with small coefficients flushed to zero.
fn poly_rem(num: &UniPoly, den: &UniPoly) -> UniPoly {
    let mut r = num.coeffs.clone();
    let d = den.coeffs.len();
    let lead = den.coeffs[d - 1];
    while r.len() >= d {
        let factor = r[r.len() - 1] / lead;
        let shift = r.len() - d;
        for i in 0..d {
            r[shift + i] -= factor * den.coeffs[i];
        }
        r.pop();
    }
    let scale = r.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale > 0.0 {
        let tol = 1e-13 * scale;
        for c in &mut r {
            if c.abs() <= tol {
                *c = 0.0;
            }
        }
    }
    while r.last() == Some(&0.0) {
        r.pop();
    }
    UniPoly { coeffs: r }
}

fn normalized(p: UniPoly) -> UniPoly {
    let scale = p.max_abs_coeff();
    if scale == 0.0 {
        p
    } else {
        p.scale(1.0 / scale)
    }
}

struct SturmChain {
    chain: Vec<UniPoly>,
}

impl SturmChain {
    fn new(p: &UniPoly) -> SturmChain {
        let f0 = normalized(p.clone());
        let mut chain = vec![f0.clone()];
        let f1 = f0.derivative();
        if f1.is_zero() {
            return SturmChain { chain };
        }
        chain.push(normalized(f1));
        loop {
            let k = chain.len();
            let rem = poly_rem(&chain[k - 2], &chain[k - 1]);
            // The chain ends at the numerical gcd; a vanishing remainder
            // below this threshold adds only noise terms.
            if rem.max_abs_coeff() <= 1e-12 {
                break;
            }
            chain.push(normalized(rem.scale(-1.0)));
            if chain.last().map(UniPoly::degree) == Some(0) {
                break;
            }
        }
        SturmChain { chain }
    }

    /// Sign variations at `t`; exact zeros are skipped per the classical rule.
    fn variations(&self, t: f64) -> usize {
        let mut count = 0;
        let mut prev = 0i8;
        for f in &self.chain {
            let v = f.eval(t);
            let s = if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            };
            if s != 0 {
                if prev != 0 && s != prev {
                    count += 1;
                }
                prev = s;
            }
        }
        count
    }

    /// Number of distinct real roots in `(lo, hi]`.
    fn count(&self, lo: f64, hi: f64) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }
}

/// Refine a single root inside `[lo, hi]` where `p` changes sign strictly.
fn bisect_sign_change(p: &UniPoly, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let mut flo = p.eval(lo);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // A couple of Newton polish steps, kept inside the bracket.
    let dp = p.derivative();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = dp.eval(x);
        if d == 0.0 {
            break;
        }
        let step = p.eval(x) / d;
        let next = x - step;
        if next.is_finite() && next >= lo && next <= hi {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Refine a single distinct root of even multiplicity by bisecting on the
/// Sturm count.
fn bisect_sturm(chain: &SturmChain, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chain.count(lo, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All real roots of `p` in `[a, b]`, each distinct root reported once,
/// sorted ascending and accurate to `tol`.
pub fn real_roots_in(p: &UniPoly, interval: Interval, tol: f64) -> Result<Vec<f64>> {
    if tol <= 0.0 {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let p = p.trimmed();
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree() == 0 {
        return Ok(vec![]);
    }
    let chain = SturmChain::new(&p);
    // Pad so roots sitting exactly on an endpoint are interior to the scan.
    let pad = 0.5 * tol;
    let lo0 = interval.a - pad;
    let hi0 = interval.b + pad;
    let refine_width = (tol * 1e-3).max(f64::EPSILON * 4.0 * interval.b.abs().max(interval.a.abs()).max(1.0));

    let mut roots = Vec::new();
    let total = chain.count(lo0, hi0);
    if total > 0 {
        let mut stack = vec![(lo0, hi0, total)];
        while let Some((lo, hi, count)) = stack.pop() {
            if count == 1 {
                let flo = p.eval(lo);
                let fhi = p.eval(hi);
                // An exact zero at `lo` belongs to the neighbor interval:
                // only the strict sign change admits the fast bisection path.
                let root = if fhi == 0.0 {
                    hi
                } else if flo != 0.0 && (flo > 0.0) != (fhi > 0.0) {
                    bisect_sign_change(&p, lo, hi, refine_width)
                } else {
                    bisect_sturm(&chain, lo, hi, refine_width)
                };
                roots.push(root);
                continue;
            }
            if hi - lo <= refine_width {
                // A cluster tighter than the tolerance collapses to one value.
                roots.push(0.5 * (lo + hi));
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let left = chain.count(lo, mid);
            if left > 0 {
                stack.push((lo, mid, left));
            }
            if count > left {
                stack.push((mid, hi, count - left));
            }
        }
    }

    roots.sort_by(|x, y| x.partial_cmp(y).expect("finite roots"));
    let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        let r = interval.clamp(r);
        match merged.last() {
            Some(&last) if (r - last).abs() <= tol => {}
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

// --- Compensated (double-double) arithmetic --------------------------------
//
// Near-degenerate sections (for example the piecewise quartic when the two
// branch values almost coincide) have minima separated by less than f64
// resolution. A small error-free-transform layer resolves those ties.

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    let err = a.mul_add(b, -p);
    Dd { hi: p, lo: err }
}

fn dd_add(a: Dd, b: Dd) -> Dd {
    let s = two_sum(a.hi, b.hi);
    let lo = s.lo + a.lo + b.lo;
    let t = two_sum(s.hi, lo);
    Dd { hi: t.hi, lo: t.lo }
}

fn dd_add_f64(a: Dd, b: f64) -> Dd {
    dd_add(a, Dd::from(b))
}

fn dd_mul(a: Dd, b: Dd) -> Dd {
    let p = two_prod(a.hi, b.hi);
    let lo = p.lo + a.hi * b.lo + a.lo * b.hi;
    let t = two_sum(p.hi, lo);
    Dd { hi: t.hi, lo: t.lo }
}

fn dd_mul_f64(a: Dd, b: f64) -> Dd {
    dd_mul(a, Dd::from(b))
}

impl UniPoly {
    /// Horner evaluation in double-double precision.
    fn eval_dd(&self, y: f64) -> Dd {
        let mut acc = Dd::from(0.0);
        for &c in self.coeffs.iter().rev() {
            acc = dd_add_f64(dd_mul_f64(acc, y), c);
        }
        acc
    }
}

/// Compensated Newton polish: drives `|dp|` into the double-double noise
/// floor, far below what plain f64 residuals allow on clustered roots.
fn newton_polish_dd(dp: &UniPoly, dpp: &UniPoly, seed: f64, interval: Interval) -> Option<f64> {
    let mut y = seed;
    for _ in 0..40 {
        let num = dp.eval_dd(y).value();
        let den = dpp.eval(y);
        if den == 0.0 || !num.is_finite() {
            return None;
        }
        let step = num / den;
        let next = y - step;
        if !next.is_finite() {
            return None;
        }
        y = next;
        if step.abs() <= f64::EPSILON * y.abs().max(1.0) {
            break;
        }
    }
    let pad = 1e-9 * (1.0 + interval.b.abs().max(interval.a.abs()));
    if y >= interval.a - pad && y <= interval.b + pad {
        Some(interval.clamp(y))
    } else {
        None
    }
}

/// Sign of `p(c2) - p(c1)` resolved in double-double precision via the
/// factored form `(c2 - c1) * sum_k a_k sum_{i+j=k-1} c1^i c2^j`, which
/// avoids the catastrophic cancellation of comparing two near-equal values.
/// Returns `None` when the difference is below the compensated noise floor.
fn compare_values_dd(p: &UniPoly, c1: f64, c2: f64) -> Option<std::cmp::Ordering> {
    let delta = two_sum(c2, -c1);
    let mut s = Dd::from(0.0);
    let mut t = Dd::from(0.0); // t_k = sum_{i+j=k-1} c1^i c2^j
    let mut c2_pow = Dd::from(1.0); // c2^(k-1)
    let mut noise = 0.0f64;
    let scale = c1.abs().max(c2.abs());
    let mut scale_pow = 1.0f64;
    for (k, &a) in p.coeffs.iter().enumerate().skip(1) {
        // t_{k} = c1 * t_{k-1} + c2^(k-1)
        t = dd_add(dd_mul_f64(t, c1), c2_pow);
        c2_pow = dd_mul_f64(c2_pow, c2);
        if a != 0.0 {
            s = dd_add(s, dd_mul_f64(t, a));
            noise += a.abs() * k as f64 * scale_pow;
        }
        scale_pow *= scale.max(1.0);
    }
    let floor = 1e-28 * noise.max(1.0);
    let sv = s.value();
    if sv.abs() <= floor {
        return None;
    }
    let d = dd_mul(delta, s).value();
    if d > 0.0 {
        Some(std::cmp::Ordering::Greater)
    } else if d < 0.0 {
        Some(std::cmp::Ordering::Less)
    } else {
        None
    }
}

/// Minimize `p` over `[a, b]`. Candidates are the endpoints and the interior
/// critical points. Candidates whose values agree to within f64 resolution
/// are re-compared in compensated arithmetic; only genuinely indistinguishable
/// ties resolve to the smallest minimizer.
pub fn argmin_on_interval(p: &UniPoly, interval: Interval, tol: f64) -> Result<(f64, f64)> {
    if tol <= 0.0 {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let mut candidates = vec![interval.a, interval.b];
    let dp = p.derivative().trimmed();
    if !dp.is_zero() && dp.degree() >= 1 {
        candidates.extend(real_roots_in(&dp, interval, tol)?);
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).expect("finite candidates"));
    candidates.dedup();

    let mut best_value = f64::INFINITY;
    for &c in &candidates {
        let v = p.eval(c);
        if v < best_value {
            best_value = v;
        }
    }
    let window = tol * (1.0 + best_value.abs());
    let near: Vec<f64> =
        candidates.iter().copied().filter(|&c| p.eval(c) <= best_value + window).collect();

    if near.len() == 1 {
        return Ok((near[0], best_value));
    }

    // Ambiguous: several candidates sit inside the f64 merge window. Clusters
    // of critical points may also have collapsed during isolation, so re-seed
    // around each near-candidate, polish in compensated precision, and
    // compare minima pairwise without cancellation.
    let mut refined: Vec<f64> = Vec::new();
    if dp.is_zero() || dp.degree() < 1 {
        refined.extend(&near);
    } else {
        let dpp = dp.derivative();
        let spread = interval.length();
        for &c in &near {
            refined.push(c);
            for w in [1e-2, 1e-4] {
                let off = w * spread;
                for seed in [c - off, c + off] {
                    if let Some(r) = newton_polish_dd(&dp, &dpp, seed, interval) {
                        refined.push(r);
                    }
                }
            }
        }
        refined.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        refined.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * (1.0 + a.abs()));
        // Keep only refined points that are still competitive in f64.
        refined.retain(|&c| p.eval(c) <= best_value + 2.0 * window);
        if refined.is_empty() {
            refined.extend(&near);
        }
    }

    let mut best = refined[0];
    for &c in &refined[1..] {
        // `Greater` means p(c) > p(best): keep the current (smaller) one.
        match compare_values_dd(p, best, c) {
            Some(std::cmp::Ordering::Less) => best = c,
            _ => {}
        }
    }
    Ok((best, best_value.min(p.eval(best))))
}

// --- Lukacs reconstruction -------------------------------------------------

/// Gram sizes `(|W0|, |W1|)` mandated by the certificate degree and parity.
pub fn lukacs_gram_sizes(degree: usize) -> (usize, usize) {
    if degree % 2 == 0 {
        (degree / 2 + 1, if degree == 0 { 0 } else { degree / 2 })
    } else {
        ((degree + 1) / 2, (degree + 1) / 2)
    }
}

fn gram_to_poly(w: &DMatrix<f64>) -> UniPoly {
    if w.nrows() == 0 {
        return UniPoly::zero();
    }
    let n = w.nrows();
    let mut coeffs = vec![0.0; 2 * n - 1];
    for i in 0..n {
        for j in 0..n {
            coeffs[i + j] += w[(i, j)];
        }
    }
    UniPoly::new(coeffs)
}

/// Expand the interval-nonnegativity certificate `(W0, W1)` of degree `D`
/// into the polynomial it represents:
/// `sigma0 + sigma1 (b-y)(y-a)` for even `D`,
/// `sigma0 (y-a) + sigma1 (b-y)` for odd `D`,
/// with each `sigma(y) = v(y)^T W v(y)`.
pub fn lukacs_reconstruct(
    w0: &DMatrix<f64>,
    w1: &DMatrix<f64>,
    interval: Interval,
    degree: usize,
) -> Result<UniPoly> {
    let (s0, s1) = lukacs_gram_sizes(degree);
    if w0.nrows() != s0 || w0.ncols() != s0 {
        return Err(Error::GramShape(format!(
            "W0 must be {s0}x{s0} for degree {degree}, got {}x{}",
            w0.nrows(),
            w0.ncols()
        )));
    }
    if w1.nrows() != s1 || w1.ncols() != s1 {
        return Err(Error::GramShape(format!(
            "W1 must be {s1}x{s1} for degree {degree}, got {}x{}",
            w1.nrows(),
            w1.ncols()
        )));
    }
    let sigma0 = gram_to_poly(w0);
    let sigma1 = gram_to_poly(w1);
    let (a, b) = (interval.a, interval.b);
    let q = if degree % 2 == 0 {
        // (b-y)(y-a) = -y^2 + (a+b) y - ab
        let weight = UniPoly::new(vec![-a * b, a + b, -1.0]);
        sigma0.add(&sigma1.mul(&weight))
    } else {
        let up = UniPoly::new(vec![-a, 1.0]);
        let down = UniPoly::new(vec![b, -1.0]);
        sigma0.mul(&up).add(&sigma1.mul(&down))
    };
    let mut coeffs = q.coeffs().to_vec();
    coeffs.resize(degree + 1, 0.0);
    Ok(UniPoly::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn basis_univariate_degree_three() {
        let b = MonomialBasis::new(1, 3);
        assert_eq!(b.len(), 4);
        let exps: Vec<u32> = b.indices().iter().map(|m| m.0[0]).collect();
        assert_eq!(exps, vec![0, 1, 2, 3]);
    }

    #[test]
    fn basis_bivariate_degree_two_order() {
        let b = MonomialBasis::new(2, 2);
        let expected: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        let got: Vec<Vec<u32>> = b.indices().iter().map(|m| m.0.clone()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn basis_size_matches_binomial() {
        let b = MonomialBasis::new(3, 4);
        assert_eq!(b.len(), 35);
        for (n, d) in [(1usize, 6u32), (2, 5), (3, 3), (4, 2)] {
            let b = MonomialBasis::new(n, d);
            assert_eq!(b.len(), binomial(n + d as usize, n));
        }
    }

    #[test]
    fn basis_position_roundtrip() {
        for (n, d) in [(1usize, 5u32), (2, 4), (3, 6)] {
            let b = MonomialBasis::new(n, d);
            for (i, mi) in b.indices().iter().enumerate() {
                assert_eq!(b.position(&mi.0), Some(i));
            }
        }
    }

    #[test]
    fn eval_simple_polynomial() {
        // x1^2 + x2 at (2, 3) = 7
        let basis = MonomialBasis::new(2, 2);
        let mut coeffs = vec![0.0; basis.len()];
        coeffs[basis.position(&[2, 0]).unwrap()] = 1.0;
        coeffs[basis.position(&[0, 1]).unwrap()] = 1.0;
        let p = MVPoly::new(basis, coeffs).unwrap();
        assert_eq!(p.eval(&[2.0, 3.0]).unwrap(), 7.0);
    }

    #[test]
    fn eval_zero_polynomial() {
        let p = MVPoly::zero(2, 3);
        assert_eq!(p.eval(&[0.3, -0.7]).unwrap(), 0.0);
    }

    #[test]
    fn eval_expanded_cube_matches_repeated_multiplication() {
        // (1+x)^3 via explicit expansion against the mul-based oracle.
        let one_plus_x = MVPoly::constant(1, 1.0).add(&MVPoly::variable(1, 0)).unwrap();
        let cube = one_plus_x.powi(3).unwrap();
        assert!((cube.eval(&[0.5]).unwrap() - 3.375).abs() < 1e-14);
        // Oracle: evaluate (1+x) then cube numerically.
        let v = one_plus_x.eval(&[0.5]).unwrap();
        assert!((cube.eval(&[0.5]).unwrap() - v * v * v).abs() < 1e-14);
    }

    #[test]
    fn eval_dimension_mismatch_errors() {
        let p = MVPoly::zero(2, 1);
        assert!(matches!(p.eval(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn restrict_linear_model() {
        // h = (h_1 = -x): p(x, y) = -x y; at x = 0.7 the restriction is -0.7 y.
        let h1 = MVPoly::variable(1, 0).scale(-1.0);
        let u = restrict_to_y(&[h1], &[0.7]).unwrap();
        assert_eq!(u.coeffs(), &[0.0, -0.7]);
    }

    #[test]
    fn restrict_zero_and_quadratic() {
        let zero = vec![MVPoly::zero(1, 2), MVPoly::zero(1, 0)];
        let u = restrict_to_y(&zero, &[0.4]).unwrap();
        assert!(u.is_zero());

        let h = vec![MVPoly::zero(1, 0), MVPoly::constant(1, 0.5)];
        let u = restrict_to_y(&h, &[123.0]).unwrap();
        assert_eq!(u.coeffs(), &[0.0, 0.0, 0.5]);
    }

    #[test]
    fn derivative_cubic() {
        let p = UniPoly::new(vec![0.0, -1.0, 0.0, 1.0]); // y^3 - y
        assert_eq!(p.derivative().coeffs(), &[-1.0, 0.0, 3.0]);
    }

    #[test]
    fn derivative_constant_is_zero() {
        assert!(UniPoly::new(vec![5.0]).derivative().is_zero());
    }

    #[test]
    fn derivative_of_sign_quartic_matches_expansion() {
        // p(y) = (y^2-1)^2 + 4xy(y^2-3) at fixed x; p' = 4(y^2-1)(y+3x).
        let x = -0.35;
        let p = UniPoly::new(vec![1.0, -12.0 * x, -2.0, 4.0 * x, 1.0]);
        let dp = p.derivative();
        // Oracle: expand 4(y^2-1)(y+3x) = 4y^3 + 12x y^2 - 4y - 12x.
        let expected = UniPoly::new(vec![-12.0 * x, -4.0, 12.0 * x, 4.0]);
        for (a, b) in dp.coeffs().iter().zip(expected.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn roots_of_cubic() {
        let p = UniPoly::new(vec![0.0, -1.0, 0.0, 1.0]); // y^3 - y
        let roots = real_roots_in(&p, iv(-2.0, 2.0), 1e-10).unwrap();
        assert_eq!(roots.len(), 3);
        for (r, expect) in roots.iter().zip(&[-1.0, 0.0, 1.0]) {
            assert!((r - expect).abs() < 1e-10, "{r} vs {expect}");
        }
    }

    #[test]
    fn no_real_roots() {
        let p = UniPoly::new(vec![1.0, 0.0, 1.0]); // y^2 + 1
        let roots = real_roots_in(&p, iv(-10.0, 10.0), 1e-10).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn roots_at_interval_endpoints() {
        // 4(y^2-1)(y+1.5) on [-1, 1]: roots at the endpoints, -1.5 excluded.
        let p = UniPoly::new(vec![-6.0, -4.0, 6.0, 4.0]);
        let roots = real_roots_in(&p, iv(-1.0, 1.0), 1e-10).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 1.0).abs() < 1e-9);
        assert!((roots[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_polynomial_signals_error() {
        let p = UniPoly::new(vec![0.0, 0.0]);
        assert!(matches!(real_roots_in(&p, iv(-1.0, 1.0), 1e-10), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn double_root_reported_once() {
        // (y - 0.3)^2
        let p = UniPoly::new(vec![0.09, -0.6, 1.0]);
        let roots = real_roots_in(&p, iv(-1.0, 1.0), 1e-8).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.3).abs() < 1e-8);
    }

    /// Brute-force oracle: sign scan on a fine grid plus bisection.
    fn sign_scan_roots(p: &UniPoly, interval: Interval, grid: usize) -> Vec<f64> {
        let mut roots = Vec::new();
        let step = interval.length() / grid as f64;
        let mut prev_t = interval.a;
        let mut prev_v = p.eval(prev_t);
        for i in 1..=grid {
            let t = interval.a + step * i as f64;
            let v = p.eval(t);
            if prev_v == 0.0 {
                roots.push(prev_t);
            } else if v != 0.0 && (prev_v > 0.0) != (v > 0.0) {
                let (mut lo, mut hi, mut flo) = (prev_t, t, prev_v);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let fm = p.eval(mid);
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (fm > 0.0) == (flo > 0.0) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_t = t;
            prev_v = v;
        }
        if prev_v == 0.0 {
            roots.push(prev_t);
        }
        roots
    }

    #[test]
    fn roots_agree_with_sign_scan_on_random_polys() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let deg = rng.gen_range(1..=10);
            let coeffs: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = UniPoly::new(coeffs);
            if p.trimmed().is_zero() {
                continue;
            }
            let interval = iv(-2.0, 2.0);
            let ours = real_roots_in(&p, interval, 1e-10).unwrap();
            let oracle = sign_scan_roots(&p, interval, 10_000);
            assert_eq!(ours.len(), oracle.len(), "trial {trial}: {ours:?} vs {oracle:?}");
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "trial {trial}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn argmin_symmetric_quartic_tiebreaks_low() {
        let p = UniPoly::new(vec![1.0, 0.0, -2.0, 0.0, 1.0]); // (y^2-1)^2
        let (y, v) = argmin_on_interval(&p, iv(-2.0, 2.0), 1e-10).unwrap();
        assert!((y + 1.0).abs() < 1e-9);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn argmin_strictly_convex() {
        // 0.5 y^2 - 0.3 y minimized at y = 0.3
        let p = UniPoly::new(vec![0.0, -0.3, 0.5]);
        let (y, _) = argmin_on_interval(&p, iv(-1.0, 1.0), 1e-10).unwrap();
        assert!((y - 0.3).abs() < 1e-9);
    }

    #[test]
    fn argmin_absolute_value_section() {
        // (x^2 - y^2)^2 at x = -0.3 on [0, 1]: minimum at |x| = 0.3.
        let x: f64 = -0.3;
        let c = x * x;
        let p = UniPoly::new(vec![c * c, 0.0, -2.0 * c, 0.0, 1.0]);
        let (y, _) = argmin_on_interval(&p, iv(0.0, 1.0), 1e-10).unwrap();
        assert!((y - 0.3).abs() < 1e-9);
    }

    #[test]
    fn argmin_invariant_under_positive_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let deg = rng.gen_range(1..=6);
            let coeffs: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = UniPoly::new(coeffs);
            if p.trimmed().is_zero() {
                continue;
            }
            let (y1, _) = argmin_on_interval(&p, iv(-1.0, 1.0), 1e-10).unwrap();
            for c in [1e-3, 1.0, 1e3] {
                let (y2, _) = argmin_on_interval(&p.scale(c), iv(-1.0, 1.0), 1e-10).unwrap();
                assert!((y1 - y2).abs() < 1e-7, "scale {c}: {y1} vs {y2}");
            }
        }
    }

    #[test]
    fn argmin_endpoint_when_no_interior_critical_point() {
        let p = UniPoly::new(vec![0.0, 2.0]); // 2y, decreasing toward a
        let (y, v) = argmin_on_interval(&p, iv(-1.0, 3.0), 1e-10).unwrap();
        assert_eq!(y, -1.0);
        assert_eq!(v, -2.0);

        let q = UniPoly::new(vec![0.0, -2.0]);
        let (y, _) = argmin_on_interval(&q, iv(-1.0, 3.0), 1e-10).unwrap();
        assert_eq!(y, 3.0);
    }

    #[test]
    fn box_integral_examples() {
        let b1 = BoxDomain::new(vec![iv(-1.0, 1.0)]).unwrap();
        assert_eq!(box_monomial_integral(&MultiIndex(vec![0]), &b1).unwrap(), 2.0);
        assert!((box_monomial_integral(&MultiIndex(vec![2]), &b1).unwrap() - 2.0 / 3.0).abs() < 1e-15);

        let b2 = BoxDomain::new(vec![iv(0.0, 1.0), iv(-1.0, 1.0)]).unwrap();
        let v = box_monomial_integral(&MultiIndex(vec![1, 2]), &b2).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    /// Tensor Gauss-Legendre oracle, exact for polynomial degree <= 11.
    fn quadrature_oracle(m: &MultiIndex, b: &BoxDomain) -> f64 {
        const NODES: [f64; 6] = [
            -0.932_469_514_203_152_1,
            -0.661_209_386_466_264_5,
            -0.238_619_186_083_196_9,
            0.238_619_186_083_196_9,
            0.661_209_386_466_264_5,
            0.932_469_514_203_152_1,
        ];
        const WEIGHTS: [f64; 6] = [
            0.171_324_492_379_170_4,
            0.360_761_573_048_138_6,
            0.467_913_934_572_691_0,
            0.467_913_934_572_691_0,
            0.360_761_573_048_138_6,
            0.171_324_492_379_170_4,
        ];
        fn rec(m: &MultiIndex, b: &BoxDomain, dim: usize, point: &mut Vec<f64>) -> f64 {
            if dim == b.dimension() {
                return point
                    .iter()
                    .zip(&m.0)
                    .map(|(&x, &e)| x.powi(e as i32))
                    .product();
            }
            let ivl = b.intervals()[dim];
            let half = 0.5 * ivl.length();
            let mid = 0.5 * (ivl.a + ivl.b);
            let mut acc = 0.0;
            for (&t, &w) in NODES.iter().zip(&WEIGHTS) {
                point.push(mid + half * t);
                acc += w * rec(m, b, dim + 1, point);
                point.pop();
            }
            acc * half
        }
        rec(m, b, 0, &mut Vec::new())
    }

    #[test]
    fn box_integral_matches_quadrature_on_random_monomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let n = rng.gen_range(1..=3usize);
            let exps: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=8u32)).collect();
            let intervals: Vec<Interval> = (0..n)
                .map(|_| {
                    let a = rng.gen_range(-1.5..0.0);
                    let b = rng.gen_range(0.1..1.5);
                    iv(a, b)
                })
                .collect();
            let b = BoxDomain::new(intervals).unwrap();
            let m = MultiIndex(exps);
            let exact = box_monomial_integral(&m, &b).unwrap();
            let oracle = quadrature_oracle(&m, &b);
            let denom = 1.0f64.max(exact.abs());
            assert!(
                ((exact - oracle) / denom).abs() < 1e-10,
                "monomial {:?} over {:?}: {exact} vs {oracle}",
                m,
                b
            );
        }
    }

    #[test]
    fn lukacs_constant_certificate() {
        let w0 = DMatrix::from_element(1, 1, 1.0);
        let w1 = DMatrix::zeros(0, 0);
        let q = lukacs_reconstruct(&w0, &w1, iv(-1.0, 1.0), 0).unwrap();
        assert_eq!(q.coeffs(), &[1.0]);
    }

    #[test]
    fn lukacs_degree_two_weight_poly() {
        let w0 = DMatrix::zeros(2, 2);
        let w1 = DMatrix::from_element(1, 1, 1.0);
        let q = lukacs_reconstruct(&w0, &w1, iv(-1.0, 1.0), 2).unwrap();
        assert_eq!(q.coeffs(), &[1.0, 0.0, -1.0]); // 1 - y^2
    }

    #[test]
    fn lukacs_psd_inputs_stay_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            // Random PSD: W = F F^T.
            let f0 = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let f1 = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
            let w0 = &f0 * f0.transpose();
            let w1 = &f1 * f1.transpose();
            let interval = iv(0.0, 1.0);
            let q = lukacs_reconstruct(&w0, &w1, interval, 4).unwrap();
            let scale = 1.0 + q.max_abs_coeff();
            let mut min = f64::INFINITY;
            for i in 0..=2000 {
                let y = interval.a + interval.length() * i as f64 / 2000.0;
                min = min.min(q.eval(y));
            }
            assert!(min >= -1e-9 * scale, "grid min {min}");
        }
    }

    #[test]
    fn lukacs_odd_degree_shape() {
        // D = 3: both Grams 2x2; q = sigma0 (y-a) + sigma1 (b-y).
        let w0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let w1 = DMatrix::zeros(2, 2);
        let q = lukacs_reconstruct(&w0, &w1, iv(0.0, 2.0), 3).unwrap();
        assert_eq!(q.coeffs(), &[0.0, 1.0, 0.0, 0.0]); // sigma0 = 1, q = y
    }

    #[test]
    fn lukacs_shape_mismatch_errors() {
        let w0 = DMatrix::zeros(2, 2);
        let w1 = DMatrix::zeros(2, 2);
        assert!(matches!(
            lukacs_reconstruct(&w0, &w1, iv(-1.0, 1.0), 4),
            Err(Error::GramShape(_))
        ));
    }
}
