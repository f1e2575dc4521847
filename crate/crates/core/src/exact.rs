//! Closed-form argmin models: exact constructions for polynomials,
//! algebraic functions and piecewise polynomials. These double as ground
//! truth oracles for the data-driven fit.

use crate::error::{Error, Result};
use crate::polys::{argmin_on_interval, restrict_to_y, Interval, MVPoly, UniPoly};

/// Default evaluation bracket for models whose argmin ranges over the whole
/// line. The piecewise construction is coercive, so a finite bracket
/// suffices once data are range-normalized.
pub const DEFAULT_BRACKET: Interval = Interval { a: -5.0, b: 5.0 };

/// The set over which the inner minimization runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelRange {
    /// Minimize over a compact interval `[a, b]`.
    Interval(Interval),
    /// Minimize over the whole line, searched numerically on a bracket.
    WholeLine { bracket: Interval },
}

impl ModelRange {
    pub fn whole_line() -> Self {
        ModelRange::WholeLine { bracket: DEFAULT_BRACKET }
    }

    pub fn search_interval(&self) -> Interval {
        match self {
            ModelRange::Interval(iv) => *iv,
            ModelRange::WholeLine { bracket } => *bracket,
        }
    }
}

/// A polynomial argmin model: `p(x, y) = sum_{k=1..d_y} h_k(x) y^k`, with
/// predictions given by the smallest minimizer of `p(x, .)` over the range.
#[derive(Debug, Clone)]
pub struct ArgminModel {
    h: Vec<MVPoly>,
    range: ModelRange,
    n: usize,
}

impl ArgminModel {
    pub fn new(h: Vec<MVPoly>, range: ModelRange) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidParams("model needs d_y >= 1".into()));
        }
        let n = h[0].dimension();
        for hk in &h {
            if hk.dimension() != n {
                return Err(Error::DimensionMismatch { expected: n, got: hk.dimension() });
            }
        }
        Ok(ArgminModel { h, range, n })
    }

    /// Coefficient polynomials `h_1 .. h_{d_y}` of the powers of `y`.
    pub fn h(&self) -> &[MVPoly] {
        &self.h
    }

    pub fn range(&self) -> ModelRange {
        self.range
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree_in_y(&self) -> usize {
        self.h.len()
    }

    /// The section `y -> p(x, y)` at a fixed `x`.
    pub fn section(&self, x: &[f64]) -> Result<UniPoly> {
        restrict_to_y(&self.h, x)
    }

    /// Smallest minimizer of `p(x, .)` over the model range.
    pub fn predict(&self, x: &[f64], tol: f64) -> Result<f64> {
        let section = self.section(x)?;
        let (y, _) = argmin_on_interval(&section, self.range.search_interval(), tol)?;
        Ok(y)
    }
}

/// Inputs of the piecewise-polynomial construction: the target equals
/// `p1` where `g` lies in `(0, 1)` and `p2` where `g` lies in `(-1, 0)`.
#[derive(Debug, Clone)]
pub struct PiecewiseSpec {
    pub g: MVPoly,
    pub p1: MVPoly,
    pub p2: MVPoly,
}

impl PiecewiseSpec {
    pub fn new(g: MVPoly, p1: MVPoly, p2: MVPoly) -> Result<Self> {
        let n = g.dimension();
        if p1.dimension() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p1.dimension() });
        }
        if p2.dimension() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p2.dimension() });
        }
        Ok(PiecewiseSpec { g, p1, p2 })
    }

    /// Value of the piecewise target, when `g(x)` lies in the valid bands.
    pub fn target_value(&self, x: &[f64]) -> Result<Option<f64>> {
        let g = self.g.eval(x)?;
        if g > 0.0 && g < 1.0 {
            Ok(Some(self.p1.eval(x)?))
        } else if g > -1.0 && g < 0.0 {
            Ok(Some(self.p2.eval(x)?))
        } else {
            Ok(None)
        }
    }
}

/// Split a polynomial in `(x_1..x_n, y)` into the coefficient polynomials of
/// `y^1 .. y^{d_y}`, dropping monomials free of `y` (they do not influence
/// the argmin).
pub fn split_by_y(p: &MVPoly) -> Result<Vec<MVPoly>> {
    let total_vars = p.dimension();
    if total_vars < 2 {
        return Err(Error::InvalidParams("need at least one x variable plus y".into()));
    }
    let n = total_vars - 1;
    let mut d_y = 0u32;
    for (mi, &c) in p.basis().indices().iter().zip(p.coeffs()) {
        if c != 0.0 {
            d_y = d_y.max(mi.0[n]);
        }
    }
    if d_y == 0 {
        return Err(Error::InvalidParams("polynomial has no y-dependent terms".into()));
    }
    let d_x = p.basis().max_degree();
    let h: Vec<MVPoly> = (0..d_y).map(|_| MVPoly::zero(n, d_x)).collect();
    let mut out_coeffs: Vec<Vec<f64>> = h.iter().map(|hk| hk.coeffs().to_vec()).collect();
    for (mi, &c) in p.basis().indices().iter().zip(p.coeffs()) {
        if c == 0.0 {
            continue;
        }
        let k = mi.0[n] as usize;
        if k == 0 {
            continue;
        }
        let x_part = &mi.0[..n];
        let pos = h[k - 1]
            .basis()
            .position(x_part)
            .expect("x-part stays within total degree");
        out_coeffs[k - 1][pos] += c;
    }
    h.iter()
        .zip(out_coeffs)
        .map(|(hk, coeffs)| MVPoly::new(hk.basis().clone(), coeffs))
        .collect()
}

/// Exact model of a polynomial target: `p(x, y) = y^2 / 2 - f(x) y`, whose
/// unique minimizer in `y` is `f(x)`.
pub fn model_of_polynomial(f: &MVPoly, range: ModelRange) -> Result<ArgminModel> {
    let n = f.dimension();
    let h1 = f.scale(-1.0);
    let h2 = MVPoly::constant(n, 0.5);
    ArgminModel::new(vec![h1, h2], range)
}

/// Exact model of an algebraic function with defining polynomials `q_k` in
/// `(x, y)`: `p = sum_k q_k^2` vanishes exactly on the common zero set.
pub fn model_of_algebraic(qs: &[MVPoly], range: ModelRange) -> Result<ArgminModel> {
    if qs.is_empty() {
        return Err(Error::InvalidParams("need at least one defining polynomial".into()));
    }
    let vars = qs[0].dimension();
    let mut p = MVPoly::zero(vars, 0);
    for q in qs {
        if q.dimension() != vars {
            return Err(Error::DimensionMismatch { expected: vars, got: q.dimension() });
        }
        p = p.add(&q.mul(q)?)?;
    }
    ArgminModel::new(split_by_y(&p)?, range)
}

/// Exact model of a piecewise polynomial via the coercive quartic
/// `p = (y - p1)^2 (y - p2)^2 + r q` with `r = g (p1 - p2)` and
/// `q = 2 y^3 - 3 (p1 + p2) y^2 + 6 p1 p2 y`. The result minimizes at
/// `p1(x)` for `g(x)` in `(0, 1)` and at `p2(x)` for `g(x)` in `(-1, 0)`.
pub fn model_of_piecewise(spec: &PiecewiseSpec) -> Result<ArgminModel> {
    let n = spec.g.dimension();
    let vars = n + 1;
    let y = MVPoly::variable(vars, n);
    let lift = |p: &MVPoly| lift_to_xy(p);
    let p1 = lift(&spec.p1)?;
    let p2 = lift(&spec.p2)?;
    let g = lift(&spec.g)?;

    let y_minus_p1 = y.sub(&p1)?;
    let y_minus_p2 = y.sub(&p2)?;
    let quartic = y_minus_p1.mul(&y_minus_p1)?.mul(&y_minus_p2.mul(&y_minus_p2)?)?;

    let r = g.mul(&p1.sub(&p2)?)?;
    let q = y
        .powi(3)?
        .scale(2.0)
        .add(&p1.add(&p2)?.mul(&y.mul(&y)?)?.scale(-3.0))?
        .add(&p1.mul(&p2)?.mul(&y)?.scale(6.0))?;

    let p = quartic.add(&r.mul(&q)?)?;
    ArgminModel::new(split_by_y(&p)?, ModelRange::whole_line())
}

/// Embed an `n`-variable polynomial into `n + 1` variables (appending `y`).
fn lift_to_xy(p: &MVPoly) -> Result<MVPoly> {
    let n = p.dimension();
    let d = p.basis().max_degree();
    let out = MVPoly::zero(n + 1, d);
    let mut coeffs = out.coeffs().to_vec();
    for (mi, &c) in p.basis().indices().iter().zip(p.coeffs()) {
        if c == 0.0 {
            continue;
        }
        let mut exps = mi.0.clone();
        exps.push(0);
        let pos = out.basis().position(&exps).expect("lift preserves degree");
        coeffs[pos] = c;
    }
    MVPoly::new(out.basis().clone(), coeffs)
}

/// Test oracle: grid scan of `p(x, .)` over the search interval, golden
/// section refinement of the best cells, smallest minimizer among ties.
pub fn brute_force_argmin(model: &ArgminModel, x: &[f64], grid: usize) -> Result<f64> {
    let grid = grid.max(1000);
    let section = model.section(x)?;
    let interval = model.range().search_interval();
    let step = interval.length() / grid as f64;

    let values: Vec<f64> = (0..=grid).map(|i| section.eval(interval.a + step * i as f64)).collect();
    let v_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tie_tol = 1e-9 * (1.0 + v_min.abs());

    let mut best_y = f64::INFINITY;
    let mut best_v = f64::INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > v_min + tie_tol {
            continue;
        }
        let lo = interval.a + step * i.saturating_sub(1) as f64;
        let hi = (interval.a + step * (i + 1) as f64).min(interval.b);
        let (y, v) = golden_section(&section, lo, hi, 1e-9);
        if v < best_v - tie_tol || (v <= best_v + tie_tol && y < best_y) {
            best_v = best_v.min(v);
            best_y = y;
        }
    }
    Ok(best_y)
}

fn golden_section(p: &UniPoly, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = p.eval(c);
    let mut fd = p.eval(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = p.eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = p.eval(d);
        }
    }
    let y = 0.5 * (lo + hi);
    (y, p.eval(y))
}
