use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One coordinate factor of a separable test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Factor {
    One,
    Linear,
    Gauss { center: f64, width: f64 },
}

impl Factor {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Factor::One => 1.0,
            Factor::Linear => u,
            Factor::Gauss { center, width } => {
                let z = (u - center) / width;
                (-0.5 * z * z).exp()
            }
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Factor::One)
    }
}

/// `coef · Π_j φ_j(x_j) · Π_i ψ_i(y_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub x: Vec<Factor>,
    pub y: Vec<Factor>,
}

impl Term {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let px: f64 = self.x.iter().zip(x).map(|(f, &u)| f.eval(u)).product();
        let py: f64 = self.y.iter().zip(y).map(|(f, &u)| f.eval(u)).product();
        self.coef * px * py
    }

    pub fn eval_y(&self, y: &[f64]) -> f64 {
        self.coef * self.y.iter().zip(y).map(|(f, &u)| f.eval(u)).product::<f64>()
    }
}

/// Finite sum of separable terms on `W^{n₁,n₂}`.
///
/// Separability lets the x′ integration of a block determinant be done
/// column by column: each column depends on one coordinate only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub nx: usize,
    pub ny: usize,
    pub terms: Vec<Term>,
}

impl TestFunction {
    pub fn one(nx: usize, ny: usize) -> Self {
        Self { nx, ny, terms: vec![Term { coef: 1.0, x: vec![Factor::One; nx], y: vec![Factor::One; ny] }] }
    }

    fn unit(nx: usize, ny: usize, on_x: bool, k: usize, f: Factor) -> Term {
        let mut t = Term { coef: 1.0, x: vec![Factor::One; nx], y: vec![Factor::One; ny] };
        if on_x {
            t.x[k] = f;
        } else {
            t.y[k] = f;
        }
        t
    }

    /// `Σ_j x_j`.
    pub fn x_sum(nx: usize, ny: usize) -> Self {
        Self { nx, ny, terms: (0..nx).map(|k| Self::unit(nx, ny, true, k, Factor::Linear)).collect() }
    }

    /// `Σ_i y_i`.
    pub fn y_sum(nx: usize, ny: usize) -> Self {
        Self { nx, ny, terms: (0..ny).map(|k| Self::unit(nx, ny, false, k, Factor::Linear)).collect() }
    }

    /// `Π_j g(x_j − cx_j) Π_i g(y_i − cy_i)` with a Gaussian `g` of the given width.
    pub fn gauss_bump(cx: &[f64], cy: &[f64], width: f64) -> Self {
        let g = |c: f64| Factor::Gauss { center: c, width };
        Self {
            nx: cx.len(),
            ny: cy.len(),
            terms: vec![Term { coef: 1.0, x: cx.iter().map(|&c| g(c)).collect(), y: cy.iter().map(|&c| g(c)).collect() }],
        }
    }

    /// Function of the Y level only, `Π_i g(y_i − c_i)`.
    pub fn y_bump(nx: usize, cy: &[f64], width: f64) -> Self {
        let mut f = Self::gauss_bump(&[], cy, width);
        f.nx = nx;
        f.terms[0].x = vec![Factor::One; nx];
        f
    }

    /// Parses `one`, `xsum`, `ysum`, `sum` (both levels), `bump:w` (bump
    /// centered at the given point) against a reference point.
    pub fn from_id(id: &str, x: &[f64], y: &[f64]) -> Result<Self> {
        let (nx, ny) = (x.len(), y.len());
        match id.split_once(':') {
            None => match id {
                "one" => Ok(Self::one(nx, ny)),
                "xsum" => Ok(Self::x_sum(nx, ny)),
                "ysum" => Ok(Self::y_sum(nx, ny)),
                "sum" => {
                    let mut f = Self::x_sum(nx, ny);
                    f.terms.extend(Self::y_sum(nx, ny).terms);
                    Ok(f)
                }
                _ => Err(Error::Config(format!("unknown test function '{id}'"))),
            },
            Some(("bump", w)) => {
                let w: f64 = w.parse().map_err(|_| Error::Config(format!("bad bump width in '{id}'")))?;
                if !(w > 0.0) {
                    return Err(Error::Config(format!("bump width must be positive in '{id}'")));
                }
                Ok(Self::gauss_bump(x, y, w))
            }
            _ => Err(Error::Config(format!("unknown test function '{id}'"))),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x, y)).sum()
    }

    /// No term depends on the X level.
    pub fn y_only(&self) -> bool {
        self.terms.iter().all(|t| t.x.iter().all(Factor::is_one))
    }

    pub fn eval_y(&self, y: &[f64]) -> f64 {
        debug_assert!(self.y_only());
        self.terms.iter().map(|t| t.eval_y(y)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_evaluates() {
        let x = [1.0, 2.0];
        let y = [1.5];
        assert_eq!(TestFunction::one(2, 1).eval(&x, &y), 1.0);
        assert_eq!(TestFunction::x_sum(2, 1).eval(&x, &y), 3.0);
        assert_eq!(TestFunction::from_id("sum", &x, &y).unwrap().eval(&x, &y), 4.5);
        assert_eq!(TestFunction::from_id("bump:0.5", &x, &y).unwrap().eval(&x, &y), 1.0);
        assert!(TestFunction::y_bump(2, &[0.0], 1.0).y_only());
        assert!(!TestFunction::x_sum(2, 1).y_only());
    }
}
