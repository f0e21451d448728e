use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diffusion1d::{BoundaryBehavior, DiffusionSpec};
use crate::error::{Error, Result};
use crate::kmgroup::WeylVector;

/// Which interlacing space a two-level process lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShapeTag {
    /// `x_1 ≤ y_1 ≤ x_2 ≤ … ≤ y_n ≤ x_{n+1}`.
    NNplus1,
    /// `y_1 ≤ x_1 ≤ y_2 ≤ … ≤ y_n ≤ x_n`.
    NN,
    /// `y_1 ≤ x_1 ≤ … ≤ x_n ≤ y_{n+1}`. Built by analogy with the other two.
    Nplus1N,
}

impl fmt::Display for ShapeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeTag::NNplus1 => "n,n+1",
            ShapeTag::NN => "n,n",
            ShapeTag::Nplus1N => "n+1,n",
        })
    }
}

/// A shape tag together with `n`. X is the level carrying `L`-diffusions,
/// Y the autonomous level carrying conjugate diffusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InterlacingShape {
    pub tag: ShapeTag,
    pub n: usize,
}

fn allowed(b: BoundaryBehavior, absorbing_side: bool) -> bool {
    use BoundaryBehavior::*;
    if absorbing_side {
        matches!(b, Natural | Exit | RegularAbsorbing)
    } else {
        matches!(b, Natural | Entrance | RegularReflecting)
    }
}

impl InterlacingShape {
    pub fn new(tag: ShapeTag, n: usize) -> Self {
        Self { tag, n }
    }

    /// Parses `n,n+1`, `n,n` or `n+1,n` (also `nn1`, `nn`, `n1n`).
    pub fn parse(tag: &str, n: usize) -> Result<Self> {
        let tag = match tag.trim() {
            "n,n+1" | "nn1" => ShapeTag::NNplus1,
            "n,n" | "nn" => ShapeTag::NN,
            "n+1,n" | "n1n" => ShapeTag::Nplus1N,
            other => return Err(Error::Config(format!("unknown interlacing shape '{other}'"))),
        };
        Ok(Self::new(tag, n))
    }

    /// Number of X particles (`n₂`).
    pub fn x_len(&self) -> usize {
        match self.tag {
            ShapeTag::NNplus1 => self.n + 1,
            ShapeTag::NN | ShapeTag::Nplus1N => self.n,
        }
    }

    /// Number of Y particles (`n₁`).
    pub fn y_len(&self) -> usize {
        match self.tag {
            ShapeTag::NNplus1 | ShapeTag::NN => self.n,
            ShapeTag::Nplus1N => self.n + 1,
        }
    }

    /// Whether the shape is built by analogy only (no explicit formula to lean on).
    pub fn by_analogy(&self) -> bool {
        self.tag == ShapeTag::Nplus1N
    }

    /// The standing boundary assumptions on the `L`-diffusion.
    pub fn check_spec(&self, spec: &DiffusionSpec) -> Result<()> {
        let (abs_l, abs_r) = match self.tag {
            ShapeTag::NNplus1 => (false, false),
            ShapeTag::NN => (true, false),
            ShapeTag::Nplus1N => (true, true),
        };
        for (b, abs, side) in [(spec.behavior_l, abs_l, "l"), (spec.behavior_r, abs_r, "r")] {
            if !allowed(b, abs) {
                return Err(Error::BoundaryAssumption(format!(
                    "{}: {b} at {side} is not allowed for shape {}",
                    spec.name, self.tag
                )));
            }
        }
        Ok(())
    }

    /// The indicator in the B block: `1(j ≥ i)` for `n,n+1`, else `1(j > i)`.
    pub fn indicator(&self, i: usize, j: usize) -> bool {
        match self.tag {
            ShapeTag::NNplus1 => j >= i,
            ShapeTag::NN | ShapeTag::Nplus1N => j > i,
        }
    }

    /// Merged order of the two levels; `true` marks an X slot.
    fn pattern(&self) -> Vec<bool> {
        let (nx, ny) = (self.x_len(), self.y_len());
        let mut out = Vec::with_capacity(nx + ny);
        match self.tag {
            ShapeTag::NNplus1 => {
                for _ in 0..ny {
                    out.extend([true, false]);
                }
                out.push(true);
            }
            ShapeTag::NN => {
                for _ in 0..nx {
                    out.extend([false, true]);
                }
            }
            ShapeTag::Nplus1N => {
                for _ in 0..nx {
                    out.extend([false, true]);
                }
                out.push(false);
            }
        }
        out
    }

    /// Weak interlacing of `x` and `y` (lengths included).
    pub fn interlaces(&self, x: &[f64], y: &[f64]) -> bool {
        if x.len() != self.x_len() || y.len() != self.y_len() {
            return false;
        }
        let (mut i, mut j) = (0, 0);
        let mut prev = f64::NEG_INFINITY;
        for is_x in self.pattern() {
            let v = if is_x {
                i += 1;
                x[i - 1]
            } else {
                j += 1;
                y[j - 1]
            };
            if v < prev {
                return false;
            }
            prev = v;
        }
        true
    }

    /// `W^{n₁,n₂}(x)` as a box: the interval of each `y_i` given `x`.
    pub fn fiber(&self, x: &[f64], l: f64, r: f64) -> Vec<(f64, f64)> {
        let ny = self.y_len();
        (0..ny)
            .map(|i| match self.tag {
                ShapeTag::NNplus1 => (x[i], x[i + 1]),
                ShapeTag::NN | ShapeTag::Nplus1N => {
                    let lo = if i == 0 { l } else { x[i - 1] };
                    let hi = if i < x.len() { x[i] } else { r };
                    (lo, hi)
                }
            })
            .collect()
    }

    /// The box of each `x_j` given `y`.
    pub fn cofiber(&self, y: &[f64], l: f64, r: f64) -> Vec<(f64, f64)> {
        let nx = self.x_len();
        (0..nx)
            .map(|j| match self.tag {
                ShapeTag::NNplus1 => {
                    let lo = if j == 0 { l } else { y[j - 1] };
                    let hi = if j < y.len() { y[j] } else { r };
                    (lo, hi)
                }
                ShapeTag::NN => (y[j], if j + 1 < y.len() { y[j + 1] } else { r }),
                ShapeTag::Nplus1N => (y[j], y[j + 1]),
            })
            .collect()
    }
}

impl fmt::Display for InterlacingShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n = {})", self.tag, self.n)
    }
}

/// A point `(x, y)` of an interlacing space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingConfig {
    pub shape: InterlacingShape,
    pub x: WeylVector,
    pub y: WeylVector,
}

impl InterlacingConfig {
    pub fn new(shape: InterlacingShape, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let x = WeylVector::new(x)?;
        let y = WeylVector::new(y)?;
        if !shape.interlaces(&x, &y) {
            return Err(Error::Domain(format!("x = {:?}, y = {:?} do not interlace as {shape}", &*x, &*y)));
        }
        Ok(Self { shape, x, y })
    }

    /// Also requires all coordinates inside `(l, r)`.
    pub fn interior(shape: InterlacingShape, x: Vec<f64>, y: Vec<f64>, l: f64, r: f64) -> Result<Self> {
        let c = Self::new(shape, x, y)?;
        if !(c.x.is_interior(l, r) && c.y.is_interior(l, r)) {
            return Err(Error::Domain(format!("configuration {:?}/{:?} not inside ({l}, {r})", &*c.x, &*c.y)));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interlacing_orders() {
        let s = InterlacingShape::new(ShapeTag::NNplus1, 1);
        assert!(s.interlaces(&[-1.0, 1.0], &[0.0]));
        assert!(!s.interlaces(&[-1.0, 1.0], &[2.0]));
        let s = InterlacingShape::new(ShapeTag::NN, 2);
        assert!(s.interlaces(&[1.0, 3.0], &[0.5, 2.0]));
        assert!(!s.interlaces(&[1.0, 3.0], &[1.5, 2.0]));
        let s = InterlacingShape::new(ShapeTag::Nplus1N, 1);
        assert!(s.interlaces(&[1.0], &[0.0, 2.0]));
        assert!(!s.interlaces(&[1.0], &[0.0, 0.5]));
    }

    #[test]
    fn fibers_and_cofibers_are_boxes() {
        let s = InterlacingShape::new(ShapeTag::NNplus1, 2);
        assert_eq!(s.fiber(&[0.0, 1.0, 3.0], f64::NEG_INFINITY, f64::INFINITY), vec![(0.0, 1.0), (1.0, 3.0)]);
        assert_eq!(s.cofiber(&[0.5, 2.0], 0.0, 9.0), vec![(0.0, 0.5), (0.5, 2.0), (2.0, 9.0)]);
        let s = InterlacingShape::new(ShapeTag::NN, 2);
        assert_eq!(s.fiber(&[1.0, 3.0], 0.0, 9.0), vec![(0.0, 1.0), (1.0, 3.0)]);
        assert_eq!(s.cofiber(&[0.5, 2.0], 0.0, 9.0), vec![(0.5, 2.0), (2.0, 9.0)]);
        let s = InterlacingShape::new(ShapeTag::Nplus1N, 1);
        assert_eq!(s.fiber(&[1.0], 0.0, 9.0), vec![(0.0, 1.0), (1.0, 9.0)]);
        assert_eq!(s.cofiber(&[0.5, 2.0], 0.0, 9.0), vec![(0.5, 2.0)]);
    }
}
