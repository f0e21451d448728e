use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

use super::spec::{BoundaryClass, DiffusionSpec, Endpoint};

/// Finiteness verdict for one of the Feller integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Finiteness {
    Finite(f64),
    Infinite,
    /// Neither rule fired; carries the last partial value.
    Undetermined(f64),
}

impl Finiteness {
    pub fn value(self) -> f64 {
        match self {
            Finiteness::Finite(v) | Finiteness::Undetermined(v) => v,
            Finiteness::Infinite => f64::INFINITY,
        }
    }
}

/// Both Feller integrals at one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub endpoint: Endpoint,
    pub n: Finiteness,
    pub sigma: Finiteness,
}

const CAP: f64 = 1e8;
const MAX_INFINITE_DECADES: i32 = 16;

/// Points `y_0 = c, y_1, …` approaching the endpoint geometrically.
fn decade_points(spec: &DiffusionSpec, e: Endpoint) -> Vec<f64> {
    let c = spec.c;
    let end = spec.endpoint(e);
    let mut pts = vec![c];
    if end.is_finite() {
        let gap = (c - end).abs();
        // Representable offsets from the endpoint itself, not from c.
        let floor = (end.abs() * 4.0 * f64::EPSILON).max(f64::MIN_POSITIVE * 1e20);
        for k in 1..400 {
            let d = gap * 10f64.powi(-k);
            if d < floor {
                break;
            }
            pts.push(if e == Endpoint::Left { end + d } else { end - d });
        }
    } else {
        for k in 1..=MAX_INFINITE_DECADES {
            let d = 10f64.powi(k) - 1.0;
            pts.push(if e == Endpoint::Left { c - d } else { c + d });
        }
    }
    pts
}

/// `φ(u) − φ(v)` with `φ = ln s′`, i.e. `∫_u^v b/a`.
fn phi_diff(spec: &DiffusionSpec, u: f64, v: f64) -> f64 {
    match spec.log_scale_closed() {
        Some(ls) => ls(u) - ls(v),
        None => {
            let (lo, hi, sign) = if u < v { (u, v, 1.0) } else { (v, u, -1.0) };
            let r = quad::adaptive(|w| spec.b(w) / spec.a(w), lo, hi, 1e-14, 1e-12, 2000);
            if r.converged { sign * r.value } else { f64::NAN }
        }
    }
}

/// Integral over `[lo, hi]` split geometrically towards both ends, so that
/// a boundary layer of width `~1/y` on a decade-long interval is resolved.
fn graded(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    if !(w > 0.0) {
        return 0.0;
    }
    let mut cuts = vec![lo, hi];
    let mut h = 0.25 * w;
    while h > 1e-13 * w.max(lo.abs()).max(hi.abs()) {
        cuts.push(lo + h);
        cuts.push(hi - h);
        h *= 0.25;
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|c| quad::adaptive(&mut f, c[0], c[1], 0.0, 1e-10, 50).value).sum()
}

#[derive(Clone, Copy, PartialEq)]
enum Which {
    N,
    Sigma,
}

/// Decide finiteness of N or Σ by geometric refinement towards the endpoint.
///
/// N = ∫ I(y)/a(y) dy with I(y) = ∫_c^y e^{φ(u)−φ(y)} du (oriented towards the
/// endpoint); Σ = ∫ J(y) dy with J(y) = ∫_c^y e^{φ(y)−φ(u)}/a(u) du. Both
/// forms avoid the overflow of s and M near singular endpoints.
fn feller_integral(spec: &DiffusionSpec, e: Endpoint, which: Which) -> Finiteness {
    let pts = decade_points(spec, e);
    let local = |yk: f64, y: f64| -> f64 {
        let (lo, hi) = if yk < y { (yk, y) } else { (y, yk) };
        graded(
            |u| match which {
                Which::N => phi_diff(spec, u, y).exp(),
                Which::Sigma => phi_diff(spec, y, u).exp() / spec.a(u),
            },
            lo,
            hi,
        )
    };
    // Value of the inner integral at the decade points.
    let mut inner_k = 0.0f64;
    let mut partial = 0.0f64;
    let mut prev_inc: Option<f64> = None;
    let mut steady = 0;
    for w in pts.windows(2) {
        let (yk, yk1) = (w[0], w[1]);
        let carry = |y: f64| -> f64 {
            let f = match which {
                Which::N => phi_diff(spec, yk, y).exp(),
                Which::Sigma => phi_diff(spec, y, yk).exp(),
            };
            if inner_k == 0.0 { 0.0 } else { f * inner_k }
        };
        let inner = |y: f64| local(yk, y) + carry(y);
        let (lo, hi) = if yk < yk1 { (yk, yk1) } else { (yk1, yk) };
        let piece = quad::adaptive(
            |y| match which {
                Which::N => inner(y) / spec.a(y),
                Which::Sigma => inner(y),
            },
            lo,
            hi,
            0.0,
            1e-7,
            200,
        );
        let inc = piece.value;
        inner_k = inner(yk1);
        if !inc.is_finite() || !inner_k.is_finite() {
            return Finiteness::Infinite;
        }
        let before = partial;
        partial += inc;
        if !partial.is_finite() {
            return Finiteness::Infinite;
        }
        if partial > CAP && inc >= 0.01 * before {
            return Finiteness::Infinite;
        }
        if let Some(p) = prev_inc {
            let ratio = if p > 0.0 { inc / p } else { f64::INFINITY };
            if inc > 1e-10 * partial && ratio >= 0.99 {
                steady += 1;
                if steady >= 3 {
                    return Finiteness::Infinite;
                }
            } else {
                steady = 0;
            }
            if ratio < 0.9 {
                let tail = inc * ratio / (1.0 - ratio);
                if tail <= 1e-10 * partial || partial == 0.0 {
                    return Finiteness::Finite(partial);
                }
            }
        }
        prev_inc = Some(inc);
    }
    Finiteness::Undetermined(partial)
}

/// Both Feller integrals at an endpoint.
pub fn boundary_report(spec: &DiffusionSpec, e: Endpoint) -> BoundaryReport {
    BoundaryReport { endpoint: e, n: feller_integral(spec, e, Which::N), sigma: feller_integral(spec, e, Which::Sigma) }
}

/// Feller classification of an endpoint from the finiteness of N and Σ.
pub fn classify_boundary(spec: &DiffusionSpec, e: Endpoint) -> Result<BoundaryClass> {
    let rep = boundary_report(spec, e);
    let fin = |f: Finiteness| match f {
        Finiteness::Finite(_) => Some(true),
        Finiteness::Infinite => Some(false),
        Finiteness::Undetermined(_) => None,
    };
    match (fin(rep.n), fin(rep.sigma)) {
        (Some(true), Some(true)) => Ok(BoundaryClass::Regular),
        (Some(true), Some(false)) => Ok(BoundaryClass::Entrance),
        (Some(false), Some(true)) => Ok(BoundaryClass::Exit),
        (Some(false), Some(false)) => Ok(BoundaryClass::Natural),
        _ => Err(Error::Inconclusive { endpoint: e.to_string(), n: rep.n.value(), sigma: rep.sigma.value() }),
    }
}

/// Check the behaviour tags of `spec` against the computed classes.
pub fn check_behaviors(spec: &DiffusionSpec) -> Result<()> {
    for e in [Endpoint::Left, Endpoint::Right] {
        let class = classify_boundary(spec, e)?;
        let tag = spec.behavior(e);
        if tag.class() != class {
            return Err(Error::BoundaryAssumption(format!(
                "{}: endpoint {e} tagged {tag} but classified {class}",
                spec.name
            )));
        }
    }
    Ok(())
}
