use std::collections::BTreeSet;

use embed_linalg::{is_markov, Mat, Tolerances};
use serde::{Deserialize, Serialize};

use crate::equal_input::recognize_equal_input;
use crate::k3st::K3STParams;
use crate::tn::TNParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelTag {
    EqualInput,
    ConstantInput,
    Tn,
    Hky,
    K3st,
    K2p,
}

fn eps(tol: &Tolerances) -> f64 {
    10.0 * tol.rowsum
}

/// `κ` from the pair `(m_uv, m_vu) = (b·κ, a·κ)` given the base rates
/// `(a, b)`. `Ok(None)` when `a = b = 0` leaves `κ` free.
fn kappa(m_uv: f64, m_vu: f64, a: f64, b: f64, e: f64) -> Result<Option<f64>, ()> {
    match (a > e, b > e) {
        (false, false) if m_uv.abs() <= e && m_vu.abs() <= e => Ok(None),
        (false, false) => Err(()),
        _ => {
            let k = (m_uv + m_vu) / (a + b);
            if (m_uv - b * k).abs() <= e && (m_vu - a * k).abs() <= e {
                Ok(Some(k.max(0.0)))
            } else {
                Err(())
            }
        }
    }
}

/// Tamura–Nei parameters read off a 4-state Markov matrix. A free `κ` (both
/// base rates in its group zero) is reported as the other group's `κ`, or 1.
pub fn recognize_tn(m: &Mat, tol: &Tolerances) -> Option<TNParams> {
    let (k1, k2) = tn_kappas(m, tol)?;
    let a = tn_rates(m);
    let (kappa1, kappa2) = match (k1, k2) {
        (Some(u), Some(v)) => (u, v),
        (Some(u), None) => (u, u),
        (None, Some(v)) => (v, v),
        (None, None) => (1.0, 1.0),
    };
    Some(TNParams { a, kappa1, kappa2 })
}

fn tn_rates(m: &Mat) -> [f64; 4] {
    let avg = |x: f64, y: f64| ((x + y) / 2.0).max(0.0);
    [avg(m[(2, 0)], m[(3, 0)]), avg(m[(2, 1)], m[(3, 1)]), avg(m[(0, 2)], m[(1, 2)]), avg(m[(0, 3)], m[(1, 3)])]
}

type Kappas = (Option<f64>, Option<f64>);

fn tn_kappas(m: &Mat, tol: &Tolerances) -> Option<Kappas> {
    if m.dim() != 4 || !is_markov(m, tol) {
        return None;
    }
    let e = eps(tol);
    let tied = |x: (usize, usize), y: (usize, usize)| (m[x] - m[y]).abs() <= e;
    if !(tied((2, 0), (3, 0)) && tied((2, 1), (3, 1)) && tied((0, 2), (1, 2)) && tied((0, 3), (1, 3))) {
        return None;
    }
    let [a1, a2, a3, a4] = tn_rates(m);
    let k1 = kappa(m[(0, 1)], m[(1, 0)], a1, a2, e).ok()?;
    let k2 = kappa(m[(2, 3)], m[(3, 2)], a3, a4, e).ok()?;
    Some((k1, k2))
}

/// Kimura 3ST parameters of a 4-state Markov matrix.
pub fn recognize_k3st(m: &Mat, tol: &Tolerances) -> Option<K3STParams> {
    if m.dim() != 4 || !is_markov(m, tol) {
        return None;
    }
    let e = eps(tol);
    let group = |cells: [(usize, usize); 4]| {
        let vals = cells.map(|c| m[c]);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo <= e).then(|| (vals.iter().sum::<f64>() / 4.0).max(0.0))
    };
    Some(K3STParams {
        x: group([(0, 1), (1, 0), (2, 3), (3, 2)])?,
        y: group([(0, 2), (2, 0), (1, 3), (3, 1)])?,
        z: group([(0, 3), (3, 0), (1, 2), (2, 1)])?,
    })
}

/// Every model class the Markov matrix belongs to, in the `(A, G, C, T)`
/// order. Non-Markov input matches nothing.
pub fn model_recognize(m: &Mat, tol: &Tolerances) -> BTreeSet<ModelTag> {
    let mut tags = BTreeSet::new();
    if !is_markov(m, tol) {
        return tags;
    }
    let e = eps(tol);
    if let Some(p) = recognize_equal_input(m, tol) {
        tags.insert(ModelTag::EqualInput);
        if p.c_vec.iter().all(|c| (c - p.c_vec[0]).abs() <= e) {
            tags.insert(ModelTag::ConstantInput);
        }
    }
    if let Some((k1, k2)) = tn_kappas(m, tol) {
        tags.insert(ModelTag::Tn);
        let same = match (k1, k2) {
            (Some(u), Some(v)) => (u - v).abs() <= e * (1.0 + u.abs().max(v.abs())) || agree(m, e),
            _ => true,
        };
        if same {
            tags.insert(ModelTag::Hky);
        }
    }
    if let Some(p) = recognize_k3st(m, tol) {
        tags.insert(ModelTag::K3st);
        if (p.y - p.z).abs() <= e {
            tags.insert(ModelTag::K2p);
        }
    }
    tags
}

/// Cross-multiplied `κ₁ = κ₂`, for when a base-rate sum is tiny:
/// `(m₀₁ + m₁₀)(a₃ + a₄) = (m₂₃ + m₃₂)(a₁ + a₂)`.
fn agree(m: &Mat, e: f64) -> bool {
    let [a1, a2, a3, a4] = tn_rates(m);
    ((m[(0, 1)] + m[(1, 0)]) * (a3 + a4) - (m[(2, 3)] + m[(3, 2)]) * (a1 + a2)).abs() <= e
}
