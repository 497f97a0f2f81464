//! Search over the real logarithms of a repeated, semisimple real eigenvalue.
//!
//! With `M = T (B ⊕ λ1₂) T⁻¹`, every real logarithm that rotates the `λ`
//! eigenspace has the form
//!
//! ```text
//! R(x, y, z) = T (F ⊕ (L·1₂ + θ·I)) T⁻¹,   I = [[x, −z], [y, −x]],   yz − x² = 1,
//! ```
//!
//! where `F = log B`, `L = log|λ|` and `θ` is `2πk` (λ > 0) or `(2k+1)π`
//! (λ < 0). `R` is affine in `(x, y, z)`. Writing `u = (y+z)/2`,
//! `v = (z−y)/2` turns the hyperbola into the sheet `u² − v² − x² = 1`,
//! and `n = (v, x, 1)/u` maps that sheet onto the open upper unit
//! hemisphere. Each off-diagonal entry of `R` divided by `u` is then an
//! affine function `g(n) = a·n + b`, so the constraints are Lipschitz on the
//! closed hemisphere and a branch-and-bound over spherical cells can either
//! find a feasible point or certify that none exists.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use embed_linalg::{real_jordan, LinalgError, Mat, RealBlock, RealJordanDecomposition, Tolerances};
use serde::{Deserialize, Serialize};

use crate::smt::{wedge, WEDGE_SLACK};
use crate::{certify, Construction, EmbedError, GeneratorCandidate};

/// A point on the hyperbola `yz − x² = 1` with `z > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolaPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HyperbolaPoint {
    /// Point for the hemisphere direction `n` (requires `n[2] > 0`).
    fn from_direction(n: [f64; 3]) -> Self {
        let x = n[1] / n[2];
        let z = (1.0 + n[0]) / n[2];
        HyperbolaPoint { x, y: (1.0 + x * x) / z, z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStatus {
    Found,
    /// No point on the hyperbola gives a generator.
    Infeasible,
    /// The evaluation budget ran out before either answer was reached.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    pub point: Option<HyperbolaPoint>,
    pub evaluations: usize,
}

const BASE_GRID: usize = 200;
const BUDGET: usize = 400_000;

/// Admissible branches `(k, θ)` for a repeated real eigenvalue `λ` of a
/// `d`-state matrix: `θ = 2πk` for `λ > 0`, `θ = (2k+1)π` for `λ < 0`, with
/// `|θ| ≤ |log|λ|| · cot(π/d)` so that `L ± iθ` can be generator eigenvalues.
pub fn angle_range(lambda: f64, d: usize) -> Vec<(i64, f64)> {
    let w = lambda.abs().ln().abs() * wedge(d) * (1.0 + WEDGE_SLACK);
    let kmax = (w / (2.0 * PI)).floor() as i64 + 1;
    (-kmax - 1..=kmax)
        .map(|k| {
            let th = if lambda > 0.0 { 2.0 * PI * k as f64 } else { (2 * k + 1) as f64 * PI };
            (k, th)
        })
        .filter(|(_, th)| th.abs() <= w)
        .collect()
}

fn block_sum(fixed: &Mat, tail: [[f64; 2]; 2]) -> Mat {
    let d = fixed.dim() + 2;
    let f = fixed.dim();
    Mat::from_fn(d, |i, j| {
        if i < f && j < f {
            fixed[(i, j)]
        } else if i >= f && j >= f {
            tail[i - f][j - f]
        } else {
            0.0
        }
    })
}

struct Frame {
    r0: Mat,
    ex: Mat,
    ey: Mat,
    ez: Mat,
}

impl Frame {
    fn new(t: &Mat, fixed: &Mat, log_modulus: f64, angle: f64) -> Result<Self, EmbedError> {
        let ti = t.inverse().ok_or_else(|| LinalgError::IllConditioned("singular similarity".into()))?;
        let conj = |b: Mat| *t * b * ti;
        let z = Mat::zeros(fixed.dim());
        Ok(Frame {
            r0: conj(block_sum(fixed, [[log_modulus, 0.0], [0.0, log_modulus]])),
            ex: conj(block_sum(&z, [[angle, 0.0], [0.0, -angle]])),
            ey: conj(block_sum(&z, [[0.0, 0.0], [angle, 0.0]])),
            ez: conj(block_sum(&z, [[0.0, -angle], [0.0, 0.0]])),
        })
    }

    fn at(&self, p: &HyperbolaPoint) -> Mat {
        self.r0 + self.ex.scale(p.x) + self.ey.scale(p.y) + self.ez.scale(p.z)
    }

    /// `(a, b)` with `g(n) = a·n + b` for each off-diagonal entry.
    fn constraints(&self) -> Vec<([f64; 3], f64)> {
        let d = self.r0.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let (ey, ez) = (self.ey[(i, j)], self.ez[(i, j)]);
                out.push(([ez - ey, self.ex[(i, j)], self.r0[(i, j)]], ey + ez));
            }
        }
        out
    }
}

/// `R(x, y, z)` for the decomposition `t`, whose last two blocks must be
/// the repeated eigenvalue.
pub fn rotation_logarithm(
    t: &RealJordanDecomposition,
    fixed: &Mat,
    log_modulus: f64,
    angle: f64,
    point: &HyperbolaPoint,
) -> Result<Mat, EmbedError> {
    Ok(Frame::new(&t.t, fixed, log_modulus, angle)?.at(point))
}

fn direction(psi: f64, phi: f64) -> [f64; 3] {
    [psi.sin() * phi.cos(), psi.sin() * phi.sin(), psi.cos()]
}

fn worst(cons: &[([f64; 3], f64)], n: [f64; 3]) -> f64 {
    cons.iter().map(|(a, b)| a[0] * n[0] + a[1] * n[1] + a[2] * n[2] + b).fold(f64::INFINITY, f64::min)
}

struct Cell {
    bound: f64,
    seq: usize,
    psi: f64,
    phi: f64,
    hpsi: f64,
    hphi: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.bound.total_cmp(&o.bound).then_with(|| o.seq.cmp(&self.seq))
    }
}

/// Best-first branch and bound for a point where every off-diagonal entry
/// of `R(x, y, z)` is at least `−nonneg`.
///
/// A cell is discarded once the Lipschitz bound shows every constraint
/// function stays below `−10·nonneg` somewhere on it for all its points;
/// when no cell is left the branch is `Infeasible`.
pub fn hyperbola_search(
    t: &RealJordanDecomposition,
    fixed: &Mat,
    log_modulus: f64,
    angle: f64,
    tol: &Tolerances,
) -> Result<SearchOutcome, EmbedError> {
    if t.ill_conditioned {
        return Err(LinalgError::IllConditioned(format!("similarity condition number {:e}", t.cond)).into());
    }
    let frame = Frame::new(&t.t, fixed, log_modulus, angle)?;
    // Entries that vanish for every point (rows of absorbing states) carry
    // no information and would flatten every bound to zero.
    let size = frame.r0.max_abs() + frame.ex.max_abs() + frame.ey.max_abs() + frame.ez.max_abs();
    let cons: Vec<([f64; 3], f64)> = frame
        .constraints()
        .into_iter()
        .filter(|(a, b)| a[0].abs() + a[1].abs() + a[2].abs() + b.abs() > 1e-13 * size)
        .collect();
    let lips: Vec<f64> = cons.iter().map(|(a, _)| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()).collect();
    let prune = -10.0 * tol.nonneg;

    let mut evaluations = 0usize;
    let mut seq = 0usize;
    let mut heap = BinaryHeap::new();
    // Chord radius of a cell: moving ψ by hψ moves n by at most hψ, moving φ
    // by hφ by at most sin(ψ + hψ)·hφ.
    let mut push = |heap: &mut BinaryHeap<Cell>, psi: f64, phi: f64, hpsi: f64, hphi: f64, evals: &mut usize| {
        *evals += 1;
        let n = direction(psi, phi);
        let r = hpsi + (psi + hpsi).min(PI / 2.0).sin() * hphi;
        let mut bound = f64::INFINITY;
        let mut feasible = n[2] > 0.0;
        for ((a, b), l) in cons.iter().zip(&lips) {
            let g = a[0] * n[0] + a[1] * n[1] + a[2] * n[2] + b;
            feasible &= g >= -tol.nonneg * n[2];
            bound = bound.min(g + l * r);
        }
        if feasible {
            return Some((psi, phi, hpsi.max(1e-6)));
        }
        if bound >= prune {
            seq += 1;
            heap.push(Cell { bound, seq, psi, phi, hpsi, hphi });
        }
        None
    };

    // The pole is the standard rotation I = [[0, −1], [1, 0]].
    let mut hit = push(&mut heap, 0.0, 0.0, 0.0, 0.0, &mut evaluations);
    heap.clear();
    let (hp, hf) = (PI / 4.0 / BASE_GRID as f64, PI / BASE_GRID as f64);
    'seed: for i in 0..BASE_GRID {
        if hit.is_some() {
            break;
        }
        for j in 0..BASE_GRID {
            let psi = (2 * i + 1) as f64 * hp;
            let phi = (2 * j + 1) as f64 * hf;
            if let Some(h) = push(&mut heap, psi, phi, hp, hf, &mut evaluations) {
                hit = Some(h);
                break 'seed;
            }
        }
    }
    while hit.is_none() {
        let Some(c) = heap.pop() else {
            return Ok(SearchOutcome { status: SearchStatus::Infeasible, point: None, evaluations });
        };
        if evaluations >= BUDGET || c.hpsi.max(c.hphi) < 1e-13 {
            return Ok(SearchOutcome { status: SearchStatus::Inconclusive, point: None, evaluations });
        }
        // Halve the cell across its dominant direction.
        let along_psi = c.hpsi >= (c.psi + c.hpsi).min(PI / 2.0).sin() * c.hphi;
        let children = if along_psi {
            let h = c.hpsi / 2.0;
            [(c.psi - h, c.phi, h, c.hphi), (c.psi + h, c.phi, h, c.hphi)]
        } else {
            let h = c.hphi / 2.0;
            [(c.psi, c.phi - h, c.hpsi, h), (c.psi, c.phi + h, c.hpsi, h)]
        };
        for (p, f, hp, hf) in children {
            if let Some(h) = push(&mut heap, p, f, hp, hf, &mut evaluations) {
                hit = Some(h);
                break;
            }
        }
    }

    let (psi, phi, step) = hit.expect("loop exits with a hit");
    let (psi, phi) = refine(&cons, psi, phi, step, &mut evaluations);
    let point = HyperbolaPoint::from_direction(direction(psi, phi));
    Ok(SearchOutcome { status: SearchStatus::Found, point: Some(point), evaluations })
}

/// Compass search raising the worst constraint, kept away from the
/// hemisphere's rim so the recovered point stays moderate.
fn refine(cons: &[([f64; 3], f64)], psi: f64, phi: f64, step: f64, evals: &mut usize) -> (f64, f64) {
    let psi_max = ((psi.cos() / 2.0).acos()).min(PI / 2.0 - 1e-9);
    let score = |p: f64, f: f64| worst(cons, direction(p, f));
    let (mut p, mut f) = (psi, phi);
    let mut best = score(p, f);
    let mut h = step;
    while h > 1e-12 {
        let mut moved = false;
        for (dp, df) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let (np, nf) = ((p + dp * h).clamp(0.0, psi_max), f + df * h);
            *evals += 1;
            let s = score(np, nf);
            if s > best {
                (p, f, best) = (np, nf, s);
                moved = true;
                break;
            }
        }
        if !moved {
            h /= 2.0;
        }
    }
    (p, f)
}

/// Decomposition with the two blocks of the repeated eigenvalue `lambda`
/// moved last, and the logarithm of the remaining diagonal part.
pub(crate) fn pair_frame(
    m: &Mat,
    lambda: f64,
    tol: &Tolerances,
) -> Result<(RealJordanDecomposition, Mat), EmbedError> {
    let rj = real_jordan(m, tol)?;
    let near = |a: f64, b: f64| (a - b).abs() <= tol.spec_cluster * a.abs().max(b.abs()).max(1.0);
    let mut rest = Vec::new();
    let mut pair = Vec::new();
    for (i, b) in rj.blocks.iter().enumerate() {
        match *b {
            RealBlock::Real { lambda: l, size: 1 } if near(l, lambda) => pair.push(i),
            RealBlock::Real { size: 1, .. } => rest.push(i),
            _ => return Err(LinalgError::IllConditioned("unexpected block structure".into()).into()),
        }
    }
    if pair.len() != 2 {
        return Err(LinalgError::IllConditioned("repeated eigenvalue is not a double pair".into()).into());
    }
    let mut logs = Vec::new();
    for &i in &rest {
        if let RealBlock::Real { lambda: l, .. } = rj.blocks[i] {
            if near(l, 1.0) {
                logs.push(0.0);
            } else if l > 0.0 {
                logs.push(l.ln());
            } else {
                return Err(EmbedError::NonpositiveEigenvalue);
            }
        }
    }
    rest.extend(pair);
    Ok((rj.reorder(&rest), Mat::diag(&logs)))
}

/// Generators found on the hyperbola branches of a repeated eigenvalue.
#[derive(Debug, Default)]
pub(crate) struct PairScan {
    pub generators: Vec<GeneratorCandidate>,
    /// Branches tried.
    pub branches: usize,
    /// Branches left open: budget exhausted, ill-conditioned, or a found
    /// point that did not certify.
    pub open: usize,
}

/// Search every admissible branch of the repeated eigenvalue `lambda` of
/// `m`, skipping the principal one when `skip_principal` is set.
pub(crate) fn scan_pair(m: &Mat, lambda: f64, skip_principal: bool, tol: &Tolerances) -> PairScan {
    let mut out = PairScan::default();
    let range: Vec<(i64, f64)> =
        angle_range(lambda, m.dim()).into_iter().filter(|(k, _)| !(skip_principal && lambda > 0.0 && *k == 0)).collect();
    if range.is_empty() {
        return out;
    }
    out.branches = range.len();
    let (rj, fixed) = match pair_frame(m, lambda, tol) {
        Ok(f) => f,
        Err(_) => {
            out.open = range.len();
            return out;
        }
    };
    let lm = lambda.abs().ln();
    for (k, th) in range {
        match hyperbola_search(&rj, &fixed, lm, th, tol) {
            Ok(SearchOutcome { status: SearchStatus::Found, point: Some(p), .. }) => {
                let raw = match rotation_logarithm(&rj, &fixed, lm, th, &p) {
                    Ok(r) => r,
                    Err(_) => {
                        out.open += 1;
                        continue;
                    }
                };
                match certify(m, &raw, k, Construction::Hyperbola, tol) {
                    Some(mut c) => {
                        c.point = Some(p);
                        out.generators.push(c);
                    }
                    None => out.open += 1,
                }
            }
            Ok(SearchOutcome { status: SearchStatus::Infeasible, .. }) => {}
            _ => out.open += 1,
        }
    }
    out
}
