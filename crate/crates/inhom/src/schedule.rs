use embed_linalg::{is_generator, mat_exp, Mat, Tolerances};
use serde::{Deserialize, Serialize};

use crate::InhomError;

/// One stretch of a generator schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Segment {
    /// `Q` held fixed for `duration`.
    Constant {
        #[serde(rename = "Q")]
        q: Mat,
        duration: f64,
    },
    /// `Q(t₀ + m·h) = samples[m]`, linear in between.
    Sampled { samples: Vec<Mat>, h: f64 },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match self {
            Segment::Constant { duration, .. } => *duration,
            Segment::Sampled { samples, h } => (samples.len() - 1) as f64 * h,
        }
    }

    fn generators(&self) -> &[Mat] {
        match self {
            Segment::Constant { q, .. } => std::slice::from_ref(q),
            Segment::Sampled { samples, .. } => samples,
        }
    }
}

/// Segments in time order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    segments: Vec<Segment>,
}

impl Schedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self, InhomError> {
        let s = Schedule { segments };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(q: Mat, duration: f64) -> Result<Self, InhomError> {
        Self::new(vec![Segment::Constant { q, duration }])
    }

    /// Checks the invariants again, e.g. after deserializing.
    pub fn validate(&self) -> Result<(), InhomError> {
        let bad = |msg: String| Err(InhomError::InvalidSchedule(msg));
        let Some(first) = self.segments.first() else {
            return bad("no segments".into());
        };
        let dim = first.generators().first().map(Mat::dim).unwrap_or(0);
        let tol = Tolerances::default();
        for (k, seg) in self.segments.iter().enumerate() {
            match seg {
                Segment::Constant { duration, .. } if !(duration.is_finite() && *duration > 0.0) => {
                    return bad(format!("segment {k}: duration {duration} is not positive"));
                }
                Segment::Sampled { samples, h } if samples.len() < 2 || !(h.is_finite() && *h > 0.0) => {
                    return bad(format!("segment {k}: needs two samples and a positive step"));
                }
                _ => {}
            }
            for q in seg.generators() {
                if q.dim() != dim {
                    return bad(format!("segment {k}: dimension {} differs from {dim}", q.dim()));
                }
                if !is_generator(q, &tol) {
                    return bad(format!("segment {k}: not a generator"));
                }
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn dim(&self) -> usize {
        self.segments[0].generators()[0].dim()
    }

    pub fn span(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// The schedule cut at time `t`. Inside a sampled segment `t` has to be
    /// a grid point.
    fn pieces(&self, t: f64) -> Result<Vec<Piece<'_>>, InhomError> {
        let span = self.span();
        let slack = 1e-12 * span.max(1.0);
        if !(t >= 0.0 && t <= span + slack) {
            return Err(InhomError::TimeOutOfRange(t));
        }
        let mut out = Vec::new();
        let mut t0 = 0.0;
        for seg in &self.segments {
            let left = t - t0;
            if left <= slack {
                break;
            }
            let d = seg.duration();
            match seg {
                Segment::Constant { q, .. } => out.push(Piece::Constant(q, left.min(d))),
                Segment::Sampled { samples, h } => {
                    let steps = left.min(d) / h;
                    let m = steps.round();
                    if (steps - m).abs() > 1e-9 * steps.max(1.0) {
                        return Err(InhomError::TimeOutOfRange(t));
                    }
                    if m >= 1.0 {
                        out.push(Piece::Grid(&samples[..=m as usize], *h));
                    }
                }
            }
            t0 += d;
        }
        Ok(out)
    }
}

enum Piece<'a> {
    Constant(&'a Mat, f64),
    Grid(&'a [Mat], f64),
}

/// Running integrals `∫₀^{τ_m} f` over a uniform grid: Simpson on each
/// pair of steps, with a three-point rule for a trailing odd step.
fn cumulative_simpson(f: &[Mat], h: f64) -> Vec<Mat> {
    let n = f.len();
    let mut out = vec![Mat::zeros(f[0].dim()); n];
    if n == 2 {
        out[1] = (f[0] + f[1]).scale(h / 2.0);
        return out;
    }
    for m in 1..n {
        out[m] = if m == 1 {
            out[0] + (f[0].scale(5.0) + f[1].scale(8.0) - f[2]).scale(h / 12.0)
        } else if m % 2 == 0 {
            out[m - 2] + (f[m - 2] + f[m - 1].scale(4.0) + f[m]).scale(h / 3.0)
        } else {
            out[m - 1] + (f[m].scale(5.0) + f[m - 1].scale(8.0) - f[m - 2]).scale(h / 12.0)
        };
    }
    out
}

/// One fourth-order Magnus step over `Δ = 2h` from three samples:
/// `Ω = B₀ + [B₀, B₁]/Δ` with the Simpson moments
/// `B₀ ≈ ∫Q` and `B₁ ≈ ∫(τ − Δ/2)·Q`.
fn magnus_pair(q0: &Mat, qm: &Mat, q2: &Mat, h: f64) -> Mat {
    let delta = 2.0 * h;
    let b0 = (*q0 + qm.scale(4.0) + *q2).scale(delta / 6.0);
    let b1 = (*q2 - *q0).scale(delta * delta / 12.0);
    b0 + b0.commutator(&b1).scale(1.0 / delta)
}

/// The flow over the whole schedule. Constant segments contribute
/// `exp(d·Q)` exactly; sampled ones a fourth-order Magnus step per pair of
/// grid intervals, plus `exp(h/2·(Q₀+Q₁) + h²/12·[Q₀, Q₁])` for a trailing
/// odd interval. Factors are multiplied in time order, so the first
/// segment acts on the left.
pub fn evolve(s: &Schedule) -> Mat {
    let mut m = Mat::identity(s.dim());
    for seg in s.segments() {
        match seg {
            Segment::Constant { q, duration } => m = m * mat_exp(&q.scale(*duration)),
            Segment::Sampled { samples, h } => {
                let pairs = (samples.len() - 1) / 2;
                for k in 0..pairs {
                    let w = &samples[2 * k..2 * k + 3];
                    m = m * mat_exp(&magnus_pair(&w[0], &w[1], &w[2], *h));
                }
                if (samples.len() - 1) % 2 == 1 {
                    let (a, b) = (&samples[samples.len() - 2], &samples[samples.len() - 1]);
                    m = m * mat_exp(&((*a + *b).scale(h / 2.0) + a.commutator(b).scale(h * h / 12.0)));
                }
            }
        }
    }
    m
}

/// The terms `I₀ = I, I₁(t), I₂(t), …` of the Peano–Baker series with
/// `I_{n+1}(t) = ∫₀ᵗ I_n(τ)·Q(τ) dτ`, up to the first one below `tol` in
/// the ∞-norm (which is included).
///
/// On a constant segment of length `d` starting at `t₀` the recursion is
/// solved exactly, `I_n(t₀+d) = Σ_k I_{n−k}(t₀)·(dQ)^k/k!`. Sampled
/// segments use cumulative Simpson on their grid.
pub fn peano_baker_terms(s: &Schedule, t: f64, max_terms: usize, tol: f64) -> Result<Vec<Mat>, InhomError> {
    let pieces = s.pieces(t)?;
    let dim = s.dim();
    let id = Mat::identity(dim);
    // starts[p][n] = I_n at the start of piece p.
    let mut starts: Vec<Vec<Mat>> = vec![vec![id]; pieces.len() + 1];
    let mut powers: Vec<Vec<Mat>> = pieces
        .iter()
        .map(|p| match p {
            Piece::Constant(..) => vec![id],
            Piece::Grid(..) => Vec::new(),
        })
        .collect();
    // Level n−1 on every grid of a sampled piece.
    let mut grid_prev: Vec<Vec<Mat>> =
        pieces.iter().map(|p| if let Piece::Grid(g, _) = p { vec![id; g.len()] } else { Vec::new() }).collect();
    let mut terms = vec![id];
    for n in 1..=max_terms {
        let mut start = Mat::zeros(dim);
        for (p, piece) in pieces.iter().enumerate() {
            starts[p].push(start);
            start = match piece {
                Piece::Constant(q, d) => {
                    let pw = &mut powers[p];
                    let next = pw[n - 1] * q.scale(*d / n as f64);
                    pw.push(next);
                    (0..=n).fold(Mat::zeros(dim), |acc, k| acc + starts[p][n - k] * pw[k])
                }
                Piece::Grid(g, h) => {
                    let f: Vec<Mat> = grid_prev[p].iter().zip(g.iter()).map(|(i, q)| *i * *q).collect();
                    let level: Vec<Mat> = cumulative_simpson(&f, *h).into_iter().map(|v| v + start).collect();
                    let end = *level.last().expect("grid has two points");
                    grid_prev[p] = level;
                    end
                }
            };
        }
        starts[pieces.len()].push(start);
        debug_assert!((0..dim).all(|i| start.row_sum(i).abs() <= 1e-8 * (1.0 + start.norm_inf())));
        terms.push(start);
        if start.norm_inf() < tol {
            return Ok(terms);
        }
    }
    Err(InhomError::NotConverged(max_terms))
}

/// `M(t) = Σ I_n(t)`, the solution of `Ṁ = M·Q(t)`, `M(0) = I`.
pub fn peano_baker(s: &Schedule, t: f64, max_terms: usize, tol: f64) -> Result<Mat, InhomError> {
    let terms = peano_baker_terms(s, t, max_terms, tol)?;
    Ok(terms.iter().fold(Mat::zeros(s.dim()), |acc, i| acc + *i))
}

/// `det M(t) = exp(∫₀ᵗ tr Q(τ) dτ)`.
pub fn liouville_det(s: &Schedule, t: f64) -> Result<f64, InhomError> {
    let mut integral = 0.0;
    for piece in s.pieces(t)? {
        integral += match piece {
            Piece::Constant(q, d) => d * q.trace(),
            Piece::Grid(g, h) => {
                let tr: Vec<Mat> = g.iter().map(|q| Mat::diag(&[q.trace()])).collect();
                cumulative_simpson(&tr, h).last().expect("grid")[(0, 0)]
            }
        };
    }
    Ok(integral.exp())
}
