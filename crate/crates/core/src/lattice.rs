//! Torus geometry, rational directions, and the strip covering isometry.
//!
//! A rational direction `Ξ0 ∝ (nA, mB)` has closed geodesics. Pulling a
//! torus-periodic function back through the rotation
//! `F(x, y) = x·Ξ0⊥ + y·Ξ0` produces a function on the covering strip that is
//! `b`-periodic along the orbit and periodic *up to a transverse twist* `γ`
//! across strips: shifting `x` by the strip width `a` shifts `y` by `γ`.

use rand::{Rng, SeedableRng};

use crate::error::{CoreError, Result};
use crate::field::FourierField;
use crate::C64;

/// Rectangular torus `T² = ℝ²/(AZ × BZ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusLattice {
    /// Period in x (A).
    pub x_period: f64,
    /// Period in y (B).
    pub y_period: f64,
}

impl TorusLattice {
    pub fn new(x_period: f64, y_period: f64) -> Result<Self> {
        if !(x_period > 0.0) || !(y_period > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "torus periods must be positive, got ({x_period}, {y_period})"
            )));
        }
        Ok(Self { x_period, y_period })
    }

    pub fn square_2pi() -> Self {
        Self {
            x_period: std::f64::consts::TAU,
            y_period: std::f64::consts::TAU,
        }
    }

    pub fn area(&self) -> f64 {
        self.x_period * self.y_period
    }
}

/// Sign convention for the transverse twist in the strip periodicity
/// identity `F*u(x + ka, y + ℓb) = F*u(x, y ∓ kγ)`.
///
/// Both signs circulate in the literature of strip coverings. With `twist`
/// as produced by [`make_direction`], `Plus` (`y + kγ`) is the identity that
/// holds exactly; `Minus` (`y - kγ`) holds after negating `twist`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TwistConvention {
    /// `F*u(x + ka, y + ℓb) = F*u(x, y + kγ)` — exact for the stored `twist`.
    #[default]
    Plus,
    /// `F*u(x + ka, y + ℓb) = F*u(x, y - kγ)`.
    Minus,
}

/// A rational direction on the torus with its strip-covering constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalDirection {
    pub lattice: TorusLattice,
    /// Coprime integer pair defining `Ξ0 ∝ (nA, mB)`.
    pub n: i64,
    pub m: i64,
    /// Bezout companion satisfying `n·q - m·p = 1` (minimal |p|, ties to the
    /// smaller p; for n = 0 additionally minimal |q|).
    pub p: i64,
    pub q: i64,
    /// Unit vector along the closed geodesic.
    pub xi0: [f64; 2],
    /// Unit normal, `xi0 · xi0_perp = 0`.
    pub xi0_perp: [f64; 2],
    /// Strip width a = (qn - pm)·A·B / b.
    pub strip_width: f64,
    /// Orbit length b = sqrt(n²A² + m²B²).
    pub orbit_length: f64,
    /// Transverse twist γ = -(pnA² + qmB²) / b.
    pub twist: f64,
}

const INDEX_LIMIT: i64 = 1_000_000;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, s, t) with `a·s + b·t = g`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, s, t) = ext_gcd(b, a % b);
        (g, t, s - (a / b) * t)
    }
}

/// Build the strip frame for the coprime direction `(n, m)`.
pub fn make_direction(lattice: TorusLattice, n: i64, m: i64) -> Result<RationalDirection> {
    if n == 0 && m == 0 {
        return Err(CoreError::InvalidDirection {
            n,
            m,
            reason: "direction indices cannot both be zero".into(),
        });
    }
    if n.abs() > INDEX_LIMIT || m.abs() > INDEX_LIMIT {
        return Err(CoreError::InvalidDirection {
            n,
            m,
            reason: format!("indices exceed the overflow guard |n|,|m| <= {INDEX_LIMIT}"),
        });
    }
    if gcd(n, m) != 1 {
        return Err(CoreError::InvalidDirection {
            n,
            m,
            reason: format!("indices must be coprime, gcd = {}", gcd(n, m)),
        });
    }

    // Solve n·q - m·p = 1. ext_gcd gives n·s + m·t = 1; take q = s, p = -t.
    let (g, s, t) = ext_gcd(n, m);
    debug_assert_eq!(g, 1);
    let (mut p, mut q) = (-t, s);
    debug_assert_eq!(n * q - m * p, 1);

    // The solution family is (p + j·n, q + j·m). Minimize |p|, ties to the
    // smaller p; when n = 0, p is fixed and we minimize |q| instead.
    if n != 0 {
        let j0 = (-(p as f64) / n as f64).round() as i64;
        let mut best = (p + j0 * n, q + j0 * m);
        for j in [j0 - 1, j0, j0 + 1] {
            let cand = (p + j * n, q + j * m);
            let better = (cand.0.abs(), cand.0) < (best.0.abs(), best.0);
            if better {
                best = cand;
            }
        }
        (p, q) = best;
    } else {
        let j0 = (-(q as f64) / m as f64).round() as i64;
        let mut best = (p, q + j0 * m);
        for j in [j0 - 1, j0, j0 + 1] {
            let cand = (p, q + j * m);
            if (cand.1.abs(), cand.1) < (best.1.abs(), best.1) {
                best = cand;
            }
        }
        (p, q) = best;
    }
    debug_assert_eq!(n * q - m * p, 1);

    let (big_a, big_b) = (lattice.x_period, lattice.y_period);
    let b2 = (n * n) as f64 * big_a * big_a + (m * m) as f64 * big_b * big_b;
    let b = b2.sqrt();
    let a = (q * n - p * m) as f64 * big_a * big_b / b;
    let gamma = -((p * n) as f64 * big_a * big_a + (q * m) as f64 * big_b * big_b) / b;
    let xi0 = [n as f64 * big_a / b, m as f64 * big_b / b];
    let xi0_perp = [-(m as f64) * big_b / b, n as f64 * big_a / b];

    Ok(RationalDirection {
        lattice,
        n,
        m,
        p,
        q,
        xi0,
        xi0_perp,
        strip_width: a,
        orbit_length: b,
        twist: gamma,
    })
}

impl RationalDirection {
    /// The covering isometry `F(x, y) = x·Ξ0⊥ + y·Ξ0`.
    #[inline]
    pub fn to_torus(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x * self.xi0_perp[0] + y * self.xi0[0],
            x * self.xi0_perp[1] + y * self.xi0[1],
        )
    }

    /// Inverse frame change: strip coordinates of a torus point.
    #[inline]
    pub fn to_strip(&self, zx: f64, zy: f64) -> (f64, f64) {
        (
            zx * self.xi0_perp[0] + zy * self.xi0_perp[1],
            zx * self.xi0[0] + zy * self.xi0[1],
        )
    }

    /// When `B/A = r/s` is rational the pullback is plainly periodic in `x`
    /// with period `ã = (n²s² + m²r²)·a`.
    pub fn rational_x_period(&self, r: i64, s: i64) -> f64 {
        ((self.n * self.n * s * s + self.m * self.m * r * r) as f64) * self.strip_width
    }
}

/// Evaluate the pullback `F*u` at strip coordinates `(x, y)`.
pub fn pullback(u: &FourierField, d: &RationalDirection, x: f64, y: f64) -> C64 {
    let (zx, zy) = d.to_torus(x, y);
    u.eval(zx, zy)
}

/// Max deviation of the twisted periodicity identity over random samples
/// `(x, y)` and integer shifts `|k|, |ℓ| <= 3`. Deterministic given `seed`.
pub fn check_twisted_periodicity(
    u: &FourierField,
    d: &RationalDirection,
    trials: usize,
    seed: u64,
    convention: TwistConvention,
) -> f64 {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let span = d.lattice.x_period + d.lattice.y_period;
    let sign = match convention {
        TwistConvention::Plus => 1.0,
        TwistConvention::Minus => -1.0,
    };
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x: f64 = rng.gen_range(-span..span);
        let y: f64 = rng.gen_range(-span..span);
        let k: i64 = rng.gen_range(-3..=3);
        let l: i64 = rng.gen_range(-3..=3);
        let lhs = pullback(
            u,
            d,
            x + k as f64 * d.strip_width,
            y + l as f64 * d.orbit_length,
        );
        let rhs = pullback(u, d, x, y + sign * k as f64 * d.twist);
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}
