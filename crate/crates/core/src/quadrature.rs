//! Gauss–Legendre panels and stable oscillatory phase integrals.

use crate::C64;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre polynomial; accurate to
/// machine precision for the small n used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x) by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule over `[t0, t1]`: `panels` equal panels with
/// `nodes_per_panel` Gauss nodes each.
#[derive(Debug, Clone)]
pub struct PanelRule {
    points: Vec<(f64, f64)>,
}

impl PanelRule {
    pub fn new(t0: f64, t1: f64, panels: usize, nodes_per_panel: usize) -> Self {
        assert!(panels >= 1 && t1 > t0);
        let (xs, ws) = gauss_legendre(nodes_per_panel);
        let dt = (t1 - t0) / panels as f64;
        let mut points = Vec::with_capacity(panels * nodes_per_panel);
        for p in 0..panels {
            let a = t0 + p as f64 * dt;
            let mid = a + 0.5 * dt;
            for (x, w) in xs.iter().zip(&ws) {
                points.push((mid + 0.5 * dt * x, 0.5 * dt * w));
            }
        }
        Self { points }
    }

    /// Panel count sized so each panel sees at most `phase_per_panel` radians
    /// of the fastest oscillation `omega_max`.
    pub fn for_oscillation(
        t0: f64,
        t1: f64,
        omega_max: f64,
        phase_per_panel: f64,
        nodes_per_panel: usize,
    ) -> Self {
        let span = (t1 - t0).abs();
        let panels = ((omega_max.abs() * span / phase_per_panel).ceil() as usize).max(1);
        Self::new(t0, t1, panels, nodes_per_panel)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrate a scalar function over the rule (sequential, fixed order).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.points.iter().map(|&(t, w)| w * f(t)).sum()
    }
}

/// `∫_{t0}^{t1} e^{iωs} ds`, evaluated in a cancellation-free form.
///
/// Uses `e^{iθ} - 1 = -2 sin²(θ/2) + i sin θ` so small `ω` keeps full
/// absolute accuracy; `ω = 0` returns the interval length.
pub fn osc_integral(omega: f64, t0: f64, t1: f64) -> C64 {
    let dt = t1 - t0;
    if omega == 0.0 {
        return C64::new(dt, 0.0);
    }
    let theta = omega * dt;
    let half = 0.5 * theta;
    // (e^{iθ} - 1) / (iω)
    let em1 = C64::new(-2.0 * half.sin() * half.sin(), theta.sin());
    let base = C64::from_polar(1.0, omega * t0);
    base * em1 / C64::new(0.0, omega)
}
