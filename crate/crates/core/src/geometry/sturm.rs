use super::GeometryError;

const RESCALE_AT: f64 = 1e100;

/// Solution of `u'' + q u = 0`, `u(0) = 0`, `u'(0) = 1`, with `q = −γ²` on
/// `[s, t)` and `q = −(α₁ + ε)²` elsewhere.
///
/// Values are stored as `u = u_scaled · e^{log_scale}` so that radii far
/// beyond the `f64` range of `sinh` remain representable.
#[derive(Debug, Clone)]
pub struct SturmLiouvilleSolution {
    pub n: u32,
    pub r: Vec<f64>,
    pub u_scaled: Vec<f64>,
    pub du_scaled: Vec<f64>,
    pub log_scale: Vec<f64>,
    /// `log ∫₀^{rₖ} uⁿ dr` by the trapezoid rule; `−∞` at `r = 0`.
    pub log_volume: Vec<f64>,
}

impl SturmLiouvilleSolution {
    pub fn u(&self, k: usize) -> f64 {
        self.u_scaled[k] * self.log_scale[k].exp()
    }

    pub fn du(&self, k: usize) -> f64 {
        self.du_scaled[k] * self.log_scale[k].exp()
    }

    pub fn log_u(&self, k: usize) -> f64 {
        self.u_scaled[k].abs().ln() + self.log_scale[k]
    }

    /// The comparison bound `∫₀^R uⁿ dr`; may be `+∞` when it exceeds `f64`.
    pub fn volume_bound(&self) -> f64 {
        self.log_volume.last().copied().unwrap_or(f64::NEG_INFINITY).exp()
    }

    pub fn log_volume_bound(&self) -> f64 {
        self.log_volume.last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// Least-squares slope of `log ∫₀^r uⁿ` over `r ∈ [r_from, R]`.
    pub fn log_volume_slope(&self, r_from: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .r
            .iter()
            .zip(&self.log_volume)
            .filter(|(r, lv)| **r >= r_from && lv.is_finite())
            .map(|(r, lv)| (*r, *lv))
            .collect();
        least_squares_slope(&pts)
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Integrates the comparison problem by classical RK4 with step at most `h`,
/// restarting exactly at `s` and `t` so that `q` is constant on every step.
pub fn sturm_liouville_compare(
    s: f64,
    t: f64,
    alpha1eps: f64,
    gamma: f64,
    radius: f64,
    n: u32,
    h: f64,
) -> Result<SturmLiouvilleSolution, GeometryError> {
    let bad = |m: String| Err(GeometryError::Integration(m));
    if !(0.0 <= s && s <= t && t <= radius && radius.is_finite()) {
        return bad(format!("need 0 <= s <= t <= R, got s={s}, t={t}, R={radius}"));
    }
    if !(alpha1eps > 0.0 && gamma >= alpha1eps) {
        return bad(format!("need gamma >= alpha1+eps > 0, got gamma={gamma}, alpha1+eps={alpha1eps}"));
    }
    if h.is_nan() || h <= 0.0 || n == 0 {
        return bad(format!("invalid step {h} or dimension {n}"));
    }
    let nf = f64::from(n);
    let mut sol = SturmLiouvilleSolution {
        n,
        r: vec![0.0],
        u_scaled: vec![0.0],
        du_scaled: vec![1.0],
        log_scale: vec![0.0],
        log_volume: vec![f64::NEG_INFINITY],
    };
    let (mut u, mut du, mut ls) = (0.0f64, 1.0f64, 0.0f64);
    let mut log_un_prev = f64::NEG_INFINITY;
    let mut log_vol = f64::NEG_INFINITY;

    for (a, b, k) in [(0.0, s, alpha1eps), (s, t, gamma), (t, radius, alpha1eps)] {
        if b <= a {
            continue;
        }
        let k2 = k * k;
        let steps = ((b - a) / h).ceil() as usize;
        let hs = (b - a) / steps as f64;
        for i in 1..=steps {
            // u'' = k² u
            let f = |u: f64, v: f64| (v, k2 * u);
            let (k1u, k1v) = f(u, du);
            let (k2u, k2v) = f(u + 0.5 * hs * k1u, du + 0.5 * hs * k1v);
            let (k3u, k3v) = f(u + 0.5 * hs * k2u, du + 0.5 * hs * k2v);
            let (k4u, k4v) = f(u + hs * k3u, du + hs * k3v);
            u += hs / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += hs / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            let r = if i == steps { b } else { a + i as f64 * hs };
            if !(u.is_finite() && du.is_finite()) {
                return bad(format!("non-finite state at r = {r}"));
            }
            if u.abs() > RESCALE_AT {
                let m = u.abs();
                u /= m;
                du /= m;
                ls += m.ln();
            }
            let log_un = nf * (u.abs().ln() + ls);
            let trap = log_add_exp(log_un_prev, log_un) + (0.5 * hs).ln();
            log_vol = log_add_exp(log_vol, trap);
            log_un_prev = log_un;
            sol.r.push(r);
            sol.u_scaled.push(u);
            sol.du_scaled.push(du);
            sol.log_scale.push(ls);
            sol.log_volume.push(log_vol);
        }
    }
    Ok(sol)
}
