//! Adaptive Gauss-Kronrod quadrature on finite intervals.
//!
//! A 15-point Kronrod rule with embedded 7-point Gauss error estimate,
//! refined worst-panel-first. Callers that integrate spiky or semi-infinite
//! integrands are expected to pass breakpoints or do their own tail
//! splitting; this module stays deliberately small.

/// Tolerances and budget for one quadrature request.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Growth factor for semi-infinite tail panels (used by callers).
    pub tail_growth_factor: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        // detection-error minima are shallow; keep at least 6 reliable digits
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_subdivisions: 2000,
            tail_growth_factor: 2.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(QuadError::BadSpec("tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadError::BadSpec("max_subdivisions must be at least 1"));
        }
        if !(self.tail_growth_factor > 1.0) {
            return Err(QuadError::BadSpec("tail_growth_factor must exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadError {
    /// Refinement budget exhausted before tolerances were met; carries the
    /// error actually achieved and the tolerance that was requested.
    NonConvergence { achieved: f64, requested: f64 },
    BadSpec(&'static str),
    BadInterval { a: f64, b: f64 },
}

impl std::fmt::Display for QuadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuadError::NonConvergence { achieved, requested } => write!(
                f,
                "quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}"
            ),
            QuadError::BadSpec(msg) => write!(f, "bad quadrature spec: {msg}"),
            QuadError::BadInterval { a, b } => write!(f, "bad interval [{a}, {b}]"),
        }
    }
}

impl std::error::Error for QuadError {}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
}

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights. Standard QUADPACK constants.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 15 evaluation over [a, b]: (estimate, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    let mut fvals = [0.0f64; 15];
    fvals[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fvals[j] = f1;
        fvals[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fvals[7] - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fvals[j] - mean).abs() + (fvals[14 - j] - mean).abs());
    }
    let value = kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * 1.0f64.min((200.0 * err / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Integrate f over [a, b] adaptively.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult, QuadError> {
    integrate_segmented(f, &[a, b], spec)
}

/// Integrate over consecutive panels given by `breakpoints` (ascending),
/// sharing one refinement budget. Panels let callers pre-split around
/// known boundary layers or integrand scales.
pub fn integrate_segmented<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadError> {
    spec.validate()?;
    if breakpoints.len() < 2 {
        return Err(QuadError::BadSpec("need at least two breakpoints"));
    }
    let mut panels: Vec<Panel> = Vec::with_capacity(breakpoints.len() + 16);
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(QuadError::BadInterval { a, b });
        }
        if a == b {
            continue;
        }
        let (value, error) = gk15(&f, a, b);
        panels.push(Panel { a, b, value, error });
    }
    if panels.is_empty() {
        return Ok(QuadResult { value: 0.0, abs_error: 0.0 });
    }

    let mut splits = 0usize;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if err <= target {
            return Ok(QuadResult { value: total, abs_error: err });
        }
        if splits >= spec.max_subdivisions {
            return Err(QuadError::NonConvergence { achieved: err, requested: target });
        }
        // bisect the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .expect("nonempty");
        let Panel { a, b, .. } = panels[idx];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval no longer splittable in f64; accept what we have
            let total: f64 = panels.iter().map(|p| p.value).sum();
            let err: f64 = panels.iter().map(|p| p.error).sum();
            return Ok(QuadResult { value: total, abs_error: err });
        }
        let (v1, e1) = gk15(&f, a, mid);
        let (v2, e2) = gk15(&f, mid, b);
        panels[idx] = Panel { a, b: mid, value: v1, error: e1 };
        panels.push(Panel { a: mid, b, value: v2, error: e2 });
        splits += 1;
    }
}

/// Geometric breakpoints refining toward `edge` inside [a, b]: panel widths
/// shrink by `ratio` down to `finest` (relative to the interval length).
/// Used for integrands with a boundary layer at one end.
pub fn edge_refined_breakpoints(a: f64, b: f64, toward_b: bool, finest: f64, levels: usize) -> Vec<f64> {
    let span = b - a;
    let mut offs: Vec<f64> = Vec::with_capacity(levels + 2);
    let mut w = finest.min(0.5);
    for _ in 0..levels {
        offs.push(w);
        w *= 4.0;
        if w >= 0.5 {
            break;
        }
    }
    let mut pts = vec![a, b];
    for o in offs {
        let p = if toward_b { b - o * span } else { a + o * span };
        if p > a && p < b {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
