//! Powell's conjugate-direction minimizer with bracketing and Brent line
//! searches. Every line search is one update and one [`TraceRow`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GOLD: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105;
const GLIMIT: f64 = 100.0;
const TINY: f64 = 1e-20;
const ZEPS: f64 = 1e-12;
const MAX_BRACKET_STEPS: usize = 50;
const MAX_BRENT_STEPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_updates: usize,
    pub value_tolerance: f64,
    pub line_search_tolerance: f64,
    pub initial_step: f64,
    /// Half-width of the uniform noise added to the zero starting point.
    pub init_noise: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_updates: 2000,
            value_tolerance: 1e-8,
            line_search_tolerance: 1e-8,
            initial_step: 0.1,
            init_noise: 0.01,
            seed: 7,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_updates == 0 {
            return Err(Error::InvalidOptimizer("max_updates must be at least 1".into()));
        }
        for (name, v) in [
            ("value_tolerance", self.value_tolerance),
            ("line_search_tolerance", self.line_search_tolerance),
            ("initial_step", self.initial_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidOptimizer(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.init_noise >= 0.0 && self.init_noise.is_finite()) {
            return Err(Error::InvalidOptimizer(format!("init_noise must be non-negative, got {}", self.init_noise)));
        }
        Ok(())
    }

    /// Zeros plus uniform noise in `[-init_noise, init_noise]`; `stream`
    /// separates independent samples drawn from one seed.
    pub fn initial_parameters(&self, k: usize, stream: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        (0..k)
            .map(|_| {
                if self.init_noise > 0.0 {
                    rng.gen_range(-self.init_noise..=self.init_noise)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub update: usize,
    pub objective: f64,
    pub theta: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    /// Every objective value in evaluation order.
    pub evaluations: Vec<f64>,
    pub converged: bool,
    pub bracket_failures: usize,
}

impl Trace {
    pub fn updates_used(&self) -> usize {
        self.rows.len()
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.rows
            .iter()
            .map(|r| {
                best = best.min(r.objective);
                best
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub theta: Vec<f64>,
    pub value: f64,
    pub trace: Trace,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineMinimum {
    pub t: f64,
    pub value: f64,
    pub bracketed: bool,
}

/// Wraps an objective with finiteness checks and evaluation logging.
struct Counted<'a, F> {
    f: F,
    log: &'a mut Vec<f64>,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        let v = (self.f)(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: v,
                theta: x.to_vec(),
            });
        }
        self.log.push(v);
        Ok(v)
    }
}

fn along(point: &[f64], direction: &[f64], t: f64) -> Vec<f64> {
    point.iter().zip(direction).map(|(p, d)| p + t * d).collect()
}

/// Minimizes `f(point + t·direction)` over `t`, starting from `t = 0` with
/// `f0 = f(point)`.
pub fn bracket_and_minimize_line<F>(
    mut f: F,
    point: &[f64],
    direction: &[f64],
    cfg: &OptimizerConfig,
) -> Result<LineMinimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut log = Vec::new();
    let mut counted = Counted { f: &mut f, log: &mut log };
    let f0 = counted.eval(point)?;
    line_search(&mut counted, point, direction, f0, cfg)
}

fn line_search<F: FnMut(&[f64]) -> Result<f64>>(
    f: &mut Counted<'_, F>,
    point: &[f64],
    direction: &[f64],
    f0: f64,
    cfg: &OptimizerConfig,
) -> Result<LineMinimum> {
    if direction.iter().all(|&d| d == 0.0) {
        return Err(Error::InvalidOptimizer("zero search direction".into()));
    }
    let mut g = |t: f64| f.eval(&along(point, direction, t));

    // bracket
    let (mut ax, mut bx) = (0.0, 1.0);
    let (mut fa, mut fb) = (f0, g(bx)?);
    if fb > fa {
        std::mem::swap(&mut ax, &mut bx);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut cx = bx + GOLD * (bx - ax);
    let mut fc = g(cx)?;
    let mut steps = 0;
    let mut best = if fa <= fb { (ax, fa) } else { (bx, fb) };
    if fc < best.1 {
        best = (cx, fc);
    }
    while fb > fc {
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Ok(LineMinimum {
                t: best.0,
                value: best.1,
                bracketed: false,
            });
        }
        let r = (bx - ax) * (fb - fc);
        let q = (bx - cx) * (fb - fa);
        let denom = 2.0 * (q - r).abs().max(TINY).copysign(q - r);
        let mut u = bx - ((bx - cx) * q - (bx - ax) * r) / denom;
        let ulim = bx + GLIMIT * (cx - bx);
        let mut fu;
        if (bx - u) * (u - cx) > 0.0 {
            fu = g(u)?;
            if fu < fc {
                ax = bx;
                bx = u;
                fb = fu;
                if fu < best.1 {
                    best = (u, fu);
                }
                break;
            } else if fu > fb {
                cx = u;
                break;
            }
            u = cx + GOLD * (cx - bx);
            fu = g(u)?;
        } else if (cx - u) * (u - ulim) > 0.0 {
            fu = g(u)?;
            if fu < fc {
                bx = cx;
                cx = u;
                u = cx + GOLD * (cx - bx);
                fb = fc;
                fc = fu;
                fu = g(u)?;
            }
        } else if (u - ulim) * (ulim - cx) >= 0.0 {
            u = ulim;
            fu = g(u)?;
        } else {
            u = cx + GOLD * (cx - bx);
            fu = g(u)?;
        }
        ax = bx;
        bx = cx;
        cx = u;
        fa = fb;
        fb = fc;
        fc = fu;
        for (t, v) in [(bx, fb), (cx, fc)] {
            if v < best.1 {
                best = (t, v);
            }
        }
    }

    // Brent
    let (mut a, mut b) = if ax < cx { (ax, cx) } else { (cx, ax) };
    let (mut x, mut w, mut v) = (bx, bx, bx);
    let (mut fx, mut fw, mut fv) = (fb, fb, fb);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    for _ in 0..MAX_BRENT_STEPS {
        let xm = 0.5 * (a + b);
        let tol1 = cfg.line_search_tolerance * x.abs() + ZEPS;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x) {
                e = if x >= xm { a - x } else { b - x };
                d = CGOLD * e;
            } else {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
            }
        } else {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = g(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, w, x) = (w, x, u);
            (fv, fw, fx) = (fw, fx, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, w) = (w, u);
                (fv, fw) = (fw, fu);
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    if fx < best.1 {
        best = (x, fx);
    }
    Ok(LineMinimum {
        t: best.0,
        value: best.1,
        bracketed: true,
    })
}

/// Minimizes `f` from `theta0`. Each line search counts as one update
/// against `cfg.max_updates`; the best point seen is returned.
pub fn powell_minimize<F>(mut f: F, theta0: &[f64], cfg: &OptimizerConfig) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    if let Some(bad) = theta0.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            value: *bad,
            theta: theta0.to_vec(),
        });
    }
    let k = theta0.len();
    let mut trace = Trace::default();
    let mut evaluations = Vec::new();
    let mut fun = Counted { f: &mut f, log: &mut evaluations };

    let mut p = theta0.to_vec();
    let mut fret = fun.eval(&p)?;
    if k == 0 {
        trace.converged = true;
        trace.evaluations = evaluations;
        return Ok(Minimum { theta: p, value: fret, trace });
    }
    let mut dirs: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut d = vec![0.0; k];
            d[i] = cfg.initial_step;
            d
        })
        .collect();
    let mut pt = p.clone();

    let step = |fun: &mut Counted<'_, &mut F>,
                    p: &mut Vec<f64>,
                    fret: &mut f64,
                    dir: &[f64],
                    trace: &mut Trace|
     -> Result<()> {
        let lm = line_search(fun, p, dir, *fret, cfg)?;
        if !lm.bracketed {
            trace.bracket_failures += 1;
        }
        if lm.value < *fret {
            *p = along(p, dir, lm.t);
            *fret = lm.value;
        }
        trace.rows.push(TraceRow {
            update: trace.rows.len() + 1,
            objective: *fret,
            theta: p.clone(),
        });
        Ok(())
    };

    'outer: loop {
        let fp = fret;
        let mut ibig = 0;
        let mut del = 0.0;
        for (i, dir) in dirs.iter().enumerate() {
            let before = fret;
            step(&mut fun, &mut p, &mut fret, dir, &mut trace)?;
            if before - fret > del {
                del = before - fret;
                ibig = i;
            }
            if trace.rows.len() >= cfg.max_updates {
                break 'outer;
            }
        }
        if 2.0 * (fp - fret) <= cfg.value_tolerance * (fp.abs() + fret.abs()) + 1e-25 {
            trace.converged = true;
            break;
        }
        let ptt: Vec<f64> = p.iter().zip(&pt).map(|(a, b)| 2.0 * a - b).collect();
        let xit: Vec<f64> = p.iter().zip(&pt).map(|(a, b)| a - b).collect();
        pt.clone_from(&p);
        let fptt = fun.eval(&ptt)?;
        if fptt < fp {
            let t = 2.0 * (fp - 2.0 * fret + fptt) * (fp - fret - del).powi(2) - del * (fp - fptt).powi(2);
            if t < 0.0 && xit.iter().any(|&x| x != 0.0) {
                step(&mut fun, &mut p, &mut fret, &xit, &mut trace)?;
                dirs[ibig] = dirs[k - 1].clone();
                dirs[k - 1] = xit;
                if trace.rows.len() >= cfg.max_updates {
                    break;
                }
            }
        }
    }
    trace.evaluations = evaluations;
    Ok(Minimum {
        theta: p,
        value: fret,
        trace,
    })
}
