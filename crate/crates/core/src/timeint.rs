//! Explicit Runge–Kutta integrators with embedded error control.

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Four-stage third-order SSP scheme with a second-order companion.
    Ssprk43,
    /// Classical fourth-order Runge–Kutta, fixed step only.
    Rk4,
    /// Dormand–Prince 5(4).
    Dp54,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ssprk43 => "ssprk43",
            Method::Rk4 => "rk4",
            Method::Dp54 => "dp54",
        }
    }

    pub fn is_adaptive(self) -> bool {
        !matches!(self, Method::Rk4)
    }

    fn tableau(self) -> Tableau {
        match self {
            Method::Ssprk43 => Tableau {
                c: vec![0.0, 0.5, 1.0, 0.5],
                a: vec![
                    vec![],
                    vec![0.5],
                    vec![0.5, 0.5],
                    vec![1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
                ],
                b: vec![1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5],
                b_hat: Some(vec![0.25, 0.25, 0.25, 0.25]),
                order: 3,
                fsal: false,
            },
            Method::Rk4 => Tableau {
                c: vec![0.0, 0.5, 0.5, 1.0],
                a: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
                b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
                b_hat: None,
                order: 4,
                fsal: false,
            },
            Method::Dp54 => Tableau {
                c: vec![0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0],
                a: vec![
                    vec![],
                    vec![1.0 / 5.0],
                    vec![3.0 / 40.0, 9.0 / 40.0],
                    vec![44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
                    vec![19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
                    vec![9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
                    vec![35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
                ],
                b: vec![35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0],
                b_hat: Some(vec![
                    5179.0 / 57600.0,
                    0.0,
                    7571.0 / 16695.0,
                    393.0 / 640.0,
                    -92097.0 / 339200.0,
                    187.0 / 2100.0,
                    1.0 / 40.0,
                ]),
                order: 5,
                fsal: true,
            },
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ssprk43" => Ok(Method::Ssprk43),
            "rk4" | "rk4_fixed" => Ok(Method::Rk4),
            "dp54" | "rk5_adaptive" => Ok(Method::Dp54),
            _ => Err(format!("unknown time integrator '{s}'")),
        }
    }
}

struct Tableau {
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    b_hat: Option<Vec<f64>>,
    /// Order of the propagated solution.
    order: usize,
    /// Last stage is the derivative at the new state.
    fsal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub abstol: f64,
    pub reltol: f64,
    /// Starting step; chosen automatically when `None`.
    pub dt_init: Option<f64>,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_final: f64,
    /// Attempted steps (accepted plus rejected) before [`TimeError::TooManySteps`].
    pub max_steps: usize,
    /// Return early, without error, after this many accepted steps.
    pub stop_after: Option<usize>,
}

impl IntegratorConfig {
    pub fn adaptive(method: Method, t_final: f64, abstol: f64, reltol: f64) -> Self {
        Self {
            method,
            abstol,
            reltol,
            dt_init: None,
            dt_min: 1e-14,
            dt_max: f64::INFINITY,
            t_final,
            max_steps: 10_000_000,
            stop_after: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Time at the end of the step if accepted, at its start otherwise.
    pub t: f64,
    pub dt: f64,
    pub accepted: bool,
    pub error_estimate: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntegrationLog {
    pub accepted: usize,
    pub rejected: usize,
    pub records: Vec<StepRecord>,
    /// Time of the last accepted step; short of `t_final` after an early stop.
    pub t_end: f64,
}

#[derive(Debug, Error)]
pub enum TimeError<E: std::error::Error + 'static> {
    #[error("right-hand side failed at t = {t}: {source}")]
    Rhs {
        t: f64,
        #[source]
        source: E,
    },
    #[error("step size {dt:.3e} fell below the minimum at t = {t}")]
    StepUnderflow {
        t: f64,
        dt: f64,
        /// Error from the last failed stage evaluation, if that caused the rejections.
        last_failure: Option<E>,
    },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step limit {0} reached")]
    TooManySteps(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("callback aborted at t = {t}: {source}")]
    Callback {
        t: f64,
        #[source]
        source: E,
    },
}

/// Where the first stage of the next step comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FirstStage {
    Evaluate,
    /// Last stage of the previous accepted step (FSAL).
    FromLast,
    /// Same state as the rejected attempt.
    Reuse,
}

/// Stage storage for one explicit Runge–Kutta step.
struct Stepper {
    tab: Tableau,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    first: FirstStage,
}

impl Stepper {
    fn new(method: Method, n: usize) -> Self {
        let tab = method.tableau();
        let stages = tab.b.len();
        Self {
            tab,
            k: vec![vec![0.0; n]; stages],
            tmp: vec![0.0; n],
            first: FirstStage::Evaluate,
        }
    }

    /// One step from `(t, u)`; the new state goes to `out` and the embedded
    /// difference to `err` when the method has one.
    fn step<E, F>(
        &mut self,
        rhs: &mut F,
        t: f64,
        dt: f64,
        u: &[f64],
        out: &mut [f64],
        err: Option<&mut [f64]>,
    ) -> Result<(), E>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    {
        let s = self.tab.b.len();
        let n = u.len();
        match self.first {
            FirstStage::FromLast if self.tab.fsal => {
                let (first, rest) = self.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[s - 2]);
            }
            FirstStage::Reuse => {}
            _ => rhs(t, u, &mut self.k[0])?,
        }
        // a failed evaluation below leaves k[0] intact for the retry
        self.first = FirstStage::Reuse;
        for i in 1..s {
            self.tmp.copy_from_slice(u);
            for (j, &a) in self.tab.a[i].iter().enumerate() {
                if a != 0.0 {
                    let kj = &self.k[j];
                    for x in 0..n {
                        self.tmp[x] += dt * a * kj[x];
                    }
                }
            }
            let ti = t + self.tab.c[i] * dt;
            let (_, tail) = self.k.split_at_mut(i);
            rhs(ti, &self.tmp, &mut tail[0])?;
        }
        if self.tab.fsal {
            // last stage was evaluated at the new state itself
            out.copy_from_slice(&self.tmp);
        } else {
            out.copy_from_slice(u);
            for (j, &b) in self.tab.b.iter().enumerate() {
                if b != 0.0 {
                    let kj = &self.k[j];
                    for x in 0..n {
                        out[x] += dt * b * kj[x];
                    }
                }
            }
        }
        if let (Some(e), Some(bh)) = (err, &self.tab.b_hat) {
            e.iter_mut().for_each(|x| *x = 0.0);
            for j in 0..s {
                let d = self.tab.b[j] - bh[j];
                if d != 0.0 {
                    let kj = &self.k[j];
                    for x in 0..n {
                        e[x] += dt * d * kj[x];
                    }
                }
            }
        }
        Ok(())
    }
}

fn weighted_rms(err: &[f64], u0: &[f64], u1: &[f64], abstol: f64, reltol: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..err.len() {
        let sc = abstol + reltol * u0[i].abs().max(u1[i].abs());
        let r = err[i] / sc;
        s += r * r;
    }
    (s / err.len().max(1) as f64).sqrt()
}

/// Hairer's starting-step heuristic.
fn initial_step<E, F>(rhs: &mut F, t: f64, u: &[f64], order: usize, cfg: &IntegratorConfig) -> Result<f64, E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
{
    let n = u.len();
    let sc: Vec<f64> = u.iter().map(|x| cfg.abstol + cfg.reltol * x.abs()).collect();
    let norm = |v: &[f64]| -> f64 {
        (v.iter().zip(&sc).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt()
    };
    let mut f0 = vec![0.0; n];
    rhs(t, u, &mut f0)?;
    let d0 = norm(u);
    let d1 = norm(&f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.t_final - t);
    let u1: Vec<f64> = u.iter().zip(&f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; n];
    rhs(t + h0, &u1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(&f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / m).powf(1.0 / (order as f64 + 1.0))
    };
    Ok((100.0 * h0).min(h1).min(cfg.dt_max))
}

/// Adaptive integration from `t = 0` to `cfg.t_final`, landing exactly on
/// `t_final`. `callback` runs after every accepted step.
pub fn integrate<E, F, C>(
    mut rhs: F,
    u: &mut [f64],
    cfg: &IntegratorConfig,
    mut callback: C,
) -> Result<IntegrationLog, TimeError<E>>
where
    E: std::error::Error + 'static,
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    C: FnMut(&StepRecord, &[f64]) -> Result<(), E>,
{
    if !cfg.method.is_adaptive() {
        return Err(TimeError::Config(format!("{} has no error estimate", cfg.method.name())));
    }
    if !(cfg.abstol > 0.0 && cfg.reltol > 0.0) {
        return Err(TimeError::Config("tolerances must be positive".into()));
    }
    if !(cfg.dt_min <= cfg.dt_max) {
        return Err(TimeError::Config("dt_min exceeds dt_max".into()));
    }
    let n = u.len();
    let mut stepper = Stepper::new(cfg.method, n);
    let order = stepper.tab.order;
    // the controller works with the order of the embedded pair's lower member
    let k_exp = order as f64;
    let (beta1, beta2) = (0.7 / k_exp, 0.4 / k_exp);
    let safety = 0.9;

    let mut t = 0.0;
    let mut log = IntegrationLog::default();
    let mut dt = match cfg.dt_init {
        Some(dt) => dt,
        None => initial_step(&mut rhs, t, u, order, cfg).map_err(|source| TimeError::Rhs { t, source })?,
    };
    dt = dt.clamp(cfg.dt_min, cfg.dt_max);
    let mut err_prev: f64 = 1e-4;
    let mut unew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut last_failure: Option<E> = None;

    while t < cfg.t_final {
        if cfg.stop_after.is_some_and(|n| log.accepted >= n) {
            break;
        }
        if log.accepted + log.rejected >= cfg.max_steps {
            return Err(TimeError::TooManySteps(cfg.max_steps));
        }
        let remaining = cfg.t_final - t;
        let last = dt >= remaining * (1.0 - 1e-12);
        let h = if last { remaining } else { dt };

        let outcome = stepper.step(&mut rhs, t, h, u, &mut unew, Some(&mut err));
        let e = match outcome {
            Ok(()) if unew.iter().all(|x| x.is_finite()) => {
                weighted_rms(&err, u, &unew, cfg.abstol, cfg.reltol)
            }
            Ok(()) => f64::INFINITY,
            Err(source) => {
                last_failure = Some(source);
                f64::INFINITY
            }
        };

        if e <= 1.0 {
            u.copy_from_slice(&unew);
            t = if last { cfg.t_final } else { t + h };
            log.accepted += 1;
            stepper.first = FirstStage::FromLast;
            let rec = StepRecord {
                step: log.accepted + log.rejected,
                t,
                dt: h,
                accepted: true,
                error_estimate: e,
            };
            log.records.push(rec);
            callback(&rec, u).map_err(|source| TimeError::Callback { t, source })?;
            let e_safe = e.max(1e-10);
            let factor = (safety * e_safe.powf(-beta1) * err_prev.powf(beta2)).clamp(0.2, 5.0);
            err_prev = e_safe;
            if !last {
                dt = (h * factor).min(cfg.dt_max);
            }
            last_failure = None;
        } else {
            log.rejected += 1;
            log.records.push(StepRecord {
                step: log.accepted + log.rejected,
                t,
                dt: h,
                accepted: false,
                error_estimate: e,
            });
            let factor = if e.is_finite() {
                (safety * e.powf(-1.0 / k_exp)).clamp(0.2, 0.9)
            } else {
                0.25
            };
            dt = h * factor;
            if dt < cfg.dt_min {
                return Err(TimeError::StepUnderflow { t, dt, last_failure });
            }
        }
    }
    log.t_end = t;
    Ok(log)
}

/// Fixed-step march to `t_final`; a shorter final step absorbs any remainder.
pub fn integrate_fixed<E, F, C>(
    mut rhs: F,
    u: &mut [f64],
    method: Method,
    dt: f64,
    t_final: f64,
    mut callback: C,
) -> Result<IntegrationLog, TimeError<E>>
where
    E: std::error::Error + 'static,
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    C: FnMut(&StepRecord, &[f64]) -> Result<(), E>,
{
    if !(dt > 0.0) {
        return Err(TimeError::Config("dt must be positive".into()));
    }
    let ratio = t_final / dt;
    let whole = ratio.round();
    let steps = if (ratio - whole).abs() <= 1e-9 * ratio.max(1.0) {
        whole as usize
    } else {
        ratio.ceil() as usize
    };
    let mut stepper = Stepper::new(method, u.len());
    let mut unew = vec![0.0; u.len()];
    let mut log = IntegrationLog::default();
    let mut t = 0.0;
    for s in 0..steps {
        let h = if s + 1 == steps { t_final - t } else { dt };
        stepper
            .step(&mut rhs, t, h, u, &mut unew, None)
            .map_err(|source| TimeError::Rhs { t, source })?;
        if !unew.iter().all(|x| x.is_finite()) {
            return Err(TimeError::NonFinite { t: t + h });
        }
        u.copy_from_slice(&unew);
        stepper.first = FirstStage::FromLast;
        t = if s + 1 == steps { t_final } else { (s + 1) as f64 * dt };
        log.accepted += 1;
        let rec = StepRecord {
            step: s + 1,
            t,
            dt: h,
            accepted: true,
            error_estimate: 0.0,
        };
        log.records.push(rec);
        callback(&rec, u).map_err(|source| TimeError::Callback { t, source })?;
    }
    log.t_end = t;
    Ok(log)
}
