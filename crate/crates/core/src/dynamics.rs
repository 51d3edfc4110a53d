//! Equilibria, trajectories and Lyapunov checks.

use std::fmt::Write as _;

use thiserror::Error;

use crate::linalg::{LinalgError, Matrix, RANK_TOL};
use crate::model::{ModelError, Network};
use crate::scalar::{max_abs, Real, Scalar};

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 100;
/// States may dip this far below zero before a trajectory is flagged.
pub const NEGATIVITY_TOL: f64 = 1e-9;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DESCENT_TOL: f64 = 1e-9;
pub const CLASS_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Newton did not converge in {iterations} iterations (residual {residual}, last iterate {last:?})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },
    #[error("entry {index} = {value} must be strictly positive")]
    Domain { index: usize, value: f64 },
    #[error("length mismatch: got {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("Hessian of the class potential is not positive definite")]
    NotConvex,
    #[error("invalid integrator settings: {0}")]
    Settings(String),
}

/// Right-hand side of an autonomous ODE.
pub trait VectorField<T> {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[T]) -> Result<Vec<T>, DynamicsError>;
}

impl<T: Real> VectorField<T> for Network<T> {
    fn dim(&self) -> usize {
        self.num_species()
    }

    /// Tiny negative round-off is clamped to zero for standard networks.
    fn eval(&self, x: &[T]) -> Result<Vec<T>, DynamicsError> {
        if self.is_generalized() {
            return Ok(self.evaluate_field(x)?);
        }
        let tol = T::from_f64_lossy(NEGATIVITY_TOL);
        let clamped: Vec<T> = x
            .iter()
            .map(|&v| if v < T::zero() && v >= -tol { T::zero() } else { v })
            .collect();
        Ok(self.evaluate_field(&clamped)?)
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: NEWTON_TOL,
            max_iterations: NEWTON_MAX_ITER,
        }
    }
}

/// Positive equilibrium in the compatibility class of `x0`.
///
/// Solves `[P S v(x); W^T (x - x0)] = 0` where `P` picks a basis of the row
/// space of `S` and `W` spans `Ker(S^T)`. Steps are halved until the
/// residual drops and clipped to 90% of the distance to the boundary.
pub fn newton_equilibrium<T: Real>(net: &Network<T>, x0: &[T], opts: &NewtonOptions) -> Result<Vec<T>, DynamicsError> {
    let n = net.num_species();
    if x0.len() != n {
        return Err(DynamicsError::Length { got: x0.len(), expected: n });
    }
    if let Some((index, v)) = x0.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
        return Err(DynamicsError::Domain {
            index,
            value: v.to_f64_lossy(),
        });
    }
    let tol = T::tol(RANK_TOL);
    let s = net.s();
    let rows = s.independent_rows(tol);
    let p = s.select_rows(&rows);
    let w = s.transpose().nullspace(tol);
    let wt = w.transpose();
    let anchor = wt.mul_vec(x0);

    let residual = |x: &[T]| -> Result<(Vec<T>, T), DynamicsError> {
        let v = net.mass_action_rates(x)?;
        let sv = s.mul_vec(&v);
        let mut f = p.mul_vec(&v);
        let class: Vec<T> = wt.mul_vec(x).iter().zip(&anchor).map(|(a, b)| *a - *b).collect();
        let norm = T::max_of(max_abs(&sv), max_abs(&class));
        f.extend(class);
        Ok((f, norm))
    };

    let mut x = x0.to_vec();
    let (mut f, mut norm) = residual(&x)?;
    let target = T::from_f64_lossy(opts.tol);
    for _ in 0..opts.max_iterations {
        if norm < target {
            return Ok(x);
        }
        let jv = net.rate_jacobian(&x)?;
        let mut full = p.matmul(&jv).to_rows();
        full.extend(wt.to_rows());
        let jac = Matrix::from_rows(&full);
        let neg_f: Vec<T> = f.iter().map(|v| -*v).collect();
        let Ok(step) = jac.solve(&neg_f) else {
            break;
        };

        let mut alpha = T::one();
        for (xi, di) in x.iter().zip(&step) {
            if *di < T::zero() {
                alpha = alpha.min(T::from_f64_lossy(0.9) * (-*xi / *di));
            }
        }
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<T> = x.iter().zip(&step).map(|(a, b)| *a + alpha * *b).collect();
            if let Ok((tf, tn)) = residual(&trial) {
                if tn < norm || tn < target {
                    x = trial;
                    f = tf;
                    norm = tn;
                    accepted = true;
                    break;
                }
            }
            alpha = alpha / (T::one() + T::one());
        }
        if !accepted {
            break;
        }
    }
    if norm < target {
        return Ok(x);
    }
    Err(DynamicsError::NoConvergence {
        iterations: opts.max_iterations,
        residual: norm.to_f64_lossy(),
        last: x.iter().map(|v| v.to_f64_lossy()).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Classic fourth-order Runge-Kutta with fixed step.
    Rk4 { h: f64 },
    /// Dormand-Prince 5(4) with error control.
    DormandPrince { rtol: f64, atol: f64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::Rk4 { h: DEFAULT_STEP }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrajectoryStatus {
    Complete,
    /// A state entry fell below `-NEGATIVITY_TOL`; the sample is kept.
    LeftOrthant { time: f64, index: usize, value: f64 },
    /// The field could not be evaluated.
    Failed { time: f64, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub lyapunov: Option<Vec<T>>,
    /// `max |C^T x(t) - C^T x(0)|` per sample (zero without conservation laws).
    pub conservation_residual: Vec<T>,
    pub status: TrajectoryStatus,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &[T] {
        self.states.last().expect("trajectory has the initial sample")
    }

    pub fn max_conservation_residual(&self) -> T {
        self.conservation_residual.iter().fold(T::zero(), |a, b| a.max(*b))
    }

    pub fn is_complete(&self) -> bool {
        self.status == TrajectoryStatus::Complete
    }

    /// Attaches `G(x(t))` for every sample.
    pub fn with_lyapunov(mut self, spec: &LyapunovSpec<T>) -> Result<Self, DynamicsError> {
        let values = self
            .states
            .iter()
            .map(|x| pseudo_helmholtz(spec, x))
            .collect::<Result<Vec<_>, _>>()?;
        self.lyapunov = Some(values);
        Ok(self)
    }

    /// Columns `t, <species...>, G, cons_residual`; `G` is empty when absent.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend(names.iter().cloned());
        header.push("G".into());
        header.push("cons_residual".into());
        w.write_record(&header).expect("in-memory write");
        for (k, (t, x)) in self.times.iter().zip(&self.states).enumerate() {
            let mut rec = vec![t.to_f64_lossy().to_string()];
            rec.extend(x.iter().map(|v| v.to_f64_lossy().to_string()));
            rec.push(
                self.lyapunov
                    .as_ref()
                    .map(|g| g[k].to_f64_lossy().to_string())
                    .unwrap_or_default(),
            );
            rec.push(self.conservation_residual[k].to_f64_lossy().to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Integrates `field` from `x0` to `t_end`. `conserved` (n x q) supplies
/// the laws whose drift is recorded.
pub fn integrate<T: Real, F: VectorField<T>>(
    field: &F,
    x0: &[T],
    t_end: T,
    method: &Method,
    conserved: Option<&Matrix<T>>,
) -> Result<Trajectory<T>, DynamicsError> {
    let n = field.dim();
    if x0.len() != n {
        return Err(DynamicsError::Length { got: x0.len(), expected: n });
    }
    if !(t_end > T::zero()) {
        return Err(DynamicsError::Settings("t_end must be positive".into()));
    }
    let ct = conserved.map(|c| c.transpose());
    let totals0 = ct.as_ref().map(|c| c.mul_vec(x0));
    let drift = |x: &[T]| -> T {
        match (&ct, &totals0) {
            (Some(c), Some(t0)) => {
                let t = c.mul_vec(x);
                t.iter().zip(t0).fold(T::zero(), |a, (u, v)| a.max((*u - *v).abs()))
            }
            _ => T::zero(),
        }
    };
    let mut traj = Trajectory {
        times: vec![T::zero()],
        states: vec![x0.to_vec()],
        lyapunov: None,
        conservation_residual: vec![T::zero()],
        status: TrajectoryStatus::Complete,
    };
    let neg = -T::from_f64_lossy(NEGATIVITY_TOL);
    let push = |traj: &mut Trajectory<T>, t: T, x: Vec<T>| -> bool {
        let bad = x.iter().enumerate().find(|(_, v)| **v < neg).map(|(i, v)| (i, *v));
        traj.conservation_residual.push(drift(&x));
        traj.times.push(t);
        traj.states.push(x);
        if let Some((index, value)) = bad {
            traj.status = TrajectoryStatus::LeftOrthant {
                time: t.to_f64_lossy(),
                index,
                value: value.to_f64_lossy(),
            };
            return false;
        }
        true
    };
    let fail = |traj: &mut Trajectory<T>, t: T, e: DynamicsError| {
        traj.status = TrajectoryStatus::Failed {
            time: t.to_f64_lossy(),
            message: e.to_string(),
        };
    };

    match *method {
        Method::Rk4 { h } => {
            if !(h > 0.0) {
                return Err(DynamicsError::Settings("step must be positive".into()));
            }
            let steps = (t_end.to_f64_lossy() / h).round().max(1.0) as usize;
            let h = t_end / <T as Scalar>::from_usize(steps);
            let mut x = x0.to_vec();
            for k in 1..=steps {
                let t = <T as Scalar>::from_usize(k) * h;
                match rk4_step(field, &x, h) {
                    Ok(next) => x = next,
                    Err(e) => {
                        fail(&mut traj, t - h, e);
                        break;
                    }
                }
                if !push(&mut traj, t, x.clone()) {
                    break;
                }
            }
        }
        Method::DormandPrince { rtol, atol } => {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(DynamicsError::Settings("tolerances must be positive".into()));
            }
            let rtol = T::from_f64_lossy(rtol);
            let atol = T::from_f64_lossy(atol);
            let mut t = T::zero();
            let mut x = x0.to_vec();
            let mut h = T::min(t_end, T::from_f64_lossy(1e-3));
            let h_min = t_end * T::from_f64_lossy(1e-14);
            while t < t_end {
                if t + h > t_end {
                    h = t_end - t;
                }
                let (next, err) = match dopri_step(field, &x, h) {
                    Ok(v) => v,
                    Err(_) if h > h_min => {
                        h = h / T::from_f64_lossy(4.0);
                        continue;
                    }
                    Err(e) => {
                        fail(&mut traj, t, e);
                        break;
                    }
                };
                let mut ratio = T::zero();
                for i in 0..n {
                    let scale = atol + rtol * x[i].abs().max(next[i].abs());
                    ratio = ratio.max((err[i] / scale).abs());
                }
                let factor = if ratio > T::zero() {
                    T::from_f64_lossy(0.9) * ratio.powf(T::from_f64_lossy(-0.2))
                } else {
                    T::from_f64_lossy(5.0)
                };
                let factor = factor.max(T::from_f64_lossy(0.2)).min(T::from_f64_lossy(5.0));
                if ratio <= T::one() {
                    t = t + h;
                    x = next;
                    if !push(&mut traj, t, x.clone()) {
                        break;
                    }
                }
                h = h * factor;
                if h < h_min {
                    fail(&mut traj, t, DynamicsError::Settings("step size underflow".into()));
                    break;
                }
            }
        }
    }
    Ok(traj)
}

fn axpy<T: Real>(x: &[T], a: T, k: &[T]) -> Vec<T> {
    x.iter().zip(k).map(|(u, v)| *u + a * *v).collect()
}

fn rk4_step<T: Real, F: VectorField<T>>(field: &F, x: &[T], h: T) -> Result<Vec<T>, DynamicsError> {
    let two = T::one() + T::one();
    let six = T::from_f64_lossy(6.0);
    let k1 = field.eval(x)?;
    let k2 = field.eval(&axpy(x, h / two, &k1))?;
    let k3 = field.eval(&axpy(x, h / two, &k2))?;
    let k4 = field.eval(&axpy(x, h, &k3))?;
    Ok((0..x.len())
        .map(|i| x[i] + h / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect())
}

/// One Dormand-Prince step: fifth-order solution and embedded error estimate.
fn dopri_step<T: Real, F: VectorField<T>>(field: &F, x: &[T], h: T) -> Result<(Vec<T>, Vec<T>), DynamicsError> {
    const A: [&[f64]; 6] = [
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let n = x.len();
    let mut ks: Vec<Vec<T>> = vec![field.eval(x)?];
    for row in A {
        let mut y = x.to_vec();
        for (j, a) in row.iter().enumerate() {
            let a = T::from_f64_lossy(*a) * h;
            for i in 0..n {
                y[i] = y[i] + a * ks[j][i];
            }
        }
        ks.push(field.eval(&y)?);
    }
    let mut next = x.to_vec();
    let mut err = vec![T::zero(); n];
    for (j, k) in ks.iter().enumerate() {
        let b5 = T::from_f64_lossy(B5[j]) * h;
        let de = T::from_f64_lossy(B5[j] - B4[j]) * h;
        for i in 0..n {
            next[i] = next[i] + b5 * k[i];
            err[i] = err[i] + de * k[i];
        }
    }
    Ok((next, err))
}

/// Weighted pseudo-Helmholtz function over a subset of coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovSpec<T> {
    pub indices: Vec<usize>,
    pub weights: Vec<T>,
    pub reference: Vec<T>,
}

impl<T: Real> LyapunovSpec<T> {
    pub fn new(indices: Vec<usize>, weights: Vec<T>, reference: Vec<T>) -> Result<Self, DynamicsError> {
        if indices.is_empty() || indices.len() != weights.len() {
            return Err(DynamicsError::Length {
                got: weights.len(),
                expected: indices.len().max(1),
            });
        }
        if let Some((k, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > T::zero())) {
            return Err(DynamicsError::Domain {
                index: indices[k],
                value: w.to_f64_lossy(),
            });
        }
        for &i in &indices {
            if i >= reference.len() {
                return Err(DynamicsError::Length {
                    got: i + 1,
                    expected: reference.len(),
                });
            }
            if !(reference[i] > T::zero()) {
                return Err(DynamicsError::Domain {
                    index: i,
                    value: reference[i].to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            indices,
            weights,
            reference,
        })
    }

    /// All weights 1 on every coordinate.
    pub fn classic(reference: Vec<T>) -> Result<Self, DynamicsError> {
        let n = reference.len();
        Self::new((0..n).collect(), vec![T::one(); n], reference)
    }
}

fn check_subset<T: Real>(spec: &LyapunovSpec<T>, x: &[T]) -> Result<(), DynamicsError> {
    if x.len() != spec.reference.len() {
        return Err(DynamicsError::Length {
            got: x.len(),
            expected: spec.reference.len(),
        });
    }
    for &i in &spec.indices {
        if !(x[i] > T::zero()) {
            return Err(DynamicsError::Domain {
                index: i,
                value: x[i].to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// `sum_k d_k (x*_i - x_i - x_i ln(x*_i / x_i))` over `i = indices[k]`.
pub fn pseudo_helmholtz<T: Real>(spec: &LyapunovSpec<T>, x: &[T]) -> Result<T, DynamicsError> {
    check_subset(spec, x)?;
    Ok(spec
        .indices
        .iter()
        .zip(&spec.weights)
        .fold(T::zero(), |acc, (&i, &d)| {
            let (xs, xi) = (spec.reference[i], x[i]);
            acc + d * (xs - xi - xi * (xs / xi).ln())
        }))
}

/// `d_k ln(x_i / x*_i)` on the subset, zero elsewhere.
pub fn pseudo_helmholtz_gradient<T: Real>(spec: &LyapunovSpec<T>, x: &[T]) -> Result<Vec<T>, DynamicsError> {
    check_subset(spec, x)?;
    let mut g = vec![T::zero(); x.len()];
    for (&i, &d) in spec.indices.iter().zip(&spec.weights) {
        g[i] = d * (x[i] / spec.reference[i]).ln();
    }
    Ok(g)
}

/// `G(x0) < sum x*`: the trajectory from `x0` stays away from the origin.
pub fn basin_hint<T: Real>(x_star: &[T], x0: &[T]) -> Result<bool, DynamicsError> {
    let spec = LyapunovSpec::classic(x_star.to_vec())?;
    let g = pseudo_helmholtz(&spec, x0)?;
    let total = x_star.iter().fold(T::zero(), |a, b| a + *b);
    Ok(g < total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentReport<T> {
    /// Largest `G(t_{k+1}) - G(t_k)`.
    pub max_increase: T,
    /// Largest `grad G . f` over the samples.
    pub max_derivative: T,
    pub terminal_distance: Option<T>,
    pub samples: usize,
}

impl<T: Real> DescentReport<T> {
    pub fn descends(&self, tol: T) -> bool {
        self.max_derivative <= tol
    }
}

/// Evaluates `G` and its time derivative along `traj`.
pub fn lyapunov_descent_check<T: Real, F: VectorField<T>>(
    field: &F,
    spec: &LyapunovSpec<T>,
    traj: &Trajectory<T>,
    target: Option<&[T]>,
) -> Result<DescentReport<T>, DynamicsError> {
    let mut max_increase = T::neg_infinity();
    let mut max_derivative = T::neg_infinity();
    let mut prev: Option<T> = None;
    for x in &traj.states {
        let g = pseudo_helmholtz(spec, x)?;
        if let Some(p) = prev {
            max_increase = max_increase.max(g - p);
        }
        prev = Some(g);
        let grad = pseudo_helmholtz_gradient(spec, x)?;
        let f = field.eval(x)?;
        let dg = grad.iter().zip(&f).fold(T::zero(), |a, (u, v)| a + *u * *v);
        max_derivative = max_derivative.max(dg);
    }
    let terminal_distance = target.map(|t| {
        traj.last()
            .iter()
            .zip(t)
            .fold(T::zero(), |a, (u, v)| a.max((*u - *v).abs()))
    });
    Ok(DescentReport {
        max_increase: if traj.states.len() > 1 { max_increase } else { T::zero() },
        max_derivative,
        terminal_distance,
        samples: traj.states.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassEquilibrium<T> {
    pub x: Vec<T>,
    /// `||N^T D1 (x - x0)||_inf`, zero exactly when `D1 (x - x0)` lies in `Im(S_hat)`.
    pub residual: T,
    pub iterations: usize,
}

/// The unique `x = x* exp(u)`, `u` in `Ker(S_hat^T)`, with
/// `D1 (x - x0)` in `Im(S_hat)`: the minimiser of the strictly convex
/// `phi(w) = sum_i d_i [x*_i exp((N w)_i) - x0_i (N w)_i]`.
pub fn class_equilibrium<T: Real>(
    recon: &Network<T>,
    d: &[T],
    x_star: &[T],
    x0: &[T],
) -> Result<ClassEquilibrium<T>, DynamicsError> {
    let m = recon.num_species();
    for v in [d, x_star, x0] {
        if v.len() != m {
            return Err(DynamicsError::Length { got: v.len(), expected: m });
        }
        if let Some((index, value)) = v.iter().enumerate().find(|(_, x)| !(**x > T::zero())) {
            return Err(DynamicsError::Domain {
                index,
                value: value.to_f64_lossy(),
            });
        }
    }
    let basis = recon.s().transpose().nullspace(T::tol(RANK_TOL));
    let k = basis.cols();
    if k == 0 {
        return Ok(ClassEquilibrium {
            x: x_star.to_vec(),
            residual: T::zero(),
            iterations: 0,
        });
    }
    let point = |w: &[T]| -> Vec<T> {
        let u = basis.mul_vec(w);
        (0..m).map(|i| x_star[i] * u[i].exp()).collect()
    };
    let phi = |w: &[T]| -> T {
        let u = basis.mul_vec(w);
        (0..m).fold(T::zero(), |a, i| a + d[i] * (x_star[i] * u[i].exp() - x0[i] * u[i]))
    };
    let gradient = |x: &[T]| -> Vec<T> {
        let r: Vec<T> = (0..m).map(|i| d[i] * (x[i] - x0[i])).collect();
        basis.transpose().mul_vec(&r)
    };

    let mut w = vec![T::zero(); k];
    let mut iterations = 0;
    let tol = T::from_f64_lossy(1e-14);
    for it in 0..200 {
        iterations = it;
        let x = point(&w);
        let grad = gradient(&x);
        let scale = (0..m).fold(T::one(), |a, i| a.max(d[i] * x0[i]));
        if max_abs(&grad) <= tol * scale {
            break;
        }
        let mut hess = Matrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let mut s = T::zero();
                for i in 0..m {
                    s = s + basis[(i, a)] * d[i] * x[i] * basis[(i, b)];
                }
                hess[(a, b)] = s;
            }
        }
        hess.cholesky().map_err(|_| DynamicsError::NotConvex)?;
        let neg: Vec<T> = grad.iter().map(|g| -*g).collect();
        let step = hess.solve(&neg)?;
        let slope = grad.iter().zip(&step).fold(T::zero(), |a, (g, s)| a + *g * *s);
        let f0 = phi(&w);
        let mut alpha = T::one();
        let c1 = T::from_f64_lossy(1e-4);
        loop {
            let trial = axpy(&w, alpha, &step);
            if phi(&trial) <= f0 + c1 * alpha * slope || alpha < T::from_f64_lossy(1e-12) {
                w = trial;
                break;
            }
            alpha = alpha / (T::one() + T::one());
        }
    }
    let x = point(&w);
    let residual = max_abs(&gradient(&x));
    Ok(ClassEquilibrium { x, residual, iterations })
}

/// Writes `x` as a comma-separated tuple, `(1, 2.5)`.
pub fn format_state<T: Scalar>(x: &[T]) -> String {
    let mut s = String::from("(");
    for (i, v) in x.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{}", v.to_f64_lossy());
    }
    s.push(')');
    s
}
