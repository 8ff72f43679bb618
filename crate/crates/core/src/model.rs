//! Systems of conservation laws u_t + f(u)_x = 0: flux, Jacobian,
//! eigenstructure with the strength-normalized eigenvector fields, wave
//! curves (integral curves and Hugoniot loci) and averaged matrices.

use crate::error::{Error, Result};
use crate::linalg::{integrate_matrix_unit, Matrix, Vector, MAX_DIM};
use serde::{Deserialize, Serialize};

/// Characteristic field type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    GenuinelyNonlinear,
    LinearlyDegenerate,
}

/// Compact axis-aligned box of admissible states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    lo: Vector,
    hi: Vector,
}

impl DomainBox {
    pub fn new(lo: Vector, hi: Vector) -> Self {
        DomainBox { lo, hi }
    }

    pub fn contains(&self, u: &Vector) -> bool {
        (0..u.dim()).all(|i| u[i] >= self.lo[i] && u[i] <= self.hi[i])
    }

    /// Looser membership used for intermediate Newton iterates.
    fn contains_padded(&self, u: &Vector, pad_frac: f64) -> bool {
        (0..u.dim()).all(|i| {
            let pad = pad_frac * (self.hi[i] - self.lo[i]);
            u[i] >= self.lo[i] - pad && u[i] <= self.hi[i] + pad
        })
    }

    pub fn center(&self) -> Vector {
        self.lo.lerp(&self.hi, 0.5)
    }

    pub fn lo(&self) -> &Vector {
        &self.lo
    }

    pub fn hi(&self) -> &Vector {
        &self.hi
    }

    /// Regular grid with `per_dim` points per dimension, for validation
    /// sampling. Deterministic ordering.
    pub fn sample_grid(&self, per_dim: usize) -> Vec<Vector> {
        let n = self.lo.dim();
        let total = per_dim.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut u = Vector::zeros(n);
            let mut rem = flat;
            for i in 0..n {
                let k = rem % per_dim;
                rem /= per_dim;
                let t = if per_dim == 1 { 0.5 } else { k as f64 / (per_dim - 1) as f64 };
                u[i] = self.lo[i] + t * (self.hi[i] - self.lo[i]);
            }
            out.push(u);
        }
        out
    }
}

/// Eigen-decomposition of Df(u) with the solver normalization: for a
/// genuinely nonlinear field the right eigenvector satisfies
/// `Dlambda_i . r_i = 1`, for a linearly degenerate field `|r_i| = 1` with a
/// fixed continuous orientation. Left rows are the exact dual basis.
#[derive(Debug, Clone, Copy)]
pub struct EigenStructure {
    n: usize,
    lambdas: Vector,
    right: [Vector; MAX_DIM],
    left: [Vector; MAX_DIM],
}

impl EigenStructure {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lambda(&self, i: usize) -> f64 {
        self.lambdas[i]
    }

    pub fn lambdas(&self) -> &Vector {
        &self.lambdas
    }

    pub fn r(&self, i: usize) -> &Vector {
        &self.right[i]
    }

    pub fn l(&self, i: usize) -> &Vector {
        &self.left[i]
    }
}

type StateFn<T> = Box<dyn Fn(&Vector) -> T + Send + Sync>;

/// A strictly hyperbolic system of conservation laws on a compact box.
pub struct SystemModel {
    name: String,
    n: usize,
    flux: StateFn<Vector>,
    jacobian: StateFn<Matrix>,
    kinds: Vec<FieldKind>,
    gn_constants: Vec<f64>,
    domain: DomainBox,
    /// Designated component per family fixing the eigenvector orientation:
    /// the component of largest magnitude at the box center must be positive.
    orient_component: Vec<usize>,
    lambda_sup: f64,
}

pub const HYPERBOLICITY_GAP: f64 = 1e-12;
// Central-difference step balancing truncation against roundoff for the
// directional eigenvalue derivative.
const DERIVATIVE_STEP: f64 = 3e-5;

impl std::fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.debug_struct("SystemModel")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("kinds", &self.kinds)
            .field("gn_constants", &self.gn_constants)
            .finish()
    }
}

impl SystemModel {
    pub fn new(
        name: impl Into<String>,
        kinds: Vec<FieldKind>,
        domain: DomainBox,
        flux: StateFn<Vector>,
        jacobian: StateFn<Matrix>,
    ) -> Result<Self> {
        let n = kinds.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidModel(format!(
                "system size {n} outside 1..={MAX_DIM}"
            )));
        }
        let mut model = SystemModel {
            name: name.into(),
            n,
            flux,
            jacobian,
            kinds,
            gn_constants: vec![0.0; n],
            domain,
            orient_component: vec![0; n],
            lambda_sup: 0.0,
        };
        model.fix_orientation()?;
        model.calibrate_bounds()?;
        Ok(model)
    }

    fn fix_orientation(&mut self) -> Result<()> {
        let c = self.domain.center();
        let a = (self.jacobian)(&c);
        let lambdas = a.real_eigenvalues()?;
        for i in 0..self.n {
            let r = a.right_eigenvector(lambdas[i])?;
            let mut best = 0;
            for d in 1..self.n {
                if r[d].abs() > r[best].abs() {
                    best = d;
                }
            }
            self.orient_component[i] = best;
        }
        Ok(())
    }

    /// Sample the box for sup lambda_N (used for the non-physical speed) and
    /// the per-field genuine-nonlinearity constants.
    fn calibrate_bounds(&mut self) -> Result<()> {
        let mut sup = f64::NEG_INFINITY;
        let mut min_gn = vec![f64::INFINITY; self.n];
        for u in self.domain.sample_grid(9) {
            let a = (self.jacobian)(&u);
            let lambdas = a.real_eigenvalues()?;
            sup = sup.max(lambdas[self.n - 1]);
            for i in 0..self.n {
                if self.kinds[i] == FieldKind::GenuinelyNonlinear {
                    let r = a.right_eigenvector(lambdas[i])?;
                    let d = self.dlambda_dot(&u, &a, &lambdas, i, &r)?;
                    min_gn[i] = min_gn[i].min(d.abs());
                }
            }
        }
        self.lambda_sup = sup;
        for i in 0..self.n {
            if self.kinds[i] == FieldKind::GenuinelyNonlinear {
                if min_gn[i] < 1e-8 {
                    return Err(Error::InvalidModel(format!(
                        "field {i} declared genuinely nonlinear but |Dlambda.r| drops to {:.3e}",
                        min_gn[i]
                    )));
                }
                self.gn_constants[i] = 0.99 * min_gn[i];
            }
        }
        Ok(())
    }

    /// Directional derivative Dlambda_i(u) . r via first-order perturbation
    /// of the Jacobian field: l_i (dA[r]) r_i with l_i . r_i = 1.
    fn dlambda_dot(
        &self,
        u: &Vector,
        a: &Matrix,
        lambdas: &Vector,
        i: usize,
        r: &Vector,
    ) -> Result<f64> {
        let h = DERIVATIVE_STEP;
        let ap = (self.jacobian)(&u.axpy(h, r));
        let am = (self.jacobian)(&u.axpy(-h, r));
        let da = ap.add(&am.scale(-1.0)).scale(1.0 / (2.0 * h));
        // left eigenvector of a for lambda_i: right eigenvector of a^T
        let mut at = Matrix::zeros(self.n);
        for p in 0..self.n {
            for q in 0..self.n {
                at.set(p, q, a.get(q, p));
            }
        }
        let l = at.right_eigenvector(lambdas[i])?;
        let lr = l.dot(r);
        if lr.abs() < 1e-12 {
            return Err(Error::NonHyperbolic {
                state: u.as_slice().to_vec(),
                gap: lr.abs(),
            });
        }
        Ok(l.dot(&da.matvec(r)) / lr)
    }

    pub fn n_eqs(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self, i: usize) -> FieldKind {
        self.kinds[i]
    }

    pub fn kinds(&self) -> &[FieldKind] {
        &self.kinds
    }

    /// Genuine-nonlinearity constant k of a GN field (0.0 for LD fields).
    pub fn gn_constant(&self, i: usize) -> f64 {
        self.gn_constants[i]
    }

    pub fn min_gn_constant(&self) -> f64 {
        self.gn_constants
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k == FieldKind::GenuinelyNonlinear)
            .map(|(c, _)| *c)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// Sampled sup of lambda_N over the domain box.
    pub fn lambda_sup(&self) -> f64 {
        self.lambda_sup
    }

    /// Speed assigned to non-physical fronts, strictly above every
    /// characteristic speed of the box.
    pub fn np_speed(&self) -> f64 {
        self.lambda_sup + 1.0
    }

    pub fn flux(&self, u: &Vector) -> Vector {
        (self.flux)(u)
    }

    pub fn jacobian_at(&self, u: &Vector) -> Matrix {
        (self.jacobian)(u)
    }

    fn check_domain(&self, u: &Vector) -> Result<()> {
        if self.domain.contains(u) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                state: u.as_slice().to_vec(),
            })
        }
    }

    /// Eigenvalues only, cheaper than the full decomposition.
    pub fn lambdas_at(&self, u: &Vector) -> Result<Vector> {
        let a = (self.jacobian)(u);
        let lambdas = a.real_eigenvalues()?;
        for i in 1..self.n {
            let gap = lambdas[i] - lambdas[i - 1];
            if gap < HYPERBOLICITY_GAP {
                return Err(Error::NonHyperbolic {
                    state: u.as_slice().to_vec(),
                    gap,
                });
            }
        }
        Ok(lambdas)
    }

    pub fn lambda_at(&self, u: &Vector, i: usize) -> Result<f64> {
        Ok(self.lambdas_at(u)?[i])
    }

    /// Full eigenstructure at u with the solver normalization.
    pub fn eigen_at(&self, u: &Vector) -> Result<EigenStructure> {
        self.check_domain(u)?;
        let a = (self.jacobian)(u);
        let lambdas = a.real_eigenvalues()?;
        for i in 1..self.n {
            let gap = lambdas[i] - lambdas[i - 1];
            if gap < HYPERBOLICITY_GAP {
                return Err(Error::NonHyperbolic {
                    state: u.as_slice().to_vec(),
                    gap,
                });
            }
        }
        let mut right = [Vector::zeros(self.n); MAX_DIM];
        for i in 0..self.n {
            let mut r = a.right_eigenvector(lambdas[i])?;
            match self.kinds[i] {
                FieldKind::GenuinelyNonlinear => {
                    let d = self.dlambda_dot(u, &a, &lambdas, i, &r)?;
                    // r/(Dlambda.r) is invariant under r -> -r, so this is a
                    // continuous choice and Dlambda.r_tilde = 1 holds.
                    r = r.scale(1.0 / d);
                }
                FieldKind::LinearlyDegenerate => {
                    if r[self.orient_component[i]] < 0.0 {
                        r = r.scale(-1.0);
                    }
                }
            }
            right[i] = r;
        }
        let rmat = Matrix::from_columns(&right[..self.n]);
        let linv = rmat.inverse()?;
        let mut left = [Vector::zeros(self.n); MAX_DIM];
        for (i, l) in left.iter_mut().enumerate().take(self.n) {
            *l = linv.row(i);
        }
        Ok(EigenStructure {
            n: self.n,
            lambdas,
            right,
            left,
        })
    }

    /// Point on the integral curve of the normalized eigenvector field,
    /// Psi_i(s)(u0) for s >= 0 (rarefaction side for GN fields; both signs
    /// are meaningful for LD fields, and negative s is also used internally
    /// as the seed of the shock-branch Newton).
    pub fn rarefaction_point(&self, u0: &Vector, family: usize, s: f64) -> Result<Vector> {
        self.check_domain(u0)?;
        if s == 0.0 {
            return Ok(*u0);
        }
        let n_steps = 8usize.max((s.abs() / 1e-3).ceil() as usize);
        let h = s / n_steps as f64;
        let left_domain = || Error::LeftDomain {
            family,
            strength: s,
        };
        let rhs = |u: &Vector| -> Result<Vector> {
            match self.eigen_at(u) {
                Ok(e) => Ok(e.right[family]),
                Err(Error::OutOfDomain { .. }) => Err(left_domain()),
                Err(e) => Err(e),
            }
        };
        let mut u = *u0;
        for _ in 0..n_steps {
            let k1 = rhs(&u)?;
            let k2 = rhs(&u.axpy(h / 2.0, &k1))?;
            let k3 = rhs(&u.axpy(h / 2.0, &k2))?;
            let k4 = rhs(&u.axpy(h, &k3))?;
            let incr = k1.axpy(2.0, &k2).axpy(2.0, &k3).add(&k4);
            u = u.axpy(h / 6.0, &incr);
            if !self.domain.contains(&u) {
                return Err(left_domain());
            }
        }
        Ok(u)
    }

    /// Averaged matrix A(u_l, u_r) = int_0^1 A(theta u_r + (1-theta) u_l).
    /// Exactly symmetric in its arguments.
    pub fn averaged_matrix(&self, ul: &Vector, ur: &Vector) -> Result<Matrix> {
        self.check_domain(ul)?;
        self.check_domain(ur)?;
        Ok(integrate_matrix_unit(self.n, |t| {
            (self.jacobian)(&ul.lerp(ur, t))
        }))
    }

    /// i-th eigenvalue of the averaged matrix: the Rankine-Hugoniot speed of
    /// an i-jump [ul, ur], and the mean speed assigned to rarefaction jumps.
    pub fn averaged_lambda(&self, ul: &Vector, ur: &Vector, family: usize) -> Result<f64> {
        let a = self.averaged_matrix(ul, ur)?;
        Ok(a.real_eigenvalues()?[family])
    }

    /// Point on the i-th Hugoniot locus through u0 with strength parameter s,
    /// together with the Rankine-Hugoniot speed. For GN fields the strength
    /// is normalized as the eigenvalue jump lambda_i(u) - lambda_i(u0) = s
    /// (shocks have s < 0); for LD fields the locus coincides with the
    /// integral curve and s is its parameter.
    pub fn hugoniot_point(&self, u0: &Vector, family: usize, s: f64) -> Result<(Vector, f64)> {
        self.check_domain(u0)?;
        if self.kinds[family] == FieldKind::LinearlyDegenerate {
            let u = self.rarefaction_point(u0, family, s)?;
            let speed = self.averaged_lambda(u0, &u, family)?;
            return Ok((u, speed));
        }
        let lambda0 = self.lambda_at(u0, family)?;
        // Residual: RH components projected on the dual basis at u0 for
        // j != family, plus the strength normalization as the scalar
        // equation for j = family.
        let eig0 = self.eigen_at(u0)?;
        let f0 = (self.flux)(u0);
        let residual = |u: &Vector| -> Result<Vector> {
            let speed = self.averaged_lambda(u0, u, family)?;
            let rh = (self.flux)(u)
                .sub(&f0)
                .sub(&u.sub(u0).scale(speed));
            let mut res = Vector::zeros(self.n);
            for j in 0..self.n {
                if j == family {
                    res[j] = self.lambda_at(u, family)? - lambda0 - s;
                } else {
                    res[j] = eig0.left[j].dot(&rh);
                }
            }
            Ok(res)
        };

        let mut u = self.rarefaction_point(u0, family, s).or_else(|_| {
            // Seed from the tangent if the ODE continuation exits the box.
            Ok::<Vector, Error>(u0.axpy(s, &eig0.right[family]))
        })?;
        let mut res = residual(&u)?;
        let tol = 1e-13;
        let max_iter = 50;
        for iter in 0..max_iter {
            if res.norm_inf() <= tol {
                break;
            }
            if iter == max_iter - 1 {
                return Err(Error::NoConvergence {
                    op: "hugoniot_point",
                    iterations: max_iter,
                    residual: res.norm_inf(),
                });
            }
            // Finite-difference Jacobian of the residual.
            let mut jac = Matrix::zeros(self.n);
            let fd = 1e-7;
            for col in 0..self.n {
                let mut up = u;
                up[col] += fd;
                let rp = residual(&up)?;
                for row in 0..self.n {
                    jac.set(row, col, (rp[row] - res[row]) / fd);
                }
            }
            let step = jac.solve(&res)?;
            // Damped update: halve until the residual stops growing.
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let cand = u.axpy(-alpha, &step);
                if self.domain.contains_padded(&cand, 0.1) {
                    if let Ok(rc) = residual(&cand) {
                        if rc.norm_inf() < res.norm_inf() {
                            u = cand;
                            res = rc;
                            accepted = true;
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(Error::NoConvergence {
                    op: "hugoniot_point",
                    iterations: iter + 1,
                    residual: res.norm_inf(),
                });
            }
        }
        if !self.domain.contains(&u) {
            return Err(Error::LeftDomain {
                family,
                strength: s,
            });
        }
        let speed = self.averaged_lambda(u0, &u, family)?;
        Ok((u, speed))
    }

    /// Composite wave-curve point: integral curve for s >= 0 or LD fields,
    /// Hugoniot locus for GN fields with s < 0.
    pub fn wave_curve_point(&self, u0: &Vector, family: usize, s: f64) -> Result<Vector> {
        if s >= 0.0 || self.kinds[family] == FieldKind::LinearlyDegenerate {
            self.rarefaction_point(u0, family, s)
        } else {
            Ok(self.hugoniot_point(u0, family, s)?.0)
        }
    }

    /// Left eigenvector rows of the pointwise normalized basis averaged
    /// along the segment [ul, ur] (the non-shock rule of the strength
    /// parameterization). Used to project non-physical jumps on the wave
    /// families.
    pub fn averaged_left_matrix(&self, ul: &Vector, ur: &Vector) -> Result<Matrix> {
        self.check_domain(ul)?;
        self.check_domain(ur)?;
        let mut rows = [Vector::zeros(self.n); MAX_DIM];
        for (i, row) in rows.iter_mut().enumerate().take(self.n) {
            let f = |t: f64| -> Vector {
                match self.eigen_at(&ul.lerp(ur, t)) {
                    Ok(e) => e.left[i],
                    Err(_) => Vector::zeros(self.n),
                }
            };
            *row = crate::linalg::integrate_vector_unit(f);
        }
        let mut m = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, rows[i][j]);
            }
        }
        Ok(m)
    }

    /// Model self-check on a sampled grid: strict hyperbolicity, the
    /// genuine-nonlinearity bound, and agreement of the Jacobian closure
    /// with finite differences of the flux.
    pub fn validate(&self, per_dim: usize) -> Result<()> {
        for u in self.domain.sample_grid(per_dim) {
            let a = (self.jacobian)(&u);
            let lambdas = a.real_eigenvalues()?;
            for i in 1..self.n {
                let gap = lambdas[i] - lambdas[i - 1];
                if gap < HYPERBOLICITY_GAP {
                    return Err(Error::NonHyperbolic {
                        state: u.as_slice().to_vec(),
                        gap,
                    });
                }
            }
            for i in 0..self.n {
                let r = a.right_eigenvector(lambdas[i])?;
                let d = self.dlambda_dot(&u, &a, &lambdas, i, &r)?;
                match self.kinds[i] {
                    FieldKind::GenuinelyNonlinear => {
                        if d.abs() < self.gn_constants[i] {
                            return Err(Error::InvalidModel(format!(
                                "|Dlambda_{i}.r| = {:.3e} below k = {:.3e} at {:?}",
                                d.abs(),
                                self.gn_constants[i],
                                u.as_slice()
                            )));
                        }
                    }
                    FieldKind::LinearlyDegenerate => {
                        if d.abs() > 1e-7 {
                            return Err(Error::InvalidModel(format!(
                                "field {i} declared linearly degenerate but Dlambda.r = {d:.3e}"
                            )));
                        }
                    }
                }
            }
            // Jacobian against finite differences of the flux.
            let scale = 1.0_f64.max(u.norm_inf());
            let h = DERIVATIVE_STEP * scale;
            for col in 0..self.n {
                let mut up = u;
                let mut um = u;
                up[col] += h;
                um[col] -= h;
                let df = (self.flux)(&up).sub(&(self.flux)(&um)).scale(1.0 / (2.0 * h));
                for row in 0..self.n {
                    let got = a.get(row, col);
                    let want = df[row];
                    let denom = 1.0_f64.max(want.abs());
                    if (got - want).abs() / denom > 1e-6 {
                        return Err(Error::InvalidModel(format!(
                            "jacobian[{row}][{col}] = {got} disagrees with flux FD {want} at {:?}",
                            u.as_slice()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One monomial of a polynomial flux component: coef * prod u_j^powers[j].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolyTerm {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Serializable system descriptor; `build` produces the working model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Burgers {
        #[serde(default = "default_burgers_range")]
        range: [f64; 2],
    },
    PSystem {
        gamma: f64,
        #[serde(default = "default_v_range")]
        v_range: [f64; 2],
        #[serde(default = "default_w_range")]
        w_range: [f64; 2],
    },
    /// Polynomial flux, one list of monomials per equation.
    Polynomial {
        flux: Vec<Vec<PolyTerm>>,
        kinds: Vec<FieldKind>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

fn default_burgers_range() -> [f64; 2] {
    [-2.0, 2.0]
}
fn default_v_range() -> [f64; 2] {
    [0.5, 2.0]
}
fn default_w_range() -> [f64; 2] {
    [-1.0, 1.0]
}

impl SystemSpec {
    pub fn build(&self) -> Result<SystemModel> {
        match self {
            SystemSpec::Burgers { range } => burgers_on(range[0], range[1]),
            SystemSpec::PSystem {
                gamma,
                v_range,
                w_range,
            } => p_system_on(*gamma, *v_range, *w_range),
            SystemSpec::Polynomial {
                flux,
                kinds,
                lo,
                hi,
            } => polynomial_system(flux.clone(), kinds.clone(), lo, hi),
        }
    }
}

/// Burgers equation f(u) = u^2/2 on [lo, hi].
pub fn burgers_on(lo: f64, hi: f64) -> Result<SystemModel> {
    SystemModel::new(
        "burgers",
        vec![FieldKind::GenuinelyNonlinear],
        DomainBox::new(Vector::scalar(lo), Vector::scalar(hi)),
        Box::new(|u: &Vector| Vector::scalar(0.5 * u[0] * u[0])),
        Box::new(|u: &Vector| Matrix::from_rows(&[&[u[0]]])),
    )
}

pub fn burgers() -> SystemModel {
    burgers_on(-2.0, 2.0).expect("builtin burgers is valid")
}

/// Isentropic p-system in Lagrangian coordinates with p(v) = v^-gamma:
/// v_t - w_x = 0, w_t + p(v)_x = 0. Both fields genuinely nonlinear.
pub fn p_system_on(gamma: f64, v_range: [f64; 2], w_range: [f64; 2]) -> Result<SystemModel> {
    if gamma <= 0.0 || v_range[0] <= 0.0 {
        return Err(Error::InvalidModel(
            "p-system needs gamma > 0 and v > 0".into(),
        ));
    }
    let g = gamma;
    SystemModel::new(
        format!("p_system(gamma={g})"),
        vec![FieldKind::GenuinelyNonlinear, FieldKind::GenuinelyNonlinear],
        DomainBox::new(
            Vector::from_slice(&[v_range[0], w_range[0]]),
            Vector::from_slice(&[v_range[1], w_range[1]]),
        ),
        Box::new(move |u: &Vector| Vector::from_slice(&[-u[1], u[0].powf(-g)])),
        Box::new(move |u: &Vector| {
            let dp = -g * u[0].powf(-g - 1.0);
            Matrix::from_rows(&[&[0.0, -1.0], &[dp, 0.0]])
        }),
    )
}

pub fn p_system(gamma: f64) -> SystemModel {
    p_system_on(gamma, [0.5, 2.0], [-1.0, 1.0]).expect("builtin p-system is valid")
}

/// Generic polynomial-flux system, N <= 3, field kinds declared and
/// validated by sampling.
pub fn polynomial_system(
    flux_terms: Vec<Vec<PolyTerm>>,
    kinds: Vec<FieldKind>,
    lo: &[f64],
    hi: &[f64],
) -> Result<SystemModel> {
    let n = kinds.len();
    if flux_terms.len() != n || lo.len() != n || hi.len() != n {
        return Err(Error::InvalidModel(
            "polynomial system: inconsistent dimensions".into(),
        ));
    }
    for comp in &flux_terms {
        for t in comp {
            if t.powers.len() != n {
                return Err(Error::InvalidModel(
                    "polynomial term power list has wrong length".into(),
                ));
            }
        }
    }
    let eval_terms = flux_terms.clone();
    let jac_terms = flux_terms;
    let flux = Box::new(move |u: &Vector| {
        let mut out = Vector::zeros(u.dim());
        for (c, terms) in eval_terms.iter().enumerate() {
            let mut s = 0.0;
            for t in terms {
                let mut m = t.coef;
                for (j, &p) in t.powers.iter().enumerate() {
                    m *= u[j].powi(p as i32);
                }
                s += m;
            }
            out[c] = s;
        }
        out
    });
    let jacobian = Box::new(move |u: &Vector| {
        let n = u.dim();
        let mut a = Matrix::zeros(n);
        for (row, terms) in jac_terms.iter().enumerate() {
            for t in terms {
                for col in 0..n {
                    let p = t.powers[col];
                    if p == 0 {
                        continue;
                    }
                    let mut m = t.coef * p as f64 * u[col].powi(p as i32 - 1);
                    for (j, &q) in t.powers.iter().enumerate() {
                        if j != col {
                            m *= u[j].powi(q as i32);
                        }
                    }
                    a.set(row, col, a.get(row, col) + m);
                }
            }
        }
        a
    });
    let model = SystemModel::new(
        "polynomial",
        kinds,
        DomainBox::new(Vector::from_slice(lo), Vector::from_slice(hi)),
        flux,
        jacobian,
    )?;
    model.validate(5)?;
    Ok(model)
}

/// Linear 2x2 system with distinct speeds: both fields are contacts. Handy
/// as the linearly degenerate test system.
pub fn linear_ld_system(lambda1: f64, lambda2: f64) -> Result<SystemModel> {
    polynomial_system(
        vec![
            vec![PolyTerm {
                coef: lambda1,
                powers: vec![1, 0],
            }],
            vec![PolyTerm {
                coef: lambda2,
                powers: vec![0, 1],
            }],
        ],
        vec![FieldKind::LinearlyDegenerate, FieldKind::LinearlyDegenerate],
        &[-1.0, -1.0],
        &[1.0, 1.0],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn burgers_eigen_identity() {
        let m = burgers();
        let e = m.eigen_at(&Vector::scalar(0.3)).unwrap();
        assert_abs_diff_eq!(e.lambda(0), 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(e.r(0)[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.l(0)[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn p_system_eigenvalues_closed_form() {
        // Independent oracle: lambda = +-sqrt(-p'(v)), p(v) = v^-2.
        let m = p_system(2.0);
        let u = Vector::from_slice(&[1.0, 0.0]);
        let e = m.eigen_at(&u).unwrap();
        assert_abs_diff_eq!(e.lambda(0), -(2.0f64.sqrt()), epsilon = 1e-12);
        assert_abs_diff_eq!(e.lambda(1), 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn biorthogonality() {
        let m = p_system(2.0);
        for u in m.domain().sample_grid(4) {
            let e = m.eigen_at(&u).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(e.l(i).dot(e.r(j)), want, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn gn_normalization_independent_fd() {
        // Check Dlambda.r_tilde = 1 with an independent step size,
        // differencing eigenvalues instead of the Jacobian field.
        let m = p_system(2.0);
        let u = Vector::from_slice(&[1.2, 0.1]);
        let e = m.eigen_at(&u).unwrap();
        for i in 0..2 {
            let h = 1e-5;
            let lp = m.lambda_at(&u.axpy(h, e.r(i)), i).unwrap();
            let lm = m.lambda_at(&u.axpy(-h, e.r(i)), i).unwrap();
            assert_abs_diff_eq!((lp - lm) / (2.0 * h), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn rarefaction_identity_cases() {
        let m = burgers();
        let u = m.rarefaction_point(&Vector::scalar(0.0), 0, 0.5).unwrap();
        assert_abs_diff_eq!(u[0], 0.5, epsilon = 1e-12);
        let u0 = Vector::scalar(0.37);
        assert_eq!(m.rarefaction_point(&u0, 0, 0.0).unwrap(), u0);
    }

    #[test]
    fn rarefaction_lambda_jump_matches_strength() {
        let m = p_system(2.0);
        let u0 = Vector::from_slice(&[1.0, 0.0]);
        let s = 0.1;
        let u = m.rarefaction_point(&u0, 1, s).unwrap();
        let dl = m.lambda_at(&u, 1).unwrap() - m.lambda_at(&u0, 1).unwrap();
        assert_abs_diff_eq!(dl, s, epsilon = 1e-8);
    }

    #[test]
    fn rarefaction_leaves_domain() {
        let m = burgers_on(-1.0, 1.0).unwrap();
        let err = m.rarefaction_point(&Vector::scalar(0.9), 0, 0.5);
        assert!(matches!(err, Err(Error::LeftDomain { .. })));
    }

    #[test]
    fn hugoniot_burgers_exact() {
        let m = burgers();
        let (u, speed) = m.hugoniot_point(&Vector::scalar(1.0), 0, -1.0).unwrap();
        assert_abs_diff_eq!(u[0], 0.0, epsilon = 1e-11);
        assert_abs_diff_eq!(speed, 0.5, epsilon = 1e-11);
        let (u, speed) = m.hugoniot_point(&Vector::scalar(1.0), 0, -0.4).unwrap();
        assert_abs_diff_eq!(u[0], 0.6, epsilon = 1e-11);
        assert_abs_diff_eq!(speed, 0.8, epsilon = 1e-11);
    }

    #[test]
    fn hugoniot_p_system_rh_residual_and_lax() {
        let m = p_system(2.0);
        let u0 = Vector::from_slice(&[1.0, 0.0]);
        let s = -0.05;
        let (u, speed) = m.hugoniot_point(&u0, 0, s).unwrap();
        // Independent residual check.
        let rh = m
            .flux(&u)
            .sub(&m.flux(&u0))
            .sub(&u.sub(&u0).scale(speed));
        assert!(rh.norm_inf() <= 1e-10, "rh residual {}", rh.norm_inf());
        // Lax inequalities for family 0.
        let l_left = m.lambda_at(&u0, 0).unwrap();
        let l_right = m.lambda_at(&u, 0).unwrap();
        assert!(l_left >= speed - 1e-10);
        assert!(speed >= l_right - 1e-10);
        // Strength normalization: eigenvalue jump equals s.
        assert_abs_diff_eq!(l_right - l_left, s, epsilon = 1e-10);
    }

    #[test]
    fn averaged_matrix_cases() {
        let m = burgers();
        let a = m
            .averaged_matrix(&Vector::scalar(0.0), &Vector::scalar(1.0))
            .unwrap();
        assert_abs_diff_eq!(a.get(0, 0), 0.5, epsilon = 1e-15);
        let u = Vector::scalar(0.7);
        let same = m.averaged_matrix(&u, &u).unwrap();
        assert_abs_diff_eq!(same.get(0, 0), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn averaged_matrix_exactly_symmetric() {
        let m = p_system(2.0);
        let a = Vector::from_slice(&[0.9, 0.2]);
        let b = Vector::from_slice(&[1.4, -0.3]);
        let ab = m.averaged_matrix(&a, &b).unwrap();
        let ba = m.averaged_matrix(&b, &a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(ab.get(i, j).to_bits(), ba.get(i, j).to_bits());
            }
        }
    }

    #[test]
    fn rh_jump_is_eigenvector_of_averaged_matrix() {
        // Remark: on the Hugoniot locus, u - u0 is an i-eigenvector of the
        // averaged matrix.
        let m = p_system(2.0);
        let u0 = Vector::from_slice(&[1.1, 0.1]);
        for (fam, s) in [(0usize, -0.04), (1usize, -0.07)] {
            let (u, speed) = m.hugoniot_point(&u0, fam, s).unwrap();
            let a = m.averaged_matrix(&u0, &u).unwrap();
            let jump = u.sub(&u0);
            let res = a.matvec(&jump).sub(&jump.scale(speed));
            assert!(res.norm() <= 1e-9 * jump.norm().max(1e-30));
        }
    }

    #[test]
    fn curves_agree_to_second_order() {
        // |Psi_rar(s) - Psi_shock(s)| = O(|s|^3): log-log slope >= 2.7.
        let m = p_system(2.0);
        let u0 = Vector::from_slice(&[1.0, 0.0]);
        let mut errs = Vec::new();
        for &s in &[1e-1, 1e-2, 1e-3] {
            let rar = m.rarefaction_point(&u0, 0, -s).unwrap();
            let (shk, _) = m.hugoniot_point(&u0, 0, -s).unwrap();
            errs.push(rar.sub(&shk).norm().max(1e-300));
        }
        let slope1 = (errs[0] / errs[1]).log10();
        let slope2 = (errs[1] / errs[2]).log10();
        assert!(slope1 >= 2.7, "slope {slope1} errs {errs:?}");
        assert!(slope2 >= 2.7, "slope {slope2} errs {errs:?}");
    }

    #[test]
    fn eigen_continuity() {
        let m = p_system(2.0);
        let u = Vector::from_slice(&[1.3, -0.2]);
        let v = Vector::from_slice(&[1.3 + 0.7e-6, -0.2 + 0.7e-6]);
        let eu = m.eigen_at(&u).unwrap();
        let ev = m.eigen_at(&v).unwrap();
        for i in 0..2 {
            assert!(eu.r(i).sub(ev.r(i)).norm() <= 1e-3);
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        let m = burgers_on(-1.0, 1.0).unwrap();
        assert!(matches!(
            m.eigen_at(&Vector::scalar(1.5)),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn validate_builtins() {
        burgers().validate(5).unwrap();
        p_system(2.0).validate(5).unwrap();
        linear_ld_system(-1.0, 1.0).unwrap().validate(3).unwrap();
    }

    #[test]
    fn linear_system_is_ld() {
        let m = linear_ld_system(-1.0, 2.0).unwrap();
        assert_eq!(m.kind(0), FieldKind::LinearlyDegenerate);
        let u = Vector::from_slice(&[0.3, 0.4]);
        let e = m.eigen_at(&u).unwrap();
        assert_abs_diff_eq!(e.lambda(0), -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e.lambda(1), 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e.r(0).norm(), 1.0, epsilon = 1e-12);
    }
}
