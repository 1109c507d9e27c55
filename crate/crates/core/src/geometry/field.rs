use super::{Dim, Domain, Point};

/// Default finite-difference step: 1e-5 times a unit domain diameter.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

type ScalarFn = dyn Fn(&Point) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&Point) -> Point + Send + Sync;
type JacobianFn = dyn Fn(&Point) -> [[f64; 3]; 3] + Send + Sync;

/// Real-valued field. Evaluation is a pure closure; an analytic gradient is
/// optional and central differences with step `fd_step` fill in otherwise.
pub struct ScalarField {
    dim: Dim,
    domain: Option<Domain>,
    fd_step: f64,
    eval: Box<ScalarFn>,
    grad: Option<Box<VectorFn>>,
}

impl ScalarField {
    pub fn new(dim: Dim, eval: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            dim,
            domain: None,
            fd_step: DEFAULT_FD_STEP,
            eval: Box::new(eval),
            grad: None,
        }
    }

    pub fn with_grad(mut self, grad: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        self.grad = Some(Box::new(grad));
        self
    }

    pub fn on_domain(mut self, domain: Domain) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    /// Analytic gradient when present, central differences otherwise.
    pub fn grad_at(&self, x: &Point) -> Point {
        if let Some(g) = &self.grad {
            return g(x);
        }
        let mut out = [0.0; 3];
        for (j, out_j) in out.iter_mut().enumerate().take(self.dim.n()) {
            *out_j = central_diff(|p| (self.eval)(p), x, j, self.fd_step);
        }
        out
    }

    pub fn has_analytic_grad(&self) -> bool {
        self.grad.is_some()
    }
}

/// Vector field with N components (N = ambient dimension): models both
/// divergence-free/curl-free data and maps whose Jacobian is inspected.
/// `jac[i][j]` is ∂_j of component i.
pub struct VectorField {
    dim: Dim,
    domain: Option<Domain>,
    fd_step: f64,
    eval: Box<VectorFn>,
    jac: Option<Box<JacobianFn>>,
}

impl VectorField {
    pub fn new(dim: Dim, eval: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        VectorField {
            dim,
            domain: None,
            fd_step: DEFAULT_FD_STEP,
            eval: Box::new(eval),
            jac: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&Point) -> [[f64; 3]; 3] + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Box::new(jac));
        self
    }

    pub fn on_domain(mut self, domain: Domain) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn eval(&self, x: &Point) -> Point {
        (self.eval)(x)
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jac.is_some()
    }

    /// Analytic Jacobian when present, otherwise componentwise central
    /// differences.
    pub fn jacobian_at(&self, x: &Point) -> [[f64; 3]; 3] {
        if let Some(j) = &self.jac {
            return j(x);
        }
        self.jacobian_fd(x)
    }

    /// Central-difference Jacobian regardless of an analytic one; the
    /// structure checks below are defined through this.
    pub fn jacobian_fd(&self, x: &Point) -> [[f64; 3]; 3] {
        let n = self.dim.n();
        let h = self.fd_step;
        let mut out = [[0.0; 3]; 3];
        for j in 0..n {
            let mut xp = *x;
            let mut xm = *x;
            xp[j] += h;
            xm[j] -= h;
            let vp = (self.eval)(&xp);
            let vm = (self.eval)(&xm);
            for i in 0..n {
                out[i][j] = (vp[i] - vm[i]) / (2.0 * h);
            }
        }
        out
    }

    /// |Σ_j ∂_j f_j| by central differences.
    pub fn div_residual_fd(&self, x: &Point) -> f64 {
        let jac = self.jacobian_fd(x);
        (0..self.dim.n()).map(|j| jac[j][j]).sum::<f64>().abs()
    }

    /// max_{j<k} |∂_j f_k − ∂_k f_j| by central differences.
    pub fn curl_residual_fd(&self, x: &Point) -> f64 {
        let jac = self.jacobian_fd(x);
        let n = self.dim.n();
        let mut worst: f64 = 0.0;
        for (j, row_j) in jac.iter().enumerate().take(n) {
            for (k, row_k) in jac.iter().enumerate().take(n).skip(j + 1) {
                worst = worst.max((row_k[j] - row_j[k]).abs());
            }
        }
        worst
    }
}

/// Central difference of a scalar closure in direction `j`.
pub fn central_diff(f: impl Fn(&Point) -> f64, x: &Point, j: usize, h: f64) -> f64 {
    let mut xp = *x;
    let mut xm = *x;
    xp[j] += h;
    xm[j] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

/// Common view of scalar fields (1 component) and vector fields
/// (N components) for operations that only need values and Jacobians, such
/// as sphere-trace profiles. Rows of `jacobian` beyond `components` are zero.
pub trait Field: Sync {
    fn dim(&self) -> Dim;
    fn components(&self) -> usize;
    fn value(&self, x: &Point) -> [f64; 3];
    fn jacobian(&self, x: &Point) -> [[f64; 3]; 3];
    fn domain(&self) -> Option<&Domain> {
        None
    }

    /// Euclidean norm of the value.
    fn value_norm(&self, x: &Point) -> f64 {
        let v = self.value(x);
        v[..self.components()].iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the Jacobian (|Du| for maps, |∇u| for scalars).
    fn jacobian_norm(&self, x: &Point) -> f64 {
        let jac = self.jacobian(x);
        let n = self.dim().n();
        let mut acc = 0.0;
        for row in jac.iter().take(self.components()) {
            for v in row.iter().take(n) {
                acc += v * v;
            }
        }
        acc.sqrt()
    }
}

impl Field for ScalarField {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn components(&self) -> usize {
        1
    }

    fn value(&self, x: &Point) -> [f64; 3] {
        [self.eval(x), 0.0, 0.0]
    }

    fn jacobian(&self, x: &Point) -> [[f64; 3]; 3] {
        [self.grad_at(x), [0.0; 3], [0.0; 3]]
    }

    fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }
}

impl Field for VectorField {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn components(&self) -> usize {
        self.dim.n()
    }

    fn value(&self, x: &Point) -> [f64; 3] {
        self.eval(x)
    }

    fn jacobian(&self, x: &Point) -> [[f64; 3]; 3] {
        self.jacobian_at(x)
    }

    fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }
}
