//! Solution of the step system.
//!
//! The primary path eliminates `κ` through its own row, which leaves the
//! symmetric positive definite velocity operator `A' = A + τ Tᵀ S T`, and
//! solves the pressure Schur complement `B A'⁻¹ Bᵀ` by conjugate gradients
//! with a viscosity-scaled pressure mass diagonal as preconditioner. The
//! multiplier of the mean constraint follows from the constant pressure
//! kernel. Sparse LU of the full operator is the fallback. Either path is
//! accepted only once the residual of the full operator is small enough.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::{SaddleSystem, StepSolution};
use crate::error::{Error, Result};
use crate::femspace::SparseOperator;

const REFINEMENT_STEPS: usize = 3;
const RESIDUAL_TOL: f64 = 1e-10;
const CG_TOL: f64 = 1e-12;
const CG_MAX_ITERS: usize = 2000;

/// Which factorization produced a solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvePath {
    Block,
    Lu,
}

type Pattern = (Vec<usize>, Vec<usize>);

/// Step solver that reuses symbolic factorizations while the sparsity
/// patterns stay the same.
#[derive(Default)]
pub struct StepSolver {
    velocity: Option<(Pattern, SymbolicLlt<usize>)>,
    interface: Option<(Pattern, SymbolicLlt<usize>)>,
    full: Option<(Pattern, SymbolicLu<usize>)>,
    last_path: Option<SolvePath>,
    /// Pressure of the previous solve, the initial guess of the next one.
    last_pressure: Option<Vec<f64>>,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn to_faer(op: &SparseOperator) -> Result<SparseColMat<usize, f64>> {
    let entries: Vec<Triplet<usize, usize, f64>> = op.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseColMat::try_new_from_triplets(op.nrows(), op.ncols(), &entries)
        .map_err(|e| Error::SingularSystem(format!("matrix construction failed: {e:?}")))
}

fn cached<S: Clone>(
    slot: &mut Option<(Pattern, S)>,
    op: &SparseOperator,
    make: impl FnOnce() -> Result<S>,
) -> Result<S> {
    let (rows, cols) = op.pattern();
    if let Some(((r, c), s)) = slot {
        if r == rows && c == cols {
            return Ok(s.clone());
        }
    }
    let s = make()?;
    *slot = Some(((rows.to_vec(), cols.to_vec()), s.clone()));
    Ok(s)
}

fn llt(slot: &mut Option<(Pattern, SymbolicLlt<usize>)>, op: &SparseOperator) -> Result<Llt<usize, f64>> {
    let mat = to_faer(op)?;
    let sym = cached(slot, op, || {
        SymbolicLlt::try_new(mat.symbolic(), Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("symbolic Cholesky failed: {e:?}")))
    })?;
    Llt::try_new_with_symbolic(sym, mat.as_ref(), Side::Lower)
        .map_err(|e| Error::SingularSystem(format!("Cholesky failed: {e:?}")))
}

fn apply<S: Solve<f64>>(f: &S, b: &[f64]) -> Vec<f64> {
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = f.solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

/// Factorizations of the block path.
struct BlockFactors {
    velocity: Llt<usize, f64>,
    interface: Llt<usize, f64>,
}

impl StepSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Path used by the last successful solve.
    pub fn last_path(&self) -> Option<SolvePath> {
        self.last_path
    }

    pub fn solve(&mut self, sys: &SaddleSystem) -> Result<StepSolution> {
        let guess = self.last_pressure.take().filter(|p| p.len() == sys.n_pressure());
        let block = self.block_factors(sys).and_then(|f| {
            let first = std::cell::Cell::new(guess);
            refine(sys, |r| block_solve(sys, &f, r, first.take().as_deref()))
        });
        let sol = match block {
            Ok(sol) => {
                self.last_path = Some(SolvePath::Block);
                sol
            }
            Err(_) => {
                let sol = self.solve_lu(sys)?;
                self.last_path = Some(SolvePath::Lu);
                sol
            }
        };
        self.last_pressure = Some(sol.p.clone());
        Ok(sol)
    }

    /// Sparse LU of the full operator.
    pub fn solve_lu(&mut self, sys: &SaddleSystem) -> Result<StepSolution> {
        let mat = to_faer(&sys.matrix)?;
        let sym = cached(&mut self.full, &sys.matrix, || {
            SymbolicLu::try_new(mat.symbolic())
                .map_err(|e| Error::SingularSystem(format!("symbolic factorization failed: {e:?}")))
        })?;
        let lu = Lu::try_new_with_symbolic(sym, mat.as_ref())
            .map_err(|e| Error::SingularSystem(format!("numeric factorization failed: {e:?}")))?;
        refine(sys, |r| Ok(apply(&lu, r)))
    }

    fn block_factors(&mut self, sys: &SaddleSystem) -> Result<BlockFactors> {
        let nu = sys.n_velocity();
        let mut t: Vec<(usize, usize, f64)> = sys.a.triplets().collect();
        for (r, c, v) in sys.s.triplets() {
            if let (Some(a), Some(b)) = (sys.trace_dofs[r], sys.trace_dofs[c]) {
                t.push((a, b, sys.tau * v));
            }
        }
        let a_prime = SparseOperator::from_triplets(nu, nu, t);
        Ok(BlockFactors {
            velocity: llt(&mut self.velocity, &a_prime)?,
            interface: llt(&mut self.interface, &sys.mass.gamma)?,
        })
    }
}

/// Solve, then refine against the full operator until the residual is below
/// tolerance.
fn refine(sys: &SaddleSystem, solve: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<StepSolution> {
    let rhs_norm = norm2(&sys.rhs);
    let mut x = solve(&sys.rhs)?;
    let mut res = sys.residual(&x);
    for _ in 0..REFINEMENT_STEPS {
        if norm2(&res) <= RESIDUAL_TOL * rhs_norm {
            break;
        }
        let dx = solve(&res)?;
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        res = sys.residual(&x);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("solution is not finite".into()));
    }
    let res_norm = norm2(&res);
    if res_norm > RESIDUAL_TOL * rhs_norm {
        return Err(Error::SingularSystem(format!(
            "relative residual {:e} above {RESIDUAL_TOL:e}",
            res_norm / rhs_norm
        )));
    }
    let mut out = sys.unpack(&x);
    out.relative_residual = if rhs_norm > 0.0 { res_norm / rhs_norm } else { 0.0 };
    Ok(out)
}

/// Block elimination for a general right-hand side `[r_u | r_p | r_λ | r_κ]`,
/// optionally starting the pressure iteration from `guess`.
fn block_solve(sys: &SaddleSystem, f: &BlockFactors, r: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
    let (nu, np, nk) = (sys.n_velocity(), sys.n_pressure(), sys.n_interface());
    let (ru, rp, rl, rk) = (&r[..nu], &r[nu..nu + np], r[nu + np], &r[nu + np + 1..]);

    // A' u − Bᵀ p = r_u + Tᵀ r_κ
    let mut fu = ru.to_vec();
    for (i, &v) in rk.iter().enumerate() {
        if let Some(d) = sys.trace_dofs[i] {
            fu[d] += v;
        }
    }
    let a_inv_f = apply(&f.velocity, &fu);
    // B A'⁻¹ Bᵀ p + c λ = g
    let g: Vec<f64> = sys.b.matvec(&a_inv_f).iter().zip(rp).map(|(ba, r)| -r - ba).collect();
    let c_sum: f64 = sys.c.iter().sum();
    let lambda = g.iter().sum::<f64>() / c_sum;
    let g: Vec<f64> = g.iter().zip(&sys.c).map(|(g, c)| g - lambda * c).collect();

    let schur = |p: &[f64]| -> Vec<f64> { sys.b.matvec(&apply(&f.velocity, &sys.b.matvec_transpose(p))) };
    let mut p = pcg(schur, &g, &sys.pressure_weights, guess)?;
    // −cᵀ p = r_λ fixes the constant pressure mode
    let shift = (-rl - dot(&sys.c, &p)) / c_sum;
    p.iter_mut().for_each(|v| *v += shift);

    let bt_p = sys.b.matvec_transpose(&p);
    let rhs_u: Vec<f64> = fu.iter().zip(&bt_p).map(|(a, b)| a + b).collect();
    let u = apply(&f.velocity, &rhs_u);

    // M κ = τ S T u − r_κ
    let mut trace = vec![0.0; nk];
    for (i, d) in sys.trace_dofs.iter().enumerate() {
        if let Some(d) = d {
            trace[i] = u[*d];
        }
    }
    let st = sys.s.matvec(&trace);
    let rhs_k: Vec<f64> = st.iter().zip(rk).map(|(s, r)| sys.tau * s - r).collect();
    let kappa = apply(&f.interface, &rhs_k);

    let mut x = u;
    x.extend(p);
    x.push(lambda);
    x.extend(kappa);
    Ok(x)
}

/// Preconditioned conjugate gradients for a symmetric positive semi-definite
/// operator with a consistent right-hand side and diagonal preconditioner.
fn pcg(op: impl Fn(&[f64]) -> Vec<f64>, b: &[f64], diag: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let (mut x, mut r) = match guess {
        Some(x0) => {
            let ax = op(x0);
            (x0.to_vec(), b.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<f64>>())
        }
        None => (vec![0.0; b.len()], b.to_vec()),
    };
    if norm2(&r) <= CG_TOL * b_norm {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..CG_MAX_ITERS {
        let ad = op(&d);
        let dad = dot(&d, &ad);
        if !(dad > 0.0) {
            return Err(Error::SingularSystem("Schur complement lost definiteness".into()));
        }
        let alpha = rz / dad;
        x.iter_mut().zip(&d).for_each(|(x, d)| *x += alpha * d);
        r.iter_mut().zip(&ad).for_each(|(r, a)| *r -= alpha * a);
        if norm2(&r) <= CG_TOL * b_norm {
            return Ok(x);
        }
        z.iter_mut().zip(r.iter().zip(diag)).for_each(|(z, (r, w))| *z = r / w);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        d.iter_mut().zip(&z).for_each(|(d, z)| *d = z + beta * *d);
    }
    Err(Error::SingularSystem("pressure Schur complement iteration did not converge".into()))
}
