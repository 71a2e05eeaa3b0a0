//! The recursive K₁-generator matrices Z_ρ(k) with the continuous choice of
//! attaching diagonals.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::algebra::Context;
use crate::error::{Error, Result};
use crate::matrix::PolyMatrix;
use crate::param::ParameterMatrix;
use crate::scalar::Coefficient;

/// Diagonal phases (D₁, D₂) used when generator `new` is attached after
/// `gens` (zero-based indices). Each has length 2^{m−2} for m − 1 = `gens.len()`.
pub fn attach_phases(ctx: &Arc<Context>, gens: &[usize], new: usize) -> Result<(Vec<Coefficient>, Vec<Coefficient>)> {
    if gens.is_empty() {
        return Err(Error::Precondition("attaching needs at least one earlier generator".into()));
    }
    for (i, &g) in gens.iter().chain(std::iter::once(&new)).enumerate() {
        ctx.check_index(g)?;
        if gens[..i.min(gens.len())].contains(&g) || (i < gens.len() && g == new) {
            return Err(Error::Precondition(format!("generator z{} appears twice", g + 1)));
        }
    }
    let s = ctx.scalars();
    if gens.len() == 1 {
        return Ok((vec![s.one()], vec![ctx.rho_entry(gens[0], new).conj()]));
    }
    let (prev, last) = gens.split_at(gens.len() - 1);
    let (e1, e2) = attach_phases(ctx, prev, new)?;
    let r = ctx.rho_entry(last[0], new);
    let rc = r.conj();
    let mut d1 = e1.clone();
    d1.extend(e2.iter().map(|c| r.mul(&c.conj())));
    let mut d2 = e2;
    d2.extend(e1.iter().map(|c| rc.mul(&c.conj())));
    Ok((d1, d2))
}

/// (D₁, D₂) as scalar diagonal matrices.
pub fn attach_diagonals(ctx: &Arc<Context>, gens: &[usize], new: usize) -> Result<(PolyMatrix, PolyMatrix)> {
    let (d1, d2) = attach_phases(ctx, gens, new)?;
    Ok((PolyMatrix::scalar_diag(ctx, &d1), PolyMatrix::scalar_diag(ctx, &d2)))
}

/// Z(1) = [z₁]; Z(m) = [[Z(m−1), z_m D₁], [−z_m^* D₂, Z(m−1)^*]].
pub fn zgen(ctx: &Arc<Context>, k: usize) -> Result<PolyMatrix> {
    if k == 0 || k > ctx.n() {
        return Err(Error::IndexOutOfRange { index: k, n: ctx.n() });
    }
    let mut z = PolyMatrix::from_fn(ctx, 1, 1, |_, _| ctx.gen(0));
    for m in 1..k {
        let gens: Vec<usize> = (0..m).collect();
        let (d1, d2) = attach_diagonals(ctx, &gens, m)?;
        let top_right = d1.scale_left(&ctx.gen(m))?;
        let bottom_left = d2.scale_left(&-&ctx.gen_star(m))?;
        z = PolyMatrix::block2(&z, &top_right, &bottom_left, &z.adjoint())?;
    }
    Ok(z)
}

/// Z_ρ(k) in the odd-sphere context of ρ.
pub fn zgen_rho(rho: &ParameterMatrix, k: usize) -> Result<PolyMatrix> {
    zgen(&Context::odd(rho.clone()), k)
}

/// Outcome of checking M M^* = M^* M = (Σ_{j≤k} z_j z_j^*)·I.
#[derive(Clone, Debug)]
pub struct SphereUnitaryReport {
    pub unitary: bool,
    pub upto: usize,
    /// M M^* − S·I.
    pub left_residual: PolyMatrix,
    /// M^* M − S·I.
    pub right_residual: PolyMatrix,
}

impl SphereUnitaryReport {
    /// Nonzero residual entries as ("left"|"right", row, col, text).
    pub fn witnesses(&self) -> Vec<(&'static str, usize, usize, String)> {
        let mut out = Vec::new();
        for (side, m) in [("left", &self.left_residual), ("right", &self.right_residual)] {
            for (i, j, p) in m.nonzero_entries() {
                out.push((side, i, j, p.to_string()));
            }
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        let w: Vec<Value> = self
            .witnesses()
            .into_iter()
            .map(|(side, i, j, p)| json!({ "side": side, "row": i, "col": j, "residual": p }))
            .collect();
        json!({ "unitary": self.unitary, "upto": self.upto, "residuals": w })
    }
}

/// Checks both products against the partial sphere sum over the first
/// `upto` generators, exactly in the free-with-phases algebra.
pub fn is_sphere_unitary(m: &PolyMatrix, upto: usize) -> Result<SphereUnitaryReport> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    let ctx = m.ctx();
    if upto > ctx.n() {
        return Err(Error::IndexOutOfRange { index: upto, n: ctx.n() });
    }
    let target = PolyMatrix::scalar_multiple_of_identity(&ctx.partial_sphere_sum(upto), m.rows());
    let adj = m.adjoint();
    let left_residual = m.mul(&adj)?.sub(&target)?;
    let right_residual = adj.mul(m)?.sub(&target)?;
    Ok(SphereUnitaryReport {
        unitary: left_residual.is_zero() && right_residual.is_zero(),
        upto,
        left_residual,
        right_residual,
    })
}
