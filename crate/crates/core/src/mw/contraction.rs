//! The contraction `K^MW_{n-1}(K) ≅ (K^MW_n)_{-1}(K)`, modelled on based
//! classes over `G_m = Spec K[t, 1/t]`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{FieldCtx, FieldElem, Poly, RationalFunctionField};
use crate::mw::MwClass;
use crate::residues::{constant_embed, mw_residue, specialization, support};

/// `β ↦ [t]·β` viewed over `K(t)`.
pub fn contraction_embed(beta: &MwClass, r: &Arc<RationalFunctionField>) -> Result<MwClass> {
    let ctx = FieldCtx::Rational(r.clone());
    let t = MwClass::bracket(&ctx, &FieldElem::Rational(r.t()))?;
    t.mul(&constant_embed(beta, r)?)
}

/// Residue at `(t)` with uniformizer `t`, for classes unramified on `G_m`
/// whose specialization at `t = 1` vanishes.
pub fn contraction_project(gamma: &MwClass) -> Result<MwClass> {
    let r = gamma
        .ctx()
        .as_rational()
        .ok_or_else(|| Error::FieldMismatch("contraction needs a function field".into()))?;
    let mut offending = Vec::new();
    for g in support(gamma)? {
        if g == Poly::x() {
            continue;
        }
        let pl = r.place(&g)?;
        if !mw_residue(gamma, &pl)?.is_zero()? {
            offending.push(pl.label());
        }
    }
    let one = r.place(&Poly::from_coeffs(vec![r.base().neg(1), 1]))?;
    if offending.is_empty() && !specialization(gamma, &one)?.is_zero()? {
        offending.push(format!("{} (basepoint)", one.label()));
    }
    if !offending.is_empty() {
        return Err(Error::NotContractible(offending));
    }
    mw_residue(gamma, &r.place(&Poly::x())?)
}
