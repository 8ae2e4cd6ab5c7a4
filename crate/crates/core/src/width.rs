// SPDX-License-Identifier: Apache-2.0

//! Parameter folding and declared-width resolution.

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::ast::{BaseType, ModuleDef, PackedDim, ParamValue, SignalDecl, Width};

const MAX_TYPEDEF_DEPTH: usize = 8;

/// Fold parameters in declaration order, then compute every signal's width.
/// Unresolvable widths degrade to `Width::Unresolved`; nothing fails.
pub fn resolve_widths(module: &mut ModuleDef) {
    let mut params: BTreeMap<String, ParamValue> = BTreeMap::new();
    for decl in &module.param_decls {
        let value = decl
            .value
            .as_ref()
            .and_then(|e| e.eval_const(&|n| lookup(&params, n)))
            .map_or(ParamValue::Unresolved, ParamValue::Int);
        params.insert(decl.name.clone(), value);
    }
    module.parameters = params;
    let ctx = Ctx { params: &module.parameters, typedefs: &module.typedefs };
    for sig in module.ports.iter_mut().chain(module.nets.iter_mut()) {
        apply(sig, &ctx);
    }
}

fn lookup(params: &BTreeMap<String, ParamValue>, name: &str) -> Option<i64> {
    match params.get(name) {
        Some(ParamValue::Int(v)) => Some(*v),
        _ => None,
    }
}

struct Ctx<'a> {
    params: &'a BTreeMap<String, ParamValue>,
    typedefs: &'a BTreeMap<String, (BaseType, alloc::vec::Vec<PackedDim>)>,
}

fn apply(sig: &mut SignalDecl, ctx: &Ctx<'_>) {
    sig.width = type_width(&sig.base, &sig.dims, ctx, 0).map_or(Width::Unresolved, Width::Bits);
    sig.width_class = sig.width.class();
}

fn type_width(base: &BaseType, dims: &[PackedDim], ctx: &Ctx<'_>, depth: usize) -> Option<u32> {
    let base_bits = match base {
        BaseType::Bit => 1,
        BaseType::Fixed(b) => *b,
        BaseType::Named(name) => {
            if depth >= MAX_TYPEDEF_DEPTH {
                return None;
            }
            let (b, d) = ctx.typedefs.get(name)?;
            type_width(b, d, ctx, depth + 1)?
        }
    };
    dims.iter().try_fold(base_bits, |acc, dim| acc.checked_mul(dim_width(dim, ctx)?))
        .filter(|w| *w > 0)
}

fn dim_width(dim: &PackedDim, ctx: &Ctx<'_>) -> Option<u32> {
    let eval = |e: &crate::expr::Expr| e.eval_const(&|n| lookup(ctx.params, n));
    let bits = match dim {
        PackedDim::Range(msb, lsb) => {
            let (m, l) = (eval(msb)?, eval(lsb)?);
            m.checked_sub(l)?.checked_abs()?.checked_add(1)?
        }
        PackedDim::Size(n) => eval(n)?,
    };
    u32::try_from(bits).ok().filter(|b| *b > 0)
}
