//! Seeded, type-directed generation of closed well-typed programs.
//!
//! Programs always have type `int` or `unit`. Every candidate is run through
//! the checker and the transformer; rejected candidates are regenerated from
//! the same random stream, and after a bounded number of attempts the
//! generator falls back to a literal.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Expr, Ident, Type};
use crate::runtime;
use crate::transform::transform_program;
use crate::typecheck::{self, check_program, TypeEnv};

const VARS: [&str; 6] = ["a", "b", "c", "x", "y", "z"];
const FUNCS: [&str; 3] = ["f", "g", "h"];
const PROPS: [&str; 2] = ["p", "q"];
const ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_depth: u32,
    pub max_funcs: u32,
    pub max_props: usize,
    pub int_range: (i64, i64),
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_depth: 5,
            max_funcs: 3,
            max_props: 2,
            int_range: (-16, 16),
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig {
            seed,
            ..Self::default()
        }
    }
}

/// A closed program accepted by the checker, the transformer and the Ready
/// gate. Pure in `cfg`.
pub fn gen_well_typed(cfg: &GenConfig) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..ATTEMPTS {
        let e = gen_candidate(&mut rng, cfg);
        if accepted(&e) {
            return e;
        }
    }
    Expr::int(rng.gen_range(cfg.int_range.0..=cfg.int_range.1))
}

/// One unfiltered candidate. Usually well-typed; [`gen_well_typed`] filters.
pub fn gen_candidate(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Expr {
    let mut g = Gen {
        rng,
        cfg,
        env: Vec::new(),
        funcs: 0,
    };
    let ty = if g.rng.gen_bool(0.85) {
        Type::Int
    } else {
        Type::Unit
    };
    g.expr(&ty, cfg.max_depth)
}

fn accepted(e: &Expr) -> bool {
    if check_program(e).is_err() {
        return false;
    }
    match transform_program(e) {
        Ok(tr) => runtime::ready(&tr).is_ok(),
        Err(_) => false,
    }
}

#[derive(Debug, Clone)]
enum Entry {
    Val { name: Ident, ty: Type },
    /// A function parameter: `base` in one checking pass and `[base]⟨⟩` in
    /// the other, so it may only appear where both agree.
    Poly { name: Ident, base: Type },
    Func { name: Ident, param: Type, ret: Type },
}

impl Entry {
    fn name(&self) -> &str {
        match self {
            Entry::Val { name, .. } | Entry::Poly { name, .. } | Entry::Func { name, .. } => name,
        }
    }

    fn ty(&self) -> Type {
        match self {
            Entry::Val { ty, .. } => ty.clone(),
            Entry::Poly { base, .. } => base.clone(),
            Entry::Func { param, ret, .. } => Type::arrow(param.clone(), ret.clone()),
        }
    }
}

fn entry_for(name: &str, ty: Type) -> Entry {
    match ty {
        Type::Arrow(param, ret) => Entry::Func {
            name: name.into(),
            param: *param,
            ret: *ret,
        },
        ty => Entry::Val {
            name: name.into(),
            ty,
        },
    }
}

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    cfg: &'r GenConfig,
    env: Vec<Entry>,
    funcs: u32,
}

impl Gen<'_> {
    fn pick<'s, T>(&mut self, items: &'s [T]) -> Option<&'s T> {
        items.choose(self.rng)
    }

    fn name(&mut self, pool: &[&str]) -> Ident {
        pool.choose(self.rng).expect("non-empty pool").to_string()
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn int_lit(&mut self) -> Expr {
        let (lo, hi) = self.cfg.int_range;
        Expr::int(self.rng.gen_range(lo..=hi))
    }

    fn lit(&mut self, ty: &Type) -> Expr {
        match ty {
            Type::Unit => Expr::unit(),
            _ => self.int_lit(),
        }
    }

    fn base_ty(&mut self) -> Type {
        if self.chance(0.75) {
            Type::Int
        } else {
            Type::Unit
        }
    }

    fn first_order_arrow(&mut self) -> Type {
        let d = self.base_ty();
        let c = self.base_ty();
        Type::arrow(d, c)
    }

    fn visible(&self) -> Vec<Entry> {
        let mut seen = std::collections::BTreeSet::new();
        self.env
            .iter()
            .rev()
            .filter(|e| seen.insert(e.name().to_string()))
            .cloned()
            .collect()
    }

    fn types(&self) -> TypeEnv {
        self.env
            .iter()
            .map(|e| (e.name().to_string(), e.ty()))
            .collect()
    }

    fn infer(&self, e: &Expr) -> Option<Type> {
        typecheck::infer(&self.types(), e).ok()
    }

    fn scoped<T>(&mut self, entries: Vec<Entry>, f: impl FnOnce(&mut Self) -> T) -> T {
        let mark = self.env.len();
        self.env.extend(entries);
        let out = f(self);
        self.env.truncate(mark);
        out
    }

    fn vals(&self, keep: impl Fn(&Type) -> bool) -> Vec<Ident> {
        self.visible()
            .into_iter()
            .filter_map(|e| match e {
                Entry::Val { name, ty } if keep(&ty) => Some(name),
                _ => None,
            })
            .collect()
    }

    fn polys(&self, base: &Type) -> Vec<Ident> {
        self.visible()
            .into_iter()
            .filter_map(|e| match e {
                Entry::Poly { name, base: b } if &b == base => Some(name),
                _ => None,
            })
            .collect()
    }

    /// Functions that may be passed around or stored: first-order ones.
    fn func_names(&self, ty: Option<&Type>) -> Vec<Ident> {
        self.visible()
            .into_iter()
            .filter_map(|e| match e {
                Entry::Func { name, param, ret }
                    if !param.is_arrow()
                        && ty.is_none_or(|t| *t == Type::arrow(param.clone(), ret.clone())) =>
                {
                    Some(name)
                }
                _ => None,
            })
            .collect()
    }

    fn leaf(&mut self, ty: &Type) -> Expr {
        let vars = self.vals(|t| t == ty);
        if self.chance(0.5) {
            if let Some(x) = self.pick(&vars) {
                return Expr::var(x.clone());
            }
        }
        self.lit(ty)
    }

    /// An expression of type `ty`, which is `int` or `unit`.
    fn expr(&mut self, ty: &Type, depth: u32) -> Expr {
        if depth == 0 {
            return self.leaf(ty);
        }
        let d = depth - 1;
        for _ in 0..6 {
            let lo = if depth == self.cfg.max_depth { 6 } else { 0 };
            let choice = self.rng.gen_range(lo..100);
            let made = match choice {
                0..=5 => Some(self.leaf(ty)),
                6..=20 if *ty == Type::Int => Some(self.arith(d)),
                21..=33 => self.let_in(ty, d),
                34..=49 => self.func(ty, d),
                50..=66 => self.app(ty, d),
                67..=79 => self.if_has(ty, d),
                80..=89 => self.get(ty, d),
                90..=99 => self
                    .prop_expr(Some(ty), d)
                    .map(|(e, _)| Expr::extract(e)),
                _ => None,
            };
            if let Some(e) = made {
                return e;
            }
        }
        self.leaf(ty)
    }

    fn arith(&mut self, d: u32) -> Expr {
        let l = self.operand(d);
        let r = self.operand(d);
        if self.chance(0.5) {
            Expr::plus(l, r)
        } else {
            Expr::minus(l, r)
        }
    }

    /// An `int` or propertied-`int` arithmetic operand.
    fn operand(&mut self, d: u32) -> Expr {
        match self.rng.gen_range(0..10) {
            0..=5 => self.expr(&Type::Int, d),
            6 => {
                let polys = self.polys(&Type::Int);
                match self.pick(&polys) {
                    Some(x) => Expr::var(x.clone()),
                    None => self.expr(&Type::Int, d),
                }
            }
            _ => match self.prop_expr(Some(&Type::Int), d) {
                Some((e, _)) => e,
                None => self.expr(&Type::Int, d),
            },
        }
    }

    fn let_in(&mut self, ty: &Type, d: u32) -> Option<Expr> {
        let name = self.name(&VARS);
        let bound = match self.rng.gen_range(0..10) {
            0..=4 => {
                let t = self.base_ty();
                self.expr(&t, d)
            }
            5..=7 => self.prop_expr(None, d)?.0,
            8 => Expr::var(self.pick(&self.func_names(None))?.clone()),
            _ => {
                let f = self.pick(&self.func_names(None))?.clone();
                let p = self.name(&PROPS);
                let v = self.payload(d);
                Expr::set(Expr::var(f), p, v)
            }
        };
        let bound_ty = self.infer(&bound)?;
        let body = self.scoped(vec![entry_for(&name, bound_ty)], |g| g.expr(ty, d));
        Some(Expr::let_in(name, bound, body))
    }

    fn func(&mut self, ty: &Type, d: u32) -> Option<Expr> {
        if self.funcs >= self.cfg.max_funcs {
            return None;
        }
        self.funcs += 1;
        let name = self.name(&FUNCS);
        let param = self.name(&VARS);
        let in_scope: Vec<Type> = self
            .func_names(None)
            .into_iter()
            .filter_map(|f| self.infer(&Expr::var(f)))
            .collect();
        let param_ty = match self.pick(&in_scope) {
            Some(t) if self.chance(0.5) => t.clone(),
            _ if self.chance(0.1) => self.first_order_arrow(),
            _ => self.base_ty(),
        };
        let ret = if self.chance(0.7) {
            ty.clone()
        } else {
            self.base_ty()
        };
        let poly = Entry::Poly {
            name: param.clone(),
            base: param_ty.clone(),
        };
        let body = self.scoped(vec![poly], |g| {
            if param_ty.is_arrow() && g.chance(0.8) {
                g.if_has_on(&param, &ret, d)
                    .unwrap_or_else(|| g.expr(&ret, d))
            } else {
                g.expr(&ret, d)
            }
        });
        let entry = Entry::Func {
            name: name.clone(),
            param: param_ty.clone(),
            ret,
        };
        // Continuations call the new function more often than chance would.
        let cont = self.scoped(vec![entry], |g| {
            if g.chance(0.5) {
                g.app_of(&name, ty, d).unwrap_or_else(|| g.expr(ty, d))
            } else {
                g.expr(ty, d)
            }
        });
        Some(Expr::func(name, param, param_ty, body, cont))
    }

    fn app(&mut self, ty: &Type, d: u32) -> Option<Expr> {
        let mut callees: Vec<Ident> = self
            .visible()
            .into_iter()
            .filter_map(|e| match e {
                Entry::Func { name, ret, .. } if &ret == ty => Some(name),
                _ => None,
            })
            .collect();
        let props = self.vals(|t| t.is_propertied() && matches!(t.strip(), Type::Arrow(_, r) if **r == *ty));
        if self.chance(0.3) && !props.is_empty() {
            callees.clear();
        }
        if callees.is_empty() {
            let v = self.pick(&props)?.clone();
            let Type::Arrow(param, _) = self.infer(&Expr::var(v.clone()))?.strip().clone() else {
                return None;
            };
            let arg = self.arg_for(&param, d)?;
            return Some(Expr::app(Expr::extract(Expr::var(v)), arg));
        }
        let f = self.pick(&callees)?.clone();
        self.app_of(&f, ty, d)
    }

    fn app_of(&mut self, f: &str, ty: &Type, d: u32) -> Option<Expr> {
        let Some(Type::Arrow(param, ret)) = self.infer(&Expr::var(f)) else {
            return None;
        };
        if *ret != *ty {
            return None;
        }
        let arg = self.arg_for(&param, d)?;
        let call = Expr::app(Expr::var(f), arg.clone());
        let twice = if param.is_arrow() { 0.6 } else { 0.3 };
        if *ty == Type::Int && self.chance(twice) {
            // The same call twice reuses the monomorphization.
            return Some(Expr::plus(call.clone(), call));
        }
        Some(call)
    }

    fn arg_for(&mut self, param: &Type, d: u32) -> Option<Expr> {
        if param.is_arrow() {
            let funcs = self.func_names(Some(param));
            let props = self.vals(|t| t.is_propertied() && t.strip() == param);
            return match self.rng.gen_range(0..5) {
                0 if !props.is_empty() => Some(Expr::var(self.pick(&props)?.clone())),
                1 | 2 if !funcs.is_empty() => {
                    let g = self.pick(&funcs)?.clone();
                    let p = self.name(&PROPS);
                    let v = self.payload(d);
                    Some(Expr::set(Expr::var(g), p, v))
                }
                _ => Some(Expr::var(self.pick(&funcs)?.clone())),
            };
        }
        match self.rng.gen_range(0..10) {
            0..=4 => Some(self.expr(param, d)),
            5 => {
                let polys = self.polys(param);
                match self.pick(&polys) {
                    Some(x) => Some(Expr::var(x.clone())),
                    None => Some(self.expr(param, d)),
                }
            }
            _ => match self.prop_expr(Some(param), d) {
                Some((e, _)) => Some(e),
                None => Some(self.expr(param, d)),
            },
        }
    }

    fn if_has(&mut self, ty: &Type, d: u32) -> Option<Expr> {
        let candidates: Vec<Ident> = self
            .visible()
            .into_iter()
            .filter(|e| match e {
                Entry::Val { .. } | Entry::Poly { .. } => true,
                Entry::Func { param, .. } => !param.is_arrow(),
            })
            .map(|e| e.name().to_string())
            .collect();
        let x = self.pick(&candidates)?.clone();
        self.if_has_on(&x, ty, d)
    }

    /// Picks a property to test for: often one the scrutinee has, sometimes
    /// with the wrong declared type, otherwise an arbitrary one.
    fn probe(&mut self, scrutinee_ty: &Type) -> (Ident, Type) {
        if let Some(pt) = scrutinee_ty.as_propertied() {
            let props = pt.props().to_vec();
            if let Some(prop) = self.pick(&props).cloned() {
                if self.chance(0.7) {
                    let ty = if self.chance(0.85) {
                        prop.ty.clone()
                    } else {
                        self.payload_ty()
                    };
                    return (prop.name, ty);
                }
            }
        }
        let p = self.name(&PROPS);
        let ty = self.payload_ty();
        (p, ty)
    }

    fn payload_ty(&mut self) -> Type {
        if self.chance(0.2) {
            self.first_order_arrow()
        } else {
            self.base_ty()
        }
    }

    fn if_has_on(&mut self, x: &str, ty: &Type, d: u32) -> Option<Expr> {
        let xty = self.infer(&Expr::var(x))?;
        let (prop, prop_ty) = self.probe(&xty);
        let bind_as = self.name(&VARS);
        let (then_ty, else_ty) =
            typecheck::if_has_branch_types(&xty, &prop, &prop_ty, &bind_as).ok()?;
        let then_branch = self.scoped(
            vec![entry_for(&bind_as, prop_ty.clone()), entry_for(x, then_ty)],
            |g| g.expr(ty, d),
        );
        let else_branch = self.scoped(vec![entry_for(x, else_ty)], |g| g.expr(ty, d));
        Some(Expr::if_has(x, prop, prop_ty, bind_as, then_branch, else_branch))
    }

    fn get(&mut self, ty: &Type, d: u32) -> Option<Expr> {
        for _ in 0..3 {
            let Some((e, t)) = self.prop_expr(None, d) else {
                continue;
            };
            let matching: Vec<Ident> = t
                .as_propertied()
                .map(|pt| {
                    pt.props()
                        .iter()
                        .filter(|p| &p.ty == ty)
                        .map(|p| p.name.clone())
                        .collect()
                })
                .unwrap_or_default();
            if let Some(p) = self.pick(&matching) {
                return Some(Expr::get(e, p.clone()));
            }
        }
        let target = self.operand(d);
        let p = self.name(&PROPS);
        let v = self.expr(ty, d);
        Some(Expr::get(Expr::set(target, p.clone(), v), p))
    }

    /// A property value: `int`, `unit` or a first-order function.
    fn payload(&mut self, d: u32) -> Expr {
        if self.chance(0.2) {
            let funcs = self.func_names(None);
            if let Some(f) = self.pick(&funcs) {
                return Expr::var(f.clone());
            }
        }
        let t = self.base_ty();
        self.expr(&t, d)
    }

    /// An expression of propertied type, over `base` when given.
    fn prop_expr(&mut self, base: Option<&Type>, d: u32) -> Option<(Expr, Type)> {
        let base = match base {
            Some(b) => b.clone(),
            None if self.chance(0.1) => self.first_order_arrow(),
            None => self.base_ty(),
        };
        let choice = if d == 0 {
            self.rng.gen_range(0..2)
        } else {
            self.rng.gen_range(0..6)
        };
        let e = match choice {
            0 => {
                let vars = self.vals(|t| t.is_propertied() && t.strip() == &base);
                match self.pick(&vars) {
                    Some(v) => Expr::var(v.clone()),
                    None => self.fresh_set(&base, d)?,
                }
            }
            1 => self.fresh_set(&base, d)?,
            2 | 3 => {
                let (inner, t) = self.prop_expr(Some(&base), d - 1)?;
                let pt = t.as_propertied()?;
                let names: Vec<Ident> = pt.props().iter().map(|p| p.name.clone()).collect();
                let p = if names.len() >= self.cfg.max_props || (self.chance(0.4) && !names.is_empty()) {
                    self.pick(&names)?.clone()
                } else {
                    self.name(&PROPS)
                };
                let v = self.payload(d - 1);
                Expr::set(inner, p, v)
            }
            4 => {
                let (inner, t) = self.prop_expr(Some(&base), d - 1)?;
                let names: Vec<Ident> =
                    t.as_propertied()?.props().iter().map(|p| p.name.clone()).collect();
                let p = self.pick(&names)?.clone();
                Expr::erase(inner, p)
            }
            _ if base == Type::Int => self.prop_if_has(d - 1)?,
            _ => self.fresh_set(&base, d)?,
        };
        let t = self.infer(&e)?;
        t.is_propertied().then_some((e, t))
    }

    fn fresh_set(&mut self, base: &Type, d: u32) -> Option<Expr> {
        let target = if base.is_arrow() {
            Expr::var(self.pick(&self.func_names(Some(base)))?.clone())
        } else {
            let polys = self.polys(base);
            match self.pick(&polys) {
                Some(x) if self.chance(0.3) => Expr::var(x.clone()),
                _ => self.expr(base, d.saturating_sub(1)),
            }
        };
        let p = self.name(&PROPS);
        let v = self.payload(d.saturating_sub(1));
        Some(Expr::set(target, p, v))
    }

    /// `if-has` whose branches are propertied: both set the same literal so
    /// their types agree.
    fn prop_if_has(&mut self, d: u32) -> Option<Expr> {
        let candidates: Vec<Ident> = self
            .visible()
            .into_iter()
            .filter(|e| !matches!(e, Entry::Func { .. }))
            .map(|e| e.name().to_string())
            .collect();
        let x = self.pick(&candidates)?.clone();
        let xty = self.infer(&Expr::var(x.clone()))?;
        let (prop, prop_ty) = self.probe(&xty);
        let bind_as = self.name(&VARS);
        let (then_ty, else_ty) =
            typecheck::if_has_branch_types(&xty, &prop, &prop_ty, &bind_as).ok()?;
        let q = self.name(&PROPS);
        let c = self.int_lit();
        let then_branch = self.scoped(
            vec![entry_for(&bind_as, prop_ty.clone()), entry_for(&x, then_ty)],
            |g| g.expr(&Type::Int, d),
        );
        let else_branch = self.scoped(vec![entry_for(&x, else_ty)], |g| g.expr(&Type::Int, d));
        Some(Expr::if_has(
            x,
            prop,
            prop_ty,
            bind_as,
            Expr::set(then_branch, q.clone(), c.clone()),
            Expr::set(else_branch, q, c),
        ))
    }
}
