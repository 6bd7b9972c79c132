use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::value::{IntWidth, RtArray, RtValue, Value};
use crate::syntax::*;

pub const DEFAULT_FUEL: u64 = 100_000;
const MAX_ARRAY_CELLS: i64 = 1 << 20;

/// Canned results for calls and initial values for fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StubEnv {
    /// Call key to result sequence; results are handed out cyclically.
    pub calls: BTreeMap<String, Vec<Value>>,
    pub fields: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Call,
    New,
    FieldWrite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: EventKind,
    pub name: String,
    pub args: Vec<Value>,
    /// Interpreter step at which the event fired. Not part of trace equivalence.
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Return(Value),
    Thrown(String),
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub outcome: Outcome,
}

impl Trace {
    /// Same events (ignoring step counters) and same outcome.
    pub fn equivalent(&self, other: &Trace) -> bool {
        self.outcome == other.outcome && same_events(&self.events, &other.events)
    }
}

pub(crate) fn same_events(a: &[TraceEvent], b: &[TraceEvent]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.kind == y.kind && x.name == y.name && x.args == y.args)
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("method `{name}` takes {expected} arguments, got {got}")]
    Arity { name: String, expected: usize, got: usize },
}

/// Runs `method` on `args`. Calls are answered from `stubs` (or a few
/// library builtins when no stub exists) and recorded in the trace.
pub fn evaluate(method: &Method, args: &[Value], fuel: u64, stubs: &StubEnv) -> Result<Trace, EvalError> {
    if args.len() != method.params.len() {
        return Err(EvalError::Arity { name: method.name.clone(), expected: method.params.len(), got: args.len() });
    }
    let mut m = Machine::new(stubs, fuel);
    let result = m.run(method, args);
    let outcome = match result {
        Ok(v) => Outcome::Return(v.to_value()),
        Err(Abort::Throw(kind)) => Outcome::Thrown(kind),
        Err(Abort::Fuel) => Outcome::FuelExhausted,
    };
    Ok(Trace { events: m.events, outcome })
}

#[derive(Debug)]
enum Abort {
    Throw(String),
    Fuel,
}

type EResult<T> = Result<T, Abort>;

fn throw<T>(kind: &str) -> EResult<T> {
    Err(Abort::Throw(kind.to_string()))
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(RtValue),
}

enum Place {
    Local(usize, usize),
    Field(String),
    Elem(RtValue, i64),
}

struct Slot {
    name: String,
    ty: TypeRef,
    value: RtValue,
}

struct Machine<'a> {
    stubs: &'a StubEnv,
    cursors: HashMap<String, usize>,
    fields: HashMap<String, RtValue>,
    frames: Vec<Vec<Slot>>,
    events: Vec<TraceEvent>,
    return_type: TypeRef,
    steps: u64,
    fuel: u64,
}

impl<'a> Machine<'a> {
    fn new(stubs: &'a StubEnv, fuel: u64) -> Self {
        Machine {
            stubs,
            cursors: HashMap::new(),
            fields: HashMap::new(),
            frames: Vec::new(),
            events: Vec::new(),
            return_type: TypeRef::simple("void"),
            steps: 0,
            fuel,
        }
    }

    fn tick(&mut self) -> EResult<()> {
        self.tick_n(1)
    }

    fn tick_n(&mut self, n: u64) -> EResult<()> {
        self.steps += n;
        if self.steps > self.fuel {
            Err(Abort::Fuel)
        } else {
            Ok(())
        }
    }

    /// Strings cost fuel in proportion to their length.
    fn charge(&mut self, v: &RtValue) -> EResult<()> {
        if let RtValue::Str(s) = v {
            if s.len() as i64 > MAX_ARRAY_CELLS {
                return throw("OutOfMemoryError");
            }
            self.tick_n(s.len() as u64 / 64)?;
        }
        Ok(())
    }

    fn run(&mut self, method: &Method, args: &[Value]) -> EResult<RtValue> {
        self.return_type = method.return_type.clone();
        let mut frame = Vec::new();
        for (p, a) in method.params.iter().zip(args) {
            let mut ty = p.ty.clone();
            if p.varargs {
                ty.dims += 1;
            }
            let value = coerce(RtValue::from_value(a), &ty)?;
            frame.push(Slot { name: p.name.clone(), ty, value });
        }
        self.frames.push(frame);
        match self.exec_block(&method.body)? {
            Flow::Return(v) => Ok(v),
            _ => Ok(RtValue::Void),
        }
    }

    // ---- statements ----

    fn exec_block(&mut self, b: &Block) -> EResult<Flow> {
        let depth = self.frames.len();
        self.frames.push(Vec::new());
        let r = self.exec_stmts(&b.stmts);
        self.frames.truncate(depth);
        r
    }

    fn exec_stmts(&mut self, stmts: &[Stmt]) -> EResult<Flow> {
        for s in stmts {
            match self.exec_stmt(s)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn declare(&mut self, name: &str, ty: &TypeRef, value: RtValue) {
        let frame = self.frames.last_mut().expect("no active frame");
        frame.push(Slot { name: name.to_string(), ty: ty.clone(), value });
    }

    fn exec_stmt(&mut self, s: &Stmt) -> EResult<Flow> {
        self.tick()?;
        match &s.kind {
            StmtKind::LocalDecl { ty, name, init, .. } => {
                let v = match init {
                    Some(e) => {
                        let v = self.eval(e)?;
                        coerce(v, ty)?
                    }
                    None => default_value(ty),
                };
                self.declare(name, ty, v);
                Ok(Flow::Normal)
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
                Ok(Flow::Normal)
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                if self.eval_bool(cond)? {
                    self.exec_block(then_branch)
                } else {
                    match else_branch {
                        Some(ElseBranch::Block(b)) => self.exec_block(b),
                        Some(ElseBranch::If(s)) => self.exec_stmt(s),
                        None => Ok(Flow::Normal),
                    }
                }
            }
            StmtKind::For { init, cond, update, body } => {
                let depth = self.frames.len();
                self.frames.push(Vec::new());
                let r = self.exec_for(init.as_deref(), cond.as_ref(), update.as_ref(), body);
                self.frames.truncate(depth);
                r
            }
            StmtKind::EnhancedFor { ty, name, iterable, body, .. } => {
                let it = self.eval(iterable)?;
                let arr = match it {
                    RtValue::Array(a) => a,
                    RtValue::Null => return throw("NullPointerException"),
                    _ => return Ok(Flow::Normal),
                };
                let mut i = 0;
                loop {
                    self.tick()?;
                    let item = {
                        let a = arr.borrow();
                        match a.items.get(i) {
                            Some(v) => v.clone(),
                            None => break,
                        }
                    };
                    i += 1;
                    let depth = self.frames.len();
                    self.frames.push(Vec::new());
                    let v = coerce(item, ty);
                    let r = v.and_then(|v| {
                        self.declare(name, ty, v);
                        self.exec_block(body)
                    });
                    self.frames.truncate(depth);
                    match r? {
                        Flow::Normal | Flow::Continue => {}
                        Flow::Break => break,
                        ret @ Flow::Return(_) => return Ok(ret),
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::While { cond, body } => {
                while self.eval_bool(cond)? {
                    match self.exec_block(body)? {
                        Flow::Normal | Flow::Continue => {}
                        Flow::Break => break,
                        ret @ Flow::Return(_) => return Ok(ret),
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::DoWhile { body, cond } => {
                loop {
                    match self.exec_block(body)? {
                        Flow::Normal | Flow::Continue => {}
                        Flow::Break => break,
                        ret @ Flow::Return(_) => return Ok(ret),
                    }
                    if !self.eval_bool(cond)? {
                        break;
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => {
                        let v = self.eval(e)?;
                        let rt = self.return_type.clone();
                        coerce(v, &rt)?
                    }
                    None => RtValue::Void,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Break => Ok(Flow::Break),
            StmtKind::Continue => Ok(Flow::Continue),
            StmtKind::Throw(e) => match self.eval(e)? {
                RtValue::Object(c) => Err(Abort::Throw(c.to_string())),
                RtValue::Null => throw("NullPointerException"),
                other => Err(Abort::Throw(other.type_desc())),
            },
            StmtKind::Try { body, catches, finally } => {
                let depth = self.frames.len();
                let mut r = self.exec_block(body);
                self.frames.truncate(depth);
                if let Err(Abort::Throw(kind)) = &r {
                    let kind = kind.clone();
                    if let Some(c) = catches.iter().find(|c| exception_is_a(&kind, &c.ty.name)) {
                        self.frames.push(Vec::new());
                        self.declare(&c.name, &c.ty, RtValue::Object(kind.as_str().into()));
                        r = self.exec_block(&c.body);
                        self.frames.truncate(depth);
                    }
                }
                if let Err(Abort::Fuel) = r {
                    return r;
                }
                if let Some(f) = finally {
                    match self.exec_block(f)? {
                        Flow::Normal => {}
                        other => return Ok(other),
                    }
                }
                r
            }
            StmtKind::Block(b) => self.exec_block(b),
        }
    }

    fn exec_for(
        &mut self,
        init: Option<&Stmt>,
        cond: Option<&Expr>,
        update: Option<&Expr>,
        body: &Block,
    ) -> EResult<Flow> {
        if let Some(i) = init {
            self.exec_stmt(i)?;
        }
        loop {
            self.tick()?;
            if let Some(c) = cond {
                if !self.eval_bool(c)? {
                    break;
                }
            }
            match self.exec_block(body)? {
                Flow::Normal | Flow::Continue => {}
                Flow::Break => break,
                ret @ Flow::Return(_) => return Ok(ret),
            }
            if let Some(u) = update {
                self.eval(u)?;
            }
        }
        Ok(Flow::Normal)
    }

    // ---- expressions ----

    fn eval_bool(&mut self, e: &Expr) -> EResult<bool> {
        match self.eval(e)? {
            RtValue::Bool(b) => Ok(b),
            RtValue::Null => throw("NullPointerException"),
            _ => throw("ClassCastException"),
        }
    }

    fn lookup_local(&self, name: &str) -> Option<(usize, usize)> {
        for (fi, frame) in self.frames.iter().enumerate().rev() {
            if let Some(si) = frame.iter().rposition(|s| s.name == name) {
                return Some((fi, si));
            }
        }
        None
    }

    /// `Math`, `java.lang.Integer` and the like: free names starting with an
    /// uppercase letter, possibly package-qualified.
    fn static_qualifier(&self, e: &Expr) -> Option<String> {
        fn path(e: &Expr) -> Option<Vec<&str>> {
            match &e.kind {
                ExprKind::Ident(n) => Some(vec![n.as_str()]),
                ExprKind::FieldAccess { recv, name } => {
                    let mut p = path(recv)?;
                    p.push(name.as_str());
                    Some(p)
                }
                _ => None,
            }
        }
        let p = path(e)?;
        if self.lookup_local(p[0]).is_some() {
            return None;
        }
        let last = *p.last()?;
        last.starts_with(|c: char| c.is_ascii_uppercase()).then(|| last.to_string())
    }

    fn read_field(&mut self, key: &str) -> RtValue {
        if let Some(v) = self.fields.get(key) {
            return v.clone();
        }
        let v = match self.stubs.fields.get(key) {
            Some(v) => RtValue::from_value(v),
            None => builtin_constant(key).unwrap_or(RtValue::Int(0, IntWidth::I32)),
        };
        self.fields.insert(key.to_string(), v.clone());
        v
    }

    fn write_field(&mut self, key: String, v: RtValue) {
        self.events.push(TraceEvent {
            kind: EventKind::FieldWrite,
            name: key.clone(),
            args: vec![v.to_value()],
            step: self.steps,
        });
        self.fields.insert(key, v);
    }

    fn place(&mut self, e: &Expr) -> EResult<Place> {
        match &e.kind {
            ExprKind::Ident(n) => Ok(match self.lookup_local(n) {
                Some((f, s)) => Place::Local(f, s),
                None => Place::Field(n.clone()),
            }),
            ExprKind::Paren(inner) => self.place(inner),
            ExprKind::FieldAccess { recv, name } => {
                if matches!(recv.kind, ExprKind::This) {
                    return Ok(Place::Field(name.clone()));
                }
                if let Some(q) = self.static_qualifier(recv) {
                    return Ok(Place::Field(format!("{q}.{name}")));
                }
                match self.eval(recv)? {
                    RtValue::Null => throw("NullPointerException"),
                    RtValue::Object(c) => Ok(Place::Field(format!("{c}.{name}"))),
                    other => Ok(Place::Field(format!("{}.{name}", other.type_desc()))),
                }
            }
            ExprKind::ArrayAccess { recv, index } => {
                let arr = self.eval(recv)?;
                let idx = self.eval(index)?;
                let idx = as_index(&idx)?;
                Ok(Place::Elem(arr, idx))
            }
            _ => throw("IllegalAssignmentTarget"),
        }
    }

    fn place_type(&self, p: &Place) -> Option<TypeRef> {
        match p {
            Place::Local(f, s) => Some(self.frames[*f][*s].ty.clone()),
            Place::Elem(RtValue::Array(a), _) => Some(a.borrow().elem.clone()),
            _ => None,
        }
    }

    fn read_place(&mut self, p: &Place) -> EResult<RtValue> {
        match p {
            Place::Local(f, s) => Ok(self.frames[*f][*s].value.clone()),
            Place::Field(k) => Ok(self.read_field(k)),
            Place::Elem(arr, i) => array_get(arr, *i),
        }
    }

    fn write_place(&mut self, p: Place, v: RtValue) -> EResult<RtValue> {
        match p {
            Place::Local(f, s) => {
                let v = coerce(v, &self.frames[f][s].ty)?;
                self.frames[f][s].value = v.clone();
                Ok(v)
            }
            Place::Field(k) => {
                self.write_field(k, v.clone());
                Ok(v)
            }
            Place::Elem(arr, i) => {
                let RtValue::Array(a) = &arr else {
                    return throw("NullPointerException");
                };
                let elem = a.borrow().elem.clone();
                let len = a.borrow().items.len() as i64;
                if i < 0 || i >= len {
                    return throw("ArrayIndexOutOfBoundsException");
                }
                let v = coerce(v, &elem)?;
                a.borrow_mut().items[i as usize] = v.clone();
                Ok(v)
            }
        }
    }

    /// Compound update `place op= rhs` with the implicit narrowing cast.
    fn update_place(&mut self, p: Place, old: RtValue, op: BinaryOp, rhs: RtValue) -> EResult<RtValue> {
        let ty = self.place_type(&p).unwrap_or_else(|| runtime_type(&old));
        let raw = binary(op, old, rhs)?;
        self.charge(&raw)?;
        let v = if ty.is_primitive() { cast(raw, &ty)? } else { raw };
        self.write_place(p, v)
    }

    fn eval(&mut self, e: &Expr) -> EResult<RtValue> {
        self.tick()?;
        match &e.kind {
            ExprKind::Literal(l) => Ok(literal_value(l)),
            ExprKind::Ident(n) => match self.lookup_local(n) {
                Some((f, s)) => Ok(self.frames[f][s].value.clone()),
                None => Ok(self.read_field(n)),
            },
            ExprKind::This => Ok(RtValue::Object("this".into())),
            ExprKind::Paren(inner) => self.eval(inner),
            ExprKind::FieldAccess { recv, name } => {
                if !matches!(recv.kind, ExprKind::This) && self.static_qualifier(recv).is_none() {
                    let r = self.eval(recv)?;
                    return match r {
                        RtValue::Null => throw("NullPointerException"),
                        RtValue::Array(a) if name == "length" => {
                            Ok(RtValue::Int(a.borrow().items.len() as i64, IntWidth::I32))
                        }
                        RtValue::Object(c) => Ok(self.read_field(&format!("{c}.{name}"))),
                        other => Ok(self.read_field(&format!("{}.{name}", other.type_desc()))),
                    };
                }
                let p = self.place(e)?;
                self.read_place(&p)
            }
            ExprKind::ArrayAccess { recv, index } => {
                let arr = self.eval(recv)?;
                let idx = self.eval(index)?;
                array_get(&arr, as_index(&idx)?)
            }
            ExprKind::MethodCall { recv, name, args } => self.call(recv.as_deref(), name, args),
            ExprKind::Binary { op: BinaryOp::And, lhs, rhs } => {
                Ok(RtValue::Bool(self.eval_bool(lhs)? && self.eval_bool(rhs)?))
            }
            ExprKind::Binary { op: BinaryOp::Or, lhs, rhs } => {
                Ok(RtValue::Bool(self.eval_bool(lhs)? || self.eval_bool(rhs)?))
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                let v = binary(*op, l, r)?;
                self.charge(&v)?;
                Ok(v)
            }
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand)?;
                unary(*op, v)
            }
            ExprKind::IncDec { op, prefix, target } => {
                let p = self.place(target)?;
                let old = self.read_place(&p)?;
                let bop = if *op == IncDecOp::Inc { BinaryOp::Add } else { BinaryOp::Sub };
                let new = self.update_place(p, old.clone(), bop, RtValue::Int(1, IntWidth::I32))?;
                Ok(if *prefix { new } else { old })
            }
            ExprKind::Assign { op, target, value } => {
                let p = self.place(target)?;
                match op.binary() {
                    None => {
                        let v = self.eval(value)?;
                        self.write_place(p, v)
                    }
                    Some(bop) => {
                        let old = self.read_place(&p)?;
                        let rhs = self.eval(value)?;
                        self.update_place(p, old, bop, rhs)
                    }
                }
            }
            ExprKind::Ternary { cond, then_expr, else_expr } => {
                if self.eval_bool(cond)? {
                    self.eval(then_expr)
                } else {
                    self.eval(else_expr)
                }
            }
            ExprKind::Cast { ty, expr } => {
                let v = self.eval(expr)?;
                cast(v, ty)
            }
            ExprKind::InstanceOf { expr, ty } => {
                let v = self.eval(expr)?;
                Ok(RtValue::Bool(instance_of(&v, ty)))
            }
            ExprKind::New { ty, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a)?.to_value());
                }
                let class = simple_name(&ty.name).to_string();
                self.events.push(TraceEvent {
                    kind: EventKind::New,
                    name: class.clone(),
                    args: vals,
                    step: self.steps,
                });
                Ok(RtValue::Object(class.into()))
            }
            ExprKind::ArrayNew { elem, dims, extra_dims, init } => {
                let total_dims = dims.len() + extra_dims;
                if let Some(items) = init {
                    let elem_ty = TypeRef { dims: total_dims - 1, ..elem.clone() };
                    let mut vals = Vec::with_capacity(items.len());
                    for it in items {
                        let v = self.eval(it)?;
                        vals.push(coerce(v, &elem_ty)?);
                    }
                    return Ok(RtValue::Array(Rc::new(RefCell::new(RtArray { elem: elem_ty, items: vals }))));
                }
                let mut sizes = Vec::with_capacity(dims.len());
                for d in dims {
                    let v = self.eval(d)?;
                    sizes.push(as_index(&v)?);
                }
                if sizes.iter().any(|s| *s < 0) {
                    return throw("NegativeArraySizeException");
                }
                let cells = sizes.iter().try_fold(1i64, |acc, s| acc.checked_mul((*s).max(1)));
                match cells {
                    Some(c) if c <= MAX_ARRAY_CELLS => self.tick_n(c as u64 / 64)?,
                    _ => return throw("OutOfMemoryError"),
                }
                Ok(new_array(elem, &sizes, total_dims))
            }
        }
    }

    fn call(&mut self, recv: Option<&Expr>, name: &str, args: &[Expr]) -> EResult<RtValue> {
        let mut vals = Vec::with_capacity(args.len() + 1);
        let key = match recv {
            None => name.to_string(),
            Some(r) if matches!(r.kind, ExprKind::This) => name.to_string(),
            Some(r) => match self.static_qualifier(r) {
                Some(q) => format!("{q}.{name}"),
                None => {
                    let rv = self.eval(r)?;
                    vals.push(rv);
                    format!("#{name}")
                }
            },
        };
        for a in args {
            vals.push(self.eval(a)?);
        }
        if key.starts_with('#') && matches!(vals[0], RtValue::Null) {
            return throw("NullPointerException");
        }
        self.events.push(TraceEvent {
            kind: EventKind::Call,
            name: key.clone(),
            args: vals.iter().map(RtValue::to_value).collect(),
            step: self.steps,
        });
        if let Some(seq) = self.stubs.calls.get(&key).filter(|s| !s.is_empty()) {
            let cur = self.cursors.entry(key).or_insert(0);
            let v = RtValue::from_value(&seq[*cur % seq.len()]);
            *cur += 1;
            return Ok(v);
        }
        match builtin_call(&key, &vals) {
            Some(r) => r,
            None => Ok(RtValue::Int(0, IntWidth::I32)),
        }
    }
}

// ---- value operations ----

fn simple_name(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}

fn runtime_type(v: &RtValue) -> TypeRef {
    match v {
        RtValue::Int(_, w) => TypeRef::simple(w.type_name()),
        RtValue::Double(_) => TypeRef::simple("double"),
        RtValue::Bool(_) => TypeRef::simple("boolean"),
        RtValue::Char(_) => TypeRef::simple("char"),
        RtValue::Str(_) => TypeRef::simple("String"),
        _ => TypeRef::simple("Object"),
    }
}

fn as_index(v: &RtValue) -> EResult<i64> {
    match v {
        RtValue::Int(i, _) => Ok(*i),
        RtValue::Char(c) => Ok(*c as i64),
        RtValue::Null => throw("NullPointerException"),
        _ => throw("ClassCastException"),
    }
}

fn array_get(arr: &RtValue, i: i64) -> EResult<RtValue> {
    match arr {
        RtValue::Array(a) => {
            let a = a.borrow();
            if i < 0 || i >= a.items.len() as i64 {
                throw("ArrayIndexOutOfBoundsException")
            } else {
                Ok(a.items[i as usize].clone())
            }
        }
        RtValue::Null => throw("NullPointerException"),
        _ => throw("ClassCastException"),
    }
}

fn new_array(base: &TypeRef, sizes: &[i64], total_dims: usize) -> RtValue {
    let elem = TypeRef { dims: total_dims - 1, ..base.clone() };
    let n = sizes[0] as usize;
    let items = if sizes.len() > 1 {
        (0..n).map(|_| new_array(base, &sizes[1..], total_dims - 1)).collect()
    } else {
        (0..n).map(|_| default_value(&elem)).collect()
    };
    RtValue::Array(Rc::new(RefCell::new(RtArray { elem, items })))
}

pub(crate) fn default_value(ty: &TypeRef) -> RtValue {
    if ty.dims > 0 {
        return RtValue::Null;
    }
    match ty.name.as_str() {
        "int" => RtValue::Int(0, IntWidth::I32),
        "long" => RtValue::Int(0, IntWidth::I64),
        "short" => RtValue::Int(0, IntWidth::I16),
        "byte" => RtValue::Int(0, IntWidth::I8),
        "char" => RtValue::Char(0),
        "double" | "float" => RtValue::Double(0.0),
        "boolean" => RtValue::Bool(false),
        _ => RtValue::Null,
    }
}

/// Assignment conversion. Unboxing `null` raises NullPointerException.
fn coerce(v: RtValue, ty: &TypeRef) -> EResult<RtValue> {
    if ty.dims > 0 {
        return Ok(v);
    }
    let boxed = match ty.name.as_str() {
        "Integer" => Some("int"),
        "Long" => Some("long"),
        "Short" => Some("short"),
        "Byte" => Some("byte"),
        "Character" => Some("char"),
        "Double" => Some("double"),
        "Float" => Some("float"),
        "Boolean" => Some("boolean"),
        _ => None,
    };
    if let Some(prim) = boxed {
        return match v {
            RtValue::Null => Ok(RtValue::Null),
            v => cast(v, &TypeRef::simple(prim)),
        };
    }
    if ty.is_primitive() {
        if matches!(v, RtValue::Null) {
            return throw("NullPointerException");
        }
        return cast(v, ty);
    }
    Ok(v)
}

fn cast(v: RtValue, ty: &TypeRef) -> EResult<RtValue> {
    if !ty.is_primitive() {
        return if instance_of(&v, ty) || matches!(v, RtValue::Null) || !is_known_class(&ty.name) {
            Ok(v)
        } else {
            throw("ClassCastException")
        };
    }
    let name = ty.name.as_str();
    if name == "boolean" {
        return match v {
            RtValue::Bool(_) => Ok(v),
            RtValue::Null => throw("NullPointerException"),
            _ => throw("ClassCastException"),
        };
    }
    let num = match v {
        RtValue::Int(i, _) => Num::I(i),
        RtValue::Char(c) => Num::I(c as i64),
        RtValue::Double(d) => Num::D(d),
        RtValue::Null => return throw("NullPointerException"),
        _ => return throw("ClassCastException"),
    };
    Ok(match (name, num) {
        ("double", Num::I(i)) => RtValue::Double(i as f64),
        ("double", Num::D(d)) => RtValue::Double(d),
        ("float", Num::I(i)) => RtValue::Double(i as f32 as f64),
        ("float", Num::D(d)) => RtValue::Double(d as f32 as f64),
        ("char", Num::I(i)) => RtValue::Char(i as u16),
        ("char", Num::D(d)) => RtValue::Char(d as i32 as u16),
        ("long", Num::I(i)) => RtValue::Int(i, IntWidth::I64),
        // Rust float-to-int casts saturate and send NaN to zero, as in Java.
        ("long", Num::D(d)) => RtValue::Int(d as i64, IntWidth::I64),
        (n, num) => {
            let w = IntWidth::for_type(n).unwrap_or(IntWidth::I32);
            let i = match num {
                Num::I(i) => i,
                Num::D(d) => d as i32 as i64,
            };
            RtValue::Int(w.wrap(i), w)
        }
    })
}

fn is_known_class(name: &str) -> bool {
    matches!(simple_name(name), "String" | "Integer" | "Long" | "Double" | "Boolean" | "Character")
}

fn instance_of(v: &RtValue, ty: &TypeRef) -> bool {
    let n = simple_name(&ty.name);
    match v {
        RtValue::Null => false,
        RtValue::Str(_) => ty.dims == 0 && matches!(n, "String" | "Object" | "CharSequence" | "Comparable"),
        RtValue::Array(a) => {
            n == "Object" && ty.dims == 0 || {
                let a = a.borrow();
                ty.dims == a.elem.dims + 1 && simple_name(&a.elem.name) == n
            }
        }
        RtValue::Object(c) => ty.dims == 0 && (n == "Object" || exception_is_a(c, n) || &**c == n),
        RtValue::Int(_, w) => ty.dims == 0 && (n == "Object" || n == "Number" || IntWidth::for_type(n) == Some(*w)),
        RtValue::Double(_) => ty.dims == 0 && matches!(n, "Object" | "Number" | "Double"),
        RtValue::Bool(_) => ty.dims == 0 && matches!(n, "Object" | "Boolean"),
        RtValue::Char(_) => ty.dims == 0 && matches!(n, "Object" | "Character"),
        RtValue::Void => false,
    }
}

const RUNTIME_EXCEPTIONS: &[&str] = &[
    "RuntimeException",
    "ArithmeticException",
    "NullPointerException",
    "ArrayIndexOutOfBoundsException",
    "StringIndexOutOfBoundsException",
    "IndexOutOfBoundsException",
    "NegativeArraySizeException",
    "ClassCastException",
    "IllegalArgumentException",
    "IllegalStateException",
    "NumberFormatException",
    "UnsupportedOperationException",
    "ArrayStoreException",
];

/// Whether an exception of class `kind` is caught by `catch (target e)`.
pub fn exception_is_a(kind: &str, target: &str) -> bool {
    let kind = simple_name(kind);
    let target = simple_name(target);
    if kind == target || target == "Throwable" {
        return true;
    }
    let is_error = kind.ends_with("Error");
    match target {
        "Exception" => !is_error,
        "RuntimeException" => RUNTIME_EXCEPTIONS.contains(&kind),
        "IndexOutOfBoundsException" => {
            matches!(kind, "ArrayIndexOutOfBoundsException" | "StringIndexOutOfBoundsException")
        }
        "IllegalArgumentException" => kind == "NumberFormatException",
        "Error" => is_error,
        _ => false,
    }
}

#[derive(Clone, Copy)]
enum Num {
    I(i64),
    D(f64),
}

/// Numeric view after unary promotion: (value, is_long) or double.
fn numeric(v: &RtValue) -> Option<(Num, bool)> {
    match v {
        RtValue::Int(i, w) => Some((Num::I(*i), *w == IntWidth::I64)),
        RtValue::Char(c) => Some((Num::I(*c as i64), false)),
        RtValue::Double(d) => Some((Num::D(*d), false)),
        _ => None,
    }
}

fn int_result(v: i64, long: bool) -> RtValue {
    if long {
        RtValue::Int(v, IntWidth::I64)
    } else {
        RtValue::Int(v as i32 as i64, IntWidth::I32)
    }
}

fn binary(op: BinaryOp, l: RtValue, r: RtValue) -> EResult<RtValue> {
    use BinaryOp::*;
    if op == Add && (matches!(l, RtValue::Str(_)) || matches!(r, RtValue::Str(_))) {
        return Ok(RtValue::Str(format!("{}{}", l.java_string(), r.java_string()).into()));
    }
    if let (RtValue::Bool(a), RtValue::Bool(b)) = (&l, &r) {
        let (a, b) = (*a, *b);
        return Ok(RtValue::Bool(match op {
            Eq => a == b,
            Ne => a != b,
            BitAnd | And => a & b,
            BitOr | Or => a | b,
            BitXor => a ^ b,
            _ => return throw("ClassCastException"),
        }));
    }
    if matches!(op, Shl | Shr | UShr) {
        let (Some((Num::I(a), long)), Some((Num::I(b), _))) = (numeric(&l), numeric(&r)) else {
            return throw("ClassCastException");
        };
        return Ok(if long {
            let s = (b & 63) as u32;
            RtValue::Int(
                match op {
                    Shl => a.wrapping_shl(s),
                    Shr => a >> s,
                    _ => ((a as u64) >> s) as i64,
                },
                IntWidth::I64,
            )
        } else {
            let a = a as i32;
            let s = (b & 31) as u32;
            RtValue::Int(
                match op {
                    Shl => a.wrapping_shl(s),
                    Shr => a >> s,
                    _ => ((a as u32) >> s) as i32,
                } as i64,
                IntWidth::I32,
            )
        });
    }
    match (numeric(&l), numeric(&r)) {
        (Some((a, la)), Some((b, lb))) => {
            let long = la || lb;
            match (a, b) {
                (Num::I(a), Num::I(b)) => int_op(op, a, b, long),
                (a, b) => {
                    let a = match a {
                        Num::I(i) => i as f64,
                        Num::D(d) => d,
                    };
                    let b = match b {
                        Num::I(i) => i as f64,
                        Num::D(d) => d,
                    };
                    Ok(match op {
                        Add => RtValue::Double(a + b),
                        Sub => RtValue::Double(a - b),
                        Mul => RtValue::Double(a * b),
                        Div => RtValue::Double(a / b),
                        Rem => RtValue::Double(a % b),
                        Eq => RtValue::Bool(a == b),
                        Ne => RtValue::Bool(a != b),
                        Lt => RtValue::Bool(a < b),
                        Le => RtValue::Bool(a <= b),
                        Gt => RtValue::Bool(a > b),
                        Ge => RtValue::Bool(a >= b),
                        _ => return throw("ClassCastException"),
                    })
                }
            }
        }
        _ => match op {
            Eq => Ok(RtValue::Bool(ref_eq(&l, &r))),
            Ne => Ok(RtValue::Bool(!ref_eq(&l, &r))),
            _ if matches!(l, RtValue::Null) || matches!(r, RtValue::Null) => throw("NullPointerException"),
            _ => throw("ClassCastException"),
        },
    }
}

fn int_op(op: BinaryOp, a: i64, b: i64, long: bool) -> EResult<RtValue> {
    use BinaryOp::*;
    if long {
        Ok(match op {
            Add => int_result(a.wrapping_add(b), true),
            Sub => int_result(a.wrapping_sub(b), true),
            Mul => int_result(a.wrapping_mul(b), true),
            Div | Rem if b == 0 => return throw("ArithmeticException"),
            Div => int_result(a.wrapping_div(b), true),
            Rem => int_result(a.wrapping_rem(b), true),
            BitAnd => int_result(a & b, true),
            BitOr => int_result(a | b, true),
            BitXor => int_result(a ^ b, true),
            Eq => RtValue::Bool(a == b),
            Ne => RtValue::Bool(a != b),
            Lt => RtValue::Bool(a < b),
            Le => RtValue::Bool(a <= b),
            Gt => RtValue::Bool(a > b),
            Ge => RtValue::Bool(a >= b),
            _ => return throw("ClassCastException"),
        })
    } else {
        let (a, b) = (a as i32, b as i32);
        Ok(match op {
            Add => int_result(a.wrapping_add(b) as i64, false),
            Sub => int_result(a.wrapping_sub(b) as i64, false),
            Mul => int_result(a.wrapping_mul(b) as i64, false),
            Div | Rem if b == 0 => return throw("ArithmeticException"),
            Div => int_result(a.wrapping_div(b) as i64, false),
            Rem => int_result(a.wrapping_rem(b) as i64, false),
            BitAnd => int_result((a & b) as i64, false),
            BitOr => int_result((a | b) as i64, false),
            BitXor => int_result((a ^ b) as i64, false),
            Eq => RtValue::Bool(a == b),
            Ne => RtValue::Bool(a != b),
            Lt => RtValue::Bool(a < b),
            Le => RtValue::Bool(a <= b),
            Gt => RtValue::Bool(a > b),
            Ge => RtValue::Bool(a >= b),
            _ => return throw("ClassCastException"),
        })
    }
}

/// Reference comparison; strings compare by content (interning is assumed).
fn ref_eq(a: &RtValue, b: &RtValue) -> bool {
    match (a, b) {
        (RtValue::Null, RtValue::Null) => true,
        (RtValue::Str(x), RtValue::Str(y)) => x == y,
        (RtValue::Array(x), RtValue::Array(y)) => Rc::ptr_eq(x, y),
        (RtValue::Object(x), RtValue::Object(y)) => Rc::ptr_eq(x, y),
        _ => false,
    }
}

fn unary(op: UnaryOp, v: RtValue) -> EResult<RtValue> {
    match op {
        UnaryOp::Not => match v {
            RtValue::Bool(b) => Ok(RtValue::Bool(!b)),
            RtValue::Null => throw("NullPointerException"),
            _ => throw("ClassCastException"),
        },
        _ => match numeric(&v) {
            Some((Num::I(i), long)) => Ok(match op {
                UnaryOp::Neg => {
                    int_result(if long { i.wrapping_neg() } else { (i as i32).wrapping_neg() as i64 }, long)
                }
                UnaryOp::BitNot => int_result(!i, long),
                _ => int_result(i, long),
            }),
            Some((Num::D(d), _)) => match op {
                UnaryOp::Neg => Ok(RtValue::Double(-d)),
                UnaryOp::Plus => Ok(RtValue::Double(d)),
                _ => throw("ClassCastException"),
            },
            None if matches!(v, RtValue::Null) => throw("NullPointerException"),
            None => throw("ClassCastException"),
        },
    }
}

// ---- literals ----

fn parse_integral(lexeme: &str) -> u64 {
    let s: String = lexeme.chars().filter(|c| *c != '_').collect();
    let s = s.trim_end_matches(['l', 'L']);
    let (digits, radix) = if let Some(h) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        (h, 16)
    } else if let Some(b) = s.strip_prefix("0b").or_else(|| s.strip_prefix("0B")) {
        (b, 2)
    } else if s.len() > 1 && s.starts_with('0') {
        (&s[1..], 8)
    } else {
        (s, 10)
    };
    u64::from_str_radix(digits, radix).unwrap_or(0)
}

pub(crate) fn literal_value(l: &Literal) -> RtValue {
    match l {
        Literal::Int(s) => RtValue::Int(parse_integral(s) as u32 as i32 as i64, IntWidth::I32),
        Literal::Long(s) => RtValue::Int(parse_integral(s) as i64, IntWidth::I64),
        Literal::Double(s) => {
            let t: String = s.chars().filter(|c| *c != '_').collect();
            let is_float = t.ends_with(['f', 'F']);
            let d: f64 = t.trim_end_matches(['f', 'F', 'd', 'D']).parse().unwrap_or(0.0);
            RtValue::Double(if is_float { d as f32 as f64 } else { d })
        }
        Literal::Bool(b) => RtValue::Bool(*b),
        Literal::Str(s) => RtValue::Str(unescape(&s[1..s.len() - 1]).into()),
        Literal::Char(s) => {
            let u = unescape_utf16(&s[1..s.len() - 1]);
            RtValue::Char(u.first().copied().unwrap_or(0))
        }
        Literal::Null => RtValue::Null,
    }
}

fn unescape_utf16(s: &str) -> Vec<u16> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            let mut buf = [0u16; 2];
            out.extend_from_slice(c.encode_utf16(&mut buf));
            continue;
        }
        match chars.next() {
            Some('n') => out.push(b'\n' as u16),
            Some('t') => out.push(b'\t' as u16),
            Some('r') => out.push(b'\r' as u16),
            Some('b') => out.push(8),
            Some('f') => out.push(12),
            Some('s') => out.push(b' ' as u16),
            Some('u') => {
                while chars.peek() == Some(&'u') {
                    chars.next();
                }
                let hex: String = (0..4).filter_map(|_| chars.next()).collect();
                out.push(u16::from_str_radix(&hex, 16).unwrap_or(0));
            }
            Some(d @ '0'..='7') => {
                let mut v = d.to_digit(8).unwrap_or(0);
                let max = if d <= '3' { 2 } else { 1 };
                for _ in 0..max {
                    match chars.peek().and_then(|c| c.to_digit(8)) {
                        Some(x) => {
                            v = v * 8 + x;
                            chars.next();
                        }
                        None => break,
                    }
                }
                out.push(v as u16);
            }
            Some(other) => {
                let mut buf = [0u16; 2];
                out.extend_from_slice(other.encode_utf16(&mut buf));
            }
            None => {}
        }
    }
    out
}

fn unescape(s: &str) -> String {
    String::from_utf16_lossy(&unescape_utf16(s))
}

// ---- library ----

fn builtin_constant(key: &str) -> Option<RtValue> {
    Some(match key {
        "Integer.MAX_VALUE" => RtValue::Int(i32::MAX as i64, IntWidth::I32),
        "Integer.MIN_VALUE" => RtValue::Int(i32::MIN as i64, IntWidth::I32),
        "Long.MAX_VALUE" => RtValue::Int(i64::MAX, IntWidth::I64),
        "Long.MIN_VALUE" => RtValue::Int(i64::MIN, IntWidth::I64),
        "Double.NaN" => RtValue::Double(f64::NAN),
        "Double.POSITIVE_INFINITY" => RtValue::Double(f64::INFINITY),
        "Double.NEGATIVE_INFINITY" => RtValue::Double(f64::NEG_INFINITY),
        "Double.MAX_VALUE" => RtValue::Double(f64::MAX),
        _ => return None,
    })
}

fn builtin_call(key: &str, args: &[RtValue]) -> Option<EResult<RtValue>> {
    let r = match (key, args) {
        ("Math.abs", [v]) => match numeric(v)? {
            (Num::I(i), long) => {
                Ok(int_result(if long { i.wrapping_abs() } else { (i as i32).wrapping_abs() as i64 }, long))
            }
            (Num::D(d), _) => Ok(RtValue::Double(d.abs())),
        },
        ("Math.max" | "Math.min", [a, b]) => {
            let is_max = key == "Math.max";
            match (numeric(a)?, numeric(b)?) {
                ((Num::I(x), la), (Num::I(y), lb)) => {
                    Ok(int_result(if is_max { x.max(y) } else { x.min(y) }, la || lb))
                }
                _ => {
                    let x = to_f64(a)?;
                    let y = to_f64(b)?;
                    Ok(RtValue::Double(if x.is_nan() || y.is_nan() {
                        f64::NAN
                    } else if is_max {
                        x.max(y)
                    } else {
                        x.min(y)
                    }))
                }
            }
        }
        ("Math.sqrt", [a]) => Ok(RtValue::Double(to_f64(a)?.sqrt())),
        ("#length", [RtValue::Str(s)]) => Ok(RtValue::Int(s.encode_utf16().count() as i64, IntWidth::I32)),
        ("#isEmpty", [RtValue::Str(s)]) => Ok(RtValue::Bool(s.is_empty())),
        ("#charAt", [RtValue::Str(s), i]) => {
            let units: Vec<u16> = s.encode_utf16().collect();
            match i {
                RtValue::Int(i, _) if *i >= 0 && (*i as usize) < units.len() => Ok(RtValue::Char(units[*i as usize])),
                _ => throw("StringIndexOutOfBoundsException"),
            }
        }
        ("#equals", [a, b]) => Ok(RtValue::Bool(match (a, b) {
            (RtValue::Str(x), RtValue::Str(y)) => x == y,
            _ => ref_eq(a, b),
        })),
        ("String.valueOf", [a]) => Ok(RtValue::Str(a.java_string().into())),
        ("Integer.parseInt", [RtValue::Str(s)]) => match s.parse::<i32>() {
            Ok(v) => Ok(RtValue::Int(v as i64, IntWidth::I32)),
            Err(_) => throw("NumberFormatException"),
        },
        _ => return None,
    };
    Some(r)
}

fn to_f64(v: &RtValue) -> Option<f64> {
    match numeric(v)? {
        (Num::I(i), _) => Some(i as f64),
        (Num::D(d), _) => Some(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str, args: Vec<Value>) -> Trace {
        let m = parse_method(src).unwrap();
        evaluate(&m, &args, DEFAULT_FUEL, &StubEnv::default()).unwrap()
    }

    fn ret(src: &str, args: Vec<Value>) -> Outcome {
        run(src, args).outcome
    }

    #[test]
    fn arithmetic_wraps_like_java() {
        assert_eq!(
            ret("int f(int a){ return a + 1; }", vec![Value::int(i32::MAX)]),
            Outcome::Return(Value::int(i32::MIN))
        );
        assert_eq!(ret("int f(){ return -7 / 2; }", vec![]), Outcome::Return(Value::int(-3)));
        assert_eq!(ret("int f(){ return -7 % 3; }", vec![]), Outcome::Return(Value::int(-1)));
        assert_eq!(ret("int f(){ return -8 >>> 28; }", vec![]), Outcome::Return(Value::int(15)));
        assert_eq!(ret("int f(){ return 1 << 33; }", vec![]), Outcome::Return(Value::int(2)));
        assert_eq!(ret("long f(){ return 1L << 33; }", vec![]), Outcome::Return(Value::long(1 << 33)));
        assert_eq!(ret("int f(){ return 0xFFFFFFFF; }", vec![]), Outcome::Return(Value::int(-1)));
    }

    #[test]
    fn division_by_zero_throws() {
        assert_eq!(
            ret("int f(int a){ return 1 / a; }", vec![Value::int(0)]),
            Outcome::Thrown("ArithmeticException".into())
        );
        assert_eq!(ret("double f(){ return 1.0 / 0; }", vec![]), Outcome::Return(Value::Double(f64::INFINITY)));
    }

    #[test]
    fn nan_comparisons() {
        let src = "boolean f(double x){ return x < 1.0 || x >= 1.0; }";
        assert_eq!(ret(src, vec![Value::Double(f64::NAN)]), Outcome::Return(Value::Bool(false)));
        assert_eq!(ret(src, vec![Value::Double(0.5)]), Outcome::Return(Value::Bool(true)));
    }

    #[test]
    fn casts_follow_java_rules() {
        assert_eq!(
            ret("int f(double d){ return (int) d; }", vec![Value::Double(f64::NAN)]),
            Outcome::Return(Value::int(0))
        );
        assert_eq!(
            ret("int f(double d){ return (int) d; }", vec![Value::Double(1e20)]),
            Outcome::Return(Value::int(i32::MAX))
        );
        assert_eq!(ret("int f(){ return (byte) 200; }", vec![]), Outcome::Return(Value::int(-56)));
        assert_eq!(ret("int f(){ char c = 'a'; c += 1; return c; }", vec![]), Outcome::Return(Value::int(98)));
        assert_eq!(
            ret("short f(){ short s = 32767; s++; return s; }", vec![]),
            Outcome::Return(Value::Int { value: -32768, width: IntWidth::I16 })
        );
    }

    #[test]
    fn loops_break_continue() {
        let src = "int f(int n){ int s = 0; for (int i = 0; i < n; i++) { if (i == 2) { continue; } if (i == 5) { break; } s += i; } return s; }";
        assert_eq!(ret(src, vec![Value::int(10)]), Outcome::Return(Value::int(1 + 3 + 4)));
        let src = "int f(int n){ int s = 0; int i = 0; do { s += i; i++; } while (i < n); return s; }";
        assert_eq!(ret(src, vec![Value::int(0)]), Outcome::Return(Value::int(0)));
        assert_eq!(ret(src, vec![Value::int(4)]), Outcome::Return(Value::int(6)));
    }

    #[test]
    fn arrays_and_enhanced_for() {
        let src = "int f(int[] a){ int s = 0; for (int x : a) { s += x; } a[0] = 9; return s + a[0]; }";
        let arr = Value::Array { elem: "int".into(), items: vec![Value::int(1), Value::int(2)] };
        assert_eq!(ret(src, vec![arr]), Outcome::Return(Value::int(12)));
        assert_eq!(ret(src, vec![Value::Null]), Outcome::Thrown("NullPointerException".into()));
        assert_eq!(
            ret("int f(){ int[] a = new int[2]; return a[2]; }", vec![]),
            Outcome::Thrown("ArrayIndexOutOfBoundsException".into())
        );
        assert_eq!(
            ret("int f(int n){ int[][] a = new int[n][3]; return a.length; }", vec![Value::int(-1)]),
            Outcome::Thrown("NegativeArraySizeException".into())
        );
    }

    #[test]
    fn try_catch_finally() {
        let src = "int f(int a){ int r = 0; try { r = 10 / a; } catch (ArithmeticException e) { r = -1; } finally { r += 100; } return r; }";
        assert_eq!(ret(src, vec![Value::int(0)]), Outcome::Return(Value::int(99)));
        assert_eq!(ret(src, vec![Value::int(5)]), Outcome::Return(Value::int(102)));
        let src = "int f(){ try { throw new IllegalStateException(\"x\"); } catch (RuntimeException e) { return 1; } }";
        assert_eq!(ret(src, vec![]), Outcome::Return(Value::int(1)));
        let src = "int f(){ try { return 1; } finally { return 2; } }";
        assert_eq!(ret(src, vec![]), Outcome::Return(Value::int(2)));
    }

    #[test]
    fn calls_are_stubbed_and_traced() {
        let m = parse_method("int f(int a){ log(a); int x = next() + next(); return x; }").unwrap();
        let mut env = StubEnv::default();
        env.calls.insert("next".into(), vec![Value::int(3), Value::int(4)]);
        let t = evaluate(&m, &[Value::int(7)], DEFAULT_FUEL, &env).unwrap();
        assert_eq!(t.outcome, Outcome::Return(Value::int(7)));
        let names: Vec<_> = t.events.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["log", "next", "next"]);
        assert_eq!(t.events[0].args, vec![Value::int(7)]);
    }

    #[test]
    fn fields_and_builtins() {
        let t = run(
            "int f(String s){ this.count += s.length(); return count + Math.max(2, Integer.MIN_VALUE); }",
            vec![Value::Str("abc".into())],
        );
        assert_eq!(t.outcome, Outcome::Return(Value::int(5)));
        assert_eq!(t.events.iter().filter(|e| e.kind == EventKind::FieldWrite).count(), 1);
        assert_eq!(
            ret("int f(String s){ return s.length(); }", vec![Value::Null]),
            Outcome::Thrown("NullPointerException".into())
        );
    }

    #[test]
    fn string_concatenation() {
        assert_eq!(
            ret(
                "String f(int a, char c, double d){ return \"v=\" + a + c + d + null; }",
                vec![Value::int(1), Value::Char(b'x' as u16), Value::Double(2.0)]
            ),
            Outcome::Return(Value::Str("v=1x2.0null".into()))
        );
    }

    #[test]
    fn fuel_runs_out() {
        let t = run("void f(){ while (true) { tick(); } }", vec![]);
        assert_eq!(t.outcome, Outcome::FuelExhausted);
        assert!(!t.events.is_empty());
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let m = parse_method("int f(int a){ return a; }").unwrap();
        assert!(evaluate(&m, &[], DEFAULT_FUEL, &StubEnv::default()).is_err());
    }

    #[test]
    fn postfix_and_prefix() {
        assert_eq!(
            ret("int f(){ int i = 1; int j = i++ + ++i; return j * 10 + i; }", vec![]),
            Outcome::Return(Value::int(43))
        );
    }
}
