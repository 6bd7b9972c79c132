use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::{evaluate, same_events, EventKind, Outcome, StubEnv, Trace, DEFAULT_FUEL};
use super::value::{IntWidth, Value};
use crate::syntax::{resolve_scopes, ExprKind, Method, TypeRef, Visit};

const STUB_LEN: usize = 8;
const FUEL_RETRIES: u32 = 3;

/// One disagreeing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub input_index: usize,
    pub args: Vec<Value>,
    pub stubs: StubEnv,
    pub original: Trace,
    pub transformed: Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail(Box<Counterexample>),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Runs both methods on `n_inputs` seeded random inputs and compares their
/// traces, mapping call names of the original through `rename_map`.
pub fn differential_check(
    original: &Method,
    transformed: &Method,
    rename_map: &BTreeMap<String, String>,
    n_inputs: usize,
    seed: u64,
) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = call_keys(original);
    let free = resolve_scopes(original).map(|t| t.free_names()).unwrap_or_default();
    for input_index in 0..n_inputs {
        let args: Vec<Value> = original.params.iter().map(|p| random_value(&mut rng, &param_type(p))).collect();
        let stubs = random_stubs(&mut rng, &keys, &free);
        let renamed_stubs = rename_stub_keys(&stubs, rename_map);
        let mut fuel = DEFAULT_FUEL;
        let mut attempt = 0;
        loop {
            let a = evaluate(original, &args, fuel, &stubs);
            let b = evaluate(transformed, &args, fuel, &renamed_stubs);
            let (a, b) = match (a, b) {
                (Ok(a), Ok(b)) => (a, b),
                // arity differs: report with empty traces
                _ => {
                    let empty = Trace { events: vec![], outcome: Outcome::Thrown("ArityMismatch".into()) };
                    return Verdict::Fail(Box::new(Counterexample {
                        input_index,
                        args,
                        stubs,
                        original: empty.clone(),
                        transformed: Trace { outcome: Outcome::FuelExhausted, ..empty },
                    }));
                }
            };
            let a_mapped = rename_trace(&a, rename_map);
            let a_out = a.outcome == Outcome::FuelExhausted;
            let b_out = b.outcome == Outcome::FuelExhausted;
            let agree = match (a_out, b_out) {
                (false, false) => a_mapped.equivalent(&b),
                (true, true) => {
                    let n = a_mapped.events.len().min(b.events.len());
                    same_events(&a_mapped.events[..n], &b.events[..n])
                }
                _ if attempt < FUEL_RETRIES => {
                    attempt += 1;
                    fuel *= 4;
                    continue;
                }
                _ => false,
            };
            if !agree {
                return Verdict::Fail(Box::new(Counterexample {
                    input_index,
                    args,
                    stubs,
                    original: a,
                    transformed: b,
                }));
            }
            break;
        }
    }
    Verdict::Pass
}

fn param_type(p: &crate::syntax::Param) -> TypeRef {
    let mut t = p.ty.clone();
    if p.varargs {
        t.dims += 1;
    }
    t
}

fn rename_key(key: &str, map: &BTreeMap<String, String>) -> String {
    if key.contains('.') || key.starts_with('#') {
        key.to_string()
    } else {
        map.get(key).cloned().unwrap_or_else(|| key.to_string())
    }
}

fn rename_stub_keys(stubs: &StubEnv, map: &BTreeMap<String, String>) -> StubEnv {
    StubEnv {
        calls: stubs.calls.iter().map(|(k, v)| (rename_key(k, map), v.clone())).collect(),
        fields: stubs.fields.clone(),
    }
}

fn rename_trace(t: &Trace, map: &BTreeMap<String, String>) -> Trace {
    let mut t = t.clone();
    for e in &mut t.events {
        if e.kind == EventKind::Call {
            e.name = rename_key(&e.name, map);
        }
    }
    t
}

/// Stub keys as the evaluator will form them.
pub fn call_keys(m: &Method) -> BTreeSet<String> {
    struct Keys<'a> {
        declared: &'a BTreeSet<String>,
        out: BTreeSet<String>,
    }
    impl Visit for Keys<'_> {
        fn visit_expr(&mut self, e: &crate::syntax::Expr) {
            if let ExprKind::MethodCall { recv, name, .. } = &e.kind {
                let key = match recv.as_deref().map(|r| &r.kind) {
                    None | Some(ExprKind::This) => name.clone(),
                    Some(ExprKind::Ident(q))
                        if !self.declared.contains(q) && q.starts_with(|c: char| c.is_ascii_uppercase()) =>
                    {
                        format!("{q}.{name}")
                    }
                    Some(ExprKind::FieldAccess { name: q, .. }) if q.starts_with(|c: char| c.is_ascii_uppercase()) => {
                        format!("{q}.{name}")
                    }
                    Some(_) => format!("#{name}"),
                };
                self.out.insert(key);
            }
            crate::syntax::walk_expr(self, e);
        }
    }
    let declared: BTreeSet<String> =
        resolve_scopes(m).map(|t| t.decls.iter().map(|d| d.name.clone()).collect()).unwrap_or_default();
    let mut k = Keys { declared: &declared, out: BTreeSet::new() };
    k.visit_block(&m.body);
    k.out
}

fn random_stubs(rng: &mut ChaCha8Rng, keys: &BTreeSet<String>, free: &BTreeSet<String>) -> StubEnv {
    let mut env = StubEnv::default();
    for k in keys {
        let seq = (0..STUB_LEN).map(|_| Value::int(small_int(rng))).collect();
        env.calls.insert(k.clone(), seq);
    }
    for f in free {
        if !f.starts_with(|c: char| c.is_ascii_uppercase()) {
            env.fields.insert(f.clone(), Value::int(small_int(rng)));
        }
    }
    env
}

fn small_int(rng: &mut ChaCha8Rng) -> i32 {
    rng.random_range(-3..=10)
}

fn random_int(rng: &mut ChaCha8Rng) -> i64 {
    const EDGES: [i64; 7] = [0, 1, -1, 2, i32::MAX as i64, i32::MIN as i64, 100];
    match rng.random_range(0..10) {
        0..=4 => rng.random_range(-3..=10),
        5 | 6 => EDGES[rng.random_range(0..EDGES.len())],
        _ => rng.random_range(-1000..=1000),
    }
}

/// Input sampler used by the differential checker.
pub fn random_value(rng: &mut ChaCha8Rng, ty: &TypeRef) -> Value {
    if ty.dims > 0 {
        if rng.random_range(0..10) == 0 {
            return Value::Null;
        }
        let elem = ty.element().expect("array type");
        let len = rng.random_range(0..=5);
        let items = (0..len).map(|_| random_value(rng, &elem)).collect();
        return Value::Array { elem: crate::syntax::print_type(&elem), items };
    }
    match ty.name.as_str() {
        "int" | "Integer" => Value::int(random_int(rng) as i32),
        "long" | "Long" => match rng.random_range(0..8) {
            0 => Value::long(i64::MAX),
            1 => Value::long(i64::MIN),
            _ => Value::long(random_int(rng)),
        },
        "short" | "Short" => Value::Int { value: IntWidth::I16.wrap(random_int(rng)), width: IntWidth::I16 },
        "byte" | "Byte" => Value::Int { value: IntWidth::I8.wrap(random_int(rng)), width: IntWidth::I8 },
        "char" | "Character" => Value::Char(match rng.random_range(0..6) {
            0 => 0,
            1 => b'Z' as u16,
            _ => rng.random_range(b'a' as u16..=b'z' as u16),
        }),
        "boolean" | "Boolean" => Value::Bool(rng.random()),
        "double" | "Double" | "float" | "Float" => {
            const EDGES: [f64; 8] = [0.0, -0.0, f64::NAN, f64::INFINITY, f64::NEG_INFINITY, 0.5, 1.0, -2.5];
            Value::Double(match rng.random_range(0..10) {
                0..=2 => EDGES[rng.random_range(0..EDGES.len())],
                3..=6 => rng.random_range(-4..=8) as f64,
                _ => rng.random_range(-100.0..100.0),
            })
        }
        "String" => {
            const POOL: [&str; 5] = ["", "a", "abc", "hello", "x y"];
            if rng.random_range(0..10) == 0 {
                Value::Null
            } else {
                Value::Str(POOL[rng.random_range(0..POOL.len())].into())
            }
        }
        _ => Value::Null,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_method;

    #[test]
    fn identical_methods_pass() {
        let m = parse_method("int f(int a, int b){ if (a < b) { return log(a); } return b / a; }").unwrap();
        assert!(differential_check(&m, &m, &BTreeMap::new(), 64, 1).is_pass());
    }

    #[test]
    fn renamed_recursion_passes_with_map() {
        let a = parse_method("int f(int n){ if (n <= 0) { return 0; } return f(n - 1) + 1; }").unwrap();
        let b = parse_method("int g(int n){ if (n <= 0) { return 0; } return g(n - 1) + 1; }").unwrap();
        let map = BTreeMap::from([("f".to_string(), "g".to_string())]);
        assert!(differential_check(&a, &b, &map, 64, 1).is_pass());
        assert!(!differential_check(&a, &b, &BTreeMap::new(), 64, 1).is_pass());
    }

    #[test]
    fn detects_unsound_flip() {
        let a = parse_method("int f(double x){ if (x < 1.0) { return 1; } else { return 2; } }").unwrap();
        let b = parse_method("int f(double x){ if (x >= 1.0) { return 2; } else { return 1; } }").unwrap();
        let Verdict::Fail(cx) = differential_check(&a, &b, &BTreeMap::new(), 200, 3) else {
            panic!("NaN input should separate the two")
        };
        assert!(matches!(cx.args[0], Value::Double(d) if d.is_nan()));
    }

    #[test]
    fn evaluation_order_is_observed() {
        let a = parse_method("boolean f(){ return next() == probe(); }").unwrap();
        let b = parse_method("boolean f(){ return probe() == next(); }").unwrap();
        assert!(!differential_check(&a, &b, &BTreeMap::new(), 8, 0).is_pass());
    }
}
