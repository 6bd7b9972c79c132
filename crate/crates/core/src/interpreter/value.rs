use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::syntax::TypeRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntWidth {
    I8,
    I16,
    I32,
    I64,
}

impl IntWidth {
    pub fn wrap(self, v: i64) -> i64 {
        match self {
            IntWidth::I8 => v as i8 as i64,
            IntWidth::I16 => v as i16 as i64,
            IntWidth::I32 => v as i32 as i64,
            IntWidth::I64 => v,
        }
    }

    pub fn for_type(name: &str) -> Option<Self> {
        Some(match name {
            "byte" | "Byte" => IntWidth::I8,
            "short" | "Short" => IntWidth::I16,
            "int" | "Integer" => IntWidth::I32,
            "long" | "Long" => IntWidth::I64,
            _ => return None,
        })
    }

    pub fn type_name(self) -> &'static str {
        match self {
            IntWidth::I8 => "byte",
            IntWidth::I16 => "short",
            IntWidth::I32 => "int",
            IntWidth::I64 => "long",
        }
    }
}

/// Plain-data value used for inputs, stub results and traces.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", content = "value")]
pub enum Value {
    Int { value: i64, width: IntWidth },
    Double(f64),
    Bool(bool),
    Str(String),
    Char(u16),
    Null,
    Array { elem: String, items: Vec<Value> },
    Object { class: String },
    Void,
}

impl Value {
    pub fn int(v: i32) -> Self {
        Value::Int { value: v as i64, width: IntWidth::I32 }
    }

    pub fn long(v: i64) -> Self {
        Value::Int { value: v, width: IntWidth::I64 }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        use Value::*;
        match (self, other) {
            (Int { value: a, width: wa }, Int { value: b, width: wb }) => a == b && wa == wb,
            // bit equality, with every NaN identified
            (Double(a), Double(b)) => (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits(),
            (Bool(a), Bool(b)) => a == b,
            (Str(a), Str(b)) => a == b,
            (Char(a), Char(b)) => a == b,
            (Null, Null) | (Void, Void) => true,
            (Array { elem: ea, items: ia }, Array { elem: eb, items: ib }) => ea == eb && ia == ib,
            (Object { class: a }, Object { class: b }) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int { value, width: IntWidth::I64 } => write!(f, "{value}L"),
            Value::Int { value, .. } => write!(f, "{value}"),
            Value::Double(d) => write!(f, "{}", java_double_string(*d)),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Char(c) => write!(f, "'{}'", char::from_u32(*c as u32).unwrap_or('?')),
            Value::Null => write!(f, "null"),
            Value::Array { items, .. } => {
                write!(f, "[")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, "]")
            }
            Value::Object { class } => write!(f, "<{class}>"),
            Value::Void => write!(f, "void"),
        }
    }
}

/// Approximation of `Double.toString`, stable across runs.
pub fn java_double_string(d: f64) -> String {
    if d.is_nan() {
        "NaN".into()
    } else if d.is_infinite() {
        if d > 0.0 {
            "Infinity".into()
        } else {
            "-Infinity".into()
        }
    } else if d == d.trunc() && d.abs() < 1e7 {
        format!("{d:.1}")
    } else {
        format!("{d}")
    }
}

#[derive(Debug)]
pub(crate) struct RtArray {
    pub elem: TypeRef,
    pub items: Vec<RtValue>,
}

/// Runtime value; arrays are shared mutable references.
#[derive(Debug, Clone)]
pub(crate) enum RtValue {
    Int(i64, IntWidth),
    Double(f64),
    Bool(bool),
    Str(Rc<str>),
    Char(u16),
    Null,
    Array(Rc<RefCell<RtArray>>),
    Object(Rc<str>),
    Void,
}

impl RtValue {
    pub fn from_value(v: &Value) -> RtValue {
        match v {
            Value::Int { value, width } => RtValue::Int(width.wrap(*value), *width),
            Value::Double(d) => RtValue::Double(*d),
            Value::Bool(b) => RtValue::Bool(*b),
            Value::Str(s) => RtValue::Str(s.as_str().into()),
            Value::Char(c) => RtValue::Char(*c),
            Value::Null => RtValue::Null,
            Value::Array { elem, items } => {
                let elem_ty = type_from_name(elem);
                RtValue::Array(Rc::new(RefCell::new(RtArray {
                    elem: elem_ty,
                    items: items.iter().map(RtValue::from_value).collect(),
                })))
            }
            Value::Object { class } => RtValue::Object(class.as_str().into()),
            Value::Void => RtValue::Void,
        }
    }

    /// Deep snapshot.
    pub fn to_value(&self) -> Value {
        match self {
            RtValue::Int(v, w) => Value::Int { value: *v, width: *w },
            RtValue::Double(d) => Value::Double(*d),
            RtValue::Bool(b) => Value::Bool(*b),
            RtValue::Str(s) => Value::Str(s.to_string()),
            RtValue::Char(c) => Value::Char(*c),
            RtValue::Null => Value::Null,
            RtValue::Array(a) => {
                let a = a.borrow();
                Value::Array {
                    elem: crate::syntax::print_type(&a.elem),
                    items: a.items.iter().map(RtValue::to_value).collect(),
                }
            }
            RtValue::Object(c) => Value::Object { class: c.to_string() },
            RtValue::Void => Value::Void,
        }
    }

    pub fn type_desc(&self) -> String {
        match self {
            RtValue::Int(_, w) => w.type_name().into(),
            RtValue::Double(_) => "double".into(),
            RtValue::Bool(_) => "boolean".into(),
            RtValue::Str(_) => "String".into(),
            RtValue::Char(_) => "char".into(),
            RtValue::Null => "null".into(),
            RtValue::Array(a) => format!("{}[]", crate::syntax::print_type(&a.borrow().elem)),
            RtValue::Object(c) => c.to_string(),
            RtValue::Void => "void".into(),
        }
    }

    pub fn java_string(&self) -> String {
        match self {
            RtValue::Int(v, _) => v.to_string(),
            RtValue::Double(d) => java_double_string(*d),
            RtValue::Bool(b) => b.to_string(),
            RtValue::Str(s) => s.to_string(),
            RtValue::Char(c) => char::from_u32(*c as u32).map(String::from).unwrap_or_default(),
            RtValue::Null => "null".into(),
            RtValue::Array(_) => "[array]".into(),
            RtValue::Object(c) => format!("{c}@obj"),
            RtValue::Void => String::new(),
        }
    }
}

/// Reads `int`, `String[]` and similar; generic arguments are not expected here.
pub(crate) fn type_from_name(s: &str) -> TypeRef {
    let mut base = s.trim();
    let mut dims = 0;
    while let Some(rest) = base.strip_suffix("[]") {
        base = rest.trim_end();
        dims += 1;
    }
    TypeRef { name: base.to_string(), args: Vec::new(), dims }
}
