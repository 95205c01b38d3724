//! Programs that must stop with a specific runtime error.

use simplipy_core::machine::{ErrorKind, Label, Outcome, Status};
use simplipy_core::{Location, Machine, ProgramPoint};

pub struct Case {
    pub name: &'static str,
    pub source: &'static str,
    pub kind: ErrorKind,
    pub line: u32,
}

const fn case(name: &'static str, source: &'static str, kind: ErrorKind, line: u32) -> Case {
    Case {
        name,
        source,
        kind,
        line,
    }
}

pub const CASES: &[Case] = &[
    case("undefined_name", "x = 1\ny = z + 1", ErrorKind::NameNotFound, 2),
    case("undefined_callee", "r = g(1)", ErrorKind::NameNotFound, 1),
    case(
        "undefined_in_function",
        "def f():\n    return q\nr = f()",
        ErrorKind::NameNotFound,
        2,
    ),
    case(
        "local_read_before_write",
        "x = 1\ndef f():\n    y = x\n    x = 2\n    return y\nr = f()",
        ErrorKind::UnboundLocal,
        3,
    ),
    case(
        "nonlocal_read_before_write",
        "def o():\n    def i():\n        nonlocal v\n        return v\n    r = i()\n    v = 1\n    return r\nz = o()",
        ErrorKind::UnboundLocal,
        4,
    ),
    case("int_condition", "if 5:\n    pass", ErrorKind::TypeMismatch, 1),
    case(
        "int_loop_condition",
        "n = 3\nwhile n:\n    n = n - 1",
        ErrorKind::TypeMismatch,
        2,
    ),
    case(
        "string_condition",
        "s = 'a'\nif s:\n    pass\nelse:\n    pass",
        ErrorKind::TypeMismatch,
        2,
    ),
    case(
        "none_condition",
        "def f():\n    pass\nc = f()\nwhile c:\n    pass",
        ErrorKind::TypeMismatch,
        4,
    ),
    case("calling_an_int", "f = 1\nr = f(2)", ErrorKind::TypeMismatch, 2),
    case("str_plus_int", "s = 'a' + 1", ErrorKind::TypeMismatch, 1),
    case("and_on_int", "b = 1 and True", ErrorKind::TypeMismatch, 1),
    case("not_on_int", "b = not 0", ErrorKind::TypeMismatch, 1),
    case(
        "too_few_arguments",
        "def f(a, b):\n    return a\nr = f(1)",
        ErrorKind::ArityMismatch,
        3,
    ),
    case(
        "too_many_arguments",
        "def f():\n    return 1\nr = f(1, 2)",
        ErrorKind::ArityMismatch,
        3,
    ),
    case("true_division", "x = 1 / 0", ErrorKind::DivisionByZero, 1),
    case(
        "floor_division",
        "y = 2\nx = 5 // (y - 2)",
        ErrorKind::DivisionByZero,
        2,
    ),
    case("modulo", "x = 5 % 0", ErrorKind::DivisionByZero, 1),
    case("float_division", "x = 1.5 / 0.0", ErrorKind::DivisionByZero, 1),
    case(
        "division_in_return",
        "def f(d):\n    return 10 // d\nr = f(0)",
        ErrorKind::DivisionByZero,
        2,
    ),
    case(
        "unbounded_recursion",
        "def f(n):\n    r = f(n + 1)\n    return r\nx = f(0)",
        ErrorKind::RecursionLimit,
        2,
    ),
];

impl Case {
    pub fn check(&self) -> Result<(), String> {
        let m = Machine::from_source(self.source).map_err(|d| format!("{}: {d:?}", self.name))?;
        let run = m.run(100_000);
        let last = run.last();
        if run.outcome != Outcome::Errored {
            return Err(format!("{}: ended {:?}", self.name, run.outcome));
        }
        let Status::Errored { kind, at, .. } = last.status() else {
            unreachable!()
        };
        if (*kind, *at) != (self.kind, Location(self.line)) {
            return Err(format!(
                "{}: got {kind:?} at {at}, expected {:?} at {}",
                self.name, self.kind, self.line
            ));
        }
        if last.top().loc != ProgramPoint::line(self.line) {
            return Err(format!("{}: top frame moved to {}", self.name, last.top().loc));
        }
        let t = m.step(last);
        if &t.state != last || t.label != Label::Err {
            return Err(format!("{}: errored state is not a fixed point", self.name));
        }
        Ok(())
    }
}
