//! The small-step transition system over `(e, h, k)` states.

mod ops;
mod state;
mod value;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use state::{Context, Env, EnvId, ErrorKind, LexicalHierarchy, LexicalMap, State, Status};
pub use value::{Closure, Value};

use crate::analysis::{Analysis, BlockId, ScopeInfo};
use crate::diagnostic::Diagnostic;
use crate::syntax::{parse_program, Bop, Exp, Instr, Location, Program, ProgramPoint, Uop};

pub const DEFAULT_RECURSION_LIMIT: usize = 10_000;

/// Transition labels. `Init` only appears on the first trace entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Init,
    Next,
    True,
    False,
    Call,
    Return,
    Err,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Init => "init",
            Label::Next => "next",
            Label::True => "true",
            Label::False => "false",
            Label::Call => "call",
            Label::Return => "return",
            Label::Err => "err",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A runtime error raised while executing one instruction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?}: {message}")]
pub struct Fault {
    pub kind: ErrorKind,
    pub message: String,
}

impl Fault {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Fault {
            kind,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: State,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Finished,
    Errored,
    Truncated,
}

#[derive(Debug, Clone)]
pub struct Run {
    pub states: Vec<State>,
    pub labels: Vec<Label>,
    pub outcome: Outcome,
}

impl Run {
    pub fn last(&self) -> &State {
        self.states.last().expect("a run holds at least the initial state")
    }
}

/// The initial state: only the global environment, control at line 1.
pub fn initial_state(p: &Program) -> State {
    let status = if p.is_empty() {
        Status::Finished
    } else {
        Status::Running
    };
    State {
        envs: LexicalMap::new(),
        parents: LexicalHierarchy::default(),
        stack: vec![Context {
            loc: ProgramPoint::line(1),
            env: EnvId::GLOBAL,
        }],
        status,
    }
}

/// A validated program together with its static analysis.
#[derive(Debug, Clone)]
pub struct Machine {
    program: Arc<Program>,
    analysis: Arc<Analysis>,
    recursion_limit: usize,
}

impl Machine {
    pub fn new(program: Program) -> Result<Machine, Vec<Diagnostic>> {
        let analysis = Analysis::new(&program)?;
        Ok(Machine {
            program: Arc::new(program),
            analysis: Arc::new(analysis),
            recursion_limit: DEFAULT_RECURSION_LIMIT,
        })
    }

    pub fn from_source(source: &str) -> Result<Machine, Vec<Diagnostic>> {
        Machine::new(parse_program(source)?)
    }

    pub fn with_recursion_limit(mut self, limit: usize) -> Machine {
        self.recursion_limit = limit.max(1);
        self
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn analysis(&self) -> &Analysis {
        &self.analysis
    }

    pub fn initial_state(&self) -> State {
        initial_state(&self.program)
    }

    fn scope(&self, block: BlockId) -> &ScopeInfo {
        self.analysis.scopes.get(block).expect("every executing block is known")
    }

    /// Reads `x` as seen from code of `block` running in `env`.
    pub fn lookup(&self, s: &State, env: EnvId, x: &str, block: BlockId) -> Result<Value, Fault> {
        let info = self.scope(block);
        let found = if info.is_global(x) {
            s.envs.lookup(EnvId::GLOBAL, x)
        } else if info.is_nonlocal(x) {
            let start = s.parents.parent(env);
            start
                .into_iter()
                .flat_map(|p| s.parents.chain(p))
                .take_while(|e| !e.is_global())
                .find_map(|e| s.envs.lookup(e, x))
        } else {
            s.parents.chain(env).find_map(|e| s.envs.lookup(e, x))
        };
        match found {
            None => Err(Fault::new(
                ErrorKind::NameNotFound,
                format!("name '{x}' is not defined"),
            )),
            Some(Value::Bottom) => Err(Fault::new(
                ErrorKind::UnboundLocal,
                format!("local variable '{x}' referenced before assignment"),
            )),
            Some(v) => Ok(v.clone()),
        }
    }

    /// The environment an assignment to `x` writes into.
    pub fn resolve_update_env(&self, s: &State, env: EnvId, x: &str, block: BlockId) -> Result<EnvId, Fault> {
        let info = self.scope(block);
        if block.is_top() || info.is_global(x) {
            return Ok(EnvId::GLOBAL);
        }
        if info.is_nonlocal(x) {
            let start = s.parents.parent(env);
            return start
                .into_iter()
                .flat_map(|p| s.parents.chain(p))
                .take_while(|e| !e.is_global())
                .find(|e| s.envs.get(*e).is_some_and(|m| m.contains_key(x)))
                .ok_or_else(|| Fault::new(ErrorKind::NameNotFound, format!("no binding for nonlocal '{x}' found")));
        }
        if info.is_local(x) {
            return Ok(env);
        }
        Ok(EnvId::GLOBAL)
    }

    pub fn eval_exp(&self, s: &State, env: EnvId, exp: &Exp, block: BlockId) -> Result<Value, Fault> {
        match exp {
            Exp::Const(c) => Ok(Value::from(c)),
            Exp::Var(x) => self.lookup(s, env, x, block),
            Exp::Unary(Uop::Neg, e) => ops::negate(&self.eval_exp(s, env, e, block)?),
            Exp::Unary(Uop::Not, e) => ops::not(&self.eval_exp(s, env, e, block)?),
            Exp::Binary(op @ (Bop::And | Bop::Or), l, r) => {
                let lv = self.eval_bool(s, env, l, block, op.symbol())?;
                if lv == (*op == Bop::Or) {
                    return Ok(Value::Bool(lv));
                }
                Ok(Value::Bool(self.eval_bool(s, env, r, block, op.symbol())?))
            }
            Exp::Binary(op, l, r) => {
                let lv = self.eval_exp(s, env, l, block)?;
                let rv = self.eval_exp(s, env, r, block)?;
                ops::binary(*op, &lv, &rv)
            }
        }
    }

    fn eval_bool(&self, s: &State, env: EnvId, e: &Exp, block: BlockId, what: &str) -> Result<bool, Fault> {
        match self.eval_exp(s, env, e, block)? {
            Value::Bool(b) => Ok(b),
            other => Err(Fault::new(
                ErrorKind::TypeMismatch,
                format!("operand of {what} must be a bool, got '{}'", other.type_name()),
            )),
        }
    }

    /// One transition. Terminal states map to themselves.
    pub fn step(&self, s: &State) -> Transition {
        match &s.status {
            Status::Running => {}
            Status::Finished => {
                return Transition {
                    state: s.clone(),
                    label: Label::Next,
                }
            }
            Status::Errored { .. } => {
                return Transition {
                    state: s.clone(),
                    label: Label::Err,
                }
            }
        }
        let mut next = s.clone();
        match self.apply(&mut next) {
            Ok(label) => {
                if next.stack.len() == 1 && next.top().loc == ProgramPoint::Line(self.program.end()) {
                    next.status = Status::Finished;
                }
                Transition { state: next, label }
            }
            Err(fault) => {
                // The formal state is left untouched: err maps a location to itself.
                let mut errored = s.clone();
                let at = s.top().loc.as_line().unwrap_or(Location(0));
                errored.status = Status::Errored {
                    kind: fault.kind,
                    at,
                    message: fault.message,
                };
                Transition {
                    state: errored,
                    label: Label::Err,
                }
            }
        }
    }

    fn apply(&self, s: &mut State) -> Result<Label, Fault> {
        let top = s.top();
        let block = self.analysis.scopes.block_of(top.loc);
        let loc = match top.loc {
            ProgramPoint::Exit(_) => return self.do_return(s, Value::None),
            ProgramPoint::Line(l) => l,
        };
        let cm = &self.analysis.control;
        let goto = |s: &mut State, to: Option<ProgramPoint>| {
            s.stack.last_mut().expect("nonempty").loc = to.expect("control map defined for this line");
        };
        match self.program.instr(loc) {
            Instr::Pass | Instr::Global(_) | Instr::Nonlocal(_) | Instr::Break | Instr::Continue | Instr::Else => {
                goto(s, cm.next(loc));
                Ok(Label::Next)
            }
            Instr::ExpAssign { target, rhs } => {
                let v = self.eval_exp(s, top.env, rhs, block)?;
                let dst = self.resolve_update_env(s, top.env, target, block)?;
                s.envs.bind(dst, target, v);
                goto(s, cm.next(loc));
                Ok(Label::Next)
            }
            Instr::If(cond) | Instr::While(cond) => match self.eval_exp(s, top.env, cond, block)? {
                Value::Bool(true) => {
                    goto(s, cm.on_true(loc));
                    Ok(Label::True)
                }
                Value::Bool(false) => {
                    goto(s, cm.on_false(loc));
                    Ok(Label::False)
                }
                other => Err(Fault::new(
                    ErrorKind::TypeMismatch,
                    format!("condition must be a bool, got '{}'", other.type_name()),
                )),
            },
            Instr::Def { name, params } => {
                let clo = Closure {
                    entry: loc.next_line(),
                    params: params.clone(),
                    def_env: top.env,
                    def_loc: loc,
                };
                let dst = self.resolve_update_env(s, top.env, name, block)?;
                s.envs.bind(dst, name, Value::Closure(clo));
                goto(s, cm.next(loc));
                Ok(Label::Next)
            }
            Instr::CallAssign { callee, args, .. } => {
                let clo = match self.lookup(s, top.env, callee, block)? {
                    Value::Closure(c) => c,
                    other => {
                        return Err(Fault::new(
                            ErrorKind::TypeMismatch,
                            format!("'{}' object is not callable", other.type_name()),
                        ))
                    }
                };
                let vals = args
                    .iter()
                    .map(|a| self.eval_exp(s, top.env, a, block))
                    .collect::<Result<Vec<_>, _>>()?;
                if vals.len() != clo.params.len() {
                    return Err(Fault::new(
                        ErrorKind::ArityMismatch,
                        format!(
                            "{callee}() takes {} positional arguments but {} were given",
                            clo.params.len(),
                            vals.len()
                        ),
                    ));
                }
                if s.stack.len() >= self.recursion_limit {
                    return Err(Fault::new(
                        ErrorKind::RecursionLimit,
                        "maximum recursion depth exceeded",
                    ));
                }
                let callee_block = self.scope(BlockId(clo.def_loc.0));
                let mut frame: Env = callee_block.locals.iter().map(|n| (n.clone(), Value::Bottom)).collect();
                for (p, v) in clo.params.iter().zip(vals) {
                    frame.insert(p.clone(), v);
                }
                let m = s.envs.allocate(frame);
                s.parents.link(m, clo.def_env);
                s.stack.push(Context {
                    loc: ProgramPoint::Line(clo.entry),
                    env: m,
                });
                Ok(Label::Call)
            }
            Instr::Return(rhs) => {
                let v = self.eval_exp(s, top.env, rhs, block)?;
                self.do_return(s, v)
            }
        }
    }

    fn do_return(&self, s: &mut State, v: Value) -> Result<Label, Fault> {
        if s.stack.len() < 2 {
            return Err(Fault::new(ErrorKind::TypeMismatch, "return outside of a call"));
        }
        let callee = s.stack.pop().expect("checked above");
        let caller = s.top();
        let site = caller.loc.as_line().expect("call sites are lines");
        let Instr::CallAssign { target, .. } = self.program.instr(site) else {
            s.stack.push(callee);
            return Err(Fault::new(ErrorKind::TypeMismatch, "caller is not at a call site"));
        };
        let block = self.analysis.scopes.block_of(caller.loc);
        let dst = match self.resolve_update_env(s, caller.env, target, block) {
            Ok(d) => d,
            Err(f) => {
                s.stack.push(callee);
                return Err(f);
            }
        };
        s.envs.bind(dst, target, v);
        s.stack.last_mut().expect("caller frame").loc =
            self.analysis.control.next(site).expect("call sites have a successor");
        Ok(Label::Return)
    }

    /// Steps from `s0` until a terminal state or until `max_steps` states
    /// have been produced (counting `s0`).
    pub fn run_to_fixed_point(&self, s0: State, max_steps: usize) -> Run {
        let max_steps = max_steps.max(1);
        let mut states = vec![s0];
        let mut labels = vec![Label::Init];
        while states.len() < max_steps {
            let cur = states.last().expect("nonempty");
            if cur.is_terminal() {
                break;
            }
            let t = self.step(cur);
            states.push(t.state);
            labels.push(t.label);
        }
        let outcome = match states.last().expect("nonempty").status() {
            Status::Running => Outcome::Truncated,
            Status::Finished => Outcome::Finished,
            Status::Errored { .. } => Outcome::Errored,
        };
        Run {
            states,
            labels,
            outcome,
        }
    }

    /// Runs from the initial state.
    pub fn run(&self, max_steps: usize) -> Run {
        self.run_to_fixed_point(self.initial_state(), max_steps)
    }
}
