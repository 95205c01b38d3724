use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::syntax::{Location, ProgramPoint};

use super::value::Value;

/// Environment identifier; 0 is the global environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnvId(pub u32);

impl EnvId {
    pub const GLOBAL: EnvId = EnvId(0);

    pub fn is_global(self) -> bool {
        self == EnvId::GLOBAL
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Env = BTreeMap<String, Value>;

/// Every environment created during execution, indexed by id. Ids are
/// allocated from a counter and never reused, so the domain is `0..len`.
///
/// Environments are shared between snapshots and copied on write.
#[derive(Debug, Clone, PartialEq)]
pub struct LexicalMap {
    envs: Vec<Arc<Env>>,
}

impl LexicalMap {
    pub fn new() -> Self {
        LexicalMap {
            envs: vec![Arc::new(Env::new())],
        }
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn get(&self, id: EnvId) -> Option<&Env> {
        self.envs.get(id.index()).map(|e| e.as_ref())
    }

    pub fn ids(&self) -> impl Iterator<Item = EnvId> {
        (0..self.envs.len() as u32).map(EnvId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EnvId, &Env)> {
        self.envs.iter().enumerate().map(|(i, e)| (EnvId(i as u32), e.as_ref()))
    }

    pub(crate) fn lookup(&self, id: EnvId, name: &str) -> Option<&Value> {
        self.get(id).and_then(|e| e.get(name))
    }

    pub(crate) fn bind(&mut self, id: EnvId, name: &str, v: Value) {
        Arc::make_mut(&mut self.envs[id.index()]).insert(name.to_string(), v);
    }

    pub(crate) fn allocate(&mut self, env: Env) -> EnvId {
        self.envs.push(Arc::new(env));
        EnvId(self.envs.len() as u32 - 1)
    }
}

impl Default for LexicalMap {
    fn default() -> Self {
        Self::new()
    }
}

/// Parent links of the environment tree. The global environment has none.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexicalHierarchy {
    // parents[i] is the parent of environment i + 1.
    parents: Vec<EnvId>,
}

impl LexicalHierarchy {
    pub fn parent(&self, id: EnvId) -> Option<EnvId> {
        if id.is_global() {
            None
        } else {
            self.parents.get(id.index() - 1).copied()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (EnvId, EnvId)> + '_ {
        self.parents.iter().enumerate().map(|(i, p)| (EnvId(i as u32 + 1), *p))
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub(crate) fn link(&mut self, child: EnvId, parent: EnvId) {
        debug_assert_eq!(child.index(), self.parents.len() + 1);
        self.parents.push(parent);
    }

    /// Follows parent links from `id` up to the global environment.
    pub fn chain(&self, id: EnvId) -> impl Iterator<Item = EnvId> + '_ {
        std::iter::successors(Some(id), move |&e| self.parent(e))
    }
}

/// A continuation frame: what to execute next and in which environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub loc: ProgramPoint,
    pub env: EnvId,
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.loc, self.env)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorKind {
    NameNotFound,
    UnboundLocal,
    TypeMismatch,
    ArityMismatch,
    DivisionByZero,
    RecursionLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Running,
    Finished,
    Errored {
        kind: ErrorKind,
        at: Location,
        message: String,
    },
}

impl Status {
    pub fn is_running(&self) -> bool {
        matches!(self, Status::Running)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Finished => "finished",
            Status::Errored { .. } => "errored",
        }
    }
}

/// A machine state `(e, h, k)` plus its derived status.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub(crate) envs: LexicalMap,
    pub(crate) parents: LexicalHierarchy,
    /// Bottom of the continuation first; the top context is the last.
    pub(crate) stack: Vec<Context>,
    pub(crate) status: Status,
}

impl State {
    pub fn envs(&self) -> &LexicalMap {
        &self.envs
    }

    pub fn hierarchy(&self) -> &LexicalHierarchy {
        &self.parents
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    /// The context at the head of the continuation.
    pub fn top(&self) -> Context {
        *self.stack.last().expect("continuation is never empty")
    }

    /// The continuation, head first.
    pub fn continuation(&self) -> impl Iterator<Item = &Context> {
        self.stack.iter().rev()
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    pub fn is_terminal(&self) -> bool {
        !self.status.is_running()
    }

    /// The global environment's bindings.
    pub fn globals(&self) -> &Env {
        self.envs.get(EnvId::GLOBAL).expect("global environment exists")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("state serializes")
    }

    /// Canonical text form: sorted keys, no whitespace.
    pub fn canonical(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("state serializes")
    }
}

// State JSON:
// {"envs": {"0": {name: value}}, "parents": {"1": 0},
//  "stack": [{"loc": 2, "env": 1}, ...] (head first),
//  "status": {"kind": "running" | "finished" | "errored",
//             "error": {"kind", "loc", "message"}}}

#[derive(Serialize, Deserialize)]
struct ErrorJson {
    kind: ErrorKind,
    loc: Location,
    message: String,
}

#[derive(Serialize, Deserialize)]
struct StatusJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    error: Option<ErrorJson>,
}

impl Serialize for Status {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let error = match self {
            Status::Errored { kind, at, message } => Some(ErrorJson {
                kind: *kind,
                loc: *at,
                message: message.clone(),
            }),
            _ => None,
        };
        StatusJson {
            kind: self.as_str().to_string(),
            error,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Status {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = StatusJson::deserialize(d)?;
        match (j.kind.as_str(), j.error) {
            ("running", _) => Ok(Status::Running),
            ("finished", _) => Ok(Status::Finished),
            ("errored", Some(e)) => Ok(Status::Errored {
                kind: e.kind,
                at: e.loc,
                message: e.message,
            }),
            (k, _) => Err(serde::de::Error::custom(format!("bad status {k:?}"))),
        }
    }
}

#[derive(Serialize)]
struct StateRef<'a> {
    envs: BTreeMap<EnvId, &'a Env>,
    parents: BTreeMap<EnvId, EnvId>,
    stack: Vec<Context>,
    status: &'a Status,
}

#[derive(Deserialize)]
struct StateOwned {
    envs: BTreeMap<EnvId, Env>,
    parents: BTreeMap<EnvId, EnvId>,
    stack: Vec<Context>,
    status: Status,
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StateRef {
            envs: self.envs.iter().collect(),
            parents: self.parents.iter().collect(),
            stack: self.continuation().copied().collect(),
            status: &self.status,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = StateOwned::deserialize(d)?;
        let mut envs = Vec::with_capacity(raw.envs.len());
        for (i, (id, env)) in raw.envs.into_iter().enumerate() {
            if id.index() != i {
                return Err(D::Error::custom("environment ids must be contiguous from 0"));
            }
            envs.push(Arc::new(env));
        }
        if envs.is_empty() {
            return Err(D::Error::custom("the global environment is missing"));
        }
        let mut parents = LexicalHierarchy::default();
        for (i, (child, parent)) in raw.parents.into_iter().enumerate() {
            if child.index() != i + 1 || parent >= child {
                return Err(D::Error::custom("malformed lexical hierarchy"));
            }
            parents.link(child, parent);
        }
        if parents.len() + 1 != envs.len() {
            return Err(D::Error::custom("every non-global environment needs a parent"));
        }
        if raw.stack.is_empty() {
            return Err(D::Error::custom("continuation must not be empty"));
        }
        let mut stack = raw.stack;
        stack.reverse();
        Ok(State {
            envs: LexicalMap { envs },
            parents,
            stack,
            status: raw.status,
        })
    }
}
