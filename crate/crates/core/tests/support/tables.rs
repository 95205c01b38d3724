//! Control transfer tables worked out by hand. Negative targets are function
//! fall-through points (`-d` exits the def at d).

use std::collections::BTreeMap;

use simplipy_core::analysis::control_maps;
use simplipy_core::{parse_program, Location, ProgramPoint};

pub type Table = &'static [(u32, i64)];

pub struct Case {
    pub name: &'static str,
    pub lines: &'static [&'static str],
    pub next: Table,
    pub on_true: Table,
    pub on_false: Table,
}

fn to_map(t: Table) -> BTreeMap<Location, ProgramPoint> {
    t.iter()
        .map(|&(k, v)| (Location(k), ProgramPoint::from_i64(v).unwrap()))
        .collect()
}

impl Case {
    pub fn source(&self) -> String {
        self.lines.join("\n")
    }

    pub fn check(&self) -> Result<(), String> {
        let src = self.source();
        let p = parse_program(&src).map_err(|d| format!("{}: {d:?}", self.name))?;
        let cm = control_maps(&p).map_err(|d| format!("{}: {d:?}", self.name))?;
        for (what, got, want) in [
            ("next", &cm.next, to_map(self.next)),
            ("true", &cm.true_, to_map(self.on_true)),
            ("false", &cm.false_, to_map(self.on_false)),
        ] {
            if *got != want {
                return Err(format!("{}: {what} is {got:?}, expected {want:?}", self.name));
            }
        }
        for (loc, _) in p.instructions() {
            if cm.err(loc) != loc {
                return Err(format!("{}: err({loc}) moved", self.name));
            }
        }
        Ok(())
    }
}

pub const CASES: &[Case] = &[
    Case {
        name: "p2_break_out_of_while",
        lines: &[
            "i = 0",
            "while i < 3:",
            "    i = i + 1",
            "    if i == 2:",
            "        break",
            "    pass",
            "pass",
        ],
        next: &[(1, 2), (3, 4), (5, 7), (6, 2), (7, 8)],
        on_true: &[(2, 3), (4, 5)],
        on_false: &[(2, 7), (4, 6)],
    },
    Case {
        name: "p3_call_and_return",
        lines: &["def f(a):", "    b = a + 1", "    return b", "r = f(41)", "pass"],
        next: &[(1, 4), (2, 3), (4, 5), (5, 6)],
        on_true: &[],
        on_false: &[],
    },
    Case {
        name: "p4_nonlocal_counter",
        lines: &[
            "def outer():",
            "    x = 0",
            "    def inner():",
            "        nonlocal x",
            "        x = x + 1",
            "        return x",
            "    while x < 3:",
            "        r = inner()",
            "    return r",
            "y = outer()",
        ],
        next: &[(1, 10), (2, 3), (3, 7), (4, 5), (5, 6), (8, 7), (10, 11)],
        on_true: &[(7, 8)],
        on_false: &[(7, 9)],
    },
    Case {
        name: "single_pass",
        lines: &["pass"],
        next: &[(1, 2)],
        on_true: &[],
        on_false: &[],
    },
    Case {
        name: "if_else_joins",
        lines: &["x = 1", "if x > 0:", "    y = 1", "else:", "    y = 2", "z = y"],
        next: &[(1, 2), (3, 6), (5, 6), (6, 7)],
        on_true: &[(2, 3)],
        on_false: &[(2, 5)],
    },
    Case {
        name: "continue_returns_to_loop_head",
        lines: &[
            "i = 0",
            "while i < 5:",
            "    i = i + 1",
            "    if i % 2 == 0:",
            "        continue",
            "    pass",
            "done = True",
        ],
        next: &[(1, 2), (3, 4), (5, 2), (6, 2), (7, 8)],
        on_true: &[(2, 3), (4, 5)],
        on_false: &[(2, 7), (4, 6)],
    },
    Case {
        name: "break_leaves_only_the_inner_loop",
        lines: &[
            "i = 0",
            "while i < 3:",
            "    j = 0",
            "    while True:",
            "        j = j + 1",
            "        if j > i:",
            "            break",
            "    i = i + 1",
            "pass",
        ],
        next: &[(1, 2), (3, 4), (5, 6), (7, 8), (8, 2), (9, 10)],
        on_true: &[(2, 3), (4, 5), (6, 7)],
        on_false: &[(2, 9), (4, 8), (6, 4)],
    },
    Case {
        name: "if_else_as_last_loop_statement",
        lines: &[
            "n = 0",
            "while n < 4:",
            "    if n < 2:",
            "        n = n + 1",
            "    else:",
            "        n = n + 2",
            "pass",
        ],
        next: &[(1, 2), (4, 2), (6, 2), (7, 8)],
        on_true: &[(2, 3), (3, 4)],
        on_false: &[(2, 7), (3, 6)],
    },
    Case {
        name: "def_body_falls_through",
        lines: &["def f(a):", "    b = a", "r = f(1)"],
        next: &[(1, 3), (2, -1), (3, 4)],
        on_true: &[],
        on_false: &[],
    },
    Case {
        name: "if_without_else_ends_def",
        lines: &["def g(x):", "    if x:", "        y = 1", "r = g(True)"],
        next: &[(1, 4), (3, -1), (4, 5)],
        on_true: &[(2, 3)],
        on_false: &[(2, -1)],
    },
    Case {
        name: "break_then_return_in_def",
        lines: &[
            "def h(n):",
            "    while True:",
            "        if n == 0:",
            "            break",
            "        n = n - 1",
            "    return n",
            "v = h(3)",
        ],
        next: &[(1, 7), (4, 6), (5, 2), (7, 8)],
        on_true: &[(2, 3), (3, 4)],
        on_false: &[(2, 6), (3, 5)],
    },
    Case {
        name: "global_declaration_flows_on",
        lines: &[
            "g = 0",
            "def inc():",
            "    global g",
            "    g = g + 1",
            "r = inc()",
            "r = inc()",
        ],
        next: &[(1, 2), (2, 5), (3, 4), (4, -2), (5, 6), (6, 7)],
        on_true: &[],
        on_false: &[],
    },
    Case {
        name: "nested_else_chain",
        lines: &[
            "x = 5",
            "if x < 0:",
            "    s = -1",
            "else:",
            "    if x == 0:",
            "        s = 0",
            "    else:",
            "        s = 1",
            "pass",
        ],
        next: &[(1, 2), (3, 9), (6, 9), (8, 9), (9, 10)],
        on_true: &[(2, 3), (5, 6)],
        on_false: &[(2, 5), (5, 8)],
    },
    Case {
        name: "while_ends_def",
        lines: &["def loop(k):", "    while k > 0:", "        k = k - 1", "r = loop(2)"],
        next: &[(1, 4), (3, 2), (4, 5)],
        on_true: &[(2, 3)],
        on_false: &[(2, -1)],
    },
    Case {
        name: "nested_def_skipped_by_next",
        lines: &["def a():", "    def b():", "        pass", "    return 1", "z = a()"],
        next: &[(1, 5), (2, 4), (3, -2), (5, 6)],
        on_true: &[],
        on_false: &[],
    },
    Case {
        name: "break_from_loop_nested_in_else",
        lines: &[
            "i = 0",
            "while i < 3:",
            "    i = i + 1",
            "    if i == 1:",
            "        continue",
            "    else:",
            "        j = 0",
            "        while j < i:",
            "            j = j + 1",
            "            if j == 2:",
            "                break",
            "pass",
        ],
        next: &[(1, 2), (3, 4), (5, 2), (7, 8), (9, 10), (11, 2), (12, 13)],
        on_true: &[(2, 3), (4, 5), (8, 9), (10, 11)],
        on_false: &[(2, 12), (4, 7), (8, 2), (10, 8)],
    },
    Case {
        name: "if_at_top_level_end",
        lines: &["pass", "x = 1", "if x == 1:", "    pass"],
        next: &[(1, 2), (2, 3), (4, 5)],
        on_true: &[(3, 4)],
        on_false: &[(3, 5)],
    },
    Case {
        name: "break_directly_in_loop",
        lines: &["while True:", "    break"],
        next: &[(2, 3)],
        on_true: &[(1, 2)],
        on_false: &[(1, 3)],
    },
    Case {
        name: "recursion_with_two_returns",
        lines: &[
            "def fact(n):",
            "    if n <= 1:",
            "        return 1",
            "    r = fact(n - 1)",
            "    return n * r",
            "x = fact(5)",
        ],
        next: &[(1, 6), (4, 5), (6, 7)],
        on_true: &[(2, 3)],
        on_false: &[(2, 4)],
    },
];
