//! Bundled desk-scale case files, embedded for tests and examples.
//!
//! The same files live under `fixtures/` in the crate root for use with the
//! command-line interface. Each constant parses with
//! [`crate::case::parse_case`].

/// One bus, one generator; the optimum is exactly 250 $/h.
pub const CASE1DEG: &str = include_str!("../fixtures/case1deg.m");
/// Two buses, one line; the smallest network with a nontrivial PTDF.
pub const CASE2: &str = include_str!("../fixtures/case2.m");
/// Three-bus triangle with quadratic costs and one congested line.
pub const CASE3Q: &str = include_str!("../fixtures/case3q.m");
/// Five buses, six lines, three generators, linear costs.
pub const CASE5: &str = include_str!("../fixtures/case5.m");
/// The case5 grid with strictly convex quadratic costs.
pub const CASE5Q: &str = include_str!("../fixtures/case5q.m");

/// All bundled fixtures as `(name, text)` pairs.
pub fn all() -> [(&'static str, &'static str); 5] {
    [
        ("case1deg", CASE1DEG),
        ("case2", CASE2),
        ("case3q", CASE3Q),
        ("case5", CASE5),
        ("case5q", CASE5Q),
    ]
}
