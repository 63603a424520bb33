//! The built-in input corpus: the four worked examples plus two small
//! auxiliary inputs. `qh golden` runs these against the expected tables.

/// Regular block of sl2: two vertices, arrows both ways, one zero relation.
pub const A1: &str = "\
algebra a1
field QQ
vertices 1 < 2
arrow alpha: 2 -> 1
arrow beta: 1 -> 2
relation beta*alpha
";

/// Direct box input: one solid arrow made superfluous by its differential.
pub const A2: &str = "\
box a2
field QQ
vertices 1 < 2
arrow a: 1 -> 2
dashed v: 1 --> 2
diff a = v
diff v = 0
";

/// Commutative square, ordered 1 < 2 < 3 < 4 with 3 the sink.
pub const A3: &str = "\
algebra a3
field QQ
vertices 1 < 2 < 3 < 4
arrow a: 1 -> 2
arrow b: 1 -> 4
arrow c: 2 -> 3
arrow d: 4 -> 3
relation c*a - d*b
";

/// Three vertices with a 2-cycle and two zero relations.
pub const A4: &str = "\
algebra a4
field QQ
vertices 1 < 2 < 3
arrow alpha: 2 -> 3
arrow beta: 3 -> 2
arrow gamma: 1 -> 2
arrow delta: 3 -> 1
relation alpha*beta
relation gamma*delta
";

/// k[x]/(x^2): local, not quasi-hereditary.
pub const LOCAL: &str = "\
algebra local
field QQ
vertices 1
arrow x: 1 -> 1
relation x*x
";

/// The two-vertex semisimple box with no dashed generators.
pub const TRIVIAL2: &str = "\
box trivial2
field QQ
vertices 1 < 2
";
