use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{Condition, Expr, Mode, Slot, Term, Value};

impl Expr<String> {
    /// Text form accepted back by [`super::parse_expr`]. Bound values are written
    /// with primes, unique per variable across the whole expression.
    pub fn render(&self) -> String {
        let free: BTreeSet<String> = self.free_vars();
        let mut primes = HashMap::new();
        let mut counters: HashMap<String, u32> = HashMap::new();
        assign_primes(self, &free, &mut counters, &mut primes);
        let mut out = String::new();
        Renderer { primes: &primes }.expr(self, &mut out);
        out
    }
}

impl fmt::Display for Expr<String> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn assign_primes(
    e: &Expr<String>,
    free: &BTreeSet<String>,
    counters: &mut HashMap<String, u32>,
    out: &mut HashMap<(String, u32), u32>,
) {
    if let Expr::Sum { var, id, .. } = e {
        let c = counters.entry(var.clone()).or_insert(if free.contains(var) { 1 } else { 0 });
        out.insert((var.clone(), *id), *c);
        *c += 1;
    }
    for ch in e.children() {
        assign_primes(ch, free, counters, out);
    }
}

struct Renderer<'a> {
    primes: &'a HashMap<(String, u32), u32>,
}

impl Renderer<'_> {
    fn var(&self, var: &str, id: u32, out: &mut String) {
        out.push_str(var);
        let n = self.primes.get(&(var.to_string(), id)).copied().unwrap_or(0);
        out.extend(std::iter::repeat_n('\'', n as usize));
    }

    fn slot(&self, s: &Slot<String>, out: &mut String) {
        match s.value {
            Value::Free => out.push_str(&s.var),
            Value::Bound(id) => self.var(&s.var, id, out),
            Value::Fixed(v) => {
                out.push_str(&s.var);
                out.push('=');
                out.push_str(&v.to_string());
            }
        }
    }

    fn cond(&self, c: &Condition<String>, out: &mut String) {
        match c.mode {
            Mode::Observation => self.slot(&c.slot, out),
            Mode::Intervention => {
                out.push_str("do(");
                self.slot(&c.slot, out);
                out.push(')');
            }
        }
    }

    fn term(&self, t: &Term<String>, out: &mut String) {
        out.push_str("P(");
        for (i, s) in t.targets.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.slot(s, out);
        }
        for (i, c) in t.conditions.iter().enumerate() {
            out.push(if i == 0 { '|' } else { ',' });
            self.cond(c, out);
        }
        out.push(')');
    }

    fn expr(&self, e: &Expr<String>, out: &mut String) {
        match e {
            Expr::Quotient(n, d) => {
                self.operand(n, out);
                out.push_str(" / ");
                self.operand(d, out);
            }
            other => self.prod(other, out),
        }
    }

    /// Numerator or denominator of a quotient: anything but another quotient.
    fn operand(&self, e: &Expr<String>, out: &mut String) {
        if matches!(e, Expr::Quotient(..)) {
            self.paren(e, out);
        } else {
            self.prod(e, out);
        }
    }

    fn prod(&self, e: &Expr<String>, out: &mut String) {
        match e {
            Expr::Product(fs) => {
                for (i, f) in fs.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    let last = i + 1 == fs.len();
                    match f {
                        Expr::Sum { .. } if last => self.factor(f, out),
                        Expr::Sum { .. } | Expr::Product(_) | Expr::Quotient(..) => self.paren(f, out),
                        _ => self.factor(f, out),
                    }
                }
            }
            Expr::Quotient(..) => self.paren(e, out),
            other => self.factor(other, out),
        }
    }

    fn factor(&self, e: &Expr<String>, out: &mut String) {
        match e {
            Expr::One => out.push('1'),
            Expr::Term(t) => self.term(t, out),
            Expr::Sum { var, id, body } => {
                out.push_str("Σ_");
                self.var(var, *id, out);
                out.push(' ');
                self.prod(body, out);
            }
            Expr::Product(_) | Expr::Quotient(..) => self.prod(e, out),
        }
    }

    fn paren(&self, e: &Expr<String>, out: &mut String) {
        out.push('(');
        self.expr(e, out);
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_expr;

    #[test]
    fn renders_front_door_formula() {
        let e = parse_expr("Σ_z P(z|x) Σ_t P(y|t,z) P(t)").unwrap();
        let e = e.map_vars(&mut |v: &String| Ok(if v == "t" { "x".to_string() } else { v.clone() })).unwrap();
        assert_eq!(e.canonicalize().unwrap().render(), "Σ_z P(z|x) Σ_x' P(y|x',z) P(x')");
    }

    #[test]
    fn nested_structures_reparse() {
        for s in [
            "(Σ_a P(a|b)) Σ_c P(c)",
            "P(a) / (P(b) / P(c))",
            "Σ_a (P(y|a) / P(a))",
            "P(y|do(x=1),w) 1",
            "(P(a) / P(b)) P(c)",
        ] {
            let e = parse_expr(s).unwrap();
            let r = e.render();
            assert_eq!(parse_expr(&r).unwrap().canonicalize().unwrap(), e.canonicalize().unwrap(), "{s} -> {r}");
        }
    }
}
