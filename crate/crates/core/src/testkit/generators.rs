use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{Assignment, DotDiagram, HierarchicalDotDiagram, Sort, Symbol, Var};
use crate::error::{Error, Result};
use crate::frontend::compile_source;

/// Shape bounds for [`random_diagram`].
#[derive(Clone, Debug)]
pub struct DiagramParams {
    /// Variables drawn from; unused ones are dropped, so this bounds the result.
    pub max_vars: usize,
    pub min_assignments: usize,
    pub max_assignments: usize,
    pub max_fan_in: usize,
    pub max_fan_out: usize,
    /// Bound on each of the input and output lists (duplicates allowed).
    pub max_interface: usize,
    pub sorts: Vec<Sort>,
    /// Distinct symbol names available for each symbol type.
    pub symbols_per_type: usize,
}

impl Default for DiagramParams {
    fn default() -> Self {
        DiagramParams {
            max_vars: 6,
            min_assignments: 0,
            max_assignments: 5,
            max_fan_in: 2,
            max_fan_out: 2,
            max_interface: 3,
            sorts: vec![Sort::new("A"), Sort::new("B")],
            symbols_per_type: 2,
        }
    }
}

/// A reproducible random diagram. Symbol names encode their type, so any two
/// uses of a name agree.
pub fn random_diagram(seed: u64, p: &DiagramParams) -> DotDiagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = rng.gen_range(1..=p.max_vars.max(1));
    let sorts: Vec<Sort> = (0..nv)
        .map(|_| p.sorts.choose(&mut rng).expect("at least one sort").clone())
        .collect();
    let pick = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Var> {
        (0..n)
            .map(|_| Var::from_index(rng.gen_range(0..nv)))
            .collect()
    };
    let na = rng.gen_range(p.min_assignments..=p.max_assignments.max(p.min_assignments));
    let mut assignments = Vec::with_capacity(na);
    for _ in 0..na {
        let n_in = rng.gen_range(0..=p.max_fan_in);
        let ins = pick(&mut rng, n_in);
        let n_out = rng.gen_range(0..=p.max_fan_out);
        let outs = pick(&mut rng, n_out);
        let k = rng.gen_range(0..p.symbols_per_type.max(1));
        let name = |vs: &[Var]| {
            vs.iter()
                .map(|v| sorts[v.index()].name())
                .collect::<Vec<_>>()
                .join(",")
        };
        let symbol = Symbol::new(&format!("g{k}:{}>{}", name(&ins), name(&outs)));
        assignments.push(Assignment::new(outs, symbol, ins));
    }
    let n_in = rng.gen_range(0..=p.max_interface);
    let inputs = pick(&mut rng, n_in);
    let n_out = rng.gen_range(0..=p.max_interface);
    let outputs = pick(&mut rng, n_out);
    DotDiagram::from_used(&sorts, assignments, &inputs, &outputs).expect("variables in range")
}

/// Shape bounds for [`random_program`].
#[derive(Clone, Debug)]
pub struct ProgramParams {
    /// Number of functions; the call DAG has at most this depth.
    pub functions: usize,
    pub max_params: usize,
    pub max_statements: usize,
    pub max_returns: usize,
    /// Bound on flip expressions per function.
    pub max_flips: usize,
    /// Probability that a statement is an `observe`.
    pub observe_density: f64,
    /// Resample until the unfolded root has at most this many variables.
    pub max_unfolded_vars: Option<usize>,
    /// Give the root no parameters and exactly one result, as inference needs.
    pub closed_root: bool,
}

impl Default for ProgramParams {
    fn default() -> Self {
        ProgramParams {
            functions: 3,
            max_params: 2,
            max_statements: 4,
            max_returns: 2,
            max_flips: 3,
            observe_density: 0.2,
            max_unfolded_vars: Some(12),
            closed_root: false,
        }
    }
}

const PROBABILITIES: [&str; 7] = ["0.5", "1/3", "0.1", "0.25", "0.9", "1/5", "0.75"];

struct ProgramGen<'a> {
    rng: ChaCha8Rng,
    p: &'a ProgramParams,
    /// (params, returns) of the functions generated so far.
    arities: Vec<(usize, usize)>,
    flips_left: usize,
}

impl ProgramGen<'_> {
    fn expr(&mut self, env: &[String], depth: usize) -> String {
        let choice = if depth == 0 {
            0
        } else {
            self.rng.gen_range(0..6)
        };
        match choice {
            1 | 2 => {
                let op = if choice == 1 { "∧" } else { "∨" };
                let (l, r) = (self.expr(env, depth - 1), self.expr(env, depth - 1));
                format!("({l} {op} {r})")
            }
            3 => format!("¬{}", self.expr(env, depth - 1)),
            4 => {
                let unary: Vec<usize> = (0..self.arities.len())
                    .filter(|&i| self.arities[i].1 == 1)
                    .collect();
                match unary.choose(&mut self.rng) {
                    Some(&i) => {
                        let args: Vec<String> = (0..self.arities[i].0)
                            .map(|_| self.expr(env, depth - 1))
                            .collect();
                        format!("f{i}({})", args.join(", "))
                    }
                    None => self.atom(env),
                }
            }
            _ => self.atom(env),
        }
    }

    /// Flips and the constants `true`/`false` (which desugar to flips) share one budget.
    fn atom(&mut self, env: &[String]) -> String {
        if self.flips_left > 0 && (env.is_empty() || self.rng.gen_bool(0.35)) {
            self.flips_left -= 1;
            if self.rng.gen_bool(0.1) {
                return ["true", "false"]
                    .choose(&mut self.rng)
                    .expect("nonempty")
                    .to_string();
            }
            format!(
                "flip({})",
                PROBABILITIES.choose(&mut self.rng).expect("nonempty")
            )
        } else {
            env.choose(&mut self.rng)
                .expect("functions start with a variable in scope")
                .clone()
        }
    }

    fn function(&mut self, i: usize, closed: bool, src: &mut String) {
        self.flips_left = self.p.max_flips.max(usize::from(closed));
        let min_params = usize::from(self.p.max_flips == 0);
        let np = if closed {
            0
        } else {
            self.rng
                .gen_range(min_params..=self.p.max_params.max(min_params))
        };
        let mut env: Vec<String> = (0..np).map(|k| format!("p{k}")).collect();
        writeln!(src, "f{i}({}) :=", env.join(", ")).expect("string write");
        let mut fresh = 0;
        if env.is_empty() {
            let e = self.atom(&env);
            writeln!(src, "  let x0 = {e};").expect("string write");
            env.push("x0".into());
        }
        for _ in 0..self.rng.gen_range(0..=self.p.max_statements) {
            if self.rng.gen_bool(self.p.observe_density) {
                let e = self.expr(&env, 1);
                writeln!(src, "  observe({e});").expect("string write");
                continue;
            }
            let multi: Vec<usize> = (0..i).filter(|&j| self.arities[j].1 > 1).collect();
            if !multi.is_empty() && self.rng.gen_bool(0.25) {
                let j = *multi.choose(&mut self.rng).expect("nonempty");
                let targets: Vec<String> = (0..self.arities[j].1)
                    .map(|_| {
                        fresh += 1;
                        format!("x{fresh}")
                    })
                    .collect();
                let args: Vec<String> =
                    (0..self.arities[j].0).map(|_| self.expr(&env, 1)).collect();
                writeln!(
                    src,
                    "  let {} = f{j}({});",
                    targets.join(", "),
                    args.join(", ")
                )
                .expect("string write");
                env.extend(targets);
                continue;
            }
            fresh += 1;
            let e = self.expr(&env, 2);
            writeln!(src, "  let x{fresh} = {e};").expect("string write");
            env.push(format!("x{fresh}"));
        }
        let nr = if closed {
            1
        } else {
            self.rng.gen_range(0..=self.p.max_returns)
        };
        let rets: Vec<String> = (0..nr).map(|_| self.expr(&env, 1)).collect();
        writeln!(src, "  {}", rets.join(", ")).expect("string write");
        self.arities.push((np, nr));
    }
}

/// Source text of a reproducible random Boolean program; the last function is the root.
pub fn random_program_source(seed: u64, p: &ProgramParams) -> String {
    let mut g = ProgramGen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        p,
        arities: Vec::new(),
        flips_left: 0,
    };
    let mut src = String::new();
    let n = p.functions.max(1);
    for i in 0..n {
        g.function(i, p.closed_root && i + 1 == n, &mut src);
    }
    src
}

/// A reproducible random program, desugared. When `max_unfolded_vars` is set,
/// derived seeds are tried in turn until the unfolded root is small enough.
pub fn random_program(seed: u64, p: &ProgramParams) -> HierarchicalDotDiagram {
    for attempt in 0u64.. {
        let s = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let src = random_program_source(s, p);
        let h = compile_source(&src, None)
            .unwrap_or_else(|e| panic!("generated program rejected: {e}\n{src}"));
        let fits = match p.max_unfolded_vars {
            None => true,
            Some(limit) => h
                .unfold(10_000)
                .map(|f| f.num_vars() <= limit)
                .unwrap_or(false),
        };
        if fits {
            return h;
        }
    }
    unreachable!("the attempt counter is unbounded")
}

/// Greedily deletes assignments while `still_fails` keeps returning true.
pub fn minimize(f: &DotDiagram, mut still_fails: impl FnMut(&DotDiagram) -> bool) -> DotDiagram {
    let mut cur = f.clone();
    let mut i = cur.assignments().len();
    while i > 0 {
        i -= 1;
        let mut assignments = cur.assignments().to_vec();
        assignments.remove(i);
        if let Ok(cand) =
            DotDiagram::from_used(cur.sorts(), assignments, cur.inputs(), cur.outputs())
        {
            if still_fails(&cand) {
                cur = cand;
            }
        }
        i = i.min(cur.assignments().len());
    }
    cur
}

/// Directory for reproducers: `$DOTALG_REPRO_DIR`, or `target/reproducers`.
pub fn reproducer_dir() -> PathBuf {
    std::env::var_os("DOTALG_REPRO_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("target/reproducers"))
}

/// Writes `f` as JSON to `dir/{tag}.json` and returns the path.
pub fn dump_reproducer(dir: &Path, tag: &str, f: &DotDiagram) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{tag}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(f)?)?;
    Ok(path)
}

/// One entry of the committed seed corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedCase {
    Diagram(u64),
    Program(u64),
}

/// Parses corpus lines of the form `diagram <seed>` or `program <seed>`;
/// blank lines and `#` comments are skipped.
pub fn parse_seed_corpus(text: &str) -> Result<Vec<SeedCase>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: i + 1,
            column: 1,
            message: format!("expected `diagram <seed>` or `program <seed>`, got `{line}`"),
        };
        let mut parts = line.split_whitespace();
        let (kind, seed) = (parts.next().ok_or_else(bad)?, parts.next().ok_or_else(bad)?);
        let seed: u64 = seed.parse().map_err(|_| bad())?;
        out.push(match kind {
            "diagram" => SeedCase::Diagram(seed),
            "program" => SeedCase::Program(seed),
            _ => return Err(bad()),
        });
    }
    Ok(out)
}
