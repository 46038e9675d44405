use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::apps::{Atom, ConjunctiveQuery, RelationalInstance};

/// A reproducible query with 1 to `max_atoms` atoms over relations `R0…R2`
/// of arity 1 to 3, using at most `max_vars` variables, of which up to two
/// are free.
pub fn random_query(seed: u64, max_atoms: usize, max_vars: usize) -> ConjunctiveQuery {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arities = [
        rng.gen_range(1..=3),
        rng.gen_range(1..=3),
        rng.gen_range(1..=3),
    ];
    let nvars = rng.gen_range(1..=max_vars.max(1));
    let vars: Vec<String> = (0..nvars).map(|i| format!("v{i}")).collect();
    let atoms = (0..rng.gen_range(1..=max_atoms.max(1)))
        .map(|_| {
            let r = rng.gen_range(0..arities.len());
            Atom {
                relation: format!("R{r}"),
                args: (0..arities[r])
                    .map(|_| vars[rng.gen_range(0..nvars)].clone())
                    .collect(),
            }
        })
        .collect::<Vec<_>>();
    let mut used: Vec<String> = Vec::new();
    for a in &atoms {
        for v in &a.args {
            if !used.contains(v) {
                used.push(v.clone());
            }
        }
    }
    let nfree = rng.gen_range(0..=2usize.min(used.len()));
    let mut free = Vec::new();
    while free.len() < nfree {
        let v = used[rng.gen_range(0..used.len())].clone();
        if !free.contains(&v) {
            free.push(v);
        }
    }
    ConjunctiveQuery::new(format!("q{seed}"), free, atoms).expect("arities are consistent")
}

/// A reproducible instance for `q` on `domain` elements, each possible tuple
/// present with probability `density`.
pub fn random_instance(
    seed: u64,
    q: &ConjunctiveQuery,
    domain: usize,
    density: f64,
) -> RelationalInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = RelationalInstance::default();
    for i in 0..domain {
        inst.element(&format!("e{i}"));
    }
    for (r, &k) in &q.relations {
        if domain == 0 {
            break;
        }
        let mut t = vec![0usize; k];
        loop {
            if rng.gen_bool(density) {
                inst.insert(r, t.clone()).expect("tuple within domain");
            }
            let mut i = 0;
            while i < k {
                t[i] += 1;
                if t[i] < domain {
                    break;
                }
                t[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    inst.conform(q).expect("arities come from the query");
    inst
}
