//! Independent oracles and reproducible generators for tests.

mod generators;
mod oracle;
mod relational;

pub use generators::{
    dump_reproducer, minimize, parse_seed_corpus, random_diagram, random_program,
    random_program_source, reproducer_dir, DiagramParams, ProgramParams, SeedCase,
};
pub use oracle::{oracle_semantics, ORACLE_LIMIT};
pub use relational::{random_instance, random_query};
