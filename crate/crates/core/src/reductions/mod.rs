//! Generators and reductions: prime cycles, 3-SAT, the counter witness, and machines.

pub mod cycles;
pub mod ntm;
pub mod primes;
pub mod sat;
pub mod witness;

pub use cycles::{binarize, code_bits, prime_cycle_dfa};
pub use ntm::{
    condition_formula, crt_encode_marks, crt_encode_table, decode_marks, legal_window, ntm_to_formula,
    simulate_ntm, window_set, Cell, ComputationTable, Condition, Edge, Move, Ntm, Transition,
    DEFAULT_SIMULATION_BUDGET,
};
pub use primes::{first_primes, is_prime, nth_prime, MAX_PRIME_INDEX};
pub use sat::{decode_sat_assignment, parse_dimacs, sat_to_dfa, Cnf, Literal};
pub use witness::{alg3_nfa, alg3_program};
