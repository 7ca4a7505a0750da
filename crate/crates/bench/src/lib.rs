//! Seeded workload generators shared by the benchmarks and the acceptance
//! checks: random well-formed FIR control-flow graphs and random einsum specs.

use bridgegen_core::fir::{FirArg, FirBlock, FirFunction, FrontendType, Literal, Statement, StatementKind};
use rand::seq::SliceRandom;
use rand::Rng;

/// How a generated block leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exit {
    FallThrough,
    Goto(usize),
    GotoIfNot(usize),
    Return,
}

/// Successor block numbers (1-based) in terminator order: for a conditional
/// branch the fall-through edge comes first.
fn successors(b: usize, exit: Exit) -> Vec<usize> {
    match exit {
        Exit::FallThrough => vec![b + 1],
        Exit::Goto(t) => vec![t],
        Exit::GotoIfNot(t) => vec![b + 1, t],
        Exit::Return => vec![],
    }
}

fn reachable(exits: &[Exit]) -> Vec<bool> {
    let mut seen = vec![false; exits.len() + 1];
    let mut stack = vec![1];
    while let Some(b) = stack.pop() {
        if std::mem::replace(&mut seen[b], true) {
            continue;
        }
        stack.extend(successors(b, exits[b - 1]));
    }
    seen
}

/// A random well-formed function `name(_1: i64, _2: i64) -> i64` with up to
/// `max_blocks` blocks, branches, back edges and phis. Blocks that end up
/// unreachable are kept; they carry no phis.
pub fn random_cfg_function(rng: &mut impl Rng, name: &str, max_blocks: usize) -> FirFunction {
    let n = rng.gen_range(1..=max_blocks.max(1));
    let exits: Vec<Exit> = (1..=n)
        .map(|b| {
            if n == 1 {
                return Exit::Return;
            }
            // Block 1 is never a branch target.
            let t = rng.gen_range(2..=n);
            match (b == n, rng.gen_range(0..4)) {
                (true, 0 | 1) => Exit::Return,
                (true, _) => Exit::Goto(t),
                (false, 0) => Exit::FallThrough,
                (false, 1) => Exit::Goto(t),
                (false, 2) => Exit::GotoIfNot(t),
                _ => Exit::Return,
            }
        })
        .collect();
    let live = reachable(&exits);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for b in 1..=n {
        for s in successors(b, exits[b - 1]) {
            if live[b] && !preds[s].contains(&b) {
                preds[s].push(b);
            }
        }
    }

    let mut next_id = 1u32;
    let mut fresh = || {
        let id = next_id;
        next_id += 1;
        id
    };
    let phi_ids: Vec<Vec<u32>> = (0..=n)
        .map(|b| {
            let count = if b >= 2 && live[b] && !preds[b].is_empty() { rng.gen_range(0..=2) } else { 0 };
            (0..count).map(|_| fresh()).collect()
        })
        .collect();

    // Values usable at the end of each block: params, its phis and its own results.
    let mut avail: Vec<Vec<FirArg>> = vec![Vec::new(); n + 1];
    let mut bodies: Vec<Vec<Statement>> = vec![Vec::new(); n + 1];
    for b in 1..=n {
        let mut values = vec![FirArg::Param(1), FirArg::Param(2)];
        values.extend(phi_ids[b].iter().map(|&id| FirArg::Ssa(id)));
        let body = &mut bodies[b];
        for _ in 0..rng.gen_range(0..=3) {
            let op = ["+", "-", "*"].choose(rng).unwrap();
            let lhs = *values.choose(rng).unwrap();
            let rhs = if rng.gen_bool(0.25) { FirArg::Literal(Literal::Int(rng.gen_range(-4..=4))) } else { *values.choose(rng).unwrap() };
            let id = fresh();
            body.push(invoke(id, op, vec![lhs, rhs], FrontendType::i64()));
            values.push(FirArg::Ssa(id));
        }
        match exits[b - 1] {
            Exit::FallThrough => {}
            Exit::Goto(t) => body.push(Statement::new(None, StatementKind::Goto(t))),
            Exit::GotoIfNot(t) => {
                let id = fresh();
                let (a, c) = (*values.choose(rng).unwrap(), *values.choose(rng).unwrap());
                body.push(invoke(id, "<", vec![a, c], FrontendType::i1()));
                body.push(Statement::new(None, StatementKind::GotoIfNot { cond: FirArg::Ssa(id), target: t }));
            }
            Exit::Return => {
                let v = *values.choose(rng).unwrap();
                body.push(Statement::new(None, StatementKind::Return(Some(v))));
            }
        }
        avail[b] = values;
    }

    let blocks = (1..=n)
        .map(|b| {
            let mut statements: Vec<Statement> = phi_ids[b]
                .iter()
                .map(|&id| {
                    let incomings = preds[b].iter().map(|&p| (p, *avail[p].choose(rng).unwrap())).collect();
                    Statement::new(Some(id), StatementKind::Phi { incomings, ty: FrontendType::i64() })
                })
                .collect();
            statements.append(&mut bodies[b]);
            FirBlock { statements }
        })
        .collect();
    FirFunction { name: name.to_string(), params: vec![FrontendType::i64(), FrontendType::i64()], blocks }
}

fn invoke(id: u32, target: &str, args: Vec<FirArg>, ty: FrontendType) -> Statement {
    Statement::new(Some(id), StatementKind::Invoke { target: target.to_string(), args, ty })
}

/// A random einsum spec as text, with up to `max_operands` inputs of rank at
/// most `max_rank`. Every output index occurs in some input.
pub fn random_einsum_spec(rng: &mut impl Rng, max_operands: usize, max_rank: usize) -> String {
    const NAMES: [&str; 5] = ["i", "j", "k", "l", "m"];
    let operands = rng.gen_range(1..=max_operands.max(1));
    let inputs: Vec<Vec<&str>> = (0..operands)
        .map(|_| {
            let rank = rng.gen_range(0..=max_rank);
            NAMES.choose_multiple(rng, rank).copied().collect()
        })
        .collect();
    let mut used: Vec<&str> = Vec::new();
    for &i in inputs.iter().flatten() {
        if !used.contains(&i) {
            used.push(i);
        }
    }
    let rank = rng.gen_range(0..=max_rank.min(used.len()));
    let output: Vec<&str> = used.choose_multiple(rng, rank).copied().collect();
    let tuple = |t: &[&str]| format!("({})", t.join(","));
    let inputs: Vec<String> = inputs.iter().map(|t| tuple(t)).collect();
    format!("{}->{}", inputs.join(","), tuple(&output))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bridgegen_core::einsum::parse_einsum;
    use bridgegen_core::fir::validate_fir;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_functions_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..300 {
            let f = random_cfg_function(&mut rng, "f", 8);
            let report = validate_fir(&f);
            assert!(report.is_ok(), "case {i}:\n{report}");
        }
    }

    #[test]
    fn generated_specs_parse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let spec = random_einsum_spec(&mut rng, 3, 3);
            parse_einsum(&spec).unwrap_or_else(|e| panic!("{spec}: {e}"));
        }
    }
}
