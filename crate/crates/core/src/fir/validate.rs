use std::collections::HashSet;
use std::fmt;

use super::ast::{FirArg, FirFunction, StatementKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirIssue {
    pub block: usize,
    /// 0-based statement index within the block, when the issue is about one statement.
    pub statement: Option<usize>,
    pub message: String,
}

impl fmt::Display for FirIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.statement {
            Some(s) => write!(f, "block #{} statement {}: {}", self.block, s + 1, self.message),
            None => write!(f, "block #{}: {}", self.block, self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FirReport {
    pub issues: Vec<FirIssue>,
}

impl FirReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for FirReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.issues {
            writeln!(f, "error: {i}")?;
        }
        Ok(())
    }
}

/// Checks the structural invariants of a FIR function and reports every violation.
pub fn validate_fir(f: &FirFunction) -> FirReport {
    let mut issues = Vec::new();
    let mut issue = |block: usize, statement: Option<usize>, message: String| {
        issues.push(FirIssue { block, statement, message });
    };
    let n = f.num_blocks();
    if n == 0 {
        issue(0, None, format!("function `{}` has no blocks", f.name));
        return FirReport { issues };
    }

    let all_defs: HashSet<u32> = f.statements().filter_map(|s| s.result).collect();
    let mut defined: HashSet<u32> = HashSet::new();
    let preds = f.predecessors();
    let reachable: HashSet<usize> = f.reachable_blocks().into_iter().collect();

    let check_arg = |arg: &FirArg, defined: &HashSet<u32>, phi: bool| -> Option<String> {
        match arg {
            FirArg::Ssa(id) if phi && !all_defs.contains(id) => Some(format!("%{id} is never defined")),
            FirArg::Ssa(id) if !phi && !defined.contains(id) => Some(format!("%{id} is used before its definition")),
            FirArg::Param(k) if *k == 0 || *k > f.params.len() => Some(format!("parameter _{k} does not exist")),
            _ => None,
        }
    };

    // Block numbers are 1-based, so `b` indexes both `preds` and `f.block`.
    #[allow(clippy::needless_range_loop)]
    for b in 1..=n {
        let stmts = &f.block(b).statements;
        let mut in_phi_prefix = true;
        for (i, s) in stmts.iter().enumerate() {
            if s.is_terminator() && i + 1 != stmts.len() {
                issue(b, Some(i), "control-flow statement is not the last statement of its block".into());
            }
            match &s.kind {
                StatementKind::Phi { incomings, .. } => {
                    if !in_phi_prefix {
                        issue(b, Some(i), "phi after a non-phi statement".into());
                    }
                    let mut seen = HashSet::new();
                    for (p, arg) in incomings {
                        if !preds[b].contains(p) {
                            issue(b, Some(i), format!("phi incoming from #{p}, which is not a predecessor"));
                        }
                        if !seen.insert(*p) {
                            issue(b, Some(i), format!("phi lists predecessor #{p} twice"));
                        }
                        if let Some(m) = check_arg(arg, &defined, true) {
                            issue(b, Some(i), m);
                        }
                    }
                    for p in preds[b].iter().filter(|p| reachable.contains(p)) {
                        if !incomings.iter().any(|(q, _)| q == p) {
                            issue(b, Some(i), format!("phi has no incoming value for predecessor #{p}"));
                        }
                    }
                }
                _ => {
                    in_phi_prefix = false;
                    for arg in s.args() {
                        if let Some(m) = check_arg(&arg, &defined, false) {
                            issue(b, Some(i), m);
                        }
                    }
                }
            }
            if let Some(r) = s.result {
                if !defined.insert(r) {
                    issue(b, Some(i), format!("%{r} is defined more than once"));
                }
            }
            match &s.kind {
                StatementKind::Goto(t) | StatementKind::GotoIfNot { target: t, .. } if *t == 0 || *t > n => {
                    issue(b, Some(i), format!("branch to missing block #{t}"))
                }
                _ => {}
            }
        }
        let last = stmts.last().map(|s| &s.kind);
        if b == n && !matches!(last, Some(StatementKind::Goto(_) | StatementKind::Return(_))) {
            issue(b, None, "last block falls off the end of the function".into());
        }
    }
    if !preds[1].is_empty() {
        issue(1, None, "the entry block cannot be a branch target".into());
    }
    FirReport { issues }
}
