//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::{BTreeSet, HashMap};
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use bridgegen_bench::{random_cfg_function, random_einsum_spec};
use bridgegen_core::codegen::{default_registry, translate, CodegenError, IntrinsicRegistry, IntrinsicSignature};
use bridgegen_core::dialects::{builtin_registry, builtin_spec, load_dialect_spec, serialize_dialect};
use bridgegen_core::einsum::{generate_einsum, parse_einsum};
use bridgegen_core::fir::{
    inline_calls, insert_bool_conversions, parse_program, FirArg, FirFunction, FrontendType, StatementKind,
};
use bridgegen_core::interp::{Buffer, Interpreter, LaunchConfig, RuntimeValue, ThreadOrder};
use bridgegen_core::ir::malformed::malformed_modules;
use bridgegen_core::ir::{print_module, verify_module, BlockId, IrModule, IrType};
use bridgegen_core::pipeline::{compile, is_frontend_bool, standard_registry};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ms(d: Duration) -> String {
    format!("{:.1} ms", d.as_secs_f64() * 1e3)
}

const SIGMOID_FIR: &str = "\
fn sigmoid(_1: f32)
1:
  %1 = invoke -(_1) :: f32
  %2 = invoke exp(%1) :: f32
  %3 = invoke +(%2, 1) :: f32
  %4 = invoke /(1, %3) :: f32
  return %4
";

const SIGMOID_IR: &str = "\
func.func @sigmoid(%arg0: f32) -> f32 {
  %cst = arith.constant 1.0 : f32
  %0 = arith.negf %arg0 : f32
  %1 = math.exp %0 : f32
  %2 = arith.addf %1, %cst : f32
  %3 = arith.divf %cst, %2 : f32
  return %3 : f32
}";

const MAX_FIR: &str = "\
fn max(_1: i64, _2: i64)
1:
  %1 = invoke >=(_1, _2) :: i1
  goto #3 ifnot %1
2:
  goto #4
3:
  nothing
4:
  %6 = phi (#2 => _1, #3 => _2) :: i64
  return %6
";

const MAX_IR: &str = "\
func.func @max(%arg0: i64, %arg1: i64) -> i64 {
^bb0:
  %0 = arith.cmpi sge, %arg0, %arg1 : i64
  cf.cond_br %0, ^bb1, ^bb2
^bb1: // pred: ^bb0
  cf.br ^bb3(%arg0 : i64)
^bb2: // pred: ^bb0
  cf.br ^bb3(%arg1 : i64)
^bb3(%1: i64): // 2 preds: ^bb1, ^bb2
  return %1 : i64
}";

const VADD_FIR: &str = "\
fn vadd(_1: memref{f32,1}, _2: memref{f32,1}, _3: memref{f32,1})
1:
  %1 = invoke block_idx_x() :: index
  %2 = invoke block_dim_x() :: index
  %3 = invoke *(%1, %2) :: index
  %4 = invoke thread_idx_x() :: index
  %5 = invoke +(%3, %4) :: index
  %6 = invoke load(_1, %5) :: f32
  %7 = invoke load(_2, %5) :: f32
  %8 = invoke +(%6, %7) :: f32
  invoke store(%8, _3, %5) :: Nothing
  return
";

/// Lines with indentation and runs of blanks collapsed; the `module {` wrapper is dropped.
fn normalized(text: &str) -> Vec<String> {
    let lines: Vec<String> = text
        .lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect();
    match lines.first().map(String::as_str) {
        Some("module {") => lines[1..lines.len() - 1].to_vec(),
        _ => lines,
    }
}

/// Modules produced along the way, for the op-coverage check.
#[derive(Default)]
struct Goldens {
    modules: Vec<IrModule>,
}

fn compile_text(src: &str, entry: &str, types: &[FrontendType]) -> Result<IrModule, String> {
    let program = parse_program(src).map_err(|e| e.to_string())?;
    compile(&standard_registry(), &program, entry, types).map_err(|e| e.to_string())
}

fn golden(goldens: &mut Goldens, src: &str, entry: &str, types: &[FrontendType], expected: &str) -> Check {
    let start = Instant::now();
    let module = compile_text(src, entry, types)?;
    let text = print_module(&module);
    let elapsed = start.elapsed();
    ensure(normalized(&text) == normalized(expected), || format!("output differs:\n{text}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {}", ms(elapsed)))?;
    goldens.modules.push(module);
    Ok(format!("{} lines match, {}", normalized(expected).len(), ms(elapsed)))
}

fn ac1(goldens: &mut Goldens) -> Check {
    let detail = golden(goldens, SIGMOID_FIR, "sigmoid", &[FrontendType::f32()], SIGMOID_IR)?;
    let constants = print_module(goldens.modules.last().unwrap()).matches("arith.constant").count();
    ensure(constants == 1, || format!("{constants} constants"))?;
    Ok(detail)
}

fn ac2(goldens: &mut Goldens) -> Check {
    golden(goldens, MAX_FIR, "max", &[FrontendType::i64(), FrontendType::i64()], MAX_IR)
}

/// Successor block numbers of FIR block `b`: the fall-through edge first for `ifnot`.
fn fir_successors(f: &FirFunction, b: usize) -> Vec<usize> {
    match f.blocks[b - 1].statements.last().map(|s| &s.kind) {
        Some(StatementKind::Return(_)) => vec![],
        Some(StatementKind::Goto(t)) => vec![*t],
        Some(StatementKind::GotoIfNot { target, .. }) => vec![b + 1, *target],
        _ => vec![b + 1],
    }
}

fn fir_reachable(f: &FirFunction) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![1];
    while let Some(b) = stack.pop() {
        if seen.insert(b) {
            stack.extend(fir_successors(f, b));
        }
    }
    seen
}

const RANDOM_FUNCTIONS: usize = 150;

/// CFG isomorphism (AC3) and phi-to-block-argument structure (AC4) over the same suite.
fn cfg_suite() -> Result<(usize, usize, usize), String> {
    let registry = default_registry();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let (mut edges, mut phis) = (0, 0);
    for case in 0..RANDOM_FUNCTIONS {
        let f = random_cfg_function(&mut rng, "f", 8);
        let converted = insert_bool_conversions(&f, is_frontend_bool);
        let t = translate(&registry, &converted, &[FrontendType::i64(), FrontendType::i64()])
            .map_err(|e| format!("case {case}: {e}"))?;
        let report = verify_module(&t.module, Some(registry.dialects()));
        ensure(report.is_ok(), || format!("case {case} does not verify: {report}"))?;
        let m = &t.module;
        let region = m.op(t.func).regions[0];
        let live = fir_reachable(&f);
        let back: HashMap<BlockId, usize> = t.blocks.iter().map(|(&b, &ir)| (ir, b)).collect();
        ensure(m.region(region).blocks.len() == live.len(), || {
            format!("case {case}: {} IR blocks for {} reachable FIR blocks", m.region(region).blocks.len(), live.len())
        })?;
        ensure(t.blocks.keys().copied().collect::<BTreeSet<_>>() == live, || format!("case {case}: block map {:?}", t.blocks))?;
        let params = &m.block(m.region(region).entry().unwrap()).arguments;

        for &b in &live {
            let ir = t.blocks[&b];
            let term = m.op(*m.block(ir).operations.last().ok_or_else(|| format!("case {case}: empty block"))?);
            let got: Vec<usize> = term.successors.iter().map(|s| back[&s.block]).collect();
            ensure(got == fir_successors(&f, b), || {
                format!("case {case}: block {b} branches to {got:?}, FIR says {:?}", fir_successors(&f, b))
            })?;
            edges += got.len();

            for (s, &to) in term.successors.iter().zip(&got) {
                let target_phis: Vec<(u32, &Vec<(usize, FirArg)>)> = f.blocks[to - 1]
                    .statements
                    .iter()
                    .filter_map(|st| match &st.kind {
                        StatementKind::Phi { incomings, .. } => Some((st.result.unwrap(), incomings)),
                        _ => None,
                    })
                    .collect();
                let args = &m.block(t.blocks[&to]).arguments;
                ensure(args.len() == target_phis.len() && s.args.len() == args.len(), || {
                    format!("case {case}: block {to} has {} phis, {} args, edge passes {}", target_phis.len(), args.len(), s.args.len())
                })?;
                for (k, (id, incomings)) in target_phis.iter().enumerate() {
                    ensure(t.values.get(id) == Some(&vec![args[k]]), || format!("case {case}: phi %{id} is not block argument {k}"))?;
                    let incoming = incomings
                        .iter()
                        .find(|(p, _)| *p == b)
                        .map(|(_, a)| *a)
                        .ok_or_else(|| format!("case {case}: phi %{id} lacks an incoming for #{b}"))?;
                    let want = match incoming {
                        FirArg::Param(j) => params[j - 1],
                        FirArg::Ssa(n) => t.values[&n][0],
                        FirArg::Literal(_) => unreachable!("the generator only routes SSA values"),
                    };
                    ensure(s.args[k] == want, || format!("case {case}: edge #{b} -> #{to} passes the wrong value for %{id}"))?;
                    phis += 1;
                }
            }
        }
    }
    Ok((RANDOM_FUNCTIONS, edges, phis))
}

// Dispatch oracle over a six-type lattice.
const POOL: [&str; 6] = ["Any", "Number", "Real", "AbstractFloat", "f32", "i64"];

/// Supertypes of each pool type, itself included.
fn ancestors(t: &str) -> &'static [&'static str] {
    match t {
        "Any" => &["Any"],
        "Number" => &["Number", "Any"],
        "Real" => &["Real", "Number", "Any"],
        "AbstractFloat" => &["AbstractFloat", "Real", "Number", "Any"],
        "f32" => &["f32", "AbstractFloat", "Real", "Number", "Any"],
        "i64" => &["i64", "Integer", "Real", "Number", "Any"],
        _ => unreachable!(),
    }
}

fn below(a: &[&str], b: &[&str]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| ancestors(x).contains(y))
}

#[derive(Debug, PartialEq)]
enum Resolution {
    Unique(String),
    NoMethod,
    Ambiguous,
}

fn oracle(sigs: &[Vec<&str>], call: &[&str]) -> Resolution {
    let applicable: Vec<&Vec<&str>> = sigs.iter().filter(|s| below(call, s)).collect();
    if applicable.is_empty() {
        return Resolution::NoMethod;
    }
    let minimum: Vec<&&Vec<&str>> = applicable.iter().filter(|s| applicable.iter().all(|o| below(s, o))).collect();
    match minimum.as_slice() {
        [s] => Resolution::Unique(format!("f({})", s.join(", "))),
        _ => Resolution::Ambiguous,
    }
}

fn ac5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tally = [0usize; 3];
    let (registries, calls_each) = (600, 8);
    for r in 0..registries {
        let mut registry = IntrinsicRegistry::new(builtin_registry());
        let lattice = registry.lattice().clone();
        let mut sigs: Vec<Vec<&str>> = Vec::new();
        for _ in 0..rng.gen_range(1..=6) {
            let arity = rng.gen_range(1..=2);
            let sig: Vec<&str> = (0..arity).map(|_| *POOL.choose(&mut rng).unwrap()).collect();
            if sigs.contains(&sig) {
                continue;
            }
            let params = sig.iter().map(|t| lattice.parse_type(t).unwrap()).collect();
            registry.register_intrinsic(IntrinsicSignature::new("f", params), |_, _| Ok(Vec::new())).map_err(|e| e.to_string())?;
            sigs.push(sig);
        }
        for _ in 0..calls_each {
            let call: Vec<&str> = (0..rng.gen_range(1..=2)).map(|_| *POOL.choose(&mut rng).unwrap()).collect();
            let types: Vec<FrontendType> = call.iter().map(|t| lattice.parse_type(t).unwrap()).collect();
            let got = match registry.resolve_method("f", &types) {
                Ok(m) => Resolution::Unique(m.signature.to_string()),
                Err(CodegenError::NoMethod { .. }) => Resolution::NoMethod,
                Err(CodegenError::Ambiguous { .. }) => Resolution::Ambiguous,
                Err(e) => return Err(format!("registry {r}: unexpected error {e}")),
            };
            let want = oracle(&sigs, &call);
            ensure(got == want, || format!("registry {r} {sigs:?}, call {call:?}: got {got:?}, oracle {want:?}"))?;
            tally[match want {
                Resolution::Unique(_) => 0,
                Resolution::NoMethod => 1,
                Resolution::Ambiguous => 2,
            }] += 1;
        }
    }
    ensure(tally.iter().all(|&n| n > 0), || format!("outcome mix {tally:?} misses a category"))?;
    Ok(format!("{registries} registries, {} calls: {} unique, {} no-method, {} ambiguous", registries * calls_each, tally[0], tally[1], tally[2]))
}

const CHAIN_INT: &str = "\
fn outer(_1: i64, _2: i64)
1:
  %1 = invoke +(_1, _2) :: i64
  %2 = invoke middle(%1, _2) :: i64
  %3 = invoke *(%2, 2) :: i64
  return %3

fn middle(_1: i64, _2: i64)
1:
  %1 = invoke -(_2, 1) :: i64
  %2 = invoke inner(_1, %1) :: i64
  %3 = invoke -(%2, _1) :: i64
  return %3

fn inner(_1: i64, _2: i64)
1:
  %1 = invoke >=(_1, _2) :: i1
  goto #3 ifnot %1
2:
  %2 = invoke *(_1, _2) :: i64
  return %2
3:
  %3 = invoke +(_2, 3) :: i64
  return %3
";

const FLAT_INT: &str = "\
fn flat(_1: i64, _2: i64)
1:
  %1 = invoke +(_1, _2) :: i64
  %2 = invoke -(_2, 1) :: i64
  %3 = invoke >=(%1, %2) :: i1
  goto #3 ifnot %3
2:
  %4 = invoke *(%1, %2) :: i64
  goto #4
3:
  %5 = invoke +(%2, 3) :: i64
4:
  %6 = phi (#2 => %4, #3 => %5) :: i64
  %7 = invoke -(%6, %1) :: i64
  %8 = invoke *(%7, 2) :: i64
  return %8
";

const CHAIN_F32: &str = "\
fn outer(_1: f32)
1:
  %1 = invoke middle(_1) :: f32
  %2 = invoke *(%1, _1) :: f32
  return %2

fn middle(_1: f32)
1:
  %1 = invoke inner(_1) :: f32
  %2 = invoke +(%1, 1) :: f32
  %3 = invoke /(1, %2) :: f32
  return %3

fn inner(_1: f32)
1:
  %1 = invoke -(_1) :: f32
  %2 = invoke exp(%1) :: f32
  return %2
";

const FLAT_F32: &str = "\
fn flat(_1: f32)
1:
  %1 = invoke -(_1) :: f32
  %2 = invoke exp(%1) :: f32
  %3 = invoke +(%2, 1) :: f32
  %4 = invoke /(1, %3) :: f32
  %5 = invoke *(%4, _1) :: f32
  return %5
";

fn ac6() -> Check {
    let registry = standard_registry();
    for src in [CHAIN_INT, CHAIN_F32] {
        let program = parse_program(src).map_err(|e| e.to_string())?;
        let inlined = inline_calls(&program, "outer", |n, t| registry.is_intrinsic(n, t)).map_err(|e| e.to_string())?;
        for st in inlined.blocks.iter().flat_map(|b| &b.statements) {
            if let StatementKind::Invoke { target, .. } = &st.kind {
                ensure(!program.functions.contains_key(target), || format!("call to `{target}` survived inlining"))?;
            }
        }
    }

    let i64s = [FrontendType::i64(), FrontendType::i64()];
    let chained = compile_text(CHAIN_INT, "outer", &i64s)?;
    let flat = compile_text(FLAT_INT, "flat", &i64s)?;
    let mut cases = 0;
    for a in -6..=6 {
        for b in -6..=6 {
            let inputs = [RuntimeValue::int(64, a), RuntimeValue::int(64, b)];
            let x = Interpreter::new(&chained).run_function("outer", &inputs).map_err(|e| e.to_string())?;
            let y = Interpreter::new(&flat).run_function("flat", &inputs).map_err(|e| e.to_string())?;
            let s = b - 1;
            let inner = if a + b >= s { (a + b) * s } else { s + 3 };
            let want = RuntimeValue::int(64, (inner - (a + b)) * 2);
            ensure(x == y && x == vec![want.clone()], || format!("({a}, {b}): chain {x:?}, flat {y:?}, expected {want}"))?;
            cases += 1;
        }
    }

    let chained = compile_text(CHAIN_F32, "outer", &[FrontendType::f32()])?;
    let flat = compile_text(FLAT_F32, "flat", &[FrontendType::f32()])?;
    let mut worst = 0.0f64;
    for i in -20..=20 {
        let x = i as f32 * 0.37;
        let run = |m: &IrModule, name: &str| -> Result<f64, String> {
            let out = Interpreter::new(m).run_function(name, &[RuntimeValue::F32(x)]).map_err(|e| e.to_string())?;
            out[0].as_f64().ok_or_else(|| "non-numeric result".to_string())
        };
        let (c, fl) = (run(&chained, "outer")?, run(&flat, "flat")?);
        let rel = (c - fl).abs() / fl.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(if fl == 0.0 { (c - fl).abs() } else { rel });
        ensure(worst <= 1e-6, || format!("x = {x}: chain {c}, flat {fl}"))?;
        cases += 1;
    }
    Ok(format!("no program calls left; {cases} inputs agree (i64 bit-equal, f32 max rel err {worst:e})"))
}

fn ac7() -> Check {
    let m = compile_text(SIGMOID_FIR, "sigmoid", &[FrontendType::f32()])?;
    let at = |x: f32| -> Result<f32, String> {
        match Interpreter::new(&m).run_function("sigmoid", &[RuntimeValue::F32(x)]).map_err(|e| e.to_string())?[..] {
            [RuntimeValue::F32(y)] => Ok(y),
            ref other => Err(format!("unexpected outputs {other:?}")),
        }
    };
    let (y0, y2) = (at(0.0)?, at(2.0)?);
    ensure(y0 == 0.5, || format!("sigmoid(0) = {y0}"))?;
    let err = (y2 as f64 - 0.8807970779778823).abs();
    ensure(err <= 1e-6, || format!("sigmoid(2) = {y2}, error {err:e}"))?;
    Ok(format!("sigmoid(0) = {y0}, sigmoid(2) = {y2} (error {err:.1e})"))
}

/// Index tuples of a spec such as `(i,k),(k,j)->(i,j)`, read without the library parser.
fn tuples(text: &str) -> Vec<Vec<String>> {
    text.split('(')
        .skip(1)
        .map(|t| t.split(')').next().unwrap().split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
        .collect()
}

fn tensor(elem: &IrType, dims: Vec<usize>, data: &[f64]) -> RuntimeValue {
    let values = data
        .iter()
        .map(|&x| if *elem == IrType::Float32 { RuntimeValue::F32(x as f32) } else { RuntimeValue::F64(x) })
        .collect();
    RuntimeValue::Tensor(Buffer::new(elem.clone(), dims, values))
}

fn row_major(idx: &[String], extent: &HashMap<String, usize>, at: &HashMap<String, usize>) -> usize {
    idx.iter().fold(0, |acc, i| acc * extent[i] + at[i])
}

/// Interprets the generated kernel for `spec` on random data and compares with a loop nest.
fn einsum_case(rng: &mut ChaCha8Rng, spec: &str, elem: FrontendType, fixed: Option<&HashMap<String, usize>>) -> Result<f64, String> {
    let ir_elem = if elem == FrontendType::f32() { IrType::Float32 } else { IrType::Float64 };
    let registry = default_registry();
    let parsed = parse_einsum(spec).map_err(|e| format!("{spec}: {e}"))?;
    let module = generate_einsum(&registry, &parsed, elem).map_err(|e| format!("{spec}: {e}"))?;
    let report = verify_module(&module, Some(registry.dialects()));
    ensure(report.is_ok(), || format!("{spec}: {report}"))?;

    let mut groups = tuples(spec);
    let output = groups.pop().unwrap();
    let mut names: Vec<String> = Vec::new();
    for i in groups.iter().flatten() {
        if !names.contains(i) {
            names.push(i.clone());
        }
    }
    let extent: HashMap<String, usize> = match fixed {
        Some(e) => e.clone(),
        None => names.iter().map(|n| (n.clone(), rng.gen_range(1..=5))).collect(),
    };
    let dims = |t: &[String]| t.iter().map(|i| extent[i]).collect::<Vec<_>>();
    let size = |t: &[String]| dims(t).iter().product::<usize>();
    let data: Vec<Vec<f64>> = groups.iter().map(|t| (0..size(t)).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    // Values as the kernel sees them.
    let seen: Vec<Vec<f64>> = data
        .iter()
        .map(|d| d.iter().map(|&x| if ir_elem == IrType::Float32 { x as f32 as f64 } else { x }).collect())
        .collect();

    let mut want = vec![0.0; size(&output)];
    let mut scale = vec![0.0; size(&output)];
    let total: usize = names.iter().map(|n| extent[n]).product();
    for flat in 0..total {
        let mut at = HashMap::new();
        let mut rest = flat;
        for n in names.iter().rev() {
            at.insert(n.clone(), rest % extent[n]);
            rest /= extent[n];
        }
        let term: f64 = groups.iter().zip(&seen).map(|(t, d)| d[row_major(t, &extent, &at)]).product();
        let o = row_major(&output, &extent, &at);
        want[o] += term;
        scale[o] += term.abs();
    }

    let mut inputs: Vec<RuntimeValue> = groups.iter().zip(&data).map(|(t, d)| tensor(&ir_elem, dims(t), d)).collect();
    inputs.push(tensor(&ir_elem, dims(&output), &vec![0.0; size(&output)]));
    let out = Interpreter::new(&module).run_function("einsum", &inputs).map_err(|e| format!("{spec}: {e}"))?;
    let got = out[0].buffer().ok_or_else(|| format!("{spec}: result is not a tensor"))?;
    ensure(got.dims == dims(&output), || format!("{spec}: result dims {:?}", got.dims))?;
    let mut worst = 0.0f64;
    for (k, v) in got.data.iter().enumerate() {
        let g = v.as_f64().unwrap();
        // Relative to the magnitude of the summed terms, so cancellation near zero is not penalised.
        let rel = (g - want[k]).abs() / scale[k].max(1.0);
        worst = worst.max(rel);
        ensure(rel <= 1e-5, || format!("{spec} at {k}: got {g}, loop nest {}", want[k]))?;
    }
    Ok(worst)
}

fn ac8(goldens: &mut Goldens) -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let matmul: HashMap<String, usize> = [("i", 4), ("k", 3), ("j", 5)].map(|(n, e)| (n.to_string(), e)).into();
    let mut worst = einsum_case(&mut rng, "(i,k),(k,j)->(i,j)", FrontendType::f32(), Some(&matmul))?;
    goldens.modules.push(generate_einsum(&default_registry(), &parse_einsum("(i,k),(k,j)->(i,j)").unwrap(), FrontendType::f32()).unwrap());
    let specs = 40;
    for s in 0..specs {
        let spec = random_einsum_spec(&mut rng, 3, 3);
        let elem = if s % 2 == 0 { FrontendType::f32() } else { FrontendType::f64() };
        worst = worst.max(einsum_case(&mut rng, &spec, elem, None)?);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {}", ms(elapsed)))?;
    Ok(format!("matmul + {specs} random specs, max rel err {worst:.1e}, {}", ms(elapsed)))
}

fn ac9(goldens: &mut Goldens) -> Check {
    let types = vec![FrontendType::memref(FrontendType::f32(), 1); 3];
    let m = compile_text(VADD_FIR, "vadd", &types)?;
    let buf = |v: Vec<f32>| RuntimeValue::MemRef(Buffer::new(IrType::Float32, vec![v.len()], v.into_iter().map(RuntimeValue::F32).collect()));
    let a: Vec<f32> = (1..=8).map(|x| x as f32).collect();
    let b: Vec<f32> = (1..=8).map(|x| 10.0 * x as f32).collect();
    let inputs = [buf(a.clone()), buf(b.clone()), buf(vec![0.0; 8])];
    let launch = LaunchConfig::new([2, 1, 1], [4, 1, 1]);
    let run = |order| Interpreter::new(&m).run_kernel("vadd", launch, &inputs, order).map_err(|e| e.to_string());
    let (fwd, rev) = (run(ThreadOrder::Forward)?, run(ThreadOrder::Reverse)?);
    let want = buf(a.iter().zip(&b).map(|(x, y)| x + y).collect());
    ensure(fwd[2] == want, || format!("c = {}", fwd[2]))?;
    ensure(fwd == rev, || "reverse thread order changed the result".into())?;
    goldens.modules.push(m);
    Ok(format!("c = {}, same under reverse order", fwd[2]))
}

fn ac10() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases = malformed_modules();
    let mut kinds = BTreeSet::new();
    for (i, case) in cases.iter().enumerate() {
        let path = dir.path().join(format!("case{i}.json"));
        std::fs::write(&path, serde_json::to_string(&case.module).unwrap()).map_err(|e| e.to_string())?;
        let out = Command::new(env!("CARGO_BIN_EXE_bridgegen")).arg("verify").arg(&path).output().map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&out.stderr);
        ensure(out.status.code() == Some(1), || format!("{}: exit {:?}", case.name, out.status.code()))?;
        let tag = format!("error[{}]", case.expected.code());
        ensure(stderr.contains(&tag), || format!("{}: expected {tag}, got {stderr}", case.name))?;
        kinds.insert(case.expected.code());
    }
    ensure(cases.len() >= 10, || format!("only {} cases", cases.len()))?;
    Ok(format!("{} modules, {} categories, all exit 1 with the expected diagnostic", cases.len(), kinds.len()))
}

fn ac11(goldens: &Goldens) -> Check {
    let text = builtin_spec("arith").ok_or("no builtin arith spec")?;
    let first = load_dialect_spec(text).map_err(|e| e.to_string())?;
    let printed = serialize_dialect(&first);
    let second = load_dialect_spec(&printed).map_err(|e| e.to_string())?;
    ensure(first == second, || "load -> serialize -> load changed the definition".into())?;
    ensure(serialize_dialect(&second) == printed, || "serialization is not a fixpoint".into())?;

    let registry = builtin_registry();
    let mut names = BTreeSet::new();
    for m in &goldens.modules {
        for op in m.walk() {
            names.insert(m.op(op).name.clone());
        }
    }
    ensure(goldens.modules.len() == 4, || format!("expected 4 golden modules, have {}", goldens.modules.len()))?;
    let missing: Vec<&String> = names.iter().filter(|n| registry.lookup(n).is_none()).collect();
    ensure(missing.is_empty(), || format!("unregistered ops {missing:?}"))?;
    Ok(format!("arith round-trips ({} ops); {} golden op names all registered", first.ops.len(), names.len()))
}

fn main() {
    let mut goldens = Goldens::default();
    let mut failed = 0;
    let mut report = |id: &str, what: &str, result: std::thread::Result<Check>| {
        let line = match result {
            Ok(Ok(detail)) => format!("PASS {id} {what}: {detail}"),
            Ok(Err(why)) => format!("FAIL {id} {what}: {why}"),
            Err(_) => format!("FAIL {id} {what}: panicked"),
        };
        if line.starts_with("FAIL") {
            failed += 1;
        }
        println!("{line}");
    };
    report("AC1", "golden sigmoid", guarded(|| ac1(&mut goldens)));
    report("AC2", "golden max", guarded(|| ac2(&mut goldens)));
    let suite = guarded(cfg_suite);
    let (ac3, ac4) = match suite {
        Ok(Ok((n, edges, phis))) => (
            Ok(Ok(format!("{n} random functions, {edges} edges match"))),
            Ok(Ok(format!("{phis} phi incomings passed as block arguments"))),
        ),
        Ok(Err(e)) => (Ok(Err(e.clone())), Ok(Err(e))),
        Err(p) => (Err(p), Ok(Err("suite panicked".into()))),
    };
    report("AC3", "CFG isomorphism", ac3);
    report("AC4", "phi conversion", ac4);
    report("AC5", "dispatch oracle", guarded(ac5));
    report("AC6", "inlining", guarded(ac6));
    report("AC7", "semantic sigmoid", guarded(ac7));
    report("AC8", "einsum oracle", guarded(|| ac8(&mut goldens)));
    report("AC9", "gpu kernel", guarded(|| ac9(&mut goldens)));
    report("AC10", "verifier", guarded(ac10));
    report("AC11", "dialect specs", guarded(|| ac11(&goldens)));

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn guarded<T>(f: impl FnOnce() -> T) -> std::thread::Result<T> {
    panic::catch_unwind(AssertUnwindSafe(f))
}
