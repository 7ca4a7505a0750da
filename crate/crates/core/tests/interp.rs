mod common;

use bridgegen_core::codegen::{default_registry, IntrinsicSignature};
use bridgegen_core::einsum::{generate_einsum, parse_einsum};
use bridgegen_core::fir::{parse_program, FrontendType};
use bridgegen_core::interp::{
    run_function, run_kernel, Buffer, InterpError, Interpreter, LaunchConfig, RuntimeValue, ThreadOrder,
};
use bridgegen_core::ir::{IrAttribute, IrModule, IrType, OperationState};
use bridgegen_core::pipeline::{compile, standard_registry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn build(src: &str, entry: &str, types: &[FrontendType]) -> IrModule {
    compile(&standard_registry(), &parse_program(src).unwrap(), entry, types).unwrap()
}

fn mem(data: &[f32]) -> RuntimeValue {
    RuntimeValue::MemRef(Buffer::new(IrType::Float32, vec![data.len()], data.iter().map(|&x| RuntimeValue::F32(x)).collect()))
}

fn floats(v: &RuntimeValue) -> Vec<f64> {
    v.buffer().unwrap().data.iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn sigmoid_values() {
    let m = build(common::SIGMOID, "sigmoid", &[FrontendType::f32()]);
    let at = |x: f32| match run_function(&m, "sigmoid", &[RuntimeValue::F32(x)]).unwrap()[..] {
        [RuntimeValue::F32(y)] => y,
        ref other => panic!("{other:?}"),
    };
    assert_eq!(at(0.0), 0.5);
    let oracle = 1.0 / (1.0 + (-2.0f64).exp());
    assert!(((at(2.0) as f64) - oracle).abs() <= 1e-6);
}

#[test]
fn max_values() {
    let m = build(common::MAX, "max", &[FrontendType::i64(), FrontendType::i64()]);
    for (a, b) in [(3, 7), (7, 3), (-2, -2), (i64::MIN, i64::MAX)] {
        let out = run_function(&m, "max", &[RuntimeValue::int(64, a), RuntimeValue::int(64, b)]).unwrap();
        assert_eq!(out, vec![RuntimeValue::int(64, a.max(b))]);
    }
}

#[test]
fn cmpi_truth_table() {
    let registry = default_registry();
    type Oracle = fn(i64, i64) -> bool;
    let preds: [(&str, Oracle); 6] = [
        ("eq", |a, b| a == b),
        ("ne", |a, b| a != b),
        ("slt", |a, b| a < b),
        ("sle", |a, b| a <= b),
        ("sgt", |a, b| a > b),
        ("sge", |a, b| a >= b),
    ];
    for (pred, oracle) in preds {
        let mut m = IrModule::new();
        let region = m.new_region();
        let entry = m.append_block(region, &[IrType::i64(), IrType::i64()]);
        let args = m.block(entry).arguments.clone();
        m.set_insertion_block(entry);
        let d = registry.dialects();
        let cmp = d
            .build_op(&mut m, OperationState::new("arith.cmpi").operands(args).attr("predicate", IrAttribute::string(pred)))
            .unwrap();
        let r = m.result(cmp, 0).unwrap();
        d.build_op(&mut m, OperationState::new("func.return").operands([r])).unwrap();
        let body = m.body_block();
        m.set_insertion_block(body);
        d.build_op(
            &mut m,
            OperationState::new("func.func")
                .attr("sym_name", IrAttribute::string("cmp"))
                .attr("function_type", IrAttribute::Type(IrType::Function { inputs: vec![IrType::i64(); 2], results: vec![IrType::i1()] }))
                .region(region),
        )
        .unwrap();
        for a in -2..=2 {
            for b in -2..=2 {
                let out = run_function(&m, "cmp", &[RuntimeValue::int(64, a), RuntimeValue::int(64, b)]).unwrap();
                assert_eq!(out, vec![RuntimeValue::bool(oracle(a, b))], "{pred} {a} {b}");
            }
        }
    }
}

#[test]
fn vadd_kernel() {
    let types = vec![FrontendType::memref(FrontendType::f32(), 1); 3];
    let m = build(common::VADD, "vadd", &types);
    let a: Vec<f32> = (1..=8).map(|x| x as f32).collect();
    let b: Vec<f32> = (1..=8).map(|x| 10.0 * x as f32).collect();
    let inputs = [mem(&a), mem(&b), mem(&[0.0; 8])];
    let launch = LaunchConfig::new([2, 1, 1], [4, 1, 1]);
    let fwd = run_kernel(&m, "vadd", launch, &inputs).unwrap();
    let expected: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y) as f64).collect();
    assert_eq!(floats(&fwd[2]), expected);
    let rev = Interpreter::new(&m).run_kernel("vadd", launch, &inputs, ThreadOrder::Reverse).unwrap();
    assert_eq!(fwd, rev);

    let err = run_kernel(&m, "vadd", LaunchConfig::new([3, 1, 1], [4, 1, 1]), &inputs).unwrap_err();
    let InterpError::OutOfBounds { index, coord: Some(c), .. } = err else { panic!("{err}") };
    assert_eq!(index, vec![8]);
    assert_eq!((c.block, c.thread), ([2, 0, 0], [0, 0, 0]));

    let err = run_function(&m, "vadd", &inputs).unwrap_err();
    assert!(err.to_string().contains("missing launch config"));
}

#[test]
fn matmul_against_loops() {
    let registry = default_registry();
    let spec = parse_einsum("(i,k),(k,j)->(i,j)").unwrap();
    let m = generate_einsum(&registry, &spec, FrontendType::f32()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a: Vec<f32> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b: Vec<f32> = (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let t = |dims: Vec<usize>, d: &[f32]| RuntimeValue::Tensor(Buffer::new(IrType::Float32, dims, d.iter().map(|&x| RuntimeValue::F32(x)).collect()));
    let out = run_function(&m, "einsum", &[t(vec![4, 3], &a), t(vec![3, 5], &b), t(vec![4, 5], &[0.0; 20])]).unwrap();
    let got = floats(&out[0]);
    for i in 0..4 {
        for j in 0..5 {
            let want: f64 = (0..3).map(|k| a[i * 3 + k] as f64 * b[k * 5 + j] as f64).sum();
            let g = got[i * 5 + j];
            assert!((g - want).abs() <= 1e-5 * want.abs().max(1.0), "{g} vs {want}");
        }
    }
}

#[test]
fn inconsistent_extents() {
    let registry = default_registry();
    let m = generate_einsum(&registry, &parse_einsum("(i)->(i)").unwrap(), FrontendType::f64()).unwrap();
    let t = |n: usize| RuntimeValue::Tensor(Buffer::zeros(IrType::Float64, vec![n]));
    let err = run_function(&m, "einsum", &[t(3), t(4)]).unwrap_err();
    assert!(matches!(err, InterpError::InconsistentExtents { .. }), "{err}");
}

#[test]
fn step_limit() {
    let m = build("fn spin(_1: i64)\n1:\n  goto #2\n2:\n  goto #2\n", "spin", &[FrontendType::i64()]);
    let err = Interpreter::new(&m).with_step_limit(1000).run_function("spin", &[RuntimeValue::int(64, 0)]).unwrap_err();
    assert_eq!(err, InterpError::StepLimit(1000));
}

#[test]
fn call_to_unknown_symbol() {
    let registry = {
        let mut r = standard_registry();
        r.register_intrinsic(IntrinsicSignature::new("call_g", vec![]), |ctx, _| {
            ctx.build_values(
                OperationState::new("func.call").attr("callee", IrAttribute::Symbol("missing".into())).results([IrType::i64()]),
            )
        })
        .unwrap();
        r
    };
    let p = parse_program("fn f()\n1:\n  %1 = invoke call_g() :: i64\n  return %1\n").unwrap();
    let m = bridgegen_core::generate(&registry, &p.functions["f"], &[]).unwrap();
    let err = run_function(&m, "f", &[]).unwrap_err();
    assert!(matches!(err, InterpError::UnknownSymbol(_)), "{err}");
}
