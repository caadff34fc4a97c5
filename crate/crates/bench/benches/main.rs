use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use blochecho::{
    build_cnot_echo, build_random_echo, haar_u4, kak_decompose, kak_to_circuit, load_noise_model,
    run_tomography, GateTimes, InputState, MeasureMode, RngStream,
};
use blochecho_bench::haar_batch;

fn bench_haar_sampling(c: &mut Criterion) {
    let mut rng = RngStream::new(1);
    c.bench_function("haar_u4", |b| b.iter(|| haar_u4(&mut rng)));
}

fn bench_kak(c: &mut Criterion) {
    let batch = haar_batch(256, 2);
    let mut idx = 0usize;
    c.bench_function("kak_decompose", |b| {
        b.iter(|| {
            idx = (idx + 1) % batch.len();
            kak_decompose(&batch[idx]).unwrap()
        })
    });

    let decomposed: Vec<_> = batch.iter().map(|u| kak_decompose(u).unwrap()).collect();
    let mut jdx = 0usize;
    c.bench_function("kak_to_circuit", |b| {
        b.iter(|| {
            jdx = (jdx + 1) % decomposed.len();
            kak_to_circuit(&decomposed[jdx])
        })
    });
}

fn bench_simulation(c: &mut Criterion) {
    let model = load_noise_model(format!(
        "{}/../../configs/coherent.toml",
        env!("CARGO_MANIFEST_DIR")
    ))
    .expect("shipped config parses");
    let circuit = build_cnot_echo(10, model.gate_times());
    let input = InputState::PlusX.two_qubit_density();
    c.bench_function("simulate_cnot_echo_10_steps_noisy", |b| {
        b.iter(|| blochecho::simulate(&circuit, &input, Some(&model)))
    });

    let rng = RngStream::new(3);
    c.bench_function("build_random_echo_3_steps", |b| {
        b.iter_batched(
            || rng.clone(),
            |r| build_random_echo(3, &r, GateTimes::default()),
            BatchSize::SmallInput,
        )
    });

    c.bench_function("tomography_exact_cnot_echo_10_steps", |b| {
        b.iter(|| run_tomography(&circuit, Some(&model), MeasureMode::Exact, 1, &rng))
    });
}

criterion_group!(benches, bench_haar_sampling, bench_kak, bench_simulation);
criterion_main!(benches);
