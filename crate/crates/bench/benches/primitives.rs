use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use evfc_core::packing::{pack, CleartextVector};
use evfc_core::pipeline::{camera_encrypt, offline_setup, rotation_steps, server_evaluate};
use evfc_core::ring::{ChainKind, RingPoly};
use evfc_core::rng::{seeded, Stream};
use evfc_core::scheme::{
    add, cmult, decrypt, encrypt, keygen, pmult, rotate, Preset, SchemeParams,
};
use evfc_core::vision::synthesize_image;

fn bench_primitives(c: &mut Criterion) {
    let params = SchemeParams::preset(Preset::Desk).unwrap();
    let keys = keygen(&params, rotation_steps(500), &mut seeded(1, Stream::KeyGen));
    let mut rng = seeded(2, Stream::Camera);
    let ring = params.ring();

    let mut group = c.benchmark_group("desk");
    group.sample_size(10);

    group.bench_function("ntt_forward", |b| {
        let poly =
            RingPoly::from_centered_coeffs(ring, ChainKind::Cipher, &vec![1i64; ring.degree()]);
        b.iter_batched(
            || poly.clone(),
            |mut p| {
                p.to_ntt();
                p
            },
            BatchSize::SmallInput,
        );
    });

    let x = CleartextVector::from_prefix(ring, &[3, 1, 4, 1, 5]).unwrap();
    let pt = pack(ring, &x).unwrap();
    let ct = encrypt(&params, &keys.public, &pt, &mut rng).unwrap();

    group.bench_function("encrypt", |b| {
        b.iter(|| encrypt(&params, &keys.public, &pt, &mut rng).unwrap());
    });
    group.bench_function("decrypt", |b| {
        b.iter(|| decrypt(&keys.secret, &ct).unwrap());
    });
    group.bench_function("add", |b| {
        b.iter(|| add(&ct, &ct).unwrap());
    });
    group.bench_function("pmult", |b| {
        b.iter(|| pmult(&pt, &ct).unwrap());
    });
    group.bench_function("rotate", |b| {
        b.iter(|| rotate(&ct, 16, &keys.galois).unwrap());
    });
    group.bench_function("cmult", |b| {
        b.iter(|| cmult(&ct, &ct, &keys.relin).unwrap());
    });

    let bundle = offline_setup(
        &params,
        &keys.public,
        0.8,
        (1u64 << 20) as f64,
        500,
        &mut seeded(3, Stream::Offline),
    )
    .unwrap();
    let img = synthesize_image(30.0, 500, 3, 10, 0).unwrap();
    let frame = camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
    group.bench_function("server_evaluate_n500", |b| {
        b.iter(|| server_evaluate(&bundle, &frame, &keys.galois, &keys.relin).unwrap());
    });

    group.finish();
}

criterion_group!(benches, bench_primitives);
criterion_main!(benches);
