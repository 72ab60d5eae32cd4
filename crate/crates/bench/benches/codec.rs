use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hqc_rmrs::params::{scheme, HQC_RMRS_128};
use hqc_rmrs::ring::sample_fixed_weight;
use hqc_rmrs::rng::{stream, Domain};
use hqc_rmrs::{ConcatCode, Gf256, RingElement, RmCode, RsCode};

fn ring(c: &mut Criterion) {
    let n = scheme(HQC_RMRS_128).unwrap().n;
    let mut rng = stream(1, Domain::PublicElement, 0);
    let a = RingElement::random(n, &mut rng);
    let b = RingElement::random(n, &mut rng);
    let s = sample_fixed_weight(n, 67, &mut rng).unwrap();
    c.bench_function("ring/cyclic_mul", |bench| {
        bench.iter(|| black_box(&a).cyclic_mul(&b).unwrap())
    });
    c.bench_function("ring/mul_sparse_w67", |bench| {
        bench.iter(|| black_box(&a).mul_sparse(&s).unwrap())
    });
}

fn codes(c: &mut Criterion) {
    let rm = RmCode::new(2).unwrap();
    let mut noisy = rm.encode(0x5a);
    for i in (0..noisy.len()).step_by(5) {
        noisy.flip(i);
    }
    let mut rng = stream(2, Domain::Decoding, 0);
    c.bench_function("rm/decode_m2", |bench| {
        bench.iter(|| rm.decode(black_box(&noisy), &mut rng).unwrap())
    });

    let rs = RsCode::with_length(80).unwrap();
    let msg: Vec<Gf256> = (0..32u8).map(Gf256).collect();
    let mut word = rs.encode(&msg).unwrap();
    for i in 0..rs.correction_capacity() {
        word[3 * i] += Gf256(0x33);
    }
    c.bench_function("rs/decode_80_full_errors", |bench| {
        bench.iter(|| rs.decode(black_box(&word)).unwrap())
    });

    let code = ConcatCode::new(rs, rm).unwrap();
    let message = [7u8; 32];
    let mut received = code.encode(&message);
    for i in (0..received.len()).step_by(4) {
        received.flip(i);
    }
    c.bench_function("concat/decode_80x256", |bench| {
        bench.iter(|| code.decode(black_box(&received), &mut rng))
    });
}

criterion_group!(benches, ring, codes);
criterion_main!(benches);
