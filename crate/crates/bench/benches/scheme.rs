use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hqc_rmrs::params::{scheme, HQC_RMRS_128, HQC_RMRS_192, HQC_RMRS_256};
use hqc_rmrs::rng::{stream, Domain};
use hqc_rmrs::Hqc;

fn scheme_ops(c: &mut Criterion) {
    for id in [HQC_RMRS_128, HQC_RMRS_192, HQC_RMRS_256] {
        let hqc = Hqc::new(scheme(id).unwrap());
        let keys = hqc.keygen_seeded(1);
        let message = [0x42u8; 32];
        let mut rng = stream(1, Domain::Encryption, 0);
        let ct = hqc.encrypt(&keys.pk, &message, &mut rng).unwrap();
        c.bench_function(&format!("{id}/keygen"), |b| {
            b.iter(|| hqc.keygen_seeded(black_box(2)))
        });
        c.bench_function(&format!("{id}/encrypt"), |b| {
            b.iter(|| {
                hqc.encrypt(&keys.pk, black_box(&message), &mut rng)
                    .unwrap()
            })
        });
        let mut dec = stream(1, Domain::Decoding, 0);
        c.bench_function(&format!("{id}/decrypt"), |b| {
            b.iter(|| hqc.decrypt(&keys.sk, black_box(&ct), &mut dec).unwrap())
        });
    }
}

criterion_group!(benches, scheme_ops);
criterion_main!(benches);
