use pmcode_core::{CodeSpec, Fe, Regime, RegeneratingCode, Share};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec_strategy() -> impl Strategy<Value = CodeSpec> {
    (any::<bool>(), 3usize..9, 1usize..5, 0usize..4, 1usize..3, 0usize..3, 0usize..3).prop_filter_map(
        "invalid parameters",
        |(msr, n, k, extra, beta, ell, m)| {
            let d = k + extra;
            let regime = if msr { Regime::Msr } else { Regime::Mbr };
            let spec = CodeSpec::new(regime, n, k, d, 257).with_beta(beta).secure(ell, m);
            spec.build().ok().map(|_| spec)
        },
    )
}

fn corrupt(share: &mut Share, rng: &mut ChaCha8Rng, q: u64) {
    let s = rng.gen_range(0..share.stripes.len());
    let j = rng.gen_range(0..share.stripes[s].len());
    let f = share.stripes[s][j].field();
    share.stripes[s][j] += f.elem(rng.gen_range(1..q));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fail_repair_read(spec in spec_strategy(), seed in any::<u64>()) {
        let code = spec.build().unwrap();
        let field = code.field();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msg: Vec<Fe> = (0..code.message_unit() * 2).map(|_| field.elem(rng.gen_range(0..257))).collect();
        let mut shares = code.encode(&msg, &mut rng).unwrap();
        let original = shares.clone();
        let (n, k, d) = (code.n(), code.k(), code.d());

        for _ in 0..3 {
            let failed = rng.gen_range(1..=n);
            let p = if d + 2 < n { 1 } else { 0 };
            let others: Vec<usize> = (1..=n).filter(|&x| x != failed).collect();
            let idx = rand::seq::index::sample(&mut rng, others.len(), d + 2 * p);
            let mut chosen: Vec<usize> = idx.into_iter().map(|i| others[i]).collect();
            chosen.sort();
            let hs: Vec<&Share> = chosen.iter().map(|&h| &shares[h - 1]).collect();
            let mut data = code.helper_data(&hs, failed).unwrap();
            if p == 1 {
                let b = rng.gen_range(0..data.len());
                let s = rng.gen_range(0..data[b].symbols.len());
                data[b].symbols[s] += field.elem(rng.gen_range(1..257));
            }
            shares[failed - 1] = code.repair(failed, &data, p).unwrap();
        }
        prop_assert_eq!(&shares, &original);

        let p = if k + 2 <= n { 1 } else { 0 };
        let idx = rand::seq::index::sample(&mut rng, n, k + 2 * p);
        let mut readers: Vec<Share> = idx.into_iter().map(|i| shares[i].clone()).collect();
        if p == 1 {
            corrupt(&mut readers[0], &mut rng, 257);
        }
        prop_assert_eq!(code.reconstruct(&readers, p).unwrap(), msg);
    }

    #[test]
    fn short_messages_rejected(spec in spec_strategy(), extra in 1usize..4) {
        let code = spec.build().unwrap();
        let unit = code.message_unit();
        let msg = code.field().elems(&vec![1; unit + extra]);
        if msg.len() % unit != 0 {
            prop_assert!(code.encode(&msg, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        }
    }
}

#[test]
fn too_few_shares() {
    let code = CodeSpec::new(Regime::Mbr, 5, 3, 4, 13).build().unwrap();
    let msg = code.field().elems(&[1; 9]);
    let shares = code.encode_with(&msg, &[]).unwrap();
    assert!(code.reconstruct(&shares[..2], 0).is_err());
    assert!(code.reconstruct(&shares[..4], 1).is_err());
    assert_eq!(code.reconstruct(&shares[..3], 0).unwrap(), msg);
}
