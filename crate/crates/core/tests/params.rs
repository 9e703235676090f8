use pmcode_core::{MbrParams, MsrParams};

fn sweep() -> impl Iterator<Item = (usize, usize, usize, usize, usize, usize)> {
    (2..=10usize).flat_map(|n| {
        (1..=5usize.min(n - 1)).flat_map(move |k| {
            (k..n).flat_map(move |d| {
                (1..=2usize).flat_map(move |beta| {
                    (0..k).flat_map(move |ell| (0..=ell).map(move |m| (n, k, d, beta, ell, m)))
                })
            })
        })
    })
}

#[test]
fn mbr_identities() {
    let mut count = 0;
    for (n, k, d, beta, ell, m) in sweep() {
        let p = MbrParams::derive(n, k, d, beta, ell, m).unwrap();
        assert_eq!(p.alpha, d * beta);
        // cut-set sum with alpha = d beta
        let cut: usize = (0..k).map(|i| (d - i) * beta).sum();
        assert_eq!(p.b, cut);
        let secure: usize = (ell..k).map(|i| (d - i) * beta).sum();
        assert_eq!(p.b_star, secure);
        assert_eq!(p.b_star + p.r, p.b);
        assert_eq!(p.r, (ell * d - ell * ell.saturating_sub(1) / 2) * beta);
        count += 1;
    }
    assert!(count > 500);
}

#[test]
fn msr_identities() {
    let mut count = 0;
    for (n, k, d, beta, ell, m) in sweep() {
        let Ok(p) = MsrParams::derive(n, k, d, beta, ell, m) else {
            assert!(k < 2 || d + 2 < 2 * k);
            continue;
        };
        assert_eq!(p.alpha, (d - k + 1) * beta);
        assert_eq!(p.b, k * p.alpha);
        let cut: usize = (0..k).map(|i| p.alpha.min((d - i) * beta)).sum();
        assert_eq!(p.b, cut);
        assert_eq!(p.b_star, (k - ell) * (p.alpha - m * beta));
        assert_eq!(p.b_star + p.r, p.b);
        assert_eq!(p.base_d(), 2 * p.unit_alpha());
        assert_eq!(p.base_k(), p.unit_alpha() + 1);
        count += 1;
    }
    assert!(count > 100);
}

#[test]
fn reference_values() {
    let p = MbrParams::derive(5, 2, 2, 1, 0, 0).unwrap();
    assert_eq!(p.b, 3);
    let p = MbrParams::derive(3, 2, 2, 1, 1, 1).unwrap();
    assert_eq!((p.b_star, p.r), (1, 2));
    let p = MsrParams::derive(7, 3, 4, 1, 0, 0).unwrap();
    assert_eq!(p.b, 6);
    let p = MsrParams::derive(7, 3, 4, 1, 1, 0).unwrap();
    assert_eq!((p.b_star, p.r), (4, 2));
}
