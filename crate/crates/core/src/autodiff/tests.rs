use super::*;
use crate::numkit;

fn central_difference(f: impl Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    (0..at.len())
        .map(|i| {
            let mut hi = at.to_vec();
            let mut lo = at.to_vec();
            hi[i] += h;
            lo[i] -= h;
            (f(&hi) - f(&lo)) / (2.0 * h)
        })
        .collect()
}

fn assert_close(a: f64, b: f64, rel: f64) {
    let scale = a.abs().max(b.abs()).max(1e-2);
    assert!((a - b).abs() <= rel * scale, "{a} vs {b}");
}

const ROWS: [(u8, f64); 10] = [
    (1, 0.0),
    (0, 1.0),
    (1, 1.0),
    (1, 0.0),
    (0, 0.0),
    (0, 1.0),
    (1, 1.0),
    (0, 0.0),
    (1, 1.0),
    (0, 1.0),
];

#[test]
fn identity_and_product() {
    let (v, g) = grad(|_, x| x[0], &[3.7]).unwrap();
    assert_eq!((v, g), (3.7, vec![1.0]));
    let (v, g) = grad(|_, x| x[0] * x[1], &[2.0, 3.0]).unwrap();
    assert_eq!((v, g), (6.0, vec![3.0, 2.0]));
}

#[test]
fn logistic_likelihood_matches_finite_differences() {
    let at = [0.2, -0.5];
    let (value, g) = grad(
        |tape, b| {
            let terms: Vec<Var> = ROWS
                .iter()
                .map(|&(y, l)| tape.bernoulli_lpmf(y, (b[0] + b[1] * l).expit()))
                .collect();
            tape.sum(&terms)
        },
        &at,
    )
    .unwrap();
    let plain = |b: &[f64]| -> f64 {
        ROWS.iter()
            .map(|&(y, l)| {
                let p = 1.0 / (1.0 + (-(b[0] + b[1] * l)).exp());
                if y == 1 {
                    p.ln()
                } else {
                    (1.0 - p).ln()
                }
            })
            .sum()
    };
    assert!((value - plain(&at)).abs() < 1e-12);
    let fd = central_difference(plain, &at, 1e-5);
    for (a, b) in g.iter().zip(&fd) {
        assert_close(*a, *b, 1e-6);
    }
}

#[test]
fn primitive_partials() {
    let x = 0.37;
    let d = local_partials(OpKind::Expit, &[x]).unwrap();
    let s = numkit::expit(x);
    assert!((d[0] - s * (1.0 - s)).abs() < 1e-16);

    let w = local_partials(OpKind::LogSumExp, &[0.3, -1.2]).unwrap();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let e = (0.3f64.exp(), (-1.2f64).exp());
    assert!((w[0] - e.0 / (e.0 + e.1)).abs() < 1e-15);

    let d = local_partials(OpKind::NormalLpdf, &[1.0, 0.0, 1.0]).unwrap();
    let fd = central_difference(|m| numkit::normal_lpdf(1.0, m[0], 1.0).unwrap(), &[0.0], 1e-5);
    assert!((d[1] - 1.0).abs() < 1e-12);
    assert!((fd[0] - 1.0).abs() < 1e-8);

    assert!(local_partials(OpKind::Add, &[1.0]).is_err());
    assert!(local_partials(OpKind::LogSumExp, &[]).is_err());
}

#[test]
fn kernel_partials_match_finite_differences() {
    type Kernel = fn(&[f64]) -> f64;
    let cases: Vec<(OpKind, Vec<f64>, Kernel)> = vec![
        (OpKind::NormalLpdf, vec![0.4, -0.3, 1.7], |x| {
            numkit::normal_lpdf(x[0], x[1], x[2]).unwrap()
        }),
        (OpKind::BetaLpdf, vec![0.3, 1.4, 2.2], |x| {
            numkit::beta_lpdf(x[0], x[1], x[2]).unwrap()
        }),
        (OpKind::GammaLpdf, vec![1.3, 2.0, 0.7], |x| {
            numkit::gamma_lpdf(x[0], x[1], x[2]).unwrap()
        }),
        (OpKind::HalfNormalLpdf, vec![0.8, 2.0], |x| {
            numkit::half_normal_lpdf(x[0], x[1]).unwrap()
        }),
        (OpKind::BernoulliLpmf { y: 0 }, vec![0.3], |x| {
            numkit::bernoulli_lpmf(0, x[0]).unwrap()
        }),
        (OpKind::BernoulliLogitLpmf { y: 1 }, vec![-0.9], |x| {
            numkit::bernoulli_logit_lpmf(1, x[0]).unwrap()
        }),
        (OpKind::LogExpit, vec![2.5], |x| numkit::log_expit(x[0])),
        (OpKind::Log1p, vec![0.25], |x| x[0].ln_1p()),
        (OpKind::Div, vec![1.5, -0.6], |x| x[0] / x[1]),
    ];
    for (kind, at, f) in cases {
        let d = local_partials(kind, &at).unwrap();
        let fd = central_difference(f, &at, 1e-6);
        for (a, b) in d.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{kind:?}: {a} vs {b}");
        }
    }
}

#[test]
fn recorded_partials_equal_primitive_partials() {
    let tape = Tape::new();
    let x = tape.input(0.3);
    let mu = tape.input(-0.2);
    let s = tape.input(1.4);
    let node = tape.normal_lpdf(x, mu, s);
    let (op, parents, partials) = tape.node(node.id()).unwrap();
    assert_eq!(op, OpKind::NormalLpdf);
    assert_eq!(parents, vec![0, 1, 2]);
    assert_eq!(partials, local_partials(op, &[0.3, -0.2, 1.4]).unwrap());
    // Constant operands get no edge.
    let k = tape.normal_lpdf(0.3, mu, 1.4);
    let (_, parents, partials) = tape.node(k.id()).unwrap();
    assert_eq!(parents, vec![1]);
    assert_eq!(partials, vec![local_partials(OpKind::NormalLpdf, &[0.3, -0.2, 1.4]).unwrap()[1]]);
}

#[test]
fn parents_precede_children() {
    let tape = Tape::new();
    let a = tape.input(1.0);
    let b = tape.input(2.0);
    let c = (a * b).exp() + a.square() - b / a;
    for id in 0..=c.id() {
        let (_, parents, _) = tape.node(id).unwrap();
        assert!(parents.iter().all(|&p| p < id));
    }
}

#[test]
fn domain_error_names_the_node() {
    let err = grad(|_, x| (x[0] - 5.0).ln(), &[1.0]).unwrap_err();
    match err {
        AdError::Domain { node, op, .. } => {
            assert_eq!(op, OpKind::Log);
            assert_eq!(node, 2);
        }
        other => panic!("unexpected {other:?}"),
    }
    let err = grad(|t, x| t.normal_lpdf(0.0, x[0], x[1]), &[0.0, -1.0]).unwrap_err();
    assert!(matches!(err, AdError::Domain { op: OpKind::NormalLpdf, .. }));
}

#[test]
fn log_sum_exp_primitive_is_stable() {
    let (v, g) = grad(|t, x| t.log_sum_exp(x), &[1000.0, 1000.0]).unwrap();
    assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
    assert_eq!(g, vec![0.5, 0.5]);
    let (v, g) = grad(|t, x| t.log_sum_exp(x), &[-1e4, 0.0]).unwrap();
    assert!(v.abs() < 1e-300);
    assert_eq!(g[1], 1.0);
}

#[test]
fn gradient_is_linear_and_deterministic() {
    let at = [0.3, -1.1, 0.7];
    let g = |at: &[f64]| {
        grad(
            |t, x| {
                let a = (x[0] * x[1]).expit().ln();
                let b = t.normal_lpdf(x[2], x[0], 1.3);
                a + b
            },
            at,
        )
        .unwrap()
    };
    let ga = grad(|_, x| (x[0] * x[1]).expit().ln(), &at).unwrap().1;
    let gb = grad(|t, x| t.normal_lpdf(x[2], x[0], 1.3), &at).unwrap().1;
    let (_, total) = g(&at);
    for i in 0..3 {
        assert!((total[i] - (ga[i] + gb[i])).abs() < 1e-14);
    }
    let (v1, g1) = g(&at);
    let (v2, g2) = g(&at);
    assert_eq!(v1.to_bits(), v2.to_bits());
    assert!(g1.iter().zip(&g2).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn mixed_constant_arithmetic() {
    let (v, g) = grad(|_, x| 2.0 - 3.0 * x[0] + x[0] / 4.0 + 1.0 / x[0], &[2.0]).unwrap();
    assert!((v - (2.0 - 6.0 + 0.5 + 0.5)).abs() < 1e-15);
    assert!((g[0] - (-3.0 + 0.25 - 0.25)).abs() < 1e-15);
}
