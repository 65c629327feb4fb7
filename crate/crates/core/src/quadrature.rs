//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands,
//! plus a fixed five-point Gauss–Legendre rule used by the form evaluators.

#![allow(clippy::excessive_precision)]

/// Abscissae of the 15-point Kronrod rule on `[-1, 1]` (nonnegative half).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Weights of the embedded 7-point Gauss rule (at XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Five-point Gauss–Legendre rule on `[-1, 1]`, exact for degree ≤ 9.
pub const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
pub const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadTolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_intervals: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        QuadTolerance {
            relative: 1e-12,
            absolute: 0.0,
            max_intervals: 400,
        }
    }
}

impl QuadTolerance {
    pub fn relative(relative: f64) -> Self {
        QuadTolerance {
            relative,
            ..Default::default()
        }
    }
}

/// Converged integral with its error estimate (componentwise).
#[derive(Clone, Copy, Debug)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub intervals: usize,
}

/// Failure carries the best estimate reached.
#[derive(Clone, Copy, Debug)]
pub struct NotConverged<const N: usize> {
    pub best: Integral<N>,
}

impl<const N: usize> NotConverged<N> {
    pub fn max_error(&self) -> f64 {
        self.best.error.iter().cloned().fold(0.0, f64::max)
    }
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

fn kronrod<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> Segment<N> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = [0.0; N];
    let mut kron = [0.0; N];
    for k in 0..N {
        gauss[k] = WG[3] * fc[k];
        kron[k] = WGK[7] * fc[k];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..N {
            let sum = f1[k] + f2[k];
            kron[k] += WGK[j] * sum;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * sum;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for k in 0..N {
        value[k] = kron[k] * half;
        error[k] = ((kron[k] - gauss[k]) * half).abs();
    }
    Segment { a, b, value, error }
}

fn totals<const N: usize>(segments: &[Segment<N>]) -> ([f64; N], [f64; N]) {
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for s in segments {
        for k in 0..N {
            value[k] += s.value[k];
            error[k] += s.error[k];
        }
    }
    (value, error)
}

/// Globally adaptive integration of a vector-valued `f` over `[a, b]`.
///
/// Each component must satisfy `error ≤ max(absolute, relative·|value|)`.
/// The interval with the worst normalised error is bisected until then.
pub fn integrate_vec<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    tol: QuadTolerance,
) -> Result<Integral<N>, NotConverged<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut segments = vec![kronrod(&mut f, a, b)];
    loop {
        let (value, error) = totals(&segments);
        let limit = |k: usize| tol.absolute.max(tol.relative * value[k].abs());
        let converged = (0..N).all(|k| error[k] <= limit(k) || error[k] == 0.0);
        let result = Integral {
            value,
            error,
            intervals: segments.len(),
        };
        if converged {
            return Ok(result);
        }
        if segments.len() >= tol.max_intervals {
            return Err(NotConverged { best: result });
        }
        let score = |s: &Segment<N>| {
            (0..N)
                .map(|k| s.error[k] / limit(k).max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        };
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| score(x.1).total_cmp(&score(y.1)))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(NotConverged { best: result });
        }
        segments.push(kronrod(&mut f, seg.a, mid));
        segments.push(kronrod(&mut f, mid, seg.b));
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: QuadTolerance,
) -> Result<Integral<1>, NotConverged<1>> {
    integrate_vec(|x| [f(x)], a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_interval_length() {
        let kron: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let gauss: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert_relative_eq!(kron, 2.0, max_relative = 1e-15);
        assert_relative_eq!(gauss, 2.0, max_relative = 1e-15);
        assert_relative_eq!(GL5_WEIGHTS.iter().sum::<f64>(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn gl5_is_exact_to_degree_nine() {
        for p in 0..=9 {
            let approx: f64 = GL5_NODES
                .iter()
                .zip(GL5_WEIGHTS)
                .map(|(x, w)| w * x.powi(p))
                .sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((approx - exact).abs() < 1e-15, "degree {p}");
        }
    }

    #[test]
    fn single_pass_for_polynomials() {
        let r = integrate(|x| x.powi(20) - 3.0 * x.powi(7), -1.0, 2.0, QuadTolerance::default()).unwrap();
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert_relative_eq!(r.value[0], exact, max_relative = 1e-13);
    }

    #[test]
    fn endpoint_singularity_is_resolved() {
        // ∫₀¹ x^{-1/2} dx = 2
        let r = integrate(|x| x.powf(-0.5), 0.0, 1.0, QuadTolerance {
            relative: 1e-10,
            absolute: 0.0,
            max_intervals: 2000,
        })
        .unwrap();
        assert_relative_eq!(r.value[0], 2.0, max_relative = 1e-9);
    }

    #[test]
    fn vector_components_converge_independently() {
        let r = integrate_vec(|x: f64| [x.exp(), 1e-20 * x.sin()], 0.0, 3.0, QuadTolerance::default()).unwrap();
        assert_relative_eq!(r.value[0], 3f64.exp() - 1.0, max_relative = 1e-13);
        assert_relative_eq!(r.value[1], 1e-20 * (1.0 - 3f64.cos()), max_relative = 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let tol = QuadTolerance {
            relative: 1e-14,
            absolute: 0.0,
            max_intervals: 3,
        };
        assert!(integrate(|x| (1.0 / x).sin(), 1e-3, 1.0, tol).is_err());
    }
}
