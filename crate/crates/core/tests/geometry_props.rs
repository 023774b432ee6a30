//! Property tests pitting the calculus layer against independent
//! brute-force oracles: naive component formulas, full-permutation
//! antisymmetrization, and full-index contraction. Coefficients stay in
//! [-1, 1] and points in [-0.9, 0.9] so difference quotients are well
//! scaled everywhere.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use nonoether_core::calculus::{
    exterior_derivative, lie_bracket, lie_derivative_form, FormField, FormFieldFn,
};
use nonoether_core::hamiltonian::FnMatrixField;
use nonoether_core::tensor::AntisymTensor;
use nonoether_core::{
    DomainBox, FdConfig, FormSample, HamiltonianSystem, PhasePoint, ScalarFieldFn,
    SymplecticStructure, VectorField, VectorFieldFn,
};

const DIM: usize = 4;

/// Coefficients per quadratic component: constant, linear, squares.
const COMP_LEN: usize = 1 + 2 * DIM;

/// Coefficients for a full quadratic in two variables.
const COMP_LEN_2D: usize = 6;

/// Quadratic components: enough curvature that nothing differentiates to
/// zero by accident, low enough degree that central differences are
/// nearly exact and the oracle comparison is sharp.
fn poly_component(c: &[f64], x: &PhasePoint) -> f64 {
    let mut v = c[0];
    for j in 0..DIM {
        v += c[1 + j] * x[j] + c[1 + DIM + j] * x[j] * x[j];
    }
    v
}

fn coeff_vec(count: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, count * COMP_LEN)
}

fn interior_point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.9..0.9f64, DIM)
}

fn one_form(coeffs: Vec<f64>) -> impl FormField {
    FormFieldFn::new(DIM, 1, move |x: &PhasePoint| {
        let mut f = FormSample::zero(DIM, 1).unwrap();
        for i in 0..DIM {
            f.set_component(&[i], poly_component(&coeffs[i * COMP_LEN..], x)).unwrap();
        }
        f
    })
}

fn two_form(coeffs: Vec<f64>) -> impl FormField {
    FormFieldFn::new(DIM, 2, move |x: &PhasePoint| {
        let mut f = FormSample::zero(DIM, 2).unwrap();
        let mut c = 0;
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                f.set_component(&[i, j], poly_component(&coeffs[c * COMP_LEN..], x)).unwrap();
                c += 1;
            }
        }
        f
    })
}

fn vector_field(coeffs: Vec<f64>) -> VectorFieldFn<impl Fn(&PhasePoint) -> DVector<f64> + Sync> {
    VectorFieldFn::new(DIM, move |x: &PhasePoint| {
        DVector::from_iterator(DIM, (0..DIM).map(|i| poly_component(&coeffs[i * COMP_LEN..], x)))
    })
}

/// Central difference of a closure, independent of the library stencils.
fn cdiff(f: &dyn Fn(&PhasePoint) -> f64, x: &PhasePoint, i: usize) -> f64 {
    let h = 1e-5 * x[i].abs().max(1.0);
    (f(&x.shifted(i, h)) - f(&x.shifted(i, -h))) / (2.0 * h)
}

/// Visits every permutation of `0..k` with its parity sign.
fn for_each_permutation(k: usize, visit: &mut dyn FnMut(&[usize], f64)) {
    fn rec(
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        sign: f64,
        visit: &mut dyn FnMut(&[usize], f64),
    ) {
        if perm.len() == used.len() {
            visit(perm, sign);
            return;
        }
        for i in 0..used.len() {
            if used[i] {
                continue;
            }
            // Choosing i next introduces one inversion per smaller unused
            // element it jumps over; parity flips per inversion.
            let inversions = (0..i).filter(|&j| !used[j]).count();
            let s = if inversions % 2 == 0 { sign } else { -sign };
            used[i] = true;
            perm.push(i);
            rec(perm, used, s, visit);
            perm.pop();
            used[i] = false;
        }
    }
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], 1.0, visit);
}

/// Advance `idx` to the next increasing tuple below `dim`; false at the end.
fn next_increasing(idx: &mut [usize], dim: usize) -> bool {
    let degree = idx.len();
    let mut k = degree;
    loop {
        if k == 0 {
            return false;
        }
        k -= 1;
        if idx[k] < dim - (degree - k) {
            idx[k] += 1;
            for j in (k + 1)..degree {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
}

/// Random antisymmetric tensor from one coefficient stream.
fn random_tensor(dim: usize, degree: usize, vals: &mut impl Iterator<Item = f64>) -> AntisymTensor {
    let mut t = AntisymTensor::zero(dim, degree).unwrap();
    let mut idx: Vec<usize> = (0..degree).collect();
    loop {
        t.set_component(&idx, vals.next().unwrap()).unwrap();
        if !next_increasing(&mut idx, dim) {
            return t;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn exterior_derivative_squares_to_zero(
        coeffs in coeff_vec(DIM),
        px in interior_point(),
    ) {
        let fd = FdConfig::default();
        let alpha = one_form(coeffs);
        let dalpha = FormFieldFn::with_depth(DIM, 2, 1, move |x: &PhasePoint| {
            exterior_derivative(&alpha, x, &fd).unwrap()
        });
        let x = PhasePoint::new(px).unwrap();
        let dd = exterior_derivative(&dalpha, &x, &fd).unwrap();
        prop_assert!(dd.norm_inf() <= 1e-6, "||d d alpha|| = {:.3e}", dd.norm_inf());
    }

    #[test]
    fn lie_derivative_of_one_form_matches_component_formula(
        ac in coeff_vec(DIM),
        xc in coeff_vec(DIM),
        px in interior_point(),
    ) {
        let fd = FdConfig::default();
        let alpha = one_form(ac.clone());
        let xf = vector_field(xc.clone());
        let x = PhasePoint::new(px).unwrap();

        let lie = lie_derivative_form(&xf, &alpha, &x, &fd).unwrap();

        // (L_X a)_i = X^k d_k a_i + a_k d_i X^k.
        for i in 0..DIM {
            let mut expect = 0.0;
            for k in 0..DIM {
                let ai = |p: &PhasePoint| poly_component(&ac[i * COMP_LEN..], p);
                let xk = |p: &PhasePoint| poly_component(&xc[k * COMP_LEN..], p);
                expect += xk(&x) * cdiff(&ai, &x, k)
                    + poly_component(&ac[k * COMP_LEN..], &x) * cdiff(&xk, &x, i);
            }
            let got = lie.component(&[i]);
            prop_assert!((got - expect).abs() <= 1e-6, "slot {i}: {got} vs {expect}");
        }
    }

    #[test]
    fn lie_derivative_of_two_form_matches_component_formula(
        ac in coeff_vec(DIM * (DIM - 1) / 2),
        xc in coeff_vec(DIM),
        px in interior_point(),
    ) {
        let fd = FdConfig::default();
        let omega = two_form(ac);
        let xf = vector_field(xc.clone());
        let x = PhasePoint::new(px).unwrap();

        let lie = lie_derivative_form(&xf, &omega, &x, &fd).unwrap();

        // (L_X w)_{ij} = X^k d_k w_{ij} + w_{kj} d_i X^k + w_{ik} d_j X^k.
        let w0 = omega.eval(&x);
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                let mut expect = 0.0;
                for k in 0..DIM {
                    let wij = |p: &PhasePoint| omega.eval(p).component(&[i, j]);
                    let xk = |p: &PhasePoint| poly_component(&xc[k * COMP_LEN..], p);
                    expect += poly_component(&xc[k * COMP_LEN..], &x) * cdiff(&wij, &x, k);
                    expect += w0.component(&[k, j]) * cdiff(&xk, &x, i);
                    expect += w0.component(&[i, k]) * cdiff(&xk, &x, j);
                }
                let got = lie.component(&[i, j]);
                prop_assert!((got - expect).abs() <= 1e-6, "slot ({i},{j}): {got} vs {expect}");
            }
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(
        xc in coeff_vec(DIM),
        yc in coeff_vec(DIM),
        zc in coeff_vec(DIM),
        px in interior_point(),
    ) {
        let fd = FdConfig::default();
        let xf = vector_field(xc);
        let yf = vector_field(yc);
        let zf = vector_field(zc);
        let x = PhasePoint::new(px).unwrap();

        let xy = lie_bracket(&xf, &yf, &x, &fd).unwrap();
        let yx = lie_bracket(&yf, &xf, &x, &fd).unwrap();
        prop_assert!((&xy + &yx).amax() <= 1e-12);

        fn nested(
            a: &dyn VectorField,
            b: &dyn VectorField,
            c: &dyn VectorField,
            x: &PhasePoint,
            fd: &FdConfig,
        ) -> DVector<f64> {
            let inner = VectorFieldFn::with_depth(DIM, 1, move |p: &PhasePoint| {
                lie_bracket(b, c, p, fd).unwrap()
            });
            lie_bracket(a, &inner, x, fd).unwrap()
        }
        let total = nested(&xf, &yf, &zf, &x, &fd)
            + nested(&yf, &zf, &xf, &x, &fd)
            + nested(&zf, &xf, &yf, &x, &fd);
        prop_assert!(total.amax() <= 1e-5, "jacobi defect {:.3e}", total.amax());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn wedge_matches_full_antisymmetrization(
        (p, q) in prop_oneof![Just((1usize, 2usize)), Just((2, 2)), Just((1, 3)), Just((2, 3))],
        vals in prop::collection::vec(-1.0..1.0f64, 64),
    ) {
        let dim = 5;
        let mut stream = vals.into_iter().cycle();
        let a = random_tensor(dim, p, &mut stream);
        let b = random_tensor(dim, q, &mut stream);
        let w = a.wedge(&b).unwrap();

        let pf: f64 = (1..=p).map(|i| i as f64).product();
        let qf: f64 = (1..=q).map(|i| i as f64).product();

        // (a ^ b)_T = 1/(p! q!) sum_{sigma} sign(sigma) a_{T sigma first p}
        // b_{T sigma rest}, checked on every increasing tuple T.
        let mut idx: Vec<usize> = (0..(p + q)).collect();
        loop {
            let mut total = 0.0;
            for_each_permutation(p + q, &mut |perm, sign| {
                let left: Vec<usize> = perm[..p].iter().map(|&s| idx[s]).collect();
                let right: Vec<usize> = perm[p..].iter().map(|&s| idx[s]).collect();
                total += sign * a.component(&left) * b.component(&right);
            });
            total /= pf * qf;
            let got = w.component(&idx);
            prop_assert!((got - total).abs() <= 1e-12, "{idx:?}: {got} vs {total}");
            if !next_increasing(&mut idx, dim) {
                break;
            }
        }
    }

    #[test]
    fn pairing_matches_full_contraction(
        degree in 1usize..=3,
        vals in prop::collection::vec(-1.0..1.0f64, 32),
    ) {
        let dim = 5;
        let mut stream = vals.into_iter().cycle();
        let alpha = random_tensor(dim, degree, &mut stream);
        let pv = random_tensor(dim, degree, &mut stream);

        // 1/p! sum over all index tuples, repeated indices included
        // (their components vanish anyway).
        let mut s = 0.0;
        let mut tuple = vec![0usize; degree];
        'sum: loop {
            s += alpha.component(&tuple) * pv.component(&tuple);
            let mut k = degree;
            loop {
                if k == 0 {
                    break 'sum;
                }
                k -= 1;
                if tuple[k] + 1 < dim {
                    tuple[k] += 1;
                    for t in tuple.iter_mut().skip(k + 1) {
                        *t = 0;
                    }
                    break;
                }
            }
        }
        let pfact: f64 = (1..=degree).map(|i| i as f64).product();
        let full = s / pfact;

        let got = alpha.pairing(&pv).unwrap();
        prop_assert!((got - full).abs() <= 1e-12, "{got} vs {full}");
    }

    #[test]
    fn interior_product_is_an_antiderivation(
        p in prop_oneof![Just(2usize), Just(3usize)],
        vals in prop::collection::vec(-1.0..1.0f64, 64),
        xv in prop::collection::vec(-1.0..1.0f64, 5),
    ) {
        let dim = 5;
        let mut stream = vals.into_iter().cycle();
        let a = random_tensor(dim, p, &mut stream);
        let b = random_tensor(dim, 2, &mut stream);
        let x = DVector::from_vec(xv);

        // i_X(a ^ b) = (i_X a) ^ b + (-1)^p a ^ (i_X b).
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = a.wedge(&b).unwrap().interior(&x).unwrap();
        let mut rhs = a.interior(&x).unwrap().wedge(&b).unwrap();
        rhs.add_scaled(&a.wedge(&b.interior(&x).unwrap()).unwrap(), sign).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12, "defect {:.3e}", lhs.max_abs_diff(&rhs));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn poisson_bracket_satisfies_leibniz_and_jacobi(
        fc in prop::collection::vec(-1.0..1.0f64, COMP_LEN_2D),
        gc in prop::collection::vec(-1.0..1.0f64, COMP_LEN_2D),
        hc in prop::collection::vec(-1.0..1.0f64, COMP_LEN_2D),
        px in prop::collection::vec(-0.9..0.9f64, 2),
    ) {
        // Structure scaled by (1 + q^2): still closed (top degree in two
        // dimensions), genuinely position dependent.
        let omega =
            SymplecticStructure::from_field(Box::new(FnMatrixField::new(2, |x: &PhasePoint| {
                let s = 1.0 + x[0] * x[0];
                DMatrix::from_row_slice(2, 2, &[0.0, s, -s, 0.0])
            })))
            .unwrap();
        let domain = DomainBox::new(vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let ham = |x: &PhasePoint| 0.5 * (x[0] * x[0] + x[1] * x[1]);
        let sys = HamiltonianSystem::new(1, omega, Box::new(ham), domain).unwrap();

        let quad = |c: Vec<f64>| {
            move |x: &PhasePoint| {
                c[0] + c[1] * x[0]
                    + c[2] * x[1]
                    + c[3] * x[0] * x[0]
                    + c[4] * x[0] * x[1]
                    + c[5] * x[1] * x[1]
            }
        };
        let f = quad(fc);
        let g = quad(gc);
        let k = quad(hc);
        let x = PhasePoint::new(px).unwrap();

        // Leibniz: {f, g k} = g {f, k} + k {f, g}.
        let gk = {
            let (g, k) = (&g, &k);
            move |p: &PhasePoint| g(p) * k(p)
        };
        let lhs = sys.poisson_bracket(&f, &gk, &x).unwrap();
        let rhs = g(&x) * sys.poisson_bracket(&f, &k, &x).unwrap()
            + k(&x) * sys.poisson_bracket(&f, &g, &x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");

        // Jacobi: {f,{g,k}} + {g,{k,f}} + {k,{f,g}} = 0; relies on the
        // structure being closed.
        let gk_br = ScalarFieldFn::with_depth(1, |p: &PhasePoint| {
            sys.poisson_bracket(&g, &k, p).unwrap_or(f64::NAN)
        });
        let kf_br = ScalarFieldFn::with_depth(1, |p: &PhasePoint| {
            sys.poisson_bracket(&k, &f, p).unwrap_or(f64::NAN)
        });
        let fg_br = ScalarFieldFn::with_depth(1, |p: &PhasePoint| {
            sys.poisson_bracket(&f, &g, p).unwrap_or(f64::NAN)
        });
        let total = sys.poisson_bracket(&f, &gk_br, &x).unwrap()
            + sys.poisson_bracket(&g, &kf_br, &x).unwrap()
            + sys.poisson_bracket(&k, &fg_br, &x).unwrap();
        prop_assert!(total.abs() <= 1e-5, "jacobi defect {:.3e}", total);
    }

    #[test]
    fn hamiltonian_flow_preserves_structure(
        hc in prop::collection::vec(-1.0..1.0f64, 10),
        px in interior_point(),
    ) {
        // Random cubic Hamiltonian on the canonical structure in DIM = 4.
        let omega = SymplecticStructure::canonical(2);
        let domain = DomainBox::new(vec![(-1.0, 1.0); 4]).unwrap();
        let ham = move |x: &PhasePoint| {
            let mut v = 0.0;
            for i in 0..4 {
                v += hc[i] * x[i] * x[i];
            }
            v + hc[4] * x[0] * x[1]
                + hc[5] * x[2] * x[3]
                + hc[6] * x[0] * x[2]
                + hc[7] * x[0] * x[0] * x[1]
                + hc[8] * x[1] * x[2] * x[3]
                + hc[9] * x[3]
        };
        let sys = HamiltonianSystem::new(2, omega, Box::new(ham), domain).unwrap();
        let x = PhasePoint::new(px).unwrap();
        let r = sys.liouville_residuals(&x).unwrap();
        prop_assert!(r.form <= 1e-6, "form residual {:.3e}", r.form);
        prop_assert!(r.bivector <= 1e-6, "bivector residual {:.3e}", r.bivector);
    }
}
