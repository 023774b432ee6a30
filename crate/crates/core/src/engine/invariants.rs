//! The invariant family: wedge-power integrals, the recursion-operator
//! spectrum, and the symmetric-function bridges between them.
//!
//! Cross-checks implemented here, all consequences of the spectrum of
//! `A = omega_E . W` coming in doubled pairs:
//!
//! * `l_k = <omega_E^k, W^k> = (-1)^k (k!)^2 e_k(lambda)` over the
//!   deduplicated eigenvalues;
//! * `mu_k = Tr(A^k) = sum over the full (doubled) spectrum of lambda^k`;
//! * Newton's identities convert between power sums and elementary
//!   symmetric polynomials exactly.

use nalgebra::{Complex, DMatrix};

use crate::error::{CoreError, Result};
use crate::fields::ScalarField;
use crate::hamiltonian::HamiltonianSystem;
use crate::point::PhasePoint;
use crate::tensor::{pairing, FormSample, MultivectorSample};

use super::recursion::{calibration_recursion_matrix, omega_e, power_traces, recursion_matrix};

/// `l_k / e_k(lambda) = (-1)^k (k!)^2`, independent of phase-space size.
pub fn lutzky_elementary_factor(k: usize) -> f64 {
    let kf: f64 = (1..=k).map(|i| i as f64).product();
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * kf * kf
}

/// `l_k = <omega_E^{^k}, W^{^k}>` for `k = 1..=n` from samples at a point.
pub fn lutzky_from_samples(
    omega_e: &FormSample,
    w: &MultivectorSample,
) -> Result<Vec<f64>> {
    if omega_e.dim() != w.dim() {
        return Err(CoreError::Dimension("sample dimensions differ".into()));
    }
    if omega_e.degree() != 2 || w.degree() != 2 {
        return Err(CoreError::Degree("wedge-power integrals need degree-2 samples".into()));
    }
    let n = omega_e.dim() / 2;
    let mut out = Vec::with_capacity(n);
    let mut oe_pow = omega_e.clone();
    let mut w_pow = w.clone();
    for k in 1..=n {
        out.push(pairing(&oe_pow, &w_pow)?);
        if k < n {
            oe_pow = oe_pow.wedge(omega_e)?;
            w_pow = w_pow.wedge(w)?;
        }
    }
    Ok(out)
}

/// `l_1..l_n` at a point of the system.
pub fn lutzky_integrals(sys: &HamiltonianSystem, x: &PhasePoint) -> Result<Vec<f64>> {
    let oe = omega_e(sys, x)?;
    let w = sys.omega_inverse(x)?;
    lutzky_from_samples(&oe, &w)
}

/// Scalar field `x -> l_k(x)`.
pub struct LutzkyField<'a> {
    sys: &'a HamiltonianSystem,
    k: usize,
}

impl<'a> LutzkyField<'a> {
    pub fn new(sys: &'a HamiltonianSystem, k: usize) -> Self {
        assert!(k >= 1, "integral index starts at 1");
        Self { sys, k }
    }
}

impl ScalarField for LutzkyField<'_> {
    fn eval(&self, x: &PhasePoint) -> f64 {
        match lutzky_integrals(self.sys, x) {
            Ok(l) if self.k <= l.len() => l[self.k - 1],
            _ => f64::NAN,
        }
    }
    fn fd_depth(&self) -> u32 {
        1
    }
}

/// Relative tolerance for accepting two eigenvalues as one doubled pair.
pub const PAIRING_TOL: f64 = 1e-6;

/// Eigenvalues of the recursion operator. The raw spectrum has even length
/// and comes in doubled pairs; `values` holds one representative per pair.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// All eigenvalues, sorted by (re, im).
    pub raw: Vec<Complex<f64>>,
    /// Pair means, sorted by (re, im); half as many as `raw`.
    pub values: Vec<Complex<f64>>,
    /// Largest absolute distance inside a matched pair.
    pub max_pair_gap: f64,
    /// Largest `gap / (1 + |mean|)` over pairs.
    pub max_relative_gap: f64,
    /// Whether every pair matched within [`PAIRING_TOL`].
    pub pairing_ok: bool,
}

/// Pairs a sorted spectrum greedily: each unmatched eigenvalue grabs its
/// nearest unmatched partner. Plain adjacent matching after sorting is not
/// enough: conjugate quadruples tie in the real part to rounding only, so
/// sorting interleaves the two pairs.
pub(crate) fn dedup_doubled(mut raw: Vec<Complex<f64>>) -> SpectrumResult {
    raw.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let m = raw.len();
    let mut used = vec![false; m];
    let mut values = Vec::with_capacity(m / 2);
    let mut max_gap = 0.0f64;
    let mut max_rel = 0.0f64;
    for i in 0..m {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut best: Option<(usize, f64)> = None;
        for (j, flag) in used.iter().enumerate().skip(i + 1) {
            if *flag {
                continue;
            }
            let d = (raw[i] - raw[j]).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            used[j] = true;
            let mean = 0.5 * (raw[i] + raw[j]);
            max_gap = max_gap.max(d);
            max_rel = max_rel.max(d / (1.0 + mean.norm()));
            values.push(mean);
        } else {
            // Odd leftover cannot happen for even input; keep it visible.
            values.push(raw[i]);
            max_gap = f64::INFINITY;
            max_rel = f64::INFINITY;
        }
    }
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let pairing_ok = max_rel <= PAIRING_TOL;
    SpectrumResult { raw, values, max_pair_gap: max_gap, max_relative_gap: max_rel, pairing_ok }
}

/// Deduplicated spectrum of an arbitrary square matrix; used directly by
/// matrix-level cross-checks.
pub fn spectrum_of_matrix(m: &DMatrix<f64>) -> SpectrumResult {
    let eig = m.clone().complex_eigenvalues();
    dedup_doubled(eig.iter().copied().collect())
}

/// Deduplicated spectrum of the recursion operator at `x`.
pub fn spectrum(sys: &HamiltonianSystem, x: &PhasePoint) -> Result<SpectrumResult> {
    let a = recursion_matrix(sys, x)?;
    Ok(spectrum_of_matrix(a.matrix()))
}

/// Newton's identities, elementary to power sums:
/// `p_k = e_1 p_{k-1} - e_2 p_{k-2} + ... + (-1)^{k-1} k e_k`.
pub fn elementary_to_power_sums(e: &[f64]) -> Vec<f64> {
    let n = e.len();
    let mut p = Vec::with_capacity(n);
    for k in 1..=n {
        let mut pk = 0.0;
        for i in 1..k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            pk += sign * e[i - 1] * p[k - i - 1];
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        pk += sign * k as f64 * e[k - 1];
        p.push(pk);
    }
    p
}

/// Newton's identities, power sums to elementary:
/// `e_k = (1/k) sum_{i=1}^{k} (-1)^{i-1} e_{k-i} p_i`, with `e_0 = 1`.
pub fn power_sums_to_elementary(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let mut e = Vec::with_capacity(n);
    for k in 1..=n {
        let mut ek = 0.0;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            let prev = if k - i == 0 { 1.0 } else { e[k - i - 1] };
            ek += sign * prev * p[i - 1];
        }
        e.push(ek / k as f64);
    }
    e
}

/// Elementary symmetric polynomials of a deduplicated spectrum, plus the
/// ordered-distinct-tuple sums `k! e_k`.
#[derive(Debug, Clone)]
pub struct ElementarySymmetric {
    pub elementary: Vec<f64>,
    pub ordered_tuple_sums: Vec<f64>,
    /// Largest imaginary part leaking into any `e_k`; near zero whenever
    /// complex eigenvalues come in conjugate pairs.
    pub max_imag: f64,
}

/// Expands `prod_i (1 + lambda_i t)`; the coefficient of `t^k` is `e_k`.
pub fn elementary_from_spectrum(values: &[Complex<f64>]) -> ElementarySymmetric {
    let n = values.len();
    let mut coeff: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); n + 1];
    coeff[0] = Complex::new(1.0, 0.0);
    let mut top = 0usize;
    for lam in values {
        top += 1;
        for k in (1..=top).rev() {
            let add = coeff[k - 1] * lam;
            coeff[k] += add;
        }
    }
    let mut elementary = Vec::with_capacity(n);
    let mut ordered = Vec::with_capacity(n);
    let mut max_imag = 0.0f64;
    let mut kfact = 1.0f64;
    for (k, c) in coeff.iter().enumerate().skip(1) {
        kfact *= k as f64;
        max_imag = max_imag.max(c.im.abs());
        elementary.push(c.re);
        ordered.push(kfact * c.re);
    }
    ElementarySymmetric { elementary, ordered_tuple_sums: ordered, max_imag }
}

/// Everything the engine can say about one point, with the cross-formula
/// residuals that tie the three constructions together.
#[derive(Debug, Clone)]
pub struct InvariantBundle {
    pub point: Vec<f64>,
    /// `l_1..l_n`.
    pub lutzky: Vec<f64>,
    /// Deduplicated eigenvalues, length n.
    pub eigenvalues: Vec<Complex<f64>>,
    /// `mu_1..mu_{k_max}`.
    pub power_traces: Vec<f64>,
    pub max_pair_gap: f64,
    pub max_relative_gap: f64,
    pub pairing_ok: bool,
    pub max_eigen_imag: f64,
    /// `|l_k - (-1)^k (k!)^2 e_k|` for `k = 1..n`.
    pub lutzky_vs_elementary: Vec<f64>,
    /// `|mu_k - sum_full lambda^k|` for `k = 1..k_max`.
    pub trace_vs_power_sum: Vec<f64>,
}

pub fn invariant_bundle(
    sys: &HamiltonianSystem,
    x: &PhasePoint,
    k_max: usize,
) -> Result<InvariantBundle> {
    let lutzky = lutzky_integrals(sys, x)?;
    let spec = spectrum(sys, x)?;
    let traces = power_traces(sys, x, k_max)?;

    let elem = elementary_from_spectrum(&spec.values);
    let lutzky_vs_elementary = lutzky
        .iter()
        .enumerate()
        .map(|(i, l)| (l - lutzky_elementary_factor(i + 1) * elem.elementary[i]).abs())
        .collect();

    let mut trace_vs_power_sum = Vec::with_capacity(k_max);
    let mut max_eigen_imag = elem.max_imag;
    let mut power: Vec<Complex<f64>> = vec![Complex::new(1.0, 0.0); spec.raw.len()];
    for k in 1..=k_max {
        let mut s = Complex::new(0.0, 0.0);
        for (pw, lam) in power.iter_mut().zip(&spec.raw) {
            *pw *= lam;
            s += *pw;
        }
        max_eigen_imag = max_eigen_imag.max(s.im.abs());
        trace_vs_power_sum.push((traces[k - 1] - s.re).abs());
    }

    Ok(InvariantBundle {
        point: x.to_vec(),
        lutzky,
        eigenvalues: spec.values,
        power_traces: traces,
        max_pair_gap: spec.max_pair_gap,
        max_relative_gap: spec.max_relative_gap,
        pairing_ok: spec.pairing_ok,
        max_eigen_imag,
        lutzky_vs_elementary,
        trace_vs_power_sum,
    })
}

/// Identity-family control values: with `omega` in place of `omega_E` the
/// operator is the identity, so `l_k = (-1)^k (k!)^2 C(n, k)` and
/// `mu_k = 2n` for every k.
#[derive(Debug, Clone)]
pub struct CalibrationReport {
    pub identity_deviation: f64,
    pub lutzky: Vec<f64>,
    pub lutzky_expected: Vec<f64>,
    pub power_traces: Vec<f64>,
}

pub fn calibration_check(sys: &HamiltonianSystem, x: &PhasePoint) -> Result<CalibrationReport> {
    let n = sys.n();
    let a = calibration_recursion_matrix(sys, x)?;
    let identity_deviation =
        (a.matrix() - DMatrix::<f64>::identity(2 * n, 2 * n)).amax();

    let omega_form = sys.omega().form(x);
    let w = sys.omega_inverse(x)?;
    let lutzky = lutzky_from_samples(&omega_form, &w)?;

    let mut lutzky_expected = Vec::with_capacity(n);
    for k in 1..=n {
        let binom = ((n - k + 1)..=n).map(|i| i as f64).product::<f64>()
            / (1..=k).map(|i| i as f64).product::<f64>();
        lutzky_expected.push(lutzky_elementary_factor(k) * binom);
    }

    let mut power = a.matrix().clone();
    let mut traces = Vec::with_capacity(n);
    traces.push(power.trace());
    for _ in 1..(2 * n) {
        power = &power * a.matrix();
        traces.push(power.trace());
    }

    Ok(CalibrationReport { identity_deviation, lutzky, lutzky_expected, power_traces: traces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn newton_identities_on_known_roots() {
        // Roots 2 and 3: e = (5, 6), p = (5, 13).
        let p = elementary_to_power_sums(&[5.0, 6.0]);
        assert_eq!(p, vec![5.0, 13.0]);
        let e = power_sums_to_elementary(&[5.0, 13.0]);
        assert_abs_diff_eq!(e[0], 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], 6.0, epsilon = 1e-14);
    }

    #[test]
    fn elementary_from_conjugate_pair_is_real() {
        let values = vec![Complex::new(0.3, 0.8), Complex::new(0.3, -0.8)];
        let es = elementary_from_spectrum(&values);
        assert_abs_diff_eq!(es.elementary[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(es.elementary[1], 0.09 + 0.64, epsilon = 1e-15);
        assert!(es.max_imag < 1e-15);
        assert_abs_diff_eq!(es.ordered_tuple_sums[1], 2.0 * es.elementary[1], epsilon = 1e-15);
    }

    #[test]
    fn greedy_pairing_survives_conjugate_quadruples() {
        // Two doubled conjugate pairs whose real parts differ by one ulp;
        // adjacent-after-sort matching would pair a value with its
        // conjugate and report a gap of 2|im|.
        let z = Complex::new(0.3, 0.7);
        let eps = 3.0e-16;
        let raw = vec![
            z,
            Complex::new(0.3 + eps, 0.7),
            z.conj(),
            Complex::new(0.3 + eps, -0.7),
        ];
        let s = dedup_doubled(raw);
        assert!(s.max_pair_gap < 1e-12, "gap {}", s.max_pair_gap);
        assert!(s.pairing_ok);
        assert_eq!(s.values.len(), 2);
        assert_abs_diff_eq!(s.values[0].im, -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values[1].im, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn factor_sequence() {
        assert_eq!(lutzky_elementary_factor(1), -1.0);
        assert_eq!(lutzky_elementary_factor(2), 4.0);
        assert_eq!(lutzky_elementary_factor(3), -36.0);
        assert_eq!(lutzky_elementary_factor(4), 576.0);
    }
}
