#pragma once

// Bosonic bath description: spectral densities, the exact finite-temperature
// correlation function L(t) obtained by quadrature, and its exponential
// expansion L(t) = sum_k d_k e^{-z_k t} + 2 eta delta(t) used by all solvers.
//
// The expansion is built from the Matsubara pole decomposition of the Bose
// function: for the Drude spectrum the retained terms are the Drude pole at
// z = gamma plus Matsubara poles at z = 2 pi k / beta, and the truncated tail
// is folded into the delta weight eta through its integrated strength,
//   eta = int_0^inf Re L(t) dt - sum_retained Re(d_k)/Re(z_k),
// where the total integral equals J'(0)/beta exactly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace minwork::bath {

using cplx = std::complex<double>;

struct NonIntegrableSpectrum : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitFailure : std::runtime_error {
    FitFailure(const std::string& msg, double achieved_residual)
        : std::runtime_error(msg), achieved(achieved_residual) {}
    double achieved;
};

// ---------------------------------------------------------------------------
// Spectral densities
// ---------------------------------------------------------------------------

struct SpectralDensity {
    enum class Kind { Drude, Ohmic, OhmicDrude };

    Kind kind{Kind::Drude};
    double gamma{1.0};   // Drude memory rate
    double xi{0.0};      // Drude coupling strength
    double zeta{0.0};    // Ohmic friction coefficient
    double epsilon{1.0}; // Ohmic reference frequency

    static SpectralDensity drude(double gamma, double xi) {
        SpectralDensity j;
        j.kind = Kind::Drude;
        j.gamma = gamma;
        j.xi = xi;
        j.validate();
        return j;
    }

    static SpectralDensity ohmic(double zeta, double epsilon) {
        SpectralDensity j;
        j.kind = Kind::Ohmic;
        j.zeta = zeta;
        j.epsilon = epsilon;
        j.validate();
        return j;
    }

    static SpectralDensity ohmic_drude(double zeta, double gamma, double xi, double epsilon) {
        SpectralDensity j;
        j.kind = Kind::OhmicDrude;
        j.zeta = zeta;
        j.gamma = gamma;
        j.xi = xi;
        j.epsilon = epsilon;
        j.validate();
        return j;
    }

    void validate() const {
        const bool has_drude = kind != Kind::Ohmic;
        const bool has_ohmic = kind != Kind::Drude;
        if (has_drude && !(gamma > 0.0)) throw std::invalid_argument("spectral density: gamma must be > 0");
        if (has_drude && !(xi >= 0.0)) throw std::invalid_argument("spectral density: xi must be >= 0");
        if (has_ohmic && !(zeta >= 0.0)) throw std::invalid_argument("spectral density: zeta must be >= 0");
        if (has_ohmic && !(epsilon > 0.0)) throw std::invalid_argument("spectral density: epsilon must be > 0");
    }

    // J(omega) / omega, finite at omega = 0.
    double value_over_omega(double omega) const {
        double j = 0.0;
        if (kind != Kind::Ohmic) j += gamma * gamma * xi / (omega * omega + gamma * gamma);
        if (kind != Kind::Drude) j += zeta / (2.0 * epsilon);
        return j;
    }

    double value(double omega) const { return value_over_omega(omega) * omega; }

    // J'(0); also the exact integrated weight of Re L via int_0^inf Re L dt = J'(0)/beta.
    double slope_at_zero() const { return value_over_omega(0.0); }

    // The half-line Fourier integral defining L(t) requires J to decay; any
    // Ohmic component grows linearly and makes L(t) distributional.
    bool fourier_integrable() const { return kind == Kind::Drude; }
};

// Smooth part of the friction kernel Delta(t) = (2/pi) int (J/w) cos(wt) dw.
// The Ohmic component contributes (zeta/epsilon) delta(t), reported separately.
inline double friction_kernel(const SpectralDensity& j, double t) {
    if (j.kind == SpectralDensity::Kind::Ohmic) return 0.0;
    return j.gamma * j.xi * std::exp(-j.gamma * std::abs(t));
}

inline double friction_delta_weight(const SpectralDensity& j) {
    if (j.kind == SpectralDensity::Kind::Drude) return 0.0;
    return j.zeta / j.epsilon;
}

// ---------------------------------------------------------------------------
// Exact correlation function (quadrature oracle)
// ---------------------------------------------------------------------------

namespace detail {

// omega * coth(beta omega / 2), stable through omega -> 0.
inline double omega_coth_half(double beta, double omega) {
    const double x = 0.5 * beta * omega;
    if (std::abs(x) < 1e-4) {
        // coth(x) = 1/x + x/3 - x^3/45 + ...
        return 2.0 / beta + omega * (x / 3.0 - x * x * x / 45.0);
    }
    return omega / std::tanh(x);
}

inline double quad_cutoff(const SpectralDensity& j, double beta) {
    return 50.0 * std::max(j.gamma, 1.0 / beta);
}

template <class F>
double adaptive_integral(const F& f, double a, double b, double rel_tol) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0, l1 = 0.0;
    const double val = gauss_kronrod<double, 15>::integrate(f, a, b, 15, rel_tol, &err, &l1);
    if (!(err <= 100.0 * rel_tol * std::max(l1, 1e-14))) {
        throw QuadratureFailure("bath correlation quadrature did not reach tolerance (error " +
                                std::to_string(err) + ")");
    }
    return val;
}

// The large-omega part of the Drude transforms converges only conditionally:
// J ~ g^2 xi / w. Beyond a cutoff with w t >~ 30 the remainder
//   int_W^inf J(w) {cos,sin}(w t) dw
// is summed by repeated integration by parts on the asymptotic series
// J = g^2 xi (w^-1 - g^2 w^-3 + g^4 w^-5 - g^6 w^-7 + ...), accurate to
// ~(g/W)^9 plus the truncated 1/(W t)^K recursion depth.
struct TrigTail {
    double cos_part{0.0};
    double sin_part{0.0};
};

inline TrigTail drude_tail(double gamma, double xi, double w0, double t) {
    constexpr int n_powers = 4;
    constexpr int depth = 10;
    double c_p[n_powers], p_p[n_powers];
    for (int m = 0; m < n_powers; ++m) {
        c_p[m] = gamma * gamma * xi * (m % 2 == 0 ? 1.0 : -1.0) * std::pow(gamma, 2 * m);
        p_p[m] = 2.0 * m + 1.0;
    }
    // f^(k)(w0) for f = sum c_p w^-p
    double deriv[depth + 1];
    for (int k = 0; k <= depth; ++k) {
        double acc = 0.0;
        for (int m = 0; m < n_powers; ++m) {
            double fac = (k % 2 == 0 ? 1.0 : -1.0);
            for (int i = 0; i < k; ++i) fac *= p_p[m] + static_cast<double>(i);
            acc += c_p[m] * fac * std::pow(w0, -(p_p[m] + static_cast<double>(k)));
        }
        deriv[k] = acc;
    }
    const double cw = std::cos(w0 * t), sw = std::sin(w0 * t);
    double s_next = 0.0, c_next = 0.0; // S_k = int f^(k) sin, C_k = int f^(k) cos
    for (int k = depth; k >= 0; --k) {
        const double s_k = deriv[k] * cw / t + c_next / t;
        const double c_k = -deriv[k] * sw / t - s_next / t;
        s_next = s_k;
        c_next = c_k;
    }
    return {c_next, s_next};
}

// int_{w0}^{w1} J(w) trig(w t) dw on a logarithmic grid (few oscillations by
// construction of w1 ~ 30/t, amplitude varying over many decades).
template <class Trig>
double drude_mid_integral(double gamma, double xi, double w0, double w1, double t,
                          const Trig& trig, double rel_tol) {
    auto f = [&](double u) {
        const double w = std::exp(u);
        const double j = gamma * gamma * xi * w / (w * w + gamma * gamma);
        return j * trig(w * t) * w; // dw = w du
    };
    return adaptive_integral(f, std::log(w0), std::log(w1), rel_tol);
}

} // namespace detail

// L(t) = (1/pi) int dw J(w) e^{-iwt} / (1 - e^{-beta w}) evaluated by adaptive
// quadrature with relative tolerance 1e-9; serves as the fitting oracle for
// the exponential expansion.
//
// Folding the odd J onto the half line:
//   Re L = (1/pi) int_0^inf J(w) coth(beta w/2) cos(wt) dw
//   Im L = -(1/pi) int_0^inf J(w) sin(wt) dw
// The adaptive segment runs to max(cutoff, 30/t) and the conditionally
// convergent remainder is completed by the asymptotic tail series (coth = 1
// there to better than e^{-beta cutoff} <= e^{-50}). At t = 0 the real part
// keeps the plain cutoff value (the Drude Re L(0+) is log-divergent and only
// ever used as a normalisation), while the imaginary part is the sum-rule
// limit Im L(0+) = -(1/pi) int J, evaluated by continuity.
inline cplx correlation_exact(const SpectralDensity& j, double beta, double t) {
    if (!(beta > 0.0)) throw std::invalid_argument("correlation_exact: beta must be > 0");
    if (!(t >= 0.0)) throw std::invalid_argument("correlation_exact: t must be >= 0");
    if (!j.fourier_integrable())
        throw NonIntegrableSpectrum("correlation_exact: spectrum with an Ohmic component does not decay; "
                                    "L(t) exists only as a distribution");
    const double cutoff = detail::quad_cutoff(j, beta);
    const double rel_tol = 1e-9;

    const double re_base = detail::adaptive_integral(
        [&](double w) { return j.value_over_omega(w) * detail::omega_coth_half(beta, w) * std::cos(w * t); },
        0.0, cutoff, rel_tol);

    const double t_im = t > 0.0 ? t : 1e-8;
    const double w_eff = std::max(cutoff, 30.0 / t_im);
    auto cos_t = [&](double x) { return std::cos(x); };
    auto sin_t = [&](double x) { return std::sin(x); };

    double im = detail::adaptive_integral([&](double w) { return j.value(w) * std::sin(w * t_im); },
                                          0.0, cutoff, rel_tol);
    if (w_eff > cutoff)
        im += detail::drude_mid_integral(j.gamma, j.xi, cutoff, w_eff, t_im, sin_t, rel_tol);
    im += detail::drude_tail(j.gamma, j.xi, w_eff, t_im).sin_part;

    double re = re_base;
    if (t > 0.0) {
        if (w_eff > cutoff)
            re += detail::drude_mid_integral(j.gamma, j.xi, cutoff, w_eff, t, cos_t, rel_tol);
        re += detail::drude_tail(j.gamma, j.xi, w_eff, t).cos_part;
    }
    return cplx(re / M_PI, -im / M_PI);
}

// ---------------------------------------------------------------------------
// Exponential expansion
// ---------------------------------------------------------------------------

struct ExpansionTerm {
    cplx d;      // amplitude of e^{-z t}
    cplx d_conj; // d'_k: amplitude pairing so that conj(sum d e^{-zt}) = sum d' e^{-zt}
    cplx z;      // decay rate, Re z > 0
};

struct ExponentialExpansion {
    std::vector<ExpansionTerm> terms;
    double eta{0.0};       // weight of the 2 eta delta(t) term (real)
    double beta{0.0};
    double fit_error{0.0}; // sup-norm residual vs the quadrature oracle on the fit grid
    double fit_scale{1.0}; // |L_exact(0)| used to normalise the fit tolerance

    std::size_t size() const { return terms.size(); }

    // sum_k d_k e^{-z_k t}; the delta term is never sampled.
    cplx eval(double t) const {
        cplx acc{};
        for (const auto& term : terms) acc += term.d * std::exp(-term.z * t);
        return acc;
    }

    cplx eval_conj(double t) const {
        cplx acc{};
        for (const auto& term : terms) acc += term.d_conj * std::exp(-term.z * t);
        return acc;
    }
};

// d(w) = int_0^inf dt Re[L(t)] e^{iwt} evaluated on the expansion; the delta
// term contributes eta under the boundary convention int_0^inf 2 eta delta f = eta f(0).
inline cplx halfline_transform(const ExponentialExpansion& e, double omega) {
    cplx acc(e.eta, 0.0);
    const cplx iw(0.0, omega);
    for (const auto& term : e.terms) {
        acc += 0.5 * (term.d / (term.z - iw) + std::conj(term.d) / (std::conj(term.z) - iw));
    }
    return acc;
}

// Full-line Fourier transform Lhat(w) = int dt L(t) e^{iwt} of the expansion,
// using L(-t) = conj(L(t)). Satisfies detailed balance Lhat(-w) = e^{-bw} Lhat(w)
// up to the truncation captured by eta.
inline double fourier_spectrum(const ExponentialExpansion& e, double omega) {
    double acc = 2.0 * e.eta;
    const cplx iw(0.0, omega);
    for (const auto& term : e.terms) acc += 2.0 * std::real(term.d / (term.z - iw));
    return acc;
}

namespace detail {

// Detailed-balance deviation of the expansion's Fourier spectrum,
//   max over sampled w of |Lhat(-w) - e^{-bw} Lhat(w)| / |Lhat(w)|.
// The delta closure folds truncated terms into a frequency-flat weight; when
// slow (near-system-frequency) terms land in it the up-rates inherit an O(1)
// error that the time-domain residual cannot see (the pole coefficient and a
// near-resonant Matsubara term may cancel to a small remainder). Candidate
// expansions must keep this deviation within the fit tolerance band.
inline double detailed_balance_deviation(const ExponentialExpansion& e) {
    double dev = 0.0;
    for (double w : {0.5, 1.0, 2.0}) {
        const double down = fourier_spectrum(e, w);
        const double up = fourier_spectrum(e, -w);
        dev = std::max(dev, std::abs(up - std::exp(-e.beta * w) * down) / std::abs(down));
    }
    return dev;
}

struct FitGrid {
    std::vector<double> t;
    std::vector<cplx> exact;
    double scale; // |L(0)|
};

inline FitGrid make_fit_grid(const SpectralDensity& j, double beta) {
    // Covers both the bath memory time and the thermal time. The grid starts
    // at the thermal time beta/pi: below it the Drude correlation is dominated
    // by the short-time structure that the delta closure absorbs (and L(0+)
    // itself is weakly singular), so the pointwise fit is graded outside it.
    const std::size_t n = 2000;
    const double t_fit = std::max({10.0 / j.gamma, 2.0 * beta, 20.0});
    const double t_min = std::max(t_fit / static_cast<double>(n), beta / M_PI);
    FitGrid g;
    g.t.resize(n);
    g.exact.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.t[i] = t_min + (t_fit - t_min) * static_cast<double>(i) / static_cast<double>(n - 1);
        g.exact[i] = correlation_exact(j, beta, g.t[i]);
    }
    g.scale = std::abs(correlation_exact(j, beta, 0.0));
    return g;
}

inline double sup_residual(const ExponentialExpansion& e, const FitGrid& g) {
    double sup = 0.0;
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        sup = std::max(sup, std::abs(e.eval(g.t[i]) - g.exact[i]));
    }
    return sup;
}

} // namespace detail

// Matsubara decomposition with n_mats Matsubara terms (plus the Drude pole).
// Building block of expand_correlation; exposed for convergence studies.
inline ExponentialExpansion matsubara_expansion(const SpectralDensity& j, double beta, std::size_t n_mats) {
    if (!(beta > 0.0)) throw std::invalid_argument("matsubara_expansion: beta must be > 0");
    if (!j.fourier_integrable())
        throw NonIntegrableSpectrum("matsubara_expansion: only a decaying (Drude) spectrum admits "
                                    "the pole decomposition");
    ExponentialExpansion e;
    e.beta = beta;
    if (j.xi == 0.0) return e; // decoupled bath: L(t) = 0

    const double g = j.gamma;
    const double s = std::sin(0.5 * beta * g);
    if (std::abs(s) < 1e-12)
        throw std::invalid_argument("matsubara_expansion: gamma coincides with a Matsubara frequency");
    const double cot = std::cos(0.5 * beta * g) / s;

    ExpansionTerm pole;
    pole.z = cplx(g, 0.0);
    pole.d = 0.5 * g * g * j.xi * cplx(cot, -1.0);
    pole.d_conj = std::conj(pole.d);
    e.terms.push_back(pole);

    for (std::size_t k = 1; k <= n_mats; ++k) {
        const double nu = 2.0 * M_PI * static_cast<double>(k) / beta;
        if (std::abs(nu - g) < 1e-10 * g)
            throw std::invalid_argument("matsubara_expansion: gamma coincides with a Matsubara frequency");
        ExpansionTerm mats;
        mats.z = cplx(nu, 0.0);
        mats.d = cplx(2.0 * g * g * j.xi / beta * nu / (nu * nu - g * g), 0.0);
        mats.d_conj = mats.d;
        e.terms.push_back(mats);
    }

    // Low-frequency closure: the truncated tail enters as 2 eta delta(t) with
    // eta equal to its integrated weight, sum_{k>K} Re d_k / z_k.
    double retained = 0.0;
    for (const auto& term : e.terms) retained += std::real(term.d) / std::real(term.z);
    e.eta = j.slope_at_zero() / beta - retained;
    return e;
}

// Fit the exponential expansion to the exact correlation: the smallest number
// of terms whose sup-norm residual on the fit grid is within tol * |L(0)| and
// whose spectrum respects detailed balance within 10 tol.
inline ExponentialExpansion expand_correlation(const SpectralDensity& j, double beta, double tol,
                                               std::size_t k_max) {
    if (!(tol > 0.0)) throw std::invalid_argument("expand_correlation: tol must be > 0");
    if (k_max < 1) throw std::invalid_argument("expand_correlation: k_max must be >= 1");
    if (!j.fourier_integrable())
        throw NonIntegrableSpectrum("expand_correlation: spectrum with an Ohmic component has no "
                                    "exponential expansion");
    if (j.xi == 0.0) {
        ExponentialExpansion e;
        e.beta = beta;
        return e;
    }

    const auto grid = detail::make_fit_grid(j, beta);
    double achieved = std::numeric_limits<double>::infinity();
    for (std::size_t n_mats = 0; n_mats + 1 <= k_max; ++n_mats) {
        ExponentialExpansion e = matsubara_expansion(j, beta, n_mats);
        e.fit_error = detail::sup_residual(e, grid);
        e.fit_scale = grid.scale;
        achieved = std::min(achieved, e.fit_error);
        if (e.fit_error <= tol * grid.scale &&
            detail::detailed_balance_deviation(e) <= 10.0 * tol)
            return e;
    }
    throw FitFailure("expand_correlation: residual " + std::to_string(achieved) + " (or the " +
                         "detailed-balance deviation) exceeds tolerance at k_max = " +
                         std::to_string(k_max),
                     achieved);
}

} // namespace minwork::bath
