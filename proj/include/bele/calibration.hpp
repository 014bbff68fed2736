#ifndef BELE_CALIBRATION_HPP
#define BELE_CALIBRATION_HPP

// Regression of the canonical model on blur-annotated scores, the VQEG
// five-parameter logistic baseline, and monotone conversion curves from a
// quality score to equivalent blur.

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bele/core_model.hpp"
#include "bele/error.hpp"
#include "bele/nelder_mead.hpp"
#include "bele/stats.hpp"

namespace bele
{

struct BlurSample
{
    double xi = 0.0;
    double dmos = 0.0;
};

struct CanonicalFit
{
    CanonicalParams params;
    double residual_rmse = 0.0;
    std::size_t n_samples = 0;
    int evaluations = 0;
};

inline constexpr double q_lower = 1e-6;
inline constexpr double q_upper = 2.0;
inline constexpr double tau_lower = 0.25;
inline constexpr double tau_upper = 4.0;

namespace detail
{

inline double canonical_sse(std::span<const BlurSample> samples, double q, double tau)
{
    const double t4 = std::pow(tau, 4);
    double s = 0.0;
    for (const BlurSample& b : samples)
    {
        const double u = b.xi * b.xi / t4;
        const double r = 100.0 * q * one_minus_inv_sqrt1p(u) - b.dmos;
        s += r * r;
    }
    return s;
}

} // namespace detail

/// Least-squares (Q, tau) over the box Q in (0, 2], tau in [0.25, 4]:
/// a 30x30 log-spaced grid, then Nelder-Mead from the best grid point,
/// restarted once from its own optimum.
inline CanonicalFit fit_canonical(std::span<const BlurSample> samples,
                                  const optim::NelderMeadOptions& options = {})
{
    std::set<double> distinct;
    for (const BlurSample& b : samples)
    {
        if (!(std::isfinite(b.xi) && b.xi >= 0.0) || !std::isfinite(b.dmos))
            throw DomainError("fit_canonical: samples need finite xi >= 0 and finite dmos");
        distinct.insert(b.xi);
    }
    if (distinct.size() < 2)
        throw DegenerateInputError("fit_canonical: need at least two distinct blur levels");

    constexpr int grid = 30;
    double best_q = 1.0, best_tau = 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i)
    {
        const double q = 0.02 * std::pow(q_upper / 0.02, i / (grid - 1.0));
        for (int j = 0; j < grid; ++j)
        {
            const double tau = tau_lower * std::pow(tau_upper / tau_lower, j / (grid - 1.0));
            const double v = detail::canonical_sse(samples, q, tau);
            if (v < best)
            {
                best = v;
                best_q = q;
                best_tau = tau;
            }
        }
    }

    const optim::Box box{{q_lower, tau_lower}, {q_upper, tau_upper}};
    auto f = [&](const std::vector<double>& x) { return detail::canonical_sse(samples, x[0], x[1]); };
    optim::NelderMeadResult r = optim::nelder_mead(f, {best_q, best_tau}, box, options);
    int evals = r.evaluations + grid * grid;
    if (options.max_evaluations - r.evaluations > 0)
    {
        optim::NelderMeadOptions again = options;
        again.max_evaluations = options.max_evaluations - r.evaluations;
        again.initial_step = 0.01;
        const optim::NelderMeadResult r2 = optim::nelder_mead(f, r.x, box, again);
        evals += r2.evaluations;
        if (r2.fx <= r.fx)
            r = r2;
        else
            r.converged = r.converged || r2.converged;
    }

    const double rmse = std::sqrt(r.fx / static_cast<double>(samples.size()));
    if (!r.converged)
        throw ConvergenceError("fit_canonical: Nelder-Mead did not converge within the evaluation budget", r.x,
                               rmse);

    CanonicalFit fit;
    fit.params = CanonicalParams{r.x[0], r.x[1]};
    fit.residual_rmse = rmse;
    fit.n_samples = samples.size();
    fit.evaluations = evals;
    return fit;
}

inline void to_json(nlohmann::json& j, const CanonicalFit& f)
{
    j = nlohmann::json{{"q", f.params.q},
                       {"tau", f.params.tau},
                       {"residual_rmse", f.residual_rmse},
                       {"n_samples", f.n_samples}};
}

inline void from_json(const nlohmann::json& j, CanonicalFit& f)
{
    f.params.q = j.at("q").get<double>();
    f.params.tau = j.at("tau").get<double>();
    f.residual_rmse = j.value("residual_rmse", 0.0);
    f.n_samples = j.value("n_samples", std::size_t{0});
    f.params.validate();
}

/// beta1 (1/2 - 1/(1 + exp(beta2 (z - beta3)))) + beta4 z + beta5.
struct LogisticParams
{
    std::array<double, 5> beta{0.0, 1.0, 0.0, 0.0, 0.0};

    double operator()(double z) const noexcept
    {
        const double u = std::clamp(beta[1] * (z - beta[2]), -700.0, 700.0);
        return beta[0] * (0.5 - 1.0 / (1.0 + std::exp(u))) + beta[3] * z + beta[4];
    }
};

struct LogisticFit
{
    LogisticParams params;
    double residual_rmse = 0.0;
    std::size_t n_samples = 0;
};

namespace detail
{

struct LogisticFunctor : Eigen::DenseFunctor<double>
{
    std::span<const double> z;
    std::span<const double> d;

    LogisticFunctor(std::span<const double> zeta, std::span<const double> dmos)
        : Eigen::DenseFunctor<double>(5, static_cast<int>(zeta.size())), z(zeta), d(dmos)
    {
    }

    static LogisticParams unpack(const InputType& x)
    {
        return LogisticParams{{x(0), x(1), x(2), x(3), x(4)}};
    }

    int operator()(const InputType& x, ValueType& fvec) const
    {
        const LogisticParams p = unpack(x);
        for (std::size_t i = 0; i < z.size(); ++i)
            fvec(static_cast<Eigen::Index>(i)) = p(z[i]) - d[i];
        return 0;
    }

    int df(const InputType& x, JacobianType& jac) const
    {
        for (std::size_t i = 0; i < z.size(); ++i)
        {
            const auto r = static_cast<Eigen::Index>(i);
            const double u = std::clamp(x(1) * (z[i] - x(2)), -700.0, 700.0);
            const double s = 1.0 / (1.0 + std::exp(u));
            const double ds = s * (1.0 - s);
            jac(r, 0) = 0.5 - s;
            jac(r, 1) = x(0) * ds * (z[i] - x(2));
            jac(r, 2) = -x(0) * ds * x(1);
            jac(r, 3) = z[i];
            jac(r, 4) = 1.0;
        }
        return 0;
    }
};

/// Theil-Sen slope: median of all pairwise slopes.
inline double robust_slope(std::span<const double> x, std::span<const double> y)
{
    std::vector<double> slopes;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (x[j] != x[i])
                slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
    return slopes.empty() ? 0.0 : stats::median(std::move(slopes));
}

inline double logistic_sse(const LogisticParams& p, std::span<const double> z, std::span<const double> d)
{
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
    {
        const double r = p(z[i]) - d[i];
        s += r * r;
    }
    return s;
}

} // namespace detail

/// Levenberg-Marquardt fit of the logistic from several starts; the start
/// list always contains beta2 = 1 with beta1 = range(dmos), beta3 = median,
/// beta4 = Theil-Sen slope, beta5 = mean(dmos).
inline LogisticFit fit_vqeg(std::span<const double> metric_values, std::span<const double> dmos)
{
    if (metric_values.size() != dmos.size())
        throw DimensionError("fit_vqeg: length mismatch");
    if (metric_values.size() < 5)
        throw DegenerateInputError("fit_vqeg: need at least 5 samples");
    for (std::size_t i = 0; i < dmos.size(); ++i)
        if (!std::isfinite(metric_values[i]) || !std::isfinite(dmos[i]))
            throw DomainError("fit_vqeg: non-finite value");

    const auto [dmin, dmax] = std::minmax_element(dmos.begin(), dmos.end());
    const double b1 = *dmax - *dmin;
    const double b3 = stats::median(std::vector<double>(metric_values.begin(), metric_values.end()));
    const double b4 = detail::robust_slope(metric_values, dmos);
    const double b5 = stats::mean(dmos);
    const double sz = stats::stddev(metric_values);
    const double inv = sz > 0.0 ? 1.0 / sz : 1.0;

    std::vector<LogisticParams> starts{LogisticParams{{b1, 1.0, b3, b4, b5}}};
    for (double k : {1.0, -1.0, 4.0, -4.0})
        starts.push_back(LogisticParams{{b1, k * inv, b3, 0.0, b5}});
    starts.push_back(LogisticParams{{0.0, inv, b3, b4, b5 - b4 * b3}});

    LogisticParams best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (const LogisticParams& s : starts)
    {
        detail::LogisticFunctor fn(metric_values, dmos);
        Eigen::LevenbergMarquardt<detail::LogisticFunctor> lm(fn);
        lm.setMaxfev(2000);
        lm.setXtol(1e-14);
        lm.setFtol(1e-14);
        Eigen::VectorXd x(5);
        for (int k = 0; k < 5; ++k)
            x(k) = s.beta[static_cast<std::size_t>(k)];
        lm.minimize(x);
        if (!x.allFinite())
            continue;
        const LogisticParams p = detail::LogisticFunctor::unpack(x);
        const double sse = detail::logistic_sse(p, metric_values, dmos);
        if (sse < best_sse)
        {
            best_sse = sse;
            best = p;
        }
    }
    if (!std::isfinite(best_sse))
        throw ConvergenceError("fit_vqeg: no start produced a finite fit",
                               std::vector<double>(starts[0].beta.begin(), starts[0].beta.end()),
                               std::numeric_limits<double>::infinity());
    return LogisticFit{best, std::sqrt(best_sse / static_cast<double>(dmos.size())), dmos.size()};
}

inline void to_json(nlohmann::json& j, const LogisticFit& f)
{
    j = nlohmann::json{{"beta", f.params.beta}, {"residual_rmse", f.residual_rmse}, {"n_samples", f.n_samples}};
}

inline void from_json(const nlohmann::json& j, LogisticFit& f)
{
    f.params.beta = j.at("beta").get<std::array<double, 5>>();
    f.residual_rmse = j.value("residual_rmse", 0.0);
    f.n_samples = j.value("n_samples", std::size_t{0});
}

/// Monotone piecewise-cubic (Fritsch-Carlson) map from a quality score zeta
/// to equivalent blur. Segment k covers [zeta_k, zeta_{k+1}] and evaluates
/// c0 + c1 t + c2 t^2 + c3 t^3 with t = zeta - zeta_k.
struct ConversionCurve
{
    std::vector<double> zeta;
    std::vector<double> xi;
    std::vector<std::array<double, 4>> coefficients;
};

struct ConversionValue
{
    NormalizedBlur xi;
    /// zeta was outside the knot range and the end value was returned.
    bool clamped = false;
};

inline ConversionCurve build_conversion(std::span<const std::pair<double, double>> knots)
{
    if (knots.size() < 2)
        throw DegenerateInputError("build_conversion: need at least two knots");
    ConversionCurve c;
    for (std::size_t i = 0; i < knots.size(); ++i)
    {
        const auto [z, x] = knots[i];
        if (!std::isfinite(z) || !std::isfinite(x) || x < 0.0)
            throw DomainError("build_conversion: knots must be finite with xi >= 0");
        if (i > 0 && !(z > knots[i - 1].first))
            throw DomainError("build_conversion: zeta must be strictly increasing (knot " + std::to_string(i) + ")");
        if (i > 0 && x < knots[i - 1].second)
            throw DomainError("build_conversion: xi must be nondecreasing (knot " + std::to_string(i) + ")");
        c.zeta.push_back(z);
        c.xi.push_back(x);
    }

    const std::size_t n = knots.size();
    std::vector<double> h(n - 1), delta(n - 1), m(n);
    for (std::size_t k = 0; k + 1 < n; ++k)
    {
        h[k] = c.zeta[k + 1] - c.zeta[k];
        delta[k] = (c.xi[k + 1] - c.xi[k]) / h[k];
    }
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k)
        m[k] = (delta[k - 1] == 0.0 || delta[k] == 0.0) ? 0.0 : 0.5 * (delta[k - 1] + delta[k]);
    for (std::size_t k = 0; k + 1 < n; ++k)
    {
        if (delta[k] == 0.0)
        {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        const double a = m[k] / delta[k];
        const double b = m[k + 1] / delta[k];
        const double s = a * a + b * b;
        if (s > 9.0)
        {
            const double t = 3.0 / std::sqrt(s);
            m[k] = t * a * delta[k];
            m[k + 1] = t * b * delta[k];
        }
    }
    for (std::size_t k = 0; k + 1 < n; ++k)
    {
        const double c2 = (3.0 * delta[k] - 2.0 * m[k] - m[k + 1]) / h[k];
        const double c3 = (m[k] + m[k + 1] - 2.0 * delta[k]) / (h[k] * h[k]);
        c.coefficients.push_back({c.xi[k], m[k], c2, c3});
    }
    return c;
}

inline ConversionValue eval_conversion(const ConversionCurve& curve, double zeta)
{
    if (curve.zeta.size() < 2 || curve.coefficients.size() + 1 != curve.zeta.size())
        throw DomainError("eval_conversion: malformed curve");
    if (std::isnan(zeta))
        throw DomainError("eval_conversion: zeta is NaN");
    if (zeta <= curve.zeta.front())
        return {NormalizedBlur(curve.xi.front()), zeta < curve.zeta.front()};
    if (zeta >= curve.zeta.back())
        return {NormalizedBlur(curve.xi.back()), zeta > curve.zeta.back()};
    const auto it = std::upper_bound(curve.zeta.begin(), curve.zeta.end(), zeta);
    const auto k = static_cast<std::size_t>(it - curve.zeta.begin()) - 1;
    const double t = zeta - curve.zeta[k];
    const auto& a = curve.coefficients[k];
    const double v = a[0] + t * (a[1] + t * (a[2] + t * a[3]));
    return {NormalizedBlur(std::clamp(v, curve.xi[k], curve.xi[k + 1])), false};
}

/// Knots (canonical_dmos(xi), xi) on xi = xi_max * (i / (n - 1))^2.
inline ConversionCurve canonical_conversion(const CanonicalParams& params, std::size_t n_knots = 200,
                                            double xi_max = 40.0)
{
    params.validate();
    if (n_knots < 2 || !(xi_max > 0.0))
        throw DomainError("canonical_conversion: need n_knots >= 2 and xi_max > 0");
    std::vector<std::pair<double, double>> knots;
    for (std::size_t i = 0; i < n_knots; ++i)
    {
        const double u = static_cast<double>(i) / static_cast<double>(n_knots - 1);
        const double xi = xi_max * u * u;
        knots.emplace_back(canonical_dmos(params, NormalizedBlur(xi)).value, xi);
    }
    return build_conversion(knots);
}

inline void to_json(nlohmann::json& j, const ConversionCurve& c)
{
    j = nlohmann::json{{"zeta", c.zeta}, {"xi", c.xi}, {"coefficients", c.coefficients}};
}

inline void from_json(const nlohmann::json& j, ConversionCurve& c)
{
    std::vector<std::pair<double, double>> knots;
    const auto z = j.at("zeta").get<std::vector<double>>();
    const auto x = j.at("xi").get<std::vector<double>>();
    if (z.size() != x.size())
        throw DomainError("ConversionCurve: zeta and xi lengths differ");
    for (std::size_t i = 0; i < z.size(); ++i)
        knots.emplace_back(z[i], x[i]);
    c = build_conversion(knots);
}

} // namespace bele

#endif // BELE_CALIBRATION_HPP
