#ifndef BELE_FUSION_HPP
#define BELE_FUSION_HPP

// Affine fusion of the edge index E (BELE_cold) and the texture index T
// (CPSNR): B = D0 + D1E * E + D1T * T, fitted with Huber-weighted IRLS.

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bele/core_model.hpp"
#include "bele/error.hpp"
#include "bele/stats.hpp"

namespace bele
{

struct FusionSample
{
    double e = 0.0;
    double t = 0.0;
    double dmos = 0.0;
};

struct FusionCoefficients
{
    double d0 = 0.0;
    double d1_e = 1.0;
    double d1_t = 0.0;
    double residual_rmse = 0.0;
    std::size_t n_samples = 0;
    /// IRLS iterations used by the fit (0 for hand-built coefficients).
    int iterations = 0;

    void validate() const
    {
        if (!std::isfinite(d0) || !std::isfinite(d1_e) || !std::isfinite(d1_t))
            throw DomainError("FusionCoefficients: coefficients must be finite");
    }
};

struct FusionOptions
{
    double huber_k = 1.345;
    int max_iterations = 100;
    double tolerance = 1e-9;
    double max_condition = 1e12;
};

inline constexpr double mad_to_sigma = 1.4826;

namespace detail
{

inline void require_samples(std::span<const FusionSample> samples, std::size_t min_n, const char* where)
{
    if (samples.size() < min_n)
        throw DegenerateInputError(std::string(where) + ": need at least " + std::to_string(min_n) + " samples");
    for (const FusionSample& s : samples)
        if (!std::isfinite(s.e) || !std::isfinite(s.t) || !std::isfinite(s.dmos))
            throw DomainError(std::string(where) + ": non-finite sample");
}

/// 2-norm condition number after scaling every column to unit norm.
inline double equilibrated_condition(const Eigen::MatrixXd& x)
{
    Eigen::MatrixXd s = x;
    for (Eigen::Index j = 0; j < s.cols(); ++j)
    {
        const double n = s.col(j).norm();
        if (n == 0.0)
            return std::numeric_limits<double>::infinity();
        s.col(j) /= n;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(s);
    const auto& sv = svd.singularValues();
    const double lo = sv(sv.size() - 1);
    return lo > 0.0 ? sv(0) / lo : std::numeric_limits<double>::infinity();
}

inline void require_full_rank(const Eigen::MatrixXd& x, double max_condition, const char* where)
{
    const double c = equilibrated_condition(x);
    if (!(c <= max_condition))
        throw RankDeficiencyError(std::string(where) + ": design matrix is numerically singular", c);
}

inline Eigen::VectorXd weighted_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w)
{
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXd xw = sw.asDiagonal() * x;
    const Eigen::VectorXd yw = sw.cwiseProduct(y);
    return xw.colPivHouseholderQr().solve(yw);
}

inline double residual_sum_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
{
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    return (y - x * beta).squaredNorm();
}

} // namespace detail

/// Huber M-estimate of the affine model by iteratively reweighted least
/// squares, starting from ordinary least squares. The residual scale is
/// re-estimated each iteration as 1.4826 * MAD.
inline FusionCoefficients fit_fusion(std::span<const FusionSample> samples, const FusionOptions& options = {})
{
    detail::require_samples(samples, 3, "fit_fusion");
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const FusionSample& s = samples[static_cast<std::size_t>(i)];
        x(i, 0) = 1.0;
        x(i, 1) = s.e;
        x(i, 2) = s.t;
        y(i) = s.dmos;
    }
    detail::require_full_rank(x, options.max_condition, "fit_fusion");

    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd beta = detail::weighted_solve(x, y, w);
    const double y_scale = std::max(1.0, y.cwiseAbs().maxCoeff());

    int it = 0;
    for (; it < options.max_iterations; ++it)
    {
        const Eigen::VectorXd r = y - x * beta;
        std::vector<double> abs_r(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i)
            abs_r[static_cast<std::size_t>(i)] = std::abs(r(i));
        const double scale = mad_to_sigma * stats::median(abs_r);
        // More than half the residuals vanish: the fit already passes through
        // the majority of the data.
        if (scale <= 1e-14 * y_scale)
            break;
        const double delta = options.huber_k * scale;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const double a = std::abs(r(i));
            w(i) = a <= delta ? 1.0 : delta / a;
        }
        const Eigen::VectorXd next = detail::weighted_solve(x, y, w);
        const double change = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (change < options.tolerance)
        {
            ++it;
            break;
        }
    }

    FusionCoefficients c;
    c.d0 = beta(0);
    c.d1_e = beta(1);
    c.d1_t = beta(2);
    c.n_samples = samples.size();
    c.residual_rmse = std::sqrt((y - x * beta).squaredNorm() / static_cast<double>(n));
    c.iterations = it;
    return c;
}

/// Ordinary least squares on the same design (reference for robustness checks).
inline FusionCoefficients fit_fusion_ols(std::span<const FusionSample> samples,
                                         double max_condition = FusionOptions{}.max_condition)
{
    FusionOptions o;
    o.max_iterations = 0;
    o.max_condition = max_condition;
    return fit_fusion(samples, o);
}

/// D0 + D1E e + D1T t, clamped to [0, 100].
inline DmosScore predict(const FusionCoefficients& c, double e, double t)
{
    c.validate();
    if (!std::isfinite(e) || !std::isfinite(t))
        throw DomainError("predict: non-finite index value");
    return DmosScore(std::clamp(c.d0 + c.d1_e * e + c.d1_t * t, 0.0, 100.0));
}

struct CrossSensitivityReport
{
    /// Share of the quadratic model's explained variance lost when the E*T
    /// term is dropped.
    double interaction_ratio = 0.0;
    double interaction_coefficient = 0.0;
    double r_squared = 0.0;
    std::size_t n_samples = 0;
};

/// Fits dmos ~ 1 + E + T + E^2 + T^2 + E*T and compares it with the same
/// model without the E*T column.
inline CrossSensitivityReport cross_sensitivity_report(std::span<const FusionSample> samples,
                                                       double max_condition = FusionOptions{}.max_condition)
{
    detail::require_samples(samples, 10, "cross_sensitivity_report");
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd full(n, 6);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const FusionSample& s = samples[static_cast<std::size_t>(i)];
        full.row(i) << 1.0, s.e, s.t, s.e * s.e, s.t * s.t, s.e * s.t;
        y(i) = s.dmos;
    }
    detail::require_full_rank(full, max_condition, "cross_sensitivity_report");
    const Eigen::MatrixXd reduced = full.leftCols(5);

    const Eigen::VectorXd beta = full.colPivHouseholderQr().solve(y);
    const double ssr_full = (y - full * beta).squaredNorm();
    const double ssr_reduced = detail::residual_sum_squares(reduced, y);
    const double sst = (y.array() - y.mean()).square().sum();

    CrossSensitivityReport r;
    r.n_samples = samples.size();
    r.interaction_coefficient = beta(5);
    const double explained = sst - ssr_full;
    r.r_squared = sst > 0.0 ? explained / sst : 1.0;
    r.interaction_ratio = explained > 0.0 ? std::clamp((ssr_reduced - ssr_full) / explained, 0.0, 1.0) : 0.0;
    return r;
}

inline void to_json(nlohmann::json& j, const FusionCoefficients& c)
{
    j = nlohmann::json{{"d0", c.d0},
                       {"d1_e", c.d1_e},
                       {"d1_t", c.d1_t},
                       {"residual_rmse", c.residual_rmse},
                       {"n_samples", c.n_samples}};
}

inline void from_json(const nlohmann::json& j, FusionCoefficients& c)
{
    c.d0 = j.at("d0").get<double>();
    c.d1_e = j.at("d1_e").get<double>();
    c.d1_t = j.at("d1_t").get<double>();
    c.residual_rmse = j.value("residual_rmse", 0.0);
    c.n_samples = j.value("n_samples", std::size_t{0});
    c.validate();
}

inline void to_json(nlohmann::json& j, const CrossSensitivityReport& r)
{
    j = nlohmann::json{{"interaction_ratio", r.interaction_ratio},
                       {"interaction_coefficient", r.interaction_coefficient},
                       {"r_squared", r.r_squared},
                       {"n_samples", r.n_samples}};
}

} // namespace bele

#endif // BELE_FUSION_HPP
