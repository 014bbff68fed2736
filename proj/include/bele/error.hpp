#ifndef BELE_ERROR_HPP
#define BELE_ERROR_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bele
{

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Image or field dimensions are incompatible.
class DimensionError : public Error
{
public:
    using Error::Error;
};

/// Input is valid but carries no usable information (empty region, constant vector, ...).
class DegenerateInputError : public Error
{
public:
    using Error::Error;
};

/// A DMOS value reached or exceeded the canonical anchor 100*Q.
class SaturationError : public DomainError
{
public:
    using DomainError::DomainError;
};

class RankDeficiencyError : public Error
{
public:
    RankDeficiencyError(const std::string& what, double condition)
        : Error(what), condition_(condition)
    {
    }

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// An optimizer gave up; the best point found is still reported.
class ConvergenceError : public Error
{
public:
    ConvergenceError(const std::string& what, std::vector<double> best, double residual)
        : Error(what), best_(std::move(best)), residual_(residual)
    {
    }

    const std::vector<double>& best() const noexcept { return best_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<double> best_;
    double residual_;
};

class ParseError : public Error
{
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MissingFileError : public Error
{
public:
    explicit MissingFileError(std::vector<std::filesystem::path> paths)
        : Error(make_message(paths)), paths_(std::move(paths))
    {
    }

    const std::vector<std::filesystem::path>& paths() const noexcept { return paths_; }

private:
    static std::string make_message(const std::vector<std::filesystem::path>& paths)
    {
        std::string msg = "missing file(s):";
        for (const auto& p : paths)
            msg += " " + p.string();
        return msg;
    }

    std::vector<std::filesystem::path> paths_;
};

/// Image bytes could not be decoded.
class DecodeError : public Error
{
public:
    using Error::Error;
};

/// An output file could not be written.
class OutputError : public Error
{
public:
    using Error::Error;
};

} // namespace bele

#endif // BELE_ERROR_HPP
