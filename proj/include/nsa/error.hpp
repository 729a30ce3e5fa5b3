#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nsa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An evaluation ran but could not reach the requested accuracy.
class AccuracyFailure : public Error {
public:
    AccuracyFailure(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// The argument sits on (or numerically at) a zero of the denominator.
class PoleError : public Error {
public:
    PoleError(const std::string& what, double distance)
        : Error(what), distance_(distance) {}
    double distance() const noexcept { return distance_; }

private:
    double distance_;
};

class BranchError : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::vector<std::string> trace)
        : Error(what), trace_(std::move(trace)) {}
    const std::vector<std::string>& trace() const noexcept { return trace_; }

private:
    std::vector<std::string> trace_;
};

/// Newton landed on a root with Im k <= 0 (not square integrable).
class WrongSheet : public Error {
public:
    using Error::Error;
};

class ContourError : public Error {
public:
    using Error::Error;
};

class UnresolvedByGrid : public Error {
public:
    using Error::Error;
};

class BudgetInfeasible : public Error {
public:
    BudgetInfeasible(const std::string& what, std::string constraint, long long last_m)
        : Error(what), constraint_(std::move(constraint)), last_m_(last_m) {}
    const std::string& constraint() const noexcept { return constraint_; }
    long long last_m() const noexcept { return last_m_; }

private:
    std::string constraint_;
    long long last_m_;
};

class ShiftSearchFailure : public Error {
public:
    ShiftSearchFailure(const std::string& what, std::vector<double> deviations)
        : Error(what), deviations_(std::move(deviations)) {}
    const std::vector<double>& deviations() const noexcept { return deviations_; }

private:
    std::vector<double> deviations_;
};

class NotApplicable : public Error {
public:
    using Error::Error;
};

class InvalidLedger : public Error {
public:
    using Error::Error;
};

}  // namespace nsa
