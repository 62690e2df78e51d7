#pragma once

#include "conjlab/core/random.hpp"
#include "conjlab/gauss/correlation.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace conjlab::limit {

/// Law of a random time change Theta >= 0 with bounded support.
class TimeChangeLaw {
public:
    enum class Kind { Discrete, Uniform };

    struct Atom {
        double value;
        double prob;
    };

    /// At least two distinct non-negative atoms with positive probabilities
    /// summing to one (within 1e-9).
    static TimeChangeLaw discrete(std::vector<Atom> atoms);
    static TimeChangeLaw uniform(double lo, double hi);

    Kind kind() const { return kind_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    /// Consumes exactly one uniform from the stream.
    double sample(RandomStream& stream) const;

    /// Upper bound on E f(Theta) for f nonincreasing: exact for discrete laws,
    /// left-endpoint cell sums for the uniform law.
    double expect_nonincreasing_upper(const std::function<double(double)>& f,
                                      int cells = 256) const;

    std::string describe() const;

private:
    TimeChangeLaw() = default;

    Kind kind_ = Kind::Discrete;
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
    double lo_ = 0.0;
    double hi_ = 0.0;
};

struct ProcessSpec {
    gauss::CorrelationModel model;
    double b = 1.0;
    std::optional<TimeChangeLaw> theta;

    explicit ProcessSpec(gauss::CorrelationModel m, double scale = 1.0,
                         std::optional<TimeChangeLaw> law = std::nullopt);
};

/// n independent stationary processes.
class EnsembleSpec {
public:
    explicit EnsembleSpec(std::vector<ProcessSpec> processes);
    /// n copies of the same model.
    static EnsembleSpec homogeneous(std::size_t n, const gauss::CorrelationModel& model);

    std::size_t n() const { return processes_.size(); }
    const ProcessSpec& operator[](std::size_t i) const { return processes_[i]; }
    const std::vector<ProcessSpec>& processes() const { return processes_; }

    double alpha_min() const;
    bool active(std::size_t i) const;
    std::vector<std::size_t> active_set() const;

    /// First j processes.
    EnsembleSpec prefix(std::size_t j) const;

    std::string describe() const;

private:
    std::vector<ProcessSpec> processes_;
};

struct LimitVariant {
    enum class Kind { Standard, OrderStat, TimeChanged, NonStandard };

    Kind kind = Kind::Standard;
    std::size_t j = 0;  ///< OrderStat only

    static LimitVariant standard() { return {Kind::Standard, 0}; }
    static LimitVariant order_stat(std::size_t j) { return {Kind::OrderStat, j}; }
    static LimitVariant time_changed() { return {Kind::TimeChanged, 0}; }
    static LimitVariant non_standard() { return {Kind::NonStandard, 0}; }

    std::string describe() const;
};

LimitVariant::Kind limit_kind_from_string(const std::string& name);
std::string to_string(LimitVariant::Kind kind);

/// Throws ConfigError when the spec does not satisfy the variant's restrictions:
/// scales b != 1 need NonStandard, time changes need TimeChanged (and every
/// process must carry one), OrderStat(j) needs 1 <= j <= n, equal alphas and C = 1.
void validate(const EnsembleSpec& spec, const LimitVariant& variant);

/// Number of leading processes that take part in the variant (j for OrderStat, else n).
std::size_t participating(const EnsembleSpec& spec, const LimitVariant& variant);

} // namespace conjlab::limit
