#include "conjlab/limit/ensemble.hpp"

#include "conjlab/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace conjlab::limit {

TimeChangeLaw TimeChangeLaw::discrete(std::vector<Atom> atoms) {
    std::set<double> values;
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!(a.value >= 0.0) || !std::isfinite(a.value))
            throw ConfigError("time-change atoms must be finite and non-negative");
        if (!(a.prob > 0.0)) throw ConfigError("time-change atom probabilities must be positive");
        values.insert(a.value);
        total += a.prob;
    }
    if (values.size() < 2)
        throw ConfigError("time-change law must be non-degenerate (at least two distinct values)");
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("time-change probabilities must sum to 1");
    TimeChangeLaw law;
    law.kind_ = Kind::Discrete;
    law.atoms_ = std::move(atoms);
    double acc = 0.0;
    for (const auto& a : law.atoms_) law.cumulative_.push_back(acc += a.prob / total);
    law.cumulative_.back() = 1.0;
    law.lo_ = *values.begin();
    law.hi_ = *values.rbegin();
    return law;
}

TimeChangeLaw TimeChangeLaw::uniform(double lo, double hi) {
    if (!(lo >= 0.0) || !std::isfinite(hi) || !(hi > lo))
        throw ConfigError("uniform time change needs 0 <= lo < hi < infinity");
    TimeChangeLaw law;
    law.kind_ = Kind::Uniform;
    law.lo_ = lo;
    law.hi_ = hi;
    return law;
}

double TimeChangeLaw::sample(RandomStream& stream) const {
    const double u = stream.uniform();
    if (kind_ == Kind::Uniform) return lo_ + (hi_ - lo_) * u;
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    return atoms_[static_cast<std::size_t>(it - cumulative_.begin())].value;
}

double TimeChangeLaw::expect_nonincreasing_upper(const std::function<double(double)>& f,
                                                 int cells) const {
    double s = 0.0;
    if (kind_ == Kind::Discrete) {
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const double w = cumulative_[i] - (i == 0 ? 0.0 : cumulative_[i - 1]);
            s += w * f(atoms_[i].value);
        }
        return s;
    }
    const double h = (hi_ - lo_) / cells;
    for (int c = 0; c < cells; ++c) s += f(lo_ + c * h);
    return s / cells;
}

std::string TimeChangeLaw::describe() const {
    std::ostringstream os;
    if (kind_ == Kind::Uniform) {
        os << "uniform(" << lo_ << ", " << hi_ << ")";
    } else {
        os << "discrete(";
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            os << (i ? ", " : "") << atoms_[i].value << ":" << atoms_[i].prob;
        os << ")";
    }
    return os.str();
}

ProcessSpec::ProcessSpec(gauss::CorrelationModel m, double scale, std::optional<TimeChangeLaw> law)
    : model(m), b(scale), theta(std::move(law)) {
    if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("process scale b must be positive and finite");
}

EnsembleSpec::EnsembleSpec(std::vector<ProcessSpec> processes) : processes_(std::move(processes)) {
    if (processes_.empty()) throw ConfigError("ensemble needs at least one process");
}

EnsembleSpec EnsembleSpec::homogeneous(std::size_t n, const gauss::CorrelationModel& model) {
    return EnsembleSpec(std::vector<ProcessSpec>(n, ProcessSpec(model)));
}

double EnsembleSpec::alpha_min() const {
    double a = processes_.front().model.alpha();
    for (const auto& p : processes_) a = std::min(a, p.model.alpha());
    return a;
}

bool EnsembleSpec::active(std::size_t i) const { return processes_.at(i).model.alpha() == alpha_min(); }

std::vector<std::size_t> EnsembleSpec::active_set() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n(); ++i)
        if (active(i)) out.push_back(i);
    return out;
}

EnsembleSpec EnsembleSpec::prefix(std::size_t j) const {
    if (j == 0 || j > n()) throw ConfigError("prefix length out of range");
    return EnsembleSpec(std::vector<ProcessSpec>(processes_.begin(), processes_.begin() + j));
}

std::string EnsembleSpec::describe() const {
    std::ostringstream os;
    os << "n=" << n();
    for (std::size_t i = 0; i < n(); ++i) {
        os << "; X" << i + 1 << ": " << processes_[i].model.describe();
        if (processes_[i].b != 1.0) os << " b=" << processes_[i].b;
        if (processes_[i].theta) os << " theta~" << processes_[i].theta->describe();
    }
    return os.str();
}

std::string to_string(LimitVariant::Kind kind) {
    switch (kind) {
    case LimitVariant::Kind::Standard: return "standard";
    case LimitVariant::Kind::OrderStat: return "order_stat";
    case LimitVariant::Kind::TimeChanged: return "time_changed";
    case LimitVariant::Kind::NonStandard: return "non_standard";
    }
    return "?";
}

LimitVariant::Kind limit_kind_from_string(const std::string& name) {
    for (auto k : {LimitVariant::Kind::Standard, LimitVariant::Kind::OrderStat,
                   LimitVariant::Kind::TimeChanged, LimitVariant::Kind::NonStandard})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown variant '" + name +
                      "' (expected standard, order_stat, time_changed or non_standard)");
}

std::string LimitVariant::describe() const {
    if (kind == Kind::OrderStat) return "order_stat(j=" + std::to_string(j) + ")";
    return to_string(kind);
}

void validate(const EnsembleSpec& spec, const LimitVariant& variant) {
    using K = LimitVariant::Kind;
    for (std::size_t i = 0; i < spec.n(); ++i) {
        const auto& p = spec[i];
        if (p.b != 1.0 && variant.kind != K::NonStandard)
            throw ConfigError("process " + std::to_string(i + 1) +
                              " has scale b != 1, which requires the non_standard variant");
        if (p.theta && variant.kind != K::TimeChanged)
            throw ConfigError("process " + std::to_string(i + 1) +
                              " has a time change, which requires the time_changed variant");
        if (!p.theta && variant.kind == K::TimeChanged)
            throw ConfigError("time_changed variant needs a time-change law for every process (missing for process " +
                              std::to_string(i + 1) + ")");
    }
    if (variant.kind == K::OrderStat) {
        if (variant.j < 1 || variant.j > spec.n())
            throw ConfigError("order statistic index j must lie in 1..n");
        const double alpha = spec[0].model.alpha();
        for (const auto& p : spec.processes()) {
            if (p.model.alpha() != alpha)
                throw ConfigError("order_stat variant requires equal alpha for all processes");
            if (p.model.C() != 1.0) throw ConfigError("order_stat variant requires C = 1 for all processes");
        }
    }
}

std::size_t participating(const EnsembleSpec& spec, const LimitVariant& variant) {
    return variant.kind == LimitVariant::Kind::OrderStat ? variant.j : spec.n();
}

} // namespace conjlab::limit
