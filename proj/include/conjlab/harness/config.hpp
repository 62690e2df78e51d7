#pragma once

#include "conjlab/limit/ensemble.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace conjlab::harness {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Reads a YAML or JSON file (chosen by content: JSON when the first
/// non-blank character is '{') into a JSON tree.
Json load_document(const std::filesystem::path& path);
Json parse_document(const std::string& text);

/// Typed, range-checked view of one mapping in a config. Every key read is
/// recorded; finish() rejects the rest as unknown.
class Section {
public:
    Section(const Json& node, std::string path);

    const std::string& path() const { return path_; }
    bool has(const std::string& key) const;

    double number(const std::string& key, std::optional<double> fallback, double lo, double hi,
                  bool lo_open = false) const;
    std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback, std::uint64_t lo,
                        std::uint64_t hi) const;
    bool flag(const std::string& key, bool fallback) const;
    std::string text(const std::string& key, std::optional<std::string> fallback,
                     const std::vector<std::string>& allowed = {}) const;
    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback, double lo,
                                double hi, bool lo_open = false) const;
    std::vector<std::uint64_t> counts(const std::string& key, std::optional<std::vector<std::uint64_t>> fallback,
                                      std::uint64_t lo, std::uint64_t hi) const;
    Section section(const std::string& key) const;
    /// Elements of an array of mappings.
    std::vector<Section> sections(const std::string& key) const;
    const Json& raw(const std::string& key) const;
    /// Marks a key as known without reading it.
    void accept(const std::string& key) const { used_.insert(key); }

    void finish() const;

private:
    const Json* value(const std::string& key) const;
    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json* node_;
    std::string path_;
    mutable std::set<std::string> used_;
};

limit::EnsembleSpec parse_ensemble(const Section& section);
limit::LimitVariant parse_variant(const Section& section);

} // namespace conjlab::harness
