#pragma once

#include "conjlab/core/random.hpp"
#include "conjlab/harness/config.hpp"

#include <cstdint>
#include <string>
#include <filesystem>
#include <memory>
#include <variant>
#include <vector>

namespace conjlab::harness {

using Cell = std::variant<double, std::int64_t, std::string>;

struct CsvTable {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

std::string format_cell(const Cell& c);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Compact deterministic JSON text with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& doc);
/// NaN and infinities become null.
Json number(double x);

/// Hands out stream blocks in call order and remembers them for the manifest.
class StreamLedger {
public:
    explicit StreamLedger(std::uint64_t master_seed) : master_{master_seed, 0} {}

    StreamBlock next(const std::string& label);
    std::uint64_t master_seed() const { return master_.master_seed; }
    Json records() const { return records_; }

private:
    StreamBlock master_;
    std::uint64_t next_job_ = 0;
    Json records_ = Json::array();
};

struct CommandOutput {
    std::string name;  ///< result JSON base name
    Json result;
    std::vector<CsvTable> tables;
};

/// A parsed command block; run() executes it.
class Command {
public:
    virtual ~Command() = default;
    virtual CommandOutput run(StreamLedger& streams, unsigned jobs) const = 0;
};

/// Validates the whole config and returns the block for `command`.
std::unique_ptr<Command> parse_command(const std::string& command, const Json& config);

std::string block_name(const std::string& command);

} // namespace conjlab::harness

namespace conjlab::harness {
std::vector<std::string> write_plot_data(const std::filesystem::path& dir, const std::string& name, const Json& result);
}
