#pragma once

#include "chemo/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace chemo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitDiverged = 2;
inline constexpr int kExitConfig = 3;

/// 2 for numerical failures (divergence, oscillation, stalled flows), 3 for everything a
/// config file can get wrong.
int exit_code(ErrorCode code) noexcept;

struct RunContext {
    std::filesystem::path out_dir = ".";
    unsigned threads = 0;  ///< 0: hardware concurrency
    std::uint64_t seed = 0;
};

/// The density described by cfg.density with mass m on grid.
RadialField<double> make_density(const DensitySpec& spec, const RadialGrid<double>& grid, double m,
                                 std::uint64_t seed);

/// A CSV table. Cells are preformatted; write() prefixes the '#' header.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    std::string render(const std::string& header) const;
};

/// '#'-prefixed lines: artifact version, seed, and the echoed config.
std::string output_header(const RunConfig& cfg, const RunContext& ctx);

/// Runs one command and writes its tables to ctx.out_dir. Diagnostics go to err.
int run(const RunConfig& cfg, const RunContext& ctx, std::ostream& err);

/// Reads and parses the config file, then run(). Parse failures return kExitConfig.
int run_file(const std::filesystem::path& config, const RunContext& ctx, std::ostream& err);

} // namespace chemo
