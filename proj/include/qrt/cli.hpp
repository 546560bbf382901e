// Command-level functionality shared by the command-line tool and tests:
// object-spec parsing, monotone queries, bound evaluation, figure CSV
// generation and the self-test entry point.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qrt/bounds.hpp"
#include "qrt/channels.hpp"
#include "qrt/measures.hpp"

namespace qrt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

// "name:key=value,key=value" channel descriptions; e.g. "depolarizing:p=0.3",
// "identity:d=2", "noisy_t:p=0.25", or "file=<path>" for the text format.
channels::Channel parse_channel_spec(const std::string& spec);

// named states ("T", "CCZ", "CS", "mixed:d=2", "ket:i=0,d=2") or a file with
// "d" followed by d*d entries as "re im" pairs
qla::DensityOperator parse_state_spec(const std::string& spec);

struct MeasureArgs {
    std::string theory;    // ns | ppt | sep | stab | coherence
    std::string channel;   // exactly one of channel/state
    std::string state;
    std::string monotone;  // robustness | weight | fidelity
    std::string cache_dir;
};
int cmd_measure(const MeasureArgs& args, std::ostream& out, std::ostream& err);

struct BoundArgs {
    std::string id;  // error-floor | state-error-floor | previous-bound | copy-floor |
                     // transform-floor | rate-ceiling | prob-floor | prob-state-floor
    std::map<std::string, double> inputs;  // R, W, F, m, eps, p, trM, lambda_min,
                                           // R_out, W_out, Dinf
};
int cmd_bound(const BoundArgs& args, std::ostream& out, std::ostream& err);

struct FigureSpec {
    std::string id;            // 2a 2b 2c 2d 3a 3b 4a 4b
    std::vector<double> grid;  // empty = per-figure default
    std::string out_path;
    std::uint64_t seed = 1;
    std::string cache_dir;
};
int cmd_fig(const FigureSpec& spec, std::ostream& out, std::ostream& err);

// figure rows as (header, data) for direct use in tests
struct FigureData {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
FigureData compute_figure(const FigureSpec& spec);
std::string to_csv(const FigureData& data);  // 12 significant digits, '.' decimal

int cmd_selftest(std::ostream& out, const std::string& cache_dir);

}  // namespace qrt::cli
