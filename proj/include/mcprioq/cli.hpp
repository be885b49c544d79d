#ifndef MCPRIOQ_CLI_HPP_
#define MCPRIOQ_CLI_HPP_

/// \file
/// Command implementations behind the `mcprioq` executable. Each returns a
/// process exit code: 0 success, 1 input or validation error, 2 invariant
/// violation.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>

#include "mcprioq/bench.hpp"
#include "mcprioq/rational.hpp"

namespace mcprioq {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitInvariant = 2;

struct IngestOptions {
  std::string input_path;
  std::string snapshot_out;
  std::optional<std::uint64_t> decay_every;
  Rational decay_factor{1, 2};
  bool lenient = false;
};

struct TopN {
  std::size_t k;
};
struct Threshold {
  double t;
};

struct QueryOptions {
  std::string snapshot_path;
  std::string src;
  std::variant<TopN, Threshold> mode = TopN{10};
};

struct DecayOptions {
  std::string snapshot_in;
  Rational factor{1, 2};
  std::string snapshot_out;
};

struct BenchOptions {
  WorkloadConfig workload;
  bool json = false;
  /// Written after the run when non-empty.
  std::string snapshot_out;
};

int cmd_ingest(const IngestOptions& options, std::ostream& out, std::ostream& err);
int cmd_query(const QueryOptions& options, std::ostream& out, std::ostream& err);
int cmd_decay(const DecayOptions& options, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a command.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// `<dst>,<probability>` with six fractional digits.
std::string format_item(const std::string& dst, double probability);

}  // namespace mcprioq

#endif  // MCPRIOQ_CLI_HPP_
